use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::thread;

use uidobf::attribute::AttributionResult;
use uidobf::config::RunConfig;
use uidobf::obfuscate::Method;
use uidobf::pipeline::{self, read_articles, read_jsonl, Manifest, SelectionRecord, Stage, Status, VariantRecord};
use uidobf::Error;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

fn config(out: &Path, method: Method) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.corpus = Some(fixture("corpus.jsonl"));
    cfg.synonyms = Some(fixture("synonyms.tsv"));
    cfg.per_label_count = 8;
    cfg.method = method;
    cfg.seed = 3;
    cfg.out = out.to_path_buf();
    cfg
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    files
}

#[test]
fn stages_rerun_from_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), Method::Uws);
    pipeline::run(&cfg).unwrap();
    let full = snapshot(tmp.path());
    for name in [
        pipeline::SCORES,
        pipeline::SIMILARITY,
        pipeline::SELECTIONS,
        pipeline::ATTRIBUTIONS,
        pipeline::EVALUATION,
    ] {
        fs::remove_file(tmp.path().join(name)).unwrap();
    }
    fs::remove_dir_all(tmp.path().join(pipeline::REPORT_DIR)).unwrap();
    for stage in [Stage::Score, Stage::Select, Stage::Classify, Stage::Evaluate, Stage::Report] {
        pipeline::run_stage(&cfg, stage).unwrap();
    }
    assert_eq!(snapshot(tmp.path()), full);
}

#[test]
fn manifest_covers_every_article() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), Method::Uws);
    pipeline::run(&cfg).unwrap();
    let articles = read_articles(tmp.path()).unwrap();
    assert_eq!(articles.len(), 16);
    let manifest = Manifest::load(tmp.path()).unwrap();
    assert_eq!(manifest.entries().len(), 16);
    for a in &articles {
        let e = manifest.get(&a.id).unwrap();
        assert_eq!((e.stage, e.status), (Stage::Report, Status::Ok), "{}", a.id);
    }

    let variants: Vec<VariantRecord> = read_jsonl(&tmp.path().join(pipeline::VARIANTS)).unwrap();
    assert_eq!(variants.len(), 16 * 10);
    let selections: Vec<SelectionRecord> = read_jsonl(&tmp.path().join(pipeline::SELECTIONS)).unwrap();
    assert_eq!(selections.len(), 16 * 2);
    let attributions: Vec<AttributionResult> = read_jsonl(&tmp.path().join(pipeline::ATTRIBUTIONS)).unwrap();
    assert_eq!(attributions.len(), 16 * 3);
    let written = fs::read_to_string(tmp.path().join(pipeline::RUN_CONFIG)).unwrap();
    assert!(written.contains("method = uws"));
    assert!(!written.contains("out ="));
}

#[test]
fn synonym_swap_skips_selection() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), Method::SynonymSwap);
    let reports = pipeline::run(&cfg).unwrap();
    assert!(reports.iter().any(|r| r.stage == Stage::Select && r.skipped));
    assert!(!tmp.path().join(pipeline::SELECTIONS).exists());
    assert!(tmp.path().join(pipeline::SWAPS).exists());
    let attributions: Vec<AttributionResult> = read_jsonl(&tmp.path().join(pipeline::ATTRIBUTIONS)).unwrap();
    assert_eq!(attributions.len(), 16 * 2);
}

#[test]
fn later_stage_without_inputs_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), Method::Uws);
    let err = pipeline::run_stage(&cfg, Stage::Score).unwrap_err();
    assert!(matches!(err, Error::StageFile { .. }), "{err}");
    assert_eq!(err.exit_code(), 1);
}

/// Detector endpoint that rejects any text mentioning `poison` and calls
/// everything else a coin flip.
fn flaky_detector(poison: &'static str) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 {
                    break;
                }
                if line.trim().is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        length = v.trim().parse().unwrap();
                    }
                }
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            let req: serde_json::Value = serde_json::from_slice(&body).unwrap();
            let (status, reply) = if req["text"].as_str().unwrap_or("").contains(poison) {
                (400, r#"{"v":1,"error":"rejected"}"#)
            } else {
                (200, r#"{"v":1,"label":"machine","probability":0.5}"#)
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{reply}",
                reply.len()
            );
        }
    });
    format!("http://{addr}")
}

#[test]
fn detector_failures_are_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(tmp.path(), Method::Uws);
    cfg.set("detectors", &format!("flaky={}", flaky_detector("Denver"))).unwrap();
    pipeline::run(&cfg).unwrap();

    let articles = read_articles(tmp.path()).unwrap();
    let poisoned: Vec<&str> = articles
        .iter()
        .filter(|a| a.text.contains("Denver"))
        .map(|a| a.id.as_str())
        .collect();
    assert!(!poisoned.is_empty() && poisoned.len() < articles.len());

    let manifest = Manifest::load(tmp.path()).unwrap();
    assert_eq!(manifest.failed(), poisoned.len());
    for id in &poisoned {
        let e = manifest.get(id).unwrap();
        assert_eq!((e.stage, e.status), (Stage::Classify, Status::Failed));
        assert!(e.error.as_deref().unwrap().contains("rejected"));
    }
    let failures: Vec<serde_json::Value> =
        read_jsonl(&tmp.path().join(pipeline::ATTRIBUTION_FAILURES)).unwrap();
    assert_eq!(failures.len(), poisoned.len() * 3);
    let attributions: Vec<AttributionResult> = read_jsonl(&tmp.path().join(pipeline::ATTRIBUTIONS)).unwrap();
    assert_eq!(attributions.len(), (articles.len() - poisoned.len()) * 3);
    assert!(attributions.iter().all(|r| r.detector == "flaky"));
}

#[test]
fn all_detector_failures_fail_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(tmp.path(), Method::Uws);
    cfg.set("detectors", &format!("flaky={}", flaky_detector(" "))).unwrap();
    let err = pipeline::run(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 4, "{err}");
    assert_eq!(Manifest::load(tmp.path()).unwrap().failed(), 16);
}
