//! Stage-by-stage batch pipeline. Each stage reads only files written by
//! earlier stages under the output directory, so any stage can be re-run
//! on its own. Nothing time-dependent is written, which keeps the output
//! tree byte-identical for a fixed configuration with reference models.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::adapter::AdapterClient;
use crate::attribute::{
    classify_batch, AttributionResult, ClassifyFailure, ClassifyItem, DetectorClient, RetryPolicy,
    StubDetector, VariantKind,
};
use crate::config::{DetectorSpec, ModelSpec, RunConfig};
use crate::corpus::{load_corpus, parse_corpus, segment, Article, AuthorLabel, SampleSpec};
use crate::error::{Error, Result, ScorerError};
use crate::evaluate::{confusion, label_shift, metrics, scatter_dataset, LabelShift, MetricsReport, PointFlag};
use crate::lexicon::{load_synonyms, SynonymDb, TargetCriteria};
use crate::obfuscate::{
    synonym_swap, up_alternates, uws_alternates, AlternateSet, Method, ParaphraseOptions, ScoredVariant,
    Swap, SwapOptions,
};
use crate::report;
use crate::scorer::{BigramScorer, CausalScorer, MaskedPredictor, Paraphraser, SlotFrequencyPredictor, StubParaphraser};
use crate::select::{select_candidate, Metric, SelectionResult};
use crate::similarity::{CountCosine, SimilarityScorer};
use crate::uid::{uid_scores, write_scores_csv, ScoreRow, UidScores};

pub const ARTICLES: &str = "articles.jsonl";
pub const VARIANTS: &str = "variants.jsonl";
pub const SWAPS: &str = "swaps.jsonl";
pub const SCORES: &str = "scores.csv";
pub const SIMILARITY: &str = "similarity.csv";
pub const SELECTIONS: &str = "selections.jsonl";
pub const ATTRIBUTIONS: &str = "attributions.jsonl";
pub const ATTRIBUTION_FAILURES: &str = "attribution_failures.jsonl";
pub const EVALUATION: &str = "evaluation.json";
pub const METRICS: &str = "metrics.csv";
pub const CONFUSION: &str = "confusion.csv";
pub const LABEL_SHIFT: &str = "label_shift.csv";
pub const PLOTS_DIR: &str = "plots";
pub const REPORT_DIR: &str = "report";
pub const MANIFEST: &str = "manifest.json";
pub const RUN_CONFIG: &str = "run_config.txt";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Obfuscate,
    Score,
    Select,
    Classify,
    Evaluate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Obfuscate,
        Stage::Score,
        Stage::Select,
        Stage::Classify,
        Stage::Evaluate,
        Stage::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Obfuscate => "obfuscate",
            Stage::Score => "score",
            Stage::Select => "select",
            Stage::Classify => "classify",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---------------------------------------------------------------------------
// Stage files
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub article_id: String,
    pub method: Method,
    pub variant_index: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapRecord {
    pub article_id: String,
    #[serde(flatten)]
    pub swap: Swap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRow {
    pub article_id: String,
    pub variant_index: usize,
    pub similarity: f64,
}

/// A selection plus the text that goes forward (the original on fallback).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub article_id: String,
    pub method: Method,
    pub metric: Metric,
    pub chosen_variant_index: Option<usize>,
    pub chosen_similarity: f64,
    pub chosen_uid_delta: f64,
    pub fallback: bool,
    pub text: String,
}

impl SelectionRecord {
    pub fn result(&self) -> SelectionResult {
        SelectionResult {
            article_id: self.article_id.clone(),
            metric: self.metric,
            chosen_variant_index: self.chosen_variant_index,
            chosen_similarity: self.chosen_similarity,
            chosen_uid_delta: self.chosen_uid_delta,
            fallback: self.fallback,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub article_id: String,
    pub variant_index: Option<usize>,
    pub similarity: f64,
    pub uid: f64,
    pub flag: PointFlag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationEntry {
    pub detector: String,
    pub variant: VariantKind,
    #[serde(flatten)]
    pub report: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftEntry {
    pub detector: String,
    pub variant: VariantKind,
    pub shift: LabelShift,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub method: Method,
    pub results: Vec<EvaluationEntry>,
    pub label_shift: Vec<ShiftEntry>,
}

pub fn scatter_file(metric: Metric) -> String {
    format!("scatter_{}.csv", metric.as_str())
}

fn stage_path(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::stage(path, "missing; run the earlier stages first")
        } else {
            Error::io(path, e)
        }
    })
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::stage(path, format!("line {}: {e}", i + 1))))
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| Error::stage(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::stage(path, e))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    finish(path, w)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::stage(path, e))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = read_text(path)?;
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| Error::stage(path, e)))
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row).map_err(|e| Error::stage(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_records(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| Error::stage(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| Error::stage(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

/// Per-article progress: the last stage an article reached and whether it
/// got through it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub article_id: String,
    pub stage: Stage,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest(BTreeMap<String, ManifestEntry>);

impl Manifest {
    pub fn load(out: &Path) -> Result<Self> {
        let entries: Vec<ManifestEntry> = read_json(&stage_path(out, MANIFEST))?;
        Ok(Manifest(entries.into_iter().map(|e| (e.article_id.clone(), e)).collect()))
    }

    pub fn save(&self, out: &Path) -> Result<()> {
        write_json(&stage_path(out, MANIFEST), &self.entries())
    }

    pub fn entries(&self) -> Vec<&ManifestEntry> {
        self.0.values().collect()
    }

    pub fn get(&self, id: &str) -> Option<&ManifestEntry> {
        self.0.get(id)
    }

    fn advance(&mut self, id: &str, stage: Stage) {
        match self.0.get_mut(id) {
            Some(e) if e.status == Status::Ok => e.stage = stage,
            Some(_) => {}
            None => {
                self.0.insert(
                    id.to_string(),
                    ManifestEntry {
                        article_id: id.to_string(),
                        stage,
                        status: Status::Ok,
                        error: None,
                    },
                );
            }
        }
    }

    fn fail(&mut self, id: &str, stage: Stage, error: String) {
        let entry = self.0.entry(id.to_string()).or_insert_with(|| ManifestEntry {
            article_id: id.to_string(),
            stage,
            status: Status::Failed,
            error: None,
        });
        if entry.status == Status::Ok {
            entry.stage = stage;
            entry.status = Status::Failed;
            entry.error = Some(error);
        }
    }

    pub fn failed(&self) -> usize {
        self.0.values().filter(|e| e.status == Status::Failed).count()
    }
}

/// What one stage did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageReport {
    pub stage: Stage,
    pub processed: usize,
    pub failed: usize,
    pub skipped: bool,
}

impl fmt::Display for StageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.skipped {
            write!(f, "{}: skipped", self.stage)
        } else {
            write!(f, "{}: {} processed, {} failed", self.stage, self.processed, self.failed)
        }
    }
}

/// Record per-article outcomes; a stage where every article failed turns
/// into an error so the process exit status reflects the cause.
fn settle<T>(
    out: &Path,
    stage: Stage,
    outcomes: Vec<(String, Result<T>)>,
) -> Result<(Vec<(String, T)>, StageReport)> {
    let mut manifest = Manifest::load(out)?;
    let processed = outcomes.len();
    let mut ok = Vec::new();
    let mut first_error = None;
    for (id, outcome) in outcomes {
        match outcome {
            Ok(v) => {
                manifest.advance(&id, stage);
                ok.push((id, v));
            }
            Err(e) => {
                log::warn!("{stage}: article {id}: {e}");
                manifest.fail(&id, stage, e.to_string());
                first_error.get_or_insert(e);
            }
        }
    }
    manifest.save(out)?;
    let failed = processed - ok.len();
    if processed > 0 && failed == processed {
        return Err(first_error.expect("at least one failure"));
    }
    Ok((
        ok,
        StageReport {
            stage,
            processed,
            failed,
            skipped: false,
        },
    ))
}

fn advance_all(out: &Path, stage: Stage, ids: impl IntoIterator<Item = String>) -> Result<usize> {
    let mut manifest = Manifest::load(out)?;
    let mut n = 0;
    for id in ids {
        manifest.advance(&id, stage);
        n += 1;
    }
    manifest.save(out)?;
    Ok(n)
}

fn map_articles<T, R, F>(items: &[T], concurrent: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if concurrent {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

fn texts(articles: &[Article]) -> impl Iterator<Item = &str> {
    articles.iter().map(|a| a.text.as_str())
}

pub fn causal_scorer(cfg: &RunConfig, articles: &[Article]) -> Result<Arc<dyn CausalScorer>> {
    Ok(match &cfg.scorer {
        ModelSpec::Reference => Arc::new(BigramScorer::fit(texts(articles))),
        ModelSpec::Adapter(spec) => Arc::new(AdapterClient::connect("scorer", spec)?),
    })
}

fn masked_predictor(cfg: &RunConfig, articles: &[Article]) -> Result<Box<dyn MaskedPredictor>> {
    Ok(match &cfg.predictor {
        ModelSpec::Reference => Box::new(SlotFrequencyPredictor::fit(texts(articles))),
        ModelSpec::Adapter(spec) => Box::new(AdapterClient::connect("predictor", spec)?),
    })
}

fn paraphraser(cfg: &RunConfig, synonyms: Option<&SynonymDb>) -> Result<Box<dyn Paraphraser>> {
    Ok(match &cfg.paraphraser {
        ModelSpec::Reference => {
            let db = synonyms.cloned().ok_or_else(|| Error::Config("reference paraphraser needs synonyms".into()))?;
            Box::new(StubParaphraser::new(db, cfg.seed))
        }
        ModelSpec::Adapter(spec) => Box::new(AdapterClient::connect("paraphraser", spec)?),
    })
}

pub fn detectors(cfg: &RunConfig, articles: &[Article]) -> Result<Vec<Box<dyn DetectorClient>>> {
    let needs_scorer = cfg.detectors.iter().any(|d| matches!(d, DetectorSpec::Stub { .. }));
    let scorer = if needs_scorer { Some(causal_scorer(cfg, articles)?) } else { None };
    cfg.detectors
        .iter()
        .map(|spec| -> Result<Box<dyn DetectorClient>> {
            Ok(match spec {
                DetectorSpec::Stub { name, tau, scale } => {
                    let scorer = scorer.clone().expect("stub scorer");
                    let stub = match tau {
                        Some(tau) => StubDetector::new(scorer, *tau, *scale),
                        None => StubDetector::calibrated(scorer, texts(articles), *scale)?,
                    };
                    log::info!("detector {name}: tau = {}", stub.tau());
                    Box::new(stub.with_name(name.clone()))
                }
                DetectorSpec::Adapter { name, endpoint } => Box::new(AdapterClient::connect(name.clone(), endpoint)?),
            })
        })
        .collect()
}

fn synonyms(cfg: &RunConfig) -> Result<Option<SynonymDb>> {
    match &cfg.synonyms {
        Some(path) => Ok(Some(load_synonyms(path)?)),
        None if cfg.needs_synonyms() => Err(Error::Config(format!("method {} needs a synonym database", cfg.method))),
        None => Ok(None),
    }
}

// ---------------------------------------------------------------------------
// Stage inputs
// ---------------------------------------------------------------------------

pub fn read_articles(out: &Path) -> Result<Vec<Article>> {
    let path = stage_path(out, ARTICLES);
    Ok(parse_corpus(&read_text(&path)?)
        .map_err(|e| Error::stage(&path, e))?
        .articles)
}

/// Variants grouped by article in file order, with the method they share.
fn read_variants(out: &Path) -> Result<(Method, BTreeMap<String, Vec<VariantRecord>>)> {
    let path = stage_path(out, VARIANTS);
    let records: Vec<VariantRecord> = read_jsonl(&path)?;
    let method = match records.first() {
        Some(r) => r.method,
        None => return Err(Error::stage(&path, "no variants")),
    };
    let mut grouped: BTreeMap<String, Vec<VariantRecord>> = BTreeMap::new();
    for r in records {
        if r.method != method {
            return Err(Error::stage(&path, "variants from more than one method"));
        }
        grouped.entry(r.article_id.clone()).or_default().push(r);
    }
    for (id, vs) in &mut grouped {
        vs.sort_by_key(|v| v.variant_index);
        if vs.iter().enumerate().any(|(i, v)| v.variant_index != i) {
            return Err(Error::stage(&path, format!("article {id}: variant indices are not 0..k")));
        }
    }
    Ok((method, grouped))
}

pub fn read_method(out: &Path) -> Result<Method> {
    Ok(read_variants(out)?.0)
}

/// Rebuild the scored alternate sets from the variant, score and
/// similarity files.
pub fn read_alternate_sets(out: &Path) -> Result<Vec<AlternateSet>> {
    let articles = read_articles(out)?;
    let (method, variants) = read_variants(out)?;
    let score_path = stage_path(out, SCORES);
    let mut scores: BTreeMap<(String, i64), UidScores> = BTreeMap::new();
    for row in read_csv::<ScoreRow>(&score_path)? {
        let uid = UidScores {
            variance: row.variance,
            diff_squared: row.diff_squared,
            token_count: row.token_count,
        };
        scores.insert((row.article_id, row.variant_index), uid);
    }
    let mut similarity: BTreeMap<(String, usize), f64> = BTreeMap::new();
    for row in read_csv::<SimilarityRow>(&stage_path(out, SIMILARITY))? {
        similarity.insert((row.article_id, row.variant_index), row.similarity);
    }

    let mut sets = Vec::new();
    for article in &articles {
        let Some(vs) = variants.get(&article.id) else { continue };
        let Some(original_uid) = scores.get(&(article.id.clone(), -1)).copied() else {
            continue;
        };
        let scored: Option<Vec<ScoredVariant>> = vs
            .iter()
            .map(|v| {
                Some(ScoredVariant {
                    index: v.variant_index,
                    text: v.text.clone(),
                    similarity: *similarity.get(&(article.id.clone(), v.variant_index))?,
                    uid: *scores.get(&(article.id.clone(), v.variant_index as i64))?,
                })
            })
            .collect();
        let Some(scored) = scored else { continue };
        sets.push(AlternateSet {
            article_id: article.id.clone(),
            method,
            original_text: article.text.clone(),
            original_uid,
            variants: scored,
        });
    }
    Ok(sets)
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

pub fn ingest(cfg: &RunConfig) -> Result<StageReport> {
    let corpus = cfg
        .corpus
        .as_ref()
        .ok_or_else(|| Error::Config("no corpus given".into()))?;
    let spec = SampleSpec {
        per_label_count: cfg.per_label_count,
        seed: cfg.seed,
        labels: cfg.labels.clone(),
    };
    let articles = load_corpus(corpus, &spec)?;
    fs::create_dir_all(&cfg.out)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", cfg.out.display())))?;
    write_jsonl(&stage_path(&cfg.out, ARTICLES), &articles)?;
    let manifest = Manifest(
        articles
            .iter()
            .map(|a| {
                (
                    a.id.clone(),
                    ManifestEntry {
                        article_id: a.id.clone(),
                        stage: Stage::Ingest,
                        status: Status::Ok,
                        error: None,
                    },
                )
            })
            .collect(),
    );
    manifest.save(&cfg.out)?;
    Ok(StageReport {
        stage: Stage::Ingest,
        processed: articles.len(),
        failed: 0,
        skipped: false,
    })
}

pub fn obfuscate(cfg: &RunConfig) -> Result<StageReport> {
    let out = &cfg.out;
    let articles = read_articles(out)?;
    let db = synonyms(cfg)?;
    let criteria = TargetCriteria::default();
    let method = cfg.method;

    let outcomes: Vec<(String, Result<(Vec<VariantRecord>, Vec<Swap>)>)> = match method {
        Method::SynonymSwap => {
            let scorer = causal_scorer(cfg, &articles)?;
            let db = db.as_ref().expect("checked by synonyms()");
            let opts = SwapOptions {
                criteria,
                underscores_to_spaces: cfg.underscores_to_spaces,
            };
            map_articles(&articles, scorer.is_concurrent(), |a| {
                let r = synonym_swap(&segment(a), db, scorer.as_ref(), &opts).map(|o| {
                    let record = VariantRecord {
                        article_id: a.id.clone(),
                        method,
                        variant_index: 0,
                        text: o.article.text,
                    };
                    (vec![record], o.swaps)
                });
                (a.id.clone(), r)
            })
        }
        Method::Uws => {
            let predictor = masked_predictor(cfg, &articles)?;
            let db = db.as_ref().expect("checked by synonyms()");
            map_articles(&articles, predictor.is_concurrent(), |a| {
                let r = uws_alternates(&segment(a), predictor.as_ref(), db, &criteria, cfg.k)
                    .map(|alt| (variant_records(cfg, a, method, alt.variants), Vec::new()));
                (a.id.clone(), r)
            })
        }
        Method::Up => {
            let para = paraphraser(cfg, db.as_ref())?;
            let opts = ParaphraseOptions {
                n: cfg.k,
                min_chars: cfg.min_paraphrase_chars,
                diversity_penalty: cfg.diversity_penalty,
                max_chars: cfg.max_paraphrase_chars,
            };
            map_articles(&articles, para.is_concurrent(), |a| {
                let r = up_alternates(&segment(a), para.as_ref(), &opts)
                    .map(|alt| (variant_records(cfg, a, method, alt.variants), Vec::new()));
                (a.id.clone(), r)
            })
        }
    };

    let (ok, report) = settle(out, Stage::Obfuscate, outcomes)?;
    let mut records = Vec::new();
    let mut swaps = Vec::new();
    for (id, (rs, ss)) in ok {
        records.extend(rs);
        swaps.extend(ss.into_iter().map(|swap| SwapRecord {
            article_id: id.clone(),
            swap,
        }));
    }
    write_jsonl(&stage_path(out, VARIANTS), &records)?;
    if method == Method::SynonymSwap {
        write_jsonl(&stage_path(out, SWAPS), &swaps)?;
    }
    Ok(report)
}

fn variant_records(cfg: &RunConfig, article: &Article, method: Method, texts: Vec<String>) -> Vec<VariantRecord> {
    texts
        .into_iter()
        .enumerate()
        .map(|(i, text)| VariantRecord {
            article_id: article.id.clone(),
            method,
            variant_index: i,
            text: if cfg.underscores_to_spaces { text.replace('_', " ") } else { text },
        })
        .collect()
}

pub fn score(cfg: &RunConfig) -> Result<StageReport> {
    let out = &cfg.out;
    let articles = read_articles(out)?;
    let (_, variants) = read_variants(out)?;
    let scorer = causal_scorer(cfg, &articles)?;
    let sim = CountCosine;
    let todo: Vec<(&Article, &Vec<VariantRecord>)> = articles
        .iter()
        .filter_map(|a| variants.get(&a.id).map(|v| (a, v)))
        .collect();

    let row = |id: &str, index: i64, uid: UidScores| ScoreRow {
        article_id: id.to_string(),
        variant_index: index,
        variance: uid.variance,
        diff_squared: uid.diff_squared,
        token_count: uid.token_count,
    };
    let outcomes = map_articles(&todo, scorer.is_concurrent(), |(a, vs)| {
        let r = (|| -> Result<(Vec<ScoreRow>, Vec<SimilarityRow>)> {
            let mut scores = vec![row(&a.id, -1, uid_scores(&a.text, scorer.as_ref())?)];
            let mut sims = Vec::with_capacity(vs.len());
            for v in vs.iter() {
                scores.push(row(&a.id, v.variant_index as i64, uid_scores(&v.text, scorer.as_ref())?));
                sims.push(SimilarityRow {
                    article_id: a.id.clone(),
                    variant_index: v.variant_index,
                    similarity: sim.similarity(&a.text, &v.text)?,
                });
            }
            Ok((scores, sims))
        })();
        (a.id.clone(), r)
    });

    let (ok, report) = settle(out, Stage::Score, outcomes)?;
    let (scores, sims): (Vec<_>, Vec<_>) = ok.into_iter().map(|(_, v)| v).unzip();
    let scores: Vec<ScoreRow> = scores.into_iter().flatten().collect();
    let path = stage_path(out, SCORES);
    let w = create(&path)?;
    write_scores_csv(w, &scores).map_err(|e| Error::stage(&path, e))?;
    write_csv(&stage_path(out, SIMILARITY), &sims.into_iter().flatten().collect::<Vec<_>>())?;
    Ok(report)
}

pub fn select(cfg: &RunConfig) -> Result<StageReport> {
    let out = &cfg.out;
    let method = read_method(out)?;
    let threshold = match method {
        Method::Uws => cfg.thresholds.uws,
        Method::Up => cfg.thresholds.up,
        Method::SynonymSwap => {
            log::info!("synonym-swap has no selection stage");
            return Ok(StageReport {
                stage: Stage::Select,
                processed: 0,
                failed: 0,
                skipped: true,
            });
        }
    };
    let sets = read_alternate_sets(out)?;
    let mut records = Vec::with_capacity(sets.len() * cfg.metrics.len());
    for set in &sets {
        for &metric in &cfg.metrics {
            let r = select_candidate(set, metric, threshold);
            let text = match r.chosen_variant_index {
                Some(i) => set.variants[i].text.clone(),
                None => set.original_text.clone(),
            };
            records.push(SelectionRecord {
                article_id: r.article_id,
                method,
                metric,
                chosen_variant_index: r.chosen_variant_index,
                chosen_similarity: r.chosen_similarity,
                chosen_uid_delta: r.chosen_uid_delta,
                fallback: r.fallback,
                text,
            });
        }
    }
    write_jsonl(&stage_path(out, SELECTIONS), &records)?;
    let processed = advance_all(out, Stage::Select, sets.into_iter().map(|s| s.article_id))?;
    Ok(StageReport {
        stage: Stage::Select,
        processed,
        failed: 0,
        skipped: false,
    })
}

fn selected_kind(metric: Metric) -> VariantKind {
    match metric {
        Metric::Variance => VariantKind::SelectedVariance,
        Metric::DiffSquared => VariantKind::SelectedDiff2,
    }
}

/// Originals plus the texts that went forward, grouped by article.
fn classify_items(out: &Path, articles: &[Article]) -> Result<Vec<ClassifyItem>> {
    let (method, variants) = read_variants(out)?;
    let mut forward: BTreeMap<String, Vec<ClassifyItem>> = BTreeMap::new();
    if method == Method::SynonymSwap {
        for (id, vs) in variants {
            forward.entry(id.clone()).or_default().push(ClassifyItem {
                article_id: id,
                variant: VariantKind::Obfuscated,
                text: vs[0].text.clone(),
            });
        }
    } else {
        for s in read_jsonl::<SelectionRecord>(&stage_path(out, SELECTIONS))? {
            forward.entry(s.article_id.clone()).or_default().push(ClassifyItem {
                article_id: s.article_id,
                variant: selected_kind(s.metric),
                text: s.text,
            });
        }
    }
    let mut items = Vec::new();
    for a in articles {
        if let Some(rest) = forward.remove(&a.id) {
            items.push(ClassifyItem {
                article_id: a.id.clone(),
                variant: VariantKind::Original,
                text: a.text.clone(),
            });
            items.extend(rest);
        }
    }
    Ok(items)
}

pub fn classify(cfg: &RunConfig) -> Result<StageReport> {
    let out = &cfg.out;
    let articles = read_articles(out)?;
    let items = classify_items(out, &articles)?;
    let detectors = detectors(cfg, &articles)?;
    let retry = RetryPolicy::default();

    let mut results: Vec<AttributionResult> = Vec::new();
    let mut failures: Vec<ClassifyFailure> = Vec::new();
    for d in &detectors {
        let batch = classify_batch(&items, d.as_ref(), &retry);
        results.extend(batch.results);
        failures.extend(batch.failures);
    }

    let mut per_article: BTreeMap<String, Option<String>> = BTreeMap::new();
    for item in &items {
        per_article.entry(item.article_id.clone()).or_insert(None);
    }
    for f in &failures {
        let slot = per_article.entry(f.article_id.clone()).or_insert(None);
        if slot.is_none() {
            *slot = Some(format!("{} on {}: {}", f.detector, f.variant, f.error));
        }
    }
    // an article counts as failed only if no detector returned anything for it
    let answered: std::collections::BTreeSet<&str> = results.iter().map(|r| r.article_id.as_str()).collect();
    let outcomes: Vec<(String, Result<()>)> = per_article
        .into_iter()
        .map(|(id, err)| {
            let r = match err {
                Some(msg) if !answered.contains(id.as_str()) => Err(classify_error(&failures, &id, msg)),
                Some(msg) => {
                    log::warn!("classify: article {id}: partial failure: {msg}");
                    Ok(())
                }
                None => Ok(()),
            };
            (id, r)
        })
        .collect();
    let (_, report) = settle(out, Stage::Classify, outcomes)?;
    write_jsonl(&stage_path(out, ATTRIBUTIONS), &results)?;
    write_jsonl(&stage_path(out, ATTRIBUTION_FAILURES), &failures)?;
    Ok(report)
}

fn classify_error(failures: &[ClassifyFailure], id: &str, msg: String) -> Error {
    let transport = failures
        .iter()
        .any(|f| f.article_id == id && f.error.contains("transport failure"));
    Error::Scorer(if transport {
        ScorerError::Transport(msg)
    } else {
        ScorerError::Protocol(msg)
    })
}

fn ratio_cells(r: &crate::evaluate::Ratio) -> [String; 2] {
    [r.value.to_string(), r.undefined.to_string()]
}

pub fn evaluate(cfg: &RunConfig) -> Result<StageReport> {
    let out = &cfg.out;
    let articles = read_articles(out)?;
    let method = read_method(out)?;
    let truths: std::collections::HashMap<String, AuthorLabel> =
        articles.iter().map(|a| (a.id.clone(), a.label.clone())).collect();
    let attributions: Vec<AttributionResult> = read_jsonl(&stage_path(out, ATTRIBUTIONS))?;

    let mut groups: BTreeMap<(String, VariantKind), Vec<AttributionResult>> = BTreeMap::new();
    for r in &attributions {
        groups.entry((r.detector.clone(), r.variant)).or_default().push(r.clone());
    }

    let mut results = Vec::new();
    for ((detector, variant), rs) in &groups {
        let m = confusion(rs, &truths)?;
        results.push(EvaluationEntry {
            detector: detector.clone(),
            variant: *variant,
            report: metrics(&m)?,
        });
    }

    let mut shifts = Vec::new();
    for ((detector, variant), after) in &groups {
        if *variant == VariantKind::Original {
            continue;
        }
        let Some(before) = groups.get(&(detector.clone(), VariantKind::Original)) else { continue };
        let after_ids: std::collections::BTreeSet<&str> = after.iter().map(|r| r.article_id.as_str()).collect();
        let before_ids: std::collections::BTreeSet<&str> = before.iter().map(|r| r.article_id.as_str()).collect();
        let b: Vec<AttributionResult> =
            before.iter().filter(|r| after_ids.contains(r.article_id.as_str())).cloned().collect();
        let a: Vec<AttributionResult> =
            after.iter().filter(|r| before_ids.contains(r.article_id.as_str())).cloned().collect();
        shifts.push(ShiftEntry {
            detector: detector.clone(),
            variant: *variant,
            shift: label_shift(&b, &a, &truths)?,
        });
    }

    let evaluation = Evaluation {
        method,
        results,
        label_shift: shifts,
    };
    write_json(&stage_path(out, EVALUATION), &evaluation)?;
    write_evaluation_tables(out, &evaluation)?;

    if method != Method::SynonymSwap {
        let sets = read_alternate_sets(out)?;
        let selections: Vec<SelectionRecord> = read_jsonl(&stage_path(out, SELECTIONS))?;
        let mut by_key: BTreeMap<(String, Metric), SelectionResult> = BTreeMap::new();
        for s in &selections {
            by_key.insert((s.article_id.clone(), s.metric), s.result());
        }
        let metrics_present: std::collections::BTreeSet<Metric> = selections.iter().map(|s| s.metric).collect();
        for metric in metrics_present {
            let mut rows = Vec::new();
            for set in &sets {
                let Some(sel) = by_key.get(&(set.article_id.clone(), metric)) else { continue };
                rows.extend(scatter_dataset(set, sel).into_iter().map(|p| ScatterRow {
                    article_id: set.article_id.clone(),
                    variant_index: p.variant_index,
                    similarity: p.similarity,
                    uid: p.uid,
                    flag: p.flag,
                }));
            }
            write_csv(&out.join(PLOTS_DIR).join(scatter_file(metric)), &rows)?;
        }
    }

    let ids: std::collections::BTreeSet<String> = attributions.into_iter().map(|r| r.article_id).collect();
    let processed = advance_all(out, Stage::Evaluate, ids)?;
    Ok(StageReport {
        stage: Stage::Evaluate,
        processed,
        failed: 0,
        skipped: false,
    })
}

fn write_evaluation_tables(out: &Path, evaluation: &Evaluation) -> Result<()> {
    let confusion_rows: Vec<Vec<String>> = evaluation
        .results
        .iter()
        .map(|e| {
            let m = e.report.matrix;
            vec![
                e.detector.clone(),
                e.variant.to_string(),
                m.tp.to_string(),
                m.fn_.to_string(),
                m.fp.to_string(),
                m.tn.to_string(),
            ]
        })
        .collect();
    write_records(
        &stage_path(out, CONFUSION),
        &["detector", "variant", "tp", "fn", "fp", "tn"],
        &confusion_rows,
    )?;

    let metric_rows: Vec<Vec<String>> = evaluation
        .results
        .iter()
        .map(|e| {
            let r = &e.report;
            let mut row = vec![
                e.detector.clone(),
                e.variant.to_string(),
                r.matrix.total().to_string(),
                r.accuracy.to_string(),
            ];
            for class in [&r.machine, &r.human] {
                for ratio in [&class.precision, &class.recall, &class.f1] {
                    row.extend(ratio_cells(ratio));
                }
            }
            row.extend(ratio_cells(&r.macro_f1));
            row
        })
        .collect();
    write_records(
        &stage_path(out, METRICS),
        &[
            "detector",
            "variant",
            "n",
            "accuracy",
            "machine_precision",
            "machine_precision_undefined",
            "machine_recall",
            "machine_recall_undefined",
            "machine_f1",
            "machine_f1_undefined",
            "human_precision",
            "human_precision_undefined",
            "human_recall",
            "human_recall_undefined",
            "human_f1",
            "human_f1_undefined",
            "macro_f1",
            "macro_f1_undefined",
        ],
        &metric_rows,
    )?;

    let mut shift_rows = Vec::new();
    for e in &evaluation.label_shift {
        for (truth, h) in &e.shift {
            for (label, before) in &h.before {
                shift_rows.push(vec![
                    e.detector.clone(),
                    e.variant.to_string(),
                    truth.as_str().to_string(),
                    label.as_str().to_string(),
                    before.to_string(),
                    h.after.get(label).copied().unwrap_or(0).to_string(),
                ]);
            }
        }
    }
    write_records(
        &stage_path(out, LABEL_SHIFT),
        &["detector", "variant", "truth", "five_way", "before", "after"],
        &shift_rows,
    )
}

pub fn report(cfg: &RunConfig) -> Result<StageReport> {
    let out = &cfg.out;
    let evaluation: Evaluation = read_json(&stage_path(out, EVALUATION))?;
    let dir = out.join(REPORT_DIR);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut written = Vec::new();
    for e in &evaluation.label_shift {
        let name = format!("label_shift_{}_{}.svg", report::slug(&e.detector), e.variant);
        let title = format!("{} labels before/after ({})", e.detector, e.variant);
        written.push((name, report::label_shift_svg(&title, &e.shift)));
    }
    for metric in Metric::BOTH {
        let path = out.join(PLOTS_DIR).join(scatter_file(metric));
        if !path.exists() {
            continue;
        }
        let rows: Vec<ScatterRow> = read_csv(&path)?;
        let mut by_article: BTreeMap<&str, Vec<&ScatterRow>> = BTreeMap::new();
        for r in &rows {
            by_article.entry(&r.article_id).or_default().push(r);
        }
        for (id, points) in by_article {
            let name = format!("scatter_{}_{}.svg", metric.as_str(), report::slug(id));
            let title = format!("{id}: similarity vs {}", metric.as_str());
            written.push((name, report::scatter_svg(&title, metric.as_str(), &points)));
        }
    }
    written.push(("summary.md".to_string(), report::summary_markdown(&evaluation)));
    for (name, body) in &written {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }

    let ids: Vec<String> = Manifest::load(out)?
        .entries()
        .into_iter()
        .filter(|e| e.stage == Stage::Evaluate)
        .map(|e| e.article_id.clone())
        .collect();
    let processed = advance_all(out, Stage::Report, ids)?;
    Ok(StageReport {
        stage: Stage::Report,
        processed,
        failed: 0,
        skipped: false,
    })
}

/// Run one stage inside a pool of `cfg.jobs` workers.
pub fn run_stage(cfg: &RunConfig, stage: Stage) -> Result<StageReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", cfg.jobs)))?;
    pool.install(|| match stage {
        Stage::Ingest => ingest(cfg),
        Stage::Obfuscate => obfuscate(cfg),
        Stage::Score => score(cfg),
        Stage::Select => select(cfg),
        Stage::Classify => classify(cfg),
        Stage::Evaluate => evaluate(cfg),
        Stage::Report => report(cfg),
    })
}

/// Every stage in order. The resolved configuration (minus output
/// location and worker count) is recorded alongside the results.
pub fn run(cfg: &RunConfig) -> Result<Vec<StageReport>> {
    cfg.validate()?;
    let mut reports = Vec::with_capacity(Stage::ALL.len());
    for stage in Stage::ALL {
        let report = run_stage(cfg, stage)?;
        log::info!("{report}");
        reports.push(report);
        if stage == Stage::Ingest {
            let recorded: String = cfg
                .render()
                .lines()
                .filter(|l| !l.starts_with("out =") && !l.starts_with("jobs ="))
                .map(|l| format!("{l}\n"))
                .collect();
            let path = stage_path(&cfg.out, RUN_CONFIG);
            fs::write(&path, recorded).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(reports)
}
