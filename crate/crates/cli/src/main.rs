use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use uidobf::adapter::{serve, Backend};
use uidobf::attribute::StubDetector;
use uidobf::config::{RunConfig, DEFAULT_STUB_SCALE};
use uidobf::corpus::read_corpus;
use uidobf::lexicon::load_synonyms;
use uidobf::pipeline::{self, Manifest, Stage, StageReport};
use uidobf::scorer::{BigramScorer, SlotFrequencyPredictor, StubParaphraser};
use uidobf::Error;

#[derive(Parser)]
#[command(name = "uidobf", version, about = "UID-guided authorship obfuscation pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the corpus into <out>/articles.jsonl
    Ingest(RunArgs),
    /// Write variants.jsonl with the configured method
    Obfuscate(RunArgs),
    /// UID scores and similarity for originals and variants
    Score(RunArgs),
    /// Pick one variant per article and metric
    Select(RunArgs),
    /// Run detectors on originals and selected texts
    Classify(RunArgs),
    /// Confusion matrices, metrics, label shift and scatter data
    Evaluate(RunArgs),
    /// Render SVG charts and a summary from the evaluation
    Report(RunArgs),
    /// Every stage in order
    Run(RunArgs),
    /// Answer adapter requests on stdin/stdout with the reference models
    Serve(ServeArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// key = value configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Line-delimited JSON corpus
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Articles sampled per label
    #[arg(long)]
    per_label_count: Option<usize>,
    /// Comma-separated labels to sample
    #[arg(long)]
    labels: Option<String>,
    /// synonym-swap, uws or up
    #[arg(long)]
    method: Option<String>,
    /// variance, diff_squared or both
    #[arg(long)]
    metric: Option<String>,
    /// Similarity floor for the configured method
    #[arg(long)]
    threshold: Option<f64>,
    /// Alternates per article
    #[arg(long)]
    k: Option<usize>,
    /// Seed for sampling and the stub paraphraser
    #[arg(long)]
    seed: Option<u64>,
    /// reference, stdio:<cmd> or an http(s) URL
    #[arg(long)]
    scorer: Option<String>,
    /// Masked predictor for uws, same forms as --scorer
    #[arg(long)]
    predictor: Option<String>,
    /// Paraphraser for up, same forms as --scorer
    #[arg(long)]
    paraphraser: Option<String>,
    /// stub[:tau=..,scale=..], [name=]stdio:<cmd> or [name=]<url>; repeatable
    #[arg(long)]
    detector: Vec<String>,
    /// lemma<TAB>syn1,syn2 database
    #[arg(long)]
    synonyms: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Paraphrase diversity penalty (up)
    #[arg(long)]
    diversity_penalty: Option<f64>,
    /// Discard longer paraphrases in favour of the original sentence
    #[arg(long)]
    max_paraphrase_chars: Option<usize>,
    /// Write multiword synonyms with spaces
    #[arg(long)]
    underscores_to_spaces: bool,
    /// Any other config key, as key=value; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ServeArgs {
    /// Corpus the reference models are fitted on
    #[arg(long)]
    corpus: PathBuf,
    /// Enables the paraphrase endpoint
    #[arg(long)]
    synonyms: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stub detector threshold; calibrated on the corpus when omitted
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_STUB_SCALE)]
    scale: f64,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let overrides: [(&str, Option<String>); 16] = [
            ("corpus", path(&self.corpus)),
            ("per_label_count", self.per_label_count.map(|v| v.to_string())),
            ("labels", self.labels.clone()),
            ("method", self.method.clone()),
            ("metrics", self.metric.clone()),
            ("threshold", self.threshold.map(|v| v.to_string())),
            ("k", self.k.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("scorer", self.scorer.clone()),
            ("predictor", self.predictor.clone()),
            ("paraphraser", self.paraphraser.clone()),
            ("synonyms", path(&self.synonyms)),
            ("out", path(&self.out)),
            ("jobs", self.jobs.map(|v| v.to_string())),
            ("diversity_penalty", self.diversity_penalty.map(|v| v.to_string())),
            ("max_paraphrase_chars", self.max_paraphrase_chars.map(|v| v.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if !self.detector.is_empty() {
            cfg.detectors.clear();
            for d in &self.detector {
                cfg.set("detector", d)?;
            }
        }
        if self.underscores_to_spaces {
            cfg.underscores_to_spaces = true;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got {kv:?}")))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }
}

fn summarize(cfg: &RunConfig, reports: &[StageReport]) {
    for r in reports {
        eprintln!("{r}");
    }
    if let Ok(manifest) = Manifest::load(&cfg.out) {
        let failed = manifest.failed();
        if failed > 0 {
            eprintln!("{failed} article(s) failed; see {}", cfg.out.join(pipeline::MANIFEST).display());
        }
    }
}

fn stage_command(args: &RunArgs, stage: Stage) -> Result<(), Error> {
    let cfg = args.resolve()?;
    if stage == Stage::Obfuscate {
        cfg.validate()?;
    } else {
        cfg.validate_settings()?;
    }
    let report = pipeline::run_stage(&cfg, stage)?;
    summarize(&cfg, &[report]);
    Ok(())
}

fn serve_command(args: &ServeArgs) -> Result<(), Error> {
    let corpus = read_corpus(&args.corpus)?;
    let texts: Vec<&str> = corpus.articles.iter().map(|a| a.text.as_str()).collect();
    let scorer = Arc::new(BigramScorer::fit(texts.iter().copied()));
    let predictor = SlotFrequencyPredictor::fit(texts.iter().copied());
    let paraphraser = match &args.synonyms {
        Some(p) => Some(StubParaphraser::new(load_synonyms(p)?, args.seed)),
        None => None,
    };
    let detector = match args.tau {
        Some(tau) => StubDetector::new(scorer.clone(), tau, args.scale),
        None => StubDetector::calibrated(scorer.clone(), texts.iter().copied(), args.scale)?,
    };
    let backend = Backend {
        scorer: Some(scorer.as_ref()),
        predictor: Some(&predictor),
        paraphraser: paraphraser.as_ref().map(|p| p as _),
        detector: Some(&detector),
    };
    serve(io::stdin().lock(), io::stdout().lock(), &backend).map_err(|e| Error::Io {
        path: PathBuf::from("<stdio>"),
        source: e,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Ingest(a) => stage_command(a, Stage::Ingest),
        Command::Obfuscate(a) => stage_command(a, Stage::Obfuscate),
        Command::Score(a) => stage_command(a, Stage::Score),
        Command::Select(a) => stage_command(a, Stage::Select),
        Command::Classify(a) => stage_command(a, Stage::Classify),
        Command::Evaluate(a) => stage_command(a, Stage::Evaluate),
        Command::Report(a) => stage_command(a, Stage::Report),
        Command::Run(a) => a.resolve().and_then(|cfg| {
            let reports = pipeline::run(&cfg)?;
            summarize(&cfg, &reports);
            Ok(())
        }),
        Command::Serve(a) => serve_command(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
