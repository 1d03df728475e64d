//! Run configuration: a flat `key = value` file, with command-line
//! overrides applied through the same setter.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::obfuscate::Method;
use crate::select::{Metric, Thresholds};

pub const DEFAULT_STUB_SCALE: f64 = 0.25;

/// Where a model comes from: fitted in-process, or an adapter endpoint
/// (`stdio:<command line>` or an `http(s)://` base URL).
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Reference,
    Adapter(String),
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "reference" {
            Ok(ModelSpec::Reference)
        } else if s.starts_with("stdio:") || s.starts_with("http://") || s.starts_with("https://") {
            Ok(ModelSpec::Adapter(s.to_string()))
        } else {
            Err(Error::Config(format!("unrecognised model spec {s:?}")))
        }
    }
}

impl ModelSpec {
    fn render(&self) -> &str {
        match self {
            ModelSpec::Reference => "reference",
            ModelSpec::Adapter(s) => s,
        }
    }
}

/// `stub[:tau=..,scale=..,name=..]` or an adapter endpoint. A stub
/// without a numeric `tau` (or with `tau=auto`) is calibrated on the
/// originals it is run on.
#[derive(Clone, Debug, PartialEq)]
pub enum DetectorSpec {
    Stub { name: String, tau: Option<f64>, scale: f64 },
    Adapter { name: String, endpoint: String },
}

impl DetectorSpec {
    pub fn name(&self) -> &str {
        match self {
            DetectorSpec::Stub { name, .. } | DetectorSpec::Adapter { name, .. } => name,
        }
    }

    fn render(&self) -> String {
        match self {
            DetectorSpec::Stub { name, tau, scale } => {
                let tau = tau.map_or("auto".to_string(), |t| t.to_string());
                format!("stub:name={name},tau={tau},scale={scale}")
            }
            DetectorSpec::Adapter { name, endpoint } => format!("{name}={endpoint}"),
        }
    }
}

impl FromStr for DetectorSpec {
    type Err = Error;

    /// Adapters may be named with a `name=` prefix, e.g.
    /// `zerogpt=http://localhost:9000`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "stub" || s.starts_with("stub:") {
            let mut name = "stub".to_string();
            let mut tau = None;
            let mut scale = DEFAULT_STUB_SCALE;
            for part in s.strip_prefix("stub:").unwrap_or("").split(',').filter(|p| !p.is_empty()) {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("bad stub option {part:?}")))?;
                match k.trim() {
                    "name" => name = v.trim().to_string(),
                    "tau" if v.trim() == "auto" => tau = None,
                    "tau" => tau = Some(parse_num(k, v)?),
                    "scale" => scale = parse_num(k, v)?,
                    other => return Err(Error::Config(format!("unknown stub option {other:?}"))),
                }
            }
            if !(scale > 0.0) || tau.is_some_and(|t: f64| !t.is_finite()) {
                return Err(Error::Config("stub detector needs finite tau and positive scale".into()));
            }
            return Ok(DetectorSpec::Stub { name, tau, scale });
        }
        let (name, endpoint) = match s.split_once('=') {
            Some((n, e)) if !n.contains(':') => (n.trim().to_string(), e.trim().to_string()),
            _ => (s.to_string(), s.to_string()),
        };
        match endpoint.parse::<ModelSpec>()? {
            ModelSpec::Adapter(endpoint) => Ok(DetectorSpec::Adapter { name, endpoint }),
            ModelSpec::Reference => Err(Error::Config("detectors are `stub` or an adapter endpoint".into())),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("{key}: expected a boolean, got {other:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub per_label_count: usize,
    pub labels: Option<Vec<String>>,
    pub seed: u64,
    pub method: Method,
    pub k: usize,
    pub thresholds: Thresholds,
    pub metrics: Vec<Metric>,
    pub scorer: ModelSpec,
    pub predictor: ModelSpec,
    pub paraphraser: ModelSpec,
    pub detectors: Vec<DetectorSpec>,
    pub synonyms: Option<PathBuf>,
    pub out: PathBuf,
    /// Worker threads; 0 lets the runtime decide.
    pub jobs: usize,
    pub diversity_penalty: f64,
    pub min_paraphrase_chars: usize,
    pub max_paraphrase_chars: Option<usize>,
    pub underscores_to_spaces: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            per_label_count: 50,
            labels: None,
            seed: 0,
            method: Method::Uws,
            k: 10,
            thresholds: Thresholds::default(),
            metrics: Metric::BOTH.to_vec(),
            scorer: ModelSpec::Reference,
            predictor: ModelSpec::Reference,
            paraphraser: ModelSpec::Reference,
            detectors: vec![DetectorSpec::Stub {
                name: "stub".into(),
                tau: None,
                scale: DEFAULT_STUB_SCALE,
            }],
            synonyms: None,
            out: PathBuf::from("out"),
            jobs: 0,
            diversity_penalty: 1.0,
            min_paraphrase_chars: 8,
            max_paraphrase_chars: None,
            underscores_to_spaces: false,
        }
    }
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

impl RunConfig {
    /// Apply one setting. `detector` appends; `detectors` replaces the list.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "corpus" => self.corpus = Some(PathBuf::from(v)),
            "per_label_count" => self.per_label_count = parse_num(key, v)?,
            "labels" => self.labels = Some(split_list(v)),
            "seed" => self.seed = parse_num(key, v)?,
            "method" => self.method = v.parse()?,
            "k" => self.k = parse_num(key, v)?,
            "threshold" => match self.method {
                Method::Uws => self.thresholds.uws = parse_num(key, v)?,
                Method::Up => self.thresholds.up = parse_num(key, v)?,
                Method::SynonymSwap => {
                    return Err(Error::Config("synonym-swap has no selection threshold".into()))
                }
            },
            "threshold.uws" => self.thresholds.uws = parse_num(key, v)?,
            "threshold.up" => self.thresholds.up = parse_num(key, v)?,
            "metrics" | "metric" => {
                self.metrics = if v == "both" {
                    Metric::BOTH.to_vec()
                } else {
                    split_list(v).iter().map(|m| m.parse()).collect::<Result<_>>()?
                }
            }
            "scorer" => self.scorer = v.parse()?,
            "predictor" => self.predictor = v.parse()?,
            "paraphraser" => self.paraphraser = v.parse()?,
            "detector" => self.detectors.push(v.parse()?),
            "detectors" => {
                self.detectors = v
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "synonyms" => self.synonyms = Some(PathBuf::from(v)),
            "out" => self.out = PathBuf::from(v),
            "jobs" => self.jobs = parse_num(key, v)?,
            "diversity_penalty" => self.diversity_penalty = parse_num(key, v)?,
            "min_paraphrase_chars" => self.min_paraphrase_chars = parse_num(key, v)?,
            "max_paraphrase_chars" => {
                self.max_paraphrase_chars = if v == "none" { None } else { Some(parse_num(key, v)?) }
            }
            "underscores_to_spaces" => self.underscores_to_spaces = parse_bool(key, v)?,
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parse a config file body. `#` starts a comment line.
    pub fn parse(content: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply(content)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, content: &str) -> Result<()> {
        let mut detectors_seen = false;
        for (i, raw) in content.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            // the first `detector` line in a file replaces the default stub
            if key.trim() == "detector" && !detectors_seen {
                self.detectors.clear();
                detectors_seen = true;
            }
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content)
    }

    pub fn threshold(&self) -> Option<f64> {
        match self.method {
            Method::Uws => Some(self.thresholds.uws),
            Method::Up => Some(self.thresholds.up),
            Method::SynonymSwap => None,
        }
    }

    /// Whether the method needs a synonym database with this configuration.
    pub fn needs_synonyms(&self) -> bool {
        match self.method {
            Method::SynonymSwap | Method::Uws => true,
            Method::Up => self.paraphraser == ModelSpec::Reference,
        }
    }

    /// Full check before a run: settings plus required inputs.
    pub fn validate(&self) -> Result<()> {
        self.validate_settings()?;
        if self.needs_synonyms() && self.synonyms.is_none() {
            return Err(Error::Config(format!("method {} needs a synonym database", self.method)));
        }
        Ok(())
    }

    /// Value ranges only; does not require any input file to be named.
    pub fn validate_settings(&self) -> Result<()> {
        for (name, t) in [("threshold.uws", self.thresholds.uws), ("threshold.up", self.thresholds.up)] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Config(format!("{name} must be in (0, 1], got {t}")));
            }
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("no selection metric configured".into()));
        }
        if !self.diversity_penalty.is_finite() || self.diversity_penalty < 0.0 {
            return Err(Error::Config("diversity_penalty must be finite and non-negative".into()));
        }
        let mut names: Vec<&str> = self.detectors.iter().map(DetectorSpec::name).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("detector names must be unique".into()));
        }
        Ok(())
    }

    /// Canonical `key = value` rendering; parsing it gives back `self`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        if let Some(c) = path(&self.corpus) {
            let _ = writeln!(s, "corpus = {c}");
        }
        let _ = writeln!(s, "per_label_count = {}", self.per_label_count);
        if let Some(l) = &self.labels {
            let _ = writeln!(s, "labels = {}", l.join(","));
        }
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "method = {}", self.method);
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "threshold.uws = {}", self.thresholds.uws);
        let _ = writeln!(s, "threshold.up = {}", self.thresholds.up);
        let metrics: Vec<&str> = self.metrics.iter().map(|m| m.as_str()).collect();
        let _ = writeln!(s, "metrics = {}", metrics.join(","));
        let _ = writeln!(s, "scorer = {}", self.scorer.render());
        let _ = writeln!(s, "predictor = {}", self.predictor.render());
        let _ = writeln!(s, "paraphraser = {}", self.paraphraser.render());
        let detectors: Vec<String> = self.detectors.iter().map(DetectorSpec::render).collect();
        let _ = writeln!(s, "detectors = {}", detectors.join(";"));
        if let Some(p) = path(&self.synonyms) {
            let _ = writeln!(s, "synonyms = {p}");
        }
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "jobs = {}", self.jobs);
        let _ = writeln!(s, "diversity_penalty = {}", self.diversity_penalty);
        let _ = writeln!(s, "min_paraphrase_chars = {}", self.min_paraphrase_chars);
        let max = self.max_paraphrase_chars.map_or("none".to_string(), |m| m.to_string());
        let _ = writeln!(s, "max_paraphrase_chars = {max}");
        let _ = writeln!(s, "underscores_to_spaces = {}", self.underscores_to_spaces);
        s
    }
}
