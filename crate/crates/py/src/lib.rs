//! Python bindings: reference models, obfuscation methods, selection and
//! the batch pipeline.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use uidobf::attribute::{BinaryLabel, DetectorClient, FiveWay};
use uidobf::config::RunConfig;
use uidobf::corpus::{segment, Article, AuthorLabel};
use uidobf::evaluate::ConfusionMatrix;
use uidobf::lexicon::TargetCriteria;
use uidobf::obfuscate::{self, Method, ParaphraseOptions, SwapOptions};
use uidobf::scorer::{CausalScorer, MaskedPredictor, Paraphraser};
use uidobf::select::Metric;
use uidobf::similarity::CountCosine;

create_exception!(uidobf, UidobfError, PyException);

fn err(e: uidobf::Error) -> PyErr {
    UidobfError::new_err(e.to_string())
}

fn article(text: &str) -> Article {
    Article::new("py", AuthorLabel::Human, text)
}

#[pyclass(frozen, get_all, name = "UidScores")]
struct PyUidScores {
    variance: f64,
    diff_squared: f64,
    token_count: usize,
}

impl From<uidobf::uid::UidScores> for PyUidScores {
    fn from(s: uidobf::uid::UidScores) -> Self {
        PyUidScores {
            variance: s.variance,
            diff_squared: s.diff_squared,
            token_count: s.token_count,
        }
    }
}

#[pymethods]
impl PyUidScores {
    fn __repr__(&self) -> String {
        format!(
            "UidScores(variance={}, diff_squared={}, token_count={})",
            self.variance, self.diff_squared, self.token_count
        )
    }
}

/// Add-one smoothed bigram model fitted on a list of texts.
#[pyclass(frozen, name = "BigramScorer")]
struct PyBigramScorer(Arc<uidobf::scorer::BigramScorer>);

#[pymethods]
impl PyBigramScorer {
    #[new]
    fn new(texts: Vec<String>) -> Self {
        PyBigramScorer(Arc::new(uidobf::scorer::BigramScorer::fit(texts.iter().map(String::as_str))))
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.0.vocab_size()
    }

    /// (token, surprisal in nats) pairs.
    fn surprisals(&self, text: &str) -> PyResult<Vec<(String, f64)>> {
        let seq = uidobf::scorer::causal_surprisals(text, self.0.as_ref()).map_err(err)?;
        Ok(seq.0.into_iter().map(|t| (t.token, t.surprisal)).collect())
    }

    fn word_logprob(&self, prefix: &str, word: &str) -> PyResult<f64> {
        self.0.word_logprob(prefix, word).map_err(err)
    }

    fn uid_scores(&self, text: &str) -> PyResult<PyUidScores> {
        Ok(uidobf::uid::uid_scores(text, self.0.as_ref()).map_err(err)?.into())
    }
}

#[pyclass(frozen, name = "SlotPredictor")]
struct PySlotPredictor(uidobf::scorer::SlotFrequencyPredictor);

#[pymethods]
impl PySlotPredictor {
    #[new]
    fn new(texts: Vec<String>) -> Self {
        PySlotPredictor(uidobf::scorer::SlotFrequencyPredictor::fit(texts.iter().map(String::as_str)))
    }

    #[pyo3(signature = (tokens, mask_index, k = 10))]
    fn fills(&self, tokens: Vec<String>, mask_index: usize, k: usize) -> PyResult<Vec<(String, f64)>> {
        let fills = uidobf::scorer::masked_top_k(&tokens, mask_index, k, &self.0).map_err(err)?;
        Ok(fills.into_iter().map(|f| (f.word, f.score)).collect())
    }
}

#[pyclass(frozen, name = "SynonymDb")]
struct PySynonymDb(uidobf::lexicon::SynonymDb);

#[pymethods]
impl PySynonymDb {
    /// Parse `lemma<TAB>syn1,syn2` lines.
    #[staticmethod]
    fn parse(content: &str) -> PyResult<Self> {
        Ok(PySynonymDb(uidobf::lexicon::SynonymDb::parse(content).map_err(err)?))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PySynonymDb(uidobf::lexicon::load_synonyms(path).map_err(err)?))
    }

    fn lookup(&self, word: &str) -> Vec<String> {
        self.0.lookup(word).to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(frozen, name = "StubParaphraser")]
struct PyStubParaphraser(uidobf::scorer::StubParaphraser);

#[pymethods]
impl PyStubParaphraser {
    #[new]
    #[pyo3(signature = (synonyms, seed = 0))]
    fn new(synonyms: &PySynonymDb, seed: u64) -> Self {
        PyStubParaphraser(uidobf::scorer::StubParaphraser::new(synonyms.0.clone(), seed))
    }

    #[pyo3(signature = (sentence, n = 10, diversity_penalty = 1.0))]
    fn paraphrases(&self, sentence: &str, n: usize, diversity_penalty: f64) -> PyResult<Vec<String>> {
        self.0.paraphrases(sentence, n, diversity_penalty).map_err(err)
    }
}

#[pyclass(frozen, get_all, name = "Detection")]
struct PyDetection {
    probability: f64,
    label: String,
    five_way: String,
}

#[pyclass(frozen, name = "StubDetector")]
struct PyStubDetector(uidobf::attribute::StubDetector);

#[pymethods]
impl PyStubDetector {
    #[new]
    #[pyo3(signature = (scorer, tau, scale = 0.25))]
    fn new(scorer: &PyBigramScorer, tau: f64, scale: f64) -> Self {
        PyStubDetector(uidobf::attribute::StubDetector::new(scorer.0.clone(), tau, scale))
    }

    /// Threshold set to the median mean surprisal of `texts`.
    #[staticmethod]
    #[pyo3(signature = (scorer, texts, scale = 0.25))]
    fn calibrated(scorer: &PyBigramScorer, texts: Vec<String>, scale: f64) -> PyResult<Self> {
        let d = uidobf::attribute::StubDetector::calibrated(scorer.0.clone(), texts.iter().map(String::as_str), scale)
            .map_err(err)?;
        Ok(PyStubDetector(d))
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.0.tau()
    }

    fn detect(&self, text: &str) -> PyResult<PyDetection> {
        let p = self.0.detect(text).map_err(|e| err(e.into()))?.probability;
        Ok(PyDetection {
            probability: p,
            label: BinaryLabel::from_probability(p).as_str().to_string(),
            five_way: FiveWay::from_probability(p).as_str().to_string(),
        })
    }
}

#[pyclass(frozen, get_all, name = "Selection")]
struct PySelection {
    variant_index: Option<usize>,
    text: String,
    similarity: f64,
    uid_delta: f64,
    fallback: bool,
}

#[pyfunction]
fn variance(values: Vec<f64>) -> PyResult<f64> {
    uidobf::uid::variance(&values).map_err(err)
}

#[pyfunction]
fn diff_squared(values: Vec<f64>) -> PyResult<f64> {
    uidobf::uid::diff_squared(&values).map_err(err)
}

#[pyfunction]
fn cosine_similarity(a: &str, b: &str) -> f64 {
    uidobf::similarity::cosine_similarity(a, b)
}

/// Swap one word per sentence for its most probable synonym. Returns the
/// new text and `(original, replacement)` pairs.
#[pyfunction]
#[pyo3(signature = (text, synonyms, scorer, underscores_to_spaces = false))]
fn synonym_swap(
    text: &str,
    synonyms: &PySynonymDb,
    scorer: &PyBigramScorer,
    underscores_to_spaces: bool,
) -> PyResult<(String, Vec<(String, String)>)> {
    let opts = SwapOptions {
        underscores_to_spaces,
        ..Default::default()
    };
    let out = obfuscate::synonym_swap(&segment(&article(text)), &synonyms.0, scorer.0.as_ref(), &opts).map_err(err)?;
    Ok((out.article.text, out.swaps.into_iter().map(|s| (s.original, s.replacement)).collect()))
}

#[pyfunction]
#[pyo3(signature = (text, predictor, synonyms, k = 10))]
fn uws_variants(text: &str, predictor: &PySlotPredictor, synonyms: &PySynonymDb, k: usize) -> PyResult<Vec<String>> {
    let alts = obfuscate::uws_alternates(
        &segment(&article(text)),
        &predictor.0 as &dyn MaskedPredictor,
        &synonyms.0,
        &TargetCriteria::default(),
        k,
    )
    .map_err(err)?;
    Ok(alts.variants)
}

#[pyfunction]
#[pyo3(signature = (text, paraphraser, n = 10, diversity_penalty = 1.0))]
fn up_variants(text: &str, paraphraser: &PyStubParaphraser, n: usize, diversity_penalty: f64) -> PyResult<Vec<String>> {
    let opts = ParaphraseOptions {
        n,
        diversity_penalty,
        ..Default::default()
    };
    Ok(obfuscate::up_alternates(&segment(&article(text)), &paraphraser.0, &opts)
        .map_err(err)?
        .variants)
}

/// Score `variants` against `original` and pick the one with the largest
/// UID change among those at or above `threshold` similarity.
#[pyfunction]
#[pyo3(signature = (original, variants, scorer, metric = "variance", threshold = 0.98))]
fn select(
    original: &str,
    variants: Vec<String>,
    scorer: &PyBigramScorer,
    metric: &str,
    threshold: f64,
) -> PyResult<PySelection> {
    let metric: Metric = metric.parse().map_err(err)?;
    let alts = obfuscate::Alternates {
        original: article(original),
        method: Method::Uws,
        sentences: Vec::new(),
        variants,
    };
    let set = obfuscate::score_alternates(&alts, scorer.0.as_ref(), &CountCosine).map_err(err)?;
    let r = uidobf::select::select_candidate(&set, metric, threshold);
    let text = match r.chosen_variant_index {
        Some(i) => set.variants[i].text.clone(),
        None => original.to_string(),
    };
    Ok(PySelection {
        variant_index: r.chosen_variant_index,
        text,
        similarity: r.chosen_similarity,
        uid_delta: r.chosen_uid_delta,
        fallback: r.fallback,
    })
}

#[pyfunction]
#[pyo3(name = "accuracy")]
fn py_accuracy(tp: u64, fn_: u64, fp: u64, tn: u64) -> PyResult<f64> {
    uidobf::evaluate::accuracy(&ConfusionMatrix::new(tp, fn_, fp, tn)).map_err(err)
}

/// Run every pipeline stage. `config` maps config-file keys to values;
/// returns one summary line per stage.
#[pyfunction]
fn run(py: Python<'_>, config: Vec<(String, String)>) -> PyResult<Vec<String>> {
    let mut cfg = RunConfig::default();
    for (k, v) in &config {
        cfg.set(k, v).map_err(err)?;
    }
    let reports = py.detach(|| uidobf::pipeline::run(&cfg)).map_err(err)?;
    Ok(reports.iter().map(ToString::to_string).collect())
}

#[pymodule]
#[pyo3(name = "uidobf")]
fn uidobf_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("UidobfError", m.py().get_type::<UidobfError>())?;
    m.add_class::<PyUidScores>()?;
    m.add_class::<PyBigramScorer>()?;
    m.add_class::<PySlotPredictor>()?;
    m.add_class::<PySynonymDb>()?;
    m.add_class::<PyStubParaphraser>()?;
    m.add_class::<PyDetection>()?;
    m.add_class::<PyStubDetector>()?;
    m.add_class::<PySelection>()?;
    m.add_function(wrap_pyfunction!(variance, m)?)?;
    m.add_function(wrap_pyfunction!(diff_squared, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(synonym_swap, m)?)?;
    m.add_function(wrap_pyfunction!(uws_variants, m)?)?;
    m.add_function(wrap_pyfunction!(up_variants, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(py_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::types::PyDict;

    #[test]
    fn module_round_trip() {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "uidobf").unwrap();
            uidobf_module(&m).unwrap();
            let locals = PyDict::new(py);
            locals.set_item("u", &m).unwrap();
            py.run(
                c"s = u.BigramScorer(['a b a c'])\n\
                  assert s.vocab_size == 4\n\
                  assert abs(s.word_logprob('x a', 'c') - __import__('math').log(2 / 6)) < 1e-12\n\
                  assert u.accuracy(8, 92, 0, 100) == 0.54\n\
                  try:\n    u.diff_squared([1.0])\nexcept u.UidobfError:\n    ok = True\n",
                None,
                Some(&locals),
            )
            .unwrap();
            assert!(locals.get_item("ok").unwrap().is_some());
        });
    }
}
