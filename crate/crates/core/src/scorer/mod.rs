//! Model-facing interfaces: a causal scorer (surprisals, word log-probs),
//! a masked predictor (top-k slot fills) and a paraphraser. Reference
//! implementations live in the submodules; neural models attach through
//! [`crate::adapter`].

mod bigram;
mod paraphrase;
mod slot;

use serde::{Deserialize, Serialize};

pub use bigram::BigramScorer;
pub use paraphrase::StubParaphraser;
pub use slot::SlotFrequencyPredictor;

use crate::corpus::word_tokenize;
use crate::error::{Error, Result, ScorerError};

/// Surprisal of one scorer token, in nats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenSurprisal {
    pub token: String,
    pub surprisal: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SurprisalSequence(pub Vec<TokenSurprisal>);

impl SurprisalSequence {
    pub fn from_values(values: &[f64]) -> Self {
        SurprisalSequence(
            values
                .iter()
                .enumerate()
                .map(|(i, &s)| TokenSurprisal {
                    token: format!("t{i}"),
                    surprisal: s,
                })
                .collect(),
        )
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|t| t.surprisal).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().map(|t| t.surprisal).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillCandidate {
    pub word: String,
    pub score: f64,
}

pub trait CausalScorer: Send + Sync {
    /// One surprisal per scorer token of `text`, each conditioned on every
    /// preceding token of `text`.
    fn surprisals(&self, text: &str) -> Result<SurprisalSequence>;

    /// Natural-log probability of `word` following `prefix`. Words spanning
    /// several scorer tokens score as the sum over their tokens.
    fn word_logprob(&self, prefix: &str, word: &str) -> Result<f64>;

    /// Whether concurrent calls on one instance are allowed.
    fn is_concurrent(&self) -> bool {
        true
    }
}

pub trait MaskedPredictor: Send + Sync {
    /// Up to `k` fills for position `mask_index`, best first.
    fn fills(&self, tokens: &[String], mask_index: usize, k: usize) -> Result<Vec<FillCandidate>>;

    fn is_concurrent(&self) -> bool {
        true
    }
}

pub trait Paraphraser: Send + Sync {
    fn paraphrases(&self, sentence: &str, n: usize, diversity_penalty: f64) -> Result<Vec<String>>;

    fn is_concurrent(&self) -> bool {
        true
    }
}

pub fn causal_surprisals(text: &str, scorer: &dyn CausalScorer) -> Result<SurprisalSequence> {
    if text.trim().is_empty() {
        return Err(Error::Argument("cannot score empty text".into()));
    }
    let seq = scorer.surprisals(text)?;
    if let Some(bad) = seq.0.iter().find(|t| !t.surprisal.is_finite() || t.surprisal < 0.0) {
        return Err(ScorerError::Protocol(format!(
            "invalid surprisal {} for token {:?}",
            bad.surprisal, bad.token
        ))
        .into());
    }
    Ok(seq)
}

pub fn causal_word_logprob(prefix: &str, word: &str, scorer: &dyn CausalScorer) -> Result<f64> {
    if word.trim().is_empty() {
        return Err(Error::Argument("word must be non-empty".into()));
    }
    let lp = scorer.word_logprob(prefix, word)?;
    if lp.is_nan() || lp > 0.0 {
        return Err(ScorerError::Protocol(format!("invalid log probability {lp}")).into());
    }
    Ok(lp)
}

pub fn masked_top_k(
    sentence_tokens: &[String],
    mask_index: usize,
    k: usize,
    predictor: &dyn MaskedPredictor,
) -> Result<Vec<FillCandidate>> {
    if mask_index >= sentence_tokens.len() {
        return Err(Error::Argument(format!(
            "mask index {mask_index} out of range for {} tokens",
            sentence_tokens.len()
        )));
    }
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    let fills = predictor.fills(sentence_tokens, mask_index, k)?;
    if fills.len() > k {
        return Err(ScorerError::Protocol(format!("asked for {k} fills, got {}", fills.len())).into());
    }
    if fills.windows(2).any(|w| w[0].score < w[1].score) {
        return Err(ScorerError::Protocol("fills not sorted by score".into()).into());
    }
    let mut seen = std::collections::HashSet::new();
    if fills.iter().any(|f| f.word.is_empty() || !seen.insert(f.word.as_str())) {
        return Err(ScorerError::Protocol("empty or duplicate fill".into()).into());
    }
    Ok(fills)
}

pub fn diverse_paraphrases(
    sentence: &str,
    n: usize,
    diversity_penalty: f64,
    paraphraser: &dyn Paraphraser,
) -> Result<Vec<String>> {
    if sentence.trim().is_empty() {
        return Err(Error::Argument("cannot paraphrase empty sentence".into()));
    }
    if n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    if !(diversity_penalty >= 0.0) {
        return Err(Error::Argument("diversity penalty must be non-negative".into()));
    }
    let out = paraphraser.paraphrases(sentence, n, diversity_penalty)?;
    if out.len() != n {
        return Err(ScorerError::Protocol(format!("asked for {n} paraphrases, got {}", out.len())).into());
    }
    Ok(out)
}

/// Tokenization used by the reference models: lowercased treebank tokens,
/// with underscore-joined multiword expressions split into their parts.
pub fn scorer_tokens(text: &str) -> Vec<String> {
    word_tokenize(text)
        .into_iter()
        .flat_map(|t| {
            let lower = t.to_lowercase();
            if lower.contains('_') && lower.chars().any(char::is_alphanumeric) {
                lower
                    .split('_')
                    .filter(|p| !p.is_empty())
                    .map(str::to_string)
                    .collect::<Vec<_>>()
            } else {
                vec![lower]
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Certain;

    impl CausalScorer for Certain {
        fn surprisals(&self, text: &str) -> Result<SurprisalSequence> {
            Ok(SurprisalSequence(
                scorer_tokens(text)
                    .into_iter()
                    .map(|token| TokenSurprisal { token, surprisal: 0.0 })
                    .collect(),
            ))
        }

        fn word_logprob(&self, _prefix: &str, _word: &str) -> Result<f64> {
            Ok(1.0f64.ln())
        }
    }

    #[test]
    fn degenerate_scorer_gives_zero_logprob() {
        assert_eq!(causal_word_logprob("any prefix", "word", &Certain).unwrap(), 0.0);
        assert!(causal_word_logprob("x", "  ", &Certain).is_err());
        assert!(causal_surprisals("", &Certain).is_err());
    }

    #[test]
    fn scorer_tokens_split_multiwords() {
        assert_eq!(
            scorer_tokens("A stop_dead, President_of_the_United_States"),
            vec!["a", "stop", "dead", ",", "president", "of", "the", "united", "states"]
        );
    }
}
