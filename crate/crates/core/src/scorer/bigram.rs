use std::collections::HashMap;

use super::{scorer_tokens, CausalScorer, SurprisalSequence, TokenSurprisal};
use crate::error::{Error, Result};

const UNK: u32 = 0;

/// Add-one smoothed bigram model over [`scorer_tokens`].
///
/// The first token of a text is scored by the smoothed unigram distribution
/// `(c(w) + 1) / (N + V)`; every later token by
/// `(c(prev, w) + 1) / (c(prev, *) + V)`, where `V` counts the vocabulary
/// plus one unknown-word slot. Texts are scored as one stream, so context
/// crosses sentence boundaries.
#[derive(Clone, Debug)]
pub struct BigramScorer {
    ids: HashMap<String, u32>,
    unigram: Vec<u64>,
    total: u64,
    bigram: HashMap<(u32, u32), u64>,
    /// c(prev, *): number of times each id is followed by something.
    followers: Vec<u64>,
}

impl BigramScorer {
    pub fn fit<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut unigram = vec![0u64];
        let mut followers = vec![0u64];
        let mut bigram = HashMap::new();
        let mut total = 0u64;
        for text in texts {
            let mut prev: Option<u32> = None;
            for tok in scorer_tokens(text) {
                let next_id = ids.len() as u32 + 1;
                let id = *ids.entry(tok).or_insert(next_id);
                if id as usize == unigram.len() {
                    unigram.push(0);
                    followers.push(0);
                }
                unigram[id as usize] += 1;
                total += 1;
                if let Some(p) = prev {
                    *bigram.entry((p, id)).or_insert(0) += 1;
                    followers[p as usize] += 1;
                }
                prev = Some(id);
            }
        }
        BigramScorer {
            ids,
            unigram,
            total,
            bigram,
            followers,
        }
    }

    /// Vocabulary size including the unknown-word slot.
    pub fn vocab_size(&self) -> usize {
        self.unigram.len()
    }

    fn id(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(UNK)
    }

    fn log_unigram(&self, id: u32) -> f64 {
        let v = self.vocab_size() as f64;
        ((self.unigram[id as usize] + 1) as f64 / (self.total as f64 + v)).ln()
    }

    fn log_bigram(&self, prev: u32, id: u32) -> f64 {
        let v = self.vocab_size() as f64;
        let joint = self.bigram.get(&(prev, id)).copied().unwrap_or(0);
        ((joint + 1) as f64 / (self.followers[prev as usize] as f64 + v)).ln()
    }

    fn log_prob(&self, prev: Option<u32>, id: u32) -> f64 {
        match prev {
            None => self.log_unigram(id),
            Some(p) => self.log_bigram(p, id),
        }
    }

    /// Natural-log joint probability of the whole token stream of `text`.
    pub fn log_joint(&self, text: &str) -> f64 {
        let mut prev = None;
        let mut sum = 0.0;
        for tok in scorer_tokens(text) {
            let id = self.id(&tok);
            sum += self.log_prob(prev, id);
            prev = Some(id);
        }
        sum
    }
}

impl CausalScorer for BigramScorer {
    fn surprisals(&self, text: &str) -> Result<SurprisalSequence> {
        let mut prev = None;
        let seq = scorer_tokens(text)
            .into_iter()
            .map(|token| {
                let id = self.id(&token);
                let surprisal = -self.log_prob(prev, id);
                prev = Some(id);
                TokenSurprisal { token, surprisal }
            })
            .collect();
        Ok(SurprisalSequence(seq))
    }

    fn word_logprob(&self, prefix: &str, word: &str) -> Result<f64> {
        let word_tokens = scorer_tokens(word);
        if word_tokens.is_empty() {
            return Err(Error::Argument(format!("word {word:?} has no tokens")));
        }
        let mut prev = scorer_tokens(prefix).last().map(|t| self.id(t));
        let mut sum = 0.0;
        for tok in word_tokens {
            let id = self.id(&tok);
            sum += self.log_prob(prev, id);
            prev = Some(id);
        }
        Ok(sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_repeated_token() {
        // corpus "a a a a": c(a)=4, N=4, V=2 (a + unk), c(a,a)=3, c(a,*)=3
        let m = BigramScorer::fit(["a a a a"]);
        let s = m.surprisals("a a a").unwrap().values();
        let p0 = 5.0 / 6.0;
        let p = 4.0 / 5.0;
        assert_eq!(s.len(), 3);
        assert!((s[0] + f64::ln(p0)).abs() < 1e-12);
        assert!((s[1] + f64::ln(p)).abs() < 1e-12);
        assert!((s[2] + f64::ln(p)).abs() < 1e-12);
    }

    #[test]
    fn single_token_is_unconditional() {
        let m = BigramScorer::fit(["the cat sat on the mat"]);
        // c(the)=2, N=6, V=5+1
        let s = m.surprisals("the").unwrap().values();
        assert_eq!(s.len(), 1);
        assert!((s[0] + (3.0f64 / 12.0).ln()).abs() < 1e-12);
        let lp = m.word_logprob("", "the").unwrap();
        assert!((lp - (3.0f64 / 12.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn candidate_ordering_matches_counts() {
        // after "hiring": "freeze" twice, "halt" once; c(hiring,*)=3, V=5
        let m = BigramScorer::fit(["hiring freeze", "hiring freeze", "hiring halt", "stop"]);
        let freeze = m.word_logprob("impose federal hiring", "freeze").unwrap();
        let halt = m.word_logprob("impose federal hiring", "halt").unwrap();
        assert!((freeze - (3.0f64 / 8.0).ln()).abs() < 1e-12);
        assert!((halt - (2.0f64 / 8.0).ln()).abs() < 1e-12);
        assert!(freeze > halt);
    }

    #[test]
    fn multi_token_word_sums() {
        let m = BigramScorer::fit(["stop dead now", "stop here"]);
        let joint = m.word_logprob("we", "stop_dead").unwrap();
        let a = m.word_logprob("we", "stop").unwrap();
        let b = m.word_logprob("we stop", "dead").unwrap();
        assert!((joint - (a + b)).abs() < 1e-12);
    }

    #[test]
    fn surprisals_sum_to_joint() {
        let m = BigramScorer::fit(["the quick brown fox. the lazy dog!", "a fox ran"]);
        let text = "the lazy fox ran quick. unseen words here";
        let total = m.surprisals(text).unwrap().total();
        assert!((total + m.log_joint(text)).abs() < 1e-9);
    }
}
