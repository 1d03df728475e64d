use std::collections::{BTreeMap, HashMap};

use super::{FillCandidate, MaskedPredictor};
use crate::corpus::{sentence_spans, word_tokenize};
use crate::error::Result;

const BOS: &str = "<s>";
const EOS: &str = "</s>";

/// Slot-frequency masked predictor.
///
/// A fill's score is the number of times the word was seen between the same
/// left and right neighbours, plus its unigram count scaled into `[0, 1)`,
/// so slot evidence always dominates and unigram frequency breaks ties (and
/// ranks everything when the slot was never seen). Remaining ties go to the
/// alphabetically smaller word.
#[derive(Clone, Debug, Default)]
pub struct SlotFrequencyPredictor {
    /// Alphabetic lowercase words with their unigram counts, sorted.
    unigram: BTreeMap<String, u64>,
    total: u64,
    slots: HashMap<(String, String), HashMap<String, u64>>,
}

fn is_vocab_word(token: &str) -> bool {
    !token.is_empty() && token.chars().all(char::is_alphabetic)
}

impl SlotFrequencyPredictor {
    /// Fit on raw texts, segmenting each into sentences.
    pub fn fit<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut sentences = Vec::new();
        for text in texts {
            for (s, e) in sentence_spans(text) {
                sentences.push(
                    word_tokenize(&text[s..e])
                        .into_iter()
                        .map(str::to_lowercase)
                        .collect::<Vec<_>>(),
                );
            }
        }
        Self::fit_sentences(&sentences)
    }

    pub fn fit_sentences(sentences: &[Vec<String>]) -> Self {
        let mut model = SlotFrequencyPredictor::default();
        for sentence in sentences {
            for (i, tok) in sentence.iter().enumerate() {
                let tok = tok.to_lowercase();
                if !is_vocab_word(&tok) {
                    continue;
                }
                *model.unigram.entry(tok.clone()).or_insert(0) += 1;
                model.total += 1;
                let key = neighbours(sentence, i);
                *model.slots.entry(key).or_default().entry(tok).or_insert(0) += 1;
            }
        }
        model
    }

    pub fn vocab_size(&self) -> usize {
        self.unigram.len()
    }
}

fn neighbours(tokens: &[String], i: usize) -> (String, String) {
    let left = if i == 0 {
        BOS.to_string()
    } else {
        tokens[i - 1].to_lowercase()
    };
    let right = tokens
        .get(i + 1)
        .map(|t| t.to_lowercase())
        .unwrap_or_else(|| EOS.to_string());
    (left, right)
}

impl MaskedPredictor for SlotFrequencyPredictor {
    fn fills(&self, tokens: &[String], mask_index: usize, k: usize) -> Result<Vec<FillCandidate>> {
        let slot = self.slots.get(&neighbours(tokens, mask_index));
        let scale = (self.total + 1) as f64;
        let mut scored: Vec<FillCandidate> = self
            .unigram
            .iter()
            .map(|(word, &count)| {
                let in_slot = slot.and_then(|m| m.get(word)).copied().unwrap_or(0);
                FillCandidate {
                    word: word.clone(),
                    score: in_slot as f64 + count as f64 / scale,
                }
            })
            .collect();
        // stable sort keeps alphabetical order among equal scores
        scored.sort_by(|a, b| b.score.total_cmp(&a.score));
        scored.truncate(k);
        Ok(scored)
    }
}
