use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Paraphraser;
use crate::corpus::{fnv1a, word_spans, word_tokenize};
use crate::error::Result;
use crate::lexicon::{is_stop_word, match_case, SynonymDb};

const MAX_SITES: usize = 8;
const MAX_SYNONYMS_PER_SITE: usize = 4;

/// Offline paraphraser: clause rotation plus single-word synonym
/// substitution, decoded group by group with a Hamming-style diversity
/// penalty so later outputs are pushed away from earlier ones.
///
/// Each candidate rewrite has a base score of `-0.1` per edit plus a small
/// seeded jitter; group `g` picks the candidate maximising
/// `base - penalty * sum(similarity to outputs of groups < g)`. With a
/// positive penalty no candidate is repeated until all have been used.
#[derive(Clone, Debug)]
pub struct StubParaphraser {
    synonyms: SynonymDb,
    seed: u64,
}

struct Candidate {
    text: String,
    tokens: Vec<String>,
    base: f64,
}

impl StubParaphraser {
    pub fn new(synonyms: SynonymDb, seed: u64) -> Self {
        StubParaphraser { synonyms, seed }
    }

    fn candidates(&self, sentence: &str) -> Vec<Candidate> {
        let spans = word_spans(sentence);
        let sites: Vec<(usize, usize)> = spans
            .iter()
            .copied()
            .filter(|&(s, e)| {
                let w = &sentence[s..e];
                w.chars().all(char::is_alphabetic)
                    && w.chars().count() >= 3
                    && !is_stop_word(w)
                    && self.synonyms.has_synonyms(w)
            })
            .take(MAX_SITES)
            .collect();

        let mut substituted = vec![(sentence.to_string(), 0usize)];
        for &(s, e) in &sites {
            let word = &sentence[s..e];
            for syn in self.synonyms.lookup(word).iter().take(MAX_SYNONYMS_PER_SITE) {
                let replacement = match_case(word, syn);
                if replacement == word {
                    continue;
                }
                let text = format!("{}{}{}", &sentence[..s], replacement, &sentence[e..]);
                substituted.push((text, 1));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(sentence.as_bytes()));
        let mut out: Vec<Candidate> = Vec::new();
        for (text, subs) in substituted {
            for (r, rotated) in rotations(&text).into_iter().enumerate() {
                let edits = subs + usize::from(r > 0);
                if edits == 0 || out.iter().any(|c| c.text == rotated) {
                    continue;
                }
                let jitter: f64 = rng.gen_range(0.0..0.05);
                out.push(Candidate {
                    tokens: word_tokenize(&rotated).into_iter().map(str::to_string).collect(),
                    text: rotated,
                    base: -0.1 * edits as f64 + jitter,
                });
            }
        }
        out
    }
}

/// Every rotation of the comma/semicolon-separated clauses of `sentence`,
/// starting with the identity. Terminal punctuation stays at the end.
fn rotations(sentence: &str) -> Vec<String> {
    let trimmed = sentence.trim();
    let body_end = trimmed
        .char_indices()
        .rev()
        .find(|(_, c)| !matches!(c, '.' | '!' | '?' | '…' | '"' | '\'' | '”'))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let (body, terminal) = trimmed.split_at(body_end);
    let clauses: Vec<&str> = body
        .split([',', ';'])
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .collect();
    if clauses.len() < 2 {
        return vec![sentence.to_string()];
    }
    let capitalised = trimmed.chars().next().is_some_and(char::is_uppercase);
    // a leading function word loses its capital once it is mid-sentence
    let mut moved: Vec<String> = clauses.iter().map(|c| c.to_string()).collect();
    if capitalised && word_tokenize(clauses[0]).first().is_some_and(|w| is_stop_word(w)) {
        let mut chars = clauses[0].chars();
        if let Some(first) = chars.next() {
            moved[0] = first.to_lowercase().chain(chars).collect();
        }
    }
    let mut out = vec![sentence.to_string()];
    for r in 1..clauses.len() {
        let joined = moved[r..]
            .iter()
            .chain(moved[..r].iter())
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(", ");
        let joined = if capitalised {
            let mut chars = joined.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect(),
                None => joined,
            }
        } else {
            joined
        };
        out.push(format!("{joined}{terminal}"));
    }
    out
}

fn overlap(a: &[String], b: &[String]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    same as f64 / longest as f64
}

impl Paraphraser for StubParaphraser {
    fn paraphrases(&self, sentence: &str, n: usize, diversity_penalty: f64) -> Result<Vec<String>> {
        let candidates = self.candidates(sentence);
        if candidates.is_empty() {
            return Ok(vec![sentence.to_string(); n]);
        }
        let mut chosen: Vec<usize> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            let exhausted = chosen.len() >= candidates.len();
            for (i, c) in candidates.iter().enumerate() {
                if diversity_penalty > 0.0 && !exhausted && chosen.contains(&i) {
                    continue;
                }
                let penalty: f64 = chosen
                    .iter()
                    .map(|&j| overlap(&c.tokens, &candidates[j].tokens))
                    .sum();
                let score = c.base - diversity_penalty * penalty;
                if score > best_score {
                    best = i;
                    best_score = score;
                }
            }
            chosen.push(best);
        }
        Ok(chosen.into_iter().map(|i| candidates[i].text.clone()).collect())
    }
}
