//! Whole-document cosine similarity over raw term counts.

use std::collections::BTreeMap;

use crate::error::Result;

/// Sparse bag of lowercased alphanumeric terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TermVector(pub BTreeMap<String, u32>);

impl TermVector {
    pub fn get(&self, term: &str) -> u32 {
        self.0.get(term).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn norm(&self) -> f64 {
        self.0
            .values()
            .map(|&c| f64::from(c) * f64::from(c))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn vectorize(text: &str) -> TermVector {
    let mut counts = BTreeMap::new();
    for term in text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        *counts.entry(term.to_lowercase()).or_insert(0) += 1;
    }
    TermVector(counts)
}

pub fn cosine_vectors(a: &TermVector, b: &TermVector) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let (small, large) = if a.0.len() <= b.0.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .0
        .iter()
        .map(|(t, &c)| f64::from(c) * f64::from(large.get(t)))
        .sum();
    (dot / (a.norm() * b.norm())).clamp(0.0, 1.0)
}

pub fn cosine_similarity(a: &str, b: &str) -> f64 {
    cosine_vectors(&vectorize(a), &vectorize(b))
}

/// Document similarity backend. The default is [`CountCosine`].
pub trait SimilarityScorer: Send + Sync {
    fn similarity(&self, original: &str, variant: &str) -> Result<f64>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CountCosine;

impl SimilarityScorer for CountCosine {
    fn similarity(&self, original: &str, variant: &str) -> Result<f64> {
        Ok(cosine_similarity(original, variant))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorize_examples() {
        let v = vectorize("A a b.");
        assert_eq!(v.get("a"), 2);
        assert_eq!(v.get("b"), 1);
        assert_eq!(v.0.len(), 2);
        assert!(vectorize("").is_empty());
    }

    #[test]
    fn hand_tally() {
        // the x3, cat x2, sat, on, mat, dog, 2024
        let v = vectorize("The cat sat on the mat. The dog? A cat-2024!");
        let expected: BTreeMap<String, u32> = [
            ("the", 3), ("cat", 2), ("sat", 1), ("on", 1), ("mat", 1), ("dog", 1), ("a", 1), ("2024", 1),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        assert_eq!(v.0, expected);
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine_similarity("same words here", "same words here") - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity("alpha beta", "gamma delta"), 0.0);
        assert!((cosine_similarity("a b", "a c") - 0.5).abs() < 1e-12);
        assert_eq!(cosine_similarity("", ""), 1.0);
        assert_eq!(cosine_similarity("", "x"), 0.0);
    }
}
