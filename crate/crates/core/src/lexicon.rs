//! Stop words, the synonym database and the target-eligibility predicates
//! shared by the word-level obfuscators.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::corpus::{PosTag, Token};
use crate::error::{Error, Result};

/// Bumped whenever `STOP_WORDS` changes, since eligibility depends on it.
pub const STOP_WORDS_VERSION: &str = "en-179-v1";

/// English stop-word list (the widely used 179-entry list).
pub const STOP_WORDS: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
    "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
    "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
    "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
    "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
    "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
    "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't",
    "wouldn", "wouldn't",
];

pub fn is_stop_word(word: &str) -> bool {
    let lower = word.to_lowercase();
    STOP_WORDS.contains(&lower.as_str())
}

pub fn is_proper_noun(token: &Token) -> bool {
    token.tag == PosTag::ProperNoun
}

/// Lemma -> synonyms, with case-insensitive lemma lookup.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynonymDb {
    entries: BTreeMap<String, Vec<String>>,
}

impl SynonymDb {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse `lemma<TAB>syn1,syn2,...` lines. Blank lines and `#` comments
    /// are skipped; repeated lemmas have their lists concatenated in order.
    pub fn parse(content: &str) -> Result<Self> {
        let mut db = SynonymDb::new();
        for (idx, raw) in content.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (lemma, rest) = line.split_once('\t').ok_or_else(|| Error::SynonymLoad {
                line: line_no,
                msg: "expected lemma<TAB>synonyms".into(),
            })?;
            let lemma = lemma.trim();
            if lemma.is_empty() {
                return Err(Error::SynonymLoad {
                    line: line_no,
                    msg: "empty lemma".into(),
                });
            }
            let synonyms: Vec<String> = rest.split(',').map(|s| s.trim().to_string()).collect();
            if synonyms.iter().any(String::is_empty) {
                return Err(Error::SynonymLoad {
                    line: line_no,
                    msg: format!("empty synonym for {lemma:?}"),
                });
            }
            db.insert(lemma, synonyms);
        }
        Ok(db)
    }

    pub fn insert<S: Into<String>>(&mut self, lemma: &str, synonyms: impl IntoIterator<Item = S>) {
        let list = self.entries.entry(lemma.to_lowercase()).or_default();
        list.extend(synonyms.into_iter().map(Into::into));
        if list.is_empty() {
            self.entries.remove(&lemma.to_lowercase());
        }
    }

    pub fn lookup(&self, word: &str) -> &[String] {
        self.entries
            .get(&word.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn has_synonyms(&self, word: &str) -> bool {
        !self.lookup(word).is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

pub fn load_synonyms(path: impl AsRef<Path>) -> Result<SynonymDb> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let db = SynonymDb::parse(&content)?;
    log::info!("loaded {} synonym entries from {}", db.len(), path.display());
    Ok(db)
}

/// Give `replacement` the capitalisation pattern of `original`: all-caps
/// originals (longer than one letter) uppercase it, capitalised originals
/// capitalise its first letter, anything else leaves it as written.
pub fn match_case(original: &str, replacement: &str) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return replacement.to_uppercase();
    }
    if original.chars().next().is_some_and(char::is_uppercase) {
        let mut chars = replacement.chars();
        return match chars.next() {
            Some(first) => first.to_uppercase().chain(chars).collect(),
            None => String::new(),
        };
    }
    replacement.to_string()
}

/// Target-word eligibility knobs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TargetCriteria {
    /// Minimum target length in characters (inclusive).
    pub min_chars: usize,
    pub require_synonym: bool,
    /// Sentences with fewer tokens than this get no target.
    pub min_sentence_words: usize,
}

impl Default for TargetCriteria {
    fn default() -> Self {
        TargetCriteria {
            min_chars: 3,
            require_synonym: true,
            min_sentence_words: 3,
        }
    }
}

pub fn is_eligible(token: &Token, criteria: &TargetCriteria, db: &SynonymDb) -> bool {
    let word = token.text.as_str();
    !word.is_empty()
        && word.chars().all(char::is_alphabetic)
        && word.chars().count() >= criteria.min_chars
        && !is_stop_word(word)
        && !is_proper_noun(token)
        && (!criteria.require_synonym || db.has_synonyms(word))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(text: &str, tag: PosTag) -> Token {
        Token {
            text: text.into(),
            tag,
            start: 0,
            end: text.len(),
        }
    }

    #[test]
    fn stop_words() {
        assert_eq!(STOP_WORDS.len(), 179);
        assert!(is_stop_word("the"));
        assert!(is_stop_word("The"));
        assert!(!is_stop_word("freeze"));
    }

    #[test]
    fn load_and_lookup() {
        let db = SynonymDb::parse("freeze\tstop_dead,halt\n").unwrap();
        assert_eq!(db.lookup("freeze"), &["stop_dead", "halt"]);
        assert_eq!(db.lookup("FREEZE"), &["stop_dead", "halt"]);
        assert!(db.lookup("thaw").is_empty());
    }

    #[test]
    fn duplicate_lemmas_concatenate() {
        let db = SynonymDb::parse("run\tsprint\n# comment\n\nRun\tdash,jog\n").unwrap();
        assert_eq!(db.lookup("run"), &["sprint", "dash", "jog"]);
        assert_eq!(db.len(), 1);
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let err = SynonymDb::parse("ok\tfine\nbroken line\n").unwrap_err();
        assert!(matches!(err, Error::SynonymLoad { line: 2, .. }));
        let err = SynonymDb::parse("ok\tfine,,x\n").unwrap_err();
        assert!(matches!(err, Error::SynonymLoad { line: 1, .. }));
    }

    #[test]
    fn casing() {
        assert_eq!(match_case("president", "President_of_the_United_States"), "President_of_the_United_States");
        assert_eq!(match_case("Freeze", "stop_dead"), "Stop_dead");
        assert_eq!(match_case("NASA", "agency"), "AGENCY");
        assert_eq!(match_case("A", "an"), "An");
    }

    #[test]
    fn eligibility() {
        let db = SynonymDb::parse("obama\tbarack\nox\tbull\nfreeze\thalt\nthe\tthis\n").unwrap();
        let c = TargetCriteria::default();
        assert!(!is_eligible(&tok("obama", PosTag::ProperNoun), &c, &db));
        assert!(!is_eligible(&tok("ox", PosTag::Common), &c, &db));
        assert!(!is_eligible(&tok("the", PosTag::Common), &c, &db));
        assert!(!is_eligible(&tok(".", PosTag::Punctuation), &c, &db));
        assert!(!is_eligible(&tok("thaw", PosTag::Common), &c, &db));
        assert!(is_eligible(&tok("freeze", PosTag::Common), &c, &db));
        let loose = TargetCriteria {
            require_synonym: false,
            ..c
        };
        assert!(is_eligible(&tok("thaw", PosTag::Common), &loose, &db));
    }
}
