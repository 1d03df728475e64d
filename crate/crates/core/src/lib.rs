//! Authorship obfuscation guided by uniform information density.
//!
//! The pipeline ingests labelled articles ([`corpus`]), rewrites them with
//! one of three obfuscators ([`obfuscate`]), scores every alternate for
//! surprisal uniformity ([`uid`]) and document similarity ([`similarity`]),
//! picks one alternate per UID metric ([`select`]), asks detectors for
//! verdicts ([`attribute`]) and summarises the outcome ([`evaluate`]).
//! Model access goes through the traits in [`scorer`]; external models
//! speak the JSON protocol in [`adapter`].

pub mod adapter;
pub mod attribute;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod lexicon;
pub mod obfuscate;
pub mod pipeline;
pub mod report;
pub mod scorer;
pub mod select;
pub mod similarity;
pub mod uid;

pub use error::{Error, Result, ScorerError};
