//! The sequence-model interface used by the decoder, and a prompt-aware
//! n-gram model that implements it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::phonology::PhonologyError;
use crate::prompts::{PromptError, PromptPlacement, RenderedPrompt};

mod ngram;
mod vocab;

pub use ngram::{BackoffLevel, ContextCounts, ContextKey, NGramConfig, NGramModel, PromptView, TrainingPair, EDGE};
pub use vocab::{VocabEntry, Vocabulary, BOS, EOS, FIRST_CONTENT};

pub type TokenId = u32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("placement {0} is not supported by this model")]
    UnsupportedPlacement(PromptPlacement),
    #[error("model generates in {model} order, {requested} was requested")]
    DirectionMismatch { model: Direction, requested: Direction },
    #[error("token {0:?} is not in the vocabulary")]
    OutOfVocabulary(String),
    #[error("token id {0} cannot appear in a target prefix")]
    InvalidPrefixToken(TokenId),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("model file has format version {found}, expected {expected}")]
    VersionMismatch { found: String, expected: u32 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Phonology(#[from] PhonologyError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Order in which target tokens are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Normal,
    /// Last token first, so the end word is chosen before anything else.
    Reverse,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Normal => "normal",
            Direction::Reverse => "reverse",
        })
    }
}

impl FromStr for Direction {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(Direction::Normal),
            "reverse" => Ok(Direction::Reverse),
            _ => Err(ModelError::InvalidConfig(format!("unknown direction {s:?}"))),
        }
    }
}

/// Anything that gives a next-token distribution for a source line, a
/// rendered prompt and a generation-order prefix of content tokens.
pub trait SequenceModel: Send + Sync {
    fn vocabulary(&self) -> &Vocabulary;

    fn direction(&self) -> Direction;

    fn supports(&self, placement: PromptPlacement) -> bool;

    /// Probability of every vocabulary id. Sums to one; ids that can never
    /// be generated (BOS, prompt tokens) get zero.
    fn next_distribution(
        &self,
        source: &str,
        prompt: &RenderedPrompt,
        prefix: &[TokenId],
        direction: Direction,
    ) -> Result<Vec<f64>, ModelError>;
}
