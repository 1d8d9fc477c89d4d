//! Constrained decoding and evaluation for singable lyric translation.
//!
//! The crate is organised around the three constraint channels a lyric
//! line must satisfy: syllable count, end rhyme and word boundaries.
//!
//! * [`phonology`] counts syllables, segments words and classifies rhymes.
//! * [`melody`] turns a melody into length and boundary constraints.
//! * [`prompts`] builds, samples and serializes constraint prompts.
//! * [`model`] defines the sequence-model interface and a smoothed n-gram
//!   reference model.
//! * [`decode`] runs constrained beam search in either direction.
//! * [`ranking`] ranks end rhymes for a paragraph.
//! * [`metrics`] scores outputs (length/rhyme accuracy, boundary recall,
//!   TER, BLEU).
//! * [`dataprep`] normalizes corpora and generates training examples.

pub mod dataprep;
pub mod decode;
pub mod melody;
pub mod metrics;
pub mod model;
pub mod phonology;
pub mod prompts;
pub mod ranking;

pub use phonology::{LanguageProfile, RhymeClass, RhymeDistribution, SyllabifiedSentence};
