//! Constraint sets and the special-token prompts that carry them.
//!
//! A prompt is `len_L rhy_R bdr_b1 … bdr_bL`: one length token, one rhyme
//! token and one boundary token per output syllable, where `bdr_1` after
//! syllable `p` asks for a word boundary there.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::phonology::{
    LanguageProfile, PhonologyError, RhymeClass, RhymeDistribution, SyllabifiedSentence,
};

/// Number of length tokens, `len_1` to `len_20`.
pub const MAX_LENGTH: usize = 20;

/// Relative weights of drawing 1, 2, 3 or 4 boundary marks.
pub const BOUNDARY_COUNT_WEIGHTS: [u32; 4] = [1, 4, 3, 1];

/// Share of each rhyme type replaced by `rhy_0` during training.
pub const DEFAULT_NULL_RHYME_RATE: f64 = 1.0 / 15.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("length {0} is outside 1..={MAX_LENGTH}")]
    LengthOutOfRange(usize),
    #[error("rhyme class {0} cannot be used as a constraint")]
    InvalidRhyme(RhymeClass),
    #[error("boundary position {position} is not interior for length {length}")]
    BoundaryOutOfRange { position: usize, length: usize },
    #[error("target has {0} syllables, more than {MAX_LENGTH}")]
    TooLong(usize),
    #[error("end rhyme of {0:?} is not in the rhyme table")]
    UnclassifiableRhyme(String),
    #[error("rate {0} is outside [0, 1]")]
    InvalidRate(f64),
    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
    #[error(transparent)]
    Phonology(#[from] PhonologyError),
}

fn parse_err(what: &'static str, input: &str) -> PromptError {
    PromptError::Parse {
        what,
        input: input.to_string(),
    }
}

/// Desired length, end rhyme and required word boundaries of one line.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintSet {
    length: usize,
    rhyme: RhymeClass,
    boundary: Vec<bool>,
}

impl ConstraintSet {
    /// `required` lists boundary positions `p` (after syllable `p`), each
    /// in `1..length`.
    pub fn new(
        length: usize,
        rhyme: RhymeClass,
        required: impl IntoIterator<Item = usize>,
    ) -> Result<Self, PromptError> {
        check_length(length)?;
        let mut bits = vec![false; length];
        for position in required {
            if position == 0 || position >= length {
                return Err(PromptError::BoundaryOutOfRange { position, length });
            }
            bits[position - 1] = true;
        }
        Self::from_bits(rhyme, bits)
    }

    /// Builds from a boundary bit vector of width `length`.
    pub fn from_bits(rhyme: RhymeClass, boundary: Vec<bool>) -> Result<Self, PromptError> {
        let length = boundary.len();
        check_length(length)?;
        if boundary[length - 1] {
            return Err(PromptError::BoundaryOutOfRange {
                position: length,
                length,
            });
        }
        if !matches!(rhyme, RhymeClass::Null)
            && !matches!(rhyme, RhymeClass::Scheme(i) if (1..=RhymeClass::MAX_SCHEME).contains(&i))
        {
            return Err(PromptError::InvalidRhyme(rhyme));
        }
        Ok(Self {
            length,
            rhyme,
            boundary,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn rhyme(&self) -> RhymeClass {
        self.rhyme
    }

    pub fn boundary_bits(&self) -> &[bool] {
        &self.boundary
    }

    /// Whether a boundary is required after syllable `position`.
    pub fn requires_boundary(&self, position: usize) -> bool {
        position >= 1 && self.boundary.get(position - 1).copied().unwrap_or(false)
    }

    pub fn required_boundaries(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i + 1)
    }

    pub fn with_rhyme(mut self, rhyme: RhymeClass) -> Result<Self, PromptError> {
        self = Self::from_bits(rhyme, std::mem::take(&mut self.boundary))?;
        Ok(self)
    }

    /// The same constraints read right to left: boundary `p` becomes
    /// `length - p`.
    pub fn mirrored(&self) -> Self {
        let mut bits = vec![false; self.length];
        for p in self.required_boundaries() {
            bits[self.length - p - 1] = true;
        }
        Self {
            length: self.length,
            rhyme: self.rhyme,
            boundary: bits,
        }
    }
}

fn check_length(length: usize) -> Result<(), PromptError> {
    if (1..=MAX_LENGTH).contains(&length) {
        Ok(())
    } else {
        Err(PromptError::LengthOutOfRange(length))
    }
}

/// Constraint line format: `L=<int> R=<int> B=<comma-separated positions>`.
impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let positions: Vec<String> = self.required_boundaries().map(|p| p.to_string()).collect();
        write!(
            f,
            "L={} R={} B={}",
            self.length,
            self.rhyme.index().unwrap_or(0),
            positions.join(",")
        )
    }
}

impl FromStr for ConstraintSet {
    type Err = PromptError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [l, r, b] = fields.as_slice() else {
            return Err(parse_err("constraint line", line));
        };
        let value = |field: &'static str, s: &str| -> Result<String, PromptError> {
            s.strip_prefix(field)
                .map(str::to_string)
                .ok_or_else(|| parse_err("constraint line", line))
        };
        let length: usize = value("L=", l)?
            .parse()
            .map_err(|_| parse_err("length", l))?;
        let rhyme: u8 = value("R=", r)?.parse().map_err(|_| parse_err("rhyme", r))?;
        let rhyme = RhymeClass::from_index(rhyme)
            .ok_or(PromptError::InvalidRhyme(RhymeClass::Scheme(rhyme)))?;
        let positions = value("B=", b)?;
        let positions = positions
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|_| parse_err("boundary", s)))
            .collect::<Result<Vec<_>, _>>()?;
        ConstraintSet::new(length, rhyme, positions)
    }
}

/// One prompt special token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PromptToken {
    Len(u8),
    Rhy(u8),
    Bdr(bool),
}

impl PromptToken {
    /// Every prompt token in vocabulary order: lengths, rhymes, boundaries.
    pub fn all() -> impl Iterator<Item = PromptToken> {
        (1..=MAX_LENGTH as u8)
            .map(PromptToken::Len)
            .chain((0..=RhymeClass::MAX_SCHEME).map(PromptToken::Rhy))
            .chain([PromptToken::Bdr(false), PromptToken::Bdr(true)])
    }
}

impl fmt::Display for PromptToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromptToken::Len(i) => write!(f, "len_{i}"),
            PromptToken::Rhy(j) => write!(f, "rhy_{j}"),
            PromptToken::Bdr(b) => write!(f, "bdr_{}", u8::from(*b)),
        }
    }
}

impl FromStr for PromptToken {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || parse_err("prompt token", s);
        let (kind, n) = s.split_once('_').ok_or_else(err)?;
        let n: u8 = n.parse().map_err(|_| err())?;
        match kind {
            "len" if (1..=MAX_LENGTH as u8).contains(&n) => Ok(PromptToken::Len(n)),
            "rhy" if n <= RhymeClass::MAX_SCHEME => Ok(PromptToken::Rhy(n)),
            "bdr" if n <= 1 => Ok(PromptToken::Bdr(n == 1)),
            _ => Err(err()),
        }
    }
}

/// Serialized prompt: `len_L rhy_R bdr_* × L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PromptSequence(Vec<PromptToken>);

impl PromptSequence {
    pub fn tokens(&self) -> &[PromptToken] {
        &self.0
    }

    /// Recovers the constraint set the sequence encodes.
    pub fn to_constraints(&self) -> Result<ConstraintSet, PromptError> {
        let malformed = || parse_err("prompt sequence", &self.to_string());
        let (len, rest) = self.0.split_first().ok_or_else(malformed)?;
        let (rhy, bdrs) = rest.split_first().ok_or_else(malformed)?;
        let (PromptToken::Len(len), PromptToken::Rhy(rhy)) = (len, rhy) else {
            return Err(malformed());
        };
        if bdrs.len() != usize::from(*len) {
            return Err(malformed());
        }
        let bits = bdrs
            .iter()
            .map(|t| match t {
                PromptToken::Bdr(b) => Ok(*b),
                _ => Err(malformed()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rhyme = RhymeClass::from_index(*rhy).ok_or_else(malformed)?;
        ConstraintSet::from_bits(rhyme, bits)
    }
}

impl fmt::Display for PromptSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for PromptSequence {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(PromptSequence)
    }
}

/// Where the prompt enters the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromptPlacement {
    /// Prefix of the encoder input.
    #[serde(rename = "enc-pref")]
    EncoderPrefix,
    /// Prefix of the decoder input.
    #[serde(rename = "dec-pref")]
    DecoderPrefix,
    /// Added to the decoder input embeddings position by position.
    #[serde(rename = "dec-emb")]
    DecoderEmbedding,
}

impl PromptPlacement {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptPlacement::EncoderPrefix => "enc-pref",
            PromptPlacement::DecoderPrefix => "dec-pref",
            PromptPlacement::DecoderEmbedding => "dec-emb",
        }
    }
}

impl fmt::Display for PromptPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptPlacement {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "enc-pref" => Ok(PromptPlacement::EncoderPrefix),
            "dec-pref" => Ok(PromptPlacement::DecoderPrefix),
            "dec-emb" => Ok(PromptPlacement::DecoderEmbedding),
            _ => Err(parse_err("placement", s)),
        }
    }
}

/// Prompt annotation for one target position under [`PromptPlacement::DecoderEmbedding`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelSlot {
    pub len: PromptToken,
    pub rhy: PromptToken,
    pub bdr: PromptToken,
}

/// A rendered prompt together with where it is to be injected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RenderedPrompt {
    placement: PromptPlacement,
    sequence: PromptSequence,
    constraints: ConstraintSet,
}

impl RenderedPrompt {
    pub fn placement(&self) -> PromptPlacement {
        self.placement
    }

    pub fn sequence(&self) -> &PromptSequence {
        &self.sequence
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    /// Per-position annotation for the embedding channel; `None` for the
    /// prefix placements.
    pub fn embedding_channel(&self) -> Option<Vec<ChannelSlot>> {
        if self.placement != PromptPlacement::DecoderEmbedding {
            return None;
        }
        let tokens = self.sequence.tokens();
        Some(
            tokens[2..]
                .iter()
                .map(|&bdr| ChannelSlot {
                    len: tokens[0],
                    rhy: tokens[1],
                    bdr,
                })
                .collect(),
        )
    }
}

pub fn render_prompt(constraints: &ConstraintSet, placement: PromptPlacement) -> RenderedPrompt {
    let mut tokens = Vec::with_capacity(constraints.length() + 2);
    tokens.push(PromptToken::Len(constraints.length() as u8));
    tokens.push(PromptToken::Rhy(constraints.rhyme().index().unwrap_or(0)));
    tokens.extend(constraints.boundary_bits().iter().map(|&b| PromptToken::Bdr(b)));
    RenderedPrompt {
        placement,
        sequence: PromptSequence(tokens),
        constraints: constraints.clone(),
    }
}

/// Draws how many boundaries to mark, 1..=4 in the ratio 1:4:3:1.
pub fn sample_boundary_count<R: Rng + ?Sized>(rng: &mut R) -> usize {
    let dist = WeightedIndex::new(BOUNDARY_COUNT_WEIGHTS).expect("static weights");
    dist.sample(rng) + 1
}

/// Marks a random subset of `candidates` (1-based interior positions) in a
/// bit vector of width `width`.
pub fn sample_boundaries<R: Rng + ?Sized>(
    width: usize,
    candidates: &[usize],
    rng: &mut R,
) -> Vec<bool> {
    let n = sample_boundary_count(rng).min(candidates.len());
    let mut bits = vec![false; width];
    for i in rand::seq::index::sample(rng, candidates.len(), n) {
        bits[candidates[i] - 1] = true;
    }
    bits
}

/// Pseudo ground-truth boundary prompt drawn from a sentence's own word
/// boundaries.
pub fn sample_boundary_prompt<R: Rng + ?Sized>(
    sentence: &SyllabifiedSentence,
    rng: &mut R,
) -> Vec<bool> {
    let candidates: Vec<usize> = sentence.word_boundary_positions().iter().copied().collect();
    sample_boundaries(sentence.total_syllables(), &candidates, rng)
}

/// Constraints read off a reference target line.
pub fn constraints_from_target<R: Rng + ?Sized>(
    target: &str,
    profile: &LanguageProfile,
    rng: &mut R,
) -> Result<ConstraintSet, PromptError> {
    let sentence = profile.segment_words(target)?;
    let length = sentence.total_syllables();
    if length > MAX_LENGTH {
        return Err(PromptError::TooLong(length));
    }
    let rhyme = match profile.classify_rhyme(target)? {
        RhymeClass::Unknown => return Err(PromptError::UnclassifiableRhyme(target.to_string())),
        class => class,
    };
    let bits = sample_boundary_prompt(&sentence, rng);
    ConstraintSet::from_bits(rhyme, bits)
}

/// Constraints simulated from a source line: its syllable count, a rhyme
/// drawn from `prior`, and boundaries sampled from its word boundaries.
pub fn constraints_from_source<R: Rng + ?Sized>(
    source: &str,
    source_profile: &LanguageProfile,
    prior: &RhymeDistribution,
    rng: &mut R,
) -> Result<ConstraintSet, PromptError> {
    let sentence = source_profile.segment_words(source)?;
    let mut length = sentence.total_syllables();
    if length > MAX_LENGTH {
        log::warn!("source has {length} syllables, clamping the length prompt to {MAX_LENGTH}");
        length = MAX_LENGTH;
    }
    let rhyme = prior.sample(rng);
    let candidates: Vec<usize> = sentence
        .word_boundary_positions()
        .iter()
        .copied()
        .filter(|&p| p < length)
        .collect();
    let bits = sample_boundaries(length, &candidates, rng);
    ConstraintSet::from_bits(rhyme, bits)
}

/// Independently replaces each example's rhyme with `rhy_0` with
/// probability `rate`.
pub fn nullify_rhyme<'a, I, R>(
    examples: I,
    rate: f64,
    rng: &'a mut R,
) -> Result<impl Iterator<Item = ConstraintSet> + 'a, PromptError>
where
    I: IntoIterator<Item = ConstraintSet>,
    I::IntoIter: 'a,
    R: Rng + ?Sized,
{
    if !(0.0..=1.0).contains(&rate) {
        return Err(PromptError::InvalidRate(rate));
    }
    Ok(examples.into_iter().map(move |c| nullify_one(c, rate, rng)))
}

pub(crate) fn nullify_one<R: Rng + ?Sized>(c: ConstraintSet, rate: f64, rng: &mut R) -> ConstraintSet {
    if rng.random_bool(rate) {
        ConstraintSet {
            rhyme: RhymeClass::Null,
            ..c
        }
    } else {
        c
    }
}
