//! Syllable counting, word segmentation and rhyme classification driven by
//! a [`LanguageProfile`].

mod english;
pub mod pinyin;
mod profile;

use std::collections::BTreeSet;
use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

pub use profile::{
    LanguageProfile, ProfileBuilder, ProfileError, PronunciationHook, SyllableRule,
    PROFILE_FORMAT_VERSION,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PhonologyError {
    #[error("empty input after normalization")]
    EmptyInput,
    #[error("token {0:?} has no syllabification under this profile")]
    UnpronounceableToken(String),
    #[error("no line of the corpus has a classifiable end rhyme")]
    NoClassifiableLines,
}

/// End-rhyme class of a word.
///
/// `Null` is the "no rhyme constraint" class (index 0) and is never the
/// result of classifying text. `Unknown` marks finals absent from the
/// profile's rhyme table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RhymeClass {
    Null,
    Scheme(u8),
    Unknown,
}

impl RhymeClass {
    pub const MAX_SCHEME: u8 = 14;

    /// Scheme class `1..=14`.
    pub fn scheme(index: u8) -> Option<Self> {
        (1..=Self::MAX_SCHEME)
            .contains(&index)
            .then_some(RhymeClass::Scheme(index))
    }

    /// Prompt index `0..=14`, where 0 is `Null`.
    pub fn from_index(index: u8) -> Option<Self> {
        if index == 0 {
            Some(RhymeClass::Null)
        } else {
            Self::scheme(index)
        }
    }

    /// Prompt index, or `None` for `Unknown`.
    pub fn index(self) -> Option<u8> {
        match self {
            RhymeClass::Null => Some(0),
            RhymeClass::Scheme(i) => Some(i),
            RhymeClass::Unknown => None,
        }
    }
}

impl fmt::Display for RhymeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhymeClass::Null => f.write_str("0"),
            RhymeClass::Scheme(i) => write!(f, "{i}"),
            RhymeClass::Unknown => f.write_str("unknown"),
        }
    }
}

/// Probability vector over scheme classes `1..=u`, plus the mass that
/// belongs to no class (unknown finals, special tokens).
#[derive(Debug, Clone, PartialEq)]
pub struct RhymeDistribution {
    probs: Vec<f64>,
    residual: f64,
}

impl RhymeDistribution {
    pub const TOLERANCE: f64 = 1e-9;

    /// `probs[i]` is the mass of class `i + 1`.
    pub fn new(probs: Vec<f64>, residual: f64) -> Option<Self> {
        let ok = probs.iter().chain(Some(&residual)).all(|p| p.is_finite() && *p >= 0.0);
        let total: f64 = probs.iter().sum::<f64>() + residual;
        (ok && (total - 1.0).abs() <= Self::TOLERANCE).then_some(Self { probs, residual })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn class_count(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, class: RhymeClass) -> f64 {
        match class {
            RhymeClass::Scheme(i) => self.probs.get(usize::from(i) - 1).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Highest-probability class; ties go to the lower index.
    pub fn argmax(&self) -> Option<RhymeClass> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 && best.is_none_or(|(_, b)| p > b) {
                best = Some((i, p));
            }
        }
        best.map(|(i, _)| RhymeClass::Scheme(i as u8 + 1))
    }

    /// Draws a class in proportion to the class masses (the residual is not
    /// a drawable outcome).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RhymeClass {
        let dist = WeightedIndex::new(&self.probs).expect("distribution has class mass");
        RhymeClass::Scheme(dist.sample(rng) as u8 + 1)
    }
}

/// A sentence split into words, with per-word syllable counts and the
/// interior word-boundary positions (boundary `p` sits after syllable `p`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyllabifiedSentence {
    tokens: Vec<String>,
    syllables_per_token: Vec<usize>,
    total_syllables: usize,
    word_boundary_positions: BTreeSet<usize>,
}

impl SyllabifiedSentence {
    pub fn new(tokens: Vec<String>, syllables_per_token: Vec<usize>) -> Self {
        assert_eq!(tokens.len(), syllables_per_token.len());
        let total_syllables = syllables_per_token.iter().sum();
        let mut word_boundary_positions = BTreeSet::new();
        let mut acc = 0;
        for &n in &syllables_per_token {
            acc += n;
            if acc < total_syllables {
                word_boundary_positions.insert(acc);
            }
        }
        Self {
            tokens,
            syllables_per_token,
            total_syllables,
            word_boundary_positions,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn syllables_per_token(&self) -> &[usize] {
        &self.syllables_per_token
    }

    pub fn total_syllables(&self) -> usize {
        self.total_syllables
    }

    pub fn word_boundary_positions(&self) -> &BTreeSet<usize> {
        &self.word_boundary_positions
    }

    pub fn end_word(&self) -> Option<&str> {
        self.tokens.last().map(String::as_str)
    }
}

pub fn is_han(c: char) -> bool {
    matches!(c as u32,
        0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0x20000..=0x2FFFF | 0x30000..=0x3134F)
}

/// A syllabic unit of normalized text: a character for character-level
/// rules, a word for the English rule.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Unit {
    Pronounceable { text: String, syllables: usize },
    Unpronounceable(String),
}

impl LanguageProfile {
    /// Strips symbols and maps characters through the normalization table.
    ///
    /// Character-level profiles drop whitespace entirely; the English rule
    /// lowercases and keeps single spaces between words.
    pub fn normalize(&self, text: &str) -> String {
        let mapped = text
            .chars()
            .map(|c| self.normalize_map.get(&c).copied().unwrap_or(c));
        match self.rule {
            SyllableRule::HanCharacter | SyllableRule::PerCharacter => {
                mapped.filter(|c| c.is_alphanumeric()).collect()
            }
            SyllableRule::VowelGroup => {
                let spaced: String = mapped
                    .flat_map(char::to_lowercase)
                    .map(|c| if c.is_alphanumeric() || c == '\'' { c } else { ' ' })
                    .collect();
                spaced.split_whitespace().collect::<Vec<_>>().join(" ")
            }
        }
    }

    /// Splits normalized text into syllabic tokens (characters, or words
    /// for the English rule). Used for vocabulary building.
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let normalized = self.normalize(text);
        match self.rule {
            SyllableRule::VowelGroup => normalized.split_whitespace().map(str::to_string).collect(),
            _ => normalized.chars().map(String::from).collect(),
        }
    }

    fn units(&self, normalized: &str) -> Vec<Unit> {
        match self.rule {
            SyllableRule::HanCharacter => {
                let mut units = Vec::new();
                let mut run = String::new();
                for c in normalized.chars() {
                    if is_han(c) {
                        if !run.is_empty() {
                            units.push(Unit::Unpronounceable(std::mem::take(&mut run)));
                        }
                        units.push(Unit::Pronounceable {
                            text: c.to_string(),
                            syllables: 1,
                        });
                    } else {
                        run.push(c);
                    }
                }
                if !run.is_empty() {
                    units.push(Unit::Unpronounceable(run));
                }
                units
            }
            SyllableRule::PerCharacter => normalized
                .chars()
                .map(|c| Unit::Pronounceable {
                    text: c.to_string(),
                    syllables: 1,
                })
                .collect(),
            SyllableRule::VowelGroup => normalized
                .split_whitespace()
                .map(|w| match self.word_syllables(w) {
                    Some(n) => Unit::Pronounceable {
                        text: w.to_string(),
                        syllables: n,
                    },
                    None => Unit::Unpronounceable(w.to_string()),
                })
                .collect(),
        }
    }

    fn pronounceable_units(&self, text: &str) -> Result<Vec<(String, usize)>, PhonologyError> {
        let normalized = self.normalize(text);
        if normalized.is_empty() {
            return Err(PhonologyError::EmptyInput);
        }
        self.units(&normalized)
            .into_iter()
            .map(|u| match u {
                Unit::Pronounceable { text, syllables } => Ok((text, syllables)),
                Unit::Unpronounceable(t) => Err(PhonologyError::UnpronounceableToken(t)),
            })
            .collect()
    }

    /// Total number of syllables in `text`.
    pub fn count_syllables(&self, text: &str) -> Result<usize, PhonologyError> {
        Ok(self.pronounceable_units(text)?.iter().map(|(_, n)| n).sum())
    }

    /// Rhyme class of the final syllable of `word`.
    pub fn classify_rhyme(&self, word: &str) -> Result<RhymeClass, PhonologyError> {
        self.classify_rhyme_with(word, None)
    }

    /// Like [`classify_rhyme`](Self::classify_rhyme), consulting `hook` for
    /// the reading of the last character.
    pub fn classify_rhyme_with(
        &self,
        word: &str,
        hook: Option<&dyn PronunciationHook>,
    ) -> Result<RhymeClass, PhonologyError> {
        let normalized = self.normalize(word);
        let last = self.units(&normalized).pop().ok_or(PhonologyError::EmptyInput)?;
        let text = match &last {
            Unit::Pronounceable { text, .. } | Unit::Unpronounceable(text) => text,
        };
        let syllable = match self.rule {
            SyllableRule::VowelGroup => Some(text.clone()),
            _ => {
                let c = text.chars().next_back().expect("units are non-empty");
                let primary = self.reading(c);
                let index = normalized.chars().count() - 1;
                let hooked = hook.and_then(|h| h.resolve(&normalized, index, primary));
                match (hooked, primary, &last) {
                    (Some(r), _, _) => Some(r),
                    (None, Some(r), _) => Some(r.to_string()),
                    // Latin runs in a character-level profile are read as romanized syllables.
                    (None, None, Unit::Unpronounceable(run)) => Some(run.clone()),
                    (None, None, Unit::Pronounceable { .. }) if !is_han(c) => Some(c.to_string()),
                    (None, None, Unit::Pronounceable { .. }) => None,
                }
            }
        };
        Ok(syllable
            .and_then(|s| self.final_of_syllable(&s))
            .map_or(RhymeClass::Unknown, |f| self.class_of_final(&f)))
    }

    /// Maximum-forward-matching segmentation against the profile lexicon.
    pub fn segment_words(&self, text: &str) -> Result<SyllabifiedSentence, PhonologyError> {
        let units = self.pronounceable_units(text)?;
        if !self.rule.is_character_level() {
            let (tokens, syllables) = units.into_iter().unzip();
            return Ok(SyllabifiedSentence::new(tokens, syllables));
        }

        let mut tokens = Vec::new();
        let mut syllables = Vec::new();
        let mut i = 0;
        while i < units.len() {
            let longest = self.max_word_chars.min(units.len() - i);
            let mut taken = 1;
            for len in (2..=longest).rev() {
                let candidate: String = units[i..i + len].iter().map(|(t, _)| t.as_str()).collect();
                if self.lexicon.contains(&candidate) {
                    taken = len;
                    break;
                }
            }
            let word: String = units[i..i + taken].iter().map(|(t, _)| t.as_str()).collect();
            tokens.push(word);
            syllables.push(units[i..i + taken].iter().map(|(_, n)| n).sum());
            i += taken;
        }
        Ok(SyllabifiedSentence::new(tokens, syllables))
    }

    /// Empirical end-rhyme distribution of a corpus. Lines that are empty or
    /// whose end rhyme is unknown are left out of the denominator.
    pub fn rhyme_prior<I, S>(&self, lines: I) -> Result<RhymeDistribution, PhonologyError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let u = usize::from(self.class_count());
        let mut counts = vec![0u64; u];
        for line in lines {
            if let Ok(RhymeClass::Scheme(c)) = self.classify_rhyme(line.as_ref()) {
                counts[usize::from(c) - 1] += 1;
            }
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(PhonologyError::NoClassifiableLines);
        }
        let probs = counts.iter().map(|&n| n as f64 / total as f64).collect();
        Ok(RhymeDistribution::new(probs, 0.0).expect("counts normalize to one"))
    }
}
