//! Length accuracy, rhyme accuracy, boundary recall, TER and a
//! character-level BLEU.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;

use crate::phonology::{LanguageProfile, RhymeClass};
use crate::prompts::ConstraintSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("no record counts toward this metric")]
    EmptySet,
    #[error("no record requires a word boundary")]
    NoRequiredBoundaries,
    #[error("record {0} has no constraints")]
    MissingConstraints(usize),
    #[error("record {0} has no reference")]
    MissingReference(usize),
    #[error("reference is empty")]
    EmptyReference,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalRecord {
    pub hypothesis: String,
    pub reference: Option<String>,
    pub constraints: Option<ConstraintSet>,
}

/// An exact count ratio, kept unreduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    pub hits: u64,
    pub total: u64,
}

impl Fraction {
    pub fn value(self) -> f64 {
        self.hits as f64 / self.total as f64
    }

    pub fn ratio(self) -> Ratio<u64> {
        Ratio::new(self.hits, self.total)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.hits, self.total)
    }
}

fn constraints_of(records: &[EvalRecord]) -> Result<Vec<(&str, &ConstraintSet)>, MetricsError> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.constraints
                .as_ref()
                .map(|c| (r.hypothesis.as_str(), c))
                .ok_or(MetricsError::MissingConstraints(i))
        })
        .collect()
}

/// Share of hypotheses whose syllable count equals the constraint length.
/// A hypothesis that cannot be syllabified counts as a miss.
pub fn length_accuracy(records: &[EvalRecord], profile: &LanguageProfile) -> Result<Fraction, MetricsError> {
    let pairs = constraints_of(records)?;
    if pairs.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let hits = pairs
        .iter()
        .filter(|(h, c)| profile.count_syllables(h).is_ok_and(|n| n == c.length()))
        .count();
    Ok(Fraction { hits: hits as u64, total: pairs.len() as u64 })
}

/// Share of rhyme-constrained records whose end rhyme matches. Records
/// with the null rhyme are left out.
pub fn rhyme_accuracy(records: &[EvalRecord], profile: &LanguageProfile) -> Result<Fraction, MetricsError> {
    let pairs = constraints_of(records)?;
    let constrained: Vec<_> = pairs.iter().filter(|(_, c)| c.rhyme() != RhymeClass::Null).collect();
    if constrained.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let hits = constrained
        .iter()
        .filter(|(h, c)| profile.classify_rhyme(h).is_ok_and(|r| r == c.rhyme()))
        .count();
    Ok(Fraction { hits: hits as u64, total: constrained.len() as u64 })
}

/// Required boundaries found in the hypotheses over all required
/// boundaries, pooled across records.
pub fn boundary_recall(records: &[EvalRecord], profile: &LanguageProfile) -> Result<Fraction, MetricsError> {
    let pairs = constraints_of(records)?;
    let mut hits = 0u64;
    let mut total = 0u64;
    for (h, c) in pairs {
        let found = profile.segment_words(h).ok();
        for p in c.required_boundaries() {
            total += 1;
            if found.as_ref().is_some_and(|s| s.word_boundary_positions().contains(&p)) {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(MetricsError::NoRequiredBoundaries);
    }
    Ok(Fraction { hits, total })
}

fn levenshtein(a: &[char], b: &[char]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let next = (diag + usize::from(ca != cb)).min(row[j] + 1).min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

/// Character edit distance (no shifts) over reference length.
pub fn ter(hypothesis: &str, reference: &str) -> Result<f64, MetricsError> {
    let (edits, len) = ter_counts(hypothesis, reference);
    if len == 0 {
        return Err(MetricsError::EmptyReference);
    }
    Ok(edits as f64 / len as f64)
}

fn ter_counts(hypothesis: &str, reference: &str) -> (usize, usize) {
    let h: Vec<char> = hypothesis.chars().collect();
    let r: Vec<char> = reference.chars().collect();
    (levenshtein(&h, &r), r.len())
}

/// Pooled edits over pooled reference length.
pub fn corpus_ter<'a, I>(pairs: I) -> Result<f64, MetricsError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let (edits, len) = pairs
        .into_iter()
        .map(|(h, r)| ter_counts(h, r))
        .fold((0, 0), |(e, l), (de, dl)| (e + de, l + dl));
    if len == 0 {
        return Err(MetricsError::EmptyReference);
    }
    Ok(edits as f64 / len as f64)
}

pub const BLEU_MAX_N: usize = 4;

/// Clipped matches and hypothesis n-gram counts for n = 1..=max_n, plus
/// hypothesis and reference lengths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn new(hypothesis: &str, reference: &str, max_n: usize) -> Self {
        let h: Vec<char> = hypothesis.chars().collect();
        let r: Vec<char> = reference.chars().collect();
        let mut matches = vec![0; max_n];
        let mut totals = vec![0; max_n];
        for n in 1..=max_n {
            let mut ref_counts: HashMap<&[char], u64> = HashMap::new();
            for g in r.windows(n) {
                *ref_counts.entry(g).or_insert(0) += 1;
            }
            for g in h.windows(n) {
                totals[n - 1] += 1;
                if let Some(c) = ref_counts.get_mut(g) {
                    if *c > 0 {
                        *c -= 1;
                        matches[n - 1] += 1;
                    }
                }
            }
        }
        Self { matches, totals, hyp_len: h.len() as u64, ref_len: r.len() as u64 }
    }

    pub fn add(&mut self, other: &BleuStats) {
        if self.matches.is_empty() {
            self.matches = vec![0; other.matches.len()];
            self.totals = vec![0; other.totals.len()];
        }
        for i in 0..other.matches.len() {
            self.matches[i] += other.matches[i];
            self.totals[i] += other.totals[i];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    /// Geometric mean of n-gram precisions times the brevity penalty.
    /// Unigram precision is unsmoothed; higher orders use add-one
    /// smoothing, so short identical lines score 1 and lines with no
    /// common character score 0.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches.is_empty() || self.matches[0] == 0 {
            return 0.0;
        }
        let n = self.matches.len() as f64;
        let log_sum: f64 = self
            .matches
            .iter()
            .zip(&self.totals)
            .enumerate()
            .map(|(i, (&m, &t))| {
                let p = if i == 0 { m as f64 / t as f64 } else { (m as f64 + 1.0) / (t as f64 + 1.0) };
                p.ln()
            })
            .sum();
        let bp = if self.hyp_len >= self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        };
        bp * (log_sum / n).exp()
    }
}

pub fn bleu(hypothesis: &str, reference: &str, max_n: usize) -> f64 {
    BleuStats::new(hypothesis, reference, max_n).score()
}

pub fn corpus_bleu<'a, I>(pairs: I, max_n: usize) -> f64
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut total = BleuStats::default();
    for (h, r) in pairs {
        total.add(&BleuStats::new(h, r, max_n));
    }
    total.score()
}

/// All five scores for a record set; entries are `None` when the metric
/// has nothing to measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub length_accuracy: Option<Fraction>,
    pub rhyme_accuracy: Option<Fraction>,
    pub boundary_recall: Option<Fraction>,
    pub ter: Option<f64>,
    pub bleu: Option<f64>,
}

/// Text metrics run on profile-normalized hypotheses and references.
pub fn evaluate(records: &[EvalRecord], profile: &LanguageProfile) -> Result<EvalReport, MetricsError> {
    let has_constraints = records.iter().any(|r| r.constraints.is_some());
    let has_refs = records.iter().any(|r| r.reference.is_some());
    let soft = |r: Result<Fraction, MetricsError>| match r {
        Ok(f) => Ok(Some(f)),
        Err(MetricsError::EmptySet | MetricsError::NoRequiredBoundaries) => Ok(None),
        Err(e) => Err(e),
    };
    let (la, ra, br) = if has_constraints {
        (
            soft(length_accuracy(records, profile))?,
            soft(rhyme_accuracy(records, profile))?,
            soft(boundary_recall(records, profile))?,
        )
    } else {
        (None, None, None)
    };
    let (ter_score, bleu_score) = if has_refs {
        let normalized = records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let reference = r.reference.as_deref().ok_or(MetricsError::MissingReference(i))?;
                Ok((profile.normalize(&r.hypothesis), profile.normalize(reference)))
            })
            .collect::<Result<Vec<_>, MetricsError>>()?;
        let pairs = || normalized.iter().map(|(h, r)| (h.as_str(), r.as_str()));
        (Some(corpus_ter(pairs())?), Some(corpus_bleu(pairs(), BLEU_MAX_N)))
    } else {
        (None, None)
    };
    Ok(EvalReport {
        length_accuracy: la,
        rhyme_accuracy: ra,
        boundary_recall: br,
        ter: ter_score,
        bleu: bleu_score,
    })
}
