//! Corpus preparation: normalization, training-example generation, span
//! corruption for denoising, and a back-translation hook.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::process::{Command, Stdio};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::model::{Direction, ModelError, NGramConfig, NGramModel, Vocabulary};
use crate::phonology::LanguageProfile;
use crate::prompts::{
    self, constraints_from_target, render_prompt, ConstraintSet, PromptError, PromptPlacement, PromptSequence,
    MAX_LENGTH,
};

pub mod synthetic;

pub const MASK: &str = "<mask>";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataprepError {
    #[error("line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("external command failed on batch {batch}: {reason}")]
    ExternalCommandFailed { batch: usize, reason: String },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Normalizes every line, then drops empty lines, lines over the length
/// limit and exact duplicates (first occurrence wins).
pub fn normalize_corpus<I, S>(lines: I, profile: &LanguageProfile) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut seen = HashSet::new();
    lines
        .into_iter()
        .map(|l| profile.normalize(l.as_ref()))
        .filter(|l| !l.is_empty() && l.chars().count() <= MAX_LENGTH)
        .filter(|l| seen.insert(l.clone()))
        .collect()
}

/// Normalizes parallel pairs; the filters apply to the target side and
/// duplicates are whole pairs.
pub fn normalize_pairs(
    pairs: &[(String, String)],
    source_profile: &LanguageProfile,
    target_profile: &LanguageProfile,
) -> Vec<(String, String)> {
    let mut seen = HashSet::new();
    pairs
        .iter()
        .map(|(s, t)| (source_profile.normalize(s), target_profile.normalize(t)))
        .filter(|(s, t)| !s.is_empty() && !t.is_empty() && t.chars().count() <= MAX_LENGTH)
        .filter(|p| seen.insert(p.clone()))
        .collect()
}

/// Reads tab-separated `source<TAB>target` pairs. Blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, DataprepError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| match l.split_once('\t') {
            Some((s, t)) if !t.contains('\t') => Ok((s.to_string(), t.to_string())),
            _ => Err(DataprepError::MalformedRecord {
                line: i + 1,
                reason: "expected exactly one tab".into(),
            }),
        })
        .collect()
}

/// Pairs two aligned files line by line.
pub fn zip_aligned(sources: &str, targets: &str) -> Result<Vec<(String, String)>, DataprepError> {
    let s: Vec<&str> = sources.lines().collect();
    let t: Vec<&str> = targets.lines().collect();
    if s.len() != t.len() {
        return Err(DataprepError::MalformedRecord {
            line: s.len().min(t.len()) + 1,
            reason: format!("{} source lines but {} target lines", s.len(), t.len()),
        });
    }
    Ok(s.into_iter().zip(t).map(|(a, b)| (a.to_string(), b.to_string())).collect())
}

/// One model-ready example. `target` holds tokens in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub source: String,
    pub target: Vec<String>,
    pub constraints: ConstraintSet,
    pub prompt: PromptSequence,
    pub placement: PromptPlacement,
    pub direction: Direction,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExampleRecord {
    source: String,
    target: Vec<String>,
    constraints: String,
    prompt: String,
    placement: PromptPlacement,
    direction: Direction,
}

impl TrainingExample {
    /// Target tokens in reading order.
    pub fn reading_order(&self) -> Vec<String> {
        let mut t = self.target.clone();
        if self.direction == Direction::Reverse {
            t.reverse();
        }
        t
    }

    pub fn to_json(&self) -> String {
        let record = ExampleRecord {
            source: self.source.clone(),
            target: self.target.clone(),
            constraints: self.constraints.to_string(),
            prompt: self.prompt.to_string(),
            placement: self.placement,
            direction: self.direction,
        };
        serde_json::to_string(&record).expect("plain record")
    }

    /// Parses one JSON record and checks that the prompt agrees with the
    /// constraint line.
    pub fn from_json(line: &str) -> Result<Self, String> {
        let r: ExampleRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let constraints: ConstraintSet = r.constraints.parse().map_err(|e: PromptError| e.to_string())?;
        let prompt: PromptSequence = r.prompt.parse().map_err(|e: PromptError| e.to_string())?;
        if prompt.to_constraints().map_err(|e| e.to_string())? != constraints {
            return Err("prompt does not match constraints".into());
        }
        Ok(Self {
            source: r.source,
            target: r.target,
            constraints,
            prompt,
            placement: r.placement,
            direction: r.direction,
        })
    }
}

impl fmt::Display for TrainingExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

/// Reads JSON-lines training examples.
pub fn parse_examples(text: &str) -> Result<Vec<TrainingExample>, DataprepError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            TrainingExample::from_json(l).map_err(|reason| DataprepError::MalformedRecord { line: i + 1, reason })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSet {
    pub examples: Vec<TrainingExample>,
    /// Pairs left out because the target was too long, unpronounceable or
    /// had no classifiable rhyme.
    pub skipped: usize,
}

/// Turns parallel pairs into training examples. Each pair draws its
/// boundary prompt and then its rhyme nullification from `rng`, in input
/// order.
pub fn make_training_set<R: Rng + ?Sized>(
    pairs: &[(String, String)],
    profile: &LanguageProfile,
    placement: PromptPlacement,
    direction: Direction,
    null_rhyme_rate: f64,
    rng: &mut R,
) -> Result<TrainingSet, DataprepError> {
    if !(0.0..=1.0).contains(&null_rhyme_rate) {
        return Err(PromptError::InvalidRate(null_rhyme_rate).into());
    }
    let mut set = TrainingSet::default();
    for (source, target) in pairs {
        let constraints = match constraints_from_target(target, profile, rng) {
            Ok(c) => prompts::nullify_one(c, null_rhyme_rate, rng),
            Err(e) => {
                log::debug!("skipping {target:?}: {e}");
                set.skipped += 1;
                continue;
            }
        };
        let mut tokens = profile.tokens(target);
        if direction == Direction::Reverse {
            tokens.reverse();
        }
        set.examples.push(TrainingExample {
            source: source.clone(),
            target: tokens,
            prompt: render_prompt(&constraints, placement).sequence().clone(),
            constraints,
            placement,
            direction,
        });
    }
    Ok(set)
}

/// Fits an n-gram model on prepared examples. The examples must all be in
/// the configured direction.
pub fn train_ngram(
    examples: &[TrainingExample],
    profile: &LanguageProfile,
    config: NGramConfig,
) -> Result<NGramModel, DataprepError> {
    if let Some(e) = examples.iter().find(|e| e.direction != config.direction) {
        return Err(ModelError::DirectionMismatch {
            model: config.direction,
            requested: e.direction,
        }
        .into());
    }
    let vocab = Vocabulary::from_tokens(profile, examples.iter().flat_map(|e| e.target.iter().cloned()))?;
    let encoded = examples
        .iter()
        .map(|e| Ok((e.source.clone(), vocab.encode(&e.target)?, e.constraints.clone())))
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok(NGramModel::train_tokens(vocab, encoded, config)?)
}

/// A corrupted line with the original kept alongside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptedLine {
    pub corrupted: String,
    pub original: String,
}

/// Span length before clamping: Poisson(1) for lines of 2 or 3 tokens,
/// Poisson(3) for longer lines, 0 for shorter ones.
pub fn sample_span<R: Rng + ?Sized>(length: usize, rng: &mut R) -> usize {
    let lambda = match length {
        0 | 1 => return 0,
        2 | 3 => 1.0,
        _ => 3.0,
    };
    Poisson::new(lambda).expect("positive rate").sample(rng) as usize
}

/// Replaces `span` tokens starting at `start` with one mask token.
pub fn mask_span(tokens: &[String], start: usize, span: usize) -> Vec<String> {
    let mut out = tokens[..start].to_vec();
    out.push(MASK.to_string());
    out.extend_from_slice(&tokens[start + span..]);
    out
}

/// Masks one span of the line's tokens. Lines of a single token come back
/// unchanged.
pub fn corrupt_for_denoising<R: Rng + ?Sized>(line: &str, profile: &LanguageProfile, rng: &mut R) -> CorruptedLine {
    let tokens = profile.tokens(line);
    let original = tokens.join(joiner(profile));
    if tokens.len() < 2 {
        return CorruptedLine {
            corrupted: original.clone(),
            original,
        };
    }
    let span = sample_span(tokens.len(), rng).min(tokens.len());
    let start = rng.random_range(0..=tokens.len() - span);
    CorruptedLine {
        corrupted: mask_span(&tokens, start, span).join(joiner(profile)),
        original,
    }
}

fn joiner(profile: &LanguageProfile) -> &'static str {
    if profile.syllable_rule().is_character_level() {
        ""
    } else {
        " "
    }
}

/// A training pair whose source may come from a reverse translator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticPair {
    pub source: String,
    pub target: String,
    pub synthetic: bool,
}

/// Feeds target lines to `command` (run through `sh -c`) in batches, one
/// line per input line, and pairs each output line with its target.
pub fn backtranslate(lines: &[String], command: &str, batch_size: usize) -> Result<Vec<SyntheticPair>, DataprepError> {
    let mut out = Vec::with_capacity(lines.len());
    for (batch, chunk) in lines.chunks(batch_size.max(1)).enumerate() {
        let fail = |reason: String| DataprepError::ExternalCommandFailed { batch, reason };
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| fail(e.to_string()))?;
        let mut input = chunk.join("\n");
        input.push('\n');
        let mut stdin = child.stdin.take().expect("piped stdin");
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let output = child.wait_with_output().map_err(|e| fail(e.to_string()))?;
        // a command that exits without reading gives a broken pipe here,
        // which only matters if it also produced the wrong output
        let _ = writer.join();
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(fail(format!("{}: {}", output.status, stderr.trim())));
        }
        let text = String::from_utf8(output.stdout).map_err(|e| fail(e.to_string()))?;
        let translated: Vec<&str> = text.lines().collect();
        if translated.len() != chunk.len() {
            return Err(fail(format!("expected {} lines, got {}", chunk.len(), translated.len())));
        }
        out.extend(chunk.iter().zip(translated).map(|(t, s)| SyntheticPair {
            source: s.to_string(),
            target: t.clone(),
            synthetic: true,
        }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
