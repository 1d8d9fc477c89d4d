//! Additively smoothed n-gram model conditioned on the prompt and on a
//! hashed bag of source words.
//!
//! Every training step is counted under a chain of context keys, from the
//! most specific (history, prompt view, source bucket) down to the empty
//! context. A query uses the most specific key that was seen in training,
//! so an unseen context is uniform over the emittable tokens.
//!
//! A reverse-order model mirrors the boundary prompt before building its
//! keys. Boundary positions then count from the end of the line, which is
//! where generation starts. It counts exactly what a normal-order model
//! counts when trained on reversed targets with mirrored boundaries.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::vocab::{BOS, EOS};
use super::{Direction, ModelError, SequenceModel, TokenId, Vocabulary};
use crate::phonology::LanguageProfile;
use crate::prompts::{render_prompt, ConstraintSet, PromptPlacement, PromptToken, RenderedPrompt};

const FORMAT: &str = "singable-ngram";
const VERSION: u32 = 1;

/// Junction marker for the line edges in the aligned prompt view.
pub const EDGE: TokenId = u32::MAX;

/// How the prompt enters the context key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptView {
    /// The rhyme token plus the boundary tokens on either side of the next
    /// syllable slot.
    Aligned,
    /// The whole prompt token sequence.
    Sequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NGramConfig {
    pub order: usize,
    pub alpha: f64,
    pub direction: Direction,
    pub view: PromptView,
    /// Number of source-bag hash buckets; 0 ignores the source.
    pub source_buckets: u32,
}

impl Default for NGramConfig {
    fn default() -> Self {
        Self {
            order: 2,
            alpha: 0.01,
            direction: Direction::Reverse,
            view: PromptView::Aligned,
            source_buckets: 1024,
        }
    }
}

impl NGramConfig {
    fn validate(&self) -> Result<(), ModelError> {
        if self.order == 0 {
            return Err(ModelError::InvalidConfig("order must be at least 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ModelError::InvalidConfig(format!("alpha {} must be positive", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackoffLevel {
    /// History, full prompt view and source bucket.
    Source,
    /// History and full prompt view.
    Prompt,
    /// History and the two boundary junctions (aligned view only).
    Junction,
    History,
    Empty,
}

/// `history` holds the last `order - 1` generated ids, BOS-padded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContextKey {
    pub level: BackoffLevel,
    pub history: Vec<TokenId>,
    pub view: Vec<TokenId>,
    pub source: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextCounts {
    pub total: u64,
    pub counts: BTreeMap<TokenId, u64>,
}

/// A parallel training pair with its target constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingPair {
    pub source: String,
    pub target: String,
    pub constraints: ConstraintSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    config: NGramConfig,
    vocabulary: Vocabulary,
    table: BTreeMap<ContextKey, ContextCounts>,
}

#[derive(Serialize)]
struct FileRef<'a> {
    format: &'a str,
    version: u32,
    config: &'a NGramConfig,
    vocabulary: &'a Vocabulary,
    table: Vec<(&'a ContextKey, &'a ContextCounts)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOwned {
    #[allow(dead_code)]
    format: String,
    #[allow(dead_code)]
    version: u32,
    config: NGramConfig,
    vocabulary: Vocabulary,
    table: Vec<(ContextKey, ContextCounts)>,
}

/// FNV-1a over the sorted, lowercased words of `source`.
fn source_bucket(source: &str, buckets: u32) -> Option<u32> {
    if buckets == 0 {
        return None;
    }
    let mut words: Vec<String> = source.split_whitespace().map(str::to_lowercase).collect();
    words.sort();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in &words {
        for b in w.bytes().chain([0xff]) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    Some((h % u64::from(buckets)) as u32)
}

impl NGramModel {
    /// Builds the vocabulary from the targets and counts every pair.
    /// Targets are given in text order and reversed here for a
    /// reverse-order model.
    pub fn train(
        pairs: &[TrainingPair],
        profile: &LanguageProfile,
        config: NGramConfig,
    ) -> Result<Self, ModelError> {
        if pairs.is_empty() {
            return Err(ModelError::EmptyCorpus);
        }
        let vocabulary = Vocabulary::from_corpus(profile, pairs.iter().map(|p| p.target.as_str()))?;
        let direction = config.direction;
        let encoded = pairs
            .iter()
            .map(|p| {
                let ids = vocabulary.encode_text(profile, &p.target, direction)?;
                Ok((p.source.clone(), ids, p.constraints.clone()))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Self::train_tokens(vocabulary, encoded, config)
    }

    /// Counts examples whose target ids are already in generation order.
    pub fn train_tokens<I>(vocabulary: Vocabulary, examples: I, config: NGramConfig) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (String, Vec<TokenId>, ConstraintSet)>,
    {
        config.validate()?;
        let mut model = Self {
            config,
            vocabulary,
            table: BTreeMap::new(),
        };
        let mut seen = 0usize;
        for (source, ids, constraints) in examples {
            if let Some(&bad) = ids.iter().find(|&&id| !model.vocabulary.is_content(id)) {
                return Err(ModelError::InvalidPrefixToken(bad));
            }
            model.count(&source, &ids, &constraints);
            seen += 1;
        }
        if seen == 0 {
            return Err(ModelError::EmptyCorpus);
        }
        Ok(model)
    }

    fn count(&mut self, source: &str, ids: &[TokenId], constraints: &ConstraintSet) {
        let bucket = source_bucket(source, self.config.source_buckets);
        let effective = self.effective(constraints);
        for i in 0..=ids.len() {
            let next = ids.get(i).copied().unwrap_or(EOS);
            for key in self.context_keys(bucket, &effective, &ids[..i]) {
                let entry = self.table.entry(key).or_default();
                entry.total += 1;
                *entry.counts.entry(next).or_insert(0) += 1;
            }
        }
    }

    fn effective(&self, constraints: &ConstraintSet) -> ConstraintSet {
        match self.config.direction {
            Direction::Normal => constraints.clone(),
            Direction::Reverse => constraints.mirrored(),
        }
    }

    fn context_keys(&self, bucket: Option<u32>, c: &ConstraintSet, prefix: &[TokenId]) -> Vec<ContextKey> {
        let n = self.config.order - 1;
        let mut history: Vec<TokenId> = vec![BOS; n.saturating_sub(prefix.len())];
        history.extend_from_slice(&prefix[prefix.len().saturating_sub(n)..]);

        let v = &self.vocabulary;
        let (full, junction) = match self.config.view {
            PromptView::Aligned => {
                let s: usize = prefix.iter().map(|&id| v.syllables(id)).sum();
                let l = c.length();
                let bdr = |p: usize| v.prompt_id(PromptToken::Bdr(c.requires_boundary(p)));
                let prev = if s == 0 || s >= l { EDGE } else { bdr(s) };
                let next = if s + 1 >= l { EDGE } else { bdr(s + 1) };
                let rhy = v.prompt_id(PromptToken::Rhy(c.rhyme().index().unwrap_or(0)));
                (vec![rhy, prev, next], Some(vec![prev, next]))
            }
            PromptView::Sequence => {
                let rendered = render_prompt(c, PromptPlacement::DecoderPrefix);
                let ids = rendered.sequence().tokens().iter().map(|&t| v.prompt_id(t)).collect();
                (ids, None)
            }
        };

        let key = |level, history: &[TokenId], view: &[TokenId], source| ContextKey {
            level,
            history: history.to_vec(),
            view: view.to_vec(),
            source,
        };
        let mut keys = Vec::with_capacity(5);
        if bucket.is_some() {
            keys.push(key(BackoffLevel::Source, &history, &full, bucket));
        }
        keys.push(key(BackoffLevel::Prompt, &history, &full, None));
        if let Some(j) = junction {
            keys.push(key(BackoffLevel::Junction, &history, &j, None));
        }
        keys.push(key(BackoffLevel::History, &history, &[], None));
        if n > 0 {
            keys.push(key(BackoffLevel::Empty, &[], &[], None));
        }
        keys
    }

    fn distribution(&self, keys: &[ContextKey]) -> Vec<f64> {
        let v = &self.vocabulary;
        let empty = ContextCounts::default();
        let counts = keys
            .iter()
            .find_map(|k| self.table.get(k).filter(|c| c.total > 0))
            .unwrap_or(&empty);
        let alpha = self.config.alpha;
        let denom = counts.total as f64 + alpha * v.emittable_count() as f64;
        (0..v.len() as TokenId)
            .map(|id| {
                if v.is_emittable(id) {
                    (counts.counts.get(&id).copied().unwrap_or(0) as f64 + alpha) / denom
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn config(&self) -> &NGramConfig {
        &self.config
    }

    /// Raw count table.
    pub fn counts(&self) -> &BTreeMap<ContextKey, ContextCounts> {
        &self.table
    }

    /// Canonical serialization of the count table alone.
    pub fn table_bytes(&self) -> Vec<u8> {
        let entries: Vec<_> = self.table.iter().collect();
        serde_json::to_vec(&entries).expect("count tables serialize")
    }

    pub fn source_bucket(&self, source: &str) -> Option<u32> {
        source_bucket(source, self.config.source_buckets)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let file = FileRef {
            format: FORMAT,
            version: VERSION,
            config: &self.config,
            vocabulary: &self.vocabulary,
            table: self.table.iter().collect(),
        };
        serde_json::to_vec(&file).expect("models serialize")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| ModelError::CorruptFile(e.to_string()))?;
        if value.get("format").and_then(|f| f.as_str()) != Some(FORMAT) {
            return Err(ModelError::CorruptFile("not a singable n-gram model".into()));
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(VERSION) => {}
            other => {
                return Err(ModelError::VersionMismatch {
                    found: other.map_or_else(|| "none".to_string(), |v| v.to_string()),
                    expected: VERSION,
                })
            }
        }
        let file: FileOwned =
            serde_json::from_value(value).map_err(|e| ModelError::CorruptFile(e.to_string()))?;
        file.config.validate()?;
        let mut table = BTreeMap::new();
        for (key, counts) in file.table {
            if counts.counts.values().sum::<u64>() != counts.total {
                return Err(ModelError::CorruptFile("context total does not match its counts".into()));
            }
            if table.insert(key, counts).is_some() {
                return Err(ModelError::CorruptFile("duplicate context".into()));
            }
        }
        Ok(Self {
            config: file.config,
            vocabulary: file.vocabulary,
            table,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        std::fs::write(path, self.to_bytes()).map_err(|e| ModelError::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let bytes = std::fs::read(path).map_err(|e| ModelError::Io(e.to_string()))?;
        Self::from_bytes(&bytes)
    }
}

impl SequenceModel for NGramModel {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    fn direction(&self) -> Direction {
        self.config.direction
    }

    fn supports(&self, placement: PromptPlacement) -> bool {
        placement != PromptPlacement::DecoderEmbedding
    }

    fn next_distribution(
        &self,
        source: &str,
        prompt: &RenderedPrompt,
        prefix: &[TokenId],
        direction: Direction,
    ) -> Result<Vec<f64>, ModelError> {
        if !self.supports(prompt.placement()) {
            return Err(ModelError::UnsupportedPlacement(prompt.placement()));
        }
        if direction != self.config.direction {
            return Err(ModelError::DirectionMismatch {
                model: self.config.direction,
                requested: direction,
            });
        }
        if let Some(&bad) = prefix.iter().find(|&&id| !self.vocabulary.is_content(id)) {
            return Err(ModelError::InvalidPrefixToken(bad));
        }
        let bucket = self.source_bucket(source);
        let effective = self.effective(prompt.constraints());
        Ok(self.distribution(&self.context_keys(bucket, &effective, prefix)))
    }
}
