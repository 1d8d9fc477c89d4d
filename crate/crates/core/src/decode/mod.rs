//! Constrained beam search in normal or reverse order, and an exhaustive
//! decoder for small models that shares the same expansion rules.
//!
//! In prompt mode the constraints reach the model only through the
//! rendered prompt, and a hypothesis score is its log-probability. Biased
//! mode adds constant bonuses for the target rhyme at the end-word slot
//! and for word boundaries at required positions. `hard_length` works in
//! either mode: EOS is allowed only at exactly the target syllable count,
//! and hypotheses that can no longer reach it are dropped.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::model::{Direction, ModelError, SequenceModel, TokenId, Vocabulary, EOS};
use crate::phonology::RhymeClass;
use crate::prompts::{render_prompt, ConstraintSet, PromptPlacement, RenderedPrompt};

mod brute;
mod judge;

pub use brute::{brute_force_decode, MAX_BRUTE_FORCE_LEN, MAX_BRUTE_FORCE_VOCAB};
pub use judge::{BoundaryJudge, LexiconJudge, TokenJudge};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no hypothesis can satisfy the constraints")]
    NoCompletableHypothesis,
    #[error("{emittable} emittable tokens with max length {max_len} is too large to enumerate")]
    SearchSpaceTooLarge { emittable: usize, max_len: usize },
    #[error("invalid decoding configuration: {0}")]
    InvalidConfig(String),
    #[error("hypothesis does not end with EOS")]
    UnfinishedHypothesis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    Prompt,
    Biased,
}

#[derive(Debug, Clone)]
pub struct DecodeConfig {
    pub beam_size: usize,
    /// Longest hypothesis in tokens, EOS included.
    pub max_len: usize,
    pub direction: Direction,
    pub control_mode: ControlMode,
    pub hard_length: bool,
    pub rhyme_bonus: f64,
    pub boundary_bonus: f64,
    /// Decides whether a partial line has a word boundary at a position.
    /// Needed for the boundary bonus and for boundary bookkeeping.
    pub judge: Option<Arc<dyn BoundaryJudge>>,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            beam_size: 5,
            max_len: 30,
            direction: Direction::Normal,
            control_mode: ControlMode::Prompt,
            hard_length: false,
            rhyme_bonus: 0.0,
            boundary_bonus: 0.0,
            judge: None,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<(), DecodeError> {
        let bad = |m: &str| Err(DecodeError::InvalidConfig(m.to_string()));
        if self.beam_size == 0 {
            return bad("beam size must be at least 1");
        }
        if self.max_len < 2 {
            return bad("max length must leave room for a token and EOS");
        }
        if !(self.rhyme_bonus.is_finite() && self.boundary_bonus.is_finite()) {
            return bad("bonuses must be finite");
        }
        if self.control_mode == ControlMode::Biased
            && self.rhyme_bonus == 0.0
            && self.boundary_bonus == 0.0
            && !self.hard_length
        {
            return bad("biased mode needs a nonzero bonus or hard length");
        }
        if self.control_mode == ControlMode::Biased && self.boundary_bonus != 0.0 && self.judge.is_none() {
            return bad("a boundary bonus needs a boundary judge");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// Generation-order ids, ending with EOS once finished.
    pub tokens: Vec<TokenId>,
    pub logprob: f64,
    /// `logprob` plus any biased-mode bonuses.
    pub score: f64,
    pub syllables_used: usize,
    /// Required boundary positions (text order) found in the output.
    pub boundary_trace: BTreeSet<usize>,
    pub finished: bool,
}

impl Hypothesis {
    fn root() -> Self {
        Self {
            tokens: Vec::new(),
            logprob: 0.0,
            score: 0.0,
            syllables_used: 0,
            boundary_trace: BTreeSet::new(),
            finished: false,
        }
    }

    /// Content ids, without the final EOS.
    pub fn content(&self) -> &[TokenId] {
        match self.tokens.split_last() {
            Some((&EOS, rest)) => rest,
            _ => &self.tokens,
        }
    }
}

/// Best-first order: higher score, then lexicographically smaller ids.
pub fn rank_order(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.tokens.cmp(&b.tokens))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Satisfied {
    pub length: bool,
    /// `None` when the rhyme is unconstrained.
    pub rhyme: Option<bool>,
    /// `None` when no boundary is required or no judge was configured.
    pub boundary: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub candidates: Vec<Hypothesis>,
    pub best_text: String,
    pub satisfied: Satisfied,
}

impl fmt::Display for DecodeResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.best_text)
    }
}

/// Joins content ids in text order.
pub fn join_tokens(vocab: &Vocabulary, ids: &[TokenId], direction: Direction) -> String {
    let mut words: Vec<&str> = ids
        .iter()
        .filter_map(|&id| vocab.entry(id).map(|e| e.text.as_str()))
        .collect();
    if direction == Direction::Reverse {
        words.reverse();
    }
    words.join(vocab.joiner())
}

/// Text of a finished hypothesis, special tokens stripped.
pub fn detokenize(vocab: &Vocabulary, hypothesis: &Hypothesis, direction: Direction) -> Result<String, DecodeError> {
    if !hypothesis.finished || hypothesis.tokens.last() != Some(&EOS) {
        return Err(DecodeError::UnfinishedHypothesis);
    }
    Ok(join_tokens(vocab, hypothesis.content(), direction))
}

/// Shared per-call state for beam and exhaustive search.
pub(crate) struct Search<'a> {
    model: &'a dyn SequenceModel,
    source: &'a str,
    prompt: RenderedPrompt,
    constraints: &'a ConstraintSet,
    config: &'a DecodeConfig,
    max_syllables: usize,
}

impl<'a> Search<'a> {
    pub(crate) fn new(
        model: &'a dyn SequenceModel,
        source: &'a str,
        constraints: &'a ConstraintSet,
        placement: PromptPlacement,
        config: &'a DecodeConfig,
    ) -> Result<Self, DecodeError> {
        config.validate()?;
        if !model.supports(placement) {
            return Err(ModelError::UnsupportedPlacement(placement).into());
        }
        Ok(Self {
            model,
            source,
            prompt: render_prompt(constraints, placement),
            constraints,
            config,
            max_syllables: model.vocabulary().max_token_syllables(),
        })
    }

    pub(crate) fn root(&self) -> Hypothesis {
        Hypothesis::root()
    }

    fn biased(&self) -> bool {
        self.config.control_mode == ControlMode::Biased
    }

    /// Text-order tokens and syllable weights of a generation-order prefix.
    fn text_tokens(&self, prefix: &[TokenId]) -> (Vec<String>, Vec<usize>) {
        let vocab = self.model.vocabulary();
        let mut pairs: Vec<(String, usize)> = prefix
            .iter()
            .filter_map(|&id| vocab.entry(id).map(|e| (e.text.clone(), e.syllables)))
            .collect();
        if self.config.direction == Direction::Reverse {
            pairs.reverse();
        }
        pairs.into_iter().unzip()
    }

    /// Required junctions completed by growing from `old_s` to `new_s`
    /// syllables, as (text position, position within the partial text).
    fn formed_junctions(&self, old_s: usize, new_s: usize) -> Vec<(usize, usize)> {
        let l = self.constraints.length();
        if new_s > l {
            return Vec::new();
        }
        (old_s.max(1)..new_s)
            .filter(|&g| g < l)
            .filter_map(|g| {
                let (text_pos, local) = match self.config.direction {
                    Direction::Normal => (g, g),
                    Direction::Reverse => (l - g, new_s - g),
                };
                self.constraints.requires_boundary(text_pos).then_some((text_pos, local))
            })
            .collect()
    }

    /// Every extension of `hyp` allowed by the length rules.
    pub(crate) fn expand(&self, hyp: &Hypothesis) -> Result<Vec<Hypothesis>, DecodeError> {
        let vocab = self.model.vocabulary();
        let dist = self
            .model
            .next_distribution(self.source, &self.prompt, &hyp.tokens, self.config.direction)?;
        let l = self.constraints.length();
        let content_len = hyp.tokens.len();
        let max_content = self.config.max_len - 1;
        let target_rhyme = self.constraints.rhyme();

        let mut out = Vec::new();
        for (id, &p) in dist.iter().enumerate() {
            let id = id as TokenId;
            if p <= 0.0 || !vocab.is_emittable(id) {
                continue;
            }
            if id == EOS {
                if content_len == 0 || (self.config.hard_length && hyp.syllables_used != l) {
                    continue;
                }
                let mut next = hyp.clone();
                next.tokens.push(EOS);
                next.logprob += p.ln();
                next.score += p.ln();
                next.finished = true;
                out.push(next);
                continue;
            }
            if content_len + 1 > max_content {
                continue;
            }
            let new_s = hyp.syllables_used + vocab.syllables(id);
            if self.config.hard_length {
                if new_s > l {
                    continue;
                }
                let slots_left = max_content - (content_len + 1);
                if l - new_s > slots_left * self.max_syllables {
                    continue;
                }
            }

            let mut next = hyp.clone();
            next.tokens.push(id);
            next.syllables_used = new_s;
            let lp = p.ln();
            next.logprob += lp;
            let mut bonus = 0.0;

            if self.biased() && self.config.rhyme_bonus != 0.0 && target_rhyme != RhymeClass::Null {
                let end_slot = match self.config.direction {
                    Direction::Reverse => content_len == 0,
                    Direction::Normal => new_s == l,
                };
                if end_slot && vocab.rhyme(id) == target_rhyme {
                    bonus += self.config.rhyme_bonus;
                }
            }

            if let Some(judge) = &self.config.judge {
                let formed = self.formed_junctions(hyp.syllables_used, new_s);
                if !formed.is_empty() {
                    let (text, weights) = self.text_tokens(&next.tokens);
                    for (text_pos, local) in formed {
                        if judge.has_boundary(&text, &weights, local) {
                            next.boundary_trace.insert(text_pos);
                            if self.biased() {
                                bonus += self.config.boundary_bonus;
                            }
                        }
                    }
                }
            }

            next.score += lp + bonus;
            out.push(next);
        }
        Ok(out)
    }

    pub(crate) fn finish(&self, mut pool: Vec<Hypothesis>) -> Result<DecodeResult, DecodeError> {
        pool.sort_by(rank_order);
        pool.truncate(self.config.beam_size);
        let best = pool.first().ok_or(DecodeError::NoCompletableHypothesis)?;
        let vocab = self.model.vocabulary();
        let best_text = detokenize(vocab, best, self.config.direction)?;

        let content = best.content();
        let end_token = match self.config.direction {
            Direction::Normal => content.last(),
            Direction::Reverse => content.first(),
        };
        let rhyme = match self.constraints.rhyme() {
            RhymeClass::Null => None,
            r => Some(end_token.is_some_and(|&id| vocab.rhyme(id) == r)),
        };
        let required: BTreeSet<usize> = self.constraints.required_boundaries().collect();
        let boundary = (self.config.judge.is_some() && !required.is_empty())
            .then(|| required.is_subset(&best.boundary_trace));
        let satisfied = Satisfied {
            length: best.syllables_used == self.constraints.length(),
            rhyme,
            boundary,
        };
        Ok(DecodeResult {
            candidates: pool,
            best_text,
            satisfied,
        })
    }
}

/// Beam search; the result keeps at most `beam_size` finished candidates,
/// best first.
pub fn beam_search(
    model: &dyn SequenceModel,
    source: &str,
    constraints: &ConstraintSet,
    placement: PromptPlacement,
    config: &DecodeConfig,
) -> Result<DecodeResult, DecodeError> {
    let search = Search::new(model, source, constraints, placement, config)?;
    let mut live = vec![search.root()];
    let mut pool = Vec::new();
    for _ in 0..config.max_len {
        if live.is_empty() {
            break;
        }
        let mut candidates = Vec::new();
        for hyp in &live {
            candidates.extend(search.expand(hyp)?);
        }
        candidates.sort_by(rank_order);
        live.clear();
        for c in candidates {
            if c.finished {
                pool.push(c);
            } else if live.len() < config.beam_size {
                live.push(c);
            }
        }
    }
    search.finish(pool)
}
