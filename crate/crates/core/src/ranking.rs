//! End-rhyme ranking for a paragraph.
//!
//! A reverse-order model generates the end word first. With the rhyme
//! prompt set to `rhy_0`, its first-step distribution is the model's
//! belief about the end word. Summing it within each rhyme class gives a
//! class distribution per sentence. The per-sentence vectors are summed
//! with equal weight and passed through a softmax.

use crate::model::{Direction, ModelError, SequenceModel, Vocabulary};
use crate::phonology::{RhymeClass, RhymeDistribution};
use crate::prompts::{render_prompt, ConstraintSet, PromptPlacement};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RankingError {
    #[error("end-word extraction needs a reverse-order model")]
    NotReverseModel,
    #[error("paragraph has no sentences")]
    EmptyParagraph,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// First-step distribution of a reverse-order model over the whole
/// vocabulary, with the mass on non-content tokens split out.
#[derive(Debug, Clone, PartialEq)]
pub struct EndWordDistribution {
    pub probs: Vec<f64>,
    pub special_mass: f64,
}

pub fn end_word_distribution(
    model: &dyn SequenceModel,
    source: &str,
    constraints: &ConstraintSet,
    placement: PromptPlacement,
) -> Result<EndWordDistribution, RankingError> {
    if model.direction() != Direction::Reverse {
        return Err(RankingError::NotReverseModel);
    }
    let unconstrained = constraints.clone().with_rhyme(RhymeClass::Null).map_err(ModelError::from)?;
    let prompt = render_prompt(&unconstrained, placement);
    let probs = model.next_distribution(source, &prompt, &[], Direction::Reverse)?;
    let vocab = model.vocabulary();
    let special_mass = probs
        .iter()
        .enumerate()
        .filter(|(id, _)| !vocab.is_content(*id as u32))
        .map(|(_, p)| p)
        .sum();
    Ok(EndWordDistribution { probs, special_mass })
}

/// Sums token probabilities per rhyme class. Tokens of unknown class and
/// special tokens go to the residual.
pub fn aggregate_rhyme_distribution(dist: &EndWordDistribution, vocab: &Vocabulary) -> RhymeDistribution {
    let u = usize::from(vocab.class_count());
    let mut probs = vec![0.0; u];
    let mut residual = 0.0;
    for (id, &p) in dist.probs.iter().enumerate() {
        match vocab.rhyme(id as u32) {
            RhymeClass::Scheme(c) if vocab.is_content(id as u32) => probs[usize::from(c) - 1] += p,
            _ => residual += p,
        }
    }
    let total: f64 = probs.iter().sum::<f64>() + residual;
    if total > 0.0 {
        probs.iter_mut().for_each(|p| *p /= total);
        residual /= total;
    }
    RhymeDistribution::new(probs, residual).expect("normalized by construction")
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhymeRanking {
    /// Softmax scores indexed by class `1..=u`.
    pub distribution: RhymeDistribution,
    /// Classes by descending score; ties go to the lower class index.
    pub ranked: Vec<(RhymeClass, f64)>,
}

/// Class distribution of each sentence, in input order.
pub fn sentence_rhyme_distributions(
    model: &dyn SequenceModel,
    sentences: &[(String, ConstraintSet)],
    placement: PromptPlacement,
) -> Result<Vec<RhymeDistribution>, RankingError> {
    sentences
        .iter()
        .map(|(source, c)| {
            let d = end_word_distribution(model, source, c, placement)?;
            Ok(aggregate_rhyme_distribution(&d, model.vocabulary()))
        })
        .collect()
}

/// Softmax of the summed class vectors. Each class column is summed in
/// sorted order, so the result does not depend on sentence order.
pub fn combine_rhyme_distributions(per_sentence: &[RhymeDistribution]) -> Result<RhymeRanking, RankingError> {
    let first = per_sentence.first().ok_or(RankingError::EmptyParagraph)?;
    let u = first.class_count();
    let sums: Vec<f64> = (0..u)
        .map(|c| {
            let mut column: Vec<f64> = per_sentence.iter().map(|d| d.probs()[c]).collect();
            column.sort_by(f64::total_cmp);
            column.iter().sum()
        })
        .collect();
    let scores = softmax(&sums);
    let mut ranked: Vec<(RhymeClass, f64)> = scores
        .iter()
        .enumerate()
        .map(|(i, &s)| (RhymeClass::Scheme(i as u8 + 1), s))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let distribution = RhymeDistribution::new(scores, 0.0).expect("softmax sums to one");
    Ok(RhymeRanking { distribution, ranked })
}

pub fn rank_paragraph_rhymes(
    model: &dyn SequenceModel,
    sentences: &[(String, ConstraintSet)],
    placement: PromptPlacement,
) -> Result<RhymeRanking, RankingError> {
    if sentences.is_empty() {
        return Err(RankingError::EmptyParagraph);
    }
    combine_rhyme_distributions(&sentence_rhyme_distributions(model, sentences, placement)?)
}
