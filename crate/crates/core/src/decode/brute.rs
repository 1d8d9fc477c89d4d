use super::{DecodeConfig, DecodeError, DecodeResult, Search};
use crate::model::SequenceModel;
use crate::prompts::{ConstraintSet, PromptPlacement};

pub const MAX_BRUTE_FORCE_VOCAB: usize = 10;
pub const MAX_BRUTE_FORCE_LEN: usize = 6;

/// Enumerates every complete hypothesis under the same expansion rules as
/// [`beam_search`](super::beam_search) and keeps the best `beam_size`.
pub fn brute_force_decode(
    model: &dyn SequenceModel,
    source: &str,
    constraints: &ConstraintSet,
    placement: PromptPlacement,
    config: &DecodeConfig,
) -> Result<DecodeResult, DecodeError> {
    let emittable = model.vocabulary().emittable_count();
    if emittable > MAX_BRUTE_FORCE_VOCAB || config.max_len > MAX_BRUTE_FORCE_LEN {
        return Err(DecodeError::SearchSpaceTooLarge {
            emittable,
            max_len: config.max_len,
        });
    }
    let search = Search::new(model, source, constraints, placement, config)?;
    let mut complete = Vec::new();
    let mut stack = vec![search.root()];
    while let Some(hyp) = stack.pop() {
        for next in search.expand(&hyp)? {
            if next.finished {
                complete.push(next);
            } else {
                stack.push(next);
            }
        }
    }
    search.finish(complete)
}
