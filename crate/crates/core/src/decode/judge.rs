use std::fmt;
use std::sync::Arc;

use crate::phonology::LanguageProfile;

/// Decides whether a partial line has a word boundary after syllable
/// `position`. `tokens` are in text order with their syllable weights.
pub trait BoundaryJudge: Send + Sync + fmt::Debug {
    fn has_boundary(&self, tokens: &[String], syllables: &[usize], position: usize) -> bool;
}

/// Segments the partial line with a language profile.
#[derive(Debug, Clone)]
pub struct LexiconJudge {
    profile: Arc<LanguageProfile>,
}

impl LexiconJudge {
    pub fn new(profile: Arc<LanguageProfile>) -> Self {
        Self { profile }
    }
}

impl BoundaryJudge for LexiconJudge {
    fn has_boundary(&self, tokens: &[String], _syllables: &[usize], position: usize) -> bool {
        let joiner = if self.profile.syllable_rule().is_character_level() { "" } else { " " };
        self.profile
            .segment_words(&tokens.join(joiner))
            .is_ok_and(|s| s.word_boundary_positions().contains(&position))
    }
}

/// Treats every token as a word.
#[derive(Debug, Clone, Copy, Default)]
pub struct TokenJudge;

impl BoundaryJudge for TokenJudge {
    fn has_boundary(&self, _tokens: &[String], syllables: &[usize], position: usize) -> bool {
        let mut acc = 0;
        for &n in syllables {
            acc += n;
            if acc == position {
                return true;
            }
        }
        false
    }
}
