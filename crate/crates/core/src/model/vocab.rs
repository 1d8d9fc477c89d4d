use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Direction, ModelError, TokenId};
use crate::phonology::{LanguageProfile, RhymeClass};
use crate::prompts::PromptToken;

pub const BOS: TokenId = 0;
pub const EOS: TokenId = 1;
const PROMPT_BASE: TokenId = 2;
const PROMPT_COUNT: TokenId = 37;
pub const FIRST_CONTENT: TokenId = PROMPT_BASE + PROMPT_COUNT;

/// A content token with its syllable weight and end-rhyme class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub text: String,
    pub syllables: usize,
    /// Scheme class index, `None` when the final is not in the rhyme table.
    pub rhyme: Option<u8>,
}

impl VocabEntry {
    pub fn rhyme_class(&self) -> RhymeClass {
        self.rhyme.map_or(RhymeClass::Unknown, RhymeClass::Scheme)
    }
}

#[derive(Serialize, Deserialize)]
struct RawVocabulary {
    joiner: String,
    class_count: u8,
    tokens: Vec<VocabEntry>,
}

/// Token ids: `BOS`, `EOS`, the 37 prompt tokens, then content tokens in
/// sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawVocabulary", into = "RawVocabulary")]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    joiner: String,
    class_count: u8,
    index: HashMap<String, TokenId>,
}

impl From<Vocabulary> for RawVocabulary {
    fn from(v: Vocabulary) -> Self {
        RawVocabulary {
            joiner: v.joiner,
            class_count: v.class_count,
            tokens: v.entries,
        }
    }
}

impl TryFrom<RawVocabulary> for Vocabulary {
    type Error = ModelError;

    fn try_from(raw: RawVocabulary) -> Result<Self, ModelError> {
        Vocabulary::from_entries(raw.tokens, raw.joiner, raw.class_count)
    }
}

impl Vocabulary {
    /// Entries are sorted by text; duplicates and zero-syllable tokens are
    /// rejected.
    pub fn from_entries(
        mut entries: Vec<VocabEntry>,
        joiner: impl Into<String>,
        class_count: u8,
    ) -> Result<Self, ModelError> {
        entries.sort_by(|a, b| a.text.cmp(&b.text));
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.syllables == 0 {
                return Err(ModelError::InvalidVocabulary(format!("{:?} has no syllables", e.text)));
            }
            if e.rhyme.is_some_and(|r| r == 0 || r > class_count) {
                return Err(ModelError::InvalidVocabulary(format!("{:?} has rhyme {:?}", e.text, e.rhyme)));
            }
            if index.insert(e.text.clone(), FIRST_CONTENT + i as TokenId).is_some() {
                return Err(ModelError::InvalidVocabulary(format!("duplicate token {:?}", e.text)));
            }
        }
        Ok(Self {
            entries,
            joiner: joiner.into(),
            class_count,
            index,
        })
    }

    /// Collects every token of `targets` under `profile`.
    pub fn from_corpus<I, S>(profile: &LanguageProfile, targets: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut tokens = Vec::new();
        for t in targets {
            tokens.extend(profile.tokens(t.as_ref()));
        }
        Self::from_tokens(profile, tokens)
    }

    /// Builds entries for already tokenized text; repeats are merged.
    pub fn from_tokens<I, S>(profile: &LanguageProfile, tokens: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let seen: BTreeSet<String> = tokens.into_iter().map(Into::into).collect();
        let entries = seen
            .into_iter()
            .map(|text| {
                let syllables = profile.count_syllables(&text)?;
                let rhyme = profile.classify_rhyme(&text)?.index();
                Ok(VocabEntry { text, syllables, rhyme })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let joiner = if profile.syllable_rule().is_character_level() { "" } else { " " };
        Self::from_entries(entries, joiner, profile.class_count())
    }

    /// Total number of ids, specials included.
    pub fn len(&self) -> usize {
        FIRST_CONTENT as usize + self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Tokens a model may emit: `EOS` and the content tokens.
    pub fn emittable_count(&self) -> usize {
        1 + self.entries.len()
    }

    pub fn is_emittable(&self, id: TokenId) -> bool {
        id == EOS || self.is_content(id)
    }

    pub fn is_content(&self, id: TokenId) -> bool {
        id >= FIRST_CONTENT && ((id - FIRST_CONTENT) as usize) < self.entries.len()
    }

    pub fn content_ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        FIRST_CONTENT..FIRST_CONTENT + self.entries.len() as TokenId
    }

    pub fn entry(&self, id: TokenId) -> Option<&VocabEntry> {
        id.checked_sub(FIRST_CONTENT)
            .and_then(|i| self.entries.get(i as usize))
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn prompt_id(&self, token: PromptToken) -> TokenId {
        let offset = match token {
            PromptToken::Len(i) => u32::from(i) - 1,
            PromptToken::Rhy(j) => 20 + u32::from(j),
            PromptToken::Bdr(b) => 35 + u32::from(b),
        };
        PROMPT_BASE + offset
    }

    /// Surface form of any id; specials render as `<s>`, `</s>` or their
    /// prompt spelling.
    pub fn token(&self, id: TokenId) -> Option<String> {
        match id {
            BOS => Some("<s>".into()),
            EOS => Some("</s>".into()),
            id if id < FIRST_CONTENT => PromptToken::all()
                .nth((id - PROMPT_BASE) as usize)
                .map(|t| t.to_string()),
            id => self.entry(id).map(|e| e.text.clone()),
        }
    }

    /// Syllable weight; 0 for specials.
    pub fn syllables(&self, id: TokenId) -> usize {
        self.entry(id).map_or(0, |e| e.syllables)
    }

    /// Rhyme class of a content token; `Unknown` for specials and
    /// unclassified tokens.
    pub fn rhyme(&self, id: TokenId) -> RhymeClass {
        self.entry(id).map_or(RhymeClass::Unknown, VocabEntry::rhyme_class)
    }

    pub fn max_token_syllables(&self) -> usize {
        self.entries.iter().map(|e| e.syllables).max().unwrap_or(1)
    }

    pub fn joiner(&self) -> &str {
        &self.joiner
    }

    pub fn class_count(&self) -> u8 {
        self.class_count
    }

    pub fn encode(&self, tokens: &[String]) -> Result<Vec<TokenId>, ModelError> {
        tokens
            .iter()
            .map(|t| self.id(t).ok_or_else(|| ModelError::OutOfVocabulary(t.clone())))
            .collect()
    }

    /// Tokenizes `text` and orders the ids for generation in `direction`.
    pub fn encode_text(
        &self,
        profile: &LanguageProfile,
        text: &str,
        direction: Direction,
    ) -> Result<Vec<TokenId>, ModelError> {
        let mut ids = self.encode(&profile.tokens(text))?;
        if direction == Direction::Reverse {
            ids.reverse();
        }
        Ok(ids)
    }
}
