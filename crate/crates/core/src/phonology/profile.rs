use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;

use super::{english, pinyin, RhymeClass};

/// Version of the profile file layout understood by this build.
pub const PROFILE_FORMAT_VERSION: u32 = 1;

const MANDARIN_TOML: &str = include_str!("../../profiles/zh-cmn.toml");
const ENGLISH_TOML: &str = include_str!("../../profiles/en.toml");

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("cannot read profile {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed profile: {0}")]
    Malformed(String),
    #[error("profile format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("final {final_:?} is listed in rhyme classes {first} and {second}")]
    OverlappingClasses {
        final_: String,
        first: u8,
        second: u8,
    },
    #[error("rhyme class index {0} is outside 1..=14")]
    ClassOutOfRange(u32),
}

/// How a profile turns text into syllables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyllableRule {
    /// One syllable per Han character; other scripts are unpronounceable.
    HanCharacter,
    /// One syllable per non-space character.
    PerCharacter,
    /// Whitespace-separated words, dictionary lookup then vowel groups.
    VowelGroup,
}

impl SyllableRule {
    /// Whether tokens are single characters (joined without spaces).
    pub fn is_character_level(self) -> bool {
        !matches!(self, SyllableRule::VowelGroup)
    }
}

/// Hook for resolving polyphonic characters from context.
///
/// `word` is the normalized end word and `index` the character position
/// within it. Returning `None` falls back to the primary reading.
pub trait PronunciationHook: Send + Sync {
    fn resolve(&self, word: &str, index: usize, primary: Option<&str>) -> Option<String>;
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    format_version: u32,
    id: String,
    syllable_rule: SyllableRule,
    #[serde(default)]
    lexicon: Vec<String>,
    #[serde(default)]
    rhyme_classes: BTreeMap<String, RhymeClassEntry>,
    #[serde(default)]
    readings: BTreeMap<String, String>,
    #[serde(default)]
    normalize: BTreeMap<String, String>,
    #[serde(default)]
    syllable_dict: BTreeMap<String, usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RhymeClassEntry {
    #[serde(default)]
    name: String,
    finals: Vec<String>,
}

/// Language-specific data driving syllable counting, segmentation and
/// rhyme classification. Immutable once built.
#[derive(Debug, Clone)]
pub struct LanguageProfile {
    pub(super) id: String,
    pub(super) rule: SyllableRule,
    pub(super) rhyme_table: HashMap<String, u8>,
    pub(super) class_names: BTreeMap<u8, String>,
    pub(super) readings: HashMap<char, String>,
    pub(super) lexicon: HashSet<String>,
    pub(super) max_word_chars: usize,
    pub(super) normalize_map: HashMap<char, char>,
    pub(super) syllable_dict: HashMap<String, usize>,
}

impl LanguageProfile {
    /// The bundled simplified-Mandarin profile.
    pub fn mandarin() -> &'static LanguageProfile {
        static CELL: OnceLock<LanguageProfile> = OnceLock::new();
        CELL.get_or_init(|| Self::from_toml_str(MANDARIN_TOML).expect("bundled Mandarin profile"))
    }

    /// The bundled English profile.
    pub fn english() -> &'static LanguageProfile {
        static CELL: OnceLock<LanguageProfile> = OnceLock::new();
        CELL.get_or_init(|| Self::from_toml_str(ENGLISH_TOML).expect("bundled English profile"))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ProfileError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ProfileError> {
        let file: ProfileFile =
            toml::from_str(text).map_err(|e| ProfileError::Malformed(e.to_string()))?;
        if file.format_version != PROFILE_FORMAT_VERSION {
            return Err(ProfileError::VersionMismatch {
                found: file.format_version,
                expected: PROFILE_FORMAT_VERSION,
            });
        }
        let mut builder = ProfileBuilder::new(file.id, file.syllable_rule);
        for (key, entry) in file.rhyme_classes {
            let index: u32 = key
                .parse()
                .map_err(|_| ProfileError::Malformed(format!("rhyme class key {key:?}")))?;
            builder = builder.rhyme_class(index, &entry.name, entry.finals)?;
        }
        for (ch, reading) in file.readings {
            let mut chars = ch.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => builder = builder.reading(c, reading),
                _ => return Err(ProfileError::Malformed(format!("reading key {ch:?}"))),
            }
        }
        for (from, to) in file.normalize {
            let (mut f, mut t) = (from.chars(), to.chars());
            match (f.next(), f.next(), t.next(), t.next()) {
                (Some(a), None, Some(b), None) => builder = builder.normalize(a, b),
                _ => {
                    return Err(ProfileError::Malformed(format!(
                        "normalization entry {from:?} -> {to:?}"
                    )))
                }
            }
        }
        for (word, n) in file.syllable_dict {
            if n == 0 {
                return Err(ProfileError::Malformed(format!(
                    "dictionary word {word:?} has zero syllables"
                )));
            }
            builder = builder.dictionary_word(word, n);
        }
        Ok(builder.lexicon(file.lexicon).build())
    }

    pub fn builder(id: impl Into<String>, rule: SyllableRule) -> ProfileBuilder {
        ProfileBuilder::new(id.into(), rule)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn syllable_rule(&self) -> SyllableRule {
        self.rule
    }

    /// Number of scheme classes `u` (the highest class index in the table).
    pub fn class_count(&self) -> u8 {
        self.class_names.keys().next_back().copied().unwrap_or(0)
    }

    pub fn class_name(&self, class: u8) -> Option<&str> {
        self.class_names.get(&class).map(String::as_str)
    }

    /// Looks a final up in the rhyme table.
    pub fn class_of_final(&self, fin: &str) -> RhymeClass {
        self.rhyme_table
            .get(fin)
            .map_or(RhymeClass::Unknown, |&c| RhymeClass::Scheme(c))
    }

    /// All (final, class) pairs of the rhyme table, sorted by final.
    pub fn rhyme_table(&self) -> Vec<(&str, u8)> {
        let mut v: Vec<_> = self
            .rhyme_table
            .iter()
            .map(|(f, &c)| (f.as_str(), c))
            .collect();
        v.sort();
        v
    }

    /// Primary reading of a character, if the profile has one.
    pub fn reading(&self, c: char) -> Option<&str> {
        self.readings.get(&c).map(String::as_str)
    }

    pub fn readings(&self) -> impl Iterator<Item = (char, &str)> {
        self.readings.iter().map(|(c, r)| (*c, r.as_str()))
    }

    pub fn in_lexicon(&self, word: &str) -> bool {
        self.lexicon.contains(word)
    }

    /// Final of a single syllable written in the profile's romanization.
    pub(super) fn final_of_syllable(&self, syllable: &str) -> Option<String> {
        match self.rule {
            SyllableRule::VowelGroup => english::last_rime(syllable),
            _ => pinyin::final_of(syllable),
        }
    }

    /// Syllable count of one word under the English rule.
    pub(super) fn word_syllables(&self, word: &str) -> Option<usize> {
        let key: String = word.chars().filter(|c| c.is_alphabetic()).collect();
        self.syllable_dict
            .get(&key)
            .copied()
            .or_else(|| english::vowel_group_syllables(word))
    }
}

/// Incremental construction of a [`LanguageProfile`], mostly for tests and
/// small purpose-built profiles.
#[derive(Debug, Clone)]
pub struct ProfileBuilder {
    profile: LanguageProfile,
}

impl ProfileBuilder {
    fn new(id: String, rule: SyllableRule) -> Self {
        Self {
            profile: LanguageProfile {
                id,
                rule,
                rhyme_table: HashMap::new(),
                class_names: BTreeMap::new(),
                readings: HashMap::new(),
                lexicon: HashSet::new(),
                max_word_chars: 1,
                normalize_map: HashMap::new(),
                syllable_dict: HashMap::new(),
            },
        }
    }

    /// Starts from an existing profile's tables.
    pub fn from_profile(profile: &LanguageProfile, id: impl Into<String>) -> Self {
        let mut profile = profile.clone();
        profile.id = id.into();
        Self { profile }
    }

    pub fn rhyme_class<S: Into<String>>(
        mut self,
        index: u32,
        name: &str,
        finals: impl IntoIterator<Item = S>,
    ) -> Result<Self, ProfileError> {
        if !(1..=u32::from(RhymeClass::MAX_SCHEME)).contains(&index) {
            return Err(ProfileError::ClassOutOfRange(index));
        }
        let index = index as u8;
        for fin in finals {
            let fin = fin.into();
            if let Some(&prev) = self.profile.rhyme_table.get(&fin) {
                if prev != index {
                    return Err(ProfileError::OverlappingClasses {
                        final_: fin,
                        first: prev,
                        second: index,
                    });
                }
            }
            self.profile.rhyme_table.insert(fin, index);
        }
        self.profile.class_names.insert(index, name.to_string());
        Ok(self)
    }

    pub fn reading(mut self, c: char, reading: impl Into<String>) -> Self {
        self.profile.readings.insert(c, reading.into());
        self
    }

    pub fn normalize(mut self, from: char, to: char) -> Self {
        self.profile.normalize_map.insert(from, to);
        self
    }

    pub fn dictionary_word(mut self, word: impl Into<String>, syllables: usize) -> Self {
        self.profile
            .syllable_dict
            .insert(word.into().to_lowercase(), syllables);
        self
    }

    /// Replaces the segmentation lexicon.
    pub fn lexicon<S: Into<String>>(mut self, words: impl IntoIterator<Item = S>) -> Self {
        self.profile.lexicon = words.into_iter().map(Into::into).collect();
        self
    }

    pub fn build(mut self) -> LanguageProfile {
        self.profile.max_word_chars = self
            .profile
            .lexicon
            .iter()
            .map(|w| w.chars().count())
            .max()
            .unwrap_or(1)
            .max(1);
        self.profile
    }
}
