//! Toneless pinyin syllable handling.
//!
//! Finals are written in their underlying (un-abbreviated) spelling so the
//! rhyme table can list them directly: `ü` is spelled `v`, `iu` is `iou`,
//! `ui` is `uei`, `un` is `uen`, and the apical vowel of `zhi`/`ci`/... is
//! `-i`.

const INITIALS: [&str; 21] = [
    "zh", "ch", "sh", "b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h", "j", "q", "x", "r",
    "z", "c", "s",
];

const APICAL_INITIALS: [&str; 7] = ["zh", "ch", "sh", "r", "z", "c", "s"];

/// Lowercases, maps `ü`/`u:` to `v` and drops tone digits and tone marks.
pub fn canonical_syllable(raw: &str) -> String {
    let lowered = raw.trim().to_lowercase().replace("u:", "v");
    lowered
        .chars()
        .filter_map(|c| match c {
            'ā' | 'á' | 'ǎ' | 'à' => Some('a'),
            'ō' | 'ó' | 'ǒ' | 'ò' => Some('o'),
            'ē' | 'é' | 'ě' | 'è' => Some('e'),
            'ī' | 'í' | 'ǐ' | 'ì' => Some('i'),
            'ū' | 'ú' | 'ǔ' | 'ù' => Some('u'),
            'ü' | 'ǖ' | 'ǘ' | 'ǚ' | 'ǜ' => Some('v'),
            '0'..='9' => None,
            c => Some(c),
        })
        .collect()
}

/// Returns the final of a toneless pinyin syllable, or `None` when nothing
/// is left after removing the initial.
///
/// The result is not validated against any table: `"qwzz"` yields `"wzz"`,
/// which a rhyme table will simply not contain.
pub fn final_of(syllable: &str) -> Option<String> {
    let s = canonical_syllable(syllable);
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_lowercase()) {
        return None;
    }

    if let Some(rest) = s.strip_prefix('y') {
        let fin = if let Some(tail) = rest.strip_prefix('u') {
            format!("v{tail}")
        } else if rest.starts_with('i') {
            rest.to_string()
        } else {
            format!("i{rest}")
        };
        return non_empty(expand_abbreviations(&fin, false));
    }
    if let Some(rest) = s.strip_prefix('w') {
        let fin = if rest.starts_with('u') {
            rest.to_string()
        } else {
            format!("u{rest}")
        };
        return non_empty(expand_abbreviations(&fin, false));
    }

    let initial = INITIALS.iter().find(|i| s.starts_with(**i)).copied();
    let Some(initial) = initial else {
        return non_empty(s);
    };
    let rest = &s[initial.len()..];
    if rest == "i" && APICAL_INITIALS.contains(&initial) {
        return Some("-i".to_string());
    }
    let palatal = matches!(initial, "j" | "q" | "x");
    non_empty(expand_abbreviations(rest, palatal))
}

fn expand_abbreviations(rest: &str, palatal: bool) -> String {
    if palatal {
        if let Some(tail) = rest.strip_prefix('u') {
            return format!("v{tail}");
        }
    }
    match rest {
        "iu" => "iou".to_string(),
        "ui" => "uei".to_string(),
        "un" => "uen".to_string(),
        other => other.to_string(),
    }
}

fn non_empty(s: String) -> Option<String> {
    (!s.is_empty()).then_some(s)
}
