//! Vowel-group syllable estimate, used when a word is missing from the
//! profile's syllable dictionary.

fn is_vowel(c: char, index: usize) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u') || (c == 'y' && index > 0)
}

/// Counts maximal vowel groups, discounting a silent final `e`.
///
/// Returns `None` for words without any letter.
pub fn vowel_group_syllables(word: &str) -> Option<usize> {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if letters.is_empty() {
        return None;
    }

    let mut groups = 0;
    let mut in_group = false;
    for (i, &c) in letters.iter().enumerate() {
        let v = is_vowel(c, i);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }

    let n = letters.len();
    if groups > 1 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2], n - 2) {
        // "-le" after a consonant is voiced ("table"), other final e's are not ("tone").
        let voiced_le = n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3], n - 3);
        if !voiced_le {
            groups -= 1;
        }
    }
    Some(groups.max(1))
}

/// Extracts the rime of the last vowel group: the vowels plus any trailing
/// consonants. Used as the English "final" for rhyme-table lookups.
pub fn last_rime(word: &str) -> Option<String> {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    let last_vowel = (0..letters.len()).rev().find(|&i| is_vowel(letters[i], i))?;
    let mut start = last_vowel;
    while start > 0 && is_vowel(letters[start - 1], start - 1) {
        start -= 1;
    }
    Some(letters[start..].iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_counts() {
        let cases = [
            ("tonight", 2),
            ("go", 1),
            ("let", 1),
            ("table", 2),
            ("tone", 1),
            ("the", 1),
            ("beautiful", 3),
            ("rhythm", 1),
            ("my", 1),
            ("yellow", 2),
            ("hmm", 1),
        ];
        for (w, n) in cases {
            assert_eq!(vowel_group_syllables(w), Some(n), "{w}");
        }
        assert_eq!(vowel_group_syllables("123"), None);
    }

    #[test]
    fn rimes() {
        assert_eq!(last_rime("night").as_deref(), Some("ight"));
        assert_eq!(last_rime("go").as_deref(), Some("o"));
        assert_eq!(last_rime("rain").as_deref(), Some("ain"));
        assert_eq!(last_rime("zzz"), None);
    }
}
