//! A small synthetic parallel corpus: English glosses paired with Mandarin
//! lines built from a fixed word list.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (Mandarin word, English gloss).
pub const WORDS: [(&str, &str); 30] = [
    ("光", "light"),
    ("家", "home"),
    ("心", "heart"),
    ("飞", "fly"),
    ("我", "i"),
    ("你", "you"),
    ("爱", "love"),
    ("走", "go"),
    ("好", "good"),
    ("夜", "night"),
    ("路", "road"),
    ("风", "wind"),
    ("月亮", "moon"),
    ("星辰", "stars"),
    ("天空", "sky"),
    ("海洋", "ocean"),
    ("花朵", "flower"),
    ("未来", "future"),
    ("温柔", "gentle"),
    ("世界", "world"),
    ("歌声", "song"),
    ("快乐", "happy"),
    ("梦想", "dream"),
    ("美丽", "beautiful"),
    ("孤独", "lonely"),
    ("微笑", "smile"),
    ("眼泪", "tears"),
    ("永远", "forever"),
    ("时间", "time"),
    ("故事", "story"),
];

pub const MAX_WORDS: usize = 5;
pub const MAX_CHARS: usize = 8;

/// One (source, target) pair of 1 to 5 words and at most 8 characters.
pub fn sentence<R: Rng + ?Sized>(rng: &mut R) -> (String, String) {
    loop {
        let n = rng.random_range(1..=MAX_WORDS);
        let words: Vec<&(&str, &str)> = (0..n).map(|_| WORDS.choose(rng).expect("non-empty")).collect();
        let target: String = words.iter().map(|w| w.0).collect();
        if target.chars().count() <= MAX_CHARS {
            let source = words.iter().map(|w| w.1).collect::<Vec<_>>().join(" ");
            return (source, target);
        }
    }
}

pub type Pair = (String, String);

/// `train` pairs followed by `test` pairs with distinct targets that never
/// occur in the training part.
pub fn corpus(seed: u64, train: usize, test: usize) -> (Vec<Pair>, Vec<Pair>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train_pairs: Vec<_> = (0..train).map(|_| sentence(&mut rng)).collect();
    let mut seen: HashSet<String> = train_pairs.iter().map(|p| p.1.clone()).collect();
    let mut test_pairs = Vec::with_capacity(test);
    while test_pairs.len() < test {
        let pair = sentence(&mut rng);
        if seen.insert(pair.1.clone()) {
            test_pairs.push(pair);
        }
    }
    (train_pairs, test_pairs)
}

pub const BUNDLED_SEED: u64 = 20;
pub const BUNDLED_TRAIN: usize = 1000;
pub const BUNDLED_TEST: usize = 200;

/// Renders pairs as tab-separated lines.
pub fn to_tsv(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(s, t)| format!("{s}\t{t}\n")).collect()
}
