use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use singable::dataprep::synthetic::{corpus, to_tsv, BUNDLED_SEED, BUNDLED_TEST, BUNDLED_TRAIN};
use singable::dataprep::{make_training_set, parse_pairs, train_ngram};
use singable::model::{Direction, NGramConfig, SequenceModel};
use singable::prompts::{render_prompt, ConstraintSet, PromptPlacement};
use singable::{LanguageProfile, RhymeClass};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/oracle").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

#[test]
fn bundled_files_match_generator() {
    let (train, test) = corpus(BUNDLED_SEED, BUNDLED_TRAIN, BUNDLED_TEST);
    assert_eq!(read("train.tsv"), to_tsv(&train));
    assert_eq!(read("test.tsv"), to_tsv(&test));
}

#[test]
fn oracle_profile_covers_corpus() {
    let profile = LanguageProfile::from_path(data("profile.toml")).unwrap();
    let mut classes = BTreeSet::new();
    for (_, t) in parse_pairs(&read("train.tsv")).unwrap() {
        let s = profile.segment_words(&t).unwrap();
        assert_eq!(s.total_syllables(), t.chars().count());
        classes.insert(profile.classify_rhyme(&t).unwrap());
    }
    assert!(!classes.contains(&RhymeClass::Unknown));
    assert_eq!(classes.len(), 14);
}

#[test]
fn rhyme_prompt_picks_end_word_class() {
    let profile = LanguageProfile::from_path(data("profile.toml")).unwrap();
    let train = parse_pairs(&read("train.tsv")).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let set = make_training_set(&train, &profile, PromptPlacement::DecoderPrefix, Direction::Reverse, 0.0, &mut rng)
        .unwrap();
    let model = train_ngram(&set.examples, &profile, NGramConfig::default()).unwrap();
    let vocab = model.vocabulary();
    for class in 1..=14 {
        let c: ConstraintSet = format!("L=4 R={class} B=").parse().unwrap();
        let prompt = render_prompt(&c, PromptPlacement::DecoderPrefix);
        let d = model.next_distribution("moon", &prompt, &[], Direction::Reverse).unwrap();
        let best = (0..d.len()).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        assert_eq!(vocab.rhyme(best as u32), RhymeClass::Scheme(class), "class {class}");
    }
}

#[test]
fn sampled_boundaries_are_word_boundaries() {
    let profile = LanguageProfile::from_path(data("profile.toml")).unwrap();
    let (train, _) = corpus(7, 10_000, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let set = make_training_set(&train, &profile, PromptPlacement::EncoderPrefix, Direction::Normal, 1.0 / 15.0, &mut rng)
        .unwrap();
    assert_eq!(set.examples.len(), 10_000);
    for (e, (_, t)) in set.examples.iter().zip(&train) {
        let truth = profile.segment_words(t).unwrap();
        for p in e.constraints.required_boundaries() {
            assert!(truth.word_boundary_positions().contains(&p), "{t} {}", e.constraints);
        }
    }
}
