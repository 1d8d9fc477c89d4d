use std::path::Path;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use singable::dataprep;
use singable::metrics::{bleu, corpus_ter, ter};
use singable::model::{Direction, NGramConfig, SequenceModel};
use singable::prompts::{render_prompt, ConstraintSet, PromptPlacement};
use singable::{LanguageProfile, RhymeClass};

fn constraints() -> impl Strategy<Value = ConstraintSet> {
    (1usize..=20, 0u8..=14).prop_flat_map(|(l, r)| {
        proptest::collection::vec(any::<bool>(), l - 1).prop_map(move |mut bits| {
            bits.push(false);
            ConstraintSet::from_bits(RhymeClass::from_index(r).unwrap(), bits).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn constraint_lines_round_trip(c in constraints()) {
        let back: ConstraintSet = c.to_string().parse().unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(c.mirrored().mirrored(), c.clone());
        let rendered = render_prompt(&c, PromptPlacement::DecoderPrefix);
        prop_assert_eq!(rendered.sequence().to_constraints().unwrap(), c);
    }

    #[test]
    fn mirroring_reverses_boundary_positions(c in constraints()) {
        let l = c.length();
        let mirrored: Vec<usize> = c.mirrored().required_boundaries().collect();
        let mut expected: Vec<usize> = c.required_boundaries().map(|p| l - p).collect();
        expected.sort();
        prop_assert_eq!(mirrored, expected);
    }

    #[test]
    fn ter_is_zero_only_on_identity(h in "[a-d]{0,8}", r in "[a-d]{1,8}") {
        let t = ter(&h, &r).unwrap();
        prop_assert!(t >= 0.0);
        prop_assert_eq!(t == 0.0, h == r);
        prop_assert_eq!(ter(&r, &r).unwrap(), 0.0);
        let pooled = corpus_ter([(h.as_str(), r.as_str())]).unwrap();
        prop_assert!((pooled - t).abs() < 1e-12);
    }

    #[test]
    fn bleu_is_bounded(h in "[a-d]{0,10}", r in "[a-d]{1,10}") {
        let b = bleu(&h, &r, 4);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&b));
        prop_assert!((bleu(&r, &r, 4) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn trained_distributions_are_normalized() {
    let profile = LanguageProfile::from_path(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/oracle/profile.toml"))
        .unwrap();
    let (train, test) = dataprep::synthetic::corpus(2, 300, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let set = dataprep::make_training_set(
        &train,
        &profile,
        PromptPlacement::DecoderPrefix,
        Direction::Reverse,
        1.0 / 15.0,
        &mut rng,
    )
    .unwrap();
    let model = dataprep::train_ngram(&set.examples, &profile, NGramConfig::default()).unwrap();
    let vocab = model.vocabulary();
    for (source, target) in &test {
        let c = singable::prompts::constraints_from_target(target, &profile, &mut rng).unwrap();
        let prompt = render_prompt(&c, PromptPlacement::DecoderPrefix);
        let mut prefix = Vec::new();
        for token in vocab.encode_text(&profile, target, Direction::Reverse).unwrap() {
            let d = model.next_distribution(source, &prompt, &prefix, Direction::Reverse).unwrap();
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(d.iter().enumerate().all(|(id, &p)| vocab.is_emittable(id as u32) == (p > 0.0)));
            prefix.push(token);
        }
    }
}
