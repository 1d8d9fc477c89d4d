use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::SequenceModel;
use crate::RhymeClass;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn zh() -> &'static LanguageProfile {
    LanguageProfile::mandarin()
}

fn pairs(targets: &[&str]) -> Vec<(String, String)> {
    targets.iter().map(|t| ("src".to_string(), t.to_string())).collect()
}

#[test]
fn normalization_filters() {
    let lines = ["我爱你！", "我爱你", "  我 爱 你 ", "一二三四五六七八九十一二三四五六七八九十一", "", "...", "愛國"];
    let out = normalize_corpus(lines, zh());
    assert_eq!(out, ["我爱你", "爱国"]);
    let twenty = "一".repeat(20);
    assert_eq!(normalize_corpus([twenty.as_str()], zh()), [twenty]);
}

#[test]
fn pair_parsing() {
    let p = parse_pairs("a b\t月亮\n\nc\t光\n").unwrap();
    assert_eq!(p, [("a b".to_string(), "月亮".to_string()), ("c".into(), "光".into())]);
    assert_eq!(
        parse_pairs("ok\t光\nbroken\n"),
        Err(DataprepError::MalformedRecord { line: 2, reason: "expected exactly one tab".into() })
    );
    assert!(zip_aligned("a\nb\n", "光\n").is_err());
    assert_eq!(zip_aligned("a\n", "光\n").unwrap(), [("a".to_string(), "光".to_string())]);
}

#[test]
fn normal_direction_keeps_tokenization() {
    let set = make_training_set(
        &pairs(&["月亮光", "我爱你", "随它吧"]),
        zh(),
        PromptPlacement::DecoderPrefix,
        Direction::Normal,
        0.0,
        &mut rng(1),
    )
    .unwrap();
    assert_eq!(set.skipped, 0);
    for (e, t) in set.examples.iter().zip(["月亮光", "我爱你", "随它吧"]) {
        assert_eq!(e.target, zh().tokens(t));
        assert_ne!(e.constraints.rhyme(), RhymeClass::Null);
        assert_eq!(e.constraints.length(), 3);
        assert_eq!(e.prompt.to_constraints().unwrap(), e.constraints);
    }
}

#[test]
fn reverse_direction_reverses_targets() {
    let p = pairs(&["月亮光", "我爱你"]);
    let normal = make_training_set(&p, zh(), PromptPlacement::EncoderPrefix, Direction::Normal, 0.3, &mut rng(4)).unwrap();
    let reverse = make_training_set(&p, zh(), PromptPlacement::EncoderPrefix, Direction::Reverse, 0.3, &mut rng(4)).unwrap();
    for (n, r) in normal.examples.iter().zip(&reverse.examples) {
        let mut t = n.target.clone();
        t.reverse();
        assert_eq!(r.target, t);
        assert_eq!(r.constraints, n.constraints);
        assert_eq!(r.reading_order(), n.target);
    }
}

#[test]
fn unusable_targets_are_counted() {
    let long = "一".repeat(21);
    let set = make_training_set(
        &pairs(&[&long, "光", "abc", "月亮"]),
        zh(),
        PromptPlacement::DecoderPrefix,
        Direction::Normal,
        0.0,
        &mut rng(0),
    )
    .unwrap();
    assert_eq!(set.skipped, 2);
    assert_eq!(set.examples.len(), 2);
    assert!(make_training_set(&[], zh(), PromptPlacement::DecoderPrefix, Direction::Normal, 1.5, &mut rng(0)).is_err());
}

#[test]
fn training_set_is_reproducible_and_round_trips() {
    let (train, _) = synthetic::corpus(3, 200, 0);
    let run = |seed| {
        make_training_set(&train, zh(), PromptPlacement::DecoderPrefix, Direction::Reverse, 0.2, &mut rng(seed))
            .unwrap()
            .examples
            .iter()
            .map(|e| e.to_json() + "\n")
            .collect::<String>()
    };
    let text = run(9);
    assert_eq!(text, run(9));
    assert_ne!(text, run(10));
    let parsed = parse_examples(&text).unwrap();
    assert_eq!(parsed.len(), 200);
    assert_eq!(parsed.iter().map(|e| e.to_json() + "\n").collect::<String>(), text);
}

#[test]
fn mismatched_prompt_is_rejected() {
    let line = r#"{"source":"x","target":["光"],"constraints":"L=1 R=10 B=","prompt":"len_1 rhy_9 bdr_0","placement":"dec-pref","direction":"normal"}"#;
    assert!(TrainingExample::from_json(line).is_err());
    let ok = line.replace("rhy_9", "rhy_10");
    assert_eq!(TrainingExample::from_json(&ok).unwrap().to_json(), ok);
}

#[test]
fn trained_model_follows_examples() {
    let (train, _) = synthetic::corpus(5, 100, 0);
    let set = make_training_set(&train, zh(), PromptPlacement::DecoderPrefix, Direction::Reverse, 0.0, &mut rng(2)).unwrap();
    let model = train_ngram(&set.examples, zh(), NGramConfig::default()).unwrap();
    let distinct: HashSet<&String> = set.examples.iter().flat_map(|e| &e.target).collect();
    assert_eq!(model.vocabulary().emittable_count(), distinct.len() + 1);
    let normal = NGramConfig { direction: Direction::Normal, ..NGramConfig::default() };
    assert!(matches!(train_ngram(&set.examples, zh(), normal), Err(DataprepError::Model(_))));
}

fn toks(s: &str) -> Vec<String> {
    s.chars().map(String::from).collect()
}

#[test]
fn mask_span_examples() {
    assert_eq!(mask_span(&toks("月亮"), 1, 1), ["月", MASK]);
    assert_eq!(mask_span(&toks("月亮"), 1, 0), ["月", MASK, "亮"]);
    assert_eq!(mask_span(&toks("月亮光"), 0, 3), [MASK]);
}

#[test]
fn corruption_keeps_original() {
    let mut r = rng(11);
    for line in ["月亮", "我爱你", "天空海洋花朵"] {
        for _ in 0..200 {
            let c = corrupt_for_denoising(line, zh(), &mut r);
            assert_eq!(c.original, line);
            assert_eq!(c.corrupted.matches(MASK).count(), 1);
            let kept = c.corrupted.replace(MASK, "");
            assert!(kept.chars().count() <= line.chars().count());
        }
    }
    let single = corrupt_for_denoising("光", zh(), &mut r);
    assert_eq!(single.corrupted, "光");
}

#[test]
fn span_length_means() {
    let mut r = rng(12);
    let n = 100_000;
    let long: usize = (0..n).map(|_| sample_span(10, &mut r)).sum();
    let short: usize = (0..n).map(|_| sample_span(3, &mut r)).sum();
    assert!((long as f64 / n as f64 - 3.0).abs() < 0.05);
    assert!((short as f64 / n as f64 - 1.0).abs() < 0.02);
    assert_eq!(sample_span(1, &mut r), 0);
}

#[test]
fn identity_backtranslation() {
    let lines: Vec<String> = ["月亮", "光", "我爱你"].iter().map(|s| s.to_string()).collect();
    let out = backtranslate(&lines, "cat", 2).unwrap();
    assert_eq!(out.len(), 3);
    for (p, l) in out.iter().zip(&lines) {
        assert_eq!(&p.source, l);
        assert_eq!(&p.target, l);
        assert!(p.synthetic);
    }
}

#[test]
fn failing_backtranslation_reports_batch() {
    let lines: Vec<String> = ["a", "b", "fail", "c"].iter().map(|s| s.to_string()).collect();
    match backtranslate(&lines, "awk '/fail/ { exit 3 } { print }'", 2) {
        Err(DataprepError::ExternalCommandFailed { batch, .. }) => assert_eq!(batch, 1),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        backtranslate(&lines, "head -n 1", 2),
        Err(DataprepError::ExternalCommandFailed { batch: 0, .. })
    ));
    assert!(matches!(backtranslate(&lines, "false", 10), Err(DataprepError::ExternalCommandFailed { batch: 0, .. })));
}

#[test]
fn synthetic_corpus_shape() {
    let (train, test) = synthetic::corpus(1, 300, 50);
    assert_eq!(train.len(), 300);
    assert_eq!(test.len(), 50);
    let train_targets: HashSet<&String> = train.iter().map(|p| &p.1).collect();
    let test_targets: HashSet<&String> = test.iter().map(|p| &p.1).collect();
    assert_eq!(test_targets.len(), 50);
    assert!(test_targets.is_disjoint(&train_targets));
    for (s, t) in train.iter().chain(&test) {
        let n = s.split(' ').count();
        assert!((1..=synthetic::MAX_WORDS).contains(&n));
        assert!(t.chars().count() <= synthetic::MAX_CHARS);
    }
}
