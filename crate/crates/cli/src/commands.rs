use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use singable::dataprep::{self, TrainingExample};
use singable::decode::{beam_search, BoundaryJudge, ControlMode, DecodeConfig, LexiconJudge, TokenJudge};
use singable::melody::{extract_constraints_with, parse_melody_lines_with, Beats, MelodyConfig};
use singable::metrics::{evaluate, EvalRecord, Fraction};
use singable::model::{Direction, NGramConfig, NGramModel, PromptView, SequenceModel};
use singable::prompts::{constraints_from_source, ConstraintSet, PromptPlacement};
use singable::ranking::rank_paragraph_rhymes;
use singable::{LanguageProfile, RhymeClass, RhymeDistribution};

use crate::error::CliError;
use crate::{
    Backtranslate, Cli, Command, Constrained, Corrupt, DirectionArg, Evaluate, ExtractBoundaries, JudgeArg, ModeArg,
    Placement, PrepareData, RankRhymes, Train, Translate, ViewArg,
};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::PrepareData(a) => prepare_data(cli, a),
        Command::Corrupt(a) => corrupt(cli, a),
        Command::Backtranslate(a) => backtranslate(cli, a),
        Command::Train(a) => train(cli, a),
        Command::ExtractBoundaries(a) => extract_boundaries(cli, a),
        Command::RankRhymes(a) => rank_rhymes(cli, a),
        Command::Translate(a) => translate(cli, a),
        Command::Evaluate(a) => evaluate_cmd(cli, a),
    }
}

fn load_profile(name: &str) -> Result<Arc<LanguageProfile>, CliError> {
    Ok(Arc::new(match name {
        "zh-cmn" => LanguageProfile::mandarin().clone(),
        "en" => LanguageProfile::english().clone(),
        path => LanguageProfile::from_path(path)?,
    }))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    Ok(read(path)?.lines().map(str::to_string).collect())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn placement(p: Placement) -> PromptPlacement {
    match p {
        Placement::EncPref => PromptPlacement::EncoderPrefix,
        Placement::DecPref => PromptPlacement::DecoderPrefix,
        Placement::DecEmb => PromptPlacement::DecoderEmbedding,
    }
}

fn direction(d: DirectionArg) -> Direction {
    match d {
        DirectionArg::Normal => Direction::Normal,
        DirectionArg::Reverse => Direction::Reverse,
    }
}

/// One generator per input line, so results do not depend on scheduling.
fn line_rng(seed: u64, line: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(line as u64);
    rng
}

fn prepare_data(cli: &Cli, a: &PrepareData) -> Result<(), CliError> {
    let profile = load_profile(&cli.profile)?;
    let source_profile = load_profile(&a.source_profile)?;
    let raw = match (&a.pairs, &a.sources, &a.targets) {
        (Some(p), _, _) => dataprep::parse_pairs(&read(p)?)?,
        (None, Some(s), Some(t)) => dataprep::zip_aligned(&read(s)?, &read(t)?)?,
        _ => return Err(CliError::Input("no corpus given".into())),
    };
    let pairs = dataprep::normalize_pairs(&raw, &source_profile, &profile);
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let set = dataprep::make_training_set(
        &pairs,
        &profile,
        placement(a.placement),
        direction(a.direction),
        a.null_rhyme_rate,
        &mut rng,
    )?;
    eprintln!(
        "prepare-data: {} examples, {} pairs dropped by normalization, {} skipped",
        set.examples.len(),
        raw.len() - pairs.len(),
        set.skipped
    );
    let side = |path: &Option<std::path::PathBuf>, f: &dyn Fn(&TrainingExample) -> String| match path {
        Some(p) => std::fs::write(p, set.examples.iter().map(|e| f(e) + "\n").collect::<String>())
            .map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => Ok(()),
    };
    let joiner = if profile.syllable_rule().is_character_level() { "" } else { " " };
    side(&a.sources_out, &|e| e.source.clone())?;
    side(&a.targets_out, &|e| e.reading_order().join(joiner))?;
    side(&a.constraints_out, &|e| e.constraints.to_string())?;
    let text: String = set.examples.iter().map(|e| e.to_json() + "\n").collect();
    emit(a.output.out.as_deref(), &text)
}

fn corrupt(cli: &Cli, a: &Corrupt) -> Result<(), CliError> {
    let profile = load_profile(&cli.profile)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut text = String::new();
    for line in read_lines(&a.input)? {
        let c = dataprep::corrupt_for_denoising(&line, &profile, &mut rng);
        if cli.jsonl {
            writeln!(text, "{}", json!({"corrupted": c.corrupted, "original": c.original})).unwrap();
        } else {
            writeln!(text, "{}\t{}", c.corrupted, c.original).unwrap();
        }
    }
    emit(a.output.out.as_deref(), &text)
}

fn backtranslate(cli: &Cli, a: &Backtranslate) -> Result<(), CliError> {
    let lines = read_lines(&a.input)?;
    let pairs = dataprep::backtranslate(&lines, &a.cmd, a.batch_size as usize)?;
    let mut text = String::new();
    for p in pairs {
        if cli.jsonl {
            writeln!(text, "{}", json!({"source": p.source, "target": p.target, "synthetic": p.synthetic})).unwrap();
        } else {
            writeln!(text, "{}\t{}", p.source, p.target).unwrap();
        }
    }
    emit(a.output.out.as_deref(), &text)
}

fn train(cli: &Cli, a: &Train) -> Result<(), CliError> {
    let profile = load_profile(&cli.profile)?;
    let examples = dataprep::parse_examples(&read(&a.examples)?)?;
    let first: &TrainingExample = examples
        .first()
        .ok_or_else(|| CliError::Input(format!("{}: no examples", a.examples.display())))?;
    let config = NGramConfig {
        order: a.order,
        alpha: a.alpha,
        direction: first.direction,
        view: match a.view {
            ViewArg::Aligned => PromptView::Aligned,
            ViewArg::Sequence => PromptView::Sequence,
        },
        source_buckets: a.source_buckets,
    };
    let model = dataprep::train_ngram(&examples, &profile, config)?;
    model.save(&a.out)?;
    eprintln!(
        "train: {} examples, {} tokens, {} contexts",
        examples.len(),
        model.vocabulary().emittable_count() - 1,
        model.counts().len()
    );
    Ok(())
}

fn extract_boundaries(cli: &Cli, a: &ExtractBoundaries) -> Result<(), CliError> {
    let min_rest: Beats = a
        .min_rest
        .parse()
        .map_err(|_| CliError::Input(format!("bad --min-rest {:?}", a.min_rest)))?;
    let config = MelodyConfig {
        high_note_threshold: (!a.no_high_notes).then_some(a.high_note_threshold),
        min_rest,
    };
    let bytes = std::fs::read(&a.melody).map_err(|source| CliError::Io {
        path: a.melody.display().to_string(),
        source,
    })?;
    let mut text = String::new();
    for line in parse_melody_lines_with(&bytes, &config)? {
        let c = extract_constraints_with(&line, &config)?;
        if cli.jsonl {
            writeln!(text, "{}", json!({"length": c.length, "boundaries": c.required_boundaries()})).unwrap();
        } else {
            writeln!(text, "{}", c.with_rhyme(RhymeClass::Null)?).unwrap();
        }
    }
    emit(a.output.out.as_deref(), &text)
}

/// Source lines and their constraints, read from the constraint file or
/// derived from each source line with the given rhyme.
fn constrained_inputs(
    cli: &Cli,
    a: &Constrained,
    class_count: u8,
    rhyme: RhymeClass,
) -> Result<Vec<(String, ConstraintSet)>, CliError> {
    let sources = read_lines(&a.input)?;
    let constraints: Vec<ConstraintSet> = match &a.constraints {
        Some(path) => {
            let lines = read_lines(path)?;
            if lines.len() != sources.len() {
                return Err(CliError::Input(format!(
                    "{} has {} lines but {} has {}",
                    path.display(),
                    lines.len(),
                    a.input.display(),
                    sources.len()
                )));
            }
            lines
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    l.parse()
                        .map_err(|e| CliError::Input(format!("{}:{}: {e}", path.display(), i + 1)))
                })
                .collect::<Result<_, _>>()?
        }
        None => {
            let source_profile = load_profile(&a.source_profile)?;
            let uniform = RhymeDistribution::new(vec![1.0 / f64::from(class_count); usize::from(class_count)], 0.0)
                .expect("uniform prior");
            sources
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let c = constraints_from_source(s, &source_profile, &uniform, &mut line_rng(cli.seed, i))?;
                    Ok(c.with_rhyme(rhyme)?)
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    Ok(sources.into_iter().zip(constraints).collect())
}

fn rank_rhymes(cli: &Cli, a: &RankRhymes) -> Result<(), CliError> {
    let profile = load_profile(&cli.profile)?;
    let model = NGramModel::load(&a.common.model)?;
    let inputs = constrained_inputs(cli, &a.common, model.vocabulary().class_count(), RhymeClass::Null)?;
    let ranking = rank_paragraph_rhymes(&model, &inputs, placement(a.common.placement))?;
    let mut text = String::new();
    for (class, score) in ranking.ranked {
        let i = class.index().unwrap_or(0);
        let name = profile.class_name(i).unwrap_or("");
        if cli.jsonl {
            writeln!(text, "{}", json!({"rhyme": i, "name": name, "score": score})).unwrap();
        } else {
            writeln!(text, "rhy_{i}\t{name}\t{score}").unwrap();
        }
    }
    emit(a.output.out.as_deref(), &text)
}

fn translate(cli: &Cli, a: &Translate) -> Result<(), CliError> {
    let profile = load_profile(&cli.profile)?;
    let model = NGramModel::load(&a.common.model)?;
    let class_count = model.vocabulary().class_count();
    let rhyme = RhymeClass::from_index(a.rhyme)
        .filter(|_| a.rhyme <= class_count)
        .ok_or_else(|| CliError::Input(format!("--rhyme {} is not a class of this model", a.rhyme)))?;
    let inputs = constrained_inputs(cli, &a.common, class_count, rhyme)?;
    let judge: Arc<dyn BoundaryJudge> = match a.judge {
        JudgeArg::Lexicon => Arc::new(LexiconJudge::new(profile.clone())),
        JudgeArg::Token => Arc::new(TokenJudge),
    };
    let config = DecodeConfig {
        beam_size: a.beam_size,
        max_len: a.max_len,
        direction: a.direction.map_or(model.direction(), direction),
        control_mode: match a.mode {
            ModeArg::Prompt => ControlMode::Prompt,
            ModeArg::Biased => ControlMode::Biased,
        },
        hard_length: a.hard_length,
        rhyme_bonus: a.rhyme_bonus,
        boundary_bonus: a.boundary_bonus,
        judge: Some(judge),
    };
    let place = placement(a.common.placement);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let results = pool.install(|| {
        inputs
            .par_iter()
            .map(|(source, c)| beam_search(&model, source, c, place, &config))
            .collect::<Vec<_>>()
    });
    let mut text = String::new();
    for (i, (r, (_, c))) in results.into_iter().zip(&inputs).enumerate() {
        let r = r.map_err(|e| {
            log::error!("{}:{}: {e}", a.common.input.display(), i + 1);
            e
        })?;
        if cli.jsonl {
            let best = &r.candidates[0];
            let line = json!({
                "text": r.best_text,
                "constraints": c.to_string(),
                "score": best.score,
                "logprob": best.logprob,
                "length_ok": r.satisfied.length,
                "rhyme_ok": r.satisfied.rhyme,
                "boundary_ok": r.satisfied.boundary,
            });
            writeln!(text, "{line}").unwrap();
        } else {
            writeln!(text, "{}", r.best_text).unwrap();
        }
    }
    emit(a.output.out.as_deref(), &text)
}

fn percent(f: Option<Fraction>) -> Option<f64> {
    f.map(|f| 100.0 * f.value())
}

fn evaluate_cmd(cli: &Cli, a: &Evaluate) -> Result<(), CliError> {
    let profile = load_profile(&cli.profile)?;
    let hypotheses = read_lines(&a.hypotheses)?;
    let parallel = |path: &Option<std::path::PathBuf>| -> Result<Option<Vec<String>>, CliError> {
        let Some(path) = path else { return Ok(None) };
        let lines = read_lines(path)?;
        if lines.len() != hypotheses.len() {
            return Err(CliError::Input(format!(
                "{} has {} lines but {} has {}",
                path.display(),
                lines.len(),
                a.hypotheses.display(),
                hypotheses.len()
            )));
        }
        Ok(Some(lines))
    };
    let references = parallel(&a.references)?;
    let constraints = match parallel(&a.constraints)? {
        Some(lines) => Some(
            lines
                .iter()
                .map(|l| l.parse::<ConstraintSet>())
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let records: Vec<EvalRecord> = hypotheses
        .into_iter()
        .enumerate()
        .map(|(i, hypothesis)| EvalRecord {
            hypothesis,
            reference: references.as_ref().map(|r| r[i].clone()),
            constraints: constraints.as_ref().map(|c| c[i].clone()),
        })
        .collect();
    let report = evaluate(&records, &profile)?;
    let values = [
        ("length_accuracy", percent(report.length_accuracy)),
        ("rhyme_accuracy", percent(report.rhyme_accuracy)),
        ("boundary_recall", percent(report.boundary_recall)),
        ("ter", report.ter.map(|t| 100.0 * t)),
        ("bleu", report.bleu.map(|b| 100.0 * b)),
    ];
    let text = if cli.jsonl {
        let map: serde_json::Map<String, serde_json::Value> =
            values.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        format!("{}\n", serde_json::Value::Object(map))
    } else {
        values
            .iter()
            .map(|(k, v)| match v {
                Some(v) => format!("{k}\t{v:.2}\n"),
                None => format!("{k}\t-\n"),
            })
            .collect()
    };
    emit(a.output.out.as_deref(), &text)
}
