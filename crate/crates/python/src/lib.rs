//! Python module `singable`.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use singable::dataprep;
use singable::decode::{beam_search, BoundaryJudge, ControlMode, DecodeConfig, LexiconJudge};
use singable::melody::{extract_constraints_with, parse_melody_lines_with, Beats, MelodyConfig};
use singable::metrics::{self, EvalRecord};
use singable::model::{Direction, NGramConfig, NGramModel, PromptView, SequenceModel};
use singable::prompts::{self, ConstraintSet, PromptPlacement};
use singable::ranking::rank_paragraph_rhymes;
use singable::{LanguageProfile, RhymeClass};

create_exception!(singable, SingableError, PyValueError);

fn err(e: impl std::fmt::Display) -> PyErr {
    SingableError::new_err(e.to_string())
}

fn rhyme(index: u8) -> PyResult<RhymeClass> {
    RhymeClass::from_index(index).ok_or_else(|| err(format!("rhyme class {index} is out of range")))
}

/// Phonology of one language: normalization, syllables, rhyme classes.
#[pyclass(name = "Profile", frozen, from_py_object)]
#[derive(Clone)]
struct PyProfile(Arc<LanguageProfile>);

#[pymethods]
impl PyProfile {
    /// `"zh-cmn"`, `"en"`, or the path of a profile file.
    #[new]
    #[pyo3(signature = (name = "zh-cmn"))]
    fn new(name: &str) -> PyResult<Self> {
        let profile = match name {
            "zh-cmn" => LanguageProfile::mandarin().clone(),
            "en" => LanguageProfile::english().clone(),
            path => LanguageProfile::from_path(path).map_err(err)?,
        };
        Ok(Self(Arc::new(profile)))
    }

    #[getter]
    fn id(&self) -> &str {
        self.0.id()
    }

    #[getter]
    fn class_count(&self) -> u8 {
        self.0.class_count()
    }

    fn class_name(&self, class: u8) -> Option<String> {
        self.0.class_name(class).map(str::to_string)
    }

    fn normalize(&self, text: &str) -> String {
        self.0.normalize(text)
    }

    fn count_syllables(&self, text: &str) -> PyResult<usize> {
        self.0.count_syllables(text).map_err(err)
    }

    /// Rhyme class index of a word's last syllable; `None` if unknown.
    fn rhyme_class(&self, word: &str) -> PyResult<Option<u8>> {
        Ok(self.0.classify_rhyme(word).map_err(err)?.index())
    }

    /// `(words, syllables per word, boundary positions)`.
    fn segment(&self, text: &str) -> PyResult<(Vec<String>, Vec<usize>, Vec<usize>)> {
        let s = self.0.segment_words(text).map_err(err)?;
        Ok((
            s.tokens().to_vec(),
            s.syllables_per_token().to_vec(),
            s.word_boundary_positions().iter().copied().collect(),
        ))
    }

    fn __repr__(&self) -> String {
        format!("Profile({:?})", self.0.id())
    }
}

/// Length, end rhyme and required word boundaries for one line.
#[pyclass(name = "Constraints", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyConstraints(ConstraintSet);

#[pymethods]
impl PyConstraints {
    #[new]
    #[pyo3(signature = (length, rhyme = 0, boundaries = Vec::new()))]
    fn new(length: usize, rhyme: u8, boundaries: Vec<usize>) -> PyResult<Self> {
        ConstraintSet::new(length, self::rhyme(rhyme)?, boundaries).map(Self).map_err(err)
    }

    /// Parses a line like `L=7 R=3 B=2,5`.
    #[staticmethod]
    fn parse(line: &str) -> PyResult<Self> {
        line.parse().map(Self).map_err(err)
    }

    #[getter]
    fn length(&self) -> usize {
        self.0.length()
    }

    #[getter]
    fn rhyme(&self) -> Option<u8> {
        self.0.rhyme().index()
    }

    #[getter]
    fn boundaries(&self) -> Vec<usize> {
        self.0.required_boundaries().collect()
    }

    fn with_rhyme(&self, rhyme: u8) -> PyResult<Self> {
        self.0.clone().with_rhyme(self::rhyme(rhyme)?).map(Self).map_err(err)
    }

    /// Same constraints counted from the end of the line.
    fn mirrored(&self) -> Self {
        Self(self.0.mirrored())
    }

    /// Prompt tokens in the given placement.
    #[pyo3(signature = (placement = "dec-pref"))]
    fn prompt(&self, placement: &str) -> PyResult<Vec<String>> {
        let placement: PromptPlacement = placement.parse().map_err(err)?;
        let rendered = prompts::render_prompt(&self.0, placement);
        Ok(rendered.sequence().tokens().iter().map(ToString::to_string).collect())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Constraints.parse({:?})", self.0.to_string())
    }
}

/// Best hypothesis of a constrained search.
#[pyclass(name = "Translation", frozen, get_all)]
struct PyTranslation {
    text: String,
    score: f64,
    logprob: f64,
    length_ok: bool,
    rhyme_ok: Option<bool>,
    boundary_ok: Option<bool>,
}

#[pymethods]
impl PyTranslation {
    fn __repr__(&self) -> String {
        format!("Translation(text={:?}, score={})", self.text, self.score)
    }
}

/// Prompt-conditioned n-gram model.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    model: NGramModel,
    placement: PromptPlacement,
}

#[pymethods]
impl PyModel {
    /// Builds training examples from `(source, target)` pairs and fits a model.
    #[staticmethod]
    #[pyo3(signature = (
        pairs, profile, seed = 1, direction = "reverse", placement = "dec-pref",
        null_rhyme_rate = 1.0 / 15.0, order = 2, alpha = 0.01, view = "aligned", source_buckets = 1024
    ))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        pairs: Vec<(String, String)>,
        profile: &PyProfile,
        seed: u64,
        direction: &str,
        placement: &str,
        null_rhyme_rate: f64,
        order: usize,
        alpha: f64,
        view: &str,
        source_buckets: u32,
    ) -> PyResult<Self> {
        let direction: Direction = direction.parse().map_err(err)?;
        let placement: PromptPlacement = placement.parse().map_err(err)?;
        let view = match view {
            "aligned" => PromptView::Aligned,
            "sequence" => PromptView::Sequence,
            other => return Err(err(format!("unknown view {other:?}"))),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = dataprep::make_training_set(&pairs, &profile.0, placement, direction, null_rhyme_rate, &mut rng)
            .map_err(err)?;
        let config = NGramConfig { order, alpha, direction, view, source_buckets };
        let model = dataprep::train_ngram(&set.examples, &profile.0, config).map_err(err)?;
        Ok(Self { model, placement })
    }

    #[staticmethod]
    #[pyo3(signature = (path, placement = "dec-pref"))]
    fn load(path: &str, placement: &str) -> PyResult<Self> {
        let placement = placement.parse().map_err(err)?;
        Ok(Self { model: NGramModel::load(path).map_err(err)?, placement })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.model.save(path).map_err(err)
    }

    #[getter]
    fn direction(&self) -> String {
        self.model.direction().to_string()
    }

    #[getter]
    fn vocabulary_size(&self) -> usize {
        self.model.vocabulary().len()
    }

    /// Beam search under `constraints`. `profile` enables boundary tracking.
    #[pyo3(signature = (
        source, constraints, beam_size = 5, max_len = 30, hard_length = false,
        mode = "prompt", rhyme_bonus = 0.0, boundary_bonus = 0.0, profile = None
    ))]
    #[allow(clippy::too_many_arguments)]
    fn translate(
        &self,
        py: Python<'_>,
        source: &str,
        constraints: &PyConstraints,
        beam_size: usize,
        max_len: usize,
        hard_length: bool,
        mode: &str,
        rhyme_bonus: f64,
        boundary_bonus: f64,
        profile: Option<&PyProfile>,
    ) -> PyResult<PyTranslation> {
        let control_mode = match mode {
            "prompt" => ControlMode::Prompt,
            "biased" => ControlMode::Biased,
            other => return Err(err(format!("unknown mode {other:?}"))),
        };
        let judge = profile.map(|p| Arc::new(LexiconJudge::new(p.0.clone())) as Arc<dyn BoundaryJudge>);
        let config = DecodeConfig {
            beam_size,
            max_len,
            direction: self.model.direction(),
            control_mode,
            hard_length,
            rhyme_bonus,
            boundary_bonus,
            judge,
        };
        let result = py
            .detach(|| beam_search(&self.model, source, &constraints.0, self.placement, &config))
            .map_err(err)?;
        let best = &result.candidates[0];
        Ok(PyTranslation {
            text: result.best_text,
            score: best.score,
            logprob: best.logprob,
            length_ok: result.satisfied.length,
            rhyme_ok: result.satisfied.rhyme,
            boundary_ok: result.satisfied.boundary,
        })
    }

    /// `(class, score)` pairs by descending score for a paragraph.
    fn rank_rhymes(&self, sources: Vec<String>, constraints: Vec<PyConstraints>) -> PyResult<Vec<(u8, f64)>> {
        if sources.len() != constraints.len() {
            return Err(err("sources and constraints differ in length"));
        }
        let paragraph: Vec<(String, ConstraintSet)> = sources.into_iter().zip(constraints.into_iter().map(|c| c.0)).collect();
        let ranking = rank_paragraph_rhymes(&self.model, &paragraph, self.placement).map_err(err)?;
        Ok(ranking.ranked.iter().filter_map(|(c, s)| c.index().map(|i| (i, *s))).collect())
    }
}

/// Length and boundary constraints of each line of a melody-json document.
#[pyfunction]
#[pyo3(signature = (melody_json, rhyme = 0, high_note_threshold = Some(3), min_rest = "0"))]
fn extract_boundaries(
    melody_json: &str,
    rhyme: u8,
    high_note_threshold: Option<i32>,
    min_rest: &str,
) -> PyResult<Vec<PyConstraints>> {
    let min_rest: Beats = min_rest.parse().map_err(|_| err(format!("bad min_rest {min_rest:?}")))?;
    let config = MelodyConfig { high_note_threshold, min_rest };
    let rhyme = self::rhyme(rhyme)?;
    parse_melody_lines_with(melody_json.as_bytes(), &config)
        .map_err(err)?
        .iter()
        .map(|line| {
            let c = extract_constraints_with(line, &config).map_err(err)?;
            c.with_rhyme(rhyme).map(PyConstraints).map_err(err)
        })
        .collect()
}

/// Constraints read off a target line, with sampled boundaries.
#[pyfunction]
#[pyo3(signature = (target, profile, seed = 1))]
fn constraints_from_target(target: &str, profile: &PyProfile, seed: u64) -> PyResult<PyConstraints> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    prompts::constraints_from_target(target, &profile.0, &mut rng).map(PyConstraints).map_err(err)
}

/// Masks one span of a line; returns `(corrupted, original)`.
#[pyfunction]
#[pyo3(signature = (line, profile, seed = 1))]
fn corrupt(line: &str, profile: &PyProfile, seed: u64) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = dataprep::corrupt_for_denoising(line, &profile.0, &mut rng);
    (c.corrupted, c.original)
}

#[pyfunction]
fn ter(hypothesis: &str, reference: &str) -> PyResult<f64> {
    metrics::ter(hypothesis, reference).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (hypothesis, reference, max_n = 4))]
fn bleu(hypothesis: &str, reference: &str, max_n: usize) -> f64 {
    metrics::bleu(hypothesis, reference, max_n)
}

/// Corpus scores as fractions in [0, 1]; missing entries are `None`.
#[pyfunction]
#[pyo3(signature = (hypotheses, profile, references = None, constraints = None))]
fn evaluate(
    hypotheses: Vec<String>,
    profile: &PyProfile,
    references: Option<Vec<String>>,
    constraints: Option<Vec<PyConstraints>>,
) -> PyResult<Vec<(String, Option<f64>)>> {
    let n = hypotheses.len();
    if references.as_ref().is_some_and(|r| r.len() != n) || constraints.as_ref().is_some_and(|c| c.len() != n) {
        return Err(err("hypotheses, references and constraints differ in length"));
    }
    let records: Vec<EvalRecord> = hypotheses
        .into_iter()
        .enumerate()
        .map(|(i, hypothesis)| EvalRecord {
            hypothesis,
            reference: references.as_ref().map(|r| r[i].clone()),
            constraints: constraints.as_ref().map(|c| c[i].0.clone()),
        })
        .collect();
    let report = metrics::evaluate(&records, &profile.0).map_err(err)?;
    Ok(vec![
        ("bleu".into(), report.bleu),
        ("boundary_recall".into(), report.boundary_recall.map(|f| f.value())),
        ("length_accuracy".into(), report.length_accuracy.map(|f| f.value())),
        ("rhyme_accuracy".into(), report.rhyme_accuracy.map(|f| f.value())),
        ("ter".into(), report.ter),
    ])
}

#[pymodule(name = "singable")]
fn python_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SingableError", m.py().get_type::<SingableError>())?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyConstraints>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyTranslation>()?;
    m.add_function(wrap_pyfunction!(extract_boundaries, m)?)?;
    m.add_function(wrap_pyfunction!(constraints_from_target, m)?)?;
    m.add_function(wrap_pyfunction!(corrupt, m)?)?;
    m.add_function(wrap_pyfunction!(ter, m)?)?;
    m.add_function(wrap_pyfunction!(bleu, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
