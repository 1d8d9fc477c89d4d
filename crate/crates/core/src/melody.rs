//! Melodies and the word-boundary constraints they imply.
//!
//! A lyric line needs a word boundary wherever the melody pauses and right
//! before a highlighted note (a downbeat or a high note).

use num_rational::Ratio;
use serde::Deserialize;

use crate::phonology::RhymeClass;
use crate::prompts::{ConstraintSet, PromptError};

pub type Beats = Ratio<u32>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MelodyError {
    #[error("melody has no pitched note")]
    EmptyMelody,
    #[error("note {index} of line {line} has zero duration")]
    ZeroDurationNote { line: usize, index: usize },
    #[error("malformed melody document: {0}")]
    MalformedDocument(String),
}

/// One note or rest. `pitch` is a semitone index, `None` for a rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Note {
    pub pitch: Option<i32>,
    pub duration: Beats,
    pub is_downbeat: bool,
    pub is_highlighted: bool,
}

impl Note {
    pub fn pitched(pitch: i32, duration: Beats) -> Self {
        Self {
            pitch: Some(pitch),
            duration,
            is_downbeat: false,
            is_highlighted: false,
        }
    }

    pub fn rest(duration: Beats) -> Self {
        Self {
            pitch: None,
            duration,
            is_downbeat: false,
            is_highlighted: false,
        }
    }

    pub fn downbeat(mut self) -> Self {
        self.is_downbeat = true;
        self.is_highlighted = true;
        self
    }

    pub fn highlighted(mut self) -> Self {
        self.is_highlighted = true;
        self
    }

    pub fn is_rest(&self) -> bool {
        self.pitch.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MelodyLine {
    notes: Vec<Note>,
}

impl MelodyLine {
    pub fn new(notes: Vec<Note>) -> Result<Self, MelodyError> {
        if let Some(index) = notes.iter().position(|n| n.duration == Ratio::from_integer(0)) {
            return Err(MelodyError::ZeroDurationNote { line: 0, index });
        }
        Ok(Self { notes })
    }

    pub fn notes(&self) -> &[Note] {
        &self.notes
    }

    /// Number of notes that carry a syllable.
    pub fn syllable_slots(&self) -> usize {
        self.notes.iter().filter(|n| !n.is_rest()).count()
    }

    /// Marks every pitched note that is at least `threshold` semitones above
    /// its nearest pitched neighbours. Rests are skipped when looking for
    /// neighbours, and a missing neighbour imposes no condition.
    pub fn mark_high_notes(&mut self, threshold: i32) {
        let pitched: Vec<(usize, i32)> = self
            .notes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.pitch.map(|p| (i, p)))
            .collect();
        if pitched.len() < 2 {
            return;
        }
        for k in 0..pitched.len() {
            let (i, p) = pitched[k];
            let above_prev = k == 0 || p - pitched[k - 1].1 >= threshold;
            let above_next = k + 1 == pitched.len() || p - pitched[k + 1].1 >= threshold;
            if above_prev && above_next {
                self.notes[i].is_highlighted = true;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MelodyConfig {
    /// Semitone margin that makes a local maximum a high note; `None`
    /// disables high-note detection.
    pub high_note_threshold: Option<i32>,
    /// Shortest rest (summed over consecutive rests) that counts as a pause.
    pub min_rest: Beats,
}

impl Default for MelodyConfig {
    fn default() -> Self {
        Self {
            high_note_threshold: Some(3),
            min_rest: Ratio::new_raw(0, 1),
        }
    }
}

/// Length and required boundaries, without a rhyme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryConstraints {
    pub length: usize,
    pub boundary: Vec<bool>,
}

impl BoundaryConstraints {
    pub fn required_boundaries(&self) -> Vec<usize> {
        self.boundary
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn with_rhyme(&self, rhyme: RhymeClass) -> Result<ConstraintSet, PromptError> {
        ConstraintSet::from_bits(rhyme, self.boundary.clone())
    }
}

pub fn extract_constraints(melody: &MelodyLine) -> Result<BoundaryConstraints, MelodyError> {
    extract_constraints_with(melody, &MelodyConfig::default())
}

pub fn extract_constraints_with(
    melody: &MelodyLine,
    config: &MelodyConfig,
) -> Result<BoundaryConstraints, MelodyError> {
    let length = melody.syllable_slots();
    if length == 0 {
        return Err(MelodyError::EmptyMelody);
    }
    let mut boundary = vec![false; length];
    let notes = melody.notes();
    let mut p = 0;
    let mut i = 0;
    while i < notes.len() {
        if notes[i].is_rest() {
            let mut rest = Ratio::from_integer(0);
            while i < notes.len() && notes[i].is_rest() {
                rest += notes[i].duration;
                i += 1;
            }
            if p >= 1 && p < length && rest >= config.min_rest {
                boundary[p - 1] = true;
            }
            continue;
        }
        if notes[i].is_highlighted && p >= 1 {
            boundary[p - 1] = true;
        }
        p += 1;
        i += 1;
    }
    Ok(BoundaryConstraints { length, boundary })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    time_signature: String,
    #[serde(default)]
    notes: Option<Vec<RawNote>>,
    #[serde(default)]
    lines: Option<Vec<Vec<RawNote>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNote {
    pitch: Option<i32>,
    beats: String,
    #[serde(default)]
    downbeat: Option<bool>,
    #[serde(default)]
    tie: bool,
}

fn malformed(msg: impl Into<String>) -> MelodyError {
    MelodyError::MalformedDocument(msg.into())
}

fn parse_beats(s: &str) -> Result<Beats, MelodyError> {
    s.trim()
        .parse::<Beats>()
        .map_err(|_| malformed(format!("bad duration {s:?}")))
}

/// Parses a one-line melody-json document.
pub fn parse_melody(bytes: &[u8]) -> Result<MelodyLine, MelodyError> {
    let mut lines = parse_melody_lines_with(bytes, &MelodyConfig::default())?;
    if lines.len() != 1 {
        return Err(malformed(format!("expected one line, found {}", lines.len())));
    }
    Ok(lines.remove(0))
}

pub fn parse_melody_lines(bytes: &[u8]) -> Result<Vec<MelodyLine>, MelodyError> {
    parse_melody_lines_with(bytes, &MelodyConfig::default())
}

/// Parses a melody-json document with either a `notes` array or a `lines`
/// array of note arrays. Beat positions run on across lines, so downbeats
/// are inferred from the running onset.
pub fn parse_melody_lines_with(
    bytes: &[u8],
    config: &MelodyConfig,
) -> Result<Vec<MelodyLine>, MelodyError> {
    let doc: RawDocument =
        serde_json::from_slice(bytes).map_err(|e| malformed(e.to_string()))?;
    let (num, _) = doc
        .time_signature
        .split_once('/')
        .and_then(|(n, d)| Some((n.trim().parse::<u32>().ok()?, d.trim().parse::<u32>().ok()?)))
        .filter(|&(n, d)| n > 0 && d > 0)
        .ok_or_else(|| malformed(format!("bad time signature {:?}", doc.time_signature)))?;
    let bar = Ratio::from_integer(num);

    let raw_lines = match (doc.notes, doc.lines) {
        (Some(notes), None) => vec![notes],
        (None, Some(lines)) => lines,
        _ => return Err(malformed("expected exactly one of `notes` or `lines`")),
    };
    if raw_lines.is_empty() {
        return Err(malformed("no lines"));
    }

    let mut onset: Beats = Ratio::from_integer(0);
    let mut out = Vec::with_capacity(raw_lines.len());
    for (line_no, raw) in raw_lines.into_iter().enumerate() {
        let mut notes: Vec<Note> = Vec::with_capacity(raw.len());
        for (index, rn) in raw.into_iter().enumerate() {
            let duration = parse_beats(&rn.beats)?;
            if duration == Ratio::from_integer(0) {
                return Err(MelodyError::ZeroDurationNote { line: line_no, index });
            }
            if rn.tie {
                match notes.last_mut() {
                    Some(prev) if prev.pitch.is_some() && rn.pitch.is_some() => {
                        prev.duration += duration;
                        onset += duration;
                        continue;
                    }
                    _ => {
                        return Err(malformed(format!(
                            "note {index} of line {line_no} is tied but does not follow a pitched note"
                        )))
                    }
                }
            }
            let is_downbeat = rn.downbeat.unwrap_or((onset % bar) == Ratio::from_integer(0));
            notes.push(Note {
                pitch: rn.pitch,
                duration,
                is_downbeat,
                is_highlighted: is_downbeat && rn.pitch.is_some(),
            });
            onset += duration;
        }
        let mut line = MelodyLine { notes };
        if let Some(t) = config.high_note_threshold {
            line.mark_high_notes(t);
        }
        out.push(line);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: u32) -> Beats {
        Ratio::from_integer(n)
    }

    fn n() -> Note {
        Note::pitched(60, b(1))
    }

    #[test]
    fn pause_rule() {
        let m = MelodyLine::new(vec![n(), n(), Note::rest(b(1)), n(), n()]).unwrap();
        let c = extract_constraints(&m).unwrap();
        assert_eq!(c.length, 4);
        assert_eq!(c.required_boundaries(), [2]);
    }

    #[test]
    fn downbeat_rule() {
        let m = MelodyLine::new(vec![n(), n().downbeat(), n()]).unwrap();
        let c = extract_constraints(&m).unwrap();
        assert_eq!(c.length, 3);
        assert_eq!(c.required_boundaries(), [1]);
    }

    #[test]
    fn single_note_and_empty() {
        let c = extract_constraints(&MelodyLine::new(vec![n()]).unwrap()).unwrap();
        assert_eq!(c.length, 1);
        assert!(c.required_boundaries().is_empty());
        let rests = MelodyLine::new(vec![Note::rest(b(2))]).unwrap();
        assert_eq!(extract_constraints(&rests), Err(MelodyError::EmptyMelody));
    }

    #[test]
    fn leading_and_trailing_rests_are_ignored() {
        let m = MelodyLine::new(vec![Note::rest(b(1)), n(), n(), Note::rest(b(1))]).unwrap();
        let c = extract_constraints(&m).unwrap();
        assert_eq!(c.boundary, [false, false]);
    }

    #[test]
    fn short_rests_filtered_by_threshold() {
        let m = MelodyLine::new(vec![n(), Note::rest(Ratio::new(1, 4)), n(), Note::rest(b(1)), n()])
            .unwrap();
        let config = MelodyConfig {
            min_rest: Ratio::new(1, 2),
            ..MelodyConfig::default()
        };
        assert_eq!(extract_constraints_with(&m, &config).unwrap().required_boundaries(), [2]);
        assert_eq!(extract_constraints(&m).unwrap().required_boundaries(), [1, 2]);
    }

    #[test]
    fn high_notes() {
        let mut m = MelodyLine::new(vec![
            Note::pitched(60, b(1)),
            Note::pitched(64, b(1)),
            Note::rest(b(1)),
            Note::pitched(61, b(1)),
            Note::pitched(62, b(1)),
        ])
        .unwrap();
        m.mark_high_notes(3);
        let flags: Vec<bool> = m.notes().iter().map(|n| n.is_highlighted).collect();
        assert_eq!(flags, [false, true, false, false, false]);
    }

    #[test]
    fn parse_minimal_document() {
        let doc = br#"{"time_signature":"4/4","notes":[
            {"pitch":60,"beats":"1"},{"pitch":62,"beats":"1"},{"pitch":64,"beats":"1/2"}]}"#;
        let m = parse_melody(doc).unwrap();
        assert_eq!(m.notes().len(), 3);
        assert!(m.notes()[0].is_downbeat);
        assert!(!m.notes()[1].is_downbeat);
    }

    #[test]
    fn parse_rest_and_errors() {
        let doc = br#"{"time_signature":"4/4","notes":[
            {"pitch":60,"beats":"1"},{"pitch":null,"beats":"1"},{"pitch":64,"beats":"1"}]}"#;
        assert_eq!(parse_melody(doc).unwrap().syllable_slots(), 2);

        let zero = br#"{"time_signature":"4/4","notes":[{"pitch":60,"beats":"0/1"}]}"#;
        assert_eq!(
            parse_melody(zero),
            Err(MelodyError::ZeroDurationNote { line: 0, index: 0 })
        );
        for bad in [
            &br#"{"notes":[]}"#[..],
            br#"{"time_signature":"4","notes":[]}"#,
            br#"{"time_signature":"4/4","notes":[{"pitch":60,"beats":"x"}]}"#,
            br#"{"time_signature":"4/4","notes":[{"pitch":60,"beats":"1","tie":true}]}"#,
            b"not json",
        ] {
            assert!(matches!(parse_melody(bad), Err(MelodyError::MalformedDocument(_))));
        }
    }

    #[test]
    fn ties_merge_into_one_slot() {
        let doc = br#"{"time_signature":"4/4","notes":[
            {"pitch":60,"beats":"1"},{"pitch":62,"beats":"3"},{"pitch":62,"beats":"1","tie":true},
            {"pitch":60,"beats":"1"}]}"#;
        let m = parse_melody(doc).unwrap();
        assert_eq!(m.syllable_slots(), 3);
        assert_eq!(m.notes()[1].duration, b(4));
        // The note after the tie starts on beat 6, not a downbeat.
        assert!(!m.notes()[2].is_downbeat);
    }

    #[test]
    fn onsets_run_across_lines() {
        let doc = br#"{"time_signature":"3/4","lines":[
            [{"pitch":60,"beats":"1"},{"pitch":60,"beats":"1"}],
            [{"pitch":60,"beats":"1"},{"pitch":60,"beats":"1"}]]}"#;
        let lines = parse_melody_lines(doc).unwrap();
        assert_eq!(lines.len(), 2);
        assert!(!lines[1].notes()[0].is_downbeat);
        assert!(lines[1].notes()[1].is_downbeat);
        assert!(parse_melody(doc).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn line() -> impl Strategy<Value = MelodyLine> {
            proptest::collection::vec(
                (proptest::option::weighted(0.8, 48i32..84), 1u32..4, any::<bool>()),
                1..16,
            )
            .prop_map(|raw| {
                let mut notes: Vec<Note> = raw
                    .into_iter()
                    .map(|(pitch, d, down)| {
                        let note = Note { pitch, duration: b(d), is_downbeat: false, is_highlighted: false };
                        if down && pitch.is_some() { note.downbeat() } else { note }
                    })
                    .collect();
                if notes.iter().all(Note::is_rest) {
                    notes.push(Note::pitched(60, b(1)));
                }
                let mut m = MelodyLine::new(notes).unwrap();
                m.mark_high_notes(3);
                m
            })
        }

        proptest! {
            #[test]
            fn length_and_interior(m in line()) {
                let c = extract_constraints(&m).unwrap();
                prop_assert_eq!(c.length, m.syllable_slots());
                prop_assert!(c.required_boundaries().iter().all(|&p| p >= 1 && p < c.length));
            }

            #[test]
            fn trailing_rest_changes_nothing(m in line(), d in 1u32..4) {
                let before = extract_constraints(&m).unwrap();
                let mut notes = m.notes().to_vec();
                notes.push(Note::rest(b(d)));
                let after = extract_constraints(&MelodyLine::new(notes).unwrap()).unwrap();
                prop_assert_eq!(before, after);
            }
        }
    }
}
