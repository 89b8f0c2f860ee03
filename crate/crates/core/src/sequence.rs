//! Sequences of AU interval events, their labels and intensities, dataset
//! ingestion/validation, and export of background-knowledge facts.
//!
//! The dataset JSON schema:
//!
//! ```json
//! {"classes": ["pain", "disgust"],
//!  "sequences": [{"id": "s1", "label": "pain",
//!                 "events": [{"e": "e1", "au": 4, "on": 10, "off": 20, "int": "c"}]}]}
//! ```
//!
//! Exported facts are one per line, `functor(args).` with lowercase
//! comma-separated arguments and no spaces, e.g.
//! `event(s1,e1,au4,10,20,c).`

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::allen::RelationConfig;
use crate::error::DataError;
use crate::facs;

/// A lowercase token usable as a constant in the fact syntax:
/// `[a-z][a-z0-9_]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Ident(String);

impl Ident {
    pub fn new(token: impl Into<String>) -> Result<Self, DataError> {
        let token = token.into();
        if Self::is_valid(&token) {
            Ok(Ident(token))
        } else {
            Err(DataError::InvalidIdentifier(token))
        }
    }

    pub fn is_valid(token: &str) -> bool {
        let mut chars = token.chars();
        match chars.next() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Ident {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let token = String::deserialize(deserializer)?;
        Ident::new(token).map_err(serde::de::Error::custom)
    }
}

/// A FACS action unit, identified by its positive code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionUnit(u32);

impl ActionUnit {
    pub fn new(code: u32) -> Result<Self, DataError> {
        if code >= 1 {
            Ok(ActionUnit(code))
        } else {
            Err(DataError::InvalidAuCode(code as u64))
        }
    }

    pub fn code(self) -> u32 {
        self.0
    }

    /// FACS label from the bundled table, e.g. "brow lowerer" for AU 4.
    pub fn name(self) -> Option<&'static str> {
        facs::au_name(self.0)
    }

    /// The constant token used in facts: `au4`, `au43`, ...
    pub fn constant(self) -> String {
        format!("au{}", self.0)
    }
}

impl fmt::Display for ActionUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "au{}", self.0)
    }
}

/// Coded intensity of an AU event: five ordered levels a < b < c < d < e,
/// or `Na` where intensity is not coded. `Na` serializes as JSON null and
/// as the constant token `na` in facts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Intensity {
    Na,
    A,
    B,
    C,
    D,
    E,
}

impl Intensity {
    pub const LEVELS: [Intensity; 5] = [
        Intensity::A,
        Intensity::B,
        Intensity::C,
        Intensity::D,
        Intensity::E,
    ];

    /// The constant token used in facts and feature names.
    pub fn token(self) -> &'static str {
        match self {
            Intensity::Na => "na",
            Intensity::A => "a",
            Intensity::B => "b",
            Intensity::C => "c",
            Intensity::D => "d",
            Intensity::E => "e",
        }
    }

    pub fn from_token(token: &str) -> Result<Self, DataError> {
        match token {
            "na" => Ok(Intensity::Na),
            "a" => Ok(Intensity::A),
            "b" => Ok(Intensity::B),
            "c" => Ok(Intensity::C),
            "d" => Ok(Intensity::D),
            "e" => Ok(Intensity::E),
            other => Err(DataError::InvalidIntensity(other.to_string())),
        }
    }
}

impl fmt::Display for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl Serialize for Intensity {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Intensity::Na => serializer.serialize_none(),
            level => serializer.serialize_str(level.token()),
        }
    }
}

impl<'de> Deserialize<'de> for Intensity {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let level: Option<String> = Option::deserialize(deserializer)?;
        match level {
            None => Ok(Intensity::Na),
            Some(token) if token != "na" => {
                Intensity::from_token(&token).map_err(serde::de::Error::custom)
            }
            Some(token) => Err(serde::de::Error::custom(DataError::InvalidIntensity(token))),
        }
    }
}

/// One AU interval within a sequence. Timestamps are non-negative frame
/// indices; the interval is half-open `[onset, offset)` with
/// `onset < offset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuEvent {
    #[serde(skip)]
    pub sequence_id: Option<Ident>,
    #[serde(rename = "e")]
    pub event_id: Ident,
    pub au: ActionUnit,
    #[serde(rename = "on")]
    pub onset: u64,
    #[serde(rename = "off")]
    pub offset: u64,
    #[serde(rename = "int", default = "default_intensity")]
    pub intensity: Intensity,
}

fn default_intensity() -> Intensity {
    Intensity::Na
}

impl AuEvent {
    /// The half-open interval `[onset, offset)`.
    pub fn interval(&self) -> crate::allen::Interval {
        crate::allen::Interval::new_unchecked(self.onset, self.offset)
    }
}

/// An identified, labeled sequence of AU events, sorted by
/// (onset, event_id).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: Ident,
    pub label: Ident,
    pub events: Vec<AuEvent>,
}

/// A validated collection of labeled sequences over a declared class set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub classes: BTreeSet<Ident>,
    pub sequences: Vec<SequenceRecord>,
}

/// Which fact families an export or a learning run works with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Attributes,
    Relations,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Attributes => "attributes",
            Mode::Relations => "relations",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Dataset {
    /// Parses and validates a dataset from its JSON representation.
    ///
    /// Malformed JSON reports the offending line and field; violated
    /// invariants (duplicate ids, degenerate intervals, unknown labels)
    /// report the sequence and event concerned. Events are normalized to
    /// the canonical (onset, event_id) order.
    pub fn parse(json: &str) -> Result<Self, DataError> {
        let mut dataset: Dataset = serde_json::from_str(json)?;
        dataset.validate_and_normalize()?;
        Ok(dataset)
    }

    pub fn from_reader(reader: impl std::io::Read) -> Result<Self, DataError> {
        let mut dataset: Dataset = serde_json::from_reader(reader)?;
        dataset.validate_and_normalize()?;
        Ok(dataset)
    }

    /// Builds a dataset from parts, applying the same validation as
    /// [`Dataset::parse`].
    pub fn new(
        classes: BTreeSet<Ident>,
        sequences: Vec<SequenceRecord>,
    ) -> Result<Self, DataError> {
        let mut dataset = Dataset { classes, sequences };
        dataset.validate_and_normalize()?;
        Ok(dataset)
    }

    fn validate_and_normalize(&mut self) -> Result<(), DataError> {
        if self.classes.len() < 2 {
            return Err(DataError::TooFewClasses(self.classes.len()));
        }
        let mut seen_sequences = BTreeSet::new();
        for sequence in &mut self.sequences {
            if !seen_sequences.insert(sequence.id.clone()) {
                return Err(DataError::DuplicateSequenceId(sequence.id.to_string()));
            }
            if !self.classes.contains(&sequence.label) {
                return Err(DataError::UnknownLabel {
                    sequence: sequence.id.to_string(),
                    label: sequence.label.to_string(),
                });
            }
            if sequence.events.is_empty() {
                return Err(DataError::EmptySequence(sequence.id.to_string()));
            }
            let mut seen_events = BTreeSet::new();
            for event in &mut sequence.events {
                event.sequence_id = Some(sequence.id.clone());
                if event.onset >= event.offset {
                    return Err(DataError::DegenerateEvent {
                        sequence: sequence.id.to_string(),
                        event: event.event_id.to_string(),
                        onset: event.onset,
                        offset: event.offset,
                    });
                }
                if !seen_events.insert(event.event_id.clone()) {
                    return Err(DataError::DuplicateEventId {
                        sequence: sequence.id.to_string(),
                        event: event.event_id.to_string(),
                    });
                }
            }
            sequence
                .events
                .sort_by(|a, b| (a.onset, &a.event_id).cmp(&(b.onset, &b.event_id)));
        }
        Ok(())
    }

    /// Serializes back to the dataset JSON schema. `parse(render(d))`
    /// yields a dataset structurally equal to `d`.
    pub fn render(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("dataset serializes");
        out.push('\n');
        out
    }

    pub fn sequence(&self, id: &Ident) -> Option<&SequenceRecord> {
        self.sequences.iter().find(|s| &s.id == id)
    }

    /// Sequence indices split into positives (label == class) and
    /// negatives (the rest), in dataset order.
    pub fn split(&self, class: &Ident) -> (Vec<usize>, Vec<usize>) {
        let mut positives = Vec::new();
        let mut negatives = Vec::new();
        for (index, sequence) in self.sequences.iter().enumerate() {
            if &sequence.label == class {
                positives.push(index);
            } else {
                negatives.push(index);
            }
        }
        (positives, negatives)
    }

    /// Emits the background knowledge as fact text, one fact per line.
    ///
    /// Facts are ordered by sequence id; within a sequence, event facts in
    /// (onset, event_id) order, then (in relations mode) relation facts in
    /// canonical enumeration order, deduplicated to one fact per
    /// (relation, au1, au2).
    pub fn export_background_knowledge(&self, mode: Mode) -> String {
        self.export_background_knowledge_with(mode, &RelationConfig::default())
    }

    pub fn export_background_knowledge_with(&self, mode: Mode, config: &RelationConfig) -> String {
        let mut ordered: Vec<&SequenceRecord> = self.sequences.iter().collect();
        ordered.sort_by(|a, b| a.id.cmp(&b.id));
        let mut out = String::new();
        for sequence in ordered {
            for event in &sequence.events {
                out.push_str(&render_event_fact(&sequence.id, event));
                out.push('\n');
            }
            if mode == Mode::Relations {
                let facts = crate::allen::enumerate_relations(sequence, config);
                let mut seen = BTreeSet::new();
                for fact in &facts {
                    let line = fact.render();
                    if seen.insert(line.clone()) {
                        out.push_str(&line);
                        out.push('\n');
                    }
                }
            }
        }
        out
    }
}

/// Renders one event fact line: `event(s1,e1,au4,10,20,c).`
pub fn render_event_fact(sequence_id: &Ident, event: &AuEvent) -> String {
    format!(
        "event({},{},{},{},{},{}).",
        sequence_id,
        event.event_id,
        event.au.constant(),
        event.onset,
        event.offset,
        event.intensity.token()
    )
}

/// A per-sequence map from AU to its events' occurrence indices: the k-th
/// event of an AU (canonical order) has occurrence index k, starting at 1.
pub fn occurrence_indices(sequence: &SequenceRecord) -> Vec<u32> {
    let mut counts: BTreeMap<ActionUnit, u32> = BTreeMap::new();
    sequence
        .events
        .iter()
        .map(|event| {
            let count = counts.entry(event.au).or_insert(0);
            *count += 1;
            *count
        })
        .collect()
}
