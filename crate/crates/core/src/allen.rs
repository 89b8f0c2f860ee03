//! Allen's interval algebra over half-open integer intervals: classifying
//! the relation between two event intervals and enumerating relation facts
//! for a whole sequence.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::sequence::{occurrence_indices, ActionUnit, Ident, SequenceRecord};

/// A half-open interval `[on, off)` over non-negative integer frames,
/// with `on < off`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub on: u64,
    pub off: u64,
}

impl Interval {
    pub fn new(on: u64, off: u64) -> Result<Self, DataError> {
        if on < off {
            Ok(Interval { on, off })
        } else {
            Err(DataError::DegenerateInterval {
                onset: on,
                offset: off,
            })
        }
    }

    /// Constructs without the `on < off` check, for endpoints already
    /// validated elsewhere.
    pub fn new_unchecked(on: u64, off: u64) -> Self {
        Interval { on, off }
    }
}

/// One of the 13 mutually exclusive, jointly exhaustive relations between
/// two well-formed intervals. `converse(converse(r)) == r` for all tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllenRelation {
    Before,
    Meets,
    Overlaps,
    Starts,
    During,
    Finishes,
    Equals,
    After,
    MetBy,
    OverlappedBy,
    StartedBy,
    Contains,
    FinishedBy,
}

impl AllenRelation {
    pub const ALL: [AllenRelation; 13] = [
        AllenRelation::Before,
        AllenRelation::Meets,
        AllenRelation::Overlaps,
        AllenRelation::Starts,
        AllenRelation::During,
        AllenRelation::Finishes,
        AllenRelation::Equals,
        AllenRelation::After,
        AllenRelation::MetBy,
        AllenRelation::OverlappedBy,
        AllenRelation::StartedBy,
        AllenRelation::Contains,
        AllenRelation::FinishedBy,
    ];

    /// The seven tags kept after canonical pair ordering.
    pub const FORWARD: [AllenRelation; 7] = [
        AllenRelation::Before,
        AllenRelation::Meets,
        AllenRelation::Overlaps,
        AllenRelation::Starts,
        AllenRelation::During,
        AllenRelation::Finishes,
        AllenRelation::Equals,
    ];

    pub fn converse(self) -> AllenRelation {
        match self {
            AllenRelation::Before => AllenRelation::After,
            AllenRelation::Meets => AllenRelation::MetBy,
            AllenRelation::Overlaps => AllenRelation::OverlappedBy,
            AllenRelation::Starts => AllenRelation::StartedBy,
            AllenRelation::During => AllenRelation::Contains,
            AllenRelation::Finishes => AllenRelation::FinishedBy,
            AllenRelation::Equals => AllenRelation::Equals,
            AllenRelation::After => AllenRelation::Before,
            AllenRelation::MetBy => AllenRelation::Meets,
            AllenRelation::OverlappedBy => AllenRelation::Overlaps,
            AllenRelation::StartedBy => AllenRelation::Starts,
            AllenRelation::Contains => AllenRelation::During,
            AllenRelation::FinishedBy => AllenRelation::Finishes,
        }
    }

    pub fn is_forward(self) -> bool {
        matches!(
            self,
            AllenRelation::Before
                | AllenRelation::Meets
                | AllenRelation::Overlaps
                | AllenRelation::Starts
                | AllenRelation::During
                | AllenRelation::Finishes
                | AllenRelation::Equals
        )
    }

    /// The lowercase tag used as the fact functor.
    pub fn tag(self) -> &'static str {
        match self {
            AllenRelation::Before => "before",
            AllenRelation::Meets => "meets",
            AllenRelation::Overlaps => "overlaps",
            AllenRelation::Starts => "starts",
            AllenRelation::During => "during",
            AllenRelation::Finishes => "finishes",
            AllenRelation::Equals => "equals",
            AllenRelation::After => "after",
            AllenRelation::MetBy => "met_by",
            AllenRelation::OverlappedBy => "overlapped_by",
            AllenRelation::StartedBy => "started_by",
            AllenRelation::Contains => "contains",
            AllenRelation::FinishedBy => "finished_by",
        }
    }

    pub fn from_tag(tag: &str) -> Option<AllenRelation> {
        Self::ALL.iter().copied().find(|r| r.tag() == tag)
    }
}

impl fmt::Display for AllenRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Classifies the relation of `a` against `b` by endpoint comparison.
/// Exactly one tag holds for any pair of well-formed intervals, and
/// `classify(b, a) == classify(a, b).converse()`.
pub fn classify(a: Interval, b: Interval) -> AllenRelation {
    use std::cmp::Ordering::*;
    match (a.on.cmp(&b.on), a.off.cmp(&b.off)) {
        (Equal, Equal) => AllenRelation::Equals,
        (Equal, Less) => AllenRelation::Starts,
        (Equal, Greater) => AllenRelation::StartedBy,
        (Less, Equal) => AllenRelation::FinishedBy,
        (Greater, Equal) => AllenRelation::Finishes,
        (Less, Less) => {
            if a.off < b.on {
                AllenRelation::Before
            } else if a.off == b.on {
                AllenRelation::Meets
            } else {
                AllenRelation::Overlaps
            }
        }
        (Greater, Greater) => {
            if b.off < a.on {
                AllenRelation::After
            } else if b.off == a.on {
                AllenRelation::MetBy
            } else {
                AllenRelation::OverlappedBy
            }
        }
        (Less, Greater) => AllenRelation::Contains,
        (Greater, Less) => AllenRelation::During,
    }
}

/// A classified temporal relation between two AU events of one sequence.
/// The relation is the classification of the first event's interval
/// against the second's. Occurrence indices say which event of its AU
/// each side is (1-based, canonical order); they are kept for feature
/// construction but omitted from the rendered fact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllenFact {
    pub sequence_id: Ident,
    pub relation: AllenRelation,
    pub first_au: ActionUnit,
    pub second_au: ActionUnit,
    pub first_occurrence: u32,
    pub second_occurrence: u32,
}

impl AllenFact {
    /// Renders the fact line: `overlaps(s1,au4,au43).`
    pub fn render(&self) -> String {
        format!(
            "{}({},{},{}).",
            self.relation.tag(),
            self.sequence_id,
            self.first_au.constant(),
            self.second_au.constant()
        )
    }
}

/// Which relation tags to keep and whether to canonicalize pair order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationConfig {
    /// Emitted facts whose tag is not in this set are dropped.
    pub retained: BTreeSet<AllenRelation>,
    /// When set, each unordered event pair is oriented so its tag comes
    /// from the forward set {before, meets, overlaps, starts, during,
    /// finishes, equals}; ties for `equals` keep (onset, event_id) order.
    /// When unset, pairs keep (onset, event_id) order and converse tags
    /// may appear.
    pub canonicalize: bool,
}

impl Default for RelationConfig {
    fn default() -> Self {
        RelationConfig {
            retained: AllenRelation::ALL.iter().copied().collect(),
            canonicalize: true,
        }
    }
}

impl RelationConfig {
    /// Restricted to the two relation tags shown in the worked figure
    /// examples.
    pub fn overlaps_and_starts() -> Self {
        RelationConfig {
            retained: [AllenRelation::Overlaps, AllenRelation::Starts]
                .into_iter()
                .collect(),
            canonicalize: true,
        }
    }
}

/// Emits one AllenFact per unordered pair of distinct events, in the
/// order of the canonically sorted event list, filtered to the retained
/// tags. Pure function of the sequence and config.
pub fn enumerate_relations(sequence: &SequenceRecord, config: &RelationConfig) -> Vec<AllenFact> {
    let occurrences = occurrence_indices(sequence);
    let mut facts = Vec::new();
    for i in 0..sequence.events.len() {
        for j in (i + 1)..sequence.events.len() {
            let first = &sequence.events[i];
            let second = &sequence.events[j];
            let mut relation = classify(first.interval(), second.interval());
            let (mut fi, mut si) = (i, j);
            if config.canonicalize && !relation.is_forward() {
                relation = relation.converse();
                (fi, si) = (j, i);
            }
            if !config.retained.contains(&relation) {
                continue;
            }
            facts.push(AllenFact {
                sequence_id: sequence.id.clone(),
                relation,
                first_au: sequence.events[fi].au,
                second_au: sequence.events[si].au,
                first_occurrence: occurrences[fi],
                second_occurrence: occurrences[si],
            });
        }
    }
    facts
}
