//! Local explanations: grounding a theory's covering clauses against one
//! sequence's facts (tracing) and propositionalizing traces or whole
//! background knowledge into flat feature sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::allen::{enumerate_relations, AllenRelation, RelationConfig};
use crate::logic::{covers, FactSet, Literal, Term, Theory};
use crate::sequence::{ActionUnit, Ident, Intensity, Mode, SequenceRecord};

/// The grounded body literals of every covering clause (first grounding
/// per clause, union with duplicates dropped, clause order preserved).
/// Empty iff the theory does not cover the sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub sequence_id: Ident,
    pub class: Ident,
    pub grounded_literals: Vec<Literal>,
}

impl Trace {
    pub fn is_empty(&self) -> bool {
        self.grounded_literals.is_empty()
    }
}

/// Grounds each covering clause of `theory` with its first substitution.
pub fn trace(theory: &Theory, facts: &FactSet) -> Trace {
    let mut seen = BTreeSet::new();
    let mut grounded_literals = Vec::new();
    for clause in theory.clauses() {
        let Some(substitution) = covers(clause, facts) else {
            continue;
        };
        for literal in clause.body() {
            let ground = substitution.apply(literal);
            debug_assert!(ground.is_ground());
            if seen.insert(ground.clone()) {
                grounded_literals.push(ground);
            }
        }
    }
    Trace {
        sequence_id: facts.sequence_id().clone(),
        class: theory.target_class.clone(),
        grounded_literals,
    }
}

/// One indexed ground unit. The occurrence index counts repetitions of
/// the same unit (canonical order), so multiple occurrences of an AU are
/// not collapsed. The canonical token is injective over the field tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    Attribute {
        au: ActionUnit,
        intensity: Intensity,
        occurrence: u32,
    },
    Relation {
        relation: AllenRelation,
        first_au: ActionUnit,
        second_au: ActionUnit,
        occurrence: u32,
    },
}

impl Feature {
    /// `au4_c_1` or `overlaps_au4_au43_1`.
    pub fn token(&self) -> String {
        match self {
            Feature::Attribute {
                au,
                intensity,
                occurrence,
            } => format!("{}_{}_{}", au.constant(), intensity.token(), occurrence),
            Feature::Relation {
                relation,
                first_au,
                second_au,
                occurrence,
            } => format!(
                "{}_{}_{}_{}",
                relation.tag(),
                first_au.constant(),
                second_au.constant(),
                occurrence
            ),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// Whether a feature set was built from a trace or from the sequence's
/// whole background knowledge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Trace,
    FullBk,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Trace => "trace",
            Origin::FullBk => "full_bk",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sequence rendered as a set of indexed features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSet {
    pub sequence_id: Ident,
    pub origin: Origin,
    pub mode: Mode,
    pub features: BTreeSet<Feature>,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Feature tokens in lexicographic order.
    pub fn tokens(&self) -> Vec<String> {
        let mut tokens: Vec<String> = self.features.iter().map(Feature::token).collect();
        tokens.sort();
        tokens
    }

    /// `{"seq":…,"origin":…,"mode":…,"features":[…]}` with features
    /// sorted lexicographically.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Rendered<'a> {
            seq: &'a str,
            origin: &'a str,
            mode: &'a str,
            features: Vec<String>,
        }
        serde_json::to_string(&Rendered {
            seq: self.sequence_id.as_str(),
            origin: self.origin.as_str(),
            mode: self.mode.as_str(),
            features: self.tokens(),
        })
        .expect("feature set serializes")
    }
}

fn attribute_unit(literal: &Literal) -> Option<(ActionUnit, Intensity)> {
    if literal.predicate != "event" || literal.args.len() != 6 {
        return None;
    }
    let au = parse_au(&literal.args[2])?;
    let intensity = match &literal.args[5] {
        Term::Constant(token) => Intensity::from_token(token).ok()?,
        Term::Variable(_) => return None,
    };
    Some((au, intensity))
}

fn relation_unit(literal: &Literal) -> Option<(AllenRelation, ActionUnit, ActionUnit)> {
    let relation = AllenRelation::from_tag(&literal.predicate)?;
    if literal.args.len() != 3 {
        return None;
    }
    Some((
        relation,
        parse_au(&literal.args[1])?,
        parse_au(&literal.args[2])?,
    ))
}

fn parse_au(term: &Term) -> Option<ActionUnit> {
    match term {
        Term::Constant(token) => {
            let code = token.strip_prefix("au")?.parse().ok()?;
            ActionUnit::new(code).ok()
        }
        Term::Variable(_) => None,
    }
}

/// Converts the trace's ground unit multiset into indexed features.
/// Attributes mode reads event literals (AU + intensity); relations mode
/// reads relation literals only.
pub fn propositionalize_trace(trace: &Trace, mode: Mode) -> FeatureSet {
    let mut features = BTreeSet::new();
    match mode {
        Mode::Attributes => {
            let mut counts: BTreeMap<(ActionUnit, Intensity), u32> = BTreeMap::new();
            for literal in &trace.grounded_literals {
                if let Some(unit) = attribute_unit(literal) {
                    let occurrence = next_index(&mut counts, unit);
                    features.insert(Feature::Attribute {
                        au: unit.0,
                        intensity: unit.1,
                        occurrence,
                    });
                }
            }
        }
        Mode::Relations => {
            let mut counts: BTreeMap<(AllenRelation, ActionUnit, ActionUnit), u32> =
                BTreeMap::new();
            for literal in &trace.grounded_literals {
                if let Some(unit) = relation_unit(literal) {
                    let occurrence = next_index(&mut counts, unit);
                    features.insert(Feature::Relation {
                        relation: unit.0,
                        first_au: unit.1,
                        second_au: unit.2,
                        occurrence,
                    });
                }
            }
        }
    }
    FeatureSet {
        sequence_id: trace.sequence_id.clone(),
        origin: Origin::Trace,
        mode,
        features,
    }
}

/// Converts the whole background knowledge of one sequence into indexed
/// features. Attributes mode maps each event to (AU, intensity, index);
/// relations mode maps every enumerated relation fact (no deduplication)
/// to (relation, AU pair, index).
pub fn propositionalize_sequence(
    sequence: &SequenceRecord,
    mode: Mode,
    config: &RelationConfig,
) -> FeatureSet {
    let mut features = BTreeSet::new();
    match mode {
        Mode::Attributes => {
            let mut counts: BTreeMap<(ActionUnit, Intensity), u32> = BTreeMap::new();
            for event in &sequence.events {
                let unit = (event.au, event.intensity);
                let occurrence = next_index(&mut counts, unit);
                features.insert(Feature::Attribute {
                    au: event.au,
                    intensity: event.intensity,
                    occurrence,
                });
            }
        }
        Mode::Relations => {
            let mut counts: BTreeMap<(AllenRelation, ActionUnit, ActionUnit), u32> =
                BTreeMap::new();
            for fact in enumerate_relations(sequence, config) {
                let unit = (fact.relation, fact.first_au, fact.second_au);
                let occurrence = next_index(&mut counts, unit);
                features.insert(Feature::Relation {
                    relation: fact.relation,
                    first_au: fact.first_au,
                    second_au: fact.second_au,
                    occurrence,
                });
            }
        }
    }
    FeatureSet {
        sequence_id: sequence.id.clone(),
        origin: Origin::FullBk,
        mode,
        features,
    }
}

fn next_index<K: Ord>(counts: &mut BTreeMap<K, u32>, key: K) -> u32 {
    let count = counts.entry(key).or_insert(0);
    *count += 1;
    *count
}
