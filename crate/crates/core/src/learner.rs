//! Sequential covering rule learner: a seed example is saturated into a
//! most specific bottom clause, a top-down beam search generalizes it,
//! accepted clauses remove the positives they cover, and the loop repeats
//! until every positive is covered or skipped.

use rayon::prelude::*;
use serde::Serialize;

use crate::allen::RelationConfig;
use crate::error::LearnError;
use crate::logic::{covers, theory_covers, Clause, FactSet, Literal, Term, Theory};
use crate::sequence::{Dataset, Ident, Mode, SequenceRecord};

/// Which positive becomes the next seed. Both walk positives in dataset
/// order; `FirstUncovered` rescans from the start each iteration,
/// `IndexOrder` advances a cursor. They coincide whenever accepted
/// clauses cover their own seed, which the search guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedSelection {
    #[default]
    FirstUncovered,
    IndexOrder,
}

/// What to do when no consistent clause exists for a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedFailure {
    /// Leave the seed uncovered (counted against accuracy) and move on.
    #[default]
    Skip,
    /// Propagate the search error.
    Fail,
}

#[derive(Debug, Clone)]
pub struct LearnerConfig {
    pub mode: Mode,
    pub max_body_literals: usize,
    pub beam_width: usize,
    /// Number of negatives a clause may cover and still be accepted.
    pub noise: usize,
    pub seed_selection: SeedSelection,
    pub on_seed_failure: SeedFailure,
    pub relation_config: RelationConfig,
}

impl LearnerConfig {
    pub fn attributes() -> Self {
        LearnerConfig {
            mode: Mode::Attributes,
            max_body_literals: 4,
            beam_width: 16,
            noise: 0,
            seed_selection: SeedSelection::default(),
            on_seed_failure: SeedFailure::default(),
            relation_config: RelationConfig::default(),
        }
    }

    pub fn relations() -> Self {
        LearnerConfig {
            mode: Mode::Relations,
            ..Self::attributes()
        }
    }
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self::attributes()
    }
}

/// The most specific clause lifted from one seed sequence: the search
/// space ceiling. Every candidate literal is satisfied by the seed under
/// the head's sequence variable.
#[derive(Debug, Clone)]
pub struct BottomClause {
    pub seed: Ident,
    pub head: Literal,
    pub candidate_literals: Vec<Literal>,
}

/// Lifts the seed's facts into candidate literals.
///
/// Attributes mode: one `event(S,Eᵢ,<au>,_,_,<intensity>)` literal per
/// event, AU and intensity as constants, timestamps anonymous. Relations
/// mode: one `<relation>(S,<au1>,<au2>)` literal per canonical relation
/// fact, then one AU-presence literal `event(S,Eᵢ,<au>,_,_,_)` per
/// distinct AU.
pub fn saturate(
    seed: &SequenceRecord,
    target_class: &Ident,
    config: &LearnerConfig,
) -> Result<BottomClause, LearnError> {
    let head = Literal::new(target_class.as_str(), vec![Term::variable("S")]);
    let mut candidates = Vec::new();
    let mut anonymous = 0usize;
    let fresh = |n: &mut usize| {
        *n += 1;
        Term::variable(format!("_{n}"))
    };
    match config.mode {
        Mode::Attributes => {
            for (index, event) in seed.events.iter().enumerate() {
                candidates.push(Literal::new(
                    "event",
                    vec![
                        Term::variable("S"),
                        Term::variable(format!("E{}", index + 1)),
                        Term::constant(event.au.constant()),
                        fresh(&mut anonymous),
                        fresh(&mut anonymous),
                        Term::constant(event.intensity.token()),
                    ],
                ));
            }
        }
        Mode::Relations => {
            let facts = FactSet::relations(seed, &config.relation_config);
            for fact in facts.facts() {
                if fact.predicate == "event" {
                    continue;
                }
                let mut args = vec![Term::variable("S")];
                args.extend(fact.args[1..].iter().cloned());
                candidates.push(Literal::new(fact.predicate.clone(), args));
            }
            if candidates.is_empty() {
                return Err(LearnError::EmptySeed(seed.id.to_string()));
            }
            let mut aus: Vec<_> = seed.events.iter().map(|e| e.au).collect();
            aus.sort();
            aus.dedup();
            for (index, au) in aus.iter().enumerate() {
                candidates.push(Literal::new(
                    "event",
                    vec![
                        Term::variable("S"),
                        Term::variable(format!("E{}", index + 1)),
                        Term::constant(au.constant()),
                        fresh(&mut anonymous),
                        fresh(&mut anonymous),
                        fresh(&mut anonymous),
                    ],
                ));
            }
        }
    }
    if candidates.is_empty() {
        return Err(LearnError::EmptySeed(seed.id.to_string()));
    }
    Ok(BottomClause {
        seed: seed.id.clone(),
        head,
        candidate_literals: candidates,
    })
}

fn clause_from(bottom: &BottomClause, body: &[usize]) -> Clause {
    let literals = body
        .iter()
        .map(|&i| bottom.candidate_literals[i].clone())
        .collect();
    Clause::new(bottom.head.clone(), literals).expect("candidate literals are chained")
}

struct BeamItem {
    body: Vec<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

/// Top-down beam search over ordered subsets of the bottom clause's
/// candidate literals, adding one literal per refinement up to
/// `max_body_literals`. Returns the clause covering the seed with at most
/// `noise` negatives that maximizes positive coverage; ties prefer fewer
/// body literals, then candidate-literal order.
pub fn search(
    bottom: &BottomClause,
    positives: &[&FactSet],
    negatives: &[&FactSet],
    config: &LearnerConfig,
) -> Result<Clause, LearnError> {
    let no_consistent = || LearnError::NoConsistentClause {
        seed: bottom.seed.to_string(),
        max_literals: config.max_body_literals,
        noise: config.noise,
    };
    let mut best: Option<(Vec<usize>, usize)> = None;
    let root = BeamItem {
        body: Vec::new(),
        pos: (0..positives.len()).collect(),
        neg: (0..negatives.len()).collect(),
    };
    if root.neg.len() <= config.noise {
        best = Some((Vec::new(), root.pos.len()));
    }
    let mut beam = vec![root];
    for _ in 0..config.max_body_literals {
        let extensions: Vec<(usize, usize)> = beam
            .iter()
            .enumerate()
            .flat_map(|(parent, item)| {
                let from = item.body.last().map_or(0, |last| last + 1);
                (from..bottom.candidate_literals.len()).map(move |c| (parent, c))
            })
            .collect();
        let mut children: Vec<BeamItem> = extensions
            .par_iter()
            .map(|&(parent, candidate)| {
                let item = &beam[parent];
                let mut body = item.body.clone();
                body.push(candidate);
                let clause = clause_from(bottom, &body);
                let pos = retain_covered(&clause, positives, &item.pos);
                let neg = retain_covered(&clause, negatives, &item.neg);
                BeamItem { body, pos, neg }
            })
            .collect();
        children.sort_by(|a, b| {
            (b.pos.len(), a.neg.len(), &a.body).cmp(&(a.pos.len(), b.neg.len(), &b.body))
        });
        for child in &children {
            let best_pos = best.as_ref().map(|(_, p)| *p);
            if child.neg.len() <= config.noise
                && !child.pos.is_empty()
                && best_pos.map_or(true, |p| child.pos.len() > p)
            {
                best = Some((child.body.clone(), child.pos.len()));
            }
        }
        let best_pos = best.as_ref().map(|(_, p)| *p);
        children.retain(|child| {
            !child.pos.is_empty() && best_pos.map_or(true, |p| child.pos.len() > p)
        });
        children.truncate(config.beam_width);
        if children.is_empty() {
            break;
        }
        beam = children;
    }
    let (body, _) = best.ok_or_else(no_consistent)?;
    Ok(clause_from(bottom, &body))
}

/// Exhaustive enumeration of every candidate subset up to
/// `max_body_literals`, with the same acceptance and tie rules as
/// `search`. Exponential in the candidate count; meant as a testing
/// oracle on small instances.
pub fn search_exhaustive(
    bottom: &BottomClause,
    positives: &[&FactSet],
    negatives: &[&FactSet],
    config: &LearnerConfig,
) -> Result<Clause, LearnError> {
    let mut best: Option<(Vec<usize>, usize)> = None;
    let n = bottom.candidate_literals.len();
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    for size in 0..=config.max_body_literals.min(n) {
        let mut next = Vec::new();
        for body in &stack {
            let clause = clause_from(bottom, body);
            let pos = positives
                .iter()
                .filter(|facts| covers(&clause, facts).is_some())
                .count();
            let neg = negatives
                .iter()
                .filter(|facts| covers(&clause, facts).is_some())
                .count();
            if neg <= config.noise && pos > 0 && best.as_ref().map_or(true, |(_, p)| pos > *p) {
                best = Some((body.clone(), pos));
            }
            if size < config.max_body_literals {
                let from = body.last().map_or(0, |last| last + 1);
                for c in from..n {
                    let mut extended = body.clone();
                    extended.push(c);
                    next.push(extended);
                }
            }
        }
        stack = next;
        if stack.is_empty() {
            break;
        }
    }
    let (body, _) = best.ok_or(LearnError::NoConsistentClause {
        seed: bottom.seed.to_string(),
        max_literals: config.max_body_literals,
        noise: config.noise,
    })?;
    Ok(clause_from(bottom, &body))
}

fn retain_covered(clause: &Clause, facts: &[&FactSet], within: &[usize]) -> Vec<usize> {
    within
        .iter()
        .copied()
        .filter(|&i| covers(clause, facts[i]).is_some())
        .collect()
}

/// Training outcome for one class.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub class: Ident,
    pub positives: usize,
    pub negatives: usize,
    pub covered_positives: usize,
    pub covered_negatives: usize,
    /// Seeds for which no consistent clause existed, left uncovered.
    pub skipped_seeds: Vec<Ident>,
    /// Positives newly covered by each accepted clause, in clause order.
    pub clause_new_coverage: Vec<usize>,
    /// (true positives + true negatives) / (positives + negatives).
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub theory: Theory,
    pub report: CoverageReport,
}

pub fn training_accuracy(
    covered_positives: usize,
    positives: usize,
    covered_negatives: usize,
    negatives: usize,
) -> f64 {
    let correct = covered_positives + (negatives - covered_negatives);
    correct as f64 / (positives + negatives) as f64
}

/// The covering loop: select seed, saturate, search, remove covered
/// positives; repeats until every positive is covered or skipped. The
/// returned theory is complete and consistent on the training data
/// whenever no seed fails at noise 0.
pub fn learn(
    dataset: &Dataset,
    target_class: &Ident,
    config: &LearnerConfig,
) -> Result<LearnOutcome, LearnError> {
    let (positive_ids, negative_ids) = dataset.split(target_class);
    if positive_ids.is_empty() || negative_ids.is_empty() {
        return Err(LearnError::DegenerateSplit {
            class: target_class.to_string(),
            positives: positive_ids.len(),
            negatives: negative_ids.len(),
        });
    }
    let fact_sets: Vec<FactSet> = dataset
        .sequences
        .iter()
        .map(|s| FactSet::for_mode(s, config.mode, &config.relation_config))
        .collect();
    let negative_facts: Vec<&FactSet> = negative_ids.iter().map(|&i| &fact_sets[i]).collect();

    let mut remaining: Vec<usize> = positive_ids.clone();
    let mut skipped: Vec<usize> = Vec::new();
    let mut clauses: Vec<Clause> = Vec::new();
    let mut clause_new_coverage: Vec<usize> = Vec::new();

    while let Some(&seed_index) = remaining.iter().find(|i| !skipped.contains(i)) {
        let seed = &dataset.sequences[seed_index];
        let remaining_facts: Vec<&FactSet> = remaining.iter().map(|&i| &fact_sets[i]).collect();
        let found = saturate(seed, target_class, config)
            .and_then(|bottom| search(&bottom, &remaining_facts, &negative_facts, config));
        match found {
            Ok(clause) => {
                let covered: Vec<usize> = remaining
                    .iter()
                    .copied()
                    .filter(|&i| covers(&clause, &fact_sets[i]).is_some())
                    .collect();
                debug_assert!(covered.contains(&seed_index));
                clause_new_coverage.push(covered.len());
                clauses.push(clause);
                remaining.retain(|i| !covered.contains(i));
                skipped.retain(|i| !covered.contains(i));
            }
            Err(error) => match config.on_seed_failure {
                SeedFailure::Skip => skipped.push(seed_index),
                SeedFailure::Fail => return Err(error),
            },
        }
    }

    let theory = Theory::new(target_class.clone(), clauses)?;
    let covered_positives = positive_ids
        .iter()
        .filter(|&&i| !theory_covers(&theory, &fact_sets[i]).is_empty())
        .count();
    let covered_negatives = negative_ids
        .iter()
        .filter(|&&i| !theory_covers(&theory, &fact_sets[i]).is_empty())
        .count();
    let report = CoverageReport {
        class: target_class.clone(),
        positives: positive_ids.len(),
        negatives: negative_ids.len(),
        covered_positives,
        covered_negatives,
        skipped_seeds: skipped
            .iter()
            .map(|&i| dataset.sequences[i].id.clone())
            .collect(),
        clause_new_coverage,
        accuracy: training_accuracy(
            covered_positives,
            positive_ids.len(),
            covered_negatives,
            negative_ids.len(),
        ),
    };
    Ok(LearnOutcome { theory, report })
}
