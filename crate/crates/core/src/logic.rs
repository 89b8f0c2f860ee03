//! Horn clauses over ground sequence facts: terms, literals, clauses,
//! theories, and coverage by backtracking substitution search
//! (theta-subsumption against ground facts; no recursion, no function
//! symbols, no negation).
//!
//! Theory text format is one clause per line:
//!
//! ```text
//! pain(S) :- event(S,E1,au4,_,_,c), event(S,E2,au6,_,_,b).
//! pain(S) :- overlaps(S,au2,au43).
//! ```
//!
//! `_` denotes a fresh anonymous variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::allen::RelationConfig;
use crate::error::LogicError;
use crate::sequence::{Ident, Mode, SequenceRecord};

/// A constant (lowercase or numeral token) or a variable
/// (uppercase-initial; `_`-initial names are anonymous placeholders and
/// render as `_`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Constant(String),
    Variable(String),
}

impl Term {
    pub fn constant(token: impl Into<String>) -> Term {
        Term::Constant(token.into())
    }

    pub fn variable(name: impl Into<String>) -> Term {
        Term::Variable(name.into())
    }

    pub fn is_anonymous(&self) -> bool {
        matches!(self, Term::Variable(name) if name.starts_with('_'))
    }

    fn render(&self) -> &str {
        match self {
            Term::Constant(token) => token,
            Term::Variable(name) if name.starts_with('_') => "_",
            Term::Variable(name) => name,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.render())
    }
}

/// An atom `predicate(arg1,…,argN)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Literal {
        Literal {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Constant(_)))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{arg}")?;
        }
        f.write_str(")")
    }
}

/// `head :- body`. The head takes a single sequence variable and every
/// body literal's first argument is that same variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    head: Literal,
    body: Vec<Literal>,
}

impl Clause {
    pub fn new(head: Literal, body: Vec<Literal>) -> Result<Clause, LogicError> {
        if head.args.len() != 1 {
            return Err(LogicError::HeadArity(head.args.len()));
        }
        let sequence_var = match &head.args[0] {
            Term::Variable(name) => name.clone(),
            Term::Constant(_) => return Err(LogicError::HeadNotVariable),
        };
        for (index, literal) in body.iter().enumerate() {
            match literal.args.first() {
                None => {
                    return Err(LogicError::EmptyLiteral {
                        index,
                        predicate: literal.predicate.clone(),
                    })
                }
                Some(Term::Variable(name)) if *name == sequence_var => {}
                Some(_) => {
                    return Err(LogicError::BodyNotChained {
                        index,
                        predicate: literal.predicate.clone(),
                    })
                }
            }
        }
        Ok(Clause { head, body })
    }

    pub fn head(&self) -> &Literal {
        &self.head
    }

    pub fn body(&self) -> &[Literal] {
        &self.body
    }

    /// The head's sequence variable name.
    pub fn sequence_var(&self) -> &str {
        match &self.head.args[0] {
            Term::Variable(name) => name,
            Term::Constant(_) => unreachable!("validated at construction"),
        }
    }

    pub fn render(&self) -> String {
        if self.body.is_empty() {
            format!("{}.", self.head)
        } else {
            let body: Vec<String> = self.body.iter().map(|l| l.to_string()).collect();
            format!("{} :- {}.", self.head, body.join(", "))
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// The learned rule set for one class: clauses sharing the class
/// predicate as head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theory {
    pub target_class: Ident,
    clauses: Vec<Clause>,
}

impl Theory {
    pub fn new(target_class: Ident, clauses: Vec<Clause>) -> Result<Theory, LogicError> {
        for (index, clause) in clauses.iter().enumerate() {
            if clause.head.predicate != target_class.as_str() {
                return Err(LogicError::MixedHeads {
                    index,
                    found: clause.head.predicate.clone(),
                    expected: target_class.to_string(),
                });
            }
        }
        Ok(Theory {
            target_class,
            clauses,
        })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// One clause per line, trailing newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for clause in &self.clauses {
            out.push_str(&clause.render());
            out.push('\n');
        }
        out
    }

    /// Parses theory text (the `render` format). The target class is the
    /// shared head predicate; anonymous `_` arguments become fresh
    /// variables.
    pub fn parse(text: &str) -> Result<Theory, LogicError> {
        let mut clauses = Vec::new();
        let mut target: Option<Ident> = None;
        for (offset, raw) in text.lines().enumerate() {
            let line = offset + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let clause = parse_clause(trimmed, line)?;
            let head_predicate = clause.head.predicate.clone();
            match &target {
                None => {
                    let class =
                        Ident::new(head_predicate.clone()).map_err(|_| LogicError::Parse {
                            line,
                            message: format!(
                                "head predicate {head_predicate:?} is not a class token"
                            ),
                        })?;
                    target = Some(class);
                }
                Some(expected) if expected.as_str() != head_predicate => {
                    return Err(LogicError::MixedHeads {
                        index: clauses.len(),
                        found: head_predicate,
                        expected: expected.to_string(),
                    });
                }
                Some(_) => {}
            }
            clauses.push(clause);
        }
        let target_class = target.ok_or(LogicError::Parse {
            line: 0,
            message: "empty theory text".to_string(),
        })?;
        Theory::new(target_class, clauses)
    }
}

fn parse_clause(line_text: &str, line: usize) -> Result<Clause, LogicError> {
    let err = |message: String| LogicError::Parse { line, message };
    let stripped = line_text
        .strip_suffix('.')
        .ok_or_else(|| err("clause must end with '.'".to_string()))?;
    let (head_text, body_text) = match stripped.split_once(":-") {
        Some((head, body)) => (head.trim(), Some(body.trim())),
        None => (stripped.trim(), None),
    };
    let mut anonymous = 0usize;
    let head = parse_literal(head_text, line, &mut anonymous)?;
    let mut body = Vec::new();
    if let Some(body_text) = body_text {
        if body_text.is_empty() {
            return Err(err("empty body after ':-'".to_string()));
        }
        for chunk in split_literals(body_text) {
            body.push(parse_literal(chunk.trim(), line, &mut anonymous)?);
        }
    }
    Clause::new(head, body).map_err(|e| err(e.to_string()))
}

/// Splits `lit1, lit2, …` on commas outside parentheses.
fn split_literals(text: &str) -> Vec<&str> {
    let mut chunks = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                chunks.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    chunks.push(&text[start..]);
    chunks
}

fn parse_literal(text: &str, line: usize, anonymous: &mut usize) -> Result<Literal, LogicError> {
    let err = |message: String| LogicError::Parse { line, message };
    let open = text
        .find('(')
        .ok_or_else(|| err(format!("expected argument list in {text:?}")))?;
    let close = text
        .rfind(')')
        .filter(|&close| close == text.len() - 1 && close > open)
        .ok_or_else(|| err(format!("unbalanced parentheses in {text:?}")))?;
    let predicate = text[..open].trim();
    if !is_predicate_token(predicate) {
        return Err(err(format!("invalid predicate token {predicate:?}")));
    }
    let mut args = Vec::new();
    for raw in text[open + 1..close].split(',') {
        let token = raw.trim();
        args.push(parse_term(token, line, anonymous)?);
    }
    Ok(Literal::new(predicate, args))
}

fn parse_term(token: &str, line: usize, anonymous: &mut usize) -> Result<Term, LogicError> {
    if token == "_" {
        *anonymous += 1;
        return Ok(Term::Variable(format!("_{anonymous}")));
    }
    let mut chars = token.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => {
            if chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
                Ok(Term::Variable(token.to_string()))
            } else {
                Err(LogicError::Parse {
                    line,
                    message: format!("invalid variable token {token:?}"),
                })
            }
        }
        Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {
            if is_constant_token(token) {
                Ok(Term::Constant(token.to_string()))
            } else {
                Err(LogicError::Parse {
                    line,
                    message: format!("invalid constant token {token:?}"),
                })
            }
        }
        _ => Err(LogicError::Parse {
            line,
            message: format!("empty or invalid term {token:?}"),
        }),
    }
}

fn is_predicate_token(token: &str) -> bool {
    let mut chars = token.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn is_constant_token(token: &str) -> bool {
    if token.chars().all(|c| c.is_ascii_digit()) {
        return !token.is_empty();
    }
    is_predicate_token(token)
}

/// A grounding: variable name → constant token. Total over a clause's
/// variables when returned as a covering substitution (anonymous
/// variables included).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Substitution {
    bindings: BTreeMap<String, String>,
}

impl Substitution {
    pub fn get(&self, variable: &str) -> Option<&str> {
        self.bindings.get(variable).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(v, c)| (v.as_str(), c.as_str()))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    fn bind(&mut self, variable: &str, constant: &str) {
        self.bindings
            .insert(variable.to_string(), constant.to_string());
    }

    /// Replaces bound variables with their constants; unbound variables
    /// stay as they are.
    pub fn apply(&self, literal: &Literal) -> Literal {
        let args = literal
            .args
            .iter()
            .map(|term| match term {
                Term::Variable(name) => match self.bindings.get(name) {
                    Some(constant) => Term::Constant(constant.clone()),
                    None => term.clone(),
                },
                Term::Constant(_) => term.clone(),
            })
            .collect();
        Literal::new(literal.predicate.clone(), args)
    }
}

/// The ground facts of one sequence, indexed by predicate, in canonical
/// fact order (events by (onset, event_id), then relation facts in
/// enumeration order deduplicated per (relation, au1, au2)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactSet {
    sequence_id: Ident,
    by_predicate: BTreeMap<String, Vec<Vec<String>>>,
    order: Vec<Literal>,
}

impl FactSet {
    /// Event facts only.
    pub fn attributes(sequence: &SequenceRecord) -> FactSet {
        Self::build(sequence, Mode::Attributes, &RelationConfig::default())
    }

    /// Event facts plus canonical relation facts.
    pub fn relations(sequence: &SequenceRecord, config: &RelationConfig) -> FactSet {
        Self::build(sequence, Mode::Relations, config)
    }

    pub fn for_mode(sequence: &SequenceRecord, mode: Mode, config: &RelationConfig) -> FactSet {
        Self::build(sequence, mode, config)
    }

    fn build(sequence: &SequenceRecord, mode: Mode, config: &RelationConfig) -> FactSet {
        let mut facts = FactSet {
            sequence_id: sequence.id.clone(),
            by_predicate: BTreeMap::new(),
            order: Vec::new(),
        };
        for event in &sequence.events {
            facts.insert(
                "event",
                vec![
                    sequence.id.to_string(),
                    event.event_id.to_string(),
                    event.au.constant(),
                    event.onset.to_string(),
                    event.offset.to_string(),
                    event.intensity.token().to_string(),
                ],
            );
        }
        if mode == Mode::Relations {
            let mut seen = BTreeSet::new();
            for fact in crate::allen::enumerate_relations(sequence, config) {
                let key = (fact.relation, fact.first_au, fact.second_au);
                if seen.insert(key) {
                    facts.insert(
                        fact.relation.tag(),
                        vec![
                            sequence.id.to_string(),
                            fact.first_au.constant(),
                            fact.second_au.constant(),
                        ],
                    );
                }
            }
        }
        facts
    }

    fn insert(&mut self, predicate: &str, args: Vec<String>) {
        self.order.push(Literal::new(
            predicate,
            args.iter().map(Term::constant).collect(),
        ));
        self.by_predicate
            .entry(predicate.to_string())
            .or_default()
            .push(args);
    }

    pub fn sequence_id(&self) -> &Ident {
        &self.sequence_id
    }

    /// Ground facts in canonical order.
    pub fn facts(&self) -> &[Literal] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Whether a ground literal is one of this sequence's facts.
    pub fn contains(&self, literal: &Literal) -> bool {
        let Some(tuples) = self.by_predicate.get(&literal.predicate) else {
            return false;
        };
        tuples.iter().any(|tuple| {
            tuple.len() == literal.args.len()
                && tuple
                    .iter()
                    .zip(&literal.args)
                    .all(|(constant, term)| matches!(term, Term::Constant(c) if c == constant))
        })
    }

    fn tuples(&self, predicate: &str) -> &[Vec<String>] {
        self.by_predicate
            .get(predicate)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Options for the coverage search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoverOptions {
    /// When set, distinct variables in the entity slot (the second
    /// argument) of body literals must bind to pairwise distinct
    /// constants, so distinct event variables denote distinct events. Off
    /// by default: pure logical semantics.
    pub injective: bool,
}

/// Finds the first substitution grounding every body literal to a fact,
/// searching literals in body order and facts in canonical order.
/// The substitution binds the head's sequence variable to the fact set's
/// sequence id and is total over the clause's variables.
pub fn covers(clause: &Clause, facts: &FactSet) -> Option<Substitution> {
    covers_with(clause, facts, CoverOptions::default())
}

pub fn covers_with(
    clause: &Clause,
    facts: &FactSet,
    options: CoverOptions,
) -> Option<Substitution> {
    let mut out = Vec::new();
    solve(clause, facts, options, true, &mut out);
    out.into_iter().next()
}

/// Enumerates every covering substitution, in search order.
pub fn covers_all(clause: &Clause, facts: &FactSet, options: CoverOptions) -> Vec<Substitution> {
    let mut out = Vec::new();
    solve(clause, facts, options, false, &mut out);
    out
}

fn solve(
    clause: &Clause,
    facts: &FactSet,
    options: CoverOptions,
    first_only: bool,
    out: &mut Vec<Substitution>,
) {
    let mut substitution = Substitution::default();
    substitution.bind(clause.sequence_var(), facts.sequence_id().as_str());
    let mut entity_vars: Vec<String> = Vec::new();
    backtrack(
        clause.body(),
        0,
        facts,
        options,
        first_only,
        &mut substitution,
        &mut entity_vars,
        out,
    );
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    body: &[Literal],
    index: usize,
    facts: &FactSet,
    options: CoverOptions,
    first_only: bool,
    substitution: &mut Substitution,
    entity_vars: &mut Vec<String>,
    out: &mut Vec<Substitution>,
) -> bool {
    if index == body.len() {
        out.push(substitution.clone());
        return first_only;
    }
    let literal = &body[index];
    for tuple in facts.tuples(&literal.predicate) {
        if tuple.len() != literal.args.len() {
            continue;
        }
        let mut bound: Vec<String> = Vec::new();
        let mut ok = true;
        for (position, (term, constant)) in literal.args.iter().zip(tuple).enumerate() {
            match term {
                Term::Constant(c) => {
                    if c != constant {
                        ok = false;
                        break;
                    }
                }
                Term::Variable(name) => match substitution.get(name) {
                    Some(existing) => {
                        if existing != constant {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        if options.injective
                            && position == 1
                            && entity_binding_clash(entity_vars, substitution, name, constant)
                        {
                            ok = false;
                            break;
                        }
                        substitution.bind(name, constant);
                        bound.push(name.clone());
                        if position == 1 {
                            entity_vars.push(name.clone());
                        }
                    }
                },
            }
        }
        if ok
            && backtrack(
                body,
                index + 1,
                facts,
                options,
                first_only,
                substitution,
                entity_vars,
                out,
            )
        {
            return true;
        }
        for name in bound {
            substitution.bindings.remove(&name);
            if let Some(at) = entity_vars.iter().position(|v| *v == name) {
                entity_vars.remove(at);
            }
        }
    }
    false
}

fn entity_binding_clash(
    entity_vars: &[String],
    substitution: &Substitution,
    candidate_var: &str,
    candidate_constant: &str,
) -> bool {
    entity_vars
        .iter()
        .any(|other| other != candidate_var && substitution.get(other) == Some(candidate_constant))
}

/// Applies `covers` per clause; the sequence is covered iff the result is
/// non-empty. Entries keep clause order and carry 0-based clause indices.
pub fn theory_covers(theory: &Theory, facts: &FactSet) -> Vec<(usize, Substitution)> {
    theory
        .clauses()
        .iter()
        .enumerate()
        .filter_map(|(index, clause)| covers(clause, facts).map(|s| (index, s)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Dataset;

    fn seq_facts(events: &str, mode: Mode) -> FactSet {
        let json = format!(
            r#"{{"classes":["pain","disgust"],
                "sequences":[{{"id":"s1","label":"pain","events":[{events}]}},
                             {{"id":"zz","label":"disgust",
                              "events":[{{"e":"e1","au":99,"on":0,"off":1,"int":"a"}}]}}]}}"#
        );
        let dataset = Dataset::parse(&json).unwrap();
        FactSet::for_mode(&dataset.sequences[0], mode, &RelationConfig::default())
    }

    fn pain_aus_sequence() -> FactSet {
        seq_facts(
            r#"{"e":"e1","au":7,"on":0,"off":5,"int":"c"},
               {"e":"e2","au":6,"on":0,"off":8,"int":"b"},
               {"e":"e3","au":4,"on":3,"off":9,"int":"c"},
               {"e":"e4","au":43,"on":4,"off":12,"int":null}"#,
            Mode::Attributes,
        )
    }

    #[test]
    fn covers_three_au_clause() {
        let clause = Theory::parse(
            "pain(S) :- event(S,E1,au7,_,_,_), event(S,E2,au6,_,_,_), event(S,E3,au4,_,_,_).\n",
        )
        .unwrap()
        .clauses()[0]
            .clone();
        let substitution = covers(&clause, &pain_aus_sequence()).expect("covered");
        assert_eq!(substitution.get("S"), Some("s1"));
        assert_eq!(substitution.get("E1"), Some("e1"));
        assert_eq!(substitution.get("E2"), Some("e2"));
        assert_eq!(substitution.get("E3"), Some("e3"));
    }

    #[test]
    fn covers_relation_clause() {
        let facts = seq_facts(
            r#"{"e":"e1","au":4,"on":5,"off":30,"int":"c"},
               {"e":"e2","au":43,"on":10,"off":40,"int":null}"#,
            Mode::Relations,
        );
        let clause = Theory::parse("pain(S) :- overlaps(S,au4,au43).\n")
            .unwrap()
            .clauses()[0]
            .clone();
        assert!(covers(&clause, &facts).is_some());
        let converse = Theory::parse("pain(S) :- overlaps(S,au43,au4).\n")
            .unwrap()
            .clauses()[0]
            .clone();
        assert!(covers(&converse, &facts).is_none());
    }

    #[test]
    fn empty_body_covers_trivially() {
        let clause = Theory::parse("pain(S).\n").unwrap().clauses()[0].clone();
        let substitution = covers(&clause, &pain_aus_sequence()).expect("covered");
        assert_eq!(substitution.get("S"), Some("s1"));
        assert_eq!(substitution.len(), 1);
    }

    #[test]
    fn substitution_grounds_every_body_literal_to_a_fact() {
        let facts = pain_aus_sequence();
        let clause = Theory::parse("pain(S) :- event(S,E1,au7,_,_,_), event(S,E2,au6,_,_,b).\n")
            .unwrap()
            .clauses()[0]
            .clone();
        let substitution = covers(&clause, &facts).expect("covered");
        for literal in clause.body() {
            let ground = substitution.apply(literal);
            assert!(ground.is_ground(), "{ground}");
            assert!(facts.contains(&ground), "{ground}");
        }
    }

    #[test]
    fn repeated_variables_co_refer() {
        let facts = seq_facts(
            r#"{"e":"e1","au":4,"on":0,"off":5,"int":"c"},
               {"e":"e2","au":6,"on":9,"off":12,"int":"b"}"#,
            Mode::Attributes,
        );
        let same_onset =
            Theory::parse("pain(S) :- event(S,E1,au4,T,_,_), event(S,E2,au6,T,_,_).\n")
                .unwrap()
                .clauses()[0]
                .clone();
        assert!(covers(&same_onset, &facts).is_none());
        let free = Theory::parse("pain(S) :- event(S,E1,au4,_,_,_), event(S,E2,au6,_,_,_).\n")
            .unwrap()
            .clauses()[0]
            .clone();
        assert!(covers(&free, &facts).is_some());
    }

    #[test]
    fn injectivity_flag_separates_events() {
        let facts = seq_facts(
            r#"{"e":"e1","au":4,"on":0,"off":5,"int":"c"}"#,
            Mode::Attributes,
        );
        let clause = Theory::parse("pain(S) :- event(S,E1,au4,_,_,c), event(S,E2,au4,_,_,c).\n")
            .unwrap()
            .clauses()[0]
            .clone();
        assert!(covers(&clause, &facts).is_some());
        let injective = CoverOptions { injective: true };
        assert!(covers_with(&clause, &facts, injective).is_none());

        let two = seq_facts(
            r#"{"e":"e1","au":4,"on":0,"off":5,"int":"c"},
               {"e":"e2","au":4,"on":9,"off":14,"int":"c"}"#,
            Mode::Attributes,
        );
        assert!(covers_with(&clause, &two, injective).is_some());
    }

    #[test]
    fn covers_is_deterministic_and_first_solution() {
        let facts = seq_facts(
            r#"{"e":"e1","au":4,"on":0,"off":5,"int":"c"},
               {"e":"e2","au":4,"on":9,"off":14,"int":"c"}"#,
            Mode::Attributes,
        );
        let clause = Theory::parse("pain(S) :- event(S,E,au4,_,_,c).\n")
            .unwrap()
            .clauses()[0]
            .clone();
        for _ in 0..5 {
            let substitution = covers(&clause, &facts).expect("covered");
            assert_eq!(substitution.get("E"), Some("e1"));
        }
        let all = covers_all(&clause, &facts, CoverOptions::default());
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].get("E"), Some("e1"));
        assert_eq!(all[1].get("E"), Some("e2"));
    }

    #[test]
    fn theory_covers_lists_matching_clauses_in_order() {
        let facts = pain_aus_sequence();
        let theory =
            Theory::parse("pain(S) :- event(S,E,au9,_,_,_).\npain(S) :- event(S,E,au4,_,_,c).\n")
                .unwrap();
        let coverings = theory_covers(&theory, &facts);
        assert_eq!(coverings.len(), 1);
        assert_eq!(coverings[0].0, 1);

        let both =
            Theory::parse("pain(S) :- event(S,E,au7,_,_,_).\npain(S) :- event(S,E,au4,_,_,c).\n")
                .unwrap();
        let coverings = theory_covers(&both, &facts);
        assert_eq!(
            coverings.iter().map(|(i, _)| *i).collect::<Vec<_>>(),
            vec![0, 1]
        );

        let neither = Theory::parse("pain(S) :- event(S,E,au9,_,_,_).\n").unwrap();
        assert!(theory_covers(&neither, &facts).is_empty());
    }

    #[test]
    fn clause_invariants_are_enforced() {
        let head2 = Literal::new("pain", vec![Term::variable("S"), Term::variable("T")]);
        assert!(matches!(
            Clause::new(head2, vec![]),
            Err(LogicError::HeadArity(2))
        ));
        let head_const = Literal::new("pain", vec![Term::constant("s1")]);
        assert!(matches!(
            Clause::new(head_const, vec![]),
            Err(LogicError::HeadNotVariable)
        ));
        let head = Literal::new("pain", vec![Term::variable("S")]);
        let bad_body = Literal::new("event", vec![Term::variable("Z"), Term::variable("E")]);
        assert!(matches!(
            Clause::new(head.clone(), vec![bad_body]),
            Err(LogicError::BodyNotChained { index: 0, .. })
        ));
        let empty = Literal::new("event", vec![]);
        assert!(matches!(
            Clause::new(head, vec![empty]),
            Err(LogicError::EmptyLiteral { index: 0, .. })
        ));
    }

    #[test]
    fn theory_text_round_trips() {
        let text = "pain(S) :- event(S,E1,au7,_,_,c), event(S,E2,au6,_,_,b).\n\
                    pain(S) :- overlaps(S,au4,au43).\n";
        let theory = Theory::parse(text).unwrap();
        assert_eq!(theory.render(), text);
        assert_eq!(theory.target_class.as_str(), "pain");
        let again = Theory::parse(&theory.render()).unwrap();
        assert_eq!(again.render(), text);
    }

    #[test]
    fn parse_rejects_mixed_heads_and_bad_tokens() {
        assert!(matches!(
            Theory::parse("pain(S) :- event(S,E,au4,_,_,c).\ndisgust(S).\n"),
            Err(LogicError::MixedHeads { .. })
        ));
        assert!(matches!(
            Theory::parse("pain(S) :- event(S,E,Au4!,_,_,c).\n"),
            Err(LogicError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Theory::parse("pain(S) :- event(S,E,au4,_,_,c)\n"),
            Err(LogicError::Parse { line: 1, .. })
        ));
        assert!(matches!(Theory::parse(""), Err(LogicError::Parse { .. })));
    }

    #[test]
    fn anonymous_variables_are_fresh_per_clause() {
        let theory =
            Theory::parse("pain(S) :- event(S,_,au4,_,_,c), event(S,_,au6,_,_,b).\n").unwrap();
        let clause = &theory.clauses()[0];
        let names: BTreeSet<&str> = clause
            .body()
            .iter()
            .flat_map(|l| &l.args)
            .filter_map(|t| match t {
                Term::Variable(name) => Some(name.as_str()),
                Term::Constant(_) => None,
            })
            .collect();
        assert_eq!(names.len(), 7, "{names:?}");
        let facts = seq_facts(
            r#"{"e":"e1","au":4,"on":0,"off":5,"int":"c"},
               {"e":"e2","au":6,"on":2,"off":8,"int":"b"}"#,
            Mode::Attributes,
        );
        let substitution = covers(clause, &facts).expect("covered");
        assert_eq!(substitution.len(), 7);
    }
}
