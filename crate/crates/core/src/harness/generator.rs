//! Synthetic labeled sequence generation with planted discriminative
//! structure: every sequence of a class carries one of the class's
//! attribute patterns (cycled) and all of its relation patterns, padded
//! with noise events that avoid the planted attribute pairs.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allen::{classify, AllenRelation, Interval};
use crate::error::GenerateError;
use crate::sequence::{ActionUnit, AuEvent, Dataset, Ident, Intensity, SequenceRecord};

/// A temporal pattern: the first AU's interval stands in `relation` to
/// the second AU's interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationPattern {
    pub relation: AllenRelation,
    pub first_au: u32,
    pub second_au: u32,
}

impl RelationPattern {
    /// The (relation, au pair) triple as it appears after canonical pair
    /// ordering.
    fn canonical(&self) -> (AllenRelation, u32, u32) {
        if self.relation.is_forward() {
            (self.relation, self.first_au, self.second_au)
        } else {
            (self.relation.converse(), self.second_au, self.first_au)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    /// Sequences generated per class.
    pub class_counts: BTreeMap<Ident, usize>,
    /// AU codes noise events draw from (minus any relation-pattern AUs).
    pub vocabulary: Vec<u32>,
    /// Inclusive range of events per sequence.
    pub events_per_sequence: (usize, usize),
    /// Largest allowed timestamp; all intervals lie in [0, horizon].
    pub horizon: u64,
    /// Sampling weights for event intensities.
    pub intensity_weights: Vec<(Intensity, u32)>,
    /// Per class: alternative (AU, intensity) sets; each sequence plants
    /// one of them, cycled in class order.
    pub attribute_patterns: BTreeMap<Ident, Vec<Vec<(u32, Intensity)>>>,
    /// Per class: relation patterns; each sequence plants all of them.
    pub relation_patterns: BTreeMap<Ident, Vec<RelationPattern>>,
    /// Fraction of the free event slots filled with noise events.
    pub noise_rate: f64,
    /// When set, planted patterns of different classes must be disjoint.
    pub separable: bool,
    pub seed: u64,
}

fn ident(token: &str) -> Ident {
    Ident::new(token).expect("valid identifier literal")
}

impl Default for GeneratorConfig {
    /// The trend configuration: two overlapping attribute patterns per
    /// class (so learned clauses need pattern pairs and traces stay
    /// short) and one class-exclusive relation pattern per class over a
    /// shared AU pair.
    fn default() -> Self {
        GeneratorConfig {
            class_counts: [(ident("pain"), 37), (ident("disgust"), 93)]
                .into_iter()
                .collect(),
            vocabulary: vec![1, 2, 4, 6, 7, 9, 10, 12, 43],
            events_per_sequence: (6, 9),
            horizon: 100,
            intensity_weights: vec![
                (Intensity::A, 3),
                (Intensity::B, 3),
                (Intensity::C, 3),
                (Intensity::D, 3),
                (Intensity::E, 3),
                (Intensity::Na, 1),
            ],
            attribute_patterns: [
                (
                    ident("pain"),
                    vec![
                        vec![(4, Intensity::C), (6, Intensity::B)],
                        vec![(1, Intensity::A), (7, Intensity::C)],
                    ],
                ),
                (
                    ident("disgust"),
                    vec![
                        vec![(4, Intensity::C), (7, Intensity::C)],
                        vec![(12, Intensity::D), (6, Intensity::B), (1, Intensity::A)],
                    ],
                ),
            ]
            .into_iter()
            .collect(),
            relation_patterns: [
                (
                    ident("pain"),
                    vec![RelationPattern {
                        relation: AllenRelation::Overlaps,
                        first_au: 2,
                        second_au: 43,
                    }],
                ),
                (
                    ident("disgust"),
                    vec![RelationPattern {
                        relation: AllenRelation::Before,
                        first_au: 2,
                        second_au: 43,
                    }],
                ),
            ]
            .into_iter()
            .collect(),
            noise_rate: 1.0,
            separable: false,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    /// Class-exclusive attribute patterns; single-literal rules suffice.
    pub fn attribute_separable(seed: u64) -> Self {
        GeneratorConfig {
            attribute_patterns: [
                (
                    ident("pain"),
                    vec![vec![(4, Intensity::C), (7, Intensity::C)]],
                ),
                (
                    ident("disgust"),
                    vec![vec![(9, Intensity::B), (10, Intensity::A)]],
                ),
            ]
            .into_iter()
            .collect(),
            relation_patterns: BTreeMap::new(),
            separable: true,
            seed,
            ..GeneratorConfig::default()
        }
    }

    /// Class-exclusive relation patterns over disjoint AU pairs; the
    /// classes share no relation features at all.
    pub fn relational_separable(seed: u64) -> Self {
        GeneratorConfig {
            attribute_patterns: BTreeMap::new(),
            relation_patterns: [
                (
                    ident("pain"),
                    vec![RelationPattern {
                        relation: AllenRelation::Overlaps,
                        first_au: 2,
                        second_au: 43,
                    }],
                ),
                (
                    ident("disgust"),
                    vec![RelationPattern {
                        relation: AllenRelation::Before,
                        first_au: 9,
                        second_au: 10,
                    }],
                ),
            ]
            .into_iter()
            .collect(),
            separable: true,
            seed,
            ..GeneratorConfig::default()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "default" => Some(GeneratorConfig::default()),
            "attribute-separable" => Some(GeneratorConfig::attribute_separable(0)),
            "relational-separable" => Some(GeneratorConfig::relational_separable(0)),
            _ => None,
        }
    }

    fn invalid(message: impl Into<String>) -> GenerateError {
        GenerateError::InvalidConfig(message.into())
    }

    /// AUs reserved for relation patterns (any class); noise never uses
    /// them, so planted relation facts stay the only facts over their
    /// pairs.
    fn relation_aus(&self) -> BTreeSet<u32> {
        self.relation_patterns
            .values()
            .flatten()
            .flat_map(|p| [p.first_au, p.second_au])
            .collect()
    }

    /// (AU, intensity) pairs planted by any class; noise avoids them.
    fn planted_pairs(&self) -> BTreeSet<(u32, Intensity)> {
        self.attribute_patterns
            .values()
            .flatten()
            .flatten()
            .copied()
            .collect()
    }

    fn planted_events(&self, class: &Ident, pattern_index: usize) -> usize {
        let attribute = self
            .attribute_patterns
            .get(class)
            .and_then(|patterns| patterns.get(pattern_index))
            .map_or(0, Vec::len);
        let relation = self.relation_patterns.get(class).map_or(0, Vec::len);
        attribute + 2 * relation
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.class_counts.len() < 2 {
            return Err(Self::invalid("need at least 2 classes"));
        }
        if let Some((class, _)) = self.class_counts.iter().find(|(_, &count)| count == 0) {
            return Err(Self::invalid(format!("class {class} has count 0")));
        }
        if self.vocabulary.is_empty() {
            return Err(Self::invalid("empty AU vocabulary"));
        }
        if self.vocabulary.iter().any(|&code| code == 0) {
            return Err(Self::invalid("AU codes must be >= 1"));
        }
        let (min_events, max_events) = self.events_per_sequence;
        if min_events == 0 || min_events > max_events {
            return Err(Self::invalid(format!(
                "bad events per sequence range ({min_events}, {max_events})"
            )));
        }
        if self.horizon == 0 {
            return Err(Self::invalid("horizon must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Self::invalid(format!(
                "noise rate {} outside [0, 1]",
                self.noise_rate
            )));
        }
        if self.intensity_weights.iter().map(|(_, w)| *w).sum::<u32>() == 0 {
            return Err(Self::invalid("intensity weights sum to 0"));
        }
        for class in self
            .attribute_patterns
            .keys()
            .chain(self.relation_patterns.keys())
        {
            if !self.class_counts.contains_key(class) {
                return Err(Self::invalid(format!(
                    "pattern for undeclared class {class}"
                )));
            }
        }
        if self
            .attribute_patterns
            .values()
            .flatten()
            .flatten()
            .chain(
                self.relation_patterns
                    .values()
                    .flatten()
                    .flat_map(|p| [(p.first_au, Intensity::Na), (p.second_au, Intensity::Na)])
                    .collect::<Vec<_>>()
                    .iter(),
            )
            .any(|&(code, _)| code == 0)
        {
            return Err(Self::invalid("pattern AU codes must be >= 1"));
        }
        for (class, patterns) in &self.relation_patterns {
            for pattern in patterns {
                let needed = min_horizon(pattern.relation);
                if self.horizon < needed {
                    return Err(GenerateError::HorizonTooSmall {
                        horizon: self.horizon,
                        relation: pattern.relation.tag().to_string(),
                        needed,
                    });
                }
                if pattern.first_au == pattern.second_au {
                    return Err(Self::invalid(format!(
                        "class {class}: relation pattern uses the same AU on both sides"
                    )));
                }
            }
        }
        for class in self.class_counts.keys() {
            let patterns = self
                .attribute_patterns
                .get(class)
                .map(Vec::len)
                .unwrap_or(0)
                .max(1);
            for index in 0..patterns {
                let planted = self.planted_events(class, index);
                if planted > min_events {
                    return Err(Self::invalid(format!(
                        "class {class}: {planted} planted events exceed the minimum of {min_events} events per sequence"
                    )));
                }
            }
        }
        if self.separable {
            self.check_separable()?;
        }
        Ok(())
    }

    fn check_separable(&self) -> Result<(), GenerateError> {
        let classes: Vec<&Ident> = self.class_counts.keys().collect();
        for (i, a) in classes.iter().enumerate() {
            for b in classes.iter().skip(i + 1) {
                let pairs_a: BTreeSet<_> = self
                    .attribute_patterns
                    .get(*a)
                    .into_iter()
                    .flatten()
                    .flatten()
                    .collect();
                let pairs_b: BTreeSet<_> = self
                    .attribute_patterns
                    .get(*b)
                    .into_iter()
                    .flatten()
                    .flatten()
                    .collect();
                if let Some(shared) = pairs_a.intersection(&pairs_b).next() {
                    return Err(Self::invalid(format!(
                        "separable set, but classes {a} and {b} share planted pair (au{}, {})",
                        shared.0,
                        shared.1.token()
                    )));
                }
                let triples_a: BTreeSet<_> = self
                    .relation_patterns
                    .get(*a)
                    .into_iter()
                    .flatten()
                    .map(RelationPattern::canonical)
                    .collect();
                let triples_b: BTreeSet<_> = self
                    .relation_patterns
                    .get(*b)
                    .into_iter()
                    .flatten()
                    .map(RelationPattern::canonical)
                    .collect();
                if let Some((relation, au1, au2)) = triples_a.intersection(&triples_b).next() {
                    return Err(Self::invalid(format!(
                        "separable set, but classes {a} and {b} share planted relation {relation}(au{au1},au{au2})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Fewest timestamps above zero needed to realize a relation.
fn min_horizon(relation: AllenRelation) -> u64 {
    let forward = if relation.is_forward() {
        relation
    } else {
        relation.converse()
    };
    match forward {
        AllenRelation::Equals => 1,
        AllenRelation::Meets | AllenRelation::Starts | AllenRelation::Finishes => 2,
        _ => 3,
    }
}

fn sample_points(count: usize, horizon: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut points = BTreeSet::new();
    while points.len() < count {
        points.insert(rng.gen_range(0..=horizon));
    }
    points.into_iter().collect()
}

/// Two intervals within [0, horizon] whose classification is exactly
/// `relation`.
pub fn realize_relation(
    relation: AllenRelation,
    horizon: u64,
    rng: &mut ChaCha8Rng,
) -> (Interval, Interval) {
    if !relation.is_forward() {
        let (b, a) = realize_relation(relation.converse(), horizon, rng);
        return (a, b);
    }
    let interval = |on, off| Interval::new_unchecked(on, off);
    let (a, b) = match relation {
        AllenRelation::Equals => {
            let p = sample_points(2, horizon, rng);
            (interval(p[0], p[1]), interval(p[0], p[1]))
        }
        AllenRelation::Meets => {
            let p = sample_points(3, horizon, rng);
            (interval(p[0], p[1]), interval(p[1], p[2]))
        }
        AllenRelation::Starts => {
            let p = sample_points(3, horizon, rng);
            (interval(p[0], p[1]), interval(p[0], p[2]))
        }
        AllenRelation::Finishes => {
            let p = sample_points(3, horizon, rng);
            (interval(p[1], p[2]), interval(p[0], p[2]))
        }
        AllenRelation::Before => {
            let p = sample_points(4, horizon, rng);
            (interval(p[0], p[1]), interval(p[2], p[3]))
        }
        AllenRelation::Overlaps => {
            let p = sample_points(4, horizon, rng);
            (interval(p[0], p[2]), interval(p[1], p[3]))
        }
        AllenRelation::During => {
            let p = sample_points(4, horizon, rng);
            (interval(p[1], p[2]), interval(p[0], p[3]))
        }
        _ => unreachable!("forward relations handled above"),
    };
    debug_assert_eq!(classify(a, b), relation);
    (a, b)
}

fn random_interval(horizon: u64, rng: &mut ChaCha8Rng) -> Interval {
    let on = rng.gen_range(0..horizon);
    let off = rng.gen_range(on + 1..=horizon);
    Interval::new_unchecked(on, off)
}

/// Generates a dataset deterministically from the config's seed.
pub fn generate(config: &GeneratorConfig) -> Result<Dataset, GenerateError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let weights =
        WeightedIndex::new(config.intensity_weights.iter().map(|(_, w)| *w)).expect("validated");
    let sample_intensity = |rng: &mut ChaCha8Rng| config.intensity_weights[weights.sample(rng)].0;

    let relation_aus = config.relation_aus();
    let planted_pairs = config.planted_pairs();
    let noise_aus: Vec<u32> = {
        let mut aus: Vec<u32> = config
            .vocabulary
            .iter()
            .copied()
            .filter(|au| !relation_aus.contains(au))
            .collect();
        aus.sort_unstable();
        aus.dedup();
        aus
    };

    let (min_events, max_events) = config.events_per_sequence;
    let mut sequences = Vec::new();
    let mut counter = 0usize;
    for (class, &count) in &config.class_counts {
        let attribute_patterns = config
            .attribute_patterns
            .get(class)
            .cloned()
            .unwrap_or_default();
        let relation_patterns = config
            .relation_patterns
            .get(class)
            .cloned()
            .unwrap_or_default();
        for index in 0..count {
            counter += 1;
            let id = Ident::new(format!("s{counter}")).expect("generated id");
            let total = rng.gen_range(min_events..=max_events);
            let mut planned: Vec<(u32, Intensity, Interval)> = Vec::new();
            for pattern in &relation_patterns {
                let (first, second) = realize_relation(pattern.relation, config.horizon, &mut rng);
                planned.push((pattern.first_au, sample_intensity(&mut rng), first));
                planned.push((pattern.second_au, sample_intensity(&mut rng), second));
            }
            if let Some(pattern) = attribute_patterns
                .get(index % attribute_patterns.len().max(1))
                .filter(|_| !attribute_patterns.is_empty())
            {
                for &(au, intensity) in pattern {
                    planned.push((au, intensity, random_interval(config.horizon, &mut rng)));
                }
            }
            let free_slots = total.saturating_sub(planned.len());
            let noise_events = (config.noise_rate * free_slots as f64).round() as usize;
            if noise_events > 0 && noise_aus.is_empty() {
                return Err(GeneratorConfig::invalid(
                    "noise events requested but every vocabulary AU is reserved by a relation pattern",
                ));
            }
            for _ in 0..noise_events {
                let mut accepted = None;
                for _ in 0..64 {
                    let au = noise_aus[rng.gen_range(0..noise_aus.len())];
                    let intensity = sample_intensity(&mut rng);
                    if !planted_pairs.contains(&(au, intensity)) {
                        accepted = Some((au, intensity));
                        break;
                    }
                }
                let (au, intensity) = accepted.ok_or_else(|| {
                    GeneratorConfig::invalid(
                        "could not sample a noise event distinct from the planted patterns",
                    )
                })?;
                planned.push((au, intensity, random_interval(config.horizon, &mut rng)));
            }
            planned.sort_by_key(|&(_, _, interval)| interval.on);
            let width = planned.len().to_string().len();
            let events = planned
                .iter()
                .enumerate()
                .map(|(k, &(au, intensity, interval))| {
                    Ok(AuEvent {
                        sequence_id: Some(id.clone()),
                        event_id: Ident::new(format!("e{:0width$}", k + 1))?,
                        au: ActionUnit::new(au)?,
                        onset: interval.on,
                        offset: interval.off,
                        intensity,
                    })
                })
                .collect::<Result<Vec<_>, GenerateError>>()?;
            sequences.push(SequenceRecord {
                id,
                label: class.clone(),
                events,
            });
        }
    }
    let classes = config.class_counts.keys().cloned().collect();
    Ok(Dataset::new(classes, sequences)?)
}
