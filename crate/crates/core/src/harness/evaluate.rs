//! End-to-end evaluation: trains per-class theories in both modes,
//! represents every covered sequence under both feature origins, selects
//! near and far misses against the contrast classes, and aggregates
//! counts and explanation lengths per cell.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::contrast::{contrast, rank, select_far, select_near, MissKind, SimilarityMetric};
use crate::explain::{
    propositionalize_sequence, propositionalize_trace, trace, FeatureSet, Origin,
};
use crate::learner::{learn, CoverageReport, LearnerConfig};
use crate::logic::{theory_covers, FactSet, Theory};
use crate::sequence::{Dataset, Ident, Mode};

/// Learner settings per mode.
#[derive(Debug, Clone)]
pub struct EvalConfigs {
    pub attributes: LearnerConfig,
    pub relations: LearnerConfig,
}

impl Default for EvalConfigs {
    fn default() -> Self {
        EvalConfigs {
            attributes: LearnerConfig::attributes(),
            relations: LearnerConfig::relations(),
        }
    }
}

fn round2(value: f64) -> f64 {
    (value * 100.0).round() / 100.0
}

fn serialize_round2_opt<S: Serializer>(
    value: &Option<f64>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => serializer.serialize_some(&round2(*v)),
        None => serializer.serialize_none(),
    }
}

/// Aggregated miss statistics for one approach, mode, metric and class
/// ("all" pools every class).
#[derive(Debug, Clone, Serialize)]
pub struct CellStats {
    pub approach: Origin,
    pub mode: Mode,
    pub metric: SimilarityMetric,
    pub class: String,
    /// Sequences covered by their own class's theory.
    pub targets: usize,
    pub targets_without_near: usize,
    /// Mean near-miss count per target.
    #[serde(serialize_with = "serialize_round2_opt")]
    pub mean_near_count: Option<f64>,
    /// Mean explanation length over all (target, near miss) pairs.
    #[serde(serialize_with = "serialize_round2_opt")]
    pub mean_near_length: Option<f64>,
    /// Mean explanation length over all (target, far miss) pairs.
    #[serde(serialize_with = "serialize_round2_opt")]
    pub mean_far_length: Option<f64>,
    /// Every target's near-miss set came back empty: no contrast
    /// sequence shares a single feature with any target.
    pub zero_intersection: bool,
}

/// One class's training result in one mode.
#[derive(Debug, Clone, Serialize)]
pub struct TrainingSummary {
    pub mode: Mode,
    pub theory: String,
    pub report: CoverageReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainingFailure {
    pub mode: Mode,
    pub class: String,
    pub error: String,
}

/// Previously reported means kept alongside computed cells for scale
/// comparison; never recomputed here.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceRow {
    pub approach: Origin,
    pub mode: Mode,
    pub metric: SimilarityMetric,
    pub n_nm: Option<f64>,
    pub l_nm: Option<f64>,
    pub l_fm: Option<f64>,
    pub note: String,
}

fn reference_rows() -> Vec<ReferenceRow> {
    let reported = "paper-reported (TMS, not reproducible)";
    let no_near = "paper-reported (TMS, not reproducible); no near misses found";
    let row = |approach, mode, metric, n_nm, l_nm, l_fm, note: &str| ReferenceRow {
        approach,
        mode,
        metric,
        n_nm,
        l_nm,
        l_fm,
        note: note.to_string(),
    };
    vec![
        row(
            Origin::FullBk,
            Mode::Attributes,
            SimilarityMetric::Jaccard,
            Some(1.09),
            Some(7.92),
            Some(18.92),
            reported,
        ),
        row(
            Origin::FullBk,
            Mode::Attributes,
            SimilarityMetric::Overlap,
            Some(2.36),
            Some(8.69),
            Some(12.33),
            reported,
        ),
        row(
            Origin::FullBk,
            Mode::Relations,
            SimilarityMetric::Jaccard,
            Some(1.19),
            Some(50.68),
            Some(99.88),
            reported,
        ),
        row(
            Origin::FullBk,
            Mode::Relations,
            SimilarityMetric::Overlap,
            Some(3.06),
            Some(69.76),
            Some(57.49),
            reported,
        ),
        row(
            Origin::Trace,
            Mode::Attributes,
            SimilarityMetric::Jaccard,
            Some(1.75),
            Some(4.52),
            Some(6.72),
            reported,
        ),
        row(
            Origin::Trace,
            Mode::Attributes,
            SimilarityMetric::Overlap,
            Some(3.58),
            Some(4.65),
            Some(6.21),
            reported,
        ),
        row(
            Origin::Trace,
            Mode::Relations,
            SimilarityMetric::Jaccard,
            None,
            None,
            None,
            no_near,
        ),
        row(
            Origin::Trace,
            Mode::Relations,
            SimilarityMetric::Overlap,
            None,
            None,
            None,
            no_near,
        ),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub cells: Vec<CellStats>,
    pub training: Vec<TrainingSummary>,
    pub failures: Vec<TrainingFailure>,
    pub reference: Vec<ReferenceRow>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn cell(
        &self,
        approach: Origin,
        mode: Mode,
        metric: SimilarityMetric,
        class: &str,
    ) -> Option<&CellStats> {
        self.cells.iter().find(|c| {
            c.approach == approach && c.mode == mode && c.metric == metric && c.class == class
        })
    }

    fn training_for(&self, mode: Mode) -> Vec<&TrainingSummary> {
        self.training.iter().filter(|t| t.mode == mode).collect()
    }

    /// Pooled rows only, one per approach, mode and metric; absent modes
    /// render as dashes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("approach,mode,metric,n_nm,l_nm,l_fm,acc_pos,covered\n");
        let fmt = |value: Option<f64>| match value {
            Some(v) => format!("{:.2}", round2(v)),
            None => "-".to_string(),
        };
        for approach in [Origin::FullBk, Origin::Trace] {
            for mode in [Mode::Attributes, Mode::Relations] {
                let summaries = self.training_for(mode);
                let (acc_pos, covered) = if summaries.is_empty() {
                    ("-".to_string(), "-".to_string())
                } else {
                    let mean_accuracy = summaries.iter().map(|t| t.report.accuracy).sum::<f64>()
                        / summaries.len() as f64;
                    let total: usize = summaries.iter().map(|t| t.report.covered_positives).sum();
                    (format!("{mean_accuracy:.2}"), total.to_string())
                };
                for metric in SimilarityMetric::ALL {
                    let cell = self.cell(approach, mode, metric, "all");
                    let (n_nm, l_nm, l_fm) = match cell {
                        Some(c) => (
                            fmt(c.mean_near_count),
                            fmt(c.mean_near_length),
                            fmt(c.mean_far_length),
                        ),
                        None => ("-".to_string(), "-".to_string(), "-".to_string()),
                    };
                    let (acc, cov) = if cell.is_some() {
                        (acc_pos.clone(), covered.clone())
                    } else {
                        ("-".to_string(), "-".to_string())
                    };
                    out.push_str(&format!(
                        "{},{},{},{n_nm},{l_nm},{l_fm},{acc},{cov}\n",
                        approach.as_str(),
                        mode.as_str(),
                        metric.as_str()
                    ));
                }
            }
        }
        out
    }
}

struct TargetMisses {
    class: Ident,
    near_count: usize,
    near_lengths: Vec<usize>,
    far_lengths: Vec<usize>,
}

fn mean(sum: f64, count: usize) -> Option<f64> {
    (count > 0).then(|| sum / count as f64)
}

fn mean_lengths(lengths: &[usize]) -> Option<f64> {
    mean(lengths.iter().map(|&l| l as f64).sum(), lengths.len())
}

fn aggregate(
    approach: Origin,
    mode: Mode,
    metric: SimilarityMetric,
    class: &str,
    targets: &[&TargetMisses],
) -> CellStats {
    let near_counts: usize = targets.iter().map(|t| t.near_count).sum();
    let targets_without_near = targets.iter().filter(|t| t.near_count == 0).count();
    let near_lengths: Vec<usize> = targets
        .iter()
        .flat_map(|t| t.near_lengths.iter().copied())
        .collect();
    let far_lengths: Vec<usize> = targets
        .iter()
        .flat_map(|t| t.far_lengths.iter().copied())
        .collect();
    CellStats {
        approach,
        mode,
        metric,
        class: class.to_string(),
        targets: targets.len(),
        targets_without_near,
        mean_near_count: mean(near_counts as f64, targets.len()),
        mean_near_length: mean_lengths(&near_lengths),
        mean_far_length: mean_lengths(&far_lengths),
        zero_intersection: !targets.is_empty() && targets_without_near == targets.len(),
    }
}

fn evaluate_mode(
    dataset: &Dataset,
    mode: Mode,
    config: &LearnerConfig,
    report: &mut EvaluationReport,
) {
    let mut theories: BTreeMap<Ident, Theory> = BTreeMap::new();
    let mut failed = false;
    for class in &dataset.classes {
        match learn(dataset, class, config) {
            Ok(outcome) => {
                report.training.push(TrainingSummary {
                    mode,
                    theory: outcome.theory.render(),
                    report: outcome.report,
                });
                theories.insert(class.clone(), outcome.theory);
            }
            Err(error) => {
                failed = true;
                report.failures.push(TrainingFailure {
                    mode,
                    class: class.to_string(),
                    error: error.to_string(),
                });
            }
        }
    }
    if failed {
        return;
    }

    let mut trace_features: BTreeMap<Ident, FeatureSet> = BTreeMap::new();
    let mut full_features: BTreeMap<Ident, FeatureSet> = BTreeMap::new();
    let mut covered: Vec<Ident> = Vec::new();
    for sequence in &dataset.sequences {
        let facts = FactSet::for_mode(sequence, mode, &config.relation_config);
        let theory = &theories[&sequence.label];
        if !theory_covers(theory, &facts).is_empty() {
            covered.push(sequence.id.clone());
        }
        let own_trace = trace(theory, &facts);
        trace_features.insert(
            sequence.id.clone(),
            propositionalize_trace(&own_trace, mode),
        );
        full_features.insert(
            sequence.id.clone(),
            propositionalize_sequence(sequence, mode, &config.relation_config),
        );
    }

    let class_of: BTreeMap<Ident, Ident> = dataset
        .sequences
        .iter()
        .map(|s| (s.id.clone(), s.label.clone()))
        .collect();
    let pools: BTreeMap<Ident, (Vec<&FeatureSet>, Vec<&FeatureSet>)> = dataset
        .classes
        .iter()
        .map(|class| {
            let members: Vec<&Ident> = dataset
                .sequences
                .iter()
                .filter(|s| &s.label != class)
                .map(|s| &s.id)
                .collect();
            let traces = members.iter().map(|id| &trace_features[*id]).collect();
            let fulls = members.iter().map(|id| &full_features[*id]).collect();
            (class.clone(), (traces, fulls))
        })
        .collect();

    let combos: Vec<(Origin, SimilarityMetric)> = [Origin::FullBk, Origin::Trace]
        .into_iter()
        .flat_map(|approach| SimilarityMetric::ALL.map(|metric| (approach, metric)))
        .collect();

    let outcomes: Vec<Vec<TargetMisses>> = covered
        .par_iter()
        .map(|id| {
            let class = &class_of[id];
            let (trace_pool, full_pool) = &pools[class];
            combos
                .iter()
                .map(|&(approach, metric)| {
                    let (target, pool) = match approach {
                        Origin::Trace => (&trace_features[id], trace_pool),
                        Origin::FullBk => (&full_features[id], full_pool),
                    };
                    let features = match approach {
                        Origin::Trace => &trace_features,
                        Origin::FullBk => &full_features,
                    };
                    let ranking = rank(target, pool, metric).expect("non-empty pool");
                    let length = |miss: &Ident, kind| {
                        contrast(target, &features[miss], kind, metric)
                            .expect("comparable feature sets")
                            .length
                    };
                    let near = select_near(&ranking);
                    let far = select_far(&ranking);
                    TargetMisses {
                        class: class.clone(),
                        near_count: near.len(),
                        near_lengths: near.iter().map(|m| length(m, MissKind::Near)).collect(),
                        far_lengths: far.iter().map(|m| length(m, MissKind::Far)).collect(),
                    }
                })
                .collect()
        })
        .collect();

    for (index, &(approach, metric)) in combos.iter().enumerate() {
        let per_combo: Vec<&TargetMisses> = outcomes.iter().map(|row| &row[index]).collect();
        for class in &dataset.classes {
            let of_class: Vec<&TargetMisses> = per_combo
                .iter()
                .filter(|t| &t.class == class)
                .copied()
                .collect();
            report
                .cells
                .push(aggregate(approach, mode, metric, class.as_str(), &of_class));
        }
        report
            .cells
            .push(aggregate(approach, mode, metric, "all", &per_combo));
    }
}

/// Trains both modes and fills every cell; training failures land in
/// `failures` and leave the mode's cells absent.
pub fn evaluate(dataset: &Dataset, configs: &EvalConfigs) -> EvaluationReport {
    let mut report = EvaluationReport {
        cells: Vec::new(),
        training: Vec::new(),
        failures: Vec::new(),
        reference: reference_rows(),
    };
    evaluate_mode(dataset, Mode::Attributes, &configs.attributes, &mut report);
    evaluate_mode(dataset, Mode::Relations, &configs.relations, &mut report);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generator::{generate, GeneratorConfig};

    fn ident(token: &str) -> Ident {
        Ident::new(token).unwrap()
    }

    fn default_report(seed: u64) -> EvaluationReport {
        let dataset = generate(&GeneratorConfig {
            seed,
            ..GeneratorConfig::default()
        })
        .unwrap();
        evaluate(&dataset, &EvalConfigs::default())
    }

    #[test]
    fn mean_near_count_is_arithmetic_mean() {
        let misses: Vec<TargetMisses> = [1usize, 2, 1, 3]
            .into_iter()
            .map(|n| TargetMisses {
                class: ident("pain"),
                near_count: n,
                near_lengths: vec![0; n],
                far_lengths: vec![1],
            })
            .collect();
        let refs: Vec<&TargetMisses> = misses.iter().collect();
        let cell = aggregate(
            Origin::Trace,
            Mode::Attributes,
            SimilarityMetric::Jaccard,
            "all",
            &refs,
        );
        assert_eq!(cell.mean_near_count, Some(1.75));
        assert!(!cell.zero_intersection);
    }

    #[test]
    fn report_contains_every_cell_for_both_modes() {
        let report = default_report(7);
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        assert_eq!(report.cells.len(), 24);
        assert_eq!(report.training.len(), 4);
        for approach in [Origin::FullBk, Origin::Trace] {
            for mode in [Mode::Attributes, Mode::Relations] {
                for metric in SimilarityMetric::ALL {
                    for class in ["pain", "disgust", "all"] {
                        assert!(
                            report.cell(approach, mode, metric, class).is_some(),
                            "missing cell {approach:?} {mode:?} {metric:?} {class}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn trend_holds_on_default_config() {
        let report = default_report(7);
        for metric in SimilarityMetric::ALL {
            let trace = report
                .cell(Origin::Trace, Mode::Attributes, metric, "all")
                .unwrap();
            let full = report
                .cell(Origin::FullBk, Mode::Attributes, metric, "all")
                .unwrap();
            let near = trace.mean_near_length.unwrap();
            let far = trace.mean_far_length.unwrap();
            assert!(near <= far, "{metric:?}: near {near} > far {far}");
            assert!(
                full.mean_near_length.unwrap() >= near,
                "{metric:?}: full-knowledge explanations shorter than trace ones"
            );
        }
    }

    #[test]
    fn separable_relations_yield_zero_intersection_trace_cells() {
        let dataset = generate(&GeneratorConfig::relational_separable(3)).unwrap();
        let report = evaluate(&dataset, &EvalConfigs::default());
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        for metric in SimilarityMetric::ALL {
            let cell = report
                .cell(Origin::Trace, Mode::Relations, metric, "all")
                .unwrap();
            assert!(cell.zero_intersection, "{metric:?}");
            assert_eq!(cell.mean_near_count, Some(0.0));
            assert_eq!(cell.targets_without_near, cell.targets);
            assert_eq!(cell.mean_near_length, None);
            assert!(cell.mean_far_length.is_some());
        }
    }

    #[test]
    fn reference_rows_carry_reported_means() {
        let report = default_report(1);
        let reference = report
            .reference
            .iter()
            .find(|r| {
                r.approach == Origin::Trace
                    && r.mode == Mode::Attributes
                    && r.metric == SimilarityMetric::Jaccard
            })
            .unwrap();
        assert_eq!(reference.n_nm, Some(1.75));
        assert_eq!(reference.l_nm, Some(4.52));
        assert_eq!(reference.l_fm, Some(6.72));
        assert!(reference.note.contains("not reproducible"));
        let absent = report
            .reference
            .iter()
            .find(|r| r.approach == Origin::Trace && r.mode == Mode::Relations)
            .unwrap();
        assert_eq!(absent.n_nm, None);
        assert_eq!(report.reference.len(), 8);
    }

    #[test]
    fn csv_has_header_and_eight_rows() {
        let report = default_report(7);
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(
            lines[0],
            "approach,mode,metric,n_nm,l_nm,l_fm,acc_pos,covered"
        );
        assert!(lines[1].starts_with("full_bk,attributes,jaccard,"));
        assert!(lines[8].starts_with("trace,relations,overlap,"));
        for line in &lines[1..] {
            assert_eq!(line.matches(',').count(), 7, "{line}");
        }
    }

    #[test]
    fn training_failure_marks_mode_absent_but_keeps_other_mode() {
        let dataset = generate(&GeneratorConfig {
            seed: 5,
            ..GeneratorConfig::default()
        })
        .unwrap();
        let configs = EvalConfigs {
            attributes: LearnerConfig {
                max_body_literals: 0,
                on_seed_failure: crate::learner::SeedFailure::Fail,
                ..LearnerConfig::attributes()
            },
            relations: LearnerConfig::relations(),
        };
        let report = evaluate(&dataset, &configs);
        assert!(!report.failures.is_empty());
        assert!(report.failures.iter().all(|f| f.mode == Mode::Attributes));
        assert!(report
            .cell(
                Origin::Trace,
                Mode::Attributes,
                SimilarityMetric::Jaccard,
                "all"
            )
            .is_none());
        assert!(report
            .cell(
                Origin::Trace,
                Mode::Relations,
                SimilarityMetric::Jaccard,
                "all"
            )
            .is_some());
        let csv = report.to_csv();
        assert!(csv.contains("full_bk,attributes,jaccard,-,-,-,-,-"));
    }

    #[test]
    fn report_json_is_deterministic() {
        let a = default_report(9).to_json();
        let b = default_report(9).to_json();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
    }
}
