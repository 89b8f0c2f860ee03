//! Near and far misses: ranking contrast-class examples by exact set
//! similarity to a target and deriving contrastive explanations from the
//! feature differences.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::SimilarityError;
use crate::explain::{Feature, FeatureSet};
use crate::sequence::Ident;

/// Exact similarity value in [0, 1].
pub type Similarity = Ratio<u64>;

/// Renders a similarity as a reduced fraction, always with an explicit
/// denominator: `0/1`, `1/3`, `1/1`.
pub fn render_similarity(value: Similarity) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMetric {
    /// |A∩B| / |A∪B|
    Jaccard,
    /// |A∩B| / min(|A|, |B|)
    Overlap,
}

impl SimilarityMetric {
    pub const ALL: [SimilarityMetric; 2] = [SimilarityMetric::Jaccard, SimilarityMetric::Overlap];

    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityMetric::Jaccard => "jaccard",
            SimilarityMetric::Overlap => "overlap",
        }
    }
}

impl fmt::Display for SimilarityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_comparable(a: &FeatureSet, b: &FeatureSet) -> Result<(), SimilarityError> {
    if a.mode != b.mode {
        return Err(SimilarityError::ModeMismatch(
            a.mode.to_string(),
            b.mode.to_string(),
        ));
    }
    if a.origin != b.origin {
        return Err(SimilarityError::OriginMismatch(
            a.origin.to_string(),
            b.origin.to_string(),
        ));
    }
    Ok(())
}

/// Exact rational similarity of two feature sets. Any comparison
/// involving an empty set is 0: an empty set carries no shared evidence.
pub fn similarity(
    a: &FeatureSet,
    b: &FeatureSet,
    metric: SimilarityMetric,
) -> Result<Similarity, SimilarityError> {
    check_comparable(a, b)?;
    if a.is_empty() || b.is_empty() {
        return Ok(Similarity::new(0, 1));
    }
    let intersection = a.features.intersection(&b.features).count() as u64;
    let denominator = match metric {
        SimilarityMetric::Jaccard => a.features.union(&b.features).count() as u64,
        SimilarityMetric::Overlap => a.len().min(b.len()) as u64,
    };
    Ok(Similarity::new(intersection, denominator))
}

/// Every contrast-pool example with its similarity to the target, sorted
/// by descending similarity, ties by ascending id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissRanking {
    pub target_id: Ident,
    pub metric: SimilarityMetric,
    pub entries: Vec<(Ident, Similarity)>,
}

/// Ranks the whole pool against the target.
pub fn rank(
    target: &FeatureSet,
    pool: &[&FeatureSet],
    metric: SimilarityMetric,
) -> Result<MissRanking, SimilarityError> {
    if pool.is_empty() {
        return Err(SimilarityError::EmptyPool);
    }
    let mut entries = Vec::with_capacity(pool.len());
    for member in pool {
        entries.push((
            member.sequence_id.clone(),
            similarity(target, member, metric)?,
        ));
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(MissRanking {
        target_id: target.sequence_id.clone(),
        metric,
        entries,
    })
}

/// All entries attaining the maximum similarity, provided that maximum is
/// strictly positive; otherwise empty (no near misses exist).
pub fn select_near(ranking: &MissRanking) -> BTreeSet<Ident> {
    let Some((_, best)) = ranking.entries.first() else {
        return BTreeSet::new();
    };
    if *best == Similarity::new(0, 1) {
        return BTreeSet::new();
    }
    ranking
        .entries
        .iter()
        .filter(|(_, s)| s == best)
        .map(|(id, _)| id.clone())
        .collect()
}

/// All entries attaining the minimum similarity, regardless of value.
pub fn select_far(ranking: &MissRanking) -> BTreeSet<Ident> {
    let Some((_, worst)) = ranking.entries.last() else {
        return BTreeSet::new();
    };
    ranking
        .entries
        .iter()
        .filter(|(_, s)| s == worst)
        .map(|(id, _)| id.clone())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissKind {
    Near,
    Far,
}

impl MissKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MissKind::Near => "near",
            MissKind::Far => "far",
        }
    }
}

impl fmt::Display for MissKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The feature differences between a target and one of its misses:
/// what the target shows that the miss lacks (`present_only`) and the
/// other way around (`absent_only`). `length` is the size of the
/// symmetric difference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContrastiveExplanation {
    pub target_id: Ident,
    pub miss_id: Ident,
    pub miss_kind: MissKind,
    pub similarity: Similarity,
    pub present_only: BTreeSet<Feature>,
    pub absent_only: BTreeSet<Feature>,
    pub length: usize,
}

/// Computes the contrastive explanation of `target` against `miss`.
pub fn contrast(
    target: &FeatureSet,
    miss: &FeatureSet,
    kind: MissKind,
    metric: SimilarityMetric,
) -> Result<ContrastiveExplanation, SimilarityError> {
    let value = similarity(target, miss, metric)?;
    let present_only: BTreeSet<Feature> = target
        .features
        .difference(&miss.features)
        .copied()
        .collect();
    let absent_only: BTreeSet<Feature> = miss
        .features
        .difference(&target.features)
        .copied()
        .collect();
    let length = present_only.len() + absent_only.len();
    Ok(ContrastiveExplanation {
        target_id: target.sequence_id.clone(),
        miss_id: miss.sequence_id.clone(),
        miss_kind: kind,
        similarity: value,
        present_only,
        absent_only,
        length,
    })
}

impl ContrastiveExplanation {
    fn sorted_tokens(features: &BTreeSet<Feature>) -> Vec<String> {
        let mut tokens: Vec<String> = features.iter().map(Feature::token).collect();
        tokens.sort();
        tokens
    }

    /// `{"target":…,"miss":…,"kind":…,"similarity":"p/q",
    /// "present_only":[…],"absent_only":[…],"length":…}` with feature
    /// lists sorted lexicographically.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Rendered<'a> {
            target: &'a str,
            miss: &'a str,
            kind: &'a str,
            similarity: String,
            present_only: Vec<String>,
            absent_only: Vec<String>,
            length: usize,
        }
        serde_json::to_string(&Rendered {
            target: self.target_id.as_str(),
            miss: self.miss_id.as_str(),
            kind: self.miss_kind.as_str(),
            similarity: render_similarity(self.similarity),
            present_only: Self::sorted_tokens(&self.present_only),
            absent_only: Self::sorted_tokens(&self.absent_only),
            length: self.length,
        })
        .expect("explanation serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::Origin;
    use crate::sequence::{ActionUnit, Intensity, Mode};

    fn feature(au: u32, intensity: Intensity, occurrence: u32) -> Feature {
        Feature::Attribute {
            au: ActionUnit::new(au).unwrap(),
            intensity,
            occurrence,
        }
    }

    fn set(id: &str, codes: &[u32]) -> FeatureSet {
        FeatureSet {
            sequence_id: Ident::new(id).unwrap(),
            origin: Origin::Trace,
            mode: Mode::Attributes,
            features: codes
                .iter()
                .map(|&code| feature(code, Intensity::C, 1))
                .collect(),
        }
    }

    #[test]
    fn worked_similarity_example() {
        let a = set("a", &[1, 2]);
        let b = set("b", &[2, 3]);
        assert_eq!(
            similarity(&a, &b, SimilarityMetric::Jaccard).unwrap(),
            Similarity::new(1, 3)
        );
        assert_eq!(
            similarity(&a, &b, SimilarityMetric::Overlap).unwrap(),
            Similarity::new(1, 2)
        );
    }

    #[test]
    fn identical_sets_have_similarity_one() {
        let a = set("a", &[1, 2, 4]);
        let b = set("b", &[1, 2, 4]);
        for metric in SimilarityMetric::ALL {
            assert_eq!(similarity(&a, &b, metric).unwrap(), Similarity::new(1, 1));
        }
    }

    #[test]
    fn subset_saturates_overlap() {
        let a = set("a", &[1, 2]);
        let b = set("b", &[1, 2, 4, 6, 7]);
        assert_eq!(
            similarity(&a, &b, SimilarityMetric::Overlap).unwrap(),
            Similarity::new(1, 1)
        );
        assert_eq!(
            similarity(&a, &b, SimilarityMetric::Jaccard).unwrap(),
            Similarity::new(2, 5)
        );
    }

    #[test]
    fn empty_sets_have_similarity_zero() {
        let empty = set("a", &[]);
        let other = set("b", &[1, 2]);
        for metric in SimilarityMetric::ALL {
            assert_eq!(
                similarity(&empty, &other, metric).unwrap(),
                Similarity::new(0, 1)
            );
            assert_eq!(
                similarity(&other, &empty, metric).unwrap(),
                Similarity::new(0, 1)
            );
            assert_eq!(
                similarity(&empty, &empty, metric).unwrap(),
                Similarity::new(0, 1)
            );
        }
    }

    #[test]
    fn similarity_is_symmetric() {
        let a = set("a", &[1, 2, 6]);
        let b = set("b", &[2, 6, 7, 9]);
        for metric in SimilarityMetric::ALL {
            assert_eq!(
                similarity(&a, &b, metric).unwrap(),
                similarity(&b, &a, metric).unwrap()
            );
        }
    }

    #[test]
    fn mismatched_sets_are_rejected() {
        let a = set("a", &[1]);
        let mut b = set("b", &[1]);
        b.mode = Mode::Relations;
        assert!(matches!(
            similarity(&a, &b, SimilarityMetric::Jaccard),
            Err(SimilarityError::ModeMismatch(_, _))
        ));
        let mut c = set("c", &[1]);
        c.origin = Origin::FullBk;
        assert!(matches!(
            similarity(&a, &c, SimilarityMetric::Jaccard),
            Err(SimilarityError::OriginMismatch(_, _))
        ));
    }

    #[test]
    fn ranking_sorts_by_similarity_then_id() {
        let target = set("t", &[1, 2, 4, 6, 7, 9, 10, 12, 43, 45]);
        let close_b = set("b", &[1, 2, 4, 6, 7, 9, 10, 12, 43]);
        let close_a = set("a", &[1, 2, 4, 6, 7, 9, 10, 12, 45]);
        let distant = set("z", &[1, 20, 23, 25, 26]);
        let pool: Vec<&FeatureSet> = vec![&distant, &close_b, &close_a];
        let ranking = rank(&target, &pool, SimilarityMetric::Jaccard).unwrap();
        let ids: Vec<&str> = ranking.entries.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "z"]);
        assert_eq!(ranking.entries[0].1, ranking.entries[1].1);
    }

    #[test]
    fn near_misses_need_positive_similarity() {
        let target = set("t", &[1, 2]);
        let m1 = set("m1", &[4, 6]);
        let m2 = set("m2", &[7, 9]);
        let pool: Vec<&FeatureSet> = vec![&m1, &m2];
        let ranking = rank(&target, &pool, SimilarityMetric::Jaccard).unwrap();
        assert!(select_near(&ranking).is_empty());
        assert_eq!(select_far(&ranking).len(), 2);
    }

    #[test]
    fn ties_select_whole_argmax_and_argmin_sets() {
        let target = set("t", &[1, 2, 4]);
        let m1 = set("m1", &[1, 2, 6]);
        let m2 = set("m2", &[1, 2, 7]);
        let m3 = set("m3", &[1, 9, 10]);
        let pool: Vec<&FeatureSet> = vec![&m1, &m2, &m3];
        let ranking = rank(&target, &pool, SimilarityMetric::Jaccard).unwrap();
        let near = select_near(&ranking);
        assert_eq!(near.len(), 2);
        assert!(near.contains(&Ident::new("m1").unwrap()));
        assert!(near.contains(&Ident::new("m2").unwrap()));
        let far = select_far(&ranking);
        assert_eq!(far.len(), 1);
        assert!(far.contains(&Ident::new("m3").unwrap()));
    }

    #[test]
    fn all_equal_positive_similarities_make_near_and_far_coincide() {
        let target = set("t", &[1, 2]);
        let m1 = set("m1", &[1, 6]);
        let m2 = set("m2", &[1, 7]);
        let pool: Vec<&FeatureSet> = vec![&m1, &m2];
        let ranking = rank(&target, &pool, SimilarityMetric::Jaccard).unwrap();
        assert_eq!(select_near(&ranking), select_far(&ranking));
        assert_eq!(select_near(&ranking).len(), 2);
    }

    #[test]
    fn single_element_pool_is_top_and_bottom() {
        let target = set("t", &[1, 2]);
        let only = set("m", &[1, 4]);
        let pool: Vec<&FeatureSet> = vec![&only];
        let ranking = rank(&target, &pool, SimilarityMetric::Overlap).unwrap();
        assert_eq!(select_near(&ranking), select_far(&ranking));
    }

    #[test]
    fn empty_pool_is_an_error() {
        let target = set("t", &[1]);
        assert!(matches!(
            rank(&target, &[], SimilarityMetric::Jaccard),
            Err(SimilarityError::EmptyPool)
        ));
    }

    #[test]
    fn contrast_splits_the_symmetric_difference() {
        let target = set("t", &[1, 2, 4]);
        let miss = set("m", &[2, 6]);
        let explanation =
            contrast(&target, &miss, MissKind::Near, SimilarityMetric::Jaccard).unwrap();
        assert_eq!(explanation.present_only.len(), 2);
        assert_eq!(explanation.absent_only.len(), 1);
        assert_eq!(explanation.length, 3);
        assert!(explanation
            .present_only
            .is_disjoint(&explanation.absent_only));
    }

    #[test]
    fn identical_and_disjoint_contrast_lengths() {
        let t = set("t", &[1, 2]);
        let same = set("m", &[1, 2]);
        let disjoint = set("n", &[4, 6, 7]);
        assert_eq!(
            contrast(&t, &same, MissKind::Near, SimilarityMetric::Jaccard)
                .unwrap()
                .length,
            0
        );
        assert_eq!(
            contrast(&t, &disjoint, MissKind::Far, SimilarityMetric::Jaccard)
                .unwrap()
                .length,
            5
        );
    }

    #[test]
    fn length_matches_set_algebra() {
        let t = set("t", &[1, 2, 4, 6]);
        let m = set("m", &[4, 6, 7]);
        let explanation = contrast(&t, &m, MissKind::Near, SimilarityMetric::Jaccard).unwrap();
        let shared = t.features.intersection(&m.features).count();
        assert_eq!(explanation.length, t.len() + m.len() - 2 * shared);
    }

    #[test]
    fn similarity_renders_as_reduced_fraction() {
        assert_eq!(render_similarity(Similarity::new(0, 5)), "0/1");
        assert_eq!(render_similarity(Similarity::new(3, 3)), "1/1");
        assert_eq!(render_similarity(Similarity::new(2, 6)), "1/3");
    }

    #[test]
    fn explanation_json_shape() {
        let target = set("t", &[4, 2]);
        let miss = set("m", &[2, 43]);
        let explanation =
            contrast(&target, &miss, MissKind::Near, SimilarityMetric::Jaccard).unwrap();
        assert_eq!(
            explanation.to_json(),
            r#"{"target":"t","miss":"m","kind":"near","similarity":"1/3","present_only":["au4_c_1"],"absent_only":["au43_c_1"],"length":2}"#
        );
    }
}
