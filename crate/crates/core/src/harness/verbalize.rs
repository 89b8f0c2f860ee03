//! Renders contrastive explanations as plain sentences, one per
//! differing feature.

use crate::allen::AllenRelation;
use crate::contrast::ContrastiveExplanation;
use crate::explain::Feature;
use crate::facs::au_name;
use crate::sequence::{ActionUnit, Intensity};

fn au_phrase(au: ActionUnit) -> String {
    match au_name(au.code()) {
        Some(name) => name.to_string(),
        None => format!("AU {}", au.code()),
    }
}

fn relation_verb(relation: AllenRelation) -> &'static str {
    match relation {
        AllenRelation::Before => "is before",
        AllenRelation::Meets => "meets",
        AllenRelation::Overlaps => "overlaps",
        AllenRelation::Starts => "starts with",
        AllenRelation::During => "is during",
        AllenRelation::Finishes => "finishes with",
        AllenRelation::Equals => "equals",
        AllenRelation::After => "is after",
        AllenRelation::MetBy => "is met by",
        AllenRelation::OverlappedBy => "is overlapped by",
        AllenRelation::StartedBy => "is started by",
        AllenRelation::FinishedBy => "is finished by",
        AllenRelation::Contains => "contains",
    }
}

fn describe(feature: &Feature) -> String {
    match feature {
        Feature::Attribute {
            au,
            intensity,
            occurrence,
        } => {
            let mut text = au_phrase(*au);
            if *intensity != Intensity::Na {
                text.push_str(&format!(" (intensity {})", intensity.token()));
            }
            if *occurrence >= 2 {
                text.push_str(&format!(" (occurrence {occurrence})"));
            }
            text
        }
        Feature::Relation {
            relation,
            first_au,
            second_au,
            occurrence,
        } => {
            let mut text = format!(
                "that {} {} {}",
                au_phrase(*first_au),
                relation_verb(*relation),
                au_phrase(*second_au)
            );
            if *occurrence >= 2 {
                text.push_str(&format!(" (occurrence {occurrence})"));
            }
            text
        }
    }
}

/// One sentence per differing feature, present differences first; an
/// empty explanation renders as a single fixed sentence.
pub fn verbalize(explanation: &ContrastiveExplanation) -> String {
    if explanation.present_only.is_empty() && explanation.absent_only.is_empty() {
        return "no differences found\n".to_string();
    }
    let mut out = String::new();
    for feature in &explanation.present_only {
        out.push_str(&format!("shows {}\n", describe(feature)));
    }
    for feature in &explanation.absent_only {
        out.push_str(&format!("does not show {}\n", describe(feature)));
    }
    out
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::contrast::{MissKind, Similarity};
    use crate::sequence::Ident;

    fn attribute(code: u32, intensity: Intensity, occurrence: u32) -> Feature {
        Feature::Attribute {
            au: ActionUnit::new(code).unwrap(),
            intensity,
            occurrence,
        }
    }

    fn explanation(present: Vec<Feature>, absent: Vec<Feature>) -> ContrastiveExplanation {
        ContrastiveExplanation {
            target_id: Ident::new("s1").unwrap(),
            miss_id: Ident::new("s2").unwrap(),
            miss_kind: MissKind::Near,
            similarity: Similarity::new(1, 3),
            length: present.len() + absent.len(),
            present_only: BTreeSet::from_iter(present),
            absent_only: BTreeSet::from_iter(absent),
        }
    }

    #[test]
    fn present_feature_renders_with_au_name() {
        let text = verbalize(&explanation(
            vec![attribute(7, Intensity::C, 1)],
            Vec::new(),
        ));
        assert_eq!(text, "shows lid tightener (intensity c)\n");
    }

    #[test]
    fn absent_feature_renders_negated() {
        let text = verbalize(&explanation(
            Vec::new(),
            vec![attribute(9, Intensity::B, 1)],
        ));
        assert_eq!(text, "does not show nose wrinkler (intensity b)\n");
    }

    #[test]
    fn empty_explanation_has_fixed_sentence() {
        let text = verbalize(&explanation(Vec::new(), Vec::new()));
        assert_eq!(text, "no differences found\n");
    }

    #[test]
    fn relation_feature_uses_verb_template() {
        let feature = Feature::Relation {
            relation: AllenRelation::Overlaps,
            first_au: ActionUnit::new(4).unwrap(),
            second_au: ActionUnit::new(43).unwrap(),
            occurrence: 1,
        };
        let text = verbalize(&explanation(vec![feature], Vec::new()));
        assert_eq!(text, "shows that brow lowerer overlaps eyes closed\n");
    }

    #[test]
    fn unnamed_au_and_extras_render_plainly() {
        let text = verbalize(&explanation(
            vec![attribute(99, Intensity::Na, 2)],
            Vec::new(),
        ));
        assert_eq!(text, "shows AU 99 (occurrence 2)\n");
    }

    #[test]
    fn present_sentences_come_before_absent_ones() {
        let text = verbalize(&explanation(
            vec![attribute(4, Intensity::C, 1)],
            vec![attribute(12, Intensity::D, 1)],
        ));
        assert_eq!(
            text,
            "shows brow lowerer (intensity c)\ndoes not show lip corner puller (intensity d)\n"
        );
    }
}
