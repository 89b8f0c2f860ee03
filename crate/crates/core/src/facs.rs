//! Bundled subset of the Facial Action Coding System name table.

/// FACS names for the commonly coded action units. Lookup is total for
/// this subset and absent otherwise.
const AU_NAMES: &[(u32, &str)] = &[
    (1, "inner brow raiser"),
    (2, "outer brow raiser"),
    (4, "brow lowerer"),
    (5, "upper lid raiser"),
    (6, "cheek raiser"),
    (7, "lid tightener"),
    (9, "nose wrinkler"),
    (10, "upper lip raiser"),
    (12, "lip corner puller"),
    (15, "lip corner depressor"),
    (17, "chin raiser"),
    (20, "lip stretcher"),
    (23, "lip tightener"),
    (25, "lips part"),
    (26, "jaw drop"),
    (27, "mouth stretch"),
    (43, "eyes closed"),
    (45, "blink"),
];

/// Human-readable FACS label for an AU code, if the bundled table has one.
pub fn au_name(code: u32) -> Option<&'static str> {
    AU_NAMES
        .binary_search_by_key(&code, |&(c, _)| c)
        .ok()
        .map(|i| AU_NAMES[i].1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_from_the_figure_caption() {
        assert_eq!(au_name(4), Some("brow lowerer"));
        assert_eq!(au_name(6), Some("cheek raiser"));
        assert_eq!(au_name(7), Some("lid tightener"));
        assert_eq!(au_name(43), Some("eyes closed"));
        assert_eq!(au_name(9), Some("nose wrinkler"));
    }

    #[test]
    fn unknown_codes_have_no_name() {
        assert_eq!(au_name(3), None);
        assert_eq!(au_name(99), None);
    }

    #[test]
    fn table_is_sorted_for_binary_search() {
        assert!(AU_NAMES.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
