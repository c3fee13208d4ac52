//! Bundled scenario catalog, embedded at compile time.  The files double as
//! configuration examples for user-written scenarios.

pub const BUNDLED: &[(&str, &str)] = &[
    (
        "axioms-trivial-frame",
        include_str!("../scenarios/axioms-trivial-frame.toml"),
    ),
    (
        "axioms-rotation-frame",
        include_str!("../scenarios/axioms-rotation-frame.toml"),
    ),
    (
        "elementary-v3prime",
        include_str!("../scenarios/elementary-v3prime.toml"),
    ),
    (
        "linear-energy-identity",
        include_str!("../scenarios/linear-energy-identity.toml"),
    ),
    (
        "flow-closed-form",
        include_str!("../scenarios/flow-closed-form.toml"),
    ),
    (
        "delay-tau-half",
        include_str!("../scenarios/delay-tau-half.toml"),
    ),
    (
        "bootstrap-ledger-family",
        include_str!("../scenarios/bootstrap-ledger-family.toml"),
    ),
    (
        "elementary-ledger-family",
        include_str!("../scenarios/elementary-ledger-family.toml"),
    ),
    ("tail-decay", include_str!("../scenarios/tail-decay.toml")),
    (
        "compactness-extract",
        include_str!("../scenarios/compactness-extract.toml"),
    ),
    (
        "lagrangian-reflection",
        include_str!("../scenarios/lagrangian-reflection.toml"),
    ),
    (
        "conjugation-identity",
        include_str!("../scenarios/conjugation-identity.toml"),
    ),
    (
        "growth-conditions",
        include_str!("../scenarios/growth-conditions.toml"),
    ),
    (
        "growth-quartic-control",
        include_str!("../scenarios/growth-quartic-control.toml"),
    ),
];

pub fn find(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| *src)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn catalog_has_at_least_eight_entries() {
        assert!(BUNDLED.len() >= 8);
    }

    #[test]
    fn every_bundled_scenario_parses_and_names_match() {
        for (name, src) in BUNDLED {
            let scenario = parse_scenario(src).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&scenario.name, name);
            assert!(!scenario.checks.is_empty(), "{name} has no checks");
            assert!(!scenario.topics.is_empty(), "{name} has no topics");
        }
    }
}
