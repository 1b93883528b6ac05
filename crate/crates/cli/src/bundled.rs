//! Scenarios shipped with the binary; they double as the conformance suite.

use crate::error::Result;
use crate::scenario::Scenario;

/// (name, TOML source), sorted by name.
pub const SOURCES: &[(&str, &str)] = &[
    ("bars_sl2", include_str!("../../../scenarios/bars_sl2.toml")),
    ("clifford_oracle", include_str!("../../../scenarios/clifford_oracle.toml")),
    ("dirac_gammas", include_str!("../../../scenarios/dirac_gammas.toml")),
    ("dirac_site", include_str!("../../../scenarios/dirac_site.toml")),
    ("fermion_lattice", include_str!("../../../scenarios/fermion_lattice.toml")),
    ("grassmann_doubled", include_str!("../../../scenarios/grassmann_doubled.toml")),
    ("grassmann_equivalence", include_str!("../../../scenarios/grassmann_equivalence.toml")),
    ("massless", include_str!("../../../scenarios/massless.toml")),
    ("oscillator", include_str!("../../../scenarios/oscillator.toml")),
    ("scalar_field", include_str!("../../../scenarios/scalar_field.toml")),
    ("superparticle", include_str!("../../../scenarios/superparticle.toml")),
    ("weyl_brackets", include_str!("../../../scenarios/weyl_brackets.toml")),
    ("weyl_hermitian", include_str!("../../../scenarios/weyl_hermitian.toml")),
    ("witt_doubled", include_str!("../../../scenarios/witt_doubled.toml")),
    ("witt_wide", include_str!("../../../scenarios/witt_wide.toml")),
    ("zero_point_energy", include_str!("../../../scenarios/zero_point_energy.toml")),
];

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Option<Result<Scenario>> {
    source(name).map(|src| Scenario::parse(src, &format!("<bundled {name}>")))
}

/// Every bundled scenario, parsed.
pub fn all() -> Result<Vec<Scenario>> {
    SOURCES.iter().map(|(n, src)| Scenario::parse(src, &format!("<bundled {n}>"))).collect()
}
