//! Registered invariants and scenario topics.

use serde::{Deserialize, Serialize};

/// Kernel module a scenario targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Module {
    Blade,
    Witt,
    Grassmann,
    Weyl,
    Dynamics,
    Field,
}

impl Module {
    pub const ALL: [Module; 6] = [Module::Blade, Module::Witt, Module::Grassmann, Module::Weyl, Module::Dynamics, Module::Field];

    pub fn name(self) -> &'static str {
        match self {
            Module::Blade => "blade",
            Module::Witt => "witt",
            Module::Grassmann => "grassmann",
            Module::Weyl => "weyl",
            Module::Dynamics => "dynamics",
            Module::Field => "field",
        }
    }
}

/// How a check's deviation is compared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Integer-valued deviation that must be exactly zero.
    Exact,
    /// Floating deviation with a default bound.
    Float(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct Invariant {
    pub module: Module,
    pub name: &'static str,
    pub tolerance: Tolerance,
    pub summary: &'static str,
}

impl Invariant {
    pub fn qualified(&self) -> String {
        format!("{}.{}", self.module.name(), self.name)
    }
}

const fn inv(module: Module, name: &'static str, tolerance: Tolerance, summary: &'static str) -> Invariant {
    Invariant { module, name, tolerance, summary }
}

use Module::*;
use Tolerance::*;

pub const INVARIANTS: &[Invariant] = &[
    inv(Blade, "oracle", Exact, "geometric product matches word rewriting on random integer multivectors"),
    inv(Blade, "associativity", Exact, "(ab)c = a(bc) on random integer multivectors"),
    inv(Blade, "dagger", Float(1e-12), "(ab)† = b†a† on random complex multivectors"),
    inv(Witt, "witt_relations", Float(1e-12), "θ·θ = θ̄·θ̄ = 0 and θ_μ·θ̄_ν = η_μ δ_μν"),
    inv(Witt, "ideal_rank", Exact, "each vacuum spans 2^n elements and all vacua span the algebra (exact rank)"),
    inv(Witt, "clifford_relation", Float(1e-12), "represented generators satisfy ΓΓ + ΓΓ = 2g"),
    inv(Witt, "homomorphism", Float(1e-10), "matrix_rep(xy) = matrix_rep(x) matrix_rep(y) on random pairs"),
    inv(Grassmann, "equivalence", Float(1e-12), "Berezin representation of θ, θ̄ matches the ideal representation up to a signed permutation"),
    inv(Grassmann, "leibniz", Float(1e-12), "graded Leibniz rule for left derivatives"),
    inv(Grassmann, "berezin", Float(1e-12), "Berezin integral of a total derivative vanishes"),
    inv(Weyl, "bracket_correspondence", Float(1e-10), "Poisson bracket maps to the half-commutator of Weyl-ordered operators"),
    inv(Weyl, "canonical", Float(1e-12), "truncated mode operators obey the canonical relations on the safe subspace"),
    inv(Dynamics, "symplecticity", Float(1e-9), "Heisenberg frames satisfy CᵀJC = J"),
    inv(Dynamics, "pairing", Float(1e-9), "z(τ)ᵀq(τ) is constant along the flows"),
    inv(Dynamics, "period_identity", Float(1e-9), "oscillator frame returns to the identity after one period"),
    inv(Dynamics, "energy_conservation", Float(1e-9), "H(z(τ)) is constant along the classical flow"),
    inv(Dynamics, "heisenberg_commutator", Float(1e-10), "[q, Ĥ] reproduces the Heisenberg generator on the safe subspace"),
    inv(Dynamics, "bars_closure", Float(1e-12), "Bars constraints close into sl(2) under the Poisson bracket"),
    inv(Dynamics, "schedule_pairing", Float(1e-9), "pairing holds across piecewise-constant multiplier segments"),
    inv(Dynamics, "dirac_kernel", Exact, "Γ·p has a 2-dimensional kernel for null p and none for timelike p"),
    inv(Dynamics, "quantization_table", Float(1e-12), "asserted relations of the superparticle quantization table"),
    inv(Field, "anticommutator", Exact, "lattice fermion operators obey the canonical anticommutators (integer exact)"),
    inv(Field, "vacuum_census", Exact, "2^D bare vacua, each with a full-rank Fock basis"),
    inv(Field, "annihilation", Float(1e-12), "each requested vacuum is annihilated by its barred operators"),
    inv(Field, "energy_oracle", Float(1e-12), "vacuum energy from the Fock state matches the spectral oracle"),
    inv(Field, "zero_point", Float(1e-12), "split vacuum has zero energy and the standard vacuum has -Σ|ε|/2"),
    inv(Field, "brackets", Exact, "Poisson brackets of field coordinates reproduce J or ρ entry by entry"),
    inv(Field, "symplecticity", Float(1e-9), "bosonic field propagator preserves J"),
    inv(Field, "boson_witt", Float(1e-10), "bosonic Witt pair k, k̄ relations on the safe subspace"),
];

pub fn invariants(module: Module) -> impl Iterator<Item = &'static Invariant> {
    INVARIANTS.iter().filter(move |i| i.module == module)
}

pub fn find_invariant(module: Module, name: &str) -> Option<&'static Invariant> {
    let bare = name.strip_prefix(module.name()).and_then(|s| s.strip_prefix('.')).unwrap_or(name);
    INVARIANTS.iter().find(|i| i.module == module && i.name == bare)
}

/// Subject a scenario exercises; every bundled scenario names one.
#[derive(Debug, Clone, Copy)]
pub struct Topic {
    pub key: &'static str,
    pub module: Module,
    pub summary: &'static str,
}

pub const TOPICS: &[Topic] = &[
    Topic { key: "geometric_product", module: Blade, summary: "geometric product on basis-blade bitsets" },
    Topic { key: "witt_basis", module: Witt, summary: "null Witt pairs and their fermionic dot products" },
    Topic { key: "spinor_ideals", module: Witt, summary: "minimal left ideals from the 2^n vacua" },
    Topic { key: "gamma_matrices", module: Witt, summary: "Dirac matrices rebuilt from the spacetime Witt basis" },
    Topic { key: "berezin_representation", module: Grassmann, summary: "θ as ξ and θ̄ as ∂/∂ξ acting on Grassmann functions" },
    Topic { key: "weyl_quantization", module: Weyl, summary: "Poisson bracket to commutator under Weyl ordering" },
    Topic { key: "oscillator_flow", module: Dynamics, summary: "harmonic oscillator H = ½(p² + ω²x²), classical and Heisenberg flows" },
    Topic { key: "massless_particle", module: Dynamics, summary: "free massless particle H = ½λ p·p" },
    Topic { key: "bars_sl2", module: Dynamics, summary: "sl(2) gauge constraints with piecewise-constant multipliers" },
    Topic { key: "superparticle", module: Dynamics, summary: "superparticle Dirac constraint and quantization table" },
    Topic { key: "fermion_lattice", module: Field, summary: "Jordan-Wigner lattice fermions and the vacuum census" },
    Topic { key: "zero_point_energy", module: Field, summary: "zero-point energy of the standard, conjugate and frequency-split vacua" },
    Topic { key: "scalar_field", module: Field, summary: "free scalar field on a periodic lattice, flows and brackets" },
];

pub fn find_topic(key: &str) -> Option<&'static Topic> {
    TOPICS.iter().find(|t| t.key == key)
}

/// Names accepted by `check`: modules, qualified invariants and bare invariant names.
pub fn filter_names() -> Vec<String> {
    let mut out: Vec<String> = Module::ALL.iter().map(|m| m.name().to_string()).collect();
    out.extend(INVARIANTS.iter().map(|i| i.qualified()));
    out
}

/// Resolve a filter to the set of matching invariants. `None` if nothing matches.
pub fn resolve_filter(filter: &str) -> Option<Vec<&'static Invariant>> {
    let f = filter.trim();
    if f.is_empty() {
        return Some(INVARIANTS.iter().collect());
    }
    let hits: Vec<&'static Invariant> =
        INVARIANTS.iter().filter(|i| i.module.name() == f || i.qualified() == f || i.name == f).collect();
    if hits.is_empty() {
        None
    } else {
        Some(hits)
    }
}
