//! Quadratic field models on a finite periodic lattice, fermionic Fock spaces
//! and their vacuum families.
//!
//! Bosonic coordinates are ordered (φ_1..φ_S, Π_1..Π_S); fermionic ones
//! (ψ_1..ψ_D, π_1..π_D) with D = sites × spinor components, site-major.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blade::Signature;
use crate::dynamics::{self, DiracQuantizer, ModelKind, ModelParams, OperatorFrame, QuadraticModel};
use crate::error::{Error, Result};
use crate::grassmann::{grassmann_poisson, GrassmannFunction};
use crate::linalg::{self, CMatrix, CVector};
use crate::weyl::{mode_ops, poisson, Convention, ModeOperators, PhasePolynomial, SymplecticForm};
use crate::witt::Flag;

/// Hard cap on fermionic modes (Fock dimension 2^D).
pub const MAX_FERMION_MODES: usize = 14;
/// Cap on bosonic phase-space dimension 2S for the Stueckelberg model.
pub const MAX_STUECKELBERG_DIM: usize = 64;
/// Cap on bosonic phase-space dimension 2S for the other models.
pub const MAX_BOSONIC_DIM: usize = 1024;
/// Largest D for which dense Fock matrices and bases are materialized.
pub const MAX_DENSE_MODES: usize = 10;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Periodic hypercubic lattice, row-major site order (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lattice {
    pub dims: Vec<usize>,
    pub spacing: f64,
}

impl Lattice {
    pub fn new(dims: Vec<usize>, spacing: f64) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidParameter("lattice needs at least one axis and no empty axes".into()));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("lattice spacing must be positive, got {spacing}")));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::ResourceCap("lattice site count overflows".into()))?;
        Ok(Lattice { dims, spacing })
    }

    pub fn sites(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn axes(&self) -> usize {
        self.dims.len()
    }

    pub fn coords(&self, mut site: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (k, &d) in self.dims.iter().enumerate().rev() {
            out[k] = site % d;
            site /= d;
        }
        out
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x % d)
    }

    /// Site shifted by `step` along `axis` with periodic wrap.
    pub fn neighbor(&self, site: usize, axis: usize, step: isize) -> usize {
        let mut x = self.coords(site);
        let d = self.dims[axis] as isize;
        x[axis] = (((x[axis] as isize + step) % d + d) % d) as usize;
        self.index(&x)
    }

    /// Central difference (f_{i+1} − f_{i−1})/2a along one axis.
    pub fn derivative(&self, axis: usize) -> CMatrix {
        let s = self.sites();
        let mut m = CMatrix::zeros(s, s);
        let h = 0.5 / self.spacing;
        for i in 0..s {
            m[(i, self.neighbor(i, axis, 1))] += c(h);
            m[(i, self.neighbor(i, axis, -1))] -= c(h);
        }
        m
    }

    /// (f_{i+1} − 2f_i + f_{i−1})/a² along one axis.
    pub fn laplacian_axis(&self, axis: usize) -> CMatrix {
        let s = self.sites();
        let mut m = CMatrix::zeros(s, s);
        let h = 1.0 / (self.spacing * self.spacing);
        for i in 0..s {
            m[(i, self.neighbor(i, axis, 1))] += c(h);
            m[(i, self.neighbor(i, axis, -1))] += c(h);
            m[(i, i)] -= c(2.0 * h);
        }
        m
    }

    pub fn laplacian(&self) -> CMatrix {
        let s = self.sites();
        (0..self.axes()).fold(CMatrix::zeros(s, s), |acc, ax| acc + self.laplacian_axis(ax))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Scalar,
    Schrodinger,
    Stueckelberg,
    Dirac,
}

impl std::str::FromStr for FieldKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(FieldKind::Scalar),
            "schrodinger" => Ok(FieldKind::Schrodinger),
            "stueckelberg" => Ok(FieldKind::Stueckelberg),
            "dirac" => Ok(FieldKind::Dirac),
            other => Err(Error::InvalidParameter(format!("unknown field kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldParams {
    #[serde(default)]
    pub mass: f64,
    /// Per-site potential (Schrödinger); defaults to zero.
    #[serde(default)]
    pub potential: Option<Vec<f64>>,
    /// Λ of the Stueckelberg kernel.
    #[serde(default = "one")]
    pub lambda: f64,
    /// Spinor components for Dirac: 4, or 2 for the reduced toy.
    #[serde(default = "four")]
    pub components: usize,
}

fn one() -> f64 {
    1.0
}

fn four() -> usize {
    4
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams { mass: 0.0, potential: None, lambda: 1.0, components: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Bosonic,
    Fermionic,
}

/// Assembled lattice model.
///
/// For bosonic models `metric` is J and `kernel` is K (size 2S); for
/// fermionic models `metric` is ρ and `kernel` is the antisymmetric H
/// (size 2D), with `one_particle` the Hermitian h on D modes.
#[derive(Debug, Clone)]
pub struct FieldModel {
    pub lattice: Lattice,
    pub kind: FieldKind,
    pub sector: Sector,
    pub params: FieldParams,
    pub metric: CMatrix,
    pub kernel: CMatrix,
    pub one_particle: Option<CMatrix>,
    /// α^r = Γ^0Γ^r and β = Γ^0 for Dirac models.
    pub alpha: Vec<CMatrix>,
    pub beta: Option<CMatrix>,
}

fn sym_j(s: usize) -> CMatrix {
    SymplecticForm::euclidean(s).j()
}

fn rho(d: usize) -> CMatrix {
    let i = linalg::identity(d);
    let z = CMatrix::zeros(d, d);
    let mut m = CMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, d), (d, d)).copy_from(&i);
    m.view_mut((d, 0), (d, d)).copy_from(&i);
    m.view_mut((0, 0), (d, d)).copy_from(&z);
    m
}

fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

/// (h ⊗ g_ij) in the (φ, Π) block layout.
fn offdiag_blocks(h: &CMatrix) -> CMatrix {
    linalg::kron(&sigma_x(), h)
}

/// Dirac matrices α^r = Γ^0Γ^r and β = Γ^0 for 4 or 2 components.
pub fn dirac_matrices(components: usize) -> Result<(Vec<CMatrix>, CMatrix)> {
    let sig = match components {
        4 => Signature::new(1, 3)?,
        2 => Signature::new(1, 1)?,
        other => return Err(Error::InvalidParameter(format!("Dirac fields need 4 or 2 components, got {other}"))),
    };
    let dq = DiracQuantizer::new(sig)?;
    let beta = dq.gamma[0].clone();
    // Γ^r = η^{rr} Γ_r = −Γ_r
    let alpha = dq.gamma[1..].iter().map(|g| &beta * g * c(-1.0)).collect();
    Ok((alpha, beta))
}

/// Assemble K (bosonic) or H (fermionic) with central differences and periodic wrap.
pub fn build_model(lattice: &Lattice, kind: FieldKind, params: &FieldParams) -> Result<FieldModel> {
    let s = lattice.sites();
    let bosonic = |metric: CMatrix, kernel: CMatrix| FieldModel {
        lattice: lattice.clone(),
        kind,
        sector: Sector::Bosonic,
        params: params.clone(),
        metric,
        kernel,
        one_particle: None,
        alpha: Vec::new(),
        beta: None,
    };
    if kind != FieldKind::Dirac {
        let cap = if kind == FieldKind::Stueckelberg { MAX_STUECKELBERG_DIM } else { MAX_BOSONIC_DIM };
        if 2 * s > cap {
            return Err(Error::ResourceCap(format!("{kind:?} model with {} modes exceeds {cap}", 2 * s)));
        }
    }
    match kind {
        FieldKind::Scalar => {
            let upper = linalg::identity(s) * c(params.mass * params.mass) - lattice.laplacian();
            let k = linalg::block_diag(&[&upper, &linalg::identity(s)]);
            Ok(bosonic(sym_j(s), k))
        }
        FieldKind::Schrodinger => {
            if params.mass <= 0.0 {
                return Err(Error::InvalidParameter("Schrodinger model needs mass > 0".into()));
            }
            let mut h = lattice.laplacian() * c(-0.5 / params.mass);
            if let Some(v) = &params.potential {
                if v.len() != s {
                    return Err(Error::DimensionMismatch { expected: s, got: v.len() });
                }
                for (i, &vi) in v.iter().enumerate() {
                    h[(i, i)] += c(vi);
                }
            }
            // K = −i h ⊗ g so that φ̇ = −i h φ
            Ok(bosonic(sym_j(s), offdiag_blocks(&h) * (-I)))
        }
        FieldKind::Stueckelberg => {
            if params.lambda == 0.0 {
                return Err(Error::InvalidParameter("Stueckelberg model needs lambda != 0".into()));
            }
            // ∂^μ∂_μ = ∂_0² − Σ_r ∂_r², axis 0 timelike
            let mut box_op = lattice.laplacian_axis(0);
            for ax in 1..lattice.axes() {
                box_op -= lattice.laplacian_axis(ax);
            }
            let h = box_op * c(-0.5 / params.lambda);
            Ok(bosonic(sym_j(s), offdiag_blocks(&h) * (-I)))
        }
        FieldKind::Dirac => {
            let comps = params.components;
            let (alpha, beta) = dirac_matrices(comps)?;
            if lattice.axes() > alpha.len() {
                return Err(Error::InvalidParameter(format!(
                    "{comps}-component Dirac field supports at most {} spatial axes",
                    alpha.len()
                )));
            }
            let d = s.saturating_mul(comps);
            if d > MAX_FERMION_MODES {
                return Err(Error::ResourceCap(format!("D = {d} fermionic modes exceeds {MAX_FERMION_MODES}")));
            }
            let mut h1 = linalg::kron(&linalg::identity(s), &beta) * c(params.mass);
            for (r, a) in alpha.iter().enumerate().take(lattice.axes()) {
                h1 += linalg::kron(&lattice.derivative(r), &(a * (-I)));
            }
            let m = &h1 * I;
            let mut big = CMatrix::zeros(2 * d, 2 * d);
            big.view_mut((0, d), (d, d)).copy_from(&(-m.transpose()));
            big.view_mut((d, 0), (d, d)).copy_from(&m);
            Ok(FieldModel {
                lattice: lattice.clone(),
                kind,
                sector: Sector::Fermionic,
                params: params.clone(),
                metric: rho(d),
                kernel: big,
                one_particle: Some(h1),
                alpha,
                beta: Some(beta),
            })
        }
    }
}

impl FieldModel {
    /// Number of mode coordinates per half (S bosonic, D fermionic).
    pub fn modes(&self) -> usize {
        self.metric.nrows() / 2
    }

    /// The same lattice kernel placed in the fermionic sector with metric ρ.
    pub fn as_fermionic_block(&self) -> FieldModel {
        let mut f = self.clone();
        f.sector = Sector::Fermionic;
        f.metric = rho(self.modes());
        f
    }

    fn require_bosonic(&self) -> Result<()> {
        if self.sector != Sector::Bosonic {
            return Err(Error::InvalidParameter(format!("{:?} is a fermionic model", self.kind)));
        }
        Ok(())
    }

    /// The bosonic model as a dynamics::QuadraticModel on S degrees of freedom.
    pub fn quadratic_model(&self) -> Result<QuadraticModel> {
        self.require_bosonic()?;
        QuadraticModel::new(
            format!("{:?}", self.kind).to_lowercase(),
            ModelKind::Custom,
            SymplecticForm::euclidean(self.modes()),
            self.kernel.clone(),
            ModelParams::default(),
        )
    }

    /// Eigenvalues of the one-particle Hamiltonian, ascending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let h = self.one_particle.as_ref().ok_or_else(|| Error::InvalidParameter("model has no one-particle Hamiltonian".into()))?;
        Ok(linalg::hermitian_eigen(h).0)
    }
}

pub fn classical_field_flow(fm: &FieldModel, phi0: &CVector, tau: f64) -> Result<CVector> {
    dynamics::classical_flow(&fm.quadratic_model()?, phi0, tau)
}

pub fn operator_field_flow(fm: &FieldModel, tau: f64) -> Result<OperatorFrame> {
    dynamics::heisenberg_flow(&fm.quadratic_model()?, tau)
}

/// Single-mode fermionic operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeOp {
    /// h_m (creation).
    Create(usize),
    /// h̄_m (annihilation).
    Annihilate(usize),
}

/// Jordan-Wigner representation of h_m, h̄_m on 2^D occupation states.
///
/// Basis state s has bit m set when mode m is occupied;
/// h_m|s⟩ = (−1)^{#occupied below m}|s + m⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FermionAlgebra {
    d: usize,
}

impl FermionAlgebra {
    pub fn new(d: usize) -> Result<Self> {
        if d > MAX_FERMION_MODES {
            return Err(Error::ResourceCap(format!("D = {d} fermionic modes exceeds {MAX_FERMION_MODES}")));
        }
        Ok(FermionAlgebra { d })
    }

    pub fn modes(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        1 << self.d
    }

    /// Action on one basis state: target state and sign, or None.
    pub fn act(&self, op: ModeOp, s: usize) -> Option<(usize, i64)> {
        let (m, create) = match op {
            ModeOp::Create(m) => (m, true),
            ModeOp::Annihilate(m) => (m, false),
        };
        let occupied = s >> m & 1 == 1;
        if occupied == create {
            return None;
        }
        let sign = if (s & ((1 << m) - 1)).count_ones().is_multiple_of(2) { 1 } else { -1 };
        Some((s ^ (1 << m), sign))
    }

    pub fn apply(&self, op: ModeOp, v: &CVector) -> CVector {
        let mut out = CVector::zeros(v.len());
        for (s, &x) in v.iter().enumerate() {
            if x.norm() == 0.0 {
                continue;
            }
            if let Some((t, sg)) = self.act(op, s) {
                out[t] += x * sg as f64;
            }
        }
        out
    }

    /// Σ_m w_m h_m v (create) or Σ_m w_m h̄_m v.
    pub fn apply_combination(&self, weights: &[Complex64], create: bool, v: &CVector) -> CVector {
        let mut out = CVector::zeros(v.len());
        for (m, &w) in weights.iter().enumerate() {
            if w.norm() == 0.0 {
                continue;
            }
            let op = if create { ModeOp::Create(m) } else { ModeOp::Annihilate(m) };
            out += self.apply(op, v) * w;
        }
        out
    }

    /// Integer matrix of one operator (row, column).
    pub fn integer_matrix(&self, op: ModeOp) -> Result<Vec<Vec<i64>>> {
        if self.d > MAX_DENSE_MODES {
            return Err(Error::ResourceCap(format!("dense matrices limited to D <= {MAX_DENSE_MODES}")));
        }
        let n = self.dim();
        let mut m = vec![vec![0i64; n]; n];
        for s in 0..n {
            if let Some((t, sg)) = self.act(op, s) {
                m[t][s] = sg;
            }
        }
        Ok(m)
    }

    pub fn matrix(&self, op: ModeOp) -> Result<CMatrix> {
        let m = self.integer_matrix(op)?;
        let n = self.dim();
        Ok(CMatrix::from_fn(n, n, |r, col| c(m[r][col] as f64)))
    }

    fn all_ops(&self) -> Vec<ModeOp> {
        (0..self.d).flat_map(|m| [ModeOp::Create(m), ModeOp::Annihilate(m)]).collect()
    }

    /// Exhaustive integer check of {h,h̄} = δ and {h,h} = {h̄,h̄} = 0.
    pub fn anticommutator_check(&self) -> AnticommutatorReport {
        let ops = self.all_ops();
        let mut worst = 0i64;
        let mut pairs = 0usize;
        for &a in &ops {
            for &b in &ops {
                pairs += 1;
                let expected = match (a, b) {
                    (ModeOp::Create(i), ModeOp::Annihilate(j)) | (ModeOp::Annihilate(i), ModeOp::Create(j)) if i == j => 1,
                    _ => 0,
                };
                for s in 0..self.dim() {
                    let mut acc: Vec<(usize, i64)> = Vec::with_capacity(2);
                    for (x, y) in [(a, b), (b, a)] {
                        if let Some((t1, s1)) = self.act(y, s) {
                            if let Some((t2, s2)) = self.act(x, t1) {
                                match acc.iter_mut().find(|(t, _)| *t == t2) {
                                    Some(e) => e.1 += s1 * s2,
                                    None => acc.push((t2, s1 * s2)),
                                }
                            }
                        }
                    }
                    let diag = acc.iter().find(|(t, _)| *t == s).map_or(0, |e| e.1);
                    worst = worst.max((diag - expected).abs());
                    for (t, v) in acc {
                        if t != s {
                            worst = worst.max(v.abs());
                        }
                    }
                }
            }
        }
        AnticommutatorReport { modes: self.d, pairs_checked: pairs, max_integer_deviation: worst, anticommutator_constant: 1.0, dot_constant: 0.5 }
    }
}

/// Result of the exhaustive anticommutator check.
#[derive(Debug, Clone, Serialize)]
pub struct AnticommutatorReport {
    pub modes: usize,
    pub pairs_checked: usize,
    pub max_integer_deviation: i64,
    /// {h, h̄} = 1 in this module.
    pub anticommutator_constant: f64,
    /// The symmetric product h·h̄ = ½{h, h̄}.
    pub dot_constant: f64,
}

pub fn fermion_algebra(fm: &FieldModel) -> Result<FermionAlgebra> {
    if fm.sector != Sector::Fermionic {
        return Err(Error::InvalidParameter("fermion_algebra needs a fermionic model".into()));
    }
    FermionAlgebra::new(fm.modes())
}

/// How vacuum flags are assigned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VacuumRule {
    /// One flag per bare lattice mode.
    Custom(Vec<Flag>),
    /// All eigen-Witt modes barred (filled negative-energy sea).
    Standard,
    /// All eigen-Witt modes unbarred.
    ConjugateStandard,
    /// Positive-energy modes barred, negative-energy modes unbarred.
    FrequencySplit,
}

impl std::str::FromStr for VacuumRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(VacuumRule::Standard),
            "conjugate" | "conjugate_standard" => Ok(VacuumRule::ConjugateStandard),
            "split" | "frequency_split" | "positive_barred_negative_unbarred" => Ok(VacuumRule::FrequencySplit),
            flags => {
                let spec: crate::witt::VacuumSpec = flags.parse()?;
                Ok(VacuumRule::Custom(spec.flags()))
            }
        }
    }
}

/// Normalized vacuum state with the operators that annihilate it.
///
/// Mode k of `modes` (a column of the unitary) defines d_k† = Σ_i U_ik h_i.
/// For bare modes and positive-energy eigenmodes h_k = d_k†; for
/// negative-energy eigenmodes the roles swap, h_k = d_k.
#[derive(Debug, Clone)]
pub struct FockVacuum {
    pub rule: VacuumRule,
    pub flags: Vec<Flag>,
    pub modes: CMatrix,
    /// Whether h_k = d_k† (false: h_k = d_k).
    pub h_is_dagger: Vec<bool>,
    /// d_k†d_k eigenvalue in Ω.
    pub occupied: Vec<bool>,
    pub state: CVector,
}

impl FockVacuum {
    /// h_k (create = true) or h̄_k applied to v.
    pub fn apply_mode(&self, fa: &FermionAlgebra, k: usize, h: bool, v: &CVector) -> CVector {
        let col: Vec<Complex64> = self.modes.column(k).iter().copied().collect();
        let dagger = h == self.h_is_dagger[k];
        if dagger {
            fa.apply_combination(&col, true, v)
        } else {
            let conj: Vec<Complex64> = col.iter().map(|z| z.conj()).collect();
            fa.apply_combination(&conj, false, v)
        }
    }

    /// Operator creating an excitation on this vacuum for mode k: h_k if barred, h̄_k if unbarred.
    pub fn excite(&self, fa: &FermionAlgebra, k: usize, v: &CVector) -> CVector {
        self.apply_mode(fa, k, self.flags[k] == Flag::Barred, v)
    }

    /// max |designated annihilator · Ω|.
    pub fn annihilation_residual(&self, fa: &FermionAlgebra) -> f64 {
        (0..self.flags.len())
            .map(|k| linalg::max_abs_vec(&self.apply_mode(fa, k, self.flags[k] == Flag::Unbarred, &self.state)))
            .fold(0.0, f64::max)
    }
}

fn slater(fa: &FermionAlgebra, modes: &CMatrix, occupied: &[bool]) -> CVector {
    let mut v = CVector::zeros(fa.dim());
    v[0] = c(1.0);
    for k in (0..occupied.len()).rev() {
        if occupied[k] {
            let col: Vec<Complex64> = modes.column(k).iter().copied().collect();
            v = fa.apply_combination(&col, true, &v);
        }
    }
    v
}

/// Build Ω for a rule. Frequency rules diagonalize the one-particle Hamiltonian.
pub fn make_vacuum(fa: &FermionAlgebra, rule: &VacuumRule, fm: Option<&FieldModel>) -> Result<FockVacuum> {
    let d = fa.modes();
    let (modes, flags, h_is_dagger) = match rule {
        VacuumRule::Custom(flags) => {
            if flags.len() != d {
                return Err(Error::InvalidVacuum(format!("{} flags for {d} modes", flags.len())));
            }
            (linalg::identity(d), flags.clone(), vec![true; d])
        }
        _ => {
            let fm = fm.ok_or_else(|| Error::InvalidVacuum("frequency rules need a field model".into()))?;
            let h = fm.one_particle.as_ref().ok_or_else(|| Error::InvalidVacuum("model has no one-particle Hamiltonian".into()))?;
            if h.nrows() != d {
                return Err(Error::DimensionMismatch { expected: d, got: h.nrows() });
            }
            let (eps, u) = linalg::hermitian_eigen(h);
            let scale = eps.iter().map(|e| e.abs()).fold(1.0, f64::max);
            if let Some(k) = eps.iter().position(|e| e.abs() <= 1e-12 * scale) {
                return Err(Error::ZeroEigenvalue(k));
            }
            let flags = eps
                .iter()
                .map(|&e| match rule {
                    VacuumRule::Standard => Flag::Barred,
                    VacuumRule::ConjugateStandard => Flag::Unbarred,
                    _ if e > 0.0 => Flag::Barred,
                    _ => Flag::Unbarred,
                })
                .collect();
            (u, flags, eps.iter().map(|&e| e > 0.0).collect())
        }
    };
    // Barred: h̄_kΩ = 0. d_k†d_k = 1 exactly when the annihilated operator is d_k†.
    let occupied: Vec<bool> = flags.iter().zip(&h_is_dagger).map(|(f, &hd)| (*f == Flag::Barred) != hd).collect();
    let state = slater(fa, &modes, &occupied);
    Ok(FockVacuum { rule: rule.clone(), flags, modes, h_is_dagger, occupied, state })
}

/// All 2^D bare-mode vacua in mask order (bit k set = mode k unbarred).
pub fn enumerate_bare_vacua(fa: &FermionAlgebra) -> Result<Vec<FockVacuum>> {
    let d = fa.modes();
    (0..1usize << d)
        .map(|mask| {
            let flags = (0..d).map(|k| if mask >> k & 1 == 1 { Flag::Unbarred } else { Flag::Barred }).collect();
            make_vacuum(fa, &VacuumRule::Custom(flags), None)
        })
        .collect()
}

/// States e_A Ω over subsets A in graded-lex order, highest mode applied first.
pub fn fock_basis(fa: &FermionAlgebra, vac: &FockVacuum) -> Result<Vec<CVector>> {
    if fa.modes() > MAX_DENSE_MODES {
        return Err(Error::ResourceCap(format!("Fock bases limited to D <= {MAX_DENSE_MODES}")));
    }
    Ok(crate::graded_lex_subsets(fa.modes())
        .into_iter()
        .map(|subset| {
            let mut v = vac.state.clone();
            for k in (0..fa.modes()).rev() {
                if subset >> k & 1 == 1 {
                    v = vac.excite(fa, k, &v);
                }
            }
            v
        })
        .collect())
}

/// Rank of a Fock basis: exact for integer vectors, SVD otherwise.
pub fn fock_rank(basis: &[CVector]) -> usize {
    let integral = basis.iter().all(|v| v.iter().all(|z| z.im == 0.0 && z.re.fract() == 0.0));
    if integral {
        let rows: Vec<Vec<i64>> = basis.iter().map(|v| v.iter().map(|z| z.re as i64).collect()).collect();
        crate::exact::rank_integer(&rows)
    } else {
        let n = basis.len();
        let dim = basis.first().map_or(0, |v| v.len());
        let m = CMatrix::from_fn(dim, n, |r, col| basis[col][r]);
        linalg::rank(&m, 1e-10)
    }
}

/// ⟨Ω|Ĥ|Ω⟩ for Ĥ = Σ h_ij ½(h_i h̄_j − h̄_j h_i) and its spectral oracle.
#[derive(Debug, Clone, Serialize)]
pub struct VacuumEnergy {
    pub rule: String,
    /// Computed from the Fock state.
    pub expectation: f64,
    /// Σ_k ε_k (n_k − ½) from the spectrum and occupations.
    pub oracle: f64,
}

pub fn vacuum_energy(fm: &FieldModel, rule: &VacuumRule) -> Result<VacuumEnergy> {
    let fa = fermion_algebra(fm)?;
    let h = fm.one_particle.as_ref().ok_or_else(|| Error::InvalidParameter("model has no one-particle Hamiltonian".into()))?;
    let vac = make_vacuum(&fa, rule, Some(fm))?;
    let d = fa.modes();
    let norm2 = vac.state.norm_squared();
    let w: Vec<CVector> = (0..d).map(|j| fa.apply(ModeOp::Annihilate(j), &vac.state)).collect();
    let mut e = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            // ⟨h_i h̄_j⟩ − ½δ_ij, using h̄_j h_i = δ_ij − h_i h̄_j
            let mut g = w[i].dotc(&w[j]) / norm2;
            if i == j {
                g -= c(0.5);
            }
            e += h[(i, j)] * g;
        }
    }
    let oracle = match rule {
        VacuumRule::Custom(_) => (0..d).map(|i| h[(i, i)].re * if vac.occupied[i] { 0.5 } else { -0.5 }).sum(),
        _ => {
            let eps = linalg::hermitian_eigen(h).0;
            eps.iter().zip(&vac.occupied).map(|(e, &n)| e * if n { 0.5 } else { -0.5 }).sum()
        }
    };
    Ok(VacuumEnergy { rule: rule_name(rule), expectation: e.re, oracle })
}

pub fn rule_name(rule: &VacuumRule) -> String {
    match rule {
        VacuumRule::Custom(flags) => crate::witt::VacuumSpec::from_flags(flags).to_string(),
        VacuumRule::Standard => "standard".into(),
        VacuumRule::ConjugateStandard => "conjugate_standard".into(),
        VacuumRule::FrequencySplit => "frequency_split".into(),
    }
}

/// Energies of the standard, conjugate and split vacua.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyLedger {
    pub spectrum: Vec<f64>,
    pub standard: VacuumEnergy,
    pub conjugate: VacuumEnergy,
    pub split: VacuumEnergy,
}

impl EnergyLedger {
    /// −Σ|ε_k|/2.
    pub fn sea_energy(&self) -> f64 {
        -0.5 * self.spectrum.iter().map(|e| e.abs()).sum::<f64>()
    }
}

pub fn energy_ledger(fm: &FieldModel) -> Result<EnergyLedger> {
    Ok(EnergyLedger {
        spectrum: fm.spectrum()?,
        standard: vacuum_energy(fm, &VacuumRule::Standard)?,
        conjugate: vacuum_energy(fm, &VacuumRule::ConjugateStandard)?,
        split: vacuum_energy(fm, &VacuumRule::FrequencySplit)?,
    })
}

/// k = (X + P)/√2, k̄ = (X − P)/√2 per site on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct BosonWitt {
    pub ops: ModeOperators,
    pub k: Vec<CMatrix>,
    pub k_bar: Vec<CMatrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BosonWittReport {
    /// max |[k_x, k_y]| and |[k̄_x, k̄_y]| over the full truncated space.
    pub kk: f64,
    /// max |½[k̄_x, k_y] − δ_xy| on the safe subspace.
    pub kbar_k: f64,
    /// max |k_x k_y Ω − k_y k_x Ω| on the formal vacuum.
    pub symmetry: f64,
}

pub fn boson_witt(fm: &FieldModel, cutoff: usize) -> Result<BosonWitt> {
    fm.require_bosonic()?;
    let ops = mode_ops(&SymplecticForm::euclidean(fm.modes()), cutoff, Convention::Raw)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let k = (0..fm.modes()).map(|x| (&ops.x[x] + &ops.p[x]) * c(r)).collect();
    let k_bar = (0..fm.modes()).map(|x| (&ops.x[x] - &ops.p[x]) * c(r)).collect();
    Ok(BosonWitt { ops, k, k_bar })
}

impl BosonWitt {
    /// Truncated-Fock ground state, the formal bosonic Ω.
    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.ops.dim());
        v[0] = c(1.0);
        v
    }

    pub fn report(&self) -> BosonWittReport {
        let n = self.k.len();
        let id = linalg::identity(self.ops.dim());
        let omega = self.vacuum();
        let (mut kk, mut kbar_k, mut symmetry) = (0.0f64, 0.0f64, 0.0f64);
        for x in 0..n {
            for y in 0..n {
                kk = kk.max(linalg::max_abs(&linalg::commutator(&self.k[x], &self.k[y])));
                kk = kk.max(linalg::max_abs(&linalg::commutator(&self.k_bar[x], &self.k_bar[y])));
                let half = linalg::commutator(&self.k_bar[x], &self.k[y]) * c(0.5);
                let want = if x == y { id.clone() } else { CMatrix::zeros(id.nrows(), id.ncols()) };
                kbar_k = kbar_k.max(self.ops.safe_deviation(&half, &want));
                let a = &self.k[x] * (&self.k[y] * &omega);
                let b = &self.k[y] * (&self.k[x] * &omega);
                symmetry = symmetry.max(linalg::max_abs_vec(&(a - b)));
            }
        }
        BosonWittReport { kk, kbar_k, symmetry }
    }
}

/// Bosonic plus fermionic model with block metric and kernel.
#[derive(Debug, Clone)]
pub struct SuperFieldModel {
    pub bosonic: FieldModel,
    pub fermionic: FieldModel,
    /// blockdiag(J, ρ).
    pub g: CMatrix,
    /// blockdiag(K, H) plus any coupling blocks.
    pub h: CMatrix,
    pub coupled: bool,
}

pub const COUPLING_NOTE: &str = "coupling enters through non-vanishing off-diagonal blocks of the kernel";

/// Pack a bosonic and a fermionic model; `coupling` is the boson-row/fermion-column block.
pub fn superfield_pack(b: &FieldModel, f: &FieldModel, coupling: Option<&CMatrix>) -> Result<SuperFieldModel> {
    b.require_bosonic()?;
    if f.sector != Sector::Fermionic {
        return Err(Error::InvalidParameter("second model must be fermionic".into()));
    }
    if b.lattice != f.lattice {
        return Err(Error::GridMismatch(format!("lattices {:?} and {:?} differ", b.lattice.dims, f.lattice.dims)));
    }
    let g = linalg::block_diag(&[&b.metric, &f.metric]);
    let mut h = linalg::block_diag(&[&b.kernel, &f.kernel]);
    let (nb, nf) = (b.metric.nrows(), f.metric.nrows());
    if let Some(cm) = coupling {
        if cm.shape() != (nb, nf) {
            return Err(Error::DimensionMismatch { expected: nb * nf, got: cm.nrows() * cm.ncols() });
        }
        h.view_mut((0, nb), (nb, nf)).copy_from(cm);
        h.view_mut((nb, 0), (nf, nb)).copy_from(&cm.transpose());
    }
    Ok(SuperFieldModel { bosonic: b.clone(), fermionic: f.clone(), g, h, coupled: coupling.is_some() })
}

impl SuperFieldModel {
    /// blockdiag(Π, −ρ⁻¹) · H: the linear generator of the packed flow.
    pub fn generator(&self) -> Result<CMatrix> {
        let pi = SymplecticForm::euclidean(self.bosonic.modes()).poisson_tensor();
        let rho_inv = linalg::inverse(&self.fermionic.metric)?;
        Ok(linalg::block_diag(&[&pi, &(rho_inv * c(-1.0))]) * &self.h)
    }

    pub fn propagator(&self, tau: f64) -> Result<CMatrix> {
        Ok(linalg::expm(&(self.generator()? * c(tau))))
    }
}

/// Exact comparison of lattice Poisson brackets with J and ρ.
#[derive(Debug, Clone, Serialize)]
pub struct FieldBracketReport {
    /// Entries of {φ^a, φ^b} that differ from J^{ab}.
    pub bosonic_mismatches: usize,
    /// Entries of {ψ^a, ψ^b} that differ from (ρ⁻¹)^{ab} = ρ^{ab}.
    pub fermionic_mismatches: usize,
    pub bosonic_entries: usize,
    pub fermionic_entries: usize,
}

pub fn bosonic_brackets(fm: &FieldModel) -> Result<(CMatrix, usize)> {
    fm.require_bosonic()?;
    let s = fm.modes();
    let form = SymplecticForm::euclidean(s);
    let mut out = CMatrix::zeros(2 * s, 2 * s);
    for a in 0..2 * s {
        for b in 0..2 * s {
            let br = poisson(&PhasePolynomial::var(s, a)?, &PhasePolynomial::var(s, b)?, &form)?;
            if br.degree() > 0 {
                return Err(Error::InvalidParameter("bracket of coordinates is not constant".into()));
            }
            out[(a, b)] = br.terms().map(|(_, v)| v).sum();
        }
    }
    let mismatches = out.iter().zip(fm.metric.iter()).filter(|(x, y)| x != y).count();
    Ok((out, mismatches))
}

pub fn fermionic_brackets(fm: &FieldModel) -> Result<(CMatrix, usize)> {
    let n = fm.metric.nrows();
    let rho_inv = linalg::inverse(&fm.metric)?;
    let mut out = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let br = grassmann_poisson(&GrassmannFunction::xi(n, a + 1)?, &GrassmannFunction::xi(n, b + 1)?, &rho_inv)?;
            out[(a, b)] = br.coeff(0);
            if br.terms().any(|(m, v)| m != 0 && v.norm() != 0.0) {
                return Err(Error::InvalidParameter("bracket of coordinates is not constant".into()));
            }
        }
    }
    let mismatches = out.iter().zip(fm.metric.iter()).filter(|(x, y)| x != y).count();
    Ok((out, mismatches))
}

pub fn field_brackets(b: &FieldModel, f: &FieldModel) -> Result<FieldBracketReport> {
    let (bb, bm) = bosonic_brackets(b)?;
    let (fb, fmis) = fermionic_brackets(f)?;
    Ok(FieldBracketReport { bosonic_mismatches: bm, fermionic_mismatches: fmis, bosonic_entries: bb.len(), fermionic_entries: fb.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lat(dims: &[usize]) -> Lattice {
        Lattice::new(dims.to_vec(), 1.0).unwrap()
    }

    fn scalar(dims: &[usize], m: f64) -> FieldModel {
        build_model(&lat(dims), FieldKind::Scalar, &FieldParams { mass: m, ..Default::default() }).unwrap()
    }

    fn toy_dirac(sites: usize, m: f64) -> FieldModel {
        build_model(&lat(&[sites]), FieldKind::Dirac, &FieldParams { mass: m, components: 2, ..Default::default() }).unwrap()
    }

    #[test]
    fn scalar_kernels() {
        let one = scalar(&[1], 1.0);
        assert_eq!(one.kernel, linalg::identity(2));
        let four = scalar(&[4], 0.0);
        let row: Vec<f64> = (0..4).map(|j| four.kernel[(0, j)].re).collect();
        assert_eq!(row, vec![2.0, -1.0, 0.0, -1.0]);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(four.kernel[(i, j)], four.kernel[((i + 1) % 4, (j + 1) % 4)]);
            }
        }
    }

    #[test]
    fn lattice_indexing() {
        let l = lat(&[3, 4]);
        assert_eq!(l.sites(), 12);
        assert_eq!(l.coords(7), vec![1, 3]);
        assert_eq!(l.index(&[1, 3]), 7);
        assert_eq!(l.neighbor(7, 1, 1), 4);
        assert_eq!(l.neighbor(0, 0, -1), 8);
        assert!(Lattice::new(vec![2, 0], 1.0).is_err());
    }

    #[test]
    fn dirac_assembly() {
        for comps in [2, 4] {
            let (alpha, beta) = dirac_matrices(comps).unwrap();
            assert!(linalg::is_hermitian(&beta, 1e-12));
            let id = linalg::identity(comps);
            assert!(linalg::max_diff(&(&beta * &beta), &id) < 1e-12);
            for (r, a) in alpha.iter().enumerate() {
                assert!(linalg::is_hermitian(a, 1e-12));
                assert!(linalg::max_diff(&linalg::anticommutator(a, &beta), &CMatrix::zeros(comps, comps)) < 1e-12);
                for b in &alpha[r..] {
                    let want = if std::ptr::eq(a, b) { &id * c(2.0) } else { CMatrix::zeros(comps, comps) };
                    assert!(linalg::max_diff(&linalg::anticommutator(a, b), &want) < 1e-12);
                }
            }
        }
        let fm = build_model(&lat(&[2]), FieldKind::Dirac, &FieldParams::default()).unwrap();
        let h1 = fm.one_particle.as_ref().unwrap();
        assert!(linalg::is_hermitian(h1, 1e-12));
        let m = h1 * I;
        assert!(linalg::max_diff(&m.adjoint(), &(m.clone() * c(-1.0))) < 1e-12);
        assert!(linalg::asymmetry(&(&fm.kernel + fm.kernel.transpose())) < 1e-12);
        assert!(linalg::max_abs(&(&fm.kernel + fm.kernel.transpose())) < 1e-12);
        assert!(build_model(&lat(&[2, 2]), FieldKind::Dirac, &FieldParams { components: 2, ..Default::default() }).is_err());
        assert!(matches!(
            build_model(&lat(&[4]), FieldKind::Dirac, &FieldParams::default()),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn dirac_spectrum_is_relativistic() {
        let fm = toy_dirac(3, 0.7);
        let eps = fm.spectrum().unwrap();
        let mut want: Vec<f64> = (0..3)
            .flat_map(|k| {
                let s = (2.0 * PI * k as f64 / 3.0).sin();
                let w = (0.49 + s * s).sqrt();
                [w, -w]
            })
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in eps.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_flows() {
        let fm = scalar(&[1], 1.0);
        let z0 = CVector::from_vec(vec![c(1.0), c(0.0)]);
        let z = classical_field_flow(&fm, &z0, 2.0 * PI).unwrap();
        assert!(linalg::max_abs_vec(&(z - &z0)) < 1e-9);
        let f = operator_field_flow(&fm, PI).unwrap();
        assert!(linalg::max_diff(&f.c, &(linalg::identity(2) * c(-1.0))) < 1e-9);
        assert_eq!(operator_field_flow(&fm, 0.0).unwrap().c, linalg::identity(2));
        // massless, uniform field: Π constant, φ linear
        let fm0 = scalar(&[3], 0.0);
        let z0 = CVector::from_vec(vec![c(0.5), c(0.5), c(0.5), c(2.0), c(2.0), c(2.0)]);
        let z = classical_field_flow(&fm0, &z0, 1.5).unwrap();
        for i in 0..3 {
            assert!((z[i] - c(3.5)).norm() < 1e-12 && (z[3 + i] - c(2.0)).norm() < 1e-12);
        }
        let big = scalar(&[5], 0.3);
        let qm = big.quadratic_model().unwrap();
        let z0 = CVector::from_fn(10, |i, _| c((i as f64 * 0.37).sin()));
        let z = classical_field_flow(&big, &z0, 4.0).unwrap();
        assert!((qm.energy(&z) - qm.energy(&z0)).norm() < 1e-10);
        let fr = operator_field_flow(&big, 4.0).unwrap();
        assert!(dynamics::symplecticity_deviation(&fr, &qm.form) < 1e-9);
        assert!(classical_field_flow(&toy_dirac(1, 1.0), &z0, 1.0).is_err());
    }

    #[test]
    fn schrodinger_norm() {
        let p = FieldParams { mass: 1.0, potential: Some(vec![0.0, 0.3, -0.2]), ..Default::default() };
        let fm = build_model(&lat(&[3]), FieldKind::Schrodinger, &p).unwrap();
        let phi = [Complex64::new(0.3, 0.1), Complex64::new(-0.5, 0.2), Complex64::new(0.1, 0.9)];
        let mut z0 = CVector::zeros(6);
        for i in 0..3 {
            z0[i] = phi[i];
            z0[3 + i] = I * phi[i].conj();
        }
        let z = classical_field_flow(&fm, &z0, 2.7).unwrap();
        let norm = |z: &CVector| (0..3).map(|i| z[i].norm_sqr()).sum::<f64>();
        assert!((norm(&z) - norm(&z0)).abs() < 1e-12);
        for i in 0..3 {
            assert!((z[3 + i] - I * z[i].conj()).norm() < 1e-12);
        }
        let st = build_model(&lat(&[2, 2, 2, 2]), FieldKind::Stueckelberg, &FieldParams::default()).unwrap();
        assert_eq!(st.kernel.nrows(), 32);
        assert!(build_model(&lat(&[3, 3, 2, 2]), FieldKind::Stueckelberg, &FieldParams::default()).is_err());
    }

    #[test]
    fn jordan_wigner() {
        let fa = FermionAlgebra::new(1).unwrap();
        let h = fa.integer_matrix(ModeOp::Create(0)).unwrap();
        assert_eq!(h, vec![vec![0, 0], vec![1, 0]]);
        for d in 0..=6 {
            let r = FermionAlgebra::new(d).unwrap().anticommutator_check();
            assert_eq!(r.max_integer_deviation, 0);
            assert_eq!(r.pairs_checked, 4 * d * d);
        }
        assert!(FermionAlgebra::new(15).is_err());
    }

    /// JW matrices agree with the blade-built creators of the doubled Witt basis.
    #[test]
    fn jordan_wigner_matches_blades() {
        use crate::blade::make_algebra;
        use crate::witt::{ideal_basis_with, matrix_rep, witt_basis, Normalization, VacuumSpec, WittScheme};
        for d in 1..=3 {
            let ctx = make_algebra(Signature::new(2 * d, 0).unwrap()).unwrap();
            let wb = witt_basis(&ctx, WittScheme::Doubled).unwrap();
            let ib = ideal_basis_with(&wb, &VacuumSpec::all_barred(d), Normalization::Raw).unwrap();
            let fa = FermionAlgebra::new(d).unwrap();
            let order = crate::graded_lex_subsets(d);
            for mu in 0..d {
                let rep = matrix_rep(wb.theta(mu + 1), &ib).unwrap();
                let jw = fa.matrix(ModeOp::Create(mu)).unwrap();
                let permuted = CMatrix::from_fn(1 << d, 1 << d, |r, col| jw[(order[r] as usize, order[col] as usize)]);
                assert!(linalg::max_diff(&rep, &permuted) < 1e-12, "d={d} mu={mu} {rep} {permuted}");
            }
        }
    }

    #[test]
    fn vacua_and_fock_bases() {
        let fa = FermionAlgebra::new(2).unwrap();
        let all_b = make_vacuum(&fa, &VacuumRule::Custom(vec![Flag::Barred; 2]), None).unwrap();
        assert_eq!(all_b.state[0], c(1.0));
        assert_eq!(all_b.annihilation_residual(&fa), 0.0);
        let all_u = make_vacuum(&fa, &VacuumRule::Custom(vec![Flag::Unbarred; 2]), None).unwrap();
        assert_eq!(all_u.state[3].norm(), 1.0);
        for m in 0..2 {
            assert_eq!(linalg::max_abs_vec(&fa.apply(ModeOp::Create(m), &all_u.state)), 0.0);
        }
        let vacua = enumerate_bare_vacua(&fa).unwrap();
        assert_eq!(vacua.len(), 4);
        for v in &vacua {
            let basis = fock_basis(&fa, v).unwrap();
            assert_eq!(basis.len(), 4);
            assert_eq!(fock_rank(&basis), 4);
        }
        // Pauli exclusion
        let once = fa.apply(ModeOp::Create(1), &all_b.state);
        assert_eq!(linalg::max_abs_vec(&fa.apply(ModeOp::Create(1), &once)), 0.0);
        let fa4 = FermionAlgebra::new(4).unwrap();
        let v = make_vacuum(&fa4, &"bubu".parse().unwrap(), None).unwrap();
        assert_eq!(fock_rank(&fock_basis(&fa4, &v).unwrap()), 16);
    }

    #[test]
    fn zero_point_energy() {
        for sites in 1..=3 {
            let fm = toy_dirac(sites, 0.8);
            let led = energy_ledger(&fm).unwrap();
            assert!(led.split.expectation.abs() < 1e-12);
            assert!((led.standard.expectation - led.sea_energy()).abs() < 1e-12);
            assert!((led.standard.expectation + led.conjugate.expectation).abs() < 1e-12);
            for e in [&led.standard, &led.conjugate, &led.split] {
                assert!((e.expectation - e.oracle).abs() < 1e-12);
            }
            let fa = fermion_algebra(&fm).unwrap();
            for rule in [VacuumRule::Standard, VacuumRule::ConjugateStandard, VacuumRule::FrequencySplit] {
                let vac = make_vacuum(&fa, &rule, Some(&fm)).unwrap();
                assert!(vac.annihilation_residual(&fa) < 1e-12);
                assert!((vac.state.norm() - 1.0).abs() < 1e-12);
            }
        }
        let massless = toy_dirac(2, 0.0);
        let fa = fermion_algebra(&massless).unwrap();
        assert!(matches!(make_vacuum(&fa, &VacuumRule::FrequencySplit, Some(&massless)), Err(Error::ZeroEigenvalue(_))));
        let heavy = energy_ledger(&toy_dirac(2, 50.0)).unwrap();
        assert!(heavy.split.expectation.abs() < 1e-9);
        assert!(heavy.spectrum.iter().all(|e| (e.abs() - 50.0).abs() < 0.02));
    }

    #[test]
    fn boson_witt_relations() {
        let bw = boson_witt(&scalar(&[1], 1.0), 8).unwrap();
        let r = bw.report();
        assert_eq!(r.kk, 0.0);
        assert!(r.kbar_k < 1e-10);
        let bw2 = boson_witt(&scalar(&[2], 1.0), 5).unwrap();
        let r2 = bw2.report();
        assert!(r2.kk < 1e-12 && r2.kbar_k < 1e-10 && r2.symmetry < 1e-12);
    }

    #[test]
    fn superfield() {
        let b = scalar(&[1], 1.0);
        let f = toy_dirac(1, 1.0);
        let s = superfield_pack(&b, &f, None).unwrap();
        assert_eq!(s.g, linalg::block_diag(&[&b.metric, &f.metric]));
        let p = s.propagator(0.9).unwrap();
        let rb = dynamics::classical_propagator(&b.quadratic_model().unwrap(), 0.9);
        assert!(linalg::max_diff(&p.view((0, 0), (2, 2)).into_owned(), &rb) < 1e-12);
        assert!(linalg::max_abs(&p.view((0, 2), (2, 4)).into_owned()) == 0.0);
        let coupling = CMatrix::from_element(2, 4, c(0.1));
        let sc = superfield_pack(&b, &f, Some(&coupling)).unwrap();
        assert!(sc.coupled && sc.propagator(0.5).is_ok());
        let fs = scalar(&[1], 1.0).as_fermionic_block();
        assert!(superfield_pack(&b, &fs, None).is_ok());
        assert!(superfield_pack(&scalar(&[2], 1.0), &f, None).is_err());
    }

    #[test]
    fn brackets_reproduce_metrics() {
        let r = field_brackets(&scalar(&[3], 1.0), &toy_dirac(2, 1.0)).unwrap();
        assert_eq!((r.bosonic_mismatches, r.fermionic_mismatches), (0, 0));
        assert_eq!((r.bosonic_entries, r.fermionic_entries), (36, 64));
    }
}
