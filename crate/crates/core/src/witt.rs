//! Witt bases, vacua, minimal left ideals and their matrix representations.

use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::blade::{AlgebraContext, Multivector, Scalar, Signature};
use crate::error::{Error, Result};
use crate::exact::{self, GaussInt, GaussRational};
use crate::graded_lex_subsets;
use crate::linalg::{self, CMatrix};

/// How generators are paired into null combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WittScheme {
    /// θ_μ = (γ_μ + iγ̄_μ)/√2 with γ and γ̄ drawn from the same metric block.
    Doubled,
    /// θ_1 = (γ_0 + γ_3)/√2, θ_2 = (γ_1 + iγ_2)/√2, repeated on the barred copy.
    Spacetime,
}

impl WittScheme {
    pub fn name(self) -> &'static str {
        match self {
            WittScheme::Doubled => "doubled",
            WittScheme::Spacetime => "spacetime",
        }
    }
}

impl FromStr for WittScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "doubled" => Ok(WittScheme::Doubled),
            "spacetime" => Ok(WittScheme::Spacetime),
            other => Err(Error::InvalidParameter(format!("unknown Witt scheme '{other}'"))),
        }
    }
}

/// θ_μ = (γ_a + c·γ_b)/√2 and θ̄_μ = (γ_a − c·γ_b)/√2 with c ∈ {1, i}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WittPair {
    pub a: usize,
    pub b: usize,
    pub imaginary: bool,
}

/// Generator indices of the spacetime frame for the Spacetime scheme.
///
/// `gamma[μ]` is the index of γ_μ (μ = 0..d), `gamma_bar[μ]` the index of the
/// barred copy when the signature carries one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpacetimeFrame {
    pub gamma: Vec<usize>,
    pub gamma_bar: Vec<usize>,
}

impl SpacetimeFrame {
    /// Frame for (1,1), (1,3) or (2,6).
    pub fn for_signature(sig: Signature) -> Result<Self> {
        match (sig.p, sig.q) {
            (1, 1) => Ok(SpacetimeFrame { gamma: vec![1, 2], gamma_bar: vec![] }),
            (1, 3) => Ok(SpacetimeFrame { gamma: vec![1, 2, 3, 4], gamma_bar: vec![] }),
            (2, 6) => Ok(SpacetimeFrame { gamma: vec![1, 3, 4, 5], gamma_bar: vec![2, 6, 7, 8] }),
            _ => Err(Error::IncompatibleScheme { scheme: "spacetime", p: sig.p, q: sig.q }),
        }
    }

    /// η_μμ of the spacetime metric (+,−,−,...).
    pub fn eta(&self, mu: usize) -> i8 {
        if mu == 0 {
            1
        } else {
            -1
        }
    }
}

fn pairs_for(sig: Signature, scheme: WittScheme) -> Result<Vec<WittPair>> {
    let (p, q) = (sig.p, sig.q);
    if (p + q) % 2 != 0 {
        return Err(Error::InvalidSignature { p, q, reason: "p+q must be even for a Witt basis" });
    }
    match scheme {
        WittScheme::Doubled => {
            if p % 2 != 0 || q % 2 != 0 {
                return Err(Error::IncompatibleScheme { scheme: "doubled", p, q });
            }
            let mut pairs = Vec::new();
            for mu in 1..=p / 2 {
                pairs.push(WittPair { a: mu, b: p / 2 + mu, imaginary: true });
            }
            for nu in 1..=q / 2 {
                pairs.push(WittPair { a: p + nu, b: p + q / 2 + nu, imaginary: true });
            }
            Ok(pairs)
        }
        WittScheme::Spacetime => {
            let frame = SpacetimeFrame::for_signature(sig)?;
            let block = |g: &[usize]| -> Vec<WittPair> {
                if g.len() == 2 {
                    vec![WittPair { a: g[0], b: g[1], imaginary: false }]
                } else {
                    vec![WittPair { a: g[0], b: g[3], imaginary: false }, WittPair { a: g[1], b: g[2], imaginary: true }]
                }
            };
            let mut pairs = block(&frame.gamma);
            if !frame.gamma_bar.is_empty() {
                pairs.extend(block(&frame.gamma_bar));
            }
            Ok(pairs)
        }
    }
}

/// A Witt basis θ_μ, θ̄_μ (μ = 1..n) of an even-dimensional algebra.
///
/// The floating-point basis carries the 1/√2 normalization. The integral
/// variant ([`WittBasis::integral`]) stores θ' = √2·θ so that every
/// coefficient is a Gaussian integer.
#[derive(Debug, Clone)]
pub struct WittBasis<T: Scalar = Complex64> {
    ctx: AlgebraContext,
    scheme: WittScheme,
    pairs: Vec<WittPair>,
    theta: Vec<Multivector<T>>,
    theta_bar: Vec<Multivector<T>>,
    eta: Vec<i8>,
}

fn build<T: Scalar>(
    ctx: &AlgebraContext,
    scheme: WittScheme,
    unit: T,
    i_unit: T,
) -> Result<WittBasis<T>> {
    let sig = ctx.signature();
    let pairs = pairs_for(sig, scheme)?;
    let mut theta = Vec::new();
    let mut theta_bar = Vec::new();
    let mut eta = Vec::new();
    for pr in &pairs {
        let ga = ctx.generator::<T>(pr.a)?.scale(unit);
        let c = if pr.imaginary { i_unit } else { unit };
        let gb = ctx.generator::<T>(pr.b)?.scale(c);
        theta.push(&ga + &gb);
        theta_bar.push(&ga - &gb);
        eta.push(sig.metric(pr.a));
    }
    Ok(WittBasis { ctx: ctx.clone(), scheme, pairs, theta, theta_bar, eta })
}

/// Construct the Witt basis of `ctx` under `scheme`.
pub fn witt_basis(ctx: &AlgebraContext, scheme: WittScheme) -> Result<WittBasis> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    build(ctx, scheme, Complex64::new(s, 0.0), Complex64::new(0.0, s))
}

impl WittBasis<Complex<i64>> {
    /// Unnormalized basis θ' = γ_a + cγ_b with Gaussian-integer coefficients.
    pub fn integral(ctx: &AlgebraContext, scheme: WittScheme) -> Result<Self> {
        build(ctx, scheme, Complex::new(1, 0), Complex::new(0, 1))
    }
}

impl<T: Scalar> WittBasis<T> {
    pub fn ctx(&self) -> &AlgebraContext {
        &self.ctx
    }

    pub fn scheme(&self) -> WittScheme {
        self.scheme
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn pairs(&self) -> &[WittPair] {
        &self.pairs
    }

    /// θ_μ, μ = 1..n.
    pub fn theta(&self, mu: usize) -> &Multivector<T> {
        &self.theta[mu - 1]
    }

    /// θ̄_μ, μ = 1..n.
    pub fn theta_bar(&self, mu: usize) -> &Multivector<T> {
        &self.theta_bar[mu - 1]
    }

    /// η_μμ, μ = 1..n.
    pub fn eta(&self, mu: usize) -> i8 {
        self.eta[mu - 1]
    }

    /// Raised-index θ^μ = η^{μμ} θ_μ.
    pub fn theta_upper(&self, mu: usize) -> Multivector<T> {
        if self.eta(mu) > 0 {
            self.theta(mu).clone()
        } else {
            -self.theta(mu)
        }
    }

    /// Operator that annihilates the vacuum in slot μ.
    pub fn annihilator(&self, spec: &VacuumSpec, mu: usize) -> &Multivector<T> {
        if spec.flag(mu) == Flag::Barred {
            self.theta_bar(mu)
        } else {
            self.theta(mu)
        }
    }

    /// Operator that creates an excitation in slot μ.
    pub fn creator(&self, spec: &VacuumSpec, mu: usize) -> &Multivector<T> {
        if spec.flag(mu) == Flag::Barred {
            self.theta(mu)
        } else {
            self.theta_bar(mu)
        }
    }
}

/// Role of one Witt slot in a vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flag {
    /// The slot contributes θ̄_μ to Ω and is annihilated by θ̄_μ.
    Barred,
    /// The slot contributes θ_μ to Ω and is annihilated by θ_μ.
    Unbarred,
}

/// Partition of {1..n} into barred (R1) and unbarred (R2) slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VacuumSpec {
    n: usize,
    unbarred: u32,
}

impl VacuumSpec {
    pub fn new(n: usize, unbarred: &[usize]) -> Result<Self> {
        if n > 31 {
            return Err(Error::InvalidVacuum(format!("n = {n} too large")));
        }
        let mut mask = 0u32;
        for &mu in unbarred {
            if mu == 0 || mu > n {
                return Err(Error::InvalidVacuum(format!("slot {mu} outside 1..={n}")));
            }
            mask |= 1 << (mu - 1);
        }
        Ok(VacuumSpec { n, unbarred: mask })
    }

    pub fn all_barred(n: usize) -> Self {
        VacuumSpec { n, unbarred: 0 }
    }

    pub fn from_mask(n: usize, unbarred: u32) -> Self {
        VacuumSpec { n, unbarred: unbarred & ((1u32 << n) - 1) }
    }

    pub fn from_flags(flags: &[Flag]) -> Self {
        let mut mask = 0;
        for (k, f) in flags.iter().enumerate() {
            if *f == Flag::Unbarred {
                mask |= 1 << k;
            }
        }
        VacuumSpec { n: flags.len(), unbarred: mask }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn unbarred_mask(&self) -> u32 {
        self.unbarred
    }

    pub fn flag(&self, mu: usize) -> Flag {
        if self.unbarred >> (mu - 1) & 1 == 1 {
            Flag::Unbarred
        } else {
            Flag::Barred
        }
    }

    pub fn flags(&self) -> Vec<Flag> {
        (1..=self.n).map(|mu| self.flag(mu)).collect()
    }

    /// R1, ascending.
    pub fn barred(&self) -> Vec<usize> {
        (1..=self.n).filter(|&mu| self.flag(mu) == Flag::Barred).collect()
    }

    /// R2, ascending.
    pub fn unbarred(&self) -> Vec<usize> {
        (1..=self.n).filter(|&mu| self.flag(mu) == Flag::Unbarred).collect()
    }
}

impl fmt::Display for VacuumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fl in self.flags() {
            write!(f, "{}", if fl == Flag::Barred { 'b' } else { 'u' })?;
        }
        Ok(())
    }
}

impl FromStr for VacuumSpec {
    type Err = Error;
    /// One character per slot: `b`/`0` barred, `u`/`1` unbarred.
    fn from_str(s: &str) -> Result<Self> {
        let flags = s
            .chars()
            .map(|ch| match ch {
                'b' | 'B' | '0' => Ok(Flag::Barred),
                'u' | 'U' | '1' => Ok(Flag::Unbarred),
                other => Err(Error::InvalidVacuum(format!("unexpected flag character '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if flags.is_empty() || flags.len() > 31 {
            return Err(Error::InvalidVacuum("need between 1 and 31 flags".into()));
        }
        Ok(VacuumSpec::from_flags(&flags))
    }
}

/// All 2^n vacuum specifications, ordered by the unbarred bitmask.
pub fn enumerate_vacua(n: usize) -> Vec<VacuumSpec> {
    (0..1u32 << n).map(|m| VacuumSpec::from_mask(n, m)).collect()
}

fn check_spec<T: Scalar>(wb: &WittBasis<T>, spec: &VacuumSpec) -> Result<()> {
    if spec.n() != wb.n() {
        return Err(Error::InvalidVacuum(format!("spec has {} slots, Witt basis has {}", spec.n(), wb.n())));
    }
    Ok(())
}

/// Ω = (∏_{μ∈R2} θ_μ)(∏_{μ∈R1} θ̄_μ), each group ascending.
pub fn vacuum<T: Scalar>(wb: &WittBasis<T>, spec: &VacuumSpec) -> Result<Multivector<T>> {
    check_spec(wb, spec)?;
    let mut omega = wb.ctx().one::<T>();
    for mu in spec.unbarred() {
        omega = omega.gp(wb.theta(mu))?;
    }
    for mu in spec.barred() {
        omega = omega.gp(wb.theta_bar(mu))?;
    }
    Ok(omega)
}

/// Normalization of ideal basis elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// s_A = c_A Ω.
    #[default]
    Raw,
    /// s_A = 2^{-|A|/2} c_A Ω; creation and annihilation act with unit entries.
    Unit,
}

/// Unnormalized ideal elements c_A Ω in graded-lexicographic order of A.
pub fn ideal_elements<T: Scalar>(wb: &WittBasis<T>, spec: &VacuumSpec) -> Result<(Multivector<T>, Vec<Multivector<T>>)> {
    let omega = vacuum(wb, spec)?;
    let mut out = Vec::with_capacity(1 << wb.n());
    for subset in graded_lex_subsets(wb.n()) {
        let mut x = omega.clone();
        for mu in (1..=wb.n()).rev().filter(|mu| subset >> (mu - 1) & 1 == 1) {
            x = wb.creator(spec, mu).gp(&x)?;
        }
        out.push(x);
    }
    Ok((omega, out))
}

/// Basis of one minimal left ideal together with its metric dual.
#[derive(Debug, Clone)]
pub struct IdealBasis {
    pub spec: VacuumSpec,
    pub vacuum: Multivector,
    /// Creation-operator subsets, graded-lexicographic.
    pub subsets: Vec<u32>,
    pub elements: Vec<Multivector>,
    pub duals: Vec<Multivector>,
    pub normalization: Normalization,
}

impl IdealBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }
}

/// All 2^n ideals of a Witt basis with duals from the full Gram matrix.
#[derive(Debug, Clone)]
pub struct SpinorFrame {
    pub n: usize,
    pub ideals: Vec<IdealBasis>,
}

impl SpinorFrame {
    pub fn new(wb: &WittBasis, norm: Normalization) -> Result<Self> {
        let n = wb.n();
        let mut raw = Vec::new();
        for spec in enumerate_vacua(n) {
            let (omega, mut els) = ideal_elements(wb, &spec)?;
            if norm == Normalization::Unit {
                for (el, subset) in els.iter_mut().zip(graded_lex_subsets(n)) {
                    let f = 0.5f64.powf(subset.count_ones() as f64 / 2.0);
                    *el = el.scale(Complex64::new(f, 0.0));
                }
            }
            raw.push((spec, omega, els));
        }
        let all: Vec<&Multivector> = raw.iter().flat_map(|(_, _, e)| e.iter()).collect();
        let dim = all.len();
        let mut gram = CMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                gram[(a, b)] = all[a].scalar_product(all[b])?;
            }
        }
        let ginv = linalg::inverse(&gram).map_err(|_| Error::RankDeficient {
            rank: linalg::rank(&gram, 1e-10),
            expected: dim,
        })?;
        let sig = wb.ctx().signature();
        let dense_all: Vec<nalgebra::DVector<Complex64>> = all.iter().map(|m| m.to_dense()).collect();
        let mut ideals = Vec::new();
        for (k, (spec, omega, els)) in raw.into_iter().enumerate() {
            let mut duals = Vec::with_capacity(els.len());
            for alpha in 0..els.len() {
                let row = k * els.len() + alpha;
                let mut acc = nalgebra::DVector::<Complex64>::zeros(sig.algebra_dim());
                for (c, dense) in dense_all.iter().enumerate() {
                    let x = ginv[(row, c)].conj();
                    if x.norm() > 0.0 {
                        acc.axpy(x, dense, Complex64::new(1.0, 0.0));
                    }
                }
                duals.push(Multivector::from_dense(sig, &acc).prune(1e-14));
            }
            ideals.push(IdealBasis {
                spec,
                vacuum: omega,
                subsets: graded_lex_subsets(n),
                elements: els,
                duals,
                normalization: norm,
            });
        }
        Ok(SpinorFrame { n, ideals })
    }

    pub fn ideal(&self, spec: &VacuumSpec) -> Option<&IdealBasis> {
        self.ideals.iter().find(|ib| ib.spec == *spec)
    }

    pub fn dim(&self) -> usize {
        self.ideals.iter().map(|i| i.dim()).sum()
    }

    fn elements(&self) -> impl Iterator<Item = &Multivector> {
        self.ideals.iter().flat_map(|i| i.elements.iter())
    }

    fn duals(&self) -> impl Iterator<Item = &Multivector> {
        self.ideals.iter().flat_map(|i| i.duals.iter())
    }
}

/// Ideal basis for one vacuum (raw normalization).
pub fn ideal_basis(wb: &WittBasis, spec: &VacuumSpec) -> Result<IdealBasis> {
    ideal_basis_with(wb, spec, Normalization::Raw)
}

pub fn ideal_basis_with(wb: &WittBasis, spec: &VacuumSpec, norm: Normalization) -> Result<IdealBasis> {
    check_spec(wb, spec)?;
    let frame = SpinorFrame::new(wb, norm)?;
    let ib = frame.ideal(spec).cloned().expect("every spec has an ideal");
    let cols: Vec<_> = ib.elements.iter().map(|e| e.to_dense()).collect();
    let m = CMatrix::from_columns(&cols);
    let r = linalg::rank(&m, 1e-10);
    if r < ib.dim() {
        return Err(Error::RankDeficient { rank: r, expected: ib.dim() });
    }
    Ok(ib)
}

/// Components ψ^α = ⟨s^α† Ψ⟩_S.
pub fn project_components(psi: &Multivector, ib: &IdealBasis) -> Result<Vec<Complex64>> {
    ib.duals.iter().map(|d| d.scalar_product(psi)).collect()
}

/// Σ ψ^α s_α.
pub fn reconstruct(components: &[Complex64], ib: &IdealBasis) -> Result<Multivector> {
    if components.len() != ib.dim() {
        return Err(Error::DimensionMismatch { expected: ib.dim(), got: components.len() });
    }
    let mut out = Multivector::zero(ib.vacuum.signature());
    for (c, s) in components.iter().zip(&ib.elements) {
        out = out.try_add(&s.scale(*c))?;
    }
    Ok(out)
}

/// M^α_β = ⟨s^α† x s_β⟩_S on one ideal.
pub fn matrix_rep(x: &Multivector, ib: &IdealBasis) -> Result<CMatrix> {
    let d = ib.dim();
    let mut m = CMatrix::zeros(d, d);
    for (b, s) in ib.elements.iter().enumerate() {
        let xs = x.gp(s)?;
        for (a, dual) in ib.duals.iter().enumerate() {
            m[(a, b)] = dual.scalar_product(&xs)?;
        }
    }
    Ok(m)
}

/// Sandwich over the full basis of all ideals (size 2^{2n}).
pub fn full_matrix_rep(x: &Multivector, frame: &SpinorFrame) -> Result<CMatrix> {
    let d = frame.dim();
    let mut m = CMatrix::zeros(d, d);
    let duals: Vec<&Multivector> = frame.duals().collect();
    for (b, s) in frame.elements().enumerate() {
        let xs = x.gp(s)?;
        for (a, dual) in duals.iter().enumerate() {
            m[(a, b)] = dual.scalar_product(&xs)?;
        }
    }
    Ok(m)
}

/// Exact rank of the union of the integral ideal bases over the given vacua.
pub fn ideal_rank_exact(wb: &WittBasis<Complex<i64>>, specs: &[VacuumSpec]) -> Result<usize> {
    let dim = wb.ctx().algebra_dim();
    let mut rows = Vec::new();
    for spec in specs {
        for el in ideal_elements(wb, spec)?.1 {
            let mut row = vec![GaussInt::new(0, 0); dim];
            for (b, c) in el.terms() {
                row[b.0 as usize] = c;
            }
            rows.push(row);
        }
    }
    Ok(exact::rank_gaussian(&rows))
}

/// Exact coordinates of `x·s_β` in the integral ideal basis `elements`.
pub fn exact_matrix_rep(
    x: &Multivector<Complex<i64>>,
    elements: &[Multivector<Complex<i64>>],
) -> Result<Vec<Vec<GaussRational>>> {
    let dim = x.signature().algebra_dim();
    let dense = |m: &Multivector<Complex<i64>>| {
        let mut v = vec![GaussInt::new(0, 0); dim];
        for (b, c) in m.terms() {
            v[b.0 as usize] = c;
        }
        v
    };
    let cols: Vec<Vec<GaussInt>> = elements.iter().map(dense).collect();
    let mut m = vec![vec![GaussRational::ZERO; elements.len()]; elements.len()];
    for (beta, s) in elements.iter().enumerate() {
        let y = dense(&x.gp(s)?);
        let coords = exact::solve_columns(&cols, &y)?;
        for (alpha, c) in coords.into_iter().enumerate() {
            m[alpha][beta] = c;
        }
    }
    Ok(m)
}

/// Vielbein and induced metric from ⟨γ_μ⟩_1 = ⟨Ψ†γ_μΨ⟩_1 / ⟨Ψ†Ψ⟩_S.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectationMetric {
    pub e: Vec<Vec<Complex64>>,
    pub g: Vec<Vec<Complex64>>,
}

pub fn expectation_metric(psi: &Multivector, ctx: &AlgebraContext) -> Result<ExpectationMetric> {
    let sig = ctx.signature();
    if psi.signature() != sig {
        let s = psi.signature();
        return Err(Error::SignatureMismatch(s.p, s.q, sig.p, sig.q));
    }
    let norm = psi.scalar_product(psi)?;
    if norm.norm() < 1e-14 {
        return Err(Error::ZeroNorm("⟨Ψ†Ψ⟩_S vanishes"));
    }
    let d = sig.dim();
    let psi_dag = psi.dagger();
    let mut e = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for mu in 0..d {
        let v = psi_dag.gp(&ctx.generator::<Complex64>(mu + 1)?.gp(psi)?)?.grade_project(1);
        for nu in 0..d {
            e[mu][nu] = v.coeff(crate::blade::Blade(1 << nu)) / norm;
        }
    }
    let mut g = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for mu in 0..d {
        for nu in 0..d {
            g[mu][nu] = (0..d).map(|a| e[mu][a] * e[nu][a] * sig.metric(a + 1) as f64).sum();
        }
    }
    Ok(ExpectationMetric { e, g })
}

/// Pointwise metric over sampled spinor fields.
pub fn expectation_metric_samples(samples: &[Multivector], ctx: &AlgebraContext) -> Result<Vec<ExpectationMetric>> {
    samples.iter().map(|s| expectation_metric(s, ctx)).collect()
}
