//! Finite Grassmann algebra on ξ^1..ξ^n with Berezin calculus.
//!
//! Monomials are bitsets (bit k-1 marks ξ^k) read in ascending order.
//! Derivatives act from the left unless stated otherwise.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blade::reorder_parity;
use crate::error::{Error, Result};
use crate::graded_lex_subsets;
use crate::linalg::CMatrix;
use crate::witt::{Flag, VacuumSpec};

/// Element of the Grassmann algebra on n generators.
#[derive(Clone, PartialEq)]
pub struct GrassmannFunction {
    n: usize,
    terms: BTreeMap<u32, Complex64>,
}

impl fmt::Debug for GrassmannFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}[", self.n)?;
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}·ξ{:?}", indices(*m))?;
        }
        write!(f, "]")
    }
}

fn indices(m: u32) -> Vec<usize> {
    (0..32).filter(|k| m >> k & 1 == 1).map(|k| k + 1).collect()
}

fn sign(odd: bool, c: Complex64) -> Complex64 {
    if odd {
        -c
    } else {
        c
    }
}

pub const MAX_GENERATORS: usize = 31;

impl GrassmannFunction {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_GENERATORS, "too many Grassmann generators");
        GrassmannFunction { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self::monomial(n, 0, c)
    }

    /// c·ξ_A for the bitset A.
    pub fn monomial(n: usize, subset: u32, c: Complex64) -> Self {
        let mut f = Self::zero(n);
        f.add_term(subset, c);
        f
    }

    /// The generator ξ^μ (1-based).
    pub fn xi(n: usize, mu: usize) -> Result<Self> {
        check_index(n, mu)?;
        Ok(Self::monomial(n, 1 << (mu - 1), Complex64::new(1.0, 0.0)))
    }

    /// Ordered product ξ^{a_1}ξ^{a_2}... of the given indices.
    pub fn product_of(n: usize, idx: &[usize]) -> Result<Self> {
        let mut f = Self::constant(n, Complex64::new(1.0, 0.0));
        for &mu in idx {
            f = f.gmul(&Self::xi(n, mu)?)?;
        }
        Ok(f)
    }

    fn add_term(&mut self, m: u32, c: Complex64) {
        if c.re == 0.0 && c.im == 0.0 {
            return;
        }
        let e = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if e.re == 0.0 && e.im == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    pub fn coeff(&self, m: u32) -> Complex64 {
        self.terms.get(&m).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.n);
        for (m, c) in self.terms() {
            out.add_term(m, c * s);
        }
        out
    }

    /// Grassmann product.
    pub fn gmul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.n);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                if a & b == 0 {
                    out.add_term(a | b, sign(reorder_parity(a, b) == 1, ca * cb));
                }
            }
        }
        Ok(out)
    }

    /// Left derivative ∂/∂ξ^μ.
    pub fn d_left(&self, mu: usize) -> Result<Self> {
        check_index(self.n, mu)?;
        let bit = 1u32 << (mu - 1);
        let mut out = Self::zero(self.n);
        for (m, c) in self.terms() {
            if m & bit != 0 {
                let before = (m & (bit - 1)).count_ones();
                out.add_term(m ^ bit, sign(before % 2 == 1, c));
            }
        }
        Ok(out)
    }

    /// Right derivative f ∂←/∂ξ^μ.
    pub fn d_right(&self, mu: usize) -> Result<Self> {
        check_index(self.n, mu)?;
        let bit = 1u32 << (mu - 1);
        let mut out = Self::zero(self.n);
        for (m, c) in self.terms() {
            if m & bit != 0 {
                let after = (m & !(bit | (bit - 1))).count_ones();
                out.add_term(m ^ bit, sign(after % 2 == 1, c));
            }
        }
        Ok(out)
    }

    /// Coefficient-wise inner product Σ conj(f_A) g_A.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check(other)?;
        Ok(self.terms().map(|(m, c)| c.conj() * other.coeff(m)).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        let terms = self.terms().map(|(m, c)| TermJson { xi: indices(m), re: c.re, im: c.im }).collect();
        serde_json::to_string(&GrassmannJson { n: self.n, terms }).expect("serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: GrassmannJson = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
        if raw.n > MAX_GENERATORS {
            return Err(Error::Json(format!("n = {} exceeds {MAX_GENERATORS}", raw.n)));
        }
        let mut f = Self::zero(raw.n);
        for t in raw.terms {
            if t.xi.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Json("xi indices must be strictly ascending".into()));
            }
            let mut m = 0u32;
            for &i in &t.xi {
                check_index(raw.n, i).map_err(|e| Error::Json(e.to_string()))?;
                m |= 1 << (i - 1);
            }
            f.add_term(m, Complex64::new(t.re, t.im));
        }
        Ok(f)
    }
}

fn check_index(n: usize, mu: usize) -> Result<()> {
    if mu == 0 || mu > n {
        return Err(Error::IndexOutOfRange { index: mu, max: n });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    xi: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrassmannJson {
    n: usize,
    terms: Vec<TermJson>,
}

/// Product in the Grassmann algebra.
pub fn gmul(f: &GrassmannFunction, g: &GrassmannFunction) -> Result<GrassmannFunction> {
    f.gmul(g)
}

/// Left derivative ∂/∂ξ^μ.
pub fn d_xi(f: &GrassmannFunction, mu: usize) -> Result<GrassmannFunction> {
    f.d_left(mu)
}

/// ∫dξ^μ f, identical to the left derivative.
pub fn berezin(f: &GrassmannFunction, mu: usize) -> Result<GrassmannFunction> {
    f.d_left(mu)
}

/// ∫dξ^1...dξ^n f with the innermost integral (ξ^n) taken first.
pub fn integrate_all(f: &GrassmannFunction) -> Complex64 {
    let mut g = f.clone();
    for mu in (1..=f.n()).rev() {
        g = g.d_left(mu).expect("index in range");
    }
    g.coeff(0)
}

/// Linear operator on Grassmann functions.
#[derive(Debug, Clone, PartialEq)]
pub enum GrassmannOperator {
    Identity,
    MultiplyBy(usize),
    DeriveBy(usize),
    Scale(Complex64, Box<GrassmannOperator>),
    /// Product `ops[0] ∘ ops[1] ∘ ...`; the last entry acts first.
    Compose(Vec<GrassmannOperator>),
    Sum(Vec<GrassmannOperator>),
}

impl GrassmannOperator {
    pub fn scaled(self, c: Complex64) -> Self {
        GrassmannOperator::Scale(c, Box::new(self))
    }

    pub fn then(self, first: GrassmannOperator) -> Self {
        GrassmannOperator::Compose(vec![self, first])
    }

    pub fn anticommutator(a: &Self, b: &Self) -> Self {
        GrassmannOperator::Sum(vec![
            GrassmannOperator::Compose(vec![a.clone(), b.clone()]),
            GrassmannOperator::Compose(vec![b.clone(), a.clone()]),
        ])
    }

    pub fn commutator(a: &Self, b: &Self) -> Self {
        GrassmannOperator::Sum(vec![
            GrassmannOperator::Compose(vec![a.clone(), b.clone()]),
            GrassmannOperator::Compose(vec![b.clone(), a.clone()]).scaled(Complex64::new(-1.0, 0.0)),
        ])
    }

    pub fn apply(&self, f: &GrassmannFunction) -> Result<GrassmannFunction> {
        match self {
            GrassmannOperator::Identity => Ok(f.clone()),
            GrassmannOperator::MultiplyBy(mu) => GrassmannFunction::xi(f.n(), *mu)?.gmul(f),
            GrassmannOperator::DeriveBy(mu) => f.d_left(*mu),
            GrassmannOperator::Scale(c, op) => Ok(op.apply(f)?.scale(*c)),
            GrassmannOperator::Compose(ops) => {
                let mut g = f.clone();
                for op in ops.iter().rev() {
                    g = op.apply(&g)?;
                }
                Ok(g)
            }
            GrassmannOperator::Sum(ops) => {
                let mut acc = GrassmannFunction::zero(f.n());
                for op in ops {
                    acc = acc.add(&op.apply(f)?)?;
                }
                Ok(acc)
            }
        }
    }

    /// Matrix in the graded-lexicographic monomial basis.
    pub fn matrix(&self, n: usize) -> Result<CMatrix> {
        let basis = graded_lex_subsets(n);
        let pos = position_table(&basis);
        let mut m = CMatrix::zeros(basis.len(), basis.len());
        for (col, &b) in basis.iter().enumerate() {
            let img = self.apply(&GrassmannFunction::monomial(n, b, Complex64::new(1.0, 0.0)))?;
            for (mono, c) in img.terms() {
                m[(pos[mono as usize], col)] = c;
            }
        }
        Ok(m)
    }
}

fn position_table(basis: &[u32]) -> Vec<usize> {
    let mut pos = vec![0; basis.len()];
    for (k, &b) in basis.iter().enumerate() {
        pos[b as usize] = k;
    }
    pos
}

/// Representation of θ^μ as √2 ξ^μ.
pub fn rep_theta(mu: usize) -> GrassmannOperator {
    GrassmannOperator::MultiplyBy(mu).scaled(Complex64::new(std::f64::consts::SQRT_2, 0.0))
}

/// Representation of θ̄_μ as √2 ∂/∂ξ^μ.
pub fn rep_theta_bar(mu: usize) -> GrassmannOperator {
    GrassmannOperator::DeriveBy(mu).scaled(Complex64::new(std::f64::consts::SQRT_2, 0.0))
}

/// γ_μ = (θ + θ̄)/√2 represented as ξ^μ + ∂/∂ξ^μ.
pub fn rep_gamma(mu: usize) -> GrassmannOperator {
    GrassmannOperator::Sum(vec![GrassmannOperator::MultiplyBy(mu), GrassmannOperator::DeriveBy(mu)])
}

/// γ̄_μ = −i(θ − θ̄)/√2 represented as −i(ξ^μ − ∂/∂ξ^μ).
pub fn rep_gamma_bar(mu: usize) -> GrassmannOperator {
    GrassmannOperator::Sum(vec![
        GrassmannOperator::MultiplyBy(mu),
        GrassmannOperator::DeriveBy(mu).scaled(Complex64::new(-1.0, 0.0)),
    ])
    .scaled(Complex64::new(0.0, -1.0))
}

/// Taylor coefficients in graded-lexicographic order.
pub fn expand_components(f: &GrassmannFunction) -> Vec<Complex64> {
    graded_lex_subsets(f.n()).into_iter().map(|m| f.coeff(m)).collect()
}

/// Inverse of [`expand_components`].
pub fn from_components(n: usize, comps: &[Complex64]) -> Result<GrassmannFunction> {
    let basis = graded_lex_subsets(n);
    if comps.len() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), got: comps.len() });
    }
    let mut f = GrassmannFunction::zero(n);
    for (m, c) in basis.into_iter().zip(comps) {
        f.add_term(m, *c);
    }
    Ok(f)
}

/// Ω(ξ) = product of the unbarred ξ's, ascending.
pub fn vacuum_function(spec: &VacuumSpec) -> GrassmannFunction {
    GrassmannFunction::monomial(spec.n(), spec.unbarred_mask(), Complex64::new(1.0, 0.0))
}

/// poly · Ω(ξ).
pub fn state_on_vacuum(poly: &GrassmannFunction, spec: &VacuumSpec) -> Result<GrassmannFunction> {
    poly.gmul(&vacuum_function(spec))
}

/// Annihilators of Ω(ξ): ∂_μ for barred slots, ξ^μ for unbarred slots.
pub fn vacuum_annihilator(spec: &VacuumSpec, mu: usize) -> GrassmannOperator {
    match spec.flag(mu) {
        Flag::Barred => rep_theta_bar(mu),
        Flag::Unbarred => rep_theta(mu),
    }
}

/// Creators for slot μ with unit normalization: ξ^μ for barred, ∂_μ for unbarred.
pub fn unit_creator(spec: &VacuumSpec, mu: usize) -> GrassmannOperator {
    match spec.flag(mu) {
        Flag::Barred => GrassmannOperator::MultiplyBy(mu),
        Flag::Unbarred => GrassmannOperator::DeriveBy(mu),
    }
}

/// Map from ideal basis elements to monomials.
///
/// Element α (creator subset A, graded-lexicographic) corresponds to
/// `sign[α] · monomial[target[α]]`, where the monomials are also in
/// graded-lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignedPermutation {
    pub target: Vec<usize>,
    pub sign: Vec<i8>,
}

impl SignedPermutation {
    /// P with P e_α = sign[α] e_{target[α]}.
    pub fn matrix(&self) -> CMatrix {
        let d = self.target.len();
        let mut p = CMatrix::zeros(d, d);
        for (a, (&t, &s)) in self.target.iter().zip(&self.sign).enumerate() {
            p[(t, a)] = Complex64::new(s as f64, 0.0);
        }
        p
    }
}

/// Correspondence between the Unit-normalized ideal basis of `spec` and monomials.
///
/// `eta[μ-1]` is the sign of θ_μ·θ̄_μ. Barred slots are created by the lower
/// θ_μ = η_μμ θ^μ, which picks up that sign relative to ξ^μ.
pub fn ideal_correspondence(spec: &VacuumSpec, eta: &[i8]) -> Result<SignedPermutation> {
    let n = spec.n();
    if eta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: eta.len() });
    }
    let basis = graded_lex_subsets(n);
    let pos = position_table(&basis);
    let omega = vacuum_function(spec);
    let mut target = Vec::new();
    let mut sgn = Vec::new();
    for &a in &basis {
        let mut f = omega.clone();
        for mu in (1..=n).rev().filter(|mu| a >> (mu - 1) & 1 == 1) {
            f = unit_creator(spec, mu).apply(&f)?;
        }
        let (m, c) = f.terms().next().ok_or(Error::RankDeficient { rank: 0, expected: 1 })?;
        let metric_sign: i8 = (1..=n)
            .filter(|&mu| a >> (mu - 1) & 1 == 1 && spec.flag(mu) == Flag::Barred)
            .map(|mu| eta[mu - 1])
            .product();
        target.push(pos[m as usize]);
        sgn.push(if c.re > 0.0 { metric_sign } else { -metric_sign });
    }
    Ok(SignedPermutation { target, sign: sgn })
}

/// Grassmann Poisson bracket Σ (f ∂←_a) m^{ab} (∂→_b g).
pub fn grassmann_poisson(f: &GrassmannFunction, g: &GrassmannFunction, m: &CMatrix) -> Result<GrassmannFunction> {
    f.check(g)?;
    let n = f.n();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
    }
    let mut out = GrassmannFunction::zero(n);
    for a in 1..=n {
        let fa = f.d_right(a)?;
        if fa.is_zero() {
            continue;
        }
        for b in 1..=n {
            let w = m[(a - 1, b - 1)];
            if w.norm() == 0.0 {
                continue;
            }
            out = out.add(&fa.gmul(&g.d_left(b)?)?.scale(w))?;
        }
    }
    Ok(out)
}
