//! Phase-space polynomials, the Poisson bracket, and truncated bosonic mode
//! operators realizing the symplectic Clifford algebra.
//!
//! Phase-space coordinates are z = (x^1..x^n, p^1..p^n). The Poisson tensor is
//! Π^{ab} = [[0, g], [−g, 0]], so that {x^μ, p^ν} = g^{μν}.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Polynomial in commuting phase-space variables.
#[derive(Clone, PartialEq)]
pub struct PhasePolynomial {
    n: usize,
    terms: BTreeMap<Vec<u16>, Complex64>,
}

impl fmt::Debug for PhasePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}{:?}", self.n, self.terms)
    }
}

impl PhasePolynomial {
    pub fn zero(n: usize) -> Self {
        PhasePolynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self::monomial(n, vec![0; 2 * n], c)
    }

    pub fn monomial(n: usize, exps: Vec<u16>, c: Complex64) -> Self {
        assert_eq!(exps.len(), 2 * n, "exponent vector length");
        let mut p = Self::zero(n);
        p.add_term(exps, c);
        p
    }

    /// Coordinate z^a, a = 0..2n.
    pub fn var(n: usize, a: usize) -> Result<Self> {
        if a >= 2 * n {
            return Err(Error::IndexOutOfRange { index: a, max: 2 * n - 1 });
        }
        let mut e = vec![0; 2 * n];
        e[a] = 1;
        Ok(Self::monomial(n, e, Complex64::new(1.0, 0.0)))
    }

    /// x^μ, μ = 1..n.
    pub fn x(n: usize, mu: usize) -> Result<Self> {
        if mu == 0 || mu > n {
            return Err(Error::IndexOutOfRange { index: mu, max: n });
        }
        Self::var(n, mu - 1)
    }

    /// p^μ, μ = 1..n.
    pub fn p(n: usize, mu: usize) -> Result<Self> {
        if mu == 0 || mu > n {
            return Err(Error::IndexOutOfRange { index: mu, max: n });
        }
        Self::var(n, n + mu - 1)
    }

    fn add_term(&mut self, e: Vec<u16>, c: Complex64) {
        if c.re == 0.0 && c.im == 0.0 {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.re == 0.0 && entry.im == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], Complex64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().map(|&k| k as usize).sum()).max().unwrap_or(0)
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: o.n });
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = self.clone();
        for (e, c) in o.terms() {
            out.add_term(e.to_vec(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in self.terms() {
            out.add_term(e.to_vec(), c * s);
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = Self::zero(self.n);
        for (ea, ca) in self.terms() {
            for (eb, cb) in o.terms() {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    /// ∂/∂z^a.
    pub fn derivative(&self, a: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in self.terms() {
            if e[a] > 0 {
                let mut e2 = e.to_vec();
                e2[a] -= 1;
                out.add_term(e2, c * e[a] as f64);
            }
        }
        out
    }

    /// Largest coefficient difference.
    pub fn distance(&self, o: &Self) -> Result<f64> {
        Ok(self.sub(o)?.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max))
    }
}

/// Symplectic form with a diagonal metric block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticForm {
    metric: Vec<i8>,
}

impl SymplecticForm {
    pub fn new(metric: Vec<i8>) -> Result<Self> {
        if metric.is_empty() || metric.iter().any(|&g| g != 1 && g != -1) {
            return Err(Error::InvalidParameter("metric must be a non-empty list of ±1".into()));
        }
        Ok(SymplecticForm { metric })
    }

    pub fn euclidean(n: usize) -> Self {
        SymplecticForm { metric: vec![1; n.max(1)] }
    }

    /// η = diag(+1, −1, ..., −1).
    pub fn minkowski(n: usize) -> Self {
        let mut m = vec![-1; n.max(1)];
        m[0] = 1;
        SymplecticForm { metric: m }
    }

    pub fn n(&self) -> usize {
        self.metric.len()
    }

    pub fn metric(&self) -> &[i8] {
        &self.metric
    }

    /// J_ab = [[0, g], [−g, 0]].
    pub fn j(&self) -> CMatrix {
        let n = self.n();
        let mut j = CMatrix::zeros(2 * n, 2 * n);
        for (mu, &g) in self.metric.iter().enumerate() {
            j[(mu, n + mu)] = Complex64::new(g as f64, 0.0);
            j[(n + mu, mu)] = Complex64::new(-g as f64, 0.0);
        }
        j
    }

    /// Poisson tensor Π^{ab}; numerically equal to J_ab for a ±1 metric.
    pub fn poisson_tensor(&self) -> CMatrix {
        self.j()
    }

    /// J^{-1} = −J.
    pub fn j_inverse(&self) -> CMatrix {
        -self.j()
    }
}

/// {f, g} = ∂_a f Π^{ab} ∂_b g.
pub fn poisson(f: &PhasePolynomial, g: &PhasePolynomial, form: &SymplecticForm) -> Result<PhasePolynomial> {
    f.check(g)?;
    if form.n() != f.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), got: form.n() });
    }
    let n = f.n();
    let mut out = PhasePolynomial::zero(n);
    for (mu, &gm) in form.metric().iter().enumerate() {
        let s = Complex64::new(gm as f64, 0.0);
        let t1 = f.derivative(mu).mul(&g.derivative(n + mu))?;
        let t2 = f.derivative(n + mu).mul(&g.derivative(mu))?;
        out = out.add(&t1.sub(&t2)?.scale(s))?;
    }
    Ok(out)
}

/// Which constant multiplies the classical bracket in ½[f̂, ĝ].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// P = a† − a; ½[X, P] = g.
    Raw,
    /// P = i(a† − a), Hermitian; ½[X, P] = i·g.
    Hermitian,
}

impl Convention {
    pub fn constant(self) -> Complex64 {
        match self {
            Convention::Raw => Complex64::new(1.0, 0.0),
            Convention::Hermitian => Complex64::new(0.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Raw => "raw",
            Convention::Hermitian => "hermitian",
        }
    }
}

/// Largest Hilbert-space dimension accepted for mode operators.
pub const MAX_MODE_DIM: usize = 4096;

/// Truncated mode operators X^μ, P^μ on ⊗(N+1)-dimensional number spaces.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub form: SymplecticForm,
    pub cutoff: usize,
    pub convention: Convention,
    pub x: Vec<CMatrix>,
    pub p: Vec<CMatrix>,
    safe: Vec<usize>,
    /// Single-mode X and P (before the metric sign).
    x1: CMatrix,
    p1: CMatrix,
}

fn lowering(cutoff: usize) -> CMatrix {
    let d = cutoff + 1;
    let mut a = CMatrix::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    a
}

fn embed(single: &CMatrix, mode: usize, n: usize) -> CMatrix {
    embed_many(&[(mode, single)], n)
}

/// Tensor product placing each given single-mode operator on its mode.
fn embed_many(factors: &[(usize, &CMatrix)], n: usize) -> CMatrix {
    let d = factors[0].1.nrows();
    let mut out = CMatrix::identity(1, 1);
    for k in 0..n {
        out = match factors.iter().find(|(m, _)| *m == k) {
            Some((_, single)) => linalg::kron(&out, single),
            None => linalg::kron(&out, &linalg::identity(d)),
        };
    }
    out
}

/// Build X^μ = a_μ + a_μ† and P^μ = g^{μμ}·(a_μ† − a_μ) (times i for Hermitian).
pub fn mode_ops(form: &SymplecticForm, cutoff: usize, convention: Convention) -> Result<ModeOperators> {
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall(cutoff));
    }
    let n = form.n();
    let d = cutoff + 1;
    let total = d.checked_pow(n as u32).filter(|&t| t <= MAX_MODE_DIM).ok_or_else(|| {
        Error::ResourceCap(format!("mode space ({d})^{n} exceeds {MAX_MODE_DIM} states"))
    })?;
    let a = lowering(cutoff);
    let ad = a.adjoint();
    let x1 = &a + &ad;
    let p1 = match convention {
        Convention::Raw => &ad - &a,
        Convention::Hermitian => (&ad - &a) * Complex64::new(0.0, 1.0),
    };
    let mut x = Vec::new();
    let mut p = Vec::new();
    for (mu, &g) in form.metric().iter().enumerate() {
        x.push(embed(&x1, mu, n));
        p.push(embed(&p1, mu, n) * Complex64::new(g as f64, 0.0));
    }
    let safe = (0..total)
        .filter(|&idx| {
            let mut r = idx;
            (0..n).all(|_| {
                let occ = r % d;
                r /= d;
                occ + 2 <= cutoff
            })
        })
        .collect();
    Ok(ModeOperators { form: form.clone(), cutoff, convention, x, p, safe, x1, p1 })
}

impl ModeOperators {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn dim(&self) -> usize {
        self.x[0].nrows()
    }

    /// Basis indices with every occupation ≤ cutoff − 2.
    pub fn safe_indices(&self) -> &[usize] {
        &self.safe
    }

    pub fn safe_dim(&self) -> usize {
        self.safe.len()
    }

    /// Ẑ^a = (X^1..X^n, P^1..P^n).
    pub fn z(&self, a: usize) -> &CMatrix {
        let n = self.n();
        if a < n {
            &self.x[a]
        } else {
            &self.p[a - n]
        }
    }

    /// Single-mode factor of Ẑ^a, with its mode index.
    fn single(&self, a: usize) -> (usize, CMatrix) {
        let n = self.n();
        if a < n {
            (a, self.x1.clone())
        } else {
            (a - n, &self.p1 * Complex64::new(self.form.metric()[a - n] as f64, 0.0))
        }
    }

    /// Ẑ^a Ẑ^b, assembled from single-mode factors.
    pub fn product(&self, a: usize, b: usize) -> CMatrix {
        let (ma, sa) = self.single(a);
        let (mb, sb) = self.single(b);
        if ma == mb {
            embed(&(sa * sb), ma, self.n())
        } else {
            embed_many(&[(ma, &sa), (mb, &sb)], self.n())
        }
    }

    /// Restriction of `m` to the safe block.
    pub fn restrict(&self, m: &CMatrix) -> CMatrix {
        let s = &self.safe;
        CMatrix::from_fn(s.len(), s.len(), |i, j| m[(s[i], s[j])])
    }

    pub fn safe_deviation(&self, a: &CMatrix, b: &CMatrix) -> f64 {
        self.safe
            .iter()
            .flat_map(|&i| self.safe.iter().map(move |&j| (i, j)))
            .map(|(i, j)| (a[(i, j)] - b[(i, j)]).norm())
            .fold(0.0, f64::max)
    }

    /// Weyl-ordered operator of a polynomial of degree ≤ 2.
    pub fn weyl_operator(&self, f: &PhasePolynomial) -> Result<CMatrix> {
        if f.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: f.n() });
        }
        let deg = f.degree();
        if deg > 2 {
            return Err(Error::DegreeTooHigh(deg));
        }
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (e, c) in f.terms() {
            let vars: Vec<usize> = e.iter().enumerate().flat_map(|(a, &k)| std::iter::repeat_n(a, k as usize)).collect();
            let op = match vars.as_slice() {
                [] => linalg::identity(d),
                [a] => self.z(*a).clone(),
                [a, b] if a == b => self.product(*a, *a),
                [a, b] => (self.product(*a, *b) + self.product(*b, *a)) * Complex64::new(0.5, 0.0),
                _ => unreachable!("degree checked"),
            };
            out += op * c;
        }
        Ok(out)
    }

    /// max over a, b of |½[Ẑ^a, Ẑ^b] − c·Π^{ab}| on the safe block.
    pub fn canonical_deviation(&self) -> f64 {
        let pi = self.form.poisson_tensor();
        let c = self.convention.constant();
        let id = linalg::identity(self.dim());
        let mut worst: f64 = 0.0;
        for a in 0..2 * self.n() {
            for b in 0..2 * self.n() {
                let lhs = (self.product(a, b) - self.product(b, a)) * Complex64::new(0.5, 0.0);
                let rhs = &id * (c * pi[(a, b)]);
                worst = worst.max(self.safe_deviation(&lhs, &rhs));
            }
        }
        worst
    }
}

/// Result of comparing a classical bracket against an operator commutator.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BracketReport {
    pub check: String,
    pub convention: Convention,
    pub max_abs_deviation: f64,
    pub safe_dim: usize,
    /// Constant c in ½[f̂, ĝ] = c·Weyl({f, g}), as (re, im).
    pub constant: (f64, f64),
}

/// Compare ½[f̂, ĝ] with c·Weyl({f, g}) on the safe subspace.
pub fn bracket_correspondence(
    f: &PhasePolynomial,
    g: &PhasePolynomial,
    form: &SymplecticForm,
    cutoff: usize,
    convention: Convention,
) -> Result<BracketReport> {
    let ops = mode_ops(form, cutoff, convention)?;
    bracket_correspondence_with(f, g, &ops)
}

pub fn bracket_correspondence_with(f: &PhasePolynomial, g: &PhasePolynomial, ops: &ModeOperators) -> Result<BracketReport> {
    for h in [f, g] {
        if h.degree() > 2 {
            return Err(Error::DegreeTooHigh(h.degree()));
        }
    }
    let fh = ops.weyl_operator(f)?;
    let gh = ops.weyl_operator(g)?;
    let lhs = linalg::commutator(&fh, &gh) * Complex64::new(0.5, 0.0);
    let pb = poisson(f, g, &ops.form)?;
    let rhs = ops.weyl_operator(&pb)? * ops.convention.constant();
    let c = ops.convention.constant();
    Ok(BracketReport {
        check: "bracket_correspondence".into(),
        convention: ops.convention,
        max_abs_deviation: ops.safe_deviation(&lhs, &rhs),
        safe_dim: ops.safe_dim(),
        constant: (c.re, c.im),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn basic_brackets() {
        let form = SymplecticForm::minkowski(2);
        let x1 = PhasePolynomial::x(2, 1).unwrap();
        let x2 = PhasePolynomial::x(2, 2).unwrap();
        let p1 = PhasePolynomial::p(2, 1).unwrap();
        let p2 = PhasePolynomial::p(2, 2).unwrap();
        assert_eq!(poisson(&x1, &p1, &form).unwrap(), PhasePolynomial::constant(2, one()));
        assert_eq!(poisson(&x2, &p2, &form).unwrap(), PhasePolynomial::constant(2, -one()));
        assert!(poisson(&x1, &x2, &form).unwrap().is_zero());
        let e = SymplecticForm::euclidean(1);
        let x = PhasePolynomial::x(1, 1).unwrap();
        let p = PhasePolynomial::p(1, 1).unwrap();
        let x2 = x.mul(&x).unwrap();
        assert_eq!(poisson(&x2, &p, &e).unwrap(), x.scale(Complex64::new(2.0, 0.0)));
    }

    #[test]
    fn form_inverse() {
        let f = SymplecticForm::minkowski(3);
        assert!(linalg::max_diff(&(f.j() * f.j_inverse()), &linalg::identity(6)) == 0.0);
        assert!(linalg::max_diff(&f.j().transpose(), &(-f.j())) == 0.0);
    }

    #[test]
    fn single_mode_commutator() {
        for conv in [Convention::Raw, Convention::Hermitian] {
            let ops = mode_ops(&SymplecticForm::euclidean(1), 8, conv).unwrap();
            assert_eq!(ops.safe_dim(), 7);
            let comm = linalg::commutator(&ops.x[0], &ops.p[0]) * Complex64::new(0.5, 0.0);
            let want = linalg::identity(9) * conv.constant();
            let diff = &comm - &want;
            for i in 0..9 {
                for j in 0..9 {
                    let bad = diff[(i, j)].norm() > 1e-12;
                    assert_eq!(bad, i == 8 && j == 8, "defect at ({i},{j})");
                }
            }
            assert_eq!(linalg::max_abs(&linalg::commutator(&ops.x[0], &ops.x[0])), 0.0);
            assert!(ops.canonical_deviation() < 1e-12);
        }
        assert!(mode_ops(&SymplecticForm::euclidean(1), 1, Convention::Raw).is_err());
    }

    #[test]
    fn quadratic_correspondence() {
        let form = SymplecticForm::euclidean(1);
        let x = PhasePolynomial::x(1, 1).unwrap();
        let p = PhasePolynomial::p(1, 1).unwrap();
        let r = bracket_correspondence(&x.mul(&x).unwrap(), &p.mul(&p).unwrap(), &form, 10, Convention::Raw).unwrap();
        assert!(r.max_abs_deviation < 1e-10, "{r:?}");
        let r = bracket_correspondence(&x, &p, &form, 10, Convention::Hermitian).unwrap();
        assert!(r.max_abs_deviation < 1e-12);
        let cubic = x.mul(&x).unwrap().mul(&x).unwrap();
        assert!(matches!(bracket_correspondence(&cubic, &p, &form, 10, Convention::Raw), Err(Error::DegreeTooHigh(3))));
    }
}
