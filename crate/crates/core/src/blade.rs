//! Sparse multivectors in Cl(p,q) with a diagonal ±1 metric.
//!
//! Generators are numbered from 1. Indices `1..=p` square to `+1`, indices
//! `p+1..=p+q` square to `-1`. A basis blade is a bitset where bit `i-1`
//! marks generator `i`, always read in ascending order.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported p+q (blades are `u32` bitsets).
pub const MAX_DIM: usize = 32;

/// Metric signature (p, q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        let sig = Signature { p, q };
        sig.validate()?;
        Ok(sig)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p + self.q == 0 {
            return Err(Error::InvalidSignature { p: self.p, q: self.q, reason: "p+q must be at least 1" });
        }
        if self.p + self.q > MAX_DIM {
            return Err(Error::InvalidSignature { p: self.p, q: self.q, reason: "p+q exceeds 32" });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Number of basis blades, 2^(p+q).
    pub fn algebra_dim(&self) -> usize {
        1usize << self.dim()
    }

    /// Square of generator `i` (1-based).
    pub fn metric(&self, i: usize) -> i8 {
        if i <= self.p {
            1
        } else {
            -1
        }
    }

    /// Bitmask of the generators squaring to -1.
    pub fn negative_mask(&self) -> u32 {
        let all = if self.dim() == 32 { u32::MAX } else { (1u32 << self.dim()) - 1 };
        all & !((1u32 << self.p) - 1)
    }

    fn check(&self, other: &Signature) -> Result<()> {
        if self != other {
            return Err(Error::SignatureMismatch(self.p, self.q, other.p, other.q));
        }
        Ok(())
    }
}

/// Basis blade as a bitset of generator indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Blade(pub u32);

impl Blade {
    pub const SCALAR: Blade = Blade(0);

    /// Blade from 1-based generator indices. Repeated indices are rejected.
    pub fn from_indices(indices: &[usize]) -> Option<Blade> {
        let mut bits = 0u32;
        for &i in indices {
            if i == 0 || i > MAX_DIM {
                return None;
            }
            let b = 1u32 << (i - 1);
            if bits & b != 0 {
                return None;
            }
            bits |= b;
        }
        Some(Blade(bits))
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Ascending 1-based generator indices.
    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|k| self.0 >> k & 1 == 1).map(|k| k + 1).collect()
    }

    /// Sign of the reversion on this blade, (-1)^(r(r-1)/2).
    pub fn reversion_sign(self) -> i8 {
        let r = self.grade();
        if (r * r.saturating_sub(1) / 2).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

/// Number of transpositions needed to bring `a b` into ascending order, mod 2.
pub(crate) fn reorder_parity(a: u32, b: u32) -> u32 {
    let mut a = a >> 1;
    let mut swaps = 0u32;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    swaps & 1
}

/// Product of two basis blades: (negative?, resulting blade).
pub fn blade_product(sig: &Signature, a: Blade, b: Blade) -> (bool, Blade) {
    let mut odd = reorder_parity(a.0, b.0);
    odd += (a.0 & b.0 & sig.negative_mask()).count_ones();
    (odd & 1 == 1, Blade(a.0 ^ b.0))
}

/// Coefficient ring for multivectors.
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn conj(self) -> Self;
}

impl Scalar for Complex64 {
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
}

impl Scalar for Complex<i64> {
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
}

impl Scalar for i64 {
    fn conj(self) -> Self {
        self
    }
}

impl Scalar for f64 {
    fn conj(self) -> Self {
        self
    }
}

/// Immutable algebra context exposing the generators of Cl(p,q).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraContext {
    sig: Signature,
}

impl AlgebraContext {
    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    pub fn algebra_dim(&self) -> usize {
        self.sig.algebra_dim()
    }

    /// Generator γ_i (1-based).
    pub fn generator<T: Scalar>(&self, i: usize) -> Result<Multivector<T>> {
        Multivector::generator(self.sig, i)
    }

    pub fn generators<T: Scalar>(&self) -> Vec<Multivector<T>> {
        (1..=self.dim()).map(|i| Multivector::generator(self.sig, i).expect("index in range")).collect()
    }

    pub fn one<T: Scalar>(&self) -> Multivector<T> {
        Multivector::scalar(self.sig, T::one())
    }

    pub fn zero<T: Scalar>(&self) -> Multivector<T> {
        Multivector::zero(self.sig)
    }
}

/// Build the context for a signature. Rejects p+q = 0 and p+q > 32.
pub fn make_algebra(sig: Signature) -> Result<AlgebraContext> {
    sig.validate()?;
    Ok(AlgebraContext { sig })
}

/// Sparse multivector. Exact zeros are never stored.
#[derive(Clone, PartialEq)]
pub struct Multivector<T: Scalar = Complex64> {
    sig: Signature,
    terms: BTreeMap<Blade, T>,
}

impl<T: Scalar> fmt::Debug for Multivector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cl({},{})[", self.sig.p, self.sig.q)?;
        for (i, (b, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}·e{:?}", c, b.indices())?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Multivector<T> {
    pub fn zero(sig: Signature) -> Self {
        Multivector { sig, terms: BTreeMap::new() }
    }

    pub fn scalar(sig: Signature, c: T) -> Self {
        Self::from_terms(sig, [(Blade::SCALAR, c)])
    }

    pub fn generator(sig: Signature, i: usize) -> Result<Self> {
        if i == 0 || i > sig.dim() {
            return Err(Error::IndexOutOfRange { index: i, max: sig.dim() });
        }
        Ok(Self::from_terms(sig, [(Blade(1 << (i - 1)), T::one())]))
    }

    pub fn blade(sig: Signature, blade: Blade, c: T) -> Self {
        Self::from_terms(sig, [(blade, c)])
    }

    /// Sum of terms; repeated blades accumulate.
    pub fn from_terms<I: IntoIterator<Item = (Blade, T)>>(sig: Signature, terms: I) -> Self {
        let mut mv = Multivector::zero(sig);
        for (b, c) in terms {
            mv.add_term(b, c);
        }
        mv
    }

    fn add_term(&mut self, b: Blade, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(v) => {
                *v = *v + c;
                if v.is_zero() {
                    self.terms.remove(&b);
                }
            }
            None => {
                self.terms.insert(b, c);
            }
        }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, T)> + '_ {
        self.terms.iter().map(|(b, c)| (*b, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, b: Blade) -> T {
        self.terms.get(&b).copied().unwrap_or_else(T::zero)
    }

    pub fn scalar_part(&self) -> T {
        self.coeff(Blade::SCALAR)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Multivector<U> {
        Multivector::from_terms(self.sig, self.terms().map(|(b, c)| (b, f(c))))
    }

    pub fn scale(&self, s: T) -> Self {
        Multivector::from_terms(self.sig, self.terms().map(|(b, c)| (b, c * s)))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.sig.check(&other.sig)?;
        let mut out = self.clone();
        for (b, c) in other.terms() {
            out.add_term(b, c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.sig.check(&other.sig)?;
        let mut out = self.clone();
        for (b, c) in other.terms() {
            out.add_term(b, -c);
        }
        Ok(out)
    }

    /// Geometric product.
    pub fn gp(&self, other: &Self) -> Result<Self> {
        self.sig.check(&other.sig)?;
        let mut out = Multivector::zero(self.sig);
        for (&ba, &ca) in &self.terms {
            for (&bb, &cb) in &other.terms {
                let (neg, b) = blade_product(&self.sig, ba, bb);
                let c = ca * cb;
                out.add_term(b, if neg { -c } else { c });
            }
        }
        Ok(out)
    }

    pub fn grade_project(&self, k: usize) -> Self {
        Multivector::from_terms(self.sig, self.terms().filter(|(b, _)| b.grade() == k))
    }

    /// Reversion combined with complex conjugation.
    pub fn dagger(&self) -> Self {
        Multivector::from_terms(
            self.sig,
            self.terms().map(|(b, c)| (b, if b.reversion_sign() < 0 { -c.conj() } else { c.conj() })),
        )
    }

    /// Reversion without conjugation.
    pub fn reverse(&self) -> Self {
        Multivector::from_terms(self.sig, self.terms().map(|(b, c)| (b, if b.reversion_sign() < 0 { -c } else { c })))
    }

    /// `scalar_part(dagger(self) * other)` without forming the product.
    pub fn scalar_product(&self, other: &Self) -> Result<T> {
        self.sig.check(&other.sig)?;
        let neg = self.sig.negative_mask();
        let (small, large, swap) =
            if self.terms.len() <= other.terms.len() { (self, other, false) } else { (other, self, true) };
        let mut acc = T::zero();
        for (&b, &c) in &small.terms {
            if let Some(&d) = large.terms.get(&b) {
                let t = if swap { d.conj() * c } else { c.conj() * d };
                acc = if (b.0 & neg).count_ones() % 2 == 1 { acc - t } else { acc + t };
            }
        }
        Ok(acc)
    }
}

impl Multivector<Complex64> {
    /// Symmetric part (ab + ba)/2.
    pub fn dot(&self, other: &Self) -> Result<Self> {
        let ab = self.gp(other)?;
        let ba = other.gp(self)?;
        Ok(ab.try_add(&ba)?.scale(Complex64::new(0.5, 0.0)))
    }

    /// Antisymmetric part (ab - ba)/2.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let ab = self.gp(other)?;
        let ba = other.gp(self)?;
        Ok(ab.try_sub(&ba)?.scale(Complex64::new(0.5, 0.0)))
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference against `other`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.max_abs())
    }

    /// Drop coefficients with modulus at or below `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Multivector::from_terms(self.sig, self.terms().filter(|(_, c)| c.norm() > tol))
    }

    /// Dense coordinates indexed by blade bits.
    pub fn to_dense(&self) -> nalgebra::DVector<Complex64> {
        let mut v = nalgebra::DVector::zeros(self.sig.algebra_dim());
        for (b, c) in self.terms() {
            v[b.0 as usize] = c;
        }
        v
    }

    pub fn from_dense(sig: Signature, v: &nalgebra::DVector<Complex64>) -> Self {
        Multivector::from_terms(sig, v.iter().enumerate().map(|(i, c)| (Blade(i as u32), *c)))
    }
}

impl Multivector<Complex<i64>> {
    pub fn to_complex64(&self) -> Multivector<Complex64> {
        self.map(|c| Complex64::new(c.re as f64, c.im as f64))
    }
}

impl<T: Scalar> Add for &Multivector<T> {
    type Output = Multivector<T>;
    /// Panics on signature mismatch; use [`Multivector::try_add`] for a checked sum.
    fn add(self, rhs: Self) -> Multivector<T> {
        self.try_add(rhs).expect("signature mismatch")
    }
}

impl<T: Scalar> Sub for &Multivector<T> {
    type Output = Multivector<T>;
    fn sub(self, rhs: Self) -> Multivector<T> {
        self.try_sub(rhs).expect("signature mismatch")
    }
}

impl<T: Scalar> Mul for &Multivector<T> {
    type Output = Multivector<T>;
    /// Panics on signature mismatch; use [`Multivector::gp`] for a checked product.
    fn mul(self, rhs: Self) -> Multivector<T> {
        self.gp(rhs).expect("signature mismatch")
    }
}

impl<T: Scalar> Neg for &Multivector<T> {
    type Output = Multivector<T>;
    fn neg(self) -> Multivector<T> {
        self.map(|c| -c)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    blades: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MultivectorJson {
    sig: [usize; 2],
    terms: Vec<TermJson>,
}

impl Serialize for Multivector<Complex64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut terms: Vec<TermJson> =
            self.terms().map(|(b, c)| TermJson { blades: b.indices(), re: c.re, im: c.im }).collect();
        terms.sort_by(|a, b| a.blades.cmp(&b.blades));
        MultivectorJson { sig: [self.sig.p, self.sig.q], terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Multivector<Complex64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MultivectorJson::deserialize(d)?;
        let sig = Signature::new(raw.sig[0], raw.sig[1]).map_err(D::Error::custom)?;
        let mut mv = Multivector::zero(sig);
        for t in raw.terms {
            if t.blades.windows(2).any(|w| w[0] >= w[1]) {
                return Err(D::Error::custom("blade indices must be strictly ascending"));
            }
            if t.blades.iter().any(|&i| i == 0 || i > sig.dim()) {
                return Err(D::Error::custom("blade index out of range"));
            }
            let b = Blade::from_indices(&t.blades).ok_or_else(|| D::Error::custom("invalid blade"))?;
            mv.add_term(b, Complex64::new(t.re, t.im));
        }
        Ok(mv)
    }
}

impl Multivector<Complex64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("multivector serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))
    }
}

/// Shorthand for a complex number.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
