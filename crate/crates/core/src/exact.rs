//! Exact arithmetic for rank and coordinate checks on Gaussian-integer data.
//!
//! Ranks are computed over prime fields F_p with p ≡ 1 (mod 4), where
//! i maps to a square root of -1. A rank found modulo p never exceeds the
//! rank over Q(i), and taking the maximum over several primes makes a
//! spurious drop vanishingly unlikely. Small systems are solved over the
//! Gaussian rationals with overflow-checked i128 arithmetic.

use num_complex::Complex;
use num_integer::Integer;

use crate::error::{Error, Result};

pub type GaussInt = Complex<i64>;

struct PrimeField {
    p: u64,
    i: u64,
}

const PRIMES: [PrimeField; 2] =
    [PrimeField { p: 998_244_353, i: 911_660_635 }, PrimeField { p: 469_762_049, i: 450_151_958 }];

impl PrimeField {
    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    fn embed(&self, z: GaussInt) -> u64 {
        (self.reduce(z.re) + self.mul(self.reduce(z.im), self.i)) % self.p
    }

    fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }

    fn rank(&self, rows: &[Vec<GaussInt>]) -> usize {
        let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&z| self.embed(z)).collect()).collect();
        let ncols = m.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for col in 0..ncols {
            let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else { continue };
            m.swap(rank, piv);
            let inv = self.inv(m[rank][col]);
            for r in 0..m.len() {
                if r != rank && m[r][col] != 0 {
                    let f = self.mul(m[r][col], inv);
                    for c in col..ncols {
                        let sub = self.mul(f, m[rank][c]);
                        m[r][c] = (m[r][c] + self.p - sub) % self.p;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Exact rank of a Gaussian-integer matrix given as rows.
pub fn rank_gaussian(rows: &[Vec<GaussInt>]) -> usize {
    PRIMES.iter().map(|f| f.rank(rows)).max().unwrap_or(0)
}

/// Exact rank of an integer matrix given as rows.
pub fn rank_integer(rows: &[Vec<i64>]) -> usize {
    let g: Vec<Vec<GaussInt>> = rows.iter().map(|r| r.iter().map(|&x| GaussInt::new(x, 0)).collect()).collect();
    rank_gaussian(&g)
}

/// Gaussian rational (re + i·im)/den with den > 0 and reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussRational {
    pub re: i128,
    pub im: i128,
    pub den: i128,
}

fn overflow() -> Error {
    Error::ResourceCap("exact arithmetic overflow".into())
}

impl GaussRational {
    pub const ZERO: GaussRational = GaussRational { re: 0, im: 0, den: 1 };
    pub const ONE: GaussRational = GaussRational { re: 1, im: 0, den: 1 };

    pub fn from_int(z: GaussInt) -> Self {
        GaussRational { re: z.re as i128, im: z.im as i128, den: 1 }
    }

    fn normalized(re: i128, im: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::Singular("division by zero"));
        }
        let g = re.gcd(&im).gcd(&den);
        let s = if den < 0 { -1 } else { 1 };
        Ok(GaussRational { re: s * re / g, im: s * im / g, den: s * den / g })
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let re = self.re.checked_mul(o.den).and_then(|a| o.re.checked_mul(self.den).and_then(|b| a.checked_add(b)));
        let im = self.im.checked_mul(o.den).and_then(|a| o.im.checked_mul(self.den).and_then(|b| a.checked_add(b)));
        let den = self.den.checked_mul(o.den);
        match (re, im, den) {
            (Some(re), Some(im), Some(den)) => Self::normalized(re, im, den),
            _ => Err(overflow()),
        }
    }

    pub fn neg(&self) -> Self {
        GaussRational { re: -self.re, im: -self.im, den: self.den }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let m = |a: i128, b: i128| a.checked_mul(b);
        let re = m(self.re, o.re).zip(m(self.im, o.im)).and_then(|(a, b)| a.checked_sub(b));
        let im = m(self.re, o.im).zip(m(self.im, o.re)).and_then(|(a, b)| a.checked_add(b));
        match (re, im, m(self.den, o.den)) {
            (Some(re), Some(im), Some(den)) => Self::normalized(re, im, den),
            _ => Err(overflow()),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        let n2 = self
            .re
            .checked_mul(self.re)
            .zip(self.im.checked_mul(self.im))
            .and_then(|(a, b)| a.checked_add(b))
            .ok_or_else(overflow)?;
        if n2 == 0 {
            return Err(Error::Singular("division by zero"));
        }
        // den/(re + i im) = den (re - i im)/n2
        let re = self.den.checked_mul(self.re).ok_or_else(overflow)?;
        let im = self.den.checked_mul(-self.im).ok_or_else(overflow)?;
        Self::normalized(re, im, n2)
    }

    /// Value as a Gaussian integer when the denominator is 1.
    pub fn as_gauss_int(&self) -> Option<GaussInt> {
        (self.den == 1).then(|| GaussInt::new(self.re as i64, self.im as i64))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re as f64 / self.den as f64, self.im as f64 / self.den as f64)
    }
}

/// Solve `A x = b` exactly where the columns of `A` are `cols` (each of length m).
/// Requires the columns to be independent; returns an error if `b` is not in their span.
pub fn solve_columns(cols: &[Vec<GaussInt>], b: &[GaussInt]) -> Result<Vec<GaussRational>> {
    let k = cols.len();
    let m = b.len();
    if cols.iter().any(|c| c.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: cols.iter().map(|c| c.len()).find(|&l| l != m).unwrap_or(0) });
    }
    // augmented rows [A | b], restricted to rows that are nonzero somewhere
    let mut rows: Vec<Vec<GaussRational>> = (0..m)
        .filter(|&r| b[r] != GaussInt::new(0, 0) || cols.iter().any(|c| c[r] != GaussInt::new(0, 0)))
        .map(|r| {
            let mut row: Vec<GaussRational> = cols.iter().map(|c| GaussRational::from_int(c[r])).collect();
            row.push(GaussRational::from_int(b[r]));
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..k {
        let Some(piv) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            return Err(Error::RankDeficient { rank: pivot_row, expected: k });
        };
        rows.swap(pivot_row, piv);
        let inv = rows[pivot_row][col].inv()?;
        for c in col..=k {
            rows[pivot_row][c] = rows[pivot_row][c].mul(&inv)?;
        }
        for r in 0..rows.len() {
            if r != pivot_row && !rows[r][col].is_zero() {
                let f = rows[r][col];
                for c in col..=k {
                    let t = f.mul(&rows[pivot_row][c])?;
                    rows[r][c] = rows[r][c].sub(&t)?;
                }
            }
        }
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|r| !r[k].is_zero()) {
        return Err(Error::InvalidParameter("right-hand side outside the column span".into()));
    }
    Ok((0..k).map(|i| rows[i][k]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gi(re: i64, im: i64) -> GaussInt {
        GaussInt::new(re, im)
    }

    #[test]
    fn sqrt_minus_one() {
        for f in &PRIMES {
            assert_eq!(f.mul(f.i, f.i), f.p - 1);
        }
    }

    #[test]
    fn ranks() {
        assert_eq!(rank_integer(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(rank_integer(&[vec![1, 0], vec![0, 1]]), 2);
        // rows (1, i) and (i, -1) are proportional over Q(i)
        assert_eq!(rank_gaussian(&[vec![gi(1, 0), gi(0, 1)], vec![gi(0, 1), gi(-1, 0)]]), 1);
        assert_eq!(rank_gaussian(&[vec![gi(1, 0), gi(0, 1)], vec![gi(0, 1), gi(1, 0)]]), 2);
    }

    #[test]
    fn solve_small() {
        let cols = vec![vec![gi(1, 0), gi(0, 1), gi(0, 0)], vec![gi(0, 0), gi(2, 0), gi(1, 0)]];
        let b = vec![gi(3, 0), gi(2, 3), gi(1, 0)];
        let x = solve_columns(&cols, &b).unwrap();
        assert_eq!(x[0], GaussRational::from_int(gi(3, 0)));
        assert_eq!(x[1], GaussRational::ONE);
        let half = solve_columns(&[vec![gi(2, 0)]], &[gi(1, 0)]).unwrap();
        assert_eq!(half[0], GaussRational { re: 1, im: 0, den: 2 });
        assert!(solve_columns(&cols, &[gi(0, 0), gi(0, 0), gi(5, 0)]).is_err());
    }
}
