//! Orthogonal and symplectic Clifford-algebra quantization kernels.
//!
//! - [`blade`]: sparse multivectors in Cl(p,q).
//! - [`witt`]: Witt bases, vacua, minimal left ideals, matrix representations.
//! - [`grassmann`]: Grassmann functions and Berezin calculus.
//! - [`weyl`]: phase-space polynomials and truncated bosonic mode operators.
//! - [`dynamics`]: quadratic models, classical and Heisenberg flows.
//! - [`field`]: lattice field models, fermionic Fock spaces and vacua.

pub mod blade;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod field;
pub mod grassmann;
pub mod linalg;
pub mod weyl;
pub mod witt;

pub use error::{Error, Result};

/// Subsets of {1..n} as bitmasks in graded-lexicographic order:
/// by size, then lexicographically on the ascending index lists.
pub fn graded_lex_subsets(n: usize) -> Vec<u32> {
    let mut subsets: Vec<u32> = (0..1u32 << n).collect();
    subsets.sort_by_key(|&s| {
        let idx: Vec<u32> = (0..n as u32).filter(|k| s >> k & 1 == 1).collect();
        (s.count_ones(), idx)
    });
    subsets
}

#[cfg(test)]
mod tests {
    #[test]
    fn graded_lex() {
        assert_eq!(super::graded_lex_subsets(3), vec![0, 1, 2, 4, 3, 5, 6, 7]);
    }
}
