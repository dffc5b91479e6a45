//! Named example instances and seeded random generators.
//!
//! Everything here is deterministic: random constructions take an explicit
//! seed and use a fixed counter-based stream, so the same call always
//! produces the same instance.

use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exactmat::{basis_vec, outer, ComplexRational, Matrix, Rational};
use crate::qstate::{Budm, CpOperator, PairFamily};

/// The weight-1/2 skew-generator map on M(3): doubly stochastic and
/// entangled, with vanishing quantum permanent.
///
/// Kraus matrices are the three elementary skew-symmetric generators
/// A_(i,j) = e_i e_j^dagger - e_j e_i^dagger for i < j, each carrying
/// weight 1/2; that normalization gives T(I) = T*(I) = I exactly.
pub fn sk3() -> CpOperator {
    let half = Rational::new(1.into(), 2.into());
    let mut kraus = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let a = outer(&basis_vec(3, i), &basis_vec(3, j))
                .sub(&outer(&basis_vec(3, j), &basis_vec(3, i)))
                .expect("same shape");
            kraus.push((half.clone(), a));
        }
    }
    CpOperator::new(3, kraus).expect("well-formed kraus list")
}

/// The identity map X -> X.
pub fn identity_map(n: usize) -> CpOperator {
    CpOperator::identity(n)
}

/// The completely depolarizing map X -> tr(X)/N * I, written with all N^2
/// matrix units as Kraus matrices, each of weight 1/N.
pub fn depolarizing(n: usize) -> CpOperator {
    let w = Rational::new(1.into(), BigInt::from(n as i64));
    let mut kraus = Vec::new();
    for i in 0..n {
        for j in 0..n {
            kraus.push((w.clone(), outer(&basis_vec(n, i), &basis_vec(n, j))));
        }
    }
    CpOperator::new(n, kraus).expect("well-formed kraus list")
}

/// Pure state from an N x N matrix R: rho(i1,i2,j1,j2) = R(i1,i2) conj R(j1,j2).
pub fn pure_state(r: &Matrix) -> Budm {
    let n = r.rows();
    assert!(r.is_square(), "pure state needs a square coefficient matrix");
    Budm::from_entry_fn(n, |i1, i2, j1, j2| &r[(i1, i2)] * &r[(j1, j2)].conj())
}

/// State with blocks A_(i,j) = R(i,j) e_i e_j^dagger; its quantum
/// permanent equals the permanent of R.
pub fn permutation_pattern(r: &Matrix) -> Budm {
    let n = r.rows();
    assert!(r.is_square(), "pattern state needs a square coefficient matrix");
    Budm::from_entry_fn(n, |i1, i2, j1, j2| {
        if i2 == i1 && j2 == j1 {
            r[(i1, j1)].clone()
        } else {
            ComplexRational::zero()
        }
    })
}

/// The 2x2 subspace spanned by the identity and `[[0,-2],[0,1]]`: it has a
/// hidden rank-one basis but no rational one, and contains a nonsingular
/// matrix.
pub fn ir_subspace() -> Vec<Matrix> {
    vec![Matrix::identity(2), Matrix::from_int_rows(&[&[0, -2], &[0, 1]])]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random integer vector with entries in [lo, hi], rerolled until nonzero.
pub fn random_int_vector(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> Vec<ComplexRational> {
    loop {
        let v: Vec<ComplexRational> =
            (0..n).map(|_| ComplexRational::from_int(rng.random_range(lo..=hi))).collect();
        if v.iter().any(|c| !c.is_zero()) {
            return v;
        }
    }
}

/// Random pair family with distinct pairs of nonzero integer vectors.
pub fn random_pair_family(seed: u64, n: usize, k: usize, lo: i64, hi: i64) -> PairFamily {
    let mut rng = rng(seed);
    let mut pairs: Vec<(Vec<ComplexRational>, Vec<ComplexRational>)> = Vec::with_capacity(k);
    while pairs.len() < k {
        let cand = (
            random_int_vector(&mut rng, n, lo, hi),
            random_int_vector(&mut rng, n, lo, hi),
        );
        if !pairs.contains(&cand) {
            pairs.push(cand);
        }
    }
    PairFamily::new(n, pairs).expect("vectors nonzero and pairs distinct by construction")
}

/// Random matrix with small rational entries (numerators in [-bound, bound],
/// denominators in {1, 2, 3}) and a random sprinkling of imaginary parts.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        let re = Rational::new(rng.random_range(-bound..=bound).into(), rng.random_range(1..=3i64).into());
        let im = if rng.random_range(0..3) == 0 {
            Rational::new(rng.random_range(-bound..=bound).into(), rng.random_range(1..=3i64).into())
        } else {
            Rational::from_integer(0.into())
        };
        ComplexRational::new(re, im)
    })
}

/// Random hermitian matrix with small rational entries.
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> Matrix {
    let g = random_matrix(rng, n, n, bound);
    g.add(&g.conj_transpose()).expect("same shape")
}

/// Random PSD matrix G G^dagger from a random n x r factor.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, r: usize, bound: i64) -> Matrix {
    let g = random_matrix(rng, n, r, bound);
    g.matmul(&g.conj_transpose()).expect("compatible shapes")
}

/// Random PSD bipartite state G G^dagger of prescribed rank profile.
pub fn random_psd_budm(seed: u64, n: usize, rank: usize, bound: i64) -> Budm {
    let mut r = rng(seed);
    let g = random_matrix(&mut r, n * n, rank, bound);
    Budm::from_assembled(n, g.matmul(&g.conj_transpose()).expect("compatible shapes"))
        .expect("square by construction")
}

/// Random positive definite matrix: G G^dagger + I.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> Matrix {
    random_psd(rng, n, n, bound)
        .add(&Matrix::identity(n))
        .expect("same shape")
}

/// Random bipartite 0/1 adjacency with at least one edge.
pub fn random_bipartite_edges(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if rng.random_range(0..2) == 1 {
                    edges.push((i, j));
                }
            }
        }
        if !edges.is_empty() {
            return edges;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::basis_vec;

    #[test]
    fn sk3_is_doubly_stochastic() {
        let t = sk3();
        let id = Matrix::identity(3);
        assert_eq!(t.apply(&id).unwrap(), id);
        assert_eq!(t.dual_apply(&id).unwrap(), id);
        assert_eq!(t.kraus().len(), 3);
    }

    #[test]
    fn depolarizing_action() {
        let t = depolarizing(2);
        let x = Matrix::from_int_rows(&[&[3, 1], &[1, 1]]);
        let expect = Matrix::from_int_rows(&[&[2, 0], &[0, 2]]);
        assert_eq!(t.apply(&x).unwrap(), expect);
    }

    #[test]
    fn pure_state_of_identity() {
        let rho = pure_state(&Matrix::identity(2));
        // vec(I) vec(I)^dagger: ones at ((i,i),(j,j))
        assert_eq!(rho.entry(0, 0, 1, 1), &ComplexRational::one());
        assert_eq!(rho.entry(1, 1, 0, 0), &ComplexRational::one());
        assert!(rho.is_psd().unwrap());
    }

    #[test]
    fn permutation_pattern_blocks() {
        let r = Matrix::from_int_rows(&[&[1, 2], &[3, 4]]);
        let rho = permutation_pattern(&r);
        for i in 0..2 {
            for j in 0..2 {
                let b = rho.block(i, j);
                assert_eq!(b, outer(&basis_vec(2, i), &basis_vec(2, j)).scale(&r[(i, j)]));
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_pair_family(7, 2, 4, -3, 3);
        let b = random_pair_family(7, 2, 4, -3, 3);
        assert_eq!(a, b);
        let c = random_pair_family(8, 2, 4, -3, 3);
        assert_ne!(a, c);
    }

    #[test]
    fn random_psd_budm_is_psd() {
        let rho = random_psd_budm(3, 2, 3, 2);
        assert!(rho.is_hermitian());
        assert!(rho.is_psd().unwrap());
    }
}
