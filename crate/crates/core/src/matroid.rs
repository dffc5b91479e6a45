//! Classical oracles: matroid-intersection rank by subset enumeration, the
//! Edmonds-Rado certificate, and randomized subspace max-rank. These are
//! deliberately brute force; they exist to cross-validate the scaling
//! decision procedure at desk scale, not to be fast.

use thiserror::Error;

use crate::exactmat::{ComplexRational, Matrix};
use crate::qstate::PairFamily;

#[derive(Debug, Error)]
pub enum MatroidError {
    #[error("family size {k} exceeds the enumeration cap {cap}")]
    CapExceeded { k: usize, cap: usize },
}

/// Default cap on family size for the 2^K subset enumerations.
pub const ENUM_CAP: usize = 12;

fn span_rank(vectors: &[&[ComplexRational]], n: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_fn(n, vectors.len(), |i, j| vectors[j][i].clone()).rank_exact()
}

/// Largest m such that some m pairs have both their x-vectors and their
/// y-vectors linearly independent. Exact, by enumeration over subsets.
pub fn mi_rank_bruteforce(p: &PairFamily) -> Result<usize, MatroidError> {
    mi_rank_bruteforce_with_cap(p, ENUM_CAP)
}

pub fn mi_rank_bruteforce_with_cap(p: &PairFamily, cap: usize) -> Result<usize, MatroidError> {
    let k = p.len();
    let cap = cap.min(63); // subset bitmasks live in a u64
    if k > cap {
        return Err(MatroidError::CapExceeded { k, cap });
    }
    let n = p.n();
    let mut best = 0usize;
    for mask in 0u64..(1 << k) {
        let size = mask.count_ones() as usize;
        if size <= best || size > n {
            continue;
        }
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let xs: Vec<&[ComplexRational]> = idx.iter().map(|&i| p.pairs()[i].0.as_slice()).collect();
        if span_rank(&xs, n) < size {
            continue;
        }
        let ys: Vec<&[ComplexRational]> = idx.iter().map(|&i| p.pairs()[i].1.as_slice()).collect();
        if span_rank(&ys, n) == size {
            best = size;
        }
    }
    Ok(best)
}

/// Outcome of the Edmonds-Rado test: full rank, or a minimal violating
/// index set A with dim span{x_i : i in A} + dim span{y_j : j not in A} < N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdmondsRado {
    pub full_rank: bool,
    pub violating_set: Option<Vec<usize>>,
}

pub fn edmonds_rado_check(p: &PairFamily) -> Result<EdmondsRado, MatroidError> {
    edmonds_rado_check_with_cap(p, ENUM_CAP)
}

pub fn edmonds_rado_check_with_cap(p: &PairFamily, cap: usize) -> Result<EdmondsRado, MatroidError> {
    let k = p.len();
    let cap = cap.min(63);
    if k > cap {
        return Err(MatroidError::CapExceeded { k, cap });
    }
    let n = p.n();
    // scan subsets smallest-first so the first violation found is minimal
    let mut masks: Vec<u64> = (0..(1u64 << k)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let a: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let xs: Vec<&[ComplexRational]> = a.iter().map(|&i| p.pairs()[i].0.as_slice()).collect();
        let ys: Vec<&[ComplexRational]> = (0..k)
            .filter(|i| mask & (1 << i) == 0)
            .map(|i| p.pairs()[i].1.as_slice())
            .collect();
        if span_rank(&xs, n) + span_rank(&ys, n) < n {
            return Ok(EdmondsRado { full_rank: false, violating_set: Some(a) });
        }
    }
    Ok(EdmondsRado { full_rank: true, violating_set: None })
}

/// Lower bound on the maximal rank attained in the span of the basis:
/// the best rank of a random integer combination over `trials` draws.
/// Coefficients are drawn from [-2^16, 2^16], so each trial misses the
/// maximum with probability at most N/2^17.
pub fn lin_rank_randomized(basis: &[Matrix], trials: usize, seed: u64) -> usize {
    use rand::Rng;
    if basis.is_empty() {
        return 0;
    }
    let (rows, cols) = (basis[0].rows(), basis[0].cols());
    let mut rng = crate::instances::rng(seed);
    let mut best = 0usize;
    for _ in 0..trials.max(1) {
        let mut m = Matrix::zeros(rows, cols);
        for b in basis {
            let c = ComplexRational::from_int(rng.random_range(-(1i64 << 16)..=(1i64 << 16)));
            m = m.add(&b.scale(&c)).expect("uniform basis shapes");
        }
        best = best.max(m.rank_exact());
        if best == rows.min(cols) {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::basis_vec;
    use crate::instances;
    use crate::permanents::matroidal_permanent;
    use num_traits::Zero;

    fn e(i: usize) -> Vec<ComplexRational> {
        basis_vec(2, i)
    }

    #[test]
    fn mi_rank_examples() {
        let p = PairFamily::new(2, vec![(e(0), e(0)), (e(1), e(1))]).unwrap();
        assert_eq!(mi_rank_bruteforce(&p).unwrap(), 2);

        let p = PairFamily::new(2, vec![(e(0), e(0)), (e(0), e(1))]).unwrap();
        assert_eq!(mi_rank_bruteforce(&p).unwrap(), 1);

        let p = PairFamily::new(
            2,
            vec![(e(0), e(0)), (e(1), e(1)), (vec![ComplexRational::from_int(1), ComplexRational::from_int(1)], e(0))],
        )
        .unwrap();
        assert_eq!(mi_rank_bruteforce(&p).unwrap(), 2);
    }

    #[test]
    fn mi_rank_cap() {
        let p = instances::random_pair_family(3, 2, 13, -2, 2);
        assert!(matches!(
            mi_rank_bruteforce(&p),
            Err(MatroidError::CapExceeded { k: 13, cap: 12 })
        ));
        assert!(mi_rank_bruteforce_with_cap(&p, 13).is_ok());
    }

    #[test]
    fn edmonds_rado_examples() {
        let p = PairFamily::new(2, vec![(e(0), e(0)), (e(1), e(1))]).unwrap();
        let r = edmonds_rado_check(&p).unwrap();
        assert!(r.full_rank);
        assert!(r.violating_set.is_none());

        let p = PairFamily::new(2, vec![(e(0), e(0)), (e(0), e(1))]).unwrap();
        let r = edmonds_rado_check(&p).unwrap();
        assert!(!r.full_rank);
        assert_eq!(r.violating_set, Some(vec![0, 1])); // 1 + 0 < 2

        let empty = PairFamily::new(2, vec![]).unwrap();
        let r = edmonds_rado_check(&empty).unwrap();
        assert!(!r.full_rank);
        assert_eq!(r.violating_set, Some(vec![])); // 0 + 0 < 2
    }

    #[test]
    fn lin_rank_examples() {
        assert_eq!(lin_rank_randomized(&[Matrix::identity(2)], 5, 0), 2);
        let low = vec![
            crate::exactmat::outer(&e(0), &e(0)),
            crate::exactmat::outer(&e(0), &e(1)),
        ];
        assert_eq!(lin_rank_randomized(&low, 20, 0), 1);
        assert_eq!(lin_rank_randomized(&instances::ir_subspace(), 20, 0), 2);
        assert_eq!(lin_rank_randomized(&[], 5, 0), 0);
    }

    #[test]
    fn rank_full_iff_edmonds_rado_and_mp_positive() {
        // exhaustive random agreement at small size
        for seed in 0..60u64 {
            let n = 2 + (seed % 2) as usize;
            let k = 1 + (seed % 5) as usize;
            let p = instances::random_pair_family(1000 + seed, n, k, -2, 2);
            let rank = mi_rank_bruteforce(&p).unwrap();
            let er = edmonds_rado_check(&p).unwrap();
            assert_eq!(rank == n, er.full_rank, "seed {seed}");
            let mp = matroidal_permanent(&p).unwrap();
            assert_eq!(rank == n, !mp.is_zero(), "seed {seed}");
        }
    }

    #[test]
    fn lin_rank_matches_mi_rank_on_rank_one_basis() {
        for seed in 0..30u64 {
            let n = 2 + (seed % 2) as usize;
            let k = 1 + (seed % 4) as usize;
            let p = instances::random_pair_family(7000 + seed, n, k, -2, 2);
            let basis: Vec<Matrix> = p
                .pairs()
                .iter()
                .map(|(x, y)| crate::exactmat::outer(x, y))
                .collect();
            let lr = lin_rank_randomized(&basis, 20, seed);
            let mi = mi_rank_bruteforce(&p).unwrap();
            assert_eq!(lr, mi, "seed {seed}");
        }
    }
}
