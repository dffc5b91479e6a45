//! Permanents, mixed discriminants, quantum permanents, matroidal
//! permanents, the randomized matroidal-permanent estimator, and the
//! associated upper bounds.
//!
//! The quantum permanent of a bipartite state is computable through three
//! equivalent contractions; all three are implemented and cross-checked:
//!
//! - `QpRoute::SignedMixed` (default): a signed sum over permutations of
//!   mixed discriminants of block rows, with each mixed discriminant
//!   expanded by the polarization identity
//!   `M(Q_1..Q_N) = sum over S of (-1)^(N-|S|) det(sum_{i in S} Q_i)`.
//!   This costs N! * 2^N exact determinants and reaches N around 7.
//! - `QpRoute::Triple`: the triple permutation contraction of the entries
//!   rho(i, t1(i), t2(i), t3(i)), costing (N!)^3 products.
//! - `QpRoute::Quad`: the quadruple contraction with a 1/N! prefactor,
//!   costing (N!)^4 products; only useful as an independent check.
//!
//! Normalization is pinned by the routes themselves: the product state
//! C (x) D has quantum permanent N! det(C) det(D), and a pure state with
//! coefficient matrix R has quantum permanent N! |det R|^2. Both facts
//! are frozen in the test suite by direct evaluation of the Triple route.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactmat::{outer, ComplexRational, MatError, Matrix, Rational};
use crate::floatmat::CMatF;
use crate::qstate::{Budm, PairFamily};

#[derive(Debug, Error)]
pub enum PermError {
    #[error("dimension {n} exceeds the configured cap {cap} for this route")]
    ResourceCap { n: usize, cap: usize },
    #[error("bad input: {0}")]
    Shape(String),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Default dimension cap for the signed-mixed-discriminant route.
pub const QP_CAP_SIGNED_MIXED: usize = 7;
/// Default dimension cap for the brute-force permutation routes.
pub const QP_CAP_PERMSUM: usize = 5;

/// Visit all permutations of 0..n in lexicographic order together with
/// their signs; the sign is updated incrementally from the suffix
/// reversal of the classic next-permutation step.
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize], i8)) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut sign: i8 = 1;
    loop {
        f(&p, sign);
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            return;
        };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
        p.swap(i, j);
        let suffix = n - (i + 1);
        p[i + 1..].reverse();
        // one swap plus floor(suffix/2) swaps from the reversal
        if (1 + suffix / 2) % 2 == 1 {
            sign = -sign;
        }
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Permanent by Ryser's inclusion-exclusion over column subsets, with
/// Gray-code updates of the row sums. Exact.
pub fn permanent(m: &Matrix) -> Result<ComplexRational, PermError> {
    if !m.is_square() {
        return Err(PermError::Shape(format!("permanent of {}x{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(ComplexRational::one());
    }
    if n >= 64 {
        // the subset bitmask lives in a u64
        return Err(PermError::ResourceCap { n, cap: 63 });
    }
    let mut row_sums = vec![ComplexRational::zero(); n];
    let mut acc = ComplexRational::zero();
    let mut prev_gray: u64 = 0;
    for k in 1u64..(1 << n) {
        let gray = k ^ (k >> 1);
        let bit = (gray ^ prev_gray).trailing_zeros() as usize;
        let added = gray & (1 << bit) != 0;
        for i in 0..n {
            if added {
                row_sums[i] = &row_sums[i] + &m[(i, bit)];
            } else {
                row_sums[i] = &row_sums[i] - &m[(i, bit)];
            }
        }
        prev_gray = gray;
        let mut prod = ComplexRational::one();
        for s in &row_sums {
            if s.is_zero() {
                prod = ComplexRational::zero();
                break;
            }
            prod = &prod * s;
        }
        if prod.is_zero() {
            continue;
        }
        if (n - gray.count_ones() as usize) % 2 == 1 {
            acc = &acc - &prod;
        } else {
            acc = &acc + &prod;
        }
    }
    Ok(acc)
}

/// A tuple of exactly N square N x N matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixTuple {
    n: usize,
    matrices: Vec<Matrix>,
}

impl MatrixTuple {
    pub fn new(matrices: Vec<Matrix>) -> Result<Self, PermError> {
        let n = matrices.len();
        for (k, m) in matrices.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(PermError::Shape(format!(
                    "tuple entry {k} is {}x{}, expected {n}x{n} for a tuple of length {n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { n, matrices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }
}

/// Mixed discriminant by the polarization identity (2^N exact
/// determinants); no 1/N! normalization, so the diagonal case equals the
/// permanent of the matrix of diagonals.
pub fn mixed_discriminant(t: &MatrixTuple) -> Result<ComplexRational, PermError> {
    mixed_discriminant_of(&t.matrices)
}

pub(crate) fn mixed_discriminant_of(ms: &[Matrix]) -> Result<ComplexRational, PermError> {
    let n = ms.len();
    if n == 0 {
        return Ok(ComplexRational::one());
    }
    if n >= 64 {
        return Err(PermError::ResourceCap { n, cap: 63 });
    }
    let mut acc = ComplexRational::zero();
    let mut sum = Matrix::zeros(n, n);
    let mut prev_gray: u64 = 0;
    for k in 1u64..(1 << n) {
        let gray = k ^ (k >> 1);
        let bit = (gray ^ prev_gray).trailing_zeros() as usize;
        if gray & (1 << bit) != 0 {
            sum = sum.add(&ms[bit])?;
        } else {
            sum = sum.sub(&ms[bit])?;
        }
        prev_gray = gray;
        let d = sum.det_exact()?;
        if d.is_zero() {
            continue;
        }
        if (n - gray.count_ones() as usize) % 2 == 1 {
            acc = &acc - &d;
        } else {
            acc = &acc + &d;
        }
    }
    Ok(acc)
}

/// Mixed discriminant straight from the double permutation sum
/// sum_{s,t} sign(s t) prod_i Q_i(s(i), t(i)); the slow reference route.
pub fn mixed_discriminant_permsum(t: &MatrixTuple) -> Result<ComplexRational, PermError> {
    let n = t.n;
    let mut acc = ComplexRational::zero();
    for_each_permutation(n, |sigma, s_sign| {
        for_each_permutation(n, |tau, t_sign| {
            let mut prod = ComplexRational::one();
            for i in 0..n {
                prod = &prod * &t.matrices[i][(sigma[i], tau[i])];
                if prod.is_zero() {
                    break;
                }
            }
            if prod.is_zero() {
                return;
            }
            if s_sign * t_sign == 1 {
                acc = &acc + &prod;
            } else {
                acc = &acc - &prod;
            }
        });
    });
    Ok(acc)
}

/// Selectable contraction route for the quantum permanent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpRoute {
    /// Signed sum of block-row mixed discriminants (default, fastest).
    SignedMixed,
    /// Triple permutation contraction of the raw entries.
    Triple,
    /// Quadruple permutation contraction with a 1/N! prefactor.
    Quad,
}

impl QpRoute {
    pub fn default_cap(self) -> usize {
        match self {
            QpRoute::SignedMixed => QP_CAP_SIGNED_MIXED,
            QpRoute::Triple | QpRoute::Quad => QP_CAP_PERMSUM,
        }
    }
}

/// Quantum permanent of a bipartite state, by the chosen route, under the
/// route's default dimension cap.
pub fn quantum_permanent(rho: &Budm, route: QpRoute) -> Result<ComplexRational, PermError> {
    quantum_permanent_with_cap(rho, route, route.default_cap())
}

pub fn quantum_permanent_with_cap(
    rho: &Budm,
    route: QpRoute,
    cap: usize,
) -> Result<ComplexRational, PermError> {
    let n = rho.n();
    if n > cap {
        return Err(PermError::ResourceCap { n, cap });
    }
    match route {
        QpRoute::SignedMixed => qp_signed_mixed(rho),
        QpRoute::Triple => qp_triple(rho),
        QpRoute::Quad => qp_quad(rho),
    }
}

fn qp_signed_mixed(rho: &Budm) -> Result<ComplexRational, PermError> {
    let n = rho.n();
    let blocks: Vec<Vec<Matrix>> =
        (0..n).map(|i| (0..n).map(|j| rho.block(i, j)).collect()).collect();
    let mut acc = ComplexRational::zero();
    let mut err = None;
    for_each_permutation(n, |sigma, sign| {
        if err.is_some() {
            return;
        }
        let tuple: Vec<Matrix> = (0..n).map(|i| blocks[i][sigma[i]].clone()).collect();
        match mixed_discriminant_of(&tuple) {
            Ok(d) => {
                if sign == 1 {
                    acc = &acc + &d;
                } else {
                    acc = &acc - &d;
                }
            }
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

fn qp_triple(rho: &Budm) -> Result<ComplexRational, PermError> {
    let n = rho.n();
    let mut acc = ComplexRational::zero();
    for_each_permutation(n, |t1, s1| {
        for_each_permutation(n, |t2, s2| {
            for_each_permutation(n, |t3, s3| {
                let mut prod = ComplexRational::one();
                for i in 0..n {
                    prod = &prod * rho.entry(i, t1[i], t2[i], t3[i]);
                    if prod.is_zero() {
                        break;
                    }
                }
                if prod.is_zero() {
                    return;
                }
                if s1 * s2 * s3 == 1 {
                    acc = &acc + &prod;
                } else {
                    acc = &acc - &prod;
                }
            });
        });
    });
    Ok(acc)
}

fn qp_quad(rho: &Budm) -> Result<ComplexRational, PermError> {
    let n = rho.n();
    let mut acc = ComplexRational::zero();
    for_each_permutation(n, |t1, s1| {
        for_each_permutation(n, |t2, s2| {
            for_each_permutation(n, |t3, s3| {
                for_each_permutation(n, |t4, s4| {
                    let mut prod = ComplexRational::one();
                    for i in 0..n {
                        prod = &prod * rho.entry(t1[i], t2[i], t3[i], t4[i]);
                        if prod.is_zero() {
                            break;
                        }
                    }
                    if prod.is_zero() {
                        return;
                    }
                    if s1 * s2 * s3 * s4 == 1 {
                        acc = &acc + &prod;
                    } else {
                        acc = &acc - &prod;
                    }
                });
            });
        });
    });
    let nf = Rational::from_integer(factorial(n));
    Ok(ComplexRational::new(acc.re / &nf, acc.im / &nf))
}

/// Quantum permanent of an assembled float Choi matrix by the triple
/// contraction; supports the float scaling diagnostics.
pub fn quantum_permanent_f64(assembled: &CMatF, n: usize) -> f64 {
    assert_eq!(assembled.rows(), n * n);
    assert_eq!(assembled.cols(), n * n);
    let mut acc = 0.0f64;
    for_each_permutation(n, |t1, s1| {
        for_each_permutation(n, |t2, s2| {
            for_each_permutation(n, |t3, s3| {
                let mut prod = num_complex::Complex64::new(1.0, 0.0);
                for i in 0..n {
                    prod *= assembled[(i * n + t1[i], t2[i] * n + t3[i])];
                }
                acc += f64::from(s1 * s2 * s3) * prod.re;
            });
        });
    });
    acc
}

/// Matroidal permanent: sum over N-subsets of the pair family of the
/// product of the two Gram determinants. Exact and nonnegative; positive
/// exactly when the instance has full matroid-intersection rank.
pub fn matroidal_permanent(p: &PairFamily) -> Result<Rational, PermError> {
    let n = p.n();
    let k = p.len();
    if k < n {
        return Ok(Rational::zero());
    }
    let mut total = Rational::zero();
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let mut gx = Matrix::zeros(n, n);
        let mut gy = Matrix::zeros(n, n);
        for &idx in &subset {
            let (x, y) = &p.pairs()[idx];
            gx = gx.add(&outer(x, x))?;
            gy = gy.add(&outer(y, y))?;
        }
        let dx = gx.det_exact()?;
        if !dx.is_zero() {
            let dy = gy.det_exact()?;
            let term = &dx * &dy;
            debug_assert!(term.is_real());
            total += term.re;
        }
        // next n-combination of 0..k in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(total);
            }
            i -= 1;
            if subset[i] != i + k - n {
                break;
            }
            if i == 0 {
                return Ok(total);
            }
        }
        subset[i] += 1;
        for j in i + 1..n {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Monte Carlo estimate of the matroidal permanent: the sample mean of
/// |det(sum_k xi_k x_k y_k^dagger)|^2 with independent uniform complex
/// phases xi_k. Returns (mean, standard error); deterministic for a given
/// seed.
pub fn barvinok_estimate(p: &PairFamily, samples: usize, seed: u64) -> (f64, f64) {
    use rand::Rng;
    assert!(samples >= 1, "estimator needs at least one sample");
    let n = p.n();
    let mut rng = crate::instances::rng(seed);
    let outers: Vec<CMatF> =
        p.pairs().iter().map(|(x, y)| CMatF::from_exact(&outer(x, y))).collect();
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut m = CMatF::zeros(n, n);
        for o in &outers {
            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let xi = num_complex::Complex64::new(theta.cos(), theta.sin());
            m = m.add(&o.scale(xi));
        }
        values.push(m.lu_det().norm_sqr());
    }
    let mean = values.iter().sum::<f64>() / samples as f64;
    let stderr = if samples < 2 {
        0.0
    } else {
        let var =
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (samples - 1) as f64;
        (var / samples as f64).sqrt()
    };
    (mean, stderr)
}

/// The two upper bounds N! * M(A_11, ..., A_NN) and N! * det(rho_A) for a
/// PSD state; the quantum permanent sits below both, and the first below
/// the second.
pub fn qp_upper_bound(rho: &Budm) -> Result<(ComplexRational, ComplexRational), PermError> {
    let n = rho.n();
    let diag: Vec<Matrix> = (0..n).map(|i| rho.block(i, i)).collect();
    let m = mixed_discriminant_of(&diag)?;
    let (rho_a, _) = rho.marginals();
    let det_a = rho_a.det_exact()?;
    let nf = ComplexRational::from_rational(Rational::from_integer(factorial(n)));
    Ok((&nf * &m, &nf * &det_a))
}
