//! Operator scaling, the doubly-stochastic defect, operator Sinkhorn
//! iterative scaling (OSI), capacity diagnostics, and indecomposability.
//!
//! The exact iteration never takes a square root: instead of tracking the
//! scaled operator itself it tracks the positive definite pair (P, Q)
//! through the inverse recursion P <- (T(Q))^-1, Q <- (T*(P))^-1. The
//! implicitly scaled operator T_n has T_n(I) similar to P T(Q) and
//! T_n*(I) similar to Q T*(P), and traces of polynomials in similar
//! matrices agree, so the defect
//!
//!   ds = tr((P T(Q) - I)^2) + tr((Q T*(P) - I)^2)
//!
//! is an exact rational at every step. A row step starts the cycle, and a
//! singular normalizer is not a failure: it exhibits a positive definite
//! argument whose image loses rank, which certifies that the operator is
//! not rank non-decreasing.
//!
//! Float mode runs the same recursion in complex f64 for long
//! trajectories and for the square-root-bearing diagnostics
//! (`extract_ds_scaling`, `indecomposability_coefficient`). The two modes
//! are chosen explicitly by the caller and never mixed behind the API.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactmat::{ComplexRational, MatError, Matrix, Rational};
use crate::floatmat::CMatF;
use crate::permanents::{mixed_discriminant, MatrixTuple, PermError};
use crate::qstate::{CpOperator, StateError};

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("tuple entry {0} is not positive semidefinite")]
    NotPsdTuple(usize),
    #[error("normalizer is rank deficient at step {step} ({side:?} side, rank {rank})")]
    SingularNormalizer { step: usize, side: Side, rank: usize },
    #[error("rank-deficient matrix where positive definite was required: {0}")]
    RankDeficient(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// Which normalizer a step inverts: `Row` steps invert T(Q) and refresh P,
/// `Col` steps invert T*(P) and refresh Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    Row,
    Col,
}

/// Witness that a normalizer was singular: the positive definite argument
/// on file maps to a matrix of the recorded rank < N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularInfo {
    pub step: usize,
    pub side: Side,
    pub rank: usize,
}

/// Operator scaling S_{C1,C2}(T): X -> C1 T(C2^dagger X C2) C1^dagger,
/// realized on the Kraus list as B_k -> C1 B_k C2^dagger.
pub fn local_scale(t: &CpOperator, c1: &Matrix, c2: &Matrix) -> Result<CpOperator, ScalingError> {
    let n = t.n();
    for c in [c1, c2] {
        if c.rows() != n || c.cols() != n {
            return Err(ScalingError::Dimension(format!(
                "scaling matrix is {}x{}, operator acts on {n}x{n}",
                c.rows(),
                c.cols()
            )));
        }
    }
    let c2d = c2.conj_transpose();
    let kraus = t
        .kraus()
        .iter()
        .map(|(w, b)| Ok((w.clone(), c1.matmul(b)?.matmul(&c2d)?)))
        .collect::<Result<Vec<_>, MatError>>()?;
    Ok(CpOperator::new(n, kraus)?)
}

/// Doubly-stochastic defect tr((T(I)-I)^2) + tr((T*(I)-I)^2), exact.
pub fn ds_defect(t: &CpOperator) -> Result<Rational, ScalingError> {
    let id = Matrix::identity(t.n());
    let a = trdev(&t.apply(&id)?)?;
    let b = trdev(&t.dual_apply(&id)?)?;
    Ok(a + b)
}

/// tr((A - I)^2) = tr(A^2) - 2 tr(A) + n for square A with real trace data.
fn trdev(a: &Matrix) -> Result<Rational, ScalingError> {
    let n = a.rows();
    let t1 = a.matmul(a)?.trace()?;
    let t2 = a.trace()?;
    let v = &(&t1 - &t2) - &(&t2 - &ComplexRational::from_int(n as i64));
    debug_assert!(v.is_real(), "similarity traces of hermitian products are real");
    Ok(v.re)
}

/// Exact OSI trajectory state.
#[derive(Clone, Debug)]
pub struct ScalingState {
    pub p: Matrix,
    pub q: Matrix,
    pub iter: usize,
    pub ds: Rational,
    pub log: Vec<StepRecord>,
    pub certificate: Option<SingularInfo>,
}

/// One per-step record: the defect after the step, the determinant
/// progress factor paid for the step, and the capacity candidate
/// det(T(Q))/det(Q) observed at row steps.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub iter: usize,
    pub ds: Rational,
    pub a: Option<Rational>,
    pub cap_candidate: Option<Rational>,
}

impl ScalingState {
    pub fn fresh(t: &CpOperator) -> Result<Self, ScalingError> {
        let n = t.n();
        let p = Matrix::identity(n);
        let q = Matrix::identity(n);
        let ds = ds_of_pair(t, &p, &q)?;
        let log = vec![StepRecord { iter: 0, ds: ds.clone(), a: None, cap_candidate: None }];
        Ok(Self { p, q, iter: 0, ds, log, certificate: None })
    }

    /// Defect recomputed from scratch; equals `self.ds` by construction.
    pub fn recompute_ds(&self, t: &CpOperator) -> Result<Rational, ScalingError> {
        ds_of_pair(t, &self.p, &self.q)
    }
}

/// ds of the operator implicitly scaled by the pair (P, Q).
pub fn ds_of_pair(t: &CpOperator, p: &Matrix, q: &Matrix) -> Result<Rational, ScalingError> {
    let row = p.matmul(&t.apply(q)?)?;
    let col = q.matmul(&t.dual_apply(p)?)?;
    Ok(trdev(&row)? + trdev(&col)?)
}

/// One OSI step: row steps (odd iterations) set P <- (T(Q))^-1, column
/// steps set Q <- (T*(P))^-1; the defect is recomputed exactly afterward.
pub fn osi_step(t: &CpOperator, state: &mut ScalingState) -> Result<(), ScalingError> {
    osi_step_rounded(t, state, None)
}

/// `osi_step` with optional dyadic rounding of the refreshed matrix to
/// denominators 2^bits. Rounding caps coefficient growth on long exact
/// runs at the price of the one-sided normalization being only
/// approximate; it is off everywhere unless explicitly requested.
pub fn osi_step_rounded(
    t: &CpOperator,
    state: &mut ScalingState,
    rounding: Option<u32>,
) -> Result<(), ScalingError> {
    let step = state.iter + 1;
    let row_step = step % 2 == 1;
    let (a, cap_candidate);
    if row_step {
        let normalizer = t.apply(&state.q)?;
        let det_n = real_det(&normalizer)?;
        if det_n.is_zero() {
            return Err(ScalingError::SingularNormalizer {
                step,
                side: Side::Row,
                rank: normalizer.rank_exact(),
            });
        }
        let det_q = real_det(&state.q)?;
        let det_p_old = real_det(&state.p)?;
        a = (det_p_old * &det_n).recip();
        cap_candidate = Some(&det_n / &det_q);
        let mut fresh = normalizer.inverse_exact()?;
        if let Some(bits) = rounding {
            fresh = round_to_dyadic(&fresh, bits);
        }
        state.p = fresh;
    } else {
        let normalizer = t.dual_apply(&state.p)?;
        let det_n = real_det(&normalizer)?;
        if det_n.is_zero() {
            return Err(ScalingError::SingularNormalizer {
                step,
                side: Side::Col,
                rank: normalizer.rank_exact(),
            });
        }
        let det_q_old = real_det(&state.q)?;
        a = (det_q_old * &det_n).recip();
        cap_candidate = None;
        let mut fresh = normalizer.inverse_exact()?;
        if let Some(bits) = rounding {
            fresh = round_to_dyadic(&fresh, bits);
        }
        state.q = fresh;
    }
    state.iter = step;
    state.ds = ds_of_pair(t, &state.p, &state.q)?;
    state.log.push(StepRecord { iter: step, ds: state.ds.clone(), a: Some(a), cap_candidate });
    Ok(())
}

fn real_det(m: &Matrix) -> Result<Rational, ScalingError> {
    let d = m.det_exact()?;
    debug_assert!(d.is_real(), "determinants of hermitian matrices are real");
    Ok(d.re)
}

/// Round every entry to the nearest multiple of 2^-bits, re-imposing
/// hermiticity from the upper triangle.
pub fn round_to_dyadic(m: &Matrix, bits: u32) -> Matrix {
    let scale = Rational::from_integer(BigInt::one() << bits);
    let round1 = |r: &Rational| (r * &scale).round() / &scale;
    let n = m.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let e = &m[(i, j)];
            let rounded = ComplexRational::new(round1(&e.re), round1(&e.im));
            out[(j, i)] = rounded.conj();
            out[(i, j)] = rounded;
        }
    }
    for i in 0..n {
        let d = out[(i, i)].clone();
        out[(i, i)] = ComplexRational::from_rational(d.re);
    }
    out
}

/// Result of a bounded OSI run. `reached` reports whether the defect got
/// under the threshold; a singular normalizer ends the run with a
/// certificate in the state and `reached == false`.
#[derive(Clone, Debug)]
pub struct OsiRun {
    pub state: ScalingState,
    pub reached: bool,
}

pub fn osi_run(
    t: &CpOperator,
    max_iter: usize,
    eps: &Rational,
    rounding: Option<u32>,
) -> Result<OsiRun, ScalingError> {
    let mut state = ScalingState::fresh(t)?;
    if state.ds <= *eps {
        return Ok(OsiRun { state, reached: true });
    }
    while state.iter < max_iter {
        match osi_step_rounded(t, &mut state, rounding) {
            Ok(()) => {}
            Err(ScalingError::SingularNormalizer { step, side, rank }) => {
                state.certificate = Some(SingularInfo { step, side, rank });
                return Ok(OsiRun { state, reached: false });
            }
            Err(e) => return Err(e),
        }
        if state.ds <= *eps {
            return Ok(OsiRun { state, reached: true });
        }
    }
    Ok(OsiRun { state, reached: false })
}

/// Upper bound on the capacity of T: the smallest det(T(X)) over the
/// determinant-normalized candidates X = Q/det(Q)^(1/N) seen along a
/// trajectory, plus the base candidate X = I.
pub fn capacity_upper(t: &CpOperator, state: &ScalingState) -> Result<f64, ScalingError> {
    let base = real_det(&t.apply(&Matrix::identity(t.n()))?)?;
    let mut best = base.to_f64().unwrap_or(f64::INFINITY);
    for rec in &state.log {
        if let Some(c) = &rec.cap_candidate {
            let v = c.to_f64().unwrap_or(f64::INFINITY);
            if v < best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// Two-sided capacity data for a PSD tuple: `lower` is the exact mixed
/// discriminant (a capacity lower bound), `upper` the smallest
/// det(sum_i gamma_i Q_i) found by projected gradient descent over
/// log-coordinates with prod gamma_i = 1. The capacity itself sits in
/// [lower, upper], and upper <= N^N/N! * lower at the optimum.
#[derive(Clone, Copy, Debug)]
pub struct CapBracket {
    pub upper: f64,
    pub lower: f64,
}

pub fn cap_tuple(t: &MatrixTuple, iters: usize) -> Result<CapBracket, ScalingError> {
    let n = t.n();
    for (k, q) in t.matrices().iter().enumerate() {
        if !q.is_hermitian() || !q.psd_check()? {
            return Err(ScalingError::NotPsdTuple(k));
        }
    }
    let m = mixed_discriminant(t)?;
    debug_assert!(m.is_real());
    let lower = m.re.to_f64().unwrap_or(0.0);
    if m.re.is_zero() {
        // capacity is squeezed to zero by the two-sided bound
        return Ok(CapBracket { upper: 0.0, lower: 0.0 });
    }
    // optimize over trace-normalized matrices so determinants stay O(1);
    // the product of traces undoes the normalization at the end
    let mut unscale = 1.0f64;
    let qf: Vec<CMatF> = t
        .matrices()
        .iter()
        .map(|q| {
            let tr = q.trace().expect("square").re;
            debug_assert!(tr.is_positive(), "nonzero PSD matrices have positive trace");
            unscale *= tr.to_f64().unwrap_or(1.0);
            CMatF::from_exact(&q.scale_rat(&tr.recip()))
        })
        .collect();
    let sum_at = |tv: &[f64]| -> CMatF {
        let mut s = CMatF::zeros(n, n);
        for (ti, q) in tv.iter().zip(&qf) {
            s = s.add(&q.scale(Complex64::new(ti.exp(), 0.0)));
        }
        s
    };
    let log_det = |s: &CMatF| -> f64 { s.lu_det().re.max(f64::MIN_POSITIVE).ln() };
    let mut tv = vec![0.0f64; n];
    let mut g = log_det(&sum_at(&tv));
    let mut step = 0.5f64;
    for _ in 0..iters {
        let s = sum_at(&tv);
        let Some(sinv) = s.inverse(1e-14) else { break };
        // gradient of log det(sum e^{t_i} Q_i), projected onto sum t = 0
        let mut grad: Vec<f64> = (0..n)
            .map(|i| tv[i].exp() * sinv.matmul(&qf[i]).trace().re)
            .collect();
        let mean = grad.iter().sum::<f64>() / n as f64;
        for gi in &mut grad {
            *gi -= mean;
        }
        let gnorm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gnorm < 1e-13 {
            break;
        }
        // backtracking line search
        let mut improved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = tv.iter().zip(&grad).map(|(t, g)| t - step * g).collect();
            let gc = log_det(&sum_at(&cand));
            if gc < g - 1e-18 {
                tv = cand;
                g = gc;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(CapBracket { upper: g.exp() * unscale, lower })
}

// ---------------------------------------------------------------------
// float mode
// ---------------------------------------------------------------------

/// Completely positive map with f64 Kraus data.
#[derive(Clone, Debug)]
pub struct CpOperatorF {
    n: usize,
    kraus: Vec<(f64, CMatF)>,
}

impl CpOperatorF {
    pub fn new(n: usize, kraus: Vec<(f64, CMatF)>) -> Self {
        Self { n, kraus }
    }

    pub fn from_exact(t: &CpOperator) -> Self {
        Self {
            n: t.n(),
            kraus: t
                .kraus()
                .iter()
                .map(|(w, b)| (w.to_f64().unwrap_or(f64::NAN), CMatF::from_exact(b)))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, x: &CMatF) -> CMatF {
        let mut out = CMatF::zeros(self.n, self.n);
        for (w, b) in &self.kraus {
            out = out.add(&b.matmul(x).matmul(&b.adjoint()).scale(Complex64::new(*w, 0.0)));
        }
        out
    }

    pub fn dual_apply(&self, x: &CMatF) -> CMatF {
        let mut out = CMatF::zeros(self.n, self.n);
        for (w, b) in &self.kraus {
            out = out.add(&b.adjoint().matmul(x).matmul(b).scale(Complex64::new(*w, 0.0)));
        }
        out
    }

    /// Assembled Choi matrix: block (i, j) = T(e_i e_j^dagger).
    pub fn choi_assembled(&self) -> CMatF {
        let n = self.n;
        let mut out = CMatF::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let mut eij = CMatF::zeros(n, n);
                eij[(i, j)] = Complex64::new(1.0, 0.0);
                let block = self.apply(&eij);
                for i2 in 0..n {
                    for j2 in 0..n {
                        out[(i * n + i2, j * n + j2)] = block[(i2, j2)];
                    }
                }
            }
        }
        out
    }
}

pub fn local_scale_f(t: &CpOperatorF, c1: &CMatF, c2: &CMatF) -> CpOperatorF {
    let c2d = c2.adjoint();
    CpOperatorF {
        n: t.n,
        kraus: t.kraus.iter().map(|(w, b)| (*w, c1.matmul(b).matmul(&c2d))).collect(),
    }
}

pub fn ds_defect_f(t: &CpOperatorF) -> f64 {
    let id = CMatF::identity(t.n);
    trdev_f(&t.apply(&id)) + trdev_f(&t.dual_apply(&id))
}

fn trdev_f(a: &CMatF) -> f64 {
    let n = a.rows() as f64;
    a.matmul(a).trace().re - 2.0 * a.trace().re + n
}

/// Float OSI trajectory state.
#[derive(Clone, Debug)]
pub struct ScalingStateF {
    pub p: CMatF,
    pub q: CMatF,
    pub iter: usize,
    pub ds: f64,
    pub log: Vec<StepRecordF>,
    pub certificate: Option<SingularInfo>,
}

#[derive(Clone, Copy, Debug)]
pub struct StepRecordF {
    pub iter: usize,
    pub ds: f64,
    pub a: Option<f64>,
    pub cap_candidate: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct OsiRunF {
    pub state: ScalingStateF,
    pub reached: bool,
}

fn ds_of_pair_f(t: &CpOperatorF, p: &CMatF, q: &CMatF) -> f64 {
    trdev_f(&p.matmul(&t.apply(q))) + trdev_f(&q.matmul(&t.dual_apply(p)))
}

pub fn osi_run_f(t: &CpOperatorF, max_iter: usize, eps: f64) -> OsiRunF {
    let n = t.n;
    let mut state = ScalingStateF {
        p: CMatF::identity(n),
        q: CMatF::identity(n),
        iter: 0,
        ds: 0.0,
        log: Vec::new(),
        certificate: None,
    };
    state.ds = ds_of_pair_f(t, &state.p, &state.q);
    state.log.push(StepRecordF { iter: 0, ds: state.ds, a: None, cap_candidate: None });
    if state.ds <= eps {
        return OsiRunF { state, reached: true };
    }
    while state.iter < max_iter {
        let step = state.iter + 1;
        let row_step = step % 2 == 1;
        let (normalizer, side) = if row_step {
            (t.apply(&state.q), Side::Row)
        } else {
            (t.dual_apply(&state.p), Side::Col)
        };
        let det_old = if row_step { state.p.lu_det().re } else { state.q.lu_det().re };
        let det_n = normalizer.lu_det().re;
        let Some(fresh) = normalizer.inverse(1e-13) else {
            let rank_proxy = {
                let (evals, _) = normalizer.hermitian_eig();
                let top = evals.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
                evals.iter().filter(|e| e.abs() > 1e-10 * top).count()
            };
            state.certificate = Some(SingularInfo { step, side, rank: rank_proxy });
            return OsiRunF { state, reached: false };
        };
        let cap_candidate = if row_step { Some(det_n / state.q.lu_det().re) } else { None };
        if row_step {
            state.p = fresh;
        } else {
            state.q = fresh;
        }
        state.iter = step;
        state.ds = ds_of_pair_f(t, &state.p, &state.q);
        state.log.push(StepRecordF {
            iter: step,
            ds: state.ds,
            a: Some(1.0 / (det_old * det_n)),
            cap_candidate,
        });
        if state.ds <= eps {
            return OsiRunF { state, reached: true };
        }
    }
    OsiRunF { state, reached: false }
}

/// The scaled operator carried by a float trajectory:
/// S_{L, R}(T) with P = L^dagger L and Q = R^dagger R via Cholesky.
pub fn scaled_operator_f(t: &CpOperatorF, state: &ScalingStateF) -> Option<CpOperatorF> {
    let l = chol_factor(&state.p)?;
    let r = chol_factor(&state.q)?;
    Some(local_scale_f(t, &l, &r))
}

// lower-triangular G with P = G^dagger G (adjoint of the usual factor)
fn chol_factor(p: &CMatF) -> Option<CMatF> {
    Some(p.cholesky()?.adjoint())
}

/// Doubly stochastic scaling extracted from a positive definite C with
/// det(C) = 1: S_{T(C)^(-1/2), C^(1/2)}(T), returned with its residual
/// defect. Square roots force float arithmetic here.
pub fn extract_ds_scaling(
    t: &CpOperator,
    c: &CMatF,
) -> Result<(CpOperatorF, f64), ScalingError> {
    let tf = CpOperatorF::from_exact(t);
    let tc = tf.apply(c);
    let c1 = tc
        .hermitian_invsqrt()
        .ok_or_else(|| ScalingError::RankDeficient("T(C) has a nonpositive eigenvalue".into()))?;
    let c2 = c.hermitian_sqrt();
    let s = local_scale_f(&tf, &c1, &c2);
    let ds = ds_defect_f(&s);
    Ok((s, ds))
}

/// Contraction coefficient of T on the traceless hermitian subspace: the
/// squared largest singular value of the restriction, computed in an
/// orthonormal traceless hermitian basis. Values below 1 certify
/// indecomposability for doubly stochastic operators.
pub fn indecomposability_coefficient(t: &CpOperator) -> f64 {
    let tf = CpOperatorF::from_exact(t);
    let n = t.n();
    let basis = traceless_hermitian_basis(n);
    let d = basis.len();
    // real matrix of the restriction in the orthonormal basis
    let mut g = CMatF::zeros(d, d);
    for (b, eb) in basis.iter().enumerate() {
        let image = tf.apply(eb);
        for (a, ea) in basis.iter().enumerate() {
            g[(a, b)] = Complex64::new(ea.matmul(&image).trace().re, 0.0);
        }
    }
    let gram = g.adjoint().matmul(&g);
    let (evals, _) = gram.hermitian_eig();
    evals.last().copied().unwrap_or(0.0).max(0.0)
}

/// Orthonormal basis of traceless hermitian N x N matrices under
/// <A, B> = tr(A B): off-diagonal symmetric and antisymmetric pairs plus
/// the diagonal ladder.
fn traceless_hermitian_basis(n: usize) -> Vec<CMatF> {
    let mut basis = Vec::with_capacity(n * n - 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            let mut sym = CMatF::zeros(n, n);
            sym[(i, j)] = Complex64::new(s, 0.0);
            sym[(j, i)] = Complex64::new(s, 0.0);
            basis.push(sym);
            let mut asym = CMatF::zeros(n, n);
            asym[(i, j)] = Complex64::new(0.0, s);
            asym[(j, i)] = Complex64::new(0.0, -s);
            basis.push(asym);
        }
    }
    for k in 1..n {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut d = CMatF::zeros(n, n);
        for i in 0..k {
            d[(i, i)] = Complex64::new(norm, 0.0);
        }
        d[(k, k)] = Complex64::new(-(k as f64) * norm, 0.0);
        basis.push(d);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::basis_vec;
    use crate::instances;
    use crate::permanents::{quantum_permanent, QpRoute};
    use crate::qstate::{choi, cp_from_pairs, PairFamily};

    fn rat(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    fn diag12() -> CpOperator {
        CpOperator::new(
            2,
            vec![(Rational::one(), Matrix::from_int_rows(&[&[1, 0], &[0, 2]]))],
        )
        .unwrap()
    }

    #[test]
    fn local_scale_identity_is_identity() {
        let t = instances::sk3();
        let s = local_scale(&t, &Matrix::identity(3), &Matrix::identity(3)).unwrap();
        assert_eq!(&s, &t);
    }

    #[test]
    fn local_scale_diagonal_example() {
        let t = CpOperator::identity(2);
        let c = Matrix::from_int_rows(&[&[1, 0], &[0, 2]]);
        let s = local_scale(&t, &c, &c).unwrap();
        let out = s.apply(&Matrix::identity(2)).unwrap();
        assert_eq!(out, Matrix::from_int_rows(&[&[1, 0], &[0, 16]]));
    }

    #[test]
    fn lsf_law_exact() {
        // QP(CH(S_{C1,C2}(T))) == |det C1|^2 |det C2|^2 QP(CH(T))
        let p = PairFamily::new(
            2,
            vec![
                (basis_vec(2, 0), basis_vec(2, 0)),
                (basis_vec(2, 1), basis_vec(2, 1)),
                (
                    vec![ComplexRational::from_int(1), ComplexRational::from_int(1)],
                    vec![ComplexRational::from_int(2), ComplexRational::from_int(-1)],
                ),
            ],
        )
        .unwrap();
        let t = cp_from_pairs(&p);
        let c1 = Matrix::from_int_rows(&[&[1, 1], &[0, 2]]);
        let mut c2 = Matrix::from_int_rows(&[&[3, 0], &[1, 1]]);
        c2[(0, 1)] = ComplexRational::from_pair(0, 1);
        let s = local_scale(&t, &c1, &c2).unwrap();
        let qp_t = quantum_permanent(&choi(&t), QpRoute::SignedMixed).unwrap();
        let qp_s = quantum_permanent(&choi(&s), QpRoute::SignedMixed).unwrap();
        let f1 = ComplexRational::from_rational(c1.det_exact().unwrap().norm_sqr());
        let f2 = ComplexRational::from_rational(c2.det_exact().unwrap().norm_sqr());
        assert_eq!(qp_s, &(&f1 * &f2) * &qp_t);
    }

    #[test]
    fn ds_defect_examples() {
        assert_eq!(ds_defect(&instances::sk3()).unwrap(), Rational::zero());
        assert_eq!(ds_defect(&CpOperator::identity(4)).unwrap(), Rational::zero());
        assert_eq!(ds_defect(&diag12()).unwrap(), Rational::from_integer(18.into()));
    }

    #[test]
    fn osi_step_examples() {
        let t = diag12();
        let mut state = ScalingState::fresh(&t).unwrap();
        assert_eq!(state.ds, Rational::from_integer(18.into()));
        osi_step(&t, &mut state).unwrap();
        let expect_p = Matrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => ComplexRational::one(),
            (1, 1) => ComplexRational::from_ratio(1, 4),
            _ => ComplexRational::zero(),
        });
        assert_eq!(state.p, expect_p);
        // after the row step the row side is exactly normalized
        assert_eq!(state.p.matmul(&t.apply(&state.q).unwrap()).unwrap(), Matrix::identity(2));
        osi_step(&t, &mut state).unwrap();
        assert_eq!(state.q, Matrix::identity(2));
        assert_eq!(state.ds, Rational::zero());
        assert_eq!(state.recompute_ds(&t).unwrap(), state.ds);
    }

    #[test]
    fn osi_fixed_point_stays_fixed() {
        let t = instances::sk3();
        let mut state = ScalingState::fresh(&t).unwrap();
        assert_eq!(state.ds, Rational::zero());
        osi_step(&t, &mut state).unwrap();
        assert_eq!(state.p, Matrix::identity(3));
        assert_eq!(state.ds, Rational::zero());
    }

    #[test]
    fn osi_run_reaches_at_iter_zero_for_ds_instances() {
        let run = osi_run(&instances::sk3(), 10, &rat(1, 3), None).unwrap();
        assert!(run.reached);
        assert_eq!(run.state.iter, 0);

        let p = PairFamily::new(2, vec![(basis_vec(2, 0), basis_vec(2, 0)), (basis_vec(2, 1), basis_vec(2, 1))])
            .unwrap();
        let run = osi_run(&cp_from_pairs(&p), 10, &rat(1, 2), None).unwrap();
        assert!(run.reached);
        assert_eq!(run.state.iter, 0);
    }

    #[test]
    fn osi_run_certifies_singular_normalizer() {
        // both x vectors colinear: T(I) has rank 1
        let p = PairFamily::new(2, vec![(basis_vec(2, 0), basis_vec(2, 0)), (basis_vec(2, 0), basis_vec(2, 1))])
            .unwrap();
        let run = osi_run(&cp_from_pairs(&p), 50, &rat(1, 5), None).unwrap();
        assert!(!run.reached);
        let cert = run.state.certificate.expect("singular normalizer witness");
        assert_eq!(cert.step, 1);
        assert_eq!(cert.side, Side::Row);
        assert_eq!(cert.rank, 1);
        // the defect never got under the threshold
        assert!(run.state.log.iter().all(|r| r.ds > rat(1, 5)));
    }

    #[test]
    fn osi_progress_factors_at_least_one_after_first_step() {
        let p = PairFamily::new(
            2,
            vec![
                (basis_vec(2, 0), basis_vec(2, 0)),
                (basis_vec(2, 1), basis_vec(2, 1)),
                (
                    vec![ComplexRational::from_int(1), ComplexRational::from_int(1)],
                    basis_vec(2, 0),
                ),
            ],
        )
        .unwrap();
        let t = cp_from_pairs(&p);
        let run = osi_run(&t, 8, &Rational::zero(), None).unwrap();
        for rec in &run.state.log {
            if rec.iter >= 2 {
                let a = rec.a.as_ref().unwrap();
                assert!(*a >= Rational::one(), "a({}) = {} < 1", rec.iter, a);
            }
        }
    }

    #[test]
    fn rounding_keeps_hermitian_and_bounds_denominators() {
        let mut hm = Matrix::zeros(2, 2);
        hm[(0, 0)] = ComplexRational::from_ratio(2, 3);
        hm[(1, 1)] = ComplexRational::from_ratio(5, 7);
        hm[(0, 1)] = ComplexRational::new(rat(1, 3), rat(2, 7));
        hm[(1, 0)] = hm[(0, 1)].conj();
        let r = round_to_dyadic(&hm, 8);
        assert!(r.is_hermitian());
        for e in r.entries() {
            assert!(e.re.denom() <= &BigInt::from(256));
            assert!(e.im.denom() <= &BigInt::from(256));
        }
    }

    #[test]
    fn capacity_upper_examples() {
        let t = CpOperator::identity(2);
        let run = osi_run(&t, 6, &Rational::zero(), None).unwrap();
        let cap = capacity_upper(&t, &run.state).unwrap();
        assert!((cap - 1.0).abs() < 1e-12);

        let dep = instances::depolarizing(3);
        let run = osi_run(&dep, 6, &Rational::zero(), None).unwrap();
        let cap = capacity_upper(&dep, &run.state).unwrap();
        assert!((cap - 1.0).abs() < 1e-12);

        let sk3 = instances::sk3();
        let run = osi_run(&sk3, 6, &Rational::zero(), None).unwrap();
        let cap = capacity_upper(&sk3, &run.state).unwrap();
        assert!(cap.is_finite() && cap >= 0.0);
    }

    #[test]
    fn cap_tuple_examples() {
        let e0 = basis_vec(2, 0);
        let e1 = basis_vec(2, 1);
        let t = MatrixTuple::new(vec![
            crate::exactmat::outer(&e0, &e0),
            crate::exactmat::outer(&e1, &e1),
        ])
        .unwrap();
        let b = cap_tuple(&t, 200).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12);
        assert!((b.upper - 1.0).abs() < 1e-9);

        let half = Matrix::identity(2).scale_rat(&rat(1, 2));
        let t = MatrixTuple::new(vec![half.clone(), half]).unwrap();
        let b = cap_tuple(&t, 400).unwrap();
        assert!((b.lower - 0.5).abs() < 1e-12);
        assert!((b.upper - 1.0).abs() < 1e-7, "upper = {}", b.upper);

        let t = MatrixTuple::new(vec![Matrix::from_int_rows(&[&[5, 1], &[1, 5]]), Matrix::zeros(2, 2)])
            .unwrap();
        let b = cap_tuple(&t, 100).unwrap();
        assert_eq!(b.lower, 0.0);
        assert_eq!(b.upper, 0.0);

        let bad = MatrixTuple::new(vec![Matrix::from_int_rows(&[&[1, 0], &[0, -1]]), Matrix::identity(2)])
            .unwrap();
        assert!(matches!(cap_tuple(&bad, 10), Err(ScalingError::NotPsdTuple(0))));
    }

    #[test]
    fn float_run_on_ds_operator_stays_at_zero() {
        let tf = CpOperatorF::from_exact(&instances::sk3());
        let run = osi_run_f(&tf, 50, 1e-30);
        assert!(run.reached);
        assert_eq!(run.state.iter, 0);
        assert!(run.state.ds.abs() < 1e-30);
    }

    #[test]
    fn float_run_converges_on_scaled_sk3() {
        let c1 = Matrix::from_int_rows(&[&[2, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        let c2 = Matrix::from_int_rows(&[&[1, 1, 0], &[0, 3, 0], &[0, 1, 2]]);
        let t = local_scale(&instances::sk3(), &c1, &c2).unwrap();
        let run = osi_run_f(&CpOperatorF::from_exact(&t), 200, 1e-10);
        assert!(run.reached, "ds trajectory tail: {:?}", run.state.log.last());
    }

    #[test]
    fn extract_ds_scaling_examples() {
        // already doubly stochastic, C = I: unchanged, defect zero
        let (s, ds) = extract_ds_scaling(&instances::sk3(), &CMatF::identity(3)).unwrap();
        assert!(ds < 1e-20);
        let _ = s;

        // identity map, any det-1 positive definite C: algebraic cancellation
        let c = {
            let m = CMatF::from_exact(&Matrix::from_int_rows(&[&[2, 1], &[1, 1]]));
            m.scale(Complex64::new(1.0 / m.lu_det().re.sqrt(), 0.0))
        };
        let (_, ds) = extract_ds_scaling(&CpOperator::identity(2), &c).unwrap();
        assert!(ds < 1e-12, "ds = {ds}");

        // a scaling candidate from the trajectory strictly improves diag(1,2)
        let t = diag12();
        let ds0 = ds_defect(&t).unwrap().to_f64().unwrap();
        let run = osi_run_f(&CpOperatorF::from_exact(&t), 3, 1e-30);
        let q = &run.state.q;
        let det = q.lu_det().re;
        let c = q.scale(Complex64::new(1.0 / det.powf(0.5), 0.0));
        let (_, ds) = extract_ds_scaling(&t, &c).unwrap();
        assert!(ds < ds0, "ds {ds} vs initial {ds0}");

        // singular T(C) is rejected
        let p = PairFamily::new(2, vec![(basis_vec(2, 0), basis_vec(2, 0))]).unwrap();
        let t = cp_from_pairs(&p);
        assert!(matches!(
            extract_ds_scaling(&t, &CMatF::identity(2)),
            Err(ScalingError::RankDeficient(_))
        ));
    }

    #[test]
    fn indecomposability_examples() {
        let a_id = indecomposability_coefficient(&CpOperator::identity(3));
        assert!((a_id - 1.0).abs() < 1e-9, "identity: {a_id}");

        let a_dep = indecomposability_coefficient(&instances::depolarizing(3));
        assert!(a_dep.abs() < 1e-18, "depolarizing: {a_dep}");

        // on traceless hermitian input the skew map halves every matrix,
        // so the coefficient is exactly 1/4
        let a_sk3 = indecomposability_coefficient(&instances::sk3());
        assert!((a_sk3 - 0.25).abs() < 1e-9, "sk3: {a_sk3}");
        assert!(a_sk3 < 1.0);
    }
}
