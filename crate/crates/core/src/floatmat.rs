//! Complex double-precision kernels backing the float arithmetic mode:
//! LU determinants and inverses, a cyclic Jacobi eigensolver for hermitian
//! matrices, Cholesky factors, and PSD square roots. Desk-scale dense code,
//! no external linear algebra backend.

use num_complex::Complex64;

use crate::exactmat::Matrix;

/// Dense row-major complex f64 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatF {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

impl CMatF {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_exact(m: &Matrix) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].to_c64())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn add(&self, rhs: &CMatF) -> CMatF {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &CMatF) -> CMatF {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn scale(&self, c: Complex64) -> CMatF {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * c)
    }

    pub fn matmul(&self, rhs: &CMatF) -> CMatF {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatF {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn lu_det(&self) -> Complex64 {
        assert!(self.rows == self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return ONE;
        }
        let mut a = self.clone();
        let mut det = ONE;
        for k in 0..n {
            let (r, mx) = (k..n)
                .map(|r| (r, a[(r, k)].norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if mx == 0.0 {
                return ZERO;
            }
            if r != k {
                for j in 0..n {
                    let t = a[(r, j)];
                    a[(r, j)] = a[(k, j)];
                    a[(k, j)] = t;
                }
                det = -det;
            }
            let pivot = a[(k, k)];
            det *= pivot;
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                for j in k..n {
                    let t = f * a[(k, j)];
                    a[(i, j)] -= t;
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse with partial pivoting; `None` when a pivot
    /// falls below `tol` times the largest entry magnitude.
    pub fn inverse(&self, tol: f64) -> Option<CMatF> {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        let mut a = self.clone();
        let mut inv = CMatF::identity(n);
        for k in 0..n {
            let (r, mx) = (k..n)
                .map(|r| (r, a[(r, k)].norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if mx <= tol * scale {
                return None;
            }
            if r != k {
                for j in 0..n {
                    let (x, y) = (a[(r, j)], a[(k, j)]);
                    a[(r, j)] = y;
                    a[(k, j)] = x;
                    let (x, y) = (inv[(r, j)], inv[(k, j)]);
                    inv[(r, j)] = y;
                    inv[(k, j)] = x;
                }
            }
            let p = a[(k, k)];
            for j in 0..n {
                a[(k, j)] /= p;
                inv[(k, j)] /= p;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let t = f * a[(k, j)];
                    a[(i, j)] -= t;
                    let t = f * inv[(k, j)];
                    inv[(i, j)] -= t;
                }
            }
        }
        Some(inv)
    }

    /// Eigendecomposition of a hermitian matrix by cyclic Jacobi rotations.
    /// Returns eigenvalues in ascending order and the matching unitary
    /// (eigenvectors as columns).
    pub fn hermitian_eig(&self) -> (Vec<f64>, CMatF) {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut v = CMatF::identity(n);
        let scale = self.frob_norm().max(1e-300);
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= 1e-14 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let z = a[(p, q)];
                    let az = z.norm();
                    if az <= 1e-300 {
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * az);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s1 = (z / az) * (t * c);
                    // A <- U* A U with U = [[c, s1], [-conj(s1), c]] on (p, q)
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * c - akq * s1.conj();
                        a[(k, q)] = akp * s1 + akq * c;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = apk * c - aqk * s1;
                        a[(q, k)] = apk * s1.conj() + aqk * c;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c - vkq * s1.conj();
                        v[(k, q)] = vkp * s1 + vkq * c;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
        let evals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let vecs = CMatF::from_fn(n, n, |i, j| v[(i, order[j])]);
        (evals, vecs)
    }

    /// Lower-triangular Cholesky factor of a hermitian positive definite
    /// matrix: `A = L L*`. `None` if a pivot is not strictly positive.
    pub fn cholesky(&self) -> Option<CMatF> {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let mut l = CMatF::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d <= 0.0 {
                return None;
            }
            let dj = d.sqrt();
            l[(j, j)] = Complex64::new(dj, 0.0);
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / dj;
            }
        }
        Some(l)
    }

    /// Hermitian PSD square root via eigendecomposition; tiny negative
    /// eigenvalues are clamped to zero.
    pub fn hermitian_sqrt(&self) -> CMatF {
        self.hermitian_apply(|x| x.max(0.0).sqrt())
    }

    /// Inverse square root of a hermitian positive definite matrix; `None`
    /// when the smallest eigenvalue is numerically nonpositive.
    pub fn hermitian_invsqrt(&self) -> Option<CMatF> {
        let (evals, u) = self.hermitian_eig();
        let lo = *evals.first()?;
        let hi = evals.last().copied().unwrap_or(0.0);
        if lo <= 1e-12 * hi.max(1.0) {
            return None;
        }
        Some(Self::recompose(&evals, &u, |x| 1.0 / x.sqrt()))
    }

    fn hermitian_apply(&self, f: impl Fn(f64) -> f64) -> CMatF {
        let (evals, u) = self.hermitian_eig();
        Self::recompose(&evals, &u, f)
    }

    fn recompose(evals: &[f64], u: &CMatF, f: impl Fn(f64) -> f64) -> CMatF {
        let n = evals.len();
        let mut scaled = u.clone();
        for j in 0..n {
            let fj = f(evals[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled.matmul(&u.adjoint())
    }
}

impl std::ops::Index<(usize, usize)> for CMatF {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatF {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lu_det_known() {
        let m = CMatF::from_fn(2, 2, |i, j| c([[1.0, 3.0], [2.0, 4.0]][i][j], 0.0));
        assert!((m.lu_det().re - (-2.0)).abs() < 1e-12);
        assert!(CMatF::identity(5).lu_det().norm() - 1.0 < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        let m = CMatF::from_fn(3, 3, |i, j| c((i * 3 + j) as f64, if i == j { 2.0 } else { -0.5 }));
        let inv = m.inverse(1e-12).unwrap();
        let prod = m.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)].re - want).abs() < 1e-10);
                assert!(prod[(i, j)].im.abs() < 1e-10);
            }
        }
        assert!(CMatF::zeros(2, 2).inverse(1e-12).is_none());
    }

    #[test]
    fn jacobi_real_symmetric() {
        let m = CMatF::from_fn(2, 2, |i, j| c(if i == j { 2.0 } else { 1.0 }, 0.0));
        let (evals, _) = m.hermitian_eig();
        assert!((evals[0] - 1.0).abs() < 1e-12);
        assert!((evals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_complex_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let mut m = CMatF::zeros(2, 2);
        m[(0, 0)] = c(2.0, 0.0);
        m[(1, 1)] = c(2.0, 0.0);
        m[(0, 1)] = c(0.0, 1.0);
        m[(1, 0)] = c(0.0, -1.0);
        let (evals, u) = m.hermitian_eig();
        assert!((evals[0] - 1.0).abs() < 1e-12);
        assert!((evals[1] - 3.0).abs() < 1e-12);
        // residual check A u_j = lambda_j u_j
        for j in 0..2 {
            for i in 0..2 {
                let av: Complex64 = (0..2).map(|k| m[(i, k)] * u[(k, j)]).sum();
                let lv = u[(i, j)] * evals[j];
                assert!((av - lv).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn jacobi_matches_trace_invariants() {
        // pseudo-random hermitian 5x5
        let mut seed = 0x9e3779b9u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (1u64 << 31) as f64 - 1.0
        };
        let n = 5;
        let mut m = CMatF::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(next(), 0.0);
            for j in i + 1..n {
                let z = c(next(), next());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        let (evals, _) = m.hermitian_eig();
        let tr: f64 = (0..n).map(|i| m[(i, i)].re).sum();
        let tr2: f64 = m.matmul(&m).trace().re;
        assert!((evals.iter().sum::<f64>() - tr).abs() < 1e-9);
        assert!((evals.iter().map(|x| x * x).sum::<f64>() - tr2).abs() < 1e-9);
    }

    #[test]
    fn cholesky_and_invsqrt() {
        let mut m = CMatF::zeros(2, 2);
        m[(0, 0)] = c(4.0, 0.0);
        m[(0, 1)] = c(1.0, 1.0);
        m[(1, 0)] = c(1.0, -1.0);
        m[(1, 1)] = c(3.0, 0.0);
        let l = m.cholesky().unwrap();
        let back = l.matmul(&l.adjoint());
        assert!(back.sub(&m).frob_norm() < 1e-12);
        let s = m.hermitian_invsqrt().unwrap();
        let prod = s.matmul(&m).matmul(&s);
        assert!(prod.sub(&CMatF::identity(2)).frob_norm() < 1e-10);
    }
}
