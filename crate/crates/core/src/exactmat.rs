//! Exact complex-rational scalars and dense matrices.
//!
//! Everything downstream works over the field Q(i): arbitrary-precision
//! rationals for the real and imaginary parts, kept normalized (positive
//! denominators, lowest terms) after every operation. Determinants, ranks
//! and inverses use fraction-free Bareiss elimination so that integer
//! inputs stay integer while eliminating; positive semidefiniteness is
//! decided exactly from the characteristic polynomial, with no square
//! roots or floating point anywhere on the decision path.

use std::fmt;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error)]
pub enum MatError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {lhs} vs {rhs}")]
    DimMismatch { lhs: String, rhs: String },
    #[error("singular matrix (det = {det})")]
    Singular { det: Box<ComplexRational> },
    #[error("matrix is not hermitian")]
    NotHermitian,
    #[error("bad matrix data: {0}")]
    BadData(String),
}

/// An element of Q(i): exact rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ComplexRational {
    pub re: Rational,
    pub im: Rational,
}

impl ComplexRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn from_rational(re: Rational) -> Self {
        Self { re, im: Rational::zero() }
    }

    pub fn from_int(re: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(re)))
    }

    pub fn from_pair(re: i64, im: i64) -> Self {
        Self {
            re: Rational::from_integer(BigInt::from(re)),
            im: Rational::from_integer(BigInt::from(im)),
        }
    }

    /// `p/q` as a real value. Panics if `q == 0`.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::from_rational(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        Self::from_pair(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    /// |z|^2 = re^2 + im^2, an exact nonnegative rational.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        assert!(!n.is_zero(), "division by zero complex rational");
        Self { re: &self.re / &n, im: -(&self.im / &n) }
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.re.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.im.is_negative() {
            write!(f, "{} - {} i", self.re, -self.im.clone())
        } else {
            write!(f, "{} + {} i", self.re, self.im)
        }
    }
}

impl fmt::Debug for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for &ComplexRational {
    type Output = ComplexRational;
    fn add(self, rhs: &ComplexRational) -> ComplexRational {
        ComplexRational { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub for &ComplexRational {
    type Output = ComplexRational;
    fn sub(self, rhs: &ComplexRational) -> ComplexRational {
        ComplexRational { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul for &ComplexRational {
    type Output = ComplexRational;
    fn mul(self, rhs: &ComplexRational) -> ComplexRational {
        ComplexRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for &ComplexRational {
    type Output = ComplexRational;
    #[allow(clippy::suspicious_arithmetic_impl)] // z / w = z * w^-1
    fn div(self, rhs: &ComplexRational) -> ComplexRational {
        self * &rhs.inv()
    }
}

impl Neg for &ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational { re: -self.re.clone(), im: -self.im.clone() }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ComplexRational {
            type Output = ComplexRational;
            fn $method(self, rhs: ComplexRational) -> ComplexRational {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);
forward_owned_binop!(Div, div);

impl Neg for ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        -&self
    }
}

// Wire encoding: [["num","den"],["num","den"]] with decimal strings.
impl Serialize for ComplexRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let enc = |r: &Rational| (r.numer().to_string(), r.denom().to_string());
        (enc(&self.re), enc(&self.im)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ((rn, rd), (inum, iden)): ((String, String), (String, String)) =
            Deserialize::deserialize(d)?;
        let parse = |num: &str, den: &str| -> Result<Rational, D::Error> {
            let n: BigInt = num.parse().map_err(|_| D::Error::custom(format!("bad numerator {num:?}")))?;
            let d: BigInt = den.parse().map_err(|_| D::Error::custom(format!("bad denominator {den:?}")))?;
            if d.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            Ok(Rational::new(n, d))
        };
        Ok(ComplexRational { re: parse(&rn, &rd)?, im: parse(&inum, &iden)? })
    }
}

/// Parse a rational from a `p` or `p/q` decimal string.
pub fn parse_rational(s: &str) -> Result<Rational, MatError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| MatError::BadData(format!("bad numerator in {s:?}")))?;
    let d: BigInt = den.parse().map_err(|_| MatError::BadData(format!("bad denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(MatError::BadData(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Dense row-major matrix over Q(i).
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<ComplexRational>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<ComplexRational>) -> Result<Self, MatError> {
        if entries.len() != rows * cols {
            return Err(MatError::BadData(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![ComplexRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ComplexRational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ComplexRational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    /// Integer test matrices: `Matrix::from_int_rows(&[&[1, 0], &[0, 1]])`.
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| ComplexRational::from_int(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[ComplexRational] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn is_hermitian(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if self[(i, j)] != self[(j, i)].conj() {
                    return false;
                }
            }
        }
        true
    }

    /// Real entries and M == M^T.
    pub fn is_real_symmetric(&self) -> bool {
        self.is_square()
            && self.entries.iter().all(|e| e.is_real())
            && (0..self.rows).all(|i| (i..self.cols).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix, MatError> {
        self.check_same_shape(rhs)?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &rhs[(i, j)]))
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix, MatError> {
        self.check_same_shape(rhs)?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &rhs[(i, j)]))
    }

    pub fn neg(&self) -> Matrix {
        Self::from_fn(self.rows, self.cols, |i, j| -&self[(i, j)])
    }

    pub fn scale(&self, c: &ComplexRational) -> Matrix {
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] * c)
    }

    pub fn scale_rat(&self, c: &Rational) -> Matrix {
        self.scale(&ComplexRational::from_rational(c.clone()))
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix, MatError> {
        if self.cols != rhs.rows {
            return Err(MatError::DimMismatch {
                lhs: format!("{}x{}", self.rows, self.cols),
                rhs: format!("{}x{}", rhs.rows, rhs.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a * b;
                    out[(i, j)] = &out[(i, j)] + &prod;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Result<ComplexRational, MatError> {
        if !self.is_square() {
            return Err(MatError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let mut t = ComplexRational::zero();
        for i in 0..self.rows {
            t = &t + &self[(i, i)];
        }
        Ok(t)
    }

    /// Kronecker product with block convention (A (x) B)(i1*n2+i2, j1*m2+j2) = A(i1,j1) B(i2,j2).
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        let (r1, c1, r2, c2) = (self.rows, self.cols, rhs.rows, rhs.cols);
        Matrix::from_fn(r1 * r2, c1 * c2, |i, j| {
            &self[(i / r2, j / c2)] * &rhs[(i % r2, j % c2)]
        })
    }

    fn check_same_shape(&self, rhs: &Matrix) -> Result<(), MatError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(MatError::DimMismatch {
                lhs: format!("{}x{}", self.rows, self.cols),
                rhs: format!("{}x{}", rhs.rows, rhs.cols),
            });
        }
        Ok(())
    }

    fn check_square(&self) -> Result<usize, MatError> {
        if !self.is_square() {
            return Err(MatError::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(self.rows)
    }

    /// Exact determinant by fraction-free Bareiss elimination.
    pub fn det_exact(&self) -> Result<ComplexRational, MatError> {
        let n = self.check_square()?;
        if n == 0 {
            return Ok(ComplexRational::one());
        }
        let mut a = self.entries.clone();
        let at = |a: &[ComplexRational], i: usize, j: usize| a[i * n + j].clone();
        let mut sign_flip = false;
        let mut prev = ComplexRational::one();
        for k in 0..n - 1 {
            // pivot search
            let pivot = (k..n).find(|&r| !a[r * n + k].is_zero());
            let Some(r) = pivot else {
                return Ok(ComplexRational::zero());
            };
            if r != k {
                for j in 0..n {
                    a.swap(r * n + j, k * n + j);
                }
                sign_flip = !sign_flip;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&at(&a, k, k) * &at(&a, i, j)) - &(&at(&a, i, k) * &at(&a, k, j));
                    a[i * n + j] = &num / &prev;
                }
                a[i * n + k] = ComplexRational::zero();
            }
            prev = at(&a, k, k);
        }
        let d = at(&a, n - 1, n - 1);
        Ok(if sign_flip { -&d } else { d })
    }

    /// Exact rank over Q(i).
    pub fn rank_exact(&self) -> usize {
        let (m, n) = (self.rows, self.cols);
        if m == 0 || n == 0 {
            return 0;
        }
        let mut a = self.entries.clone();
        let mut rank = 0usize;
        let mut prev = ComplexRational::one();
        for col in 0..n {
            if rank == m {
                break;
            }
            let Some(r) = (rank..m).find(|&r| !a[r * n + col].is_zero()) else {
                continue;
            };
            if r != rank {
                for j in 0..n {
                    a.swap(r * n + j, rank * n + j);
                }
            }
            let pivot = a[rank * n + col].clone();
            for i in rank + 1..m {
                for j in col + 1..n {
                    let num = &(&pivot * &a[i * n + j]) - &(&a[i * n + col] * &a[rank * n + j]);
                    a[i * n + j] = &num / &prev;
                }
                a[i * n + col] = ComplexRational::zero();
            }
            prev = pivot;
            rank += 1;
        }
        rank
    }

    /// Exact inverse; fails with the (zero) determinant on singular input.
    pub fn inverse_exact(&self) -> Result<Matrix, MatError> {
        let n = self.check_square()?;
        if n == 0 {
            return Ok(Matrix::zeros(0, 0));
        }
        // Bareiss forward elimination on [A | I], then exact back substitution.
        let w = 2 * n;
        let mut a = vec![ComplexRational::zero(); n * w];
        for i in 0..n {
            for j in 0..n {
                a[i * w + j] = self[(i, j)].clone();
            }
            a[i * w + n + i] = ComplexRational::one();
        }
        let mut prev = ComplexRational::one();
        for k in 0..n {
            let Some(r) = (k..n).find(|&r| !a[r * w + k].is_zero()) else {
                return Err(MatError::Singular { det: Box::new(ComplexRational::zero()) });
            };
            if r != k {
                for j in 0..w {
                    a.swap(r * w + j, k * w + j);
                }
            }
            let pivot = a[k * w + k].clone();
            for i in k + 1..n {
                for j in k + 1..w {
                    let num = &(&pivot * &a[i * w + j]) - &(&a[i * w + k] * &a[k * w + j]);
                    a[i * w + j] = &num / &prev;
                }
                a[i * w + k] = ComplexRational::zero();
            }
            prev = pivot;
        }
        // back substitution: U x = rhs with U upper triangular in the left block
        let mut inv = Matrix::zeros(n, n);
        for col in 0..n {
            for i in (0..n).rev() {
                let mut acc = a[i * w + n + col].clone();
                for j in i + 1..n {
                    let t = &a[i * w + j] * &inv[(j, col)];
                    acc = &acc - &t;
                }
                inv[(i, col)] = &acc / &a[i * w + i];
            }
        }
        Ok(inv)
    }

    /// Monic characteristic polynomial det(xI - M), coefficients `c[0..=n]`
    /// with `c[n] == 1`, by the Faddeev-LeVerrier recursion (exact).
    pub fn char_poly(&self) -> Result<Vec<ComplexRational>, MatError> {
        let n = self.check_square()?;
        let mut coeffs = vec![ComplexRational::zero(); n + 1];
        coeffs[n] = ComplexRational::one();
        if n == 0 {
            return Ok(coeffs);
        }
        let mut mk = self.clone();
        let mut c = -&mk.trace()?;
        coeffs[n - 1] = c.clone();
        for k in 2..=n {
            // M_k = M (M_{k-1} + c I)
            let mut shifted = mk;
            for i in 0..n {
                shifted[(i, i)] = &shifted[(i, i)] + &c;
            }
            mk = self.matmul(&shifted)?;
            let t = mk.trace()?;
            let k_rat = ComplexRational::from_int(k as i64);
            c = -&(&t / &k_rat);
            coeffs[n - k] = c.clone();
        }
        Ok(coeffs)
    }

    /// Exact positive-semidefiniteness test for hermitian matrices.
    ///
    /// All eigenvalues of a hermitian matrix are real, so M >= 0 exactly
    /// when the characteristic polynomial x^n + c_{n-1} x^{n-1} + ... + c_0
    /// has weakly alternating coefficient signs: (-1)^{n-k} c_k >= 0.
    pub fn psd_check(&self) -> Result<bool, MatError> {
        if !self.is_hermitian() {
            return Err(MatError::NotHermitian);
        }
        let n = self.rows;
        let coeffs = self.char_poly()?;
        for (k, c) in coeffs.iter().enumerate().take(n) {
            debug_assert!(c.is_real(), "hermitian char poly must be real");
            let want_nonneg = (n - k).is_multiple_of(2);
            if want_nonneg && c.re.is_negative() {
                return Ok(false);
            }
            if !want_nonneg && c.re.is_positive() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// LCM of all entry denominators (re and im parts).
    pub fn denominator_lcm(&self) -> BigInt {
        let mut l = BigInt::one();
        for e in &self.entries {
            l = num_integer::lcm(l, e.re.denom().clone());
            l = num_integer::lcm(l, e.im.denom().clone());
        }
        l
    }

    /// Largest |numerator| over re/im parts of all entries. Meaningful after
    /// denominators have been cleared.
    pub fn max_abs_numerator(&self) -> BigInt {
        let mut m = BigInt::zero();
        for e in &self.entries {
            for part in [&e.re, &e.im] {
                let a = part.numer().abs();
                if a > m {
                    m = a;
                }
            }
        }
        m
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = ComplexRational;
    fn index(&self, (i, j): (usize, usize)) -> &ComplexRational {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ComplexRational {
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{}", self[(i, j)])?;
                if j + 1 < self.cols {
                    write!(f, ", ")?;
                }
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Outer product x y^dagger of two vectors.
pub fn outer(x: &[ComplexRational], y: &[ComplexRational]) -> Matrix {
    Matrix::from_fn(x.len(), y.len(), |i, j| &x[i] * &y[j].conj())
}

/// Standard inner product x^dagger y.
pub fn vec_inner(x: &[ComplexRational], y: &[ComplexRational]) -> ComplexRational {
    let mut acc = ComplexRational::zero();
    for (a, b) in x.iter().zip(y) {
        let t = &a.conj() * b;
        acc = &acc + &t;
    }
    acc
}

/// Standard basis column vector e_i of length n.
pub fn basis_vec(n: usize, i: usize) -> Vec<ComplexRational> {
    let mut v = vec![ComplexRational::zero(); n];
    v[i] = ComplexRational::one();
    v
}

// --- serde for Matrix: {"rows":N,"cols":M,"entries":[[entry,...],...]} ---

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<ComplexRational>>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].clone()).collect())
            .collect();
        MatrixRepr { rows: self.rows, cols: self.cols, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        if repr.entries.len() != repr.rows {
            return Err(D::Error::custom(format!(
                "entries has {} rows, header says {}",
                repr.entries.len(),
                repr.rows
            )));
        }
        for (i, row) in repr.entries.iter().enumerate() {
            if row.len() != repr.cols {
                return Err(D::Error::custom(format!(
                    "entries row {i} has {} columns, header says {}",
                    row.len(),
                    repr.cols
                )));
            }
        }
        Ok(Matrix {
            rows: repr.rows,
            cols: repr.cols,
            entries: repr.entries.into_iter().flatten().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ci(re: i64) -> ComplexRational {
        ComplexRational::from_int(re)
    }

    #[test]
    fn det_identity_and_diagonal() {
        assert_eq!(Matrix::identity(3).det_exact().unwrap(), ci(1));
        let d = Matrix::from_int_rows(&[&[2, 0], &[0, 3]]);
        assert_eq!(d.det_exact().unwrap(), ci(6));
    }

    #[test]
    fn det_singular_example() {
        // the 2x2 matrix with columns (0,0) and (-2,1) is singular
        let a = Matrix::from_int_rows(&[&[0, -2], &[0, 1]]);
        assert_eq!(a.det_exact().unwrap(), ci(0));
        assert_eq!(a.rank_exact(), 1);
    }

    #[test]
    fn det_rejects_non_square() {
        let m = Matrix::zeros(2, 3);
        assert!(matches!(m.det_exact(), Err(MatError::NotSquare { .. })));
    }

    #[test]
    fn rank_cases() {
        assert_eq!(Matrix::zeros(3, 3).rank_exact(), 0);
        assert_eq!(Matrix::identity(4).rank_exact(), 4);
        let m = Matrix::from_int_rows(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]]);
        assert_eq!(m.rank_exact(), 2);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Matrix::identity(2).inverse_exact().unwrap(), Matrix::identity(2));
        let d = Matrix::from_int_rows(&[&[2, 0], &[0, 4]]);
        let inv = d.inverse_exact().unwrap();
        assert_eq!(inv[(0, 0)], ComplexRational::from_ratio(1, 2));
        assert_eq!(inv[(1, 1)], ComplexRational::from_ratio(1, 4));
        let u = Matrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        let expect = Matrix::from_int_rows(&[&[1, -1], &[0, 1]]);
        assert_eq!(u.inverse_exact().unwrap(), expect);
    }

    #[test]
    fn inverse_singular_carries_det() {
        let a = Matrix::from_int_rows(&[&[0, -2], &[0, 1]]);
        match a.inverse_exact() {
            Err(MatError::Singular { det }) => assert!(det.is_zero()),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = Matrix::from_fn(3, 3, |i, j| {
            if i == j {
                ComplexRational::from_pair(2, 0)
            } else {
                ComplexRational::from_pair(i as i64 - j as i64, 1)
            }
        });
        let inv = m.inverse_exact().unwrap();
        assert_eq!(m.matmul(&inv).unwrap(), Matrix::identity(3));
        assert_eq!(inv.matmul(&m).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn psd_examples() {
        assert!(Matrix::identity(4).psd_check().unwrap());
        let ind = Matrix::from_int_rows(&[&[1, 0], &[0, -1]]);
        assert!(!ind.psd_check().unwrap());
        let pd = Matrix::from_int_rows(&[&[2, 1], &[1, 2]]);
        assert!(pd.psd_check().unwrap());
        // PSD with zero eigenvalue
        let sing = Matrix::from_int_rows(&[&[1, 1], &[1, 1]]);
        assert!(sing.psd_check().unwrap());
    }

    #[test]
    fn psd_rejects_non_hermitian() {
        let m = Matrix::from_int_rows(&[&[0, 1], &[0, 0]]);
        assert!(matches!(m.psd_check(), Err(MatError::NotHermitian)));
    }

    #[test]
    fn psd_complex_hermitian() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3
        let mut m = Matrix::zeros(2, 2);
        m[(0, 0)] = ci(2);
        m[(1, 1)] = ci(2);
        m[(0, 1)] = ComplexRational::i();
        m[(1, 0)] = -&ComplexRational::i();
        assert!(m.is_hermitian());
        assert!(m.psd_check().unwrap());
        // [[1, 2i],[-2i, 1]] has eigenvalues -1 and 3
        let mut w = Matrix::zeros(2, 2);
        w[(0, 0)] = ci(1);
        w[(1, 1)] = ci(1);
        w[(0, 1)] = ComplexRational::from_pair(0, 2);
        w[(1, 0)] = ComplexRational::from_pair(0, -2);
        assert!(!w.psd_check().unwrap());
    }

    #[test]
    fn char_poly_known() {
        // [[2,1],[1,2]]: x^2 - 4x + 3
        let m = Matrix::from_int_rows(&[&[2, 1], &[1, 2]]);
        let p = m.char_poly().unwrap();
        assert_eq!(p, vec![ci(3), ci(-4), ci(1)]);
    }

    #[test]
    fn kron_block_convention() {
        let a = Matrix::from_int_rows(&[&[1, 2], &[3, 4]]);
        let b = Matrix::from_int_rows(&[&[0, 5], &[6, 7]]);
        let k = a.kron(&b);
        assert_eq!(k[(0, 1)], ci(5)); // A(0,0) * B(0,1)
        assert_eq!(k[(2, 0)], ci(0)); // A(1,0) * B(0,0)
        assert_eq!(k[(3, 3)], ci(4 * 7));
    }

    #[test]
    fn display_formats() {
        assert_eq!(ComplexRational::from_ratio(3, 2).to_string(), "3/2");
        assert_eq!(ci(-4).to_string(), "-4");
        let z = ComplexRational::new(
            Rational::new(BigInt::from(1), BigInt::from(2)),
            Rational::new(BigInt::from(-3), BigInt::from(4)),
        );
        assert_eq!(z.to_string(), "1/2 - 3/4 i");
        assert_eq!(ComplexRational::i().to_string(), "0 + 1 i");
    }

    #[test]
    fn serde_round_trip() {
        let m = Matrix::from_fn(2, 3, |i, j| ComplexRational::from_ratio(i as i64 + 1, j as i64 + 2));
        let s = serde_json::to_string(&m).unwrap();
        let back: Matrix = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn serde_rejects_bad_shape() {
        let bad = r#"{"rows":2,"cols":2,"entries":[[[["1","1"],["0","1"]]]]}"#;
        assert!(serde_json::from_str::<Matrix>(bad).is_err());
    }

    #[test]
    fn parse_rational_strings() {
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(BigInt::from(3)));
        assert_eq!(parse_rational("-6/4").unwrap(), Rational::new(BigInt::from(-3), BigInt::from(2)));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
