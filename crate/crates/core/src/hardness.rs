//! The arrowhead block-matrix gadget and its optimization identity,
//! exercised numerically on unit-sphere grids at desk scale.
//!
//! The gadget is the MN x MN hermitian block matrix whose first block row
//! and column carry real symmetric matrices A_1 .. A_{M-1} and whose
//! other blocks vanish. Pairing it with a product state reduces to the
//! arrowhead M x M matrix A(y) with first row (0, a_1, ..., a_{M-1}),
//! a_i = y^T A_i y. An arrowhead of that shape has exactly two nonzero
//! eigenvalues, +d and -d with d = ||a||, so its largest eigenvalue is
//! sqrt(sum_i (y^T A_i y)^2) pointwise. The two grid maxima reported
//! here keep both readings visible: `gadget_value_lhs` maximizes the
//! eigenvalue, `gadget_value_rhs` maximizes the squared sum.

use num_complex::Complex64;
use thiserror::Error;

use crate::exactmat::{ComplexRational, Matrix};
use crate::floatmat::CMatF;

#[derive(Debug, Error)]
pub enum GadgetError {
    #[error("gadget matrix {index} is not real symmetric")]
    NotRealSymmetric { index: usize },
    #[error("gadget matrices must share one dimension; entry {index} is {rows}x{cols}")]
    MixedDimensions { index: usize, rows: usize, cols: usize },
    #[error("grid search supports local dimension 2 or 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("gadget needs at least one matrix")]
    Empty,
}

/// M-1 real symmetric N x N rational matrices, the data of the arrowhead
/// block gadget.
#[derive(Clone, Debug)]
pub struct Gadget {
    m: usize,
    n: usize,
    a_list: Vec<Matrix>,
}

impl Gadget {
    pub fn new(a_list: Vec<Matrix>) -> Result<Self, GadgetError> {
        let Some(first) = a_list.first() else {
            return Err(GadgetError::Empty);
        };
        let n = first.rows();
        for (index, a) in a_list.iter().enumerate() {
            if a.rows() != n || a.cols() != n {
                return Err(GadgetError::MixedDimensions {
                    index,
                    rows: a.rows(),
                    cols: a.cols(),
                });
            }
            if !a.is_real_symmetric() {
                return Err(GadgetError::NotRealSymmetric { index });
            }
        }
        Ok(Self { m: a_list.len() + 1, n, a_list })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a_list(&self) -> &[Matrix] {
        &self.a_list
    }
}

/// Assemble the MN x MN hermitian block matrix: block (0, j) and (j, 0)
/// carry A_j for j >= 1, everything else is zero. Its trace vanishes.
pub fn build_gadget(g: &Gadget) -> Matrix {
    let (m, n) = (g.m, g.n);
    Matrix::from_fn(m * n, m * n, |r, c| {
        let (bi, i2) = (r / n, r % n);
        let (bj, j2) = (c / n, c % n);
        if bi == 0 && bj >= 1 {
            g.a_list[bj - 1][(i2, j2)].clone()
        } else if bj == 0 && bi >= 1 {
            g.a_list[bi - 1][(i2, j2)].clone()
        } else {
            ComplexRational::zero()
        }
    })
}

/// The arrowhead matrix A(y): first row and column hold a_i = y^T A_i y.
pub fn arrowhead_at(g: &Gadget, y: &[f64]) -> CMatF {
    let m = g.m;
    let a: Vec<f64> = g.a_list.iter().map(|ai| quad_form(ai, y)).collect();
    CMatF::from_fn(m, m, |i, j| {
        let v = if i == 0 && j >= 1 {
            a[j - 1]
        } else if j == 0 && i >= 1 {
            a[i - 1]
        } else {
            0.0
        };
        Complex64::new(v, 0.0)
    })
}

fn quad_form(a: &Matrix, y: &[f64]) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += y[i] * a[(i, j)].to_f64() * y[j];
        }
    }
    acc
}

/// Largest eigenvalue of A(y), by the float eigensolver.
pub fn arrowhead_lambda_max(g: &Gadget, y: &[f64]) -> f64 {
    let (evals, _) = arrowhead_at(g, y).hermitian_eig();
    evals.last().copied().unwrap_or(0.0)
}

/// The squared form sum_i (y^T A_i y)^2 at y.
pub fn quad_form_sum_sq(g: &Gadget, y: &[f64]) -> f64 {
    g.a_list.iter().map(|ai| quad_form(ai, y).powi(2)).sum()
}

/// Deterministic unit-sphere grid: uniform angles on the circle for
/// N = 2, a Fibonacci lattice on the sphere for N = 3.
pub fn grid_points(n: usize, grid: usize) -> Result<Vec<Vec<f64>>, GadgetError> {
    let grid = grid.max(1);
    match n {
        2 => Ok((0..grid)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / grid as f64;
                vec![theta.cos(), theta.sin()]
            })
            .collect()),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            Ok((0..grid)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / grid as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect())
        }
        other => Err(GadgetError::UnsupportedDimension(other)),
    }
}

/// A grid maximum together with its argmax direction.
#[derive(Clone, Debug)]
pub struct GadgetValue {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// Max over the sphere of the largest eigenvalue of A(y), refined by grid
/// doubling until two successive maxima agree to 1e-6.
pub fn gadget_value_lhs(g: &Gadget, grid: usize) -> Result<GadgetValue, GadgetError> {
    refine_max(g, grid, arrowhead_lambda_max)
}

/// Max over the same grids of sum_i (y^T A_i y)^2.
pub fn gadget_value_rhs(g: &Gadget, grid: usize) -> Result<GadgetValue, GadgetError> {
    refine_max(g, grid, quad_form_sum_sq)
}

fn refine_max(
    g: &Gadget,
    grid: usize,
    f: impl Fn(&Gadget, &[f64]) -> f64,
) -> Result<GadgetValue, GadgetError> {
    let mut size = grid.max(8);
    let mut best = grid_max(g, size, &f)?;
    for _ in 0..12 {
        size *= 2;
        let next = grid_max(g, size, &f)?;
        let done = (next.value - best.value).abs() < 1e-6;
        if next.value > best.value {
            best = next;
        }
        if done {
            break;
        }
    }
    Ok(best)
}

fn grid_max(
    g: &Gadget,
    size: usize,
    f: &impl Fn(&Gadget, &[f64]) -> f64,
) -> Result<GadgetValue, GadgetError> {
    let mut best = GadgetValue { value: f64::NEG_INFINITY, argmax: vec![0.0; g.n] };
    for y in grid_points(g.n, size)? {
        let v = f(g, &y);
        if v > best.value {
            best = GadgetValue { value: v, argmax: y };
        }
    }
    Ok(best)
}
