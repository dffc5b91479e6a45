//! Instance file format: one JSON object per instance, dispatched on a
//! `kind` tag. Matrices and vectors use the exact wire encoding of
//! `exactmat` (decimal numerator/denominator strings), weights are `p/q`
//! strings, so files round-trip losslessly through serde.
//!
//! Kinds:
//! - `kraus`: weighted Kraus list of a completely positive map;
//! - `pairs`: a pair family (vectors x_k, y_k);
//! - `choi`: an assembled N^2 x N^2 bipartite state;
//! - `subspace`: a matrix-subspace basis;
//! - `matrix`: a bare matrix (permanent input);
//! - `tuple`: a list of square matrices (mixed discriminants, capacity
//!   brackets, gadget data).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmat::{parse_rational, ComplexRational, MatError, Matrix};
use crate::hmip::InstanceSource;
use crate::permanents::{MatrixTuple, PermError};
use crate::qstate::{
    choi, cp_from_pairs, cp_from_subspace_basis, operator_from_choi, separable_from_pairs, Budm,
    CpOperator, PairFamily, StateError,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot parse instance JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Validation(String),
    #[error("instance kind {found:?} cannot be used as {wanted}")]
    WrongKind { found: &'static str, wanted: &'static str },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

pub type Meta = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausEntryRepr {
    pub weight: String,
    pub matrix: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRepr {
    pub x: Vec<ComplexRational>,
    pub y: Vec<ComplexRational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceFile {
    Kraus {
        n: usize,
        kraus: Vec<KrausEntryRepr>,
        #[serde(skip_serializing_if = "Option::is_none")]
        meta: Option<Meta>,
    },
    Pairs {
        n: usize,
        pairs: Vec<PairRepr>,
        #[serde(skip_serializing_if = "Option::is_none")]
        meta: Option<Meta>,
    },
    Choi {
        n: usize,
        matrix: Matrix,
        #[serde(skip_serializing_if = "Option::is_none")]
        meta: Option<Meta>,
    },
    Subspace {
        n: usize,
        basis: Vec<Matrix>,
        #[serde(skip_serializing_if = "Option::is_none")]
        meta: Option<Meta>,
    },
    Matrix {
        matrix: Matrix,
        #[serde(skip_serializing_if = "Option::is_none")]
        meta: Option<Meta>,
    },
    Tuple {
        n: usize,
        matrices: Vec<Matrix>,
        #[serde(skip_serializing_if = "Option::is_none")]
        meta: Option<Meta>,
    },
}

impl InstanceFile {
    pub fn parse(s: &str) -> Result<Self, IoError> {
        let inst: InstanceFile = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance files always serialize")
    }

    pub fn kind(&self) -> &'static str {
        match self {
            InstanceFile::Kraus { .. } => "kraus",
            InstanceFile::Pairs { .. } => "pairs",
            InstanceFile::Choi { .. } => "choi",
            InstanceFile::Subspace { .. } => "subspace",
            InstanceFile::Matrix { .. } => "matrix",
            InstanceFile::Tuple { .. } => "tuple",
        }
    }

    /// Structural validation with field-level diagnostics; conversion
    /// methods re-run the underlying constructors anyway.
    pub fn validate(&self) -> Result<(), IoError> {
        match self {
            InstanceFile::Kraus { n, kraus, .. } => {
                if kraus.is_empty() {
                    return Err(IoError::Validation("kraus: empty operator".into()));
                }
                for (k, entry) in kraus.iter().enumerate() {
                    let w = parse_rational(&entry.weight)
                        .map_err(|e| IoError::Validation(format!("kraus[{k}].weight: {e}")))?;
                    if w <= num_rational::BigRational::from_integer(0.into()) {
                        return Err(IoError::Validation(format!(
                            "kraus[{k}].weight: must be positive, got {w}"
                        )));
                    }
                    if entry.matrix.rows() != *n || entry.matrix.cols() != *n {
                        return Err(IoError::Validation(format!(
                            "kraus[{k}].matrix: expected {n}x{n}, got {}x{}",
                            entry.matrix.rows(),
                            entry.matrix.cols()
                        )));
                    }
                }
            }
            InstanceFile::Pairs { n, pairs, .. } => {
                for (k, p) in pairs.iter().enumerate() {
                    if p.x.len() != *n {
                        return Err(IoError::Validation(format!(
                            "pairs[{k}].x: expected length {n}, got {}",
                            p.x.len()
                        )));
                    }
                    if p.y.len() != *n {
                        return Err(IoError::Validation(format!(
                            "pairs[{k}].y: expected length {n}, got {}",
                            p.y.len()
                        )));
                    }
                    if p.x.iter().all(|c| c.is_zero()) {
                        return Err(IoError::Validation(format!("pairs[{k}].x: zero vector")));
                    }
                    if p.y.iter().all(|c| c.is_zero()) {
                        return Err(IoError::Validation(format!("pairs[{k}].y: zero vector")));
                    }
                }
            }
            InstanceFile::Choi { n, matrix, .. } => {
                if matrix.rows() != n * n || matrix.cols() != n * n {
                    return Err(IoError::Validation(format!(
                        "choi.matrix: expected {0}x{0}, got {1}x{2}",
                        n * n,
                        matrix.rows(),
                        matrix.cols()
                    )));
                }
            }
            InstanceFile::Subspace { n, basis, .. } => {
                if basis.is_empty() {
                    return Err(IoError::Validation("subspace.basis: empty".into()));
                }
                for (k, b) in basis.iter().enumerate() {
                    if b.rows() != *n || b.cols() != *n {
                        return Err(IoError::Validation(format!(
                            "subspace.basis[{k}]: expected {n}x{n}, got {}x{}",
                            b.rows(),
                            b.cols()
                        )));
                    }
                    if b.is_zero() {
                        return Err(IoError::Validation(format!("subspace.basis[{k}]: zero matrix")));
                    }
                }
            }
            InstanceFile::Matrix { .. } => {}
            InstanceFile::Tuple { n, matrices, .. } => {
                for (k, m) in matrices.iter().enumerate() {
                    if m.rows() != *n || m.cols() != *n {
                        return Err(IoError::Validation(format!(
                            "tuple.matrices[{k}]: expected {n}x{n}, got {}x{}",
                            m.rows(),
                            m.cols()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn pair_family(&self) -> Result<PairFamily, IoError> {
        match self {
            InstanceFile::Pairs { n, pairs, .. } => {
                let raw = pairs.iter().map(|p| (p.x.clone(), p.y.clone())).collect();
                Ok(PairFamily::new(*n, raw)?)
            }
            other => Err(IoError::WrongKind { found: other.kind(), wanted: "a pair family" }),
        }
    }

    /// View the instance as a completely positive operator.
    pub fn operator(&self) -> Result<CpOperator, IoError> {
        match self {
            InstanceFile::Kraus { n, kraus, .. } => {
                let mut terms = Vec::with_capacity(kraus.len());
                for (k, entry) in kraus.iter().enumerate() {
                    let w = parse_rational(&entry.weight)
                        .map_err(|e| IoError::Validation(format!("kraus[{k}].weight: {e}")))?;
                    terms.push((w, entry.matrix.clone()));
                }
                Ok(CpOperator::new(*n, terms)?)
            }
            InstanceFile::Pairs { .. } => Ok(cp_from_pairs(&self.pair_family()?)),
            InstanceFile::Choi { n, matrix, .. } => {
                let rho = Budm::from_assembled(*n, matrix.clone())?;
                Ok(operator_from_choi(&rho)?)
            }
            InstanceFile::Subspace { basis, .. } => Ok(cp_from_subspace_basis(basis)?),
            other => Err(IoError::WrongKind { found: other.kind(), wanted: "an operator" }),
        }
    }

    /// View the instance as a bipartite state.
    pub fn budm(&self) -> Result<Budm, IoError> {
        match self {
            InstanceFile::Choi { n, matrix, .. } => Ok(Budm::from_assembled(*n, matrix.clone())?),
            InstanceFile::Pairs { .. } => Ok(separable_from_pairs(&self.pair_family()?)),
            InstanceFile::Kraus { .. } | InstanceFile::Subspace { .. } => {
                Ok(choi(&self.operator()?))
            }
            other => Err(IoError::WrongKind { found: other.kind(), wanted: "a bipartite state" }),
        }
    }

    pub fn bare_matrix(&self) -> Result<Matrix, IoError> {
        match self {
            InstanceFile::Matrix { matrix, .. } => Ok(matrix.clone()),
            other => Err(IoError::WrongKind { found: other.kind(), wanted: "a bare matrix" }),
        }
    }

    pub fn matrices(&self) -> Result<Vec<Matrix>, IoError> {
        match self {
            InstanceFile::Tuple { matrices, .. } => Ok(matrices.clone()),
            InstanceFile::Subspace { basis, .. } => Ok(basis.clone()),
            other => Err(IoError::WrongKind { found: other.kind(), wanted: "a matrix list" }),
        }
    }

    pub fn matrix_tuple(&self) -> Result<MatrixTuple, IoError> {
        Ok(MatrixTuple::new(self.matrices()?)?)
    }

    /// Decision-procedure source view.
    pub fn hmip_source(&self) -> Result<InstanceSource, IoError> {
        match self {
            InstanceFile::Pairs { .. } => Ok(InstanceSource::Pairs(self.pair_family()?)),
            InstanceFile::Subspace { basis, .. } => Ok(InstanceSource::Subspace(basis.clone())),
            InstanceFile::Kraus { .. } => Ok(InstanceSource::Kraus(self.operator()?)),
            InstanceFile::Choi { n, matrix, .. } => {
                Ok(InstanceSource::Choi(Budm::from_assembled(*n, matrix.clone())?))
            }
            other => Err(IoError::WrongKind { found: other.kind(), wanted: "a decision instance" }),
        }
    }

    // --- builders ---

    pub fn from_operator(t: &CpOperator, meta: Option<Meta>) -> Self {
        InstanceFile::Kraus {
            n: t.n(),
            kraus: t
                .kraus()
                .iter()
                .map(|(w, b)| KrausEntryRepr { weight: w.to_string(), matrix: b.clone() })
                .collect(),
            meta,
        }
    }

    pub fn from_pairs(p: &PairFamily, meta: Option<Meta>) -> Self {
        InstanceFile::Pairs {
            n: p.n(),
            pairs: p
                .pairs()
                .iter()
                .map(|(x, y)| PairRepr { x: x.clone(), y: y.clone() })
                .collect(),
            meta,
        }
    }

    pub fn from_budm(rho: &Budm, meta: Option<Meta>) -> Self {
        InstanceFile::Choi { n: rho.n(), matrix: rho.assembled().clone(), meta }
    }

    pub fn from_subspace(n: usize, basis: Vec<Matrix>, meta: Option<Meta>) -> Self {
        InstanceFile::Subspace { n, basis, meta }
    }

    pub fn from_matrix(m: Matrix, meta: Option<Meta>) -> Self {
        InstanceFile::Matrix { matrix: m, meta }
    }

    pub fn from_tuple(n: usize, matrices: Vec<Matrix>, meta: Option<Meta>) -> Self {
        InstanceFile::Tuple { n, matrices, meta }
    }
}
