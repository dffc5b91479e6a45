//! Bipartite unnormalized density matrices, completely positive operators,
//! the Choi correspondence, marginals, and instance constructors.
//!
//! Index conventions, fixed once for the whole crate:
//! - a `Budm` entry is addressed as rho(i1, i2, j1, j2), stored in the
//!   assembled N^2 x N^2 matrix at row i1*N + i2, column j1*N + j2, so
//!   block (i1, j1) is the N x N matrix over (i2, j2);
//! - the Choi matrix of an operator has block (i, j) = T(e_i e_j^dagger);
//! - tensor products follow `Matrix::kron`: (A (x) B) has block (i, j)
//!   equal to A(i,j) * B, the first factor indexing blocks;
//! - vec stacks columns: the rank-one Budm vec(B) vec(B)^dagger is the
//!   Choi matrix of the single-Kraus map X -> B X B^dagger.
//!
//! Under these conventions the Choi matrix of the pair map
//! Z -> sum_k x_k y_k^dagger Z y_k x_k^dagger equals the party swap of the
//! separable state built from the pairs (x_k, conj(y_k)). Party swap and
//! entrywise conjugation both leave the quantum permanent unchanged, so
//! the two routes agree on every scalar this crate computes; the bridge
//! test in `permanents` pins the composite convention.

use num_traits::Signed;
use thiserror::Error;

use crate::exactmat::{basis_vec, outer, vec_inner, ComplexRational, MatError, Matrix, Rational};

#[derive(Debug, Error)]
pub enum StateError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not a Choi matrix of a completely positive map: {0}")]
    NotCompletelyPositive(String),
    #[error("kraus weight must be positive, got {0}")]
    NonPositiveWeight(Rational),
    #[error("basis vectors must be pairwise orthogonal and nonzero")]
    BadBasis,
    #[error("pair family invalid: {0}")]
    BadPairs(String),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Bipartite unnormalized density matrix: an N^2 x N^2 block matrix viewed
/// as an N x N array of N x N blocks.
#[derive(Clone, PartialEq, Eq)]
pub struct Budm {
    n: usize,
    assembled: Matrix,
}

impl Budm {
    pub fn from_assembled(n: usize, assembled: Matrix) -> Result<Self, StateError> {
        if assembled.rows() != n * n || assembled.cols() != n * n {
            return Err(StateError::Dimension(format!(
                "expected {0}x{0} assembled matrix for local dimension {n}, got {1}x{2}",
                n * n,
                assembled.rows(),
                assembled.cols()
            )));
        }
        Ok(Self { n, assembled })
    }

    pub fn from_entry_fn(
        n: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> ComplexRational,
    ) -> Self {
        let assembled = Matrix::from_fn(n * n, n * n, |r, c| f(r / n, r % n, c / n, c % n));
        Self { n, assembled }
    }

    /// Row-major list of N^2 blocks, each N x N.
    pub fn from_blocks(n: usize, blocks: &[Matrix]) -> Result<Self, StateError> {
        if blocks.len() != n * n {
            return Err(StateError::Dimension(format!(
                "expected {} blocks, got {}",
                n * n,
                blocks.len()
            )));
        }
        for (k, b) in blocks.iter().enumerate() {
            if b.rows() != n || b.cols() != n {
                return Err(StateError::Dimension(format!(
                    "block {k} is {}x{}, expected {n}x{n}",
                    b.rows(),
                    b.cols()
                )));
            }
        }
        Ok(Self::from_entry_fn(n, |i1, i2, j1, j2| blocks[i1 * n + j1][(i2, j2)].clone()))
    }

    pub fn zero(n: usize) -> Self {
        Self { n, assembled: Matrix::zeros(n * n, n * n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn assembled(&self) -> &Matrix {
        &self.assembled
    }

    pub fn entry(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> &ComplexRational {
        &self.assembled[(i1 * self.n + i2, j1 * self.n + j2)]
    }

    pub fn block(&self, i: usize, j: usize) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, n, |i2, j2| self.entry(i, i2, j, j2).clone())
    }

    pub fn is_hermitian(&self) -> bool {
        self.assembled.is_hermitian()
    }

    pub fn is_psd(&self) -> Result<bool, StateError> {
        Ok(self.assembled.psd_check()?)
    }

    pub fn add(&self, rhs: &Budm) -> Result<Budm, StateError> {
        Ok(Budm { n: self.n, assembled: self.assembled.add(&rhs.assembled)? })
    }

    pub fn sub(&self, rhs: &Budm) -> Result<Budm, StateError> {
        Ok(Budm { n: self.n, assembled: self.assembled.sub(&rhs.assembled)? })
    }

    pub fn scale_rat(&self, c: &Rational) -> Budm {
        Budm { n: self.n, assembled: self.assembled.scale_rat(c) }
    }

    /// Quantum marginals: rho_A sums the diagonal blocks, rho_B takes
    /// blockwise traces.
    pub fn marginals(&self) -> (Matrix, Matrix) {
        let n = self.n;
        let mut rho_a = Matrix::zeros(n, n);
        for i in 0..n {
            rho_a = rho_a.add(&self.block(i, i)).expect("same shape");
        }
        let rho_b = Matrix::from_fn(n, n, |i, j| {
            self.block(i, j).trace().expect("blocks are square")
        });
        (rho_a, rho_b)
    }

    /// Exchange the two tensor factors: result(i2,i1,j2,j1) = rho(i1,i2,j1,j2).
    pub fn swap_parties(&self) -> Budm {
        Budm::from_entry_fn(self.n, |i1, i2, j1, j2| self.entry(i2, i1, j2, j1).clone())
    }

    pub fn conj_entrywise(&self) -> Budm {
        Budm { n: self.n, assembled: self.assembled.conj() }
    }

    /// Congruence by a local pair: (A1 (x) A2) rho (A1 (x) A2)^dagger.
    pub fn local_congruence(&self, a1: &Matrix, a2: &Matrix) -> Result<Budm, StateError> {
        let k = a1.kron(a2);
        let assembled = k.matmul(&self.assembled)?.matmul(&k.conj_transpose())?;
        Budm::from_assembled(self.n, assembled)
    }
}

impl std::fmt::Debug for Budm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Budm(n={}) {:?}", self.n, self.assembled)
    }
}

/// Completely positive map in weighted Kraus form:
/// T(X) = sum_k w_k B_k X B_k^dagger with positive rational weights.
///
/// Weights are kept separate from the matrices so that scalar factors
/// such as one half never force irrational entries into the Kraus data.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CpOperator {
    n: usize,
    kraus: Vec<(Rational, Matrix)>,
}

impl CpOperator {
    pub fn new(n: usize, kraus: Vec<(Rational, Matrix)>) -> Result<Self, StateError> {
        for (w, b) in &kraus {
            if !w.is_positive() {
                return Err(StateError::NonPositiveWeight(w.clone()));
            }
            if b.rows() != n || b.cols() != n {
                return Err(StateError::Dimension(format!(
                    "kraus matrix is {}x{}, expected {n}x{n}",
                    b.rows(),
                    b.cols()
                )));
            }
        }
        Ok(Self { n, kraus })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, kraus: vec![(Rational::from_integer(1.into()), Matrix::identity(n))] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kraus(&self) -> &[(Rational, Matrix)] {
        &self.kraus
    }

    /// T(X) = sum_k w_k B_k X B_k^dagger.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix, StateError> {
        self.check_arg(x)?;
        let mut out = Matrix::zeros(self.n, self.n);
        for (w, b) in &self.kraus {
            let term = b.matmul(x)?.matmul(&b.conj_transpose())?.scale_rat(w);
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// T*(X) = sum_k w_k B_k^dagger X B_k, the dual for <X,Y> = tr(X Y^dagger).
    pub fn dual_apply(&self, x: &Matrix) -> Result<Matrix, StateError> {
        self.check_arg(x)?;
        let mut out = Matrix::zeros(self.n, self.n);
        for (w, b) in &self.kraus {
            let term = b.conj_transpose().matmul(x)?.matmul(b)?.scale_rat(w);
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Scale the whole map by a positive rational (multiplies every weight).
    pub fn scale(&self, c: &Rational) -> Result<CpOperator, StateError> {
        if !c.is_positive() {
            return Err(StateError::NonPositiveWeight(c.clone()));
        }
        Ok(CpOperator {
            n: self.n,
            kraus: self.kraus.iter().map(|(w, b)| (w * c, b.clone())).collect(),
        })
    }

    fn check_arg(&self, x: &Matrix) -> Result<(), StateError> {
        if x.rows() != self.n || x.cols() != self.n {
            return Err(StateError::Dimension(format!(
                "argument is {}x{}, operator acts on {n}x{n}",
                x.rows(),
                x.cols(),
                n = self.n
            )));
        }
        Ok(())
    }
}

/// Choi matrix of T: block (i, j) is T(e_i e_j^dagger).
pub fn choi(t: &CpOperator) -> Budm {
    let n = t.n();
    let mut blocks = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let eij = outer(&basis_vec(n, i), &basis_vec(n, j));
            blocks.push(t.apply(&eij).expect("dimensions match"));
        }
    }
    Budm::from_blocks(n, &blocks).expect("blocks are square")
}

/// Recover a weighted Kraus form from a PSD Choi matrix. The number of
/// Kraus terms equals the rank of the input.
///
/// Uses exact pivoted rank-one peeling (an LDL^dagger pass): a PSD matrix
/// with a zero diagonal entry has a zero row and column, so either a
/// strictly positive rational pivot exists or the residual is zero; a
/// negative or complex pivot, or a nonzero residual without pivots,
/// certifies that the input was not PSD.
pub fn operator_from_choi(rho: &Budm) -> Result<CpOperator, StateError> {
    let n = rho.n();
    let m = n * n;
    if !rho.is_hermitian() {
        return Err(StateError::NotCompletelyPositive("matrix is not hermitian".into()));
    }
    let mut s = rho.assembled().clone();
    let mut kraus = Vec::new();
    loop {
        let mut pivot = None;
        for p in 0..m {
            let d = &s[(p, p)];
            if !d.is_zero() {
                if !d.is_real() || d.re.is_negative() {
                    return Err(StateError::NotCompletelyPositive(format!(
                        "diagonal entry {d} rules out positive semidefiniteness"
                    )));
                }
                pivot = Some(p);
                break;
            }
        }
        let Some(p) = pivot else {
            if s.is_zero() {
                break;
            }
            return Err(StateError::NotCompletelyPositive(
                "zero diagonal with nonzero residual".into(),
            ));
        };
        let w = s[(p, p)].re.clone();
        let col: Vec<ComplexRational> = (0..m).map(|i| &s[(i, p)] / &s[(p, p)]).collect();
        // B(i2, i1) = v(i1*n + i2): unvec by columns
        let b = Matrix::from_fn(n, n, |i2, i1| col[i1 * n + i2].clone());
        let peel = outer(&col, &col).scale_rat(&w);
        s = s.sub(&peel)?;
        kraus.push((w, b));
    }
    CpOperator::new(n, kraus)
}

/// Separable state from a pair family: sum_k x_k x_k^dagger (x) y_k y_k^dagger.
pub fn separable_from_pairs(p: &PairFamily) -> Budm {
    let n = p.n();
    let mut acc = Budm::zero(n);
    for (x, y) in p.pairs() {
        let term = Budm { n, assembled: outer(x, x).kron(&outer(y, y)) };
        acc = acc.add(&term).expect("same shape");
    }
    acc
}

/// The pair map Z -> sum_k x_k y_k^dagger Z y_k x_k^dagger in Kraus form.
pub fn cp_from_pairs(p: &PairFamily) -> CpOperator {
    let kraus = p
        .pairs()
        .iter()
        .map(|(x, y)| (Rational::from_integer(1.into()), outer(x, y)))
        .collect();
    CpOperator::new(p.n(), kraus).expect("outer products are n x n")
}

/// Encode a matrix subspace given by a basis as the map
/// T(X) = sum_k B_k X B_k^dagger; the image of its Choi matrix is the
/// span of the vectorized basis.
pub fn cp_from_subspace_basis(basis: &[Matrix]) -> Result<CpOperator, StateError> {
    let Some(first) = basis.first() else {
        return Err(StateError::Dimension("empty subspace basis".into()));
    };
    let n = first.rows();
    for (k, b) in basis.iter().enumerate() {
        if b.rows() != n || b.cols() != n {
            return Err(StateError::Dimension(format!(
                "basis matrix {k} is {}x{}, expected {n}x{n}",
                b.rows(),
                b.cols()
            )));
        }
        if b.is_zero() {
            return Err(StateError::Dimension(format!("basis matrix {k} is zero")));
        }
    }
    CpOperator::new(
        n,
        basis.iter().map(|b| (Rational::from_integer(1.into()), b.clone())).collect(),
    )
}

/// Decoherence data of T with respect to a pairwise orthogonal basis:
/// the tuple (T(u_1 u_1^dagger), ..., T(u_N u_N^dagger)).
pub fn decohere(t: &CpOperator, basis: &[Vec<ComplexRational>]) -> Result<Vec<Matrix>, StateError> {
    let n = t.n();
    if basis.len() != n {
        return Err(StateError::BadBasis);
    }
    for (i, u) in basis.iter().enumerate() {
        if u.len() != n || u.iter().all(|c| c.is_zero()) {
            return Err(StateError::BadBasis);
        }
        for v in &basis[i + 1..] {
            if !vec_inner(u, v).is_zero() {
                return Err(StateError::BadBasis);
            }
        }
    }
    basis.iter().map(|u| t.apply(&outer(u, u))).collect()
}

/// A matroid-intersection instance: K distinct pairs of nonzero N-vectors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PairFamily {
    n: usize,
    pairs: Vec<(Vec<ComplexRational>, Vec<ComplexRational>)>,
}

impl PairFamily {
    pub fn new(
        n: usize,
        pairs: Vec<(Vec<ComplexRational>, Vec<ComplexRational>)>,
    ) -> Result<Self, StateError> {
        for (k, (x, y)) in pairs.iter().enumerate() {
            if x.len() != n || y.len() != n {
                return Err(StateError::BadPairs(format!(
                    "pair {k} has lengths ({}, {}), expected ({n}, {n})",
                    x.len(),
                    y.len()
                )));
            }
            if x.iter().all(|c| c.is_zero()) {
                return Err(StateError::BadPairs(format!("pair {k}: x vector is zero")));
            }
            if y.iter().all(|c| c.is_zero()) {
                return Err(StateError::BadPairs(format!("pair {k}: y vector is zero")));
            }
        }
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                if pairs[i] == pairs[j] {
                    return Err(StateError::BadPairs(format!("pairs {i} and {j} coincide")));
                }
            }
        }
        Ok(Self { n, pairs })
    }

    /// Pairs (e_i, e_j) from index pairs; used for bipartite-graph
    /// embeddings.
    pub fn from_index_pairs(n: usize, edges: &[(usize, usize)]) -> Result<Self, StateError> {
        let pairs = edges.iter().map(|&(i, j)| (basis_vec(n, i), basis_vec(n, j))).collect();
        Self::new(n, pairs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Vec<ComplexRational>, Vec<ComplexRational>)] {
        &self.pairs
    }

    /// Conjugate every y-vector entrywise.
    pub fn conj_ys(&self) -> PairFamily {
        PairFamily {
            n: self.n,
            pairs: self
                .pairs
                .iter()
                .map(|(x, y)| (x.clone(), y.iter().map(|c| c.conj()).collect()))
                .collect(),
        }
    }
}
