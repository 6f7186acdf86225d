//! Dense primal–dual interior-point solver for block semidefinite programs
//! with complex Hermitian blocks.
//!
//! Problems are stated in the complex domain as
//!
//! ```text
//!   maximize   Σ_b tr(C_b X_b)
//!   subject to Σ_b tr(A_kb X_b) = b_k,   k = 1..m
//!              X_b ⪰ 0  (Hermitian blocks)   or   X_b ≥ 0  (nonnegative diagonal blocks)
//! ```
//!
//! with dual `minimize bᵀy  s.t.  Σ_k y_k A_kb − C_b = Z_b ⪰ 0`.
//! Hermitian blocks are realified internally (see [`realify`]) so the
//! iteration itself only handles real symmetric matrices.

mod block;
mod ipm;
mod realify;
mod schur;

pub use ipm::solve;
pub use realify::{realify, unrealify};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{self, ComplexMatrix, HERMITIAN_TOL};

/// Cone type of a variable block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Complex Hermitian positive semidefinite matrix.
    Hermitian,
    /// Real vector with nonnegative entries (a diagonal PSD block).
    NonnegDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub dim: usize,
}

/// Hermitian coefficient matrix of one block.
#[derive(Debug, Clone)]
pub enum Coefficient {
    /// Entries `(i, j, v)` with `i ≤ j`; the mirrored entry `(j, i)` is `conj(v)`.
    /// Repeated positions accumulate.
    Sparse(Vec<(usize, usize, Complex64)>),
    Dense(ComplexMatrix),
}

impl Coefficient {
    pub fn diagonal(entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Coefficient::Sparse(entries.into_iter().map(|(i, v)| (i, i, Complex64::new(v, 0.0))).collect())
    }

    /// `v · 1` on a block of dimension `dim`.
    pub fn scaled_identity(dim: usize, v: f64) -> Self {
        Self::diagonal((0..dim).map(|i| (i, v)))
    }

    pub fn to_dense(&self, dim: usize) -> ComplexMatrix {
        match self {
            Coefficient::Dense(m) => m.clone(),
            Coefficient::Sparse(entries) => {
                let mut m = matrix::zeros(dim, dim);
                for &(i, j, v) in entries {
                    m[(i, j)] += v;
                    if i != j {
                        m[(j, i)] += v.conj();
                    }
                }
                m
            }
        }
    }

    /// `alpha · self`.
    pub fn scaled(&self, alpha: f64) -> Self {
        match self {
            Coefficient::Sparse(e) => Coefficient::Sparse(e.iter().map(|&(i, j, v)| (i, j, v * alpha)).collect()),
            Coefficient::Dense(m) => Coefficient::Dense(m.scale(alpha)),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Coefficient::Sparse(e) => e.iter().all(|(_, _, v)| *v == Complex64::new(0.0, 0.0)),
            Coefficient::Dense(m) => m.iter().all(|v| *v == Complex64::new(0.0, 0.0)),
        }
    }
}

/// Coefficient `coeff` acting on block `block`.
#[derive(Debug, Clone)]
pub struct Term {
    pub block: usize,
    pub coeff: Coefficient,
}

impl Term {
    pub fn new(block: usize, coeff: Coefficient) -> Self {
        Self { block, coeff }
    }
}

/// `Σ_terms tr(A X) = rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<Term>,
    pub rhs: f64,
}

/// Block-structured semidefinite program in equality form.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    pub blocks: Vec<BlockSpec>,
    /// Maximized objective `Σ tr(C_b X_b)`.
    pub objective: Vec<Term>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a block and returns its index.
    pub fn add_block(&mut self, kind: BlockKind, dim: usize) -> usize {
        self.blocks.push(BlockSpec { kind, dim });
        self.blocks.len() - 1
    }

    pub fn add_objective(&mut self, block: usize, coeff: Coefficient) {
        self.objective.push(Term::new(block, coeff));
    }

    /// Adds `Σ tr(A X) = rhs`, dropping zero terms. Returns the constraint index.
    pub fn add_constraint(&mut self, terms: Vec<Term>, rhs: f64) -> usize {
        let terms = terms.into_iter().filter(|t| !t.coeff.is_zero()).collect();
        self.constraints.push(Constraint { terms, rhs });
        self.constraints.len() - 1
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Checks block indices, shapes, Hermiticity and diagonal-block structure.
    pub fn validate(&self) -> Result<()> {
        let check_term = |t: &Term, what: &str| -> Result<()> {
            let Some(spec) = self.blocks.get(t.block) else {
                return Err(Error::InvalidProblem(format!("{what}: block {} does not exist", t.block)));
            };
            let diag_only = spec.kind == BlockKind::NonnegDiagonal;
            match &t.coeff {
                Coefficient::Sparse(entries) => {
                    for &(i, j, v) in entries {
                        if i > j || j >= spec.dim {
                            return Err(Error::InvalidProblem(format!(
                                "{what}: entry ({i}, {j}) invalid for block of dim {}",
                                spec.dim
                            )));
                        }
                        if i == j && v.im.abs() > HERMITIAN_TOL {
                            return Err(Error::InvalidProblem(format!(
                                "{what}: diagonal entry ({i}, {i}) is not real"
                            )));
                        }
                        if diag_only && i != j {
                            return Err(Error::InvalidProblem(format!(
                                "{what}: off-diagonal entry on diagonal block {}",
                                t.block
                            )));
                        }
                    }
                }
                Coefficient::Dense(m) => {
                    if m.nrows() != spec.dim || m.ncols() != spec.dim {
                        return Err(Error::InvalidProblem(format!(
                            "{what}: dense coefficient {}x{} on block of dim {}",
                            m.nrows(),
                            m.ncols(),
                            spec.dim
                        )));
                    }
                    let dev = matrix::hermitian_deviation(m);
                    if dev > HERMITIAN_TOL {
                        return Err(Error::InvalidProblem(format!(
                            "{what}: coefficient not Hermitian (deviation {dev:.2e})"
                        )));
                    }
                    if diag_only {
                        let off = (0..spec.dim)
                            .flat_map(|i| (0..spec.dim).map(move |j| (i, j)))
                            .filter(|(i, j)| i != j)
                            .map(|(i, j)| m[(i, j)].norm())
                            .fold(0.0, f64::max);
                        if off > 0.0 {
                            return Err(Error::InvalidProblem(format!(
                                "{what}: off-diagonal coefficient on diagonal block {}",
                                t.block
                            )));
                        }
                    }
                }
            }
            Ok(())
        };
        if self.blocks.iter().any(|b| b.dim == 0) {
            return Err(Error::InvalidProblem("zero-dimensional block".into()));
        }
        for t in &self.objective {
            check_term(t, "objective")?;
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(Error::InvalidProblem(format!("constraint {k}: non-finite rhs")));
            }
            for t in &c.terms {
                check_term(t, &format!("constraint {k}"))?;
            }
        }
        Ok(())
    }

    /// `Σ_b tr(A_kb X_b)` for every constraint, evaluated on complex blocks.
    pub fn constraint_values(&self, x: &[ComplexMatrix]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| c.terms.iter().map(|t| term_value(t, &x[t.block])).sum())
            .collect()
    }

    /// `Σ_b tr(C_b X_b)`.
    pub fn objective_value(&self, x: &[ComplexMatrix]) -> f64 {
        self.objective.iter().map(|t| term_value(t, &x[t.block])).sum()
    }
}

fn term_value(t: &Term, x: &ComplexMatrix) -> f64 {
    match &t.coeff {
        Coefficient::Sparse(entries) => entries
            .iter()
            .map(|&(i, j, v)| {
                if i == j {
                    (v * x[(i, i)]).re
                } else {
                    // v x_ji + conj(v) x_ij
                    2.0 * (v * x[(j, i)]).re
                }
            })
            .sum(),
        Coefficient::Dense(m) => (m * x).trace().re,
    }
}

/// Orthonormal basis of the real vector space of `n×n` Hermitian matrices,
/// as sparse upper-triangle coefficients.
///
/// Imposing `tr(B L(X)) = tr(B R)` for every basis element `B` is equivalent
/// to the matrix equality `L(X) = R`.
pub fn hermitian_basis(n: usize) -> Vec<Coefficient> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for p in 0..n {
        out.push(Coefficient::Sparse(vec![(p, p, Complex64::new(1.0, 0.0))]));
        for q in p + 1..n {
            out.push(Coefficient::Sparse(vec![(p, q, Complex64::new(s, 0.0))]));
            out.push(Coefficient::Sparse(vec![(p, q, Complex64::new(0.0, s))]));
        }
    }
    out
}

/// Termination status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::MaxIter => "max-iter",
            SolveStatus::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    /// Bound on `|primal − dual| / (1 + |primal|)`.
    pub gap_tol: f64,
    /// Bound on relative primal and dual residual norms.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-8, feas_tol: 1e-8, max_iter: 200 }
    }
}

/// Primal–dual certificate returned by [`solve`].
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    /// Complex primal blocks; diagonal blocks are returned as diagonal matrices.
    pub primal_blocks: Vec<ComplexMatrix>,
    /// `y`, one multiplier per constraint (zero for constraints dropped as redundant).
    pub dual_multipliers: Vec<f64>,
    /// `Z_b = Σ y_k A_kb − C_b`.
    pub dual_slack: Vec<ComplexMatrix>,
    /// `|primal − dual|`.
    pub gap: f64,
    /// `‖b − A(X)‖ / (1 + ‖b‖)`.
    pub primal_infeasibility: f64,
    /// `‖C − Aᵀy + Z‖ / (1 + ‖C‖)`.
    pub dual_infeasibility: f64,
    pub iterations: usize,
    /// Constraints found linearly dependent on the others and dropped.
    pub redundant_constraints: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
