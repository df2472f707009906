//! LP / convex-QP solving layer.
//!
//! Every other module funnels its optimization work through the two entry
//! points here: [`SimplexSolver`] (a persistent bounded-variable revised
//! simplex with warm starts, ray and Farkas extraction) and [`solve_qp`]
//! (convex quadratic objectives and second-order constraints, backed by an
//! interior-point conic solver). Nothing else in the crate touches pivots
//! or KKT systems.

mod conic;
mod simplex;

pub use conic::{solve_qp, QuadBound, QuadConstraint, QuadraticProgram};
pub use simplex::{BasisSnapshot, SimplexSolver};

use thiserror::Error;

/// Objective sense of a [`LinearProgram`] or [`QuadraticProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Sense of a single linear constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Ge,
    Le,
    Eq,
}

/// One linear constraint `sum coeffs * x  (sense)  rhs`.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A linear program over bounded variables.
///
/// Bounds may be `-inf` / `+inf`. Rows are stored sparsely; duplicate column
/// indices within a row are summed by the solver.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Adds a variable and returns its column index.
    pub fn add_var(&mut self, objective: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(objective);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

/// Result of one LP or QP solve.
///
/// `dual` carries one multiplier per row, in the problem's own sense: for a
/// minimization the multiplier of an active `>=` row is nonnegative, for a
/// maximization the multiplier of an active `<=` row is nonnegative.
/// `ray` is a recession direction improving the objective (Unbounded only);
/// `farkas` is a row-space infeasibility certificate (Infeasible only): with
/// `y = farkas`, `y_i >= 0` on `>=` rows, `y_i <= 0` on `<=` rows, and the
/// maximum of `sum_i y_i a_i' x` over the variable box is strictly below
/// `y' b`.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub ray: Option<Vec<f64>>,
    pub farkas: Option<Vec<f64>>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("non-convex input: {0}")]
    NonConvexInput(String),
}

/// One-shot LP solve.
pub fn solve_lp(lp: &LinearProgram) -> Result<SolveOutcome, KernelError> {
    SimplexSolver::new(lp)?.solve()
}
