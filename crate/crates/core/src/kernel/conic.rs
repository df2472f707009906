//! Convex QP / second-order-cone solves, delegated to an interior-point
//! conic solver behind the kernel contract.
//!
//! Supports a diagonal positive-semidefinite quadratic objective plus
//! constraints of the form `sum_{v in S} x_v^2 <= c`, `<= t`, or `<= t^2`,
//! which is all the lp-deepest-cut reformulations need.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT,
    SolverStatus, SupportedConeT, ZeroConeT,
};

use super::{KernelError, LpStatus, Row, RowSense, Sense, SolveOutcome};

/// Right-hand side of a quadratic constraint `sum x_v^2 <= bound`.
#[derive(Debug, Clone, Copy)]
pub enum QuadBound {
    /// `sum x_v^2 <= c` for a positive constant.
    Const(f64),
    /// `sum x_v^2 <= x_t` for a variable `t` (implies `t >= 0`).
    Var(usize),
    /// `sum x_v^2 <= x_t^2` (implies `t >= 0`).
    VarSquared(usize),
}

#[derive(Debug, Clone)]
pub struct QuadConstraint {
    pub vars: Vec<usize>,
    pub bound: QuadBound,
}

/// Convex quadratic program: `sense  0.5 * sum quad_diag_j x_j^2 + obj' x`
/// over linear rows, variable bounds, and quadratic constraints.
#[derive(Debug, Clone)]
pub struct QuadraticProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    /// Diagonal of the quadratic form (each entry must be >= 0).
    pub quad_diag: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    pub quad_constraints: Vec<QuadConstraint>,
}

impl QuadraticProgram {
    pub fn new(sense: Sense) -> Self {
        QuadraticProgram {
            sense,
            objective: Vec::new(),
            quad_diag: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
            quad_constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, objective: f64, quad: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(objective);
        self.quad_diag.push(quad);
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

struct Triplets {
    m: usize,
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    fn new(n: usize) -> Self {
        Triplets { m: 0, n, entries: Vec::new() }
    }

    fn push_row(&mut self, coeffs: &[(usize, f64)]) -> usize {
        let r = self.m;
        for &(j, v) in coeffs {
            if v != 0.0 {
                self.entries.push((r, j, v));
            }
        }
        self.m += 1;
        r
    }

    fn to_csc(&self) -> CscMatrix<f64> {
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for &(r, c, v) in &self.entries {
            by_col[c].push((r, v));
        }
        let mut colptr = Vec::with_capacity(self.n + 1);
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        colptr.push(0);
        for col in &mut by_col {
            col.sort_by_key(|&(r, _)| r);
            for &(r, v) in col.iter() {
                rowval.push(r);
                nzval.push(v);
            }
            colptr.push(rowval.len());
        }
        CscMatrix::new(self.m, self.n, colptr, rowval, nzval)
    }
}

/// Solves a convex QP / QCQP. Duals follow the same sign convention as the
/// LP side of the kernel.
pub fn solve_qp(qp: &QuadraticProgram) -> Result<SolveOutcome, KernelError> {
    let n = qp.num_vars();
    if qp.quad_diag.len() != n || qp.lower.len() != n || qp.upper.len() != n {
        return Err(KernelError::DimensionMismatch(
            "quadratic program field lengths disagree".into(),
        ));
    }
    for &d in &qp.quad_diag {
        if d < 0.0 {
            return Err(KernelError::NonConvexInput(
                "negative diagonal in quadratic objective".into(),
            ));
        }
    }
    let maximize = qp.sense == Sense::Maximize;
    if maximize && qp.quad_diag.iter().any(|&d| d != 0.0) {
        return Err(KernelError::NonConvexInput(
            "maximizing a nonzero quadratic objective".into(),
        ));
    }
    let sign = if maximize { -1.0 } else { 1.0 };

    // P (upper triangle, diagonal here) and q
    let mut p_trip = Triplets::new(n);
    p_trip.m = n;
    for (j, &d) in qp.quad_diag.iter().enumerate() {
        if d != 0.0 {
            p_trip.entries.push((j, j, sign * d));
        }
    }
    let p = p_trip.to_csc();
    let q: Vec<f64> = qp.objective.iter().map(|&c| sign * c).collect();

    // Constraint rows: zero-cone (equalities) first, then nonnegative-cone
    // rows, then one SOC block per quadratic constraint.
    let mut a = Triplets::new(n);
    let mut b: Vec<f64> = Vec::new();
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    // (original row index, sign to map clarabel dual to our convention)
    let mut row_dual_map: Vec<(usize, f64)> = Vec::new();

    let mut neq = 0usize;
    for (i, row) in qp.rows.iter().enumerate() {
        if row.sense == RowSense::Eq {
            a.push_row(&row.coeffs);
            b.push(row.rhs);
            row_dual_map.push((i, -1.0));
            neq += 1;
        }
    }
    if neq > 0 {
        cones.push(ZeroConeT(neq));
    }
    let mut nineq = 0usize;
    for (i, row) in qp.rows.iter().enumerate() {
        match row.sense {
            RowSense::Ge => {
                let neg: Vec<(usize, f64)> = row.coeffs.iter().map(|&(j, v)| (j, -v)).collect();
                a.push_row(&neg);
                b.push(-row.rhs);
                row_dual_map.push((i, 1.0));
                nineq += 1;
            }
            RowSense::Le => {
                a.push_row(&row.coeffs);
                b.push(row.rhs);
                row_dual_map.push((i, -1.0));
                nineq += 1;
            }
            RowSense::Eq => {}
        }
    }
    for j in 0..n {
        if qp.lower[j].is_finite() {
            a.push_row(&[(j, -1.0)]);
            b.push(-qp.lower[j]);
            row_dual_map.push((usize::MAX, 0.0));
            nineq += 1;
        }
        if qp.upper[j].is_finite() {
            a.push_row(&[(j, 1.0)]);
            b.push(qp.upper[j]);
            row_dual_map.push((usize::MAX, 0.0));
            nineq += 1;
        }
    }
    if nineq > 0 {
        cones.push(NonnegativeConeT(nineq));
    }
    for qc in &qp.quad_constraints {
        match qc.bound {
            QuadBound::Const(c) => {
                if c < 0.0 {
                    return Err(KernelError::NonConvexInput(
                        "quadratic constraint with negative constant bound".into(),
                    ));
                }
                a.push_row(&[]);
                b.push(c.sqrt());
                row_dual_map.push((usize::MAX, 0.0));
                for &v in &qc.vars {
                    a.push_row(&[(v, -1.0)]);
                    b.push(0.0);
                    row_dual_map.push((usize::MAX, 0.0));
                }
                cones.push(SecondOrderConeT(qc.vars.len() + 1));
            }
            QuadBound::VarSquared(t) => {
                a.push_row(&[(t, -1.0)]);
                b.push(0.0);
                row_dual_map.push((usize::MAX, 0.0));
                for &v in &qc.vars {
                    a.push_row(&[(v, -1.0)]);
                    b.push(0.0);
                    row_dual_map.push((usize::MAX, 0.0));
                }
                cones.push(SecondOrderConeT(qc.vars.len() + 1));
            }
            QuadBound::Var(t) => {
                // ||(2x, t-1)|| <= t+1
                a.push_row(&[(t, -1.0)]);
                b.push(1.0);
                row_dual_map.push((usize::MAX, 0.0));
                for &v in &qc.vars {
                    a.push_row(&[(v, -2.0)]);
                    b.push(0.0);
                    row_dual_map.push((usize::MAX, 0.0));
                }
                a.push_row(&[(t, -1.0)]);
                b.push(-1.0);
                row_dual_map.push((usize::MAX, 0.0));
                cones.push(SecondOrderConeT(qc.vars.len() + 2));
            }
        }
    }

    let a_csc = a.to_csc();
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(500)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .build()
        .map_err(|e| KernelError::NumericalFailure(format!("settings: {:?}", e)))?;
    let mut solver = DefaultSolver::new(&p, &q, &a_csc, &b, &cones, settings)
        .map_err(|e| KernelError::NumericalFailure(format!("conic setup: {:?}", e)))?;
    solver.solve();
    let sol = &solver.solution;

    let map_duals = |z: &[f64]| -> Vec<f64> {
        let mut dual = vec![0.0; qp.rows.len()];
        for (enc, &(orig, s)) in row_dual_map.iter().enumerate() {
            if orig != usize::MAX {
                dual[orig] = sign * s * z[enc];
            }
        }
        dual
    };

    match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            let primal = sol.x.clone();
            let dual = map_duals(&sol.z);
            let mut obj = 0.0;
            for j in 0..n {
                obj += qp.objective[j] * primal[j] + 0.5 * qp.quad_diag[j] * primal[j] * primal[j];
            }
            Ok(SolveOutcome {
                status: LpStatus::Optimal,
                primal,
                dual,
                ray: None,
                farkas: None,
                objective: obj,
                iterations: solver.info.iterations as usize,
            })
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            let farkas = map_duals(&sol.z);
            Ok(SolveOutcome {
                status: LpStatus::Infeasible,
                primal: vec![0.0; n],
                dual: Vec::new(),
                ray: None,
                farkas: Some(farkas),
                objective: f64::NAN,
                iterations: solver.info.iterations as usize,
            })
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => Ok(SolveOutcome {
            status: LpStatus::Unbounded,
            primal: vec![0.0; n],
            dual: Vec::new(),
            ray: Some(sol.x.clone()),
            farkas: None,
            objective: if maximize { f64::INFINITY } else { f64::NEG_INFINITY },
            iterations: solver.info.iterations as usize,
        }),
        other => Err(KernelError::NumericalFailure(format!(
            "conic solver returned {:?}",
            other
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfspace_projection() {
        // min y^2 + eta^2 s.t. eta >= 2  -> (0, 2), value 4 (without the 1/2)
        let mut qp = QuadraticProgram::new(Sense::Minimize);
        let _y = qp.add_var(0.0, 2.0, f64::NEG_INFINITY, f64::INFINITY);
        let eta = qp.add_var(0.0, 2.0, f64::NEG_INFINITY, f64::INFINITY);
        qp.add_row(vec![(eta, 1.0)], RowSense::Ge, 2.0);
        let out = solve_qp(&qp).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!(out.primal[0].abs() < 1e-7);
        assert!((out.primal[1] - 2.0).abs() < 1e-7);
        assert!((out.objective - 4.0).abs() < 1e-6);
        // multiplier of the active >= row: gradient 2*eta = 2*2 = dual
        assert!((out.dual[0] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn corner_projection_with_bound_row() {
        // min || (y, eta) ||^2 s.t. eta - y >= 2, y >= 0  -> (0, 2)
        let mut qp = QuadraticProgram::new(Sense::Minimize);
        let y = qp.add_var(0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY);
        let eta = qp.add_var(0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY);
        qp.add_row(vec![(eta, 1.0), (y, -1.0)], RowSense::Ge, 2.0);
        qp.add_row(vec![(y, 1.0)], RowSense::Ge, 0.0);
        let out = solve_qp(&qp).unwrap();
        assert!(out.primal[0].abs() < 1e-7);
        assert!((out.primal[1] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_reports_certificate() {
        let mut qp = QuadraticProgram::new(Sense::Minimize);
        let y = qp.add_var(0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY);
        qp.add_row(vec![(y, 1.0)], RowSense::Ge, 1.0);
        qp.add_row(vec![(y, 1.0)], RowSense::Le, 0.0);
        let out = solve_qp(&qp).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        let f = out.farkas.unwrap();
        // y0 >= 0 (ge), y1 <= 0 (le), y0 + y1 = 0, y0*1 + y1*0 > 0
        assert!(f[0] > 1e-9 && f[1] < -1e-9);
        assert!((f[0] + f[1]).abs() < 1e-6 * f[0].abs());
    }

    #[test]
    fn second_order_constraint_const_bound() {
        // max x + y s.t. x^2 + y^2 <= 1  -> sqrt(2)
        let mut qp = QuadraticProgram::new(Sense::Maximize);
        let x = qp.add_var(1.0, 0.0, f64::NEG_INFINITY, f64::INFINITY);
        let y = qp.add_var(1.0, 0.0, f64::NEG_INFINITY, f64::INFINITY);
        qp.quad_constraints.push(QuadConstraint { vars: vec![x, y], bound: QuadBound::Const(1.0) });
        let out = solve_qp(&qp).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 2f64.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn second_order_constraint_var_bound() {
        // max 2t - t^2 ... instead linear: max x s.t. x^2 <= t, t <= 4 -> x = 2
        let mut qp = QuadraticProgram::new(Sense::Maximize);
        let x = qp.add_var(1.0, 0.0, f64::NEG_INFINITY, f64::INFINITY);
        let t = qp.add_var(0.0, 0.0, f64::NEG_INFINITY, 4.0);
        qp.quad_constraints.push(QuadConstraint { vars: vec![x], bound: QuadBound::Var(t) });
        let out = solve_qp(&qp).unwrap();
        assert!((out.objective - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_nonconvex() {
        let mut qp = QuadraticProgram::new(Sense::Minimize);
        qp.add_var(0.0, -1.0, 0.0, 1.0);
        assert!(matches!(solve_qp(&qp), Err(KernelError::NonConvexInput(_))));
    }
}
