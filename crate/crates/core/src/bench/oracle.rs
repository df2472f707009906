//! Brute-force ground truth for small instances.

use crate::kernel::{KernelError, LinearProgram, LpStatus, RowSense, Sense, SimplexSolver};
use crate::model::ProblemData;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large for enumeration: n = {0} > 20")]
    TooLarge(usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone)]
pub enum OracleResult {
    Optimal { objective: f64, y: Vec<f64> },
    Infeasible,
}

/// Enumerates every binary y satisfying the side rows, solves the primal
/// subproblem for each, and returns the best total objective.
pub fn brute_force_oracle(inst: &ProblemData) -> Result<OracleResult, OracleError> {
    let n = inst.n();
    if n > 20 {
        return Err(OracleError::TooLarge(n));
    }
    // persistent PSP: min c'x s.t. Ax >= b - By; re-solves update the rhs
    let mut lp = LinearProgram::new(Sense::Minimize);
    for jx in 0..inst.n_prime() {
        lp.add_var(inst.c[jx], 0.0, f64::INFINITY);
    }
    for i in 0..inst.m() {
        let coeffs: Vec<(usize, f64)> = inst.a.row(i).to_vec();
        lp.add_row(coeffs, RowSense::Ge, inst.rhs[i]);
    }
    let mut solver = SimplexSolver::new(&lp)?;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut y = vec![0.0; n];
    for mask in 0u64..(1u64 << n) {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = if mask & (1 << j) != 0 { 1.0 } else { 0.0 };
        }
        let ok_side = inst.y_domain.side_rows.iter().all(|row| {
            let lhs: f64 = row.coeffs.iter().map(|&(j, v)| v * y[j]).sum();
            lhs >= row.rhs - 1e-9
        });
        if !ok_side {
            continue;
        }
        let by = inst.b.mul_vec(&y);
        for i in 0..inst.m() {
            solver.set_rhs(i, inst.rhs[i] - by[i]);
        }
        let out = solver.solve()?;
        match out.status {
            LpStatus::Optimal => {
                let fy: f64 = inst.f.iter().zip(&y).map(|(&f, &v)| f * v).sum();
                let total = fy + out.objective;
                if best.as_ref().map_or(true, |(b, _)| total < *b - 1e-12) {
                    best = Some((total, y.clone()));
                }
            }
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(KernelError::NumericalFailure(
                    "primal subproblem unbounded; instance violates boundedness".into(),
                )
                .into())
            }
        }
    }
    Ok(match best {
        Some((objective, y)) => OracleResult::Optimal { objective, y },
        None => OracleResult::Infeasible,
    })
}

/// `Q* = min_y Q(y)` with y unrestricted: the LP relaxation dropping the
/// binary domain and the unit box entirely.
pub fn q_star(inst: &ProblemData) -> Result<f64, OracleError> {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let n = inst.n();
    for j in 0..n {
        lp.add_var(inst.f[j], f64::NEG_INFINITY, f64::INFINITY);
    }
    for jx in 0..inst.n_prime() {
        lp.add_var(inst.c[jx], 0.0, f64::INFINITY);
    }
    for i in 0..inst.m() {
        let mut coeffs: Vec<(usize, f64)> = inst.b.row(i).to_vec();
        for &(jx, v) in inst.a.row(i) {
            coeffs.push((n + jx, v));
        }
        lp.add_row(coeffs, RowSense::Ge, inst.rhs[i]);
    }
    let out = crate::kernel::solve_lp(&lp)?;
    match out.status {
        LpStatus::Optimal => Ok(out.objective),
        other => Err(KernelError::NumericalFailure(format!(
            "unrestricted relaxation returned {:?}",
            other
        ))
        .into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::micro_m1;

    #[test]
    fn micro_optimum() {
        let inst = micro_m1();
        match brute_force_oracle(&inst).unwrap() {
            OracleResult::Optimal { objective, y } => {
                assert!((objective - 2.0).abs() < 1e-9);
                assert_eq!(y, vec![0.0]);
            }
            OracleResult::Infeasible => panic!("micro instance is feasible"),
        }
    }

    #[test]
    fn infeasible_when_side_rows_empty_domain() {
        let mut inst = micro_m1();
        inst.y_domain.side_rows.push(crate::model::SideRow {
            coeffs: vec![(0, 1.0)],
            rhs: 2.0, // y <= 1 can never reach 2
        });
        assert!(matches!(brute_force_oracle(&inst).unwrap(), OracleResult::Infeasible));
    }

    #[test]
    fn zero_binaries_is_pure_lp() {
        let inst = ProblemData {
            c: vec![1.0],
            f: vec![],
            a: crate::model::SparseMat::from_triplets(1, 1, &[(0, 0, 1.0)]).unwrap(),
            b: crate::model::SparseMat::zeros(1, 0),
            rhs: vec![3.0],
            y_domain: Default::default(),
        };
        match brute_force_oracle(&inst).unwrap() {
            OracleResult::Optimal { objective, .. } => assert!((objective - 3.0).abs() < 1e-9),
            _ => panic!(),
        }
    }

    #[test]
    fn too_large_guard() {
        let inst = ProblemData {
            c: vec![],
            f: vec![0.0; 21],
            a: crate::model::SparseMat::zeros(0, 0),
            b: crate::model::SparseMat::zeros(0, 21),
            rhs: vec![],
            y_domain: Default::default(),
        };
        assert!(matches!(brute_force_oracle(&inst), Err(OracleError::TooLarge(21))));
    }

    #[test]
    fn q_star_micro() {
        // unrestricted y: Q(y) = 3y + 2 max(0, 1-y) with y >= 0 forced by row 2;
        // minimum at y = 0 -> 2... and y can exceed 1 freely (cost rises), so Q* = 2
        let inst = micro_m1();
        let q = q_star(&inst).unwrap();
        assert!((q - 2.0).abs() < 1e-9);
    }
}
