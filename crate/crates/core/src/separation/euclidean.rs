//! Primal projection route: Euclidean separation and lq projections onto
//! the epigraph polyhedron `{(y, gamma, x): beta gamma >= c'x + f'y,
//! Ax >= b - By, x >= 0}`.

use super::{q_norm, QNorm, SepError, SeparationResult, Separator, SeparatorContext};
use crate::kernel::{
    solve_lp, solve_qp, KernelError, LinearProgram, LpStatus, QuadraticProgram, RowSense, Sense,
};
use crate::model::{
    cut_from_certificate, violation, DualCertificate, MasterPoint, ProblemData, ScalingInfo,
    StrategyKind,
};
use std::sync::Arc;

/// lq projection of a master point onto the epigraph, with its distance.
#[derive(Debug, Clone)]
pub struct ProjectionPoint {
    pub y: Vec<f64>,
    pub gamma: f64,
    pub distance: f64,
}

/// Adds the epigraph polyhedron rows over variables laid out as
/// `(y 0..n, gamma, x n+1..n+1+n')`.
fn add_polyhedron_rows(
    rows: &mut Vec<(Vec<(usize, f64)>, RowSense, f64)>,
    inst: &ProblemData,
    beta: f64,
) {
    let n = inst.n();
    let col_gamma = n;
    let col_x0 = n + 1;
    // beta gamma - f'y - c'x >= 0
    let mut epi: Vec<(usize, f64)> = vec![(col_gamma, beta)];
    for (j, &fj) in inst.f.iter().enumerate() {
        if fj != 0.0 {
            epi.push((j, -fj));
        }
    }
    for (jx, &cj) in inst.c.iter().enumerate() {
        if cj != 0.0 {
            epi.push((col_x0 + jx, -cj));
        }
    }
    rows.push((epi, RowSense::Ge, 0.0));
    // Ax + By >= b
    for i in 0..inst.m() {
        let mut coeffs: Vec<(usize, f64)> = inst.b.row(i).iter().map(|&(j, v)| (j, v)).collect();
        for &(jx, v) in inst.a.row(i) {
            coeffs.push((col_x0 + jx, v));
        }
        rows.push((coeffs, RowSense::Ge, inst.rhs[i]));
    }
}

/// Euclidean separation by the projection QP, recovering the certificate
/// from the multipliers of the epigraph row and the instance rows.
///
/// Interior-point accuracy degrades near the epigraph boundary (the
/// objective is the squared distance), so degenerate solves are polished by
/// re-solving the KKT system of the interior-point active set exactly.
pub fn separate_l2(
    point: &MasterPoint,
    inst: &ProblemData,
    scaling: &ScalingInfo,
    sep_tol: f64,
) -> Result<(SeparationResult, ProjectionPoint), SepError> {
    let n = inst.n();
    let np = inst.n_prime();
    let mut qp = QuadraticProgram::new(Sense::Minimize);
    for j in 0..n {
        qp.add_var(-point.y[j], 1.0, f64::NEG_INFINITY, f64::INFINITY);
    }
    qp.add_var(-point.gamma, 1.0, f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..np {
        qp.add_var(0.0, 0.0, 0.0, f64::INFINITY);
    }
    let mut rows = Vec::new();
    add_polyhedron_rows(&mut rows, inst, scaling.beta);
    for (coeffs, sense, rhs) in &rows {
        qp.add_row(coeffs.clone(), *sense, *rhs);
    }
    let out = solve_qp(&qp)?;
    if out.status != LpStatus::Optimal {
        return Err(SepError::Kernel(KernelError::NumericalFailure(format!(
            "projection QP returned {:?}",
            out.status
        ))));
    }
    let mut w: Vec<f64> = out.primal[..n + 1].to_vec();
    let mut pi0 = out.dual[0].max(0.0);
    let mut p: Vec<f64> = out.dual[1..1 + inst.m()].iter().map(|&v| v.max(0.0)).collect();
    let mut w_hat = point.y.clone();
    w_hat.push(point.gamma);
    let dist_of = |w: &[f64]| -> f64 {
        let dy: Vec<f64> = w[..n].iter().zip(&point.y).map(|(&a, &b)| a - b).collect();
        q_norm(&dy, w[n] - point.gamma, QNorm::Two)
    };
    let mut distance = dist_of(&w);
    let residual_of = |p: &[f64], pi0: f64, dist: f64| -> Result<f64, SepError> {
        let cert = DualCertificate { p: p.to_vec(), pi0 };
        let viol = violation(&cert, point, inst)?;
        let coeff = inst.b.tr_mul_vec(&cert.p);
        let mut s = (scaling.beta * pi0) * (scaling.beta * pi0);
        for (j, &v) in coeff.iter().enumerate() {
            let a = v - pi0 * inst.f[j];
            s += a * a;
        }
        let coeff_norm = s.sqrt();
        if coeff_norm <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok((viol / coeff_norm - dist).abs())
    };
    let needs_polish =
        distance <= 1e-3 || residual_of(&p, pi0, distance)? > 1e-7 * (1.0 + distance);
    if needs_polish {
        if let Some((pw, lambda)) = polish_projection(&w_hat, np, &rows, &out.primal, &out.dual) {
            w = pw;
            pi0 = lambda[0].max(0.0);
            p = lambda[1..1 + inst.m()].iter().map(|&v| v.max(0.0)).collect();
            distance = dist_of(&w);
        }
    }
    let projection = ProjectionPoint { y: w[..n].to_vec(), gamma: w[n], distance };
    if distance <= sep_tol {
        return Ok((SeparationResult::optimal_with_depth(distance), projection));
    }
    let cert = DualCertificate { p, pi0 };
    // strong duality: the certificate's normalized violation equals the
    // projection distance
    let res = residual_of(&cert.p, cert.pi0, distance)?;
    if res > 1e-5 * (1.0 + distance) {
        return Err(SepError::Kernel(KernelError::NumericalFailure(format!(
            "euclidean separation failed strong-duality check (residual {})",
            res
        ))));
    }
    let cut = cut_from_certificate(&cert, inst, scaling, StrategyKind::L2)?;
    Ok((
        SeparationResult {
            depth: distance,
            certificate: Some(cert),
            cuts: vec![cut],
            optimal: false,
            q_at_point: None,
        },
        projection,
    ))
}

/// Exact equality-constrained re-solve of a projection QP on the active set
/// guessed from an interior-point solution.
///
/// Variables are `(w, x)` with an identity Hessian on `w` and none on `x`;
/// all rows are `>=`. Returns the polished `w` and the full multiplier
/// vector (zero on inactive rows), or None when the guess fails
/// verification.
pub(crate) fn polish_projection(
    w_hat: &[f64],
    nx: usize,
    rows: &[(Vec<(usize, f64)>, RowSense, f64)],
    primal: &[f64],
    duals: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let nw = w_hat.len();
    let scale_p = 1.0 + primal.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let scale_d = 1.0 + duals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    // candidate active sets: by slack or dual, then by dual only
    let activity = |coeffs: &[(usize, f64)]| -> f64 {
        coeffs.iter().map(|&(j, v)| v * primal[j]).sum()
    };
    let try_sets: [Box<dyn Fn(usize) -> bool>; 2] = [
        Box::new(|i: usize| {
            let (coeffs, _, rhs) = &rows[i];
            activity(coeffs) - rhs <= 1e-6 * scale_p || duals[i] > 1e-7 * scale_d
        }),
        Box::new(|i: usize| duals[i] > 1e-6 * scale_d),
    ];
    // active bound rows x_j >= 0 (not part of `rows`; keyed by x index)
    let active_bounds: Vec<usize> = (0..nx)
        .filter(|&jx| primal[nw + jx] <= 1e-6 * scale_p)
        .collect();
    for select in &try_sets {
        let active: Vec<usize> = (0..rows.len()).filter(|&i| select(i)).collect();
        if let Some(result) = solve_polish_system(w_hat, nx, rows, &active, &active_bounds) {
            return Some(result);
        }
    }
    None
}

/// Assembles and solves the KKT system of the equality-constrained
/// projection, then verifies primal feasibility and multiplier signs.
fn solve_polish_system(
    w_hat: &[f64],
    nx: usize,
    rows: &[(Vec<(usize, f64)>, RowSense, f64)],
    active: &[usize],
    active_bounds: &[usize],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let nw = w_hat.len();
    let k = active.len() + active_bounds.len();
    let dim = k + nx;
    // split each active row into its w-part and x-part
    let w_part = |i: usize| -> Vec<(usize, f64)> {
        rows[i].0.iter().filter(|&&(j, _)| j < nw).cloned().collect()
    };
    let x_part = |i: usize| -> Vec<(usize, f64)> {
        rows[i]
            .0
            .iter()
            .filter(|&&(j, _)| j >= nw)
            .map(|&(j, v)| (j - nw, v))
            .collect()
    };
    // M [lambda; x] = rhs with M = [Aw Aw', Ax; Ax', 0]
    let mut mat = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    for (a, &ia) in active.iter().enumerate() {
        let wa = w_part(ia);
        for (b, &ib) in active.iter().enumerate() {
            let wb = w_part(ib);
            let mut dot = 0.0;
            for &(j, v) in &wa {
                for &(j2, v2) in &wb {
                    if j == j2 {
                        dot += v * v2;
                    }
                }
            }
            mat[a * dim + b] = dot;
        }
        for &(jx, v) in &x_part(ia) {
            mat[a * dim + (k + jx)] = v;
            mat[(k + jx) * dim + a] = v;
        }
        let aw_what: f64 = wa.iter().map(|&(j, v)| v * w_hat[j]).sum();
        rhs[a] = rows[ia].2 - aw_what;
    }
    // bound rows e_x >= 0: pure x-part
    for (bi, &jx) in active_bounds.iter().enumerate() {
        let a = active.len() + bi;
        mat[a * dim + (k + jx)] = 1.0;
        mat[(k + jx) * dim + a] = 1.0;
        rhs[a] = 0.0;
    }
    let sol = solve_dense_consistent(&mut mat, &mut rhs, dim)?;
    // recover w and verify
    let mut w = w_hat.to_vec();
    for (a, &ia) in active.iter().enumerate() {
        for &(j, v) in &w_part(ia) {
            w[j] += v * sol[a];
        }
    }
    let x = &sol[k..];
    // multiplier signs on inequality rows
    for (a, &ia) in active.iter().enumerate() {
        let _ = ia;
        if sol[a] < -1e-7 {
            return None;
        }
    }
    // feasibility of every row and bound
    let scale = 1.0 + w.iter().chain(x.iter()).fold(0.0f64, |acc, &v| acc.max(v.abs()));
    for (coeffs, _, rhs_i) in rows {
        let mut act = 0.0;
        for &(j, v) in coeffs {
            act += v * if j < nw { w[j] } else { x[j - nw] };
        }
        if act < rhs_i - 1e-7 * scale {
            return None;
        }
    }
    for &xv in x {
        if xv < -1e-7 * scale {
            return None;
        }
    }
    let mut lambda = vec![0.0; rows.len()];
    for (a, &ia) in active.iter().enumerate() {
        lambda[ia] = sol[a].max(0.0);
    }
    Some((w, lambda))
}

/// Gaussian elimination with partial pivoting for a consistent (possibly
/// singular) symmetric system; dependent variables are pinned at zero.
fn solve_dense_consistent(mat: &mut [f64], rhs: &mut [f64], dim: usize) -> Option<Vec<f64>> {
    let mut col_of_row: Vec<Option<usize>> = vec![None; dim];
    let mut used_col = vec![false; dim];
    let scale = 1.0 + mat.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let mut row = 0usize;
    for col in 0..dim {
        // find pivot in column `col` among rows >= row
        let mut best = row;
        let mut bestv = 0.0f64;
        for r in row..dim {
            let v = mat[r * dim + col].abs();
            if v > bestv {
                bestv = v;
                best = r;
            }
        }
        if bestv <= 1e-10 * scale {
            continue; // dependent column; variable pinned at zero
        }
        if best != row {
            for c in 0..dim {
                mat.swap(row * dim + c, best * dim + c);
            }
            rhs.swap(row, best);
        }
        let piv = mat[row * dim + col];
        for c in 0..dim {
            mat[row * dim + c] /= piv;
        }
        rhs[row] /= piv;
        for r in 0..dim {
            if r != row {
                let factor = mat[r * dim + col];
                if factor != 0.0 {
                    for c in 0..dim {
                        mat[r * dim + c] -= factor * mat[row * dim + c];
                    }
                    rhs[r] -= factor * rhs[row];
                }
            }
        }
        col_of_row[row] = Some(col);
        used_col[col] = true;
        row += 1;
        if row == dim {
            break;
        }
    }
    // consistency of the remaining zero rows
    for r in row..dim {
        if rhs[r].abs() > 1e-7 * scale {
            return None;
        }
    }
    let mut sol = vec![0.0; dim];
    for r in 0..row {
        if let Some(c) = col_of_row[r] {
            sol[c] = rhs[r];
        }
    }
    Some(sol)
}

/// lq projection onto the epigraph polyhedron (q in {1, 2, inf}).
pub fn project_onto_epigraph(
    point: &MasterPoint,
    inst: &ProblemData,
    scaling: &ScalingInfo,
    q: QNorm,
) -> Result<ProjectionPoint, SepError> {
    if q == QNorm::Two {
        let (_, proj) = separate_l2(point, inst, scaling, -1.0)?;
        return Ok(proj);
    }
    let n = inst.n();
    let np = inst.n_prime();
    let mut lp = LinearProgram::new(Sense::Minimize);
    for _ in 0..n {
        lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
    }
    lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..np {
        lp.add_var(0.0, 0.0, f64::INFINITY);
    }
    let mut rows = Vec::new();
    add_polyhedron_rows(&mut rows, inst, scaling.beta);
    for (coeffs, sense, rhs) in rows {
        lp.add_row(coeffs, sense, rhs);
    }
    // deviation variables
    match q {
        QNorm::One => {
            for j in 0..=n {
                let t = lp.add_var(1.0, 0.0, f64::INFINITY);
                let target = if j < n { point.y[j] } else { point.gamma };
                lp.add_row(vec![(j, 1.0), (t, -1.0)], RowSense::Le, target);
                lp.add_row(vec![(j, 1.0), (t, 1.0)], RowSense::Ge, target);
            }
        }
        QNorm::Inf => {
            let t = lp.add_var(1.0, 0.0, f64::INFINITY);
            for j in 0..=n {
                let target = if j < n { point.y[j] } else { point.gamma };
                lp.add_row(vec![(j, 1.0), (t, -1.0)], RowSense::Le, target);
                lp.add_row(vec![(j, 1.0), (t, 1.0)], RowSense::Ge, target);
            }
        }
        QNorm::Two => unreachable!(),
    }
    let out = solve_lp(&lp)?;
    if out.status != LpStatus::Optimal {
        return Err(SepError::Kernel(KernelError::NumericalFailure(format!(
            "projection LP returned {:?}",
            out.status
        ))));
    }
    Ok(ProjectionPoint {
        y: out.primal[..n].to_vec(),
        gamma: out.primal[n],
        distance: out.objective,
    })
}

pub(super) struct L2Separator {
    inst: Arc<ProblemData>,
    scaling: ScalingInfo,
    sep_tol: f64,
}

impl L2Separator {
    pub fn new(ctx: &SeparatorContext) -> Self {
        L2Separator {
            inst: ctx.inst.clone(),
            scaling: ctx.scaling,
            sep_tol: ctx.sep_tol,
        }
    }
}

impl Separator for L2Separator {
    fn kind(&self) -> StrategyKind {
        StrategyKind::L2
    }

    fn separate(&mut self, point: &MasterPoint) -> Result<SeparationResult, SepError> {
        separate_l2(point, &self.inst, &self.scaling, self.sep_tol).map(|(r, _)| r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::micro_m1;

    fn origin() -> MasterPoint {
        MasterPoint { y: vec![0.0], eta: 0.0, gamma: 0.0 }
    }

    #[test]
    fn l2_projection_of_origin() {
        let inst = micro_m1();
        let scaling = ScalingInfo::identity();
        let (r, proj) = separate_l2(&origin(), &inst, &scaling, 1e-6).unwrap();
        assert!((r.depth - 2.0).abs() < 1e-6, "depth {}", r.depth);
        assert!(proj.y[0].abs() < 1e-6);
        assert!((proj.gamma - 2.0).abs() < 1e-6);
        // certificate direction: coefficient vector parallel to (0, 1)
        let cut = &r.cuts[0];
        assert!(cut.a_y[0].abs() < 1e-5 * cut.a_gamma.abs());
    }

    #[test]
    fn l2_interior_point_is_optimal() {
        let inst = micro_m1();
        let scaling = ScalingInfo::identity();
        let inside = MasterPoint { y: vec![0.5], eta: 4.0, gamma: 4.0 };
        let (r, _) = separate_l2(&inside, &inst, &scaling, 1e-6).unwrap();
        assert!(r.optimal);
        assert!(r.cuts.is_empty());
    }

    #[test]
    fn l2_boundary_point_depth_zero() {
        let inst = micro_m1();
        let scaling = ScalingInfo::identity();
        let boundary = MasterPoint { y: vec![0.0], eta: 2.0, gamma: 2.0 };
        let (r, _) = separate_l2(&boundary, &inst, &scaling, 1e-6).unwrap();
        assert!(r.depth.abs() < 1e-7);
    }

    #[test]
    fn l1_and_inf_projections_of_origin() {
        let inst = micro_m1();
        let scaling = ScalingInfo::identity();
        // q = 1 (deepest linf cut): distance |dy| + |dgamma| = 2 at (0, 2)
        let p1 = project_onto_epigraph(&origin(), &inst, &scaling, QNorm::One).unwrap();
        assert!((p1.distance - 2.0).abs() < 1e-8);
        // q = inf (deepest l1 cut): distance max(...) = 2
        let pinf = project_onto_epigraph(&origin(), &inst, &scaling, QNorm::Inf).unwrap();
        assert!((pinf.distance - 2.0).abs() < 1e-8);
    }
}
