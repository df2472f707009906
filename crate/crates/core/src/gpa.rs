//! Guided projections: lp-deepest cuts from a classical-cut oracle.
//!
//! Alternates (a) projecting the incumbent onto the current outer
//! approximation of the epigraph in the dual norm lq and (b) generating a
//! classical cut at the projection, until the lq distance brackets close.
//! Every distinct cut generated along the way is emitted; the first one is
//! exactly the classical cut at the incumbent, so a run truncated after one
//! iteration degrades gracefully to classical separation.

use crate::kernel::{
    solve_lp, solve_qp, KernelError, LinearProgram, LpStatus, QuadraticProgram, RowSense, Sense,
};
use crate::model::{
    cut_from_certificate, Cut, CutKind, DspOracle, DspResolution, DualCertificate, MasterPoint,
    ProblemData, ScalingInfo, StrategyKind,
};
use crate::separation::{
    q_norm, QNorm, SepError, SeparationResult, Separator, SeparatorContext,
};
use std::collections::HashSet;
use std::sync::Arc;

/// Tuning knobs of one guided-projections run.
#[derive(Debug, Clone)]
pub struct GpaConfig {
    /// Relative gap between the distance bounds at which the run stops.
    pub tol: f64,
    /// Iteration budget.
    pub max_iter: usize,
    /// Seed the outer approximation with the unit-box halfspaces on y.
    pub seed_bounds: bool,
    /// Seed the outer approximation with the master's current cut pool.
    pub seed_pool: bool,
}

impl Default for GpaConfig {
    fn default() -> Self {
        GpaConfig { tol: 1e-6, max_iter: 10, seed_bounds: false, seed_pool: false }
    }
}

/// Evolving state of one run: the outer approximation, the intermediate
/// projection, and the distance brackets.
#[derive(Debug, Clone)]
pub struct GpaState {
    pub halfspaces: Vec<Cut>,
    pub projection: (Vec<f64>, f64),
    pub certificates: Vec<DualCertificate>,
    pub lower: f64,
    pub upper: f64,
    pub h: usize,
}

/// lq projection of a scaled point onto a list of halfspaces. An empty list
/// returns the point itself.
pub fn project(
    point: &MasterPoint,
    halfspaces: &[Cut],
    q: QNorm,
) -> Result<(Vec<f64>, f64), SepError> {
    if halfspaces.is_empty() {
        return Ok((point.y.clone(), point.gamma));
    }
    let n = point.y.len();
    let infeasible = |status: LpStatus| -> SepError {
        SepError::Kernel(KernelError::NumericalFailure(format!(
            "projection onto halfspaces returned {:?}; epigraph cuts cannot be inconsistent",
            status
        )))
    };
    if q == QNorm::Two {
        let mut qp = QuadraticProgram::new(Sense::Minimize);
        for j in 0..n {
            qp.add_var(-point.y[j], 1.0, f64::NEG_INFINITY, f64::INFINITY);
        }
        qp.add_var(-point.gamma, 1.0, f64::NEG_INFINITY, f64::INFINITY);
        let mut rows = Vec::new();
        for cut in halfspaces {
            let mut coeffs: Vec<(usize, f64)> = cut
                .a_y
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0.0)
                .map(|(j, &v)| (j, v))
                .collect();
            if cut.a_gamma != 0.0 {
                coeffs.push((n, cut.a_gamma));
            }
            qp.add_row(coeffs.clone(), RowSense::Ge, cut.rhs);
            rows.push((coeffs, RowSense::Ge, cut.rhs));
        }
        let out = solve_qp(&qp)?;
        if out.status != LpStatus::Optimal {
            return Err(infeasible(out.status));
        }
        let mut w_hat = point.y.clone();
        w_hat.push(point.gamma);
        if let Some((w, _)) =
            crate::separation::polish_projection(&w_hat, 0, &rows, &out.primal, &out.dual)
        {
            return Ok((w[..n].to_vec(), w[n]));
        }
        return Ok((out.primal[..n].to_vec(), out.primal[n]));
    }
    let mut lp = LinearProgram::new(Sense::Minimize);
    for _ in 0..=n {
        lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
    }
    for cut in halfspaces {
        let mut coeffs: Vec<(usize, f64)> = cut
            .a_y
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != 0.0)
            .map(|(j, &v)| (j, v))
            .collect();
        if cut.a_gamma != 0.0 {
            coeffs.push((n, cut.a_gamma));
        }
        lp.add_row(coeffs, RowSense::Ge, cut.rhs);
    }
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
        return Err(infeasible(out.status));
    }
    Ok((out.primal[..n].to_vec(), out.primal[n]))
}

/// Initial halfspaces for the outer approximation: optionally the unit box
/// on y and/or previously generated cuts.
pub fn seed_initial_halfspaces(config: &GpaConfig, n: usize, pool: &[Cut]) -> Vec<Cut> {
    let mut seeds = Vec::new();
    if config.seed_bounds {
        for j in 0..n {
            let mut lo = vec![0.0; n];
            lo[j] = 1.0;
            seeds.push(Cut {
                a_y: lo,
                a_gamma: 0.0,
                rhs: 0.0,
                kind: CutKind::Feasibility,
                source: StrategyKind::Cb,
            });
            let mut hi = vec![0.0; n];
            hi[j] = -1.0;
            seeds.push(Cut {
                a_y: hi,
                a_gamma: 0.0,
                rhs: -1.0,
                kind: CutKind::Feasibility,
                source: StrategyKind::Cb,
            });
        }
    }
    if config.seed_pool {
        seeds.extend(pool.iter().cloned());
    }
    seeds
}

/// One full guided-projections run at a point. Returns the separation result
/// (all distinct generated cuts, tagged with `source`) plus the final state.
#[allow(clippy::too_many_arguments)]
pub fn gpa_separate(
    point: &MasterPoint,
    source: StrategyKind,
    q: QNorm,
    oracle: &mut dyn DspOracle,
    inst: &ProblemData,
    scaling: &ScalingInfo,
    config: &GpaConfig,
    sep_tol: f64,
    pool: &[Cut],
) -> Result<(SeparationResult, GpaState), SepError> {
    let mut state = GpaState {
        halfspaces: seed_initial_halfspaces(config, inst.n(), pool),
        projection: (point.y.clone(), point.gamma),
        certificates: Vec::new(),
        lower: 0.0,
        upper: f64::INFINITY,
        h: 0,
    };
    let mut emitted: Vec<Cut> = Vec::new();
    let mut seen: HashSet<u64> = HashSet::new();
    let mut last_fp: Option<u64> = None;
    let mut q_at_point = None;

    loop {
        if state.h > 0 {
            let (py, pg) = project(point, &state.halfspaces, q)?;
            let dy: Vec<f64> = py.iter().zip(&point.y).map(|(&a, &b)| a - b).collect();
            let lower = q_norm(&dy, pg - point.gamma, q);
            debug_assert!(lower >= state.lower - 1e-7, "lower bound regressed");
            state.lower = state.lower.max(lower);
            state.projection = (py, pg);
        }
        if state.upper.is_finite()
            && state.upper - state.lower <= config.tol * state.upper.abs().max(1.0)
        {
            break;
        }
        if state.h >= config.max_iter {
            break;
        }
        let cert = match oracle.solve_dsp(&state.projection.0)? {
            DspResolution::Bounded { dual, q_tilde } => {
                let fy: f64 = inst
                    .f
                    .iter()
                    .zip(&state.projection.0)
                    .map(|(&f, &y)| f * y)
                    .sum();
                let q_val = fy + q_tilde;
                if state.h == 0 {
                    q_at_point = Some(q_val);
                    let viol0 = (q_val - point.eta) / scaling.beta;
                    if viol0 <= sep_tol {
                        let mut r = SeparationResult::optimal_with_depth(viol0);
                        r.q_at_point = q_at_point;
                        return Ok((r, state));
                    }
                }
                let dy: Vec<f64> = state
                    .projection
                    .0
                    .iter()
                    .zip(&point.y)
                    .map(|(&a, &b)| a - b)
                    .collect();
                let ub = q_norm(&dy, q_val / scaling.beta - point.gamma, q);
                state.upper = state.upper.min(ub);
                dual
            }
            DspResolution::Unbounded { ray } => ray,
        };
        let cut = cut_from_certificate(&cert, inst, scaling, source)?;
        let fp = cut.fingerprint();
        if last_fp == Some(fp) || seen.contains(&fp) {
            // the approximation did not change; a repeat projection would
            // stall (degenerate case, e.g. only feasibility rays available)
            break;
        }
        last_fp = Some(fp);
        seen.insert(fp);
        // every generated cut separates the projection it was produced at
        debug_assert!(
            state.h == 0
                || cut.violation_at(&state.projection.0, state.projection.1) > -1e-7,
            "generated cut does not separate its projection"
        );
        state.halfspaces.push(cut.clone());
        state.certificates.push(cert);
        emitted.push(cut);
        state.h += 1;
    }
    let depth = state.lower;
    let optimal = emitted.is_empty() && depth <= sep_tol;
    let result = SeparationResult {
        depth,
        certificate: state.certificates.last().cloned(),
        cuts: emitted,
        optimal,
        q_at_point,
    };
    Ok((result, state))
}

/// [`Separator`] wrapper used by the driver for `l1`/`l2`/`linf` in gpa mode.
pub struct GpaSeparator {
    kind: StrategyKind,
    q: QNorm,
    inst: Arc<ProblemData>,
    scaling: ScalingInfo,
    sep_tol: f64,
    config: GpaConfig,
    oracle: Box<dyn DspOracle>,
    pool: Vec<Cut>,
}

impl GpaSeparator {
    pub fn new(kind: StrategyKind, ctx: &SeparatorContext, oracle: Box<dyn DspOracle>) -> Self {
        let q = QNorm::dual_of(kind).expect("gpa strategy must be an lp norm");
        GpaSeparator {
            kind,
            q,
            inst: ctx.inst.clone(),
            scaling: ctx.scaling,
            sep_tol: ctx.sep_tol,
            config: ctx.gpa.clone(),
            oracle,
            pool: Vec::new(),
        }
    }
}

impl Separator for GpaSeparator {
    fn kind(&self) -> StrategyKind {
        self.kind
    }

    fn separate(&mut self, point: &MasterPoint) -> Result<SeparationResult, SepError> {
        gpa_separate(
            point,
            self.kind,
            self.q,
            self.oracle.as_mut(),
            &self.inst,
            &self.scaling,
            &self.config,
            self.sep_tol,
            &self.pool,
        )
        .map(|(r, _)| r)
    }

    fn note_pool(&mut self, pool: &[Cut]) {
        if self.config.seed_pool {
            self.pool = pool.to_vec();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::micro_m1;
    use crate::separation::GenericDspOracle;

    fn origin() -> MasterPoint {
        MasterPoint { y: vec![0.0], eta: 0.0, gamma: 0.0 }
    }

    #[test]
    fn project_empty_list_returns_point() {
        let p = origin();
        let (y, g) = project(&p, &[], QNorm::Two).unwrap();
        assert_eq!(y, vec![0.0]);
        assert_eq!(g, 0.0);
    }

    #[test]
    fn project_single_flat_cut() {
        let p = origin();
        let cut = Cut {
            a_y: vec![0.0],
            a_gamma: 1.0,
            rhs: 2.0,
            kind: CutKind::Optimality,
            source: StrategyKind::Cb,
        };
        let (y, g) = project(&p, &[cut], QNorm::Two).unwrap();
        assert!(y[0].abs() < 1e-7);
        assert!((g - 2.0).abs() < 1e-7);
    }

    #[test]
    fn project_l1_corner() {
        // cuts {gamma - y >= 2, y >= 0}, q = 1: kernel lands on (0, 2)
        let p = origin();
        let cuts = vec![
            Cut { a_y: vec![-1.0], a_gamma: 1.0, rhs: 2.0, kind: CutKind::Optimality, source: StrategyKind::Cb },
            Cut { a_y: vec![1.0], a_gamma: 0.0, rhs: 0.0, kind: CutKind::Feasibility, source: StrategyKind::Cb },
        ];
        let (y, g) = project(&p, &cuts, QNorm::One).unwrap();
        let l1 = y[0].abs() + g.abs();
        assert!((l1 - 2.0).abs() < 1e-8, "projection ({}, {})", y[0], g);
    }

    #[test]
    fn gpa_micro_euclidean() {
        let inst = micro_m1();
        let mut oracle = GenericDspOracle::new(Arc::new(inst.clone()));
        let scaling = ScalingInfo::identity();
        let cfg = GpaConfig::default();
        let (r, state) = gpa_separate(
            &origin(),
            StrategyKind::L2,
            QNorm::Two,
            &mut oracle,
            &inst,
            &scaling,
            &cfg,
            1e-6,
            &[],
        )
        .unwrap();
        assert!((r.depth - 2.0).abs() < 1e-5, "depth {}", r.depth);
        assert!(!r.cuts.is_empty());
        // first cut is the classical cut at the incumbent
        let mut cb_oracle = GenericDspOracle::new(Arc::new(inst.clone()));
        let cb = crate::separation::separate_cb(&origin(), &inst, &scaling, &mut cb_oracle, 1e-6)
            .unwrap();
        let first = &r.cuts[0];
        let cbcut = &cb.cuts[0];
        assert!((first.a_y[0] - cbcut.a_y[0]).abs() < 1e-7);
        assert!((first.a_gamma - cbcut.a_gamma).abs() < 1e-7);
        assert!((first.rhs - cbcut.rhs).abs() < 1e-7);
        assert!(state.lower <= state.upper + 1e-7);
    }

    #[test]
    fn gpa_point_inside_epigraph() {
        let inst = micro_m1();
        let mut oracle = GenericDspOracle::new(Arc::new(inst.clone()));
        let scaling = ScalingInfo::identity();
        let inside = MasterPoint { y: vec![0.0], eta: 5.0, gamma: 5.0 };
        let (r, _) = gpa_separate(
            &inside,
            StrategyKind::L1,
            QNorm::Inf,
            &mut oracle,
            &inst,
            &scaling,
            &GpaConfig::default(),
            1e-6,
            &[],
        )
        .unwrap();
        assert!(r.optimal);
        assert!(r.cuts.is_empty());
        assert!(r.depth <= 0.0);
    }

    #[test]
    fn gpa_single_iteration_is_classical() {
        let inst = micro_m1();
        let mut oracle = GenericDspOracle::new(Arc::new(inst.clone()));
        let scaling = ScalingInfo::identity();
        let cfg = GpaConfig { max_iter: 1, ..Default::default() };
        let (r, _) = gpa_separate(
            &origin(),
            StrategyKind::Linf,
            QNorm::One,
            &mut oracle,
            &inst,
            &scaling,
            &cfg,
            1e-6,
            &[],
        )
        .unwrap();
        assert_eq!(r.cuts.len(), 1);
    }

    #[test]
    fn seeds_bounds_gives_two_n_halfspaces() {
        let cfg = GpaConfig { seed_bounds: true, ..Default::default() };
        let seeds = seed_initial_halfspaces(&cfg, 3, &[]);
        assert_eq!(seeds.len(), 6);
        let none = seed_initial_halfspaces(&GpaConfig::default(), 3, &[]);
        assert!(none.is_empty());
        let cfg2 = GpaConfig { seed_pool: true, ..Default::default() };
        let pool = vec![Cut { a_y: vec![0.0; 3], a_gamma: 1.0, rhs: 1.0, kind: CutKind::Optimality, source: StrategyKind::Cb }];
        assert_eq!(seed_initial_halfspaces(&cfg2, 3, &pool).len(), 1);
    }
}
