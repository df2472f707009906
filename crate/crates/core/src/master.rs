//! Master problem and the sequential decomposition driver.
//!
//! The master minimizes the scaled epigraph variable over binary `y`, the
//! `y`-domain side rows and the accumulated cut pool, solved by branch and
//! bound on LP relaxations (best-bound node order, most-fractional
//! branching, parent-basis warm starts). The driver alternates master
//! solves with the configured separation strategy until the separation
//! depth drops to tolerance, optionally switching to classical cuts once
//! the relative optimality gap is small.

use crate::gpa::GpaConfig;
use crate::kernel::{BasisSnapshot, KernelError, LinearProgram, LpStatus, RowSense, Sense, SimplexSolver};
use crate::model::{
    compute_scaling_beta, Cut, CutKind, DspOracle, MasterPoint, ProblemData,
    StrategyKind, ValidationIssue,
};
use crate::separation::{
    make_separator, separate_cb, CoreInfo, SepError, SepMode, Separator, SeparatorContext, SEP_TOL,
};
use std::collections::{BinaryHeap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};
use thiserror::Error;

const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum BdError {
    #[error("instance failed validation: {0:?}")]
    Validation(Vec<ValidationIssue>),
    #[error(transparent)]
    Sep(#[from] SepError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Master model: binary y, scaled epigraph variable, side rows, cut pool.
pub struct MasterModel {
    n: usize,
    gamma_low: f64,
    base: LinearProgram,
    pool: Vec<Cut>,
    pool_fps: HashSet<u64>,
    solver: Option<SimplexSolver>,
}

impl MasterModel {
    pub fn new(inst: &ProblemData, gamma_low: f64) -> Self {
        let n = inst.n();
        let mut base = LinearProgram::new(Sense::Minimize);
        for _ in 0..n {
            base.add_var(0.0, 0.0, 1.0);
        }
        base.add_var(1.0, gamma_low, f64::INFINITY);
        for row in &inst.y_domain.side_rows {
            base.add_row(row.coeffs.clone(), RowSense::Ge, row.rhs);
        }
        MasterModel {
            n,
            gamma_low,
            base,
            pool: Vec::new(),
            pool_fps: HashSet::new(),
            solver: None,
        }
    }

    pub fn pool(&self) -> &[Cut] {
        &self.pool
    }

    pub fn gamma_low(&self) -> f64 {
        self.gamma_low
    }

    /// Adds a cut unless an identical one is already pooled.
    pub fn add_cut(&mut self, cut: Cut) -> bool {
        let fp = cut.fingerprint();
        if !self.pool_fps.insert(fp) {
            return false;
        }
        let mut coeffs: Vec<(usize, f64)> = cut
            .a_y
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != 0.0)
            .map(|(j, &v)| (j, v))
            .collect();
        if cut.a_gamma != 0.0 {
            coeffs.push((self.n, cut.a_gamma));
        }
        if let Some(solver) = self.solver.as_mut() {
            solver.add_row(crate::kernel::Row { coeffs: coeffs.clone(), sense: RowSense::Ge, rhs: cut.rhs });
        }
        self.base.add_row(coeffs, RowSense::Ge, cut.rhs);
        self.pool.push(cut);
        true
    }

    /// Optimal binary point of the current relaxation via branch and bound;
    /// `None` when the master is infeasible.
    pub fn solve(&mut self) -> Result<Option<(Vec<f64>, f64)>, KernelError> {
        if self.solver.is_none() {
            self.solver = Some(SimplexSolver::new(&self.base)?);
        }
        let solver = self.solver.as_mut().unwrap();
        let n = self.n;

        #[derive(Clone)]
        struct Node {
            bound: f64,
            id: usize,
            lo: Vec<f64>,
            up: Vec<f64>,
            basis: Option<Arc<BasisSnapshot>>,
        }
        struct Key(f64, usize);
        impl PartialEq for Key {
            fn eq(&self, other: &Self) -> bool {
                self.0 == other.0 && self.1 == other.1
            }
        }
        impl Eq for Key {}
        impl PartialOrd for Key {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Key {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                // max-heap: invert for best-bound (lowest) first, FIFO ties
                other
                    .0
                    .total_cmp(&self.0)
                    .then_with(|| other.1.cmp(&self.1))
            }
        }

        let mut heap: BinaryHeap<Key> = BinaryHeap::new();
        let mut store: Vec<Option<Node>> = Vec::new();
        let mut next_id = 0usize;
        let root = Node {
            bound: f64::NEG_INFINITY,
            id: 0,
            lo: vec![0.0; n],
            up: vec![1.0; n],
            basis: None,
        };
        next_id += 1;
        heap.push(Key(root.bound, root.id));
        store.push(Some(root));
        let mut incumbent: Option<(Vec<f64>, f64)> = None;
        let mut best_obj = f64::INFINITY;

        while let Some(Key(_, id)) = heap.pop() {
            let node = store[id].take().expect("node popped twice");
            if node.bound >= best_obj - 1e-9 {
                continue;
            }
            if let Some(basis) = &node.basis {
                solver.restore_basis(basis);
            }
            for j in 0..n {
                solver.set_bounds(j, node.lo[j], node.up[j]);
            }
            let out = solver.solve()?;
            match out.status {
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => {
                    return Err(KernelError::NumericalFailure(
                        "master relaxation unbounded; gamma lower bound missing".into(),
                    ))
                }
                LpStatus::Optimal => {}
            }
            if out.objective >= best_obj - 1e-9 {
                continue;
            }
            // most fractional y, ties to the lowest index
            let mut branch_j = usize::MAX;
            let mut best_frac = INTEGRALITY_TOL;
            for j in 0..n {
                let v = out.primal[j];
                let frac = (v - v.round()).abs();
                if frac > best_frac {
                    best_frac = frac;
                    branch_j = j;
                }
            }
            if branch_j == usize::MAX {
                let y: Vec<f64> = out.primal[..n].iter().map(|&v| v.round()).collect();
                let gamma = out.primal[n];
                if out.objective < best_obj - 1e-12 {
                    best_obj = out.objective;
                    incumbent = Some((y, gamma));
                }
                continue;
            }
            let basis = solver.save_basis().map(Arc::new);
            let mut left = Node {
                bound: out.objective,
                id: next_id,
                lo: node.lo.clone(),
                up: node.up.clone(),
                basis: basis.clone(),
            };
            next_id += 1;
            left.up[branch_j] = 0.0;
            let mut right = Node {
                bound: out.objective,
                id: next_id,
                lo: node.lo,
                up: node.up,
                basis,
            };
            next_id += 1;
            right.lo[branch_j] = 1.0;
            heap.push(Key(left.bound, left.id));
            heap.push(Key(right.bound, right.id));
            store.push(Some(left));
            store.push(Some(right));
        }
        Ok(incumbent)
    }
}

/// Termination state of one decomposition run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdStatus {
    Optimal,
    IterLimit,
    Infeasible,
}

/// One iteration of the driver, for the report's depth log.
#[derive(Debug, Clone)]
pub struct IterationLog {
    pub iteration: usize,
    pub strategy: StrategyKind,
    pub depth: f64,
    pub cuts_added: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

#[derive(Debug, Clone)]
pub struct BdRunReport {
    pub status: BdStatus,
    pub incumbent: Option<Vec<f64>>,
    pub objective: f64,
    pub iterations: usize,
    pub optimality_cuts: usize,
    pub feasibility_cuts: usize,
    pub wall_time: Duration,
    pub depth_log: Vec<IterationLog>,
    pub switched_at: Option<usize>,
    pub warnings: Vec<String>,
}

/// Driver configuration, mirrored by the CLI flags.
#[derive(Debug, Clone)]
pub struct BdConfig {
    pub strategy: StrategyKind,
    pub mode: SepMode,
    /// Switch to classical cuts when the relative gap falls below this.
    pub switch_gap: Option<f64>,
    pub sep_tol: f64,
    pub gpa: GpaConfig,
    pub max_iters: usize,
    /// Lower bound for the scaled epigraph variable; default `-1e7 / beta`.
    pub gamma_low: Option<f64>,
    pub core_point: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for BdConfig {
    fn default() -> Self {
        BdConfig {
            strategy: StrategyKind::Cb,
            mode: SepMode::Direct,
            switch_gap: None,
            sep_tol: SEP_TOL,
            gpa: GpaConfig::default(),
            max_iters: 10_000,
            gamma_low: None,
            core_point: None,
            seed: 0,
        }
    }
}

/// Runs the decomposition with a generic (full LP) subproblem oracle.
pub fn bd_solve_generic(inst: Arc<ProblemData>, config: &BdConfig) -> Result<BdRunReport, BdError> {
    bd_solve(inst.clone(), config, &|i| {
        Box::new(crate::separation::GenericDspOracle::new(i))
    })
}

/// The distance-based decomposition loop.
pub fn bd_solve(
    inst: Arc<ProblemData>,
    config: &BdConfig,
    oracle_factory: &dyn Fn(Arc<ProblemData>) -> Box<dyn DspOracle>,
) -> Result<BdRunReport, BdError> {
    let start = Instant::now();
    let issues = crate::model::validate(&inst);
    if !issues.is_empty() {
        return Err(BdError::Validation(issues));
    }
    let mut warnings = Vec::new();

    let core_point: Vec<f64> = config
        .core_point
        .clone()
        .unwrap_or_else(|| vec![0.5; inst.n()]);
    let mut ub_oracle = oracle_factory(inst.clone());
    let (scaling, beta_warning) = compute_scaling_beta(&inst, &core_point, ub_oracle.as_mut())?;
    if let Some(w) = beta_warning {
        warnings.push(w);
    }

    // core info for the strategies that need it
    let core = match ub_oracle.solve_dsp(&core_point)? {
        crate::model::DspResolution::Bounded { q_tilde, .. } => {
            let fy: f64 = inst.f.iter().zip(&core_point).map(|(&f, &y)| f * y).sum();
            Some(CoreInfo { y_bar: core_point.clone(), q_tilde_bar: q_tilde, q_bar: fy + q_tilde })
        }
        crate::model::DspResolution::Unbounded { .. } => None,
    };
    if core.is_none() && matches!(config.strategy, StrategyKind::Mwp | StrategyKind::Cw) {
        return Err(SepError::CorePointOutsideDomain.into());
    }

    let ctx = SeparatorContext {
        inst: inst.clone(),
        scaling,
        sep_tol: config.sep_tol,
        core,
        gpa: config.gpa.clone(),
    };
    let mut separator: Box<dyn Separator> =
        make_separator(config.strategy, config.mode, &ctx, oracle_factory(inst.clone()))?;

    let gamma_low = config.gamma_low.unwrap_or(-1e7 / scaling.beta);
    let mut master = MasterModel::new(&inst, gamma_low);

    let mut lb = f64::NEG_INFINITY;
    let mut ub = f64::INFINITY;
    let mut incumbent: Option<Vec<f64>> = None;
    let mut switched_at: Option<usize> = None;
    let mut optimality_cuts = 0usize;
    let mut feasibility_cuts = 0usize;
    let mut depth_log = Vec::new();

    let mut t = 0usize;
    let status = loop {
        t += 1;
        if t > config.max_iters {
            break BdStatus::IterLimit;
        }
        let (y, gamma) = match master.solve()? {
            Some(sol) => sol,
            None => break BdStatus::Infeasible,
        };
        let point = MasterPoint::from_gamma(y, gamma, &scaling);
        let master_lb = scaling.beta * gamma;
        debug_assert!(master_lb >= lb - 1e-6 * (1.0 + lb.abs()), "lower bound regressed");
        lb = lb.max(master_lb);

        if let Some(q) = ub_oracle.q_of(&inst, &point.y)? {
            if q < ub {
                ub = q;
                incumbent = Some(point.y.clone());
            }
        }
        if let (Some(gap_limit), None) = (config.switch_gap, switched_at) {
            if ub.is_finite() {
                let gap = (ub - lb) / ub.abs().max(1e-10);
                if gap <= gap_limit {
                    switched_at = Some(t);
                }
            }
        }
        let use_cb = switched_at.is_some() && config.strategy != StrategyKind::Cb;
        let result = if use_cb {
            separate_cb(&point, &inst, &scaling, ub_oracle.as_mut(), config.sep_tol)?
        } else {
            separator.note_pool(master.pool());
            match separator.separate(&point) {
                Ok(r) => r,
                Err(SepError::DegenerateCwWeights) => {
                    warnings.push(format!(
                        "iteration {}: degenerate cw weights; classical fallback", t
                    ));
                    separate_cb(&point, &inst, &scaling, ub_oracle.as_mut(), config.sep_tol)?
                }
                Err(e) => return Err(e.into()),
            }
        };
        let tag = if use_cb { StrategyKind::Cb } else { separator.kind() };
        if result.optimal {
            depth_log.push(IterationLog {
                iteration: t,
                strategy: tag,
                depth: result.depth,
                cuts_added: 0,
                lower_bound: lb,
                upper_bound: ub,
            });
            break BdStatus::Optimal;
        }
        let mut added = 0usize;
        let mut any_violated = false;
        for cut in &result.cuts {
            if cut.violation_at(&point.y, point.gamma) > config.sep_tol {
                any_violated = true;
            }
            if master.add_cut(cut.clone()) {
                added += 1;
                match cut.kind {
                    CutKind::Optimality => optimality_cuts += 1,
                    CutKind::Feasibility => feasibility_cuts += 1,
                }
            }
        }
        depth_log.push(IterationLog {
            iteration: t,
            strategy: tag,
            depth: result.depth,
            cuts_added: added,
            lower_bound: lb,
            upper_bound: ub,
        });
        if added == 0 || !any_violated {
            warnings.push(format!(
                "iteration {}: no violated new cut (depth {}); stagnation guard",
                t, result.depth
            ));
            break BdStatus::IterLimit;
        }
    };

    let objective = match status {
        BdStatus::Infeasible => f64::NAN,
        _ => ub,
    };
    Ok(BdRunReport {
        status,
        incumbent,
        objective,
        iterations: t,
        optimality_cuts,
        feasibility_cuts,
        wall_time: start.elapsed(),
        depth_log,
        switched_at,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::micro_m1;

    #[test]
    fn empty_pool_master_sits_at_gamma_low() {
        let inst = micro_m1();
        let mut master = MasterModel::new(&inst, -5.0);
        let (y, gamma) = master.solve().unwrap().unwrap();
        assert_eq!(y.len(), 1);
        assert!((gamma + 5.0).abs() < 1e-9);
        assert!(y[0] == 0.0 || y[0] == 1.0);
    }

    #[test]
    fn pooled_flat_cut_moves_gamma() {
        let inst = micro_m1();
        let mut master = MasterModel::new(&inst, -5.0);
        master.add_cut(Cut {
            a_y: vec![0.0],
            a_gamma: 1.0,
            rhs: 2.0,
            kind: CutKind::Optimality,
            source: StrategyKind::Cb,
        });
        let (y, gamma) = master.solve().unwrap().unwrap();
        assert!((gamma - 2.0).abs() < 1e-9);
        assert_eq!(y[0], 0.0, "deterministic branching parks y at its lower bound");
    }

    #[test]
    fn duplicate_cuts_not_pooled() {
        let inst = micro_m1();
        let mut master = MasterModel::new(&inst, 0.0);
        let cut = Cut {
            a_y: vec![0.5],
            a_gamma: 1.0,
            rhs: 2.0,
            kind: CutKind::Optimality,
            source: StrategyKind::Cb,
        };
        assert!(master.add_cut(cut.clone()));
        assert!(!master.add_cut(cut));
        assert_eq!(master.pool().len(), 1);
    }

    #[test]
    fn contradictory_cuts_infeasible() {
        let inst = micro_m1();
        let mut master = MasterModel::new(&inst, -5.0);
        master.add_cut(Cut {
            a_y: vec![1.0],
            a_gamma: 0.0,
            rhs: 0.25,
            kind: CutKind::Feasibility,
            source: StrategyKind::Cb,
        });
        master.add_cut(Cut {
            a_y: vec![-1.0],
            a_gamma: 0.0,
            rhs: -0.75,
            kind: CutKind::Feasibility,
            source: StrategyKind::Cb,
        });
        assert!(master.solve().unwrap().is_none());
    }

    #[test]
    fn bd_cb_micro() {
        let inst = Arc::new(micro_m1());
        let config = BdConfig { gamma_low: Some(-100.0), ..Default::default() };
        let report = bd_solve_generic(inst, &config).unwrap();
        assert_eq!(report.status, BdStatus::Optimal);
        assert!((report.objective - 2.0).abs() < 1e-6);
        assert_eq!(report.incumbent.as_deref(), Some(&[0.0][..]));
        // lower bounds never regress
        let mut prev = f64::NEG_INFINITY;
        for log in &report.depth_log {
            assert!(log.lower_bound >= prev - 1e-9);
            prev = log.lower_bound;
        }
    }

    #[test]
    fn bd_l1_flat_first_cut() {
        let inst = Arc::new(micro_m1());
        let config = BdConfig {
            strategy: StrategyKind::L1,
            gamma_low: Some(-1e6),
            ..Default::default()
        };
        let report = bd_solve_generic(inst, &config).unwrap();
        assert_eq!(report.status, BdStatus::Optimal);
        assert!((report.objective - 2.0).abs() < 1e-6);
        // converges in two master solves: one cut, then optimal
        assert_eq!(report.iterations, 2, "log: {:?}", report.depth_log);
    }

    #[test]
    fn bd_all_strategies_micro() {
        for kind in StrategyKind::ALL {
            let inst = Arc::new(micro_m1());
            let config = BdConfig {
                strategy: kind,
                gamma_low: Some(-100.0),
                ..Default::default()
            };
            let report = bd_solve_generic(inst, &config).unwrap();
            assert_eq!(report.status, BdStatus::Optimal, "strategy {}", kind);
            assert!(
                (report.objective - 2.0).abs() < 1e-5,
                "strategy {} objective {}",
                kind,
                report.objective
            );
        }
    }

    #[test]
    fn bd_gpa_modes_micro() {
        for kind in [StrategyKind::L1, StrategyKind::L2, StrategyKind::Linf] {
            let inst = Arc::new(micro_m1());
            let config = BdConfig {
                strategy: kind,
                mode: SepMode::Gpa,
                gamma_low: Some(-100.0),
                ..Default::default()
            };
            let report = bd_solve_generic(inst, &config).unwrap();
            assert_eq!(report.status, BdStatus::Optimal, "strategy {}", kind);
            assert!((report.objective - 2.0).abs() < 1e-5);
        }
    }
}
