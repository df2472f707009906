//! Property suites: every module invariant run against freshly generated
//! random instances. The acceptance tests and the `verify` subcommand both
//! dispatch here.

use crate::bench::{brute_force_oracle, q_star, OracleResult};
use crate::cflp::{self, CflpOracle};
use crate::gpa::{gpa_separate, GpaConfig};
use crate::kernel::{solve_lp, LinearProgram, LpStatus, RowSense, Sense, SimplexSolver};
use crate::master::{bd_solve, BdStatus};
use crate::model::{
    compute_scaling_beta, violation, DspOracle, DspResolution, DualCertificate, MasterPoint,
    ProblemData, ScalingInfo, StrategyKind,
};
use crate::separation::{
    make_separator, project_onto_epigraph, separate_cb, separate_l2, CoreInfo, NspSeparator,
    QNorm, SepMode, Separator, SeparatorContext,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

impl SuiteReport {
    fn pass(name: &str, details: String) -> Self {
        SuiteReport { name: name.to_string(), passed: true, details }
    }

    fn fail(name: &str, details: String) -> Self {
        SuiteReport { name: name.to_string(), passed: false, details }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// (facilities, customers) pairs for generated instances.
    pub sizes: Vec<(usize, usize)>,
    pub ratios: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Minimum number of separated points for the pointwise suites.
    pub points_target: usize,
    pub knapsack_trials: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            sizes: vec![(6, 8), (8, 12), (10, 15)],
            ratios: vec![5.0, 10.0],
            seeds: vec![1, 2],
            points_target: 50,
            knapsack_trials: 200,
        }
    }
}

/// A prepared instance: scaling, core info and a separation context.
pub struct Prepared {
    pub cflp: Arc<cflp::CflpInstance>,
    pub inst: Arc<ProblemData>,
    pub scaling: ScalingInfo,
    pub ctx: SeparatorContext,
}

impl Prepared {
    pub fn oracle(&self) -> CflpOracle {
        CflpOracle::new(self.cflp.clone(), self.inst.clone())
    }
}

pub fn prepare(n: usize, k: usize, r: f64, seed: u64) -> Prepared {
    let cflp = Arc::new(cflp::generate_cst(n, k, r, seed));
    let inst = Arc::new(cflp::to_problem_data(&cflp));
    let core_point = super::feasible_core_point(&cflp, &inst);
    let mut oracle = CflpOracle::new(cflp.clone(), inst.clone());
    let (scaling, _) =
        compute_scaling_beta(&inst, &core_point, &mut oracle).expect("beta computation");
    let core = match oracle.solve_dsp(&core_point).expect("core dsp") {
        DspResolution::Bounded { q_tilde, .. } => {
            let fy: f64 = inst.f.iter().zip(&core_point).map(|(&f, &y)| f * y).sum();
            CoreInfo { y_bar: core_point.clone(), q_tilde_bar: q_tilde, q_bar: fy + q_tilde }
        }
        DspResolution::Unbounded { .. } => panic!("core point must lie in dom(Q)"),
    };
    let ctx = SeparatorContext {
        inst: inst.clone(),
        scaling,
        sep_tol: crate::separation::SEP_TOL,
        core: Some(core),
        gpa: GpaConfig { seed_bounds: true, ..Default::default() },
    };
    Prepared { cflp, inst, scaling, ctx }
}

fn default_instances(opts: &VerifyOptions) -> Vec<Prepared> {
    let mut out = Vec::new();
    for &(n, k) in &opts.sizes {
        for &r in &opts.ratios {
            for &seed in &opts.seeds {
                out.push(prepare(n, k, r, seed));
            }
        }
    }
    out
}

/// Samples master points strictly outside the epigraph (mix of binary and
/// fractional y, always inside dom(Q)).
pub fn sample_outside_points(
    prep: &Prepared,
    rng: &mut ChaCha12Rng,
    count: usize,
) -> Vec<MasterPoint> {
    let n = prep.inst.n();
    let mut oracle = prep.oracle();
    let mut points = Vec::new();
    let mut guard = 0;
    while points.len() < count && guard < 40 * count {
        guard += 1;
        let mut y = vec![0.0; n];
        if rng.random_range(0.0..1.0) < 0.5 {
            for v in y.iter_mut() {
                *v = if rng.random_range(0.0..1.0) < 0.6 { 1.0 } else { 0.0 };
            }
        } else {
            for v in y.iter_mut() {
                *v = rng.random_range(0.0..1.0);
            }
        }
        let q = match oracle.q_of(&prep.inst, &y) {
            Ok(Some(q)) => q,
            _ => continue,
        };
        let frac: f64 = rng.random_range(0.01..0.4);
        let eta = q - frac * q.abs().max(1.0);
        points.push(MasterPoint::from_eta(y, eta, &prep.scaling));
    }
    points
}

/// Kernel contract: strong duality, Farkas pairing between the primal and
/// dual subproblems, warm-started re-solves equal cold solves.
pub fn suite_kernel(_opts: &VerifyOptions) -> SuiteReport {
    let name = "kernel-contract";
    let mut rng = ChaCha12Rng::seed_from_u64(0xfeed);
    let mut pair_checked = 0;
    for trial in 0..60 {
        // random subproblem data
        let m = 2 + (trial % 4);
        let np = 2 + (trial % 5);
        let n = 2;
        let mut a_t = Vec::new();
        let mut b_t = Vec::new();
        for i in 0..m {
            for jx in 0..np {
                if rng.random_range(0.0..1.0) < 0.7 {
                    a_t.push((i, jx, rng.random_range(-2.0..2.0)));
                }
            }
            for j in 0..n {
                if rng.random_range(0.0..1.0) < 0.7 {
                    b_t.push((i, j, rng.random_range(-2.0..2.0)));
                }
            }
        }
        let inst = ProblemData {
            c: (0..np).map(|_| rng.random_range(0.0..3.0)).collect(),
            f: (0..n).map(|_| rng.random_range(-1.0..3.0)).collect(),
            a: crate::model::SparseMat::from_triplets(m, np, &a_t).unwrap(),
            b: crate::model::SparseMat::from_triplets(m, n, &b_t).unwrap(),
            rhs: (0..m).map(|_| rng.random_range(-1.0..1.5)).collect(),
            y_domain: Default::default(),
        };
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let by = inst.b.mul_vec(&y);
        // PSP: min c'x, Ax >= b - By
        let mut psp = LinearProgram::new(Sense::Minimize);
        for jx in 0..np {
            psp.add_var(inst.c[jx], 0.0, f64::INFINITY);
        }
        for i in 0..m {
            psp.add_row(inst.a.row(i).to_vec(), RowSense::Ge, inst.rhs[i] - by[i]);
        }
        // DSP: max p'(b - By), p'A <= c
        let mut dsp = LinearProgram::new(Sense::Maximize);
        for i in 0..m {
            dsp.add_var(inst.rhs[i] - by[i], 0.0, f64::INFINITY);
        }
        for jx in 0..np {
            dsp.add_row(
                inst.a.col(jx).to_vec(),
                RowSense::Le,
                inst.c[jx],
            );
        }
        let pout = match solve_lp(&psp) {
            Ok(o) => o,
            Err(e) => return SuiteReport::fail(name, format!("psp solve failed: {}", e)),
        };
        let dout = match solve_lp(&dsp) {
            Ok(o) => o,
            Err(e) => return SuiteReport::fail(name, format!("dsp solve failed: {}", e)),
        };
        match (pout.status, dout.status) {
            (LpStatus::Optimal, LpStatus::Optimal) => {
                pair_checked += 1;
                let gap = (pout.objective - dout.objective).abs();
                if gap > 1e-6 * (1.0 + pout.objective.abs()) {
                    return SuiteReport::fail(
                        name,
                        format!("strong duality violated: {} vs {}", pout.objective, dout.objective),
                    );
                }
            }
            (LpStatus::Infeasible, LpStatus::Unbounded) => {
                pair_checked += 1;
            }
            (LpStatus::Infeasible, LpStatus::Optimal)
            | (LpStatus::Optimal, LpStatus::Unbounded) => {
                return SuiteReport::fail(
                    name,
                    format!("farkas pairing violated: psp {:?}, dsp {:?}", pout.status, dout.status),
                );
            }
            _ => {}
        }
    }
    // warm-start equivalence on a small LP
    let mut lp = LinearProgram::new(Sense::Maximize);
    lp.add_var(1.0, 0.0, f64::INFINITY);
    lp.add_var(2.0, 0.0, f64::INFINITY);
    lp.add_row(vec![(0, 1.0), (1, 1.0)], RowSense::Le, 10.0);
    lp.add_row(vec![(0, 3.0), (1, 1.0)], RowSense::Le, 15.0);
    let mut solver = SimplexSolver::new(&lp).unwrap();
    solver.solve().unwrap();
    for variant in 0..5 {
        let obj = [1.0 + variant as f64, 2.0 - 0.3 * variant as f64];
        solver.set_objective(&obj);
        let warm = solver.solve().unwrap().objective;
        let mut lp2 = lp.clone();
        lp2.objective = obj.to_vec();
        let cold = solve_lp(&lp2).unwrap().objective;
        if (warm - cold).abs() > 1e-8 * (1.0 + cold.abs()) {
            return SuiteReport::fail(name, format!("warm {} != cold {}", warm, cold));
        }
    }
    SuiteReport::pass(name, format!("{} farkas/duality pairs checked", pair_checked))
}

/// Certificate algebra: valid epigraph points are never cut off; the kind
/// classification pins a_gamma; normalized distances are homogeneous.
pub fn suite_certificates(opts: &VerifyOptions) -> SuiteReport {
    let name = "certificate-algebra";
    let mut rng = ChaCha12Rng::seed_from_u64(0xc0de);
    let mut checked = 0;
    for prep in default_instances(opts).into_iter().take(4) {
        let mut oracle = prep.oracle();
        let points = sample_outside_points(&prep, &mut rng, 4);
        for point in &points {
            let r = match separate_cb(point, &prep.inst, &prep.scaling, &mut oracle, 1e-6) {
                Ok(r) => r,
                Err(e) => return SuiteReport::fail(name, e.to_string()),
            };
            let cert = match r.certificate {
                Some(c) => c,
                None => continue,
            };
            if !cert.in_cone(&prep.inst, crate::model::FEAS_TOL) {
                return SuiteReport::fail(name, "certificate outside the dual cone".into());
            }
            // sample feasible epigraph pairs and check they are not cut off
            for _ in 0..5 {
                let mut y = vec![0.0; prep.inst.n()];
                for v in y.iter_mut() {
                    *v = if rng.random_range(0.0..1.0) < 0.7 { 1.0 } else { 0.0 };
                }
                if let Ok(Some(q)) = oracle.q_of(&prep.inst, &y) {
                    let eta = q + rng.random_range(0.0..1.0) * q.abs().max(1.0);
                    let feasible = MasterPoint::from_eta(y, eta, &prep.scaling);
                    let v = violation(&cert, &feasible, &prep.inst).unwrap();
                    let scale = cert.p.iter().fold(cert.pi0, |a, &x| a.max(x)).max(1.0);
                    if v > crate::model::FEAS_TOL * scale * (1.0 + q.abs()) {
                        return SuiteReport::fail(
                            name,
                            format!("feasible pair cut off: violation {}", v),
                        );
                    }
                    checked += 1;
                }
            }
            // homogeneity of the normalized distance
            let g = |c: &DualCertificate| c.p.iter().sum::<f64>() + c.pi0;
            let base = violation(&cert, point, &prep.inst).unwrap() / g(&cert);
            for alpha in [1e-3, 1.0, 1e3] {
                let scaled = cert.scaled(alpha);
                let d = violation(&scaled, point, &prep.inst).unwrap() / g(&scaled);
                if (d - base).abs() > 1e-9 * (1.0 + base.abs()) {
                    return SuiteReport::fail(name, format!("homogeneity broken at {}", alpha));
                }
            }
        }
    }
    SuiteReport::pass(name, format!("{} feasible pairs honored by certificates", checked))
}

/// Pointwise results of every strategy's separation at one point.
pub struct DepthSample {
    pub cb: f64,
    pub linf: f64,
    pub l4: f64,
    pub l2: f64,
    pub l1: f64,
    pub rl1: f64,
}

/// Builds per-instance separators once and evaluates all depths per point.
pub struct DepthLab {
    pub prep: Prepared,
    linf: NspSeparator,
    l1: NspSeparator,
    rl1: NspSeparator,
    mis: NspSeparator,
    l4: Box<dyn Separator>,
    oracle: CflpOracle,
}

impl DepthLab {
    pub fn new(prep: Prepared) -> Self {
        let linf = NspSeparator::build(StrategyKind::Linf, &prep.ctx).unwrap();
        let l1 = NspSeparator::build(StrategyKind::L1, &prep.ctx).unwrap();
        let rl1 = NspSeparator::build(StrategyKind::Rl1, &prep.ctx).unwrap();
        let mis = NspSeparator::build(StrategyKind::Mis, &prep.ctx).unwrap();
        let l4 = make_separator(
            StrategyKind::L4,
            SepMode::Direct,
            &prep.ctx,
            Box::new(CflpOracle::new(prep.cflp.clone(), prep.inst.clone())),
        )
        .unwrap();
        let oracle = prep.oracle();
        DepthLab { prep, linf, l1, rl1, mis, l4, oracle }
    }

    pub fn depths(&mut self, point: &MasterPoint) -> Result<DepthSample, String> {
        let cb = separate_cb(point, &self.prep.inst, &self.prep.scaling, &mut self.oracle, 1e-6)
            .map_err(|e| e.to_string())?
            .depth;
        let linf = self.linf.separate(point).map_err(|e| e.to_string())?.depth;
        let l1 = self.l1.separate(point).map_err(|e| e.to_string())?.depth;
        let rl1 = self.rl1.separate(point).map_err(|e| e.to_string())?.depth;
        let l4 = self.l4.separate(point).map_err(|e| e.to_string())?.depth;
        let (l2r, _) = separate_l2(point, &self.prep.inst, &self.prep.scaling, 1e-6)
            .map_err(|e| e.to_string())?;
        Ok(DepthSample { cb, linf, l4, l2: l2r.depth, l1, rl1 })
    }

    pub fn mis_depth(&mut self, point: &MasterPoint) -> Result<f64, String> {
        Ok(self.mis.separate(point).map_err(|e| e.to_string())?.depth)
    }
}

/// Depth chain: cb >= linf >= l4 >= l2 >= l1 >= rl1 at sampled points.
pub fn suite_depth_chain(opts: &VerifyOptions) -> SuiteReport {
    let name = "depth-chain";
    let mut rng = ChaCha12Rng::seed_from_u64(0x11);
    let per = (opts.points_target / (opts.sizes.len() * opts.ratios.len() * opts.seeds.len()).max(1)) + 1;
    let mut total = 0;
    for prep in default_instances(opts) {
        let points = sample_outside_points(&prep, &mut rng, per);
        let mut lab = DepthLab::new(prep);
        for point in &points {
            let d = match lab.depths(point) {
                Ok(d) => d,
                Err(e) => return SuiteReport::fail(name, e),
            };
            let slack = 1e-6;
            let chain = [
                ("cb >= linf", d.cb, d.linf),
                ("linf >= l4", d.linf, d.l4),
                ("l4 >= l2", d.l4, d.l2),
                ("l2 >= l1", d.l2, d.l1),
                ("l1 >= rl1", d.l1, d.rl1),
            ];
            for (label, hi, lo) in chain {
                if !(hi >= lo - slack) {
                    return SuiteReport::fail(
                        name,
                        format!("{} violated: {} < {}", label, hi, lo),
                    );
                }
            }
            total += 1;
        }
    }
    if total < opts.points_target {
        return SuiteReport::fail(name, format!("only {} points sampled", total));
    }
    SuiteReport::pass(name, format!("chain held at {} points", total))
}

/// Separation/projection duality: direct lp depths equal lq projection
/// distances (p = 1, 2, inf).
pub fn suite_projection_duality(opts: &VerifyOptions) -> SuiteReport {
    let name = "projection-duality";
    let mut rng = ChaCha12Rng::seed_from_u64(0x22);
    let mut total = 0;
    for prep in default_instances(opts).into_iter().take(6) {
        let points = sample_outside_points(&prep, &mut rng, 4);
        let mut l1 = NspSeparator::build(StrategyKind::L1, &prep.ctx).unwrap();
        let mut linf = NspSeparator::build(StrategyKind::Linf, &prep.ctx).unwrap();
        for point in &points {
            let d1 = l1.separate(point).map(|r| r.depth);
            let dinf = linf.separate(point).map(|r| r.depth);
            let (d1, dinf) = match (d1, dinf) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return SuiteReport::fail(name, e.to_string()),
            };
            let pinf = project_onto_epigraph(point, &prep.inst, &prep.scaling, QNorm::Inf);
            let p1 = project_onto_epigraph(point, &prep.inst, &prep.scaling, QNorm::One);
            let (pinf, p1) = match (pinf, p1) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return SuiteReport::fail(name, e.to_string()),
            };
            // deepest l1 cut <-> linf projection; deepest linf cut <-> l1 projection
            if (d1 - pinf.distance).abs() > 1e-6 * (1.0 + d1.abs()) {
                return SuiteReport::fail(
                    name,
                    format!("l1 depth {} != linf projection {}", d1, pinf.distance),
                );
            }
            if (dinf - p1.distance).abs() > 1e-6 * (1.0 + dinf.abs()) {
                return SuiteReport::fail(
                    name,
                    format!("linf depth {} != l1 projection {}", dinf, p1.distance),
                );
            }
            // euclidean: certificate's normalized violation vs distance
            let (l2r, proj) = match separate_l2(point, &prep.inst, &prep.scaling, 1e-6) {
                Ok(v) => v,
                Err(e) => return SuiteReport::fail(name, e.to_string()),
            };
            if let Some(cert) = &l2r.certificate {
                let viol = violation(cert, point, &prep.inst).unwrap();
                let coeff = prep.inst.b.tr_mul_vec(&cert.p);
                let mut s = (prep.scaling.beta * cert.pi0).powi(2);
                for (j, &v) in coeff.iter().enumerate() {
                    s += (v - cert.pi0 * prep.inst.f[j]).powi(2);
                }
                let nd = viol / s.sqrt();
                if (nd - proj.distance).abs() > 1e-6 * (1.0 + proj.distance) {
                    return SuiteReport::fail(
                        name,
                        format!("l2 normalized violation {} != distance {}", nd, proj.distance),
                    );
                }
            }
            total += 1;
        }
    }
    SuiteReport::pass(name, format!("duality held at {} points", total))
}

/// Support: the deepest cut vanishes at the recovered projection point.
pub fn suite_support(opts: &VerifyOptions) -> SuiteReport {
    let name = "support-at-projection";
    let mut rng = ChaCha12Rng::seed_from_u64(0x33);
    let mut total = 0;
    for prep in default_instances(opts).into_iter().take(6) {
        let points = sample_outside_points(&prep, &mut rng, 3);
        let mut l1 = NspSeparator::build(StrategyKind::L1, &prep.ctx).unwrap();
        let mut linf = NspSeparator::build(StrategyKind::Linf, &prep.ctx).unwrap();
        for point in &points {
            let cases: Vec<(&str, crate::separation::SeparationResult, QNorm)> = vec![
                ("l1", match l1.separate(point) { Ok(r) => r, Err(e) => return SuiteReport::fail(name, e.to_string()) }, QNorm::Inf),
                ("linf", match linf.separate(point) { Ok(r) => r, Err(e) => return SuiteReport::fail(name, e.to_string()) }, QNorm::One),
            ];
            for (label, result, q) in cases {
                if result.cuts.is_empty() {
                    continue;
                }
                let proj = match project_onto_epigraph(point, &prep.inst, &prep.scaling, q) {
                    Ok(p) => p,
                    Err(e) => return SuiteReport::fail(name, e.to_string()),
                };
                let v = result.cuts[0].violation_at(&proj.y, proj.gamma);
                if v.abs() > 1e-6 * (1.0 + result.depth) {
                    return SuiteReport::fail(
                        name,
                        format!("{} cut does not support at projection: {}", label, v),
                    );
                }
                total += 1;
            }
            // euclidean route returns its projection directly
            let (l2r, proj) = match separate_l2(point, &prep.inst, &prep.scaling, 1e-6) {
                Ok(v) => v,
                Err(e) => return SuiteReport::fail(name, e.to_string()),
            };
            if let Some(cut) = l2r.cuts.first() {
                // normalize by the coefficient scale so the check is in
                // distance units like the others
                let mut norm = cut.a_gamma * cut.a_gamma;
                for &v in &cut.a_y {
                    norm += v * v;
                }
                let v = cut.violation_at(&proj.y, proj.gamma) / norm.sqrt();
                if v.abs() > 1e-6 * (1.0 + l2r.depth) {
                    return SuiteReport::fail(name, format!("l2 support violated: {}", v));
                }
                total += 1;
            }
        }
    }
    SuiteReport::pass(name, format!("support held for {} cuts", total))
}

/// Flat cut: far below the epigraph the deepest l1 cut is flat at the
/// unrestricted optimum.
pub fn suite_flat_cut(opts: &VerifyOptions) -> SuiteReport {
    let name = "flat-cut";
    let mut count = 0;
    for prep in default_instances(opts).into_iter().take(10) {
        let qs = match q_star(&prep.inst) {
            Ok(v) => v,
            Err(e) => return SuiteReport::fail(name, e.to_string()),
        };
        let n = prep.inst.n() as f64;
        let eta = qs - 10.0 * prep.scaling.beta * (2.0 + n);
        let point = MasterPoint::from_eta(vec![0.3; prep.inst.n()], eta, &prep.scaling);
        let mut l1 = NspSeparator::build(StrategyKind::L1, &prep.ctx).unwrap();
        let r = match l1.separate(&point) {
            Ok(r) => r,
            Err(e) => return SuiteReport::fail(name, e.to_string()),
        };
        let cut = match r.cuts.first() {
            Some(c) => c,
            None => return SuiteReport::fail(name, "no cut at deep point".into()),
        };
        let ay_max = cut.a_y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        // compare in normalized units (the cut satisfies g = 1)
        if ay_max > 1e-6 {
            return SuiteReport::fail(name, format!("cut not flat: |a_y| = {}", ay_max));
        }
        let level = cut.rhs / cut.a_gamma;
        let target = qs / prep.scaling.beta;
        if (level - target).abs() > 1e-6 * target.abs().max(1.0) {
            return SuiteReport::fail(
                name,
                format!("flat level {} != Q*/beta {}", level, target),
            );
        }
        count += 1;
    }
    SuiteReport::pass(name, format!("flat on {} instances", count))
}

/// Optimality kind: for p > 1 and eta below the unrestricted optimum, the
/// deepest cut is an optimality cut even outside dom(Q).
pub fn suite_optimality_kind(opts: &VerifyOptions) -> SuiteReport {
    let name = "optimality-kind";
    let mut rng = ChaCha12Rng::seed_from_u64(0x44);
    let mut count = 0;
    let instances = default_instances(opts);
    let wanted = 10usize.min(2 * instances.len());
    for prep in instances {
        let qs = match q_star(&prep.inst) {
            Ok(v) => v,
            Err(e) => return SuiteReport::fail(name, e.to_string()),
        };
        let n = prep.inst.n();
        let mut oracle = prep.oracle();
        // candidate points outside dom(Q): everything closed (always
        // infeasible), plus random under-capacity masks
        let mut candidates = vec![vec![0.0; n]];
        for _ in 0..3 {
            let mut y = vec![0.0; n];
            let open = rng.random_range(0..n / 2 + 1);
            for _ in 0..open {
                let j = rng.random_range(0..n);
                y[j] = 1.0;
            }
            candidates.push(y);
        }
        let mut used = 0;
        for y in candidates {
            if used >= 2 {
                break;
            }
            if let Ok(Some(_)) = oracle.q_of(&prep.inst, &y) {
                continue; // still feasible; want outside dom(Q)
            }
            used += 1;
            let eta = qs - 0.5 * qs.abs().max(1.0);
            let point = MasterPoint::from_eta(y, eta, &prep.scaling);
            let mut linf = NspSeparator::build(StrategyKind::Linf, &prep.ctx).unwrap();
            let rinf = match linf.separate(&point) {
                Ok(r) => r,
                Err(e) => return SuiteReport::fail(name, format!("linf: {}", e)),
            };
            let pi0_inf = rinf.certificate.as_ref().map_or(0.0, |c| c.pi0);
            if pi0_inf <= 1e-9 {
                return SuiteReport::fail(name, format!("linf pi0 = {} not positive", pi0_inf));
            }
            let (rl2, _) = match separate_l2(&point, &prep.inst, &prep.scaling, 1e-6) {
                Ok(v) => v,
                Err(e) => return SuiteReport::fail(name, format!("l2: {}", e)),
            };
            let pi0_l2 = rl2.certificate.as_ref().map_or(0.0, |c| c.pi0);
            if pi0_l2 <= 1e-9 {
                return SuiteReport::fail(name, format!("l2 pi0 = {} not positive", pi0_l2));
            }
            count += 1;
        }
    }
    if count < wanted {
        return SuiteReport::fail(name, format!("only {} infeasible points exercised", count));
    }
    SuiteReport::pass(name, format!("optimality cuts at {} points outside dom(Q)", count))
}

/// Binding normalization: g = 1 at every separation optimum with positive
/// depth (checked for the linear pseudonorms and both lp reformulations).
pub fn suite_binding(opts: &VerifyOptions) -> SuiteReport {
    let name = "binding-normalization";
    let mut rng = ChaCha12Rng::seed_from_u64(0x55);
    let mut count = 0;
    for prep in default_instances(opts).into_iter().take(4) {
        let points = sample_outside_points(&prep, &mut rng, 3);
        // pseudonorm weights for explicit g recomputation
        let (w_mis, w0_mis) = crate::separation::weights_mis(&prep.inst);
        let w_rl1: Vec<f64> = (0..prep.inst.m())
            .map(|i| prep.inst.b.row(i).iter().map(|&(_, v)| v.abs()).sum())
            .collect();
        let w0_rl1 =
            prep.scaling.beta + prep.inst.f.iter().map(|v| v.abs()).sum::<f64>();
        let mut mis = NspSeparator::build(StrategyKind::Mis, &prep.ctx).unwrap();
        let mut rl1 = NspSeparator::build(StrategyKind::Rl1, &prep.ctx).unwrap();
        let mut l1 = NspSeparator::build(StrategyKind::L1, &prep.ctx).unwrap();
        let mut linf = NspSeparator::build(StrategyKind::Linf, &prep.ctx).unwrap();
        let mut l4 = make_separator(
            StrategyKind::L4,
            SepMode::Direct,
            &prep.ctx,
            Box::new(prep.oracle()),
        )
        .unwrap();
        for point in &points {
            let beta = prep.scaling.beta;
            type GFn<'a> = Box<dyn Fn(&DualCertificate, &[f64]) -> f64 + 'a>;
            let checks: Vec<(&str, Result<crate::separation::SeparationResult, _>, GFn)> = vec![
                (
                    "mis",
                    mis.separate(point),
                    Box::new(|c: &DualCertificate, _: &[f64]| {
                        c.p.iter().zip(&w_mis).map(|(&p, &w)| p * w).sum::<f64>() + w0_mis * c.pi0
                    }),
                ),
                (
                    "rl1",
                    rl1.separate(point),
                    Box::new(|c: &DualCertificate, _: &[f64]| {
                        c.p.iter().zip(&w_rl1).map(|(&p, &w)| p * w).sum::<f64>() + w0_rl1 * c.pi0
                    }),
                ),
                (
                    "l1",
                    l1.separate(point),
                    Box::new(move |c: &DualCertificate, ay: &[f64]| {
                        beta * c.pi0 + ay.iter().map(|v| v.abs()).sum::<f64>()
                    }),
                ),
                (
                    "linf",
                    linf.separate(point),
                    Box::new(move |c: &DualCertificate, ay: &[f64]| {
                        ay.iter().fold(beta * c.pi0, |a, &v| a.max(v.abs()))
                    }),
                ),
                (
                    "l4",
                    l4.separate(point),
                    Box::new(move |c: &DualCertificate, ay: &[f64]| {
                        (ay.iter().map(|v| v.powi(4)).sum::<f64>()
                            + (beta * c.pi0).powi(4))
                        .powf(0.25)
                    }),
                ),
            ];
            for (label, result, g) in checks {
                let r = match result {
                    Ok(r) => r,
                    Err(e) => return SuiteReport::fail(name, format!("{}: {}", label, e)),
                };
                if r.optimal || !r.depth.is_finite() {
                    continue;
                }
                let cert = r.certificate.as_ref().unwrap();
                let gv = g(cert, &r.cuts[0].a_y);
                if (gv - 1.0).abs() > 1e-6 {
                    return SuiteReport::fail(
                        name,
                        format!("{}: normalization g = {} not binding", label, gv),
                    );
                }
                count += 1;
            }
        }
    }
    SuiteReport::pass(name, format!("binding at {} optima", count))
}

/// Guided projections agree with the direct reformulations and start from
/// the classical cut.
pub fn suite_gpa_consistency(opts: &VerifyOptions) -> SuiteReport {
    let name = "gpa-consistency";
    let mut rng = ChaCha12Rng::seed_from_u64(0x66);
    let mut count = 0;
    let strict = GpaConfig { tol: 1e-7, max_iter: 60, seed_bounds: true, seed_pool: false };
    for prep in default_instances(opts).into_iter().take(4) {
        let points = sample_outside_points(&prep, &mut rng, 3);
        let mut l1 = NspSeparator::build(StrategyKind::L1, &prep.ctx).unwrap();
        let mut linf = NspSeparator::build(StrategyKind::Linf, &prep.ctx).unwrap();
        for point in &points {
            let direct: Vec<(StrategyKind, QNorm, f64)> = vec![
                (StrategyKind::L1, QNorm::Inf, match l1.separate(point) { Ok(r) => r.depth, Err(e) => return SuiteReport::fail(name, e.to_string()) }),
                (StrategyKind::L2, QNorm::Two, match separate_l2(point, &prep.inst, &prep.scaling, 1e-6) { Ok((r, _)) => r.depth, Err(e) => return SuiteReport::fail(name, e.to_string()) }),
                (StrategyKind::Linf, QNorm::One, match linf.separate(point) { Ok(r) => r.depth, Err(e) => return SuiteReport::fail(name, e.to_string()) }),
            ];
            for (kind, q, d_direct) in direct {
                let mut oracle = prep.oracle();
                let (r, _) = match gpa_separate(
                    point,
                    kind,
                    q,
                    &mut oracle,
                    &prep.inst,
                    &prep.scaling,
                    &strict,
                    1e-6,
                    &[],
                ) {
                    Ok(v) => v,
                    Err(e) => return SuiteReport::fail(name, e.to_string()),
                };
                if (r.depth - d_direct).abs() > 1e-4 * d_direct.abs().max(1.0) {
                    return SuiteReport::fail(
                        name,
                        format!("{}: gpa depth {} vs direct {}", kind, r.depth, d_direct),
                    );
                }
                // first cut is the classical cut
                let mut cb_oracle = prep.oracle();
                let cb = match separate_cb(point, &prep.inst, &prep.scaling, &mut cb_oracle, 1e-6)
                {
                    Ok(c) => c,
                    Err(e) => return SuiteReport::fail(name, e.to_string()),
                };
                if let (Some(first), Some(cbcut)) = (r.cuts.first(), cb.cuts.first()) {
                    let scale = 1.0 + cbcut.a_y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
                    for j in 0..first.a_y.len() {
                        if (first.a_y[j] - cbcut.a_y[j]).abs() > 1e-7 * scale {
                            return SuiteReport::fail(
                                name,
                                format!("first gpa cut differs from classical at {}", j),
                            );
                        }
                    }
                    if (first.a_gamma - cbcut.a_gamma).abs() > 1e-7 * scale
                        || (first.rhs - cbcut.rhs).abs() > 1e-7 * (1.0 + cbcut.rhs.abs())
                    {
                        return SuiteReport::fail(name, "first gpa cut differs from classical".into());
                    }
                }
                count += 1;
            }
        }
    }
    SuiteReport::pass(name, format!("gpa agreed with direct at {} separations", count))
}

/// Knapsack oracle agreement plus the linear-time scaling check.
pub fn suite_knapsack(opts: &VerifyOptions) -> SuiteReport {
    let name = "knapsack-oracle";
    let mut rng = ChaCha12Rng::seed_from_u64(0x77);
    for trial in 0..opts.knapsack_trials {
        let k = 1 + (trial % 17);
        let values: Vec<f64> = (0..k).map(|_| rng.random_range(-20.0..20.0)).collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(1.0..12.0)).collect();
        let cap = rng.random_range(0.05..1.2) * weights.iter().sum::<f64>();
        let (kappa, _) = cflp::kappa_from_items(&values, &weights, cap);
        let mut lp = LinearProgram::new(Sense::Minimize);
        for l in 0..k {
            lp.add_var(values[l], 0.0, 1.0);
        }
        lp.add_row((0..k).map(|l| (l, weights[l])).collect(), RowSense::Le, cap);
        let out = match solve_lp(&lp) {
            Ok(o) => o,
            Err(e) => return SuiteReport::fail(name, e.to_string()),
        };
        if (kappa - out.objective).abs() > 1e-8 * (1.0 + out.objective.abs()) {
            return SuiteReport::fail(
                name,
                format!("trial {}: kappa {} vs lp {}", trial, kappa, out.objective),
            );
        }
    }
    // empirical linear scaling: quadruple size, require <= 5x time
    let time_for = |k: usize, rng: &mut ChaCha12Rng| -> f64 {
        let values: Vec<f64> = (0..k).map(|_| rng.random_range(-20.0..20.0)).collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(1.0..12.0)).collect();
        let cap = 0.3 * weights.iter().sum::<f64>();
        let mut best = f64::INFINITY;
        for _ in 0..7 {
            let t = Instant::now();
            let (kappa, _) = cflp::kappa_from_items(&values, &weights, cap);
            let dt = t.elapsed().as_secs_f64();
            assert!(kappa.is_finite());
            best = best.min(dt);
        }
        best
    };
    let t1 = time_for(100_000, &mut rng);
    let t4 = time_for(400_000, &mut rng);
    let ratio = t4 / t1.max(1e-9);
    if ratio > 5.0 {
        return SuiteReport::fail(
            name,
            format!("scaling ratio {:.2} over 4x input exceeds 5", ratio),
        );
    }
    SuiteReport::pass(
        name,
        format!("{} lp agreements; 4x-size time ratio {:.2}", opts.knapsack_trials, ratio),
    )
}

/// The specialized transportation route and the generic LP route agree on
/// both depths and cut coefficients.
pub fn suite_cflp_equivalence(opts: &VerifyOptions) -> SuiteReport {
    let name = "cflp-route-equivalence";
    let mut rng = ChaCha12Rng::seed_from_u64(0x88);
    let mut count = 0;
    let seeds: Vec<u64> = opts
        .seeds
        .iter()
        .copied()
        .chain(100..110)
        .collect();
    let wanted = 20.min(2 * seeds.len());
    for &seed in &seeds {
        let prep = prepare(5, 7, 4.0, seed);
        let mut transport = prep.oracle();
        let mut generic = crate::separation::GenericDspOracle::new(prep.inst.clone());
        for _ in 0..2 {
            let mut y = vec![0.0; 5];
            for v in y.iter_mut() {
                *v = if rng.random_range(0.0..1.0) < 0.7 { 1.0 } else { 0.0 };
            }
            let q_t = transport.q_of(&prep.inst, &y);
            let q_g = generic.q_of(&prep.inst, &y);
            match (q_t, q_g) {
                (Ok(Some(a)), Ok(Some(b))) => {
                    if (a - b).abs() > 1e-7 * (1.0 + a.abs()) {
                        return SuiteReport::fail(
                            name,
                            format!("subproblem values differ: {} vs {}", a, b),
                        );
                    }
                    // kappa-route cut equals the lifted-certificate cut
                    if let Ok(Ok(dual)) = transport.solve_transportation(&y) {
                        let direct = cflp::cflp_cut(&prep.cflp, &dual, &prep.scaling);
                        let cert = transport.lift_bounded(&dual);
                        let generic_cut = crate::model::cut_from_certificate(
                            &cert,
                            &prep.inst,
                            &prep.scaling,
                            StrategyKind::Cb,
                        )
                        .unwrap();
                        let scale = 1.0
                            + direct.a_y.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
                        for j in 0..direct.a_y.len() {
                            if (direct.a_y[j] - generic_cut.a_y[j]).abs() > 1e-7 * scale {
                                return SuiteReport::fail(
                                    name,
                                    format!("cut coefficient {} differs", j),
                                );
                            }
                        }
                        // tight at the separated point
                        let fy: f64 =
                            prep.inst.f.iter().zip(&y).map(|(&f, &v)| f * v).sum();
                        let lhs: f64 = direct.rhs
                            - direct.a_y.iter().zip(&y).map(|(&a, &v)| a * v).sum::<f64>();
                        if (lhs - (fy + dual.q_tilde)).abs() > 1e-6 * (1.0 + lhs.abs()) {
                            return SuiteReport::fail(name, "cut not tight at its point".into());
                        }
                    }
                    count += 1;
                }
                (Ok(None), Ok(None)) => {
                    count += 1;
                }
                (Ok(a), Ok(b)) => {
                    return SuiteReport::fail(
                        name,
                        format!(
                            "feasibility disagreement: transport {:?} generic {:?}",
                            a.is_some(),
                            b.is_some()
                        ),
                    )
                }
                (Err(e), _) | (_, Err(e)) => return SuiteReport::fail(name, e.to_string()),
            }
        }
    }
    if count < wanted {
        return SuiteReport::fail(name, format!("only {} comparisons", count));
    }
    SuiteReport::pass(name, format!("routes agreed on {} subproblems", count))
}

/// Full decomposition agreement with the brute-force oracle across all
/// strategies and modes.
pub fn suite_bd_agreement(opts: &VerifyOptions) -> SuiteReport {
    let name = "bd-oracle-agreement";
    let mut count = 0;
    for &(n, k) in &opts.sizes {
        for &r in &opts.ratios {
            for &seed in &opts.seeds {
                let loaded = super::load_instance(&super::InstanceSource::Cst {
                    n,
                    k,
                    r,
                    seed,
                })
                .unwrap();
                let truth = match brute_force_oracle(&loaded.inst) {
                    Ok(OracleResult::Optimal { objective, .. }) => objective,
                    Ok(OracleResult::Infeasible) => continue,
                    Err(e) => return SuiteReport::fail(name, e.to_string()),
                };
                let mut runs: Vec<(StrategyKind, SepMode)> = StrategyKind::ALL
                    .iter()
                    .filter(|k| **k != StrategyKind::L4)
                    .map(|&s| (s, SepMode::Direct))
                    .collect();
                runs.push((StrategyKind::L1, SepMode::Gpa));
                runs.push((StrategyKind::L2, SepMode::Gpa));
                runs.push((StrategyKind::Linf, SepMode::Gpa));
                for (strategy, mode) in runs {
                    let mut config = loaded.default_config();
                    config.strategy = strategy;
                    config.mode = mode;
                    let factory = loaded.oracle_factory();
                    let report = match bd_solve(loaded.inst.clone(), &config, factory.as_ref()) {
                        Ok(r) => r,
                        Err(e) => {
                            return SuiteReport::fail(
                                name,
                                format!("{} {} on {}: {}", strategy, mode.name(), loaded.id, e),
                            )
                        }
                    };
                    if report.status != BdStatus::Optimal {
                        return SuiteReport::fail(
                            name,
                            format!(
                                "{} {} on {}: status {:?}",
                                strategy,
                                mode.name(),
                                loaded.id,
                                report.status
                            ),
                        );
                    }
                    if (report.objective - truth).abs() > 1e-5 * truth.abs().max(1.0) {
                        return SuiteReport::fail(
                            name,
                            format!(
                                "{} {} on {}: {} vs oracle {}",
                                strategy,
                                mode.name(),
                                loaded.id,
                                report.objective,
                                truth
                            ),
                        );
                    }
                    count += 1;
                }
            }
        }
    }
    SuiteReport::pass(name, format!("{} runs matched the oracle", count))
}

/// Runs every suite; any failure makes the overall report fail.
pub fn verify_properties(opts: &VerifyOptions) -> Vec<SuiteReport> {
    vec![
        suite_kernel(opts),
        suite_certificates(opts),
        suite_depth_chain(opts),
        suite_projection_duality(opts),
        suite_support(opts),
        suite_flat_cut(opts),
        suite_optimality_kind(opts),
        suite_binding(opts),
        suite_gpa_consistency(opts),
        suite_knapsack(opts),
        suite_cflp_equivalence(opts),
        suite_bd_agreement(opts),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_opts() -> VerifyOptions {
        VerifyOptions {
            sizes: vec![(5, 6)],
            ratios: vec![5.0],
            seeds: vec![1],
            points_target: 6,
            knapsack_trials: 40,
        }
    }

    #[test]
    fn depth_chain_small() {
        let r = suite_depth_chain(&small_opts());
        assert!(r.passed, "{}", r.details);
    }

    #[test]
    fn projection_duality_small() {
        let r = suite_projection_duality(&small_opts());
        assert!(r.passed, "{}", r.details);
    }

    #[test]
    fn support_small() {
        let r = suite_support(&small_opts());
        assert!(r.passed, "{}", r.details);
    }

    #[test]
    fn flat_cut_small() {
        let r = suite_flat_cut(&small_opts());
        assert!(r.passed, "{}", r.details);
    }

    #[test]
    fn optimality_kind_small() {
        let r = suite_optimality_kind(&VerifyOptions {
            sizes: vec![(5, 6), (6, 8)],
            ratios: vec![5.0, 10.0],
            seeds: vec![1, 2],
            points_target: 6,
            knapsack_trials: 10,
        });
        assert!(r.passed, "{}", r.details);
    }

    #[test]
    fn gpa_consistency_small() {
        let r = suite_gpa_consistency(&small_opts());
        assert!(r.passed, "{}", r.details);
    }

    #[test]
    fn binding_small() {
        let r = suite_binding(&small_opts());
        assert!(r.passed, "{}", r.details);
    }
}
