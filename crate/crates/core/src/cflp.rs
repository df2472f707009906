//! Capacitated facility location toolkit.
//!
//! Holds the structured instance type, the mapping into the generic MILP
//! form, the specialized transportation subproblem oracle (the cut of which
//! comes from per-facility continuous knapsacks solved by weighted-median
//! selection), core-point construction, OR-Library parsing and the
//! randomized benchmark instance generator.
//!
//! The model: facilities `j` with capacity `s_j` and opening cost `f_j`,
//! customers `l` with demand `d_l`, and per-unit service costs `c_lj`;
//! `x_lj` is the served fraction of customer `l`'s demand from `j`.

use crate::kernel::{KernelError, LinearProgram, LpStatus, RowSense, Sense, SimplexSolver};
use crate::model::{
    Cut, CutKind, DspOracle, DspResolution, DualCertificate, ProblemData, ScalingInfo, SideRow,
    SparseMat, StrategyKind, YDomain,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

/// A capacitated facility location instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CflpInstance {
    pub capacities: Vec<f64>,
    pub open_costs: Vec<f64>,
    pub demands: Vec<f64>,
    /// `unit_costs[l][j]`: cost of serving one demand unit of customer `l`
    /// from facility `j`.
    pub unit_costs: Vec<Vec<f64>>,
}

impl CflpInstance {
    pub fn n_facilities(&self) -> usize {
        self.capacities.len()
    }

    pub fn k_customers(&self) -> usize {
        self.demands.len()
    }

    pub fn total_capacity(&self) -> f64 {
        self.capacities.iter().sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.demands.iter().sum()
    }
}

/// Sidecar metadata for generated benchmark instances.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CstMeta {
    pub n: usize,
    pub k: usize,
    pub r: f64,
    pub seed: u64,
}

/// Maps the instance to the generic form. Row layout: `k` demand rows, `n`
/// capacity rows, then `n*k` variable-upper-bound rows indexed `l*n + j`;
/// continuous column `x_lj` sits at `l*n + j`.
pub fn to_problem_data(cflp: &CflpInstance) -> ProblemData {
    let n = cflp.n_facilities();
    let k = cflp.k_customers();
    let m = k + n + n * k;
    let np = n * k;
    let mut a = SparseMat::zeros(m, np);
    let mut b = SparseMat::zeros(m, n);
    let mut rhs = vec![0.0; m];
    let mut c = vec![0.0; np];
    for l in 0..k {
        for j in 0..n {
            c[l * n + j] = cflp.demands[l] * cflp.unit_costs[l][j];
        }
    }
    // demand rows: sum_j x_lj >= 1
    for l in 0..k {
        for j in 0..n {
            a.push(l, l * n + j, 1.0).unwrap();
        }
        rhs[l] = 1.0;
    }
    // capacity rows: -sum_l d_l x_lj + s_j y_j >= 0
    for j in 0..n {
        let row = k + j;
        for l in 0..k {
            a.push(row, l * n + j, -cflp.demands[l]).unwrap();
        }
        b.push(row, j, cflp.capacities[j]).unwrap();
    }
    // variable upper bounds: -x_lj + y_j >= 0
    for l in 0..k {
        for j in 0..n {
            let row = k + n + l * n + j;
            a.push(row, l * n + j, -1.0).unwrap();
            b.push(row, j, 1.0).unwrap();
        }
    }
    let side = SideRow {
        coeffs: (0..n).map(|j| (j, cflp.capacities[j])).collect(),
        rhs: cflp.total_demand(),
    };
    ProblemData {
        c,
        f: cflp.open_costs.clone(),
        a,
        b,
        rhs,
        y_domain: YDomain { side_rows: vec![side] },
    }
}

/// Optimal duals of the demand rows of the transportation subproblem.
#[derive(Debug, Clone)]
pub struct TransportationDual {
    pub demand_duals: Vec<f64>,
    pub q_tilde: f64,
}

/// Continuous knapsack value
/// `kappa_j = min { sum (d_l c_lj - u_l) alpha_l : sum alpha_l d_l <= s_j }`
/// over `alpha in [0,1]^k`, by weighted-median selection.
pub fn knapsack_kappa(cflp: &CflpInstance, demand_duals: &[f64], j: usize) -> f64 {
    knapsack_kappa_dual(cflp, demand_duals, j).0
}

/// Same, also returning the optimal capacity-row dual `theta_j`.
pub fn knapsack_kappa_dual(cflp: &CflpInstance, demand_duals: &[f64], j: usize) -> (f64, f64) {
    let k = cflp.k_customers();
    let mut values = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    for l in 0..k {
        values.push(cflp.demands[l] * cflp.unit_costs[l][j] - demand_duals[l]);
        weights.push(cflp.demands[l]);
    }
    kappa_from_items(&values, &weights, cflp.capacities[j])
}

/// Core selection: fill capacity with the most negative cost-per-weight
/// items first; the critical ratio is located by quickselect instead of a
/// full sort. Returns `(kappa, theta)` where `theta >= 0` is the capacity
/// dual.
pub(crate) fn kappa_from_items(values: &[f64], weights: &[f64], capacity: f64) -> (f64, f64) {
    // only strictly profitable items participate
    let mut items: Vec<(f64, f64, f64)> = values
        .iter()
        .zip(weights)
        .filter(|&(&v, _)| v < 0.0)
        .map(|(&v, &w)| (v / w, v, w))
        .collect();
    let total_w: f64 = items.iter().map(|&(_, _, w)| w).sum();
    if total_w <= capacity {
        let kappa = items.iter().map(|&(_, v, _)| v).sum();
        return (kappa, 0.0);
    }
    let mut kappa = 0.0;
    let mut cap = capacity;
    let mut slice: &mut [(f64, f64, f64)] = &mut items;
    loop {
        if slice.is_empty() {
            return (kappa, 0.0);
        }
        if slice.len() == 1 {
            let (r, v, w) = slice[0];
            if w <= cap {
                kappa += v;
                return (kappa, 0.0);
            }
            kappa += r * cap;
            return (kappa, (-r).max(0.0));
        }
        // median-of-three pivot on ratios (deterministic)
        let a = slice[0].0;
        let b = slice[slice.len() / 2].0;
        let c = slice[slice.len() - 1].0;
        let pivot = if (a <= b) == (b <= c) {
            b
        } else if (b <= a) == (a <= c) {
            a
        } else {
            c
        };
        // three-way partition: less | equal | greater
        let mut less = 0usize;
        let mut i = 0usize;
        let mut greater = slice.len();
        while i < greater {
            if slice[i].0 < pivot {
                slice.swap(i, less);
                less += 1;
                i += 1;
            } else if slice[i].0 > pivot {
                greater -= 1;
                slice.swap(i, greater);
            } else {
                i += 1;
            }
        }
        let w_less: f64 = slice[..less].iter().map(|&(_, _, w)| w).sum();
        if w_less > cap {
            slice = &mut slice[..less];
            continue;
        }
        let v_less: f64 = slice[..less].iter().map(|&(_, v, _)| v).sum();
        let w_equal: f64 = slice[less..greater].iter().map(|&(_, _, w)| w).sum();
        if w_less + w_equal >= cap {
            // the pivot ratio is critical
            kappa += v_less + pivot * (cap - w_less);
            let theta = if w_less + w_equal - cap <= 1e-15 * (1.0 + cap) {
                0.0
            } else {
                -pivot
            };
            return (kappa, theta.max(0.0));
        }
        let v_equal: f64 = slice[less..greater].iter().map(|&(_, v, _)| v).sum();
        kappa += v_less + v_equal;
        cap -= w_less + w_equal;
        slice = &mut slice[greater..];
    }
}

/// The specialized classical cut (scaled):
/// `beta gamma - sum_j (f_j + kappa_j) y_j >= sum_l u_l`.
pub fn cflp_cut(cflp: &CflpInstance, dual: &TransportationDual, scaling: &ScalingInfo) -> Cut {
    let n = cflp.n_facilities();
    let a_y: Vec<f64> = (0..n)
        .map(|j| -(cflp.open_costs[j] + knapsack_kappa(cflp, &dual.demand_duals, j)))
        .collect();
    Cut {
        a_y,
        a_gamma: scaling.beta,
        rhs: dual.demand_duals.iter().sum(),
        kind: CutKind::Optimality,
        source: StrategyKind::Cb,
    }
}

/// Core point `y_j = 1/r + eps` (clamped into the open unit interval),
/// where `r` is the capacity/demand ratio of the instance.
pub fn core_point(cflp: &CflpInstance, epsilon: f64) -> Vec<f64> {
    let r = cflp.total_capacity() / cflp.total_demand();
    let val = (1.0 / r + epsilon).min(1.0 - epsilon);
    vec![val; cflp.n_facilities()]
}

/// Transportation-based dual subproblem oracle.
///
/// Reduces the subproblem at `y` to `k + n` rows by turning the variable
/// upper bounds into column bounds, then lifts the optimal duals back to
/// the full row space through per-facility knapsack duals, so the implied
/// cut coincides with the specialized cut for every `y` in the unit box.
pub struct CflpOracle {
    cflp: Arc<CflpInstance>,
    solver: Option<SimplexSolver>,
    last_y: Option<Vec<f64>>,
    fallback: Option<crate::separation::GenericDspOracle>,
    inst: Arc<ProblemData>,
}

impl CflpOracle {
    pub fn new(cflp: Arc<CflpInstance>, inst: Arc<ProblemData>) -> Self {
        CflpOracle { cflp, solver: None, last_y: None, fallback: None, inst }
    }

    fn build(&mut self) -> Result<(), KernelError> {
        let cflp = &self.cflp;
        let (n, k) = (cflp.n_facilities(), cflp.k_customers());
        let mut lp = LinearProgram::new(Sense::Minimize);
        for l in 0..k {
            for j in 0..n {
                lp.add_var(cflp.demands[l] * cflp.unit_costs[l][j], 0.0, 0.0);
            }
        }
        for l in 0..k {
            let coeffs: Vec<(usize, f64)> = (0..n).map(|j| (l * n + j, 1.0)).collect();
            lp.add_row(coeffs, RowSense::Ge, 1.0);
        }
        for j in 0..n {
            let coeffs: Vec<(usize, f64)> =
                (0..k).map(|l| (l * n + j, cflp.demands[l])).collect();
            lp.add_row(coeffs, RowSense::Le, 0.0);
        }
        self.solver = Some(SimplexSolver::new(&lp)?);
        Ok(())
    }

    /// One transportation solve; `y` must lie in the unit box. `Err` inside
    /// the outer `Ok` carries the reduced-space Farkas certificate.
    pub fn solve_transportation(
        &mut self,
        y: &[f64],
    ) -> Result<Result<TransportationDual, Vec<f64>>, KernelError> {
        if self.solver.is_none() {
            self.build()?;
        }
        let cflp = self.cflp.clone();
        let (n, k) = (cflp.n_facilities(), cflp.k_customers());
        let solver = self.solver.as_mut().unwrap();
        let stale = |prev: &Option<Vec<f64>>, j: usize| match prev {
            None => true,
            Some(p) => p[j] != y[j],
        };
        let prev = self.last_y.clone();
        for j in 0..n {
            if stale(&prev, j) {
                for l in 0..k {
                    solver.set_bounds(l * n + j, 0.0, y[j].max(0.0));
                }
                solver.set_rhs(k + j, cflp.capacities[j] * y[j].max(0.0));
            }
        }
        self.last_y = Some(y.to_vec());
        let out = solver.solve()?;
        match out.status {
            LpStatus::Optimal => {
                let demand_duals: Vec<f64> =
                    out.dual[..k].iter().map(|&v| v.max(0.0)).collect();
                Ok(Ok(TransportationDual { demand_duals, q_tilde: out.objective }))
            }
            LpStatus::Infeasible => {
                let farkas = out.farkas.ok_or_else(|| {
                    KernelError::NumericalFailure("infeasible transportation without Farkas".into())
                })?;
                Ok(Err(farkas))
            }
            LpStatus::Unbounded => Err(KernelError::NumericalFailure(
                "transportation subproblem cannot be unbounded".into(),
            )),
        }
    }

    /// Lifts demand duals to a full-row-space certificate via the knapsack
    /// duals of every facility.
    pub fn lift_bounded(&self, dual: &TransportationDual) -> DualCertificate {
        let cflp = &self.cflp;
        let (n, k) = (cflp.n_facilities(), cflp.k_customers());
        let mut p = vec![0.0; k + n + n * k];
        p[..k].copy_from_slice(&dual.demand_duals);
        for j in 0..n {
            let (_, theta) = knapsack_kappa_dual(cflp, &dual.demand_duals, j);
            p[k + j] = theta;
            for l in 0..k {
                let rho = (dual.demand_duals[l]
                    - cflp.demands[l] * cflp.unit_costs[l][j]
                    - theta * cflp.demands[l])
                    .max(0.0);
                p[k + n + l * n + j] = rho;
            }
        }
        DualCertificate { p, pi0: 1.0 }
    }

    /// Lifts a reduced-space Farkas certificate (demand row duals >= 0,
    /// capacity row duals <= 0) to the full row space: variable-upper-bound
    /// rows absorb the positive part of the aggregated column coefficients.
    fn lift_farkas(&self, farkas: &[f64]) -> DualCertificate {
        let cflp = &self.cflp;
        let (n, k) = (cflp.n_facilities(), cflp.k_customers());
        let mut p = vec![0.0; k + n + n * k];
        for l in 0..k {
            p[l] = farkas[l].max(0.0);
        }
        for j in 0..n {
            p[k + j] = (-farkas[k + j]).max(0.0);
        }
        for l in 0..k {
            for j in 0..n {
                let s = farkas[l] + cflp.demands[l] * farkas[k + j];
                p[k + n + l * n + j] = s.max(0.0);
            }
        }
        DualCertificate { p, pi0: 0.0 }
    }
}

impl DspOracle for CflpOracle {
    fn solve_dsp(&mut self, y: &[f64]) -> Result<DspResolution, KernelError> {
        let in_box = y.iter().all(|&v| (-1e-9..=1.0 + 1e-9).contains(&v));
        if !in_box {
            // projections can leave the unit box when bound seeding is off;
            // fall back to the generic oracle for exactness
            if self.fallback.is_none() {
                self.fallback =
                    Some(crate::separation::GenericDspOracle::new(self.inst.clone()));
            }
            return self.fallback.as_mut().unwrap().solve_dsp(y);
        }
        let y: Vec<f64> = y.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
        match self.solve_transportation(&y)? {
            Ok(dual) => {
                let q_tilde = dual.q_tilde;
                Ok(DspResolution::Bounded { dual: self.lift_bounded(&dual), q_tilde })
            }
            Err(farkas) => Ok(DspResolution::Unbounded { ray: self.lift_farkas(&farkas) }),
        }
    }
}

#[derive(Debug, Error)]
#[error("line {line}: {msg}")]
pub struct CapParseError {
    pub line: usize,
    pub msg: String,
}

/// Parses the OR-Library `cap` format: header `n k`, then `n` lines
/// `s_j f_j`, then per customer the demand followed by `n` allocation costs
/// (cost of serving the customer's entire demand). Whitespace and line
/// breaks are interchangeable. Per-unit costs are recovered by dividing
/// each allocation cost by the demand, so the objective over flow fractions
/// reproduces the file's totals.
///
/// Returns the instance plus warnings (e.g. total capacity short of total
/// demand, which makes the binary domain empty).
pub fn parse_orlib_cap(text: &str) -> Result<(CflpInstance, Vec<String>), CapParseError> {
    let mut line_of_token: Vec<usize> = Vec::new();
    let mut tokens: Vec<&str> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            tokens.push(tok);
            line_of_token.push(ln + 1);
        }
    }
    let mut pos = 0usize;
    let mut next = |what: &str| -> Result<(usize, &str), CapParseError> {
        if pos >= tokens.len() {
            return Err(CapParseError {
                line: line_of_token.last().copied().unwrap_or(0),
                msg: format!("unexpected end of file while reading {}", what),
            });
        }
        let t = (line_of_token[pos], tokens[pos]);
        pos += 1;
        Ok(t)
    };
    let parse_usize = |(line, t): (usize, &str), what: &str| -> Result<usize, CapParseError> {
        t.parse().map_err(|_| CapParseError { line, msg: format!("bad {} `{}`", what, t) })
    };
    let parse_f64 = |(line, t): (usize, &str), what: &str| -> Result<f64, CapParseError> {
        let v: f64 = t
            .parse()
            .map_err(|_| CapParseError { line, msg: format!("bad {} `{}`", what, t) })?;
        if !v.is_finite() {
            return Err(CapParseError { line, msg: format!("non-finite {} `{}`", what, t) });
        }
        Ok(v)
    };
    let n = parse_usize(next("facility count")?, "facility count")?;
    let k = parse_usize(next("customer count")?, "customer count")?;
    let mut capacities = Vec::with_capacity(n);
    let mut open_costs = Vec::with_capacity(n);
    for _ in 0..n {
        capacities.push(parse_f64(next("capacity")?, "capacity")?);
        open_costs.push(parse_f64(next("opening cost")?, "opening cost")?);
    }
    let mut demands = Vec::with_capacity(k);
    let mut unit_costs = Vec::with_capacity(k);
    for l in 0..k {
        let (dline, dtok) = next("demand")?;
        let d = parse_f64((dline, dtok), "demand")?;
        if d <= 0.0 {
            return Err(CapParseError {
                line: dline,
                msg: format!("customer {} has nonpositive demand {}", l, d),
            });
        }
        demands.push(d);
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            let alloc = parse_f64(next("allocation cost")?, "allocation cost")?;
            row.push(alloc / d);
        }
        unit_costs.push(row);
    }
    if pos < tokens.len() {
        return Err(CapParseError {
            line: line_of_token[pos],
            msg: format!("{} trailing tokens", tokens.len() - pos),
        });
    }
    let inst = CflpInstance { capacities, open_costs, demands, unit_costs };
    let mut warnings = Vec::new();
    if inst.total_capacity() < inst.total_demand() {
        warnings.push(format!(
            "capacity shortfall: total capacity {} < total demand {}",
            inst.total_capacity(),
            inst.total_demand()
        ));
    }
    Ok((inst, warnings))
}

/// Writes the OR-Library `cap` format (inverse of [`parse_orlib_cap`]).
pub fn write_orlib_cap(cflp: &CflpInstance) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", cflp.n_facilities(), cflp.k_customers()));
    for j in 0..cflp.n_facilities() {
        out.push_str(&format!("{} {}\n", cflp.capacities[j], cflp.open_costs[j]));
    }
    for l in 0..cflp.k_customers() {
        out.push_str(&format!("{}", cflp.demands[l]));
        for j in 0..cflp.n_facilities() {
            out.push_str(&format!(" {}", cflp.demands[l] * cflp.unit_costs[l][j]));
        }
        out.push('\n');
    }
    out
}

/// Generates a randomized benchmark instance.
///
/// Draw order is part of the format contract: capacities (all j), then per
/// facility the two opening-cost components, then demands (all l), then
/// facility positions, then customer positions; finally all capacities are
/// rescaled by one factor so total capacity / total demand equals `r`
/// exactly. Unit costs are 10 times the planar Euclidean distance.
pub fn generate_cst(n: usize, k: usize, r: f64, seed: u64) -> CflpInstance {
    assert!(n >= 1 && k >= 1 && r > 0.0);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let capacities_raw: Vec<f64> = (0..n).map(|_| rng.random_range(10.0..160.0)).collect();
    let open_costs: Vec<f64> = (0..n)
        .map(|j| {
            let base = rng.random_range(0.0..90.0);
            let per_cap = rng.random_range(100.0..110.0);
            base + per_cap * capacities_raw[j].sqrt()
        })
        .collect();
    let demands: Vec<f64> = (0..k).map(|_| rng.random_range(5.0..35.0)).collect();
    let fac_pos: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
        .collect();
    let cust_pos: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
        .collect();
    let unit_costs: Vec<Vec<f64>> = cust_pos
        .iter()
        .map(|&(cx, cy)| {
            fac_pos
                .iter()
                .map(|&(fx, fy)| 10.0 * ((cx - fx).powi(2) + (cy - fy).powi(2)).sqrt())
                .collect()
        })
        .collect();
    let total_d: f64 = demands.iter().sum();
    let total_s: f64 = capacities_raw.iter().sum();
    let factor = r * total_d / total_s;
    let capacities = capacities_raw.iter().map(|&s| s * factor).collect();
    CflpInstance { capacities, open_costs, demands, unit_costs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::solve_lp;

    fn tiny() -> CflpInstance {
        CflpInstance {
            capacities: vec![2.0],
            open_costs: vec![3.0],
            demands: vec![1.0],
            unit_costs: vec![vec![5.0]],
        }
    }

    #[test]
    fn problem_data_dimensions() {
        let inst = to_problem_data(&tiny());
        assert_eq!(inst.m(), 3);
        assert_eq!(inst.n_prime(), 1);
        assert_eq!(inst.n(), 1);
        // demand row has no B entries; capacity row has B entry s_j
        assert!(inst.b.row(0).is_empty());
        assert_eq!(inst.b.row(1), &[(0, 2.0)]);
        assert_eq!(inst.a.row(1), &[(0, -1.0)]);
        assert_eq!(inst.b.row(2), &[(0, 1.0)]);
        assert_eq!(inst.y_domain.side_rows.len(), 1);
    }

    #[test]
    fn transportation_single_arc() {
        let cflp = Arc::new(tiny());
        let inst = Arc::new(to_problem_data(&cflp));
        let mut oracle = CflpOracle::new(cflp.clone(), inst);
        let dual = oracle.solve_transportation(&[1.0]).unwrap().unwrap();
        assert!((dual.q_tilde - 5.0).abs() < 1e-9);
        assert!((dual.demand_duals[0] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn transportation_infeasible_at_closed() {
        let cflp = Arc::new(tiny());
        let inst = Arc::new(to_problem_data(&cflp));
        let mut oracle = CflpOracle::new(cflp.clone(), inst.clone());
        match oracle.solve_dsp(&[0.0]).unwrap() {
            DspResolution::Unbounded { ray } => {
                assert_eq!(ray.pi0, 0.0);
                assert!(ray.in_cone(&inst, 1e-7));
                // the ray must cut off y = 0 and admit y = 1
                let v0: f64 = ray
                    .p
                    .iter()
                    .zip(inst.rhs.iter().zip(inst.b.mul_vec(&[0.0])))
                    .map(|(&p, (&b, by))| p * (b - by))
                    .sum();
                assert!(v0 > 1e-9, "violation at closed {}", v0);
                let v1: f64 = ray
                    .p
                    .iter()
                    .zip(inst.rhs.iter().zip(inst.b.mul_vec(&[1.0])))
                    .map(|(&p, (&b, by))| p * (b - by))
                    .sum();
                assert!(v1 <= 1e-9, "valid point cut off: {}", v1);
            }
            other => panic!("expected infeasibility, got {:?}", other),
        }
    }

    #[test]
    fn kappa_examples() {
        // all coefficients nonnegative: kappa = 0
        let (kz, tz) = kappa_from_items(&[1.0, 2.0], &[1.0, 1.0], 5.0);
        assert_eq!(kz, 0.0);
        assert_eq!(tz, 0.0);
        // (-8, -4, 12), demands (4, 4, 4), cap 10 -> take both negatives
        let (ka, _) = kappa_from_items(&[-8.0, -4.0, 12.0], &[4.0, 4.0, 4.0], 10.0);
        assert!((ka + 12.0).abs() < 1e-12);
        // (-8, -4), demands (4, 4), cap 6 -> fractional second item
        let (kb, tb) = kappa_from_items(&[-8.0, -4.0], &[4.0, 4.0], 6.0);
        assert!((kb + 10.0).abs() < 1e-12);
        assert!((tb - 1.0).abs() < 1e-12, "theta {}", tb);
    }

    #[test]
    fn kappa_matches_lp_oracle() {
        let mut seed = 99u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / ((1u64 << 31) as f64) - 0.5
        };
        for trial in 0..60 {
            let k = 1 + trial % 7;
            let values: Vec<f64> = (0..k).map(|_| rnd() * 20.0).collect();
            let weights: Vec<f64> = (0..k).map(|_| 1.0 + rnd().abs() * 10.0).collect();
            let cap = (0.2 + rnd().abs()) * weights.iter().sum::<f64>();
            let (kappa, theta) = kappa_from_items(&values, &weights, cap);
            let mut lp = LinearProgram::new(Sense::Minimize);
            for l in 0..k {
                lp.add_var(values[l], 0.0, 1.0);
            }
            let coeffs: Vec<(usize, f64)> = (0..k).map(|l| (l, weights[l])).collect();
            lp.add_row(coeffs, RowSense::Le, cap);
            let out = solve_lp(&lp).unwrap();
            assert!(
                (kappa - out.objective).abs() <= 1e-8 * (1.0 + out.objective.abs()),
                "trial {}: {} vs {}",
                trial,
                kappa,
                out.objective
            );
            assert!(theta >= 0.0);
        }
    }

    #[test]
    fn cut_equivalence_with_generic_route() {
        // kappa-based cut coefficients == generic cut from the lifted dual
        for seed in 0..20 {
            let cflp = Arc::new(generate_cst(4, 6, 3.0, seed));
            let inst = Arc::new(to_problem_data(&cflp));
            let mut oracle = CflpOracle::new(cflp.clone(), inst.clone());
            let y = vec![1.0; 4];
            let dual = oracle.solve_transportation(&y).unwrap().unwrap();
            let scaling = ScalingInfo { beta: 2.5 };
            let direct = cflp_cut(&cflp, &dual, &scaling);
            let cert = oracle.lift_bounded(&dual);
            assert!(cert.in_cone(&inst, 1e-7));
            let generic =
                crate::model::cut_from_certificate(&cert, &inst, &scaling, StrategyKind::Cb)
                    .unwrap();
            for j in 0..4 {
                assert!(
                    (direct.a_y[j] - generic.a_y[j]).abs() <= 1e-7 * (1.0 + direct.a_y[j].abs()),
                    "seed {} coeff {}: {} vs {}",
                    seed,
                    j,
                    direct.a_y[j],
                    generic.a_y[j]
                );
            }
            assert!((direct.a_gamma - generic.a_gamma).abs() < 1e-9);
            assert!((direct.rhs - generic.rhs).abs() < 1e-7 * (1.0 + direct.rhs.abs()));
            // tightness at the separated integer point
            let fy: f64 = cflp.open_costs.iter().sum();
            let cut_value_at_y: f64 = direct.rhs - direct.a_y.iter().sum::<f64>();
            let q = fy + dual.q_tilde;
            assert!(
                (cut_value_at_y - q).abs() <= 1e-6 * (1.0 + q.abs()),
                "seed {}: cut value {} vs Q {}",
                seed,
                cut_value_at_y,
                q
            );
        }
    }

    #[test]
    fn core_point_values() {
        let mut cflp = tiny();
        // r = 2: y = 0.501
        let cp = core_point(&cflp, 1e-3);
        assert!((cp[0] - 0.501).abs() < 1e-12);
        // r = 1 clamps into the open interval
        cflp.capacities = vec![1.0];
        let cp1 = core_point(&cflp, 1e-3);
        assert!((cp1[0] - 0.999).abs() < 1e-12);
        // r = 20
        cflp.capacities = vec![20.0];
        let cp20 = core_point(&cflp, 1e-3);
        assert!((cp20[0] - 0.051).abs() < 1e-12);
    }

    #[test]
    fn orlib_round_trip() {
        let cflp = CflpInstance {
            capacities: vec![10.0, 20.0],
            open_costs: vec![100.0, 200.0],
            demands: vec![4.0],
            unit_costs: vec![vec![1.5, 2.5]],
        };
        let text = write_orlib_cap(&cflp);
        let (back, warns) = parse_orlib_cap(&text).unwrap();
        assert_eq!(back, cflp);
        assert!(warns.is_empty());
    }

    #[test]
    fn orlib_parse_errors() {
        assert!(parse_orlib_cap("2 1\n10 100\n").is_err()); // truncated
        let zero_demand = "1 1\n10 100\n0 5\n";
        let e = parse_orlib_cap(zero_demand).unwrap_err();
        assert_eq!(e.line, 3);
        // shortfall warning
        let short = "1 1\n2 100\n4 8\n";
        let (_, warns) = parse_orlib_cap(short).unwrap();
        assert_eq!(warns.len(), 1);
    }

    #[test]
    fn cst_generation_contract() {
        let a = generate_cst(10, 20, 5.0, 42);
        let b = generate_cst(10, 20, 5.0, 42);
        assert_eq!(a, b, "same seed must give identical instances");
        let c = generate_cst(10, 20, 5.0, 43);
        assert_ne!(a, c);
        let ratio = a.total_capacity() / a.total_demand();
        assert!((ratio - 5.0).abs() < 1e-9);
        let max_cost = 10.0 * 2f64.sqrt();
        for row in &a.unit_costs {
            for &v in row {
                assert!((0.0..=max_cost + 1e-12).contains(&v));
            }
        }
        for (l, &d) in a.demands.iter().enumerate() {
            assert!((5.0..35.0).contains(&d), "demand {} = {}", l, d);
        }
    }
}
