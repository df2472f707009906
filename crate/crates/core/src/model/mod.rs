//! Problem data and master-space algebra.
//!
//! The MILP under decomposition is `min c'x + f'y` subject to
//! `Ax + By >= b, x >= 0, y in Y` with binary `y`. This module owns that
//! data ([`ProblemData`]), the dual cone certificates that carry cuts
//! ([`DualCertificate`]), the cuts themselves in scaled `(y, gamma)`
//! coordinates ([`Cut`]), and the eta-scaling machinery ([`ScalingInfo`]).

mod format;

pub use format::{parse_instance, write_instance, FormatError};

use crate::kernel::KernelError;
use thiserror::Error;

/// Threshold on pi0 below which a certificate counts as a feasibility ray.
pub const ZERO_TOL: f64 = 1e-9;
/// Tolerance for cone-membership checks of certificates.
pub const FEAS_TOL: f64 = 1e-7;

/// Sparse matrix stored by row and by column.
#[derive(Debug, Clone)]
pub struct SparseMat {
    nrows: usize,
    ncols: usize,
    by_row: Vec<Vec<(usize, f64)>>,
    by_col: Vec<Vec<(usize, f64)>>,
}

impl SparseMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMat {
            nrows,
            ncols,
            by_row: vec![Vec::new(); nrows],
            by_col: vec![Vec::new(); ncols],
        }
    }

    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, ModelError> {
        let mut m = SparseMat::zeros(nrows, ncols);
        for &(i, j, v) in triplets {
            m.push(i, j, v)?;
        }
        for row in &mut m.by_row {
            row.sort_by_key(|&(j, _)| j);
        }
        for col in &mut m.by_col {
            col.sort_by_key(|&(i, _)| i);
        }
        Ok(m)
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) -> Result<(), ModelError> {
        if i >= self.nrows || j >= self.ncols {
            return Err(ModelError::DimensionMismatch(format!(
                "entry ({}, {}) outside {}x{}",
                i, j, self.nrows, self.ncols
            )));
        }
        if v != 0.0 {
            self.by_row[i].push((j, v));
            self.by_col[j].push((i, v));
        }
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.by_row.iter().map(|r| r.len()).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.by_row[i]
    }

    pub fn col(&self, j: usize) -> &[(usize, f64)] {
        &self.by_col[j]
    }

    /// A * x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        for (i, row) in self.by_row.iter().enumerate() {
            out[i] = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
        out
    }

    /// A' * y
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (j, col) in self.by_col.iter().enumerate() {
            out[j] = col.iter().map(|&(i, v)| v * y[i]).sum();
        }
        out
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for (i, row) in self.by_row.iter().enumerate() {
            for &(j, v) in row {
                t.push((i, j, v));
            }
        }
        t
    }
}

/// One linear side constraint on the binary variables: `coeffs' y >= rhs`.
#[derive(Debug, Clone)]
pub struct SideRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Domain of the integer variables: binaries plus optional `>=` side rows.
#[derive(Debug, Clone, Default)]
pub struct YDomain {
    pub side_rows: Vec<SideRow>,
}

/// The MILP `min c'x + f'y  s.t.  Ax + By >= b, x >= 0, y in Y`.
#[derive(Debug, Clone)]
pub struct ProblemData {
    /// Costs of the continuous variables (length n').
    pub c: Vec<f64>,
    /// Costs of the binary variables (length n).
    pub f: Vec<f64>,
    /// m x n' coefficient matrix of the continuous variables.
    pub a: SparseMat,
    /// m x n coefficient matrix of the binary variables.
    pub b: SparseMat,
    /// Right-hand side (length m).
    pub rhs: Vec<f64>,
    pub y_domain: YDomain,
}

impl ProblemData {
    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn n_prime(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.rhs.len()
    }
}

/// Structural problems found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    DimensionMismatch(&'static str),
    NonFiniteEntry(&'static str),
    SideRowOutOfRange(usize),
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationIssue::DimensionMismatch(field) => write!(f, "dimension mismatch: {}", field),
            ValidationIssue::NonFiniteEntry(field) => write!(f, "non-finite entry in {}", field),
            ValidationIssue::SideRowOutOfRange(i) => {
                write!(f, "side row {} references a column outside y", i)
            }
        }
    }
}

/// Checks dimensional consistency of an instance. Returns an empty list when
/// the instance is well-formed; never mutates its input.
pub fn validate(inst: &ProblemData) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let (n, np, m) = (inst.n(), inst.n_prime(), inst.m());
    if inst.a.nrows() != m {
        issues.push(ValidationIssue::DimensionMismatch("A row count vs b"));
    }
    if inst.b.nrows() != m {
        issues.push(ValidationIssue::DimensionMismatch("B row count vs b"));
    }
    if inst.a.ncols() != np {
        issues.push(ValidationIssue::DimensionMismatch("A column count vs c"));
    }
    if inst.b.ncols() != n {
        issues.push(ValidationIssue::DimensionMismatch("B column count vs f"));
    }
    if !inst.c.iter().all(|v| v.is_finite()) {
        issues.push(ValidationIssue::NonFiniteEntry("c"));
    }
    if !inst.f.iter().all(|v| v.is_finite()) {
        issues.push(ValidationIssue::NonFiniteEntry("f"));
    }
    if !inst.rhs.iter().all(|v| v.is_finite()) {
        issues.push(ValidationIssue::NonFiniteEntry("b"));
    }
    for (idx, row) in inst.y_domain.side_rows.iter().enumerate() {
        if row.coeffs.iter().any(|&(j, _)| j >= n) {
            issues.push(ValidationIssue::SideRowOutOfRange(idx));
        }
    }
    issues
}

/// Scaling of the epigraph variable: `eta = beta * gamma`.
#[derive(Debug, Clone, Copy)]
pub struct ScalingInfo {
    pub beta: f64,
}

impl ScalingInfo {
    pub fn identity() -> Self {
        ScalingInfo { beta: 1.0 }
    }
}

/// A master-problem trial point in both raw and scaled coordinates.
#[derive(Debug, Clone)]
pub struct MasterPoint {
    pub y: Vec<f64>,
    pub eta: f64,
    pub gamma: f64,
}

impl MasterPoint {
    pub fn from_gamma(y: Vec<f64>, gamma: f64, scaling: &ScalingInfo) -> Self {
        MasterPoint { y, eta: scaling.beta * gamma, gamma }
    }

    pub fn from_eta(y: Vec<f64>, eta: f64, scaling: &ScalingInfo) -> Self {
        MasterPoint { y, eta, gamma: eta / scaling.beta }
    }
}

/// A ray `(p, pi0)` of the dual cone
/// `Pi = { p'A <= pi0 c', p >= 0, pi0 >= 0 }`.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub p: Vec<f64>,
    pub pi0: f64,
}

impl DualCertificate {
    /// Cone membership within `tol`: nonnegativity and `p'A <= pi0 c'`.
    pub fn in_cone(&self, inst: &ProblemData, tol: f64) -> bool {
        if self.pi0 < -tol || self.p.iter().any(|&v| v < -tol) {
            return false;
        }
        let pa = inst.a.tr_mul_vec(&self.p);
        let scale = 1.0 + self.p.iter().fold(self.pi0.abs(), |a, &v| a.max(v.abs()));
        pa.iter()
            .zip(&inst.c)
            .all(|(&lhs, &c)| lhs <= self.pi0 * c + tol * scale)
    }

    pub fn scaled(&self, factor: f64) -> DualCertificate {
        DualCertificate {
            p: self.p.iter().map(|v| v * factor).collect(),
            pi0: self.pi0 * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutKind {
    Optimality,
    Feasibility,
}

/// Names of the selectable separation strategies; doubles as the cut tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Cb,
    Mis,
    Rl1,
    Mwp,
    Cw,
    L1,
    L2,
    L4,
    Linf,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 9] = [
        StrategyKind::Cb,
        StrategyKind::Mis,
        StrategyKind::Rl1,
        StrategyKind::Mwp,
        StrategyKind::Cw,
        StrategyKind::L1,
        StrategyKind::L2,
        StrategyKind::L4,
        StrategyKind::Linf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Cb => "cb",
            StrategyKind::Mis => "mis",
            StrategyKind::Rl1 => "rl1",
            StrategyKind::Mwp => "mwp",
            StrategyKind::Cw => "cw",
            StrategyKind::L1 => "l1",
            StrategyKind::L2 => "l2",
            StrategyKind::L4 => "l4",
            StrategyKind::Linf => "linf",
        }
    }

    pub fn parse(s: &str) -> Option<StrategyKind> {
        StrategyKind::ALL.iter().copied().find(|k| k.name() == s)
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A master-space halfspace `a_y' y + a_gamma * gamma >= rhs` in scaled
/// coordinates.
#[derive(Debug, Clone)]
pub struct Cut {
    pub a_y: Vec<f64>,
    pub a_gamma: f64,
    pub rhs: f64,
    pub kind: CutKind,
    pub source: StrategyKind,
}

impl Cut {
    /// Slack of the cut at a scaled point; positive means violated.
    pub fn violation_at(&self, y: &[f64], gamma: f64) -> f64 {
        let lhs: f64 = self.a_y.iter().zip(y).map(|(&a, &v)| a * v).sum();
        self.rhs - lhs - self.a_gamma * gamma
    }

    /// Quantized fingerprint used for pool deduplication (1e-9 granularity
    /// after sup-norm normalization).
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut scale = self.a_gamma.abs();
        for &v in &self.a_y {
            scale = scale.max(v.abs());
        }
        if scale <= 0.0 {
            scale = 1.0;
        }
        let quant = |v: f64| -> i64 { (v / scale / 1e-9).round() as i64 };
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for &v in &self.a_y {
            quant(v).hash(&mut h);
        }
        quant(self.a_gamma).hash(&mut h);
        quant(self.rhs).hash(&mut h);
        h.finish()
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("certificate has a numerically zero coefficient vector")]
    VacuousCertificate,
}

/// `p'(b - B y) + pi0 (f' y - eta)`: positive iff the point lies outside the
/// halfspace of the certificate.
pub fn violation(
    cert: &DualCertificate,
    point: &MasterPoint,
    inst: &ProblemData,
) -> Result<f64, ModelError> {
    if cert.p.len() != inst.m() || point.y.len() != inst.n() {
        return Err(ModelError::DimensionMismatch(format!(
            "certificate rows {} / point cols {} vs instance {}x{}",
            cert.p.len(),
            point.y.len(),
            inst.m(),
            inst.n()
        )));
    }
    let by = inst.b.mul_vec(&point.y);
    let mut v = 0.0;
    for i in 0..inst.m() {
        v += cert.p[i] * (inst.rhs[i] - by[i]);
    }
    let fy: f64 = inst.f.iter().zip(&point.y).map(|(&fj, &yj)| fj * yj).sum();
    Ok(v + cert.pi0 * (fy - point.eta))
}

/// Builds the master-space cut of a certificate:
/// `(B'p - pi0 f)' y + beta pi0 gamma >= p'b`.
pub fn cut_from_certificate(
    cert: &DualCertificate,
    inst: &ProblemData,
    scaling: &ScalingInfo,
    source: StrategyKind,
) -> Result<Cut, ModelError> {
    if cert.p.len() != inst.m() {
        return Err(ModelError::DimensionMismatch(format!(
            "certificate length {} vs m = {}",
            cert.p.len(),
            inst.m()
        )));
    }
    let bp = inst.b.tr_mul_vec(&cert.p);
    let a_y: Vec<f64> = bp
        .iter()
        .zip(&inst.f)
        .map(|(&bpj, &fj)| bpj - cert.pi0 * fj)
        .collect();
    let sup = a_y
        .iter()
        .fold(cert.pi0.abs(), |acc, &v| acc.max(v.abs()));
    if sup <= ZERO_TOL {
        return Err(ModelError::VacuousCertificate);
    }
    let kind = if cert.pi0 > ZERO_TOL {
        CutKind::Optimality
    } else {
        CutKind::Feasibility
    };
    let rhs: f64 = cert.p.iter().zip(&inst.rhs).map(|(&p, &b)| p * b).sum();
    Ok(Cut {
        a_y,
        a_gamma: scaling.beta * cert.pi0,
        rhs,
        kind,
        source,
    })
}

/// Resolution of one dual-subproblem call.
#[derive(Debug, Clone)]
pub enum DspResolution {
    /// PSP feasible at y: optimal dual `(u, 1)` and the subproblem value
    /// `q_tilde = u'(b - By)`.
    Bounded { dual: DualCertificate, q_tilde: f64 },
    /// PSP infeasible at y: a feasibility ray `(v, 0)`.
    Unbounded { ray: DualCertificate },
}

/// Oracle answering classical dual subproblems at arbitrary (possibly
/// fractional) y. Implementations: the generic LP route and the CFLP
/// transportation route.
pub trait DspOracle {
    fn solve_dsp(&mut self, y: &[f64]) -> Result<DspResolution, KernelError>;

    /// `Q(y) = f'y + q_tilde(y)` for bounded resolutions.
    fn q_of(&mut self, inst: &ProblemData, y: &[f64]) -> Result<Option<f64>, KernelError> {
        match self.solve_dsp(y)? {
            DspResolution::Bounded { q_tilde, .. } => {
                let fy: f64 = inst.f.iter().zip(y).map(|(&fj, &yj)| fj * yj).sum();
                Ok(Some(fy + q_tilde))
            }
            DspResolution::Unbounded { .. } => Ok(None),
        }
    }
}

/// Computes the eta-scaling factor from the core-point cut: the mean
/// absolute y-coefficient of the optimality cut produced at the core point.
/// Falls back to 1 (with a warning message) when the dual subproblem at the
/// core point is unbounded or the coefficient vector is numerically zero.
pub fn compute_scaling_beta(
    inst: &ProblemData,
    core_point: &[f64],
    oracle: &mut dyn DspOracle,
) -> Result<(ScalingInfo, Option<String>), KernelError> {
    match oracle.solve_dsp(core_point)? {
        DspResolution::Bounded { dual, .. } => {
            let ub = inst.b.tr_mul_vec(&dual.p);
            let l1: f64 = ub
                .iter()
                .zip(&inst.f)
                .map(|(&u, &fj)| (u - fj).abs())
                .sum();
            let beta = l1 / inst.n().max(1) as f64;
            if beta <= ZERO_TOL {
                Ok((
                    ScalingInfo { beta: 1.0 },
                    Some("core-point cut has zero y-coefficients; using beta = 1".into()),
                ))
            } else {
                Ok((ScalingInfo { beta }, None))
            }
        }
        DspResolution::Unbounded { .. } => Ok((
            ScalingInfo { beta: 1.0 },
            Some("core point outside dom(Q); using beta = 1".into()),
        )),
    }
}

/// The one-facility micro instance used across the test suites:
/// `min 2x + 3y  s.t.  x + y >= 1, y >= 0, x >= 0, y binary`.
pub fn micro_m1() -> ProblemData {
    ProblemData {
        c: vec![2.0],
        f: vec![3.0],
        a: SparseMat::from_triplets(2, 1, &[(0, 0, 1.0)]).unwrap(),
        b: SparseMat::from_triplets(2, 1, &[(0, 0, 1.0), (1, 0, 1.0)]).unwrap(),
        rhs: vec![1.0, 0.0],
        y_domain: YDomain::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_well_formed() {
        let inst = micro_m1();
        assert!(validate(&inst).is_empty());
    }

    #[test]
    fn validate_flags_short_rhs() {
        let mut inst = micro_m1();
        inst.rhs.pop();
        let issues = validate(&inst);
        assert!(issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::DimensionMismatch(_))));
    }

    #[test]
    fn validate_empty_constraints() {
        let inst = ProblemData {
            c: vec![1.0],
            f: vec![1.0],
            a: SparseMat::zeros(0, 1),
            b: SparseMat::zeros(0, 1),
            rhs: vec![],
            y_domain: YDomain::default(),
        };
        assert!(validate(&inst).is_empty());
    }

    #[test]
    fn violation_micro_example() {
        let inst = micro_m1();
        let cert = DualCertificate { p: vec![2.0, 1.0], pi0: 1.0 };
        let point = MasterPoint { y: vec![0.0], eta: 0.0, gamma: 0.0 };
        let v = violation(&cert, &point, &inst).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        // zero certificate
        let zero = DualCertificate { p: vec![0.0, 0.0], pi0: 0.0 };
        assert_eq!(violation(&zero, &point, &inst).unwrap(), 0.0);
    }

    #[test]
    fn violation_zero_on_hyperplane() {
        let inst = micro_m1();
        let cert = DualCertificate { p: vec![2.0, 1.0], pi0: 1.0 };
        // this certificate's cut reads gamma >= 2; points with eta = 2 sit on it
        let point = MasterPoint { y: vec![0.7], eta: 2.0, gamma: 2.0 };
        let v = violation(&cert, &point, &inst).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn cut_micro_example() {
        let inst = micro_m1();
        let cert = DualCertificate { p: vec![2.0, 1.0], pi0: 1.0 };
        let scaling = ScalingInfo::identity();
        let cut = cut_from_certificate(&cert, &inst, &scaling, StrategyKind::Cb).unwrap();
        assert!(cut.a_y[0].abs() < 1e-12);
        assert!((cut.a_gamma - 1.0).abs() < 1e-12);
        assert!((cut.rhs - 2.0).abs() < 1e-12);
        assert_eq!(cut.kind, CutKind::Optimality);
    }

    #[test]
    fn feasibility_kind_when_pi0_zero() {
        let inst = micro_m1();
        let cert = DualCertificate { p: vec![0.0, 1.0], pi0: 0.0 };
        let cut = cut_from_certificate(&cert, &inst, &ScalingInfo::identity(), StrategyKind::Cb)
            .unwrap();
        assert_eq!(cut.kind, CutKind::Feasibility);
        assert_eq!(cut.a_gamma, 0.0);
    }

    #[test]
    fn vacuous_certificate_rejected() {
        let inst = micro_m1();
        let cert = DualCertificate { p: vec![0.0, 0.0], pi0: 0.0 };
        assert!(matches!(
            cut_from_certificate(&cert, &inst, &ScalingInfo::identity(), StrategyKind::Cb),
            Err(ModelError::VacuousCertificate)
        ));
    }

    #[test]
    fn certificate_scaling_gives_same_cut_after_normalization() {
        let inst = micro_m1();
        let base = DualCertificate { p: vec![2.0, 1.0], pi0: 1.0 };
        let scaling = ScalingInfo::identity();
        let reference = cut_from_certificate(&base, &inst, &scaling, StrategyKind::Cb).unwrap();
        for alpha in [0.1, 1.0, 1000.0] {
            let scaled = base.scaled(alpha);
            let normalized = scaled.scaled(1.0 / scaled.pi0);
            let cut = cut_from_certificate(&normalized, &inst, &scaling, StrategyKind::Cb).unwrap();
            assert!((cut.a_y[0] - reference.a_y[0]).abs() < 1e-9);
            assert!((cut.a_gamma - reference.a_gamma).abs() < 1e-9);
            assert!((cut.rhs - reference.rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn beta_arithmetic_mean() {
        // n = 2 with coefficient vector (-2, 4): beta = 3
        let inst = ProblemData {
            c: vec![],
            f: vec![2.0, -4.0],
            a: SparseMat::zeros(1, 0),
            b: SparseMat::from_triplets(1, 2, &[]).unwrap(),
            rhs: vec![0.0],
            y_domain: YDomain::default(),
        };
        struct Fixed;
        impl DspOracle for Fixed {
            fn solve_dsp(&mut self, _y: &[f64]) -> Result<DspResolution, KernelError> {
                Ok(DspResolution::Bounded {
                    dual: DualCertificate { p: vec![0.0], pi0: 1.0 },
                    q_tilde: 0.0,
                })
            }
        }
        // u'B - f' = (0,0) - (2,-4) = (-2, 4), mean abs = 3
        let (s, warn) = compute_scaling_beta(&inst, &[0.5, 0.5], &mut Fixed).unwrap();
        assert!(warn.is_none());
        assert!((s.beta - 3.0).abs() < 1e-12);
    }
}
