//! Distance functions and their separation problems.
//!
//! Every cut-selection strategy is a [`Separator`]: given a master trial
//! point it reports the epigraph distance (depth) and, when the point lies
//! outside the epigraph, one or more violated cuts. Variants are registered
//! by name ([`make_separator`]) and selected at runtime:
//!
//! - `cb` solves the classical dual subproblem directly;
//! - `mis`, `rl1`, `mwp`, `cw` are linear pseudonorm normalizations solved
//!   as one LP with a single normalization row;
//! - `l1`, `linf` are lp-deepest cuts by direct LP reformulation, `l4` by a
//!   second-order-cone reformulation, and `l2` by the primal projection QP;
//! - in `gpa` mode, `l1`/`l2`/`linf` cuts come from the guided projections
//!   algorithm instead of the direct reformulation.
//!
//! All depths are measured in scaled `(y, gamma)` coordinates.

mod classic;
mod euclidean;
mod nsp;
mod weights;

pub use classic::{separate_cb, GenericDspOracle};
pub(crate) use euclidean::polish_projection;
pub use euclidean::{project_onto_epigraph, separate_l2, ProjectionPoint};
pub use nsp::NspSeparator;
pub use weights::{weights_cw, weights_mis, weights_mwp};

use crate::kernel::KernelError;
use crate::model::{
    Cut, DualCertificate, MasterPoint, ModelError, ProblemData, ScalingInfo, StrategyKind,
    ZERO_TOL,
};
use std::sync::Arc;
use thiserror::Error;

/// Default absolute tolerance on depths in scaled coordinates: points with
/// depth at or below this are treated as members of the epigraph.
pub const SEP_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SepError {
    #[error("unsupported strategy: {0}")]
    UnsupportedStrategy(String),
    #[error("normalized separation problem for `{0}` is unbounded (normalization not positive on the cone)")]
    NspUnbounded(StrategyKind),
    #[error("normalization value is zero")]
    ZeroNorm,
    #[error("Conforti-Wolsey weights are degenerate at this point")]
    DegenerateCwWeights,
    #[error("core point lies outside dom(Q)")]
    CorePointOutsideDomain,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Outcome of one separation call.
#[derive(Debug, Clone)]
pub struct SeparationResult {
    /// Epigraph distance estimate in scaled coordinates. `f64::INFINITY`
    /// for the classical strategy at points outside dom(Q).
    pub depth: f64,
    pub certificate: Option<DualCertificate>,
    /// Violated cuts to add; empty iff `optimal`.
    pub cuts: Vec<Cut>,
    /// Depth did not exceed the separation tolerance.
    pub optimal: bool,
    /// `Q(y)` at the separated point when the strategy computed it anyway.
    pub q_at_point: Option<f64>,
}

impl SeparationResult {
    pub fn optimal_with_depth(depth: f64) -> Self {
        SeparationResult {
            depth,
            certificate: None,
            cuts: Vec::new(),
            optimal: true,
            q_at_point: None,
        }
    }
}

/// A cut-selection strategy bound to one instance and one scaling.
pub trait Separator {
    fn kind(&self) -> StrategyKind;
    fn separate(&mut self, point: &MasterPoint) -> Result<SeparationResult, SepError>;

    /// Lets strategies that can reuse the master's cut pool observe it
    /// before the next call (no-op by default).
    fn note_pool(&mut self, _pool: &[Cut]) {}
}

/// How a strategy's separation problem is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepMode {
    Direct,
    Gpa,
}

impl SepMode {
    pub fn name(&self) -> &'static str {
        match self {
            SepMode::Direct => "direct",
            SepMode::Gpa => "gpa",
        }
    }

    pub fn parse(s: &str) -> Option<SepMode> {
        match s {
            "direct" => Some(SepMode::Direct),
            "gpa" => Some(SepMode::Gpa),
            _ => None,
        }
    }
}

/// Core-point data shared by the strategies that need one.
#[derive(Debug, Clone)]
pub struct CoreInfo {
    pub y_bar: Vec<f64>,
    /// Subproblem value at the core point.
    pub q_tilde_bar: f64,
    /// Full objective value `Q(y_bar)`.
    pub q_bar: f64,
}

/// Everything a separator needs besides the oracle.
#[derive(Clone)]
pub struct SeparatorContext {
    pub inst: Arc<ProblemData>,
    pub scaling: ScalingInfo,
    pub sep_tol: f64,
    pub core: Option<CoreInfo>,
    pub gpa: crate::gpa::GpaConfig,
}

/// Builds the separator registered under `kind` x `mode`.
///
/// The oracle is consumed by strategies that generate classical cuts (`cb`,
/// and all `gpa`-mode strategies); purely reformulation-based strategies
/// ignore it.
pub fn make_separator(
    kind: StrategyKind,
    mode: SepMode,
    ctx: &SeparatorContext,
    oracle: Box<dyn crate::model::DspOracle>,
) -> Result<Box<dyn Separator>, SepError> {
    match mode {
        SepMode::Direct => match kind {
            StrategyKind::Cb => Ok(Box::new(classic::CbSeparator::new(ctx, oracle))),
            StrategyKind::Mis | StrategyKind::Rl1 | StrategyKind::Mwp | StrategyKind::L1
            | StrategyKind::Linf => Ok(Box::new(NspSeparator::build(kind, ctx)?)),
            StrategyKind::Cw => Ok(Box::new(nsp::CwSeparator::new(ctx)?)),
            StrategyKind::L2 => Ok(Box::new(euclidean::L2Separator::new(ctx))),
            StrategyKind::L4 => Ok(Box::new(nsp::L4Separator::new(ctx))),
        },
        SepMode::Gpa => match kind {
            StrategyKind::L1 | StrategyKind::L2 | StrategyKind::Linf => Ok(Box::new(
                crate::gpa::GpaSeparator::new(kind, ctx, oracle),
            )),
            other => Err(SepError::UnsupportedStrategy(format!(
                "gpa mode supports l1, l2, linf (got {})",
                other
            ))),
        },
    }
}

/// Scales a certificate so a positive homogeneous normalization hits 1.
pub fn charnes_cooper_scale(
    cert: &DualCertificate,
    g: impl Fn(&DualCertificate) -> f64,
) -> Result<DualCertificate, SepError> {
    let gv = g(cert);
    if !(gv > ZERO_TOL) {
        return Err(SepError::ZeroNorm);
    }
    Ok(cert.scaled(1.0 / gv))
}

/// lq norm of the scaled displacement, shared by projections and GPA bounds.
pub(crate) fn q_norm(dy: &[f64], dgamma: f64, q: QNorm) -> f64 {
    match q {
        QNorm::One => dy.iter().map(|v| v.abs()).sum::<f64>() + dgamma.abs(),
        QNorm::Two => (dy.iter().map(|v| v * v).sum::<f64>() + dgamma * dgamma).sqrt(),
        QNorm::Inf => dy.iter().fold(dgamma.abs(), |a, &v| a.max(v.abs())),
    }
}

/// Projection norm index (the dual of the cut's coefficient norm).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QNorm {
    One,
    Two,
    Inf,
}

impl QNorm {
    /// Dual pairing: cuts deepest in lp correspond to lq projections.
    pub fn dual_of(p: StrategyKind) -> Option<QNorm> {
        match p {
            StrategyKind::L1 => Some(QNorm::Inf),
            StrategyKind::L2 => Some(QNorm::Two),
            StrategyKind::Linf => Some(QNorm::One),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charnes_cooper_normalizes() {
        let cert = DualCertificate { p: vec![2.0, 1.0], pi0: 1.0 };
        let g = |c: &DualCertificate| c.pi0;
        let out = charnes_cooper_scale(&cert, g).unwrap();
        assert!((g(&out) - 1.0).abs() < 1e-10);
        assert_eq!(out.p, vec![2.0, 1.0]);
        // homogeneity: scaling the input does not change the output
        let out7 = charnes_cooper_scale(&cert.scaled(7.0), g).unwrap();
        assert!((out7.p[0] - out.p[0]).abs() < 1e-12);
        // l1 pseudonorm value 4 divides everything by 4
        let g4 = |c: &DualCertificate| c.p.iter().sum::<f64>() + c.pi0;
        let outg4 = charnes_cooper_scale(&cert, g4).unwrap();
        assert!((outg4.p[0] - 0.5).abs() < 1e-12);
        assert!((outg4.pi0 - 0.25).abs() < 1e-12);
        // zero norm rejected
        let zero = DualCertificate { p: vec![1.0, 0.0], pi0: 0.0 };
        assert!(matches!(charnes_cooper_scale(&zero, g), Err(SepError::ZeroNorm)));
    }
}
