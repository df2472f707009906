//! Normalization weights for the linear pseudonorm strategies.

use super::SepError;
use crate::model::{DspOracle, DspResolution, MasterPoint, ProblemData};

/// Minimal-infeasible-subsystems default weights: `w0 = 1`, `w_i = 1` except
/// on null rows of B where `w_i = 0`.
pub fn weights_mis(inst: &ProblemData) -> (Vec<f64>, f64) {
    let w = (0..inst.m())
        .map(|i| if inst.b.row(i).is_empty() { 0.0 } else { 1.0 })
        .collect();
    (w, 1.0)
}

/// Magnanti-Wong-Papadakos weights from a core point:
/// `w = B y_bar - b`, `w0 = q_tilde(y_bar)`. Computed once per solve.
pub fn weights_mwp(
    inst: &ProblemData,
    core_point: &[f64],
    oracle: &mut dyn DspOracle,
) -> Result<(Vec<f64>, f64), SepError> {
    let q_tilde = match oracle.solve_dsp(core_point)? {
        DspResolution::Bounded { q_tilde, .. } => q_tilde,
        DspResolution::Unbounded { .. } => return Err(SepError::CorePointOutsideDomain),
    };
    let by = inst.b.mul_vec(core_point);
    let w = by.iter().zip(&inst.rhs).map(|(&a, &b)| a - b).collect();
    Ok((w, q_tilde))
}

/// Conforti-Wolsey weights, recomputed for every separated point:
/// `w = B (y_bar - y_hat)`, `w0 = Q(y_bar) - eta_hat - f'(y_bar - y_hat)`.
pub fn weights_cw(
    inst: &ProblemData,
    core_point: &[f64],
    point: &MasterPoint,
    q_of_core: f64,
) -> (Vec<f64>, f64) {
    let diff: Vec<f64> = core_point
        .iter()
        .zip(&point.y)
        .map(|(&cb, &yh)| cb - yh)
        .collect();
    let w = inst.b.mul_vec(&diff);
    let fdiff: f64 = inst.f.iter().zip(&diff).map(|(&f, &d)| f * d).sum();
    let w0 = q_of_core - point.eta - fdiff;
    (w, w0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{micro_m1, DualCertificate, ScalingInfo, SparseMat, YDomain};
    use crate::separation::GenericDspOracle;
    use std::sync::Arc;

    #[test]
    fn mis_defaults() {
        let inst = micro_m1();
        let (w, w0) = weights_mis(&inst);
        assert_eq!(w, vec![1.0, 1.0]);
        assert_eq!(w0, 1.0);
        // a zero row of B gets weight zero
        let inst2 = crate::model::ProblemData {
            c: vec![1.0],
            f: vec![1.0],
            a: SparseMat::from_triplets(2, 1, &[(0, 0, 1.0), (1, 0, 1.0)]).unwrap(),
            b: SparseMat::from_triplets(2, 1, &[(0, 0, 1.0)]).unwrap(),
            rhs: vec![1.0, 0.0],
            y_domain: YDomain::default(),
        };
        let (w2, _) = weights_mis(&inst2);
        assert_eq!(w2, vec![1.0, 0.0]);
        // m = 0
        let inst3 = crate::model::ProblemData {
            c: vec![],
            f: vec![1.0],
            a: SparseMat::zeros(0, 0),
            b: SparseMat::zeros(0, 1),
            rhs: vec![],
            y_domain: YDomain::default(),
        };
        let (w3, w03) = weights_mis(&inst3);
        assert!(w3.is_empty());
        assert_eq!(w03, 1.0);
    }

    #[test]
    fn mwp_micro_example() {
        let inst = Arc::new(micro_m1());
        let mut oracle = GenericDspOracle::new(inst.clone());
        let (w, w0) = weights_mwp(&inst, &[0.5], &mut oracle).unwrap();
        // q_tilde(0.5) = 2 * (1 - 0.5) = 1; w = B*0.5 - b = (-0.5, 0.5)
        assert!((w0 - 1.0).abs() < 1e-9);
        assert!((w[0] + 0.5).abs() < 1e-9);
        assert!((w[1] - 0.5).abs() < 1e-9);
        // idempotent: second call gives the same values
        let (w_again, w0_again) = weights_mwp(&inst, &[0.5], &mut oracle).unwrap();
        assert_eq!(w, w_again);
        assert_eq!(w0, w0_again);
    }

    #[test]
    fn mwp_weights_positive_on_core_cut_certificates() {
        // g(p, pi0) = p'(B ybar - b) + pi0 qtilde(ybar) must be nonnegative on sample rays
        let inst = Arc::new(micro_m1());
        let mut oracle = GenericDspOracle::new(inst.clone());
        let (w, w0) = weights_mwp(&inst, &[0.5], &mut oracle).unwrap();
        for cert in [
            DualCertificate { p: vec![2.0, 0.0], pi0: 1.0 },
            DualCertificate { p: vec![2.0, 1.0], pi0: 1.0 },
            DualCertificate { p: vec![0.0, 1.0], pi0: 0.0 },
        ] {
            let g: f64 = cert.p.iter().zip(&w).map(|(&p, &wi)| p * wi).sum::<f64>() + cert.pi0 * w0;
            assert!(g >= -1e-9, "g = {}", g);
        }
        let _ = ScalingInfo::identity();
    }

    #[test]
    fn cw_micro_example() {
        let inst = micro_m1();
        let point = MasterPoint { y: vec![0.0], eta: 0.0, gamma: 0.0 };
        // Q(0.5) = 3*0.5 + 1 = 2.5
        let (w, w0) = weights_cw(&inst, &[0.5], &point, 2.5);
        assert!((w0 - 1.0).abs() < 1e-9);
        assert!((w[0] - 0.5).abs() < 1e-9);
        assert!((w[1] - 0.5).abs() < 1e-9);
        // lowering eta raises w0 linearly
        let lower = MasterPoint { y: vec![0.0], eta: -1.0, gamma: -1.0 };
        let (_, w0b) = weights_cw(&inst, &[0.5], &lower, 2.5);
        assert!((w0b - 2.0).abs() < 1e-9);
        // coincident point and core degenerate to zero weights
        let coincide = MasterPoint { y: vec![0.5], eta: 2.5, gamma: 2.5 };
        let (wz, w0z) = weights_cw(&inst, &[0.5], &coincide, 2.5);
        assert!(wz.iter().all(|&v| v.abs() < 1e-12));
        assert!(w0z.abs() < 1e-12);
    }
}
