//! Nonclassicality witnesses on photon or count statistics.
//!
//! Degenerate inputs (vacuum, saturated detectors) are legitimate sweep
//! points, so each witness returns a [`Metric`] which is either a value or a
//! tagged reason why the witness is undefined.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::counts::{CountsDistribution, JointCountsDistribution, MomentSummary};
use crate::kernel::Detector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Undefined {
    /// Mean is zero (vacuum input).
    ZeroMean,
    /// Mean count equals the number of elements.
    Saturated,
    /// All joint mass sits at `(0, 0)`.
    VacuumJoint,
    /// One arm never clicks.
    ZeroMarginal,
    /// The witness needs a finite number of elements.
    NoElementCount,
}

impl Undefined {
    pub fn as_str(self) -> &'static str {
        match self {
            Undefined::ZeroMean => "zero_mean",
            Undefined::Saturated => "saturated",
            Undefined::VacuumJoint => "vacuum_joint",
            Undefined::ZeroMarginal => "zero_marginal",
            Undefined::NoElementCount => "no_element_count",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Value(f64),
    Undefined(Undefined),
}

impl Metric {
    pub fn value(self) -> Option<f64> {
        match self {
            Metric::Value(v) => Some(v),
            Metric::Undefined(_) => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Metric::Value(_))
    }

    /// # Panics
    /// If the metric is undefined.
    pub fn unwrap(self) -> f64 {
        match self {
            Metric::Value(v) => v,
            Metric::Undefined(r) => panic!("metric undefined: {}", r.as_str()),
        }
    }

    fn checked(v: f64, reason: Undefined) -> Metric {
        if v.is_finite() {
            Metric::Value(v)
        } else {
            Metric::Undefined(reason)
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Value(v) => write!(f, "{v:.16e}"),
            Metric::Undefined(r) => write!(f, "undefined({})", r.as_str()),
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Metric::Value(v) => s.serialize_f64(*v),
            Metric::Undefined(_) => s.serialize_str(&self.to_string()),
        }
    }
}

/// `var/mean - 1`; the same functional gives `Q_M` on photons and `Q_F` on counts.
pub fn mandel_q(mean: f64, variance: f64) -> Metric {
    if mean <= 0.0 {
        return Metric::Undefined(Undefined::ZeroMean);
    }
    Metric::checked(variance / mean - 1.0, Undefined::ZeroMean)
}

/// Subbinomial parameter `N var / (mean (N - mean)) - 1`.
pub fn q_binomial(mean_k: f64, var_k: f64, n_elements: u32) -> Metric {
    let nf = n_elements as f64;
    if mean_k <= 0.0 {
        return Metric::Undefined(Undefined::ZeroMean);
    }
    if mean_k >= nf {
        return Metric::Undefined(Undefined::Saturated);
    }
    Metric::checked(
        nf * var_k / (mean_k * (nf - mean_k)) - 1.0,
        Undefined::Saturated,
    )
}

/// Fano factor `var(k1 - k2) / (<k1> + <k2>)`.
pub fn fano_factor(joint: &JointCountsDistribution) -> Metric {
    let m = joint.moments();
    let denom = m.mean1 + m.mean2;
    if denom <= 0.0 {
        return Metric::Undefined(Undefined::VacuumJoint);
    }
    let var = m.diff_sq - m.diff_mean * m.diff_mean;
    Metric::checked(var / denom, Undefined::VacuumJoint)
}

/// Cross-correlation `<k1 k2> / (<k1> <k2>)`.
pub fn g2(joint: &JointCountsDistribution) -> Metric {
    let m = joint.moments();
    if m.mean1 <= 0.0 || m.mean2 <= 0.0 {
        return Metric::Undefined(Undefined::ZeroMarginal);
    }
    Metric::checked(m.cross / (m.mean1 * m.mean2), Undefined::ZeroMarginal)
}

/// All witnesses available for one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub q_mandel: Metric,
    pub q_binomial: Metric,
    pub fano: Metric,
    pub g2: Metric,
}

impl MetricReport {
    /// Single-detector report: `Q_F` and `Q_B` from count moments.
    pub fn single(moments: &MomentSummary, detector: Detector) -> Self {
        let q_binomial = match detector.n_elements() {
            Some(n) => q_binomial(moments.mean, moments.variance, n),
            None => Metric::Undefined(Undefined::NoElementCount),
        };
        MetricReport {
            q_mandel: mandel_q(moments.mean, moments.variance),
            q_binomial,
            fano: Metric::Undefined(Undefined::NoElementCount),
            g2: Metric::Undefined(Undefined::NoElementCount),
        }
    }

    pub fn from_counts(counts: &CountsDistribution) -> Self {
        Self::single(&counts.moments(), counts.detector())
    }

    /// Two-detector report; single-arm witnesses refer to the first arm.
    pub fn joint(joint: &JointCountsDistribution) -> Self {
        let first = joint.marginal(0);
        MetricReport {
            fano: fano_factor(joint),
            g2: g2(joint),
            ..Self::from_counts(&first)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counts::{coherent_moments_closed, joint_counts_pmf, thermal_moments_closed};
    use crate::kernel::{build_kernel, ideal_kernel, DetectorConfig};
    use crate::states::{
        apply_loss_joint, coherent_pmf, two_mode_squeezed_pmf, JointPhotonDistribution, Truncation,
    };
    use approx::assert_abs_diff_eq;

    #[test]
    fn mandel_values() {
        assert_eq!(mandel_q(3.0, 3.0), Metric::Value(0.0));
        let c = coherent_moments_closed(4.0, 4).unwrap();
        assert_abs_diff_eq!(
            mandel_q(c.mean, c.variance).unwrap(),
            (-1.0f64).exp() - 1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            mandel_q(c.mean, c.variance).unwrap(),
            -0.632121,
            epsilon = 1e-6
        );
        let t = thermal_moments_closed(4.0, 4).unwrap();
        assert_abs_diff_eq!(mandel_q(t.mean, t.variance).unwrap(), 0.0, epsilon = 1e-14);
        assert_eq!(mandel_q(0.0, 0.0), Metric::Undefined(Undefined::ZeroMean));
    }

    #[test]
    fn binomial_values() {
        for &(mean, n) in &[(0.3, 1u32), (4.0, 4), (10.0, 16)] {
            let c = coherent_moments_closed(mean, n).unwrap();
            assert_abs_diff_eq!(
                q_binomial(c.mean, c.variance, n).unwrap(),
                0.0,
                epsilon = 1e-12
            );
        }
        assert_abs_diff_eq!(q_binomial(2.0, 2.0, 4).unwrap(), 1.0, epsilon = 1e-15);
        // binomial counts with per-element probability p
        let (n, p) = (6u32, 0.37);
        assert_abs_diff_eq!(
            q_binomial(n as f64 * p, n as f64 * p * (1.0 - p), n).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(
            q_binomial(0.0, 0.0, 4),
            Metric::Undefined(Undefined::ZeroMean)
        );
        assert_eq!(
            q_binomial(4.0, 0.0, 4),
            Metric::Undefined(Undefined::Saturated)
        );
    }

    fn ideal_tmsv(zeta: f64, eta: f64) -> JointCountsDistribution {
        let d = two_mode_squeezed_pmf(zeta, Truncation::Tail(1e-16)).unwrap();
        let d = apply_loss_joint(&d, eta, eta).unwrap();
        let k = ideal_kernel(1.0, d.n_max()).unwrap();
        joint_counts_pmf(&d, &k, &k).unwrap()
    }

    #[test]
    fn squeezed_ideal_witnesses() {
        let c = ideal_tmsv(0.8, 1.0);
        assert_abs_diff_eq!(fano_factor(&c).unwrap(), 0.0, epsilon = c.residual());
        assert_abs_diff_eq!(g2(&c).unwrap(), 2.5625, epsilon = 1e-10);
        let lossy = ideal_tmsv(0.8, 0.5);
        assert_abs_diff_eq!(fano_factor(&lossy).unwrap(), 0.5, epsilon = 1e-10);
        let g = {
            let d = two_mode_squeezed_pmf(0.8, Truncation::Tail(1e-16)).unwrap();
            let k = build_kernel(DetectorConfig::lossless(4).unwrap(), d.n_max()).unwrap();
            g2(&joint_counts_pmf(&d, &k, &k).unwrap()).unwrap()
        };
        assert!(g > 1.5625 && g < 2.5625, "g2 = {g}");
    }

    #[test]
    fn independent_beams() {
        let a = coherent_pmf(2.5, Truncation::Tail(1e-16)).unwrap();
        let joint = JointPhotonDistribution::product(&a, &a);
        let k = ideal_kernel(1.0, joint.n_max()).unwrap();
        let c = joint_counts_pmf(&joint, &k, &k).unwrap();
        assert_abs_diff_eq!(fano_factor(&c).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(g2(&c).unwrap(), 1.0, epsilon = 1e-10);
        let k4 = build_kernel(DetectorConfig::new(4, 0.6).unwrap(), joint.n_max()).unwrap();
        let c4 = joint_counts_pmf(&joint, &k4, &k4).unwrap();
        assert_abs_diff_eq!(g2(&c4).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn vacuum_joint_is_undefined() {
        let c = ideal_tmsv(0.0, 1.0);
        assert_eq!(fano_factor(&c), Metric::Undefined(Undefined::VacuumJoint));
        assert_eq!(g2(&c), Metric::Undefined(Undefined::ZeroMarginal));
        assert_eq!(g2(&c).to_string(), "undefined(zero_marginal)");
    }
}
