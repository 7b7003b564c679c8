//! Click-count statistics and their moments.
//!
//! Three independent routes to the count moments live here:
//!
//! * the truncated series: photon pmf through the kernel, then a finite sum
//!   over `k` ([`counts_pmf`], [`CountsDistribution::moments`]);
//! * closed forms for coherent, thermal and two-mode thermal light;
//! * the finite Stirling-sum for `f_n = a b^n` ([`geometric_family_moment`])
//!   and its `m`-th derivative in `b` for multimode thermal light
//!   ([`multimode_thermal_moments`]), evaluated with Taylor jets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{kernel_for, ClickKernel, Detector, DetectorConfig};
use crate::states::{
    apply_loss, GeometricFamilyParams, JointPhotonDistribution, PhotonDistribution, StateSpec,
    Truncation,
};
use crate::taylor::Jet;

/// Tail used by the brute-force series oracle.
pub const SERIES_TAIL: f64 = 1e-14;

/// Click-count distribution over `k = 0..=max_clicks`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsDistribution {
    pmf: Vec<f64>,
    detector: Detector,
    residual: f64,
}

/// Mean, second moment and variance of a count variable, with error bars
/// from the truncated photon tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    /// Bound on the error of `mean` caused by omitted photon mass.
    pub mean_error: f64,
    /// Bound on the error of `second_moment` caused by omitted photon mass.
    pub second_moment_error: f64,
}

impl MomentSummary {
    pub fn exact(mean: f64, second_moment: f64) -> Self {
        MomentSummary {
            mean,
            second_moment,
            variance: second_moment - mean * mean,
            mean_error: 0.0,
            second_moment_error: 0.0,
        }
    }

    fn with_residual(mean: f64, second_moment: f64, residual: f64, max_clicks: usize) -> Self {
        let top = max_clicks as f64;
        MomentSummary {
            mean_error: residual * top,
            second_moment_error: residual * top * top,
            ..Self::exact(mean, second_moment)
        }
    }

    pub fn mandel_q(&self) -> crate::metrics::Metric {
        crate::metrics::mandel_q(self.mean, self.variance)
    }
}

impl CountsDistribution {
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn detector(&self) -> Detector {
        self.detector
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn max_clicks(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `sum_k chi(k) c_k`.
    pub fn expect(&self, chi: impl Fn(usize) -> f64) -> f64 {
        self.pmf.iter().enumerate().map(|(k, c)| chi(k) * c).sum()
    }

    pub fn raw_moment(&self, power: u32) -> f64 {
        self.expect(|k| (k as f64).powi(power as i32))
    }

    pub fn moments(&self) -> MomentSummary {
        MomentSummary::with_residual(
            self.raw_moment(1),
            self.raw_moment(2),
            self.residual,
            self.max_clicks(),
        )
    }
}

/// Joint click-count distribution of two detectors, row-major in `k1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCountsDistribution {
    pmf: Vec<f64>,
    rows: usize,
    cols: usize,
    detectors: (Detector, Detector),
    residual: f64,
}

/// Raw moments of a joint count distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointMoments {
    pub mean1: f64,
    pub mean2: f64,
    pub second1: f64,
    pub second2: f64,
    /// `<k1 k2>`
    pub cross: f64,
    /// `<k1 - k2>`
    pub diff_mean: f64,
    /// `<(k1 - k2)^2>`
    pub diff_sq: f64,
}

impl JointCountsDistribution {
    pub fn get(&self, k1: usize, k2: usize) -> f64 {
        if k1 >= self.rows || k2 >= self.cols {
            0.0
        } else {
            self.pmf[k1 * self.cols + k2]
        }
    }

    /// `(max k1 + 1, max k2 + 1)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pmf
    }

    pub fn detectors(&self) -> (Detector, Detector) {
        self.detectors
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn expect(&self, chi: impl Fn(usize, usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for k1 in 0..self.rows {
            for k2 in 0..self.cols {
                let c = self.pmf[k1 * self.cols + k2];
                if c != 0.0 {
                    acc += chi(k1, k2) * c;
                }
            }
        }
        acc
    }

    pub fn moments(&self) -> JointMoments {
        let f = |k: usize| k as f64;
        JointMoments {
            mean1: self.expect(|a, _| f(a)),
            mean2: self.expect(|_, b| f(b)),
            second1: self.expect(|a, _| f(a) * f(a)),
            second2: self.expect(|_, b| f(b) * f(b)),
            cross: self.expect(|a, b| f(a) * f(b)),
            diff_mean: self.expect(|a, b| f(a) - f(b)),
            diff_sq: self.expect(|a, b| (f(a) - f(b)).powi(2)),
        }
    }

    pub fn marginal(&self, arm: usize) -> CountsDistribution {
        let len = if arm == 0 { self.rows } else { self.cols };
        let mut pmf = vec![0.0; len];
        for k1 in 0..self.rows {
            for k2 in 0..self.cols {
                pmf[if arm == 0 { k1 } else { k2 }] += self.pmf[k1 * self.cols + k2];
            }
        }
        CountsDistribution {
            pmf,
            detector: if arm == 0 {
                self.detectors.0
            } else {
                self.detectors.1
            },
            residual: self.residual,
        }
    }
}

/// `c_k = sum_n p(k|n) f_n` over the photon window.
pub fn counts_pmf(dist: &PhotonDistribution, kernel: &ClickKernel) -> Result<CountsDistribution> {
    if kernel.n_max() < dist.n_max() {
        return Err(Error::WindowMismatch {
            kernel: kernel.n_max(),
            needed: dist.n_max(),
        });
    }
    let mut pmf = vec![0.0; kernel.max_clicks() + 1];
    for (n, &f) in dist.pmf().iter().enumerate() {
        if f == 0.0 {
            continue;
        }
        for (c, p) in pmf.iter_mut().zip(kernel.column(n)) {
            *c += p * f;
        }
    }
    Ok(CountsDistribution {
        pmf,
        detector: kernel.detector(),
        residual: dist.tail_bound(),
    })
}

/// `c_{k1,k2} = sum p(k1|n1) p(k2|n2) f_{n1,n2}`.
pub fn joint_counts_pmf(
    dist: &JointPhotonDistribution,
    first: &ClickKernel,
    second: &ClickKernel,
) -> Result<JointCountsDistribution> {
    let n_max = dist.n_max();
    for k in [first, second] {
        if k.n_max() < n_max {
            return Err(Error::WindowMismatch {
                kernel: k.n_max(),
                needed: n_max,
            });
        }
    }
    let rows = first.max_clicks() + 1;
    let cols = second.max_clicks() + 1;
    let dim = n_max + 1;
    let f = dist.as_slice();
    // stage[n1][k2] = sum_n2 f[n1][n2] p2(k2|n2)
    let mut stage = vec![0.0; dim * cols];
    for n1 in 0..dim {
        for n2 in 0..dim {
            let p = f[n1 * dim + n2];
            if p == 0.0 {
                continue;
            }
            for (s, q) in stage[n1 * cols..(n1 + 1) * cols]
                .iter_mut()
                .zip(second.column(n2))
            {
                *s += p * q;
            }
        }
    }
    let mut pmf = vec![0.0; rows * cols];
    for n1 in 0..dim {
        let col = first.column(n1);
        let srow = &stage[n1 * cols..(n1 + 1) * cols];
        if srow.iter().all(|&s| s == 0.0) {
            continue;
        }
        for (k1, &p1) in col.iter().enumerate() {
            if p1 == 0.0 {
                continue;
            }
            for (c, s) in pmf[k1 * cols..(k1 + 1) * cols].iter_mut().zip(srow) {
                *c += p1 * s;
            }
        }
    }
    Ok(JointCountsDistribution {
        pmf,
        rows,
        cols,
        detectors: (first.detector(), second.detector()),
        residual: dist.tail_bound(),
    })
}

/// Counts of a lossless `N`-element detector for coherent light of the given
/// mean: `<k> = N(1 - e^(-mean/N))`, `var = N(1 - e^(-mean/N)) e^(-mean/N)`.
///
/// Loss is folded in by scaling the mean beforehand.
pub fn coherent_moments_closed(mean: f64, n_elements: u32) -> Result<MomentSummary> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::InvalidMean(mean));
    }
    if n_elements == 0 {
        return Err(Error::NoElements);
    }
    let nf = n_elements as f64;
    let dark = (-mean / nf).exp();
    let lit = -(-mean / nf).exp_m1();
    let m = nf * lit;
    let var = nf * lit * dark;
    Ok(MomentSummary {
        mean: m,
        second_moment: var + m * m,
        variance: var,
        mean_error: 0.0,
        second_moment_error: 0.0,
    })
}

/// Single-mode thermal counts: `<k> = mean N/(mean+N)` and
/// `var = mean N^2 (mean N + mean + N) / ((mean+N)^2 (2 mean + N))`.
pub fn thermal_moments_closed(mean: f64, n_elements: u32) -> Result<MomentSummary> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::InvalidMean(mean));
    }
    if n_elements == 0 {
        return Err(Error::NoElements);
    }
    let (mu, nf) = (mean, n_elements as f64);
    let m = mu * nf / (mu + nf);
    let var = mu * nf * nf * (mu * nf + mu + nf) / ((mu + nf).powi(2) * (2.0 * mu + nf));
    Ok(MomentSummary {
        mean: m,
        second_moment: var + m * m,
        variance: var,
        mean_error: 0.0,
        second_moment_error: 0.0,
    })
}

/// Two-mode thermal counts: `<k> = mean N (mean + 4N) / (mean + 2N)^2` and
/// `<k^2> = mean N^2 (mean^3 + 6 mean^2 N + 3 mean N (2N+1) + 4N^2) / ((mean+N)^2 (mean+2N)^2)`.
pub fn two_mode_thermal_moments_closed(mean: f64, n_elements: u32) -> Result<MomentSummary> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::InvalidMean(mean));
    }
    if n_elements == 0 {
        return Err(Error::NoElements);
    }
    let (mu, nf) = (mean, n_elements as f64);
    let m = mu * nf * (mu + 4.0 * nf) / (mu + 2.0 * nf).powi(2);
    let second = mu
        * nf
        * nf
        * (mu.powi(3) + 6.0 * mu * mu * nf + 3.0 * mu * nf * (2.0 * nf + 1.0) + 4.0 * nf * nf)
        / ((mu + nf).powi(2) * (mu + 2.0 * nf).powi(2));
    Ok(MomentSummary::exact(m, second))
}

/// `<k>_f = a b N / ((b-1)(b(N-1) - N))` for `f_n = a b^n`.
pub fn geometric_first_moment_closed(params: GeometricFamilyParams, n_elements: u32) -> f64 {
    let (a, b, nf) = (params.a, params.b, n_elements as f64);
    a * b * nf / ((b - 1.0) * (b * (nf - 1.0) - nf))
}

/// `<k^2>_f = a b (b+1) N^2 / ((b-1)(b(N-2) - N)(b + N - bN))` for `f_n = a b^n`.
pub fn geometric_second_moment_closed(params: GeometricFamilyParams, n_elements: u32) -> f64 {
    let (a, b, nf) = (params.a, params.b, n_elements as f64);
    a * b * (b + 1.0) * nf * nf / ((b - 1.0) * (b * (nf - 2.0) - nf) * (b + nf - b * nf))
}

/// `a sum_{k=0..N} k^d C(N,k) k! (-1)^k / (1 - N/b)_k` for `f_n = a b^n`.
///
/// The Pochhammer symbol is accumulated one factor at a time alongside the
/// falling factorial, so neither overflows for large `N`.
pub fn geometric_family_moment(
    params: GeometricFamilyParams,
    n_elements: u32,
    degree: u32,
) -> Result<f64> {
    if params.m != 0 {
        return Err(Error::Config(
            "geometric_family_moment needs m = 0; use multimode_thermal_moments".into(),
        ));
    }
    if n_elements == 0 {
        return Err(Error::NoElements);
    }
    let b = params.b;
    if !(0.0..1.0).contains(&b) {
        return Err(Error::RatioOutOfRange(b));
    }
    if b == 0.0 {
        return Ok(if degree == 0 { params.a } else { 0.0 });
    }
    let nf = n_elements as f64;
    let base = 1.0 - nf / b;
    let mut term = 1.0;
    let mut acc = if degree == 0 { 1.0 } else { 0.0 };
    for k in 1..=n_elements {
        let j = (k - 1) as f64;
        let poch = base + j;
        if poch.abs() < 1e-300 {
            return Err(Error::ClosedFormDomain("Pochhammer factor vanishes"));
        }
        // C(N,k) k! / C(N,k-1)(k-1)! = N - k + 1
        term *= -(nf - j) / poch;
        acc += (k as f64).powi(degree as i32) * term;
    }
    Ok(params.a * acc)
}

/// `h_d(b) = sum_k k^d prod_{j<k} b (N - j) / (N - b (j+1))` as a jet in `b`.
fn stripped_moment_jet(b: &Jet, n_elements: u32, degree: u32) -> Jet {
    let deg = b.degree();
    let nf = n_elements as f64;
    let one = Jet::constant(1.0, deg);
    let mut term = one.clone();
    let mut acc = if degree == 0 {
        one
    } else {
        Jet::constant(0.0, deg)
    };
    for k in 1..=n_elements {
        let j = (k - 1) as f64;
        let denom = &Jet::constant(nf, deg) - &b.scale(j + 1.0);
        debug_assert!(denom.value() > 1e-300);
        let factor = &b.scale(nf - j) / &denom;
        term = &term * &factor;
        acc = &acc + &term.scale((k as f64).powi(degree as i32));
    }
    acc
}

/// Count moment of `g_n = a (n+m)!/n! b^(n+m)`:
/// `a d^m/db^m [ b^m h_d(b) ]` with `h_d` the prefactor-free finite sum.
pub fn shifted_family_moment(
    params: GeometricFamilyParams,
    n_elements: u32,
    degree: u32,
) -> Result<f64> {
    if n_elements == 0 {
        return Err(Error::NoElements);
    }
    if !(0.0..1.0).contains(&params.b) {
        return Err(Error::RatioOutOfRange(params.b));
    }
    let m = params.m as usize;
    let b = Jet::variable(params.b, m);
    let shifted = &b.powi(params.m) * &stripped_moment_jet(&b, n_elements, degree);
    Ok(params.a * shifted.derivative(m))
}

/// Count moments of `modes`-mode thermal light via the derivative route.
pub fn multimode_thermal_moments(mean: f64, modes: u32, n_elements: u32) -> Result<MomentSummary> {
    if n_elements == 0 {
        return Err(Error::NoElements);
    }
    let params = GeometricFamilyParams::multimode_thermal(mean, modes)?;
    if params.b == 0.0 {
        return Ok(MomentSummary::exact(0.0, 0.0));
    }
    // a (M-1)! = (M/(mean+M))^M, so fold the factorial of the m-th
    // derivative into the prefactor rather than forming either separately
    let mf = modes as f64;
    let norm = (mf / (mean + mf)).powi(modes as i32);
    let m = params.m as usize;
    let b = Jet::variable(params.b, m);
    let bm = b.powi(params.m);
    let moment = |d: u32| norm * (&bm * &stripped_moment_jet(&b, n_elements, d)).coeff(m);
    Ok(MomentSummary::exact(moment(1), moment(2)))
}

/// Analytic count moments for a state on a multiplexed detector, choosing the
/// closed form or derivative route appropriate for the family. Loss is
/// folded into the state, which stays in its family.
pub fn closed_moments(state: &StateSpec, detector: &DetectorConfig) -> Result<MomentSummary> {
    state.validate()?;
    let lossy = state.after_loss(detector.efficiency())?;
    let n = detector.n_elements();
    match lossy {
        StateSpec::Coherent { mean } => coherent_moments_closed(mean, n),
        StateSpec::Thermal { mean } => {
            let p = GeometricFamilyParams::thermal(mean)?;
            if p.b == 0.0 {
                return Ok(MomentSummary::exact(0.0, 0.0));
            }
            Ok(MomentSummary::exact(
                geometric_family_moment(p, n, 1)?,
                geometric_family_moment(p, n, 2)?,
            ))
        }
        StateSpec::MultimodeThermal { mean, modes } => multimode_thermal_moments(mean, modes, n),
        StateSpec::TwoModeSqueezed { .. } => {
            unreachable!("after_loss maps squeezed light to a marginal")
        }
    }
}

/// Counts distribution of the single-arm photon statistics of `state`.
pub fn state_counts(
    state: &StateSpec,
    detector: Detector,
    trunc: Truncation,
) -> Result<CountsDistribution> {
    let dist = state.photon_distribution(trunc)?;
    let kernel = kernel_for(detector, dist.n_max())?;
    counts_pmf(&dist, &kernel)
}

/// Series route to the count moments with a caller-chosen tail.
pub fn series_moments(
    state: &StateSpec,
    detector: Detector,
    trunc: Truncation,
) -> Result<MomentSummary> {
    Ok(state_counts(state, detector, trunc)?.moments())
}

/// Brute-force oracle: `<k^degree>` from the truncated series with tail
/// [`SERIES_TAIL`].
pub fn tail_bounded_series_moment(
    state: &StateSpec,
    detector: Detector,
    degree: u32,
) -> Result<f64> {
    let counts = state_counts(state, detector, Truncation::Tail(SERIES_TAIL))?;
    Ok(counts.raw_moment(degree))
}

/// Applies detector loss on the photon side and counts with a lossless kernel.
pub fn counts_with_state_side_loss(
    dist: &PhotonDistribution,
    detector: DetectorConfig,
) -> Result<CountsDistribution> {
    let lossy = apply_loss(dist, detector.efficiency())?;
    let kernel = crate::kernel::build_kernel(detector.with_efficiency(1.0)?, dist.n_max())?;
    let mut counts = counts_pmf(&lossy, &kernel)?;
    counts.detector = Detector::Multiplexed(detector);
    Ok(counts)
}
