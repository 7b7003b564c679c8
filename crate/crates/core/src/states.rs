//! Truncated photon-number distributions of the supported light sources.
//!
//! Every constructor returns a finite window `0..=n_max` together with a
//! certified upper bound on the probability mass left outside it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{binomial_loss_matrix, Efficiency};

/// Default certified tail mass when the caller does not fix `n_max`.
pub const DEFAULT_TAIL: f64 = 1e-12;

/// Hard ceiling on automatically chosen windows.
pub const MAX_AUTO_N: usize = 1 << 20;

/// How to cut an infinite photon-number distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Keep exactly `0..=n_max`.
    Fixed(usize),
    /// Smallest window whose certified tail is at most the given mass.
    Tail(f64),
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Tail(DEFAULT_TAIL)
    }
}

impl Truncation {
    fn validate(self) -> Result<Self> {
        match self {
            Truncation::Tail(eps) if !(eps > 0.0 && eps < 1.0) => Err(Error::InvalidTolerance(eps)),
            t => Ok(t),
        }
    }
}

/// Parametric description of the input light.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum StateSpec {
    Coherent { mean: f64 },
    Thermal { mean: f64 },
    MultimodeThermal { mean: f64, modes: u32 },
    TwoModeSqueezed { zeta: f64 },
}

impl StateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Coherent { mean } | StateSpec::Thermal { mean } => check_mean(mean),
            StateSpec::MultimodeThermal { mean, modes } => {
                check_mean(mean)?;
                if modes == 0 {
                    return Err(Error::NoModes);
                }
                Ok(())
            }
            StateSpec::TwoModeSqueezed { zeta } => check_zeta(zeta),
        }
    }

    /// Mean photon number of one arm.
    pub fn mean_photons(&self) -> f64 {
        match *self {
            StateSpec::Coherent { mean }
            | StateSpec::Thermal { mean }
            | StateSpec::MultimodeThermal { mean, .. } => mean,
            StateSpec::TwoModeSqueezed { zeta } => {
                let s = zeta * zeta;
                s / (1.0 - s)
            }
        }
    }

    pub fn is_two_mode(&self) -> bool {
        matches!(self, StateSpec::TwoModeSqueezed { .. })
    }

    /// Single-arm photon statistics. For the two-mode squeezed state this is
    /// the (thermal) reduced distribution of one arm.
    pub fn photon_distribution(&self, trunc: Truncation) -> Result<PhotonDistribution> {
        match *self {
            StateSpec::Coherent { mean } => coherent_pmf(mean, trunc),
            StateSpec::Thermal { mean } => thermal_pmf(mean, trunc),
            StateSpec::MultimodeThermal { mean, modes } => {
                multimode_thermal_pmf(mean, modes, trunc)
            }
            StateSpec::TwoModeSqueezed { zeta } => {
                check_zeta(zeta)?;
                thermal_pmf(self.mean_photons(), trunc)
            }
        }
    }

    /// The same family after binomial loss, when it stays in closed form.
    pub fn after_loss(&self, eta: f64) -> Result<StateSpec> {
        let eta = Efficiency::new(eta)?.get();
        Ok(match *self {
            StateSpec::Coherent { mean } => StateSpec::Coherent { mean: eta * mean },
            StateSpec::Thermal { mean } => StateSpec::Thermal { mean: eta * mean },
            StateSpec::MultimodeThermal { mean, modes } => StateSpec::MultimodeThermal {
                mean: eta * mean,
                modes,
            },
            StateSpec::TwoModeSqueezed { .. } => StateSpec::Thermal {
                mean: eta * self.mean_photons(),
            },
        })
    }
}

fn check_mean(mean: f64) -> Result<()> {
    if mean.is_finite() && mean >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidMean(mean))
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta.is_finite() && zeta.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::SqueezingOutOfRange(zeta))
    }
}

/// Parameters of `f_n = a b^n` and of its shifted relatives
/// `g_n = a (n+m)!/n! b^(n+m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFamilyParams {
    pub a: f64,
    pub b: f64,
    pub m: u32,
}

impl GeometricFamilyParams {
    pub fn new(a: f64, b: f64, m: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&b) {
            return Err(Error::RatioOutOfRange(b));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Config(format!(
                "prefactor must be positive, got {a}"
            )));
        }
        Ok(GeometricFamilyParams { a, b, m })
    }

    /// Single-mode thermal light: `a = 1/(1+mean)`, `b = mean/(1+mean)`.
    pub fn thermal(mean: f64) -> Result<Self> {
        Self::multimode_thermal(mean, 1)
    }

    /// `M`-mode thermal light: `b = mean/(M+mean)`, `m = M-1`,
    /// `a = (M/(mean+M))^M / (M-1)!`.
    pub fn multimode_thermal(mean: f64, modes: u32) -> Result<Self> {
        check_mean(mean)?;
        if modes == 0 {
            return Err(Error::NoModes);
        }
        let mf = modes as f64;
        let b = mean / (mf + mean);
        let gamma: f64 = (1..modes).map(|i| i as f64).product();
        let a = (mf / (mean + mf)).powi(modes as i32) / gamma;
        Self::new(a, b, modes - 1)
    }
}

/// Truncated single-mode photon-number distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    pmf: Vec<f64>,
    tail_bound: f64,
}

impl PhotonDistribution {
    /// Wraps a pmf given on `0..=n_max`; entries must be non-negative.
    pub fn new(pmf: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Config(
                "pmf entries must be finite and non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&tail_bound) {
            return Err(Error::Config(format!(
                "tail bound {tail_bound} outside [0, 1]"
            )));
        }
        Ok(PhotonDistribution { pmf, tail_bound })
    }

    pub fn vacuum() -> Self {
        PhotonDistribution {
            pmf: vec![1.0],
            tail_bound: 0.0,
        }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn n_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn total(&self) -> f64 {
        self.pmf.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(n, p)| (n * n) as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }

    /// Extends (with zeros) or keeps the window so that `n_max >= n`.
    pub fn padded_to(mut self, n: usize) -> Self {
        if self.pmf.len() <= n {
            self.pmf.resize(n + 1, 0.0);
        }
        self
    }
}

/// Truncated joint distribution of two photon numbers, row-major in `n1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPhotonDistribution {
    pmf: Vec<f64>,
    n_max: usize,
    tail_bound: f64,
}

impl JointPhotonDistribution {
    pub fn from_matrix(pmf: Vec<f64>, n_max: usize, tail_bound: f64) -> Result<Self> {
        if pmf.len() != (n_max + 1) * (n_max + 1) {
            return Err(Error::Config("joint pmf must be square".into()));
        }
        if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Config(
                "pmf entries must be finite and non-negative".into(),
            ));
        }
        Ok(JointPhotonDistribution {
            pmf,
            n_max,
            tail_bound,
        })
    }

    /// Two independent beams on a common window.
    pub fn product(first: &PhotonDistribution, second: &PhotonDistribution) -> Self {
        let n_max = first.n_max().max(second.n_max());
        let dim = n_max + 1;
        let mut pmf = vec![0.0; dim * dim];
        for (i, p) in first.pmf().iter().enumerate() {
            for (j, q) in second.pmf().iter().enumerate() {
                pmf[i * dim + j] = p * q;
            }
        }
        // mass outside the product window is at most the union of both tails
        let tail_bound = (first.tail_bound() + second.tail_bound()).min(1.0);
        JointPhotonDistribution {
            pmf,
            n_max,
            tail_bound,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn get(&self, n1: usize, n2: usize) -> f64 {
        if n1 > self.n_max || n2 > self.n_max {
            0.0
        } else {
            self.pmf[n1 * (self.n_max + 1) + n2]
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pmf
    }

    pub fn total(&self) -> f64 {
        self.pmf.iter().sum()
    }

    /// Marginal of the first (`arm = 0`) or second arm.
    pub fn marginal(&self, arm: usize) -> PhotonDistribution {
        let dim = self.n_max + 1;
        let mut out = vec![0.0; dim];
        for i in 0..dim {
            for j in 0..dim {
                let p = self.pmf[i * dim + j];
                out[if arm == 0 { i } else { j }] += p;
            }
        }
        PhotonDistribution {
            pmf: out,
            tail_bound: self.tail_bound,
        }
    }
}

fn auto_window(
    trunc: Truncation,
    tail_after: impl Fn(usize) -> f64,
    start: usize,
) -> Result<usize> {
    match trunc.validate()? {
        Truncation::Fixed(n) => Ok(n),
        Truncation::Tail(eps) => {
            let mut n = start;
            while tail_after(n) > eps {
                n += 1;
                if n > MAX_AUTO_N {
                    return Err(Error::Config(format!(
                        "no window up to {MAX_AUTO_N} photons reaches tail {eps:e}"
                    )));
                }
            }
            Ok(n)
        }
    }
}

/// Chernoff bound on `P(X > n_max)` for a Poisson variable of the given mean.
fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let t = (n_max + 1) as f64;
    if t <= mean {
        return 1.0;
    }
    (-mean + t * (1.0 + mean.ln() - t.ln())).exp().min(1.0)
}

/// Poisson statistics of a coherent state.
pub fn coherent_pmf(mean: f64, trunc: Truncation) -> Result<PhotonDistribution> {
    check_mean(mean)?;
    let n_max = auto_window(trunc, |n| poisson_tail(mean, n), mean.floor() as usize)?;
    let mut pmf = Vec::with_capacity(n_max + 1);
    let start = (-mean).exp();
    if start > f64::MIN_POSITIVE {
        let mut p = start;
        pmf.push(p);
        for n in 1..=n_max {
            p *= mean / n as f64;
            pmf.push(p);
        }
    } else {
        // e^-mean underflows; accumulate in log space instead
        let ln_mean = mean.ln();
        let mut lp = -mean;
        pmf.push(0.0);
        for n in 1..=n_max {
            lp += ln_mean - (n as f64).ln();
            pmf.push(lp.exp());
        }
    }
    Ok(PhotonDistribution {
        pmf,
        tail_bound: poisson_tail(mean, n_max),
    })
}

/// Bose-Einstein statistics `a b^n` of a single-mode thermal state.
pub fn thermal_pmf(mean: f64, trunc: Truncation) -> Result<PhotonDistribution> {
    check_mean(mean)?;
    let a = 1.0 / (1.0 + mean);
    let b = mean / (1.0 + mean);
    let geometric_tail = |n: usize| b.powi((n + 1) as i32);
    let n_max = match trunc.validate()? {
        Truncation::Fixed(n) => n,
        Truncation::Tail(_) if b == 0.0 => 0,
        Truncation::Tail(eps) => {
            let guess = (eps.ln() / b.ln()).ceil().max(1.0) as usize - 1;
            auto_window(
                Truncation::Tail(eps),
                geometric_tail,
                guess.saturating_sub(2),
            )?
        }
    };
    let mut pmf = Vec::with_capacity(n_max + 1);
    let mut p = a;
    pmf.push(p);
    for _ in 1..=n_max {
        p *= b;
        pmf.push(p);
    }
    Ok(PhotonDistribution {
        pmf,
        tail_bound: geometric_tail(n_max).min(1.0),
    })
}

/// Negative-binomial statistics of `modes`-mode thermal light.
pub fn multimode_thermal_pmf(
    mean: f64,
    modes: u32,
    trunc: Truncation,
) -> Result<PhotonDistribution> {
    check_mean(mean)?;
    if modes == 0 {
        return Err(Error::NoModes);
    }
    if modes == 1 {
        return thermal_pmf(mean, trunc);
    }
    let mf = modes as f64;
    let p0 = (mf / (mf + mean)).powi(modes as i32);
    let q = mean / (mf + mean);
    let ratio = move |n: usize| q * (n as f64 + mf - 1.0) / n as f64;
    // term ratios decrease towards q, so past the mode the tail is majorized
    // by a geometric series with the next ratio
    let tail = move |n_max: usize, last: f64| {
        if q == 0.0 {
            return 0.0;
        }
        let r = ratio(n_max + 1);
        if r < 1.0 {
            (last * r / (1.0 - r)).min(1.0)
        } else {
            1.0
        }
    };
    let n_max = match trunc.validate()? {
        Truncation::Fixed(n) => n,
        Truncation::Tail(_) if q == 0.0 => 0,
        Truncation::Tail(eps) => {
            let mut n = 0usize;
            let mut last = p0;
            while tail(n, last) > eps {
                n += 1;
                last *= ratio(n);
                if n > MAX_AUTO_N {
                    return Err(Error::Config(format!(
                        "no window up to {MAX_AUTO_N} photons reaches tail {eps:e}"
                    )));
                }
            }
            n
        }
    };
    let mut pmf = Vec::with_capacity(n_max + 1);
    let mut p = p0;
    pmf.push(p);
    for n in 1..=n_max {
        p *= ratio(n);
        pmf.push(p);
    }
    let last = *pmf.last().unwrap();
    Ok(PhotonDistribution {
        pmf,
        tail_bound: tail(n_max, last),
    })
}

/// Joint statistics `(1-|zeta|^2) |zeta|^(2n)` on the diagonal `n1 = n2 = n`.
pub fn two_mode_squeezed_pmf(zeta: f64, trunc: Truncation) -> Result<JointPhotonDistribution> {
    check_zeta(zeta)?;
    let s = zeta * zeta;
    let tail = |n: usize| s.powi((n + 1) as i32);
    let n_max = match trunc.validate()? {
        Truncation::Fixed(n) => n,
        Truncation::Tail(_) if s == 0.0 => 0,
        Truncation::Tail(eps) => auto_window(Truncation::Tail(eps), tail, 0)?,
    };
    let dim = n_max + 1;
    let mut pmf = vec![0.0; dim * dim];
    let mut p = 1.0 - s;
    for n in 0..dim {
        pmf[n * dim + n] = p;
        p *= s;
    }
    Ok(JointPhotonDistribution {
        pmf,
        n_max,
        tail_bound: tail(n_max).min(1.0),
    })
}

/// Binomial loss channel applied to a photon distribution.
///
/// The window is kept; omitted input mass can only land in omitted or
/// retained output mass, so the tail bound carries over unchanged.
pub fn apply_loss(dist: &PhotonDistribution, eta: f64) -> Result<PhotonDistribution> {
    let eta = Efficiency::new(eta)?.get();
    let dim = dist.pmf.len();
    let mut out = vec![0.0; dim];
    // row[n] = C(m,n) eta^n (1-eta)^(m-n), advanced in m
    let mut row = vec![0.0; dim];
    row[0] = 1.0;
    for (m, &fm) in dist.pmf.iter().enumerate() {
        if m > 0 {
            for n in (0..=m).rev() {
                let pass = if n >= 1 { row[n - 1] * eta } else { 0.0 };
                row[n] = row[n] * (1.0 - eta) + pass;
            }
        }
        if fm != 0.0 {
            for n in 0..=m {
                out[n] += row[n] * fm;
            }
        }
    }
    Ok(PhotonDistribution {
        pmf: out,
        tail_bound: dist.tail_bound,
    })
}

/// Independent binomial loss on each arm of a joint distribution.
pub fn apply_loss_joint(
    dist: &JointPhotonDistribution,
    eta1: f64,
    eta2: f64,
) -> Result<JointPhotonDistribution> {
    let dim = dist.n_max + 1;
    let l1 = binomial_loss_matrix(eta1, dist.n_max)?;
    let l2 = binomial_loss_matrix(eta2, dist.n_max)?;
    // stage[a][j] = sum_b f[a][b] L2(j|b)
    let mut stage = vec![0.0; dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            let f = dist.pmf[a * dim + b];
            if f == 0.0 {
                continue;
            }
            let col = &l2[b * dim..b * dim + b + 1];
            for (j, l) in col.iter().enumerate() {
                stage[a * dim + j] += f * l;
            }
        }
    }
    let mut out = vec![0.0; dim * dim];
    for a in 0..dim {
        let col = &l1[a * dim..a * dim + a + 1];
        for (i, l) in col.iter().enumerate() {
            if *l == 0.0 {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += l * stage[a * dim + j];
            }
        }
    }
    Ok(JointPhotonDistribution {
        pmf: out,
        n_max: dist.n_max,
        tail_bound: dist.tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ln_factorial(n: usize) -> f64 {
        (1..=n).map(|i| (i as f64).ln()).sum()
    }

    #[test]
    fn coherent_values() {
        let vac = coherent_pmf(0.0, Truncation::default()).unwrap();
        assert_eq!(vac.pmf(), &[1.0]);
        assert_eq!(vac.tail_bound(), 0.0);

        let d = coherent_pmf(4.0, Truncation::Fixed(124)).unwrap();
        assert_abs_diff_eq!(d.pmf()[0], (-4.0f64).exp(), epsilon = 1e-17);
        assert_abs_diff_eq!(d.pmf()[0], 0.0183156, epsilon = 1e-7);
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-12);
        for n in [3usize, 10, 40] {
            let direct = (n as f64 * 4f64.ln() - 4.0 - ln_factorial(n)).exp();
            assert_abs_diff_eq!(d.pmf()[n], direct, epsilon = 1e-14 * direct.max(1e-300));
        }
        assert!(negative_mean_rejected());
    }

    fn negative_mean_rejected() -> bool {
        matches!(
            coherent_pmf(-1.0, Truncation::default()),
            Err(Error::InvalidMean(_))
        )
    }

    #[test]
    fn coherent_huge_mean_uses_log_space() {
        let d = coherent_pmf(800.0, Truncation::default()).unwrap();
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(d.mean(), 800.0, epsilon = 1e-7);
    }

    #[test]
    fn thermal_values() {
        let d = thermal_pmf(4.0, Truncation::Fixed(124)).unwrap();
        assert_abs_diff_eq!(d.pmf()[0], 0.2, epsilon = 1e-16);
        assert_abs_diff_eq!(d.pmf()[1], 0.16, epsilon = 1e-16);
        assert_eq!(d.tail_bound(), 0.8f64.powi(125));
        assert!(d.tail_bound() < 1e-12);
        let vac = thermal_pmf(0.0, Truncation::default()).unwrap();
        assert_eq!(vac.pmf(), &[1.0]);
        let auto = thermal_pmf(4.0, Truncation::default()).unwrap();
        assert!(auto.tail_bound() <= DEFAULT_TAIL);
        assert!(0.8f64.powi(auto.n_max() as i32) > DEFAULT_TAIL);
    }

    #[test]
    fn multimode_values() {
        let one = multimode_thermal_pmf(3.3, 1, Truncation::default()).unwrap();
        assert_eq!(one, thermal_pmf(3.3, Truncation::default()).unwrap());
        let d = multimode_thermal_pmf(2.0, 2, Truncation::default()).unwrap();
        assert_abs_diff_eq!(d.pmf()[0], 0.25, epsilon = 1e-16);
        // C(n+1, n) (1/2)^2 (1/2)^n
        assert_abs_diff_eq!(d.pmf()[3], 4.0 * 0.25 * 0.125, epsilon = 1e-16);
        assert!(d.tail_bound() <= DEFAULT_TAIL);
        assert!(d.total() + d.tail_bound() >= 1.0 - 1e-15);
        assert_eq!(
            multimode_thermal_pmf(1.0, 0, Truncation::default()),
            Err(Error::NoModes)
        );
    }

    #[test]
    fn multimode_mandel_parameter() {
        let d = multimode_thermal_pmf(4.0, 4, Truncation::Tail(1e-20)).unwrap();
        let q = d.variance() / d.mean() - 1.0;
        assert_abs_diff_eq!(q, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn squeezed_values() {
        let d = two_mode_squeezed_pmf(0.8, Truncation::default()).unwrap();
        assert_abs_diff_eq!(d.get(0, 0), 0.36, epsilon = 1e-15);
        assert_eq!(d.get(1, 2), 0.0);
        assert_eq!(d.tail_bound(), (0.8f64 * 0.8).powi(d.n_max() as i32 + 1));
        let vac = two_mode_squeezed_pmf(0.0, Truncation::default()).unwrap();
        assert_eq!(vac.get(0, 0), 1.0);
        assert!(two_mode_squeezed_pmf(1.0, Truncation::default()).is_err());
        assert!(two_mode_squeezed_pmf(-1.2, Truncation::default()).is_err());
        // negative zeta has the same photon statistics
        assert_eq!(
            two_mode_squeezed_pmf(-0.5, Truncation::Fixed(10)).unwrap(),
            two_mode_squeezed_pmf(0.5, Truncation::Fixed(10)).unwrap()
        );
    }

    #[test]
    fn squeezed_marginal_is_thermal() {
        let zeta: f64 = 0.7;
        let d = two_mode_squeezed_pmf(zeta, Truncation::Fixed(80)).unwrap();
        let th = thermal_pmf(zeta * zeta / (1.0 - zeta * zeta), Truncation::Fixed(80)).unwrap();
        for arm in 0..2 {
            let m = d.marginal(arm);
            for (a, b) in m.pmf().iter().zip(th.pmf()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    fn binom(m: usize, n: usize) -> f64 {
        (ln_factorial(m) - ln_factorial(n) - ln_factorial(m - n)).exp()
    }

    #[test]
    fn loss_identity_and_total() {
        let d = coherent_pmf(3.0, Truncation::default()).unwrap();
        assert_eq!(apply_loss(&d, 1.0).unwrap().pmf(), d.pmf());
        let gone = apply_loss(&d, 0.0).unwrap();
        assert_abs_diff_eq!(gone.pmf()[0], d.total(), epsilon = 1e-15);
        assert!(gone.pmf()[1..].iter().all(|&p| p == 0.0));
        assert!(apply_loss(&d, -0.1).is_err());
    }

    #[test]
    fn thermal_closed_under_loss() {
        let d = thermal_pmf(4.0, Truncation::Tail(1e-16)).unwrap();
        let lossy = apply_loss(&d, 0.5).unwrap();
        let target = thermal_pmf(2.0, Truncation::Fixed(d.n_max())).unwrap();
        for (n, (a, b)) in lossy.pmf().iter().zip(target.pmf()).enumerate() {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            // direct convolution for the first few entries
            if n < 5 {
                let direct: f64 = (n..=d.n_max())
                    .map(|m| binom(m, n) * 0.5f64.powi(m as i32) * d.pmf()[m])
                    .sum();
                assert_abs_diff_eq!(*a, direct, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn joint_loss() {
        let d = two_mode_squeezed_pmf(0.8, Truncation::Tail(1e-16)).unwrap();
        assert_eq!(apply_loss_joint(&d, 1.0, 1.0).unwrap(), d);

        let half = apply_loss_joint(&d, 1.0, 0.0).unwrap();
        let second = half.marginal(1);
        assert_abs_diff_eq!(second.pmf()[0], d.total(), epsilon = 1e-15);

        let lossy = apply_loss_joint(&d, 0.5, 0.5).unwrap();
        // P(n1 = 1, n2 = 0) = sum_n (1-s) s^n n 0.5^n 0.5^n
        let s: f64 = 0.64;
        let direct: f64 = (0..=d.n_max())
            .map(|n| (1.0 - s) * s.powi(n as i32) * n as f64 * 0.5f64.powi(2 * n as i32))
            .sum();
        assert_abs_diff_eq!(lossy.get(1, 0), direct, epsilon = 1e-14);
        assert_abs_diff_eq!(lossy.get(0, 1), direct, epsilon = 1e-14);
    }

    #[test]
    fn geometric_params_for_thermal() {
        let p = GeometricFamilyParams::thermal(4.0).unwrap();
        assert_abs_diff_eq!(p.a, 0.2, epsilon = 1e-16);
        assert_abs_diff_eq!(p.b, 0.8, epsilon = 1e-16);
        assert_eq!(p.m, 0);
        let p = GeometricFamilyParams::multimode_thermal(2.0, 2).unwrap();
        assert_abs_diff_eq!(p.a, 0.25, epsilon = 1e-16);
        assert_abs_diff_eq!(p.b, 0.5, epsilon = 1e-16);
        assert_eq!(p.m, 1);
        assert!(GeometricFamilyParams::new(1.0, 1.0, 0).is_err());
    }
}
