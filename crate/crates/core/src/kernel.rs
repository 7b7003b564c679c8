//! Conditional click probabilities of a multiplexed on-off detector.
//!
//! A detector with `N` elements spreads the incident light uniformly over
//! its elements; each element reports at most one click. The probability of
//! `k` clicks given `n` photons is
//!
//! ```text
//! p(k|n) = C(N,k) k! S(n,k) / N^n
//! ```
//!
//! with `S(n,k)` a Stirling number of the second kind. That form needs huge
//! intermediates, so [`build_kernel`] fills the matrix one photon at a time
//! instead. The exact form is kept in [`click_prob_exact`] for checking.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default memory budget for a single kernel matrix.
pub const DEFAULT_KERNEL_BUDGET_BYTES: usize = 256 << 20;

/// Quantum efficiency: survival probability of a photon, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Efficiency(f64);

impl Efficiency {
    pub const PERFECT: Efficiency = Efficiency(1.0);

    pub fn new(eta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&eta) {
            Ok(Efficiency(eta))
        } else {
            Err(Error::EfficiencyOutOfRange(eta))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Efficiency {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Efficiency::new(v)
    }
}

impl From<Efficiency> for f64 {
    fn from(e: Efficiency) -> f64 {
        e.0
    }
}

/// A multiplexed detector of `n_elements` on-off elements sharing one efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    n_elements: u32,
    efficiency: Efficiency,
}

impl DetectorConfig {
    pub fn new(n_elements: u32, efficiency: f64) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::NoElements);
        }
        Ok(DetectorConfig {
            n_elements,
            efficiency: Efficiency::new(efficiency)?,
        })
    }

    /// Lossless detector with `n_elements` elements.
    pub fn lossless(n_elements: u32) -> Result<Self> {
        Self::new(n_elements, 1.0)
    }

    pub fn n_elements(&self) -> u32 {
        self.n_elements
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency.get()
    }

    pub fn with_efficiency(self, efficiency: f64) -> Result<Self> {
        Self::new(self.n_elements, efficiency)
    }
}

/// Which response model a kernel or counts distribution refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Detector {
    /// `N` on-off elements.
    Multiplexed(DetectorConfig),
    /// Photon-number-resolving limit `N -> inf`: clicks equal surviving photons.
    Ideal(Efficiency),
}

impl Detector {
    pub fn multiplexed(n_elements: u32, efficiency: f64) -> Result<Self> {
        DetectorConfig::new(n_elements, efficiency).map(Detector::Multiplexed)
    }

    pub fn ideal(efficiency: f64) -> Result<Self> {
        Efficiency::new(efficiency).map(Detector::Ideal)
    }

    pub fn efficiency(&self) -> f64 {
        match self {
            Detector::Multiplexed(c) => c.efficiency(),
            Detector::Ideal(e) => e.get(),
        }
    }

    /// Number of elements, `None` for the ideal detector.
    pub fn n_elements(&self) -> Option<u32> {
        match self {
            Detector::Multiplexed(c) => Some(c.n_elements()),
            Detector::Ideal(_) => None,
        }
    }

    /// Largest click count observable when at most `n_max` photons arrive.
    pub fn max_clicks(&self, n_max: usize) -> usize {
        match self {
            Detector::Multiplexed(c) => c.n_elements() as usize,
            Detector::Ideal(_) => n_max,
        }
    }
}

/// Dense matrix of `p(k|n)` for `k = 0..=max_clicks`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickKernel {
    detector: Detector,
    n_max: usize,
    rows: usize,
    // column-major: entry (k, n) at n * rows + k
    probs: Vec<f64>,
}

impl ClickKernel {
    pub fn detector(&self) -> Detector {
        self.detector
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Largest click count represented (number of rows minus one).
    pub fn max_clicks(&self) -> usize {
        self.rows - 1
    }

    /// `p(k|n)`; zero outside the stored window in `k`.
    ///
    /// # Panics
    /// If `n > n_max`.
    pub fn prob(&self, k: usize, n: usize) -> f64 {
        assert!(
            n <= self.n_max,
            "photon number {n} beyond kernel window {}",
            self.n_max
        );
        if k >= self.rows {
            0.0
        } else {
            self.probs[n * self.rows + k]
        }
    }

    /// Conditional click distribution for exactly `n` photons.
    pub fn column(&self, n: usize) -> &[f64] {
        &self.probs[n * self.rows..(n + 1) * self.rows]
    }

    /// Row-major copy, `rows[k][n]`.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|k| (0..=self.n_max).map(|n| self.prob(k, n)).collect())
            .collect()
    }
}

fn check_budget(rows: usize, cols: usize, budget: usize) -> Result<()> {
    let bytes = rows
        .checked_mul(cols)
        .and_then(|e| e.checked_mul(std::mem::size_of::<f64>()));
    match bytes {
        Some(b) if b <= budget => Ok(()),
        _ => Err(Error::KernelTooLarge { rows, cols, budget }),
    }
}

/// Builds the lossy kernel of a multiplexed detector up to `n_max` photons.
pub fn build_kernel(config: DetectorConfig, n_max: usize) -> Result<ClickKernel> {
    build_kernel_with_budget(config, n_max, DEFAULT_KERNEL_BUDGET_BYTES)
}

/// Like [`build_kernel`] with an explicit memory budget in bytes.
pub fn build_kernel_with_budget(
    config: DetectorConfig,
    n_max: usize,
    budget: usize,
) -> Result<ClickKernel> {
    let n_el = config.n_elements() as usize;
    let rows = n_el + 1;
    let cols = n_max.checked_add(1).ok_or(Error::KernelTooLarge {
        rows,
        cols: usize::MAX,
        budget,
    })?;
    check_budget(rows, cols, budget)?;

    let eta = config.efficiency();
    let nf = n_el as f64;
    let mut probs = vec![0.0; rows * cols];
    probs[0] = 1.0;
    for n in 0..n_max {
        let (prev, next) = probs.split_at_mut((n + 1) * rows);
        let prev = &prev[n * rows..];
        let next = &mut next[..rows];
        // an added photon is lost, hits a lit element, or lights a dark one
        let top = n_el.min(n + 1);
        for k in 0..=top {
            let stay = if k <= n_el.min(n) {
                prev[k] * (1.0 - eta + eta * k as f64 / nf)
            } else {
                0.0
            };
            let grow = if k >= 1 {
                prev[k - 1] * eta * (nf - (k - 1) as f64) / nf
            } else {
                0.0
            };
            next[k] = stay + grow;
        }
    }
    Ok(ClickKernel {
        detector: Detector::Multiplexed(config),
        n_max,
        rows,
        probs,
    })
}

/// Kernel of the photon-number-resolving limit: `p(k|n) = C(n,k) eta^k (1-eta)^(n-k)`.
pub fn ideal_kernel(efficiency: f64, n_max: usize) -> Result<ClickKernel> {
    let eta = Efficiency::new(efficiency)?;
    let matrix = binomial_loss_matrix(eta.get(), n_max)?;
    Ok(ClickKernel {
        detector: Detector::Ideal(eta),
        n_max,
        rows: n_max + 1,
        probs: matrix,
    })
}

/// Kernel for any [`Detector`].
pub fn kernel_for(detector: Detector, n_max: usize) -> Result<ClickKernel> {
    match detector {
        Detector::Multiplexed(c) => build_kernel(c, n_max),
        Detector::Ideal(e) => ideal_kernel(e.get(), n_max),
    }
}

/// Binomial loss matrix `p(n|m) = C(m,n) eta^n (1-eta)^(m-n)` in column-major
/// layout (column `m`, row `n`), `m, n = 0..=n_max`.
///
/// Built by the Pascal-type recurrence in `m`, which does not underflow for
/// large `m` the way `(1-eta)^m` does.
pub fn binomial_loss_matrix(eta: f64, n_max: usize) -> Result<Vec<f64>> {
    let eta = Efficiency::new(eta)?.get();
    let dim = n_max + 1;
    check_budget(dim, dim, DEFAULT_KERNEL_BUDGET_BYTES)?;
    let mut out = vec![0.0; dim * dim];
    out[0] = 1.0;
    for m in 0..n_max {
        let (prev, next) = out.split_at_mut((m + 1) * dim);
        let prev = &prev[m * dim..];
        let next = &mut next[..dim];
        for n in 0..=m + 1 {
            let keep = if n <= m { prev[n] * (1.0 - eta) } else { 0.0 };
            let pass = if n >= 1 { prev[n - 1] * eta } else { 0.0 };
            next[n] = keep + pass;
        }
    }
    Ok(out)
}

/// Stirling number of the second kind `S(n, k)`, exactly.
pub fn stirling2(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    if n == 0 {
        return BigUint::one();
    }
    let k = k as usize;
    // row[j] = S(m, j) for j = 0..=k
    let mut row = vec![BigUint::zero(); k + 1];
    row[0] = BigUint::one();
    for m in 0..n as usize {
        for j in (1..=k.min(m + 1)).rev() {
            let left = std::mem::take(&mut row[j]) * BigUint::from(j);
            row[j] = left + &row[j - 1];
        }
        row[0] = BigUint::zero();
    }
    row.swap_remove(k)
}

/// Rising factorial `y (y+1) ... (y+n-1)` as an explicit product.
pub fn pochhammer(y: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (y + i as f64))
}

fn binomial_big(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| {
        acc * BigUint::from(n - i) / BigUint::from(i + 1)
    })
}

fn factorial_big(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Lossless `p(k|n)` from the Stirling-number form, as an exact rational.
pub fn click_prob_exact_ratio(n_elements: u32, k: i64, n: u32) -> BigRational {
    if n_elements == 0 || k < 0 || k > n_elements as i64 || k > n as i64 {
        return BigRational::zero();
    }
    let k = k as u32;
    let numer = binomial_big(n_elements, k) * factorial_big(k) * stirling2(n, k);
    let denom = BigUint::from(n_elements).pow(n);
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Lossless `p(k|n)` from the Stirling-number form, converted to `f64`.
pub fn click_prob_exact(n_elements: u32, k: i64, n: u32) -> f64 {
    click_prob_exact_ratio(n_elements, k, n)
        .to_f64()
        .unwrap_or(0.0)
}

/// Closed forms of the lossy kernel for zero and one click.
///
/// `k = 0` gives `(1-eta)^n`. `k = 1` gives
/// `N (1-eta)^n [((eta - eta N + N) / (N - eta N))^n - 1]`, which divides by
/// zero at `eta = 1`; that case is reported as [`Error::ClosedFormDomain`].
pub fn lossy_click_prob_closed_form(n_elements: u32, eta: f64, k: u32, n: u32) -> Result<f64> {
    if n_elements == 0 {
        return Err(Error::NoElements);
    }
    let eta = Efficiency::new(eta)?.get();
    let loss = 1.0 - eta;
    let nf = n_elements as f64;
    let n = n as i32;
    match k {
        0 => Ok(loss.powi(n)),
        1 => {
            if eta == 1.0 {
                return Err(Error::ClosedFormDomain(
                    "one-click closed form needs eta < 1",
                ));
            }
            let ratio = (eta - eta * nf + nf) / (nf - eta * nf);
            Ok(nf * loss.powi(n) * (ratio.powi(n) - 1.0))
        }
        _ => Err(Error::ClosedFormDomain("closed form only for k = 0 or 1")),
    }
}
