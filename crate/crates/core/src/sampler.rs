//! Monte Carlo photon chopping.
//!
//! Photon numbers are drawn from the truncated state pmf by inverse CDF and
//! every photon is then either lost or sent to a uniformly chosen element.
//! Shots run in fixed-size batches; batch `b` draws from ChaCha substreams
//! derived from `(seed, b)`, so results do not depend on the thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::counts::MomentSummary;
use crate::error::{Error, Result};
use crate::kernel::{Detector, DetectorConfig};
use crate::metrics::{Metric, MetricReport};
use crate::states::{two_mode_squeezed_pmf, PhotonDistribution, StateSpec, Truncation};

/// Largest tail mass accepted for sampling.
pub const MAX_SAMPLING_TAIL: f64 = 1e-9;

/// Shots per batch (and per RNG substream).
pub const BATCH_SHOTS: u64 = 1 << 14;

const PHOTON_STREAM: u64 = 0;
const ARM_STREAMS: [u64; 2] = [1, 2];
const PHOTON_STREAM_SECOND: u64 = 3;

/// Light entering the detector(s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    /// One state. Two-mode squeezed light feeds both arms; anything else one arm.
    Single(StateSpec),
    /// Two statistically independent beams, one per arm.
    Independent(StateSpec, StateSpec),
}

impl Source {
    pub fn arms(&self) -> usize {
        match self {
            Source::Single(s) if !s.is_two_mode() => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub shots: u64,
    pub source: Source,
    /// One detector per arm.
    pub detectors: Vec<Detector>,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::NoShots);
        }
        match self.source {
            Source::Single(s) => s.validate()?,
            Source::Independent(a, b) => {
                a.validate()?;
                b.validate()?;
            }
        }
        if self.detectors.len() != self.source.arms() {
            return Err(Error::Config(format!(
                "source feeds {} arm(s) but {} detector(s) given",
                self.source.arms(),
                self.detectors.len()
            )));
        }
        Ok(())
    }
}

/// Inverse-CDF sampler over a truncated pmf; the omitted tail is assigned to `n_max`.
#[derive(Debug, Clone)]
pub struct PhotonSampler {
    cdf: Vec<f64>,
}

impl PhotonSampler {
    pub fn new(dist: &PhotonDistribution) -> Result<Self> {
        if dist.tail_bound() > MAX_SAMPLING_TAIL {
            return Err(Error::TailTooLarge {
                tail: dist.tail_bound(),
                limit: MAX_SAMPLING_TAIL,
            });
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = dist
            .pmf()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cdf.last_mut().unwrap() = f64::INFINITY;
        Ok(PhotonSampler { cdf })
    }

    pub fn n_max(&self) -> usize {
        self.cdf.len() - 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c <= u) as u64
    }
}

/// Clicks of a multiplexed detector hit by `n_photons` photons.
pub fn sample_clicks<R: Rng + ?Sized>(n_photons: u64, config: &DetectorConfig, rng: &mut R) -> u32 {
    let mut lit = vec![false; config.n_elements() as usize];
    chop(n_photons, config, &mut lit, rng)
}

fn chop<R: Rng + ?Sized>(
    n_photons: u64,
    config: &DetectorConfig,
    lit: &mut [bool],
    rng: &mut R,
) -> u32 {
    let n_el = config.n_elements();
    let eta = config.efficiency();
    lit.iter_mut().for_each(|l| *l = false);
    let mut clicks = 0u32;
    for _ in 0..n_photons {
        if clicks == n_el {
            break;
        }
        if eta < 1.0 && !rng.gen_bool(eta) {
            continue;
        }
        let e = rng.gen_range(0..n_el) as usize;
        if !lit[e] {
            lit[e] = true;
            clicks += 1;
        }
    }
    clicks
}

fn detect<R: Rng + ?Sized>(
    n_photons: u64,
    detector: &Detector,
    lit: &mut [bool],
    rng: &mut R,
) -> u64 {
    match detector {
        Detector::Multiplexed(c) => chop(n_photons, c, lit, rng) as u64,
        Detector::Ideal(e) => {
            let eta = e.get();
            if eta == 1.0 {
                n_photons
            } else {
                (0..n_photons).filter(|_| rng.gen_bool(eta)).count() as u64
            }
        }
    }
}

/// Empirical click histogram; single-arm histograms have one column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalHistogram {
    counts: Vec<u64>,
    rows: usize,
    cols: usize,
    shots: u64,
    seed: u64,
}

/// Point estimate with a one-sigma statistical error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Distance from `target` in units of the standard error.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

impl EmpiricalHistogram {
    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_joint(&self) -> bool {
        self.cols > 1
    }

    /// `(rows, cols)`: arm-1 clicks by arm-2 clicks.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn count(&self, k1: usize, k2: usize) -> u64 {
        if k1 >= self.rows || k2 >= self.cols {
            0
        } else {
            self.counts[k1 * self.cols + k2]
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn frequency(&self, k1: usize, k2: usize) -> f64 {
        self.count(k1, k2) as f64 / self.shots as f64
    }

    /// Multinomial standard error of [`frequency`](Self::frequency).
    pub fn std_error(&self, k1: usize, k2: usize) -> f64 {
        let p = self.frequency(k1, k2);
        (p * (1.0 - p) / self.shots as f64).sqrt()
    }

    /// Histogram of one arm.
    pub fn marginal(&self, arm: usize) -> Vec<u64> {
        let len = if arm == 0 { self.rows } else { self.cols };
        let mut out = vec![0; len];
        for k1 in 0..self.rows {
            for k2 in 0..self.cols {
                out[if arm == 0 { k1 } else { k2 }] += self.counts[k1 * self.cols + k2];
            }
        }
        out
    }

    fn weighted(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let s = self.shots as f64;
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| ((i / self.cols) as f64, (i % self.cols) as f64, c as f64 / s))
    }

    /// Empirical mean of `f(k1, k2)` and its standard error.
    fn mean_of(&self, f: impl Fn(f64, f64) -> f64) -> Estimate {
        let (mut m, mut m2) = (0.0, 0.0);
        for (a, b, w) in self.weighted() {
            let v = f(a, b);
            m += w * v;
            m2 += w * v * v;
        }
        Estimate {
            value: m,
            std_error: ((m2 - m * m).max(0.0) / self.shots as f64).sqrt(),
        }
    }

    /// First-order error propagation for `g(E[z])` with `z = features(k1, k2)`.
    fn delta<const D: usize>(
        &self,
        features: impl Fn(f64, f64) -> [f64; D],
        value: impl Fn(&[f64; D]) -> f64,
        gradient: impl Fn(&[f64; D]) -> [f64; D],
    ) -> Estimate {
        let mut mean = [0.0; D];
        for (a, b, w) in self.weighted() {
            for (m, z) in mean.iter_mut().zip(features(a, b)) {
                *m += w * z;
            }
        }
        let grad = gradient(&mean);
        let mut var = 0.0;
        for (a, b, w) in self.weighted() {
            let z = features(a, b);
            let proj: f64 = (0..D).map(|i| grad[i] * (z[i] - mean[i])).sum();
            var += w * proj * proj;
        }
        Estimate {
            value: value(&mean),
            std_error: (var / self.shots as f64).sqrt(),
        }
    }

    pub fn mean_clicks(&self, arm: usize) -> Estimate {
        self.mean_of(|a, b| if arm == 0 { a } else { b })
    }

    pub fn variance_clicks(&self, arm: usize) -> Estimate {
        let pick = move |a: f64, b: f64| if arm == 0 { a } else { b };
        self.delta(
            |a, b| {
                let k = pick(a, b);
                [k, k * k]
            },
            |m| m[1] - m[0] * m[0],
            |m| [-2.0 * m[0], 1.0],
        )
    }

    /// Empirical `<k1 k2> / (<k1><k2>)`; `None` for single-arm data or a dark arm.
    pub fn g2(&self) -> Option<Estimate> {
        if !self.is_joint() {
            return None;
        }
        let est = self.delta(
            |a, b| [a, b, a * b],
            |m| m[2] / (m[0] * m[1]),
            |m| {
                let g = m[2] / (m[0] * m[1]);
                [-g / m[0], -g / m[1], 1.0 / (m[0] * m[1])]
            },
        );
        est.value.is_finite().then_some(est)
    }

    /// Empirical Fano factor `var(k1 - k2) / (<k1> + <k2>)`.
    pub fn fano(&self) -> Option<Estimate> {
        if !self.is_joint() {
            return None;
        }
        let est = self.delta(
            |a, b| [a, b, a - b, (a - b) * (a - b)],
            |m| (m[3] - m[2] * m[2]) / (m[0] + m[1]),
            |m| {
                let s = m[0] + m[1];
                let r = (m[3] - m[2] * m[2]) / s;
                [-r / s, -r / s, -2.0 * m[2] / s, 1.0 / s]
            },
        );
        est.value.is_finite().then_some(est)
    }

    /// Witnesses evaluated on the empirical distribution.
    pub fn metric_report(&self, detectors: &[Detector]) -> MetricReport {
        let m = self.mean_clicks(0).value;
        let v = self.variance_clicks(0).value;
        let mut report = MetricReport::single(&MomentSummary::exact(m, v + m * m), detectors[0]);
        if self.is_joint() {
            let flat = |e: Option<Estimate>, r| match e {
                Some(e) => Metric::Value(e.value),
                None => Metric::Undefined(r),
            };
            report.g2 = flat(self.g2(), crate::metrics::Undefined::ZeroMarginal);
            report.fano = flat(self.fano(), crate::metrics::Undefined::VacuumJoint);
        }
        report
    }

    fn merge(mut self, other: &EmpiricalHistogram) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.shots += other.shots;
        self
    }
}

fn substream(seed: u64, batch: u64, role: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch * 4 + role);
    rng
}

enum Photons {
    One(PhotonSampler),
    Correlated(PhotonSampler),
    Independent(PhotonSampler, PhotonSampler),
}

fn prepare(source: &Source) -> Result<Photons> {
    let trunc = Truncation::default();
    Ok(match *source {
        Source::Single(StateSpec::TwoModeSqueezed { zeta }) => {
            let joint = two_mode_squeezed_pmf(zeta, trunc)?;
            let dim = joint.n_max() + 1;
            let diag = (0..dim).map(|n| joint.get(n, n)).collect();
            let dist = PhotonDistribution::new(diag, joint.tail_bound())?;
            Photons::Correlated(PhotonSampler::new(&dist)?)
        }
        Source::Single(s) => Photons::One(PhotonSampler::new(&s.photon_distribution(trunc)?)?),
        Source::Independent(a, b) => Photons::Independent(
            PhotonSampler::new(&a.photon_distribution(trunc)?)?,
            PhotonSampler::new(&b.photon_distribution(trunc)?)?,
        ),
    })
}

/// Runs the configured number of shots and returns the click histogram.
pub fn run_experiment(config: &SamplerConfig) -> Result<EmpiricalHistogram> {
    config.validate()?;
    let photons = prepare(&config.source)?;
    let n_cap = match &photons {
        Photons::One(p) | Photons::Correlated(p) => p.n_max(),
        Photons::Independent(a, b) => a.n_max().max(b.n_max()),
    };
    let dims: Vec<usize> = config
        .detectors
        .iter()
        .map(|d| d.max_clicks(n_cap) + 1)
        .collect();
    let rows = dims[0];
    let cols = dims.get(1).copied().unwrap_or(1);
    let batches = config.shots.div_ceil(BATCH_SHOTS);

    let run_batch = |b: u64| {
        let shots = BATCH_SHOTS.min(config.shots - b * BATCH_SHOTS);
        let mut photon_rng = substream(config.seed, b, PHOTON_STREAM);
        let mut second_rng = substream(config.seed, b, PHOTON_STREAM_SECOND);
        let mut arm_rngs = ARM_STREAMS.map(|r| substream(config.seed, b, r));
        let mut scratch: Vec<Vec<bool>> = config
            .detectors
            .iter()
            .map(|d| vec![false; d.n_elements().unwrap_or(0) as usize])
            .collect();
        let mut counts = vec![0u64; rows * cols];
        for _ in 0..shots {
            let (n1, n2) = match &photons {
                Photons::One(p) => (p.sample(&mut photon_rng), 0),
                Photons::Correlated(p) => {
                    let n = p.sample(&mut photon_rng);
                    (n, n)
                }
                Photons::Independent(a, c) => {
                    (a.sample(&mut photon_rng), c.sample(&mut second_rng))
                }
            };
            let k1 = detect(n1, &config.detectors[0], &mut scratch[0], &mut arm_rngs[0]) as usize;
            let k2 = if cols > 1 {
                detect(n2, &config.detectors[1], &mut scratch[1], &mut arm_rngs[1]) as usize
            } else {
                0
            };
            counts[k1 * cols + k2] += 1;
        }
        EmpiricalHistogram {
            counts,
            rows,
            cols,
            shots,
            seed: config.seed,
        }
    };

    let parts: Vec<EmpiricalHistogram> = (0..batches).into_par_iter().map(run_batch).collect();
    let empty = EmpiricalHistogram {
        counts: vec![0; rows * cols],
        rows,
        cols,
        shots: 0,
        seed: config.seed,
    };
    Ok(parts.iter().fold(empty, |acc, h| acc.merge(h)))
}

/// Outcome of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of observed counts against model probabilities.
///
/// Bins expecting fewer than five events are pooled into one bin.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(Error::Config(
            "observed and expected bins differ in length".into(),
        ));
    }
    let shots: u64 = observed.iter().sum();
    let norm: f64 = expected.iter().sum();
    let total = shots as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p / norm * total;
        if e < 5.0 {
            pooled_obs += o as f64;
            pooled_exp += e;
        } else {
            bins.push((o as f64, e));
        }
    }
    if pooled_exp > 0.0 || pooled_obs > 0.0 {
        bins.push((pooled_obs, pooled_exp));
    }
    if bins.len() < 2 {
        return Ok(ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        });
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(o, e)| {
            if e > 0.0 {
                (o - e).powi(2) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| Error::Config(e.to_string()))?
        .sf(statistic);
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
    })
}
