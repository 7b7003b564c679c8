//! Command-line front end: every computation as a table of CSV or JSON rows.
//!
//! Sweep grids are evaluated in parallel; rows are always emitted in grid
//! order: detector settings outermost (elements, then efficiency), then
//! modes, then the state parameter (`--mean` or `--zeta`).

pub mod grid;
pub mod table;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::counts::{closed_moments, joint_counts_pmf, series_moments, state_counts};
use crate::error::Error;
use crate::kernel::{kernel_for, Detector, Efficiency};
use crate::metrics::{Metric, MetricReport, Undefined};
use crate::sampler::{run_experiment, SamplerConfig, Source};
use crate::states::{two_mode_squeezed_pmf, StateSpec, Truncation, DEFAULT_TAIL};

pub use table::{Cell, Table};

/// Environment variable naming the directory for relative `--output` paths.
pub const OUTPUT_DIR_ENV: &str = "CLICKSTATS_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "clickstats",
    version,
    about = "Click statistics of multiplexed on-off detectors"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; relative paths resolve against $CLICKSTATS_OUTPUT_DIR when set.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Certified photon-number tail mass used to truncate input states.
    #[arg(long, global = true, allow_hyphen_values = true, default_value_t = DEFAULT_TAIL)]
    pub tail: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional click probabilities p(k|n) as a matrix (rows k, columns n).
    Kernel(KernelArgs),
    /// Click-count distribution for each grid point.
    Counts(SweepArgs),
    /// Count moments from the series, the closed forms, or both.
    Moments(MomentsArgs),
    /// Mandel Q of photons and counts, and the subbinomial Q_B.
    Metrics(SweepArgs),
    /// Two-mode squeezed light on a pair of detectors: Fano factor and g2, or the joint pmf.
    Squeezed(SqueezedArgs),
    /// Monte Carlo photon chopping.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub n_elements: Option<u32>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long)]
    pub n_max: usize,
    /// Photon-number-resolving limit (N -> infinity).
    #[arg(long)]
    pub ideal_detector: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Coherent,
    Thermal,
    Multimode,
    Tmsv,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            StateKind::Coherent => "coherent",
            StateKind::Thermal => "thermal",
            StateKind::Multimode => "multimode",
            StateKind::Tmsv => "tmsv",
        }
    }

    fn of(state: &StateSpec) -> Self {
        match state {
            StateSpec::Coherent { .. } => StateKind::Coherent,
            StateSpec::Thermal { .. } => StateKind::Thermal,
            StateSpec::MultimodeThermal { .. } => StateKind::Multimode,
            StateSpec::TwoModeSqueezed { .. } => StateKind::Tmsv,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    #[arg(long, value_enum)]
    pub state: StateKind,
    /// Mean photon number: value, list, or start:stop:points[:log].
    #[arg(long, allow_hyphen_values = true)]
    pub mean: Option<String>,
    /// Number of thermal modes (multimode only): list, items may be a..b.
    #[arg(long)]
    pub modes: Option<String>,
    /// Squeezing parameter (tmsv only): value, list, or start:stop:points[:log].
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    /// Number of elements: list, items may be a..b.
    #[arg(long, allow_hyphen_values = true)]
    pub n_elements: Option<String>,
    /// Quantum efficiency: value, list, or range.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub eta: String,
    /// Photon-number-resolving limit (N -> infinity).
    #[arg(long)]
    pub ideal_detector: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    Series,
    Closed,
    Both,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, value_enum, default_value_t = Oracle::Series)]
    pub oracle: Oracle,
}

#[derive(Debug, Args)]
pub struct SqueezedArgs {
    /// Squeezing parameter: value, list, or start:stop:points[:log].
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: String,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Efficiency of the second arm (defaults to --eta).
    #[arg(long, allow_hyphen_values = true)]
    pub eta2: Option<f64>,
    /// Emit the joint click distribution instead of metric rows.
    #[arg(long)]
    pub joint: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Histogram,
    Metrics,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub n_elements: Option<u32>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub eta2: Option<f64>,
    #[arg(long)]
    pub ideal_detector: bool,
    /// Feed two independent copies of the state to two detectors.
    #[arg(long)]
    pub independent: bool,
    #[arg(long)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Report::Histogram)]
    pub report: Report,
}

/// Validation or evaluation failure, tagged with the offending flag when known.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub flag: Option<&'static str>,
    pub message: String,
}

impl CliError {
    fn flag(flag: &'static str, message: impl fmt::Display) -> Self {
        CliError {
            flag: Some(flag),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.flag {
            Some(flag) => write!(f, "{flag}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let flag = match e {
            Error::NoElements => Some("--n-elements"),
            Error::EfficiencyOutOfRange(_) => Some("--eta"),
            Error::InvalidMean(_) => Some("--mean"),
            Error::NoModes => Some("--modes"),
            Error::SqueezingOutOfRange(_) => Some("--zeta"),
            Error::InvalidTolerance(_) => Some("--tail"),
            Error::NoShots => Some("--shots"),
            _ => None,
        };
        CliError {
            flag,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn reals(flag: &'static str, text: &str) -> CliResult<Vec<f64>> {
    grid::parse_reals(text).map_err(|m| CliError::flag(flag, m))
}

fn ints(flag: &'static str, text: &str) -> CliResult<Vec<u32>> {
    grid::parse_ints(text).map_err(|m| CliError::flag(flag, m))
}

fn require<'a>(flag: &'static str, v: &'a Option<String>, why: &str) -> CliResult<&'a str> {
    v.as_deref()
        .ok_or_else(|| CliError::flag(flag, format!("required {why}")))
}

/// Expands the state flags into the list of states, modes outer.
pub fn states_from(args: &StateArgs) -> CliResult<Vec<StateSpec>> {
    let states = match args.state {
        StateKind::Tmsv => {
            let z = require("--zeta", &args.zeta, "for --state tmsv")?;
            reals("--zeta", z)?
                .into_iter()
                .map(|zeta| StateSpec::TwoModeSqueezed { zeta })
                .collect::<Vec<_>>()
        }
        kind => {
            let means = reals("--mean", require("--mean", &args.mean, "for this state")?)?;
            match kind {
                StateKind::Coherent => means
                    .iter()
                    .map(|&mean| StateSpec::Coherent { mean })
                    .collect(),
                StateKind::Thermal => means
                    .iter()
                    .map(|&mean| StateSpec::Thermal { mean })
                    .collect(),
                _ => {
                    let modes = ints(
                        "--modes",
                        require("--modes", &args.modes, "for --state multimode")?,
                    )?;
                    modes
                        .iter()
                        .flat_map(|&modes| {
                            means
                                .iter()
                                .map(move |&mean| StateSpec::MultimodeThermal { mean, modes })
                        })
                        .collect()
                }
            }
        }
    };
    for s in &states {
        s.validate()?;
    }
    Ok(states)
}

fn efficiency(flag: &'static str, eta: f64) -> CliResult<f64> {
    Efficiency::new(eta)
        .map(Efficiency::get)
        .map_err(|e| CliError::flag(flag, e))
}

/// Expands the detector flags, elements outer.
pub fn detectors_from(args: &DetectorArgs) -> CliResult<Vec<Detector>> {
    let etas = reals("--eta", &args.eta)?
        .into_iter()
        .map(|e| efficiency("--eta", e))
        .collect::<CliResult<Vec<_>>>()?;
    match (&args.n_elements, args.ideal_detector) {
        (Some(_), true) => Err(CliError::flag(
            "--ideal-detector",
            "cannot be combined with --n-elements",
        )),
        (None, false) => Err(CliError::flag(
            "--n-elements",
            "required unless --ideal-detector is given",
        )),
        (None, true) => Ok(etas
            .iter()
            .map(|&e| Detector::ideal(e))
            .collect::<Result<_, _>>()?),
        (Some(text), false) => {
            let ns = ints("--n-elements", text)?;
            let mut out = Vec::new();
            for n in ns {
                for &e in &etas {
                    out.push(
                        Detector::multiplexed(n, e)
                            .map_err(|e| CliError::flag("--n-elements", e))?,
                    );
                }
            }
            Ok(out)
        }
    }
}

fn truncation(tail: f64) -> CliResult<Truncation> {
    if tail > 0.0 && tail < 1.0 {
        Ok(Truncation::Tail(tail))
    } else {
        Err(CliError::flag("--tail", Error::InvalidTolerance(tail)))
    }
}

fn state_columns(kind: StateKind) -> Vec<&'static str> {
    match kind {
        StateKind::Coherent | StateKind::Thermal => vec!["state", "mean"],
        StateKind::Multimode => vec!["state", "mean", "modes"],
        StateKind::Tmsv => vec!["state", "zeta"],
    }
}

fn state_cells(state: &StateSpec) -> Vec<Cell> {
    let kind = StateKind::of(state).name().into();
    match *state {
        StateSpec::Coherent { mean } | StateSpec::Thermal { mean } => vec![kind, mean.into()],
        StateSpec::MultimodeThermal { mean, modes } => vec![kind, mean.into(), modes.into()],
        StateSpec::TwoModeSqueezed { zeta } => vec![kind, zeta.into()],
    }
}

fn elements_cell(detector: &Detector) -> Cell {
    match detector.n_elements() {
        Some(n) => n.into(),
        None => "inf".into(),
    }
}

fn detector_cells(detector: &Detector) -> Vec<Cell> {
    vec![elements_cell(detector), detector.efficiency().into()]
}

fn header(kind: StateKind, tail: &[&str]) -> Vec<String> {
    state_columns(kind)
        .into_iter()
        .chain(["n_elements", "eta"])
        .chain(tail.iter().copied())
        .map(String::from)
        .collect()
}

fn grid_points(states: &[StateSpec], detectors: &[Detector]) -> Vec<(StateSpec, Detector)> {
    detectors
        .iter()
        .flat_map(|d| states.iter().map(move |s| (*s, *d)))
        .collect()
}

fn evaluate<F>(table: &mut Table, points: &[(StateSpec, Detector)], f: F) -> CliResult<()>
where
    F: Fn(&StateSpec, &Detector) -> CliResult<Vec<Vec<Cell>>> + Sync,
{
    let blocks: Vec<Vec<Vec<Cell>>> = points
        .par_iter()
        .map(|(s, d)| {
            let prefix: Vec<Cell> = state_cells(s)
                .into_iter()
                .chain(detector_cells(d))
                .collect();
            f(s, d).map(|rows| {
                rows.into_iter()
                    .map(|r| prefix.iter().cloned().chain(r).collect())
                    .collect()
            })
        })
        .collect::<CliResult<_>>()?;
    for block in blocks {
        for row in block {
            table.push(row);
        }
    }
    Ok(())
}

/// `ClickKernel` as a matrix: columns `n_elements, eta, k, n_0 .. n_{n_max}`.
pub fn kernel_table(detector: Detector, n_max: usize) -> crate::Result<Table> {
    let kernel = kernel_for(detector, n_max)?;
    let mut t = Table::new(
        ["n_elements", "eta", "k"]
            .into_iter()
            .map(String::from)
            .chain((0..=n_max).map(|n| format!("n_{n}"))),
    );
    for k in 0..=kernel.max_clicks() {
        let mut row = detector_cells(&detector);
        row.push(k.into());
        row.extend((0..=n_max).map(|n| Cell::Float(kernel.prob(k, n))));
        t.push(row);
    }
    Ok(t)
}

fn stamp(kind: StateKind, states: &[StateSpec]) -> CliResult<()> {
    if states.is_empty() {
        return Err(CliError::flag("--state", "empty parameter grid"));
    }
    debug_assert!(states.iter().all(|s| StateKind::of(s) == kind));
    Ok(())
}

/// Click-count pmf rows: `..., k, probability, residual`.
pub fn counts_table(
    states: &[StateSpec],
    detectors: &[Detector],
    trunc: Truncation,
) -> CliResult<Table> {
    let kind = StateKind::of(&states[0]);
    stamp(kind, states)?;
    let mut t = Table::new(header(kind, &["k", "probability", "residual"]));
    evaluate(&mut t, &grid_points(states, detectors), |s, d| {
        let c = state_counts(s, *d, trunc)?;
        Ok(c.pmf()
            .iter()
            .enumerate()
            .map(|(k, p)| vec![k.into(), (*p).into(), c.residual().into()])
            .collect())
    })?;
    Ok(t)
}

/// Count moments for each grid point.
pub fn moments_table(
    states: &[StateSpec],
    detectors: &[Detector],
    trunc: Truncation,
    oracle: Oracle,
) -> CliResult<Table> {
    let kind = StateKind::of(&states[0]);
    stamp(kind, states)?;
    let cols: &[&str] = match oracle {
        Oracle::Series => &[
            "mean_k",
            "second_moment_k",
            "variance_k",
            "mean_error",
            "second_moment_error",
        ],
        Oracle::Closed => &["mean_k", "second_moment_k", "variance_k"],
        Oracle::Both => &[
            "mean_k",
            "second_moment_k",
            "variance_k",
            "mean_error",
            "second_moment_error",
            "closed_mean_k",
            "closed_second_moment_k",
            "closed_variance_k",
            "discrepancy",
        ],
    };
    let mut t = Table::new(header(kind, cols));
    evaluate(&mut t, &grid_points(states, detectors), |s, d| {
        let closed = || -> CliResult<_> {
            match d {
                Detector::Multiplexed(cfg) => Ok(closed_moments(s, cfg)?),
                Detector::Ideal(_) => Err(CliError::flag(
                    "--oracle",
                    "closed forms need a finite number of elements",
                )),
            }
        };
        let row: Vec<Cell> = match oracle {
            Oracle::Series => {
                let m = series_moments(s, *d, trunc)?;
                vec![
                    m.mean.into(),
                    m.second_moment.into(),
                    m.variance.into(),
                    m.mean_error.into(),
                    m.second_moment_error.into(),
                ]
            }
            Oracle::Closed => {
                let m = closed()?;
                vec![m.mean.into(), m.second_moment.into(), m.variance.into()]
            }
            Oracle::Both => {
                let m = series_moments(s, *d, trunc)?;
                let c = closed()?;
                let gap = (m.mean - c.mean)
                    .abs()
                    .max((m.second_moment - c.second_moment).abs());
                vec![
                    m.mean.into(),
                    m.second_moment.into(),
                    m.variance.into(),
                    m.mean_error.into(),
                    m.second_moment_error.into(),
                    c.mean.into(),
                    c.second_moment.into(),
                    c.variance.into(),
                    gap.into(),
                ]
            }
        };
        Ok(vec![row])
    })?;
    Ok(t)
}

/// Photon-level Mandel Q next to count-level Q_F and Q_B.
pub fn metrics_table(
    states: &[StateSpec],
    detectors: &[Detector],
    trunc: Truncation,
) -> CliResult<Table> {
    let kind = StateKind::of(&states[0]);
    stamp(kind, states)?;
    let mut t = Table::new(header(
        kind,
        &[
            "mean_n",
            "variance_n",
            "q_mandel",
            "mean_k",
            "variance_k",
            "q_fano",
            "q_binomial",
            "residual",
        ],
    ));
    evaluate(&mut t, &grid_points(states, detectors), |s, d| {
        let photons = s.photon_distribution(trunc)?;
        let kernel = kernel_for(*d, photons.n_max())?;
        let counts = crate::counts::counts_pmf(&photons, &kernel)?;
        let m = counts.moments();
        let report = MetricReport::single(&m, *d);
        let (mean_n, var_n) = (photons.mean(), photons.variance());
        Ok(vec![vec![
            mean_n.into(),
            var_n.into(),
            crate::metrics::mandel_q(mean_n, var_n).into(),
            m.mean.into(),
            m.variance.into(),
            report.q_mandel.into(),
            report.q_binomial.into(),
            counts.residual().into(),
        ]])
    })?;
    Ok(t)
}

fn second_arm(detector: &Detector, eta2: Option<f64>) -> CliResult<Detector> {
    let Some(eta2) = eta2 else {
        return Ok(*detector);
    };
    let eta2 = efficiency("--eta2", eta2)?;
    Ok(match detector {
        Detector::Multiplexed(c) => Detector::Multiplexed(c.with_efficiency(eta2)?),
        Detector::Ideal(_) => Detector::ideal(eta2)?,
    })
}

/// Two-mode squeezed light on two detectors.
///
/// Metric rows: `state, zeta, n_elements, eta, eta2, mean_k1, mean_k2, fano, g2, g2_photons, residual`.
/// Joint rows (`joint = true`): `state, zeta, n_elements, eta, eta2, k1, k2, probability, residual`.
pub fn squeezed_table(
    zetas: &[f64],
    detectors: &[Detector],
    eta2: Option<f64>,
    joint: bool,
    trunc: Truncation,
) -> CliResult<Table> {
    let states: Vec<StateSpec> = zetas
        .iter()
        .map(|&zeta| StateSpec::TwoModeSqueezed { zeta })
        .collect();
    for s in &states {
        s.validate()?;
    }
    let tail: &[&str] = if joint {
        &["eta2", "k1", "k2", "probability", "residual"]
    } else {
        &[
            "eta2",
            "mean_k1",
            "mean_k2",
            "fano",
            "g2",
            "g2_photons",
            "residual",
        ]
    };
    let mut t = Table::new(header(StateKind::Tmsv, tail));
    let seconds = detectors
        .iter()
        .map(|d| second_arm(d, eta2))
        .collect::<CliResult<Vec<_>>>()?;
    let points = grid_points(&states, detectors);
    evaluate(&mut t, &points, |s, d| {
        let StateSpec::TwoModeSqueezed { zeta } = *s else {
            unreachable!()
        };
        let idx = detectors.iter().position(|x| x == d).unwrap();
        let d2 = seconds[idx];
        let photons = two_mode_squeezed_pmf(zeta, trunc)?;
        let k1 = kernel_for(*d, photons.n_max())?;
        let k2 = kernel_for(d2, photons.n_max())?;
        let c = joint_counts_pmf(&photons, &k1, &k2)?;
        let eta2_cell: Cell = d2.efficiency().into();
        if joint {
            let (rows, cols) = c.shape();
            Ok((0..rows)
                .flat_map(|a| (0..cols).map(move |b| (a, b)))
                .map(|(a, b)| {
                    vec![
                        eta2_cell.clone(),
                        a.into(),
                        b.into(),
                        c.get(a, b).into(),
                        c.residual().into(),
                    ]
                })
                .collect())
        } else {
            let m = c.moments();
            let s2 = zeta * zeta;
            let g2_photons = if s2 > 0.0 {
                Metric::Value(1.0 + 1.0 / s2)
            } else {
                Metric::Undefined(Undefined::ZeroMarginal)
            };
            Ok(vec![vec![
                eta2_cell,
                m.mean1.into(),
                m.mean2.into(),
                crate::metrics::fano_factor(&c).into(),
                crate::metrics::g2(&c).into(),
                g2_photons.into(),
                c.residual().into(),
            ]])
        }
    })?;
    Ok(t)
}

/// Builds the sampler configuration for the `sample` subcommand.
pub fn sampler_config(args: &SampleArgs) -> CliResult<SamplerConfig> {
    let states = states_from(&args.state)?;
    let [state] = states.as_slice() else {
        return Err(CliError::flag(
            "--state",
            "sampling takes a single parameter point",
        ));
    };
    if args.shots == 0 {
        return Err(CliError::flag("--shots", Error::NoShots));
    }
    let eta = efficiency("--eta", args.eta)?;
    let first = match (args.n_elements, args.ideal_detector) {
        (Some(_), true) => {
            return Err(CliError::flag(
                "--ideal-detector",
                "cannot be combined with --n-elements",
            ))
        }
        (None, false) => {
            return Err(CliError::flag(
                "--n-elements",
                "required unless --ideal-detector is given",
            ))
        }
        (None, true) => Detector::ideal(eta)?,
        (Some(n), false) => {
            Detector::multiplexed(n, eta).map_err(|e| CliError::flag("--n-elements", e))?
        }
    };
    let source = if args.independent {
        if state.is_two_mode() {
            return Err(CliError::flag(
                "--independent",
                "not meaningful for --state tmsv",
            ));
        }
        Source::Independent(*state, *state)
    } else {
        Source::Single(*state)
    };
    let detectors = if source.arms() == 2 {
        vec![first, second_arm(&first, args.eta2)?]
    } else {
        vec![first]
    };
    Ok(SamplerConfig {
        seed: args.seed,
        shots: args.shots,
        source,
        detectors,
    })
}

/// Histogram or empirical-metric rows from a sampler run.
pub fn sample_table(config: &SamplerConfig, report: Report) -> CliResult<Table> {
    let hist = run_experiment(config)?;
    let state = match config.source {
        Source::Single(s) | Source::Independent(s, _) => s,
    };
    let kind = StateKind::of(&state);
    let two = hist.is_joint();
    let mut prefix = state_cells(&state);
    prefix.extend(detector_cells(&config.detectors[0]));
    let mut t;
    match report {
        Report::Histogram => {
            let cols: &[&str] = if two {
                &[
                    "k1",
                    "k2",
                    "probability",
                    "std_error",
                    "count",
                    "shots",
                    "seed",
                ]
            } else {
                &["k", "probability", "std_error", "count", "shots", "seed"]
            };
            t = Table::new(header(kind, cols));
            let (rows, ncols) = hist.shape();
            for a in 0..rows {
                for b in 0..ncols {
                    let mut row = prefix.clone();
                    row.push(a.into());
                    if two {
                        row.push(b.into());
                    }
                    row.extend([
                        hist.frequency(a, b).into(),
                        hist.std_error(a, b).into(),
                        hist.count(a, b).into(),
                        hist.shots().into(),
                        hist.seed().into(),
                    ]);
                    t.push(row);
                }
            }
        }
        Report::Metrics => {
            t = Table::new(header(
                kind,
                &[
                    "shots",
                    "seed",
                    "mean_k",
                    "mean_k_std_error",
                    "variance_k",
                    "variance_k_std_error",
                    "g2",
                    "g2_std_error",
                    "fano",
                    "fano_std_error",
                ],
            ));
            let mean = hist.mean_clicks(0);
            let var = hist.variance_clicks(0);
            let pair = |e: Option<crate::sampler::Estimate>, r: Undefined| match e {
                Some(e) => (Cell::Float(e.value), Cell::Float(e.std_error)),
                None => (
                    Cell::Metric(Metric::Undefined(r)),
                    Cell::Metric(Metric::Undefined(r)),
                ),
            };
            let reason = if two {
                Undefined::ZeroMarginal
            } else {
                Undefined::NoElementCount
            };
            let (g, gs) = pair(hist.g2(), reason);
            let (f, fs) = pair(
                hist.fano(),
                if two { Undefined::VacuumJoint } else { reason },
            );
            let mut row = prefix;
            row.extend([
                hist.shots().into(),
                hist.seed().into(),
                mean.value.into(),
                mean.std_error.into(),
                var.value.into(),
                var.std_error.into(),
                g,
                gs,
                f,
                fs,
            ]);
            t.push(row);
        }
    }
    Ok(t)
}

/// Name of the subcommand, used in JSON output.
pub fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Kernel(_) => "kernel",
        Command::Counts(_) => "counts",
        Command::Moments(_) => "moments",
        Command::Metrics(_) => "metrics",
        Command::Squeezed(_) => "squeezed",
        Command::Sample(_) => "sample",
    }
}

/// Evaluates a parsed command line into its result table.
pub fn build_table(cli: &Cli) -> CliResult<Table> {
    let trunc = truncation(cli.tail)?;
    match &cli.command {
        Command::Kernel(a) => {
            let eta = efficiency("--eta", a.eta)?;
            let det = match (a.n_elements, a.ideal_detector) {
                (Some(_), true) => {
                    return Err(CliError::flag(
                        "--ideal-detector",
                        "cannot be combined with --n-elements",
                    ))
                }
                (None, false) => {
                    return Err(CliError::flag(
                        "--n-elements",
                        "required unless --ideal-detector is given",
                    ))
                }
                (None, true) => Detector::ideal(eta)?,
                (Some(n), false) => {
                    Detector::multiplexed(n, eta).map_err(|e| CliError::flag("--n-elements", e))?
                }
            };
            kernel_table(det, a.n_max).map_err(|e| match e {
                Error::KernelTooLarge { .. } => CliError::flag("--n-max", e),
                e => e.into(),
            })
        }
        Command::Counts(a) => counts_table(
            &states_from(&a.state)?,
            &detectors_from(&a.detector)?,
            trunc,
        ),
        Command::Moments(a) => moments_table(
            &states_from(&a.sweep.state)?,
            &detectors_from(&a.sweep.detector)?,
            trunc,
            a.oracle,
        ),
        Command::Metrics(a) => metrics_table(
            &states_from(&a.state)?,
            &detectors_from(&a.detector)?,
            trunc,
        ),
        Command::Squeezed(a) => squeezed_table(
            &reals("--zeta", &a.zeta)?,
            &detectors_from(&a.detector)?,
            a.eta2,
            a.joint,
            trunc,
        ),
        Command::Sample(a) => sample_table(&sampler_config(a)?, a.report),
    }
}

/// Renders a table in the requested format.
pub fn render(table: &Table, format: Format, command: &str) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => table
            .write_csv(&mut buf)
            .map_err(|e| CliError::flag("--output", e))?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &table.to_json(command))
                .map_err(|e| CliError::flag("--output", e))?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

/// Where `--output` goes, after applying [`OUTPUT_DIR_ENV`].
pub fn resolve_output(path: &std::path::Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Runs a parsed command line. Output is produced only after every grid
/// point evaluated successfully.
pub fn run<W: Write>(cli: &Cli, stdout: &mut W) -> CliResult<()> {
    let table = build_table(cli)?;
    let bytes = render(&table, cli.format, command_name(&cli.command))?;
    match &cli.output {
        Some(path) => {
            let path = resolve_output(path);
            std::fs::write(&path, bytes)
                .map_err(|e| CliError::flag("--output", format!("{}: {e}", path.display())))
        }
        None => stdout
            .write_all(&bytes)
            .map_err(|e| CliError::flag("--output", e)),
    }
}
