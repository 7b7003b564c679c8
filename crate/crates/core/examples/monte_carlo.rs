//! Seeded photon-chopping simulation compared against the analytic pipeline
//! with a chi-square goodness-of-fit test.
//!
//!     cargo run --release --example monte_carlo -- 100000 7

use clickstats::counts::{joint_counts_pmf, state_counts};
use clickstats::kernel::{build_kernel, Detector, DetectorConfig};
use clickstats::metrics::g2;
use clickstats::sampler::{chi_square_gof, run_experiment, SamplerConfig, Source};
use clickstats::states::{two_mode_squeezed_pmf, StateSpec, Truncation};

fn main() -> clickstats::Result<()> {
    let mut args = std::env::args().skip(1);
    let shots: u64 = args.next().map_or(100_000, |s| s.parse().expect("shots"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let detector = Detector::multiplexed(4, 0.7)?;

    for state in [
        StateSpec::Coherent { mean: 2.0 },
        StateSpec::Thermal { mean: 1.5 },
        StateSpec::MultimodeThermal {
            mean: 3.0,
            modes: 3,
        },
    ] {
        let config = SamplerConfig {
            seed,
            shots,
            source: Source::Single(state),
            detectors: vec![detector],
        };
        let hist = run_experiment(&config)?;
        let expected = state_counts(&state, detector, Truncation::Tail(1e-14))?;
        let expected: Vec<f64> = expected.pmf().iter().map(|p| p * shots as f64).collect();
        let test = chi_square_gof(hist.counts(), &expected)?;
        println!(
            "{state:?}: chi2 = {:.2} on {} dof, p = {:.3}",
            test.statistic, test.dof, test.p_value
        );
    }

    let zeta = 0.8;
    let config = SamplerConfig {
        seed,
        shots,
        source: Source::Single(StateSpec::TwoModeSqueezed { zeta }),
        detectors: vec![detector, detector],
    };
    let hist = run_experiment(&config)?;
    let photons = two_mode_squeezed_pmf(zeta, Truncation::Tail(1e-14))?;
    let Detector::Multiplexed(cfg) = detector else {
        unreachable!()
    };
    let k = build_kernel(
        DetectorConfig::new(cfg.n_elements(), cfg.efficiency())?,
        photons.n_max(),
    )?;
    let analytic = g2(&joint_counts_pmf(&photons, &k, &k)?).unwrap();
    let est = hist.g2().expect("both arms click");
    println!(
        "TMSV zeta = {zeta}: empirical g2 = {:.4} +- {:.4}, analytic {analytic:.4} ({:.2} sigma)",
        est.value,
        est.std_error,
        est.sigmas_from(analytic)
    );
    Ok(())
}
