use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use clickstats::counts::state_counts;
use clickstats::kernel::{build_kernel, Detector, DetectorConfig};
use clickstats::sampler::{chi_square_gof, run_experiment, sample_clicks, SamplerConfig, Source};
use clickstats::states::{StateSpec, Truncation};

const ALPHA: f64 = 1e-3;

fn single(state: StateSpec, detector: Detector, shots: u64, seed: u64) -> SamplerConfig {
    SamplerConfig {
        seed,
        shots,
        source: Source::Single(state),
        detectors: vec![detector],
    }
}

#[test]
fn chopping_fixed_photon_numbers_reproduces_kernel_columns() {
    let cfg = DetectorConfig::new(5, 0.6).unwrap();
    let kernel = build_kernel(cfg, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [0u64, 1, 3, 7, 12] {
        let mut hist = vec![0u64; 6];
        for _ in 0..50_000 {
            hist[sample_clicks(n, &cfg, &mut rng) as usize] += 1;
        }
        let test = chi_square_gof(&hist, kernel.column(n as usize)).unwrap();
        assert!(test.p_value > ALPHA, "n = {n}: {test:?}");
    }
}

#[test]
fn result_does_not_depend_on_thread_count() {
    let config = single(
        StateSpec::Thermal { mean: 2.0 },
        Detector::multiplexed(6, 0.8).unwrap(),
        70_001,
        5,
    );
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_experiment(&config).unwrap());
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| run_experiment(&config).unwrap());
    assert_eq!(serial.counts(), parallel.counts());
    assert_eq!(serial.shots(), 70_001);
}

#[test]
fn ideal_detector_sees_lossy_photon_statistics() {
    let state = StateSpec::Coherent { mean: 3.0 };
    let det = Detector::ideal(0.4).unwrap();
    let hist = run_experiment(&single(state, det, 100_000, 3)).unwrap();
    let window = Truncation::Fixed(hist.shape().0 - 1);
    let expected = state_counts(&state, det, window).unwrap();
    let test = chi_square_gof(hist.counts(), expected.pmf()).unwrap();
    assert!(test.p_value > ALPHA, "{test:?}");
    let mean = hist.mean_clicks(0);
    assert!(mean.sigmas_from(1.2).abs() < 5.0);
}

#[test]
fn independent_beams_are_uncorrelated() {
    let d = Detector::multiplexed(4, 0.9).unwrap();
    let state = StateSpec::Thermal { mean: 1.0 };
    let config = SamplerConfig {
        seed: 9,
        shots: 100_000,
        source: Source::Independent(state, state),
        detectors: vec![d, d],
    };
    let hist = run_experiment(&config).unwrap();
    let g2 = hist.g2().unwrap();
    assert!(g2.sigmas_from(1.0).abs() < 5.0, "{g2:?}");
    // var(k1 - k2) = 2 var(k) for independent identical arms
    let var_k = state_counts(&state, d, Truncation::Tail(1e-14))
        .unwrap()
        .moments();
    let r = 2.0 * var_k.variance / (2.0 * var_k.mean);
    let fano = hist.fano().unwrap();
    assert!(fano.sigmas_from(r).abs() < 5.0, "{fano:?} vs {r}");
}

#[test]
fn mismatched_configuration_is_rejected() {
    let d = Detector::multiplexed(2, 1.0).unwrap();
    let bad = SamplerConfig {
        seed: 0,
        shots: 10,
        source: Source::Single(StateSpec::TwoModeSqueezed { zeta: 0.5 }),
        detectors: vec![d],
    };
    assert!(run_experiment(&bad).is_err());
    assert!(run_experiment(&single(StateSpec::Coherent { mean: 1.0 }, d, 0, 0)).is_err());
}
