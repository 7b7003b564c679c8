//! Count moments of M-mode thermal light by three routes: the finite sum
//! for M = 1, the Taylor-jet derivative path for general M, and brute-force
//! summation of the truncated series.
//!
//!     cargo run --example thermal_moments -- 2.0 8

use clickstats::counts::{
    multimode_thermal_moments, series_moments, two_mode_thermal_moments_closed,
};
use clickstats::kernel::Detector;
use clickstats::states::{StateSpec, Truncation};

fn main() -> clickstats::Result<()> {
    let mut args = std::env::args().skip(1);
    let mean: f64 = args.next().map_or(2.0, |s| s.parse().expect("mean"));
    let n: u32 = args.next().map_or(8, |s| s.parse().expect("N"));
    let detector = Detector::multiplexed(n, 1.0)?;

    println!(
        "{:>2} {:>20} {:>20} {:>12}",
        "M", "<k> (jets)", "<k^2> (jets)", "|jets-series|"
    );
    for modes in 1..=8 {
        let jets = multimode_thermal_moments(mean, modes, n)?;
        let state = StateSpec::MultimodeThermal { mean, modes };
        let series = series_moments(&state, detector, Truncation::Tail(1e-16))?;
        let gap = (jets.mean - series.mean)
            .abs()
            .max((jets.second_moment - series.second_moment).abs());
        println!(
            "{modes:>2} {:>20.15} {:>20.15} {gap:>12.2e}",
            jets.mean, jets.second_moment
        );
    }

    let two = two_mode_thermal_moments_closed(mean, n)?;
    println!(
        "M = 2 closed form: <k> = {:.15}, <k^2> = {:.15}",
        two.mean, two.second_moment
    );
    Ok(())
}
