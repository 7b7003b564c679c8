//! Click statistics of laser light: the count distribution, its moments
//! from the series and from the closed forms, and the resulting witnesses.
//!
//!     cargo run --example coherent_counts -- 3.0 4

use clickstats::counts::{coherent_moments_closed, state_counts};
use clickstats::kernel::Detector;
use clickstats::metrics::MetricReport;
use clickstats::states::{StateSpec, Truncation};

fn main() -> clickstats::Result<()> {
    let mut args = std::env::args().skip(1);
    let mean: f64 = args.next().map_or(3.0, |s| s.parse().expect("mean"));
    let n: u32 = args.next().map_or(4, |s| s.parse().expect("N"));

    let state = StateSpec::Coherent { mean };
    let detector = Detector::multiplexed(n, 1.0)?;
    let counts = state_counts(&state, detector, Truncation::Tail(1e-15))?;
    for (k, p) in counts.pmf().iter().enumerate() {
        println!("c_{k} = {p:.12}");
    }

    let series = counts.moments();
    let closed = coherent_moments_closed(mean, n)?;
    println!(
        "<k>   series {:.15}  closed {:.15}",
        series.mean, closed.mean
    );
    println!(
        "<k^2> series {:.15}  closed {:.15}",
        series.second_moment, closed.second_moment
    );

    let report = MetricReport::from_counts(&counts);
    println!("Q_F = {}  (photons: Q_M = 0)", report.q_mandel);
    println!("Q_B = {}", report.q_binomial);
    println!("e^(-mean/N) - 1 = {:.16e}", (-mean / n as f64).exp() - 1.0);
    Ok(())
}
