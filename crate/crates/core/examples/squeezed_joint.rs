//! Joint click statistics of two-mode squeezed vacuum on a pair of
//! multiplexed detectors, with the Fano factor and g2 as N grows.
//!
//!     cargo run --example squeezed_joint -- 0.8 0.5

use clickstats::counts::joint_counts_pmf;
use clickstats::kernel::{build_kernel, ideal_kernel, DetectorConfig};
use clickstats::metrics::{fano_factor, g2};
use clickstats::states::{two_mode_squeezed_pmf, Truncation};

fn main() -> clickstats::Result<()> {
    let mut args = std::env::args().skip(1);
    let zeta: f64 = args.next().map_or(0.8, |s| s.parse().expect("zeta"));
    let eta: f64 = args.next().map_or(1.0, |s| s.parse().expect("eta"));

    let photons = two_mode_squeezed_pmf(zeta, Truncation::Tail(1e-14))?;
    let n_max = photons.n_max();

    let ideal = ideal_kernel(eta, n_max)?;
    let c = joint_counts_pmf(&photons, &ideal, &ideal)?;
    println!("ideal detectors: R = {}, g2 = {}", fano_factor(&c), g2(&c));
    println!(
        "expected:        R = {:.6}, g2 = {:.6}",
        1.0 - eta,
        1.0 + 1.0 / (zeta * zeta)
    );

    println!("{:>3} {:>12} {:>12}", "N", "R", "g2");
    for n in [1u32, 2, 4, 8, 16, 32, 64] {
        let k = build_kernel(DetectorConfig::new(n, eta)?, n_max)?;
        let c = joint_counts_pmf(&photons, &k, &k)?;
        let (r, g) = (fano_factor(&c).unwrap(), g2(&c).unwrap());
        println!("{n:>3} {r:>12.6} {g:>12.6}");
    }

    let k4 = build_kernel(DetectorConfig::new(4, eta)?, n_max)?;
    let c4 = joint_counts_pmf(&photons, &k4, &k4)?;
    println!("joint counts c(k1, k2) for N = 4:");
    for a in 0..=4 {
        let row: Vec<String> = (0..=4).map(|b| format!("{:.5}", c4.get(a, b))).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
