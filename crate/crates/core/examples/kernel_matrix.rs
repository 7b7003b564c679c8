//! Print p(k|n) for a small multiplexed detector and check it against
//! exact Stirling-number arithmetic.
//!
//!     cargo run --example kernel_matrix -- 4 0.8 10

use clickstats::kernel::{build_kernel, click_prob_exact, DetectorConfig};

fn main() -> clickstats::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_elements: u32 = args.next().map_or(4, |s| s.parse().expect("N"));
    let eta: f64 = args.next().map_or(1.0, |s| s.parse().expect("eta"));
    let n_max: usize = args.next().map_or(10, |s| s.parse().expect("n_max"));

    let kernel = build_kernel(DetectorConfig::new(n_elements, eta)?, n_max)?;
    println!("p(k|n) for N = {n_elements}, eta = {eta}");
    print!("{:>4}", "k\\n");
    for n in 0..=n_max {
        print!("{n:>9}");
    }
    println!();
    for k in 0..=kernel.max_clicks() {
        print!("{k:>4}");
        for n in 0..=n_max {
            print!("{:>9.5}", kernel.prob(k, n));
        }
        println!();
    }

    if eta == 1.0 {
        let worst = (0..=n_max)
            .flat_map(|n| (0..=kernel.max_clicks()).map(move |k| (k, n)))
            .map(|(k, n)| {
                (kernel.prob(k, n) - click_prob_exact(n_elements, k as i64, n as u32)).abs()
            })
            .fold(0.0, f64::max);
        println!("max |recurrence - exact| = {worst:.2e}");
    }
    Ok(())
}
