//! Click-count statistics of multiplexed on-off photon detectors.
//!
//! The crate maps photon-number statistics of coherent, thermal, multimode
//! thermal and two-mode squeezed light through the response of an `N`-element
//! on-off detector with finite efficiency, and evaluates count moments and
//! nonclassicality witnesses (Mandel `Q`, subbinomial `Q_B`, Fano factor,
//! `g2`). Moments are available from exact closed forms, from a finite
//! Stirling sum with Taylor-mode derivatives, and from a tail-bounded
//! series; a seeded Monte Carlo chopper serves as an independent check.
//!
//! ```
//! use clickstats::{counts, kernel::Detector, states::{StateSpec, Truncation}};
//!
//! let state = StateSpec::Coherent { mean: 4.0 };
//! let det = Detector::multiplexed(4, 1.0).unwrap();
//! let m = counts::series_moments(&state, det, Truncation::default()).unwrap();
//! assert!((m.mean - 4.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-10);
//! ```

pub mod cli;
pub mod counts;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod sampler;
pub mod states;
pub mod taylor;

pub use error::{Error, Result};
