//! Channel modeling and link-performance analysis for magnetic-induction
//! communication over randomly composed multi-medium underground paths.
//!
//! The crate models a transmitter driving multi-resonant tri-directional
//! coils toward buried receivers through a path made of random-length
//! material segments. Eddy-current loss per segment makes the end-to-end
//! gain lognormal in the many-segment limit; everything downstream
//! (capacity, BER, outage, for both multi-band multiplexing and diversity)
//! is evaluated twice: in closed form and by Monte Carlo, and the two are
//! cross-checked.
//!
//! Module map:
//! - [`media`]: material catalog and skin depths
//! - [`circuit`]: coil impedances, multi-resonant network synthesis,
//!   mutual inductance, deterministic gain
//! - [`fading`]: random path composition and the lognormal gain law
//! - [`numerics`]: special functions, Gauss-Hermite rules, solvers
//! - [`analytics`]: closed-form SNR/capacity/BER/outage for multiplexing
//!   and diversity
//! - [`montecarlo`]: sampling harness that validates the closed forms
//! - [`scenario`]: on-disk configuration and the committed default setup
//! - [`report`]: CSV emission

pub mod analytics;
pub mod circuit;
pub mod error;
pub mod fading;
pub mod media;
pub mod montecarlo;
pub mod numerics;
pub mod pipeline;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
