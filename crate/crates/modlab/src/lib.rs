//! Numerical laboratory for windowed-activation dictionary approximation
//! and derivative-supervised shallow-network training.
//!
//! The pieces fit together like this:
//!
//! - [`windows`] holds the fixed analytic ingredients (Gaussian windows in
//!   two normalizations, polynomial weights, ramp/tooth activations).
//! - [`cerf`] and [`relu_stft`] provide the complex error function and the
//!   closed-form short-time Fourier transform of the ReLU, with verifiers
//!   for the nonvanishing condition the dictionary construction rests on.
//! - [`field`] and [`stft`] are the discrete transform engine: sampled
//!   complex fields, direct-quadrature STFT/inversion, and weighted norm
//!   estimators on truncation boxes.
//! - [`dictionary`] defines the atoms, their derivatives, the dictionary
//!   weights with closed-form marginals, the representing-measure density,
//!   and a quadrature check of the plane-wave phase identity.
//! - [`sampling`] draws N-term approximants from the measure (importance
//!   sampling with unit-phase coefficients) and drives the
//!   `N^(-1/2)`-rate experiment, with errors measured by [`sobolev`].
//! - [`networks`] and [`training`] implement the modulation-vs-plain
//!   training benchmark with hand-derived gradients, Adam/AdamW, and a
//!   reduce-on-plateau schedule.
//! - [`targets`], [`config`], [`report`], and [`cli`] are the experiment
//!   harness: analytic benchmark targets, key=value configs, CSV/SVG
//!   emission, and the `modlab` subcommands.
//!
//! Determinism is a crate-wide contract: seeded runs produce byte-identical
//! outputs (fixed-order reductions, a self-contained [`rng`], no threading
//! in numeric paths).

pub mod cerf;
pub mod cli;
pub mod config;
pub mod dictionary;
pub mod field;
pub mod networks;
pub mod quad;
pub mod relu_stft;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod sobolev;
pub mod special;
pub mod stft;
pub mod targets;
pub mod training;
pub mod windows;
