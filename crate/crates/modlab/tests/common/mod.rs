//! Shared oracles for the integration suites. These deliberately avoid the
//! library's closed-form and quadrature helpers: the reference path here is
//! composite Simpson on the defining integral, coded independently.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Composite Simpson rule, local to the test suite.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, mut n: usize) -> f64 {
    if n % 2 == 1 {
        n += 1;
    }
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += c * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Reference transform of the ReLU against the canonical Gaussian window:
/// `int_0^inf t e^(-pi (t - x)^2) e^(-2 pi i w t) dt` by fine Simpson.
pub fn relu_transform_reference(x: f64, omega: f64) -> Complex64 {
    let hi = (x + 9.0).max(9.0);
    // step ~5e-4 keeps the oscillatory fourth-derivative error below 1e-10
    let n = (hi / 5e-4).ceil() as usize;
    let re = simpson(
        |t| t * (-PI * (t - x) * (t - x)).exp() * (2.0 * PI * omega * t).cos(),
        0.0,
        hi,
        n,
    );
    let im = simpson(
        |t| -t * (-PI * (t - x) * (t - x)).exp() * (2.0 * PI * omega * t).sin(),
        0.0,
        hi,
        n,
    );
    Complex64::new(re, im)
}
