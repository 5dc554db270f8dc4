//! Quadrature rules on uniform grids and Gauss-Legendre panels.
//!
//! The discrete transforms in this crate all integrate smooth, rapidly
//! decaying functions, so composite trapezoid on a uniform grid is the
//! workhorse. Simpson and panelized Gauss-Legendre are kept for the
//! verifiers that need higher order at a fixed point budget.

/// Trapezoid weights for a uniform grid with `len` nodes and spacing `step`.
///
/// Endpoints get half weight. `len == 1` degenerates to a single
/// full-weight node so that tensor products stay well defined.
pub fn trapezoid_weights(len: usize, step: f64) -> Vec<f64> {
    assert!(len >= 1, "trapezoid grid needs at least one node");
    if len == 1 {
        return vec![step];
    }
    let mut w = vec![step; len];
    w[0] = 0.5 * step;
    w[len - 1] = 0.5 * step;
    w
}

/// Composite trapezoid of `f` over [a, b] with `n` intervals.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 1);
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n {
        acc += f(a + h * i as f64);
    }
    acc * h
}

/// Composite Simpson of `f` over [a, b] with `n` intervals (`n` even).
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

/// 16-point Gauss-Legendre nodes on (-1, 1), positive half.
const GL16_X: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_W: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// 16-point Gauss-Legendre on a single interval [a, b].
pub fn gauss_legendre_16<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        let dx = half * GL16_X[i];
        acc += GL16_W[i] * (f(mid + dx) + f(mid - dx));
    }
    acc * half
}

/// Composite 16-point Gauss-Legendre over [a, b] split into `panels` panels.
///
/// Effectively machine precision for smooth integrands once the panel
/// width resolves the integrand's scale of variation.
pub fn gauss_legendre_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 1);
    let width = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + width * p as f64;
        acc += gauss_legendre_16(&f, lo, lo + width);
    }
    acc
}
