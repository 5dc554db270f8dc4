//! Windowed-activation dictionary atoms, their derivatives, the weights
//! that make the weighted dictionary uniformly bounded in Sobolev norm,
//! and the representing-measure density.
//!
//! An atom with parameters `(y, eta, b)` and fixed constants `(t, tau)` is
//!
//! ```text
//! rho(x) = sigma(eta . x / tau + b) phi1(eta . x / tau + b - t) phid(x - y)
//! ```
//!
//! with a 1-D window `phi1` on the activation response and a d-D window
//! `phid` on the input. The phase identity expands `e^(2 pi i eta . x)`
//! over these atoms once `(V_phi1 sigma)(t, tau) != 0`, which is what
//! [`crate::relu_stft::check_condition_a`] certifies for the canonical
//! window pair used throughout.

use crate::field::GridAxis;
use crate::relu_stft::{relu_stft, ReluStftError};
use crate::special::{beta, gamma};
use crate::stft::StftGrid;
use crate::windows::{BreakpointActivation, PolyWeight, WindowKind};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Parameters of one dictionary element.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomParams {
    pub y: Vec<f64>,
    pub eta: Vec<f64>,
    pub b: f64,
}

impl AtomParams {
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.y.len(), self.eta.len());
        self.y.len()
    }
}

/// The fixed `(t, tau)` of the dictionary, with the transform value of the
/// ReLU at that point cached for measure phases and normalization.
#[derive(Clone, Copy, Debug)]
pub struct FixedConstants {
    pub t: f64,
    pub tau: f64,
    /// `(V_phi sigma)(t, tau)` for ReLU against the canonical window.
    pub v_sigma: Complex64,
}

impl FixedConstants {
    /// Validates the nonvanishing condition at `(t, tau)`.
    pub fn checked(t: f64, tau: f64) -> Result<Self, ReluStftError> {
        let cond = crate::relu_stft::check_condition_a(t, tau)?;
        debug_assert!(cond.holds, "transform magnitude underflowed at ({t}, {tau})");
        let v_sigma = relu_stft(t, tau)?.value;
        Ok(FixedConstants { t, tau, v_sigma })
    }

    /// The experiments' default `(t, tau) = (0, 1)`.
    pub fn default_experiment() -> Self {
        Self::checked(0.0, 1.0).expect("(0, 1) is in range and nonvanishing")
    }

    /// Normalization constant `C = |V_phi sigma(t, tau)|^(-1)`.
    pub fn normalization(&self) -> f64 {
        1.0 / self.v_sigma.norm()
    }
}

/// Activation slot of an atom.
#[derive(Clone, Debug, PartialEq)]
pub enum ActivationKind {
    Relu,
    Breakpoint(BreakpointActivation),
}

impl ActivationKind {
    pub fn eval(&self, a: f64) -> f64 {
        match self {
            ActivationKind::Relu => crate::windows::relu(a),
            ActivationKind::Breakpoint(bp) => bp.eval(a),
        }
    }

    /// a.e. derivative, right-continuous at kinks.
    pub fn deriv(&self, a: f64) -> f64 {
        match self {
            ActivationKind::Relu => crate::windows::relu_deriv(a),
            ActivationKind::Breakpoint(bp) => bp.deriv(a),
        }
    }
}

/// Window pair of the dictionary: 1-D spectral window and d-D spatial window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomWindows {
    pub spectral: WindowKind,
    pub spatial: WindowKind,
}

impl AtomWindows {
    pub fn canonical() -> Self {
        AtomWindows { spectral: WindowKind::Canonical, spatial: WindowKind::Canonical }
    }

    pub fn variance1() -> Self {
        AtomWindows { spectral: WindowKind::Variance1, spatial: WindowKind::Variance1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DictionaryError {
    /// Local weight needs s < -1, global weight s > 1.
    DivergentMarginal { s: f64, needs: &'static str },
    /// Derivative order above the supported range.
    UnsupportedOrder { order: usize },
    /// Requested point is outside the tabulated transform grid.
    OutOfSupport { coord: f64, axis: &'static str },
    Relu(ReluStftError),
}

impl std::fmt::Display for DictionaryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DictionaryError::DivergentMarginal { s, needs } => {
                write!(f, "weight exponent s = {s} gives a divergent marginal; needs {needs}")
            }
            DictionaryError::UnsupportedOrder { order } => {
                write!(f, "derivative order {order} unsupported (max 2)")
            }
            DictionaryError::OutOfSupport { coord, axis } => {
                write!(f, "point {coord} outside the transform grid on the {axis} axis")
            }
            DictionaryError::Relu(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DictionaryError {}

impl From<ReluStftError> for DictionaryError {
    fn from(e: ReluStftError) -> Self {
        DictionaryError::Relu(e)
    }
}

/// Atom value at `x`.
pub fn atom_eval(
    p: &AtomParams,
    c: &FixedConstants,
    sigma: &ActivationKind,
    windows: AtomWindows,
    x: &[f64],
) -> f64 {
    assert_eq!(x.len(), p.dim(), "atom input dimension mismatch");
    let a = response(p, c, x);
    let diff: Vec<f64> = x.iter().zip(&p.y).map(|(xi, yi)| xi - yi).collect();
    sigma.eval(a) * windows.spectral.eval_1d(a - c.t) * windows.spatial.eval(&diff)
}

fn response(p: &AtomParams, c: &FixedConstants, x: &[f64]) -> f64 {
    let dot: f64 = p.eta.iter().zip(x).map(|(e, xi)| e * xi).sum();
    dot / c.tau + p.b
}

/// Atom value and partial derivatives up to `order` (at most 2).
///
/// Channel layout: `[value]`, then first partials in coordinate order,
/// then for order 2 the upper-triangular second partials
/// (`d11, d12, d22` in 2-D; `d11` in 1-D). ReLU kinks contribute their
/// right-derivative; the a.e. second derivative of the activation is zero.
pub fn atom_grad(
    p: &AtomParams,
    c: &FixedConstants,
    sigma: &ActivationKind,
    windows: AtomWindows,
    x: &[f64],
    order: usize,
) -> Result<Vec<f64>, DictionaryError> {
    if order > 2 {
        return Err(DictionaryError::UnsupportedOrder { order });
    }
    assert_eq!(x.len(), p.dim(), "atom input dimension mismatch");
    let d = p.dim();
    let a = response(p, c, x);
    let u = a - c.t;
    let alpha = windows.spectral.alpha();
    let beta_sp = windows.spatial.alpha();

    let s0 = sigma.eval(a);
    let s1 = sigma.deriv(a);
    let w0 = windows.spectral.eval_1d(u);
    let w1 = -2.0 * alpha * u * w0;
    let w2 = (4.0 * alpha * alpha * u * u - 2.0 * alpha) * w0;

    // h(a) = sigma(a) phi1(a - t) and its derivatives (sigma'' = 0 a.e.).
    let h0 = s0 * w0;
    let h1 = s1 * w0 + s0 * w1;
    let h2 = 2.0 * s1 * w1 + s0 * w2;

    let diff: Vec<f64> = x.iter().zip(&p.y).map(|(xi, yi)| xi - yi).collect();
    let g0 = windows.spatial.eval(&diff);
    let g1: Vec<f64> = diff.iter().map(|z| -2.0 * beta_sp * z * g0).collect();

    let slope: Vec<f64> = p.eta.iter().map(|e| e / c.tau).collect();

    let mut out = Vec::with_capacity(1 + d + if order == 2 { d * (d + 1) / 2 } else { 0 });
    out.push(h0 * g0);
    if order >= 1 {
        for i in 0..d {
            out.push(h1 * slope[i] * g0 + h0 * g1[i]);
        }
    }
    if order == 2 {
        for i in 0..d {
            for j in i..d {
                let gij = (4.0 * beta_sp * beta_sp * diff[i] * diff[j]
                    - if i == j { 2.0 * beta_sp } else { 0.0 })
                    * g0;
                let v = h2 * slope[i] * slope[j] * g0
                    + h1 * slope[i] * g1[j]
                    + h1 * slope[j] * g1[i]
                    + h0 * gij;
                out.push(v);
            }
        }
    }
    Ok(out)
}

/// Weight making the local dictionary uniformly bounded on a bounded domain:
/// `theta(eta, b) = v_n(eta) v_s((|b| - R |eta/tau|)_+)` with `s < -1`.
#[derive(Clone, Copy, Debug)]
pub struct LocalWeightSpec {
    pub n: u32,
    pub s: f64,
    pub r_omega: f64,
}

impl LocalWeightSpec {
    pub fn new(n: u32, s: f64, r_omega: f64) -> Result<Self, DictionaryError> {
        if !(s < -1.0) {
            return Err(DictionaryError::DivergentMarginal { s, needs: "s < -1" });
        }
        assert!(r_omega > 0.0, "domain radius must be positive");
        Ok(LocalWeightSpec { n, s, r_omega })
    }

    /// Half-width of the flat region of `theta(eta, .)`.
    pub fn flat_halfwidth(&self, eta: &[f64], tau: f64) -> f64 {
        let norm: f64 = eta.iter().map(|e| e * e).sum::<f64>().sqrt();
        self.r_omega * norm / tau.abs()
    }

    pub fn eval(&self, eta: &[f64], b: f64, tau: f64) -> f64 {
        let w = self.flat_halfwidth(eta, tau);
        let excess = (b.abs() - w).max(0.0);
        PolyWeight::new(self.n as f64).eval(eta) * PolyWeight::new(self.s).eval_scalar(excess)
    }

    /// Closed-form b-marginal `I(eta) = 2 v_n(eta) (R|eta/tau| + B(1/2, (-s-1)/2) / 2)`.
    pub fn marginal(&self, eta: &[f64], tau: f64) -> f64 {
        let w = self.flat_halfwidth(eta, tau);
        2.0 * PolyWeight::new(self.n as f64).eval(eta) * (w + 0.5 * self.tail_mass())
    }

    /// `int_R v_s(u) du = B(1/2, (-s-1)/2)`.
    pub fn tail_mass(&self) -> f64 {
        beta(0.5, (-self.s - 1.0) / 2.0)
    }

    /// Domain constant `C = 2 R + B(1/2, (-s-1)/2)`; `2 + pi` for the unit
    /// ball with s = -2.
    pub fn domain_constant(&self) -> f64 {
        2.0 * self.r_omega + self.tail_mass()
    }
}

/// Weight for the whole-space dictionary: `theta(eta, b) = v_(n+s)(eta) / v_s(b)`
/// with `s > 1`.
#[derive(Clone, Copy, Debug)]
pub struct GlobalWeightSpec {
    pub n: u32,
    pub s: f64,
}

impl GlobalWeightSpec {
    pub fn new(n: u32, s: f64) -> Result<Self, DictionaryError> {
        if !(s > 1.0) {
            return Err(DictionaryError::DivergentMarginal { s, needs: "s > 1" });
        }
        Ok(GlobalWeightSpec { n, s })
    }

    pub fn eval(&self, eta: &[f64], b: f64) -> f64 {
        PolyWeight::new(self.n as f64 + self.s).eval(eta)
            * PolyWeight::new(-self.s).eval_scalar(b)
    }

    /// `int_R v_s(b)^(-1) db = sqrt(pi) Gamma((s-1)/2) / Gamma(s/2)`.
    pub fn gamma_ratio(&self) -> f64 {
        PI.sqrt() * gamma((self.s - 1.0) / 2.0) / gamma(self.s / 2.0)
    }

    /// b-marginal at `eta`.
    pub fn marginal(&self, eta: &[f64]) -> f64 {
        self.gamma_ratio() * PolyWeight::new(self.n as f64 + self.s).eval(eta)
    }
}

/// Either dictionary weight, as selected by experiment configuration.
#[derive(Clone, Copy, Debug)]
pub enum WeightSpec {
    Local(LocalWeightSpec),
    Global(GlobalWeightSpec),
}

impl WeightSpec {
    pub fn eval(&self, eta: &[f64], b: f64, tau: f64) -> f64 {
        match self {
            WeightSpec::Local(w) => w.eval(eta, b, tau),
            WeightSpec::Global(w) => w.eval(eta, b),
        }
    }
}

/// Density of the representing measure at `(y, eta, b)`:
/// `(V_phi sigma)(t, tau)^(-1) e^(-2 pi i b tau) V_phi f(y, eta)`, with the
/// transform interpolated multilinearly between grid nodes.
///
/// The constant carries its phase, not just the modulus `C = 1/|V_sigma|`:
/// the representation of `f` (and with it the sampler's unbiasedness)
/// needs the full complex inverse.
pub fn measure_density(
    grid: &StftGrid,
    c: &FixedConstants,
    y: &[f64],
    eta: &[f64],
    b: f64,
) -> Result<Complex64, DictionaryError> {
    let v = interpolate_stft(grid, y, eta)?;
    let phase = Complex64::from_polar(1.0, -2.0 * PI * b * c.tau);
    Ok(v * phase / c.v_sigma)
}

/// Multilinear interpolation of an STFT grid at a phase-space point.
pub fn interpolate_stft(
    grid: &StftGrid,
    y: &[f64],
    eta: &[f64],
) -> Result<Complex64, DictionaryError> {
    let d = grid.dim();
    assert_eq!(y.len(), d);
    assert_eq!(eta.len(), d);
    let mut coords: Vec<(usize, f64)> = Vec::with_capacity(2 * d);
    for (k, axis) in grid.space.iter().enumerate() {
        coords.push(locate(axis, y[k], "space")?);
    }
    for (k, axis) in grid.freq.iter().enumerate() {
        coords.push(locate(axis, eta[k], "frequency")?);
    }
    // Accumulate over the 2^(2d) cell corners.
    let corners = 1usize << (2 * d);
    let mut acc = Complex64::new(0.0, 0.0);
    for mask in 0..corners {
        let mut weight = 1.0;
        let mut idx = Vec::with_capacity(2 * d);
        for (axis_i, &(i0, frac)) in coords.iter().enumerate() {
            if mask >> axis_i & 1 == 1 {
                weight *= frac;
                idx.push(i0 + 1);
            } else {
                weight *= 1.0 - frac;
                idx.push(i0);
            }
        }
        if weight == 0.0 {
            continue;
        }
        let (space_idx, freq_idx) = flatten(grid, &idx);
        acc += grid.at(space_idx, freq_idx) * weight;
    }
    Ok(acc)
}

fn locate(axis: &GridAxis, coord: f64, name: &'static str) -> Result<(usize, f64), DictionaryError> {
    let rel = (coord - axis.start) / axis.step;
    if rel < 0.0 || rel > (axis.len - 1) as f64 {
        return Err(DictionaryError::OutOfSupport { coord, axis: name });
    }
    let mut i0 = rel.floor() as usize;
    if i0 >= axis.len - 1 {
        i0 = axis.len - 2;
    }
    Ok((i0, rel - i0 as f64))
}

fn flatten(grid: &StftGrid, idx: &[usize]) -> (usize, usize) {
    let d = grid.dim();
    let mut space_idx = 0;
    for k in 0..d {
        space_idx = space_idx * grid.space[k].len + idx[k];
    }
    let mut freq_idx = 0;
    for k in 0..d {
        freq_idx = freq_idx * grid.freq[k].len + idx[d + k];
    }
    (space_idx, freq_idx)
}

/// Quadrature check of the phase identity: integrates the ReLU atom section
/// over `b` in `[-B, B]`, divides by `(V_phi sigma)(t, tau)`, and returns
/// `|result - e^(2 pi i eta . x)|`.
///
/// The integrand has one kink at `b = -eta . x / tau`; the integral is
/// split there and each half done on Gauss-Legendre panels.
pub fn verify_phase_identity(
    eta: &[f64],
    x: &[f64],
    c: &FixedConstants,
    b_truncation: f64,
) -> f64 {
    assert!(b_truncation > 0.0);
    let dot: f64 = eta.iter().zip(x).map(|(e, xi)| e * xi).sum();
    let u = dot / c.tau;
    let window = WindowKind::Canonical;
    let integrand_re = |b: f64| {
        let a = u + b;
        crate::windows::relu(a) * window.eval_1d(a - c.t) * (2.0 * PI * b * c.tau).cos()
    };
    let integrand_im = |b: f64| {
        let a = u + b;
        -crate::windows::relu(a) * window.eval_1d(a - c.t) * (2.0 * PI * b * c.tau).sin()
    };
    let kink = (-u).clamp(-b_truncation, b_truncation);
    let panels = |lo: f64, hi: f64| ((hi - lo) * 4.0).ceil().max(1.0) as usize;
    let mut integral = Complex64::new(0.0, 0.0);
    for (lo, hi) in [(-b_truncation, kink), (kink, b_truncation)] {
        if hi > lo {
            let n = panels(lo, hi);
            integral += Complex64::new(
                crate::quad::gauss_legendre_panels(integrand_re, lo, hi, n),
                crate::quad::gauss_legendre_panels(integrand_im, lo, hi, n),
            );
        }
    }
    let reproduced = integral / c.v_sigma;
    let expected = Complex64::from_polar(1.0, 2.0 * PI * dot);
    (reproduced - expected).norm()
}
