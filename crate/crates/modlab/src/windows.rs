//! Fixed analytic ingredients: Gaussian windows, polynomial weights, and
//! the bounded ramp/tooth activations assembled from ReLU units.
//!
//! Two Gaussian normalizations coexist behind [`WindowKind`]: the spectral
//! analysis windows use `exp(-pi t^2)` while the trained network atoms use
//! `exp(-t^2/2)`. Every call site picks one explicitly so the two can never
//! be mixed silently.

/// Gaussian window normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowKind {
    /// `exp(-pi |x|^2)`; self-dual under the Fourier transform used here.
    Canonical,
    /// `exp(-|x|^2 / 2)`; the variance-1 profile of the network atoms.
    Variance1,
}

impl WindowKind {
    /// Quadratic-form coefficient `alpha` in `exp(-alpha |x|^2)`.
    pub fn alpha(self) -> f64 {
        match self {
            WindowKind::Canonical => std::f64::consts::PI,
            WindowKind::Variance1 => 0.5,
        }
    }

    /// Window value at a scalar offset.
    pub fn eval_1d(self, t: f64) -> f64 {
        (-self.alpha() * t * t).exp()
    }

    /// Window value at a d-dimensional offset.
    pub fn eval(self, x: &[f64]) -> f64 {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        (-self.alpha() * sq).exp()
    }

    /// First derivative in one variable: `-2 alpha t` times the window.
    pub fn deriv_1d(self, t: f64) -> f64 {
        -2.0 * self.alpha() * t * self.eval_1d(t)
    }

    /// `L^2(R^d)` inner product of two centered Gaussian windows.
    pub fn inner(self, other: WindowKind, dim: usize) -> f64 {
        let s = self.alpha() + other.alpha();
        (std::f64::consts::PI / s).sqrt().powi(dim as i32)
    }
}

/// Evaluate a Gaussian window of dimension `dim` at `x`.
///
/// Callers must state the normalization; there is no default.
pub fn eval_gaussian(kind: WindowKind, dim: usize, x: &[f64]) -> f64 {
    assert_eq!(x.len(), dim, "gaussian input dimension mismatch");
    kind.eval(x)
}

/// Polynomial weight `v_s(z) = (1 + |z|^2)^(s/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyWeight {
    pub s: f64,
}

impl PolyWeight {
    pub fn new(s: f64) -> Self {
        PolyWeight { s }
    }

    /// Weight at a vector argument. Evaluated in log space so large |s|
    /// cannot overflow before the final exponential.
    pub fn eval(&self, z: &[f64]) -> f64 {
        let sq: f64 = z.iter().map(|v| v * v).sum();
        self.eval_sq(sq)
    }

    /// Weight at a scalar argument.
    pub fn eval_scalar(&self, z: f64) -> f64 {
        self.eval_sq(z * z)
    }

    /// Weight as a function of |z|^2.
    pub fn eval_sq(&self, sq: f64) -> f64 {
        (0.5 * self.s * sq.ln_1p()).exp()
    }
}

/// Evaluate `v_s` at `z`; the free-function form of [`PolyWeight::eval`].
pub fn eval_weight(s: f64, z: &[f64]) -> f64 {
    PolyWeight::new(s).eval(z)
}

/// Errors from constructing a breakpoint activation.
#[derive(Clone, Debug, PartialEq)]
pub enum ActivationError {
    /// Breakpoints must be strictly increasing.
    UnorderedBreakpoints,
    /// Tooth breakpoints must be equally spaced.
    UnequalToothSpacing { left: f64, right: f64 },
}

impl std::fmt::Display for ActivationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ActivationError::UnorderedBreakpoints => {
                write!(f, "breakpoints must be strictly increasing")
            }
            ActivationError::UnequalToothSpacing { left, right } => {
                write!(f, "tooth spacings differ: {left} vs {right}")
            }
        }
    }
}

impl std::error::Error for ActivationError {}

/// Bounded activation profile written as a short ReLU combination.
#[derive(Clone, Debug, PartialEq)]
pub enum BreakpointActivation {
    /// `(x - b1)_+ - (x - b2)_+`: 0 left of b1, slope 1 between, b2-b1 right of b2.
    Ramp { b1: f64, b2: f64 },
    /// `(x - b1)_+ - 2 (x - b2)_+ + (x - b3)_+` with equal spacing; a symmetric
    /// bump vanishing outside [b1, b3].
    Tooth { b1: f64, b2: f64, b3: f64 },
}

impl BreakpointActivation {
    pub fn ramp(b1: f64, b2: f64) -> Result<Self, ActivationError> {
        if !(b1 < b2) {
            return Err(ActivationError::UnorderedBreakpoints);
        }
        Ok(BreakpointActivation::Ramp { b1, b2 })
    }

    pub fn tooth(b1: f64, b2: f64, b3: f64) -> Result<Self, ActivationError> {
        if !(b1 < b2 && b2 < b3) {
            return Err(ActivationError::UnorderedBreakpoints);
        }
        let (left, right) = (b2 - b1, b3 - b2);
        if (left - right).abs() > 1e-12 * left.abs().max(right.abs()).max(1.0) {
            return Err(ActivationError::UnequalToothSpacing { left, right });
        }
        Ok(BreakpointActivation::Tooth { b1, b2, b3 })
    }

    /// Value as the literal ReLU linear combination.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            BreakpointActivation::Ramp { b1, b2 } => relu(x - b1) - relu(x - b2),
            BreakpointActivation::Tooth { b1, b2, b3 } => {
                relu(x - b1) - 2.0 * relu(x - b2) + relu(x - b3)
            }
        }
    }

    /// Right-derivative, consistent with [`relu_deriv`] at each kink.
    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            BreakpointActivation::Ramp { b1, b2 } => relu_deriv(x - b1) - relu_deriv(x - b2),
            BreakpointActivation::Tooth { b1, b2, b3 } => {
                relu_deriv(x - b1) - 2.0 * relu_deriv(x - b2) + relu_deriv(x - b3)
            }
        }
    }
}

/// Construct-and-evaluate helper mirroring the activation's defining sum.
pub fn eval_ramp_tooth(a: &BreakpointActivation, x: f64) -> f64 {
    a.eval(x)
}

#[inline]
pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// a.e. derivative of ReLU with the right-derivative convention at 0.
#[inline]
pub fn relu_deriv(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256;

    #[test]
    fn weight_examples() {
        assert_eq!(eval_weight(3.0, &[0.0]), 1.0);
        // |z|^2 = 3 with s = 2 gives (1+3)^1 = 4.
        let z = [1.0, 1.0, 1.0];
        assert!((eval_weight(2.0, &z) - 4.0).abs() < 1e-14);
        // |z| = 1 with s = -2 gives 1/2.
        assert!((eval_weight(-2.0, &[1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weight_inverse_pair_is_unity() {
        let mut rng = Xoshiro256::seed_from(7);
        for _ in 0..1000 {
            let s = rng.uniform(-40.0, 40.0);
            let z = [rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)];
            let prod = eval_weight(s, &z) * eval_weight(-s, &z);
            assert!(
                (prod - 1.0).abs() < 1e-14,
                "v_s * v_(-s) = {prod} at s={s}, z={z:?}"
            );
        }
    }

    /// Peetre's inequality v_s(z1+z2) <= 2^(s/2) v_s(z1) v_s(z2) for s >= 0.
    /// The bracket (1+|z|^2)^(1/2) is not submultiplicative without the
    /// 2^(s/2) factor (z1 = z2 = e1, s = 1 gives sqrt(5) > 2), so this is
    /// the sharp form of the property.
    #[test]
    fn weight_peetre_submultiplicative_for_nonnegative_s() {
        let mut rng = Xoshiro256::seed_from(11);
        for _ in 0..1000 {
            let s = rng.uniform(0.0, 8.0);
            let z1 = [rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)];
            let z2 = [rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)];
            let sum = [z1[0] + z2[0], z1[1] + z2[1]];
            let lhs = eval_weight(s, &sum);
            let rhs = (0.5 * s).exp2() * eval_weight(s, &z1) * eval_weight(s, &z2);
            assert!(lhs <= rhs * (1.0 + 1e-12), "Peetre bound: {lhs} > {rhs}");
        }
    }

    #[test]
    fn weight_log_space_survives_large_exponent() {
        let v = eval_weight(300.0, &[3.0]);
        assert!(v.is_finite() && v > 0.0);
        let v_inv = eval_weight(-300.0, &[3.0]);
        assert!((v * v_inv - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ramp_plateau_and_dead_zone_values() {
        let ramp = BreakpointActivation::ramp(0.0, 1.0).unwrap();
        assert_eq!(ramp.eval(2.0), 1.0, "plateau right of b2 is b2 - b1");
        assert_eq!(ramp.eval(-1.0), 0.0, "zero left of b1");
        assert_eq!(ramp.eval(0.5), 0.5);
    }

    #[test]
    fn tooth_peak_value() {
        let tooth = BreakpointActivation::tooth(0.0, 1.0, 2.0).unwrap();
        assert_eq!(tooth.eval(1.0), 1.0);
        assert_eq!(tooth.eval(-0.5), 0.0);
        assert_eq!(tooth.eval(2.5), 0.0);
    }

    #[test]
    fn invalid_breakpoints_rejected() {
        assert_eq!(
            BreakpointActivation::ramp(1.0, 1.0).unwrap_err(),
            ActivationError::UnorderedBreakpoints
        );
        assert!(matches!(
            BreakpointActivation::tooth(0.0, 1.0, 2.5).unwrap_err(),
            ActivationError::UnequalToothSpacing { .. }
        ));
    }

    /// The ReLU combination agrees with the explicit piecewise form. The two
    /// expressions round differently, so exact means within an ulp of the
    /// breakpoint scale.
    #[test]
    fn ramp_tooth_match_piecewise_form() {
        let mut rng = Xoshiro256::seed_from(23);
        for _ in 0..10_000 {
            let b1 = rng.uniform(-5.0, 4.0);
            let width = rng.uniform(0.1, 3.0);
            let (b2, b3) = (b1 + width, b1 + 2.0 * width);
            let x = rng.uniform(-10.0, 10.0);

            let ramp = BreakpointActivation::ramp(b1, b2).unwrap();
            let piecewise_ramp = if x <= b1 {
                0.0
            } else if x < b2 {
                x - b1
            } else {
                b2 - b1
            };
            assert!(
                (ramp.eval(x) - piecewise_ramp).abs() <= 1e-13 * (1.0 + x.abs()),
                "ramp({x}) piecewise mismatch"
            );

            let tooth = BreakpointActivation::tooth(b1, b2, b3).unwrap();
            let piecewise_tooth = if x <= b1 || x >= b3 {
                0.0
            } else if x < b2 {
                x - b1
            } else {
                b3 - x
            };
            assert!(
                (tooth.eval(x) - piecewise_tooth).abs() <= 1e-13 * (1.0 + x.abs()),
                "tooth({x}) piecewise mismatch"
            );
        }
    }

    /// Difference quotients of the ramp converge to the indicator of (b1, b2).
    #[test]
    fn ramp_weak_derivative_is_indicator() {
        let ramp = BreakpointActivation::ramp(-1.0, 2.0).unwrap();
        let h = 1e-6;
        let mut rng = Xoshiro256::seed_from(31);
        for _ in 0..1000 {
            let x = rng.uniform(-4.0, 5.0);
            if (x + 1.0).abs() < 2.0 * h || (x - 2.0).abs() < 2.0 * h {
                continue;
            }
            let dq = (ramp.eval(x + h) - ramp.eval(x - h)) / (2.0 * h);
            let indicator = if x > -1.0 && x < 2.0 { 1.0 } else { 0.0 };
            assert!((dq - indicator).abs() < 1e-9, "dq({x}) = {dq}");
        }
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(eval_gaussian(WindowKind::Canonical, 1, &[0.0]), 1.0);
        let e_pi = (-std::f64::consts::PI).exp();
        assert!((eval_gaussian(WindowKind::Canonical, 1, &[1.0]) - e_pi).abs() < 1e-16);
        // |x|^2 = 2 under variance-1 gives exp(-1).
        let v = eval_gaussian(WindowKind::Variance1, 2, &[1.0, 1.0]);
        assert!((v - (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn window_inner_products() {
        // canonical-canonical in 1d: int exp(-2 pi t^2) = 2^{-1/2}
        let inner = WindowKind::Canonical.inner(WindowKind::Canonical, 1);
        assert!((inner - 0.5f64.sqrt()).abs() < 1e-15);
        // variance1-variance1 in 2d: (int exp(-t^2))^2 = pi
        let inner = WindowKind::Variance1.inner(WindowKind::Variance1, 2);
        assert!((inner - std::f64::consts::PI).abs() < 1e-14);
    }
}
