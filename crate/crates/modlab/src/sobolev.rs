//! Discrete Sobolev error functionals on boxes, and log-log rate fitting.
//!
//! The error between two functions with derivative channels up to order n is
//!
//! ```text
//! ( sum_{|alpha| <= n} || d^alpha f - d^alpha g ||_{L^r}^r )^(1/r)
//! ```
//!
//! estimated either by trapezoid quadrature on a uniform grid or by a
//! Monte-Carlo average over sample points (the training distribution), per
//! the caller's choice of evaluation weights. Order 2 exists for
//! diagnostics only and synthesizes second-derivative channels by finite
//! differences of supplied gradients on a grid.

use crate::field::GridAxis;
use crate::rng::Xoshiro256;

#[derive(Clone, Debug, PartialEq)]
pub enum SobolevError {
    /// Channel count does not cover all partials |alpha| <= order.
    MissingChannels { expected: usize, got: usize },
    LengthMismatch { channel: usize, expected: usize, got: usize },
    UnsupportedOrder { order: usize },
    BadExponent { r: f64 },
    /// Rate fits need at least 4 strictly increasing term counts.
    NotEnoughPoints { got: usize },
    NonPositiveError { index: usize, value: f64 },
    NotIncreasing { index: usize },
}

impl std::fmt::Display for SobolevError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SobolevError::MissingChannels { expected, got } => {
                write!(f, "need {expected} derivative channels, got {got}")
            }
            SobolevError::LengthMismatch { channel, expected, got } => {
                write!(f, "channel {channel}: {got} samples, expected {expected}")
            }
            SobolevError::UnsupportedOrder { order } => {
                write!(f, "derivative order {order} unsupported (0 or 1; 2 for diagnostics)")
            }
            SobolevError::BadExponent { r } => write!(f, "integrability exponent r = {r} must be >= 2"),
            SobolevError::NotEnoughPoints { got } => {
                write!(f, "rate fit needs >= 4 term counts, got {got}")
            }
            SobolevError::NonPositiveError { index, value } => {
                write!(f, "error value {value} at index {index} must be positive")
            }
            SobolevError::NotIncreasing { index } => {
                write!(f, "term counts must be strictly increasing at index {index}")
            }
        }
    }
}

impl std::error::Error for SobolevError {}

/// Sobolev norm specification on an axis-aligned box.
#[derive(Clone, Debug)]
pub struct SobolevSpec {
    /// Derivative order: 0 or 1 supported, 2 for diagnostics.
    pub order: usize,
    /// Integrability exponent, r >= 2.
    pub r: f64,
    /// Per-axis (lo, hi).
    pub domain: Vec<(f64, f64)>,
}

impl SobolevSpec {
    pub fn new(order: usize, r: f64, domain: Vec<(f64, f64)>) -> Result<Self, SobolevError> {
        if order > 2 {
            return Err(SobolevError::UnsupportedOrder { order });
        }
        if !(r >= 2.0) {
            return Err(SobolevError::BadExponent { r });
        }
        for &(lo, hi) in &domain {
            assert!(hi > lo, "domain box must be nonempty");
        }
        Ok(SobolevSpec { order, r, domain })
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn volume(&self) -> f64 {
        self.domain.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Number of derivative channels required (value + partials).
    pub fn channel_count(&self) -> usize {
        let d = self.dim();
        match self.order {
            0 => 1,
            1 => 1 + d,
            2 => 1 + d + d * (d + 1) / 2,
            _ => unreachable!(),
        }
    }
}

/// Values and derivative channels of one function at a shared point set.
/// Layout matches [`crate::dictionary::atom_grad`]: value, first partials in
/// coordinate order, then upper-triangular second partials.
#[derive(Clone, Debug, Default)]
pub struct FieldSamples {
    pub channels: Vec<Vec<f64>>,
}

impl FieldSamples {
    pub fn values_only(values: Vec<f64>) -> Self {
        FieldSamples { channels: vec![values] }
    }
}

/// Evaluation points with quadrature weights.
#[derive(Clone, Debug)]
pub struct EvalPoints {
    pub dim: usize,
    /// Flattened points, `dim` coordinates each.
    pub coords: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EvalPoints {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Uniform grid with trapezoid weights over the spec's box.
    pub fn grid(spec: &SobolevSpec, per_axis: usize) -> Self {
        let axes: Vec<GridAxis> = spec
            .domain
            .iter()
            .map(|&(lo, hi)| GridAxis::span(lo, hi, per_axis))
            .collect();
        let per_axis_weights: Vec<Vec<f64>> = axes
            .iter()
            .map(|a| crate::quad::trapezoid_weights(a.len, a.step))
            .collect();
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        match axes.len() {
            1 => {
                for i in 0..axes[0].len {
                    coords.push(axes[0].point(i));
                    weights.push(per_axis_weights[0][i]);
                }
            }
            2 => {
                for i in 0..axes[0].len {
                    for j in 0..axes[1].len {
                        coords.push(axes[0].point(i));
                        coords.push(axes[1].point(j));
                        weights.push(per_axis_weights[0][i] * per_axis_weights[1][j]);
                    }
                }
            }
            d => panic!("unsupported dimension {d}"),
        }
        EvalPoints { dim: axes.len(), coords, weights }
    }

    /// Uniform random points over the box; each carries weight |box|/count,
    /// matching the training sample distribution.
    pub fn monte_carlo(spec: &SobolevSpec, count: usize, rng: &mut Xoshiro256) -> Self {
        assert!(count > 0);
        let dim = spec.dim();
        let mut coords = Vec::with_capacity(count * dim);
        for _ in 0..count {
            for &(lo, hi) in &spec.domain {
                coords.push(rng.uniform(lo, hi));
            }
        }
        let w = spec.volume() / count as f64;
        EvalPoints { dim, coords, weights: vec![w; count] }
    }
}

/// Sobolev error between two channel sets sampled at shared points.
pub fn sobolev_error(
    fa: &FieldSamples,
    fb: &FieldSamples,
    points: &EvalPoints,
    spec: &SobolevSpec,
) -> Result<f64, SobolevError> {
    let need = spec.channel_count();
    for (name, fs) in [("a", fa), ("b", fb)] {
        let _ = name;
        if fs.channels.len() < need {
            return Err(SobolevError::MissingChannels { expected: need, got: fs.channels.len() });
        }
        for (ci, ch) in fs.channels.iter().take(need).enumerate() {
            if ch.len() != points.len() {
                return Err(SobolevError::LengthMismatch {
                    channel: ci,
                    expected: points.len(),
                    got: ch.len(),
                });
            }
        }
    }
    let mut acc = 0.0f64;
    for ci in 0..need {
        let (ca, cb) = (&fa.channels[ci], &fb.channels[ci]);
        let mut ch_acc = 0.0f64;
        for i in 0..points.len() {
            ch_acc += (ca[i] - cb[i]).abs().powf(spec.r) * points.weights[i];
        }
        acc += ch_acc;
    }
    Ok(acc.powf(1.0 / spec.r))
}

/// Diagnostics helper: appends second-derivative channels obtained by
/// central differences of the first-derivative channels on a uniform grid
/// (interior stencil; one-sided at the boundary).
pub fn append_fd_second_order(samples: &mut FieldSamples, axes: &[GridAxis]) {
    let d = axes.len();
    assert!(samples.channels.len() >= 1 + d, "need gradient channels first");
    assert!(d == 1 || d == 2);
    let counts: Vec<usize> = axes.iter().map(|a| a.len).collect();
    let total: usize = counts.iter().product();
    assert_eq!(samples.channels[0].len(), total);
    let stride = |axis: usize| -> usize {
        if d == 1 {
            1
        } else if axis == 0 {
            counts[1]
        } else {
            1
        }
    };
    let mut second = Vec::new();
    for i in 0..d {
        for j in i..d {
            // d/dx_j of gradient channel i
            let src = &samples.channels[1 + i];
            let st = stride(j);
            let n_j = counts[j];
            let h = axes[j].step;
            let mut ch = vec![0.0; total];
            for (flat, slot) in ch.iter_mut().enumerate() {
                let pos_j = if d == 1 {
                    flat
                } else if j == 0 {
                    flat / counts[1]
                } else {
                    flat % counts[1]
                };
                *slot = if pos_j == 0 {
                    (src[flat + st] - src[flat]) / h
                } else if pos_j == n_j - 1 {
                    (src[flat] - src[flat - st]) / h
                } else {
                    (src[flat + st] - src[flat - st]) / (2.0 * h)
                };
            }
            second.push(ch);
        }
    }
    samples.channels.extend(second);
}

/// Least-squares fit of log(error) against log(N).
#[derive(Clone, Copy, Debug)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual_rms: f64,
}

/// Fit the decay exponent of (N, error) pairs.
pub fn fit_rate(pairs: &[(usize, f64)]) -> Result<RateFit, SobolevError> {
    if pairs.len() < 4 {
        return Err(SobolevError::NotEnoughPoints { got: pairs.len() });
    }
    for (i, &(n, e)) in pairs.iter().enumerate() {
        if !(e > 0.0) {
            return Err(SobolevError::NonPositiveError { index: i, value: e });
        }
        if i > 0 && n <= pairs[i - 1].0 {
            return Err(SobolevError::NotIncreasing { index: i });
        }
    }
    let m = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(n, e) in pairs {
        let x = (n as f64).ln();
        let y = e.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = m * sxx - sx * sx;
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    let mut rss = 0.0;
    for &(n, e) in pairs {
        let resid = e.ln() - (intercept + slope * (n as f64).ln());
        rss += resid * resid;
    }
    Ok(RateFit { slope, intercept, residual_rms: (rss / m).sqrt() })
}

/// One aggregated rate-experiment row.
#[derive(Clone, Copy, Debug)]
pub struct RateEntry {
    pub n: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Aggregated (N, error) statistics with the fitted slope.
#[derive(Clone, Debug)]
pub struct RateReport {
    pub entries: Vec<RateEntry>,
    pub fit: RateFit,
    pub seed_count: usize,
}

impl RateReport {
    /// Builds the report from per-N error batches (one value per seed).
    pub fn from_errors(per_n: &[(usize, Vec<f64>)]) -> Result<Self, SobolevError> {
        let seed_count = per_n.first().map(|(_, v)| v.len()).unwrap_or(0);
        let mut entries = Vec::with_capacity(per_n.len());
        for (n, errors) in per_n {
            entries.push(RateEntry {
                n: *n,
                median: quantile(errors, 0.5),
                q25: quantile(errors, 0.25),
                q75: quantile(errors, 0.75),
            });
        }
        let pairs: Vec<(usize, f64)> = entries.iter().map(|e| (e.n, e.median)).collect();
        let fit = fit_rate(&pairs)?;
        Ok(RateReport { entries, fit, seed_count })
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("N,median_error,q25,q75,fitted_slope\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.n, e.median, e.q25, e.q75, self.fit.slope
            ));
        }
        out
    }

    /// Count of increases in the median as N grows (0 for clean decay).
    pub fn median_inversions(&self) -> usize {
        self.entries.windows(2).filter(|w| w[1].median > w[0].median).count()
    }
}

/// Linear-interpolation quantile; deterministic for fixed input order.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_1d(order: usize) -> SobolevSpec {
        SobolevSpec::new(order, 2.0, vec![(0.0, 1.0)]).unwrap()
    }

    fn sample_fn(
        points: &EvalPoints,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
    ) -> FieldSamples {
        let values = (0..points.len()).map(|i| f(points.point(i)[0])).collect();
        let grads = (0..points.len()).map(|i| df(points.point(i)[0])).collect();
        FieldSamples { channels: vec![values, grads] }
    }

    #[test]
    fn identical_inputs_give_zero() {
        let spec = spec_1d(1);
        let pts = EvalPoints::grid(&spec, 101);
        let a = sample_fn(&pts, |x| x * x, |x| 2.0 * x);
        let err = sobolev_error(&a, &a, &pts, &spec).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn constant_difference_is_scaled_by_volume() {
        // n=0, r=2: |c| |Omega|^(1/2) on Omega = [0, 2].
        let spec = SobolevSpec::new(0, 2.0, vec![(0.0, 2.0)]).unwrap();
        let pts = EvalPoints::grid(&spec, 201);
        let c = 0.7;
        let a = FieldSamples::values_only(vec![c; pts.len()]);
        let b = FieldSamples::values_only(vec![0.0; pts.len()]);
        let err = sobolev_error(&a, &b, &pts, &spec).unwrap();
        assert!((err - c * 2.0f64.sqrt()).abs() < 1e-12, "err = {err}");
    }

    #[test]
    fn linear_function_h1_against_zero() {
        // f(x) = x, g = 0 on [0,1], n=1, r=2: error^2 = 1/3 + 1 = 4/3.
        let spec = spec_1d(1);
        let pts = EvalPoints::grid(&spec, 2001);
        let a = sample_fn(&pts, |x| x, |_| 1.0);
        let b = sample_fn(&pts, |_| 0.0, |_| 0.0);
        let err = sobolev_error(&a, &b, &pts, &spec).unwrap();
        let exact = (4.0f64 / 3.0).sqrt();
        assert!((err - exact).abs() < 1e-7, "err = {err}, exact = {exact}");
    }

    #[test]
    fn missing_gradient_channels_rejected() {
        let spec = spec_1d(1);
        let pts = EvalPoints::grid(&spec, 11);
        let a = FieldSamples::values_only(vec![0.0; pts.len()]);
        let err = sobolev_error(&a, &a, &pts, &spec).unwrap_err();
        assert_eq!(err, SobolevError::MissingChannels { expected: 2, got: 1 });
    }

    #[test]
    fn symmetric_and_triangle() {
        let spec = spec_1d(1);
        let pts = EvalPoints::grid(&spec, 101);
        let mut rng = crate::rng::Xoshiro256::seed_from(8);
        for _ in 0..50 {
            let (p, q, r) = (rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0));
            let fa = sample_fn(&pts, |x| (p * x).sin(), |x| p * (p * x).cos());
            let fb = sample_fn(&pts, |x| (q * x).cos(), |x| -q * (q * x).sin());
            let fc = sample_fn(&pts, |x| r * x, |_| r);
            let dab = sobolev_error(&fa, &fb, &pts, &spec).unwrap();
            let dba = sobolev_error(&fb, &fa, &pts, &spec).unwrap();
            assert!((dab - dba).abs() < 1e-14);
            let dac = sobolev_error(&fa, &fc, &pts, &spec).unwrap();
            let dcb = sobolev_error(&fc, &fb, &pts, &spec).unwrap();
            assert!(dab <= dac + dcb + 1e-12, "triangle: {dab} > {dac} + {dcb}");
        }
    }

    #[test]
    fn monotone_in_derivative_order() {
        let spec0 = spec_1d(0);
        let spec1 = spec_1d(1);
        let pts = EvalPoints::grid(&spec1, 101);
        let a = sample_fn(&pts, |x| (3.0 * x).sin(), |x| 3.0 * (3.0 * x).cos());
        let b = sample_fn(&pts, |_| 0.0, |_| 0.0);
        let e0 = sobolev_error(&a, &b, &pts, &spec0).unwrap();
        let e1 = sobolev_error(&a, &b, &pts, &spec1).unwrap();
        assert!(e1 >= e0);
    }

    #[test]
    fn grid_and_monte_carlo_agree_within_standard_error() {
        let spec = spec_1d(0);
        let grid_pts = EvalPoints::grid(&spec, 2001);
        let ga = sample_fn(&grid_pts, |x| (2.0 * x).sin(), |x| 2.0 * (2.0 * x).cos());
        let gb = sample_fn(&grid_pts, |_| 0.0, |_| 0.0);
        let grid_err = sobolev_error(&ga, &gb, &grid_pts, &spec).unwrap();

        let mut rng = crate::rng::Xoshiro256::seed_from(9);
        let mc_pts = EvalPoints::monte_carlo(&spec, 4000, &mut rng);
        let ma = sample_fn(&mc_pts, |x| (2.0 * x).sin(), |x| 2.0 * (2.0 * x).cos());
        let mb = sample_fn(&mc_pts, |_| 0.0, |_| 0.0);
        let mc_err = sobolev_error(&ma, &mb, &mc_pts, &spec).unwrap();

        // standard error of the squared-error mean, propagated through sqrt
        let sq: Vec<f64> = (0..mc_pts.len())
            .map(|i| {
                let d = ma.channels[0][i] - mb.channels[0][i];
                d * d
            })
            .collect();
        let mean = sq.iter().sum::<f64>() / sq.len() as f64;
        let var = sq.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / sq.len() as f64;
        let se_mean = (var / sq.len() as f64).sqrt();
        let se_err = 0.5 / mean.sqrt() * se_mean;
        assert!(
            (mc_err - grid_err).abs() < 3.0 * se_err,
            "grid {grid_err} vs mc {mc_err}, se {se_err}"
        );
    }

    #[test]
    fn fd_second_order_channels() {
        let spec = SobolevSpec::new(2, 2.0, vec![(0.0, 1.0)]).unwrap();
        let pts = EvalPoints::grid(&spec, 101);
        let axes = vec![GridAxis::span(0.0, 1.0, 101)];
        let mut a = sample_fn(&pts, |x| x * x * x, |x| 3.0 * x * x);
        append_fd_second_order(&mut a, &axes);
        assert_eq!(a.channels.len(), 3);
        // interior second derivative of x^3 is 6x
        let mid = 50;
        let x = pts.point(mid)[0];
        assert!((a.channels[2][mid] - 6.0 * x).abs() < 1e-6);
    }

    #[test]
    fn exact_power_law_recovers_slope() {
        let pairs: Vec<(usize, f64)> =
            [16, 32, 64, 128, 256].iter().map(|&n| (n, (n as f64).powf(-0.5))).collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12, "slope {}", fit.slope);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn scaled_power_law_recovers_intercept() {
        let pairs: Vec<(usize, f64)> =
            [10, 20, 40, 80].iter().map(|&n| (n, 3.0 / n as f64)).collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rate_fit_input_validation() {
        assert_eq!(
            fit_rate(&[(1, 1.0), (2, 0.5), (4, 0.2)]).unwrap_err(),
            SobolevError::NotEnoughPoints { got: 3 }
        );
        assert!(matches!(
            fit_rate(&[(1, 1.0), (2, 0.5), (4, -0.2), (8, 0.1)]).unwrap_err(),
            SobolevError::NonPositiveError { index: 2, .. }
        ));
        assert!(matches!(
            fit_rate(&[(1, 1.0), (4, 0.5), (2, 0.2), (8, 0.1)]).unwrap_err(),
            SobolevError::NotIncreasing { index: 2 }
        ));
    }

    #[test]
    fn report_csv_schema() {
        let per_n = vec![
            (16, vec![1.0, 1.2, 0.9]),
            (32, vec![0.7, 0.8, 0.72]),
            (64, vec![0.5, 0.55, 0.52]),
            (128, vec![0.35, 0.4, 0.36]),
        ];
        let report = RateReport::from_errors(&per_n).unwrap();
        let csv = report.csv();
        assert!(csv.starts_with("N,median_error,q25,q75,fitted_slope\n"));
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(report.seed_count, 3);
        assert_eq!(report.median_inversions(), 0);
    }

    #[test]
    fn quantile_interpolates() {
        let v = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }
}
