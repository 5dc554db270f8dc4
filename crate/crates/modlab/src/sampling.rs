//! Monte-Carlo construction of N-term dictionary approximants.
//!
//! The inversion formula writes a signal as an integral of windowed
//! activation atoms against a complex measure whose modulus factors into
//! `|V_phi f(y, eta)|` times the dictionary weight's b-marginal. Drawing
//! atoms i.i.d. from that normalized modulus and attaching coefficients
//! `(M / N) * phase` — `M` the measure's total mass, `phase` the measure's
//! unit phase at the drawn point — yields an estimator whose expectation is
//! the (truncated, discretized) inversion integral and whose error decays
//! like `N^(-1/2)`. This realizes the sampling argument behind the
//! dimension-free approximation bound; the bound itself is existential and
//! prescribes no sampler.
//!
//! Sampling is over the STFT grid cells in `(y, eta)` (trapezoid cell
//! masses, matching the discrete inversion exactly) and a continuous
//! conditional density in `b` via an inverse-CDF table.

use crate::dictionary::{
    atom_grad, AtomParams, AtomWindows, ActivationKind, DictionaryError, FixedConstants,
    WeightSpec,
};
use crate::field::{GridAxis, SampledField};
use crate::rng::Xoshiro256;
use crate::sobolev::{sobolev_error, EvalPoints, FieldSamples, RateReport, SobolevError, SobolevSpec};
use crate::stft::{stft, StftGrid, TfError};
use crate::targets::Target;
use crate::windows::PolyWeight;
use num_complex::Complex64;
use std::f64::consts::PI;

/// How to build the sampler for a given signal.
#[derive(Clone, Debug)]
pub struct SamplingPlan {
    pub stft_space: Vec<GridAxis>,
    pub stft_freq: Vec<GridAxis>,
    pub windows: AtomWindows,
    pub constants: FixedConstants,
    pub weight: WeightSpec,
    /// b is drawn from [-B, B].
    pub b_truncation: f64,
    /// Inverse-CDF table resolution for the b-density.
    pub b_table_size: usize,
    /// For the whole-space dictionary variant: restrict spatial shifts to
    /// this box (cells outside get zero mass).
    pub spatial_restriction: Option<Vec<(f64, f64)>>,
    pub tail_threshold: f64,
}

impl SamplingPlan {
    /// Default 1-D plan over the standard analysis box.
    pub fn default_1d(weight: WeightSpec) -> Self {
        let (space, freq) = crate::stft::default_stft_axes();
        SamplingPlan {
            stft_space: vec![space],
            stft_freq: vec![freq],
            windows: AtomWindows::canonical(),
            constants: FixedConstants::default_experiment(),
            weight,
            b_truncation: 40.0,
            b_table_size: 4096,
            spatial_restriction: None,
            tail_threshold: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SamplerError {
    /// The signal has no mass on the sampling grid.
    Degenerate,
    Transform(TfError),
    Dictionary(String),
    /// Term-count lists must have >= 4 entries in roughly geometric
    /// progression.
    BadTermCounts(String),
    Sobolev(SobolevError),
}

impl std::fmt::Display for SamplerError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplerError::Degenerate => write!(f, "sampler mass is zero (signal vanishes on the grid)"),
            SamplerError::Transform(e) => write!(f, "{e}"),
            SamplerError::Dictionary(e) => write!(f, "{e}"),
            SamplerError::BadTermCounts(msg) => write!(f, "term counts: {msg}"),
            SamplerError::Sobolev(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SamplerError {}

impl From<TfError> for SamplerError {
    fn from(e: TfError) -> Self {
        SamplerError::Transform(e)
    }
}

impl From<DictionaryError> for SamplerError {
    fn from(e: DictionaryError) -> Self {
        SamplerError::Dictionary(e.to_string())
    }
}

impl From<SobolevError> for SamplerError {
    fn from(e: SobolevError) -> Self {
        SamplerError::Sobolev(e)
    }
}

/// Tabulated cumulative of a symmetric density on [0, upto].
#[derive(Clone, Debug)]
struct CdfTable {
    step: f64,
    cum: Vec<f64>,
}

impl CdfTable {
    fn build(g: impl Fn(f64) -> f64, upto: f64, nodes: usize) -> Self {
        assert!(nodes >= 2 && upto > 0.0);
        let step = upto / (nodes - 1) as f64;
        let mut cum = Vec::with_capacity(nodes);
        cum.push(0.0);
        let mut prev = g(0.0);
        let mut acc = 0.0;
        for i in 1..nodes {
            let cur = g(step * i as f64);
            acc += 0.5 * (prev + cur) * step;
            cum.push(acc);
            prev = cur;
        }
        CdfTable { step, cum }
    }

    /// Mass of [0, upto], clamped to the table range.
    fn mass(&self, upto: f64) -> f64 {
        if upto <= 0.0 {
            return 0.0;
        }
        let rel = upto / self.step;
        let i = rel.floor() as usize;
        if i + 1 >= self.cum.len() {
            return *self.cum.last().unwrap();
        }
        let frac = rel - i as f64;
        self.cum[i] + frac * (self.cum[i + 1] - self.cum[i])
    }

    /// u with cumulative(u) = target, for target within [0, mass(limit)].
    fn inverse(&self, target: f64, limit: f64) -> f64 {
        let target = target.max(0.0).min(self.mass(limit));
        let idx = self.cum.partition_point(|&c| c < target);
        if idx == 0 {
            return 0.0;
        }
        let (lo, hi) = (self.cum[idx - 1], self.cum[idx]);
        let frac = if hi > lo { (target - lo) / (hi - lo) } else { 0.0 };
        ((idx - 1) as f64 + frac) * self.step
    }
}

#[derive(Clone, Debug)]
struct Cell {
    y: Vec<f64>,
    eta: Vec<f64>,
    /// Unit phase of V_phi f / V_phi sigma at this cell.
    phase: Complex64,
    /// Half-width of the flat region (local weight) at this eta.
    flat_halfwidth: f64,
}

/// A discrete sampling distribution over dictionary parameters derived
/// from one signal.
#[derive(Clone, Debug)]
pub struct AtomSampler {
    cells: Vec<Cell>,
    /// Cumulative raw cell masses (unnormalized).
    cum: Vec<f64>,
    total_raw: f64,
    /// Total-variation estimate of the representing measure; the l1 budget
    /// of every sampled approximant.
    m_hat: f64,
    b_table: CdfTable,
    plan: SamplingPlan,
}

/// Builds the discrete sampler for `f` under `plan`.
pub fn build_sampler(f: &SampledField, plan: &SamplingPlan) -> Result<AtomSampler, SamplerError> {
    let grid = stft(f, plan.windows.spatial, &plan.stft_space, &plan.stft_freq, plan.tail_threshold)?;
    build_sampler_from_grid(grid, plan)
}

/// Sampler from an already-computed transform grid (window must match the
/// plan's spatial window).
pub fn build_sampler_from_grid(
    grid: StftGrid,
    plan: &SamplingPlan,
) -> Result<AtomSampler, SamplerError> {
    let b_max = plan.b_truncation;
    let b_table = match plan.weight {
        WeightSpec::Local(w) => {
            let pw = PolyWeight::new(w.s);
            CdfTable::build(move |u| pw.eval_scalar(u), b_max, plan.b_table_size)
        }
        WeightSpec::Global(w) => {
            let pw = PolyWeight::new(-w.s);
            CdfTable::build(move |u| pw.eval_scalar(u), b_max, plan.b_table_size)
        }
    };

    let space_nodes = axis_nodes(&grid.space);
    let freq_nodes = axis_nodes(&grid.freq);
    let space_weights = axis_weights(&grid.space);
    let freq_weights = axis_weights(&grid.freq);

    let mut cells = Vec::new();
    let mut cum = Vec::new();
    let mut total = 0.0f64;
    for (si, y) in space_nodes.iter().enumerate() {
        if let Some(boxes) = &plan.spatial_restriction {
            let inside = y.iter().zip(boxes).all(|(v, (lo, hi))| v >= lo && v <= hi);
            if !inside {
                continue;
            }
        }
        for (fi, eta) in freq_nodes.iter().enumerate() {
            let v = grid.at(si, fi);
            let modulus = v.norm();
            if modulus == 0.0 {
                continue;
            }
            let (b_mass, flat_halfwidth) = match plan.weight {
                WeightSpec::Local(w) => {
                    let fw = w.flat_halfwidth(eta, plan.constants.tau);
                    let flat = fw.min(b_max);
                    let tail = if b_max > fw { b_table.mass(b_max - fw) } else { 0.0 };
                    let vn = PolyWeight::new(w.n as f64).eval(eta);
                    (2.0 * vn * (flat + tail), fw)
                }
                WeightSpec::Global(w) => {
                    let vns = PolyWeight::new(w.n as f64 + w.s).eval(eta);
                    (2.0 * vns * b_table.mass(b_max), 0.0)
                }
            };
            let mass = modulus * b_mass * space_weights[si] * freq_weights[fi];
            if mass <= 0.0 {
                continue;
            }
            total += mass;
            cum.push(total);
            let dir = v / plan.constants.v_sigma;
            cells.push(Cell {
                y: y.clone(),
                eta: eta.clone(),
                phase: dir / dir.norm(),
                flat_halfwidth,
            });
        }
    }
    if total <= 0.0 {
        return Err(SamplerError::Degenerate);
    }
    // Constant factors of the measure: the transform normalization and the
    // window self-inner product of the inversion formula.
    let inv_scale = 1.0 / plan.windows.spatial.inner(plan.windows.spatial, grid.dim());
    let m_hat = plan.constants.normalization() * inv_scale * total;
    Ok(AtomSampler { cells, cum, total_raw: total, m_hat, b_table, plan: plan.clone() })
}

impl AtomSampler {
    /// Total-variation estimate of the representing measure.
    pub fn mass(&self) -> f64 {
        self.m_hat
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Test hook: rescale the recorded mass (and with it every sampled
    /// coefficient) without touching the sampling distribution.
    pub fn scale_mass(&mut self, factor: f64) {
        assert!(factor > 0.0);
        self.m_hat *= factor;
    }

    /// Fraction of sampler mass within `cells` grid cells (Chebyshev
    /// distance) of the phase-space point `(y0, eta0)`.
    pub fn mass_fraction_near(&self, y0: &[f64], eta0: &[f64], cells: f64) -> f64 {
        let dy = self.plan.stft_space[0].step * cells;
        let de = self.plan.stft_freq[0].step * cells;
        let mut near = 0.0;
        let mut prev = 0.0;
        for (i, cell) in self.cells.iter().enumerate() {
            let mass = self.cum[i] - prev;
            prev = self.cum[i];
            let close_y = cell.y.iter().zip(y0).all(|(a, b)| (a - b).abs() <= dy + 1e-12);
            let close_e = cell.eta.iter().zip(eta0).all(|(a, b)| (a - b).abs() <= de + 1e-12);
            if close_y && close_e {
                near += mass;
            }
        }
        near / self.total_raw
    }

    /// Draws `n` i.i.d. atoms. Deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Approximant {
        assert!(n >= 1);
        let mut rng = Xoshiro256::seed_from(seed);
        let b_max = self.plan.b_truncation;
        let coeff_scale = self.m_hat / n as f64;
        let mut atoms = Vec::with_capacity(n);
        for _ in 0..n {
            let u = rng.uniform01() * self.total_raw;
            let idx = self.cum.partition_point(|&c| c < u).min(self.cells.len() - 1);
            let cell = &self.cells[idx];
            let b_abs = match self.plan.weight {
                WeightSpec::Local(_) => {
                    let fw = cell.flat_halfwidth;
                    let flat = fw.min(b_max);
                    let tail_len = (b_max - fw).max(0.0);
                    let tail = self.b_table.mass(tail_len);
                    let r = rng.uniform01() * (flat + tail);
                    if r < flat {
                        r
                    } else {
                        fw + self.b_table.inverse(r - flat, tail_len)
                    }
                }
                WeightSpec::Global(_) => {
                    let total = self.b_table.mass(b_max);
                    self.b_table.inverse(rng.uniform01() * total, b_max)
                }
            };
            let b = if rng.uniform01() < 0.5 { -b_abs } else { b_abs };
            let osc = Complex64::from_polar(1.0, -2.0 * PI * b * self.plan.constants.tau);
            let phase = cell.phase * osc;
            let params = AtomParams { y: cell.y.clone(), eta: cell.eta.clone(), b };
            let theta = self.plan.weight.eval(&params.eta, b, self.plan.constants.tau);
            atoms.push(WeightedAtom { params, coeff: coeff_scale * phase, theta });
        }
        Approximant {
            atoms,
            offset: 0.0,
            constants: self.plan.constants,
            windows: self.plan.windows,
            budget: self.m_hat,
        }
    }
}

fn axis_nodes(axes: &[GridAxis]) -> Vec<Vec<f64>> {
    match axes.len() {
        1 => axes[0].points().map(|x| vec![x]).collect(),
        2 => {
            let mut out = Vec::with_capacity(axes[0].len * axes[1].len);
            for a in axes[0].points() {
                for b in axes[1].points() {
                    out.push(vec![a, b]);
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

fn axis_weights(axes: &[GridAxis]) -> Vec<f64> {
    match axes.len() {
        1 => crate::quad::trapezoid_weights(axes[0].len, axes[0].step),
        2 => {
            let w0 = crate::quad::trapezoid_weights(axes[0].len, axes[0].step);
            let w1 = crate::quad::trapezoid_weights(axes[1].len, axes[1].step);
            let mut out = Vec::with_capacity(w0.len() * w1.len());
            for a in &w0 {
                for b in &w1 {
                    out.push(a * b);
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

/// One sampled atom with its coefficient and the weight value dividing it
/// during evaluation (the approximant sums weighted atoms `rho / theta`).
#[derive(Clone, Debug)]
pub struct WeightedAtom {
    pub params: AtomParams,
    pub coeff: Complex64,
    pub theta: f64,
}

/// An N-term approximant: the real part of a complex atom combination,
/// with the l1 coefficient budget recorded.
#[derive(Clone, Debug)]
pub struct Approximant {
    pub atoms: Vec<WeightedAtom>,
    pub offset: f64,
    pub constants: FixedConstants,
    pub windows: AtomWindows,
    /// Mass estimate the coefficients were scaled by (the l1 budget).
    pub budget: f64,
}

impl Approximant {
    pub fn term_count(&self) -> usize {
        self.atoms.len()
    }

    /// Sum of coefficient moduli; equals the recorded budget by
    /// construction (each of the N coefficients has modulus budget / N).
    pub fn coeff_l1(&self) -> f64 {
        self.atoms.iter().map(|a| a.coeff.norm()).sum()
    }

    /// Value and gradient at `x`.
    pub fn eval_with_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let d = x.len();
        let mut value = self.offset;
        let mut grad = vec![0.0; d];
        let sigma = ActivationKind::Relu;
        for atom in &self.atoms {
            let jet = atom_grad(&atom.params, &self.constants, &sigma, self.windows, x, 1)
                .expect("order 1 always supported");
            // real part of coeff * rho / theta
            let scale = atom.coeff.re / atom.theta;
            value += scale * jet[0];
            for i in 0..d {
                grad[i] += scale * jet[1 + i];
            }
        }
        (value, grad)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_with_grad(x).0
    }

    /// Value/gradient channels at shared points, for Sobolev errors.
    pub fn channels(&self, points: &EvalPoints) -> FieldSamples {
        let d = points.dim;
        let mut values = Vec::with_capacity(points.len());
        let mut grads: Vec<Vec<f64>> = vec![Vec::with_capacity(points.len()); d];
        for i in 0..points.len() {
            let (v, g) = self.eval_with_grad(points.point(i));
            values.push(v);
            for k in 0..d {
                grads[k].push(g[k]);
            }
        }
        let mut channels = vec![values];
        channels.extend(grads);
        FieldSamples { channels }
    }

    /// CSV rows: spatial shift coordinates, frequency coordinates, bias,
    /// coefficient re/im.
    pub fn csv(&self) -> String {
        let d = self.atoms.first().map(|a| a.params.dim()).unwrap_or(1);
        let mut header = Vec::new();
        for i in 0..d {
            header.push(format!("y{i}"));
        }
        for i in 0..d {
            header.push(format!("eta{i}"));
        }
        header.push("b".into());
        header.push("coeff_re".into());
        header.push("coeff_im".into());
        let mut out = header.join(",");
        out.push('\n');
        for atom in &self.atoms {
            let mut row = Vec::new();
            for v in &atom.params.y {
                row.push(format!("{v}"));
            }
            for v in &atom.params.eta {
                row.push(format!("{v}"));
            }
            row.push(format!("{}", atom.params.b));
            row.push(format!("{}", atom.coeff.re));
            row.push(format!("{}", atom.coeff.im));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Rate experiment configuration.
#[derive(Clone, Debug)]
pub struct RateExperimentConfig {
    pub term_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    pub sobolev: SobolevSpec,
    /// Grid nodes per axis for the error quadrature.
    pub eval_resolution: usize,
}

/// Per-run record of the experiment.
#[derive(Clone, Debug)]
pub struct RateOutcome {
    pub report: RateReport,
    pub errors: Vec<(usize, Vec<f64>)>,
}

/// Validates the term-count ladder: at least 4, strictly increasing, and
/// roughly geometric.
pub fn validate_term_counts(counts: &[usize]) -> Result<(), SamplerError> {
    if counts.len() < 4 {
        return Err(SamplerError::BadTermCounts(format!(
            "need at least 4 values, got {}",
            counts.len()
        )));
    }
    for w in counts.windows(2) {
        if w[1] <= w[0] {
            return Err(SamplerError::BadTermCounts("must be strictly increasing".into()));
        }
        let ratio = w[1] as f64 / w[0] as f64;
        if !(1.2..=8.0).contains(&ratio) {
            return Err(SamplerError::BadTermCounts(format!(
                "spacing must be roughly geometric; ratio {ratio} out of [1.2, 8]"
            )));
        }
    }
    Ok(())
}

/// Samples approximants across `(N, seed)`, evaluates Sobolev errors
/// against the target, aggregates medians, and fits the decay exponent.
///
/// The same seed is reused across N (common random numbers), which couples
/// the error curves across the ladder without biasing any single error.
pub fn rate_experiment(
    target: &Target,
    sampler: &AtomSampler,
    cfg: &RateExperimentConfig,
) -> Result<RateOutcome, SamplerError> {
    validate_term_counts(&cfg.term_counts)?;
    assert!(!cfg.seeds.is_empty(), "need at least one seed");
    let points = EvalPoints::grid(&cfg.sobolev, cfg.eval_resolution);
    let target_channels = target.channels(&points);
    let mut errors: Vec<(usize, Vec<f64>)> = Vec::with_capacity(cfg.term_counts.len());
    for &n in &cfg.term_counts {
        let mut per_seed = Vec::with_capacity(cfg.seeds.len());
        for &seed in &cfg.seeds {
            let approx = sampler.sample(n, seed);
            let channels = approx.channels(&points);
            let err = sobolev_error(&channels, &target_channels, &points, &cfg.sobolev)?;
            per_seed.push(err);
        }
        errors.push((n, per_seed));
    }
    let report = RateReport::from_errors(&errors)?;
    Ok(RateOutcome { report, errors })
}
