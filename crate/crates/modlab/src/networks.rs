//! The two benchmark architectures: a shallow network of windowed ReLU
//! atoms ("modulation network") and a plain shallow ReLU network, with
//! forward evaluation, analytic input gradients, and hand-derived
//! parameter gradients of the derivative-supervised loss
//!
//! ```text
//! L = mean_i [ (u(x_i) - f(x_i))^2 + |grad u(x_i) - grad f(x_i)|^2 ]
//! ```
//!
//! No autodiff: the backward passes are written out and checked against
//! central finite differences. ReLU kinks use the right-derivative
//! convention shared with the dictionary module.
//!
//! Flattened parameter layout (checkpoints, optimizer state):
//! modulation: per unit `[eta (d), b, y (d), a]`, then the offset `c`;
//! plain: per unit `[omega (d), m, zeta]`, then the offset `z`.

use crate::rng::Xoshiro256;
use crate::windows::{relu, relu_deriv};
use std::io::{Read, Write};

/// Training batch with target values and gradients at each input.
#[derive(Clone, Debug)]
pub struct Batch {
    pub dim: usize,
    /// `count * dim` inputs, point-major.
    pub inputs: Vec<f64>,
    pub values: Vec<f64>,
    /// `count * dim` target gradients, point-major.
    pub grads: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn grad(&self, i: usize) -> &[f64] {
        &self.grads[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NetError {
    EmptyBatch,
    DimMismatch { expected: usize, got: usize },
    BadCheckpoint(String),
    Io(String),
}

impl std::fmt::Display for NetError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NetError::EmptyBatch => write!(f, "training batch is empty"),
            NetError::DimMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            NetError::BadCheckpoint(msg) => write!(f, "bad checkpoint: {msg}"),
            NetError::Io(msg) => write!(f, "checkpoint io: {msg}"),
        }
    }
}

impl std::error::Error for NetError {}

impl From<std::io::Error> for NetError {
    fn from(e: std::io::Error) -> Self {
        NetError::Io(e.to_string())
    }
}

/// Modulation network: `u(x) = sum_k a_k ReLU(g_k) e^(-(g_k - t)^2 / 2)
/// e^(-|x - y_k|^2 / 2) + c` with `g_k = eta_k . x / tau + b_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModNetParams {
    pub dim: usize,
    pub units: usize,
    pub eta: Vec<f64>,
    pub b: Vec<f64>,
    pub y: Vec<f64>,
    pub a: Vec<f64>,
    pub c: f64,
    /// Fixed window center; not trained.
    pub t: f64,
    /// Fixed frequency scale; not trained.
    pub tau: f64,
}

impl ModNetParams {
    /// Seeded initialization: `eta ~ U[-3,3]^d`, `b ~ U[-3,3]`,
    /// `y ~ U(domain)`, `a ~ N(0, 1/units)`, `c = 0`.
    pub fn init(
        dim: usize,
        units: usize,
        domain: &[(f64, f64)],
        t: f64,
        tau: f64,
        rng: &mut Xoshiro256,
    ) -> Self {
        assert_eq!(domain.len(), dim);
        let mut eta = Vec::with_capacity(units * dim);
        let mut b = Vec::with_capacity(units);
        let mut y = Vec::with_capacity(units * dim);
        let mut a = Vec::with_capacity(units);
        let scale = (1.0 / units as f64).sqrt();
        for _ in 0..units {
            for _ in 0..dim {
                eta.push(rng.uniform(-3.0, 3.0));
            }
            b.push(rng.uniform(-3.0, 3.0));
            for &(lo, hi) in domain {
                y.push(rng.uniform(lo, hi));
            }
            a.push(scale * rng.normal());
        }
        ModNetParams { dim, units, eta, b, y, a, c: 0.0, t, tau }
    }

    pub fn param_count(&self) -> usize {
        self.units * (2 * self.dim + 2) + 1
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for k in 0..self.units {
            out.extend_from_slice(&self.eta[k * self.dim..(k + 1) * self.dim]);
            out.push(self.b[k]);
            out.extend_from_slice(&self.y[k * self.dim..(k + 1) * self.dim]);
            out.push(self.a[k]);
        }
        out.push(self.c);
        out
    }

    pub fn unflatten(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        let mut pos = 0;
        for k in 0..self.units {
            self.eta[k * self.dim..(k + 1) * self.dim]
                .copy_from_slice(&flat[pos..pos + self.dim]);
            pos += self.dim;
            self.b[k] = flat[pos];
            pos += 1;
            self.y[k * self.dim..(k + 1) * self.dim].copy_from_slice(&flat[pos..pos + self.dim]);
            pos += self.dim;
            self.a[k] = flat[pos];
            pos += 1;
        }
        self.c = flat[pos];
    }

    /// Value and input gradient at `x`.
    pub fn forward(&self, x: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(x.len(), self.dim);
        let d = self.dim;
        let mut value = self.c;
        let mut grad = vec![0.0; d];
        for k in 0..self.units {
            let eta = &self.eta[k * d..(k + 1) * d];
            let y = &self.y[k * d..(k + 1) * d];
            let g: f64 = eta.iter().zip(x).map(|(e, xi)| e * xi).sum::<f64>() / self.tau
                + self.b[k];
            let r = relu(g);
            let s = relu_deriv(g);
            let w = (-0.5 * (g - self.t) * (g - self.t)).exp();
            let mut sq = 0.0;
            for i in 0..d {
                let diff = x[i] - y[i];
                sq += diff * diff;
            }
            let gw = (-0.5 * sq).exp();
            let h = r * w;
            let q = w * (s - r * (g - self.t));
            value += self.a[k] * h * gw;
            for i in 0..d {
                grad[i] +=
                    self.a[k] * (q * eta[i] / self.tau * gw - h * gw * (x[i] - y[i]));
            }
        }
        (value, grad)
    }
}

/// Plain shallow ReLU network: `u(x) = sum_k zeta_k ReLU(omega_k . x + m_k) + z`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlainNetParams {
    pub dim: usize,
    pub units: usize,
    pub omega: Vec<f64>,
    pub m: Vec<f64>,
    pub zeta: Vec<f64>,
    pub z: f64,
}

impl PlainNetParams {
    /// Seeded initialization: `omega ~ U[-3,3]^d`, `m ~ U[-3,3]`,
    /// `zeta ~ N(0, 1/units)`, `z = 0`.
    pub fn init(dim: usize, units: usize, rng: &mut Xoshiro256) -> Self {
        let mut omega = Vec::with_capacity(units * dim);
        let mut m = Vec::with_capacity(units);
        let mut zeta = Vec::with_capacity(units);
        let scale = (1.0 / units as f64).sqrt();
        for _ in 0..units {
            for _ in 0..dim {
                omega.push(rng.uniform(-3.0, 3.0));
            }
            m.push(rng.uniform(-3.0, 3.0));
            zeta.push(scale * rng.normal());
        }
        PlainNetParams { dim, units, omega, m, zeta, z: 0.0 }
    }

    pub fn param_count(&self) -> usize {
        self.units * (self.dim + 2) + 1
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for k in 0..self.units {
            out.extend_from_slice(&self.omega[k * self.dim..(k + 1) * self.dim]);
            out.push(self.m[k]);
            out.push(self.zeta[k]);
        }
        out.push(self.z);
        out
    }

    pub fn unflatten(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        let mut pos = 0;
        for k in 0..self.units {
            self.omega[k * self.dim..(k + 1) * self.dim]
                .copy_from_slice(&flat[pos..pos + self.dim]);
            pos += self.dim;
            self.m[k] = flat[pos];
            pos += 1;
            self.zeta[k] = flat[pos];
            pos += 1;
        }
        self.z = flat[pos];
    }

    pub fn forward(&self, x: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(x.len(), self.dim);
        let d = self.dim;
        let mut value = self.z;
        let mut grad = vec![0.0; d];
        for k in 0..self.units {
            let omega = &self.omega[k * d..(k + 1) * d];
            let g: f64 = omega.iter().zip(x).map(|(o, xi)| o * xi).sum::<f64>() + self.m[k];
            value += self.zeta[k] * relu(g);
            let s = relu_deriv(g);
            if s != 0.0 {
                for i in 0..d {
                    grad[i] += self.zeta[k] * omega[i];
                }
            }
        }
        (value, grad)
    }
}

/// Either architecture behind one training interface.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Modulation(ModNetParams),
    Plain(PlainNetParams),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Modulation(p) => p.dim,
            Model::Plain(p) => p.dim,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Model::Modulation(p) => p.param_count(),
            Model::Plain(p) => p.param_count(),
        }
    }

    pub fn forward(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Model::Modulation(p) => p.forward(x),
            Model::Plain(p) => p.forward(x),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        match self {
            Model::Modulation(p) => p.flatten(),
            Model::Plain(p) => p.flatten(),
        }
    }

    pub fn unflatten(&mut self, flat: &[f64]) {
        match self {
            Model::Modulation(p) => p.unflatten(flat),
            Model::Plain(p) => p.unflatten(flat),
        }
    }

    /// Loss and flattened parameter gradient over the full batch.
    pub fn loss_and_grad(&self, batch: &Batch) -> Result<(f64, Vec<f64>), NetError> {
        if batch.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        if batch.dim != self.dim() {
            return Err(NetError::DimMismatch { expected: self.dim(), got: batch.dim });
        }
        match self {
            Model::Modulation(p) => Ok(modnet_loss_grad(p, batch)),
            Model::Plain(p) => Ok(plainnet_loss_grad(p, batch)),
        }
    }

    /// Checkpoint: kind, dim, units, fixed constants (modulation only),
    /// then the flattened parameters, all little-endian.
    pub fn write_checkpoint<W: Write>(&self, out: &mut W) -> Result<(), NetError> {
        let (kind, dim, units): (u64, u64, u64) = match self {
            Model::Modulation(p) => (0, p.dim as u64, p.units as u64),
            Model::Plain(p) => (1, p.dim as u64, p.units as u64),
        };
        out.write_all(&kind.to_le_bytes())?;
        out.write_all(&dim.to_le_bytes())?;
        out.write_all(&units.to_le_bytes())?;
        if let Model::Modulation(p) = self {
            out.write_all(&p.t.to_le_bytes())?;
            out.write_all(&p.tau.to_le_bytes())?;
        }
        for v in self.flatten() {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(input: &mut R) -> Result<Self, NetError> {
        let kind = read_u64(input)?;
        let dim = read_u64(input)? as usize;
        let units = read_u64(input)? as usize;
        if dim == 0 || dim > 2 || units == 0 {
            return Err(NetError::BadCheckpoint(format!("dim {dim}, units {units}")));
        }
        let mut model = match kind {
            0 => {
                let t = read_f64(input)?;
                let tau = read_f64(input)?;
                Model::Modulation(ModNetParams {
                    dim,
                    units,
                    eta: vec![0.0; units * dim],
                    b: vec![0.0; units],
                    y: vec![0.0; units * dim],
                    a: vec![0.0; units],
                    c: 0.0,
                    t,
                    tau,
                })
            }
            1 => Model::Plain(PlainNetParams {
                dim,
                units,
                omega: vec![0.0; units * dim],
                m: vec![0.0; units],
                zeta: vec![0.0; units],
                z: 0.0,
            }),
            other => return Err(NetError::BadCheckpoint(format!("unknown kind {other}"))),
        };
        let count = model.param_count();
        let mut flat = Vec::with_capacity(count);
        for _ in 0..count {
            flat.push(read_f64(input)?);
        }
        model.unflatten(&flat);
        Ok(model)
    }
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64, NetError> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64, NetError> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn modnet_loss_grad(p: &ModNetParams, batch: &Batch) -> (f64, Vec<f64>) {
    let d = p.dim;
    let count = batch.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; p.param_count()];
    let c_slot = grad.len() - 1;
    // per-unit scratch reused across points
    let mut scratch = vec![UnitScratch::default(); p.units];
    let mut u_grad = vec![0.0; d];
    for pt in 0..batch.len() {
        let x = batch.input(pt);
        let mut u_val = p.c;
        for g in u_grad.iter_mut() {
            *g = 0.0;
        }
        for k in 0..p.units {
            let eta = &p.eta[k * d..(k + 1) * d];
            let y = &p.y[k * d..(k + 1) * d];
            let g: f64 =
                eta.iter().zip(x).map(|(e, xi)| e * xi).sum::<f64>() / p.tau + p.b[k];
            let r = relu(g);
            let s = relu_deriv(g);
            let gt = g - p.t;
            let w = (-0.5 * gt * gt).exp();
            let mut sq = 0.0;
            for i in 0..d {
                let diff = x[i] - y[i];
                sq += diff * diff;
            }
            let gw = (-0.5 * sq).exp();
            let h = r * w;
            let q = w * (s - r * gt);
            // h'' a.e.: w [ r (gt^2 - 1) - 2 s gt ]
            let h2 = w * (r * (gt * gt - 1.0) - 2.0 * s * gt);
            scratch[k] = UnitScratch { gw, h, q, h2 };
            u_val += p.a[k] * h * gw;
            for i in 0..d {
                u_grad[i] += p.a[k] * (q * eta[i] / p.tau * gw - h * gw * (x[i] - y[i]));
            }
        }
        let ev = u_val - batch.values[pt];
        loss += ev * ev;
        let tg = batch.grad(pt);
        let mut eg = vec![0.0; d];
        for i in 0..d {
            eg[i] = u_grad[i] - tg[i];
            loss += eg[i] * eg[i];
        }
        // backward
        let base_scale = 2.0 / count;
        for k in 0..p.units {
            let sc = &scratch[k];
            let eta = &p.eta[k * d..(k + 1) * d];
            let y = &p.y[k * d..(k + 1) * d];
            let a = p.a[k];
            let slot = k * (2 * d + 2);
            // d u / d theta and d grad_i u / d theta accumulated into
            // dL = base_scale (ev du + sum_i eg_i dgrad_i)
            // a_k
            {
                let mut acc = ev * sc.h * sc.gw;
                for i in 0..d {
                    let da_grad =
                        sc.q * eta[i] / p.tau * sc.gw - sc.h * sc.gw * (x[i] - y[i]);
                    acc += eg[i] * da_grad;
                }
                grad[slot + 2 * d + 1] += base_scale * acc;
            }
            // b_k
            {
                let mut acc = ev * a * sc.q * sc.gw;
                for i in 0..d {
                    let db_grad = a
                        * (sc.h2 * eta[i] / p.tau * sc.gw
                            - sc.q * sc.gw * (x[i] - y[i]));
                    acc += eg[i] * db_grad;
                }
                grad[slot + d] += base_scale * acc;
            }
            // eta_{k,j}
            for j in 0..d {
                let xj_tau = x[j] / p.tau;
                let mut acc = ev * a * sc.q * xj_tau * sc.gw;
                for i in 0..d {
                    let mut de_grad = sc.h2 * xj_tau * eta[i] / p.tau * sc.gw
                        - sc.q * xj_tau * sc.gw * (x[i] - y[i]);
                    if i == j {
                        de_grad += sc.q * sc.gw / p.tau;
                    }
                    acc += eg[i] * a * de_grad;
                }
                grad[slot + j] += base_scale * acc;
            }
            // y_{k,j}
            for j in 0..d {
                let dj = x[j] - y[j];
                let mut acc = ev * a * sc.h * sc.gw * dj;
                for i in 0..d {
                    let mut dy_grad = sc.q * eta[i] / p.tau * sc.gw * dj
                        - sc.h * sc.gw * dj * (x[i] - y[i]);
                    if i == j {
                        dy_grad += sc.h * sc.gw;
                    }
                    acc += eg[i] * a * dy_grad;
                }
                grad[slot + d + 1 + j] += base_scale * acc;
            }
        }
        grad[c_slot] += base_scale * ev;
    }
    (loss / count, grad)
}

/// Per-unit forward intermediates reused by the backward pass: the spatial
/// window `gw`, the windowed activation `h = r w`, and its first two
/// response derivatives `q = h'`, `h2 = h''`.
#[derive(Clone, Copy, Debug, Default)]
struct UnitScratch {
    gw: f64,
    h: f64,
    q: f64,
    h2: f64,
}

fn plainnet_loss_grad(p: &PlainNetParams, batch: &Batch) -> (f64, Vec<f64>) {
    let d = p.dim;
    let count = batch.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; p.param_count()];
    let z_slot = grad.len() - 1;
    let mut acts = vec![(0.0f64, 0.0f64); p.units]; // (relu, step)
    let mut u_grad = vec![0.0; d];
    for pt in 0..batch.len() {
        let x = batch.input(pt);
        let mut u_val = p.z;
        for g in u_grad.iter_mut() {
            *g = 0.0;
        }
        for k in 0..p.units {
            let omega = &p.omega[k * d..(k + 1) * d];
            let g: f64 = omega.iter().zip(x).map(|(o, xi)| o * xi).sum::<f64>() + p.m[k];
            let r = relu(g);
            let s = relu_deriv(g);
            acts[k] = (r, s);
            u_val += p.zeta[k] * r;
            if s != 0.0 {
                for i in 0..d {
                    u_grad[i] += p.zeta[k] * omega[i];
                }
            }
        }
        let ev = u_val - batch.values[pt];
        loss += ev * ev;
        let tg = batch.grad(pt);
        let mut eg = vec![0.0; d];
        for i in 0..d {
            eg[i] = u_grad[i] - tg[i];
            loss += eg[i] * eg[i];
        }
        let base_scale = 2.0 / count;
        for k in 0..p.units {
            let (r, s) = acts[k];
            let omega = &p.omega[k * d..(k + 1) * d];
            let slot = k * (d + 2);
            // omega_j: du = zeta s x_j, dgrad_i = zeta s delta_ij (a.e.)
            if s != 0.0 {
                for j in 0..d {
                    let acc = ev * p.zeta[k] * x[j] + eg[j] * p.zeta[k];
                    grad[slot + j] += base_scale * acc;
                }
                grad[slot + d] += base_scale * ev * p.zeta[k];
            }
            // zeta: du = r, dgrad_i = s omega_i
            {
                let mut acc = ev * r;
                if s != 0.0 {
                    for i in 0..d {
                        acc += eg[i] * omega[i];
                    }
                }
                grad[slot + d + 1] += base_scale * acc;
            }
        }
        grad[z_slot] += base_scale * ev;
    }
    (loss / count, grad)
}
