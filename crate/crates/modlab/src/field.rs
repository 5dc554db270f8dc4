//! Sampled complex fields on rectangular grids, the discretization carrier
//! for signals and their transforms.
//!
//! Binary layout (little-endian): `u64 dim`, then per axis `u64 len`,
//! `f64 origin`, `f64 spacing`, then the samples as interleaved re/im
//! `f64` pairs in row-major order. CSV export is one row per grid point:
//! the coordinates, then re, then im.

use num_complex::Complex64;
use std::io::{self, Read, Write};

/// One uniform grid axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridAxis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl GridAxis {
    /// Axis over [lo, hi] with `len` nodes (len >= 2).
    pub fn span(lo: f64, hi: f64, len: usize) -> Self {
        assert!(len >= 2, "axis needs at least two nodes");
        assert!(hi > lo, "axis span must be nonempty");
        GridAxis { start: lo, step: (hi - lo) / (len - 1) as f64, len }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.point(i))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldError {
    ShapeMismatch { expected: usize, got: usize },
    BadHeader(String),
    Io(String),
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldError::ShapeMismatch { expected, got } => {
                write!(f, "value count {got} does not match grid size {expected}")
            }
            FieldError::BadHeader(msg) => write!(f, "bad field header: {msg}"),
            FieldError::Io(msg) => write!(f, "field io: {msg}"),
        }
    }
}

impl std::error::Error for FieldError {}

impl From<io::Error> for FieldError {
    fn from(e: io::Error) -> Self {
        FieldError::Io(e.to_string())
    }
}

/// Complex samples on a 1- or 2-dimensional uniform grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    axes: Vec<GridAxis>,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(axes: Vec<GridAxis>, values: Vec<Complex64>) -> Result<Self, FieldError> {
        assert!(
            axes.len() == 1 || axes.len() == 2,
            "only 1- and 2-dimensional fields are supported"
        );
        for ax in &axes {
            assert!(ax.step > 0.0, "axis spacing must be positive");
            assert!(ax.len >= 1);
        }
        let expected: usize = axes.iter().map(|a| a.len).product();
        if values.len() != expected {
            return Err(FieldError::ShapeMismatch { expected, got: values.len() });
        }
        Ok(SampledField { axes, values })
    }

    /// Sample a scalar function on a 1-D axis.
    pub fn from_fn_1d<F: Fn(f64) -> f64>(axis: GridAxis, f: F) -> Self {
        let values = axis.points().map(|t| Complex64::new(f(t), 0.0)).collect();
        SampledField { axes: vec![axis], values }
    }

    /// Sample a complex function on a 1-D axis.
    pub fn from_complex_fn_1d<F: Fn(f64) -> Complex64>(axis: GridAxis, f: F) -> Self {
        let values = axis.points().map(f).collect();
        SampledField { axes: vec![axis], values }
    }

    /// Sample a scalar function on a 2-D grid (row-major: first axis outer).
    pub fn from_fn_2d<F: Fn(f64, f64) -> f64>(ax0: GridAxis, ax1: GridAxis, f: F) -> Self {
        let mut values = Vec::with_capacity(ax0.len * ax1.len);
        for i in 0..ax0.len {
            for j in 0..ax1.len {
                values.push(Complex64::new(f(ax0.point(i), ax1.point(j)), 0.0));
            }
        }
        SampledField { axes: vec![ax0, ax1], values }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn origin(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.start).collect()
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.step).collect()
    }

    pub fn axis_lengths(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len).collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Largest |value| over the grid boundary, the quantity checked against
    /// the tail-truncation threshold before a transform.
    pub fn boundary_magnitude(&self) -> f64 {
        let mut worst: f64 = 0.0;
        match self.axes.len() {
            1 => {
                worst = worst.max(self.values[0].norm());
                worst = worst.max(self.values[self.values.len() - 1].norm());
            }
            2 => {
                let (n0, n1) = (self.axes[0].len, self.axes[1].len);
                for i in 0..n0 {
                    for j in 0..n1 {
                        if i == 0 || j == 0 || i == n0 - 1 || j == n1 - 1 {
                            worst = worst.max(self.values[i * n1 + j].norm());
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        worst
    }

    /// Grid L2 norm with trapezoid cell weights.
    pub fn l2_norm(&self) -> f64 {
        let weights = self.quadrature_weights();
        self.values
            .iter()
            .zip(weights)
            .map(|(v, w)| v.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Trapezoid quadrature weights per grid point, row-major.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|a| crate::quad::trapezoid_weights(a.len, a.step))
            .collect();
        match per_axis.len() {
            1 => per_axis[0].clone(),
            2 => {
                let mut out = Vec::with_capacity(self.values.len());
                for w0 in &per_axis[0] {
                    for w1 in &per_axis[1] {
                        out.push(w0 * w1);
                    }
                }
                out
            }
            _ => unreachable!(),
        }
    }

    pub fn write_binary<W: Write>(&self, out: &mut W) -> Result<(), FieldError> {
        out.write_all(&(self.axes.len() as u64).to_le_bytes())?;
        for ax in &self.axes {
            out.write_all(&(ax.len as u64).to_le_bytes())?;
        }
        for ax in &self.axes {
            out.write_all(&ax.start.to_le_bytes())?;
        }
        for ax in &self.axes {
            out.write_all(&ax.step.to_le_bytes())?;
        }
        for v in &self.values {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(input: &mut R) -> Result<Self, FieldError> {
        let dim = read_u64(input)? as usize;
        if dim != 1 && dim != 2 {
            return Err(FieldError::BadHeader(format!("dim {dim} not in {{1, 2}}")));
        }
        let lens: Vec<usize> = (0..dim)
            .map(|_| read_u64(input).map(|v| v as usize))
            .collect::<Result<_, _>>()?;
        let origins: Vec<f64> = (0..dim).map(|_| read_f64(input)).collect::<Result<_, _>>()?;
        let steps: Vec<f64> = (0..dim).map(|_| read_f64(input)).collect::<Result<_, _>>()?;
        let mut axes = Vec::with_capacity(dim);
        for k in 0..dim {
            if lens[k] == 0 || !steps[k].is_finite() || steps[k] <= 0.0 {
                return Err(FieldError::BadHeader(format!(
                    "axis {k}: len {} step {}",
                    lens[k], steps[k]
                )));
            }
            axes.push(GridAxis { start: origins[k], step: steps[k], len: lens[k] });
        }
        let count: usize = lens.iter().product();
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            let re = read_f64(input)?;
            let im = read_f64(input)?;
            values.push(Complex64::new(re, im));
        }
        SampledField::new(axes, values)
    }

    /// CSV rows: coordinates, re, im.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<(), FieldError> {
        match self.axes.len() {
            1 => {
                writeln!(out, "x,re,im")?;
                for (i, v) in self.values.iter().enumerate() {
                    writeln!(out, "{},{},{}", self.axes[0].point(i), v.re, v.im)?;
                }
            }
            2 => {
                writeln!(out, "x,y,re,im")?;
                let n1 = self.axes[1].len;
                for (idx, v) in self.values.iter().enumerate() {
                    let (i, j) = (idx / n1, idx % n1);
                    writeln!(
                        out,
                        "{},{},{},{}",
                        self.axes[0].point(i),
                        self.axes[1].point(j),
                        v.re,
                        v.im
                    )?;
                }
            }
            _ => unreachable!(),
        }
        Ok(())
    }
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64, FieldError> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64, FieldError> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shape_mismatch_is_rejected() {
        let err = SampledField::new(
            vec![GridAxis { start: 0.0, step: 1.0, len: 3 }],
            vec![Complex64::new(0.0, 0.0); 2],
        )
        .unwrap_err();
        assert_eq!(err, FieldError::ShapeMismatch { expected: 3, got: 2 });
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let axis = GridAxis::span(-2.0, 2.0, 17);
        let f = SampledField::from_complex_fn_1d(axis, |t| Complex64::new(t.sin(), t.cos()));
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        let g = SampledField::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn csv_has_documented_schema() {
        let axis = GridAxis { start: 0.0, step: 0.5, len: 3 };
        let f = SampledField::from_fn_1d(axis, |t| t);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,re,im"));
        assert_eq!(lines.next(), Some("0,0,0"));
        assert_eq!(lines.next(), Some("0.5,0.5,0"));
    }

    #[test]
    fn l2_norm_of_gaussian() {
        // ||exp(-pi t^2)||_2 = 2^(-1/4)
        let axis = GridAxis::span(-7.0, 7.0, 1401);
        let f = SampledField::from_fn_1d(axis, |t| (-std::f64::consts::PI * t * t).exp());
        assert!((f.l2_norm() - (-0.25f64).exp2()).abs() < 1e-10);
    }

    #[test]
    fn boundary_magnitude_2d() {
        let ax = GridAxis::span(-1.0, 1.0, 5);
        let f = SampledField::from_fn_2d(ax, ax, |x, y| if x == 1.0 && y == 0.0 { 3.0 } else { 0.0 });
        assert_eq!(f.boundary_magnitude(), 3.0);
    }

    proptest! {
        #[test]
        fn binary_round_trip_random(values in proptest::collection::vec(-1e6f64..1e6, 4..32)) {
            let axis = GridAxis { start: -1.0, step: 0.25, len: values.len() };
            let complex: Vec<Complex64> =
                values.iter().map(|&v| Complex64::new(v, -v * 0.5)).collect();
            let f = SampledField::new(vec![axis], complex).unwrap();
            let mut buf = Vec::new();
            f.write_binary(&mut buf).unwrap();
            let g = SampledField::read_binary(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(f, g);
        }
    }
}
