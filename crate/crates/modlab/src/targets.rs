//! Benchmark targets: a tiny expression grammar over sums and products of
//! Gaussians, sinusoids, and low-degree polynomials, chosen so that exact
//! gradients are always available for derivative-supervised training and
//! Sobolev error evaluation.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := NUMBER
//!          | 'gauss'                  # exp(-|x|^2) over all coordinates
//!          | 'sin' '(' linform ')'
//!          | 'cos' '(' linform ')'
//!          | '(' linform ')' ['^' INT]   # polynomial factor, power <= 3
//! linform := affine combination of x, y and constants, e.g. 3x, x + y,
//!            0.5x - 2y + 1
//! ```
//!
//! The built-in benchmark targets are `gauss * sin(3x)` in one dimension
//! and `gauss * sin(x + y)` in two.

use crate::sobolev::{EvalPoints, FieldSamples};

#[derive(Clone, Debug, PartialEq)]
pub struct TargetParseError {
    pub pos: usize,
    pub message: String,
}

impl std::fmt::Display for TargetParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "target expression, byte {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for TargetParseError {}

/// Affine form `c . x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinForm {
    pub coeffs: Vec<f64>,
    pub constant: f64,
}

impl LinForm {
    fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Factor {
    Gauss,
    Sin(LinForm),
    Cos(LinForm),
    Poly(LinForm, u32),
}

impl Factor {
    /// (value, gradient)
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Factor::Gauss => {
                let sq: f64 = x.iter().map(|v| v * v).sum();
                let v = (-sq).exp();
                (v, x.iter().map(|xi| -2.0 * xi * v).collect())
            }
            Factor::Sin(l) => {
                let u = l.eval(x);
                (u.sin(), l.coeffs.iter().map(|c| c * u.cos()).collect())
            }
            Factor::Cos(l) => {
                let u = l.eval(x);
                (u.cos(), l.coeffs.iter().map(|c| -c * u.sin()).collect())
            }
            Factor::Poly(l, k) => {
                let u = l.eval(x);
                let v = u.powi(*k as i32);
                let dv = *k as f64 * u.powi(*k as i32 - 1);
                (v, l.coeffs.iter().map(|c| c * dv).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Term {
    coeff: f64,
    factors: Vec<Factor>,
}

/// A parsed target with analytic value and gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    dim: usize,
    terms: Vec<Term>,
    source: String,
}

impl Target {
    /// Parse `text` as a target over `dim` input variables (x, and y when
    /// `dim` = 2). Using `y` in a 1-D target is an error.
    pub fn parse(text: &str, dim: usize) -> Result<Self, TargetParseError> {
        assert!(dim == 1 || dim == 2);
        let mut p = Parser { src: text.as_bytes(), pos: 0, dim };
        let terms = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(Target { dim, terms, source: text.to_string() })
    }

    /// The 1-D benchmark target `e^(-x^2) sin(3x)`.
    pub fn benchmark_1d() -> Self {
        Target::parse("gauss * sin(3x)", 1).expect("builtin parses")
    }

    /// The 2-D benchmark target `e^(-(x^2+y^2)) sin(x + y)`.
    pub fn benchmark_2d() -> Self {
        Target::parse("gauss * sin(x + y)", 2).expect("builtin parses")
    }

    /// Resolve a config target id: a builtin name or `expr:<grammar>`.
    pub fn resolve(id: &str, dim: usize) -> Result<Self, TargetParseError> {
        match id {
            "target1d" => Ok(Target::benchmark_1d()),
            "target2d" => Ok(Target::benchmark_2d()),
            other => {
                if let Some(body) = other.strip_prefix("expr:") {
                    Target::parse(body, dim)
                } else {
                    Err(TargetParseError {
                        pos: 0,
                        message: format!(
                            "unknown target '{other}' (expected target1d, target2d, or expr:...)"
                        ),
                    })
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Value and gradient at `x`.
    pub fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(x.len(), self.dim);
        let mut value = 0.0;
        let mut grad = vec![0.0; self.dim];
        for term in &self.terms {
            let parts: Vec<(f64, Vec<f64>)> = term.factors.iter().map(|f| f.eval(x)).collect();
            let prod: f64 = parts.iter().map(|(v, _)| v).product();
            value += term.coeff * prod;
            for i in 0..self.dim {
                let mut dsum = 0.0;
                for (k, (_, g)) in parts.iter().enumerate() {
                    let others: f64 = parts
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, (v, _))| v)
                        .product();
                    dsum += g[i] * others;
                }
                grad[i] += term.coeff * dsum;
            }
        }
        (value, grad)
    }

    /// Sample value and gradient channels at the given points.
    pub fn channels(&self, points: &EvalPoints) -> FieldSamples {
        let mut values = Vec::with_capacity(points.len());
        let mut grads: Vec<Vec<f64>> = vec![Vec::with_capacity(points.len()); self.dim];
        for i in 0..points.len() {
            let (v, g) = self.eval(points.point(i));
            values.push(v);
            for (d, gd) in g.iter().enumerate() {
                grads[d].push(*gd);
            }
        }
        let mut channels = vec![values];
        channels.extend(grads);
        FieldSamples { channels }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> TargetParseError {
        TargetParseError { pos: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), TargetParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Vec<Term>, TargetParseError> {
        let mut terms = Vec::new();
        let mut sign = if self.eat(b'-') { -1.0 } else { 1.0 };
        loop {
            let mut term = self.term()?;
            term.coeff *= sign;
            terms.push(term);
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1.0;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1.0;
                }
                _ => break,
            }
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<Term, TargetParseError> {
        let mut coeff = 1.0;
        let mut factors = Vec::new();
        loop {
            match self.factor()? {
                FactorOrNumber::Number(v) => coeff *= v,
                FactorOrNumber::Factor(f) => factors.push(f),
            }
            if !self.eat(b'*') {
                break;
            }
        }
        Ok(Term { coeff, factors })
    }

    fn factor(&mut self) -> Result<FactorOrNumber, TargetParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                Ok(FactorOrNumber::Number(self.number()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let lin = self.linform()?;
                self.expect(b')')?;
                let power = if self.eat(b'^') {
                    let p = self.number()?;
                    if p.fract() != 0.0 || !(1.0..=3.0).contains(&p) {
                        return Err(self.err("polynomial power must be an integer 1..=3"));
                    }
                    p as u32
                } else {
                    1
                };
                Ok(FactorOrNumber::Factor(Factor::Poly(lin, power)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident();
                match name.as_str() {
                    "gauss" => Ok(FactorOrNumber::Factor(Factor::Gauss)),
                    "sin" | "cos" => {
                        self.expect(b'(')?;
                        let lin = self.linform()?;
                        self.expect(b')')?;
                        Ok(FactorOrNumber::Factor(if name == "sin" {
                            Factor::Sin(lin)
                        } else {
                            Factor::Cos(lin)
                        }))
                    }
                    "x" | "y" => {
                        // bare variable: degree-1 polynomial factor
                        let lin = self.var_linform(&name)?;
                        Ok(FactorOrNumber::Factor(Factor::Poly(lin, 1)))
                    }
                    other => Err(self.err(&format!("unknown function or variable '{other}'"))),
                }
            }
            _ => Err(self.err("expected a factor")),
        }
    }

    fn var_linform(&mut self, name: &str) -> Result<LinForm, TargetParseError> {
        let mut coeffs = vec![0.0; self.dim];
        let idx = match name {
            "x" => 0,
            "y" => 1,
            _ => unreachable!(),
        };
        if idx >= self.dim {
            return Err(self.err("variable 'y' needs a 2-dimensional target"));
        }
        coeffs[idx] = 1.0;
        Ok(LinForm { coeffs, constant: 0.0 })
    }

    fn linform(&mut self) -> Result<LinForm, TargetParseError> {
        let mut coeffs = vec![0.0; self.dim];
        let mut constant = 0.0;
        let mut sign = if self.eat(b'-') { -1.0 } else { 1.0 };
        loop {
            self.skip_ws();
            let mut value = 1.0;
            let mut has_number = false;
            if matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit() || *c == b'.') {
                value = self.number()?;
                has_number = true;
            }
            let var = match self.src.get(self.pos) {
                Some(b'x') => {
                    self.pos += 1;
                    Some(0)
                }
                Some(b'y') => {
                    self.pos += 1;
                    Some(1)
                }
                _ => None,
            };
            match var {
                Some(idx) => {
                    if idx >= self.dim {
                        self.pos -= 1;
                        return Err(self.err("variable 'y' needs a 2-dimensional target"));
                    }
                    coeffs[idx] += sign * value;
                }
                None => {
                    if !has_number {
                        return Err(self.err("expected a number or variable in linear form"));
                    }
                    constant += sign * value;
                }
            }
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1.0;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1.0;
                }
                _ => break,
            }
        }
        Ok(LinForm { coeffs, constant })
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).to_string()
    }

    fn number(&mut self) -> Result<f64, TargetParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("malformed number"))
    }
}

enum FactorOrNumber {
    Number(f64),
    Factor(Factor),
}
