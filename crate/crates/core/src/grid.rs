//! Uniform grids on `[0, 1]`.
//!
//! A [`GridFunction`] stores nodal samples `y(x_i)`, `x_i = i/n`, `i = 0..=n`.
//! Integrals use the composite trapezoid rule, derivatives use forward
//! differences on cells. Every functional and discrete operator in the crate
//! is built from these two conventions so that the discrete objects stay
//! mutually consistent (the eigenvalue solver's Rayleigh quotient and the
//! variational functional share the same quadratic forms).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// `1 - 2/pi^2`, the value of gamma at which the constant function stops being
/// a local minimiser.
pub const THRESHOLD_GAMMA: f64 = 1.0 - 2.0 / (PI * PI);

/// Real function sampled on `n + 1` equispaced nodes of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    /// Validates the samples: at least three nodes, all finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::TooFewNodes(values.len()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { values })
    }

    /// Samples `f` at the nodes of an `n`-cell grid.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n_f = n as f64;
        Self::new((0..=n).map(|i| f(i as f64 / n_f)).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n + 1])
    }

    /// Number of cells.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid step `1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.n() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.n() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Trapezoid weight of node `i` (already multiplied by `h`).
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        trapezoid_weight(i, self.n())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Nodewise map. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&u, &v)| a * u + b * v)
                .collect(),
        )
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }

    /// Trapezoid rule for `int_0^1 f dx`; exact for affine samples.
    pub fn integrate(&self) -> f64 {
        self.weighted_sum(|v| v)
    }

    /// Trapezoid value of `int_0^1 y^p dx`. Negative exponents require `y > 0`.
    pub fn power_integral(&self, p: f64) -> Result<f64> {
        if p < 0.0 {
            self.require_positive("negative power of a nonpositive value")?;
        } else if p.fract() != 0.0 {
            self.require_nonnegative("fractional power of a negative value")?;
        }
        Ok(self.weighted_sum(|v| v.powf(p)))
    }

    /// Generalised mean `(int q^s dx)^(1/s)`, `s != 0`.
    pub fn gen_mean(&self, s: f64) -> Result<f64> {
        if s == 0.0 || !s.is_finite() {
            return Err(Error::Parameter(format!(
                "generalised mean exponent must be finite and nonzero, got {s}"
            )));
        }
        Ok(self.power_integral(s)?.powf(1.0 / s))
    }

    /// Trapezoid `L2` inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        let n = self.n();
        let ends = 0.5 * (self.values[0] * other.values[0] + self.values[n] * other.values[n]);
        let inner = compensated_sum(
            self.values[1..n]
                .iter()
                .zip(&other.values[1..n])
                .map(|(a, b)| a * b),
        );
        self.h() * (inner + ends)
    }

    /// Plain Euclidean pairing of nodal values (the pairing in which
    /// [`crate::functional::gradient`] is a gradient).
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `int (y')^2 dx` with forward differences on cells.
    pub fn dirichlet_energy(&self) -> f64 {
        let n = self.n() as f64;
        compensated_sum(self.values.windows(2).map(|w| (w[1] - w[0]).powi(2))) * n
    }

    pub(crate) fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.n();
        let inner = compensated_sum(self.values[1..n].iter().map(|&v| f(v)));
        self.h() * (inner + 0.5 * (f(self.values[0]) + f(self.values[n])))
    }

    pub(crate) fn require_positive(&self, reason: &'static str) -> Result<()> {
        match self.values.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            Some((index, &value)) => Err(Error::Domain {
                index,
                value,
                reason,
            }),
            None => Ok(()),
        }
    }

    pub(crate) fn require_nonnegative(&self, reason: &'static str) -> Result<()> {
        match self.values.iter().enumerate().find(|(_, &v)| v < 0.0) {
            Some((index, &value)) => Err(Error::Domain {
                index,
                value,
                reason,
            }),
            None => Ok(()),
        }
    }
}

/// Neumaier's compensated summation.
pub(crate) fn compensated_sum(it: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[inline]
pub(crate) fn trapezoid_weight(i: usize, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    if i == 0 || i == n {
        0.5 * h
    } else {
        h
    }
}

/// Validated exponent `gamma` in `(0, 1)` with its derived powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaParam {
    gamma: f64,
    p: f64,
    r: f64,
}

impl GammaParam {
    pub const THRESHOLD: f64 = THRESHOLD_GAMMA;

    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        Ok(Self {
            gamma,
            p: 2.0 * gamma / (gamma - 1.0),
            r: (gamma + 1.0) / (gamma - 1.0),
        })
    }

    /// The threshold value `1 - 2/pi^2` itself.
    pub fn threshold() -> Self {
        Self::new(THRESHOLD_GAMMA).expect("threshold lies in (0, 1)")
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `2 gamma / (gamma - 1)`, the power in `int y^p`.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// `(gamma + 1) / (gamma - 1)`, the power in the Euler-Lagrange equation.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// `(gamma - 1) / gamma`, the outer exponent in `J`.
    pub fn outer(&self) -> f64 {
        (self.gamma - 1.0) / self.gamma
    }

    pub fn above_threshold(&self) -> bool {
        self.gamma > THRESHOLD_GAMMA
    }
}
