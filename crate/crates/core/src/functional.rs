//! The variational functionals on uniformly positive grid functions:
//!
//! ```text
//! J(y) = int (y')^2 + ( int y^p )^((gamma-1)/gamma),   p = 2 gamma / (gamma - 1)
//! G(y) = J(y) / int y^2
//! ```
//!
//! `inf G` over positive functions equals the minimal first Neumann eigenvalue
//! over potentials on the unit sphere of `L_gamma`. Everything here is the
//! discrete functional (forward differences on cells, trapezoid integrals),
//! and [`gradient`] is its exact derivative with respect to nodal values.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GammaParam, GridFunction};
use crate::tridiag::SymTridiag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub j: f64,
    pub g: f64,
    /// `int y^2`.
    pub l2sq: f64,
    /// `int y^p`.
    pub powint: f64,
}

pub fn evaluate(y: &GridFunction, gamma: &GammaParam) -> Result<FunctionalValue> {
    let scaled = ScaledPowint::new(y, gamma)?;
    let l2sq = y.l2_norm_sq();
    let j = y.dirichlet_energy() + scaled.outer_power(gamma);
    Ok(FunctionalValue {
        j,
        g: j / l2sq,
        powint: scaled.value(gamma),
        l2sq,
    })
}

/// `int y^p = s^p * sum`, with `s = min y` so that `(y/s)^p <= 1` and nothing
/// overflows for strongly negative `p`.
struct ScaledPowint {
    s: f64,
    sum: f64,
}

impl ScaledPowint {
    fn new(y: &GridFunction, gamma: &GammaParam) -> Result<Self> {
        y.require_positive("functionals are defined on positive functions")?;
        let s = y.min();
        let sum = y.weighted_sum(|v| (v / s).powf(gamma.p()));
        Ok(Self { s, sum })
    }

    fn value(&self, gamma: &GammaParam) -> f64 {
        self.s.powf(gamma.p()) * self.sum
    }

    /// `(int y^p)^((gamma-1)/gamma) = s^2 sum^((gamma-1)/gamma)`.
    fn outer_power(&self, gamma: &GammaParam) -> f64 {
        self.s * self.s * self.sum.powf(gamma.outer())
    }
}

/// Factor `c` with `int (c y)^p = 1`.
pub(crate) fn a_gamma_scale(y: &GridFunction, gamma: &GammaParam) -> Result<f64> {
    let scaled = ScaledPowint::new(y, gamma)?;
    Ok(scaled.sum.powf(-1.0 / gamma.p()) / scaled.s)
}

/// Shorthand for `evaluate(y, gamma)?.g`.
pub fn g_value(y: &GridFunction, gamma: &GammaParam) -> Result<f64> {
    Ok(evaluate(y, gamma)?.g)
}

/// Nodal gradient of the discrete `G`: `sum_i gradient_i v_i` is the
/// directional derivative of `G` at `y` along `v`. It discretises
///
/// ```text
/// DG(y; v) = 2/|y|^2 [ int y'v' + (int y^p)^(-1/gamma) int y^r v - G(y) int y v ]
/// ```
pub fn gradient(y: &GridFunction, gamma: &GammaParam) -> Result<GridFunction> {
    let fv = evaluate(y, gamma)?;
    let scaled = ScaledPowint::new(y, gamma)?;
    let n = y.n();
    let nf = n as f64;
    let v = y.values();
    // (int y^p)^(-1/gamma) y^r = s sum^(-1/gamma) (y/s)^r
    let coupling = scaled.s * scaled.sum.powf(-1.0 / gamma.gamma());
    let scale = 2.0 / fv.l2sq;
    let mut out = vec![0.0; n + 1];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut stiff = 0.0;
        if i > 0 {
            stiff += v[i] - v[i - 1];
        }
        if i < n {
            stiff -= v[i + 1] - v[i];
        }
        let w = y.weight(i);
        *slot = scale * (nf * stiff + w * (coupling * (v[i] / scaled.s).powf(gamma.r()) - fv.g * v[i]));
    }
    GridFunction::new(out)
}

/// Extremal potential `q_* = (int y^p)^(-1/gamma) y^(2/(gamma-1))`.
/// It lies on `A_gamma` and satisfies `lambda_1(q_*) <= G(y)`.
pub fn qstar(y: &GridFunction, gamma: &GammaParam) -> Result<GridFunction> {
    let scaled = ScaledPowint::new(y, gamma)?;
    // the powers of s cancel exactly
    let c = scaled.sum.powf(-1.0 / gamma.gamma());
    let e = 2.0 / (gamma.gamma() - 1.0);
    y.map(|v| c * (v / scaled.s).powf(e))
}

/// Smallest eigenvalue of the second variation of `G` at `y = 1` on
/// nonconstant directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondVariation {
    /// `pi^2 - 2/(1 - gamma)`.
    pub closed_form: f64,
    /// Same eigenvalue for the discretised operator
    /// `-y'' + (2/(1-gamma)) (int y - y)` with Neumann closure.
    pub discrete: f64,
}

impl SecondVariation {
    pub fn agreement(&self) -> f64 {
        (self.closed_form - self.discrete).abs()
    }
}

pub fn second_variation_closed_form(gamma: &GammaParam) -> f64 {
    PI * PI - 2.0 / (1.0 - gamma.gamma())
}

pub fn second_variation_min_eig(gamma: &GammaParam, n: usize) -> Result<SecondVariation> {
    if n < 8 {
        return Err(Error::Parameter(format!("grid too coarse: n = {n}")));
    }
    let c = 2.0 / (1.0 - gamma.gamma());
    // K + tau M is SPD; its inverse iteration on mean-zero functions
    // converges to the lowest nonconstant mode.
    let tau = 1.0;
    let shifted = gram_matrix(n, tau);
    let mut y = GridFunction::from_fn(n, |x| {
        (PI * x).cos() + 0.3 * (2.0 * PI * x).cos() + 0.1 * (3.0 * PI * x + 0.4).sin()
    })?
    .into_values();

    let quotient = |y: &GridFunction| {
        let mean = y.integrate();
        let l2 = y.l2_norm_sq();
        (y.dirichlet_energy() + c * (mean * mean - l2)) / l2
    };

    let mut last = f64::NAN;
    for _ in 0..200 {
        let rhs: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(i, v)| crate::grid::trapezoid_weight(i, n) * v)
            .collect();
        let mut x = shifted.solve_spd(&rhs);
        let gx = GridFunction::new(x.clone())?;
        let mean = gx.integrate();
        x.iter_mut().for_each(|v| *v -= mean);
        let norm = GridFunction::new(x.clone())?.l2_norm();
        x.iter_mut().for_each(|v| *v /= norm);
        y = x;
        let rq = quotient(&GridFunction::new(y.clone())?);
        if (rq - last).abs() <= 1e-14 * rq.abs().max(1.0) {
            last = rq;
            break;
        }
        last = rq;
    }
    Ok(SecondVariation {
        closed_form: second_variation_closed_form(gamma),
        discrete: last,
    })
}

/// Tridiagonal `K + tau M`, where `K` is the stiffness matrix of
/// `int (y')^2` and `M` the lumped trapezoid mass matrix. With `tau = 1` this
/// is the Gram matrix of the discrete `W_2^1` inner product.
pub(crate) fn gram_matrix(n: usize, tau: f64) -> SymTridiag {
    let nf = n as f64;
    let diag = (0..=n)
        .map(|i| {
            let k = if i == 0 || i == n { nf } else { 2.0 * nf };
            k + tau * crate::grid::trapezoid_weight(i, n)
        })
        .collect();
    SymTridiag::new(diag, vec![-nf; n])
}

/// Checks the implication `G(y) < (pi^2/4)(1 - eps)^2  =>  min y > eps |y|_2`.
/// Returns `true` when the implication holds (including vacuously).
pub fn positivity_bound_check(y: &GridFunction, gamma: &GammaParam, eps: f64) -> Result<bool> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let fv = evaluate(y, gamma)?;
    let hypothesis = fv.g < PI * PI / 4.0 * (1.0 - eps).powi(2);
    Ok(!hypothesis || y.min() > eps * fv.l2sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(n: usize, a: f64) -> GridFunction {
        GridFunction::from_fn(n, |x| 1.0 + a * (PI * x).cos()).unwrap()
    }

    #[test]
    fn constants_give_one() {
        for gamma in [0.1, 0.5, 0.9, 0.99] {
            let g = GammaParam::new(gamma).unwrap();
            for c in [1.0, 0.01, 3.0, 250.0] {
                let y = GridFunction::constant(100, c).unwrap();
                let fv = evaluate(&y, &g).unwrap();
                assert!((fv.g - 1.0).abs() < 1e-13, "gamma {gamma}, c {c}: {}", fv.g);
                assert!((fv.g - fv.j / fv.l2sq).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn nonpositive_rejected() {
        let g = GammaParam::new(0.5).unwrap();
        let y = GridFunction::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(evaluate(&y, &g), Err(Error::Domain { .. })));
        assert!(gradient(&y, &g).is_err());
        assert!(qstar(&y, &g).is_err());
    }

    #[test]
    fn gradient_vanishes_at_constant() {
        let g = GammaParam::new(0.9).unwrap();
        let y = GridFunction::constant(64, 2.0).unwrap();
        let grad = gradient(&y, &g).unwrap();
        assert!(grad.values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn gradient_is_orthogonal_to_y() {
        let g = GammaParam::new(0.85).unwrap();
        let y = GridFunction::from_fn(512, |x| 1.2 + 0.3 * (2.0 * x).sin() + 0.1 * x * x).unwrap();
        let grad = gradient(&y, &g).unwrap();
        let scale: f64 = grad.values().iter().zip(y.values()).map(|(a, b)| (a * b).abs()).sum();
        assert!(grad.dot(&y).abs() <= 1e-10 * scale);
    }

    #[test]
    fn qstar_on_constants() {
        let g = GammaParam::new(0.7).unwrap();
        for c in [1.0, 5.0, 0.2] {
            let q = qstar(&GridFunction::constant(32, c).unwrap(), &g).unwrap();
            assert!(q.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
        let q = qstar(&bump(256, 0.4), &g).unwrap();
        assert!((q.power_integral(0.7).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn second_variation_values() {
        let sv = second_variation_min_eig(&GammaParam::new(0.9).unwrap(), 4096).unwrap();
        assert!((sv.closed_form - (PI * PI - 20.0)).abs() < 1e-12);
        assert!((sv.closed_form + 10.130_395_6).abs() < 1e-6);
        assert!(sv.agreement() < 1e-3, "{sv:?}");
        let sv = second_variation_min_eig(&GammaParam::new(0.5).unwrap(), 1024).unwrap();
        assert!((sv.closed_form - 5.869_604_401).abs() < 1e-8);
        assert!(sv.agreement() < 1e-3, "{sv:?}");
        let at = second_variation_closed_form(&GammaParam::threshold());
        assert!(at.abs() < 1e-13, "{at}");
    }

    #[test]
    fn positivity_examples() {
        let g = GammaParam::new(0.6).unwrap();
        let one = GridFunction::constant(64, 1.0).unwrap();
        assert!(positivity_bound_check(&one, &g, 0.3).unwrap());
        assert!(positivity_bound_check(&one, &g, 0.0).is_err());
        assert!(positivity_bound_check(&one, &g, 1.0).is_err());
        // deep narrow dip: hypothesis fails, implication vacuous
        let dip = GridFunction::from_fn(2048, |x| {
            let d = (x - 0.5) / 0.05;
            1.0 - 0.99 * (-d * d).exp()
        })
        .unwrap();
        let fv = evaluate(&dip, &g).unwrap();
        assert!(fv.g >= 1.21);
        assert!(dip.min() < 0.3 * fv.l2sq.sqrt());
        assert!(positivity_bound_check(&dip, &g, 0.3).unwrap());
    }
}
