//! Phase-plane analysis of the Euler-Lagrange equation
//!
//! ```text
//! -y'' + y^r = mu y,    r = (gamma + 1) / (gamma - 1)
//! ```
//!
//! Nonconstant solutions oscillate with period `2 mu^(-1/2) (1 - gamma) I0(alpha)`,
//! where `I0(alpha) = int dt / sqrt(f_alpha(t))` over the positivity window of
//! `f_alpha(t) = alpha t^(2 gamma) - t^2 - 1` and `alpha` is the rescaled
//! first integral of the trajectory. This module computes the window, the
//! singular integral `I0`, its limit at the tangency `alpha -> alpha_min`, and
//! shoots the ODE directly so both sides of the period formula can be compared.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GammaParam;
use crate::ode::{dopri_step, step_factor, State};

/// `f_alpha(t) = alpha t^(2 gamma) - t^2 - 1` and its first two derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Profile {
    gamma: f64,
    alpha: f64,
}

impl Profile {
    pub fn new(gamma: &GammaParam, alpha: f64) -> Self {
        Self {
            gamma: gamma.gamma(),
            alpha,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.alpha * t.powf(2.0 * self.gamma) - t * t - 1.0
    }

    pub fn d1(&self, t: f64) -> f64 {
        2.0 * self.alpha * self.gamma * t.powf(2.0 * self.gamma - 1.0) - 2.0 * t
    }

    pub fn d2(&self, t: f64) -> f64 {
        let g = self.gamma;
        2.0 * self.alpha * g * (2.0 * g - 1.0) * t.powf(2.0 * g - 2.0) - 2.0
    }

    /// Maximiser `(alpha gamma)^(1/(2 - 2 gamma))`.
    pub fn tau(&self) -> f64 {
        (self.alpha * self.gamma).powf(1.0 / (2.0 - 2.0 * self.gamma))
    }
}

/// `gamma^(-gamma) (1 - gamma)^(gamma - 1)`: `f_alpha` has a nonempty
/// positivity region iff `alpha` exceeds this.
pub fn alpha_min(gamma: &GammaParam) -> f64 {
    let g = gamma.gamma();
    g.powf(-g) * (1.0 - g).powf(g - 1.0)
}

/// Limit of `I0` as `alpha -> alpha_min`: `pi / sqrt(2 (1 - gamma))`.
pub fn i0_limit_closed_form(gamma: &GammaParam) -> f64 {
    PI / (2.0 * (1.0 - gamma.gamma())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub omega_minus: f64,
    pub tau: f64,
    pub omega_plus: f64,
}

/// Root of `f` on `[a, b]` (sign change required) by secant steps safeguarded
/// with bisection. Stops when the bracket is below `tol` times the root
/// magnitude capped at 1 (or a few ulps).
pub(crate) fn bracketed_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoConvergence(format!(
            "no sign change on [{a}, {b}]: f = ({fa}, {fb})"
        )));
    }
    let mut width = (b - a).abs();
    for _ in 0..400 {
        // absolute below 1 would lose roots that are themselves tiny, so the
        // tolerance is relative there
        let mag = a.abs().max(b.abs());
        let limit = (tol * mag.min(1.0)).max(4.0 * f64::EPSILON * mag);
        if (b - a).abs() <= limit {
            break;
        }
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        let (lo, hi) = (a.min(b), a.max(b));
        // bisect whenever the secant leaves the bracket or the bracket
        // failed to halve on the previous step
        let x = if secant > lo && secant < hi && (b - a).abs() < 0.5 * width {
            secant
        } else {
            mid
        };
        width = (b - a).abs();
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

const ROOT_TOL: f64 = 1e-13;

/// Endpoints of the positivity interval of `f_alpha` and its maximiser.
pub fn roots(gamma: &GammaParam, alpha: f64) -> Result<Window> {
    let amin = alpha_min(gamma);
    if !(alpha > amin * (1.0 + 1e-12)) {
        return Err(Error::EmptyPositivityRegion {
            alpha,
            alpha_min: amin,
        });
    }
    let f = Profile::new(gamma, alpha);
    let tau = f.tau();
    if f.value(tau) <= 0.0 {
        return Err(Error::EmptyPositivityRegion {
            alpha,
            alpha_min: amin,
        });
    }
    // f(0) = -1 and f increases up to tau
    let omega_minus = bracketed_root(|t| f.value(t), 0.0, tau, ROOT_TOL)?;
    let mut hi = 2.0 * tau;
    while f.value(hi) > 0.0 {
        hi *= 2.0;
    }
    let omega_plus = bracketed_root(|t| f.value(t), tau, hi, ROOT_TOL)?;
    Ok(Window {
        omega_minus,
        tau,
        omega_plus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodProfile {
    pub alpha: f64,
    pub omega_minus: f64,
    pub tau: f64,
    pub omega_plus: f64,
    #[serde(rename = "I0")]
    pub i0: f64,
    /// Difference of the last two midpoint refinements.
    pub err: f64,
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-11;
const MAX_PANELS: usize = 1 << 22;
/// Ratio `omega_+ / omega_-` above which `I0` integrates in `ln t`.
pub const WIDE_WINDOW: f64 = 64.0;

/// `I0(alpha)` through `t = omega_- + (omega_+ - omega_-) sin^2(theta)`.
///
/// With `u = t - omega_-`, `v = omega_+ - t` the integrand becomes
/// `2 / sqrt(f / (u v))`, smooth on `[0, pi/2]` because both zeros of `f` are
/// simple. The composite midpoint rule is refined by doubling until two
/// successive values differ by less than `tol`.
///
/// When `omega_+ / omega_-` exceeds [`WIDE_WINDOW`] the same substitution is
/// applied to `s = ln t` instead, giving the integrand `2 t / sqrt(f / (s (S - s)))`
/// with `S = ln(omega_+ / omega_-)`. Windows spanning many decades (large
/// `alpha` at small `mu`) are then resolved with the same rule.
///
/// Close to the tangency `f` is tiny compared with its two terms, so it is
/// evaluated as `f(omega_- + u) - f(omega_-)` (or the same from the right
/// end) with `expm1`/`ln_1p`. Each form vanishes exactly at its endpoint and
/// keeps `f / u` accurate as `u -> 0`.
pub fn i0(gamma: &GammaParam, alpha: f64, tol: f64) -> Result<PeriodProfile> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("quadrature tolerance must be positive, got {tol}")));
    }
    let w = roots(gamma, alpha)?;
    let two_g = 2.0 * gamma.gamma();
    let (a, b) = (w.omega_minus, w.omega_plus);
    let len = b - a;
    let (ca, cb) = (alpha * a.powf(two_g), alpha * b.powf(two_g));
    let from_left = |u: f64| ca * (two_g * (u / a).ln_1p()).exp_m1() - u * (2.0 * a + u);
    let from_right = |v: f64| cb * (two_g * (-v / b).ln_1p()).exp_m1() + v * (2.0 * b - v);
    let log_scale = b > WIDE_WINDOW * a;
    let span = (len / a).ln_1p();

    // integrand in theta divided by the constant 2
    let integrand = |theta: f64| -> f64 {
        let (sn, cs) = theta.sin_cos();
        if log_scale {
            let s = span * sn * sn;
            let r = span * cs * cs;
            // t = omega_- e^s; the right-end form is only used within a factor
            // 2 of omega_+, where v = omega_+ (1 - e^-r) keeps its precision
            let (t, f) = if r > std::f64::consts::LN_2 {
                let u = a * s.exp_m1();
                (a * s.exp(), ca * (two_g * s).exp_m1() - u * (2.0 * a + u))
            } else {
                (b * (-r).exp(), from_right(-b * (-r).exp_m1()))
            };
            t / (f / (s * r)).sqrt()
        } else {
            let u = len * sn * sn;
            let v = len * cs * cs;
            let f = if u <= v { from_left(u) } else { from_right(v) };
            1.0 / (f / (u * v)).sqrt()
        }
    };
    let midpoint = |panels: usize| -> Result<f64> {
        let d = 0.5 * PI / panels as f64;
        let mut sum = 0.0;
        for j in 0..panels {
            let g = integrand((j as f64 + 0.5) * d);
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::NoConvergence(format!(
                    "integrand {g} inside the window at alpha = {alpha}"
                )));
            }
            sum += g;
        }
        Ok(2.0 * sum * d)
    };

    let mut panels = 8;
    let mut prev = midpoint(panels)?;
    loop {
        panels *= 2;
        let next = midpoint(panels)?;
        let err = (next - prev).abs();
        if err < tol {
            return Ok(PeriodProfile {
                alpha,
                omega_minus: a,
                tau: w.tau,
                omega_plus: b,
                i0: next,
                err,
            });
        }
        if panels >= MAX_PANELS {
            return Err(Error::NoConvergence(format!(
                "I0 at alpha = {alpha}: change {err:e} after {panels} panels exceeds {tol:e}"
            )));
        }
        prev = next;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitEstimate {
    pub limit: f64,
    pub closed_form: f64,
    /// `(alpha, I0)` pairs fed to the extrapolation.
    pub samples: Vec<(f64, f64)>,
}

/// Extrapolates `I0(alpha)` to `alpha -> alpha_min` from
/// `alpha = alpha_min (1 + 10^-k)`, `k = 2..=6`, with a polynomial in
/// `sqrt(alpha - alpha_min)` (Neville's scheme evaluated at 0).
pub fn i0_limit(gamma: &GammaParam, tol: f64) -> Result<LimitEstimate> {
    let amin = alpha_min(gamma);
    let mut xs = Vec::new();
    let mut samples = Vec::new();
    for k in 2..=6 {
        let alpha = amin * (1.0 + 10f64.powi(-k));
        let p = i0(gamma, alpha, tol)?;
        xs.push((amin * 10f64.powi(-k)).sqrt());
        samples.push((alpha, p.i0));
    }
    let mut table: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let m = table.len();
    for level in 1..m {
        for i in 0..m - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            table[i] = (xi * table[i + 1] - xj * table[i]) / (xi - xj);
        }
    }
    Ok(LimitEstimate {
        limit: table[0],
        closed_form: i0_limit_closed_form(gamma),
        samples,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityScan {
    pub profiles: Vec<PeriodProfile>,
    /// Every consecutive increase exceeds twice the quadrature error.
    pub strictly_increasing: bool,
}

/// `I0` on a grid of alphas. The increase test uses the margin
/// `2 max(err_i, err_{i+1}, tol)`.
pub fn monotonicity_scan(gamma: &GammaParam, alphas: &[f64], tol: f64) -> Result<MonotonicityScan> {
    let profiles = alphas
        .iter()
        .map(|&a| i0(gamma, a, tol))
        .collect::<Result<Vec<_>>>()?;
    let strictly_increasing = !profiles.is_empty()
        && profiles.windows(2).all(|w| {
            let margin = 2.0 * w[0].err.max(w[1].err).max(tol);
            w[1].i0 - w[0].i0 > margin
        });
    Ok(MonotonicityScan {
        profiles,
        strictly_increasing,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    /// Local error tolerance of the integrator.
    pub tol: f64,
    /// Width in `x` to which the turning point is bisected.
    pub event_tol: f64,
    pub max_steps: usize,
    /// Abort if `y` drops below this.
    pub min_y: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            event_tol: 1e-12,
            max_steps: 2_000_000,
            min_y: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub gamma: f64,
    pub mu: f64,
    pub y0: f64,
    /// `(x, y, y')` at every accepted step, ending at the turning point.
    pub samples: Vec<(f64, f64, f64)>,
    /// First integral `(y')^2 + mu y^2 + ((1-gamma)/gamma) y^p` at `x = 0`.
    pub energy: f64,
    pub alpha_hat: f64,
    /// Distance between consecutive turning points (`y' = 0`).
    pub half_period: f64,
    /// `max |E(x) - E(0)|` over the samples.
    pub energy_drift: f64,
}

/// Value `y_c = mu^((gamma-1)/2)` of the constant solution.
pub fn equilibrium(gamma: &GammaParam, mu: f64) -> f64 {
    mu.powf(0.5 * (gamma.gamma() - 1.0))
}

pub fn energy(gamma: &GammaParam, mu: f64, y: f64, dy: f64) -> f64 {
    let g = gamma.gamma();
    dy * dy + mu * y * y + (1.0 - g) / g * y.powf(gamma.p())
}

/// `(gamma/(1-gamma))^(1-gamma) mu^(-gamma) E`.
pub fn alpha_hat(gamma: &GammaParam, mu: f64, energy: f64) -> f64 {
    let g = gamma.gamma();
    (g / (1.0 - g)).powf(1.0 - g) * mu.powf(-g) * energy
}

/// Integrates `y'' = y^r - mu y` from `(y0, 0)` to the next turning point.
pub fn shoot(gamma: &GammaParam, mu: f64, y0: f64) -> Result<Trajectory> {
    shoot_with(gamma, mu, y0, ShootOptions::default())
}

pub fn shoot_with(gamma: &GammaParam, mu: f64, y0: f64, opts: ShootOptions) -> Result<Trajectory> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
    }
    if !(y0 > 0.0 && y0.is_finite()) {
        return Err(Error::Parameter(format!("y0 must be positive, got {y0}")));
    }
    let yc = equilibrium(gamma, mu);
    if (y0 - yc).abs() <= 1e-9 * yc {
        return Err(Error::Parameter(format!(
            "y0 = {y0} is the constant solution y_c = {yc}"
        )));
    }
    let r = gamma.r();
    let rhs = move |_x: f64, s: &State| [s[1], s[0].powf(r) - mu * s[0]];
    // sign of y' right after the start
    let dir = (y0.powf(r) - mu * y0).signum();

    let e0 = energy(gamma, mu, y0, 0.0);
    let mut samples = vec![(0.0, y0, 0.0)];
    let mut drift: f64 = 0.0;
    let (mut x, mut s): (f64, State) = (0.0, [y0, 0.0]);
    let mut h = 1e-3 / (1.0 + mu.sqrt());

    for _ in 0..opts.max_steps {
        let (next, err) = dopri_step(&rhs, x, &s, h, opts.tol);
        if err > 1.0 || !(next[0] > 0.0) {
            h *= if err > 1.0 { step_factor(err) } else { 0.5 };
            if h < 1e-15 {
                return Err(Error::Collapse { x, y: s[0] });
            }
            continue;
        }
        if next[0] < opts.min_y {
            return Err(Error::Collapse { x: x + h, y: next[0] });
        }
        if next[1] * dir <= 0.0 && x > 0.0 {
            // turning point inside (x, x + h]: bisect on the sub-step length
            let (mut lo, mut hi) = (0.0, h);
            let mut at_hi = next;
            while hi - lo > opts.event_tol {
                let mid = 0.5 * (lo + hi);
                let (trial, _) = dopri_step(&rhs, x, &s, mid, opts.tol);
                if trial[1] * dir > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                    at_hi = trial;
                }
            }
            let (at_lo, _) = if lo > 0.0 {
                dopri_step(&rhs, x, &s, lo, opts.tol)
            } else {
                (s, 0.0)
            };
            // linear interpolation of y' across the final bracket
            let frac = if at_lo[1] != at_hi[1] {
                at_lo[1] / (at_lo[1] - at_hi[1])
            } else {
                0.5
            };
            let xe = x + lo + frac * (hi - lo);
            let ye = at_lo[0] + frac * (at_hi[0] - at_lo[0]);
            let dye = at_lo[1] + frac * (at_hi[1] - at_lo[1]);
            drift = drift.max((energy(gamma, mu, ye, dye) - e0).abs());
            samples.push((xe, ye, dye));
            return Ok(Trajectory {
                gamma: gamma.gamma(),
                mu,
                y0,
                samples,
                energy: e0,
                alpha_hat: alpha_hat(gamma, mu, e0),
                half_period: xe,
                energy_drift: drift,
            });
        }
        x += h;
        s = next;
        drift = drift.max((energy(gamma, mu, s[0], s[1]) - e0).abs());
        samples.push((x, s[0], s[1]));
        h *= step_factor(err);
    }
    Err(Error::NoConvergence(format!(
        "no turning point within {} steps (x = {x})",
        opts.max_steps
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodIdentity {
    pub half_period: f64,
    /// `mu^(-1/2) (1 - gamma) I0(alpha_hat)`.
    pub predicted_half_period: f64,
    pub alpha_hat: f64,
    pub relative_error: f64,
}

/// Compares the shooting half-period against `mu^(-1/2) (1-gamma) I0(alpha_hat)`.
pub fn period_identity_check(gamma: &GammaParam, mu: f64, y0: f64, tol: f64) -> Result<PeriodIdentity> {
    period_identity(gamma, &shoot(gamma, mu, y0)?, tol)
}

/// Same as [`period_identity_check`] for an already computed trajectory.
pub fn period_identity(gamma: &GammaParam, traj: &Trajectory, tol: f64) -> Result<PeriodIdentity> {
    let mu = traj.mu;
    let prof = i0(gamma, traj.alpha_hat, tol)?;
    let predicted = (1.0 - gamma.gamma()) * prof.i0 / mu.sqrt();
    Ok(PeriodIdentity {
        half_period: traj.half_period,
        predicted_half_period: predicted,
        alpha_hat: traj.alpha_hat,
        relative_error: (traj.half_period - predicted).abs() / traj.half_period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> GammaParam {
        GammaParam::new(0.5).unwrap()
    }

    #[test]
    fn alpha_min_values() {
        assert!((alpha_min(&half()) - 2.0).abs() < 1e-15);
        let thr = GammaParam::threshold();
        assert!((alpha_min(&thr) - 1.6554).abs() < 1e-4);
        for g in [0.1, 0.3, 0.5, 0.8, 0.95] {
            let gp = GammaParam::new(g).unwrap();
            let f = Profile::new(&gp, alpha_min(&gp));
            assert!(f.value(f.tau()).abs() < 1e-10, "gamma {g}");
        }
    }

    #[test]
    fn quadratic_roots() {
        let w = roots(&half(), 2.5).unwrap();
        assert!((w.omega_minus - 0.5).abs() < 1e-12);
        assert!((w.tau - 1.25).abs() < 1e-15);
        assert!((w.omega_plus - 2.0).abs() < 1e-12);
        assert!(matches!(roots(&half(), 2.0), Err(Error::EmptyPositivityRegion { .. })));
        assert!(roots(&half(), 1.0).is_err());
    }

    #[test]
    fn secant_bisection_hybrid() {
        let r = bracketed_root(|x| x * x * x - 2.0, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn isochronous_i0() {
        for alpha in [2.1, 2.5, 5.0, 10.0] {
            let p = i0(&half(), alpha, 1e-12).unwrap();
            assert!((p.i0 - PI).abs() < 1e-8, "alpha {alpha}: {}", p.i0);
            assert!(p.err <= 1e-12);
        }
    }

    #[test]
    fn isochronous_shooting() {
        let mu = PI * PI / 4.0;
        for y0 in [2.0, 5.0] {
            let t = shoot(&half(), mu, y0).unwrap();
            assert!((t.half_period - 1.0).abs() < 1e-6, "y0 {y0}: {}", t.half_period);
            assert!(t.energy_drift <= 1e-8 * t.energy);
            assert!(t.samples.iter().all(|s| s.1 > 0.0));
        }
    }

    #[test]
    fn shooting_rejects_equilibrium() {
        let g = GammaParam::new(0.7).unwrap();
        let yc = equilibrium(&g, 0.8);
        assert!((yc.powf(g.r()) - 0.8 * yc).abs() < 1e-12);
        assert!(shoot(&g, 0.8, yc).is_err());
        assert!(shoot(&g, -1.0, 1.0).is_err());
        assert!(shoot(&g, 1.0, 0.0).is_err());
    }
}
