use std::f64::consts::PI;

use extremal_sl::period::{
    alpha_hat, alpha_min, energy, equilibrium, i0, i0_limit, monotonicity_scan, period_identity_check,
    roots, shoot, Profile,
};
use extremal_sl::{Error, GammaParam};
use proptest::prelude::*;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        let floor = 1e-12 * (left.abs() + right.abs());
        if depth == 0 || diff.abs() <= (15.0 * tol).max(floor) {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // near the truncation points f itself carries ~1e-10 relative roundoff,
    // which caps the attainable accuracy; the depth limit bounds the work there
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `I0` as the truncated integral over `[omega_- + eps, omega_+ - eps]` plus
/// the two endpoint tails from the local expansion `f ~ f1 u + f2 u^2 / 2`:
/// `int_0^eps du / sqrt(f) = (2 sqrt(eps) - f2 eps^1.5 / (6 f1)) / sqrt(f1)`.
fn truncated_oracle(gamma: &GammaParam, alpha: f64) -> f64 {
    let f = Profile::new(gamma, alpha);
    let w = roots(gamma, alpha).unwrap();
    let eps = 1e-6 * (w.omega_plus - w.omega_minus);
    let inner = adaptive_simpson(
        &|t| 1.0 / f.value(t).sqrt(),
        w.omega_minus + eps,
        w.omega_plus - eps,
        1e-11,
    );
    let tail = |f1: f64, f2: f64| (2.0 * eps.sqrt() - f2 * eps.powf(1.5) / (6.0 * f1)) / f1.sqrt();
    inner + tail(f.d1(w.omega_minus), f.d2(w.omega_minus)) + tail(-f.d1(w.omega_plus), f.d2(w.omega_plus))
}

#[test]
fn quadrature_agrees_with_truncated_integral() {
    let tol = 1e-11;
    // windows narrow enough that eps stays far below omega_- and the
    // two-term tail expansion holds
    for (gamma, factor) in [(0.3, 3.0), (0.5, 1.2), (extremal_sl::THRESHOLD_GAMMA, 1.5), (0.9, 2.0)] {
        let g = GammaParam::new(gamma).unwrap();
        let alpha = factor * alpha_min(&g);
        let fast = i0(&g, alpha, tol).unwrap();
        let oracle = truncated_oracle(&g, alpha);
        assert!((fast.i0 - oracle).abs() <= 5.0 * tol, "gamma {gamma}, alpha {alpha}: {} vs {oracle}", fast.i0);
        assert!(fast.err <= tol);
    }
}

#[test]
fn wide_window_reference_value() {
    // gamma = 0.9, alpha = 8 alpha_min: the window spans [0.27, 1.7e5];
    // reference from 40-digit quadrature
    let g = GammaParam::new(0.9).unwrap();
    let p = i0(&g, 8.0 * alpha_min(&g), 1e-11).unwrap();
    assert!((p.i0 - 13.255_786_384_279_06).abs() < 1e-10, "{}", p.i0);
}

#[test]
fn thirty_four_decade_window() {
    // window [9.9e-5, 1.0e30]; reference from 50-digit quadrature in ln t
    let g = GammaParam::new(0.882_264_014_313_605_5).unwrap();
    let p = i0(&g, 11_608_079.463_846_667, 1e-11).unwrap();
    assert!((p.omega_minus - 9.913_620_197_146_076e-5).abs() < 1e-18);
    assert!((p.omega_plus / 1.005_896_513_390_764_3e30 - 1.0).abs() < 1e-13);
    assert!((p.i0 - 13.340_922_668_222_32).abs() < 1e-10, "{}", p.i0);
}

#[test]
fn threshold_samples() {
    // independent high-precision values at alpha = alpha_min * {1.01, 1.1, 1.5, 2, 5, 10}
    let g = GammaParam::threshold();
    let amin = alpha_min(&g);
    let want = [4.9483, 5.0651, 5.4845, 5.8431, 6.6800, 7.0603];
    for (factor, w) in [1.01, 1.1, 1.5, 2.0, 5.0, 10.0].iter().zip(want) {
        let p = i0(&g, factor * amin, 1e-11).unwrap();
        assert!((p.i0 - w).abs() < 1e-4, "{factor}: {}", p.i0);
        assert!(p.i0 > PI * PI / 2.0);
    }
}

#[test]
fn roots_sign_structure_at_threshold() {
    let g = GammaParam::threshold();
    let f = Profile::new(&g, 2.0);
    let w = roots(&g, 2.0).unwrap();
    assert!(0.0 < w.omega_minus && w.omega_minus < w.tau && w.tau < w.omega_plus);
    assert!(f.value(w.omega_minus).abs() < 1e-12);
    assert!(f.value(w.omega_plus).abs() < 1e-12);
    assert!(f.value(0.5 * (w.omega_minus + w.omega_plus)) > 0.0);
    let top = 2.0 * w.omega_plus;
    for i in 1..20_000 {
        let t = top * i as f64 / 20_000.0;
        let v = f.value(t);
        if t < w.omega_minus - 1e-9 || t > w.omega_plus + 1e-9 {
            assert!(v < 0.0, "t = {t}");
        } else if t > w.omega_minus + 1e-9 && t < w.omega_plus - 1e-9 {
            assert!(v > 0.0, "t = {t}");
        }
    }
}

#[test]
fn boundary_and_parameter_errors() {
    let g = GammaParam::new(0.5).unwrap();
    assert!(matches!(i0(&g, 2.0, 1e-10), Err(Error::EmptyPositivityRegion { .. })));
    assert!(i0(&g, 3.0, 0.0).is_err());
    assert!(roots(&g, 2.0 * (1.0 + 1e-13)).is_err());
}

#[test]
fn limits() {
    let half = i0_limit(&GammaParam::new(0.5).unwrap(), 1e-11).unwrap();
    assert!((half.limit - PI).abs() < 1e-8);
    let g9 = i0_limit(&GammaParam::new(0.9).unwrap(), 1e-11).unwrap();
    assert!((g9.limit - PI / 0.2f64.sqrt()).abs() < 1e-3);
    assert_eq!(g9.samples.len(), 5);
}

#[test]
fn monotonicity_flags() {
    let half = GammaParam::new(0.5).unwrap();
    let alphas: Vec<f64> = [1.01, 1.1, 1.5, 2.0, 5.0, 10.0].iter().map(|f| f * 2.0).collect();
    let flat = monotonicity_scan(&half, &alphas, 1e-11).unwrap();
    assert!(!flat.strictly_increasing);
    assert!(flat.profiles.iter().all(|p| (p.i0 - PI).abs() < 1e-8));

    let g9 = GammaParam::new(0.9).unwrap();
    let a = alpha_min(&g9);
    let coarse = monotonicity_scan(&g9, &[1.2 * a, 2.0 * a, 4.0 * a], 1e-11).unwrap();
    assert!(coarse.strictly_increasing);
}

#[test]
fn closed_form_half_period() {
    // half period mu^(-1/2) (1 - gamma) pi at gamma = 1/2
    let g = GammaParam::new(0.5).unwrap();
    let t = shoot(&g, 0.5, 3.0).unwrap();
    assert!((t.half_period - 0.5 * PI / 0.5f64.sqrt()).abs() < 1e-8);
    let id = period_identity_check(&g, 0.5, 3.0, 1e-11).unwrap();
    assert!(id.relative_error <= 1e-4);
}

#[test]
fn alpha_hat_constant_along_trajectory() {
    let g = GammaParam::threshold();
    let mu = 0.9;
    let t = shoot(&g, mu, 1.5 * equilibrium(&g, mu)).unwrap();
    let drift_bound = alpha_hat(&g, mu, t.energy_drift);
    for &(_, y, dy) in &t.samples {
        let a = alpha_hat(&g, mu, energy(&g, mu, y, dy));
        assert!((a - t.alpha_hat).abs() <= drift_bound * (1.0 + 1e-12) + 1e-15);
    }
    assert!(t.alpha_hat > alpha_min(&g));
}

fn gamma_strategy() -> impl Strategy<Value = GammaParam> {
    (0.05f64..0.95).prop_map(|g| GammaParam::new(g).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tangency_at_alpha_min(g in gamma_strategy()) {
        let f = Profile::new(&g, alpha_min(&g));
        prop_assert!(f.value(f.tau()).abs() < 1e-10);
        prop_assert!(f.d1(f.tau()).abs() < 1e-10 * f.tau().max(1.0));
    }

    #[test]
    fn roots_are_zeros(g in gamma_strategy(), factor in 1.001f64..50.0) {
        let alpha = factor * alpha_min(&g);
        let w = roots(&g, alpha).unwrap();
        let f = Profile::new(&g, alpha);
        prop_assert!(0.0 < w.omega_minus && w.omega_minus < w.tau && w.tau < w.omega_plus);
        for t in [w.omega_minus, w.omega_plus] {
            prop_assert!(f.value(t).abs() <= 1e-12 * t.max(1.0).powi(2));
        }
        prop_assert!(f.value(w.tau) > 0.0);
    }

    #[test]
    fn trajectories_conserve_energy(
        g in gamma_strategy(),
        mu in 0.1f64..4.0,
        ratio in prop_oneof![0.3f64..0.95, 1.05f64..4.0],
    ) {
        let y0 = ratio * equilibrium(&g, mu);
        let t = shoot(&g, mu, y0).unwrap();
        prop_assert!(t.samples.iter().all(|s| s.1 > 0.0));
        prop_assert!(t.half_period > 0.0);
        prop_assert!(t.energy_drift <= 1e-8 * t.energy);
        let id = period_identity_check(&g, mu, y0, 1e-11).unwrap();
        prop_assert!(id.relative_error <= 1e-4, "{:?}", id);
    }

    #[test]
    fn threshold_periods_exceed_two(mu in 0.05f64..0.999, ratio in prop_oneof![0.4f64..0.98, 1.02f64..3.0]) {
        let g = GammaParam::threshold();
        let t = shoot(&g, mu, ratio * equilibrium(&g, mu)).unwrap();
        prop_assert!(2.0 * t.half_period > 2.0);
    }
}
