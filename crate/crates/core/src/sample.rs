//! Seeded random grid functions for randomized checks.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{GammaParam, GridFunction};
use crate::sturm::normalize_to_a_gamma;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random cosine/sine series with `modes` terms and `1/k` decaying
/// coefficients, not normalised.
fn series(rng: &mut impl Rng, n: usize, modes: usize) -> Result<GridFunction> {
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|k| {
            let a = rng.random_range(-1.0..1.0) / k as f64;
            let b = rng.random_range(-1.0..1.0) / k as f64;
            (a, b)
        })
        .collect();
    GridFunction::from_fn(n, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let w = (k + 1) as f64 * PI;
                a * (w * x).cos() + b * (w * x).sin()
            })
            .sum()
    })
}

/// `exp(s)` of a random series `s` whose amplitude is log-uniform in
/// `[1e-3, 3]`, so samples range from nearly constant to strongly peaked.
pub fn smooth_positive(rng: &mut impl Rng, n: usize) -> Result<GridFunction> {
    let modes = rng.random_range(1..=8);
    let amp = 10f64.powf(rng.random_range(-3.0..0.5));
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    let s = series(rng, n, modes)?;
    let peak = s.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    s.map(|v| scale * (amp * v / peak).exp())
}

/// Random smooth direction with unit `L2` norm.
pub fn direction(rng: &mut impl Rng, n: usize) -> Result<GridFunction> {
    let modes = rng.random_range(1..=6);
    let c = rng.random_range(-1.0..1.0);
    let s = series(rng, n, modes)?.map(|v| v + c)?;
    let norm = s.l2_norm();
    s.scale(1.0 / norm)
}

/// Random potential on `A_gamma`: either a smooth positive function or a
/// clipped series (so `q` vanishes on part of the interval), rescaled.
pub fn potential(rng: &mut impl Rng, n: usize, gamma: &GammaParam) -> Result<GridFunction> {
    let q = if rng.random_bool(0.5) {
        smooth_positive(rng, n)?
    } else {
        let modes = rng.random_range(1..=6);
        let s = series(rng, n, modes)?;
        let shift = rng.random_range(-0.3..0.3);
        let clipped = s.map(|v| (v + shift).max(0.0))?;
        if clipped.max() > 0.0 {
            clipped
        } else {
            s.map(|v| v.abs())?
        }
    };
    normalize_to_a_gamma(&q, gamma)
}
