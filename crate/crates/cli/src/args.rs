//! Value parsers for potentials and parameter sweeps.

use std::path::PathBuf;
use std::str::FromStr;

use extremal_sl::sturm::step_potential;
use extremal_sl::GridFunction;

use crate::Usage;

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

pub fn positive(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Const(f64),
    /// Height `h` on `[a, b]`, zero elsewhere.
    Step { a: f64, b: f64, h: f64 },
    /// One value per line, `grid_n + 1` lines.
    File(PathBuf),
}

impl FromStr for PotentialSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(c) = s.strip_prefix("const:") {
            return Ok(Self::Const(number(c)?));
        }
        if let Some(rest) = s.strip_prefix("step:") {
            let parts: Vec<f64> = rest.split(',').map(number).collect::<Result<_, _>>()?;
            let [a, b, h] = parts[..] else {
                return Err(format!("step needs a,b,h, got {rest:?}"));
            };
            if !(0.0 <= a && a < b && b <= 1.0) {
                return Err(format!("step needs 0 <= a < b <= 1, got a = {a}, b = {b}"));
            }
            return Ok(Self::Step { a, b, h });
        }
        if s.is_empty() {
            return Err("empty potential".into());
        }
        Ok(Self::File(PathBuf::from(s)))
    }
}

impl PotentialSpec {
    pub fn build(&self, n: usize) -> anyhow::Result<GridFunction> {
        Ok(match self {
            Self::Const(c) => GridFunction::constant(n, *c)?,
            Self::Step { a, b, h } => step_potential(n, *a, *b, *h)?,
            Self::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
                let values = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .enumerate()
                    .map(|(i, l)| number(l).map_err(|e| Usage(format!("{}: value {}: {e}", path.display(), i + 1))))
                    .collect::<Result<Vec<_>, _>>()?;
                if values.len() != n + 1 {
                    return Err(Usage(format!(
                        "{} has {} values but --grid-n {n} needs {}",
                        path.display(),
                        values.len(),
                        n + 1
                    ))
                    .into());
                }
                GridFunction::new(values)?
            }
        })
    }
}

/// `a:b:step` (inclusive of `b` up to rounding) or a comma list.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRange(pub Vec<f64>);

impl FromStr for StepRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts[..] {
            [a, b, step] => {
                let (a, b, step) = (number(a)?, number(b)?, positive(step)?);
                if b < a {
                    return Err(format!("range end {b} is below its start {a}"));
                }
                let m = ((b - a) / step + 1e-9).floor() as usize;
                if m > 1_000_000 {
                    return Err(format!("range {s:?} has too many points"));
                }
                let hits_end = (a + m as f64 * step - b).abs() <= 1e-9 * step;
                Ok(Self(
                    (0..=m)
                        .map(|i| {
                            if hits_end && m > 0 {
                                snap(a + (b - a) * (i as f64 / m as f64))
                            } else {
                                snap(a + i as f64 * step)
                            }
                        })
                        .collect(),
                ))
            }
            [_] => list(s).map(Self),
            _ => Err(format!("expected a:b:step or a comma list, got {s:?}")),
        }
    }
}

/// `a:b:n` (`n` equispaced points) or a comma list.
#[derive(Debug, Clone, PartialEq)]
pub struct Linspace(pub Vec<f64>);

impl FromStr for Linspace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts[..] {
            [a, b, n] => {
                let (a, b) = (number(a)?, number(b)?);
                let n: usize = n.trim().parse().map_err(|_| format!("point count must be a positive integer, got {n:?}"))?;
                match n {
                    0 => Err("point count must be at least 1".into()),
                    1 => Ok(Self(vec![a])),
                    _ => Ok(Self(
                        (0..n)
                            .map(|i| snap(a + (b - a) * (i as f64 / (n - 1) as f64)))
                            .collect(),
                    )),
                }
            }
            [_] => list(s).map(Self),
            _ => Err(format!("expected a:b:n or a comma list, got {s:?}")),
        }
    }
}

/// Rounds to 13 significant digits so `0.5 + 3 * 0.05` prints as `0.65`.
fn snap(x: f64) -> f64 {
    format!("{x:.12e}").parse().unwrap_or(x)
}

fn list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(number).collect()
}
