//! Weight calibration for weighted sums of terrain elements: proxy
//! roughness and the SetSlope / SetRoughness solvers.
//!
//! Both solvers rescale weights as `w_i * t^{p_i}` where `p_i` is the
//! element's share of the total contribution relative to the largest one.
//! Elements that contribute nothing keep their weight.

use crate::error::{Result, TerrainError};

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_BETA: f64 = 2.0;

const LOG_T_MIN: f64 = -12.0;
const LOG_T_MAX: f64 = 12.0;
const SCAN_STEPS: usize = 960;
const MAX_BISECTIONS: usize = 200;

/// `1 + [sum (r_i^a - 1) |w_i|^b]^(1/a)`.
pub fn proxy_roughness(r: &[f64], w: &[f64], alpha: f64, beta: f64) -> Result<f64> {
    if r.len() != w.len() {
        return Err(TerrainError::param(
            "weights",
            format!("{} weights for {} roughness values", w.len(), r.len()),
        ));
    }
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(TerrainError::param("alpha", "must be finite and non-zero"));
    }
    let s: f64 = r
        .iter()
        .zip(w)
        .map(|(ri, wi)| (ri.powf(alpha) - 1.0) * wi.abs().powf(beta))
        .sum();
    Ok(1.0 + s.signum() * s.abs().powf(1.0 / alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// Target already met; weights returned as given.
    Unchanged,
    /// Root of the share-weighted scaling found by bisection.
    Bracketed,
    /// No bracket existed; only the largest contributor was rescaled.
    LargestShare,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSolution {
    pub weights: Vec<f64>,
    pub factor: f64,
    pub method: SolveMethod,
}

fn shares(contrib: &[f64]) -> Option<Vec<f64>> {
    let max = contrib.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max > 0.0 {
        Some(contrib.iter().map(|c| c / max).collect())
    } else {
        None
    }
}

fn scaled(w: &[f64], p: &[f64], t: f64) -> Vec<f64> {
    w.iter().zip(p).map(|(wi, pi)| wi * t.powf(*pi)).collect()
}

/// Bisection in log space on a sign-changing bracket.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo.exp());
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid.exp());
        if fm == 0.0 {
            return mid.exp();
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Finds the sign-change interval of `f` on the log grid closest to t = 1.
fn nearest_bracket(f: &impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    let logs: Vec<f64> = (0..=SCAN_STEPS)
        .map(|k| (LOG_T_MIN + (LOG_T_MAX - LOG_T_MIN) * k as f64 / SCAN_STEPS as f64) * std::f64::consts::LN_10)
        .collect();
    let vals: Vec<f64> = logs.iter().map(|l| f(l.exp())).collect();
    let mut best: Option<(f64, f64, f64)> = None;
    for k in 0..SCAN_STEPS {
        let (a, b) = (vals[k], vals[k + 1]);
        if !(a.is_finite() && b.is_finite()) || (a < 0.0) == (b < 0.0) {
            continue;
        }
        let dist = logs[k].abs().min(logs[k + 1].abs());
        if best.is_none_or(|(d, _, _)| dist < d) {
            best = Some((dist, logs[k], logs[k + 1]));
        }
    }
    best.map(|(_, lo, hi)| (lo, hi))
}

fn norm(g: (f64, f64)) -> f64 {
    g.0.hypot(g.1)
}

fn resultant(w: &[f64], g: &[(f64, f64)]) -> (f64, f64) {
    w.iter()
        .zip(g)
        .fold((0.0, 0.0), |acc, (wi, gi)| (acc.0 + wi * gi.0, acc.1 + wi * gi.1))
}

/// Rescales weights so that `|sum w_i g_i| = tan(target)`.
pub fn set_slope(weights: &[f64], gradients: &[(f64, f64)], target_deg: f64) -> Result<WeightSolution> {
    if weights.len() != gradients.len() {
        return Err(TerrainError::param(
            "weights",
            format!("{} weights for {} gradients", weights.len(), gradients.len()),
        ));
    }
    if !(0.0..=85.0).contains(&target_deg) {
        return Err(TerrainError::param(
            "target_slope",
            format!("must lie in [0, 85] degrees, got {target_deg}"),
        ));
    }
    let target = target_deg.to_radians().tan();
    let contrib: Vec<f64> = weights.iter().zip(gradients).map(|(w, g)| w.abs() * norm(*g)).collect();
    let p = shares(&contrib)
        .ok_or_else(|| TerrainError::Solver("all weighted gradients are zero".into()))?;
    let f = |t: f64| norm(resultant(&scaled(weights, &p, t), gradients)) - target;
    let tol = 1e-12 * target.max(1e-12);
    if f(1.0).abs() <= tol {
        return Ok(WeightSolution {
            weights: weights.to_vec(),
            factor: 1.0,
            method: SolveMethod::Unchanged,
        });
    }
    if let Some((lo, hi)) = nearest_bracket(&f) {
        let t = bisect(f, lo, hi);
        return Ok(WeightSolution {
            weights: scaled(weights, &p, t),
            factor: t,
            method: SolveMethod::Bracketed,
        });
    }
    // rescale only the dominant element: |A + s B| = target
    let k = p.iter().position(|v| *v == 1.0).expect("max share is one");
    let mut rest = weights.to_vec();
    rest[k] = 0.0;
    let a = resultant(&rest, gradients);
    let b = (weights[k] * gradients[k].0, weights[k] * gradients[k].1);
    let qa = b.0 * b.0 + b.1 * b.1;
    let qb = 2.0 * (a.0 * b.0 + a.1 * b.1);
    let qc = a.0 * a.0 + a.1 * a.1 - target * target;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(TerrainError::Solver(format!(
            "slope of {target_deg} degrees is unreachable with these elements"
        )));
    }
    let roots = [(-qb + disc.sqrt()) / (2.0 * qa), (-qb - disc.sqrt()) / (2.0 * qa)];
    let s = if (roots[0] - 1.0).abs() <= (roots[1] - 1.0).abs() { roots[0] } else { roots[1] };
    let mut out = weights.to_vec();
    out[k] *= s;
    Ok(WeightSolution {
        weights: out,
        factor: s,
        method: SolveMethod::LargestShare,
    })
}

/// Rescales weights so that the proxy roughness equals `target`.
pub fn set_roughness(
    weights: &[f64],
    roughness: &[f64],
    target: f64,
    alpha: f64,
    beta: f64,
) -> Result<WeightSolution> {
    if weights.len() != roughness.len() {
        return Err(TerrainError::param(
            "weights",
            format!("{} weights for {} roughness values", weights.len(), roughness.len()),
        ));
    }
    if !(target >= 1.0) {
        return Err(TerrainError::param(
            "target_roughness",
            format!("must be at least 1, got {target}"),
        ));
    }
    let current = proxy_roughness(roughness, weights, alpha, beta)?;
    if (current - target).abs() <= 1e-12 {
        return Ok(WeightSolution {
            weights: weights.to_vec(),
            factor: 1.0,
            method: SolveMethod::Unchanged,
        });
    }
    let contrib: Vec<f64> = weights
        .iter()
        .zip(roughness)
        .map(|(w, r)| (r - 1.0) * w.abs().powf(beta))
        .collect();
    let q = shares(&contrib).ok_or_else(|| {
        TerrainError::Solver("no element has roughness above 1; target unreachable".into())
    })?;
    let f = |s: f64| {
        proxy_roughness(roughness, &scaled(weights, &q, s), alpha, beta).unwrap_or(f64::NAN) - target
    };
    let (lo, hi) = nearest_bracket(&f).ok_or_else(|| {
        TerrainError::Solver(format!("roughness {target} is outside the reachable range"))
    })?;
    let s = bisect(f, lo, hi);
    Ok(WeightSolution {
        weights: scaled(weights, &q, s),
        factor: s,
        method: SolveMethod::Bracketed,
    })
}
