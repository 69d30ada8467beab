use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp, Normal};

use super::Obstacle;
use crate::error::{Result, TerrainError};
use crate::grid::{GridSpec, Terrain};
use crate::noise::mix_seed;

/// Scalar obstacle parameters, in record order after `position`.
pub const OBSTACLE_PARAMS: [&str; 5] = ["height", "width", "aspect", "yaw_deg", "pitch_deg"];

/// A 1D distribution or deterministic sequence for one parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamDistribution {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std: f64 },
    Exponential { scale: f64 },
    Beta { a: f64, b: f64 },
    Arange { start: f64, stop: f64, step: f64 },
    Linspace { start: f64, stop: f64, num: usize },
    Logspace { start: f64, stop: f64, num: usize },
    Constant(f64),
}

pub const DISTRIBUTION_KINDS: [&str; 8] = [
    "uniform",
    "normal",
    "exponential",
    "beta",
    "arange",
    "linspace",
    "logspace",
    "constant",
];

fn count_arg(kind: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(TerrainError::param(kind, format!("sample count must be a non-negative integer, got {v}")))
    }
}

impl ParamDistribution {
    pub fn is_known_kind(kind: &str) -> bool {
        DISTRIBUTION_KINDS.contains(&kind)
    }

    /// Builds a distribution from its name and positional arguments, with
    /// NumPy-style defaults for omitted arguments.
    pub fn from_args(kind: &str, args: &[f64]) -> Result<Self> {
        let arity = |lo: usize, hi: usize| -> Result<()> {
            if args.len() < lo || args.len() > hi {
                Err(TerrainError::param(
                    kind,
                    format!("expected {lo}..={hi} arguments, got {}", args.len()),
                ))
            } else {
                Ok(())
            }
        };
        let d = match kind {
            "uniform" => {
                arity(0, 2)?;
                ParamDistribution::Uniform {
                    low: args.first().copied().unwrap_or(0.0),
                    high: args.get(1).copied().unwrap_or(1.0),
                }
            }
            "normal" => {
                arity(0, 2)?;
                ParamDistribution::Normal {
                    mean: args.first().copied().unwrap_or(0.0),
                    std: args.get(1).copied().unwrap_or(1.0),
                }
            }
            "exponential" => {
                arity(0, 1)?;
                ParamDistribution::Exponential {
                    scale: args.first().copied().unwrap_or(1.0),
                }
            }
            "beta" => {
                arity(2, 2)?;
                ParamDistribution::Beta {
                    a: args[0],
                    b: args[1],
                }
            }
            "arange" => {
                arity(1, 3)?;
                match args.len() {
                    1 => ParamDistribution::Arange { start: 0.0, stop: args[0], step: 1.0 },
                    2 => ParamDistribution::Arange { start: args[0], stop: args[1], step: 1.0 },
                    _ => ParamDistribution::Arange { start: args[0], stop: args[1], step: args[2] },
                }
            }
            "linspace" => {
                arity(2, 3)?;
                ParamDistribution::Linspace {
                    start: args[0],
                    stop: args[1],
                    num: args.get(2).map(|v| count_arg(kind, *v)).transpose()?.unwrap_or(50),
                }
            }
            "logspace" => {
                arity(2, 3)?;
                ParamDistribution::Logspace {
                    start: args[0],
                    stop: args[1],
                    num: args.get(2).map(|v| count_arg(kind, *v)).transpose()?.unwrap_or(50),
                }
            }
            "constant" => {
                arity(1, 1)?;
                ParamDistribution::Constant(args[0])
            }
            other => {
                return Err(TerrainError::param(
                    other,
                    format!("unknown distribution (known: {})", DISTRIBUTION_KINDS.join(", ")),
                ))
            }
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        let bad = |name: &str, why: &str| Err(TerrainError::param(name, why.to_string()));
        match *self {
            ParamDistribution::Uniform { low, high } if !(low <= high) => bad("uniform", "low must not exceed high"),
            ParamDistribution::Normal { std, .. } if !(std >= 0.0) => bad("normal", "std must be non-negative"),
            ParamDistribution::Exponential { scale } if !(scale > 0.0) => bad("exponential", "scale must be positive"),
            ParamDistribution::Beta { a, b } if !(a > 0.0 && b > 0.0) => bad("beta", "shape parameters must be positive"),
            ParamDistribution::Arange { step, .. } if step == 0.0 || !step.is_finite() => bad("arange", "step must be non-zero"),
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ParamDistribution::Uniform { .. } => "uniform",
            ParamDistribution::Normal { .. } => "normal",
            ParamDistribution::Exponential { .. } => "exponential",
            ParamDistribution::Beta { .. } => "beta",
            ParamDistribution::Arange { .. } => "arange",
            ParamDistribution::Linspace { .. } => "linspace",
            ParamDistribution::Logspace { .. } => "logspace",
            ParamDistribution::Constant(_) => "constant",
        }
    }

    pub fn args(&self) -> Vec<f64> {
        match *self {
            ParamDistribution::Uniform { low, high } => vec![low, high],
            ParamDistribution::Normal { mean, std } => vec![mean, std],
            ParamDistribution::Exponential { scale } => vec![scale],
            ParamDistribution::Beta { a, b } => vec![a, b],
            ParamDistribution::Arange { start, stop, step } => vec![start, stop, step],
            ParamDistribution::Linspace { start, stop, num } => vec![start, stop, num as f64],
            ParamDistribution::Logspace { start, stop, num } => vec![start, stop, num as f64],
            ParamDistribution::Constant(v) => vec![v],
        }
    }

    /// The full sequence for deterministic kinds, `None` for random ones.
    pub fn sequence(&self) -> Option<Vec<f64>> {
        match *self {
            ParamDistribution::Arange { start, stop, step } => {
                let count = ((stop - start) / step).ceil().max(0.0) as usize;
                Some((0..count).map(|k| start + k as f64 * step).collect())
            }
            ParamDistribution::Linspace { start, stop, num } => Some(linspace(start, stop, num)),
            ParamDistribution::Logspace { start, stop, num } => {
                Some(linspace(start, stop, num).into_iter().map(|e| 10f64.powf(e)).collect())
            }
            ParamDistribution::Constant(v) => Some(vec![v]),
            _ => None,
        }
    }

    /// Draws `n` values. Deterministic sequences are repeated cyclically to
    /// length `n`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        if let Some(seq) = self.sequence() {
            if seq.is_empty() {
                return Err(TerrainError::param(self.kind(), "sequence is empty"));
            }
            return Ok((0..n).map(|k| seq[k % seq.len()]).collect());
        }
        let err = |e: String| TerrainError::param(self.kind(), e);
        Ok(match *self {
            ParamDistribution::Uniform { low, high } => {
                (0..n).map(|_| low + (high - low) * rng.random::<f64>()).collect()
            }
            ParamDistribution::Normal { mean, std } => {
                let d = Normal::new(mean, std).map_err(|e| err(e.to_string()))?;
                (0..n).map(|_| d.sample(rng)).collect()
            }
            ParamDistribution::Exponential { scale } => {
                let d = Exp::new(1.0 / scale).map_err(|e| err(e.to_string()))?;
                (0..n).map(|_| d.sample(rng)).collect()
            }
            ParamDistribution::Beta { a, b } => {
                let d = Beta::new(a, b).map_err(|e| err(e.to_string()))?;
                (0..n).map(|_| d.sample(rng)).collect()
            }
            _ => unreachable!("deterministic kinds handled above"),
        })
    }
}

impl fmt::Display for ParamDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args().iter().map(|a| format!("{a:?}")).collect();
        write!(f, "{}({})", self.kind(), args.join(","))
    }
}

fn linspace(start: f64, stop: f64, num: usize) -> Vec<f64> {
    match num {
        0 => vec![],
        1 => vec![start],
        _ => (0..num)
            .map(|k| {
                if k == num - 1 {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (num - 1) as f64
                }
            })
            .collect(),
    }
}

/// Per-parameter distributions plus the optional 2D position density and
/// lookup terrains.
#[derive(Clone, Debug, Default)]
pub struct DistributionSet {
    pub dists: BTreeMap<String, ParamDistribution>,
    pub position_density: Option<Terrain>,
    pub lookups: BTreeMap<String, Terrain>,
}

impl DistributionSet {
    pub fn default_for(param: &str) -> Option<ParamDistribution> {
        Some(match param {
            "height" => ParamDistribution::Uniform { low: 1.0, high: 5.0 },
            "width" => ParamDistribution::Uniform { low: 2.0, high: 10.0 },
            "aspect" => ParamDistribution::Constant(1.0),
            "yaw_deg" => ParamDistribution::Uniform { low: 0.0, high: 360.0 },
            "pitch_deg" => ParamDistribution::Uniform { low: 0.0, high: 15.0 },
            _ => return None,
        })
    }

    pub fn get(&self, param: &str) -> Option<ParamDistribution> {
        self.dists
            .get(param)
            .cloned()
            .or_else(|| Self::default_for(param))
    }
}

/// Cell-categorical sampler over a non-negative density terrain with uniform
/// jitter inside the chosen cell.
pub struct DensitySampler {
    spec: GridSpec,
    cdf: Vec<f64>,
}

impl DensitySampler {
    pub fn new(density: &Terrain) -> Result<Self> {
        let mut cdf = Vec::with_capacity(density.spec().len());
        let mut acc = 0.0;
        for &v in density.heights().iter() {
            if v < 0.0 {
                return Err(TerrainError::param("position_density", "density has negative cells"));
            }
            acc += v;
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(TerrainError::param("position_density", "density has no positive mass"));
        }
        Ok(DensitySampler {
            spec: *density.spec(),
            cdf,
        })
    }

    pub fn sample_cell<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let total = *self.cdf.last().expect("non-empty");
        let u = rng.random::<f64>() * total;
        let k = self.cdf.partition_point(|c| *c <= u).min(self.cdf.len() - 1);
        (k / self.spec.ny(), k % self.spec.ny())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let (i, j) = self.sample_cell(rng);
        let e = self.spec.extent();
        let x = e.x_min + (i as f64 + rng.random::<f64>()) * self.spec.dx();
        let y = e.y_min + (j as f64 + rng.random::<f64>()) * self.spec.dy();
        (x, y)
    }
}

/// Clips negative values and normalizes to unit total mass.
pub fn as_probability(t: &Terrain) -> Result<Terrain> {
    let clipped = t.heights().mapv(|v| v.max(0.0));
    let total: f64 = clipped.sum();
    if !(total > 0.0) {
        return Err(TerrainError::param("probability", "terrain has no positive values"));
    }
    t.with_heights(clipped / total)
}

fn stream_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let tag = name
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    ChaCha8Rng::seed_from_u64(mix_seed(seed, tag))
}

/// Samples `n` obstacles. Each parameter draws from its own seed-derived
/// stream, so adding or removing a parameter never shifts the others.
pub fn sample_obstacles(
    n: usize,
    dists: &DistributionSet,
    spec: &GridSpec,
    seed: u64,
) -> Result<Vec<Obstacle>> {
    if n == 0 {
        return Err(TerrainError::param("number", "must sample at least one obstacle"));
    }
    let mut pos_rng = stream_rng(seed, "position");
    let positions: Vec<(f64, f64)> = match &dists.position_density {
        Some(density) => {
            let sampler = DensitySampler::new(density)?;
            (0..n).map(|_| sampler.sample(&mut pos_rng)).collect()
        }
        None => {
            let e = spec.extent();
            (0..n)
                .map(|_| {
                    let x = e.x_min + e.width() * pos_rng.random::<f64>();
                    let y = e.y_min + e.height() * pos_rng.random::<f64>();
                    (x, y)
                })
                .collect()
        }
    };
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(OBSTACLE_PARAMS.len());
    for name in OBSTACLE_PARAMS {
        let values = match dists.lookups.get(name) {
            Some(lookup) => positions
                .iter()
                .map(|&(x, y)| lookup.bilinear_sample(x, y))
                .collect(),
            None => {
                let d = dists.get(name).expect("defaults cover every obstacle parameter");
                d.sample(n, &mut stream_rng(seed, name))?
            }
        };
        columns.push(values);
    }
    (0..n)
        .map(|k| {
            Obstacle::new(
                positions[k],
                columns[0][k],
                columns[1][k],
                columns[2][k],
                columns[3][k],
                columns[4][k],
            )
        })
        .collect()
}
