//! Seeded 2D simplex noise evaluated in world coordinates, and the noise-based
//! generators built on it (`Basic`, `Octaves`, `Rocks`, `Holes`).
//!
//! Every generator is a pure function of the grid, the seed and its
//! parameters. Because noise is sampled at world coordinates, two tiles that
//! share a seed agree wherever their cells coincide.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, TerrainError};
use crate::grid::{GridSpec, Terrain};

const F2: f64 = 0.366_025_403_784_438_6; // (sqrt(3) - 1) / 2
const G2: f64 = 0.211_324_865_405_187_1; // (3 - sqrt(3)) / 6

/// Upper bound of the raw kernel sum `sum_k max(0, 0.5 - r_k^2)^4 * r_k` over
/// one simplex; dividing by it maps unit-gradient noise into [-1, 1].
const RAW_BOUND: f64 = 0.010_080_204_702_811_443;

const GRADIENTS: [(f64, f64); 16] = [
    (1.0, 0.0),
    (0.923_879_532_511_286_7, 0.382_683_432_365_089_8),
    (0.707_106_781_186_547_6, 0.707_106_781_186_547_6),
    (0.382_683_432_365_089_8, 0.923_879_532_511_286_7),
    (0.0, 1.0),
    (-0.382_683_432_365_089_8, 0.923_879_532_511_286_7),
    (-0.707_106_781_186_547_6, 0.707_106_781_186_547_6),
    (-0.923_879_532_511_286_7, 0.382_683_432_365_089_8),
    (-1.0, 0.0),
    (-0.923_879_532_511_286_7, -0.382_683_432_365_089_8),
    (-0.707_106_781_186_547_6, -0.707_106_781_186_547_6),
    (-0.382_683_432_365_089_8, -0.923_879_532_511_286_7),
    (0.0, -1.0),
    (0.382_683_432_365_089_8, -0.923_879_532_511_286_7),
    (0.707_106_781_186_547_6, -0.707_106_781_186_547_6),
    (0.923_879_532_511_286_7, -0.382_683_432_365_089_8),
];

// Domain tags keep the per-generator seed streams apart.
const TAG_BASIC: u64 = 0x6261_7369_6300_0000;
const TAG_OCTAVE_FIELD: u64 = 0x6f63_7466_6965_6c64;
const TAG_OCTAVE_WEIGHT: u64 = 0x6f63_7477_6569_6768;
const TAG_ROCKS: u64 = 0x726f_636b_7300_0000;
const TAG_HOLES: u64 = 0x686f_6c65_7300_0000;
const TAG_SHIFT: u64 = 0x7368_6966_7400_0000;

/// SplitMix64 finalizer over `seed` and a stream index.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// 2D simplex noise with a seed-dependent permutation table.
#[derive(Clone)]
pub struct Simplex {
    perm: [u8; 512],
}

impl Simplex {
    pub fn new(seed: u64) -> Self {
        let mut table: [u8; 256] = std::array::from_fn(|i| i as u8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..256u32).rev() {
            let j = rng.random_range(0..=i) as usize;
            table.swap(i as usize, j);
        }
        let mut perm = [0u8; 512];
        for (k, p) in perm.iter_mut().enumerate() {
            *p = table[k & 255];
        }
        Simplex { perm }
    }

    fn gradient(&self, i: i64, j: i64) -> (f64, f64) {
        let ii = (i & 255) as usize;
        let jj = (j & 255) as usize;
        let h = self.perm[ii + self.perm[jj] as usize];
        GRADIENTS[(h & 15) as usize]
    }

    /// Noise value in [-1, 1].
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let s = (x + y) * F2;
        let i = (x + s).floor();
        let j = (y + s).floor();
        let t = (i + j) * G2;
        let x0 = x - (i - t);
        let y0 = y - (j - t);
        let (i1, j1) = if x0 > y0 { (1.0, 0.0) } else { (0.0, 1.0) };
        let corners = [
            (x0, y0, 0.0, 0.0),
            (x0 - i1 + G2, y0 - j1 + G2, i1, j1),
            (x0 - 1.0 + 2.0 * G2, y0 - 1.0 + 2.0 * G2, 1.0, 1.0),
        ];
        let mut total = 0.0;
        for (dx, dy, oi, oj) in corners {
            let falloff = 0.5 - dx * dx - dy * dy;
            if falloff > 0.0 {
                let (gx, gy) = self.gradient((i + oi) as i64, (j + oj) as i64);
                let f2 = falloff * falloff;
                total += f2 * f2 * (gx * dx + gy * dy);
            }
        }
        (total / RAW_BOUND).clamp(-1.0, 1.0)
    }
}

/// Convenience wrapper; builds the permutation table on every call.
pub fn simplex2(seed: u64, x: f64, y: f64) -> f64 {
    Simplex::new(seed).sample(x, y)
}

/// Simplex noise at a given length scale and world-space shift.
#[derive(Clone)]
pub struct NoiseField {
    simplex: Simplex,
    length_scale: f64,
    shift: (f64, f64),
}

impl NoiseField {
    pub fn new(seed: u64, length_scale: f64, shift: (f64, f64)) -> Result<Self> {
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(TerrainError::param(
                "length_scale",
                format!("must be positive, got {length_scale}"),
            ));
        }
        Ok(NoiseField {
            simplex: Simplex::new(seed),
            length_scale,
            shift,
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.simplex.sample(
            (x - self.shift.0) / self.length_scale,
            (y - self.shift.1) / self.length_scale,
        )
    }

    pub fn terrain(&self, spec: GridSpec, amplitude: f64) -> Result<Terrain> {
        Terrain::from_fn(spec, |x, y| amplitude * self.eval(x, y))
    }
}

/// Default amplitude of a single noise element.
pub const DEFAULT_AMPLITUDE: f64 = 0.5;

pub fn noise_terrain(
    spec: GridSpec,
    seed: u64,
    length_scale: f64,
    shift: (f64, f64),
    amplitude: f64,
) -> Result<Terrain> {
    NoiseField::new(seed, length_scale, shift)?.terrain(spec, amplitude)
}

pub const DEFAULT_BASIC_SCALES: [f64; 3] = [400.0, 32.0, 0.5];

/// One noise element per length scale.
pub fn gen_basic(spec: GridSpec, seed: u64, scales: &[f64]) -> Result<Vec<Terrain>> {
    if scales.is_empty() {
        return Err(TerrainError::param("scale", "at least one length scale is required"));
    }
    scales
        .iter()
        .enumerate()
        .map(|(k, &scale)| {
            if !(scale > 0.0) {
                return Err(TerrainError::param("scale", format!("must be positive, got {scale}")));
            }
            let t = noise_terrain(
                spec,
                mix_seed(seed ^ TAG_BASIC, k as u64),
                scale,
                (0.0, 0.0),
                DEFAULT_AMPLITUDE,
            )?;
            Ok(t.with_tag("scale", scale.to_string()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OctaveParams {
    pub start_scale: f64,
    pub start_amplitude: f64,
    pub num_octaves: usize,
    pub persistence: f64,
    pub random_amp: f64,
    pub random_sign: bool,
    pub only_generate_weights: bool,
}

impl Default for OctaveParams {
    fn default() -> Self {
        OctaveParams {
            start_scale: 128.0,
            start_amplitude: 10.0,
            num_octaves: 8,
            persistence: 0.6,
            random_amp: 0.5,
            random_sign: true,
            only_generate_weights: false,
        }
    }
}

/// Noise elements with halving length scales plus their suggested weights.
#[derive(Clone, Debug, Default)]
pub struct OctaveSet {
    pub elements: Vec<Terrain>,
    pub weights: Vec<f64>,
    pub scales: Vec<f64>,
}

/// Element `k` has length scale `start_scale / 2^k` and weight
/// `start_amplitude * persistence^k`, perturbed by a `Normal(1, random_amp)`
/// factor and optionally a random sign. Elements are left unscaled.
pub fn gen_octaves(spec: GridSpec, seed: u64, params: &OctaveParams) -> Result<OctaveSet> {
    if params.num_octaves == 0 {
        return Err(TerrainError::param("num_octaves", "must be at least 1"));
    }
    if !(params.persistence >= 0.0) {
        return Err(TerrainError::param("persistence", "must be non-negative"));
    }
    if !(params.random_amp >= 0.0) {
        return Err(TerrainError::param("random_amp", "must be non-negative"));
    }
    if !(params.start_scale > 0.0) {
        return Err(TerrainError::param("start_scale", "must be positive"));
    }
    let mut set = OctaveSet::default();
    let mut scale = params.start_scale;
    let mut amplitude = params.start_amplitude;
    for k in 0..params.num_octaves {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed ^ TAG_OCTAVE_WEIGHT, k as u64));
        let mut w = amplitude;
        if params.random_amp > 0.0 {
            let normal = Normal::new(1.0, params.random_amp)
                .map_err(|e| TerrainError::param("random_amp", e.to_string()))?;
            w *= normal.sample(&mut rng);
        }
        if params.random_sign && rng.random::<bool>() {
            w = -w;
        }
        set.weights.push(w);
        set.scales.push(scale);
        if !params.only_generate_weights {
            let t = noise_terrain(
                spec,
                mix_seed(seed ^ TAG_OCTAVE_FIELD, k as u64),
                scale,
                (0.0, 0.0),
                1.0,
            )?;
            set.elements.push(t.with_tag("scale", scale.to_string()));
        }
        scale *= 0.5;
        amplitude *= params.persistence;
    }
    Ok(set)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RockParams {
    pub rock_size: Vec<f64>,
    pub fraction: f64,
    /// Peak height per size; `None` uses the generator default.
    pub heights: Option<Vec<f64>>,
    pub random_shift: bool,
}

impl Default for RockParams {
    fn default() -> Self {
        RockParams {
            rock_size: vec![0.5, 1.0, 2.0, 4.0],
            fraction: 0.8,
            heights: None,
            random_shift: false,
        }
    }
}

impl RockParams {
    fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(TerrainError::param(
                "fraction",
                format!("must lie in (0, 1), got {}", self.fraction),
            ));
        }
        if self.rock_size.is_empty() {
            return Err(TerrainError::param("rock_size", "at least one size is required"));
        }
        if let Some(s) = self.rock_size.iter().find(|s| !(**s > 0.0)) {
            return Err(TerrainError::param("rock_size", format!("must be positive, got {s}")));
        }
        if let Some(h) = &self.heights {
            if h.len() != self.rock_size.len() {
                return Err(TerrainError::param(
                    "rock_heights",
                    format!("{} heights for {} sizes", h.len(), self.rock_size.len()),
                ));
            }
        }
        Ok(())
    }

    fn height(&self, k: usize, default_ratio: f64) -> f64 {
        match &self.heights {
            Some(h) => h[k],
            None => self.rock_size[k] * default_ratio,
        }
    }
}

/// Maps noise values above `fraction` (of the unit noise maximum) linearly
/// onto `[0, height]`; everything else becomes 0.
pub fn clip_peak(value: f64, fraction: f64, height: f64) -> f64 {
    if value > fraction {
        (value - fraction) / (1.0 - fraction) * height
    } else {
        0.0
    }
}

/// World-space shift in `[0, size)` per axis derived from the seed.
pub fn seeded_shift(seed: u64, size: f64) -> (f64, f64) {
    let hx = mix_seed(seed ^ TAG_SHIFT, 0);
    let hy = mix_seed(seed ^ TAG_SHIFT, 1);
    (unit_interval(hx) * size, unit_interval(hy) * size)
}

fn clipped_elements(
    spec: GridSpec,
    seed: u64,
    params: &RockParams,
    tag: u64,
    default_ratio: f64,
    sign: f64,
) -> Result<Vec<Terrain>> {
    params.validate()?;
    params
        .rock_size
        .iter()
        .enumerate()
        .map(|(k, &size)| {
            let field_seed = mix_seed(seed ^ tag, k as u64);
            let shift = if params.random_shift {
                seeded_shift(field_seed, size)
            } else {
                (0.0, 0.0)
            };
            let field = NoiseField::new(field_seed, size, shift)?;
            let height = params.height(k, default_ratio);
            let t = Terrain::from_fn(spec, |x, y| {
                sign * clip_peak(sign * field.eval(x, y), params.fraction, height)
            })?;
            Ok(t.with_tag("rock_size", size.to_string()))
        })
        .collect()
}

/// Rock-like bumps: noise peaks above `fraction` rescaled to `[0, height]`,
/// height defaulting to half the size.
pub fn gen_rocks(spec: GridSpec, seed: u64, params: &RockParams) -> Result<Vec<Terrain>> {
    clipped_elements(spec, seed, params, TAG_ROCKS, 0.5, 1.0)
}

/// Mirror of [`gen_rocks`]: noise troughs below `-fraction` mapped to
/// `[-height, 0]`, height defaulting to a quarter of the size.
pub fn gen_holes(spec: GridSpec, seed: u64, params: &RockParams) -> Result<Vec<Terrain>> {
    clipped_elements(spec, seed, params, TAG_HOLES, 0.25, -1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Extent;

    #[test]
    fn deterministic_bits() {
        let a = simplex2(42, 1.234, -5.678);
        let b = simplex2(42, 1.234, -5.678);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn neighbouring_seeds_differ() {
        let a = Simplex::new(7);
        let b = Simplex::new(8);
        let differs = (0..100)
            .flat_map(|i| (0..100).map(move |j| (i as f64 * 0.37, j as f64 * 0.41)))
            .any(|(x, y)| a.sample(x, y) != b.sample(x, y));
        assert!(differs);
    }

    #[test]
    fn basic_defaults_and_scalar_scale() {
        let spec = GridSpec::new(Extent::new(0.0, 10.0, 0.0, 10.0), 20, 20).unwrap();
        let e = gen_basic(spec, 1, &DEFAULT_BASIC_SCALES).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e[2].tags()["scale"], "0.5");
        assert_eq!(gen_basic(spec, 1, &[100.0]).unwrap().len(), 1);
        assert_eq!(gen_basic(spec, 1, &[100.0, 20.0, 5.0, 1.0]).unwrap().len(), 4);
        for t in &e {
            assert!(t.max() <= 0.5 && t.min() >= -0.5);
        }
        assert!(gen_basic(spec, 1, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let t = noise_terrain(GridSpec::default(), 3, 10.0, (0.0, 0.0), 0.0).unwrap();
        assert!(t.heights().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn octave_weights_are_geometric_without_randomness() {
        let p = OctaveParams {
            random_amp: 0.0,
            random_sign: false,
            only_generate_weights: true,
            ..Default::default()
        };
        let set = gen_octaves(GridSpec::default(), 9, &p).unwrap();
        assert!(set.elements.is_empty());
        assert_eq!(set.scales[..3], [128.0, 64.0, 32.0]);
        let expected = [10.0, 6.0, 3.6, 2.16];
        for (w, e) in set.weights.iter().zip(expected) {
            assert!((w - e).abs() < 1e-12, "{w} vs {e}");
        }
        let zero = OctaveParams {
            persistence: 0.0,
            ..p
        };
        let set = gen_octaves(GridSpec::default(), 9, &zero).unwrap();
        assert_eq!(set.weights[0], 10.0);
        assert!(set.weights[1..].iter().all(|w| *w == 0.0));
    }

    #[test]
    fn octave_elements_follow_weights_length() {
        let spec = GridSpec::new(Extent::default(), 20, 20).unwrap();
        let set = gen_octaves(spec, 4, &OctaveParams::default()).unwrap();
        assert_eq!(set.elements.len(), 8);
        assert_eq!(set.weights.len(), 8);
        assert!(gen_octaves(spec, 4, &OctaveParams { num_octaves: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn rocks_default_heights() {
        let spec = GridSpec::new(Extent::new(0.0, 20.0, 0.0, 20.0), 100, 100).unwrap();
        let rocks = gen_rocks(spec, 5, &RockParams::default()).unwrap();
        assert_eq!(rocks.len(), 4);
        for (t, cap) in rocks.iter().zip([0.25, 0.5, 1.0, 2.0]) {
            assert!(t.min() >= 0.0);
            assert!(t.max() <= cap + 1e-12);
        }
        let holes = gen_holes(spec, 5, &RockParams::default()).unwrap();
        for (t, cap) in holes.iter().zip([0.125, 0.25, 0.5, 1.0]) {
            assert!(t.max() <= 0.0);
            assert!(t.min() >= -cap - 1e-12);
        }
    }

    #[test]
    fn rocks_reject_bad_fraction() {
        let spec = GridSpec::default();
        for f in [0.0, 1.0, -0.5, 1.5] {
            let p = RockParams {
                fraction: f,
                ..Default::default()
            };
            assert!(gen_rocks(spec, 1, &p).is_err());
            assert!(gen_holes(spec, 1, &p).is_err());
        }
    }

    #[test]
    fn near_one_fraction_leaves_almost_nothing() {
        let p = RockParams {
            fraction: 0.999,
            ..Default::default()
        };
        let rocks = gen_rocks(GridSpec::default(), 11, &p).unwrap();
        let nonzero: usize = rocks
            .iter()
            .map(|t| t.heights().iter().filter(|v| **v != 0.0).count())
            .sum();
        assert!(nonzero < 10, "{nonzero} nonzero cells");
    }

    #[test]
    fn shift_is_within_size() {
        for s in 0..100u64 {
            let (x, y) = seeded_shift(s, 4.0);
            assert!((0.0..4.0).contains(&x) && (0.0..4.0).contains(&y));
        }
    }
}
