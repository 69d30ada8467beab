//! Acceptance criteria. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use terrain_core::analysis::{
    find_rocks, mean_gradient, rock_components, roughness, surface_structure, ClassTable,
    DEFAULT_MIN_ROCK_HEIGHT, DEFAULT_ROUGHNESS_SIGMA,
};
use terrain_core::combine::{combine, weighted_sum, CombineKind};
use terrain_core::expr::{eval_on_grid, parse};
use terrain_core::noise::{gen_octaves, gen_rocks, OctaveParams, RockParams};
use terrain_core::obstacles::Obstacle;
use terrain_core::parameterize::{proxy_roughness, set_roughness};
use terrain_core::{Extent, GridSpec, Terrain};
use terrain_pipeline::corpus::{artifact_tree, border_jump, run_corpus, tile_obstacles};
use terrain_pipeline::engine::RunOutcome;
use terrain_pipeline::settings::parse_cli_setting;
use terrain_pipeline::{Engine, Value};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn default_spec() -> GridSpec {
    GridSpec::new(Extent::default(), 100, 100).unwrap()
}

fn run(tokens: &[&str], settings: &[&str], rng_seed: u64) -> Result<RunOutcome, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut engine = Engine::new(dir.path()).with_rng_seed(rng_seed);
    for s in settings {
        let (k, v) = parse_cli_setting(s).map_err(|e| e.to_string())?;
        engine.settings.general.insert(k, v);
    }
    engine.run_tokens(tokens).map_err(|e| e.to_string())
}

fn final_value(out: &RunOutcome, key: &str) -> Option<Value> {
    out.finals.last().and_then(|p| p.values.get(key).cloned())
}

fn final_terrain(out: &RunOutcome) -> Option<&Terrain> {
    let p = out.finals.last()?;
    p.primary.last().or(p.temporary.last()).map(|t| t.as_ref())
}

fn max_abs_diff(a: &Terrain, b: &Terrain) -> f64 {
    a.heights()
        .iter()
        .zip(b.heights().iter())
        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn flat_roughness() -> Verdict {
    let mut worst = 0.0f64;
    for h in [0.0, 3.5, -12.0] {
        let t = Terrain::constant(default_spec(), h);
        let r = roughness(&t, DEFAULT_ROUGHNESS_SIGMA).unwrap().roughness;
        worst = worst.max((r - 1.0).abs());
    }
    verdict(worst <= 1e-12, format!("max |roughness - 1| = {worst:.1e}"))
}

fn plane_slope() -> Verdict {
    match run(&["Plane:\"dict(pitch_deg=10)\"", "Slope"], &[], 1) {
        Ok(out) => match final_value(&out, "slope_deg").and_then(|v| v.as_f64()) {
            Some(s) => verdict((s - 10.0).abs() <= 0.01, format!("slope {s:.6} deg")),
            None => verdict(false, "no slope_deg in the pipe"),
        },
        Err(e) => verdict(false, e),
    }
}

fn gradient_linearity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for set in 0..20u64 {
        let params = OctaveParams {
            num_octaves: rng.random_range(1..=8),
            ..OctaveParams::default()
        };
        let oct = gen_octaves(default_spec(), 100 + set, &params).unwrap();
        let w: Vec<f64> = (0..oct.elements.len()).map(|_| rng.random_range(-5.0..5.0)).collect();
        let (gx, gy) = mean_gradient(&weighted_sum(&oct.elements, &w).unwrap());
        let (mut ex, mut ey) = (0.0, 0.0);
        for (e, wi) in oct.elements.iter().zip(&w) {
            let g = mean_gradient(e);
            ex += wi * g.0;
            ey += wi * g.1;
        }
        worst = worst.max((gx - ex).hypot(gy - ey) / ex.hypot(ey));
    }
    verdict(worst <= 1e-12, format!("max relative error {worst:.2e} over 20 sets"))
}

fn set_slope_exactness() -> Verdict {
    let (mut converged, mut total, mut worst) = (0, 0, 0.0f64);
    let mut off_target = 0;
    for target in [5.0, 10.0, 15.0, 20.0] {
        for seed in 0..20 {
            total += 1;
            let set_slope = format!("SetSlope:{target}");
            let seed_setting = format!("seed:{seed}");
            let out = run(&["Octaves", "Slope", &set_slope, "WeightedSum", "Slope"], &[&seed_setting], 1);
            let Ok(out) = out else { continue };
            let Some(s) = final_value(&out, "slope_deg").and_then(|v| v.as_f64()) else {
                continue;
            };
            converged += 1;
            let err = (s - target).abs();
            worst = worst.max(err);
            if err > 0.01 {
                off_target += 1;
            }
        }
    }
    let rate = converged as f64 / total as f64;
    verdict(
        off_target == 0 && rate >= 0.9,
        format!("converged {converged}/{total}, max error {worst:.2e} deg, {off_target} off target"),
    )
}

fn proxy_roughness_fidelity() -> Verdict {
    let spec = default_spec();
    let mut errors = Vec::new();
    for n in 1..=6usize {
        for k in 0..50u64 {
            let params = OctaveParams {
                num_octaves: n,
                random_amp: 0.5,
                ..OctaveParams::default()
            };
            let oct = gen_octaves(spec, 1000 * n as u64 + k, &params).unwrap();
            let r_i: Vec<f64> = oct
                .elements
                .iter()
                .map(|e| roughness(e, DEFAULT_ROUGHNESS_SIGMA).unwrap().roughness)
                .collect();
            let proxy = proxy_roughness(&r_i, &oct.weights, 1.0, 2.0).unwrap();
            let r = roughness(&weighted_sum(&oct.elements, &oct.weights).unwrap(), DEFAULT_ROUGHNESS_SIGMA)
                .unwrap()
                .roughness;
            errors.push((proxy - r).abs() / (r - 1.0 + 1e-12));
        }
    }
    let med = median(errors);

    let (mut within, mut within_excess, mut failed) = (0, 0, 0);
    for k in 0..50u64 {
        let target = 1.01 + 0.06 * k as f64 / 49.0;
        let oct = gen_octaves(spec, 5000 + k, &OctaveParams::default()).unwrap();
        let r_i: Vec<f64> = oct
            .elements
            .iter()
            .map(|e| roughness(e, DEFAULT_ROUGHNESS_SIGMA).unwrap().roughness)
            .collect();
        let Ok(sol) = set_roughness(&oct.weights, &r_i, target, 1.0, 2.0) else {
            failed += 1;
            continue;
        };
        let r = roughness(&weighted_sum(&oct.elements, &sol.weights).unwrap(), DEFAULT_ROUGHNESS_SIGMA)
            .unwrap()
            .roughness;
        if (r - target).abs() <= 0.2 * target {
            within += 1;
        }
        // stricter view on the excess roughness r - 1, reported only
        if (r - target).abs() <= 0.2 * (target - 1.0) {
            within_excess += 1;
        }
    }
    verdict(
        within as f64 / 50.0 >= 0.8,
        format!(
            "median proxy error {med:.3}; SetRoughness within 20% of target for {within}/50 \
             ({within_excess}/50 within 20% of the excess r - 1, {failed} solver failures)"
        ),
    )
}

fn seam_correctness() -> Verdict {
    let cases: [(&str, &[&str]); 3] = [
        ("Basic", &["Basic", "WeightedSum"]),
        ("Octaves", &["Octaves", "WeightedSum"]),
        ("Rocks", &["Rocks:\"dict(random_shift=True)\"", "Combine"]),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, body) in cases {
        let mut tiled = vec!["Loop:2x2", "Seed:7"];
        tiled.extend_from_slice(body);
        tiled.extend_from_slice(&["EndLoop", "Stack"]);
        let mut full = vec!["Seed:7"];
        full.extend_from_slice(body);
        let diff = match (run(&tiled, &[], 1), run(&full, &[], 1)) {
            (Ok(a), Ok(b)) => match (final_terrain(&a), final_terrain(&b)) {
                (Some(a), Some(b)) if a.spec() == b.spec() => max_abs_diff(a, b),
                _ => f64::INFINITY,
            },
            (Err(e), _) | (_, Err(e)) => {
                parts.push(format!("{name}: {e}"));
                f64::INFINITY
            }
        };
        ok &= diff <= 1e-9;
        parts.push(format!("{name} {diff:.1e}"));
    }
    verdict(ok, format!("max diff {}", parts.join(", ")))
}

fn obstacle_seam() -> Verdict {
    let per_tile = run(&["Loop:2x2", "Random:5", "Gaussian", "Combine", "EndLoop"], &[], 11)
        .and_then(|o| tile_obstacles(&o))
        .map(|t| border_jump(&t[0], &t[1]));
    let shared_tokens = ["Random:20", "Loop:2x2", "Gaussian", "Combine", "EndLoop", "Stack"];
    let shared = run(&shared_tokens, &[], 11);
    let full = run(&["Random:20", "Gaussian", "Combine"], &[], 11);
    match (per_tile, shared, full) {
        (Ok(jump_tile), Ok(shared), Ok(full)) => {
            let jump_shared = tile_obstacles(&shared)
                .map(|t| border_jump(&t[0], &t[1]))
                .unwrap_or(f64::INFINITY);
            let stacked_diff = match (final_terrain(&shared), final_terrain(&full)) {
                (Some(a), Some(b)) if a.spec() == b.spec() => max_abs_diff(a, b),
                _ => f64::INFINITY,
            };
            verdict(
                jump_tile > 1e-3 && jump_shared <= 1e-9 && stacked_diff <= 1e-9,
                format!(
                    "per-tile jump {jump_tile:.3}, shared jump {jump_shared:.1e}, \
                     shared stack vs full {stacked_diff:.1e}"
                ),
            )
        }
        (a, b, c) => verdict(
            false,
            format!("run failed: {:?} {:?} {:?}", a.err(), b.err().map(|_| ()), c.err().map(|_| ())),
        ),
    }
}

fn rock_census() -> Verdict {
    let spec = GridSpec::new(Extent::default(), 500, 500).unwrap();
    let fractions: Vec<f64> = (0..10).map(|k| 0.5 + 0.45 * k as f64 / 9.0).collect();
    let sizes: Vec<f64> = (0..15).map(|k| 0.5 + 3.5 * k as f64 / 14.0).collect();
    let (mut increases, mut sizes_bad) = (0, 0);
    let mut example = String::new();
    for &size in &sizes {
        let counts: Vec<usize> = fractions
            .iter()
            .map(|&fraction| {
                let params = RockParams {
                    rock_size: vec![size],
                    fraction,
                    ..RockParams::default()
                };
                let t = &gen_rocks(spec, 42, &params).unwrap()[0];
                find_rocks(t, DEFAULT_MIN_ROCK_HEIGHT).unwrap().len()
            })
            .collect();
        let up = counts.windows(2).filter(|w| w[1] > w[0]).count();
        if up > 0 {
            sizes_bad += 1;
            if example.is_empty() {
                example = format!(" (rock_size {size}: {counts:?})");
            }
        }
        increases += up;
    }

    let mut obs = Vec::new();
    let wanted = [(0.2, 3usize), (0.4, 5), (0.6, 7), (0.8, 11)];
    for (h, n) in wanted {
        for k in 0..n {
            obs.push(Obstacle {
                position: (k as f64, h * 10.0),
                height: h,
                ..Obstacle::default()
            });
        }
    }
    let r = surface_structure(&obs, &default_spec(), &ClassTable::default());
    let per_ha = 10_000.0 / Extent::default().area();
    let got = [r.h20, r.h40, r.h60, r.h80];
    let binned = wanted.iter().zip(got).all(|((_, n), g)| g == *n as f64 * per_ha);

    verdict(
        increases == 0 && binned,
        format!(
            "{increases} count increases with fraction across {sizes_bad}/15 sizes{example}; \
             band binning {}",
            if binned { "exact" } else { "wrong" }
        ),
    )
}

/// Breadth-first 4-connected labeling of `z > threshold`; returns sorted
/// component sizes.
fn flood_fill_sizes(z: &Array2<f64>, threshold: f64) -> Vec<usize> {
    let (nx, ny) = z.dim();
    let mut seen = Array2::from_elem((nx, ny), false);
    let mut sizes = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            if seen[[i, j]] || z[[i, j]] <= threshold {
                continue;
            }
            let mut queue = VecDeque::from([(i, j)]);
            seen[[i, j]] = true;
            let mut n = 0;
            while let Some((a, b)) = queue.pop_front() {
                n += 1;
                let mut nbrs = Vec::with_capacity(4);
                if a > 0 {
                    nbrs.push((a - 1, b));
                }
                if a + 1 < nx {
                    nbrs.push((a + 1, b));
                }
                if b > 0 {
                    nbrs.push((a, b - 1));
                }
                if b + 1 < ny {
                    nbrs.push((a, b + 1));
                }
                for (p, q) in nbrs {
                    if !seen[[p, q]] && z[[p, q]] > threshold {
                        seen[[p, q]] = true;
                        queue.push_back((p, q));
                    }
                }
            }
            sizes.push(n);
        }
    }
    sizes.sort_unstable();
    sizes
}

fn labeling_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    let mut components = 0;
    for _ in 0..100 {
        let (nx, ny) = (rng.random_range(2..=64), rng.random_range(2..=64));
        let raw = Array2::from_shape_fn((nx, ny), |_| rng.random::<f64>());
        // light box blur so components have varied shapes
        let z = Array2::from_shape_fn((nx, ny), |(i, j)| {
            let mut s = 0.0;
            let mut c = 0.0;
            for (a, b) in [(i, j), (i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)] {
                if let Some(v) = raw.get([a, b]) {
                    s += v;
                    c += 1.0;
                }
            }
            s / c
        });
        let cell = rng.random_range(0.1..2.0);
        let spec = GridSpec::new(Extent::new(0.0, nx as f64 * cell, 0.0, ny as f64 * cell), nx, ny).unwrap();
        let threshold = rng.random_range(0.35..0.65);
        let t = Terrain::new(spec, z.clone()).unwrap();
        let got = rock_components(&t, threshold).unwrap();
        let mut sizes: Vec<usize> = got.iter().map(|c| c.cells).collect();
        sizes.sort_unstable();
        let areas_ok = got
            .iter()
            .all(|c| (c.area - c.cells as f64 * spec.cell_area()).abs() <= 1e-9 * c.area);
        let expect = flood_fill_sizes(&z, threshold);
        components += expect.len();
        if sizes != expect || !areas_ok {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("{mismatches}/100 fields differ ({components} components checked)"))
}

fn combine_algebra() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spec = GridSpec::new(Extent::default(), 32, 32).unwrap();
    let mut worst = [0.0f64; 2];
    let mut inexact = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let stack: Vec<Terrain> = (0..n)
            .map(|_| Terrain::new(spec, Array2::from_shape_fn((32, 32), |_| rng.random_range(-2.0..2.0))).unwrap())
            .collect();
        for kind in [CombineKind::Add, CombineKind::Prod, CombineKind::Min, CombineKind::Max] {
            let got = combine(&stack, kind).unwrap();
            for ((i, j), v) in got.heights().indexed_iter() {
                let cells = stack.iter().map(|t| t.get(i, j));
                match kind {
                    CombineKind::Add => worst[0] = worst[0].max((v - cells.sum::<f64>()).abs()),
                    CombineKind::Prod => worst[1] = worst[1].max((v - cells.product::<f64>()).abs()),
                    CombineKind::Min => {
                        let m = cells.reduce(f64::min).unwrap();
                        inexact += usize::from(v.to_bits() != m.to_bits());
                    }
                    CombineKind::Max => {
                        let m = cells.reduce(f64::max).unwrap();
                        inexact += usize::from(v.to_bits() != m.to_bits());
                    }
                }
            }
        }
    }
    verdict(
        worst[0] <= 1e-12 && worst[1] <= 1e-12 && inexact == 0,
        format!("Add {:.1e}, Prod {:.1e}, Min/Max non-identical cells {inexact}", worst[0], worst[1]),
    )
}

/// Random expression tree used with an independent array evaluator.
enum Tree {
    Num(f64),
    X,
    Y,
    R,
    Neg(Box<Tree>),
    Bin(&'static str, Box<Tree>, Box<Tree>),
    Unary(&'static str, Box<Tree>),
    Reduce(&'static str, Box<Tree>),
    Pair(&'static str, Box<Tree>, Box<Tree>),
}

const UNARY: [&str; 9] = ["sin", "cos", "tan", "exp", "log", "sqrt", "abs", "floor", "round"];

fn random_tree(rng: &mut ChaCha8Rng, depth: usize) -> Tree {
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..4) {
            0 => Tree::Num((rng.random_range(0.0..10.0) * 1000.0f64).round() / 1000.0),
            1 => Tree::X,
            2 => Tree::Y,
            _ => Tree::R,
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_tree(rng, depth - 1));
    match rng.random_range(0..10) {
        0 => Tree::Neg(sub(rng)),
        1..=5 => {
            let op = ["+", "-", "*", "/", "**"][rng.random_range(0..5)];
            Tree::Bin(op, sub(rng), sub(rng))
        }
        6 | 7 => Tree::Unary(UNARY[rng.random_range(0..UNARY.len())], sub(rng)),
        8 => Tree::Reduce(if rng.random_bool(0.5) { "min" } else { "max" }, sub(rng)),
        _ => {
            let name = if rng.random_bool(0.5) { "min" } else { "max" };
            Tree::Pair(name, sub(rng), sub(rng))
        }
    }
}

fn render(t: &Tree, np: bool) -> String {
    let f = |name: &str| if np { format!("np.{name}") } else { name.to_string() };
    match t {
        Tree::Num(v) => format!("{v:?}"),
        Tree::X => "x".into(),
        Tree::Y => "y".into(),
        Tree::R => "r".into(),
        Tree::Neg(a) => format!("(-{})", render(a, np)),
        Tree::Bin(op, a, b) => format!("({}{op}{})", render(a, np), render(b, np)),
        Tree::Unary(name, a) | Tree::Reduce(name, a) => format!("{}({})", f(name), render(a, np)),
        Tree::Pair(name, a, b) => format!("{}({},{})", f(name), render(a, np), render(b, np)),
    }
}

fn reference(t: &Tree, xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    match t {
        Tree::Num(v) => vec![*v; n],
        Tree::X => xs.to_vec(),
        Tree::Y => ys.to_vec(),
        Tree::R => xs.iter().zip(ys).map(|(x, y)| x.hypot(*y)).collect(),
        Tree::Neg(a) => reference(a, xs, ys).into_iter().map(|v| -v).collect(),
        Tree::Bin(op, a, b) => {
            let (a, b) = (reference(a, xs, ys), reference(b, xs, ys));
            a.iter()
                .zip(&b)
                .map(|(p, q)| match *op {
                    "+" => p + q,
                    "-" => p - q,
                    "*" => p * q,
                    "/" => p / q,
                    _ => p.powf(*q),
                })
                .collect()
        }
        Tree::Unary(name, a) => reference(a, xs, ys)
            .into_iter()
            .map(|v| match *name {
                "sin" => v.sin(),
                "cos" => v.cos(),
                "tan" => v.tan(),
                "exp" => v.exp(),
                "log" => v.ln(),
                "sqrt" => v.sqrt(),
                "abs" => v.abs(),
                "floor" => v.floor(),
                _ => v.round_ties_even(),
            })
            .collect(),
        Tree::Reduce(name, a) => {
            let v = reference(a, xs, ys);
            let m = if *name == "min" {
                v.iter().copied().fold(f64::INFINITY, f64::min)
            } else {
                v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            vec![m; n]
        }
        Tree::Pair(name, a, b) => {
            let (a, b) = (reference(a, xs, ys), reference(b, xs, ys));
            a.iter()
                .zip(&b)
                .map(|(p, q)| if *name == "min" { p.min(*q) } else { p.max(*q) })
                .collect()
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

fn expression_engine() -> Verdict {
    let spec = GridSpec::new(Extent::new(-5.0, 5.0, -4.0, 6.0), 16, 12).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..spec.nx() {
        for j in 0..spec.ny() {
            xs.push(spec.x_center(i));
            ys.push(spec.y_center(j));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut bad = Vec::new();
    let mut rejected = 0;
    for k in 0..1000 {
        let tree = random_tree(&mut rng, 5);
        let src = render(&tree, k % 2 == 0);
        let expect = reference(&tree, &xs, &ys);
        let got = parse(&src).and_then(|e| eval_on_grid(&e, spec));
        // terrains must be finite, so a non-finite reference must be rejected
        let finite = expect.iter().all(|v| v.is_finite());
        let ok = match &got {
            Ok(t) => finite && t.heights().iter().zip(&expect).all(|(a, b)| close(*a, *b)),
            Err(_) => !finite,
        };
        rejected += usize::from(!finite);
        if !ok {
            bad.push(src);
        }
    }

    let published = run(&["Function:'5*(x/np.max(x))**2+np.sin(y/2)'"], &[], 1);
    let closed = match published.as_ref().ok().and_then(final_terrain) {
        Some(t) => {
            let xmax = t.spec().x_centers().into_iter().fold(f64::NEG_INFINITY, f64::max);
            t.heights().indexed_iter().fold(0.0f64, |m, ((i, j), v)| {
                let (x, y) = (t.spec().x_center(i), t.spec().y_center(j));
                m.max((v - (5.0 * (x / xmax).powi(2) + (y / 2.0).sin())).abs())
            })
        }
        None => f64::INFINITY,
    };
    let first = bad.first().map(|s| format!("; first failure `{s}`")).unwrap_or_default();
    verdict(
        bad.is_empty() && closed <= 1e-12,
        format!(
            "{}/1000 random expressions differ ({rejected} non-finite ones rejected), \
             published expression off by {closed:.1e}{first}",
            bad.len()
        ),
    )
}

fn determinism() -> Verdict {
    let (Ok(a), Ok(b)) = (tempfile::tempdir(), tempfile::tempdir()) else {
        return verdict(false, "cannot create temporary directories");
    };
    let start = Instant::now();
    let ra = run_corpus(a.path());
    let ta = start.elapsed();
    let rb = run_corpus(b.path());
    let total = start.elapsed();
    let (Ok(fa), Ok(fb)) = (artifact_tree(a.path()), artifact_tree(b.path())) else {
        return verdict(false, "cannot read artifact trees");
    };
    let differing: Vec<String> = fa
        .iter()
        .filter(|(k, v)| fb.get(*k) != Some(*v))
        .map(|(k, _)| k.display().to_string())
        .chain(fb.keys().filter(|k| !fa.contains_key(*k)).map(|k| k.display().to_string()))
        .collect();
    let same_report = ra.to_text() == rb.to_text();
    verdict(
        differing.is_empty() && same_report && !fa.is_empty() && ta < Duration::from_secs(600),
        format!(
            "{} artifacts, {} differ, reports {}, one corpus run {:.1}s (two runs {:.1}s)",
            fa.len(),
            differing.len(),
            if same_report { "identical" } else { "differ" },
            ta.as_secs_f64(),
            total.as_secs_f64()
        ),
    )
}

fn sampling_fidelity() -> Verdict {
    let out = match run(&["Donut:\"dict(width=40)\"", "AsProbability", "Random:100000"], &[], 5) {
        Ok(o) => o,
        Err(e) => return verdict(false, e),
    };
    let (Some(Value::Terrain(density)), Some(Value::Obstacles(obs))) =
        (final_value(&out, "position_density"), final_value(&out, "obstacles"))
    else {
        return verdict(false, "missing density or obstacles");
    };
    let spec = *density.spec();
    let e = spec.extent();
    let total: f64 = density.heights().sum();
    let mut expected = [[0.0f64; 10]; 10];
    for ((i, j), v) in density.heights().indexed_iter() {
        expected[i * 10 / spec.nx()][j * 10 / spec.ny()] += v / total * obs.len() as f64;
    }
    let mut observed = [[0usize; 10]; 10];
    for o in obs.iter() {
        let bx = (((o.position.0 - e.x_min) / e.width() * 10.0) as usize).min(9);
        let by = (((o.position.1 - e.y_min) / e.height() * 10.0) as usize).min(9);
        observed[bx][by] += 1;
    }
    // bins expecting fewer than 5 draws are pooled
    let (mut chi2, mut bins) = (0.0, 0usize);
    let (mut pool_e, mut pool_o) = (0.0, 0usize);
    for bx in 0..10 {
        for by in 0..10 {
            let (ex, ob) = (expected[bx][by], observed[bx][by]);
            if ex < 5.0 {
                pool_e += ex;
                pool_o += ob;
            } else {
                chi2 += (ob as f64 - ex).powi(2) / ex;
                bins += 1;
            }
        }
    }
    if pool_e > 0.0 {
        chi2 += (pool_o as f64 - pool_e).powi(2) / pool_e;
        bins += 1;
    }
    let df = (bins - 1) as f64;
    let critical = ChiSquared::new(df).unwrap().inverse_cdf(0.99);
    verdict(
        chi2 <= critical,
        format!("chi2 {chi2:.1} with {df} dof, 1% critical value {critical:.1}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict, u64); 13] = [
        ("flat-terrain roughness", flat_roughness, 1),
        ("plane slope", plane_slope, 1),
        ("gradient linearity", gradient_linearity, 5),
        ("SetSlope exactness", set_slope_exactness, 30),
        ("proxy-roughness fidelity", proxy_roughness_fidelity, 120),
        ("seam correctness", seam_correctness, 10),
        ("obstacle-seam correctness", obstacle_seam, 10),
        ("rock census properties", rock_census, 60),
        ("labeling oracle", labeling_oracle, 10),
        ("combine algebra", combine_algebra, 5),
        ("expression engine", expression_engine, 10),
        ("determinism", determinism, 1200),
        ("sampling fidelity", sampling_fidelity, 10),
    ];
    let mut failed = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs <= *budget as f64;
        let passed = v.passed && in_time;
        if !passed {
            failed += 1;
        }
        let late = if in_time { String::new() } else { format!(", over the {budget}s budget") };
        println!(
            "{} {:>2} {name}: {} [{secs:.2}s{late}]",
            if passed { "PASS" } else { "FAIL" },
            k + 1,
            v.detail
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
