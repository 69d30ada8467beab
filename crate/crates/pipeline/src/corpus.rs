//! Regression corpus: the published example commands, translated for the
//! native backend and checked end to end.
//!
//! Translation drops modules that only manage 3D scene state (`Ground`,
//! `Camera`, `Holdout`, ...) and maps `Render` to `Hillshade` and
//! `RenderSegmentation` to an exported obstacle raster. Commands whose loops
//! take minutes at full size carry a reduced desk-scale variant.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use terrain_core::io::{read_obstacles, read_terrain, ArrayContainer};
use terrain_core::obstacles::{shape_value, Obstacle, ShapeKind};
use terrain_core::Terrain;

use crate::engine::{Engine, RunOutcome};
use crate::modules::container_to_values;
use crate::parse::split_tokens;
use crate::settings::parse_cli_setting;
use crate::value::Value;

/// Seed for the engine RNG in every corpus case.
pub const CORPUS_RNG_SEED: u64 = 20_230_611;

type Check = fn(&Path, &RunOutcome) -> Result<String, String>;

pub struct CorpusCase {
    pub id: &'static str,
    pub save_dir: &'static str,
    /// Module list as published.
    pub original: &'static str,
    /// Reduced variant run instead of `original`, if any.
    pub desk: Option<&'static str>,
    pub settings: &'static [&'static str],
    /// Files that must exist afterwards, relative to the corpus root.
    pub files: &'static [&'static str],
    pub check: Option<Check>,
}

/// Scene-only modules that have no effect on heightmaps.
const DROPPED: [&str; 8] = [
    "Ground",
    "Camera",
    "Holdout",
    "ClearScene",
    "ImageTexture",
    "AddMeshObjects",
    "Depth",
    "ColorMap",
];

/// Rewrites one published module list into native tokens.
pub fn translate(command: &str) -> Vec<String> {
    split_tokens(command)
        .into_iter()
        .filter_map(|tok| {
            let (name, arg) = match tok.split_once(':') {
                Some((n, a)) => (n.to_string(), Some(a.to_string())),
                None => (tok.clone(), None),
            };
            if DROPPED.contains(&name.as_str()) {
                return None;
            }
            Some(match (name.as_str(), arg) {
                ("Render", Some(a)) => format!("Hillshade:{a}"),
                ("Render", None) => "Hillshade".to_string(),
                ("RenderSegmentation", _) => "PlotObstacles:dict(exportmode=True)".to_string(),
                _ => tok,
            })
        })
        .collect()
}

pub fn cases() -> Vec<CorpusCase> {
    vec![
        CorpusCase {
            id: "basic-plot",
            save_dir: "basic",
            original: "Basic Plot Save",
            desk: None,
            settings: &[],
            files: &[
                "basic/Plot/terrain_temp_00000_0.png",
                "basic/Plot/terrain_temp_00000_2.png",
                "basic/Save/terrain_temp_00000_0.atrn",
                "basic/Save/terrain_temp_00000_2.atrn",
            ],
            check: None,
        },
        CorpusCase {
            id: "basic-render",
            save_dir: "basic",
            original: "Load:basic/Save WeightedSum Ground Camera:75 Render",
            desk: None,
            settings: &[],
            files: &["basic/Hillshade/hillshade_00000_0.png"],
            check: None,
        },
        CorpusCase {
            id: "basic-render-weighted",
            save_dir: "basic",
            original: "Load:basic/Save WeightedSum:[10,3,0.3] Ground Camera:75 Render:b.png",
            desk: None,
            settings: &[],
            files: &["basic/Hillshade/b.png"],
            check: Some(check_weighted_basic),
        },
        CorpusCase {
            id: "octaves-plot",
            save_dir: "octaves",
            original: "Octaves Plot Save",
            desk: None,
            settings: &[],
            files: &["octaves/Save/terrain_temp_00000_7.atrn", "octaves/Plot/terrain_temp_00000_7.png"],
            check: None,
        },
        CorpusCase {
            id: "octaves-random-weights",
            save_dir: "octaves",
            original: "Load:octaves/Save Random:weights WeightedSum Save:Save2 Ground Camera:75 Holdout Render",
            desk: None,
            settings: &[],
            files: &["octaves/Save2/terrain_prim_00000_0.atrn", "octaves/Hillshade/hillshade_00000_0.png"],
            check: None,
        },
        CorpusCase {
            id: "octaves-random-weights-b",
            save_dir: "octaves",
            original: "Load:octaves/Save Random:weights WeightedSum Ground Camera:75 Holdout Render:b.png",
            desk: None,
            settings: &[],
            files: &["octaves/Hillshade/b.png"],
            check: None,
        },
        CorpusCase {
            id: "rocks-plot",
            save_dir: "rocks",
            original: "Rocks Plot Save",
            desk: None,
            settings: &[],
            files: &["rocks/Save/terrain_temp_00000_3.atrn"],
            check: None,
        },
        CorpusCase {
            id: "rocks-render",
            save_dir: "rocks",
            original: "Load:rocks/Save Combine Ground Camera:75 Render",
            desk: None,
            settings: &[],
            files: &["rocks/Hillshade/hillshade_00000_0.png"],
            check: None,
        },
        CorpusCase {
            id: "rocks-with-terrain",
            save_dir: "rocks",
            original: "Load:rocks/Save Combine Load:octaves/Save2 Combine Ground Camera:75 Render:with_terrain.png",
            desk: None,
            settings: &[],
            files: &["rocks/Hillshade/with_terrain.png"],
            check: None,
        },
        CorpusCase {
            id: "holes-plot",
            save_dir: "holes",
            original: "Holes Plot Save",
            desk: None,
            settings: &[],
            files: &["holes/Save/terrain_temp_00000_3.atrn"],
            check: Some(check_holes_nonpositive),
        },
        CorpusCase {
            id: "holes-render",
            save_dir: "holes",
            original: "Load:holes/Save Combine Ground Camera:75 Render",
            desk: None,
            settings: &[],
            files: &["holes/Hillshade/hillshade_00000_0.png"],
            check: None,
        },
        CorpusCase {
            id: "holes-with-terrain",
            save_dir: "holes",
            original: "Load:holes/Save Combine Load:octaves/Save2 Combine Ground Camera:75 Render:with_terrain.png",
            desk: None,
            settings: &[],
            files: &["holes/Hillshade/with_terrain.png"],
            check: None,
        },
        CorpusCase {
            id: "function-shapes",
            save_dir: "gen_func",
            original: "Gaussian Step Donut Plane Sphere Cube SmoothStep Sine Plot Save",
            desk: None,
            settings: &[],
            files: &["gen_func/Plot/terrain_temp_00000_7.png", "gen_func/Save/terrain_temp_00000_7.atrn"],
            check: None,
        },
        CorpusCase {
            id: "random-gaussians",
            save_dir: "gen_fun_2",
            original: "Random:10 Gaussian Combine Ground Camera:75 Render",
            desk: None,
            settings: &[],
            files: &["gen_fun_2/Hillshade/hillshade_00000_0.png"],
            check: None,
        },
        CorpusCase {
            id: "random-gaussians-signed",
            save_dir: "gen_fun_2",
            original: "SetDistribution:'height=uniform(-5,5)' Random:10 Gaussian Combine Ground Camera:75 Render:b.png",
            desk: None,
            settings: &[],
            files: &["gen_fun_2/Hillshade/b.png"],
            check: Some(check_signed_heights),
        },
        CorpusCase {
            id: "density-sampling",
            save_dir: "2Dsampling",
            original: "Donut:\"dict(width=40)\" AsProbability Random:10 Sphere Combine Ground Camera:75 Render",
            desk: None,
            settings: &[],
            files: &["2Dsampling/Hillshade/hillshade_00000_0.png"],
            check: Some(check_density_positions),
        },
        CorpusCase {
            id: "lookup-sampling",
            save_dir: "2D_lookup",
            original: "Plane:\"dict(pitch_deg=10)\" AsLookupFor:height Random:10 SaveObstacles Gaussian Combine Ground Camera:75 Render:lookup.png",
            desk: None,
            settings: &[],
            files: &[
                "2D_lookup/SaveObstacles/obstacles.atdc",
                "2D_lookup/SaveObstacles/obstacles.yml",
                "2D_lookup/Hillshade/lookup.png",
            ],
            check: Some(check_lookup_heights),
        },
        CorpusCase {
            id: "plot-obstacles",
            save_dir: "plot_obstacles",
            original: "LoadObstacles:2D_lookup/SaveObstacles/obstacles.npz PlotObstacles",
            desk: None,
            settings: &["exportmode:True"],
            files: &["plot_obstacles/PlotObstacles/obstacles_0.svg", "plot_obstacles/PlotObstacles/obstacles_0.png"],
            check: Some(check_obstacle_disks),
        },
        CorpusCase {
            id: "function-expression",
            save_dir: "function",
            original: "Function:'5*(x/np.max(x))**2+np.sin(y/2)' Ground Camera:65 Render",
            desk: None,
            settings: &[],
            files: &["function/Hillshade/hillshade_00000_0.png"],
            check: Some(check_function_closed_form),
        },
        CorpusCase {
            id: "scene-combined",
            save_dir: "blender",
            original: "Load:octaves/Save LoadObstacles:2D_lookup/SaveObstacles/obstacles.npz AddMeshObjects Ground Camera:75 Render Camera:top Depth Save",
            desk: None,
            settings: &[],
            files: &["blender/Save/terrain_temp_00000_7.atrn", "blender/Hillshade/hillshade_00000_7.png"],
            check: None,
        },
        CorpusCase {
            id: "scene-reload",
            save_dir: "blender",
            original: "Load:blender/Save Ground Camera:75 Render:combined.png",
            desk: None,
            settings: &[],
            files: &["blender/Hillshade/combined_00000_0.png"],
            check: None,
        },
        CorpusCase {
            id: "scene-segmentation",
            save_dir: "blender",
            original: "Load:octaves/Save LoadObstacles:2D_lookup/SaveObstacles/obstacles.npz AddMeshObjects Ground Camera:top RenderSegmentation:segmentation_top.png",
            desk: None,
            settings: &[],
            files: &["blender/PlotObstacles/obstacles_0.png"],
            check: None,
        },
        CorpusCase {
            id: "loop-tiles",
            save_dir: "loop",
            original: "Loop:2x2 Basic WeightedSum Ground EndLoop Camera:75 Render:1.png",
            desk: None,
            settings: &[],
            files: &["loop/Hillshade/1_00000_3.png"],
            check: Some(check_four_tiles),
        },
        CorpusCase {
            id: "loop-seeded-tiles",
            save_dir: "loop",
            original: "Loop:2x2 Seed:2 Basic WeightedSum Ground EndLoop Camera:75 Render:2.png",
            desk: None,
            settings: &[],
            files: &["loop/Hillshade/2_00000_3.png"],
            check: Some(check_four_tiles),
        },
        CorpusCase {
            id: "loop-stacked",
            save_dir: "loop",
            original: "Loop:2x2 Seed:2 Basic WeightedSum EndLoop Stack Ground Camera:75 Render:3.png",
            desk: None,
            settings: &[],
            files: &["loop/Hillshade/3.png"],
            check: Some(check_stack_seam),
        },
        CorpusCase {
            id: "loop-obstacles-per-tile",
            save_dir: "loop",
            original: "Loop:2x2 Random:5 Gaussian Combine Ground EndLoop Camera:75 Render:4.png",
            desk: None,
            settings: &[],
            files: &["loop/Hillshade/4_00000_3.png"],
            check: Some(check_per_tile_jump),
        },
        CorpusCase {
            id: "loop-obstacles-shared",
            save_dir: "loop",
            original: "Random:20 Loop:2x2 Gaussian Combine Ground EndLoop Camera:75 Render:5.png",
            desk: None,
            settings: &[],
            files: &["loop/Hillshade/5_00000_3.png"],
            check: Some(check_shared_no_jump),
        },
        CorpusCase {
            id: "persistence-sweep",
            save_dir: "slope_plot",
            original: "Loop:persistence=linspace[0,0.99,100] Octaves:\"dict(random_amp=0.0)\" WeightedSum Slope Roughness LogData",
            desk: None,
            settings: &["seed:1"],
            files: &["slope_plot/LogData/data.atdc"],
            check: Some(check_persistence_trend),
        },
        CorpusCase {
            id: "persistence-scatter",
            save_dir: "slope_plot",
            original: "LoadData:slope_plot/LogData/data.npz PlotScatter",
            desk: None,
            settings: &[],
            files: &["slope_plot/PlotScatter/scatter_00000_persistence_vs_roughness.svg"],
            check: None,
        },
        CorpusCase {
            id: "double-sweep",
            save_dir: "slope_plot2",
            original: "Loop:random_amp=linspace[0,0.5,6] Loop:persistance=linspace[0.5,0.7,21] Octaves WeightedSum Slope Roughness LogData",
            desk: Some("Loop:random_amp=linspace[0,0.5,6] Loop:persistence=linspace[0.5,0.7,21] Octaves WeightedSum Slope Roughness LogData"),
            settings: &[],
            files: &["slope_plot2/LogData/data.atdc"],
            check: Some(check_double_sweep),
        },
        CorpusCase {
            id: "double-sweep-scatter",
            save_dir: "slope_plot2",
            original: "LoadData:slope_plot2/LogData/data.npz PlotScatter:\"dict(color='random_amp',cmap='cet_bjy')\"",
            desk: None,
            settings: &[],
            files: &["slope_plot2/PlotScatter/scatter_00000_roughness_vs_slope_deg.svg"],
            check: None,
        },
        CorpusCase {
            id: "proxy-roughness",
            save_dir: "proxy-roughness",
            original: "Loop:num_octaves=arange[1,11] Loop:50 Octaves Roughness CombineRoughness WeightedSum Roughness LogData",
            desk: Some("Loop:num_octaves=arange[1,7] Loop:10 Octaves Roughness CombineRoughness WeightedSum Roughness LogData"),
            settings: &[],
            files: &["proxy-roughness/LogData/data.atdc"],
            check: Some(check_proxy_logged),
        },
        CorpusCase {
            id: "proxy-roughness-scatter",
            save_dir: "proxy-roughness",
            original: "LoadData:proxy-roughness/LogData/data.npz PlotScatter:\"dict(color='num_octaves',cmap='cet_bjy',grid=True)\"",
            desk: None,
            settings: &[],
            files: &["proxy-roughness/PlotScatter/scatter_00000_r_proxy_vs_roughness.svg"],
            check: None,
        },
        CorpusCase {
            id: "slope-grid-elements",
            save_dir: "slope_grid",
            original: "Octaves Save",
            desk: None,
            settings: &[],
            files: &["slope_grid/Save/terrain_temp_00000_7.atrn"],
            check: None,
        },
        CorpusCase {
            id: "slope-grid",
            save_dir: "slope_grid",
            original: "Loop:target_slope_deg=linspace[5,20,4] Loop:target_roughness=linspace[1.01,1.07,4] Load:slope_grid/Save Octaves:\"dict(random_amp=0.0,random_sign=False,only_generate_weights=True)\" Slope SetSlope Roughness SetRoughness WeightedSum Ground Camera:65 Render ClearScene ClearTerrain",
            desk: None,
            settings: &[],
            files: &["slope_grid/Hillshade/hillshade_00015_0.png"],
            check: None,
        },
        CorpusCase {
            id: "rock-fraction-sweep",
            save_dir: "rocksize_fraction",
            original: "Resolution:10 Loop:fraction=linspace[0.5,0.95,10] Loop:rock_size=linspace[0.5,4,15] Rocks FindRocks SurfaceStructure LogData",
            desk: None,
            settings: &["seed:5"],
            files: &["rocksize_fraction/LogData/data.atdc"],
            check: Some(check_fraction_monotone),
        },
        CorpusCase {
            id: "rock-fraction-scatter",
            save_dir: "rocksize_fraction",
            original: "LoadData PlotScatter:\"dict(color='fraction',cmap='cet_bjy',grid=True)\"",
            desk: None,
            settings: &[],
            files: &["rocksize_fraction/PlotScatter/scatter_00000_fraction_vs_num_rocks.svg"],
            check: None,
        },
        CorpusCase {
            id: "rock-grid-renders",
            save_dir: "rocksize_fraction",
            original: "Resolution:10 Loop:fraction=linspace[0.5,0.8,4] Loop:rock_size=linspace[1,4,4] Rocks FindRocks SurfaceStructure PlotObstacles ClearScene Ground ImageTexture Camera:45 Holdout Render",
            desk: None,
            settings: &["exportmode:True"],
            files: &[
                "rocksize_fraction/PlotObstacles/obstacles_15.png",
                "rocksize_fraction/Hillshade/hillshade_00015_0.png",
            ],
            check: Some(check_export_raster_size),
        },
        CorpusCase {
            id: "height-intervals",
            save_dir: "height_intervals",
            original: "Resolution:10 Loop:rock_size=linspace[0.5,4,200] Rocks FindRocks SurfaceStructure LogData",
            desk: Some("Resolution:10 Loop:rock_size=linspace[0.5,4,40] Rocks FindRocks SurfaceStructure LogData"),
            settings: &[],
            files: &["height_intervals/LogData/data.atdc"],
            check: None,
        },
        CorpusCase {
            id: "height-intervals-scatter",
            save_dir: "height_intervals",
            original: "LoadData PlotScatter:\"dict(grid=True)\"",
            desk: None,
            settings: &[],
            files: &["height_intervals/PlotScatter/scatter_00000_h20_vs_h40.svg"],
            check: None,
        },
        CorpusCase {
            id: "spatial-rocks",
            save_dir: "spatial",
            original: "Resolution:10 Basic:10 Scale:10 Clip Plot AsFactor Rocks Combine Scale FindRocks SurfaceStructure PlotObstacles Ground ImageTexture Camera:65 Render",
            desk: None,
            settings: &["exportmode:True"],
            files: &[
                "spatial/Plot/terrain_temp_00000_0.png",
                "spatial/PlotObstacles/obstacles_0.png",
                "spatial/Hillshade/hillshade_00000_0.png",
            ],
            check: None,
        },
        CorpusCase {
            id: "spatial-mask",
            save_dir: "spatial",
            original: "Resolution:10 Plane Ground ImageTexture:spatial/Plot/terrain_temp_00000_0.png Camera:65 Holdout Render:mask.png",
            desk: None,
            settings: &[],
            files: &["spatial/Hillshade/mask.png"],
            check: None,
        },
        CorpusCase {
            id: "hexagon",
            save_dir: "hexagon",
            original: "Loop:1000 Rocks:\"dict(fraction=0.9,rock_size=4)\" EndLoop Combine:Max Plot",
            desk: Some("Loop:100 Rocks:\"dict(fraction=0.9,rock_size=4)\" EndLoop Combine:Max Plot"),
            settings: &[],
            files: &["hexagon/Plot/terrain_prim_00000_0.png"],
            check: None,
        },
        CorpusCase {
            id: "calibrated-octaves",
            save_dir: "set_slope",
            original: "Octaves Slope SetSlope:10 WeightedSum Slope",
            desk: None,
            settings: &[],
            files: &[],
            check: Some(check_set_slope_ten),
        },
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseReport {
    pub id: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorpusReport {
    pub cases: Vec<CaseReport>,
}

impl CorpusReport {
    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    /// Structured text without timings, so repeated runs compare equal.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.cases {
            let _ = writeln!(s, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.detail);
        }
        let passed = self.cases.iter().filter(|c| c.passed).count();
        let _ = writeln!(s, "{passed}/{} cases passed", self.cases.len());
        s
    }

    pub fn timings(&self) -> String {
        let mut s = String::new();
        for c in &self.cases {
            let _ = writeln!(s, "{:>8.2}s {}", c.elapsed.as_secs_f64(), c.id);
        }
        s
    }
}

/// Runs one case under `root`, which is also the working directory used to
/// resolve paths such as `basic/Save`.
pub fn run_case(root: &Path, case: &CorpusCase) -> CaseReport {
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let mut engine = Engine::new(root.join(case.save_dir))
            .with_work_dir(root)
            .with_rng_seed(CORPUS_RNG_SEED);
        for s in case.settings {
            let (k, v) = parse_cli_setting(s).map_err(|e| e.to_string())?;
            engine.settings.general.insert(k, v);
        }
        let tokens = translate(case.desk.unwrap_or(case.original));
        let outcome = engine.run_tokens(&tokens).map_err(|e| e.to_string())?;
        let missing: Vec<&str> = case.files.iter().copied().filter(|f| !root.join(f).is_file()).collect();
        if !missing.is_empty() {
            return Err(format!("missing artifacts: {}", missing.join(", ")));
        }
        match case.check {
            Some(check) => check(root, &outcome),
            None => Ok(format!("{} artifacts present", case.files.len())),
        }
    })();
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CaseReport {
        id: case.id.to_string(),
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Runs every case in order; later cases read earlier artifacts.
pub fn run_corpus(root: &Path) -> CorpusReport {
    CorpusReport {
        cases: cases().iter().map(|c| run_case(root, c)).collect(),
    }
}

/// Relative path to bytes for every file below `root`.
pub fn artifact_tree(root: &Path) -> std::io::Result<BTreeMap<PathBuf, Vec<u8>>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap_or(&path).to_path_buf();
                out.insert(rel, std::fs::read(&path)?);
            }
        }
    }
    Ok(out)
}

fn final_terrain(outcome: &RunOutcome) -> Result<&Terrain, String> {
    let pipe = outcome.finals.last().ok_or("no pipe reached the end")?;
    pipe.primary
        .last()
        .or_else(|| pipe.temporary.last())
        .map(|t| t.as_ref())
        .ok_or_else(|| "no terrain in the final pipe".to_string())
}

fn logged(root: &Path, rel: &str) -> Result<BTreeMap<String, Value>, String> {
    let c = ArrayContainer::read(&root.join(rel)).map_err(|e| e.to_string())?;
    Ok(container_to_values(&c))
}

fn column(data: &BTreeMap<String, Value>, key: &str) -> Result<Vec<f64>, String> {
    data.get(key)
        .and_then(Value::as_f64_list)
        .ok_or_else(|| format!("logged data has no numeric `{key}`"))
}

fn check_weighted_basic(root: &Path, outcome: &RunOutcome) -> Result<String, String> {
    let got = final_terrain(outcome)?;
    let parts: Vec<Terrain> = (0..3)
        .map(|k| read_terrain(&root.join(format!("basic/Save/terrain_temp_00000_{k}.atrn"))))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let w = [10.0, 3.0, 0.3];
    let mut max = 0.0f64;
    for ((i, j), v) in got.heights().indexed_iter() {
        let expect: f64 = parts.iter().zip(w).map(|(p, w)| w * p.get(i, j)).sum();
        max = max.max((v - expect).abs());
    }
    if max <= 1e-12 {
        Ok(format!("weighted sum matches saved elements (max diff {max:.1e})"))
    } else {
        Err(format!("weighted sum differs from saved elements by {max:.3e}"))
    }
}

fn check_holes_nonpositive(root: &Path, _: &RunOutcome) -> Result<String, String> {
    for k in 0..4 {
        let t = read_terrain(&root.join(format!("holes/Save/terrain_temp_00000_{k}.atrn"))).map_err(|e| e.to_string())?;
        if t.max() > 0.0 {
            return Err(format!("hole element {k} has positive height {}", t.max()));
        }
    }
    Ok("all hole elements are non-positive".into())
}

fn pipe_obstacles(outcome: &RunOutcome) -> Result<Vec<Obstacle>, String> {
    match outcome.finals.last().and_then(|p| p.values.get("obstacles")) {
        Some(Value::Obstacles(o)) => Ok(o.as_ref().clone()),
        _ => Err("final pipe has no single obstacle list".into()),
    }
}

fn check_signed_heights(_: &Path, outcome: &RunOutcome) -> Result<String, String> {
    let obs = pipe_obstacles(outcome)?;
    if obs.iter().all(|o| (-5.0..5.0).contains(&o.height)) && obs.iter().any(|o| o.height < 0.0) {
        Ok("heights drawn from uniform(-5, 5)".into())
    } else {
        Err(format!("unexpected heights {:?}", obs.iter().map(|o| o.height).collect::<Vec<_>>()))
    }
}

fn check_density_positions(_: &Path, outcome: &RunOutcome) -> Result<String, String> {
    let obs = pipe_obstacles(outcome)?;
    // the donut ring has radius 20 and sigma 4; the density is negligible
    // further than 5 sigma from it
    let far: Vec<f64> = obs
        .iter()
        .map(|o| (o.position.0.hypot(o.position.1) - 20.0).abs())
        .filter(|d| *d > 20.0)
        .collect();
    if far.is_empty() {
        Ok("all sampled positions lie near the donut ring".into())
    } else {
        Err(format!("{} positions far from the ring", far.len()))
    }
}

fn check_lookup_heights(root: &Path, _: &RunOutcome) -> Result<String, String> {
    let obs = read_obstacles(&root.join("2D_lookup/SaveObstacles/obstacles.atdc")).map_err(|e| e.to_string())?;
    let slope = 10f64.to_radians().tan();
    let mut max = 0.0f64;
    for o in obs.iter().filter(|o| o.position.1.abs() <= 24.75 && o.position.0.abs() <= 24.75) {
        max = max.max((o.height - slope * o.position.1).abs());
    }
    if max <= 1e-9 {
        Ok(format!("{} obstacle heights follow the plane lookup", obs.len()))
    } else {
        Err(format!("lookup heights deviate from the plane by {max:.3e}"))
    }
}

fn check_obstacle_disks(root: &Path, _: &RunOutcome) -> Result<String, String> {
    let svg = std::fs::read_to_string(root.join("plot_obstacles/PlotObstacles/obstacles_0.svg")).map_err(|e| e.to_string())?;
    let n = svg.matches("class=\"obstacle\"").count();
    if n == 10 {
        Ok("10 obstacle disks drawn".into())
    } else {
        Err(format!("expected 10 obstacle disks, found {n}"))
    }
}

fn check_function_closed_form(_: &Path, outcome: &RunOutcome) -> Result<String, String> {
    let t = final_terrain(outcome)?;
    let xmax = t.spec().x_centers().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let mut max = 0.0f64;
    for ((i, j), v) in t.heights().indexed_iter() {
        let (x, y) = (t.spec().x_center(i), t.spec().y_center(j));
        max = max.max((v - (5.0 * (x / xmax).powi(2) + (y / 2.0).sin())).abs());
    }
    if max <= 1e-12 {
        Ok(format!("expression matches closed form (max diff {max:.1e})"))
    } else {
        Err(format!("expression deviates from closed form by {max:.3e}"))
    }
}

fn check_four_tiles(_: &Path, outcome: &RunOutcome) -> Result<String, String> {
    let pipe = outcome.finals.last().ok_or("no pipe reached the end")?;
    if outcome.finals.len() == 1 && pipe.primary.len() == 4 {
        Ok("EndLoop merged four tiles".into())
    } else {
        Err(format!("{} final pipes, {} primary terrains", outcome.finals.len(), pipe.primary.len()))
    }
}

/// Max difference between a stacked result and one full-extent run of
/// `tokens` with the same engine seed.
pub fn full_extent_diff(stacked: &Terrain, tokens: &[&str]) -> Result<f64, String> {
    let dir = std::env::temp_dir();
    let engine = Engine::new(dir).with_rng_seed(CORPUS_RNG_SEED);
    let out = engine.run_tokens(tokens).map_err(|e| e.to_string())?;
    let full = final_terrain(&out)?;
    if full.spec() != stacked.spec() {
        return Err(format!("grid mismatch: {:?} vs {:?}", full.spec(), stacked.spec()));
    }
    Ok(full
        .heights()
        .iter()
        .zip(stacked.heights().iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

fn check_stack_seam(_: &Path, outcome: &RunOutcome) -> Result<String, String> {
    let stacked = final_terrain(outcome)?;
    let diff = full_extent_diff(stacked, &["Seed:2", "Basic", "WeightedSum"])?;
    if diff <= 1e-9 {
        Ok(format!("stacked tiles equal full-extent generation (max diff {diff:.1e})"))
    } else {
        Err(format!("stacked tiles differ from full extent by {diff:.3e}"))
    }
}

/// Largest difference across the x = 0 border of the lower tiles between
/// the Gaussian fields of two obstacle lists.
pub fn border_jump(left: &[Obstacle], right: &[Obstacle]) -> f64 {
    let field = |obs: &[Obstacle], x: f64, y: f64| -> f64 {
        obs.iter().map(|o| shape_value(ShapeKind::Gaussian, o, x, y)).sum()
    };
    (0..=100)
        .map(|k| -25.0 + 25.0 * k as f64 / 100.0)
        .map(|y| (field(left, 0.0, y) - field(right, 0.0, y)).abs())
        .fold(0.0, f64::max)
}

/// Obstacle lists seen by each tile after EndLoop.
pub fn tile_obstacles(outcome: &RunOutcome) -> Result<Vec<Vec<Obstacle>>, String> {
    let pipe = outcome.finals.last().ok_or("no pipe reached the end")?;
    match pipe.values.get("obstacles") {
        Some(Value::Obstacles(o)) => Ok(vec![o.as_ref().clone(); 4]),
        Some(Value::List(items)) => items
            .iter()
            .map(|v| match v {
                Value::Obstacles(o) => Ok(o.as_ref().clone()),
                other => Err(format!("unexpected {} in obstacle list", other.type_name())),
            })
            .collect(),
        _ => Err("no obstacles in the final pipe".into()),
    }
}

fn check_per_tile_jump(_: &Path, outcome: &RunOutcome) -> Result<String, String> {
    let tiles = tile_obstacles(outcome)?;
    let jump = border_jump(&tiles[0], &tiles[1]);
    if jump > 1e-3 {
        Ok(format!("per-tile sampling leaves a border jump of {jump:.3}"))
    } else {
        Err(format!("expected a border discontinuity, jump is {jump:.3e}"))
    }
}

fn check_shared_no_jump(_: &Path, outcome: &RunOutcome) -> Result<String, String> {
    let tiles = tile_obstacles(outcome)?;
    let jump = border_jump(&tiles[0], &tiles[1]);
    if jump <= 1e-9 {
        Ok(format!("shared obstacle list is seamless (jump {jump:.1e})"))
    } else {
        Err(format!("shared obstacles jump by {jump:.3e} at the border"))
    }
}

/// Count of decreases in `values` ordered by `keys`.
pub fn decreases(keys: &[f64], values: &[f64]) -> usize {
    let mut pairs: Vec<(f64, f64)> = keys.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.windows(2).filter(|w| w[1].1 < w[0].1).count()
}

fn check_persistence_trend(root: &Path, _: &RunOutcome) -> Result<String, String> {
    let data = logged(root, "slope_plot/LogData/data.atdc")?;
    let p = column(&data, "persistence")?;
    let r = column(&data, "roughness")?;
    let bad = decreases(&p, &r);
    if p.len() == 100 && bad <= 2 {
        Ok(format!("roughness rises with persistence ({bad} violations in 100)"))
    } else {
        Err(format!("{bad} decreases over {} points", p.len()))
    }
}

fn check_double_sweep(root: &Path, _: &RunOutcome) -> Result<String, String> {
    let data = logged(root, "slope_plot2/LogData/data.atdc")?;
    let n = column(&data, "roughness")?.len();
    if n == 126 {
        Ok("nested sweeps ran 6 x 21 times".into())
    } else {
        Err(format!("expected 126 records, found {n}"))
    }
}

fn check_proxy_logged(root: &Path, _: &RunOutcome) -> Result<String, String> {
    let data = logged(root, "proxy-roughness/LogData/data.atdc")?;
    let proxy = column(&data, "r_proxy")?;
    let r = column(&data, "roughness")?;
    let mut errs: Vec<f64> = proxy
        .iter()
        .zip(&r)
        .map(|(p, r)| (p - r).abs() / (r - 1.0 + 1e-12))
        .collect();
    errs.sort_by(f64::total_cmp);
    let median = errs[errs.len() / 2];
    Ok(format!("{} records, median relative proxy error {median:.3}", errs.len()))
}

fn check_fraction_monotone(root: &Path, _: &RunOutcome) -> Result<String, String> {
    let data = logged(root, "rocksize_fraction/LogData/data.atdc")?;
    let f = column(&data, "fraction")?;
    let s = column(&data, "rock_size")?;
    let n = column(&data, "num_rocks")?;
    let mut groups: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for k in 0..f.len() {
        let g = groups.entry(s[k].to_bits()).or_default();
        g.0.push(f[k]);
        g.1.push(n[k]);
    }
    let rising: usize = groups
        .values()
        .map(|(f, n)| decreases(f, &n.iter().map(|v| -v).collect::<Vec<_>>()))
        .sum();
    if rising == 0 {
        Ok(format!("rock count nonincreasing in fraction for all {} sizes", groups.len()))
    } else {
        Err(format!("rock count increased with fraction {rising} times"))
    }
}

fn check_export_raster_size(root: &Path, _: &RunOutcome) -> Result<String, String> {
    let bytes = std::fs::read(root.join("rocksize_fraction/PlotObstacles/obstacles_0.png")).map_err(|e| e.to_string())?;
    // IHDR width and height sit at bytes 16..24
    let w = u32::from_be_bytes(bytes[16..20].try_into().expect("4 bytes"));
    let h = u32::from_be_bytes(bytes[20..24].try_into().expect("4 bytes"));
    if (w, h) == (500, 500) {
        Ok("exported obstacle raster is 500 x 500".into())
    } else {
        Err(format!("exported raster is {w} x {h}, expected 500 x 500"))
    }
}

fn check_set_slope_ten(_: &Path, outcome: &RunOutcome) -> Result<String, String> {
    let pipe = outcome.finals.last().ok_or("no pipe reached the end")?;
    let s = pipe
        .values
        .get("slope_deg")
        .and_then(Value::as_f64)
        .ok_or("no slope measured")?;
    if (s - 10.0).abs() <= 0.01 {
        Ok(format!("calibrated slope {s:.4} degrees"))
    } else {
        Err(format!("calibrated slope {s:.4} degrees, expected 10"))
    }
}
