use std::cell::RefCell;
use std::rc::Rc;

use terrain_pipeline::engine::{Ctx, Module, Pipe};
use terrain_pipeline::{Engine, PipelineError, Registry, Result, Value};

type Log = Rc<RefCell<Vec<String>>>;

/// Records `label:<values of the watched keys>` on every call.
struct Probe {
    label: &'static str,
    log: Log,
}

impl Module for Probe {
    fn run(&mut self, ctx: &mut Ctx, pipe: Pipe) -> Result<Vec<Pipe>> {
        let watched: Vec<String> = ["branch", "a", "b", "k"]
            .iter()
            .filter_map(|k| ctx.get(k).map(|v| format!("{k}={v}")))
            .collect();
        self.log.borrow_mut().push(format!("{}:{}", self.label, watched.join(",")));
        Ok(vec![pipe])
    }
}

/// Yields two pipes, `branch=0` and `branch=1`.
struct Fork;

impl Module for Fork {
    fn run(&mut self, _ctx: &mut Ctx, pipe: Pipe) -> Result<Vec<Pipe>> {
        (0..2)
            .map(|b| {
                let mut p = pipe.clone();
                p.set("branch", Value::Int(b));
                Ok(p)
            })
            .collect()
    }
}

/// Sets `same=1` and `diff=10*k`.
struct Tag;

impl Module for Tag {
    fn run(&mut self, ctx: &mut Ctx, mut pipe: Pipe) -> Result<Vec<Pipe>> {
        let k = ctx.get("k").and_then(Value::as_i64).unwrap_or(0);
        pipe.set("same", Value::Int(1));
        pipe.set("diff", Value::Int(10 * k));
        Ok(vec![pipe])
    }
}

fn engine(log: &Log) -> (Engine, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let mut registry = Registry::standard();
    for label in ["ProbeA", "ProbeB"] {
        let log = Rc::clone(log);
        registry.register(label, move || {
            Box::new(Probe {
                label,
                log: Rc::clone(&log),
            })
        });
    }
    registry.register("Fork", || Box::new(Fork));
    registry.register("Tag", || Box::new(Tag));
    let mut e = Engine::new(dir.path()).with_rng_seed(1);
    e.registry = registry;
    (e, dir)
}

fn entries(log: &Log) -> Vec<String> {
    log.borrow().clone()
}

#[test]
fn outputs_run_depth_first() {
    let log = Log::default();
    let (e, _dir) = engine(&log);
    e.run_tokens(&["Fork", "ProbeA", "ProbeB"]).unwrap();
    assert_eq!(
        entries(&log),
        ["ProbeA:branch=0", "ProbeB:branch=0", "ProbeA:branch=1", "ProbeB:branch=1"]
    );
}

#[test]
fn end_loop_continues_once() {
    let log = Log::default();
    let (e, _dir) = engine(&log);
    let out = e.run_tokens(&["Loop:3", "ProbeA", "EndLoop", "ProbeB"]).unwrap();
    let calls = entries(&log);
    assert_eq!(calls.iter().filter(|c| c.starts_with("ProbeA")).count(), 3);
    assert_eq!(calls.iter().filter(|c| c.starts_with("ProbeB")).count(), 1);
    assert_eq!(calls.last().unwrap(), "ProbeB:");
    assert_eq!(out.finals.len(), 1);
}

#[test]
fn nested_sweeps_run_every_combination_in_order() {
    let log = Log::default();
    let (e, _dir) = engine(&log);
    e.run_tokens(&["Loop:a=[1,2,3]", "Loop:b=[10,20]", "ProbeA"]).unwrap();
    assert_eq!(
        entries(&log),
        ["a=1,b=10", "a=1,b=20", "a=2,b=10", "a=2,b=20", "a=3,b=10", "a=3,b=20"]
            .map(|s| format!("ProbeA:{s}"))
    );
}

#[test]
fn unclosed_loops_yield_one_final_pipe_per_iteration() {
    let log = Log::default();
    let (e, _dir) = engine(&log);
    let out = e.run_tokens(&["Loop:a=linspace[0,1,5]", "ProbeA"]).unwrap();
    assert_eq!(out.finals.len(), 5);
    assert_eq!(out.finals[4].values["a"], Value::Float(1.0));
}

#[test]
fn merge_keeps_equal_values_and_lists_varying_ones() {
    let log = Log::default();
    let (e, _dir) = engine(&log);
    let out = e.run_tokens(&["Loop:k=[1,2]", "Tag", "EndLoop"]).unwrap();
    let v = &out.finals[0].values;
    assert_eq!(v["same"], Value::Int(1));
    assert_eq!(v["diff"], Value::List(vec![Value::Int(10), Value::Int(20)]));
    assert!(!v.contains_key("k"), "loop key must be restored to its entry state");
}

#[test]
fn end_loop_collects_terrains_from_every_iteration() {
    let log = Log::default();
    let (e, _dir) = engine(&log);
    let out = e.run_tokens(&["Loop:2x2", "Basic", "WeightedSum", "EndLoop"]).unwrap();
    assert_eq!(out.finals[0].primary.len(), 4);
    let stacked = e.run_tokens(&["Loop:2x2", "Basic", "WeightedSum", "EndLoop", "Stack"]).unwrap();
    let t = &stacked.finals[0].primary[0];
    assert_eq!(t.spec().shape(), (100, 100));
}

#[test]
fn exit_stops_further_iterations() {
    let log = Log::default();
    let (e, _dir) = engine(&log);
    let out = e.run_tokens(&["Loop:5", "ProbeA", "Exit", "ProbeB"]).unwrap();
    assert!(out.exited);
    assert_eq!(entries(&log), ["ProbeA:", "ProbeB:"]);
}

#[test]
fn seed_makes_generation_independent_of_the_engine_stream() {
    let dir = tempfile::tempdir().unwrap();
    let run = |rng: u64, tokens: &[&str]| {
        let out = Engine::new(dir.path()).with_rng_seed(rng).run_tokens(tokens).unwrap();
        out.finals[0].temporary[0].heights().clone()
    };
    assert_eq!(run(1, &["Seed:5", "Basic"]), run(2, &["Seed:5", "Basic"]));
    assert_eq!(run(3, &["Basic"]), run(3, &["Basic"]));
    assert_ne!(run(3, &["Basic"]), run(4, &["Basic"]));
}

#[test]
fn set_stores_keyword_values() {
    let dir = tempfile::tempdir().unwrap();
    let e = Engine::new(dir.path());
    let out = e.run_tokens(&["Set:dict(foo=3,bar='x')"]).unwrap();
    assert_eq!(out.finals[0].values["foo"], Value::Int(3));
    assert_eq!(out.finals[0].values["bar"], Value::Str("x".into()));
    assert!(e.run_tokens(&["Set:3"]).is_err());
}

#[test]
fn module_errors_name_the_module_and_keep_the_cause() {
    let dir = tempfile::tempdir().unwrap();
    let e = Engine::new(dir.path());
    let err = e.run_tokens(&["Basic", "ClearTerrain", "Combine"]).unwrap_err();
    match &err {
        PipelineError::Module { index, name, source, .. } => {
            assert_eq!((*index, name.as_str()), (2, "Combine"));
            assert!(matches!(**source, PipelineError::Terrain(terrain_core::TerrainError::NoTerrains)));
        }
        other => panic!("unexpected error {other:?}"),
    }
    assert!(!err.is_usage());
}

#[test]
fn structural_problems_are_reported_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let e = Engine::new(dir.path());
    let unknown = e.run_tokens(&["Basik"]).unwrap_err();
    assert!(unknown.is_usage());
    assert!(unknown.to_string().contains("Basic"), "{unknown}");
    let render = e.run_tokens(&["Basic", "Render"]).unwrap_err();
    assert!(matches!(render, PipelineError::Unsupported { .. }));
    assert!(render.to_string().contains("Hillshade"), "{render}");
    assert!(e.run_tokens(&["Basic", "EndLoop"]).unwrap_err().is_usage());
    assert!(e.run_tokens(&["Loop:0", "Basic"]).unwrap_err().is_usage());
    assert!(e.run_tokens(&["Loop:height=uniform(1,2)", "Basic"]).unwrap_err().is_usage());
    let deep: Vec<String> = (0..17).map(|_| "Loop:1".to_string()).collect();
    assert!(e.run_tokens(&deep).unwrap_err().is_usage());
}

#[test]
fn settings_layers_reach_modules() {
    let dir = tempfile::tempdir().unwrap();
    let mut e = Engine::new(dir.path());
    e.settings.general.insert("grid_size".into(), Value::List(vec![Value::Int(20), Value::Int(30)]));
    let out = e.run_tokens(&["Basic"]).unwrap();
    assert_eq!(out.finals[0].temporary[0].spec().shape(), (20, 30));
    // a module argument overrides the general setting
    let out = e.run_tokens(&["GridSize:[8,8]", "Basic"]).unwrap();
    assert_eq!(out.finals[0].temporary[0].spec().shape(), (8, 8));
    e.settings.general.insert("grid_size".into(), Value::Str("big".into()));
    assert!(e.run_tokens(&["Basic"]).is_err());
}

#[test]
fn save_and_load_round_trip_through_the_pipe() {
    let dir = tempfile::tempdir().unwrap();
    let e = Engine::new(dir.path()).with_work_dir(dir.path()).with_rng_seed(4);
    let first = e.run_tokens(&["Basic", "WeightedSum", "Save"]).unwrap();
    let loaded = e.run_tokens(&["Load:Save"]).unwrap();
    let a = &first.finals[0].primary[0];
    let b = &loaded.finals[0].primary[0];
    assert_eq!(a.heights(), b.heights());
    assert_eq!(a.spec(), b.spec());
}

#[test]
fn log_data_collects_one_record_per_call() {
    let dir = tempfile::tempdir().unwrap();
    let e = Engine::new(dir.path()).with_work_dir(dir.path()).with_rng_seed(2);
    e.run_tokens(&["Loop:persistence=linspace[0.2,0.8,4]", "Octaves", "WeightedSum", "Roughness", "LogData"])
        .unwrap();
    let out = e.run_tokens(&["LoadData"]).unwrap();
    let v = &out.finals[0].values;
    assert_eq!(v["persistence"].as_f64_list().unwrap().len(), 4);
    assert_eq!(v["roughness"].as_f64_list().unwrap().len(), 4);
}
