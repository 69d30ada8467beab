//! Depth-first pipeline execution.
//!
//! Each module receives a pipe and yields zero or more pipes; every output
//! runs through the rest of the program before the next one is produced.
//! Loop and EndLoop are handled here because they need the loop frames.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::rc::Rc;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use terrain_core::obstacles::ParamDistribution;
use terrain_core::{split_extent, Extent, GridSpec, Terrain};

use crate::error::{PipelineError, Result};
use crate::parse::{parse_token, Invocation};
use crate::registry::Registry;
use crate::settings::{Args, Settings};
use crate::value::{require_list, Value};

/// Deepest allowed Loop nesting.
pub const MAX_LOOP_DEPTH: usize = 16;

/// Data handed from module to module.
#[derive(Clone, Debug, Default)]
pub struct Pipe {
    pub values: Args,
    pub temporary: Vec<Arc<Terrain>>,
    pub primary: Vec<Arc<Terrain>>,
}

impl Pipe {
    /// Temporary terrains if any, otherwise primary ones.
    pub fn working(&self) -> &[Arc<Terrain>] {
        if self.temporary.is_empty() {
            &self.primary
        } else {
            &self.temporary
        }
    }

    /// Removes and returns the working terrains.
    pub fn take_working(&mut self) -> Vec<Arc<Terrain>> {
        if self.temporary.is_empty() {
            std::mem::take(&mut self.primary)
        } else {
            std::mem::take(&mut self.temporary)
        }
    }

    /// Removes the last working terrain.
    pub fn pop_working(&mut self) -> Option<Arc<Terrain>> {
        if self.temporary.is_empty() {
            self.primary.pop()
        } else {
            self.temporary.pop()
        }
    }

    /// Applies `f` to every working terrain in place.
    pub fn map_working(&mut self, mut f: impl FnMut(&Terrain) -> Result<Terrain>) -> Result<()> {
        let list = if self.temporary.is_empty() {
            &mut self.primary
        } else {
            &mut self.temporary
        };
        for t in list.iter_mut() {
            *t = Arc::new(f(t)?);
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: Value) {
        self.values.insert(key.to_string(), v);
    }

    pub fn summary(&self) -> String {
        let vals: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={}", v.summary())).collect();
        format!(
            "{{{}}} temporary={} primary={}",
            vals.join(", "),
            self.temporary.len(),
            self.primary.len()
        )
    }
}

/// Per-invocation context for a module.
pub struct Ctx<'a> {
    pub name: &'a str,
    /// Merged arguments from all settings layers.
    pub args: Args,
    /// The invocation's own keyword arguments.
    pub kwargs: &'a Args,
    pub default: Option<Value>,
    /// Number of earlier calls of this module instance.
    pub call: usize,
    pub save_dir: &'a Path,
    pub work_dir: &'a Path,
    pub rng: &'a mut ChaCha8Rng,
    pub exit: &'a mut bool,
}

impl Ctx<'_> {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.args.get(key)
    }

    /// The default argument, falling back to the named argument.
    pub fn primary_arg(&self, key: &str) -> Option<&Value> {
        self.default.as_ref().or_else(|| self.args.get(key))
    }

    pub fn f64_or(&self, key: &str, fallback: f64) -> Result<f64> {
        match self.get(key) {
            Some(v) => crate::value::require_f64(key, v),
            None => Ok(fallback),
        }
    }

    pub fn bool_or(&self, key: &str, fallback: bool) -> Result<bool> {
        match self.get(key) {
            Some(v) => v
                .as_bool()
                .ok_or_else(|| PipelineError::arg(key, format!("expected a bool, got `{v}`"))),
            None => Ok(fallback),
        }
    }

    pub fn str_or<'s>(&'s self, key: &str, fallback: &'s str) -> Result<&'s str> {
        match self.get(key) {
            Some(Value::Str(s)) => Ok(s),
            Some(v) => Err(PipelineError::arg(key, format!("expected a string, got `{v}`"))),
            None => Ok(fallback),
        }
    }

    /// `seed` from the arguments, else a fresh draw from the run's RNG.
    pub fn seed(&mut self) -> Result<u64> {
        match self.args.get("seed") {
            Some(v) => v
                .as_i64()
                .map(|s| s as u64)
                .ok_or_else(|| PipelineError::arg("seed", format!("expected an integer, got `{v}`"))),
            None => Ok(self.rng.next_u64()),
        }
    }

    pub fn spec(&self) -> Result<GridSpec> {
        grid_spec(&self.args)
    }

    /// Output directory `save_dir/<name>`.
    pub fn module_dir(&self) -> PathBuf {
        self.save_dir.join(self.name)
    }

    /// Resolves a user path against the working directory, then the save
    /// directory.
    pub fn resolve_path(&self, p: &str) -> PathBuf {
        let path = Path::new(p);
        if path.is_absolute() {
            return path.to_path_buf();
        }
        let w = self.work_dir.join(path);
        if w.exists() {
            return w;
        }
        let s = self.save_dir.join(path);
        if s.exists() {
            s
        } else {
            w
        }
    }
}

pub const DEFAULT_EXTENT: [f64; 4] = [-25.0, 25.0, -25.0, 25.0];
pub const DEFAULT_GRID_SIZE: [usize; 2] = [100, 100];

/// Grid from the `extent` and `grid_size` arguments.
pub fn grid_spec(args: &Args) -> Result<GridSpec> {
    let e = match args.get("extent") {
        Some(v) => {
            let e = require_list("extent", v)?;
            if e.len() != 4 {
                return Err(PipelineError::arg("extent", format!("expected 4 numbers, got {}", e.len())));
            }
            [e[0], e[1], e[2], e[3]]
        }
        None => DEFAULT_EXTENT,
    };
    let (nx, ny) = match args.get("grid_size") {
        Some(v) => {
            let g = require_list("grid_size", v)?;
            let to_n = |x: f64| {
                if x >= 1.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(PipelineError::arg("grid_size", format!("`{x}` is not a positive integer")))
                }
            };
            match g.as_slice() {
                [n] => (to_n(*n)?, to_n(*n)?),
                [a, b] => (to_n(*a)?, to_n(*b)?),
                _ => return Err(PipelineError::arg("grid_size", "expected one or two integers")),
            }
        }
        None => (DEFAULT_GRID_SIZE[0], DEFAULT_GRID_SIZE[1]),
    };
    Ok(GridSpec::new(Extent::new(e[0], e[1], e[2], e[3]), nx, ny)?)
}

pub fn spec_values(spec: &GridSpec) -> (Value, Value) {
    (
        Value::float_list(spec.extent().as_array()),
        Value::List(vec![Value::Int(spec.nx() as i64), Value::Int(spec.ny() as i64)]),
    )
}

/// Context available after the whole program has run.
pub struct FinishCtx<'a> {
    pub name: &'a str,
    pub save_dir: &'a Path,
}

impl FinishCtx<'_> {
    pub fn module_dir(&self) -> PathBuf {
        self.save_dir.join(self.name)
    }
}

pub trait Module {
    fn run(&mut self, ctx: &mut Ctx, pipe: Pipe) -> Result<Vec<Pipe>>;

    fn finish(&mut self, _ctx: &FinishCtx) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoopSpec {
    Repeat(usize),
    Grid(usize, usize),
    Sweep { key: String, values: Vec<Value> },
}

fn loop_spec(inv: &Invocation) -> std::result::Result<LoopSpec, String> {
    if let Some(v) = &inv.default {
        if let Some(n) = v.as_i64() {
            return if n >= 1 {
                Ok(LoopSpec::Repeat(n as usize))
            } else {
                Err(format!("repeat count must be at least 1, got {n}"))
            };
        }
        if let Some((a, b)) = v.as_str().and_then(|s| s.split_once('x')) {
            if let (Ok(a), Ok(b)) = (a.parse::<usize>(), b.parse::<usize>()) {
                if a >= 1 && b >= 1 {
                    return Ok(LoopSpec::Grid(a, b));
                }
            }
        }
        return Err(format!("expected a count, AxB or key=sequence, got `{v}`"));
    }
    if inv.kwargs.len() != 1 {
        return Err("expects a count, AxB or exactly one key=sequence".into());
    }
    let (key, v) = inv.kwargs.iter().next().expect("one entry");
    let values = match v {
        Value::List(items) if !items.is_empty() => items.clone(),
        Value::Dist(d) => match d.sequence() {
            Some(seq) if !seq.is_empty() => sequence_values(d, seq),
            Some(_) => return Err(format!("`{key}` sequence is empty")),
            None => return Err(format!("`{key}` needs a deterministic sequence, got {d}")),
        },
        other => return Err(format!("`{key}` needs a list or sequence, got `{other}`")),
    };
    Ok(LoopSpec::Sweep {
        key: key.clone(),
        values,
    })
}

/// Integer-valued aranges stay integers so counts can be swept.
fn sequence_values(d: &ParamDistribution, seq: Vec<f64>) -> Vec<Value> {
    let integral = matches!(d, ParamDistribution::Arange { .. }) && d.args().iter().all(|a| a.fract() == 0.0);
    seq.into_iter()
        .map(|v| if integral { Value::Int(v as i64) } else { Value::Float(v) })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepKind {
    Module,
    Loop(LoopSpec),
    EndLoop { loop_step: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub inv: Invocation,
    pub kind: StepKind,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub steps: Vec<Step>,
}

impl Program {
    /// Parses and validates tokens: names, loop arguments and nesting.
    pub fn parse<S: AsRef<str>>(tokens: &[S], registry: &Registry) -> Result<Program> {
        let mut steps = Vec::new();
        let mut open: Vec<usize> = Vec::new();
        for (index, tok) in tokens.iter().enumerate() {
            let inv = parse_token(tok.as_ref())?;
            registry.check(&inv.name)?;
            let kind = match inv.name.as_str() {
                "Loop" => {
                    let spec = loop_spec(&inv).map_err(|m| PipelineError::Parse {
                        token: tok.as_ref().to_string(),
                        column: 6.min(tok.as_ref().len()),
                        message: m,
                    })?;
                    open.push(index);
                    if open.len() > MAX_LOOP_DEPTH {
                        return Err(PipelineError::Structure(format!(
                            "loops nested deeper than {MAX_LOOP_DEPTH}"
                        )));
                    }
                    StepKind::Loop(spec)
                }
                "EndLoop" => {
                    let loop_step = open.pop().ok_or_else(|| {
                        PipelineError::Structure(format!("EndLoop at position {index} has no open Loop"))
                    })?;
                    StepKind::EndLoop { loop_step }
                }
                _ => StepKind::Module,
            };
            steps.push(Step { inv, kind });
        }
        Ok(Program { steps })
    }
}

struct Frame {
    loop_step: usize,
    iter: usize,
    total: usize,
    entry: Rc<Pipe>,
    own_keys: Vec<String>,
}

/// Combines the pipes that reached an EndLoop into one.
pub fn merge_iterations(entry: &Pipe, iters: Vec<Pipe>, own_keys: &[String]) -> Pipe {
    let mut out = Pipe {
        values: entry.values.clone(),
        ..Pipe::default()
    };
    let keys: BTreeSet<String> = iters.iter().flat_map(|p| p.values.keys().cloned()).collect();
    for k in entry.values.keys() {
        if !keys.contains(k) {
            out.values.remove(k);
        }
    }
    for k in keys {
        if own_keys.contains(&k) {
            match entry.values.get(&k) {
                Some(v) => out.values.insert(k, v.clone()),
                None => out.values.remove(&k),
            };
            continue;
        }
        let vals: Vec<&Value> = iters.iter().filter_map(|p| p.values.get(&k)).collect();
        let same = vals.len() == iters.len() && vals.windows(2).all(|w| w[0] == w[1]);
        let v = if same {
            vals[0].clone()
        } else {
            Value::List(vals.into_iter().cloned().collect())
        };
        out.values.insert(k, v);
    }
    let collect = |entry_list: &[Arc<Terrain>], pick: fn(&Pipe) -> &Vec<Arc<Terrain>>| {
        let contains = |list: &[Arc<Terrain>], t: &Arc<Terrain>| list.iter().any(|x| Arc::ptr_eq(x, t));
        let mut list: Vec<Arc<Terrain>> = match iters.last() {
            Some(last) => entry_list.iter().filter(|t| contains(pick(last), t)).cloned().collect(),
            None => entry_list.to_vec(),
        };
        for p in &iters {
            list.extend(pick(p).iter().filter(|t| !contains(entry_list, t)).cloned());
        }
        list
    };
    out.temporary = collect(&entry.temporary, |p| &p.temporary);
    out.primary = collect(&entry.primary, |p| &p.primary);
    out
}

/// Result of a run: the pipes that reached the end of the program.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub finals: Vec<Pipe>,
    pub exited: bool,
}

pub struct Engine {
    pub registry: Registry,
    pub settings: Settings,
    pub save_dir: PathBuf,
    pub work_dir: PathBuf,
    pub rng_seed: Option<u64>,
}

struct RunState<'p> {
    program: &'p Program,
    modules: Vec<Option<Box<dyn Module>>>,
    calls: Vec<usize>,
    accum: HashMap<usize, Vec<Pipe>>,
    rng: ChaCha8Rng,
    exit: bool,
    finals: Vec<Pipe>,
}

impl Engine {
    pub fn new(save_dir: impl Into<PathBuf>) -> Self {
        Engine {
            registry: Registry::standard(),
            settings: Settings::default(),
            save_dir: save_dir.into(),
            work_dir: std::env::current_dir().unwrap_or_else(|_| PathBuf::from(".")),
            rng_seed: None,
        }
    }

    pub fn with_rng_seed(mut self, seed: u64) -> Self {
        self.rng_seed = Some(seed);
        self
    }

    pub fn with_work_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.work_dir = dir.into();
        self
    }

    pub fn parse<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Program> {
        Program::parse(tokens, &self.registry)
    }

    pub fn run_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Result<RunOutcome> {
        let program = self.parse(tokens)?;
        self.run(&program)
    }

    pub fn run(&self, program: &Program) -> Result<RunOutcome> {
        let modules = program
            .steps
            .iter()
            .map(|s| match s.kind {
                StepKind::Module => self.registry.create(&s.inv.name).map(Some),
                _ => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        let seed = self.rng_seed.unwrap_or_else(rand::random);
        let mut state = RunState {
            program,
            calls: vec![0; program.steps.len()],
            modules,
            accum: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            exit: false,
            finals: Vec::new(),
        };
        self.exec(&mut state, 0, Pipe::default(), &[])?;
        for (step, module) in program.steps.iter().zip(state.modules.iter_mut()) {
            if let Some(m) = module {
                let ctx = FinishCtx {
                    name: &step.inv.name,
                    save_dir: &self.save_dir,
                };
                m.finish(&ctx)?;
            }
        }
        Ok(RunOutcome {
            finals: state.finals,
            exited: state.exit,
        })
    }

    fn wrap(index: usize, name: &str, pipe: &str, e: PipelineError) -> PipelineError {
        PipelineError::Module {
            index,
            name: name.to_string(),
            source: Box::new(e),
            pipe: pipe.to_string(),
        }
    }

    fn exec(&self, st: &mut RunState, index: usize, pipe: Pipe, frames: &[Rc<Frame>]) -> Result<()> {
        let program = st.program;
        let Some(step) = program.steps.get(index) else {
            st.finals.push(pipe);
            return Ok(());
        };
        let name = step.inv.name.as_str();
        match &step.kind {
            StepKind::Loop(spec) => {
                let summary = pipe.summary();
                let iterations = self
                    .loop_iterations(spec, &pipe)
                    .map_err(|e| Self::wrap(index, name, &summary, e))?;
                let own_keys: Vec<String> = iterations
                    .first()
                    .map(|u| u.iter().map(|(k, _)| k.clone()).collect())
                    .unwrap_or_default();
                let entry = Rc::new(pipe);
                let total = iterations.len();
                for (iter, updates) in iterations.into_iter().enumerate() {
                    if iter > 0 && st.exit {
                        break;
                    }
                    let mut p = (*entry).clone();
                    for (k, v) in updates {
                        p.values.insert(k, v);
                    }
                    let mut inner: Vec<Rc<Frame>> = frames.to_vec();
                    inner.push(Rc::new(Frame {
                        loop_step: index,
                        iter,
                        total,
                        entry: Rc::clone(&entry),
                        own_keys: own_keys.clone(),
                    }));
                    self.exec(st, index + 1, p, &inner)?;
                }
                Ok(())
            }
            StepKind::EndLoop { loop_step } => {
                let pos = frames
                    .iter()
                    .rposition(|f| f.loop_step == *loop_step)
                    .expect("EndLoop only runs inside its Loop");
                let frame = Rc::clone(&frames[pos]);
                st.accum.entry(index).or_default().push(pipe);
                if frame.iter + 1 == frame.total {
                    let iters = st.accum.remove(&index).unwrap_or_default();
                    let merged = merge_iterations(&frame.entry, iters, &frame.own_keys);
                    self.exec(st, index + 1, merged, &frames[..pos])?;
                }
                Ok(())
            }
            StepKind::Module => {
                let summary = pipe.summary();
                let args = self
                    .settings
                    .resolve(&pipe.values, &step.inv.kwargs)
                    .map_err(|e| Self::wrap(index, name, &summary, e))?;
                let call = st.calls[index];
                st.calls[index] += 1;
                let mut module = st.modules[index].take().expect("module instantiated");
                let result = {
                    let mut ctx = Ctx {
                        name,
                        args,
                        kwargs: &step.inv.kwargs,
                        default: step.inv.default.clone(),
                        call,
                        save_dir: &self.save_dir,
                        work_dir: &self.work_dir,
                        rng: &mut st.rng,
                        exit: &mut st.exit,
                    };
                    module.run(&mut ctx, pipe)
                };
                st.modules[index] = Some(module);
                let outputs = result.map_err(|e| Self::wrap(index, name, &summary, e))?;
                for (k, out) in outputs.into_iter().enumerate() {
                    if k > 0 && st.exit {
                        break;
                    }
                    self.exec(st, index + 1, out, frames)?;
                }
                Ok(())
            }
        }
    }

    fn loop_iterations(&self, spec: &LoopSpec, pipe: &Pipe) -> Result<Vec<Vec<(String, Value)>>> {
        Ok(match spec {
            LoopSpec::Repeat(n) => vec![Vec::new(); *n],
            LoopSpec::Sweep { key, values } => values.iter().map(|v| vec![(key.clone(), v.clone())]).collect(),
            LoopSpec::Grid(a, b) => {
                let args = self.settings.resolve(&pipe.values, &Args::new())?;
                let spec = grid_spec(&args)?;
                split_extent(&spec, *a, *b)?
                    .iter()
                    .map(|s| {
                        let (e, g) = spec_values(s);
                        vec![("extent".to_string(), e), ("grid_size".to_string(), g)]
                    })
                    .collect()
            }
        })
    }
}
