//! Grid configuration and control modules.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use terrain_core::obstacles::{DistributionSet, ParamDistribution};
use terrain_core::{Extent, GridSpec};

use crate::engine::{spec_values, Ctx, Module, Pipe};
use crate::error::{PipelineError, Result};
use crate::value::{require_f64, require_list, Value};

fn set_spec(pipe: &mut Pipe, spec: &GridSpec) {
    let (e, g) = spec_values(spec);
    pipe.set("extent", e);
    pipe.set("grid_size", g);
}

fn required<'c>(ctx: &'c Ctx, key: &str) -> Result<&'c Value> {
    ctx.primary_arg(key)
        .ok_or_else(|| PipelineError::arg(key, "missing argument"))
}

/// Keeps the cell counts and replaces the extent.
pub fn extent(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let e = require_list("extent", required(ctx, "extent")?)?;
    let [x0, x1, y0, y1] = e[..] else {
        return Err(PipelineError::arg("extent", format!("expected 4 numbers, got {}", e.len())));
    };
    let old = ctx.spec()?;
    let spec = GridSpec::new(Extent::new(x0, x1, y0, y1), old.nx(), old.ny())?;
    set_spec(&mut pipe, &spec);
    Ok(pipe)
}

fn pair(key: &str, v: &Value) -> Result<(f64, f64)> {
    match require_list(key, v)?[..] {
        [a] => Ok((a, a)),
        [a, b] => Ok((a, b)),
        _ => Err(PipelineError::arg(key, "expected one or two numbers")),
    }
}

/// Resizes the extent around its center; the cell counts stay.
pub fn size(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let (w, h) = pair("size", required(ctx, "size")?)?;
    let old = ctx.spec()?;
    let (cx, cy) = old.extent().center();
    let e = Extent::new(cx - w / 2.0, cx + w / 2.0, cy - h / 2.0, cy + h / 2.0);
    set_spec(&mut pipe, &GridSpec::new(e, old.nx(), old.ny())?);
    Ok(pipe)
}

/// Moves the extent center.
pub fn location(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let (cx, cy) = pair("location", required(ctx, "location")?)?;
    let old = ctx.spec()?;
    let (w, h) = (old.extent().width(), old.extent().height());
    let e = Extent::new(cx - w / 2.0, cx + w / 2.0, cy - h / 2.0, cy + h / 2.0);
    set_spec(&mut pipe, &GridSpec::new(e, old.nx(), old.ny())?);
    Ok(pipe)
}

/// Cells per meter.
pub fn resolution(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let r = require_f64("resolution", required(ctx, "resolution")?)?;
    let spec = ctx.spec()?.with_resolution(r)?;
    set_spec(&mut pipe, &spec);
    Ok(pipe)
}

pub fn grid_size(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let v = required(ctx, "grid_size")?.clone();
    let mut args = ctx.args.clone();
    args.insert("grid_size".into(), v);
    let spec = crate::engine::grid_spec(&args)?;
    set_spec(&mut pipe, &spec);
    Ok(pipe)
}

/// Copies its keyword arguments into the pipe.
pub fn set(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    if ctx.default.is_some() {
        return Err(PipelineError::arg("Set", "expects key=value arguments"));
    }
    for (k, v) in ctx.kwargs {
        pipe.set(k, v.clone());
    }
    Ok(pipe)
}

pub fn exit(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    *ctx.exit = true;
    Ok(pipe)
}

pub fn print(_ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    println!("{}", pipe.summary());
    Ok(pipe)
}

pub fn clear_terrain(_ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    pipe.temporary.clear();
    pipe.primary.clear();
    Ok(pipe)
}

pub fn dist_key(param: &str) -> String {
    format!("dist_{param}")
}

/// Stores `param=distribution` pairs for later sampling.
pub fn set_distribution(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    if ctx.kwargs.is_empty() {
        return Err(PipelineError::arg("SetDistribution", "expects param=distribution arguments"));
    }
    for (k, v) in ctx.kwargs {
        let d = match v {
            Value::Dist(d) => d.clone(),
            other => ParamDistribution::Constant(require_f64(k, other)?),
        };
        pipe.set(&dist_key(k), Value::Dist(d));
    }
    Ok(pipe)
}

/// Distribution for `param`: one set in the pipe, else the built-in default.
pub fn distribution_for(ctx: &Ctx, param: &str) -> Option<ParamDistribution> {
    match ctx.get(&dist_key(param)) {
        Some(Value::Dist(d)) => Some(d.clone()),
        _ => DistributionSet::default_for(param),
    }
}

fn names(v: &Value) -> Result<Vec<String>> {
    match v {
        Value::Str(s) => Ok(vec![s.clone()]),
        Value::List(items) => items.iter().map(|i| names(i).map(|mut n| n.remove(0))).collect(),
        other => Err(PipelineError::arg("Sample", format!("expected parameter names, got `{other}`"))),
    }
}

/// Draws one value per named parameter into the pipe.
pub fn sample(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let params = names(required(ctx, "params")?)?;
    let seed = ctx.seed()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in params {
        let d = distribution_for(ctx, &p)
            .ok_or_else(|| PipelineError::arg(&p, "no distribution set; use SetDistribution first"))?;
        let v = d.sample(1, &mut rng)?[0];
        pipe.set(&p, Value::Float(v));
    }
    Ok(pipe)
}

/// `Seed:N` fixes the seed; `Seed:persistent_random` draws once and reuses
/// it; plain `Seed` draws a new one on every call.
#[derive(Default)]
pub struct Seed {
    persistent: Option<i64>,
}

fn draw(ctx: &mut Ctx) -> i64 {
    (ctx.rng.next_u64() >> 1) as i64
}

impl Module for Seed {
    fn run(&mut self, ctx: &mut Ctx, mut pipe: Pipe) -> Result<Vec<Pipe>> {
        let seed = match &ctx.default {
            None => draw(ctx),
            Some(Value::Str(s)) if s == "persistent_random" => match self.persistent {
                Some(s) => s,
                None => {
                    let s = draw(ctx);
                    self.persistent = Some(s);
                    s
                }
            },
            Some(v) => v
                .as_i64()
                .ok_or_else(|| PipelineError::arg("seed", format!("expected an integer or persistent_random, got `{v}`")))?,
        };
        pipe.set("seed", Value::Int(seed));
        Ok(vec![pipe])
    }
}
