//! Terrain and obstacle generators.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use terrain_core::expr::eval_expression_terrain;
use terrain_core::noise::{self, OctaveParams, RockParams, DEFAULT_BASIC_SCALES};
use terrain_core::obstacles::{
    self, gen_function_shape, remove_distant_obstacles, sample_obstacles, DistributionSet, Obstacle,
    ParamDistribution, ShapeKind, OBSTACLE_PARAMS,
};

use super::config::{distribution_for, dist_key};
use crate::engine::{Ctx, Module, Pipe};
use crate::error::{PipelineError, Result};
use crate::value::{require_f64, require_list, Value};

fn push_temporary(pipe: &mut Pipe, terrains: Vec<terrain_core::Terrain>) {
    pipe.temporary.extend(terrains.into_iter().map(Arc::new));
}

pub fn basic(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let scales = match ctx.primary_arg("scale") {
        Some(v) => require_list("scale", v)?,
        None => DEFAULT_BASIC_SCALES.to_vec(),
    };
    let seed = ctx.seed()?;
    push_temporary(&mut pipe, noise::gen_basic(ctx.spec()?, seed, &scales)?);
    Ok(pipe)
}

fn count(key: &str, v: &Value) -> Result<usize> {
    v.as_i64()
        .filter(|n| *n >= 0)
        .map(|n| n as usize)
        .ok_or_else(|| PipelineError::arg(key, format!("expected a non-negative integer, got `{v}`")))
}

/// Octave elements go to the temporary list; their weights to `weights`.
pub fn octaves(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let d = OctaveParams::default();
    let start_amplitude = match ctx.get("start_amplitude").or_else(|| ctx.get("amplitude_start")) {
        Some(v) => require_f64("start_amplitude", v)?,
        None => d.start_amplitude,
    };
    let num_octaves = match ctx.primary_arg("num_octaves") {
        Some(v) => count("num_octaves", v)?,
        None => d.num_octaves,
    };
    let params = OctaveParams {
        start_scale: ctx.f64_or("start_scale", d.start_scale)?,
        start_amplitude,
        num_octaves,
        persistence: ctx.f64_or("persistence", d.persistence)?,
        random_amp: ctx.f64_or("random_amp", d.random_amp)?,
        random_sign: ctx.bool_or("random_sign", d.random_sign)?,
        only_generate_weights: ctx.bool_or("only_generate_weights", d.only_generate_weights)?,
    };
    let seed = ctx.seed()?;
    let set = noise::gen_octaves(ctx.spec()?, seed, &params)?;
    push_temporary(&mut pipe, set.elements);
    pipe.set("weights", Value::float_list(set.weights));
    Ok(pipe)
}

fn rock_params(ctx: &Ctx) -> Result<RockParams> {
    let d = RockParams::default();
    let heights = match ctx.get("rock_heights").or_else(|| ctx.get("heights")) {
        Some(v) => Some(require_list("rock_heights", v)?),
        None => None,
    };
    Ok(RockParams {
        rock_size: match ctx.primary_arg("rock_size") {
            Some(v) => require_list("rock_size", v)?,
            None => d.rock_size,
        },
        fraction: ctx.f64_or("fraction", d.fraction)?,
        heights,
        random_shift: ctx.bool_or("random_shift", d.random_shift)?,
    })
}

pub fn rocks(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let params = rock_params(ctx)?;
    let seed = ctx.seed()?;
    push_temporary(&mut pipe, noise::gen_rocks(ctx.spec()?, seed, &params)?);
    Ok(pipe)
}

pub fn holes(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let params = rock_params(ctx)?;
    let seed = ctx.seed()?;
    push_temporary(&mut pipe, noise::gen_holes(ctx.spec()?, seed, &params)?);
    Ok(pipe)
}

pub fn function(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let src = ctx
        .primary_arg("expression")
        .ok_or_else(|| PipelineError::arg("expression", "missing expression"))?;
    let src = match src {
        Value::Str(s) => s.clone(),
        other => other.to_string(),
    };
    let t = eval_expression_terrain(&src, ctx.spec()?)?;
    pipe.temporary.push(Arc::new(t));
    Ok(pipe)
}

fn pipe_obstacles(ctx: &Ctx) -> Option<Arc<Vec<Obstacle>>> {
    match ctx.get("obstacles") {
        Some(Value::Obstacles(o)) => Some(Arc::clone(o)),
        _ => None,
    }
}

fn positions(v: &Value) -> Result<Vec<(f64, f64)>> {
    let bad = || PipelineError::arg("position", format!("expected [x, y] or a list of them, got `{v}`"));
    match v {
        Value::List(items) if items.iter().all(|i| matches!(i, Value::List(_))) => items
            .iter()
            .map(|i| match require_list("position", i)?[..] {
                [x, y] => Ok((x, y)),
                _ => Err(bad()),
            })
            .collect(),
        other => match require_list("position", other)?[..] {
            [x, y] => Ok(vec![(x, y)]),
            _ => Err(bad()),
        },
    }
}

fn broadcast<T: Clone>(key: &str, v: Vec<T>, n: usize) -> Result<Vec<T>> {
    match v.len() {
        len if len == n => Ok(v),
        1 => Ok(vec![v[0].clone(); n]),
        len => Err(PipelineError::arg(key, format!("{len} values for {n} obstacles"))),
    }
}

/// Obstacles from the pipe (or one default obstacle) with any explicitly
/// given parameters applied; scalars broadcast.
fn shape_obstacles(ctx: &Ctx) -> Result<Vec<Obstacle>> {
    let base = pipe_obstacles(ctx)
        .map(|o| o.as_ref().clone())
        .unwrap_or_else(|| vec![Obstacle::default()]);
    let pos = ctx.get("position").map(positions).transpose()?;
    let mut fields: Vec<(&str, Vec<f64>)> = Vec::new();
    for name in OBSTACLE_PARAMS {
        if let Some(v) = ctx.get(name) {
            fields.push((name, require_list(name, v)?));
        }
    }
    let n = fields
        .iter()
        .map(|(_, v)| v.len())
        .chain(pos.iter().map(Vec::len))
        .chain([base.len()])
        .max()
        .unwrap_or(1);
    let mut out = broadcast("obstacles", base, n)?;
    if let Some(p) = pos {
        for (o, p) in out.iter_mut().zip(broadcast("position", p, n)?) {
            o.position = p;
        }
    }
    for (name, vals) in fields {
        for (o, v) in out.iter_mut().zip(broadcast(name, vals, n)?) {
            match name {
                "height" => o.height = v,
                "width" => o.width = v,
                "aspect" => o.aspect = v,
                "yaw_deg" => o.yaw_deg = v,
                _ => o.pitch_deg = v,
            }
        }
    }
    Ok(out)
}

/// Function-shape generator: one element per obstacle.
pub struct Shape(pub ShapeKind);

impl Module for Shape {
    fn run(&mut self, ctx: &mut Ctx, mut pipe: Pipe) -> Result<Vec<Pipe>> {
        let obs = shape_obstacles(ctx)?;
        push_temporary(&mut pipe, gen_function_shape(self.0, &obs, ctx.spec()?)?);
        Ok(vec![pipe])
    }
}

fn distribution_set(ctx: &Ctx) -> DistributionSet {
    let mut set = DistributionSet::default();
    for (k, v) in &ctx.args {
        match v {
            Value::Dist(d) => {
                if let Some(param) = k.strip_prefix("dist_") {
                    set.dists.insert(param.to_string(), d.clone());
                }
            }
            Value::Terrain(t) => {
                if k == "position_density" {
                    set.position_density = Some(t.as_ref().clone());
                } else if let Some(param) = k.strip_prefix("lookup_") {
                    set.lookups.insert(param.to_string(), t.as_ref().clone());
                }
            }
            _ => {}
        }
    }
    set
}

/// `Random:N` samples N obstacles; `Random:<param>` samples values for one
/// parameter, as many as it already has (or one per obstacle).
pub fn random(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let arg = ctx
        .primary_arg("number")
        .cloned()
        .ok_or_else(|| PipelineError::arg("Random", "expects a count or a parameter name"))?;
    let seed = ctx.seed()?;
    if let Value::Str(param) = &arg {
        let n = match (ctx.get(param), pipe_obstacles(ctx)) {
            (_, Some(o)) if OBSTACLE_PARAMS.contains(&param.as_str()) => o.len(),
            (Some(Value::List(items)), _) => items.len(),
            _ if param == "weights" => pipe.working().len().max(1),
            _ => 1,
        };
        let d = distribution_for(ctx, param).unwrap_or(ParamDistribution::Uniform { low: 0.0, high: 1.0 });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = d.sample(n, &mut rng)?;
        pipe.set(param, Value::float_list(values));
        return Ok(pipe);
    }
    let n = count("number", &arg)?;
    let obs = sample_obstacles(n, &distribution_set(ctx), &ctx.spec()?, seed)?;
    pipe.set("obstacles", Value::Obstacles(Arc::new(obs)));
    Ok(pipe)
}

fn pop_terrain(pipe: &mut Pipe, module: &str) -> Result<Arc<terrain_core::Terrain>> {
    pipe.pop_working()
        .ok_or_else(|| PipelineError::arg(module, "no terrain in the pipe"))
}

/// Turns the last terrain into the obstacle position density.
pub fn as_probability(_ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let t = pop_terrain(&mut pipe, "AsProbability")?;
    let p = obstacles::as_probability(&t)?;
    pipe.set("position_density", Value::Terrain(Arc::new(p)));
    Ok(pipe)
}

/// Turns the last terrain into a position-dependent lookup for a parameter.
pub fn as_lookup_for(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let param = match ctx.primary_arg("param") {
        Some(Value::Str(s)) => s.clone(),
        _ => return Err(PipelineError::arg("param", "expects a parameter name")),
    };
    if !OBSTACLE_PARAMS.contains(&param.as_str()) {
        return Err(PipelineError::arg(
            "param",
            format!("`{param}` is not one of {}", OBSTACLE_PARAMS.join(", ")),
        ));
    }
    let t = pop_terrain(&mut pipe, "AsLookupFor")?;
    pipe.values.remove(&dist_key(&param));
    pipe.set(&format!("lookup_{param}"), Value::Terrain(t));
    Ok(pipe)
}

/// Turns the last terrain into a multiplicative factor for `Scale`.
pub fn as_factor(_ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let t = pop_terrain(&mut pipe, "AsFactor")?;
    pipe.set("factor", Value::Terrain(t));
    Ok(pipe)
}

pub fn remove_distant(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let d = match ctx.primary_arg("distance") {
        Some(v) => require_f64("distance", v)?,
        None => 0.0,
    };
    let obs = pipe_obstacles(ctx).ok_or_else(|| PipelineError::arg("obstacles", "no obstacles in the pipe"))?;
    let kept = remove_distant_obstacles(&obs, &ctx.spec()?, d)?;
    pipe.set("obstacles", Value::Obstacles(Arc::new(kept)));
    Ok(pipe)
}

