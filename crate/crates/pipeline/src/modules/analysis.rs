//! Terrain measurements and weight calibration.

use std::sync::Arc;

use terrain_core::analysis::{self, ClassTable, DEFAULT_MIN_ROCK_HEIGHT, DEFAULT_ROUGHNESS_SIGMA};
use terrain_core::parameterize::{self, DEFAULT_ALPHA, DEFAULT_BETA};

use crate::engine::{Ctx, Pipe};
use crate::error::{PipelineError, Result};
use crate::value::{require_f64, require_list, Value};

fn working_nonempty<'p>(pipe: &'p Pipe, module: &str) -> Result<&'p [Arc<terrain_core::Terrain>]> {
    let w = pipe.working();
    if w.is_empty() {
        Err(PipelineError::arg(module, "no terrain in the pipe"))
    } else {
        Ok(w)
    }
}

/// A scalar for one terrain, a list for several.
fn one_or_list(values: Vec<Value>) -> Value {
    if values.len() == 1 {
        values.into_iter().next().expect("one value")
    } else {
        Value::List(values)
    }
}

fn gradient_value(g: (f64, f64)) -> Value {
    Value::float_list([g.0, g.1])
}

/// Sets `slope_deg` and `mean_gradient`, plus the per-element list
/// `mean_gradient_i` used by `SetSlope`.
pub fn slope(_ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let reports: Vec<_> = working_nonempty(&pipe, "Slope")?.iter().map(|t| analysis::slope(t)).collect();
    let grads: Vec<Value> = reports.iter().map(|r| gradient_value(r.mean_gradient)).collect();
    pipe.set("slope_deg", one_or_list(reports.iter().map(|r| Value::Float(r.slope_deg)).collect()));
    pipe.set("mean_gradient", one_or_list(grads.clone()));
    pipe.set("mean_gradient_i", Value::List(grads));
    Ok(pipe)
}

/// Sets `roughness` and the per-element list `roughness_i`.
pub fn roughness(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let sigma = match ctx.primary_arg("sigma_meter") {
        Some(v) => require_f64("sigma_meter", v)?,
        None => DEFAULT_ROUGHNESS_SIGMA,
    };
    let values = working_nonempty(&pipe, "Roughness")?
        .iter()
        .map(|t| analysis::roughness(t, sigma).map(|r| r.roughness))
        .collect::<terrain_core::Result<Vec<f64>>>()?;
    pipe.set("roughness", one_or_list(values.iter().copied().map(Value::Float).collect()));
    pipe.set("roughness_i", Value::float_list(values));
    Ok(pipe)
}

fn list_arg(ctx: &Ctx, key: &str, hint: &str) -> Result<Vec<f64>> {
    let v = ctx
        .get(key)
        .ok_or_else(|| PipelineError::arg(key, format!("missing; {hint}")))?;
    require_list(key, v)
}

fn alpha_beta(ctx: &Ctx) -> Result<(f64, f64)> {
    Ok((ctx.f64_or("alpha", DEFAULT_ALPHA)?, ctx.f64_or("beta", DEFAULT_BETA)?))
}

/// Proxy roughness of a weighted sum from its elements' roughness.
pub fn combine_roughness(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let r = list_arg(ctx, "roughness_i", "run Roughness on the elements first")?;
    let w = list_arg(ctx, "weights", "run Octaves or Random:weights first")?;
    let (alpha, beta) = alpha_beta(ctx)?;
    pipe.set("r_proxy", Value::Float(parameterize::proxy_roughness(&r, &w, alpha, beta)?));
    Ok(pipe)
}

fn gradients(ctx: &Ctx) -> Result<Vec<(f64, f64)>> {
    let v = ctx
        .get("mean_gradient_i")
        .ok_or_else(|| PipelineError::arg("mean_gradient_i", "missing; run Slope on the elements first"))?;
    let Value::List(items) = v else {
        return Err(PipelineError::arg("mean_gradient_i", "expected a list of [gx, gy]"));
    };
    items
        .iter()
        .map(|g| match require_list("mean_gradient_i", g)?[..] {
            [a, b] => Ok((a, b)),
            _ => Err(PipelineError::arg("mean_gradient_i", "expected [gx, gy] pairs")),
        })
        .collect()
}

fn target(ctx: &Ctx, key: &str) -> Result<f64> {
    let v = ctx
        .primary_arg(key)
        .ok_or_else(|| PipelineError::arg(key, "missing target"))?;
    require_f64(key, v)
}

pub fn set_slope(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let t = target(ctx, "target_slope_deg")?;
    let w = list_arg(ctx, "weights", "run Octaves first")?;
    let sol = parameterize::set_slope(&w, &gradients(ctx)?, t)?;
    pipe.set("weights", Value::float_list(sol.weights));
    Ok(pipe)
}

pub fn set_roughness(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let t = target(ctx, "target_roughness")?;
    let w = list_arg(ctx, "weights", "run Octaves first")?;
    let r = list_arg(ctx, "roughness_i", "run Roughness on the elements first")?;
    let (alpha, beta) = alpha_beta(ctx)?;
    let sol = parameterize::set_roughness(&w, &r, t, alpha, beta)?;
    pipe.set("weights", Value::float_list(sol.weights));
    Ok(pipe)
}

/// Rock obstacles from connected regions above `min_height`.
pub fn find_rocks(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let min_height = match ctx.primary_arg("min_height") {
        Some(v) => require_f64("min_height", v)?,
        None => DEFAULT_MIN_ROCK_HEIGHT,
    };
    let mut obs = Vec::new();
    for t in working_nonempty(&pipe, "FindRocks")? {
        obs.extend(analysis::find_rocks(t, min_height)?);
    }
    pipe.set("num_rocks", Value::Int(obs.len() as i64));
    pipe.set("obstacles", Value::Obstacles(Arc::new(obs)));
    Ok(pipe)
}

/// Rocks per hectare in four height bands and the class value `class_y`.
pub fn surface_structure(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let obs = match ctx.get("obstacles") {
        Some(Value::Obstacles(o)) => Arc::clone(o),
        _ => return Err(PipelineError::arg("obstacles", "missing; run FindRocks first")),
    };
    let r = analysis::surface_structure(&obs, &ctx.spec()?, &ClassTable::default());
    for (k, v) in [("h20", r.h20), ("h40", r.h40), ("h60", r.h60), ("h80", r.h80), ("class_y", r.class_y)] {
        pipe.set(k, Value::Float(v));
    }
    Ok(pipe)
}
