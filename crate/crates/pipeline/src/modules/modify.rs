//! Combining terrains and elementwise modifiers.

use std::sync::Arc;

use terrain_core::combine::{self, scale_by, CombineKind, Modifier};
use terrain_core::{stack_tiles, Terrain, TerrainError};

use crate::engine::{Ctx, Pipe};
use crate::error::{PipelineError, Result};
use crate::value::{require_f64, require_list, Value};

fn take_inputs(ctx: &Ctx, pipe: &mut Pipe, module: &str) -> Result<Vec<Arc<Terrain>>> {
    let inputs = match ctx.get("last") {
        Some(v) => {
            let k = v
                .as_i64()
                .filter(|k| *k >= 1)
                .ok_or_else(|| PipelineError::arg("last", format!("expected a positive integer, got `{v}`")))?
                as usize;
            let list = if pipe.temporary.is_empty() {
                &mut pipe.primary
            } else {
                &mut pipe.temporary
            };
            if list.len() < k {
                return Err(PipelineError::arg("last", format!("asked for {k} terrains, pipe has {}", list.len())));
            }
            list.split_off(list.len() - k)
        }
        None => pipe.take_working(),
    };
    if inputs.is_empty() {
        log::debug!("{module}: empty pipe");
        return Err(TerrainError::NoTerrains.into());
    }
    Ok(inputs)
}

/// Consumes the temporary terrains (or the primary ones if none) and adds
/// the result to the primary list.
pub fn combine(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let kind: CombineKind = match ctx.primary_arg("operation") {
        Some(Value::Str(s)) => s.parse()?,
        Some(other) => return Err(PipelineError::arg("operation", format!("expected a name, got `{other}`"))),
        None => CombineKind::Add,
    };
    let inputs = take_inputs(ctx, &mut pipe, "Combine")?;
    let refs: Vec<&Terrain> = inputs.iter().map(|t| t.as_ref()).collect();
    let t = combine::combine(&refs, kind)?;
    pipe.primary.push(Arc::new(t));
    Ok(pipe)
}

pub fn weighted_sum(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let weights = match ctx.primary_arg("weights") {
        Some(v) => Some(require_list("weights", v)?),
        None => None,
    };
    let inputs = take_inputs(ctx, &mut pipe, "WeightedSum")?;
    let weights = weights.unwrap_or_else(|| vec![1.0; inputs.len()]);
    let refs: Vec<&Terrain> = inputs.iter().map(|t| t.as_ref()).collect();
    let t = combine::weighted_sum(&refs, &weights)?;
    pipe.primary.push(Arc::new(t));
    Ok(pipe)
}

/// Merges tiles produced by a grid loop.
pub fn stack(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let inputs = take_inputs(ctx, &mut pipe, "Stack")?;
    let tiles: Vec<Terrain> = inputs.iter().map(|t| t.as_ref().clone()).collect();
    pipe.primary.push(Arc::new(stack_tiles(&tiles)?));
    Ok(pipe)
}

fn apply(pipe: &mut Pipe, m: Modifier) -> Result<()> {
    m.validate()?;
    if pipe.working().is_empty() {
        return Err(PipelineError::arg("modifier", "no terrain in the pipe"));
    }
    pipe.map_working(|t| Ok(m.apply(t)?))
}

fn number(ctx: &Ctx, key: &str, fallback: Option<f64>) -> Result<f64> {
    match ctx.primary_arg(key) {
        Some(v) => require_f64(key, v),
        None => fallback.ok_or_else(|| PipelineError::arg(key, "missing argument")),
    }
}

pub fn negate(_ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    apply(&mut pipe, Modifier::Negate)?;
    Ok(pipe)
}

pub fn add(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    apply(&mut pipe, Modifier::Add(number(ctx, "value", None)?))?;
    Ok(pipe)
}

/// Scales by a number, or by a factor terrain left by `AsFactor`.
pub fn scale(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    if let Some(v) = &ctx.default {
        apply(&mut pipe, Modifier::Scale(require_f64("factor", v)?))?;
        return Ok(pipe);
    }
    match pipe.values.remove("factor").or_else(|| ctx.get("factor").cloned()) {
        Some(Value::Terrain(f)) => {
            if pipe.working().is_empty() {
                return Err(PipelineError::arg("Scale", "no terrain in the pipe"));
            }
            pipe.map_working(|t| Ok(scale_by(t, &f)?))?;
        }
        Some(v) => apply(&mut pipe, Modifier::Scale(require_f64("factor", &v)?))?,
        None => return Err(PipelineError::arg("factor", "missing factor")),
    }
    Ok(pipe)
}

pub fn absolute(_ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    apply(&mut pipe, Modifier::Absolute)?;
    Ok(pipe)
}

/// Bounds default to [0, 1].
pub fn clip(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let (mut lo, mut hi) = (0.0, 1.0);
    if let Some(v) = &ctx.default {
        match require_list("clip", v)?[..] {
            [h] => hi = h,
            [l, h] => (lo, hi) = (l, h),
            _ => return Err(PipelineError::arg("clip", "expected [min, max]")),
        }
    }
    lo = ctx.f64_or("min", lo)?;
    hi = ctx.f64_or("max", hi)?;
    apply(&mut pipe, Modifier::Clip { lo, hi })?;
    Ok(pipe)
}

pub const DEFAULT_SMOOTH_SIGMA: f64 = 1.0;

pub fn smooth(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let sigma = number(ctx, "sigma_meter", Some(DEFAULT_SMOOTH_SIGMA))?;
    apply(&mut pipe, Modifier::Smooth(sigma))?;
    Ok(pipe)
}

pub fn around(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let d = match ctx.primary_arg("decimals") {
        Some(v) => v
            .as_i64()
            .ok_or_else(|| PipelineError::arg("decimals", format!("expected an integer, got `{v}`")))?,
        None => 0,
    };
    apply(&mut pipe, Modifier::Around(d as i32))?;
    Ok(pipe)
}
