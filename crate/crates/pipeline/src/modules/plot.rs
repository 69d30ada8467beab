//! Raster and vector plots.

use std::sync::Arc;

use terrain_core::io::raster::{colorize, render_hillshade, write_png, Colormap};
use terrain_core::io::svg::{histogram_svg, lines_svg, obstacles_svg, rasterize_obstacles, scatter_svg};
use terrain_core::io::write_bytes;
use terrain_core::Terrain;

use super::io::output_terrains;
use crate::engine::{Ctx, Pipe};
use crate::error::{PipelineError, Result};
use crate::value::Value;

fn cmap(ctx: &Ctx, fallback: &str) -> Result<Colormap> {
    Ok(Colormap::from_name(ctx.str_or("cmap", fallback)?)?)
}

fn plot_terrains(ctx: &Ctx, pipe: &Pipe) -> Result<()> {
    let cm = cmap(ctx, "grayscale")?;
    let dir = ctx.module_dir();
    for (label, list) in [("temp", &pipe.temporary), ("prim", &pipe.primary)] {
        for (k, t) in list.iter().enumerate() {
            write_png(&dir.join(format!("terrain_{label}_{:05}_{k}.png", ctx.call)), &colorize(t, cm))?;
        }
    }
    Ok(())
}

/// One colormapped PNG per terrain, one pixel per cell.
pub fn plot(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    plot_terrains(ctx, &pipe)?;
    Ok(pipe)
}

/// Like `Plot`, and logs a summary of the pipe.
pub fn debug_plot(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    log::info!("{} #{}: {}", ctx.name, ctx.call, pipe.summary());
    plot_terrains(ctx, &pipe)?;
    Ok(pipe)
}

/// SVG map of the obstacles; with `exportmode` also an nx-by-ny PNG raster
/// of obstacle heights.
pub fn plot_obstacles(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    let obs = match ctx.get("obstacles") {
        Some(Value::Obstacles(o)) => Arc::clone(o),
        _ => return Err(PipelineError::arg("obstacles", "no obstacles in the pipe")),
    };
    let spec = ctx.spec()?;
    let cm = cmap(ctx, "viridis")?;
    let dir = ctx.module_dir();
    write_bytes(
        &dir.join(format!("obstacles_{}.svg", ctx.call)),
        obstacles_svg(&obs, spec.extent(), cm).as_bytes(),
    )?;
    if ctx.bool_or("exportmode", false)? {
        let raster: Terrain = rasterize_obstacles(&obs, spec)?;
        write_png(&dir.join(format!("obstacles_{}.png", ctx.call)), &colorize(&raster, Colormap::Grayscale))?;
    }
    Ok(pipe)
}

/// Pipe values that are flat numeric vectors of at least two entries.
fn vectors(pipe: &Pipe) -> Vec<(String, Vec<f64>)> {
    pipe.values
        .iter()
        .filter_map(|(k, v)| match v {
            Value::List(items) if items.len() >= 2 && items.iter().all(|i| !matches!(i, Value::List(_))) => {
                v.as_f64_list().map(|xs| (k.clone(), xs))
            }
            _ => None,
        })
        .collect()
}

fn key_arg(ctx: &Ctx, key: &str) -> Result<Option<String>> {
    match ctx.get(key) {
        Some(Value::Str(s)) => Ok(Some(s.clone())),
        Some(other) => Err(PipelineError::arg(key, format!("expected a data name, got `{other}`"))),
        None => Ok(None),
    }
}

/// Scatter plots for every pair of equally long data vectors, or for the
/// pair given by `x` and `y`. `color` names a vector to color points by.
pub fn plot_scatter(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    let vecs = vectors(&pipe);
    let find = |name: &str| {
        vecs.iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| PipelineError::arg(name, "no numeric vector with this name in the pipe"))
    };
    let color = key_arg(ctx, "color")?.map(|c| find(&c)).transpose()?;
    let cm = cmap(ctx, "viridis")?;
    let grid = ctx.bool_or("grid", true)?;
    let pairs: Vec<(&str, &str)> = match (key_arg(ctx, "x")?, key_arg(ctx, "y")?) {
        (Some(x), Some(y)) => {
            find(&x)?;
            find(&y)?;
            let xs = vecs.iter().position(|(k, _)| *k == x).expect("found above");
            let ys = vecs.iter().position(|(k, _)| *k == y).expect("found above");
            vec![(vecs[xs].0.as_str(), vecs[ys].0.as_str())]
        }
        _ => {
            let mut p = Vec::new();
            for (i, (a, va)) in vecs.iter().enumerate() {
                for (b, vb) in &vecs[i + 1..] {
                    if va.len() == vb.len() {
                        p.push((a.as_str(), b.as_str()));
                    }
                }
            }
            p
        }
    };
    if pairs.is_empty() {
        return Err(PipelineError::arg("PlotScatter", "no pair of equally long data vectors in the pipe"));
    }
    for (a, b) in pairs {
        let (x, y) = (find(a)?, find(b)?);
        let c = color.filter(|c| c.len() == x.len());
        let svg = scatter_svg(x, y, c, cm, grid, (a, b))?;
        write_bytes(&ctx.module_dir().join(format!("scatter_{:05}_{a}_vs_{b}.svg", ctx.call)), svg.as_bytes())?;
    }
    Ok(pipe)
}

pub fn plot_histogram(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    let bins = match ctx.get("bins") {
        Some(v) => v
            .as_i64()
            .filter(|b| *b >= 1)
            .ok_or_else(|| PipelineError::arg("bins", format!("expected a positive integer, got `{v}`")))?
            as usize,
        None => 20,
    };
    let vecs = vectors(&pipe);
    if vecs.is_empty() {
        return Err(PipelineError::arg("PlotHistogram", "no numeric data vectors in the pipe"));
    }
    for (k, v) in vecs {
        let svg = histogram_svg(&v, bins, &k);
        write_bytes(&ctx.module_dir().join(format!("hist_{:05}_{k}.svg", ctx.call)), svg.as_bytes())?;
    }
    Ok(pipe)
}

/// One line chart per matrix-shaped value, one line per row.
pub fn plot_lines(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    let grid = ctx.bool_or("grid", true)?;
    let mut written = 0;
    for (k, v) in &pipe.values {
        let Value::List(rows) = v else { continue };
        if rows.is_empty() || !rows.iter().all(|r| matches!(r, Value::List(_))) {
            continue;
        }
        let Some(series) = rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.as_f64_list().map(|xs| (format!("{k}[{i}]"), xs)))
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let svg = lines_svg(&series, grid);
        write_bytes(&ctx.module_dir().join(format!("lines_{:05}_{k}.svg", ctx.call)), svg.as_bytes())?;
        written += 1;
    }
    if written == 0 {
        return Err(PipelineError::arg("PlotLines", "no matrix-shaped data in the pipe"));
    }
    Ok(pipe)
}

/// Shaded top-down render of the output terrains. A default argument gives
/// the file name.
pub fn hillshade(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    let terrains = output_terrains(&pipe);
    if terrains.is_empty() {
        return Err(PipelineError::arg("Hillshade", "no terrain in the pipe"));
    }
    let cm = cmap(ctx, "grayscale")?;
    let az = ctx.f64_or("azimuth", 315.0)?;
    let alt = ctx.f64_or("altitude", 45.0)?;
    let name = match ctx.primary_arg("file") {
        Some(Value::Str(s)) => Some(s.clone()),
        Some(other) => return Err(PipelineError::arg("file", format!("expected a file name, got `{other}`"))),
        None => None,
    };
    for (k, t) in terrains.iter().enumerate() {
        let file = match &name {
            Some(n) if ctx.call == 0 && terrains.len() == 1 => n.clone(),
            Some(n) => {
                let stem = n.strip_suffix(".png").unwrap_or(n);
                format!("{stem}_{:05}_{k}.png", ctx.call)
            }
            None => format!("hillshade_{:05}_{k}.png", ctx.call),
        };
        write_png(&ctx.module_dir().join(file), &render_hillshade(t, cm, az, alt))?;
    }
    Ok(pipe)
}
