//! Reading and writing terrains, obstacles and logged data.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use terrain_core::io::{
    read_obstacles, read_terrain, terrain_csv, write_bytes, write_obj, write_obstacles, write_terrain,
    ArrayContainer, CONTAINER_EXTENSION, TERRAIN_EXTENSION,
};

use super::data::{container_to_values, records_to_container};
use crate::engine::{Ctx, FinishCtx, Module, Pipe};
use crate::error::{PipelineError, Result};
use crate::settings::Args;
use crate::value::Value;

fn path_arg(ctx: &Ctx, key: &str) -> Result<Option<String>> {
    match ctx.primary_arg(key) {
        Some(Value::Str(s)) => Ok(Some(s.clone())),
        Some(other) => Err(PipelineError::arg(key, format!("expected a path, got `{other}`"))),
        None => Ok(None),
    }
}

/// Writes every terrain as `terrain_{temp,prim}_<call>_<k>.atrn`. A default
/// argument names the output directory inside the save directory.
pub fn save(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    let dir = match path_arg(ctx, "dir")? {
        Some(d) => ctx.save_dir.join(d),
        None => ctx.module_dir(),
    };
    for (label, list) in [("temp", &pipe.temporary), ("prim", &pipe.primary)] {
        for (k, t) in list.iter().enumerate() {
            let path = dir.join(format!("terrain_{label}_{:05}_{k}.{TERRAIN_EXTENSION}", ctx.call));
            write_terrain(&path, t)?;
        }
    }
    Ok(pipe)
}

/// Terrain files in a directory, sorted by name.
fn terrain_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| PipelineError::io(dir, e))?;
    let mut files: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == TERRAIN_EXTENSION))
        .collect();
    files.sort();
    Ok(files)
}

/// Loads a terrain file or every terrain file in a directory. Files named
/// `terrain_prim_*` go to the primary list, others to the temporary one.
pub fn load(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let arg = path_arg(ctx, "path")?.ok_or_else(|| PipelineError::arg("path", "missing path"))?;
    let path = ctx.resolve_path(&arg);
    let files = if path.is_dir() {
        terrain_files(&path)?
    } else {
        vec![path.clone()]
    };
    if files.is_empty() {
        return Err(PipelineError::arg("path", format!("no .{TERRAIN_EXTENSION} files in {}", path.display())));
    }
    for f in files {
        let t = Arc::new(read_terrain(&f)?);
        let primary = f
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("terrain_prim"));
        if primary {
            pipe.primary.push(t);
        } else {
            pipe.temporary.push(t);
        }
    }
    Ok(pipe)
}

/// Maps a `.npz` path to the native container when that is what exists.
fn native_container(path: PathBuf) -> PathBuf {
    if path.extension().is_some_and(|e| e == "npz") {
        let alt = path.with_extension(CONTAINER_EXTENSION);
        if !path.exists() && alt.exists() {
            return alt;
        }
    }
    path
}

fn pipe_obstacles(ctx: &Ctx) -> Result<Arc<Vec<terrain_core::obstacles::Obstacle>>> {
    match ctx.get("obstacles") {
        Some(Value::Obstacles(o)) => Ok(Arc::clone(o)),
        _ => Err(PipelineError::arg("obstacles", "no obstacles in the pipe")),
    }
}

/// Writes `obstacles.atdc` and the text form `obstacles.yml`, or a single
/// named file when a default argument is given.
pub fn save_obstacles(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    let obs = pipe_obstacles(ctx)?;
    let dir = ctx.module_dir();
    match path_arg(ctx, "file")? {
        Some(name) => write_obstacles(&dir.join(name), &obs)?,
        None => {
            let stem = if ctx.call == 0 {
                "obstacles".to_string()
            } else {
                format!("obstacles_{}", ctx.call)
            };
            write_obstacles(&dir.join(format!("{stem}.{CONTAINER_EXTENSION}")), &obs)?;
            write_obstacles(&dir.join(format!("{stem}.yml")), &obs)?;
        }
    }
    Ok(pipe)
}

pub fn load_obstacles(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let arg = path_arg(ctx, "path")?.ok_or_else(|| PipelineError::arg("path", "missing path"))?;
    let path = native_container(ctx.resolve_path(&arg));
    let obs = read_obstacles(&path)?;
    pipe.set("obstacles", Value::Obstacles(Arc::new(obs)));
    Ok(pipe)
}

fn data_values(pipe: &Pipe) -> Args {
    pipe.values.clone()
}

/// Writes the current numeric pipe values to `data_<call>.atdc`.
pub fn save_data(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    let c = records_to_container(&[data_values(&pipe)], false)?;
    c.write(&ctx.module_dir().join(format!("data_{:05}.{CONTAINER_EXTENSION}", ctx.call)))?;
    Ok(pipe)
}

pub fn default_log_path(save_dir: &Path) -> PathBuf {
    save_dir.join("LogData").join(format!("data.{CONTAINER_EXTENSION}"))
}

/// Loads logged data into the pipe; defaults to this run's LogData output.
pub fn load_data(ctx: &mut Ctx, mut pipe: Pipe) -> Result<Pipe> {
    let path = match path_arg(ctx, "path")? {
        Some(p) => native_container(ctx.resolve_path(&p)),
        None => default_log_path(ctx.save_dir),
    };
    let c = ArrayContainer::read(&path)?;
    for (k, v) in container_to_values(&c) {
        pipe.values.insert(k, v);
    }
    Ok(pipe)
}

/// Records the pipe values on every call and writes them stacked to
/// `LogData/data.atdc` once the program has finished.
#[derive(Default)]
pub struct LogData {
    records: Vec<Args>,
}

impl Module for LogData {
    fn run(&mut self, _ctx: &mut Ctx, pipe: Pipe) -> Result<Vec<Pipe>> {
        self.records.push(data_values(&pipe));
        Ok(vec![pipe])
    }

    fn finish(&mut self, ctx: &FinishCtx) -> Result<()> {
        if self.records.is_empty() {
            return Ok(());
        }
        let c = records_to_container(&self.records, true)?;
        c.write(&default_log_path(ctx.save_dir))?;
        Ok(())
    }
}

/// Primary terrains if any, else temporary ones.
pub fn output_terrains(pipe: &Pipe) -> &[Arc<terrain_core::Terrain>] {
    if pipe.primary.is_empty() {
        &pipe.temporary
    } else {
        &pipe.primary
    }
}

pub fn export_obj(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    for (k, t) in output_terrains(&pipe).iter().enumerate() {
        write_obj(&ctx.module_dir().join(format!("terrain_{:05}_{k}.obj", ctx.call)), t)?;
    }
    Ok(pipe)
}

pub fn export_csv(ctx: &mut Ctx, pipe: Pipe) -> Result<Pipe> {
    for (k, t) in output_terrains(&pipe).iter().enumerate() {
        let path = ctx.module_dir().join(format!("terrain_{:05}_{k}.csv", ctx.call));
        write_bytes(&path, terrain_csv(t).as_bytes())?;
    }
    Ok(pipe)
}
