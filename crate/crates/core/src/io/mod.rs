//! File formats and renderers: terrain files, the named-array container,
//! obstacle files, raster images, meshes and vector plots.

mod atrn;
mod container;
mod mesh;
mod obstacle_file;
pub mod raster;
pub mod svg;

pub use atrn::{decode_terrain, encode_terrain, read_terrain, write_terrain, TERRAIN_EXTENSION};
pub use container::{ArrayContainer, ArrayData, ArrayEntry, CONTAINER_EXTENSION};
pub use mesh::{obj_string, terrain_csv, write_obj};
pub use obstacle_file::{
    obstacles_from_container, obstacles_to_container, parse_obstacles_text, read_obstacles,
    write_obstacles, obstacles_text,
};

use std::fs;
use std::path::Path;

use crate::error::{Result, TerrainError};

/// Writes bytes, creating parent directories as needed.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| TerrainError::io(dir, e))?;
        }
    }
    fs::write(path, bytes).map_err(|e| TerrainError::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| TerrainError::io(path, e))
}

/// Little-endian cursor over a byte buffer with truncation errors.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8], path: &'a Path) -> Self {
        Reader { buf, pos: 0, path }
    }

    pub(crate) fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(TerrainError::format(
                self.path,
                format!("truncated while reading {what} at byte {}", self.pos),
            )),
        }
    }

    pub(crate) fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    pub(crate) fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    pub(crate) fn string(&mut self, what: &str) -> Result<String> {
        let n = self.u32(what)? as usize;
        let bytes = self.take(n, what)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| TerrainError::format(self.path, format!("{what} is not valid UTF-8")))
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(TerrainError::format(
                self.path,
                format!("{} trailing bytes", self.buf.len() - self.pos),
            ))
        }
    }

    pub(crate) fn path(&self) -> &'a Path {
        self.path
    }
}

pub(crate) fn put_string(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}
