use std::path::Path;

use ndarray::Array2;

use super::{read_bytes, write_bytes, Reader};
use crate::error::{Result, TerrainError};
use crate::grid::{Extent, GridSpec, Terrain};

const MAGIC: &[u8; 4] = b"ATRN";
const VERSION: u32 = 1;
pub const TERRAIN_EXTENSION: &str = "atrn";

/// Layout: magic, version u32, nx u32, ny u32, extent 4 x f64, then
/// nx * ny f64 heights with index `i * ny + j`; all little-endian.
pub fn encode_terrain(t: &Terrain) -> Vec<u8> {
    let spec = t.spec();
    let mut out = Vec::with_capacity(36 + 8 * spec.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(spec.nx() as u32).to_le_bytes());
    out.extend_from_slice(&(spec.ny() as u32).to_le_bytes());
    for v in spec.extent().as_array() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in t.heights().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_terrain(bytes: &[u8], path: &Path) -> Result<Terrain> {
    let mut r = Reader::new(bytes, path);
    if r.take(4, "magic")? != MAGIC {
        return Err(TerrainError::format(path, "not a terrain file (bad magic)"));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(TerrainError::format(path, format!("unsupported version {version}")));
    }
    let nx = r.u32("nx")? as usize;
    let ny = r.u32("ny")? as usize;
    let mut e = [0.0; 4];
    for v in &mut e {
        *v = r.f64("extent")?;
    }
    let spec = GridSpec::new(Extent::new(e[0], e[1], e[2], e[3]), nx, ny)
        .map_err(|err| TerrainError::format(path, err.to_string()))?;
    let expected = nx.checked_mul(ny).and_then(|n| n.checked_mul(8));
    let payload = match expected {
        Some(n) => r.take(n, "heights")?,
        None => return Err(TerrainError::format(path, "grid size overflows")),
    };
    r.finish()?;
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let heights = Array2::from_shape_vec((nx, ny), values).expect("length checked");
    Terrain::new(spec, heights).map_err(|err| TerrainError::format(path, err.to_string()))
}

pub fn write_terrain(path: &Path, t: &Terrain) -> Result<()> {
    write_bytes(path, &encode_terrain(t))
}

pub fn read_terrain(path: &Path) -> Result<Terrain> {
    decode_terrain(&read_bytes(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_truncation() {
        let spec = GridSpec::new(Extent::new(-3.0, 5.0, 1.0, 2.5), 4, 3).unwrap();
        let t = Terrain::from_fn(spec, |x, y| x.sin() * y + 1e-300).unwrap();
        let bytes = encode_terrain(&t);
        let back = decode_terrain(&bytes, Path::new("t.atrn")).unwrap();
        assert_eq!(back.spec(), t.spec());
        assert_eq!(back.heights(), t.heights());
        assert!(decode_terrain(&bytes[..bytes.len() - 1], Path::new("t")).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_terrain(&bad, Path::new("t")).is_err());
        let mut bad = bytes;
        bad[4] = 2;
        assert!(decode_terrain(&bad, Path::new("t")).is_err());
    }
}
