use std::fmt::Write as _;
use std::path::Path;

use super::write_bytes;
use crate::error::Result;
use crate::grid::Terrain;

/// Wavefront OBJ text: one vertex per cell center, two counter-clockwise
/// triangles per quad split along the lower-left to upper-right diagonal.
pub fn obj_string(t: &Terrain) -> String {
    let spec = t.spec();
    let (nx, ny) = spec.shape();
    let mut s = format!("# heightfield {nx}x{ny}\n");
    for i in 0..nx {
        for j in 0..ny {
            let _ = writeln!(s, "v {:?} {:?} {:?}", spec.x_center(i), spec.y_center(j), t.get(i, j));
        }
    }
    let idx = |i: usize, j: usize| i * ny + j + 1;
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let _ = writeln!(s, "f {} {} {}", idx(i, j), idx(i + 1, j), idx(i + 1, j + 1));
            let _ = writeln!(s, "f {} {} {}", idx(i, j), idx(i + 1, j + 1), idx(i, j + 1));
        }
    }
    s
}

pub fn write_obj(path: &Path, t: &Terrain) -> Result<()> {
    write_bytes(path, obj_string(t).as_bytes())
}

/// `x,y,z` rows in cell order.
pub fn terrain_csv(t: &Terrain) -> String {
    let spec = t.spec();
    let mut s = String::from("x,y,z\n");
    for ((i, j), z) in t.heights().indexed_iter() {
        let _ = writeln!(s, "{:?},{:?},{:?}", spec.x_center(i), spec.y_center(j), z);
    }
    s
}
