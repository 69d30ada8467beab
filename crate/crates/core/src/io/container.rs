use std::path::Path;

use super::{put_string, read_bytes, write_bytes, Reader};
use crate::error::{Result, TerrainError};

const MAGIC: &[u8; 4] = b"ATDC";
const VERSION: u32 = 1;
pub const CONTAINER_EXTENSION: &str = "atdc";

#[derive(Clone, Debug, PartialEq)]
pub enum ArrayData {
    F64(Vec<f64>),
    I64(Vec<i64>),
}

impl ArrayData {
    pub fn len(&self) -> usize {
        match self {
            ArrayData::F64(v) => v.len(),
            ArrayData::I64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            ArrayData::F64(v) => v.clone(),
            ArrayData::I64(v) => v.iter().map(|x| *x as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArrayEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: ArrayData,
}

impl ArrayEntry {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: ArrayData) -> Result<Self> {
        let name = name.into();
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TerrainError::param(
                name,
                format!("shape {shape:?} needs {expected} values, got {}", data.len()),
            ));
        }
        Ok(ArrayEntry { name, shape, data })
    }

    pub fn vector(name: impl Into<String>, values: Vec<f64>) -> Self {
        let n = values.len();
        ArrayEntry {
            name: name.into(),
            shape: vec![n],
            data: ArrayData::F64(values),
        }
    }
}

/// Ordered named arrays plus string metadata, serialized as:
/// magic "ATDC", version u32, entry count u32, then per entry a
/// length-prefixed name, kind byte (0 = f64, 1 = i64), ndim u32, dims as
/// u64 and the payload; then a metadata count u32 with length-prefixed
/// key/value pairs. All little-endian.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArrayContainer {
    entries: Vec<ArrayEntry>,
    pub metadata: Vec<(String, String)>,
}

impl ArrayContainer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: ArrayEntry) -> Result<()> {
        if self.get(&entry.name).is_some() {
            return Err(TerrainError::param(entry.name, "duplicate entry name"));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ArrayEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn entries(&self) -> &[ArrayEntry] {
        &self.entries
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for e in &self.entries {
            put_string(&mut out, &e.name);
            out.push(match e.data {
                ArrayData::F64(_) => 0,
                ArrayData::I64(_) => 1,
            });
            out.extend_from_slice(&(e.shape.len() as u32).to_le_bytes());
            for d in &e.shape {
                out.extend_from_slice(&(*d as u64).to_le_bytes());
            }
            match &e.data {
                ArrayData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
                ArrayData::I64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            }
        }
        out.extend_from_slice(&(self.metadata.len() as u32).to_le_bytes());
        for (k, v) in &self.metadata {
            put_string(&mut out, k);
            put_string(&mut out, v);
        }
        out
    }

    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut r = Reader::new(bytes, path);
        if r.take(4, "magic")? != MAGIC {
            return Err(TerrainError::format(path, "not an array container (bad magic)"));
        }
        let version = r.u32("version")?;
        if version != VERSION {
            return Err(TerrainError::format(path, format!("unsupported version {version}")));
        }
        let count = r.u32("entry count")?;
        let mut c = ArrayContainer::new();
        for _ in 0..count {
            let name = r.string("entry name")?;
            let kind = r.u8("element kind")?;
            let ndim = r.u32("ndim")? as usize;
            let mut shape = Vec::with_capacity(ndim.min(64));
            for _ in 0..ndim {
                shape.push(r.u64("dimension")? as usize);
            }
            let n = shape
                .iter()
                .try_fold(1usize, |acc, d| acc.checked_mul(*d))
                .and_then(|n| n.checked_mul(8))
                .ok_or_else(|| TerrainError::format(r.path(), "array size overflows"))?;
            let payload = r.take(n, "array payload")?;
            let words = payload.chunks_exact(8).map(|w| <[u8; 8]>::try_from(w).unwrap());
            let data = match kind {
                0 => ArrayData::F64(words.map(f64::from_le_bytes).collect()),
                1 => ArrayData::I64(words.map(i64::from_le_bytes).collect()),
                k => return Err(TerrainError::format(path, format!("unknown element kind {k}"))),
            };
            c.push(ArrayEntry { name, shape, data })
                .map_err(|e| TerrainError::format(path, e.to_string()))?;
        }
        let meta = r.u32("metadata count")?;
        for _ in 0..meta {
            let k = r.string("metadata key")?;
            let v = r.string("metadata value")?;
            c.metadata.push((k, v));
        }
        r.finish()?;
        Ok(c)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, &self.encode())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::decode(&read_bytes(path)?, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = ArrayContainer::new();
        c.push(ArrayEntry::vector("roughness", vec![1.0, 1.5, f64::MIN_POSITIVE])).unwrap();
        c.push(ArrayEntry::new("counts", vec![2, 2], ArrayData::I64(vec![1, -2, 3, i64::MAX])).unwrap())
            .unwrap();
        c.push(ArrayEntry::new("empty", vec![0], ArrayData::F64(vec![])).unwrap()).unwrap();
        c.metadata.push(("skipped".into(), "name".into()));
        let bytes = c.encode();
        let back = ArrayContainer::decode(&bytes, Path::new("c")).unwrap();
        assert_eq!(back, c);
        assert!(ArrayContainer::decode(&bytes[..bytes.len() - 2], Path::new("c")).is_err());
        assert!(c.push(ArrayEntry::vector("counts", vec![])).is_err());
        assert!(ArrayEntry::new("x", vec![3], ArrayData::F64(vec![1.0])).is_err());
    }
}
