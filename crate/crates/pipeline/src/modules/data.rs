//! Conversion between pipe values and named numeric arrays.

use std::collections::{BTreeMap, BTreeSet};

use terrain_core::io::{ArrayContainer, ArrayData, ArrayEntry};
use terrain_core::obstacles::Obstacle;

use crate::error::Result;
use crate::settings::Args;
use crate::value::Value;

/// Row-major numeric array.
#[derive(Clone, Debug, PartialEq)]
pub struct NumArray {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    pub int: bool,
}

fn numeric(v: &Value) -> Option<NumArray> {
    match v {
        Value::Int(i) => Some(NumArray { shape: vec![], data: vec![*i as f64], int: true }),
        Value::Bool(b) => Some(NumArray { shape: vec![], data: vec![f64::from(u8::from(*b))], int: true }),
        Value::Float(f) => Some(NumArray { shape: vec![], data: vec![*f], int: false }),
        Value::List(items) => {
            let parts: Vec<NumArray> = items.iter().map(numeric).collect::<Option<_>>()?;
            let inner = parts.first().map(|p| p.shape.clone()).unwrap_or_default();
            if parts.iter().any(|p| p.shape != inner) {
                return None;
            }
            let mut shape = vec![parts.len()];
            shape.extend(inner);
            Some(NumArray {
                shape,
                int: !parts.is_empty() && parts.iter().all(|p| p.int),
                data: parts.into_iter().flat_map(|p| p.data).collect(),
            })
        }
        _ => None,
    }
}

fn obstacle_arrays(key: &str, obs: &[Obstacle]) -> Vec<(String, NumArray)> {
    let n = obs.len();
    let column = |f: fn(&Obstacle) -> f64| NumArray {
        shape: vec![n],
        data: obs.iter().map(f).collect(),
        int: false,
    };
    vec![
        (
            format!("{key}_position"),
            NumArray {
                shape: vec![n, 2],
                data: obs.iter().flat_map(|o| [o.position.0, o.position.1]).collect(),
                int: false,
            },
        ),
        (format!("{key}_height"), column(|o| o.height)),
        (format!("{key}_width"), column(|o| o.width)),
        (format!("{key}_aspect"), column(|o| o.aspect)),
        (format!("{key}_yaw_deg"), column(|o| o.yaw_deg)),
        (format!("{key}_pitch_deg"), column(|o| o.pitch_deg)),
    ]
}

/// Numeric arrays for one pipe value; obstacle lists expand per field.
/// `None` for values with no numeric form (strings, terrains, ...).
pub fn value_arrays(key: &str, v: &Value) -> Option<Vec<(String, NumArray)>> {
    match v {
        Value::Obstacles(o) => Some(obstacle_arrays(key, o)),
        other => numeric(other).map(|a| vec![(key.to_string(), a)]),
    }
}

fn entry(name: &str, a: NumArray) -> Result<ArrayEntry> {
    let data = if a.int {
        ArrayData::I64(a.data.iter().map(|v| *v as i64).collect())
    } else {
        ArrayData::F64(a.data)
    };
    Ok(ArrayEntry::new(name, a.shape, data)?)
}

/// Packs pipe snapshots. With `stacked`, each key gains a leading record
/// axis; keys whose shape varies between records are concatenated and get
/// a `<key>__lengths` entry. Keys without numeric form, or missing from
/// some records, are listed in the `skipped` metadata.
pub fn records_to_container(records: &[Args], stacked: bool) -> Result<ArrayContainer> {
    let mut per: Vec<BTreeMap<String, NumArray>> = Vec::with_capacity(records.len());
    let mut skipped: BTreeMap<String, String> = BTreeMap::new();
    for r in records {
        let mut m = BTreeMap::new();
        for (k, v) in r {
            match value_arrays(k, v) {
                Some(arrays) => m.extend(arrays),
                None => {
                    skipped.insert(k.clone(), v.type_name().to_string());
                }
            }
        }
        per.push(m);
    }
    let keys: BTreeSet<&String> = per.iter().flat_map(|m| m.keys()).collect();
    let mut c = ArrayContainer::new();
    for key in keys {
        let arrays: Vec<&NumArray> = per.iter().filter_map(|m| m.get(key)).collect();
        if arrays.len() != per.len() {
            skipped.insert(key.clone(), format!("present in {} of {} records", arrays.len(), per.len()));
            continue;
        }
        let int = arrays.iter().all(|a| a.int);
        let data: Vec<f64> = arrays.iter().flat_map(|a| a.data.iter().copied()).collect();
        if !stacked {
            c.push(entry(key, NumArray { shape: arrays[0].shape.clone(), data, int })?)?;
        } else if arrays.iter().all(|a| a.shape == arrays[0].shape) {
            let mut shape = vec![arrays.len()];
            shape.extend(arrays[0].shape.iter().copied());
            c.push(entry(key, NumArray { shape, data, int })?)?;
        } else {
            let lengths: Vec<f64> = arrays.iter().map(|a| a.data.len() as f64).collect();
            c.push(entry(key, NumArray { shape: vec![data.len()], data, int })?)?;
            c.push(entry(
                &format!("{key}__lengths"),
                NumArray { shape: vec![lengths.len()], data: lengths, int: true },
            )?)?;
        }
    }
    c.metadata.push(("records".into(), records.len().to_string()));
    let list: Vec<String> = skipped.iter().map(|(k, why)| format!("{k} ({why})")).collect();
    c.metadata.push(("skipped".into(), list.join(", ")));
    Ok(c)
}

fn build(shape: &[usize], data: &[f64], int: bool) -> Value {
    let scalar = |v: f64| if int { Value::Int(v as i64) } else { Value::Float(v) };
    match shape {
        [] => scalar(data[0]),
        [_] => Value::List(data.iter().copied().map(scalar).collect()),
        [n, rest @ ..] => {
            let step = if *n == 0 { 0 } else { data.len() / n };
            Value::List((0..*n).map(|k| build(rest, &data[k * step..(k + 1) * step], int)).collect())
        }
    }
}

/// Inverse of [`records_to_container`] for loading: arrays become nested
/// lists, ragged entries are split by their lengths.
pub fn container_to_values(c: &ArrayContainer) -> Args {
    let mut out = Args::new();
    for e in c.entries() {
        if e.name.ends_with("__lengths") {
            continue;
        }
        let int = matches!(e.data, ArrayData::I64(_));
        let data = e.data.to_f64();
        let v = match c.get(&format!("{}__lengths", e.name)) {
            Some(l) => {
                let mut at = 0;
                Value::List(
                    l.data
                        .to_f64()
                        .iter()
                        .map(|n| {
                            let n = *n as usize;
                            let part = build(&[n], &data[at..at + n], int);
                            at += n;
                            part
                        })
                        .collect(),
                )
            }
            None => build(&e.shape, &data, int),
        };
        out.insert(e.name.clone(), v);
    }
    out
}
