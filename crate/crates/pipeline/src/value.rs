//! Typed values flowing through the pipe.

use std::fmt;
use std::sync::Arc;

use terrain_core::obstacles::{Obstacle, ParamDistribution};
use terrain_core::Terrain;

use crate::error::{PipelineError, Result};

#[derive(Clone, Debug)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Value>),
    Dist(ParamDistribution),
    Obstacles(Arc<Vec<Obstacle>>),
    Terrain(Arc<Terrain>),
}

/// Coarse type classes used to detect conflicting settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeClass {
    Numeric,
    Bool,
    Str,
    Other,
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::List(a), Value::List(b)) => a == b,
            (Value::Dist(a), Value::Dist(b)) => a == b,
            (Value::Obstacles(a), Value::Obstacles(b)) => Arc::ptr_eq(a, b) || a == b,
            (Value::Terrain(a), Value::Terrain(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Value {
    pub fn type_class(&self) -> TypeClass {
        match self {
            Value::Int(_) | Value::Float(_) => TypeClass::Numeric,
            Value::Bool(_) => TypeClass::Bool,
            Value::Str(_) => TypeClass::Str,
            _ => TypeClass::Other,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Dist(_) => "distribution",
            Value::Obstacles(_) => "obstacles",
            Value::Terrain(_) => "terrain",
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            Value::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
            Value::List(v) if v.len() == 1 => v[0].as_f64(),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Float(v) if v.fract() == 0.0 && v.abs() < 9.0e15 => Some(*v as i64),
            Value::List(v) if v.len() == 1 => v[0].as_i64(),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(v) => Some(*v != 0),
            Value::Str(s) => match s.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" => Some(true),
                "false" | "no" | "off" => Some(false),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Numbers as a vector; a scalar becomes a one-element vector.
    pub fn as_f64_list(&self) -> Option<Vec<f64>> {
        match self {
            Value::List(items) => items.iter().map(Value::as_f64).collect(),
            other => other.as_f64().map(|v| vec![v]),
        }
    }

    pub fn float_list(values: impl IntoIterator<Item = f64>) -> Value {
        Value::List(values.into_iter().map(Value::Float).collect())
    }

    /// Short description for pipe summaries.
    pub fn summary(&self) -> String {
        match self {
            Value::List(items) if items.len() > 6 => format!("list[{}]", items.len()),
            Value::Obstacles(o) => format!("obstacles[{}]", o.len()),
            Value::Terrain(t) => format!("terrain {}x{}", t.spec().nx(), t.spec().ny()),
            other => other.to_string(),
        }
    }
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s.contains([',', '=', '[', ']', '(', ')', '\'', '"', ' '])
        || crate::parse::parse_value(s).map(|v| v != Value::Str(s.to_string())).unwrap_or(true)
}

impl fmt::Display for Value {
    /// Formats in the token grammar so that parsing the output yields an
    /// equal value (terrains and obstacle lists excepted).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Str(s) if needs_quotes(s) => {
                if s.contains('\'') {
                    write!(f, "\"{s}\"")
                } else {
                    write!(f, "'{s}'")
                }
            }
            Value::Str(s) => f.write_str(s),
            Value::List(items) => {
                f.write_str("[")?;
                for (k, v) in items.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Dist(d) => write!(f, "{d}"),
            Value::Obstacles(o) => write!(f, "<{} obstacles>", o.len()),
            Value::Terrain(t) => write!(f, "<terrain {}x{}>", t.spec().nx(), t.spec().ny()),
        }
    }
}

/// Looks up a required numeric argument.
pub fn require_f64(key: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| PipelineError::arg(key, format!("expected a number, got {} `{v}`", v.type_name())))
}

pub fn require_list(key: &str, v: &Value) -> Result<Vec<f64>> {
    v.as_f64_list()
        .ok_or_else(|| PipelineError::arg(key, format!("expected numbers, got {} `{v}`", v.type_name())))
}
