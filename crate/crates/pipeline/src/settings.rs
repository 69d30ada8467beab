//! Settings layers and their precedence: settings file, then general
//! command-line settings, then pipe values, then the module's own arguments.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{PipelineError, Result};
use crate::parse::{parse_value, split_tokens};
use crate::value::{TypeClass, Value};

pub type Args = BTreeMap<String, Value>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SettingsFile {
    pub values: Args,
    pub modules: Vec<String>,
}

fn value_or_err(key: &str, raw: &str) -> Result<Value> {
    parse_value(raw).map_err(|e| PipelineError::Settings {
        key: key.to_string(),
        message: format!("column {}: {}", e.column, e.message),
    })
}

/// Parses `key: value` (or `key = value`) lines. `modules` takes either an
/// inline token list or following `- Token` lines.
pub fn parse_settings_text(text: &str) -> Result<SettingsFile> {
    let mut out = SettingsFile::default();
    let mut in_modules = false;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_modules {
            if let Some(item) = line.strip_prefix("- ") {
                out.modules.extend(split_tokens(item));
                continue;
            }
            in_modules = false;
        }
        let sep = line.find([':', '=']).ok_or_else(|| PipelineError::Settings {
            key: line.to_string(),
            message: format!("line {}: expected `key: value`", n + 1),
        })?;
        let key = line[..sep].trim();
        let rest = line[sep + 1..].trim();
        if key == "modules" {
            out.modules.extend(split_tokens(rest));
            in_modules = rest.is_empty();
            continue;
        }
        if rest.is_empty() {
            return Err(PipelineError::Settings {
                key: key.to_string(),
                message: format!("line {}: missing value", n + 1),
            });
        }
        out.values.insert(key.to_string(), value_or_err(key, rest)?);
    }
    Ok(out)
}

pub fn read_settings_file(path: &Path) -> Result<SettingsFile> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    parse_settings_text(&text)
}

/// Parses a command-line setting `key:value`.
pub fn parse_cli_setting(s: &str) -> Result<(String, Value)> {
    let (key, raw) = s.split_once(':').ok_or_else(|| PipelineError::Settings {
        key: s.to_string(),
        message: "expected key:value".into(),
    })?;
    let key = key.trim();
    if !crate::parse::is_identifier(key) {
        return Err(PipelineError::Settings {
            key: key.to_string(),
            message: "invalid key".into(),
        });
    }
    Ok((key.to_string(), value_or_err(key, raw)?))
}

/// Settings shared by every module invocation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    pub file: Args,
    pub general: Args,
}

const LAYER_NAMES: [&str; 4] = ["settings file", "general settings", "pipe", "module arguments"];

impl Settings {
    /// Merges the four layers, later layers winning. Two layers giving the
    /// same key values of different scalar kinds is an error.
    pub fn resolve(&self, pipe: &Args, specific: &Args) -> Result<Args> {
        let layers = [&self.file, &self.general, pipe, specific];
        let mut merged = Args::new();
        let mut seen: BTreeMap<&str, (TypeClass, usize)> = BTreeMap::new();
        for (li, layer) in layers.iter().enumerate() {
            for (k, v) in layer.iter() {
                let class = v.type_class();
                if class != TypeClass::Other {
                    if let Some((prev, pl)) = seen.get(k.as_str()) {
                        if *prev != class {
                            return Err(PipelineError::Settings {
                                key: k.clone(),
                                message: format!(
                                    "{} gives {:?} but {} gives {:?} `{v}`",
                                    LAYER_NAMES[*pl], prev, LAYER_NAMES[li], class
                                ),
                            });
                        }
                    }
                    seen.insert(k, (class, li));
                }
                merged.insert(k.clone(), v.clone());
            }
        }
        Ok(merged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(pairs: &[(&str, Value)]) -> Args {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn precedence_order() {
        let s = Settings {
            file: args(&[("p", Value::Int(1)), ("q", Value::Int(7))]),
            general: args(&[("p", Value::Int(2))]),
        };
        let r = s.resolve(&Args::new(), &Args::new()).unwrap();
        assert_eq!(r["p"], Value::Int(2));
        assert_eq!(r["q"], Value::Int(7));
        let r = s.resolve(&args(&[("p", Value::Int(3))]), &Args::new()).unwrap();
        assert_eq!(r["p"], Value::Int(3));
        let r = s
            .resolve(&args(&[("p", Value::Int(3))]), &args(&[("p", Value::Float(4.0))]))
            .unwrap();
        assert_eq!(r["p"], Value::Float(4.0));
    }

    #[test]
    fn type_conflict_is_reported() {
        let s = Settings {
            file: args(&[("p", Value::Int(1))]),
            general: args(&[("p", Value::Str("big".into()))]),
        };
        let err = s.resolve(&Args::new(), &Args::new()).unwrap_err();
        assert!(err.to_string().contains("`p`"), "{err}");
    }

    #[test]
    fn settings_file_forms() {
        let f = parse_settings_text(
            "# comment\nextent: [-10, 10, -10, 10]\nexportmode = True\nmodules:\n  - Basic:10\n  - 'Function:x + y'\n",
        )
        .unwrap();
        assert_eq!(f.values["exportmode"], Value::Bool(true));
        assert_eq!(f.modules, vec!["Basic:10", "Function:x + y"]);
        let f = parse_settings_text("modules: Basic Combine:Max Save").unwrap();
        assert_eq!(f.modules.len(), 3);
        assert!(parse_settings_text("justtext").is_err());
    }

    #[test]
    fn cli_setting() {
        assert_eq!(parse_cli_setting("exportmode:True").unwrap(), ("exportmode".into(), Value::Bool(true)));
        assert_eq!(
            parse_cli_setting("grid_size:[50,50]").unwrap().1,
            Value::List(vec![Value::Int(50), Value::Int(50)])
        );
        assert!(parse_cli_setting("nocolon").is_err());
    }
}
