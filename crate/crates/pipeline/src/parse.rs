//! Module token grammar: `Name`, `Name:value`, `Name:key=value` and
//! `Name:dict(key=value,...)`.

use std::collections::BTreeMap;
use std::fmt;

use terrain_core::obstacles::ParamDistribution;

use crate::error::{PipelineError, Result};
use crate::value::Value;

/// Error inside a value: 1-based column relative to the value start.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueError {
    pub column: usize,
    pub message: String,
}

type VResult<T> = std::result::Result<T, ValueError>;

fn verr(column: usize, message: impl Into<String>) -> ValueError {
    ValueError {
        column,
        message: message.into(),
    }
}

fn closing(open: char) -> char {
    match open {
        '(' => ')',
        '[' => ']',
        _ => '}',
    }
}

/// Splits on `sep` outside brackets and quotes. Returns (byte offset, piece).
fn split_top(s: &str, sep: char) -> VResult<Vec<(usize, &str)>> {
    let mut out = Vec::new();
    let mut stack: Vec<(char, usize)> = Vec::new();
    let mut quote: Option<(char, usize)> = None;
    let mut start = 0;
    for (k, c) in s.char_indices() {
        if let Some((q, _)) = quote {
            if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '\'' | '"' => quote = Some((c, k)),
            '(' | '[' | '{' => stack.push((c, k)),
            ')' | ']' | '}' => match stack.pop() {
                Some((open, _)) if closing(open) == c => {}
                Some((open, at)) => {
                    return Err(verr(k + 1, format!("`{c}` does not close `{open}` opened at column {}", at + 1)))
                }
                None => return Err(verr(k + 1, format!("unmatched `{c}`"))),
            },
            _ if c == sep && stack.is_empty() => {
                out.push((start, &s[start..k]));
                start = k + c.len_utf8();
            }
            _ => {}
        }
    }
    if let Some((q, at)) = quote {
        return Err(verr(at + 1, format!("unterminated {q} quote")));
    }
    if let Some((open, at)) = stack.pop() {
        return Err(verr(at + 1, format!("unclosed `{open}`")));
    }
    out.push((start, &s[start..]));
    Ok(out)
}

fn strip_quotes(s: &str) -> Option<&str> {
    let b = s.as_bytes();
    if b.len() >= 2 && (b[0] == b'\'' || b[0] == b'"') && b[b.len() - 1] == b[0] && !s[1..s.len() - 1].contains(b[0] as char) {
        Some(&s[1..s.len() - 1])
    } else {
        None
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `kind(args)` or `kind[args]` with a known distribution kind.
fn call_form(s: &str) -> Option<(&str, usize, &str)> {
    let open = s.find(['(', '['])?;
    let close = s.chars().last()?;
    let name = &s[..open];
    let opener = s[open..].chars().next()?;
    if close != closing(opener) || !is_identifier(name) {
        return None;
    }
    Some((name, open + 1, &s[open + 1..s.len() - 1]))
}

fn parse_number(s: &str) -> Option<Value> {
    if !s.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    if let Ok(v) = s.parse::<i64>() {
        return Some(Value::Int(v));
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Value::Float)
}

/// Parses one value. Anything that is not a number, bool, list or
/// distribution is kept as a string.
pub fn parse_value(s: &str) -> VResult<Value> {
    let lead = s.len() - s.trim_start().len();
    let t = s.trim();
    if t.is_empty() {
        return Err(verr(lead + 1, "empty value"));
    }
    if let Some(inner) = strip_quotes(t) {
        return Ok(Value::Str(inner.to_string()));
    }
    if t.starts_with('[') {
        if !t.ends_with(']') || split_top(t, '\0').is_err() {
            split_top(t, '\0').map_err(|e| verr(lead + e.column, e.message))?;
            return Err(verr(lead + t.len(), "list must end with `]`"));
        }
        let inner = &t[1..t.len() - 1];
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        let items = split_top(inner, ',').map_err(|e| verr(lead + 1 + e.column, e.message))?;
        return items
            .into_iter()
            .map(|(off, piece)| parse_value(piece).map_err(|e| verr(lead + 1 + off + e.column, e.message)))
            .collect::<VResult<Vec<_>>>()
            .map(Value::List);
    }
    if let Some((kind, off, args)) = call_form(t) {
        if ParamDistribution::is_known_kind(kind) {
            let mut nums = Vec::new();
            if !args.trim().is_empty() {
                for (o, piece) in split_top(args, ',').map_err(|e| verr(lead + off + e.column, e.message))? {
                    let v = parse_number(piece.trim())
                        .and_then(|v| v.as_f64())
                        .ok_or_else(|| verr(lead + off + o + 1, format!("`{}` is not a number", piece.trim())))?;
                    nums.push(v);
                }
            }
            return ParamDistribution::from_args(kind, &nums)
                .map(Value::Dist)
                .map_err(|e| verr(lead + 1, e.to_string()));
        }
    }
    match t {
        "True" | "true" => return Ok(Value::Bool(true)),
        "False" | "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    if let Some(v) = parse_number(t) {
        return Ok(v);
    }
    split_top(t, '\0').map_err(|e| verr(lead + e.column, e.message))?;
    Ok(Value::Str(t.to_string()))
}

/// One parsed module token.
#[derive(Clone, Debug, PartialEq)]
pub struct Invocation {
    pub name: String,
    pub default: Option<Value>,
    pub kwargs: BTreeMap<String, Value>,
}

impl Invocation {
    pub fn new(name: impl Into<String>) -> Self {
        Invocation {
            name: name.into(),
            default: None,
            kwargs: BTreeMap::new(),
        }
    }
}

impl fmt::Display for Invocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(v) = &self.default {
            return write!(f, ":{v}");
        }
        match self.kwargs.len() {
            0 => Ok(()),
            1 => {
                let (k, v) = self.kwargs.iter().next().expect("one entry");
                write!(f, ":{k}={v}")
            }
            _ => {
                f.write_str(":dict(")?;
                for (n, (k, v)) in self.kwargs.iter().enumerate() {
                    if n > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}={v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Splits `key=value` at the first top-level `=` if the key is an identifier.
fn keyword(s: &str) -> Option<(&str, usize, &str)> {
    let eq = s.find('=')?;
    let key = s[..eq].trim();
    if is_identifier(key) && !s[..eq].contains(['(', '[', '\'', '"']) {
        Some((key, eq + 1, &s[eq + 1..]))
    } else {
        None
    }
}

fn parse_dict(body: &str, offset: usize) -> VResult<BTreeMap<String, Value>> {
    let mut out = BTreeMap::new();
    if body.trim().is_empty() {
        return Ok(out);
    }
    for (off, piece) in split_top(body, ',').map_err(|e| verr(offset + e.column, e.message))? {
        let (key, voff, raw) = keyword(piece)
            .ok_or_else(|| verr(offset + off + 1, format!("expected key=value, got `{}`", piece.trim())))?;
        let v = parse_value(raw).map_err(|e| verr(offset + off + voff + e.column, e.message))?;
        if out.insert(key.to_string(), v).is_some() {
            return Err(verr(offset + off + 1, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

fn dict_body(s: &str) -> Option<(usize, &str)> {
    let (name, off, body) = call_form(s)?;
    (name == "dict").then_some((off, body))
}

/// Parses a module token such as `Combine:Max` or `Loop:2x2`.
pub fn parse_token(token: &str) -> Result<Invocation> {
    let fail = |column: usize, message: String| PipelineError::Parse {
        token: token.to_string(),
        column,
        message,
    };
    let (name, rest) = match token.find(':') {
        Some(k) => (&token[..k], Some((k + 1, &token[k + 1..]))),
        None => (token, None),
    };
    if !is_identifier(name) {
        let bad = name
            .char_indices()
            .find(|(k, c)| !(c.is_ascii_alphanumeric() || *c == '_') || (*k == 0 && c.is_ascii_digit()))
            .map(|(k, _)| k + 1)
            .unwrap_or(1);
        return Err(fail(bad, format!("invalid module name `{name}`")));
    }
    let mut inv = Invocation::new(name);
    let Some((off, arg)) = rest else {
        return Ok(inv);
    };
    let lead = arg.len() - arg.trim_start().len();
    let trimmed = arg.trim();
    if trimmed.is_empty() {
        return Err(fail(off + 1, "empty argument after `:`".into()));
    }
    let base = off + lead;
    // a quoted dict is still a dict; any other quoted text is a string
    let (inner, inner_off) = match strip_quotes(trimmed) {
        Some(s) if dict_body(s).is_some() => (s, base + 1),
        _ => (trimmed, base),
    };
    if let Some((doff, body)) = dict_body(inner) {
        inv.kwargs = parse_dict(body, inner_off + doff).map_err(|e| fail(e.column, e.message))?;
    } else if let Some((key, voff, raw)) = keyword(inner).filter(|_| strip_quotes(inner).is_none()) {
        let v = parse_value(raw).map_err(|e| fail(inner_off + voff + e.column, e.message))?;
        inv.kwargs.insert(key.to_string(), v);
    } else {
        inv.default = Some(parse_value(inner).map_err(|e| fail(inner_off + e.column, e.message))?);
    }
    Ok(inv)
}

/// Splits a line into tokens on whitespace, keeping quoted sections intact
/// and removing the quotes that wrap a whole token.
pub fn split_tokens(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut has = false;
    for c in line.chars() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => cur.push(c),
            None if c == '\'' || c == '"' => {
                quote = Some(c);
                has = true;
            }
            None if c.is_whitespace() => {
                if has {
                    out.push(std::mem::take(&mut cur));
                    has = false;
                }
            }
            None => {
                cur.push(c);
                has = true;
            }
        }
    }
    if has {
        out.push(cur);
    }
    out
}
