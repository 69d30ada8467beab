//! Arithmetic expressions over world coordinates.
//!
//! Precedence follows Python: `**` binds tighter than unary minus and is
//! right-associative, so `-x**2` is `-(x**2)` and `2**-1` is `0.5`.
//! One-argument `min`/`max` reduce over the whole grid; two-argument forms
//! are elementwise.

use std::fmt;

use ndarray::{Array2, Zip};

use crate::error::{Result, TerrainError};
use crate::grid::{GridSpec, Terrain};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
    Floor,
    Round,
}

impl Func {
    const ALL: [(&'static str, Func); 11] = [
        ("sin", Func::Sin),
        ("cos", Func::Cos),
        ("tan", Func::Tan),
        ("exp", Func::Exp),
        ("log", Func::Log),
        ("sqrt", Func::Sqrt),
        ("abs", Func::Abs),
        ("min", Func::Min),
        ("max", Func::Max),
        ("floor", Func::Floor),
        ("round", Func::Round),
    ];

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
    }

    pub fn name(self) -> &'static str {
        Func::ALL.iter().find(|(_, f)| *f == self).map(|(n, _)| *n).unwrap()
    }

    fn unary(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
            Func::Floor => v.floor(),
            Func::Round => v.round_ties_even(),
            Func::Min | Func::Max => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Var(Var::R) => f.write_str("r"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "**",
                };
                write!(f, "({a}{s}{b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
    End,
}

fn err(column: usize, message: impl Into<String>) -> TerrainError {
    TerrainError::Expression {
        column,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let col = k + 1;
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(k + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut m = k + 1;
                if m < chars.len() && (chars[m] == '+' || chars[m] == '-') {
                    m += 1;
                }
                if m < chars.len() && chars[m].is_ascii_digit() {
                    k = m;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let text: String = chars[start..k].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| err(col, format!("malformed number `{text}`")))?;
            out.push((Tok::Num(v), col));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_alphanumeric() || chars[k] == '_' || chars[k] == '.') {
                k += 1;
            }
            out.push((Tok::Ident(chars[start..k].iter().collect()), col));
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '+' => Tok::Op("+"),
            '-' => Tok::Op("-"),
            '/' => Tok::Op("/"),
            '*' if chars.get(k + 1) == Some(&'*') => {
                k += 1;
                Tok::Op("**")
            }
            '*' => Tok::Op("*"),
            other => return Err(err(col, format!("unexpected character `{other}`"))),
        };
        out.push((tok, col));
        k += 1;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(err(self.col(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op("+") => BinOp::Add,
                Tok::Op("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op("*") => BinOp::Mul,
                Tok::Op("/") => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op("-") => {
                self.next();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op("+") => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op("**") {
            self.next();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.next() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let bare = name
                    .strip_prefix("np.")
                    .or_else(|| name.strip_prefix("numpy."))
                    .unwrap_or(&name);
                if *self.peek() == Tok::LParen {
                    let func = Func::lookup(bare)
                        .ok_or_else(|| err(col, format!("unknown function `{name}`")))?;
                    self.next();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.next();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)` or `,`")?;
                    let ok = match func {
                        Func::Min | Func::Max => args.len() <= 2,
                        _ => args.len() == 1,
                    };
                    if !ok {
                        return Err(err(col, format!("wrong number of arguments for `{bare}`")));
                    }
                    return Ok(Expr::Call(func, args));
                }
                match bare {
                    "x" => Ok(Expr::Var(Var::X)),
                    "y" => Ok(Expr::Var(Var::Y)),
                    "r" => Ok(Expr::Var(Var::R)),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => Ok(Expr::Num(std::f64::consts::E)),
                    _ => Err(err(col, format!("unknown name `{name}`"))),
                }
            }
            Tok::End => Err(err(col, "unexpected end of expression")),
            _ => Err(err(col, "expected a number, name or `(`")),
        }
    }
}

/// Parses an expression, reporting 1-based column offsets on error.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(err(p.col(), "unexpected trailing input"));
    }
    Ok(e)
}

#[derive(Clone, Debug)]
enum Value {
    Scalar(f64),
    Field(Array2<f64>),
}

impl Value {
    fn map(self, f: impl Fn(f64) -> f64) -> Value {
        match self {
            Value::Scalar(v) => Value::Scalar(f(v)),
            Value::Field(a) => Value::Field(a.mapv(f)),
        }
    }

    fn zip(self, other: Value, f: impl Fn(f64, f64) -> f64) -> Value {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(f(a, b)),
            (Value::Field(a), Value::Scalar(b)) => Value::Field(a.mapv(|v| f(v, b))),
            (Value::Scalar(a), Value::Field(b)) => Value::Field(b.mapv(|v| f(a, v))),
            (Value::Field(mut a), Value::Field(b)) => {
                Zip::from(&mut a).and(&b).for_each(|p, q| *p = f(*p, *q));
                Value::Field(a)
            }
        }
    }
}

struct Env {
    x: Array2<f64>,
    y: Array2<f64>,
}

fn pow(a: f64, b: f64) -> f64 {
    a.powf(b)
}

fn eval(e: &Expr, env: &Env) -> Value {
    match e {
        Expr::Num(v) => Value::Scalar(*v),
        Expr::Var(Var::X) => Value::Field(env.x.clone()),
        Expr::Var(Var::Y) => Value::Field(env.y.clone()),
        Expr::Var(Var::R) => {
            let mut r = env.x.clone();
            Zip::from(&mut r).and(&env.y).for_each(|p, q| *p = p.hypot(*q));
            Value::Field(r)
        }
        Expr::Neg(a) => eval(a, env).map(|v| -v),
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval(a, env), eval(b, env));
            match op {
                BinOp::Add => a.zip(b, |p, q| p + q),
                BinOp::Sub => a.zip(b, |p, q| p - q),
                BinOp::Mul => a.zip(b, |p, q| p * q),
                BinOp::Div => a.zip(b, |p, q| p / q),
                BinOp::Pow => a.zip(b, pow),
            }
        }
        Expr::Call(func, args) => {
            let first = eval(&args[0], env);
            match (func, args.len()) {
                (Func::Min, 1) | (Func::Max, 1) => Value::Scalar(match first {
                    Value::Scalar(v) => v,
                    Value::Field(a) => {
                        if *func == Func::Min {
                            a.fold(f64::INFINITY, |m, v| m.min(*v))
                        } else {
                            a.fold(f64::NEG_INFINITY, |m, v| m.max(*v))
                        }
                    }
                }),
                (Func::Min, 2) => first.zip(eval(&args[1], env), f64::min),
                (Func::Max, 2) => first.zip(eval(&args[1], env), f64::max),
                _ => first.map(|v| func.unary(v)),
            }
        }
    }
}

/// Evaluates a parsed expression over the cell centers of `spec`.
pub fn eval_on_grid(expr: &Expr, spec: GridSpec) -> Result<Terrain> {
    let (x, y) = spec.world_coordinates();
    let heights = match eval(expr, &Env { x, y }) {
        Value::Scalar(v) => Array2::from_elem(spec.shape(), v),
        Value::Field(a) => a,
    };
    Terrain::new(spec, heights)
}

/// Parses and evaluates `src`; non-finite results are reported with their cell.
pub fn eval_expression_terrain(src: &str, spec: GridSpec) -> Result<Terrain> {
    let expr = parse(src)?;
    Ok(eval_on_grid(&expr, spec)?.with_tag("expression", src))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Extent;

    #[test]
    fn precedence_matches_python() {
        let spec = GridSpec::new(Extent::new(0.0, 2.0, 0.0, 2.0), 2, 2).unwrap();
        let v = |s: &str| eval_expression_terrain(s, spec).unwrap().get(0, 0);
        assert_eq!(v("-2**2"), -4.0);
        assert_eq!(v("2**3**2"), 512.0);
        assert_eq!(v("2**-1"), 0.5);
        assert_eq!(v("1-2-3"), -4.0);
        assert_eq!(v("8/4/2"), 1.0);
        assert_eq!(v("np.max(x)"), 1.5);
        assert_eq!(v("max(x, 1)"), 1.0);
        assert_eq!(v("round(2.5)"), 2.0);
        assert_eq!(v("1e-3*1E3"), 1.0);
    }

    #[test]
    fn errors_report_columns() {
        match parse("1 + * 2") {
            Err(TerrainError::Expression { column, .. }) => assert_eq!(column, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse("sin(x") {
            Err(TerrainError::Expression { column, .. }) => assert_eq!(column, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("foo(x)").is_err());
        assert!(parse("sin(x, y)").is_err());
        assert!(parse("x y").is_err());
    }

    #[test]
    fn non_finite_names_cell() {
        let spec = GridSpec::new(Extent::new(-1.0, 1.0, -1.0, 1.0), 2, 2).unwrap();
        match eval_expression_terrain("log(x)", spec) {
            Err(TerrainError::NonFinite { i, .. }) => assert_eq!(i, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn radial_corner_value() {
        let t = eval_expression_terrain("r", GridSpec::default()).unwrap();
        assert!((t.get(0, 0) - (2.0f64 * 24.75 * 24.75).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn display_round_trips() {
        let e = parse("-x**2 + max(y, 3) / sin(r)").unwrap();
        assert_eq!(parse(&e.to_string()).unwrap(), e);
    }
}
