//! A small expression language for maps and control functions.
//!
//! ```text
//! expr      := piecewise | arith
//! piecewise := "piecewise" "{" arm+ elsearm? "}"
//! arm       := guard "=>" arith ";"
//! elsearm   := "else" "=>" arith ";"
//! guard     := cmp ( ("and"|"or") cmp )*
//! cmp       := arith ("<="|"<"|">="|">"|"==") arith
//! arith     := term ( ("+"|"-") term )*
//! term      := factor ( ("*"|"/") factor )*
//! factor    := number | ident | "(" arith ")" | fname "(" arith ("," arith)* ")" | "-" factor
//! fname     := "min" | "max" | "abs"
//! ident     := "x" | "y" | "t"
//! number    := decimal literal | integer "/" integer
//! ```
//!
//! `and` binds tighter than `or`. A rational literal such as `47/24` must be
//! written without spaces; `47 / 24` is a division. The final `;` of a
//! piecewise block may be omitted.

use std::fmt;

use thiserror::Error;

use crate::metric::REAL_EQ_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    T,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::T => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Literal {
    Decimal(f64),
    /// Kept exact until evaluation.
    Ratio(i64, i64),
}

impl Literal {
    pub fn value(self) -> f64 {
        match self {
            Literal::Decimal(v) => v,
            Literal::Ratio(p, q) => p as f64 / q as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Min,
    Max,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Eq => "==",
        }
    }

    fn test(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Le => a <= b,
            CmpOp::Lt => a < b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
            CmpOp::Eq => (a - b).abs() <= REAL_EQ_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

/// Disjunction of conjunctions, mirroring `and`-over-`or` precedence.
#[derive(Debug, Clone, PartialEq)]
pub struct Guard {
    pub any_of: Vec<Vec<Comparison>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub guard: Guard,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(Literal),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    Piecewise { arms: Vec<Arm>, otherwise: Option<Box<Expr>> },
}

/// Variable values for one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub t: Option<f64>,
}

impl Bindings {
    pub fn xy(x: f64, y: f64) -> Self {
        Self { x: Some(x), y: Some(y), t: None }
    }

    pub fn x(x: f64) -> Self {
        Self { x: Some(x), ..Self::default() }
    }

    pub fn t(t: f64) -> Self {
        Self { t: Some(t), ..Self::default() }
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::X => self.x,
            Var::Y => self.y,
            Var::T => self.t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable {} is unbound", .0.name())]
    Unbound(Var),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no piecewise arm matched and there is no else arm")]
    NoArmFired,
    #[error("expression produced a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at {line}:{column}: found {found}, expected {}", .expected.join(" or "))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub found: String,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown identifier `{name}` at {line}:{column}")]
    UnknownIdentifier { name: String, line: usize, column: usize },
    #[error("`{func}` takes {expected} argument(s), got {found} at {line}:{column}")]
    Arity {
        func: &'static str,
        expected: &'static str,
        found: usize,
        line: usize,
        column: usize,
    },
    #[error("rational literal with zero denominator at {line}:{column}")]
    ZeroDenominator { line: usize, column: usize },
    #[error("variable `{var}` is not available here (allowed: {allowed})")]
    VariableNotAllowed { var: &'static str, allowed: String },
}

impl Expr {
    pub fn eval(&self, env: &Bindings) -> Result<f64, EvalError> {
        let v = self.eval_raw(env)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_raw(&self, env: &Bindings) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Number(l) => l.value(),
            Expr::Var(v) => env.get(*v).ok_or(EvalError::Unbound(*v))?,
            Expr::Neg(e) => -e.eval_raw(env)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_raw(env)?;
                let b = b.eval_raw(env)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                }
            }
            Expr::Call(f, args) => {
                let mut vals = args.iter().map(|a| a.eval_raw(env));
                let first = vals.next().expect("arity checked at parse")?;
                match f {
                    Func::Abs => first.abs(),
                    Func::Min => vals.try_fold(first, |m, v| v.map(|v| m.min(v)))?,
                    Func::Max => vals.try_fold(first, |m, v| v.map(|v| m.max(v)))?,
                }
            }
            Expr::Piecewise { arms, otherwise } => {
                for arm in arms {
                    if arm.guard.holds(env)? {
                        return arm.value.eval_raw(env);
                    }
                }
                match otherwise {
                    Some(e) => e.eval_raw(env)?,
                    None => return Err(EvalError::NoArmFired),
                }
            }
        })
    }

    /// Variables referenced anywhere in the expression, sorted.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Number(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Expr::Piecewise { arms, otherwise } => {
                for arm in arms {
                    for conj in &arm.guard.any_of {
                        for c in conj {
                            c.lhs.collect_vars(out);
                            c.rhs.collect_vars(out);
                        }
                    }
                    arm.value.collect_vars(out);
                }
                if let Some(e) = otherwise {
                    e.collect_vars(out);
                }
            }
        }
    }

    /// Rejects variables outside `allowed` (e.g. `t` inside a coupling map).
    pub fn require_vars(&self, allowed: &[Var]) -> Result<(), ExprError> {
        for v in self.free_vars() {
            if !allowed.contains(&v) {
                return Err(ExprError::VariableNotAllowed {
                    var: v.name(),
                    allowed: allowed.iter().map(|a| a.name()).collect::<Vec<_>>().join(", "),
                });
            }
        }
        Ok(())
    }
}

impl Guard {
    fn holds(&self, env: &Bindings) -> Result<bool, EvalError> {
        for conj in &self.any_of {
            let mut all = true;
            for c in conj {
                if !c.op.test(c.lhs.eval_raw(env)?, c.rhs.eval_raw(env)?) {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

// ---------------------------------------------------------------------------
// printing

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parent: u8, right: bool) -> fmt::Result {
    let needs = match e {
        Expr::Binary(op, _, _) => {
            let p = op.precedence();
            p < parent || (right && p == parent)
        }
        _ => false,
    };
    if needs {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Decimal(v) => write!(f, "{v}"),
            Literal::Ratio(p, q) => write!(f, "{p}/{q}"),
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, conj) in self.any_of.iter().enumerate() {
            if i > 0 {
                f.write_str(" or ")?;
            }
            for (j, c) in conj.iter().enumerate() {
                if j > 0 {
                    f.write_str(" and ")?;
                }
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(l) => write!(f, "{l}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => match **e {
                Expr::Binary(..) => write!(f, "-({e})"),
                _ => write!(f, "-{e}"),
            },
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                write_operand(f, a, p, false)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, b, p, true)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Piecewise { arms, otherwise } => {
                f.write_str("piecewise {")?;
                for arm in arms {
                    write!(f, " {} => {};", arm.guard, arm.value)?;
                }
                if let Some(e) = otherwise {
                    write!(f, " else => {e};")?;
                }
                f.write_str(" }")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// lexing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Literal),
    Ident(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(l) => format!("number `{l}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: [&str; 16] = ["=>", "<=", ">=", "==", "<", ">", "(", ")", "{", "}", ",", ";", "+", "-", "*", "/"];

fn lex(text: &str) -> Result<Vec<Spanned>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_only_end = i;
            let mut is_int = true;
            if i < chars.len() && chars[i] == '.' {
                is_int = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_int = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = if is_int
                && i == int_only_end
                && chars.get(i) == Some(&'/')
                && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())
            {
                let num: String = chars[start..i].iter().collect();
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let den: String = chars[i + 1..j].iter().collect();
                i = j;
                let bad = || ParseError {
                    line: start_line,
                    column: start_col,
                    found: format!("`{num}/{den}`"),
                    expected: vec!["a rational literal that fits in 64 bits".into()],
                };
                let p: i64 = num.parse().map_err(|_| bad())?;
                let q: i64 = den.parse().map_err(|_| bad())?;
                if q == 0 {
                    return Err(ExprError::ZeroDenominator { line: start_line, column: start_col });
                }
                Literal::Ratio(p, q)
            } else {
                let s: String = chars[start..i].iter().collect();
                Literal::Decimal(s.parse().map_err(|_| ParseError {
                    line: start_line,
                    column: start_col,
                    found: format!("`{s}`"),
                    expected: vec!["a number".into()],
                })?)
            };
            col += i - start;
            out.push(Spanned { tok: Tok::Num(lit), line: start_line, column: start_col });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(s), line: start_line, column: start_col });
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
            return Err(ParseError {
                line,
                column: col,
                found: format!("`{c}`"),
                expected: vec!["an expression token".into()],
            }
            .into());
        };
        i += sym.len();
        col += sym.len();
        out.push(Spanned { tok: Tok::Sym(sym), line: start_line, column: start_col });
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

// ---------------------------------------------------------------------------
// parsing

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == w)
    }

    fn error(&self, expected: &[&str]) -> ExprError {
        let t = self.peek();
        ParseError {
            line: t.line,
            column: t.column,
            found: t.tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
        .into()
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<(), ExprError> {
        if self.at_sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("\"{s}\"")]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        if self.at_word("piecewise") {
            self.piecewise()
        } else {
            self.arith()
        }
    }

    fn piecewise(&mut self) -> Result<Expr, ExprError> {
        self.bump();
        self.expect_sym("{")?;
        let mut arms = Vec::new();
        let mut otherwise = None;
        loop {
            if self.at_sym("}") {
                if arms.is_empty() && otherwise.is_none() {
                    return Err(self.error(&["a piecewise arm"]));
                }
                self.bump();
                break;
            }
            if otherwise.is_some() {
                return Err(self.error(&["\"}\""]));
            }
            if self.at_word("else") {
                if arms.is_empty() {
                    return Err(self.error(&["a guarded arm before `else`"]));
                }
                self.bump();
                self.expect_sym("=>")?;
                otherwise = Some(Box::new(self.arith()?));
            } else {
                let guard = self.guard()?;
                self.expect_sym("=>")?;
                let value = self.arith()?;
                arms.push(Arm { guard, value });
            }
            if self.at_sym(";") {
                self.bump();
            } else if !self.at_sym("}") {
                return Err(self.error(&["\";\"", "\"}\""]));
            }
        }
        Ok(Expr::Piecewise { arms, otherwise })
    }

    fn guard(&mut self) -> Result<Guard, ExprError> {
        let mut any_of = vec![vec![self.comparison()?]];
        loop {
            if self.at_word("and") {
                self.bump();
                let c = self.comparison()?;
                any_of.last_mut().expect("nonempty").push(c);
            } else if self.at_word("or") {
                self.bump();
                any_of.push(vec![self.comparison()?]);
            } else {
                break;
            }
        }
        Ok(Guard { any_of })
    }

    fn comparison(&mut self) -> Result<Comparison, ExprError> {
        let lhs = self.arith()?;
        let op = match &self.peek().tok {
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym("==") => CmpOp::Eq,
            _ => return Err(self.error(&["\"<=\"", "\"<\"", "\">=\"", "\">\"", "\"==\""])),
        };
        self.bump();
        let rhs = self.arith()?;
        Ok(Comparison { lhs, op, rhs })
    }

    fn arith(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.at_sym("+") {
                BinOp::Add
            } else if self.at_sym("-") {
                BinOp::Sub
            } else {
                break;
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.at_sym("*") {
                BinOp::Mul
            } else if self.at_sym("/") {
                BinOp::Div
            } else {
                break;
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Num(l) => {
                self.bump();
                Ok(Expr::Number(*l))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.arith()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("-") => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "x" => Ok(Expr::Var(Var::X)),
                    "y" => Ok(Expr::Var(Var::Y)),
                    "t" => Ok(Expr::Var(Var::T)),
                    "min" | "max" | "abs" => {
                        let func = match name.as_str() {
                            "min" => Func::Min,
                            "max" => Func::Max,
                            _ => Func::Abs,
                        };
                        self.expect_sym("(")?;
                        let mut args = vec![self.arith()?];
                        loop {
                            if self.at_sym(",") {
                                self.bump();
                                args.push(self.arith()?);
                            } else if self.at_sym(")") {
                                self.bump();
                                break;
                            } else {
                                return Err(self.error(&["\")\"", "\",\""]));
                            }
                        }
                        let (ok, expected) = match func {
                            Func::Abs => (args.len() == 1, "1"),
                            Func::Min | Func::Max => (args.len() >= 2, "at least 2"),
                        };
                        if !ok {
                            return Err(ExprError::Arity {
                                func: func.name(),
                                expected,
                                found: args.len(),
                                line: t.line,
                                column: t.column,
                            });
                        }
                        Ok(Expr::Call(func, args))
                    }
                    _ => Err(ExprError::UnknownIdentifier { name: name.clone(), line: t.line, column: t.column }),
                }
            }
            _ => Err(self.error(&["a number", "a variable", "\"(\"", "\"-\"", "a function call"])),
        }
    }
}

/// Parses one expression; trailing input is an error.
pub fn parse_expression(text: &str) -> Result<Expr, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    if matches!(p.peek().tok, Tok::Eof) {
        return Err(p.error(&["an expression"]));
    }
    let e = p.expr()?;
    if !matches!(p.peek().tok, Tok::Eof) {
        return Err(p.error(&["end of input"]));
    }
    Ok(e)
}

/// Parses and checks the variable set in one go.
pub fn compile(text: &str, allowed: &[Var]) -> Result<Expr, ExprError> {
    let e = parse_expression(text)?;
    e.require_vars(allowed)?;
    Ok(e)
}
