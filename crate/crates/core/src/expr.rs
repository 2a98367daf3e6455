//! Arithmetic expressions in the single variable `t`.
//!
//! Grammar (usual precedence, `^` binds tighter than unary minus and is
//! right-associative):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 't' | 'pi' | 'e' | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func    := sin | cos | exp | log | sqrt | abs | pow | min | max
//! ```
//!
//! There is no implicit multiplication: `2t` is a syntax error.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Pow,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow | Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Const(f64),
    Var,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// AST node; `offset` is the byte offset of the token that produced it.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub offset: usize,
}

// Structural equality ignores source offsets so that re-parsed pretty output
// compares equal to the original tree.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownIdentifier,
    Arity,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?} error at byte {offset}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{node}` (byte {offset}) at t = {t}")]
pub struct EvalError {
    pub node: String,
    pub offset: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    source: String,
}

impl Expression {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        if text.trim().is_empty() {
            return Err(ParseError {
                kind: ParseErrorKind::Syntax,
                offset: 0,
                message: "empty expression".into(),
            });
        }
        let mut p = Parser::new(text)?;
        let root = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(p.syntax(tok.offset, format!("unexpected {}", tok.kind)));
        }
        Ok(Expression {
            root,
            source: text.to_string(),
        })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Fully parenthesised rendering that parses back to the same tree.
    pub fn pretty(&self) -> String {
        render(&self.root)
    }

    pub fn evaluate(&self, t: f64) -> Result<f64, EvalError> {
        eval_node(&self.root, t)
    }

    /// Evaluate at `t = exp(x)` in logarithmic form, so that values far
    /// outside the range of `f64` (e.g. `t^3` at `t = e^{10^4}`) stay usable.
    pub fn evaluate_log(&self, x: f64) -> Result<LogMagnitude, EvalError> {
        eval_log_node(&self.root, x)
    }

    /// Half period of the first `sin`/`cos` applied to `c*t` or `t`, if any.
    pub fn half_period_hint(&self) -> Option<f64> {
        fn scan(node: &Node) -> Option<f64> {
            match &node.kind {
                NodeKind::Call(Func::Sin | Func::Cos, args) => {
                    let freq = match &args[0].kind {
                        NodeKind::Var => Some(1.0),
                        NodeKind::Binary(BinOp::Mul, a, b) => match (&a.kind, &b.kind) {
                            (NodeKind::Const(c), NodeKind::Var)
                            | (NodeKind::Var, NodeKind::Const(c)) => Some(*c),
                            _ => None,
                        },
                        _ => None,
                    };
                    match freq {
                        Some(c) if c != 0.0 => Some(std::f64::consts::PI / c.abs()),
                        _ => scan(&args[0]),
                    }
                }
                NodeKind::Call(_, args) => args.iter().find_map(scan),
                NodeKind::Neg(a) => scan(a),
                NodeKind::Binary(_, a, b) => scan(a).or_else(|| scan(b)),
                _ => None,
            }
        }
        scan(&self.root)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn render(node: &Node) -> String {
    match &node.kind {
        NodeKind::Const(c) => format!("{c}"),
        NodeKind::Var => "t".into(),
        NodeKind::Neg(a) => format!("(-{})", render(a)),
        NodeKind::Binary(op, a, b) => format!("({} {} {})", render(a), op.symbol(), render(b)),
        NodeKind::Call(func, args) => {
            let args: Vec<String> = args.iter().map(render).collect();
            format!("{}({})", func.name(), args.join(", "))
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer / parser

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Num(v) => write!(f, "number {v}"),
            TokKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokKind::Op(c) => write!(f, "`{c}`"),
            TokKind::LParen => f.write_str("`(`"),
            TokKind::RParen => f.write_str("`)`"),
            TokKind::Comma => f.write_str("`,`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::Syntax,
                    offset: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax,
                        offset: start,
                        message: format!("number `{lit}` overflows"),
                    });
                }
                out.push(Token {
                    kind: TokKind::Num(value),
                    offset: start,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: TokKind::Ident(text[start..i].to_string()),
                    offset: start,
                });
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push(Token {
                    kind: TokKind::Op(c as char),
                    offset: start,
                });
                i += 1;
            }
            b'(' | b')' | b',' => {
                let kind = match c {
                    b'(' => TokKind::LParen,
                    b')' => TokKind::RParen,
                    _ => TokKind::Comma,
                };
                out.push(Token {
                    kind,
                    offset: start,
                });
                i += 1;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax,
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: lex(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn syntax(&self, offset: usize, message: String) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Syntax,
            offset,
            message,
        }
    }

    fn expect(&mut self, kind: TokKind) -> Result<Token, ParseError> {
        match self.next() {
            Some(tok) if tok.kind == kind => Ok(tok),
            Some(tok) => Err(self.syntax(tok.offset, format!("expected {kind}, found {}", tok.kind))),
            None => Err(self.syntax(self.end, format!("expected {kind}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Token {
            kind: TokKind::Op(c @ ('+' | '-')),
            offset,
        }) = self.peek().cloned()
        {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node {
                kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                offset,
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Token {
            kind: TokKind::Op(c @ ('*' | '/')),
            offset,
        }) = self.peek().cloned()
        {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node {
                kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                offset,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if let Some(Token {
            kind: TokKind::Op('-'),
            offset,
        }) = self.peek().cloned()
        {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Node {
                kind: NodeKind::Neg(Box::new(inner)),
                offset,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if let Some(Token {
            kind: TokKind::Op('^'),
            offset,
        }) = self.peek().cloned()
        {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Node {
                kind: NodeKind::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)),
                offset,
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let Some(tok) = self.next() else {
            return Err(self.syntax(self.end, "unexpected end of input".into()));
        };
        match tok.kind {
            TokKind::Num(v) => Ok(Node {
                kind: NodeKind::Const(v),
                offset: tok.offset,
            }),
            TokKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokKind::RParen)?;
                Ok(inner)
            }
            TokKind::Ident(name) => {
                let is_call = matches!(self.peek(), Some(Token { kind: TokKind::LParen, .. }));
                if !is_call {
                    let kind = match name.as_str() {
                        "t" => NodeKind::Var,
                        "pi" => NodeKind::Const(std::f64::consts::PI),
                        "e" => NodeKind::Const(std::f64::consts::E),
                        _ => {
                            return Err(ParseError {
                                kind: ParseErrorKind::UnknownIdentifier,
                                offset: tok.offset,
                                message: format!("unknown identifier `{name}`"),
                            })
                        }
                    };
                    return Ok(Node {
                        kind,
                        offset: tok.offset,
                    });
                }
                let func = Func::from_name(&name).ok_or_else(|| ParseError {
                    kind: ParseErrorKind::UnknownIdentifier,
                    offset: tok.offset,
                    message: format!("unknown function `{name}`"),
                })?;
                self.pos += 1; // '('
                let mut args = vec![self.expr()?];
                while matches!(self.peek(), Some(Token { kind: TokKind::Comma, .. })) {
                    self.pos += 1;
                    args.push(self.expr()?);
                }
                self.expect(TokKind::RParen)?;
                if args.len() != func.arity() {
                    return Err(ParseError {
                        kind: ParseErrorKind::Arity,
                        offset: tok.offset,
                        message: format!(
                            "`{}` takes {} argument(s), got {}",
                            func.name(),
                            func.arity(),
                            args.len()
                        ),
                    });
                }
                Ok(Node {
                    kind: NodeKind::Call(func, args),
                    offset: tok.offset,
                })
            }
            other => Err(self.syntax(tok.offset, format!("unexpected {other}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Plain evaluation

fn domain_err(node: &Node, t: f64) -> EvalError {
    EvalError {
        node: render(node),
        offset: node.offset,
        t,
    }
}

fn checked(node: &Node, t: f64, v: f64) -> Result<f64, EvalError> {
    if v.is_nan() {
        Err(domain_err(node, t))
    } else {
        Ok(v)
    }
}

fn eval_node(node: &Node, t: f64) -> Result<f64, EvalError> {
    match &node.kind {
        NodeKind::Const(c) => Ok(*c),
        NodeKind::Var => Ok(t),
        NodeKind::Neg(a) => Ok(-eval_node(a, t)?),
        NodeKind::Binary(op, a, b) => {
            let x = eval_node(a, t)?;
            let y = eval_node(b, t)?;
            let v = match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(domain_err(node, t));
                    }
                    x / y
                }
                BinOp::Pow => pow_plain(node, t, x, y)?,
            };
            checked(node, t, v)
        }
        NodeKind::Call(func, args) => {
            let x = eval_node(&args[0], t)?;
            let v = match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(domain_err(node, t));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(domain_err(node, t));
                    }
                    x.sqrt()
                }
                Func::Abs => x.abs(),
                Func::Pow => pow_plain(node, t, x, eval_node(&args[1], t)?)?,
                Func::Min => x.min(eval_node(&args[1], t)?),
                Func::Max => x.max(eval_node(&args[1], t)?),
            };
            checked(node, t, v)
        }
    }
}

fn pow_plain(node: &Node, t: f64, x: f64, y: f64) -> Result<f64, EvalError> {
    if x == 0.0 && y < 0.0 {
        return Err(domain_err(node, t));
    }
    if x < 0.0 && y.fract() != 0.0 {
        return Err(domain_err(node, t));
    }
    Ok(x.powf(y))
}

// ---------------------------------------------------------------------------
// Logarithmic evaluation

/// A real number stored as `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMagnitude {
    pub sign: i8,
    pub ln_abs: f64,
}

impl LogMagnitude {
    pub const ZERO: LogMagnitude = LogMagnitude {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogMagnitude {
                sign: if v > 0.0 { 1 } else { -1 },
                ln_abs: v.abs().ln(),
            }
        }
    }

    pub fn positive_ln(ln_abs: f64) -> Self {
        LogMagnitude { sign: 1, ln_abs }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    fn neg(self) -> Self {
        LogMagnitude {
            sign: -self.sign,
            ..self
        }
    }

    fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        if big.ln_abs.is_infinite() {
            return big;
        }
        let d = small.ln_abs - big.ln_abs;
        if big.sign == small.sign {
            LogMagnitude {
                sign: big.sign,
                ln_abs: big.ln_abs + d.exp().ln_1p(),
            }
        } else if d == 0.0 {
            Self::ZERO
        } else {
            LogMagnitude {
                sign: big.sign,
                ln_abs: big.ln_abs + (-d.exp_m1()).ln(),
            }
        }
    }

    fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        LogMagnitude {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.ln_abs.total_cmp(&other.ln_abs),
                _ => other.ln_abs.total_cmp(&self.ln_abs),
            },
            o => o,
        }
    }
}

fn eval_log_node(node: &Node, x: f64) -> Result<LogMagnitude, EvalError> {
    let t_err = || domain_err(node, x.exp());
    match &node.kind {
        NodeKind::Const(c) => Ok(LogMagnitude::from_f64(*c)),
        NodeKind::Var => Ok(LogMagnitude::positive_ln(x)),
        NodeKind::Neg(a) => Ok(eval_log_node(a, x)?.neg()),
        NodeKind::Binary(op, a, b) => {
            let p = eval_log_node(a, x)?;
            let q = eval_log_node(b, x)?;
            match op {
                BinOp::Add => Ok(p.add(q)),
                BinOp::Sub => Ok(p.add(q.neg())),
                BinOp::Mul => Ok(p.mul(q)),
                BinOp::Div => {
                    if q.sign == 0 {
                        return Err(t_err());
                    }
                    Ok(p.mul(LogMagnitude {
                        sign: q.sign,
                        ln_abs: -q.ln_abs,
                    }))
                }
                BinOp::Pow => pow_log(p, q).ok_or_else(t_err),
            }
        }
        NodeKind::Call(func, args) => {
            let p = eval_log_node(&args[0], x)?;
            match func {
                Func::Sin | Func::Cos => {
                    let v = p.to_f64();
                    if !v.is_finite() {
                        return Err(t_err());
                    }
                    let s = if *func == Func::Sin { v.sin() } else { v.cos() };
                    Ok(LogMagnitude::from_f64(s))
                }
                Func::Exp => {
                    let v = p.to_f64();
                    if v.is_nan() {
                        return Err(t_err());
                    }
                    Ok(LogMagnitude::positive_ln(v))
                }
                Func::Log => {
                    if p.sign <= 0 {
                        return Err(t_err());
                    }
                    Ok(LogMagnitude::from_f64(p.ln_abs))
                }
                Func::Sqrt => match p.sign {
                    0 => Ok(LogMagnitude::ZERO),
                    1 => Ok(LogMagnitude::positive_ln(0.5 * p.ln_abs)),
                    _ => Err(t_err()),
                },
                Func::Abs => Ok(LogMagnitude {
                    sign: p.sign.abs(),
                    ..p
                }),
                Func::Pow => {
                    let q = eval_log_node(&args[1], x)?;
                    pow_log(p, q).ok_or_else(t_err)
                }
                Func::Min | Func::Max => {
                    let q = eval_log_node(&args[1], x)?;
                    let pick_p = match p.total_cmp(&q) {
                        Ordering::Less => *func == Func::Min,
                        _ => *func == Func::Max,
                    };
                    Ok(if pick_p { p } else { q })
                }
            }
        }
    }
}

fn pow_log(base: LogMagnitude, exponent: LogMagnitude) -> Option<LogMagnitude> {
    let y = exponent.to_f64();
    if y.is_nan() {
        return None;
    }
    match base.sign {
        0 => match y.partial_cmp(&0.0)? {
            Ordering::Greater => Some(LogMagnitude::ZERO),
            Ordering::Equal => Some(LogMagnitude::from_f64(1.0)),
            Ordering::Less => None,
        },
        1 => Some(LogMagnitude::positive_ln(y * base.ln_abs)),
        _ => {
            if y.fract() != 0.0 {
                return None;
            }
            let odd = (y % 2.0).abs() == 1.0;
            Some(LogMagnitude {
                sign: if odd { -1 } else { 1 },
                ln_abs: y * base.ln_abs,
            })
        }
    }
}
