//! Expression vocabulary for lambda- and x-evaluable matrix entries.
//!
//! A small closed grammar — complex constants, `lambda`, `x`, the imaginary
//! unit `i`, named constants, arithmetic, integer powers, and the analytic
//! functions `tanh`, `sin`, `cos`, `exp` — keeps problem files serializable
//! and their coefficient families analytic in lambda when used rationally.
//! Named constants are substituted at parse time.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Tanh,
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Tanh => "tanh",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Func::Tanh => z.tanh(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Exp => z.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Lambda,
    X,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// Parse failure with a column (1-based) inside the expression text.
#[derive(Debug, Clone)]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl Expr {
    pub fn eval(&self, x: f64, lambda: Complex64) -> Complex64 {
        match self {
            Expr::Num(z) => *z,
            Expr::Lambda => lambda,
            Expr::X => Complex64::new(x, 0.0),
            Expr::Add(a, b) => a.eval(x, lambda) + b.eval(x, lambda),
            Expr::Sub(a, b) => a.eval(x, lambda) - b.eval(x, lambda),
            Expr::Mul(a, b) => a.eval(x, lambda) * b.eval(x, lambda),
            Expr::Div(a, b) => a.eval(x, lambda) / b.eval(x, lambda),
            Expr::Neg(a) => -a.eval(x, lambda),
            Expr::Pow(a, k) => {
                let base = a.eval(x, lambda);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..k.unsigned_abs() {
                    acc *= base;
                }
                if *k < 0 {
                    acc.inv()
                } else {
                    acc
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(x, lambda)),
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Lambda => false,
            Expr::X => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on_x() || b.depends_on_x()
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.depends_on_x(),
        }
    }

    /// Fully parenthesized form; parses back to the same tree.
    pub fn canonical(&self) -> String {
        match self {
            Expr::Num(z) => {
                if z.im == 0.0 {
                    format!("{:e}", z.re)
                } else {
                    format!("({:e}+{:e}*i)", z.re, z.im)
                }
            }
            Expr::Lambda => "lambda".into(),
            Expr::X => "x".into(),
            Expr::Add(a, b) => format!("({}+{})", a.canonical(), b.canonical()),
            Expr::Sub(a, b) => format!("({}-{})", a.canonical(), b.canonical()),
            Expr::Mul(a, b) => format!("({}*{})", a.canonical(), b.canonical()),
            Expr::Div(a, b) => format!("({}/{})", a.canonical(), b.canonical()),
            Expr::Neg(a) => format!("(-{})", a.canonical()),
            Expr::Pow(a, k) => format!("({}^{})", a.canonical(), k),
            Expr::Call(f, a) => format!("{}({})", f.name(), a.canonical()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    consts: &'a BTreeMap<String, Complex64>,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { column: self.pos + 1, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(b'-') {
                acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                acc = Expr::Div(Box::new(acc), Box::new(self.unary()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return self.error("expected integer exponent after '^'");
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let mut k: i32 = digits
                .parse()
                .map_err(|_| ExprError { column: start + 1, message: "exponent too large".into() })?;
            if neg {
                k = -k;
            }
            Ok(Expr::Pow(Box::new(base), k))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return self.error("expected ')'");
                }
                Ok(inner)
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => self.number(),
            Some(ch) if ch.is_ascii_alphabetic() || ch == b'_' => self.ident(),
            Some(ch) => self.error(format!("unexpected character '{}'", ch as char)),
            None => self.error("unexpected end of expression"),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let mut seen_e = false;
        while self.pos < self.src.len() {
            let ch = self.src[self.pos];
            if ch.is_ascii_digit() || ch == b'.' {
                self.pos += 1;
            } else if (ch == b'e' || ch == b'E') && !seen_e {
                seen_e = true;
                self.pos += 1;
                if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Num(Complex64::new(v, 0.0))),
            Err(_) => Err(ExprError {
                column: start + 1,
                message: format!("invalid number literal '{text}'"),
            }),
        }
    }

    fn ident(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        let func = match name.as_str() {
            "lambda" => return Ok(Expr::Lambda),
            "x" => return Ok(Expr::X),
            "i" => return Ok(Expr::Num(Complex64::new(0.0, 1.0))),
            "tanh" => Some(Func::Tanh),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        };
        if let Some(f) = func {
            if !self.eat(b'(') {
                return self.error(format!("expected '(' after function '{}'", f.name()));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return self.error("expected ')'");
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        match self.consts.get(&name) {
            Some(&v) => Ok(Expr::Num(v)),
            None => Err(ExprError {
                column: start + 1,
                message: format!("unknown identifier '{name}'"),
            }),
        }
    }
}

/// Parse an expression, substituting named constants.
pub fn parse(text: &str, consts: &BTreeMap<String, Complex64>) -> Result<Expr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, consts };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.error("trailing input after expression");
    }
    Ok(e)
}

/// FNV-1a over a byte string; stable fingerprint for run manifests.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
