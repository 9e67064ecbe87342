//! Recursive-descent parser for expressions in the variable `t`.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;          (* right-associative *)
//! primary = number | "t" | func "(" expr ")" | "(" expr ")" ;
//! func    = "exp" | "log" | "sin" | "cos" | "abs" | "sqrt" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Abs,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Abs => x.abs(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// Stand-in growth order for exponentially growing expressions.
const EXPONENTIAL_GROWTH: u32 = 16;

impl Expr {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => t,
            Expr::Neg(a) => -a.eval(t),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, b) => {
                let base = a.eval(t);
                let e = b.eval(t);
                if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
                    base.powi(e as i32)
                } else {
                    base.powf(e)
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(t)),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Ascending coefficients when the expression is a polynomial in `t`
    /// built from `+ − *`, division by constants, and constant non-negative
    /// integer powers.
    pub fn to_polynomial(&self) -> Option<Vec<f64>> {
        use super::Polynomial as P;
        fn go(e: &Expr) -> Option<P> {
            if e.is_constant() {
                let v = e.eval(0.0);
                return v.is_finite().then(|| P::new(vec![v]));
            }
            match e {
                Expr::Var => Some(P::new(vec![0.0, 1.0])),
                Expr::Neg(a) => Some(go(a)?.scale(-1.0)),
                Expr::Add(a, b) => Some(go(a)?.add(&go(b)?)),
                Expr::Sub(a, b) => Some(go(a)?.add(&go(b)?.scale(-1.0))),
                Expr::Mul(a, b) => Some(go(a)?.mul(&go(b)?)),
                Expr::Div(a, b) if b.is_constant() => {
                    let d = b.eval(0.0);
                    (d != 0.0 && d.is_finite()).then_some(())?;
                    Some(go(a)?.scale(1.0 / d))
                }
                Expr::Pow(a, b) if b.is_constant() => {
                    let e = b.eval(0.0);
                    (e >= 0.0 && e.fract() == 0.0 && e <= 64.0).then_some(())?;
                    Some(go(a)?.pow(e as u32))
                }
                _ => None,
            }
        }
        go(self).map(|p| p.coeffs().to_vec())
    }

    /// Conservative `m` with `|f(t)| ≤ C(1+t)^m` on `[0, ∞)`; exponentially
    /// growing pieces report a large stand-in order.
    pub fn growth_order(&self) -> u32 {
        if let Some(p) = self.to_polynomial() {
            return (p.len() - 1) as u32;
        }
        match self {
            Expr::Num(_) => 0,
            Expr::Var => 1,
            Expr::Neg(a) => a.growth_order(),
            Expr::Add(a, b) | Expr::Sub(a, b) => a.growth_order().max(b.growth_order()),
            Expr::Mul(a, b) => a.growth_order() + b.growth_order(),
            Expr::Div(a, _) => a.growth_order(),
            Expr::Pow(a, b) => {
                if b.is_constant() {
                    let e = b.eval(0.0);
                    if e <= 0.0 {
                        0
                    } else {
                        (e * f64::from(a.growth_order())).ceil() as u32
                    }
                } else if a.is_constant() {
                    EXPONENTIAL_GROWTH
                } else {
                    EXPONENTIAL_GROWTH.max(a.growth_order())
                }
            }
            Expr::Call(f, a) => match f {
                Func::Sin | Func::Cos => 0,
                Func::Abs => a.growth_order(),
                Func::Sqrt => a.growth_order().div_ceil(2),
                Func::Log => u32::from(a.growth_order() > 0),
                Func::Exp => match a.to_polynomial() {
                    Some(p) if p.len() == 1 || p.last().is_some_and(|&lead| lead < 0.0) => 0,
                    _ if a.growth_order() == 0 => 0,
                    _ => EXPONENTIAL_GROWTH,
                },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        let start = i;
        match ch {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '/' => out.push((start, Tok::Slash)),
            '^' => out.push((start, Tok::Caret)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            c if c.is_ascii_digit() || c == '.' => {
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
                    } else {
                        return Err(Error::Parse {
                            pos: i,
                            msg: "malformed exponent".into(),
                        });
                    }
                }
                let text = &src[start..i];
                let v = text.parse::<f64>().map_err(|_| Error::Parse {
                    pos: start,
                    msg: format!("invalid number `{text}`"),
                })?;
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {tok:?}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                if name == "t" {
                    self.pos += 1;
                    return Ok(Expr::Var);
                }
                let Some(func) = Func::from_name(&name) else {
                    return self.err(format!("unknown identifier `{name}`"));
                };
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(tok) => self.err(format!("unexpected token {tok:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses `src` into an expression tree.
pub fn parse_ast(src: &str) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let expr = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return parser.err("trailing input");
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Evaluates while parsing, without building a tree.
    struct Reference<'a> {
        s: &'a [u8],
        i: usize,
        t: f64,
    }

    impl Reference<'_> {
        fn ws(&mut self) {
            while self.i < self.s.len() && self.s[self.i] == b' ' {
                self.i += 1;
            }
        }
        fn peek(&mut self) -> u8 {
            self.ws();
            self.s.get(self.i).copied().unwrap_or(0)
        }
        fn sum(&mut self) -> f64 {
            let mut v = self.product();
            loop {
                match self.peek() {
                    b'+' => {
                        self.i += 1;
                        v += self.product();
                    }
                    b'-' => {
                        self.i += 1;
                        v -= self.product();
                    }
                    _ => return v,
                }
            }
        }
        fn product(&mut self) -> f64 {
            let mut v = self.signed();
            loop {
                match self.peek() {
                    b'*' => {
                        self.i += 1;
                        v *= self.signed();
                    }
                    b'/' => {
                        self.i += 1;
                        v /= self.signed();
                    }
                    _ => return v,
                }
            }
        }
        fn signed(&mut self) -> f64 {
            match self.peek() {
                b'-' => {
                    self.i += 1;
                    -self.signed()
                }
                b'+' => {
                    self.i += 1;
                    self.signed()
                }
                _ => {
                    let base = self.atom();
                    if self.peek() == b'^' {
                        self.i += 1;
                        let e = self.signed();
                        base.powf(e)
                    } else {
                        base
                    }
                }
            }
        }
        fn atom(&mut self) -> f64 {
            let c = self.peek();
            if c == b'(' {
                self.i += 1;
                let v = self.sum();
                assert_eq!(self.peek(), b')');
                self.i += 1;
                return v;
            }
            if c.is_ascii_digit() || c == b'.' {
                let start = self.i;
                while self.i < self.s.len()
                    && (self.s[self.i].is_ascii_digit()
                        || self.s[self.i] == b'.'
                        || self.s[self.i].eq_ignore_ascii_case(&b'e')
                        || ((self.s[self.i] == b'-' || self.s[self.i] == b'+')
                            && self.s[self.i - 1].eq_ignore_ascii_case(&b'e')))
                {
                    self.i += 1;
                }
                return std::str::from_utf8(&self.s[start..self.i]).unwrap().parse().unwrap();
            }
            let start = self.i;
            while self.i < self.s.len() && self.s[self.i].is_ascii_alphabetic() {
                self.i += 1;
            }
            let name = std::str::from_utf8(&self.s[start..self.i]).unwrap();
            if name == "t" {
                return self.t;
            }
            assert_eq!(self.peek(), b'(');
            self.i += 1;
            let v = self.sum();
            assert_eq!(self.peek(), b')');
            self.i += 1;
            match name {
                "exp" => v.exp(),
                "log" => v.ln(),
                "sin" => v.sin(),
                "cos" => v.cos(),
                "abs" => v.abs(),
                "sqrt" => v.sqrt(),
                _ => panic!("unknown {name}"),
            }
        }
    }

    fn reference(src: &str, t: f64) -> f64 {
        let mut r = Reference { s: src.as_bytes(), i: 0, t };
        let v = r.sum();
        assert_eq!(r.peek(), 0, "reference parser left input in {src}");
        v
    }

    const CORPUS: &[&str] = &[
        "t", "1", "t^2", "t^3 - 2*t + 1", "exp(-2*t)", "exp(-t)*t", "sin(t)", "cos(3*t)",
        "abs(t - 0.5)", "sqrt(t + 1)", "log(1 + t)", "-t", "-t^2", "2^3", "t^2^2",
        "(t + 1)^3", "1/(1 + t)", "t/2/3", "2*3*t", "1 - 2 - 3", "-(t - 1)*(t + 2)",
        "exp(sin(t))", "abs(sin(5*t))", "t*exp(-t^2)", "sqrt(abs(t - 0.25))",
        "1.5e-1*t + 2.5E2", "3.25", "((t))", "cos(t)^2 + sin(t)^2", "t^0.5", "t^-1 + 1",
        "2^-2*t", "log(exp(t))", "exp(log(1 + t^2))", "(1 - t)^4 / 24", "t - t", "+t",
        "--t", "t*t*t*t", "abs(-t)", "sin(t)/(1 + t^2)", "exp(-t/3)*cos(2*t)",
        "1/sqrt(1 + t)", "5 - t^2/2 + t^4/24", "(t^2 - 1)/(t^2 + 1)", "abs(t-1) + abs(t-2)",
        "t^(1+1)", "exp(0)*t", "2*(3 + t)^2 - 4", "1e3*t^2 - 1e-3",
    ];

    #[test]
    fn corpus_matches_reference_evaluator() {
        assert_eq!(CORPUS.len(), 50);
        for src in CORPUS {
            let ast = parse_ast(src).unwrap();
            for &t in &[0.1, 0.37, 0.5, 1.0, 2.75] {
                let got = ast.eval(t);
                let want = reference(src, t);
                assert!(
                    (got - want).abs() <= 1e-13 * want.abs().max(1e-300),
                    "{src} at t={t}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(parse_ast("2^3^2").unwrap().eval(0.0), 512.0);
        assert_eq!(parse_ast("-2^2").unwrap().eval(0.0), -4.0);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let cases = [("t +", 3), ("2 * (t", 6), ("t $ 2", 2), ("foo(t)", 0), ("1e", 1), ("t t", 2), ("sin t", 4)];
        for (src, pos) in cases {
            match parse_ast(src) {
                Err(Error::Parse { pos: p, .. }) => assert_eq!(p, pos, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn growth_orders() {
        let g = |s: &str| parse_ast(s).unwrap().growth_order();
        assert_eq!(g("t^3 + 1"), 3);
        assert_eq!(g("exp(-2*t)"), 0);
        assert_eq!(g("abs(t - 0.5)"), 1);
        assert_eq!(g("sin(t)*t^2"), 2);
        assert_eq!(g("sqrt(t^3)"), 2);
        assert_eq!(g("exp(t)"), EXPONENTIAL_GROWTH);
    }
}
