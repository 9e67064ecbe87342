//! Test functions `f` fed to the operators.
//!
//! A [`FunctionSpec`] is an evaluator plus the metadata the verification
//! theorems need: an optional exact coefficient vector (which switches every
//! functional onto exact moment arithmetic), a trusted bound on `‖f''‖_∞`, a
//! Lipschitz constant, and a polynomial growth order used by series truncation.

mod expr;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::Interval;

pub use expr::{parse_ast, Expr, Func};

/// Dense polynomial in `t`, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn monomial(m: usize) -> Self {
        let mut coeffs = vec![0.0; m + 1];
        coeffs[m] = 1.0;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, i: usize| p.coeffs.get(i).copied().unwrap_or(0.0);
        Self::new((0..len).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::new(vec![1.0]), |acc, _| acc.mul(self))
    }

    /// Exact `I_k p`: `t^m ↦ m!/(m+k)! t^{m+k}`.
    pub fn iterated_integral(&self, k: u32) -> Self {
        let k = k as usize;
        let mut out = vec![0.0; self.coeffs.len() + k];
        for (m, a) in self.coeffs.iter().enumerate() {
            let denom: f64 = ((m + 1)..=(m + k)).map(|v| v as f64).product();
            out[m + k] = a / denom;
        }
        Self::new(out)
    }

    /// k-th derivative.
    pub fn derivative(&self, k: u32) -> Self {
        let k = k as usize;
        if k > self.degree() {
            return Self::new(vec![0.0]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(k)
                .map(|(m, a)| a * ((m - k + 1)..=m).map(|v| v as f64).product::<f64>())
                .collect(),
        )
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An evaluable real function on `I_c` with approximation metadata.
#[derive(Clone)]
pub struct FunctionSpec {
    source: String,
    eval: Evaluator,
    poly: Option<Polynomial>,
    d2_sup: Option<f64>,
    lipschitz: Option<f64>,
    growth_order: u32,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("source", &self.source)
            .field("poly", &self.poly)
            .field("d2_sup", &self.d2_sup)
            .field("lipschitz", &self.lipschitz)
            .field("growth_order", &self.growth_order)
            .finish()
    }
}

impl FunctionSpec {
    /// Opaque function; no polynomial fast path.
    pub fn from_fn<F>(source: impl Into<String>, f: F, growth_order: u32) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            source: source.into(),
            eval: Arc::new(f),
            poly: None,
            d2_sup: None,
            lipschitz: None,
            growth_order,
        }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let p = Polynomial::new(coeffs);
        let source = poly_source(&p);
        Self::from_poly(source, p)
    }

    fn from_poly(source: String, p: Polynomial) -> Self {
        let q = p.clone();
        Self {
            source,
            growth_order: p.degree() as u32,
            eval: Arc::new(move |t| q.eval(t)),
            poly: Some(p),
            d2_sup: None,
            lipschitz: None,
        }
    }

    /// The monomial `e_m(t) = t^m`.
    pub fn monomial(m: usize) -> Self {
        Self::polynomial(Polynomial::monomial(m).coeffs)
    }

    /// Parses an expression in `t` (see the crate README for the grammar).
    ///
    /// Polynomial sources populate the coefficient vector; `d2_sup` is never
    /// inferred for parsed input.
    pub fn parse(src: &str) -> Result<Self> {
        let ast = Arc::new(parse_ast(src)?);
        let growth_order = ast.growth_order();
        let poly = ast.to_polynomial().map(Polynomial::new);
        let eval_ast = Arc::clone(&ast);
        Ok(Self {
            source: src.trim().to_string(),
            eval: Arc::new(move |t| eval_ast.eval(t)),
            growth_order: poly.as_ref().map_or(growth_order, |p| p.degree() as u32),
            poly,
            d2_sup: None,
            lipschitz: None,
        })
    }

    /// A catalog entry (`monomial(2)`, `exp_decay(1)`, …) or, failing that, an
    /// expression.
    pub fn from_source(src: &str, iv: Interval) -> Result<Self> {
        match src.trim().parse::<CatalogEntry>() {
            Ok(entry) => entry.build(iv),
            Err(Error::UnknownCatalog(_)) => Self::parse(src),
            Err(e) => Err(e),
        }
    }

    pub fn with_d2_sup(mut self, d2_sup: f64) -> Self {
        self.d2_sup = Some(d2_sup);
        self
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = Some(lipschitz);
        self
    }

    pub fn with_growth_order(mut self, growth_order: u32) -> Self {
        self.growth_order = growth_order;
        self
    }

    /// The same function with the polynomial fast path switched off, so
    /// every functional is evaluated by quadrature.
    pub fn opaque(mut self) -> Self {
        self.poly = None;
        self
    }

    /// `αf + βg`.
    pub fn linear_combination(alpha: f64, f: &Self, beta: f64, g: &Self) -> Self {
        let (fe, ge) = (Arc::clone(&f.eval), Arc::clone(&g.eval));
        let source = format!("{alpha}*({}) + {beta}*({})", f.source, g.source);
        match (&f.poly, &g.poly) {
            (Some(p), Some(q)) => Self::from_poly(source, p.scale(alpha).add(&q.scale(beta))),
            _ => Self::from_fn(
                source,
                move |t| alpha * fe(t) + beta * ge(t),
                f.growth_order.max(g.growth_order),
            ),
        }
    }

    /// Pointwise product `fg`.
    pub fn product(f: &Self, g: &Self) -> Self {
        let (fe, ge) = (Arc::clone(&f.eval), Arc::clone(&g.eval));
        let source = format!("({})*({})", f.source, g.source);
        match (&f.poly, &g.poly) {
            (Some(p), Some(q)) => Self::from_poly(source, p.mul(q)),
            _ => Self::from_fn(
                source,
                move |t| fe(t) * ge(t),
                f.growth_order + g.growth_order,
            ),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn poly(&self) -> Option<&Polynomial> {
        self.poly.as_ref()
    }

    pub fn d2_sup(&self) -> Option<f64> {
        self.d2_sup
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn growth_order(&self) -> u32 {
        self.growth_order
    }
}

fn poly_source(p: &Polynomial) -> String {
    let terms: Vec<String> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(m, a)| match m {
            0 => format!("{a}"),
            1 => format!("{a}*t"),
            _ => format!("{a}*t^{m}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Named test functions with exact derivative metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogEntry {
    /// `t^m`
    Monomial(u32),
    /// `e^{−at}`
    ExpDecay(f64),
    /// `|t − a|`
    AbsShift(f64),
    /// `sin(at)`
    SinScale(f64),
}

impl FromStr for CatalogEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let unknown = || Error::UnknownCatalog(s.to_string());
        let (name, rest) = s.split_once('(').ok_or_else(unknown)?;
        let arg = rest.strip_suffix(')').ok_or_else(unknown)?.trim();
        let value = || {
            arg.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad catalog parameter `{arg}` in `{s}`")))
        };
        match name.trim() {
            "monomial" => arg
                .parse::<u32>()
                .map(CatalogEntry::Monomial)
                .map_err(|_| Error::Config(format!("monomial degree must be a non-negative integer, got `{arg}`"))),
            "exp_decay" => value().map(CatalogEntry::ExpDecay),
            "abs_shift" => value().map(CatalogEntry::AbsShift),
            "sin_scale" => value().map(CatalogEntry::SinScale),
            _ => Err(unknown()),
        }
    }
}

impl CatalogEntry {
    /// Builds the function with `d2_sup` and Lipschitz constant exact on `iv`.
    pub fn build(self, iv: Interval) -> Result<FunctionSpec> {
        let upper = iv.upper();
        let bounded = iv.is_bounded();
        Ok(match self {
            CatalogEntry::Monomial(m) => {
                let mut f = FunctionSpec::monomial(m as usize);
                f.source = format!("monomial({m})");
                let m = f64::from(m);
                let d2 = match self {
                    CatalogEntry::Monomial(0 | 1) => Some(0.0),
                    CatalogEntry::Monomial(2) => Some(2.0),
                    _ if bounded => Some(m * (m - 1.0) * upper.powf(m - 2.0)),
                    _ => None,
                };
                let lip = match self {
                    CatalogEntry::Monomial(0) => Some(0.0),
                    CatalogEntry::Monomial(1) => Some(1.0),
                    _ if bounded => Some(m * upper.powf(m - 1.0)),
                    _ => None,
                };
                f.d2_sup = d2;
                f.lipschitz = lip;
                f
            }
            CatalogEntry::ExpDecay(a) => {
                // |f^{(r)}| = |a|^r e^{−at}, largest at the left end for a ≥ 0.
                let peak = if a >= 0.0 {
                    (-a * iv.lower()).exp()
                } else if bounded {
                    (-a * upper).exp()
                } else {
                    return Err(Error::Config(format!(
                        "exp_decay({a}) grows exponentially on an unbounded interval"
                    )));
                };
                FunctionSpec::from_fn(format!("exp_decay({a})"), move |t| (-a * t).exp(), 0)
                    .with_d2_sup(a * a * peak)
                    .with_lipschitz(a.abs() * peak)
            }
            CatalogEntry::AbsShift(a) => {
                FunctionSpec::from_fn(format!("abs_shift({a})"), move |t| (t - a).abs(), 1)
                    .with_lipschitz(1.0)
            }
            CatalogEntry::SinScale(a) => {
                FunctionSpec::from_fn(format!("sin_scale({a})"), move |t| (a * t).sin(), 0)
                    .with_d2_sup(a * a)
                    .with_lipschitz(a.abs())
            }
        })
    }
}

/// Catalog lookup by id and parameter list.
pub fn catalog(id: &str, params: &[f64], iv: Interval) -> Result<FunctionSpec> {
    let one = || match params {
        [p] => Ok(*p),
        _ => Err(Error::Config(format!(
            "catalog entry `{id}` takes exactly one parameter"
        ))),
    };
    let entry = match id {
        "monomial" => {
            let m = one()?;
            if m < 0.0 || m.fract() != 0.0 {
                return Err(Error::Config(format!("monomial degree {m} is not a non-negative integer")));
            }
            CatalogEntry::Monomial(m as u32)
        }
        "exp_decay" => CatalogEntry::ExpDecay(one()?),
        "abs_shift" => CatalogEntry::AbsShift(one()?),
        "sin_scale" => CatalogEntry::SinScale(one()?),
        _ => return Err(Error::UnknownCatalog(id.to_string())),
    };
    entry.build(iv)
}
