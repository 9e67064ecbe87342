//! Pointwise evaluation of the operator family.
//!
//! All series operators share one code path: the basis row at each `x` is
//! truncated once (with growth order at least 2, so that `e_0`, `e_1`, `e_2`
//! and any `f` of lower growth see the same partial sums), and the coefficient
//! functionals are computed once per batch of abscissae.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::{truncated_row, BasisParams};
use crate::error::{Error, Result};
use crate::funcspec::FunctionSpec;
use crate::functionals::{
    a_functional, barycenter, f_functional, inf_functionals, OperatorConfig, Rho,
};
use crate::numerics::{integrate_singular, log_binomial, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    /// `B_{n,∞} f = Σ p_{n,j} f(j/n)`
    #[serde(rename = "baskakov_inf")]
    BaskakovInf,
    /// `B_{n,1}`, endpoint evaluations plus `(n+c)∫ p_{n+2c,j−1} f`
    #[serde(rename = "genuine_durrmeyer")]
    GenuineDurrmeyer,
    /// `B_{n,ρ} f = Σ F_{n,j}^ρ(f) p_{n,j}` (`k = 0`)
    #[serde(rename = "linking")]
    Linking,
    /// `V_{n,ρ}^{(k)} f = Σ A_{n,ρ,j}^{(k)}(f) p_{n+kc,j}`
    #[serde(rename = "V_normalized")]
    VNormalized,
    /// `D_{n,ρ}^{(k)} f = Σ f(b_j) p_{n+kc,j}`
    #[serde(rename = "D_discrete")]
    DDiscrete,
    /// `V_{n,∞}^{(k)}`; the `ρ` of the config is ignored.
    #[serde(rename = "V_inf")]
    VInf,
    /// `D_{n,∞}^{(k)}`; the `ρ` of the config is ignored.
    #[serde(rename = "D_inf")]
    DInf,
    /// Classical Bernstein polynomial of degree `n − k` (requires `c = −1`).
    #[serde(rename = "bernstein_classical")]
    BernsteinClassical,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 8] = [
        OperatorKind::BaskakovInf,
        OperatorKind::GenuineDurrmeyer,
        OperatorKind::Linking,
        OperatorKind::VNormalized,
        OperatorKind::DDiscrete,
        OperatorKind::VInf,
        OperatorKind::DInf,
        OperatorKind::BernsteinClassical,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::BaskakovInf => "baskakov_inf",
            OperatorKind::GenuineDurrmeyer => "genuine_durrmeyer",
            OperatorKind::Linking => "linking",
            OperatorKind::VNormalized => "V_normalized",
            OperatorKind::DDiscrete => "D_discrete",
            OperatorKind::VInf => "V_inf",
            OperatorKind::DInf => "D_inf",
            OperatorKind::BernsteinClassical => "bernstein_classical",
        }
    }

    /// Whether the operator reproduces `f(0)` at `x = 0` (and `f(−1/c)` at the
    /// right end for `c < 0`) under `cfg`.
    pub fn interpolates_endpoints(&self, cfg: &OperatorConfig) -> bool {
        match self {
            OperatorKind::VNormalized | OperatorKind::DDiscrete | OperatorKind::VInf | OperatorKind::DInf => {
                cfg.k == 0
            }
            _ => true,
        }
    }

    /// Checks the config fields this kind depends on.
    pub fn check(&self, cfg: &OperatorConfig) -> Result<()> {
        cfg.validate()?;
        match self {
            OperatorKind::Linking if cfg.k != 0 => Err(Error::Config(format!(
                "linking is the k = 0 operator; use V_normalized for k = {}",
                cfg.k
            ))),
            OperatorKind::BernsteinClassical if cfg.c != -1.0 => Err(Error::Config(format!(
                "bernstein_classical requires c = -1, got c = {}",
                cfg.c
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.trim() {
            "V" | "v" => OperatorKind::VNormalized,
            "D" | "d" => OperatorKind::DDiscrete,
            other => *Self::ALL
                .iter()
                .find(|k| k.name().eq_ignore_ascii_case(other))
                .ok_or_else(|| {
                    let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                    Error::Config(format!(
                        "unknown operator kind `{other}` (expected one of {}, V, D)",
                        names.join(", ")
                    ))
                })?,
        };
        Ok(kind)
    }
}

/// Truncation growth shared by every series evaluation.
fn series_growth(f: &FunctionSpec) -> u32 {
    f.growth_order().max(2)
}

/// `Σ_j coef_j p_j(x)` for every `x`, with the coefficients requested once
/// for the longest truncated row.
fn series<C>(bp: &BasisParams, f: &FunctionSpec, xs: &[f64], tol: &Tolerances, coefficients: C) -> Result<Vec<f64>>
where
    C: FnOnce(usize) -> Result<Vec<f64>>,
{
    let growth = series_growth(f);
    let rows = xs
        .iter()
        .map(|&x| truncated_row(bp, x, growth, tol))
        .collect::<Result<Vec<_>>>()?;
    let len = rows.iter().map(Vec::len).max().unwrap_or(0);
    let coefs = coefficients(len)?;
    Ok(rows
        .iter()
        .map(|row| row.iter().zip(&coefs).map(|(p, a)| p * a).sum())
        .collect())
}

fn each<G>(len: usize, g: G) -> Result<Vec<f64>>
where
    G: FnMut(usize) -> Result<f64>,
{
    (0..len).map(g).collect()
}

/// Evaluates `kind` for `f` at every abscissa of `xs`.
pub fn evaluate(kind: OperatorKind, cfg: &OperatorConfig, f: &FunctionSpec, xs: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    kind.check(cfg)?;
    tol.validate()?;
    let n = cfg.n;
    match kind {
        OperatorKind::BaskakovInf => series(&cfg.basis(), f, xs, tol, |len| {
            Ok((0..len).map(|j| f.eval(j as f64 / n)).collect())
        }),
        OperatorKind::GenuineDurrmeyer => {
            let bp = cfg.basis();
            series(&bp, f, xs, tol, |len| each(len, |j| durrmeyer_coefficient(&bp, j, f, tol)))
        }
        OperatorKind::Linking => match cfg.rho {
            Rho::Infinite => evaluate(OperatorKind::BaskakovInf, cfg, f, xs, tol),
            Rho::Finite(_) => series(&cfg.basis(), f, xs, tol, |len| {
                each(len, |j| f_functional(cfg, j, f, tol))
            }),
        },
        OperatorKind::VNormalized => match cfg.rho {
            Rho::Infinite => evaluate(OperatorKind::VInf, cfg, f, xs, tol),
            Rho::Finite(_) => series(&cfg.output_basis(), f, xs, tol, |len| {
                each(len, |j| a_functional(cfg, j, f, tol))
            }),
        },
        OperatorKind::DDiscrete => series(&cfg.output_basis(), f, xs, tol, |len| {
            each(len, |j| Ok(f.eval(barycenter(cfg, j)?)))
        }),
        OperatorKind::VInf => {
            let inf = cfg.with_rho(Rho::Infinite)?;
            series(&inf.output_basis(), f, xs, tol, |len| inf_functionals(&inf, f, len, tol))
        }
        OperatorKind::DInf => {
            let inf = cfg.with_rho(Rho::Infinite)?;
            evaluate(OperatorKind::DDiscrete, &inf, f, xs, tol)
        }
        OperatorKind::BernsteinClassical => {
            let nk = cfg.n - f64::from(cfg.k);
            if !(nk >= 1.0) {
                return Err(Error::Config(format!("bernstein_classical needs n - k >= 1, got {nk}")));
            }
            xs.iter()
                .map(|&x| bernstein_classical(nk.round() as u32, f, x))
                .collect()
        }
    }
}

/// Single-point form of [`evaluate`].
pub fn evaluate_at(kind: OperatorKind, cfg: &OperatorConfig, f: &FunctionSpec, x: f64, tol: &Tolerances) -> Result<f64> {
    Ok(evaluate(kind, cfg, f, &[x], tol)?[0])
}

/// Coefficient of `p_{n,j}` in the genuine Durrmeyer operator.
fn durrmeyer_coefficient(bp: &BasisParams, j: usize, f: &FunctionSpec, tol: &Tolerances) -> Result<f64> {
    let (c, n) = (bp.c(), bp.n());
    if j == 0 {
        return Ok(f.eval(0.0));
    }
    if bp.j_max() == Some(j) {
        return Ok(f.eval(bp.right_end()));
    }
    let m = n + 2.0 * c;
    let l = j - 1;
    if let Some(p) = f.poly() {
        let mut acc = 0.0;
        for (r, a) in p.coeffs().iter().enumerate() {
            if *a != 0.0 {
                acc += a * crate::functionals::kernel_moment(c, m, l as f64, r)?;
            }
        }
        return Ok((n + c) * acc);
    }
    let inner = BasisParams::new(c, m)?;
    let domain = bp.domain();
    // p_{m,l}(t) ~ t^{−m/c} at infinity for c > 0.
    let tail = (c > 0.0).then(|| m / c - f64::from(f.growth_order()));
    let peak = (l as f64 + 1.0) / m;
    let integral = integrate_singular(
        |t| crate::basis::basis_p(&inner, l, t).unwrap_or(0.0) * f.eval(t),
        domain,
        None,
        tail,
        &[peak],
        tol,
    )?;
    Ok((n + c) * integral)
}

/// `B_{n,∞} f(x)`.
pub fn baskakov_inf(cfg: &OperatorConfig, f: &FunctionSpec, x: f64, tol: &Tolerances) -> Result<f64> {
    evaluate_at(OperatorKind::BaskakovInf, cfg, f, x, tol)
}

/// `B_{n,1} f(x)`.
pub fn genuine_durrmeyer(cfg: &OperatorConfig, f: &FunctionSpec, x: f64, tol: &Tolerances) -> Result<f64> {
    evaluate_at(OperatorKind::GenuineDurrmeyer, cfg, f, x, tol)
}

/// `B_{n,ρ} f(x)`.
pub fn linking(cfg: &OperatorConfig, f: &FunctionSpec, x: f64, tol: &Tolerances) -> Result<f64> {
    evaluate_at(OperatorKind::Linking, cfg, f, x, tol)
}

/// `V_{n,ρ}^{(k)} f(x)`.
pub fn v_operator(cfg: &OperatorConfig, f: &FunctionSpec, x: f64, tol: &Tolerances) -> Result<f64> {
    evaluate_at(OperatorKind::VNormalized, cfg, f, x, tol)
}

/// `D_{n,ρ}^{(k)} f(x)`.
pub fn d_operator(cfg: &OperatorConfig, f: &FunctionSpec, x: f64, tol: &Tolerances) -> Result<f64> {
    evaluate_at(OperatorKind::DDiscrete, cfg, f, x, tol)
}

/// `V_{n,∞}^{(k)} f(x)`.
pub fn v_inf_operator(cfg: &OperatorConfig, f: &FunctionSpec, x: f64, tol: &Tolerances) -> Result<f64> {
    evaluate_at(OperatorKind::VInf, cfg, f, x, tol)
}

/// `D_{n,∞}^{(k)} f(x)`.
pub fn d_inf_operator(cfg: &OperatorConfig, f: &FunctionSpec, x: f64, tol: &Tolerances) -> Result<f64> {
    evaluate_at(OperatorKind::DInf, cfg, f, x, tol)
}

/// `Σ_{j=0}^{nk} f(j/nk) C(nk,j) x^j (1−x)^{nk−j}`.
pub fn bernstein_classical(nk: u32, f: &FunctionSpec, x: f64) -> Result<f64> {
    if nk == 0 {
        return Err(Error::Config("bernstein_classical needs a positive degree".into()));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} lies outside [0, 1]")));
    }
    let m = f64::from(nk);
    let mut acc = 0.0;
    for j in 0..=nk {
        let jf = f64::from(j);
        let p = if x == 0.0 {
            f64::from(u8::from(j == 0))
        } else if x == 1.0 {
            f64::from(u8::from(j == nk))
        } else {
            (log_binomial(m, jf) + jf * x.ln() + (m - jf) * (-x).ln_1p()).exp()
        };
        acc += p * f.eval(jf / m);
    }
    Ok(acc)
}

/// Closed-form images of `e_0`, `e_1`, `e_2` with numeric residuals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub cfg: OperatorConfig,
    /// `B^{(k)} e_m` as coefficients in `x` (constant first).
    pub b_images: [Vec<f64>; 3],
    /// `V^{(k)} e_m = B^{(k)} e_m / B^{(k)} e_0`.
    pub v_images: [Vec<f64>; 3],
    pub rows: Vec<MomentRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentRow {
    pub x: f64,
    pub closed: [f64; 3],
    pub numeric: [f64; 3],
    pub residual: [f64; 3],
}

impl MomentReport {
    pub fn max_residual(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.residual)
            .fold(0.0, f64::max)
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

/// Closed-form monomial images (constant term first) for `V_{n,ρ}^{(k)}`,
/// together with the `B^{(k)} e_0` scale.
pub fn v_monomial_coefficients(cfg: &OperatorConfig) -> Result<(f64, [Vec<f64>; 3])> {
    cfg.validate()?;
    cfg.require_second_moments()?;
    let (c, n, k) = (cfg.c, cfg.n, f64::from(cfg.k));
    let rising: f64 = (0..cfg.k).map(|l| n + c * f64::from(l)).product();
    let nk = n + c * k;
    let (b0, s1, s2, inv) = match cfg.rho {
        Rho::Finite(r) => {
            let falling: f64 = (0..cfg.k).map(|l| n * r - c * f64::from(l)).product();
            (
                r.powi(cfg.k as i32) / falling * rising,
                r / (n * r - k * c),
                r * r / ((n * r - k * c) * (n * r - (k + 1.0) * c)),
                1.0 / r,
            )
        }
        Rho::Infinite => (rising / n.powi(cfg.k as i32), 1.0 / n, 1.0 / (n * n), 0.0),
    };
    let e1 = vec![s1 * 0.5 * k * (1.0 + inv), s1 * nk];
    let e2 = vec![
        s2 * 0.5 * k * ((3.0 * k + 1.0) / 6.0 + (k + 1.0) * inv + (3.0 * k + 5.0) / 6.0 * inv * inv),
        s2 * nk * (k + 1.0) * (1.0 + inv),
        s2 * nk * (n + c * (k + 1.0)),
    ];
    Ok((b0, [vec![1.0], e1, e2]))
}

/// Closed-form images of the first monomials, checked against numeric
/// evaluation of `V_{n,ρ}^{(k)}` on the monomials at `xs` (five equispaced
/// points of `[0, 1]` ∩ `I_c` when `xs` is empty).
pub fn monomial_images(cfg: &OperatorConfig, xs: &[f64], tol: &Tolerances) -> Result<MomentReport> {
    let (b0, v_images) = v_monomial_coefficients(cfg)?;
    let b_images = v_images.clone().map(|v| v.iter().map(|a| a * b0).collect());
    let default: Vec<f64>;
    let xs = if xs.is_empty() {
        let right = cfg.domain().upper().min(1.0);
        default = (0..5).map(|i| right * f64::from(i) / 4.0).collect();
        &default[..]
    } else {
        xs
    };
    let mut numeric = Vec::with_capacity(3);
    for m in 0..3 {
        let f = FunctionSpec::monomial(m).opaque();
        numeric.push(evaluate(OperatorKind::VNormalized, cfg, &f, xs, tol)?);
    }
    let rows = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let closed = [0, 1, 2].map(|m| horner(&v_images[m], x));
            let numeric = [0, 1, 2].map(|m| numeric[m][i]);
            let residual = [0, 1, 2].map(|m| (closed[m] - numeric[m]).abs());
            MomentRow { x, closed, numeric, residual }
        })
        .collect();
    Ok(MomentReport {
        cfg: *cfg,
        b_images,
        v_images,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn cfg(c: f64, n: f64, rho: Rho, k: u32) -> OperatorConfig {
        OperatorConfig::new(c, n, rho, k).unwrap()
    }

    fn fin(r: f64) -> Rho {
        Rho::Finite(r)
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in OperatorKind::ALL {
            assert_eq!(kind.name().parse::<OperatorKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
        assert_eq!("V".parse::<OperatorKind>().unwrap(), OperatorKind::VNormalized);
        assert!("W".parse::<OperatorKind>().is_err());
        let bad = cfg(0.0, 4.0, fin(1.0), 0);
        assert!(OperatorKind::BernsteinClassical.check(&bad).is_err());
        assert!(OperatorKind::Linking.check(&cfg(0.0, 4.0, fin(1.0), 1)).is_err());
    }

    #[test]
    fn baskakov_examples() {
        let e0 = FunctionSpec::monomial(0);
        let e1 = FunctionSpec::monomial(1).opaque();
        let e2 = FunctionSpec::monomial(2);
        let c0 = cfg(0.0, 10.0, Rho::Infinite, 0);
        assert_relative_eq!(baskakov_inf(&c0, &e0, 0.7, &tol()).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(baskakov_inf(&c0, &e1, 0.3, &tol()).unwrap(), 0.3, max_relative = 1e-12);
        let b = cfg(-1.0, 2.0, Rho::Infinite, 0);
        assert_relative_eq!(baskakov_inf(&b, &e2, 0.5, &tol()).unwrap(), 0.375, max_relative = 1e-14);
    }

    #[test]
    fn genuine_and_linking_examples() {
        let e0 = FunctionSpec::monomial(0).opaque();
        let e1 = FunctionSpec::monomial(1).opaque();
        let g = FunctionSpec::parse("exp(-t) + t^2").unwrap();
        for c in [-1.0, 0.0, 1.0] {
            let conf = cfg(c, 5.0, fin(1.0), 0);
            for x in [0.0, 0.3, 0.8] {
                assert_relative_eq!(genuine_durrmeyer(&conf, &e0, x, &tol()).unwrap(), 1.0, max_relative = 1e-9);
                assert_relative_eq!(genuine_durrmeyer(&conf, &e1, x, &tol()).unwrap(), x, epsilon = 1e-9);
                let gd = genuine_durrmeyer(&conf, &g, x, &tol()).unwrap();
                let li = linking(&conf, &g, x, &tol()).unwrap();
                assert!((gd - li).abs() < 1e-9, "c={c} x={x}: {gd} vs {li}");
            }
            assert_eq!(genuine_durrmeyer(&conf, &g, 0.0, &tol()).unwrap(), 1.0);
        }
        let conf = cfg(1.0, 3.0, fin(2.5), 0);
        assert_relative_eq!(linking(&conf, &e1, 0.4, &tol()).unwrap(), 0.4, max_relative = 1e-9);
        assert_relative_eq!(linking(&conf, &e0, 0.4, &tol()).unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn v_and_d_examples() {
        let e0 = FunctionSpec::monomial(0);
        let e1 = FunctionSpec::monomial(1);
        let conf = cfg(0.0, 10.0, fin(2.0), 1);
        assert_relative_eq!(v_operator(&conf, &e1, 0.5, &tol()).unwrap(), 0.575, max_relative = 1e-12);
        assert_relative_eq!(
            v_operator(&conf, &e1.clone().opaque(), 0.5, &tol()).unwrap(),
            0.575,
            max_relative = 1e-9
        );
        assert_relative_eq!(d_operator(&conf, &e1, 0.5, &tol()).unwrap(), 0.575, max_relative = 1e-12);
        assert_relative_eq!(v_operator(&conf, &e0.clone().opaque(), 0.5, &tol()).unwrap(), 1.0, max_relative = 1e-10);

        let g = FunctionSpec::parse("sin(3*t)").unwrap();
        let k0 = cfg(1.0, 4.0, fin(2.0), 0);
        assert_relative_eq!(
            v_operator(&k0, &g, 0.6, &tol()).unwrap(),
            linking(&k0, &g, 0.6, &tol()).unwrap(),
            max_relative = 1e-12
        );

        let dinf = cfg(-1.0, 5.0, Rho::Infinite, 1);
        assert_relative_eq!(d_operator(&dinf, &e1, 0.5, &tol()).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(d_inf_operator(&dinf, &e0, 0.2, &tol()).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn v_inf_examples() {
        let e0 = FunctionSpec::monomial(0).opaque();
        let e1 = FunctionSpec::monomial(1).opaque();
        let g = FunctionSpec::parse("exp(-t)").unwrap();
        let k0 = cfg(0.0, 6.0, Rho::Infinite, 0);
        assert_eq!(
            v_inf_operator(&k0, &g, 0.4, &tol()).unwrap(),
            baskakov_inf(&k0, &g, 0.4, &tol()).unwrap()
        );
        let conf = cfg(-1.0, 2.0, Rho::Infinite, 1);
        for x in [0.0, 0.25, 1.0] {
            assert_relative_eq!(v_inf_operator(&conf, &e1, x, &tol()).unwrap(), 0.25 + 0.5 * x, epsilon = 1e-12);
        }
        for conf in [cfg(1.0, 4.0, Rho::Infinite, 2), cfg(-1.0, 7.0, Rho::Infinite, 3)] {
            assert_relative_eq!(v_inf_operator(&conf, &e0, 0.3, &tol()).unwrap(), 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn bernstein_examples() {
        let e1 = FunctionSpec::monomial(1);
        let e2 = FunctionSpec::monomial(2);
        assert_relative_eq!(bernstein_classical(7, &e1, 0.3).unwrap(), 0.3, max_relative = 1e-14);
        assert_relative_eq!(bernstein_classical(2, &e2, 0.5).unwrap(), 0.375, max_relative = 1e-14);
        assert_relative_eq!(bernstein_classical(5, &FunctionSpec::monomial(0), 0.9).unwrap(), 1.0, max_relative = 1e-14);
        assert!(bernstein_classical(3, &e1, 1.5).is_err());
    }

    #[test]
    fn monomial_image_examples() {
        for (c, n, rho, k) in [(0.0, 10.0, fin(2.0), 0), (-1.0, 5.0, fin(2.0), 1), (1.0, 6.0, fin(3.0), 2), (0.0, 8.0, Rho::Infinite, 2)] {
            let conf = cfg(c, n, rho, k);
            let report = monomial_images(&conf, &[], &tol()).unwrap();
            assert_eq!(report.v_images[0], vec![1.0]);
            assert!(report.max_residual() < 1e-9, "{conf}: {}", report.max_residual());
        }
        let (_, v) = v_monomial_coefficients(&cfg(1.0, 4.0, fin(1.5), 0)).unwrap();
        assert_relative_eq!(v[1][0], 0.0);
        assert_relative_eq!(v[1][1], 1.0, max_relative = 1e-15);
        let (_, v) = v_monomial_coefficients(&cfg(0.0, 10.0, fin(2.0), 0)).unwrap();
        assert_relative_eq!(v[2][1], 3.0 / 20.0, max_relative = 1e-15);
        assert_relative_eq!(v[2][2], 1.0, max_relative = 1e-15);
    }
}
