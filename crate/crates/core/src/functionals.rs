//! Coefficient functionals of the linking operators.
//!
//! `F_{n,j}^ρ` are the functionals of `B_{n,ρ}` (point masses at the ends of
//! `I_c`, otherwise integrals against the densities `μ_{n,j}^ρ`), and
//! `A_{n,ρ,j}^{(k)}` those of the normalized Kantorovich modification
//! `V_{n,ρ}^{(k)} = Σ_j A_{n,ρ,j}^{(k)}(f) p_{n+kc,j}`.
//!
//! Every functional has two evaluation routes: exact moment arithmetic when
//! `f` carries polynomial coefficients, and adaptive quadrature otherwise.
//! The closed forms for barycenters, second moments and variances are kept
//! separate so that the routes can be checked against each other.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::BasisParams;
use crate::error::{Error, Result};
use crate::funcspec::FunctionSpec;
use crate::numerics::{
    composition_counts, forward_difference_of_values, integrate, integrate_singular,
    integrate_with_points, iterated_integral, log_beta, log_gamma, Interval, Tolerances,
};

/// The linking parameter `ρ`, with `ρ = ∞` as a first-class value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Rho {
    Finite(f64),
    Infinite,
}

impl Rho {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Rho::Finite(v) => Some(*v),
            Rho::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Rho::Infinite)
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rho::Finite(v) => write!(f, "{v}"),
            Rho::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Rho {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Rho::Infinite);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("rho must be a positive number or `inf`, got `{s}`")))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("rho must be positive, got {v}")));
        }
        Ok(Rho::Finite(v))
    }
}

impl From<Rho> for String {
    fn from(r: Rho) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for Rho {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// The parameter tuple `(c, n, ρ, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub c: f64,
    pub n: f64,
    pub rho: Rho,
    pub k: u32,
}

fn is_integer(v: f64) -> bool {
    (v - v.round()).abs() < 1e-12
}

impl OperatorConfig {
    pub fn new(c: f64, n: f64, rho: Rho, k: u32) -> Result<Self> {
        let cfg = Self { c, n, rho, k };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        BasisParams::new(self.c, self.n)?;
        if let Rho::Finite(r) = self.rho {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Config(format!("rho must be positive, got {r}")));
            }
            if self.k >= 1 && !is_integer(r) {
                return Err(Error::Config(format!(
                    "k >= 1 needs an integer rho (or inf), got {r}"
                )));
            }
        }
        if self.k >= 1 && self.c < 0.0 {
            if self.c != -1.0 {
                return Err(Error::Config(format!(
                    "k >= 1 with c < 0 is only available for c = -1, got c = {}",
                    self.c
                )));
            }
            if self.n - f64::from(self.k) < 1.0 {
                return Err(Error::Config(format!(
                    "c = -1 needs n - k >= 1 (n = {}, k = {})",
                    self.n, self.k
                )));
            }
        }
        self.require_barycenter()
    }

    /// `nρ > kc`, needed for the barycenters to exist.
    pub fn require_barycenter(&self) -> Result<()> {
        self.require_moment(1)
    }

    /// `nρ > (k+1)c`, needed for second moments.
    pub fn require_second_moments(&self) -> Result<()> {
        self.require_moment(2)
    }

    fn require_moment(&self, order: u32) -> Result<()> {
        if let Rho::Finite(r) = self.rho {
            let bound = f64::from(self.k + order - 1) * self.c;
            if !(self.n * r > bound) {
                return Err(Error::Config(format!(
                    "moments of order {order} need n*rho > {}*c (c={}, n={}, rho={r}, k={})",
                    self.k + order - 1,
                    self.c,
                    self.n,
                    self.k
                )));
            }
        }
        Ok(())
    }

    pub fn with_rho(self, rho: Rho) -> Result<Self> {
        Self::new(self.c, self.n, rho, self.k)
    }

    /// Basis parameters `(c, n)` of `B_{n,ρ}`.
    pub fn basis(&self) -> BasisParams {
        BasisParams::new(self.c, self.n).expect("validated config")
    }

    /// Basis parameters `(c, n + kc)` of `V_{n,ρ}^{(k)}`.
    pub fn output_basis(&self) -> BasisParams {
        BasisParams::new(self.c, self.n + f64::from(self.k) * self.c).expect("validated config")
    }

    pub fn domain(&self) -> Interval {
        self.basis().domain()
    }

    /// Largest functional index for `c < 0`.
    pub fn index_bound(&self) -> Option<usize> {
        self.output_basis().j_max()
    }

    /// Indices whose functional is a point evaluation (`k = 0`, `j = 0` or `j = −n/c`).
    pub fn is_point_mass(&self, j: usize) -> bool {
        self.k == 0 && (j == 0 || self.basis().j_max() == Some(j))
    }

    fn check_index(&self, j: usize) -> Result<()> {
        match self.index_bound() {
            Some(jm) if j > jm => Err(Error::Config(format!(
                "functional index {j} exceeds -(n+kc)/c = {jm}"
            ))),
            _ => Ok(()),
        }
    }

    fn integer_rho(&self) -> Result<u32> {
        match self.rho {
            Rho::Finite(r) if is_integer(r) => Ok(r.round() as u32),
            other => Err(Error::Config(format!("an integer rho is required here, got {other}"))),
        }
    }
}

impl fmt::Display for OperatorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c={} n={} rho={} k={}", self.c, self.n, self.rho, self.k)
    }
}

/// `ln(m^{c,l̄}/l!)` for integer `l`.
fn log_kernel_coefficient(c: f64, m: f64, l: usize) -> f64 {
    (0..l).map(|i| ((m + c * i as f64) / (i + 1) as f64).ln()).sum()
}

/// `∫_{I_c} t^r p_{m,l}(t) dt = Π_{i=1}^{r} (l+i)/(m−ic) · 1/(m−(r+1)c)`.
///
/// Valid for real `l > −1` on all three branches of `c`; divergent moments
/// (a non-positive denominator) are reported as domain errors.
pub fn kernel_moment(c: f64, m: f64, l: f64, r: usize) -> Result<f64> {
    let mut acc = 1.0;
    for i in 1..=r + 1 {
        let denom = m - i as f64 * c;
        if !(denom > 0.0) {
            return Err(Error::Domain(format!(
                "moment of order {r} of p_(m={m}, l={l}) diverges for c={c}"
            )));
        }
        if i <= r {
            acc *= (l + i as f64) / denom;
        } else {
            acc /= denom;
        }
    }
    Ok(acc)
}

/// The density `μ_{n,j}^ρ` with its normalization precomputed.
#[derive(Debug, Clone, Copy)]
struct MuDensity {
    c: f64,
    n_rho: f64,
    /// `jρ`
    shape: f64,
    /// exponent of `(1+ct)` (c ≠ 0) or rate `nρ` (c = 0)
    tail: f64,
    log_norm: f64,
    right_end: f64,
}

impl MuDensity {
    fn new(cfg: &OperatorConfig, j: usize) -> Result<Self> {
        let rho = cfg.rho.finite().ok_or_else(|| {
            Error::Config("mu density needs a finite rho".into())
        })?;
        if j == 0 {
            return Err(Error::Domain("index 0 is a point mass at 0, not a density".into()));
        }
        let bp = cfg.basis();
        if let Some(jm) = bp.j_max() {
            if j >= jm {
                return Err(Error::Domain(format!(
                    "index {j} is not below -n/c = {jm}; it is a point mass or empty"
                )));
            }
        }
        let (c, n) = (cfg.c, cfg.n);
        let shape = j as f64 * rho;
        let n_rho = n * rho;
        let (tail, log_norm) = if c < 0.0 {
            let right_shape = (bp.j_max().unwrap() - j) as f64 * rho;
            (
                right_shape - 1.0,
                shape * (-c).ln() - log_beta(shape, right_shape)?,
            )
        } else if c == 0.0 {
            (n_rho, shape * n_rho.ln() - log_gamma(shape)?)
        } else {
            (
                -(n / c + j as f64) * rho - 1.0,
                shape * c.ln() - log_beta(shape, n_rho / c + 1.0)?,
            )
        };
        Ok(Self {
            c,
            n_rho,
            shape,
            tail,
            log_norm,
            right_end: bp.right_end(),
        })
    }

    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.right_end {
            let at_left = t <= 0.0;
            // Endpoint limits of t^{a−1} (resp. (1+ct)^{b−1}).
            let exponent = if at_left { self.shape - 1.0 } else { self.tail };
            return if exponent > 0.0 {
                0.0
            } else if exponent < 0.0 {
                f64::INFINITY
            } else if at_left {
                let rest = if self.c == 0.0 { 0.0 } else { self.tail * (self.c * t).ln_1p() };
                (self.log_norm + rest).exp()
            } else {
                (self.log_norm + (self.shape - 1.0) * t.ln()).exp()
            };
        }
        let rest = if self.c == 0.0 {
            -self.tail * t
        } else {
            self.tail * (self.c * t).ln_1p()
        };
        (self.log_norm + (self.shape - 1.0) * t.ln() + rest).exp()
    }

    fn mean(&self) -> f64 {
        self.shape / self.n_rho
    }
}

/// The density `μ_{n,j}^ρ(t)` of the functional `F_{n,j}^ρ` (`k = 0`, `1 ≤ j < −n/c`).
pub fn mu_density(cfg: &OperatorConfig, j: usize, t: f64) -> Result<f64> {
    if !cfg.domain().contains(t) {
        return Err(Error::Domain(format!("t = {t} lies outside I_c")));
    }
    Ok(MuDensity::new(cfg, j)?.eval(t))
}

/// `F_{n,j}^ρ(f)`: `f(0)` at `j = 0`, `f(−1/c)` at `j = −n/c` (c < 0), and
/// `∫ μ_{n,j}^ρ f` otherwise. The order `k` of `cfg` is ignored.
pub fn f_functional(cfg: &OperatorConfig, j: usize, f: &FunctionSpec, tol: &Tolerances) -> Result<f64> {
    let bp = cfg.basis();
    if j == 0 {
        return Ok(f.eval(0.0));
    }
    match bp.j_max() {
        Some(jm) if j == jm => return Ok(f.eval(bp.right_end())),
        Some(jm) if j > jm => {
            return Err(Error::Config(format!("functional index {j} exceeds -n/c = {jm}")))
        }
        _ => {}
    }
    let mu = MuDensity::new(cfg, j)?;
    if let Some(p) = f.poly() {
        // E_μ[t^r] = Π_{i<r} (jρ+i)/(nρ−ic)
        let mut total = 0.0;
        let mut moment = 1.0;
        for (r, a) in p.coeffs().iter().enumerate() {
            if r > 0 {
                let denom = mu.n_rho - (r - 1) as f64 * cfg.c;
                if !(denom > 0.0) {
                    return Err(Error::Domain(format!(
                        "moment of order {r} of mu_(n,{j}) diverges"
                    )));
                }
                moment *= (mu.shape + (r - 1) as f64) / denom;
            }
            total += a * moment;
        }
        return Ok(total);
    }
    // Right end: exponent of (1+ct) for c < 0, algebraic decay t^{−(nρ/c+2)+m} for c > 0.
    let right = if cfg.c < 0.0 {
        Some(mu.tail + 1.0)
    } else if cfg.c > 0.0 {
        Some(mu.n_rho / cfg.c + 2.0 - f64::from(f.growth_order()))
    } else {
        None
    };
    integrate_singular(
        |t| mu.eval(t) * f.eval(t),
        bp.domain(),
        Some(mu.shape),
        right,
        &[mu.mean()],
        tol,
    )
}

/// `A_{n,ρ,j}^{(k)}(f)`.
///
/// * `k = 0`: the functional `F_{n,j}^ρ` (a point evaluation at `j/n` for `ρ = ∞`).
/// * `ρ = ∞`, `k ≥ 1`: `n^k Δ^k_{1/n}(I_k f)(j/n)`.
/// * otherwise `((nρ−(k−1)c)/ρ^k) Σ_s N_s ∫ p_{nρ−(k−2)c, jρ+s+k−1} f`, where
///   `N_s` counts the k-tuples over `{0,…,ρ−1}` summing to `s`; the integral
///   runs over `[0,1]` for `c = −1` and `[0,∞)` for `c ≥ 0`.
pub fn a_functional(cfg: &OperatorConfig, j: usize, f: &FunctionSpec, tol: &Tolerances) -> Result<f64> {
    cfg.validate()?;
    cfg.check_index(j)?;
    if cfg.rho.is_infinite() {
        if cfg.k == 0 {
            return Ok(f.eval(j as f64 / cfg.n));
        }
        let h = 1.0 / cfg.n;
        let values = (0..=cfg.k)
            .map(|m| iterated_integral(f, cfg.k, (j + m as usize) as f64 * h, tol))
            .collect::<Result<Vec<_>>>()?;
        return Ok(cfg.n.powi(cfg.k as i32) * forward_difference_of_values(&values));
    }
    if cfg.k == 0 {
        return f_functional(cfg, j, f, tol);
    }
    let kernel = KantorovichKernel::new(cfg, j)?;
    match f.poly() {
        Some(p) => kernel.polynomial(p.coeffs()),
        None => kernel.integrate(f, tol),
    }
}

/// The mixture `Σ_s N_s p_{m, l0+s}` behind `A_{n,ρ,j}^{(k)}` for `k ≥ 1`.
struct KantorovichKernel {
    c: f64,
    m: f64,
    l0: usize,
    weights: Vec<f64>,
    log_coef0: f64,
    domain: Interval,
}

impl KantorovichKernel {
    fn new(cfg: &OperatorConfig, j: usize) -> Result<Self> {
        let rho = cfg.integer_rho()?;
        let (c, k) = (cfg.c, cfg.k);
        let rho_f = f64::from(rho);
        let m = cfg.n * rho_f - f64::from(k as i32 - 2) * c;
        let prefactor = (cfg.n * rho_f - f64::from(k as i32 - 1) * c) / rho_f.powi(k as i32);
        let weights = composition_counts(k, rho)?
            .into_iter()
            .map(|count| prefactor * count as f64)
            .collect();
        let l0 = j * rho as usize + k as usize - 1;
        let domain = if c < 0.0 {
            Interval::new(0.0, 1.0)?
        } else {
            Interval::half_line(0.0)?
        };
        Ok(Self {
            c,
            m,
            l0,
            weights,
            log_coef0: log_kernel_coefficient(c, m, l0),
            domain,
        })
    }

    fn polynomial(&self, coeffs: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (s, w) in self.weights.iter().enumerate() {
            let l = (self.l0 + s) as f64;
            let mut inner = 0.0;
            for (r, a) in coeffs.iter().enumerate() {
                if *a != 0.0 {
                    inner += a * kernel_moment(self.c, self.m, l, r)?;
                }
            }
            total += w * inner;
        }
        Ok(total)
    }

    fn eval(&self, t: f64) -> f64 {
        let (c, m) = (self.c, self.m);
        let (log_p0, ratio) = if c == 0.0 {
            (self.log_coef0 + self.l0 as f64 * t.ln() - m * t, t)
        } else {
            let l1p = (c * t).ln_1p();
            (
                self.log_coef0 + self.l0 as f64 * t.ln() - (m / c + self.l0 as f64) * l1p,
                t / (1.0 + c * t),
            )
        };
        let mut p = log_p0.exp();
        let mut acc = 0.0;
        for (s, w) in self.weights.iter().enumerate() {
            if s > 0 {
                let l = (self.l0 + s - 1) as f64;
                p *= (m + c * l) / (l + 1.0) * ratio;
            }
            acc += w * p;
        }
        acc
    }

    fn integrate(&self, f: &FunctionSpec, tol: &Tolerances) -> Result<f64> {
        // Kernel mass sits around its mean; seed a breakpoint there.
        let mean_l = self.l0 as f64 + 0.5 * (self.weights.len() - 1) as f64;
        let peak = (mean_l + 1.0) / (self.m - 2.0 * self.c);
        if self.c > 0.0 {
            // p_{m,l}(t) ~ t^{−m/c}
            let decay = self.m / self.c - f64::from(f.growth_order());
            return integrate_singular(|t| self.eval(t) * f.eval(t), self.domain, None, Some(decay), &[peak], tol);
        }
        integrate_with_points(|t| self.eval(t) * f.eval(t), self.domain, &[peak], tol)
    }
}

/// `A_{n,∞,j}^{(k)}(f)` for `j = 0..count`, sharing the cell integrals of `f`
/// between neighbouring indices.
///
/// Only the cells `[i/n, (i+1)/n]` with `j ≤ i < j+k` contribute to index `j`
/// (contributions of earlier cells are annihilated by `Δ^k`), so each value is
/// assembled from the local pieces `q_{i,r} = ∫_{cell i} ((i+1)/n − t)^r/r! f(t) dt`.
pub fn inf_functionals(cfg: &OperatorConfig, f: &FunctionSpec, count: usize, tol: &Tolerances) -> Result<Vec<f64>> {
    if !cfg.rho.is_infinite() {
        return Err(Error::Config("inf_functionals needs rho = inf".into()));
    }
    if let Some(jm) = cfg.index_bound() {
        if count > jm + 1 {
            return Err(Error::Config(format!(
                "requested {count} functionals but only {} exist", jm + 1
            )));
        }
    }
    let (n, k) = (cfg.n, cfg.k as usize);
    let h = 1.0 / n;
    if k == 0 {
        return Ok((0..count).map(|j| f.eval(j as f64 * h)).collect());
    }
    let scale = n.powi(k as i32);
    if let Some(p) = f.poly() {
        let ik = p.iterated_integral(cfg.k);
        return Ok((0..count)
            .map(|j| {
                // Shift to the left node so the differenced values stay O(h^k)-sized.
                let values: Vec<f64> = (0..=k)
                    .map(|m| {
                        let x0 = j as f64 * h;
                        ik.eval(x0 + m as f64 * h) - taylor_head(&ik, x0, m as f64 * h, k)
                    })
                    .collect();
                scale * forward_difference_of_values(&values)
            })
            .collect());
    }
    let cells = count + k - 1;
    let mut q = vec![vec![0.0; k]; cells];
    for (i, row) in q.iter_mut().enumerate() {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let iv = Interval::new(a, b)?;
        for (r, slot) in row.iter_mut().enumerate() {
            let fact: f64 = (1..=r).map(|v| v as f64).product();
            *slot = integrate(|t| (b - t).powi(r as i32) / fact * f.eval(t), iv, tol)?;
        }
    }
    let fact: Vec<f64> = (0..k)
        .map(|v| (1..=v).map(|u| u as f64).product())
        .collect();
    Ok((0..count)
        .map(|j| {
            let values: Vec<f64> = (0..=k)
                .map(|m| {
                    let x = (j + m) as f64 * h;
                    (j..j + m)
                        .map(|i| {
                            let b = (i + 1) as f64 * h;
                            (0..k)
                                .map(|r| (x - b).powi((k - 1 - r) as i32) / fact[k - 1 - r] * q[i][r])
                                .sum::<f64>()
                        })
                        .sum()
                })
                .collect();
            scale * forward_difference_of_values(&values)
        })
        .collect())
}

/// Degree-`< k` Taylor polynomial of `p` at `x0`, evaluated at `x0 + d`.
/// Removing it leaves `Δ^k` unchanged and avoids cancellation.
fn taylor_head(p: &crate::funcspec::Polynomial, x0: f64, d: f64, k: usize) -> f64 {
    let mut acc = 0.0;
    let mut fact = 1.0;
    for r in 0..k {
        if r > 0 {
            fact *= r as f64;
        }
        acc += p.derivative(r as u32).eval(x0) * d.powi(r as i32) / fact;
    }
    acc
}

/// Barycenter `b_j = A_j(e_1) = ((2j+k)ρ+k)/(2(nρ−kc))`; `(2j+k)/(2n)` at `ρ = ∞`.
pub fn barycenter(cfg: &OperatorConfig, j: usize) -> Result<f64> {
    cfg.validate()?;
    cfg.check_index(j)?;
    let (c, n, k, jf) = (cfg.c, cfg.n, f64::from(cfg.k), j as f64);
    Ok(match cfg.rho {
        Rho::Infinite => (2.0 * jf + k) / (2.0 * n),
        Rho::Finite(r) => ((2.0 * jf + k) * r + k) / (2.0 * (n * r - k * c)),
    })
}

/// Closed-form `A_j(e_2)`.
pub fn second_moment_a(cfg: &OperatorConfig, j: usize) -> Result<f64> {
    cfg.validate()?;
    cfg.require_second_moments()?;
    cfg.check_index(j)?;
    let (c, n, k, jf) = (cfg.c, cfg.n, f64::from(cfg.k), j as f64);
    Ok(match cfg.rho {
        Rho::Infinite => {
            (12.0 * jf * jf + 12.0 * jf * k + 3.0 * k * k + k) / (12.0 * n * n)
        }
        Rho::Finite(r) => {
            let num = 12.0 * (jf * r + k) * (jf * r + k + 1.0)
                + 4.0 * k * ((3.0 * jf + 1.0) * r + 3.0 * k + 1.0) * (r - 1.0)
                + 3.0 * k * (k - 1.0) * (r - 1.0).powi(2);
            num / (12.0 * (n * r - k * c) * (n * r - k * c - c))
        }
    })
}

/// Closed-form `Var A_j = A_j(e_2) − b_j²`; exactly zero at point masses and
/// `k/(12n²)` at `ρ = ∞`.
pub fn variance_a(cfg: &OperatorConfig, j: usize) -> Result<f64> {
    cfg.validate()?;
    cfg.require_second_moments()?;
    cfg.check_index(j)?;
    if cfg.is_point_mass(j) {
        return Ok(0.0);
    }
    let (c, n, k, jf) = (cfg.c, cfg.n, f64::from(cfg.k), j as f64);
    Ok(match cfg.rho {
        Rho::Infinite => k / (12.0 * n * n),
        Rho::Finite(r) => {
            let num = k * n * r.powi(3)
                + 6.0 * (k * (2.0 * jf * c + n) + 2.0 * jf * (jf * c + n)) * r * r
                + 5.0 * k * n * r
                + 2.0 * k * k * c * (r * r - 1.0);
            num / (12.0 * (n * r - k * c).powi(2) * (n * r - k * c - c))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn cfg(c: f64, n: f64, rho: f64, k: u32) -> OperatorConfig {
        OperatorConfig::new(c, n, Rho::Finite(rho), k).unwrap()
    }

    fn cfg_inf(c: f64, n: f64, k: u32) -> OperatorConfig {
        OperatorConfig::new(c, n, Rho::Infinite, k).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(OperatorConfig::new(-1.0, 5.0, Rho::Finite(2.0), 1).is_ok());
        assert!(OperatorConfig::new(-0.5, 5.0, Rho::Finite(2.0), 1).is_err());
        assert!(OperatorConfig::new(-1.0, 2.0, Rho::Finite(1.0), 2).is_err());
        assert!(OperatorConfig::new(0.0, 5.0, Rho::Finite(2.5), 1).is_err());
        assert!(OperatorConfig::new(0.0, 5.0, Rho::Finite(2.5), 0).is_ok());
        assert!(OperatorConfig::new(1.0, 0.5, Rho::Finite(1.0), 0).is_err());
        // nρ > kc
        assert!(OperatorConfig::new(3.0, 4.0, Rho::Finite(1.0), 2).is_err());
        assert!(cfg(1.0, 4.0, 1.0, 3).require_second_moments().is_err());
        assert_eq!("inf".parse::<Rho>().unwrap(), Rho::Infinite);
        assert!("-1".parse::<Rho>().is_err());
        assert_eq!(Rho::Finite(2.0).to_string(), "2");
    }

    #[test]
    fn mu_density_examples() {
        let c0 = cfg(0.0, 1.0, 1.0, 0);
        assert_relative_eq!(mu_density(&c0, 1, 0.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(mu_density(&c0, 1, 0.7).unwrap(), (-0.7f64).exp(), max_relative = 1e-14);
        assert!(mu_density(&c0, 0, 0.5).is_err());
        let cm = cfg(-1.0, 3.0, 1.0, 0);
        assert!(mu_density(&cm, 3, 0.5).is_err());
        assert!(mu_density(&cm, 1, 1.5).is_err());

        let c1 = cfg(1.0, 2.0, 2.0, 0);
        let mu = MuDensity::new(&c1, 1).unwrap();
        let mass = integrate(|t| mu.eval(t), Interval::half_line(0.0).unwrap(), &tol()).unwrap();
        assert_relative_eq!(mass, 1.0, max_relative = 1e-10);

        let g = cfg(0.0, 10.0, 3.0, 0);
        let mu = MuDensity::new(&g, 2).unwrap();
        let mean = integrate(|t| t * mu.eval(t), Interval::half_line(0.0).unwrap(), &tol()).unwrap();
        assert_relative_eq!(mean, 0.2, max_relative = 1e-10);
    }

    #[test]
    fn mu_densities_are_normalized() {
        for (c, n, rho) in [(-1.0, 4.0, 0.5), (-0.5, 3.0, 1.7), (0.0, 5.0, 0.3), (1.0, 3.0, 0.6), (2.0, 5.0, 3.0)] {
            let conf = cfg(c, n, rho, 0);
            let top = conf.basis().j_max().map_or(6, |jm| jm - 1);
            for j in 1..=top {
                let one = FunctionSpec::from_fn("1", |_| 1.0, 0);
                let got = f_functional(&conf, j, &one, &tol()).unwrap();
                assert!((got - 1.0).abs() < 1e-9, "c={c} n={n} rho={rho} j={j}: {got}");
            }
        }
    }

    #[test]
    fn f_functional_examples() {
        let f = FunctionSpec::from_fn("exp(t)", |t: f64| t.exp(), 16);
        assert_eq!(f_functional(&cfg(0.0, 3.0, 1.5, 0), 0, &f, &tol()).unwrap(), 1.0);
        let e1 = FunctionSpec::monomial(1);
        assert_eq!(f_functional(&cfg(-1.0, 3.0, 1.0, 0), 3, &e1, &tol()).unwrap(), 1.0);
        let g = cfg(0.0, 10.0, 2.0, 0);
        assert_relative_eq!(f_functional(&g, 3, &e1, &tol()).unwrap(), 0.3, max_relative = 1e-14);
        assert_relative_eq!(
            f_functional(&g, 3, &e1.clone().opaque(), &tol()).unwrap(),
            0.3,
            max_relative = 1e-10
        );
    }

    #[test]
    fn f_functional_routes_agree_for_fractional_shapes() {
        // jρ < 1 exercises the singular head; (N−j)ρ < 1 the singular tail.
        for (c, n, rho) in [(0.0, 4.0, 0.4), (1.0, 4.0, 0.3), (-1.0, 3.0, 0.45)] {
            let conf = cfg(c, n, rho, 0);
            let top = conf.basis().j_max().map_or(4, |jm| jm - 1);
            for j in 1..=top {
                let p = FunctionSpec::polynomial(vec![0.3, -1.0, 2.0]);
                let exact = f_functional(&conf, j, &p, &tol()).unwrap();
                let quad = f_functional(&conf, j, &p.clone().opaque(), &tol()).unwrap();
                assert!((exact - quad).abs() < 1e-9 * exact.abs().max(1.0), "c={c} j={j}: {exact} vs {quad}");
            }
        }
    }

    #[test]
    fn kernel_moments_match_quadrature() {
        for (c, m, l) in [(0.0, 7.0, 3usize), (1.0, 9.0, 4), (-1.0, 9.0, 4), (0.5, 6.0, 0)] {
            let domain = if c < 0.0 { Interval::new(0.0, 1.0).unwrap() } else { Interval::half_line(0.0).unwrap() };
            let lc = log_kernel_coefficient(c, m, l);
            let p = |t: f64| {
                let tail = if c == 0.0 { -m * t } else { -(m / c + l as f64) * (c * t).ln_1p() };
                (lc + l as f64 * t.ln() + tail).exp()
            };
            for r in 0..3 {
                let quad = integrate(|t| t.powi(r as i32) * p(t), domain, &tol()).unwrap();
                let exact = kernel_moment(c, m, l as f64, r).unwrap();
                assert_relative_eq!(quad, exact, max_relative = 1e-9);
            }
        }
        assert!(kernel_moment(1.0, 2.0, 1.0, 2).is_err());
    }

    #[test]
    fn a_functional_examples() {
        let e0 = FunctionSpec::from_fn("1", |_| 1.0, 0);
        let e1 = FunctionSpec::from_fn("t", |t| t, 1);
        for conf in [cfg(0.0, 10.0, 2.0, 1), cfg(-1.0, 5.0, 3.0, 2), cfg(1.0, 4.0, 2.0, 1)] {
            assert_relative_eq!(a_functional(&conf, 2, &e0, &tol()).unwrap(), 1.0, max_relative = 1e-10);
        }
        assert_relative_eq!(
            a_functional(&cfg(0.0, 10.0, 2.0, 1), 3, &e1, &tol()).unwrap(),
            0.375,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            a_functional(&cfg(-1.0, 5.0, 1.0, 1), 0, &e1, &tol()).unwrap(),
            1.0 / 6.0,
            max_relative = 1e-10
        );
        assert!(a_functional(&cfg(-1.0, 5.0, 1.0, 1), 5, &e1, &tol()).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_relative_eq!(barycenter(&cfg(0.0, 10.0, 2.0, 0), 3).unwrap(), 0.3, max_relative = 1e-15);
        assert_relative_eq!(barycenter(&cfg(-1.0, 5.0, 2.0, 1), 1).unwrap(), 7.0 / 22.0, max_relative = 1e-15);
        assert_relative_eq!(barycenter(&cfg_inf(0.0, 10.0, 1), 3).unwrap(), 0.35, max_relative = 1e-15);

        let g = cfg(0.0, 10.0, 2.0, 0);
        assert_relative_eq!(second_moment_a(&g, 3).unwrap(), 3.0 * 7.0 / 200.0, max_relative = 1e-14);
        assert_eq!(second_moment_a(&g, 0).unwrap(), 0.0);

        assert_relative_eq!(variance_a(&cfg_inf(0.0, 10.0, 1), 4).unwrap(), 1.0 / 1200.0, max_relative = 1e-15);
        assert_relative_eq!(variance_a(&cfg(-1.0, 5.0, 1.0, 1), 1).unwrap(), 8.0 / 252.0, max_relative = 1e-14);
        assert_relative_eq!(variance_a(&cfg(0.0, 10.0, 2.0, 1), 3).unwrap(), 0.019375, max_relative = 1e-14);
    }

    #[test]
    fn closed_forms_match_quadrature_on_sample() {
        let e1 = FunctionSpec::from_fn("t", |t| t, 1);
        let e2 = FunctionSpec::from_fn("t^2", |t| t * t, 2);
        let conf = cfg(0.0, 10.0, 2.0, 1);
        assert_relative_eq!(
            a_functional(&conf, 3, &e2, &tol()).unwrap(),
            second_moment_a(&conf, 3).unwrap(),
            max_relative = 1e-9
        );
        let conf = cfg(-1.0, 5.0, 2.0, 1);
        assert_relative_eq!(
            a_functional(&conf, 1, &e1, &tol()).unwrap(),
            barycenter(&conf, 1).unwrap(),
            max_relative = 1e-9
        );
        // Variance via quadrature of e_1, e_2 at ρ = 1.
        let conf = cfg(-1.0, 5.0, 1.0, 1);
        let b = a_functional(&conf, 1, &e1, &tol()).unwrap();
        let m2 = a_functional(&conf, 1, &e2, &tol()).unwrap();
        assert_relative_eq!(m2 - b * b, 8.0 / 252.0, max_relative = 1e-8);
    }

    #[test]
    fn variance_reductions() {
        for c in [-1.0, 0.0, 1.0] {
            for n in [4.0, 5.0, 10.0] {
                for k in 0..=2u32 {
                    let conf = cfg(c, n, 1.0, k);
                    let top = conf.index_bound().unwrap_or(8).min(8);
                    for j in 0..=top {
                        if conf.is_point_mass(j) {
                            assert_eq!(variance_a(&conf, j).unwrap(), 0.0);
                            continue;
                        }
                        let (jf, kf) = (j as f64, f64::from(k));
                        let want = (jf + kf) * (n + jf * c) / ((n - kf * c).powi(2) * (n - kf * c - c));
                        assert_relative_eq!(variance_a(&conf, j).unwrap(), want, max_relative = 1e-12);
                    }
                }
            }
        }
        for rho in [1.0, 2.0, 3.0, 7.0] {
            for k in 0..=3u32 {
                let conf = cfg(0.0, 10.0, rho, k);
                for j in 1..6 {
                    let (jf, kf) = (j as f64, f64::from(k));
                    let want = (kf * rho * rho + 6.0 * (kf + 2.0 * jf) * rho + 5.0 * kf) / (1200.0 * rho * rho);
                    assert_relative_eq!(variance_a(&conf, j).unwrap(), want, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn variance_is_second_moment_minus_square() {
        for c in [-1.0, 0.0, 1.0] {
            for rho in [Rho::Finite(1.0), Rho::Finite(3.0), Rho::Infinite] {
                for k in 0..=2u32 {
                    let conf = OperatorConfig::new(c, 10.0, rho, k).unwrap();
                    for j in 0..=conf.index_bound().unwrap_or(8).min(8) {
                        let b = barycenter(&conf, j).unwrap();
                        let diff = second_moment_a(&conf, j).unwrap() - b * b;
                        assert!((variance_a(&conf, j).unwrap() - diff).abs() < 1e-10, "{conf} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn infinite_rho_routes_agree() {
        let funcs = [
            FunctionSpec::polynomial(vec![1.0, -2.0, 0.5, 0.25]),
            FunctionSpec::from_fn("exp(-t)", |t: f64| (-t).exp(), 0),
            FunctionSpec::from_fn("abs(t-0.33)", |t: f64| (t - 0.33).abs(), 1),
        ];
        for (c, n, k) in [(-1.0, 10.0, 1), (-1.0, 10.0, 2), (0.0, 6.0, 3), (1.0, 5.0, 2)] {
            let conf = cfg_inf(c, n, k);
            let count = conf.index_bound().map_or(12, |jm| jm + 1);
            for f in &funcs {
                let batch = inf_functionals(&conf, f, count, &tol()).unwrap();
                for (j, v) in batch.iter().enumerate() {
                    // Differencing global integrals amplifies quadrature error by ~ (2n)^k.
                    let tight = Tolerances::new(1e-14, 1e-12, 1e-9).unwrap();
                    let single = a_functional(&conf, j, f, &tight).unwrap();
                    assert!((v - single).abs() < 1e-8, "{conf} {} j={j}: {v} vs {single}", f.source());
                }
            }
        }
        // Normalization and barycenter at ρ = ∞.
        let conf = cfg_inf(0.0, 10.0, 2);
        let e0 = FunctionSpec::monomial(0);
        let e1 = FunctionSpec::monomial(1);
        for (j, v) in inf_functionals(&conf, &e0, 10, &tol()).unwrap().iter().enumerate() {
            assert!((v - 1.0).abs() < 1e-12, "j={j}");
        }
        for (j, v) in inf_functionals(&conf, &e1, 10, &tol()).unwrap().iter().enumerate() {
            assert!((v - barycenter(&conf, j).unwrap()).abs() < 1e-12, "j={j}");
        }
    }
}
