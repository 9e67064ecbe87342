//! The basis functions `p_{n,j}` on `I_c` and quantities built from them.
//!
//! For `c = 0` the basis is the Szász–Mirakjan one, for `c > 0` the Baskakov
//! one, and for `c < 0` (with `N = −n/c ∈ ℕ`) the Bernstein-type finite basis
//! `C(N,j) (−cx)^j (1+cx)^{N−j}`. All coefficients are accumulated in the log
//! domain: `n^{c,j̄}` overflows `f64` long before the series can be truncated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, Interval, Tolerances};

/// Largest index a truncated series may reach before giving up.
const MAX_TERMS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisParams {
    c: f64,
    n: f64,
}

impl BasisParams {
    pub fn new(c: f64, n: f64) -> Result<Self> {
        if !c.is_finite() || !n.is_finite() {
            return Err(Error::Config(format!("basis parameters must be finite (c={c}, n={n})")));
        }
        if c >= 0.0 {
            if !(n > 0.0 && n >= c) {
                return Err(Error::Config(format!("need n > 0 and n >= c for c >= 0 (c={c}, n={n})")));
            }
        } else {
            let ratio = -n / c;
            if !(ratio >= 1.0 - 1e-12) || (ratio.round() - ratio).abs() >= 1e-12 {
                return Err(Error::Config(format!(
                    "need -n/c to be a positive integer for c < 0 (c={c}, n={n})"
                )));
            }
        }
        Ok(Self { c, n })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// `−n/c` for `c < 0`; the basis vanishes beyond this index.
    pub fn j_max(&self) -> Option<usize> {
        (self.c < 0.0).then(|| (-self.n / self.c).round() as usize)
    }

    /// Right end of `I_c`: `−1/c` for `c < 0`, otherwise `∞`.
    pub fn right_end(&self) -> f64 {
        if self.c < 0.0 {
            -1.0 / self.c
        } else {
            f64::INFINITY
        }
    }

    pub fn domain(&self) -> Interval {
        Interval::new(0.0, self.right_end()).expect("I_c is a valid interval")
    }

    /// Validates `x ∈ I_c`, snapping values within rounding of `−1/c` onto it.
    pub fn check_point(&self, x: f64) -> Result<f64> {
        let right = self.right_end();
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("x = {x} lies outside I_c")));
        }
        if x > right {
            if x <= right * (1.0 + 1e-12) {
                return Ok(right);
            }
            return Err(Error::Domain(format!("x = {x} lies outside I_c = [0, {right}]")));
        }
        Ok(x)
    }

    /// `ln(n^{c,j̄}/j!)`, or `None` when the product vanishes (`c < 0`, `j > −n/c`).
    fn log_coefficient(&self, j: usize) -> Option<f64> {
        let mut acc = 0.0;
        for l in 0..j {
            let factor = self.n + self.c * l as f64;
            if factor <= 0.0 {
                return None;
            }
            acc += (factor / (l + 1) as f64).ln();
        }
        Some(acc)
    }

    /// `ln p_{n,0}(x)` and the per-step log ratio `ln(x/(1+cx))` (or `ln x` for c = 0).
    fn log_start(&self, x: f64) -> (f64, f64) {
        if self.c == 0.0 {
            (-self.n * x, x.ln())
        } else {
            let l1p = (self.c * x).ln_1p();
            (-(self.n / self.c) * l1p, x.ln() - l1p)
        }
    }
}

/// `p_{n,j}(x)`; zero for `c < 0` beyond `j = −n/c`.
pub fn basis_p(bp: &BasisParams, j: usize, x: f64) -> Result<f64> {
    let x = bp.check_point(x)?;
    if bp.j_max().is_some_and(|jm| j > jm) {
        return Ok(0.0);
    }
    if x == 0.0 {
        return Ok(if j == 0 { 1.0 } else { 0.0 });
    }
    if x == bp.right_end() {
        return Ok(if Some(j) == bp.j_max() { 1.0 } else { 0.0 });
    }
    let Some(coef) = bp.log_coefficient(j) else {
        return Ok(0.0);
    };
    let (start, step) = bp.log_start(x);
    Ok((coef + start + j as f64 * step).exp())
}

/// `p_{n,0}(x), …, p_{n,count−1}(x)` by a log-domain recurrence in `j`.
pub fn basis_row(bp: &BasisParams, x: f64, count: usize) -> Result<Vec<f64>> {
    let x = bp.check_point(x)?;
    let mut row = vec![0.0; count];
    if count == 0 {
        return Ok(row);
    }
    if x == 0.0 {
        row[0] = 1.0;
        return Ok(row);
    }
    if x == bp.right_end() {
        if let Some(slot) = bp.j_max().and_then(|jm| row.get_mut(jm)) {
            *slot = 1.0;
        }
        return Ok(row);
    }
    let (mut log_p, step) = bp.log_start(x);
    for (j, slot) in row.iter_mut().enumerate() {
        if j > 0 {
            let factor = bp.n + bp.c * (j - 1) as f64;
            if factor <= 0.0 {
                break;
            }
            log_p += (factor / j as f64).ln() + step;
        }
        *slot = log_p.exp();
    }
    Ok(row)
}

/// Basis values `p_{n,0..=J}(x)` up to the truncation index `J`.
///
/// For `c < 0` this is the whole finite basis. Otherwise `J` is the smallest
/// index past which the accumulated mass reaches `1 − series_tail` and the
/// growth-weighted term `p_{n,J}(x)(1 + J/n)^m` drops below `series_tail`.
pub fn truncated_row(bp: &BasisParams, x: f64, growth_order: u32, tol: &Tolerances) -> Result<Vec<f64>> {
    let x = bp.check_point(x)?;
    if let Some(jm) = bp.j_max() {
        return basis_row(bp, x, jm + 1);
    }
    if x == 0.0 {
        return Ok(vec![1.0]);
    }
    let (mut log_p, step) = bp.log_start(x);
    let mut row = Vec::new();
    let mut mass = 0.0;
    let mean = bp.n * x;
    for j in 0..MAX_TERMS {
        if j > 0 {
            log_p += ((bp.n + bp.c * (j - 1) as f64) / j as f64).ln() + step;
        }
        let p = log_p.exp();
        row.push(p);
        mass += p;
        let weight = (1.0 + j as f64 / bp.n).powi(growth_order as i32);
        if j as f64 >= mean && mass >= 1.0 - tol.series_tail && p * weight < tol.series_tail {
            return Ok(row);
        }
    }
    Err(Error::Truncation(format!(
        "series for c={}, n={} at x={x} did not reach tail {} within {MAX_TERMS} terms",
        bp.c, bp.n, tol.series_tail
    )))
}

/// Truncation index `J` (see [`truncated_row`]).
pub fn truncation_index(bp: &BasisParams, x: f64, growth_order: u32, tol: &Tolerances) -> Result<usize> {
    Ok(truncated_row(bp, x, growth_order, tol)?.len() - 1)
}

/// `S_{n,c}(x) = Σ_j p_{n,j}(x)²` by direct summation.
pub fn squared_sum_series(bp: &BasisParams, x: f64, tol: &Tolerances) -> Result<f64> {
    Ok(truncated_row(bp, x, 0, tol)?.iter().map(|p| p * p).sum())
}

/// `S_{n,c}(x)` from its integral representation.
///
/// `c ≠ 0`: `(1/π)∫_0^1 (t + (1−t)(1+2cx)²)^{−n/c} dt/√(t(1−t))`;
/// `c = 0`: `(1/π)∫_{−1}^1 e^{−2nx(1+t)} dt/√(1−t²)`. The arcsine weight is
/// removed by `t = sin²θ` (resp. `t = cos φ`), leaving smooth integrands.
pub fn squared_sum_integral(bp: &BasisParams, x: f64, tol: &Tolerances) -> Result<f64> {
    let x = bp.check_point(x)?;
    let (c, n) = (bp.c, bp.n);
    let pi = std::f64::consts::PI;
    if c == 0.0 {
        let iv = Interval::new(0.0, pi)?;
        let v = integrate(|phi: f64| (-2.0 * n * x * (1.0 + phi.cos())).exp(), iv, tol)?;
        return Ok(v / pi);
    }
    let q = (1.0 + 2.0 * c * x).powi(2);
    let iv = Interval::new(0.0, 0.5 * pi)?;
    let v = integrate(
        |theta: f64| {
            let s = theta.sin();
            let t = s * s;
            (t + (1.0 - t) * q).powf(-n / c)
        },
        iv,
        tol,
    )?;
    Ok(2.0 * v / pi)
}

/// Upper bound `(4(n+c)x(1+cx) + 1)^{−n/(2(n+c))}` on `S_{n,c}(x)`.
pub fn squared_sum_bound(bp: &BasisParams, x: f64) -> Result<f64> {
    let x = bp.check_point(x)?;
    let (c, n) = (bp.c, bp.n);
    if !(n + c > 0.0) {
        return Err(Error::Config(format!("squared-sum bound needs n + c > 0 (c={c}, n={n})")));
    }
    Ok((4.0 * (n + c) * x * (1.0 + c * x) + 1.0).powf(-n / (2.0 * (n + c))))
}

/// Order-2 Tsallis entropy `1 − S_{n,c}(x)` of the distribution `(p_{n,j}(x))_j`.
pub fn tsallis_entropy(bp: &BasisParams, x: f64, tol: &Tolerances) -> Result<f64> {
    Ok(1.0 - squared_sum_series(bp, x, tol)?)
}
