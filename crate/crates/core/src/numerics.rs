//! Shared numeric kernels.
//!
//! Everything here is pure: no caches, no global state, and every sum is
//! accumulated in ascending index order so results do not depend on the
//! caller's scheduling.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspec::FunctionSpec;

/// Deepest bisection level a quadrature panel may reach.
pub const MAX_DEPTH: u32 = 60;

/// Hard cap on live panels; hitting it is reported like a depth overrun.
const MAX_PANELS: usize = 200_000;

/// Numerical tolerances shared by quadrature, series truncation and checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative quadrature tolerance.
    pub quad_rel: f64,
    /// Series truncation threshold for neglected basis mass.
    pub series_tail: f64,
    /// Additive slack used when certifying inequalities.
    pub check_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad_rel: 1e-10,
            series_tail: 1e-12,
            check_slack: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(quad_rel: f64, series_tail: f64, check_slack: f64) -> Result<Self> {
        let tol = Self {
            quad_rel,
            series_tail,
            check_slack,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("quad_rel", self.quad_rel),
            ("series_tail", self.series_tail),
            ("check_slack", self.check_slack),
        ] {
            if !(v > 0.0 && v < 1e-2) {
                return Err(Error::Config(format!(
                    "tolerance {name} = {v} must lie in (0, 1e-2)"
                )));
            }
        }
        Ok(())
    }
}

/// A closed interval `[lower, upper]`, or `[lower, ∞)` when `upper` is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lower: f64,
    upper: Option<f64>,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower >= 0.0 && lower.is_finite()) {
            return Err(Error::Domain(format!("interval lower bound {lower} < 0")));
        }
        if upper == f64::INFINITY {
            return Ok(Self { lower, upper: None });
        }
        if !(upper > lower) {
            return Err(Error::Domain(format!(
                "interval upper bound {upper} must exceed lower bound {lower}"
            )));
        }
        Ok(Self {
            lower,
            upper: Some(upper),
        })
    }

    pub fn half_line(lower: f64) -> Result<Self> {
        Self::new(lower, f64::INFINITY)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Upper end, `f64::INFINITY` for a half line.
    pub fn upper(&self) -> f64 {
        self.upper.unwrap_or(f64::INFINITY)
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.is_some()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && self.upper.is_none_or(|u| x <= u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Rising,
    Falling,
}

/// `∏_{l<j} (a + cl)` (rising) or `∏_{l<j} (a − cl)` (falling); 1 when `j = 0`.
pub fn factorial_product(a: f64, c: f64, j: u32, direction: Direction) -> f64 {
    let step = match direction {
        Direction::Rising => c,
        Direction::Falling => -c,
    };
    (0..j).fold(1.0, |acc, l| acc * (a + step * f64::from(l)))
}

pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma needs x > 0, got {x}")));
    }
    Ok(libm::lgamma(x))
}

pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    Ok(log_gamma(x)? + log_gamma(y)? - log_gamma(x + y)?)
}

/// `ln C(n, j)` for real `n ≥ j ≥ 0`.
pub(crate) fn log_binomial(n: f64, j: f64) -> f64 {
    libm::lgamma(n + 1.0) - libm::lgamma(j + 1.0) - libm::lgamma(n - j + 1.0)
}

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
// 7-point Gauss rule on the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.abs() * WGK[7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron += WGK[i] * (f1 + f2);
        abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let value = kron * half;
    if !value.is_finite() {
        return Err(Error::Domain(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    Ok(Panel {
        a,
        b,
        value,
        error: ((kron - gauss) * half).abs(),
        abs: abs * half.abs(),
        depth,
    })
}

/// Global adaptive Gauss–Kronrod quadrature over the panels delimited by
/// `breaks`, always bisecting the panel with the largest error estimate.
fn adaptive<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], quad_rel: f64) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(f, w[0], w[1], 0)?);
        }
    }
    let totals = |heap: &BinaryHeap<Panel>, done: &[Panel]| {
        heap.iter()
            .chain(done.iter())
            .fold((0.0, 0.0, 0.0), |(v, e, a), p| (v + p.value, e + p.error, a + p.abs))
    };
    let (mut value, mut error, mut abs) = totals(&heap, &done);
    let mut splits = 0usize;
    loop {
        let target = (quad_rel * value.abs()).max(50.0 * f64::EPSILON * abs);
        if error <= target || heap.is_empty() {
            let mut all: Vec<Panel> = heap.into_iter().chain(done).collect();
            all.sort_by(|p, q| p.a.total_cmp(&q.a));
            return Ok(all.iter().map(|p| p.value).sum());
        }
        let worst = heap.pop().expect("heap is non-empty");
        if worst.error <= 50.0 * f64::EPSILON * worst.abs {
            // Already at roundoff level; further bisection cannot help.
            done.push(worst);
            continue;
        }
        if worst.depth >= MAX_DEPTH || heap.len() + done.len() >= MAX_PANELS {
            return Err(Error::NonConvergence {
                depth: worst.depth,
                error,
                target,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod(f, worst.a, mid, worst.depth + 1)?;
        let right = kronrod(f, mid, worst.b, worst.depth + 1)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs += left.abs + right.abs - worst.abs;
        heap.push(left);
        heap.push(right);
        splits += 1;
        if splits.is_multiple_of(256) {
            (value, error, abs) = totals(&heap, &done);
        }
    }
}

/// Evenly spaced breakpoints on `[a, b]`, merged with `extra` points inside.
fn breakpoints(a: f64, b: f64, pieces: usize, extra: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=pieces)
        .map(|i| a + (b - a) * i as f64 / pieces as f64)
        .collect();
    pts.extend(extra.iter().copied().filter(|&p| p > a && p < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Adaptive integral of `f` over `iv`.
///
/// Half lines `[a, ∞)` are mapped onto `[0, 1)` by `t = a + u/(1−u)` before
/// subdivision. Panels are bisected (largest error first) until the summed
/// Gauss–Kronrod error estimate drops below `quad_rel` relative; a panel that
/// would exceed [`MAX_DEPTH`] is reported as [`Error::NonConvergence`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, iv: Interval, tol: &Tolerances) -> Result<f64> {
    integrate_with_points(f, iv, &[], tol)
}

/// Like [`integrate`], with extra initial breakpoints in `t` (e.g. the peak of
/// a sharply concentrated density).
pub fn integrate_with_points<F: Fn(f64) -> f64>(
    f: F,
    iv: Interval,
    points: &[f64],
    tol: &Tolerances,
) -> Result<f64> {
    let a = iv.lower();
    match iv.upper {
        Some(b) => adaptive(&f, &breakpoints(a, b, 8, points), tol.quad_rel),
        None => {
            let g = |u: f64| {
                let w = 1.0 - u;
                let t = a + u / w;
                if !t.is_finite() {
                    return 0.0;
                }
                f(t) / (w * w)
            };
            let mapped: Vec<f64> = points
                .iter()
                .filter(|&&p| p > a)
                .map(|&p| (p - a) / (1.0 + p - a))
                .collect();
            adaptive(&g, &breakpoints(0.0, 1.0, 8, &mapped), tol.quad_rel)
        }
    }
}

/// Integral of `f` over `iv` where `f` carries algebraic endpoint singularities:
/// `left = Some(a)` declares `f(t) ~ (t − lower)^{a−1}` and `right = Some(b)`
/// declares `f(t) ~ (upper − t)^{b−1}`. On a half-line, `right = Some(p)`
/// instead declares the algebraic decay `f(t) ~ t^{−p}` with `p > 1`.
///
/// Near a singular end with exponent below one the variable is changed by
/// `t − lower = s·u^{1/a}`, which turns the algebraic head into a smooth
/// integrand on `u ∈ [0, 1]`. Slow tails (`p < 8`) beyond `T` use
/// `t = T·u^{−1/(p−1)}` for the same reason.
pub fn integrate_singular<F: Fn(f64) -> f64>(
    f: F,
    iv: Interval,
    left: Option<f64>,
    right: Option<f64>,
    points: &[f64],
    tol: &Tolerances,
) -> Result<f64> {
    let left = left.filter(|&a| a < 1.0);
    let tail = if iv.is_bounded() { None } else { right.filter(|&p| p < 8.0) };
    let right = right.filter(|&b| b < 1.0 && iv.is_bounded());
    if let Some(p) = tail {
        if !(p > 1.0) {
            return Err(Error::Domain(format!("tail decay t^-{p} is not integrable")));
        }
    }
    if left.is_none() && right.is_none() && tail.is_none() {
        return integrate_with_points(f, iv, points, tol);
    }
    for e in left.iter().chain(right.iter()) {
        if !(*e > 0.0) {
            return Err(Error::Domain(format!(
                "endpoint exponent {e} gives a non-integrable singularity"
            )));
        }
    }
    let lo = iv.lower();
    let hi = iv.upper();
    let (head_end, tail_start) = if iv.is_bounded() {
        let mid = 0.5 * (lo + hi);
        (
            if left.is_some() { mid } else { lo },
            if right.is_some() { mid } else { hi },
        )
    } else {
        let reach = points.iter().fold(1.0f64, |r, &p| r.max(4.0 * (p - lo)));
        let head_end = if left.is_some() { lo + 1.0f64.min(reach) } else { lo };
        let tail_start = if tail.is_some() { lo + reach } else { f64::INFINITY };
        (head_end, tail_start)
    };

    let mut total = 0.0;
    if let Some(a) = left {
        let s = head_end - lo;
        let g = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let t = lo + s * u.powf(1.0 / a);
            f(t) * (s / a) * u.powf(1.0 / a - 1.0)
        };
        total += adaptive(&g, &breakpoints(0.0, 1.0, 4, &[]), tol.quad_rel)?;
    }
    if head_end < tail_start {
        let inner: Vec<f64> = points
            .iter()
            .copied()
            .filter(|&p| p > head_end && p < tail_start)
            .collect();
        let mid_iv = if tail_start.is_finite() {
            Interval::new(head_end, tail_start)?
        } else {
            Interval::half_line(head_end)?
        };
        total += integrate_with_points(&f, mid_iv, &inner, tol)?;
    }
    if let Some(p) = tail {
        let start = tail_start;
        let q = 1.0 / (p - 1.0);
        let g = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let t = start * u.powf(-q);
            f(t) * start * q * u.powf(-q - 1.0)
        };
        total += adaptive(&g, &breakpoints(0.0, 1.0, 4, &[]), tol.quad_rel)?;
    }
    if let Some(b) = right {
        let s = hi - tail_start;
        let g = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let t = hi - s * u.powf(1.0 / b);
            f(t) * (s / b) * u.powf(1.0 / b - 1.0)
        };
        total += adaptive(&g, &breakpoints(0.0, 1.0, 4, &[]), tol.quad_rel)?;
    }
    Ok(total)
}

/// Number of `k`-tuples over `{0, …, ρ−1}` with each possible coordinate sum
/// `s = 0..=k(ρ−1)`, built by repeated convolution with a width-`ρ` box.
pub fn composition_counts(k: u32, rho: u32) -> Result<Vec<u64>> {
    if rho == 0 {
        return Err(Error::Config("composition counts need rho >= 1".into()));
    }
    let width = rho as usize;
    let mut counts = vec![1u64];
    for _ in 0..k {
        let len = counts.len() + width - 1;
        let mut next = vec![0u64; len];
        // Sliding-window sum of the previous row.
        let mut window = 0u64;
        for (s, slot) in next.iter_mut().enumerate() {
            if s < counts.len() {
                window += counts[s];
            }
            if s >= width {
                window -= counts[s - width];
            }
            *slot = window;
        }
        counts = next;
    }
    Ok(counts)
}

pub(crate) fn binomial(k: u32, m: u32) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * f64::from(k - i) / f64::from(i + 1))
}

/// `Δ_h^k g(x) = Σ_{m=0}^{k} (−1)^{k−m} C(k,m) g(x + mh)`.
pub fn forward_difference<G: Fn(f64) -> f64>(g: G, h: f64, k: u32, x: f64) -> f64 {
    forward_difference_of_values(&(0..=k).map(|m| g(x + f64::from(m) * h)).collect::<Vec<_>>())
}

/// k-th forward difference of the samples `values[0..=k]`.
pub fn forward_difference_of_values(values: &[f64]) -> f64 {
    let k = (values.len() - 1) as u32;
    values
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let sign = if (k - m as u32).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(k, m as u32) * v
        })
        .sum()
}

/// Divided difference `[x_0, …, x_k; g]` from the Newton table.
pub fn divided_difference(nodes: &[f64], values: &[f64]) -> Result<f64> {
    if nodes.len() != values.len() || nodes.is_empty() {
        return Err(Error::Domain(
            "divided difference needs matching non-empty nodes and values".into(),
        ));
    }
    let mut table = values.to_vec();
    for level in 1..nodes.len() {
        for i in 0..nodes.len() - level {
            let span = nodes[i + level] - nodes[i];
            if span == 0.0 {
                return Err(Error::Domain("repeated divided-difference node".into()));
            }
            table[i] = (table[i + 1] - table[i]) / span;
        }
    }
    Ok(table[0])
}

/// `(I_k f)(x) = ∫_0^x (x−t)^{k−1}/(k−1)! f(t) dt`, with `I_0 f = f`.
pub fn iterated_integral(f: &FunctionSpec, k: u32, x: f64, tol: &Tolerances) -> Result<f64> {
    if k == 0 {
        return Ok(f.eval(x));
    }
    if let Some(p) = f.poly() {
        return Ok(p.iterated_integral(k).eval(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("iterated integral needs x >= 0, got {x}")));
    }
    let scale = 1.0 / (1..k).map(f64::from).product::<f64>();
    let km1 = (k - 1) as i32;
    integrate(
        |t| scale * (x - t).powi(km1) * f.eval(t),
        Interval::new(0.0, x)?,
        tol,
    )
}

/// Dense-grid lower estimate of the modulus of continuity `ω(f; δ)` on a
/// bounded interval: the largest `|f(s) − f(t)|` over pairs of the `m`
/// equally spaced points with `|s − t| ≤ δ`.
pub fn modulus_estimate(f: &FunctionSpec, delta: f64, iv: Interval, m: usize) -> Result<f64> {
    if !iv.is_bounded() {
        return Err(Error::Domain(
            "modulus estimate needs a bounded interval".into(),
        ));
    }
    if m < 1000 {
        return Err(Error::Config(format!("modulus grid needs m >= 1000, got {m}")));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("modulus step must be positive, got {delta}")));
    }
    let (a, b) = (iv.lower(), iv.upper());
    let h = (b - a) / (m - 1) as f64;
    let values: Vec<f64> = (0..m).map(|i| f.eval(a + h * i as f64)).collect();
    // Pairs (i, i + w) with w·h ≤ δ; the small relative fudge keeps exact
    // multiples of h inside the window.
    let w = ((delta / h) * (1.0 + 1e-12)).floor() as usize;
    let w = w.min(m - 1);
    // Sliding window max/min over windows of w + 1 samples.
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0f64;
    for i in 0..m {
        while maxq.back().is_some_and(|&q| values[q] <= values[i]) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&q| values[q] >= values[i]) {
            minq.pop_back();
        }
        minq.push_back(i);
        while maxq.front().is_some_and(|&q| q + w < i) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&q| q + w < i) {
            minq.pop_front();
        }
        best = best.max(values[maxq[0]] - values[minq[0]]);
    }
    Ok(best)
}

/// Upper bound on how far [`modulus_estimate`] may sit below the true modulus:
/// `2·L·h`, with `L` the declared Lipschitz constant of `f` or, failing that,
/// the steepest slope seen between neighbouring grid points.
pub fn modulus_resolution(f: &FunctionSpec, iv: Interval, m: usize) -> Result<f64> {
    if !iv.is_bounded() || m < 2 {
        return Err(Error::Domain(
            "modulus resolution needs a bounded interval and m >= 2".into(),
        ));
    }
    let (a, b) = (iv.lower(), iv.upper());
    let h = (b - a) / (m - 1) as f64;
    let lipschitz = match f.lipschitz() {
        Some(l) => l,
        None => (1..m)
            .map(|i| {
                let t = a + h * i as f64;
                ((f.eval(t) - f.eval(t - h)) / h).abs()
            })
            .fold(0.0, f64::max),
    };
    Ok(2.0 * lipschitz * h)
}
