use crate::basis::{basis_p, squared_sum_bound, squared_sum_integral, squared_sum_series, truncation_index, BasisParams};
use crate::error::{Error, Result};
use crate::funcspec::FunctionSpec;
use crate::functionals::{a_functional, OperatorConfig, Rho};
use crate::numerics::{integrate, modulus_estimate, modulus_resolution, Interval, Tolerances};
use crate::operators::{bernstein_classical, evaluate, OperatorKind};

use super::report::{Case, VerificationReport};
use super::ClosedForms;

/// Points of the dense grid behind every modulus-of-continuity estimate.
const MODULUS_POINTS: usize = 20_001;

/// Runs checks with fixed tolerances and a fixed closed-form table.
#[derive(Debug, Clone, Copy)]
pub struct Harness {
    pub tol: Tolerances,
    pub closed: ClosedForms,
}

/// Images of `e_0, e_1, e_2` under `kind` at every `x`.
fn monomial_images(kind: OperatorKind, cfg: &OperatorConfig, xs: &[f64], tol: &Tolerances) -> Result<[Vec<f64>; 3]> {
    Ok([
        evaluate(kind, cfg, &FunctionSpec::monomial(0), xs, tol)?,
        evaluate(kind, cfg, &FunctionSpec::monomial(1), xs, tol)?,
        evaluate(kind, cfg, &FunctionSpec::monomial(2), xs, tol)?,
    ])
}

fn second_moments(images: &[Vec<f64>; 3], xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .enumerate()
        .map(|(i, &x)| images[2][i] - 2.0 * x * images[1][i] + x * x * images[0][i])
        .collect()
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

/// `Ve_1(x)`, the barycenter of `f ↦ V f(x)`.
fn v_barycenter(cfg: &OperatorConfig, x: f64) -> f64 {
    let (c, n, k) = (cfg.c, cfg.n, f64::from(cfg.k));
    match cfg.rho {
        Rho::Finite(r) => (2.0 * (n + k * c) * r * x + k * (r + 1.0)) / (2.0 * (n * r - k * c)),
        Rho::Infinite => ((n + k * c) * x + 0.5 * k) / n,
    }
}

/// Interval on which moduli of continuity are estimated: `I_c` when bounded,
/// otherwise `[0, max(xs) + 1]`.
fn modulus_interval(cfg: &OperatorConfig, xs: &[f64]) -> Result<Interval> {
    let domain = cfg.domain();
    if domain.is_bounded() {
        return Ok(domain);
    }
    let right = xs.iter().copied().fold(0.0, f64::max) + 1.0;
    Interval::new(0.0, right)
}

/// The classical Kantorovich operator
/// `K_m f(x) = Σ_{j=0}^{m} C(m,j) x^j (1−x)^{m−j} (m+1) ∫_{j/(m+1)}^{(j+1)/(m+1)} f`.
pub fn kantorovich_classical(m: u32, f: &FunctionSpec, x: f64, tol: &Tolerances) -> Result<f64> {
    let bp = BasisParams::new(-1.0, f64::from(m))?;
    let h = 1.0 / f64::from(m + 1);
    let mut acc = 0.0;
    for j in 0..=m as usize {
        let cell = Interval::new(j as f64 * h, (j + 1) as f64 * h)?;
        acc += basis_p(&bp, j, x)? * integrate(|t| f.eval(t), cell, tol)? / h;
    }
    Ok(acc)
}

impl Harness {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            closed: ClosedForms::default(),
        }
    }

    pub fn with_closed_forms(mut self, closed: ClosedForms) -> Self {
        self.closed = closed;
        self
    }

    fn slack(&self) -> f64 {
        self.tol.check_slack
    }

    /// `M_2V = E(V) + M_2D` and `M_2V = Var_xV + (Ve_1(x) − x)²` at every `x`.
    pub fn decomposition(&self, cfg: &OperatorConfig, xs: &[f64]) -> Result<VerificationReport> {
        let v = monomial_images(OperatorKind::VNormalized, cfg, xs, &self.tol)?;
        let d = monomial_images(OperatorKind::DDiscrete, cfg, xs, &self.tol)?;
        let (m2v, m2d) = (second_moments(&v, xs), second_moments(&d, xs));
        let mut cases = Vec::new();
        for (i, &x) in xs.iter().enumerate() {
            let e = (self.closed.e_of_l)(cfg, x)?;
            cases.push(
                Case::identity("M2(V) = E(V) + M2(D)", m2v[i], e + m2d[i], self.slack())
                    .with_cfg(cfg)
                    .at_x(x),
            );
            let var = (self.closed.var_x_v)(cfg, x)?;
            let bias = v[1][i] - x;
            cases.push(
                Case::identity("M2(V) = Var_x(V) + (Ve1(x) - x)^2", m2v[i], var + bias * bias, self.slack())
                    .with_cfg(cfg)
                    .at_x(x),
            );
        }
        Ok(VerificationReport::new("decomposition", cases))
    }

    /// `0 ≤ M_2V − Var_xV ≤ M_2D` and `E(V) ≤ Var_xV`.
    pub fn sandwich(&self, cfg: &OperatorConfig, xs: &[f64]) -> Result<VerificationReport> {
        let v = monomial_images(OperatorKind::VNormalized, cfg, xs, &self.tol)?;
        let d = monomial_images(OperatorKind::DDiscrete, cfg, xs, &self.tol)?;
        let (m2v, m2d) = (second_moments(&v, xs), second_moments(&d, xs));
        let mut cases = Vec::new();
        for (i, &x) in xs.iter().enumerate() {
            let var = v[2][i] - v[1][i] * v[1][i];
            let gap = m2v[i] - var;
            let e = (self.closed.e_of_l)(cfg, x)?;
            let s = self.slack();
            cases.push(Case::inequality("0 <= M2(V) - Var_x(V)", 0.0, gap, s).with_cfg(cfg).at_x(x));
            cases.push(Case::inequality("M2(V) - Var_x(V) <= M2(D)", gap, m2d[i], s).with_cfg(cfg).at_x(x));
            cases.push(Case::inequality("E(V) <= Var_x(V)", e, var, s).with_cfg(cfg).at_x(x));
        }
        Ok(VerificationReport::new("sandwich", cases))
    }

    /// Second-order Taylor bounds for functionals, `V − D`, and `V` against
    /// the point evaluation at its barycenter.
    pub fn theorem31(&self, cfg: &OperatorConfig, f: &FunctionSpec, xs: &[f64], js: &[usize]) -> Result<VerificationReport> {
        let d2 = f
            .d2_sup()
            .ok_or_else(|| Error::MissingMetadata(format!("d2_sup of `{}`", f.source())))?;
        let s = self.slack();
        let mut cases = Vec::new();
        for &j in js {
            if cfg.index_bound().is_some_and(|jm| j > jm) {
                continue;
            }
            let a = a_functional(cfg, j, f, &self.tol)?;
            let b = (self.closed.barycenter)(cfg, j)?;
            let var = (self.closed.variance_a)(cfg, j)?;
            cases.push(
                Case::inequality("|A_j f - f(b_j)| <= d2/2 Var A_j", (a - f.eval(b)).abs(), 0.5 * d2 * var, s)
                    .with_cfg(cfg)
                    .at_j(j),
            );
        }
        let vf = evaluate(OperatorKind::VNormalized, cfg, f, xs, &self.tol)?;
        let df = evaluate(OperatorKind::DDiscrete, cfg, f, xs, &self.tol)?;
        for (i, &x) in xs.iter().enumerate() {
            let e = (self.closed.e_of_l)(cfg, x)?;
            cases.push(
                Case::inequality("|Vf - Df| <= d2/2 E", (vf[i] - df[i]).abs(), 0.5 * d2 * e, s)
                    .with_cfg(cfg)
                    .at_x(x),
            );
            let var = (self.closed.var_x_v)(cfg, x)?;
            let point = f.eval(v_barycenter(cfg, x));
            cases.push(
                Case::inequality("|Vf - f(Ve1)| <= d2/2 Var_x(V)", (vf[i] - point).abs(), 0.5 * d2 * var, s)
                    .with_cfg(cfg)
                    .at_x(x),
            );
        }
        Ok(VerificationReport::new("thm31", cases))
    }

    /// `sup |V_∞ f − D_∞ f|` against `k/(24n²)·‖f''‖` (when known) and against
    /// the modulus `ω(f; k/(2n))`.
    pub fn theorem32(&self, cfg: &OperatorConfig, f: &FunctionSpec, xs: &[f64]) -> Result<VerificationReport> {
        let inf = cfg.with_rho(Rho::Infinite)?;
        let v = evaluate(OperatorKind::VInf, &inf, f, xs, &self.tol)?;
        let d = evaluate(OperatorKind::DInf, &inf, f, xs, &self.tol)?;
        let lhs = sup_distance(&v, &d);
        let (n, k) = (inf.n, f64::from(inf.k));
        let s = self.slack();
        let mut cases = Vec::new();
        if let Some(d2) = f.d2_sup() {
            cases.push(Case::inequality("sup|Vf - Df| <= k/(24n^2) d2", lhs, k / (24.0 * n * n) * d2, s).with_cfg(&inf));
        }
        let case = if inf.k == 0 {
            Case::inequality("sup|Vf - Df| <= w(f; k/2n)", lhs, 0.0, s)
        } else {
            let iv = modulus_interval(&inf, xs)?;
            let omega = modulus_estimate(f, k / (2.0 * n), iv, MODULUS_POINTS)?;
            let resolution = modulus_resolution(f, iv, MODULUS_POINTS)?;
            Case::estimated_inequality("sup|Vf - Df| <= w(f; k/2n)", lhs, omega, s, resolution)
        };
        cases.push(case.with_cfg(&inf));
        Ok(VerificationReport::new("thm32", cases))
    }

    /// Monotonicity of `Var A_j`, `E(V)` and `Var_x V` in `k`, `c` and `ρ`.
    pub fn theorem33(&self, grid: &Theorem33Grid) -> Result<VerificationReport> {
        type Quantity = (&'static str, Box<dyn Fn(&OperatorConfig) -> Result<f64>>);
        let cf = self.closed;
        let (j, x) = (grid.j, grid.x);
        let quantities: Vec<Quantity> = vec![
            ("Var A_j", Box::new(move |cfg| (cf.variance_a)(cfg, j))),
            ("E(V)", Box::new(move |cfg| (cf.e_of_l)(cfg, x))),
            ("Var_x(V)", Box::new(move |cfg| (cf.var_x_v)(cfg, x))),
        ];
        let make = |c: f64, rho: f64, k: u32| OperatorConfig::new(c, grid.n, Rho::Finite(rho), k).ok();
        let mut cases = Vec::new();
        for (name, q) in &quantities {
            let mut chain = |label: String, cfgs: Vec<OperatorConfig>, increasing: bool| -> Result<()> {
                let values = cfgs.iter().map(q).collect::<Result<Vec<_>>>()?;
                for w in 0..values.len().saturating_sub(1) {
                    let (a, b) = (values[w], values[w + 1]);
                    let slack = 1e-12 * a.abs().max(b.abs());
                    let case = if increasing {
                        Case::inequality(label.clone(), a, b, slack)
                    } else {
                        Case::inequality(label.clone(), b, a, slack)
                    };
                    cases.push(case.with_cfg(&cfgs[w + 1]).at_j(j).at_x(x));
                }
                Ok(())
            };
            for &c in &grid.k_chain_cs {
                for &rho in &grid.rhos {
                    let cfgs = grid.ks.iter().filter_map(|&k| make(c, rho, k)).collect();
                    chain(format!("{name} non-decreasing in k"), cfgs, true)?;
                }
            }
            for &k in &grid.ks {
                for &rho in &grid.rhos {
                    let cfgs = grid.cs.iter().filter_map(|&c| make(c, rho, k)).collect();
                    chain(format!("{name} non-decreasing in c"), cfgs, true)?;
                }
            }
            for &k in &grid.ks {
                for &c in &grid.cs {
                    let cfgs = grid.rhos.iter().filter_map(|&rho| make(c, rho, k)).collect();
                    chain(format!("{name} non-increasing in rho"), cfgs, false)?;
                }
            }
        }
        Ok(VerificationReport::new("thm33", cases))
    }

    /// `V_{n,∞}^{(k)}` against the classical Bernstein polynomial of degree
    /// `n − k` (`c = −1`), and for `k = 1` the Kantorovich identity.
    pub fn section4(&self, n: u32, k: u32, f: &FunctionSpec, xs: &[f64]) -> Result<VerificationReport> {
        if !(1 <= k && k < n) {
            return Err(Error::Config(format!("Kantorovich comparison checks need 1 <= k < n, got n={n}, k={k}")));
        }
        let cfg = OperatorConfig::new(-1.0, f64::from(n), Rho::Infinite, k)?;
        let v = evaluate(OperatorKind::VInf, &cfg, f, xs, &self.tol)?;
        let b = xs
            .iter()
            .map(|&x| bernstein_classical(n - k, f, x))
            .collect::<Result<Vec<_>>>()?;
        let iv = Interval::new(0.0, 1.0)?;
        let delta = f64::from(k) / f64::from(n);
        let omega = modulus_estimate(f, delta, iv, MODULUS_POINTS)?;
        let resolution = modulus_resolution(f, iv, MODULUS_POINTS)?;
        let mut cases = vec![Case::estimated_inequality(
            "sup|V_inf f - B_(n-k) f| <= w(f; k/n)",
            sup_distance(&v, &b),
            omega,
            self.slack(),
            resolution,
        )
        .with_cfg(&cfg)];
        if k == 1 {
            for (i, &x) in xs.iter().enumerate() {
                let kant = kantorovich_classical(n - 1, f, x, &self.tol)?;
                cases.push(Case::identity("V_inf f = K_(n-1) f", v[i], kant, self.slack()).with_cfg(&cfg).at_x(x));
            }
        }
        Ok(VerificationReport::new("section4", cases))
    }

    /// `|B(fg) − Bf·Bg| ≤ ½(1 − S_{n,c}(x)) osc_n(f) osc_n(g)` for `B = B_{n,∞}`.
    pub fn covariance(&self, bp: &BasisParams, f: &FunctionSpec, g: &FunctionSpec, xs: &[f64]) -> Result<VerificationReport> {
        if bp.j_max().is_none() && (f.growth_order() > 0 || g.growth_order() > 0) {
            return Err(Error::Domain(format!(
                "the covariance bound for c >= 0 needs bounded functions; `{}` or `{}` grows",
                f.source(),
                g.source()
            )));
        }
        let cfg = OperatorConfig::new(bp.c(), bp.n(), Rho::Infinite, 0)?;
        let top = match bp.j_max() {
            Some(jm) => jm,
            None => {
                let xmax = xs.iter().copied().fold(0.0, f64::max);
                truncation_index(bp, xmax, 0, &self.tol)?
            }
        };
        let osc = |h: &FunctionSpec| {
            let values = (0..=top).map(|j| h.eval(j as f64 / bp.n()));
            let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            hi - lo
        };
        let (osc_f, osc_g) = (osc(f), osc(g));
        let fg = FunctionSpec::product(f, g);
        let kind = OperatorKind::BaskakovInf;
        let bfg = evaluate(kind, &cfg, &fg, xs, &self.tol)?;
        let bf = evaluate(kind, &cfg, f, xs, &self.tol)?;
        let bg = evaluate(kind, &cfg, g, xs, &self.tol)?;
        let mut cases = Vec::new();
        for (i, &x) in xs.iter().enumerate() {
            let s = squared_sum_series(bp, x, &self.tol)?;
            let lhs = (bfg[i] - bf[i] * bg[i]).abs();
            let rhs = 0.5 * (1.0 - s) * osc_f * osc_g;
            cases.push(
                Case::inequality(format!("|B(fg) - Bf Bg| <= (1-S)/2 osc osc [{}, {}]", f.source(), g.source()), lhs, rhs, self.slack())
                    .with_cfg(&cfg)
                    .at_x(x),
            );
        }
        Ok(VerificationReport::new("covariance", cases))
    }

    /// `S_{n,c}` by series against its integral representation, and the upper
    /// bound `(4(n+c)x(1+cx)+1)^{−n/(2(n+c))}`.
    pub fn entropy_bound(&self, bp: &BasisParams, xs: &[f64]) -> Result<VerificationReport> {
        let cfg = OperatorConfig::new(bp.c(), bp.n(), Rho::Infinite, 0)?;
        let mut cases = Vec::new();
        for &x in xs {
            let series = squared_sum_series(bp, x, &self.tol)?;
            let integral = squared_sum_integral(bp, x, &self.tol)?;
            cases.push(Case::identity("S series = S integral", series, integral, self.slack()).with_cfg(&cfg).at_x(x));
            if bp.n() + bp.c() > 0.0 {
                let bound = squared_sum_bound(bp, x)?;
                cases.push(Case::inequality("S <= bound", series, bound, self.slack()).with_cfg(&cfg).at_x(x));
            }
        }
        Ok(VerificationReport::new("entropy-bound", cases))
    }
}

/// Sample points for the monotonicity checks.
///
/// Chains in `k` run only over `k_chain_cs`: for `c = −1` all three
/// quantities decrease in `k` on this grid (e.g. `Var_x V_{n,∞}^{(k)}(1/2) =
/// (3(n−k)+k)/(12n²)`), so the default keeps that chain to `c ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem33Grid {
    pub n: f64,
    pub j: usize,
    pub x: f64,
    pub ks: Vec<u32>,
    pub cs: Vec<f64>,
    pub k_chain_cs: Vec<f64>,
    pub rhos: Vec<f64>,
}

impl Default for Theorem33Grid {
    fn default() -> Self {
        Self {
            n: 10.0,
            j: 3,
            x: 0.5,
            ks: vec![0, 1, 2, 3],
            cs: vec![-1.0, 0.0, 0.5, 1.0],
            k_chain_cs: vec![0.0, 0.5, 1.0],
            rhos: vec![1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
        }
    }
}

pub fn check_decomposition(cfg: &OperatorConfig, xs: &[f64], tol: &Tolerances) -> Result<VerificationReport> {
    Harness::new(*tol).decomposition(cfg, xs)
}

pub fn check_sandwich(cfg: &OperatorConfig, xs: &[f64], tol: &Tolerances) -> Result<VerificationReport> {
    Harness::new(*tol).sandwich(cfg, xs)
}

pub fn check_theorem31(cfg: &OperatorConfig, f: &FunctionSpec, xs: &[f64], js: &[usize], tol: &Tolerances) -> Result<VerificationReport> {
    Harness::new(*tol).theorem31(cfg, f, xs, js)
}

pub fn check_theorem32(cfg: &OperatorConfig, f: &FunctionSpec, xs: &[f64], tol: &Tolerances) -> Result<VerificationReport> {
    Harness::new(*tol).theorem32(cfg, f, xs)
}

pub fn check_theorem33(grid: &Theorem33Grid, tol: &Tolerances) -> Result<VerificationReport> {
    Harness::new(*tol).theorem33(grid)
}

pub fn check_section4(n: u32, k: u32, f: &FunctionSpec, xs: &[f64], tol: &Tolerances) -> Result<VerificationReport> {
    Harness::new(*tol).section4(n, k, f, xs)
}

pub fn check_covariance_bound(bp: &BasisParams, f: &FunctionSpec, g: &FunctionSpec, xs: &[f64], tol: &Tolerances) -> Result<VerificationReport> {
    Harness::new(*tol).covariance(bp, f, g, xs)
}

pub fn check_entropy_bound(bp: &BasisParams, xs: &[f64], tol: &Tolerances) -> Result<VerificationReport> {
    Harness::new(*tol).entropy_bound(bp, xs)
}
