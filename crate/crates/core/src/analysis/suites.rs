use serde::{Deserialize, Serialize};

use crate::basis::BasisParams;
use crate::error::{Error, Result};
use crate::funcspec::{catalog, FunctionSpec};
use crate::functionals::{OperatorConfig, Rho};
use crate::numerics::{Interval, Tolerances};
use crate::operators::{evaluate, OperatorKind};

use super::checks::{Harness, Theorem33Grid};
use super::report::VerificationReport;
use super::ClosedForms;

pub const SUITE_IDS: [&str; 8] = [
    "decomposition",
    "sandwich",
    "thm31",
    "thm32",
    "thm33",
    "section4",
    "covariance",
    "entropy-bound",
];

/// `count` equispaced points from `start` to `end` inclusive.
pub fn grid_points(start: f64, end: f64, count: usize) -> Result<Vec<f64>> {
    if !(start < end) || count < 2 {
        return Err(Error::Config(format!(
            "grid needs start < end and count >= 2, got {start}:{end}:{count}"
        )));
    }
    let step = (end - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { end } else { start + step * i as f64 })
        .collect())
}

/// Eleven points on `[0, 1]` for `c ≥ 0`, on `[0, −1/c]` for `c < 0`.
pub fn default_grid(domain: Interval) -> Vec<f64> {
    let right = if domain.is_bounded() { domain.upper() } else { 1.0 };
    grid_points(0.0, right, 11).expect("non-empty domain")
}

/// `{c ∈ {−1,0,1}} × {n ∈ {4,5,10,20}} × {ρ ∈ {1,2,3,∞}} × {k ∈ {0,1,2}}`,
/// keeping the valid tuples in lexicographic order.
pub fn default_configs() -> Vec<OperatorConfig> {
    let mut out = Vec::new();
    for c in [-1.0, 0.0, 1.0] {
        for n in [4.0, 5.0, 10.0, 20.0] {
            for rho in [Rho::Finite(1.0), Rho::Finite(2.0), Rho::Finite(3.0), Rho::Infinite] {
                for k in 0..=2 {
                    if let Ok(cfg) = OperatorConfig::new(c, n, rho, k) {
                        if cfg.require_second_moments().is_ok() {
                            out.push(cfg);
                        }
                    }
                }
            }
        }
    }
    out
}

fn catalog_fn(id: &str, arg: f64, iv: Interval) -> Result<FunctionSpec> {
    catalog(id, &[arg], iv)
}

fn unique_bases(configs: &[OperatorConfig]) -> Vec<BasisParams> {
    let mut out: Vec<BasisParams> = Vec::new();
    for cfg in configs {
        let bp = cfg.basis();
        if !out.iter().any(|b| b.c() == bp.c() && b.n() == bp.n()) {
            out.push(bp);
        }
    }
    out
}

type PerConfig<'a> = dyn Fn(&OperatorConfig, &[f64]) -> Result<Vec<VerificationReport>> + 'a;

/// Runs one suite (or `"all"`) over `configs`; an empty list selects
/// [`default_configs`].
///
/// `decomposition`, `sandwich`, `thm31` and `thm32` run once per config.
/// `section4` uses the `c = −1`, `k ≥ 1` configs, `covariance` and
/// `entropy-bound` the distinct `(c, n)` pairs, and `thm33` its own grid.
pub fn run_suite(id: &str, configs: &[OperatorConfig], tol: &Tolerances, closed: &ClosedForms) -> Result<VerificationReport> {
    tol.validate()?;
    let defaults;
    let configs = if configs.is_empty() {
        defaults = default_configs();
        &defaults[..]
    } else {
        configs
    };
    let h = Harness::new(*tol).with_closed_forms(*closed);
    let per_config = |name: &str, run: &PerConfig| -> Result<VerificationReport> {
        let mut reports = Vec::new();
        for cfg in configs {
            reports.extend(run(cfg, &default_grid(cfg.domain()))?);
        }
        Ok(VerificationReport::merge(name, reports))
    };
    match id {
        "decomposition" => per_config(id, &|cfg, xs| Ok(vec![h.decomposition(cfg, xs)?])),
        "sandwich" => per_config(id, &|cfg, xs| Ok(vec![h.sandwich(cfg, xs)?])),
        "thm31" => per_config(id, &|cfg, xs| {
            let iv = cfg.domain();
            let fs = [
                catalog_fn("monomial", 1.0, iv)?,
                catalog_fn("monomial", 2.0, iv)?,
                catalog_fn("exp_decay", 1.0, iv)?,
            ];
            let js: Vec<usize> = (0..=8).collect();
            fs.iter().map(|f| h.theorem31(cfg, f, xs, &js)).collect()
        }),
        "thm32" => {
            let mut seen: Vec<OperatorConfig> = Vec::new();
            for cfg in configs {
                let inf = cfg.with_rho(Rho::Infinite)?;
                if !seen.contains(&inf) {
                    seen.push(inf);
                }
            }
            let mut reports = Vec::new();
            for cfg in &seen {
                let iv = cfg.domain();
                let xs = default_grid(iv);
                for f in [
                    catalog_fn("monomial", 1.0, iv)?,
                    catalog_fn("monomial", 2.0, iv)?,
                    catalog_fn("abs_shift", 0.5, iv)?,
                ] {
                    reports.push(h.theorem32(cfg, &f, &xs)?);
                }
            }
            Ok(VerificationReport::merge(id, reports))
        }
        "thm33" => h.theorem33(&Theorem33Grid::default()),
        "section4" => {
            let mut pairs: Vec<(u32, u32)> = Vec::new();
            for cfg in configs {
                if cfg.c == -1.0 && cfg.k >= 1 {
                    let pair = (cfg.n.round() as u32, cfg.k);
                    if !pairs.contains(&pair) {
                        pairs.push(pair);
                    }
                }
            }
            let iv = Interval::new(0.0, 1.0)?;
            let xs = default_grid(iv);
            let fs = [
                catalog_fn("monomial", 1.0, iv)?,
                catalog_fn("monomial", 2.0, iv)?,
                catalog_fn("exp_decay", 1.0, iv)?,
                catalog_fn("abs_shift", 0.5, iv)?,
            ];
            let mut reports = Vec::new();
            for (n, k) in pairs {
                for f in &fs {
                    reports.push(h.section4(n, k, f, &xs)?);
                }
            }
            Ok(VerificationReport::merge(id, reports))
        }
        "covariance" => {
            let mut reports = Vec::new();
            for bp in unique_bases(configs) {
                let iv = bp.domain();
                let xs = default_grid(iv);
                let pairs = if bp.j_max().is_some() {
                    vec![
                        (catalog_fn("monomial", 1.0, iv)?, catalog_fn("monomial", 1.0, iv)?),
                        (catalog_fn("abs_shift", 0.5, iv)?, catalog_fn("abs_shift", 0.5, iv)?),
                        (catalog_fn("monomial", 1.0, iv)?, catalog_fn("abs_shift", 0.5, iv)?),
                    ]
                } else {
                    vec![
                        (catalog_fn("exp_decay", 1.0, iv)?, catalog_fn("exp_decay", 1.0, iv)?),
                        (catalog_fn("exp_decay", 1.0, iv)?, catalog_fn("sin_scale", 3.0, iv)?),
                    ]
                };
                for (f, g) in &pairs {
                    reports.push(h.covariance(&bp, f, g, &xs)?);
                }
            }
            Ok(VerificationReport::merge(id, reports))
        }
        "entropy-bound" => {
            let mut reports = Vec::new();
            for bp in unique_bases(configs) {
                reports.push(h.entropy_bound(&bp, &default_grid(bp.domain()))?);
            }
            Ok(VerificationReport::merge(id, reports))
        }
        "all" => {
            let mut reports = Vec::new();
            for sub in SUITE_IDS {
                let mut r = run_suite(sub, configs, tol, closed)?;
                for case in &mut r.cases {
                    case.label = format!("{sub}: {}", case.label);
                }
                reports.push(r);
            }
            Ok(VerificationReport::merge("all", reports))
        }
        other => Err(Error::Config(format!(
            "unknown suite `{other}` (expected one of {}, all)",
            SUITE_IDS.join(", ")
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergeRow {
    pub rho: f64,
    /// `max_x |V_{n,ρ}^{(k)} f(x) − V_{n,∞}^{(k)} f(x)|` over the grid.
    pub distance: f64,
}

/// Sup-grid distance of `V_{n,ρ}^{(k)} f` to the `ρ = ∞` operator for each `ρ`.
pub fn converge_table(cfg: &OperatorConfig, f: &FunctionSpec, rhos: &[f64], xs: &[f64], tol: &Tolerances) -> Result<Vec<ConvergeRow>> {
    let inf = cfg.with_rho(Rho::Infinite)?;
    let limit = evaluate(OperatorKind::VInf, &inf, f, xs, tol)?;
    rhos.iter()
        .map(|&rho| {
            let at = cfg.with_rho(Rho::Finite(rho))?;
            let values = evaluate(OperatorKind::VNormalized, &at, f, xs, tol)?;
            let distance = values
                .iter()
                .zip(&limit)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok(ConvergeRow { rho, distance })
        })
        .collect()
}
