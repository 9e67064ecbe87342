//! Moments, variances, `E(L)`, and the verification harness.
//!
//! Every closed form consumed by the checks is routed through
//! [`ClosedForms`], so a deliberately corrupted table can be injected to make
//! sure the suites actually detect wrong formulas.

mod checks;
mod report;
mod suites;

pub use checks::{
    check_covariance_bound, check_decomposition, check_entropy_bound, check_sandwich,
    check_section4, check_theorem31, check_theorem32, check_theorem33, kantorovich_classical,
    Harness, Theorem33Grid,
};
pub use report::{Case, Outcome, Relation, VerificationReport};
pub use suites::{
    converge_table, default_configs, default_grid, grid_points, run_suite, ConvergeRow,
    SUITE_IDS,
};

use crate::basis::truncated_row;
use crate::error::Result;
use crate::funcspec::FunctionSpec;
use crate::functionals::{barycenter, second_moment_a, variance_a, OperatorConfig, Rho};
use crate::numerics::Tolerances;
use crate::operators::{evaluate, OperatorKind};

/// The closed forms the verification suites trust.
#[derive(Clone, Copy)]
pub struct ClosedForms {
    pub barycenter: fn(&OperatorConfig, usize) -> Result<f64>,
    pub second_moment_a: fn(&OperatorConfig, usize) -> Result<f64>,
    pub variance_a: fn(&OperatorConfig, usize) -> Result<f64>,
    pub e_of_l: fn(&OperatorConfig, f64) -> Result<f64>,
    pub var_x_v: fn(&OperatorConfig, f64) -> Result<f64>,
}

impl Default for ClosedForms {
    fn default() -> Self {
        Self {
            barycenter,
            second_moment_a,
            variance_a,
            e_of_l: e_of_l_closed,
            var_x_v: var_x_v_closed,
        }
    }
}

impl ClosedForms {
    /// A table with `E(L)` and `Var_x V` off by one part in a thousand.
    pub fn corrupted() -> Self {
        Self {
            e_of_l: |cfg, x| Ok(e_of_l_closed(cfg, x)? * 1.001 + 1e-6),
            var_x_v: |cfg, x| Ok(var_x_v_closed(cfg, x)? * 1.001 + 1e-6),
            ..Self::default()
        }
    }
}

impl std::fmt::Debug for ClosedForms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ClosedForms")
    }
}

/// `M_2 L(x) = L((t − x)²)(x)`, evaluated as `L(e_2 − 2x e_1 + x² e_0)(x)`.
pub fn second_moment_m2(kind: OperatorKind, cfg: &OperatorConfig, x: f64, tol: &Tolerances) -> Result<f64> {
    let shifted = FunctionSpec::polynomial(vec![x * x, -2.0 * x, 1.0]);
    Ok(evaluate(kind, cfg, &shifted, &[x], tol)?[0])
}

/// `Var_x L` computed from the operator, and its closed form where one exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarX {
    pub numeric: f64,
    pub closed: Option<f64>,
}

/// `Var_x L = L e_2(x) − (L e_1(x))²`.
pub fn var_x_operator(kind: OperatorKind, cfg: &OperatorConfig, x: f64, tol: &Tolerances) -> Result<VarX> {
    let e1 = evaluate(kind, cfg, &FunctionSpec::monomial(1), &[x], tol)?[0];
    let e2 = evaluate(kind, cfg, &FunctionSpec::monomial(2), &[x], tol)?[0];
    let closed = match kind {
        OperatorKind::VNormalized => Some(var_x_v_closed(cfg, x)?),
        OperatorKind::VInf => Some(var_x_v_closed(&cfg.with_rho(Rho::Infinite)?, x)?),
        _ => None,
    };
    Ok(VarX {
        numeric: e2 - e1 * e1,
        closed,
    })
}

/// Closed-form `Var_x V_{n,ρ}^{(k)}`; at `ρ = ∞` the limit
/// `(12x(1+cx)(n+kc) + k)/(12n²)`.
pub fn var_x_v_closed(cfg: &OperatorConfig, x: f64) -> Result<f64> {
    cfg.require_second_moments()?;
    let (c, n, k) = (cfg.c, cfg.n, f64::from(cfg.k));
    let q = x * (1.0 + c * x);
    Ok(match cfg.rho {
        Rho::Infinite => (12.0 * q * (n + k * c) + k) / (12.0 * n * n),
        Rho::Finite(r) => {
            let num = 12.0 * n * q * (n + k * c) * r * r * (r + 1.0)
                + 2.0 * k * (3.0 * n + k * c) * r * r
                + k * n * r * (r * r + 5.0)
                - 2.0 * k * k * c;
            num / (12.0 * (n * r - k * c).powi(2) * (n * r - k * c - c))
        }
    })
}

/// Closed-form `E(V_{n,ρ}^{(k)})(x)`; `k/(12n²)` at `ρ = ∞`.
pub fn e_of_l_closed(cfg: &OperatorConfig, x: f64) -> Result<f64> {
    cfg.require_second_moments()?;
    let (c, n, k) = (cfg.c, cfg.n, f64::from(cfg.k));
    Ok(match cfg.rho {
        Rho::Infinite => k / (12.0 * n * n),
        Rho::Finite(r) => {
            let num = k * n * r.powi(3)
                + (12.0 * x * (1.0 + c * x) * (k * c + n) * (k * c + n + c) + 6.0 * k * n) * r * r
                + 5.0 * k * n * r
                + 2.0 * k * k * c * (r * r - 1.0);
            num / (12.0 * (n * r - k * c).powi(2) * (n * r - k * c - c))
        }
    })
}

/// `E(L)(x) = Σ_j Var(A_j) p_{n+kc,j}(x)` by summation, and its closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EValue {
    pub series: f64,
    pub closed: f64,
}

pub fn e_of_l(cfg: &OperatorConfig, x: f64, tol: &Tolerances) -> Result<EValue> {
    e_of_l_with(cfg, x, tol, &ClosedForms::default())
}

fn e_of_l_with(cfg: &OperatorConfig, x: f64, tol: &Tolerances, cf: &ClosedForms) -> Result<EValue> {
    cfg.require_second_moments()?;
    let row = truncated_row(&cfg.output_basis(), x, 2, tol)?;
    let mut series = 0.0;
    for (j, p) in row.iter().enumerate() {
        series += (cf.variance_a)(cfg, j)? * p;
    }
    Ok(EValue {
        series,
        closed: (cf.e_of_l)(cfg, x)?,
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

    #[test]
    fn second_moment_examples() {
        let d = cfg(-1.0, 2.0, Rho::Infinite, 0);
        assert_relative_eq!(
            second_moment_m2(OperatorKind::DDiscrete, &d, 0.5, &tol()).unwrap(),
            0.125,
            max_relative = 1e-14
        );
        for kind in [OperatorKind::VNormalized, OperatorKind::DDiscrete, OperatorKind::BaskakovInf] {
            assert_eq!(second_moment_m2(kind, &d, 0.0, &tol()).unwrap(), 0.0);
        }
    }

    #[test]
    fn var_x_examples() {
        let v = cfg(0.0, 10.0, Rho::Finite(2.0), 0);
        let r = var_x_operator(OperatorKind::VNormalized, &v, 0.5, &tol()).unwrap();
        assert_relative_eq!(r.closed.unwrap(), 0.075, max_relative = 1e-14);
        assert_relative_eq!(r.numeric, 0.075, max_relative = 1e-9);

        let s = cfg(0.0, 10.0, Rho::Infinite, 0);
        let r = var_x_operator(OperatorKind::VNormalized, &s, 0.3, &tol()).unwrap();
        assert_relative_eq!(r.numeric, 0.03, max_relative = 1e-9);
        assert_relative_eq!(r.closed.unwrap(), 0.03, max_relative = 1e-14);

        let r = var_x_operator(OperatorKind::VNormalized, &v, 0.0, &tol()).unwrap();
        assert_eq!(r.closed.unwrap(), 0.0);
        assert!(r.numeric.abs() < 1e-15);
    }

    #[test]
    fn var_x_closed_matches_numeric() {
        for (c, n, rho, k) in [(-1.0, 5.0, 2.0, 1), (1.0, 4.0, 3.0, 2), (0.0, 10.0, 1.0, 2), (-1.0, 6.0, 1.0, 2)] {
            let conf = cfg(c, n, Rho::Finite(rho), k);
            for x in [0.0, 0.2, 0.5, 1.0] {
                let r = var_x_operator(OperatorKind::VNormalized, &conf, x, &tol()).unwrap();
                assert!((r.numeric - r.closed.unwrap()).abs() < 1e-8, "{conf} x={x}");
            }
        }
    }

    #[test]
    fn e_examples() {
        let conf = cfg(0.0, 10.0, Rho::Finite(1.0), 1);
        let e = e_of_l(&conf, 0.5, &tol()).unwrap();
        assert_relative_eq!(e.closed, 0.06, max_relative = 1e-14);
        assert_relative_eq!(e.series, 0.06, max_relative = 1e-9);

        let inf = cfg(0.0, 10.0, Rho::Infinite, 1);
        for x in [0.0, 0.4, 2.0] {
            let e = e_of_l(&inf, x, &tol()).unwrap();
            assert_relative_eq!(e.closed, 1.0 / 1200.0, max_relative = 1e-15);
            assert_relative_eq!(e.series, 1.0 / 1200.0, max_relative = 1e-10);
        }
        let k0 = cfg(1.0, 4.0, Rho::Finite(2.0), 0);
        let e = e_of_l(&k0, 0.0, &tol()).unwrap();
        assert_eq!(e.series, 0.0);
        assert_eq!(e.closed, 0.0);
    }

    #[test]
    fn e_special_values() {
        // ρ = 1 reduction and the c = 0 display.
        for (c, n, k) in [(-1.0, 6.0, 2u32), (0.0, 10.0, 1), (1.0, 5.0, 2)] {
            let conf = cfg(c, n, Rho::Finite(1.0), k);
            let kf = f64::from(k);
            for x in [0.1, 0.7] {
                let want = (x * (1.0 + c * x) * (n + kf * c) * (n + (kf + 1.0) * c) + kf * n)
                    / ((n - kf * c).powi(2) * (n - (kf + 1.0) * c));
                assert_relative_eq!(e_of_l_closed(&conf, x).unwrap(), want, max_relative = 1e-12);
            }
        }
        for rho in [1.0, 2.0, 5.0] {
            let conf = cfg(0.0, 10.0, Rho::Finite(rho), 2);
            let x = 0.3;
            let want = (12.0 * 10.0 * rho * x + 2.0 * (rho + 1.0) * (rho + 5.0)) / (1200.0 * rho * rho);
            assert_relative_eq!(e_of_l_closed(&conf, x).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn e_series_matches_closed() {
        for c in [-1.0, 0.0, 1.0] {
            for rho in [Rho::Finite(1.0), Rho::Finite(3.0), Rho::Infinite] {
                for k in 0..=2 {
                    let conf = cfg(c, 10.0, rho, k);
                    for x in [0.05, 0.5, 0.95] {
                        let e = e_of_l(&conf, x, &tol()).unwrap();
                        assert!((e.series - e.closed).abs() < 1e-10, "{conf} x={x}: {e:?}");
                    }
                }
            }
        }
    }
}
