use serde::{Deserialize, Serialize};

use crate::functionals::OperatorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// Violated by less than the resolution of a lower estimate on the right-hand side.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `|lhs − rhs| ≤ slack`
    Identity,
    /// `lhs ≤ rhs + slack`
    Inequality,
}

/// One checked identity or inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfg: Option<OperatorConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// How far a right-hand side estimated from below may fall short.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    pub outcome: Outcome,
}

impl Case {
    pub fn identity(label: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let pass = (lhs - rhs).abs() <= slack;
        Self::build(label.into(), Relation::Identity, lhs, rhs, slack, None, pass, false)
    }

    pub fn inequality(label: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let pass = lhs <= rhs + slack;
        Self::build(label.into(), Relation::Inequality, lhs, rhs, slack, None, pass, false)
    }

    /// `lhs ≤ rhs + slack` where `rhs` is a lower estimate accurate to `resolution`.
    pub fn estimated_inequality(label: impl Into<String>, lhs: f64, rhs: f64, slack: f64, resolution: f64) -> Self {
        let pass = lhs <= rhs + slack;
        let near = lhs <= rhs + slack + resolution;
        Self::build(label.into(), Relation::Inequality, lhs, rhs, slack, Some(resolution), pass, near)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        label: String,
        relation: Relation,
        lhs: f64,
        rhs: f64,
        slack: f64,
        resolution: Option<f64>,
        pass: bool,
        near: bool,
    ) -> Self {
        let outcome = if pass {
            Outcome::Pass
        } else if near {
            Outcome::Inconclusive
        } else {
            Outcome::Fail
        };
        Self {
            label,
            cfg: None,
            x: None,
            j: None,
            relation,
            lhs,
            rhs,
            slack,
            resolution,
            outcome,
        }
    }

    pub fn with_cfg(mut self, cfg: &OperatorConfig) -> Self {
        self.cfg = Some(*cfg);
        self
    }

    pub fn at_x(mut self, x: f64) -> Self {
        self.x = Some(x);
        self
    }

    pub fn at_j(mut self, j: usize) -> Self {
        self.j = Some(j);
        self
    }
}

/// The outcome of one verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub cases: Vec<Case>,
    /// No case failed; inconclusive cases do not count as failures.
    pub overall: bool,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, cases: Vec<Case>) -> Self {
        let count = |o: Outcome| cases.iter().filter(|c| c.outcome == o).count();
        let (passed, failed, inconclusive) = (
            count(Outcome::Pass),
            count(Outcome::Fail),
            count(Outcome::Inconclusive),
        );
        Self {
            suite: suite.into(),
            overall: failed == 0,
            passed,
            failed,
            inconclusive,
            cases,
        }
    }

    /// Concatenates reports in order under a new suite name.
    pub fn merge(suite: impl Into<String>, reports: Vec<VerificationReport>) -> Self {
        let cases = reports.into_iter().flat_map(|r| r.cases).collect();
        Self::new(suite, cases)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| c.outcome == Outcome::Fail)
    }
}
