//! Searches for concavity violations of `Tr f(Phi(A^p)^{1/2} B^q Phi(A^p)^{1/2})`
//! with `f = x^s` just outside the region where it is known to be concave.

use serde::{Deserialize, Serialize};

use super::exec::Executor;
use super::midpoint::{search_midpoint, ConcavityReport, Direction, MidpointTrial};
use super::suites::{point_seed, Form, GridPoint};
use crate::error::{Error, Result};
use crate::lieb::MapKind;
use crate::scalar::ScalarFn;

/// Trials per block of the search; the search stops after the first block
/// with a violation.
pub const SEARCH_BLOCK: usize = 250;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsifyConfig {
    pub p: f64,
    pub q: f64,
    pub dim: usize,
    pub trials: usize,
    pub rel_tol: f64,
    pub cond_cap: f64,
    pub seed: u64,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        Self {
            p: 1.0,
            q: 1.0,
            dim: 2,
            trials: 10_000,
            rel_tol: 1e-8,
            cond_cap: 100.0,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FalsifyReport {
    pub s: f64,
    pub params: GridPoint,
    pub report: ConcavityReport,
}

impl FalsifyReport {
    pub fn found(&self) -> bool {
        self.report.violations > 0
    }
}

/// Whether `x^s` gives a concave functional for every pair of maps.
pub fn in_concavity_region(p: f64, q: f64, s: f64) -> bool {
    let box_pos = (0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q);
    let box_neg = (-1.0..=0.0).contains(&p) && (-1.0..=0.0).contains(&q);
    if s == 0.0 {
        return true;
    }
    let bound = 1.0 / (p + q);
    (box_pos && s > 0.0 && s <= bound) || (box_neg && s < 0.0 && s >= bound)
}

fn point(cfg: &FalsifyConfig, s: f64) -> GridPoint {
    GridPoint {
        form: Form::Lieb,
        f: ScalarFn::power(s),
        p: cfg.p,
        q: cfg.q,
        phi: MapKind::RandomCongruence,
        psi: MapKind::Identity,
        expected: Direction::Concave,
        dim: cfg.dim,
    }
}

fn run(cfg: &FalsifyConfig, s: f64, index: usize, exec: &Executor) -> Result<FalsifyReport> {
    let params = point(cfg, s);
    let trial = MidpointTrial {
        functional: params.functional()?,
        direction: Direction::Concave,
        sampler: Box::new(params.sampler(cfg.cond_cap)),
        trials: cfg.trials,
        rel_tol: cfg.rel_tol,
        seed: point_seed(cfg.seed, index),
    };
    let report = search_midpoint(&trial, exec, SEARCH_BLOCK)?;
    Ok(FalsifyReport { s, params, report })
}

fn check_config(cfg: &FalsifyConfig) -> Result<()> {
    if cfg.p == 0.0 && cfg.q == 0.0 {
        return Err(Error::config("precondition (p,q) ≠ (0,0) violated: p = q = 0"));
    }
    if cfg.dim < 1 || cfg.trials < 1 {
        return Err(Error::config("dimension and trials must be at least 1"));
    }
    Ok(())
}

/// One search per exponent; every `s` must lie strictly outside the
/// concavity region. Finding nothing is reported, not an error.
pub fn falsify_boundary(cfg: &FalsifyConfig, s_values: &[f64], exec: &Executor) -> Result<Vec<FalsifyReport>> {
    check_config(cfg)?;
    if s_values.is_empty() {
        return Err(Error::config("no exponents to falsify"));
    }
    if let Some(s) = s_values
        .iter()
        .find(|&&s| !s.is_finite() || in_concavity_region(cfg.p, cfg.q, s))
    {
        return Err(Error::config(format!(
            "s = {s} lies inside the concavity region for (p,q) = ({},{}); nothing to falsify",
            cfg.p, cfg.q
        )));
    }
    s_values
        .iter()
        .enumerate()
        .map(|(i, &s)| run(cfg, s, i, exec))
        .collect()
}

/// Same search at `s = 1/(p+q)`, which is inside the region; expects no violation.
pub fn boundary_control(cfg: &FalsifyConfig, exec: &Executor) -> Result<FalsifyReport> {
    check_config(cfg)?;
    let s = 1.0 / (cfg.p + cfg.q);
    if !in_concavity_region(cfg.p, cfg.q, s) {
        return Err(Error::config(format!(
            "(p,q) = ({},{}) has no concavity region to control",
            cfg.p, cfg.q
        )));
    }
    run(cfg, s, 0, exec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_membership() {
        assert!(in_concavity_region(1.0, 1.0, 0.5));
        assert!(!in_concavity_region(1.0, 1.0, 0.6));
        assert!(!in_concavity_region(1.0, 1.0, -0.1));
        assert!(in_concavity_region(-0.5, -0.5, -1.0));
        assert!(!in_concavity_region(-0.5, -0.5, -1.1));
        assert!(!in_concavity_region(1.5, 0.5, 0.1));
    }

    #[test]
    fn inside_region_is_rejected() {
        let cfg = FalsifyConfig::default();
        assert!(matches!(falsify_boundary(&cfg, &[0.4], &Executor::sequential()), Err(Error::Config(_))));
        assert!(matches!(falsify_boundary(&cfg, &[0.5], &Executor::sequential()), Err(Error::Config(_))));
    }

    #[test]
    fn beyond_the_bound_is_falsified() {
        let cfg = FalsifyConfig::default();
        let out = falsify_boundary(&cfg, &[0.6], &Executor::sequential()).unwrap();
        assert!(out[0].found(), "{:?}", out[0].report);
    }
}
