//! Legendre-type conjugates on the positive half-line and the bump
//! mollifier regularization.
//!
//! `hat(f)(t) = sup_{x>0} (x t - f(x))` for non-decreasing convex `f` with
//! superlinear growth; `check(f)(t) = inf_{x>0} (x t - f(x))` for
//! non-decreasing concave `f` with sublinear growth. Both are computed by a
//! log-grid bracket followed by golden-section refinement.

mod quadrature;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{log_grid, FnClass, ScalarFn};

pub use quadrature::{GaussLegendre, Mollifier, MOLLIFIER_NODES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConjugateDirection {
    /// Supremum transform, for the convex class.
    Hat,
    /// Infimum transform, for the concave class.
    Check,
}

impl ConjugateDirection {
    /// Flags the source function must carry.
    pub fn required_class(self) -> FnClass {
        match self {
            ConjugateDirection::Hat => FnClass::NON_DECREASING | FnClass::CONVEX,
            ConjugateDirection::Check => FnClass::NON_DECREASING | FnClass::CONCAVE,
        }
    }

    fn sign(self) -> f64 {
        match self {
            ConjugateDirection::Hat => 1.0,
            ConjugateDirection::Check => -1.0,
        }
    }
}

impl fmt::Display for ConjugateDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConjugateDirection::Hat => "hat",
            ConjugateDirection::Check => "check",
        })
    }
}

impl FromStr for ConjugateDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hat" => Ok(ConjugateDirection::Hat),
            "check" => Ok(ConjugateDirection::Check),
            other => Err(Error::invalid(format!(
                "unknown conjugate direction {other:?} (expected hat or check)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub grid_points: usize,
    pub refine_iters: usize,
    /// Stopping width of the golden-section bracket, relative to `1 + x`.
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            bracket_lo: 1e-6,
            bracket_hi: 1e6,
            grid_points: 121,
            refine_iters: 80,
            tol: 1e-9,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bracket_lo > 0.0 && self.bracket_lo < self.bracket_hi && self.bracket_hi.is_finite()) {
            return Err(Error::invalid("search bracket must satisfy 0 < lo < hi < inf"));
        }
        if self.grid_points < 3 {
            return Err(Error::invalid("search grid needs at least 3 points"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("search tolerance must be positive"));
        }
        Ok(())
    }
}

/// A conjugate transform bound to its source function.
#[derive(Clone, Debug)]
pub struct ConjugateFn {
    source: ScalarFn,
    direction: ConjugateDirection,
    search: SearchConfig,
    grid: Vec<f64>,
}

impl ConjugateFn {
    /// Checks the declared class and runs the sampled screen (shape plus a
    /// growth-rate check) before accepting `source`.
    pub fn new(source: ScalarFn, direction: ConjugateDirection, search: SearchConfig) -> Result<Self> {
        let c = Self::unscreened(source, direction, search)?;
        c.screen()?;
        Ok(c)
    }

    /// Checks only the declared flags.
    pub fn unscreened(source: ScalarFn, direction: ConjugateDirection, search: SearchConfig) -> Result<Self> {
        search.validate()?;
        let need = direction.required_class();
        if !source.has(need) {
            return Err(Error::invalid(format!(
                "{direction} needs a function declared {need:?}, {} is {:?}",
                source.label(),
                source.flags()
            )));
        }
        let grid = log_grid(search.bracket_lo, search.bracket_hi, search.grid_points);
        Ok(Self {
            source,
            direction,
            search,
            grid,
        })
    }

    fn screen(&self) -> Result<()> {
        let report = self.source.screen(1.0)?;
        let need = self.direction.required_class();
        if !report.flags.contains(need) {
            return Err(Error::invalid(format!(
                "{} fails the sampled {need:?} screen (found {:?})",
                self.source.label(),
                report.flags
            )));
        }
        let ratio = |x: f64| self.source.eval(x) / x;
        let (mid, top) = (ratio(1e1), ratio(1e3));
        let growth_ok = match self.direction {
            ConjugateDirection::Hat => top > mid,
            ConjugateDirection::Check => top < mid,
        };
        if !growth_ok {
            return Err(Error::invalid(format!(
                "{} does not have the growth rate {} requires",
                self.source.label(),
                self.direction
            )));
        }
        Ok(())
    }

    pub fn source(&self) -> &ScalarFn {
        &self.source
    }

    pub fn direction(&self) -> ConjugateDirection {
        self.direction
    }

    pub fn search(&self) -> &SearchConfig {
        &self.search
    }

    /// Value of the transform at `t > 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("conjugates are defined for t > 0, got {t}")));
        }
        let sign = self.direction.sign();
        let objective = |x: f64| sign * (x * t - self.source.eval(x));

        let mut best = f64::NEG_INFINITY;
        let mut best_k = None;
        for (k, &x) in self.grid.iter().enumerate() {
            let v = objective(x);
            if v.is_finite() && v > best {
                best = v;
                best_k = Some(k);
            }
        }
        let Some(k) = best_k else {
            return Err(Error::Domain {
                function: self.source.label().to_string(),
                at: self.grid[0],
            });
        };
        let last = self.grid.len() - 1;
        if k == last {
            return Err(Error::Bracket {
                function: format!("{}({})", self.direction, self.source.label()),
                t,
                edge: "upper",
            });
        }

        // x -> 0+ limit of the objective.
        let boundary = sign * -self.source.limit_at_zero();
        if boundary.is_finite() {
            best = best.max(boundary);
        }

        let mut a = if k == 0 { 0.0 } else { self.grid[k - 1] };
        let mut b = self.grid[k + 1];
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - ratio * (b - a);
        let mut x2 = a + ratio * (b - a);
        let mut f1 = objective(x1);
        let mut f2 = objective(x2);
        for _ in 0..self.search.refine_iters {
            for v in [f1, f2] {
                if v.is_finite() {
                    best = best.max(v);
                }
            }
            if b - a <= self.search.tol * (1.0 + 0.5 * (a + b)) {
                break;
            }
            // Non-finite values are treated as -inf so the search moves away.
            let g1 = if f1.is_finite() { f1 } else { f64::NEG_INFINITY };
            let g2 = if f2.is_finite() { f2 } else { f64::NEG_INFINITY };
            if g1 >= g2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - ratio * (b - a);
                f1 = objective(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + ratio * (b - a);
                f2 = objective(x2);
            }
        }
        for v in [f1, f2] {
            if v.is_finite() {
                best = best.max(v);
            }
        }
        Ok(sign * best)
    }

    /// The transform as a [`ScalarFn`]; search failures evaluate to NaN.
    pub fn to_scalar_fn(&self) -> ScalarFn {
        let me = self.clone();
        let label = format!("{}({})", self.direction, self.source.label());
        ScalarFn::custom(label, self.direction.required_class(), move |t| {
            me.eval(t).unwrap_or(f64::NAN)
        })
    }
}

/// `sup_{x>0} (x t - f(x))` with the default search; `f` must be declared
/// non-decreasing and convex.
pub fn hat(f: &ScalarFn, t: f64) -> Result<f64> {
    ConjugateFn::unscreened(f.clone(), ConjugateDirection::Hat, SearchConfig::default())?.eval(t)
}

/// `inf_{x>0} (x t - f(x))` with the default search; `f` must be declared
/// non-decreasing and concave.
pub fn check(f: &ScalarFn, t: f64) -> Result<f64> {
    ConjugateFn::unscreened(f.clone(), ConjugateDirection::Check, SearchConfig::default())?.eval(t)
}

/// `f_eps(x) = int_{-1}^{1} phi(t) f(x e^{-eps t}) dt` with the bump mollifier.
pub fn mollify(f: &ScalarFn, eps: f64) -> Result<ScalarFn> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("mollifier width must be positive, got {eps}")));
    }
    let m = Mollifier::standard();
    let scales: Vec<f64> = m.nodes.iter().map(|&t| (-eps * t).exp()).collect();
    let masses = m.masses.clone();
    let (g, dg) = (f.clone(), f.clone());
    let (s1, m1) = (scales.clone(), masses.clone());
    Ok(ScalarFn::custom_with_derivative(
        format!("mollify({}, {eps})", f.label()),
        f.flags(),
        move |x| s1.iter().zip(&m1).map(|(&s, &w)| w * g.eval(x * s)).sum(),
        move |x| {
            scales
                .iter()
                .zip(&masses)
                .map(|(&s, &w)| w * s * dg.derivative(x * s))
                .sum()
        },
    ))
}
