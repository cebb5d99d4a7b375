//! Piecewise families that are non-decreasing and convex (resp. concave) and
//! stay so after the substitution `x -> x^(1-r)` (resp. `x -> x^(1+r)`).
//!
//! The optional `r` records the composition exponent the parameters were
//! chosen for; when present the corresponding exponent bound is enforced.

use serde::{Deserialize, Serialize};

use super::FnClass;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ExampleA4 {
    /// `(x - alpha)_+^s`
    ShiftedPower {
        s: f64,
        alpha: f64,
        #[serde(default)]
        r: Option<f64>,
    },
    /// `(x^s - alpha^s)_+`
    PowerExcess {
        s: f64,
        alpha: f64,
        #[serde(default)]
        r: Option<f64>,
    },
    /// `x^s1` up to `alpha`, then `beta (x^s2 - alpha^s2) + alpha^s1`,
    /// with `beta >= (s1/s2) alpha^(s1-s2)`.
    ConvexSplice {
        s1: f64,
        s2: f64,
        alpha: f64,
        beta: f64,
        #[serde(default)]
        r: Option<f64>,
    },
    /// `x^s - alpha x` up to the knot `(s/alpha)^(1/(1-s))`, constant after.
    CappedConcave {
        s: f64,
        alpha: f64,
        #[serde(default)]
        r: Option<f64>,
    },
    /// Same splice as [`ExampleA4::ConvexSplice`] with
    /// `0 < beta <= (s1/s2) alpha^(s1-s2)`.
    ConcaveSplice {
        s1: f64,
        s2: f64,
        alpha: f64,
        beta: f64,
        #[serde(default)]
        r: Option<f64>,
    },
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(msg()))
    }
}

/// Lower exponent bound `1/(1-r)` for the convex families.
fn convex_floor(r: Option<f64>) -> Result<f64> {
    match r {
        None => Ok(1.0),
        Some(r) => {
            require(r > 0.0 && r < 1.0, || format!("r must lie in (0, 1), got {r}"))?;
            Ok(1.0 / (1.0 - r))
        }
    }
}

/// Upper exponent bound `1/(1+r)` for the concave families.
fn concave_ceiling(r: Option<f64>) -> Result<f64> {
    match r {
        None => Ok(1.0),
        Some(r) => {
            require(r > 0.0, || format!("r must be positive, got {r}"))?;
            Ok(1.0 / (1.0 + r))
        }
    }
}

impl ExampleA4 {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExampleA4::ShiftedPower { s, alpha, r } | ExampleA4::PowerExcess { s, alpha, r } => {
                let floor = convex_floor(r)?;
                require(alpha > 0.0, || format!("alpha must be positive, got {alpha}"))?;
                require(s >= floor, || format!("s must be >= {floor}, got {s}"))
            }
            ExampleA4::ConvexSplice {
                s1,
                s2,
                alpha,
                beta,
                r,
            } => {
                let floor = convex_floor(r)?;
                require(alpha > 0.0, || format!("alpha must be positive, got {alpha}"))?;
                require(s1 >= floor && s2 >= floor, || {
                    format!("s1 and s2 must be >= {floor}, got {s1} and {s2}")
                })?;
                let min_beta = (s1 / s2) * alpha.powf(s1 - s2);
                require(beta >= min_beta, || format!("beta must be >= {min_beta}, got {beta}"))
            }
            ExampleA4::CappedConcave { s, alpha, r } => {
                let ceiling = concave_ceiling(r)?;
                require(alpha > 0.0, || format!("alpha must be positive, got {alpha}"))?;
                require(s > 0.0 && s <= ceiling && s < 1.0, || {
                    format!("s must lie in (0, {}] and below 1, got {s}", ceiling)
                })
            }
            ExampleA4::ConcaveSplice {
                s1,
                s2,
                alpha,
                beta,
                r,
            } => {
                let ceiling = concave_ceiling(r)?;
                require(alpha > 0.0, || format!("alpha must be positive, got {alpha}"))?;
                require(
                    s1 > 0.0 && s2 > 0.0 && s1 <= ceiling && s2 <= ceiling,
                    || format!("s1 and s2 must lie in (0, {ceiling}], got {s1} and {s2}"),
                )?;
                let max_beta = (s1 / s2) * alpha.powf(s1 - s2);
                require(beta > 0.0 && beta <= max_beta, || {
                    format!("beta must lie in (0, {max_beta}], got {beta}")
                })
            }
        }
    }

    pub fn flags(&self) -> FnClass {
        match self {
            ExampleA4::ShiftedPower { .. }
            | ExampleA4::PowerExcess { .. }
            | ExampleA4::ConvexSplice { .. } => FnClass::NON_DECREASING | FnClass::CONVEX,
            ExampleA4::CappedConcave { .. } | ExampleA4::ConcaveSplice { .. } => {
                FnClass::NON_DECREASING | FnClass::CONCAVE
            }
        }
    }

    /// Knot where the two pieces meet.
    pub fn knot(&self) -> f64 {
        match *self {
            ExampleA4::ShiftedPower { alpha, .. }
            | ExampleA4::PowerExcess { alpha, .. }
            | ExampleA4::ConvexSplice { alpha, .. }
            | ExampleA4::ConcaveSplice { alpha, .. } => alpha,
            ExampleA4::CappedConcave { s, alpha, .. } => (s / alpha).powf(1.0 / (1.0 - s)),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ExampleA4::ShiftedPower { s, alpha, .. } => (x - alpha).max(0.0).powf(s),
            ExampleA4::PowerExcess { s, alpha, .. } => (x.powf(s) - alpha.powf(s)).max(0.0),
            ExampleA4::ConvexSplice {
                s1,
                s2,
                alpha,
                beta,
                ..
            }
            | ExampleA4::ConcaveSplice {
                s1,
                s2,
                alpha,
                beta,
                ..
            } => {
                if x <= alpha {
                    x.powf(s1)
                } else {
                    beta * (x.powf(s2) - alpha.powf(s2)) + alpha.powf(s1)
                }
            }
            ExampleA4::CappedConcave { s, alpha, .. } => {
                let knot = self.knot();
                if x <= knot {
                    x.powf(s) - alpha * x
                } else {
                    (1.0 - s) * (s / alpha).powf(s / (1.0 - s))
                }
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            ExampleA4::ShiftedPower { s, alpha, .. } => {
                if x <= alpha {
                    0.0
                } else {
                    s * (x - alpha).powf(s - 1.0)
                }
            }
            ExampleA4::PowerExcess { s, alpha, .. } => {
                if x <= alpha {
                    0.0
                } else {
                    s * x.powf(s - 1.0)
                }
            }
            ExampleA4::ConvexSplice {
                s1,
                s2,
                alpha,
                beta,
                ..
            }
            | ExampleA4::ConcaveSplice {
                s1,
                s2,
                alpha,
                beta,
                ..
            } => {
                if x <= alpha {
                    s1 * x.powf(s1 - 1.0)
                } else {
                    beta * s2 * x.powf(s2 - 1.0)
                }
            }
            ExampleA4::CappedConcave { s, alpha, .. } => {
                if x <= self.knot() {
                    s * x.powf(s - 1.0) - alpha
                } else {
                    0.0
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ExampleA4::ShiftedPower { s, alpha, .. } => format!("(x-{alpha})_+^{s}"),
            ExampleA4::PowerExcess { s, alpha, .. } => format!("(x^{s}-{alpha}^{s})_+"),
            ExampleA4::ConvexSplice {
                s1, s2, alpha, beta, ..
            } => format!("convex-splice(s1={s1},s2={s2},alpha={alpha},beta={beta})"),
            ExampleA4::CappedConcave { s, alpha, .. } => format!("capped(x^{s}-{alpha}x)"),
            ExampleA4::ConcaveSplice {
                s1, s2, alpha, beta, ..
            } => format!("concave-splice(s1={s1},s2={s2},alpha={alpha},beta={beta})"),
        }
    }
}
