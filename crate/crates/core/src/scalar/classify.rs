use super::{FnClass, ScalarFn};
use crate::error::{Error, Result};

pub const AUDIT_GRID_LEN: usize = 201;

/// Relative slack on increments and chord defects before a sampled
/// property is declared violated.
pub const SAMPLED_TOL: f64 = 1e-10;

/// 201 log-spaced points on `[1e-3, 1e3]`.
pub fn audit_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, AUDIT_GRID_LEN)
}

pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Result of a sampled shape screen. Margins are normalized by the local
/// function magnitude; a positive margin is a violation of the property.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassReport {
    pub flags: FnClass,
    pub worst_decrease: f64,
    pub worst_increase: f64,
    pub worst_convexity_defect: f64,
    pub worst_concavity_defect: f64,
}

impl ClassReport {
    /// Worst normalized violation of the given sampled property.
    pub fn margin(&self, flag: FnClass) -> f64 {
        if flag == FnClass::NON_DECREASING {
            self.worst_decrease
        } else if flag == FnClass::NON_INCREASING {
            self.worst_increase
        } else if flag == FnClass::CONVEX {
            self.worst_convexity_defect
        } else if flag == FnClass::CONCAVE {
            self.worst_concavity_defect
        } else {
            f64::NAN
        }
    }

    /// Largest margin among the properties that failed, or `None` if the
    /// screen found every sampled property.
    pub fn worst_violated_margin(&self) -> Option<f64> {
        let all = [
            self.worst_decrease,
            self.worst_increase,
            self.worst_convexity_defect,
            self.worst_concavity_defect,
        ];
        all.iter().copied().filter(|&m| m > SAMPLED_TOL).reduce(f64::max)
    }
}

/// Screens `x -> f(x^gamma)` on `grid` for monotonicity and for convexity or
/// concavity through chord defects of consecutive triples.
pub fn classify_sampled(f: &ScalarFn, grid: &[f64], gamma: f64) -> Result<ClassReport> {
    if grid.len() < 5 {
        return Err(Error::invalid("classification grid needs at least 5 points"));
    }
    if grid[0] <= 0.0 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("classification grid must be strictly increasing in (0, inf)"));
    }
    let values = grid
        .iter()
        .map(|&x| {
            let y = f.eval(x.powf(gamma));
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::Domain {
                    function: f.label().to_string(),
                    at: x.powf(gamma),
                })
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut worst_decrease = f64::NEG_INFINITY;
    let mut worst_increase = f64::NEG_INFINITY;
    for w in values.windows(2) {
        let scale = w[0].abs() + w[1].abs() + f64::MIN_POSITIVE;
        worst_decrease = worst_decrease.max((w[0] - w[1]) / scale);
        worst_increase = worst_increase.max((w[1] - w[0]) / scale);
    }

    let mut worst_convex = f64::NEG_INFINITY;
    let mut worst_concave = f64::NEG_INFINITY;
    for i in 1..grid.len() - 1 {
        let (x0, x1, x2) = (grid[i - 1], grid[i], grid[i + 1]);
        let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
        let t = (x1 - x0) / (x2 - x0);
        let chord = y0 + t * (y2 - y0);
        let scale = y0.abs() + y1.abs() + y2.abs() + f64::MIN_POSITIVE;
        worst_convex = worst_convex.max((y1 - chord) / scale);
        worst_concave = worst_concave.max((chord - y1) / scale);
    }

    let mut flags = FnClass::empty();
    for (flag, margin) in [
        (FnClass::NON_DECREASING, worst_decrease),
        (FnClass::NON_INCREASING, worst_increase),
        (FnClass::CONVEX, worst_convex),
        (FnClass::CONCAVE, worst_concave),
    ] {
        if margin <= SAMPLED_TOL {
            flags |= flag;
        }
    }
    Ok(ClassReport {
        flags,
        worst_decrease,
        worst_increase,
        worst_convexity_defect: worst_convex,
        worst_concavity_defect: worst_concave,
    })
}
