//! Symmetric norms and anti-norms of positive semidefinite matrices, all
//! evaluated from the spectrum.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::HermMatrix;

/// Eigenvalues in `(-PSD_CLIP, 0)` are treated as zero.
pub const PSD_CLIP: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    /// Sum of the `k` largest eigenvalues.
    KyFanNorm { k: usize },
    /// Sum of the `k` smallest eigenvalues.
    KyFanAnti { k: usize },
    /// `(sum l^p)^(1/p)` for finite `p >= 1`; use `OperatorNorm` for `p = inf`.
    Schatten { p: f64 },
    TraceNorm,
    OperatorNorm,
    /// `||A^{-alpha}||^{-1/alpha}` for invertible `A`, zero otherwise.
    DerivedAnti { base: Box<NormSpec>, alpha: f64 },
}

impl NormSpec {
    /// True for symmetric norms (the trace norm is both kinds).
    pub fn is_norm(&self) -> bool {
        matches!(
            self,
            NormSpec::KyFanNorm { .. }
                | NormSpec::Schatten { .. }
                | NormSpec::TraceNorm
                | NormSpec::OperatorNorm
        )
    }

    /// True for symmetric anti-norms.
    pub fn is_anti(&self) -> bool {
        matches!(
            self,
            NormSpec::KyFanAnti { .. } | NormSpec::DerivedAnti { .. } | NormSpec::TraceNorm
        )
    }

    pub fn derived_anti(base: NormSpec, alpha: f64) -> Self {
        NormSpec::DerivedAnti {
            base: Box::new(base),
            alpha,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            NormSpec::KyFanNorm { k } | NormSpec::KyFanAnti { k } => {
                if *k < 1 || *k > dim {
                    return Err(Error::invalid(format!(
                        "Ky Fan index k = {k} outside 1..={dim}"
                    )));
                }
            }
            NormSpec::Schatten { p } => {
                if !(*p >= 1.0) || !p.is_finite() {
                    return Err(Error::invalid(format!("Schatten exponent must be finite and >= 1, got {p}")));
                }
            }
            NormSpec::DerivedAnti { base, alpha } => {
                if !(*alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::invalid(format!("derived anti-norm needs alpha > 0, got {alpha}")));
                }
                if !base.is_norm() {
                    return Err(Error::invalid(format!(
                        "derived anti-norm base must be a symmetric norm, got {base}"
                    )));
                }
                base.validate(dim)?;
            }
            NormSpec::TraceNorm | NormSpec::OperatorNorm => {}
        }
        Ok(())
    }

    pub fn eval(&self, a: &HermMatrix) -> Result<f64> {
        self.eval_spectrum(&a.eigenvalues())
    }

    /// Evaluates on a PSD spectrum given in any order.
    pub fn eval_spectrum(&self, spectrum: &[f64]) -> Result<f64> {
        self.validate(spectrum.len())?;
        let mut values = Vec::with_capacity(spectrum.len());
        for &l in spectrum {
            if !(l >= -PSD_CLIP) {
                return Err(Error::invalid(format!(
                    "norms are evaluated on PSD matrices, found eigenvalue {l:e}"
                )));
            }
            values.push(l.max(0.0));
        }
        values.sort_by(|x, y| y.total_cmp(x));
        Ok(self.eval_sorted(&values))
    }

    /// `values` are non-negative and sorted descending.
    fn eval_sorted(&self, values: &[f64]) -> f64 {
        match self {
            NormSpec::KyFanNorm { k } => values[..*k].iter().sum(),
            NormSpec::KyFanAnti { k } => values[values.len() - k..].iter().sum(),
            NormSpec::Schatten { p } => {
                let top = values[0];
                if top == 0.0 {
                    return 0.0;
                }
                // Scaled to avoid overflow for large p.
                top * values.iter().map(|&l| (l / top).powf(*p)).sum::<f64>().powf(1.0 / p)
            }
            NormSpec::TraceNorm => values.iter().sum(),
            NormSpec::OperatorNorm => values[0],
            NormSpec::DerivedAnti { base, alpha } => {
                if values.iter().any(|&l| l == 0.0) {
                    return 0.0;
                }
                let mut inv: Vec<f64> = values.iter().map(|&l| l.powf(-alpha)).collect();
                inv.reverse();
                base.eval_sorted(&inv).powf(-1.0 / alpha)
            }
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::KyFanNorm { k } => write!(f, "ky_fan_norm({k})"),
            NormSpec::KyFanAnti { k } => write!(f, "ky_fan_anti({k})"),
            NormSpec::Schatten { p } => write!(f, "schatten({p})"),
            NormSpec::TraceNorm => f.write_str("trace_norm"),
            NormSpec::OperatorNorm => f.write_str("operator_norm"),
            NormSpec::DerivedAnti { base, alpha } => write!(f, "derived_anti({base}, {alpha})"),
        }
    }
}

pub fn eval_norm(spec: &NormSpec, a: &HermMatrix) -> Result<f64> {
    spec.eval(a)
}
