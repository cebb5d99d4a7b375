//! Closed-form counterexample: `A -> Tr Phi(A^{-p})^{-s/p}` fails to be
//! convex for the compression `Phi(X) = E X E` onto the range of
//! `E = [[1/2, 1/2], [1/2, 1/2]]`, with `A1 = diag(1, t)`, `A2 = diag(t, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lieb::PosLinMap;
use crate::matrix::{CMatrix, HermMatrix, PosDefMatrix, C64};

/// Agreement required between the closed forms and direct evaluation.
pub const DIRECT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressionCounterexample {
    pub t: f64,
    pub p: f64,
    pub s: f64,
    /// Value at the midpoint `(A1 + A2)/2`.
    pub lhs: f64,
    /// Average of the values at `A1` and `A2`.
    pub rhs: f64,
    pub convexity_violated: bool,
    /// Largest deviation of the direct matrix evaluations from the closed forms.
    pub direct_deviation: f64,
}

/// `(((1+t)/2)^s, ((1+t^{-p})/2)^{-s/p})` and the direct cross-check.
pub fn compression_counterexample(t: f64, p: f64, s: f64) -> Result<CompressionCounterexample> {
    for (name, v) in [("t", t), ("p", p), ("s", s)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let lhs = ((1.0 + t) / 2.0).powf(s);
    let rhs = ((1.0 + t.powf(-p)) / 2.0).powf(-s / p);
    let (direct_lhs, direct_rhs) = direct_values(t, p, s)?;
    let (proj_lhs, proj_rhs) = projection_values(t, p, s)?;
    let direct_deviation = [
        (direct_lhs - lhs).abs(),
        (direct_rhs - rhs).abs(),
        (proj_lhs - lhs).abs(),
        (proj_rhs - rhs).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(CompressionCounterexample {
        t,
        p,
        s,
        lhs,
        rhs,
        convexity_violated: lhs > rhs,
        direct_deviation,
    })
}

fn pair(t: f64) -> Result<(PosDefMatrix, PosDefMatrix)> {
    Ok((PosDefMatrix::diag(&[1.0, t])?, PosDefMatrix::diag(&[t, 1.0])?))
}

/// Through the 1x2 Kraus operator `v* = (1, 1)/sqrt 2`.
fn direct_values(t: f64, p: f64, s: f64) -> Result<(f64, f64)> {
    let v = CMatrix::from_element(2, 1, C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
    let phi = PosLinMap::compression(&v)?;
    let value = |a: &PosDefMatrix| -> Result<f64> {
        let inner = phi.apply_pd(&a.power(-p)?)?;
        Ok(inner.eigenvalues().iter().map(|l| l.powf(-s / p)).sum())
    };
    let (a1, a2) = pair(t)?;
    let mid = PosDefMatrix::midpoint(&a1, &a2)?;
    Ok((value(&mid)?, 0.5 * (value(&a1)? + value(&a2)?)))
}

/// Through the 2x2 product `E X E`, keeping the eigenvalue on the range of `E`.
fn projection_values(t: f64, p: f64, s: f64) -> Result<(f64, f64)> {
    let e = CMatrix::from_element(2, 2, C64::new(0.5, 0.0));
    let value = |a: &PosDefMatrix| -> Result<f64> {
        let m = HermMatrix::hermitian_part(&(&e * a.power(-p)?.as_matrix() * &e));
        let top = *m.eigenvalues().last().expect("2x2 spectrum");
        Ok(top.powf(-s / p))
    };
    let (a1, a2) = pair(t)?;
    let mid = PosDefMatrix::midpoint(&a1, &a2)?;
    Ok((value(&mid)?, 0.5 * (value(&a1)? + value(&a2)?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let r = compression_counterexample(4.0, 1.0, 1.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (2.5, 1.6));
        assert!(r.convexity_violated);
        assert!(r.direct_deviation <= DIRECT_TOL);

        let r = compression_counterexample(4.0, 2.0, 2.0).unwrap();
        assert!((r.lhs - 6.25).abs() < 1e-15);
        assert!((r.rhs - 32.0 / 17.0).abs() < 1e-14);
        assert!(r.convexity_violated);

        let r = compression_counterexample(1.0, 0.7, 1.3).unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        assert!(!r.convexity_violated);
    }

    #[test]
    fn closed_forms_match_direct_evaluation() {
        for t in [0.5, 2.0, 4.0] {
            for p in [0.5, 1.0, 2.0] {
                for s in [1.0, 2.0] {
                    let r = compression_counterexample(t, p, s).unwrap();
                    assert!(r.direct_deviation <= DIRECT_TOL, "{r:?}");
                    assert!(r.convexity_violated);
                }
            }
        }
    }

    #[test]
    fn non_positive_inputs_rejected() {
        assert!(compression_counterexample(0.0, 1.0, 1.0).is_err());
        assert!(compression_counterexample(1.0, -1.0, 1.0).is_err());
        assert!(compression_counterexample(1.0, 1.0, 0.0).is_err());
    }
}
