use rand::Rng;

use super::LiebSpec;
use crate::error::{Error, Result};
use crate::matrix::{random_hermitian, HermMatrix, PosDefMatrix};

/// Default finite-difference step.
pub const EPSTEIN_STEP: f64 = 1e-3;

/// `x -> (A0 + x H, B0 + x K)` on `[0, x_max]`.
#[derive(Clone, Debug)]
pub struct LineSegment {
    pub a0: PosDefMatrix,
    pub h: HermMatrix,
    pub b0: PosDefMatrix,
    pub k: HermMatrix,
    pub x_max: f64,
}

impl LineSegment {
    /// Both endpoints must be positive definite; by convexity the whole
    /// segment then is.
    pub fn new(a0: PosDefMatrix, h: HermMatrix, b0: PosDefMatrix, k: HermMatrix, x_max: f64) -> Result<Self> {
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(Error::invalid(format!("x_max must be positive, got {x_max}")));
        }
        for (base, dir) in [(&a0, &h), (&b0, &k)] {
            if base.dim() != dir.dim() {
                return Err(Error::DimensionMismatch {
                    expected: base.dim(),
                    found: dir.dim(),
                });
            }
        }
        let seg = Self { a0, h, b0, k, x_max };
        seg.point(seg.x_max)?;
        Ok(seg)
    }

    /// Random directions scaled so the segment stays well inside the cone
    /// on `[-x_max, 2 x_max]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, a0: PosDefMatrix, b0: PosDefMatrix, x_max: f64) -> Result<Self> {
        let direction = |rng: &mut R, base: &PosDefMatrix| {
            let h = random_hermitian(rng, base.dim());
            let spread = h.eigenvalues().iter().fold(0.0f64, |m, l| m.max(l.abs()));
            h.scale(0.5 * base.min_eigenvalue() / (2.0 * x_max * spread.max(f64::MIN_POSITIVE)))
        };
        let h = direction(rng, &a0);
        let k = direction(rng, &b0);
        Self::new(a0, h, b0, k, x_max)
    }

    pub fn point(&self, x: f64) -> Result<(PosDefMatrix, PosDefMatrix)> {
        let at = |base: &PosDefMatrix, dir: &HermMatrix| {
            PosDefMatrix::new(base.base() + &(dir * x)).map_err(|e| {
                Error::invalid(format!("segment leaves the positive definite cone at x = {x}: {e}"))
            })
        };
        Ok((at(&self.a0, &self.h)?, at(&self.b0, &self.k)?))
    }
}

/// `Tr (I + M(x)^{-1/(p+q)})^{-1}` with `M(x)` the inner matrix at `x`.
pub fn epstein_value(spec: &LiebSpec, seg: &LineSegment, x: f64) -> Result<f64> {
    let gamma = spec.gamma_sum();
    if gamma == 0.0 {
        return Err(Error::config("the probe needs p + q ≠ 0"));
    }
    let (a, b) = seg.point(x)?;
    let m = spec.inner_matrix(&a, &b)?;
    Ok(m.eigenvalues().iter().map(|&l| 1.0 / (1.0 + l.powf(-1.0 / gamma))).sum())
}

/// Second derivative of [`epstein_value`] at `x`, from central second
/// differences at steps `h` and `2h` combined by Richardson extrapolation.
pub fn epstein_probe(spec: &LiebSpec, seg: &LineSegment, x: f64, step: f64) -> Result<f64> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid(format!("step must be positive, got {step}")));
    }
    let g = |t: f64| epstein_value(spec, seg, t);
    let g0 = g(x)?;
    let second = |h: f64| -> Result<f64> { Ok((g(x + h)? - 2.0 * g0 + g(x - h)?) / (h * h)) };
    let d1 = second(step)?;
    let d2 = second(2.0 * step)?;
    Ok((4.0 * d1 - d2) / 3.0)
}

/// Violation threshold for a probe at a point where the function is `value`.
pub fn epstein_tolerance(value: f64) -> f64 {
    1e-6 * (1.0 + value.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_posdef_with, TrialRng};
    use crate::scalar::ScalarFn;
    use rand::SeedableRng;

    fn scalar_segment(h: f64, k: f64) -> LineSegment {
        LineSegment::new(
            PosDefMatrix::scalar(1, 1.0),
            HermMatrix::from_real_diagonal(&[h]),
            PosDefMatrix::scalar(1, 1.0),
            HermMatrix::from_real_diagonal(&[k]),
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn constant_segment_is_flat() {
        let spec = LiebSpec::identity_maps(ScalarFn::power(1.0), 1, 1.0, 1.0).unwrap();
        let seg = scalar_segment(0.0, 0.0);
        assert!(epstein_probe(&spec, &seg, 0.1, EPSTEIN_STEP).unwrap().abs() < 1e-9);
    }

    #[test]
    fn scalar_closed_form() {
        // g(x) = (1+x)/(2+x) = 1 - 1/(2+x), so g''(0) = -2/8.
        let spec = LiebSpec::identity_maps(ScalarFn::power(1.0), 1, 1.0, 1.0).unwrap();
        let seg = LineSegment {
            a0: PosDefMatrix::scalar(1, 1.0),
            h: HermMatrix::from_real_diagonal(&[1.0]),
            b0: PosDefMatrix::scalar(1, 1.0),
            k: HermMatrix::from_real_diagonal(&[1.0]),
            x_max: 1.0,
        };
        let g = epstein_value(&spec, &seg, 0.0).unwrap();
        assert!((g - 0.5).abs() < 1e-15);
        let d = epstein_probe(&spec, &seg, 0.0, EPSTEIN_STEP).unwrap();
        assert!((d + 0.25).abs() < 1e-6, "{d}");
    }

    #[test]
    fn leaving_the_cone_is_reported() {
        let spec = LiebSpec::identity_maps(ScalarFn::power(1.0), 1, 1.0, 1.0).unwrap();
        let seg = LineSegment {
            a0: PosDefMatrix::scalar(1, 1.0),
            h: HermMatrix::from_real_diagonal(&[-10.0]),
            b0: PosDefMatrix::scalar(1, 1.0),
            k: HermMatrix::from_real_diagonal(&[0.0]),
            x_max: 0.05,
        };
        assert!(matches!(epstein_probe(&spec, &seg, 0.1, 1e-3), Err(Error::InvalidInput(_))));
        assert!(LineSegment::new(seg.a0.clone(), seg.h.clone(), seg.b0.clone(), seg.k.clone(), 1.0).is_err());
    }

    #[test]
    fn random_segments_are_concave_in_the_box() {
        let mut rng = TrialRng::seed_from_u64(31);
        let spec = LiebSpec::identity_maps(ScalarFn::power(1.0), 2, 0.5, 0.5).unwrap();
        for _ in 0..5 {
            let a = random_posdef_with(&mut rng, 2, 100.0);
            let b = random_posdef_with(&mut rng, 2, 100.0);
            let seg = LineSegment::random(&mut rng, a, b, 0.1).unwrap();
            for x in [0.01, 0.1] {
                let d = epstein_probe(&spec, &seg, x, EPSTEIN_STEP).unwrap();
                let g = epstein_value(&spec, &seg, x).unwrap();
                assert!(d <= epstein_tolerance(g), "{d}");
            }
        }
    }
}
