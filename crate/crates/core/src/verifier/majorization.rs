use crate::error::{Error, Result};

/// `u ≺_w v`: every descending partial sum of `u` is at most that of `v`.
pub fn weak_majorization(u: &[f64], v: &[f64]) -> Result<bool> {
    weak_majorization_tol(u, v, 0.0)
}

/// [`weak_majorization`] with partial sums compared up to `tol`.
pub fn weak_majorization_tol(u: &[f64], v: &[f64], tol: f64) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::invalid("majorization needs finite vectors"));
    }
    let desc = |x: &[f64]| {
        let mut s = x.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (u, v) = (desc(u), desc(v));
    let (mut su, mut sv) = (0.0, 0.0);
    for (a, b) in u.iter().zip(&v) {
        su += a;
        sv += b;
        if su > sv + tol {
            return Ok(false);
        }
    }
    Ok(true)
}
