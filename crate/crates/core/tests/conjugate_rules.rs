//! Conjugates of powers against their closed forms, and the curvature of
//! `x -> hat(f)(x^r)` and `x -> check(f)(x^-r)`.

use lieblab::conjugate::{ConjugateDirection, ConjugateFn, SearchConfig};
use lieblab::scalar::ScalarFn;

fn conj(s: f64, direction: ConjugateDirection) -> ConjugateFn {
    ConjugateFn::new(ScalarFn::power(s), direction, SearchConfig::default()).unwrap()
}

/// `sup_x (x t - x^s) = (s - 1) (t/s)^(s/(s-1))` for `s > 1`; the same
/// expression is the infimum for `0 < s < 1`.
fn power_conjugate(s: f64, t: f64) -> f64 {
    (s - 1.0) * (t / s).powf(s / (s - 1.0))
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Largest normalized midpoint defect of `g` over pairs of grid points;
/// positive means `g` is not concave (or, with `concave = false`, not convex).
fn midpoint_defect(g: impl Fn(f64) -> f64, xs: &[f64], concave: bool) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        for &y in &xs[i + 1..] {
            let (gx, gy, gm) = (g(x), g(y), g(0.5 * (x + y)));
            let gap = if concave { 0.5 * (gx + gy) - gm } else { gm - 0.5 * (gx + gy) };
            worst = worst.max(gap / (1.0 + gx.abs() + gy.abs()));
        }
    }
    worst
}

#[test]
fn power_conjugates_match_closed_forms() {
    for s in [4.0 / 3.0, 1.5, 2.0, 3.0] {
        let h = conj(s, ConjugateDirection::Hat);
        for t in grid(15, 0.05, 20.0) {
            let want = power_conjugate(s, t);
            assert!((h.eval(t).unwrap() - want).abs() <= 1e-8 * (1.0 + want.abs()), "s={s} t={t}");
        }
    }
    for s in [0.3, 0.5, 0.8] {
        let c = conj(s, ConjugateDirection::Check);
        // The minimizer (s/t)^(1/(1-s)) stays inside the search bracket.
        for t in grid(15, 0.2, 20.0) {
            let want = power_conjugate(s, t);
            assert!((c.eval(t).unwrap() - want).abs() <= 1e-8 * (1.0 + want.abs()), "s={s} t={t}");
        }
    }
}

#[test]
fn hat_of_power_is_concave_after_substitution() {
    let xs = grid(25, 0.05, 20.0);
    for r in [0.25, 0.5] {
        let floor = 1.0 / (1.0 - r);
        for s in [floor, floor + 0.5, 3.0] {
            let h = conj(s, ConjugateDirection::Hat);
            let defect = midpoint_defect(|x| h.eval(x.powf(r)).unwrap(), &xs, true);
            assert!(defect <= 1e-8, "r={r} s={s}: {defect:e}");
        }
    }
}

#[test]
fn check_of_power_curvature_after_substitution() {
    let xs = grid(25, 0.05, 20.0);
    for r in [0.25, 0.5] {
        let ceiling = 1.0 / (1.0 + r);
        for s in [0.5 * ceiling, ceiling] {
            let c = conj(s, ConjugateDirection::Check);
            let defect = midpoint_defect(|x| c.eval(x.powf(-r)).unwrap(), &xs, false);
            assert!(defect <= 1e-8, "convex: r={r} s={s}: {defect:e}");
        }
        for s in [ceiling, 0.5 * (ceiling + 1.0)] {
            let c = conj(s, ConjugateDirection::Check);
            let defect = midpoint_defect(|x| c.eval(x.powf(-r)).unwrap(), &xs, true);
            assert!(defect <= 1e-8, "concave: r={r} s={s}: {defect:e}");
        }
    }
}

#[test]
fn minimizer_past_the_bracket_is_an_error() {
    // (0.8/0.05)^5 > 1e6
    let c = conj(0.8, ConjugateDirection::Check);
    assert!(matches!(c.eval(0.05), Err(lieblab::Error::Bracket { .. })));
}

#[test]
fn substitution_outside_the_range_loses_concavity() {
    // s below 1/(1-r): x -> hat(x^s)(x^r) = c x^{r s/(s-1)} with exponent > 1.
    let h = conj(1.2, ConjugateDirection::Hat);
    let defect = midpoint_defect(|x| h.eval(x.powf(0.5)).unwrap(), &grid(25, 0.05, 20.0), true);
    assert!(defect > 1e-3);
}
