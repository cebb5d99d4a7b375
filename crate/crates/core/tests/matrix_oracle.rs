//! Spectral routines against an independent characteristic-polynomial oracle,
//! plus functional-calculus invariants.

use lieblab::matrix::{random_posdef_with, random_unitary, HermMatrix, PosDefMatrix, TrialRng};
use lieblab::scalar::ScalarFn;
use proptest::prelude::*;
use rand::SeedableRng;

/// Eigenvalues of a Hermitian 3x3 matrix from its characteristic cubic,
/// solved with the trigonometric formula for three real roots.
fn cubic_eigenvalues(m: &HermMatrix) -> [f64; 3] {
    let e = |i, j| m.get(i, j);
    let tr = m.trace();
    let minors = (e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0))
        + (e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0))
        + (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1));
    let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    let (c1, c0) = (minors.re, det.re);
    // x^3 - tr x^2 + c1 x - c0, shifted by x = y + tr/3.
    let shift = tr / 3.0;
    let p = c1 - tr * tr / 3.0;
    let q = -2.0 * tr.powi(3) / 27.0 + tr * c1 / 3.0 - c0;
    let mut roots = if p.abs() < 1e-300 {
        [shift; 3]
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        [0.0, 1.0, 2.0].map(|k| shift + r * (theta - 2.0 * std::f64::consts::PI * k / 3.0).cos())
    };
    roots.sort_by(f64::total_cmp);
    roots
}

fn two_by_two_eigenvalues(m: &HermMatrix) -> [f64; 2] {
    let (a, d) = (m.get(0, 0).re, m.get(1, 1).re);
    let b = m.get(0, 1).norm();
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d).powi(2) + b * b).sqrt();
    [mid - rad, mid + rad]
}

fn random_pd(seed: u64, dim: usize) -> PosDefMatrix {
    random_posdef_with(&mut TrialRng::seed_from_u64(seed), dim, 100.0)
}

#[test]
fn eigenvalues_match_closed_forms() {
    for seed in 0..200 {
        let a = random_pd(seed, 2);
        let want = two_by_two_eigenvalues(a.base());
        for (got, want) in a.base().eigenvalues().iter().zip(want) {
            assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "seed {seed}: {got} vs {want}");
        }

        let b = random_pd(seed, 3);
        let want = cubic_eigenvalues(b.base());
        for (got, want) in b.base().eigenvalues().iter().zip(want) {
            assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()), "seed {seed}: {got} vs {want}");
        }
    }
}

#[test]
fn repeated_eigenvalues() {
    let m = HermMatrix::from_real_rows(&[&[2.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 5.0]]).unwrap();
    assert_eq!(m.eigenvalues(), vec![2.0, 2.0, 5.0]);
    let u = random_unitary(&mut TrialRng::seed_from_u64(3), 3);
    let rotated = HermMatrix::hermitian_part(&(&u * m.as_matrix() * u.adjoint()));
    for (got, want) in rotated.eigenvalues().iter().zip([2.0, 2.0, 5.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn prop_power_of_power(seed in any::<u64>(), dim in 1usize..5, p in -2.0f64..2.0, q in -2.0f64..2.0) {
        let a = random_pd(seed, dim);
        let lhs = a.power(p).unwrap().power(q).unwrap();
        let rhs = a.power(p * q).unwrap();
        prop_assert!(lhs.base().rel_frobenius_diff(rhs.base()) <= 1e-8);
    }

    #[test]
    fn prop_unitary_covariance(seed in any::<u64>(), dim in 1usize..5, s in -1.5f64..2.5) {
        let mut rng = TrialRng::seed_from_u64(seed);
        let a = random_posdef_with(&mut rng, dim, 100.0);
        let u = random_unitary(&mut rng, dim);
        let f = ScalarFn::power(s);
        let rotated = a.congruence(&u.adjoint()).unwrap();
        let lhs = rotated.apply_fn(&f).unwrap();
        let rhs = a.apply_fn(&f).unwrap().congruence(&u.adjoint());
        let scale = 1.0 + rhs.as_matrix().norm();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * scale);
    }

    #[test]
    fn prop_trace_is_spectral_sum(seed in any::<u64>(), dim in 1usize..5) {
        let a = random_pd(seed, dim);
        for f in [ScalarFn::log(), ScalarFn::power(0.5), ScalarFn::saturating()] {
            let direct: f64 = a.eigenvalues().iter().map(|&l| f.eval(l)).sum();
            let via = a.apply_fn(&f).unwrap().trace();
            prop_assert!((direct - via).abs() <= 1e-12 * (1.0 + direct.abs()));
            prop_assert_eq!(a.trace_fn(&f).unwrap(), direct);
        }
    }
}
