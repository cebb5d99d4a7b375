//! Lieb-type trace functions, mean-norm functions and related functionals
//! built on strictly positive maps in Kraus form.

mod epstein;
mod map;
mod variational;

pub use epstein::{epstein_probe, epstein_tolerance, epstein_value, LineSegment, EPSTEIN_STEP};
pub use map::{MapKind, PosLinMap, UNITAL_TOL};
pub use variational::{
    perturbed_candidates, variational_inf, variational_optimizer, variational_sup, VariationalEstimate,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{expm_herm, HermMatrix, PosDefMatrix};
use crate::means::OperatorMean;
use crate::norms::NormSpec;
use crate::scalar::ScalarFn;

/// `f`, the two maps and the exponents of a two-variable functional.
#[derive(Clone, Debug, Serialize)]
pub struct LiebSpec {
    pub f: ScalarFn,
    pub phi: PosLinMap,
    pub psi: PosLinMap,
    pub p: f64,
    pub q: f64,
}

impl LiebSpec {
    pub fn new(f: ScalarFn, phi: PosLinMap, psi: PosLinMap, p: f64, q: f64) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::config(format!("exponents must be finite, got p = {p}, q = {q}")));
        }
        if p == 0.0 && q == 0.0 {
            return Err(Error::config("precondition (p,q) ≠ (0,0) violated: p = q = 0"));
        }
        if phi.out_dim() != psi.out_dim() {
            return Err(Error::DimensionMismatch {
                expected: phi.out_dim(),
                found: psi.out_dim(),
            });
        }
        Ok(Self { f, phi, psi, p, q })
    }

    /// Both maps the identity on `M_n`.
    pub fn identity_maps(f: ScalarFn, n: usize, p: f64, q: f64) -> Result<Self> {
        Self::new(f, PosLinMap::identity(n), PosLinMap::identity(n), p, q)
    }

    pub fn with_f(&self, f: ScalarFn) -> Self {
        Self { f, ..self.clone() }
    }

    /// `p + q`, the exponent governing the trace function.
    pub fn gamma_sum(&self) -> f64 {
        self.p + self.q
    }

    /// `max{p,q}` when both are non-negative, `min{p,q}` when both are
    /// non-positive, `None` for mixed signs.
    pub fn gamma_extreme(&self) -> Option<f64> {
        if self.p >= 0.0 && self.q >= 0.0 {
            Some(self.p.max(self.q))
        } else if self.p <= 0.0 && self.q <= 0.0 {
            Some(self.p.min(self.q))
        } else {
            None
        }
    }

    fn check_inputs(&self, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<()> {
        if a.dim() != self.phi.in_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.phi.in_dim(),
                found: a.dim(),
            });
        }
        if b.dim() != self.psi.in_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.psi.in_dim(),
                found: b.dim(),
            });
        }
        Ok(())
    }

    /// `(Phi(A^p), Psi(B^q))`.
    pub fn mapped_pair(&self, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<(PosDefMatrix, PosDefMatrix)> {
        self.check_inputs(a, b)?;
        Ok((
            self.phi.apply_pd(&a.power(self.p)?)?,
            self.psi.apply_pd(&b.power(self.q)?)?,
        ))
    }

    /// `Phi(A^p)^{1/2} Psi(B^q) Phi(A^p)^{1/2}`.
    pub fn inner_matrix(&self, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<PosDefMatrix> {
        let (pa, qb) = self.mapped_pair(a, b)?;
        qb.congruence(pa.sqrt()?.as_matrix())
    }

    fn negated_exponents(&self) -> Self {
        Self {
            p: -self.p,
            q: -self.q,
            ..self.clone()
        }
    }
}

#[derive(Deserialize)]
struct LiebSpecFile {
    f: ScalarFn,
    phi: PosLinMap,
    psi: PosLinMap,
    p: f64,
    q: f64,
}

impl<'de> Deserialize<'de> for LiebSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = LiebSpecFile::deserialize(d)?;
        LiebSpec::new(raw.f, raw.phi, raw.psi, raw.p, raw.q).map_err(serde::de::Error::custom)
    }
}

fn trace_of(f: &ScalarFn, spectrum: impl IntoIterator<Item = f64>) -> Result<f64> {
    spectrum.into_iter().map(|l| f.try_eval(l)).sum()
}

/// `Tr f(Phi(A^p)^{1/2} Psi(B^q) Phi(A^p)^{1/2})`.
pub fn lieb_trace(spec: &LiebSpec, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<f64> {
    let m = spec.inner_matrix(a, b)?;
    trace_of(&spec.f, m.eigenvalues().iter().copied())
}

/// `Tr f((Phi(A^{-p})^{1/2} Psi(B^{-q}) Phi(A^{-p})^{1/2})^{-1})`.
pub fn lieb_inverted(spec: &LiebSpec, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<f64> {
    let m = spec.negated_exponents().inner_matrix(a, b)?;
    trace_of(&spec.f, m.eigenvalues().iter().map(|&l| 1.0 / l))
}

/// Spectrum of `f(Phi(A^p) sigma Psi(B^q))`.
fn mean_fn_spectrum(spec: &LiebSpec, sigma: &OperatorMean, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<Vec<f64>> {
    let (pa, qb) = spec.mapped_pair(a, b)?;
    let m = sigma.apply(&pa, &qb)?;
    m.eigenvalues().iter().map(|&l| spec.f.try_eval(l)).collect()
}

/// `||f(Phi(A^p) sigma Psi(B^q))||` for a symmetric norm or anti-norm.
pub fn mean_norm_fn(
    spec: &LiebSpec,
    sigma: &OperatorMean,
    norm: &NormSpec,
    a: &PosDefMatrix,
    b: &PosDefMatrix,
) -> Result<f64> {
    let values = mean_fn_spectrum(spec, sigma, a, b)?;
    if norm.is_anti() {
        if let Some(&v) = values.iter().find(|&&v| v < 0.0) {
            return Err(Error::Domain {
                function: format!("{} under {norm}", spec.f.label()),
                at: v,
            });
        }
    }
    norm.eval_spectrum(&values)
}

/// `Tr f(Phi(A^p) sigma Psi(B^q))`.
pub fn mean_trace_fn(spec: &LiebSpec, sigma: &OperatorMean, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<f64> {
    Ok(mean_fn_spectrum(spec, sigma, a, b)?.into_iter().sum())
}

/// `Tr f(Phi(A^p)^r)`, or `||f(Phi(A^p)^r)||` when a norm is given.
pub fn map_power_fn(
    f: &ScalarFn,
    phi: &PosLinMap,
    p: f64,
    r: f64,
    norm: Option<&NormSpec>,
    a: &PosDefMatrix,
) -> Result<f64> {
    if p == 0.0 {
        return Err(Error::config("map_power_fn needs p ≠ 0"));
    }
    let pa = phi.apply_pd(&a.power(p)?)?;
    let values = pa
        .eigenvalues()
        .iter()
        .map(|&l| f.try_eval(l.powf(r)))
        .collect::<Result<Vec<_>>>()?;
    match norm {
        Some(n) => n.eval_spectrum(&values),
        None => Ok(values.into_iter().sum()),
    }
}

/// `Tr f(exp(alpha Phi(log A) + (1 - alpha) Psi(log B)))` for unital maps.
pub fn log_limit_trace(
    f: &ScalarFn,
    phi: &PosLinMap,
    psi: &PosLinMap,
    alpha: f64,
    a: &PosDefMatrix,
    b: &PosDefMatrix,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    for (name, m) in [("Phi", phi), ("Psi", psi)] {
        if !m.is_unital() {
            return Err(Error::invalid(format!("{name} must be unital")));
        }
    }
    if phi.out_dim() != psi.out_dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.out_dim(),
            found: psi.out_dim(),
        });
    }
    let h: HermMatrix = &(&phi.apply(&a.log())? * alpha) + &(&psi.apply(&b.log())? * (1.0 - alpha));
    expm_herm(&h)?.trace_fn(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_posdef_with, TrialRng};
    use rand::SeedableRng;

    fn id_spec(f: ScalarFn, n: usize, p: f64, q: f64) -> LiebSpec {
        LiebSpec::identity_maps(f, n, p, q).unwrap()
    }

    #[test]
    fn lieb_trace_fixtures() {
        let a = PosDefMatrix::diag(&[2.0, 3.0]).unwrap();
        let spec = id_spec(ScalarFn::power(1.0), 2, 1.0, 1.0);
        assert!((lieb_trace(&spec, &a, &PosDefMatrix::identity(2)).unwrap() - 5.0).abs() < 1e-14);

        let spec = id_spec(ScalarFn::power(0.5), 2, 1.0, 1.0);
        let v = lieb_trace(&spec, &PosDefMatrix::scalar(2, 2.0), &PosDefMatrix::scalar(2, 3.0)).unwrap();
        assert!((v - 2.0 * 6f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn zero_exponents_rejected() {
        let err = LiebSpec::identity_maps(ScalarFn::power(0.5), 2, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("(p,q) ≠ (0,0)"));
    }

    #[test]
    fn lieb_trace_is_symmetric_under_similarity() {
        let mut rng = TrialRng::seed_from_u64(21);
        for _ in 0..5 {
            let a = random_posdef_with(&mut rng, 3, 100.0);
            let b = random_posdef_with(&mut rng, 3, 100.0);
            let phi = PosLinMap::random(&mut rng, 3, 3, 2).unwrap();
            let psi = PosLinMap::random(&mut rng, 3, 3, 2).unwrap();
            let spec = LiebSpec::new(ScalarFn::power(0.7), phi, psi, 0.4, 0.6).unwrap();
            let v = lieb_trace(&spec, &a, &b).unwrap();
            let (pa, qb) = spec.mapped_pair(&a, &b).unwrap();
            let swapped = pa.congruence(qb.sqrt().unwrap().as_matrix()).unwrap();
            let w = swapped.trace_fn(&spec.f).unwrap();
            assert!((v - w).abs() < 1e-9);
        }
    }

    #[test]
    fn inverted_form_rewrites_powers() {
        let mut rng = TrialRng::seed_from_u64(22);
        let a = random_posdef_with(&mut rng, 2, 100.0);
        let b = random_posdef_with(&mut rng, 2, 100.0);
        let s = 0.8;
        let direct = lieb_trace(&id_spec(ScalarFn::power(s), 2, 0.5, 0.7), &a, &b).unwrap();
        let flipped = lieb_trace(&id_spec(ScalarFn::power(-s), 2, -0.5, -0.7), &a, &b).unwrap();
        assert!((direct - flipped).abs() < 1e-8);
        // With identity maps the inverted form has the same spectrum.
        let inverted = lieb_inverted(&id_spec(ScalarFn::power(s), 2, 0.5, 0.7), &a, &b).unwrap();
        assert!((direct - inverted).abs() < 1e-8);
    }

    #[test]
    fn mean_norm_fixtures() {
        let a = PosDefMatrix::diag(&[1.0, 2.0]).unwrap();
        let b = PosDefMatrix::diag(&[3.0, 4.0]).unwrap();
        let spec = id_spec(ScalarFn::power(1.0), 2, 1.0, 1.0);
        let v = mean_norm_fn(&spec, &OperatorMean::arithmetic(), &NormSpec::TraceNorm, &a, &b).unwrap();
        assert!((v - 5.0).abs() < 1e-14);

        let spec = id_spec(ScalarFn::power(0.5), 2, 1.0, 1.0);
        let v = mean_norm_fn(
            &spec,
            &OperatorMean::geometric(),
            &NormSpec::KyFanAnti { k: 2 },
            &PosDefMatrix::scalar(2, 4.0),
            &PosDefMatrix::scalar(2, 9.0),
        )
        .unwrap();
        assert!((v - 2.0 * 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn negative_values_rejected_under_anti_norms() {
        let spec = id_spec(ScalarFn::log(), 2, 1.0, 1.0);
        let a = PosDefMatrix::scalar(2, 0.5);
        let err = mean_norm_fn(&spec, &OperatorMean::geometric(), &NormSpec::KyFanAnti { k: 1 }, &a, &a);
        assert!(matches!(err, Err(Error::Domain { .. })));
    }

    #[test]
    fn mean_norm_matches_direct_one_variable_form() {
        let mut rng = TrialRng::seed_from_u64(23);
        let a = random_posdef_with(&mut rng, 3, 100.0);
        let phi = PosLinMap::random(&mut rng, 3, 3, 2).unwrap();
        let p = 0.6;
        let h = ScalarFn::power(0.5);
        let norm = NormSpec::KyFanAnti { k: 2 };
        let spec = LiebSpec::new(h.compose_power(1.0 / p), phi.clone(), phi.clone(), p, p).unwrap();
        let via_mean = mean_norm_fn(&spec, &OperatorMean::arithmetic(), &norm, &a, &a).unwrap();
        let direct = map_power_fn(&h, &phi, p, 1.0 / p, Some(&norm), &a).unwrap();
        // Oracle: spectrum of Phi(A^p), raised to 1/p, then h.
        let pa = phi.apply_pd(&a.power(p).unwrap()).unwrap();
        let mut vals: Vec<f64> = pa.eigenvalues().iter().map(|l| l.powf(1.0 / p).sqrt()).collect();
        vals.sort_by(f64::total_cmp);
        let oracle = vals[0] + vals[1];
        assert!((via_mean - oracle).abs() < 1e-10);
        assert!((direct - oracle).abs() < 1e-10);
    }

    #[test]
    fn log_limit_fixtures() {
        let id1 = PosLinMap::identity(1);
        let id2 = PosLinMap::identity(2);
        let a = PosDefMatrix::diag(&[2.0, 5.0]).unwrap();
        let f = ScalarFn::power(1.0);
        assert!((log_limit_trace(&f, &id2, &id2, 1.0, &a, &a).unwrap() - 7.0).abs() < 1e-12);
        let v = log_limit_trace(
            &f,
            &id1,
            &id1,
            0.5,
            &PosDefMatrix::scalar(1, 4.0),
            &PosDefMatrix::scalar(1, 9.0),
        )
        .unwrap();
        assert!((v - 6.0).abs() < 1e-12);
        let mut rng = TrialRng::seed_from_u64(3);
        let non_unital = PosLinMap::random(&mut rng, 2, 2, 2).unwrap();
        assert!(log_limit_trace(&f, &non_unital, &id2, 0.5, &a, &a).is_err());
    }

    #[test]
    fn log_limit_is_small_power_limit() {
        let mut rng = TrialRng::seed_from_u64(24);
        let a = random_posdef_with(&mut rng, 2, 100.0);
        let b = random_posdef_with(&mut rng, 2, 100.0);
        let phi = PosLinMap::random_unital(&mut rng, 2, 2, 2).unwrap();
        let psi = PosLinMap::random_unital(&mut rng, 2, 2, 2).unwrap();
        let alpha = 0.3;
        let f = ScalarFn::power(1.0);
        let exact = log_limit_trace(&f, &phi, &psi, alpha, &a, &b).unwrap();
        // Phi(A^{alpha r})^{1/2r} Psi(B^{(1-alpha) r})^{1/r} Phi(A^{alpha r})^{1/2r} at small r.
        let r = 1e-3;
        let pa = phi.apply_pd(&a.power(alpha * r).unwrap()).unwrap().power(0.5 / r).unwrap();
        let qb = psi.apply_pd(&b.power((1.0 - alpha) * r).unwrap()).unwrap().power(1.0 / r).unwrap();
        let approx = qb.congruence(pa.as_matrix()).unwrap().trace();
        assert!((approx - exact).abs() <= 1e-2 * exact.abs());
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"f": {"kind": "power", "params": {"s": 0.5}},
            "phi": {"kraus": [{"re": [[1,0],[0,1]], "im": [[0,0],[0,0]]}]},
            "psi": {"kraus": [{"re": [[1,0],[0,1]], "im": [[0,0],[0,0]]}]},
            "p": 1, "q": 1}"#;
        let spec: LiebSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.phi.out_dim(), 2);
        let back: LiebSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back.p, 1.0);
        let bad = text.replace("\"p\": 1, \"q\": 1", "\"p\": 0, \"q\": 0");
        let err = serde_json::from_str::<LiebSpec>(&bad).unwrap_err();
        assert!(err.to_string().contains("(p,q) ≠ (0,0)"));
    }

    #[test]
    fn gamma_rules() {
        let s = |p, q| id_spec(ScalarFn::power(0.5), 1, p, q);
        assert_eq!(s(0.3, 0.7).gamma_extreme(), Some(0.7));
        assert_eq!(s(-0.3, -0.7).gamma_extreme(), Some(-0.7));
        assert_eq!(s(-0.3, 0.7).gamma_extreme(), None);
        assert_eq!(s(0.3, 0.7).gamma_sum(), 1.0);
    }
}
