//! Kubo-Ando operator means `A # B = A^{1/2} m(A^{-1/2} B A^{-1/2}) A^{1/2}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{HermMatrix, PosDefMatrix};
use crate::scalar::{Atom, FnClass, PickIntegralFn, ScalarFn};

/// Tolerance on the normalization `m(1) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeanDescriptor {
    Arithmetic,
    Geometric,
    Harmonic,
    /// Weighted geometric mean, `m(x) = x^alpha` with `0 <= alpha <= 1`.
    Power { alpha: f64 },
    /// User mean from an integral representation, rescaled to `m(1) = 1`.
    Pick { rep: PickIntegralFn },
    /// `A #* B = (A^{-1} # B^{-1})^{-1}`.
    Adjoint { of: Box<MeanDescriptor> },
}

#[derive(Clone, Debug)]
pub struct OperatorMean {
    desc: MeanDescriptor,
    rep: ScalarFn,
}

impl OperatorMean {
    pub fn new(desc: MeanDescriptor) -> Result<Self> {
        let (desc, rep) = match desc {
            MeanDescriptor::Arithmetic => (desc, ScalarFn::affine(0.5, 0.5)),
            MeanDescriptor::Geometric => (desc, ScalarFn::power(0.5)),
            MeanDescriptor::Harmonic => {
                // 2x/(1+x) = 1 + (1/2)(x-1)(1+1)/(x+1)
                let rep = ScalarFn::pick_integral(1.0, 0.0, vec![Atom { lambda: 1.0, weight: 0.5 }])?;
                (desc, rep)
            }
            MeanDescriptor::Power { alpha } => {
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::invalid(format!(
                        "weighted geometric mean needs 0 <= alpha <= 1, got {alpha}"
                    )));
                }
                (desc, ScalarFn::power(alpha))
            }
            MeanDescriptor::Pick { rep } => {
                rep.validate()?;
                let rep = rep.normalized()?;
                let f = ScalarFn::pick(rep.clone())?;
                (MeanDescriptor::Pick { rep }, f)
            }
            MeanDescriptor::Adjoint { of } => {
                let inner = OperatorMean::new(*of)?;
                let m = inner.rep.clone();
                let rep = ScalarFn::custom(
                    format!("1/({})(1/x)", m.label()),
                    FnClass::OPERATOR_MONOTONE,
                    move |x| 1.0 / m.eval(1.0 / x),
                );
                (
                    MeanDescriptor::Adjoint {
                        of: Box::new(inner.desc),
                    },
                    rep,
                )
            }
        };
        let at_one = rep.eval(1.0);
        if (at_one - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!(
                "representing function must satisfy m(1) = 1, got {at_one}"
            )));
        }
        Ok(Self { desc, rep })
    }

    pub fn arithmetic() -> Self {
        Self::new(MeanDescriptor::Arithmetic).expect("built-in mean")
    }

    pub fn geometric() -> Self {
        Self::new(MeanDescriptor::Geometric).expect("built-in mean")
    }

    pub fn harmonic() -> Self {
        Self::new(MeanDescriptor::Harmonic).expect("built-in mean")
    }

    pub fn weighted_geometric(alpha: f64) -> Result<Self> {
        Self::new(MeanDescriptor::Power { alpha })
    }

    pub fn descriptor(&self) -> &MeanDescriptor {
        &self.desc
    }

    /// Representing function `m`, with `A # B = m(B)` whenever `A = I`.
    pub fn rep_fn(&self) -> &ScalarFn {
        &self.rep
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// The adjoint mean, realized through `(A^{-1} # B^{-1})^{-1}`.
    pub fn adjoint(&self) -> OperatorMean {
        Self::new(MeanDescriptor::Adjoint {
            of: Box::new(self.desc.clone()),
        })
        .expect("adjoint of a valid mean is valid")
    }

    pub fn apply(&self, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<PosDefMatrix> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        match &self.desc {
            MeanDescriptor::Arithmetic => PosDefMatrix::midpoint(a, b),
            MeanDescriptor::Adjoint { of } => {
                let inner = OperatorMean::new((**of).clone())?;
                inner.apply(&a.inverse()?, &b.inverse()?)?.inverse()
            }
            _ => {
                let a_half = a.sqrt()?;
                let a_neg_half = a.power(-0.5)?;
                let inner = b.congruence(a_neg_half.as_matrix())?;
                let m = inner.apply_fn(&self.rep)?;
                let out = HermMatrix::hermitian_part(
                    &(a_half.as_matrix() * m.as_matrix() * a_half.as_matrix()),
                );
                PosDefMatrix::new(out)
            }
        }
    }
}

impl fmt::Display for OperatorMean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.desc, f)
    }
}

impl fmt::Display for MeanDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanDescriptor::Arithmetic => f.write_str("arithmetic"),
            MeanDescriptor::Geometric => f.write_str("geometric"),
            MeanDescriptor::Harmonic => f.write_str("harmonic"),
            MeanDescriptor::Power { alpha } => write!(f, "power({alpha})"),
            MeanDescriptor::Pick { rep } => write!(f, "pick(b={},atoms={})", rep.b, rep.atoms.len()),
            MeanDescriptor::Adjoint { of } => write!(f, "adjoint({of})"),
        }
    }
}

impl Serialize for OperatorMean {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.desc.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorMean {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let desc = MeanDescriptor::deserialize(d)?;
        OperatorMean::new(desc).map_err(serde::de::Error::custom)
    }
}

pub fn mean_apply(sigma: &OperatorMean, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<PosDefMatrix> {
    sigma.apply(a, b)
}

pub fn adjoint_mean(sigma: &OperatorMean) -> OperatorMean {
    sigma.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_posdef_with, TrialRng};
    use rand::SeedableRng;

    fn close(a: &PosDefMatrix, b: &PosDefMatrix, tol: f64) -> bool {
        a.base().max_abs_diff(b.base()) <= tol
    }

    #[test]
    fn scalar_and_diagonal_cases() {
        let a = PosDefMatrix::scalar(2, 4.0);
        let b = PosDefMatrix::scalar(2, 9.0);
        let g = OperatorMean::geometric().apply(&a, &b).unwrap();
        assert!(close(&g, &PosDefMatrix::scalar(2, 6.0), 1e-12));

        let a = PosDefMatrix::diag(&[1.0, 2.0]).unwrap();
        let b = PosDefMatrix::diag(&[3.0, 4.0]).unwrap();
        let m = OperatorMean::arithmetic().apply(&a, &b).unwrap();
        assert!(close(&m, &PosDefMatrix::diag(&[2.0, 3.0]).unwrap(), 1e-15));
    }

    #[test]
    fn adjoint_of_arithmetic_is_harmonic() {
        let a = PosDefMatrix::diag(&[1.0]).unwrap();
        let b = PosDefMatrix::diag(&[3.0]).unwrap();
        let h = OperatorMean::arithmetic().adjoint().apply(&a, &b).unwrap();
        assert!((h.trace() - 1.5).abs() < 1e-14);
        let direct = OperatorMean::harmonic().apply(&a, &b).unwrap();
        assert!((direct.trace() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn geometric_is_self_adjoint() {
        let a = PosDefMatrix::scalar(2, 4.0);
        let b = PosDefMatrix::scalar(2, 9.0);
        let g = OperatorMean::geometric().adjoint().apply(&a, &b).unwrap();
        assert!(close(&g, &PosDefMatrix::scalar(2, 6.0), 1e-12));
    }

    #[test]
    fn every_mean_fixes_the_diagonal() {
        let mut rng = TrialRng::seed_from_u64(2);
        let means = [
            OperatorMean::arithmetic(),
            OperatorMean::geometric(),
            OperatorMean::harmonic(),
            OperatorMean::weighted_geometric(0.3).unwrap(),
            OperatorMean::harmonic().adjoint(),
        ];
        for sigma in &means {
            let a = random_posdef_with(&mut rng, 3, 100.0);
            let out = sigma.apply(&a, &a).unwrap();
            assert!(close(&out, &a, 1e-10), "{sigma}");
        }
    }

    #[test]
    fn double_adjoint_and_operational_identity() {
        let mut rng = TrialRng::seed_from_u64(3);
        for sigma in [OperatorMean::geometric(), OperatorMean::weighted_geometric(0.2).unwrap()] {
            let a = random_posdef_with(&mut rng, 2, 100.0);
            let b = random_posdef_with(&mut rng, 2, 100.0);
            let star = sigma.adjoint();
            let lhs = star.apply(&a, &b).unwrap();
            let rhs = sigma.apply(&a.inverse().unwrap(), &b.inverse().unwrap()).unwrap().inverse().unwrap();
            assert!(close(&lhs, &rhs, 1e-9));
            let back = star.adjoint().apply(&a, &b).unwrap();
            assert!(close(&back, &sigma.apply(&a, &b).unwrap(), 1e-9));
        }
    }

    #[test]
    fn user_mean_is_normalized() {
        let rep = PickIntegralFn::new(2.0, 0.0, vec![Atom { lambda: 3.0, weight: 1.0 }]).unwrap();
        let sigma = OperatorMean::new(MeanDescriptor::Pick { rep }).unwrap();
        assert!((sigma.rep_fn().eval(1.0) - 1.0).abs() < 1e-15);
        assert!(OperatorMean::weighted_geometric(1.5).is_err());
        let neg = PickIntegralFn::new(-1.0, 0.0, vec![]).unwrap();
        assert!(OperatorMean::new(MeanDescriptor::Pick { rep: neg }).is_err());
    }

    #[test]
    fn descriptor_json() {
        let m: OperatorMean = serde_json::from_str(r#"{"kind": "power", "alpha": 0.25}"#).unwrap();
        assert_eq!(m.descriptor(), &MeanDescriptor::Power { alpha: 0.25 });
        let h: OperatorMean = serde_json::from_str(r#"{"kind": "harmonic"}"#).unwrap();
        assert_eq!(h.label(), "harmonic");
    }

    #[test]
    fn dimension_mismatch() {
        let a = PosDefMatrix::identity(2);
        let b = PosDefMatrix::identity(3);
        assert!(OperatorMean::geometric().apply(&a, &b).is_err());
    }
}
