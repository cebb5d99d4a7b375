use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    max_abs_diff, random_complex_gaussian, CMatrix, HermMatrix, PosDefMatrix, RectMatrixFile, PD_FLOOR,
};

/// Tolerance on `Phi(I) = I` for the unital check.
pub const UNITAL_TOL: f64 = 1e-10;

/// Completely positive map `M_n -> M_l` in Kraus form,
/// `Phi(X) = sum_i K_i X K_i*` with `l x n` operators `K_i`.
///
/// Construction requires strict positivity, i.e. `Phi(I_n)` positive definite.
#[derive(Clone, Debug, PartialEq)]
pub struct PosLinMap {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<CMatrix>,
}

impl PosLinMap {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::invalid("a Kraus representation needs at least one operator"))?;
        let (out_dim, in_dim) = first.shape();
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::invalid("Kraus operators must be non-empty"));
        }
        for k in &kraus {
            if k.shape() != (out_dim, in_dim) {
                return Err(Error::invalid(format!(
                    "Kraus operators disagree in shape: {:?} vs {:?}",
                    k.shape(),
                    (out_dim, in_dim)
                )));
            }
        }
        let map = Self {
            in_dim,
            out_dim,
            kraus,
        };
        let unit = map.image_of_identity();
        let min = unit.eigenvalues()[0];
        if !(min > PD_FLOOR) {
            return Err(Error::invalid(format!(
                "map is not strictly positive: smallest eigenvalue of Phi(I) is {min:e}"
            )));
        }
        Ok(map)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            in_dim: n,
            out_dim: n,
            kraus: vec![CMatrix::identity(n, n)],
        }
    }

    /// `Phi(A) = X* A X` for an `n x l` matrix `X` of full column rank.
    pub fn congruence(x: &CMatrix) -> Result<Self> {
        Self::new(vec![x.adjoint()])
    }

    /// Compression onto the range of an isometry `V` (`n x l`),
    /// `Phi(A) = V* A V`, identifying `E M_n E` with `M_l` for `E = V V*`.
    pub fn compression(v: &CMatrix) -> Result<Self> {
        Self::congruence(v)
    }

    /// Pinching by the blocks of a partition of `0..n` into index sets.
    pub fn pinching(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let kraus = blocks
            .iter()
            .map(|block| {
                let mut p = CMatrix::zeros(n, n);
                for &i in block {
                    p[(i, i)] = 1.0.into();
                }
                p
            })
            .collect();
        Self::new(kraus)
    }

    /// `rank` Gaussian Kraus operators scaled so that `E Phi(I) = I`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, l: usize, rank: usize) -> Result<Self> {
        let rank = rank.max(1);
        let scale = 1.0 / ((n * rank) as f64).sqrt();
        for _ in 0..16 {
            let kraus = (0..rank)
                .map(|_| random_complex_gaussian(rng, l, n).scale(scale))
                .collect();
            if let Ok(map) = Self::new(kraus) {
                return Ok(map);
            }
        }
        Err(Error::invalid(format!(
            "could not sample a strictly positive {n}->{l} map of Kraus rank {rank}"
        )))
    }

    /// `Phi(A) = X* A X` with a random (almost surely invertible) `X`.
    pub fn random_congruence<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Self> {
        let scale = 1.0 / (n as f64).sqrt();
        for _ in 0..16 {
            let x = random_complex_gaussian(rng, n, n).scale(scale);
            if let Ok(map) = Self::congruence(&x) {
                return Ok(map);
            }
        }
        Err(Error::invalid("could not sample an invertible congruence"))
    }

    /// Random unital map: `K_i -> T^{-1/2} K_i` with `T = sum K_i K_i*`.
    pub fn random_unital<R: Rng + ?Sized>(rng: &mut R, n: usize, l: usize, rank: usize) -> Result<Self> {
        let raw = Self::random(rng, n, l, rank)?;
        let t = PosDefMatrix::new(raw.image_of_identity())?;
        let t_inv_half = t.power(-0.5)?;
        let kraus = raw
            .kraus
            .iter()
            .map(|k| t_inv_half.as_matrix() * k)
            .collect();
        Self::new(kraus)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    fn image_of_identity(&self) -> HermMatrix {
        let mut acc = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            acc += k * k.adjoint();
        }
        HermMatrix::hermitian_part(&acc)
    }

    pub fn is_unital(&self) -> bool {
        max_abs_diff(
            self.image_of_identity().as_matrix(),
            &CMatrix::identity(self.out_dim, self.out_dim),
        ) <= UNITAL_TOL
    }

    pub fn apply(&self, x: &HermMatrix) -> Result<HermMatrix> {
        if x.dim() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                found: x.dim(),
            });
        }
        let mut acc = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            acc += k * x.as_matrix() * k.adjoint();
        }
        Ok(HermMatrix::hermitian_part(&acc))
    }

    /// Image of a positive definite matrix, positive definite by strict positivity.
    pub fn apply_pd(&self, a: &PosDefMatrix) -> Result<PosDefMatrix> {
        PosDefMatrix::new(self.apply(a.base())?)
    }
}

#[derive(Serialize, Deserialize)]
struct KrausFile {
    kraus: Vec<RectMatrixFile>,
}

impl Serialize for PosLinMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KrausFile {
            kraus: self.kraus.iter().map(RectMatrixFile::from).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PosLinMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = KrausFile::deserialize(d)?;
        let kraus = file
            .kraus
            .iter()
            .map(RectMatrixFile::to_matrix)
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        PosLinMap::new(kraus).map_err(serde::de::Error::custom)
    }
}

/// How a map is chosen for each sampled trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    Identity,
    RandomKraus { rank: usize },
    RandomCongruence,
    RandomUnital { rank: usize },
}

impl MapKind {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, l: usize) -> Result<PosLinMap> {
        match *self {
            MapKind::Identity => {
                if n != l {
                    return Err(Error::DimensionMismatch { expected: l, found: n });
                }
                Ok(PosLinMap::identity(n))
            }
            MapKind::RandomKraus { rank } => PosLinMap::random(rng, n, l, rank),
            MapKind::RandomCongruence => {
                if n != l {
                    return Err(Error::DimensionMismatch { expected: l, found: n });
                }
                PosLinMap::random_congruence(rng, n)
            }
            MapKind::RandomUnital { rank } => PosLinMap::random_unital(rng, n, l, rank),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, MapKind::Identity)
    }
}
