//! Dense Hermitian linear algebra.
//!
//! [`HermMatrix`] is the ambient type of the functional calculus, and
//! [`PosDefMatrix`] additionally caches its spectral decomposition so powers,
//! inverses and `f(A)` reuse one eigensolve.

mod io;
mod jacobi;
mod random;

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::ScalarFn;

pub use io::{MatrixFile, RectMatrixFile};
pub use random::{
    random_complex_gaussian, random_hermitian, random_posdef, random_posdef_with, random_unitary,
    TrialRng,
};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Absolute tolerance on `|a_ij - conj(a_ji)|` accepted from callers.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues at or below this value reject [`PosDefMatrix`] construction.
pub const PD_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct HermMatrix {
    m: CMatrix,
}

impl HermMatrix {
    /// Checks squareness and Hermitian symmetry within [`HERMITIAN_TOL`], then
    /// stores the exact Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                if d > HERMITIAN_TOL || !d.is_finite() {
                    return Err(Error::invalid(format!(
                        "matrix is not Hermitian: entry ({i},{j}) differs from the conjugate transpose by {d:e}"
                    )));
                }
            }
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(m + m*) / 2`, used internally on products that are Hermitian up to rounding.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        let h = (m + m.adjoint()).scale(0.5);
        Self { m: h }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: CMatrix::zeros(n, n),
        }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            m: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(d[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    /// Builds a real symmetric matrix from row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("rows must form a square matrix"));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn eig(&self) -> SpectralDecomp {
        let (eigenvalues, unitary) = jacobi::eigh(&self.m);
        SpectralDecomp {
            eigenvalues,
            unitary,
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eig().eigenvalues
    }

    /// Spectral functional calculus `U diag(f(l_i)) U*` for an arbitrary
    /// real function on the spectrum.
    pub fn map_spectrum(&self, label: &str, f: impl Fn(f64) -> f64) -> Result<HermMatrix> {
        self.eig().reconstruct_with(label, f)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            m: self.m.scale(c),
        }
    }

    /// `(a + b) / 2`
    pub fn midpoint(a: &Self, b: &Self) -> Self {
        Self {
            m: (&a.m + &b.m).scale(0.5),
        }
    }

    /// `x* H x` for a (possibly rectangular) `x`.
    pub fn congruence(&self, x: &CMatrix) -> Self {
        Self::hermitian_part(&(x.adjoint() * &self.m * x))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.m, &other.m)
    }

    /// `|A - B|_F / max(|B|_F, tiny)`
    pub fn rel_frobenius_diff(&self, other: &Self) -> f64 {
        let num = (&self.m - &other.m).norm();
        num / other.m.norm().max(f64::MIN_POSITIVE)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for &HermMatrix {
    type Output = HermMatrix;
    fn add(self, rhs: &HermMatrix) -> HermMatrix {
        HermMatrix {
            m: &self.m + &rhs.m,
        }
    }
}

impl Sub for &HermMatrix {
    type Output = HermMatrix;
    fn sub(self, rhs: &HermMatrix) -> HermMatrix {
        HermMatrix {
            m: &self.m - &rhs.m,
        }
    }
}

impl Mul<f64> for &HermMatrix {
    type Output = HermMatrix;
    fn mul(self, rhs: f64) -> HermMatrix {
        self.scale(rhs)
    }
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues ascending with the unitary of eigenvectors (as columns).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomp {
    pub eigenvalues: Vec<f64>,
    pub unitary: CMatrix,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> HermMatrix {
        self.reconstruct_unchecked(|x| x)
    }

    pub fn reconstruct_with(&self, label: &str, f: impl Fn(f64) -> f64) -> Result<HermMatrix> {
        for &l in &self.eigenvalues {
            let y = f(l);
            if !y.is_finite() {
                return Err(Error::Domain {
                    function: label.to_string(),
                    at: l,
                });
            }
        }
        Ok(self.reconstruct_unchecked(f))
    }

    fn reconstruct_unchecked(&self, f: impl Fn(f64) -> f64) -> HermMatrix {
        let n = self.dim();
        let u = &self.unitary;
        let mut scaled = u.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        HermMatrix::hermitian_part(&(scaled * u.adjoint()))
    }

    /// `|U U* - I|_max`
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        max_abs_diff(
            &(&self.unitary * self.unitary.adjoint()),
            &CMatrix::identity(n, n),
        )
    }
}

/// A Hermitian matrix whose eigenvalues all exceed [`PD_FLOOR`], with its
/// spectral decomposition cached.
#[derive(Clone, Debug, PartialEq)]
pub struct PosDefMatrix {
    base: HermMatrix,
    eig: SpectralDecomp,
}

impl PosDefMatrix {
    pub fn new(base: HermMatrix) -> Result<Self> {
        if !base.is_finite() {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let eig = base.eig();
        let min = eig.eigenvalues[0];
        if !(min > PD_FLOOR) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        Ok(Self { base, eig })
    }

    /// Builds `U diag(values) U*`; the decomposition is re-derived from the
    /// assembled matrix so the cached eigensystem always comes from the solver.
    pub fn from_spectrum(values: &[f64], unitary: &CMatrix) -> Result<Self> {
        if values.len() != unitary.nrows() || unitary.nrows() != unitary.ncols() {
            return Err(Error::invalid("spectrum and unitary sizes disagree"));
        }
        let d = SpectralDecomp {
            eigenvalues: values.to_vec(),
            unitary: unitary.clone(),
        };
        Self::new(d.reconstruct())
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    /// `c I_n`, `c > 0`.
    pub fn scalar(n: usize, c: f64) -> Self {
        Self::diag(&vec![c; n]).expect("positive scalar")
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        Self::new(HermMatrix::from_real_diagonal(d))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(HermMatrix::from_real_rows(rows)?)
    }

    pub fn base(&self) -> &HermMatrix {
        &self.base
    }

    pub fn into_base(self) -> HermMatrix {
        self.base
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.base.as_matrix()
    }

    pub fn eig(&self) -> &SpectralDecomp {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn trace(&self) -> f64 {
        self.base.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eig.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn condition_number(&self) -> f64 {
        self.max_eigenvalue() / self.min_eigenvalue()
    }

    /// `U diag(f(l_i)) U*`
    pub fn apply_fn(&self, f: &ScalarFn) -> Result<HermMatrix> {
        self.eig.reconstruct_with(f.label(), |x| f.eval(x))
    }

    pub fn map(&self, label: &str, f: impl Fn(f64) -> f64) -> Result<HermMatrix> {
        self.eig.reconstruct_with(label, f)
    }

    /// `Tr f(A) = sum_i f(l_i)`, straight from the cached spectrum.
    pub fn trace_fn(&self, f: &ScalarFn) -> Result<f64> {
        let mut acc = 0.0;
        for &l in self.eigenvalues() {
            acc += f.try_eval(l)?;
        }
        Ok(acc)
    }

    /// Real power `A^p` through the spectrum.
    pub fn power(&self, p: f64) -> Result<PosDefMatrix> {
        if p == 1.0 {
            return Ok(self.clone());
        }
        if p == 0.0 {
            return Ok(Self::identity(self.dim()));
        }
        let h = self.eig.reconstruct_with("x^p", |x| x.powf(p))?;
        Self::new(h)
    }

    pub fn sqrt(&self) -> Result<PosDefMatrix> {
        self.power(0.5)
    }

    pub fn inverse(&self) -> Result<PosDefMatrix> {
        self.power(-1.0)
    }

    /// `log A` (Hermitian, not necessarily positive).
    pub fn log(&self) -> HermMatrix {
        self.eig
            .reconstruct_with("log", f64::ln)
            .expect("log of positive spectrum is finite")
    }

    /// `(a + b) / 2`, positive definite whenever both inputs are.
    pub fn midpoint(a: &Self, b: &Self) -> Result<Self> {
        Self::new(HermMatrix::midpoint(&a.base, &b.base))
    }

    /// `x* A x`; fails if the congruence is not positive definite.
    pub fn congruence(&self, x: &CMatrix) -> Result<Self> {
        Self::new(self.base.congruence(x))
    }
}

/// Free-function spelling of [`PosDefMatrix::apply_fn`].
pub fn apply_fn(a: &PosDefMatrix, f: &ScalarFn) -> Result<HermMatrix> {
    a.apply_fn(f)
}

/// Free-function spelling of [`PosDefMatrix::power`].
pub fn mat_power(a: &PosDefMatrix, p: f64) -> Result<PosDefMatrix> {
    a.power(p)
}

/// Free-function spelling of [`HermMatrix::eig`] that validates Hermitian
/// symmetry of a raw matrix first.
pub fn eig_herm(m: &CMatrix) -> Result<SpectralDecomp> {
    Ok(HermMatrix::new(m.clone())?.eig())
}

/// `exp` of a Hermitian matrix; the result is positive definite unless the
/// spectrum underflows.
pub fn expm_herm(h: &HermMatrix) -> Result<PosDefMatrix> {
    PosDefMatrix::new(h.map_spectrum("exp", f64::exp)?)
}
