use rand::Rng;

use super::LiebSpec;
use crate::conjugate::{ConjugateDirection, ConjugateFn, SearchConfig};
use crate::error::{Error, Result};
use crate::matrix::{random_complex_gaussian, CMatrix, HermMatrix, PosDefMatrix};

/// Best value over the candidates together with the value at the analytic
/// optimizer.
#[derive(Clone, Debug)]
pub struct VariationalEstimate {
    /// `inf` (resp. `sup`) over the candidates and the optimizer.
    pub value: f64,
    pub at_optimizer: f64,
    pub optimizer: PosDefMatrix,
    pub candidate_values: Vec<f64>,
}

/// `Tr X Q X - Tr g(X P^{-1} X)` with `g` the relevant conjugate.
fn objective(conj: &ConjugateFn, p_inv: &PosDefMatrix, q: &PosDefMatrix, x: &PosDefMatrix) -> Result<f64> {
    if x.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: x.dim(),
        });
    }
    let quad = q.base().congruence(x.as_matrix()).trace();
    let inner = p_inv.congruence(x.as_matrix())?;
    let mut penalty = 0.0;
    for &l in inner.eigenvalues() {
        penalty += conj.eval(l)?;
    }
    Ok(quad - penalty)
}

/// `X* = (P^{1/2} f'(M) P^{1/2})^{1/2}` with `M = P^{1/2} Q P^{1/2}`,
/// `P = Phi(A^p)`, `Q = Psi(B^q)`.
pub fn variational_optimizer(spec: &LiebSpec, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<PosDefMatrix> {
    let (pa, qb) = spec.mapped_pair(a, b)?;
    let p_half = pa.sqrt()?;
    let m = qb.congruence(p_half.as_matrix())?;
    let y = PosDefMatrix::new(m.map("f'", |x| spec.f.derivative(x))?)?;
    y.congruence(p_half.as_matrix())?.sqrt()
}

fn estimate(
    spec: &LiebSpec,
    direction: ConjugateDirection,
    a: &PosDefMatrix,
    b: &PosDefMatrix,
    candidates: &[PosDefMatrix],
) -> Result<VariationalEstimate> {
    if candidates.is_empty() {
        return Err(Error::invalid("variational estimate needs at least one candidate"));
    }
    let conj = ConjugateFn::new(spec.f.clone(), direction, SearchConfig::default())?;
    let (pa, qb) = spec.mapped_pair(a, b)?;
    let p_inv = pa.inverse()?;
    let optimizer = variational_optimizer(spec, a, b)?;
    let at_optimizer = objective(&conj, &p_inv, &qb, &optimizer)?;
    let candidate_values = candidates
        .iter()
        .map(|x| objective(&conj, &p_inv, &qb, x))
        .collect::<Result<Vec<_>>>()?;
    let pick = |u: f64, v: f64| match direction {
        ConjugateDirection::Check => u.min(v),
        ConjugateDirection::Hat => u.max(v),
    };
    let value = candidate_values.iter().copied().fold(at_optimizer, pick);
    Ok(VariationalEstimate {
        value,
        at_optimizer,
        optimizer,
        candidate_values,
    })
}

/// Upper estimate of `Tr f(M)` for `f` non-decreasing concave with
/// `f(x)/x -> 0`: each candidate gives `Tr XQX - Tr f_check(XP^{-1}X) >= Tr f(M)`.
pub fn variational_inf(
    spec: &LiebSpec,
    a: &PosDefMatrix,
    b: &PosDefMatrix,
    candidates: &[PosDefMatrix],
) -> Result<VariationalEstimate> {
    estimate(spec, ConjugateDirection::Check, a, b, candidates)
}

/// Lower estimate of `Tr f(M)` for `f` non-decreasing convex with
/// `f(x)/x -> inf`, using `f_hat`.
pub fn variational_sup(
    spec: &LiebSpec,
    a: &PosDefMatrix,
    b: &PosDefMatrix,
    candidates: &[PosDefMatrix],
) -> Result<VariationalEstimate> {
    estimate(spec, ConjugateDirection::Hat, a, b, candidates)
}

/// `count` random congruence perturbations `(I + t G)* X (I + t G)` of `center`.
pub fn perturbed_candidates<R: Rng + ?Sized>(
    rng: &mut R,
    center: &PosDefMatrix,
    count: usize,
    spread: f64,
) -> Vec<PosDefMatrix> {
    let n = center.dim();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g = random_complex_gaussian(rng, n, n).scale(spread / (n as f64).sqrt());
        let t = CMatrix::identity(n, n) + g;
        let h = HermMatrix::hermitian_part(&(t.adjoint() * center.as_matrix() * &t));
        if let Ok(x) = PosDefMatrix::new(h) {
            out.push(x);
        }
    }
    out
}
