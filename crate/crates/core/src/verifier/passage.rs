//! Pointwise check that midpoint inequalities for all Ky Fan (anti-)norms of
//! a matrix-valued `F` carry over to trace functions of `F`.

use serde::{Deserialize, Serialize};

use super::exec::Executor;
use super::majorization::weak_majorization;
use super::midpoint::{trial_rng, Sample, Sampler};
use crate::error::{Error, Result};
use crate::lieb::PosLinMap;
use crate::means::OperatorMean;
use crate::matrix::PosDefMatrix;

/// Consequent tolerance, relative to `1 + |g1| + |g2|`.
pub const PASSAGE_TOL: f64 = 1e-10;

/// Matrix-valued function of a tuple of positive definite matrices.
pub trait MatrixMap: Send + Sync {
    fn apply(&self, maps: &[PosLinMap], args: &[PosDefMatrix]) -> Result<PosDefMatrix>;
}

impl<F> MatrixMap for F
where
    F: Fn(&[PosLinMap], &[PosDefMatrix]) -> Result<PosDefMatrix> + Send + Sync,
{
    fn apply(&self, maps: &[PosLinMap], args: &[PosDefMatrix]) -> Result<PosDefMatrix> {
        self(maps, args)
    }
}

/// `(A, B) -> (Phi(A^p) sigma Psi(B^q))^{1/gamma}` with the maps taken from the sample.
pub fn mean_root_map(sigma: OperatorMean, p: f64, q: f64, gamma: f64) -> impl MatrixMap {
    move |maps: &[PosLinMap], args: &[PosDefMatrix]| -> Result<PosDefMatrix> {
        let [phi, psi] = maps else {
            return Err(Error::invalid("mean_root_map needs two maps"));
        };
        let pa = phi.apply_pd(&args[0].power(p)?)?;
        let qb = psi.apply_pd(&args[1].power(q)?)?;
        sigma.apply(&pa, &qb)?.power(1.0 / gamma)
    }
}

type Battery = [(&'static str, fn(f64) -> f64); 3];

/// Non-decreasing concave test functions for the anti-norm passage.
pub const CONCAVE_BATTERY: Battery = [("log", f64::ln), ("sqrt", f64::sqrt), ("x/(1+x)", |x| x / (1.0 + x))];

/// Non-decreasing convex test functions for the norm passage.
pub const CONVEX_BATTERY: Battery = [("x", |x| x), ("x^2", |x| x * x), ("x^3", |x| x * x * x)];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PassageReport {
    pub samples: usize,
    /// Samples where every Ky Fan anti-norm midpoint inequality held.
    pub anti_norm_premise: usize,
    /// Samples where every Ky Fan norm midpoint inequality for `F^{-1}` held.
    pub norm_premise: usize,
    /// Premise held but a concave trace inequality failed.
    pub concave_failures: usize,
    /// Premise held but a convex trace inequality failed.
    pub convex_failures: usize,
    pub worst_concave_gap: f64,
    pub worst_convex_gap: f64,
}

impl PassageReport {
    pub fn holds(&self) -> bool {
        self.concave_failures == 0 && self.convex_failures == 0
    }
}

#[derive(Default)]
struct SampleOutcome {
    anti_premise: bool,
    norm_premise: bool,
    concave_gap: Option<f64>,
    convex_gap: Option<f64>,
}

fn ascending(m: &PosDefMatrix) -> Vec<f64> {
    m.eigenvalues().to_vec()
}

fn trace_gap(values: [&[f64]; 3], f: fn(f64) -> f64, concave: bool) -> f64 {
    let tr = |v: &[f64]| v.iter().map(|&x| f(x)).sum::<f64>();
    let (g1, g2, gm) = (tr(values[0]), tr(values[1]), tr(values[2]));
    let avg = 0.5 * (g1 + g2);
    let gap = if concave { avg - gm } else { gm - avg };
    gap / (1.0 + g1.abs() + g2.abs())
}

fn check_sample(map: &dyn MatrixMap, sample: &Sample) -> Result<SampleOutcome> {
    let f1 = map.apply(&sample.maps, &sample.first)?;
    let f2 = map.apply(&sample.maps, &sample.second)?;
    let fm = map.apply(&sample.maps, &sample.midpoint()?)?;
    let (l1, l2, lm) = (ascending(&f1), ascending(&f2), ascending(&fm));
    let mut out = SampleOutcome::default();

    // Anti-norms: partial sums of the smallest eigenvalues, as the weak
    // majorization of the negated ascending vectors.
    let neg_mid: Vec<f64> = lm.iter().map(|x| -x).collect();
    let neg_avg: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| -0.5 * (a + b)).collect();
    out.anti_premise = weak_majorization(&neg_mid, &neg_avg)?;
    if out.anti_premise {
        let worst = CONCAVE_BATTERY
            .iter()
            .map(|(_, f)| trace_gap([&l1, &l2, &lm], *f, true))
            .fold(f64::NEG_INFINITY, f64::max);
        out.concave_gap = Some(worst);
    }

    // Norms of the inverses: eigenvalues 1/l, in descending order.
    let inv = |v: &[f64]| v.iter().map(|x| 1.0 / x).collect::<Vec<f64>>();
    let (i1, i2, im) = (inv(&l1), inv(&l2), inv(&lm));
    let avg: Vec<f64> = i1.iter().zip(&i2).map(|(a, b)| 0.5 * (a + b)).collect();
    out.norm_premise = weak_majorization(&im, &avg)?;
    if out.norm_premise {
        let worst = CONVEX_BATTERY
            .iter()
            .map(|(_, f)| trace_gap([&i1, &i2, &im], *f, false))
            .fold(f64::NEG_INFINITY, f64::max);
        out.convex_gap = Some(worst);
    }
    Ok(out)
}

/// Samples `samples` pairs and counts implication failures.
pub fn passage_check(
    map: &dyn MatrixMap,
    sampler: &dyn Sampler,
    samples: usize,
    seed: u64,
    exec: &Executor,
) -> Result<PassageReport> {
    let outcomes = exec.map(0..samples, |i| -> Result<SampleOutcome> {
        let sample = sampler.sample(&mut trial_rng(seed, i))?;
        check_sample(map, &sample)
    });
    let mut report = PassageReport {
        samples,
        worst_concave_gap: f64::NEG_INFINITY,
        worst_convex_gap: f64::NEG_INFINITY,
        ..Default::default()
    };
    for o in outcomes {
        let o = o?;
        report.anti_norm_premise += o.anti_premise as usize;
        report.norm_premise += o.norm_premise as usize;
        if let Some(g) = o.concave_gap {
            report.worst_concave_gap = report.worst_concave_gap.max(g);
            report.concave_failures += (g > PASSAGE_TOL) as usize;
        }
        if let Some(g) = o.convex_gap {
            report.worst_convex_gap = report.worst_convex_gap.max(g);
            report.convex_failures += (g > PASSAGE_TOL) as usize;
        }
    }
    Ok(report)
}
