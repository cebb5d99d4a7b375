use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::exec::Executor;
use crate::error::{Error, Result};
use crate::lieb::{MapKind, PosLinMap};
use crate::matrix::{random_posdef_with, PosDefMatrix, TrialRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Concave,
    Convex,
}

impl Direction {
    /// Signed normalized midpoint gap; positive means the inequality of
    /// this direction fails.
    pub fn gap(self, first: f64, second: f64, midpoint: f64) -> f64 {
        let avg = 0.5 * (first + second);
        let scale = 1.0 + first.abs() + second.abs();
        match self {
            Direction::Concave => (avg - midpoint) / scale,
            Direction::Convex => (midpoint - avg) / scale,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Concave => Direction::Convex,
            Direction::Convex => Direction::Concave,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Concave => "concave",
            Direction::Convex => "convex",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "concave" => Ok(Direction::Concave),
            "convex" => Ok(Direction::Convex),
            other => Err(Error::invalid(format!("unknown direction {other:?}"))),
        }
    }
}

/// Two argument tuples together with the maps they are evaluated under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<PosLinMap>,
    pub first: Vec<PosDefMatrix>,
    pub second: Vec<PosDefMatrix>,
}

impl Sample {
    pub fn midpoint(&self) -> Result<Vec<PosDefMatrix>> {
        if self.first.len() != self.second.len() {
            return Err(Error::invalid("sample tuples differ in length"));
        }
        self.first
            .iter()
            .zip(&self.second)
            .map(|(a, b)| PosDefMatrix::midpoint(a, b))
            .collect()
    }
}

/// A real functional of a tuple of positive definite matrices.
pub trait Functional: Send + Sync {
    fn eval(&self, maps: &[PosLinMap], args: &[PosDefMatrix]) -> Result<f64>;
}

impl<F> Functional for F
where
    F: Fn(&[PosLinMap], &[PosDefMatrix]) -> Result<f64> + Send + Sync,
{
    fn eval(&self, maps: &[PosLinMap], args: &[PosDefMatrix]) -> Result<f64> {
        self(maps, args)
    }
}

pub trait Sampler: Send + Sync {
    fn sample(&self, rng: &mut TrialRng) -> Result<Sample>;
}

impl<F> Sampler for F
where
    F: Fn(&mut TrialRng) -> Result<Sample> + Send + Sync,
{
    fn sample(&self, rng: &mut TrialRng) -> Result<Sample> {
        self(rng)
    }
}

/// Independent random positive definite tuples of size `arity` in `M_dim`,
/// with one freshly drawn map `M_dim -> M_out_dim` per entry of `maps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSampler {
    pub dim: usize,
    pub out_dim: usize,
    pub arity: usize,
    pub cond_cap: f64,
    pub maps: Vec<MapKind>,
}

impl Sampler for MatrixSampler {
    fn sample(&self, rng: &mut TrialRng) -> Result<Sample> {
        let maps = self
            .maps
            .iter()
            .map(|kind| kind.sample(rng, self.dim, self.out_dim))
            .collect::<Result<Vec<_>>>()?;
        let mut tuple = || {
            (0..self.arity)
                .map(|_| random_posdef_with(rng, self.dim, self.cond_cap))
                .collect::<Vec<_>>()
        };
        let first = tuple();
        let second = tuple();
        Ok(Sample { maps, first, second })
    }
}

/// Per-trial generator: trials are independent streams of one seed.
pub fn trial_rng(seed: u64, trial: usize) -> TrialRng {
    let mut rng = TrialRng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub struct MidpointTrial {
    pub functional: Box<dyn Functional>,
    pub direction: Direction,
    pub sampler: Box<dyn Sampler>,
    pub trials: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl MidpointTrial {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::config("trials must be at least 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::config(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MidpointValues {
    pub first: f64,
    pub second: f64,
    pub midpoint: f64,
}

/// Everything needed to re-evaluate a violating trial standalone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub trial: usize,
    pub sample: Sample,
    pub values: MidpointValues,
    pub gap: f64,
}

impl Witness {
    /// Recomputes the gap from the stored sample.
    pub fn replay(&self, functional: &dyn Functional, direction: Direction) -> Result<f64> {
        Ok(evaluate_sample(functional, direction, &self.sample)?.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub trials_run: usize,
    pub violations: usize,
    pub worst_gap: f64,
    pub worst_witness: Option<Witness>,
    pub runtime_ms: u64,
}

impl ConcavityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn empty() -> Self {
        Self {
            trials_run: 0,
            violations: 0,
            worst_gap: f64::NEG_INFINITY,
            worst_witness: None,
            runtime_ms: 0,
        }
    }

    fn absorb(&mut self, outcome: TrialOutcome, rel_tol: f64) {
        self.trials_run += 1;
        if outcome.gap > rel_tol {
            self.violations += 1;
            let better = self.worst_witness.as_ref().is_none_or(|w| outcome.gap > w.gap);
            if better {
                self.worst_witness = Some(Witness {
                    trial: outcome.trial,
                    sample: outcome.sample.expect("violating trials keep their sample"),
                    values: outcome.values,
                    gap: outcome.gap,
                });
            }
        }
        if outcome.gap > self.worst_gap {
            self.worst_gap = outcome.gap;
        }
    }
}

/// Values at both tuples and their midpoint, and the signed gap.
pub fn evaluate_sample(
    functional: &dyn Functional,
    direction: Direction,
    sample: &Sample,
) -> Result<(MidpointValues, f64)> {
    let mid = sample.midpoint()?;
    let values = MidpointValues {
        first: functional.eval(&sample.maps, &sample.first)?,
        second: functional.eval(&sample.maps, &sample.second)?,
        midpoint: functional.eval(&sample.maps, &mid)?,
    };
    let gap = direction.gap(values.first, values.second, values.midpoint);
    if !gap.is_finite() {
        return Err(Error::invalid(format!("non-finite midpoint gap from values {values:?}")));
    }
    Ok((values, gap))
}

struct TrialOutcome {
    trial: usize,
    values: MidpointValues,
    gap: f64,
    sample: Option<Sample>,
}

fn run_one(trial: &MidpointTrial, index: usize) -> Result<TrialOutcome> {
    let mut rng = trial_rng(trial.seed, index);
    let sample = trial.sampler.sample(&mut rng).map_err(|e| Error::Trial {
        trial: index,
        witness: "sampling failed".into(),
        source: Box::new(e),
    })?;
    match evaluate_sample(trial.functional.as_ref(), trial.direction, &sample) {
        Ok((values, gap)) => Ok(TrialOutcome {
            trial: index,
            values,
            gap,
            sample: (gap > trial.rel_tol).then_some(sample),
        }),
        Err(e) => Err(Error::Trial {
            trial: index,
            witness: serde_json::to_string(&sample).unwrap_or_default(),
            source: Box::new(e),
        }),
    }
}

/// Runs trials `range` and folds them in index order.
pub(crate) fn run_range(
    trial: &MidpointTrial,
    exec: &Executor,
    range: std::ops::Range<usize>,
    into: &mut ConcavityReport,
) -> Result<()> {
    for outcome in exec.map(range, |i| run_one(trial, i)) {
        into.absorb(outcome?, trial.rel_tol);
    }
    Ok(())
}

/// Randomized midpoint test of the stated direction.
pub fn run_midpoint(trial: &MidpointTrial, exec: &Executor) -> Result<ConcavityReport> {
    trial.validate()?;
    let start = Instant::now();
    let mut report = ConcavityReport::empty();
    run_range(trial, exec, 0..trial.trials, &mut report)?;
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Like [`run_midpoint`], stopping after the first block of `block` trials
/// that contains a violation.
pub fn search_midpoint(trial: &MidpointTrial, exec: &Executor, block: usize) -> Result<ConcavityReport> {
    trial.validate()?;
    let start = Instant::now();
    let mut report = ConcavityReport::empty();
    let block = block.max(1);
    let mut lo = 0;
    while lo < trial.trials && report.violations == 0 {
        let hi = (lo + block).min(trial.trials);
        run_range(trial, exec, lo..hi, &mut report)?;
        lo = hi;
    }
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}
