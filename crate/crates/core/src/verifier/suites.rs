//! Named parameter grids, their hypothesis checks, and the runner.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::exec::Executor;
use super::midpoint::{run_midpoint, Direction, Functional, MatrixSampler, MidpointTrial};
use super::report::{PointReport, RunHeader, SuiteReport};
use crate::conjugate::{ConjugateDirection, ConjugateFn, SearchConfig};
use crate::error::{Error, Result};
use crate::lieb::{lieb_inverted, lieb_trace, map_power_fn, mean_norm_fn, mean_trace_fn, LiebSpec, MapKind, PosLinMap};
use crate::means::{MeanDescriptor, OperatorMean};
use crate::matrix::PosDefMatrix;
use crate::norms::NormSpec;
use crate::scalar::{Atom, ExampleA4, FnClass, FnDescriptor, PickIntegralFn, ScalarFn};

/// Slack for parameter-range comparisons.
const RANGE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TheoremId {
    Thm2_1,
    Thm3_1,
    Cor3_2,
    Cor4_2,
    Cor4_5,
    Thm5_2,
    Thm5_3,
    Thm5_4,
    Thm5_6,
    RangeI,
    RangeII,
    RangeIII,
    RangeIV,
}

impl TheoremId {
    pub const ALL: [TheoremId; 13] = [
        TheoremId::Thm2_1,
        TheoremId::Thm3_1,
        TheoremId::Cor3_2,
        TheoremId::Cor4_2,
        TheoremId::Cor4_5,
        TheoremId::Thm5_2,
        TheoremId::Thm5_3,
        TheoremId::Thm5_4,
        TheoremId::Thm5_6,
        TheoremId::RangeI,
        TheoremId::RangeII,
        TheoremId::RangeIII,
        TheoremId::RangeIV,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Thm2_1 => "thm2.1",
            TheoremId::Thm3_1 => "thm3.1",
            TheoremId::Cor3_2 => "cor3.2",
            TheoremId::Cor4_2 => "cor4.2",
            TheoremId::Cor4_5 => "cor4.5",
            TheoremId::Thm5_2 => "thm5.2",
            TheoremId::Thm5_3 => "thm5.3",
            TheoremId::Thm5_4 => "thm5.4",
            TheoremId::Thm5_6 => "thm5.6",
            TheoremId::RangeI => "range_i",
            TheoremId::RangeII => "range_ii",
            TheoremId::RangeIII => "range_iii",
            TheoremId::RangeIV => "range_iv",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    /// Accepts `thm2.1`, `thm2_1`, `range_ii`, `range-ii`, `range.ii`, ...
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| !matches!(c, '.' | '_' | '-'))
            .collect();
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str().replace(['.', '_'], "") == key)
            .ok_or_else(|| {
                let known: Vec<_> = TheoremId::ALL.iter().map(|t| t.as_str()).collect();
                Error::config(format!("unknown suite {s:?}; known suites: {}", known.join(", ")))
            })
    }
}

impl Serialize for TheoremId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TheoremId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which functional a grid point evaluates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Form {
    /// `Tr f(Phi(A^p)^{1/2} Psi(B^q) Phi(A^p)^{1/2})`
    Lieb,
    /// `Tr f((Phi(A^{-p})^{1/2} Psi(B^{-q}) Phi(A^{-p})^{1/2})^{-1})`
    LiebInverted,
    /// `||f(Phi(A^p) sigma Psi(B^q))||`
    MeanNorm { mean: MeanDescriptor, norm: NormSpec },
    /// `Tr f(Phi(A^p) sigma Psi(B^q))`
    MeanTrace { mean: MeanDescriptor },
    /// `Tr f(Phi(A^p)^r)`, or a norm of `f(Phi(A^p)^r)`; one variable.
    MapPower {
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<NormSpec>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridPoint {
    pub form: Form,
    pub f: ScalarFn,
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    pub phi: MapKind,
    #[serde(default = "identity_kind")]
    pub psi: MapKind,
    pub expected: Direction,
    pub dim: usize,
}

fn identity_kind() -> MapKind {
    MapKind::Identity
}

impl GridPoint {
    pub fn arity(&self) -> usize {
        match self.form {
            Form::MapPower { .. } => 1,
            _ => 2,
        }
    }

    pub fn map_kinds(&self) -> Vec<MapKind> {
        match self.form {
            Form::MapPower { .. } => vec![self.phi],
            _ => vec![self.phi, self.psi],
        }
    }

    pub fn sampler(&self, cond_cap: f64) -> MatrixSampler {
        MatrixSampler {
            dim: self.dim,
            out_dim: self.dim,
            arity: self.arity(),
            cond_cap,
            maps: self.map_kinds(),
        }
    }

    pub fn describe(&self) -> String {
        let form = match &self.form {
            Form::Lieb => "lieb".to_string(),
            Form::LiebInverted => "lieb_inverted".to_string(),
            Form::MeanNorm { mean, norm } => format!("mean_norm[{mean}, {norm}]"),
            Form::MeanTrace { mean } => format!("mean_trace[{mean}]"),
            Form::MapPower { r, norm: Some(n) } => format!("map_power[r={r}, {n}]"),
            Form::MapPower { r, norm: None } => format!("map_power[r={r}]"),
        };
        format!(
            "{form} f={} p={} q={} dim={} expected={}",
            self.f.label(),
            self.p,
            self.q,
            self.dim,
            self.expected
        )
    }

    /// The functional evaluated on each sampled tuple; the maps come from
    /// the sample in the order of [`GridPoint::map_kinds`].
    pub fn functional(&self) -> Result<Box<dyn Functional>> {
        let (f, p, q) = (self.f.clone(), self.p, self.q);
        let spec = move |maps: &[PosLinMap]| -> Result<LiebSpec> {
            LiebSpec::new(f.clone(), maps[0].clone(), maps[1].clone(), p, q)
        };
        Ok(match &self.form {
            Form::Lieb => Box::new(move |maps: &[PosLinMap], x: &[PosDefMatrix]| lieb_trace(&spec(maps)?, &x[0], &x[1])),
            Form::LiebInverted => {
                Box::new(move |maps: &[PosLinMap], x: &[PosDefMatrix]| lieb_inverted(&spec(maps)?, &x[0], &x[1]))
            }
            Form::MeanNorm { mean, norm } => {
                let sigma = OperatorMean::new(mean.clone())?;
                let norm = norm.clone();
                Box::new(move |maps: &[PosLinMap], x: &[PosDefMatrix]| {
                    mean_norm_fn(&spec(maps)?, &sigma, &norm, &x[0], &x[1])
                })
            }
            Form::MeanTrace { mean } => {
                let sigma = OperatorMean::new(mean.clone())?;
                Box::new(move |maps: &[PosLinMap], x: &[PosDefMatrix]| mean_trace_fn(&spec(maps)?, &sigma, &x[0], &x[1]))
            }
            Form::MapPower { r, norm } => {
                let (r, norm, f) = (*r, norm.clone(), self.f.clone());
                Box::new(move |maps: &[PosLinMap], x: &[PosDefMatrix]| map_power_fn(&f, &maps[0], p, r, norm.as_ref(), &x[0]))
            }
        })
    }
}

/// A theorem together with the grid it is checked on.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub theorem: TheoremId,
    pub points: Vec<GridPoint>,
}

/// Sampling and tolerance settings shared by every point of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub trials: usize,
    pub rel_tol: f64,
    pub cond_cap: f64,
    pub seed: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            trials: 1000,
            rel_tol: 1e-8,
            cond_cap: 100.0,
            seed: 42,
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::config("trials must be at least 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::config(format!("tolerance must be positive, got {}", self.rel_tol)));
        }
        if !(self.cond_cap >= 1.0) {
            return Err(Error::config(format!("cond_cap must be >= 1, got {}", self.cond_cap)));
        }
        Ok(())
    }
}

/// Seed of the `index`-th grid point.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs every point without hypothesis checks.
pub fn run_points(
    suite: &str,
    points: &[GridPoint],
    settings: &RunSettings,
    exec: &Executor,
) -> Result<SuiteReport> {
    settings.validate()?;
    let mut reports = Vec::with_capacity(points.len());
    for (i, point) in points.iter().enumerate() {
        if point.dim < 1 {
            return Err(Error::config("dimensions must be at least 1"));
        }
        let trial = MidpointTrial {
            functional: point.functional()?,
            direction: point.expected,
            sampler: Box::new(point.sampler(settings.cond_cap)),
            trials: settings.trials,
            rel_tol: settings.rel_tol,
            seed: point_seed(settings.seed, i),
        };
        let report = run_midpoint(&trial, exec)?;
        reports.push(PointReport::new(point.clone(), report));
    }
    let mut dims: Vec<usize> = points.iter().map(|p| p.dim).collect();
    dims.sort_unstable();
    dims.dedup();
    Ok(SuiteReport::new(
        suite.to_string(),
        settings.seed,
        RunHeader::new(settings, dims),
        reports,
    ))
}

/// Checks every hypothesis, then runs each grid point.
pub fn run_suite(spec: &SuiteSpec, settings: &RunSettings, exec: &Executor) -> Result<SuiteReport> {
    spec.validate()?;
    run_points(spec.theorem.as_str(), &spec.points, settings, exec)
}

// ---------------------------------------------------------------------------
// Hypothesis checks

fn near_le(a: f64, b: f64) -> bool {
    a <= b + RANGE_EPS * (1.0 + b.abs())
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    near_le(lo, x) && near_le(x, hi)
}

fn near_eq(a: f64, b: f64) -> bool {
    near_le(a, b) && near_le(b, a)
}

#[derive(Clone, Copy, PartialEq)]
enum Box2 {
    Positive,
    Negative,
}

/// `0 <= p,q <= 1` or `-1 <= p,q <= 0`.
fn unit_box(p: f64, q: f64) -> Option<Box2> {
    if within(p, 0.0, 1.0) && within(q, 0.0, 1.0) {
        Some(Box2::Positive)
    } else if within(p, -1.0, 0.0) && within(q, -1.0, 0.0) {
        Some(Box2::Negative)
    } else {
        None
    }
}

fn gamma_extreme(p: f64, q: f64) -> f64 {
    if p >= 0.0 && q >= 0.0 {
        p.max(q)
    } else {
        p.min(q)
    }
}

type Check = std::result::Result<(), String>;

fn need(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `x -> f(x^gamma)` has the classes in `want`: operator classes from the
/// declared flags, monotonicity from the declared flags, and every
/// observable class confirmed by sampled screening.
fn shape(f: &ScalarFn, gamma: f64, want: FnClass) -> Check {
    let declared = f.compose_power(gamma).flags();
    let operator = want - FnClass::SAMPLED;
    need(declared.contains(operator), || {
        format!("{}(x^{gamma}) is not declared {operator:?}", f.label())
    })?;
    let monotone = want & (FnClass::NON_DECREASING | FnClass::NON_INCREASING);
    need(declared.contains(monotone), || {
        format!("{}(x^{gamma}) is not declared {monotone:?}", f.label())
    })?;
    let report = f.screen(gamma).map_err(|e| e.to_string())?;
    let observable = want & FnClass::SAMPLED;
    need(report.flags.contains(observable), || {
        format!(
            "{}(x^{gamma}) fails the sampled {observable:?} screen (found {:?})",
            f.label(),
            report.flags
        )
    })
}

fn non_negative(f: &ScalarFn) -> Check {
    let bad = crate::scalar::audit_grid().into_iter().find(|&x| !(f.eval(x) >= 0.0));
    need(bad.is_none(), || format!("{} is negative at {:e}", f.label(), bad.unwrap_or(0.0)))
}

fn power_exponent(f: &ScalarFn) -> std::result::Result<f64, String> {
    match f.descriptor() {
        Some(FnDescriptor::Power { s }) => Ok(*s),
        _ => Err(format!("range suites take f = x^s, got {}", f.label())),
    }
}

fn require_form(point: &GridPoint, ok: bool, allowed: &str) -> Check {
    need(ok, || format!("form must be {allowed}, got {:?}", point.form))
}

fn unsupported_direction(point: &GridPoint) -> Check {
    Err(format!("no {} claim for this suite", point.expected))
}

/// `(p, q, phi, psi)` as given and with the two variables interchanged.
fn orientations(point: &GridPoint) -> [(f64, f64, MapKind, MapKind); 2] {
    [
        (point.p, point.q, point.phi, point.psi),
        (point.q, point.p, point.psi, point.phi),
    ]
}

fn either_orientation(point: &GridPoint, check: impl Fn(f64, f64, MapKind, MapKind) -> Check) -> Check {
    let [a, b] = orientations(point);
    match check(a.0, a.1, a.2, a.3) {
        Ok(()) => Ok(()),
        Err(first) => check(b.0, b.1, b.2, b.3).map_err(|second| format!("{first}; swapped: {second}")),
    }
}

fn inv_or(x: f64, at_zero: f64) -> f64 {
    if x == 0.0 {
        at_zero
    } else {
        1.0 / x
    }
}

const OPM_SHAPE: FnClass = FnClass::OPERATOR_MONOTONE
    .union(FnClass::NON_DECREASING)
    .union(FnClass::CONCAVE);
const OPMD_SHAPE: FnClass = FnClass::OPERATOR_MONOTONE_DECREASING
    .union(FnClass::NON_INCREASING)
    .union(FnClass::CONVEX);
const INC_CONCAVE: FnClass = FnClass::NON_DECREASING.union(FnClass::CONCAVE);
const INC_CONVEX: FnClass = FnClass::NON_DECREASING.union(FnClass::CONVEX);
const DEC_CONVEX: FnClass = FnClass::NON_INCREASING.union(FnClass::CONVEX);

fn check_point(theorem: TheoremId, point: &GridPoint) -> Check {
    let (p, q) = (point.p, point.q);
    let two_var = !matches!(point.form, Form::MapPower { .. });
    if two_var {
        need(!(p == 0.0 && q == 0.0), || "precondition (p,q) ≠ (0,0) violated".into())?;
    } else {
        need(p != 0.0, || "one-variable forms need p ≠ 0".into())?;
    }
    let dir = point.expected;
    let f = &point.f;
    match theorem {
        TheoremId::Thm2_1 => {
            require_form(point, point.form == Form::Lieb, "lieb")?;
            need(unit_box(p, q).is_some(), || format!("(p,q) = ({p},{q}) outside both unit boxes"))?;
            match dir {
                Direction::Concave => shape(f, p + q, OPM_SHAPE),
                Direction::Convex => shape(f, p + q, OPMD_SHAPE),
            }
        }
        TheoremId::Thm3_1 => {
            let Form::MeanNorm { norm, .. } = &point.form else {
                return require_form(point, false, "mean_norm");
            };
            need(unit_box(p, q).is_some(), || format!("(p,q) = ({p},{q}) outside both unit boxes"))?;
            non_negative(f)?;
            let gamma = gamma_extreme(p, q);
            match dir {
                Direction::Concave => {
                    need(norm.is_anti(), || format!("{norm} is not an anti-norm"))?;
                    shape(f, gamma, OPM_SHAPE)
                }
                Direction::Convex => {
                    need(norm.is_norm(), || format!("{norm} is not a symmetric norm"))?;
                    shape(f, gamma, OPMD_SHAPE)
                }
            }
        }
        TheoremId::Cor3_2 => {
            let Form::MapPower { r, norm: Some(norm) } = &point.form else {
                return require_form(point, false, "map_power with a norm");
            };
            need(within(p.abs(), 0.0, 1.0), || format!("|p| = {} outside (0, 1]", p.abs()))?;
            non_negative(f)?;
            shape(f, 1.0, OPM_SHAPE)?;
            match dir {
                Direction::Concave => {
                    need(norm.is_anti(), || format!("{norm} is not an anti-norm"))?;
                    need(near_eq(r * p, 1.0), || format!("concave forms need r = 1/p, got r = {r}"))
                }
                Direction::Convex => {
                    need(norm.is_norm(), || format!("{norm} is not a symmetric norm"))?;
                    need(near_eq(r * p, -1.0), || format!("convex forms need r = -1/p, got r = {r}"))
                }
            }
        }
        TheoremId::Cor4_2 => {
            require_form(point, matches!(point.form, Form::MeanTrace { .. }), "mean_trace")?;
            need(unit_box(p, q).is_some(), || format!("(p,q) = ({p},{q}) outside both unit boxes"))?;
            let gamma = gamma_extreme(p, q);
            match dir {
                Direction::Concave => shape(f, gamma, INC_CONCAVE),
                Direction::Convex => shape(f, -gamma, INC_CONVEX),
            }
        }
        TheoremId::Cor4_5 => {
            let Form::MapPower { r, norm: None } = &point.form else {
                return require_form(point, false, "map_power without a norm");
            };
            need(near_eq(r * p, 1.0), || format!("needs r = 1/p, got r = {r}"))?;
            match dir {
                Direction::Concave => {
                    need(within(p.abs(), 0.0, 1.0), || format!("|p| = {} outside (0, 1]", p.abs()))?;
                    shape(f, 1.0, INC_CONCAVE)
                }
                Direction::Convex => {
                    need(within(p, 1.0, 2.0), || format!("p = {p} outside [1, 2]"))?;
                    shape(f, 1.0, INC_CONVEX)
                }
            }
        }
        TheoremId::Thm5_2 => {
            require_form(point, matches!(point.form, Form::Lieb | Form::LiebInverted), "lieb or lieb_inverted")?;
            need(unit_box(p, q) == Some(Box2::Positive), || format!("(p,q) = ({p},{q}) outside [0,1]^2"))?;
            let want = match dir {
                Direction::Concave => INC_CONCAVE,
                Direction::Convex => DEC_CONVEX,
            };
            shape(f, 1.0 + p, want).or_else(|a| shape(f, 1.0 + q, want).map_err(|b| format!("{a}; {b}")))
        }
        TheoremId::Thm5_3 => {
            if dir != Direction::Convex {
                return unsupported_direction(point);
            }
            let inverted = point.form == Form::LiebInverted;
            require_form(point, matches!(point.form, Form::Lieb | Form::LiebInverted), "lieb or lieb_inverted")?;
            either_orientation(point, |p, q, _phi, psi| {
                need(p > -1.0 && near_le(p, 0.0), || format!("p = {p} outside (-1, 0]"))?;
                let low = within(q, -1.0, 0.0);
                let high = within(q, 1.0, 2.0);
                if inverted {
                    need(low || (high && psi.is_identity()), || {
                        format!("q = {q} needs [-1,0], or [1,2] with the identity map")
                    })?;
                } else {
                    need(low || high, || format!("q = {q} outside [-1,0] ∪ [1,2]"))?;
                }
                shape(f, 1.0 + p, INC_CONVEX)
            })
        }
        TheoremId::Thm5_4 => {
            if dir != Direction::Convex {
                return unsupported_direction(point);
            }
            let inverted = point.form == Form::LiebInverted;
            require_form(point, matches!(point.form, Form::Lieb | Form::LiebInverted), "lieb or lieb_inverted")?;
            either_orientation(point, |p, q, phi, _psi| {
                need(p > 1.0 && near_le(p, 2.0), || format!("p = {p} outside (1, 2]"))?;
                need(within(q, -1.0, 0.0), || format!("q = {q} outside [-1, 0]"))?;
                if inverted {
                    need(phi.is_identity(), || "inverted form needs the identity map on A".into())?;
                }
                shape(f, p - 1.0, INC_CONVEX)
            })
        }
        TheoremId::Thm5_6 => {
            if dir != Direction::Convex {
                return unsupported_direction(point);
            }
            require_form(point, point.form == Form::Lieb, "lieb")?;
            ConjugateFn::new(f.clone(), ConjugateDirection::Check, SearchConfig::default())
                .map_err(|e| format!("f must be non-decreasing concave with f(x)/x -> 0: {e}"))?;
            either_orientation(point, |p, q, _, _| {
                need(within(p, -1.0, 0.0), || format!("p = {p} outside [-1, 0]"))?;
                need(near_eq(q, 2.0), || format!("q = {q} must equal 2"))?;
                shape(f, 2.0 + p, INC_CONVEX)
            })
        }
        TheoremId::RangeI | TheoremId::RangeII | TheoremId::RangeIII | TheoremId::RangeIV => {
            if dir != Direction::Convex {
                return unsupported_direction(point);
            }
            require_form(point, point.form == Form::Lieb, "lieb")?;
            let s = power_exponent(f)?;
            need(s != 0.0, || "s = 0 gives a constant function".into())?;
            match theorem {
                TheoremId::RangeI => match unit_box(p, q) {
                    Some(Box2::Positive) => need(s < 0.0, || format!("s = {s} must be <= 0")),
                    Some(Box2::Negative) => need(s > 0.0, || format!("s = {s} must be >= 0")),
                    None => Err(format!("(p,q) = ({p},{q}) outside both unit boxes")),
                },
                TheoremId::RangeII => either_orientation(point, |p, q, _, _| {
                    need(within(p, -1.0, 0.0) && within(q, 1.0, 2.0), || {
                        format!("(p,q) = ({p},{q}) outside [-1,0] x [1,2]")
                    })?;
                    let bound = inv_or(p + 1.0, f64::INFINITY).min(inv_or(q - 1.0, f64::INFINITY));
                    need(near_le(bound, s), || format!("s = {s} below {bound}"))
                }),
                TheoremId::RangeIII => either_orientation(point, |p, q, _, psi| {
                    need(within(p, 0.0, 1.0) && within(q, -2.0, -1.0), || {
                        format!("(p,q) = ({p},{q}) outside [0,1] x [-2,-1]")
                    })?;
                    need(psi.is_identity(), || "the map on the second variable must be the identity".into())?;
                    let bound = inv_or(p - 1.0, f64::NEG_INFINITY).max(inv_or(q + 1.0, f64::NEG_INFINITY));
                    need(near_le(s, bound), || format!("s = {s} above {bound}"))
                }),
                _ => either_orientation(point, |p, q, _, _| {
                    need(within(p, -1.0, 0.0) && near_eq(q, 2.0), || {
                        format!("(p,q) = ({p},{q}) needs -1 <= p <= 0, q = 2")
                    })?;
                    need(near_le(1.0 / (2.0 + p), s), || format!("s = {s} below {}", 1.0 / (2.0 + p)))
                }),
            }
        }
    }
}

impl SuiteSpec {
    /// Every point must satisfy the theorem's hypotheses.
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::config(format!("suite {} has no grid points", self.theorem)));
        }
        for (i, point) in self.points.iter().enumerate() {
            if point.dim < 1 {
                return Err(Error::config(format!("grid point #{i}: dimension must be at least 1")));
            }
            check_point(self.theorem, point).map_err(|why| {
                Error::config(format!(
                    "{} grid point #{i} ({}) fails the hypotheses: {why}",
                    self.theorem,
                    point.describe()
                ))
            })?;
        }
        Ok(())
    }

    /// The built-in grid of a theorem over the given dimensions.
    pub fn default_grid(theorem: TheoremId, dims: &[usize]) -> Self {
        let mut points = Vec::new();
        for &dim in dims {
            let base = PointTemplate { dim };
            match theorem {
                TheoremId::Thm2_1 => base.thm2_1(&mut points),
                TheoremId::Thm3_1 => base.thm3_1(&mut points),
                TheoremId::Cor3_2 => base.cor3_2(&mut points),
                TheoremId::Cor4_2 => base.cor4_2(&mut points),
                TheoremId::Cor4_5 => base.cor4_5(&mut points),
                TheoremId::Thm5_2 => base.thm5_2(&mut points),
                TheoremId::Thm5_3 => base.thm5_3(&mut points),
                TheoremId::Thm5_4 => base.thm5_4(&mut points),
                TheoremId::Thm5_6 => base.thm5_6(&mut points),
                TheoremId::RangeI => base.range_i(&mut points),
                TheoremId::RangeII => base.range_ii(&mut points),
                TheoremId::RangeIII => base.range_iii(&mut points),
                TheoremId::RangeIV => base.range_iv(&mut points),
            }
        }
        Self { theorem, points }
    }
}

// ---------------------------------------------------------------------------
// Default grids

const KRAUS: MapKind = MapKind::RandomKraus { rank: 2 };

/// Representative operator monotone functions from the integral representation.
pub fn pick_samples() -> Vec<ScalarFn> {
    let reps = [
        // x / (1 + x)
        PickIntegralFn {
            h1: 0.5,
            b: 0.0,
            atoms: vec![Atom { lambda: 1.0, weight: 0.25 }],
        },
        PickIntegralFn {
            h1: 1.0,
            b: 0.2,
            atoms: vec![Atom { lambda: 0.5, weight: 0.3 }, Atom { lambda: 4.0, weight: 0.6 }],
        },
    ];
    reps.into_iter().map(|r| ScalarFn::pick(r).expect("valid representation")).collect()
}

fn means() -> [MeanDescriptor; 3] {
    [MeanDescriptor::Arithmetic, MeanDescriptor::Geometric, MeanDescriptor::Harmonic]
}

struct PointTemplate {
    dim: usize,
}

impl PointTemplate {
    fn point(&self, form: Form, f: ScalarFn, p: f64, q: f64, expected: Direction) -> GridPoint {
        GridPoint {
            form,
            f,
            p,
            q,
            phi: KRAUS,
            psi: KRAUS,
            expected,
            dim: self.dim,
        }
    }

    fn lieb(&self, f: ScalarFn, p: f64, q: f64, expected: Direction) -> GridPoint {
        self.point(Form::Lieb, f, p, q, expected)
    }

    fn thm2_1(&self, out: &mut Vec<GridPoint>) {
        let us = [0.25, 0.5, 1.0];
        for sign in [1.0, -1.0] {
            for p in [0.25, 0.5, 1.0] {
                for q in [0.25, 0.5, 1.0] {
                    let (p, q) = (sign * p, sign * q);
                    let g = p + q;
                    for u in us {
                        out.push(self.lieb(ScalarFn::power(u / g), p, q, Direction::Concave));
                    }
                    for h in pick_samples() {
                        out.push(self.lieb(h.compose_power(1.0 / g), p, q, Direction::Concave));
                    }
                }
            }
        }
        for (p, q) in [(0.5, 0.5), (1.0, 0.25), (-0.5, -1.0)] {
            for u in [0.5, 1.0] {
                out.push(self.lieb(ScalarFn::power(-u / (p + q)), p, q, Direction::Convex));
            }
        }
    }

    fn thm3_1(&self, out: &mut Vec<GridPoint>) {
        let mut anti: Vec<NormSpec> = (1..=self.dim).map(|k| NormSpec::KyFanAnti { k }).collect();
        anti.extend([0.5, 1.0, 2.0].map(|a| NormSpec::derived_anti(NormSpec::TraceNorm, a)));
        let mut norms: Vec<NormSpec> = (1..=self.dim).map(|k| NormSpec::KyFanNorm { k }).collect();
        norms.extend([NormSpec::Schatten { p: 1.0 }, NormSpec::Schatten { p: 2.0 }, NormSpec::OperatorNorm]);
        for (p, q) in [(0.5, 1.0), (-0.75, -0.5)] {
            let g = gamma_extreme(p, q);
            let concave_fs = [ScalarFn::power(g * 0.5), ScalarFn::power(g), ScalarFn::power(1.0 / g)];
            let convex_fs = [ScalarFn::power(-g * 0.5), ScalarFn::power(-g), ScalarFn::power(-1.0 / g)];
            for mean in means() {
                for (fs, list, dir) in [
                    (&concave_fs, &anti, Direction::Concave),
                    (&convex_fs, &norms, Direction::Convex),
                ] {
                    for f in fs.iter() {
                        for norm in list {
                            let form = Form::MeanNorm {
                                mean: mean.clone(),
                                norm: norm.clone(),
                            };
                            out.push(self.point(form, f.clone(), p, q, dir));
                        }
                    }
                }
            }
        }
    }

    fn cor3_2(&self, out: &mut Vec<GridPoint>) {
        let hs = [ScalarFn::power(0.5), ScalarFn::power(0.3), pick_samples().remove(0)];
        let anti = [NormSpec::KyFanAnti { k: 1 }, NormSpec::derived_anti(NormSpec::OperatorNorm, 1.0)];
        let norms = [NormSpec::KyFanNorm { k: 1 }, NormSpec::Schatten { p: 2.0 }];
        for p in [0.5, 1.0] {
            for h in &hs {
                // Concave: h(Phi(A^p)^{1/p}) and h(Phi(A^{-p})^{-1/p}).
                for pp in [p, -p] {
                    for norm in &anti {
                        let form = Form::MapPower {
                            r: 1.0 / pp,
                            norm: Some(norm.clone()),
                        };
                        out.push(self.point(form, h.clone(), pp, 0.0, Direction::Concave));
                    }
                    // Convex: h(Phi(A^p)^{-1/p}) and h(Phi(A^{-p})^{1/p}).
                    for norm in &norms {
                        let form = Form::MapPower {
                            r: -1.0 / pp,
                            norm: Some(norm.clone()),
                        };
                        out.push(self.point(form, h.clone(), pp, 0.0, Direction::Convex));
                    }
                }
            }
        }
    }

    fn cor4_2(&self, out: &mut Vec<GridPoint>) {
        let shifted = ScalarFn::example_a4(ExampleA4::ShiftedPower {
            s: 2.0,
            alpha: 0.5,
            r: None,
        })
        .expect("valid parameters");
        for (p, q) in [(0.5, 1.0), (0.25, 0.25), (-1.0, -0.5)] {
            let g = gamma_extreme(p, q);
            let mut concave = vec![
                ScalarFn::power(0.5 / g),
                ScalarFn::power(1.0 / g),
                ScalarFn::saturating().compose_power(1.0 / g),
            ];
            if g > 0.0 {
                concave.push(ScalarFn::log());
            }
            let convex = [
                ScalarFn::power(2.0).compose_power(-1.0 / g),
                shifted.compose_power(-1.0 / g),
            ];
            for mean in means() {
                for f in &concave {
                    let form = Form::MeanTrace { mean: mean.clone() };
                    out.push(self.point(form, f.clone(), p, q, Direction::Concave));
                }
                for f in &convex {
                    let form = Form::MeanTrace { mean: mean.clone() };
                    out.push(self.point(form, f.clone(), p, q, Direction::Convex));
                }
            }
        }
    }

    fn cor4_5(&self, out: &mut Vec<GridPoint>) {
        let concave = [ScalarFn::log(), ScalarFn::power(0.5), ScalarFn::saturating(), pick_samples().remove(0)];
        for p in [0.5, 1.0, -0.5, -1.0] {
            for f in &concave {
                let form = Form::MapPower { r: 1.0 / p, norm: None };
                out.push(self.point(form, f.clone(), p, 0.0, Direction::Concave));
            }
        }
        let convex = [ScalarFn::power(1.0), ScalarFn::power(1.5), ScalarFn::power(3.0)];
        for p in [1.0, 1.5, 2.0] {
            for f in &convex {
                let form = Form::MapPower { r: 1.0 / p, norm: None };
                out.push(self.point(form, f.clone(), p, 0.0, Direction::Convex));
            }
        }
    }

    fn thm5_2(&self, out: &mut Vec<GridPoint>) {
        for (p, q) in [(0.25, 0.5), (0.5, 1.0), (1.0, 0.0), (0.75, 0.75)] {
            let r = f64::min(p, q);
            let top = f64::max(1.0 / (1.0 + p), 1.0 / (1.0 + q));
            let mut concave = vec![ScalarFn::power(0.5 * top), ScalarFn::power(top)];
            if r > 0.0 {
                let ceiling = 1.0 / (1.0 + r);
                concave.push(
                    ScalarFn::example_a4(ExampleA4::CappedConcave {
                        s: 0.9 * ceiling,
                        alpha: 0.5,
                        r: Some(r),
                    })
                    .expect("valid parameters"),
                );
            }
            let convex = [ScalarFn::power(-0.5), ScalarFn::power(-1.0), ScalarFn::log().negate()];
            for form in [Form::Lieb, Form::LiebInverted] {
                for f in &concave {
                    out.push(self.point(form.clone(), f.clone(), p, q, Direction::Concave));
                }
                for f in &convex {
                    out.push(self.point(form.clone(), f.clone(), p, q, Direction::Convex));
                }
            }
        }
    }

    fn thm5_3(&self, out: &mut Vec<GridPoint>) {
        for p in [-0.5, -0.25] {
            let floor = 1.0 / (1.0 + p);
            let fs = [
                ScalarFn::power(floor),
                ScalarFn::power(1.5 * floor),
                ScalarFn::example_a4(ExampleA4::ShiftedPower {
                    s: floor,
                    alpha: 0.5,
                    r: Some(-p),
                })
                .expect("valid parameters"),
            ];
            for f in &fs {
                for q in [-0.5, -1.0, 1.5, 2.0] {
                    out.push(self.lieb(f.clone(), p, q, Direction::Convex));
                }
                for q in [-0.5, -1.0] {
                    out.push(self.point(Form::LiebInverted, f.clone(), p, q, Direction::Convex));
                }
                for q in [1.5, 2.0] {
                    let mut point = self.point(Form::LiebInverted, f.clone(), p, q, Direction::Convex);
                    point.psi = MapKind::Identity;
                    out.push(point);
                }
            }
        }
    }

    fn thm5_4(&self, out: &mut Vec<GridPoint>) {
        for p in [1.5, 2.0] {
            let floor = 1.0 / (p - 1.0);
            let r = 2.0 - p;
            let a4 = ExampleA4::ShiftedPower {
                s: floor,
                alpha: 0.5,
                r: (r > 0.0).then_some(r),
            };
            let fs = [
                ScalarFn::power(floor),
                ScalarFn::power(1.5 * floor),
                ScalarFn::example_a4(a4).expect("valid parameters"),
            ];
            for f in &fs {
                for q in [-0.5, -1.0] {
                    out.push(self.lieb(f.clone(), p, q, Direction::Convex));
                    let mut point = self.point(Form::LiebInverted, f.clone(), p, q, Direction::Convex);
                    point.phi = MapKind::Identity;
                    out.push(point);
                }
            }
        }
    }

    fn thm5_6(&self, out: &mut Vec<GridPoint>) {
        for p in [-0.5, 0.0] {
            let floor = 1.0 / (2.0 + p);
            for s in [floor, 0.5 * (floor + 1.0)] {
                out.push(self.lieb(ScalarFn::power(s), p, 2.0, Direction::Convex));
            }
        }
    }

    fn range_i(&self, out: &mut Vec<GridPoint>) {
        for (p, q) in [(0.5, 1.0), (0.25, 0.25)] {
            for s in [-0.5, -1.0] {
                out.push(self.lieb(ScalarFn::power(s), p, q, Direction::Convex));
            }
        }
        for (p, q) in [(-0.5, -1.0), (-1.0, -0.25)] {
            for s in [0.5, 1.0, 2.0] {
                out.push(self.lieb(ScalarFn::power(s), p, q, Direction::Convex));
            }
        }
    }

    fn range_ii(&self, out: &mut Vec<GridPoint>) {
        for (p, q) in [(-0.5, 1.5), (-0.25, 2.0), (-1.0, 1.5), (-0.5, 1.0), (1.5, -0.5)] {
            let (a, b) = if p <= 0.0 { (p, q) } else { (q, p) };
            let bound = inv_or(a + 1.0, f64::INFINITY).min(inv_or(b - 1.0, f64::INFINITY));
            for s in [bound, 1.5 * bound] {
                out.push(self.lieb(ScalarFn::power(s), p, q, Direction::Convex));
            }
        }
    }

    fn range_iii(&self, out: &mut Vec<GridPoint>) {
        for (p, q) in [(0.5, -1.5), (0.25, -2.0), (1.0, -1.5)] {
            let bound = inv_or(p - 1.0, f64::NEG_INFINITY).max(inv_or(q + 1.0, f64::NEG_INFINITY));
            for s in [bound, 1.5 * bound] {
                let mut point = self.lieb(ScalarFn::power(s), p, q, Direction::Convex);
                point.psi = MapKind::Identity;
                out.push(point);
            }
        }
    }

    fn range_iv(&self, out: &mut Vec<GridPoint>) {
        for p in [-1.0, -0.5, 0.0] {
            let bound = 1.0 / (2.0 + p);
            for s in [bound, 1.5 * bound] {
                out.push(self.lieb(ScalarFn::power(s), p, 2.0, Direction::Convex));
            }
        }
    }
}

/// Exploratory grid for `-1 < p < 0`, `1 < q < 2`,
/// `1/(p+q) <= s < min{1/(p+1), 1/(q-1)}`, `s != 1`, where no convexity
/// claim is made in either direction.
pub fn missing_region_points(dims: &[usize]) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for &dim in dims {
        let t = PointTemplate { dim };
        for p in [-0.75, -0.5, -0.25] {
            for q in [1.25, 1.5, 1.75] {
                let lo = 1.0 / (p + q);
                let hi = f64::min(1.0 / (p + 1.0), 1.0 / (q - 1.0));
                if !(lo < hi) {
                    continue;
                }
                for k in 0..4 {
                    let s = lo + (hi - lo) * k as f64 / 4.0;
                    if (s - 1.0).abs() < 1e-9 {
                        continue;
                    }
                    out.push(t.lieb(ScalarFn::power(s), p, q, Direction::Convex));
                }
            }
        }
    }
    out
}
