//! Real functions on `(0, inf)` with declared shape classes.

mod classify;
mod example_a4;
mod pick;

use std::fmt;
use std::sync::Arc;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use classify::log_grid;
pub use classify::{audit_grid, classify_sampled, ClassReport, AUDIT_GRID_LEN, SAMPLED_TOL};
pub use example_a4::ExampleA4;
pub use pick::{Atom, PickIntegralFn};

bitflags! {
    /// Shape classes a function is declared to belong to on `(0, inf)`.
    #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
    pub struct FnClass: u8 {
        const NON_DECREASING = 1 << 0;
        const NON_INCREASING = 1 << 1;
        const CONVEX = 1 << 2;
        const CONCAVE = 1 << 3;
        /// Operator monotone by construction (never inferred from samples).
        const OPERATOR_MONOTONE = 1 << 4;
        /// `-f` is operator monotone by construction.
        const OPERATOR_MONOTONE_DECREASING = 1 << 5;
    }
}

impl FnClass {
    /// Flags of the constant function.
    pub const CONSTANT: FnClass = FnClass::all();

    /// Only the flags `classify_sampled` can observe.
    pub const SAMPLED: FnClass = FnClass::NON_DECREASING
        .union(FnClass::NON_INCREASING)
        .union(FnClass::CONVEX)
        .union(FnClass::CONCAVE);

    /// Adds the scalar consequences of operator monotonicity.
    fn saturate(self) -> FnClass {
        let mut out = self;
        if out.contains(FnClass::OPERATOR_MONOTONE) {
            out |= FnClass::NON_DECREASING | FnClass::CONCAVE;
        }
        if out.contains(FnClass::OPERATOR_MONOTONE_DECREASING) {
            out |= FnClass::NON_INCREASING | FnClass::CONVEX;
        }
        out
    }

    /// Flags of `-f` given the flags of `f`.
    pub fn negated(self) -> FnClass {
        let mut out = FnClass::empty();
        let pairs = [
            (FnClass::NON_DECREASING, FnClass::NON_INCREASING),
            (FnClass::CONVEX, FnClass::CONCAVE),
            (
                FnClass::OPERATOR_MONOTONE,
                FnClass::OPERATOR_MONOTONE_DECREASING,
            ),
        ];
        for (a, b) in pairs {
            if self.contains(a) {
                out |= b;
            }
            if self.contains(b) {
                out |= a;
            }
        }
        out
    }
}

/// Serializable description of a catalogue function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FnDescriptor {
    Power { s: f64 },
    Log,
    Affine { a: f64, b: f64 },
    Pick(PickIntegralFn),
    A4(ExampleA4),
    /// `1 - exp(-x)`: non-decreasing and concave, not operator monotone.
    Saturating,
    /// `x -> inner(x^gamma)`
    Compose {
        inner: Box<FnDescriptor>,
        gamma: f64,
    },
    /// `x -> -inner(x)`
    Negate { inner: Box<FnDescriptor> },
}

impl FnDescriptor {
    pub fn validate(&self) -> Result<()> {
        match self {
            FnDescriptor::Power { s } if !s.is_finite() => {
                Err(Error::invalid(format!("power exponent must be finite, got {s}")))
            }
            FnDescriptor::Affine { a, b } if !a.is_finite() || !b.is_finite() => {
                Err(Error::invalid("affine coefficients must be finite"))
            }
            FnDescriptor::Pick(p) => p.validate(),
            FnDescriptor::A4(e) => e.validate(),
            FnDescriptor::Compose { inner, gamma } => {
                if !gamma.is_finite() {
                    return Err(Error::invalid("composition exponent must be finite"));
                }
                inner.validate()
            }
            FnDescriptor::Negate { inner } => inner.validate(),
            _ => Ok(()),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            FnDescriptor::Power { s } => {
                if *s == 0.0 {
                    1.0
                } else {
                    x.powf(*s)
                }
            }
            FnDescriptor::Log => x.ln(),
            FnDescriptor::Affine { a, b } => a * x + b,
            FnDescriptor::Pick(p) => p.eval(x),
            FnDescriptor::A4(e) => e.eval(x),
            FnDescriptor::Saturating => -(-x).exp_m1(),
            FnDescriptor::Compose { inner, gamma } => inner.eval(x.powf(*gamma)),
            FnDescriptor::Negate { inner } => -inner.eval(x),
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match self {
            FnDescriptor::Power { s } => {
                if *s == 0.0 {
                    0.0
                } else {
                    s * x.powf(s - 1.0)
                }
            }
            FnDescriptor::Log => 1.0 / x,
            FnDescriptor::Affine { a, .. } => *a,
            FnDescriptor::Pick(p) => p.derivative(x),
            FnDescriptor::A4(e) => e.derivative(x),
            FnDescriptor::Saturating => (-x).exp(),
            FnDescriptor::Compose { inner, gamma } => {
                inner.derivative(x.powf(*gamma)) * gamma * x.powf(gamma - 1.0)
            }
            FnDescriptor::Negate { inner } => -inner.derivative(x),
        }
    }

    fn flags(&self) -> FnClass {
        let raw = match self {
            FnDescriptor::Power { s } => power_flags(*s),
            FnDescriptor::Log => FnClass::OPERATOR_MONOTONE,
            FnDescriptor::Affine { a, .. } => {
                let base = FnClass::CONVEX | FnClass::CONCAVE;
                if *a > 0.0 {
                    base | FnClass::OPERATOR_MONOTONE
                } else if *a < 0.0 {
                    base | FnClass::OPERATOR_MONOTONE_DECREASING
                } else {
                    FnClass::CONSTANT
                }
            }
            FnDescriptor::Pick(_) => FnClass::OPERATOR_MONOTONE,
            FnDescriptor::A4(e) => e.flags(),
            FnDescriptor::Saturating => FnClass::NON_DECREASING | FnClass::CONCAVE,
            FnDescriptor::Compose { inner, gamma } => compose_flags(inner, *gamma),
            FnDescriptor::Negate { inner } => inner.flags().negated(),
        };
        raw.saturate()
    }

    fn label(&self) -> String {
        match self {
            FnDescriptor::Power { s } => format!("x^{s}"),
            FnDescriptor::Log => "log".to_string(),
            FnDescriptor::Affine { a, b } => format!("{a}x+{b}"),
            FnDescriptor::Pick(p) => format!("pick(h1={},b={},atoms={})", p.h1, p.b, p.atoms.len()),
            FnDescriptor::A4(e) => e.label(),
            FnDescriptor::Saturating => "1-exp(-x)".to_string(),
            FnDescriptor::Compose { inner, gamma } => format!("({})(x^{gamma})", inner.label()),
            FnDescriptor::Negate { inner } => format!("-({})", inner.label()),
        }
    }

    /// `x -> self(x^gamma)` with trivial cases folded.
    fn compose_power(&self, gamma: f64) -> FnDescriptor {
        if (gamma - 1.0).abs() < 1e-12 {
            return self.clone();
        }
        match self {
            FnDescriptor::Power { s } => FnDescriptor::Power {
                s: snap_to_integer(s * gamma),
            },
            FnDescriptor::Compose { inner, gamma: g0 } => inner.compose_power(g0 * gamma),
            other => FnDescriptor::Compose {
                inner: Box::new(other.clone()),
                gamma,
            },
        }
    }
}

/// Undoes rounding in products like `(1/g) * g`, so that exponents meant to
/// sit on a class boundary (0, 1, -1, ...) land exactly on it.
fn snap_to_integer(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

fn power_flags(s: f64) -> FnClass {
    if s == 0.0 {
        return FnClass::CONSTANT;
    }
    let mut f = if s > 0.0 {
        FnClass::NON_DECREASING
    } else {
        FnClass::NON_INCREASING
    };
    if s >= 1.0 || s <= 0.0 {
        f |= FnClass::CONVEX;
    }
    if (0.0..=1.0).contains(&s) {
        f |= FnClass::CONCAVE | FnClass::OPERATOR_MONOTONE;
    }
    if (-1.0..=0.0).contains(&s) {
        f |= FnClass::OPERATOR_MONOTONE_DECREASING;
    }
    f
}

/// Flags of `x -> h(x^gamma)` that follow from the flags of `h` alone.
fn compose_flags(inner: &FnDescriptor, gamma: f64) -> FnClass {
    if gamma == 0.0 {
        return FnClass::CONSTANT;
    }
    if matches!(inner, FnDescriptor::Log) {
        // log(x^gamma) = gamma log x
        return if gamma > 0.0 {
            FnClass::OPERATOR_MONOTONE
        } else {
            FnClass::OPERATOR_MONOTONE_DECREASING
        };
    }
    let h = inner.flags();
    let mut out = FnClass::empty();

    if gamma > 0.0 {
        out |= h & (FnClass::NON_DECREASING | FnClass::NON_INCREASING);
    } else {
        out |= (h & (FnClass::NON_DECREASING | FnClass::NON_INCREASING)).negated();
    }

    let unit = gamma.abs() <= 1.0;
    if h.contains(FnClass::OPERATOR_MONOTONE) && unit {
        out |= if gamma > 0.0 {
            FnClass::OPERATOR_MONOTONE
        } else {
            FnClass::OPERATOR_MONOTONE_DECREASING
        };
    }
    if h.contains(FnClass::OPERATOR_MONOTONE_DECREASING) && unit {
        out |= if gamma > 0.0 {
            FnClass::OPERATOR_MONOTONE_DECREASING
        } else {
            FnClass::OPERATOR_MONOTONE
        };
    }

    let inner_convex = gamma >= 1.0 || gamma < 0.0;
    let inner_concave = gamma > 0.0 && gamma <= 1.0;
    let up = h.contains(FnClass::NON_DECREASING);
    let down = h.contains(FnClass::NON_INCREASING);
    if inner_convex {
        if up && h.contains(FnClass::CONVEX) {
            out |= FnClass::CONVEX;
        }
        if down && h.contains(FnClass::CONCAVE) {
            out |= FnClass::CONCAVE;
        }
    }
    if inner_concave {
        if up && h.contains(FnClass::CONCAVE) {
            out |= FnClass::CONCAVE;
        }
        if down && h.contains(FnClass::CONVEX) {
            out |= FnClass::CONVEX;
        }
    }
    out
}

type Closure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Desc(FnDescriptor),
    Closure { f: Closure, df: Option<Closure> },
}

/// An evaluable real function on `(0, inf)` with a label and declared flags.
#[derive(Clone)]
pub struct ScalarFn {
    repr: Repr,
    label: String,
    flags: FnClass,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn")
            .field("label", &self.label)
            .field("flags", &self.flags)
            .finish()
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl ScalarFn {
    pub fn from_descriptor(desc: &FnDescriptor) -> Result<Self> {
        desc.validate()?;
        Ok(Self::from_valid(desc.clone()))
    }

    fn from_valid(desc: FnDescriptor) -> Self {
        Self {
            label: desc.label(),
            flags: desc.flags(),
            repr: Repr::Desc(desc),
        }
    }

    pub fn power(s: f64) -> Self {
        Self::from_valid(FnDescriptor::Power { s })
    }

    pub fn log() -> Self {
        Self::from_valid(FnDescriptor::Log)
    }

    pub fn affine(a: f64, b: f64) -> Self {
        Self::from_valid(FnDescriptor::Affine { a, b })
    }

    pub fn saturating() -> Self {
        Self::from_valid(FnDescriptor::Saturating)
    }

    pub fn pick(h: PickIntegralFn) -> Result<Self> {
        Self::from_descriptor(&FnDescriptor::Pick(h))
    }

    pub fn pick_integral(h1: f64, b: f64, atoms: Vec<Atom>) -> Result<Self> {
        Self::pick(PickIntegralFn::new(h1, b, atoms)?)
    }

    pub fn example_a4(e: ExampleA4) -> Result<Self> {
        Self::from_descriptor(&FnDescriptor::A4(e))
    }

    /// Wraps an arbitrary closure. The caller is responsible for the flags.
    pub fn custom(
        label: impl Into<String>,
        flags: FnClass,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            repr: Repr::Closure {
                f: Arc::new(f),
                df: None,
            },
            label: label.into(),
            flags: flags.saturate(),
        }
    }

    /// Like [`ScalarFn::custom`] with an analytic derivative.
    pub fn custom_with_derivative(
        label: impl Into<String>,
        flags: FnClass,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            repr: Repr::Closure {
                f: Arc::new(f),
                df: Some(Arc::new(df)),
            },
            label: label.into(),
            flags: flags.saturate(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn flags(&self) -> FnClass {
        self.flags
    }

    pub fn has(&self, flags: FnClass) -> bool {
        self.flags.contains(flags)
    }

    pub fn descriptor(&self) -> Option<&FnDescriptor> {
        match &self.repr {
            Repr::Desc(d) => Some(d),
            Repr::Closure { .. } => None,
        }
    }

    /// Raw evaluation; may return non-finite values outside the domain.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Desc(d) => d.eval(x),
            Repr::Closure { f, .. } => f(x),
        }
    }

    /// Evaluation that rejects points outside `(0, inf)` and non-finite values.
    pub fn try_eval(&self, x: f64) -> Result<f64> {
        let y = if x > 0.0 && x.is_finite() {
            self.eval(x)
        } else {
            f64::NAN
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Domain {
                function: self.label.clone(),
                at: x,
            })
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Desc(d) => d.derivative(x),
            Repr::Closure { df: Some(df), .. } => df(x),
            Repr::Closure { f, df: None } => {
                let h = 1e-6 * x.max(1e-3);
                let lo = (x - h).max(0.5 * x);
                let hi = x + h;
                (f(hi) - f(lo)) / (hi - lo)
            }
        }
    }

    /// `f(0+)`, possibly infinite.
    pub fn limit_at_zero(&self) -> f64 {
        let at_zero = self.eval(0.0);
        if at_zero.is_finite() {
            at_zero
        } else {
            self.eval(f64::MIN_POSITIVE)
        }
    }

    /// `x -> f(x^gamma)`.
    pub fn compose_power(&self, gamma: f64) -> ScalarFn {
        match &self.repr {
            Repr::Desc(d) => Self::from_valid(d.compose_power(gamma)),
            Repr::Closure { f, .. } => {
                if (gamma - 1.0).abs() < 1e-12 {
                    return self.clone();
                }
                let f = f.clone();
                let mut flags = FnClass::empty();
                if gamma > 0.0 {
                    flags |= self.flags & (FnClass::NON_DECREASING | FnClass::NON_INCREASING);
                } else if gamma < 0.0 {
                    flags |= (self.flags & (FnClass::NON_DECREASING | FnClass::NON_INCREASING))
                        .negated();
                }
                Self::custom(format!("({})(x^{gamma})", self.label), flags, move |x| {
                    f(x.powf(gamma))
                })
            }
        }
    }

    /// `x -> -f(x)`.
    pub fn negate(&self) -> ScalarFn {
        match &self.repr {
            Repr::Desc(d) => Self::from_valid(FnDescriptor::Negate {
                inner: Box::new(d.clone()),
            }),
            Repr::Closure { f, .. } => {
                let f = f.clone();
                Self::custom(format!("-({})", self.label), self.flags.negated(), move |x| -f(x))
            }
        }
    }

    /// Sampled shape classification of `x -> f(x^gamma)` on the audit grid.
    pub fn screen(&self, gamma: f64) -> Result<ClassReport> {
        classify_sampled(self, &audit_grid(), gamma)
    }
}

impl Serialize for ScalarFn {
    /// Catalogue functions serialize as their descriptor; closures as their label.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.repr {
            Repr::Desc(d) => d.serialize(s),
            Repr::Closure { .. } => s.serialize_str(&self.label),
        }
    }
}

impl<'de> Deserialize<'de> for ScalarFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let desc = FnDescriptor::deserialize(d)?;
        ScalarFn::from_descriptor(&desc).map_err(serde::de::Error::custom)
    }
}

/// Shorthand constructors matching the catalogue names.
pub fn make_power(s: f64) -> ScalarFn {
    ScalarFn::power(s)
}

pub fn make_log() -> ScalarFn {
    ScalarFn::log()
}

pub fn make_affine(a: f64, b: f64) -> ScalarFn {
    ScalarFn::affine(a, b)
}

pub fn make_pick_integral(h1: f64, b: f64, atoms: Vec<Atom>) -> Result<ScalarFn> {
    ScalarFn::pick_integral(h1, b, atoms)
}

pub fn make_example_a4(e: ExampleA4) -> Result<ScalarFn> {
    ScalarFn::example_a4(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn catalogue_values() {
        assert_eq!(make_power(2.0).eval(3.0), 9.0);
        assert_eq!(make_log().eval(1.0), 0.0);
        assert_eq!(make_power(-1.0).eval(4.0), 0.25);
        assert_eq!(make_affine(2.0, 1.0).eval(3.0), 7.0);
    }

    #[test]
    fn power_flags_by_exponent() {
        let sq = make_power(2.0);
        assert!(sq.has(FnClass::NON_DECREASING | FnClass::CONVEX));
        assert!(!sq.has(FnClass::CONCAVE));
        let root = make_power(0.5);
        assert!(root.has(FnClass::NON_DECREASING | FnClass::CONCAVE | FnClass::OPERATOR_MONOTONE));
        let inv = make_power(-1.0);
        assert!(inv.has(FnClass::NON_INCREASING | FnClass::CONVEX | FnClass::OPERATOR_MONOTONE_DECREASING));
        let inv_sq = make_power(-2.0);
        assert!(!inv_sq.has(FnClass::OPERATOR_MONOTONE_DECREASING));
    }

    #[test]
    fn compose_folds_powers() {
        let f = make_power(0.5).compose_power(4.0);
        assert_eq!(f.descriptor(), Some(&FnDescriptor::Power { s: 2.0 }));
        let p = make_pick_integral(0.5, 0.0, vec![Atom { lambda: 1.0, weight: 0.25 }]).unwrap();
        let back = p.compose_power(1.0 / 0.75).compose_power(0.75);
        assert_eq!(back.descriptor(), p.descriptor());
        assert!(back.has(FnClass::OPERATOR_MONOTONE));
    }

    #[test]
    fn compose_flag_rules() {
        let p = make_pick_integral(1.0, 0.5, vec![Atom { lambda: 2.0, weight: 1.0 }]).unwrap();
        assert!(p.compose_power(0.5).has(FnClass::OPERATOR_MONOTONE));
        assert!(p.compose_power(-0.5).has(FnClass::OPERATOR_MONOTONE_DECREASING));
        assert!(!p.compose_power(2.0).has(FnClass::CONCAVE));
        assert!(p.compose_power(2.0).has(FnClass::NON_DECREASING));
        let l = make_log().compose_power(3.0);
        assert!(l.has(FnClass::OPERATOR_MONOTONE));
    }

    #[test]
    fn descriptor_json_shapes() {
        let f: ScalarFn = serde_json::from_str(r#"{"kind": "power", "params": {"s": 0.5}}"#).unwrap();
        assert_eq!(f.eval(4.0), 2.0);
        let l: ScalarFn = serde_json::from_str(r#"{"kind": "log"}"#).unwrap();
        assert_eq!(l.eval(1.0), 0.0);
        let p: ScalarFn = serde_json::from_str(
            r#"{"kind": "pick", "params": {"h1": 0.5, "atoms": [{"lambda": 1, "weight": 0.25}]}}"#,
        )
        .unwrap();
        assert!((p.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
        let a: ScalarFn = serde_json::from_str(
            r#"{"kind": "a4", "params": {"variant": "shifted_power", "s": 2, "alpha": 1}}"#,
        )
        .unwrap();
        assert_eq!(a.eval(2.0), 1.0);
        let bad = serde_json::from_str::<ScalarFn>(
            r#"{"kind": "pick", "params": {"h1": 0, "b": -1}}"#,
        );
        assert!(bad.is_err());
        let text = serde_json::to_string(&make_power(2.0)).unwrap();
        assert_eq!(text, r#"{"kind":"power","params":{"s":2.0}}"#);
    }

    #[test]
    fn try_eval_domain() {
        assert!(make_log().try_eval(0.0).is_err());
        assert!(make_power(2.0).try_eval(-1.0).is_err());
        assert!(make_power(2.0).try_eval(2.0).is_ok());
    }

    #[test]
    fn derivatives_match_differences() {
        let fns = [
            make_power(0.3),
            make_log(),
            make_pick_integral(0.2, 0.1, vec![Atom { lambda: 0.5, weight: 0.7 }]).unwrap(),
            ScalarFn::saturating(),
            make_power(0.5).compose_power(-1.5).negate(),
        ];
        for f in &fns {
            for &x in &[0.3, 1.0, 4.0] {
                let h = 1e-6;
                let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
                assert!((fd - f.derivative(x)).abs() < 1e-6 * (1.0 + fd.abs()), "{f}");
            }
        }
    }

    fn sampled_flags_consistent(f: &ScalarFn) -> bool {
        let report = f.screen(1.0).unwrap();
        (f.flags() & FnClass::SAMPLED) - report.flags == FnClass::empty()
    }

    proptest! {
        #[test]
        fn prop_power_flags_survive_screening(s in -3.0f64..3.0) {
            prop_assert!(sampled_flags_consistent(&make_power(s)));
        }

        #[test]
        fn prop_pick_is_monotone_and_concave(
            h1 in -2.0f64..2.0,
            b in 0.0f64..2.0,
            atoms in proptest::collection::vec((0.0f64..10.0, 0.0f64..3.0), 0..4),
        ) {
            let atoms = atoms.into_iter().map(|(lambda, weight)| Atom { lambda, weight }).collect();
            let f = make_pick_integral(h1, b, atoms).unwrap();
            prop_assert!((f.eval(1.0) - (h1 + b)).abs() <= 1e-15 * (1.0 + h1.abs() + b));
            let report = f.screen(1.0).unwrap();
            prop_assert!(report.flags.contains(FnClass::NON_DECREASING | FnClass::CONCAVE));
        }

        #[test]
        fn prop_compose_flags_survive_screening(s in 0.05f64..1.0, gamma in -2.0f64..2.0) {
            let f = make_pick_integral(s, s, vec![Atom { lambda: s, weight: 1.0 }]).unwrap();
            prop_assert!(sampled_flags_consistent(&f.compose_power(gamma)));
            prop_assert!(sampled_flags_consistent(&make_log().compose_power(gamma)));
        }
    }
}
