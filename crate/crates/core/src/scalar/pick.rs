use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One point mass of the representing measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub lambda: f64,
    pub weight: f64,
}

/// Operator monotone function with finitely many atoms in its integral
/// representation:
///
/// `h(x) = h1 + b x + sum_i w_i (x - 1)(1 + l_i) / (x + l_i)`.
///
/// The linear term is `b x`, not `b (x - 1)`, so `h(1) = h1 + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PickIntegralFn {
    pub h1: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub atoms: Vec<Atom>,
}

impl PickIntegralFn {
    pub fn new(h1: f64, b: f64, atoms: Vec<Atom>) -> Result<Self> {
        let f = Self { h1, b, atoms };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.h1.is_finite() {
            return Err(Error::invalid("h1 must be finite"));
        }
        if !(self.b >= 0.0) || !self.b.is_finite() {
            return Err(Error::invalid(format!(
                "linear coefficient b must be a finite value >= 0, got {}",
                self.b
            )));
        }
        for a in &self.atoms {
            if !(a.lambda >= 0.0) || !a.lambda.is_finite() {
                return Err(Error::invalid(format!("atom location must be >= 0, got {}", a.lambda)));
            }
            if !(a.weight >= 0.0) || !a.weight.is_finite() {
                return Err(Error::invalid(format!("atom weight must be >= 0, got {}", a.weight)));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.h1 + self.b * x;
        for a in &self.atoms {
            // Written so that x = 1 contributes exactly zero.
            acc += a.weight * (x - 1.0) * (1.0 + a.lambda) / (x + a.lambda);
        }
        acc
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let mut acc = self.b;
        for a in &self.atoms {
            let d = x + a.lambda;
            acc += a.weight * (1.0 + a.lambda) * (1.0 + a.lambda) / (d * d);
        }
        acc
    }

    pub fn value_at_one(&self) -> f64 {
        self.h1 + self.b
    }

    /// Rescales so that `h(1) = 1`; fails when `h(1) <= 0`.
    pub fn normalized(&self) -> Result<Self> {
        let at_one = self.value_at_one();
        if !(at_one > 0.0) {
            return Err(Error::invalid("cannot normalize a function with h(1) <= 0"));
        }
        let c = 1.0 / at_one;
        Ok(Self {
            h1: self.h1 * c,
            b: self.b * c,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    lambda: a.lambda,
                    weight: a.weight * c,
                })
                .collect(),
        })
    }
}
