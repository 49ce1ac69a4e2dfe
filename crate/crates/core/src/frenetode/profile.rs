use serde::{Deserialize, Serialize};

use crate::curves::expr::Expr;
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::numerics::gauss_legendre_unit;

/// One curvature function of the arclength `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvatureFn {
    Constant {
        value: f64,
    },
    /// `sign / √(a·s(s+2c) + b)`
    InvSqrtQuadratic {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default = "plus_one")]
        sign: f64,
    },
    /// `sign · (s+c) / √(a·s(s+2c) + b)`
    LinearOverSqrtQuadratic {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default = "plus_one")]
        sign: f64,
    },
    /// `amplitude · sin(frequency·s + phase) / (s + offset)`
    SinOverLinear {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        offset: f64,
    },
    /// `amplitude · (s + offset) · sec(frequency·s + phase)`
    LinearSec {
        amplitude: f64,
        offset: f64,
        frequency: f64,
        phase: f64,
    },
    /// Arbitrary expression in `s` from the explicit-curve grammar.
    Expression {
        expr: String,
    },
}

fn plus_one() -> f64 {
    1.0
}

/// Below this distance from `s = −offset`, a removable `sin(·)/(s+offset)`
/// singularity is evaluated through its integral representation.
const SINC_SWITCH: f64 = 0.5;

impl CurvatureFn {
    pub fn jet(&self, s: f64, order: usize) -> Result<Jet> {
        let var = Jet::variable(s, order);
        match self {
            CurvatureFn::Constant { value } => Ok(Jet::constant(s, *value, order)),
            CurvatureFn::InvSqrtQuadratic { a, b, c, sign } => {
                let q = quadratic(&var, *a, *b, *c)?;
                Ok(q.powf(-0.5)?.scale(*sign))
            }
            CurvatureFn::LinearOverSqrtQuadratic { a, b, c, sign } => {
                let q = quadratic(&var, *a, *b, *c)?;
                Ok((var.add_scalar(*c) * q.powf(-0.5)?).scale(*sign))
            }
            CurvatureFn::SinOverLinear {
                amplitude,
                frequency,
                phase,
                offset,
            } => sin_over_linear(s, order, *amplitude, *frequency, *phase, *offset),
            CurvatureFn::LinearSec {
                amplitude,
                offset,
                frequency,
                phase,
            } => {
                let arg = var.scale(*frequency).add_scalar(*phase);
                Ok((var.add_scalar(*offset) * arg.sec()?).scale(*amplitude))
            }
            CurvatureFn::Expression { expr } => Expr::parse(expr)?.eval(s, order),
        }
    }
}

fn quadratic(var: &Jet, a: f64, b: f64, c: f64) -> Result<Jet> {
    let q = (var * &var.add_scalar(2.0 * c)).scale(a).add_scalar(b);
    if q.value() <= 0.0 {
        return Err(Error::domain(format!(
            "a·s(s+2c)+b = {:e} is not positive at s = {}",
            q.value(),
            var.center()
        )));
    }
    Ok(q)
}

fn sin_over_linear(
    s: f64,
    order: usize,
    amp: f64,
    freq: f64,
    phase: f64,
    offset: f64,
) -> Result<Jet> {
    let x = s + offset;
    // numerator written as sin(freq·x + phi)
    let phi = phase - freq * offset;
    let removable = phi.sin().abs() < 1e-12;
    if removable && x.abs() < SINC_SWITCH {
        // sin(freq·x + phi)/x = ∫₀¹ freq·cos(freq·x·u + phi) du when sin(phi) = 0
        let rule = gauss_legendre_unit(24);
        let derivs = (0..=order)
            .map(|m| {
                let shift = m as f64 * std::f64::consts::FRAC_PI_2;
                let sum: f64 = rule
                    .iter()
                    .map(|(u, w)| {
                        w * (freq * u).powi(m as i32) * (freq * x * u + phi + shift).cos()
                    })
                    .sum();
                amp * freq * sum
            })
            .collect();
        return Jet::new(s, derivs);
    }
    let var = Jet::variable(s, order);
    let num = var.scale(freq).add_scalar(phase).sin();
    Ok(num.checked_div(&var.add_scalar(offset))?.scale(amp))
}

/// Curvatures `κ₁ … κ_{n−1}` of a curve in `Eⁿ` prescribed as functions of
/// arclength, together with the interval on which they are valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub dimension: usize,
    pub curvatures: Vec<CurvatureFn>,
    /// `[lo, hi]`; `null` entries mean unbounded.
    #[serde(default)]
    pub interval: Option<[Option<f64>; 2]>,
}

impl CurvatureProfile {
    pub fn new(curvatures: Vec<CurvatureFn>, interval: Option<(f64, f64)>) -> Result<Self> {
        let p = Self {
            dimension: curvatures.len() + 1,
            curvatures,
            interval: interval.map(|(a, b)| [Some(a), Some(b)]),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn constant(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&value| CurvatureFn::Constant { value })
                .collect(),
            None,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::spec("curvature profiles need dimension ≥ 2"));
        }
        if self.curvatures.len() != self.dimension - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dimension - 1,
                found: self.curvatures.len(),
            });
        }
        for c in &self.curvatures {
            if let CurvatureFn::Expression { expr } = c {
                Expr::parse(expr)?;
            }
        }
        let (lo, hi) = self.bounds();
        if !(lo < hi) {
            return Err(Error::spec("empty validity interval"));
        }
        Ok(())
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self.interval {
            Some([lo, hi]) => (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)),
            None => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn check_inside(&self, s: f64) -> Result<()> {
        let (lo, hi) = self.bounds();
        if s < lo || s > hi || !s.is_finite() {
            return Err(Error::domain(format!(
                "s = {s} outside the profile interval [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// Jets of all `n − 1` curvatures at `s`.
    pub fn jets(&self, s: f64, order: usize) -> Result<Vec<Jet>> {
        self.check_inside(s)?;
        let jets = self
            .curvatures
            .iter()
            .map(|c| c.jet(s, order))
            .collect::<Result<Vec<_>>>()?;
        let n = self.dimension;
        for (i, k) in jets.iter().enumerate().take(n.saturating_sub(2)) {
            if !(k.value() > 0.0) {
                return Err(Error::domain(format!(
                    "curvature {} = {} must be positive at s = {s}",
                    i + 1,
                    k.value()
                )));
            }
        }
        Ok(jets)
    }

    pub fn values(&self, s: f64) -> Result<Vec<f64>> {
        Ok(self.jets(s, 0)?.iter().map(Jet::value).collect())
    }
}
