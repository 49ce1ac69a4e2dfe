//! Rectifying-curve analysis: binormal coefficients, the curvature condition,
//! measured position components and fixed-point detection.

mod components;
mod condition;
mod mu;

pub use components::{
    analysis_order, beta_constancy, fixed_point, measure_components, sample_frames,
    AnalysisOptions, BetaReport, Center, FixedPoint, FrameSampleData, QuadraticFit,
    RectifyingReport,
};
pub use condition::{
    condition_affine, condition_terms, constant_curvature_condition, e4_constant_k1_k3,
    e4_constant_k2_k3, kappa_last_closed_form, last_curvature_constant, rectifying_condition,
    LastCurvature,
};
pub use mu::{constant_curvature_mu, mu_forward_oracle, mu_recursion, MuTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Rectifying,
    NotRectifying,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Rectifying => 0,
            Verdict::NotRectifying => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

/// Residuals below `certify` certify, above `falsify` refute; the gap between
/// them is reported as inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub certify: f64,
    pub falsify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            certify: 1e-6,
            falsify: 1e-2,
        }
    }
}

impl Tolerances {
    pub fn new(certify: f64, falsify: f64) -> Result<Self> {
        let t = Self { certify, falsify };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.certify > 0.0) || !(self.falsify >= self.certify) || !self.falsify.is_finite() {
            return Err(Error::spec("tolerances must satisfy 0 < certify ≤ falsify"));
        }
        Ok(())
    }

    pub fn classify(&self, residual: f64) -> Verdict {
        if residual < self.certify {
            Verdict::Rectifying
        } else if residual > self.falsify {
            Verdict::NotRectifying
        } else {
            Verdict::Inconclusive
        }
    }
}
