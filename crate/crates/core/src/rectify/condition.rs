//! The curvature condition for a curve to be congruent to a rectifying curve,
//! and curvature profiles that satisfy it in closed form.

use crate::error::{Error, Result};
use crate::frenetode::{CurvatureFn, CurvatureProfile};
use crate::jets::Jet;

use super::mu::{constant_curvature_mu, mu_recursion};

/// The two terms of `κ_{n−1}μ_{n−3} + μ_{n−2}′` at the jet center.
pub fn condition_terms(kappas: &[Jet], c: f64) -> Result<(f64, f64)> {
    let n = kappas.len() + 1;
    let order = kappas.iter().map(Jet::order).min().unwrap_or(0);
    if n >= 3 && order < n - 2 {
        return Err(Error::OrderTooLow {
            need: n - 2,
            have: order,
        });
    }
    let table = mu_recursion(kappas, c)?;
    let first = if n >= 4 {
        kappas[n - 2].value() * table.mu(n - 3).value()
    } else {
        0.0
    };
    let second = table.mu(n - 2).derivative()?.value();
    Ok((first, second))
}

/// `κ_{n−1}μ_{n−3} + (μ_{n−2})′` at the center of the curvature jets; zero for
/// every `s` exactly when the curvatures belong to a rectifying curve with
/// offset `c`. Needs curvature jets of order `n − 2`.
pub fn rectifying_condition(kappas: &[Jet], c: f64) -> Result<f64> {
    let (a, b) = condition_terms(kappas, c)?;
    Ok(a + b)
}

/// The condition is affine in `c`; returns `(value at c = 0, slope)`.
pub fn condition_affine(kappas: &[Jet]) -> Result<(f64, f64)> {
    let at0 = rectifying_condition(kappas, 0.0)?;
    let at1 = rectifying_condition(kappas, 1.0)?;
    Ok((at0, at1 - at0))
}

/// Condition value for constant curvatures `κ₁ … κ_{n−1}`, which never vanishes
/// identically: `(κ₁κ₃…κ_{n−3})/(κ₂…κ_{n−2})·(s+c)·κ_{n−1}` for even `n`, and
/// `μ_{n−3}κ_{n−1} + (κ₁κ₃…κ_{n−2})/(κ₂…κ_{n−1})` for odd `n`.
pub fn constant_curvature_condition(kappas: &[f64], s: f64, c: f64) -> f64 {
    let n = kappas.len() + 1;
    let last = kappas[n - 2];
    if n.is_multiple_of(2) {
        constant_curvature_mu(kappas, n - 3, s, c) * last
    } else {
        // (μ_{n−2})′ is the slope of an odd-index closed form
        let slope = constant_curvature_mu(kappas, n - 2, 1.0, 0.0);
        constant_curvature_mu(kappas, n - 3, s, c) * last + slope
    }
}

/// `κ_{n−1}(s)` for a rectifying curve whose first `n − 2` curvatures are the
/// given constants, with the constant `a` of `a·s(s+2c) + b`.
#[derive(Debug, Clone)]
pub struct LastCurvature {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub profile: CurvatureProfile,
}

/// The constant `a` for constants `κ₁ … κ_{n−2}`.
///
/// Even `n`: with `μ_{n−3} = A(s+c)` and `μ_{n−4} = B`, `a = −A/(A + Bκ_{n−2})`.
/// Odd `n`: with `μ_{n−4} = A(s+c)` and `μ_{n−3} = B`, `a = −B/(Aκ_{n−2})`.
pub fn last_curvature_constant(n: usize, kappas: &[f64]) -> Result<f64> {
    if n < 4 {
        return Err(Error::spec("the last-curvature closed form needs n ≥ 4"));
    }
    if kappas.len() != n - 2 {
        return Err(Error::DimensionMismatch {
            expected: n - 2,
            found: kappas.len(),
        });
    }
    if kappas.iter().any(|k| !(*k > 0.0)) {
        return Err(Error::domain("constant curvatures must be positive"));
    }
    let last = kappas[n - 3];
    Ok(if n.is_multiple_of(2) {
        let a = constant_curvature_mu(kappas, n - 3, 1.0, 0.0);
        let b = constant_curvature_mu(kappas, n - 4, 0.0, 0.0);
        -a / (a + b * last)
    } else {
        let a = constant_curvature_mu(kappas, n - 4, 1.0, 0.0);
        let b = constant_curvature_mu(kappas, n - 3, 0.0, 0.0);
        -b / (a * last)
    })
}

/// Largest interval on which `a·s(s+2c) + b > 0`, preferring the component
/// that contains `s = −c`.
fn positive_interval(a: f64, b: f64, c: f64) -> Result<(f64, f64)> {
    // a·s(s+2c) + b = a(s+c)² + (b − a c²)
    let offset = b - a * c * c;
    if a == 0.0 {
        return if b > 0.0 {
            Ok((f64::NEG_INFINITY, f64::INFINITY))
        } else {
            Err(Error::domain("a·s(s+2c)+b is never positive"))
        };
    }
    let r2 = -offset / a;
    if a < 0.0 {
        if r2 <= 0.0 {
            return Err(Error::domain("a·s(s+2c)+b is never positive"));
        }
        let r = r2.sqrt();
        Ok((-c - r, -c + r))
    } else if r2 < 0.0 {
        Ok((f64::NEG_INFINITY, f64::INFINITY))
    } else {
        Ok((-c + r2.sqrt(), f64::INFINITY))
    }
}

/// Profile with constant `κ₁ … κ_{n−2}` and the closed-form `κ_{n−1}`:
/// `±1/√(a·s(s+2c)+b)` for even `n`, `±(s+c)/√(a·s(s+2c)+b)` for odd `n`.
pub fn kappa_last_closed_form(
    n: usize,
    kappas: &[f64],
    b: f64,
    c: f64,
    sign: f64,
) -> Result<LastCurvature> {
    let a = last_curvature_constant(n, kappas)?;
    let (lo, hi) = positive_interval(a, b, c)?;
    let last = if n.is_multiple_of(2) {
        CurvatureFn::InvSqrtQuadratic { a, b, c, sign }
    } else {
        CurvatureFn::LinearOverSqrtQuadratic { a, b, c, sign }
    };
    let mut curvatures: Vec<CurvatureFn> = kappas
        .iter()
        .map(|&value| CurvatureFn::Constant { value })
        .collect();
    curvatures.push(last);
    let mut profile = CurvatureProfile::new(curvatures, None)?;
    profile.interval = Some([lo.is_finite().then_some(lo), hi.is_finite().then_some(hi)]);
    Ok(LastCurvature { a, b, c, profile })
}

/// `E⁴` profile with constant `κ₂, κ₃` and `κ₁(s) = c₁ sin(κ₃s + c₂)/(s + c)`.
pub fn e4_constant_k2_k3(
    k2: f64,
    k3: f64,
    c1: f64,
    c2: f64,
    c: f64,
    interval: (f64, f64),
) -> Result<CurvatureProfile> {
    CurvatureProfile::new(
        vec![
            CurvatureFn::SinOverLinear {
                amplitude: c1,
                frequency: k3,
                phase: c2,
                offset: c,
            },
            CurvatureFn::Constant { value: k2 },
            CurvatureFn::Constant { value: k3 },
        ],
        Some(interval),
    )
}

/// `E⁴` profile with constant `κ₁, κ₃` and `κ₂(s) = c₂(s + c) sec(κ₃s + c₁)`.
pub fn e4_constant_k1_k3(
    k1: f64,
    k3: f64,
    c1: f64,
    c2: f64,
    c: f64,
    interval: (f64, f64),
) -> Result<CurvatureProfile> {
    CurvatureProfile::new(
        vec![
            CurvatureFn::Constant { value: k1 },
            CurvatureFn::LinearSec {
                amplitude: c2,
                offset: c,
                frequency: k3,
                phase: c1,
            },
            CurvatureFn::Constant { value: k3 },
        ],
        Some(interval),
    )
}
