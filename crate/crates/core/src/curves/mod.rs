//! Declarative curve families with exact jet evaluation.
//!
//! A [`CurveSpec`] is plain data (it round-trips through JSON); compiling it
//! into a [`Curve`] parses expressions, fits splines and integrates curvature
//! profiles once, after which evaluation is cheap, pure and thread-safe.

pub mod expr;
pub mod spline;

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frenetode::{self, CurvatureProfile, IntegratedCurve};
use crate::jets::{max_order, Jet, JetVector};
use expr::Expr;
use spline::QuinticSpline;

/// Default half-width (radians) of the excluded band around poles of `sec`.
pub const DEFAULT_SEC_BAND: f64 = 1e-3;

/// Tolerance on the unit-sphere and unit-speed identities of a spherical helix.
pub const SPHERICAL_HELIX_TOL: f64 = 1e-12;

/// Pass threshold of [`validate_spherical_arclength`].
pub const SPHERICAL_ARCLENGTH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum Family {
    /// `(a₁ sin b₁t, a₁ cos b₁t, …, a_m sin b_mt, a_m cos b_mt)`, `n = 2m`.
    GeneralizedHelixEven {
        amplitudes: Vec<f64>,
        frequencies: Vec<f64>,
    },
    /// As the even helix with a final coordinate `drift·t`, `n = 2m + 1`.
    GeneralizedHelixOdd {
        amplitudes: Vec<f64>,
        frequencies: Vec<f64>,
        drift: f64,
    },
    /// Arclength-parameterized helix on the unit hypersphere; odd dimensions
    /// carry the constant last coordinate `height`.
    SphericalHelix {
        amplitudes: Vec<f64>,
        frequencies: Vec<f64>,
        #[serde(default)]
        height: f64,
    },
    /// `α(t) = scale · sec(t + shift) · y(t)`.
    SecScaled {
        scale: f64,
        shift: f64,
        inner: Box<CurveSpec>,
    },
    /// One expression in `t` per coordinate.
    Explicit { components: Vec<String> },
    /// Quintic-spline interpolation of samples; jets up to order 4 only.
    Sampled { t: Vec<f64>, points: Vec<Vec<f64>> },
    /// Integrated from prescribed curvatures; `t` is arclength.
    CurvatureDriven {
        profile: CurvatureProfile,
        step: f64,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GeneralizedHelixEven { .. } => "GeneralizedHelixEven",
            Family::GeneralizedHelixOdd { .. } => "GeneralizedHelixOdd",
            Family::SphericalHelix { .. } => "SphericalHelix",
            Family::SecScaled { .. } => "SecScaled",
            Family::Explicit { .. } => "Explicit",
            Family::Sampled { .. } => "Sampled",
            Family::CurvatureDriven { .. } => "CurvatureDriven",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub dimension: usize,
    #[serde(flatten)]
    pub family: Family,
    pub domain: [f64; 2],
    /// Constant offset added to every point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<Vec<f64>>,
}

impl CurveSpec {
    pub fn new(dimension: usize, family: Family, domain: (f64, f64)) -> Self {
        Self {
            dimension,
            family,
            domain: [domain.0, domain.1],
            translation: None,
        }
    }

    pub fn translated(mut self, offset: Vec<f64>) -> Self {
        self.translation = Some(offset);
        self
    }

    pub fn sec_scaled(inner: CurveSpec, scale: f64, shift: f64, domain: (f64, f64)) -> Self {
        let dimension = inner.dimension;
        Self::new(
            dimension,
            Family::SecScaled {
                scale,
                shift,
                inner: Box::new(inner),
            },
            domain,
        )
    }

    pub fn explicit(components: &[&str], domain: (f64, f64)) -> Self {
        Self::new(
            components.len(),
            Family::Explicit {
                components: components.iter().map(|s| s.to_string()).collect(),
            },
            domain,
        )
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.domain[0], self.domain[1])
    }
}

#[derive(Debug, Clone)]
struct Helix {
    amplitudes: Vec<f64>,
    frequencies: Vec<f64>,
    phases: Vec<f64>,
    tail: HelixTail,
}

#[derive(Debug, Clone, Copy)]
enum HelixTail {
    None,
    Drift(f64),
    Height(f64),
}

#[derive(Debug, Clone)]
enum Compiled {
    Helix(Helix),
    SecScaled {
        scale: f64,
        shift: f64,
        inner: Box<Curve>,
    },
    Explicit(Vec<Expr>),
    Sampled(Vec<QuinticSpline>),
    CurvatureDriven(Arc<IntegratedCurve>),
}

/// A compiled, evaluable curve.
#[derive(Debug, Clone)]
pub struct Curve {
    spec: CurveSpec,
    compiled: Compiled,
    sec_band: f64,
}

fn check_helix_params(
    amplitudes: &[f64],
    frequencies: &[f64],
    m: usize,
    positive: bool,
) -> Result<()> {
    if amplitudes.len() != m || frequencies.len() != m {
        return Err(Error::spec(format!(
            "helix needs {m} amplitudes and {m} frequencies"
        )));
    }
    if positive && amplitudes.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::spec("helix amplitudes must be positive"));
    }
    for i in 0..m {
        for j in 0..i {
            if frequencies[i] == frequencies[j] {
                return Err(Error::spec("helix frequencies must be pairwise distinct"));
            }
        }
    }
    Ok(())
}

fn pole_distance(x: f64) -> f64 {
    let y = x - FRAC_PI_2;
    (y - PI * (y / PI).round()).abs()
}

impl Curve {
    pub fn new(spec: CurveSpec) -> Result<Self> {
        Self::with_sec_band(spec, DEFAULT_SEC_BAND)
    }

    pub fn with_sec_band(spec: CurveSpec, sec_band: f64) -> Result<Self> {
        let n = spec.dimension;
        if n < 2 {
            return Err(Error::spec("dimension must be at least 2"));
        }
        let (t0, t1) = spec.domain();
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::spec("domain must be a finite increasing interval"));
        }
        if let Some(w) = &spec.translation {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: w.len(),
                });
            }
        }
        let compiled = match &spec.family {
            Family::GeneralizedHelixEven {
                amplitudes,
                frequencies,
            } => {
                if !n.is_multiple_of(2) {
                    return Err(Error::spec("GeneralizedHelixEven needs an even dimension"));
                }
                check_helix_params(amplitudes, frequencies, n / 2, true)?;
                Compiled::Helix(Helix {
                    amplitudes: amplitudes.clone(),
                    frequencies: frequencies.clone(),
                    phases: vec![0.0; n / 2],
                    tail: HelixTail::None,
                })
            }
            Family::GeneralizedHelixOdd {
                amplitudes,
                frequencies,
                drift,
            } => {
                if n % 2 != 1 {
                    return Err(Error::spec("GeneralizedHelixOdd needs an odd dimension"));
                }
                check_helix_params(amplitudes, frequencies, n / 2, true)?;
                Compiled::Helix(Helix {
                    amplitudes: amplitudes.clone(),
                    frequencies: frequencies.clone(),
                    phases: vec![0.0; n / 2],
                    tail: HelixTail::Drift(*drift),
                })
            }
            Family::SphericalHelix {
                amplitudes,
                frequencies,
                height,
            } => {
                let m = n / 2;
                check_helix_params(amplitudes, frequencies, m, false)?;
                if amplitudes.contains(&0.0) {
                    return Err(Error::spec("spherical helix amplitudes must be non-zero"));
                }
                let odd = n % 2 == 1;
                if !odd && *height != 0.0 {
                    return Err(Error::spec("height is only meaningful in odd dimensions"));
                }
                let radius2: f64 = amplitudes.iter().map(|a| a * a).sum::<f64>() + height * height;
                let speed2: f64 = amplitudes
                    .iter()
                    .zip(frequencies)
                    .map(|(a, b)| a * a * b * b)
                    .sum();
                if (radius2 - 1.0).abs() > SPHERICAL_HELIX_TOL
                    || (speed2 - 1.0).abs() > SPHERICAL_HELIX_TOL
                {
                    return Err(Error::spec(format!(
                        "spherical helix constraints violated: Σa² = {radius2}, Σa²b² = {speed2}"
                    )));
                }
                // negative amplitudes become a phase shift of π
                let phases = amplitudes
                    .iter()
                    .map(|a| if *a < 0.0 { PI } else { 0.0 })
                    .collect();
                Compiled::Helix(Helix {
                    amplitudes: amplitudes.iter().map(|a| a.abs()).collect(),
                    frequencies: frequencies.clone(),
                    phases,
                    tail: if odd {
                        HelixTail::Height(*height)
                    } else {
                        HelixTail::None
                    },
                })
            }
            Family::SecScaled {
                scale,
                shift,
                inner,
            } => {
                if *scale == 0.0 {
                    return Err(Error::spec("sec scale must be non-zero"));
                }
                if inner.dimension != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: inner.dimension,
                    });
                }
                // any pole of sec(t + shift) inside the padded domain?
                let lo = t0 + shift - sec_band;
                let hi = t1 + shift + sec_band;
                let k = ((lo - FRAC_PI_2) / PI).ceil();
                if FRAC_PI_2 + k * PI <= hi {
                    return Err(Error::spec(
                        "SecScaled domain crosses a pole of sec(t + shift)",
                    ));
                }
                let inner = Curve::with_sec_band((**inner).clone(), sec_band)?;
                let (i0, i1) = inner.spec.domain();
                if t0 < i0 || t1 > i1 {
                    return Err(Error::spec(
                        "SecScaled domain exceeds the inner curve's domain",
                    ));
                }
                Compiled::SecScaled {
                    scale: *scale,
                    shift: *shift,
                    inner: Box::new(inner),
                }
            }
            Family::Explicit { components } => {
                if components.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: components.len(),
                    });
                }
                Compiled::Explicit(
                    components
                        .iter()
                        .map(|c| Expr::parse(c))
                        .collect::<Result<_>>()?,
                )
            }
            Family::Sampled { t, points } => {
                if points.len() != t.len() {
                    return Err(Error::spec("Sampled needs one point per parameter value"));
                }
                if points.iter().any(|p| p.len() != n) {
                    return Err(Error::spec("Sampled points must match the dimension"));
                }
                if t0 < t[0] || t1 > *t.last().unwrap_or(&f64::NAN) {
                    return Err(Error::spec("Sampled domain exceeds the sample range"));
                }
                let splines = (0..n)
                    .map(|c| {
                        let vals: Vec<f64> = points.iter().map(|p| p[c]).collect();
                        QuinticSpline::new(t, &vals)
                    })
                    .collect::<Result<_>>()?;
                Compiled::Sampled(splines)
            }
            Family::CurvatureDriven { profile, step } => {
                if profile.dimension != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: profile.dimension,
                    });
                }
                Compiled::CurvatureDriven(Arc::new(frenetode::integrate(profile, t0, t1, *step)?))
            }
        };
        Ok(Self {
            spec,
            compiled,
            sec_band,
        })
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn domain(&self) -> (f64, f64) {
        self.spec.domain()
    }

    /// Largest jet order the family can deliver.
    pub fn max_order(&self) -> usize {
        match &self.compiled {
            Compiled::Sampled(_) => spline::MAX_SAMPLED_ORDER,
            Compiled::SecScaled { inner, .. } => inner.max_order().min(max_order(self.dimension())),
            _ => max_order(self.dimension()),
        }
    }

    pub fn integrated(&self) -> Option<&IntegratedCurve> {
        match &self.compiled {
            Compiled::CurvatureDriven(c) => Some(c),
            _ => None,
        }
    }

    /// Jets of the position vector at `t` up to `order`.
    pub fn evaluate(&self, t: f64, order: usize) -> Result<JetVector> {
        let (t0, t1) = self.domain();
        if !(t >= t0 && t <= t1) {
            return Err(Error::domain(format!(
                "t = {t} outside domain [{t0}, {t1}]"
            )));
        }
        if order > self.max_order() {
            return Err(Error::domain(format!(
                "order {order} exceeds the maximum {} for this curve",
                self.max_order()
            )));
        }
        let raw = self.evaluate_raw(t, order)?;
        Ok(match &self.spec.translation {
            Some(w) => raw.translate(w),
            None => raw,
        })
    }

    fn evaluate_raw(&self, t: f64, order: usize) -> Result<JetVector> {
        match &self.compiled {
            Compiled::Helix(h) => Ok(helix_jets(h, t, order)),
            Compiled::SecScaled {
                scale,
                shift,
                inner,
            } => {
                if pole_distance(t + shift) < self.sec_band {
                    return Err(Error::domain(format!("t = {t} within the sec pole band")));
                }
                let rho = Jet::variable(t, order)
                    .add_scalar(*shift)
                    .sec()?
                    .scale(*scale);
                Ok(inner.evaluate(t, order)?.scale(&rho))
            }
            Compiled::Explicit(exprs) => {
                let comps = exprs
                    .iter()
                    .map(|e| e.eval(t, order))
                    .collect::<Result<Vec<_>>>()?;
                JetVector::new(comps)
            }
            Compiled::Sampled(splines) => {
                let comps = splines
                    .iter()
                    .map(|s| Jet::new(t, s.derivatives(t, order)?))
                    .collect::<Result<Vec<_>>>()?;
                JetVector::new(comps)
            }
            Compiled::CurvatureDriven(c) => c.jet_at(t, order),
        }
    }
}

fn helix_jets(h: &Helix, t: f64, order: usize) -> JetVector {
    let mut comps = Vec::with_capacity(2 * h.amplitudes.len() + 1);
    for ((a, b), phi) in h.amplitudes.iter().zip(&h.frequencies).zip(&h.phases) {
        let theta = b * t + phi;
        let mut sin = Vec::with_capacity(order + 1);
        let mut cos = Vec::with_capacity(order + 1);
        let mut bk = 1.0;
        for k in 0..=order {
            // exact quarter-turn rotation avoids accumulating rounding in the shift
            let (s, c) = match k % 4 {
                0 => (theta.sin(), theta.cos()),
                1 => (theta.cos(), -theta.sin()),
                2 => (-theta.sin(), -theta.cos()),
                _ => (-theta.cos(), theta.sin()),
            };
            sin.push(a * bk * s);
            cos.push(a * bk * c);
            bk *= b;
        }
        comps.push(Jet::from_parts(t, sin));
        comps.push(Jet::from_parts(t, cos));
    }
    match h.tail {
        HelixTail::None => {}
        HelixTail::Drift(d) => comps.push(Jet::variable(t, order).scale(d)),
        HelixTail::Height(c) => comps.push(Jet::constant(t, c, order)),
    }
    JetVector::from_parts(comps)
}

/// Uniform parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        let g = Self {
            t_min,
            t_max,
            count,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2
            || !(self.t_max > self.t_min)
            || !self.t_min.is_finite()
            || !self.t_max.is_finite()
        {
            return Err(Error::spec("grid needs count ≥ 2 and t_min < t_max"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.t_max - self.t_min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.t_max
                } else {
                    self.t_min + i as f64 * step
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphericalReport {
    pub max_radius_deviation: f64,
    pub max_speed_deviation: f64,
    pub passes: bool,
}

/// Checks `‖y‖ = 1` and `‖y′‖ = 1` over a grid.
pub fn validate_spherical_arclength(curve: &Curve, grid: &Grid) -> Result<SphericalReport> {
    let mut radius: f64 = 0.0;
    let mut speed: f64 = 0.0;
    for t in grid.points() {
        let j = curve.evaluate(t, 1)?;
        let norm = |v: Vec<f64>| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        radius = radius.max((norm(j.value()) - 1.0).abs());
        speed = speed.max((norm(j.derivative_at(1)) - 1.0).abs());
    }
    Ok(SphericalReport {
        max_radius_deviation: radius,
        max_speed_deviation: speed,
        passes: radius < SPHERICAL_ARCLENGTH_TOL && speed < SPHERICAL_ARCLENGTH_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn helix4() -> CurveSpec {
        let r = 0.5f64.sqrt();
        CurveSpec::new(
            4,
            Family::SphericalHelix {
                amplitudes: vec![r, r],
                frequencies: vec![0.5f64.sqrt(), 1.5f64.sqrt()],
                height: 0.0,
            },
            (-1.5, 1.5),
        )
    }

    #[test]
    fn spherical_helix_point() {
        let c = Curve::new(helix4()).unwrap();
        let p = c.evaluate(0.0, 0).unwrap().value();
        let r = 0.5f64.sqrt();
        assert_eq!(p, vec![0.0, r, 0.0, r]);
    }

    #[test]
    fn sec_scaled_point_and_speed() {
        let sec = Curve::new(CurveSpec::sec_scaled(helix4(), 1.0, 0.0, (-1.2, 1.2))).unwrap();
        let p = sec.evaluate(0.0, 0).unwrap().value();
        let r = 0.5f64.sqrt();
        assert_eq!(p, vec![0.0, r, 0.0, r]);
        let d = sec
            .evaluate(std::f64::consts::FRAC_PI_4, 1)
            .unwrap()
            .derivative_at(1);
        let v = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((v - 2.0).abs() < 1e-13, "{v}");
    }

    #[test]
    fn sec_domain_must_avoid_poles() {
        let err = Curve::new(CurveSpec::sec_scaled(helix4(), 1.0, 0.0, (-1.2, 1.58))).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
        let ok = Curve::new(CurveSpec::sec_scaled(helix4(), 1.0, 0.3, (-1.5, 1.2))).unwrap();
        assert!(ok.evaluate(1.3, 0).is_err());
    }

    #[test]
    fn spherical_validation() {
        let c = Curve::new(helix4()).unwrap();
        let grid = Grid::new(-1.0, 1.0, 101).unwrap();
        let rep = validate_spherical_arclength(&c, &grid).unwrap();
        assert!(rep.passes && rep.max_radius_deviation < 1e-12 && rep.max_speed_deviation < 1e-12);

        let fast = Curve::new(CurveSpec::new(
            4,
            Family::GeneralizedHelixEven {
                amplitudes: vec![1.0, 1.0],
                frequencies: vec![1.0, 0.0],
            },
            (-1.0, 1.0),
        ))
        .unwrap();
        // a²b² sum is 1 here, radius √2: fails on the sphere test
        assert!(!validate_spherical_arclength(&fast, &grid).unwrap().passes);

        let doubled = Curve::new(CurveSpec::new(
            4,
            Family::GeneralizedHelixEven {
                amplitudes: vec![0.5f64.sqrt(), 0.5f64.sqrt()],
                frequencies: vec![1.0, 3.0f64.sqrt()],
            },
            (-1.0, 1.0),
        ))
        .unwrap();
        // Σa²b² = 2: speed √2
        let rep = validate_spherical_arclength(&doubled, &grid).unwrap();
        assert!(!rep.passes && (rep.max_speed_deviation - (2f64.sqrt() - 1.0)).abs() < 1e-12);

        let line = Curve::new(CurveSpec::explicit(&["t", "0", "0", "0"], (-1.0, 1.0))).unwrap();
        assert!(!validate_spherical_arclength(&line, &grid).unwrap().passes);
    }

    #[test]
    fn spherical_constraints_enforced() {
        let bad = CurveSpec::new(
            4,
            Family::SphericalHelix {
                amplitudes: vec![0.7, 0.7],
                frequencies: vec![1.0, 2.0],
                height: 0.0,
            },
            (0.0, 1.0),
        );
        assert!(Curve::new(bad).is_err());
    }

    #[test]
    fn negative_amplitudes_become_phases() {
        let r = 0.5f64.sqrt();
        let f = |a2: f64| {
            Curve::new(CurveSpec::new(
                4,
                Family::SphericalHelix {
                    amplitudes: vec![r, a2],
                    frequencies: vec![0.5f64.sqrt(), 1.5f64.sqrt()],
                    height: 0.0,
                },
                (-1.0, 1.0),
            ))
            .unwrap()
            .evaluate(0.4, 3)
            .unwrap()
        };
        let (pos, neg) = (f(r), f(-r));
        for k in 0..=3 {
            let (a, b) = (pos.derivative_at(k), neg.derivative_at(k));
            assert!((a[2] + b[2]).abs() < 1e-15 && (a[3] + b[3]).abs() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip_matches_schema() {
        let spec = CurveSpec::sec_scaled(helix4(), 2.0, 0.1, (-1.0, 1.0))
            .translated(vec![1.0, 2.0, 3.0, 4.0]);
        let text = serde_json::to_string(&spec).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["family"], "SecScaled");
        assert_eq!(v["params"]["inner"]["family"], "SphericalHelix");
        assert_eq!(v["domain"][1], 1.0);
        let back: CurveSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let c = Curve::new(CurveSpec::sec_scaled(helix4(), 1.0, 0.0, (-1.2, 1.2))).unwrap();
        assert_eq!(c.evaluate(0.7, 8).unwrap(), c.evaluate(0.7, 8).unwrap());
    }

    #[test]
    fn sampled_curves_cap_the_order() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
        let points = t.iter().map(|&x| vec![x.cos(), x.sin(), 0.5 * x]).collect();
        let c = Curve::new(CurveSpec::new(3, Family::Sampled { t, points }, (0.0, 1.9))).unwrap();
        assert!(c.evaluate(1.0, 5).is_err());
        let j = c.evaluate(1.0, 4).unwrap();
        assert!((j.derivative_at(2)[0] + 1f64.cos()).abs() < 1e-7);
    }

    #[test]
    fn translation_moves_only_the_value() {
        let base = CurveSpec::explicit(&["t", "t^2"], (-1.0, 1.0));
        let a = Curve::new(base.clone()).unwrap().evaluate(0.5, 2).unwrap();
        let b = Curve::new(base.translated(vec![1.0, -1.0]))
            .unwrap()
            .evaluate(0.5, 2)
            .unwrap();
        assert_eq!(b.value(), vec![1.5, -0.75]);
        assert_eq!(a.derivative_at(1), b.derivative_at(1));
    }
}
