//! Generalized Frenet frames of curves in `Eⁿ`, with every frame entry
//! carried as a jet so curvature derivatives are available downstream.
//!
//! Frame rows are `E₁ = T, E₂ = N, E₃ … E_n = B₁ … B_{n−2}`. The first `n − 1`
//! rows come from Gram-Schmidt on `α′ … α⁽ⁿ⁻¹⁾`; `E_n` completes the basis with
//! `det = +1`, so the signed last curvature may pass through zero.

use nalgebra::DMatrix;

use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::jets::{Jet, JetVector};
use crate::numerics::integrate_adaptive;

/// Relative residual below which `α⁽ⁱ⁾` counts as dependent on lower derivatives.
pub const EPS_DEP: f64 = 1e-9;

/// Absolute error target of [`arclength`].
pub const ARCLENGTH_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct FrenetData {
    /// Curve parameter at the center.
    pub t: f64,
    /// Arclength at the center, relative to whatever anchor the caller used.
    pub s: f64,
    /// `‖α′‖` as a jet in `t`.
    pub speed: Jet,
    /// Rows `E₁ … E_n`, jets in `t`.
    pub frame: Vec<JetVector>,
    /// `κ₁ … κ_{n−1}`, jets in arclength centered at `s`.
    pub curvatures: Vec<Jet>,
}

fn unit(w: &JetVector) -> Result<JetVector> {
    let norm = w.dot(w).sqrt_with(0.0)?;
    Ok(w.scale(&norm.recip_with(f64::MIN_POSITIVE)?))
}

fn project_out(mut w: JetVector, basis: &[JetVector]) -> JetVector {
    // modified Gram-Schmidt, then one reorthogonalization pass
    for _ in 0..2 {
        for e in basis {
            w = w.sub(&e.scale(&w.dot(e)));
        }
    }
    w
}

fn value_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Re-expresses a jet in `t` as a jet in arclength using `d/ds = v⁻¹ d/dt`.
pub fn to_arclength(g: &Jet, speed: &Jet, s: f64) -> Result<Jet> {
    let inv_v = speed.recip_with(f64::MIN_POSITIVE)?;
    let mut current = g.clone();
    let mut derivs = vec![g.value()];
    for _ in 0..g.order() {
        current = &current.derivative()? * &inv_v;
        derivs.push(current.value());
    }
    Jet::new(s, derivs)
}

/// Builds the Frenet frame and curvatures from the jet of `α` at one point.
/// The jet order must be at least `n + 1`; curvature jets come out with order
/// `m − n`.
pub fn frenet_frame(alpha: &JetVector) -> Result<FrenetData> {
    let n = alpha.dimension();
    if n < 2 {
        return Err(Error::spec("frames need dimension ≥ 2"));
    }
    let m = alpha.order();
    if m < n + 1 {
        return Err(Error::OrderTooLow {
            need: n + 1,
            have: m,
        });
    }
    let frame_order = m + 1 - n;
    let mut derivs = Vec::with_capacity(n - 1);
    let mut d = alpha.derivative()?;
    for _ in 1..n {
        derivs.push(d.truncate(frame_order));
        d = d.derivative()?;
    }

    let mut frame: Vec<JetVector> = Vec::with_capacity(n);
    for (i, d) in derivs.iter().enumerate() {
        let scale = value_norm(&d.value());
        let w = project_out(d.clone(), &frame);
        let r = value_norm(&w.value());
        if !(r > EPS_DEP * scale) {
            return Err(Error::ResidualBelowTolerance(i));
        }
        frame.push(unit(&w)?);
    }

    // complete with the coordinate axis least aligned with the span so far
    let values: Vec<Vec<f64>> = frame.iter().map(JetVector::value).collect();
    let axis = (0..n)
        .map(|k| {
            let proj: f64 = values.iter().map(|e| e[k] * e[k]).sum();
            (k, 1.0 - proj)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let center = alpha.center();
    let e_axis = JetVector::from_parts(
        (0..n)
            .map(|k| Jet::constant(center, if k == axis { 1.0 } else { 0.0 }, frame_order))
            .collect(),
    );
    let mut last = unit(&project_out(e_axis, &frame))?;
    let mut rows = values;
    rows.push(last.value());
    if determinant(&rows) < 0.0 {
        last = last.scale_f64(-1.0);
    }
    frame.push(last);

    let speed = alpha.derivative()?.norm()?;
    let curvatures = (0..n - 1)
        .map(|i| {
            let de = frame[i].derivative()?;
            let kt = de.dot(&frame[i + 1]).checked_div(&speed)?;
            to_arclength(&kt, &speed, 0.0)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FrenetData {
        t: center,
        s: 0.0,
        speed,
        frame,
        curvatures,
    })
}

fn determinant(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j]).determinant()
}

impl FrenetData {
    pub fn dimension(&self) -> usize {
        self.frame.len()
    }

    /// Same data with the arclength coordinate set to `s`.
    pub fn anchored(mut self, s: f64) -> Self {
        self.s = s;
        for k in &mut self.curvatures {
            *k = k.recentered(s);
        }
        self
    }

    pub fn speed_value(&self) -> f64 {
        self.speed.value()
    }

    /// Value part of the frame, rows `E₁ … E_n`.
    pub fn frame_values(&self) -> Vec<Vec<f64>> {
        self.frame.iter().map(JetVector::value).collect()
    }

    pub fn tangent(&self) -> Vec<f64> {
        self.frame[0].value()
    }

    pub fn normal(&self) -> Vec<f64> {
        self.frame[1].value()
    }

    pub fn curvature_values(&self) -> Vec<f64> {
        self.curvatures.iter().map(Jet::value).collect()
    }

    pub fn orthonormality_defect(&self) -> f64 {
        crate::frenetode::orthonormality_defect(&self.frame_values())
    }

    pub fn determinant(&self) -> f64 {
        determinant(&self.frame_values())
    }

    /// Largest deviation of `E_i′(t)` from `v·(−κ_{i−1}E_{i−1} + κ_iE_{i+1})`,
    /// relative to `max(1, v·max|κ|)`.
    pub fn reconstruction_residual(&self) -> Result<f64> {
        let n = self.dimension();
        let v = self.speed_value();
        let kappa = self.curvature_values();
        let frame = self.frame_values();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let de = self.frame[i].derivative()?.value();
            for c in 0..n {
                let mut expect = 0.0;
                if i > 0 {
                    expect -= kappa[i - 1] * frame[i - 1][c];
                }
                if i + 1 < n {
                    expect += kappa[i] * frame[i + 1][c];
                }
                worst = worst.max((de[c] - v * expect).abs());
            }
        }
        let scale = kappa.iter().fold(1.0f64, |acc, k| acc.max(v * k.abs()));
        Ok(worst / scale)
    }
}

/// Speed `‖α′(t)‖`.
pub fn speed(curve: &Curve, t: f64) -> Result<f64> {
    Ok(value_norm(&curve.evaluate(t, 1)?.derivative_at(1)))
}

/// Arclength from `t_a` to `t` (negative when `t < t_a`).
pub fn arclength(curve: &Curve, t_a: f64, t: f64) -> Result<f64> {
    let (lo, hi) = curve.domain();
    for x in [t_a, t] {
        if !(x >= lo && x <= hi) {
            return Err(Error::domain(format!(
                "t = {x} outside domain [{lo}, {hi}]"
            )));
        }
    }
    integrate_adaptive(|x| speed(curve, x), t_a, t, ARCLENGTH_TOL)
}

/// Arclength at every point of an increasing grid, zero at `anchor`.
pub fn arclength_grid(curve: &Curve, ts: &[f64], anchor: f64) -> Result<Vec<f64>> {
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::spec("grid must be strictly increasing"));
    }
    let Some(&first) = ts.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = arclength(curve, anchor, first)?;
    out.push(acc);
    for w in ts.windows(2) {
        acc += arclength(curve, w[0], w[1])?;
        out.push(acc);
    }
    Ok(out)
}
