//! Materializes curves from prescribed curvatures by integrating the Frenet
//! system in arclength form,
//!
//! ```text
//! α′ = E₁,   E₁′ = κ₁E₂,   Eᵢ′ = −κ_{i−1}E_{i−1} + κᵢE_{i+1},   E_n′ = −κ_{n−1}E_{n−1},
//! ```
//!
//! with classic RK4 and a modified Gram-Schmidt retraction of the frame after
//! every step. Integration starts at the origin with the identity frame.

mod profile;

pub use profile::{CurvatureFn, CurvatureProfile};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::JetVector;
use crate::numerics::fornberg_weights;

/// Frame drift tolerated within a single step before the retraction.
pub const MAX_STEP_DRIFT: f64 = 1e-6;

/// Position and frame (rows `E₁ … E_n`) at arclength `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSample {
    pub s: f64,
    pub point: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct IntegratedCurve {
    profile: CurvatureProfile,
    step: f64,
    samples: Vec<FrameSample>,
    max_drift: f64,
}

type State = (Vec<f64>, Vec<Vec<f64>>);

fn frenet_rhs(kappa: &[f64], frame: &[Vec<f64>]) -> State {
    let n = frame.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for c in 0..n {
            let mut v = 0.0;
            if i > 0 {
                v -= kappa[i - 1] * frame[i - 1][c];
            }
            if i + 1 < n {
                v += kappa[i] * frame[i + 1][c];
            }
            d[i][c] = v;
        }
    }
    (frame[0].clone(), d)
}

fn axpy(state: &State, h: f64, k: &State) -> State {
    let p = state.0.iter().zip(&k.0).map(|(a, b)| a + h * b).collect();
    let f = state
        .1
        .iter()
        .zip(&k.1)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| a + h * b).collect())
        .collect();
    (p, f)
}

/// `max |F Fᵀ − I|`.
pub fn orthonormality_defect(frame: &[Vec<f64>]) -> f64 {
    let n = frame.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = frame[i].iter().zip(&frame[j]).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// Modified Gram-Schmidt on the rows, in place.
fn retract(frame: &mut [Vec<f64>]) {
    for i in 0..frame.len() {
        for j in 0..i {
            let (done, rest) = frame.split_at_mut(i);
            let dot: f64 = rest[0].iter().zip(&done[j]).map(|(a, b)| a * b).sum();
            for (x, e) in rest[0].iter_mut().zip(&done[j]) {
                *x -= dot * e;
            }
        }
        let norm = frame[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in frame[i].iter_mut() {
            *x /= norm;
        }
    }
}

fn rk4_step(profile: &CurvatureProfile, s: f64, state: &State, h: f64) -> Result<(State, f64)> {
    let eval = |s: f64, st: &State| -> Result<State> {
        let kappa = profile.values(s)?;
        Ok(frenet_rhs(&kappa, &st.1))
    };
    let k1 = eval(s, state)?;
    let k2 = eval(s + 0.5 * h, &axpy(state, 0.5 * h, &k1))?;
    let k3 = eval(s + 0.5 * h, &axpy(state, 0.5 * h, &k2))?;
    let k4 = eval(s + h, &axpy(state, h, &k3))?;
    let mut next = state.clone();
    for (w, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
        next = axpy(&next, w * h / 6.0, k);
    }
    let drift = orthonormality_defect(&next.1);
    if drift > MAX_STEP_DRIFT {
        return Err(Error::StepTooLarge(drift));
    }
    retract(&mut next.1);
    Ok((next, drift))
}

/// Integrates `profile` over `[s_start, s_end]` with step `h`, storing every step.
pub fn integrate(
    profile: &CurvatureProfile,
    s_start: f64,
    s_end: f64,
    h: f64,
) -> Result<IntegratedCurve> {
    profile.validate()?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::spec("integration step must be positive"));
    }
    if !(s_end > s_start) {
        return Err(Error::spec("integration range must be increasing"));
    }
    let (lo, hi) = profile.bounds();
    if s_start < lo || s_end > hi {
        return Err(Error::domain(format!(
            "range [{s_start}, {s_end}] leaves the profile interval [{lo}, {hi}]"
        )));
    }
    let n = profile.dimension;
    let identity: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut state: State = (vec![0.0; n], identity);
    let steps = ((s_end - s_start) / h - 1e-9).ceil().max(1.0) as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(FrameSample {
        s: s_start,
        point: state.0.clone(),
        frame: state.1.clone(),
    });
    let mut max_drift: f64 = 0.0;
    for k in 0..steps {
        let s = s_start + k as f64 * h;
        let s_next = if k + 1 == steps {
            s_end
        } else {
            s_start + (k + 1) as f64 * h
        };
        let (next, drift) = rk4_step(profile, s, &state, s_next - s)?;
        max_drift = max_drift.max(drift);
        state = next;
        samples.push(FrameSample {
            s: s_next,
            point: state.0.clone(),
            frame: state.1.clone(),
        });
    }
    Ok(IntegratedCurve {
        profile: profile.clone(),
        step: h,
        samples,
        max_drift,
    })
}

impl IntegratedCurve {
    pub fn profile(&self) -> &CurvatureProfile {
        &self.profile
    }

    pub fn dimension(&self) -> usize {
        self.profile.dimension
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[FrameSample] {
        &self.samples
    }

    pub fn range(&self) -> (f64, f64) {
        (self.samples[0].s, self.samples.last().unwrap().s)
    }

    /// Largest per-step frame drift seen before retraction.
    pub fn max_step_drift(&self) -> f64 {
        self.max_drift
    }

    /// Position and frame at any `s` in range: nearest stored sample below
    /// plus one partial RK4 step.
    pub fn state_at(&self, s: f64) -> Result<FrameSample> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&s) {
            return Err(Error::domain(format!(
                "s = {s} outside integrated range [{lo}, {hi}]"
            )));
        }
        let idx = self.samples.partition_point(|x| x.s <= s).saturating_sub(1);
        let base = &self.samples[idx];
        let h = s - base.s;
        if h == 0.0 {
            return Ok(base.clone());
        }
        let ((point, frame), _) = rk4_step(
            &self.profile,
            base.s,
            &(base.point.clone(), base.frame.clone()),
            h,
        )?;
        Ok(FrameSample { s, point, frame })
    }

    /// Exact jets of `α` at `s` from the integrated frame and the Frenet
    /// recursion `E⁽ʲ⁺¹⁾ = Σᵢ C(j,i) K⁽ⁱ⁾ E⁽ʲ⁻ⁱ⁾`.
    pub fn jet_at(&self, s: f64, order: usize) -> Result<JetVector> {
        let st = self.state_at(s)?;
        frenet_jets(&self.profile, &st, order)
    }

    /// Jets of `α` at sample `index` estimated purely from stored positions by
    /// finite differences over `2·half_width + 1` samples spaced `stride` apart.
    pub fn sampled_jet(
        &self,
        index: usize,
        order: usize,
        half_width: usize,
        stride: usize,
    ) -> Result<JetVector> {
        let reach = half_width * stride;
        if index < reach || index + reach >= self.samples.len() {
            return Err(Error::domain(
                "finite-difference stencil leaves the integrated range",
            ));
        }
        if order > 2 * half_width {
            return Err(Error::OrderTooLow {
                need: order,
                have: 2 * half_width,
            });
        }
        let idx: Vec<usize> = (0..=2 * half_width)
            .map(|j| index - reach + j * stride)
            .collect();
        let center = self.samples[index].s;
        let nodes: Vec<f64> = idx.iter().map(|&i| self.samples[i].s - center).collect();
        let w = fornberg_weights(0.0, &nodes, order);
        let n = self.dimension();
        let rows: Vec<Vec<f64>> = (0..=order)
            .map(|k| {
                (0..n)
                    .map(|c| {
                        idx.iter()
                            .enumerate()
                            .map(|(j, &i)| w[k][j] * self.samples[i].point[c])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        JetVector::from_derivative_rows(center, &rows)
    }
}

/// Jets of the curve through `state` whose curvatures follow `profile`.
pub fn frenet_jets(
    profile: &CurvatureProfile,
    state: &FrameSample,
    order: usize,
) -> Result<JetVector> {
    let n = profile.dimension;
    let kappa = profile.jets(state.s, order.saturating_sub(1))?;
    // derivs[j] = j-th derivative of the frame matrix
    let mut derivs: Vec<Vec<Vec<f64>>> = vec![state.frame.clone()];
    let mut binom: Vec<f64> = vec![1.0];
    for j in 0..order.saturating_sub(1) {
        let mut next = vec![vec![0.0; n]; n];
        for (i, b) in binom.iter().enumerate() {
            // K⁽ⁱ⁾ E⁽ʲ⁻ⁱ⁾
            let kd: Vec<f64> = kappa.iter().map(|k| k.derivs()[i]).collect();
            let (_, prod) = frenet_rhs(&kd, &derivs[j - i]);
            for r in 0..n {
                for c in 0..n {
                    next[r][c] += b * prod[r][c];
                }
            }
        }
        derivs.push(next);
        let mut nb = vec![1.0; binom.len() + 1];
        for i in 1..binom.len() {
            nb[i] = binom[i - 1] + binom[i];
        }
        binom = nb;
    }
    let mut rows = Vec::with_capacity(order + 1);
    rows.push(state.point.clone());
    for k in 1..=order {
        rows.push(derivs[k - 1][0].clone());
    }
    JetVector::from_derivative_rows(state.s, &rows)
}
