//! Position-vector components against the Frenet frame along a grid, and the
//! fits that decide whether they match a rectifying curve.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{Curve, Grid};
use crate::error::{Error, Result};
use crate::frenet::{arclength, frenet_frame};
use crate::jets::Jet;

use super::condition::condition_terms;
use super::mu::mu_recursion;
use super::{Tolerances, Verdict};

/// Singular-value ratio below which the fixed-point system counts as rank deficient.
const RANK_TOL: f64 = 1e-8;

/// Jet order used for analysis in `Eⁿ`: enough for curvature jets of order
/// `n − 2`, capped by what the curve can deliver.
pub fn analysis_order(n: usize, curve_max: usize) -> Result<usize> {
    let want = (2 * n).saturating_sub(2).max(n + 1);
    let order = want.min(curve_max);
    if order < n + 1 {
        return Err(Error::OrderTooLow {
            need: n + 1,
            have: order,
        });
    }
    Ok(order)
}

/// Point about which position components are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Center {
    /// The origin, as in the normalized definition of rectifying curves.
    #[default]
    Origin,
    /// The least-squares fixed point, for curves translated off the origin.
    FixedPoint,
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisOptions {
    /// Defaults to the fixed point for curvature-driven curves, whose
    /// placement in space is arbitrary, and to the origin otherwise.
    pub center: Option<Center>,
    /// Parameter where arclength is zero; defaults to the domain midpoint.
    /// Curvature-driven curves are parameterized by arclength already and ignore it.
    pub anchor: Option<f64>,
    /// Offset `c` of `λ(s) = s + c`; fitted from the data when absent.
    pub c: Option<f64>,
    pub tolerances: Tolerances,
}

/// Frame data at one grid point.
#[derive(Debug, Clone)]
pub struct FrameSampleData {
    pub t: f64,
    pub s: f64,
    pub point: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
    pub speed: f64,
    /// Curvature jets in arclength centered at `s`.
    pub curvatures: Vec<Jet>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Frames, curvatures and arclength at every grid point.
pub fn sample_frames(
    curve: &Curve,
    ts: &[f64],
    anchor: Option<f64>,
) -> Result<Vec<FrameSampleData>> {
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::spec("grid must be strictly increasing"));
    }
    let n = curve.dimension();
    let order = analysis_order(n, curve.max_order())?;
    let s_values = if curve.integrated().is_some() {
        ts.to_vec()
    } else {
        let (lo, hi) = curve.domain();
        let anchor = anchor.unwrap_or(0.5 * (lo + hi));
        let Some(&first) = ts.first() else {
            return Ok(Vec::new());
        };
        let head = arclength(curve, anchor, first)?;
        let pieces = ts
            .par_windows(2)
            .map(|w| arclength(curve, w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = head;
        let mut out = Vec::with_capacity(ts.len());
        out.push(acc);
        for p in pieces {
            acc += p;
            out.push(acc);
        }
        out
    };
    ts.par_iter()
        .zip(s_values.par_iter())
        .map(|(&t, &s)| {
            let jet = curve.evaluate(t, order)?;
            let f = frenet_frame(&jet)?.anchored(s);
            Ok(FrameSampleData {
                t,
                s,
                point: jet.value(),
                frame: f.frame_values(),
                speed: f.speed_value(),
                curvatures: f.curvatures,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    pub point: Vec<f64>,
    /// RMS of `⟨α(s_j) − p, N(s_j)⟩` at the optimum.
    pub residual: f64,
    /// Numerical rank of the stacked normals; below `n` the point is the
    /// minimum-norm solution.
    pub rank: usize,
}

/// Least-squares `p` for `⟨α(s_j) − p, N(s_j)⟩ = 0`.
///
/// Rank-deficient normals only make the answer ambiguous when the residual
/// vanishes (a whole family of fixed points fits); that case is reported as
/// `DegenerateGeometry`. A large residual refutes every candidate point and is
/// returned with the minimum-norm solution.
pub fn fixed_point(points: &[Vec<f64>], normals: &[Vec<f64>]) -> Result<FixedPoint> {
    let rows = points.len();
    let n = points.first().map(Vec::len).unwrap_or(0);
    if normals.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: normals.len(),
        });
    }
    if rows < n + 1 || n == 0 {
        return Err(Error::DegenerateGeometry(format!(
            "{rows} samples cannot pin a fixed point in dimension {n}"
        )));
    }
    let a = DMatrix::from_fn(rows, n, |j, k| normals[j][k]);
    let b = DVector::from_fn(rows, |j, _| dot(&points[j], &normals[j]));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = RANK_TOL * smax;
    let rank = svd.singular_values.iter().filter(|s| **s > cutoff).count();
    let p = svd
        .solve(&b, cutoff)
        .map_err(|e| Error::DegenerateGeometry(e.to_string()))?;
    let r = &b - &a * &p;
    let residual = (r.norm_squared() / rows as f64).sqrt();
    if rank < n {
        let centroid: Vec<f64> = (0..n)
            .map(|k| points.iter().map(|x| x[k]).sum::<f64>() / rows as f64)
            .collect();
        let spread = (points
            .iter()
            .map(|x| {
                let d = sub(x, &centroid);
                dot(&d, &d)
            })
            .sum::<f64>()
            / rows as f64)
            .sqrt();
        if !(residual > RANK_TOL.sqrt() * spread) {
            return Err(Error::DegenerateGeometry(format!(
                "normals span only {rank} of {n} dimensions and admit a family of fixed points"
            )));
        }
    }
    Ok(FixedPoint {
        point: p.iter().copied().collect(),
        residual,
        rank,
    })
}

/// Least-squares `y ≈ c₀ + c₁s + c₂s²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticFit {
    pub constant: f64,
    pub linear: f64,
    pub quadratic: f64,
    /// Largest absolute deviation of the data from the fit.
    pub max_deviation: f64,
}

fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<(Vec<f64>, f64)> {
    // centered and scaled for conditioning, then mapped back
    let shift = xs.iter().sum::<f64>() / xs.len() as f64;
    let scale = xs
        .iter()
        .map(|x| (x - shift).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(xs.len(), degree + 1, |j, k| {
        ((xs[j] - shift) / scale).powi(k as i32)
    });
    let b = DVector::from_column_slice(ys);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::DegenerateGeometry(e.to_string()))?;
    let max_dev = (&b - &a * &coef).amax();
    // expand Σ q_k ((x − shift)/scale)^k into powers of x
    let mut out = vec![0.0; degree + 1];
    for (k, q) in coef.iter().enumerate() {
        let q = q / scale.powi(k as i32);
        let mut binom = 1.0;
        for j in 0..=k {
            // C(k, j) x^j (−shift)^(k−j)
            out[j] += q * binom * (-shift).powi((k - j) as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    Ok((out, max_dev))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaReport {
    pub c: f64,
    /// Mean of `β = α − (s+c)T − Σμ_iB_i`; the fixed point when `β` is constant.
    pub mean: Vec<f64>,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RectifyingReport {
    pub dimension: usize,
    pub anchor: f64,
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    /// `κ₁ … κ_{n−1}` per sample.
    pub curvatures: Vec<Vec<f64>>,
    /// Components below are measured about this point.
    pub center: Center,
    pub fixed_point: Vec<f64>,
    pub fixed_point_residual: f64,
    /// Set when the normals admit a whole family of fixed points; the origin
    /// then stands in for the fixed point.
    pub fixed_point_degenerate: bool,
    pub rho2: Vec<f64>,
    pub rho_rms: f64,
    pub tangential: Vec<f64>,
    pub normal_inner: Vec<f64>,
    pub normal_len: Vec<f64>,
    pub mu_measured: Vec<Vec<f64>>,
    pub mu_predicted: Option<Vec<Vec<f64>>>,
    pub c: f64,
    pub tangential_slope: f64,
    pub tangential_fit_residual: f64,
    pub rho2_fit: QuadraticFit,
    pub rho_fit_residual: f64,
    pub normal_residual: f64,
    /// `max |⟨α − p, N⟩| / ρ_rms` about the fixed point `p`.
    pub fixed_point_normal_residual: f64,
    pub normal_length_mean: f64,
    pub normal_length_std: f64,
    pub binormal_residual: Option<f64>,
    pub mu_square_sum_spread: f64,
    /// Raw `κ_{n−1}μ_{n−3} + μ_{n−2}′` per sample.
    pub condition_values: Option<Vec<f64>>,
    /// Per-sample condition value over `max(1, |κ_{n−1}μ_{n−3}| + |μ_{n−2}′|)`.
    pub condition_scaled: Option<Vec<f64>>,
    pub condition_residual: Option<f64>,
    pub beta: Option<BetaReport>,
    pub tolerances: Tolerances,
    pub components_verdict: Verdict,
    pub condition_verdict: Option<Verdict>,
}

impl RectifyingReport {
    /// Overall verdict: the component test, downgraded to inconclusive when the
    /// curvature condition disagrees.
    pub fn verdict(&self) -> Verdict {
        match self.condition_verdict {
            Some(v) if v != self.components_verdict => Verdict::Inconclusive,
            _ => self.components_verdict,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn fit_offset(samples: &[FrameSampleData], origin: &[f64]) -> f64 {
    let d: Vec<f64> = samples
        .iter()
        .map(|x| dot(&sub(&x.point, origin), &x.frame[0]) - x.s)
        .collect();
    mean(&d)
}

fn locate_fixed_point(samples: &[FrameSampleData]) -> Result<(FixedPoint, bool)> {
    let points: Vec<Vec<f64>> = samples.iter().map(|x| x.point.clone()).collect();
    let normals: Vec<Vec<f64>> = samples.iter().map(|x| x.frame[1].clone()).collect();
    match fixed_point(&points, &normals) {
        Ok(fp) => Ok((fp, false)),
        Err(Error::DegenerateGeometry(_)) => {
            let n = points.first().map(Vec::len).unwrap_or(0);
            let r: Vec<f64> = points
                .iter()
                .zip(&normals)
                .map(|(p, nv)| dot(p, nv))
                .collect();
            let residual = (r.iter().map(|x| x * x).sum::<f64>() / r.len().max(1) as f64).sqrt();
            Ok((
                FixedPoint {
                    point: vec![0.0; n],
                    residual,
                    rank: 0,
                },
                true,
            ))
        }
        Err(e) => Err(e),
    }
}

/// Predicted `μ₁ … μ_{n−2}` at every sample, when the curvature jets are deep enough.
fn predicted_mu(samples: &[FrameSampleData], c: f64) -> Result<Option<Vec<Vec<f64>>>> {
    let n = samples.first().map(|x| x.point.len()).unwrap_or(0);
    let order = samples
        .iter()
        .flat_map(|x| x.curvatures.iter().map(Jet::order))
        .min()
        .unwrap_or(0);
    if n < 3 || order + 3 < n {
        return Ok(None);
    }
    let rows = samples
        .par_iter()
        .map(|x| Ok(mu_recursion(&x.curvatures, c)?.values()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(rows))
}

fn beta_from(samples: &[FrameSampleData], predicted: &[Vec<f64>], c: f64) -> BetaReport {
    let n = samples[0].point.len();
    let betas: Vec<Vec<f64>> = samples
        .iter()
        .zip(predicted)
        .map(|(x, mu)| {
            let mut b = x.point.clone();
            let lambda = x.s + c;
            for k in 0..n {
                b[k] -= lambda * x.frame[0][k];
                for (i, m) in mu.iter().enumerate() {
                    b[k] -= m * x.frame[i + 2][k];
                }
            }
            b
        })
        .collect();
    let mean: Vec<f64> = (0..n)
        .map(|k| betas.iter().map(|b| b[k]).sum::<f64>() / betas.len() as f64)
        .collect();
    let max_deviation = betas
        .iter()
        .map(|b| sub(b, &mean).iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    BetaReport {
        c,
        mean,
        max_deviation,
    }
}

/// Measures every characterization of rectifying curves along `grid`.
pub fn measure_components(
    curve: &Curve,
    grid: &Grid,
    options: &AnalysisOptions,
) -> Result<RectifyingReport> {
    grid.validate()?;
    options.tolerances.validate()?;
    let n = curve.dimension();
    if n < 3 {
        return Err(Error::spec("rectifying analysis needs dimension ≥ 3"));
    }
    if grid.count < n + 2 {
        return Err(Error::spec(format!(
            "grid needs at least {} points in dimension {n}",
            n + 2
        )));
    }
    let (lo, hi) = curve.domain();
    let anchor = if curve.integrated().is_some() {
        0.0
    } else {
        options.anchor.unwrap_or(0.5 * (lo + hi))
    };
    let samples = sample_frames(curve, &grid.points(), Some(anchor))?;
    let (fp, degenerate) = locate_fixed_point(&samples)?;
    let origin = vec![0.0; n];
    let center = options.center.unwrap_or(if curve.integrated().is_some() {
        Center::FixedPoint
    } else {
        Center::Origin
    });
    let p = match center {
        Center::Origin => &origin,
        Center::FixedPoint => &fp.point,
    };

    let xs: Vec<Vec<f64>> = samples.iter().map(|x| sub(&x.point, p)).collect();
    let s: Vec<f64> = samples.iter().map(|x| x.s).collect();
    let rho2: Vec<f64> = xs.iter().map(|x| dot(x, x)).collect();
    let rho_rms = mean(&rho2).sqrt();
    if !(rho_rms > 0.0) {
        return Err(Error::DegenerateGeometry(
            "curve sits on its fixed point".into(),
        ));
    }

    let tangential: Vec<f64> = xs
        .iter()
        .zip(&samples)
        .map(|(x, f)| dot(x, &f.frame[0]))
        .collect();
    let c = options.c.unwrap_or_else(|| fit_offset(&samples, p));
    let tangential_fit_residual = tangential
        .iter()
        .zip(&s)
        .map(|(l, s)| (l - s - c).abs())
        .fold(0.0, f64::max)
        / rho_rms;
    let (line, _) = polyfit(&s, &tangential, 1)?;

    let (q, dev) = polyfit(&s, &rho2, 2)?;
    let rho2_fit = QuadraticFit {
        constant: q[0],
        linear: q[1],
        quadratic: q[2],
        max_deviation: dev,
    };
    let rho_fit_residual = (q[2] - 1.0).abs().max(dev / (rho_rms * rho_rms));

    let normal_inner: Vec<f64> = xs
        .iter()
        .zip(&samples)
        .map(|(x, f)| dot(x, &f.frame[1]))
        .collect();
    let normal_residual = normal_inner.iter().map(|v| v.abs()).fold(0.0, f64::max) / rho_rms;
    let fixed_point_normal_residual = {
        let about: Vec<Vec<f64>> = samples.iter().map(|f| sub(&f.point, &fp.point)).collect();
        let rms = mean(&about.iter().map(|x| dot(x, x)).collect::<Vec<_>>()).sqrt();
        about
            .iter()
            .zip(&samples)
            .map(|(x, f)| dot(x, &f.frame[1]).abs())
            .fold(0.0, f64::max)
            / rms.max(f64::MIN_POSITIVE)
    };

    let normal_len: Vec<f64> = xs
        .iter()
        .zip(&tangential)
        .zip(&samples)
        .map(|((x, l), f)| {
            let r: Vec<f64> = x.iter().zip(&f.frame[0]).map(|(a, t)| a - l * t).collect();
            dot(&r, &r).sqrt()
        })
        .collect();
    let normal_length_mean = mean(&normal_len);
    let var = mean(
        &normal_len
            .iter()
            .map(|v| (v - normal_length_mean).powi(2))
            .collect::<Vec<_>>(),
    );
    let normal_length_std = var.sqrt() / normal_length_mean.max(f64::MIN_POSITIVE);

    let mu_measured: Vec<Vec<f64>> = xs
        .iter()
        .zip(&samples)
        .map(|(x, f)| (2..n).map(|i| dot(x, &f.frame[i])).collect())
        .collect();
    let sums: Vec<f64> = mu_measured.iter().map(|m| dot(m, m)).collect();
    let sum_mean = mean(&sums);
    let mu_square_sum_spread = (sums.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - sums.iter().copied().fold(f64::INFINITY, f64::min))
        / sum_mean.max(f64::MIN_POSITIVE);

    let mu_predicted = predicted_mu(&samples, c)?;
    let binormal_residual = mu_predicted.as_ref().map(|pred| {
        pred.iter()
            .zip(&mu_measured)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
            / rho_rms
    });
    let beta = mu_predicted
        .as_ref()
        .map(|pred| beta_from(&samples, pred, c));

    let order = samples
        .iter()
        .flat_map(|x| x.curvatures.iter().map(Jet::order))
        .min()
        .unwrap_or(0);
    let (condition_values, condition_scaled) = if order + 2 >= n {
        let terms = samples
            .par_iter()
            .map(|x| condition_terms(&x.curvatures, c))
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = terms.iter().map(|(a, b)| a + b).collect();
        let scaled = terms
            .iter()
            .map(|(a, b)| (a + b).abs() / (a.abs() + b.abs()).max(1.0))
            .collect();
        (Some(values), Some(scaled))
    } else {
        (None, None)
    };
    let condition_residual = condition_scaled
        .as_ref()
        .map(|v: &Vec<f64>| v.iter().copied().fold(0.0, f64::max));

    let tol = options.tolerances;
    Ok(RectifyingReport {
        dimension: n,
        anchor,
        t: samples.iter().map(|x| x.t).collect(),
        s,
        curvatures: samples
            .iter()
            .map(|x| x.curvatures.iter().map(Jet::value).collect())
            .collect(),
        center,
        fixed_point: fp.point.clone(),
        fixed_point_residual: fp.residual,
        fixed_point_degenerate: degenerate,
        rho2,
        rho_rms,
        tangential,
        normal_inner,
        normal_len,
        mu_measured,
        mu_predicted,
        c,
        tangential_slope: line[1],
        tangential_fit_residual,
        rho2_fit,
        rho_fit_residual,
        normal_residual,
        fixed_point_normal_residual,
        normal_length_mean,
        normal_length_std,
        binormal_residual,
        mu_square_sum_spread,
        condition_values,
        condition_scaled,
        condition_residual,
        beta,
        tolerances: tol,
        components_verdict: tol.classify(normal_residual),
        condition_verdict: condition_residual.map(|r| tol.classify(r)),
    })
}

/// Spread of `β = α − (s+c)T − Σμ_iB_i` along the grid. With `options.c`
/// unset, `c` is fitted about the least-squares fixed point.
pub fn beta_constancy(curve: &Curve, grid: &Grid, options: &AnalysisOptions) -> Result<BetaReport> {
    grid.validate()?;
    let samples = sample_frames(curve, &grid.points(), options.anchor)?;
    let c = match options.c {
        Some(c) => c,
        None => {
            let (fp, _) = locate_fixed_point(&samples)?;
            fit_offset(&samples, &fp.point)
        }
    };
    let predicted = predicted_mu(&samples, c)?.ok_or(Error::OrderTooLow {
        need: curve.dimension().saturating_sub(3),
        have: 0,
    })?;
    Ok(beta_from(&samples, &predicted, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyfit_recovers_coefficients() {
        let xs: Vec<f64> = (0..30).map(|i| 3.0 + 0.1 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x + 1.25 * x * x).collect();
        let (q, dev) = polyfit(&xs, &ys, 2).unwrap();
        assert!(
            (q[0] - 2.0).abs() < 1e-10 && (q[1] + 0.5).abs() < 1e-11 && (q[2] - 1.25).abs() < 1e-12
        );
        assert!(dev < 1e-12);
    }

    #[test]
    fn fixed_point_of_lines_through_a_point() {
        // normals of circles around w all pass through w
        let w = [1.0, -2.0, 0.5];
        let mut pts = Vec::new();
        let mut nrm = Vec::new();
        for j in 0..20 {
            let a = j as f64 * 0.3;
            let b = j as f64 * 0.17;
            let d = [a.cos() * b.cos(), a.sin() * b.cos(), b.sin()];
            pts.push(vec![
                w[0] + 2.0 * d[0],
                w[1] + 2.0 * d[1],
                w[2] + 2.0 * d[2],
            ]);
            // any direction orthogonal to d gives ⟨x − w, N⟩ = 0
            let t = [-a.sin(), a.cos(), 0.0];
            nrm.push(vec![t[0], t[1], t[2]]);
            let u = [-a.cos() * b.sin(), -a.sin() * b.sin(), b.cos()];
            pts.push(pts.last().unwrap().clone());
            nrm.push(u.to_vec());
        }
        let fp = fixed_point(&pts, &nrm).unwrap();
        for k in 0..3 {
            assert!((fp.point[k] - w[k]).abs() < 1e-12);
        }
        assert!(fp.residual < 1e-12);
    }

    #[test]
    fn parallel_normals_are_degenerate() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 0.0, 1.0]).collect();
        let nrm: Vec<Vec<f64>> = (0..10).map(|_| vec![0.0, 0.0, 1.0]).collect();
        assert!(matches!(
            fixed_point(&pts, &nrm),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(matches!(
            fixed_point(&pts[..3], &nrm[..3]),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn analysis_orders() {
        assert_eq!(analysis_order(3, 8).unwrap(), 4);
        assert_eq!(analysis_order(4, 10).unwrap(), 6);
        assert_eq!(analysis_order(6, 14).unwrap(), 10);
        assert!(analysis_order(4, 4).is_err());
    }
}
