//! C⁴ quintic interpolating splines for sampled curves.
//!
//! Unknowns are the first and second derivatives at every knot; each piece is
//! the quintic Hermite interpolant of (value, slope, second derivative) at its
//! two ends, and the interior knots impose continuity of the third and fourth
//! derivatives. The four end conditions clamp slope and second derivative to
//! those of the degree-5 polynomial through the six samples nearest each end.

use crate::error::{Error, Result};
use crate::numerics::{fornberg_weights, BandMatrix};

/// Highest derivative order a sampled curve exposes.
pub const MAX_SAMPLED_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct QuinticSpline {
    knots: Vec<f64>,
    // per interval: c0..c5 in powers of (x - knot_i)
    coeffs: Vec<[f64; 6]>,
}

/// `[c3, c4, c5]` of the Hermite quintic on `[0, h]`.
fn upper_coeffs(h: f64, y0: f64, m0: f64, a0: f64, y1: f64, m1: f64, a1: f64) -> [f64; 3] {
    let d0 = y1 - y0 - m0 * h - 0.5 * a0 * h * h;
    let d1 = (m1 - m0 - a0 * h) * h;
    let d2 = (a1 - a0) * h * h;
    let e = 0.5 * (d2 - 6.0 * d1 + 12.0 * d0);
    let d = d1 - 3.0 * d0 - 2.0 * e;
    let c = d0 - d - e;
    [c / h.powi(3), d / h.powi(4), e / h.powi(5)]
}

impl QuinticSpline {
    pub fn new(knots: &[f64], values: &[f64]) -> Result<Self> {
        let n = knots.len();
        if n < 6 {
            return Err(Error::spec("a quintic spline needs at least six samples"));
        }
        if values.len() != n {
            return Err(Error::spec("sample count mismatch"));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::spec("sample parameters must be strictly increasing"));
        }

        let end_derivs = |idx: &[usize], at: f64| -> (f64, f64) {
            let nodes: Vec<f64> = idx.iter().map(|&i| knots[i]).collect();
            let w = fornberg_weights(at, &nodes, 2);
            let d = |k: usize| {
                idx.iter()
                    .enumerate()
                    .map(|(j, &i)| w[k][j] * values[i])
                    .sum()
            };
            (d(1), d(2))
        };
        let head: Vec<usize> = (0..6).collect();
        let tail: Vec<usize> = (n - 6..n).collect();
        let (m_first, a_first) = end_derivs(&head, knots[0]);
        let (m_last, a_last) = end_derivs(&tail, knots[n - 1]);

        // Unknown layout: x[2i] = slope at knot i, x[2i+1] = second derivative.
        let dim = 2 * n;
        let mut mat = BandMatrix::zeros(dim, 4, 4);
        let mut rhs = vec![0.0; dim];
        mat.set(0, 0, 1.0);
        rhs[0] = m_first;
        mat.set(1, 1, 1.0);
        rhs[1] = a_first;

        // Third/fourth derivative of the left piece at its right end minus the
        // right piece at its left end, as a linear function of the six knot unknowns.
        for i in 1..n - 1 {
            let hl = knots[i] - knots[i - 1];
            let hr = knots[i + 1] - knots[i];
            let jump = |m0: f64, a0: f64, m1: f64, a1: f64, m2: f64, a2: f64, y: [f64; 3]| {
                let l = upper_coeffs(hl, y[0], m0, a0, y[1], m1, a1);
                let r = upper_coeffs(hr, y[1], m1, a1, y[2], m2, a2);
                let d3 = 6.0 * l[0] + 24.0 * l[1] * hl + 60.0 * l[2] * hl * hl - 6.0 * r[0];
                let d4 = 24.0 * l[1] + 120.0 * l[2] * hl - 24.0 * r[1];
                (d3, d4)
            };
            let y = [values[i - 1], values[i], values[i + 1]];
            let (b3, b4) = jump(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, y);
            let rows = [2 * i, 2 * i + 1];
            rhs[rows[0]] = -b3;
            rhs[rows[1]] = -b4;
            for u in 0..6 {
                let mut e = [0.0; 6];
                e[u] = 1.0;
                let (d3, d4) = jump(e[0], e[1], e[2], e[3], e[4], e[5], [0.0; 3]);
                let col = 2 * (i - 1) + u;
                mat.set(rows[0], col, d3);
                mat.set(rows[1], col, d4);
            }
        }
        mat.set(dim - 2, dim - 2, 1.0);
        rhs[dim - 2] = m_last;
        mat.set(dim - 1, dim - 1, 1.0);
        rhs[dim - 1] = a_last;

        let mut cols = vec![rhs];
        mat.solve(&mut cols)?;
        let x = &cols[0];

        let coeffs = (0..n - 1)
            .map(|i| {
                let h = knots[i + 1] - knots[i];
                let up = upper_coeffs(
                    h,
                    values[i],
                    x[2 * i],
                    x[2 * i + 1],
                    values[i + 1],
                    x[2 * i + 2],
                    x[2 * i + 3],
                );
                [values[i], x[2 * i], 0.5 * x[2 * i + 1], up[0], up[1], up[2]]
            })
            .collect();
        Ok(Self {
            knots: knots.to_vec(),
            coeffs,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// Value and derivatives `0..=order` at `x`; `order ≤ 4`.
    pub fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if order > MAX_SAMPLED_ORDER {
            return Err(Error::domain(format!(
                "sampled curves expose derivatives up to order {MAX_SAMPLED_ORDER}, {order} requested"
            )));
        }
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::domain(format!(
                "{x} outside sampled range [{lo}, {hi}]"
            )));
        }
        let i = match self.knots.partition_point(|k| *k <= x) {
            0 => 0,
            p => (p - 1).min(self.coeffs.len() - 1),
        };
        let c = &self.coeffs[i];
        let u = x - self.knots[i];
        let mut out = Vec::with_capacity(order + 1);
        for k in 0..=order {
            // k-th derivative of Σ c_j u^j
            let mut acc = 0.0;
            for j in (k..6).rev() {
                let falling: f64 = (j - k + 1..=j).map(|v| v as f64).product();
                acc = acc * u + c[j] * falling;
            }
            // Horner above builds Σ c_j falling(j,k) u^(j-k)
            out.push(acc);
        }
        Ok(out)
    }
}
