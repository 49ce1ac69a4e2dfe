//! Small numerical kernels shared by the curve, frame and ODE modules.

use crate::error::{Error, Result};

/// Finite-difference weights for derivatives `0..=max_order` at `x0` from
/// samples at `nodes` (Fornberg's recurrence). `w[k][j]` multiplies `f(nodes[j])`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K15: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WEIGHTS_G7: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid)?;
    let mut kron = GK_WEIGHTS_K15[7] * fc;
    let mut gauss = GK_WEIGHTS_G7[3] * fc;
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let s = f(mid - dx)? + f(mid + dx)?;
        kron += GK_WEIGHTS_K15[i] * s;
        if i % 2 == 1 {
            gauss += GK_WEIGHTS_G7[i / 2] * s;
        }
    }
    Ok((kron * half, ((kron - gauss) * half).abs()))
}

/// Adaptive Gauss–Kronrod (7/15) quadrature to absolute tolerance `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> Result<f64>>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pending = vec![(lo, hi, tol)];
    let mut total = 0.0;
    let mut evaluations = 0usize;
    while let Some((x0, x1, t)) = pending.pop() {
        let (val, err) = gk15(&f, x0, x1)?;
        evaluations += 1;
        let width = x1 - x0;
        if err <= t || width <= 1e-14 * (hi - lo) || evaluations > 20_000 {
            total += val;
        } else {
            let m = 0.5 * (x0 + x1);
            pending.push((x0, m, 0.5 * t));
            pending.push((m, x1, 0.5 * t));
        }
    }
    Ok(sign * total)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Square matrix in band storage: `kl` sub-diagonals, `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // row-major, each row holds columns i-kl ..= i+ku+kl (extra room for pivoting fill)
    rows: Vec<Vec<f64>>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            rows: vec![vec![0.0; 2 * kl + ku + 1]; n],
        }
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        if off < 0 || off as usize > 2 * self.kl + self.ku {
            None
        } else {
            Some(off as usize)
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.rows[i][s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.rows[i][s] += v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.rows[i][s])
    }

    /// Gaussian elimination with partial pivoting; consumes the matrix.
    /// Each column of `rhs` is solved in place.
    pub fn solve(mut self, rhs: &mut [Vec<f64>]) -> Result<()> {
        let n = self.n;
        let width = self.kl + self.ku + self.kl;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::DegenerateGeometry("singular banded system".into()));
            }
            let last_col = (k + width).min(n - 1);
            if piv != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let b = self.get(piv, j);
                    self.set_any(k, j, b);
                    self.set_any(piv, j, a);
                }
                for col in rhs.iter_mut() {
                    col.swap(k, piv);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last_row {
                let f = self.get(i, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                for j in k..=last_col {
                    let v = self.get(i, j) - f * self.get(k, j);
                    self.set_any(i, j, v);
                }
                for col in rhs.iter_mut() {
                    col[i] -= f * col[k];
                }
            }
        }
        for col in rhs.iter_mut() {
            for k in (0..n).rev() {
                let last_col = (k + width).min(n - 1);
                let mut acc = col[k];
                for j in k + 1..=last_col {
                    acc -= self.get(k, j) * col[j];
                }
                col[k] = acc / self.get(k, k);
            }
        }
        Ok(())
    }

    fn set_any(&mut self, i: usize, j: usize, v: f64) {
        if let Some(s) = self.slot(i, j) {
            self.rows[i][s] = v;
        } else {
            debug_assert!(v == 0.0, "fill outside band");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_central_stencils() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn fornberg_exact_on_polynomials() {
        let nodes: Vec<f64> = (0..7).map(|i| 0.3 * i as f64 - 0.4).collect();
        let w = fornberg_weights(0.1, &nodes, 4);
        // f = x^4: f'''' = 24, f''' at 0.1 = 2.4
        let f: Vec<f64> = nodes.iter().map(|x| x.powi(4)).collect();
        let d3: f64 = w[3].iter().zip(&f).map(|(a, b)| a * b).sum();
        let d4: f64 = w[4].iter().zip(&f).map(|(a, b)| a * b).sum();
        assert!((d3 - 2.4).abs() < 1e-9);
        assert!((d4 - 24.0).abs() < 1e-8);
    }

    #[test]
    fn adaptive_quadrature() {
        let v = integrate_adaptive(|x| Ok(1.0 / (x.cos() * x.cos())), 0.0, 1.2, 1e-12).unwrap();
        assert!((v - 1.2f64.tan()).abs() < 1e-12);
        let back = integrate_adaptive(|x| Ok(x.exp()), 1.0, 0.0, 1e-12).unwrap();
        assert!((back + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre_unit(10);
        let v: f64 = rule.iter().map(|(x, w)| w * x.powi(19)).sum();
        assert!((v - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn band_solver_matches_dense() {
        let n = 12;
        let mut m = BandMatrix::zeros(n, 2, 3);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 3).min(n - 1) {
                // deliberately small diagonal to force pivoting
                let v = if i == j {
                    0.01
                } else {
                    1.0 + ((i * 7 + j * 3) % 5) as f64
                };
                m.set(i, j, v);
                dense[i][j] = v;
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 3.5).collect();
        let b: Vec<f64> = dense
            .iter()
            .map(|r| r.iter().zip(&x_true).map(|(a, x)| a * x).sum())
            .collect();
        let mut rhs = vec![b];
        m.solve(&mut rhs).unwrap();
        for (x, y) in rhs[0].iter().zip(&x_true) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
