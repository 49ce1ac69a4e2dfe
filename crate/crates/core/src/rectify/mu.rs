//! Binormal coefficients `μ₁ … μ_{n−2}` of a rectifying curve as functions of
//! its curvatures, both by the `μ_{i,k}` induction and by the forward
//! recurrence used as its oracle.

use crate::error::{Error, Result};
use crate::jets::Jet;

/// `μ_{i,k}` for `1 ≤ i ≤ n−2`, `0 ≤ k ≤ i−1`, and the assembled
/// `μ_i = Σ_k μ_{i,k} ∂ᵏ(κ₁/κ₂)`, all jets in arclength.
#[derive(Debug, Clone)]
pub struct MuTable {
    pub dimension: usize,
    pub c: f64,
    entries: Vec<Vec<Jet>>,
    assembled: Vec<Jet>,
}

impl MuTable {
    /// `μ_{i,k}` with 1-based `i` and 0-based `k`.
    pub fn entry(&self, i: usize, k: usize) -> &Jet {
        &self.entries[i - 1][k]
    }

    pub fn row(&self, i: usize) -> &[Jet] {
        &self.entries[i - 1]
    }

    /// Assembled `μ_i`, `i ≥ 1`.
    pub fn mu(&self, i: usize) -> &Jet {
        &self.assembled[i - 1]
    }

    pub fn assembled(&self) -> &[Jet] {
        &self.assembled
    }

    pub fn values(&self) -> Vec<f64> {
        self.assembled.iter().map(Jet::value).collect()
    }
}

fn check_input(kappas: &[Jet]) -> Result<usize> {
    let n = kappas.len() + 1;
    if n < 3 {
        return Err(Error::spec("binormal coefficients need dimension ≥ 3"));
    }
    let center = kappas[0].center();
    for k in kappas {
        k.checked_sub(&kappas[0])
            .map_err(|_| Error::CenterMismatch(center, k.center()))?;
    }
    Ok(n)
}

/// `∂ᵏ(κ₁/κ₂)` for `k = 0 … count−1`.
fn ratio_derivatives(kappas: &[Jet], count: usize) -> Result<Vec<Jet>> {
    let ratio = kappas[0].checked_div(&kappas[1])?;
    (0..count).map(|k| ratio.nth_derivative(k)).collect()
}

/// The five-branch induction for `μ_{i,k}`, then assembly.
pub fn mu_recursion(kappas: &[Jet], c: f64) -> Result<MuTable> {
    let n = check_input(kappas)?;
    let rows = n - 2;
    let s = kappas[0].center();
    let order = kappas.iter().map(Jet::order).min().unwrap_or(0);
    let kappa = |i: usize| &kappas[i - 1];
    let lambda = Jet::variable(s, order).add_scalar(c);

    let mut entries: Vec<Vec<Jet>> = Vec::with_capacity(rows);
    entries.push(vec![lambda.clone()]);
    if rows >= 2 {
        let inv = kappa(3).recip()?;
        entries.push(vec![inv.clone(), &lambda * &inv]);
    }
    for i in 3..=rows {
        let prev = &entries[i - 2];
        let prev2 = &entries[i - 3];
        let next_kappa = kappa(i + 1);
        let mut row = Vec::with_capacity(i);
        for k in 0..i {
            let numer = if k == 0 {
                &(kappa(i) * &prev2[0]) + &prev[0].derivative()?
            } else if k + 3 <= i {
                &(&(kappa(i) * &prev2[k]) + &prev[k].derivative()?) + &prev[k - 1]
            } else if k + 2 == i {
                &prev[i - 3] + &prev[i - 2].derivative()?
            } else {
                prev[i - 2].clone()
            };
            row.push(numer.checked_div(next_kappa)?);
        }
        entries.push(row);
    }

    let ratio = ratio_derivatives(kappas, rows)?;
    let assembled = entries
        .iter()
        .map(|row| {
            let mut acc = &row[0] * &ratio[0];
            for (k, e) in row.iter().enumerate().skip(1) {
                acc = &acc + &(e * &ratio[k]);
            }
            acc
        })
        .collect();
    Ok(MuTable {
        dimension: n,
        c,
        entries,
        assembled,
    })
}

/// `μ₁ = (s+c)κ₁/κ₂`, `μ₂ = μ₁′/κ₃`, `μ_{i+1} = (μ_{i−1}κ_{i+1} + μ_i′)/κ_{i+2}`.
pub fn mu_forward_oracle(kappas: &[Jet], c: f64) -> Result<Vec<Jet>> {
    let n = check_input(kappas)?;
    let s = kappas[0].center();
    let order = kappas.iter().map(Jet::order).min().unwrap_or(0);
    let kappa = |i: usize| &kappas[i - 1];
    let lambda = Jet::variable(s, order).add_scalar(c);
    let mut mu = vec![(&lambda * kappa(1)).checked_div(kappa(2))?];
    if n >= 4 {
        mu.push(mu[0].derivative()?.checked_div(kappa(3))?);
    }
    for i in 2..n - 2 {
        let next = &(&mu[i - 2] * kappa(i + 1)) + &mu[i - 1].derivative()?;
        mu.push(next.checked_div(kappa(i + 2))?);
    }
    Ok(mu)
}

/// `μ_i` of a curve with constant curvatures `κ₁ … κ_{i+1}`:
/// `μ_{2m−1} = (κ₁κ₃…κ_{2m−1})/(κ₂κ₄…κ_{2m})·(s+c)` and
/// `μ_{2m} = Σ_{j=1}^{m} (∏_{i≤j} κ_{2i−1} ∏_{i=j+1}^{m} κ_{2i})² / (κ₁κ₂…κ_{2m+1})`.
pub fn constant_curvature_mu(kappas: &[f64], i: usize, s: f64, c: f64) -> f64 {
    let k = |j: usize| kappas[j - 1];
    if i == 0 {
        return 0.0;
    }
    if i % 2 == 1 {
        let m = i.div_ceil(2);
        let odd: f64 = (1..=m).map(|j| k(2 * j - 1)).product();
        let even: f64 = (1..=m).map(|j| k(2 * j)).product();
        odd / even * (s + c)
    } else {
        let m = i / 2;
        let numer: f64 = (1..=m)
            .map(|j| {
                let p: f64 = (1..=j).map(|l| k(2 * l - 1)).product::<f64>()
                    * (j + 1..=m).map(|l| k(2 * l)).product::<f64>();
                p * p
            })
            .sum();
        let denom: f64 = (1..=2 * m + 1).map(k).product();
        numer / denom
    }
}
