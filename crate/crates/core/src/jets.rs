//! Truncated Taylor jets.
//!
//! A [`Jet`] carries the value and the first `m` derivatives of a scalar
//! function at a point. Entries are true derivative values `f⁽ᵏ⁾(center)`,
//! not Taylor coefficients; the nonlinear functions convert to normalized
//! coefficients internally, run the usual recurrences and convert back.
//!
//! Binary operations truncate to the smaller order. The `checked_*` methods
//! report a center mismatch as an error, while the operator impls treat it
//! as a programming error and panic.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Magnitude below which a divisor (curvature, speed, cosine) is treated as zero.
pub const DEFAULT_EPS_DIV: f64 = 1e-12;

/// Largest jet order the pipeline requests for curves in dimension `dim`.
pub fn max_order(dim: usize) -> usize {
    2 * dim + 2
}

fn centers_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn factorials(order: usize) -> Vec<f64> {
    let mut f = Vec::with_capacity(order + 1);
    let mut acc = 1.0;
    f.push(acc);
    for k in 1..=order {
        acc *= k as f64;
        f.push(acc);
    }
    f
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    center: f64,
    derivs: Vec<f64>,
}

impl Jet {
    pub fn new(center: f64, derivs: Vec<f64>) -> Result<Self> {
        if derivs.is_empty() {
            return Err(Error::spec("a jet needs at least its value"));
        }
        if !center.is_finite() || derivs.iter().any(|d| !d.is_finite()) {
            return Err(Error::domain("jet entries must be finite"));
        }
        Ok(Self { center, derivs })
    }

    pub(crate) fn from_parts(center: f64, derivs: Vec<f64>) -> Self {
        debug_assert!(!derivs.is_empty());
        Self { center, derivs }
    }

    pub fn constant(center: f64, value: f64, order: usize) -> Self {
        let mut derivs = vec![0.0; order + 1];
        derivs[0] = value;
        Self { center, derivs }
    }

    /// The identity function `x ↦ x` expanded at `center`.
    pub fn variable(center: f64, order: usize) -> Self {
        let mut derivs = vec![0.0; order + 1];
        derivs[0] = center;
        if order >= 1 {
            derivs[1] = 1.0;
        }
        Self { center, derivs }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    pub fn value(&self) -> f64 {
        self.derivs[0]
    }

    /// `k`-th derivative at the center, if carried.
    pub fn deriv(&self, k: usize) -> Option<f64> {
        self.derivs.get(k).copied()
    }

    pub fn is_finite(&self) -> bool {
        self.derivs.iter().all(|d| d.is_finite())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let keep = (order + 1).min(self.derivs.len());
        Self::from_parts(self.center, self.derivs[..keep].to_vec())
    }

    /// Same derivative values, relabelled to a new expansion point.
    pub fn recentered(&self, center: f64) -> Self {
        Self::from_parts(center, self.derivs.clone())
    }

    /// Jet of `f′`; the order drops by one.
    pub fn derivative(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::OrderTooLow { need: 1, have: 0 });
        }
        Ok(Self::from_parts(self.center, self.derivs[1..].to_vec()))
    }

    /// Jet of the `k`-th derivative.
    pub fn nth_derivative(&self, k: usize) -> Result<Self> {
        if k > self.order() {
            return Err(Error::OrderTooLow {
                need: k,
                have: self.order(),
            });
        }
        Ok(Self::from_parts(self.center, self.derivs[k..].to_vec()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_parts(
            self.center,
            self.derivs.iter().map(|d| d * factor).collect(),
        )
    }

    pub fn add_scalar(&self, value: f64) -> Self {
        let mut out = self.clone();
        out.derivs[0] += value;
        out
    }

    fn check_center(&self, other: &Jet) -> Result<()> {
        if centers_match(self.center, other.center) {
            Ok(())
        } else {
            Err(Error::CenterMismatch(self.center, other.center))
        }
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Self> {
        self.check_center(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Self> {
        self.check_center(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Leibniz rule: `(fg)⁽ᵏ⁾ = Σⱼ C(k,j) f⁽ʲ⁾ g⁽ᵏ⁻ʲ⁾`.
    pub fn checked_mul(&self, other: &Jet) -> Result<Self> {
        self.check_center(other)?;
        let order = self.order().min(other.order());
        let mut out = vec![0.0; order + 1];
        let mut binom = vec![1.0; order + 1];
        for k in 0..=order {
            if k > 0 {
                // Pascal row k from row k-1, in place from the right.
                for j in (1..k).rev() {
                    binom[j] += binom[j - 1];
                }
            }
            let mut acc = 0.0;
            for j in 0..=k {
                acc += binom[j] * self.derivs[j] * other.derivs[k - j];
            }
            out[k] = acc;
        }
        Ok(Self::from_parts(self.center, out))
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Self> {
        self.checked_mul(&other.recip()?)
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Self {
        let order = self.order().min(other.order());
        let derivs = (0..=order)
            .map(|k| f(self.derivs[k], other.derivs[k]))
            .collect();
        Self::from_parts(self.center, derivs)
    }

    fn taylor(&self) -> Vec<f64> {
        let fact = factorials(self.order());
        self.derivs.iter().zip(&fact).map(|(d, f)| d / f).collect()
    }

    fn from_taylor(center: f64, coeffs: Vec<f64>) -> Self {
        let fact = factorials(coeffs.len() - 1);
        let derivs = coeffs.iter().zip(&fact).map(|(c, f)| c * f).collect();
        Self::from_parts(center, derivs)
    }

    pub fn recip(&self) -> Result<Self> {
        self.recip_with(DEFAULT_EPS_DIV)
    }

    pub fn recip_with(&self, eps_div: f64) -> Result<Self> {
        let a = self.taylor();
        if a[0].abs() <= eps_div {
            return Err(Error::DivisionNearZero(a[0]));
        }
        let mut b = vec![0.0; a.len()];
        b[0] = 1.0 / a[0];
        for k in 1..a.len() {
            let s: f64 = (1..=k).map(|j| a[j] * b[k - j]).sum();
            b[k] = -s / a[0];
        }
        Ok(Self::from_taylor(self.center, b))
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.sqrt_with(DEFAULT_EPS_DIV)
    }

    pub fn sqrt_with(&self, eps_div: f64) -> Result<Self> {
        let a = self.taylor();
        if a[0] <= eps_div {
            return Err(Error::domain(format!("sqrt of {:e}", a[0])));
        }
        let mut b = vec![0.0; a.len()];
        b[0] = a[0].sqrt();
        for k in 1..a.len() {
            let s: f64 = (1..k).map(|j| b[j] * b[k - j]).sum();
            b[k] = (a[k] - s) / (2.0 * b[0]);
        }
        Ok(Self::from_taylor(self.center, b))
    }

    pub fn exp(&self) -> Self {
        let a = self.taylor();
        let mut b = vec![0.0; a.len()];
        b[0] = a[0].exp();
        for k in 1..a.len() {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Self::from_taylor(self.center, b)
    }

    pub fn ln(&self) -> Result<Self> {
        let a = self.taylor();
        if a[0] <= 0.0 {
            return Err(Error::domain(format!("logarithm of {:e}", a[0])));
        }
        let mut b = vec![0.0; a.len()];
        b[0] = a[0].ln();
        for k in 1..a.len() {
            let s: f64 = (1..k).map(|j| j as f64 * b[j] * a[k - j]).sum();
            b[k] = (a[k] - s / k as f64) / a[0];
        }
        Ok(Self::from_taylor(self.center, b))
    }

    /// Sine and cosine from one coupled recurrence.
    pub fn sin_cos(&self) -> (Self, Self) {
        let a = self.taylor();
        let mut s = vec![0.0; a.len()];
        let mut c = vec![0.0; a.len()];
        (s[0], c[0]) = a[0].sin_cos();
        for k in 1..a.len() {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                ss += j as f64 * a[j] * c[k - j];
                cc += j as f64 * a[j] * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        (
            Self::from_taylor(self.center, s),
            Self::from_taylor(self.center, c),
        )
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    pub fn tan(&self) -> Result<Self> {
        let (s, c) = self.sin_cos();
        if c.value().abs() <= DEFAULT_EPS_DIV {
            return Err(Error::domain(format!(
                "tan at a pole, cos = {:e}",
                c.value()
            )));
        }
        s.checked_mul(&c.recip()?)
    }

    pub fn sec(&self) -> Result<Self> {
        self.sec_with(DEFAULT_EPS_DIV)
    }

    pub fn sec_with(&self, eps_div: f64) -> Result<Self> {
        let c = self.cos();
        if c.value().abs() <= eps_div {
            return Err(Error::domain(format!(
                "sec at a pole, cos = {:e}",
                c.value()
            )));
        }
        c.recip_with(eps_div)
    }

    /// Real power `x^p`; the base must be positive unless `p` is an integer.
    pub fn powf(&self, p: f64) -> Result<Self> {
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return self.powi(p as i32);
        }
        let a = self.taylor();
        if a[0] <= DEFAULT_EPS_DIV {
            return Err(Error::domain(format!("non-integer power of {:e}", a[0])));
        }
        let mut b = vec![0.0; a.len()];
        b[0] = a[0].powf(p);
        for k in 1..a.len() {
            let s: f64 = (1..=k)
                .map(|j| ((p + 1.0) * j as f64 - k as f64) * a[j] * b[k - j])
                .sum();
            b[k] = s / (k as f64 * a[0]);
        }
        Ok(Self::from_taylor(self.center, b))
    }

    pub fn powi(&self, p: i32) -> Result<Self> {
        let base = if p < 0 { self.recip()? } else { self.clone() };
        let mut e = p.unsigned_abs();
        let mut out = Jet::constant(self.center, 1.0, self.order());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(out)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.checked_add(rhs).expect("jet addition across centers")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.checked_sub(rhs)
            .expect("jet subtraction across centers")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.checked_mul(rhs).expect("jet product across centers")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// A point of a curve in `Eⁿ` together with its derivatives: one jet per
/// coordinate, all sharing center and order.
#[derive(Debug, Clone, PartialEq)]
pub struct JetVector {
    components: Vec<Jet>,
}

impl JetVector {
    pub fn new(components: Vec<Jet>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::spec("a jet vector needs at least one component"))?;
        let (center, order) = (first.center(), first.order());
        for c in &components[1..] {
            if !centers_match(center, c.center()) {
                return Err(Error::CenterMismatch(center, c.center()));
            }
            if c.order() != order {
                return Err(Error::spec("jet vector components must share their order"));
            }
        }
        Ok(Self { components })
    }

    /// Build from `rows[k] = α⁽ᵏ⁾(center)`.
    pub fn from_derivative_rows(center: f64, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::spec("no derivative rows"))?;
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::spec("derivative rows differ in length"));
        }
        let comps = (0..dim)
            .map(|i| Jet::new(center, rows.iter().map(|r| r[i]).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub(crate) fn from_parts(components: Vec<Jet>) -> Self {
        Self { components }
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn order(&self) -> usize {
        self.components.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn center(&self) -> f64 {
        self.components[0].center()
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Jet {
        &self.components[i]
    }

    /// `k`-th derivative vector at the center.
    pub fn derivative_at(&self, k: usize) -> Vec<f64> {
        self.components.iter().map(|c| c.derivs()[k]).collect()
    }

    pub fn value(&self) -> Vec<f64> {
        self.derivative_at(0)
    }

    pub fn derivative(&self) -> Result<Self> {
        Ok(Self {
            components: self
                .components
                .iter()
                .map(Jet::derivative)
                .collect::<Result<_>>()?,
        })
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self {
            components: self.components.iter().map(|c| c.truncate(order)).collect(),
        }
    }

    pub fn dot(&self, other: &JetVector) -> Jet {
        let mut acc = &self.components[0] * &other.components[0];
        for (a, b) in self.components.iter().zip(&other.components).skip(1) {
            acc = acc + a * b;
        }
        acc
    }

    pub fn norm(&self) -> Result<Jet> {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, factor: &Jet) -> Self {
        Self {
            components: self.components.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn scale_f64(&self, factor: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scale(factor)).collect(),
        }
    }

    pub fn add(&self, other: &JetVector) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &JetVector) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Adds a constant vector to the value part.
    pub fn translate(&self, offset: &[f64]) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(offset)
                .map(|(c, w)| c.add_scalar(*w))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(d: &[f64]) -> Jet {
        Jet::new(0.0, d.to_vec()).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn add_examples() {
        assert_eq!(jet(&[1.0, 2.0]) + jet(&[3.0, 4.0]), jet(&[4.0, 6.0]));
        let x = jet(&[0.3, -1.0, 2.5]);
        assert_eq!(jet(&[0.0, 0.0, 0.0]) + x.clone(), x);
        let sin = Jet::variable(0.0, 2).sin();
        let cos = Jet::variable(0.0, 2).cos();
        assert_close((sin + cos).derivs(), &[1.0, 1.0, -1.0], 0.0);
    }

    #[test]
    fn mul_examples() {
        let t = Jet::variable(0.0, 2);
        let prod = t.sin() * t.cos();
        assert_close(prod.derivs(), &[0.0, 1.0, 0.0], 1e-15);
        let x = jet(&[0.7, 0.1, -0.4]);
        assert_eq!(&x * &Jet::constant(0.0, 1.0, 2), x);
        assert_close((&t * &t).derivs(), &[0.0, 0.0, 2.0], 0.0);
    }

    #[test]
    fn mixed_orders_truncate() {
        let a = jet(&[1.0, 2.0, 3.0]);
        let b = jet(&[1.0, 1.0]);
        assert_eq!((&a * &b).order(), 1);
        assert_eq!((&a + &b).order(), 1);
    }

    #[test]
    fn center_mismatch_is_reported() {
        let a = Jet::constant(0.0, 1.0, 1);
        let b = Jet::constant(0.5, 1.0, 1);
        assert!(matches!(a.checked_add(&b), Err(Error::CenterMismatch(..))));
        assert!(matches!(a.checked_mul(&b), Err(Error::CenterMismatch(..))));
    }

    #[test]
    fn reciprocal_examples() {
        assert_close(
            jet(&[2.0, 0.0, 0.0]).recip().unwrap().derivs(),
            &[0.5, 0.0, 0.0],
            0.0,
        );
        // 1/(1+t): derivatives 1, -1, 2
        assert_close(
            jet(&[1.0, 1.0, 0.0]).recip().unwrap().derivs(),
            &[1.0, -1.0, 2.0],
            1e-15,
        );
        assert!(matches!(
            jet(&[0.0, 1.0]).recip(),
            Err(Error::DivisionNearZero(_))
        ));
    }

    #[test]
    fn elementary_examples() {
        assert_close(jet(&[4.0]).sqrt().unwrap().derivs(), &[2.0], 0.0);
        let sec = Jet::variable(0.0, 2).sec().unwrap();
        assert_close(sec.derivs(), &[1.0, 0.0, 1.0], 1e-15);
        let sin = Jet::variable(0.0, 3).sin();
        assert_close(sin.derivs(), &[0.0, 1.0, 0.0, -1.0], 1e-15);
        assert!(matches!(jet(&[-1.0]).sqrt(), Err(Error::DomainError(_))));
        let pole = Jet::variable(std::f64::consts::FRAC_PI_2, 1);
        assert!(matches!(pole.sec(), Err(Error::DomainError(_))));
    }

    #[test]
    fn exp_ln_inverse() {
        let x = jet(&[0.8, 0.3, -0.2, 1.1, 0.5]);
        let back = x.exp().ln().unwrap();
        assert_close(back.derivs(), x.derivs(), 1e-13);
    }

    #[test]
    fn powers_agree() {
        let x = jet(&[1.3, 0.4, -0.2, 0.9]);
        let cube = x.powi(3).unwrap();
        assert_close(cube.derivs(), (&(&x * &x) * &x).derivs(), 1e-13);
        let half = x.powf(0.5).unwrap();
        assert_close(half.derivs(), x.sqrt().unwrap().derivs(), 1e-13);
        let inv = x.powi(-2).unwrap();
        let direct = (&x * &x).recip().unwrap();
        assert_close(inv.derivs(), direct.derivs(), 1e-12);
    }

    #[test]
    fn derivative_shifts_and_runs_out() {
        let x = jet(&[1.0, 2.0, 3.0]);
        assert_eq!(x.derivative().unwrap(), jet(&[2.0, 3.0]));
        assert!(matches!(
            jet(&[1.0]).derivative(),
            Err(Error::OrderTooLow { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Jet::new(0.0, vec![f64::NAN]).is_err());
        assert!(Jet::new(0.0, vec![]).is_err());
    }

    #[test]
    fn jet_vector_dot_and_norm() {
        let t = Jet::variable(0.3, 3);
        let v = JetVector::new(vec![t.cos(), t.sin()]).unwrap();
        let n = v.norm().unwrap();
        assert_close(n.derivs(), &[1.0, 0.0, 0.0, 0.0], 1e-14);
        let bad = JetVector::new(vec![Jet::variable(0.0, 2), Jet::variable(0.0, 3)]);
        assert!(bad.is_err());
    }
}
