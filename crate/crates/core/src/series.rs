//! Truncated complex power series `c_0 + c_1 z + ... + c_N z^N`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
}

impl TruncatedSeries {
    /// Series whose order is `coeffs.len() - 1`. Panics on an empty vector.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        TruncatedSeries { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![ZERO; order + 1])
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(ONE, order)
    }

    /// The series `z`.
    pub fn var(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = ONE;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, ZERO);
        Self::new(c)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// `f(z)/z`, one order lower; requires `c_0 = 0`.
    pub fn div_by_var(&self) -> Result<Self> {
        if self.coeffs[0] != ZERO {
            return Err(Error::Series("division by z needs a zero constant term".into()));
        }
        if self.order() == 0 {
            return Err(Error::Series("order too small to divide by z".into()));
        }
        Ok(Self::new(self.coeffs[1..].to_vec()))
    }

    /// `z f(z)`, one order higher.
    pub fn mul_by_var(&self) -> Self {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(ZERO);
        c.extend_from_slice(&self.coeffs);
        Self::new(c)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        let b0 = other.coeffs[0];
        if b0 == ZERO {
            return Err(Error::Series("division by a series with zero constant term".into()));
        }
        let n = self.order().min(other.order());
        let mut q = vec![ZERO; n + 1];
        for k in 0..=n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= other.coeffs[j] * q[k - j];
            }
            q[k] = acc / b0;
        }
        Ok(Self::new(q))
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one(self.order()).div(self)
    }

    /// Formal exponential via `n b_n = Σ k a_k b_{n-k}`.
    pub fn exp(&self) -> Self {
        let n = self.order();
        let a = &self.coeffs;
        let mut b = vec![ZERO; n + 1];
        b[0] = a[0].exp();
        for m in 1..=n {
            let mut acc = ZERO;
            for k in 1..=m {
                acc += a[k] * b[m - k] * k as f64;
            }
            b[m] = acc / m as f64;
        }
        Self::new(b)
    }

    /// Formal logarithm with the principal branch of `log c_0`.
    pub fn ln(&self) -> Result<Self> {
        let a = &self.coeffs;
        if a[0] == ZERO {
            return Err(Error::Series("log of a series with zero constant term".into()));
        }
        let n = self.order();
        let mut b = vec![ZERO; n + 1];
        b[0] = a[0].ln();
        for m in 1..=n {
            let mut acc = a[m] * m as f64;
            for k in 1..m {
                acc -= b[k] * a[m - k] * k as f64;
            }
            b[m] = acc / (a[0] * m as f64);
        }
        Ok(Self::new(b))
    }

    /// `self ∘ g` by Horner's rule; requires `g.c_0 = 0`.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        if g.coeffs[0] != ZERO {
            return Err(Error::Series("inner series must have zero constant term".into()));
        }
        let n = self.order().min(g.order());
        let g = g.truncate(n);
        let mut acc = Self::zero(n);
        for &c in self.coeffs.iter().rev() {
            acc = &acc * &g;
            acc.coeffs[0] += c;
        }
        Ok(acc.truncate(n))
    }

    /// Compositional inverse `g` with `f(g(w)) = w`, by Newton iteration
    /// `g ← g − (f∘g − w)/(f'∘g)`, which doubles the number of correct
    /// coefficients per step.
    pub fn revert(&self) -> Result<Self> {
        if self.coeffs[0] != ZERO {
            return Err(Error::Series("reversion needs c_0 = 0".into()));
        }
        let n = self.order();
        if n == 0 {
            return Err(Error::Series("reversion needs order >= 1".into()));
        }
        let c1 = self.coeffs[1];
        if c1 == ZERO {
            return Err(Error::Series("reversion needs c_1 != 0".into()));
        }
        let w = Self::var(n);
        let df = self.derivative();
        let mut g = w.scale(ONE / c1);
        let mut correct = 1usize;
        while correct < n {
            let residual = &self.compose(&g)? - &w;
            let slope = df.compose(&g)?.truncate(n);
            g = &g - &residual.div(&slope)?;
            correct *= 2;
        }
        // one extra pass cleans up rounding in the last coefficients
        let residual = &self.compose(&g)? - &w;
        let slope = df.compose(&g)?.truncate(n);
        g = &g - &residual.div(&slope)?;
        Ok(g)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.order().min(other.order());
        (0..=n)
            .map(|k| (self.coeffs[k] - other.coeffs[k]).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(rhs.order());
        TruncatedSeries::new((0..=n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect())
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(rhs.order());
        TruncatedSeries::new((0..=n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect())
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(rhs.order());
        let mut c = vec![ZERO; n + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a == ZERO {
                continue;
            }
            for j in 0..=(n - i) {
                c[i + j] += a * rhs.coeffs[j];
            }
        }
        TruncatedSeries::new(c)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}
