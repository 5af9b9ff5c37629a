//! Bounded-Lipschitz distance between finite positive measures.
//!
//! `d(σ₁, σ₂) = sup { |∫ f d(σ₁ − σ₂)| : |f| ≤ 1, Lip(f) ≤ 1 }`.
//!
//! The half-line `[0, ∞]` is charted onto `[0, 1]` by `t ↦ t/(1+t)` and the
//! circle carries its arc-length metric. Only the values of `f` at the atoms
//! matter, and on a line the Lipschitz constraints between neighbours imply
//! all the others, so the supremum is a chain-structured linear program. It
//! is solved exactly by dynamic programming over concave piecewise-linear
//! value functions. On the circle the chain closes up; the value is concave
//! in the value of `f` at the first atom, which is found by golden-section
//! search.

use std::f64::consts::PI;

use crate::error::Result;

use super::{FiniteMeasure, Space};

/// Concave piecewise-linear function on `[lo, lo + Σ len]`.
#[derive(Debug, Clone)]
struct Concave {
    lo: f64,
    val_lo: f64,
    segs: Vec<(f64, f64)>,
}

impl Concave {
    fn point(x: f64) -> Self {
        Concave {
            lo: x,
            val_lo: 0.0,
            segs: Vec::new(),
        }
    }

    fn interval(lo: f64, hi: f64) -> Self {
        Concave {
            lo,
            val_lo: 0.0,
            segs: vec![(hi - lo, 0.0)],
        }
    }

    fn hi(&self) -> f64 {
        self.lo + self.segs.iter().map(|s| s.0).sum::<f64>()
    }

    fn add_linear(&mut self, slope: f64) {
        self.val_lo += slope * self.lo;
        for s in &mut self.segs {
            s.1 += slope;
        }
    }

    /// `W(y) = max_{|x-y| ≤ d} V(x)`: a flat of width `2d` at the argmax.
    fn dilate(&mut self, d: f64) {
        let split = self
            .segs
            .iter()
            .position(|s| s.1 <= 0.0)
            .unwrap_or(self.segs.len());
        self.segs.insert(split, (2.0 * d, 0.0));
        self.lo -= d;
    }

    /// Restricts the domain to `[a, b]`. Returns false when the result is empty.
    fn clip(&mut self, a: f64, b: f64) -> bool {
        let hi = self.hi();
        let new_lo = self.lo.max(a);
        let new_hi = hi.min(b);
        if new_lo > new_hi {
            return false;
        }
        let mut cut = new_lo - self.lo;
        while cut > 0.0 && !self.segs.is_empty() {
            let (len, slope) = self.segs[0];
            if len <= cut {
                self.val_lo += len * slope;
                cut -= len;
                self.segs.remove(0);
            } else {
                self.val_lo += cut * slope;
                self.segs[0].0 -= cut;
                cut = 0.0;
            }
        }
        self.lo = new_lo;
        let mut cut = hi - new_hi;
        while cut > 0.0 {
            match self.segs.last_mut() {
                Some(last) if last.0 <= cut => {
                    cut -= last.0;
                    self.segs.pop();
                }
                Some(last) => {
                    last.0 -= cut;
                    cut = 0.0;
                }
                None => break,
            }
        }
        self.segs.retain(|s| s.0 > 0.0);
        true
    }

    fn max(&self) -> f64 {
        let mut v = self.val_lo;
        let mut best = v;
        for &(len, slope) in &self.segs {
            v += len * slope;
            best = best.max(v);
        }
        best
    }
}

/// Max of `Σ s_i f_i` over `|f_i| ≤ 1`, `|f_{i+1} - f_i| ≤ gaps[i]`,
/// optionally with `f_1` pinned.
fn chain_max(masses: &[f64], gaps: &[f64], first: Option<f64>) -> Concave {
    let mut v = match first {
        Some(c) => Concave::point(c),
        None => Concave::interval(-1.0, 1.0),
    };
    v.add_linear(masses[0]);
    for (i, &s) in masses.iter().enumerate().skip(1) {
        v.dilate(gaps[i - 1]);
        v.clip(-1.0, 1.0);
        v.add_linear(s);
    }
    v
}

fn line_distance(masses: &[f64], positions: &[f64]) -> f64 {
    let gaps: Vec<f64> = positions.windows(2).map(|w| w[1] - w[0]).collect();
    chain_max(masses, &gaps, None).max().abs()
}

fn circle_distance(masses: &[f64], angles: &[f64]) -> f64 {
    if masses.len() == 1 {
        return masses[0].abs();
    }
    let gaps: Vec<f64> = angles.windows(2).map(|w| w[1] - w[0]).collect();
    let wrap = 2.0 * PI - (angles[angles.len() - 1] - angles[0]);
    let value = |c: f64| {
        let mut v = chain_max(masses, &gaps, Some(c));
        if v.clip(c - wrap, c + wrap) {
            v.max()
        } else {
            f64::NEG_INFINITY
        }
    };
    // Concave in c: golden-section search on [-1, 1].
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (-1.0f64, 1.0f64);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (value(x1), value(x2));
    for _ in 0..200 {
        if b - a < 1e-15 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = value(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = value(x1);
        }
    }
    [value(-1.0), value(1.0), f1, f2, value(0.5 * (a + b))]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
        .abs()
}

/// Merged signed masses of `σ₁ − σ₂` at sorted chart coordinates.
fn signed_points(s1: &FiniteMeasure, s2: &FiniteMeasure) -> (Vec<f64>, Vec<f64>) {
    let chart = |t: f64| match s1.space {
        Space::PositiveHalfLine => t / (1.0 + t),
        Space::Circle => t,
    };
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (m, sign) in [(s1, 1.0), (s2, -1.0)] {
        pts.extend(m.atoms.iter().map(|a| (chart(a.pos), sign * a.weight)));
        if m.space == Space::PositiveHalfLine {
            pts.push((0.0, sign * m.mass_at_zero));
            pts.push((1.0, sign * m.mass_at_infinity));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut xs: Vec<f64> = Vec::new();
    let mut ms: Vec<f64> = Vec::new();
    for (x, m) in pts {
        if xs.last().is_some_and(|&l| (x - l).abs() <= 1e-15) {
            *ms.last_mut().unwrap() += m;
        } else {
            xs.push(x);
            ms.push(m);
        }
    }
    (xs, ms)
}

/// Bounded-Lipschitz distance; metrizes weak convergence of finite positive
/// measures on `[0, ∞]` or on the circle, total mass included.
pub fn weak_distance(s1: &FiniteMeasure, s2: &FiniteMeasure) -> Result<f64> {
    s1.space.expect(s2.space)?;
    let (xs, ms) = signed_points(s1, s2);
    if ms.iter().all(|&m| m == 0.0) {
        return Ok(0.0);
    }
    Ok(match s1.space {
        Space::PositiveHalfLine => line_distance(&ms, &xs),
        Space::Circle => circle_distance(&ms, &xs),
    })
}
