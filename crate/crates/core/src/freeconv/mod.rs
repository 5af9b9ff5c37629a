//! Free multiplicative convolution at moment level, row products of S and
//! Σ transforms, and free cumulants.

mod nc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, GridSpec, Space};
use crate::series::TruncatedSeries;
use crate::transforms::{
    log_s_eval_pos, mobius_series, psi_from_s_series, s_series, sigma_series,
};

pub use nc::{cumulants_by_enumeration, nc_partitions, NonCrossingPartition, MAX_NC_ORDER};

/// Moments `m_1..m_N` of a measure on a given space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub space: Space,
    pub moments: Vec<Complex64>,
}

impl MomentVector {
    pub fn of(nu: &AtomicMeasure, order: usize) -> Self {
        MomentVector {
            space: nu.space(),
            moments: nu.moments(order),
        }
    }

    pub fn order(&self) -> usize {
        self.moments.len()
    }

    pub fn max_abs_diff(&self, other: &MomentVector) -> f64 {
        self.moments
            .iter()
            .zip(&other.moments)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Moments of `μ ⊠ ν` to the given order, through the product of S-series.
///
/// A point-mass factor acts as a dilation (or rotation) and is applied directly.
pub fn boxtimes_moments(mu: &AtomicMeasure, nu: &AtomicMeasure, order: usize) -> Result<MomentVector> {
    mu.space().expect(nu.space())?;
    if order == 0 {
        return Ok(MomentVector { space: mu.space(), moments: Vec::new() });
    }
    for (p, other) in [(mu, nu), (nu, mu)] {
        if p.is_point_mass() {
            let a = p.point(&p.atoms()[0]);
            let mut moments = other.moments(order);
            let mut ak = Complex64::new(1.0, 0.0);
            for m in moments.iter_mut() {
                ak *= a;
                *m *= ak;
            }
            return Ok(MomentVector { space: mu.space(), moments });
        }
    }
    let s = &s_series(mu, order - 1)? * &s_series(nu, order - 1)?;
    let psi = psi_from_s_series(&s)?;
    Ok(MomentVector {
        space: mu.space(),
        moments: psi.coeffs()[1..=order].to_vec(),
    })
}

/// The brute-force moment formula over `NC(n)`; `order ≤ 8`.
pub fn nc_moment_oracle(mu: &AtomicMeasure, nu: &AtomicMeasure, order: usize) -> Result<MomentVector> {
    mu.space().expect(nu.space())?;
    if order > MAX_NC_ORDER {
        return Err(Error::OrderTooLarge(order));
    }
    Ok(MomentVector {
        space: mu.space(),
        moments: nc::nc_boxtimes(&mu.moments(order), &nu.moments(order))?,
    })
}

/// The partition formula applied to raw moment sequences.
pub fn nc_boxtimes_moments(m_mu: &[Complex64], m_nu: &[Complex64]) -> Result<Vec<Complex64>> {
    nc::nc_boxtimes(m_mu, m_nu)
}

/// Groups consecutive identical measures so each is transformed once.
pub(crate) fn runs(row: &[AtomicMeasure]) -> Vec<(&AtomicMeasure, usize)> {
    let mut out: Vec<(&AtomicMeasure, usize)> = Vec::new();
    for m in row {
        match out.last_mut() {
            Some((prev, count)) if *prev == m => *count += 1,
            _ => out.push((m, 1)),
        }
    }
    out
}

/// `(1/α) Π_k S_{ν_k}(z)` on a grid, with its logarithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSProduct {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub log_values: Vec<f64>,
}

/// Evaluates the scaled S-transform product of a half-line row on a grid.
///
/// The logarithm is accumulated as `−log α + Σ_k log S_{ν_k}(z)` in row order.
pub fn row_s_product(row: &[AtomicMeasure], alpha: f64, grid: &GridSpec) -> Result<RowSProduct> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("scaling {alpha} must be positive")));
    }
    for m in row {
        Space::PositiveHalfLine.expect(m.space())?;
    }
    let points = grid.real_points()?.to_vec();
    let groups = runs(row);
    let mut log_values = Vec::with_capacity(points.len());
    for &z in &points {
        let mut acc = -alpha.ln();
        for (m, count) in &groups {
            let l = log_s_eval_pos(m, z)?;
            for _ in 0..*count {
                acc += l;
            }
        }
        if !acc.is_finite() {
            return Err(Error::Branch(format!("row product logarithm is {acc} at z = {z}")));
        }
        log_values.push(acc);
    }
    Ok(RowSProduct {
        values: log_values.iter().map(|l| l.exp()).collect(),
        points,
        log_values,
    })
}

/// `(1/λ) Π_k Σ_{ν_k}(z)` as a series, for a circle row and `λ = e^{i·angle}`.
///
/// The product is formed as the exponential of the summed series
/// logarithms, so long rows of identical factors stay accurate.
pub fn row_sigma_product(row: &[AtomicMeasure], lambda_angle: f64, order: usize) -> Result<TruncatedSeries> {
    for m in row {
        Space::Circle.expect(m.space())?;
    }
    let mut log_sum = TruncatedSeries::constant(Complex64::new(0.0, -lambda_angle), order);
    for (m, count) in runs(row) {
        let l = sigma_series(m, order)?.ln()?;
        log_sum = &log_sum + &l.scale(Complex64::new(count as f64, 0.0));
    }
    Ok(log_sum.exp())
}

fn moments_series(m: &[Complex64]) -> TruncatedSeries {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    c.extend_from_slice(m);
    TruncatedSeries::new(c)
}

/// `[z^j] M(z)^s` for `s = 1..n`, with `M = 1 + Σ m_k z^k`.
fn power_table(m: &[Complex64], n: usize) -> Vec<TruncatedSeries> {
    let base = moments_series(m).truncate(n);
    let mut out = Vec::with_capacity(n + 1);
    out.push(TruncatedSeries::one(n));
    for s in 1..=n {
        let next = &out[s - 1] * &base;
        out.push(next);
    }
    out
}

/// Free cumulants from moments, via `m_n = Σ_{s=1}^n κ_s [z^{n−s}] M(z)^s`.
pub fn free_cumulants(m: &[Complex64]) -> Vec<Complex64> {
    let n = m.len();
    let pows = power_table(m, n);
    let mut kappa = Vec::with_capacity(n);
    for k in 1..=n {
        let rest: Complex64 = (1..k).map(|s| kappa[s - 1] * pows[s].coeff(k - s)).sum();
        kappa.push(m[k - 1] - rest);
    }
    kappa
}

/// Moments from free cumulants; inverse of [`free_cumulants`].
pub fn moments_from_cumulants(kappa: &[Complex64]) -> Vec<Complex64> {
    let n = kappa.len();
    let mut m: Vec<Complex64> = Vec::with_capacity(n);
    for k in 1..=n {
        let pows = power_table(&m, k);
        let v: Complex64 = (1..=k).map(|s| kappa[s - 1] * pows[s].coeff(k - s)).sum();
        m.push(v);
    }
    m
}

/// `Σ`-series of a measure recovered from the product route, used by checks
/// that compare a row product against a single measure.
pub fn sigma_from_s(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    s.compose(&mobius_series(s.order()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;
    use std::f64::consts::PI;

    fn half(atoms: &[(f64, f64)]) -> AtomicMeasure {
        AtomicMeasure::new(
            Space::PositiveHalfLine,
            atoms.iter().map(|&(t, w)| Atom::new(t, w)).collect(),
        )
        .unwrap()
    }

    fn circ(atoms: &[(f64, f64)]) -> AtomicMeasure {
        AtomicMeasure::new(Space::Circle, atoms.iter().map(|&(t, w)| Atom::new(t, w)).collect()).unwrap()
    }

    #[test]
    fn boxtimes_examples() {
        let m = half(&[(1.0, 0.5), (2.0, 0.5)]);
        let out = boxtimes_moments(&m, &m, 4).unwrap();
        assert!((out.moments[0].re - 2.25).abs() < 1e-14);
        assert!((out.moments[1].re - 6.1875).abs() < 1e-12);
        let a = 2.5;
        let d = AtomicMeasure::dirac(Space::PositiveHalfLine, a).unwrap();
        let out = boxtimes_moments(&d, &m, 5).unwrap();
        for k in 1..=5 {
            let expect = a.powi(k as i32) * m.moment(k as u32).re;
            assert!((out.moments[k - 1].re - expect).abs() < 1e-11 * expect);
        }
    }

    #[test]
    fn identity_element() {
        let one = AtomicMeasure::dirac(Space::PositiveHalfLine, 1.0).unwrap();
        let m = half(&[(0.3, 0.2), (1.1, 0.5), (4.0, 0.3)]);
        let out = boxtimes_moments(&one, &m, 6).unwrap();
        assert_eq!(out, MomentVector::of(&m, 6));
    }

    #[test]
    fn circle_first_moment_modulus() {
        let mu = circ(&[(0.4, 0.7), (-2.0, 0.3)]);
        let nu = circ(&[(1.0, 0.5), (0.1, 0.5)]);
        let out = boxtimes_moments(&mu, &nu, 4).unwrap();
        let expect = mu.moment(1).norm() * nu.moment(1).norm();
        assert!((out.moments[0].norm() - expect).abs() < 1e-14);
        let pair = circ(&[(PI / 2.0, 0.5), (-PI / 2.0, 0.5)]);
        assert!(matches!(boxtimes_moments(&pair, &nu, 3), Err(Error::VanishingFirstMoment(_))));
    }

    #[test]
    fn oracle_matches_series_route() {
        let mu = half(&[(0.5, 0.3), (1.5, 0.3), (3.0, 0.4)]);
        let nu = half(&[(0.8, 0.6), (2.2, 0.4)]);
        let a = boxtimes_moments(&mu, &nu, 6).unwrap();
        let b = nc_moment_oracle(&mu, &nu, 6).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
        assert!(matches!(nc_moment_oracle(&mu, &nu, 9), Err(Error::OrderTooLarge(9))));
    }

    #[test]
    fn row_s_examples() {
        let g = GridSpec::default_half_line();
        let one = AtomicMeasure::dirac(Space::PositiveHalfLine, 1.0).unwrap();
        let r = row_s_product(&[one.clone(), one], 1.0, &g).unwrap();
        assert!(r.values.iter().all(|&v| v == 1.0));
        let d2 = AtomicMeasure::dirac(Space::PositiveHalfLine, 2.0).unwrap();
        let d3 = AtomicMeasure::dirac(Space::PositiveHalfLine, 3.0).unwrap();
        let r = row_s_product(&[d2, d3], 6.0, &g).unwrap();
        assert!(r.values.iter().all(|&v| (v - 1.0 / 36.0).abs() < 1e-15));
        let m = half(&[(1.0, 0.5), (2.0, 0.5)]);
        let r = row_s_product(&[m], 1.0, &GridSpec::half_line(vec![-0.5]).unwrap()).unwrap();
        assert!((r.values[0] - 0.5f64.sqrt()).abs() < 1e-13);
        assert!(row_s_product(&[], 0.0, &g).is_err());
    }

    #[test]
    fn row_sigma_examples() {
        let (a, b) = (0.7, -2.1);
        let row = [AtomicMeasure::dirac(Space::Circle, a).unwrap(), AtomicMeasure::dirac(Space::Circle, b).unwrap()];
        // δ_α ⊠ δ_β ⊠ δ_λ is δ_1 exactly when λ = conj(αβ)
        let s = row_sigma_product(&row, -(a + b), 6).unwrap();
        assert!(s.max_abs_diff(&TruncatedSeries::one(6)) < 1e-14);
        let s = row_sigma_product(&row, a + b, 6).unwrap();
        let expect = TruncatedSeries::constant(Complex64::from_polar(1.0, -2.0 * (a + b)), 6);
        assert!(s.max_abs_diff(&expect) < 1e-14);
        let row = [AtomicMeasure::dirac(Space::Circle, 0.0).unwrap()];
        assert_eq!(row_sigma_product(&row, 0.0, 4).unwrap(), TruncatedSeries::one(4));
        let th: f64 = 0.3;
        let pair = circ(&[(th, 0.5), (-th, 0.5)]);
        let row = vec![pair; 7];
        let s = row_sigma_product(&row, 0.0, 3).unwrap();
        assert!((1.0 / s.coeff(0).norm() - th.cos().powi(7)).abs() < 1e-14);
    }

    #[test]
    fn cumulant_examples() {
        let m: Vec<Complex64> = [1.5, 2.5].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let k = free_cumulants(&m);
        assert_eq!(k[0], m[0]);
        assert!((k[1].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cumulant_recursion_matches_enumeration() {
        let m = half(&[(0.4, 0.25), (1.3, 0.5), (2.7, 0.25)]).moments(8);
        let a = free_cumulants(&m);
        let b = cumulants_by_enumeration(&m).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10 * (1.0 + y.norm()));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_measure(space: Space) -> impl Strategy<Value = AtomicMeasure> {
            prop::collection::vec((0.0f64..1.0, 0.05f64..1.0), 2..5).prop_map(move |v| {
                let total: f64 = v.iter().map(|x| x.1).sum();
                let atoms = v
                    .into_iter()
                    .map(|(u, w)| {
                        let pos = match space {
                            Space::PositiveHalfLine => 0.2 + 2.8 * u,
                            Space::Circle => -PI + 2.0 * PI * u,
                        };
                        Atom::new(pos, w / total)
                    })
                    .collect();
                AtomicMeasure::new(space, atoms).unwrap()
            })
        }

        proptest! {
            #[test]
            fn cumulant_round_trip(v in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 8)) {
                let m: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
                let back = moments_from_cumulants(&free_cumulants(&m));
                for (x, y) in back.iter().zip(&m) {
                    prop_assert!((x - y).norm() < 1e-9);
                }
            }

            #[test]
            fn boxtimes_commutes(mu in arb_measure(Space::PositiveHalfLine), nu in arb_measure(Space::PositiveHalfLine)) {
                let a = boxtimes_moments(&mu, &nu, 6).unwrap();
                let b = boxtimes_moments(&nu, &mu, 6).unwrap();
                let scale = a.moments.iter().map(|x| x.norm()).fold(1.0, f64::max);
                prop_assert!(a.max_abs_diff(&b) < 1e-10 * scale);
            }

            #[test]
            fn oracle_agrees_on_circle(mu in arb_measure(Space::Circle), nu in arb_measure(Space::Circle)) {
                prop_assume!(mu.moment(1).norm() > 0.05 && nu.moment(1).norm() > 0.05);
                let a = boxtimes_moments(&mu, &nu, 6).unwrap();
                let b = nc_moment_oracle(&mu, &nu, 6).unwrap();
                prop_assert!(a.max_abs_diff(&b) < 1e-9);
            }
        }
    }
}
