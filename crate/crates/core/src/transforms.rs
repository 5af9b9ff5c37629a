//! The ψ, S, Σ and Mellin–Fourier transforms of atomic measures.
//!
//! `ψ_ν(z) = ∫ tz/(1 − tz) dν(t)`, `S_ν(z) = (1+z)/z · ψ_ν^{-1}(z)` and
//! `Σ_ν(z) = S_ν(z/(1−z))`. On the half-line ψ is inverted numerically on
//! `(−1, 0)`; everywhere else the inverse is taken at series level, which is
//! exact up to truncation for atomic measures.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, GridSpec, Space};
use crate::series::TruncatedSeries;

/// Threshold below which a circle measure is treated as having zero first moment.
pub const FIRST_MOMENT_FLOOR: f64 = 1e-8;

const RESIDUAL_TOL: f64 = 1e-15;

/// `ψ_ν(z)`. Half-line measures take `z ∈ ℂ \ (0, ∞)`, circle measures `|z| < 1`.
pub fn psi_eval(nu: &AtomicMeasure, z: Complex64) -> Result<Complex64> {
    match nu.space() {
        Space::PositiveHalfLine => {
            if z.im == 0.0 && z.re > 0.0 {
                return Err(Error::Domain(format!("psi on the half-line needs z outside (0, inf), got {z}")));
            }
        }
        Space::Circle => {
            if z.norm() >= 1.0 {
                return Err(Error::Domain(format!("psi on the circle needs |z| < 1, got {z}")));
            }
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in nu.atoms() {
        let tz = nu.point(a) * z;
        let denom = Complex64::new(1.0, 0.0) - tz;
        if denom.norm() < 1e-300 {
            return Err(Error::Singular(format!("z = {z} hits the pole of an atom")));
        }
        acc += a.weight * tz / denom;
    }
    Ok(acc)
}

/// ψ on the negative axis together with its derivative. Each term
/// `tz/(1 − tz)` is increasing in z there.
fn psi_neg(nu: &AtomicMeasure, z: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    for a in nu.atoms() {
        let u = 1.0 - a.pos * z;
        v += a.weight * (a.pos * z) / u;
        d += a.weight * a.pos / (u * u);
    }
    (v, d)
}

/// The unique `z < 0` with `ψ_ν(z) = w`, for a half-line measure and `w ∈ (−1, 0)`.
///
/// ψ increases from −1 to 0 on `(−∞, 0)`, and the atoms bound it between
/// the transforms of `δ_{t_min}` and `δ_{t_max}`, which gives an exact
/// bracket `[w/((1+w) t_min), w/((1+w) t_max)]`. Newton steps are taken
/// inside the bracket and fall back to bisection when they leave it.
pub fn psi_inv_neg(nu: &AtomicMeasure, w: f64) -> Result<f64> {
    Space::PositiveHalfLine.expect(nu.space())?;
    if !(w > -1.0 && w < 0.0) {
        return Err(Error::Domain(format!("psi inverse needs w in (-1, 0), got {w}")));
    }
    let atoms = nu.atoms();
    let t_min = atoms[0].pos;
    let t_max = atoms[atoms.len() - 1].pos;
    let base = w / (1.0 + w);
    if atoms.len() == 1 {
        return Ok(base / t_min);
    }
    let mut lo = base / t_min;
    let mut hi = base / t_max;
    let mut z = 0.5 * (lo + hi);
    for _ in 0..300 {
        let (v, d) = psi_neg(nu, z);
        let f = v - w;
        if f.abs() <= RESIDUAL_TOL * w.abs().max(1e-300) {
            return Ok(z);
        }
        if f < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let newton = z - f / d;
        z = if newton > lo && newton < hi && d > 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * z.abs() {
            return Ok(z);
        }
    }
    Ok(z)
}

/// `S_ν(z)` for a half-line measure and `z ∈ (−1, 0)`. Positive.
pub fn s_eval_pos(nu: &AtomicMeasure, z: f64) -> Result<f64> {
    if nu.is_point_mass() && nu.space() == Space::PositiveHalfLine {
        if !(z > -1.0 && z < 0.0) {
            return Err(Error::Domain(format!("S needs z in (-1, 0), got {z}")));
        }
        return Ok(1.0 / nu.atoms()[0].pos);
    }
    let inv = psi_inv_neg(nu, z)?;
    Ok((1.0 + z) / z * inv)
}

/// `log S_ν(z)`; exact `−log a` for a point mass `δ_a`.
pub fn log_s_eval_pos(nu: &AtomicMeasure, z: f64) -> Result<f64> {
    if nu.is_point_mass() && nu.space() == Space::PositiveHalfLine {
        if !(z > -1.0 && z < 0.0) {
            return Err(Error::Domain(format!("S needs z in (-1, 0), got {z}")));
        }
        return Ok(-nu.atoms()[0].pos.ln());
    }
    let s = s_eval_pos(nu, z)?;
    if !(s > 0.0) {
        return Err(Error::Branch(format!("S = {s} is not positive")));
    }
    Ok(s.ln())
}

/// `ψ_ν` as a series: `c_0 = 0`, `c_k = m_k`.
pub fn psi_series(nu: &AtomicMeasure, order: usize) -> TruncatedSeries {
    let mut c = vec![Complex64::new(0.0, 0.0)];
    c.extend(nu.moments(order));
    TruncatedSeries::new(c)
}

fn check_first_moment(m1: Complex64) -> Result<()> {
    if m1.norm() <= FIRST_MOMENT_FLOOR {
        Err(Error::VanishingFirstMoment(m1.norm()))
    } else {
        Ok(())
    }
}

/// `S(w) = (1+w)/w · ψ^{-1}(w)` from a ψ-series of order `N+1`; result has order `N`.
pub fn s_series_from_psi(psi: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_first_moment(psi.coeff(1))?;
    let chi = psi.revert()?.div_by_var()?;
    let n = chi.order();
    let one_plus = TruncatedSeries::from_real(&[1.0, 1.0]).truncate(n);
    Ok(&chi * &one_plus)
}

/// The inverse of [`s_series_from_psi`]: order-N S-series to order-(N+1) ψ-series.
pub fn psi_from_s_series(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    let n = s.order() + 1;
    let ws = s.mul_by_var();
    let one_plus = TruncatedSeries::from_real(&[1.0, 1.0]).truncate(n);
    let chi = ws.div(&one_plus)?;
    chi.revert()
}

/// The S-transform of ν as a series of the given order.
pub fn s_series(nu: &AtomicMeasure, order: usize) -> Result<TruncatedSeries> {
    if nu.is_point_mass() {
        let t = nu.point(&nu.atoms()[0]);
        return Ok(TruncatedSeries::constant(Complex64::new(1.0, 0.0) / t, order));
    }
    s_series_from_psi(&psi_series(nu, order + 1))
}

/// `z/(1−z)` as a series.
pub(crate) fn mobius_series(order: usize) -> TruncatedSeries {
    let mut c = vec![Complex64::new(1.0, 0.0); order + 1];
    c[0] = Complex64::new(0.0, 0.0);
    TruncatedSeries::new(c)
}

/// `z/(1+z)` as a series.
pub(crate) fn inverse_mobius_series(order: usize) -> TruncatedSeries {
    let c = (0..=order)
        .map(|k| {
            if k == 0 {
                0.0
            } else if k % 2 == 1 {
                1.0
            } else {
                -1.0
            }
        })
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    TruncatedSeries::new(c)
}

/// `Σ_ν(z) = S_ν(z/(1−z))` for a circle measure with non-vanishing first moment.
/// The constant term is `1/m_1`.
pub fn sigma_series(nu: &AtomicMeasure, order: usize) -> Result<TruncatedSeries> {
    Space::Circle.expect(nu.space())?;
    check_first_moment(nu.moment(1))?;
    let s = s_series(nu, order)?;
    s.compose(&mobius_series(order))
}

/// Recovers the ψ-series (order N+1) from an order-N Σ-series.
pub fn psi_from_sigma_series(sigma: &TruncatedSeries) -> Result<TruncatedSeries> {
    let s = sigma.compose(&inverse_mobius_series(sigma.order()))?;
    psi_from_s_series(&s)
}

/// `Φ_ν(s) = ∫ t^{is} dν(t)` for a half-line measure.
pub fn mellin_fourier(nu: &AtomicMeasure, s: f64) -> Result<Complex64> {
    Space::PositiveHalfLine.expect(nu.space())?;
    Ok(nu
        .atoms()
        .iter()
        .map(|a| Complex64::from_polar(a.weight, s * a.pos.ln()))
        .sum())
}

/// `∫ (1−t)/(1+z−tz) dν(t)`, the first-order approximation of `S_ν(z) − 1`
/// for measures concentrated near 1.
pub fn s_linearization(nu: &AtomicMeasure, z: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in nu.atoms() {
        let t = nu.point(a);
        let denom = 1.0 + z - t * z;
        if denom.norm() < 1e-300 {
            return Err(Error::Singular(format!("linearization pole at z = {z}")));
        }
        acc += a.weight * (1.0 - t) / denom;
    }
    Ok(acc)
}

/// `sup_z |(S_ν(z) − 1)/∫(1−t)/(1+z−tz) dν − 1|` over a half-line grid.
pub fn linearization_deviation(nu: &AtomicMeasure, grid: &GridSpec) -> Result<f64> {
    let mut worst = 0.0f64;
    for &z in grid.real_points()? {
        let lin = s_linearization(nu, Complex64::new(z, 0.0))?.re;
        if lin == 0.0 {
            return Err(Error::Singular("linearization vanishes".into()));
        }
        let ratio = (s_eval_pos(nu, z)? - 1.0) / lin;
        worst = worst.max((ratio - 1.0).abs());
    }
    Ok(worst)
}
