//! Triangular arrays of atomic measures: generation, centering, and the
//! per-row quantities whose convergence decides the limit of the row
//! products.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{
    infinitesimality_stat, weak_distance, wrap_angle, Atom, AtomicMeasure, FiniteMeasure, Space,
};

pub const DEFAULT_TAU: f64 = 1.0;
pub const DEFAULT_CAUCHY_TOL: f64 = 1e-2;
pub const DEFAULT_HAAR_THRESHOLD: f64 = 10.0;
pub const DEFAULT_EPS: f64 = 0.1;

/// Positions below this are treated as 0 when forming `1/a`, and above its
/// reciprocal as ∞.
const OVERFLOW_GUARD: f64 = 1e-300;

/// Row generator of an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    /// `ν_nk = δ_{exp(c_k/n)}` (half-line) or the point at angle `c_k/n`,
    /// `k_n = n`, with the shifts used cyclically.
    PointMass { shifts: Vec<f64> },
    /// `ν_nk = (1 − c/n)δ_1 + (c/n)δ_atom`, `k_n = n`; on the circle `atom` is an angle.
    TwoPointPoisson { c: f64, atom: f64 },
    /// `ν_nk = ½(δ_{e^{iθ_n}} + δ_{e^{−iθ_n}})` with `θ_n = n^{−exponent}`, `k_n = n`.
    SymmetricPair {
        #[serde(default = "default_exponent")]
        exponent: f64,
    },
    /// Rows listed explicitly in the spec.
    Inline,
}

fn default_exponent() -> f64 {
    0.25
}

/// `α_n` on the half-line, `λ_n = e^{i·angle}` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Scaling {
    Const { value: f64 },
    Rotation { angle: f64 },
}

/// An explicit row `n ↦ [ν_n1, …]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InlineRow {
    pub n: u64,
    pub measures: Vec<AtomicMeasure>,
}

/// Entries of the `rows` field: a schedule index or an inline row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RowEntry {
    Index(u64),
    Inline(InlineRow),
}

/// An array on one of the two spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub space: Space,
    #[serde(flatten)]
    pub family: Family,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub rows: Vec<RowEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaling>,
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

/// One row of an array with its scaling: `α_n` on the half-line, the angle
/// of `λ_n` on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: u64,
    pub measures: Vec<AtomicMeasure>,
    pub scaling: f64,
}

impl ArraySpec {
    pub fn new(space: Space, family: Family) -> Self {
        ArraySpec {
            space,
            family,
            tau: DEFAULT_TAU,
            rows: Vec::new(),
            scaling: None,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_scaling(mut self, scaling: Scaling) -> Self {
        self.scaling = Some(scaling);
        self
    }

    pub fn with_schedule(mut self, rows: &[u64]) -> Self {
        self.rows = rows.iter().map(|&n| RowEntry::Index(n)).collect();
        self
    }

    /// Parses an array spec; `params` may be omitted when every parameter has a default.
    pub fn from_json(s: &str) -> Result<Self> {
        let mut v: serde_json::Value = serde_json::from_str(s)?;
        if let Some(obj) = v.as_object_mut() {
            let inline = obj.get("family").and_then(|f| f.as_str()) == Some("inline");
            if !inline && !obj.contains_key("params") {
                obj.insert("params".into(), serde_json::json!({}));
            }
        }
        let spec: ArraySpec = serde_json::from_value(v)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let tau_ok = match self.space {
            Space::PositiveHalfLine => self.tau > 0.0 && self.tau.is_finite(),
            Space::Circle => self.tau > 0.0 && self.tau < std::f64::consts::PI,
        };
        if !tau_ok {
            return Err(Error::Params(format!("tau = {} out of range for the {} space", self.tau, self.space)));
        }
        match (self.scaling, self.space) {
            (None, _) => {}
            (Some(Scaling::Const { value }), Space::PositiveHalfLine) => {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(Error::Params(format!("scaling {value} must be positive")));
                }
            }
            (Some(Scaling::Rotation { angle }), Space::Circle) => {
                if !angle.is_finite() {
                    return Err(Error::Params("rotation angle is not finite".into()));
                }
            }
            (Some(_), _) => {
                return Err(Error::Params(format!(
                    "scaling type does not fit the {} space",
                    self.space
                )))
            }
        }
        match &self.family {
            Family::PointMass { shifts } => {
                if shifts.is_empty() || shifts.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Params("point_mass needs finite shifts".into()));
                }
            }
            Family::TwoPointPoisson { c, atom } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::Params(format!("poisson rate {c} must be positive")));
                }
                let ok = match self.space {
                    Space::PositiveHalfLine => *atom > 0.0 && atom.is_finite(),
                    Space::Circle => atom.is_finite(),
                };
                if !ok {
                    return Err(Error::Params(format!("poisson atom {atom} invalid")));
                }
            }
            Family::SymmetricPair { exponent } => {
                if self.space != Space::Circle {
                    return Err(Error::Params("symmetric_pair lives on the circle".into()));
                }
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::Params(format!("exponent {exponent} must be positive")));
                }
            }
            Family::Inline => {
                for r in &self.rows {
                    match r {
                        RowEntry::Index(_) => {
                            return Err(Error::Params("inline arrays list rows explicitly".into()))
                        }
                        RowEntry::Inline(row) => {
                            if row.measures.is_empty() {
                                return Err(Error::Params(format!("row {} is empty", row.n)));
                            }
                            for m in &row.measures {
                                self.space.expect(m.space())?;
                            }
                        }
                    }
                }
            }
        }
        if !matches!(self.family, Family::Inline)
            && self.rows.iter().any(|r| matches!(r, RowEntry::Inline(_)))
        {
            return Err(Error::Params("inline rows need the inline family".into()));
        }
        Ok(())
    }

    /// The row indices listed in the spec.
    pub fn schedule(&self) -> Vec<u64> {
        self.rows
            .iter()
            .map(|r| match r {
                RowEntry::Index(n) => *n,
                RowEntry::Inline(row) => row.n,
            })
            .collect()
    }

    pub fn scaling_at(&self, _n: u64) -> f64 {
        match (self.scaling, self.space) {
            (Some(Scaling::Const { value }), _) => value,
            (Some(Scaling::Rotation { angle }), _) => wrap_angle(angle),
            (None, Space::PositiveHalfLine) => 1.0,
            (None, Space::Circle) => 0.0,
        }
    }

    /// Materializes row `n`.
    pub fn row(&self, n: u64) -> Result<Row> {
        if n == 0 {
            return Err(Error::Schedule("row indices start at 1".into()));
        }
        let nf = n as f64;
        let measures = match &self.family {
            Family::PointMass { shifts } => {
                let mut distinct = Vec::with_capacity(shifts.len());
                for c in shifts {
                    let pos = match self.space {
                        Space::PositiveHalfLine => (c / nf).exp(),
                        Space::Circle => c / nf,
                    };
                    distinct.push(AtomicMeasure::dirac(self.space, pos)?);
                }
                (0..n as usize).map(|k| distinct[k % distinct.len()].clone()).collect()
            }
            Family::TwoPointPoisson { c, atom } => {
                let p = c / nf;
                if p >= 1.0 {
                    return Err(Error::Schedule(format!("row {n} needs n > c = {c}")));
                }
                let one = match self.space {
                    Space::PositiveHalfLine => 1.0,
                    Space::Circle => 0.0,
                };
                let m = AtomicMeasure::new(self.space, vec![Atom::new(one, 1.0 - p), Atom::new(*atom, p)])?;
                vec![m; n as usize]
            }
            Family::SymmetricPair { exponent } => {
                let th = nf.powf(-exponent);
                let m = AtomicMeasure::new(Space::Circle, vec![Atom::new(th, 0.5), Atom::new(-th, 0.5)])?;
                vec![m; n as usize]
            }
            Family::Inline => self
                .rows
                .iter()
                .find_map(|r| match r {
                    RowEntry::Inline(row) if row.n == n => Some(row.measures.clone()),
                    _ => None,
                })
                .ok_or_else(|| Error::Schedule(format!("no inline row with n = {n}")))?,
        };
        Ok(Row {
            n,
            measures,
            scaling: self.scaling_at(n),
        })
    }
}

/// Checks that a schedule has at least three strictly increasing entries.
pub fn validate_schedule(rows: &[u64]) -> Result<()> {
    if rows.len() < 3 {
        return Err(Error::Schedule(format!("need at least 3 rows, got {}", rows.len())));
    }
    if rows[0] == 0 || rows.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Schedule("rows must be positive and strictly increasing".into()));
    }
    Ok(())
}

fn space_of(row: &[AtomicMeasure]) -> Result<Space> {
    let space = row
        .first()
        .ok_or_else(|| Error::Params("empty row".into()))?
        .space();
    for m in row {
        space.expect(m.space())?;
    }
    Ok(space)
}

/// Logarithms of the centering constants: `log b = ∫_{|log t| ≤ τ} log t dν`
/// on the half-line, `arg b = ∫_{|arg t| < τ} arg t dν` on the circle.
pub fn log_centering(row: &[AtomicMeasure], tau: f64) -> Result<Vec<f64>> {
    let space = space_of(row)?;
    Ok(row
        .iter()
        .map(|m| {
            m.atoms()
                .iter()
                .filter_map(|a| {
                    let l = match space {
                        Space::PositiveHalfLine => a.pos.ln(),
                        Space::Circle => a.pos,
                    };
                    let inside = match space {
                        Space::PositiveHalfLine => l.abs() <= tau,
                        Space::Circle => l.abs() < tau,
                    };
                    inside.then_some(a.weight * l)
                })
                .sum()
        })
        .collect())
}

/// The centering constants `b_nk`: positive reals on the half-line, angles
/// of the points `b_nk` on the circle.
pub fn centering_constants(row: &[AtomicMeasure], tau: f64) -> Result<Vec<f64>> {
    let space = space_of(row)?;
    let logs = log_centering(row, tau)?;
    Ok(match space {
        Space::PositiveHalfLine => logs.into_iter().map(f64::exp).collect(),
        Space::Circle => logs,
    })
}

/// `dν°(t) = dν(bt)`, with `b` given by its logarithm (half-line) or angle (circle).
/// Positions are shifted in log coordinates, so `δ_a` centered at `log a` is `δ_1` exactly.
pub fn center_row(row: &[AtomicMeasure], log_b: &[f64]) -> Result<Vec<AtomicMeasure>> {
    if row.len() != log_b.len() {
        return Err(Error::Params(format!(
            "row has {} measures but {} centering constants",
            row.len(),
            log_b.len()
        )));
    }
    let space = space_of(row)?;
    row.iter()
        .zip(log_b)
        .map(|(m, &lb)| {
            let atoms = m
                .atoms()
                .iter()
                .map(|a| {
                    let pos = match space {
                        Space::PositiveHalfLine => (a.pos.ln() - lb).exp(),
                        Space::Circle => wrap_angle(a.pos - lb),
                    };
                    Atom::new(pos, a.weight)
                })
                .collect();
            AtomicMeasure::new(space, atoms)
        })
        .collect()
}

/// `(1−a)²/(1+a²)`: the density `(t−1)²/(t²+1)` at `t = 1/a`.
fn sigma_density(a: f64) -> f64 {
    let d = a - 1.0;
    d * d / (1.0 + a * a)
}

/// `dσ_n(t) = Σ_k ((t−1)²/(t²+1)) dν°_nk(1/t)` on `[0, ∞]`.
pub fn sigma_n_pos(centered: &[AtomicMeasure]) -> Result<FiniteMeasure> {
    let space = space_of(centered)?;
    Space::PositiveHalfLine.expect(space)?;
    let mut atoms = Vec::new();
    let mut at_zero = 0.0;
    let mut at_inf = 0.0;
    for m in centered {
        for a in m.atoms() {
            if a.pos < OVERFLOW_GUARD {
                at_inf += a.weight;
            } else if a.pos > 1.0 / OVERFLOW_GUARD {
                at_zero += a.weight;
            } else {
                let w = a.weight * sigma_density(a.pos);
                if w > 0.0 {
                    atoms.push(Atom::new(1.0 / a.pos, w));
                }
            }
        }
    }
    Ok(FiniteMeasure::from_parts(Space::PositiveHalfLine, atoms, at_zero, at_inf))
}

/// `∫ (t²−1)/(t²+1) dν°(1/t)`.
fn tanh_term(centered: &AtomicMeasure) -> f64 {
    centered
        .atoms()
        .iter()
        .map(|a| -a.weight * a.pos.ln().tanh())
        .sum()
}

/// `γ_n = −log α + Σ_k [∫ (t²−1)/(t²+1) dν°_nk(1/t) − log b_nk]`.
pub fn gamma_n_pos(row: &[AtomicMeasure], alpha: f64, tau: f64) -> Result<f64> {
    let log_b = log_centering(row, tau)?;
    let centered = center_row(row, &log_b)?;
    Ok(gamma_from_centered_pos(&centered, &log_b, alpha))
}

fn gamma_from_centered_pos(centered: &[AtomicMeasure], log_b: &[f64], alpha: f64) -> f64 {
    let mut acc = -alpha.ln();
    for (m, lb) in centered.iter().zip(log_b) {
        acc += tanh_term(m) - lb;
    }
    acc
}

/// `1 − cos θ` without cancellation.
fn one_minus_cos(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    2.0 * s * s
}

/// `dσ_n(t) = Σ_k (1 − Re t) dν°_nk(t)` on the circle.
pub fn sigma_n_circ(centered: &[AtomicMeasure]) -> Result<FiniteMeasure> {
    let space = space_of(centered)?;
    Space::Circle.expect(space)?;
    let atoms = centered
        .iter()
        .flat_map(|m| m.atoms().iter())
        .filter_map(|a| {
            let w = a.weight * one_minus_cos(a.pos);
            (w > 0.0).then(|| Atom::new(a.pos, w))
        })
        .collect();
    Ok(FiniteMeasure::from_parts(Space::Circle, atoms, 0.0, 0.0))
}

/// `γ_n = arg λ + Σ_k [∫ Im t dν°_nk + arg b_nk]`, reduced to `[−π, π)`.
pub fn gamma_n_circ(row: &[AtomicMeasure], lambda_angle: f64, tau: f64) -> Result<f64> {
    let beta = log_centering(row, tau)?;
    let centered = center_row(row, &beta)?;
    Ok(gamma_from_centered_circ(&centered, &beta, lambda_angle))
}

fn gamma_from_centered_circ(centered: &[AtomicMeasure], beta: &[f64], lambda_angle: f64) -> f64 {
    let mut acc = lambda_angle;
    for (m, b) in centered.iter().zip(beta) {
        let im: f64 = m.atoms().iter().map(|a| a.weight * a.pos.sin()).sum();
        acc += im + b;
    }
    wrap_angle(acc)
}

/// `Σ_k ∫ (1 − Re t) dν°_nk(t)`, the total mass of `σ_n` on the circle.
pub fn haar_statistic(centered: &[AtomicMeasure]) -> Result<f64> {
    Space::Circle.expect(space_of(centered)?)?;
    Ok(centered
        .iter()
        .flat_map(|m| m.atoms().iter())
        .map(|a| a.weight * one_minus_cos(a.pos))
        .sum())
}

/// `g(w) = ∫ (t²−1)/(t²+1) dν°(1/t) + ∫ [(1+tw)/(w−t)]·(t−1)²/(t²+1) dν°(1/t)`.
pub fn g_eval(centered: &AtomicMeasure, w: Complex64) -> Result<Complex64> {
    Space::PositiveHalfLine.expect(centered.space())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in centered.atoms() {
        let t = 1.0 / a.pos;
        let denom = w - t;
        if denom.norm() == 0.0 {
            return Err(Error::Singular(format!("w = {w} is a pole of g")));
        }
        let kernel = (1.0 + t * w) / denom;
        acc += a.weight * (-a.pos.ln().tanh() + kernel * sigma_density(a.pos));
    }
    Ok(acc)
}

/// `h(z) = −i∫ Im t dν°(t) + ∫ ((1+tz)/(1−tz))(1 − Re t) dν°(t)`, `|z| < 1`.
pub fn h_eval(centered: &AtomicMeasure, z: Complex64) -> Result<Complex64> {
    Space::Circle.expect(centered.space())?;
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("h needs |z| < 1, got {z}")));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in centered.atoms() {
        let t = Complex64::from_polar(1.0, a.pos);
        let kernel = (1.0 + t * z) / (1.0 - t * z);
        acc += a.weight * (Complex64::new(0.0, -a.pos.sin()) + kernel * one_minus_cos(a.pos));
    }
    Ok(acc)
}

/// The constant `(74 + M_1)/M_2` bounding `|Re g| / |Im g|` on a compact set
/// of `w` with `Re w < 0 < Im w`, where `M_1 = sup |Re k|`, `M_2 = inf (−Im k)`
/// for `k = (1+tw)/(w−t)` over `t ∈ [0, ∞]`, found on a dense grid in `t`.
pub fn g_ratio_constant(test_set: &[Complex64]) -> Result<f64> {
    const STEPS: usize = 20_000;
    let mut m1 = 0.0f64;
    let mut m2 = f64::INFINITY;
    for &w in test_set {
        if !(w.re < 0.0 && w.im > 0.0) {
            return Err(Error::Domain(format!("test point {w} outside the left upper quadrant")));
        }
        // t = tan φ over [0, π/2], with t = ∞ giving k = −w
        for i in 0..=STEPS {
            let k = if i == STEPS {
                -w
            } else {
                let t = (std::f64::consts::FRAC_PI_2 * i as f64 / STEPS as f64).tan();
                (1.0 + t * w) / (w - t)
            };
            m1 = m1.max(k.re.abs());
            m2 = m2.min(-k.im);
        }
    }
    Ok((74.0 + m1) / m2)
}

/// The constant `(12 + M_2)/M_1` for `|Im h| ≤ M Re h` on `|z| ≤ r`, with
/// `M_1 = (1−r)/(1+r)` and `M_2 = 2r/(1−r²)` the extreme values of the
/// Herglotz kernel over the disk.
pub fn h_ratio_constant(radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::Domain(format!("radius {radius} must lie in (0, 1)")));
    }
    let m1 = (1.0 - radius) / (1.0 + radius);
    let m2 = 2.0 * radius / (1.0 - radius * radius);
    Ok((12.0 + m2) / m1)
}

/// Per-row quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RowDiagnostics {
    pub n: u64,
    pub k: usize,
    /// `α_n`, or the angle of `λ_n` on the circle
    pub scaling: f64,
    /// centering constants: `b_nk` on the half-line, `arg b_nk` on the circle
    pub b: Vec<f64>,
    pub sigma_n: FiniteMeasure,
    pub gamma_n: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub haar_stat: Option<f64>,
    /// `|∫ t dν_n|` for the row product (circle)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_moment_abs: Option<f64>,
    pub infinitesimality_stat: f64,
    /// weak distance from the previous row's `σ_n`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_step: Option<f64>,
    /// `|γ_n − γ_m|` (half-line) or `|e^{iγ_n} − e^{iγ_m}|` (circle) from the previous row
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_step: Option<f64>,
}

/// Numerical judgment on the limit of the row products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    ConvergesTo { gamma: f64, sigma: FiniteMeasure },
    HaarLimit,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tolerances {
    pub cauchy: f64,
    pub haar_threshold: f64,
    pub eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cauchy: DEFAULT_CAUCHY_TOL,
            haar_threshold: DEFAULT_HAAR_THRESHOLD,
            eps: DEFAULT_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub space: Space,
    pub rows: Vec<RowDiagnostics>,
    pub verdict: Verdict,
}

/// Computes the diagnostics of a single row.
pub fn row_diagnostics(row: &Row, tau: f64, eps: f64) -> Result<RowDiagnostics> {
    let space = space_of(&row.measures)?;
    let log_b = log_centering(&row.measures, tau)?;
    let centered = center_row(&row.measures, &log_b)?;
    let stat = infinitesimality_stat(&row.measures, eps)?;
    Ok(match space {
        Space::PositiveHalfLine => RowDiagnostics {
            n: row.n,
            k: row.measures.len(),
            scaling: row.scaling,
            b: log_b.iter().map(|l| l.exp()).collect(),
            sigma_n: sigma_n_pos(&centered)?,
            gamma_n: gamma_from_centered_pos(&centered, &log_b, row.scaling),
            haar_stat: None,
            first_moment_abs: None,
            infinitesimality_stat: stat,
            sigma_step: None,
            gamma_step: None,
        },
        Space::Circle => {
            let log_m1: f64 = row.measures.iter().map(|m| m.moment(1).norm().ln()).sum();
            RowDiagnostics {
                n: row.n,
                k: row.measures.len(),
                scaling: row.scaling,
                gamma_n: gamma_from_centered_circ(&centered, &log_b, row.scaling),
                b: log_b,
                sigma_n: sigma_n_circ(&centered)?,
                haar_stat: Some(haar_statistic(&centered)?),
                first_moment_abs: Some(log_m1.exp()),
                infinitesimality_stat: stat,
                sigma_step: None,
                gamma_step: None,
            }
        }
    })
}

/// Steps this small are roundoff and count as non-increasing.
const STEP_FLOOR: f64 = 1e-12;

fn non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] || w[1] <= STEP_FLOOR)
}

/// Evaluates the schedule in parallel (results ordered by `n`) and forms a verdict.
///
/// `ConvergesTo` needs the successive `σ_n` distances and `γ_n` gaps to be
/// non-increasing with the last ones below `tol.cauchy`; `HaarLimit` needs the
/// circle statistic to increase strictly and end at or above `tol.haar_threshold`.
pub fn diagnose(spec: &ArraySpec, rows: &[u64], tol: &Tolerances) -> Result<Diagnosis> {
    spec.validate()?;
    validate_schedule(rows)?;
    let mut diags: Vec<RowDiagnostics> = rows
        .par_iter()
        .map(|&n| row_diagnostics(&spec.row(n)?, spec.tau, tol.eps))
        .collect::<Result<_>>()?;
    for i in 1..diags.len() {
        let d = weak_distance(&diags[i].sigma_n, &diags[i - 1].sigma_n)?;
        let g = match spec.space {
            Space::PositiveHalfLine => (diags[i].gamma_n - diags[i - 1].gamma_n).abs(),
            Space::Circle => {
                (Complex64::from_polar(1.0, diags[i].gamma_n) - Complex64::from_polar(1.0, diags[i - 1].gamma_n))
                    .norm()
            }
        };
        diags[i].sigma_step = Some(d);
        diags[i].gamma_step = Some(g);
    }
    let verdict = verdict_of(&diags, tol);
    Ok(Diagnosis {
        space: spec.space,
        rows: diags,
        verdict,
    })
}

fn verdict_of(diags: &[RowDiagnostics], tol: &Tolerances) -> Verdict {
    let stats: Vec<f64> = diags.iter().filter_map(|d| d.haar_stat).collect();
    if stats.len() == diags.len()
        && stats.windows(2).all(|w| w[1] > w[0])
        && stats.last().is_some_and(|&s| s >= tol.haar_threshold)
    {
        return Verdict::HaarLimit;
    }
    let ds: Vec<f64> = diags.iter().filter_map(|d| d.sigma_step).collect();
    let gs: Vec<f64> = diags.iter().filter_map(|d| d.gamma_step).collect();
    let settled = |xs: &[f64]| non_increasing(xs) && xs.last().is_some_and(|&x| x < tol.cauchy);
    if settled(&ds) && settled(&gs) {
        let last = diags.last().expect("schedule has rows");
        return Verdict::ConvergesTo {
            gamma: last.gamma_n,
            sigma: last.sigma_n.clone(),
        };
    }
    Verdict::Inconclusive
}
