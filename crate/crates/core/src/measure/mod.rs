//! Atomic probability measures on the positive half-line and the unit
//! circle, finite positive measures on the compactified half-line, and the
//! elementary operations on them.
//!
//! Circle positions are stored as principal angles in `[-π, π)`. Half-line
//! positions are strictly positive reals. Atoms are kept sorted by position
//! with near-coincident positions merged, so structurally equal values
//! represent equal measures.

mod grid;
mod schema;
mod weak;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{GridSpec, DEFAULT_GRID_POINTS};
pub use weak::weak_distance;

/// Positions closer than this (relative to `max(1, |t|)`) are merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Tolerance on the total mass of a probability measure.
pub const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    #[serde(rename = "positive")]
    PositiveHalfLine,
    #[serde(rename = "circle")]
    Circle,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::PositiveHalfLine => "positive",
            Space::Circle => "circle",
        }
    }

    pub(crate) fn expect(self, other: Space) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                expected: self.name(),
                found: other.name(),
            })
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A weighted point. `pos` is `t > 0` on the half-line and the angle on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub pos: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(pos: f64, weight: f64) -> Self {
        Atom { pos, weight }
    }
}

/// Wraps an angle into the principal range `[-π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut x = theta - 2.0 * PI * ((theta + PI) / (2.0 * PI)).floor();
    if x >= PI {
        x -= 2.0 * PI;
    }
    if x < -PI {
        x = -PI;
    }
    x
}

fn same_position(space: Space, a: f64, b: f64) -> bool {
    match space {
        Space::PositiveHalfLine => (a - b).abs() <= MERGE_TOL * a.abs().max(b.abs()).max(1.0),
        Space::Circle => (a - b).abs() <= MERGE_TOL,
    }
}

/// Sorts atoms and merges near-coincident positions. Zero-weight atoms are dropped.
fn canonicalize(space: Space, mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.retain(|a| a.weight > 0.0);
    atoms.sort_by(|a, b| a.pos.total_cmp(&b.pos));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if same_position(space, last.pos, a.pos) => last.weight += a.weight,
            _ => out.push(a),
        }
    }
    if space == Space::Circle && out.len() > 1 {
        let first = out[0].pos;
        let last = out[out.len() - 1].pos;
        if first + 2.0 * PI - last <= MERGE_TOL {
            let w = out.pop().map(|a| a.weight).unwrap_or(0.0);
            out[0].weight += w;
        }
    }
    out
}

/// Finitely many weighted atoms with total mass one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "schema::MeasureJson", into = "schema::MeasureJson")]
pub struct AtomicMeasure {
    space: Space,
    atoms: Vec<Atom>,
}

/// Maps accepted by [`AtomicMeasure::pushforward`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PushMap {
    /// `t ↦ 1/t` on the half-line, `t ↦ t̄` on the circle.
    Reciprocal,
    /// `t ↦ t/b`, i.e. `dν'(t) = dν(bt)`; half-line only, `b > 0`.
    ScaleBy(f64),
    /// `t ↦ t·e^{-iβ}` for the circle point `e^{iβ}` given by its angle.
    RotateBy(f64),
}

impl AtomicMeasure {
    /// Validates and canonicalizes a list of atoms.
    pub fn new(space: Space, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("empty atom list".into()));
        }
        let mut total = 0.0;
        for a in &atoms {
            if !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "non-positive weight {}",
                    a.weight
                )));
            }
            match space {
                Space::PositiveHalfLine => {
                    if !(a.pos > 0.0) || !a.pos.is_finite() {
                        return Err(Error::InvalidMeasure(format!(
                            "non-positive position {}",
                            a.pos
                        )));
                    }
                }
                Space::Circle => {
                    if !(a.pos >= -PI && a.pos < PI) {
                        return Err(Error::InvalidMeasure(format!(
                            "angle {} outside [-pi, pi)",
                            a.pos
                        )));
                    }
                }
            }
            total += a.weight;
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let atoms = atoms
            .into_iter()
            .map(|a| Atom::new(a.pos, a.weight / total))
            .collect();
        Ok(Self::from_canonical(space, atoms))
    }

    /// Builds a measure from computed atoms without validation.
    /// Circle angles are wrapped; the caller guarantees unit mass.
    pub(crate) fn from_canonical(space: Space, atoms: Vec<Atom>) -> Self {
        let atoms = match space {
            Space::Circle => atoms
                .into_iter()
                .map(|a| Atom::new(wrap_angle(a.pos), a.weight))
                .collect(),
            Space::PositiveHalfLine => atoms,
        };
        AtomicMeasure {
            space,
            atoms: canonicalize(space, atoms),
        }
    }

    /// The point mass at `t` (half-line) or at angle `t` (circle).
    pub fn dirac(space: Space, t: f64) -> Result<Self> {
        let t = if space == Space::Circle { wrap_angle(t) } else { t };
        Self::new(space, vec![Atom::new(t, 1.0)])
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_point_mass(&self) -> bool {
        self.atoms.len() == 1
    }

    /// The atom position as a complex number (`t` or `e^{iθ}`).
    pub(crate) fn point(&self, a: &Atom) -> Complex64 {
        match self.space {
            Space::PositiveHalfLine => Complex64::new(a.pos, 0.0),
            Space::Circle => Complex64::from_polar(1.0, a.pos),
        }
    }

    /// `∫ t^k dν(t)`.
    pub fn moment(&self, k: u32) -> Complex64 {
        match self.space {
            Space::PositiveHalfLine => {
                let s: f64 = self.atoms.iter().map(|a| a.weight * a.pos.powi(k as i32)).sum();
                Complex64::new(s, 0.0)
            }
            Space::Circle => self
                .atoms
                .iter()
                .map(|a| Complex64::from_polar(a.weight, k as f64 * a.pos))
                .sum(),
        }
    }

    /// Moments `m_1..m_n`.
    pub fn moments(&self, n: usize) -> Vec<Complex64> {
        (1..=n as u32).map(|k| self.moment(k)).collect()
    }

    pub fn pushforward(&self, map: PushMap) -> Result<Self> {
        let atoms: Vec<Atom> = match (map, self.space) {
            (PushMap::Reciprocal, Space::PositiveHalfLine) => self
                .atoms
                .iter()
                .map(|a| Atom::new(1.0 / a.pos, a.weight))
                .collect(),
            (PushMap::Reciprocal, Space::Circle) => self
                .atoms
                .iter()
                .map(|a| Atom::new(-a.pos, a.weight))
                .collect(),
            (PushMap::ScaleBy(b), Space::PositiveHalfLine) => {
                if !(b > 0.0) || !b.is_finite() {
                    return Err(Error::Domain(format!("scale factor {b} must be positive")));
                }
                self.atoms
                    .iter()
                    .map(|a| Atom::new(a.pos / b, a.weight))
                    .collect()
            }
            (PushMap::RotateBy(beta), Space::Circle) => self
                .atoms
                .iter()
                .map(|a| Atom::new(a.pos - beta, a.weight))
                .collect(),
            (PushMap::ScaleBy(_), Space::Circle) => {
                return Err(Error::SpaceMismatch {
                    expected: Space::PositiveHalfLine.name(),
                    found: Space::Circle.name(),
                })
            }
            (PushMap::RotateBy(_), Space::PositiveHalfLine) => {
                return Err(Error::SpaceMismatch {
                    expected: Space::Circle.name(),
                    found: Space::PositiveHalfLine.name(),
                })
            }
        };
        Ok(Self::from_canonical(self.space, atoms))
    }

    /// Mass of `{|t - 1| ≥ ε}` (half-line) or `{|arg t| ≥ ε}` (circle).
    pub fn mass_away_from_one(&self, eps: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| match self.space {
                Space::PositiveHalfLine => (a.pos - 1.0).abs() >= eps,
                Space::Circle => a.pos.abs() >= eps,
            })
            .map(|a| a.weight)
            .sum()
    }
}

/// Classical multiplicative convolution `μ ⊛ ν`: the law of the product of
/// independent variables. Exact on atoms.
pub fn classical_multconv(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<AtomicMeasure> {
    Ok(classical_multconv_pruned(mu, nu, 0.0)?.0)
}

/// As [`classical_multconv`], dropping product atoms lighter than
/// `min_weight`. Returns the renormalized measure and the pruned mass.
pub fn classical_multconv_pruned(
    mu: &AtomicMeasure,
    nu: &AtomicMeasure,
    min_weight: f64,
) -> Result<(AtomicMeasure, f64)> {
    mu.space.expect(nu.space)?;
    let mut atoms = Vec::with_capacity(mu.atoms.len() * nu.atoms.len());
    for a in &mu.atoms {
        for b in &nu.atoms {
            let pos = match mu.space {
                Space::PositiveHalfLine => a.pos * b.pos,
                Space::Circle => a.pos + b.pos,
            };
            atoms.push(Atom::new(pos, a.weight * b.weight));
        }
    }
    let merged = AtomicMeasure::from_canonical(mu.space, atoms);
    if min_weight <= 0.0 {
        return Ok((merged, 0.0));
    }
    let (kept, dropped): (Vec<Atom>, Vec<Atom>) = merged
        .atoms
        .into_iter()
        .partition(|a| a.weight >= min_weight);
    let pruned: f64 = dropped.iter().map(|a| a.weight).sum();
    let kept_mass: f64 = kept.iter().map(|a| a.weight).sum();
    if kept.is_empty() {
        return Err(Error::InvalidMeasure("pruning removed every atom".into()));
    }
    let atoms = kept
        .into_iter()
        .map(|a| Atom::new(a.pos, a.weight / kept_mass))
        .collect();
    Ok((AtomicMeasure::from_canonical(mu.space, atoms), pruned))
}

/// `max_k ν_k({|t-1| ≥ ε})` (or `{|arg t| ≥ ε}` on the circle).
pub fn infinitesimality_stat(row: &[AtomicMeasure], eps: f64) -> Result<f64> {
    if row.is_empty() {
        return Err(Error::InvalidMeasure("empty row".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("epsilon {eps} must be positive")));
    }
    Ok(row
        .iter()
        .map(|m| m.mass_away_from_one(eps))
        .fold(0.0, f64::max))
}

/// A finite positive atomic measure. On the half-line it lives on the
/// compactification `[0, ∞]`, with the endpoint masses held separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "schema::MeasureJson", into = "schema::MeasureJson")]
pub struct FiniteMeasure {
    space: Space,
    atoms: Vec<Atom>,
    mass_at_zero: f64,
    mass_at_infinity: f64,
}

impl FiniteMeasure {
    pub fn zero(space: Space) -> Self {
        FiniteMeasure {
            space,
            atoms: Vec::new(),
            mass_at_zero: 0.0,
            mass_at_infinity: 0.0,
        }
    }

    /// Interior atoms plus endpoint masses (the latter must be zero on the circle).
    pub fn new(
        space: Space,
        atoms: Vec<Atom>,
        mass_at_zero: f64,
        mass_at_infinity: f64,
    ) -> Result<Self> {
        for m in [mass_at_zero, mass_at_infinity] {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::InvalidMeasure(format!("endpoint mass {m} invalid")));
            }
        }
        if space == Space::Circle && (mass_at_zero > 0.0 || mass_at_infinity > 0.0) {
            return Err(Error::InvalidMeasure(
                "circle measures have no endpoint masses".into(),
            ));
        }
        for a in &atoms {
            if !(a.weight >= 0.0) || !a.weight.is_finite() {
                return Err(Error::InvalidMeasure(format!("weight {} invalid", a.weight)));
            }
            match space {
                Space::PositiveHalfLine if !(a.pos > 0.0 && a.pos.is_finite()) => {
                    return Err(Error::InvalidMeasure(format!(
                        "interior position {} must lie in (0, inf)",
                        a.pos
                    )))
                }
                Space::Circle if !(a.pos >= -PI && a.pos < PI) => {
                    return Err(Error::InvalidMeasure(format!(
                        "angle {} outside [-pi, pi)",
                        a.pos
                    )))
                }
                _ => {}
            }
        }
        Ok(Self::from_parts(space, atoms, mass_at_zero, mass_at_infinity))
    }

    pub(crate) fn from_parts(
        space: Space,
        atoms: Vec<Atom>,
        mass_at_zero: f64,
        mass_at_infinity: f64,
    ) -> Self {
        let atoms = match space {
            Space::Circle => atoms
                .into_iter()
                .map(|a| Atom::new(wrap_angle(a.pos), a.weight))
                .collect(),
            Space::PositiveHalfLine => atoms,
        };
        FiniteMeasure {
            space,
            atoms: canonicalize(space, atoms),
            mass_at_zero,
            mass_at_infinity,
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn mass_at_zero(&self) -> f64 {
        self.mass_at_zero
    }

    pub fn mass_at_infinity(&self) -> f64 {
        self.mass_at_infinity
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum::<f64>() + self.mass_at_zero + self.mass_at_infinity
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass() == 0.0
    }

    /// `∫ t^j dσ(t)` on the circle.
    pub fn circle_moment(&self, j: i32) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| Complex64::from_polar(a.weight, j as f64 * a.pos))
            .sum()
    }

    pub fn add(&self, other: &FiniteMeasure) -> Result<FiniteMeasure> {
        self.space.expect(other.space)?;
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Ok(Self::from_parts(
            self.space,
            atoms,
            self.mass_at_zero + other.mass_at_zero,
            self.mass_at_infinity + other.mass_at_infinity,
        ))
    }

    pub fn scale(&self, c: f64) -> FiniteMeasure {
        Self::from_parts(
            self.space,
            self.atoms
                .iter()
                .map(|a| Atom::new(a.pos, a.weight * c))
                .collect(),
            self.mass_at_zero * c,
            self.mass_at_infinity * c,
        )
    }
}
