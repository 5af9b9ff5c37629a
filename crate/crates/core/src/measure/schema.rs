//! JSON form of measures:
//! `{"space":"positive"|"circle","atoms":[{"t"|"theta":x,"w":w}],"massAtZero":m0,"massAtInfinity":m1}`.

use serde::{Deserialize, Serialize};

use super::{Atom, AtomicMeasure, FiniteMeasure, Space};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct AtomJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    w: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub(crate) struct MeasureJson {
    space: Space,
    #[serde(default)]
    atoms: Vec<AtomJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_at_zero: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_at_infinity: Option<f64>,
}

fn atoms_from_json(space: Space, atoms: &[AtomJson]) -> Result<Vec<Atom>> {
    atoms
        .iter()
        .map(|a| {
            let pos = match (space, a.t, a.theta) {
                (Space::PositiveHalfLine, Some(t), None) => t,
                (Space::Circle, None, Some(th)) => th,
                (Space::PositiveHalfLine, _, _) => {
                    return Err(Error::InvalidMeasure("half-line atoms need exactly the key \"t\"".into()))
                }
                (Space::Circle, _, _) => {
                    return Err(Error::InvalidMeasure("circle atoms need exactly the key \"theta\"".into()))
                }
            };
            Ok(Atom::new(pos, a.w))
        })
        .collect()
}

fn atoms_to_json(space: Space, atoms: &[Atom]) -> Vec<AtomJson> {
    atoms
        .iter()
        .map(|a| match space {
            Space::PositiveHalfLine => AtomJson { t: Some(a.pos), theta: None, w: a.weight },
            Space::Circle => AtomJson { t: None, theta: Some(a.pos), w: a.weight },
        })
        .collect()
}

impl TryFrom<MeasureJson> for AtomicMeasure {
    type Error = Error;

    fn try_from(j: MeasureJson) -> Result<Self> {
        if j.mass_at_zero.unwrap_or(0.0) != 0.0 || j.mass_at_infinity.unwrap_or(0.0) != 0.0 {
            return Err(Error::InvalidMeasure(
                "probability measures cannot charge 0 or infinity".into(),
            ));
        }
        AtomicMeasure::new(j.space, atoms_from_json(j.space, &j.atoms)?)
    }
}

impl From<AtomicMeasure> for MeasureJson {
    fn from(m: AtomicMeasure) -> Self {
        MeasureJson {
            space: m.space,
            atoms: atoms_to_json(m.space, &m.atoms),
            mass_at_zero: None,
            mass_at_infinity: None,
        }
    }
}

impl TryFrom<MeasureJson> for FiniteMeasure {
    type Error = Error;

    fn try_from(j: MeasureJson) -> Result<Self> {
        FiniteMeasure::new(
            j.space,
            atoms_from_json(j.space, &j.atoms)?,
            j.mass_at_zero.unwrap_or(0.0),
            j.mass_at_infinity.unwrap_or(0.0),
        )
    }
}

impl From<FiniteMeasure> for MeasureJson {
    fn from(m: FiniteMeasure) -> Self {
        let ends = m.space == Space::PositiveHalfLine;
        MeasureJson {
            space: m.space,
            atoms: atoms_to_json(m.space, &m.atoms),
            mass_at_zero: ends.then_some(m.mass_at_zero),
            mass_at_infinity: ends.then_some(m.mass_at_infinity),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_measures() {
        let m: AtomicMeasure =
            serde_json::from_str(r#"{"space":"positive","atoms":[{"t":2,"w":0.5},{"t":1,"w":0.5}]}"#).unwrap();
        assert_eq!(m.atoms()[0], Atom::new(1.0, 0.5));
        let c: AtomicMeasure = serde_json::from_str(r#"{"space":"circle","atoms":[{"theta":0.5,"w":1}]}"#).unwrap();
        assert_eq!(c.space(), Space::Circle);
        let back: AtomicMeasure = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_bad_measures() {
        for s in [
            r#"{"space":"positive","atoms":[{"t":-1,"w":1}]}"#,
            r#"{"space":"positive","atoms":[{"theta":1,"w":1}]}"#,
            r#"{"space":"positive","atoms":[{"t":1,"w":0.5}]}"#,
            r#"{"space":"positive","atoms":[{"t":1,"w":1}],"massAtZero":0.1}"#,
            r#"{"space":"line","atoms":[{"t":1,"w":1}]}"#,
            r#"{"space":"positive","atoms":[{"t":1,"w":1}],"extra":1}"#,
        ] {
            assert!(serde_json::from_str::<AtomicMeasure>(s).is_err(), "{s}");
        }
    }

    #[test]
    fn finite_measure_round_trip() {
        let s = r#"{"space":"positive","atoms":[{"t":0.5,"w":0.3}],"massAtZero":0.0,"massAtInfinity":0.2}"#;
        let f: FiniteMeasure = serde_json::from_str(s).unwrap();
        assert_eq!(f.mass_at_infinity(), 0.2);
        assert_eq!(serde_json::to_string(&f).unwrap(), s);
        let z: FiniteMeasure = serde_json::from_str(r#"{"space":"circle"}"#).unwrap();
        assert!(z.is_zero());
        assert!(serde_json::from_str::<FiniteMeasure>(r#"{"space":"circle","massAtZero":1}"#).is_err());
    }
}
