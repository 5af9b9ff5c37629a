//! Infinitely divisible laws for `⊠` (half-line and circle) and for `⊛`,
//! and the correspondence between their parameters.
//!
//! Half-line laws are parameterized by `(γ, σ)` with
//! `S(ζ) = exp v(ζ)` and `v(x/(1−x)) = γ − σ({∞})x + ∫_{[0,∞)} (1+tx)/(x−t) dσ(t)`.
//! Throughout, `ζ` denotes the S-transform argument and `x = ζ/(1+ζ)` the
//! kernel argument.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freeconv::MomentVector;
use crate::measure::{wrap_angle, Atom, FiniteMeasure, GridSpec, Space};
use crate::series::TruncatedSeries;
use crate::transforms::psi_from_sigma_series;

/// Parameters `(γ, σ)` of a `⊠`-infinitely divisible law on the half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FreeIdJson", into = "FreeIdJson")]
pub struct FreeIdPosParams {
    pub gamma: f64,
    pub sigma: FiniteMeasure,
}

/// Parameters of a `⊠`-infinitely divisible law on the circle. `γ` is kept
/// in `[−π, π)`; `haar` marks the Haar measure, which has no Σ-transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FreeIdJson", into = "FreeIdJson")]
pub struct FreeIdCircParams {
    pub gamma: f64,
    pub sigma: FiniteMeasure,
    pub haar: bool,
}

/// Parameters `(λ, ρ)` of a `⊛`-infinitely divisible law on the half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassicalIdJson", into = "ClassicalIdJson")]
pub struct ClassicalIdParams {
    pub lambda: f64,
    pub rho: FiniteMeasure,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FreeIdJson {
    #[serde(default)]
    gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<FiniteMeasure>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    haar: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalIdJson {
    lambda: f64,
    rho: FiniteMeasure,
}

impl TryFrom<FreeIdJson> for FreeIdPosParams {
    type Error = Error;
    fn try_from(j: FreeIdJson) -> Result<Self> {
        if j.haar {
            return Err(Error::Params("the Haar measure lives on the circle".into()));
        }
        let sigma = j.sigma.ok_or_else(|| Error::Params("missing sigma".into()))?;
        Self::new(j.gamma, sigma)
    }
}

impl From<FreeIdPosParams> for FreeIdJson {
    fn from(p: FreeIdPosParams) -> Self {
        FreeIdJson {
            gamma: p.gamma,
            sigma: Some(p.sigma),
            haar: false,
        }
    }
}

impl TryFrom<FreeIdJson> for FreeIdCircParams {
    type Error = Error;
    fn try_from(j: FreeIdJson) -> Result<Self> {
        if j.haar {
            return Ok(Self::haar());
        }
        let sigma = j.sigma.ok_or_else(|| Error::Params("missing sigma".into()))?;
        Self::new(j.gamma, sigma)
    }
}

impl From<FreeIdCircParams> for FreeIdJson {
    fn from(p: FreeIdCircParams) -> Self {
        if p.haar {
            return FreeIdJson { gamma: 0.0, sigma: None, haar: true };
        }
        FreeIdJson {
            gamma: p.gamma,
            sigma: Some(p.sigma),
            haar: false,
        }
    }
}

impl TryFrom<ClassicalIdJson> for ClassicalIdParams {
    type Error = Error;
    fn try_from(j: ClassicalIdJson) -> Result<Self> {
        Self::new(j.lambda, j.rho)
    }
}

impl From<ClassicalIdParams> for ClassicalIdJson {
    fn from(p: ClassicalIdParams) -> Self {
        ClassicalIdJson { lambda: p.lambda, rho: p.rho }
    }
}

/// Free parameters read from JSON, on whichever space `σ` lives (Haar: circle).
#[derive(Debug, Clone, PartialEq)]
pub enum FreeIdParams {
    Positive(FreeIdPosParams),
    Circle(FreeIdCircParams),
}

impl FreeIdParams {
    pub fn from_json(s: &str) -> Result<Self> {
        let j: FreeIdJson = serde_json::from_str(s)?;
        let circle = j.haar || j.sigma.as_ref().is_some_and(|m| m.space() == Space::Circle);
        Ok(if circle {
            FreeIdParams::Circle(j.try_into()?)
        } else {
            FreeIdParams::Positive(j.try_into()?)
        })
    }
}

impl FreeIdPosParams {
    pub fn new(gamma: f64, sigma: FiniteMeasure) -> Result<Self> {
        Space::PositiveHalfLine.expect(sigma.space())?;
        if !gamma.is_finite() {
            return Err(Error::Params(format!("gamma {gamma} is not finite")));
        }
        Ok(FreeIdPosParams { gamma, sigma })
    }

    /// Parameters add under `⊠` of the corresponding laws.
    pub fn combine(&self, other: &Self) -> Result<Self> {
        Self::new(self.gamma + other.gamma, self.sigma.add(&other.sigma)?)
    }
}

impl FreeIdCircParams {
    pub fn new(gamma: f64, sigma: FiniteMeasure) -> Result<Self> {
        Space::Circle.expect(sigma.space())?;
        if !gamma.is_finite() {
            return Err(Error::Params(format!("gamma {gamma} is not finite")));
        }
        Ok(FreeIdCircParams {
            gamma: wrap_angle(gamma),
            sigma,
            haar: false,
        })
    }

    pub fn haar() -> Self {
        FreeIdCircParams {
            gamma: 0.0,
            sigma: FiniteMeasure::zero(Space::Circle),
            haar: true,
        }
    }
}

impl ClassicalIdParams {
    pub fn new(lambda: f64, rho: FiniteMeasure) -> Result<Self> {
        Space::PositiveHalfLine.expect(rho.space())?;
        if rho.mass_at_zero() > 0.0 || rho.mass_at_infinity() > 0.0 {
            return Err(Error::Params("rho lives on (0, inf)".into()));
        }
        if !lambda.is_finite() {
            return Err(Error::Params(format!("lambda {lambda} is not finite")));
        }
        Ok(ClassicalIdParams { lambda, rho })
    }

    pub fn combine(&self, other: &Self) -> Result<Self> {
        Self::new(self.lambda + other.lambda, self.rho.add(&other.rho)?)
    }
}

/// `v` evaluated through its kernel argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VValue {
    /// kernel argument `x`
    pub x: f64,
    /// S-transform argument `w = x/(1−x)`
    pub w: f64,
    pub value: f64,
}

fn v_kernel(p: &FreeIdPosParams, x: f64) -> f64 {
    let mut v = p.gamma - p.sigma.mass_at_infinity() * x;
    if p.sigma.mass_at_zero() > 0.0 {
        v += p.sigma.mass_at_zero() / x;
    }
    for a in p.sigma.atoms() {
        v += a.weight * (1.0 + a.pos * x) / (x - a.pos);
    }
    v
}

/// `v_{γ,σ}` at `w = x/(1−x)` for a kernel argument `x ∈ (−1, 0)`.
pub fn v_eval(p: &FreeIdPosParams, x: f64) -> Result<VValue> {
    if !(x > -1.0 && x < 0.0) {
        return Err(Error::Domain(format!("kernel argument {x} outside (-1, 0)")));
    }
    Ok(VValue {
        x,
        w: x / (1.0 - x),
        value: v_kernel(p, x),
    })
}

/// `v_{γ,σ}(ζ)` keyed by the S-transform argument `ζ ∈ (−1/2, 0)` and beyond:
/// any `ζ ∈ (−1, 0)` maps to a kernel argument in `(−∞, 0)`.
pub fn v_at(p: &FreeIdPosParams, zeta: f64) -> Result<f64> {
    if !(zeta > -1.0 && zeta < 0.0) {
        return Err(Error::Domain(format!("S argument {zeta} outside (-1, 0)")));
    }
    Ok(v_kernel(p, zeta / (1.0 + zeta)))
}

/// `S(ζ) = exp v_{γ,σ}(ζ)` on a grid of S-arguments.
pub fn idlaw_s_pos(p: &FreeIdPosParams, grid: &GridSpec) -> Result<Vec<f64>> {
    grid.real_points()?
        .iter()
        .map(|&z| v_at(p, z).map(f64::exp))
        .collect()
}

/// `u_{γ,σ}(z) = −iγ + ∫ (1+tz)/(1−tz) dσ(t)` as a series.
pub fn u_series(p: &FreeIdCircParams, order: usize) -> Result<TruncatedSeries> {
    if p.haar {
        return Err(Error::Params("the Haar measure has no Sigma-transform".into()));
    }
    let mut c = Vec::with_capacity(order + 1);
    c.push(Complex64::new(p.sigma.total_mass(), -p.gamma));
    for j in 1..=order {
        c.push(2.0 * p.sigma.circle_moment(j as i32));
    }
    Ok(TruncatedSeries::new(c))
}

/// Moments of the circle law with `Σ = exp u_{γ,σ}`.
pub fn idlaw_moments_circ(p: &FreeIdCircParams, order: usize) -> Result<MomentVector> {
    if p.haar {
        return Err(Error::Params("the Haar measure has no Sigma-transform".into()));
    }
    if order == 0 {
        return Ok(MomentVector { space: Space::Circle, moments: Vec::new() });
    }
    if p.sigma.is_zero() {
        return Ok(MomentVector {
            space: Space::Circle,
            moments: (1..=order)
                .map(|k| Complex64::from_polar(1.0, k as f64 * p.gamma))
                .collect(),
        });
    }
    let sigma = u_series(p, order - 1)?.exp();
    let psi = psi_from_sigma_series(&sigma)?;
    Ok(MomentVector {
        space: Space::Circle,
        moments: psi.coeffs()[1..=order].to_vec(),
    })
}

/// `(e^{−ia} − 1 + ia)/a²`, with a series near 0.
fn f_over_a2(a: f64) -> Complex64 {
    if a.abs() < 0.5 {
        // Σ_{k≥2} (−i)^k a^{k−2}/k!
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(-0.5, 0.0);
        for k in 2..24 {
            sum += term;
            term *= Complex64::new(0.0, -a) / (k as f64 + 1.0);
        }
        sum
    } else {
        (Complex64::from_polar(1.0, -a) - 1.0 + Complex64::new(0.0, a)) / (a * a)
    }
}

/// The Lévy–Khintchine integrand for an atom at `t`:
/// `(t^{−is} − 1 + is·L/(L²+1))·(L²+1)/L²` with `L = log t`, equal to `−s²/2` at `t = 1`.
fn classical_kernel(s: f64, t: f64) -> Complex64 {
    let l = t.ln();
    let a = s * l;
    s * s * f_over_a2(a) * (1.0 + l * l) - Complex64::new(0.0, s * l)
}

/// `Φ(s)` of the `⊛`-infinitely divisible law with parameters `(λ, ρ)`.
pub fn classical_phi_idlaw(p: &ClassicalIdParams, s: f64) -> Complex64 {
    let mut e = Complex64::new(0.0, p.lambda * s);
    for a in p.rho.atoms() {
        e += a.weight * classical_kernel(s, a.pos);
    }
    e.exp()
}

/// `expm1(L)/L`, equal to 1 at 0.
fn expm1_over(l: f64) -> f64 {
    if l == 0.0 {
        1.0
    } else {
        l.exp_m1() / l
    }
}

/// Density `dσ/dρ = ((L²+1)/L²)·(t−1)²/(t²+1)`, with value `1/2` at `t = 1`.
pub fn classical_density(t: f64) -> f64 {
    let l = t.ln();
    let q = expm1_over(l);
    (1.0 + l * l) * q * q / (t * t + 1.0)
}

/// The drift integrand `(tanh L − L/(1+L²))·(1+L²)/L²`, equal to 0 at `t = 1`.
pub fn classical_drift(t: f64) -> f64 {
    let l = t.ln();
    if l.abs() < 1e-3 {
        let l2 = l * l;
        return l * (2.0 / 3.0 - l2 / 5.0);
    }
    (l.tanh() - l / (1.0 + l * l)) * (1.0 + l * l) / (l * l)
}

fn check_endpoint_free(sigma: &FiniteMeasure) -> Result<()> {
    if sigma.mass_at_zero() > 0.0 || sigma.mass_at_infinity() > 0.0 {
        return Err(Error::Params("sigma charges 0 or infinity".into()));
    }
    Ok(())
}

/// Maps `(γ, σ)` with `σ({0}) = σ({∞}) = 0` to the `⊛` parameters `(λ, ρ)`
/// of the classical limit of the same array:
/// `dσ = ((log²t+1)/log²t)·((t−1)²/(t²+1)) dρ` and
/// `γ + λ = ∫ ((t²−1)/(t²+1) − log t/(log²t+1))·(log²t+1)/log²t dρ(t)`.
pub fn classical_params(p: &FreeIdPosParams) -> Result<ClassicalIdParams> {
    check_endpoint_free(&p.sigma)?;
    let atoms: Vec<Atom> = p
        .sigma
        .atoms()
        .iter()
        .map(|a| Atom::new(a.pos, a.weight / classical_density(a.pos)))
        .collect();
    let shift: f64 = atoms.iter().map(|a| a.weight * classical_drift(a.pos)).sum();
    ClassicalIdParams::new(
        shift - p.gamma,
        FiniteMeasure::from_parts(Space::PositiveHalfLine, atoms, 0.0, 0.0),
    )
}

/// Inverse of [`classical_params`].
pub fn free_params_from_classical(p: &ClassicalIdParams) -> Result<FreeIdPosParams> {
    let shift: f64 = p.rho.atoms().iter().map(|a| a.weight * classical_drift(a.pos)).sum();
    let atoms: Vec<Atom> = p
        .rho
        .atoms()
        .iter()
        .map(|a| Atom::new(a.pos, a.weight * classical_density(a.pos)))
        .collect();
    FreeIdPosParams::new(
        shift - p.lambda,
        FiniteMeasure::from_parts(Space::PositiveHalfLine, atoms, 0.0, 0.0),
    )
}
