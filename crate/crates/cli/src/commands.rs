use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use freemult::arrays::{diagnose as run_diagnose, ArraySpec, Diagnosis, Tolerances};
use freemult::freeconv::{boxtimes_moments, nc_moment_oracle, MAX_NC_ORDER};
use freemult::infdiv::{classical_params, idlaw_moments_circ, idlaw_s_pos, FreeIdParams};
use freemult::mc::{rmt_oracle_circ, rmt_oracle_pos, McConfig, McEstimate};
use freemult::measure::{classical_multconv, GridSpec};
use freemult::verify::{
    verify_classical, default_s_panel, verify_circ, verify_haar, verify_pos, VerificationReport,
};
use freemult::{AtomicMeasure, Space};

use crate::{ArrayArgs, Check, Failure, Io};

const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn read_measure(path: &Path) -> Result<AtomicMeasure, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn single_input(io: &Io) -> Result<&PathBuf, Failure> {
    match io.inputs.as_slice() {
        [p] => Ok(p),
        other => Err(Failure::Validation(format!("expected one input file, got {}", other.len()))),
    }
}

fn two_measures(io: &Io) -> Result<(AtomicMeasure, AtomicMeasure), Failure> {
    match io.inputs.as_slice() {
        [a, b] => {
            let (mu, nu) = (read_measure(a)?, read_measure(b)?);
            if mu.space() != nu.space() {
                return Err(Failure::Validation(format!(
                    "space mismatch: {} and {}",
                    mu.space(),
                    nu.space()
                )));
            }
            Ok((mu, nu))
        }
        other => Err(Failure::Validation(format!("expected two input files, got {}", other.len()))),
    }
}

fn is_csv(io: &Io) -> bool {
    io.output
        .as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn emit(io: &Io, text: &str) -> Result<(), Failure> {
    match &io.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Numerical(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(io: &Io, command: &str, body: T) -> Result<(), Failure> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        body,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| Failure::Numerical(e.to_string()))?;
    text.push('\n');
    emit(io, &text)
}

fn check_order(order: usize) -> Result<(), Failure> {
    if order == 0 {
        return Err(Failure::Validation("--order must be at least 1".into()));
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ConvolveReport {
    space: Space,
    order: usize,
    boxtimes: Vec<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<Vec<Complex64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_delta: Option<f64>,
    classical: AtomicMeasure,
}

pub fn convolve(io: &Io, order: usize) -> Result<bool, Failure> {
    check_order(order)?;
    let (mu, nu) = two_measures(io)?;
    let series = boxtimes_moments(&mu, &nu, order)?;
    let oracle = if order <= MAX_NC_ORDER {
        Some(nc_moment_oracle(&mu, &nu, order)?)
    } else {
        None
    };
    let report = ConvolveReport {
        space: mu.space(),
        order,
        max_delta: oracle.as_ref().map(|o| o.max_abs_diff(&series)),
        oracle: oracle.map(|o| o.moments),
        boxtimes: series.moments,
        classical: classical_multconv(&mu, &nu)?,
    };
    emit_json(io, "convolve", report)?;
    Ok(true)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase", tag = "space")]
enum IdlawReport {
    #[serde(rename = "positive")]
    Positive {
        /// S-transform arguments
        points: Vec<f64>,
        s: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        classical: Option<freemult::infdiv::ClassicalIdParams>,
    },
    #[serde(rename = "circle")]
    Circle { haar: bool, moments: Vec<Complex64> },
}

pub fn idlaw(io: &Io, grid: usize, order: usize) -> Result<bool, Failure> {
    check_order(order)?;
    let params = FreeIdParams::from_json(&read(single_input(io)?)?)?;
    let report = match params {
        FreeIdParams::Positive(p) => {
            let g = GridSpec::with_points(grid)?;
            let s = idlaw_s_pos(&p, &g)?;
            let endpoint_free = p.sigma.mass_at_zero() == 0.0 && p.sigma.mass_at_infinity() == 0.0;
            IdlawReport::Positive {
                points: g.real_points()?.to_vec(),
                s,
                classical: if endpoint_free { Some(classical_params(&p)?) } else { None },
            }
        }
        FreeIdParams::Circle(p) if p.haar => IdlawReport::Circle {
            haar: true,
            moments: vec![Complex64::new(0.0, 0.0); order],
        },
        FreeIdParams::Circle(p) => IdlawReport::Circle {
            haar: false,
            moments: idlaw_moments_circ(&p, order)?.moments,
        },
    };
    emit_json(io, "idlaw", report)?;
    Ok(true)
}

/// Parses "1e2,1e3,1e4" into row indices.
pub fn parse_rows(s: &str) -> Result<Vec<u64>, Failure> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let x: f64 = t
                .parse()
                .map_err(|_| Failure::Validation(format!("row index {t:?} is not a number")))?;
            if !(x >= 1.0 && x.fract() == 0.0 && x <= u64::MAX as f64) {
                return Err(Failure::Validation(format!("row index {t:?} is not a positive integer")));
            }
            Ok(x as u64)
        })
        .collect()
}

fn load_array(io: &Io, args: &ArrayArgs) -> Result<(ArraySpec, Vec<u64>), Failure> {
    let mut spec = ArraySpec::from_json(&read(single_input(io)?)?)?;
    if let Some(tau) = args.tau {
        spec.tau = tau;
        spec.validate()?;
    }
    let rows = match &args.rows {
        Some(r) => parse_rows(r)?,
        None => spec.schedule(),
    };
    if let Some(tol) = args.tol {
        if !(tol >= 0.0) {
            return Err(Failure::Validation(format!("--tol {tol} must be non-negative")));
        }
    }
    Ok((spec, rows))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn diagnosis_csv(d: &Diagnosis) -> String {
    let mut out = String::from(
        "n,k,gammaN,sigmaMass,haarStat,firstMomentAbs,infinitesimalityStat,sigmaStep,gammaStep\n",
    );
    for r in &d.rows {
        out.push_str(&format!(
            "{},{},{:e},{:e},{},{},{:e},{},{}\n",
            r.n,
            r.k,
            r.gamma_n,
            r.sigma_n.total_mass(),
            opt(r.haar_stat),
            opt(r.first_moment_abs),
            r.infinitesimality_stat,
            opt(r.sigma_step),
            opt(r.gamma_step)
        ));
    }
    out
}

pub fn diagnose(io: &Io, args: &ArrayArgs) -> Result<bool, Failure> {
    let (spec, rows) = load_array(io, args)?;
    let mut tol = Tolerances::default();
    if let Some(t) = args.tol {
        tol.cauchy = t;
    }
    let d = run_diagnose(&spec, &rows, &tol)?;
    if is_csv(io) {
        emit(io, &diagnosis_csv(&d))?;
    } else {
        emit_json(io, "diagnose", &d)?;
    }
    Ok(true)
}

pub fn verify(io: &Io, args: &ArrayArgs, check: Check, grid: usize, order: usize) -> Result<bool, Failure> {
    check_order(order)?;
    let (spec, rows) = load_array(io, args)?;
    let check = match (check, spec.space) {
        (Check::Auto, Space::PositiveHalfLine) => Check::Pos,
        (Check::Auto, Space::Circle) => Check::Circ,
        (c, _) => c,
    };
    let report: VerificationReport = match check {
        Check::Pos => verify_pos(&spec, &rows, &GridSpec::with_points(grid)?, args.tol.unwrap_or(1e-2))?,
        Check::Circ => verify_circ(&spec, &rows, order, args.tol.unwrap_or(1e-2))?,
        Check::Haar => {
            let mut tol = Tolerances::default();
            if let Some(t) = args.tol {
                tol.cauchy = t;
            }
            verify_haar(&spec, &rows, &tol)?
        }
        Check::Classical => verify_classical(&spec, &rows, &default_s_panel(), args.tol.unwrap_or(5e-2))?,
        Check::Auto => unreachable!("resolved above"),
    };
    if is_csv(io) {
        emit(io, &report.to_csv()?)?;
    } else {
        emit_json(io, "verify", &report)?;
    }
    Ok(report.pass)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct McReport {
    estimate: McEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted: Option<Vec<Complex64>>,
}

pub fn mc(io: &Io, cfg: McConfig) -> Result<bool, Failure> {
    let (mu, nu) = two_measures(io)?;
    let estimate = match mu.space() {
        Space::PositiveHalfLine => rmt_oracle_pos(&mu, &nu, &cfg)?,
        Space::Circle => rmt_oracle_circ(&mu, &nu, &cfg)?,
    };
    // a factor without first moment has no Σ-transform; the estimate still stands
    let predicted = boxtimes_moments(&mu, &nu, cfg.order).ok().map(|m| m.moments);
    emit_json(io, "mc", McReport { estimate, predicted })?;
    Ok(true)
}
