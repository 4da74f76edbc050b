use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use twistflow::analysis::{potential_curve, series_check};
use twistflow::check::{self, CheckConfig};
use twistflow::fmt::sig17;
use twistflow::geodesics::TrajectorySummary;
use twistflow::sections::normalize as normalize_section;
use twistflow::*;

use crate::{Analyze, CheckArgs, Format, GeodesicArgs, NormalizeArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
    Io(io::Error),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(Error::Convergence(_)) => 1,
            CliError::Domain(_) => 3,
            CliError::Io(_) | CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Internal(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(format!("serialization failed: {e}"))
    }
}

type CliResult = std::result::Result<(), CliError>;

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn complex(v: &[f64]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// Rejects non-finite flag values, naming the flag.
fn check_finite(name: &str, values: &[f64]) -> CliResult {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be finite")))
    }
}

pub fn normalize(args: &NormalizeArgs) -> CliResult {
    check_finite("beta1", &args.beta1)?;
    check_finite("beta2", &args.beta2)?;
    check_finite("beta3", &args.beta3)?;
    let s = QuadraticSection::new(complex(&args.beta1), complex(&args.beta2), complex(&args.beta3))?;
    let cert = normalize_section(&s)?;
    log::info!("normalized {s:?} to c = {}", cert.result.c);
    write_json(args.output.as_deref(), &cert)
}

#[derive(Serialize)]
struct GeodesicReport<'a> {
    summary: TrajectorySummary,
    oscillation: Option<OscillationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<&'a [GeodesicState]>,
}

fn initial_state(args: &GeodesicArgs) -> std::result::Result<GeodesicState, CliError> {
    if let (Some(xi), Some(xidot)) = (&args.xi, &args.xidot) {
        check_finite("xi", xi)?;
        check_finite("xidot", xidot)?;
        return Ok(GeodesicState::new(0.0, complex(xi), complex(xidot))?);
    }
    if let Some(p) = &args.polar {
        check_finite("polar", p)?;
        let polar = PolarState {
            r: p[0],
            theta: p[1],
            rdot: p[2],
            thetadot: p[3],
        };
        return Ok(GeodesicState::from_polar(0.0, &polar)?);
    }
    if let Some(v) = &args.from_integrals {
        check_finite("from-integrals", v)?;
        return Ok(GeodesicState::from_integrals(v[0], v[1], v[2], v[3], !args.inward)?);
    }
    Err(CliError::Usage(
        "one of --xi/--xidot, --polar, --from-integrals is required".into(),
    ))
}

pub fn geodesic(args: &GeodesicArgs) -> CliResult {
    check_finite("c", &[args.c])?;
    check_finite("t-max", &[args.t_max])?;
    check_finite("tol", &[args.tol])?;
    let sphere = StandardSphere::new(args.c)?;
    let initial = initial_state(args)?;
    let traj = integrate(&initial, &sphere, args.t_max, args.tol)?;

    let oscillation = if traj.integrals0.i2 != 0.0 {
        match oscillation_check(&traj) {
            Ok(r) => Some(r),
            Err(e) => {
                log::info!("no oscillation report: {e}");
                None
            }
        }
    } else {
        None
    };
    let summary = traj.summary();
    log::info!("{:?} after {} samples", summary.termination, summary.samples);

    match args.format {
        Format::Csv => {
            let mut w = sink(args.output.as_deref())?;
            traj.write_csv(&mut w)?;
            w.flush()?;
            let report = GeodesicReport {
                summary,
                oscillation,
                samples: None,
            };
            match &args.summary {
                Some(p) => write_json(Some(p), &report)?,
                None => eprintln!("{}", serde_json::to_string(&report)?),
            }
            Ok(())
        }
        Format::Json => {
            let report = GeodesicReport {
                summary,
                oscillation,
                samples: Some(&traj.samples),
            };
            write_json(args.output.as_deref(), &report)
        }
    }
}

pub fn analyze(what: &Analyze) -> CliResult {
    match what {
        Analyze::Blowup { i1, r_start, output } => {
            check_finite("I1", &[*i1])?;
            check_finite("r-start", &[*r_start])?;
            let t = blowup_time(*i1, *r_start)?;
            let mut w = sink(output.as_deref())?;
            writeln!(w, "{}", sig17(t))?;
            w.flush()?;
            log::debug!("blow-up time for I1 = {i1} from R = {r_start}: {t}");
            Ok(())
        }
        Analyze::Potential {
            n,
            r_min,
            r_max,
            output,
        } => {
            let curve = potential_curve(*n, *r_min, *r_max)?;
            let mut w = sink(output.as_deref())?;
            writeln!(w, "R,U_eff")?;
            for (r, u) in curve {
                writeln!(w, "{},{}", sig17(r), sig17(u))?;
            }
            w.flush()?;
            Ok(())
        }
        Analyze::TurningPoints { i1, i2, output } => {
            check_finite("I1", &[*i1])?;
            check_finite("I2", &[*i2])?;
            let tp = turning_points(*i1, *i2)?;
            write_json(output.as_deref(), &tp)
        }
        Analyze::SeriesCheck { radii, output } => {
            let radii = radii
                .clone()
                .unwrap_or_else(|| (1..=20).map(|k| 0.95 * k as f64 / 20.0).collect());
            let rows = series_check(&radii)?;
            let mut w = sink(output.as_deref())?;
            writeln!(w, "R,series,quadrature,diff")?;
            for row in rows {
                writeln!(
                    w,
                    "{},{},{},{}",
                    sig17(row.r),
                    sig17(row.series),
                    sig17(row.quadrature),
                    sig17(row.diff)
                )?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

pub fn check(args: &CheckArgs) -> CliResult {
    let config = CheckConfig {
        samples: args.samples,
        trajectories: args.trajectories,
        tol: args.tol,
        seed: args.seed,
        i2_offset: args.perturb_i2,
    };
    let report = check::run(&config)?;
    write_json(args.output.as_deref(), &report)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Internal(format!("checks failed: {}", failed.join(", "))))
    }
}
