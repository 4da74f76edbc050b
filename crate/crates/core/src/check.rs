//! Cross-module invariant suite.
//!
//! Each check samples inputs from a seeded generator and reports its worst
//! observed error next to the threshold it must stay under. The same seed
//! always produces the same report.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{appell_f1_series, blowup_time, radial_quadrature, u_eff, PolarState};
use crate::error::Result;
use crate::geodesics::{first_integrals, integrate, FirstIntegrals, GeodesicState};
use crate::line_space::{metric, symplectic_form, ComplexPair, Rotation, TangentVector, Translation};
use crate::sections::{normalize, refit_transformed, QuadraticSection, StandardSphere};

pub const ISOMETRY_TOL: f64 = 1e-10;
pub const NORMALIZATION_RESIDUAL_TOL: f64 = 1e-9;
pub const NORMALIZATION_INVARIANT_TOL: f64 = 1e-10;
pub const CONSERVATION_TOL: f64 = 1e-8;
pub const SERIES_QUADRATURE_TOL: f64 = 1e-10;
pub const BLOWUP_RELATIVE_TOL: f64 = 1e-4;
pub const ENERGY_IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Random samples per pointwise check.
    pub samples: usize,
    /// Number of geodesics integrated for the flow checks.
    pub trajectories: usize,
    /// Integration tolerance.
    pub tol: f64,
    pub seed: u64,
    /// Testing hook: constant added to every `I₂` the suite evaluates.
    pub i2_offset: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            trajectories: 10,
            tol: 1e-10,
            seed: 2006,
            i2_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub threshold: f64,
    /// `threshold − worst`; negative on failure.
    pub margin: f64,
    pub cases: usize,
}

impl CheckResult {
    fn new(name: &str, worst: f64, threshold: f64, cases: usize) -> Self {
        let passed = worst.is_finite() && worst < threshold;
        Self {
            name: name.to_owned(),
            passed,
            worst,
            threshold,
            margin: threshold - worst,
            cases,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub config: CheckConfig,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

pub(crate) fn random_complex<R: Rng>(rng: &mut R, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub(crate) fn random_rotation<R: Rng>(rng: &mut R) -> Rotation {
    loop {
        let a = random_complex(rng, 1.0);
        let b = random_complex(rng, 1.0);
        if let Ok(r) = Rotation::new(a, b) {
            return r;
        }
    }
}

/// Worst relative change of `(G, Ω)` under random translations and
/// rotations pushed forward through their Jacobians.
pub fn isometry_errors<R: Rng>(rng: &mut R, samples: usize) -> Result<(f64, f64)> {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
    let (mut worst_g, mut worst_w) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < samples {
        let base = ComplexPair::new(random_complex(rng, 2.0), random_complex(rng, 2.0))?;
        let u = TangentVector::new(base, random_complex(rng, 1.0), random_complex(rng, 1.0))?;
        let v = TangentVector::new(base, random_complex(rng, 1.0), random_complex(rng, 1.0))?;
        let (g, w) = (metric(&u, &v)?, symplectic_form(&u, &v)?);
        let t = Translation::new(random_complex(rng, 2.0), rng.gen_range(-2.0..2.0))?;
        let r = random_rotation(rng);
        let (tu, tv) = (t.push_forward(&u)?, t.push_forward(&v)?);
        // skip rotations that throw the base point far out of the chart
        let (Ok(ru), Ok(rv)) = (r.push_forward(&u), r.push_forward(&v)) else {
            continue;
        };
        if ru.base.xi.norm() > 1e3 {
            continue;
        }
        worst_g = worst_g.max(rel(g, metric(&tu, &tv)?)).max(rel(g, metric(&ru, &rv)?));
        worst_w = worst_w
            .max(rel(w, symplectic_form(&tu, &tv)?))
            .max(rel(w, symplectic_form(&ru, &rv)?));
        done += 1;
    }
    Ok((worst_g, worst_w))
}

/// Worst `(residual, invariant error)` over random sections with
/// `|Re βᵢ|, |Im βᵢ| ≤ 10`, refitting each transformed section pointwise.
pub fn normalization_errors<R: Rng>(rng: &mut R, samples: usize) -> Result<(f64, f64)> {
    let (mut worst_res, mut worst_inv) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let s = QuadraticSection::new(
            random_complex(rng, 10.0),
            random_complex(rng, 10.0),
            random_complex(rng, 10.0),
        )?;
        let cert = normalize(&s)?;
        let (fit, surplus) = refit_transformed(&s, &cert)?;
        let residual = fit
            .beta1
            .norm()
            .max(fit.beta3.norm())
            .max(fit.beta2.re.abs())
            .max((fit.beta2.im - cert.result.c).abs())
            .max(surplus);
        let invariant = (s.beta2.im.powi(2) + (s.beta1 + s.beta3.conj()).norm_sqr()).sqrt();
        worst_res = worst_res.max(residual);
        worst_inv = worst_inv.max((cert.result.c - invariant).abs());
    }
    Ok((worst_res, worst_inv))
}

/// Random upper-hemisphere initial data with `0.1 ≤ R ≤ 0.8`.
pub fn random_initial_state<R: Rng>(rng: &mut R) -> GeodesicState {
    let p = PolarState {
        r: rng.gen_range(0.1..0.8),
        theta: rng.gen_range(0.0..TAU),
        rdot: rng.gen_range(-1.0..1.0),
        thetadot: rng.gen_range(-3.0..3.0),
    };
    GeodesicState::from_polar(0.0, &p).expect("finite polar data")
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FlowErrors {
    pub drift_i1: f64,
    pub drift_i2: f64,
    pub energy_identity: f64,
    pub samples: usize,
}

fn integrals_with_offset(s: &GeodesicState, offset: f64) -> FirstIntegrals {
    let mut fi = first_integrals(s);
    fi.i2 += offset;
    fi
}

/// Integrates `count` random geodesics on the sphere `c = 1` for `t = 10` and
/// measures drift of the first integrals and the energy identity residual.
pub fn flow_errors<R: Rng>(rng: &mut R, count: usize, tol: f64, i2_offset: f64) -> Result<FlowErrors> {
    let sphere = StandardSphere::new(1.0)?;
    let mut out = FlowErrors::default();
    for _ in 0..count {
        let initial = random_initial_state(rng);
        let traj = integrate(&initial, &sphere, 10.0, tol)?;
        let fi0 = integrals_with_offset(&initial, i2_offset);
        for s in &traj.samples {
            let fi = integrals_with_offset(s, i2_offset);
            out.drift_i1 = out.drift_i1.max((fi.i1 - fi0.i1).abs() / fi0.i1.abs().max(1e-30));
            out.drift_i2 = out.drift_i2.max((fi.i2 - fi0.i2).abs() / fi0.i2.abs().max(1e-30));
            let p = s.polar();
            if p.r >= 1e-3 && p.r <= 1.0 - 1e-3 {
                let f = (1.0 - p.r * p.r) / (1.0 + p.r * p.r).powi(3);
                let residual = fi.i1 - u_eff(p.r)? * fi.i2 * fi.i2 - f * p.rdot * p.rdot;
                out.energy_identity = out.energy_identity.max(residual.abs());
            }
        }
        out.samples += traj.samples.len();
    }
    Ok(out)
}

/// Worst series-vs-quadrature gap over 20 radii in `(0, 0.95]`.
pub fn series_quadrature_gap() -> Result<f64> {
    (1..=20).try_fold(0.0f64, |worst, k| {
        let r = 0.95 * k as f64 / 20.0;
        Ok(worst.max((appell_f1_series(r)? - radial_quadrature(r)?).abs()))
    })
}

/// Worst relative gap between integrated equator-hit time and
/// [`blowup_time`] for radial launches from the pole.
pub fn blowup_gap(i1_values: &[f64], tol: f64) -> Result<f64> {
    let sphere = StandardSphere::new(1.0)?;
    i1_values.iter().try_fold(0.0f64, |worst, &i1| {
        let initial = GeodesicState::new(0.0, Complex64::new(0.0, 0.0), Complex64::new(i1.sqrt(), 0.0))?;
        let traj = integrate(&initial, &sphere, 10.0, tol)?;
        let predicted = blowup_time(i1, 0.0)?;
        let gap = match traj.t_hit() {
            Some(t) => (t - predicted).abs() / predicted,
            None => f64::INFINITY,
        };
        Ok(worst.max(gap))
    })
}

/// Runs every check and collects the report.
pub fn run(config: &CheckConfig) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = Vec::new();

    let (g, w) = isometry_errors(&mut rng, config.samples)?;
    checks.push(CheckResult::new("metric_invariance", g, ISOMETRY_TOL, config.samples));
    checks.push(CheckResult::new(
        "symplectic_invariance",
        w,
        ISOMETRY_TOL,
        config.samples,
    ));

    let (res, inv) = normalization_errors(&mut rng, config.samples)?;
    checks.push(CheckResult::new(
        "normalization_residual",
        res,
        NORMALIZATION_RESIDUAL_TOL,
        config.samples,
    ));
    checks.push(CheckResult::new(
        "normalization_invariant",
        inv,
        NORMALIZATION_INVARIANT_TOL,
        config.samples,
    ));

    let flow = flow_errors(&mut rng, config.trajectories, config.tol, config.i2_offset)?;
    checks.push(CheckResult::new(
        "conservation_i1",
        flow.drift_i1,
        CONSERVATION_TOL,
        config.trajectories,
    ));
    checks.push(CheckResult::new(
        "conservation_i2",
        flow.drift_i2,
        CONSERVATION_TOL,
        config.trajectories,
    ));
    checks.push(CheckResult::new(
        "energy_identity",
        flow.energy_identity,
        ENERGY_IDENTITY_TOL,
        flow.samples,
    ));

    checks.push(CheckResult::new(
        "series_vs_quadrature",
        series_quadrature_gap()?,
        SERIES_QUADRATURE_TOL,
        20,
    ));
    let i1s = [0.25, 1.0, 4.0];
    checks.push(CheckResult::new(
        "ode_vs_blowup_time",
        blowup_gap(&i1s, config.tol)?,
        BLOWUP_RELATIVE_TOL,
        3,
    ));

    let passed = checks.iter().all(|c| c.passed);
    Ok(CheckReport {
        config: *config,
        passed,
        checks,
    })
}
