//! End-to-end acceptance gate. Runs every criterion at its stated tolerance
//! and time budget, prints one PASS/FAIL line per criterion and exits
//! non-zero if any failed.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistflow::analysis::energy_identity_residual;
use twistflow::check::{isometry_errors, normalization_errors, random_initial_state};
use twistflow::*;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn timed(budget: Duration, f: impl FnOnce() -> Result<Outcome>) -> Outcome {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    match out {
        Ok(o) => {
            let in_time = elapsed < budget;
            let detail = format!(
                "{}; {:.3} s (budget {} s)",
                o.detail,
                elapsed.as_secs_f64(),
                budget.as_secs_f64()
            );
            outcome(o.ok && in_time, detail)
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn blowup_constant() -> Result<Outcome> {
    let t = radial_quadrature(1.0)?;
    let err = (t - 0.599070).abs();
    Ok(outcome(
        err < 5e-6,
        format!("radial_quadrature(1) = {t:.15}, |diff| = {err:.2e} < 5e-6"),
    ))
}

fn triple_agreement() -> Result<Outcome> {
    let mut series_gap = 0.0f64;
    for k in 1..=95 {
        let r = k as f64 / 100.0;
        series_gap = series_gap.max((appell_f1_series(r)? - radial_quadrature(r)?).abs());
    }
    let sphere = StandardSphere::new(1.0)?;
    let mut ode_gap = 0.0f64;
    for i1 in [0.25f64, 1.0, 4.0] {
        let start = GeodesicState::new(0.0, Complex64::new(0.0, 0.0), Complex64::new(i1.sqrt(), 0.0))?;
        let traj = integrate(&start, &sphere, 10.0, 1e-10)?;
        let predicted = blowup_time(i1, 0.0)?;
        let gap = traj
            .t_hit()
            .map_or(f64::INFINITY, |t| (t - predicted).abs() / predicted);
        ode_gap = ode_gap.max(gap);
    }
    Ok(outcome(
        series_gap < 1e-10 && ode_gap < 1e-4,
        format!("series vs quadrature {series_gap:.2e} < 1e-10, ODE vs blowup_time {ode_gap:.2e} < 1e-4 rel"),
    ))
}

/// Integrates 50 random upper-hemisphere geodesics on `c = 1` and returns
/// the worst drift of `(I₁, I₂)` and the worst energy identity residual.
fn random_flows() -> Result<(f64, f64, f64, usize)> {
    let sphere = StandardSphere::new(1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let (mut d1, mut d2, mut energy, mut samples) = (0.0f64, 0.0f64, 0.0f64, 0);
    for _ in 0..50 {
        let start = random_initial_state(&mut rng);
        let traj = integrate(&start, &sphere, 10.0, 1e-10)?;
        let fi0 = traj.integrals0;
        for s in &traj.samples {
            let fi = first_integrals(s);
            d1 = d1.max((fi.i1 - fi0.i1).abs() / fi0.i1.abs());
            d2 = d2.max((fi.i2 - fi0.i2).abs() / fi0.i2.abs());
            let r = s.xi.norm();
            if (1e-3..=1.0 - 1e-3).contains(&r) {
                energy = energy.max(energy_identity_residual(s)?.abs());
                samples += 1;
            }
        }
    }
    Ok((d1, d2, energy, samples))
}

fn conservation() -> Result<Outcome> {
    let (d1, d2, _, _) = random_flows()?;
    Ok(outcome(
        d1 < 1e-8 && d2 < 1e-8,
        format!("50 trajectories, drift I1 {d1:.2e}, I2 {d2:.2e} < 1e-8"),
    ))
}

fn oscillation_bounds() -> Result<Outcome> {
    let sphere = StandardSphere::new(1.0)?;
    let mut worst = 0.0f64;
    let mut inconclusive = 0;
    for k in 0..10 {
        let factor = 1.05 + (5.0 - 1.05) * k as f64 / 9.0;
        let i2 = 1.0;
        let i1 = factor * MIN_POTENTIAL * i2 * i2;
        let tp = turning_points(i1, i2)?;
        let start = GeodesicState::from_integrals(tp.r_min, 0.0, i1, i2, true)?;
        let traj = integrate(&start, &sphere, 10.0, 1e-12)?;
        let rep = oscillation_check(&traj)?;
        if rep.inconclusive {
            inconclusive += 1;
        }
        worst = worst.max(rep.min_discrepancy).max(rep.max_discrepancy);
    }

    let i2 = 1.0;
    let start = GeodesicState::from_integrals(CRITICAL_RADIUS, 0.0, MIN_POTENTIAL * i2 * i2, i2, true)?;
    let traj = integrate(&start, &sphere, 10.0, 1e-12)?;
    let spread = traj
        .samples
        .iter()
        .map(|s| (s.xi.norm() - CRITICAL_RADIUS).abs())
        .fold(0.0, f64::max);

    Ok(outcome(
        worst < 1e-4 && inconclusive == 0 && spread < 1e-6,
        format!(
            "10 orbits, worst turning-point gap {worst:.2e} < 1e-4 ({inconclusive} inconclusive), circular spread {spread:.2e} < 1e-6"
        ),
    ))
}

fn normalization() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let (res, inv) = normalization_errors(&mut rng, 1000)?;
    Ok(outcome(
        res < 1e-9 && inv < 1e-10,
        format!("1000 sections, residual {res:.2e} < 1e-9, invariant {inv:.2e} < 1e-10"),
    ))
}

fn isometry() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let (g, w) = isometry_errors(&mut rng, 1000)?;
    Ok(outcome(
        g < 1e-10 && w < 1e-10,
        format!("1000 samples, G {g:.2e}, Omega {w:.2e} < 1e-10"),
    ))
}

fn degeneracy_locus() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let (mut on, mut off) = (0.0f64, f64::INFINITY);
    for _ in 0..1000 {
        let s = StandardSphere::new(rng.gen_range(0.01..10.0))?;
        let phi = rng.gen_range(0.0..TAU);
        let xi = Complex64::from_polar(1.0, phi);
        on = on
            .max(s.lagrangian_defect(xi).abs())
            .max(s.induced_metric_factor(xi).abs());

        // off the equator: |ξ| in [0, 0.99] or [1.01, 3]
        let r = if rng.gen_bool(0.5) {
            rng.gen_range(0.0..=0.99)
        } else {
            rng.gen_range(1.01..=3.0)
        };
        let xi = Complex64::from_polar(r, phi);
        let smaller = s.lagrangian_defect(xi).abs().min(s.induced_metric_factor(xi).abs());
        off = off.min(smaller / (1e-4 * s.c));
    }
    Ok(outcome(
        on < 1e-12 && off > 1.0,
        format!("equator max {on:.2e} < 1e-12, off-equator min/(1e-4 c) = {off:.2} > 1"),
    ))
}

fn energy_identity() -> Result<Outcome> {
    let (_, _, energy, samples) = random_flows()?;
    Ok(outcome(
        energy < 1e-8,
        format!("{samples} samples, worst residual {energy:.2e} < 1e-8"),
    ))
}

type Criterion = (&'static str, Duration, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: [Criterion; 8] = [
        ("blow-up constant", secs(1), blowup_constant),
        ("triple agreement", secs(30), triple_agreement),
        ("conservation", secs(60), conservation),
        ("oscillation bounds", secs(60), oscillation_bounds),
        ("normalization", secs(5), normalization),
        ("isometry", secs(5), isometry),
        ("degeneracy locus", secs(60), degeneracy_locus),
        ("energy identity", secs(60), energy_identity),
    ];
    let mut failed = 0;
    for (n, (name, budget, f)) in criteria.into_iter().enumerate() {
        let o = timed(budget, f);
        println!(
            "{} criterion {} ({name}): {}",
            if o.ok { "PASS" } else { "FAIL" },
            n + 1,
            o.detail
        );
        if !o.ok {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
