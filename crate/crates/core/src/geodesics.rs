//! The geodesic flow of the induced metric on a twisting sphere `η = c·i·ξ`.
//!
//! The metric `g(ξ) dξ⊗dξ̄` is conformal, so the only Christoffel symbol is
//! `Γ = ∂ ln[(1−ξξ̄)/(1+ξξ̄)³]` and the geodesic equation is
//! `ξ̈ = −Γ ξ̇²`. It does not depend on `c`. Along solutions
//!
//! ```text
//! I₁ = f |ξ̇|²,   I₂ = f (ξ̄ξ̇ − ξξ̄̇)/(2i) = f Im(ξ̄ξ̇),   f = (1−ξξ̄)/(1+ξξ̄)³
//! ```
//!
//! are conserved. In polar form `ξ = Re^{iθ}` this gives `I₂ = f R² θ̇`.
//!
//! The flow runs into the degenerate equator `|ξ| = 1` in finite time when
//! `I₂ = 0`; integration stops once `|1 − |ξ|²|` drops below
//! [`EQUATOR_CUTOFF`].

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{u_eff, PolarState, MIN_POTENTIAL};
use crate::error::{finite, finite_c, Error, Result};
use crate::fmt::sig17;
use crate::line_space::CHART_LIMIT;
use crate::ode;
use crate::sections::StandardSphere;

/// Integration halts when `|1 − |ξ|²|` falls below this.
pub const EQUATOR_CUTOFF: f64 = 1e-8;
/// Smallest step the integrator will take.
pub const STEP_FLOOR: f64 = 1e-14;
/// Fraction of the requested tolerance the step controller aims at, so the
/// error accumulated over thousands of steps stays within `100·tol`.
pub const LOCAL_TOL_FRACTION: f64 = 0.1;
/// `|1 − ξξ̄|` below this is treated as on the equator.
pub const DEGENERACY_TOL: f64 = 1e-13;
/// Gap below which a step-size underflow on an equator-bound geodesic is
/// read as arrival at the equator.
pub const APPROACH_ZONE: f64 = 1e-6;

/// Header of the trajectory CSV export.
pub const CSV_HEADER: &str = "t,R,theta,xi_re,xi_im,xidot_re,xidot_im,I1,I2";

/// `(1−ξξ̄)/(1+ξξ̄)³`, the induced metric factor up to `−4c`.
pub fn conformal_factor(xi: Complex64) -> f64 {
    let r = xi.norm_sqr();
    (1.0 - r) / (1.0 + r).powi(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub t: f64,
    #[serde(with = "crate::serde_complex")]
    pub xi: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub xidot: Complex64,
}

impl GeodesicState {
    pub fn new(t: f64, xi: Complex64, xidot: Complex64) -> Result<Self> {
        finite(t, "t")?;
        finite_c(xi, "xi")?;
        finite_c(xidot, "xidot")?;
        Ok(Self { t, xi, xidot })
    }

    pub fn from_polar(t: f64, p: &PolarState) -> Result<Self> {
        let (xi, xidot) = p.to_cartesian();
        Self::new(t, xi, xidot)
    }

    pub fn polar(&self) -> PolarState {
        PolarState::from_cartesian(self.xi, self.xidot)
    }

    /// Upper-hemisphere initial data at radius `r0` and angle `theta0` with
    /// prescribed first integrals. `Ṙ` is taken from the energy identity
    /// `I₁ − U_eff(R) I₂² = f Ṙ²`, with the sign chosen by `outward`.
    ///
    /// Fails with [`Error::NoOrbit`] when `I₁/I₂² < 6√3` (no real `Ṙ`
    /// anywhere) and with a domain error when `r0` lies outside the allowed
    /// band for this level.
    pub fn from_integrals(r0: f64, theta0: f64, i1: f64, i2: f64, outward: bool) -> Result<Self> {
        finite(r0, "R0")?;
        finite(theta0, "theta0")?;
        finite(i1, "I1")?;
        finite(i2, "I2")?;
        if !(0.0..1.0).contains(&r0) {
            return Err(Error::Domain(format!("R0 = {r0} must lie in [0, 1)")));
        }
        if i1 < 0.0 {
            return Err(Error::Domain(format!("I1 = {i1} must be >= 0 on the upper hemisphere")));
        }
        let f = (1.0 - r0 * r0) / (1.0 + r0 * r0).powi(3);
        let (rdot2, thetadot) = if i2 == 0.0 {
            (i1 / f, 0.0)
        } else {
            let ratio = i1 / (i2 * i2);
            if ratio < MIN_POTENTIAL * (1.0 - 1e-12) {
                return Err(Error::NoOrbit { ratio });
            }
            if r0 == 0.0 {
                return Err(Error::Domain("R0 = 0 forces I2 = 0".into()));
            }
            let excess = i1 - u_eff(r0)? * i2 * i2;
            // slack for radii produced by the 1e-12 root bisection
            if excess < -1e-9 * i1 {
                return Err(Error::Domain(format!(
                    "R0 = {r0} lies outside the band allowed by I1/I2^2 = {ratio}"
                )));
            }
            (excess.max(0.0) / f, i2 / (f * r0 * r0))
        };
        let rdot = if outward { rdot2.sqrt() } else { -rdot2.sqrt() };
        Self::from_polar(
            0.0,
            &PolarState {
                r: r0,
                theta: theta0,
                rdot,
                thetadot,
            },
        )
    }

    /// The same point with velocity reversed.
    pub fn reversed(&self) -> Self {
        Self {
            t: 0.0,
            xi: self.xi,
            xidot: -self.xidot,
        }
    }

    fn pack(&self) -> [f64; 4] {
        [self.xi.re, self.xi.im, self.xidot.re, self.xidot.im]
    }

    fn unpack(t: f64, y: &[f64; 4]) -> Self {
        Self {
            t,
            xi: Complex64::new(y[0], y[1]),
            xidot: Complex64::new(y[2], y[3]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegrals {
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
}

impl FirstIntegrals {
    /// `I₁/I₂²`, the level the effective potential is cut at.
    pub fn ratio(&self) -> f64 {
        self.i1 / (self.i2 * self.i2)
    }
}

/// `Γ^ξ_ξξ = −ξ̄/(1−ξξ̄) − 3ξ̄/(1+ξξ̄)`; the mixed and `ξ̄ξ̄` symbols vanish.
pub fn christoffel(xi: Complex64) -> Result<Complex64> {
    finite_c(xi, "xi")?;
    let r = xi.norm_sqr();
    if (1.0 - r).abs() < DEGENERACY_TOL {
        return Err(Error::Degenerate(xi));
    }
    Ok(-xi.conj() * (1.0 / (1.0 - r) + 3.0 / (1.0 + r)))
}

/// Right-hand side `(ξ̇, −Γ ξ̇²)` of the first-order system.
pub fn rhs(state: &GeodesicState) -> Result<(Complex64, Complex64)> {
    let gamma = christoffel(state.xi)?;
    Ok((state.xidot, -gamma * state.xidot * state.xidot))
}

pub fn first_integrals(state: &GeodesicState) -> FirstIntegrals {
    let f = conformal_factor(state.xi);
    let i1 = f * (state.xidot * state.xidot.conj()).re;
    let twist = (state.xi.conj() * state.xidot - state.xi * state.xidot.conj()) / (2.0 * Complex64::i());
    FirstIntegrals { i1, i2: f * twist.re }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cause", rename_all = "snake_case")]
pub enum Termination {
    TimeLimit,
    EquatorReached { t_hit: f64 },
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub sphere: StandardSphere,
    pub samples: Vec<GeodesicState>,
    pub integrals0: FirstIntegrals,
    /// Peak relative drift of `(I₁, I₂)` over the samples.
    pub max_drift: (f64, f64),
    pub termination: Termination,
}

/// Machine-readable digest of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub termination: Termination,
    pub t_hit: Option<f64>,
    pub t_end: f64,
    pub samples: usize,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    pub max_drift_i1: f64,
    pub max_drift_i2: f64,
    pub r_min_sampled: f64,
    pub r_max_sampled: f64,
}

impl Trajectory {
    pub fn t_hit(&self) -> Option<f64> {
        match self.termination {
            Termination::EquatorReached { t_hit } => Some(t_hit),
            _ => None,
        }
    }

    pub fn last(&self) -> &GeodesicState {
        self.samples
            .last()
            .expect("a trajectory holds at least its initial state")
    }

    pub fn summary(&self) -> TrajectorySummary {
        let radii = self.samples.iter().map(|s| s.xi.norm());
        let (lo, hi) = radii.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        TrajectorySummary {
            termination: self.termination,
            t_hit: self.t_hit(),
            t_end: self.last().t,
            samples: self.samples.len(),
            i1: self.integrals0.i1,
            i2: self.integrals0.i2,
            max_drift_i1: self.max_drift.0,
            max_drift_i2: self.max_drift.1,
            r_min_sampled: lo,
            r_max_sampled: hi,
        }
    }

    /// Writes the samples as CSV (see [`CSV_HEADER`]), every number with 17
    /// significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for s in &self.samples {
            let p = s.polar();
            let fi = first_integrals(s);
            let row = [p.r, p.theta, s.xi.re, s.xi.im, s.xidot.re, s.xidot.im, fi.i1, fi.i2]
                .map(sig17)
                .join(",");
            writeln!(w, "{},{row}", sig17(s.t))?;
        }
        Ok(())
    }
}

fn drift(now: f64, start: f64) -> f64 {
    (now - start).abs() / start.abs().max(1e-30)
}

/// Near the equator `g = |1 − |ξ|²|` of a radial geodesic behaves like
/// `K (t_hit − t)^{2/3}`, so the time left to reach [`EQUATOR_CUTOFF`] is
/// `1.5 (g/|ġ|) (1 − (cutoff/g)^{3/2})`.
///
/// Returns `None` unless the geodesic is inside [`APPROACH_ZONE`], heading
/// for the equator, and cannot turn around before the cutoff (closest
/// approach `≈ 8 I₂²/|I₁|`).
fn final_approach(t: f64, y: &[f64; 4], side: f64, integrals0: &FirstIntegrals) -> Option<f64> {
    let xi = Complex64::new(y[0], y[1]);
    let xidot = Complex64::new(y[2], y[3]);
    let g = side * (1.0 - xi.norm_sqr());
    let gdot = -2.0 * side * (xi.conj() * xidot).re;
    let closest = 8.0 * integrals0.i2 * integrals0.i2 / integrals0.i1.abs();
    if !(g > 0.0 && g < APPROACH_ZONE && gdot < 0.0 && closest < EQUATOR_CUTOFF) {
        return None;
    }
    let remaining = 1.5 * g / gdot.abs() * (1.0 - (EQUATOR_CUTOFF / g).powf(1.5)).max(0.0);
    Some(t + remaining)
}

fn system(_t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
    let (dxi, dxidot) = rhs(&GeodesicState::unpack(0.0, y))?;
    Ok([dxi.re, dxi.im, dxidot.re, dxidot.im])
}

/// Integrates the geodesic from `initial` for affine time `t_max` with an
/// adaptive Dormand–Prince 5(4) scheme. Each step's error estimate is held
/// below `LOCAL_TOL_FRACTION · tol`, relative and absolute, in every
/// component.
///
/// Every accepted step is recorded. A step that would carry `ξ` across the
/// equator is rejected and retried shorter; the first accepted step landing
/// within [`EQUATOR_CUTOFF`] of it ends the run, with the hitting time
/// interpolated linearly in `1 − |ξ|²`.
pub fn integrate(initial: &GeodesicState, sphere: &StandardSphere, t_max: f64, tol: f64) -> Result<Trajectory> {
    let initial = GeodesicState::new(initial.t, initial.xi, initial.xidot)?;
    finite(t_max, "t_max")?;
    finite(tol, "tol")?;
    if !(sphere.c > 0.0) {
        return Err(Error::Domain(format!(
            "geodesic flow needs a twisting sphere, got c = {}",
            sphere.c
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if t_max < 0.0 {
        return Err(Error::Domain(format!("t_max must be >= 0, got {t_max}")));
    }
    let side = 1.0 - initial.xi.norm_sqr();
    if side.abs() <= EQUATOR_CUTOFF {
        return Err(Error::Domain(format!(
            "initial point xi = {} sits on the equator",
            initial.xi
        )));
    }
    let side = side.signum();
    let gap = |y: &[f64; 4]| side * (1.0 - (y[0] * y[0] + y[1] * y[1]));

    let local_tol = LOCAL_TOL_FRACTION * tol;
    let integrals0 = first_integrals(&initial);
    let t0 = initial.t;
    let t_end = t0 + t_max;
    let mut samples = vec![initial];
    let mut max_drift = (0.0f64, 0.0f64);

    let mut t = t0;
    let mut y = initial.pack();
    let mut k1 = system(t, &y)?;
    let mut h = ode::initial_step(&system, t, &y, &k1, local_tol, local_tol).min(t_max.max(STEP_FLOOR));
    let mut after_reject = false;

    let termination = loop {
        if t_end - t <= 0.0 {
            break Termination::TimeLimit;
        }
        let last = t_end - t <= h;
        let h_try = if last { t_end - t } else { h };
        if h_try < STEP_FLOOR && !last {
            break match final_approach(t, &y, side, &integrals0) {
                Some(t_hit) => Termination::EquatorReached { t_hit },
                None => Termination::StepUnderflow,
            };
        }
        let step = match ode::dopri5_step(&system, t, &y, &k1, h_try, local_tol, local_tol) {
            Ok(s) if s.err.is_finite() => s,
            // a stage landed on (or beyond) the equator, or blew up
            _ => {
                h = 0.25 * h_try;
                after_reject = true;
                continue;
            }
        };
        if step.err > 1.0 {
            h = h_try * ode::step_factor(step.err, true);
            after_reject = true;
            continue;
        }
        let g0 = gap(&y);
        let g1 = gap(&step.y);
        if g1 <= 0.0 {
            h = 0.5 * h_try;
            after_reject = true;
            continue;
        }

        let t_new = if last { t_end } else { t + h_try };
        let state = GeodesicState::unpack(t_new, &step.y);
        if state.xi.norm() > CHART_LIMIT {
            return Err(Error::ChartExit(format!("geodesic left the chart at t = {t_new}")));
        }
        let fi = first_integrals(&state);
        max_drift.0 = max_drift.0.max(drift(fi.i1, integrals0.i1));
        max_drift.1 = max_drift.1.max(drift(fi.i2, integrals0.i2));
        samples.push(state);

        if g1 < EQUATOR_CUTOFF {
            let t_hit = t + h_try * (g0 - EQUATOR_CUTOFF) / (g0 - g1);
            break Termination::EquatorReached { t_hit };
        }
        if last {
            break Termination::TimeLimit;
        }
        t = t_new;
        y = step.y;
        k1 = step.dy;
        h = h_try * ode::step_factor(step.err, after_reject);
        after_reject = false;
    };

    log::debug!(
        "geodesic from xi = {} finished: {:?} after {} samples, drift {:?}",
        initial.xi,
        termination,
        samples.len(),
        max_drift
    );
    Ok(Trajectory {
        sphere: *sphere,
        samples,
        integrals0,
        max_drift,
        termination,
    })
}
