//! Radial analysis of the geodesic flow in polar coordinates `ξ = Re^{iθ}`.
//!
//! With `f(R) = (1−R²)/(1+R²)³` the first integrals read
//! `I₁ = f (Ṙ² + R²θ̇²)` and `I₂ = f R² θ̇`, hence
//!
//! ```text
//! I₁ − U_eff(R) I₂² = f Ṙ²,    U_eff(R) = (1+R²)³ / ((1−R²) R²).
//! ```
//!
//! For `I₂ = 0` the travel time from the pole is `√I₁ t = ∫₀^R √f dr`, which
//! equals `R·F₁(½; −½, 3/2; 3/2; R², −R²)`. The primitive is computed both by
//! quadrature and by the Appell double series so each checks the other.
//!
//! For `I₂ ≠ 0` the radius is confined to the well `U_eff ≤ I₁/I₂²`. On
//! `(0, 1)` the potential has a single minimum `6√3` at `R² = 2 − √3`.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::geodesics::{first_integrals, FirstIntegrals, Trajectory};
use crate::quadrature;
use num_complex::Complex64;

/// `√(2 − √3)`, where `U_eff` attains its minimum on `(0, 1)`.
pub const CRITICAL_RADIUS: f64 = 0.517_638_090_205_041_5;
/// `6√3`, the minimum of `U_eff` on `(0, 1)`.
pub const MIN_POTENTIAL: f64 = 10.392_304_845_413_264;

/// Series arguments above this radius converge too slowly to be useful;
/// use [`radial_quadrature`] instead.
pub const SERIES_RADIUS_LIMIT: f64 = 0.95;
const SERIES_TAIL_TOL: f64 = 1e-14;
const SERIES_MAX_DIAGONALS: usize = 10_000;
const QUADRATURE_TOL: f64 = 1e-13;
const BISECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    #[serde(rename = "R")]
    pub r: f64,
    pub theta: f64,
    #[serde(rename = "Rdot")]
    pub rdot: f64,
    pub thetadot: f64,
}

impl PolarState {
    /// `ξ = Re^{iθ}`, `ξ̇ = (Ṙ + iRθ̇)e^{iθ}`.
    pub fn to_cartesian(&self) -> (Complex64, Complex64) {
        let phase = Complex64::from_polar(1.0, self.theta);
        (
            self.r * phase,
            Complex64::new(self.rdot, self.r * self.thetadot) * phase,
        )
    }

    /// Inverse of [`to_cartesian`](Self::to_cartesian). At `ξ = 0` the angle
    /// is taken from the direction of motion and `θ̇ = 0`.
    pub fn from_cartesian(xi: Complex64, xidot: Complex64) -> Self {
        let r = xi.norm();
        if r == 0.0 {
            return Self {
                r,
                theta: xidot.arg(),
                rdot: xidot.norm(),
                thetadot: 0.0,
            };
        }
        let w = xi.conj() * xidot;
        Self {
            r,
            theta: xi.arg(),
            rdot: w.re / r,
            thetadot: w.im / (r * r),
        }
    }

    /// First integrals from the polar expressions.
    pub fn integrals(&self) -> FirstIntegrals {
        let r2 = self.r * self.r;
        let f = (1.0 - r2) / (1.0 + r2).powi(3);
        FirstIntegrals {
            i1: f * (self.rdot * self.rdot + r2 * self.thetadot * self.thetadot),
            i2: f * r2 * self.thetadot,
        }
    }
}

/// Rising factorial `(a)_k = a(a+1)…(a+k−1)`, `(a)_0 = 1`.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a + j as f64))
}

fn radial_integrand_angular(phi: f64) -> f64 {
    // r = sin φ turns √(1−r²)/(1+r²)^{3/2} dr into a smooth integrand
    let (s, c) = phi.sin_cos();
    c * c / (1.0 + s * s).powf(1.5)
}

/// `∫₀^R (1−r²)^{1/2} / (1+r²)^{3/2} dr` for `0 ≤ R ≤ 1`, by adaptive
/// Gauss–Kronrod quadrature after the substitution `r = sin φ`.
pub fn radial_quadrature(r: f64) -> Result<f64> {
    finite(r, "R")?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("radial quadrature needs 0 <= R <= 1, got {r}")));
    }
    Ok(quadrature::integrate(
        radial_integrand_angular,
        0.0,
        r.asin(),
        QUADRATURE_TOL,
    ))
}

/// `R·F₁(½; −½, 3/2; 3/2; R², −R²)` by the double series
///
/// ```text
/// Σₖ Σₗ (−1)ˡ (½)_{k+l} (−½)ₖ (3/2)ₗ / ((3/2)_{k+l} k! l!) R^{2(k+l)+1}
/// ```
///
/// summed over anti-diagonals `m = k + l`. Summation stops once the
/// anti-diagonals decay and the geometric tail bound drops below `1e-14`.
pub fn appell_f1_series(r: f64) -> Result<f64> {
    finite(r, "R")?;
    if r < 0.0 {
        return Err(Error::Domain(format!("series needs R >= 0, got {r}")));
    }
    if r >= 1.0 {
        return Err(Error::Convergence(format!("double series diverges at R = {r} >= 1")));
    }
    let x = r * r;
    // (−½)ₖ/k! and (3/2)ₗ/l! by their ratio recurrences
    let mut a_coef: Vec<f64> = vec![1.0];
    let mut b_coef: Vec<f64> = vec![1.0];
    // (½)_m / (3/2)_m
    let mut lead = 1.0;
    let mut xm = 1.0;
    let mut total = 0.0;
    let mut prev_abs = f64::INFINITY;
    for m in 0..SERIES_MAX_DIAGONALS {
        if m > 0 {
            let j = (m - 1) as f64;
            a_coef.push(a_coef[m - 1] * (-0.5 + j) / (j + 1.0));
            b_coef.push(b_coef[m - 1] * (1.5 + j) / (j + 1.0));
            lead *= (0.5 + j) / (1.5 + j);
            xm *= x;
        }
        let (mut diag, mut diag_abs) = (0.0, 0.0);
        for l in 0..=m {
            let term = a_coef[m - l] * b_coef[l];
            diag += if l % 2 == 0 { term } else { -term };
            diag_abs += term.abs();
        }
        let scale = lead * xm * r;
        total += diag * scale;
        let abs = diag_abs * scale;
        if m >= 2 && abs < prev_abs {
            let q = (abs / prev_abs).max(x);
            if abs * q / (1.0 - q) < SERIES_TAIL_TOL {
                return Ok(total);
            }
        }
        if abs == 0.0 {
            return Ok(total);
        }
        prev_abs = abs;
    }
    Err(Error::Convergence(format!(
        "no convergence at R = {r} within {SERIES_MAX_DIAGONALS} anti-diagonals"
    )))
}

/// Affine time for a radial geodesic with squared speed `I₁` to run from
/// `R_start` to the equator.
pub fn blowup_time(i1: f64, r_start: f64) -> Result<f64> {
    finite(i1, "I1")?;
    finite(r_start, "R_start")?;
    if !(i1 > 0.0) {
        return Err(Error::Domain(format!("blow-up time needs I1 > 0, got {i1}")));
    }
    if !(0.0..1.0).contains(&r_start) {
        return Err(Error::Domain(format!("R_start = {r_start} must lie in [0, 1)")));
    }
    Ok((radial_quadrature(1.0)? - radial_quadrature(r_start)?) / i1.sqrt())
}

/// `U_eff(R) = (1+R²)³/((1−R²)R²)`. Negative beyond the equator.
pub fn u_eff(r: f64) -> Result<f64> {
    finite(r, "R")?;
    if r == 0.0 || r == 1.0 {
        return Err(Error::Pole { what: "U_eff", at: r });
    }
    if r < 0.0 {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let r2 = r * r;
    Ok((1.0 + r2).powi(3) / ((1.0 - r2) * r2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoints {
    #[serde(rename = "R_min")]
    pub r_min: f64,
    #[serde(rename = "R_max")]
    pub r_max: f64,
    pub ratio: f64,
}

/// Bisection for `U_eff(R) = level` on an interval where `U_eff − level`
/// changes sign once; `decreasing` says which way `U_eff` runs.
fn bisect_level(level: f64, mut lo: f64, mut hi: f64, decreasing: bool) -> Result<f64> {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let above = u_eff(mid)? > level;
        if above == decreasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Radii bounding the oscillation of an upper-hemisphere geodesic with
/// first integrals `(I₁, I₂)`.
pub fn turning_points(i1: f64, i2: f64) -> Result<TurningPoints> {
    finite(i1, "I1")?;
    finite(i2, "I2")?;
    if i2 == 0.0 {
        return Err(Error::Domain("I2 = 0: the geodesic is radial, use blowup_time".into()));
    }
    if !(i1 > 0.0) {
        return Err(Error::Domain(format!("turning points need I1 > 0, got {i1}")));
    }
    let ratio = i1 / (i2 * i2);
    if (ratio - MIN_POTENTIAL).abs() <= 1e-12 * MIN_POTENTIAL {
        return Ok(TurningPoints {
            r_min: CRITICAL_RADIUS,
            r_max: CRITICAL_RADIUS,
            ratio,
        });
    }
    if ratio < MIN_POTENTIAL {
        return Err(Error::NoOrbit { ratio });
    }
    let r_min = bisect_level(ratio, 0.0, CRITICAL_RADIUS, true)?;
    let r_max = bisect_level(ratio, CRITICAL_RADIUS, 1.0, false)?;
    Ok(TurningPoints { r_min, r_max, ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub observed_min: f64,
    pub observed_max: f64,
    pub predicted: TurningPoints,
    pub min_discrepancy: f64,
    pub max_discrepancy: f64,
    /// Radial maxima and minima passed through (sign changes of `Ṙ`).
    pub radial_maxima: usize,
    pub radial_minima: usize,
    /// Set when the trajectory does not span a full radial period.
    pub inconclusive: bool,
}

/// Extrema in `[0, 1]` of the cubic Hermite interpolant of `R(t)` between
/// two samples.
fn hermite_extrema(r0: f64, d0: f64, r1: f64, d1: f64, h: f64) -> Vec<f64> {
    let a = 6.0 * r0 + 3.0 * h * d0 - 6.0 * r1 + 3.0 * h * d1;
    let b = -6.0 * r0 - 4.0 * h * d0 + 6.0 * r1 - 2.0 * h * d1;
    let c = h * d0;
    let roots: Vec<f64> = if a.abs() < 1e-300 {
        if b == 0.0 {
            vec![]
        } else {
            vec![-c / b]
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            vec![]
        } else {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let mut v = vec![q / a];
            if q != 0.0 {
                v.push(c / q);
            }
            v
        }
    };
    roots
        .into_iter()
        .filter(|s| (0.0..=1.0).contains(s))
        .map(|s| {
            let s2 = s * s;
            let s3 = s2 * s;
            (2.0 * s3 - 3.0 * s2 + 1.0) * r0
                + (s3 - 2.0 * s2 + s) * h * d0
                + (-2.0 * s3 + 3.0 * s2) * r1
                + (s3 - s2) * h * d1
        })
        .collect()
}

/// Compares the radial range a trajectory actually sweeps with the turning
/// radii predicted from its first integrals.
///
/// Extremes between samples are located on the cubic Hermite interpolant
/// built from `R` and `Ṙ` at the neighbouring samples.
pub fn oscillation_check(traj: &Trajectory) -> Result<OscillationReport> {
    let FirstIntegrals { i1, i2 } = traj.integrals0;
    if i2.abs() <= 1e-14 * i1.abs().sqrt() {
        return Err(Error::Domain("oscillation check needs I2 != 0".into()));
    }
    if traj.samples.iter().any(|s| s.xi.norm_sqr() >= 1.0) {
        return Err(Error::Domain(
            "oscillation check covers the upper hemisphere only".into(),
        ));
    }
    let predicted = turning_points(i1, i2)?;
    let polar: Vec<_> = traj.samples.iter().map(|s| (s.t, s.polar())).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let (mut maxima, mut minima) = (0, 0);
    for (_, p) in &polar {
        lo = lo.min(p.r);
        hi = hi.max(p.r);
    }
    for w in polar.windows(2) {
        let ((t0, p0), (t1, p1)) = (w[0], w[1]);
        if p0.rdot * p1.rdot < 0.0 {
            if p0.rdot > 0.0 {
                maxima += 1;
            } else {
                minima += 1;
            }
            for r in hermite_extrema(p0.r, p0.rdot, p1.r, p1.rdot, t1 - t0) {
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    Ok(OscillationReport {
        observed_min: lo,
        observed_max: hi,
        predicted,
        min_discrepancy: (lo - predicted.r_min).abs(),
        max_discrepancy: (hi - predicted.r_max).abs(),
        radial_maxima: maxima,
        radial_minima: minima,
        inconclusive: maxima == 0 || minima == 0,
    })
}

/// `I₁ − U_eff(R) I₂² − f Ṙ²` at one sample; zero along exact geodesics.
pub fn energy_identity_residual(state: &crate::GeodesicState) -> Result<f64> {
    let fi = first_integrals(state);
    let p = state.polar();
    let r2 = p.r * p.r;
    let f = (1.0 - r2) / (1.0 + r2).powi(3);
    Ok(fi.i1 - u_eff(p.r)? * fi.i2 * fi.i2 - f * p.rdot * p.rdot)
}

/// `(R, U_eff(R))` on `n` evenly spaced radii in `[r_lo, r_hi] ⊂ (0, 1)`.
pub fn potential_curve(n: usize, r_lo: f64, r_hi: f64) -> Result<Vec<(f64, f64)>> {
    if !(0.0 < r_lo && r_lo < r_hi && r_hi < 1.0) || n < 2 {
        return Err(Error::Domain(format!(
            "potential curve needs 0 < r_lo < r_hi < 1 and n >= 2, got [{r_lo}, {r_hi}], n = {n}"
        )));
    }
    (0..n)
        .map(|k| {
            let r = r_lo + (r_hi - r_lo) * k as f64 / (n - 1) as f64;
            Ok((r, u_eff(r)?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesCheckRow {
    #[serde(rename = "R")]
    pub r: f64,
    pub series: f64,
    pub quadrature: f64,
    pub diff: f64,
}

/// Series against quadrature at the given radii.
pub fn series_check(radii: &[f64]) -> Result<Vec<SeriesCheckRow>> {
    radii
        .iter()
        .map(|&r| {
            let series = appell_f1_series(r)?;
            let quadrature = radial_quadrature(r)?;
            Ok(SeriesCheckRow {
                r,
                series,
                quadrature,
                diff: (series - quadrature).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((CRITICAL_RADIUS - (2.0 - 3f64.sqrt()).sqrt()).abs() < 1e-15);
        assert!((CRITICAL_RADIUS - (6f64.sqrt() - 2f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((MIN_POTENTIAL - 6.0 * 3f64.sqrt()).abs() < 1e-14);
        assert!((u_eff(CRITICAL_RADIUS).unwrap() - MIN_POTENTIAL).abs() < 1e-13);
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(0.5, 0), 1.0);
        assert_eq!(pochhammer(1.0, 5), 120.0);
        assert_eq!(pochhammer(-0.5, 2), -0.25);
        assert_eq!(pochhammer(1.5, 3), 1.5 * 2.5 * 3.5);
        // (½)_m/(3/2)_m = 1/(2m+1)
        for m in 0..20 {
            let v = pochhammer(0.5, m) / pochhammer(1.5, m);
            assert!((v - 1.0 / (2 * m + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn quadrature_examples() {
        assert_eq!(radial_quadrature(0.0).unwrap(), 0.0);
        let full = radial_quadrature(1.0).unwrap();
        assert!((full - 0.599070).abs() < 5e-7, "{full}");
        assert!(radial_quadrature(1.01).is_err());
        assert!(radial_quadrature(-0.1).is_err());
    }

    #[test]
    fn series_examples() {
        assert_eq!(appell_f1_series(0.0).unwrap(), 0.0);
        // the first correction is −2R³/3, i.e. 6.7e-5 relative at R = 0.01
        let v = appell_f1_series(0.01).unwrap();
        assert!((v - 0.01).abs() < 1e-4 * 0.01);
        let s = appell_f1_series(0.5).unwrap();
        let q = radial_quadrature(0.5).unwrap();
        assert!((s - q).abs() < 1e-10, "{s} vs {q}");
        assert!(matches!(appell_f1_series(1.0), Err(Error::Convergence(_))));
        assert!(appell_f1_series(-0.2).is_err());
    }

    // Taylor expansion of the integrand: √(1−r²)(1+r²)^{−3/2} = 1 − 2r² + …,
    // so the primitive is R − 2R³/3 + O(R⁵).
    #[test]
    fn series_leading_terms() {
        let r = 0.05;
        let v = appell_f1_series(r).unwrap();
        assert!((v - (r - 2.0 * r * r * r / 3.0)).abs() < 1e-6);
    }

    #[test]
    fn blowup_examples() {
        let t = blowup_time(1.0, 0.0).unwrap();
        assert!((t - 0.599070).abs() < 5e-7);
        assert!((blowup_time(4.0, 0.0).unwrap() - 0.299535).abs() < 5e-7);
        assert!(blowup_time(0.0, 0.0).is_err());
        assert!(blowup_time(-1.0, 0.0).is_err());
        assert!(blowup_time(1.0, 1.0).is_err());
        assert!(blowup_time(1.0, 0.999).unwrap() > 0.0);
    }

    #[test]
    fn u_eff_examples() {
        let v = u_eff((1.0f64 / 3.0).sqrt()).unwrap();
        assert!((v - 32.0 / 3.0).abs() < 1e-13);
        assert!(matches!(u_eff(0.0), Err(Error::Pole { .. })));
        assert!(matches!(u_eff(1.0), Err(Error::Pole { .. })));
        assert!(u_eff(1e-4).unwrap() > 1e7);
        assert!(u_eff(1.0 - 1e-6).unwrap() > 1e6);
        assert!(u_eff(1.5).unwrap() < 0.0);
    }

    // Golden-section search over (0, 1), independent of the closed form for
    // the minimizer.
    #[test]
    fn u_eff_minimum_by_golden_section() {
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.05, 0.95);
        while b - a > 1e-12 {
            let x1 = b - phi * (b - a);
            let x2 = a + phi * (b - a);
            if u_eff(x1).unwrap() < u_eff(x2).unwrap() {
                b = x2;
            } else {
                a = x1;
            }
        }
        let r = 0.5 * (a + b);
        assert!((r - CRITICAL_RADIUS).abs() < 1e-6);
        assert!((u_eff(r).unwrap() - MIN_POTENTIAL).abs() < 1e-10);
    }

    #[test]
    fn turning_point_examples() {
        let tp = turning_points(MIN_POTENTIAL, 1.0).unwrap();
        assert_eq!((tp.r_min, tp.r_max), (CRITICAL_RADIUS, CRITICAL_RADIUS));
        assert!((CRITICAL_RADIUS - 0.51764).abs() < 1e-5);

        let tp = turning_points(32.0 / 3.0, 1.0).unwrap();
        assert!((tp.r_max - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        // (1+u)³ = k(1−u)u  ⇔  u³ + (3+k)u² + (3−k)u + 1 = 0 with u = R².
        // For k = 32/3, deflating the known root u = 1/3 leaves
        // u² + 14u − 3 = 0, whose positive root is √52 − 7.
        let u_small = 52f64.sqrt() - 7.0;
        assert!((tp.r_min - u_small.sqrt()).abs() < 1e-12, "{}", tp.r_min);
        assert!(tp.r_min < CRITICAL_RADIUS);

        assert!(matches!(turning_points(10.0, 1.0), Err(Error::NoOrbit { .. })));
        assert!(turning_points(1.0, 0.0).is_err());
    }

    #[test]
    fn polar_round_trip() {
        let p = PolarState {
            r: 0.4,
            theta: 1.1,
            rdot: -0.3,
            thetadot: 2.0,
        };
        let (xi, xidot) = p.to_cartesian();
        let q = PolarState::from_cartesian(xi, xidot);
        for (a, b) in [
            (p.r, q.r),
            (p.theta, q.theta),
            (p.rdot, q.rdot),
            (p.thetadot, q.thetadot),
        ] {
            assert!((a - b).abs() < 1e-14);
        }
        let origin = PolarState::from_cartesian(Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.0));
        assert_eq!(origin.rdot, 2.0);
        assert!((origin.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn hermite_extremum_of_parabola() {
        // R(t) = 1 − (t − 0.3)², sampled at t = 0, 1
        let (r0, d0) = (1.0 - 0.09, 0.6);
        let (r1, d1) = (1.0 - 0.49, -1.4);
        let ext = hermite_extrema(r0, d0, r1, d1, 1.0);
        assert_eq!(ext.len(), 1);
        assert!((ext[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tables() {
        let curve = potential_curve(5, 0.1, 0.9).unwrap();
        assert_eq!(curve.len(), 5);
        assert_eq!(curve[0].0, 0.1);
        assert!(potential_curve(5, 0.0, 0.9).is_err());
        let rows = series_check(&[0.1, 0.5]).unwrap();
        assert!(rows.iter().all(|r| r.diff < 1e-10));
    }
}
