//! Dormand–Prince 5(4) embedded Runge–Kutta step with local extrapolation.
//!
//! Only the single step, the error norm and the step-size controller live
//! here; the geodesic driver owns the accept/reject loop because it also has
//! to watch the equator.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// b − b̂ (5th minus embedded 4th order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

pub(crate) type State<const N: usize> = [f64; N];

pub(crate) struct Step<const N: usize> {
    pub y: State<N>,
    /// Derivative at the end point (first stage of the next step).
    pub dy: State<N>,
    /// Scaled RMS error estimate; the step is acceptable when ≤ 1.
    pub err: f64,
}

fn axpy<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (w, k) in terms {
            acc += w * k[i];
        }
        *o += h * acc;
    }
    out
}

pub(crate) fn error_norm<const N: usize>(err: &State<N>, y0: &State<N>, y1: &State<N>, rtol: f64, atol: f64) -> f64 {
    (0..N)
        .map(|i| err[i].abs() / (atol + rtol * y0[i].abs().max(y1[i].abs())))
        .fold(0.0, f64::max)
}

/// One Dormand–Prince step of size `h` from `(t, y)` with `k1 = f(t, y)`.
pub(crate) fn dopri5_step<const N: usize, F, E>(
    f: &F,
    t: f64,
    y: &State<N>,
    k1: &State<N>,
    h: f64,
    rtol: f64,
    atol: f64,
) -> Result<Step<N>, E>
where
    F: Fn(f64, &State<N>) -> Result<State<N>, E>,
{
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = f(
        t + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y1 = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y1)?;
    let zero = [0.0; N];
    let err = axpy(
        &zero,
        h,
        &[(E1, k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
    );
    Ok(Step {
        err: error_norm(&err, y, &y1, rtol, atol),
        y: y1,
        dy: k7,
    })
}

/// Step-size factor from an error estimate (order 5 controller).
pub(crate) fn step_factor(err: f64, after_reject: bool) -> f64 {
    let fac = if err == 0.0 { FAC_MAX } else { SAFETY * err.powf(-0.2) };
    let max = if after_reject { 1.0 } else { FAC_MAX };
    fac.clamp(FAC_MIN, max)
}

/// Initial step guess (Hairer, Nørsett & Wanner, II.4).
pub(crate) fn initial_step<const N: usize, F, E>(
    f: &F,
    t: f64,
    y: &State<N>,
    f0: &State<N>,
    rtol: f64,
    atol: f64,
) -> f64
where
    F: Fn(f64, &State<N>) -> Result<State<N>, E>,
{
    let norm = |v: &State<N>| error_norm(v, y, y, rtol, atol);
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y, h0, &[(1.0, f0)]);
    let d2 = match f(t + h0, &y1) {
        Ok(f1) => {
            let diff: State<N> = std::array::from_fn(|i| f1[i] - f0[i]);
            norm(&diff) / h0
        }
        Err(_) => return h0,
    };
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    h1.min(100.0 * h0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // y' = y on [0, 1] with fixed steps: global error must shrink ~ h⁵.
    #[test]
    fn fifth_order_convergence() {
        let f = |_t: f64, y: &[f64; 1]| -> Result<[f64; 1], ()> { Ok([y[0]]) };
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let (mut t, mut y) = (0.0, [1.0]);
            let mut k = f(t, &y).unwrap();
            for _ in 0..n {
                let s = dopri5_step(&f, t, &y, &k, h, 1e-12, 1e-12).unwrap();
                y = s.y;
                k = s.dy;
                t += h;
            }
            (y[0] - 1f64.exp()).abs()
        };
        let ratio = run(10) / run(20);
        assert!(ratio > 28.0 && ratio < 36.0, "ratio {ratio}");
    }

    #[test]
    fn harmonic_oscillator_error_estimate_tracks_truth() {
        let f = |_t: f64, y: &[f64; 2]| -> Result<[f64; 2], ()> { Ok([y[1], -y[0]]) };
        let y0 = [1.0, 0.0];
        let k1 = f(0.0, &y0).unwrap();
        let s = dopri5_step(&f, 0.0, &y0, &k1, 0.1, 0.0, 1.0).unwrap();
        let truth = [0.1f64.cos(), -0.1f64.sin()];
        let actual = ((s.y[0] - truth[0]).abs()).max((s.y[1] - truth[1]).abs());
        assert!(actual < 1e-9);
        assert!(s.err > 0.0 && s.err < 1e-6);
        assert_eq!(step_factor(0.0, false), FAC_MAX);
        assert_eq!(step_factor(0.0, true), 1.0);
        assert_eq!(step_factor(1e9, false), FAC_MIN);
    }
}
