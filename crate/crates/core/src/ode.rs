//! Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4), the
//! method behind MATLAB's `ode45`), generic over real and complex states.

use crate::error::{CoreError, Result};
use nalgebra::{ComplexField, DVector};

/// Tolerances and limits for adaptive integration.
#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Cap on |h|; also used as the initial step guess when finite.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { abs_tol: 1e-8, rel_tol: 1e-6, max_step: f64::INFINITY, max_steps: 2_000_000 }
    }
}

/// What the per-step callback wants the integrator to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    /// Stop integrating; `integrate` returns the current state.
    Stop,
    /// The callback mutated the state; invalidate the FSAL derivative.
    ContinueMutated,
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// After every accepted step, `on_step(t, &mut y, &dy)` is invoked with the
/// new state and its derivative; it may mutate the state (returning
/// [`StepControl::ContinueMutated`]) or stop the integration early. Returns
/// the final `(t, y)`.
pub fn integrate<T, F, G>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: DVector<T>,
    opts: &OdeOptions,
    mut on_step: G,
) -> Result<(f64, DVector<T>)>
where
    T: ComplexField<RealField = f64> + Copy,
    F: FnMut(f64, &DVector<T>) -> DVector<T>,
    G: FnMut(f64, &mut DVector<T>, &DVector<T>) -> StepControl,
{
    if t1 == t0 {
        return Ok((t0, y0));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut h = (span / 64.0).min(opts.max_step).max(1e-12);
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let from = |x: f64| T::from_real(x);

    for _ in 0..opts.max_steps {
        let remaining = (t1 - t).abs();
        if remaining <= 1e-14 * (1.0 + t.abs()) {
            return Ok((t, y));
        }
        h = h.min(remaining).min(opts.max_step);
        let hs = dir * h;

        let y2 = &y + &k1 * from(hs * A21);
        let k2 = f(t + hs * C2, &y2);
        let y3 = &y + &k1 * from(hs * A31) + &k2 * from(hs * A32);
        let k3 = f(t + hs * C3, &y3);
        let y4 = &y + &k1 * from(hs * A41) + &k2 * from(hs * A42) + &k3 * from(hs * A43);
        let k4 = f(t + hs * C4, &y4);
        let y5 = &y
            + &k1 * from(hs * A51)
            + &k2 * from(hs * A52)
            + &k3 * from(hs * A53)
            + &k4 * from(hs * A54);
        let k5 = f(t + hs * C5, &y5);
        let y6 = &y
            + &k1 * from(hs * A61)
            + &k2 * from(hs * A62)
            + &k3 * from(hs * A63)
            + &k4 * from(hs * A64)
            + &k5 * from(hs * A65);
        let k6 = f(t + hs, &y6);
        let y_new = &y
            + &k1 * from(hs * B1)
            + &k3 * from(hs * B3)
            + &k4 * from(hs * B4)
            + &k5 * from(hs * B5)
            + &k6 * from(hs * B6);
        let k7 = f(t + hs, &y_new);

        // embedded error estimate
        let err_vec = &k1 * from(hs * E1)
            + &k3 * from(hs * E3)
            + &k4 * from(hs * E4)
            + &k5 * from(hs * E5)
            + &k6 * from(hs * E6)
            + &k7 * from(hs * E7);
        let mut err: f64 = 0.0;
        for i in 0..y.len() {
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            let e = err_vec[i].abs() / scale;
            err += e * e;
        }
        err = (err / y.len() as f64).sqrt();

        if err <= 1.0 {
            t += hs;
            y = y_new;
            k1 = k7;
            let control = on_step(t, &mut y, &k1);
            match control {
                StepControl::Stop => return Ok((t, y)),
                StepControl::ContinueMutated => k1 = f(t, &y),
                StepControl::Continue => {}
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-13 * (1.0 + t.abs()) {
            return Err(CoreError::StiffFailure { t });
        }
    }
    Err(CoreError::StiffFailure { t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex;

    #[test]
    fn exponential_decay_real() {
        let y0 = DVector::from_vec(vec![1.0f64]);
        let opts = OdeOptions::default();
        let (_, y) = integrate(|_, y| -y.clone(), 0.0, 2.0, y0, &opts, |_, _, _| StepControl::Continue)
            .unwrap();
        assert_relative_eq!(y[0], (-2.0f64).exp(), epsilon = 1e-7);
    }

    #[test]
    fn backward_integration() {
        let y0 = DVector::from_vec(vec![1.0f64]);
        let opts = OdeOptions::default();
        let (_, y) = integrate(|_, y| y.clone(), 2.0, 0.0, y0, &opts, |_, _, _| StepControl::Continue)
            .unwrap();
        assert_relative_eq!(y[0], (-2.0f64).exp(), epsilon = 1e-7);
    }

    #[test]
    fn complex_rotation() {
        let i = Complex::new(0.0, 1.0);
        let y0 = DVector::from_vec(vec![Complex::new(1.0, 0.0)]);
        let opts = OdeOptions::default();
        let (_, y) = integrate(
            |_, y: &DVector<Complex<f64>>| y * i,
            0.0,
            std::f64::consts::PI,
            y0,
            &opts,
            |_, _, _| StepControl::Continue,
        )
        .unwrap();
        assert_relative_eq!(y[0].re, -1.0, epsilon = 1e-6);
        assert_relative_eq!(y[0].im, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn early_stop_via_callback() {
        let y0 = DVector::from_vec(vec![0.0f64]);
        let opts = OdeOptions { max_step: 0.01, ..OdeOptions::default() };
        let (t, _) = integrate(
            |_, _| DVector::from_vec(vec![1.0]),
            0.0,
            10.0,
            y0,
            &opts,
            |t, _, _| if t >= 1.0 { StepControl::Stop } else { StepControl::Continue },
        )
        .unwrap();
        assert!(t >= 1.0 && t < 1.2);
    }
}
