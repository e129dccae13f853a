//! Adaptive Dormand–Prince 5(4) integration over complex state vectors.
//!
//! A small, dependency-free explicit Runge–Kutta integrator with embedded
//! error control and FSAL reuse, sufficient for the Schrödinger-picture
//! oscillator evolutions in this crate. Step acceptance uses the standard
//! mixed absolute/relative scaled RMS norm; an optional monitor callback is
//! invoked after every accepted step (used for truncation-leakage tracking).

use crate::error::{AcStarkError, Result};
use num_complex::Complex64;

/// Integration options.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Initial step size; `None` selects a conservative fraction of the span.
    pub h_init: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 10_000_000,
            h_init: None,
        }
    }
}

/// Counters describing one integration run.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct OdeStats {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// 5th-order solution weights (also row a7*, enabling FSAL).
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// Embedded 4th-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn axpy(out: &mut [Complex64], base: &[Complex64], coeffs: &[(f64, &[Complex64])], h: f64) {
    for i in 0..out.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in coeffs {
            acc += *c * k[i];
        }
        out[i] = base[i] + h * acc;
    }
}

/// Integrates y' = f(t, y) from `t0` to `t1` (requires `t1 ≥ t0`).
///
/// `f(t, y, dy)` writes the derivative into `dy`. Returns the final state
/// and run statistics. The monitor, when given, sees every accepted step.
pub fn integrate_to<F>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: Vec<Complex64>,
    opts: &OdeOptions,
    mut monitor: Option<&mut dyn FnMut(f64, &[Complex64])>,
) -> Result<(Vec<Complex64>, OdeStats)>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(AcStarkError::Domain(format!(
            "ode integration requires finite t1 >= t0, got [{t0}, {t1}]"
        )));
    }
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) {
        return Err(AcStarkError::Domain(
            "ode tolerances must be positive".to_string(),
        ));
    }
    let n = y0.len();
    let mut stats = OdeStats::default();
    if t1 == t0 || n == 0 {
        return Ok((y0, stats));
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k: Vec<Vec<Complex64>> = (0..7).map(|_| vec![Complex64::new(0.0, 0.0); n]).collect();
    let mut stage = vec![Complex64::new(0.0, 0.0); n];
    let mut y5 = vec![Complex64::new(0.0, 0.0); n];

    f(t, &y, &mut k[0]);
    stats.rhs_evals += 1;

    // Initial step: a conservative fraction of the span, limited by the
    // derivative magnitude so stiff starts do not overshoot.
    let mut h = opts.h_init.unwrap_or_else(|| {
        let ynorm: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let fnorm: f64 = k[0].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let by_rate = if fnorm > 0.0 {
            0.01 * (ynorm.max(opts.abs_tol)) / fnorm
        } else {
            span
        };
        (span * 1e-3).min(by_rate).max(span * 1e-12)
    });

    let min_h = span * 1e-14;
    loop {
        if stats.steps_accepted + stats.steps_rejected >= opts.max_steps {
            return Err(AcStarkError::OdeFailure(format!(
                "step budget {} exhausted at t = {t} (target {t1})",
                opts.max_steps
            )));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        // Stages 2..6.
        {
            let k0 = std::mem::take(&mut k[0]);
            axpy(&mut stage, &y, &[(A2[0], &k0)], h);
            k[0] = k0;
            let mut k1 = std::mem::take(&mut k[1]);
            f(t + C[1] * h, &stage, &mut k1);
            k[1] = k1;
        }
        macro_rules! stage_eval {
            ($row:expr, $ci:expr, $ki:expr) => {{
                let coeffs: Vec<(f64, &[Complex64])> = $row
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| (c, k[j].as_slice()))
                    .collect();
                axpy(&mut stage, &y, &coeffs, h);
                let mut knew = std::mem::take(&mut k[$ki]);
                f(t + $ci * h, &stage, &mut knew);
                k[$ki] = knew;
            }};
        }
        stage_eval!(A3, C[2], 2);
        stage_eval!(A4, C[3], 3);
        stage_eval!(A5, C[4], 4);
        stage_eval!(A6, C[5], 5);
        // 5th-order solution; its derivative is stage 7 (FSAL).
        {
            let coeffs: Vec<(f64, &[Complex64])> = B5
                .iter()
                .enumerate()
                .map(|(j, &c)| (c, k[j].as_slice()))
                .collect();
            axpy(&mut y5, &y, &coeffs, h);
        }
        {
            let mut k7 = std::mem::take(&mut k[6]);
            f(t + h, &y5, &mut k7);
            k[6] = k7;
        }
        stats.rhs_evals += 6;

        // Scaled RMS error between 5th- and embedded 4th-order results.
        let mut err_acc = 0.0;
        for i in 0..n {
            let mut e = Complex64::new(0.0, 0.0);
            for j in 0..7 {
                let diff = if j < 6 { B5[j] - B4[j] } else { -B4[6] };
                e += diff * k[j][i];
            }
            let e = (h * e).norm();
            let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(y5[i].norm());
            err_acc += (e / sc) * (e / sc);
        }
        let err = (err_acc / n as f64).sqrt();

        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y5);
            k.swap(0, 6); // FSAL: derivative at the new point.
            stats.steps_accepted += 1;
            if let Some(m) = monitor.as_mut() {
                m(t, &y);
            }
            if last {
                return Ok((y, stats));
            }
        } else {
            stats.steps_rejected += 1;
        }

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < min_h {
            return Err(AcStarkError::OdeFailure(format!(
                "step size underflow (h = {h:.3e}) at t = {t}; error estimate {err:.3e}"
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_scalar() {
        // y' = −y, y(0) = 1 → e^{−t}.
        let f = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = -y[0];
        };
        let opts = OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            ..Default::default()
        };
        let (y, stats) =
            integrate_to(f, 0.0, 3.0, vec![Complex64::new(1.0, 0.0)], &opts, None).unwrap();
        assert_relative_eq!(y[0].re, (-3.0f64).exp(), max_relative = 1e-8);
        assert!(y[0].im.abs() < 1e-12);
        assert!(stats.steps_accepted > 0);
    }

    #[test]
    fn rotating_phase_preserves_norm() {
        // y' = iωy → |y| constant, arg advances ωt.
        let omega = 2.5;
        let f = move |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = Complex64::new(0.0, omega) * y[0];
        };
        let opts = OdeOptions {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            ..Default::default()
        };
        let (y, _) =
            integrate_to(f, 0.0, 4.0, vec![Complex64::new(1.0, 0.0)], &opts, None).unwrap();
        assert_relative_eq!(y[0].norm(), 1.0, max_relative = 1e-9);
        let expected = Complex64::from_polar(1.0, omega * 4.0);
        assert_relative_eq!(y[0].re, expected.re, epsilon = 1e-8);
        assert_relative_eq!(y[0].im, expected.im, epsilon = 1e-8);
    }

    #[test]
    fn time_dependent_coefficient() {
        // y' = 2t·y → y(1) = e.
        let f = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = 2.0 * t * y[0];
        };
        let (y, _) = integrate_to(
            f,
            0.0,
            1.0,
            vec![Complex64::new(1.0, 0.0)],
            &OdeOptions::default(),
            None,
        )
        .unwrap();
        assert_relative_eq!(y[0].re, std::f64::consts::E, max_relative = 1e-7);
    }

    #[test]
    fn monitor_sees_monotone_times_up_to_target() {
        let f = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = -y[0];
        };
        let mut times = Vec::new();
        let mut mon = |t: f64, _y: &[Complex64]| times.push(t);
        integrate_to(
            f,
            0.0,
            2.0,
            vec![Complex64::new(1.0, 0.0)],
            &OdeOptions::default(),
            Some(&mut mon),
        )
        .unwrap();
        assert!(!times.is_empty());
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*times.last().unwrap(), 2.0);
    }

    #[test]
    fn zero_span_returns_initial_state() {
        let f = |_t: f64, _y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = Complex64::new(1.0, 0.0);
        };
        let (y, stats) = integrate_to(
            f,
            1.0,
            1.0,
            vec![Complex64::new(0.5, -0.5)],
            &OdeOptions::default(),
            None,
        )
        .unwrap();
        assert_eq!(y[0], Complex64::new(0.5, -0.5));
        assert_eq!(stats.steps_accepted, 0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let f = |_t: f64, _y: &[Complex64], _dy: &mut [Complex64]| {};
        assert!(integrate_to(f, 1.0, 0.0, vec![], &OdeOptions::default(), None).is_err());
        let bad = OdeOptions {
            rel_tol: 0.0,
            ..Default::default()
        };
        let f2 = |_t: f64, _y: &[Complex64], _dy: &mut [Complex64]| {};
        assert!(integrate_to(f2, 0.0, 1.0, vec![], &bad, None).is_err());
    }

    #[test]
    fn step_budget_enforced() {
        let f = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = -1000.0 * y[0];
        };
        let opts = OdeOptions {
            max_steps: 3,
            ..Default::default()
        };
        let err = integrate_to(f, 0.0, 100.0, vec![Complex64::new(1.0, 0.0)], &opts, None)
            .unwrap_err();
        assert!(matches!(err, AcStarkError::OdeFailure(_)));
    }
}
