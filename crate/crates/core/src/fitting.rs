//! Least-squares rate extraction and peak detection for decay curves.

use crate::error::{AcStarkError, Result};

/// Result of a log-linear exponential fit v(t) ≈ A·e^(−rate·t).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ExpFit {
    /// Decay rate (positive for decaying data).
    pub rate: f64,
    /// Fitted amplitude A.
    pub amplitude: f64,
    /// RMS residual of ln v about the fitted line.
    pub rms_log_residual: f64,
    /// Decades spanned by the data, log₁₀(v_first/v_last).
    pub decades: f64,
    pub n_points: usize,
}

/// Fits ln v = ln A − rate·t by least squares.
///
/// Requires ≥ 2 samples with strictly increasing finite times and strictly
/// positive finite values.
pub fn fit_exponential_decay(times: &[f64], values: &[f64]) -> Result<ExpFit> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(AcStarkError::FitRejected(format!(
            "exponential fit needs >= 2 matching samples, got {} times / {} values",
            times.len(),
            values.len()
        )));
    }
    if !times.iter().all(|t| t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AcStarkError::FitRejected(
            "fit times must be finite and strictly increasing".to_string(),
        ));
    }
    if !values.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(AcStarkError::FitRejected(
            "fit values must be finite and positive".to_string(),
        ));
    }
    let n = times.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let t_mean = times.iter().sum::<f64>() / n;
    let l_mean = logs.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stl = 0.0;
    for (&t, &l) in times.iter().zip(logs.iter()) {
        stt += (t - t_mean) * (t - t_mean);
        stl += (t - t_mean) * (l - l_mean);
    }
    let slope = stl / stt;
    let intercept = l_mean - slope * t_mean;
    let mut ss_res = 0.0;
    for (&t, &l) in times.iter().zip(logs.iter()) {
        let r = l - (intercept + slope * t);
        ss_res += r * r;
    }
    Ok(ExpFit {
        rate: -slope,
        amplitude: intercept.exp(),
        rms_log_residual: (ss_res / n).sqrt(),
        decades: (logs[0] - logs[logs.len() - 1]) / std::f64::consts::LN_10,
        n_points: times.len(),
    })
}

/// Strict interior local maxima of a sampled curve, as (time, value) pairs.
pub fn local_maxima(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut peaks = Vec::new();
    if times.len() != values.len() {
        return peaks;
    }
    for i in 1..values.len().saturating_sub(1) {
        if values[i] > values[i - 1] && values[i] > values[i + 1] {
            peaks.push((times[i], values[i]));
        }
    }
    peaks
}
