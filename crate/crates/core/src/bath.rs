//! Discrete-mode representation of the Lorentzian laser spectrum.
//!
//! The continuous spectral density is replaced by `n` modes on a uniform
//! midpoint grid spanning `cutoff_widths` linewidths either side of the
//! carrier, each carrying the spectral weight
//!
//! ```text
//! w_k = (Γ_M λ²/π) · Δω / ((ω_k − ω₀)² + λ²),
//! ```
//!
//! so that Σ_k w_k → Γ_M λ as the grid refines and the cutoff grows. The
//! discrete decoherence sum Σ_k w_k (1 − cos ω_k t)/ω_k² converges to the
//! continuum (full-line) closed form; by Poisson summation the midpoint rule
//! is alias-free for the kernel factor once Δω·t < 2π, so the practical
//! resolution requirement is set by the Lorentzian width (Δω ≲ λ/8).
//!
//! The companion phase functional Σ_k (w_k/4)·sin ω_k t is odd in t and
//! appears as the deterministic phase accumulated alongside the decay.

use crate::error::{AcStarkError, Result};
use crate::params::{gamma_markovian, PhysicalParams};
use crate::quad::spectral_kernel;

/// Frequency support of the discretized spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BathDomain {
    /// Modes over the whole sampling window, negative frequencies included.
    FullLine,
    /// Modes at ω ≤ 0 are discarded after sampling.
    PositiveOnly,
}

/// One discrete mode: a frequency and its spectral weight.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BathMode {
    pub omega: f64,
    pub weight: f64,
}

/// Record of how a [`DiscreteBath`] was constructed.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BathSamplingMeta {
    /// Number of modes actually kept (after any domain clipping).
    pub n_modes: usize,
    /// Half-width of the sampling window in units of λ.
    pub cutoff_widths: f64,
    /// Grid spacing.
    pub delta_omega: f64,
    pub domain: BathDomain,
    /// Quadrature rule underlying the weights.
    pub rule: &'static str,
}

/// A sampled bath: modes plus the sampling record.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DiscreteBath {
    pub modes: Vec<BathMode>,
    pub meta: BathSamplingMeta,
}

impl DiscreteBath {
    /// Total spectral weight Σ_k w_k (→ Γ_M λ for a fine, wide grid).
    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }
}

/// Samples the Lorentzian spectrum on a uniform midpoint grid over the full
/// window [ω₀ − cλ, ω₀ + cλ].
///
/// Preconditions: `n_modes ≥ 2`, `cutoff_widths ≥ 10`.
pub fn sample_lorentzian_bath(
    p: &PhysicalParams,
    n_modes: usize,
    cutoff_widths: f64,
) -> Result<DiscreteBath> {
    sample_lorentzian_bath_domain(p, n_modes, cutoff_widths, BathDomain::FullLine)
}

/// Samples the Lorentzian spectrum with an explicit frequency domain.
pub fn sample_lorentzian_bath_domain(
    p: &PhysicalParams,
    n_modes: usize,
    cutoff_widths: f64,
    domain: BathDomain,
) -> Result<DiscreteBath> {
    if n_modes < 2 {
        return Err(AcStarkError::InvalidParameter(format!(
            "bath sampling requires n_modes >= 2, got {n_modes}"
        )));
    }
    if !(cutoff_widths >= 10.0) || !cutoff_widths.is_finite() {
        return Err(AcStarkError::InvalidParameter(format!(
            "bath sampling requires cutoff_widths >= 10, got {cutoff_widths}"
        )));
    }
    let gm = gamma_markovian(p);
    let (w0, lm) = (p.omega0, p.lambda_lw);
    let lo = w0 - cutoff_widths * lm;
    let hi = w0 + cutoff_widths * lm;
    let dw = (hi - lo) / n_modes as f64;
    let prefactor = gm * lm * lm / std::f64::consts::PI;
    let lorentz_weight = |omega: f64, measure: f64| {
        let d = omega - w0;
        prefactor * measure / (d * d + lm * lm)
    };
    // A node numerically at ω = 0 would make the per-mode coupling κ_k =
    // √w_k / 2 ill-defined for the interaction picture (κ/ω divergence in
    // downstream oscillator displacements); split such a node into two
    // half-measure nodes straddling it. The decoherence kernel itself is
    // finite at ω = 0, so this is a representation choice, not a physics one.
    let zero_tol = 1e-12 * lm.max(w0.abs()).max(dw);
    let mut modes = Vec::with_capacity(n_modes + 2);
    for k in 0..n_modes {
        let omega = lo + (k as f64 + 0.5) * dw;
        if omega.abs() < zero_tol {
            for shifted in [omega - 0.25 * dw, omega + 0.25 * dw] {
                modes.push(BathMode {
                    omega: shifted,
                    weight: lorentz_weight(shifted, 0.5 * dw),
                });
            }
        } else {
            modes.push(BathMode {
                omega,
                weight: lorentz_weight(omega, dw),
            });
        }
    }
    if domain == BathDomain::PositiveOnly {
        modes.retain(|m| m.omega > 0.0);
        if modes.is_empty() {
            return Err(AcStarkError::InvalidParameter(
                "positive-only bath sampling kept no modes".to_string(),
            ));
        }
    }
    let n_kept = modes.len();
    Ok(DiscreteBath {
        modes,
        meta: BathSamplingMeta {
            n_modes: n_kept,
            cutoff_widths,
            delta_omega: dw,
            domain,
            rule: "midpoint-uniform",
        },
    })
}

/// Discrete decoherence sum Σ_k w_k (1 − cos ω_k t)/ω_k².
pub fn gamma_discrete(t: f64, bath: &DiscreteBath) -> f64 {
    bath.modes
        .iter()
        .map(|m| m.weight * spectral_kernel(m.omega, t))
        .sum()
}

/// Deterministic phase functional Σ_k (w_k/4)·sin ω_k t (odd in t).
pub fn phase_phi(t: f64, bath: &DiscreteBath) -> f64 {
    bath.modes
        .iter()
        .map(|m| 0.25 * m.weight * (m.omega * t).sin())
        .sum()
}

/// Grid spacing needed for the discrete sum to track the continuum form on
/// [0, t_max]: the finer of λ/8 (resolve the Lorentzian) and π/(4·t_max)
/// (stay well inside the alias-free regime Δω·t < 2π).
pub fn alias_free_spacing(lambda_lw: f64, t_max: f64) -> f64 {
    let by_line = lambda_lw / 8.0;
    if t_max > 0.0 {
        by_line.min(std::f64::consts::FRAC_PI_4 / t_max)
    } else {
        by_line
    }
}

/// Mode count implementing [`alias_free_spacing`] for a given cutoff, clamped
/// to [20 000, 4 000 000].
pub fn auto_mode_count(lambda_lw: f64, cutoff_widths: f64, t_max: f64) -> usize {
    let dw = alias_free_spacing(lambda_lw, t_max);
    let n = (2.0 * cutoff_widths * lambda_lw / dw).ceil();
    (n as usize).clamp(20_000, 4_000_000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dephasing::gamma_continuum_physical;
    use approx::assert_relative_eq;

    fn params_from_qr(q: f64, r: f64) -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0, q * r, r, 1.0).unwrap()
    }

    #[test]
    fn two_modes_are_symmetric_about_carrier() {
        let p = params_from_qr(10.0, 1.0);
        let b = sample_lorentzian_bath(&p, 2, 10.0).unwrap();
        assert_eq!(b.modes.len(), 2);
        let mid = 0.5 * (b.modes[0].omega + b.modes[1].omega);
        assert_relative_eq!(mid, p.omega0, max_relative = 1e-12);
        assert_relative_eq!(b.modes[0].weight, b.modes[1].weight, max_relative = 1e-12);
    }

    #[test]
    fn total_weight_approaches_markovian_rate_times_width() {
        // Σ w_k → Γ_M λ · (2/π) arctan(cutoff); at cutoff 10³ that is
        // Γ_M λ (1 − 2/(π·10³) + …).
        let p = params_from_qr(1.0, 1.0);
        let b = sample_lorentzian_bath(&p, 200_000, 1e3).unwrap();
        let gm = gamma_markovian(&p);
        assert_relative_eq!(
            b.total_weight(),
            gm * p.lambda_lw,
            max_relative = 1.0e-3
        );
    }

    #[test]
    fn preconditions_rejected() {
        let p = params_from_qr(1.0, 1.0);
        assert!(sample_lorentzian_bath(&p, 1, 100.0).is_err());
        assert!(sample_lorentzian_bath(&p, 100, 9.0).is_err());
    }

    #[test]
    fn zero_node_split_keeps_all_frequencies_nonzero() {
        // ω₀ = 0 with an odd mode count puts one midpoint exactly at zero;
        // it must be replaced by two straddling half-measure nodes.
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let b3 = sample_lorentzian_bath(&p, 3, 10.0).unwrap();
        assert_eq!(b3.modes.len(), 4);
        assert!(b3.modes.iter().all(|m| m.omega != 0.0));
        // On a fine grid the split changes nothing measurable: odd (split)
        // and even (no zero node) samplings agree on the total weight.
        let odd = sample_lorentzian_bath(&p, 10_001, 10.0).unwrap();
        assert_eq!(odd.modes.len(), 10_002);
        let even = sample_lorentzian_bath(&p, 10_000, 10.0).unwrap();
        assert_relative_eq!(
            odd.total_weight(),
            even.total_weight(),
            max_relative = 1e-4
        );
    }

    #[test]
    fn positive_only_drops_nonpositive_modes() {
        let p = params_from_qr(0.001, 1.0);
        let full = sample_lorentzian_bath(&p, 1000, 10.0).unwrap();
        let pos =
            sample_lorentzian_bath_domain(&p, 1000, 10.0, BathDomain::PositiveOnly).unwrap();
        assert!(full.modes.iter().any(|m| m.omega < 0.0));
        assert!(pos.modes.iter().all(|m| m.omega > 0.0));
        assert!(pos.modes.len() < full.modes.len());
        assert_eq!(pos.meta.n_modes, pos.modes.len());
    }

    #[test]
    fn discrete_sum_tracks_continuum_form() {
        // (Q = 10, R = 0.01): an alias-free grid reproduces the continuum
        // closed form to well under a percent.
        let p = params_from_qr(10.0, 0.01);
        let t_max: f64 = 5.0;
        let n = auto_mode_count(p.lambda_lw, 1e3, t_max);
        let b = sample_lorentzian_bath(&p, n, 1e3).unwrap();
        for &t in &[0.5, 2.5, 5.0] {
            let reference = gamma_continuum_physical(t, &p);
            assert_relative_eq!(gamma_discrete(t, &b), reference, max_relative = 2e-3);
        }
    }

    #[test]
    fn discrete_sum_error_shrinks_with_mode_count() {
        let p = params_from_qr(1.0, 0.1);
        let t = 2.5;
        let reference = gamma_continuum_physical(t, &p);
        let mut errs = Vec::new();
        for &n in &[2_500usize, 10_000, 40_000] {
            let b = sample_lorentzian_bath(&p, n, 1e3).unwrap();
            errs.push((gamma_discrete(t, &b) - reference).abs());
        }
        assert!(
            errs[0] > errs[1] && errs[1] > errs[2],
            "errors not decreasing: {errs:?}"
        );
    }

    #[test]
    fn phase_is_odd_in_time() {
        let p = params_from_qr(3.0, 0.5);
        let b = sample_lorentzian_bath(&p, 500, 50.0).unwrap();
        for &t in &[0.1, 1.0, 7.3] {
            assert_relative_eq!(phase_phi(-t, &b), -phase_phi(t, &b), max_relative = 1e-12);
        }
        assert_eq!(phase_phi(0.0, &b), 0.0);
    }

    #[test]
    fn auto_mode_count_respects_both_scales() {
        // Linewidth-limited: Δω = λ/8.
        let n = auto_mode_count(0.01, 1e3, 5.0);
        assert_eq!(n, 20_000); // 2·10³·0.01/(0.00125) = 16 000 → clamped up.
        // Alias-limited: Δω = π/(4·t_max) < λ/8.
        let n2 = auto_mode_count(100.0, 1e3, 5.0);
        let dw = std::f64::consts::FRAC_PI_4 / 5.0;
        let expect = ((2.0 * 1e3 * 100.0 / dw).ceil()) as usize;
        assert_eq!(n2, expect.clamp(20_000, 4_000_000));
    }
}
