//! Truncated-Fock-space oracle for the dephasing mechanism.
//!
//! A small set of oscillator modes is driven by the two internal states with
//! opposite signs: in the interaction picture the branch Hamiltonian is
//!
//! ```text
//! H_σ(t) = σ Σ_k κ_k (a_k† e^{iω_k t} + a_k e^{−iω_k t}),   σ = ±1.
//! ```
//!
//! Each branch displaces the oscillators coherently; the overlap of the two
//! branch states reproduces the discrete decoherence sum exactly,
//!
//! ```text
//! |⟨ψ₋(t)|ψ₊(t)⟩| = exp(−Σ_k 4κ_k² (1 − cos ω_k t)/ω_k²),
//! ```
//!
//! with weight w_k = 4κ_k² (κ_k = √w_k / 2), and with zero relative phase
//! because the global (Magnus) phase is σ-independent. Evolving both branches
//! numerically in a truncated Fock space therefore checks the entire
//! mechanism — displacement dynamics, overlap, phase — independently of the
//! closed forms. Population reaching the top Fock level is tracked as
//! `leakage`; a large value flags an untrustworthy truncation.

use crate::bath::BathMode;
use crate::error::{AcStarkError, Result};
use crate::ode::{integrate_to, OdeOptions, OdeStats};
use num_complex::Complex64;

/// Maximum number of modes (state dimension is truncation^n_modes).
pub const MAX_FOCK_MODES: usize = 4;
/// Maximum per-mode truncation.
pub const MAX_TRUNCATION: usize = 64;
/// Leakage above this threshold sets the truncation warning.
pub const LEAKAGE_WARN: f64 = 1e-6;

/// One driven mode: frequency and coupling strength.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DriveMode {
    pub omega: f64,
    pub kappa: f64,
}

/// The model evolved by [`evolve_fock`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct InteractionModel {
    modes: Vec<DriveMode>,
    truncation: usize,
}

impl InteractionModel {
    /// Validates 1–4 modes with positive finite frequencies, non-negative
    /// finite couplings, and truncation in 2..=64.
    pub fn new(modes: Vec<DriveMode>, truncation: usize) -> Result<Self> {
        if modes.is_empty() || modes.len() > MAX_FOCK_MODES {
            return Err(AcStarkError::InvalidParameter(format!(
                "interaction model requires 1..={MAX_FOCK_MODES} modes, got {}",
                modes.len()
            )));
        }
        if !(2..=MAX_TRUNCATION).contains(&truncation) {
            return Err(AcStarkError::InvalidParameter(format!(
                "truncation must lie in 2..={MAX_TRUNCATION}, got {truncation}"
            )));
        }
        for (i, m) in modes.iter().enumerate() {
            if !(m.omega > 0.0) || !m.omega.is_finite() {
                return Err(AcStarkError::InvalidParameter(format!(
                    "mode {i}: frequency must be positive and finite, got {}",
                    m.omega
                )));
            }
            if !(m.kappa >= 0.0) || !m.kappa.is_finite() {
                return Err(AcStarkError::InvalidParameter(format!(
                    "mode {i}: coupling must be non-negative and finite, got {}",
                    m.kappa
                )));
            }
        }
        Ok(InteractionModel { modes, truncation })
    }

    /// Builds a model from sampled bath modes with κ = √w / 2.
    pub fn from_bath_modes(modes: &[BathMode], truncation: usize) -> Result<Self> {
        let drive = modes
            .iter()
            .map(|m| {
                if m.weight < 0.0 {
                    return Err(AcStarkError::InvalidParameter(format!(
                        "negative bath weight {} cannot define a coupling",
                        m.weight
                    )));
                }
                Ok(DriveMode {
                    omega: m.omega,
                    kappa: 0.5 * m.weight.sqrt(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        InteractionModel::new(drive, truncation)
    }

    pub fn modes(&self) -> &[DriveMode] {
        &self.modes
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// State dimension truncation^n_modes.
    pub fn dim(&self) -> usize {
        self.truncation.pow(self.modes.len() as u32)
    }

    /// The discrete decoherence exponent Σ_k 4κ_k²(1 − cos ω_k t)/ω_k² this
    /// model should realize.
    pub fn expected_gamma(&self, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                4.0 * m.kappa * m.kappa * crate::quad::spectral_kernel(m.omega, t)
            })
            .sum()
    }
}

/// Result of evolving both branches to time `t`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FockEvolution {
    /// |⟨ψ₋|ψ₊⟩|: the coherence factor.
    pub coherence_mag: f64,
    /// arg⟨ψ₋|ψ₊⟩: should vanish (the Magnus phase is branch-independent).
    pub relative_phase: f64,
    /// Largest population seen at any mode's top Fock level across both
    /// branches and all accepted steps.
    pub leakage: f64,
    /// True when `leakage` exceeds [`LEAKAGE_WARN`]: the truncation is too
    /// small for the requested couplings/time.
    pub truncation_warning: bool,
    pub stats: OdeStats,
}

/// Derivative of one branch: dψ = −iσ Σ_k κ_k (e^{iω_k t} a_k† + h.c.) ψ.
fn branch_rhs(
    model: &InteractionModel,
    sigma: f64,
    t: f64,
    psi: &[Complex64],
    out: &mut [Complex64],
) {
    for v in out.iter_mut() {
        *v = Complex64::new(0.0, 0.0);
    }
    let trunc = model.truncation;
    let mut stride = 1usize;
    for mode in &model.modes {
        let phase = Complex64::from_polar(mode.kappa, mode.omega * t);
        for (idx, amp) in psi.iter().enumerate() {
            if amp.re == 0.0 && amp.im == 0.0 {
                continue;
            }
            let n = (idx / stride) % trunc;
            if n + 1 < trunc {
                out[idx + stride] += phase * ((n + 1) as f64).sqrt() * amp;
            }
            if n > 0 {
                out[idx - stride] += phase.conj() * (n as f64).sqrt() * amp;
            }
        }
        stride *= trunc;
    }
    let factor = Complex64::new(0.0, -sigma);
    for v in out.iter_mut() {
        *v *= factor;
    }
}

/// Total population with any mode at its top Fock level.
fn top_level_population(model: &InteractionModel, psi: &[Complex64]) -> f64 {
    let trunc = model.truncation;
    let n_modes = model.modes.len();
    psi.iter()
        .enumerate()
        .filter(|(idx, _)| {
            let mut rem = *idx;
            for _ in 0..n_modes {
                if rem % trunc == trunc - 1 {
                    return true;
                }
                rem /= trunc;
            }
            false
        })
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Evolves both internal-state branches from the oscillator vacuum to time
/// `t` and reports the branch overlap.
pub fn evolve_fock(model: &InteractionModel, t: f64, ode_tol: f64) -> Result<FockEvolution> {
    if !t.is_finite() || t < 0.0 {
        return Err(AcStarkError::Domain(format!(
            "fock evolution requires finite t >= 0, got {t}"
        )));
    }
    if !(ode_tol > 0.0 && ode_tol < 1e-2) {
        return Err(AcStarkError::Domain(format!(
            "ode tolerance must lie in (0, 1e-2), got {ode_tol}"
        )));
    }
    if t == 0.0 {
        return Ok(FockEvolution {
            coherence_mag: 1.0,
            relative_phase: 0.0,
            leakage: 0.0,
            truncation_warning: false,
            stats: OdeStats::default(),
        });
    }
    let dim = model.dim();
    let mut vacuum = vec![Complex64::new(0.0, 0.0); dim];
    vacuum[0] = Complex64::new(1.0, 0.0);
    let opts = OdeOptions {
        rel_tol: ode_tol,
        abs_tol: ode_tol * 1e-2,
        ..Default::default()
    };
    let mut leakage = 0.0f64;
    let mut total_stats = OdeStats::default();
    let mut finals: Vec<Vec<Complex64>> = Vec::with_capacity(2);
    for sigma in [1.0, -1.0] {
        let rhs = |tt: f64, y: &[Complex64], dy: &mut [Complex64]| {
            branch_rhs(model, sigma, tt, y, dy);
        };
        let mut mon = |_tt: f64, y: &[Complex64]| {
            let p = top_level_population(model, y);
            if p > leakage {
                leakage = p;
            }
        };
        let (y, stats) = integrate_to(rhs, 0.0, t, vacuum.clone(), &opts, Some(&mut mon))
            .map_err(|e| AcStarkError::OracleMethod {
                method: "fock".to_string(),
                source: Box::new(e),
            })?;
        total_stats.steps_accepted += stats.steps_accepted;
        total_stats.steps_rejected += stats.steps_rejected;
        total_stats.rhs_evals += stats.rhs_evals;
        finals.push(y);
    }
    let overlap: Complex64 = finals[1]
        .iter()
        .zip(finals[0].iter())
        .map(|(m, p)| m.conj() * p)
        .sum();
    Ok(FockEvolution {
        coherence_mag: overlap.norm(),
        relative_phase: overlap.arg(),
        leakage,
        truncation_warning: leakage > LEAKAGE_WARN,
        stats: total_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn validation_limits() {
        assert!(InteractionModel::new(vec![], 8).is_err());
        let m = DriveMode {
            omega: 1.0,
            kappa: 0.1,
        };
        assert!(InteractionModel::new(vec![m; 5], 8).is_err());
        assert!(InteractionModel::new(vec![m], 1).is_err());
        assert!(InteractionModel::new(vec![m], 65).is_err());
        assert!(InteractionModel::new(
            vec![DriveMode {
                omega: -1.0,
                kappa: 0.1
            }],
            8
        )
        .is_err());
        assert!(InteractionModel::new(vec![m; 2], 16).is_ok());
    }

    #[test]
    fn zero_time_trivial() {
        let m = InteractionModel::new(
            vec![DriveMode {
                omega: 1.0,
                kappa: 0.2,
            }],
            8,
        )
        .unwrap();
        let ev = evolve_fock(&m, 0.0, 1e-8).unwrap();
        assert_eq!(ev.coherence_mag, 1.0);
        assert_eq!(ev.relative_phase, 0.0);
        assert_eq!(ev.leakage, 0.0);
    }

    #[test]
    fn single_mode_matches_displacement_formula() {
        // ω = 1, κ = 0.1, t = π: Γ = 4κ²(1 − cos π)/1 = 0.08.
        let model = InteractionModel::new(
            vec![DriveMode {
                omega: 1.0,
                kappa: 0.1,
            }],
            16,
        )
        .unwrap();
        let t = std::f64::consts::PI;
        let ev = evolve_fock(&model, t, 1e-9).unwrap();
        let expected = (-model.expected_gamma(t)).exp();
        assert_relative_eq!(ev.coherence_mag, expected, epsilon = 1e-6);
        assert!(
            ev.relative_phase.abs() < 1e-6,
            "relative phase {} should vanish",
            ev.relative_phase
        );
        assert!(!ev.truncation_warning, "leakage {}", ev.leakage);
    }

    #[test]
    fn two_modes_match_discrete_sum() {
        let model = InteractionModel::new(
            vec![
                DriveMode {
                    omega: 0.8,
                    kappa: 0.07,
                },
                DriveMode {
                    omega: 1.9,
                    kappa: 0.05,
                },
            ],
            12,
        )
        .unwrap();
        for &t in &[0.7, 2.0, 4.5] {
            let ev = evolve_fock(&model, t, 1e-9).unwrap();
            let expected = (-model.expected_gamma(t)).exp();
            assert_relative_eq!(ev.coherence_mag, expected, epsilon = 1e-6);
            assert!(ev.relative_phase.abs() < 1e-6);
        }
    }

    #[test]
    fn leakage_flags_small_truncation() {
        // Strong coupling with a tiny truncation must light the warning.
        let model = InteractionModel::new(
            vec![DriveMode {
                omega: 0.5,
                kappa: 1.0,
            }],
            3,
        )
        .unwrap();
        let ev = evolve_fock(&model, 3.0, 1e-8).unwrap();
        assert!(ev.truncation_warning);
        assert!(ev.leakage > 1e-3);
    }

    #[test]
    fn coupling_from_bath_weight_round_trip() {
        let bath_modes = [
            BathMode {
                omega: 1.0,
                weight: 0.04,
            },
            BathMode {
                omega: 2.0,
                weight: 0.09,
            },
        ];
        let model = InteractionModel::from_bath_modes(&bath_modes, 8).unwrap();
        assert_relative_eq!(model.modes()[0].kappa, 0.1, max_relative = 1e-15);
        assert_relative_eq!(model.modes()[1].kappa, 0.15, max_relative = 1e-15);
        // 4κ² reproduces the weights.
        for (dm, bm) in model.modes().iter().zip(bath_modes.iter()) {
            assert_relative_eq!(4.0 * dm.kappa * dm.kappa, bm.weight, max_relative = 1e-12);
        }
    }

    #[test]
    fn time_domain_enforced() {
        let m = InteractionModel::new(
            vec![DriveMode {
                omega: 1.0,
                kappa: 0.1,
            }],
            8,
        )
        .unwrap();
        assert!(evolve_fock(&m, -1.0, 1e-8).is_err());
        assert!(evolve_fock(&m, 1.0, 0.0).is_err());
        assert!(evolve_fock(&m, 1.0, 0.5).is_err());
    }
}
