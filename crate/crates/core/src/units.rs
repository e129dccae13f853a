//! Physical-units layer: dipole matrix elements, mode couplings, and the
//! conversion from lab quantities to [`PhysicalParams`].
//!
//! All frequencies are angular (rad/s) and all quantities SI.  Single-mode
//! couplings g₀ and photon intensities |α₀|² depend on the quantization
//! volume V, but every exported rate is V-free: Γ_s carries V⟨|g₀|²⟩ and the
//! dephasing rate carries |α₀|²/V, and both combinations are independent of
//! V.  Stored `alpha0_sq` values use the fixed reference volume [`V_REF`];
//! only the products above are physical.
//!
//! Solid-angle brackets here mean the plain integral ∫dO over emission
//! directions (not the 1/4π-normalized average): for a dipole pattern
//! ∫dO|g₀|² = 8πω₀|d|²/(3ħε₀V) and ∫dO|g₀|⁴ = 16πω₀²|d|⁴/(5ħ²ε₀²V²), which
//! differ from the square of the former by exactly 9/(20π).

use crate::error::{AcStarkError, Result};
use crate::params::PhysicalParams;

/// Reduced Planck constant [J·s], CODATA 2018.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity [F/m], CODATA 2018.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light [m/s], exact.
pub const C_LIGHT: f64 = 299_792_458.0;
/// Reference quantization volume [m³] fixing the stored |α₀|² convention.
pub const V_REF: f64 = 1.0;

/// A two-level emitter described by its dipole matrix element |d| [C·m] and
/// transition frequency ω₀ [rad/s].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DipoleAtom {
    pub dipole_d: f64,
    pub omega0: f64,
}

impl DipoleAtom {
    pub fn new(dipole_d: f64, omega0: f64) -> Result<Self> {
        if !dipole_d.is_finite() || dipole_d <= 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "dipole matrix element must be finite and > 0, got {dipole_d}"
            )));
        }
        if !omega0.is_finite() || omega0 <= 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "transition frequency must be finite and > 0, got {omega0}"
            )));
        }
        Ok(Self { dipole_d, omega0 })
    }
}

/// Frequency dependence of the single-mode coupling,
/// g(ω) = −(g₀/2)·√(ω₀/ω) for ω > 0.
pub fn coupling_g(omega: f64, g0: f64, omega0: f64) -> Result<f64> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(AcStarkError::Domain(format!(
            "mode frequency must be finite and > 0, got {omega}"
        )));
    }
    if !g0.is_finite() || !omega0.is_finite() || omega0 <= 0.0 {
        return Err(AcStarkError::InvalidParameter(
            "g0 must be finite and omega0 finite and > 0".to_string(),
        ));
    }
    Ok(-(g0 / 2.0) * (omega0 / omega).sqrt())
}

/// Spontaneous decay rate Γ_s = ω₀³|d|²/(3πħε₀c³) [rad/s].
pub fn gamma_s_standard(atom: &DipoleAtom) -> f64 {
    let d2 = atom.dipole_d * atom.dipole_d;
    atom.omega0.powi(3) * d2 / (3.0 * std::f64::consts::PI * HBAR * EPSILON_0 * C_LIGHT.powi(3))
}

/// Inverts [`gamma_s_standard`]: |d| = √(3πħε₀c³·Γ_s/ω₀³).
pub fn dipole_from_gamma_s(gamma_s: f64, omega0: f64) -> Result<f64> {
    if !gamma_s.is_finite() || gamma_s <= 0.0 || !omega0.is_finite() || omega0 <= 0.0 {
        return Err(AcStarkError::InvalidParameter(
            "decay rate and transition frequency must be finite and > 0".to_string(),
        ));
    }
    Ok((3.0 * std::f64::consts::PI * HBAR * EPSILON_0 * C_LIGHT.powi(3) * gamma_s
        / omega0.powi(3))
    .sqrt())
}

fn validate_volume(volume: f64) -> Result<()> {
    if !volume.is_finite() || volume <= 0.0 {
        return Err(AcStarkError::InvalidParameter(format!(
            "quantization volume must be finite and > 0, got {volume}"
        )));
    }
    Ok(())
}

/// Solid-angle integral of the squared coupling,
/// ∫dO|g₀|² = 8πω₀|d|²/(3ħε₀V).
pub fn solid_angle_avg_g0sq(atom: &DipoleAtom, volume: f64) -> Result<f64> {
    validate_volume(volume)?;
    let d2 = atom.dipole_d * atom.dipole_d;
    Ok(8.0 * std::f64::consts::PI * atom.omega0 * d2 / (3.0 * HBAR * EPSILON_0 * volume))
}

/// Solid-angle integral of the fourth power of the coupling,
/// ∫dO|g₀|⁴ = 16πω₀²|d|⁴/(5ħ²ε₀²V²) — the combination entering the
/// dephasing rate, which weights emission directions differently from
/// [`solid_angle_avg_g0sq`] squared (ratio exactly 9/(20π)).
pub fn solid_angle_int_g0_fourth(atom: &DipoleAtom, volume: f64) -> Result<f64> {
    validate_volume(volume)?;
    let d2 = atom.dipole_d * atom.dipole_d;
    Ok(
        16.0 * std::f64::consts::PI * atom.omega0 * atom.omega0 * d2 * d2
            / (5.0 * HBAR * HBAR * EPSILON_0 * EPSILON_0 * volume * volume),
    )
}

/// Γ_s reassembled from the free-space mode density,
/// V·∫dO|g₀|²·ω₀²/(8π²c³); the volume cancels and the result equals
/// [`gamma_s_standard`] identically.
pub fn gamma_s_from_mode_sum(atom: &DipoleAtom, volume: f64) -> Result<f64> {
    let g0sq = solid_angle_avg_g0sq(atom, volume)?;
    Ok(volume * g0sq * atom.omega0 * atom.omega0
        / (8.0 * std::f64::consts::PI.powi(2) * C_LIGHT.powi(3)))
}

/// Markovian dephasing rate from the dipole route,
/// Γ_M = ω₀⁴|α₀_V|²|d|⁴/(5π³ħ²ε₀²c³VΔ²), where |α₀_V|² is the peak photon
/// intensity in volume V.  Equals V·ω₀²|α₀_V|²·∫dO|g₀|⁴/(16π⁴c³Δ²) with the
/// V-dependences cancelling, so the value is invariant under a change of
/// quantization volume at fixed physical intensity |α₀_V|²/V.
pub fn gamma_m_dipole_route(
    atom: &DipoleAtom,
    volume: f64,
    alpha0_sq: f64,
    detuning: f64,
) -> Result<f64> {
    validate_volume(volume)?;
    if !alpha0_sq.is_finite() || alpha0_sq < 0.0 {
        return Err(AcStarkError::InvalidParameter(format!(
            "photon intensity must be finite and >= 0, got {alpha0_sq}"
        )));
    }
    if !detuning.is_finite() || detuning == 0.0 {
        return Err(AcStarkError::Domain(
            "dipole-route rate requires a nonzero finite detuning".to_string(),
        ));
    }
    let d2 = atom.dipole_d * atom.dipole_d;
    let pi = std::f64::consts::PI;
    Ok(atom.omega0.powi(4) * alpha0_sq * d2 * d2
        / (5.0 * pi.powi(3) * HBAR * HBAR * EPSILON_0 * EPSILON_0 * C_LIGHT.powi(3)
            * volume
            * detuning
            * detuning))
}

/// Drive strength given either directly as a Rabi amplitude, as a photon
/// intensity |α₀|² (in the [`V_REF`] convention), or as both for an
/// over-determined consistency check.
#[derive(Debug, Clone, Copy)]
pub enum RabiOrIntensity {
    Rabi(f64),
    Intensity(f64),
    Both { omega_rabi: f64, alpha0_sq: f64 },
}

/// Relative tolerance on the two drive routes when both are supplied.
pub const OVERDETERMINED_TOL: f64 = 1e-6;

/// Assembles a [`PhysicalParams`] from lab quantities: the emitter, the
/// laser linewidth λ [rad/s], the detuning Δ [rad/s], and the drive
/// strength.  The missing member of the (Ω, |α₀|²) pair is filled in through
/// the dephasing-rate identity Γ_s Ω²/Δ² = Γ_M(dipole route), so the two
/// descriptions are interchangeable; supplying both checks them against each
/// other at [`OVERDETERMINED_TOL`].  Reported Ω is non-negative (its sign
/// never enters any rate).
pub fn lab_to_params(
    atom: &DipoleAtom,
    linewidth: f64,
    detuning: f64,
    drive: RabiOrIntensity,
) -> Result<PhysicalParams> {
    if !linewidth.is_finite() || linewidth <= 0.0 {
        return Err(AcStarkError::InvalidParameter(format!(
            "linewidth must be finite and > 0, got {linewidth}"
        )));
    }
    if !detuning.is_finite() || detuning == 0.0 {
        return Err(AcStarkError::InvalidParameter(
            "detuning must be finite and nonzero".to_string(),
        ));
    }
    let gamma_s = gamma_s_standard(atom);
    // Dephasing rate per unit |α₀|² at the reference volume.
    let rate_per_intensity = gamma_m_dipole_route(atom, V_REF, 1.0, detuning)?;
    let (omega_rabi, alpha0_sq) = match drive {
        RabiOrIntensity::Rabi(omega) => {
            if !omega.is_finite() {
                return Err(AcStarkError::InvalidParameter(
                    "Rabi amplitude must be finite".to_string(),
                ));
            }
            let gamma_m = gamma_s * omega * omega / (detuning * detuning);
            (omega.abs(), gamma_m / rate_per_intensity)
        }
        RabiOrIntensity::Intensity(alpha0_sq) => {
            if !alpha0_sq.is_finite() || alpha0_sq < 0.0 {
                return Err(AcStarkError::InvalidParameter(format!(
                    "photon intensity must be finite and >= 0, got {alpha0_sq}"
                )));
            }
            let gamma_m = rate_per_intensity * alpha0_sq;
            (detuning.abs() * (gamma_m / gamma_s).sqrt(), alpha0_sq)
        }
        RabiOrIntensity::Both {
            omega_rabi,
            alpha0_sq,
        } => {
            if !omega_rabi.is_finite() || !alpha0_sq.is_finite() || alpha0_sq < 0.0 {
                return Err(AcStarkError::InvalidParameter(
                    "Rabi amplitude must be finite and intensity finite and >= 0".to_string(),
                ));
            }
            let via_rabi = gamma_s * omega_rabi * omega_rabi / (detuning * detuning);
            let via_intensity = rate_per_intensity * alpha0_sq;
            let scale = via_rabi.abs().max(via_intensity.abs());
            if (via_rabi - via_intensity).abs() > OVERDETERMINED_TOL * scale {
                return Err(AcStarkError::InvalidParameter(format!(
                    "over-determined drive is inconsistent: rate {via_rabi:.6e} from Ω \
                     vs {via_intensity:.6e} from |α₀|²"
                )));
            }
            (omega_rabi.abs(), alpha0_sq)
        }
    };
    PhysicalParams::new(
        gamma_s,
        omega_rabi,
        detuning,
        atom.omega0,
        linewidth,
        alpha0_sq,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{gamma_markovian, DimensionlessParams};
    use approx::assert_relative_eq;

    fn test_atom() -> DipoleAtom {
        // Dipole reproducing Γ_s = 1.9e7 rad/s at ω₀ = 3e14 rad/s exactly.
        let d = dipole_from_gamma_s(1.9e7, 3.0e14).unwrap();
        DipoleAtom::new(d, 3.0e14).unwrap()
    }

    #[test]
    fn coupling_frequency_dependence() {
        assert_relative_eq!(coupling_g(2.0, 3.0, 2.0).unwrap(), -1.5, epsilon = 1e-15);
        assert_relative_eq!(
            coupling_g(8.0, 3.0, 2.0).unwrap(),
            -1.5 * 0.5,
            epsilon = 1e-15
        );
        assert!(coupling_g(0.0, 1.0, 1.0).is_err());
        assert!(coupling_g(-2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn dipole_and_decay_rate_invert_each_other() {
        let d = dipole_from_gamma_s(1.9e7, 3.0e14).unwrap();
        assert_relative_eq!(d, 4.0845e-28, max_relative = 1e-4);
        let atom = DipoleAtom::new(d, 3.0e14).unwrap();
        assert_relative_eq!(gamma_s_standard(&atom), 1.9e7, max_relative = 1e-12);
    }

    #[test]
    fn volume_cancels_in_mode_sum_decay_rate() {
        let atom = test_atom();
        let reference = gamma_s_standard(&atom);
        for volume in [1e-9, 1e-3, 1.0, 1e6] {
            assert_relative_eq!(
                gamma_s_from_mode_sum(&atom, volume).unwrap(),
                reference,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn solid_angle_fourth_moment_ratio() {
        // The dipole emission pattern fixes ∫dO g⁴ = (9/20π)·(∫dO g²)².
        let atom = test_atom();
        for volume in [0.5, 1.0, 42.0] {
            let sq = solid_angle_avg_g0sq(&atom, volume).unwrap();
            let fourth = solid_angle_int_g0_fourth(&atom, volume).unwrap();
            assert_relative_eq!(
                fourth,
                sq * sq * 9.0 / (20.0 * std::f64::consts::PI),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn dipole_route_rate_is_volume_invariant() {
        // Fixed physical intensity |α₀|²/V: doubling V with |α₀|² leaves the
        // rate unchanged, and the chained form through ∫dO g⁴ matches the
        // closed form.
        let atom = test_atom();
        let delta = 1.0e9;
        let base = gamma_m_dipole_route(&atom, 1.0, 2.0, delta).unwrap();
        for scale in [1e-3, 7.0, 1e4] {
            let scaled = gamma_m_dipole_route(&atom, scale, 2.0 * scale, delta).unwrap();
            assert_relative_eq!(scaled, base, max_relative = 1e-12);
        }
        for volume in [1e-6, 1.0, 1e3] {
            let chained = volume * atom.omega0 * atom.omega0 * 2.0
                * solid_angle_int_g0_fourth(&atom, volume).unwrap()
                / (16.0 * std::f64::consts::PI.powi(4) * C_LIGHT.powi(3) * delta * delta);
            assert_relative_eq!(
                chained,
                gamma_m_dipole_route(&atom, volume, 2.0, delta).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn lab_conversion_round_trips_between_drive_forms() {
        let atom = test_atom();
        let p = lab_to_params(&atom, 1.0e4, 1.0e9, RabiOrIntensity::Rabi(0.23e9)).unwrap();
        assert_relative_eq!(p.gamma_s, 1.9e7, max_relative = 1e-12);
        assert_relative_eq!(p.omega_rabi, 0.23e9, epsilon = 1e-12);
        // Feeding the implied intensity back must reproduce the same Ω and
        // satisfy the rate identity both ways.
        let p2 = lab_to_params(
            &atom,
            1.0e4,
            1.0e9,
            RabiOrIntensity::Intensity(p.alpha0_sq),
        )
        .unwrap();
        assert_relative_eq!(p2.omega_rabi, p.omega_rabi, max_relative = 1e-12);
        assert_relative_eq!(
            gamma_markovian(&p2),
            gamma_m_dipole_route(&atom, V_REF, p.alpha0_sq, 1.0e9).unwrap(),
            max_relative = 1e-10
        );
        let p3 = lab_to_params(
            &atom,
            1.0e4,
            1.0e9,
            RabiOrIntensity::Both {
                omega_rabi: 0.23e9,
                alpha0_sq: p.alpha0_sq,
            },
        )
        .unwrap();
        assert_relative_eq!(p3.alpha0_sq, p.alpha0_sq, max_relative = 1e-12);
    }

    #[test]
    fn inconsistent_overdetermined_drive_is_rejected() {
        let atom = test_atom();
        let p = lab_to_params(&atom, 1.0e4, 1.0e9, RabiOrIntensity::Rabi(0.23e9)).unwrap();
        let bad = lab_to_params(
            &atom,
            1.0e4,
            1.0e9,
            RabiOrIntensity::Both {
                omega_rabi: 0.23e9,
                alpha0_sq: 2.0 * p.alpha0_sq,
            },
        );
        assert!(bad.is_err());
    }

    #[test]
    fn zero_intensity_gives_zero_drive() {
        let atom = test_atom();
        let p = lab_to_params(&atom, 1.0e4, 1.0e9, RabiOrIntensity::Intensity(0.0)).unwrap();
        assert_eq!(p.omega_rabi, 0.0);
        assert_eq!(p.alpha0_sq, 0.0);
        assert!(DimensionlessParams::from_physical(&p).is_err());
    }

    #[test]
    fn alkali_d_line_lands_in_memory_dominated_regime() {
        // A near-infrared D-line-class emitter (Γ_s ≈ 1.9e7 rad/s at
        // ω₀ ≈ 3e14 rad/s) driven through kHz–MHz-class linewidth lasers
        // sits at enormous Q with R < 1: the suppressed regime is the
        // laboratory default, not an exotic corner.
        let atom = test_atom();
        for linewidth in [1.0e3, 1.0e6] {
            let p = lab_to_params(&atom, linewidth, 1.0e9, RabiOrIntensity::Rabi(0.23e9)).unwrap();
            let d = DimensionlessParams::from_physical(&p).unwrap();
            assert!(d.q >= 3.0e8 && d.q <= 3.0e11, "q = {:.3e}", d.q);
            assert!(d.r < 1.0, "r = {:.3e}", d.r);
        }
    }

    #[test]
    fn invalid_lab_inputs_are_rejected() {
        let atom = test_atom();
        assert!(DipoleAtom::new(0.0, 1.0).is_err());
        assert!(DipoleAtom::new(1e-29, -1.0).is_err());
        assert!(lab_to_params(&atom, 0.0, 1.0e9, RabiOrIntensity::Rabi(1.0)).is_err());
        assert!(lab_to_params(&atom, 1.0e4, 0.0, RabiOrIntensity::Rabi(1.0)).is_err());
        assert!(lab_to_params(&atom, 1.0e4, 1.0e9, RabiOrIntensity::Intensity(-1.0)).is_err());
        assert!(gamma_m_dipole_route(&atom, 1.0, 1.0, 0.0).is_err());
        assert!(solid_angle_avg_g0sq(&atom, 0.0).is_err());
    }
}
