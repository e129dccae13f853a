//! Physical and dimensionless parameter sets, and the elementary rates
//! (Markovian dephasing rate, suppressed rate, light shift) built from them.
//!
//! All frequencies and rates are angular (rad/s) throughout the crate; helper
//! conversions from ordinary frequency live in [`crate::units`]. The
//! dimensionless description uses the laser quality factor `Q = omega0 /
//! lambda` and the ratio `R = lambda / gamma_m`, which together fully
//! parameterize the dimensionless decoherence function.

use serde::Serialize;

use crate::error::{AcStarkError, Result};

/// Laser/atom parameters in physical (angular-frequency) units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Spontaneous decay rate Γ_s of the excited level [rad/s].
    pub gamma_s: f64,
    /// Laser–transition coupling (Rabi frequency) Ω [rad/s].
    pub omega_rabi: f64,
    /// Laser detuning Δ from the atomic transition [rad/s]; nonzero.
    pub detuning: f64,
    /// Laser center frequency ω₀ [rad/s].
    pub omega0: f64,
    /// Lorentzian half-width at half-maximum λ of the laser spectrum [rad/s].
    pub lambda_lw: f64,
    /// Peak photon-number intensity |α₀|² (dimensionless; reference-volume
    /// convention documented in [`crate::units`]).
    pub alpha0_sq: f64,
}

impl PhysicalParams {
    /// Validates and constructs a physical parameter set.
    ///
    /// Requirements: `gamma_s > 0`, `lambda_lw > 0`, `omega0 >= 0`,
    /// `detuning != 0`, `alpha0_sq >= 0`, and every field finite. The
    /// adiabatic-elimination quality `|detuning| >= 10 |omega_rabi|` is *not*
    /// enforced here; check [`Self::is_adiabatic`] and warn when appropriate.
    pub fn new(
        gamma_s: f64,
        omega_rabi: f64,
        detuning: f64,
        omega0: f64,
        lambda_lw: f64,
        alpha0_sq: f64,
    ) -> Result<Self> {
        let all = [gamma_s, omega_rabi, detuning, omega0, lambda_lw, alpha0_sq];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(AcStarkError::InvalidParameter(
                "physical parameters must be finite".into(),
            ));
        }
        if gamma_s <= 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "gamma_s must be positive, got {gamma_s}"
            )));
        }
        if lambda_lw <= 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "lambda_lw must be positive, got {lambda_lw}"
            )));
        }
        if omega0 < 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "omega0 must be non-negative, got {omega0}"
            )));
        }
        if detuning == 0.0 {
            return Err(AcStarkError::InvalidParameter(
                "detuning must be nonzero".into(),
            ));
        }
        if alpha0_sq < 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "alpha0_sq must be non-negative, got {alpha0_sq}"
            )));
        }
        Ok(Self {
            gamma_s,
            omega_rabi,
            detuning,
            omega0,
            lambda_lw,
            alpha0_sq,
        })
    }

    /// Ratio |Δ/Ω| measuring the quality of adiabatic elimination
    /// (infinite when Ω = 0).
    pub fn adiabatic_ratio(&self) -> f64 {
        (self.detuning / self.omega_rabi).abs()
    }

    /// True when |Δ| ≥ 10 |Ω|, the regime in which the effective two-level
    /// dephasing description is reliable. Below this ratio callers should
    /// warn rather than error.
    pub fn is_adiabatic(&self) -> bool {
        self.detuning.abs() >= 10.0 * self.omega_rabi.abs()
    }
}

/// The two dimensionless knobs of the decoherence function:
/// `q = omega0/lambda` (laser quality factor) and `r = lambda/gamma_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionlessParams {
    /// Quality factor Q = ω₀/λ ≥ 0.
    pub q: f64,
    /// Linewidth-to-dephasing ratio R = λ/Γ_M > 0.
    pub r: f64,
}

impl DimensionlessParams {
    /// Validates and constructs: `q >= 0` and `r > 0`, both finite.
    ///
    /// `q = 0` is legal here (it produces the Markovian reference family)
    /// even though [`gamma_ac`] rejects it; the asymmetry is intentional.
    pub fn new(q: f64, r: f64) -> Result<Self> {
        if !q.is_finite() || !r.is_finite() {
            return Err(AcStarkError::InvalidParameter(
                "dimensionless parameters must be finite".into(),
            ));
        }
        if q < 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "q must be non-negative, got {q}"
            )));
        }
        if r <= 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "r must be positive, got {r}"
            )));
        }
        Ok(Self { q, r })
    }

    /// Reduces a physical parameter set: Q = ω₀/λ, R = λ/Γ_M.
    ///
    /// Fails when Γ_M = 0 (zero drive), where R is undefined.
    pub fn from_physical(p: &PhysicalParams) -> Result<Self> {
        let gm = gamma_markovian(p);
        if gm == 0.0 {
            return Err(AcStarkError::Domain(
                "gamma_markovian is zero (omega_rabi = 0); R undefined".into(),
            ));
        }
        Self::new(p.omega0 / p.lambda_lw, p.lambda_lw / gm)
    }

    /// Inverts the reduction given the Markovian rate: returns `(omega0,
    /// lambda_lw)` with λ = R·Γ_M and ω₀ = Q·λ. Round-trips with
    /// [`Self::from_physical`] to relative 1e-12.
    pub fn reconstruct_frequencies(&self, gamma_m: f64) -> (f64, f64) {
        let lambda_lw = self.r * gamma_m;
        (self.q * lambda_lw, lambda_lw)
    }

    /// R·Q² = ω₀²/(λΓ_M), the knob controlling oscillation visibility.
    pub fn rq2(&self) -> f64 {
        self.r * self.q * self.q
    }
}

/// Markovian dephasing rate Γ_M = Γ_s |Ω|²/Δ² [rad/s].
///
/// Δ ≠ 0 is guaranteed by [`PhysicalParams`] construction.
pub fn gamma_markovian(p: &PhysicalParams) -> f64 {
    p.gamma_s * (p.omega_rabi * p.omega_rabi) / (p.detuning * p.detuning)
}

/// Suppressed dephasing rate Γ_ac = Γ_M/Q² [rad/s].
///
/// Rejects `q = 0`: in the Markovian limit the suppressed-rate timescale is
/// undefined (while [`DimensionlessParams`] itself still accepts q = 0).
pub fn gamma_ac(gamma_m: f64, q: f64) -> Result<f64> {
    if q <= 0.0 {
        return Err(AcStarkError::Domain(format!(
            "gamma_ac requires q > 0, got {q}"
        )));
    }
    Ok(gamma_m / (q * q))
}

/// Light shift |Ω|²/Δ of the ground-state splitting [rad/s]; odd in Δ.
pub fn light_shift(omega_rabi: f64, detuning: f64) -> Result<f64> {
    if detuning == 0.0 {
        return Err(AcStarkError::Domain(
            "light_shift requires nonzero detuning".into(),
        ));
    }
    Ok(omega_rabi * omega_rabi / detuning)
}
