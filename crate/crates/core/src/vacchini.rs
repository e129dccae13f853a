//! Exact excited-state population for spontaneous decay into a Lorentzian
//! reservoir, and the naive memoryless ac Stark rate it is contrasted with.
//!
//! For a single excited level coupled to a vacuum reservoir with Lorentzian
//! spectral density of width λ and Markovian decay rate Γ_s, the population
//! admits the closed form
//!
//!   ρ_ee(t) = e^(−λt) · [cosh(zδ') + sinh(zδ')/δ']² · ρ_ee(0),
//!
//! with z = λt/2 and δ' = √(1 − 2Γ_s/λ) taken on the principal branch.  The
//! evaluation here is algebraically identical but written entirely in terms
//! of e^(−2zδ') so that no intermediate overflows for any λt, and switches
//! to a series for small |zδ'| where the hyperbolic ratio loses digits.
//!
//! Weak coupling (Γ_s ≪ λ) reduces this to ρ_ee(0)·e^(−Γ_s t/2); strong
//! coupling (Γ_s ≫ λ) oscillates at Ω_NM = √(λΓ_s/2) under an e^(−λt)
//! envelope — the reservoir-memory fingerprint this crate's decoherence
//! function exhibits in its own regime.

use num_complex::Complex64;

use crate::error::{AcStarkError, Result};

/// Parameters of the Lorentzian-reservoir decay model.  `delta_v` is the
/// principal square root of 1 − 2Γ_s/λ, cached because every evaluation and
/// the regime classification depend on it; the constructor guarantees
/// δ² + 2Γ_s/λ = 1 within 1e−12 and Re δ ≥ 0.
#[derive(Debug, Clone, Copy)]
pub struct VacchiniParams {
    lambda_lw: f64,
    gamma_s: f64,
    delta_v: Complex64,
}

impl VacchiniParams {
    pub fn new(lambda_lw: f64, gamma_s: f64) -> Result<Self> {
        if !lambda_lw.is_finite() || lambda_lw <= 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "reservoir width must be finite and > 0, got {lambda_lw}"
            )));
        }
        if !gamma_s.is_finite() || gamma_s < 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "decay rate must be finite and >= 0, got {gamma_s}"
            )));
        }
        let delta_v = Complex64::new(1.0 - 2.0 * gamma_s / lambda_lw, 0.0).sqrt();
        Ok(Self {
            lambda_lw,
            gamma_s,
            delta_v,
        })
    }

    pub fn lambda_lw(&self) -> f64 {
        self.lambda_lw
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn delta_v(&self) -> Complex64 {
        self.delta_v
    }

    /// Strong-coupling oscillation frequency Ω_NM = √(λΓ_s/2).
    pub fn omega_nm(&self) -> f64 {
        (self.lambda_lw * self.gamma_s / 2.0).sqrt()
    }
}

fn validate_t_rho(t: f64, rho_ee0: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(AcStarkError::Domain(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    if !rho_ee0.is_finite() || !(0.0..=1.0).contains(&rho_ee0) {
        return Err(AcStarkError::Domain(format!(
            "initial population must lie in [0, 1], got {rho_ee0}"
        )));
    }
    Ok(())
}

/// Exact excited-state population at time `t`.
///
/// The result is real by construction; an imaginary residue above 1e−9
/// indicates the evaluation itself broke down and is reported as an error
/// rather than silently discarded.
pub fn vacchini_rho_ee(t: f64, v: &VacchiniParams, rho_ee0: f64) -> Result<f64> {
    validate_t_rho(t, rho_ee0)?;
    let lt = v.lambda_lw * t;
    let delta = v.delta_v;
    let z = delta * (lt / 2.0);
    let val = if z.norm() < 1e-4 {
        // cosh z + sinh z/δ expanded through z²: the linear-in-δ pieces
        // cancel analytically, leaving a polynomial in λt with a z² drift.
        let z2 = z * z;
        let bracket = Complex64::new(1.0 + lt / 2.0, 0.0) + z2 * (0.5 + lt / 12.0);
        bracket * bracket * (-lt).exp()
    } else {
        // bracket = e^z[(1+u)/2 + (1−u)/(2δ)] with u = e^(−2z); Re z ≥ 0 on
        // the principal branch, so |u| ≤ 1 and the only large factor is the
        // single exponent 2 Re z − λt ≤ 0.
        let u = (-2.0 * z).exp();
        let one = Complex64::new(1.0, 0.0);
        let scaled = (one + u) * 0.5 + (one - u) / (delta * 2.0);
        scaled * scaled * (2.0 * z - lt).exp()
    } * rho_ee0;
    if val.im.abs() > 1e-9 {
        return Err(AcStarkError::NumericalConsistency(format!(
            "population evaluation left imaginary residue {:.3e} at λt = {lt:.3e}",
            val.im
        )));
    }
    Ok(val.re)
}

/// Weak-coupling population e^(−Γ_s t/2)·ρ_ee(0), with a flag raised when
/// Γ_s/λ > 0.01 puts the parameters outside the regime where the limit is a
/// faithful approximation.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct WeakLimitValue {
    pub value: f64,
    pub regime_warning: bool,
}

pub fn vacchini_weak_limit(t: f64, v: &VacchiniParams, rho_ee0: f64) -> Result<WeakLimitValue> {
    validate_t_rho(t, rho_ee0)?;
    Ok(WeakLimitValue {
        value: rho_ee0 * (-v.gamma_s * t / 2.0).exp(),
        regime_warning: v.gamma_s / v.lambda_lw > 0.01,
    })
}

/// Memoryless estimate of the ac Stark scattering rate, λΩ²/Δ² — the rate a
/// flat-spectrum treatment of the laser line assigns to ground-state
/// dephasing.  Dividing by the correct long-time rate Γ_M/(Q²+1) exposes the
/// error the reservoir memory removes.
pub fn naive_ac_rate(lambda_lw: f64, omega_rabi: f64, detuning: f64) -> Result<f64> {
    if !lambda_lw.is_finite() || lambda_lw < 0.0 {
        return Err(AcStarkError::InvalidParameter(format!(
            "linewidth must be finite and >= 0, got {lambda_lw}"
        )));
    }
    if !omega_rabi.is_finite() {
        return Err(AcStarkError::InvalidParameter(
            "Rabi amplitude must be finite".to_string(),
        ));
    }
    if !detuning.is_finite() || detuning == 0.0 {
        return Err(AcStarkError::Domain(
            "naive rate requires a nonzero finite detuning".to_string(),
        ));
    }
    Ok(lambda_lw * omega_rabi * omega_rabi / (detuning * detuning))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::{fit_exponential_decay, local_maxima};
    use approx::assert_relative_eq;

    #[test]
    fn constructor_validates_and_caches_delta() {
        assert!(VacchiniParams::new(0.0, 1.0).is_err());
        assert!(VacchiniParams::new(1.0, -0.1).is_err());
        let v = VacchiniParams::new(2.0, 0.5).unwrap();
        let delta = v.delta_v();
        let residual = delta * delta + Complex64::new(2.0 * 0.5 / 2.0, 0.0);
        assert_relative_eq!(residual.re, 1.0, epsilon = 1e-12);
        assert!(residual.im.abs() < 1e-12);
        assert!(delta.re >= 0.0);
        // Overdamped: δ real; oscillatory: δ imaginary with positive part.
        let strong = VacchiniParams::new(1.0, 50.0).unwrap();
        assert!(strong.delta_v().re.abs() < 1e-15);
        assert!(strong.delta_v().im > 0.0);
    }

    #[test]
    fn zero_time_and_zero_coupling_are_exact() {
        let v = VacchiniParams::new(1.5, 0.3).unwrap();
        assert_relative_eq!(vacchini_rho_ee(0.0, &v, 0.7).unwrap(), 0.7, epsilon = 1e-15);
        let free = VacchiniParams::new(1.5, 0.0).unwrap();
        for lt in [0.5, 5.0, 50.0, 700.0] {
            let t = lt / 1.5;
            assert_relative_eq!(vacchini_rho_ee(t, &free, 0.9).unwrap(), 0.9, epsilon = 1e-12);
        }
    }

    #[test]
    fn critical_damping_matches_limit_formula() {
        // At Γ_s = λ/2 the square root vanishes and the population becomes
        // (1 + λt/2)² e^(−λt); the series branch must reproduce it exactly,
        // and values just off criticality must join continuously.
        let v = VacchiniParams::new(1.0, 0.5).unwrap();
        assert_relative_eq!(
            vacchini_rho_ee(1.0, &v, 1.0).unwrap(),
            0.8277287426357453,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            vacchini_rho_ee(3.0, &v, 1.0).unwrap(),
            0.31116917729914967,
            epsilon = 1e-14
        );
        for sign in [-1.0, 1.0] {
            let off = VacchiniParams::new(1.0, 0.5 * (1.0 + sign * 1e-9)).unwrap();
            assert_relative_eq!(
                vacchini_rho_ee(3.0, &off, 1.0).unwrap(),
                0.31116917729914967,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn no_overflow_deep_in_time() {
        let v = VacchiniParams::new(1.0, 0.3).unwrap();
        let val = vacchini_rho_ee(5000.0, &v, 1.0).unwrap();
        assert!(val.is_finite());
        assert!(val.abs() < 1e-300 || val == 0.0);
        // Asymptotic decay rate is λ(1 − Re δ), slower than λ itself.
        let delta = v.delta_v().re;
        let rate = 1.0 - delta;
        let (v1, v2) = (
            vacchini_rho_ee(40.0, &v, 1.0).unwrap(),
            vacchini_rho_ee(60.0, &v, 1.0).unwrap(),
        );
        assert_relative_eq!((v1 / v2).ln() / 20.0, rate, max_relative = 1e-6);
    }

    #[test]
    fn weak_coupling_follows_halved_markovian_decay() {
        let (lambda, gamma_s) = (1.0, 1e-3);
        let v = VacchiniParams::new(lambda, gamma_s).unwrap();
        let mut max_rel: f64 = 0.0;
        for i in 1..=200 {
            let t = 5.0 * i as f64 / 200.0;
            let exact = vacchini_rho_ee(t, &v, 1.0).unwrap();
            let weak = vacchini_weak_limit(t, &v, 1.0).unwrap();
            assert!(!weak.regime_warning);
            max_rel = max_rel.max((exact / weak.value - 1.0).abs());
        }
        assert!(max_rel <= 2e-3, "weak-limit deviation {max_rel:.4e}");
        let strong = VacchiniParams::new(1.0, 0.5).unwrap();
        assert!(vacchini_weak_limit(1.0, &strong, 1.0).unwrap().regime_warning);
    }

    #[test]
    fn strong_coupling_oscillates_under_lambda_envelope() {
        let (lambda, gamma_s) = (1.0, 1e3);
        let v = VacchiniParams::new(lambda, gamma_s).unwrap();
        let n = 200_000;
        let t_end = 6.0;
        let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|&t| vacchini_rho_ee(t, &v, 1.0).unwrap())
            .collect();
        let peaks = local_maxima(&times, &values);
        assert!(peaks.len() >= 3);
        let (pt, pv): (Vec<f64>, Vec<f64>) = peaks.iter().cloned().unzip();
        let envelope = fit_exponential_decay(&pt, &pv).unwrap();
        assert_relative_eq!(envelope.rate, lambda, max_relative = 0.02);
        // ρ_ee ∝ cos²(Ω_NM·t) at strong coupling, so peaks are π/Ω_NM apart.
        let spacing = (pt[pt.len() - 1] - pt[0]) / (pt.len() - 1) as f64;
        assert_relative_eq!(
            std::f64::consts::PI / spacing,
            v.omega_nm(),
            max_relative = 0.02
        );
    }

    #[test]
    fn domain_errors_are_reported() {
        let v = VacchiniParams::new(1.0, 0.1).unwrap();
        assert!(vacchini_rho_ee(-1.0, &v, 0.5).is_err());
        assert!(vacchini_rho_ee(1.0, &v, 1.5).is_err());
        assert!(vacchini_weak_limit(f64::NAN, &v, 0.5).is_err());
    }

    #[test]
    fn naive_rate_and_its_domain() {
        assert_relative_eq!(naive_ac_rate(1.0, 1.0, 10.0).unwrap(), 0.01, epsilon = 1e-15);
        assert_relative_eq!(naive_ac_rate(0.0, 2.0, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert!(naive_ac_rate(1.0, 1.0, 0.0).is_err());
        assert!(naive_ac_rate(-1.0, 1.0, 1.0).is_err());
        // Against the true long-time dephasing rate Γ_M/(Q²+1), the naive
        // estimate is too large by ω₀²/(λΓ_s) + λ/Γ_s, with no Q² forgiven:
        // at Γ_s = λ the leading factor is exactly Q².
        let (omega0, lambda, gamma_s, omega, delta) = (50.0, 0.5, 0.5, 0.2, 7.0);
        let q = omega0 / lambda;
        let gamma_m = gamma_s * omega * omega / (delta * delta);
        let gamma_ac = gamma_m / (q * q + 1.0);
        let naive = naive_ac_rate(lambda, omega, delta).unwrap();
        assert_relative_eq!(
            naive / gamma_ac,
            (q * q + 1.0) * lambda / gamma_s,
            max_relative = 1e-12
        );
    }
}
