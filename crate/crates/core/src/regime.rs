//! Parameter-regime classification of the dimensionless decoherence function.
//!
//! The (Q, R) plane splits into qualitative regimes: a Markovian corner
//! (Q ≪ 1, R ≫ 1) where Γ(τ) ≈ τ; a suppressed-exponential regime (large Q,
//! large RQ²) where the coherence follows e^{−τ'} in rescaled time; an
//! oscillatory band around RQ² ~ 1 where dΓ/dτ' turns negative and the
//! coherence revives; and a crossover region elsewhere. The numeric
//! thresholds are artifact calibration choices, exposed for adjustment.

use serde::Serialize;

use crate::params::DimensionlessParams;

/// Qualitative dynamical regime of the decoherence function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Markovian,
    SuppressedExponential,
    Oscillatory,
    Crossover,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Markovian => "Markovian",
            Regime::SuppressedExponential => "SuppressedExponential",
            Regime::Oscillatory => "Oscillatory",
            Regime::Crossover => "Crossover",
        };
        f.write_str(s)
    }
}

/// Calibrated boundaries between regimes. Checked in declaration order:
/// Markovian, then suppressed-exponential, then oscillatory, else crossover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeThresholds {
    /// Markovian requires Q ≤ this …
    pub markovian_q_max: f64,
    /// … and R ≥ this.
    pub markovian_r_min: f64,
    /// Suppressed-exponential requires Q ≥ this …
    pub suppressed_q_min: f64,
    /// … and RQ² ≥ this.
    pub suppressed_rq2_min: f64,
    /// Oscillatory requires Q ≥ this …
    pub oscillatory_q_min: f64,
    /// … and RQ² within [min, max].
    pub oscillatory_rq2_min: f64,
    pub oscillatory_rq2_max: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            markovian_q_max: 0.1,
            markovian_r_min: 10.0,
            suppressed_q_min: 10.0,
            suppressed_rq2_min: 10.0,
            oscillatory_q_min: 3.0,
            oscillatory_rq2_min: 0.1,
            oscillatory_rq2_max: 10.0,
        }
    }
}

/// Classification result: the label plus the diagnostic combinations that
/// drove it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeLabel {
    pub label: Regime,
    pub q: f64,
    pub r: f64,
    pub rq2: f64,
    pub rq3: f64,
}

/// Classifies with the default thresholds.
pub fn classify_regime(d: &DimensionlessParams) -> RegimeLabel {
    classify_regime_with(d, &RegimeThresholds::default())
}

/// Classifies with caller-supplied thresholds.
pub fn classify_regime_with(d: &DimensionlessParams, th: &RegimeThresholds) -> RegimeLabel {
    let (q, r) = (d.q, d.r);
    let rq2 = r * q * q;
    let rq3 = rq2 * q;
    let label = if q <= th.markovian_q_max && r >= th.markovian_r_min {
        Regime::Markovian
    } else if q >= th.suppressed_q_min && rq2 >= th.suppressed_rq2_min {
        Regime::SuppressedExponential
    } else if q >= th.oscillatory_q_min
        && rq2 >= th.oscillatory_rq2_min
        && rq2 <= th.oscillatory_rq2_max
    {
        Regime::Oscillatory
    } else {
        Regime::Crossover
    };
    RegimeLabel {
        label,
        q,
        r,
        rq2,
        rq3,
    }
}
