//! Non-Markovian ac Stark dephasing of a two-ground-state atom under a
//! narrow-band Lorentzian drive.
//!
//! The crate evaluates the closed-form decoherence function Γ(τ; Q, R) of
//! the pure-dephasing model (with Q = ω₀/λ the laser quality factor and
//! R = λ/Γ_M the linewidth-to-dephasing ratio), cross-validates it against
//! independent numerical oracles — adaptive spectral quadrature, a
//! discretized Lorentzian bath sum, and an exact truncated-Fock-space ODE —
//! and implements the standard comparison routes: a three-level Lindblad
//! master equation recovering the Markovian rate Γ_M = Γ_s|Ω|²/Δ², and the
//! Lorentzian-bath excited-state decay with its weak/strong-coupling limits.
//! A physical-units layer ties the model to electric-dipole quantities.
//!
//! Conventions: every frequency and rate is angular (rad/s); λ is the
//! Lorentzian half-width at half-maximum of the laser intensity spectrum.
//! The integral-convention subtlety behind the closed form is documented in
//! [`dephasing`].

pub mod bath;
pub mod curve;
pub mod dephasing;
pub mod error;
pub mod fitting;
pub mod fock;
pub mod lindblad;
pub mod ode;
pub mod oracle;
pub mod params;
pub mod quad;
pub mod qubit;
pub mod regime;
pub mod units;
pub mod vacchini;

pub use bath::{
    alias_free_spacing, auto_mode_count, gamma_discrete, phase_phi, sample_lorentzian_bath,
    sample_lorentzian_bath_domain, BathDomain, BathMode, BathSamplingMeta, DiscreteBath,
};
pub use curve::{
    sample_closed_form, sample_closed_form_ac, sample_physical, sample_reference_exponential,
    CurveMeta, DecoherenceCurve, GridScale, GridSpec, TimeUnit,
};
pub use dephasing::{
    coherence_factor, gamma_continuum_dimensionless, gamma_continuum_physical,
    gamma_derivative_dimensionless, gamma_dimensionless, gamma_large_q_approx,
    gamma_large_q_approx_derivative, gamma_physical, EXP_ARG_LIMIT,
};
pub use error::{AcStarkError, Result};
pub use fitting::{fit_exponential_decay, local_maxima, ExpFit};
pub use fock::{
    evolve_fock, DriveMode, FockEvolution, InteractionModel, LEAKAGE_WARN, MAX_FOCK_MODES,
    MAX_TRUNCATION,
};
pub use lindblad::{
    extract_dephasing_rate, lindblad_evolve, DephasingRateFit, Level, LindbladTrajectory,
    ThreeLevelState, RESIDUAL_FLAG_THRESHOLD, STATE_TOL,
};
pub use ode::{integrate_to, OdeOptions, OdeStats};
pub use oracle::{
    cross_validate, cross_validate_with, DeviationMetric, OracleOptions, OracleReport,
    PairDeviation,
};
pub use params::{
    gamma_ac, gamma_markovian, light_shift, DimensionlessParams, PhysicalParams,
};
pub use quad::{gamma_quadrature, gamma_quadrature_with, QuadConvention};
pub use qubit::{apply_dephasing, QubitState};
pub use regime::{classify_regime, classify_regime_with, Regime, RegimeLabel, RegimeThresholds};
pub use units::{
    coupling_g, dipole_from_gamma_s, gamma_m_dipole_route, gamma_s_from_mode_sum,
    gamma_s_standard, lab_to_params, solid_angle_avg_g0sq, solid_angle_int_g0_fourth, DipoleAtom,
    RabiOrIntensity, C_LIGHT, EPSILON_0, HBAR, OVERDETERMINED_TOL, V_REF,
};
pub use vacchini::{
    naive_ac_rate, vacchini_rho_ee, vacchini_weak_limit, VacchiniParams, WeakLimitValue,
};
