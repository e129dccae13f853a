//! Time grids and sampled decoherence curves with provenance metadata.

use serde::Serialize;

use crate::dephasing::{coherence_factor, gamma_dimensionless, gamma_physical};
use crate::error::{AcStarkError, Result};
use crate::params::{gamma_markovian, DimensionlessParams, PhysicalParams};

/// Spacing rule for a time grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GridScale {
    Linear,
    Log,
}

/// A validated time-grid specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub scale: GridScale,
}

impl GridSpec {
    /// Requires `n_points >= 2`, `0 <= t_min < t_max` (strictly positive
    /// `t_min` for log spacing), and finite endpoints.
    pub fn new(t_min: f64, t_max: f64, n_points: usize, scale: GridScale) -> Result<Self> {
        if !t_min.is_finite() || !t_max.is_finite() {
            return Err(AcStarkError::InvalidParameter(
                "grid endpoints must be finite".into(),
            ));
        }
        if n_points < 2 {
            return Err(AcStarkError::InvalidParameter(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        if !(t_min < t_max) {
            return Err(AcStarkError::InvalidParameter(format!(
                "grid requires t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if t_min < 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "grid start must be non-negative, got {t_min}"
            )));
        }
        if scale == GridScale::Log && t_min <= 0.0 {
            return Err(AcStarkError::InvalidParameter(
                "log-spaced grid requires t_min > 0".into(),
            ));
        }
        Ok(Self {
            t_min,
            t_max,
            n_points,
            scale,
        })
    }

    /// Materializes the grid; endpoints are hit exactly.
    pub fn build(&self) -> Vec<f64> {
        let n = self.n_points;
        let mut ts = Vec::with_capacity(n);
        match self.scale {
            GridScale::Linear => {
                let step = (self.t_max - self.t_min) / (n - 1) as f64;
                for i in 0..n {
                    ts.push(self.t_min + step * i as f64);
                }
            }
            GridScale::Log => {
                let (a, b) = (self.t_min.ln(), self.t_max.ln());
                let step = (b - a) / (n - 1) as f64;
                for i in 0..n {
                    ts.push((a + step * i as f64).exp());
                }
            }
        }
        ts[0] = self.t_min;
        ts[n - 1] = self.t_max;
        ts
    }
}

/// Unit of the `times` axis of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeUnit {
    /// τ = Γ_M t.
    MarkovianTau,
    /// τ' = Γ_ac t = τ/Q².
    AcTauPrime,
    /// Physical seconds.
    Seconds,
}

/// Provenance attached to every sampled curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveMeta {
    /// Name of the evaluator that produced the samples.
    pub evaluator: String,
    pub time_unit: TimeUnit,
    pub q: Option<f64>,
    pub r: Option<f64>,
    /// Markovian rate Γ_M [rad/s] when the curve came from physical inputs.
    pub gamma_m: Option<f64>,
}

/// A sampled decoherence curve: monotone time grid, Γ values, and the
/// derived coherence e^{−Γ}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceCurve {
    pub times: Vec<f64>,
    pub gamma: Vec<f64>,
    pub coherence: Vec<f64>,
    pub meta: CurveMeta,
}

impl DecoherenceCurve {
    /// Builds a curve from precomputed Γ samples, enforcing the invariants:
    /// times strictly increasing and non-negative, gamma finite and
    /// non-negative, Γ(0) = 0 when the grid starts at 0. Coherence is
    /// derived, never supplied.
    pub fn from_parts(times: Vec<f64>, gamma: Vec<f64>, meta: CurveMeta) -> Result<Self> {
        if times.len() != gamma.len() || times.is_empty() {
            return Err(AcStarkError::InvalidParameter(
                "times and gamma must be equal-length and non-empty".into(),
            ));
        }
        if times[0] < 0.0 || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(AcStarkError::InvalidParameter(
                "times must be non-negative and strictly increasing".into(),
            ));
        }
        if gamma.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(AcStarkError::InvalidParameter(
                "gamma samples must be finite and non-negative".into(),
            ));
        }
        if times[0] == 0.0 && gamma[0] != 0.0 {
            return Err(AcStarkError::InvalidParameter(format!(
                "gamma must vanish at t = 0, got {}",
                gamma[0]
            )));
        }
        let coherence = gamma.iter().map(|&g| coherence_factor(g)).collect();
        Ok(Self {
            times,
            gamma,
            coherence,
            meta,
        })
    }

    fn from_evaluator(
        times: Vec<f64>,
        meta: CurveMeta,
        mut eval: impl FnMut(f64) -> f64,
    ) -> Self {
        let gamma: Vec<f64> = times.iter().map(|&t| eval(t)).collect();
        let coherence = gamma.iter().map(|&g| coherence_factor(g)).collect();
        Self {
            times,
            gamma,
            coherence,
            meta,
        }
    }
}

/// Samples the principal closed form on a τ grid.
pub fn sample_closed_form(d: &DimensionlessParams, grid: &GridSpec) -> DecoherenceCurve {
    let meta = CurveMeta {
        evaluator: "closed-form".into(),
        time_unit: TimeUnit::MarkovianTau,
        q: Some(d.q),
        r: Some(d.r),
        gamma_m: None,
    };
    DecoherenceCurve::from_evaluator(grid.build(), meta, |tau| gamma_dimensionless(tau, d))
}

/// Samples the principal closed form on a τ' = τ/Q² grid (suppressed-rate
/// time units). Requires Q > 0.
pub fn sample_closed_form_ac(d: &DimensionlessParams, grid: &GridSpec) -> Result<DecoherenceCurve> {
    if d.q <= 0.0 {
        return Err(AcStarkError::Domain(
            "suppressed-rate time units require q > 0".into(),
        ));
    }
    let q2 = d.q * d.q;
    let meta = CurveMeta {
        evaluator: "closed-form".into(),
        time_unit: TimeUnit::AcTauPrime,
        q: Some(d.q),
        r: Some(d.r),
        gamma_m: None,
    };
    Ok(DecoherenceCurve::from_evaluator(grid.build(), meta, |tp| {
        gamma_dimensionless(q2 * tp, d)
    }))
}

/// Samples the physical-units closed form on a grid in seconds.
pub fn sample_physical(p: &PhysicalParams, grid: &GridSpec) -> DecoherenceCurve {
    let d = DimensionlessParams::from_physical(p).ok();
    let meta = CurveMeta {
        evaluator: "closed-form-physical".into(),
        time_unit: TimeUnit::Seconds,
        q: d.map(|d| d.q),
        r: d.map(|d| d.r),
        gamma_m: Some(gamma_markovian(p)),
    };
    DecoherenceCurve::from_evaluator(grid.build(), meta, |t| gamma_physical(t, p))
}

/// The exponential reference curve Γ = t on the given grid (e^{−τ} in
/// Markovian units, e^{−τ'} in suppressed-rate units).
pub fn sample_reference_exponential(grid: &GridSpec, time_unit: TimeUnit) -> DecoherenceCurve {
    let meta = CurveMeta {
        evaluator: "reference-exponential".into(),
        time_unit,
        q: None,
        r: None,
        gamma_m: None,
    };
    DecoherenceCurve::from_evaluator(grid.build(), meta, |t| t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_grid_hits_endpoints() {
        let g = GridSpec::new(0.0, 5.0, 6, GridScale::Linear).unwrap().build();
        assert_eq!(g, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn log_grid_is_geometric() {
        let g = GridSpec::new(0.1, 10.0, 3, GridScale::Log).unwrap().build();
        assert_relative_eq!(g[0], 0.1, max_relative = 1e-15);
        assert_relative_eq!(g[1], 1.0, max_relative = 1e-12);
        assert_relative_eq!(g[2], 10.0, max_relative = 1e-15);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0.0, 5.0, 1, GridScale::Linear).is_err());
        assert!(GridSpec::new(5.0, 5.0, 10, GridScale::Linear).is_err());
        assert!(GridSpec::new(-1.0, 5.0, 10, GridScale::Linear).is_err());
        assert!(GridSpec::new(0.0, 5.0, 10, GridScale::Log).is_err());
        assert!(GridSpec::new(f64::NAN, 5.0, 10, GridScale::Linear).is_err());
    }

    #[test]
    fn sampled_curve_satisfies_invariants() {
        let d = DimensionlessParams::new(3.0, 0.5).unwrap();
        let grid = GridSpec::new(0.0, 5.0, 101, GridScale::Linear).unwrap();
        let curve = sample_closed_form(&d, &grid);
        assert_eq!(curve.gamma[0], 0.0);
        assert_eq!(curve.coherence[0], 1.0);
        for i in 0..curve.times.len() {
            assert!(curve.gamma[i] >= 0.0);
            assert_relative_eq!(
                curve.coherence[i],
                (-curve.gamma[i]).exp(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn ac_rescaled_curve_uses_tau_prime() {
        let d = DimensionlessParams::new(10.0, 0.01).unwrap();
        let grid = GridSpec::new(0.0, 2.0, 21, GridScale::Linear).unwrap();
        let curve = sample_closed_form_ac(&d, &grid).unwrap();
        // Γ at τ' = 2 equals the plain evaluation at τ = Q²·2 = 200.
        let expected = gamma_dimensionless(200.0, &d);
        assert_relative_eq!(curve.gamma[20], expected, max_relative = 1e-14);
        // Q = 0 is rejected.
        let d0 = DimensionlessParams::new(0.0, 1.0).unwrap();
        assert!(sample_closed_form_ac(&d0, &grid).is_err());
    }

    #[test]
    fn from_parts_enforces_invariants() {
        let meta = CurveMeta {
            evaluator: "test".into(),
            time_unit: TimeUnit::MarkovianTau,
            q: None,
            r: None,
            gamma_m: None,
        };
        assert!(DecoherenceCurve::from_parts(vec![0.0, 1.0], vec![0.0, 0.5], meta.clone()).is_ok());
        // Non-monotone times.
        assert!(
            DecoherenceCurve::from_parts(vec![1.0, 0.5], vec![0.0, 0.5], meta.clone()).is_err()
        );
        // Negative gamma.
        assert!(
            DecoherenceCurve::from_parts(vec![0.0, 1.0], vec![0.0, -0.5], meta.clone()).is_err()
        );
        // Nonzero gamma at t = 0.
        assert!(DecoherenceCurve::from_parts(vec![0.0, 1.0], vec![0.1, 0.5], meta).is_err());
    }

    #[test]
    fn reference_curve_is_pure_exponential() {
        let grid = GridSpec::new(0.0, 3.0, 4, GridScale::Linear).unwrap();
        let c = sample_reference_exponential(&grid, TimeUnit::MarkovianTau);
        assert_eq!(c.gamma, vec![0.0, 1.0, 2.0, 3.0]);
        assert_relative_eq!(c.coherence[1], (-1.0f64).exp(), max_relative = 1e-15);
    }
}
