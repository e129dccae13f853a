//! Two-level (ground-state pair) density matrix and the pure-dephasing
//! channel acting on it.
//!
//! Pure dephasing multiplies each off-diagonal element by e^{−Γ} (the
//! exponent weight (σ−σ')²/4 equals 1 for the two distinct ground states and
//! 0 on the diagonal), so populations are preserved exactly while coherences
//! decay.

use num_complex::Complex64;

use crate::dephasing::coherence_factor;
use crate::error::{AcStarkError, Result};

type C64 = Complex64;

/// Validation tolerance for trace, Hermiticity and positivity checks.
const STATE_TOL: f64 = 1e-12;

/// 2×2 density matrix over the ground-state basis {a, b}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: [[C64; 2]; 2],
}

impl QubitState {
    /// Validates trace 1, Hermiticity, and positive semidefiniteness
    /// (eigenvalues ≥ −1e−12) before accepting the matrix.
    pub fn new(rho: [[C64; 2]; 2]) -> Result<Self> {
        let trace = rho[0][0] + rho[1][1];
        if (trace - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(AcStarkError::InvalidParameter(format!(
                "density matrix trace must be 1, got {trace}"
            )));
        }
        if rho[0][0].im.abs() > STATE_TOL
            || rho[1][1].im.abs() > STATE_TOL
            || (rho[0][1] - rho[1][0].conj()).norm() > STATE_TOL
        {
            return Err(AcStarkError::InvalidParameter(
                "density matrix must be Hermitian".into(),
            ));
        }
        // Hermitian 2×2 eigenvalues: tr/2 ± sqrt((Δdiag/2)² + |ρ01|²).
        let half_tr = (rho[0][0].re + rho[1][1].re) / 2.0;
        let half_gap = (rho[0][0].re - rho[1][1].re) / 2.0;
        let radius = (half_gap * half_gap + rho[0][1].norm_sqr()).sqrt();
        if half_tr - radius < -STATE_TOL {
            return Err(AcStarkError::InvalidParameter(format!(
                "density matrix must be positive semidefinite; min eigenvalue {}",
                half_tr - radius
            )));
        }
        Ok(Self { rho })
    }

    /// Equal superposition (|a⟩+|b⟩)/√2 as a density matrix: ½[[1,1],[1,1]].
    pub fn equal_superposition() -> Self {
        let h = C64::new(0.5, 0.0);
        Self {
            rho: [[h, h], [h, h]],
        }
    }

    /// Diagonal (fully dephased) state with populations (p_a, 1−p_a).
    pub fn diagonal(p_a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_a) {
            return Err(AcStarkError::InvalidParameter(format!(
                "population must lie in [0,1], got {p_a}"
            )));
        }
        Ok(Self {
            rho: [
                [C64::new(p_a, 0.0), C64::new(0.0, 0.0)],
                [C64::new(0.0, 0.0), C64::new(1.0 - p_a, 0.0)],
            ],
        })
    }

    /// The underlying matrix.
    pub fn rho(&self) -> &[[C64; 2]; 2] {
        &self.rho
    }

    /// Magnitude of the ground-state coherence |ρ_ab|.
    pub fn coherence_magnitude(&self) -> f64 {
        self.rho[0][1].norm()
    }
}

/// Applies the pure-dephasing channel with exponent `gamma`: diagonals are
/// untouched, off-diagonals are multiplied by e^{−gamma}.
///
/// The channel preserves trace, Hermiticity and positivity exactly, and
/// composes additively: applying Γ₁ then Γ₂ equals applying Γ₁+Γ₂.
pub fn apply_dephasing(rho0: &QubitState, gamma: f64) -> Result<QubitState> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(AcStarkError::Domain(format!(
            "dephasing exponent must be finite and non-negative, got {gamma}"
        )));
    }
    let factor = coherence_factor(gamma);
    let mut rho = rho0.rho;
    rho[0][1] *= factor;
    rho[1][0] *= factor;
    // Construction bypasses validation: the channel preserves all invariants
    // exactly (|ρ01| shrinks, diagonals unchanged).
    Ok(QubitState { rho })
}
