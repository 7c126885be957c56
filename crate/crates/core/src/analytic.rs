//! Closed-form expressions: single-excitation polariton frequencies,
//! dispersive-regime linewidths, resonance-fluorescence saturation and power
//! broadening, and the combined dot linewidth model.

use crate::model::SystemParams;
use crate::{Error, Result, C64};

/// The two single-excitation eigenfrequencies. Real part is the resonance,
/// imaginary part is minus the half-linewidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolaritonPair {
    pub omega_plus: C64,
    pub omega_minus: C64,
}

impl PolaritonPair {
    /// Branch whose resonance is closer to the bare dot.
    pub fn qd_like(&self, params: &SystemParams) -> C64 {
        if (self.omega_plus.re - params.omega_d).abs() <= (self.omega_minus.re - params.omega_d).abs() {
            self.omega_plus
        } else {
            self.omega_minus
        }
    }

    /// Branch whose resonance is closer to the bare cavity.
    pub fn cavity_like(&self, params: &SystemParams) -> C64 {
        if (self.omega_plus.re - params.omega_c).abs() < (self.omega_minus.re - params.omega_c).abs() {
            self.omega_plus
        } else {
            self.omega_minus
        }
    }

    /// Re(ω₊) − Re(ω₋).
    pub fn splitting(&self) -> f64 {
        self.omega_plus.re - self.omega_minus.re
    }
}

/// Eigenvalues of the non-Hermitian single-excitation matrix
/// `[[ω_d − iγ, g], [g, ω_c − iκ]]`:
///
/// `(ω_c + ω_d)/2 − i(κ+γ)/2 ± sqrt(g² + ¼(δ + i(κ−γ))²)`, δ = ω_d − ω_c.
///
/// `omega_plus` is the root with the larger real part; ties go to the larger
/// imaginary part.
pub fn polariton_frequencies(params: &SystemParams) -> PolaritonPair {
    let mean = C64::new(0.5 * (params.omega_c + params.omega_d), -0.5 * (params.kappa + params.gamma));
    let half_split = C64::new(params.detuning(), params.kappa - params.gamma) * 0.5;
    let root = (half_split * half_split + params.g * params.g).sqrt();
    let (a, b) = (mean + root, mean - root);
    let a_first = a.re > b.re || (a.re == b.re && a.im >= b.im);
    if a_first {
        PolaritonPair { omega_plus: a, omega_minus: b }
    } else {
        PolaritonPair { omega_plus: b, omega_minus: a }
    }
}

/// Full linewidths of the cavity-like and dot-like polaritons far from
/// resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveLinewidths {
    pub gamma_cavity_like: f64,
    pub gamma_qd_like: f64,
}

/// `Γ_c = 2κ + 2(g/δ)²γ`, `Γ_qd = 2(γ+γ_d) + 2(g/δ)²κ`.
///
/// Only meaningful for |δ| ≫ g; fails at δ = 0.
pub fn dispersive_linewidths(params: &SystemParams) -> Result<DispersiveLinewidths> {
    let delta = params.detuning();
    if delta == 0.0 {
        return Err(Error::domain("dispersive linewidths diverge at zero detuning"));
    }
    let mix = (params.g / delta).powi(2);
    Ok(DispersiveLinewidths {
        gamma_cavity_like: 2.0 * params.kappa + 2.0 * mix * params.gamma,
        gamma_qd_like: 2.0 * (params.gamma + params.gamma_d) + 2.0 * mix * params.kappa,
    })
}

/// Cavity contribution to the dot linewidth with g set equal to κ:
/// `2κ³/δ²`. This overestimates the true contribution whenever g < κ.
pub fn table1_theory_linewidth(kappa: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::domain("theory linewidth diverges at zero detuning"));
    }
    Ok(2.0 * kappa.powi(3) / (delta * delta))
}

fn check_p_tilde(p_tilde: f64) -> Result<()> {
    if !(p_tilde >= 0.0) {
        return Err(Error::domain(format!("saturation parameter must be >= 0, got {p_tilde}")));
    }
    Ok(())
}

/// Excited-state population of a resonantly driven two-level emitter,
/// `(P̃/2) / (1 + P̃)`.
pub fn fluorescence_intensity(p_tilde: f64) -> Result<f64> {
    check_p_tilde(p_tilde)?;
    if p_tilde.is_infinite() {
        return Ok(0.5);
    }
    Ok(0.5 * p_tilde / (1.0 + p_tilde))
}

/// Power-broadened full linewidth `2(γ+γ_d)·sqrt(1+P̃)`.
pub fn power_broadened_linewidth(gamma: f64, gamma_d: f64, p_tilde: f64) -> Result<f64> {
    check_p_tilde(p_tilde)?;
    Ok(2.0 * (gamma + gamma_d) * (1.0 + p_tilde).sqrt())
}

/// Parameters of the combined linewidth model `Δω_c + Δω_0·sqrt(1 + αP)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinewidthModelParams {
    /// Cavity-emission contribution Δω_c (rad/ns).
    pub delta_omega_c: f64,
    /// Zero-power emitter linewidth Δω_0 (rad/ns).
    pub delta_omega_0: f64,
    /// Power conversion α (1/µW).
    pub alpha: f64,
}

impl LinewidthModelParams {
    pub fn new(delta_omega_c: f64, delta_omega_0: f64, alpha: f64) -> Result<Self> {
        if !(delta_omega_c >= 0.0 && delta_omega_0 >= 0.0 && alpha >= 0.0) {
            return Err(Error::domain("linewidth model parameters must be >= 0"));
        }
        Ok(Self { delta_omega_c, delta_omega_0, alpha })
    }

    /// Δω_c = 2(g/δ)²κ and Δω_0 = 2(γ+γ_d) from microscopic parameters.
    pub fn from_system(params: &SystemParams, alpha: f64) -> Result<Self> {
        let delta = params.detuning();
        let cavity = if delta == 0.0 { 0.0 } else { 2.0 * (params.g / delta).powi(2) * params.kappa };
        Self::new(cavity, 2.0 * (params.gamma + params.gamma_d), alpha)
    }
}

/// `Δω_c + Δω_0·sqrt(1 + αP)`.
pub fn combined_linewidth(model: &LinewidthModelParams, power_uw: f64) -> Result<f64> {
    if !(power_uw >= 0.0) {
        return Err(Error::domain(format!("power must be >= 0, got {power_uw}")));
    }
    Ok(model.delta_omega_c + model.delta_omega_0 * (1.0 + model.alpha * power_uw).sqrt())
}
