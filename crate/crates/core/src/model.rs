//! Physical parameter types and unit conversions.
//!
//! Rates are stored as angular frequencies in rad/ns. `kappa` and `gamma`
//! are *field* decay rates: the cavity energy decay rate is `2 * kappa` and
//! the spontaneous emission rate of the dot is `2 * gamma`.

use std::f64::consts::TAU;

use crate::{Error, Result};

/// Speed of light in nm·GHz (nm/ns).
pub const SPEED_OF_LIGHT_NM_GHZ: f64 = 299_792_458.0;

/// Converts an ordinary frequency in GHz (ν = ω/2π) to rad/ns.
#[inline]
pub fn ghz_to_angular(ghz: f64) -> f64 {
    TAU * ghz
}

/// Converts an angular frequency in rad/ns to GHz.
#[inline]
pub fn angular_to_ghz(omega: f64) -> f64 {
    omega / TAU
}

/// `2π c / λ` in rad/ns.
pub fn wavelength_to_angular_frequency(lambda_nm: f64) -> Result<f64> {
    if !(lambda_nm > 0.0) || !lambda_nm.is_finite() {
        return Err(Error::domain(format!(
            "wavelength must be positive and finite, got {lambda_nm} nm"
        )));
    }
    Ok(TAU * SPEED_OF_LIGHT_NM_GHZ / lambda_nm)
}

/// Inverse of [`wavelength_to_angular_frequency`].
pub fn angular_frequency_to_wavelength(omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!(
            "angular frequency must be positive and finite, got {omega} rad/ns"
        )));
    }
    Ok(TAU * SPEED_OF_LIGHT_NM_GHZ / omega)
}

/// QD-cavity detuning `ω_d − ω_c` from the two resonance wavelengths.
///
/// Negative when the dot sits on the red (long-wavelength) side of the cavity.
pub fn detuning_from_wavelengths(lambda_qd_nm: f64, lambda_cavity_nm: f64) -> Result<f64> {
    Ok(wavelength_to_angular_frequency(lambda_qd_nm)?
        - wavelength_to_angular_frequency(lambda_cavity_nm)?)
}

/// Frequency width (GHz) of an interval `[center − width/2, center + width/2]`
/// given in wavelength.
pub fn wavelength_width_to_ghz(center_nm: f64, width_nm: f64) -> Result<f64> {
    let lo = center_nm - 0.5 * width_nm;
    let hi = center_nm + 0.5 * width_nm;
    if !(lo > 0.0) {
        return Err(Error::domain("wavelength interval reaches zero"));
    }
    Ok(SPEED_OF_LIGHT_NM_GHZ / lo - SPEED_OF_LIGHT_NM_GHZ / hi)
}

/// Wavelength width (nm) centred on `center_nm` that spans `width_ghz`.
pub fn ghz_width_to_wavelength(center_nm: f64, width_ghz: f64) -> Result<f64> {
    let nu = SPEED_OF_LIGHT_NM_GHZ / center_nm;
    let lo = nu - 0.5 * width_ghz;
    if !(lo > 0.0) || !(center_nm > 0.0) {
        return Err(Error::domain("frequency interval reaches zero"));
    }
    Ok(SPEED_OF_LIGHT_NM_GHZ / lo - SPEED_OF_LIGHT_NM_GHZ / (nu + 0.5 * width_ghz))
}

/// Rates and resonances of one QD-cavity system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Coherent coupling g.
    pub g: f64,
    /// Cavity field decay rate κ.
    pub kappa: f64,
    /// Dot dipole decay rate γ.
    pub gamma: f64,
    /// Pure dephasing rate γ_d.
    pub gamma_d: f64,
    pub omega_c: f64,
    pub omega_d: f64,
}

impl SystemParams {
    pub fn new(g: f64, kappa: f64, gamma: f64, gamma_d: f64, omega_c: f64, omega_d: f64) -> Result<Self> {
        let p = Self { g, kappa, gamma, gamma_d, omega_c, omega_d };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from boundary units: rates in GHz and resonances as
    /// wavelengths in nm.
    pub fn from_ghz(
        g_ghz: f64,
        kappa_ghz: f64,
        gamma_ghz: f64,
        gamma_d_ghz: f64,
        lambda_cavity_nm: f64,
        lambda_qd_nm: f64,
    ) -> Result<Self> {
        Self::new(
            ghz_to_angular(g_ghz),
            ghz_to_angular(kappa_ghz),
            ghz_to_angular(gamma_ghz),
            ghz_to_angular(gamma_d_ghz),
            wavelength_to_angular_frequency(lambda_cavity_nm)?,
            wavelength_to_angular_frequency(lambda_qd_nm)?,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.g, self.kappa, self.gamma, self.gamma_d, self.omega_c, self.omega_d]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("system parameters must be finite"));
        }
        if self.g < 0.0 {
            return Err(Error::domain(format!("g must be >= 0, got {}", self.g)));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::domain(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::domain(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if self.gamma_d < 0.0 {
            return Err(Error::domain(format!("gamma_d must be >= 0, got {}", self.gamma_d)));
        }
        Ok(())
    }

    /// δ = ω_d − ω_c.
    pub fn detuning(&self) -> f64 {
        self.omega_d - self.omega_c
    }

    pub fn lambda_cavity_nm(&self) -> f64 {
        TAU * SPEED_OF_LIGHT_NM_GHZ / self.omega_c
    }

    pub fn lambda_qd_nm(&self) -> f64 {
        TAU * SPEED_OF_LIGHT_NM_GHZ / self.omega_d
    }

    /// Dimensionless saturation parameter Ω² / (2γ(γ+γ_d)) for Rabi frequency Ω.
    pub fn saturation_parameter(&self, omega_rabi: f64) -> f64 {
        omega_rabi * omega_rabi / (2.0 * self.gamma * (self.gamma + self.gamma_d))
    }

    /// Rabi frequency that realises saturation parameter `p_tilde`.
    pub fn rabi_for_saturation(&self, p_tilde: f64) -> f64 {
        (p_tilde * 2.0 * self.gamma * (self.gamma + self.gamma_d)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriveTarget {
    QdDrive,
    CavityDrive,
}

/// How strongly the laser drives its target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveStrength {
    /// Rabi frequency Ω in rad/ns.
    Rabi(f64),
    /// Measured power P (µW) and conversion constant α (1/µW), P̃ = αP.
    Power { power_uw: f64, alpha: f64 },
}

/// Laser drive description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    pub target: DriveTarget,
    /// Laser angular frequency ω_l.
    pub omega_l: f64,
    pub strength: DriveStrength,
}

impl DriveSpec {
    pub fn with_rabi(target: DriveTarget, omega_l: f64, omega_rabi: f64) -> Result<Self> {
        let d = Self { target, omega_l, strength: DriveStrength::Rabi(omega_rabi) };
        d.validate()?;
        Ok(d)
    }

    pub fn with_power(target: DriveTarget, omega_l: f64, power_uw: f64, alpha: f64) -> Result<Self> {
        let d = Self { target, omega_l, strength: DriveStrength::Power { power_uw, alpha } };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega_l.is_finite() {
            return Err(Error::domain("laser frequency must be finite"));
        }
        match self.strength {
            DriveStrength::Rabi(o) if !(o >= 0.0) || !o.is_finite() => {
                Err(Error::domain(format!("Rabi frequency must be >= 0, got {o}")))
            }
            DriveStrength::Power { power_uw, .. } if !(power_uw >= 0.0) || !power_uw.is_finite() => {
                Err(Error::domain(format!("power must be >= 0, got {power_uw}")))
            }
            DriveStrength::Power { alpha, .. } if !(alpha > 0.0) || !alpha.is_finite() => {
                Err(Error::domain(format!("alpha must be > 0, got {alpha}")))
            }
            _ => Ok(()),
        }
    }

    /// Same drive at a different laser frequency.
    pub fn at_laser(&self, omega_l: f64) -> Self {
        Self { omega_l, ..*self }
    }

    /// Same drive at a different power; `None` if the strength is not
    /// power-based.
    pub fn at_power(&self, power_uw: f64) -> Option<Self> {
        match self.strength {
            DriveStrength::Power { alpha, .. } => {
                Some(Self { strength: DriveStrength::Power { power_uw, alpha }, ..*self })
            }
            DriveStrength::Rabi(_) => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.strength {
            DriveStrength::Power { alpha, .. } => Some(alpha),
            DriveStrength::Rabi(_) => None,
        }
    }

    /// Ω in rad/ns. Power-based drives map through P̃ = αP and
    /// Ω² = 2γ(γ+γ_d)·P̃ for either target.
    pub fn rabi_frequency(&self, params: &SystemParams) -> f64 {
        match self.strength {
            DriveStrength::Rabi(o) => o,
            DriveStrength::Power { power_uw, alpha } => params.rabi_for_saturation(alpha * power_uw),
        }
    }

    /// P̃ for this drive.
    pub fn p_tilde(&self, params: &SystemParams) -> f64 {
        match self.strength {
            DriveStrength::Rabi(o) => params.saturation_parameter(o),
            DriveStrength::Power { power_uw, alpha } => alpha * power_uw,
        }
    }
}

/// Phenomenological incoherent transfer rates between dot and cavity
/// (rad/ns). Zero by default.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IncoherentChannels {
    /// Rate of the `a†σ` jump: a dot excitation becomes a cavity photon.
    pub transfer_qd_to_cavity: f64,
    /// Rate of the `σ†a` jump.
    pub transfer_cavity_to_qd: f64,
}

impl IncoherentChannels {
    pub fn validate(&self) -> Result<()> {
        if !(self.transfer_qd_to_cavity >= 0.0) || !(self.transfer_cavity_to_qd >= 0.0) {
            return Err(Error::domain("transfer rates must be >= 0"));
        }
        Ok(())
    }
}
