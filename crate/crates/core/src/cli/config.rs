//! Run configuration files.
//!
//! ```toml
//! [system]
//! g_ghz = 10.0
//! kappa_ghz = 32.0
//! gamma_ghz = 0.5
//! gamma_d_ghz = 0.3
//! lambda_cavity_nm = 934.8
//! lambda_qd_nm = 934.15
//!
//! [drive]
//! target = "qd"
//! power_uw = 1.0
//! alpha_per_uw = 0.2
//! powers_uw = [1, 2, 5, 10]
//! ```
//!
//! All rates are given as ω/2π in GHz. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::model::{
    ghz_to_angular, wavelength_to_angular_frequency, DriveSpec, DriveTarget, IncoherentChannels, SystemParams,
};
use crate::scan::{linear_grid, log_grid};

/// Environment variable that overrides `output.dir`.
pub const OUT_DIR_ENV: &str = "CQED_SCOPE_OUT";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub channels: ChannelsSection,
    #[serde(default)]
    pub output: OutputSection,
    pub synthetic: Option<SyntheticSection>,
    pub reference: Option<ReferenceSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub g_ghz: f64,
    pub kappa_ghz: f64,
    pub gamma_ghz: f64,
    #[serde(default)]
    pub gamma_d_ghz: f64,
    pub lambda_cavity_nm: f64,
    pub lambda_qd_nm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKey {
    #[default]
    Qd,
    Cavity,
}

impl From<TargetKey> for DriveTarget {
    fn from(t: TargetKey) -> Self {
        match t {
            TargetKey::Qd => DriveTarget::QdDrive,
            TargetKey::Cavity => DriveTarget::CavityDrive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerGrid {
    pub start_uw: f64,
    pub stop_uw: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    #[serde(default)]
    pub target: TargetKey,
    pub rabi_ghz: Option<f64>,
    pub power_uw: Option<f64>,
    pub alpha_per_uw: Option<f64>,
    /// Defaults to the driven resonance.
    pub lambda_laser_nm: Option<f64>,
    pub powers_uw: Option<Vec<f64>>,
    pub power_grid: Option<PowerGrid>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(default = "default_fock_cutoff")]
    pub fock_cutoff: usize,
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
    /// Scan window width in predicted linewidths.
    #[serde(default = "default_window")]
    pub window_fwhm: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Relative multiplicative noise added to generated data.
    #[serde(default)]
    pub noise: f64,
}

fn default_fock_cutoff() -> usize {
    3
}
fn default_scan_points() -> usize {
    201
}
fn default_window() -> f64 {
    8.0
}
fn default_seed() -> u64 {
    7
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            fock_cutoff: default_fock_cutoff(),
            scan_points: default_scan_points(),
            window_fwhm: default_window(),
            seed: default_seed(),
            noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsSection {
    #[serde(default)]
    pub transfer_qd_to_cavity_ghz: f64,
    #[serde(default)]
    pub transfer_cavity_to_qd_ghz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_stem")]
    pub stem: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_stem() -> String {
    "run".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), stem: default_stem() }
    }
}

/// Ground truth for generated power-sweep data.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub delta_omega_c_ghz: Option<f64>,
    pub delta_omega_0_ghz: Option<f64>,
    #[serde(default = "default_i_sat")]
    pub i_sat: f64,
    /// Intrinsic cavity linewidth Δω_c0/2π for the excess-broadening model.
    pub intrinsic_fwhm_ghz: Option<f64>,
    pub excess_slope_ghz_per_uw: Option<f64>,
}

fn default_i_sat() -> f64 {
    1000.0
}

/// Published values printed next to recomputed ones.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    pub label: Option<String>,
    pub delta_omega_c_ghz: Option<f64>,
    pub delta_omega_0_ghz: Option<f64>,
    pub theory_ghz: Option<f64>,
    pub intrinsic_fwhm_ghz: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    fn check(&self) -> Result<(), String> {
        self.system_params()?;
        self.channels()?;
        if self.drive.rabi_ghz.is_some() && self.drive.power_uw.is_some() {
            return Err("drive: give either rabi_ghz or power_uw, not both".into());
        }
        if self.drive.powers_uw.is_some() && self.drive.power_grid.is_some() {
            return Err("drive: give either powers_uw or power_grid, not both".into());
        }
        if self.numerics.fock_cutoff == 0 {
            return Err("numerics.fock_cutoff must be >= 1".into());
        }
        if !(0.0..=0.5).contains(&self.numerics.noise) {
            return Err(format!("numerics.noise must lie in [0, 0.5], got {}", self.numerics.noise));
        }
        if self.output.stem.is_empty() || self.output.stem.contains(['/', '\\']) {
            return Err(format!("output.stem must be a plain file stem, got {:?}", self.output.stem));
        }
        if self.has_power_list() {
            self.powers()?;
        }
        Ok(())
    }

    pub fn system_params(&self) -> Result<SystemParams, String> {
        let s = &self.system;
        SystemParams::from_ghz(s.g_ghz, s.kappa_ghz, s.gamma_ghz, s.gamma_d_ghz, s.lambda_cavity_nm, s.lambda_qd_nm)
            .map_err(|e| format!("system: {e}"))
    }

    pub fn channels(&self) -> Result<IncoherentChannels, String> {
        let c = IncoherentChannels {
            transfer_qd_to_cavity: ghz_to_angular(self.channels.transfer_qd_to_cavity_ghz),
            transfer_cavity_to_qd: ghz_to_angular(self.channels.transfer_cavity_to_qd_ghz),
        };
        c.validate().map_err(|e| format!("channels: {e}"))?;
        Ok(c)
    }

    /// Drive for the configured target, or for `target` if given.
    pub fn drive(&self, target: Option<DriveTarget>) -> Result<DriveSpec, String> {
        let params = self.system_params()?;
        let target = target.unwrap_or(self.drive.target.into());
        let omega_l = match self.drive.lambda_laser_nm {
            Some(l) => wavelength_to_angular_frequency(l).map_err(|e| format!("drive.lambda_laser_nm: {e}"))?,
            None => match target {
                DriveTarget::QdDrive => params.omega_d,
                DriveTarget::CavityDrive => params.omega_c,
            },
        };
        let d = &self.drive;
        let spec = match (d.rabi_ghz, d.power_uw, d.alpha_per_uw) {
            (Some(r), _, _) => DriveSpec::with_rabi(target, omega_l, ghz_to_angular(r)),
            (None, p, Some(a)) => DriveSpec::with_power(target, omega_l, p.unwrap_or(0.0), a),
            (None, Some(_), None) => return Err("drive: power_uw needs alpha_per_uw".into()),
            (None, None, None) => return Err("drive: no drive strength (rabi_ghz or power_uw + alpha_per_uw)".into()),
        };
        spec.map_err(|e| format!("drive: {e}"))
    }

    pub fn has_power_list(&self) -> bool {
        self.drive.powers_uw.is_some() || self.drive.power_grid.is_some()
    }

    pub fn powers(&self) -> Result<Vec<f64>, String> {
        let p = match (&self.drive.powers_uw, &self.drive.power_grid) {
            (Some(p), _) => p.clone(),
            (None, Some(g)) => match g.spacing {
                Spacing::Log => log_grid(g.start_uw, g.stop_uw, g.points),
                Spacing::Linear => linear_grid(g.start_uw, g.stop_uw, g.points),
            }
            .map_err(|e| format!("drive.power_grid: {e}"))?,
            (None, None) => return Err("drive: no powers configured (powers_uw or power_grid)".into()),
        };
        if p.is_empty() || p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) || p.windows(2).any(|w| !(w[1] > w[0])) {
            return Err("drive: powers must be non-negative, finite and strictly increasing".into());
        }
        Ok(p)
    }

    /// Output directory, honouring the environment override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output.dir.clone(),
        }
    }

    pub fn output_path(&self, suffix: &str) -> PathBuf {
        self.output_dir().join(format!("{}_{suffix}", self.output.stem))
    }
}
