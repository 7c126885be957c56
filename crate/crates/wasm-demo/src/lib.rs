//! Browser bindings for three interactive views: a steady-state laser scan,
//! the power-broadening curve and the polariton anticrossing.
//!
//! Each export has a plain Rust counterpart returning `Result<_, String>` so
//! the logic can be tested natively; the wrappers only convert errors.

use cqed_core::analytic::{combined_linewidth, polariton_frequencies, LinewidthModelParams};
use cqed_core::fit::fit_lorentzian;
use cqed_core::model::{
    angular_to_ghz, ghz_to_angular, wavelength_to_angular_frequency, wavelength_width_to_ghz, DriveSpec,
    DriveTarget, IncoherentChannels, SystemParams, SPEED_OF_LIGHT_NM_GHZ,
};
use cqed_core::scan::{frequency_window, predicted_linewidth, scan_laser, Observable};
use wasm_bindgen::prelude::*;

/// Sampled curve. `y2` is empty unless the view has a second trace.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    x: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
    /// Fitted or characteristic width in GHz, NaN when not applicable.
    width_ghz: f64,
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn y(&self) -> Vec<f64> {
        self.y.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn y2(&self) -> Vec<f64> {
        self.y2.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn width_ghz(&self) -> f64 {
        self.width_ghz
    }
}

/// Upper bound on samples per curve; keeps the page responsive.
const MAX_POINTS: usize = 2001;

fn check_points(points: usize) -> Result<(), String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must lie in 2..={MAX_POINTS}"));
    }
    Ok(())
}

/// Laser scan across the driven resonance. `x` is the laser offset from that
/// resonance in GHz, `y` the emission of the observed channel.
#[allow(clippy::too_many_arguments)]
pub fn scan_curve(
    g_ghz: f64,
    kappa_ghz: f64,
    gamma_ghz: f64,
    gamma_d_ghz: f64,
    lambda_cavity_nm: f64,
    lambda_qd_nm: f64,
    drive_cavity: bool,
    observe_cavity: bool,
    rabi_ghz: f64,
    points: usize,
) -> Result<Curve, String> {
    check_points(points)?;
    let p = SystemParams::from_ghz(g_ghz, kappa_ghz, gamma_ghz, gamma_d_ghz, lambda_cavity_nm, lambda_qd_nm)
        .map_err(|e| e.to_string())?;
    let (target, center) = if drive_cavity {
        (DriveTarget::CavityDrive, lambda_cavity_nm)
    } else {
        (DriveTarget::QdDrive, lambda_qd_nm)
    };
    let omega_l = wavelength_to_angular_frequency(center).map_err(|e| e.to_string())?;
    let drive = DriveSpec::with_rabi(target, omega_l, ghz_to_angular(rabi_ghz)).map_err(|e| e.to_string())?;
    let channels = IncoherentChannels::default();
    let width = angular_to_ghz(predicted_linewidth(&p, &drive, &channels).map_err(|e| e.to_string())?);
    let grid = frequency_window(center, 8.0 * width, points).map_err(|e| e.to_string())?;
    let observe = if observe_cavity { Observable::CavityEmission } else { Observable::QdEmission };
    let scan = scan_laser(&p, &drive, &channels, &grid, observe, 3).map_err(|e| e.to_string())?;
    let nu0 = SPEED_OF_LIGHT_NM_GHZ / center;
    let fitted = fit_lorentzian(&scan)
        .ok()
        .filter(|f| f.converged)
        .and_then(|f| wavelength_width_to_ghz(f.value("center")?, f.value("fwhm")?).ok())
        .unwrap_or(f64::NAN);
    Ok(Curve {
        // positive offset is red of the resonance
        x: grid.iter().map(|l| nu0 - SPEED_OF_LIGHT_NM_GHZ / l).collect(),
        y: scan.y().to_vec(),
        y2: Vec::new(),
        width_ghz: fitted,
    })
}

/// Linewidth `Δω_c + Δω_0·sqrt(1 + αP)` in GHz for `P` from 0 to
/// `max_power_uw`; `y2` holds the dot-only part `Δω_0·sqrt(1 + αP)`.
pub fn broadening_curve(
    delta_omega_c_ghz: f64,
    delta_omega_0_ghz: f64,
    alpha_per_uw: f64,
    max_power_uw: f64,
    points: usize,
) -> Result<Curve, String> {
    check_points(points)?;
    if !(max_power_uw > 0.0) {
        return Err("max power must be > 0".into());
    }
    let m = LinewidthModelParams::new(ghz_to_angular(delta_omega_c_ghz), ghz_to_angular(delta_omega_0_ghz), alpha_per_uw)
        .map_err(|e| e.to_string())?;
    let x: Vec<f64> = (0..points).map(|i| max_power_uw * i as f64 / (points - 1) as f64).collect();
    let y = x
        .iter()
        .map(|p| combined_linewidth(&m, *p).map(angular_to_ghz))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let y2 = y.iter().map(|v| v - delta_omega_c_ghz).collect();
    Ok(Curve { x, y, y2, width_ghz: delta_omega_0_ghz })
}

/// Polariton resonances (GHz, relative to the cavity) as the dot is tuned
/// through the cavity over ±`span_ghz`. `y` is the upper branch, `y2` the
/// lower; `width_ghz` is the splitting at zero detuning.
pub fn anticrossing_curve(g_ghz: f64, kappa_ghz: f64, gamma_ghz: f64, span_ghz: f64, points: usize) -> Result<Curve, String> {
    check_points(points)?;
    if !(span_ghz > 0.0) {
        return Err("span must be > 0".into());
    }
    let params = |delta: f64| {
        SystemParams::new(ghz_to_angular(g_ghz), ghz_to_angular(kappa_ghz), ghz_to_angular(gamma_ghz), 0.0, 0.0, ghz_to_angular(delta))
            .map_err(|e| e.to_string())
    };
    let x: Vec<f64> = (0..points).map(|i| -span_ghz + 2.0 * span_ghz * i as f64 / (points - 1) as f64).collect();
    let (mut y, mut y2) = (Vec::with_capacity(points), Vec::with_capacity(points));
    for d in &x {
        let pair = polariton_frequencies(&params(*d)?);
        y.push(angular_to_ghz(pair.omega_plus.re));
        y2.push(angular_to_ghz(pair.omega_minus.re));
    }
    let split = angular_to_ghz(polariton_frequencies(&params(0.0)?).splitting());
    Ok(Curve { x, y, y2, width_ghz: split })
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn laser_scan(
    g_ghz: f64,
    kappa_ghz: f64,
    gamma_ghz: f64,
    gamma_d_ghz: f64,
    lambda_cavity_nm: f64,
    lambda_qd_nm: f64,
    drive_cavity: bool,
    observe_cavity: bool,
    rabi_ghz: f64,
    points: usize,
) -> Result<Curve, JsError> {
    scan_curve(
        g_ghz,
        kappa_ghz,
        gamma_ghz,
        gamma_d_ghz,
        lambda_cavity_nm,
        lambda_qd_nm,
        drive_cavity,
        observe_cavity,
        rabi_ghz,
        points,
    )
    .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn power_broadening(
    delta_omega_c_ghz: f64,
    delta_omega_0_ghz: f64,
    alpha_per_uw: f64,
    max_power_uw: f64,
    points: usize,
) -> Result<Curve, JsError> {
    broadening_curve(delta_omega_c_ghz, delta_omega_0_ghz, alpha_per_uw, max_power_uw, points)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn anticrossing(g_ghz: f64, kappa_ghz: f64, gamma_ghz: f64, span_ghz: f64, points: usize) -> Result<Curve, JsError> {
    anticrossing_curve(g_ghz, kappa_ghz, gamma_ghz, span_ghz, points).map_err(|e| JsError::new(&e))
}
