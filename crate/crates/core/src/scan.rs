//! Emulation of the two laser-scan experiments and of power sweeps.
//!
//! A wavelength scan sets the laser to each grid wavelength, solves for the
//! steady state and records the photon flux leaving one decay channel:
//! `2κ⟨a†a⟩` for cavity emission, `2γ⟨σ†σ⟩` for dot emission. Intensities
//! are relative; nothing downstream depends on their absolute scale.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analytic::{combined_linewidth, LinewidthModelParams};
use crate::fit::{fit_lorentzian, FitResult};
use crate::lindblad::{solve_steady_state, SteadyState};
use crate::model::{
    angular_to_ghz, wavelength_to_angular_frequency, wavelength_width_to_ghz, DriveSpec, DriveTarget,
    IncoherentChannels, SystemParams, SPEED_OF_LIGHT_NM_GHZ,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    LaserWavelengthScan,
    PowerSweep,
}

/// What the `y` column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Relative emission intensity, never negative.
    Intensity,
    /// Full linewidth in GHz.
    FwhmGhz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    CavityEmission,
    QdEmission,
}

impl Observable {
    pub fn signal(self, params: &SystemParams, ss: &SteadyState) -> f64 {
        let v = match self {
            Observable::CavityEmission => 2.0 * params.kappa * ss.observables.photon_number,
            Observable::QdEmission => 2.0 * params.gamma * ss.observables.qd_population,
        };
        // populations can come out at -1e-20 after the solve
        v.max(0.0)
    }
}

/// Simulation settings a dataset was produced with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanMeta {
    pub params: SystemParams,
    pub drive: DriveSpec,
    pub channels: IncoherentChannels,
    pub fock_cutoff: usize,
    pub observe: Observable,
}

/// Sampled `(x, y)` pairs: wavelength (nm) or power (µW) against intensity
/// or linewidth.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDataset {
    pub kind: ScanKind,
    pub quantity: Quantity,
    x: Vec<f64>,
    y: Vec<f64>,
    pub meta: Option<ScanMeta>,
}

impl SpectrumDataset {
    /// Checks that `x` is strictly increasing and `y` finite (and
    /// non-negative for intensities). Sample-count minimums are left to the
    /// consumers, which need different numbers of points.
    pub fn new(kind: ScanKind, quantity: Quantity, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dataset(format!("{} x values but {} y values", x.len(), y.len())));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("values must be finite".into()));
        }
        if let Some(i) = x.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Dataset(format!("x must be strictly increasing (at index {})", i + 1)));
        }
        if quantity == Quantity::Intensity {
            if let Some(v) = y.iter().find(|v| **v < 0.0) {
                return Err(Error::Dataset(format!("intensity must be >= 0, got {v}")));
            }
        }
        Ok(Self { kind, quantity, x, y, meta: None })
    }

    pub fn with_meta(mut self, meta: ScanMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// New dataset with `f` applied to every `y`, same `x` and metadata.
    pub fn map_y(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = Self::new(self.kind, self.quantity, self.x.clone(), self.y.iter().map(|v| f(*v)).collect())?;
        out.meta = self.meta;
        Ok(out)
    }
}

/// Largest distance (nm) a scan wavelength may sit from either resonance.
pub const MAX_SCAN_OFFSET_NM: f64 = 5.0;

#[cfg(feature = "parallel")]
fn map_indexed<F>(grid: &[f64], f: F) -> Vec<Result<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    use rayon::prelude::*;
    grid.par_iter().map(|&x| f(x)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indexed<F>(grid: &[f64], f: F) -> Vec<Result<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    grid.iter().map(|&x| f(x)).collect()
}

/// Steady-state emission while the laser steps through `grid` (nm).
///
/// Grid points are solved independently, possibly in parallel; the output is
/// ordered by wavelength and identical for any degree of parallelism.
pub fn scan_laser(
    params: &SystemParams,
    drive_template: &DriveSpec,
    channels: &IncoherentChannels,
    grid: &[f64],
    observe: Observable,
    fock_cutoff: usize,
) -> Result<SpectrumDataset> {
    params.validate()?;
    drive_template.validate()?;
    channels.validate()?;
    if grid.is_empty() {
        return Err(Error::domain("scan grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("scan grid must be strictly increasing"));
    }
    let (lc, ld) = (params.lambda_cavity_nm(), params.lambda_qd_nm());
    if let Some(l) = grid
        .iter()
        .find(|l| (*l - lc).abs() > MAX_SCAN_OFFSET_NM || (*l - ld).abs() > MAX_SCAN_OFFSET_NM)
    {
        return Err(Error::domain(format!(
            "scan wavelength {l} nm is more than {MAX_SCAN_OFFSET_NM} nm from a resonance ({lc} / {ld} nm)"
        )));
    }

    let results = map_indexed(grid, |lambda| {
        let drive = drive_template.at_laser(wavelength_to_angular_frequency(lambda)?);
        let ss = solve_steady_state(params, &drive, channels, fock_cutoff)?;
        Ok(observe.signal(params, &ss))
    });
    let mut y = Vec::with_capacity(grid.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => y.push(v),
            Err(e) => return Err(Error::ScanSample { index, x: grid[index], source: Box::new(e) }),
        }
    }
    let meta = ScanMeta { params: *params, drive: *drive_template, channels: *channels, fock_cutoff, observe };
    Ok(SpectrumDataset::new(ScanKind::LaserWavelengthScan, Quantity::Intensity, grid.to_vec(), y)?.with_meta(meta))
}

/// Wavelength grid (ascending) that is evenly spaced in frequency around
/// `center_nm`, spanning `width_ghz`.
pub fn frequency_window(center_nm: f64, width_ghz: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(width_ghz > 0.0) || !width_ghz.is_finite() {
        return Err(Error::domain("window needs >= 2 points and a positive finite width"));
    }
    let nu0 = SPEED_OF_LIGHT_NM_GHZ / center_nm;
    let step = width_ghz / (points - 1) as f64;
    // highest frequency first so wavelengths come out ascending
    let grid: Vec<f64> = (0..points)
        .map(|i| SPEED_OF_LIGHT_NM_GHZ / (nu0 + 0.5 * width_ghz - step * i as f64))
        .collect();
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("window too narrow to resolve in wavelength"));
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Samples per wavelength scan (at least 201).
    pub points: usize,
    /// Scan window in units of the predicted linewidth (at least 6).
    pub window_fwhm: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { points: 201, window_fwhm: 6.0 }
    }
}

/// One power of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub power_uw: f64,
    pub intensity: f64,
    /// Fitted linewidth (GHz); `None` when undefined.
    pub fwhm_ghz: Option<f64>,
    pub fit: Option<FitResult>,
    /// Why the linewidth is undefined, if it is.
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PowerSweep {
    /// Power against on-resonance intensity, every power.
    pub saturation: SpectrumDataset,
    /// Power against fitted linewidth, powers with a defined linewidth only.
    pub linewidths: SpectrumDataset,
    pub points: Vec<SweepPoint>,
}

impl PowerSweep {
    /// Powers whose linewidth could not be determined.
    pub fn undefined_linewidths(&self) -> Vec<f64> {
        self.points.iter().filter(|p| p.fwhm_ghz.is_none()).map(|p| p.power_uw).collect()
    }
}

/// Linewidth (rad/ns) the analytic model predicts for this drive, used to
/// size scan windows.
pub fn predicted_linewidth(params: &SystemParams, drive: &DriveSpec, channels: &IncoherentChannels) -> Result<f64> {
    let transfer = channels.transfer_qd_to_cavity + channels.transfer_cavity_to_qd;
    match drive.target {
        DriveTarget::QdDrive => {
            // unit α so that P = P̃
            let m = LinewidthModelParams::from_system(params, 1.0)?;
            Ok(combined_linewidth(&m, drive.p_tilde(params))? + transfer)
        }
        DriveTarget::CavityDrive => {
            let delta = params.detuning();
            let mix = if delta == 0.0 { 0.0 } else { (params.g / delta).powi(2) };
            Ok(2.0 * params.kappa + 2.0 * mix * params.gamma + transfer)
        }
    }
}

/// Runs a wavelength scan at each power and records the resonant intensity and
/// the Lorentzian linewidth.
pub fn power_sweep(
    params: &SystemParams,
    drive_template: &DriveSpec,
    channels: &IncoherentChannels,
    powers: &[f64],
    observe: Observable,
    fock_cutoff: usize,
    options: SweepOptions,
) -> Result<PowerSweep> {
    if drive_template.alpha().is_none() {
        return Err(Error::domain("power sweep needs a power-based drive with alpha"));
    }
    if options.points < 201 || !(options.window_fwhm >= 6.0) {
        return Err(Error::domain("sweep windows need >= 201 points spanning >= 6 linewidths"));
    }
    if powers.is_empty() || powers.iter().any(|p| !(*p >= 0.0)) || powers.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("powers must be non-negative and strictly increasing"));
    }
    let center_nm = match drive_template.target {
        DriveTarget::QdDrive => params.lambda_qd_nm(),
        DriveTarget::CavityDrive => params.lambda_cavity_nm(),
    };

    let mut points = Vec::with_capacity(powers.len());
    for &power in powers {
        if power == 0.0 {
            points.push(SweepPoint {
                power_uw: 0.0,
                intensity: 0.0,
                fwhm_ghz: None,
                fit: None,
                note: Some("no drive at zero power".into()),
            });
            continue;
        }
        let drive = drive_template.at_power(power).expect("power-based drive");
        let predicted = angular_to_ghz(predicted_linewidth(params, &drive, channels)?);
        if !predicted.is_finite() || !(predicted > 0.0) {
            return Err(Error::Config(format!("cannot size scan window: predicted linewidth {predicted} GHz")));
        }
        let grid = frequency_window(center_nm, options.window_fwhm * predicted, options.points)?;
        let scan = scan_laser(params, &drive, channels, &grid, observe, fock_cutoff)?;

        let (fwhm, fit, note, peak_nm) = match fit_lorentzian(&scan) {
            Ok(f) if f.converged => {
                let w = f.value("fwhm").unwrap_or(f64::NAN);
                let x0 = f.value("center").unwrap_or(center_nm);
                (Some(wavelength_width_to_ghz(x0, w)?), Some(f), None, x0)
            }
            Ok(f) => (None, Some(f), Some("Lorentzian fit did not converge".to_string()), center_nm),
            Err(e) => (None, None, Some(e.to_string()), center_nm),
        };
        let probe = drive.at_laser(wavelength_to_angular_frequency(peak_nm)?);
        let intensity = observe.signal(params, &solve_steady_state(params, &probe, channels, fock_cutoff)?);
        points.push(SweepPoint { power_uw: power, intensity, fwhm_ghz: fwhm, fit, note });
    }

    let saturation = SpectrumDataset::new(
        ScanKind::PowerSweep,
        Quantity::Intensity,
        points.iter().map(|p| p.power_uw).collect(),
        points.iter().map(|p| p.intensity).collect(),
    )?;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().filter_map(|p| p.fwhm_ghz.map(|w| (p.power_uw, w))).unzip();
    let linewidths = SpectrumDataset::new(ScanKind::PowerSweep, Quantity::FwhmGhz, lx, ly)?;
    Ok(PowerSweep { saturation, linewidths, points })
}

/// Multiplies each `y` by `1 + relative_noise·u`, `u` standard normal from a
/// ChaCha8 stream seeded with `seed`. Intensities are clipped at zero.
pub fn synthesize_noisy(dataset: &SpectrumDataset, relative_noise: f64, seed: u64) -> Result<SpectrumDataset> {
    if !(0.0..=0.5).contains(&relative_noise) {
        return Err(Error::domain(format!("relative noise must lie in [0, 0.5], got {relative_noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clip = dataset.quantity == Quantity::Intensity;
    let y = dataset
        .y
        .iter()
        .map(|v| {
            let u: f64 = StandardNormal.sample(&mut rng);
            let noisy = v * (1.0 + relative_noise * u);
            if clip {
                noisy.max(0.0)
            } else {
                noisy
            }
        })
        .collect();
    let mut out = SpectrumDataset::new(dataset.kind, dataset.quantity, dataset.x.clone(), y)?;
    out.meta = dataset.meta;
    Ok(out)
}

/// `n` logarithmically spaced values from `start` to `stop` inclusive.
pub fn log_grid(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if !(start > 0.0) || !(stop > start) || n < 2 {
        return Err(Error::domain("log grid needs 0 < start < stop and n >= 2"));
    }
    let (a, b) = (start.ln(), stop.ln());
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                stop
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if !(stop > start) || n < 2 {
        return Err(Error::domain("linear grid needs start < stop and n >= 2"));
    }
    Ok((0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect())
}

/// Saturation curve `I_sat·αP/(1+αP)`.
pub fn synthetic_saturation(powers: &[f64], i_sat: f64, alpha: f64) -> Result<SpectrumDataset> {
    let y = powers.iter().map(|p| i_sat * alpha * p / (1.0 + alpha * p)).collect();
    SpectrumDataset::new(ScanKind::PowerSweep, Quantity::Intensity, powers.to_vec(), y)
}

/// Linewidths (GHz) from the combined model.
pub fn synthetic_linewidths(powers: &[f64], model: &LinewidthModelParams) -> Result<SpectrumDataset> {
    let y = powers
        .iter()
        .map(|p| combined_linewidth(model, *p).map(angular_to_ghz))
        .collect::<Result<Vec<_>>>()?;
    SpectrumDataset::new(ScanKind::PowerSweep, Quantity::FwhmGhz, powers.to_vec(), y)
}

/// Linewidths (GHz) that grow linearly with power from `intrinsic_ghz`.
pub fn synthetic_linear_linewidths(powers: &[f64], intrinsic_ghz: f64, slope_ghz_per_uw: f64) -> Result<SpectrumDataset> {
    let y = powers.iter().map(|p| intrinsic_ghz + slope_ghz_per_uw * p).collect();
    SpectrumDataset::new(ScanKind::PowerSweep, Quantity::FwhmGhz, powers.to_vec(), y)
}

/// `A·(w/2)²/((x−x₀)² + (w/2)²) + B` sampled on `grid`.
pub fn synthetic_lorentzian(grid: &[f64], amplitude: f64, center: f64, fwhm: f64, baseline: f64) -> Result<SpectrumDataset> {
    let h2 = 0.25 * fwhm * fwhm;
    let y = grid.iter().map(|x| amplitude * h2 / ((x - center).powi(2) + h2) + baseline).collect();
    SpectrumDataset::new(ScanKind::LaserWavelengthScan, Quantity::Intensity, grid.to_vec(), y)
}
