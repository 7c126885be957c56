//! Curve fits used to extract linewidths, saturation constants and
//! broadening slopes from simulated or measured data.
//!
//! Nonlinear fits run on rescaled data (`x` and `y` mapped to order one) and
//! the parameters are mapped back afterwards. `objective` and
//! `gradient_norm` in a [`FitResult`] refer to the rescaled problem, which is
//! where the convergence test is applied.

mod lm;

use lm::{minimise, CurveModel, Outcome, Stop};

use crate::scan::{Quantity, SpectrumDataset};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    Lorentzian,
    Saturation,
    PowerBroadening,
    Linear,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::Lorentzian => "lorentzian",
            FitModel::Saturation => "saturation",
            FitModel::PowerBroadening => "power_broadening",
            FitModel::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamEstimate {
    pub name: &'static str,
    pub value: f64,
    /// One standard deviation; infinite when the parameter is not identified.
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnostic {
    /// The data has no variation to fit.
    FlatData,
    /// A parameter is not determined by the data (its σ is set to infinity).
    UnderDetermined,
    MaxIterations,
    /// No damped step reduced the objective before the gradient test passed.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<ParamEstimate>,
    /// Root-mean-square residual in the units of `y`.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub objective: f64,
    pub diagnostics: Vec<Diagnostic>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&ParamEstimate> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.value)
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.sigma)
    }

    pub fn has(&self, d: Diagnostic) -> bool {
        self.diagnostics.contains(&d)
    }
}

fn rms(xs: &[f64], ys: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - f(*x)).powi(2)).sum();
    (ssr / xs.len() as f64).sqrt()
}

fn outcome_diagnostics(out: &Outcome) -> Vec<Diagnostic> {
    let mut d = Vec::new();
    if !out.converged() {
        match out.stop {
            Stop::MaxIterations => d.push(Diagnostic::MaxIterations),
            _ => d.push(Diagnostic::Stalled),
        }
    }
    d
}

/// σ of parameter `i` from the covariance, scaled by `factor`.
fn sigma_of(out: &Outcome, i: usize, factor: f64) -> f64 {
    match &out.covariance {
        Some(c) if c[(i, i)] >= 0.0 => c[(i, i)].sqrt() * factor.abs(),
        _ => f64::INFINITY,
    }
}

fn require_samples(data: &SpectrumDataset, needed: usize) -> Result<()> {
    if data.len() < needed {
        return Err(Error::InsufficientData { needed, got: data.len() });
    }
    Ok(())
}

// ---------------------------------------------------------------- Lorentzian

pub(crate) struct Lorentzian;

impl CurveModel for Lorentzian {
    fn n_params(&self) -> usize {
        4
    }

    // p = [A, x0, w, B]
    fn value(&self, x: f64, p: &[f64]) -> f64 {
        let h2 = 0.25 * p[2] * p[2];
        p[0] * h2 / ((x - p[1]).powi(2) + h2) + p[3]
    }

    fn gradient(&self, x: f64, p: &[f64], row: &mut [f64]) {
        let h = 0.5 * p[2];
        let u = x - p[1];
        let d = u * u + h * h;
        row[0] = h * h / d;
        row[1] = 2.0 * p[0] * h * h * u / (d * d);
        row[2] = p[0] * h * u * u / (d * d);
        row[3] = 1.0;
    }
}

/// Width of the peak at `idx` where it crosses `level`, by linear
/// interpolation on each side.
fn width_at(xs: &[f64], ys: &[f64], idx: usize, level: f64) -> Option<f64> {
    let cross = |i: usize, j: usize| xs[i] + (level - ys[i]) * (xs[j] - xs[i]) / (ys[j] - ys[i]);
    let left = (0..idx).rev().find(|&i| ys[i] <= level).map(|i| cross(i, i + 1))?;
    let right = (idx + 1..xs.len()).find(|&i| ys[i] <= level).map(|i| cross(i - 1, i))?;
    Some(right - left)
}

pub(crate) struct Scaled {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub x_shift: f64,
    pub x_scale: f64,
    pub y_shift: f64,
    pub y_scale: f64,
}

fn rescale(x: &[f64], y: &[f64], y_shift: f64, y_scale: f64) -> Scaled {
    let x_shift = 0.5 * (x[0] + x[x.len() - 1]);
    let x_scale = 0.5 * (x[x.len() - 1] - x[0]);
    Scaled {
        xs: x.iter().map(|v| (v - x_shift) / x_scale).collect(),
        ys: y.iter().map(|v| (v - y_shift) / y_scale).collect(),
        x_shift,
        x_scale,
        y_shift,
        y_scale,
    }
}

/// Rescaled Lorentzian problem and its starting point; `None` for flat data.
pub(crate) fn lorentzian_problem(data: &SpectrumDataset) -> Result<Option<(Scaled, [f64; 4])>> {
    require_samples(data, 5)?;
    let (x, y) = (data.x(), data.y());
    let (imax, &max) = y.iter().enumerate().fold((0, &f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    if max - min <= 1e-14 * max.abs().max(min.abs()) {
        return Ok(None);
    }
    if imax == 0 || imax == y.len() - 1 {
        return Err(Error::IllPosedWindow(format!("peak at the window edge ({} nm)", x[imax])));
    }
    let s = rescale(x, y, min, max - min);
    let w = width_at(&s.xs, &s.ys, imax, 0.5)
        .filter(|w| *w > 0.0)
        .unwrap_or_else(|| 0.5 * (s.xs[imax + 1] - s.xs[imax - 1]));
    let p0 = [1.0, s.xs[imax], w, 0.0];
    Ok(Some((s, p0)))
}

/// Fits `A·(w/2)²/((x−x₀)² + (w/2)²) + B`. Parameters are named `amplitude`,
/// `center`, `fwhm` (units of `x`) and `baseline`.
pub fn fit_lorentzian(data: &SpectrumDataset) -> Result<FitResult> {
    let Some((s, p0)) = lorentzian_problem(data)? else {
        let y = data.y();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        return Ok(FitResult {
            model: FitModel::Lorentzian,
            params: vec![
                ParamEstimate { name: "amplitude", value: 0.0, sigma: f64::INFINITY },
                ParamEstimate { name: "center", value: f64::NAN, sigma: f64::INFINITY },
                ParamEstimate { name: "fwhm", value: f64::NAN, sigma: f64::INFINITY },
                ParamEstimate { name: "baseline", value: mean, sigma: 0.0 },
            ],
            residual_norm: rms(data.x(), y, |_| mean),
            converged: false,
            iterations: 0,
            gradient_norm: 0.0,
            objective: 0.0,
            diagnostics: vec![Diagnostic::FlatData],
        });
    };
    let out = minimise(&Lorentzian, &s.xs, &s.ys, &p0);
    let p = &out.params;
    let amplitude = s.y_scale * p[0];
    let center = s.x_shift + s.x_scale * p[1];
    let fwhm = s.x_scale * p[2].abs();
    let baseline = s.y_shift + s.y_scale * p[3];
    let params = vec![
        ParamEstimate { name: "amplitude", value: amplitude, sigma: sigma_of(&out, 0, s.y_scale) },
        ParamEstimate { name: "center", value: center, sigma: sigma_of(&out, 1, s.x_scale) },
        ParamEstimate { name: "fwhm", value: fwhm, sigma: sigma_of(&out, 2, s.x_scale) },
        ParamEstimate { name: "baseline", value: baseline, sigma: sigma_of(&out, 3, s.y_scale) },
    ];
    let h2 = 0.25 * fwhm * fwhm;
    Ok(FitResult {
        model: FitModel::Lorentzian,
        params,
        residual_norm: rms(data.x(), data.y(), |x| amplitude * h2 / ((x - center).powi(2) + h2) + baseline),
        converged: out.converged(),
        iterations: out.iterations,
        gradient_norm: out.gradient_norm,
        objective: out.objective,
        diagnostics: outcome_diagnostics(&out),
    })
}

// ---------------------------------------------------------------- saturation

pub(crate) struct Saturation;

impl CurveModel for Saturation {
    fn n_params(&self) -> usize {
        2
    }

    // p = [I_sat, alpha]
    fn value(&self, x: f64, p: &[f64]) -> f64 {
        p[0] * p[1] * x / (1.0 + p[1] * x)
    }

    fn gradient(&self, x: f64, p: &[f64], row: &mut [f64]) {
        let d = 1.0 + p[1] * x;
        row[0] = p[1] * x / d;
        row[1] = p[0] * x / (d * d);
    }
}

/// Relative σ_α at or above which α counts as undetermined.
const UNDERDETERMINED_REL_SIGMA: f64 = 1.0;
/// Column-scaled Jacobian conditioning below which the fit is treated as
/// rank deficient.
const MIN_INVERSE_CONDITION: f64 = 1e-6;

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub(crate) fn saturation_problem(data: &SpectrumDataset) -> Result<(Scaled, [f64; 2])> {
    require_samples(data, 5)?;
    let (x, y) = (data.x(), data.y());
    let xmax = x[x.len() - 1];
    if !(xmax > 0.0) {
        return Err(Error::Rank("saturation fit needs a positive power".into()));
    }
    let ymax = y.iter().cloned().fold(0.0, f64::max);
    if y.iter().all(|v| *v == 0.0) || !(ymax > 0.0) {
        return Err(Error::NoSignal);
    }
    let s = Scaled {
        xs: x.iter().map(|v| v / xmax).collect(),
        ys: y.iter().map(|v| v / ymax).collect(),
        x_shift: 0.0,
        x_scale: xmax,
        y_shift: 0.0,
        y_scale: ymax,
    };
    let med = median(&s.xs);
    let alpha0 = if med > 0.0 { 1.0 / med } else { 1.0 };
    Ok((s, [1.5, alpha0]))
}

/// Fits `I_sat·αP/(1+αP)`; parameters `i_sat` and `alpha` (per unit of `x`).
///
/// Data that never bends over leaves α undetermined; the result then carries
/// [`Diagnostic::UnderDetermined`] and an infinite σ for α.
pub fn fit_saturation(data: &SpectrumDataset) -> Result<FitResult> {
    let (s, p0) = saturation_problem(data)?;
    let out = minimise(&Saturation, &s.xs, &s.ys, &p0);
    let i_sat = s.y_scale * out.params[0];
    let alpha = out.params[1] / s.x_scale;
    let mut sigma_i = sigma_of(&out, 0, s.y_scale);
    let mut sigma_a = sigma_of(&out, 1, 1.0 / s.x_scale);
    let mut diagnostics = outcome_diagnostics(&out);
    // best straight line through the origin, the α → 0 edge of the model
    let (x, y) = (data.x(), data.y());
    let k = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|a| a * a).sum::<f64>();
    let ssr_edge: f64 = x.iter().zip(y).map(|(a, b)| (b - k * a).powi(2)).sum();
    let ssr_fit = (out.objective * 2.0) * s.y_scale * s.y_scale;
    let undetermined = ssr_edge <= ssr_fit * (1.0 + 1e-9)
        || !sigma_a.is_finite()
        || sigma_a >= UNDERDETERMINED_REL_SIGMA * alpha.abs()
        || out.inverse_condition < MIN_INVERSE_CONDITION
        || !(alpha > 0.0);
    if undetermined {
        sigma_a = f64::INFINITY;
        sigma_i = f64::INFINITY;
        diagnostics.push(Diagnostic::UnderDetermined);
    }
    Ok(FitResult {
        model: FitModel::Saturation,
        params: vec![
            ParamEstimate { name: "i_sat", value: i_sat, sigma: sigma_i },
            ParamEstimate { name: "alpha", value: alpha, sigma: sigma_a },
        ],
        residual_norm: rms(data.x(), data.y(), |x| i_sat * alpha * x / (1.0 + alpha * x)),
        converged: out.converged(),
        iterations: out.iterations,
        gradient_norm: out.gradient_norm,
        objective: out.objective,
        diagnostics,
    })
}

// --------------------------------------------------------- power broadening

pub(crate) struct PowerBroadening {
    pub alpha: f64,
}

impl CurveModel for PowerBroadening {
    fn n_params(&self) -> usize {
        2
    }

    // p = [Δω_c, Δω_0]
    fn value(&self, x: f64, p: &[f64]) -> f64 {
        p[0] + p[1] * (1.0 + self.alpha * x).sqrt()
    }

    fn gradient(&self, x: f64, _p: &[f64], row: &mut [f64]) {
        row[0] = 1.0;
        row[1] = (1.0 + self.alpha * x).sqrt();
    }
}

pub(crate) fn power_broadening_problem(data: &SpectrumDataset, alpha_fixed: f64) -> Result<(Scaled, [f64; 2])> {
    if !(alpha_fixed > 0.0) || !alpha_fixed.is_finite() {
        return Err(Error::Chaining(format!("alpha from the saturation fit must be positive, got {alpha_fixed}")));
    }
    if data.quantity != Quantity::FwhmGhz {
        return Err(Error::Dataset("power-broadening fit needs linewidth data".into()));
    }
    require_samples(data, 3)?;
    let (x, y) = (data.x(), data.y());
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let s = Scaled {
        xs: x.to_vec(),
        ys: y.iter().map(|v| v / scale).collect(),
        x_shift: 0.0,
        x_scale: 1.0,
        y_shift: 0.0,
        y_scale: scale,
    };
    let y0 = s.ys[0] - x[0] * (s.ys[1] - s.ys[0]) / (x[1] - x[0]);
    let ymin = s.ys.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((s, [(ymin - y0).max(0.0), y0]))
}

/// Fits `Δω_c/2π + (Δω_0/2π)·√(1 + αP)` to linewidths in GHz with α held at
/// `alpha_fixed`. Parameters `delta_omega_c_ghz`, `delta_omega_0_ghz` and
/// `alpha` (the input, untouched).
pub fn fit_power_broadening(linewidths: &SpectrumDataset, alpha_fixed: f64) -> Result<FitResult> {
    let (s, p0) = power_broadening_problem(linewidths, alpha_fixed)?;
    let model = PowerBroadening { alpha: alpha_fixed };
    let out = minimise(&model, &s.xs, &s.ys, &p0);
    let c = s.y_scale * out.params[0];
    let d = s.y_scale * out.params[1];
    Ok(FitResult {
        model: FitModel::PowerBroadening,
        params: vec![
            ParamEstimate { name: "delta_omega_c_ghz", value: c, sigma: sigma_of(&out, 0, s.y_scale) },
            ParamEstimate { name: "delta_omega_0_ghz", value: d, sigma: sigma_of(&out, 1, s.y_scale) },
            ParamEstimate { name: "alpha", value: alpha_fixed, sigma: 0.0 },
        ],
        residual_norm: rms(linewidths.x(), linewidths.y(), |x| c + d * (1.0 + alpha_fixed * x).sqrt()),
        converged: out.converged(),
        iterations: out.iterations,
        gradient_norm: out.gradient_norm,
        objective: out.objective,
        diagnostics: outcome_diagnostics(&out),
    })
}

// -------------------------------------------------------------------- linear

/// Ordinary least squares `y = m·x + b`; parameters `slope` and `intercept`
/// with standard errors (infinite with only two points).
pub fn fit_linear(data: &SpectrumDataset) -> Result<FitResult> {
    let (x, y) = (data.x(), data.y());
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let xm = x.iter().sum::<f64>() / n as f64;
    let ym = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Rank("all x values are equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let (se_m, se_b) = if n > 2 {
        let s2 = ssr / (n - 2) as f64;
        ((s2 / sxx).sqrt(), (s2 * (1.0 / n as f64 + xm * xm / sxx)).sqrt())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let gx: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept) * a).sum();
    let g1: f64 = x.iter().zip(y).map(|(a, b)| b - slope * a - intercept).sum();
    Ok(FitResult {
        model: FitModel::Linear,
        params: vec![
            ParamEstimate { name: "slope", value: slope, sigma: se_m },
            ParamEstimate { name: "intercept", value: intercept, sigma: se_b },
        ],
        residual_norm: (ssr / n as f64).sqrt(),
        converged: true,
        iterations: 0,
        gradient_norm: gx.hypot(g1),
        objective: 0.5 * ssr,
        diagnostics: Vec::new(),
    })
}

/// Subtracts the intrinsic cavity linewidth (GHz) from every linewidth.
pub fn excess_broadening(linewidths: &SpectrumDataset, intrinsic_fwhm_ghz: f64) -> Result<SpectrumDataset> {
    if !(intrinsic_fwhm_ghz > 0.0) || !intrinsic_fwhm_ghz.is_finite() {
        return Err(Error::domain(format!("intrinsic linewidth must be positive, got {intrinsic_fwhm_ghz}")));
    }
    linewidths.map_y(|v| v - intrinsic_fwhm_ghz)
}
