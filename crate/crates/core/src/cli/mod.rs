//! `cqed-scope` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical
//! failure.

pub mod config;
pub mod io;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analytic::{
    combined_linewidth, dispersive_linewidths, polariton_frequencies, table1_theory_linewidth, LinewidthModelParams,
};
use crate::fit::{
    excess_broadening, fit_linear, fit_lorentzian, fit_power_broadening, fit_saturation, Diagnostic, FitResult,
};
use crate::model::{angular_to_ghz, wavelength_width_to_ghz, DriveTarget};
use crate::scan::{
    frequency_window, power_sweep, predicted_linewidth, scan_laser, synthesize_noisy, synthetic_linear_linewidths,
    synthetic_linewidths, synthetic_saturation, Observable, SpectrumDataset, SweepOptions,
};
use crate::Error;

pub use config::RunConfig;
use io::{dataset_to_csv, fit_csv, read_dataset, write_atomic, Report};

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad configuration, arguments or input files.
    Config(String),
    /// A solve or fit failed.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Config(m),
            Error::Dataset(m) => Failure::Config(m),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn cfg_err<T>(r: std::result::Result<T, String>) -> Outcome<T> {
    r.map_err(Failure::Config)
}

fn write_file(path: &Path, contents: &str) -> Outcome<()> {
    write_atomic(path, contents).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_dataset(path: &Path, d: &SpectrumDataset) -> Outcome<()> {
    write_file(path, &dataset_to_csv(d)?)
}

#[derive(Debug, Parser)]
#[command(name = "cqed-scope", version, about = "Quantum-dot / cavity laser-scan emulator and linewidth fitter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Qd,
    Cavity,
}

impl From<TargetArg> for DriveTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Qd => DriveTarget::QdDrive,
            TargetArg::Cavity => DriveTarget::CavityDrive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObserveArg {
    Cavity,
    Qd,
}

impl From<ObserveArg> for Observable {
    fn from(o: ObserveArg) -> Self {
        match o {
            ObserveArg::Cavity => Observable::CavityEmission,
            ObserveArg::Qd => Observable::QdEmission,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    Table1,
    Table2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Lorentzian,
    Saturation,
    PowerBroadening,
    Linear,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Polariton frequencies, dispersive linewidths and the power-broadening prediction.
    Analytic {
        config: PathBuf,
    },
    /// Steady-state laser wavelength scan with a Lorentzian fit.
    Scan {
        config: PathBuf,
        #[arg(long, value_enum)]
        target: Option<TargetArg>,
        /// Defaults to the channel not being driven.
        #[arg(long, value_enum)]
        observe: Option<ObserveArg>,
    },
    /// Saturation and linewidth against power, then the chained fits.
    PowerSweep {
        config: PathBuf,
        /// Generate data from the [synthetic] section instead of simulating.
        #[arg(long)]
        synthetic: bool,
        #[arg(long, value_enum)]
        observe: Option<ObserveArg>,
    },
    /// Rerun the extraction pipeline for every system of a published table.
    Reproduce {
        #[arg(long, value_enum)]
        table: Table,
        /// Directory holding one config per system (S1.toml, ...).
        config_dir: PathBuf,
    },
    /// Fit a CSV dataset.
    Fit {
        #[arg(value_enum)]
        model: FitKind,
        csv: PathBuf,
        /// α (1/µW) for the power-broadening model.
        #[arg(long)]
        alpha: Option<f64>,
        /// Intrinsic linewidth (GHz) subtracted before a linear fit.
        #[arg(long)]
        intrinsic: Option<f64>,
        /// Print the fit as a CSV header and row instead of key = value lines.
        #[arg(long)]
        row: bool,
    },
}

fn load(path: &Path) -> Outcome<RunConfig> {
    cfg_err(RunConfig::load(path))
}

pub fn cmd_analytic(cfg: &RunConfig) -> Outcome<Report> {
    let params = cfg_err(cfg.system_params())?;
    let mut r = Report::default();
    r.push("detuning_ghz", angular_to_ghz(params.detuning()));
    let pair = polariton_frequencies(&params);
    r.push("omega_plus_offset_ghz", angular_to_ghz(pair.omega_plus.re - params.omega_c));
    r.push("omega_plus_fwhm_ghz", angular_to_ghz(-2.0 * pair.omega_plus.im));
    r.push("omega_minus_offset_ghz", angular_to_ghz(pair.omega_minus.re - params.omega_c));
    r.push("omega_minus_fwhm_ghz", angular_to_ghz(-2.0 * pair.omega_minus.im));
    r.push("splitting_ghz", angular_to_ghz(pair.splitting()));
    r.push("qd_like_fwhm_ghz", angular_to_ghz(-2.0 * pair.qd_like(&params).im));
    r.push("cavity_like_fwhm_ghz", angular_to_ghz(-2.0 * pair.cavity_like(&params).im));
    if params.detuning() != 0.0 {
        let d = dispersive_linewidths(&params)?;
        r.push("dispersive_qd_like_fwhm_ghz", angular_to_ghz(d.gamma_qd_like));
        r.push("dispersive_cavity_like_fwhm_ghz", angular_to_ghz(d.gamma_cavity_like));
        r.push("theory_g_eq_kappa_ghz", angular_to_ghz(table1_theory_linewidth(params.kappa, params.detuning())?));
    }
    if let (Some(alpha), true) = (cfg.drive.alpha_per_uw, cfg.has_power_list()) {
        let model = LinewidthModelParams::from_system(&params, alpha)?;
        for p in cfg_err(cfg.powers())? {
            r.push(format!("linewidth_ghz@{p}uw"), angular_to_ghz(combined_linewidth(&model, p)?));
        }
    }
    Ok(r)
}

pub fn cmd_scan(cfg: &RunConfig, target: Option<DriveTarget>, observe: Option<Observable>) -> Outcome<Report> {
    let params = cfg_err(cfg.system_params())?;
    let channels = cfg_err(cfg.channels())?;
    let drive = cfg_err(cfg.drive(target))?;
    let observe = observe.unwrap_or(match drive.target {
        DriveTarget::QdDrive => Observable::CavityEmission,
        DriveTarget::CavityDrive => Observable::QdEmission,
    });
    let center = match drive.target {
        DriveTarget::QdDrive => params.lambda_qd_nm(),
        DriveTarget::CavityDrive => params.lambda_cavity_nm(),
    };
    let predicted = angular_to_ghz(predicted_linewidth(&params, &drive, &channels)?);
    let grid = frequency_window(center, cfg.numerics.window_fwhm * predicted, cfg.numerics.scan_points)?;
    let scan = scan_laser(&params, &drive, &channels, &grid, observe, cfg.numerics.fock_cutoff)?;
    let path = cfg.output_path("scan.csv");
    write_dataset(&path, &scan)?;

    let mut r = Report::default();
    r.push("csv", path.display());
    r.push("predicted_fwhm_ghz", predicted);
    match fit_lorentzian(&scan) {
        Ok(fit) => {
            let (c, w) = (fit.value("center").unwrap_or(f64::NAN), fit.value("fwhm").unwrap_or(f64::NAN));
            let ghz = if w.is_finite() { wavelength_width_to_ghz(c, w)? } else { f64::NAN };
            r.push("fwhm_ghz", ghz);
            r.push("fwhm_nm", w);
            r.add_fit("lorentzian", &fit);
        }
        Err(e) => r.push("fit_error", e),
    }
    Ok(r)
}

/// Saturation fit, then the power-broadening fit with α taken from it.
fn fit_chain(sat: &SpectrumDataset, lw: &SpectrumDataset, r: &mut Report) -> Outcome<Option<(FitResult, FitResult)>> {
    let s = fit_saturation(sat).map_err(|e| Failure::Numerical(format!("saturation unidentifiable: {e}")))?;
    r.add_fit("saturation", &s);
    let reliable = s.converged && !s.has(Diagnostic::UnderDetermined);
    r.push("alpha_reliable", reliable);
    if !reliable {
        r.push("power_broadening.skipped", "alpha from the saturation fit is unreliable");
        return Ok(None);
    }
    let alpha = s.value("alpha").expect("alpha");
    let p = fit_power_broadening(lw, alpha)?;
    r.add_fit("power_broadening", &p);
    Ok(Some((s, p)))
}

fn synthetic_data(cfg: &RunConfig) -> Outcome<(SpectrumDataset, SpectrumDataset)> {
    let syn = cfg.synthetic.as_ref().ok_or_else(|| Failure::Config("missing [synthetic] section".into()))?;
    let (Some(c), Some(d)) = (syn.delta_omega_c_ghz, syn.delta_omega_0_ghz) else {
        return Err(Failure::Config("synthetic: delta_omega_c_ghz and delta_omega_0_ghz are required".into()));
    };
    let alpha = cfg.drive.alpha_per_uw.ok_or_else(|| Failure::Config("drive: alpha_per_uw is required".into()))?;
    let powers = cfg_err(cfg.powers())?;
    let model = LinewidthModelParams::new(crate::model::ghz_to_angular(c), crate::model::ghz_to_angular(d), alpha)
        .map_err(|e| Failure::Config(format!("synthetic: {e}")))?;
    let sat = synthetic_saturation(&powers, syn.i_sat, alpha)?;
    let lw = synthetic_linewidths(&powers, &model)?;
    let seed = cfg.numerics.seed;
    Ok((
        synthesize_noisy(&sat, cfg.numerics.noise, seed)?,
        synthesize_noisy(&lw, cfg.numerics.noise, seed.wrapping_add(1))?,
    ))
}

pub fn cmd_power_sweep(cfg: &RunConfig, synthetic: bool, observe: Option<Observable>) -> Outcome<Report> {
    let mut r = Report::default();
    let (sat, lw) = if synthetic {
        synthetic_data(cfg)?
    } else {
        let params = cfg_err(cfg.system_params())?;
        let channels = cfg_err(cfg.channels())?;
        let drive = cfg_err(cfg.drive(None))?;
        if drive.alpha().is_none() {
            return Err(Failure::Config("power sweep needs power_uw/alpha_per_uw in [drive]".into()));
        }
        let powers = cfg_err(cfg.powers())?;
        let observe = observe.unwrap_or(match drive.target {
            DriveTarget::QdDrive => Observable::CavityEmission,
            DriveTarget::CavityDrive => Observable::QdEmission,
        });
        let options = SweepOptions { points: cfg.numerics.scan_points, window_fwhm: cfg.numerics.window_fwhm };
        let sweep = power_sweep(&params, &drive, &channels, &powers, observe, cfg.numerics.fock_cutoff, options)?;
        let undefined = sweep.undefined_linewidths();
        if !undefined.is_empty() {
            let list: Vec<String> = undefined.iter().map(|p| p.to_string()).collect();
            r.push("undefined_linewidth_powers_uw", list.join(";"));
        }
        let seed = cfg.numerics.seed;
        (
            synthesize_noisy(&sweep.saturation, cfg.numerics.noise, seed)?,
            synthesize_noisy(&sweep.linewidths, cfg.numerics.noise, seed.wrapping_add(1))?,
        )
    };
    let sat_path = cfg.output_path("saturation.csv");
    let lw_path = cfg.output_path("linewidths.csv");
    write_dataset(&sat_path, &sat)?;
    write_dataset(&lw_path, &lw)?;
    r.push("saturation_csv", sat_path.display());
    r.push("linewidths_csv", lw_path.display());
    if let Some((s, p)) = fit_chain(&sat, &lw, &mut r)? {
        write_file(&cfg.output_path("fit_saturation.csv"), &fit_csv(&s))?;
        write_file(&cfg.output_path("fit_power_broadening.csv"), &fit_csv(&p))?;
    }
    let report_path = cfg.output_path("report.txt");
    write_file(&report_path, &r.render())?;
    Ok(r)
}

fn table_systems(table: Table) -> &'static [&'static str] {
    match table {
        Table::Table1 => &["S1", "S2", "S3"],
        Table::Table2 => &["S2", "S4"],
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Relative tolerance reported for recovered parameters.
const RECOVERY_TOL: f64 = 0.05;

pub fn cmd_reproduce(table: Table, dir: &Path) -> Outcome<Report> {
    let names = table_systems(table);
    let missing: Vec<String> = names
        .iter()
        .map(|n| dir.join(format!("{n}.toml")))
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Failure::Config(format!("missing config files: {}", missing.join(", "))));
    }
    let mut r = Report::default();
    for name in names {
        let cfg = load(&dir.join(format!("{name}.toml")))?;
        let reference = cfg.reference.clone().unwrap_or_default();
        let label = reference.label.clone().unwrap_or_else(|| name.to_string());
        match table {
            Table::Table1 => reproduce_table1(&cfg, &label, &reference, &mut r)?,
            Table::Table2 => reproduce_table2(&cfg, &label, &mut r)?,
        }
    }
    Ok(r)
}

fn reproduce_table1(cfg: &RunConfig, label: &str, reference: &config::ReferenceSection, r: &mut Report) -> Outcome<()> {
    let params = cfg_err(cfg.system_params())?;
    let (sat, lw) = synthetic_data(cfg)?;
    write_dataset(&cfg.output_path("saturation.csv"), &sat)?;
    write_dataset(&cfg.output_path("linewidths.csv"), &lw)?;
    let mut sub = Report::default();
    let chain = fit_chain(&sat, &lw, &mut sub)?;
    for (k, v) in sub.0 {
        r.push(format!("{label}.{k}"), v);
    }
    let syn = cfg.synthetic.as_ref().expect("checked by synthetic_data");
    if let Some((_, p)) = chain {
        let c = p.value("delta_omega_c_ghz").expect("param");
        let d = p.value("delta_omega_0_ghz").expect("param");
        let ok = rel_err(c, syn.delta_omega_c_ghz.unwrap()) <= RECOVERY_TOL
            && rel_err(d, syn.delta_omega_0_ghz.unwrap()) <= RECOVERY_TOL;
        r.push(format!("{label}.recovered_within_5pct"), ok);
    }
    if let Some(v) = reference.delta_omega_c_ghz {
        r.push(format!("{label}.reference_delta_omega_c_ghz"), v);
    }
    if let Some(v) = reference.delta_omega_0_ghz {
        r.push(format!("{label}.reference_delta_omega_0_ghz"), v);
    }
    r.push(format!("{label}.detuning_ghz"), angular_to_ghz(params.detuning()));
    r.push(format!("{label}.assumed_kappa_ghz"), cfg.system.kappa_ghz);
    let theory = table1_theory_linewidth(params.kappa, params.detuning())?;
    r.push(format!("{label}.theory_ghz"), angular_to_ghz(theory));
    if let Some(v) = reference.theory_ghz {
        r.push(format!("{label}.reference_theory_ghz"), v);
    }
    Ok(())
}

fn reproduce_table2(cfg: &RunConfig, label: &str, r: &mut Report) -> Outcome<()> {
    let syn = cfg.synthetic.as_ref().ok_or_else(|| Failure::Config("missing [synthetic] section".into()))?;
    let (Some(c0), Some(slope)) = (syn.intrinsic_fwhm_ghz, syn.excess_slope_ghz_per_uw) else {
        return Err(Failure::Config("synthetic: intrinsic_fwhm_ghz and excess_slope_ghz_per_uw are required".into()));
    };
    let powers = cfg_err(cfg.powers())?;
    let lw = synthetic_linear_linewidths(&powers, c0, slope)?;
    let lw = synthesize_noisy(&lw, cfg.numerics.noise, cfg.numerics.seed)?;
    write_dataset(&cfg.output_path("linewidths.csv"), &lw)?;
    let fit = fit_linear(&excess_broadening(&lw, c0)?)?;
    let mut sub = Report::default();
    sub.add_fit("excess", &fit);
    for (k, v) in sub.0 {
        r.push(format!("{label}.{k}"), v);
    }
    let m = fit.value("slope").expect("slope");
    r.push(format!("{label}.intrinsic_fwhm_ghz"), c0);
    r.push(format!("{label}.configured_slope_ghz_per_uw"), slope);
    r.push(format!("{label}.recovered_within_5pct"), rel_err(m, slope) <= RECOVERY_TOL);
    Ok(())
}

pub fn cmd_fit(model: FitKind, csv: &Path, alpha: Option<f64>, intrinsic: Option<f64>) -> Outcome<FitResult> {
    let data = read_dataset(csv)?;
    let fit = match model {
        FitKind::Lorentzian => fit_lorentzian(&data)?,
        FitKind::Saturation => fit_saturation(&data)?,
        FitKind::PowerBroadening => {
            let a = alpha.ok_or_else(|| Failure::Config("power-broadening fit needs --alpha".into()))?;
            fit_power_broadening(&data, a)?
        }
        FitKind::Linear => match intrinsic {
            Some(c0) => fit_linear(&excess_broadening(&data, c0)?)?,
            None => fit_linear(&data)?,
        },
    };
    Ok(fit)
}

pub fn execute(cli: Cli) -> Outcome<String> {
    match cli.command {
        Command::Analytic { config } => Ok(cmd_analytic(&load(&config)?)?.render()),
        Command::Scan { config, target, observe } => {
            Ok(cmd_scan(&load(&config)?, target.map(Into::into), observe.map(Into::into))?.render())
        }
        Command::PowerSweep { config, synthetic, observe } => {
            Ok(cmd_power_sweep(&load(&config)?, synthetic, observe.map(Into::into))?.render())
        }
        Command::Reproduce { table, config_dir } => Ok(cmd_reproduce(table, &config_dir)?.render()),
        Command::Fit { model, csv, alpha, intrinsic, row } => {
            let fit = cmd_fit(model, &csv, alpha, intrinsic)?;
            if row {
                Ok(fit_csv(&fit))
            } else {
                let mut r = Report::default();
                r.add_fit("", &fit);
                Ok(r.render())
            }
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}

pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}
