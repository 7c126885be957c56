//! CSV datasets, flat reports and atomic file writes.

use std::io::Write;
use std::path::Path;

use crate::fit::FitResult;
use crate::scan::{Quantity, ScanKind, SpectrumDataset};
use crate::{Error, Result};

pub const HEADER_SCAN: [&str; 2] = ["wavelength_nm", "intensity"];
pub const HEADER_SATURATION: [&str; 2] = ["power_uw", "intensity"];
pub const HEADER_LINEWIDTHS: [&str; 2] = ["power_uw", "fwhm_ghz"];

fn header_for(d: &SpectrumDataset) -> Result<[&'static str; 2]> {
    match (d.kind, d.quantity) {
        (ScanKind::LaserWavelengthScan, Quantity::Intensity) => Ok(HEADER_SCAN),
        (ScanKind::PowerSweep, Quantity::Intensity) => Ok(HEADER_SATURATION),
        (ScanKind::PowerSweep, Quantity::FwhmGhz) => Ok(HEADER_LINEWIDTHS),
        (ScanKind::LaserWavelengthScan, Quantity::FwhmGhz) => {
            Err(Error::Dataset("no CSV layout for linewidths against wavelength".into()))
        }
    }
}

/// CSV text with LF line endings and shortest round-trip number formatting.
pub fn dataset_to_csv(d: &SpectrumDataset) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Dataset(e.to_string());
    w.write_record(header_for(d)?).map_err(io)?;
    for (x, y) in d.x().iter().zip(d.y()) {
        w.write_record([x.to_string(), y.to_string()]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Dataset(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

pub fn dataset_from_csv(text: &str) -> Result<SpectrumDataset> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| Error::Dataset(e.to_string()))?.clone();
    let h: Vec<&str> = headers.iter().collect();
    let (kind, quantity) = if h == HEADER_SCAN {
        (ScanKind::LaserWavelengthScan, Quantity::Intensity)
    } else if h == HEADER_SATURATION {
        (ScanKind::PowerSweep, Quantity::Intensity)
    } else if h == HEADER_LINEWIDTHS {
        (ScanKind::PowerSweep, Quantity::FwhmGhz)
    } else {
        return Err(Error::Dataset(format!("unrecognised CSV header {:?}", h.join(","))));
    };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Dataset(e.to_string()))?;
        let field = |j: usize| -> Result<f64> {
            rec.get(j)
                .ok_or_else(|| Error::Dataset(format!("row {}: missing column", i + 2)))?
                .parse()
                .map_err(|e| Error::Dataset(format!("row {}: {e}", i + 2)))
        };
        xs.push(field(0)?);
        ys.push(field(1)?);
    }
    SpectrumDataset::new(kind, quantity, xs, ys)
}

pub fn read_dataset(path: &Path) -> Result<SpectrumDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
    dataset_from_csv(&text).map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report(pub Vec<(String, String)>);

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn add_fit(&mut self, prefix: &str, fit: &FitResult) {
        let key = |s: &str| if prefix.is_empty() { s.to_string() } else { format!("{prefix}.{s}") };
        self.push(key("model"), fit.model.name());
        for p in &fit.params {
            self.push(key(p.name), p.value);
            self.push(key(&format!("{}_sigma", p.name)), p.sigma);
        }
        self.push(key("residual_rms"), fit.residual_norm);
        self.push(key("converged"), fit.converged);
        self.push(key("iterations"), fit.iterations);
        if !fit.diagnostics.is_empty() {
            let d: Vec<String> = fit.diagnostics.iter().map(|d| format!("{d:?}")).collect();
            self.push(key("diagnostics"), d.join(";"));
        }
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Header and row describing a fit, one column per value.
pub fn fit_csv(fit: &FitResult) -> String {
    let mut head = vec!["model".to_string(), "converged".into(), "iterations".into(), "residual_rms".into()];
    let mut row = vec![
        fit.model.name().to_string(),
        fit.converged.to_string(),
        fit.iterations.to_string(),
        fit.residual_norm.to_string(),
    ];
    for p in &fit.params {
        head.push(p.name.to_string());
        head.push(format!("{}_sigma", p.name));
        row.push(p.value.to_string());
        row.push(p.sigma.to_string());
    }
    format!("{}\n{}\n", head.join(","), row.join(","))
}
