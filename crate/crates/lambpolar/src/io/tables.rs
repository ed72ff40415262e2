//! CSV tables. Numbers are written with Rust's shortest round-trip
//! formatting, so every table reads back exactly.

use std::fs::File;
use std::path::Path;

use lambpolar_core::features::{FeatureVector, FEATURE_NAMES};
use lambpolar_core::nn::train::EpochLog;
use lambpolar_core::polar::{PolarCurve, PolarSample};
use lambpolar_core::sensitivity::SweepResult;
use lambpolar_core::smm::{ModalSolution, Mode};

use crate::error::{AppError, Result};

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> AppError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => AppError::Io { path: path.into(), source },
        k => AppError::format(path, format!("{k:?}")),
    }
}

pub struct Table {
    path: std::path::PathBuf,
    w: csv::Writer<File>,
}

impl Table {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(header).map_err(|e| csv_error(path, e))?;
        Ok(Table { path: path.into(), w })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).map_err(|e| csv_error(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush().map_err(|source| AppError::Io { path: self.path.clone(), source })
    }
}

/// Rows of a CSV file whose header must equal `header`.
pub fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let got = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(AppError::format(path, format!("header {:?}, expected {:?}", got.iter().collect::<Vec<_>>(), header)));
    }
    r.records().map(|rec| rec.map_err(|e| csv_error(path, e))).collect()
}

pub(crate) fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<T> {
    let s = rec.get(i).unwrap_or("");
    s.trim().parse().map_err(|_| {
        let line = rec.position().map_or(0, |p| p.line());
        AppError::format(path, format!("line {line}: cannot parse column {} value {s:?}", i + 1))
    })
}

fn mode_field(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<Mode> {
    let s = rec.get(i).unwrap_or("");
    Mode::parse(s).ok_or_else(|| AppError::format(path, format!("unknown mode {s:?}")))
}

pub const DISPERSION_HEADER: [&str; 5] = ["mode", "freq_kHz", "phi_deg", "cp_m_per_s", "xi_rad_per_m"];

pub fn write_dispersion(path: &Path, sols: &[ModalSolution]) -> Result<()> {
    let mut t = Table::create(path, &DISPERSION_HEADER)?;
    for s in sols {
        t.row([s.mode.tag().to_string(), (s.frequency * 1e-3).to_string(), s.phi_deg.to_string(), s.cp.to_string(), s.xi.to_string()])?;
    }
    t.finish()
}

/// (mode, kHz, φ, cp, ξ) rows.
pub fn read_dispersion(path: &Path) -> Result<Vec<(Mode, f64, f64, f64, f64)>> {
    read_rows(path, &DISPERSION_HEADER)?
        .iter()
        .map(|r| Ok((mode_field(path, r, 0)?, field(path, r, 1)?, field(path, r, 2)?, field(path, r, 3)?, field(path, r, 4)?)))
        .collect()
}

pub const POLAR_HEADER: [&str; 7] = ["mode", "freq_kHz", "phi_deg", "ray_deg", "cg_m_per_ms", "skew_deg", "cp_m_per_s"];

pub fn write_polar(path: &Path, curves: &[PolarCurve]) -> Result<()> {
    let mut t = Table::create(path, &POLAR_HEADER)?;
    for c in curves {
        for s in c.by_phi() {
            t.row([
                c.mode.tag().to_string(),
                (c.freq * 1e-3).to_string(),
                s.phi_deg.to_string(),
                s.ray_deg.to_string(),
                s.cg_m_per_ms.to_string(),
                s.skew_deg().to_string(),
                s.cp_m_per_s.to_string(),
            ])?;
        }
    }
    t.finish()
}

/// One curve per consecutive (mode, frequency) block. Material and layup
/// are not stored in the table and come back empty.
pub fn read_polar(path: &Path) -> Result<Vec<PolarCurve>> {
    let mut out: Vec<PolarCurve> = Vec::new();
    for r in read_rows(path, &POLAR_HEADER)? {
        let mode = mode_field(path, &r, 0)?;
        let freq = field::<f64>(path, &r, 1)? * 1e3;
        let s = PolarSample {
            phi_deg: field(path, &r, 2)?,
            ray_deg: field(path, &r, 3)?,
            cg_m_per_ms: field(path, &r, 4)?,
            cp_m_per_s: field(path, &r, 6)?,
        };
        match out.last_mut() {
            Some(c) if c.mode == mode && c.freq == freq => c.samples.push(s),
            _ => out.push(PolarCurve { mode, freq, samples: vec![s], material_id: String::new(), layup_class: None }),
        }
    }
    for c in &mut out {
        c.samples.sort_by(|a, b| a.ray_deg.total_cmp(&b.ray_deg));
    }
    Ok(out)
}

pub const FEATURE_HEADER: [&str; 8] = ["sample_id", "mode", "a", "b", "r", "area", "perim", "circ"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureRow {
    pub sample_id: u64,
    pub mode: Mode,
    pub features: FeatureVector,
}

pub fn write_features(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let mut t = Table::create(path, &FEATURE_HEADER)?;
    for r in rows {
        let mut rec = vec![r.sample_id.to_string(), r.mode.tag().to_string()];
        rec.extend(r.features.to_array().iter().map(f64::to_string));
        t.row(rec)?;
    }
    t.finish()
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    read_rows(path, &FEATURE_HEADER)?
        .iter()
        .map(|r| {
            let v: Vec<f64> = (2..8).map(|i| field(path, r, i)).collect::<Result<_>>()?;
            Ok(FeatureRow {
                sample_id: field(path, r, 0)?,
                mode: mode_field(path, r, 1)?,
                features: FeatureVector { a: v[0], b: v[1], r: v[2], area: v[3], perim: v[4], circ: v[5] },
            })
        })
        .collect()
}

pub const HISTOGRAM_HEADER: [&str; 4] = ["feature", "mode", "bin_start", "count"];

/// `(feature index, mode, bins)` blocks.
pub fn write_histograms(path: &Path, blocks: &[(usize, Mode, Vec<(f64, usize)>)]) -> Result<()> {
    let mut t = Table::create(path, &HISTOGRAM_HEADER)?;
    for (f, mode, bins) in blocks {
        for (start, count) in bins {
            t.row([FEATURE_NAMES[*f].to_string(), mode.tag().to_string(), start.to_string(), count.to_string()])?;
        }
    }
    t.finish()
}

pub const SENSITIVITY_HEADER: [&str; 5] = ["property", "mode", "phi_deg", "freq_kHz", "delta"];

pub fn write_sensitivity(path: &Path, sweeps: &[SweepResult]) -> Result<()> {
    let mut t = Table::create(path, &SENSITIVITY_HEADER)?;
    for s in sweeps {
        t.row([
            s.property.name().to_string(),
            s.mode.tag().to_string(),
            s.phi_deg.to_string(),
            (s.freq * 1e-3).to_string(),
            s.delta.to_string(),
        ])?;
    }
    t.finish()
}

pub fn write_sweep(path: &Path, s: &SweepResult) -> Result<()> {
    let mut t = Table::create(path, &["value", "cg_m_per_s"])?;
    for (v, c) in s.values.iter().zip(&s.cg) {
        t.row([v.to_string(), c.to_string()])?;
    }
    t.finish()
}

pub const LOG_HEADER: [&str; 5] = ["epoch", "loss", "val_loss", "metric", "val_metric"];

pub fn write_log(path: &Path, log: &[EpochLog]) -> Result<()> {
    let mut t = Table::create(path, &LOG_HEADER)?;
    for e in log {
        t.row([e.epoch.to_string(), e.loss.to_string(), e.val_loss.to_string(), e.metric.to_string(), e.val_metric.to_string()])?;
    }
    t.finish()
}

pub fn read_log(path: &Path) -> Result<Vec<EpochLog>> {
    read_rows(path, &LOG_HEADER)?
        .iter()
        .map(|r| {
            Ok(EpochLog {
                epoch: field(path, r, 0)?,
                loss: field(path, r, 1)?,
                val_loss: field(path, r, 2)?,
                metric: field(path, r, 3)?,
                val_metric: field(path, r, 4)?,
            })
        })
        .collect()
}
