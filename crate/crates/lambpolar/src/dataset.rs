//! Polar-image datasets: generation over (layup, material, frequency) in a
//! worker pool, and the manifest that indexes the images.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use lambpolar_core::elastic::{build_layup, material_library, EngineeringConstants, LayupClass};
use lambpolar_core::nn::train::split_indices;
use lambpolar_core::polar::{polar_sweep, rasterize, sample_matset2, BinaryImage, MaterialBounds, PolarCurve};
use lambpolar_core::smm::{Mode, ScanOptions};
use log::{info, warn};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{AppError, IoContext, Result};
use crate::io::tables::{field, read_rows, write_polar, Table};
use crate::io::{pgm, tables};

pub const MANIFEST_HEADER: [&str; 13] = [
    "sample_id",
    "material_id",
    "layup_class",
    "freq_kHz",
    "img_s0",
    "img_a0",
    "rho",
    "E1_GPa",
    "E2_GPa",
    "G12_GPa",
    "nu12",
    "nu23",
    "split",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
    /// The sample could not be generated; see `failures.csv`.
    Failed,
}

impl Split {
    pub fn tag(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Split::Train, Split::Val, Split::Failed].into_iter().find(|x| x.tag() == s.trim())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestRow {
    pub sample_id: u64,
    pub material_id: String,
    pub layup_class: LayupClass,
    pub freq_khz: f64,
    /// Relative to the manifest directory; empty for failed samples.
    pub img_s0: String,
    pub img_a0: String,
    /// (ρ, E1, E2, G12, ν12, ν23) in kg/m³ and GPa.
    pub props: [f64; 6],
    pub split: Split,
}

/// Settings shared by every sample, stored next to the manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestMeta {
    pub matset: u8,
    pub resolution: usize,
    pub scale_s0: f64,
    pub scale_a0: f64,
    pub dphi_deg: f64,
    pub n_layers: usize,
    pub thickness_mm: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub sample_id: u64,
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub dir: PathBuf,
    pub meta: ManifestMeta,
    pub rows: Vec<ManifestRow>,
    pub failures: Vec<Failure>,
}

impl DatasetManifest {
    pub fn usable(&self) -> impl Iterator<Item = &ManifestRow> {
        self.rows.iter().filter(|r| r.split != Split::Failed)
    }

    pub fn classes(&self) -> Vec<LayupClass> {
        let mut c: Vec<LayupClass> = self.rows.iter().map(|r| r.layup_class).collect();
        c.sort();
        c.dedup();
        c
    }

    pub fn image_path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    /// Polar curves of a sample, when the dataset was generated with them.
    pub fn curve_path(&self, sample_id: u64) -> PathBuf {
        self.dir.join(curve_rel(sample_id))
    }
}

fn curve_rel(id: u64) -> String {
    format!("curves/{id:05}.csv")
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetConfig {
    /// 1 = library materials, 2 = uniform draws within `bounds`.
    pub matset: u8,
    pub n_materials: usize,
    pub classes: Vec<LayupClass>,
    pub resolution: usize,
    pub scale_s0: f64,
    pub scale_a0: f64,
    pub dphi_deg: f64,
    pub freqs_khz: Vec<f64>,
    pub n_layers: usize,
    pub thickness_mm: f64,
    pub val_fraction: f64,
    pub save_curves: bool,
    pub seed: u64,
    pub bounds: MaterialBounds,
    pub out_dir: PathBuf,
}

pub const PAPER_FREQS_KHZ: [f64; 10] = [20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0, 160.0, 180.0, 200.0];

impl DatasetConfig {
    /// Library materials in all three layups.
    pub fn dataset1(out_dir: impl Into<PathBuf>) -> Self {
        DatasetConfig {
            matset: 1,
            n_materials: 10,
            classes: LayupClass::ALL.to_vec(),
            resolution: 64,
            scale_s0: 12.0,
            scale_a0: 4.0,
            dphi_deg: 1.0,
            freqs_khz: PAPER_FREQS_KHZ.to_vec(),
            n_layers: 16,
            thickness_mm: 2.0,
            val_fraction: 0.1,
            save_curves: true,
            seed: 0,
            bounds: MaterialBounds::default(),
            out_dir: out_dir.into(),
        }
    }

    /// `n_materials` sampled materials, unidirectional only.
    pub fn dataset2(n_materials: usize, out_dir: impl Into<PathBuf>) -> Self {
        DatasetConfig {
            matset: 2,
            n_materials,
            classes: vec![LayupClass::Unidirectional],
            val_fraction: 0.1481,
            ..Self::dataset1(out_dir)
        }
    }

    pub fn from_config(c: &Config) -> Result<Self> {
        let matset = c.int("matset")?;
        let mut d = match matset {
            1 => Self::dataset1(c.text("out_dir")?),
            2 => Self::dataset2(c.int("n_materials")?, c.text("out_dir")?),
            m => return Err(AppError::Config(format!("matset must be 1 or 2, got {m}"))),
        };
        if !c.is_auto("classes") {
            d.classes = c
                .list("classes")?
                .iter()
                .map(|s| LayupClass::parse(s).ok_or_else(|| AppError::Config(format!("unknown layup class {s:?}"))))
                .collect::<Result<_>>()?;
        }
        if !c.is_auto("val_fraction") {
            d.val_fraction = c.float("val_fraction")?;
        }
        d.resolution = c.int("resolution")?;
        d.scale_s0 = c.float("scale_s0")?;
        d.scale_a0 = c.float("scale_a0")?;
        d.dphi_deg = c.float("dphi_deg")?;
        d.freqs_khz = c.floats("freq_list_khz")?;
        d.n_layers = c.int("n_layers")?;
        d.thickness_mm = c.float("thickness_mm")?;
        d.save_curves = c.flag("save_curves")?;
        d.seed = c.u64("seed")?;
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(AppError::Config(format!("val_fraction {} must be in [0, 1)", self.val_fraction)));
        }
        if self.classes.is_empty() || self.freqs_khz.is_empty() || (self.matset == 2 && self.n_materials == 0) {
            return Err(AppError::Config("dataset would be empty".into()));
        }
        if self.freqs_khz.iter().any(|f| !(*f > 0.0)) {
            return Err(AppError::Config("frequencies must be positive".into()));
        }
        Ok(())
    }

    pub fn meta(&self) -> ManifestMeta {
        ManifestMeta {
            matset: self.matset,
            resolution: self.resolution,
            scale_s0: self.scale_s0,
            scale_a0: self.scale_a0,
            dphi_deg: self.dphi_deg,
            n_layers: self.n_layers,
            thickness_mm: self.thickness_mm,
            seed: self.seed,
        }
    }

    /// (material id, properties or the sampling error) in id order.
    fn materials(&self) -> Vec<(String, lambpolar_core::Result<EngineeringConstants>)> {
        match self.matset {
            1 => material_library().into_iter().map(|m| (m.name, Ok(m.props))).collect(),
            _ => (0..self.n_materials)
                .map(|i| (format!("M2-{i:05}"), sample_matset2(self.seed, i as u64, &self.bounds)))
                .collect(),
        }
    }
}

/// Both curves and images of one sample.
pub struct Sample {
    pub curves: [PolarCurve; 2],
    pub images: [BinaryImage; 2],
}

/// S0 and A0 curves of one laminate at one frequency, rasterised with the
/// per-mode scales.
pub fn render_sample(
    props: &EngineeringConstants,
    material_id: &str,
    class: LayupClass,
    freq_khz: f64,
    meta: &ManifestMeta,
) -> lambpolar_core::Result<Sample> {
    let lam = build_layup(class, meta.n_layers, meta.thickness_mm * 1e-3, *props)?;
    let opts = ScanOptions::default();
    let s0 = polar_sweep(&lam, material_id, freq_khz * 1e3, Mode::S0, meta.dphi_deg, &opts)?;
    let a0 = polar_sweep(&lam, material_id, freq_khz * 1e3, Mode::A0, meta.dphi_deg, &opts)?;
    let i0 = rasterize(&s0, meta.resolution, meta.scale_s0)?;
    let i1 = rasterize(&a0, meta.resolution, meta.scale_a0)?;
    Ok(Sample { curves: [s0, a0], images: [i0, i1] })
}

pub fn generate_dataset(cfg: &DatasetConfig) -> Result<DatasetManifest> {
    cfg.validate()?;
    let dir = cfg.out_dir.clone();
    std::fs::create_dir_all(dir.join("images")).at(&dir)?;
    if cfg.save_curves {
        std::fs::create_dir_all(dir.join("curves")).at(&dir)?;
    }
    let meta = cfg.meta();
    let materials = cfg.materials();
    let mut jobs = Vec::new();
    for &class in &cfg.classes {
        for (mi, _) in materials.iter().enumerate() {
            for &f in &cfg.freqs_khz {
                jobs.push((jobs.len() as u64, class, mi, f));
            }
        }
    }
    info!("generating {} samples into {}", jobs.len(), dir.display());
    let done = AtomicUsize::new(0);
    let results: Vec<(ManifestRow, Option<Failure>)> = jobs
        .par_iter()
        .map(|&(id, class, mi, f)| -> Result<(ManifestRow, Option<Failure>)> {
            let (name, props) = &materials[mi];
            let mut row = ManifestRow {
                sample_id: id,
                material_id: name.clone(),
                layup_class: class,
                freq_khz: f,
                img_s0: String::new(),
                img_a0: String::new(),
                props: props.as_ref().map(|p| p.to_vector_gpa()).unwrap_or([f64::NAN; 6]),
                split: Split::Failed,
            };
            let outcome = props.clone().and_then(|p| render_sample(&p, name, class, f, &meta));
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            if n % 100 == 0 {
                info!("{n}/{} samples", jobs.len());
            }
            match outcome {
                Ok(s) => {
                    row.img_s0 = format!("images/{id:05}_s0.pgm");
                    row.img_a0 = format!("images/{id:05}_a0.pgm");
                    pgm::write(&dir.join(&row.img_s0), &s.images[0])?;
                    pgm::write(&dir.join(&row.img_a0), &s.images[1])?;
                    if cfg.save_curves {
                        write_polar(&dir.join(curve_rel(id)), &s.curves)?;
                    }
                    row.split = Split::Train;
                    Ok((row, None))
                }
                Err(e) => {
                    warn!("sample {id} ({name}, {} {f} kHz): {e}", class.tag());
                    Ok((row, Some(Failure { sample_id: id, code: e.code().into(), message: e.to_string() })))
                }
            }
        })
        .collect::<Result<_>>()?;
    let (mut rows, failures): (Vec<ManifestRow>, Vec<Option<Failure>>) = results.into_iter().unzip();
    let failures: Vec<Failure> = failures.into_iter().flatten().collect();

    let ok: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].split != Split::Failed).collect();
    let (_, val) = split_indices(ok.len(), cfg.val_fraction, cfg.seed);
    for v in val {
        rows[ok[v]].split = Split::Val;
    }
    let m = DatasetManifest { dir, meta, rows, failures };
    write_manifest(&m)?;
    info!("{} samples written, {} failed", ok.len(), m.failures.len());
    Ok(m)
}

fn meta_text(m: &ManifestMeta) -> String {
    format!(
        "matset={}\nresolution={}\nscale_s0={}\nscale_a0={}\ndphi_deg={}\nn_layers={}\nthickness_mm={}\nseed={}\n",
        m.matset, m.resolution, m.scale_s0, m.scale_a0, m.dphi_deg, m.n_layers, m.thickness_mm, m.seed
    )
}

fn parse_meta(text: &str, path: &Path) -> Result<ManifestMeta> {
    let mut kv = std::collections::BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line.split_once('=').ok_or_else(|| AppError::format(path, format!("bad line {line:?}")))?;
        kv.insert(k.trim(), v.trim());
    }
    fn get<T: std::str::FromStr>(kv: &std::collections::BTreeMap<&str, &str>, k: &str, path: &Path) -> Result<T> {
        kv.get(k).and_then(|v| v.parse().ok()).ok_or_else(|| AppError::format(path, format!("missing or bad `{k}`")))
    }
    Ok(ManifestMeta {
        matset: get(&kv, "matset", path)?,
        resolution: get(&kv, "resolution", path)?,
        scale_s0: get(&kv, "scale_s0", path)?,
        scale_a0: get(&kv, "scale_a0", path)?,
        dphi_deg: get(&kv, "dphi_deg", path)?,
        n_layers: get(&kv, "n_layers", path)?,
        thickness_mm: get(&kv, "thickness_mm", path)?,
        seed: get(&kv, "seed", path)?,
    })
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.csv")
}

pub fn write_manifest(m: &DatasetManifest) -> Result<()> {
    let path = manifest_path(&m.dir);
    let mut t = Table::create(&path, &MANIFEST_HEADER)?;
    for r in &m.rows {
        let mut rec = vec![
            r.sample_id.to_string(),
            r.material_id.clone(),
            r.layup_class.tag().to_string(),
            r.freq_khz.to_string(),
            r.img_s0.clone(),
            r.img_a0.clone(),
        ];
        rec.extend(r.props.iter().map(f64::to_string));
        rec.push(r.split.tag().to_string());
        t.row(rec)?;
    }
    t.finish()?;
    let mp = m.dir.join("manifest.meta");
    std::fs::write(&mp, meta_text(&m.meta)).at(&mp)?;
    let fp = m.dir.join("failures.csv");
    let mut t = Table::create(&fp, &["sample_id", "code", "message"])?;
    for f in &m.failures {
        t.row([f.sample_id.to_string(), f.code.clone(), f.message.clone()])?;
    }
    t.finish()
}

/// Load `manifest.csv` (and the neighbouring `manifest.meta` and
/// `failures.csv`).
pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let rows = read_rows(path, &MANIFEST_HEADER)?
        .iter()
        .map(|r| {
            let class = r.get(2).unwrap_or("");
            let split = r.get(12).unwrap_or("");
            let mut props = [0.0; 6];
            for (k, p) in props.iter_mut().enumerate() {
                *p = field(path, r, 6 + k)?;
            }
            Ok(ManifestRow {
                sample_id: field(path, r, 0)?,
                material_id: r.get(1).unwrap_or("").to_string(),
                layup_class: LayupClass::parse(class).ok_or_else(|| AppError::format(path, format!("unknown layup {class:?}")))?,
                freq_khz: field(path, r, 3)?,
                img_s0: r.get(4).unwrap_or("").to_string(),
                img_a0: r.get(5).unwrap_or("").to_string(),
                props,
                split: Split::parse(split).ok_or_else(|| AppError::format(path, format!("unknown split {split:?}")))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mp = dir.join("manifest.meta");
    let meta = parse_meta(&std::fs::read_to_string(&mp).at(&mp)?, &mp)?;
    let fp = dir.join("failures.csv");
    let failures = if fp.exists() {
        tables::read_rows(&fp, &["sample_id", "code", "message"])?
            .iter()
            .map(|r| {
                Ok(Failure { sample_id: field(&fp, r, 0)?, code: r.get(1).unwrap_or("").into(), message: r.get(2).unwrap_or("").into() })
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(DatasetManifest { dir, meta, rows, failures })
}
