//! Flat `key = value` run configuration. Each command owns a static schema;
//! the same schema drives validation, defaults and the CLI flags and help.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{AppError, IoContext, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Text,
    Int,
    Float,
    FloatList,
    TextList,
    Bool,
}

impl Kind {
    fn check(self, v: &str) -> std::result::Result<(), String> {
        let v = v.trim();
        if v.is_empty() || v == "auto" {
            return Ok(());
        }
        let ok = match self {
            Kind::Text | Kind::TextList => true,
            Kind::Int => v.parse::<u64>().is_ok(),
            Kind::Float => v.parse::<f64>().map(f64::is_finite).unwrap_or(false),
            Kind::FloatList => v.split(',').all(|x| x.trim().parse::<f64>().map(f64::is_finite).unwrap_or(false)),
            Kind::Bool => matches!(v, "true" | "false"),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("expected {}", self.describe()))
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Kind::Text => "text",
            Kind::Int => "a non-negative integer",
            Kind::Float => "a number",
            Kind::FloatList => "a comma-separated list of numbers",
            Kind::TextList => "a comma-separated list",
            Kind::Bool => "true or false",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    /// `""` means unset, `"auto"` means derived from other keys.
    pub default: &'static str,
    pub doc: &'static str,
}

#[derive(Debug)]
pub struct Schema {
    pub command: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
}

impl Schema {
    pub fn key(&self, name: &str) -> Option<&Key> {
        self.keys.iter().find(|k| k.name == name)
    }
}

const fn key(name: &'static str, kind: Kind, default: &'static str, doc: &'static str) -> Key {
    Key { name, kind, default, doc }
}

const SEED: Key = key("seed", Kind::Int, "0", "random seed");
const OUT_DIR: Key = key("out_dir", Kind::Text, "out", "output directory");
const MATERIAL: Key = key(
    "material",
    Kind::Text,
    "T700M21",
    "library material name, `matset2-mid`, or rho,E1,E2,G12,nu12,nu23 in kg/m3 and GPa",
);
const LAYUP: Key = key("layup", Kind::Text, "ud", "layup class: ud, cp or qi");
const N_LAYERS: Key = key("n_layers", Kind::Int, "16", "number of plies");
const THICKNESS: Key = key("thickness_mm", Kind::Float, "2", "plate thickness, mm");
const MODE: Key = key("mode", Kind::TextList, "s0,a0", "modes to solve (s0, a0)");
const SCALE_S0: Key = key("scale_s0", Kind::Float, "12", "S0 image half-width, m/ms");
const SCALE_A0: Key = key("scale_a0", Kind::Float, "4", "A0 image half-width, m/ms");
const DPHI: Key = key("dphi_deg", Kind::Float, "1", "propagation-angle increment, deg (must divide 360)");

pub static DISPERSION: Schema = Schema {
    command: "dispersion",
    about: "Trace A0/S0 dispersion branches over frequency",
    keys: &[
        MATERIAL,
        LAYUP,
        N_LAYERS,
        THICKNESS,
        MODE,
        key("phi_deg", Kind::Float, "0", "propagation angle, deg"),
        key("freq_min_khz", Kind::Float, "10", "first frequency, kHz"),
        key("freq_max_khz", Kind::Float, "200", "last frequency, kHz"),
        key("freq_step_khz", Kind::Float, "10", "frequency step, kHz"),
        SEED,
        OUT_DIR,
    ],
};

pub static POLAR: Schema = Schema {
    command: "polar",
    about: "Polar group-velocity curves, their images and an SVG plot",
    keys: &[
        MATERIAL,
        LAYUP,
        N_LAYERS,
        THICKNESS,
        MODE,
        key("freq_khz", Kind::Float, "200", "frequency, kHz"),
        DPHI,
        key("resolution", Kind::Int, "600", "image size, px"),
        SCALE_S0,
        SCALE_A0,
        SEED,
        OUT_DIR,
    ],
};

pub static DATASET: Schema = Schema {
    command: "dataset",
    about: "Generate a polar-image dataset and its manifest",
    keys: &[
        key("matset", Kind::Int, "2", "1 = library materials, 2 = uniform draws within the property bounds"),
        key("n_materials", Kind::Int, "200", "number of sampled materials (matset 2)"),
        key("classes", Kind::TextList, "auto", "layup classes; auto = ud,cp,qi for matset 1 and ud for matset 2"),
        key("resolution", Kind::Int, "64", "image size, px"),
        SCALE_S0,
        SCALE_A0,
        DPHI,
        key("freq_list_khz", Kind::FloatList, "20,40,60,80,100,120,140,160,180,200", "frequencies, kHz"),
        N_LAYERS,
        THICKNESS,
        key("val_fraction", Kind::Float, "auto", "held-out fraction; auto = 0.1 (matset 1) or 0.1481 (matset 2)"),
        key("save_curves", Kind::Bool, "true", "also write the polar curves (needed by featurize)"),
        SEED,
        OUT_DIR,
    ],
};

pub static FEATURIZE: Schema = Schema {
    command: "featurize",
    about: "Shape features of every dataset sample, plus histograms",
    keys: &[
        key("manifest", Kind::Text, "", "dataset manifest CSV"),
        key("resolution", Kind::Int, "600", "raster size used for feature extraction, px"),
        key("bin_width", Kind::Float, "25", "histogram bin width"),
        SCALE_S0,
        SCALE_A0,
        SEED,
        OUT_DIR,
    ],
};

pub static SENSITIVITY: Schema = Schema {
    command: "sensitivity",
    about: "One-at-a-time property sweeps and secant sensitivities",
    keys: &[
        LAYUP,
        N_LAYERS,
        THICKNESS,
        key("properties", Kind::TextList, "rho,E1,E2,G12,nu12,nu23", "properties to sweep"),
        MODE,
        key("phi_list_deg", Kind::FloatList, "0,90", "propagation angles, deg"),
        key("freq_list_khz", Kind::FloatList, "20,200", "frequencies, kHz"),
        key("n_points", Kind::Int, "5", "points per sweep"),
        SEED,
        OUT_DIR,
    ],
};

pub static TRAIN: Schema = Schema {
    command: "train",
    about: "Train the layup classifier or the property regressor",
    keys: &[
        key("manifest", Kind::Text, "", "dataset manifest CSV"),
        key("task", Kind::Text, "auto", "classify or regress; auto = classify when the manifest has several layup classes"),
        key("learning_rate", Kind::Float, "auto", "Adam step; auto = 1e-3 (classify) or 1e-4 (regress)"),
        key("batch_size", Kind::Int, "auto", "auto = 4 (classify) or 16 (regress)"),
        key("epochs", Kind::Int, "auto", "auto = 250 (classify) or 150 (regress)"),
        key("patience", Kind::Int, "50", "early-stopping patience, epochs"),
        key("min_delta", Kind::Float, "1e-6", "smallest validation-loss improvement that resets patience"),
        SEED,
        OUT_DIR,
    ],
};

pub static EVALUATE: Schema = Schema {
    command: "evaluate",
    about: "Metrics of a trained network on a dataset split",
    keys: &[
        key("checkpoint", Kind::Text, "", "trained network"),
        key("manifest", Kind::Text, "", "dataset manifest CSV"),
        key("split", Kind::Text, "val", "train, val or all"),
        key("features", Kind::Text, "", "feature CSV from featurize; enables the ridge baseline (regression)"),
        key("ridge_alpha", Kind::Float, "20", "ridge regularisation (0 = least squares)"),
        SEED,
        OUT_DIR,
    ],
};

pub static PREDICT: Schema = Schema {
    command: "predict",
    about: "Apply a trained network to image pairs",
    keys: &[
        key("checkpoint", Kind::Text, "", "trained network"),
        key("manifest", Kind::Text, "", "dataset manifest CSV (every usable row is predicted)"),
        key("img_s0", Kind::Text, "", "single S0 image (PGM), used with img_a0 when no manifest is given"),
        key("img_a0", Kind::Text, "", "single A0 image (PGM)"),
        SEED,
        OUT_DIR,
    ],
};

pub static SCHEMAS: [&Schema; 8] = [&DISPERSION, &POLAR, &DATASET, &FEATURIZE, &SENSITIVITY, &TRAIN, &EVALUATE, &PREDICT];

pub fn schema(command: &str) -> Option<&'static Schema> {
    SCHEMAS.iter().copied().find(|s| s.command == command)
}

/// Resolved settings: schema defaults overlaid by file entries and then by
/// explicit overrides.
#[derive(Clone, Debug)]
pub struct Config {
    pub schema: &'static Schema,
    values: BTreeMap<&'static str, String>,
}

impl Config {
    pub fn new(schema: &'static Schema) -> Self {
        Config { schema, values: schema.keys.iter().map(|k| (k.name, k.default.to_string())).collect() }
    }

    pub fn set(&mut self, name: &str, value: &str) -> Result<()> {
        let k = self
            .schema
            .key(name)
            .ok_or_else(|| AppError::Config(format!("unknown key `{name}` for {}", self.schema.command)))?;
        k.kind.check(value).map_err(|e| AppError::Config(format!("{name} = {value:?}: {e}")))?;
        self.values.insert(k.name, value.trim().to_string());
        Ok(())
    }

    /// Apply `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| AppError::Config(format!("line {}: expected key = value, got {raw:?}", n + 1)))?;
            self.set(k.trim(), v).map_err(|e| match e {
                AppError::Config(m) => AppError::Config(format!("line {}: {m}", n + 1)),
                e => e,
            })?;
        }
        Ok(())
    }

    pub fn load(schema: &'static Schema, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).at(path)?;
        let mut c = Config::new(schema);
        c.apply_text(&text)?;
        Ok(c)
    }

    pub fn raw(&self, name: &str) -> &str {
        self.values.get(name).map(String::as_str).unwrap_or_else(|| panic!("`{name}` is not in the {} schema", self.schema.command))
    }

    pub fn is_auto(&self, name: &str) -> bool {
        matches!(self.raw(name), "auto" | "")
    }

    pub fn text(&self, name: &str) -> Result<&str> {
        match self.raw(name) {
            "" => Err(AppError::Config(format!("`{name}` is required"))),
            v => Ok(v),
        }
    }

    pub fn optional(&self, name: &str) -> Option<&str> {
        Some(self.raw(name)).filter(|v| !v.is_empty())
    }

    fn parsed<T: std::str::FromStr>(&self, name: &str) -> Result<T> {
        self.text(name)?.parse().map_err(|_| AppError::Config(format!("`{name}` = {:?} is not valid here", self.raw(name))))
    }

    pub fn float(&self, name: &str) -> Result<f64> {
        self.parsed(name)
    }

    pub fn int(&self, name: &str) -> Result<usize> {
        self.parsed(name)
    }

    pub fn u64(&self, name: &str) -> Result<u64> {
        self.parsed(name)
    }

    pub fn flag(&self, name: &str) -> Result<bool> {
        self.parsed(name)
    }

    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        self.text(name)?
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| AppError::Config(format!("`{name}`: bad number {s:?}"))))
            .collect()
    }

    pub fn list(&self, name: &str) -> Result<Vec<String>> {
        Ok(self.text(name)?.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
    }

    /// `key=value` lines in key order.
    pub fn canonical(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// SHA-256 of [`Config::canonical`], hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_override_defaults() {
        let mut c = Config::new(&DATASET);
        c.apply_text("# desk run\nmatset = 1\nfreq_list_khz = 20, 40 # two\n\n").unwrap();
        assert_eq!(c.int("matset").unwrap(), 1);
        assert_eq!(c.floats("freq_list_khz").unwrap(), vec![20.0, 40.0]);
        assert_eq!(c.float("scale_s0").unwrap(), 12.0);
        assert!(c.is_auto("classes"));
    }

    #[test]
    fn unknown_and_malformed_keys_are_rejected() {
        let mut c = Config::new(&POLAR);
        assert!(matches!(c.apply_text("resolutoin = 64"), Err(AppError::Config(m)) if m.contains("line 1")));
        assert!(c.set("resolution", "sixty").is_err());
        assert!(c.set("dphi_deg", "nan").is_err());
        assert!(c.apply_text("resolution 64").is_err());
    }

    #[test]
    fn hash_tracks_values() {
        let a = Config::new(&POLAR);
        let mut b = Config::new(&POLAR);
        assert_eq!(a.hash(), b.hash());
        b.set("freq_khz", "100").unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn schemas_have_unique_documented_keys() {
        for s in SCHEMAS {
            let mut names: Vec<&str> = s.keys.iter().map(|k| k.name).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), s.keys.len(), "{}", s.command);
            assert!(s.keys.iter().all(|k| !k.doc.is_empty()));
            let c = Config::new(s);
            for k in s.keys {
                k.kind.check(c.raw(k.name)).unwrap();
            }
        }
    }
}
