//! One function per CLI command. Each takes a resolved [`Config`] and
//! returns the files it wrote.

use std::path::{Path, PathBuf};

use lambpolar_core::elastic::{build_layup, find_material, material_library, EngineeringConstants, Laminate, LayupClass};
use lambpolar_core::polar::{polar_sweep, rasterize, MaterialBounds, PolarCurve};
use lambpolar_core::sensitivity::{oat_sweep, Property, SweepResult};
use lambpolar_core::smm::{dispersion_curve, Mode, ScanOptions, Sweep};
use lambpolar_core::wavefield::group_velocity;
use rayon::prelude::*;

use crate::config::Config;
use crate::dataset::{generate_dataset, manifest_path, read_manifest, DatasetConfig, Split};
use crate::error::{AppError, IoContext, Result};
use crate::featurize::{featurize_manifest, histograms, Source};
use crate::io::checkpoint;
use crate::io::tables::{read_features, write_dispersion, write_features, write_histograms, write_log, write_polar, write_sensitivity, write_sweep, Table};
use crate::io::{pgm, svg};
use crate::learn::{class_tag, evaluate, load_pairs, predict_all, ridge_baseline, rows_of, train_on_manifest, Metrics, Task, PROPERTY_COLUMNS};

/// Library name, `matset2-mid`, or six comma-separated values in table
/// units.
pub fn parse_material(s: &str) -> Result<(String, EngineeringConstants)> {
    if let Some(m) = find_material(s) {
        return Ok((m.name, m.props));
    }
    if s.eq_ignore_ascii_case("matset2-mid") {
        return Ok(("matset2-mid".into(), MaterialBounds::default().midpoint()));
    }
    let v: Vec<f64> = s.split(',').filter_map(|x| x.trim().parse().ok()).collect();
    match <[f64; 6]>::try_from(v) {
        Ok(v) => Ok(("custom".into(), EngineeringConstants::from_vector_gpa(v))),
        Err(_) => {
            let names: Vec<String> = material_library().into_iter().map(|m| m.name).collect();
            Err(AppError::Config(format!("unknown material {s:?}; library: {}", names.join(", "))))
        }
    }
}

fn layup(c: &Config) -> Result<LayupClass> {
    let s = c.text("layup")?;
    LayupClass::parse(s).ok_or_else(|| AppError::Config(format!("unknown layup {s:?}")))
}

fn laminate(c: &Config, material: EngineeringConstants) -> Result<Laminate> {
    Ok(build_layup(layup(c)?, c.int("n_layers")?, c.float("thickness_mm")? * 1e-3, material)?)
}

fn modes(c: &Config) -> Result<Vec<Mode>> {
    let mut m: Vec<Mode> = c
        .list("mode")?
        .iter()
        .map(|s| Mode::parse(s).ok_or_else(|| AppError::Config(format!("unknown mode {s:?}"))))
        .collect::<Result<_>>()?;
    m.dedup();
    Ok(m)
}

pub fn out_dir(c: &Config) -> Result<PathBuf> {
    let d = PathBuf::from(c.text("out_dir")?);
    std::fs::create_dir_all(&d).at(&d)?;
    Ok(d)
}

fn path_key(c: &Config, key: &str) -> Result<PathBuf> {
    Ok(PathBuf::from(c.text(key)?))
}

pub fn dispersion(c: &Config) -> Result<Vec<PathBuf>> {
    let (_, mat) = parse_material(c.text("material")?)?;
    let lam = laminate(c, mat)?;
    let (lo, hi, step) = (c.float("freq_min_khz")?, c.float("freq_max_khz")?, c.float("freq_step_khz")?);
    if !(lo > 0.0 && hi >= lo && step > 0.0) {
        return Err(AppError::Config(format!("frequency range {lo}..{hi} step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let freqs: Vec<f64> = (0..n).map(|k| (lo + k as f64 * step) * 1e3).collect();
    let phi = c.float("phi_deg")?;
    let opts = ScanOptions::default();
    let mut sols = Vec::new();
    for mode in modes(c)? {
        sols.extend(dispersion_curve(&lam, mode, &Sweep::Frequency { phi_deg: phi, frequencies: freqs.clone() }, &opts)?);
    }
    let dir = out_dir(c)?;
    let p = dir.join("dispersion.csv");
    write_dispersion(&p, &sols)?;
    let g = dir.join("group_velocity.csv");
    let mut t = Table::create(&g, &crate::io::tables::POLAR_HEADER)?;
    for s in &sols {
        let b = group_velocity(&lam, s)?;
        let skew = (b.ray_deg - s.phi_deg + 180.0).rem_euclid(360.0) - 180.0;
        t.row([
            s.mode.tag().to_string(),
            (s.frequency * 1e-3).to_string(),
            s.phi_deg.to_string(),
            b.ray_deg.to_string(),
            (b.cg_mag * 1e-3).to_string(),
            skew.to_string(),
            s.cp.to_string(),
        ])?;
    }
    t.finish()?;
    Ok(vec![p, g])
}

fn scale_for(c: &Config, mode: Mode) -> Result<f64> {
    c.float(if mode == Mode::S0 { "scale_s0" } else { "scale_a0" })
}

pub fn polar(c: &Config) -> Result<Vec<PathBuf>> {
    let (name, mat) = parse_material(c.text("material")?)?;
    let lam = laminate(c, mat)?;
    let f = c.float("freq_khz")? * 1e3;
    let dphi = c.float("dphi_deg")?;
    let opts = ScanOptions::default();
    let curves: Vec<PolarCurve> =
        modes(c)?.into_iter().map(|m| polar_sweep(&lam, &name, f, m, dphi, &opts)).collect::<lambpolar_core::Result<_>>()?;
    let dir = out_dir(c)?;
    let mut out = vec![dir.join("polar.csv"), dir.join("polar.svg")];
    write_polar(&out[0], &curves)?;
    let title = format!("{name} {} {} kHz", lam.layup_class.map_or("", LayupClass::tag), f * 1e-3);
    std::fs::write(&out[1], svg::polar_plot(&curves, &title)).at(&out[1])?;
    let res = c.int("resolution")?;
    for curve in &curves {
        let img = rasterize(curve, res, scale_for(c, curve.mode)?)?;
        let p = dir.join(format!("polar_{}.pgm", curve.mode.tag().to_ascii_lowercase()));
        pgm::write(&p, &img)?;
        out.push(p);
    }
    Ok(out)
}

pub fn dataset(c: &Config) -> Result<Vec<PathBuf>> {
    let cfg = DatasetConfig::from_config(c)?;
    let m = generate_dataset(&cfg)?;
    println!("{} samples, {} failed", m.usable().count(), m.failures.len());
    Ok(vec![manifest_path(&m.dir), m.dir.join("manifest.meta"), m.dir.join("failures.csv")])
}

pub fn featurize(c: &Config) -> Result<Vec<PathBuf>> {
    let m = read_manifest(&path_key(c, "manifest")?)?;
    let res = c.int("resolution")?;
    let has_curves = m.usable().next().is_some_and(|r| m.curve_path(r.sample_id).exists());
    let source = if has_curves { Source::Curves { resolution: res } } else { Source::Images };
    if !has_curves {
        log::warn!("dataset has no saved curves; measuring the {}px dataset images", m.meta.resolution);
    }
    let (rows, skipped) = featurize_manifest(&m, source)?;
    let dir = out_dir(c)?;
    let (fp, hp) = (dir.join("features.csv"), dir.join("histograms.csv"));
    write_features(&fp, &rows)?;
    write_histograms(&hp, &histograms(&rows, c.float("bin_width")?)?)?;
    println!("{} feature rows, {} images skipped", rows.len(), skipped.len());
    Ok(vec![fp, hp])
}

pub fn sensitivity(c: &Config) -> Result<Vec<PathBuf>> {
    let bounds = MaterialBounds::default();
    let base = bounds.midpoint();
    let lam = laminate(c, base)?;
    let props: Vec<Property> = c
        .list("properties")?
        .iter()
        .map(|s| Property::parse(s).ok_or_else(|| AppError::Config(format!("unknown property {s:?}"))))
        .collect::<Result<_>>()?;
    let mut grid = Vec::new();
    for &p in &props {
        for m in modes(c)? {
            for &phi in &c.floats("phi_list_deg")? {
                for &f in &c.floats("freq_list_khz")? {
                    grid.push((p, m, phi, f * 1e3));
                }
            }
        }
    }
    let n = c.int("n_points")?;
    let opts = ScanOptions::default();
    let sweeps: Vec<SweepResult> = grid
        .par_iter()
        .map(|&(p, m, phi, f)| oat_sweep(&base, p, p.bounds(&bounds), n, &lam, f, phi, m, &opts))
        .collect::<lambpolar_core::Result<_>>()?;
    let dir = out_dir(c)?;
    let sd = dir.join("sweeps");
    std::fs::create_dir_all(&sd).at(&sd)?;
    let table = dir.join("sensitivity.csv");
    write_sensitivity(&table, &sweeps)?;
    let mut out = vec![table];
    for s in &sweeps {
        let p = sd.join(format!("{}_{}_{}deg_{}kHz.csv", s.property.name(), s.mode.tag(), s.phi_deg, s.freq * 1e-3));
        write_sweep(&p, s)?;
        out.push(p);
    }
    Ok(out)
}

pub fn train(c: &Config) -> Result<Vec<PathBuf>> {
    let m = read_manifest(&path_key(c, "manifest")?)?;
    let task = if c.is_auto("task") {
        Task::infer(&m)
    } else {
        let s = c.text("task")?;
        Task::parse(s).ok_or_else(|| AppError::Config(format!("unknown task {s:?}")))?
    };
    let mut cfg = task.trainer();
    if !c.is_auto("learning_rate") {
        cfg.learning_rate = c.float("learning_rate")?;
    }
    if !c.is_auto("batch_size") {
        cfg.batch_size = c.int("batch_size")?;
    }
    if !c.is_auto("epochs") {
        cfg.epochs = c.int("epochs")?;
    }
    cfg.patience = c.int("patience")?;
    cfg.min_delta = c.float("min_delta")?;
    cfg.seed = c.u64("seed")?;
    let (mut ck, history) = train_on_manifest(&m, task, &cfg)?;
    let dir = out_dir(c)?;
    let (cp, lp) = (dir.join("checkpoint.bin"), dir.join("train_log.csv"));
    checkpoint::write(&cp, &mut ck)?;
    write_log(&lp, &history.epochs)?;
    if let Some(e) = history.epochs.iter().find(|e| e.epoch == history.best_epoch) {
        println!(
            "kept epoch {} of {}: loss {:e}, val_loss {:e}, metric {:.4}, val_metric {:.4}",
            e.epoch,
            history.epochs.len(),
            e.loss,
            e.val_loss,
            e.metric,
            e.val_metric
        );
    }
    Ok(vec![cp, lp])
}

fn split_key(c: &Config) -> Result<Option<Split>> {
    match c.text("split")? {
        "all" => Ok(None),
        s => match Split::parse(s) {
            Some(Split::Failed) | None => Err(AppError::Config(format!("split must be train, val or all, got {s:?}"))),
            x => Ok(x),
        },
    }
}

/// `metric,target,value` rows of an evaluation.
pub fn metric_rows(m: &Metrics) -> Vec<(String, String, f64)> {
    match m {
        Metrics::Classification { n, accuracy, confusion } => {
            let mut v = vec![("n".into(), "all".into(), *n as f64), ("accuracy".into(), "all".into(), *accuracy)];
            for (t, row) in confusion.iter().enumerate() {
                for (p, &k) in row.iter().enumerate() {
                    v.push(("confusion".into(), format!("{}->{}", class_tag(t), class_tag(p)), k as f64));
                }
            }
            v
        }
        Metrics::Regression { n, mape, r2 } => {
            let mut v = vec![("n".into(), "all".into(), *n as f64)];
            for (k, name) in PROPERTY_COLUMNS.iter().enumerate() {
                v.push(("mape_percent".into(), name.to_string(), mape[k]));
                v.push(("r2".into(), name.to_string(), r2[k]));
            }
            v
        }
    }
}

pub fn evaluate_cmd(c: &Config) -> Result<Vec<PathBuf>> {
    let mut ck = checkpoint::read(&path_key(c, "checkpoint")?)?;
    let m = read_manifest(&path_key(c, "manifest")?)?;
    let rows = rows_of(&m, split_key(c)?);
    let data = load_pairs(&m, &rows, ck.task)?;
    let metrics = evaluate(&mut ck, &data)?;
    let mut out = metric_rows(&metrics);
    if let (Some(f), Task::Regress) = (c.optional("features"), ck.task) {
        let r = ridge_baseline(&m, &read_features(Path::new(f))?, c.float("ridge_alpha")?)?;
        for (k, name) in PROPERTY_COLUMNS.iter().enumerate() {
            out.push(("ridge_mape_percent".into(), name.to_string(), r.mape[k]));
            out.push(("ridge_r2".into(), name.to_string(), r.r2[k]));
        }
    }
    let dir = out_dir(c)?;
    let p = dir.join("metrics.csv");
    let mut t = Table::create(&p, &["metric", "target", "value"])?;
    for (metric, target, v) in &out {
        println!("{metric} {target} {v}");
        t.row([metric.clone(), target.clone(), v.to_string()])?;
    }
    t.finish()?;
    Ok(vec![p])
}

pub fn predict_cmd(c: &Config) -> Result<Vec<PathBuf>> {
    let mut ck = checkpoint::read(&path_key(c, "checkpoint")?)?;
    let res = ck.net.spec.input[1];
    let (ids, data) = match (c.optional("manifest"), c.optional("img_s0"), c.optional("img_a0")) {
        (Some(mp), _, _) => {
            let m = read_manifest(Path::new(mp))?;
            let rows = rows_of(&m, None);
            (rows.iter().map(|r| r.sample_id.to_string()).collect::<Vec<_>>(), load_pairs(&m, &rows, ck.task)?)
        }
        (None, Some(s), Some(a)) => {
            let load = |p: &str| -> Result<Vec<f64>> {
                let img = pgm::read(Path::new(p))?;
                if img.width != res || img.height != res {
                    return Err(AppError::format(p, format!("network expects {res}x{res} images")));
                }
                Ok(img.to_unit())
            };
            let targets = match ck.task {
                Task::Classify => lambpolar_core::nn::train::Targets::Classes { labels: vec![0], n_classes: 3 },
                Task::Regress => lambpolar_core::nn::train::Targets::Values { values: vec![0.0; 6], width: 6 },
            };
            let data = lambpolar_core::nn::train::PairDataset { res, s0: load(s)?, a0: load(a)?, targets };
            (vec![s.to_string()], data)
        }
        _ => return Err(AppError::Config("predict needs `manifest`, or both `img_s0` and `img_a0`".into())),
    };
    let out = predict_all(&mut ck, &data)?;
    let dir = out_dir(c)?;
    let p = dir.join("predictions.csv");
    let header: Vec<&str> = match ck.task {
        Task::Classify => vec!["sample", "class", "p_UD", "p_CP", "p_QI"],
        Task::Regress => ["sample"].into_iter().chain(PROPERTY_COLUMNS).collect(),
    };
    let mut t = Table::create(&p, &header)?;
    let cls = out.argmax_rows();
    for (i, id) in ids.iter().enumerate() {
        let mut rec = vec![id.clone()];
        if ck.task == Task::Classify {
            rec.push(class_tag(cls[i]).to_string());
        }
        rec.extend(out.row(i).iter().map(f64::to_string));
        t.row(rec)?;
    }
    t.finish()?;
    Ok(vec![p])
}
