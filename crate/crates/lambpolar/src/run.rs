//! Record of a CLI run: what was asked for and what was written.

use std::path::{Path, PathBuf};

use crate::config::Config;
use crate::error::{IoContext, Result};

pub const RUN_MANIFEST: &str = "run_manifest.txt";

pub fn write_run_manifest(out_dir: &Path, cfg: &Config, threads: usize, outputs: &[PathBuf]) -> Result<PathBuf> {
    let mut s = format!(
        "command={}\nconfig_sha256={}\nseed={}\nthreads={}\nlambpolar={}\n",
        cfg.schema.command,
        cfg.hash(),
        cfg.raw("seed"),
        threads,
        env!("CARGO_PKG_VERSION"),
    );
    for line in cfg.canonical().lines() {
        s += &format!("config.{line}\n");
    }
    for o in outputs {
        s += &format!("output={}\n", o.display());
    }
    let p = out_dir.join(RUN_MANIFEST);
    std::fs::write(&p, s).at(&p)?;
    Ok(p)
}
