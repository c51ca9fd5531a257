//! `cofrag check`: evaluate the kernel hypotheses without integrating.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use crate::config::RunConfig;
use crate::run::write_hypotheses;

/// Writes `hypotheses.json` into `dir`, prints one line per hypothesis and
/// returns whether all of them hold.
pub fn execute(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    cfg.validate()?;
    let report = cfg.hypothesis_report();
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    write_hypotheses(cfg, &report, &dir.join("hypotheses.json"))?;
    for v in &report.verdicts {
        match &v.witness {
            None => println!("{} pass", v.hypothesis),
            Some(w) => println!("{} FAIL: {w}", v.hypothesis),
        }
    }
    if let Some(theta) = report.theta {
        let ks: Vec<String> = report.k_r.iter().map(|(r, k)| format!("k({r}) = {k}")).collect();
        if ks.is_empty() {
            println!("theta = {theta}");
        } else {
            println!("theta = {theta}; {}", ks.join(", "));
        }
    }
    if report.flags.shattering {
        println!("regime: shattering (selection rate unbounded near the origin)");
    }
    if report.flags.borderline_gamma_zero {
        println!("regime: borderline gamma = 0");
    }
    Ok(report.all_pass())
}
