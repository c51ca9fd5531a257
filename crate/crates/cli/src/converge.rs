//! `cofrag converge`: a refinement ladder over one configuration parameter.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use cofrag::grid::{GridKind, InitialData};
use cofrag::reference::{error_norms, ReferenceSolution};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::output::{csv_writer, num, opt_num, write_json};
use crate::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ladder {
    /// Double the truncation level `n` per level.
    N,
    /// Double the cell count per level.
    Grid,
    /// Divide the relative tolerance by ten per level.
    Tol,
}

impl Ladder {
    /// Configuration of level `k` and the parameter value it varies.
    fn level(self, base: &RunConfig, k: usize) -> (RunConfig, f64) {
        let mut cfg = base.clone();
        let factor = 2f64.powi(k as i32);
        let param = match self {
            Ladder::N => {
                cfg.truncation_n *= factor;
                cfg.truncation_n
            }
            Ladder::Grid => {
                cfg.grid.kind = match cfg.grid.kind {
                    GridKind::Geometric { cells_per_decade } => GridKind::Geometric { cells_per_decade: cells_per_decade << k },
                    GridKind::Uniform { cells } => GridKind::Uniform { cells: cells << k },
                };
                match cfg.grid.kind {
                    GridKind::Geometric { cells_per_decade } => cells_per_decade as f64,
                    GridKind::Uniform { cells } => cells as f64,
                }
            }
            Ladder::Tol => {
                cfg.solver.rel_tol /= 10f64.powi(k as i32);
                cfg.solver.rel_tol
            }
        };
        (cfg, param)
    }
}

#[derive(Debug, Clone, Serialize)]
struct LevelRow {
    level: usize,
    parameter: f64,
    cells: usize,
    t: f64,
    moments: [f64; 3],
    dust_mass: f64,
    /// `|M_p(level) − M_p(level − 1)|`.
    diffs: Option<[f64; 3]>,
    /// `log(d_{k−1}/d_k) / log(refinement ratio)` for `M_0`.
    order: Option<f64>,
    oracle_weighted_l1: Option<f64>,
    oracle_m0_error: Option<f64>,
    checks_pass: bool,
}

fn reference_for(cfg: &RunConfig) -> Option<ReferenceSolution> {
    let unit_exponential = matches!(cfg.initial, InitialData::Exponential { lambda, amplitude } if lambda == 1.0 && amplitude == 1.0);
    unit_exponential.then(|| ReferenceSolution::detect(&cfg.coagulation, &cfg.fragmentation)).flatten()
}

/// Runs `levels` levels in parallel, each into its own `level_KK` directory,
/// and writes `convergence.csv` and `convergence.json`. Returns whether the
/// successive `M_0` differences are non-increasing.
pub fn execute(base: &RunConfig, ladder: Ladder, levels: usize, dir: &Path) -> Result<bool> {
    if levels < 3 {
        bail!(crate::config::ConfigError::new("--levels", format!("a ladder needs at least 3 levels, got {levels}")));
    }
    base.validate()?;
    RunConfig::hypothesis_gate(&base.hypothesis_report())?;
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;

    let configs: Vec<(RunConfig, f64)> = (0..levels).map(|k| ladder.level(base, k)).collect();
    let outcomes: Vec<Result<run::RunOutcome>> = configs
        .par_iter()
        .enumerate()
        .map(|(k, (cfg, _))| run::execute(cfg, &dir.join(format!("level_{k:02}"))))
        .collect();

    let reference = reference_for(base);
    let mut rows: Vec<LevelRow> = Vec::with_capacity(levels);
    for (k, (outcome, (_, param))) in outcomes.into_iter().zip(&configs).enumerate() {
        let o = outcome.with_context(|| format!("ladder level {k}"))?;
        let s = &o.final_state;
        let moments = [0, 1, 2].map(|p| s.density.moment(p));
        let oracle = reference.map(|r| error_norms(&s.density, r, s.t)).transpose()?;
        let diffs = rows.last().map(|prev| [0, 1, 2].map(|p| (moments[p] - prev.moments[p]).abs()));
        let order = match (rows.last().and_then(|r| r.diffs), diffs) {
            (Some(a), Some(b)) if a[0] > 0.0 && b[0] > 0.0 => {
                let ratio = param / rows.last().unwrap().parameter;
                Some((a[0] / b[0]).ln() / ratio.ln().abs())
            }
            _ => None,
        };
        rows.push(LevelRow {
            level: k,
            parameter: *param,
            cells: o.cells,
            t: s.t,
            moments,
            dust_mass: s.dust_mass,
            diffs,
            order,
            oracle_weighted_l1: oracle.map(|e| e.weighted_l1),
            oracle_m0_error: oracle.map(|e| e.moments[0]),
            checks_pass: o.pass,
        });
    }

    let d0: Vec<f64> = rows.iter().filter_map(|r| r.diffs.map(|d| d[0])).collect();
    let pass = d0.windows(2).all(|w| w[1] <= w[0]);

    let mut w = csv_writer(&dir.join("convergence.csv"))?;
    w.write_record([
        "level", "parameter", "cells", "t", "M0", "M1", "M2", "dust_mass", "diff_M0", "diff_M1", "diff_M2", "order_M0",
        "oracle_weighted_l1", "oracle_M0_error", "checks_pass",
    ])?;
    for r in &rows {
        let d = |p: usize| opt_num(r.diffs.map(|d| d[p]));
        w.write_record([
            r.level.to_string(),
            num(r.parameter),
            r.cells.to_string(),
            num(r.t),
            num(r.moments[0]),
            num(r.moments[1]),
            num(r.moments[2]),
            num(r.dust_mass),
            d(0),
            d(1),
            d(2),
            opt_num(r.order),
            opt_num(r.oracle_weighted_l1),
            opt_num(r.oracle_m0_error),
            r.checks_pass.to_string(),
        ])?;
    }
    w.flush()?;
    write_json(
        &dir.join("convergence.json"),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "ladder": ladder,
            "levels": rows,
            "reference": reference,
            "monotone": pass,
        }),
    )?;
    for r in &rows {
        println!(
            "level {} parameter {} M0 {} diff {}",
            r.level,
            num(r.parameter),
            num(r.moments[0]),
            opt_num(r.diffs.map(|d| d[0]))
        );
    }
    Ok(pass)
}
