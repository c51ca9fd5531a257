//! `cofrag run`: integrate one configuration and write its artifacts.

use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use cofrag::diagnostics::{apriori_report, AprioriReport, AprioriSettings, BoundConstants, MomentBound};
use cofrag::grid::project_density;
use cofrag::kernels::HypothesisReport;
use cofrag::rhs::Rhs;
use cofrag::solver::{integrate_with, SimulationState, StepRecord};
use cofrag::truncation::{truncate_initial, TruncationParams};
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, RunConfig, SCHEMA_VERSION};
use crate::output::{csv_writer, flag, num, opt_num, write_json};

/// Relative tolerance of the discrete volume balance.
pub const CONSERVATION_TOL: f64 = 1e-8;

/// The integrator stopped early; partial artifacts were written.
#[derive(Debug)]
pub struct SolverFailure(pub String);

impl fmt::Display for SolverFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "solver failure: {}", self.0)
    }
}

impl std::error::Error for SolverFailure {}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub enabled: bool,
    /// False when the estimate needs hypotheses that fail for this config.
    pub applicable: bool,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn decides(&self) -> bool {
        self.enabled && self.applicable
    }
}

pub struct RunOutcome {
    pub pass: bool,
    pub cells: usize,
    pub final_state: SimulationState<f64>,
    pub checks: Vec<CheckResult>,
}

struct Artifacts<'a> {
    cfg: &'a RunConfig,
    dir: &'a Path,
    names: Vec<String>,
}

impl Artifacts<'_> {
    fn path(&mut self, name: String) -> std::path::PathBuf {
        let p = self.dir.join(&name);
        self.names.push(name);
        p
    }

    fn densities(&mut self, snapshots: &[SimulationState<f64>]) -> Result<()> {
        for (idx, s) in snapshots.iter().enumerate() {
            let p = self.path(format!("density_t{idx:04}.csv"));
            let f = File::create(&p).with_context(|| format!("cannot create {}", p.display()))?;
            s.density.write_csv(BufWriter::new(f))?;
        }
        Ok(())
    }

    fn diagnostics(&mut self, reports: &[AprioriReport<f64>], snapshots: &[SimulationState<f64>]) -> Result<()> {
        let d = &self.cfg.diagnostics;
        let mut w = csv_writer(&self.path("diagnostics.csv".into()))?;
        let mut header: Vec<String> =
            ["t", "M0", "M1", "M2", "dust_mass", "clipped_mass", "mass_deficit"].map(String::from).to_vec();
        header.extend(d.deltas.iter().map(|x| format!("p_delta_{}", num(*x))));
        header.extend(d.eps.iter().map(|x| format!("tail_eps_{}", num(*x))));
        header.extend(["L_T", "moment_bound_ok", "tails_ok", "p_monotone"].map(String::from));
        w.write_record(&header)?;
        for (rep, s) in reports.iter().zip(snapshots) {
            let m = s.sample();
            let mut row = vec![num(m.t), num(m.m0), num(m.m1), num(m.m2), num(m.dust_mass), num(s.clipped_mass), num(rep.mass_deficit)];
            // p_delta is stored in decreasing-δ order; emit in config order
            for x in &d.deltas {
                row.push(opt_num(rep.p_delta.iter().find(|e| e.delta == *x).map(|e| e.p)));
            }
            row.extend(rep.r_eps.iter().map(|e| num(e.tail)));
            row.push(opt_num(rep.l_t.map(|b| b.value)));
            row.push(flag(rep.verdicts.moment_bound));
            row.push(flag(Some(rep.verdicts.tails)));
            row.push(flag(Some(rep.verdicts.p_monotone)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn steps(&mut self, steps: &[StepRecord<f64>]) -> Result<()> {
        let mut w = csv_writer(&self.path("steps.csv".into()))?;
        w.write_record(["step", "t", "dt", "error_norm", "min_value", "M0", "M1", "dust_mass"])?;
        for s in steps {
            w.write_record([
                s.step.to_string(),
                num(s.t),
                num(s.dt),
                num(s.error_norm),
                num(s.min_value),
                num(s.m0),
                num(s.m1),
                num(s.dust_mass),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_hypotheses(cfg: &RunConfig, report: &HypothesisReport<f64>, path: &Path) -> Result<()> {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "coagulation": cfg.coagulation,
        "fragmentation": cfg.fragmentation,
        "radii": cfg.diagnostics.radii,
        "omega_deltas": cfg.diagnostics.omega_deltas,
        "all_pass": report.all_pass(),
        "report": report,
    });
    write_json(path, &doc)
}

/// Validates `cfg`, integrates it and writes all artifacts into `dir`.
///
/// Configuration problems surface as [`ConfigError`]; an integrator failure
/// writes partial artifacts and then surfaces as [`SolverFailure`].
pub fn execute(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let report = cfg.hypothesis_report();
    RunConfig::hypothesis_gate(&report)?;

    let trunc = TruncationParams::new(cfg.truncation_n).map_err(|e| ConfigError::new("truncation_n", e))?;
    let grid = Arc::new(cfg.build_grid()?);
    let f0 = project_density(&truncate_initial(&cfg.initial, trunc).map_err(|e| ConfigError::new("initial", e))?, grid.clone());
    let f0_norm = f0.norm();
    let initial_mass = f0.moment(1);
    let rhs = Rhs::new(grid.clone(), cfg.coagulation.clone(), cfg.fragmentation, trunc)
        .map_err(|e| ConfigError::new("fragmentation", e))?;

    let constants = if report.all_pass() { BoundConstants::from_kernel(&cfg.fragmentation) } else { None };
    let mut deltas = cfg.diagnostics.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let settings = AprioriSettings {
        f0_norm,
        constants,
        horizon: cfg.solver.t_end,
        eps: cfg.diagnostics.eps.clone(),
        deltas,
        r: cfg.diagnostics.p_radius,
    };
    let bound: Option<MomentBound<f64>> = match constants {
        Some(c) => Some(cofrag::diagnostics::moment_bound(f0_norm, c, cfg.solver.t_end)?),
        None => None,
    };

    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;

    let mut steps = Vec::new();
    let mut max_norm = f0_norm;
    let mut max_m1 = initial_mass;
    let result = integrate_with(f0, cfg.solver, &rhs, &cfg.resolved_output_times(), |r| {
        max_norm = max_norm.max(r.m0 + r.m1);
        max_m1 = max_m1.max(r.m1);
        steps.push(*r);
    });
    let (snapshots, failure) = match result {
        Ok(traj) => (traj.snapshots, None),
        Err(f) => (f.partial.snapshots, Some(f.error.to_string())),
    };
    let reports = snapshots.iter().map(|s| apriori_report(s, &settings)).collect::<cofrag::Result<Vec<_>>>()?;

    let mut art = Artifacts { cfg, dir, names: Vec::new() };
    art.densities(&snapshots)?;
    art.diagnostics(&reports, &snapshots)?;
    art.steps(&steps)?;
    write_hypotheses(cfg, &report, &art.path("hypotheses.json".into()))?;

    let max_cons = snapshots.iter().map(|s| s.max_conservation_error).fold(0.0, f64::max);
    let min_value = snapshots.iter().map(|s| s.density.min_value()).fold(f64::INFINITY, f64::min);
    let hyp = report.all_pass();
    let c = cfg.checks;
    let checks = vec![
        CheckResult {
            name: "conservation",
            enabled: c.conservation,
            applicable: true,
            pass: max_cons <= CONSERVATION_TOL * initial_mass,
            detail: format!("max |M1 + dust + clipped - M1(0)| = {} against {} * M1(0)", num(max_cons), num(CONSERVATION_TOL)),
        },
        CheckResult {
            name: "non_negativity",
            enabled: c.non_negativity,
            applicable: true,
            pass: snapshots.is_empty() || min_value >= 0.0,
            detail: format!("min snapshot value = {}", opt_num((!snapshots.is_empty()).then_some(min_value))),
        },
        CheckResult {
            name: "volume_bound",
            enabled: c.volume_bound,
            applicable: true,
            pass: max_m1 <= initial_mass + CONSERVATION_TOL,
            detail: format!("max M1 = {} against M1(0) = {}", num(max_m1), num(initial_mass)),
        },
        CheckResult {
            name: "moment_bound",
            enabled: c.moment_bound,
            applicable: bound.is_some(),
            pass: bound.is_none_or(|b| max_norm <= b.value),
            detail: format!("max M0 + M1 = {} against L(T) = {}", num(max_norm), opt_num(bound.map(|b| b.value))),
        },
        CheckResult {
            name: "tails",
            enabled: c.tails,
            applicable: hyp,
            pass: reports.iter().all(|r| r.verdicts.tails),
            detail: "number beyond R_eps at most eps at every output time".into(),
        },
        CheckResult {
            name: "integrability",
            enabled: c.integrability,
            applicable: true,
            pass: reports.iter().all(|r| r.verdicts.p_monotone),
            detail: "p(delta) non-increasing along decreasing delta at every output time".into(),
        },
    ];
    let pass = failure.is_none() && checks.iter().filter(|c| c.decides()).all(|c| c.pass);

    let final_state = snapshots.last().cloned();
    let last = final_state.as_ref();
    let manifest_path = art.path("manifest.json".into());
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "resolved": {
            "output_times": cfg.resolved_output_times(),
            "cells": grid.len(),
            "xmin": grid.xmin(),
            "xmax": grid.xmax(),
            "f0_norm": f0_norm,
            "initial_mass": initial_mass,
        },
        "hypotheses": {
            "all_pass": hyp,
            "failures": report.failures().map(|v| v.hypothesis.to_string()).collect::<Vec<_>>(),
            "flags": report.flags,
            "theta": report.theta,
            "k_r": report.k_r,
        },
        "constants": {
            "k1_at_one": constants.map(|c| c.k1_at_one),
            "omega_one_one": constants.map(|c| c.omega_one_one),
            "L_T": bound.map(|b| b.value),
            "L_T_degenerate": bound.map(|b| b.degenerate),
            "horizon": cfg.solver.t_end,
            "r_eps": cfg.diagnostics.eps.iter().map(|&e| json!({"eps": e, "r_eps": f0_norm / e})).collect::<Vec<_>>(),
            "p_radius": cfg.diagnostics.p_radius,
            "conservation_tol": CONSERVATION_TOL,
        },
        "conservation": {
            "initial_mass": initial_mass,
            "final_mass": last.map(|s| s.density.moment(1)),
            "dust_mass": last.map(|s| s.dust_mass),
            "clipped_mass": last.map(|s| s.clipped_mass),
            "max_error": max_cons,
        },
        "solver": {
            "status": if failure.is_some() { "failed" } else { "completed" },
            "error": failure,
            "steps": last.map_or(0, |s| s.step_count),
            "accepted_steps_logged": steps.len(),
            "rejected_steps": last.map_or(0, |s| s.rejected_steps),
            "snapshots": snapshots.len(),
        },
        "checks": checks,
        "pass": pass,
        "artifacts": art.names,
    });
    write_json(&manifest_path, &manifest)?;

    if let Some(msg) = failure {
        return Err(SolverFailure(format!("{msg}; {} snapshots written to {}", snapshots.len(), dir.display())).into());
    }
    let final_state = final_state.context("no output times")?;
    Ok(RunOutcome { pass, cells: grid.len(), final_state, checks })
}
