//! Executes a [`RunConfig`] and writes its tables and fields.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use poro_core::edema::{
    run_injury, run_normal_brain, sweep_config, sweep_row, EdemaConfig, EdemaGeometry, EdemaReport,
    SweepParameter, SweepRow,
};
use poro_core::params::PhysicalParams;
use poro_core::verification::{
    by_name, error_norms, halving_sequence, run_level, solve_terminal, ConvergenceTable, ManufacturedProblem,
    StudySettings,
};

use crate::config::{format_config, format_h, Command, GeometrySpec, RunConfig};
use crate::csv::{convergence_table, series_table, sweep_table, Table};
use crate::error::{AppError, AppResult};
use crate::mesh_io::read_mesh;
use crate::{vtk, StdClock};

pub fn manufactured(cfg: &RunConfig) -> AppResult<ManufacturedProblem> {
    by_name(cfg.problem.name())
        .ok_or_else(|| AppError::Input(format!("`{}` is not a manufactured problem", cfg.problem.name())))
}

pub fn settings(cfg: &RunConfig) -> StudySettings {
    StudySettings {
        theta: cfg.theta,
        rule: cfg.dt,
        solver: cfg.linear_solver(),
    }
}

/// Levels run in parallel; rows keep the order of `hs`.
pub fn parallel_study(mp: &ManufacturedProblem, hs: &[f64], settings: &StudySettings) -> AppResult<ConvergenceTable> {
    // reject a bad sequence before doing any work
    poro_core::verification::convergence_order(&hs.iter().map(|&h| (h, 1.0)).collect::<Vec<_>>())
        .map_err(|e| AppError::core("mesh sizes", e))?;
    let rows = hs
        .par_iter()
        .map(|&h| {
            let clock = StdClock::start();
            run_level(mp, h, settings, &clock).map_err(|e| AppError::core(format!("{} at h = {}", mp.name, format_h(h)), e))
        })
        .collect::<AppResult<Vec<_>>>()?;
    ConvergenceTable::from_reports(rows).map_err(|e| AppError::core("orders", e))
}

/// Rows run in parallel; the result keeps the order of `values`.
pub fn parallel_sweep(base: &EdemaConfig, parameter: SweepParameter, values: &[f64]) -> AppResult<Vec<SweepRow>> {
    for &v in values {
        sweep_config(base, parameter, v).map_err(|e| AppError::core("sweep", e))?;
    }
    values
        .par_iter()
        .map(|&v| sweep_row(base, parameter, v).map_err(|e| AppError::core(format!("sweep {} = {v}", parameter.name()), e)))
        .collect()
}

pub fn edema_config(cfg: &RunConfig) -> AppResult<EdemaConfig> {
    let s = &cfg.edema;
    let geometry = match &s.geometry {
        GeometrySpec::Annulus(a) => EdemaGeometry::Annulus(*a),
        GeometrySpec::File(p) => EdemaGeometry::Mesh(read_mesh(p)?),
    };
    let c = EdemaConfig {
        geometry,
        young: s.young,
        poisson: s.poisson,
        alpha: s.alpha,
        c0: s.c0,
        permeability: s.permeability,
        mu_f: s.mu_f,
        conductance: s.conductance,
        conductance_includes_viscosity: s.conductance_includes_viscosity,
        p_sas: s.p_sas,
        ventricle_pressure: s.ventricle_pressure,
        source: s.source,
        lesion: s.lesion,
        traction: s.traction,
        dt: s.dt,
        final_time: s.final_time,
        solver: cfg.linear_solver(),
    };
    c.validate().map_err(|e| AppError::core("edema configuration", e))?;
    Ok(c)
}

fn describe(p: &PhysicalParams) -> String {
    let k = p.permeability.0;
    format!(
        "lambda = {:?}, mu = {:?}, alpha = {:?}, c0 = {:?}, mu_f = {:?}, K = [[{:?}, {:?}], [{:?}, {:?}]]",
        p.lambda, p.mu, p.alpha, p.c0, p.mu_f, k[0][0], k[0][1], k[1][0], k[1][1]
    )
}

/// Header lines: tool version, the normalized configuration and `extra`.
pub fn provenance(cfg: &RunConfig, extra: &[String]) -> Vec<String> {
    let mut v = vec![format!("poro {}", env!("CARGO_PKG_VERSION")), "config:".into()];
    v.extend(format_config(cfg).lines().map(|l| format!("  {l}")));
    v.extend(extra.iter().cloned());
    v
}

fn write_table(cfg: &RunConfig, mut t: Table, notes: Vec<String>, name: &str, written: &mut Vec<PathBuf>) -> AppResult<()> {
    if !cfg.export_csv {
        return Ok(());
    }
    t.notes = notes;
    let path = cfg.out.join(name);
    t.write(&path)?;
    written.push(path);
    Ok(())
}

/// Runs the configured command and returns the files written.
pub fn execute(cfg: &RunConfig) -> AppResult<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| AppError::io(&cfg.out, e))?;
    let mut written = Vec::new();
    let echo = cfg.out.join("config.txt");
    crate::write_atomic(&echo, format_config(cfg).as_bytes())?;
    written.push(echo);
    match cfg.command {
        Command::Convergence => convergence(cfg, &mut written)?,
        Command::Run => single(cfg, &mut written)?,
        Command::Edema => edema(cfg, &mut written)?,
        Command::Sweep => sweep(cfg, &mut written)?,
    }
    Ok(written)
}

fn convergence(cfg: &RunConfig, written: &mut Vec<PathBuf>) -> AppResult<()> {
    let mp = manufactured(cfg)?;
    let hs = halving_sequence(cfg.h_max, cfg.levels);
    let table = parallel_study(&mp, &hs, &settings(cfg))?;
    let notes = provenance(cfg, &[format!("params: {}", describe(&mp.problem.params))]);
    let name = format!("convergence_{}_theta{}.csv", mp.name, cfg.theta);
    write_table(cfg, convergence_table(&table), notes, &name, written)
}

fn single(cfg: &RunConfig, written: &mut Vec<PathBuf>) -> AppResult<()> {
    let mp = manufactured(cfg)?;
    let clock = StdClock::start();
    let ctx = |e| AppError::core(format!("{} at h = {}", mp.name, format_h(cfg.h)), e);
    let disc = mp.discretize(cfg.h).map_err(ctx)?;
    let config = settings(cfg).config(cfg.h, mp.problem.final_time);
    let state = solve_terminal(&mp, &disc, config.clone()).map_err(ctx)?;
    let mut report = error_norms(&state, &mp, &disc, cfg.h, &config).map_err(ctx)?;
    report.seconds = poro_core::verification::Clock::now(&clock);
    let table = ConvergenceTable {
        rows: vec![report],
        orders: Vec::new(),
    };
    let notes = provenance(
        cfg,
        &[
            format!("params: {}", describe(&mp.problem.params)),
            format!("dt = {:?}, T = {:?}", config.dt, mp.problem.final_time),
        ],
    );
    write_table(cfg, convergence_table(&table), notes, &format!("run_{}.csv", mp.name), written)?;
    if cfg.export_vtk {
        let path = cfg.out.join(format!("run_{}.vtk", mp.name));
        vtk::write_state(&path, &format!("{} t={:?}", mp.name, state.t), &disc, &state)?;
        written.push(path);
    }
    Ok(())
}

fn edema_notes(cfg: &RunConfig, c: &EdemaConfig, r: &EdemaReport) -> AppResult<Vec<String>> {
    let p = c.params().map_err(|e| AppError::core("edema parameters", e))?;
    Ok(provenance(
        cfg,
        &[
            format!("params: {}", describe(&p)),
            format!("plateau_min = {:?}", r.plateau_time),
            format!("pressure_range_Pa = {:?} {:?}", r.pressure_range.0, r.pressure_range.1),
            format!("tissue_wall_mean_Pa = {:?}", r.tissue_wall_mean_pressure),
        ],
    ))
}

fn edema(cfg: &RunConfig, written: &mut Vec<PathBuf>) -> AppResult<()> {
    let c = edema_config(cfg)?;
    let normal = run_normal_brain(&c).map_err(|e| AppError::core("normal brain", e))?;
    let notes = edema_notes(cfg, &c, &normal)?;
    write_table(cfg, series_table(&normal), notes, "edema_normal.csv", written)?;
    let injury = run_injury(&c).map_err(|e| AppError::core("injury", e))?;
    let notes = edema_notes(cfg, &c, &injury)?;
    write_table(cfg, series_table(&injury), notes, "edema_injury.csv", written)?;
    if cfg.export_vtk {
        for (name, r) in [("edema_normal.vtk", &normal), ("edema_injury.vtk", &injury)] {
            let path = cfg.out.join(name);
            vtk::write_state(&path, &format!("edema t={:?} min", r.terminal.t), &r.disc, &r.terminal)?;
            written.push(path);
        }
    }
    Ok(())
}

fn sweep(cfg: &RunConfig, written: &mut Vec<PathBuf>) -> AppResult<()> {
    let c = edema_config(cfg)?;
    let rows = parallel_sweep(&c, cfg.sweep_param, &cfg.sweep_values)?;
    let notes = provenance(cfg, &[]);
    let name = format!("sweep_{}.csv", cfg.sweep_param.name());
    write_table(cfg, sweep_table(&rows), notes, &name, written)
}

/// Parses the file at `path` (if any) with `overrides` applied.
pub fn load_config(path: Option<&Path>, overrides: &[(&str, String)]) -> AppResult<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| AppError::io(p, e))?,
        None => String::new(),
    };
    Ok(crate::config::parse_config(&text, overrides)?)
}
