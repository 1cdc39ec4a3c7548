//! Run configuration: flat `key = value` text with `#` comments.
//!
//! Every key has a default except `command`, and `problem` for the
//! `convergence` and `run` commands. Defaults that depend on the problem
//! (mesh sizes and time step) are resolved after the whole file is read, so
//! the normalized echo always lists concrete values.

use std::fmt::{self, Write as _};
use std::path::PathBuf;

use poro_core::edema::{AnnulusSpec, EdemaConfig, LesionRegion, SweepParameter, VentricleTraction};
use poro_core::linsolve::LinearSolver;
use poro_core::verification::TimeStepRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Convergence,
    Edema,
    Sweep,
    Run,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Convergence => "convergence",
            Command::Edema => "edema",
            Command::Sweep => "sweep",
            Command::Run => "run",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemName {
    Example1,
    Example2,
    Example3,
    Exactness,
    Edema,
}

impl ProblemName {
    pub fn name(self) -> &'static str {
        match self {
            ProblemName::Example1 => "example1",
            ProblemName::Example2 => "example2",
            ProblemName::Example3 => "example3",
            ProblemName::Exactness => "exactness",
            ProblemName::Edema => "edema",
        }
    }

    fn default_h_max(self) -> f64 {
        match self {
            ProblemName::Example3 => 1.0 / 16.0,
            _ => 0.5,
        }
    }

    fn default_dt(self) -> TimeStepRule {
        match self {
            ProblemName::Example3 => TimeStepRule::Fraction(5),
            _ => TimeStepRule::HSquared,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Direct,
    Gmres,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    Annulus(AnnulusSpec),
    File(PathBuf),
}

/// Edema scenario keys (`edema.*`).
#[derive(Debug, Clone, PartialEq)]
pub struct EdemaSettings {
    pub geometry: GeometrySpec,
    pub young: f64,
    pub poisson: f64,
    pub alpha: f64,
    pub c0: f64,
    pub permeability: f64,
    pub mu_f: f64,
    pub conductance: f64,
    pub conductance_includes_viscosity: bool,
    pub p_sas: f64,
    pub ventricle_pressure: f64,
    pub source: f64,
    pub lesion: LesionRegion,
    pub traction: VentricleTraction,
    pub dt: f64,
    pub final_time: f64,
}

impl Default for EdemaSettings {
    fn default() -> Self {
        let c = EdemaConfig::default();
        let geometry = match c.geometry {
            poro_core::edema::EdemaGeometry::Annulus(a) => GeometrySpec::Annulus(a),
            poro_core::edema::EdemaGeometry::Mesh(_) => unreachable!(),
        };
        EdemaSettings {
            geometry,
            young: c.young,
            poisson: c.poisson,
            alpha: c.alpha,
            c0: c.c0,
            permeability: c.permeability,
            mu_f: c.mu_f,
            conductance: c.conductance,
            conductance_includes_viscosity: c.conductance_includes_viscosity,
            p_sas: c.p_sas,
            ventricle_pressure: c.ventricle_pressure,
            source: c.source,
            lesion: c.lesion,
            traction: c.traction,
            dt: c.dt,
            final_time: c.final_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem: ProblemName,
    pub theta: u8,
    /// Coarsest mesh size of a convergence study.
    pub h_max: f64,
    pub levels: usize,
    /// Mesh size of a single run.
    pub h: f64,
    pub dt: TimeStepRule,
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iter: usize,
    pub out: PathBuf,
    pub export_csv: bool,
    pub export_vtk: bool,
    /// Recorded for provenance only; every path is deterministic.
    pub seed: u64,
    pub edema: EdemaSettings,
    pub sweep_param: SweepParameter,
    /// Multipliers for `E` and `K`, absolute values for `nu`.
    pub sweep_values: Vec<f64>,
}

impl RunConfig {
    pub fn defaults(command: Command, problem: ProblemName) -> Self {
        RunConfig {
            command,
            problem,
            theta: 1,
            h_max: problem.default_h_max(),
            levels: 4,
            h: 1.0 / 8.0,
            dt: problem.default_dt(),
            solver: SolverKind::Direct,
            tol: 1e-10,
            max_iter: 2000,
            out: PathBuf::from("out"),
            export_csv: true,
            export_vtk: false,
            seed: 0,
            edema: EdemaSettings::default(),
            sweep_param: SweepParameter::Permeability,
            sweep_values: vec![0.1, 1.0, 10.0],
        }
    }

    pub fn linear_solver(&self) -> LinearSolver {
        match self.solver {
            SolverKind::Direct => LinearSolver::Direct,
            SolverKind::Gmres => LinearSolver::Iterative {
                tol: self.tol,
                max_iter: self.max_iter,
                restart: 60,
            },
        }
    }

    /// `h_max, h_max / 2, ...`
    pub fn mesh_sizes(&self) -> Vec<f64> {
        poro_core::verification::halving_sequence(self.h_max, self.levels)
    }
}

// ---------------------------------------------------------------------------
// errors

/// Where a bad setting came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Line(usize),
    /// Command-line override of the named key.
    Override(String),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Line(n) => write!(f, "line {n}"),
            Source::Override(k) => write!(f, "command-line option for `{k}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{at}: unknown key `{key}`")]
    UnknownKey { at: Source, key: String },

    #[error("{at}: `{key} = {value}`: expected {expected}")]
    Type {
        at: Source,
        key: String,
        value: String,
        expected: String,
    },

    #[error("{at}: expected `key = value`, found `{text}`")]
    Syntax { at: Source, text: String },

    #[error("{at}: key `{key}` given twice (first on {first})")]
    Duplicate { at: Source, key: String, first: Source },

    #[error("missing required key `{key}`{}", match .context { Some(c) => format!(" ({c})"), None => String::new() })]
    Missing { key: String, context: Option<String> },

    #[error("{at}: {msg}")]
    Invalid { at: Source, msg: String },
}

impl ConfigError {
    /// Line number of the offending entry, if it came from the file.
    pub fn line(&self) -> Option<usize> {
        let at = match self {
            ConfigError::UnknownKey { at, .. }
            | ConfigError::Type { at, .. }
            | ConfigError::Syntax { at, .. }
            | ConfigError::Duplicate { at, .. }
            | ConfigError::Invalid { at, .. } => at,
            ConfigError::Missing { .. } => return None,
        };
        match at {
            Source::Line(n) => Some(*n),
            Source::Override(_) => None,
        }
    }
}

// ---------------------------------------------------------------------------
// value syntax

/// Accepts `a/b` as well as plain numbers.
pub fn parse_number(s: &str) -> Option<f64> {
    let v = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?,
        None => s.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

/// `1/n` when `1/h` is an integer, the shortest round-trip decimal otherwise.
pub fn format_h(h: f64) -> String {
    let n = (1.0 / h).round();
    if n >= 1.0 && 1.0 / n == h {
        format!("1/{n}")
    } else {
        format!("{h:?}")
    }
}

fn format_dt(rule: &TimeStepRule) -> String {
    match rule {
        TimeStepRule::HSquared => "h^2".into(),
        TimeStepRule::Fraction(n) => format!("T/{n}"),
        TimeStepRule::Fixed(dt) => format!("{dt:?}"),
    }
}

fn parse_dt(s: &str) -> Option<TimeStepRule> {
    if s == "h^2" {
        return Some(TimeStepRule::HSquared);
    }
    if let Some(n) = s.strip_prefix("T/") {
        return n.trim().parse().ok().filter(|&n: &usize| n > 0).map(TimeStepRule::Fraction);
    }
    parse_number(s).filter(|&v| v > 0.0).map(TimeStepRule::Fixed)
}

fn format_lesion(l: &LesionRegion) -> String {
    match l {
        LesionRegion::Disc { center, radius } => format!("disc {:?} {:?} {:?}", center[0], center[1], radius),
        LesionRegion::WholeDomain => "whole".into(),
    }
}

fn parse_lesion(s: &str) -> Option<LesionRegion> {
    let f: Vec<&str> = s.split_whitespace().collect();
    match f.as_slice() {
        ["whole"] => Some(LesionRegion::WholeDomain),
        ["disc", x, y, r] => Some(LesionRegion::Disc {
            center: [parse_number(x)?, parse_number(y)?],
            radius: parse_number(r)?,
        }),
        _ => None,
    }
}

fn format_geometry(g: &GeometrySpec) -> String {
    match g {
        GeometrySpec::Annulus(a) => format!("annulus {:?} {:?} {} {}", a.r_inner, a.r_outer, a.n_radial, a.n_angular),
        GeometrySpec::File(p) => format!("file {}", p.display()),
    }
}

fn parse_geometry(s: &str) -> Option<GeometrySpec> {
    if let Some(p) = s.strip_prefix("file ") {
        let p = p.trim();
        return (!p.is_empty()).then(|| GeometrySpec::File(PathBuf::from(p)));
    }
    let f: Vec<&str> = s.split_whitespace().collect();
    match f.as_slice() {
        ["annulus", a, b, n, m] => Some(GeometrySpec::Annulus(AnnulusSpec {
            r_inner: parse_number(a)?,
            r_outer: parse_number(b)?,
            n_radial: n.parse().ok()?,
            n_angular: m.parse().ok()?,
        })),
        _ => None,
    }
}

pub fn parse_list(s: &str) -> Option<Vec<f64>> {
    let v: Option<Vec<f64>> = s.split(',').map(|x| parse_number(x.trim())).collect();
    v.filter(|v| !v.is_empty())
}

fn format_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "on" => Some(true),
        "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

fn parse_command(s: &str) -> Option<Command> {
    Some(match s {
        "convergence" => Command::Convergence,
        "edema" => Command::Edema,
        "sweep" => Command::Sweep,
        "run" | "single-run" => Command::Run,
        _ => return None,
    })
}

pub fn parse_problem(s: &str) -> Option<ProblemName> {
    Some(match s {
        "example1" => ProblemName::Example1,
        "example2" => ProblemName::Example2,
        "example3" => ProblemName::Example3,
        "exactness" => ProblemName::Exactness,
        "edema" => ProblemName::Edema,
        _ => return None,
    })
}

// ---------------------------------------------------------------------------
// parsing

/// Every key in echo order.
pub const KEYS: &[&str] = &[
    "command",
    "problem",
    "theta",
    "h_max",
    "levels",
    "h",
    "dt",
    "solver",
    "tol",
    "max_iter",
    "out",
    "export_csv",
    "export_vtk",
    "seed",
    "edema.geometry",
    "edema.young",
    "edema.poisson",
    "edema.alpha",
    "edema.c0",
    "edema.permeability",
    "edema.mu_f",
    "edema.conductance",
    "edema.conductance_includes_viscosity",
    "edema.p_sas",
    "edema.ventricle_pressure",
    "edema.source",
    "edema.lesion",
    "edema.traction",
    "edema.dt",
    "edema.final_time",
    "sweep.param",
    "sweep.values",
];

struct Entry {
    at: Source,
    key: String,
    value: String,
}

fn split_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let at = Source::Line(i + 1);
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { at, text: line.into() });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax { at, text: line.into() });
        }
        out.push(Entry {
            at,
            key: k.into(),
            value: v.into(),
        });
    }
    Ok(out)
}

fn type_err(e: &Entry, expected: &str) -> ConfigError {
    ConfigError::Type {
        at: e.at.clone(),
        key: e.key.clone(),
        value: e.value.clone(),
        expected: expected.into(),
    }
}

fn positive(e: &Entry) -> Result<f64, ConfigError> {
    parse_number(&e.value)
        .filter(|&v| v > 0.0)
        .ok_or_else(|| type_err(e, "a positive number"))
}

fn number(e: &Entry) -> Result<f64, ConfigError> {
    parse_number(&e.value).ok_or_else(|| type_err(e, "a number"))
}

fn apply(cfg: &mut RunConfig, e: &Entry) -> Result<(), ConfigError> {
    let v = e.value.as_str();
    let ed = &mut cfg.edema;
    match e.key.as_str() {
        "command" => cfg.command = parse_command(v).ok_or_else(|| type_err(e, "one of {convergence, edema, sweep, run}"))?,
        "problem" => {
            cfg.problem =
                parse_problem(v).ok_or_else(|| type_err(e, "one of {example1, example2, example3, exactness, edema}"))?
        }
        "theta" => {
            cfg.theta = match v {
                "0" => 0,
                "1" => 1,
                _ => return Err(type_err(e, "one of {0, 1}")),
            }
        }
        "h_max" => cfg.h_max = positive(e)?,
        "levels" => cfg.levels = v.parse().ok().filter(|&n| n >= 1).ok_or_else(|| type_err(e, "an integer >= 1"))?,
        "h" => cfg.h = positive(e)?,
        "dt" => cfg.dt = parse_dt(v).ok_or_else(|| type_err(e, "`h^2`, `T/<n>` or a positive number"))?,
        "solver" => {
            cfg.solver = match v {
                "direct" => SolverKind::Direct,
                "gmres" => SolverKind::Gmres,
                _ => return Err(type_err(e, "one of {direct, gmres}")),
            }
        }
        "tol" => cfg.tol = positive(e)?,
        "max_iter" => cfg.max_iter = v.parse().ok().filter(|&n| n >= 1).ok_or_else(|| type_err(e, "an integer >= 1"))?,
        "out" => {
            if v.is_empty() {
                return Err(type_err(e, "a directory path"));
            }
            cfg.out = PathBuf::from(v)
        }
        "export_csv" => cfg.export_csv = parse_bool(v).ok_or_else(|| type_err(e, "true or false"))?,
        "export_vtk" => cfg.export_vtk = parse_bool(v).ok_or_else(|| type_err(e, "true or false"))?,
        "seed" => cfg.seed = v.parse().map_err(|_| type_err(e, "a non-negative integer"))?,
        "edema.geometry" => {
            ed.geometry = parse_geometry(v)
                .ok_or_else(|| type_err(e, "`annulus <r_in> <r_out> <n_radial> <n_angular>` or `file <path>`"))?
        }
        "edema.young" => ed.young = positive(e)?,
        "edema.poisson" => ed.poisson = number(e)?,
        "edema.alpha" => ed.alpha = number(e)?,
        "edema.c0" => ed.c0 = number(e)?,
        "edema.permeability" => ed.permeability = positive(e)?,
        "edema.mu_f" => ed.mu_f = positive(e)?,
        "edema.conductance" => ed.conductance = positive(e)?,
        "edema.conductance_includes_viscosity" => {
            ed.conductance_includes_viscosity = parse_bool(v).ok_or_else(|| type_err(e, "true or false"))?
        }
        "edema.p_sas" => ed.p_sas = number(e)?,
        "edema.ventricle_pressure" => ed.ventricle_pressure = number(e)?,
        "edema.source" => ed.source = number(e)?,
        "edema.lesion" => ed.lesion = parse_lesion(v).ok_or_else(|| type_err(e, "`disc <x> <y> <radius>` or `whole`"))?,
        "edema.traction" => {
            ed.traction = match v {
                "constant" => VentricleTraction::Constant,
                "coupled" => VentricleTraction::Coupled,
                _ => return Err(type_err(e, "one of {constant, coupled}")),
            }
        }
        "edema.dt" => ed.dt = positive(e)?,
        "edema.final_time" => ed.final_time = positive(e)?,
        "sweep.param" => cfg.sweep_param = SweepParameter::parse(v).ok_or_else(|| type_err(e, "one of {E, nu, K}"))?,
        "sweep.values" => cfg.sweep_values = parse_list(v).ok_or_else(|| type_err(e, "a comma-separated list of numbers"))?,
        _ => {
            return Err(ConfigError::UnknownKey {
                at: e.at.clone(),
                key: e.key.clone(),
            })
        }
    }
    Ok(())
}

/// Parses `text`, then applies `overrides` (command-line options) on top.
pub fn parse_config(text: &str, overrides: &[(&str, String)]) -> Result<RunConfig, ConfigError> {
    let mut entries = split_entries(text)?;
    for (k, v) in overrides {
        entries.push(Entry {
            at: Source::Override((*k).into()),
            key: (*k).into(),
            value: v.clone(),
        });
    }
    // duplicates within the file are errors; overrides replace file values
    let mut seen: Vec<(&str, &Source)> = Vec::new();
    for e in &entries {
        if let Source::Line(_) = e.at {
            if let Some((_, first)) = seen.iter().find(|(k, _)| *k == e.key) {
                return Err(ConfigError::Duplicate {
                    at: e.at.clone(),
                    key: e.key.clone(),
                    first: (*first).clone(),
                });
            }
            seen.push((&e.key, &e.at));
        }
    }
    let find = |key: &str| entries.iter().rev().find(|e| e.key == key);
    let command_entry = find("command").ok_or(ConfigError::Missing {
        key: "command".into(),
        context: None,
    })?;
    let mut probe = RunConfig::defaults(Command::Run, ProblemName::Example1);
    apply(&mut probe, command_entry)?;
    let command = probe.command;
    let problem = match find("problem") {
        Some(e) => {
            apply(&mut probe, e)?;
            probe.problem
        }
        None => match command {
            Command::Edema | Command::Sweep => ProblemName::Edema,
            Command::Convergence | Command::Run => {
                return Err(ConfigError::Missing {
                    key: "problem".into(),
                    context: Some(format!("required by `command = {}` ({})", command.name(), command_entry.at)),
                })
            }
        },
    };
    let mut cfg = RunConfig::defaults(command, problem);
    for e in &entries {
        apply(&mut cfg, e)?;
    }
    validate(&cfg, &entries)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig, entries: &[Entry]) -> Result<(), ConfigError> {
    let at = |key: &str| {
        entries
            .iter()
            .rev()
            .find(|e| e.key == key)
            .map(|e| e.at.clone())
            .unwrap_or(Source::Line(0))
    };
    let edema_cmd = matches!(cfg.command, Command::Edema | Command::Sweep);
    if edema_cmd != (cfg.problem == ProblemName::Edema) {
        return Err(ConfigError::Invalid {
            at: at("problem"),
            msg: format!("problem `{}` does not fit command `{}`", cfg.problem.name(), cfg.command.name()),
        });
    }
    if cfg.command == Command::Sweep {
        let bad = cfg.sweep_values.iter().find(|&&v| !(v > 0.0));
        if let Some(v) = bad {
            return Err(ConfigError::Invalid {
                at: at("sweep.values"),
                msg: format!("sweep values must be positive, got {v}"),
            });
        }
        if cfg.sweep_param == SweepParameter::Poisson {
            if let Some(v) = cfg.sweep_values.iter().find(|&&v| v >= 0.5) {
                return Err(ConfigError::Invalid {
                    at: at("sweep.values"),
                    msg: format!("Poisson ratio {v} must be below 0.5"),
                });
            }
        }
    }
    if !(0.0..0.5).contains(&cfg.edema.poisson) {
        return Err(ConfigError::Invalid {
            at: at("edema.poisson"),
            msg: format!("Poisson ratio {} is outside [0, 0.5)", cfg.edema.poisson),
        });
    }
    Ok(())
}

/// Normalized text: every key in [`KEYS`] order, one per line.
pub fn format_config(cfg: &RunConfig) -> String {
    let ed = &cfg.edema;
    let mut s = String::new();
    let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
    put("command", cfg.command.name().into());
    put("problem", cfg.problem.name().into());
    put("theta", cfg.theta.to_string());
    put("h_max", format_h(cfg.h_max));
    put("levels", cfg.levels.to_string());
    put("h", format_h(cfg.h));
    put("dt", format_dt(&cfg.dt));
    put(
        "solver",
        match cfg.solver {
            SolverKind::Direct => "direct",
            SolverKind::Gmres => "gmres",
        }
        .into(),
    );
    put("tol", format!("{:?}", cfg.tol));
    put("max_iter", cfg.max_iter.to_string());
    put("out", cfg.out.display().to_string());
    put("export_csv", cfg.export_csv.to_string());
    put("export_vtk", cfg.export_vtk.to_string());
    put("seed", cfg.seed.to_string());
    put("edema.geometry", format_geometry(&ed.geometry));
    put("edema.young", format!("{:?}", ed.young));
    put("edema.poisson", format!("{:?}", ed.poisson));
    put("edema.alpha", format!("{:?}", ed.alpha));
    put("edema.c0", format!("{:?}", ed.c0));
    put("edema.permeability", format!("{:?}", ed.permeability));
    put("edema.mu_f", format!("{:?}", ed.mu_f));
    put("edema.conductance", format!("{:?}", ed.conductance));
    put(
        "edema.conductance_includes_viscosity",
        ed.conductance_includes_viscosity.to_string(),
    );
    put("edema.p_sas", format!("{:?}", ed.p_sas));
    put("edema.ventricle_pressure", format!("{:?}", ed.ventricle_pressure));
    put("edema.source", format!("{:?}", ed.source));
    put("edema.lesion", format_lesion(&ed.lesion));
    put(
        "edema.traction",
        match ed.traction {
            VentricleTraction::Constant => "constant",
            VentricleTraction::Coupled => "coupled",
        }
        .into(),
    );
    put("edema.dt", format!("{:?}", ed.dt));
    put("edema.final_time", format!("{:?}", ed.final_time));
    put("sweep.param", cfg.sweep_param.name().into());
    put("sweep.values", format_list(&cfg.sweep_values));
    s
}
