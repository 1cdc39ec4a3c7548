//! Brain-edema scenario: normal-brain equilibrium, injury source and
//! parameter sweeps on an annular tissue slice.
//!
//! Units are mm, minutes and Pa throughout.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::{BoundaryVectorFn, ScalarFn};
use crate::linsolve::LinearSolver;
use crate::mesh::{generate_annulus, BoundaryTag, Mesh, Point};
use crate::norms::vertex_values;
use crate::params::{lame_from_young_poisson, Permeability, PhysicalParams};
use crate::problem::{BiotProblem, Discretization, RobinCondition};
use crate::stepper::{Stepper, SteppingConfig, SystemState};

/// Structured annulus standing in for the tissue slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSpec {
    pub r_inner: f64,
    pub r_outer: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl Default for AnnulusSpec {
    fn default() -> Self {
        AnnulusSpec {
            r_inner: 20.0,
            r_outer: 62.0,
            n_radial: 20,
            n_angular: 96,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdemaGeometry {
    Annulus(AnnulusSpec),
    /// Imported mesh with `TissueWall` and `VentricleWall` tags.
    Mesh(Mesh),
}

/// Where the injury source acts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LesionRegion {
    Disc { center: Point, radius: f64 },
    WholeDomain,
}

impl LesionRegion {
    pub fn contains(&self, x: Point) -> bool {
        match *self {
            LesionRegion::Disc { center, radius } => (x[0] - center[0]).hypot(x[1] - center[1]) <= radius,
            LesionRegion::WholeDomain => true,
        }
    }
}

/// Load on the ventricle wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VentricleTraction {
    /// `-p_v n` with the prescribed ventricular pressure.
    #[default]
    Constant,
    /// `-p_h n` with the discrete pressure.
    Coupled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdemaConfig {
    pub geometry: EdemaGeometry,
    pub young: f64,
    pub poisson: f64,
    pub alpha: f64,
    pub c0: f64,
    /// Isotropic permeability, mm^2.
    pub permeability: f64,
    /// Pa min
    pub mu_f: f64,
    /// Absorption conductance at the tissue wall, mm / min / Pa.
    pub conductance: f64,
    /// Divide the conductance by `mu_f` as well.
    pub conductance_includes_viscosity: bool,
    pub p_sas: f64,
    pub ventricle_pressure: f64,
    /// Injury source rate, 1 / min.
    pub source: f64,
    pub lesion: LesionRegion,
    pub traction: VentricleTraction,
    pub dt: f64,
    pub final_time: f64,
    pub solver: LinearSolver,
}

/// Lesion radius, mm.
pub const DEFAULT_LESION_RADIUS: f64 = 3.5;

impl Default for EdemaConfig {
    fn default() -> Self {
        let a = AnnulusSpec::default();
        EdemaConfig {
            geometry: EdemaGeometry::Annulus(a),
            young: 9010.0,
            poisson: 0.35,
            alpha: 1.0,
            c0: 4.5e-7,
            permeability: 1.4e-9,
            mu_f: 1.48e-5,
            conductance: 3e-5,
            conductance_includes_viscosity: false,
            p_sas: 1070.0,
            ventricle_pressure: 1100.0,
            source: 9e-3,
            lesion: LesionRegion::Disc {
                center: [0.5 * (a.r_inner + a.r_outer), 0.0],
                radius: DEFAULT_LESION_RADIUS,
            },
            traction: VentricleTraction::Constant,
            dt: 1.0,
            final_time: 48.0 * 60.0,
            solver: LinearSolver::Direct,
        }
    }
}

impl EdemaConfig {
    pub fn params(&self) -> Result<PhysicalParams> {
        PhysicalParams::from_young_poisson(
            self.young,
            self.poisson,
            self.alpha,
            self.c0,
            Permeability::isotropic(self.permeability),
            self.mu_f,
        )
    }

    pub fn mesh(&self) -> Result<Mesh> {
        match &self.geometry {
            EdemaGeometry::Annulus(a) => generate_annulus(a.r_inner, a.r_outer, a.n_radial, a.n_angular),
            EdemaGeometry::Mesh(m) => Ok(m.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let positive = [
            ("conductance", self.conductance),
            ("time step", self.dt),
            ("final time", self.final_time),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.source >= 0.0) {
            return Err(Error::invalid("source rate must be non-negative"));
        }
        if !(self.p_sas.is_finite() && self.ventricle_pressure.is_finite()) {
            return Err(Error::invalid("boundary pressures must be finite"));
        }
        if let LesionRegion::Disc { center, radius } = self.lesion {
            if !(radius > 0.0) {
                return Err(Error::invalid("lesion radius must be positive"));
            }
            let mesh = self.mesh()?;
            let hit = mesh.vertices().iter().any(|&v| self.lesion.contains(v))
                || (0..mesh.num_triangles()).any(|t| point_in_triangle(center, mesh.triangle_points(t)));
            if !hit {
                return Err(Error::invalid("lesion disc does not intersect the domain"));
            }
        }
        Ok(())
    }

    /// Problem with source rate `source` (the configured one is ignored).
    fn problem(&self, source: f64) -> Result<BiotProblem> {
        let mut pb = BiotProblem::new(self.params()?, self.final_time);
        pb.displacement_dirichlet
            .push((BoundaryTag::TissueWall, None, Arc::new(|_, _| 0.0)));
        match self.traction {
            VentricleTraction::Constant => {
                let pv = self.ventricle_pressure;
                let g: BoundaryVectorFn = Arc::new(move |_, n, _| [-pv * n[0], -pv * n[1]]);
                pb.tractions.push((BoundaryTag::VentricleWall, g));
            }
            VentricleTraction::Coupled => pb.pressure_tractions.push(BoundaryTag::VentricleWall),
        }
        let pv = self.ventricle_pressure;
        pb.pressure_dirichlet
            .push((BoundaryTag::VentricleWall, Arc::new(move |_, _| pv)));
        pb.robin.push(RobinCondition {
            tag: BoundaryTag::TissueWall,
            conductance: self.conductance,
            external_pressure: self.p_sas,
            includes_viscosity: self.conductance_includes_viscosity,
        });
        let lesion = self.lesion;
        let src: ScalarFn = Arc::new(move |x, _| if lesion.contains(x) { source } else { 0.0 });
        pb.source = src;
        pb.time_independent_data = true;
        Ok(pb)
    }
}

fn point_in_triangle(p: Point, t: [Point; 3]) -> bool {
    let s = |a: Point, b: Point| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let (d0, d1, d2) = (s(t[0], t[1]), s(t[1], t[2]), s(t[2], t[0]));
    (d0 >= 0.0 && d1 >= 0.0 && d2 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0 && d2 <= 0.0)
}

#[derive(Debug, Clone)]
pub struct EdemaReport {
    /// Minutes.
    pub times: Vec<f64>,
    /// Largest nodal pressure, Pa.
    pub p_max: Vec<f64>,
    /// Largest vertex displacement magnitude, mm.
    pub u_max: Vec<f64>,
    /// First time after which both series stay within 1% of their terminal values.
    pub plateau_time: f64,
    /// `(min, max)` of the terminal nodal pressure.
    pub pressure_range: (f64, f64),
    /// Mean pressure on the tissue wall at the terminal time.
    pub tissue_wall_mean_pressure: f64,
    pub terminal: SystemState,
    pub disc: Discretization,
}

/// Relative band defining the plateau.
pub const PLATEAU_TOLERANCE: f64 = 0.01;

/// First `times[i]` from which every later value of every series lies within
/// `tol` (relative) of that series' last value.
pub fn plateau_time(times: &[f64], series: &[&[f64]], tol: f64) -> Option<f64> {
    let n = times.len();
    if n == 0 || series.iter().any(|s| s.len() != n) {
        return None;
    }
    let mut first = n - 1;
    for i in (0..n).rev() {
        let inside = series.iter().all(|s| {
            let last = s[n - 1];
            (s[i] - last).abs() <= tol * last.abs()
        });
        if !inside {
            break;
        }
        first = i;
    }
    Some(times[first])
}

fn max_pressure(s: &SystemState) -> f64 {
    s.p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn max_displacement(disc: &Discretization, s: &SystemState) -> f64 {
    vertex_values(&disc.mesh, &disc.du, &s.u)
        .iter()
        .map(|d| d[0].hypot(d[1]))
        .fold(0.0, f64::max)
}

fn wall_mean(disc: &Discretization, p: &[f64]) -> f64 {
    let (mut sum, mut len) = (0.0, 0.0);
    for e in disc.mesh.edges_with_tag(&BoundaryTag::TissueWall) {
        let l = e.length(&disc.mesh);
        sum += 0.5 * l * (p[e.vertices[0]] + p[e.vertices[1]]);
        len += l;
    }
    if len > 0.0 {
        sum / len
    } else {
        f64::NAN
    }
}

fn report(disc: Discretization, times: Vec<f64>, p_max: Vec<f64>, u_max: Vec<f64>, terminal: SystemState) -> EdemaReport {
    let plateau = plateau_time(&times, &[&p_max, &u_max], PLATEAU_TOLERANCE).unwrap_or(terminal.t);
    let lo = terminal.p.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = max_pressure(&terminal);
    EdemaReport {
        times,
        p_max,
        u_max,
        plateau_time: plateau,
        pressure_range: (lo, hi),
        tissue_wall_mean_pressure: wall_mean(&disc, &terminal.p),
        terminal,
        disc,
    }
}

/// Time step standing in for an infinite one: the storage term drops out
/// and a single step lands on the steady state.
const STEADY_STEP: f64 = 1e12;

fn equilibrium(config: &EdemaConfig, pb: &BiotProblem, disc: &Discretization) -> Result<SystemState> {
    let mut c = SteppingConfig::new(1, STEADY_STEP, STEADY_STEP);
    c.solver = config.solver;
    let stepper = Stepper::new(pb, disc, c)?;
    let ns = disc.ds.len();
    let mut s = stepper.step(&SystemState::zeros(disc.du.len(), ns))?;
    s.t = 0.0;
    s.eta_prev = s.eta.clone();
    Ok(s)
}

/// Steady state without injury (`phi = 0`): absorption balances drainage.
pub fn run_normal_brain(config: &EdemaConfig) -> Result<EdemaReport> {
    config.validate()?;
    let pb = config.problem(0.0)?;
    let disc = Discretization::new(config.mesh()?, &pb)?;
    let s = equilibrium(config, &pb, &disc)?;
    let (p, u) = (max_pressure(&s), max_displacement(&disc, &s));
    Ok(report(disc, alloc::vec![0.0], alloc::vec![p], alloc::vec![u], s))
}

/// Injury run from the normal-brain equilibrium with the configured source.
pub fn run_injury(config: &EdemaConfig) -> Result<EdemaReport> {
    config.validate()?;
    let rest = config.problem(0.0)?;
    let mesh = config.mesh()?;
    let disc0 = Discretization::new(mesh.clone(), &rest)?;
    let start = equilibrium(config, &rest, &disc0)?;
    let pb = config.problem(config.source)?;
    let disc = Discretization::new(mesh, &pb)?;
    let mut c = SteppingConfig::new(1, config.dt, config.final_time);
    c.solver = config.solver;
    let stepper = Stepper::new(&pb, &disc, c)?;
    let (mut times, mut p_max, mut u_max) = (Vec::new(), Vec::new(), Vec::new());
    let terminal = stepper.run_from(start, |_, s| {
        times.push(s.t);
        p_max.push(max_pressure(s));
        u_max.push(max_displacement(&disc, s));
    })?;
    Ok(report(disc, times, p_max, u_max, terminal))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Young,
    Poisson,
    Permeability,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Young => "E",
            SweepParameter::Poisson => "nu",
            SweepParameter::Permeability => "K",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "E" | "young" => Some(SweepParameter::Young),
            "nu" | "poisson" => Some(SweepParameter::Poisson),
            "K" | "permeability" => Some(SweepParameter::Permeability),
            _ => None,
        }
    }
}

/// Configuration of one sweep row. `E` and `K` values multiply the
/// baseline; `nu` values replace it.
pub fn sweep_config(base: &EdemaConfig, parameter: SweepParameter, value: f64) -> Result<EdemaConfig> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::invalid(format!("sweep values must be positive, got {value}")));
    }
    let mut c = base.clone();
    match parameter {
        SweepParameter::Young => c.young *= value,
        SweepParameter::Poisson => {
            lame_from_young_poisson(c.young, value)?;
            c.poisson = value;
        }
        SweepParameter::Permeability => c.permeability *= value,
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: SweepParameter,
    pub value: f64,
    pub mu: f64,
    pub inv_lambda: f64,
    pub u_max: f64,
    pub p_max: f64,
    pub plateau_time: f64,
}

pub fn sweep_row(base: &EdemaConfig, parameter: SweepParameter, value: f64) -> Result<SweepRow> {
    let c = sweep_config(base, parameter, value)?;
    let prm = c.params()?;
    let r = run_injury(&c)?;
    Ok(SweepRow {
        parameter,
        value,
        mu: prm.mu,
        inv_lambda: 1.0 / prm.lambda,
        u_max: *r.u_max.last().unwrap_or(&f64::NAN),
        p_max: *r.p_max.last().unwrap_or(&f64::NAN),
        plateau_time: r.plateau_time,
    })
}

/// One injury run per value, in order.
pub fn parameter_sweep(base: &EdemaConfig, parameter: SweepParameter, values: &[f64]) -> Result<Vec<SweepRow>> {
    // reject bad rows before any run starts
    for &v in values {
        sweep_config(base, parameter, v)?;
    }
    values.iter().map(|&v| sweep_row(base, parameter, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_of_step_series() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let a = [0.0, 50.0, 99.5, 100.0, 100.0];
        let b = [0.0, 1.0, 1.0, 1.0, 1.0];
        assert_eq!(plateau_time(&t, &[&a, &b], 0.01), Some(2.0));
        assert_eq!(plateau_time(&t, &[&b], 0.01), Some(1.0));
        // leaving the band later resets the plateau
        let c = [100.0, 100.0, 80.0, 100.0, 100.0];
        assert_eq!(plateau_time(&t, &[&c], 0.01), Some(3.0));
    }

    #[test]
    fn poisson_sweep_rejects_incompressible() {
        let base = EdemaConfig::default();
        assert!(matches!(
            sweep_config(&base, SweepParameter::Poisson, 0.5),
            Err(Error::PoissonRatio(_))
        ));
        assert!(sweep_config(&base, SweepParameter::Young, -1.0).is_err());
        let c = sweep_config(&base, SweepParameter::Permeability, 10.0).unwrap();
        assert!((c.permeability - 1.4e-8).abs() < 1e-20);
    }

    #[test]
    fn lesion_outside_domain_rejected() {
        let mut c = EdemaConfig::default();
        c.lesion = LesionRegion::Disc {
            center: [500.0, 0.0],
            radius: 5.0,
        };
        assert!(c.validate().is_err());
        c.lesion = LesionRegion::Disc {
            center: [0.0, 0.0],
            radius: 25.0,
        };
        assert!(c.validate().is_ok());
    }

    #[test]
    fn defaults_follow_the_parameter_table() {
        let c = EdemaConfig::default();
        let p = c.params().unwrap();
        assert!((p.mu - 3337.0).abs() < 1.0);
        assert_eq!(c.final_time, 2880.0);
        c.validate().unwrap();
    }
}
