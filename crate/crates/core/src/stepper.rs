//! Backward-Euler time stepping of the three-field system.
//!
//! Each step solves, at `t_{n+1}`,
//!
//! ```text
//! mu A u - B^T xi                       = F_u
//! B u + k3 M xi - k1 M eta^{n+theta}    = 0
//! M (eta - eta^n) / dt + (S + R)(k1 xi + k2 eta) = F_eta
//! ```
//!
//! with `theta = 1` as one coupled block system, or with `theta = 0` as a
//! `(u, xi)` solve using `eta^n` followed by a solve for `eta`. Afterwards
//! `p = k1 xi + k2 eta^{n+theta}` and `q = k1 eta - k3 xi`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::assembly::{
    assemble_div_coupling, assemble_elasticity, assemble_gravity_load, assemble_mass, assemble_pressure_stiffness,
    assemble_pressure_traction, assemble_robin_boundary, assemble_scalar_load, assemble_vector_load,
};
use crate::error::{Error, Result};
use crate::fem::{rigid_motions, RigidMotionBasis};
use crate::linsolve::{Factorization, LinearSolver};
use crate::mesh::mesh_size;
use crate::params::Kappas;
use crate::problem::{BiotProblem, Discretization};
use crate::projection::{elliptic_project_vector, l2_project};
use crate::sparse::{SparseOperator, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RigidMotionMode {
    /// Rigid motions must be excluded by displacement Dirichlet data.
    #[default]
    None,
    /// Three Lagrange multipliers enforce `(u, r) = 0` for every rigid motion `r`.
    Lagrange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteppingConfig {
    /// 1: coupled, 0: decoupled.
    pub theta: u8,
    pub dt: f64,
    pub final_time: f64,
    pub solver: LinearSolver,
    pub rigid_motion: RigidMotionMode,
    /// Adds a Lagrange multiplier enforcing `(p, 1) = 0`; for problems
    /// without any pressure Dirichlet data.
    pub zero_mean_pressure: bool,
    /// Record every `cadence`-th state (the final state is always recorded).
    pub cadence: usize,
}

impl SteppingConfig {
    pub fn new(theta: u8, dt: f64, final_time: f64) -> Self {
        SteppingConfig {
            theta,
            dt,
            final_time,
            solver: LinearSolver::Direct,
            rigid_motion: RigidMotionMode::None,
            zero_mean_pressure: false,
            cadence: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta > 1 {
            return Err(Error::invalid(format!("theta must be 0 or 1, got {}", self.theta)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("time step must be positive"));
        }
        if !(self.final_time >= 0.0) {
            return Err(Error::invalid("final time must be non-negative"));
        }
        if self.cadence == 0 {
            return Err(Error::invalid("output cadence must be at least 1"));
        }
        Ok(())
    }

    /// `N = T / dt`, which must be an integer to within 1e-9.
    pub fn num_steps(&self) -> Result<usize> {
        self.validate()?;
        let ratio = self.final_time / self.dt;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "final time {} is not an integer multiple of the time step {}",
                self.final_time, self.dt
            )));
        }
        Ok(n as usize)
    }

    /// Note recorded for the decoupled scheme: stability needs `dt = O(h^2)`.
    pub fn stability_note(&self) -> Option<&'static str> {
        (self.theta == 0).then_some("decoupled stepping requires dt = O(h^2)")
    }
}

/// Coefficient vectors at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub t: f64,
    pub u: Vec<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// `eta` of the previous level (equal to `eta` for the initial state).
    pub eta_prev: Vec<f64>,
}

impl SystemState {
    pub fn zeros(nu: usize, ns: usize) -> Self {
        SystemState {
            t: 0.0,
            u: vec![0.0; nu],
            xi: vec![0.0; ns],
            eta: vec![0.0; ns],
            p: vec![0.0; ns],
            q: vec![0.0; ns],
            eta_prev: vec![0.0; ns],
        }
    }

    /// Recomputes `p` and `q` from `xi`, `eta` and `eta_prev`.
    pub fn reconstruct(&mut self, k: &Kappas, theta: u8) {
        let eta_p = if theta == 1 { &self.eta } else { &self.eta_prev };
        self.p = self.xi.iter().zip(eta_p).map(|(x, e)| k.k1 * x + k.k2 * e).collect();
        self.q = self.eta.iter().zip(&self.xi).map(|(e, x)| k.k1 * e - k.k3 * x).collect();
    }
}

/// Operators that do not change between steps.
#[derive(Debug, Clone)]
pub struct Operators {
    /// `mu A`
    pub elasticity: SparseOperator,
    pub divergence: SparseOperator,
    pub mass: SparseOperator,
    /// `S + R`: Darcy stiffness plus Robin boundary mass.
    pub flow: SparseOperator,
    pub robin_load: Vec<f64>,
    pub gravity_load: Vec<f64>,
    pub pressure_traction: Option<SparseOperator>,
    pub rigid_motion_constraints: Vec<Vec<f64>>,
    pub mean_weights: Vec<f64>,
}

impl Operators {
    pub fn assemble(problem: &BiotProblem, disc: &Discretization, config: &SteppingConfig) -> Result<Self> {
        let (mesh, du, ds) = (&disc.mesh, &disc.du, &disc.ds);
        let prm = &problem.params;
        let elasticity = assemble_elasticity(mesh, du, prm.mu)?;
        let divergence = assemble_div_coupling(mesh, du, ds)?;
        let mass = assemble_mass(mesh, ds, 1.0)?;
        let mut flow = assemble_pressure_stiffness(mesh, ds, &prm.permeability, prm.mu_f)?;
        let mut robin_load = vec![0.0; ds.len()];
        for r in &problem.robin {
            let mu_f = if r.includes_viscosity { prm.mu_f } else { 1.0 };
            let (op, load) = assemble_robin_boundary(mesh, ds, &r.tag, r.conductance, mu_f, r.external_pressure)?;
            let mut b = TripletBuilder::new(ds.len(), ds.len());
            b.add_block(0, 0, 1.0, &flow);
            b.add_block(0, 0, 1.0, &op);
            flow = b.build();
            robin_load.iter_mut().zip(load).for_each(|(a, b)| *a += b);
        }
        let gravity_load = assemble_gravity_load(mesh, ds, prm)?;
        let pressure_traction = if problem.pressure_tractions.is_empty() {
            None
        } else {
            let mut b = TripletBuilder::new(du.len(), ds.len());
            for tag in &problem.pressure_tractions {
                b.add_block(0, 0, 1.0, &assemble_pressure_traction(mesh, du, ds, tag)?);
            }
            Some(b.build())
        };
        let rigid_motion_constraints = match config.rigid_motion {
            RigidMotionMode::None => Vec::new(),
            RigidMotionMode::Lagrange => {
                let mu = assemble_mass(mesh, du, 1.0)?;
                rigid_motions(du).iter().map(|r| mu.mul_vec(r)).collect()
            }
        };
        let mean_weights = mass.mul_vec(&vec![1.0; ds.len()]);
        Ok(Operators {
            elasticity,
            divergence,
            mass,
            flow,
            robin_load,
            gravity_load,
            pressure_traction,
            rigid_motion_constraints,
            mean_weights,
        })
    }
}

/// Checks that displacement Dirichlet data rule out every rigid motion.
/// Returns the name of the first rigid motion left free, if any.
pub fn unconstrained_rigid_motion(disc: &Discretization) -> Option<&'static str> {
    const NAMES: [&str; 3] = ["x-translation", "y-translation", "rotation"];
    let rm: RigidMotionBasis = rigid_motions(&disc.du);
    let dofs: Vec<usize> = disc.du.dirichlet_dofs().collect();
    let restricted: Vec<Vec<f64>> = rm.iter().map(|r| dofs.iter().map(|&d| r[d]).collect()).collect();
    // Gram-Schmidt in the fixed order above
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (k, v) in restricted.iter().enumerate() {
        let full = crate::sparse::norm2(&rm[k]).max(1e-300);
        let mut w = v.clone();
        for b in &basis {
            let c = crate::sparse::dot(&w, b);
            w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
        }
        let n = crate::sparse::norm2(&w);
        if n <= 1e-10 * full {
            return Some(NAMES[k]);
        }
        basis.push(w.iter().map(|x| x / n).collect());
    }
    None
}

/// Block system with eliminated and replaced rows, factored once.
struct ConstrainedSystem {
    factor: Factorization,
    /// Columns of eliminated unknowns, used to lift their values onto the right-hand side.
    lift: SparseOperator,
    n: usize,
}

impl ConstrainedSystem {
    /// `eliminated` rows and columns become identity rows; `replaced` rows
    /// are overwritten by the given coefficients.
    fn new(
        full: &SparseOperator,
        eliminated: &[usize],
        replaced: &[(usize, Vec<(usize, f64)>)],
        solver: LinearSolver,
    ) -> Result<Self> {
        let n = full.nrows();
        let mut elim = vec![false; n];
        let mut repl = vec![false; n];
        eliminated.iter().for_each(|&i| elim[i] = true);
        replaced.iter().for_each(|(i, _)| repl[*i] = true);
        let mut keep = TripletBuilder::with_capacity(n, n, full.nnz());
        let mut lift = TripletBuilder::new(n, n);
        for (i, j, v) in full.iter() {
            if elim[i] || repl[i] {
                continue;
            }
            if elim[j] {
                lift.push(i, j, v);
            } else {
                keep.push(i, j, v);
            }
        }
        for &i in eliminated {
            keep.push(i, i, 1.0);
        }
        for (i, row) in replaced {
            for &(j, v) in row {
                keep.push(*i, j, v);
            }
        }
        let factor = Factorization::new(&keep.build(), solver)?;
        Ok(ConstrainedSystem {
            factor,
            lift: lift.build(),
            n,
        })
    }

    fn solve(&self, mut rhs: Vec<f64>, eliminated: &[(usize, f64)], replaced: &[(usize, f64)]) -> Result<Vec<f64>> {
        debug_assert_eq!(rhs.len(), self.n);
        if !eliminated.is_empty() {
            let mut g = vec![0.0; self.n];
            for &(i, v) in eliminated {
                g[i] = v;
            }
            self.lift.mul_vec_add(-1.0, &g, &mut rhs);
            for &(i, v) in eliminated {
                rhs[i] = v;
            }
        }
        for &(i, v) in replaced {
            rhs[i] = v;
        }
        self.factor.solve(&rhs)
    }
}

enum Systems {
    Coupled(ConstrainedSystem),
    Decoupled {
        mechanics: ConstrainedSystem,
        flow: ConstrainedSystem,
    },
}

/// Assembled operators and factored step systems for one `(problem, mesh, config)`.
pub struct Stepper<'a> {
    problem: &'a BiotProblem,
    disc: &'a Discretization,
    config: SteppingConfig,
    kappas: Kappas,
    ops: Operators,
    systems: Systems,
    cached_loads: Option<(Vec<f64>, Vec<f64>)>,
}

impl core::fmt::Debug for Stepper<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Stepper")
            .field("config", &self.config)
            .field("kappas", &self.kappas)
            .finish_non_exhaustive()
    }
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a BiotProblem, disc: &'a Discretization, config: SteppingConfig) -> Result<Self> {
        config.validate()?;
        problem.params.validate()?;
        if config.rigid_motion == RigidMotionMode::None {
            if let Some(name) = unconstrained_rigid_motion(disc) {
                return Err(Error::SingularSystem(format!(
                    "displacement is not constrained against the {name}: add displacement Dirichlet data \
                     or enable the rigid-motion Lagrange constraint"
                )));
            }
        }
        if config.zero_mean_pressure && disc.ds.num_dirichlet() > 0 {
            return Err(Error::invalid(
                "zero-mean pressure constraint cannot be combined with pressure Dirichlet data",
            ));
        }
        if config.theta == 0 {
            let h = mesh_size(&disc.mesh);
            if config.dt > h * h {
                log::warn!(
                    "decoupled stepping with dt = {:e} > h^2 = {:e}; {}",
                    config.dt,
                    h * h,
                    config.stability_note().unwrap_or_default()
                );
            }
        }
        let ops = Operators::assemble(problem, disc, &config)?;
        let kappas = problem.params.kappas();
        let systems = build_systems(disc, &ops, &kappas, &config)?;
        let mut stepper = Stepper {
            problem,
            disc,
            config,
            kappas,
            ops,
            systems,
            cached_loads: None,
        };
        if problem.time_independent_data {
            stepper.cached_loads = Some(stepper.loads(0.0)?);
        }
        Ok(stepper)
    }

    pub fn config(&self) -> &SteppingConfig {
        &self.config
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn kappas(&self) -> Kappas {
        self.kappas
    }

    /// Initial state: `u = R_h u0`, `p = Q_h p0`, `q = Q_h div u0`, then
    /// `eta = c0 p + alpha q` and `xi = alpha p - lambda q`.
    pub fn initialize(&self) -> Result<SystemState> {
        let (mesh, du, ds) = (&self.disc.mesh, &self.disc.du, &self.disc.ds);
        let prm = &self.problem.params;
        let j0 = self.problem.initial_displacement_jacobian.clone();
        let p0 = self.problem.initial_pressure.clone();
        let u = elliptic_project_vector(mesh, du, |x| j0(x, 0.0))?.values;
        let p = l2_project(mesh, ds, |x| p0(x, 0.0))?;
        let q = l2_project(mesh, ds, |x| {
            let j = j0(x, 0.0);
            j[0][0] + j[1][1]
        })?;
        let eta: Vec<f64> = p.iter().zip(&q).map(|(p, q)| prm.c0 * p + prm.alpha * q).collect();
        let xi: Vec<f64> = p.iter().zip(&q).map(|(p, q)| prm.alpha * p - prm.lambda * q).collect();
        let mut s = SystemState {
            t: 0.0,
            u,
            xi,
            eta_prev: eta.clone(),
            eta,
            p,
            q,
        };
        s.reconstruct(&self.kappas, 1);
        Ok(s)
    }

    fn loads(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if let Some((fu, fe)) = &self.cached_loads {
            return Ok((fu.clone(), fe.clone()));
        }
        let (mesh, du, ds) = (&self.disc.mesh, &self.disc.du, &self.disc.ds);
        let pr = self.problem;
        let fu = assemble_vector_load(mesh, du, Some(&pr.body_force), &pr.tractions, t)?;
        let mut fe = assemble_scalar_load(mesh, ds, Some(&pr.source), &pr.fluxes, t)?;
        for ((f, r), g) in fe.iter_mut().zip(&self.ops.robin_load).zip(&self.ops.gravity_load) {
            *f += r + g;
        }
        Ok((fu, fe))
    }

    /// Advances `state` by one time step.
    pub fn step(&self, state: &SystemState) -> Result<SystemState> {
        let (nu, ns) = (self.disc.du.len(), self.disc.ds.len());
        let k = self.kappas;
        let dt = self.config.dt;
        let t = state.t + dt;
        let (fu, fe) = self.loads(t)?;
        let u_dir = self.disc.du.dirichlet_values(t);
        let p_dir = self.disc.ds.dirichlet_values(t);
        let m_eta = self.ops.mass.mul_vec(&state.eta);
        let (u, xi, eta) = match &self.systems {
            Systems::Coupled(sys) => {
                let n = sys.n;
                let mut rhs = vec![0.0; n];
                rhs[..nu].copy_from_slice(&fu);
                for i in 0..ns {
                    rhs[nu + ns + i] = fe[i] + m_eta[i] / dt;
                }
                let replaced: Vec<(usize, f64)> = p_dir.iter().map(|&(i, g)| (nu + ns + i, g)).collect();
                let x = sys.solve(rhs, &u_dir, &replaced)?;
                (x[..nu].to_vec(), x[nu..nu + ns].to_vec(), x[nu + ns..nu + 2 * ns].to_vec())
            }
            Systems::Decoupled { mechanics, flow } => {
                let mut rhs = vec![0.0; mechanics.n];
                rhs[..nu].copy_from_slice(&fu);
                if let Some(pt) = &self.ops.pressure_traction {
                    pt.mul_vec_add(-k.k2, &state.eta, &mut rhs[..nu]);
                }
                for i in 0..ns {
                    rhs[nu + i] = k.k1 * m_eta[i];
                }
                let x = mechanics.solve(rhs, &u_dir, &[])?;
                let (u, xi) = (x[..nu].to_vec(), x[nu..nu + ns].to_vec());
                let mut rhs = vec![0.0; flow.n];
                for i in 0..ns {
                    rhs[i] = fe[i] + m_eta[i] / dt;
                }
                self.ops.flow.mul_vec_add(-k.k1, &xi, &mut rhs[..ns]);
                if self.config.zero_mean_pressure {
                    rhs[ns] = -k.k1 * crate::sparse::dot(&self.ops.mean_weights, &xi);
                }
                let replaced: Vec<(usize, f64)> = p_dir.iter().map(|&(i, g)| (i, (g - k.k1 * xi[i]) / k.k2)).collect();
                let x = flow.solve(rhs, &[], &replaced)?;
                (u, xi, x[..ns].to_vec())
            }
        };
        let mut next = SystemState {
            t,
            u,
            xi,
            eta,
            p: Vec::new(),
            q: Vec::new(),
            eta_prev: state.eta.clone(),
        };
        next.reconstruct(&k, self.config.theta);
        Ok(next)
    }

    /// Runs from `initial` to the final time, handing every state (including
    /// the initial one) to `observer`.
    pub fn run_from(&self, initial: SystemState, mut observer: impl FnMut(usize, &SystemState)) -> Result<SystemState> {
        let n = self.config.num_steps()?;
        observer(0, &initial);
        let mut s = initial;
        for i in 1..=n {
            s = self.step(&s)?;
            observer(i, &s);
        }
        Ok(s)
    }

    /// States at multiples of the cadence, plus the final state.
    pub fn trajectory(&self) -> Result<Vec<SystemState>> {
        let n = self.config.num_steps()?;
        let cadence = self.config.cadence;
        let mut out = Vec::new();
        self.run_from(self.initialize()?, |i, s| {
            if i % cadence == 0 || i == n {
                out.push(s.clone());
            }
        })?;
        Ok(out)
    }
}

fn build_systems(disc: &Discretization, ops: &Operators, k: &Kappas, config: &SteppingConfig) -> Result<Systems> {
    let (nu, ns) = (disc.du.len(), disc.ds.len());
    let n_rm = ops.rigid_motion_constraints.len();
    let n_mean = usize::from(config.zero_mean_pressure);
    let b = &ops.divergence;
    let u_elim: Vec<usize> = disc.du.dirichlet_dofs().collect();
    let p_dofs: Vec<usize> = disc.ds.dirichlet_dofs().collect();
    let add_mechanics = |tb: &mut TripletBuilder, xi0: usize, rm0: usize| {
        tb.add_block(0, 0, 1.0, &ops.elasticity);
        tb.add_block_transposed(0, xi0, -1.0, b);
        if let Some(pt) = &ops.pressure_traction {
            tb.add_block(0, xi0, k.k1, pt);
        }
        tb.add_block(xi0, 0, 1.0, b);
        tb.add_block(xi0, xi0, k.k3, &ops.mass);
        for (c, row) in ops.rigid_motion_constraints.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    tb.push(i, rm0 + c, v);
                    tb.push(rm0 + c, i, v);
                }
            }
        }
    };
    let mean_rows = |tb: &mut TripletBuilder, xi0: Option<usize>, eta0: usize, row: usize| {
        for (i, &m) in ops.mean_weights.iter().enumerate() {
            tb.push(eta0 + i, row, m);
            if let Some(x0) = xi0 {
                tb.push(row, x0 + i, k.k1 * m);
            }
            tb.push(row, eta0 + i, k.k2 * m);
        }
    };
    let dt = config.dt;
    if config.theta == 1 {
        let (xi0, eta0, rm0) = (nu, nu + ns, nu + 2 * ns);
        let n = rm0 + n_rm + n_mean;
        let mut tb = TripletBuilder::new(n, n);
        add_mechanics(&mut tb, xi0, rm0);
        if let Some(pt) = &ops.pressure_traction {
            tb.add_block(0, eta0, k.k2, pt);
        }
        tb.add_block(xi0, eta0, -k.k1, &ops.mass);
        tb.add_block(eta0, xi0, k.k1, &ops.flow);
        tb.add_block(eta0, eta0, 1.0 / dt, &ops.mass);
        tb.add_block(eta0, eta0, k.k2, &ops.flow);
        if n_mean == 1 {
            mean_rows(&mut tb, Some(xi0), eta0, rm0 + n_rm);
        }
        let replaced: Vec<(usize, Vec<(usize, f64)>)> = p_dofs
            .iter()
            .map(|&i| (eta0 + i, vec![(xi0 + i, k.k1), (eta0 + i, k.k2)]))
            .collect();
        let sys = ConstrainedSystem::new(&tb.build(), &u_elim, &replaced, config.solver).map_err(diagnose)?;
        Ok(Systems::Coupled(sys))
    } else {
        let (xi0, rm0) = (nu, nu + ns);
        let n = rm0 + n_rm;
        let mut tb = TripletBuilder::new(n, n);
        add_mechanics(&mut tb, xi0, rm0);
        let mechanics = ConstrainedSystem::new(&tb.build(), &u_elim, &[], config.solver).map_err(diagnose)?;
        let nf = ns + n_mean;
        let mut tb = TripletBuilder::new(nf, nf);
        tb.add_block(0, 0, 1.0 / dt, &ops.mass);
        tb.add_block(0, 0, k.k2, &ops.flow);
        if n_mean == 1 {
            mean_rows(&mut tb, None, 0, ns);
        }
        let replaced: Vec<(usize, Vec<(usize, f64)>)> = p_dofs.iter().map(|&i| (i, vec![(i, 1.0)])).collect();
        let flow = ConstrainedSystem::new(&tb.build(), &[], &replaced, config.solver).map_err(diagnose)?;
        Ok(Systems::Decoupled { mechanics, flow })
    }
}

fn diagnose(e: Error) -> Error {
    match e {
        Error::SingularSystem(msg) => Error::SingularSystem(String::from("step system is singular: ") + &msg),
        other => other,
    }
}

/// Runs a problem from its initial data and returns the recorded trajectory.
pub fn run(problem: &BiotProblem, disc: &Discretization, config: SteppingConfig) -> Result<Vec<SystemState>> {
    Stepper::new(problem, disc, config)?.trajectory()
}
