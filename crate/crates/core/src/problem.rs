//! Problem data: parameters, sources, boundary assignments and initial data.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Result;
use crate::fem::{DofMap, SpaceKind};
use crate::field::{
    constant_scalar, zero_jacobian, zero_vector, BoundaryScalarFn, BoundaryVectorFn, JacobianFn, ScalarFn, VectorFn,
};
use crate::mesh::{BoundaryTag, Mesh};
use crate::params::PhysicalParams;

/// Absorption condition `(K grad p) . n = c_b (p_ext - p)` on `tag`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobinCondition {
    pub tag: BoundaryTag,
    pub conductance: f64,
    pub external_pressure: f64,
    /// Divide the conductance by the fluid viscosity, as the flux
    /// `(K / mu_f) grad p` does in the flow equation.
    pub includes_viscosity: bool,
}

/// Quasi-static Biot problem in the variables `(u, xi, eta)`.
///
/// Strong form: `-mu div eps(u) + grad xi = f`, `k3 xi + div u = k1 eta`,
/// `eta_t - (1/mu_f) div[K (grad p - rho_f g)] = phi`, with `p = k1 xi + k2 eta`.
#[derive(Clone)]
pub struct BiotProblem {
    pub params: PhysicalParams,
    pub body_force: VectorFn,
    pub source: ScalarFn,
    /// `(tag, component, value)`; `None` prescribes both components.
    pub displacement_dirichlet: Vec<(BoundaryTag, Option<usize>, ScalarFn)>,
    /// Traction `mu eps(u) n - xi n` on each tag.
    pub tractions: Vec<(BoundaryTag, BoundaryVectorFn)>,
    /// Traction `-p_h n` coupled to the discrete pressure.
    pub pressure_tractions: Vec<BoundaryTag>,
    pub pressure_dirichlet: Vec<(BoundaryTag, ScalarFn)>,
    /// Inward-normal flux data `(K / mu_f)(grad p - rho_f g) . n`.
    pub fluxes: Vec<(BoundaryTag, BoundaryScalarFn)>,
    pub robin: Vec<RobinCondition>,
    pub initial_displacement: VectorFn,
    pub initial_displacement_jacobian: JacobianFn,
    pub initial_pressure: ScalarFn,
    pub final_time: f64,
    /// Loads and boundary data do not depend on time, so they are assembled once.
    pub time_independent_data: bool,
}

impl fmt::Debug for BiotProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tags = |v: &[(BoundaryTag, Option<usize>, ScalarFn)]| -> Vec<(BoundaryTag, Option<usize>)> {
            v.iter().map(|(t, c, _)| (t.clone(), *c)).collect()
        };
        f.debug_struct("BiotProblem")
            .field("params", &self.params)
            .field("displacement_dirichlet", &tags(&self.displacement_dirichlet))
            .field("tractions", &self.tractions.iter().map(|(t, _)| t).collect::<Vec<_>>())
            .field("pressure_tractions", &self.pressure_tractions)
            .field("pressure_dirichlet", &self.pressure_dirichlet.iter().map(|(t, _)| t).collect::<Vec<_>>())
            .field("fluxes", &self.fluxes.iter().map(|(t, _)| t).collect::<Vec<_>>())
            .field("robin", &self.robin)
            .field("final_time", &self.final_time)
            .finish_non_exhaustive()
    }
}

impl BiotProblem {
    /// Homogeneous problem: no loads, zero initial data, no boundary data.
    pub fn new(params: PhysicalParams, final_time: f64) -> Self {
        BiotProblem {
            params,
            body_force: zero_vector(),
            source: constant_scalar(0.0),
            displacement_dirichlet: Vec::new(),
            tractions: Vec::new(),
            pressure_tractions: Vec::new(),
            pressure_dirichlet: Vec::new(),
            fluxes: Vec::new(),
            robin: Vec::new(),
            initial_displacement: zero_vector(),
            initial_displacement_jacobian: zero_jacobian(),
            initial_pressure: constant_scalar(0.0),
            final_time,
            time_independent_data: false,
        }
    }

    /// Scales every load, boundary value and initial datum by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        let f = self.body_force.clone();
        out.body_force = Arc::new(move |x, t| {
            let v = f(x, t);
            [s * v[0], s * v[1]]
        });
        let phi = self.source.clone();
        out.source = Arc::new(move |x, t| s * phi(x, t));
        out.displacement_dirichlet = self
            .displacement_dirichlet
            .iter()
            .map(|(tag, c, g)| {
                let g = g.clone();
                let h: ScalarFn = Arc::new(move |x, t| s * g(x, t));
                (tag.clone(), *c, h)
            })
            .collect();
        out.tractions = self
            .tractions
            .iter()
            .map(|(tag, g)| {
                let g = g.clone();
                let h: BoundaryVectorFn = Arc::new(move |x, n, t| {
                    let v = g(x, n, t);
                    [s * v[0], s * v[1]]
                });
                (tag.clone(), h)
            })
            .collect();
        out.pressure_dirichlet = self
            .pressure_dirichlet
            .iter()
            .map(|(tag, g)| {
                let g = g.clone();
                let h: ScalarFn = Arc::new(move |x, t| s * g(x, t));
                (tag.clone(), h)
            })
            .collect();
        out.fluxes = self
            .fluxes
            .iter()
            .map(|(tag, g)| {
                let g = g.clone();
                let h: BoundaryScalarFn = Arc::new(move |x, n, t| s * g(x, n, t));
                (tag.clone(), h)
            })
            .collect();
        for r in &mut out.robin {
            r.external_pressure *= s;
        }
        let u0 = self.initial_displacement.clone();
        out.initial_displacement = Arc::new(move |x, t| {
            let v = u0(x, t);
            [s * v[0], s * v[1]]
        });
        let j0 = self.initial_displacement_jacobian.clone();
        out.initial_displacement_jacobian = Arc::new(move |x, t| {
            let j = j0(x, t);
            [[s * j[0][0], s * j[0][1]], [s * j[1][0], s * j[1][1]]]
        });
        let p0 = self.initial_pressure.clone();
        out.initial_pressure = Arc::new(move |x, t| s * p0(x, t));
        out.params.rho_f *= s;
        out
    }
}

/// Mesh plus the displacement and pressure-like spaces with their Dirichlet masks.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    /// Vector P2 space for `u`.
    pub du: DofMap,
    /// Scalar P1 space shared by `xi`, `eta`, `p` and `q`; carries the pressure Dirichlet mask.
    pub ds: DofMap,
}

impl Discretization {
    pub fn new(mesh: Mesh, problem: &BiotProblem) -> Result<Self> {
        let mut du = DofMap::new(&mesh, SpaceKind::VectorP2);
        for (tag, comp, g) in &problem.displacement_dirichlet {
            du = du.mark_dirichlet(&mesh, tag.clone(), *comp, g.clone())?;
        }
        let mut ds = DofMap::new(&mesh, SpaceKind::ScalarP1);
        for (tag, g) in &problem.pressure_dirichlet {
            ds = ds.mark_dirichlet(&mesh, tag.clone(), None, g.clone())?;
        }
        Ok(Discretization { mesh, du, ds })
    }
}
