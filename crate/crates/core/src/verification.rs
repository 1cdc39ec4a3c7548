//! Manufactured-solution problems, discrete error norms and convergence orders.
//!
//! Body forces and sources of the registered examples are derived from the
//! exact fields by applying the strong operators by hand. The closed forms as
//! printed with the original examples are kept alongside for comparison,
//! since several of them do not match their exact solutions.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::{BoundaryScalarFn, BoundaryVectorFn, GradientFn, JacobianFn, ScalarFn, VectorFn};
use crate::linsolve::LinearSolver;
use crate::mesh::{generate_rectangle_with, BoundaryTag, Diagonal, Mesh, Point};
use crate::norms::{scalar_error, vector_error, vertex_values};
use crate::params::{Permeability, PhysicalParams};
use crate::problem::{BiotProblem, Discretization};
use crate::stepper::{Stepper, SteppingConfig, SystemState};

/// Exact displacement and pressure with their spatial derivatives.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: VectorFn,
    pub u_jacobian: JacobianFn,
    pub p: ScalarFn,
    pub p_gradient: GradientFn,
}

/// Which boundary condition each side carries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryPlan {
    /// `(tag, component)`; `None` fixes both components.
    pub displacement: Vec<(BoundaryTag, Option<usize>)>,
    /// Full traction `mu eps(u) n - xi n` of the exact solution.
    pub traction: Vec<BoundaryTag>,
    pub pressure: Vec<BoundaryTag>,
    /// Flux `(K / mu_f) grad p . n` of the exact solution.
    pub flux: Vec<BoundaryTag>,
}

#[derive(Clone)]
pub struct ManufacturedProblem {
    pub name: &'static str,
    /// `[x_min, x_max, y_min, y_max]`
    pub domain: [f64; 4],
    /// Cell diagonal of the structured meshes (upper-left to lower-right unless changed).
    pub diagonal: Diagonal,
    pub exact: ExactSolution,
    pub plan: BoundaryPlan,
    /// Problem with regenerated sources and boundary data taken from `exact`.
    pub problem: BiotProblem,
    pub printed_body_force: Option<VectorFn>,
    pub printed_source: Option<ScalarFn>,
}

impl fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("plan", &self.plan)
            .field("problem", &self.problem)
            .finish_non_exhaustive()
    }
}

impl ManufacturedProblem {
    /// Builds the problem: `f` and `phi` are the loads, boundary and initial
    /// data come from the exact solution.
    pub fn new(
        name: &'static str,
        domain: [f64; 4],
        params: PhysicalParams,
        final_time: f64,
        exact: ExactSolution,
        body_force: VectorFn,
        source: ScalarFn,
        plan: BoundaryPlan,
    ) -> Self {
        let mut pb = BiotProblem::new(params.clone(), final_time);
        pb.body_force = body_force;
        pb.source = source;
        for (tag, comp) in &plan.displacement {
            let comps: Vec<usize> = match comp {
                Some(c) => vec![*c],
                None => vec![0, 1],
            };
            for c in comps {
                let u = exact.u.clone();
                let g: ScalarFn = Arc::new(move |x, t| u(x, t)[c]);
                pb.displacement_dirichlet.push((tag.clone(), Some(c), g));
            }
        }
        for tag in &plan.traction {
            let (jac, p, prm) = (exact.u_jacobian.clone(), exact.p.clone(), params.clone());
            let g: BoundaryVectorFn = Arc::new(move |x, n, t| {
                let j = jac(x, t);
                let xi = prm.alpha * p(x, t) - prm.lambda * (j[0][0] + j[1][1]);
                let e01 = 0.5 * (j[0][1] + j[1][0]);
                [
                    prm.mu * (j[0][0] * n[0] + e01 * n[1]) - xi * n[0],
                    prm.mu * (e01 * n[0] + j[1][1] * n[1]) - xi * n[1],
                ]
            });
            pb.tractions.push((tag.clone(), g));
        }
        for tag in &plan.pressure {
            pb.pressure_dirichlet.push((tag.clone(), exact.p.clone()));
        }
        for tag in &plan.flux {
            let (grad, prm) = (exact.p_gradient.clone(), params.clone());
            let g: BoundaryScalarFn = Arc::new(move |x, n, t| {
                let k = prm.permeability.apply(grad(x, t));
                (k[0] * n[0] + k[1] * n[1]) / prm.mu_f
            });
            pb.fluxes.push((tag.clone(), g));
        }
        let u = exact.u.clone();
        pb.initial_displacement = Arc::new(move |x, _| u(x, 0.0));
        let j = exact.u_jacobian.clone();
        pb.initial_displacement_jacobian = Arc::new(move |x, _| j(x, 0.0));
        let p = exact.p.clone();
        pb.initial_pressure = Arc::new(move |x, _| p(x, 0.0));
        ManufacturedProblem {
            name,
            domain,
            diagonal: Diagonal::Backward,
            exact,
            plan,
            problem: pb,
            printed_body_force: None,
            printed_source: None,
        }
    }

    /// Structured mesh with `n = 1 / h` cells along each side, whatever the
    /// side length.
    pub fn mesh(&self, h: f64) -> Result<Mesh> {
        let [x0, x1, y0, y1] = self.domain;
        let n = cells_per_side(h)?;
        generate_rectangle_with(x0, x1, y0, y1, n, n, self.diagonal)
    }

    pub fn discretize(&self, h: f64) -> Result<Discretization> {
        Discretization::new(self.mesh(h)?, &self.problem)
    }
}

/// `1 / h`, which must be a positive integer to within `1e-9`.
pub fn cells_per_side(h: f64) -> Result<usize> {
    let n = 1.0 / h;
    if !(h > 0.0) || !n.is_finite() || (n - n.round()).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::invalid(alloc::format!("1/h must be an integer, got h = {h}")));
    }
    Ok(n.round() as usize)
}

fn sides() -> [BoundaryTag; 4] {
    [BoundaryTag::Gamma1, BoundaryTag::Gamma2, BoundaryTag::Gamma3, BoundaryTag::Gamma4]
}

/// u1 fixed on Gamma1 and Gamma3, u2 on Gamma2 and Gamma4, traction
/// completing each side, pressure fixed everywhere.
fn split_plan() -> BoundaryPlan {
    BoundaryPlan {
        displacement: vec![
            (BoundaryTag::Gamma1, Some(0)),
            (BoundaryTag::Gamma3, Some(0)),
            (BoundaryTag::Gamma2, Some(1)),
            (BoundaryTag::Gamma4, Some(1)),
        ],
        traction: sides().to_vec(),
        pressure: sides().to_vec(),
        flux: Vec::new(),
    }
}

/// `u = t/2 (x^2, y^2)`, `p = sin(x + y) e^t` on the unit square, `T = 1`.
pub fn example1() -> ManufacturedProblem {
    let prm = PhysicalParams::from_lame(1e6, 200.0, 0.6, 0.8, Permeability::isotropic(1.0), 1.0)
        .expect("valid parameters");
    let mut prm = prm;
    prm.young = Some(599.6);
    prm.poisson = Some(0.499);
    let exact = ExactSolution {
        u: Arc::new(|x, t| [0.5 * t * x[0] * x[0], 0.5 * t * x[1] * x[1]]),
        u_jacobian: Arc::new(|x, t| [[t * x[0], 0.0], [0.0, t * x[1]]]),
        p: Arc::new(|x, t| (x[0] + x[1]).sin() * t.exp()),
        p_gradient: Arc::new(|x, t| {
            let g = (x[0] + x[1]).cos() * t.exp();
            [g, g]
        }),
    };
    let (lambda, mu, alpha, c0, k, mu_f) = (prm.lambda, prm.mu, prm.alpha, prm.c0, 1.0, prm.mu_f);
    let f: VectorFn = Arc::new(move |x, t| {
        let v = -t * (lambda + mu) + alpha * (x[0] + x[1]).cos() * t.exp();
        [v, v]
    });
    let phi: ScalarFn = Arc::new(move |x, t| {
        (c0 + 2.0 * k / mu_f) * (x[0] + x[1]).sin() * t.exp() + alpha * (x[0] + x[1])
    });
    let mut mp = ManufacturedProblem::new("example1", [0.0, 1.0, 0.0, 1.0], prm, 1.0, exact, f.clone(), phi.clone(), split_plan());
    mp.printed_body_force = Some(f);
    mp.printed_source = Some(phi);
    mp
}

/// `u = t^2 (-cos(pi x) cos(pi y), sin(pi x) sin(pi y))`, `p = t sin(pi x) cos(pi y)`.
pub fn example2() -> ManufacturedProblem {
    let mut prm = PhysicalParams::from_lame(1e5, 1e4, 0.05, 0.88, Permeability::isotropic(1.0), 1.0)
        .expect("valid parameters");
    prm.young = Some(2.91e4);
    prm.poisson = Some(0.454);
    let exact = ExactSolution {
        u: Arc::new(|x, t| {
            let (a, b) = (PI * x[0], PI * x[1]);
            [-t * t * a.cos() * b.cos(), t * t * a.sin() * b.sin()]
        }),
        u_jacobian: Arc::new(|x, t| {
            let (a, b) = (PI * x[0], PI * x[1]);
            let s = PI * t * t;
            [
                [s * a.sin() * b.cos(), s * a.cos() * b.sin()],
                [s * a.cos() * b.sin(), s * a.sin() * b.cos()],
            ]
        }),
        p: Arc::new(|x, t| t * (PI * x[0]).sin() * (PI * x[1]).cos()),
        p_gradient: Arc::new(|x, t| {
            let (a, b) = (PI * x[0], PI * x[1]);
            [PI * t * a.cos() * b.cos(), -PI * t * a.sin() * b.sin()]
        }),
    };
    let (lambda, mu, alpha, c0, k, mu_f) = (prm.lambda, prm.mu, prm.alpha, prm.c0, 1.0, prm.mu_f);
    let body = move |pi_t: f64| -> VectorFn {
        Arc::new(move |x, t| {
            let (a, b) = (PI * x[0], PI * x[1]);
            let amp = 2.0 * (lambda + mu) * PI * PI * t * t - alpha * pi_t * t;
            [-amp * a.cos() * b.cos(), amp * a.sin() * b.sin()]
        })
    };
    let f = body(PI);
    let phi: ScalarFn = Arc::new(move |x, t| {
        (c0 + 4.0 * alpha * PI * t + 2.0 * k * PI * PI * t / mu_f) * (PI * x[0]).sin() * (PI * x[1]).cos()
    });
    // printed: the divergence term of the source lacks its factor pi
    let printed_phi: ScalarFn = Arc::new(move |x, t| {
        (c0 + 4.0 * alpha * t + 2.0 * k * PI * PI * t / mu_f) * (PI * x[0]).sin() * (PI * x[1]).cos()
    });
    let mut mp = ManufacturedProblem::new("example2", [0.0, 1.0, 0.0, 1.0], prm, 1.0, exact, f, phi, split_plan());
    mp.printed_body_force = Some(body(PI));
    mp.printed_source = Some(printed_phi);
    mp
}

/// `u = t (sin(pi x) sin(pi y), x y (x-1)(y-1))`, `p = t cos(2 pi x) cos(2 pi y)`
/// on `(0, 1.5)^2`, `T = 0.5`.
pub fn example3() -> ManufacturedProblem {
    let prm = PhysicalParams::from_young_poisson(1e7, 0.4, 0.5, 0.5, Permeability::isotropic(1e-9), 1.0)
        .expect("valid parameters");
    let exact = ExactSolution {
        u: Arc::new(|x, t| {
            let (a, b) = (PI * x[0], PI * x[1]);
            [t * a.sin() * b.sin(), t * x[0] * x[1] * (x[0] - 1.0) * (x[1] - 1.0)]
        }),
        u_jacobian: Arc::new(|x, t| {
            let (a, b) = (PI * x[0], PI * x[1]);
            let (xx, yy) = (x[0] * (x[0] - 1.0), x[1] * (x[1] - 1.0));
            [
                [PI * t * a.cos() * b.sin(), PI * t * a.sin() * b.cos()],
                [t * (2.0 * x[0] - 1.0) * yy, t * xx * (2.0 * x[1] - 1.0)],
            ]
        }),
        p: Arc::new(|x, t| t * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos()),
        p_gradient: Arc::new(|x, t| {
            let (a, b) = (2.0 * PI * x[0], 2.0 * PI * x[1]);
            [-2.0 * PI * t * a.sin() * b.cos(), -2.0 * PI * t * a.cos() * b.sin()]
        }),
    };
    let (lambda, mu, alpha, c0, k, mu_f) = (prm.lambda, prm.mu, prm.alpha, prm.c0, 1e-9, prm.mu_f);
    let f: VectorFn = Arc::new(move |x, t| {
        let (a, b) = (PI * x[0], PI * x[1]);
        let (xx, yy) = (x[0] * (x[0] - 1.0), x[1] * (x[1] - 1.0));
        let gx = (2.0 * x[0] - 1.0) * (2.0 * x[1] - 1.0);
        [
            t * ((1.5 * mu + lambda) * PI * PI * a.sin() * b.sin()
                - (0.5 * mu + lambda) * gx
                - 2.0 * alpha * PI * (2.0 * a).sin() * (2.0 * b).cos()),
            t * (-(0.5 * mu + lambda) * PI * PI * a.cos() * b.cos()
                - mu * yy
                - 2.0 * (mu + lambda) * xx
                - 2.0 * alpha * PI * (2.0 * a).cos() * (2.0 * b).sin()),
        ]
    });
    let phi: ScalarFn = Arc::new(move |x, t| {
        let (a, b) = (PI * x[0], PI * x[1]);
        (c0 + 8.0 * k * PI * PI * t / mu_f) * (2.0 * a).cos() * (2.0 * b).cos()
            + alpha * PI * a.cos() * b.sin()
            + alpha * x[0] * (x[0] - 1.0) * (2.0 * x[1] - 1.0)
    });
    let printed_f: VectorFn = Arc::new(move |x, t| {
        let (a, b) = (PI * x[0], PI * x[1]);
        let (xx, yy) = (x[0] * (x[0] - 1.0), x[1] * (x[1] - 1.0));
        [
            (1.5 * mu - lambda) * PI * PI * t * a.sin() * b.sin()
                - 2.0 * alpha * PI * t * (2.0 * a).sin() * (2.0 * b).cos()
                - lambda * t * (2.0 * x[0] - 1.0) * (2.0 * x[1] - 1.0)
                - mu * t * yy,
            -(0.5 * mu + lambda) * PI * PI * t * a.cos() * b.cos()
                - 2.0 * alpha * PI * t * (2.0 * a).cos() * (2.0 * b).sin()
                - 2.0 * (mu + lambda) * t * xx
                - mu * t * yy,
        ]
    });
    let printed_phi: ScalarFn = Arc::new(move |x, t| {
        let (a, b) = (PI * x[0], PI * x[1]);
        (c0 + 8.0 * k * PI * PI * t / mu_f) * (2.0 * a).cos() * (2.0 * b).cos()
            + alpha * PI * a.cos() * b.cos()
            + alpha * x[0] * (x[0] - 1.0) * (2.0 * x[1] - 1.0)
    });
    let plan = BoundaryPlan {
        displacement: vec![(BoundaryTag::Gamma1, None), (BoundaryTag::Gamma2, None)],
        traction: vec![BoundaryTag::Gamma3, BoundaryTag::Gamma4],
        pressure: sides().to_vec(),
        flux: Vec::new(),
    };
    let mut mp = ManufacturedProblem::new("example3", [0.0, 1.5, 0.0, 1.5], prm, 0.5, exact, f, phi, plan);
    mp.printed_body_force = Some(printed_f);
    mp.printed_source = Some(printed_phi);
    mp
}

/// Solution inside the discrete spaces: `u = t/2 (x^2, y^2)` and
/// `p = 1 + x - 2y - (alpha/c0) t (x + y)`, so `eta = c0 (1 + x - 2y)` is
/// constant in time and every step is reproduced exactly.
pub fn exactness_problem() -> ManufacturedProblem {
    let perm = Permeability([[1.0, 0.2], [0.2, 0.5]]);
    let prm = PhysicalParams::from_lame(10.0, 3.0, 0.8, 0.5, perm, 2.0).expect("valid parameters");
    let (lambda, mu, alpha, c0) = (prm.lambda, prm.mu, prm.alpha, prm.c0);
    let r = alpha / c0;
    let exact = ExactSolution {
        u: Arc::new(|x, t| [0.5 * t * x[0] * x[0], 0.5 * t * x[1] * x[1]]),
        u_jacobian: Arc::new(|x, t| [[t * x[0], 0.0], [0.0, t * x[1]]]),
        p: Arc::new(move |x, t| 1.0 + x[0] - 2.0 * x[1] - r * t * (x[0] + x[1])),
        p_gradient: Arc::new(move |_, t| [1.0 - r * t, -2.0 - r * t]),
    };
    let f: VectorFn = Arc::new(move |_, t| {
        let s = -t * (mu + lambda + alpha * r);
        [s + alpha, s - 2.0 * alpha]
    });
    let phi: ScalarFn = Arc::new(|_, _| 0.0);
    let plan = BoundaryPlan {
        displacement: vec![(BoundaryTag::Gamma1, None), (BoundaryTag::Gamma4, None)],
        traction: vec![BoundaryTag::Gamma2, BoundaryTag::Gamma3],
        pressure: vec![BoundaryTag::Gamma1, BoundaryTag::Gamma2],
        flux: vec![BoundaryTag::Gamma3, BoundaryTag::Gamma4],
    };
    ManufacturedProblem::new("exactness", [0.0, 1.0, 0.0, 1.0], prm, 1.0, exact, f, phi, plan)
}

pub fn by_name(name: &str) -> Option<ManufacturedProblem> {
    match name {
        "example1" => Some(example1()),
        "example2" => Some(example2()),
        "example3" => Some(example3()),
        "exactness" => Some(exactness_problem()),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// strong residual by finite differences

const FD_STEP: f64 = 1e-3;

fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

fn partial(f: &dyn Fn(Point) -> f64, x: Point, i: usize) -> f64 {
    d1(
        |s| {
            let mut y = x;
            y[i] = s;
            f(y)
        },
        x[i],
        FD_STEP,
    )
}

fn second_partial(f: &dyn Fn(Point) -> f64, x: Point, i: usize, j: usize) -> f64 {
    if i == j {
        d2(
            |s| {
                let mut y = x;
                y[i] = s;
                f(y)
            },
            x[i],
            FD_STEP,
        )
    } else {
        partial(&|y| partial(f, y, j), x, i)
    }
}

/// Residuals of the momentum and flow equations at one space-time point,
/// each relative to the largest term of its equation (absolute once every
/// term is below one, where the fields vanish).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongResidual {
    pub momentum: f64,
    pub flow: f64,
}

/// Substitutes the exact `u` and `p` into `-mu div eps(u) + grad xi = f` and
/// `eta_t - (1/mu_f) div(K grad p) = phi`, with every derivative taken by
/// fourth-order finite differences of the exact fields alone.
pub fn strong_residual(mp: &ManufacturedProblem, f: &VectorFn, phi: &ScalarFn, x: Point, t: f64) -> StrongResidual {
    let prm = &mp.problem.params;
    let (u, p) = (mp.exact.u.clone(), mp.exact.p.clone());
    let uc = |c: usize, t: f64| {
        let u = u.clone();
        move |y: Point| u(y, t)[c]
    };
    let div = |y: Point, t: f64| partial(&uc(0, t), y, 0) + partial(&uc(1, t), y, 1);
    let xi = |y: Point| prm.alpha * p(y, t) - prm.lambda * div(y, t);
    let mut mom = [0.0; 2];
    let mut scale = 0.0f64;
    let fx = f(x, t);
    for i in 0..2 {
        // (div eps)_i = 1/2 (lap u_i + d_i div u)
        let ui = uc(i, t);
        let lap = second_partial(&ui, x, 0, 0) + second_partial(&ui, x, 1, 1);
        let mut grad_div = 0.0;
        for j in 0..2 {
            grad_div += second_partial(&uc(j, t), x, i, j);
        }
        let elastic = -prm.mu * 0.5 * (lap + grad_div);
        let gxi = partial(&xi, x, i);
        mom[i] = elastic + gxi - fx[i];
        let gp = prm.alpha * partial(&|y| p(y, t), x, i);
        scale = scale.max(elastic.abs()).max(gxi.abs()).max(gp.abs()).max(fx[i].abs());
    }
    let p_t = prm.c0 * d1(|s| p(x, s), t, FD_STEP);
    let q_t = prm.alpha * d1(|s| div(x, s), t, FD_STEP);
    let eta_t = p_t + q_t;
    let k = prm.permeability.0;
    let ps = |y: Point| p(y, t);
    let mut diffusion = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            diffusion += k[i][j] * second_partial(&ps, x, i, j);
        }
    }
    diffusion /= prm.mu_f;
    let src = phi(x, t);
    let flow = eta_t - diffusion - src;
    let fscale = p_t.abs().max(q_t.abs()).max(diffusion.abs()).max(src.abs());
    StrongResidual {
        momentum: mom[0].abs().max(mom[1].abs()) / scale.max(1.0),
        flow: flow.abs() / fscale.max(1.0),
    }
}

/// Largest relative difference between the printed and the regenerated
/// `(f, phi)` over `points`, each measured against the largest value of the
/// regenerated field.
pub fn printed_source_discrepancy(mp: &ManufacturedProblem, points: &[(Point, f64)]) -> (Option<f64>, Option<f64>) {
    let rel = |diffs: Vec<(f64, f64)>| {
        let scale = diffs.iter().fold(0.0f64, |m, d| m.max(d.1.abs()));
        diffs.iter().fold(0.0f64, |m, d| m.max((d.0 - d.1).abs())) / scale.max(f64::MIN_POSITIVE)
    };
    let f = mp.printed_body_force.as_ref().map(|pf| {
        let mut d = Vec::new();
        for &(x, t) in points {
            let (a, b) = (pf(x, t), (mp.problem.body_force)(x, t));
            d.push((a[0], b[0]));
            d.push((a[1], b[1]));
        }
        rel(d)
    });
    let phi = mp.printed_source.as_ref().map(|ps| {
        rel(points.iter().map(|&(x, t)| (ps(x, t), (mp.problem.source)(x, t))).collect())
    });
    (f, phi)
}

// ---------------------------------------------------------------------------
// errors and orders

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub h: f64,
    pub dt: f64,
    pub theta: u8,
    pub u_l2: f64,
    pub u_h1: f64,
    pub p_l2: f64,
    pub p_h1: f64,
    /// Wall time of the run.
    pub seconds: f64,
}

/// Errors of `state` against the exact solution at `state.t`.
pub fn error_norms(
    state: &SystemState,
    mp: &ManufacturedProblem,
    disc: &Discretization,
    h: f64,
    config: &SteppingConfig,
) -> Result<ErrorReport> {
    let t = state.t;
    let ex = &mp.exact;
    let u = vector_error(&disc.mesh, &disc.du, &state.u, |x| (ex.u)(x, t), |x| (ex.u_jacobian)(x, t))?;
    let p = scalar_error(&disc.mesh, &disc.ds, &state.p, |x| (ex.p)(x, t), |x| (ex.p_gradient)(x, t))?;
    Ok(ErrorReport {
        h,
        dt: config.dt,
        theta: config.theta,
        u_l2: u.l2,
        u_h1: u.h1_semi,
        p_l2: p.l2,
        p_h1: p.h1_semi,
        seconds: 0.0,
    })
}

/// `order_i = log(R(h_i) / R(h_{i+1})) / log 2` for each adjacent pair; the
/// mesh sizes must halve to within `1e-9` relative.
pub fn convergence_order(errors: &[(f64, f64)]) -> Result<Vec<f64>> {
    errors
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let ratio = w[0].0 / w[1].0;
            if !((ratio - 2.0).abs() <= 2e-9) {
                return Err(Error::NonHalvingSequence { index: i, ratio });
            }
            Ok((w[0].1 / w[1].1).ln() / 2.0f64.ln())
        })
        .collect()
}

/// How the time step follows from the mesh size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStepRule {
    /// `dt = h^2`
    HSquared,
    /// `dt = T / n`
    Fraction(usize),
    Fixed(f64),
}

impl TimeStepRule {
    pub fn dt(&self, h: f64, final_time: f64) -> f64 {
        match *self {
            TimeStepRule::HSquared => h * h,
            TimeStepRule::Fraction(n) => final_time / n as f64,
            TimeStepRule::Fixed(dt) => dt,
        }
    }
}

/// Wall clock in seconds; the core has no access to one.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// Settings shared by every level of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudySettings {
    pub theta: u8,
    pub rule: TimeStepRule,
    pub solver: LinearSolver,
}

impl StudySettings {
    pub fn config(&self, h: f64, final_time: f64) -> SteppingConfig {
        let mut c = SteppingConfig::new(self.theta, self.rule.dt(h, final_time), final_time);
        c.solver = self.solver;
        c
    }
}

/// Solves `mp` on the mesh of size `h` and returns the terminal state.
pub fn solve_terminal(mp: &ManufacturedProblem, disc: &Discretization, config: SteppingConfig) -> Result<SystemState> {
    let stepper = Stepper::new(&mp.problem, disc, config)?;
    stepper.run_from(stepper.initialize()?, |_, _| {})
}

/// One level of a convergence study.
pub fn run_level(mp: &ManufacturedProblem, h: f64, settings: &StudySettings, clock: &dyn Clock) -> Result<ErrorReport> {
    let start = clock.now();
    let disc = mp.discretize(h)?;
    let config = settings.config(h, mp.problem.final_time);
    let state = solve_terminal(mp, &disc, config.clone())?;
    let mut report = error_norms(&state, mp, &disc, h, &config)?;
    report.seconds = clock.now() - start;
    Ok(report)
}

/// Error reports per level with the orders of each norm; `orders[i]`
/// compares `rows[i]` with `rows[i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorReport>,
    /// `[uL2, uH1, pL2, pH1]`
    pub orders: Vec<[f64; 4]>,
}

impl ConvergenceTable {
    pub fn from_reports(rows: Vec<ErrorReport>) -> Result<Self> {
        let col = |f: fn(&ErrorReport) -> f64| convergence_order(&rows.iter().map(|r| (r.h, f(r))).collect::<Vec<_>>());
        let cols = [
            col(|r| r.u_l2)?,
            col(|r| r.u_h1)?,
            col(|r| r.p_l2)?,
            col(|r| r.p_h1)?,
        ];
        let orders = (0..rows.len().saturating_sub(1))
            .map(|i| [cols[0][i], cols[1][i], cols[2][i], cols[3][i]])
            .collect();
        Ok(ConvergenceTable { rows, orders })
    }

    /// Orders of the finest pair.
    pub fn finest_orders(&self) -> Option<[f64; 4]> {
        self.orders.last().copied()
    }
}

/// `h_max, h_max / 2, ...` with `levels` entries.
pub fn halving_sequence(h_max: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|i| h_max / (1u64 << i) as f64).collect()
}

/// Runs every level in turn.
pub fn convergence_study(
    mp: &ManufacturedProblem,
    hs: &[f64],
    settings: &StudySettings,
    clock: &dyn Clock,
) -> Result<ConvergenceTable> {
    convergence_order(&hs.iter().map(|&h| (h, 1.0)).collect::<Vec<_>>())?;
    let rows = hs
        .iter()
        .map(|&h| run_level(mp, h, settings, clock))
        .collect::<Result<Vec<_>>>()?;
    ConvergenceTable::from_reports(rows)
}

/// `||u(theta=0) - u(theta=1)||_L2` at the final time for mesh size `h`
/// and time step `dt`.
pub fn theta_gap(mp: &ManufacturedProblem, h: f64, dt: f64, solver: LinearSolver) -> Result<f64> {
    let disc = mp.discretize(h)?;
    let mut terminal = [Vec::new(), Vec::new()];
    for theta in [0u8, 1] {
        let mut c = SteppingConfig::new(theta, dt, mp.problem.final_time);
        c.solver = solver;
        terminal[theta as usize] = solve_terminal(mp, &disc, c)?.u;
    }
    let diff: Vec<f64> = terminal[0].iter().zip(&terminal[1]).map(|(a, b)| a - b).collect();
    Ok(vector_error(&disc.mesh, &disc.du, &diff, |_| [0.0; 2], |_| [[0.0; 2]; 2])?.l2)
}

// ---------------------------------------------------------------------------
// mesh deformation

/// Mesh with the displacement added to its vertices.
#[derive(Debug, Clone)]
pub struct DeformedMesh {
    pub t: f64,
    pub mesh: Mesh,
    /// Vertex with the largest displacement magnitude.
    pub max_vertex: usize,
    pub max_displacement: f64,
}

/// Deformed configurations at `times`, each taken from the trajectory state
/// with that time.
pub fn mesh_deformation_snapshots(
    trajectory: &[SystemState],
    disc: &Discretization,
    times: &[f64],
) -> Result<Vec<DeformedMesh>> {
    times
        .iter()
        .map(|&t| {
            let state = trajectory
                .iter()
                .find(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1.0))
                .ok_or(Error::MissingTime(t))?;
            Ok(deform(&disc.mesh, &disc.du, state))
        })
        .collect()
}

fn deform(mesh: &Mesh, du: &crate::fem::DofMap, state: &SystemState) -> DeformedMesh {
    let disp = vertex_values(mesh, du, &state.u);
    let (mut max_vertex, mut max_displacement) = (0, -1.0);
    for (i, d) in disp.iter().enumerate() {
        let m = d[0].hypot(d[1]);
        if m > max_displacement {
            max_vertex = i;
            max_displacement = m;
        }
    }
    let verts = mesh
        .vertices()
        .iter()
        .zip(&disp)
        .map(|(x, d)| [x[0] + d[0], x[1] + d[1]])
        .collect();
    DeformedMesh {
        t: state.t,
        mesh: mesh.with_vertices(verts),
        max_vertex,
        max_displacement: max_displacement.max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_of_power_law() {
        let e: Vec<(f64, f64)> = halving_sequence(0.5, 5).iter().map(|&h| (h, 3.0 * h * h)).collect();
        for o in convergence_order(&e).unwrap() {
            assert!((o - 2.0).abs() < 1e-12);
        }
        let o = convergence_order(&[(0.5, 0.04), (0.25, 0.01)]).unwrap();
        assert!((o[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_halving_rejected() {
        let err = convergence_order(&[(0.5, 1.0), (0.25, 0.2), (0.1, 0.01)]).unwrap_err();
        assert!(matches!(err, Error::NonHalvingSequence { index: 1, .. }));
    }

    #[test]
    fn paper_order_example3() {
        // u-L2 errors at h = 1/16 and 1/32
        let o = convergence_order(&[(1.0 / 16.0, 1.9496e-4), (1.0 / 32.0, 2.0572e-5)]).unwrap();
        assert!((o[0] - 3.24).abs() < 5e-3, "{}", o[0]);
    }

    #[test]
    fn example_initial_values() {
        let e1 = example1();
        assert_eq!((e1.exact.p)([0.0, 0.0], 0.0), 0.0);
        let e2 = example2();
        for x in [[0.1, 0.7], [0.5, 0.5], [0.9, 0.2]] {
            assert_eq!((e2.exact.u)(x, 0.0), [0.0, 0.0]);
        }
    }

    #[test]
    fn mesh_has_one_over_h_cells_per_side() {
        let e3 = example3();
        let m = e3.mesh(1.0 / 16.0).unwrap();
        assert_eq!(m.num_triangles(), 2 * 16 * 16);
        assert!((m.area() - 2.25).abs() < 1e-12);
        assert!(e3.mesh(0.4).is_err());
    }

    #[test]
    fn time_step_rules() {
        assert_eq!(TimeStepRule::HSquared.dt(0.25, 1.0), 0.0625);
        assert_eq!(TimeStepRule::Fraction(5).dt(0.1, 0.5), 0.1);
    }
}
