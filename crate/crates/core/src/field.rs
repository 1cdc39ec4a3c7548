//! Shared closure types for space-time data.

use alloc::sync::Arc;

use crate::mesh::Point;

/// `(x, t) -> value`
pub type ScalarFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
/// `(x, t) -> [v_x, v_y]`
pub type VectorFn = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;
/// `(x, t) -> [[d/dx v_x, d/dy v_x], [d/dx v_y, d/dy v_y]]`
pub type JacobianFn = Arc<dyn Fn(Point, f64) -> [[f64; 2]; 2] + Send + Sync>;
/// `(x, t) -> [d/dx f, d/dy f]`
pub type GradientFn = VectorFn;
/// `(x, outward normal, t) -> value`, for boundary data depending on the normal.
pub type BoundaryScalarFn = Arc<dyn Fn(Point, [f64; 2], f64) -> f64 + Send + Sync>;
/// `(x, outward normal, t) -> traction`
pub type BoundaryVectorFn = Arc<dyn Fn(Point, [f64; 2], f64) -> [f64; 2] + Send + Sync>;

pub fn constant_scalar(c: f64) -> ScalarFn {
    Arc::new(move |_, _| c)
}

pub fn zero_vector() -> VectorFn {
    Arc::new(|_, _| [0.0, 0.0])
}

pub fn zero_jacobian() -> JacobianFn {
    Arc::new(|_, _| [[0.0; 2]; 2])
}
