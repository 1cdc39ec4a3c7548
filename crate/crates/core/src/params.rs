//! Material parameters and the change of variables `(p, q) <-> (xi, eta)`.
//!
//! With `q = div u`, the solver works with `eta = c0 p + alpha q` and
//! `xi = alpha p - lambda q`, which invert as `p = k1 xi + k2 eta` and
//! `q = k1 eta - k3 xi` for
//! `k1 = alpha / d`, `k2 = lambda / d`, `k3 = c0 / d`, `d = alpha^2 + lambda c0`.

use num_traits::Float;

use crate::error::{Error, Result};

/// Symmetric 2x2 permeability tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Permeability(pub [[f64; 2]; 2]);

impl Permeability {
    pub fn isotropic(k: f64) -> Self {
        Permeability([[k, 0.0], [0.0, k]])
    }

    pub fn scaled(self, s: f64) -> Self {
        let k = self.0;
        Permeability([[s * k[0][0], s * k[0][1]], [s * k[1][0], s * k[1][1]]])
    }

    pub fn apply(&self, g: [f64; 2]) -> [f64; 2] {
        let k = &self.0;
        [k[0][0] * g[0] + k[0][1] * g[1], k[1][0] * g[0] + k[1][1] * g[1]]
    }

    /// Eigenvalue bounds `(K1, K2)` of the tensor.
    pub fn bounds(&self) -> (f64, f64) {
        let k = &self.0;
        let m = 0.5 * (k[0][0] + k[1][1]);
        let d = (0.25 * (k[0][0] - k[1][1]).powi(2) + k[0][1] * k[0][1]).sqrt();
        (m - d, m + d)
    }

    pub fn validate(&self) -> Result<()> {
        let k = &self.0;
        let scale = k[0][0].abs().max(k[1][1].abs());
        if (k[0][1] - k[1][0]).abs() > 1e-12 * scale || !(self.bounds().0 > 0.0) {
            return Err(Error::PermeabilityNotPositiveDefinite);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lame {
    pub lambda: f64,
    pub mu: f64,
    /// Set when `lambda = 0` (nu = 0), which the solver does not accept.
    pub degenerate: bool,
}

/// `lambda = E nu / ((1 + nu)(1 - 2 nu))`, `mu = E / (2 (1 + nu))`.
pub fn lame_from_young_poisson(young: f64, poisson: f64) -> Result<Lame> {
    if !(young > 0.0) {
        return Err(Error::invalid("Young's modulus must be positive"));
    }
    if !(0.0..0.5).contains(&poisson) {
        return Err(Error::PoissonRatio(poisson));
    }
    let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    let mu = young / (2.0 * (1.0 + poisson));
    Ok(Lame {
        lambda,
        mu,
        degenerate: lambda <= 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappas {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

pub fn derive_kappas(alpha: f64, lambda: f64, c0: f64) -> Kappas {
    let d = alpha * alpha + lambda * c0;
    Kappas {
        k1: alpha / d,
        k2: lambda / d,
        k3: c0 / d,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub young: Option<f64>,
    pub poisson: Option<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub c0: f64,
    pub permeability: Permeability,
    pub mu_f: f64,
    pub rho_f: f64,
    pub gravity: [f64; 2],
}

impl PhysicalParams {
    /// Parameters with Lamé constants given directly.
    pub fn from_lame(lambda: f64, mu: f64, alpha: f64, c0: f64, permeability: Permeability, mu_f: f64) -> Result<Self> {
        let p = PhysicalParams {
            young: None,
            poisson: None,
            lambda,
            mu,
            alpha,
            c0,
            permeability,
            mu_f,
            rho_f: 0.0,
            gravity: [0.0, 0.0],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_young_poisson(
        young: f64,
        poisson: f64,
        alpha: f64,
        c0: f64,
        permeability: Permeability,
        mu_f: f64,
    ) -> Result<Self> {
        let lame = lame_from_young_poisson(young, poisson)?;
        let mut p = Self::from_lame(lame.lambda, lame.mu, alpha, c0, permeability, mu_f)?;
        p.young = Some(young);
        p.poisson = Some(poisson);
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !(self.mu > 0.0) {
            return Err(Error::invalid("Lamé constants must be positive"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("Biot-Willis constant must be positive"));
        }
        if !(self.c0 >= 0.0) {
            return Err(Error::invalid("storage coefficient must be non-negative"));
        }
        if !(self.mu_f > 0.0) {
            return Err(Error::invalid("fluid viscosity must be positive"));
        }
        self.permeability.validate()
    }

    pub fn kappas(&self) -> Kappas {
        derive_kappas(self.alpha, self.lambda, self.c0)
    }

    /// `(xi, eta)` from `(p, q)`.
    pub fn compose(&self, p: f64, q: f64) -> (f64, f64) {
        (self.alpha * p - self.lambda * q, self.c0 * p + self.alpha * q)
    }

    /// `(p, q)` from `(xi, eta)`.
    pub fn reconstruct(&self, xi: f64, eta: f64) -> (f64, f64) {
        let k = self.kappas();
        (k.k1 * xi + k.k2 * eta, k.k1 * eta - k.k3 * xi)
    }

    /// Constant gravity load vector `rho_f * g`.
    pub fn buoyancy(&self) -> [f64; 2] {
        [self.rho_f * self.gravity[0], self.rho_f * self.gravity[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lame_examples() {
        let l = lame_from_young_poisson(1e7, 0.4).unwrap();
        assert!((l.lambda - 1.0e7 / 0.7).abs() < 1e-6 * l.lambda);
        assert!((l.lambda / 1.428571e7 - 1.0).abs() < 1e-6);
        assert!((l.mu - 3.571429e6).abs() < 1.0);
        let l = lame_from_young_poisson(599.6, 0.499).unwrap();
        assert!((l.mu - 200.0).abs() < 0.1);
        let l = lame_from_young_poisson(100.0, 0.0).unwrap();
        assert_eq!(l.lambda, 0.0);
        assert!(l.degenerate);
        assert_eq!(lame_from_young_poisson(100.0, 0.5), Err(Error::PoissonRatio(0.5)));
    }

    #[test]
    fn edema_table_values() {
        // mu and 1/lambda as listed for the baseline and the sweeps
        let l = lame_from_young_poisson(9010.0, 0.35).unwrap();
        assert!((l.mu - 3337.0).abs() < 0.5);
        assert!((1.0 / l.lambda - 1.28e-4).abs() < 0.005e-4);
        let l = lame_from_young_poisson(0.2 * 9010.0, 0.35).unwrap();
        assert!((l.mu - 667.0).abs() < 0.5);
        assert!((1.0 / l.lambda - 6.42e-4).abs() < 0.005e-4);
        let l = lame_from_young_poisson(9010.0, 0.3).unwrap();
        assert!((l.mu - 3465.0).abs() < 0.5);
        let l = lame_from_young_poisson(9010.0, 0.496).unwrap();
        assert!((l.mu - 3011.0).abs() < 0.5);
        assert!((1.0 / l.lambda - 2.68e-6).abs() < 0.005e-6);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(derive_kappas(1.0, 1.0, 0.0), Kappas { k1: 1.0, k2: 1.0, k3: 0.0 });
        let k = derive_kappas(0.5, 1.428571e7, 0.5);
        assert!((k.k1 - 6.99999e-8).abs() < 1e-12);
        let k = derive_kappas(0.6, 1e6, 0.8);
        assert!((k.k2 - 1e6 / (0.36 + 8e5)).abs() < 1e-15);
    }

    #[test]
    fn permeability_checks() {
        assert!(Permeability::isotropic(1.0).validate().is_ok());
        assert!(Permeability([[1.0, 2.0], [2.0, 1.0]]).validate().is_err());
        assert!(Permeability([[1.0, 0.5], [0.0, 1.0]]).validate().is_err());
        assert!(Permeability::isotropic(-1.0).validate().is_err());
    }

    proptest! {
        #[test]
        fn kappa_round_trip(
            p in -1e4f64..1e4,
            q in -1.0f64..1.0,
            alpha in 0.01f64..2.0,
            lambda in 1.0f64..1e7,
            c0 in 0.0f64..1.0,
        ) {
            let params = PhysicalParams::from_lame(lambda, 1.0, alpha, c0, Permeability::isotropic(1.0), 1.0).unwrap();
            let (xi, eta) = params.compose(p, q);
            let (p2, q2) = params.reconstruct(xi, eta);
            // cancellation in xi = alpha p - lambda q bounds the attainable accuracy
            let scale_p = p.abs() + params.kappas().k2 * (params.c0 * p).abs() + params.kappas().k1 * (params.alpha * p).abs();
            let scale_q = q.abs() + params.kappas().k3 * (params.lambda * q).abs() + params.kappas().k1 * (params.alpha * q).abs();
            prop_assert!((p2 - p).abs() <= 1e-12 * scale_p.max(1e-300) + 1e-12 * (params.kappas().k1 * xi.abs() + params.kappas().k2 * eta.abs()));
            prop_assert!((q2 - q).abs() <= 1e-12 * scale_q.max(1e-300) + 1e-12 * (params.kappas().k1 * eta.abs() + params.kappas().k3 * xi.abs()));
        }
    }
}
