//! Symmetric quadrature on the reference triangle (area 1/2) and Gauss rules
//! on the unit interval for boundary edges.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub degree: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

// (a, a, 1-2a) orbits and (a, b, 1-a-b) orbits; weights normalised to sum 1
const D4: [(f64, f64); 2] = [
    (0.445948490915964886319, 0.223381589678011465945),
    (0.091576213509770743460, 0.109951743655321867637),
];
const D6_SYM: [(f64, f64); 2] = [
    (0.249286745170910421136, 0.116786275726379366030),
    (0.063089014491502228340, 0.050844906370206816921),
];
const D6_ASYM: (f64, f64, f64) = (
    0.053145049844816947353,
    0.310352451033784405416,
    0.082851075618373575194,
);

fn push_orbit3(points: &mut Vec<[f64; 2]>, weights: &mut Vec<f64>, a: f64, w: f64) {
    let b = 1.0 - 2.0 * a;
    for p in [[a, a], [b, a], [a, b]] {
        points.push(p);
        weights.push(0.5 * w);
    }
}

fn push_orbit6(points: &mut Vec<[f64; 2]>, weights: &mut Vec<f64>, a: f64, b: f64, w: f64) {
    let c = 1.0 - a - b;
    for p in [[a, b], [b, a], [b, c], [c, b], [c, a], [a, c]] {
        points.push(p);
        weights.push(0.5 * w);
    }
}

/// Positive-weight rule on the reference triangle exact up to `degree`.
pub fn quadrature(degree: usize) -> Result<QuadratureRule> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let degree_exact = match degree {
        0 | 1 => {
            points.push([1.0 / 3.0, 1.0 / 3.0]);
            weights.push(0.5);
            1
        }
        2 => {
            push_orbit3(&mut points, &mut weights, 1.0 / 6.0, 1.0 / 3.0);
            2
        }
        3 | 4 => {
            for (a, w) in D4 {
                push_orbit3(&mut points, &mut weights, a, w);
            }
            4
        }
        5 => {
            let s15 = num_traits::Float::sqrt(15.0f64);
            points.push([1.0 / 3.0, 1.0 / 3.0]);
            weights.push(9.0 / 80.0);
            push_orbit3(&mut points, &mut weights, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
            push_orbit3(&mut points, &mut weights, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
            5
        }
        6 => {
            for (a, w) in D6_SYM {
                push_orbit3(&mut points, &mut weights, a, w);
            }
            let (a, b, w) = D6_ASYM;
            push_orbit6(&mut points, &mut weights, a, b, w);
            6
        }
        d => return Err(Error::UnsupportedQuadrature(d)),
    };
    Ok(QuadratureRule {
        degree: degree_exact,
        points,
        weights,
    })
}

/// Three-point Gauss-Legendre rule on `[0, 1]` (exact to degree 5).
pub fn edge_gauss3() -> [(f64, f64); 3] {
    let d = 0.5 * num_traits::Float::sqrt(0.6f64);
    [(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Exact integral of x^a y^b over the reference triangle.
    fn monomial(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    fn integrate(rule: &QuadratureRule, a: i32, b: i32) -> f64 {
        rule.iter().map(|(p, w)| w * p[0].powi(a) * p[1].powi(b)).sum()
    }

    #[test]
    fn spec_examples() {
        let r = quadrature(4).unwrap();
        assert!((integrate(&r, 0, 0) - 0.5).abs() < 1e-15);
        assert!((integrate(&r, 2, 2) - 1.0 / 180.0).abs() < 1e-16);
        assert!((integrate(&r, 4, 0) - 1.0 / 30.0).abs() < 1e-16);
    }

    #[test]
    fn exact_to_stated_degree() {
        for d in 0..=6 {
            let r = quadrature(d).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.degree >= d);
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let exact = monomial(a, b);
                    let q = integrate(&r, a as i32, b as i32);
                    assert!((q - exact).abs() <= 1e-13 * exact, "degree {d}: x^{a} y^{b}");
                }
            }
        }
    }

    #[test]
    fn unsupported_degree() {
        assert_eq!(quadrature(7), Err(Error::UnsupportedQuadrature(7)));
    }

    #[test]
    fn edge_rule_degree_five() {
        for k in 0..=5 {
            let q: f64 = edge_gauss3().iter().map(|&(s, w)| w * s.powi(k)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
