//! Errors between finite element functions and closed-form fields, integrated
//! with the degree-8 rule.

use crate::fem::element::ElementGeometry;
use crate::fem::{FeSpace, QuadratureRule};
use crate::mesh::Point;

/// `L²` norm and full `H¹` norm of the error of a vector function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorError {
    pub l2: f64,
    pub h1: f64,
}

/// Error of a two-component function over the elements of `space`.
/// Without `grad`, the `H¹` entry equals the `L²` one.
pub fn vector_error(
    space: &FeSpace,
    coeffs: &[f64],
    value: impl Fn(Point) -> [f64; 2],
    grad: Option<&dyn Fn(Point) -> [[f64; 2]; 2]>,
) -> VectorError {
    assert_eq!(space.components(), 2);
    let rule = QuadratureRule::degree8();
    let (mut l2, mut semi) = (0.0, 0.0);
    for (k, &t) in space.elements().iter().enumerate() {
        let geo = ElementGeometry::new(space.mesh(), t);
        for (l, w) in rule.iter() {
            let x = geo.map(l);
            let jw = w * geo.jacobian;
            let v = value(x);
            let g = grad.map(|g| g(x));
            for c in 0..2 {
                let (vh, gh) = space.eval_component(coeffs, c, k, l, &geo);
                l2 += jw * (v[c] - vh).powi(2);
                if let Some(g) = g {
                    semi += jw * ((g[c][0] - gh[0]).powi(2) + (g[c][1] - gh[1]).powi(2));
                }
            }
        }
    }
    VectorError {
        l2: l2.sqrt(),
        h1: (l2 + semi).sqrt(),
    }
}

/// `L²` error of a scalar function.
pub fn scalar_error(space: &FeSpace, coeffs: &[f64], value: impl Fn(Point) -> f64) -> f64 {
    let rule = QuadratureRule::degree8();
    let mut s = 0.0;
    for (k, &t) in space.elements().iter().enumerate() {
        let geo = ElementGeometry::new(space.mesh(), t);
        for (l, w) in rule.iter() {
            let (vh, _) = space.eval_component(coeffs, 0, k, l, &geo);
            s += w * geo.jacobian * (value(geo.map(l)) - vh).powi(2);
        }
    }
    s.sqrt()
}
