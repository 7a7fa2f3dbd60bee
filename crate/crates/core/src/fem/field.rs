use std::fmt;
use std::sync::Arc;

use crate::mesh::Point;

pub type PointFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type ElementFn = Arc<dyn Fn(usize, Point) -> [f64; 2] + Send + Sync>;

/// A vector field on the domain: forcing terms and tracking targets.
#[derive(Clone, Default)]
pub enum VectorData {
    #[default]
    Zero,
    /// Closed-form callback `x -> v(x)`.
    Analytic(PointFn),
    /// Element-wise callback `(triangle, x) -> v(x)`, for fields that are only
    /// piecewise smooth (for instance gradients of a finite element function).
    Piecewise(ElementFn),
    /// Coefficients in the P2 velocity space of the mesh.
    Discrete(Vec<f64>),
}

impl VectorData {
    pub fn analytic(f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self::Analytic(Arc::new(f))
    }

    pub fn piecewise(f: impl Fn(usize, Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self::Piecewise(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    /// Point evaluation for the callback variants; `None` for discrete data.
    pub fn eval(&self, t: usize, x: Point) -> Option<[f64; 2]> {
        match self {
            Self::Zero => Some([0.0, 0.0]),
            Self::Analytic(f) => Some(f(x)),
            Self::Piecewise(f) => Some(f(t, x)),
            Self::Discrete(_) => None,
        }
    }
}

impl fmt::Debug for VectorData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Analytic(_) => write!(f, "Analytic(..)"),
            Self::Piecewise(_) => write!(f, "Piecewise(..)"),
            Self::Discrete(c) => write!(f, "Discrete({} coefficients)", c.len()),
        }
    }
}
