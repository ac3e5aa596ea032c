//! Heisenberg group algebra and the associated differential operators.
//!
//! The group is R^{2n+1} with coordinates (x, y, tau) and the
//! non-commutative law
//!     (x,y,tau) o (x',y',tau') = (x+x', y+y', tau+tau' + 2(x.y' - x'.y)).
//! Left-invariant horizontal fields: X_i = d/dx_i - 2 y_i d/dtau,
//! Y_i = d/dy_i + 2 x_i d/dtau.  The sub-Laplacian in expanded form is
//!     L = Dx + Dy + 4(|x|^2+|y|^2) d2/dtau2
//!         + 4 sum_i (x_i d2/dy_i dtau - y_i d2/dx_i dtau),
//! which is what the finite-difference stencil discretizes.  The exact
//! channel applies the same operator to caller-supplied jets.

mod grid;
mod jet;
mod stencil;

pub use grid::{BoundaryPolicy, ScalarField, UniformGrid};
pub use jet::{d_h_exact, grad_h_exact, grad_h_norm_exact, AffineMap, FieldJet};
pub use stencil::{d_h_fd, grad_h_fd, stencil_intensity, sub_laplacian_into};

use crate::error::{Error, Result};

/// A point eta = (x, y, tau) of H^n.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tau: f64,
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, tau: f64) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::DimensionMismatch(x.len(), y.len()));
        }
        if !(x.iter().chain(y.iter()).all(|v| v.is_finite()) && tau.is_finite()) {
            return Err(Error::InvalidParameter("non-finite point component".into()));
        }
        Ok(GroupPoint { x, y, tau })
    }

    /// Convenience constructor for n = 1.
    pub fn p3(x: f64, y: f64, tau: f64) -> Self {
        GroupPoint { x: vec![x], y: vec![y], tau }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn identity(n: usize) -> Self {
        GroupPoint { x: vec![0.0; n], y: vec![0.0; n], tau: 0.0 }
    }

    /// |x|^2 + |y|^2.
    pub fn horizontal_sq(&self) -> f64 {
        let sx: f64 = self.x.iter().map(|v| v * v).sum();
        let sy: f64 = self.y.iter().map(|v| v * v).sum();
        sx + sy
    }
}

/// Group dimensions: n and the homogeneous dimension Q = 2n + 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupDims {
    n: usize,
    q: usize,
}

impl GroupDims {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        Ok(GroupDims { n, q: 2 * n + 2 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Homogeneous dimension Q = 2n + 2.
    pub fn homogeneous(&self) -> usize {
        self.q
    }
}

/// Group composition a o b.
pub fn group_op(a: &GroupPoint, b: &GroupPoint) -> Result<GroupPoint> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch(a.n(), b.n()));
    }
    let n = a.n();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut twist = 0.0;
    for i in 0..n {
        x.push(a.x[i] + b.x[i]);
        y.push(a.y[i] + b.y[i]);
        twist += a.x[i] * b.y[i] - b.x[i] * a.y[i];
    }
    Ok(GroupPoint { x, y, tau: a.tau + b.tau + 2.0 * twist })
}

/// Group inverse (-x, -y, -tau).
pub fn group_inverse(a: &GroupPoint) -> GroupPoint {
    GroupPoint {
        x: a.x.iter().map(|v| -v).collect(),
        y: a.y.iter().map(|v| -v).collect(),
        tau: -a.tau,
    }
}

/// Homogeneous norm ((|x|^2+|y|^2)^2 + tau^2)^{1/4}.
pub fn hnorm(a: &GroupPoint) -> f64 {
    let s = a.horizontal_sq();
    (s * s + a.tau * a.tau).powf(0.25)
}

/// Same norm evaluated from raw n = 1 coordinates (grid hot path).
#[inline]
pub fn hnorm3(x: f64, y: f64, tau: f64) -> f64 {
    let s = x * x + y * y;
    (s * s + tau * tau).powf(0.25)
}

/// Anisotropic dilation delta_b(eta) = (b x, b y, b^2 tau), b > 0.
pub fn dilate(a: &GroupPoint, b: f64) -> Result<GroupPoint> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("dilation factor must be > 0, got {b}")));
    }
    Ok(GroupPoint {
        x: a.x.iter().map(|v| b * v).collect(),
        y: a.y.iter().map(|v| b * v).collect(),
        tau: b * b * a.tau,
    })
}
