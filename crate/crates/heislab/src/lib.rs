//! Numerical laboratory for reaction-diffusion equations driven by the
//! Heisenberg sub-Laplacian: the porous-medium form v_t = L(v^m) + v^sigma
//! and the degenerate form u_t = u^q L(u) + u^p, together with the
//! auxiliary machinery used to study their finite-time blow-up: exact and
//! finite-difference operators, exponential and cutoff test functions with
//! their scaling rates, a principal Dirichlet eigenpair on gauge balls,
//! ODE lifespan bounds, and the power transform linking the two equations.

pub mod analytic;
pub mod eigen;
pub mod error;
pub mod hgeom;
pub mod poly;
pub mod sampling;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
