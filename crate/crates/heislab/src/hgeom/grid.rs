use std::sync::Arc;

use super::hnorm3;
use crate::error::{Error, Result};

/// How nodes outside the computational domain are treated.
///
/// `DirichletZero` reads ghost zeros outside the box.  `BallMask` freezes
/// every node with homogeneous norm >= radius at zero and excludes it from
/// interior updates, realizing a Dirichlet problem on the gauge ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPolicy {
    DirichletZero,
    BallMask { radius: f64 },
}

/// Uniform tensor grid on the box [-lx,lx] x [-ly,ly] x [-ltau,ltau].
///
/// The grid discretizes H^1 (three axes); the exact-jet channel covers
/// general n.  Flat index layout is (i*ny + j)*ntau + k with tau fastest.
#[derive(Debug, Clone)]
pub struct UniformGrid {
    pub nx: usize,
    pub ny: usize,
    pub ntau: usize,
    pub lx: f64,
    pub ly: f64,
    pub ltau: f64,
    pub hx: f64,
    pub hy: f64,
    pub htau: f64,
    pub policy: BoundaryPolicy,
    xs: Vec<f64>,
    ys: Vec<f64>,
    taus: Vec<f64>,
    /// Present only under `BallMask`; true = frozen (outside the ball).
    mask: Option<Vec<bool>>,
}

impl UniformGrid {
    pub fn new(
        half_extents: (f64, f64, f64),
        counts: (usize, usize, usize),
        policy: BoundaryPolicy,
    ) -> Result<Arc<Self>> {
        let (lx, ly, ltau) = half_extents;
        let (nx, ny, ntau) = counts;
        if nx < 5 || ny < 5 || ntau < 5 {
            return Err(Error::GridTooSmall(nx, ny, ntau));
        }
        if !(lx > 0.0 && ly > 0.0 && ltau > 0.0) {
            return Err(Error::InvalidParameter("half extents must be positive".into()));
        }
        if let BoundaryPolicy::BallMask { radius } = policy {
            if !(radius > 0.0) {
                return Err(Error::InvalidParameter("ball radius must be positive".into()));
            }
        }
        let hx = 2.0 * lx / (nx - 1) as f64;
        let hy = 2.0 * ly / (ny - 1) as f64;
        let htau = 2.0 * ltau / (ntau - 1) as f64;
        let xs: Vec<f64> = (0..nx).map(|i| -lx + i as f64 * hx).collect();
        let ys: Vec<f64> = (0..ny).map(|j| -ly + j as f64 * hy).collect();
        let taus: Vec<f64> = (0..ntau).map(|k| -ltau + k as f64 * htau).collect();
        let mask = match policy {
            BoundaryPolicy::DirichletZero => None,
            BoundaryPolicy::BallMask { radius } => {
                let mut m = vec![false; nx * ny * ntau];
                let mut idx = 0;
                for &x in &xs {
                    for &y in &ys {
                        for &tau in &taus {
                            m[idx] = hnorm3(x, y, tau) >= radius;
                            idx += 1;
                        }
                    }
                }
                Some(m)
            }
        };
        Ok(Arc::new(UniformGrid { nx, ny, ntau, lx, ly, ltau, hx, hy, htau, policy, xs, ys, taus, mask }))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.ntau
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny + j) * self.ntau + k
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.xs[i]
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.ys[j]
    }

    #[inline]
    pub fn tau(&self, k: usize) -> f64 {
        self.taus[k]
    }

    pub fn cell_volume(&self) -> f64 {
        self.hx * self.hy * self.htau
    }

    /// True when the node is frozen by a ball mask.
    #[inline]
    pub fn is_masked(&self, idx: usize) -> bool {
        self.mask.as_ref().map_or(false, |m| m[idx])
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    /// Nodes whose full central stencil stays on-grid.
    pub fn is_stencil_interior(&self, i: usize, j: usize, k: usize) -> bool {
        i >= 1 && j >= 1 && k >= 1 && i + 1 < self.nx && j + 1 < self.ny && k + 1 < self.ntau
    }

    /// Geometric compatibility (same box and counts); policy may differ.
    pub fn same_nodes(&self, other: &UniformGrid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.ntau == other.ntau
            && (self.lx - other.lx).abs() <= 1e-12 * self.lx.abs().max(1.0)
            && (self.ly - other.ly).abs() <= 1e-12 * self.ly.abs().max(1.0)
            && (self.ltau - other.ltau).abs() <= 1e-12 * self.ltau.abs().max(1.0)
    }
}

/// A real function sampled on a `UniformGrid`.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<UniformGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    /// Zero field.
    pub fn zeros(grid: Arc<UniformGrid>) -> Self {
        let n = grid.len();
        ScalarField { grid, values: vec![0.0; n] }
    }

    /// Sample `f(x, y, tau)` at every node; masked nodes are forced to zero.
    pub fn sample(grid: Arc<UniformGrid>, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        let mut idx = 0;
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                for k in 0..grid.ntau {
                    if !grid.is_masked(idx) {
                        values[idx] = f(grid.x(i), grid.y(j), grid.tau(k));
                    }
                    idx += 1;
                }
            }
        }
        ScalarField { grid, values }
    }

    pub fn from_values(grid: Arc<UniformGrid>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "value array length {} vs grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteField);
        }
        if let Some(mask) = grid.mask() {
            for (v, &m) in values.iter_mut().zip(mask) {
                if m {
                    *v = 0.0;
                }
            }
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> &Arc<UniformGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Cell-volume-weighted sum.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Cell-volume-weighted integral of `w(node_value, x, y, tau)`.
    pub fn integrate(&self, w: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        let mut idx = 0;
        for i in 0..g.nx {
            for j in 0..g.ny {
                for k in 0..g.ntau {
                    acc += w(self.values[idx], g.x(i), g.y(j), g.tau(k));
                    idx += 1;
                }
            }
        }
        acc * g.cell_volume()
    }

    /// Pointwise product integral <self, other> * cell volume.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::GridMismatch("inner product on different grids".into()));
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Fraction of total mass within one stencil width of a box face.
    pub fn boundary_band_fraction(&self) -> f64 {
        let g = &self.grid;
        let total: f64 = self.values.iter().map(|v| v.abs()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut band = 0.0;
        let mut idx = 0;
        for i in 0..g.nx {
            for j in 0..g.ny {
                for k in 0..g.ntau {
                    if !g.is_stencil_interior(i, j, k) {
                        band += self.values[idx].abs();
                    }
                    idx += 1;
                }
            }
        }
        band / total
    }

    /// Trilinear interpolation at (x, y, tau); the point must be inside the box.
    pub fn interpolate(&self, x: f64, y: f64, tau: f64) -> Result<f64> {
        let g = &self.grid;
        let eps = 1e-12;
        if x < -g.lx - eps || x > g.lx + eps || y < -g.ly - eps || y > g.ly + eps
            || tau < -g.ltau - eps || tau > g.ltau + eps
        {
            return Err(Error::EscapesSourceBox);
        }
        let locate = |v: f64, lo: f64, h: f64, n: usize| -> (usize, f64) {
            let t = ((v - lo) / h).clamp(0.0, (n - 1) as f64);
            let i = (t.floor() as usize).min(n - 2);
            (i, t - i as f64)
        };
        let (i, fx) = locate(x, -g.lx, g.hx, g.nx);
        let (j, fy) = locate(y, -g.ly, g.hy, g.ny);
        let (k, ft) = locate(tau, -g.ltau, g.htau, g.ntau);
        let v = |di: usize, dj: usize, dk: usize| self.values[g.index(i + di, j + dj, k + dk)];
        let c00 = v(0, 0, 0) * (1.0 - ft) + v(0, 0, 1) * ft;
        let c01 = v(0, 1, 0) * (1.0 - ft) + v(0, 1, 1) * ft;
        let c10 = v(1, 0, 0) * (1.0 - ft) + v(1, 0, 1) * ft;
        let c11 = v(1, 1, 0) * (1.0 - ft) + v(1, 1, 1) * ft;
        let c0 = c00 * (1.0 - fy) + c01 * fy;
        let c1 = c10 * (1.0 - fy) + c11 * fy;
        Ok(c0 * (1.0 - fx) + c1 * fx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(UniformGrid::new((1.0, 1.0, 1.0), (4, 8, 8), BoundaryPolicy::DirichletZero).is_err());
        assert!(UniformGrid::new((0.0, 1.0, 1.0), (8, 8, 8), BoundaryPolicy::DirichletZero).is_err());
        assert!(UniformGrid::new((1.0, 1.0, 1.0), (8, 8, 8), BoundaryPolicy::BallMask { radius: 0.0 }).is_err());
    }

    #[test]
    fn spacings_match_extents() {
        let g = UniformGrid::new((2.0, 2.0, 4.0), (9, 9, 17), BoundaryPolicy::DirichletZero).unwrap();
        assert!((g.hx - 0.5).abs() < 1e-15);
        assert!((g.htau - 0.5).abs() < 1e-15);
        assert!((g.x(0) + 2.0).abs() < 1e-15);
        assert!((g.x(8) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn mask_zeroes_outside_ball() {
        let g = UniformGrid::new((1.5, 1.5, 1.5), (13, 13, 13), BoundaryPolicy::BallMask { radius: 1.0 }).unwrap();
        let f = ScalarField::sample(g.clone(), |_, _, _| 1.0);
        let mut idx = 0;
        for i in 0..g.nx {
            for j in 0..g.ny {
                for k in 0..g.ntau {
                    let r = hnorm3(g.x(i), g.y(j), g.tau(k));
                    if r >= 1.0 {
                        assert_eq!(f.values()[idx], 0.0);
                    } else {
                        assert_eq!(f.values()[idx], 1.0);
                    }
                    idx += 1;
                }
            }
        }
    }

    #[test]
    fn from_values_validates() {
        let g = UniformGrid::new((1.0, 1.0, 1.0), (5, 5, 5), BoundaryPolicy::DirichletZero).unwrap();
        assert!(ScalarField::from_values(g.clone(), vec![0.0; 10]).is_err());
        let mut vals = vec![0.0; g.len()];
        vals[3] = f64::NAN;
        assert!(ScalarField::from_values(g.clone(), vals).is_err());
    }

    #[test]
    fn interpolation_exact_on_nodes_and_trilinear() {
        let g = UniformGrid::new((1.0, 1.0, 1.0), (9, 9, 9), BoundaryPolicy::DirichletZero).unwrap();
        let f = ScalarField::sample(g.clone(), |x, y, t| 1.0 + 2.0 * x - y + 0.5 * t + x * y * t);
        assert!((f.interpolate(0.25, -0.5, 0.75).unwrap() - (1.0 + 0.5 + 0.5 + 0.375 + 0.25 * (-0.5) * 0.75)).abs() < 1e-13);
        assert!(f.interpolate(1.2, 0.0, 0.0).is_err());
    }
}
