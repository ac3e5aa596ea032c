use super::GroupPoint;
use crate::error::{Error, Result};

/// Value, gradient, and symmetric Hessian of a smooth function at one point.
///
/// Coordinate order: x_1..x_n, y_1..y_n, tau (dimension d = 2n + 1).
/// This is the exact-evaluation channel for the operators: no truncation,
/// used as the oracle against the finite-difference path.
#[derive(Debug, Clone)]
pub struct FieldJet {
    n: usize,
    pub value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl FieldJet {
    pub fn new(n: usize, value: f64, grad: Vec<f64>, hess: Vec<f64>) -> Result<Self> {
        let d = 2 * n + 1;
        if grad.len() != d || hess.len() != d * d {
            return Err(Error::DimensionMismatch(grad.len(), d));
        }
        let mut jet = FieldJet { n, value, grad, hess };
        jet.symmetrize();
        Ok(jet)
    }

    pub fn zero(n: usize) -> Self {
        let d = 2 * n + 1;
        FieldJet { n, value: 0.0, grad: vec![0.0; d], hess: vec![0.0; d * d] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    #[inline]
    pub fn ix(&self, i: usize) -> usize {
        i
    }

    #[inline]
    pub fn iy(&self, i: usize) -> usize {
        self.n + i
    }

    #[inline]
    pub fn itau(&self) -> usize {
        2 * self.n
    }

    #[inline]
    pub fn grad_at(&self, a: usize) -> f64 {
        self.grad[a]
    }

    #[inline]
    pub fn hess_at(&self, a: usize, b: usize) -> f64 {
        self.hess[a * self.dim() + b]
    }

    pub fn set_grad(&mut self, a: usize, v: f64) {
        self.grad[a] = v;
    }

    /// Sets both (a,b) and (b,a).
    pub fn set_hess(&mut self, a: usize, b: usize, v: f64) {
        let d = self.dim();
        self.hess[a * d + b] = v;
        self.hess[b * d + a] = v;
    }

    fn symmetrize(&mut self) {
        let d = self.dim();
        for a in 0..d {
            for b in (a + 1)..d {
                let m = 0.5 * (self.hess[a * d + b] + self.hess[b * d + a]);
                self.hess[a * d + b] = m;
                self.hess[b * d + a] = m;
            }
        }
    }

    /// Jet of f(M . + c) at eta, given the jet of f at M eta + c.
    ///
    /// grad' = M^T grad, hess' = M^T hess M; exact because the map is affine.
    pub fn pullback_affine(&self, map: &AffineMap) -> FieldJet {
        let d = self.dim();
        assert_eq!(map.dim, d);
        let mut grad = vec![0.0; d];
        for a in 0..d {
            let mut acc = 0.0;
            for b in 0..d {
                acc += map.m[b * d + a] * self.grad[b];
            }
            grad[a] = acc;
        }
        let mut tmp = vec![0.0; d * d];
        for b in 0..d {
            for a in 0..d {
                let mut acc = 0.0;
                for c in 0..d {
                    acc += self.hess[b * d + c] * map.m[c * d + a];
                }
                tmp[b * d + a] = acc;
            }
        }
        let mut hess = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                let mut acc = 0.0;
                for c in 0..d {
                    acc += map.m[c * d + a] * tmp[c * d + b];
                }
                hess[a * d + b] = acc;
            }
        }
        FieldJet { n: self.n, value: self.value, grad, hess }
    }
}

/// Affine coordinate map eta -> M eta + c on R^{2n+1}.
#[derive(Debug, Clone)]
pub struct AffineMap {
    dim: usize,
    n: usize,
    m: Vec<f64>,
    c: Vec<f64>,
}

impl AffineMap {
    /// Left translation L_g(eta) = g o eta (affine in eta).
    pub fn left_translation(g: &GroupPoint) -> Self {
        let n = g.n();
        let d = 2 * n + 1;
        let mut m = vec![0.0; d * d];
        for a in 0..d {
            m[a * d + a] = 1.0;
        }
        let itau = 2 * n;
        // tau' = g_tau + tau + 2 (g_x . y - x . g_y)
        for i in 0..n {
            m[itau * d + i] = -2.0 * g.y[i];
            m[itau * d + n + i] = 2.0 * g.x[i];
        }
        let mut c = vec![0.0; d];
        for i in 0..n {
            c[i] = g.x[i];
            c[n + i] = g.y[i];
        }
        c[itau] = g.tau;
        AffineMap { dim: d, n, m, c }
    }

    /// Dilation delta_b as a linear map diag(b,...,b,b^2).
    pub fn dilation(n: usize, b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidParameter(format!("dilation factor must be > 0, got {b}")));
        }
        let d = 2 * n + 1;
        let mut m = vec![0.0; d * d];
        for i in 0..(2 * n) {
            m[i * d + i] = b;
        }
        m[(d - 1) * d + (d - 1)] = b * b;
        Ok(AffineMap { dim: d, n, m, c: vec![0.0; d] })
    }

    pub fn apply(&self, eta: &GroupPoint) -> GroupPoint {
        let n = self.n;
        let d = self.dim;
        let mut coords = vec![0.0; d];
        for i in 0..n {
            coords[i] = eta.x[i];
            coords[n + i] = eta.y[i];
        }
        coords[2 * n] = eta.tau;
        let mut out = self.c.clone();
        for a in 0..d {
            let mut acc = 0.0;
            for b in 0..d {
                acc += self.m[a * d + b] * coords[b];
            }
            out[a] += acc;
        }
        GroupPoint {
            x: out[..n].to_vec(),
            y: out[n..2 * n].to_vec(),
            tau: out[2 * n],
        }
    }
}

/// Exact sub-Laplacian applied to a jet at a point.
pub fn d_h_exact(jet: &FieldJet, at: &GroupPoint) -> f64 {
    debug_assert_eq!(jet.n(), at.n());
    let n = jet.n();
    let itau = jet.itau();
    let mut acc = 0.0;
    for i in 0..n {
        acc += jet.hess_at(jet.ix(i), jet.ix(i)) + jet.hess_at(jet.iy(i), jet.iy(i));
    }
    acc += 4.0 * at.horizontal_sq() * jet.hess_at(itau, itau);
    for i in 0..n {
        acc += 4.0 * (at.x[i] * jet.hess_at(jet.iy(i), itau) - at.y[i] * jet.hess_at(jet.ix(i), itau));
    }
    acc
}

/// Exact horizontal gradient (X_1..X_n, Y_1..Y_n) from a jet.
pub fn grad_h_exact(jet: &FieldJet, at: &GroupPoint) -> Vec<f64> {
    let n = jet.n();
    let itau = jet.itau();
    let gt = jet.grad_at(itau);
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        out.push(jet.grad_at(jet.ix(i)) - 2.0 * at.y[i] * gt);
    }
    for i in 0..n {
        out.push(jet.grad_at(jet.iy(i)) + 2.0 * at.x[i] * gt);
    }
    out
}

/// Euclidean length of the horizontal gradient.
pub fn grad_h_norm_exact(jet: &FieldJet, at: &GroupPoint) -> f64 {
    grad_h_exact(jet, at).iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_jet_laplacian() {
        // f = x^2 + y^2 at an arbitrary point: sub-Laplacian is 4 everywhere.
        let at = GroupPoint::p3(0.7, -1.3, 2.1);
        let mut jet = FieldJet::zero(1);
        jet.value = at.x[0] * at.x[0] + at.y[0] * at.y[0];
        jet.set_grad(0, 2.0 * at.x[0]);
        jet.set_grad(1, 2.0 * at.y[0]);
        jet.set_hess(0, 0, 2.0);
        jet.set_hess(1, 1, 2.0);
        assert_eq!(d_h_exact(&jet, &at), 4.0);
    }

    use super::super::group_op;

    #[test]
    fn left_translation_matches_group_op() {
        let g = GroupPoint::p3(0.5, -0.25, 1.0);
        let eta = GroupPoint::p3(1.0, 2.0, -0.5);
        let map = AffineMap::left_translation(&g);
        assert_eq!(map.apply(&eta), group_op(&g, &eta).unwrap());
    }

    #[test]
    fn dilation_map_matches_dilate() {
        let eta = GroupPoint::p3(1.0, -2.0, 0.5);
        let map = AffineMap::dilation(1, 3.0).unwrap();
        assert_eq!(map.apply(&eta), super::super::dilate(&eta, 3.0).unwrap());
    }
}
