//! Multivariate polynomials on R^{2n+1}, used as the symbolic oracle
//! channel: exact jets, exact products, and a symbolic sub-Laplacian that
//! is assembled from polynomial calculus rather than from the jet path.

use std::collections::BTreeMap;

use crate::hgeom::{FieldJet, GroupPoint};

/// Polynomial in the variables x_1..x_n, y_1..y_n, tau (that order).
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Poly::zero(n);
        if c != 0.0 {
            p.terms.insert(vec![0; 2 * n + 1], c);
        }
        p
    }

    /// The coordinate monomial with the given index (0..2n for x/y, 2n for tau).
    pub fn coordinate(n: usize, var: usize) -> Self {
        assert!(var < 2 * n + 1);
        let mut exps = vec![0u32; 2 * n + 1];
        exps[var] = 1;
        let mut p = Poly::zero(n);
        p.terms.insert(exps, 1.0);
        p
    }

    pub fn from_terms(n: usize, terms: &[(Vec<u32>, f64)]) -> Self {
        let mut p = Poly::zero(n);
        for (exps, c) in terms {
            assert_eq!(exps.len(), 2 * n + 1);
            p.add_term(exps.clone(), *c);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            let key: Vec<u32> = self
                .terms
                .iter()
                .find(|(_, v)| **v == 0.0)
                .map(|(k, _)| k.clone())
                .unwrap();
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (exps, c) in &other.terms {
            out.add_term(exps.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        if s == 0.0 {
            return Poly::zero(self.n);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= s;
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.n, other.n);
        let mut out = Poly::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn partial(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.n);
        for (exps, c) in &self.terms {
            let e = exps[var];
            if e == 0 {
                continue;
            }
            let mut d = exps.clone();
            d[var] = e - 1;
            out.add_term(d, *c * e as f64);
        }
        out
    }

    pub fn eval(&self, coords: &[f64]) -> f64 {
        debug_assert_eq!(coords.len(), 2 * self.n + 1);
        let mut acc = 0.0;
        for (exps, c) in &self.terms {
            let mut term = *c;
            for (e, v) in exps.iter().zip(coords) {
                for _ in 0..*e {
                    term *= v;
                }
            }
            acc += term;
        }
        acc
    }

    pub fn eval_at(&self, p: &GroupPoint) -> f64 {
        self.eval(&point_coords(p))
    }

    /// Exact jet (value, gradient, Hessian) at a point.
    pub fn jet(&self, p: &GroupPoint) -> FieldJet {
        let d = 2 * self.n + 1;
        let coords = point_coords(p);
        let mut jet = FieldJet::zero(self.n);
        jet.value = self.eval(&coords);
        let partials: Vec<Poly> = (0..d).map(|a| self.partial(a)).collect();
        for a in 0..d {
            jet.set_grad(a, partials[a].eval(&coords));
            for b in a..d {
                jet.set_hess(a, b, partials[a].partial(b).eval(&coords));
            }
        }
        jet
    }

    /// Symbolic sub-Laplacian assembled from polynomial calculus.
    pub fn sub_laplacian(&self) -> Poly {
        let n = self.n;
        let itau = 2 * n;
        let mut out = Poly::zero(n);
        for i in 0..n {
            out = out.add(&self.partial(i).partial(i));
            out = out.add(&self.partial(n + i).partial(n + i));
        }
        let mut hsq = Poly::zero(n);
        for i in 0..n {
            let xi = Poly::coordinate(n, i);
            let yi = Poly::coordinate(n, n + i);
            hsq = hsq.add(&xi.mul(&xi)).add(&yi.mul(&yi));
        }
        let dtt = self.partial(itau).partial(itau);
        out = out.add(&hsq.mul(&dtt).scale(4.0));
        for i in 0..n {
            let xi = Poly::coordinate(n, i);
            let yi = Poly::coordinate(n, n + i);
            let dyit = self.partial(n + i).partial(itau);
            let dxit = self.partial(i).partial(itau);
            out = out.add(&xi.mul(&dyit).scale(4.0));
            out = out.add(&yi.mul(&dxit).scale(-4.0));
        }
        out
    }

    /// Symbolic horizontal gradient for n = 1: (X f, Y f).
    pub fn grad_h(&self) -> (Poly, Poly) {
        assert_eq!(self.n, 1);
        let x = Poly::coordinate(1, 0);
        let y = Poly::coordinate(1, 1);
        let dt = self.partial(2);
        let gx = self.partial(0).add(&y.mul(&dt).scale(-2.0));
        let gy = self.partial(1).add(&x.mul(&dt).scale(2.0));
        (gx, gy)
    }

    /// Symbolic horizontal gradient components (X_1..X_n, Y_1..Y_n).
    pub fn grad_h_components(&self) -> Vec<Poly> {
        let n = self.n;
        let itau = 2 * n;
        let dt = self.partial(itau);
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            let yi = Poly::coordinate(n, n + i);
            out.push(self.partial(i).add(&yi.mul(&dt).scale(-2.0)));
        }
        for i in 0..n {
            let xi = Poly::coordinate(n, i);
            out.push(self.partial(n + i).add(&xi.mul(&dt).scale(2.0)));
        }
        out
    }
}

pub fn point_coords(p: &GroupPoint) -> Vec<f64> {
    let n = p.n();
    let mut coords = Vec::with_capacity(2 * n + 1);
    coords.extend_from_slice(&p.x);
    coords.extend_from_slice(&p.y);
    coords.push(p.tau);
    coords
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauge_fourth(n: usize) -> Poly {
        // (|x|^2 + |y|^2)^2 + tau^2
        let mut hsq = Poly::zero(n);
        for i in 0..n {
            let xi = Poly::coordinate(n, i);
            let yi = Poly::coordinate(n, n + i);
            hsq = hsq.add(&xi.mul(&xi)).add(&yi.mul(&yi));
        }
        let tau = Poly::coordinate(n, 2 * n);
        hsq.mul(&hsq).add(&tau.mul(&tau))
    }

    #[test]
    fn calculus_basics() {
        let x = Poly::coordinate(1, 0);
        let y = Poly::coordinate(1, 1);
        let p = x.mul(&x).add(&y.scale(3.0));
        assert_eq!(p.eval(&[2.0, 1.0, 0.0]), 7.0);
        assert_eq!(p.partial(0).eval(&[2.0, 1.0, 0.0]), 4.0);
        assert_eq!(p.partial(1).eval(&[2.0, 1.0, 0.0]), 3.0);
    }

    #[test]
    fn sub_laplacian_of_gauge_fourth_power() {
        // Delta_H ((|x|^2+|y|^2)^2 + tau^2) = (8n+16)(|x|^2+|y|^2).
        for n in 1..=2 {
            let p = gauge_fourth(n);
            let lap = p.sub_laplacian();
            let mut hsq = Poly::zero(n);
            for i in 0..n {
                let xi = Poly::coordinate(n, i);
                let yi = Poly::coordinate(n, n + i);
                hsq = hsq.add(&xi.mul(&xi)).add(&yi.mul(&yi));
            }
            let expect = hsq.scale((8 * n + 16) as f64);
            assert_eq!(lap, expect);
        }
    }

    #[test]
    fn sub_laplacian_of_xyt() {
        let n = 1;
        let p = Poly::coordinate(n, 0).mul(&Poly::coordinate(n, 1)).mul(&Poly::coordinate(n, 2));
        let lap = p.sub_laplacian();
        let x = Poly::coordinate(n, 0);
        let y = Poly::coordinate(n, 1);
        let expect = x.mul(&x).scale(4.0).add(&y.mul(&y).scale(-4.0));
        assert_eq!(lap, expect);
        assert_eq!(lap.eval(&[1.0, 2.0, 0.0]), -12.0);
    }

    #[test]
    fn jet_matches_symbolic_partials() {
        let p = gauge_fourth(1);
        let at = GroupPoint::p3(0.5, -1.0, 2.0);
        let jet = p.jet(&at);
        assert!((jet.value - p.eval_at(&at)).abs() < 1e-14);
        assert!((jet.grad_at(2) - p.partial(2).eval_at(&at)).abs() < 1e-14);
        assert!((jet.hess_at(0, 1) - p.partial(0).partial(1).eval_at(&at)).abs() < 1e-14);
    }
}
