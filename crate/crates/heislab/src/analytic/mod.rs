//! Closed-form auxiliary functions and identity checks: the exponential
//! weight Theta with its exact sub-Laplacian, the horizontal product rule,
//! compactly supported cutoff families, and the scaling rates of the
//! cutoff/capacity functionals.

mod cutoff;
mod scaling;

pub use cutoff::{smoothstep_profile, CutoffSpec};
pub use scaling::{
    capacity_functionals, capacity_scaling_report, cutoff_scaling_report, default_ell,
    fit_loglog_slope, CapacityScalingReport, CutoffScalingReport, ScalingReport,
};

use crate::error::{Error, Result};
use crate::hgeom::{d_h_exact, FieldJet, GroupDims, GroupPoint};
use crate::poly::Poly;
use crate::sampling::HaltonSampler;

/// Parameters of the weight Theta(eta) = exp(-eps [A + (|x|^2+|y|^2)^2 + tau^2]^{1/2}).
#[derive(Debug, Clone, Copy)]
pub struct ThetaSpec {
    pub epsilon: f64,
    pub shift_a: f64,
    pub dims: GroupDims,
}

impl ThetaSpec {
    pub fn new(epsilon: f64, shift_a: f64, dims: GroupDims) -> Result<Self> {
        if !(epsilon > 0.0) || !(shift_a > 0.0) {
            return Err(Error::InvalidParameter(
                "Theta requires epsilon > 0 and A > 0".into(),
            ));
        }
        Ok(ThetaSpec { epsilon, shift_a, dims })
    }

    /// The weight used by the equal-exponent energy argument:
    /// eps = 1/(4(2+Q)), which turns the decay bound into -L Theta <= Theta/2.
    pub fn equal_exponent_weight(dims: GroupDims) -> Self {
        ThetaSpec {
            epsilon: 1.0 / (4.0 * (2.0 + dims.homogeneous() as f64)),
            shift_a: 1.0,
            dims,
        }
    }

    /// Coefficient of the decay bound -L Theta <= 2 eps (Q+2) Theta.
    pub fn bound_coefficient(&self) -> f64 {
        2.0 * self.epsilon * (self.dims.homogeneous() as f64 + 2.0)
    }
}

/// Value and exact closed-form sub-Laplacian of Theta at a point.
///
/// With rho = A + s^2 + tau^2 and s = |x|^2 + |y|^2:
///   L Theta = 4 s (rho - A) (eps rho^{-3/2} + eps^2 rho^{-1}) Theta
///             - 4 eps (n+2) s rho^{-1/2} Theta.
/// The mixed x-tau / y-tau contributions cancel pairwise, so only the
/// diagonal second derivatives survive.
pub fn theta_eval(spec: &ThetaSpec, at: &GroupPoint) -> (f64, f64) {
    let eps = spec.epsilon;
    let n = spec.dims.n() as f64;
    let s = at.horizontal_sq();
    let rho = spec.shift_a + s * s + at.tau * at.tau;
    let value = (-eps * rho.sqrt()).exp();
    let kk = eps * rho.powf(-1.5) + eps * eps / rho;
    let laplacian = (4.0 * s * (rho - spec.shift_a)) * kk * value
        - 4.0 * eps * (n + 2.0) * s * value / rho.sqrt();
    (value, laplacian)
}

/// Full jet of Theta assembled from the generic chain rule on rho; this is
/// the independent route used to cross-check `theta_eval`.
pub fn theta_jet(spec: &ThetaSpec, at: &GroupPoint) -> FieldJet {
    let n = spec.dims.n();
    let eps = spec.epsilon;
    let s = at.horizontal_sq();
    let rho = spec.shift_a + s * s + at.tau * at.tau;
    let value = (-eps * rho.sqrt()).exp();
    let d = 2 * n + 1;

    // rho gradient and Hessian.
    let mut rg = vec![0.0; d];
    for i in 0..n {
        rg[i] = 4.0 * at.x[i] * s;
        rg[n + i] = 4.0 * at.y[i] * s;
    }
    rg[2 * n] = 2.0 * at.tau;
    let mut rh = vec![0.0; d * d];
    for i in 0..n {
        for j in 0..n {
            let dij = if i == j { 1.0 } else { 0.0 };
            rh[i * d + j] = 4.0 * dij * s + 8.0 * at.x[i] * at.x[j];
            rh[(n + i) * d + (n + j)] = 4.0 * dij * s + 8.0 * at.y[i] * at.y[j];
            rh[i * d + (n + j)] = 8.0 * at.x[i] * at.y[j];
            rh[(n + j) * d + i] = rh[i * d + (n + j)];
        }
    }
    rh[(d - 1) * d + (d - 1)] = 2.0;

    let half = 0.5 * eps / rho.sqrt();
    let kk4 = 0.25 * (eps * rho.powf(-1.5) + eps * eps / rho);
    let mut jet = FieldJet::zero(n);
    jet.value = value;
    for a in 0..d {
        jet.set_grad(a, -half * rg[a] * value);
    }
    for a in 0..d {
        for b in a..d {
            let v = (kk4 * rg[a] * rg[b] - half * rh[a * d + b]) * value;
            jet.set_hess(a, b, v);
        }
    }
    jet
}

/// Quasi-random verification of the decay bound -L Theta <= c Theta over a
/// centered box, with c the spec's bound coefficient.
#[derive(Debug, Clone)]
pub struct ThetaBoundReport {
    pub samples: usize,
    pub max_slack_ratio: f64,
    pub bound_coefficient: f64,
}

pub fn theta_bound_check(
    spec: &ThetaSpec,
    box_half_extent: f64,
    samples: usize,
    seed: u64,
) -> Result<ThetaBoundReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least 1 sample".into()));
    }
    let n = spec.dims.n();
    let d = 2 * n + 1;
    let coeff = spec.bound_coefficient();
    let mut sampler = HaltonSampler::new(d, seed);
    let mut unit = vec![0.0; d];
    let mut max_ratio = 0.0f64;
    for _ in 0..samples {
        sampler.next_point(&mut unit);
        let coords: Vec<f64> = unit
            .iter()
            .map(|u| (2.0 * u - 1.0) * box_half_extent)
            .collect();
        let at = GroupPoint {
            x: coords[..n].to_vec(),
            y: coords[n..2 * n].to_vec(),
            tau: coords[2 * n],
        };
        let (value, lap) = theta_eval(spec, &at);
        let lhs = -lap;
        let rhs = coeff * value;
        if lhs > rhs + 1e-12 {
            return Err(Error::BoundViolated {
                point: (at.x[0], at.y[0], at.tau),
                lhs,
                rhs,
            });
        }
        if rhs > 0.0 {
            max_ratio = max_ratio.max(lhs / rhs);
        }
    }
    Ok(ThetaBoundReport { samples, max_slack_ratio: max_ratio, bound_coefficient: coeff })
}

/// Total integral of Theta over H^n (n = 1), by midpoint quadrature on an
/// adaptive box with one refinement doubling as the convergence certificate.
pub fn theta_mass(spec: &ThetaSpec) -> Result<f64> {
    if spec.dims.n() != 1 {
        return Err(Error::InvalidParameter("theta_mass is implemented for n = 1".into()));
    }
    // exp(-eps sqrt(rho)) ~ exp(-eps s) in the horizontal tail and
    // exp(-eps |tau|) in the vertical one; cut where the exponent is ~42.
    let tail = 42.0 / spec.epsilon;
    let exy = tail.sqrt();
    let etau = tail;
    let quad = |nxy: usize, ntau: usize| -> f64 {
        let hx = 2.0 * exy / nxy as f64;
        let ht = 2.0 * etau / ntau as f64;
        let mut acc = 0.0;
        for i in 0..nxy {
            let x = -exy + (i as f64 + 0.5) * hx;
            for j in 0..nxy {
                let y = -exy + (j as f64 + 0.5) * hx;
                let s = x * x + y * y;
                for k in 0..ntau {
                    let t = -etau + (k as f64 + 0.5) * ht;
                    let rho = spec.shift_a + s * s + t * t;
                    acc += (-spec.epsilon * rho.sqrt()).exp();
                }
            }
        }
        acc * hx * hx * ht
    };
    let coarse = quad(72, 180);
    let fine = quad(144, 360);
    let rel = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if rel > 0.05 {
        return Err(Error::QuadratureNotConverged(rel));
    }
    Ok(fine)
}

/// Maximum defect of the horizontal product rule
/// L(uv) = L(u) v + 2 grad_H(u) . grad_H(v) + u L(v)
/// over the given points.  The left side goes through the jet of the
/// symbolic product, the right side through the factors' own jets.
#[derive(Debug, Clone, Copy)]
pub struct ProductRuleReport {
    pub max_abs: f64,
    pub max_rel: f64,
}

pub fn product_rule_defect(u: &Poly, v: &Poly, points: &[GroupPoint]) -> ProductRuleReport {
    use crate::hgeom::grad_h_exact;
    let w = u.mul(v);
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    for p in points {
        let lhs = d_h_exact(&w.jet(p), p);
        let ju = u.jet(p);
        let jv = v.jet(p);
        let gu = grad_h_exact(&ju, p);
        let gv = grad_h_exact(&jv, p);
        let dot: f64 = gu.iter().zip(&gv).map(|(a, b)| a * b).sum();
        let rhs = d_h_exact(&ju, p) * jv.value + 2.0 * dot + ju.value * d_h_exact(&jv, p);
        let diff = (lhs - rhs).abs();
        max_abs = max_abs.max(diff);
        max_rel = max_rel.max(diff / (1.0 + lhs.abs()));
    }
    ProductRuleReport { max_abs, max_rel }
}
