//! The power-and-dilation change of variables sending a solution of the
//! degenerate equation u_t = u^q L(u) + u^p (0 <= q < 1) to a solution of
//! the porous-medium equation with exponents m = 1/(1-q), sigma =
//! (p-q)/(1-q):
//!     v(t, eta) = a u^{1-q}(t, delta_b(eta)),
//!     a = (1-q)^{(1-q)/(p-1)},  b = (1-q)^{(p-1-q)/(2(p-1))}.

use std::sync::Arc;

use crate::analytic::CutoffSpec;
use crate::error::{Error, Result};
use crate::hgeom::{BoundaryPolicy, ScalarField, UniformGrid};
use crate::solver::{weak_residual_frames, Equation, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformParams {
    pub q: f64,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub sigma: f64,
}

/// Derive the transform constants from (q, p).
pub fn map_params(q: f64, p: f64) -> Result<TransformParams> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "the transform needs 0 <= q < 1, got q = {q}"
        )));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("the transform needs p > 1, got p = {p}")));
    }
    let omq = 1.0 - q;
    Ok(TransformParams {
        q,
        p,
        a: omq.powf(omq / (p - 1.0)),
        b: omq.powf((p - 1.0 - q) / (2.0 * (p - 1.0))),
        m: 1.0 / omq,
        sigma: (p - q) / omq,
    })
}

/// Critical exponent of the degenerate equation: p_c = q + 1 + 2(1-q)/Q.
pub fn critical_p(q: f64, q_hom: usize) -> f64 {
    q + 1.0 + 2.0 * (1.0 - q) / q_hom as f64
}

/// Target grid for the mapped field: the source box scaled by 1/b (1/b^2
/// in tau), same counts, so that delta_b lands exactly on the source box.
pub fn mapped_grid(source: &UniformGrid, tp: &TransformParams) -> Result<Arc<UniformGrid>> {
    UniformGrid::new(
        (source.lx / tp.b, source.ly / tp.b, source.ltau / (tp.b * tp.b)),
        (source.nx, source.ny, source.ntau),
        BoundaryPolicy::DirichletZero,
    )
}

/// v(eta) = a u^{1-q}(delta_b(eta)) sampled on `target` by trilinear
/// interpolation of u; errors if the dilated target box escapes the
/// source box.
pub fn map_field_to(
    u: &ScalarField,
    tp: &TransformParams,
    target: &Arc<UniformGrid>,
) -> Result<ScalarField> {
    let src = u.grid();
    let eps = 1e-12;
    if tp.b * target.lx > src.lx * (1.0 + eps)
        || tp.b * target.ly > src.ly * (1.0 + eps)
        || tp.b * tp.b * target.ltau > src.ltau * (1.0 + eps)
    {
        return Err(Error::EscapesSourceBox);
    }
    let omq = 1.0 - tp.q;
    let mut values = vec![0.0; target.len()];
    let mut idx = 0;
    for i in 0..target.nx {
        let x = tp.b * target.x(i);
        for j in 0..target.ny {
            let y = tp.b * target.y(j);
            for k in 0..target.ntau {
                let tau = tp.b * tp.b * target.tau(k);
                if !target.is_masked(idx) {
                    let uval = u.interpolate(x, y, tau)?.max(0.0);
                    values[idx] = if omq == 1.0 { tp.a * uval } else { tp.a * uval.powf(omq) };
                }
                idx += 1;
            }
        }
    }
    ScalarField::from_values(target.clone(), values)
}

/// Map a field onto the default target grid.
pub fn map_field(u: &ScalarField, tp: &TransformParams) -> Result<ScalarField> {
    let target = mapped_grid(u.grid(), tp)?;
    map_field_to(u, tp, &target)
}

/// Maps every stored frame of a degenerate run and evaluates the
/// porous-medium weak-form defect of the mapped trajectory against psi.
pub fn transform_residual(
    run_u: &RunRecord,
    tp: &TransformParams,
    psi: &CutoffSpec,
) -> Result<f64> {
    match run_u.params.equation {
        Equation::Degenerate { q, p } => {
            if (q - tp.q).abs() > 1e-12 || (p - tp.p).abs() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "transform parameters do not match the recorded run".into(),
                ));
            }
        }
        Equation::PorousMedium { .. } => {
            return Err(Error::InvalidParameter(
                "transform residual consumes degenerate-equation runs".into(),
            ))
        }
    }
    if run_u.frames.len() < 2 {
        return Err(Error::TooFewRows(run_u.frames.len(), 2));
    }
    let target = mapped_grid(&run_u.grid, tp)?;
    let mut mapped = Vec::with_capacity(run_u.frames.len());
    for (t, u) in &run_u.frames {
        mapped.push((*t, map_field_to(u, tp, &target)?));
    }
    weak_residual_frames(&mapped, tp.m, tp.sigma, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgeom::hnorm3;

    #[test]
    fn identity_at_q_zero() {
        let tp = map_params(0.0, 1.5).unwrap();
        assert_eq!(tp.a, 1.0);
        assert_eq!(tp.b, 1.0);
        assert_eq!(tp.m, 1.0);
        assert!((tp.sigma - 1.5).abs() < 1e-15);
    }

    #[test]
    fn frozen_example_values() {
        let tp = map_params(0.5, 2.0).unwrap();
        assert!((tp.m - 2.0).abs() < 1e-15);
        assert!((tp.sigma - 3.0).abs() < 1e-15);
        assert!((tp.a - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((tp.a - 0.70711).abs() < 1e-5);
        assert!((tp.b - 0.5f64.powf(0.25)).abs() < 1e-15);
        assert!((tp.b - 0.84090).abs() < 1e-5);
    }

    #[test]
    fn parameter_identities() {
        for qi in 0..10 {
            let q = qi as f64 * 0.1;
            for p in [1.2, 1.75, 2.0, 3.0, 4.5] {
                let tp = map_params(q, p).unwrap();
                let omq = 1.0 - q;
                assert!((tp.a.powf(p - 1.0) - omq.powf(omq)).abs() <= 1e-14 * (1.0 + omq.powf(omq)));
                let b2 = omq.powf((p - 1.0 - q) / (p - 1.0));
                assert!((tp.b * tp.b - b2).abs() <= 1e-14 * (1.0 + b2.abs()));
                assert!((tp.sigma - tp.m - (p - 1.0 - q) / omq).abs() <= 1e-14 * (1.0 + tp.sigma));
                // Critical line maps onto sigma = m + 2/Q.
                let q_hom = 4usize;
                let tpc = map_params(q, critical_p(q, q_hom)).unwrap();
                assert!(
                    (tpc.sigma - tpc.m - 2.0 / q_hom as f64).abs() <= 1e-13,
                    "q = {q}, sigma - m = {}",
                    tpc.sigma - tpc.m
                );
            }
        }
        assert!(map_params(1.0, 2.0).is_err());
        assert!(map_params(-0.1, 2.0).is_err());
        assert!(map_params(0.5, 1.0).is_err());
    }

    #[test]
    fn field_map_examples() {
        let grid =
            UniformGrid::new((2.0, 2.0, 4.0), (13, 13, 13), BoundaryPolicy::DirichletZero)
                .unwrap();
        let tp = map_params(0.5, 2.0).unwrap();

        let zero = ScalarField::zeros(grid.clone());
        let mapped = map_field(&zero, &tp).unwrap();
        assert!(mapped.values().iter().all(|v| *v == 0.0));

        let ones = ScalarField::sample(grid.clone(), |_, _, _| 1.0);
        let mapped = map_field(&ones, &tp).unwrap();
        for v in mapped.values() {
            assert!((v - tp.a).abs() < 1e-12);
        }

        // q = 0 resamples identically on the same node set.
        let tp0 = map_params(0.0, 2.0).unwrap();
        let bump = ScalarField::sample(grid.clone(), |x, y, t| {
            (1.0 - hnorm3(x, y, t)).max(0.0)
        });
        let mapped = map_field(&bump, &tp0).unwrap();
        for (a, b) in mapped.values().iter().zip(bump.values()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn field_map_monotone() {
        let grid =
            UniformGrid::new((1.0, 1.0, 1.0), (9, 9, 9), BoundaryPolicy::DirichletZero).unwrap();
        let tp = map_params(0.3, 2.5).unwrap();
        let lo = ScalarField::sample(grid.clone(), |x, y, t| (x + y + t).abs());
        let hi = ScalarField::sample(grid.clone(), |x, y, t| (x + y + t).abs() + 0.5);
        let mlo = map_field(&lo, &tp).unwrap();
        let mhi = map_field(&hi, &tp).unwrap();
        for (a, b) in mlo.values().iter().zip(mhi.values()) {
            assert!(a <= b);
        }
    }

    #[test]
    fn escape_detected() {
        let grid =
            UniformGrid::new((1.0, 1.0, 1.0), (9, 9, 9), BoundaryPolicy::DirichletZero).unwrap();
        let tp = map_params(0.5, 2.0).unwrap();
        let too_big =
            UniformGrid::new((4.0, 4.0, 4.0), (9, 9, 9), BoundaryPolicy::DirichletZero).unwrap();
        let f = ScalarField::zeros(grid);
        assert!(map_field_to(&f, &tp, &too_big).is_err());
    }
}
