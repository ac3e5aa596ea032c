use super::{Equation, RunRecord};
use crate::analytic::CutoffSpec;
use crate::eigen::EigenPair;
use crate::error::{Error, Result};
use crate::hgeom::{d_h_exact, GroupPoint, ScalarField};

/// Node tables of a space-time test function psi(t, eta) = phi^ell(eta) *
/// phi3^ell(t): values and exact sub-Laplacian at every grid node, plus the
/// time factor.  The spatial support must stay strictly inside the box.
struct TestTables {
    psi_val: Vec<f64>,
    psi_lap: Vec<f64>,
}

fn build_tables(psi: &CutoffSpec, field: &ScalarField) -> Result<TestTables> {
    let g = field.grid();
    if psi.scale_xy > g.lx - g.hx || psi.scale_xy > g.ly - g.hy || psi.scale_tau > g.ltau - g.htau
    {
        return Err(Error::SupportTouchesBoundary);
    }
    let n = g.len();
    let mut psi_val = vec![0.0; n];
    let mut psi_lap = vec![0.0; n];
    let mut idx = 0;
    for i in 0..g.nx {
        for j in 0..g.ny {
            for k in 0..g.ntau {
                let p = GroupPoint::p3(g.x(i), g.y(j), g.tau(k));
                let jet = psi.jet(&p);
                psi_val[idx] = jet.value;
                psi_lap[idx] = d_h_exact(&jet, &p);
                idx += 1;
            }
        }
    }
    Ok(TestTables { psi_val, psi_lap })
}

#[inline]
fn powv(v: f64, e: f64) -> f64 {
    super::pow_nonneg(v, e)
}

/// Absolute defect of the weak-form identity on stored frames:
///
///   int v(T) psi(T) - int v(0) psi(0)
///     = int int v^sigma psi + int int v^m L(psi) + int int v psi_t,
///
/// space integrals by cell-volume-weighted sums, time by trapezoid over
/// the frames, L(psi) and psi_t from exact jets.
pub fn weak_residual_frames(
    frames: &[(f64, ScalarField)],
    m: f64,
    sigma: f64,
    psi: &CutoffSpec,
) -> Result<f64> {
    if frames.len() < 2 {
        return Err(Error::TooFewRows(frames.len(), 2));
    }
    let tables = build_tables(psi, &frames[0].1)?;
    let cellvol = frames[0].1.grid().cell_volume();
    let timed = psi.time_scale.is_some();

    // Per-frame space sums weighted by the time factor.
    let mut integrand = Vec::with_capacity(frames.len());
    let mut boundary_vals = Vec::with_capacity(frames.len());
    for (t, field) in frames {
        if !field.grid().same_nodes(frames[0].1.grid()) {
            return Err(Error::GridMismatch("frames on different grids".into()));
        }
        let (tv, tdt) = if timed {
            (psi.time_value_pow(*t), psi.time_dt_pow(*t))
        } else {
            (1.0, 0.0)
        };
        let mut s_sigma = 0.0;
        let mut s_m = 0.0;
        let mut s_v = 0.0;
        for (v, (pv, pl)) in field
            .values()
            .iter()
            .zip(tables.psi_val.iter().zip(&tables.psi_lap))
        {
            s_sigma += powv(*v, sigma) * pv;
            s_m += powv(*v, m) * pl;
            s_v += v * pv;
        }
        integrand.push((s_sigma * tv + s_m * tv + s_v * tdt) * cellvol);
        boundary_vals.push(s_v * tv * cellvol);
    }

    let mut time_integral = 0.0;
    for i in 1..frames.len() {
        let dt = frames[i].0 - frames[i - 1].0;
        time_integral += 0.5 * dt * (integrand[i - 1] + integrand[i]);
    }
    let lhs = boundary_vals.last().unwrap() - boundary_vals.first().unwrap();
    Ok((lhs - time_integral).abs())
}

/// Weak-form defect of a recorded porous-medium run against psi.
pub fn weak_residual(record: &RunRecord, psi: &CutoffSpec) -> Result<f64> {
    let (m, sigma) = match record.params.equation {
        Equation::PorousMedium { m, sigma } => (m, sigma),
        Equation::Degenerate { .. } => {
            return Err(Error::InvalidParameter(
                "weak residual applies to porous-medium runs; use the transform first".into(),
            ))
        }
    };
    weak_residual_frames(&record.frames, m, sigma, psi)
}

/// Maximum normalized violation of the eigen differential inequality
///   y'(t) >= -lambda1 int v^m Lambda + int v^sigma Lambda
/// over the stored frames, with y' by centered differences of y = int v
/// Lambda.  Returns max_t (RHS - y') / (1 + |RHS|); nonpositive when the
/// inequality holds discretely everywhere.
pub fn kaplan_inequality_check(record: &RunRecord, pair: &EigenPair) -> Result<f64> {
    let (m, sigma) = match record.params.equation {
        Equation::PorousMedium { m, sigma } => (m, sigma),
        Equation::Degenerate { .. } => {
            return Err(Error::InvalidParameter(
                "the eigen inequality is stated for the porous-medium form".into(),
            ))
        }
    };
    let lam_field = pair.eigenfunction();
    if !lam_field.grid().same_nodes(record.grid.as_ref()) {
        return Err(Error::GridMismatch("eigen pair grid differs from run grid".into()));
    }
    if record.frames.len() < 3 {
        return Err(Error::TooFewRows(record.frames.len(), 3));
    }
    let cellvol = record.grid.cell_volume();
    let weights = lam_field.values();

    let mut y = Vec::with_capacity(record.frames.len());
    let mut rhs = Vec::with_capacity(record.frames.len());
    for (_, field) in &record.frames {
        let mut yi = 0.0;
        let mut im = 0.0;
        let mut is = 0.0;
        for (v, w) in field.values().iter().zip(weights) {
            yi += v * w;
            im += powv(*v, m) * w;
            is += powv(*v, sigma) * w;
        }
        y.push(yi * cellvol);
        rhs.push((-pair.lambda1 * im + is) * cellvol);
    }

    let mut worst = f64::NEG_INFINITY;
    for i in 1..record.frames.len() - 1 {
        let t_prev = record.frames[i - 1].0;
        let t_next = record.frames[i + 1].0;
        let dy = (y[i + 1] - y[i - 1]) / (t_next - t_prev);
        let violation = (rhs[i] - dy) / (1.0 + rhs[i].abs());
        worst = worst.max(violation);
    }
    Ok(worst)
}
