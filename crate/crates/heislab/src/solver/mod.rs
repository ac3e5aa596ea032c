//! Explicit adaptive time integration of the two reaction-diffusion
//! equations, blow-up detection, and run diagnostics.
//!
//! Forward Euler with dt = min(diffusive CFL, relative growth cap); the
//! diffusive bound uses the worst-case stencil intensity and the current
//! nonlinear diffusivity.  Explicit stepping keeps the degenerate
//! nonlinearity trivial and makes blow-up detection honest.

mod bounds;
mod diagnostics;

pub use bounds::{ode_bound, OdeBounds};
pub use diagnostics::{kaplan_inequality_check, weak_residual, weak_residual_frames};

use std::sync::Arc;

use crate::analytic::{theta_mass, ThetaSpec};
use crate::eigen::EigenPair;
use crate::error::{Error, Result};
use crate::hgeom::{hnorm3, stencil_intensity, sub_laplacian_into, GroupDims, ScalarField, UniformGrid};

/// Which equation a run integrates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equation {
    /// v_t = L(v^m) + v^sigma, m >= 1, sigma > 1.
    PorousMedium { m: f64, sigma: f64 },
    /// u_t = u^q L(u) + u^p, q >= 0, p > 1.
    Degenerate { q: f64, p: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct PdeParams {
    pub equation: Equation,
    pub dims: GroupDims,
}

impl PdeParams {
    pub fn porous_medium(m: f64, sigma: f64, dims: GroupDims) -> Result<Self> {
        if !(m >= 1.0) || !(sigma > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "porous medium exponents need m >= 1 and sigma > 1, got m = {m}, sigma = {sigma}"
            )));
        }
        Ok(PdeParams { equation: Equation::PorousMedium { m, sigma }, dims })
    }

    pub fn degenerate(q: f64, p: f64, dims: GroupDims) -> Result<Self> {
        if !(q >= 0.0) || !(p > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "degenerate exponents need q >= 0 and p > 1, got q = {q}, p = {p}"
            )));
        }
        Ok(PdeParams { equation: Equation::Degenerate { q, p }, dims })
    }
}

/// Initial data families.
#[derive(Debug, Clone)]
pub enum InitialData {
    /// amplitude * Phi(|eta|_H / radius): compactly supported C^2 bump.
    Bump { amplitude: f64, radius: f64 },
    /// epsilon (1 + |eta|_H^2)^{-gamma/2}.
    PolyDecay { epsilon: f64, gamma: f64 },
    /// amplitude * w for a caller-supplied nonnegative profile w.
    ScaledProfile { amplitude: f64, profile: ScalarField },
}

pub fn build_initial(spec: &InitialData, grid: &Arc<UniformGrid>) -> Result<ScalarField> {
    match spec {
        InitialData::Bump { amplitude, radius } => {
            if !(*radius > 0.0) || !(*amplitude >= 0.0) {
                return Err(Error::InvalidParameter(
                    "bump needs radius > 0 and amplitude >= 0".into(),
                ));
            }
            let (amp, r) = (*amplitude, *radius);
            Ok(ScalarField::sample(grid.clone(), |x, y, t| {
                amp * crate::analytic::smoothstep_profile(hnorm3(x, y, t) / r).0
            }))
        }
        InitialData::PolyDecay { epsilon, gamma } => {
            if !(*gamma > 0.0) {
                return Err(Error::InvalidParameter("poly decay needs gamma > 0".into()));
            }
            if !(*epsilon >= 0.0) {
                return Err(Error::InvalidParameter("poly decay needs epsilon >= 0".into()));
            }
            let (eps, g) = (*epsilon, *gamma);
            Ok(ScalarField::sample(grid.clone(), |x, y, t| {
                let r = hnorm3(x, y, t);
                eps * (1.0 + r * r).powf(-g / 2.0)
            }))
        }
        InitialData::ScaledProfile { amplitude, profile } => {
            if !(*amplitude >= 0.0) {
                return Err(Error::InvalidParameter("profile amplitude must be >= 0".into()));
            }
            if !profile.grid().same_nodes(grid) {
                return Err(Error::GridMismatch("profile grid differs from run grid".into()));
            }
            if profile.values().iter().any(|v| *v < 0.0) {
                return Err(Error::InvalidParameter("profile must be nonnegative".into()));
            }
            let vals: Vec<f64> = profile.values().iter().map(|v| amplitude * v).collect();
            ScalarField::from_values(grid.clone(), vals)
        }
    }
}

/// Adaptive-step controls.
#[derive(Debug, Clone)]
pub struct StepControl {
    pub cfl_safety: f64,
    pub growth_cap: f64,
    pub dt_min: f64,
    pub t_max: f64,
    pub blowup_threshold: f64,
    /// Diagnostics row cadence in time units.
    pub row_dt: f64,
    /// Field snapshot cadence; None disables frame storage.
    pub frame_dt: Option<f64>,
    /// Drops the reaction term (pure diffusion); eigen diagnostics only.
    pub reaction_off: bool,
}

impl StepControl {
    pub fn for_horizon(t_max: f64) -> Self {
        StepControl {
            cfl_safety: 0.25,
            growth_cap: 0.10,
            dt_min: 1e-20,
            t_max,
            blowup_threshold: 1e8,
            row_dt: t_max / 256.0,
            frame_dt: None,
            reaction_off: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParameter("cfl_safety must lie in (0, 1]".into()));
        }
        if !(self.growth_cap > 0.0 && self.dt_min > 0.0 && self.t_max > 0.0) {
            return Err(Error::InvalidParameter("step controls must be positive".into()));
        }
        if !(self.blowup_threshold > 1.0) {
            return Err(Error::InvalidParameter("blow-up threshold must exceed 1".into()));
        }
        if !(self.row_dt > 0.0) || self.row_dt > self.t_max / 16.0 {
            return Err(Error::InvalidParameter(
                "row cadence must be positive and at most t_max/16".into(),
            ));
        }
        if let Some(fdt) = self.frame_dt {
            if !(fdt > 0.0) {
                return Err(Error::InvalidParameter("frame cadence must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One diagnostics sample.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub dt: f64,
    pub sup_norm: f64,
    pub mass: f64,
    /// Integral of the solution against the normalized Theta weight.
    pub j_theta: f64,
    /// Integral against the eigen weight, when a pair is loaded.
    pub y_lambda: Option<f64>,
    /// Cell-volume-weighted negativity removed this step.
    pub clamp_l1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    BlowUp { t_star: f64 },
    NoBlowupDecaying,
    NoBlowupByHorizon,
    Failed { reason: String },
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::BlowUp { .. } => "blow_up",
            Classification::NoBlowupDecaying => "no_blowup_decaying",
            Classification::NoBlowupByHorizon => "no_blowup_by_horizon",
            Classification::Failed { .. } => "failed",
        }
    }
}

/// Full record of one time integration.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub params: PdeParams,
    pub initial: InitialData,
    pub grid: Arc<UniformGrid>,
    pub rows: Vec<DiagnosticsRow>,
    pub frames: Vec<(f64, ScalarField)>,
    pub classification: Classification,
    /// Set when initial data or the evolving mass reaches the boundary band.
    pub truncation_flagged: bool,
}

impl RunRecord {
    pub fn blow_up_time(&self) -> Option<f64> {
        match self.classification {
            Classification::BlowUp { t_star } => Some(t_star),
            _ => None,
        }
    }
}

// Nonnegative power with fast paths for quarter-integer exponents in
// [0, 4], which covers the exponent grids the sweeps use; sqrt chains are
// several times cheaper than powf on the hot path.
#[inline]
pub(crate) fn pow_nonneg(v: f64, e: f64) -> f64 {
    if e == 1.0 {
        return v;
    }
    if e == 2.0 {
        return v * v;
    }
    let quarters = e * 4.0;
    let qi = quarters as i32;
    if qi as f64 == quarters && (0..=16).contains(&qi) {
        let whole = match qi / 4 {
            0 => 1.0,
            1 => v,
            2 => v * v,
            3 => v * v * v,
            _ => (v * v) * (v * v),
        };
        return match qi % 4 {
            0 => whole,
            1 => whole * v.sqrt().sqrt(),
            2 => whole * v.sqrt(),
            _ => whole * v.sqrt() * v.sqrt().sqrt(),
        };
    }
    v.powf(e)
}

struct SolverState {
    v: Vec<f64>,
    scratch: Vec<f64>,
    lap: Vec<f64>,
    t: f64,
    last_dt: f64,
    clamp_l1: f64,
    sup_history: Vec<f64>,
}

/// Adaptive dt: diffusive CFL against the linearized diffusivity plus a
/// relative reaction growth cap, never overshooting the horizon or the
/// row cadence.
fn adaptive_dt(
    params: &PdeParams,
    control: &StepControl,
    sup: f64,
    intensity: f64,
    t: f64,
) -> f64 {
    let (diffusivity, growth_rate) = match params.equation {
        Equation::PorousMedium { m, sigma } => {
            let d = if m == 1.0 { 1.0 } else { m * pow_nonneg(sup, m - 1.0) };
            let r = if control.reaction_off { 0.0 } else { pow_nonneg(sup, sigma - 1.0) };
            (d, r)
        }
        Equation::Degenerate { q, p } => {
            let d = pow_nonneg(sup, q);
            let r = if control.reaction_off { 0.0 } else { pow_nonneg(sup, p - 1.0) };
            (d, r)
        }
    };
    let mut dt = control.row_dt.min(control.t_max - t);
    if diffusivity > 0.0 {
        dt = dt.min(control.cfl_safety / (diffusivity * intensity));
    }
    if growth_rate > 0.0 {
        dt = dt.min(control.growth_cap / growth_rate);
    }
    dt
}

/// One forward-Euler update in place; returns the clamped negativity
/// (cell-volume weighted).
fn apply_update(
    params: &PdeParams,
    grid: &UniformGrid,
    control: &StepControl,
    dt: f64,
    v: &mut [f64],
    scratch: &mut [f64],
    lap: &mut [f64],
) -> f64 {
    let cellvol = grid.cell_volume();
    let mut clamp_l1 = 0.0;
    match params.equation {
        Equation::PorousMedium { m, sigma } => {
            if m == 1.0 {
                sub_laplacian_into(grid, v, lap);
            } else {
                for (w, x) in scratch.iter_mut().zip(v.iter()) {
                    *w = pow_nonneg(*x, m);
                }
                sub_laplacian_into(grid, scratch, lap);
            }
            for idx in 0..v.len() {
                if grid.is_masked(idx) {
                    continue;
                }
                let x = v[idx];
                let reaction = if control.reaction_off { 0.0 } else { pow_nonneg(x, sigma) };
                let mut nv = x + dt * (lap[idx] + reaction);
                if nv < 0.0 {
                    clamp_l1 += -nv * cellvol;
                    nv = 0.0;
                }
                v[idx] = nv;
            }
        }
        Equation::Degenerate { q, p } => {
            sub_laplacian_into(grid, v, lap);
            for idx in 0..v.len() {
                if grid.is_masked(idx) {
                    continue;
                }
                let x = v[idx];
                let reaction = if control.reaction_off { 0.0 } else { pow_nonneg(x, p) };
                let mut nv = x + dt * (pow_nonneg(x, q) * lap[idx] + reaction);
                if nv < 0.0 {
                    clamp_l1 += -nv * cellvol;
                    nv = 0.0;
                }
                v[idx] = nv;
            }
        }
    }
    clamp_l1
}

/// A single forward-Euler step from the given state; returns the updated
/// field, the dt taken, and the clamped negativity.
pub fn single_step(
    params: &PdeParams,
    field: &ScalarField,
    control: &StepControl,
) -> Result<(ScalarField, f64, f64)> {
    control.validate()?;
    if !field.is_finite() {
        return Err(Error::NonFiniteField);
    }
    if field.values().iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidParameter("field must be nonnegative".into()));
    }
    let grid = field.grid().clone();
    let intensity = stencil_intensity(&grid);
    let sup = field.sup_norm();
    let dt = adaptive_dt(params, control, sup, intensity, 0.0);
    let mut v = field.values().to_vec();
    let mut scratch = vec![0.0; v.len()];
    let mut lap = vec![0.0; v.len()];
    let clamp = apply_update(params, &grid, control, dt, &mut v, &mut scratch, &mut lap);
    Ok((ScalarField::from_values(grid, v)?, dt, clamp))
}

/// Classify a finished run from its diagnostics rows.
///
/// Blow-up when the final sup reaches the threshold; decaying when the
/// trailing half of the rows is non-increasing within 1e-12 relative
/// slack; otherwise the horizon was reached without a verdict.
pub fn classify(rows: &[DiagnosticsRow], threshold: f64) -> Result<Classification> {
    if rows.len() < 10 {
        return Err(Error::TooFewRows(rows.len(), 10));
    }
    let last = rows.last().unwrap();
    if last.sup_norm >= threshold {
        return Ok(Classification::BlowUp { t_star: last.t });
    }
    let tail = &rows[rows.len() / 2..];
    let decaying = tail
        .windows(2)
        .all(|w| w[1].sup_norm <= w[0].sup_norm + 1e-12 * (1.0 + w[0].sup_norm));
    if decaying {
        Ok(Classification::NoBlowupDecaying)
    } else {
        Ok(Classification::NoBlowupByHorizon)
    }
}

/// Integrate the PDE from the given initial data.  Deterministic for fixed
/// inputs; all reductions run in flat node order.
pub fn run(
    params: &PdeParams,
    initial: &InitialData,
    grid: &Arc<UniformGrid>,
    control: &StepControl,
    eigen: Option<&EigenPair>,
) -> Result<RunRecord> {
    control.validate()?;
    if params.dims.n() != 1 {
        return Err(Error::InvalidParameter("grid runs are n = 1 only".into()));
    }
    let field0 = build_initial(initial, grid)?;
    if let Some(pair) = eigen {
        if !pair.eigenfunction().grid().same_nodes(grid) {
            return Err(Error::GridMismatch("eigen pair lives on a different grid".into()));
        }
    }

    let n = grid.len();
    let cellvol = grid.cell_volume();
    let intensity = stencil_intensity(grid);

    // Theta weight (eps = 1, A = 1), normalized to unit total integral.
    let theta_spec = ThetaSpec::new(1.0, 1.0, params.dims)?;
    let theta_norm = theta_mass(&theta_spec)?;
    let theta_w: Vec<f64> = {
        let mut w = vec![0.0; n];
        let mut idx = 0;
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                for k in 0..grid.ntau {
                    let p = crate::hgeom::GroupPoint::p3(grid.x(i), grid.y(j), grid.tau(k));
                    w[idx] = crate::analytic::theta_eval(&theta_spec, &p).0 / theta_norm;
                    idx += 1;
                }
            }
        }
        w
    };

    let mut state = SolverState {
        v: field0.values().to_vec(),
        scratch: vec![0.0; n],
        lap: vec![0.0; n],
        t: 0.0,
        last_dt: 0.0,
        clamp_l1: 0.0,
        sup_history: Vec::new(),
    };

    let mut rows: Vec<DiagnosticsRow> = Vec::new();
    let mut frames: Vec<(f64, ScalarField)> = Vec::new();
    let mut truncation_flagged = field0.boundary_band_fraction() >= 1e-12;

    let snapshot = |state: &SolverState| -> Result<ScalarField> {
        ScalarField::from_values(grid.clone(), state.v.clone())
    };
    let make_row = |state: &SolverState| -> DiagnosticsRow {
        let sup = state.v.iter().fold(0.0f64, |a, b| a.max(*b));
        let mass: f64 = state.v.iter().sum::<f64>() * cellvol;
        let j_theta: f64 =
            state.v.iter().zip(&theta_w).map(|(v, w)| v * w).sum::<f64>() * cellvol;
        let y_lambda = eigen.map(|pair| {
            state
                .v
                .iter()
                .zip(pair.eigenfunction().values())
                .map(|(v, l)| v * l)
                .sum::<f64>()
                * cellvol
        });
        DiagnosticsRow {
            t: state.t,
            dt: state.last_dt,
            sup_norm: sup,
            mass,
            j_theta,
            y_lambda,
            clamp_l1: state.clamp_l1,
        }
    };

    rows.push(make_row(&state));
    if control.frame_dt.is_some() {
        frames.push((0.0, snapshot(&state)?));
    }
    let mut next_row_t = control.row_dt;
    let mut next_frame_t = control.frame_dt.unwrap_or(f64::INFINITY);

    let classification_at_end: Classification;
    loop {
        let sup = state.v.iter().fold(0.0f64, |a, b| a.max(*b));
        let dt = adaptive_dt(params, control, sup, intensity, state.t);
        if dt < control.dt_min {
            // Corroborate blow-up with recent sup growth.
            let lookback = state.sup_history.len().saturating_sub(20);
            let past = state.sup_history.get(lookback).copied().unwrap_or(sup);
            classification_at_end = if past > 0.0 && sup / past >= 10.0 {
                Classification::BlowUp { t_star: state.t }
            } else {
                Classification::Failed {
                    reason: format!("dt underflow at t = {:.6e} (dt = {:.3e})", state.t, dt),
                }
            };
            break;
        }

        state.clamp_l1 = apply_update(
            params,
            grid,
            control,
            dt,
            &mut state.v,
            &mut state.scratch,
            &mut state.lap,
        );
        state.t += dt;
        state.last_dt = dt;

        let mut new_sup = 0.0f64;
        let mut finite = true;
        for &x in &state.v {
            if !x.is_finite() {
                finite = false;
                break;
            }
            if x > new_sup {
                new_sup = x;
            }
        }
        state.sup_history.push(new_sup);
        if !finite {
            classification_at_end = Classification::Failed {
                reason: format!("non-finite field at t = {:.6e}", state.t),
            };
            break;
        }

        if new_sup >= control.blowup_threshold {
            rows.push(make_row(&state));
            if control.frame_dt.is_some() {
                frames.push((state.t, snapshot(&state)?));
            }
            classification_at_end = Classification::BlowUp { t_star: state.t };
            break;
        }

        if state.t >= next_row_t - 1e-15 {
            let row = make_row(&state);
            rows.push(row);
            while next_row_t <= state.t + 1e-15 {
                next_row_t += control.row_dt;
            }
            let band = ScalarField::from_values(grid.clone(), state.v.clone())?
                .boundary_band_fraction();
            if band >= 1e-6 {
                truncation_flagged = true;
            }
        }
        if state.t >= next_frame_t - 1e-15 {
            frames.push((state.t, snapshot(&state)?));
            while next_frame_t <= state.t + 1e-15 {
                next_frame_t += control.frame_dt.unwrap();
            }
        }

        if state.t >= control.t_max - 1e-12 {
            let row = make_row(&state);
            if rows.last().map_or(true, |r| r.t < row.t) {
                rows.push(row);
            }
            if control.frame_dt.is_some() {
                frames.push((state.t, snapshot(&state)?));
            }
            classification_at_end = classify(&rows, control.blowup_threshold)
                .unwrap_or(Classification::NoBlowupByHorizon);
            break;
        }
    }

    Ok(RunRecord {
        params: *params,
        initial: initial.clone(),
        grid: grid.clone(),
        rows,
        frames,
        classification: classification_at_end,
        truncation_flagged,
    })
}

#[cfg(test)]
mod tests;
