use super::*;
use crate::analytic::CutoffSpec;
use crate::hgeom::{hnorm3, BoundaryPolicy};

fn dims1() -> GroupDims {
    GroupDims::new(1).unwrap()
}

fn box_grid(n: usize, l: f64) -> Arc<UniformGrid> {
    UniformGrid::new((l, l, l), (n, n, n), BoundaryPolicy::DirichletZero).unwrap()
}

#[test]
fn initial_families() {
    let grid = box_grid(9, 2.0);
    let zero = build_initial(&InitialData::Bump { amplitude: 0.0, radius: 1.0 }, &grid).unwrap();
    assert!(zero.values().iter().all(|v| *v == 0.0));

    let pd = build_initial(&InitialData::PolyDecay { epsilon: 1.0, gamma: 2.0 }, &grid).unwrap();
    let center = grid.index(4, 4, 4);
    assert!((pd.values()[center] - 1.0).abs() < 1e-15);
    // At |eta|_H = 1 the formula gives 1/(1+1) = 0.5; node (1, 0, 0).
    let at_one = grid.index(6, 4, 4);
    assert_eq!(grid.x(6), 1.0);
    assert!((pd.values()[at_one] - 0.5).abs() < 1e-12);

    assert!(build_initial(&InitialData::PolyDecay { epsilon: 1.0, gamma: 0.0 }, &grid).is_err());
    assert!(build_initial(&InitialData::PolyDecay { epsilon: 1.0, gamma: -1.0 }, &grid).is_err());

    // Bump vanishes on the box boundary when it fits inside (gauge
    // support reaches |tau| = radius^2, so radius^2 must clear the box).
    let bump = build_initial(&InitialData::Bump { amplitude: 2.0, radius: 1.2 }, &grid).unwrap();
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            for k in 0..grid.ntau {
                if !grid.is_stencil_interior(i, j, k) {
                    assert_eq!(bump.values()[grid.index(i, j, k)], 0.0);
                }
            }
        }
    }
}

#[test]
fn zero_field_is_fixed_and_classified_decaying() {
    let grid = box_grid(9, 2.0);
    let params = PdeParams::porous_medium(2.0, 3.0, dims1()).unwrap();
    let control = StepControl::for_horizon(1.0);
    let record = run(
        &params,
        &InitialData::Bump { amplitude: 0.0, radius: 1.0 },
        &grid,
        &control,
        None,
    )
    .unwrap();
    assert_eq!(record.classification, Classification::NoBlowupDecaying);
    assert!(record.rows.iter().all(|r| r.sup_norm == 0.0 && r.mass == 0.0));
    assert!(record.rows.len() >= 10);
}

#[test]
fn constant_center_follows_reaction_ode() {
    // Far from the boundary, a constant field has zero stencil output, so
    // the center trajectory matches the discrete reaction ODE exactly
    // until boundary information can travel inward (one cell per step).
    let grid = box_grid(17, 2.0);
    let params = PdeParams::degenerate(1.0, 2.0, dims1()).unwrap();
    let c0 = 0.5;
    let mut field = ScalarField::sample(grid.clone(), |_, _, _| c0);
    let control = StepControl::for_horizon(10.0);
    let center = grid.index(8, 8, 8);
    let mut ode = c0;
    for _ in 0..7 {
        let (next, dt, _) = single_step(&params, &field, &control).unwrap();
        ode += dt * ode * ode; // u^q Delta u vanishes; reaction u^p with p = 2
        assert!(
            (next.values()[center] - ode).abs() <= 1e-14 * ode,
            "center {} vs ode {}",
            next.values()[center],
            ode
        );
        field = next;
    }
}

#[test]
fn porous_single_step_hand_oracle() {
    // 5^3 grid, h = 0.5, unit spike at the center, m = 1, sigma = 2.
    let grid = box_grid(5, 1.0);
    let params = PdeParams::porous_medium(1.0, 2.0, dims1()).unwrap();
    let control = StepControl::for_horizon(1.0);
    let mut vals = vec![0.0; grid.len()];
    let center = grid.index(2, 2, 2);
    vals[center] = 1.0;
    let field = ScalarField::from_values(grid.clone(), vals).unwrap();
    let (next, dt, clamp) = single_step(&params, &field, &control).unwrap();

    // Stencil intensity: base 16, tau coefficient 8*2/0.25 = 64 at the
    // corners, cross 16 + 16; dt = 0.25 / 112.
    assert!((dt - 0.25 / 112.0).abs() < 1e-15);
    assert_eq!(clamp, 0.0);

    // Center: linear heat drop -16 dt plus reaction dt * 1^2.
    let expect_center = 1.0 + dt * (-16.0 + 1.0);
    assert!((next.values()[center] - expect_center).abs() < 1e-14);
    // Face neighbor in x: heat gain dt * 1/h^2 = 4 dt, no reaction.
    let xn = grid.index(3, 2, 2);
    assert!((next.values()[xn] - dt * 4.0).abs() < 1e-14);
    // tau neighbor: diffusion coefficient 4(x^2+y^2) vanishes at x = y = 0.
    let tn = grid.index(2, 2, 3);
    assert_eq!(next.values()[tn], 0.0);
}

#[test]
fn classify_rules() {
    let row = |t: f64, sup: f64| DiagnosticsRow {
        t,
        dt: 0.01,
        sup_norm: sup,
        mass: sup,
        j_theta: 0.0,
        y_lambda: None,
        clamp_l1: 0.0,
    };
    let blow: Vec<_> = (0..12).map(|i| row(i as f64, if i == 11 { 1e9 } else { 1.0 })).collect();
    assert_eq!(classify(&blow, 1e8).unwrap(), Classification::BlowUp { t_star: 11.0 });

    let decay: Vec<_> = (0..12).map(|i| row(i as f64, 1.0 / (1.0 + i as f64))).collect();
    assert_eq!(classify(&decay, 1e8).unwrap(), Classification::NoBlowupDecaying);

    let wobble: Vec<_> = (0..12)
        .map(|i| row(i as f64, if i % 2 == 0 { 1.0 } else { 2.0 }))
        .collect();
    assert_eq!(classify(&wobble, 1e8).unwrap(), Classification::NoBlowupByHorizon);

    assert!(matches!(classify(&blow[..5], 1e8), Err(Error::TooFewRows(5, 10))));
}

#[test]
fn runs_are_deterministic() {
    let grid = box_grid(13, 3.0);
    let params = PdeParams::porous_medium(1.5, 2.0, dims1()).unwrap();
    let init = InitialData::Bump { amplitude: 0.8, radius: 1.5 };
    let mut control = StepControl::for_horizon(0.5);
    control.frame_dt = Some(0.1);
    let a = run(&params, &init, &grid, &control, None).unwrap();
    let b = run(&params, &init, &grid, &control, None).unwrap();
    assert_eq!(a.rows.len(), b.rows.len());
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert_eq!(ra.t.to_bits(), rb.t.to_bits());
        assert_eq!(ra.sup_norm.to_bits(), rb.sup_norm.to_bits());
        assert_eq!(ra.mass.to_bits(), rb.mass.to_bits());
    }
    for ((ta, fa), (tb, fb)) in a.frames.iter().zip(&b.frames) {
        assert_eq!(ta.to_bits(), tb.to_bits());
        for (x, y) in fa.values().iter().zip(fb.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn reflection_through_the_vertical_axis_is_preserved() {
    // (x, y, tau) -> (-x, -y, tau) is a group automorphism and the stencil
    // commutes with it exactly; data with that symmetry keeps it per step.
    let grid = box_grid(13, 2.0);
    let params = PdeParams::porous_medium(1.5, 2.5, dims1()).unwrap();
    let control = StepControl::for_horizon(1.0);
    // Symmetric but otherwise unstructured data.
    let mut field = ScalarField::sample(grid.clone(), |x, y, t| {
        let s = (x * y).abs() + 0.3 * (t + x * y).sin().abs();
        s * crate::analytic::smoothstep_profile(hnorm3(x, y, t) / 1.8).0
    });
    for _ in 0..5 {
        let (next, _, _) = single_step(&params, &field, &control).unwrap();
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                for k in 0..grid.ntau {
                    let a = next.values()[grid.index(i, j, k)];
                    let b = next.values()[grid.index(grid.nx - 1 - i, grid.ny - 1 - j, k)];
                    assert!(
                        (a - b).abs() <= 1e-12 * (1.0 + a.abs()),
                        "asymmetry {} at ({i},{j},{k})",
                        (a - b).abs()
                    );
                }
            }
        }
        field = next;
    }
}

#[test]
fn nonnegativity_and_clamp_accounting() {
    let grid = box_grid(11, 2.0);
    let params = PdeParams::porous_medium(2.0, 3.0, dims1()).unwrap();
    let init = InitialData::Bump { amplitude: 1.0, radius: 1.2 };
    let mut control = StepControl::for_horizon(0.3);
    control.frame_dt = Some(0.05);
    let record = run(&params, &init, &grid, &control, None).unwrap();
    for (_, f) in &record.frames {
        assert!(f.values().iter().all(|v| *v >= 0.0));
    }
    for r in &record.rows {
        assert!(r.clamp_l1 <= 1e-3 * (1.0 + r.mass), "clamp {} vs mass {}", r.clamp_l1, r.mass);
    }
}

#[test]
fn dt_underflow_without_growth_fails() {
    let grid = box_grid(9, 1.0);
    let params = PdeParams::porous_medium(1.0, 2.0, dims1()).unwrap();
    let mut control = StepControl::for_horizon(1.0);
    control.dt_min = 1.0; // force immediate underflow
    let record = run(
        &params,
        &InitialData::Bump { amplitude: 1.0, radius: 0.8 },
        &grid,
        &control,
        None,
    )
    .unwrap();
    assert!(matches!(record.classification, Classification::Failed { .. }));
}

#[test]
fn weak_residual_zero_run_and_support_guard() {
    let grid = box_grid(13, 2.0);
    let params = PdeParams::porous_medium(1.0, 2.0, dims1()).unwrap();
    let mut control = StepControl::for_horizon(0.4);
    control.frame_dt = Some(0.05);
    let record = run(
        &params,
        &InitialData::Bump { amplitude: 0.0, radius: 1.0 },
        &grid,
        &control,
        None,
    )
    .unwrap();
    let psi = CutoffSpec::boxed(dims1(), 1.5, 1.5, 4.0).unwrap();
    assert_eq!(weak_residual(&record, &psi).unwrap(), 0.0);

    // Support touching the box boundary is rejected.
    let wide = CutoffSpec::boxed(dims1(), 2.0, 1.5, 4.0).unwrap();
    assert!(matches!(weak_residual(&record, &wide), Err(Error::SupportTouchesBoundary)));
}

#[test]
fn truncation_flag_set_when_data_reaches_boundary() {
    let grid = box_grid(9, 1.0);
    let params = PdeParams::porous_medium(1.0, 2.0, dims1()).unwrap();
    let control = StepControl::for_horizon(0.5);
    // Poly decay does not vanish at the box boundary.
    let record = run(
        &params,
        &InitialData::PolyDecay { epsilon: 0.1, gamma: 3.0 },
        &grid,
        &control,
        None,
    )
    .unwrap();
    assert!(record.truncation_flagged);

    // A small compactly supported bump on a large box stays clean.
    let grid = box_grid(17, 4.0);
    let record = run(
        &params,
        &InitialData::Bump { amplitude: 0.2, radius: 1.0 },
        &grid,
        &StepControl::for_horizon(0.02),
        None,
    )
    .unwrap();
    assert!(!record.truncation_flagged);
}

#[test]
fn scaled_profile_initial_data() {
    let grid = box_grid(9, 2.0);
    let w = build_initial(&InitialData::Bump { amplitude: 1.0, radius: 1.5 }, &grid).unwrap();
    let scaled = build_initial(
        &InitialData::ScaledProfile { amplitude: 3.0, profile: w.clone() },
        &grid,
    )
    .unwrap();
    for (s, b) in scaled.values().iter().zip(w.values()) {
        assert!((s - 3.0 * b).abs() <= 1e-15 * (1.0 + b.abs()));
    }
    // Mismatched grid rejected.
    let other = box_grid(9, 3.0);
    assert!(build_initial(
        &InitialData::ScaledProfile { amplitude: 1.0, profile: w },
        &other
    )
    .is_err());
}
