//! Subcommand implementations: each returns the rows for its output
//! schema; the dispatcher assembles headers and exit codes.

use std::sync::Arc;

use heislab::analytic::{
    capacity_scaling_report, cutoff_scaling_report, default_ell, product_rule_defect,
    theta_bound_check, theta_eval, theta_jet, CutoffSpec, ThetaSpec,
};
use heislab::eigen::{
    ball_grid, decay_consistency, hopf_boundary_check, principal_eigenpair_with, EigenOptions,
};
use heislab::error::{Error, Result};
use heislab::hgeom::{d_h_exact, BoundaryPolicy, GroupDims, GroupPoint, UniformGrid};
use heislab::poly::Poly;
use heislab::sampling::HaltonSampler;
use heislab::solver::{
    build_initial, run, Equation, InitialData, PdeParams, RunRecord, StepControl,
};
use heislab::transform::{map_field_to, map_params, mapped_grid, transform_residual};

use crate::config::Config;
use crate::csvout::{SweepRow, VerifyRow};

pub fn grid_from(config: &Config) -> Result<Arc<UniformGrid>> {
    let policy = match config.grid_boundary.as_str() {
        "ball_mask" => BoundaryPolicy::BallMask { radius: config.grid_ball_radius },
        _ => BoundaryPolicy::DirichletZero,
    };
    UniformGrid::new(
        (config.grid_lx, config.grid_ly, config.grid_ltau),
        (config.grid_nx, config.grid_ny, config.grid_ntau),
        policy,
    )
}

pub fn params_from(config: &Config) -> Result<PdeParams> {
    let dims = GroupDims::new(1)?;
    match config.equation_family.as_str() {
        "degenerate" => PdeParams::degenerate(config.equation_q, config.equation_p, dims),
        _ => PdeParams::porous_medium(config.equation_m, config.equation_sigma, dims),
    }
}

pub fn initial_from(config: &Config) -> InitialData {
    match config.initial_family.as_str() {
        "poly_decay" => InitialData::PolyDecay {
            epsilon: config.initial_epsilon,
            gamma: config.initial_gamma,
        },
        _ => InitialData::Bump {
            amplitude: config.initial_amplitude,
            radius: config.initial_radius,
        },
    }
}

pub fn control_from(config: &Config) -> StepControl {
    StepControl {
        cfl_safety: config.control_cfl_safety,
        growth_cap: config.control_growth_cap,
        dt_min: config.control_dt_min,
        t_max: config.control_t_max,
        blowup_threshold: config.control_blowup_threshold,
        row_dt: config.row_dt(),
        frame_dt: config.control_frame_dt,
        reaction_off: false,
    }
}

/// Machine checks of the pointwise identities: the product rule on random
/// cubic pairs and the exponential-weight decay bound, plus the two-route
/// agreement of the weight's sub-Laplacian.
pub fn cmd_verify_lemmas(samples: usize, seed: u64) -> Result<Vec<VerifyRow>> {
    let dims = GroupDims::new(1)?;
    let mut rows = Vec::new();

    // Product rule on random cubic polynomial pairs at sampled points.
    let mut sampler = HaltonSampler::new(3, seed);
    let mut unit = [0.0; 3];
    let mut points = Vec::with_capacity(1000);
    for _ in 0..1000 {
        sampler.next_point(&mut unit);
        points.push(GroupPoint::p3(
            6.0 * unit[0] - 3.0,
            6.0 * unit[1] - 3.0,
            6.0 * unit[2] - 3.0,
        ));
    }
    let mut coeff_sampler = HaltonSampler::new(4, seed ^ 0x9e37);
    let mut cu = [0.0; 4];
    let mut worst_rel = 0.0f64;
    for _ in 0..25 {
        let mut build = |s: &mut HaltonSampler| {
            let mut terms = Vec::new();
            for ex in 0..=3u32 {
                for ey in 0..=3u32 {
                    for et in 0..=3u32 {
                        if ex + ey + et <= 3 {
                            s.next_point(&mut cu);
                            terms.push((vec![ex, ey, et], 2.0 * cu[0] - 1.0));
                        }
                    }
                }
            }
            Poly::from_terms(1, &terms)
        };
        let u = build(&mut coeff_sampler);
        let v = build(&mut coeff_sampler);
        let rep = product_rule_defect(&u, &v, &points);
        worst_rel = worst_rel.max(rep.max_rel);
    }
    rows.push(VerifyRow::bounded_above("product_rule_rel_defect", 0.0, worst_rel, 1e-8));

    // Decay bound over the (eps, A) grid; bound coefficient 2 eps (Q+2).
    for eps in [0.5, 1.0, 2.0] {
        for a in [0.5, 1.0] {
            let spec = ThetaSpec::new(eps, a, dims)?;
            let name = format!("theta_bound_eps{eps}_A{a}");
            match theta_bound_check(&spec, 5.0, samples, seed) {
                Ok(report) => rows.push(VerifyRow::bounded_above(
                    &name,
                    1.0,
                    report.max_slack_ratio,
                    1e-12,
                )),
                Err(_) => rows.push(VerifyRow {
                    check_name: name,
                    target: 1.0,
                    measured: f64::INFINITY,
                    tolerance: 1e-12,
                    pass: false,
                }),
            }
        }
    }
    // Equal-exponent weight: the coefficient collapses to 1/2.
    let spec = ThetaSpec::equal_exponent_weight(dims);
    let name = "theta_bound_equal_exponent_half";
    match theta_bound_check(&spec, 5.0, samples, seed) {
        Ok(report) => {
            rows.push(VerifyRow::bounded_above(name, 1.0, report.max_slack_ratio, 1e-12))
        }
        Err(_) => rows.push(VerifyRow {
            check_name: name.into(),
            target: 1.0,
            measured: f64::INFINITY,
            tolerance: 1e-12,
            pass: false,
        }),
    }

    // Closed-form laplacian against the jet route.
    let spec = ThetaSpec::new(1.0, 1.0, dims)?;
    let mut sampler = HaltonSampler::new(3, seed ^ 0xc0ffee);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        sampler.next_point(&mut unit);
        let p = GroupPoint::p3(8.0 * unit[0] - 4.0, 8.0 * unit[1] - 4.0, 8.0 * unit[2] - 4.0);
        let (_, lap) = theta_eval(&spec, &p);
        let lap_jet = d_h_exact(&theta_jet(&spec, &p), &p);
        worst = worst.max((lap_jet - lap).abs() / (1.0 + lap.abs()));
    }
    rows.push(VerifyRow::bounded_above("theta_two_route_rel_diff", 0.0, worst, 1e-9));
    Ok(rows)
}

/// Cutoff and capacity scaling rates against their analytic exponents.
pub fn cmd_verify_scaling() -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    let cut = cutoff_scaling_report(1.0, &[4.0, 8.0, 16.0, 32.0])?;
    rows.push(VerifyRow::banded(
        "cutoff_laplacian_slope",
        cut.laplacian.target_slope,
        cut.laplacian.fitted_slope,
        cut.laplacian.slope_tolerance,
    ));
    rows.push(VerifyRow::banded(
        "cutoff_gradient_slope",
        cut.gradient.target_slope,
        cut.gradient.fitted_slope,
        cut.gradient.slope_tolerance,
    ));
    let horizons = [8.0, 16.0, 32.0, 64.0];
    for (m, sigma) in [(1.0, 1.25), (1.5, 1.75), (1.0, 1.5)] {
        let ell = default_ell(m, sigma);
        let cap = capacity_scaling_report(m, sigma, ell, &horizons)?;
        rows.push(VerifyRow::banded(
            &format!("capacity_J1_slope_m{m}_sigma{sigma}"),
            cap.j1.target_slope,
            cap.j1.fitted_slope,
            cap.j1.slope_tolerance,
        ));
        rows.push(VerifyRow::banded(
            &format!("capacity_J2_slope_m{m}_sigma{sigma}"),
            cap.j2.target_slope,
            cap.j2.fitted_slope,
            cap.j2.slope_tolerance,
        ));
    }
    Ok(rows)
}

/// Principal eigenpair on the configured ball with its structural checks.
pub fn cmd_eigen(config: &Config) -> Result<Vec<VerifyRow>> {
    let grid = grid_from(config)?;
    let opts =
        EigenOptions { tol: config.eigen_tol, max_steps: config.eigen_max_steps, seed: None };
    let pair = principal_eigenpair_with(config.eigen_radius, &grid, &opts)?;
    let mut rows = Vec::new();
    rows.push(VerifyRow {
        check_name: "lambda1_positive".into(),
        target: 0.0,
        measured: pair.lambda1,
        tolerance: 0.0,
        pass: pair.lambda1 > 0.0,
    });
    rows.push(VerifyRow::banded("eigen_integral_one", 1.0, pair.eigenfunction().mass(), 1e-6));
    rows.push(VerifyRow::bounded_above("eigen_residual", 0.0, pair.residual, config.eigen_tol));
    let min_interior = pair
        .eigenfunction()
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| !pair.eigenfunction().grid().is_masked(*i))
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    rows.push(VerifyRow {
        check_name: "eigen_interior_positive".into(),
        target: 0.0,
        measured: min_interior,
        tolerance: 0.0,
        pass: min_interior > 0.0,
    });
    match hopf_boundary_check(&pair) {
        Ok(report) => rows.push(VerifyRow {
            check_name: "hopf_min_inward_slope".into(),
            target: 0.0,
            measured: report.min_inward_slope,
            tolerance: 1e-12,
            pass: report.min_inward_slope >= -1e-12,
        }),
        Err(_) => rows.push(VerifyRow {
            check_name: "hopf_min_inward_slope".into(),
            target: 0.0,
            measured: f64::NEG_INFINITY,
            tolerance: 1e-12,
            pass: false,
        }),
    }

    // Independent decay estimate of lambda1 from a pure diffusion run
    // seeded with the eigenfunction itself.
    let dims = GroupDims::new(1)?;
    let ball = ball_grid(&grid, pair.ball_radius)?;
    let params = PdeParams::porous_medium(1.0, 2.0, dims)?;
    let horizon = 2.0 / pair.lambda1;
    let control = StepControl { reaction_off: true, ..StepControl::for_horizon(horizon) };
    let init =
        InitialData::ScaledProfile { amplitude: 1.0, profile: pair.eigenfunction().clone() };
    let record = run(&params, &init, &ball, &control, None)?;
    let err = decay_consistency(&pair, &record)?;
    rows.push(VerifyRow::bounded_above("heat_decay_lambda_rel_err", 0.0, err, 0.02));
    Ok(rows)
}

pub fn cmd_run(config: &Config) -> Result<RunRecord> {
    let grid = grid_from(config)?;
    let params = params_from(config)?;
    let initial = initial_from(config);
    let control = control_from(config);
    run(&params, &initial, &grid, &control, None)
}

/// FNV-1a over the canonical parameter tuple, mixed with the master seed.
pub fn run_seed(master: u64, m_or_q: f64, sigma_or_p: f64, amplitude: f64) -> u64 {
    let text = format!("{m_or_q:.12e}|{sigma_or_p:.12e}|{amplitude:.12e}");
    let mut hash = 0xcbf29ce484222325u64;
    for b in text.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash ^ master
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

/// Run the configured sweep with bounded parallelism; rows come back in
/// sorted parameter order regardless of scheduling.
pub fn cmd_sweep(config: &Config, parallelism: usize) -> Result<Vec<SweepRow>> {
    let grid = grid_from(config)?;
    let control = control_from(config);
    let dims = GroupDims::new(1)?;
    let porous = config.equation_family == "porous_medium";
    let exponents = if porous {
        linspace(config.sweep_sigma_min, config.sweep_sigma_max, config.sweep_sigma_steps)
    } else {
        linspace(config.sweep_p_min, config.sweep_p_max, config.sweep_p_steps)
    };

    let mut plan = Vec::new();
    for &e in &exponents {
        for &amp in &config.sweep_amplitudes {
            plan.push((e, amp));
        }
    }
    plan.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let results: Vec<Result<SweepRow>> = pool.install(|| {
        use rayon::prelude::*;
        plan.par_iter()
            .map(|&(exponent, amp)| {
                let params = if porous {
                    PdeParams::porous_medium(config.equation_m, exponent, dims)?
                } else {
                    PdeParams::degenerate(config.equation_q, exponent, dims)?
                };
                let m_or_q = if porous { config.equation_m } else { config.equation_q };
                let _seed = run_seed(config.sweep_master_seed, m_or_q, exponent, amp);
                let initial = InitialData::Bump { amplitude: amp, radius: config.initial_radius };
                let record = run(&params, &initial, &grid, &control, None)?;
                let last = record.rows.last().expect("runs always record rows");
                Ok(SweepRow {
                    m_or_q,
                    sigma_or_p: exponent,
                    amplitude: amp,
                    classification: record.classification.label().to_string(),
                    t_blow: record.blow_up_time(),
                    t_max_reached: last.t,
                    sup_final: last.sup_norm,
                })
            })
            .collect()
    });
    results.into_iter().collect()
}

/// Transform checks: parameter identities, the mapped-run weak residual
/// under one refinement, and blow-up agreement between the degenerate run
/// and its simulated porous-medium twin.
pub fn cmd_transform_check(config: &Config) -> Result<Vec<VerifyRow>> {
    if config.equation_family != "degenerate" {
        return Err(Error::InvalidParameter(
            "transform-check needs equation.family = degenerate".into(),
        ));
    }
    let q = config.equation_q;
    let p = config.equation_p;
    let tp = map_params(q, p)?;
    let dims = GroupDims::new(1)?;
    let mut rows = Vec::new();

    let omq = 1.0 - q;
    let a_pow = tp.a.powf(p - 1.0);
    let a_target = omq.powf(omq);
    rows.push(VerifyRow::bounded_above(
        "param_identity_a",
        0.0,
        (a_pow - a_target).abs() / (1.0 + a_target.abs()),
        1e-14,
    ));
    let b_sq = tp.b * tp.b;
    let b_target = omq.powf((p - 1.0 - q) / (p - 1.0));
    rows.push(VerifyRow::bounded_above(
        "param_identity_b",
        0.0,
        (b_sq - b_target).abs() / (1.0 + b_target.abs()),
        1e-14,
    ));
    rows.push(VerifyRow::bounded_above(
        "param_identity_sigma_minus_m",
        0.0,
        ((tp.sigma - tp.m) - (p - 1.0 - q) / omq).abs() / (1.0 + tp.sigma),
        1e-14,
    ));

    // Degenerate run with frames.
    let grid = grid_from(config)?;
    let mut control = control_from(config);
    if control.frame_dt.is_none() {
        control.frame_dt = Some(control.t_max / 32.0);
    }
    let params = PdeParams::degenerate(q, p, dims)?;
    let initial = initial_from(config);
    let record_u = run(&params, &initial, &grid, &control, None)?;

    // Mapped weak residual at the run resolution and at half resolution.
    let target = mapped_grid(&grid, &tp)?;
    let psi = CutoffSpec::boxed(
        dims,
        0.7 * target.lx.min(target.ly),
        0.7 * target.ltau,
        4.0,
    )?;
    let residual_fine = transform_residual(&record_u, &tp, &psi)?;
    let coarse = |n: usize| (n / 2 + 1).max(9);
    let coarse_grid = UniformGrid::new(
        (grid.lx, grid.ly, grid.ltau),
        (coarse(grid.nx), coarse(grid.ny), coarse(grid.ntau)),
        BoundaryPolicy::DirichletZero,
    )?;
    let record_coarse = run(&params, &initial, &coarse_grid, &control, None)?;
    let residual_coarse = transform_residual(&record_coarse, &tp, &psi)?;
    let order = (residual_coarse / residual_fine).log2();
    rows.push(VerifyRow {
        check_name: "mapped_residual_refinement_order".into(),
        target: 0.9,
        measured: order,
        tolerance: 0.0,
        pass: order >= 0.9,
    });

    // Twin simulation with mapped initial data on the mapped grid.
    let u0 = build_initial(&initial, &grid)?;
    let v0 = map_field_to(&u0, &tp, &target)?;
    let twin_params =
        PdeParams { equation: Equation::PorousMedium { m: tp.m, sigma: tp.sigma }, dims };
    let twin_initial = InitialData::ScaledProfile { amplitude: 1.0, profile: v0 };
    let record_v = run(&twin_params, &twin_initial, &target, &control, None)?;
    let labels_match = record_u.classification.label() == record_v.classification.label();
    rows.push(VerifyRow {
        check_name: "twin_classification_match".into(),
        target: 0.0,
        measured: if labels_match { 0.0 } else { 1.0 },
        tolerance: 0.0,
        pass: labels_match,
    });
    if let (Some(tu), Some(tv)) = (record_u.blow_up_time(), record_v.blow_up_time()) {
        rows.push(VerifyRow::bounded_above(
            "twin_blowup_time_rel_diff",
            0.0,
            (tu - tv).abs() / tu.max(tv),
            0.2,
        ));
    }
    Ok(rows)
}
