use heislab::analytic::CutoffSpec;
use heislab::hgeom::*;
use heislab::solver::*;
use std::time::Instant;

fn main() {
    let dims = GroupDims::new(1).unwrap();
    let grid = UniformGrid::new((3.0, 3.0, 9.0), (33, 33, 33), BoundaryPolicy::DirichletZero).unwrap();
    let psi = CutoffSpec::boxed(dims, 2.4, 7.2, 4.0).unwrap();
    // Probe the jet magnitudes over the grid.
    let mut max_val = 0.0f64;
    let mut max_lap = 0.0f64;
    let mut argmax = (0.0, 0.0, 0.0);
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            for k in 0..grid.ntau {
                let p = GroupPoint::p3(grid.x(i), grid.y(j), grid.tau(k));
                let jet = psi.jet(&p);
                let lap = d_h_exact(&jet, &p).abs();
                max_val = max_val.max(jet.value);
                if lap > max_lap { max_lap = lap; argmax = (grid.x(i), grid.y(j), grid.tau(k)); }
            }
        }
    }
    println!("psi max value {max_val:.3e}, max |L psi| {max_lap:.3e} at {argmax:?}");

    // Identity parts on a tiny static "run": v = constant 1 in a sub-box, frames trivial.
    let params = PdeParams::degenerate(0.0, 2.0, dims).unwrap();
    let mut control = StepControl::for_horizon(0.1);
    control.frame_dt = Some(0.1 / 8.0);
    let init = InitialData::Bump { amplitude: 6.0, radius: 1.2 };
    let t0 = Instant::now();
    let record = run(&params, &init, &grid, &control, None).unwrap();
    println!("frames {} class {} ({:.1?})", record.frames.len(), record.classification.label(), t0.elapsed());
    let cell = grid.cell_volume();
    for (t, f) in record.frames.iter().take(2) {
        let mut s_sigma = 0.0; let mut s_m = 0.0; let mut s_v = 0.0;
        let mut idx = 0;
        for i in 0..grid.nx { for j in 0..grid.ny { for k in 0..grid.ntau {
            let p = GroupPoint::p3(grid.x(i), grid.y(j), grid.tau(k));
            let jet = psi.jet(&p);
            let lap = d_h_exact(&jet, &p);
            let v = f.values()[idx];
            s_sigma += v * v * jet.value;
            s_m += v * lap;
            s_v += v * jet.value;
            idx += 1;
        }}}
        println!("t={t:.4}: int v^2 psi = {:.4e}, int v L(psi) = {:.4e}, int v psi = {:.4e}",
            s_sigma * cell, s_m * cell, s_v * cell);
    }
}
