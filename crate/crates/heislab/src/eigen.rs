//! Principal Dirichlet eigenpair of the (negated) sub-Laplacian on a
//! discretized gauge ball, by heat-semigroup power iteration: repeated
//! explicit heat steps under the ball mask, renormalizing each sweep.
//! The per-step decay factor yields lambda1; the limit field is positive
//! by construction, which is the point of iterating the semigroup instead
//! of an algebraic eigensolver on the non-symmetric stencil matrix.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hgeom::{
    hnorm3, stencil_intensity, sub_laplacian_into, BoundaryPolicy, ScalarField, UniformGrid,
};
use crate::solver::RunRecord;

/// Converged principal pair (lambda1, Lambda) with int Lambda = 1.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda1: f64,
    eigenfunction: ScalarField,
    pub residual: f64,
    pub ball_radius: f64,
}

impl EigenPair {
    pub fn eigenfunction(&self) -> &ScalarField {
        &self.eigenfunction
    }
}

/// Options for the iteration; `seed` warm-starts from an interpolated
/// coarse solution (same fixed point, fewer sweeps).
#[derive(Debug, Clone)]
pub struct EigenOptions<'a> {
    pub tol: f64,
    pub max_steps: usize,
    pub seed: Option<&'a ScalarField>,
}

impl Default for EigenOptions<'_> {
    fn default() -> Self {
        EigenOptions { tol: 1e-3, max_steps: 400_000, seed: None }
    }
}

/// Masked grid for the ball: same box and counts as the template grid.
pub fn ball_grid(template: &UniformGrid, radius: f64) -> Result<Arc<UniformGrid>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("ball radius must be positive".into()));
    }
    // The gauge ball reaches |x|, |y| <= radius and |tau| <= radius^2;
    // it must sit strictly inside the box with a one-cell margin.
    if radius > template.lx - template.hx
        || radius > template.ly - template.hy
        || radius * radius > template.ltau - template.htau
    {
        return Err(Error::InvalidParameter(
            "ball does not fit strictly inside the grid box".into(),
        ));
    }
    UniformGrid::new(
        (template.lx, template.ly, template.ltau),
        (template.nx, template.ny, template.ntau),
        BoundaryPolicy::BallMask { radius },
    )
}

pub fn principal_eigenpair(
    radius: f64,
    template: &UniformGrid,
    tol: f64,
) -> Result<EigenPair> {
    principal_eigenpair_with(radius, template, &EigenOptions { tol, ..Default::default() })
}

pub fn principal_eigenpair_with(
    radius: f64,
    template: &UniformGrid,
    opts: &EigenOptions<'_>,
) -> Result<EigenPair> {
    let grid = ball_grid(template, radius)?;
    let n = grid.len();
    let interior: usize = (0..n).filter(|&i| !grid.is_masked(i)).count();
    if interior == 0 {
        return Err(Error::InvalidParameter("ball mask leaves no interior nodes".into()));
    }

    let mut v = match opts.seed {
        Some(seed) => {
            let mut vals = vec![0.0; n];
            let mut idx = 0;
            for i in 0..grid.nx {
                for j in 0..grid.ny {
                    for k in 0..grid.ntau {
                        if !grid.is_masked(idx) {
                            vals[idx] = seed
                                .interpolate(grid.x(i), grid.y(j), grid.tau(k))
                                .unwrap_or(0.0)
                                .max(0.0);
                        }
                        idx += 1;
                    }
                }
            }
            vals
        }
        None => {
            let mut vals = vec![0.0; n];
            let mut idx = 0;
            for i in 0..grid.nx {
                for j in 0..grid.ny {
                    for k in 0..grid.ntau {
                        if !grid.is_masked(idx) {
                            let r = hnorm3(grid.x(i), grid.y(j), grid.tau(k)) / radius;
                            vals[idx] = 1.0 - r * r * r * r;
                        }
                        idx += 1;
                    }
                }
            }
            vals
        }
    };
    if v.iter().all(|x| *x <= 0.0) {
        return Err(Error::InvalidParameter("seed field vanishes on the ball".into()));
    }

    let intensity = stencil_intensity(&grid);
    let dt = 0.9 / intensity;
    let sweep = 32usize;
    let mut lap = vec![0.0; n];
    let mut lambda_prev = f64::INFINITY;
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut steps = 0usize;

    while steps < opts.max_steps {
        let before: f64 = v.iter().sum();
        for _ in 0..sweep {
            sub_laplacian_into(&grid, &v, &mut lap);
            for idx in 0..n {
                if !grid.is_masked(idx) {
                    v[idx] += dt * lap[idx];
                }
            }
            steps += 1;
        }
        let after: f64 = v.iter().sum();
        if !(after > 0.0) || !after.is_finite() {
            return Err(Error::NotConverged(steps, f64::INFINITY));
        }
        let factor = (after / before).powf(1.0 / sweep as f64);
        lambda = (1.0 - factor) / dt;
        let scale = 1.0 / after;
        for x in v.iter_mut() {
            *x *= scale;
        }

        // Residual ||L v + lambda v|| / (lambda ||v||) on interior nodes.
        sub_laplacian_into(&grid, &v, &mut lap);
        let mut num = 0.0;
        let mut den = 0.0;
        for idx in 0..n {
            if !grid.is_masked(idx) {
                let r = lap[idx] + lambda * v[idx];
                num += r * r;
                den += v[idx] * v[idx];
            }
        }
        residual = (num / den).sqrt() / lambda.abs().max(f64::MIN_POSITIVE);
        let lambda_drift = (lambda - lambda_prev).abs() / lambda.abs().max(f64::MIN_POSITIVE);
        lambda_prev = lambda;
        if residual <= opts.tol && lambda_drift <= opts.tol {
            break;
        }
    }
    if residual > opts.tol {
        return Err(Error::NotConverged(steps, residual));
    }
    if !(lambda > 0.0) {
        return Err(Error::NotConverged(steps, residual));
    }

    // Normalize to unit integral and insist on interior positivity.
    let mass: f64 = v.iter().sum::<f64>() * grid.cell_volume();
    for x in v.iter_mut() {
        *x /= mass;
    }
    for idx in 0..n {
        if !grid.is_masked(idx) && !(v[idx] > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "non-positive interior eigenfunction value at node {idx}; stencil or mask bug"
            )));
        }
    }
    let eigenfunction = ScalarField::from_values(grid, v)?;
    Ok(EigenPair { lambda1: lambda, eigenfunction, residual, ball_radius: radius })
}

/// Hopf-type boundary sign report: every interior node adjacent to the
/// mask must not dip below its zero neighbor.
#[derive(Debug, Clone, Copy)]
pub struct HopfReport {
    pub boundary_pairs: usize,
    pub min_inward_slope: f64,
}

pub fn hopf_boundary_check(pair: &EigenPair) -> Result<HopfReport> {
    hopf_check_field(pair.eigenfunction())
}

/// Same check on a raw masked field (negative-control friendly).
pub fn hopf_check_field(field: &ScalarField) -> Result<HopfReport> {
    let grid = field.grid();
    if grid.mask().is_none() {
        return Err(Error::InvalidParameter("Hopf check needs a ball-masked grid".into()));
    }
    let v = field.values();
    let mut pairs = 0usize;
    let mut min_slope = f64::INFINITY;
    let spacing = [grid.hx, grid.hy, grid.htau];
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            for k in 0..grid.ntau {
                let idx = grid.index(i, j, k);
                if grid.is_masked(idx) {
                    continue;
                }
                let neighbors: [(isize, isize, isize, usize); 6] = [
                    (-1, 0, 0, 0),
                    (1, 0, 0, 0),
                    (0, -1, 0, 1),
                    (0, 1, 0, 1),
                    (0, 0, -1, 2),
                    (0, 0, 1, 2),
                ];
                for (di, dj, dk, axis) in neighbors {
                    let ii = i as isize + di;
                    let jj = j as isize + dj;
                    let kk = k as isize + dk;
                    let outside = ii < 0
                        || jj < 0
                        || kk < 0
                        || ii >= grid.nx as isize
                        || jj >= grid.ny as isize
                        || kk >= grid.ntau as isize
                        || grid.is_masked(grid.index(ii as usize, jj as usize, kk as usize));
                    if outside {
                        pairs += 1;
                        let slope = v[idx] / spacing[axis];
                        min_slope = min_slope.min(slope);
                        if slope < -1e-12 {
                            return Err(Error::BoundViolated {
                                point: (grid.x(i), grid.y(j), grid.tau(k)),
                                lhs: -slope,
                                rhs: 1e-12,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(HopfReport { boundary_pairs: pairs, min_inward_slope: min_slope })
}

/// Relative disagreement between lambda1 and the decay rate of a pure
/// diffusion run on the same mask: least-squares slope of ln(mass) vs t
/// over the trailing half of the rows.
pub fn decay_consistency(pair: &EigenPair, heat_record: &RunRecord) -> Result<f64> {
    if !heat_record.grid.same_nodes(pair.eigenfunction().grid()) {
        return Err(Error::GridMismatch("heat run grid differs from eigen grid".into()));
    }
    let usable: Vec<(f64, f64)> = heat_record
        .rows
        .iter()
        .filter(|r| r.mass > 0.0)
        .map(|r| (r.t, r.mass.ln()))
        .collect();
    if usable.len() < 6 {
        return Err(Error::RunTooShort(usable.len()));
    }
    let tail = &usable[usable.len() / 2..];
    let n = tail.len() as f64;
    let mt = tail.iter().map(|(t, _)| t).sum::<f64>() / n;
    let ml = tail.iter().map(|(_, l)| l).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, l) in tail {
        num += (t - mt) * (l - ml);
        den += (t - mt) * (t - mt);
    }
    if den == 0.0 {
        return Err(Error::RunTooShort(tail.len()));
    }
    let rate = -num / den;
    Ok((rate - pair.lambda1).abs() / pair.lambda1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgeom::BoundaryPolicy;

    fn small_ball() -> (Arc<UniformGrid>, EigenPair) {
        let template =
            UniformGrid::new((1.3, 1.3, 1.3), (21, 21, 21), BoundaryPolicy::DirichletZero)
                .unwrap();
        let pair = principal_eigenpair(1.0, &template, 2e-3).unwrap();
        (template, pair)
    }

    #[test]
    fn converged_pair_properties() {
        let (_, pair) = small_ball();
        assert!(pair.lambda1 > 0.0);
        let mass = pair.eigenfunction().mass();
        assert!((mass - 1.0).abs() <= 1e-6, "mass {mass}");
        let grid = pair.eigenfunction().grid();
        for idx in 0..grid.len() {
            if grid.is_masked(idx) {
                assert_eq!(pair.eigenfunction().values()[idx], 0.0);
            } else {
                assert!(pair.eigenfunction().values()[idx] > 0.0);
            }
        }
        assert!(pair.residual <= 2e-3);
    }

    #[test]
    fn hopf_sign_and_negative_control() {
        let (_, pair) = small_ball();
        let report = hopf_boundary_check(&pair).unwrap();
        assert!(report.boundary_pairs > 0);
        assert!(report.min_inward_slope >= 0.0);

        // Sign-flipped eigenfunction violates everywhere.
        let grid = pair.eigenfunction().grid().clone();
        let flipped: Vec<f64> = pair.eigenfunction().values().iter().map(|v| -v).collect();
        let bad = ScalarField::from_values(grid.clone(), flipped).unwrap();
        assert!(hopf_check_field(&bad).is_err());

        // Constant-one masked field passes.
        let ones = ScalarField::sample(grid, |_, _, _| 1.0);
        let report = hopf_check_field(&ones).unwrap();
        assert!(report.min_inward_slope >= 0.0);
    }

    #[test]
    fn ball_must_fit() {
        let template =
            UniformGrid::new((0.9, 0.9, 0.9), (9, 9, 9), BoundaryPolicy::DirichletZero).unwrap();
        assert!(ball_grid(&template, 1.0).is_err());
    }
}
