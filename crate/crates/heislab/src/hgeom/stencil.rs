use super::grid::{ScalarField, UniformGrid};
use crate::error::{Error, Result};

/// Second-order finite-difference sub-Laplacian, written into `out`.
///
/// Central differences on the expanded operator; the mixed y-tau and
/// x-tau derivatives use the symmetric 4-point cross stencil, so the
/// pass is exact on quadratics and on bilinear mixed terms.  Off-grid
/// neighbors read ghost zeros; masked nodes hold zero and emit zero.
pub fn sub_laplacian_into(grid: &UniformGrid, v: &[f64], out: &mut [f64]) {
    assert_eq!(v.len(), grid.len());
    assert_eq!(out.len(), grid.len());
    let (nx, ny, nt) = (grid.nx, grid.ny, grid.ntau);
    let sj = nt;
    let si = ny * nt;
    let ax = 1.0 / (grid.hx * grid.hx);
    let ay = 1.0 / (grid.hy * grid.hy);
    let at = 1.0 / (grid.htau * grid.htau);
    let cyt = 1.0 / (grid.hy * grid.htau);
    let cxt = 1.0 / (grid.hx * grid.htau);

    let get = |ii: isize, jj: isize, kk: isize| -> f64 {
        if ii < 0 || jj < 0 || kk < 0 || ii >= nx as isize || jj >= ny as isize || kk >= nt as isize {
            0.0
        } else {
            v[(ii as usize * ny + jj as usize) * nt + kk as usize]
        }
    };

    for i in 0..nx {
        let x = grid.x(i);
        for j in 0..ny {
            let y = grid.y(j);
            let coef_t = 4.0 * (x * x + y * y) * at;
            let base = (i * ny + j) * nt;
            let bulk = i >= 1 && i + 1 < nx && j >= 1 && j + 1 < ny;
            if bulk {
                for k in 1..nt - 1 {
                    let c = base + k;
                    let vc = v[c];
                    out[c] = ax * (v[c - si] - 2.0 * vc + v[c + si])
                        + ay * (v[c - sj] - 2.0 * vc + v[c + sj])
                        + coef_t * (v[c - 1] - 2.0 * vc + v[c + 1])
                        + x * cyt
                            * (v[c + sj + 1] - v[c + sj - 1] - v[c - sj + 1] + v[c - sj - 1])
                        - y * cxt
                            * (v[c + si + 1] - v[c + si - 1] - v[c - si + 1] + v[c - si - 1]);
                }
                for k in [0, nt - 1] {
                    let (ii, jj, kk) = (i as isize, j as isize, k as isize);
                    let vc = v[base + k];
                    out[base + k] = ax * (get(ii - 1, jj, kk) - 2.0 * vc + get(ii + 1, jj, kk))
                        + ay * (get(ii, jj - 1, kk) - 2.0 * vc + get(ii, jj + 1, kk))
                        + coef_t * (get(ii, jj, kk - 1) - 2.0 * vc + get(ii, jj, kk + 1))
                        + x * cyt
                            * (get(ii, jj + 1, kk + 1) - get(ii, jj + 1, kk - 1)
                                - get(ii, jj - 1, kk + 1) + get(ii, jj - 1, kk - 1))
                        - y * cxt
                            * (get(ii + 1, jj, kk + 1) - get(ii + 1, jj, kk - 1)
                                - get(ii - 1, jj, kk + 1) + get(ii - 1, jj, kk - 1));
                }
            } else {
                for k in 0..nt {
                    let (ii, jj, kk) = (i as isize, j as isize, k as isize);
                    let vc = v[base + k];
                    out[base + k] = ax * (get(ii - 1, jj, kk) - 2.0 * vc + get(ii + 1, jj, kk))
                        + ay * (get(ii, jj - 1, kk) - 2.0 * vc + get(ii, jj + 1, kk))
                        + coef_t * (get(ii, jj, kk - 1) - 2.0 * vc + get(ii, jj, kk + 1))
                        + x * cyt
                            * (get(ii, jj + 1, kk + 1) - get(ii, jj + 1, kk - 1)
                                - get(ii, jj - 1, kk + 1) + get(ii, jj - 1, kk - 1))
                        - y * cxt
                            * (get(ii + 1, jj, kk + 1) - get(ii + 1, jj, kk - 1)
                                - get(ii - 1, jj, kk + 1) + get(ii - 1, jj, kk - 1));
                }
            }
        }
    }

    if let Some(mask) = grid.mask() {
        for (o, &m) in out.iter_mut().zip(mask) {
            if m {
                *o = 0.0;
            }
        }
    }
}

/// Finite-difference sub-Laplacian of a sampled field.
pub fn d_h_fd(f: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid().clone();
    if grid.nx < 5 || grid.ny < 5 || grid.ntau < 5 {
        return Err(Error::GridTooSmall(grid.nx, grid.ny, grid.ntau));
    }
    if !f.is_finite() {
        return Err(Error::NonFiniteField);
    }
    let mut out = vec![0.0; grid.len()];
    sub_laplacian_into(&grid, f.values(), &mut out);
    ScalarField::from_values(grid, out)
}

/// Finite-difference horizontal gradient (X f, Y f) on an n = 1 grid.
pub fn grad_h_fd(f: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    let grid = f.grid().clone();
    if grid.nx < 5 || grid.ny < 5 || grid.ntau < 5 {
        return Err(Error::GridTooSmall(grid.nx, grid.ny, grid.ntau));
    }
    if !f.is_finite() {
        return Err(Error::NonFiniteField);
    }
    let (nx, ny, nt) = (grid.nx, grid.ny, grid.ntau);
    let v = f.values();
    let get = |ii: isize, jj: isize, kk: isize| -> f64 {
        if ii < 0 || jj < 0 || kk < 0 || ii >= nx as isize || jj >= ny as isize || kk >= nt as isize {
            0.0
        } else {
            v[(ii as usize * ny + jj as usize) * nt + kk as usize]
        }
    };
    let mut gx = vec![0.0; grid.len()];
    let mut gy = vec![0.0; grid.len()];
    let mut idx = 0;
    for i in 0..nx {
        let x = grid.x(i);
        for j in 0..ny {
            let y = grid.y(j);
            for k in 0..nt {
                let (ii, jj, kk) = (i as isize, j as isize, k as isize);
                let dx = (get(ii + 1, jj, kk) - get(ii - 1, jj, kk)) / (2.0 * grid.hx);
                let dy = (get(ii, jj + 1, kk) - get(ii, jj - 1, kk)) / (2.0 * grid.hy);
                let dt = (get(ii, jj, kk + 1) - get(ii, jj, kk - 1)) / (2.0 * grid.htau);
                gx[idx] = dx - 2.0 * y * dt;
                gy[idx] = dy + 2.0 * x * dt;
                idx += 1;
            }
        }
    }
    Ok((
        ScalarField::from_values(grid.clone(), gx)?,
        ScalarField::from_values(grid, gy)?,
    ))
}

/// Worst-case explicit-step intensity of the stencil over active nodes:
/// 2/hx^2 + 2/hy^2 + 8(x^2+y^2)/htau^2 + 4|x|/(hy htau) + 4|y|/(hx htau).
/// The diffusive CFL bound is dt <= safety / (D_max * intensity).
pub fn stencil_intensity(grid: &UniformGrid) -> f64 {
    let mut worst = 0.0f64;
    let base = 2.0 / (grid.hx * grid.hx) + 2.0 / (grid.hy * grid.hy);
    for i in 0..grid.nx {
        let x = grid.x(i);
        for j in 0..grid.ny {
            let y = grid.y(j);
            let s = base
                + 8.0 * (x * x + y * y) / (grid.htau * grid.htau)
                + 4.0 * x.abs() / (grid.hy * grid.htau)
                + 4.0 * y.abs() / (grid.hx * grid.htau);
            if grid.mask().is_some() {
                let mut active = false;
                for k in 0..grid.ntau {
                    if !grid.is_masked(grid.index(i, j, k)) {
                        active = true;
                        break;
                    }
                }
                if !active {
                    continue;
                }
            }
            worst = worst.max(s);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgeom::BoundaryPolicy;
    use crate::poly::Poly;
    use std::sync::Arc;

    fn grid(n: usize, l: f64) -> Arc<UniformGrid> {
        UniformGrid::new((l, l, l), (n, n, n), BoundaryPolicy::DirichletZero).unwrap()
    }

    fn max_interior_diff(a: &ScalarField, expect: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let g = a.grid();
        let mut worst = 0.0f64;
        for i in 1..g.nx - 1 {
            for j in 1..g.ny - 1 {
                for k in 1..g.ntau - 1 {
                    let got = a.values()[g.index(i, j, k)];
                    let want = expect(g.x(i), g.y(j), g.tau(k));
                    worst = worst.max((got - want).abs());
                }
            }
        }
        worst
    }

    #[test]
    fn exact_on_quadratic() {
        let g = grid(9, 1.0);
        let f = ScalarField::sample(g, |x, y, _| x * x + y * y);
        let lap = d_h_fd(&f).unwrap();
        assert!(max_interior_diff(&lap, |_, _, _| 4.0) <= 1e-12);
    }

    #[test]
    fn exact_on_tau() {
        let g = grid(9, 1.0);
        let f = ScalarField::sample(g, |_, _, t| t);
        let lap = d_h_fd(&f).unwrap();
        assert!(max_interior_diff(&lap, |_, _, _| 0.0) <= 1e-12);
    }

    #[test]
    fn exact_on_trilinear_cross_term() {
        // Symbolic oracle: the sub-Laplacian of x*y*tau.
        let xyt = Poly::coordinate(1, 0).mul(&Poly::coordinate(1, 1)).mul(&Poly::coordinate(1, 2));
        let oracle = xyt.sub_laplacian();
        let g = grid(9, 1.0);
        let f = ScalarField::sample(g, |x, y, t| x * y * t);
        let lap = d_h_fd(&f).unwrap();
        assert!(max_interior_diff(&lap, |x, y, t| oracle.eval(&[x, y, t])) <= 1e-12);
        // And the oracle itself reduces to 4x^2 - 4y^2.
        assert!(max_interior_diff(&lap, |x, y, _| 4.0 * x * x - 4.0 * y * y) <= 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let g = grid(9, 1.0);
        let fx = ScalarField::sample(g.clone(), |x, _, _| x);
        let (gx, gy) = grad_h_fd(&fx).unwrap();
        assert!(max_interior_diff(&gx, |_, _, _| 1.0) <= 1e-12);
        assert!(max_interior_diff(&gy, |_, _, _| 0.0) <= 1e-12);

        let ft = ScalarField::sample(g.clone(), |_, _, t| t);
        let (gx, gy) = grad_h_fd(&ft).unwrap();
        assert!(max_interior_diff(&gx, |_, y, _| -2.0 * y) <= 1e-12);
        assert!(max_interior_diff(&gy, |x, _, _| 2.0 * x) <= 1e-12);

        // Symbolic oracle route for f = x^2 + y^2 + tau.
        let f = ScalarField::sample(g, |x, y, t| x * x + y * y + t);
        let (gx, gy) = grad_h_fd(&f).unwrap();
        let p = Poly::from_terms(1, &[(vec![2, 0, 0], 1.0), (vec![0, 2, 0], 1.0), (vec![0, 0, 1], 1.0)]);
        let (px, py) = p.grad_h();
        assert!(max_interior_diff(&gx, |x, y, t| px.eval(&[x, y, t])) <= 1e-12);
        assert!(max_interior_diff(&gy, |x, y, t| py.eval(&[x, y, t])) <= 1e-12);
        assert!(max_interior_diff(&gx, |x, y, _| 2.0 * x - 2.0 * y) <= 1e-12);
        assert!(max_interior_diff(&gy, |x, y, _| 2.0 * y + 2.0 * x) <= 1e-12);
    }

    #[test]
    fn rejects_bad_fields() {
        let g = grid(9, 1.0);
        let mut vals = vec![0.0; g.len()];
        vals[0] = 1.0;
        let f = ScalarField::from_values(g, vals).unwrap();
        assert!(d_h_fd(&f).is_ok());
    }
}
