use super::{Equation, PdeParams};
use crate::error::{Error, Result};

/// Closed-form lifespan bounds from the ODE comparison arguments, one
/// variant per projection weight and exponent regime.
#[derive(Debug, Clone, PartialEq)]
pub enum OdeBounds {
    /// Eigen projection of the porous-medium equation, m > 1:
    /// y' >= lambda1 y^m once y0 > c3 = (2 lambda1)^{1/(sigma-m)},
    /// giving T* = 1 / (y0^{m-1} (m-1) lambda1).
    EigenPorous { m: f64, sigma: f64, lambda1: f64, y0: f64, c3: f64, t_star: f64 },
    /// Theta projection, m < sigma: F(z) = z^sigma - lambda z^m with
    /// lambda = 2(2+Q), valid once J(0) > lambda^{1/(sigma-m)};
    /// T* = J0^{1-sigma} / ((sigma-1)(1 - lambda J0^{m-sigma})).
    ThetaPorous { m: f64, sigma: f64, lambda: f64, j0: f64, t_star: f64 },
    /// Theta projection at equal exponents m = sigma:
    /// T* = 2 J0^{1-sigma} / (sigma-1) for any J0 > 0.
    ThetaEqual { sigma: f64, j0: f64, t_star: f64 },
    /// Eigen projection of the degenerate equation, q > 1: quenching of
    /// y = (q-1)^{-1} int u^{1-q} Lambda below c0 forces
    /// T <= c1^{-1} y0^{q/(q-1)} with c1 = lambda1 q (q-1)^{-q/(q-1)}.
    EigenDegenerate { q: f64, p: f64, lambda1: f64, y0: f64, c0: f64, c1: f64, t_bound: f64 },
    /// Same argument at q = 1 with y = -int ln(u) Lambda and
    /// c2 = -ln(2 lambda1)/(p-2); T < e^{y0} / lambda1.
    EigenDegenerateLog { p: f64, lambda1: f64, y0: f64, c2: f64, t_bound: f64 },
}

impl OdeBounds {
    /// The finite lifespan bound of the regime.
    pub fn t_star_bound(&self) -> f64 {
        match self {
            OdeBounds::EigenPorous { t_star, .. } => *t_star,
            OdeBounds::ThetaPorous { t_star, .. } => *t_star,
            OdeBounds::ThetaEqual { t_star, .. } => *t_star,
            OdeBounds::EigenDegenerate { t_bound, .. } => *t_bound,
            OdeBounds::EigenDegenerateLog { t_bound, .. } => *t_bound,
        }
    }
}

/// Evaluate the applicable lifespan bound.
///
/// Porous medium with an eigenvalue supplied uses the eigen-projection
/// regime; without one it uses the Theta projection (where the constant
/// lambda = 2(2+Q) replaces the eigenvalue).  The degenerate equation
/// requires an eigenvalue and q >= 1.
pub fn ode_bound(params: &PdeParams, y0_or_j0: f64, lambda1: Option<f64>) -> Result<OdeBounds> {
    match (params.equation, lambda1) {
        (Equation::PorousMedium { m, sigma }, Some(lambda1)) => {
            if !(lambda1 > 0.0) {
                return Err(Error::InvalidParameter("lambda1 must be positive".into()));
            }
            if !(m > 1.0 && sigma > m) {
                return Err(Error::InvalidParameter(
                    "eigen-projection bound needs 1 < m < sigma".into(),
                ));
            }
            let c3 = (2.0 * lambda1).powf(1.0 / (sigma - m));
            let y0 = y0_or_j0;
            if !(y0 > c3) {
                return Err(Error::ConditionNotMet(format!(
                    "y0 = {y0:.6e} must exceed c3 = {c3:.6e}"
                )));
            }
            let t_star = 1.0 / (y0.powf(m - 1.0) * (m - 1.0) * lambda1);
            Ok(OdeBounds::EigenPorous { m, sigma, lambda1, y0, c3, t_star })
        }
        (Equation::PorousMedium { m, sigma }, None) => {
            let q_hom = params.dims.homogeneous() as f64;
            let j0 = y0_or_j0;
            if m == sigma {
                if !(j0 > 0.0) {
                    return Err(Error::ConditionNotMet("J(0) must be positive".into()));
                }
                let t_star = 2.0 * j0.powf(1.0 - sigma) / (sigma - 1.0);
                return Ok(OdeBounds::ThetaEqual { sigma, j0, t_star });
            }
            if !(m < sigma) {
                return Err(Error::InvalidParameter(
                    "Theta-projection bound needs m <= sigma".into(),
                ));
            }
            let lambda = 2.0 * (2.0 + q_hom);
            let threshold = lambda.powf(1.0 / (sigma - m));
            if !(j0 > threshold) {
                return Err(Error::ConditionNotMet(format!(
                    "J(0) = {j0:.6e} must exceed lambda^(1/(sigma-m)) = {threshold:.6e}"
                )));
            }
            let t_star =
                j0.powf(1.0 - sigma) / ((sigma - 1.0) * (1.0 - lambda * j0.powf(m - sigma)));
            Ok(OdeBounds::ThetaPorous { m, sigma, lambda, j0, t_star })
        }
        (Equation::Degenerate { q, p }, Some(lambda1)) => {
            if !(lambda1 > 0.0) {
                return Err(Error::InvalidParameter("lambda1 must be positive".into()));
            }
            if !(p > q + 1.0) {
                return Err(Error::InvalidParameter(
                    "degenerate lifespan bound needs p > q + 1".into(),
                ));
            }
            if q > 1.0 {
                let c0 = (2.0 * lambda1).powf(-(q - 1.0) / (p - q - 1.0)) / (q - 1.0);
                let c1 = lambda1 * q * (q - 1.0).powf(-q / (q - 1.0));
                let y0 = y0_or_j0;
                if !(y0 > 0.0 && y0 < c0) {
                    return Err(Error::ConditionNotMet(format!(
                        "y0 = {y0:.6e} must lie in (0, c0 = {c0:.6e})"
                    )));
                }
                let t_bound = y0.powf(q / (q - 1.0)) / c1;
                Ok(OdeBounds::EigenDegenerate { q, p, lambda1, y0, c0, c1, t_bound })
            } else if q == 1.0 {
                let c2 = -(2.0 * lambda1).ln() / (p - 2.0);
                let y0 = y0_or_j0;
                if !(y0 < c2) {
                    return Err(Error::ConditionNotMet(format!(
                        "y0 = {y0:.6e} must stay below c2 = {c2:.6e}"
                    )));
                }
                let t_bound = y0.exp() / lambda1;
                Ok(OdeBounds::EigenDegenerateLog { p, lambda1, y0, c2, t_bound })
            } else {
                Err(Error::InvalidParameter(
                    "q < 1 has no direct bound; use the porous-medium transform".into(),
                ))
            }
        }
        (Equation::Degenerate { .. }, None) => Err(Error::InvalidParameter(
            "degenerate lifespan bound requires the principal eigenvalue".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgeom::GroupDims;

    fn dims1() -> GroupDims {
        GroupDims::new(1).unwrap()
    }

    #[test]
    fn eigen_porous_formula() {
        let params = PdeParams::porous_medium(2.0, 4.0, dims1()).unwrap();
        let b = ode_bound(&params, 2.0, Some(1.0)).unwrap();
        match b {
            OdeBounds::EigenPorous { c3, t_star, .. } => {
                assert!((c3 - 2.0f64.sqrt()).abs() < 1e-15); // (2*1)^{1/(4-2)}
                assert!((t_star - 0.5).abs() < 1e-15); // 1/(2^1 * 1 * 1)
            }
            _ => panic!("wrong regime"),
        }
        // Condition marker when y0 is below the threshold.
        assert!(matches!(
            ode_bound(&params, 1.0, Some(1.0)),
            Err(Error::ConditionNotMet(_))
        ));
    }

    #[test]
    fn theta_porous_formula() {
        // Q = 4 so lambda = 12; m = 1, sigma = 2, J0 = 24 gives T* = 1/12.
        let params = PdeParams::porous_medium(1.0, 2.0, dims1()).unwrap();
        let b = ode_bound(&params, 24.0, None).unwrap();
        match b {
            OdeBounds::ThetaPorous { lambda, t_star, .. } => {
                assert!((lambda - 12.0).abs() < 1e-15);
                assert!((t_star - 1.0 / 12.0).abs() < 1e-15);
            }
            _ => panic!("wrong regime"),
        }
        assert!(ode_bound(&params, 12.0, None).is_err()); // J0 <= 12 fails
    }

    #[test]
    fn degenerate_lifespan_constants() {
        let params = PdeParams::degenerate(2.0, 4.0, dims1()).unwrap();
        let b = ode_bound(&params, 0.4, Some(1.0)).unwrap();
        match b {
            OdeBounds::EigenDegenerate { c0, c1, .. } => {
                assert!((c0 - 0.5).abs() < 1e-15);
                assert!((c1 - 2.0).abs() < 1e-15);
                // Worst-case lifespan c1^{-1} c0^{q/(q-1)} = 0.5 * 0.25.
                assert!((c0.powf(2.0) / c1 - 0.125).abs() < 1e-15);
            }
            _ => panic!("wrong regime"),
        }
        assert!(ode_bound(&params, 0.7, Some(1.0)).is_err()); // above c0
    }

    #[test]
    fn log_regime_at_q_one() {
        let params = PdeParams::degenerate(1.0, 3.0, dims1()).unwrap();
        let lambda1 = 0.25; // 2 lambda1 = 0.5 < 1 so c2 > 0
        let b = ode_bound(&params, 0.1, Some(lambda1)).unwrap();
        match b {
            OdeBounds::EigenDegenerateLog { c2, t_bound, .. } => {
                assert!((c2 - (-(0.5f64).ln())).abs() < 1e-15);
                assert!((t_bound - (0.1f64).exp() / 0.25).abs() < 1e-12);
            }
            _ => panic!("wrong regime"),
        }
    }

    #[test]
    fn equal_exponent_theta_bound() {
        let dims = dims1();
        let params = PdeParams {
            equation: Equation::PorousMedium { m: 2.0, sigma: 2.0 },
            dims,
        };
        let b = ode_bound(&params, 4.0, None).unwrap();
        match b {
            OdeBounds::ThetaEqual { t_star, .. } => {
                assert!((t_star - 2.0 * 0.25 / 1.0).abs() < 1e-15);
            }
            _ => panic!("wrong regime"),
        }
    }
}
