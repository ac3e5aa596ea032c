use crate::error::{Error, Result};
use crate::hgeom::{FieldJet, GroupDims, GroupPoint};

/// C^2 non-increasing profile: 1 on [0,1/2], 0 on [1,inf), quintic
/// smoothstep transition in between.  Returns (value, d/dr, d2/dr2).
pub fn smoothstep_profile(r: f64) -> (f64, f64, f64) {
    if r <= 0.5 {
        (1.0, 0.0, 0.0)
    } else if r >= 1.0 {
        (0.0, 0.0, 0.0)
    } else {
        let t = 2.0 * r - 1.0;
        let s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
        let ds = 30.0 * t * t * (t - 1.0) * (t - 1.0);
        let d2s = 60.0 * t * (2.0 * t - 1.0) * (t - 1.0);
        (1.0 - s, -2.0 * ds, -4.0 * d2s)
    }
}

/// Product cutoff phi(eta) = Phi(|x|/s) Phi(|y|/s) Phi(|tau|/s_tau), raised
/// to the power ell, with either gauge scaling (s = R, s_tau = R^2) or
/// parabolic scaling (s = T^alpha, s_tau = T^{2 alpha}) plus the matching
/// time factor Phi(t/T)^ell.
#[derive(Debug, Clone, Copy)]
pub struct CutoffSpec {
    pub dims: GroupDims,
    pub scale_xy: f64,
    pub scale_tau: f64,
    pub power_ell: f64,
    pub time_scale: Option<f64>,
    pub alpha: Option<f64>,
}

impl CutoffSpec {
    fn check_ell(ell: f64) -> Result<()> {
        if ell == 1.0 || ell >= 2.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "cutoff power must be 1 or >= 2, got {ell}"
            )))
        }
    }

    /// Gauge scaling: |x|/R, |y|/R, |tau|/R^2.
    pub fn radial(dims: GroupDims, scale_r: f64, ell: f64) -> Result<Self> {
        if !(scale_r > 0.0) {
            return Err(Error::InvalidParameter("cutoff scale must be positive".into()));
        }
        Self::check_ell(ell)?;
        Ok(CutoffSpec {
            dims,
            scale_xy: scale_r,
            scale_tau: scale_r * scale_r,
            power_ell: ell,
            time_scale: None,
            alpha: None,
        })
    }

    /// Parabolic scaling tied to a time horizon T with exponent alpha.
    pub fn parabolic(dims: GroupDims, t_horizon: f64, alpha: f64, ell: f64) -> Result<Self> {
        if !(t_horizon > 1.0) {
            return Err(Error::InvalidParameter("time horizon must exceed 1".into()));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        Self::check_ell(ell)?;
        let s = t_horizon.powf(alpha);
        Ok(CutoffSpec {
            dims,
            scale_xy: s,
            scale_tau: s * s,
            power_ell: ell,
            time_scale: Some(t_horizon),
            alpha: Some(alpha),
        })
    }

    /// Anisotropic box scaling (sx, sy, stau) with no time factor; used for
    /// test functions that must fit inside a given grid box.
    pub fn boxed(dims: GroupDims, scale_xy: f64, scale_tau: f64, ell: f64) -> Result<Self> {
        if !(scale_xy > 0.0 && scale_tau > 0.0) {
            return Err(Error::InvalidParameter("cutoff scales must be positive".into()));
        }
        Self::check_ell(ell)?;
        Ok(CutoffSpec { dims, scale_xy, scale_tau, power_ell: ell, time_scale: None, alpha: None })
    }

    pub fn with_time(mut self, t_horizon: f64) -> Result<Self> {
        if !(t_horizon > 0.0) {
            return Err(Error::InvalidParameter("time scale must be positive".into()));
        }
        self.time_scale = Some(t_horizon);
        Ok(self)
    }

    /// Jet of the base product phi (ell = 1), from the radial chain rule.
    fn base_jet(&self, at: &GroupPoint) -> FieldJet {
        let n = self.dims.n();
        debug_assert_eq!(n, at.n());
        let d = 2 * n + 1;
        let itau = 2 * n;

        // Radial data per block: value, d/d|.|, d2/d|.|2 scaled by 1/s, 1/s^2.
        let rx: f64 = at.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ry: f64 = at.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (av, ad, add) = smoothstep_profile(rx / self.scale_xy);
        let (bv, bd, bdd) = smoothstep_profile(ry / self.scale_xy);
        let (cv, cd, cdd) = smoothstep_profile(at.tau.abs() / self.scale_tau);
        let ad = ad / self.scale_xy;
        let add = add / (self.scale_xy * self.scale_xy);
        let bd = bd / self.scale_xy;
        let bdd = bdd / (self.scale_xy * self.scale_xy);
        let cd = cd / self.scale_tau;
        let cdd = cdd / (self.scale_tau * self.scale_tau);

        // Cartesian partials of each radial factor.  The profile is flat
        // near 0, so the |.| singularity never contributes.
        let mut ga = vec![0.0; n];
        let mut gb = vec![0.0; n];
        let mut ha = vec![0.0; n * n];
        let mut hb = vec![0.0; n * n];
        for i in 0..n {
            let ui = if rx > 0.0 { at.x[i] / rx } else { 0.0 };
            ga[i] = ad * ui;
            for j in i..n {
                let uj = if rx > 0.0 { at.x[j] / rx } else { 0.0 };
                let dij = if i == j { 1.0 } else { 0.0 };
                let radial = if rx > 0.0 { ad * (dij - ui * uj) / rx } else { 0.0 };
                let v = add * ui * uj + radial;
                ha[i * n + j] = v;
                ha[j * n + i] = v;
            }
        }
        for i in 0..n {
            let ui = if ry > 0.0 { at.y[i] / ry } else { 0.0 };
            gb[i] = bd * ui;
            for j in i..n {
                let uj = if ry > 0.0 { at.y[j] / ry } else { 0.0 };
                let dij = if i == j { 1.0 } else { 0.0 };
                let radial = if ry > 0.0 { bd * (dij - ui * uj) / ry } else { 0.0 };
                let v = bdd * ui * uj + radial;
                hb[i * n + j] = v;
                hb[j * n + i] = v;
            }
        }
        let sign_tau = if at.tau >= 0.0 { 1.0 } else { -1.0 };
        let gc = cd * sign_tau;
        let hc = cdd;

        let mut jet = FieldJet::zero(n);
        jet.value = av * bv * cv;
        for i in 0..n {
            jet.set_grad(i, ga[i] * bv * cv);
            jet.set_grad(n + i, av * gb[i] * cv);
        }
        jet.set_grad(itau, av * bv * gc);
        for i in 0..n {
            for j in i..n {
                jet.set_hess(i, j, ha[i * n + j] * bv * cv);
                jet.set_hess(n + i, n + j, av * hb[i * n + j] * cv);
            }
            for j in 0..n {
                jet.set_hess(i, n + j, ga[i] * gb[j] * cv);
            }
            jet.set_hess(i, itau, ga[i] * bv * gc);
            jet.set_hess(n + i, itau, av * gb[i] * gc);
        }
        jet.set_hess(itau, itau, av * bv * hc);
        let _ = d;
        jet
    }

    /// Jet of phi^ell at a point; ell = 1 recovers phi itself.
    pub fn jet(&self, at: &GroupPoint) -> FieldJet {
        let base = self.base_jet(at);
        let ell = self.power_ell;
        if ell == 1.0 {
            return base;
        }
        let n = self.dims.n();
        let d = 2 * n + 1;
        if base.value == 0.0 {
            return FieldJet::zero(n);
        }
        let p = base.value.powf(ell);
        let p1 = ell * base.value.powf(ell - 1.0);
        let p2 = ell * (ell - 1.0) * base.value.powf(ell - 2.0);
        let mut jet = FieldJet::zero(n);
        jet.value = p;
        for a in 0..d {
            jet.set_grad(a, p1 * base.grad_at(a));
        }
        for a in 0..d {
            for b in a..d {
                jet.set_hess(a, b, p2 * base.grad_at(a) * base.grad_at(b) + p1 * base.hess_at(a, b));
            }
        }
        jet
    }

    pub fn value(&self, at: &GroupPoint) -> f64 {
        self.jet(at).value
    }

    /// phi_3(t)^ell = Phi(t/T)^ell; requires a time scale.
    pub fn time_value_pow(&self, t: f64) -> f64 {
        let big_t = self.time_scale.expect("cutoff has no time scale");
        smoothstep_profile(t / big_t).0.powf(self.power_ell)
    }

    /// d/dt of phi_3^ell = ell Phi^{ell-1}(t/T) Phi'(t/T) / T.
    pub fn time_dt_pow(&self, t: f64) -> f64 {
        let big_t = self.time_scale.expect("cutoff has no time scale");
        let (v, dv, _) = smoothstep_profile(t / big_t);
        if v == 0.0 {
            return 0.0;
        }
        self.power_ell * v.powf(self.power_ell - 1.0) * dv / big_t
    }
}
