//! Flat key=value configuration: one `section.key = value` per line, `#`
//! comments, unknown keys rejected, defaults applied, and a deterministic
//! echo that reproduces the resolved state.

use heislab::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    // grid
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub grid_ntau: usize,
    pub grid_lx: f64,
    pub grid_ly: f64,
    pub grid_ltau: f64,
    pub grid_boundary: String,
    pub grid_ball_radius: f64,
    // equation
    pub equation_family: String,
    pub equation_m: f64,
    pub equation_sigma: f64,
    pub equation_q: f64,
    pub equation_p: f64,
    // initial data
    pub initial_family: String,
    pub initial_amplitude: f64,
    pub initial_radius: f64,
    pub initial_epsilon: f64,
    pub initial_gamma: f64,
    // step control
    pub control_cfl_safety: f64,
    pub control_growth_cap: f64,
    pub control_dt_min: f64,
    pub control_t_max: f64,
    pub control_blowup_threshold: f64,
    pub control_row_dt: Option<f64>,
    pub control_frame_dt: Option<f64>,
    // eigen
    pub eigen_radius: f64,
    pub eigen_tol: f64,
    pub eigen_max_steps: usize,
    // sweep
    pub sweep_sigma_min: f64,
    pub sweep_sigma_max: f64,
    pub sweep_sigma_steps: usize,
    pub sweep_p_min: f64,
    pub sweep_p_max: f64,
    pub sweep_p_steps: usize,
    pub sweep_amplitudes: Vec<f64>,
    pub sweep_master_seed: u64,
    pub sweep_parallelism: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            grid_nx: 48,
            grid_ny: 48,
            grid_ntau: 48,
            grid_lx: 6.0,
            grid_ly: 6.0,
            grid_ltau: 36.0,
            grid_boundary: "dirichlet_zero".into(),
            grid_ball_radius: 1.0,
            equation_family: "porous_medium".into(),
            equation_m: 1.0,
            equation_sigma: 2.0,
            equation_q: 0.5,
            equation_p: 2.0,
            initial_family: "bump".into(),
            initial_amplitude: 1.0,
            initial_radius: 1.5,
            initial_epsilon: 1.0,
            initial_gamma: 2.0,
            control_cfl_safety: 0.25,
            control_growth_cap: 0.10,
            control_dt_min: 1e-20,
            control_t_max: 10.0,
            control_blowup_threshold: 1e8,
            control_row_dt: None,
            control_frame_dt: None,
            eigen_radius: 1.0,
            eigen_tol: 1e-3,
            eigen_max_steps: 400_000,
            sweep_sigma_min: 1.2,
            sweep_sigma_max: 3.0,
            sweep_sigma_steps: 8,
            sweep_p_min: 1.2,
            sweep_p_max: 2.4,
            sweep_p_steps: 6,
            sweep_amplitudes: vec![0.5],
            sweep_master_seed: 42,
            sweep_parallelism: 1,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidParameter(format!("malformed number for {key}: {value:?}")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::InvalidParameter(format!("malformed integer for {key}: {value:?}")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|_| Error::InvalidParameter(format!("malformed integer for {key}: {value:?}")))
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let items: Result<Vec<f64>> = value.split(',').map(|s| parse_f64(key, s.trim())).collect();
    let items = items?;
    if items.is_empty() {
        return Err(Error::InvalidParameter(format!("{key} needs at least one value")));
    }
    Ok(items)
}

impl Config {
    /// Apply one `section.key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "grid.nx" => self.grid_nx = parse_usize(key, v)?,
            "grid.ny" => self.grid_ny = parse_usize(key, v)?,
            "grid.ntau" => self.grid_ntau = parse_usize(key, v)?,
            "grid.lx" => self.grid_lx = parse_f64(key, v)?,
            "grid.ly" => self.grid_ly = parse_f64(key, v)?,
            "grid.ltau" => self.grid_ltau = parse_f64(key, v)?,
            "grid.boundary" => self.grid_boundary = v.to_string(),
            "grid.ball_radius" => self.grid_ball_radius = parse_f64(key, v)?,
            "equation.family" => self.equation_family = v.to_string(),
            "equation.m" => self.equation_m = parse_f64(key, v)?,
            "equation.sigma" => self.equation_sigma = parse_f64(key, v)?,
            "equation.q" => self.equation_q = parse_f64(key, v)?,
            "equation.p" => self.equation_p = parse_f64(key, v)?,
            "initial.family" => self.initial_family = v.to_string(),
            "initial.amplitude" => self.initial_amplitude = parse_f64(key, v)?,
            "initial.radius" => self.initial_radius = parse_f64(key, v)?,
            "initial.epsilon" => self.initial_epsilon = parse_f64(key, v)?,
            "initial.gamma" => self.initial_gamma = parse_f64(key, v)?,
            "control.cfl_safety" => self.control_cfl_safety = parse_f64(key, v)?,
            "control.growth_cap" => self.control_growth_cap = parse_f64(key, v)?,
            "control.dt_min" => self.control_dt_min = parse_f64(key, v)?,
            "control.t_max" => self.control_t_max = parse_f64(key, v)?,
            "control.blowup_threshold" => self.control_blowup_threshold = parse_f64(key, v)?,
            "control.row_dt" => self.control_row_dt = Some(parse_f64(key, v)?),
            "control.frame_dt" => self.control_frame_dt = Some(parse_f64(key, v)?),
            "eigen.radius" => self.eigen_radius = parse_f64(key, v)?,
            "eigen.tol" => self.eigen_tol = parse_f64(key, v)?,
            "eigen.max_steps" => self.eigen_max_steps = parse_usize(key, v)?,
            "sweep.sigma_min" => self.sweep_sigma_min = parse_f64(key, v)?,
            "sweep.sigma_max" => self.sweep_sigma_max = parse_f64(key, v)?,
            "sweep.sigma_steps" => self.sweep_sigma_steps = parse_usize(key, v)?,
            "sweep.p_min" => self.sweep_p_min = parse_f64(key, v)?,
            "sweep.p_max" => self.sweep_p_max = parse_f64(key, v)?,
            "sweep.p_steps" => self.sweep_p_steps = parse_usize(key, v)?,
            "sweep.amplitudes" => self.sweep_amplitudes = parse_f64_list(key, v)?,
            "sweep.master_seed" => self.sweep_master_seed = parse_u64(key, v)?,
            "sweep.parallelism" => self.sweep_parallelism = parse_usize(key, v)?,
            _ => return Err(Error::InvalidParameter(format!("unknown config key: {key}"))),
        }
        Ok(())
    }

    /// Range checks shared by every subcommand.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.grid_nx < 5 || self.grid_ny < 5 || self.grid_ntau < 5 {
            return bad("grid counts must be at least 5 so central stencils fit".into());
        }
        if !(self.grid_lx > 0.0 && self.grid_ly > 0.0 && self.grid_ltau > 0.0) {
            return bad("grid half extents must be positive".into());
        }
        match self.grid_boundary.as_str() {
            "dirichlet_zero" => {}
            "ball_mask" => {
                if !(self.grid_ball_radius > 0.0) {
                    return bad("grid.ball_radius must be positive".into());
                }
            }
            other => return bad(format!("unknown grid.boundary: {other:?}")),
        }
        match self.equation_family.as_str() {
            "porous_medium" => {
                if !(self.equation_m >= 1.0) {
                    return bad(format!("equation.m = {} violates m >= 1", self.equation_m));
                }
                if !(self.equation_sigma > 1.0) {
                    return bad(format!(
                        "equation.sigma = {} violates sigma > 1",
                        self.equation_sigma
                    ));
                }
            }
            "degenerate" => {
                if !(self.equation_q >= 0.0) {
                    return bad(format!("equation.q = {} violates q >= 0", self.equation_q));
                }
                if !(self.equation_p > 1.0) {
                    return bad(format!("equation.p = {} violates p > 1", self.equation_p));
                }
            }
            other => return bad(format!("unknown equation.family: {other:?}")),
        }
        match self.initial_family.as_str() {
            "bump" => {
                if !(self.initial_amplitude >= 0.0 && self.initial_radius > 0.0) {
                    return bad("bump needs amplitude >= 0 and radius > 0".into());
                }
            }
            "poly_decay" => {
                if !(self.initial_gamma > 0.0) {
                    return bad("initial.gamma must be positive".into());
                }
                if !(self.initial_epsilon >= 0.0) {
                    return bad("initial.epsilon must be nonnegative".into());
                }
            }
            other => return bad(format!("unknown initial.family: {other:?}")),
        }
        if !(self.control_cfl_safety > 0.0 && self.control_cfl_safety <= 1.0) {
            return bad("control.cfl_safety must lie in (0, 1]".into());
        }
        if !(self.control_growth_cap > 0.0
            && self.control_dt_min > 0.0
            && self.control_t_max > 0.0
            && self.control_blowup_threshold > 1.0)
        {
            return bad("control values must be positive (threshold > 1)".into());
        }
        if let Some(r) = self.control_row_dt {
            if !(r > 0.0 && r <= self.control_t_max / 16.0) {
                return bad("control.row_dt must be positive and at most t_max/16".into());
            }
        }
        if !(self.eigen_radius > 0.0 && self.eigen_tol > 0.0 && self.eigen_max_steps > 0) {
            return bad("eigen values must be positive".into());
        }
        if self.equation_family == "porous_medium" {
            if !(self.sweep_sigma_min > 1.0) || self.sweep_sigma_max < self.sweep_sigma_min {
                return bad("sweep sigma range must satisfy 1 < min <= max".into());
            }
        } else if !(self.sweep_p_min > 1.0) || self.sweep_p_max < self.sweep_p_min {
            return bad("sweep p range must satisfy 1 < min <= max".into());
        }
        if self.sweep_sigma_steps == 0 || self.sweep_p_steps == 0 {
            return bad("sweep step counts must be positive".into());
        }
        if self.sweep_amplitudes.iter().any(|a| *a < 0.0) {
            return bad("sweep amplitudes must be nonnegative".into());
        }
        if self.sweep_parallelism == 0 {
            return bad("sweep.parallelism must be at least 1".into());
        }
        Ok(())
    }

    pub fn row_dt(&self) -> f64 {
        self.control_row_dt.unwrap_or(self.control_t_max / 256.0)
    }

    /// Deterministic echo; feeding it back through `parse_config`
    /// reproduces the same resolved configuration.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str("# ");
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("grid.nx", self.grid_nx.to_string());
        kv("grid.ny", self.grid_ny.to_string());
        kv("grid.ntau", self.grid_ntau.to_string());
        kv("grid.lx", self.grid_lx.to_string());
        kv("grid.ly", self.grid_ly.to_string());
        kv("grid.ltau", self.grid_ltau.to_string());
        kv("grid.boundary", self.grid_boundary.clone());
        kv("grid.ball_radius", self.grid_ball_radius.to_string());
        kv("equation.family", self.equation_family.clone());
        kv("equation.m", self.equation_m.to_string());
        kv("equation.sigma", self.equation_sigma.to_string());
        kv("equation.q", self.equation_q.to_string());
        kv("equation.p", self.equation_p.to_string());
        kv("initial.family", self.initial_family.clone());
        kv("initial.amplitude", self.initial_amplitude.to_string());
        kv("initial.radius", self.initial_radius.to_string());
        kv("initial.epsilon", self.initial_epsilon.to_string());
        kv("initial.gamma", self.initial_gamma.to_string());
        kv("control.cfl_safety", self.control_cfl_safety.to_string());
        kv("control.growth_cap", self.control_growth_cap.to_string());
        kv("control.dt_min", self.control_dt_min.to_string());
        kv("control.t_max", self.control_t_max.to_string());
        kv("control.blowup_threshold", self.control_blowup_threshold.to_string());
        if let Some(r) = self.control_row_dt {
            kv("control.row_dt", r.to_string());
        }
        if let Some(f) = self.control_frame_dt {
            kv("control.frame_dt", f.to_string());
        }
        kv("eigen.radius", self.eigen_radius.to_string());
        kv("eigen.tol", self.eigen_tol.to_string());
        kv("eigen.max_steps", self.eigen_max_steps.to_string());
        kv("sweep.sigma_min", self.sweep_sigma_min.to_string());
        kv("sweep.sigma_max", self.sweep_sigma_max.to_string());
        kv("sweep.sigma_steps", self.sweep_sigma_steps.to_string());
        kv("sweep.p_min", self.sweep_p_min.to_string());
        kv("sweep.p_max", self.sweep_p_max.to_string());
        kv("sweep.p_steps", self.sweep_p_steps.to_string());
        kv(
            "sweep.amplitudes",
            self.sweep_amplitudes.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","),
        );
        kv("sweep.master_seed", self.sweep_master_seed.to_string());
        kv("sweep.parallelism", self.sweep_parallelism.to_string());
        out
    }
}

/// Parse config text; an echoed header (leading `# `) parses identically.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut config = Config::default();
    apply_config_text(&mut config, text)?;
    config.validate()?;
    Ok(config)
}

pub fn apply_config_text(config: &mut Config, text: &str) -> Result<()> {
    for raw in text.lines() {
        let mut line = raw.trim();
        if let Some(stripped) = line.strip_prefix('#') {
            // echoed headers carry assignments behind the comment marker
            let candidate = stripped.trim();
            let is_assignment = candidate
                .split_once('=')
                .map_or(false, |(k, _)| k.trim().contains('.') && !k.trim().contains(' '));
            if is_assignment {
                line = candidate;
            } else {
                continue;
            }
        }
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("expected key = value, got {raw:?}")))?;
        config.set(key.trim(), value.trim())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = parse_config("").unwrap();
        assert_eq!(c, Config::default());
    }

    #[test]
    fn rejects_out_of_range_exponent() {
        assert!(parse_config("equation.sigma = 0.5").is_err());
        assert!(parse_config("equation.m = 0.5").is_err());
        assert!(parse_config("equation.family = degenerate\nequation.p = 1.0").is_err());
    }

    #[test]
    fn rejects_small_grid_unknown_keys_and_malformed_numbers() {
        assert!(parse_config("grid.nx = 4").is_err());
        assert!(parse_config("grid.unknown = 3").is_err());
        assert!(parse_config("equation.sigma = abc").is_err());
        assert!(parse_config("equation.sigma = 2.5 # trailing comment").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let c = parse_config("grid.nx = 64\nequation.sigma = 1.3\nsweep.amplitudes = 0.5,1.25")
            .unwrap();
        let echoed = c.echo();
        let reparsed = parse_config(&echoed).unwrap();
        assert_eq!(c, reparsed);
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let c = parse_config("# a plain comment\n\nequation.sigma = 2.5\n").unwrap();
        assert_eq!(c.equation_sigma, 2.5);
    }
}
