//! CSV schemas: run rows, sweep rows, verify rows.  Every file starts with
//! the resolved config echoed as `# key = value` lines, then a header row;
//! numeric cells carry at least 12 significant digits.

use heislab::solver::{DiagnosticsRow, RunRecord};

pub fn fmt_num(v: f64) -> String {
    format!("{v:.15e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// t,dt,sup_norm,mass,J_theta,y_lambda,clamp_l1
pub fn run_csv(header: &str, record: &RunRecord) -> String {
    let mut out = String::from(header);
    out.push_str(&format!("# classification = {}\n", record.classification.label()));
    if let Some(t) = record.blow_up_time() {
        out.push_str(&format!("# t_blow = {}\n", fmt_num(t)));
    }
    out.push_str(&format!("# truncation_flagged = {}\n", record.truncation_flagged));
    out.push_str("t,dt,sup_norm,mass,J_theta,y_lambda,clamp_l1\n");
    for row in &record.rows {
        out.push_str(&run_row(row));
    }
    out
}

fn run_row(r: &DiagnosticsRow) -> String {
    format!(
        "{},{},{},{},{},{},{}\n",
        fmt_num(r.t),
        fmt_num(r.dt),
        fmt_num(r.sup_norm),
        fmt_num(r.mass),
        fmt_num(r.j_theta),
        fmt_opt(r.y_lambda),
        fmt_num(r.clamp_l1),
    )
}

/// One sweep result row, pre-sorted by the caller.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub m_or_q: f64,
    pub sigma_or_p: f64,
    pub amplitude: f64,
    pub classification: String,
    pub t_blow: Option<f64>,
    pub t_max_reached: f64,
    pub sup_final: f64,
}

/// m_or_q,sigma_or_p,amplitude,classification,t_blow,t_max_reached,sup_final
pub fn sweep_csv(header: &str, rows: &[SweepRow]) -> String {
    let mut out = String::from(header);
    out.push_str("m_or_q,sigma_or_p,amplitude,classification,t_blow,t_max_reached,sup_final\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_num(r.m_or_q),
            fmt_num(r.sigma_or_p),
            fmt_num(r.amplitude),
            r.classification,
            fmt_opt(r.t_blow),
            fmt_num(r.t_max_reached),
            fmt_num(r.sup_final),
        ));
    }
    out
}

/// One verification check row.
#[derive(Debug, Clone)]
pub struct VerifyRow {
    pub check_name: String,
    pub target: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerifyRow {
    /// Pass when |measured - target| <= tolerance.
    pub fn banded(name: &str, target: f64, measured: f64, tolerance: f64) -> Self {
        VerifyRow {
            check_name: name.to_string(),
            target,
            measured,
            tolerance,
            pass: (measured - target).abs() <= tolerance,
        }
    }

    /// Pass when measured <= target + tolerance (one-sided bound).
    pub fn bounded_above(name: &str, target: f64, measured: f64, tolerance: f64) -> Self {
        VerifyRow {
            check_name: name.to_string(),
            target,
            measured,
            tolerance,
            pass: measured <= target + tolerance,
        }
    }
}

/// check_name,target,measured,tolerance,pass
pub fn verify_csv(header: &str, rows: &[VerifyRow]) -> String {
    let mut out = String::from(header);
    out.push_str("check_name,target,measured,tolerance,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.check_name,
            fmt_num(r.target),
            fmt_num(r.measured),
            fmt_num(r.tolerance),
            r.pass,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        let s = fmt_num(1.0 / 3.0);
        assert!(s.starts_with("3.333333333333333"), "{s}");
    }

    #[test]
    fn verify_row_rules() {
        assert!(VerifyRow::banded("x", -2.0, -2.05, 0.1).pass);
        assert!(!VerifyRow::banded("x", -2.0, -2.2, 0.1).pass);
        assert!(VerifyRow::bounded_above("x", 1.0, 0.99, 0.0).pass);
        assert!(!VerifyRow::bounded_above("x", 1.0, 1.01, 0.0).pass);
    }
}
