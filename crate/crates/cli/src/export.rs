//! CSV tables. Every real is written with 17 significant digits.

use std::fmt::Write as _;

use ma_couple::operators::Regime;
use ma_couple::{RadialProfile, Status};

use crate::error::CliError;

pub const PROFILE_HEADER: &str = "t,v1,v2,u1,u2";
pub const SWEEP_HEADER: &str = "alpha,beta,regime,status,v1_norm,residual,iterations,C,error";

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// Profile table on the grid nodes; `u_i = -v_i`.
pub fn profile_csv(v1: &RadialProfile, v2: &RadialProfile) -> Result<String, CliError> {
    v1.check_same_grid(v2)?;
    let mut out = String::with_capacity(96 * v1.len());
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for ((t, a), b) in v1.grid().nodes().iter().zip(v1.values()).zip(v2.values()) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            real(*t),
            real(*a),
            real(*b),
            real(-a),
            real(-b)
        );
    }
    Ok(out)
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub regime: Option<Regime>,
    pub status: Option<Status>,
    pub v1_norm: Option<f64>,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub c: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        let error = self
            .error
            .as_deref()
            .unwrap_or("")
            .replace([',', '\n', '\r'], ";");
        format!(
            "{},{},{},{},{},{},{},{},{}",
            real(self.alpha),
            real(self.beta),
            self.regime.map(Regime::as_str).unwrap_or(""),
            self.status.map(Status::as_str).unwrap_or(""),
            opt_real(self.v1_norm),
            opt_real(self.residual),
            self.iterations.map(|n| n.to_string()).unwrap_or_default(),
            opt_real(self.c),
            error
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ma_couple::Grid;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(real(0.1), "1.0000000000000001e-1");
        assert_eq!(real(1.0), "1.0000000000000000e0");
        assert_eq!(real(0.1).parse::<f64>().unwrap(), 0.1);
        let x = 0.179_035_768_123_456_78;
        assert_eq!(real(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn profile_table_layout() {
        let g = Grid::uniform(17).unwrap();
        let v1 = RadialProfile::from_fn(g.clone(), |t| 1.0 - t).unwrap();
        let v2 = RadialProfile::from_fn(g, |t| 2.0 * (1.0 - t)).unwrap();
        let csv = profile_csv(&v1, &v2).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 18);
        assert_eq!(lines[0], PROFILE_HEADER);
        let mid: Vec<f64> = lines[9].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(mid, vec![0.5, 0.5, 1.0, -0.5, -1.0]);
    }

    #[test]
    fn sweep_row_escapes_errors() {
        let row = SweepRow {
            alpha: 1.0,
            beta: 2.0,
            regime: None,
            status: None,
            v1_norm: None,
            residual: None,
            iterations: None,
            c: None,
            error: Some("bad, worse".into()),
        };
        let line = row.to_csv_line();
        assert_eq!(line.split(',').count(), 9);
        assert!(line.ends_with("bad; worse"));
    }
}
