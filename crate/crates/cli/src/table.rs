//! Scan rows and their CSV encoding.

use std::fmt::Write as _;

use szego_core::Method;

pub const CSV_HEADER: &str = "z_arg,epsilon,lambda_abs,n,method,gamma_hat,bound,margin";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    /// Argument of `z` as a fraction of a full turn.
    pub z_arg: f64,
    pub epsilon: f64,
    pub lambda_abs: f64,
    pub n: usize,
    pub method: Method,
    pub gamma_hat: f64,
    pub bound: f64,
    pub margin: f64,
}

impl ScanRow {
    pub fn new(z_arg: f64, epsilon: f64, lambda_abs: f64, n: usize, method: Method, gamma_hat: f64, bound: f64) -> Self {
        Self {
            z_arg,
            epsilon,
            lambda_abs,
            n,
            method,
            gamma_hat,
            bound,
            margin: gamma_hat - bound,
        }
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_real(r.z_arg),
            fmt_real(r.epsilon),
            fmt_real(r.lambda_abs),
            r.n,
            r.method,
            fmt_real(r.gamma_hat),
            fmt_real(r.bound),
            fmt_real(r.margin),
        );
    }
    out
}
