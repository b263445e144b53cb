use num_complex::Complex64;
use serde::Serialize;

use super::{l_value_afe_split, log_abs_l, log_gamma_factor_ratio, EvalConfig};
use crate::error::{LabError, Result};
use crate::hecke::CuspForm;

/// Functional-equation residual at `s`:
/// `|L(s) - ε G(1-s)/G(s) L(1-s)| / (|L(s)| + |ε G(1-s)/G(s) L(1-s)|)`,
/// where `L(s)` and `L(1-s)` come from the single-value equation with
/// different split moduli (1 and `beta`). The two agree only if the
/// functional equation and root number are right.
pub fn fe_residual(f: &CuspForm, s: Complex64, beta: f64, cfg: &EvalConfig) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let left = l_value_afe_split(f, s, 1.0, cfg)?.value;
    let right = l_value_afe_split(f, one - s, beta, cfg)?.value;
    let ratio = f.root_number() * log_gamma_factor_ratio(f.weight(), s, one - 2.0 * s)?.exp();
    let image = ratio * right;
    let scale = left.norm() + image.norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((left - image).norm() / scale)
}

#[derive(Debug, Clone, Serialize)]
pub struct LogShiftReport {
    pub t: f64,
    pub integral: f64,
    /// `integral / ((σ0 - 1/2) ln T)`.
    pub constant: f64,
}

/// `∫_{t-1}^{t+1} |ln|L(1/2+iu)| - ln|L(σ0+iu)|| du` by the midpoint rule
/// with `panels` panels, normalised by `(σ0 - 1/2) ln T`.
pub fn log_shift_integral(f: &CuspForm, t: f64, sigma0: f64, big_t: f64, panels: usize, cfg: &EvalConfig) -> Result<LogShiftReport> {
    if !(sigma0 > 0.5) || panels == 0 {
        return Err(LabError::Domain("need σ0 > 1/2 and at least one panel".into()));
    }
    let h = 2.0 / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let u = t - 1.0 + (i as f64 + 0.5) * h;
        let a = log_abs_l(f, 0.5, u, cfg)?.log_abs_l();
        let b = log_abs_l(f, sigma0, u, cfg)?.log_abs_l();
        acc += (a - b).abs() * h;
    }
    Ok(LogShiftReport { t, integral: acc, constant: acc / ((sigma0 - 0.5) * big_t.ln()) })
}
