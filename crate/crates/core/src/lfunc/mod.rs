//! Evaluation of `L(f, s)`, `|L(f, s)|²` and their logarithms.
//!
//! Four evaluators are provided:
//!
//! * absolutely convergent Dirichlet series and Euler products (`Re s > 1`),
//! * the two-sided contour for `|L(s)|²` anywhere in the plane,
//! * a central-line approximate functional equation for `|L(1/2 + it)|²`,
//! * a smoothed approximate functional equation for the complex value
//!   `L(s)`, whose length grows like `t` rather than `t²`. This is the one
//!   that reaches the heights used for sampling.

mod afe;
mod contour;
mod diagnostics;
mod gamma;
pub mod kernel;
mod series;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hecke::CuspForm;
use crate::special::half_erfc_inverse;

pub use afe::{abs_l_squared_afe, afe_v_weight, l_value_afe, l_value_afe_split, shifted_coefficients, LValue};
pub use contour::{abs_l_squared_contour, abs_l_squared_contour_with};
pub use diagnostics::{fe_residual, log_shift_integral, LogShiftReport};
pub use gamma::{conductor_scale, log_gamma_constant, log_gamma_factor, log_gamma_factor_ratio, log_l_infinity};
pub use series::{divisor_tail, series_length, dirichlet_partial_sum, dirichlet_series_l, euler_product_l, euler_product_partial, SeriesValue};

/// Numerical settings shared by the evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Line abscissa for the contour integrals (raised per side when the
    /// shifted Dirichlet series would not converge absolutely).
    pub contour_c: f64,
    /// Gaussian scale `a` in the test function `e^{a u²}`.
    pub kernel_scale: f64,
    /// Trapezoid step on vertical lines.
    pub quad_step: f64,
    /// Target for kernel truncation and series tails.
    pub series_tol: f64,
    /// Largest Dirichlet-series length any evaluator may use.
    pub length_cap: usize,
    /// Grid spacing in `ln x` for cached weights.
    pub vgrid_step: f64,
    /// Line abscissa for the approximate-functional-equation weights.
    pub afe_c: f64,
    /// Trapezoid step for those weights. Their integrands are entire apart
    /// from the pole at the origin, so a coarser step suffices.
    pub afe_step: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            contour_c: 1.0,
            kernel_scale: 0.04,
            quad_step: 0.05,
            series_tol: 1e-13,
            length_cap: 4_000_000,
            vgrid_step: 0.005,
            afe_c: 1.0,
            afe_step: 0.1,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.contour_c > 0.0
            && self.kernel_scale > 0.0
            && self.quad_step > 0.0
            && self.series_tol > 0.0
            && self.series_tol < 1e-3
            && self.vgrid_step > 0.0
            && self.afe_c > 0.0
            && self.afe_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(LabError::Domain(format!("invalid evaluator configuration {self:?}")))
        }
    }

    /// Halfwidth `V0` of the node grid on a line at abscissa `c`; it
    /// satisfies `e^{a(c² - V0²)} = series_tol`.
    pub fn quad_halfwidth(&self, c: f64) -> f64 {
        (c * c + (1.0 / self.series_tol).ln() / self.kernel_scale).sqrt()
    }
}

/// Which evaluator produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Series,
    Contour,
    AbsSquaredAfe,
    LValueAfe,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Contour => "contour",
            Method::AbsSquaredAfe => "abs-squared-afe",
            Method::LValueAfe => "l-value-afe",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "series" => Some(Method::Series),
            "contour" => Some(Method::Contour),
            "afe" | "abs-squared-afe" => Some(Method::AbsSquaredAfe),
            "lvalue" | "l-value-afe" => Some(Method::LValueAfe),
            _ => None,
        }
    }
}

/// `|L(σ + it)|²` with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LPoint {
    pub sigma: f64,
    pub t: f64,
    pub abs_l_sq: f64,
    pub est_error: f64,
    pub method: Method,
    pub terms: usize,
    pub nodes: usize,
    /// Set when `|L|²` does not exceed its own error estimate.
    pub near_zero: bool,
}

impl LPoint {
    pub(crate) fn new(sigma: f64, t: f64, abs_l_sq: f64, est_error: f64, method: Method, terms: usize, nodes: usize) -> Self {
        LPoint { sigma, t, abs_l_sq, est_error, method, terms, nodes, near_zero: abs_l_sq <= est_error }
    }

    pub fn log_abs_l(&self) -> f64 {
        0.5 * self.abs_l_sq.ln()
    }
}

/// `ln |L(f, σ + it)|` together with the point it came from. The default
/// route is the smoothed single-L functional equation; `Method::Series`
/// is honoured for `σ >= 1.5`, and the two `|L|²` routes on request.
pub fn log_abs_l(f: &CuspForm, sigma: f64, t: f64, cfg: &EvalConfig) -> Result<LPoint> {
    log_abs_l_with(f, sigma, t, cfg, Method::LValueAfe)
}

pub fn log_abs_l_with(f: &CuspForm, sigma: f64, t: f64, cfg: &EvalConfig, method: Method) -> Result<LPoint> {
    let s = Complex64::new(sigma, t);
    match method {
        Method::LValueAfe => Ok(l_value_afe(f, s, cfg)?.to_point()),
        Method::Contour => abs_l_squared_contour(f, s, cfg),
        Method::AbsSquaredAfe => abs_l_squared_afe(f, s, cfg),
        Method::Series => {
            if sigma < 1.5 {
                return Err(LabError::Domain(format!("series route needs Re s >= 1.5, got {sigma}")));
            }
            // The divisor-bound tail decays like N^{1-σ}; with a finite table
            // the attainable bound is the tail at the table length.
            let tol = cfg.series_tol.max(series::divisor_tail(f.max_n() as f64, sigma) * (1.0 + 1e-9));
            let v = dirichlet_series_l(f, s, tol)?;
            let abs = v.value.norm();
            Ok(LPoint::new(sigma, t, abs * abs, 2.0 * abs * v.tail_bound + v.tail_bound.powi(2), Method::Series, v.terms, 0))
        }
    }
}

/// Largest table [`required_length`] asks for on the series route.
pub const SERIES_TABLE_MAX: usize = 1 << 18;

/// Eigenvalue-table length needed to evaluate `method` at `s`.
pub fn required_length(weight: u32, s: Complex64, method: Method, cfg: &EvalConfig) -> usize {
    let a = cfg.kernel_scale;
    let tol = cfg.series_tol;
    let one = Complex64::new(1.0, 0.0);
    let n = match method {
        Method::Series => return series_length(s.re, tol).unwrap_or(SERIES_TABLE_MAX).min(SERIES_TABLE_MAX),
        Method::LValueAfe => [s, one - s]
            .iter()
            .map(|z| smoothed_length(conductor_scale(weight, *z), z.re, a, tol, 1).max(4.0))
            .fold(0.0, f64::max),
        Method::AbsSquaredAfe => smoothed_length(conductor_scale(weight, s).powi(2), 0.5, a, tol, 3),
        Method::Contour => [s, one - s]
            .iter()
            .map(|z| smoothed_length(conductor_scale(weight, *z).powi(2), z.re, a, tol, 3))
            .fold(0.0, f64::max),
    };
    n.ceil() as usize
}

/// Length `N = scale · M` at which `½ erfc(ln M / 2√a) · N^{max(1-σ,0)} (ln N)^p`
/// drops below `tol`; this bounds what a truncated smoothed sum discards.
pub(crate) fn smoothed_length(scale: f64, sigma: f64, a: f64, tol: f64, p: i32) -> f64 {
    let scale = scale.max(1.0);
    let mut n = scale * 2.0;
    for _ in 0..6 {
        let growth = n.powf((1.0 - sigma).max(0.0)) * n.ln().max(1.0).powi(p);
        let y = half_erfc_inverse(tol / growth);
        n = scale * (2.0 * a.sqrt() * y).exp();
    }
    n.max(30.0)
}

/// Check a requested series length against both the configured cap and the
/// eigenvalue table.
pub(crate) fn check_length(f: &CuspForm, n: f64, cfg: &EvalConfig, what: &str) -> Result<usize> {
    if n > cfg.length_cap as f64 {
        return Err(LabError::capacity(what, n, cfg.length_cap as f64));
    }
    if n > f.max_n() as f64 {
        return Err(LabError::capacity(format!("{what} (eigenvalue table)"), n, f.max_n() as f64));
    }
    Ok(n.ceil() as usize)
}

/// `n^{-σ}` and `n^{-it}` for `1 <= n <= len`, built multiplicatively
/// from prime values by a linear sieve.
pub(crate) fn power_tables(sigma: f64, t: f64, len: usize) -> (Vec<f64>, Vec<Complex64>) {
    let mut mag = vec![0.0; len + 1];
    let mut ph = vec![Complex64::new(0.0, 0.0); len + 1];
    if len == 0 {
        return (mag, ph);
    }
    mag[1] = 1.0;
    ph[1] = Complex64::new(1.0, 0.0);
    let mut spf = vec![0u32; len + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=len {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
            let l = (i as f64).ln();
            mag[i] = (-sigma * l).exp();
            ph[i] = Complex64::from_polar(1.0, -t * l);
        }
        for &p in &primes {
            let p = p as usize;
            if p > spf[i] as usize || i * p > len {
                break;
            }
            let m = i * p;
            spf[m] = p as u32;
            mag[m] = mag[i] * mag[p];
            ph[m] = ph[i] * ph[p];
        }
    }
    (mag, ph)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_tables_match_direct() {
        let (m, p) = power_tables(0.6, 1234.5, 5000);
        for n in [2usize, 3, 64, 97, 1000, 4999, 5000] {
            let l = (n as f64).ln();
            assert!((m[n] - (-0.6 * l).exp()).abs() < 1e-15 * m[n].max(1e-300) * 20.0);
            assert!((p[n] - Complex64::from_polar(1.0, -1234.5 * l)).norm() < 1e-12);
        }
    }

    #[test]
    fn halfwidth_invariant() {
        let c = EvalConfig::default();
        let v0 = c.quad_halfwidth(c.contour_c);
        let edge = (c.kernel_scale * (c.contour_c.powi(2) - v0 * v0)).exp();
        assert!(edge <= c.series_tol * 1.0000001);
    }
}
