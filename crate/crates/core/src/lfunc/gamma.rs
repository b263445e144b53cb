use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::Result;
use crate::special::{log_gamma, log_gamma_ratio};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln c_k` with `c_k = 2^{(3-k)/2} √π`.
pub fn log_gamma_constant(weight: u32) -> f64 {
    (3.0 - weight as f64) / 2.0 * LN_2 + 0.5 * PI.ln()
}

/// `ln G(s)` for a level-1 form of weight `k`:
/// `G(s) = c_k (2π)^{-s} Γ(s + (k-1)/2)`.
pub fn log_gamma_factor(weight: u32, s: Complex64) -> Result<Complex64> {
    let shift = (weight as f64 - 1.0) / 2.0;
    Ok(log_gamma_constant(weight) - s * LN_2PI + log_gamma(s + shift)?)
}

/// `ln G(s + u) - ln G(s)`, accurate even when both logarithms are large.
pub fn log_gamma_factor_ratio(weight: u32, s: Complex64, u: Complex64) -> Result<Complex64> {
    let shift = (weight as f64 - 1.0) / 2.0;
    Ok(log_gamma_ratio(s + shift, u)? - u * LN_2PI)
}

/// `ln` of the duplication-formula form
/// `π^{-s} Γ((s + (k-1)/2)/2) Γ((s + (k+1)/2)/2)`, which equals `G(s)`.
pub fn log_l_infinity(weight: u32, s: Complex64) -> Result<Complex64> {
    let k = weight as f64;
    Ok(-s * PI.ln() + log_gamma((s + (k - 1.0) / 2.0) / 2.0)? + log_gamma((s + (k + 1.0) / 2.0) / 2.0)?)
}

/// Analytic-conductor scale `|s + (k-1)/2| / 2π`, the point where the
/// gamma ratio `G(s+u)/G(s)` behaves like `scale^u`.
pub fn conductor_scale(weight: u32, s: Complex64) -> f64 {
    (s + (weight as f64 - 1.0) / 2.0).norm() / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplication_forms_agree() {
        for &k in &crate::hecke::SUPPORTED_WEIGHTS {
            for &(x, y) in &[(0.5, 3.0), (0.5, 100.0), (2.0, 0.0), (-0.3, 40.0), (1.7, 1000.0)] {
                let s = Complex64::new(x, y);
                let a = log_gamma_factor(k, s).unwrap();
                let b = log_l_infinity(k, s).unwrap();
                assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()), "k={k} s={s}: {a} vs {b}");
            }
        }
    }
}
