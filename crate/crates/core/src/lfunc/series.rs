use num_complex::Complex64;

use crate::arith::primes_up_to;
use crate::error::{LabError, Result};
use crate::hecke::CuspForm;

/// A truncated series value and the rigorous bound on what was dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub terms: usize,
    pub tail_bound: f64,
}

fn require_convergent(s: Complex64) -> Result<()> {
    if s.re < 1.2 {
        return Err(LabError::Domain(format!("Re s = {} is below 1.2; the series is not usable there", s.re)));
    }
    Ok(())
}

/// `Σ_{n>N} d(n) n^{-σ}`, bounded through `Σ_{n<=x} d(n) <= x (ln x + 1)`
/// and partial summation.
pub fn divisor_tail(n: f64, sigma: f64) -> f64 {
    let d = sigma - 1.0;
    sigma * n.powf(1.0 - sigma) * ((n.ln() + 1.0) / d + 1.0 / (d * d))
}

/// Smallest power of two `N` with `divisor_tail(N, σ) <= tol`, or `None`
/// beyond `2^40`.
pub fn series_length(sigma: f64, tol: f64) -> Option<usize> {
    if sigma <= 1.0 {
        return None;
    }
    (1..=40).map(|e| 1usize << e).find(|&n| divisor_tail(n as f64, sigma) <= tol)
}

pub fn dirichlet_partial_sum(f: &CuspForm, s: Complex64, n: usize) -> Result<Complex64> {
    if n > f.max_n() {
        return Err(LabError::OutOfRange { n: n as u64, max: f.max_n() as u64 });
    }
    let lam = f.lambdas();
    // Sum from the small end last so the dominant terms are added to a small total.
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..=n).rev() {
        acc += lam[k] * (-s * (k as f64).ln()).exp();
    }
    Ok(acc)
}

/// `L(f, s)` by its Dirichlet series, truncated where the divisor-bound
/// tail drops below `tol` (absolute). Requires `Re s >= 1.2`.
pub fn dirichlet_series_l(f: &CuspForm, s: Complex64, tol: f64) -> Result<SeriesValue> {
    require_convergent(s)?;
    let mut lo = 1.0f64;
    let mut hi = 2.0f64;
    while divisor_tail(hi, s.re) > tol {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(LabError::capacity("Dirichlet series length", hi, f.max_n() as f64));
        }
    }
    while hi - lo > 1.0 {
        let mid = (0.5 * (lo + hi)).floor();
        if divisor_tail(mid, s.re) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi > f.max_n() as f64 {
        return Err(LabError::capacity("Dirichlet series length", hi, f.max_n() as f64));
    }
    let n = hi as usize;
    Ok(SeriesValue { value: dirichlet_partial_sum(f, s, n)?, terms: n, tail_bound: divisor_tail(n as f64, s.re) })
}

pub fn euler_product_partial(f: &CuspForm, s: Complex64, pmax: u64) -> Result<Complex64> {
    if pmax as usize > f.max_n() {
        return Err(LabError::OutOfRange { n: pmax, max: f.max_n() as u64 });
    }
    let mut log = Complex64::new(0.0, 0.0);
    for p in primes_up_to(pmax) {
        let x = (-s * (p as f64).ln()).exp();
        let local = Complex64::new(1.0, 0.0) - f.lambdas()[p as usize] * x + x * x;
        log -= local.ln();
    }
    Ok(log.exp())
}

/// `L(f, s)` by its Euler product over `p <= P`, with `P` chosen so the
/// relative effect of the omitted primes is below `tol`. Each omitted
/// local logarithm is at most `2p^{-σ}/(1-2^{-σ})` in modulus.
pub fn euler_product_l(f: &CuspForm, s: Complex64, tol: f64) -> Result<SeriesValue> {
    require_convergent(s)?;
    let sigma = s.re;
    let c = 2.0 / (1.0 - 2f64.powf(-sigma));
    let bound = |p: f64| {
        let b = c * p.powf(1.0 - sigma) / (sigma - 1.0);
        b.exp_m1()
    };
    let mut p = 16.0f64;
    while bound(p) > tol {
        p *= 1.25;
        if p > 1e15 {
            return Err(LabError::capacity("Euler product length", p, f.max_n() as f64));
        }
    }
    let p = p.ceil();
    if p > f.max_n() as f64 {
        return Err(LabError::capacity("Euler product length", p, f.max_n() as f64));
    }
    Ok(SeriesValue { value: euler_product_partial(f, s, p as u64)?, terms: p as usize, tail_bound: bound(p) })
}
