//! Approximate functional equations.
//!
//! Central line, `|L|²` form:
//! `|L(1/2+it)|² = 2 Σ_N N^{-1/2} c_t(N) W_t(N)` with
//! `c_t(N) = Σ_{mn=N} λ(m)λ(n)(n/m)^{it}` and
//! `W_t(x) = (1/2πi) ∫ G(1/2+w+it)G(1/2+w-it)/|G(1/2+it)|² e^{aw²} x^{-w} dw/w`.
//!
//! Single value, any `s`:
//! `L(s) = Σ λ(n) n^{-s} V_s(n/β) + ε G(1-s)/G(s) Σ λ(n) n^{s-1} V_{1-s}(nβ)`
//! with `V_z(x) = (1/2πi) ∫ G(z+u)/G(z) e^{au²} x^{-u} du/u`. The split `β`
//! is complex: rotating it by `-arg(s + (k-1)/2)` cancels the `e^{π|v|/2}`
//! growth of the gamma ratio along the line, so a narrow Gaussian (small
//! `a`, hence short sums) stays well conditioned.

use num_complex::Complex64;

use super::kernel::{KernelSpec, MellinWeight, WeightTable};
use super::{check_length, conductor_scale, log_gamma_factor_ratio, power_tables, smoothed_length, EvalConfig, LPoint, Method};
use crate::error::{LabError, Result};
use crate::hecke::CuspForm;
use crate::special::half_erfc_inverse;

/// A complex value `L(s)` with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LValue {
    pub s: Complex64,
    pub value: Complex64,
    pub est_error: f64,
    pub terms: usize,
}

impl LValue {
    pub fn to_point(&self) -> LPoint {
        let a = self.value.norm();
        LPoint::new(
            self.s.re,
            self.s.im,
            a * a,
            2.0 * a * self.est_error + self.est_error * self.est_error,
            Method::LValueAfe,
            self.terms,
            0,
        )
    }

    /// `|L| <= est_error`.
    pub fn near_zero(&self) -> bool {
        self.value.norm() <= self.est_error
    }
}

fn kernel_spec(cfg: &EvalConfig, c: f64, split: f64) -> KernelSpec {
    KernelSpec { c, a: cfg.kernel_scale, step: cfg.afe_step, tol: cfg.series_tol, split }
}

/// Lower table edge: far enough left of the transition that `|V - 1|` is
/// negligible, confirmed against the direct evaluator.
fn table_floor(w: &MellinWeight, split: f64, cfg: &EvalConfig) -> f64 {
    let mut gap = 2.0 * cfg.kernel_scale.sqrt() * half_erfc_inverse(cfg.series_tol * 1e-3);
    for _ in 0..8 {
        let y = split - gap;
        if (w.eval(y) - 1.0).norm() < cfg.series_tol * 1e-2 {
            return y;
        }
        gap *= 1.25;
    }
    split - gap
}

/// Interpolation defect of a table, measured at a few off-grid points in
/// the transition region.
fn table_defect(w: &MellinWeight, tab: &WeightTable, split: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..7 {
        let y = split + (k as f64 - 3.0) * 0.37 + 0.001_3;
        if y > tab.y_lo() && y < tab.y_hi() {
            worst = worst.max((tab.eval(y) - w.eval(y)).norm());
        }
    }
    worst + 1e-16
}

/// Direct evaluation of the shifted central weight
/// `V_{α,β,t}(x) = (1/2πi) ∫ g_{α,β,t}(u) e^{au²} x^{-u} du/u` with
/// `g = G(1/2+α+u+it)G(1/2+β+u-it) / (G(1/2+α+it)G(1/2+β-it))`.
pub fn afe_v_weight(weight: u32, x: f64, t: f64, alpha: Complex64, beta: Complex64, cfg: &EvalConfig) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(LabError::Domain(format!("weight argument must be positive, got {x}")));
    }
    if t == 0.0 {
        return Err(LabError::Domain("the central weight is defined for t != 0".into()));
    }
    if !t.is_finite() || !alpha.re.is_finite() || !beta.re.is_finite() {
        return Err(LabError::NumericRange("non-finite AFE weight parameters".into()));
    }
    let (w, _) = central_weight(weight, t, alpha, beta, cfg)?;
    let v = w.eval(x.ln());
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(LabError::NumericRange(format!("AFE weight overflowed at x = {x}")));
    }
    Ok(v)
}

fn central_weight(weight: u32, t: f64, alpha: Complex64, beta: Complex64, cfg: &EvalConfig) -> Result<(MellinWeight, f64)> {
    let half = Complex64::new(0.5, 0.0);
    let it = Complex64::new(0.0, t);
    let log_k = move |u: Complex64| -> Result<Complex64> {
        Ok(log_gamma_factor_ratio(weight, half + alpha + it, u)? + log_gamma_factor_ratio(weight, half + beta - it, u)?)
    };
    let scale = conductor_scale(weight, half + it).powi(2);
    let split = scale.ln();
    Ok((MellinWeight::new(kernel_spec(cfg, cfg.afe_c, split), &log_k)?, split))
}

/// `c(N) = Σ_{mn=N} λ(m)λ(n) m^{-α-it} n^{-β+it}` for `N <= len`.
pub fn shifted_coefficients(f: &CuspForm, alpha: f64, beta: f64, t: f64, len: usize) -> Result<Vec<Complex64>> {
    if len > f.max_n() {
        return Err(LabError::OutOfRange { n: len as u64, max: f.max_n() as u64 });
    }
    let lam = f.lambdas();
    let (ma, pa) = power_tables(alpha, t, len);
    let (mb, _) = power_tables(beta, 0.0, len);
    let mut out = vec![Complex64::new(0.0, 0.0); len + 1];
    for m in 1..=len {
        if lam[m] == 0.0 {
            continue;
        }
        let am = pa[m] * (lam[m] * ma[m]);
        for n in 1..=len / m {
            out[m * n] += am * pa[n].conj() * (lam[n] * mb[n]);
        }
    }
    Ok(out)
}

/// `|L(f, 1/2 + it)|²` by the central-line approximate functional equation.
pub fn abs_l_squared_afe(f: &CuspForm, s: Complex64, cfg: &EvalConfig) -> Result<LPoint> {
    cfg.validate()?;
    if (s.re - 0.5).abs() > 1e-15 {
        return Err(LabError::Domain(format!("the |L|² functional equation is central-line only (σ = {})", s.re)));
    }
    let t = s.im;
    let zero = Complex64::new(0.0, 0.0);
    let (w, split) = central_weight(f.weight(), t, zero, zero, cfg)?;
    let len = smoothed_length(split.exp(), 0.5, cfg.kernel_scale, cfg.series_tol, 3);
    let n = check_length(f, len, cfg, "central AFE length")?;
    let y_hi = (n as f64).ln() + cfg.vgrid_step;
    let y_lo = table_floor(&w, split, cfg).max(-cfg.vgrid_step);
    let tab = w.tabulate(y_lo, y_hi.max(y_lo + 8.0 * cfg.vgrid_step), cfg.vgrid_step);
    let defect = table_defect(&w, &tab, split);

    let coeff = shifted_coefficients(f, 0.0, 0.0, t, n)?;
    let (mag, _) = power_tables(0.5, 0.0, n);
    let mut acc = 0.0;
    let mut abs_sum = 0.0;
    for k in 1..=n {
        let c = coeff[k].re;
        if c == 0.0 {
            continue;
        }
        let term = c * mag[k] * tab.eval((k as f64).ln()).re;
        acc += term;
        abs_sum += (c * mag[k]).abs();
    }
    let value = 2.0 * acc;
    let tail = w.eval((n as f64).ln()).norm() * (n as f64).sqrt() * (n as f64).ln().powi(3);
    let est = 2.0 * (tail + defect * abs_sum + 64.0 * f64::EPSILON * abs_sum) + cfg.series_tol;
    Ok(LPoint::new(0.5, t, value, est, Method::AbsSquaredAfe, n, w.nodes()))
}

/// One of the two sums of the single-value equation:
/// `Σ λ(n) n^{-σ} e^{∓it ln n} V(ln n)`.
struct HalfSum {
    value: Complex64,
    abs_sum: f64,
    est: f64,
    terms: usize,
}

fn half_sum(f: &CuspForm, z: Complex64, log_beta: Complex64, c: f64, cfg: &EvalConfig) -> Result<HalfSum> {
    let k = f.weight();
    let log_k = move |u: Complex64| -> Result<Complex64> { Ok(log_gamma_factor_ratio(k, z, u)? + u * log_beta) };
    let split = conductor_scale(k, z).ln() + log_beta.re;
    let w = MellinWeight::new(kernel_spec(cfg, c, split), &log_k)?;
    let len = smoothed_length(split.exp(), z.re, cfg.kernel_scale, cfg.series_tol, 1).max(4.0);
    let n = check_length(f, len, cfg, "single-value AFE length")?;
    let y_hi = (n as f64).ln() + cfg.vgrid_step;
    let y_lo = table_floor(&w, split, cfg).max(-cfg.vgrid_step);
    let tab = w.tabulate(y_lo, y_hi.max(y_lo + 8.0 * cfg.vgrid_step), cfg.vgrid_step);
    let defect = table_defect(&w, &tab, split);

    let (mag, ph) = power_tables(z.re, z.im, n);
    let lam = f.lambdas();
    let mut value = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    let mut trans_sum = 0.0;
    let y_floor = tab.y_lo();
    for m in 1..=n {
        if lam[m] == 0.0 {
            continue;
        }
        let a = lam[m] * mag[m];
        let y = (m as f64).ln();
        if y < y_floor {
            value += ph[m] * a;
        } else {
            value += ph[m] * tab.eval(y) * a;
            trans_sum += a.abs();
        }
        abs_sum += a.abs();
    }
    let nf = n as f64;
    let tail = w.eval(nf.ln()).norm() * nf.powf((1.0 - z.re).max(0.0)) * nf.ln();
    let est = tail + defect * trans_sum + 64.0 * f64::EPSILON * abs_sum;
    Ok(HalfSum { value, abs_sum, est, terms: n })
}

/// `L(f, s)` by the smoothed single-value functional equation with `|β| = 1`.
pub fn l_value_afe(f: &CuspForm, s: Complex64, cfg: &EvalConfig) -> Result<LValue> {
    l_value_afe_split(f, s, 1.0, cfg)
}

/// As [`l_value_afe`] with split modulus `|β| = beta_scale`. The result is
/// independent of `beta_scale` exactly when the functional equation (with
/// the right root number) holds, which makes it a self-check.
pub fn l_value_afe_split(f: &CuspForm, s: Complex64, beta_scale: f64, cfg: &EvalConfig) -> Result<LValue> {
    cfg.validate()?;
    if !(beta_scale > 0.0) {
        return Err(LabError::Domain(format!("split modulus must be positive, got {beta_scale}")));
    }
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(LabError::NumericRange(format!("non-finite argument {s}")));
    }
    let dist = (s.re - 0.5).abs();
    if dist > 2.0 {
        return Err(LabError::Domain(format!("single-value equation is used for |σ - 1/2| <= 2, got σ = {}", s.re)));
    }
    // Both expanded series need absolute convergence on the line: c > |σ - 1/2| + 1/2.
    let c = cfg.afe_c.max(dist + 1.0);
    let k = f.weight();
    let shift = (k as f64 - 1.0) / 2.0;
    let theta = (s + shift).arg();
    let log_beta = Complex64::new(beta_scale.ln(), -theta);
    let one = Complex64::new(1.0, 0.0);
    let first = half_sum(f, s, log_beta, c, cfg)?;
    let second = half_sum(f, one - s, -log_beta, c, cfg)?;
    let ratio = f.root_number() * log_gamma_factor_ratio(k, s, one - 2.0 * s)?.exp();
    let value = first.value + ratio * second.value;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(LabError::Evaluator { t: s.im, msg: "single-value functional equation is not finite".into() });
    }
    let r = ratio.norm();
    // The ratio's phase is of size |t| ln |t| and carries a rounding error
    // proportional to it.
    let phase_err = 8.0 * f64::EPSILON * (one - 2.0 * s).norm() * ((s + shift).norm().ln() + 2.0);
    let est = first.est
        + r * second.est
        + phase_err * r * second.value.norm()
        + cfg.series_tol * (1.0 + r)
        + 8.0 * f64::EPSILON * (first.abs_sum + r * second.abs_sum);
    Ok(LValue { s, value, est_error: est, terms: first.terms.max(second.terms) })
}
