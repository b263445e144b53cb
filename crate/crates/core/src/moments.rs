//! Exact finite-sum moments of prime sums over `t ∈ [T, 2T]`, their
//! quadrature cross-check, and the mean-value estimates behind them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize, primes_up_to};
use crate::error::{LabError, Result};
use crate::hecke::CuspForm;
use crate::mollifier::{build_p, DirichletPolynomial, PRange, Params, PolyBudget};
use crate::quad;

/// `k! / (α_1! ⋯ α_r!)` when `n = p_1^{α_1} ⋯ p_r^{α_r}` with every
/// `p_j <= X` and `Σ α_j = k`; zero otherwise.
pub fn multinomial_a_k(n: u64, k: u32, x: f64) -> Result<u64> {
    if n == 0 {
        return Err(LabError::Domain("a_k(n) needs n >= 1".into()));
    }
    let fac = factorize(n);
    if fac.iter().any(|&(p, _)| p as f64 > x) || fac.iter().map(|&(_, e)| e).sum::<u32>() != k {
        return Ok(0);
    }
    // Build the multinomial as a product of binomials to stay in range.
    let mut acc: u128 = 1;
    let mut used = 0u32;
    for &(_, e) in &fac {
        for i in 1..=e {
            acc = acc * (used + i) as u128 / i as u128;
        }
        used += e;
        if acc > u64::MAX as u128 {
            return Err(LabError::capacity("a_k(n)", acc as f64, u64::MAX as f64));
        }
    }
    Ok(acc as u64)
}

/// `P^k` for a finite polynomial, without index truncation.
pub fn power(p: &DirichletPolynomial, k: u32, max_terms: usize) -> Result<DirichletPolynomial> {
    let budget = PolyBudget { length_cap: u64::MAX, max_terms };
    let mut acc = DirichletPolynomial::one(format!("({})^{k}", p.description));
    for _ in 0..k {
        acc = acc.mul(p, &budget)?;
    }
    Ok(acc)
}

/// Largest relative mismatch found by [`power_expand_check`].
#[derive(Debug, Clone, Serialize)]
pub struct PowerCheck {
    pub passed: bool,
    pub worst: f64,
    pub worst_index: u64,
    pub terms: usize,
}

/// Expand `P0^k` by convolution and compare every coefficient with
/// `a_k(n) ∏ λ(p_j)^{α_j}`.
pub fn power_expand_check(p0: &DirichletPolynomial, k: u32, f: &CuspForm, x: f64, max_terms: usize) -> Result<PowerCheck> {
    let pk = power(p0, k, max_terms)?;
    let mut worst: f64 = 0.0;
    let mut worst_index = 1;
    let mut scale: f64 = 0.0;
    for (n, c) in pk.terms() {
        scale = scale.max(c.norm());
        let ak = multinomial_a_k(n, k, x)? as f64;
        let mut prod = ak;
        if ak != 0.0 {
            for (p, e) in factorize(n) {
                prod *= f.lambda(p)?.powi(e as i32);
            }
        }
        let d = (c - prod).norm() / (1.0 + prod.abs());
        if d > worst {
            worst = d;
            worst_index = n;
        }
    }
    // Any a_k(n) != 0 index missing from the expansion is also a failure.
    let support: usize = primes_up_to(x.floor().max(1.0) as u64).len();
    let expected = binomial(support as u64 + k as u64 - 1, k as u64);
    let count_ok = expected.map_or(true, |e| e == pk.terms().filter(|&(n, _)| multinomial_a_k(n, k, x).unwrap_or(0) > 0).count() as u64);
    Ok(PowerCheck { passed: worst <= 1e-12 && count_ok, worst, worst_index, terms: pk.len() })
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// `ln(m/n)` without the cancellation of `ln m - ln n` for nearby values.
fn log_ratio(m: u64, n: u64) -> f64 {
    if m >= n {
        ((m - n) as f64 / n as f64).ln_1p()
    } else {
        -((n - m) as f64 / m as f64).ln_1p()
    }
}

/// `∫_T^{2T} (m/n)^{it} dt` in closed form. Off the diagonal it is
/// written as `e^{3iLT/2} · 2 sin(LT/2) / L` with `L = ln(m/n)`, which has
/// no cancellation when `L` is small.
pub fn mean_value_integral(m: u64, n: u64, t: f64) -> Result<Complex64> {
    if m == 0 || n == 0 {
        return Err(LabError::Domain("mean-value integral needs m, n >= 1".into()));
    }
    if m == n {
        return Ok(Complex64::new(t, 0.0));
    }
    let l = log_ratio(m, n);
    Ok(Complex64::from_polar(2.0 * (0.5 * l * t).sin() / l, 1.5 * l * t))
}

/// Constants for the three estimates on `1/|ln(m/n)|` at `m != n`: at most
/// `C1` when `m >= 2n` or `m <= n/2`, at most `C2 · m/|m - n|` when
/// `n/2 < m < 2n`, at most `C3 · √(mn)` always. These are the sharp
/// values: `1/ln 2` at `m = 2n`, `1/ln 2` as `m → n/2`, and
/// `1/(√2 ln 2)` at `(m, n) = (2, 1)`.
pub const ES_C1: f64 = std::f64::consts::LOG2_E;
pub const ES_C2: f64 = std::f64::consts::LOG2_E;
pub const ES_C3: f64 = std::f64::consts::LOG2_E * std::f64::consts::FRAC_1_SQRT_2;

/// Outcome of [`estimate_suite`].
#[derive(Debug, Clone, Serialize)]
pub struct EstimateSuite {
    pub pairs: usize,
    pub failures: Vec<(u64, u64, &'static str)>,
    /// Largest observed ratio to each bound (with the constant removed).
    pub worst_c1: f64,
    pub worst_c2: f64,
    pub worst_c3: f64,
}

/// Check the closed-form integral and the three bounds on all pairs
/// `1 <= m, n <= limit` and every height in `heights`.
pub fn estimate_suite(limit: u64, heights: &[f64]) -> Result<EstimateSuite> {
    let mut failures = Vec::new();
    let (mut w1, mut w2, mut w3) = (0f64, 0f64, 0f64);
    let mut pairs = 0;
    let slack = 1.0 + 1e-12;
    for m in 1..=limit {
        for n in 1..=limit {
            pairs += 1;
            for &t in heights {
                let v = mean_value_integral(m, n, t)?;
                if m == n {
                    if v != Complex64::new(t, 0.0) {
                        failures.push((m, n, "diagonal equals T"));
                    }
                    continue;
                }
                let inv = 1.0 / log_ratio(m, n).abs();
                if v.norm() > t.min(2.0 * inv) * slack {
                    failures.push((m, n, "|I| <= min(T, 2/|ln(m/n)|)"));
                }
            }
            if m == n {
                continue;
            }
            let inv = 1.0 / log_ratio(m, n).abs();
            if m >= 2 * n || 2 * m <= n {
                w1 = w1.max(inv);
                if inv > ES_C1 * slack {
                    failures.push((m, n, "far pairs"));
                }
            } else {
                let r = inv / (m as f64 / m.abs_diff(n) as f64);
                w2 = w2.max(r);
                if r > ES_C2 * slack {
                    failures.push((m, n, "near pairs"));
                }
            }
            let r3 = inv / ((m as f64) * (n as f64)).sqrt();
            w3 = w3.max(r3);
            if r3 > ES_C3 * slack {
                failures.push((m, n, "all pairs"));
            }
        }
    }
    Ok(EstimateSuite { pairs, failures, worst_c1: w1, worst_c2: w2, worst_c3: w3 })
}

/// A form with its weight in the linear combination `ψ(p) = Σ a_j λ_j(p)`.
#[derive(Debug, Clone, Copy)]
pub struct Weighted<'a> {
    pub form: &'a CuspForm,
    pub a: f64,
}

/// Moment `∫_T^{2T} P(σ0+it)^k conj(P(σ0+it))^ℓ dt`.
#[derive(Debug, Clone)]
pub struct MomentSpec<'a> {
    pub forms: Vec<Weighted<'a>>,
    pub k: u32,
    pub l: u32,
    pub t: f64,
    pub sigma0: f64,
    pub x: f64,
    /// Include prime powers `p^j <= X` with coefficient `Λ_f(p^j)/ln p^j`.
    pub prime_powers: bool,
    /// Skip the numerical t-integral.
    pub skip_quadrature: bool,
    pub max_pairs: usize,
}

impl<'a> MomentSpec<'a> {
    pub fn single(form: &'a CuspForm, k: u32, l: u32, t: f64, sigma0: f64, x: f64) -> Self {
        MomentSpec { forms: vec![Weighted { form, a: 1.0 }], k, l, t, sigma0, x, prime_powers: false, skip_quadrature: false, max_pairs: 50_000_000 }
    }

    /// `X^{k+ℓ} <= T`, the regime in which the finite sum has the
    /// asymptotic shape.
    pub fn asymptotic_regime(&self) -> bool {
        (self.k + self.l) as f64 * self.x.ln() <= self.t.ln()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub k: u32,
    pub l: u32,
    #[serde(rename = "T")]
    pub t: f64,
    pub sigma0: f64,
    #[serde(rename = "X")]
    pub x: f64,
    pub exact_re: f64,
    pub exact_im: f64,
    /// The `m = n` part of the double sum.
    pub diagonal: f64,
    pub quad_re: f64,
    pub quad_im: f64,
    pub quad_error: f64,
    pub prediction: f64,
    pub budget: f64,
    pub asymptotic_regime: bool,
    pub pairs: usize,
}

impl MomentReport {
    pub fn exact(&self) -> Complex64 {
        Complex64::new(self.exact_re, self.exact_im)
    }

    pub fn quadrature(&self) -> Complex64 {
        Complex64::new(self.quad_re, self.quad_im)
    }

    pub fn agrees(&self) -> bool {
        (self.exact() - self.quadrature()).norm() <= self.budget
    }
}

/// Neumaier-compensated complex sum.
#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: Complex64,
    comp: Complex64,
}

impl Neumaier {
    fn add(&mut self, x: Complex64) {
        let t = self.sum + x;
        let fix = |s: f64, x: f64, t: f64| if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        self.comp += Complex64::new(fix(self.sum.re, x.re, t.re), fix(self.sum.im, x.im, t.im));
        self.sum = t;
    }
    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

/// The linear-combination prime sum `Σ_j a_j P_j` up to `X`.
pub fn combined_p(spec: &MomentSpec) -> Result<DirichletPolynomial> {
    let params = Params { t: spec.t, w: 0.0, x: spec.x, y: spec.x, sigma0: spec.sigma0, k1: 1, k2: 1, notes: Vec::new() };
    let range = if spec.prime_powers { PRange::Full } else { PRange::PrimesOnly };
    let mut acc = DirichletPolynomial::new("Σ a_j P_j");
    for w in &spec.forms {
        let p = build_p(w.form, &params, range)?;
        acc = acc.sum(&p.scaled(Complex64::new(w.a, 0.0)));
    }
    acc.description = "Σ a_j P_j".into();
    Ok(acc)
}

/// `k! (Σ_{p <= X} ψ(p)^2 p^{-2σ0})^k` with `ψ(p) = Σ a_j λ_j(p)`.
pub fn squarefree_main_term(forms: &[Weighted], k: u32, sigma0: f64, x: f64) -> Result<f64> {
    let mut base = 0.0;
    for p in primes_up_to(x.floor().max(1.0) as u64) {
        let mut psi = 0.0;
        for w in forms {
            psi += w.a * w.form.lambda(p)?;
        }
        base += psi * psi * (p as f64).powf(-2.0 * sigma0);
    }
    Ok((1..=k).map(|i| i as f64).product::<f64>() * base.powi(k as i32))
}

/// `T Σ_n a_k(n)^2 ∏ ψ(p_j)^{2α_j} n^{-2σ0}` over `n` with `Ω(n) = k` and
/// all prime factors `<= X`, enumerated as multisets of primes.
pub fn diagonal_by_multinomials(forms: &[Weighted], k: u32, sigma0: f64, x: f64, t: f64) -> Result<f64> {
    let primes = primes_up_to(x.floor().max(1.0) as u64);
    let mut psi = Vec::with_capacity(primes.len());
    for &p in &primes {
        let mut v = 0.0;
        for w in forms {
            v += w.a * w.form.lambda(p)?;
        }
        psi.push(v * (p as f64).powf(-sigma0));
    }
    // Walk multisets p_{i_1} <= ... <= p_{i_k}, carrying the coefficient
    // product and the multinomial a_k(n) built up one prime at a time.
    fn walk(psi: &[f64], start: usize, left: u32, used: u32, run: u32, coeff: f64, multi: f64, out: &mut f64) {
        if left == 0 {
            *out += (multi * coeff).powi(2);
            return;
        }
        for i in start..psi.len() {
            let run2 = if i == start && used > 0 { run + 1 } else { 1 };
            // Appending one more prime multiplies k!/∏α! by (used+1)/run2.
            let multi2 = multi * (used + 1) as f64 / run2 as f64;
            walk(psi, i, left - 1, used + 1, run2, coeff * psi[i], multi2, out);
        }
    }
    let mut acc = 0.0;
    walk(&psi, 0, k, 0, 0, 1.0, 1.0, &mut acc);
    Ok(t * acc)
}

/// `k`-th central moment of a normal law: `(k-1)!! v^{k/2}` for even `k`.
pub fn gaussian_moment_prediction(k: u32, variance: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let dfact: f64 = (1..k).step_by(2).map(|i| i as f64).product();
    dfact * variance.powi(k as i32 / 2)
}

pub fn moment_exact(spec: &MomentSpec) -> Result<MomentReport> {
    if !(spec.t > 0.0) || !(spec.x >= 2.0) {
        return Err(LabError::Domain(format!("moment needs T > 0 and X >= 2 (T = {}, X = {})", spec.t, spec.x)));
    }
    if spec.forms.is_empty() {
        return Err(LabError::Domain("moment needs at least one form".into()));
    }
    let p = combined_p(spec)?;
    let ak = power(&p, spec.k, spec.max_pairs)?;
    let al = power(&p, spec.l, spec.max_pairs)?;
    let pairs = ak.len().saturating_mul(al.len());
    if pairs > spec.max_pairs {
        return Err(LabError::capacity("moment double sum pairs", pairs as f64, spec.max_pairs as f64));
    }
    let sig = spec.sigma0;
    let left: Vec<(u64, Complex64)> = ak.terms().map(|(m, c)| (m, c * (m as f64).powf(-sig))).collect();
    let right: Vec<(u64, Complex64)> = al.terms().map(|(n, c)| (n, c.conj() * (n as f64).powf(-sig))).collect();
    let right_map: BTreeMap<u64, Complex64> = right.iter().copied().collect();

    // Rows in index order, each compensated; then a fixed-order total.
    let rows: Vec<Result<Complex64>> = left
        .par_iter()
        .map(|&(m, a)| {
            let mut acc = Neumaier::default();
            for &(n, b) in &right {
                // m^{-it} n^{it} integrates to I(n, m).
                acc.add(a * b * mean_value_integral(n, m, spec.t)?);
            }
            Ok(acc.value())
        })
        .collect();
    let mut total = Neumaier::default();
    let mut abs_scale = 0.0;
    for r in rows {
        let v = r?;
        abs_scale += v.norm();
        total.add(v);
    }
    let mut diag = Neumaier::default();
    for &(m, a) in &left {
        if let Some(&b) = right_map.get(&m) {
            diag.add(a * b * spec.t);
        }
    }
    let exact = total.value();

    let (qv, qe) = if spec.skip_quadrature {
        (Complex64::new(f64::NAN, f64::NAN), f64::NAN)
    } else {
        let freq = (spec.k + spec.l) as f64 * spec.x.ln();
        let panels = ((spec.t * freq.max(1.0)) / 2.0).ceil() as usize;
        let (k, l) = (spec.k as i32, spec.l as i32);
        let integrand = |t: f64| {
            let v = p.eval(Complex64::new(sig, t));
            v.powi(k) * v.conj().powi(l)
        };
        let tol = 1e-9f64.max(1e-13 * abs_scale.max(spec.t));
        // Phases of size 2T ln X carry relative rounding of that order.
        let noise = 8.0 * f64::EPSILON * (spec.k + spec.l).max(1) as f64 * 2.0 * spec.t * spec.x.ln();
        let q = quad::integrate(&integrand, spec.t, 2.0 * spec.t, panels, tol, noise);
        (q.value, q.error)
    };
    let prediction = if spec.k == spec.l { spec.t * squarefree_main_term(&spec.forms, spec.k, sig, spec.x)? } else { 0.0 };
    // The quadrature's own estimate, plus rounding in both computations.
    let budget = 10.0 * qe + 1e-12 * (abs_scale + spec.t) + 1e-9;
    Ok(MomentReport {
        k: spec.k,
        l: spec.l,
        t: spec.t,
        sigma0: sig,
        x: spec.x,
        exact_re: exact.re,
        exact_im: exact.im,
        diagonal: diag.value().re,
        quad_re: qv.re,
        quad_im: qv.im,
        quad_error: qe,
        prediction,
        budget,
        asymptotic_regime: spec.asymptotic_regime(),
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multinomials() {
        assert_eq!(multinomial_a_k(6, 2, 10.0).unwrap(), 2);
        assert_eq!(multinomial_a_k(8, 3, 10.0).unwrap(), 1);
        assert_eq!(multinomial_a_k(12, 2, 10.0).unwrap(), 0);
        assert_eq!(multinomial_a_k(12, 3, 10.0).unwrap(), 3);
        assert_eq!(multinomial_a_k(1, 0, 10.0).unwrap(), 1);
        assert_eq!(multinomial_a_k(11, 1, 10.0).unwrap(), 0);
    }

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_moment_prediction(2, 0.7), 0.7);
        assert!((gaussian_moment_prediction(4, 0.7) - 3.0 * 0.49).abs() < 1e-15);
        assert_eq!(gaussian_moment_prediction(5, 0.7), 0.0);
        assert!((gaussian_moment_prediction(6, 2.0) - 15.0 * 8.0).abs() < 1e-12);
    }

    #[test]
    fn mean_value_closed_form() {
        assert_eq!(mean_value_integral(5, 5, 1000.0).unwrap(), Complex64::new(1000.0, 0.0));
        let l = 1.5f64.ln();
        let t = 50.0;
        let want = (Complex64::new(0.0, 2.0 * l * t).exp() - Complex64::new(0.0, l * t).exp()) / Complex64::new(0.0, l);
        assert!((mean_value_integral(3, 2, t).unwrap() - want).norm() < 1e-13);
    }
}
