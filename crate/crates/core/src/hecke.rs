//! Level-1 Hecke eigenforms: exact q-expansions and normalised eigenvalues.
//!
//! Every form with a one-dimensional cusp space is `Δ · E4^a · E6^b`. The
//! product is computed exactly modulo several word-sized primes with
//! transforms, then lifted to integers by CRT.

use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{gcd, SpfSieve};
use crate::error::{LabError, Result};
use crate::ntt::{ntt_primes, NttPrime};

/// Weights `k` for which the level-1 cusp space is one-dimensional.
pub const SUPPORTED_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

/// Longest expansion we are willing to build.
pub const MAX_EXPANSION: usize = 1 << 21;

fn eisenstein_exponents(weight: u32) -> Option<(u32, u32)> {
    match weight {
        12 => Some((0, 0)),
        16 => Some((1, 0)),
        18 => Some((0, 1)),
        20 => Some((2, 0)),
        22 => Some((1, 1)),
        26 => Some((2, 1)),
        _ => None,
    }
}

fn check_weight(weight: u32) -> Result<()> {
    if weight % 2 == 1 {
        return Err(LabError::UnsupportedForm(format!("odd weight {weight} has no level-1 forms")));
    }
    if eisenstein_exponents(weight).is_none() {
        return Err(LabError::UnsupportedForm(format!(
            "weight {weight}: level-1 cusp space is not one-dimensional (supported: {SUPPORTED_WEIGHTS:?})"
        )));
    }
    Ok(())
}

/// Integer q-expansion coefficients `a(0..=n_max)` of a weight-`k` form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourierExpansion {
    pub weight: u32,
    coeffs: Vec<BigInt>,
}

impl FourierExpansion {
    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }
}

/// `a(n) mod p` for `0 <= n < len` of the q-expansion, computed modulo one prime.
fn expansion_mod(q: &NttPrime, weight: u32, len: usize) -> Vec<u32> {
    let (ea, eb) = eisenstein_exponents(weight).expect("weight checked");
    // Jacobi: prod (1-q^n)^3 = sum (-1)^k (2k+1) q^{k(k+1)/2}
    let mut jac = vec![0u32; len];
    let mut k = 0usize;
    while k * (k + 1) / 2 < len {
        let v = (2 * k + 1) as i64 * if k % 2 == 0 { 1 } else { -1 };
        jac[k * (k + 1) / 2] = q.reduce_i64(v);
        k += 1;
    }
    let j2 = q.mul_trunc(&jac, &jac, len);
    let j4 = q.mul_trunc(&j2, &j2, len);
    let j8 = q.mul_trunc(&j4, &j4, len);
    let mut f = vec![0u32; len];
    f[1..].copy_from_slice(&j8[..len - 1]);
    if ea + eb == 0 {
        return f;
    }
    let sigma = |power: u32, scale: i64| -> Vec<u32> {
        let mut s = vec![0u32; len];
        for d in 1..len {
            let mut dp = 1u32;
            for _ in 0..power {
                dp = q.mul_plain(dp, (d as u64 % q.p as u64) as u32);
            }
            let mut m = d;
            while m < len {
                s[m] = ((s[m] as u64 + dp as u64) % q.p as u64) as u32;
                m += d;
            }
        }
        let c = q.reduce_i64(scale);
        for x in s.iter_mut() {
            *x = q.mul_plain(*x, c);
        }
        s[0] = 1;
        s
    };
    if ea > 0 {
        let e4 = sigma(3, 240);
        for _ in 0..ea {
            f = q.mul_trunc(&f, &e4, len);
        }
    }
    if eb > 0 {
        let e6 = sigma(5, -504);
        for _ in 0..eb {
            f = q.mul_trunc(&f, &e6, len);
        }
    }
    f
}

fn crt_lift(primes: &[NttPrime], residues: &[Vec<u32>], len: usize) -> Vec<BigInt> {
    let k = primes.len();
    let mut inv = vec![vec![0u64; k]; k];
    for i in 0..k {
        let pi = primes[i].p as u64;
        for j in 0..i {
            inv[i][j] = crate::arith::pow_mod(primes[j].p as u64 % pi, pi - 2, pi);
        }
    }
    let mut modulus = BigUint::one();
    for q in primes {
        modulus *= q.p;
    }
    let half = &modulus >> 1u32;
    let modulus = BigInt::from(modulus);
    let mut out = Vec::with_capacity(len);
    let mut v = vec![0u64; k];
    for n in 0..len {
        for i in 0..k {
            let pi = primes[i].p as u64;
            let mut x = residues[i][n] as u64;
            for j in 0..i {
                x = (x + pi - v[j] % pi) % pi;
                x = x * inv[i][j] % pi;
            }
            v[i] = x;
        }
        let mut acc = BigUint::from(v[k - 1]);
        for i in (0..k - 1).rev() {
            acc = acc * primes[i].p + v[i];
        }
        let signed = if acc > half { BigInt::from(acc) - &modulus } else { BigInt::from(acc) };
        out.push(signed);
    }
    out
}

fn expand_exact(weight: u32, n_max: usize) -> Result<FourierExpansion> {
    check_weight(weight)?;
    if n_max == 0 {
        return Err(LabError::Domain("n_max must be at least 1".into()));
    }
    if n_max > MAX_EXPANSION {
        return Err(LabError::capacity("q-expansion length", n_max as f64, MAX_EXPANSION as f64));
    }
    let len = n_max + 1;
    // |a(n)| <= d(n) n^{(k-1)/2} <= 2 n^{k/2}; one bit of headroom for the sign.
    let bits = weight as f64 / 2.0 * (n_max as f64).log2() + 3.0;
    let count = (bits / 30.0).ceil() as usize;
    let log_len = (2 * len).next_power_of_two().trailing_zeros();
    let primes = ntt_primes(count, log_len);
    if primes.len() < count {
        return Err(LabError::capacity("CRT primes", count as f64, primes.len() as f64));
    }
    let residues: Vec<Vec<u32>> = primes.iter().map(|q| expansion_mod(q, weight, len)).collect();
    Ok(FourierExpansion { weight, coeffs: crt_lift(&primes, &residues, len) })
}

/// Exact `τ(n)` for `n <= n_max`.
pub fn expand_delta(n_max: usize) -> Result<FourierExpansion> {
    expand_exact(12, n_max)
}

/// Exact q-expansion of the unique normalised eigenform of the given weight.
pub fn expand_newform(weight: u32, n_max: usize) -> Result<FourierExpansion> {
    expand_exact(weight, n_max)
}

/// A level-1 Hecke eigenform, stored through its analytically normalised
/// eigenvalues `λ(n) = a(n) / n^{(k-1)/2}`.
#[derive(Debug, Clone)]
pub struct CuspForm {
    weight: u32,
    lambda: Vec<f64>,
    label: String,
}

impl CuspForm {
    /// Build from a table `λ(0..=N)` (entry 0 ignored).
    pub fn from_lambda(weight: u32, mut lambda: Vec<f64>) -> Result<Self> {
        if weight % 2 == 1 || weight < 12 {
            return Err(LabError::UnsupportedForm(format!("weight {weight}")));
        }
        if lambda.len() < 2 {
            return Err(LabError::Domain("eigenvalue table is empty".into()));
        }
        lambda[0] = 0.0;
        Ok(CuspForm { weight, lambda, label: format!("1.{weight}.a") })
    }

    pub fn from_expansion(exp: &FourierExpansion) -> Result<Self> {
        let half = (exp.weight as f64 - 1.0) / 2.0;
        let lambda = exp
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, a)| if n == 0 { 0.0 } else { a.to_f64().unwrap_or(f64::NAN) / (n as f64).powf(half) })
            .collect();
        CuspForm::from_lambda(exp.weight, lambda)
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level(&self) -> u32 {
        1
    }

    /// `i^k`: `+1` for `k ≡ 0 (mod 4)`, `-1` otherwise.
    pub fn root_number(&self) -> f64 {
        if self.weight % 4 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest tabulated index.
    pub fn max_n(&self) -> usize {
        self.lambda.len() - 1
    }

    /// Table `λ(0..=max_n)`, with `λ(0) = 0`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda(&self, n: u64) -> Result<f64> {
        if n == 0 || n as usize > self.max_n() {
            return Err(LabError::OutOfRange { n, max: self.max_n() as u64 });
        }
        Ok(self.lambda[n as usize])
    }

    /// `λ(n)` from the prime values via multiplicativity and the Hecke
    /// recursion `λ(p^{j+1}) = λ(p)λ(p^j) - λ(p^{j-1})`. Works for
    /// `n` beyond the table as long as its prime factors are tabulated.
    pub fn hecke_lambda(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(LabError::Domain("λ(0) is undefined".into()));
        }
        let mut out = 1.0;
        for (p, e) in crate::arith::factorize(n) {
            let lp = self.lambda(p)?;
            out *= lambda_prime_power(lp, e);
        }
        Ok(out)
    }

    /// Largest relative defect of `λ(m)λ(n) = Σ_{d|(m,n)} λ(mn/d²)` over
    /// `m <= n`, `mn <= limit`, with its location.
    pub fn hecke_relation_defect(&self, limit: u64) -> Result<(f64, (u64, u64))> {
        let limit = limit.min(self.max_n() as u64);
        let mut worst = (0.0, (1, 1));
        let mut m = 1u64;
        while m * m <= limit {
            for n in m..=limit / m {
                let lhs = self.lambda[m as usize] * self.lambda[n as usize];
                let g = gcd(m, n);
                let mut rhs = 0.0;
                let mut scale = lhs.abs();
                for d in 1..=g {
                    if g % d == 0 {
                        let v = self.lambda[(m * n / (d * d)) as usize];
                        rhs += v;
                        scale += v.abs();
                    }
                }
                let rel = (lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE);
                if rel > worst.0 {
                    worst = (rel, (m, n));
                }
            }
            m += 1;
        }
        Ok(worst)
    }

    /// Largest `|λ(p)|` over primes `p <= pmax`, with the prime. Deligne
    /// guarantees the value is at most 2.
    pub fn deligne_max(&self, pmax: u64) -> Result<(f64, u64)> {
        if pmax as usize > self.max_n() {
            return Err(LabError::OutOfRange { n: pmax, max: self.max_n() as u64 });
        }
        let sieve = SpfSieve::new(pmax);
        let mut best = (0.0, 2);
        for p in 2..=pmax {
            if sieve.is_prime(p) && self.lambda[p as usize].abs() > best.0 {
                best = (self.lambda[p as usize].abs(), p);
            }
        }
        Ok(best)
    }
}

/// `λ(p^e)` from `λ(p)` (Chebyshev recursion).
pub fn lambda_prime_power(lp: f64, e: u32) -> f64 {
    let (mut prev, mut cur) = (1.0, lp);
    if e == 0 {
        return 1.0;
    }
    for _ in 1..e {
        let next = lp * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Build the unique normalised cusp form of `weight` with eigenvalues up to
/// `n_max`, and confirm the Hecke relations to `1e-12` relative.
pub fn build_newform(weight: u32, n_max: usize) -> Result<CuspForm> {
    let exp = expand_newform(weight, n_max)?;
    let form = CuspForm::from_expansion(&exp)?;
    let (defect, (m, n)) = form.hecke_relation_defect(n_max as u64)?;
    if defect > 1e-12 {
        return Err(LabError::HeckeViolation { m, n, detail: format!("relative defect {defect:.3e}") });
    }
    Ok(form)
}

/// Parse a table of arithmetically normalised coefficients, one `n a(n)`
/// pair per line (`#` starts a comment). Indices must run `1, 2, ..., L`.
/// The Hecke relations are checked exactly for every `mn <= L`.
pub fn parse_eigenvalues(text: &str, weight: u32) -> Result<CuspForm> {
    if weight % 2 == 1 || weight < 12 {
        return Err(LabError::UnsupportedForm(format!("weight {weight}")));
    }
    let mut coeffs: Vec<BigInt> = vec![BigInt::zero()];
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(ns), Some(vs), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(LabError::Parse { line: line_no, msg: format!("expected `n a(n)`, got `{line}`") });
        };
        let n: usize = ns
            .parse()
            .map_err(|_| LabError::Parse { line: line_no, msg: format!("bad index `{ns}`") })?;
        let v: BigInt = vs
            .parse()
            .map_err(|_| LabError::Parse { line: line_no, msg: format!("non-integer coefficient `{vs}`") })?;
        if n != coeffs.len() {
            return Err(LabError::Parse {
                line: line_no,
                msg: format!("index {} is missing (found {n})", coeffs.len()),
            });
        }
        coeffs.push(v);
    }
    if coeffs.len() < 2 {
        return Err(LabError::Parse { line: 1, msg: "no coefficients".into() });
    }
    check_hecke_exact(&coeffs, weight)?;
    CuspForm::from_expansion(&FourierExpansion { weight, coeffs })
}

pub fn load_eigenvalues(path: &Path, weight: u32) -> Result<CuspForm> {
    let text = std::fs::read_to_string(path)?;
    parse_eigenvalues(&text, weight)
}

/// Exact check of `a(m)a(n) = Σ_{d|(m,n)} d^{k-1} a(mn/d²)`.
fn check_hecke_exact(a: &[BigInt], weight: u32) -> Result<()> {
    let len = (a.len() - 1) as u64;
    let mut m = 1u64;
    while m * m <= len {
        for n in m..=len / m {
            let lhs = &a[m as usize] * &a[n as usize];
            let g = gcd(m, n);
            let mut rhs = BigInt::zero();
            for d in 1..=g {
                if g % d == 0 {
                    rhs += BigInt::from(d).pow(weight - 1) * &a[(m * n / (d * d)) as usize];
                }
            }
            if lhs != rhs {
                let diff = (&lhs - &rhs).abs();
                return Err(LabError::HeckeViolation {
                    m,
                    n,
                    detail: format!("a(m)a(n) = {lhs}, expected {rhs} (difference {diff})"),
                });
            }
        }
        m += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_small_coefficients() {
        let e = expand_delta(12).unwrap();
        let want = [0i64, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944];
        for (n, w) in want.iter().enumerate() {
            assert_eq!(e.coeff(n), &BigInt::from(*w), "tau({n})");
        }
    }

    #[test]
    fn weight_restrictions() {
        assert!(matches!(expand_newform(13, 10), Err(LabError::UnsupportedForm(_))));
        assert!(matches!(expand_newform(24, 10), Err(LabError::UnsupportedForm(_))));
        assert!(matches!(expand_delta(MAX_EXPANSION + 1), Err(LabError::Capacity { .. })));
    }

    #[test]
    fn prime_power_recursion() {
        assert_eq!(lambda_prime_power(0.3, 0), 1.0);
        assert_eq!(lambda_prime_power(0.3, 1), 0.3);
        assert!((lambda_prime_power(0.3, 2) - (0.09 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn exact_parser_flags_first_bad_pair() {
        let err = parse_eigenvalues("1 1\n2 -24\n3 252\n4 0\n", 12).unwrap_err();
        match err {
            LabError::HeckeViolation { m, n, .. } => assert_eq!((m, n), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
