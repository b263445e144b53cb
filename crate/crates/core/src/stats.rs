//! Sampling `t ∈ [T, 2T]` and the distribution statistics computed from
//! the samples.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hecke::CuspForm;
use crate::lfunc::{l_value_afe, required_length, EvalConfig, Method};
use crate::mollifier::{build_m, build_p, fmt17, DirichletPolynomial, PRange, Params, PolyBudget, Variant};
use crate::special::normal_sf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    RandomUniform,
    Equispaced,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "random-uniform" | "random" => Some(Mode::RandomUniform),
            "equispaced" => Some(Mode::Equispaced),
            _ => None,
        }
    }
}

/// What each record computes beyond `log |L(1/2 + it)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleOptions {
    pub count: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Evaluate the mollifier residuals (needs `L` at `σ0` as well).
    pub mollifier: bool,
    pub budget: PolyBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub log_abs_l: Vec<f64>,
    pub re_p: Vec<f64>,
    /// `|M(σ0+it) e^{P(σ0+it)} - 1|` for the first form.
    pub m_residual: f64,
    /// `|1 - L(σ0+it) M(σ0+it)|` for the first form.
    pub lm_residual: f64,
    pub near_zero: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRun {
    #[serde(rename = "T")]
    pub t: f64,
    pub count: usize,
    pub seed: u64,
    pub mode: Mode,
    pub sigma0: f64,
    pub weights: Vec<u32>,
    /// `½ Σ_{p<=X} λ(p)^2 p^{-2σ0}` per form: the variance of `Re P0`.
    pub re_p_variance: Vec<f64>,
    pub records: Vec<Record>,
    pub excluded_measure: f64,
}

/// Eigenvalue-table length [`sample`] needs: the single-value evaluator up
/// to height `2T` on both `1/2` and `σ0`, and every prime up to `X`.
pub fn sample_table_length(weight: u32, params: &Params, cfg: &EvalConfig) -> usize {
    let top = 2.0 * params.t;
    [0.5, params.sigma0]
        .iter()
        .map(|&sigma| required_length(weight, Complex64::new(sigma, top), Method::LValueAfe, cfg))
        .max()
        .unwrap_or(0)
        .max(params.x.ceil() as usize + 2)
}

/// Ordinate of record `i`.
pub fn sample_point(t: f64, count: usize, seed: u64, mode: Mode, i: usize) -> f64 {
    match mode {
        Mode::Equispaced => t + t * (i as f64 + 0.5) / count as f64,
        Mode::RandomUniform => {
            // One keystream per record keeps records independent of order.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            t + t * rng.gen::<f64>()
        }
    }
}

struct FormPolys {
    p0: DirichletPolynomial,
}

pub fn sample(forms: &[CuspForm], params: &Params, cfg: &EvalConfig, opts: &SampleOptions) -> Result<SampleRun> {
    if opts.count == 0 {
        return Err(LabError::Domain("sample count must be at least 1".into()));
    }
    if forms.is_empty() {
        return Err(LabError::Domain("sampling needs at least one form".into()));
    }
    params.validate()?;
    cfg.validate()?;
    let big_t = params.t;
    let sigma0 = params.sigma0;
    let polys: Vec<FormPolys> = forms.iter().map(|f| Ok(FormPolys { p0: build_p(f, params, PRange::PrimesOnly)? })).collect::<Result<_>>()?;
    let re_p_variance = polys
        .iter()
        .map(|fp| 0.5 * fp.p0.terms().map(|(p, c)| c.norm_sqr() * (p as f64).powf(-2.0 * sigma0)).sum::<f64>())
        .collect();
    let moll = if opts.mollifier {
        let f = &forms[0];
        Some((build_p(f, params, PRange::Full)?, build_m(f, params, Variant::A, &opts.budget)?))
    } else {
        None
    };

    let records: Vec<Result<Record>> = (0..opts.count)
        .into_par_iter()
        .map(|i| {
            let t = sample_point(big_t, opts.count, opts.seed, opts.mode, i);
            let s0 = Complex64::new(sigma0, t);
            let mut near_zero = false;
            let mut log_abs_l = Vec::with_capacity(forms.len());
            let mut re_p = Vec::with_capacity(forms.len());
            for (f, fp) in forms.iter().zip(&polys) {
                let v = l_value_afe(f, Complex64::new(0.5, t), cfg).map_err(|e| at_t(e, t))?;
                near_zero |= v.near_zero();
                log_abs_l.push(v.value.norm().ln());
                re_p.push(fp.p0.eval(s0).re);
            }
            let (m_residual, lm_residual) = match &moll {
                Some((p, m)) => {
                    let mv = m.eval(s0);
                    let l0 = l_value_afe(&forms[0], s0, cfg).map_err(|e| at_t(e, t))?;
                    near_zero |= l0.near_zero();
                    ((mv * p.eval(s0).exp() - 1.0).norm(), (1.0 - l0.value * mv).norm())
                }
                None => (f64::NAN, f64::NAN),
            };
            Ok(Record { t, log_abs_l, re_p, m_residual, lm_residual, near_zero })
        })
        .collect();
    let records: Vec<Record> = records.into_iter().collect::<Result<_>>()?;
    let flagged = records.iter().filter(|r| r.near_zero).count();
    let excluded_measure = flagged as f64 / opts.count as f64 * big_t;
    if excluded_measure >= 0.1 * big_t {
        return Err(LabError::Evaluator {
            t: big_t,
            msg: format!("{flagged} of {} records are near zeros; the run is degenerate", opts.count),
        });
    }
    Ok(SampleRun {
        t: big_t,
        count: opts.count,
        seed: opts.seed,
        mode: opts.mode,
        sigma0,
        weights: forms.iter().map(|f| f.weight()).collect(),
        re_p_variance,
        records,
        excluded_measure,
    })
}

fn at_t(e: LabError, t: f64) -> LabError {
    match e {
        LabError::Evaluator { .. } => e,
        other => LabError::Evaluator { t, msg: other.to_string() },
    }
}

impl SampleRun {
    pub fn forms(&self) -> usize {
        self.weights.len()
    }

    /// Records that enter statistics.
    pub fn usable(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.near_zero)
    }

    pub fn to_csv(&self) -> String {
        let n = self.forms();
        let mut s = String::from("t");
        for j in 1..=n {
            let _ = write!(s, ",log_abs_L_{j}");
        }
        for j in 1..=n {
            let _ = write!(s, ",re_P_{j}");
        }
        s.push_str(",m_residual,lm_residual,near_zero\n");
        for r in &self.records {
            s.push_str(&fmt17(r.t));
            for v in r.log_abs_l.iter().chain(&r.re_p) {
                s.push(',');
                s.push_str(&fmt17(*v));
            }
            let _ = writeln!(s, ",{},{},{}", fmt17(r.m_residual), fmt17(r.lm_residual), r.near_zero as u8);
        }
        s
    }
}

/// `√(½ ln ln T)`, the normalisation of `log |L|`.
pub fn selberg_scale(t: f64) -> f64 {
    (0.5 * t.ln().ln()).sqrt()
}

/// Fixed-order compensated sum.
pub fn neumaier(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

fn mean(xs: &[f64]) -> f64 {
    neumaier(xs.iter().copied()) / xs.len() as f64
}

/// Raw moments `E[z^k]`, `k = 1..=6`, of already-standardized values.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub moments: Vec<f64>,
    /// Standard errors of the moments, `√(Var(z^k)/n)`.
    pub moment_stderr: Vec<f64>,
    pub ks_statistic: f64,
    pub tails: Vec<TailRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    #[serde(rename = "V")]
    pub v: f64,
    pub fraction: f64,
    pub normal_tail: f64,
    /// `3 √(p(1-p)/n)` at `p = normal_tail`.
    pub band: f64,
}

impl TailRow {
    pub fn within_band(&self) -> bool {
        (self.fraction - self.normal_tail).abs() <= self.band
    }
}

pub const TAIL_POINTS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

/// Moments, KS distance to `N(0,1)` and tail fractions `P(z > V)`.
pub fn summarize(z: &[f64]) -> Result<Summary> {
    let n = z.len();
    if n < 2 {
        return Err(LabError::UnderSampled { needed: 2, got: n });
    }
    let nf = n as f64;
    let mut moments = Vec::with_capacity(6);
    let mut moment_stderr = Vec::with_capacity(6);
    for k in 1..=6 {
        let mk = mean(&z.iter().map(|x| x.powi(k)).collect::<Vec<_>>());
        let m2k = mean(&z.iter().map(|x| x.powi(2 * k)).collect::<Vec<_>>());
        moments.push(mk);
        moment_stderr.push(((m2k - mk * mk).max(0.0) / nf).sqrt());
    }
    let mu = moments[0];
    let var = z.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (nf - 1.0);
    let mut sorted = z.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ks: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = 1.0 - normal_sf(x);
        ks = ks.max((cdf - i as f64 / nf).abs()).max(((i + 1) as f64 / nf - cdf).abs());
    }
    let tails = TAIL_POINTS
        .iter()
        .map(|&v| {
            let p = normal_sf(v);
            TailRow { v, fraction: z.iter().filter(|&&x| x > v).count() as f64 / nf, normal_tail: p, band: 3.0 * (p * (1.0 - p) / nf).sqrt() }
        })
        .collect();
    Ok(Summary { n, mean: mu, stderr: (var / nf).sqrt(), moments, moment_stderr, ks_statistic: ks, tails })
}

#[derive(Debug, Clone, Serialize)]
pub struct FormReport {
    pub weight: u32,
    /// `log |L(1/2+it)| / √(½ ln ln T)`.
    pub log_abs_l: Summary,
    /// `Re P0(σ0+it)` divided by the square root of its exact variance.
    pub re_p: Summary,
    /// Sample variance of `log |L(1/2+it)|`, and its standard error.
    pub log_abs_l_variance: f64,
    pub log_abs_l_variance_stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub used: usize,
    pub excluded_measure: f64,
    pub forms: Vec<FormReport>,
    pub covariance: Vec<Vec<f64>>,
    pub correlation: Vec<Vec<f64>>,
}

/// Column `j` of `log |L|` over usable records.
fn log_column(run: &SampleRun, j: usize) -> Vec<f64> {
    run.usable().map(|r| r.log_abs_l[j]).collect()
}

pub const MIN_RECORDS: usize = 100;

pub fn distribution_report(run: &SampleRun) -> Result<DistributionReport> {
    let used = run.usable().count();
    if used < MIN_RECORDS {
        return Err(LabError::UnderSampled { needed: MIN_RECORDS, got: used });
    }
    let scale = selberg_scale(run.t);
    let cols: Vec<Vec<f64>> = (0..run.forms()).map(|j| log_column(run, j)).collect();
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let nf = used as f64;
    let mut forms = Vec::new();
    for j in 0..run.forms() {
        let z: Vec<f64> = cols[j].iter().map(|x| x / scale).collect();
        let sd = run.re_p_variance[j].sqrt();
        let zp: Vec<f64> = run.usable().map(|r| r.re_p[j] / sd).collect();
        let dev: Vec<f64> = cols[j].iter().map(|x| (x - means[j]).powi(2)).collect();
        let v = neumaier(dev.iter().copied()) / (nf - 1.0);
        let v_se = (dev.iter().map(|d| (d - v).powi(2)).sum::<f64>() / (nf - 1.0) / nf).sqrt();
        forms.push(FormReport {
            weight: run.weights[j],
            log_abs_l: summarize(&z)?,
            re_p: summarize(&zp)?,
            log_abs_l_variance: v,
            log_abs_l_variance_stderr: v_se,
        });
    }
    let n = run.forms();
    let mut cov = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a..n {
            let c = neumaier(cols[a].iter().zip(&cols[b]).map(|(x, y)| (x - means[a]) * (y - means[b]))) / (nf - 1.0);
            cov[a][b] = c;
            cov[b][a] = c;
        }
    }
    let corr = (0..n).map(|a| (0..n).map(|b| cov[a][b] / (cov[a][a] * cov[b][b]).sqrt()).collect()).collect();
    Ok(DistributionReport { t: run.t, used, excluded_measure: run.excluded_measure, forms, covariance: cov, correlation: corr })
}

/// Fraction of usable records with `m_residual > threshold`.
pub fn mollifier_exceedance(run: &SampleRun, thresholds: &[f64]) -> Vec<(f64, f64)> {
    let vals: Vec<f64> = run.usable().map(|r| r.m_residual).filter(|v| !v.is_nan()).collect();
    thresholds
        .iter()
        .map(|&th| {
            let frac = if vals.is_empty() { 0.0 } else { vals.iter().filter(|&&v| v > th).count() as f64 / vals.len() as f64 };
            (th, frac)
        })
        .collect()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn median_m_residual(run: &SampleRun) -> f64 {
    median(&run.usable().map(|r| r.m_residual).filter(|v| !v.is_nan()).collect::<Vec<_>>())
}

/// Mean of `lm_residual²` over usable records.
pub fn mollified_mean_square(run: &SampleRun) -> f64 {
    let v: Vec<f64> = run.usable().map(|r| r.lm_residual * r.lm_residual).filter(|v| !v.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    mean(&v)
}

#[derive(Debug, Clone, Serialize)]
pub struct CombinationReport {
    pub weights: Vec<f64>,
    /// `Σ a_j log|L_j|` divided by `√((Σ a_j²)/2 · ln ln T)`.
    pub summary: Summary,
}

/// Distribution of `Σ a_j log |L(f_j)|` for each weight vector.
pub fn gaussian_process_check(run: &SampleRun, weights: &[Vec<f64>]) -> Result<Vec<CombinationReport>> {
    let n = run.forms();
    let mut out = Vec::new();
    for a in weights {
        if a.len() != n {
            return Err(LabError::Alignment(format!("weight vector has {} entries, run has {n} forms", a.len())));
        }
        let norm2: f64 = a.iter().map(|x| x * x).sum();
        if norm2 == 0.0 {
            return Err(LabError::Domain("the zero combination has no distribution".into()));
        }
        let scale = (norm2 * 0.5 * run.t.ln().ln()).sqrt();
        let z: Vec<f64> = run.usable().map(|r| a.iter().zip(&r.log_abs_l).map(|(w, x)| w * x).sum::<f64>() / scale).collect();
        out.push(CombinationReport { weights: a.clone(), summary: summarize(&z)? });
    }
    Ok(out)
}

/// `E[h]` and its standard error for a per-record statistic `h`.
#[derive(Debug, Clone, Serialize)]
pub struct Contrast {
    pub value: f64,
    pub stderr: f64,
}

impl Contrast {
    pub fn within(&self, sigmas: f64) -> bool {
        self.value.abs() <= sigmas * self.stderr
    }

    fn from_samples(h: &[f64]) -> Contrast {
        let nf = h.len() as f64;
        let m = mean(h);
        let v = h.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (nf - 1.0);
        Contrast { value: m, stderr: (v / nf).sqrt() }
    }
}

/// For two forms: `Var(X1 + X2) - Var(X1) - Var(X2)` and, per weight pair,
/// `Var(a1 X1 + a2 X2) - (a1² + a2²) v̄` with the pooled single-form
/// variance `v̄ = (Var X1 + Var X2)/2`, each with a standard error from
/// the per-record influence values.
pub fn variance_law(run: &SampleRun, pairs: &[(f64, f64)]) -> Result<(Contrast, Vec<((f64, f64), Contrast)>)> {
    if run.forms() != 2 {
        return Err(LabError::Alignment(format!("variance law needs exactly two forms, run has {}", run.forms())));
    }
    let x1 = log_column(run, 0);
    let x2 = log_column(run, 1);
    if x1.len() < MIN_RECORDS {
        return Err(LabError::UnderSampled { needed: MIN_RECORDS, got: x1.len() });
    }
    let (m1, m2) = (mean(&x1), mean(&x2));
    let c1: Vec<f64> = x1.iter().map(|x| x - m1).collect();
    let c2: Vec<f64> = x2.iter().map(|x| x - m2).collect();
    let add: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| (a + b).powi(2) - a * a - b * b).collect();
    let mut out = Vec::new();
    for &(a1, a2) in pairs {
        let k = a1 * a1 + a2 * a2;
        let h: Vec<f64> = c1.iter().zip(&c2).map(|(x, y)| (a1 * x + a2 * y).powi(2) - 0.5 * k * (x * x + y * y)).collect();
        out.push(((a1, a2), Contrast::from_samples(&h)));
    }
    Ok((Contrast::from_samples(&add), out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equispaced_midpoint() {
        assert_eq!(sample_point(1000.0, 1, 0, Mode::Equispaced, 0), 1500.0);
    }

    #[test]
    fn random_points_are_order_independent() {
        let a = sample_point(1e3, 10, 42, Mode::RandomUniform, 7);
        let b = sample_point(1e3, 99, 42, Mode::RandomUniform, 7);
        assert_eq!(a, b);
        assert!(a >= 1e3 && a < 2e3);
        assert_ne!(a, sample_point(1e3, 10, 43, Mode::RandomUniform, 7));
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
