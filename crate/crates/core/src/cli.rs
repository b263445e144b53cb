//! Command-line surface. Every subcommand resolves its settings as
//! flag > config file > default and records the result in a [`RunConfig`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::acceptance::{self, SuiteSizes, CRITERIA, QUICK};
use crate::config::{ConfigFile, Format, RunConfig};
use crate::error::{LabError, Result};
use crate::hecke::{build_newform, load_eigenvalues, CuspForm, MAX_EXPANSION};
use crate::lfunc::{log_abs_l_with, required_length, EvalConfig, LPoint, Method};
use crate::mollifier::{build_m, build_p, fmt17, truncated_exp, PRange, Params, Variant};
use crate::moments::{moment_exact, MomentSpec, Weighted};
use crate::stats::{
    distribution_report, gaussian_process_check, median_m_residual, mollified_mean_square, mollifier_exceedance, sample,
    sample_table_length, variance_law, Mode, SampleOptions,
};

#[derive(Debug, Parser)]
#[command(name = "lclt", version, about = "Numerical laboratory for L-functions of level-1 Hecke eigenforms")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Table format.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    /// Extra `key=value` settings, applied over the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue tables and their invariant checks.
    Forms(FormsArgs),
    /// Values of |L| on a grid of ordinates.
    Eval(EvalArgs),
    /// Coefficients of the auxiliary prime sums and mollifiers.
    Poly(PolyArgs),
    /// Exact and numerical moments of the prime sum.
    Moments(MomentsArgs),
    /// Sample t in [T, 2T] and summarise the distribution.
    Sample(SampleArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

/// Replacements for the parameters derived from `T`.
#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    #[arg(long = "W")]
    pub w: Option<f64>,
    #[arg(long = "X")]
    pub x: Option<f64>,
    #[arg(long = "Y")]
    pub y: Option<f64>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    #[arg(long = "K1")]
    pub k1: Option<u32>,
    #[arg(long = "K2")]
    pub k2: Option<u32>,
}

#[derive(Debug, Args)]
pub struct FormsArgs {
    /// Comma-separated weights.
    #[arg(long, value_delimiter = ',')]
    pub weight: Vec<u32>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Table of `n a(n)` pairs to load instead of computing.
    #[arg(long)]
    pub load: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub weight: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// Comma-separated ordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// auto, series, contour, afe, lvalue or both.
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    #[arg(long)]
    pub weight: Option<u32>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// P, P-low, P-high, P0, exp-low, exp-high, M, M1 or M2.
    #[arg(long)]
    pub kind: Option<String>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Comma-separated weights of the forms in the combination.
    #[arg(long, value_delimiter = ',')]
    pub weight: Vec<u32>,
    /// Combination coefficients, one per form.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Vec<f64>,
    #[arg(long = "X")]
    pub x: Option<f64>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Comma-separated powers of P; reports cover every (k, l) pair.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    pub l: Vec<u32>,
    /// Include prime powers in the prime sum.
    #[arg(long)]
    pub prime_powers: bool,
    /// Skip the numerical integral.
    #[arg(long)]
    pub no_quad: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<u32>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// random-uniform or equispaced.
    #[arg(long)]
    pub mode: Option<String>,
    /// Also evaluate the mollifier residuals.
    #[arg(long)]
    pub mollifier: bool,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub quick: bool,
    /// Run a single criterion, by name or number.
    #[arg(long)]
    pub criterion: Option<String>,
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(LabError::Usage("--threads must be positive".into()));
        }
        // A second call in one process (tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| LabError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        file.values.insert(k.trim().to_string(), v.trim().to_string());
    }
    let name = match &cli.command {
        Command::Forms(_) => "forms",
        Command::Eval(_) => "eval",
        Command::Poly(_) => "poly",
        Command::Moments(_) => "moments",
        Command::Sample(_) => "sample",
        Command::Verify(_) => "verify",
    };
    let mut cfg = RunConfig::from_file(name, &file)?;
    if let Some(f) = &cli.format {
        cfg.format = Format::parse(f).ok_or_else(|| LabError::Usage(format!("unknown format {f}")))?;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.display().to_string());
    }
    match cli.command {
        Command::Forms(a) => cmd_forms(cfg, a),
        Command::Eval(a) => cmd_eval(cfg, a),
        Command::Poly(a) => cmd_poly(cfg, a),
        Command::Moments(a) => cmd_moments(cfg, a),
        Command::Sample(a) => cmd_sample(cfg, a),
        Command::Verify(a) => cmd_verify(cfg, a),
    }
}

/// Flag, then config option, then default; the winner is written back.
fn resolve<T: std::str::FromStr + ToString>(cfg: &mut RunConfig, key: &str, flag: Option<T>, default: T) -> Result<T> {
    let v = match flag {
        Some(v) => v,
        None => cfg.option_parsed(key)?.unwrap_or(default),
    };
    cfg.set_option(key, v.to_string());
    Ok(v)
}

fn resolve_f64(cfg: &mut RunConfig, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
    let v = match flag {
        Some(v) => v,
        None => cfg.option_parsed(key)?.unwrap_or(default),
    };
    cfg.set_option(key, format!("{v:?}"));
    Ok(v)
}

fn resolve_list<T: std::str::FromStr + ToString + Clone>(
    cfg: &mut RunConfig,
    key: &str,
    flag: Vec<T>,
    default: Vec<T>,
) -> Result<Vec<T>> {
    let v = if !flag.is_empty() {
        flag
    } else if let Some(s) = cfg.option(key) {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| LabError::Usage(format!("option `{key}`: cannot parse `{x}`"))))
            .collect::<Result<Vec<T>>>()?
    } else {
        default
    };
    cfg.set_option(key, v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    Ok(v)
}

fn apply_params(cfg: &mut RunConfig, p: &ParamArgs) {
    let o = &mut cfg.overrides;
    o.w = p.w.or(o.w);
    o.x = p.x.or(o.x);
    o.y = p.y.or(o.y);
    o.sigma0 = p.sigma0.or(o.sigma0);
    o.k1 = p.k1.or(o.k1);
    o.k2 = p.k2.or(o.k2);
}

fn form_for(weight: u32, n: usize, cfg: &EvalConfig) -> Result<CuspForm> {
    if n > cfg.length_cap {
        return Err(LabError::capacity("eigenvalue table", n as f64, cfg.length_cap as f64));
    }
    if n > MAX_EXPANSION {
        return Err(LabError::capacity("eigenvalue table", n as f64, MAX_EXPANSION as f64));
    }
    build_newform(weight, n.max(16))
}

/// Where results go: files with metadata under `--out`, or stdout.
struct Sink<'a> {
    cfg: &'a RunConfig,
}

impl Sink<'_> {
    fn dir(&self) -> Result<Option<PathBuf>> {
        match &self.cfg.out {
            None => Ok(None),
            Some(d) => {
                std::fs::create_dir_all(d)?;
                Ok(Some(PathBuf::from(d)))
            }
        }
    }

    /// A plain table, with its configuration and hash in `name.meta.json`.
    fn table(&self, name: &str, content: &str, extra: Value) -> Result<()> {
        match self.dir()? {
            None => print!("{content}"),
            Some(d) => {
                std::fs::write(d.join(name), content)?;
                let meta = json!({
                    "file": name,
                    "sha256": sha256_hex(content.as_bytes()),
                    "config": self.cfg,
                    "config_file": self.cfg.to_file_text(),
                    "extra": extra,
                });
                std::fs::write(d.join(format!("{name}.meta.json")), pretty(&meta)?)?;
            }
        }
        Ok(())
    }

    /// A JSON document wrapping `data` with the configuration and the
    /// hash of the serialised `data`.
    fn document(&self, name: &str, data: &impl Serialize) -> Result<()> {
        let body = pretty(data)?;
        let doc = json!({
            "config": self.cfg,
            "config_file": self.cfg.to_file_text(),
            "content_sha256": sha256_hex(body.as_bytes()),
            "data": serde_json::to_value(data)?,
        });
        let text = pretty(&doc)?;
        match self.dir()? {
            None => print!("{text}"),
            Some(d) => std::fs::write(d.join(name), text)?,
        }
        Ok(())
    }
}

fn pretty(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn cmd_forms(mut cfg: RunConfig, a: FormsArgs) -> Result<i32> {
    let weights = resolve_list(&mut cfg, "weight", a.weight, vec![12])?;
    let nmax = resolve(&mut cfg, "nmax", a.nmax, 100)?;
    let load = match a.load {
        Some(p) => Some(p),
        None => cfg.option("load").map(PathBuf::from),
    };
    if let Some(p) = &load {
        cfg.set_option("load", p.display());
        if weights.len() != 1 {
            return Err(LabError::Usage("--load takes exactly one --weight".into()));
        }
    }
    if nmax < 2 {
        return Err(LabError::Usage("--nmax must be at least 2".into()));
    }
    let sink = Sink { cfg: &cfg };
    let mut failure = None;
    let mut summaries = Vec::new();
    for &w in &weights {
        let form = match &load {
            Some(p) => load_eigenvalues(p, w)?,
            None => form_for(w, nmax, &cfg.eval)?,
        };
        let n = form.max_n().min(nmax);
        let (defect, (m, k)) = form.hecke_relation_defect(n as u64)?;
        let (dmax, p) = form.deligne_max(n as u64)?;
        let summary = json!({
            "weight": w,
            "n_max": n,
            "hecke_defect": defect,
            "hecke_worst": [m, k],
            "deligne_max": dmax,
            "deligne_prime": p,
        });
        eprintln!("weight {w}: Hecke defect {defect:.3e} at ({m}, {k}); max |λ(p)| = {dmax:.6} at p = {p}");
        if defect > 1e-12 && failure.is_none() {
            failure = Some(LabError::HeckeViolation { m, n: k, detail: format!("relative defect {defect:.3e}") });
        }
        if dmax > 2.0 + 1e-12 && failure.is_none() {
            failure = Some(LabError::DataIntegrity(format!("|λ({p})| = {dmax} exceeds 2")));
        }
        match cfg.format {
            Format::Csv => {
                let mut s = String::from("n,lambda\n");
                for i in 1..=n {
                    let _ = writeln!(s, "{i},{}", fmt17(form.lambdas()[i]));
                }
                sink.table(&format!("forms_k{w}.csv"), &s, summary.clone())?;
            }
            Format::Json => {
                let data = json!({ "weight": w, "lambda": &form.lambdas()[1..=n], "checks": summary.clone() });
                sink.document(&format!("forms_k{w}.json"), &data)?;
            }
        }
        summaries.push(summary);
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EvalMethod {
    Auto,
    One(Method),
    Both,
}

fn parse_eval_method(s: &str) -> Result<EvalMethod> {
    match s {
        "auto" => Ok(EvalMethod::Auto),
        "both" => Ok(EvalMethod::Both),
        other => Method::parse(other)
            .map(EvalMethod::One)
            .ok_or_else(|| LabError::Usage(format!("unknown method `{other}` (auto, series, contour, afe, lvalue, both)"))),
    }
}

#[derive(Serialize)]
struct BothRow {
    sigma: f64,
    t: f64,
    contour: LPoint,
    afe: LPoint,
    diff: f64,
    budget: f64,
    agree: bool,
}

fn cmd_eval(mut cfg: RunConfig, a: EvalArgs) -> Result<i32> {
    let weight = resolve(&mut cfg, "weight", a.weight, 12)?;
    let sigma = resolve_f64(&mut cfg, "sigma", a.sigma, 0.5)?;
    let method_s = resolve(&mut cfg, "method", a.method, "auto".to_string())?;
    let method = parse_eval_method(&method_s)?;
    let ts: Vec<f64> = if !a.t.is_empty() || cfg.option("t").is_some() {
        resolve_list(&mut cfg, "t", a.t, vec![])?
    } else {
        let lo = a.t_min.or(cfg.option_parsed("t_min")?);
        let hi = a.t_max.or(cfg.option_parsed("t_max")?);
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return Err(LabError::Usage("eval needs --t or both --t-min and --t-max".into()));
        };
        let steps = resolve(&mut cfg, "steps", a.steps, 11)?;
        cfg.set_option("t_min", format!("{lo:?}"));
        cfg.set_option("t_max", format!("{hi:?}"));
        if steps < 1 || hi < lo {
            return Err(LabError::Usage("need t_min <= t_max and at least one step".into()));
        }
        (0..steps).map(|i| if steps == 1 { lo } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 }).collect()
    };
    if ts.is_empty() {
        return Err(LabError::Usage("no ordinates given".into()));
    }
    let chosen = |_t: f64| -> EvalMethod {
        match method {
            EvalMethod::Auto if sigma >= 1.5 => EvalMethod::One(Method::Series),
            EvalMethod::Auto => EvalMethod::One(Method::LValueAfe),
            m => m,
        }
    };
    let mut need = 16;
    for &t in &ts {
        let m = chosen(t);
        let uses_afe = matches!(m, EvalMethod::Both | EvalMethod::One(Method::AbsSquaredAfe | Method::LValueAfe));
        if !t.is_finite() || (uses_afe && t < 10.0) {
            return Err(LabError::Usage(format!("t = {t}: the functional-equation evaluators need t >= 10")));
        }
        let s = Complex64::new(sigma, t);
        let methods: Vec<Method> = match m {
            EvalMethod::Both => vec![Method::Contour, Method::AbsSquaredAfe],
            EvalMethod::One(x) => vec![x],
            EvalMethod::Auto => unreachable!(),
        };
        for x in methods {
            need = need.max(required_length(weight, s, x, &cfg.eval) + 2);
        }
    }
    let form = form_for(weight, need, &cfg.eval)?;
    let sink = Sink { cfg: &cfg };
    if method == EvalMethod::Both {
        let mut rows = Vec::new();
        for &t in &ts {
            let c = log_abs_l_with(&form, sigma, t, &cfg.eval, Method::Contour)?;
            let f = log_abs_l_with(&form, sigma, t, &cfg.eval, Method::AbsSquaredAfe)?;
            let diff = (c.abs_l_sq - f.abs_l_sq).abs();
            let budget = c.est_error + f.est_error;
            rows.push(BothRow { sigma, t, contour: c, afe: f, diff, budget, agree: diff <= budget });
        }
        match cfg.format {
            Format::Csv => {
                let mut s = String::from("sigma,t,abs_l_sq_contour,est_error_contour,abs_l_sq_afe,est_error_afe,diff,budget,agree\n");
                for r in &rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{}",
                        fmt17(r.sigma),
                        fmt17(r.t),
                        fmt17(r.contour.abs_l_sq),
                        fmt17(r.contour.est_error),
                        fmt17(r.afe.abs_l_sq),
                        fmt17(r.afe.est_error),
                        fmt17(r.diff),
                        fmt17(r.budget),
                        r.agree as u8
                    );
                }
                sink.table("eval.csv", &s, Value::Null)?;
            }
            Format::Json => sink.document("eval.json", &rows)?,
        }
        return Ok(0);
    }
    let mut rows = Vec::new();
    for &t in &ts {
        let EvalMethod::One(m) = chosen(t) else { unreachable!() };
        rows.push(log_abs_l_with(&form, sigma, t, &cfg.eval, m)?);
    }
    match cfg.format {
        Format::Csv => {
            let mut s = String::from("sigma,t,method,abs_l_sq,log_abs_l,est_error,terms,near_zero\n");
            for p in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    fmt17(p.sigma),
                    fmt17(p.t),
                    p.method.as_str(),
                    fmt17(p.abs_l_sq),
                    fmt17(p.log_abs_l()),
                    fmt17(p.est_error),
                    p.terms,
                    p.near_zero as u8
                );
            }
            sink.table("eval.csv", &s, Value::Null)?;
        }
        Format::Json => sink.document("eval.json", &rows)?,
    }
    Ok(0)
}

fn cmd_poly(mut cfg: RunConfig, a: PolyArgs) -> Result<i32> {
    apply_params(&mut cfg, &a.params);
    let weight = resolve(&mut cfg, "weight", a.weight, 12)?;
    let t = resolve_f64(&mut cfg, "T", a.t, 1e3)?;
    let kind = resolve(&mut cfg, "kind", a.kind, "M".to_string())?;
    let params = Params::with_overrides(t, &cfg.overrides)?;
    let form = form_for(weight, (params.x.ceil() as usize + 2).max(1000), &cfg.eval)?;
    let budget = cfg.budget;
    let poly = match kind.as_str() {
        "P" => build_p(&form, &params, PRange::Full)?,
        "P-low" => build_p(&form, &params, PRange::Low)?,
        "P-high" => build_p(&form, &params, PRange::High)?,
        "P0" => build_p(&form, &params, PRange::PrimesOnly)?,
        "exp-low" => truncated_exp(&build_p(&form, &params, PRange::Low)?, params.k1, &budget)?,
        "exp-high" => truncated_exp(&build_p(&form, &params, PRange::High)?, params.k2, &budget)?,
        "M" => build_m(&form, &params, Variant::A, &budget)?,
        "M1" => build_m(&form, &params, Variant::A1, &budget)?,
        "M2" => build_m(&form, &params, Variant::A2, &budget)?,
        other => {
            return Err(LabError::Usage(format!(
                "unknown kind `{other}` (P, P-low, P-high, P0, exp-low, exp-high, M, M1, M2)"
            )))
        }
    };
    let sink = Sink { cfg: &cfg };
    let extra = json!({ "params": params, "terms": poly.len() });
    match cfg.format {
        Format::Csv => sink.table(&format!("poly_{kind}_k{weight}.csv"), &poly.to_csv(), extra)?,
        Format::Json => {
            let terms: Vec<(u64, f64, f64)> = poly.terms().map(|(n, c)| (n, c.re, c.im)).collect();
            sink.document(&format!("poly_{kind}_k{weight}.json"), &json!({ "params": params, "terms": terms }))?
        }
    }
    Ok(0)
}

fn cmd_moments(mut cfg: RunConfig, a: MomentsArgs) -> Result<i32> {
    let weights = resolve_list(&mut cfg, "weight", a.weight, vec![12])?;
    let coeffs = resolve_list(&mut cfg, "a", a.a, vec![1.0; weights.len()])?;
    if coeffs.len() != weights.len() {
        return Err(LabError::Usage(format!("{} coefficients for {} forms", coeffs.len(), weights.len())));
    }
    let x = resolve_f64(&mut cfg, "X", a.x, 20.0)?;
    let t = resolve_f64(&mut cfg, "T", a.t, 1e4)?;
    let default_sigma = Params::new(t)?.sigma0;
    let sigma0 = resolve_f64(&mut cfg, "sigma0", a.sigma0, default_sigma)?;
    let ks = resolve_list(&mut cfg, "k", a.k, vec![1])?;
    let ls = resolve_list(&mut cfg, "l", a.l, vec![1])?;
    let prime_powers = a.prime_powers || cfg.option_parsed::<bool>("prime_powers")?.unwrap_or(false);
    let no_quad = a.no_quad || cfg.option_parsed::<bool>("no_quad")?.unwrap_or(false);
    cfg.set_option("prime_powers", prime_powers);
    cfg.set_option("no_quad", no_quad);
    if !(x >= 2.0) {
        return Err(LabError::Usage(format!("X must be at least 2, got {x}")));
    }
    let forms: Vec<CuspForm> =
        weights.iter().map(|&w| form_for(w, (x.ceil() as usize + 2).max(100), &cfg.eval)).collect::<Result<_>>()?;
    let mut reports = Vec::new();
    for &k in &ks {
        for &l in &ls {
            let spec = MomentSpec {
                forms: forms.iter().zip(&coeffs).map(|(f, &a)| Weighted { form: f, a }).collect(),
                k,
                l,
                t,
                sigma0,
                x,
                prime_powers,
                skip_quadrature: no_quad,
                max_pairs: 50_000_000,
            };
            let rep = moment_exact(&spec)?;
            let mut v = serde_json::to_value(&rep)?;
            v["regime"] = json!(if k == l { "diagonal (k = l)" } else { "off-diagonal (k != l)" });
            v["agrees"] = json!(no_quad || rep.agrees());
            reports.push(v);
        }
    }
    Sink { cfg: &cfg }.document("moments.json", &reports)?;
    Ok(0)
}

fn cmd_sample(mut cfg: RunConfig, a: SampleArgs) -> Result<i32> {
    apply_params(&mut cfg, &a.params);
    let weights = resolve_list(&mut cfg, "weights", a.weights, vec![12])?;
    let t = resolve_f64(&mut cfg, "T", a.t, 1e3)?;
    let count = resolve(&mut cfg, "count", a.count, 1000)?;
    let seed = resolve(&mut cfg, "seed", a.seed, 0)?;
    let mode_s = resolve(&mut cfg, "mode", a.mode, "random-uniform".to_string())?;
    let mollifier = a.mollifier || cfg.option_parsed::<bool>("mollifier")?.unwrap_or(false);
    cfg.set_option("mollifier", mollifier);
    if count == 0 {
        return Err(LabError::Usage("--count must be at least 1".into()));
    }
    if weights.is_empty() {
        return Err(LabError::Usage("--weights needs at least one weight".into()));
    }
    let mode = Mode::parse(&mode_s).ok_or_else(|| LabError::Usage(format!("unknown mode `{mode_s}`")))?;
    let params = Params::with_overrides(t, &cfg.overrides)?;
    let mut forms = Vec::new();
    for &w in &weights {
        let need = sample_table_length(w, &params, &cfg.eval);
        forms.push(form_for(w, need + need / 50, &cfg.eval)?);
    }
    let opts = SampleOptions { count, seed, mode, mollifier, budget: cfg.budget };
    let run = sample(&forms, &params, &cfg.eval, &opts)?;
    let sink = Sink { cfg: &cfg };
    sink.table("sample.csv", &run.to_csv(), json!({ "params": params }))?;
    if cfg.out.is_none() {
        return Ok(0);
    }
    let mut report = json!({
        "params": params,
        "excluded_measure": run.excluded_measure,
        "re_p_variance": run.re_p_variance,
    });
    match distribution_report(&run) {
        Ok(r) => report["distribution"] = serde_json::to_value(&r)?,
        Err(e) => report["distribution_error"] = json!(e.to_string()),
    }
    if mollifier {
        report["mollifier"] = json!({
            "median_m_residual": median_m_residual(&run),
            "mean_lm_residual_sq": mollified_mean_square(&run),
            "m_residual_exceedance": mollifier_exceedance(&run, &[0.1, 0.5, 1.0]),
        });
    }
    if weights.len() >= 2 {
        let combos: Vec<Vec<f64>> = vec![vec![1.0; weights.len()], {
            let mut v = vec![0.0; weights.len()];
            v[0] = 1.0;
            v[1] = -1.0;
            v
        }];
        match gaussian_process_check(&run, &combos) {
            Ok(c) => report["combinations"] = serde_json::to_value(c)?,
            Err(e) => report["combinations_error"] = json!(e.to_string()),
        }
    }
    if weights.len() == 2 {
        match variance_law(&run, &[(1.0, 1.0), (1.0, -1.0), (2.0, 1.0)]) {
            Ok((add, combos)) => report["variance_law"] = json!({ "additivity": add, "combinations": combos }),
            Err(e) => report["variance_law_error"] = json!(e.to_string()),
        }
    }
    sink.document("report.json", &report)?;
    Ok(0)
}

fn cmd_verify(cfg: RunConfig, a: VerifyArgs) -> Result<i32> {
    let ids: Vec<u8> = match &a.criterion {
        Some(name) => vec![acceptance::lookup(name).ok_or_else(|| {
            let names: Vec<&str> = CRITERIA.iter().map(|(_, n)| *n).collect();
            LabError::Usage(format!("unknown criterion `{name}` (one of {})", names.join(", ")))
        })?],
        None if a.quick => QUICK.to_vec(),
        None => CRITERIA.iter().map(|(id, _)| *id).collect(),
    };
    let sizes = if a.quick { SuiteSizes::quick() } else { SuiteSizes::full() };
    let results = acceptance::run_suite(&ids, sizes, |r| println!("{}", r.line()));
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if cfg.out.is_some() {
        Sink { cfg: &cfg }.document("verify.json", &json!({ "sizes": sizes, "results": results }))?;
    }
    Ok(if passed == results.len() { 0 } else { 1 })
}

/// Path of the metadata sidecar written next to a table.
pub fn meta_path(table: &Path) -> PathBuf {
    let mut s = table.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}
