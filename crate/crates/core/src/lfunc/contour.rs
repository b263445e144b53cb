//! `|L(s)|² = (I(s) + I(1-s)) / |G(s)|²` with
//! `I(s) = (1/2πi) ∫_{(c)} Λ(z+s) Λ(z+s̄) e^{a z²} dz/z`.
//!
//! Each `I` is independent of its line, so the two sides may use different
//! abscissae; each is pushed far enough right that the shifted Dirichlet
//! series converge absolutely.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_length, conductor_scale, log_gamma_factor_ratio, smoothed_length, EvalConfig, LPoint, Method};
use crate::error::{LabError, Result};
use crate::hecke::CuspForm;

struct Side {
    value: Complex64,
    abs_sum: f64,
    edge: f64,
    terms: usize,
    nodes: usize,
    trunc: f64,
    /// Effect of phase rounding in the Dirichlet sums on the value.
    phase_err: f64,
}

const CHUNK: usize = 4096;

/// `offset` is `ln |G(s_side)|² - ln |G(s)|²` for the point `s` being evaluated.
#[allow(clippy::needless_range_loop)]
fn side(f: &CuspForm, s: Complex64, c: f64, offset: f64, cfg: &EvalConfig) -> Result<Side> {
    let k = f.weight();
    let h = cfg.quad_step;
    let half = (cfg.quad_halfwidth(c) / h).ceil() as usize;
    let nodes = 2 * half + 1;
    let v = |j: usize| (j as f64 - half as f64) * h;
    let mut lg = Vec::with_capacity(nodes);
    for j in 0..nodes {
        lg.push(log_gamma_factor_ratio(k, s, Complex64::new(c, v(j)))?);
    }
    let a = cfg.kernel_scale;
    // K_j = G(z_j+s) G(z_j+s̄) / |G(s)|² · e^{a z_j²} / z_j, using
    // log G(z_j + s̄) = conj(log G(z_{J'-j} + s)) on the symmetric grid.
    // The logs are differences taken without forming log G itself.
    let kern: Vec<Complex64> = (0..nodes)
        .map(|j| {
            let z = Complex64::new(c, v(j));
            (lg[j] + lg[nodes - 1 - j].conj() + offset + a * z * z).exp() / z
        })
        .collect();

    let scale = conductor_scale(k, s).powi(2);
    let len = smoothed_length(scale, s.re, a, cfg.series_tol, 3);
    let n_terms = check_length(f, len, cfg, "contour Dirichlet length")?;
    let lam = f.lambdas();
    let sig = s.re + c;
    let t0 = s.im + v(0);
    // A_j = Σ λ(n) n^{-(z_j + s)}, accumulated along the node grid by the
    // recurrence n^{-i(v + h)} = n^{-iv} n^{-ih}. Fixed chunking keeps the
    // reduction order independent of the thread count.
    let partials: Vec<Vec<Complex64>> = (1..=n_terms)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![Complex64::new(0.0, 0.0); nodes];
            for &n in chunk {
                let ln = (n as f64).ln();
                let mag = lam[n] * (-sig * ln).exp();
                if mag == 0.0 {
                    continue;
                }
                let mut w = Complex64::from_polar(mag, -t0 * ln);
                let r = Complex64::from_polar(1.0, -h * ln);
                for (j, slot) in acc.iter_mut().enumerate() {
                    *slot += w;
                    w *= r;
                    if j % 256 == 255 {
                        w = Complex64::from_polar(mag, -(t0 + (j + 1) as f64 * h) * ln);
                    }
                }
            }
            acc
        })
        .collect();
    let mut amp = vec![Complex64::new(0.0, 0.0); nodes];
    for p in &partials {
        for (x, y) in amp.iter_mut().zip(p) {
            *x += y;
        }
    }

    let mut value = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    let w = h / (2.0 * PI);
    for j in 0..nodes {
        let term = kern[j] * amp[j] * amp[nodes - 1 - j].conj() * w;
        value += term;
        abs_sum += term.norm();
    }
    // The phase of term n, of size |t| ln n, is rounded once per 256
    // recurrence steps. The rounding is independent across n, so each sum
    // is off by about ε |t| times the rms of |a_n| ln n.
    let (mut rms_log, mut rms) = (0.0, 0.0);
    for n in 2..=n_terms {
        let m = lam[n] * (n as f64).powf(-sig);
        rms += m * m;
        rms_log += (m * (n as f64).ln()).powi(2);
    }
    let amp_err = 4.0 * f64::EPSILON * ((t0.abs() + 2.0 * v(0).abs()) * rms_log.sqrt() + 256.0 * rms.sqrt());
    let cross: f64 = (0..nodes).map(|j| kern[j].norm() * w * (amp[j].norm() + amp[nodes - 1 - j].norm())).sum();
    let phase_err = amp_err * cross;
    let edge = (kern[0] * amp[0] * amp[nodes - 1].conj() * w).norm()
        + (kern[nodes - 1] * amp[nodes - 1] * amp[0].conj() * w).norm();
    let l = len.max(2.0);
    let trunc = 0.5
        * crate::special::erfc((l / scale.max(1.0)).ln() / (2.0 * a.sqrt()))
        * l.powf((1.0 - s.re).max(0.0))
        * l.ln().powi(3);
    Ok(Side { value, abs_sum, edge, terms: n_terms, nodes, trunc, phase_err })
}

/// `|L(f, s)|²` by the two-sided contour with the configured line.
pub fn abs_l_squared_contour(f: &CuspForm, s: Complex64, cfg: &EvalConfig) -> Result<LPoint> {
    abs_l_squared_contour_with(f, s, cfg.contour_c, cfg)
}

/// As [`abs_l_squared_contour`] with an explicit base abscissa `c`. The
/// actual lines are `max(c, 1.5 - σ)` for `I(s)` and `max(c, σ + 0.5)` for
/// `I(1 - s)`.
pub fn abs_l_squared_contour_with(f: &CuspForm, s: Complex64, c: f64, cfg: &EvalConfig) -> Result<LPoint> {
    cfg.validate()?;
    if c <= 0.0 {
        return Err(LabError::Domain(format!("contour abscissa must be positive, got {c}")));
    }
    let c1 = c.max(1.5 - s.re);
    let first = side(f, s, c1, 0.0, cfg)?;
    if (s.re - 0.5).abs() < 1e-15 {
        // On the critical line 1 - s = s̄ and I(s̄) = I(s).
        return finish(s, 2.0 * first.value, &[&first], 2.0);
    }
    let c2 = c.max(s.re + 0.5);
    let one = Complex64::new(1.0, 0.0);
    let offset = 2.0 * log_gamma_factor_ratio(f.weight(), s, one - 2.0 * s)?.re;
    let second = side(f, one - s, c2, offset, cfg)?;
    finish(s, first.value + second.value, &[&first, &second], 1.0)
}

fn finish(s: Complex64, total: Complex64, parts: &[&Side], mult: f64) -> Result<LPoint> {
    if !total.re.is_finite() {
        return Err(LabError::Evaluator { t: s.im, msg: "contour sum is not finite".into() });
    }
    let mut est = 0.0;
    let mut terms = 0;
    let mut nodes = 0;
    for p in parts {
        est += mult * (p.edge + p.abs_sum * 64.0 * f64::EPSILON + p.phase_err + p.trunc);
        terms = terms.max(p.terms);
        nodes = nodes.max(p.nodes);
    }
    est += total.im.abs();
    Ok(LPoint::new(s.re, s.im, total.re, est, Method::Contour, terms, nodes))
}
