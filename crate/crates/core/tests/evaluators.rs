//! Oracle checks for forms, gamma factors and the L-function evaluators.
//! Reference values for log Γ and the central weight come from mpmath at
//! 40 digits.

use lclt::acceptance::naive_delta;
use lclt::hecke::{build_newform, parse_eigenvalues, CuspForm};
use lclt::lfunc::*;
use lclt::special::log_gamma;
use lclt::LabError;
use num_complex::Complex64;
use num_traits::ToPrimitive;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn delta(n: usize) -> CuspForm {
    build_newform(12, n).unwrap()
}

#[test]
fn tau_small_values() {
    let t = naive_delta(7);
    let want = [1i64, -24, 252, -1472, 4830, -6048, -16744];
    for (n, w) in want.iter().enumerate() {
        assert_eq!(t[n + 1].to_i64(), Some(*w));
    }
    assert_eq!(t[6].to_i64(), Some(-24 * 252));
}

#[test]
fn lambda_normalisation() {
    let f = delta(100);
    let l2 = f.lambda(2).unwrap();
    assert!((l2 - (-24.0 / 2f64.powf(5.5))).abs() < 1e-15);
    assert!((f.lambda(4).unwrap() - (-0.71875)).abs() < 1e-15);
    assert!((f.lambda(4).unwrap() - (l2 * l2 - 1.0)).abs() < 1e-15);
    let l6 = 6048.0 / 6f64.powf(5.5);
    assert!((f.hecke_lambda(6).unwrap() + l6).abs() < 1e-14);
    assert!((f.hecke_lambda(8).unwrap() - (l2.powi(3) - 2.0 * l2)).abs() < 1e-14);
    assert_eq!(build_newform(16, 10).unwrap().lambda(1).unwrap(), 1.0);
}

#[test]
fn eigenvalue_files() {
    assert!(parse_eigenvalues("1 1\n2 -24\n3 252\n4 -1472\n", 12).is_ok());
    match parse_eigenvalues("1 1\n2 -24\n3 252\n4 0\n", 12) {
        Err(LabError::HeckeViolation { m: 2, n: 2, .. }) => {}
        other => panic!("expected a Hecke violation at (2,2), got {other:?}"),
    }
    match parse_eigenvalues("", 12) {
        Err(LabError::Parse { line: 1, .. }) => {}
        other => panic!("expected a parse error on line 1, got {other:?}"),
    }
}

#[test]
fn unsupported_weight() {
    let e = build_newform(14, 10).unwrap_err();
    assert_eq!(e.exit_code(), 64);
}

const LOG_GAMMA: [((f64, f64), (f64, f64)); 8] = [
    ((3.0, 4.0), (-1.756_626_784_603_784_1, 4.742_664_438_034_658)),
    ((0.5, 0.0), (0.572_364_942_924_700_1, 0.0)),
    ((10.25, -20.0), (-0.928_020_315_943_760_4, -52.941_210_156_499_3)),
    ((0.1, 0.01), (2.247_665_823_230_351_3, -0.103_905_891_665_382_16)),
    ((100.0, 1000.0), (-882.392_048_301_036_3, 6059.107_565_493_689)),
    ((6.5, 1e4), (-15651.782_286_826_404, 82112.826_701_889_37)),
    ((-2.5, 0.5), (-0.935_085_621_298_277_5, -8.870_962_885_247_459)),
    ((1e-3, 0.0), (6.907_178_885_383_853_7, 0.0)),
];

#[test]
fn log_gamma_against_reference() {
    assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
    for ((zr, zi), (vr, vi)) in LOG_GAMMA {
        let got = log_gamma(c(zr, zi)).unwrap();
        let scale = 1f64.max(vr.abs().max(vi.abs()));
        assert!((got.re - vr).abs() < 1e-12 * scale, "re at {zr}+{zi}i: {} vs {vr}", got.re);
        // The branch continuous on C minus the non-positive axis.
        assert!((got.im - vi).abs() < 1e-12 * scale, "im at {zr}+{zi}i: {} vs {vi}", got.im);
    }
}

#[test]
fn log_gamma_poles() {
    assert!(matches!(log_gamma(c(0.0, 0.0)), Err(LabError::Pole(_))));
    assert!(matches!(log_gamma(c(-3.0, 0.0)), Err(LabError::Pole(_))));
}

#[test]
fn gamma_factor_forms() {
    let g = log_gamma_factor(12, c(1.0, 0.0)).unwrap();
    let want = log_gamma_constant(12) - (2.0 * std::f64::consts::PI).ln() + log_gamma(c(6.5, 0.0)).unwrap().re;
    assert!((g.re - want).abs() < 1e-13 && g.im.abs() < 1e-13);
    // Stirling series at height 1e4.
    let s = c(0.5, 1e4);
    let g = log_gamma_factor(12, s).unwrap();
    let z = s + 5.5;
    let lg = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * z) - 1.0 / (360.0 * z.powi(3));
    let stirling = log_gamma_constant(12) - 0.5 * (2.0 * std::f64::consts::PI).ln() + lg.re;
    assert!((g.re - stirling).abs() < 1e-6, "{} vs {stirling}", g.re);
    let crude = log_gamma_constant(12) - std::f64::consts::FRAC_PI_2 * 1e4 + 5.5 * 1e4f64.ln();
    assert!((g.re - crude).abs() < 1e-2);
    // Duplication identity.
    let mut x = 0.37f64;
    for _ in 0..20 {
        x = (x * 7.31 + 0.123).fract();
        let s = c(0.2 + 2.0 * x, 100.0 * (x - 0.5));
        let a = log_gamma_factor(12, s).unwrap();
        let b = log_l_infinity(12, s).unwrap();
        assert!((a.re - b.re).abs() < 1e-10 * a.re.abs().max(1.0));
        let d = (a.im - b.im) / std::f64::consts::TAU;
        assert!((d - d.round()).abs() < 1e-10 * a.im.abs().max(1.0));
    }
}

#[test]
fn gamma_ratio_matches_difference() {
    for (s, u) in [(c(0.5, 30.0), c(1.2, -4.0)), (c(0.7, -200.0), c(0.5, 11.0)), (c(2.0, 0.0), c(-0.3, 0.2))] {
        let r = log_gamma_factor_ratio(16, s, u).unwrap();
        let d = log_gamma_factor(16, s + u).unwrap() - log_gamma_factor(16, s).unwrap();
        assert!((r.re - d.re).abs() < 1e-11);
        let k = (r.im - d.im) / std::f64::consts::TAU;
        assert!((k - k.round()).abs() < 1e-11);
    }
}

#[test]
fn series_at_ten_is_dominated_by_two_terms() {
    let f = delta(2048);
    let v = dirichlet_series_l(&f, c(10.0, 0.0), 1e-12).unwrap();
    let two = 1.0 + f.lambda(2).unwrap() / 1024.0;
    assert!((v.value.re - 0.999_491_618_53).abs() < 1e-10, "{}", v.value.re);
    assert!((v.value.re - two).abs() < 1e-4);
    let thirty = dirichlet_series_l(&f, c(30.0, 0.0), 1e-12).unwrap();
    assert!((thirty.value.re - 1.0).abs() < 1e-8);
}

#[test]
fn series_and_euler_product_agree() {
    let f = delta(1 << 19);
    let a = dirichlet_series_l(&f, c(3.0, 0.0), 1e-10).unwrap();
    let b = euler_product_l(&f, c(3.0, 0.0), 1e-10).unwrap();
    assert!((a.value - b.value).norm() < 1e-9);
    // The rigorous divisor tail at σ = 2.5 would need millions of terms;
    // both truncations are far below the tolerance at 2^18.
    let g = build_newform(16, 1 << 18).unwrap();
    let a = dirichlet_partial_sum(&g, c(2.5, 1.0), 1 << 18).unwrap();
    let b = euler_product_partial(&g, c(2.5, 1.0), 1 << 18).unwrap();
    assert!((a - b).norm() < 1e-7, "{}", (a - b).norm());
}

#[test]
fn series_outside_convergence_is_rejected() {
    let f = delta(1000);
    assert!(dirichlet_series_l(&f, c(1.1, 0.0), 1e-8).is_err());
}

const V_REFERENCE: [(f64, f64); 5] =
    [(1.0, 1.0), (40.0, 0.948_649_540_138_496_7), (64.0, 0.499_828_300_038_093_96), (100.0, 0.063_658_410_545_078_97), (250.0, 2.197_292_891_859_283_6e-6)];

#[test]
fn central_weight_against_reference() {
    let cfg = EvalConfig::default();
    for (x, want) in V_REFERENCE {
        let v = afe_v_weight(12, x, 50.0, c(0.0, 0.0), c(0.0, 0.0), &cfg).unwrap();
        assert!((v.re - want).abs() < 1e-9 && v.im.abs() < 1e-9, "x = {x}: {v} vs {want}");
    }
    let scale = conductor_scale(12, c(0.5, 50.0)).powi(2);
    let far = afe_v_weight(12, 1e6 * scale, 50.0, c(0.0, 0.0), c(0.0, 0.0), &cfg).unwrap();
    assert!(far.norm() < 1e-10);
    let near = afe_v_weight(12, 1e-8, 50.0, c(0.0, 0.0), c(0.0, 0.0), &cfg).unwrap();
    assert!((near - 1.0).norm() < 1e-12);
}

fn form_for(weight: u32, s: Complex64, method: Method) -> CuspForm {
    let cfg = EvalConfig::default();
    let n = required_length(weight, s, method, &cfg);
    build_newform(weight, n + n / 50 + 16).unwrap()
}

#[test]
fn evaluators_agree_on_the_critical_line() {
    let cfg = EvalConfig::default();
    for t in [100.0, 1000.0] {
        let s = c(0.5, t);
        let f = form_for(12, s, Method::AbsSquaredAfe);
        let a = abs_l_squared_afe(&f, s, &cfg).unwrap();
        let b = abs_l_squared_contour(&f, s, &cfg).unwrap();
        let rel = (a.abs_l_sq - b.abs_l_sq).abs() / b.abs_l_sq;
        assert!(rel < if t < 500.0 { 1e-6 } else { 1e-5 }, "t = {t}: rel {rel}");
        let l = l_value_afe(&f, s, &cfg).unwrap();
        assert!((l.value.norm_sqr() - a.abs_l_sq).abs() / a.abs_l_sq < 1e-8);
    }
}

#[test]
fn contour_conjugate_symmetry_and_c_independence() {
    let cfg = EvalConfig::default();
    let s = c(0.5, 20.0);
    let f = form_for(12, s, Method::Contour);
    let a = abs_l_squared_contour(&f, s, &cfg).unwrap();
    let b = abs_l_squared_contour(&f, s.conj(), &cfg).unwrap();
    assert!((a.abs_l_sq - b.abs_l_sq).abs() <= 1e-10 * a.abs_l_sq);
    let f = form_for(12, c(0.5, 0.0), Method::Contour);
    let vals: Vec<f64> = [1.5, 2.0, 2.5]
        .iter()
        .map(|&cc| abs_l_squared_contour_with(&f, c(0.5, 0.0), cc, &cfg).unwrap().abs_l_sq)
        .collect();
    for v in &vals {
        assert!((v - vals[0]).abs() < 1e-8 * vals[0]);
    }
}

#[test]
fn log_abs_l_series_route_and_symmetry() {
    let cfg = EvalConfig::default();
    let f = delta(SERIES_TABLE_MAX);
    let p = log_abs_l_with(&f, 2.0, 0.0, &cfg, Method::Series).unwrap();
    let oracle = dirichlet_partial_sum(&f, c(2.0, 0.0), SERIES_TABLE_MAX).unwrap();
    assert!((p.log_abs_l() - oracle.norm().ln()).abs() < 1e-12);
    let g = form_for(12, c(0.6, 300.0), Method::LValueAfe);
    let up = log_abs_l(&g, 0.6, 300.0, &cfg).unwrap();
    let down = log_abs_l(&g, 0.6, -300.0, &cfg).unwrap();
    assert!((up.log_abs_l() - down.log_abs_l()).abs() < 1e-9);
}

/// `Λ(1/2 + it)` is real for weight 12, so a sign change brackets a zero.
fn completed(f: &CuspForm, t: f64, cfg: &EvalConfig) -> f64 {
    let s = c(0.5, t);
    let l = l_value_afe(f, s, cfg).unwrap().value;
    (l * log_gamma_factor(12, s).unwrap().exp()).re
}

#[test]
fn zero_on_the_critical_line_is_flagged() {
    let cfg = EvalConfig::default();
    let f = form_for(12, c(0.5, 20.0), Method::LValueAfe);
    let mut grid = 10.0;
    let (mut lo, mut hi) = loop {
        let next = grid + 0.25;
        if completed(&f, grid, &cfg).signum() != completed(&f, next, &cfg).signum() {
            break (grid, next);
        }
        grid = next;
        assert!(grid < 20.0, "no sign change below t = 20");
    };
    let flo = completed(&f, lo, &cfg).signum();
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if completed(&f, mid, &cfg).signum() == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = log_abs_l(&f, 0.5, 0.5 * (lo + hi), &cfg).unwrap();
    assert!(p.near_zero, "|L|² = {} with error {}", p.abs_l_sq, p.est_error);
    let away = log_abs_l(&f, 0.5, lo - 0.5, &cfg).unwrap();
    assert!(!away.near_zero);
}

#[test]
fn functional_equation_sign() {
    let cfg = EvalConfig::default();
    for (k, eps) in [(12u32, 1.0), (18, -1.0)] {
        let f = form_for(k, c(0.3, 5.0), Method::LValueAfe);
        let s = c(0.3, 0.0);
        let a = (l_value_afe(&f, s, &cfg).unwrap().value * log_gamma_factor(k, s).unwrap().exp()).re;
        let b = (l_value_afe(&f, c(0.7, 0.0), &cfg).unwrap().value * log_gamma_factor(k, c(0.7, 0.0)).unwrap().exp()).re;
        assert!((a - eps * b).abs() < 1e-8 * (a.abs() + b.abs()), "k = {k}: {a} vs {b}");
        assert_eq!(f.root_number(), eps);
    }
}

#[test]
fn too_short_table_is_a_capacity_error() {
    let cfg = EvalConfig::default();
    let f = delta(50);
    let e = abs_l_squared_afe(&f, c(0.5, 1000.0), &cfg).unwrap_err();
    assert_eq!(e.exit_code(), 3);
}
