//! Dirichlet polynomials, mollifier coefficients and moment identities.

use lclt::hecke::{build_newform, CuspForm};
use lclt::lfunc::dirichlet_partial_sum;
use lclt::mollifier::*;
use lclt::moments::*;
use lclt::quad::integrate;
use num_complex::Complex64;

fn delta() -> CuspForm {
    build_newform(12, 4096).unwrap()
}

fn params(x: f64, y: f64, k1: u32, k2: u32) -> Params {
    Params { t: 1e4, w: 1.0, x, y, sigma0: 0.6, k1, k2, notes: Vec::new() }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn von_mangoldt_values() {
    let f = delta();
    let l2 = f.lambda(2).unwrap();
    assert_eq!(von_mangoldt_f(&f, 6).unwrap(), 0.0);
    assert!((von_mangoldt_f(&f, 2).unwrap() - l2 * 2f64.ln()).abs() < 1e-15);
    let want = (f.lambda(4).unwrap() - 1.0) * 2f64.ln();
    assert!((von_mangoldt_f(&f, 4).unwrap() - want).abs() < 1e-15);
    assert!((von_mangoldt_f(&f, 4).unwrap() - (l2 * l2 - 2.0) * 2f64.ln()).abs() < 1e-15);
}

#[test]
fn prime_sum_ranges() {
    let f = delta();
    let p0 = build_p(&f, &params(10.0, 10.0, 3, 1), PRange::PrimesOnly).unwrap();
    let idx: Vec<u64> = p0.terms().map(|(n, _)| n).collect();
    assert_eq!(idx, vec![2, 3, 5, 7]);
    for n in idx {
        assert_eq!(p0.coeff(n).re, f.lambda(n).unwrap());
    }
    let full = build_p(&f, &params(9.0, 5.0, 3, 1), PRange::Full).unwrap();
    for (n, p, j) in [(4u64, 2u64, 2u32), (8, 2, 3), (9, 3, 2)] {
        let u = von_mangoldt_f(&f, n).unwrap() / (p as f64).ln();
        assert!((full.coeff(n).re - u / j as f64).abs() < 1e-15);
    }
    let low = build_p(&f, &params(9.0, 5.0, 3, 1), PRange::Low).unwrap();
    let high = build_p(&f, &params(9.0, 5.0, 3, 1), PRange::High).unwrap();
    let sum = low.sum(&high);
    for n in 1..=9 {
        assert!((sum.coeff(n) - full.coeff(n)).norm() < 1e-15, "n = {n}");
    }
}

#[test]
fn truncated_exponential() {
    let budget = PolyBudget::default();
    let mut p = DirichletPolynomial::new("c p^-s");
    p.add_term(3, c(0.7));
    let e0 = truncated_exp(&p, 0, &budget).unwrap();
    assert_eq!(e0.len(), 1);
    assert_eq!(e0.coeff(1), c(1.0));
    let e2 = truncated_exp(&p, 2, &budget).unwrap();
    assert_eq!(e2.coeff(1), c(1.0));
    assert!((e2.coeff(3) - c(-0.7)).norm() < 1e-15);
    assert!((e2.coeff(9) - c(0.245)).norm() < 1e-15);
    assert_eq!(e2.len(), 3);
    // |e^z - Σ_{k<=300} z^k/k!| <= e^{-297} at z = -2.7.
    let bound = exp_tail_log_abs(c(-2.7), 300);
    assert!(bound <= -99.0 * 3.0, "{bound}");
}

#[test]
fn coefficient_rules() {
    let p = params(30.0, 5.0, 3, 2);
    for v in [Variant::A, Variant::A1, Variant::A2] {
        assert_eq!(mollifier_coefficient_a(1, &p, v).unwrap(), 1);
    }
    assert_eq!(mollifier_coefficient_a(3, &p, Variant::A).unwrap(), 1);
    assert_eq!(mollifier_coefficient_a(3, &p, Variant::A1).unwrap(), 1);
    assert_eq!(mollifier_coefficient_a(3, &p, Variant::A2).unwrap(), 0);
    assert_eq!(mollifier_coefficient_a(1 << 4, &p, Variant::A).unwrap(), 0);
    assert_eq!(mollifier_coefficient_a(1 << 3, &p, Variant::A).unwrap(), 1);
    assert_eq!(mollifier_coefficient_a(7 * 11, &p, Variant::A2).unwrap(), 1);
    assert_eq!(mollifier_coefficient_a(7 * 11 * 13, &p, Variant::A2).unwrap(), 0);
    assert_eq!(mollifier_coefficient_a(31, &p, Variant::A).unwrap(), 0);
}

#[test]
fn mollifier_factorises() {
    let f = delta();
    let p = params(40.0, 6.0, 3, 2);
    let budget = PolyBudget::default();
    let m = build_m(&f, &p, Variant::A, &budget).unwrap();
    let m1 = build_m(&f, &p, Variant::A1, &budget).unwrap();
    let m2 = build_m(&f, &p, Variant::A2, &budget).unwrap();
    assert_eq!(m.coeff(1), c(1.0));
    for q in [2u64, 3, 5] {
        assert!((m.coeff(q).re + f.lambda(q).unwrap()).abs() < 1e-15);
    }
    let prod = m1.mul(&m2, &budget).unwrap();
    assert_eq!(prod.len(), m.len());
    for (n, v) in m.terms() {
        assert!((prod.coeff(n) - v).norm() < 1e-14, "n = {n}");
    }
    let bound = p.y.powi(p.k1 as i32) * p.x.powi(p.k2 as i32);
    assert!((m.max_index() as f64) <= bound);
}

#[test]
fn b_and_c_structure() {
    let f = delta();
    let p = params(40.0, 7.0, 3, 1);
    let bc = b_and_c_coefficients(&f, &p, &PolyBudget::default()).unwrap();
    assert_eq!(bc.b[&1], 1.0);
    assert_eq!(bc.c[&1], 0.0);
    for q in [2u64, 3, 5, 7] {
        assert!((bc.raw[&q] + f.lambda(q).unwrap()).abs() < 1e-15);
        assert!(bc.c[&q].abs() < 1e-15);
    }
    let (bad, exceptional) = b_structure_violations(&f, &p, &PolyBudget::default()).unwrap();
    assert!(bad.is_empty(), "{bad:?}");
    assert!(exceptional > 0);
}

#[test]
fn multinomials() {
    assert_eq!(multinomial_a_k(6, 2, 10.0).unwrap(), 2);
    assert_eq!(multinomial_a_k(5 * 5 * 5, 3, 10.0).unwrap(), 1);
    assert_eq!(multinomial_a_k(12, 2, 10.0).unwrap(), 0);
    assert_eq!(multinomial_a_k(12, 3, 10.0).unwrap(), 3);
    assert_eq!(multinomial_a_k(22, 2, 10.0).unwrap(), 0);
}

#[test]
fn power_expansion() {
    let f = delta();
    let p0 = build_p(&f, &params(10.0, 10.0, 3, 1), PRange::PrimesOnly).unwrap();
    for k in 1..=3 {
        assert!(power_expand_check(&p0, k, &f, 10.0, 1 << 20).unwrap().passed);
    }
    let sq = power(&p0, 2, 1 << 20).unwrap();
    let want = 2.0 * f.lambda(2).unwrap() * f.lambda(3).unwrap();
    assert!((sq.coeff(6).re - want).abs() < 1e-15);
    let p8 = build_p(&f, &params(8.0, 8.0, 3, 1), PRange::PrimesOnly).unwrap();
    assert!(power_expand_check(&p8, 3, &f, 8.0, 1 << 20).unwrap().passed);
    let cube = power(&p8, 3, 1 << 20).unwrap();
    assert!((cube.coeff(8).re - f.lambda(2).unwrap().powi(3)).abs() < 1e-15);
}

#[test]
fn mean_value_integrals() {
    assert_eq!(mean_value_integral(5, 5, 1000.0).unwrap(), c(1000.0));
    assert!(mean_value_integral(2, 1, 100.0).unwrap().norm() <= 2.0 / 2f64.ln());
    let v = mean_value_integral(3, 2, 50.0).unwrap();
    let l = 1.5f64.ln();
    let q = integrate(&|t| Complex64::from_polar(1.0, l * t), 50.0, 100.0, 16, 1e-12, 1e-15);
    assert!((v - q.value).norm() < 1e-9);
}

#[test]
fn estimate_bounds_on_a_small_grid() {
    let e = estimate_suite(60, &[100.0, 1e4]).unwrap();
    assert!(e.failures.is_empty());
    assert!(e.worst_c1 <= ES_C1 * (1.0 + 1e-12));
}

#[test]
fn moment_regimes() {
    let f = delta();
    let spec = MomentSpec::single(&f, 1, 0, 1e4, 0.544, 20.0);
    let r = moment_exact(&spec).unwrap();
    assert_eq!(r.diagonal, 0.0);
    assert!(r.exact().norm() < 20.0 * 8.0);
    assert!(r.agrees());
    let spec = MomentSpec::single(&f, 1, 1, 1e4, 0.544, 20.0);
    let r = moment_exact(&spec).unwrap();
    let diag: f64 = [2u64, 3, 5, 7, 11, 13, 17, 19].iter().map(|&p| f.lambda(p).unwrap().powi(2) * (p as f64).powf(-1.088)).sum();
    assert!((r.diagonal / 1e4 - diag).abs() < 1e-12 * diag);
    let rel = (r.exact() - r.quadrature()).norm() / r.exact().norm();
    assert!(rel < 1e-6, "{rel}");
}

#[test]
fn main_terms_and_gaussian_moments() {
    let f = delta();
    let g = build_newform(16, 64).unwrap();
    let one = [Weighted { form: &f, a: 1.0 }];
    assert_eq!(squarefree_main_term(&one, 0, 0.6, 30.0).unwrap(), 1.0);
    let base = squarefree_main_term(&one, 1, 0.6, 30.0).unwrap();
    let direct: f64 = lclt::arith::primes_up_to(30).iter().map(|&p| f.lambda(p).unwrap().powi(2) * (p as f64).powf(-1.2)).sum();
    assert!((base - direct).abs() < 1e-14);
    assert!((squarefree_main_term(&one, 2, 0.6, 30.0).unwrap() - 2.0 * base * base).abs() < 1e-13);
    let two = [Weighted { form: &f, a: 1.0 }, Weighted { form: &g, a: 1.0 }];
    let mixed = squarefree_main_term(&two, 1, 0.6, 30.0).unwrap();
    let g_only = squarefree_main_term(&[Weighted { form: &g, a: 1.0 }], 1, 0.6, 30.0).unwrap();
    let cross: f64 = lclt::arith::primes_up_to(30)
        .iter()
        .map(|&p| 2.0 * f.lambda(p).unwrap() * g.lambda(p).unwrap() * (p as f64).powf(-1.2))
        .sum();
    assert!((mixed - (base + g_only + cross)).abs() < 1e-13);
    assert_eq!(gaussian_moment_prediction(2, 0.7), 0.7);
    assert!((gaussian_moment_prediction(4, 0.7) - 3.0 * 0.49).abs() < 1e-15);
    assert_eq!(gaussian_moment_prediction(3, 0.7), 0.0);
}

#[test]
fn inverse_euler_product_mollifies_at_two() {
    let f = build_newform(12, 1 << 16).unwrap();
    let budget = PolyBudget::default();
    let mut inv = DirichletPolynomial::one("inverse Euler product");
    for p in lclt::arith::primes_up_to(100) {
        let mut factor = DirichletPolynomial::one("factor");
        factor.add_term(p, c(-f.lambda(p).unwrap()));
        factor.add_term(p * p, c(1.0));
        inv = inv.mul(&factor, &budget).unwrap();
    }
    let mut acc = 0.0;
    for t in [0.0, 13.0, 101.5, 977.0] {
        let s = Complex64::new(2.0, t);
        let l = dirichlet_partial_sum(&f, s, 1 << 16).unwrap();
        acc += (1.0 - l * inv.eval(s)).norm_sqr();
    }
    assert!(acc / 4.0 < 1e-6, "{}", acc / 4.0);
}
