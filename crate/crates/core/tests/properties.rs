//! Randomised invariants.

use std::sync::OnceLock;

use lclt::arith::gcd;
use lclt::config::{ConfigFile, RunConfig};
use lclt::hecke::{build_newform, CuspForm};
use lclt::mollifier::{DirichletPolynomial, PolyBudget};
use lclt::moments::mean_value_integral;
use lclt::special::log_gamma;
use num_complex::Complex64;
use proptest::prelude::*;

fn form16() -> &'static CuspForm {
    static F: OnceLock<CuspForm> = OnceLock::new();
    F.get_or_init(|| build_newform(16, 10_000).unwrap())
}

fn poly(terms: &[(u64, f64)]) -> DirichletPolynomial {
    let mut p = DirichletPolynomial::new("random");
    for &(n, c) in terms {
        p.add_term(n, Complex64::new(c, 0.0));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hecke_multiplicativity(m in 1u64..100, n in 1u64..100) {
        let f = form16();
        let lhs = f.lambda(m).unwrap() * f.lambda(n).unwrap();
        let g = gcd(m, n);
        let rhs: f64 = (1..=g).filter(|d| g % d == 0).map(|d| f.lambda(m * n / (d * d)).unwrap()).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn log_gamma_recurrence(re in 0.1f64..50.0, im in -500.0f64..500.0) {
        let z = Complex64::new(re, im);
        let d = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
        let k = d.im / std::f64::consts::TAU;
        prop_assert!(d.re.abs() < 1e-11 * (z.norm().ln().abs() + 1.0) * 10.0);
        prop_assert!((k - k.round()).abs() * std::f64::consts::TAU < 1e-9);
    }

    #[test]
    fn product_evaluates_to_product(
        a in prop::collection::vec((1u64..60, -2.0f64..2.0), 1..8),
        b in prop::collection::vec((1u64..60, -2.0f64..2.0), 1..8),
        sigma in 0.5f64..2.0,
        t in -100.0f64..100.0,
    ) {
        let (p, q) = (poly(&a), poly(&b));
        let s = Complex64::new(sigma, t);
        let pq = p.mul(&q, &PolyBudget::default()).unwrap();
        let want = p.eval(s) * q.eval(s);
        prop_assert!((pq.eval(s) - want).norm() <= 1e-12 * (1.0 + want.norm()) * 50.0);
        let qp = q.mul(&p, &PolyBudget::default()).unwrap();
        for (n, c) in pq.terms() {
            prop_assert!((qp.coeff(n) - c).norm() <= 1e-14);
        }
    }

    #[test]
    fn mean_value_conjugate_symmetry(m in 1u64..500, n in 1u64..500, t in 10.0f64..1e5) {
        let a = mean_value_integral(m, n, t).unwrap();
        let b = mean_value_integral(n, m, t).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        prop_assert!(a.norm() <= t + 1e-9);
    }

    #[test]
    fn config_round_trip(x in 2.0f64..1e4, scale in 0.001f64..1.0, seed in any::<u64>(), k1 in 1u32..500) {
        let text = format!("X = {x:?}\nkernel_scale = {scale:?}\nseed = {seed}\nK1 = {k1}\n");
        let cfg = RunConfig::from_file("sample", &ConfigFile::parse(&text).unwrap()).unwrap();
        let again = RunConfig::from_file("sample", &ConfigFile::parse(&cfg.to_file_text()).unwrap()).unwrap();
        prop_assert_eq!(&cfg, &again);
        prop_assert_eq!(cfg.overrides.x, Some(x));
        prop_assert_eq!(cfg.eval.kernel_scale, scale);
    }
}
