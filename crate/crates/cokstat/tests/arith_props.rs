use cokstat::arith::{
    exact_to_f64, gaussian_binomial, gaussian_binomial_exact, gaussian_binomial_real, one, qpoch,
    real, to_f64, PochBase, PochLen, QPochSpec,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn finite_qpoch_is_the_literal_product(a in -3.0f64..3.0, qinv in 0.05f64..0.95, k in 0u64..40) {
        let prec = 128;
        let spec = QPochSpec::new(PochBase::Value(real(a, prec)), real(qinv, prec), PochLen::Finite(k));
        let got = qpoch(&spec, 1e-30).unwrap();
        let want: f64 = (0..k).map(|i| 1.0 - a * qinv.powi(i as i32)).product();
        prop_assert_eq!(got.tail_bound, 0.0);
        prop_assert!((got.to_f64() - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn symbolic_power_base(e in -5i64..10, k in 0u64..20) {
        let t = one(128) / real(2.0, 128);
        let got = qpoch(&QPochSpec::new(PochBase::QPower(e), t, PochLen::Finite(k)), 1e-30).unwrap();
        let want: f64 = (0..k).map(|i| 1.0 - 0.5f64.powi((e + i as i64) as i32)).product();
        prop_assert!((got.to_f64() - want).abs() <= 1e-12 * want.abs().max(1.0));
        // a factor 1 - q^0 vanishes exactly
        if e <= 0 && (k as i64) > -e {
            prop_assert_eq!(got.to_f64(), 0.0);
        }
    }

    #[test]
    fn gaussian_binomial_symmetry(n in 0i64..20, k in 0i64..20, p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        prop_assume!(k <= n);
        prop_assert_eq!(gaussian_binomial_exact(n, k, p), gaussian_binomial_exact(n, n - k, p));
        let f = gaussian_binomial(n, k, p as f64);
        prop_assert!((f / gaussian_binomial(n, n - k, p as f64) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_and_real_variants_agree(n in 0i64..16, k in 0i64..16, p in prop::sample::select(vec![2u64, 3, 5])) {
        prop_assume!(k <= n);
        let e = exact_to_f64(&gaussian_binomial_exact(n, k, p));
        let r = to_f64(&gaussian_binomial_real(n, k, &real(p as f64, 128)));
        let f = gaussian_binomial(n, k, p as f64);
        prop_assert!((r / e - 1.0).abs() < 1e-12);
        prop_assert!((f / e - 1.0).abs() < 1e-12);
    }
}

#[test]
fn pascal_recursion() {
    for p in [2u64, 3, 5] {
        for n in 1..=12 {
            for k in 1..=n {
                let lhs = gaussian_binomial_exact(n, k, p);
                let rhs = gaussian_binomial_exact(n - 1, k - 1, p)
                    + dashu::integer::IBig::from(p).pow(k as usize)
                        * gaussian_binomial_exact(n - 1, k, p);
                assert_eq!(lhs, rhs, "[{n},{k}]_{p}");
            }
        }
    }
}

#[test]
fn subspace_counts() {
    // [n,1]_p = (p^n - 1)/(p - 1) lines in F_p^n
    assert_eq!(gaussian_binomial_exact(3, 1, 2), 7.into());
    assert_eq!(gaussian_binomial_exact(4, 2, 2), 35.into());
    assert_eq!(gaussian_binomial_exact(2, 1, 3), 4.into());
}
