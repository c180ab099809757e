use knpoly::numthy::{
    arith::factor_u64, c_nu, factor_bounded, omega_u64, primes_of_form, primes_up_to, special_primes,
    w_int, Budget,
};
use num_bigint::BigUint;
use num_integer::Integer;
use proptest::prelude::*;

fn slow_omega(mut n: u64) -> u32 {
    let mut count = 0;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            count += 1;
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    count + u32::from(n > 1)
}

fn w_of(n: u64) -> (BigUint, BigUint) {
    w_int(&factor_bounded(&BigUint::from(n), Budget::default()))
}

proptest! {
    #[test]
    fn w_is_multiplicative(a in 1u64..1_000_000, b in 1u64..1_000_000) {
        prop_assume!(a.gcd(&b) == 1);
        let (lo, hi) = w_of(a * b);
        let (la, ha) = w_of(a);
        let (lb, hb) = w_of(b);
        prop_assert_eq!(lo, la * lb);
        prop_assert_eq!(hi, ha * hb);
    }

    #[test]
    fn factorization_round_trip(n in 1u64..u64::MAX) {
        let pf = factor_bounded(&BigUint::from(n), Budget::default());
        prop_assert_eq!(pf.product(), BigUint::from(n));
        prop_assert!(pf.omega_lower() <= pf.omega_upper());
    }

    #[test]
    fn omega_matches_trial_division(n in 1u64..=1_000_000) {
        let pf = factor_bounded(&BigUint::from(n), Budget::default());
        prop_assert!(pf.is_complete());
        prop_assert_eq!(pf.omega_known(), slow_omega(n));
        prop_assert_eq!(omega_u64(n), slow_omega(n));
    }

    #[test]
    fn small_factorizations_are_prime_powers(n in 2u64..10_000_000) {
        let f = factor_u64(n);
        prop_assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
        prop_assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn primes_of_form_are_ordered(modulus in 2u64..40, count in 1usize..60) {
        let seq = primes_of_form(modulus, 1, count);
        prop_assert_eq!(seq.len(), count);
        prop_assert!(seq.primes.iter().all(|p| p % modulus == 1));
        prop_assert!(seq.primes.windows(2).all(|w| w[0] < w[1]));
        // nothing skipped
        let last = *seq.primes.last().unwrap();
        let expected: Vec<u64> = primes_up_to(last).into_iter().filter(|p| p % modulus == 1).collect();
        prop_assert_eq!(&seq.primes, &expected);
    }

    #[test]
    fn c_nu_bounds_w(m in 1u64..u64::MAX, nu10 in 21u32..120) {
        let nu = nu10 as f64 / 10.0;
        let w = (1u64 << factor_u64(m).len()) as f64;
        prop_assert!(w <= c_nu(nu) * (m as f64).powf(1.0 / nu) * (1.0 + 1e-12));
    }
}

#[test]
fn special_set_includes_special_prime() {
    let seq = special_primes(Some(5), 5, 1, 4);
    assert_eq!(seq.primes, vec![5, 11, 31, 41]);
}

#[test]
fn c_nu_includes_every_prime() {
    // 2/p^(1/nu) < 1 for large p, yet those primes still belong to the product
    let nu = 4.0;
    let direct: f64 = primes_up_to(16).iter().map(|&p| 2.0 / (p as f64).powf(1.0 / nu)).product();
    assert!((c_nu(nu) - direct).abs() < 1e-12);
}
