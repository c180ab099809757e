//! Integer-side number theory: primality, bounded factorization of `q^n - 1`,
//! square-free divisor counts and the `C_nu` constants.

pub mod arith;
mod factor;
mod prime;

use std::sync::OnceLock;

pub use factor::{
    cyclotomic_value, factor_bounded, factor_cyclotomic, factor_cyclotomic_cached, w_int, Budget,
    CyclotomicFactorization, FactorCache, NoCache, PartialFactorization,
};
pub use prime::{
    enumerate_prime_powers, is_prime, primality, primes_of_form, primes_up_to, special_primes,
    Primality, PrimePower, PrimeSequence,
};

/// Largest supported `nu` for [`c_nu`]; the product runs over primes up to `2^nu`.
pub const MAX_NU: f64 = 26.0;

struct NuTable {
    primes: Vec<u64>,
    // prefix sums of ln p
    theta: Vec<f64>,
}

fn nu_table() -> &'static NuTable {
    static TABLE: OnceLock<NuTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let primes = primes_up_to(1 << 26);
        let mut theta = Vec::with_capacity(primes.len() + 1);
        let mut acc = 0.0f64;
        theta.push(0.0);
        for &p in &primes {
            acc += (p as f64).ln();
            theta.push(acc);
        }
        NuTable { primes, theta }
    })
}

/// `ln C_nu`, where `C_nu = prod_{p <= 2^nu} 2 / p^{1/nu}` over every prime.
///
/// # Panics
/// When `nu` is not in `(0, MAX_NU]`.
pub fn ln_c_nu(nu: f64) -> f64 {
    assert!(nu > 0.0 && nu <= MAX_NU, "nu = {nu} out of range");
    let table = nu_table();
    let limit = 2f64.powf(nu).floor() as u64;
    let count = table.primes.partition_point(|&p| p <= limit);
    count as f64 * std::f64::consts::LN_2 - table.theta[count] / nu
}

pub fn c_nu(nu: f64) -> f64 {
    ln_c_nu(nu).exp()
}

/// Number of distinct primes of a machine integer, by trial division.
pub fn omega_u64(n: u64) -> u32 {
    arith::factor_u64(n).len() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_nu_small() {
        let expected = (2.0 / 2f64.sqrt()) * (2.0 / 3f64.sqrt());
        assert!((c_nu(2.0) - expected).abs() < 1e-12);
        assert!((c_nu(2.0) - 1.6330).abs() < 1e-4);
    }

    #[test]
    fn c_nu_includes_small_factors() {
        // at nu = 3 the prime 7 contributes 2/7^(1/3) > 1, 5 as well; every prime <= 8 is present
        let direct: f64 = [2u64, 3, 5, 7]
            .iter()
            .map(|&p| 2.0 / (p as f64).powf(1.0 / 3.0))
            .product();
        assert!((c_nu(3.0) - direct).abs() < 1e-12);
    }
}
