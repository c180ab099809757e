use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::arith::{iroot, mul_mod, pow_mod};
use crate::{Error, Result};

/// Outcome of a primality test on an arbitrary-size integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Primality {
    Composite,
    Prime,
    /// Passed 64 Miller-Rabin rounds; error probability below 2^-128.
    ProbablePrime,
}

impl Primality {
    pub fn is_prime_like(self) -> bool {
        !matches!(self, Primality::Composite)
    }
}

/// Odd-only sieve of Eratosthenes; all primes `<= limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let half = (limit as usize - 1) / 2;
    let mut composite = vec![false; half + 1];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p - 1) / 2;
            while j <= half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = vec![2];
    out.extend(
        (1..=half)
            .filter(|&i| !composite[i])
            .map(|i| 2 * i as u64 + 1)
            .filter(|&p| p <= limit),
    );
    out
}

static PRIME_TABLE: OnceLock<Mutex<Arc<Vec<u32>>>> = OnceLock::new();

/// Shared table holding at least every prime `<= bound` (bound < 2^32).
pub(crate) fn prime_table(bound: u64) -> Arc<Vec<u32>> {
    let cell = PRIME_TABLE.get_or_init(|| Mutex::new(Arc::new(Vec::new())));
    let mut guard = cell.lock().unwrap();
    let covered = guard.last().map_or(0, |&p| p as u64);
    if covered < bound || guard.is_empty() {
        let target = bound.max(1 << 20).max(covered * 2).min(u32::MAX as u64);
        *guard = Arc::new(primes_up_to(target).into_iter().map(|p| p as u32).collect());
    }
    guard.clone()
}

const MR_BASES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

/// Deterministic for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'base: for &a in &MR_BASES {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'base;
            }
        }
        return false;
    }
    true
}

const MR_ROUNDS: usize = 64;

/// Deterministic below 2^64, otherwise Miller-Rabin with 64 seeded random bases.
pub fn primality(n: &BigUint) -> Primality {
    if let Some(small) = n.to_u64() {
        return if is_prime(small) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    for &p in prime_table(1000).iter().take_while(|&&p| p < 1000) {
        if (n % p).is_zero() {
            return Primality::Composite;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let mut rng = ChaCha20Rng::seed_from_u64(0x6b6e_706f_6c79);
    let two = BigUint::from(2u32);
    'round: for i in 0..MR_ROUNDS {
        let a = if i == 0 {
            two.clone()
        } else {
            rng.gen_biguint_range(&two, &n_minus_1)
        };
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'round;
            }
        }
        return Primality::Composite;
    }
    Primality::ProbablePrime
}

/// A validated odd prime power `q = p^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimePower {
    pub p: u64,
    pub m: u32,
    pub q: u64,
}

impl PrimePower {
    pub fn new(q: u64) -> Result<Self> {
        if q >= 2 && q.is_multiple_of(2) && q.is_power_of_two() {
            return Err(Error::EvenCharacteristic(q));
        }
        if q < 3 || q.is_multiple_of(2) {
            return Err(Error::NotPrimePower(q));
        }
        if is_prime(q) {
            return Ok(PrimePower { p: q, m: 1, q });
        }
        for m in 2..=40u32 {
            let p = iroot(q, m);
            if p < 3 {
                break;
            }
            if p.pow(m) == q && is_prime(p) {
                return Ok(PrimePower { p, m, q });
            }
        }
        Err(Error::NotPrimePower(q))
    }

    pub fn from_parts(p: u64, m: u32) -> Result<Self> {
        if !is_prime(p) || m == 0 {
            return Err(Error::NotPrimePower(p));
        }
        if p == 2 {
            return Err(Error::EvenCharacteristic(2u64.saturating_pow(m)));
        }
        let q = p
            .checked_pow(m)
            .ok_or_else(|| Error::Invalid(format!("{p}^{m} overflows u64")))?;
        Ok(PrimePower { p, m, q })
    }
}

impl std::fmt::Display for PrimePower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.m == 1 {
            write!(f, "{}", self.q)
        } else {
            write!(f, "{}={}^{}", self.q, self.p, self.m)
        }
    }
}

/// Every odd prime power in `[lo, hi]`, ascending.
pub fn enumerate_prime_powers(lo: u64, hi: u64) -> Vec<PrimePower> {
    if hi < 3 || lo > hi {
        return Vec::new();
    }
    let mut out = Vec::new();
    for p in primes_up_to(hi).into_iter().skip(1) {
        let mut pw = p;
        let mut m = 1;
        loop {
            if pw >= lo {
                out.push(PrimePower { p, m, q: pw });
            }
            match pw.checked_mul(p) {
                Some(next) if next <= hi => {
                    pw = next;
                    m += 1;
                }
                _ => break,
            }
        }
    }
    out.sort_unstable_by_key(|pp| pp.q);
    out
}

/// An ascending run of primes with its inverse-sum and log-product.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimeSequence {
    pub primes: Vec<u64>,
}

impl PrimeSequence {
    pub fn inverse_sum(&self) -> f64 {
        self.primes.iter().map(|&p| 1.0 / p as f64).sum()
    }

    pub fn ln_product(&self) -> f64 {
        self.primes.iter().map(|&p| (p as f64).ln()).sum()
    }

    pub fn product(&self) -> BigUint {
        self.primes.iter().map(|&p| BigUint::from(p)).product()
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }
}

/// The first `count` primes `p ≡ residue (mod modulus)`.
pub fn primes_of_form(modulus: u64, residue: u64, count: usize) -> PrimeSequence {
    PrimeSequence {
        primes: first_primes_where(count, |p| p % modulus == residue % modulus),
    }
}

/// The first `count` primes of the set `{special} ∪ {p ≡ residue (mod modulus)}`.
pub fn special_primes(special: Option<u64>, modulus: u64, residue: u64, count: usize) -> PrimeSequence {
    PrimeSequence {
        primes: first_primes_where(count, |p| Some(p) == special || p % modulus == residue % modulus),
    }
}

fn first_primes_where(count: usize, pred: impl Fn(u64) -> bool) -> Vec<u64> {
    let mut limit = 1u64 << 16;
    loop {
        let found: Vec<u64> = primes_up_to(limit)
            .into_iter()
            .filter(|&p| pred(p))
            .take(count)
            .collect();
        if found.len() == count {
            return found;
        }
        limit *= 4;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_examples() {
        assert!(is_prime(2));
        assert!(is_prime(757));
        assert!(!is_prime(19682));
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(is_prime(18446744073709551557));
        assert!(!is_prime(3215031751));
    }

    #[test]
    fn big_primality() {
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert_eq!(primality(&m127), Primality::ProbablePrime);
        let composite = &m127 * BigUint::from(3u32);
        assert_eq!(primality(&composite), Primality::Composite);
        assert_eq!(primality(&BigUint::from(9841u32)), Primality::Composite);
        assert_eq!(primality(&BigUint::from(757u32)), Primality::Prime);
    }

    #[test]
    fn prime_power_parsing() {
        assert_eq!(PrimePower::new(9).unwrap(), PrimePower { p: 3, m: 2, q: 9 });
        assert_eq!(PrimePower::new(3u64.pow(13)).unwrap().m, 13);
        assert_eq!(PrimePower::new(4), Err(Error::EvenCharacteristic(4)));
        assert!(PrimePower::new(15).is_err());
        assert!(PrimePower::new(1).is_err());
        assert!(PrimePower::new(6).is_err());
    }

    #[test]
    fn prime_power_ranges() {
        let qs: Vec<u64> = enumerate_prime_powers(11, 30).iter().map(|p| p.q).collect();
        assert_eq!(qs, vec![11, 13, 17, 19, 23, 25, 27, 29]);
        assert_eq!(enumerate_prime_powers(9, 9), vec![PrimePower { p: 3, m: 2, q: 9 }]);
        assert!(enumerate_prime_powers(14, 16).is_empty());
    }

    #[test]
    fn forms() {
        assert_eq!(primes_of_form(5, 1, 3).primes, vec![11, 31, 41]);
        assert_eq!(primes_of_form(7, 1, 2).primes, vec![29, 43]);
        assert_eq!(special_primes(Some(5), 5, 1, 3).primes, vec![5, 11, 31]);
    }
}
