use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::arith::{divisors, moebius, mul_mod};
use super::prime::{prime_table, primality, Primality};

/// Effort limits for [`factor_bounded`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    pub trial_bound: u64,
    /// Cap on rho iterations per composite cofactor; 0 disables rho.
    pub rho_iterations: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            trial_bound: 1_000_000,
            rho_iterations: 100_000_000,
        }
    }
}

impl Budget {
    pub fn trial_only(self) -> Self {
        Budget {
            rho_iterations: 0,
            ..self
        }
    }

    /// True when `self` spends at least as much effort as `other` on every axis.
    pub fn covers(&self, other: &Budget) -> bool {
        self.trial_bound >= other.trial_bound && self.rho_iterations >= other.rho_iterations
    }
}

/// Known prime factors plus an unfactored cofactor free of primes `<= trial_bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialFactorization {
    pub target: BigUint,
    /// Ascending, distinct.
    pub primes: Vec<(BigUint, u32)>,
    pub cofactor: BigUint,
    pub trial_bound: u64,
    pub rho_iterations: u64,
    /// False when some listed prime is only a probable prime.
    pub proof_grade: bool,
}

impl PartialFactorization {
    pub fn one() -> Self {
        PartialFactorization {
            target: BigUint::one(),
            primes: Vec::new(),
            cofactor: BigUint::one(),
            trial_bound: Budget::default().trial_bound,
            rho_iterations: 0,
            proof_grade: true,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.cofactor.is_one()
    }

    pub fn budget(&self) -> Budget {
        Budget {
            trial_bound: self.trial_bound,
            rho_iterations: self.rho_iterations,
        }
    }

    pub fn omega_known(&self) -> u32 {
        self.primes.len() as u32
    }

    pub fn omega_lower(&self) -> u32 {
        self.omega_known() + u32::from(!self.is_complete())
    }

    /// Largest number of further primes the cofactor may hold.
    pub fn cofactor_prime_bound(&self) -> u32 {
        if self.is_complete() {
            return 0;
        }
        let b = BigUint::from(self.trial_bound.max(2));
        let mut u = 0u32;
        let mut acc = b.clone();
        while acc <= self.cofactor {
            u += 1;
            acc *= &b;
        }
        u
    }

    pub fn omega_upper(&self) -> u32 {
        self.omega_known() + self.cofactor_prime_bound()
    }

    /// Product of known prime powers times the cofactor.
    pub fn product(&self) -> BigUint {
        self.primes
            .iter()
            .fold(self.cofactor.clone(), |acc, (p, e)| acc * p.pow(*e))
    }

    pub fn prime_list(&self) -> impl Iterator<Item = &BigUint> {
        self.primes.iter().map(|(p, _)| p)
    }

    fn from_parts(
        target: BigUint,
        found: BTreeMap<BigUint, u32>,
        cofactor: BigUint,
        budget: Budget,
        proof_grade: bool,
    ) -> Self {
        PartialFactorization {
            target,
            primes: found.into_iter().collect(),
            cofactor,
            trial_bound: budget.trial_bound,
            rho_iterations: budget.rho_iterations,
            proof_grade,
        }
    }

    /// Factorization of a product of pairwise-coprime-outside-known-primes parts.
    pub fn merge(parts: &[PartialFactorization]) -> PartialFactorization {
        let mut found: BTreeMap<BigUint, u32> = BTreeMap::new();
        let mut target = BigUint::one();
        let mut cofactor = BigUint::one();
        let mut trial_bound = u64::MAX;
        let mut rho = u64::MAX;
        let mut proof_grade = true;
        for part in parts {
            target *= &part.target;
            cofactor *= &part.cofactor;
            for (p, e) in &part.primes {
                *found.entry(p.clone()).or_default() += e;
            }
            trial_bound = trial_bound.min(part.trial_bound);
            rho = rho.min(part.rho_iterations);
            proof_grade &= part.proof_grade;
        }
        if parts.is_empty() {
            return PartialFactorization::one();
        }
        PartialFactorization::from_parts(
            target,
            found,
            cofactor,
            Budget {
                trial_bound,
                rho_iterations: rho,
            },
            proof_grade,
        )
    }
}

/// `(2^omega_lower, 2^omega_upper)`.
pub fn w_int(f: &PartialFactorization) -> (BigUint, BigUint) {
    (
        BigUint::one() << f.omega_lower(),
        BigUint::one() << f.omega_upper(),
    )
}

/// Bounded factorization; never fails, incompleteness lands in the cofactor.
pub fn factor_bounded(n: &BigUint, budget: Budget) -> PartialFactorization {
    factor_restricted(n, budget, None)
}

/// As [`factor_bounded`], but trial division only tries primes that can divide
/// `Phi_d(q)`: those dividing `d` or congruent to 1 mod `d`.
pub(crate) fn factor_restricted(n: &BigUint, budget: Budget, d: Option<u64>) -> PartialFactorization {
    assert!(!n.is_zero(), "cannot factor zero");
    let mut found: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut rest = n.clone();
    let bound = budget.trial_bound.max(2).min(u32::MAX as u64);
    let table = prime_table(bound);
    let mut exhausted = false;
    for &p in table.iter() {
        let p = p as u64;
        if p > bound {
            break;
        }
        if let Some(d) = d {
            if d % p != 0 && p % d != 1 && d > 1 {
                continue;
            }
        }
        if let Some(small) = rest.to_u64() {
            if p.saturating_mul(p) > small {
                exhausted = true;
                break;
            }
            if small % p == 0 {
                let mut small = small;
                let mut e = 0;
                while small % p == 0 {
                    small /= p;
                    e += 1;
                }
                found.insert(BigUint::from(p), e);
                rest = BigUint::from(small);
            }
        } else if (&rest % p).is_zero() {
            let bp = BigUint::from(p);
            let mut e = 0;
            while (&rest % p).is_zero() {
                rest /= &bp;
                e += 1;
            }
            found.insert(bp, e);
        }
    }
    let mut proof_grade = true;
    let mut cofactor = BigUint::one();
    if !rest.is_one() {
        let b = BigUint::from(bound);
        if exhausted || rest <= &b * &b {
            found.insert(rest, 1);
        } else {
            let mut stack = vec![rest];
            while let Some(m) = stack.pop() {
                match primality(&m) {
                    Primality::Prime => *found.entry(m).or_default() += 1,
                    Primality::ProbablePrime => {
                        proof_grade = false;
                        *found.entry(m).or_default() += 1;
                    }
                    Primality::Composite => match rho(&m, budget.rho_iterations) {
                        Some(div) => {
                            let other = &m / &div;
                            stack.push(div);
                            stack.push(other);
                        }
                        None => cofactor *= m,
                    },
                }
            }
            cofactor = normalize_cofactor(cofactor, &mut found);
        }
    }
    PartialFactorization::from_parts(n.clone(), found, cofactor, budget, proof_grade)
}

/// Pulls already-known primes out of a product of failed rho pieces.
fn normalize_cofactor(mut cofactor: BigUint, found: &mut BTreeMap<BigUint, u32>) -> BigUint {
    let primes: Vec<BigUint> = found.keys().cloned().collect();
    for p in primes {
        while (&cofactor % &p).is_zero() {
            cofactor /= &p;
            *found.get_mut(&p).unwrap() += 1;
        }
    }
    cofactor
}

fn rho(n: &BigUint, cap: u64) -> Option<BigUint> {
    if cap == 0 {
        return None;
    }
    if let Some(small) = n.to_u64() {
        return rho_u64(small, cap).map(BigUint::from);
    }
    rho_big(n, cap)
}

/// Brent's variant of Pollard rho on a composite machine integer.
pub(crate) fn rho_u64(n: u64, cap: u64) -> Option<u64> {
    if n.is_multiple_of(2) {
        return Some(2);
    }
    let mut spent = 0u64;
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut y = 2u64;
        let mut r = 1u64;
        let mut q = 1u64;
        let m = 128u64;
        let mut g = 1u64;
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
            spent += r;
            if spent > cap {
                return None;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
    }
    None
}

fn rho_big(n: &BigUint, cap: u64) -> Option<BigUint> {
    let mut spent = 0u64;
    for c in 1u32..64 {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1u64;
        let mut q = BigUint::one();
        let m = 128u64;
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    q = (q * diff(&x, &y)) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
            spent += r;
            if spent > cap {
                return None;
            }
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = diff(&x, &ys).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
    }
    None
}

/// `Phi_d(q)` for the d-th cyclotomic polynomial.
pub fn cyclotomic_value(q: u64, d: u64) -> BigUint {
    let qb = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for e in divisors(d) {
        let term = qb.pow(e as u32) - 1u32;
        match moebius(d / e) {
            1 => num *= term,
            -1 => den *= term,
            _ => {}
        }
    }
    num / den
}

/// Cache of factorizations keyed by the integer; implementations must be thread-safe.
pub trait FactorCache: Send + Sync {
    fn lookup(&self, n: &BigUint) -> Option<PartialFactorization>;
    fn store(&self, f: &PartialFactorization);
}

pub struct NoCache;

impl FactorCache for NoCache {
    fn lookup(&self, _: &BigUint) -> Option<PartialFactorization> {
        None
    }
    fn store(&self, _: &PartialFactorization) {}
}

/// `q^n - 1` split as `prod_{d | n} Phi_d(q)`, each piece factored separately.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclotomicFactorization {
    pub q: u64,
    pub n: u32,
    pub pieces: Vec<(u64, PartialFactorization)>,
    pub total: PartialFactorization,
}

pub fn factor_cyclotomic(q: u64, n: u32, budget: Budget) -> CyclotomicFactorization {
    factor_cyclotomic_cached(q, n, budget, &NoCache)
}

pub fn factor_cyclotomic_cached(
    q: u64,
    n: u32,
    budget: Budget,
    cache: &dyn FactorCache,
) -> CyclotomicFactorization {
    let pieces: Vec<(u64, PartialFactorization)> = divisors(n as u64)
        .into_iter()
        .map(|d| {
            let value = cyclotomic_value(q, d);
            let hit = cache
                .lookup(&value)
                .filter(|f| f.product() == value && (f.is_complete() || f.budget().covers(&budget)));
            let f = match hit {
                Some(f) => f,
                None => {
                    let f = factor_restricted(&value, budget, Some(d));
                    cache.store(&f);
                    f
                }
            };
            (d, f)
        })
        .collect();
    let parts: Vec<PartialFactorization> = pieces.iter().map(|(_, f)| f.clone()).collect();
    let total = PartialFactorization::merge(&parts);
    CyclotomicFactorization { q, n, pieces, total }
}
