use std::collections::HashMap;

use super::factor::equal_degree;
use super::{BaseField, Poly, PolyFactorization};
use crate::numthy::arith::{divisors, euler_phi, mult_order_mod, valuation};
use crate::numthy::PrimePower;

/// Orbits of `a -> q a` on `Z/n'Z` where `n = n' p^v`, `p` not dividing `n'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetPartition {
    pub n_prime: u64,
    /// `p^v`: every factor of `x^n - 1` appears with this multiplicity.
    pub multiplicity: u64,
    /// Sorted by least element; each orbit listed from its least element.
    pub orbits: Vec<Vec<u64>>,
}

pub fn cyclotomic_cosets(pp: PrimePower, n: u64) -> CosetPartition {
    assert!(n >= 1);
    let v = valuation(n, pp.p);
    let multiplicity = pp.p.pow(v);
    let n_prime = n / multiplicity;
    let mut seen = vec![false; n_prime as usize];
    let mut orbits = Vec::new();
    let q = pp.q % n_prime.max(1);
    for start in 0..n_prime {
        if seen[start as usize] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut a = start;
        while !seen[a as usize] {
            seen[a as usize] = true;
            orbit.push(a);
            a = (a as u128 * q as u128 % n_prime as u128) as u64;
        }
        orbits.push(orbit);
    }
    CosetPartition {
        n_prime,
        multiplicity,
        orbits,
    }
}

/// `Phi_d(x)` reduced into `F_q` (coefficients in the prime subfield).
pub fn cyclotomic_poly(d: u64, f: &BaseField) -> Poly {
    let mut memo = HashMap::new();
    cyclotomic_memo(d, f, &mut memo)
}

fn cyclotomic_memo(d: u64, f: &BaseField, memo: &mut HashMap<u64, Poly>) -> Poly {
    if let Some(p) = memo.get(&d) {
        return p.clone();
    }
    let mut g = Poly::xn_minus_1(f, d as usize);
    for e in divisors(d) {
        if e < d {
            let phi = cyclotomic_memo(e, f, memo);
            g = g.exact_div(&phi, f).expect("cyclotomic factor divides");
        }
    }
    memo.insert(d, g.clone());
    g
}

/// Complete factorization of `x^n - 1` over `F_q`, derived from the cyclotomic
/// factors `Phi_d` (`d | n'`), each split into `phi(d)/ord_d(q)` pieces.
pub fn factor_xn_minus_1(f: &BaseField, n: u64) -> PolyFactorization {
    let pp = f.prime_power();
    let v = valuation(n, pp.p);
    let multiplicity = pp.p.pow(v) as u32;
    let n_prime = n / multiplicity as u64;
    let mut memo = HashMap::new();
    let mut factors = Vec::new();
    for d in divisors(n_prime) {
        let phi = cyclotomic_memo(d, f, &mut memo);
        let e = mult_order_mod(pp.q % d.max(1), d) as usize;
        let pieces = if e as u64 == euler_phi(d) {
            vec![phi]
        } else {
            equal_degree(&phi, e, f)
        };
        factors.extend(pieces.into_iter().map(|h| (h, multiplicity)));
    }
    factors.sort();
    PolyFactorization { lead: 1, factors }
}

/// A monic divisor of `x^n - 1` described by exponents on its irreducible factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divisor {
    pub exponents: Vec<u32>,
    pub poly: Poly,
    pub has_x_minus_1: bool,
}

impl Divisor {
    pub fn degree(&self) -> usize {
        self.poly.deg()
    }
}

/// Builds the divisor with the given exponents over `fact`.
pub fn divisor_from_exponents(fact: &PolyFactorization, exponents: Vec<u32>, f: &BaseField) -> Divisor {
    let x_minus_1 = Poly::linear(f, 1);
    let mut poly = Poly::one();
    let mut has_x_minus_1 = false;
    for ((h, _), &e) in fact.factors.iter().zip(&exponents) {
        if e > 0 {
            poly = poly.mul(&h.pow(e, f), f);
            if *h == x_minus_1 {
                has_x_minus_1 = true;
            }
        }
    }
    Divisor {
        exponents,
        poly,
        has_x_minus_1,
    }
}

/// Exponents of `g` on the factors of `fact`, or `None` if `g` is not a monic divisor.
pub fn exponents_of(fact: &PolyFactorization, g: &Poly, f: &BaseField) -> Option<Vec<u32>> {
    if g.is_zero() || !g.is_monic() {
        return None;
    }
    let mut rest = g.clone();
    let mut exps = Vec::with_capacity(fact.factors.len());
    for (h, mult) in &fact.factors {
        let mut e = 0;
        while e < *mult {
            match rest.exact_div(h, f) {
                Some(next) => {
                    rest = next;
                    e += 1;
                }
                None => break,
            }
        }
        exps.push(e);
    }
    rest.is_one().then_some(exps)
}

/// All monic degree-`k` divisors of the factored polynomial, in canonical order.
pub fn divisors_of_degree(fact: &PolyFactorization, k: usize, f: &BaseField) -> Vec<Divisor> {
    let degs: Vec<usize> = fact.factors.iter().map(|(h, _)| h.deg()).collect();
    let mults: Vec<u32> = fact.factors.iter().map(|(_, e)| *e).collect();
    let mut out = Vec::new();
    let mut current = vec![0u32; degs.len()];
    fn walk(
        i: usize,
        left: usize,
        degs: &[usize],
        mults: &[u32],
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if left == 0 {
            out.push(current.clone());
            return;
        }
        if i == degs.len() {
            return;
        }
        for e in (0..=mults[i]).take_while(|&e| e as usize * degs[i] <= left) {
            current[i] = e;
            walk(i + 1, left - e as usize * degs[i], degs, mults, current, out);
        }
        current[i] = 0;
    }
    let mut exps = Vec::new();
    walk(0, k, &degs, &mults, &mut current, &mut exps);
    out.extend(exps.into_iter().map(|e| divisor_from_exponents(fact, e, f)));
    out.sort_by(|a, b| a.poly.cmp(&b.poly));
    out
}

/// Monic degree-`k` divisors of `x^n - 1` over `F_q`, each flagged for `(x - 1) | g`.
pub fn degree_k_divisors(f: &BaseField, n: u64, k: usize) -> Vec<Divisor> {
    divisors_of_degree(&factor_xn_minus_1(f, n), k, f)
}
