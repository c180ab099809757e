use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{BaseField, Fq, Poly};
use crate::numthy::arith::factor_u64;

/// Monic irreducible factors with multiplicities, plus the leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFactorization {
    pub lead: Fq,
    /// Sorted in canonical order, distinct.
    pub factors: Vec<(Poly, u32)>,
}

impl PolyFactorization {
    pub fn distinct_count(&self) -> u32 {
        self.factors.len() as u32
    }

    /// `W = 2^(number of distinct factors)`.
    pub fn w(&self) -> BigUint {
        BigUint::one() << self.distinct_count()
    }

    pub fn radical(&self, f: &BaseField) -> Poly {
        self.factors
            .iter()
            .fold(Poly::one(), |acc, (g, _)| acc.mul(g, f))
    }

    pub fn product(&self, f: &BaseField) -> Poly {
        self.factors
            .iter()
            .fold(Poly::constant(self.lead), |acc, (g, e)| acc.mul(&g.pow(*e, f), f))
    }

    /// `|(F_q[x]/(g))^*|` for the monic part `g`.
    pub fn phi_q(&self, q: u64) -> BigUint {
        let q = BigUint::from(q);
        self.factors.iter().fold(BigUint::one(), |acc, (g, e)| {
            let d = g.deg() as u32;
            acc * q.pow(d * (e - 1)) * (q.pow(d) - 1u32)
        })
    }

    pub fn index_of(&self, g: &Poly) -> Option<usize> {
        self.factors.iter().position(|(h, _)| h == g)
    }
}

/// Rabin's test.
pub fn is_irreducible(g: &Poly, f: &BaseField) -> bool {
    let Some(n) = g.degree() else { return false };
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let g = g.monic(f);
    let q = f.q();
    let x = Poly::x();
    let mut frob = vec![x.clone()];
    let mut h = x.clone();
    for _ in 0..n {
        h = h.pow_mod_u64(q, &g, f);
        frob.push(h.clone());
    }
    if frob[n] != x {
        return false;
    }
    factor_u64(n as u64).into_iter().all(|(l, _)| {
        let h = &frob[n / l as usize];
        h.sub(&x, f).gcd(&g, f).is_one()
    })
}

/// Least monic irreducible polynomial of the given degree, ordering lower
/// coefficients by the code `sum c_i q^i` (top coefficient most significant).
pub fn least_irreducible(f: &BaseField, degree: usize) -> Poly {
    assert!(degree >= 1);
    let q = f.q();
    let mut code: u64 = 0;
    loop {
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut c = code;
        for _ in 0..degree {
            coeffs.push(c % q);
            c /= q;
        }
        coeffs.push(1);
        let g = Poly::from_coeffs(coeffs);
        if (degree == 1 || g.coeff(0) != 0) && is_irreducible(&g, f) {
            return g;
        }
        code += 1;
    }
}

fn pth_root(g: &Poly, f: &BaseField) -> Poly {
    let p = f.p() as usize;
    let root_exp = f.q() / f.p();
    Poly::from_coeffs(
        g.coeffs()
            .iter()
            .step_by(p)
            .map(|&c| f.pow(c, root_exp))
            .collect(),
    )
}

/// Square-free decomposition of a monic polynomial: `(s_i, i)` with `g = prod s_i^i`.
pub fn squarefree(g: &Poly, f: &BaseField) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    if g.deg() == 0 {
        return out;
    }
    let d = g.derivative(f);
    if d.is_zero() {
        let p = f.p() as u32;
        return squarefree(&pth_root(g, f), f)
            .into_iter()
            .map(|(s, i)| (s, i * p))
            .collect();
    }
    let mut c = g.gcd(&d, f);
    let mut w = g.exact_div(&c, f).expect("gcd divides");
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c, f);
        let z = w.exact_div(&y, f).expect("gcd divides");
        if !z.is_one() {
            out.push((z, i));
        }
        i += 1;
        c = c.exact_div(&y, f).expect("gcd divides");
        w = y;
    }
    if !c.is_one() {
        let p = f.p() as u32;
        out.extend(
            squarefree(&pth_root(&c, f), f)
                .into_iter()
                .map(|(s, i)| (s, i * p)),
        );
    }
    out
}

/// Splits a square-free monic polynomial into products of equal-degree factors.
pub fn distinct_degree(g: &Poly, f: &BaseField) -> Vec<(Poly, usize)> {
    let mut out = Vec::new();
    let mut rest = g.clone();
    let x = Poly::x();
    let mut h = x.clone();
    let mut d = 0;
    while rest.deg() >= 2 * (d + 1) {
        d += 1;
        h = h.pow_mod_u64(f.q(), &rest, f);
        let part = h.sub(&x, f).gcd(&rest, f);
        if !part.is_one() {
            rest = rest.exact_div(&part, f).expect("gcd divides");
            h = h.rem(&rest, f);
            out.push((part, d));
        }
    }
    if rest.deg() > 0 {
        let d = rest.deg();
        out.push((rest, d));
    }
    out
}

/// Cantor-Zassenhaus splitting of a square-free product of degree-`d` irreducibles (odd q).
pub fn equal_degree(g: &Poly, d: usize, f: &BaseField) -> Vec<Poly> {
    let mut rng = ChaCha20Rng::seed_from_u64(0x0065_6466_u64 ^ g.deg() as u64);
    let exp = (BigUint::from(f.q()).pow(d as u32) - 1u32) >> 1;
    let mut pending = vec![g.monic(f)];
    let mut out = Vec::new();
    while let Some(h) = pending.pop() {
        if h.deg() == d {
            out.push(h);
            continue;
        }
        loop {
            let a = Poly::from_coeffs((0..h.deg()).map(|_| rng.gen_range(0..f.q())).collect());
            if a.deg() == 0 {
                continue;
            }
            let mut split = a.gcd(&h, f);
            if split.is_one() {
                split = a.pow_mod(&exp, &h, f).sub(&Poly::one(), f).gcd(&h, f);
            }
            if !split.is_one() && split.deg() < h.deg() {
                let other = h.exact_div(&split, f).expect("gcd divides");
                pending.push(split);
                pending.push(other);
                break;
            }
        }
    }
    out
}

/// Complete factorization over `F_q`.
pub fn factor(g: &Poly, f: &BaseField) -> PolyFactorization {
    assert!(!g.is_zero(), "cannot factor the zero polynomial");
    let lead = g.lead();
    let monic = g.monic(f);
    let mut factors = Vec::new();
    for (s, mult) in squarefree(&monic, f) {
        for (part, d) in distinct_degree(&s, f) {
            for h in equal_degree(&part, d, f) {
                factors.push((h, mult));
            }
        }
    }
    factors.sort();
    let mut merged: Vec<(Poly, u32)> = Vec::new();
    for (h, e) in factors {
        match merged.last_mut() {
            Some((last, m)) if *last == h => *m += e,
            _ => merged.push((h, e)),
        }
    }
    PolyFactorization {
        lead,
        factors: merged,
    }
}

/// `Phi_q(g)` for monic nonzero `g`.
pub fn phi_q(g: &Poly, f: &BaseField) -> BigUint {
    factor(g, f).phi_q(f.q())
}
