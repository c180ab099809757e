//! Exhaustive ground truth on small fields: membership tables for prescribed
//! traces, the definitional counter `N`, and a numerical check of the
//! character-sum indicator functions.

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gfpoly::linalg::Matrix;
use crate::gfpoly::{divisor_from_exponents, divisors_of_degree, exponents_of, BaseField, Fq, Poly};
use crate::numthy::arith::{divisors, euler_phi, moebius};
use crate::tower::{Element, FieldTower};
use crate::{Error, Result};

/// Discrete logarithms to a fixed primitive element.
pub struct LogTable {
    /// `exp[i]` is the code of `gamma^i`.
    pub exp: Vec<u32>,
    /// `log[code]`; entry 0 is unused.
    pub log: Vec<u32>,
}

impl LogTable {
    pub fn new(tower: &FieldTower) -> Result<Self> {
        let size = tower.size();
        if size > u32::MAX as u64 {
            return Err(Error::CeilingExceeded {
                size: size.to_string(),
                ceiling: u32::MAX as u64,
            });
        }
        let order = (size - 1) as usize;
        let mut exp = vec![0u32; order];
        let mut log = vec![0u32; size as usize];
        let step: Box<dyn Fn(&Element) -> Element> = match tower.primitive_linear() {
            Some(c) => Box::new(move |a| tower.mul_x_plus_c(a, c)),
            None => {
                let g = tower.primitive_element();
                Box::new(move |a| tower.mul(a, &g))
            }
        };
        let mut cur = tower.one();
        for (i, slot) in exp.iter_mut().enumerate() {
            let code = tower.code(&cur) as u32;
            *slot = code;
            log[code as usize] = i as u32;
            cur = step(&cur);
        }
        assert!(cur == tower.one(), "generator must have full order");
        Ok(LogTable { exp, log })
    }

    pub fn order(&self) -> u64 {
        self.exp.len() as u64
    }
}

/// One cell of a [`GammaReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaEntry {
    pub a: Fq,
    pub b: Fq,
    pub count: u64,
    pub witness: Option<String>,
}

/// `(Tr(alpha), Tr(alpha^2))` table over the r-primitive k-normal elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaReport {
    pub q: u64,
    pub n: usize,
    pub modulus: String,
    pub r: u64,
    pub k: usize,
    pub entries: Vec<GammaEntry>,
    pub candidates: u64,
}

impl GammaReport {
    pub fn field(&self) -> BaseField {
        BaseField::from_q(self.q).expect("validated when built")
    }

    pub fn entry(&self, a: Fq, b: Fq) -> &GammaEntry {
        self.entries
            .iter()
            .find(|e| e.a == a && e.b == b)
            .expect("table covers F_q x F_q")
    }

    pub fn full_coverage(&self) -> bool {
        self.entries.iter().all(|e| e.count > 0)
    }

    /// Coverage of the `a = 0` or `a != 0` part of the table.
    pub fn class_coverage(&self, zero: bool) -> bool {
        self.entries
            .iter()
            .filter(|e| (e.a == 0) == zero)
            .all(|e| e.count > 0)
    }

    /// Re-checks every witness from its text form.
    pub fn validate(&self, tower: &FieldTower) -> Result<()> {
        for e in &self.entries {
            let Some(w) = &e.witness else { continue };
            let alpha = tower.parse(w)?;
            if !tower.is_r_primitive_k_normal(&alpha, self.r, self.k)?
                || tower.trace(&alpha) != e.a
                || tower.trace_sq(&alpha) != e.b
            {
                return Err(Error::Invalid(format!("witness {w} fails for ({}, {})", e.a, e.b)));
            }
        }
        Ok(())
    }
}

fn code_of(coords: &[Fq], q: u64) -> usize {
    coords.iter().rev().fold(0u64, |acc, &c| acc * q + c) as usize
}

/// All elements of the kernel of `m`, in lexicographic order of coefficients.
fn for_each_in_span(basis: &[Vec<Fq>], field: &BaseField, mut visit: impl FnMut(&[Fq])) {
    let n = basis.first().map_or(0, |v| v.len());
    let multiples: Vec<Vec<Vec<Fq>>> = basis
        .iter()
        .map(|v| field.elements().map(|c| v.iter().map(|&x| field.mul(x, c)).collect()).collect())
        .collect();
    let q = field.q() as usize;
    let dim = basis.len();
    let mut digits = vec![0usize; dim];
    let mut partial = vec![vec![0 as Fq; n]; dim + 1];
    loop {
        visit(&partial[dim]);
        // mixed-radix increment, rebuilding partial sums from the changed digit
        let mut i = dim;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < q {
                break;
            }
            digits[i] = 0;
        }
        for j in i..dim {
            let (head, tail) = partial.split_at_mut(j + 1);
            let add = &multiples[j][digits[j]];
            for ((t, &h), &a) in tail[0].iter_mut().zip(&head[j]).zip(add) {
                *t = field.add(h, a);
            }
        }
    }
}

struct Tally {
    counts: Vec<u64>,
    witness: Vec<Option<Vec<Fq>>>,
    candidates: u64,
}

/// Exhaustive `(a, b)` table for r-primitive k-normal elements of `tower`.
///
/// k-normal elements are enumerated as the elements of exact `F_q`-order `h` for
/// each degree-`(n - k)` divisor `h`; orders come from a discrete-log table.
pub fn brute_gamma(tower: &FieldTower, r: u64, k: usize) -> Result<GammaReport> {
    let size = tower.size();
    let order = size - 1;
    if r == 0 || !order.is_multiple_of(r) {
        return Err(Error::NotDivisor(r.to_string()));
    }
    if k > tower.n() {
        return Err(Error::Invalid(format!("k = {k} exceeds n = {}", tower.n())));
    }
    let f = tower.base();
    let q = f.q();
    let n = tower.n();
    let table = LogTable::new(tower)?;
    let xn = tower.xn_factors();
    let hs = divisors_of_degree(xn, n - k, f);
    let qq = (q * q) as usize;
    let tallies: Vec<Tally> = hs
        .par_iter()
        .map(|h| {
            let mut tally = Tally {
                counts: vec![0; qq],
                witness: vec![None; qq],
                candidates: 0,
            };
            let kernel = tower.action_matrix(&h.poly).kernel(f);
            let lower: Vec<Matrix> = h
                .exponents
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, _)| {
                    let mut exps = h.exponents.clone();
                    exps[i] -= 1;
                    tower.action_matrix(&divisor_from_exponents(xn, exps, f).poly)
                })
                .collect();
            for_each_in_span(&kernel, f, |v| {
                if v.iter().all(|&c| c == 0) {
                    return;
                }
                if lower.iter().any(|m| m.mul_vec(v, f).iter().all(|&c| c == 0)) {
                    return;
                }
                tally.candidates += 1;
                let lg = table.log[code_of(v, q)] as u64;
                if lg.gcd(&order) != r {
                    return;
                }
                let alpha = Element(v.to_vec());
                let a = tower.trace(&alpha);
                let b = tower.trace_sq(&alpha);
                let cell = (a * q + b) as usize;
                tally.counts[cell] += 1;
                if tally.witness[cell].is_none() {
                    tally.witness[cell] = Some(v.to_vec());
                }
            });
            tally
        })
        .collect();
    let mut entries = Vec::with_capacity(qq);
    for a in 0..q {
        for b in 0..q {
            let cell = (a * q + b) as usize;
            let count = tallies.iter().map(|t| t.counts[cell]).sum();
            let witness = tallies
                .iter()
                .find_map(|t| t.witness[cell].clone())
                .map(|v| tower.format(&Element(v)));
            entries.push(GammaEntry { a, b, count, witness });
        }
    }
    let report = GammaReport {
        q,
        n,
        modulus: tower.ext_poly().to_text(f),
        r,
        k,
        entries,
        candidates: tallies.iter().map(|t| t.candidates).sum(),
    };
    report.validate(tower)?;
    Ok(report)
}

/// `N_{r,k,a,b}(l, f)`: nonzero `gamma` that are `l`-free with `gamma^r = g ∘ beta`
/// for some `f`-free `beta`, and `Tr(gamma^r) = a`, `Tr(gamma^{2r}) = b`.
#[allow(clippy::too_many_arguments)]
pub fn count_n(
    tower: &FieldTower,
    table: &LogTable,
    r: u64,
    g: &Poly,
    l: u64,
    fpoly: &Poly,
    a: Fq,
    b: Fq,
) -> Result<u64> {
    let f = tower.base();
    let order = tower.size() - 1;
    if l == 0 || !order.is_multiple_of(l) {
        return Err(Error::NotDivisor(l.to_string()));
    }
    if r == 0 || !order.is_multiple_of(r) {
        return Err(Error::NotDivisor(r.to_string()));
    }
    let xn = tower.xn_factors();
    exponents_of(xn, g, f).ok_or_else(|| Error::NotPolyDivisor(g.to_text(f)))?;
    let f_exps = exponents_of(xn, &fpoly.monic(f), f).ok_or_else(|| Error::NotPolyDivisor(fpoly.to_text(f)))?;
    let xn_poly = Poly::xn_minus_1(f, tower.n());
    let f_tests: Vec<Matrix> = xn
        .factors
        .iter()
        .zip(&f_exps)
        .filter(|(_, &e)| e > 0)
        .map(|((phi, _), _)| tower.action_matrix(&xn_poly.exact_div(phi, f).expect("factor divides")))
        .collect();
    let mg = tower.action_matrix(g);
    let kernel = mg.kernel(f);
    let mut count = 0;
    for (lg, _) in table.exp.iter().enumerate() {
        let lg = lg as u64;
        if l.gcd(&lg.gcd(&order)) != 1 {
            continue;
        }
        let alpha_code = table.exp[((lg as u128 * r as u128) % order as u128) as usize] as u64;
        let alpha = tower.from_code(alpha_code);
        if tower.trace(&alpha) != a || tower.trace_sq(&alpha) != b {
            continue;
        }
        let Some(beta0) = mg.solve(alpha.coords(), f) else {
            continue;
        };
        let mut found = false;
        let shifts = if kernel.is_empty() { vec![] } else { kernel.clone() };
        let mut check = |delta: &[Fq]| {
            if found {
                return;
            }
            let beta: Vec<Fq> = beta0.iter().zip(delta).map(|(&x, &d)| f.add(x, d)).collect();
            if f_tests.iter().all(|m| m.mul_vec(&beta, f).iter().any(|&c| c != 0)) {
                found = true;
            }
        };
        if shifts.is_empty() {
            check(&vec![0; tower.n()]);
        } else {
            for_each_in_span(&shifts, f, &mut check);
        }
        if found {
            count += 1;
        }
    }
    Ok(count)
}

/// Number of preimages of `alpha` under `beta -> g ∘ beta`.
pub fn preimage_count(tower: &FieldTower, g: &Poly, alpha: &Element) -> u64 {
    let f = tower.base();
    let m = tower.action_matrix(g);
    match m.solve(alpha.coords(), f) {
        Some(_) => f.q().pow(m.kernel(f).len() as u32),
        None => 0,
    }
}

/// Largest `q^n` accepted by [`char_sum_validate`].
pub const CHAR_SUM_LIMIT: u64 = 4096;

fn abs_trace_base(f: &BaseField, c: Fq) -> u64 {
    let p = f.p();
    let mut acc = 0;
    let mut x = c;
    for _ in 0..f.m() {
        acc = f.add(acc, x);
        x = f.pow(x, p);
    }
    acc % p
}

fn root_of_unity(num: u64, den: u64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (num % den) as f64 / den as f64)
}

/// Largest deviation between the character-sum forms of `rho_e`, `kappa_h`,
/// `tau_b` and `I_0` and their combinatorial indicators, over `samples` elements.
pub fn char_sum_validate(tower: &FieldTower, e: u64, h: &Poly, samples: usize) -> Result<f64> {
    let size = tower.size();
    if size > CHAR_SUM_LIMIT {
        return Err(Error::CeilingExceeded {
            size: size.to_string(),
            ceiling: CHAR_SUM_LIMIT,
        });
    }
    let f = tower.base();
    let q = f.q();
    let p = f.p();
    let order = size - 1;
    if e == 0 || !order.is_multiple_of(e) {
        return Err(Error::NotDivisor(e.to_string()));
    }
    let xn = tower.xn_factors();
    let h = h.monic(f);
    let h_exps = exponents_of(xn, &h, f).ok_or_else(|| Error::NotPolyDivisor(h.to_text(f)))?;
    let table = LogTable::new(tower)?;
    let psi0 = |beta: &Element| root_of_unity(abs_trace_base(f, tower.trace(beta)), p);

    // additive characters psi_delta grouped by their F_q-order (exponent vector)
    let xn_poly = Poly::xn_minus_1(f, tower.n());
    let functional = |delta: &Element| -> Vec<Fq> {
        (0..tower.n())
            .map(|j| {
                let mut basis = tower.zero();
                basis.0[j] = 1;
                tower.trace(&tower.mul(delta, &basis))
            })
            .collect()
    };
    let annihilates = |w: &[Fq], g: &Poly| -> bool {
        let m = tower.action_matrix(g);
        (0..tower.n()).all(|j| {
            (0..tower.n()).fold(0, |acc, i| f.add(acc, f.mul(w[i], m.get(i, j)))) == 0
        })
    };
    let char_order = |delta: &Element| -> Vec<u32> {
        let w = functional(delta);
        let mut exps: Vec<u32> = xn.factors.iter().map(|(_, m)| *m).collect();
        let mut g = xn_poly.clone();
        for (i, (phi, _)) in xn.factors.iter().enumerate() {
            while exps[i] > 0 {
                let cand = g.exact_div(phi, f).expect("factor divides");
                if annihilates(&w, &cand) {
                    g = cand;
                    exps[i] -= 1;
                } else {
                    break;
                }
            }
        }
        exps
    };
    // weight mu'(g)/Phi(g) for characters of square-free order g | h
    let kappa_chars: Vec<(Element, f64)> = tower
        .elements()
        .filter_map(|delta| {
            let exps = char_order(&delta);
            if exps.iter().zip(&h_exps).any(|(&o, &he)| o > 1 || (o == 1 && he == 0)) {
                return None;
            }
            let mut sign = 1.0;
            let mut phi = 1.0;
            for (i, &o) in exps.iter().enumerate() {
                if o == 1 {
                    sign = -sign;
                    phi *= (q as f64).powi(xn.factors[i].0.deg() as i32) - 1.0;
                }
            }
            Some((delta, sign / phi))
        })
        .collect();
    let phi_h: f64 = h_exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            let qd = (q as f64).powi(xn.factors[i].0.deg() as i32);
            qd.powi(e as i32 - 1) * (qd - 1.0)
        })
        .product();
    let kappa_scale = phi_h / (q as f64).powi(h.deg() as i32);

    let step = (size as usize / samples.max(1)).max(1);
    let mut worst: f64 = 0.0;
    let b_target = 1 % q;
    for code in (0..size).step_by(step) {
        let alpha = tower.from_code(code);
        // I_0
        let i0: Complex64 = tower.elements().map(|d| psi0(&tower.mul(&d, &alpha))).sum::<Complex64>() / size as f64;
        let i0_true = if alpha.is_zero() { 1.0 } else { 0.0 };
        worst = worst.max((i0 - i0_true).norm());
        // tau_b on Tr(alpha)
        let tr = tower.trace(&alpha);
        let tau: Complex64 = f
            .elements()
            .map(|c| root_of_unity(abs_trace_base(f, f.mul(c, f.sub(tr, b_target))), p))
            .sum::<Complex64>()
            / q as f64;
        let tau_true = if tr == b_target { 1.0 } else { 0.0 };
        worst = worst.max((tau - tau_true).norm());
        // kappa_h
        let kappa: Complex64 = kappa_chars
            .iter()
            .map(|(d, w)| psi0(&tower.mul(d, &alpha)) * *w)
            .sum::<Complex64>()
            * kappa_scale;
        let kappa_true = if tower.is_h_free(&alpha, &h)? { 1.0 } else { 0.0 };
        worst = worst.max((kappa - kappa_true).norm());
        // rho_e
        if !alpha.is_zero() {
            let lg = table.log[code as usize] as u64;
            let mut sum = Complex64::new(0.0, 0.0);
            for d in divisors(e) {
                let mu = moebius(d);
                if mu == 0 {
                    continue;
                }
                let inner: Complex64 = (1..=d)
                    .filter(|u| u.gcd(&d) == 1)
                    .map(|u| root_of_unity((u * (order / d)) % order * lg % order, order))
                    .sum();
                sum += inner * (mu as f64 / euler_phi(d) as f64);
            }
            let rho = sum * (euler_phi(e) as f64 / e as f64);
            let rho_true = if tower.is_e_free(&alpha, e)? { 1.0 } else { 0.0 };
            worst = worst.max((rho - rho_true).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_normal_f81() {
        let t = FieldTower::new(3, 4).unwrap();
        let rep = brute_gamma(&t, 1, 0).unwrap();
        assert!(rep.entries.iter().any(|e| e.a != 0 && e.count > 0));
        assert!(rep.entries.iter().filter(|e| e.a == 0).all(|e| e.count == 0));
        let total: u64 = rep.entries.iter().map(|e| e.count).sum();
        // primitive normal elements of F_81 come in Frobenius orbits of size 4
        assert_eq!(total % 4, 0);
    }

    #[test]
    fn degenerate_r() {
        let t = FieldTower::new(3, 4).unwrap();
        let rep = brute_gamma(&t, 80, 0).unwrap();
        assert!(rep.entries.iter().all(|e| e.count == 0));
        let rep = brute_gamma(&t, 80, 3).unwrap();
        assert_eq!(rep.entries.iter().map(|e| e.count).sum::<u64>(), 1);
    }

    #[test]
    fn log_table_round_trip() {
        let t = FieldTower::new(5, 3).unwrap();
        let lt = LogTable::new(&t).unwrap();
        for (i, &c) in lt.exp.iter().enumerate() {
            assert_eq!(lt.log[c as usize] as usize, i);
        }
    }

    #[test]
    fn char_sums_f9() {
        let t = FieldTower::new(3, 2).unwrap();
        let f = t.base().clone();
        let h = Poly::xn_minus_1(&f, 2);
        assert!(char_sum_validate(&t, 8, &h, 9).unwrap() < 1e-9);
        assert!(char_sum_validate(&t, 1, &Poly::one(), 9).unwrap() < 1e-9);
    }

    #[test]
    fn count_n_histogram() {
        let t = FieldTower::new(3, 3).unwrap();
        let f = t.base().clone();
        let lt = LogTable::new(&t).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let direct = (1..27)
                    .map(|c| t.from_code(c))
                    .filter(|x| t.trace(x) == a && t.trace_sq(x) == b)
                    .count() as u64;
                let n = count_n(&t, &lt, 1, &Poly::one(), 1, &Poly::one(), a, b).unwrap();
                assert_eq!(n, direct);
            }
        }
        let _ = f;
    }
}
