//! The extension `F_{q^n}` over `F_q` and element-level diagnostics.

use num_integer::Integer;

use crate::gfpoly::linalg::Matrix;
use crate::gfpoly::{
    exponents_of, factor_xn_minus_1, least_irreducible, BaseField, Fq, Poly, PolyFactorization,
};
use crate::numthy::arith::factor_u64;
use crate::{Error, Result};

/// Default brute-force ceiling on `q^n`.
pub const DEFAULT_CEILING: u64 = 20_000_000;

/// Element of `F_{q^n}`: coordinates in the power basis `1, x, ..., x^{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(pub Vec<Fq>);

impl Element {
    pub fn coords(&self) -> &[Fq] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn to_poly(&self) -> Poly {
        Poly::from_coeffs(self.0.clone())
    }
}

/// Minimal polynomial of an element over `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalPolynomial {
    pub poly: Poly,
}

impl MinimalPolynomial {
    pub fn degree(&self) -> usize {
        self.poly.deg()
    }

    /// Coefficient of `x^{d-1}`.
    pub fn a1(&self) -> Fq {
        let d = self.degree();
        if d >= 1 {
            self.poly.coeff(d - 1)
        } else {
            0
        }
    }

    /// Coefficient of `x^{d-2}`.
    pub fn a2(&self) -> Fq {
        let d = self.degree();
        if d >= 2 {
            self.poly.coeff(d - 2)
        } else {
            0
        }
    }
}

/// `F_p ⊆ F_q ⊆ F_{q^n}` with `F_{q^n} = F_q[x]/(ext)`.
#[derive(Clone, Debug)]
pub struct FieldTower {
    base: BaseField,
    n: usize,
    ext: Poly,
    size: u64,
    order_factors: Vec<(u64, u32)>,
    xn: PolyFactorization,
    frob: Matrix,
    trace_coeffs: Vec<Fq>,
}

impl FieldTower {
    pub fn new(q: u64, n: usize) -> Result<Self> {
        Self::with_ceiling(q, n, DEFAULT_CEILING)
    }

    pub fn with_ceiling(q: u64, n: usize, ceiling: u64) -> Result<Self> {
        let base = BaseField::from_q(q)?;
        Self::over(base, n, ceiling)
    }

    pub fn over(base: BaseField, n: usize, ceiling: u64) -> Result<Self> {
        assert!(n >= 1);
        let q = base.q();
        let size = match q.checked_pow(n as u32) {
            Some(s) if s <= ceiling => s,
            _ => {
                let exact = num_bigint::BigUint::from(q).pow(n as u32);
                return Err(Error::CeilingExceeded {
                    size: exact.to_string(),
                    ceiling,
                });
            }
        };
        let ext = least_irreducible(&base, n);
        let order_factors = factor_u64(size - 1);
        let xn = factor_xn_minus_1(&base, n as u64);
        let mut tower = FieldTower {
            base,
            n,
            ext,
            size,
            order_factors,
            xn,
            frob: Matrix::identity(n),
            trace_coeffs: Vec::new(),
        };
        let xq = tower.pow(&tower.gen(), q);
        let mut cols = Vec::with_capacity(n);
        let mut cur = tower.one();
        for _ in 0..n {
            cols.push(cur.0.clone());
            cur = tower.mul(&cur, &xq);
        }
        tower.frob = Matrix::from_columns(&cols, n);
        tower.trace_coeffs = (0..n)
            .map(|i| {
                let mut basis = tower.zero();
                basis.0[i] = 1;
                tower.trace_full(&basis)
            })
            .collect();
        Ok(tower)
    }

    pub fn base(&self) -> &BaseField {
        &self.base
    }

    pub fn q(&self) -> u64 {
        self.base.q()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ext_poly(&self) -> &Poly {
        &self.ext
    }

    /// `q^n`.
    pub fn size(&self) -> u64 {
        self.size
    }

    /// Complete factorization of `q^n - 1`.
    pub fn order_factors(&self) -> &[(u64, u32)] {
        &self.order_factors
    }

    /// Complete factorization of `x^n - 1` over `F_q`.
    pub fn xn_factors(&self) -> &PolyFactorization {
        &self.xn
    }

    pub fn frobenius_matrix(&self) -> &Matrix {
        &self.frob
    }

    pub fn zero(&self) -> Element {
        Element(vec![0; self.n])
    }

    pub fn one(&self) -> Element {
        self.from_base(1)
    }

    pub fn from_base(&self, c: Fq) -> Element {
        let mut v = vec![0; self.n];
        v[0] = c;
        Element(v)
    }

    /// The class of `x`.
    pub fn gen(&self) -> Element {
        self.from_poly(&Poly::x())
    }

    pub fn from_poly(&self, p: &Poly) -> Element {
        let r = p.rem(&self.ext, &self.base);
        let mut v = r.into_coeffs();
        v.resize(self.n, 0);
        Element(v)
    }

    /// Element whose coordinates are the base-`q` digits of `code`.
    pub fn from_code(&self, code: u64) -> Element {
        let q = self.q();
        let mut c = code;
        Element(
            (0..self.n)
                .map(|_| {
                    let d = c % q;
                    c /= q;
                    d
                })
                .collect(),
        )
    }

    pub fn code(&self, e: &Element) -> u64 {
        let q = self.q();
        e.0.iter().rev().fold(0, |acc, &d| acc * q + d)
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.size).map(|c| self.from_code(c))
    }

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        Element(a.0.iter().zip(&b.0).map(|(&x, &y)| self.base.add(x, y)).collect())
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Element {
        Element(a.0.iter().zip(&b.0).map(|(&x, &y)| self.base.sub(x, y)).collect())
    }

    pub fn neg(&self, a: &Element) -> Element {
        Element(a.0.iter().map(|&x| self.base.neg(x)).collect())
    }

    pub fn scale(&self, a: &Element, c: Fq) -> Element {
        Element(a.0.iter().map(|&x| self.base.mul(x, c)).collect())
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let n = self.n;
        let f = &self.base;
        let mut prod = vec![0u64; 2 * n - 1];
        if f.m() == 1 {
            let p = f.p() as u128;
            let mut acc = vec![0u128; 2 * n - 1];
            for (i, &x) in a.0.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.0.iter().enumerate() {
                    acc[i + j] += x as u128 * y as u128;
                }
            }
            for (d, s) in prod.iter_mut().zip(acc) {
                *d = (s % p) as u64;
            }
        } else {
            for (i, &x) in a.0.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.0.iter().enumerate() {
                    prod[i + j] = f.add(prod[i + j], f.mul(x, y));
                }
            }
        }
        self.reduce(prod)
    }

    fn reduce(&self, mut prod: Vec<Fq>) -> Element {
        let n = self.n;
        let f = &self.base;
        let ext = self.ext.coeffs();
        for i in (n..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for (j, &h) in ext[..n].iter().enumerate() {
                if h != 0 {
                    let k = i - n + j;
                    prod[k] = f.sub(prod[k], f.mul(c, h));
                }
            }
            prod[i] = 0;
        }
        prod.truncate(n);
        Element(prod)
    }

    /// `a * (x + c)`, linear time.
    pub fn mul_x_plus_c(&self, a: &Element, c: Fq) -> Element {
        let f = &self.base;
        let mut prod = vec![0; self.n + 1];
        for (i, &v) in a.0.iter().enumerate() {
            prod[i + 1] = f.add(prod[i + 1], v);
            prod[i] = f.add(prod[i], f.mul(v, c));
        }
        self.reduce(prod)
    }

    pub fn pow(&self, a: &Element, mut e: u64) -> Element {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &Element) -> Result<Element> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        Ok(self.pow(a, self.size - 2))
    }

    /// `a^q`.
    pub fn frobenius(&self, a: &Element) -> Element {
        Element(self.frob.mul_vec(&a.0, &self.base))
    }

    /// `a, a^q, ..., a^{q^count}`.
    pub fn conjugates(&self, a: &Element, count: usize) -> Vec<Element> {
        let mut out = Vec::with_capacity(count + 1);
        out.push(a.clone());
        for i in 0..count {
            let next = self.frobenius(&out[i]);
            out.push(next);
        }
        out
    }

    /// Exact multiplicative order by descent from `q^n - 1`.
    pub fn mult_order(&self, a: &Element) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let mut ord = self.size - 1;
        for &(l, _) in &self.order_factors {
            while ord.is_multiple_of(l) && self.pow(a, ord / l) == self.one() {
                ord /= l;
            }
        }
        Ok(ord)
    }

    /// `gcd(e, (q^n - 1)/ord(a)) = 1`.
    pub fn is_e_free(&self, a: &Element, e: u64) -> Result<bool> {
        if e == 0 || !(self.size - 1).is_multiple_of(e) {
            return Err(Error::NotDivisor(e.to_string()));
        }
        let ord = self.mult_order(a)?;
        Ok(e.gcd(&((self.size - 1) / ord)) == 1)
    }

    /// `g ∘ a = sum g_i a^{q^i}`.
    pub fn module_action(&self, g: &Poly, a: &Element) -> Element {
        let conj = self.conjugates(a, g.deg());
        self.action_on_conjugates(g, &conj)
    }

    fn action_on_conjugates(&self, g: &Poly, conj: &[Element]) -> Element {
        let f = &self.base;
        let mut out = vec![0; self.n];
        for (i, &c) in g.coeffs().iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(&conj[i].0) {
                *o = f.add(*o, f.mul(c, v));
            }
        }
        Element(out)
    }

    /// Matrix of the `F_q`-linear map `b -> g ∘ b`.
    pub fn action_matrix(&self, g: &Poly) -> Matrix {
        let f = &self.base;
        let reduced = g.rem(&Poly::xn_minus_1(f, self.n), f);
        let mut acc = Matrix::zeros(self.n, self.n);
        let mut power = Matrix::identity(self.n);
        for (i, &c) in reduced.coeffs().iter().enumerate() {
            if i > 0 {
                power = self.frob.mul(&power, f);
            }
            if c != 0 {
                acc = acc.add(&power.scale(c, f), f);
            }
        }
        acc
    }

    /// `Ord_q(a)`: least-degree monic divisor `h` of `x^n - 1` with `h ∘ a = 0`.
    pub fn fq_order(&self, a: &Element) -> Poly {
        let exps = self.fq_order_exponents(a);
        let f = &self.base;
        self.xn
            .factors
            .iter()
            .zip(&exps)
            .fold(Poly::one(), |acc, ((h, _), &e)| acc.mul(&h.pow(e, f), f))
    }

    /// Exponents of `Ord_q(a)` on the factors of `x^n - 1`.
    pub fn fq_order_exponents(&self, a: &Element) -> Vec<u32> {
        let f = &self.base;
        let conj = self.conjugates(a, self.n);
        let mut exps: Vec<u32> = self.xn.factors.iter().map(|(_, e)| *e).collect();
        let mut h = Poly::xn_minus_1(f, self.n);
        for (i, (phi, _)) in self.xn.factors.iter().enumerate() {
            while exps[i] > 0 {
                let candidate = h.exact_div(phi, f).expect("factor divides");
                if self.action_on_conjugates(&candidate, &conj).is_zero() {
                    h = candidate;
                    exps[i] -= 1;
                } else {
                    break;
                }
            }
        }
        exps
    }

    /// `gcd(h, (x^n - 1)/Ord_q(a)) = 1`.
    pub fn is_h_free(&self, a: &Element, h: &Poly) -> Result<bool> {
        let f = &self.base;
        let h_exps = exponents_of(&self.xn, &h.monic(f), f)
            .ok_or_else(|| Error::NotPolyDivisor(h.to_text(f)))?;
        let ord = self.fq_order_exponents(a);
        Ok(self
            .xn
            .factors
            .iter()
            .zip(h_exps.iter().zip(&ord))
            .all(|((_, mult), (&he, &oe))| he == 0 || oe == *mult))
    }

    /// Degree `n - k` of `Ord_q(a)` gives `k`.
    pub fn normality_defect(&self, a: &Element) -> usize {
        self.n - self.fq_order(a).deg()
    }

    pub fn is_normal(&self, a: &Element) -> bool {
        self.normality_defect(a) == 0
    }

    fn trace_full(&self, a: &Element) -> Fq {
        let conj = self.conjugates(a, self.n - 1);
        let sum = conj.iter().fold(self.zero(), |acc, c| self.add(&acc, c));
        debug_assert!(sum.0[1..].iter().all(|&c| c == 0), "trace lies in F_q");
        sum.0[0]
    }

    /// `Tr_{F_{q^n}/F_q}(a)`.
    pub fn trace(&self, a: &Element) -> Fq {
        let f = &self.base;
        a.0.iter()
            .zip(&self.trace_coeffs)
            .fold(0, |acc, (&c, &t)| f.add(acc, f.mul(c, t)))
    }

    /// `Tr(a^2)`.
    pub fn trace_sq(&self, a: &Element) -> Fq {
        self.trace(&self.mul(a, a))
    }

    /// Trace of each power-basis vector.
    pub fn trace_coeffs(&self) -> &[Fq] {
        &self.trace_coeffs
    }

    pub fn min_poly(&self, a: &Element) -> Result<MinimalPolynomial> {
        let mut conj = vec![a.clone()];
        loop {
            let next = self.frobenius(conj.last().unwrap());
            if next == *a {
                break;
            }
            conj.push(next);
        }
        // coefficients over F_{q^n}, constant first
        let mut coeffs = vec![self.one()];
        for c in &conj {
            let mut next = vec![self.zero(); coeffs.len() + 1];
            for (i, v) in coeffs.iter().enumerate() {
                next[i + 1] = self.add(&next[i + 1], v);
                next[i] = self.sub(&next[i], &self.mul(v, c));
            }
            coeffs = next;
        }
        let mut out = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            if c.0[1..].iter().any(|&v| v != 0) {
                return Err(Error::Invalid("minimal polynomial left F_q".into()));
            }
            out.push(c.0[0]);
        }
        Ok(MinimalPolynomial {
            poly: Poly::from_coeffs(out),
        })
    }

    /// `g ∘ b` for normal `b` and a degree-`k` divisor `g`; the result is exactly `k`-normal.
    pub fn knormal_from_normal(&self, g: &Poly, b: &Element) -> Result<Element> {
        let f = &self.base;
        if exponents_of(&self.xn, g, f).is_none() {
            return Err(Error::NotPolyDivisor(g.to_text(f)));
        }
        if !self.is_normal(b) {
            return Err(Error::NotNormal);
        }
        let a = self.module_action(g, b);
        assert_eq!(self.normality_defect(&a), g.deg(), "g ∘ b must be exactly k-normal");
        Ok(a)
    }

    /// Order exactly `(q^n - 1)/r` and `deg Ord_q = n - k`.
    pub fn is_r_primitive_k_normal(&self, a: &Element, r: u64, k: usize) -> Result<bool> {
        if r == 0 || !(self.size - 1).is_multiple_of(r) {
            return Err(Error::NotDivisor(r.to_string()));
        }
        if a.is_zero() {
            return Ok(false);
        }
        Ok(self.mult_order(a)? == (self.size - 1) / r && self.normality_defect(a) == k)
    }

    /// First primitive element in code order.
    pub fn primitive_element(&self) -> Element {
        (1..self.size)
            .map(|c| self.from_code(c))
            .find(|e| self.mult_order(e).unwrap() == self.size - 1)
            .expect("F_{q^n}^* is cyclic")
    }

    /// Least `c` with `x + c` primitive, if any.
    pub fn primitive_linear(&self) -> Option<Fq> {
        if self.n == 1 {
            return None;
        }
        self.base.elements().find(|&c| {
            let mut e = self.gen();
            e.0[0] = c;
            self.mult_order(&e).unwrap() == self.size - 1
        })
    }

    /// First normal element in code order.
    pub fn normal_element(&self) -> Element {
        (1..self.size)
            .map(|c| self.from_code(c))
            .find(|e| self.is_normal(e))
            .expect("normal bases exist")
    }

    pub fn format(&self, e: &Element) -> String {
        e.to_poly().to_text(&self.base)
    }

    pub fn parse(&self, s: &str) -> Result<Element> {
        let p = Poly::parse(s, &self.base)?;
        if p.deg() >= self.n {
            return Err(Error::Parse(format!("{s}: degree must be below {}", self.n)));
        }
        Ok(self.from_poly(&p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_generator() {
        let t = FieldTower::new(3, 2).unwrap();
        assert_eq!(t.ext_poly().coeffs(), &[1, 0, 1]);
        let y = t.gen();
        assert_eq!(t.mult_order(&y).unwrap(), 4);
        assert_eq!(t.mult_order(&t.one()).unwrap(), 1);
        assert!(!t.is_e_free(&y, 8).unwrap());
        assert!(t.is_e_free(&y, 1).unwrap());
        let g = t.primitive_element();
        assert!(t.is_e_free(&g, 8).unwrap());
        assert!(t.is_e_free(&y, 3).is_err());
        assert_eq!(t.mult_order(&t.zero()), Err(Error::ZeroElement));
    }

    #[test]
    fn f9_traces_and_min_poly() {
        let t = FieldTower::new(3, 2).unwrap();
        let f = t.base().clone();
        let y = t.gen();
        assert_eq!(t.trace(&y), 0);
        assert_eq!(t.trace(&t.one()), 2);
        assert_eq!(t.trace(&t.from_base(f.neg(1))), 1);
        let mp = t.min_poly(&y).unwrap();
        assert_eq!(mp.poly.coeffs(), &[1, 0, 1]);
        assert_eq!(mp.a1(), f.neg(t.trace(&y)));
        assert_eq!(mp.a2(), 1);
        let c = t.from_base(2);
        assert_eq!(t.min_poly(&c).unwrap().poly, Poly::linear(&f, 2));
    }

    #[test]
    fn fq_order_examples() {
        let t = FieldTower::new(3, 4).unwrap();
        let f = t.base().clone();
        assert!(t.fq_order(&t.zero()).is_one());
        assert_eq!(t.fq_order(&t.from_base(2)), Poly::linear(&f, 1));
        let x = Poly::x();
        let b = t.from_code(17);
        assert_eq!(t.module_action(&x, &b), t.frobenius(&b));
        assert!(t.module_action(&Poly::xn_minus_1(&f, 4), &b).is_zero());
        assert!(t.module_action(&Poly::linear(&f, 1), &t.from_base(2)).is_zero());
    }

    #[test]
    fn h_free_examples() {
        let t = FieldTower::new(3, 4).unwrap();
        let f = t.base().clone();
        let beta = t.normal_element();
        assert!(t.is_h_free(&beta, &Poly::xn_minus_1(&f, 4)).unwrap());
        // Ord_q(1) = x - 1 and (x^4 - 1)/(x - 1) takes the value 4 = 1 at x = 1
        assert!(t.is_h_free(&t.from_base(1), &Poly::linear(&f, 1)).unwrap());
        assert!(!t.is_h_free(&t.from_base(1), &Poly::linear(&f, 2)).unwrap());
        assert!(t.is_h_free(&t.from_base(1), &Poly::one()).unwrap());
        assert!(t.is_h_free(&beta, &Poly::from_coeffs(vec![1, 1, 1])).is_err());
    }

    #[test]
    fn knormal_construction() {
        let t = FieldTower::new(3, 9).unwrap();
        let f = t.base().clone();
        let beta = t.normal_element();
        let g = Poly::linear(&f, 1).pow(2, &f);
        let a = t.knormal_from_normal(&g, &beta).unwrap();
        assert_eq!(t.fq_order(&a).deg(), 7);
        assert_eq!(t.knormal_from_normal(&Poly::one(), &beta).unwrap(), beta);
        assert_eq!(t.knormal_from_normal(&g, &t.one()), Err(Error::NotNormal));
    }

    #[test]
    fn r_primitive_examples() {
        let t = FieldTower::new(3, 9).unwrap();
        let gamma = t.primitive_element();
        let a = t.mul(&gamma, &gamma);
        assert_eq!(t.mult_order(&a).unwrap(), 9841);
        assert!(!t.is_r_primitive_k_normal(&t.zero(), 2, 2).unwrap());
        assert!(t.is_r_primitive_k_normal(&a, 4, 0).is_err());
    }

    #[test]
    fn ceiling() {
        assert!(matches!(
            FieldTower::new(3, 30),
            Err(Error::CeilingExceeded { .. })
        ));
        assert!(FieldTower::with_ceiling(3, 4, 80).is_err());
        assert!(FieldTower::with_ceiling(3, 4, 81).is_ok());
    }

    #[test]
    fn action_matrix_matches_action() {
        let t = FieldTower::new(5, 4).unwrap();
        let f = t.base().clone();
        let g = Poly::from_coeffs(vec![3, 0, 1, 4]);
        let m = t.action_matrix(&g);
        for code in [1u64, 7, 100, 624] {
            let b = t.from_code(code);
            assert_eq!(Element(m.mul_vec(b.coords(), &f)), t.module_action(&g, &b));
        }
    }
}
