use std::cmp::Ordering;

use num_bigint::BigUint;

use super::{BaseField, Fq};
use crate::{Error, Result};

/// Univariate polynomial over a [`BaseField`], constant term first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Fq>,
}

impl Poly {
    pub fn from_coeffs(mut coeffs: Vec<Fq>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![1] }
    }

    pub fn x() -> Self {
        Poly { coeffs: vec![0, 1] }
    }

    pub fn constant(c: Fq) -> Self {
        Poly::from_coeffs(vec![c])
    }

    pub fn monomial(c: Fq, d: usize) -> Self {
        let mut coeffs = vec![0; d + 1];
        coeffs[d] = c;
        Poly::from_coeffs(coeffs)
    }

    /// `x^n - 1`.
    pub fn xn_minus_1(f: &BaseField, n: usize) -> Self {
        let mut coeffs = vec![0; n + 1];
        coeffs[0] = f.neg(1);
        coeffs[n] = 1;
        Poly::from_coeffs(coeffs)
    }

    /// `x - c`.
    pub fn linear(f: &BaseField, c: Fq) -> Self {
        Poly::from_coeffs(vec![f.neg(c), 1])
    }

    pub fn coeffs(&self) -> &[Fq] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Fq> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Fq {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> Fq {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn add(&self, other: &Poly, f: &BaseField) -> Poly {
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut c = long.coeffs.clone();
        for (i, &b) in short.coeffs.iter().enumerate() {
            c[i] = f.add(c[i], b);
        }
        Poly::from_coeffs(c)
    }

    pub fn neg(&self, f: &BaseField) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly, f: &BaseField) -> Poly {
        self.add(&other.neg(f), f)
    }

    pub fn scale(&self, c: Fq, f: &BaseField) -> Poly {
        if c == 0 {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly, f: &BaseField) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        if f.m() == 1 {
            let p = f.p() as u128;
            let mut acc = vec![0u128; c.len()];
            for (i, &a) in self.coeffs.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (j, &b) in other.coeffs.iter().enumerate() {
                    let slot = &mut acc[i + j];
                    *slot += a as u128 * b as u128;
                    if *slot >= 1 << 120 {
                        *slot %= p;
                    }
                }
            }
            for (dst, src) in c.iter_mut().zip(acc) {
                *dst = (src % p) as u64;
            }
        } else {
            for (i, &a) in self.coeffs.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (j, &b) in other.coeffs.iter().enumerate() {
                    c[i + j] = f.add(c[i + j], f.mul(a, b));
                }
            }
        }
        Poly::from_coeffs(c)
    }

    pub fn divmod(&self, divisor: &Poly, f: &BaseField) -> Result<(Poly, Poly)> {
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        if self.coeffs.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let inv_lead = f.inv(divisor.lead());
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i];
            if c == 0 {
                continue;
            }
            let t = f.mul(c, inv_lead);
            quot[i - dd] = t;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                let k = i - dd + j;
                rem[k] = f.sub(rem[k], f.mul(t, d));
            }
        }
        rem.truncate(dd);
        Ok((Poly::from_coeffs(quot), Poly::from_coeffs(rem)))
    }

    /// # Panics
    /// On a zero divisor.
    pub fn rem(&self, divisor: &Poly, f: &BaseField) -> Poly {
        self.divmod(divisor, f).expect("nonzero divisor").1
    }

    /// Exact quotient; `None` when `divisor` does not divide `self`.
    pub fn exact_div(&self, divisor: &Poly, f: &BaseField) -> Option<Poly> {
        let (q, r) = self.divmod(divisor, f).ok()?;
        r.is_zero().then_some(q)
    }

    pub fn divides(&self, other: &Poly, f: &BaseField) -> bool {
        !self.is_zero() && other.rem(self, f).is_zero()
    }

    pub fn monic(&self, f: &BaseField) -> Poly {
        if self.is_zero() || self.is_monic() {
            return self.clone();
        }
        self.scale(f.inv(self.lead()), f)
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(&self, other: &Poly, f: &BaseField) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    pub fn mul_mod(&self, other: &Poly, modulus: &Poly, f: &BaseField) -> Poly {
        self.mul(other, f).rem(modulus, f)
    }

    pub fn pow_mod(&self, e: &BigUint, modulus: &Poly, f: &BaseField) -> Poly {
        let mut acc = Poly::one().rem(modulus, f);
        let base = self.rem(modulus, f);
        for i in (0..e.bits()).rev() {
            acc = acc.mul_mod(&acc, modulus, f);
            if e.bit(i) {
                acc = acc.mul_mod(&base, modulus, f);
            }
        }
        acc
    }

    pub fn pow_mod_u64(&self, e: u64, modulus: &Poly, f: &BaseField) -> Poly {
        self.pow_mod(&BigUint::from(e), modulus, f)
    }

    pub fn pow(&self, e: u32, f: &BaseField) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self, f);
        }
        acc
    }

    pub fn derivative(&self, f: &BaseField) -> Poly {
        Poly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| f.mul(c, f.from_int((i as u64 % f.p()) as i64)))
                .collect(),
        )
    }

    pub fn eval(&self, x: Fq, f: &BaseField) -> Fq {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Comma-separated coefficients, constant first; `0` for the zero polynomial.
    pub fn to_text(&self, f: &BaseField) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.coeffs
            .iter()
            .map(|&c| f.format(c))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse(s: &str, f: &BaseField) -> Result<Poly> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut parts = Vec::new();
        let mut depth = 0;
        let mut start = 0;
        for (i, ch) in s.char_indices() {
            match ch {
                '[' => depth += 1,
                ']' => depth -= 1,
                ',' if depth == 0 => {
                    parts.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(&s[start..]);
        let coeffs = parts
            .into_iter()
            .map(|c| f.parse(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::from_coeffs(coeffs))
    }

    /// Human-readable form, highest degree first.
    pub fn pretty(&self, f: &BaseField) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let coef = f.format(c);
            let term = match (i, c == 1) {
                (0, _) => coef,
                (1, true) => "x".into(),
                (1, false) => format!("{coef}x"),
                (_, true) => format!("x^{i}"),
                (_, false) => format!("{coef}x^{i}"),
            };
            terms.push(term);
        }
        terms.join(" + ")
    }
}

/// Canonical order: by degree, then by coefficients from the top down.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> BaseField {
        BaseField::from_q(q).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let f3 = f(3);
        let x2m1 = Poly::xn_minus_1(&f3, 2);
        let xm1 = Poly::xn_minus_1(&f3, 1);
        assert_eq!(x2m1.gcd(&xm1, &f3), xm1);
        let prod = Poly::from_coeffs(vec![1, 1]).mul(&Poly::from_coeffs(vec![2, 1]), &f3);
        assert_eq!(prod.coeffs(), &[2, 0, 1]);

        let f5 = f(5);
        let (q, r) = Poly::monomial(1, 3)
            .divmod(&Poly::linear(&f5, 1), &f5)
            .unwrap();
        assert_eq!(q.coeffs(), &[1, 1, 1]);
        assert_eq!(r.coeffs(), &[1]);
        assert_eq!(
            Poly::one().divmod(&Poly::zero(), &f5),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn text_round_trip() {
        let f3 = f(3);
        let p = Poly::from_coeffs(vec![1, 0, 1]);
        assert_eq!(p.to_text(&f3), "1,0,1");
        assert_eq!(Poly::parse("1,0,1", &f3).unwrap(), p);
        assert_eq!(Poly::parse("0", &f3).unwrap(), Poly::zero());
        assert!(Poly::parse("1,3", &f3).is_err());
        let f9 = f(9);
        let p = Poly::from_coeffs(vec![3, 0, 1]);
        assert_eq!(p.to_text(&f9), "[0,1],[0,0],[1,0]");
        assert_eq!(Poly::parse("[0,1],[0,0],[1,0]", &f9).unwrap(), p);
    }

    #[test]
    fn canonical_order() {
        let a = Poly::from_coeffs(vec![2, 1]);
        let b = Poly::from_coeffs(vec![0, 0, 1]);
        let c = Poly::from_coeffs(vec![1, 2]);
        assert!(a < b);
        assert!(a < c);
    }
}
