use std::fmt::Write as _;

use crate::numthy::arith::{factor_u64, mul_mod, pow_mod};
use crate::numthy::PrimePower;
use crate::{Error, Result};

use super::Poly;

/// Base-field element: the code `sum c_i p^i` of its coordinates in the generator `y`.
pub type Fq = u64;

/// Tables are built for prime-power fields up to this size.
const TABLE_LIMIT: u64 = 1 << 22;

#[derive(Clone, Debug)]
struct Tables {
    log: Vec<u32>,
    // exp[i] = g^i for i < 2(q-1)
    exp: Vec<u32>,
}

/// `F_q` as `F_p[y]/(h(y))` with `h` the least monic irreducible of degree `m`.
#[derive(Clone, Debug)]
pub struct BaseField {
    pp: PrimePower,
    // coefficients of h over F_p, constant first, monic; empty when m = 1
    defining: Vec<u64>,
    tables: Option<Tables>,
}

impl PartialEq for BaseField {
    fn eq(&self, other: &Self) -> bool {
        self.pp == other.pp && self.defining == other.defining
    }
}

impl Eq for BaseField {}

impl BaseField {
    pub fn new(pp: PrimePower) -> Self {
        if pp.m == 1 {
            return BaseField {
                pp,
                defining: Vec::new(),
                tables: None,
            };
        }
        let prime = BaseField::new(PrimePower::from_parts(pp.p, 1).expect("p is an odd prime"));
        let h = super::least_irreducible(&prime, pp.m as usize);
        let mut field = BaseField {
            pp,
            defining: h.coeffs().to_vec(),
            tables: None,
        };
        if pp.q <= TABLE_LIMIT {
            field.tables = Some(field.build_tables());
        }
        field
    }

    pub fn from_q(q: u64) -> Result<Self> {
        Ok(BaseField::new(PrimePower::new(q)?))
    }

    pub fn prime_power(&self) -> PrimePower {
        self.pp
    }

    pub fn q(&self) -> u64 {
        self.pp.q
    }

    pub fn p(&self) -> u64 {
        self.pp.p
    }

    pub fn m(&self) -> u32 {
        self.pp.m
    }

    /// Defining polynomial of `F_q` over `F_p` (`y` itself when `m = 1`).
    pub fn defining_poly(&self) -> Poly {
        if self.defining.is_empty() {
            Poly::x()
        } else {
            Poly::from_coeffs(self.defining.clone())
        }
    }

    fn build_tables(&self) -> Tables {
        let q = self.pp.q;
        let order = q - 1;
        let primes: Vec<u64> = factor_u64(order).into_iter().map(|(l, _)| l).collect();
        let g = (2..q)
            .find(|&g| primes.iter().all(|&l| self.slow_pow(g, order / l) != 1))
            .expect("F_q* is cyclic");
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u64;
        for i in 0..order as usize {
            exp[i] = cur as u32;
            exp[i + order as usize] = cur as u32;
            log[cur as usize] = i as u32;
            cur = self.slow_mul(cur, g);
        }
        Tables { log, exp }
    }

    pub fn digits(&self, a: Fq) -> Vec<u64> {
        let p = self.pp.p;
        let mut a = a;
        (0..self.pp.m)
            .map(|_| {
                let d = a % p;
                a /= p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u64]) -> Fq {
        let p = self.pp.p;
        digits.iter().rev().fold(0, |acc, &d| acc * p + d % p)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> Fq {
        v.rem_euclid(self.pp.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        let p = self.pp.p;
        if self.pp.m == 1 {
            let s = a + b;
            return if s >= p { s - p } else { s };
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        while a > 0 || b > 0 {
            let d = (a % p + b % p) % p;
            out += d * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        let p = self.pp.p;
        if self.pp.m == 1 {
            return if a == 0 { 0 } else { p - a };
        }
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        while a > 0 {
            let d = a % p;
            out += ((p - d) % p) * place;
            place *= p;
            a /= p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        if self.pp.m == 1 {
            let p = self.pp.p;
            return if a >= b { a - b } else { a + p - b };
        }
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if self.pp.m == 1 {
            return mul_mod(a, b, self.pp.p);
        }
        if a == 0 || b == 0 {
            return 0;
        }
        match &self.tables {
            Some(t) => t.exp[(t.log[a as usize] + t.log[b as usize]) as usize] as u64,
            None => self.slow_mul(a, b),
        }
    }

    fn slow_mul(&self, a: Fq, b: Fq) -> Fq {
        let p = self.pp.p;
        let m = self.pp.m as usize;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mul_mod(x, y, p)) % p;
            }
        }
        for i in (m..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for (j, &h) in self.defining[..m].iter().enumerate() {
                let k = i - m + j;
                prod[k] = (prod[k] + p - mul_mod(c, h, p)) % p;
            }
            prod[i] = 0;
        }
        self.from_digits(&prod[..m])
    }

    fn slow_pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slow_mul(acc, base);
            }
            base = self.slow_mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn pow(&self, a: Fq, e: u64) -> Fq {
        if self.pp.m == 1 {
            return pow_mod(a, e, self.pp.p);
        }
        if let Some(t) = &self.tables {
            if a == 0 {
                return u64::from(e == 0);
            }
            let order = self.pp.q - 1;
            let idx = (t.log[a as usize] as u128 * e as u128 % order as u128) as usize;
            return t.exp[idx] as u64;
        }
        self.slow_pow(a, e)
    }

    /// # Panics
    /// On `a = 0`.
    pub fn inv(&self, a: Fq) -> Fq {
        assert!(a != 0, "inverse of zero");
        if let Some(t) = &self.tables {
            let order = self.pp.q - 1;
            return t.exp[(order - t.log[a as usize] as u64) as usize % order as usize] as u64;
        }
        self.pow(a, self.pp.q - 2)
    }

    pub fn div(&self, a: Fq, b: Fq) -> Fq {
        self.mul(a, self.inv(b))
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        0..self.pp.q
    }

    /// Text form: an integer for prime fields, `[c0,...,c_{m-1}]` otherwise.
    pub fn format(&self, a: Fq) -> String {
        if self.pp.m == 1 {
            return a.to_string();
        }
        let mut s = String::from("[");
        for (i, d) in self.digits(a).iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{d}").unwrap();
        }
        s.push(']');
        s
    }

    pub fn parse(&self, s: &str) -> Result<Fq> {
        let s = s.trim();
        let p = self.pp.p;
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let digits: Vec<u64> = inner
                .split(',')
                .map(|d| d.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            if digits.len() > self.pp.m as usize || digits.iter().any(|&d| d >= p) {
                return Err(Error::Parse(format!("{s} is not an element of F_{}", self.pp.q)));
            }
            return Ok(self.from_digits(&digits));
        }
        let v: u64 = s.parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        if v >= p {
            return Err(Error::Parse(format!("{v} is not reduced modulo {p}")));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_uses_y2_plus_1() {
        let f = BaseField::from_q(9).unwrap();
        assert_eq!(f.defining_poly().coeffs(), &[1, 0, 1]);
        let y = 3; // digits [0, 1]
        assert_eq!(f.mul(y, y), f.from_int(-1));
        assert_eq!(f.pow(y, 4), 1);
        assert_eq!(f.format(y), "[0,1]");
        assert_eq!(f.parse("[0,1]").unwrap(), y);
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [3u64, 5, 9, 25, 27] {
            let f = BaseField::from_q(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1, "q={q} a={a}");
                    assert_eq!(f.pow(a, q - 1), 1);
                }
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.slow_mul(a, b));
                    assert_eq!(f.sub(f.add(a, b), b), a);
                }
            }
        }
    }

    #[test]
    fn untabled_field_agrees() {
        let f = BaseField::from_q(3u64.pow(15)).unwrap();
        assert!(f.tables.is_none());
        let a = 12345;
        assert_eq!(f.mul(a, f.inv(a)), 1);
        assert_eq!(f.pow(a, f.q() - 1), 1);
    }
}
