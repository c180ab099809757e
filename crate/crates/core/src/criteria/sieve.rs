use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::gfpoly::{
    divisors_of_degree, exponents_of, factor_xn_minus_1, BaseField, Divisor, Poly, PolyFactorization,
};
use crate::numthy::{
    factor_cyclotomic_cached, Budget, CyclotomicFactorization, FactorCache, NoCache, PrimePower,
};
use crate::{Error, Result};

/// Result of evaluating one inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckOutcome {
    Proven,
    NotProven,
    /// The `W` interval from an incomplete factorization straddles the inequality.
    Indeterminate,
}

/// Everything the inequalities need about one `(q, n, r, k)`.
#[derive(Clone, Debug)]
pub struct PairContext {
    pub field: BaseField,
    pub n: u32,
    pub r: u64,
    pub k: u32,
    pub order: CyclotomicFactorization,
    pub xn: PolyFactorization,
    x_minus_1: usize,
    known: Vec<BigUint>,
    known_inv: Vec<f64>,
}

impl PairContext {
    pub fn new(pp: PrimePower, n: u32, r: u64, k: u32, budget: Budget) -> Self {
        Self::with_cache(pp, n, r, k, budget, &NoCache)
    }

    pub fn with_cache(
        pp: PrimePower,
        n: u32,
        r: u64,
        k: u32,
        budget: Budget,
        cache: &dyn FactorCache,
    ) -> Self {
        let field = BaseField::new(pp);
        let xn = factor_xn_minus_1(&field, n as u64);
        let order = factor_cyclotomic_cached(pp.q, n, budget, cache);
        Self::from_parts(field, n, r, k, order, xn)
    }

    pub fn from_parts(
        field: BaseField,
        n: u32,
        r: u64,
        k: u32,
        order: CyclotomicFactorization,
        xn: PolyFactorization,
    ) -> Self {
        let xm1 = Poly::linear(&field, 1);
        let x_minus_1 = xn.index_of(&xm1).expect("x - 1 divides x^n - 1");
        let known: Vec<BigUint> = order.total.prime_list().cloned().collect();
        let known_inv = known.iter().map(|p| 1.0 / p.to_f64().unwrap_or(f64::INFINITY)).collect();
        PairContext {
            field,
            n,
            r,
            k,
            order,
            xn,
            x_minus_1,
            known,
            known_inv,
        }
    }

    /// Replaces the integer factorization (e.g. after spending more effort).
    pub fn refactor(&mut self, budget: Budget, cache: &dyn FactorCache) {
        self.order = factor_cyclotomic_cached(self.q(), self.n, budget, cache);
        self.known = self.order.total.prime_list().cloned().collect();
        self.known_inv = self
            .known
            .iter()
            .map(|p| 1.0 / p.to_f64().unwrap_or(f64::INFINITY))
            .collect();
    }

    pub fn q(&self) -> u64 {
        self.field.q()
    }

    pub fn x_minus_1_index(&self) -> usize {
        self.x_minus_1
    }

    /// Known primes of `q^n - 1`, ascending.
    pub fn known_primes(&self) -> &[BigUint] {
        &self.known
    }

    pub fn degree_k_divisors(&self) -> Vec<Divisor> {
        divisors_of_degree(&self.xn, self.k as usize, &self.field)
    }

    pub fn divisor_of(&self, g: &Poly) -> Result<Divisor> {
        let f = &self.field;
        let exps = exponents_of(&self.xn, g, f).ok_or_else(|| Error::NotPolyDivisor(g.to_text(f)))?;
        let d = crate::gfpoly::divisor_from_exponents(&self.xn, exps, f);
        if d.degree() != self.k as usize {
            return Err(Error::Invalid(format!(
                "g = {} has degree {}, expected {}",
                g.to_text(f),
                d.degree(),
                self.k
            )));
        }
        Ok(d)
    }

    /// Exponent `n - 2k - 4` of the squared left side.
    fn lhs_exponent(&self) -> i64 {
        self.n as i64 - 2 * self.k as i64 - 4
    }

    pub fn lhs_ln(&self) -> f64 {
        (self.n as f64 / 2.0 - self.k as f64 - 2.0) * (self.q() as f64).ln()
    }

    fn cofactor_bound(&self) -> u32 {
        self.order.total.cofactor_prime_bound()
    }

    fn has_cofactor(&self) -> bool {
        !self.order.total.is_complete()
    }

    /// Whether the factor at index `i` survives in `(x^n - 1)/g`.
    fn remains(&self, g: &Divisor, i: usize) -> bool {
        g.exponents[i] < self.xn.factors[i].1
    }
}

/// A choice of `(l, f)` for the sieving inequality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SieveConfig {
    /// Known primes of `q^n - 1` in `l`, ascending.
    pub l_primes: Vec<BigUint>,
    /// Whether the unfactored cofactor's primes belong to `l`.
    pub l_cofactor: bool,
    /// Indices of the distinct factors of `x^n - 1` in `f`, ascending.
    pub f_factors: Vec<usize>,
}

impl SieveConfig {
    /// `l = q^n - 1`, `f = x^n - 1`.
    pub fn degenerate(ctx: &PairContext) -> Self {
        SieveConfig {
            l_primes: ctx.known.clone(),
            l_cofactor: true,
            f_factors: (0..ctx.xn.factors.len()).collect(),
        }
    }

    pub fn is_degenerate(&self, ctx: &PairContext) -> bool {
        self.l_primes.len() == ctx.known.len()
            && (self.l_cofactor || !ctx.has_cofactor())
            && self.f_factors.len() == ctx.xn.factors.len()
    }

    /// Radical of `l` over its known primes, with `*C` when it also holds the cofactor.
    pub fn l_label(&self) -> String {
        let prod: BigUint = self.l_primes.iter().product();
        if self.l_cofactor {
            format!("{prod}*C")
        } else {
            prod.to_string()
        }
    }

    pub fn f_poly(&self, ctx: &PairContext) -> Poly {
        self.f_factors
            .iter()
            .fold(Poly::one(), |acc, &i| acc.mul(&ctx.xn.factors[i].0, &ctx.field))
    }

    /// Parses an `l` label and an `f` polynomial back into a configuration.
    pub fn parse(ctx: &PairContext, l: &str, f_text: &str) -> Result<Self> {
        let (digits, l_cofactor) = match l.strip_suffix("*C") {
            Some(d) => (d, true),
            None => (l, false),
        };
        let value: BigUint = digits
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("l = {l}: {e}")))?;
        let l_primes: Vec<BigUint> = ctx
            .known
            .iter()
            .filter(|p| (&value % *p).is_zero())
            .cloned()
            .collect();
        let rad: BigUint = l_primes.iter().product();
        if rad != value {
            return Err(Error::Invalid(format!(
                "l = {value} is not a square-free product of known primes of q^n - 1"
            )));
        }
        let fpoly = Poly::parse(f_text, &ctx.field)?;
        let exps = exponents_of(&ctx.xn, &fpoly, &ctx.field)
            .ok_or_else(|| Error::NotPolyDivisor(f_text.to_string()))?;
        if exps.iter().any(|&e| e > 1) {
            return Err(Error::Invalid("f must be square-free".into()));
        }
        let f_factors = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e == 1)
            .map(|(i, _)| i)
            .collect();
        Ok(SieveConfig {
            l_primes,
            l_cofactor,
            f_factors,
        })
    }
}

/// Derived quantities of one `(g, l, f)` evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct SieveEval {
    pub s_range: (u32, u32),
    pub t: u32,
    /// Sound lower bound on `D`.
    pub d: BigRational,
    /// Sound upper bound on `S` (equal to `S` for complete factorizations).
    pub s: BigRational,
    pub w_l_exp: (u32, u32),
    pub w_ftilde_exp: u32,
    pub outcome: CheckOutcome,
    pub lhs_ln: f64,
    pub rhs_ln: f64,
}

impl SieveEval {
    pub fn margin(&self) -> f64 {
        self.lhs_ln - self.rhs_ln
    }
}

fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn ln_rational(x: &BigRational) -> f64 {
    let v = rational_to_f64(x);
    if v.is_finite() && v > 0.0 {
        return v.ln();
    }
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    ln_big(num) - ln_big(den)
}

pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// `q^e * den^2 > (c * num)^2`, i.e. `q^{e/2} > c * S` with `S = num/den > 0`.
fn exceeds(q: u64, e: i64, c: &BigUint, s: &BigRational) -> bool {
    if e < 0 {
        return false;
    }
    let num = s.numer().magnitude();
    let den = s.denom().magnitude();
    let lhs = BigUint::from(q).pow(e as u32) * den * den;
    let rhs = c * num;
    lhs > &rhs * &rhs
}

fn big_s(s: u32, t: u32, d: &BigRational) -> BigRational {
    let stm1 = BigInt::from(s as i64 + t as i64 - 1);
    BigRational::from_integer(stm1) / d + BigRational::from_integer(BigInt::from(2))
}

/// Exact evaluation of `q^{n/2-k-2} > 2r W(l) W(f~) S`.
pub fn sieve_check(ctx: &PairContext, g: &Divisor, cfg: &SieveConfig) -> Result<SieveEval> {
    let f = &ctx.field;
    let q = ctx.q();
    let cof = ctx.has_cofactor();
    let u = ctx.cofactor_bound();
    let in_l = |p: &BigUint| cfg.l_primes.binary_search(p).is_ok();
    let rest: Vec<&BigUint> = ctx.known.iter().filter(|p| !in_l(p)).collect();
    let mut base = BigRational::one();
    for p in &rest {
        base -= BigRational::new(BigInt::one(), BigInt::from((*p).clone()));
    }
    let mut t = 0u32;
    let mut w_ftilde = 0u32;
    let qb = BigUint::from(q);
    for (i, (h, _)) in ctx.xn.factors.iter().enumerate() {
        if cfg.f_factors.contains(&i) {
            if ctx.remains(g, i) {
                w_ftilde += 1;
            }
        } else {
            t += 1;
            base -= BigRational::new(BigInt::one(), BigInt::from(qb.pow(h.deg() as u32)));
        }
    }
    let known_rest = rest.len() as u32;
    let known_l = cfg.l_primes.len() as u32;
    // worst case (for proving): cofactor primes maximal in count, each just above B
    let (s_hi, d_lo, wl_hi) = if !cof {
        (known_rest, base.clone(), known_l)
    } else if cfg.l_cofactor {
        (known_rest, base.clone(), known_l + u)
    } else {
        let b = BigRational::from_integer(BigInt::from(ctx.order.total.trial_bound.max(2)));
        (known_rest + u, &base - BigRational::from_integer(BigInt::from(u)) / b, known_l)
    };
    // best case (for refuting): a single cofactor prime of negligible reciprocal
    let (s_lo, d_hi, wl_lo) = if !cof {
        (known_rest, base.clone(), known_l)
    } else if cfg.l_cofactor {
        (known_rest, base.clone(), known_l + 1)
    } else {
        (known_rest + 1, base.clone(), known_l)
    };
    if !d_hi.is_positive() {
        return Err(Error::InvalidSieve(format!("{:.6}", rational_to_f64(&d_hi))));
    }
    let two_r = BigUint::from(2 * ctx.r);
    let lhs_ln = ctx.lhs_ln();
    let e = ctx.lhs_exponent();
    let s_lo_val = big_s(s_lo, t, &d_hi);
    let c_lo = &two_r << (wl_lo + w_ftilde);
    let refuted = !exceeds(q, e, &c_lo, &s_lo_val);
    let (outcome, s_val, rhs_ln) = if d_lo.is_positive() {
        let s_hi_val = big_s(s_hi, t, &d_lo);
        let c_hi = &two_r << (wl_hi + w_ftilde);
        let rhs_ln = ln_big(&c_hi) + ln_rational(&s_hi_val);
        let outcome = if exceeds(q, e, &c_hi, &s_hi_val) {
            CheckOutcome::Proven
        } else if refuted {
            CheckOutcome::NotProven
        } else {
            CheckOutcome::Indeterminate
        };
        (outcome, s_hi_val, rhs_ln)
    } else {
        let outcome = if refuted {
            CheckOutcome::NotProven
        } else {
            CheckOutcome::Indeterminate
        };
        (outcome, s_lo_val, f64::INFINITY)
    };
    let _ = f;
    Ok(SieveEval {
        s_range: (s_lo, s_hi),
        t,
        d: d_lo,
        s: s_val,
        w_l_exp: (wl_lo, wl_hi),
        w_ftilde_exp: w_ftilde,
        outcome,
        lhs_ln,
        rhs_ln,
    })
}

/// `q^{n/2-k-2} > 2r W(q^n - 1) W((x^n - 1)/g)`; identical to the degenerate sieve.
pub fn baseline_check(ctx: &PairContext, g: &Divisor) -> SieveEval {
    sieve_check(ctx, g, &SieveConfig::degenerate(ctx)).expect("degenerate configuration has D = 1")
}

/// Which trace class a divisor serves.
pub fn serves_zero_class(ctx: &PairContext, g: &Divisor) -> bool {
    g.exponents[ctx.x_minus_1] > 0
}

/// Best configuration found by [`sieve_search`].
#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub g: Divisor,
    pub config: SieveConfig,
    pub eval: SieveEval,
}

struct LOption {
    primes: Vec<usize>,
    cofactor: bool,
    wl_hi: u32,
    s_hi: u32,
    inv_hi: f64,
}

fn l_options(ctx: &PairContext) -> Vec<LOption> {
    let k = ctx.known.len();
    let cof = ctx.has_cofactor();
    let u = ctx.cofactor_bound();
    let b = ctx.order.total.trial_bound.max(2) as f64;
    let mut suffix = vec![0.0; k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + ctx.known_inv[i];
    }
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut push = |primes: Vec<usize>, cofactor: bool, out: &mut Vec<LOption>| {
        let cofactor = cofactor && cof;
        if !seen.insert((primes.clone(), cofactor)) {
            return;
        }
        let inv_rest: f64 = (0..k)
            .filter(|i| !primes.contains(i))
            .map(|i| ctx.known_inv[i])
            .sum();
        let (s_hi, inv_hi, wl_hi) = if cofactor || !cof {
            ((k - primes.len()) as u32, inv_rest, primes.len() as u32 + if cofactor { u } else { 0 })
        } else {
            ((k - primes.len()) as u32 + u, inv_rest + u as f64 / b, primes.len() as u32)
        };
        out.push(LOption {
            primes,
            cofactor,
            wl_hi,
            s_hi,
            inv_hi,
        });
    };
    for j in 0..=k {
        push((0..j).collect(), false, &mut out);
    }
    push((0..k).collect(), true, &mut out);
    let q = ctx.q();
    let n = ctx.n as u64;
    let qb = BigUint::from(q);
    for j in 1..=3u64 {
        if !n.is_multiple_of(j) {
            continue;
        }
        let v = qb.pow(j as u32) - 1u32;
        let primes: Vec<usize> = (0..k).filter(|&i| (&v % &ctx.known[i]).is_zero()).collect();
        let cofactor = ctx
            .order
            .pieces
            .iter()
            .any(|(d, f)| j % d == 0 && !f.is_complete());
        push(primes, cofactor, &mut out);
    }
    let small: Vec<usize> = (0..k)
        .filter(|&i| [3u32, 5, 7].iter().any(|&p| ctx.known[i] == BigUint::from(p)))
        .collect();
    push(small, false, &mut out);
    out
}

/// Factor order for `f` prefixes: ascending degree, factors consumed by `g` first.
fn f_order(ctx: &PairContext, g: &Divisor) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ctx.xn.factors.len()).collect();
    idx.sort_by_key(|&i| (ctx.xn.factors[i].0.deg(), ctx.remains(g, i)));
    idx
}

/// Searches the documented family of `(l, f)` for the given divisors `gs`.
///
/// Returns the first proving configuration, otherwise the one with the
/// largest margin `ln LHS - ln RHS`, plus whether any evaluation was indeterminate.
pub fn sieve_search(ctx: &PairContext, gs: &[Divisor]) -> (Option<SearchResult>, bool) {
    let lhs_ln = ctx.lhs_ln();
    let ln2 = std::f64::consts::LN_2;
    let two_r_ln = ((2 * ctx.r) as f64).ln();
    let q = ctx.q() as f64;
    let ls = l_options(ctx);
    let mut best: Option<SearchResult> = None;
    let mut indeterminate = false;
    let mut seen_signatures = std::collections::HashSet::new();
    for g in gs {
        let order = f_order(ctx, g);
        let signature: Vec<(usize, bool)> = order
            .iter()
            .map(|&i| (ctx.xn.factors[i].0.deg(), ctx.remains(g, i)))
            .collect();
        if !seen_signatures.insert(signature.clone()) {
            continue;
        }
        // f prefixes: (t, sum 1/q^deg over factors outside f, W(f~) exponent)
        let total = order.len();
        let mut f_opts = Vec::with_capacity(total + 1);
        let mut outside: f64 = signature.iter().map(|&(d, _)| q.powi(-(d as i32))).sum();
        let mut wf = 0u32;
        f_opts.push((total as u32, outside, wf));
        for (j, &(d, remains)) in signature.iter().enumerate() {
            outside -= q.powi(-(d as i32));
            if remains {
                wf += 1;
            }
            f_opts.push(((total - j - 1) as u32, outside.max(0.0), wf));
        }
        for l in &ls {
            for (j, &(t, f_inv, wf)) in f_opts.iter().enumerate() {
                let d = 1.0 - l.inv_hi - f_inv;
                let margin = if d > 0.0 {
                    let s = (l.s_hi as f64 + t as f64 - 1.0) / d + 2.0;
                    lhs_ln - (two_r_ln + (l.wl_hi + wf) as f64 * ln2 + s.ln())
                } else {
                    f64::NEG_INFINITY
                };
                let near = margin.abs() < 1e-6 * lhs_ln.abs().max(1.0);
                let promising = margin > 0.0 || near;
                let track = best.as_ref().is_none_or(|b| margin > b.eval.margin());
                if !(promising || track || ctx.has_cofactor()) {
                    continue;
                }
                let mut f_factors: Vec<usize> = order[..j].to_vec();
                f_factors.sort_unstable();
                let cfg = SieveConfig {
                    l_primes: l.primes.iter().map(|&i| ctx.known[i].clone()).collect(),
                    l_cofactor: l.cofactor,
                    f_factors,
                };
                if !(promising || ctx.has_cofactor()) {
                    // only the margin is needed; skip exact work
                    if d > 0.0 {
                        if let Ok(eval) = sieve_check(ctx, g, &cfg) {
                            best = Some(SearchResult {
                                g: g.clone(),
                                config: cfg,
                                eval,
                            });
                        }
                    }
                    continue;
                }
                let Ok(eval) = sieve_check(ctx, g, &cfg) else {
                    continue;
                };
                match eval.outcome {
                    CheckOutcome::Proven => {
                        return (
                            Some(SearchResult {
                                g: g.clone(),
                                config: cfg,
                                eval,
                            }),
                            indeterminate,
                        );
                    }
                    CheckOutcome::Indeterminate => indeterminate = true,
                    CheckOutcome::NotProven => {}
                }
                if best.as_ref().is_none_or(|b| eval.margin() > b.eval.margin()) {
                    best = Some(SearchResult {
                        g: g.clone(),
                        config: cfg,
                        eval,
                    });
                }
            }
        }
    }
    (best, indeterminate)
}

/// Convenience: a context with default budget and no cache.
pub fn context(q: u64, n: u32, r: u64, k: u32) -> Result<PairContext> {
    Ok(PairContext::new(PrimePower::new(q)?, n, r, k, Budget::default()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_q3_n9() {
        let ctx = context(3, 9, 2, 2).unwrap();
        let gs = ctx.degree_k_divisors();
        assert_eq!(gs.len(), 1);
        let eval = baseline_check(&ctx, &gs[0]);
        assert_eq!(eval.outcome, CheckOutcome::NotProven);
        // 2r W(19682) W((x-1)^7) = 4 * 8 * 2
        assert!((eval.rhs_ln - 64f64.ln()).abs() < 1e-12);
        assert!((eval.lhs_ln - 3f64.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn n8_never_proves() {
        for q in [3u64, 11, 101, 10007] {
            let ctx = context(q, 8, 2, 2).unwrap();
            for g in ctx.degree_k_divisors() {
                assert_eq!(baseline_check(&ctx, &g).outcome, CheckOutcome::NotProven);
            }
        }
    }

    #[test]
    fn sieve_proves_29_14() {
        let ctx = context(29, 14, 2, 2).unwrap();
        let g = ctx
            .degree_k_divisors()
            .into_iter()
            .find(|g| !serves_zero_class(&ctx, g))
            .unwrap();
        let cfg = SieveConfig {
            l_primes: vec![BigUint::from(2u32), BigUint::from(3u32)],
            l_cofactor: false,
            f_factors: vec![],
        };
        let eval = sieve_check(&ctx, &g, &cfg).unwrap();
        assert_eq!(eval.outcome, CheckOutcome::Proven);
        assert!((eval.rhs_ln.exp() - 1592.0).abs() < 1.0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let ctx = context(3, 12, 2, 2).unwrap();
        let g = ctx.degree_k_divisors().remove(0);
        let cfg = SieveConfig {
            l_primes: vec![],
            l_cofactor: false,
            f_factors: vec![],
        };
        assert!(matches!(sieve_check(&ctx, &g, &cfg), Err(Error::InvalidSieve(_))));
    }

    #[test]
    fn config_text_round_trip() {
        let ctx = context(29, 14, 2, 2).unwrap();
        let cfg = SieveConfig {
            l_primes: vec![BigUint::from(2u32), BigUint::from(3u32)],
            l_cofactor: false,
            f_factors: vec![0, 3],
        };
        let f = cfg.f_poly(&ctx).to_text(&ctx.field);
        assert_eq!(SieveConfig::parse(&ctx, &cfg.l_label(), &f).unwrap(), cfg);
    }
}
