//! Sufficient conditions for `(q, n)` to carry r-primitive k-normal elements
//! with prescribed trace and second coefficient, and the per-pair verdict.

mod sieve;
mod thresholds;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::census::{brute_gamma, GammaReport};
use crate::gfpoly::{Divisor, Poly};
use crate::numthy::{arith::pow_mod, Budget, FactorCache, NoCache, PrimePower};
use crate::tower::FieldTower;
use crate::{Error, Result};

pub use sieve::{
    baseline_check, context, serves_zero_class, sieve_check, sieve_search, CheckOutcome, PairContext,
    SearchResult, SieveConfig, SieveEval,
};
pub use thresholds::{
    bound_reduce, chain_preset, reduce_step, threshold_ineq7, threshold_smallq, ChainPreset, ChainSpec,
    ChainStep, LBound,
};

/// Necessary conditions; `Err` carries the failed condition.
pub fn necessary_check(q: PrimePower, n: u32, r: u64, k: u32) -> std::result::Result<(), String> {
    if r == 2 && k == 2 {
        if q.p == 2 {
            return Err("q must be odd".into());
        }
        if n < 4 {
            return Err("n must be at least 4".into());
        }
        let qm = q.q as u128 % n as u128;
        let v = (qm * qm * qm + n as u128 - qm) % n as u128;
        if v.gcd(&(n as u128)) == 1 {
            return Err(format!("gcd(q^3 - q, n) = 1 for q = {}, n = {n}", q.q));
        }
    }
    if 2 * k >= n {
        return Err(format!("k < n/2 violated (k = {k}, n = {n})"));
    }
    if r == 0 || pow_mod(q.q % r, n as u64, r) != 1 % r {
        return Err(format!("r = {r} does not divide q^n - 1"));
    }
    let field = crate::gfpoly::BaseField::new(q);
    if crate::gfpoly::degree_k_divisors(&field, n as u64, k as usize).is_empty() {
        return Err(format!("x^n - 1 has no divisor of degree {k}"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    ExcludedNecessary,
    ProvenBaseline,
    ProvenSieve,
    VerifiedBrute,
    Unresolved,
    IndeterminateFactoring,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::ExcludedNecessary => "EXCLUDED_NECESSARY",
            Status::ProvenBaseline => "PROVEN_BASELINE",
            Status::ProvenSieve => "PROVEN_SIEVE",
            Status::VerifiedBrute => "VERIFIED_BRUTE",
            Status::Unresolved => "UNRESOLVED",
            Status::IndeterminateFactoring => "INDETERMINATE_FACTORING",
        }
    }

    pub fn is_proven(self) -> bool {
        matches!(self, Status::ProvenBaseline | Status::ProvenSieve)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Status {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "EXCLUDED_NECESSARY" => Status::ExcludedNecessary,
            "PROVEN_BASELINE" => Status::ProvenBaseline,
            "PROVEN_SIEVE" => Status::ProvenSieve,
            "VERIFIED_BRUTE" => Status::VerifiedBrute,
            "UNRESOLVED" => Status::Unresolved,
            "INDETERMINATE_FACTORING" => Status::IndeterminateFactoring,
            _ => return Err(Error::Parse(format!("unknown status {s}"))),
        })
    }
}

/// `a != 0` (trace nonzero) or `a = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceClass {
    Nonzero,
    Zero,
}

impl TraceClass {
    pub fn label(self) -> &'static str {
        match self {
            TraceClass::Nonzero => "a!=0",
            TraceClass::Zero => "a=0",
        }
    }

    pub fn contains(self, a: u64) -> bool {
        (a == 0) == (self == TraceClass::Zero)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassState {
    /// No degree-k divisor serves the class, so the class is empty.
    Infeasible,
    Certified,
    /// Every `(a, b)` of the class found by exhaustive search.
    Brute,
    Uncertified,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Baseline,
    Sieve,
}

/// What was established for one trace class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassEvidence {
    pub class: TraceClass,
    pub state: ClassState,
    pub method: Option<Method>,
    /// The divisor `g`, as polynomial text.
    pub g: Option<String>,
    pub config: Option<SieveConfig>,
    pub l: Option<String>,
    pub f: Option<String>,
    pub d: Option<f64>,
    pub s: Option<f64>,
    pub rhs_ln: Option<f64>,
    /// Brute force: a witness element for the first `(a, b)` of the class.
    pub witness: Option<String>,
    /// Brute force: `(a, b)` of the class with no element.
    pub missing: Vec<(String, String)>,
}

impl ClassEvidence {
    fn empty(class: TraceClass, state: ClassState) -> Self {
        ClassEvidence {
            class,
            state,
            method: None,
            g: None,
            config: None,
            l: None,
            f: None,
            d: None,
            s: None,
            rhs_ln: None,
            witness: None,
            missing: Vec::new(),
        }
    }

    fn from_eval(class: TraceClass, state: ClassState, ctx: &PairContext, g: &Divisor, cfg: &SieveConfig, eval: &SieveEval) -> Self {
        let method = match state {
            ClassState::Certified if cfg.is_degenerate(ctx) => Some(Method::Baseline),
            ClassState::Certified => Some(Method::Sieve),
            _ => None,
        };
        ClassEvidence {
            class,
            state,
            method,
            g: Some(g.poly.to_text(&ctx.field)),
            config: Some(cfg.clone()),
            l: Some(cfg.l_label()),
            f: Some(cfg.f_poly(ctx).to_text(&ctx.field)),
            d: Some(num_traits::ToPrimitive::to_f64(&eval.d).unwrap_or(f64::NAN)),
            s: Some(num_traits::ToPrimitive::to_f64(&eval.s).unwrap_or(f64::NAN)),
            rhs_ln: Some(eval.rhs_ln),
            witness: None,
            missing: Vec::new(),
        }
    }

    pub fn is_covered(&self) -> bool {
        matches!(self.state, ClassState::Infeasible | ClassState::Certified | ClassState::Brute)
    }
}

/// Verdict for one `(q, n, r, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub q: u64,
    pub n: u32,
    pub r: u64,
    pub k: u32,
    pub status: Status,
    pub reason: Option<String>,
    pub classes: Vec<ClassEvidence>,
    pub omega: Option<(u32, u32)>,
    pub factor_complete: bool,
    pub cofactor: Option<String>,
    pub lhs_ln: Option<f64>,
}

impl PairVerdict {
    pub fn class(&self, class: TraceClass) -> Option<&ClassEvidence> {
        self.classes.iter().find(|c| c.class == class)
    }

    /// `a!=0:certified,a=0:infeasible`-style summary.
    pub fn coverage(&self) -> String {
        self.classes
            .iter()
            .map(|c| {
                let state = match c.state {
                    ClassState::Infeasible => "infeasible",
                    ClassState::Certified => "certified",
                    ClassState::Brute => "brute",
                    ClassState::Uncertified => "uncertified",
                    ClassState::Indeterminate => "indeterminate",
                };
                format!("{}:{state}", c.class.label())
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Knobs for [`classify_pair`].
#[derive(Clone, Debug)]
#[derive(Default)]
pub struct ClassifyOptions {
    pub budget: Budget,
    /// Fall back to exhaustive search when `q^n` is at most this.
    pub brute_ceiling: Option<u64>,
    /// Restrict the search to this `g` for its trace class.
    pub g: Option<Poly>,
}


fn class_divisors(ctx: &PairContext, class: TraceClass, explicit: Option<&Divisor>) -> Vec<Divisor> {
    let want_zero = class == TraceClass::Zero;
    if let Some(g) = explicit {
        if serves_zero_class(ctx, g) == want_zero {
            return vec![g.clone()];
        }
    }
    ctx.degree_k_divisors()
        .into_iter()
        .filter(|g| serves_zero_class(ctx, g) == want_zero)
        .collect()
}

fn evaluate_class(ctx: &PairContext, class: TraceClass, gs: &[Divisor]) -> ClassEvidence {
    if gs.is_empty() {
        return ClassEvidence::empty(class, ClassState::Infeasible);
    }
    let degenerate = SieveConfig::degenerate(ctx);
    // baseline only depends on W((x^n - 1)/g)
    let remaining = |g: &Divisor| {
        g.exponents
            .iter()
            .zip(&ctx.xn.factors)
            .filter(|(&e, (_, m))| e < *m)
            .count()
    };
    let g0 = gs.iter().min_by_key(|g| remaining(g)).unwrap();
    let base = baseline_check(ctx, g0);
    if base.outcome == CheckOutcome::Proven {
        return ClassEvidence::from_eval(class, ClassState::Certified, ctx, g0, &degenerate, &base);
    }
    let (found, indeterminate) = sieve_search(ctx, gs);
    let indeterminate = indeterminate || base.outcome == CheckOutcome::Indeterminate;
    match found {
        Some(r) if r.eval.outcome == CheckOutcome::Proven => {
            ClassEvidence::from_eval(class, ClassState::Certified, ctx, &r.g, &r.config, &r.eval)
        }
        Some(r) => {
            let state = if indeterminate { ClassState::Indeterminate } else { ClassState::Uncertified };
            ClassEvidence::from_eval(class, state, ctx, &r.g, &r.config, &r.eval)
        }
        None => {
            let state = if indeterminate { ClassState::Indeterminate } else { ClassState::Uncertified };
            ClassEvidence::from_eval(class, state, ctx, g0, &degenerate, &base)
        }
    }
}

fn evaluate(ctx: &PairContext, explicit: Option<&Divisor>) -> Vec<ClassEvidence> {
    [TraceClass::Nonzero, TraceClass::Zero]
        .into_iter()
        .map(|class| evaluate_class(ctx, class, &class_divisors(ctx, class, explicit)))
        .collect()
}

fn apply_brute(classes: &mut [ClassEvidence], report: &GammaReport) {
    let field = report.field();
    for ev in classes.iter_mut() {
        if ev.is_covered() {
            continue;
        }
        let entries: Vec<_> = report.entries.iter().filter(|e| ev.class.contains(e.a)).collect();
        ev.missing = entries
            .iter()
            .filter(|e| e.witness.is_none())
            .map(|e| (field.format(e.a), field.format(e.b)))
            .collect();
        ev.witness = entries.iter().find_map(|e| e.witness.clone());
        if ev.missing.is_empty() {
            ev.state = ClassState::Brute;
        }
    }
}

/// Runs the full pipeline for one pair.
pub fn classify_pair(q: PrimePower, n: u32, r: u64, k: u32, opts: &ClassifyOptions) -> Result<PairVerdict> {
    classify_pair_cached(q, n, r, k, opts, &NoCache)
}

pub fn classify_pair_cached(
    q: PrimePower,
    n: u32,
    r: u64,
    k: u32,
    opts: &ClassifyOptions,
    cache: &dyn FactorCache,
) -> Result<PairVerdict> {
    let mut verdict = PairVerdict {
        q: q.q,
        n,
        r,
        k,
        status: Status::ExcludedNecessary,
        reason: None,
        classes: Vec::new(),
        omega: None,
        factor_complete: true,
        cofactor: None,
        lhs_ln: None,
    };
    if let Err(reason) = necessary_check(q, n, r, k) {
        verdict.reason = Some(reason);
        return Ok(verdict);
    }
    let mut ctx = PairContext::with_cache(q, n, r, k, opts.budget.trial_only(), cache);
    let explicit = match &opts.g {
        Some(g) => Some(ctx.divisor_of(g)?),
        None => None,
    };
    let mut classes = evaluate(&ctx, explicit.as_ref());
    let needs_more = classes.iter().any(|c| c.state == ClassState::Indeterminate);
    if needs_more && opts.budget.rho_iterations > 0 {
        ctx.refactor(opts.budget, cache);
        classes = evaluate(&ctx, explicit.as_ref());
    }
    if !classes.iter().all(ClassEvidence::is_covered) {
        if let Some(ceiling) = opts.brute_ceiling {
            if let Ok(tower) = FieldTower::with_ceiling(q.q, n as usize, ceiling) {
                let report = brute_gamma(&tower, r, k as usize)?;
                apply_brute(&mut classes, &report);
            }
        }
    }
    let total = &ctx.order.total;
    verdict.omega = Some((total.omega_lower(), total.omega_upper()));
    verdict.factor_complete = total.is_complete();
    if !total.is_complete() {
        verdict.cofactor = Some(total.cofactor.to_string());
    }
    verdict.lhs_ln = Some(ctx.lhs_ln());
    verdict.status = if classes.iter().all(|c| matches!(c.state, ClassState::Infeasible | ClassState::Certified)) {
        if classes.iter().any(|c| c.method == Some(Method::Sieve)) {
            Status::ProvenSieve
        } else {
            Status::ProvenBaseline
        }
    } else if classes.iter().all(ClassEvidence::is_covered) {
        Status::VerifiedBrute
    } else if classes.iter().any(|c| c.state == ClassState::Indeterminate) {
        Status::IndeterminateFactoring
    } else {
        Status::Unresolved
    };
    verdict.classes = classes;
    Ok(verdict)
}

/// Re-evaluates every certified class of `verdict` from its recorded evidence.
pub fn replay(verdict: &PairVerdict, budget: Budget) -> Result<bool> {
    let pp = PrimePower::new(verdict.q)?;
    let ctx = PairContext::new(pp, verdict.n, verdict.r, verdict.k, budget);
    for ev in &verdict.classes {
        match ev.state {
            ClassState::Certified => {
                let (Some(g), Some(l), Some(f)) = (&ev.g, &ev.l, &ev.f) else {
                    return Ok(false);
                };
                let g = ctx.divisor_of(&Poly::parse(g, &ctx.field)?)?;
                if serves_zero_class(&ctx, &g) != (ev.class == TraceClass::Zero) {
                    return Ok(false);
                }
                let cfg = SieveConfig::parse(&ctx, l, f)?;
                if sieve_check(&ctx, &g, &cfg)?.outcome != CheckOutcome::Proven {
                    return Ok(false);
                }
            }
            ClassState::Infeasible => {
                let gs = class_divisors(&ctx, ev.class, None);
                if !gs.is_empty() {
                    return Ok(false);
                }
            }
            _ => {}
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(q: u64) -> PrimePower {
        PrimePower::new(q).unwrap()
    }

    #[test]
    fn necessary_examples() {
        assert!(necessary_check(pp(3), 9, 2, 2).is_ok());
        assert!(necessary_check(pp(5), 11, 2, 2).is_err());
        let reason = necessary_check(pp(3), 4, 2, 2).unwrap_err();
        assert!(reason.contains("k < n/2"));
        assert!(necessary_check(pp(3), 7, 5, 1).is_err());
    }

    #[test]
    fn classify_examples() {
        let opts = ClassifyOptions::default();
        let v = classify_pair(pp(3), 11, 2, 2, &opts).unwrap();
        assert_eq!(v.status, Status::ExcludedNecessary);
        let v = classify_pair(pp(11), 15, 2, 2, &opts).unwrap();
        assert!(v.status.is_proven(), "{v:?}");
        assert!(replay(&v, Budget::default()).unwrap());
        let v = classify_pair(pp(23), 11, 2, 2, &opts).unwrap();
        assert_eq!(v.status, Status::Unresolved);
    }

    #[test]
    fn infeasible_class_is_recorded() {
        let v = classify_pair(pp(3), 27, 2, 2, &ClassifyOptions::default()).unwrap();
        assert!(v.status.is_proven());
        assert_eq!(v.class(TraceClass::Nonzero).unwrap().state, ClassState::Infeasible);
        assert_eq!(v.coverage(), "a!=0:infeasible,a=0:certified");
    }

    #[test]
    fn brute_fallback() {
        let opts = ClassifyOptions {
            brute_ceiling: Some(20_000),
            ..ClassifyOptions::default()
        };
        let v = classify_pair(pp(3), 9, 2, 2, &opts).unwrap();
        assert_eq!(v.status, Status::VerifiedBrute, "{v:?}");
    }
}
