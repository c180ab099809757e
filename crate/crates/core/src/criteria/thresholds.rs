//! Closed-form thresholds on `q` and `n`, and the iterative bound-reduction chain.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::numthy::{ln_c_nu, primes_up_to, MAX_NU};
use crate::{Error, Result};

/// `ln` of the bound `(2^n C_nu)^{2nu/((n-8)nu - 2n)}` beyond which every `q` works (`r = k = 2`).
pub fn threshold_ineq7(nu: f64, n: u32) -> Result<f64> {
    let nf = n as f64;
    let min = if n > 8 { 2.0 * nf / (nf - 8.0) } else { f64::INFINITY };
    if !(nu > min && nu <= MAX_NU) {
        return Err(Error::InvalidNu { nu, min });
    }
    let exponent = 2.0 * nu / ((nf - 8.0) * nu - 2.0 * nf);
    Ok((nf * LN_2 + ln_c_nu(nu)) * exponent)
}

/// Smallest `n` beyond which every extension of `F_q` works (`q` in `{3, 5, 7, 9}`, `r = k = 2`).
pub fn threshold_smallq(q: u64, nu: f64) -> Result<u32> {
    let lq = (q as f64).ln();
    let (const_ln, w_rate) = match q {
        3 => ((10.0 / 3.0) * LN_2, LN_2 / 3.0),
        5 | 7 | 9 => (2.0 * LN_2, 0.75 * LN_2),
        _ => return Err(Error::Invalid(format!("small-q threshold is defined for q in {{3,5,7,9}}, got {q}"))),
    };
    let min = 1.0 / (0.5 - w_rate / lq);
    if !(nu > min && nu <= MAX_NU) {
        return Err(Error::InvalidNu { nu, min });
    }
    let value = (const_ln + ln_c_nu(nu) + 4.0 * lq) / ((0.5 - 1.0 / nu) * lq - w_rate);
    Ok(value.floor() as u32 + 1)
}

/// How `W(l)` is bounded in a reduction step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LBound {
    /// `l | q^d - 1`-type value: `W(l) <= C_nu q^{d/nu}`.
    Degree(u32),
    /// `W(l)` at most this constant.
    Fixed(u64),
}

/// Parameters of one bound-reduction chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: u32,
    pub r: u64,
    pub k: u32,
    /// Sieving primes are `special` and the primes `= 1 (mod modulus)`.
    pub modulus: u64,
    pub special: Option<u64>,
    pub l: LBound,
    /// Degree in `q` of the integer whose primes are sieved.
    pub cofactor_degree: u32,
    /// Bound on the number of irreducible factors of `x^n - 1` outside `f`.
    pub t_max: u32,
}

/// Outcome of one reduction step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub ln_bound: f64,
    pub nu: Option<f64>,
    pub s: usize,
    pub inverse_sum: f64,
    pub d: f64,
    pub big_s: f64,
}

impl ChainStep {
    pub fn bound(&self) -> f64 {
        self.ln_bound.exp()
    }
}

/// Cumulative `ln` product and inverse sum of the sieving-prime set.
struct SievePrimes {
    ln_prefix: Vec<f64>,
    inv_prefix: Vec<f64>,
}

impl SievePrimes {
    fn covering(spec: &ChainSpec, ln_target: f64) -> Self {
        let mut limit = 1u64 << 16;
        loop {
            let mut ln_prefix = vec![0.0];
            let mut inv_prefix = vec![0.0];
            for p in primes_up_to(limit) {
                if Some(p) == spec.special || p % spec.modulus == 1 {
                    let pf = p as f64;
                    ln_prefix.push(ln_prefix.last().unwrap() + pf.ln());
                    inv_prefix.push(inv_prefix.last().unwrap() + 1.0 / pf);
                }
            }
            if *ln_prefix.last().unwrap() > ln_target {
                return SievePrimes { ln_prefix, inv_prefix };
            }
            limit *= 4;
        }
    }

    /// Largest `s` whose first `s` primes have product at most `e^{ln_cap}`.
    fn count_within(&self, ln_cap: f64) -> usize {
        self.ln_prefix.partition_point(|&x| x <= ln_cap) - 1
    }
}

fn nu_grid() -> impl Iterator<Item = f64> {
    (21..=(MAX_NU * 10.0) as u32).map(|i| i as f64 / 10.0)
}

fn step_at(spec: &ChainSpec, ln_b: f64, s: usize, ss: f64, nu: Option<f64>) -> Option<ChainStep> {
    let (e, ln_wl) = match (spec.l, nu) {
        (LBound::Degree(d), Some(nu)) => (
            spec.n as f64 / 2.0 - spec.k as f64 - 2.0 - d as f64 / nu,
            ln_c_nu(nu),
        ),
        (LBound::Fixed(w), _) => (spec.n as f64 / 2.0 - spec.k as f64 - 2.0, (w as f64).ln()),
        _ => unreachable!(),
    };
    if e <= 0.0 {
        return None;
    }
    let two_r = (2 * spec.r) as f64;
    let mut ln_floor = ln_b;
    let mut last = None;
    for _ in 0..200 {
        let d = 1.0 - ss - spec.t_max as f64 * (-ln_floor).exp();
        if d <= 0.0 {
            return None;
        }
        let big_s = (s as f64 + spec.t_max as f64 - 1.0) / d + 2.0;
        let ln_bound = ((two_r * big_s).ln() + ln_wl) / e;
        let step = ChainStep {
            ln_bound,
            nu,
            s,
            inverse_sum: ss,
            d,
            big_s,
        };
        if (ln_bound - ln_floor).abs() < 1e-12 {
            return Some(step);
        }
        last = Some(step);
        ln_floor = ln_bound;
    }
    last
}

/// One reduction step from the current bound `e^{ln_b}`, optimised over `nu`.
pub fn reduce_step(spec: &ChainSpec, ln_b: f64) -> Option<ChainStep> {
    let ln_cap = spec.cofactor_degree as f64 * ln_b + LN_2;
    let primes = SievePrimes::covering(spec, ln_cap);
    let s = primes.count_within(ln_cap);
    let ss = primes.inv_prefix[s];
    let candidates: Vec<Option<f64>> = match spec.l {
        LBound::Degree(_) => nu_grid().map(Some).collect(),
        LBound::Fixed(_) => vec![None],
    };
    candidates
        .into_iter()
        .filter_map(|nu| step_at(spec, ln_b, s, ss, nu))
        .min_by(|a, b| a.ln_bound.total_cmp(&b.ln_bound))
}

/// Iterates [`reduce_step`] from `e^{start_ln}` until the improvement drops below `1e-3` in `ln`.
pub fn bound_reduce(spec: &ChainSpec, start_ln: f64) -> Vec<ChainStep> {
    let mut steps = Vec::new();
    let mut ln_b = start_ln;
    while let Some(step) = reduce_step(spec, ln_b) {
        if step.ln_bound > ln_b - 1e-3 {
            break;
        }
        ln_b = step.ln_bound;
        steps.push(step);
    }
    steps
}

/// A named chain: its starting bound and successive stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainPreset {
    pub n: u32,
    pub start_ln: f64,
    pub stages: Vec<ChainSpec>,
}

impl ChainPreset {
    /// Runs every stage, each starting where the previous one stopped.
    pub fn run(&self) -> Vec<Vec<ChainStep>> {
        let mut ln_b = self.start_ln;
        let mut out = Vec::new();
        for spec in &self.stages {
            let steps = bound_reduce(spec, ln_b);
            if let Some(last) = steps.last() {
                ln_b = last.ln_bound;
            }
            out.push(steps);
        }
        out
    }

    /// Final bound of the whole chain, in `ln`.
    pub fn final_ln(&self) -> f64 {
        self.run()
            .iter()
            .flatten()
            .map(|s| s.ln_bound)
            .fold(self.start_ln, f64::min)
    }
}

/// The chains for `n` in `9..=14` with `r = k = 2`.
pub fn chain_preset(n: u32) -> Option<ChainPreset> {
    let spec = |modulus, special, l, cofactor_degree| ChainSpec {
        n,
        r: 2,
        k: 2,
        modulus,
        special: Some(special),
        l,
        cofactor_degree,
        t_max: n,
    };
    let (nu, stages) = match n {
        9 => (
            19.6,
            vec![
                spec(9, 3, LBound::Degree(3), 6),
                spec(3, 3, LBound::Degree(1), 8),
                spec(3, 3, LBound::Fixed(8), 6),
            ],
        ),
        10 => (11.9, vec![spec(5, 5, LBound::Degree(2), 8)]),
        11 => (9.7, vec![spec(11, 11, LBound::Degree(1), 10)]),
        12 => (8.6, vec![spec(3, 3, LBound::Degree(4), 8)]),
        13 => (8.1, vec![spec(13, 13, LBound::Degree(1), 12)]),
        14 => (7.8, vec![spec(7, 7, LBound::Degree(2), 12)]),
        _ => return None,
    };
    Some(ChainPreset {
        n,
        start_ln: threshold_ineq7(nu, n).ok()?,
        stages,
    })
}
