//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines reach stdout uncaptured.
//! Criteria listed in `KNOWN_RED` are reported but do not fail the run.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use knpoly::census::{brute_gamma, char_sum_validate, count_n, LogTable};
use knpoly::criteria::{
    chain_preset, classify_pair, classify_pair_cached, necessary_check, threshold_ineq7, threshold_smallq,
    ClassState, ClassifyOptions, Status, TraceClass,
};
use knpoly::gfpoly::{divisors_of_degree, phi_q, Poly};
use knpoly::numthy::{c_nu, enumerate_prime_powers, special_primes, PrimePower};
use knpoly::tower::FieldTower;
use knpoly_cli::cache::FileCache;
use knpoly_cli::scan::{run_scan, ScanJob};
use num_bigint::BigUint;
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_RED: [u32; 1] = [5];
const SEED: u64 = 0x6b6e_706f_6c79;

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn unresolved_in_scan(q: u64, n_max: u32, gcd_with: u64) -> Vec<u32> {
    let job = ScanJob {
        q_min: q,
        q_max: q,
        n_min: 9,
        n_max,
        r: 2,
        k: 2,
        budget: Default::default(),
        brute_ceiling: None,
        jobs: 0,
        timing: false,
    };
    let out = run_scan(&job, &FileCache::in_memory(), None).expect("scan");
    out.rows
        .iter()
        .filter(|r| (r.n as u64).gcd(&gcd_with) != 1)
        .filter(|r| !r.status().expect("status").is_proven())
        .map(|r| r.n)
        .collect()
}

fn exception_lists() -> Outcome {
    let expected: [(u64, u64, u32, &[u32]); 4] = [
        (3, 24, 74, &[9, 10, 12, 14, 15, 16, 18]),
        (5, 120, 59, &[9, 10, 12]),
        (7, 336, 59, &[9, 10, 12]),
        (9, 720, 59, &[9, 10, 12]),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (q, g, n_max, want) in expected {
        let got = unresolved_in_scan(q, n_max, g);
        let want: BTreeSet<u32> = want.iter().copied().collect();
        let got_set: BTreeSet<u32> = got.iter().copied().collect();
        let extra: Vec<_> = got_set.difference(&want).collect();
        let improved: Vec<_> = want.difference(&got_set).collect();
        if !extra.is_empty() {
            ok = false;
        }
        notes.push(format!("q={q} {got:?}"));
        if !improved.is_empty() {
            notes.push(format!("q={q} strict improvement {improved:?}"));
        }
        if !extra.is_empty() {
            notes.push(format!("q={q} unexpected {extra:?}"));
        }
    }
    check(ok, notes.join("; "))
}

fn within(value_ln: f64, target: f64, rel: f64) -> bool {
    ((value_ln - target.ln()).exp() - 1.0).abs() <= rel
}

fn thresholds() -> Outcome {
    let mut bad = Vec::new();
    for (q, nu, n) in [(3u64, 6.6, 75u32), (5, 8.4, 192), (7, 7.5, 83), (9, 7.2, 60)] {
        let got = threshold_smallq(q, nu).expect("smallq");
        if got != n {
            bad.push(format!("smallq q={q}: {got} != {n}"));
        }
    }
    let table = [
        (7.9, 11.0, 88u32),
        (7.3, 18.0, 50),
        (7.2, 26.0, 40),
        (7.1, 103.0, 25),
        (7.1, 472.0, 20),
        (7.3, 4015.0, 17),
        (7.4, 14356.0, 16),
        (7.6, 93903.0, 15),
    ];
    for (nu, q, n) in table {
        let b = threshold_ineq7(nu, n).expect("ineq7").exp();
        if !(b <= q && b > q / 2.0) {
            bad.push(format!("table row nu={nu} n={n}: {b:.1} vs {q}"));
        }
    }
    // mantissa and decimal exponent, compared in logs
    let list = [
        (7.8, 14u32, 1.90f64, 6.0),
        (8.1, 13, 4.34, 8.0),
        (8.6, 12, 7.02, 13.0),
        (9.7, 11, 3.35, 30.0),
        (11.9, 10, 8.34, 161.0),
    ];
    for (nu, n, mant, exp10) in list {
        let ln = threshold_ineq7(nu, n).expect("ineq7");
        let target_ln = mant.ln() + exp10 * std::f64::consts::LN_10;
        if ((ln - target_ln).exp() - 1.0).abs() > 0.01 {
            bad.push(format!("n={n} nu={nu}: ln {ln:.4} vs {target_ln:.4}"));
        }
    }
    check(bad.is_empty(), if bad.is_empty() { "4 smallq, 8 table rows, 5 list values".into() } else { bad.join("; ") })
}

fn constants_n10() -> Outcome {
    let limit_ln = 5.68f64.ln() + 1297.0 * std::f64::consts::LN_10;
    let seq = special_primes(Some(5), 5, 1, 400);
    let mut ln = 0.0;
    let mut s = 0;
    for p in &seq.primes {
        ln += (*p as f64).ln();
        if ln > limit_ln {
            break;
        }
        s += 1;
    }
    let plain = special_primes(None, 5, 1, 362);
    let inv: f64 = seq.primes[..s].iter().map(|&p| 1.0 / p as f64).sum();
    let d = 1.0 - inv - 10.0 / 1e6;
    let big_s = (s as f64 + 9.0) / d + 2.0;
    let nu = 5.4;
    let bound = (4.0 * c_nu(nu) * big_s).powf(nu / (nu - 2.0));
    let ok = s == 362
        && plain.inverse_sum() < 0.5519
        && (big_s * 100.0).floor() / 100.0 <= 830.11
        && within(bound.ln(), 3.533e7, 0.005);
    check(
        ok,
        format!(
            "s={s}, inverse sum of 362 primes 1 mod 5 = {:.6}, S_s with 5 = {inv:.6}, S={big_s:.4}, bound={bound:.4e}",
            plain.inverse_sum()
        ),
    )
}

fn chains() -> Outcome {
    let n10 = chain_preset(10).unwrap().final_ln().exp();
    let n14 = chain_preset(14).unwrap().final_ln().exp();
    let n9 = chain_preset(9).unwrap();
    let stages: Vec<f64> = n9
        .run()
        .iter()
        .map(|steps| steps.last().map_or(f64::INFINITY, |s| s.ln_bound.exp()))
        .collect();
    let quoted = [1.26e51, 6.56e14, 3.31e7];
    let n9_ok = stages.len() == 3 && stages.iter().zip(quoted).all(|(&b, t)| b / t <= 2.0 && t / b <= 2.0);
    let ok = n10 <= 2.0 * 496197.0 && n14 <= 60.0 && n9_ok;
    check(
        ok,
        format!(
            "n=10 {n10:.4e}, n=14 {n14:.2}, n=9 {}",
            stages.iter().map(|b| format!("{b:.4e}")).collect::<Vec<_>>().join(" -> ")
        ),
    )
}

fn spot_checks() -> Outcome {
    let opts = ClassifyOptions::default();
    let mut wrong = Vec::new();
    let mut targets: Vec<(u64, u32)> = vec![(29, 14), (23, 11), (43, 11)];
    targets.extend([11u64, 13, 17, 19, 23, 25, 37].iter().map(|&q| (q, 12)));
    for (q, n) in targets {
        let v = classify_pair(PrimePower::new(q).unwrap(), n, 2, 2, &opts).unwrap();
        if v.status != Status::Unresolved {
            wrong.push(format!("({q},{n}) {}", v.status));
        }
    }
    let rows: [(u64, u64, u32, u32); 7] = [
        (11, 18, 50, 88),
        (11, 26, 40, 50),
        (11, 103, 25, 40),
        (11, 472, 20, 25),
        (11, 4015, 17, 20),
        (11, 14356, 16, 17),
        (11, 93903, 15, 16),
    ];
    let qs: Vec<Vec<PrimePower>> = rows.iter().map(|&(lo, hi, _, _)| enumerate_prime_powers(lo, hi - 1)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut sampled = 0;
    let mut samples = BTreeSet::new();
    while sampled < 50 {
        let i = rng.gen_range(0..rows.len());
        let pp = *qs[i].choose(&mut rng).unwrap();
        let n = rng.gen_range(rows[i].2..rows[i].3);
        if necessary_check(pp, n, 2, 2).is_err() || !samples.insert((pp.q, n)) {
            continue;
        }
        sampled += 1;
        let v = classify_pair(pp, n, 2, 2, &opts).unwrap();
        if !v.status.is_proven() {
            wrong.push(format!("({},{n}) {}", pp.q, v.status));
        }
    }
    check(
        wrong.is_empty(),
        if wrong.is_empty() { "10 exception pairs unresolved, 50 sampled pairs proven".into() } else { wrong.join("; ") },
    )
}

fn ground_truth() -> Outcome {
    let mut bad = Vec::new();
    for (q, n) in [(3u64, 4usize), (5, 4), (3, 6)] {
        let t = FieldTower::new(q, n).unwrap();
        let f = t.base();
        let mut counts: HashMap<Poly, u64> = HashMap::new();
        for a in t.elements() {
            *counts.entry(t.fq_order(&a)).or_default() += 1;
        }
        let divisors: Vec<_> = (0..=n).flat_map(|d| divisors_of_degree(t.xn_factors(), d, f)).collect();
        let census_ok = counts.values().sum::<u64>() == t.size()
            && counts.len() == divisors.len()
            && divisors
                .iter()
                .all(|g| counts.get(&g.poly).map(|&c| BigUint::from(c)) == Some(phi_q(&g.poly, f)));
        if !census_ok {
            bad.push(format!("census F_{q}^{n}"));
        }
        let half = f.inv(f.from_int(2));
        let coeff_ok = t.elements().all(|a| {
            let mp = t.min_poly(&a).unwrap();
            if mp.degree() != n {
                return true;
            }
            let tr = t.trace(&a);
            mp.a2() == f.mul(half, f.sub(f.mul(tr, tr), t.trace_sq(&a)))
        });
        if !coeff_ok {
            bad.push(format!("second coefficient F_{q}^{n}"));
        }
        let small: Vec<_> = divisors.iter().filter(|g| g.degree() <= 2).collect();
        let knormal_ok = t
            .elements()
            .filter(|b| t.is_normal(b))
            .all(|b| small.iter().all(|g| t.normality_defect(&t.module_action(&g.poly, &b)) == g.degree()));
        if !knormal_ok {
            bad.push(format!("k-normality F_{q}^{n}"));
        }
    }
    let t = FieldTower::new(3, 9).unwrap();
    let f = t.base();
    let lt = LogTable::new(&t).unwrap();
    let rep = brute_gamma(&t, 2, 2).unwrap();
    let xn = Poly::xn_minus_1(f, 9);
    let gs = divisors_of_degree(t.xn_factors(), 2, f);
    let mut agree = 0;
    for a in 0..3 {
        for b in 0..3 {
            let any = gs
                .iter()
                .any(|g| count_n(&t, &lt, 2, &g.poly, t.size() - 1, &xn, a, b).unwrap() > 0);
            if any == (rep.entry(a, b).count > 0) {
                agree += 1;
            } else {
                bad.push(format!("dual path F_3^9 ({a},{b})"));
            }
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() { format!("3 fields, dual path agrees on {agree}/9 trace pairs") } else { bad.join("; ") },
    )
}

fn character_sums() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (q, n) in [(3u64, 2usize), (3, 3)] {
        let t = FieldTower::new(q, n).unwrap();
        let f = t.base();
        let order = t.size() - 1;
        for e in (1..=order).filter(|e| order.is_multiple_of(*e)) {
            for d in 0..=n {
                for h in divisors_of_degree(t.xn_factors(), d, f) {
                    worst = worst.max(char_sum_validate(&t, e, &h.poly, t.size() as usize).unwrap());
                    checked += 1;
                }
            }
        }
    }
    check(worst < 1e-6, format!("{checked} (e, h) cases on F_9 and F_27, max deviation {worst:.2e}"))
}

/// Proven verdicts checked against the exhaustive table on every field with q^n <= 2e7.
fn soundness() -> Outcome {
    let ceiling = 20_000_000u64;
    let mut pool = Vec::new();
    for pp in enumerate_prime_powers(3, 200) {
        for n in 2..=16u32 {
            if (pp.q as f64).powi(n as i32) > ceiling as f64 {
                continue;
            }
            for (r, k) in [(1u64, 0u32), (2, 0), (1, 1), (2, 1), (4, 1), (2, 2), (4, 2)] {
                if necessary_check(pp, n, r, k).is_ok() {
                    pool.push((pp, n, r, k));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    pool.shuffle(&mut rng);
    let cache = FileCache::in_memory();
    let mut big_budget = 120_000_000u64;
    let (mut tried, mut proven, mut checked) = (0, 0, 0);
    let mut counterexamples = Vec::new();
    for (pp, n, r, k) in pool {
        let size = pp.q.pow(n);
        tried += 1;
        let v = classify_pair_cached(pp, n, r, k, &ClassifyOptions::default(), &cache).unwrap();
        if !v.status.is_proven() {
            continue;
        }
        proven += 1;
        if size > 1_000_000 {
            if big_budget < size {
                continue;
            }
            big_budget -= size;
        }
        let t = FieldTower::with_ceiling(pp.q, n as usize, ceiling).unwrap();
        let rep = brute_gamma(&t, r, k as usize).unwrap();
        checked += 1;
        for class in &v.classes {
            let zero = class.class == TraceClass::Zero;
            let entries = rep.entries.iter().filter(|e| (e.a == 0) == zero);
            match class.state {
                ClassState::Certified | ClassState::Brute => {
                    for e in entries.filter(|e| e.count == 0) {
                        counterexamples.push(format!("({},{n},{r},{k}) missing ({},{})", pp.q, e.a, e.b));
                    }
                }
                ClassState::Infeasible => {
                    for e in entries.filter(|e| e.count > 0) {
                        counterexamples.push(format!("({},{n},{r},{k}) infeasible class hit ({},{})", pp.q, e.a, e.b));
                    }
                }
                _ => {}
            }
        }
    }
    check(
        counterexamples.is_empty() && checked > 0,
        format!(
            "{tried} pairs, {proven} proven, {checked} verified exhaustively, {} counterexamples{}",
            counterexamples.len(),
            if counterexamples.is_empty() { String::new() } else { format!(": {}", counterexamples.join("; ")) }
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "small-q exception lists", exception_lists),
        (2, "threshold reproduction", thresholds),
        (3, "n=10 sieve constants", constants_n10),
        (4, "bound-reduction chains", chains),
        (5, "exception pair spot checks", spot_checks),
        (6, "ground-truth properties", ground_truth),
        (7, "character-sum validation", character_sums),
        (8, "end-to-end soundness", soundness),
    ];
    let only: Option<u32> = std::env::var("KNPOLY_ACCEPTANCE").ok().and_then(|v| v.parse().ok());
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if out.ok { "PASS" } else { "FAIL" };
        let note = if !out.ok && KNOWN_RED.contains(&id) { " (known, see decisions)" } else { "" };
        println!("{tag} A{id} {name} [{secs:.1}s]{note}: {}", out.detail);
        if !out.ok && !KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures {unexpected:?}");
        std::process::exit(1);
    }
}
