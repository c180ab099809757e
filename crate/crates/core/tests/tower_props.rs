use std::collections::HashMap;

use knpoly::gfpoly::{divisors_of_degree, phi_q, Poly};
use knpoly::tower::FieldTower;
use num_bigint::BigUint;
use num_integer::Integer;

const SMALL: [(u64, usize); 3] = [(3, 4), (5, 4), (3, 6)];

#[test]
fn census_identity() {
    for (q, n) in SMALL {
        let t = FieldTower::new(q, n).unwrap();
        let mut counts: HashMap<Poly, u64> = HashMap::new();
        for a in t.elements() {
            *counts.entry(t.fq_order(&a)).or_default() += 1;
        }
        let total: u64 = counts.values().sum();
        assert_eq!(total, t.size());
        for (g, c) in &counts {
            assert_eq!(BigUint::from(*c), phi_q(g, t.base()), "q={q} n={n} g={}", g.to_text(t.base()));
        }
        // every divisor is some element's order
        let divisor_total: usize = (0..=n).map(|d| divisors_of_degree(t.xn_factors(), d, t.base()).len()).sum();
        assert_eq!(counts.len(), divisor_total);
    }
}

#[test]
fn second_coefficient_identity() {
    for (q, n) in SMALL {
        let t = FieldTower::new(q, n).unwrap();
        let f = t.base();
        let half = f.inv(f.from_int(2));
        for a in t.elements() {
            let mp = t.min_poly(&a).unwrap();
            if mp.degree() != n {
                continue;
            }
            let tr = t.trace(&a);
            assert_eq!(mp.a1(), f.neg(tr));
            let expected = f.mul(half, f.sub(f.mul(tr, tr), t.trace_sq(&a)));
            assert_eq!(mp.a2(), expected);
        }
    }
}

#[test]
fn module_action_gives_exact_k_normality() {
    for (q, n) in SMALL {
        let t = FieldTower::new(q, n).unwrap();
        let gs: Vec<_> = (0..=2).flat_map(|k| divisors_of_degree(t.xn_factors(), k, t.base())).collect();
        for b in t.elements().filter(|b| t.is_normal(b)) {
            for g in &gs {
                let a = t.module_action(&g.poly, &b);
                assert_eq!(t.normality_defect(&a), g.degree());
                assert_eq!(t.knormal_from_normal(&g.poly, &b).unwrap(), a);
            }
        }
    }
}

#[test]
fn trace_fibres_are_equal() {
    for (q, n) in SMALL {
        let t = FieldTower::new(q, n).unwrap();
        let mut fibres = vec![0u64; q as usize];
        for a in t.elements() {
            fibres[t.trace(&a) as usize] += 1;
        }
        assert!(fibres.iter().all(|&c| c == q.pow(n as u32 - 1)));
    }
}

#[test]
fn nonzero_trace_iff_x_minus_1_free() {
    for (q, n) in [(3u64, 3usize), (3, 6), (5, 5), (3, 4), (5, 4)] {
        let t = FieldTower::new(q, n).unwrap();
        let xm1 = Poly::linear(t.base(), 1);
        for a in t.elements() {
            assert_eq!(t.trace(&a) != 0, t.is_h_free(&a, &xm1).unwrap(), "q={q} n={n}");
        }
    }
}

#[test]
fn freeness_matches_definitions() {
    for (q, n) in [(3u64, 4usize), (5, 3), (7, 2)] {
        let t = FieldTower::new(q, n).unwrap();
        let f = t.base();
        let order = t.size() - 1;
        let xn = Poly::xn_minus_1(f, n);
        let es: Vec<u64> = (1..=order).filter(|e| order.is_multiple_of(*e)).collect();
        let hs: Vec<_> = (0..=n).flat_map(|d| divisors_of_degree(t.xn_factors(), d, f)).collect();
        for a in t.elements().filter(|a| !a.is_zero()) {
            let ord = t.mult_order(&a).unwrap();
            assert_eq!(order % ord, 0);
            assert!(t.pow(&a, ord) == t.one());
            for &e in &es {
                assert_eq!(t.is_e_free(&a, e).unwrap(), e.gcd(&(order / ord)) == 1);
            }
            let big_ord = t.fq_order(&a);
            assert!(big_ord.divides(&xn, f));
            assert!(t.module_action(&big_ord, &a).is_zero());
            let co = xn.exact_div(&big_ord, f).unwrap();
            for h in &hs {
                assert_eq!(t.is_h_free(&a, &h.poly).unwrap(), h.poly.gcd(&co, f).is_one());
            }
        }
    }
}
