use num_integer::Integer;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Exponent of the largest power of `p` dividing `n` (n > 0).
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Prime factorization of a machine integer by trial division then rho.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut n = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            let v = valuation(n, p);
            n /= p.pow(v);
            out.push((p, v));
        }
    }
    let mut stack = vec![n];
    let mut found: Vec<u64> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if super::prime::is_prime(m) {
            found.push(m);
            continue;
        }
        let d = super::factor::rho_u64(m, u64::MAX).expect("rho on u64 always terminates");
        stack.push(d);
        stack.push(m / d);
    }
    found.sort_unstable();
    for p in found {
        match out.last_mut() {
            Some((last, v)) if *last == p => *v += 1,
            _ => out.push((p, 1)),
        }
    }
    out.sort_unstable();
    out
}

pub fn moebius(n: u64) -> i32 {
    let mut sign = 1;
    for (_, v) in factor_u64(n) {
        if v > 1 {
            return 0;
        }
        sign = -sign;
    }
    sign
}

pub fn euler_phi(n: u64) -> u64 {
    factor_u64(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Multiplicative order of `a` modulo `m` (gcd(a, m) = 1, m ≥ 1).
pub fn mult_order_mod(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 1;
    }
    debug_assert_eq!(a.gcd(&m), 1);
    let mut ord = euler_phi(m);
    for (p, _) in factor_u64(ord) {
        while ord.is_multiple_of(p) && pow_mod(a, ord / p, m) == 1 {
            ord /= p;
        }
    }
    ord
}

/// Largest `r` with `r^k <= n`.
pub fn iroot(n: u64, k: u32) -> u64 {
    if k == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && r.checked_pow(k).is_none_or(|v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_helpers() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(moebius(30), -1);
        assert_eq!(moebius(12), 0);
        assert_eq!(euler_phi(26), 12);
        assert_eq!(mult_order_mod(3, 10), 4);
        assert_eq!(mult_order_mod(3, 1), 1);
        assert_eq!(iroot(26, 3), 2);
        assert_eq!(iroot(27, 3), 3);
        assert_eq!(iroot(u64::MAX, 2), 4294967295);
        assert_eq!(valuation(72, 2), 3);
    }

    #[test]
    fn factor_u64_round_trip() {
        for n in [1u64, 2, 19682, 59048, 1 << 40, 600851475143, 18446744073709551557] {
            let f = factor_u64(n);
            assert_eq!(f.iter().map(|&(p, v)| p.pow(v)).product::<u64>(), n);
        }
    }
}
