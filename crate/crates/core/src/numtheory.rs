//! Small integer helpers: gcd, totient, factorization.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn totient(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// The prime `p` when `n = p^k` with `k >= 1`.
pub fn prime_power_base(n: u64) -> Option<u64> {
    match factorize(n).as_slice() {
        [(p, _)] => Some(*p),
        _ => None,
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    v.sort_unstable();
    v
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(lcm(10, 6), 30);
        assert_eq!(totient(42), 12);
        assert_eq!(totient(7), 6);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(prime_power_base(8), Some(2));
        assert_eq!(prime_power_base(6), None);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(binomial(5, 2), 10.0);
    }
}
