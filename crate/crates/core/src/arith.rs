//! Small integer helpers.

use num_integer::Integer;

/// `gcd(|a|, |b|)`, with `gcd(0, 0) = 0`.
#[inline]
pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Whether `(a, b)` is a primitive integer vector.
#[inline]
pub fn is_primitive(a: i64, b: i64) -> bool {
    gcd(a, b) == 1
}

/// Möbius function `μ(0..=n)` by a linear sieve (`μ(0)` is set to 0).
pub fn mobius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![0i8; n + 1];
    if n == 0 {
        return mu;
    }
    mu[1] = 1;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    mu
}

/// Index `[SL(2,Z) : Γ₀(M)] = M ∏_{p | M} (1 + 1/p)`.
pub fn gamma0_index(level: u64) -> u64 {
    let mut m = level;
    let mut index = level;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            index = index / p * (p + 1);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        index = index / m * (m + 1);
    }
    index
}
