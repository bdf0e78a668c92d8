//! Modular arithmetic on small moduli.
//!
//! All moduli are `u64` and every product goes through `u128`, so results are
//! exact for any modulus below 2^63 (the group code never exceeds 2^31).

use serde::Serialize;

use crate::error::{Error, Result};

/// An element of `Z_m`, always stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: i128, modulus: u64) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        Residue {
            value: value.rem_euclid(modulus as i128) as u64,
            modulus,
        }
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl std::fmt::Display for Residue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    match a.checked_mul(b) {
        Some(ab) => ab % m,
        None => ((a as u128 * b as u128) % m as u128) as u64,
    }
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    match a.checked_add(b) {
        Some(ab) => ab % m,
        None => ((a as u128 + b as u128) % m as u128) as u64,
    }
}

#[inline]
pub(crate) fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    let (a, b) = (a % m, b % m);
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

/// Square-and-multiply on raw values.
pub(crate) fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `base^exp mod modulus`. Negative bases are reduced first.
pub fn mod_pow(base: i64, exp: u64, modulus: u64) -> Residue {
    let b = Residue::new(base as i128, modulus).value;
    Residue::new(pow_mod(b, exp, modulus) as i128, modulus)
}

/// Inverse of `x` modulo `modulus` by the extended Euclidean algorithm.
pub fn mod_inv(x: i64, modulus: u64) -> Result<Residue> {
    let v = Residue::new(x as i128, modulus).value;
    inv_raw(v, modulus).map(|y| Residue::new(y as i128, modulus))
}

pub(crate) fn inv_raw(x: u64, m: u64) -> Result<u64> {
    if m == 1 {
        return Ok(0);
    }
    let (mut old_r, mut r) = (x as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return Err(Error::NonUnit {
            value: x,
            modulus: m,
        });
    }
    Ok(old_s.rem_euclid(m as i128) as u64)
}

/// Smallest `k >= 1` with `x^k = 1 (mod modulus)`.
///
/// The search walks the divisors of the group exponent bound `phi(modulus)`,
/// so it costs a factorization of `phi` plus a handful of exponentiations.
pub fn multiplicative_order(x: i64, modulus: u64) -> Result<u64> {
    let v = Residue::new(x as i128, modulus).value;
    if gcd(v, modulus) != 1 {
        return Err(Error::NonUnit { value: v, modulus });
    }
    if modulus == 1 {
        return Ok(1);
    }
    let phi = euler_phi(modulus);
    let mut order = phi;
    for (prime, _) in factorize(phi) {
        while order.is_multiple_of(prime) && pow_mod(v, order / prime, modulus) == 1 {
            order /= prime;
        }
    }
    Ok(order)
}

/// Smallest primitive root modulo `p^r` for an odd prime `p`.
pub fn find_primitive_root(p: u64, r: u32) -> Residue {
    assert!(p > 2 && is_prime(p), "p must be an odd prime");
    assert!(r >= 1);
    let n = p.pow(r);
    let phi = p.pow(r - 1) * (p - 1);
    let primes: Vec<u64> = factorize(phi).into_iter().map(|(f, _)| f).collect();
    (2..n)
        .find(|&u| u % p != 0 && primes.iter().all(|&f| pow_mod(u, phi / f, n) != 1))
        .map(|u| Residue::new(u as i128, n))
        .expect("odd prime powers always have a primitive root")
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Trial-division factorization into `(prime, exponent)` pairs, ascending.
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
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (prime, _)| acc / prime * (prime - 1))
}

/// Largest `e` with `base^e | n`; `n = 0` maps to `cap`.
pub(crate) fn valuation(n: u64, base: u64, cap: u32) -> u32 {
    if n == 0 {
        return cap;
    }
    let mut e = 0;
    let mut n = n;
    while n.is_multiple_of(base) && e < cap {
        n /= base;
        e += 1;
    }
    e
}
