//! Test oracles that share no code with the library's main path.

#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_trial(n: u64) -> Vec<u64> {
    (2..=n).filter(|&v| is_prime_trial(v)).collect()
}

/// Plain, unsegmented sieve over all integers.
pub fn primes_plain(n: usize) -> Vec<u64> {
    let mut is_p = vec![true; n + 1];
    is_p[0] = false;
    if n >= 1 {
        is_p[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if is_p[i] {
            (i * i..=n).step_by(i).for_each(|j| is_p[j] = false);
        }
        i += 1;
    }
    (0..=n).filter(|&i| is_p[i]).map(|i| i as u64).collect()
}

/// Exact `∑ 1/d` over the given denominators, rounded to binary64.
pub fn exact_reciprocal_sum(dens: impl IntoIterator<Item = u64>) -> f64 {
    let mut num = BigUint::zero();
    let mut den = BigUint::one();
    for d in dens {
        // num/den + 1/d = (num·d + den) / (den·d)
        num = num * d + &den;
        den *= d;
    }
    ratio_to_f64(&num, &den)
}

pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = 128u32;
    let q = (num << shift) / den;
    q.to_f64().unwrap() / 2f64.powi(shift as i32)
}

/// Fractional bits of the fixed-point logarithms.
pub const FIXED_BITS: u32 = 192;

fn atanh_fixed(num: &BigInt, den: &BigInt) -> BigInt {
    // atanh(z) = z + z³/3 + z⁵/5 + …, z = num/den < 1/3
    let z = (num.clone() << FIXED_BITS) / den;
    let z2 = (&z * &z) >> FIXED_BITS;
    let mut power = z;
    let mut sum = BigInt::zero();
    let mut k = 1u32;
    while !power.is_zero() {
        sum += &power / BigInt::from(k);
        power = (&power * &z2) >> FIXED_BITS;
        k += 2;
    }
    sum
}

/// `ln 2 · 2^FIXED_BITS`.
pub fn ln2_fixed() -> BigInt {
    atanh_fixed(&BigInt::from(1), &BigInt::from(3)) * 2
}

/// `ln v · 2^FIXED_BITS` for `v >= 1`, via `v = 2^k m` and `ln m = 2 atanh((m−1)/(m+1))`.
pub fn ln_fixed(v: u64, ln2: &BigInt) -> BigInt {
    let k = 63 - v.leading_zeros();
    let base = 1u64 << k;
    let frac = atanh_fixed(&BigInt::from(v - base), &BigInt::from(v + base)) * 2;
    ln2 * BigInt::from(k) + frac
}

pub fn fixed_to_f64(x: &BigInt) -> f64 {
    let keep = 100u32;
    (x >> (FIXED_BITS - keep)).to_f64().unwrap() / 2f64.powi(keep as i32)
}

/// `(S, A, Q, L)` over the given primes from exact rationals and 192-bit fixed point.
pub fn oracle_sums(primes: &[u64]) -> (f64, f64, f64, f64) {
    let s = exact_reciprocal_sum(primes.iter().copied());
    let q = exact_reciprocal_sum(primes.iter().map(|&p| p * p));
    let ln2 = ln2_fixed();
    let mut a = BigInt::zero();
    let mut l = BigInt::zero();
    for &p in primes {
        let lp = ln_fixed(p, &ln2);
        a += &lp / BigInt::from(p);
        l += &lp / BigInt::from(p * (p - 1));
    }
    (s, fixed_to_f64(&a), q, fixed_to_f64(&l))
}
