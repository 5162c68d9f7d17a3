//! Reduction of base-field numbers modulo a word-sized prime.
//!
//! Used as a one-sided divisibility filter: if a polynomial does not vanish
//! modulo p on the hyperplane of a linear form, the form cannot divide it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Primes ≡ 1 (mod 8), so that −1 is always a square.
const PRIMES: [u64; 3] = [0xFFFF_FFFF_0000_0001, 4_179_340_454_199_820_289, 2_013_265_921];

/// Images of θ and i in 𝔽_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Residue {
    pub p: u64,
    pub theta: u64,
    pub i: u64,
}

pub(crate) fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn add(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

fn pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, b, p);
        }
        b = mul(b, b, p);
        e >>= 1;
    }
    r
}

pub(crate) fn inv(a: u64, p: u64) -> Option<u64> {
    (a != 0).then(|| pow(a, p - 2, p))
}

fn big_mod(n: &BigInt, p: u64) -> u64 {
    let r = n % BigInt::from(p);
    let r = if r < BigInt::zero() { r + BigInt::from(p) } else { r };
    r.to_u64().expect("residue fits a word")
}

/// `n/d mod p`, or `None` when p divides the denominator.
pub(crate) fn rational(q: &BigRational, p: u64) -> Option<u64> {
    let d = inv(big_mod(q.denom(), p), p)?;
    Some(mul(big_mod(q.numer(), p), d, p))
}

/// Tonelli–Shanks square root.
fn sqrt(a: u64, p: u64) -> Option<u64> {
    if a == 0 {
        return Some(0);
    }
    if pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let z = (2..).find(|&z| pow(z, (p - 1) / 2, p) == p - 1).expect("nonresidue");
    let (mut m, mut c, mut t, mut r) = (s, pow(z, q, p), pow(a, q, p), pow(a, q.div_ceil(2), p));
    while t != 1 {
        let mut k = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul(t2, t2, p);
            k += 1;
        }
        let b = pow(c, 1 << (m - k - 1), p);
        m = k;
        c = mul(b, b, p);
        t = mul(t, c, p);
        r = mul(r, b, p);
    }
    Some(r)
}

/// A prime where `c2 x^2 + c1 x + c0` has a root, with that root and √−1.
pub(crate) fn residue_for(minpoly: &[BigInt; 3]) -> Option<Residue> {
    PRIMES.iter().find_map(|&p| {
        let [c0, c1, c2] = minpoly.each_ref().map(|c| big_mod(c, p));
        let i = sqrt(p - 1, p)?;
        let theta = if c2 == 0 {
            mul(p - c0, inv(c1, p)?, p)
        } else {
            let disc = add(mul(c1, c1, p), p - mul(4, mul(c2, c0, p), p), p);
            let root = sqrt(disc, p)?;
            mul(add(p - c1, root, p), inv(mul(2, c2, p), p)?, p)
        };
        Some(Residue { p, theta, i })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_satisfy_their_equations() {
        let r = residue_for(&[BigInt::from(-2), BigInt::zero(), BigInt::from(1)]).unwrap();
        assert_eq!(mul(r.theta, r.theta, r.p), 2);
        assert_eq!(mul(r.i, r.i, r.p), r.p - 1);
        let q = BigRational::new((-3).into(), 7.into());
        assert_eq!(mul(rational(&q, r.p).unwrap(), 7, r.p), r.p - 3);
    }
}
