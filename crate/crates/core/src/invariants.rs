//! Closed-form topological invariants.
//!
//! Everything is derived from the elementary symmetric functions of the
//! six-tuple:
//!
//! * `s = |σ3| / 8`, the order of the torsion group in degrees 6 and 8;
//! * `lk = ±32 σ5⁻¹ (mod s)`, the linking form, reported as `min(x, s - x)`;
//! * `p1 = -σ2 = |q|² / 2`;
//! * `p2 = (3 σ2² - σ4) · 8⁻¹ (mod s)`, least non-negative residue.
//!
//! For `s = 1` the torsion group is trivial and `lk = p2 = 0`.
//!
//! `p2 + 2 p1²` mod 5 is a further homotopy invariant, but it is determined
//! by `s` and carries nothing new, so it is not computed.

use std::fmt;

use crate::admissibility::Manifold;
use crate::error::{Error, Result};
use crate::tuples::QTuple;

/// `σ1 ..= σ6` of the six entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymmetricProfile(pub [i128; 6]);

impl SymmetricProfile {
    /// `σ_k` for `k` in `1..=6`.
    pub fn sigma(&self, k: usize) -> i128 {
        self.0[k - 1]
    }
}

/// Coefficients of `∏ (x + q_i)` by Vieta expansion; entry `k - 1` is `σ_k`.
pub fn elementary_symmetric(q: &[i64]) -> Vec<i128> {
    let mut e = vec![0i128; q.len() + 1];
    e[0] = 1;
    for (i, &x) in q.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += i128::from(x) * e[k - 1];
        }
    }
    e.remove(0);
    e
}

pub fn symmetric_profile(q: &QTuple) -> SymmetricProfile {
    let e = elementary_symmetric(&q.entries());
    SymmetricProfile(e.try_into().expect("six coefficients"))
}

/// Order of `H^6 = H^8`.
pub fn order_s(m: &Manifold) -> Result<u64> {
    order_from_profile(m, &symmetric_profile(m.tuple()))
}

fn order_from_profile(m: &Manifold, sigma: &SymmetricProfile) -> Result<u64> {
    let s3 = sigma.sigma(3);
    if s3 == 0 || s3 % 8 != 0 {
        return Err(Error::Theory(format!("σ3 = {s3} of {m} is not a nonzero multiple of 8")));
    }
    let s = u64::try_from(s3.unsigned_abs() / 8).map_err(|_| Error::OutOfRange(m.tuple().max_abs()))?;
    if s % 2 == 0 {
        return Err(Error::Theory(format!("order {s} of {m} is even")));
    }
    Ok(s)
}

/// First Pontryagin class, `|q|² / 2`.
pub fn p1(q: &QTuple) -> u64 {
    let norm: u64 = q.entries().iter().map(|&x| (x * x) as u64).sum();
    norm / 2
}

/// Inverse of `a` modulo `m` in `[0, m)`, by the extended Euclidean algorithm.
/// Every value is its own inverse modulo 1, reported as 0.
pub fn mod_inverse(a: i128, m: u64) -> Result<u64> {
    assert!(m >= 1, "modulus must be positive");
    let modulus = i128::from(m);
    let (mut r0, mut r1) = (a.rem_euclid(modulus), modulus);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (s0, s1) = (s1, s0 - quot * s1);
    }
    // r0 = gcd(a mod m, m) (gcd(0, m) = m)
    if r0 != 1 {
        if m == 1 {
            return Ok(0);
        }
        return Err(Error::NotInvertible { value: a, modulus: m, gcd: r0 as u64 });
    }
    Ok(s0.rem_euclid(modulus) as u64)
}

fn linking_from_profile(s: u64, sigma: &SymmetricProfile) -> Result<u64> {
    if s == 1 {
        return Ok(0);
    }
    let modulus = i128::from(s);
    let inv = mod_inverse(sigma.sigma(5), s)?;
    let x = (32 * i128::from(inv)).rem_euclid(modulus) as u64;
    Ok(x.min(s - x))
}

/// Sign-canonical linking form, `min(x, s - x)` with `x = 32 σ5⁻¹ mod s`.
pub fn linking_form(m: &Manifold) -> Result<u64> {
    let sigma = symmetric_profile(m.tuple());
    let s = order_from_profile(m, &sigma)?;
    linking_from_profile(s, &sigma)
}

fn p2_from_profile(s: u64, sigma: &SymmetricProfile) -> Result<u64> {
    if s == 1 {
        return Ok(0);
    }
    let modulus = i128::from(s);
    let s2 = sigma.sigma(2).rem_euclid(modulus);
    let s4 = sigma.sigma(4).rem_euclid(modulus);
    let rhs = (3 * s2 % modulus * s2 - s4).rem_euclid(modulus);
    let inv8 = i128::from(mod_inverse(8, s)?);
    Ok((rhs * inv8 % modulus) as u64)
}

/// Second Pontryagin class in `Z_s`.
pub fn p2(m: &Manifold) -> Result<u64> {
    let sigma = symmetric_profile(m.tuple());
    let s = order_from_profile(m, &sigma)?;
    p2_from_profile(s, &sigma)
}

/// Pattern of `q mod 3` up to order and global sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mod3Class {
    /// `(1,1,1,1,1,1)`
    AllOnes,
    /// `(1,1,1,0,0,0)`
    ThreeZeros,
    /// `(1,1,1,1,-1,0)`
    Mixed,
}

impl fmt::Display for Mod3Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mod3Class::AllOnes => "(1,1,1,1,1,1)",
            Mod3Class::ThreeZeros => "(1,1,1,0,0,0)",
            Mod3Class::Mixed => "(1,1,1,1,-1,0)",
        })
    }
}

pub fn mod3_class(q: &QTuple) -> Option<Mod3Class> {
    let mut counts = [0usize; 3];
    for x in q.entries() {
        counts[x.rem_euclid(3) as usize] += 1;
    }
    match counts {
        [0, 6, 0] | [0, 0, 6] => Some(Mod3Class::AllOnes),
        [3, 3, 0] | [3, 0, 3] => Some(Mod3Class::ThreeZeros),
        [1, 4, 1] | [1, 1, 4] => Some(Mod3Class::Mixed),
        _ => None,
    }
}

/// `p1 mod 24` together with the mod-3 pattern, checking that `p1 ≡ 7 (mod 8)`
/// and that the pattern is `Mixed` exactly when `p1 ≡ 7 (mod 24)`.
pub fn residue_classes(m: &Manifold) -> Result<(u8, Mod3Class)> {
    classify(m, p1(m.tuple()))
}

fn classify(m: &Manifold, p1: u64) -> Result<(u8, Mod3Class)> {
    let class = mod3_class(m.tuple())
        .ok_or_else(|| Error::Theory(format!("{m} has an impossible residue pattern mod 3")))?;
    let r = (p1 % 24) as u8;
    let expected = if class == Mod3Class::Mixed { 7 } else { 15 };
    if r != expected {
        return Err(Error::Theory(format!("{m}: p1 = {p1} is {r} mod 24, pattern {class}")));
    }
    Ok((r, class))
}

/// All invariants of one manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InvariantRecord {
    pub s: u64,
    pub p1: u64,
    pub lk: u64,
    pub p2: u64,
    pub p1_mod24: u8,
    pub mod3_class: Mod3Class,
}

pub fn full_record(m: &Manifold) -> Result<InvariantRecord> {
    let sigma = symmetric_profile(m.tuple());
    let s = order_from_profile(m, &sigma)?;
    if s % 6 != 1 && s % 6 != 5 {
        return Err(Error::Theory(format!("{m}: s = {s} is not ±1 mod 6")));
    }
    let p1 = p1(m.tuple());
    if i128::from(p1) != -sigma.sigma(2) {
        return Err(Error::Theory(format!("{m}: p1 = {p1} differs from -σ2")));
    }
    let (p1_mod24, mod3_class) = classify(m, p1)?;
    Ok(InvariantRecord {
        s,
        p1,
        lk: linking_from_profile(s, &sigma)?,
        p2: p2_from_profile(s, &sigma)?,
        p1_mod24,
        mod3_class,
    })
}
