//! Generalized Dedekind sums
//!
//! `phi_{h+dZ}(s) = sum_{0 != k in Z/dZ} e(ks/d) / ((1 - e(kh/d)) (1 - e(-k/d)))`
//!
//! The exact evaluator never touches roots of unity. It uses the equivalent
//! real sum
//!
//! `phi_{h+dZ}(s) = d * sum_{u=0}^{d-1} (u/d - (d-1)/(2d)) ({(hu+s)/d} - (d-1)/(2d))`
//!
//! and [`phi_numeric_oracle`] evaluates the root-of-unity sum in floating
//! point so the two routes can be compared.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{integer, ratio};

/// Normalized argument of `phi`: `0 <= h < d` with `gcd(h, d) = 1`,
/// `0 <= s < d`. For `d = 1` this forces `h = s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PhiKey {
    d: u64,
    h: u64,
    s: u64,
}

impl PhiKey {
    pub fn new(d: u64, h: i64, s: i64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("d must be positive".into()));
        }
        let h = h.rem_euclid(d as i64) as u64;
        let s = s.rem_euclid(d as i64) as u64;
        if h.gcd(&d) != 1 {
            return Err(Error::Domain(format!("h = {h} is not a unit modulo {d}")));
        }
        Ok(PhiKey { d, h, s })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn with_s(&self, s: i64) -> PhiKey {
        PhiKey { s: s.rem_euclid(self.d as i64) as u64, ..*self }
    }

    /// Inverse of `h` modulo `d` (0 when `d = 1`).
    pub fn h_inverse(&self) -> u64 {
        if self.d == 1 {
            return 0;
        }
        let ext = (self.h as i64).extended_gcd(&(self.d as i64));
        ext.x.rem_euclid(self.d as i64) as u64
    }
}

fn cache() -> &'static RwLock<HashMap<PhiKey, BigRational>> {
    static CACHE: OnceLock<RwLock<HashMap<PhiKey, BigRational>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Exact `phi_{h+dZ}(s)`, memoized on the normalized key.
pub fn phi_exact(key: PhiKey) -> BigRational {
    if let Some(v) = cache().read().expect("phi cache poisoned").get(&key) {
        return v.clone();
    }
    let v = phi_real_sum(key);
    // concurrent writers insert the same value
    cache()
        .write()
        .expect("phi cache poisoned")
        .entry(key)
        .or_insert_with(|| v.clone());
    v
}

fn phi_real_sum(key: PhiKey) -> BigRational {
    let PhiKey { d, h, s } = key;
    if d == 1 {
        return BigRational::zero();
    }
    let d = d as i64;
    let (h, s) = (h as i64, s as i64);
    // d * sum (u - c)(w - c) / d^2  with c = (d-1)/2, done over 2d to stay integral
    let twice_centre = d - 1;
    let numer: i64 = (0..d)
        .map(|u| {
            let w = (h * u + s).rem_euclid(d);
            (2 * u - twice_centre) * (2 * w - twice_centre)
        })
        .sum();
    ratio(numer, 4 * d)
}

/// Two-term reciprocity: reduces `(d, h, s)` to `(h, d mod h, s mod h)`.
pub fn phi_by_reciprocity(key: PhiKey) -> BigRational {
    let PhiKey { d, h, s } = key;
    if d == 1 {
        return BigRational::zero();
    }
    let (di, hi, si) = (d as i64, h as i64, s as i64);
    let head = ratio(
        di * di + hi * hi + 3 * hi * di - 3 * di - 3 * hi + 1 - 6 * si * (di + hi - 1 - si),
        12 * hi,
    );
    let inner = PhiKey { d: h, h: d % h, s: s % h };
    head - ratio(di, hi) * phi_by_reciprocity(inner)
}

/// The defining root-of-unity sum evaluated in double precision.
///
/// Angles are reduced modulo `d` in integers first, and each factor uses
/// `1 / (1 - e(x)) = 1/2 + (i/2) cot(pi x)` to avoid the cancellation in
/// `1 - e(x)` for small `x`.
pub fn phi_numeric_oracle(key: PhiKey) -> Complex64 {
    let PhiKey { d, h, s } = key;
    let df = d as f64;
    let e = |k: u64| Complex64::from_polar(1.0, 2.0 * PI * (k % d) as f64 / df);
    // 1 / (1 - e(k/d))
    let inv = |k: u64| Complex64::new(0.5, 0.5 / (PI * (k % d) as f64 / df).tan());
    (1..d)
        .map(|k| e(k * s) * inv(k * h) * inv(d - k))
        .sum()
}

// ((x)) = x - floor(x) - 1/2 for non-integers, 0 on integers
fn sawtooth(x: &BigRational) -> BigRational {
    if x.is_integer() {
        BigRational::zero()
    } else {
        x - x.floor() - ratio(1, 2)
    }
}

/// Classical `s(h, d) = sum_{k=1}^{d-1} ((k/d)) ((hk/d))`.
pub fn classical_dedekind_sum(h: i64, d: u64) -> Result<BigRational> {
    let key = PhiKey::new(d, h, 0)?;
    let di = d as i64;
    let hi = key.h as i64;
    Ok((1..di)
        .map(|k| sawtooth(&ratio(k, di)) * sawtooth(&ratio(hi * k, di)))
        .sum())
}

/// Predicted class of `phi` modulo `Z`, as its representative in `[0, 1)`:
/// `Z` when `gcd(d, 6) = 1`, `-h/3 + Z` for odd `3 | d`, `(1+2s)/4 + Z` for
/// even `d` prime to 3, and `(1+2s)/4 - h/3 + Z` when `6 | d`.
pub fn integrality_class(key: PhiKey) -> BigRational {
    let PhiKey { d, h, s } = key;
    let mut r = BigRational::zero();
    if d % 2 == 0 {
        r += ratio(1 + 2 * s as i64, 4);
    }
    if d % 3 == 0 {
        r -= ratio(h as i64, 3);
    }
    fractional_part(&r)
}

pub fn fractional_part(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// `phi_{1+dZ}(s) = (d^2 - 1 - 6 s (d - s)) / 12`.
pub fn phi_h_one(d: u64, s: u64) -> BigRational {
    let (d, s) = (d as i64, (s % d) as i64);
    ratio(d * d - 1 - 6 * s * (d - s), 12)
}

/// `d s(h,d) + (d-1)/4`, the value of `phi` at zero.
pub fn phi_zero_from_classical(h: i64, d: u64) -> Result<BigRational> {
    let s = classical_dedekind_sum(h, d)?;
    Ok(s * integer(d as i64) + ratio(d as i64 - 1, 4))
}
