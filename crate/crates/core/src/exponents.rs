//! Thomae exponents
//!
//! For a non-special divisor `D` the factor `(lambda_a - lambda_b)` of the
//! Thomae product carries the exponent
//!
//! `4 m n / (o(s) o(r)) * [2 phi_{h+dZ}(s) + phi_{h+dZ}(0) + (o(s)-1)(o(r)-1)/4]`
//!
//! with `(d, h)` the intersection data of the two branch elements and
//! `s = beta_b - h beta_a mod d`. The same number is `4m (2 q_e + n gamma)`,
//! where `q_e` sums products of half-form exponents over the orbit of `D` and
//! `gamma` averages pairings over the dual group. Both routes are exposed so
//! they can be checked against each other.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cover::{BranchIndex, Cover, Fingerprint};
use crate::dedekind::{phi_exact, PhiKey};
use crate::divisors::{centred, InvariantDivisor};
use crate::error::{Error, Result};
use crate::group::{AbelianGroup, GroupElement};
use crate::rational::{integer, ratio, to_i64_exact};

/// Unordered pair of distinct branch indices, stored with `first < second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PairKey {
    first: BranchIndex,
    second: BranchIndex,
}

impl PairKey {
    pub fn new(a: BranchIndex, b: BranchIndex) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(PairKey { first: a, second: b }),
            std::cmp::Ordering::Greater => Ok(PairKey { first: b, second: a }),
            std::cmp::Ordering::Equal => Err(Error::Domain(format!("pair {a}, {b} is not of distinct points"))),
        }
    }

    pub fn first(&self) -> BranchIndex {
        self.first
    }

    pub fn second(&self) -> BranchIndex {
        self.second
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentEntry {
    pub pair: PairKey,
    pub exponent: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentTable {
    pub cover: Fingerprint,
    /// Identifies the dual-group orbit (the theta characteristic) of the divisor.
    pub divisor_fingerprint: Fingerprint,
    pub theta_exponent: u64,
    pub detc_exponent: u64,
    /// One entry per unordered pair, in increasing [`PairKey`] order.
    pub entries: Vec<ExponentEntry>,
}

impl ExponentTable {
    pub fn get(&self, pair: PairKey) -> Option<i64> {
        self.entries
            .binary_search_by(|e| e.pair.cmp(&pair))
            .ok()
            .map(|k| self.entries[k].exponent)
    }

    /// Total degree of the product of differences.
    pub fn total_degree(&self) -> i64 {
        self.entries.iter().map(|e| e.exponent).sum()
    }
}

/// A permutation of branch positions that preserves the attached group
/// element and carries one divisor's coefficients onto another's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling {
    /// `map[p]` is the position that point `p` is sent to.
    pub map: Vec<usize>,
}

/// `gamma_{s,r} = (1/n) sum_chi u_{chi,s} u_{chi,r} / (o(s) o(r))`.
pub fn gamma(g: &AbelianGroup, s: &GroupElement, r: &GroupElement) -> Result<BigRational> {
    if g.is_identity(s) || g.is_identity(r) {
        return Err(Error::Domain("gamma needs two nontrivial elements".into()));
    }
    let os = g.element_order(s)? as i64;
    let or = g.element_order(r)? as i64;
    let mut total = 0i64;
    for chi in g.dual_group() {
        total += (g.pairing_u(&chi, s)? * g.pairing_u(&chi, r)?) as i64;
    }
    Ok(ratio(total, g.order() as i64 * os * or))
}

/// `gamma_{s,r} = phi_{h+dZ}(0) / (o(s) o(r)) + (o(s)-1)(o(r)-1) / (4 o(s) o(r))`.
pub fn gamma_closed_form(g: &AbelianGroup, s: &GroupElement, r: &GroupElement) -> Result<BigRational> {
    let data = g.intersection_data(s, r)?;
    let os = g.element_order(s)? as i64;
    let or = g.element_order(r)? as i64;
    let phi0 = phi_exact(PhiKey::new(data.d, data.h as i64, 0)?);
    Ok(phi0 / integer(os * or) + ratio((os - 1) * (or - 1), 4 * os * or))
}

impl Cover {
    fn positions(&self, a: BranchIndex, b: BranchIndex) -> Result<(usize, usize)> {
        Ok((self.position(a)?, self.position(b)?))
    }

    /// Product of the two centred exponents `beta/o - (o-1)/(2o)`.
    pub fn q_delta(&self, d: &InvariantDivisor, a: BranchIndex, b: BranchIndex) -> Result<BigRational> {
        self.check_divisor(d)?;
        let (pa, pb) = self.positions(a, b)?;
        Ok(self.q_delta_at(d, pa, pb))
    }

    fn q_delta_at(&self, d: &InvariantDivisor, pa: usize, pb: usize) -> BigRational {
        centred(d.beta()[pa], self.point_order(pa)) * centred(d.beta()[pb], self.point_order(pb))
    }

    /// `q_e` by definition: the sum of `q_delta` over the orbit of `d`.
    pub fn q_e(&self, d: &InvariantDivisor, a: BranchIndex, b: BranchIndex) -> Result<BigRational> {
        let (pa, pb) = self.positions(a, b)?;
        Ok(self
            .orbit(d)?
            .iter()
            .map(|x| self.q_delta_at(x, pa, pb))
            .sum())
    }

    fn phi_argument(&self, d: &InvariantDivisor, pa: usize, pb: usize) -> Result<(PhiKey, PhiKey)> {
        let pts = self.points();
        let data = self.group().intersection_data(&pts[pa].element, &pts[pb].element)?;
        let s = d.beta()[pb] as i64 - data.h as i64 * d.beta()[pa] as i64;
        let key = PhiKey::new(data.d, data.h as i64, s)?;
        Ok((key, key.with_s(0)))
    }

    /// `q_e = n / (o(s) o(r)) * phi_{h+dZ}(beta_b - h beta_a)`.
    pub fn q_e_closed_form(&self, d: &InvariantDivisor, a: BranchIndex, b: BranchIndex) -> Result<BigRational> {
        self.check_divisor(d)?;
        let (pa, pb) = self.positions(a, b)?;
        let (key, _) = self.phi_argument(d, pa, pb)?;
        let oo = (self.point_order(pa) * self.point_order(pb)) as i64;
        Ok(phi_exact(key) * ratio(self.n() as i64, oo))
    }

    /// The bracket `2 phi(s) + phi(0) + (o(s)-1)(o(r)-1)/4`.
    fn bracket(&self, d: &InvariantDivisor, pa: usize, pb: usize) -> Result<BigRational> {
        let (key, key0) = self.phi_argument(d, pa, pb)?;
        let (os, or) = (self.point_order(pa) as i64, self.point_order(pb) as i64);
        Ok(integer(2) * phi_exact(key) + phi_exact(key0) + ratio((os - 1) * (or - 1), 4))
    }

    /// Exponent of `(lambda_a - lambda_b)` in the Thomae product; always an
    /// even integer.
    pub fn thomae_exponent(&self, d: &InvariantDivisor, pair: PairKey) -> Result<i64> {
        if !self.is_nonspecial(d)? {
            return Err(Error::Domain(format!("divisor {:?} is not non-special", d.beta())));
        }
        let (pa, pb) = self.positions(pair.first, pair.second)?;
        self.exponent_at(d, pa, pb)
    }

    fn exponent_at(&self, d: &InvariantDivisor, pa: usize, pb: usize) -> Result<i64> {
        let oo = (self.point_order(pa) * self.point_order(pb)) as i64;
        let scale = ratio(4 * (self.m() * self.n()) as i64, oo);
        let value = scale * self.bracket(d, pa, pb)?;
        let exponent = to_i64_exact(&value).ok_or_else(|| {
            Error::Internal(format!("exponent {value} at points {pa}, {pb} is not an integer"))
        })?;
        if exponent % 2 != 0 {
            return Err(Error::Internal(format!("exponent {exponent} at points {pa}, {pb} is odd")));
        }
        Ok(exponent)
    }

    /// Exponent table over every unordered pair, built on `workers` threads.
    pub fn exponent_table(&self, d: &InvariantDivisor, workers: usize) -> Result<ExponentTable> {
        if !self.is_nonspecial(d)? {
            return Err(Error::Domain(format!("divisor {:?} is not non-special", d.beta())));
        }
        let npts = self.num_points();
        let pairs: Vec<(usize, usize)> = (0..npts).flat_map(|a| (a + 1..npts).map(move |b| (a, b))).collect();
        let mut slots: Vec<Option<Result<i64>>> = vec![None; pairs.len()];
        let chunk = pairs.len().div_ceil(workers.max(1)).max(1);
        std::thread::scope(|sc| {
            for (pairs, slots) in pairs.chunks(chunk).zip(slots.chunks_mut(chunk)) {
                sc.spawn(move || {
                    for (&(a, b), slot) in pairs.iter().zip(slots.iter_mut()) {
                        *slot = Some(self.exponent_at(d, a, b));
                    }
                });
            }
        });
        let mut entries = Vec::with_capacity(pairs.len());
        for (&(a, b), slot) in pairs.iter().zip(slots) {
            let exponent = slot.expect("every slot is filled")?;
            let pair = PairKey::new(self.points()[a].index, self.points()[b].index)?;
            entries.push(ExponentEntry { pair, exponent });
        }
        Ok(ExponentTable {
            cover: self.fingerprint(),
            divisor_fingerprint: self.orbit_fingerprint(d)?,
            theta_exponent: 8 * self.m(),
            detc_exponent: 4 * self.m(),
            entries,
        })
    }

    /// Stable identifier of the orbit of `d`.
    pub fn orbit_fingerprint(&self, d: &InvariantDivisor) -> Result<Fingerprint> {
        let rep = self.orbit_representative(d)?;
        let mut hasher = Sha256::new();
        hasher.update(self.fingerprint().to_string());
        hasher.update(format!("{:?}", rep.beta()));
        let digest = hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        Ok(Fingerprint(u64::from_be_bytes(bytes)))
    }

    /// `2m sum_chi t_chi (t_chi - 1)`, the homogeneity degree of the product.
    pub fn homogeneity_degree(&self) -> i64 {
        let s: u64 = self.invariants().t.iter().map(|&t| t * t.saturating_sub(1)).sum();
        (2 * self.m() * s) as i64
    }

    /// `sum_chi (t_chi - 1) u_{chi,s} / o(s)` for the element at `a`.
    pub fn point_weight(&self, a: BranchIndex) -> Result<BigRational> {
        let pa = self.position(a)?;
        let o = self.point_order(pa) as i64;
        Ok((0..self.characters().len())
            .map(|c| ratio((self.t(c) as i64 - 1) * self.u(c, pa) as i64, o))
            .sum())
    }

    /// `sum_{b != a} (2 q_e(a, b) + n gamma_{s_a, s_b})`, with both terms by
    /// their defining sums.
    pub fn point_exponent_sum(&self, d: &InvariantDivisor, a: BranchIndex) -> Result<BigRational> {
        let pa = self.position(a)?;
        let orbit = self.orbit(d)?;
        let n = integer(self.n() as i64);
        let mut total = BigRational::zero();
        let mut gammas: BTreeMap<(usize, usize), BigRational> = BTreeMap::new();
        for pb in (0..self.num_points()).filter(|&pb| pb != pa) {
            let q: BigRational = orbit.iter().map(|x| self.q_delta_at(x, pa, pb)).sum();
            let ra = self.group().rank(&self.points()[pa].element)?;
            let rb = self.group().rank(&self.points()[pb].element)?;
            let gm = match gammas.get(&(ra, rb)) {
                Some(v) => v.clone(),
                None => {
                    let v = gamma(self.group(), &self.points()[pa].element, &self.points()[pb].element)?;
                    gammas.insert((ra, rb), v.clone());
                    v
                }
            };
            total += integer(2) * q + &n * gm;
        }
        Ok(total)
    }

    /// A block-preserving permutation carrying `d1`'s coefficients to `d2`'s,
    /// present exactly when every level set `{j : beta_{s,j} = i}` has the
    /// same size in both.
    pub fn relabel_equivalent(&self, d1: &InvariantDivisor, d2: &InvariantDivisor) -> Result<Option<Relabeling>> {
        for d in [d1, d2] {
            if !self.is_nonspecial(d)? {
                return Err(Error::Domain(format!("divisor {:?} is not non-special", d.beta())));
            }
        }
        let npts = self.num_points();
        let mut map = vec![usize::MAX; npts];
        let mut start = 0;
        while start < npts {
            let rank = self.points()[start].index.element_rank;
            let end = (start..npts)
                .find(|&p| self.points()[p].index.element_rank != rank)
                .unwrap_or(npts);
            for value in 0..self.point_order(start) {
                let from: Vec<usize> = (start..end).filter(|&p| d1.beta()[p] == value).collect();
                let to: Vec<usize> = (start..end).filter(|&p| d2.beta()[p] == value).collect();
                if from.len() != to.len() {
                    return Ok(None);
                }
                for (f, t) in from.into_iter().zip(to) {
                    map[f] = t;
                }
            }
            start = end;
        }
        Ok(Some(Relabeling { map }))
    }
}

impl Relabeling {
    pub fn apply(&self, cover: &Cover, index: BranchIndex) -> Result<BranchIndex> {
        let p = cover.position(index)?;
        Ok(cover.points()[self.map[p]].index)
    }

    /// Whether `t2` is `t1` with every pair relabeled.
    pub fn matches_tables(&self, cover: &Cover, t1: &ExponentTable, t2: &ExponentTable) -> Result<bool> {
        if t1.entries.len() != t2.entries.len() {
            return Ok(false);
        }
        for e in &t1.entries {
            let image = PairKey::new(self.apply(cover, e.pair.first)?, self.apply(cover, e.pair.second)?)?;
            if t2.get(image) != Some(e.exponent) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `n (o^2 - 1) / (12 o^2)`, the diagonal value of `q_e`.
pub fn q_e_diagonal(n: u64, o: u64) -> BigRational {
    let (n, o) = (n as i64, o as i64);
    ratio(n * (o * o - 1), 12 * o * o)
}

/// `(o - 1)(2o - 1) / (6 o^2)`, the diagonal value of `gamma`.
pub fn gamma_diagonal(o: u64) -> BigRational {
    let o = o as i64;
    ratio((o - 1) * (2 * o - 1), 6 * o * o)
}
