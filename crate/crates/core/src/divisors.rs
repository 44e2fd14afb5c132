//! Normalized `A`-invariant divisors
//!
//! A divisor is `sum beta_{s,j} z^{-1}(lambda_{s,j}) - p z^{-1}(inf)` with
//! `0 <= beta_{s,j} < o(s)`. It has degree `g - 1` and `r(-D) = 0` exactly
//! when `p = 1` and, for every character `chi`, the number of points with
//! `beta >= o - u_chi` equals `t_chi`. This module tests that condition,
//! enumerates the divisors satisfying it, and implements the dual-group
//! action and the negation `D -> div(dz) - D`.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::cover::{BranchIndex, Cover, Fingerprint};
use crate::error::{Error, Result};
use crate::group::Character;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct InvariantDivisor {
    cover: Fingerprint,
    beta: Vec<u64>,
    pole: i64,
}

impl InvariantDivisor {
    /// Coefficients aligned with the cover's canonical point order.
    pub fn beta(&self) -> &[u64] {
        &self.beta
    }

    pub fn pole(&self) -> i64 {
        self.pole
    }

    pub fn cover(&self) -> Fingerprint {
        self.cover
    }
}

/// Exponents `beta/o - (o-1)/(2o)` of the half-differential attached to a
/// divisor, one per branch point, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfFormExponents {
    pub exps: Vec<BigRational>,
}

impl HalfFormExponents {
    pub fn sum(&self) -> BigRational {
        self.exps.iter().sum()
    }

    /// Whether `k * exps[i]` is an integer for every point.
    pub fn integral_after_scaling(&self, k: u64) -> bool {
        let k = BigRational::from_integer(BigInt::from(k));
        self.exps.iter().all(|e| (e * &k).is_integer())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of search nodes before giving up.
    pub cap: u64,
    pub workers: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { cap: 100_000_000, workers: 1 }
    }
}

/// Frontier size the search is split into before it is handed to workers.
/// Fixed so the set of visited nodes does not depend on the worker count.
const SPLIT_TARGET: usize = 64;

pub(crate) fn centred(beta: u64, order: u64) -> BigRational {
    BigRational::new(
        BigInt::from(2 * beta as i64 - (order as i64 - 1)),
        BigInt::from(2 * order),
    )
}

impl Cover {
    pub fn divisor(&self, beta: Vec<u64>, pole: i64) -> Result<InvariantDivisor> {
        let d = InvariantDivisor { cover: self.fingerprint(), beta, pole };
        self.check_divisor(&d)?;
        Ok(d)
    }

    pub fn check_divisor(&self, d: &InvariantDivisor) -> Result<()> {
        if d.cover != self.fingerprint() {
            return Err(Error::Data(format!(
                "divisor belongs to cover {} not {}",
                d.cover,
                self.fingerprint()
            )));
        }
        if d.beta.len() != self.num_points() {
            return Err(Error::Data(format!(
                "divisor has {} coefficients, cover has {} branch points",
                d.beta.len(),
                self.num_points()
            )));
        }
        for (p, &b) in d.beta.iter().enumerate() {
            if b >= self.point_order(p) {
                return Err(Error::Data(format!(
                    "coefficient {b} at {} is not below the order {}",
                    self.points()[p].index,
                    self.point_order(p)
                )));
            }
        }
        Ok(())
    }

    /// `deg D = sum beta n / o - p n`.
    pub fn degree(&self, d: &InvariantDivisor) -> i64 {
        let n = self.n();
        let pos: u64 = d
            .beta
            .iter()
            .enumerate()
            .map(|(p, &b)| b * (n / self.point_order(p)))
            .sum();
        pos as i64 - d.pole * n as i64
    }

    fn support_count(&self, d: &InvariantDivisor, chi: usize) -> u64 {
        d.beta
            .iter()
            .enumerate()
            .filter(|&(p, &b)| contributes(b, self.point_order(p), self.u(chi, p)))
            .count() as u64
    }

    pub fn is_nonspecial(&self, d: &InvariantDivisor) -> Result<bool> {
        self.check_divisor(d)?;
        if d.pole != 1 {
            return Ok(false);
        }
        let ok = (0..self.characters().len()).all(|chi| self.support_count(d, chi) == self.t(chi));
        if ok && self.degree(d) != self.genus() as i64 - 1 {
            return Err(Error::Internal(format!(
                "non-special divisor {:?} has degree {} instead of g - 1 = {}",
                d.beta,
                self.degree(d),
                self.genus() as i64 - 1
            )));
        }
        Ok(ok)
    }

    fn require_nonspecial(&self, d: &InvariantDivisor) -> Result<()> {
        if self.is_nonspecial(d)? {
            Ok(())
        } else {
            Err(Error::Domain(format!("divisor {:?} with p = {} is not non-special", d.beta, d.pole)))
        }
    }

    /// Root indices of `p_{D,chi}`: points with `beta >= o - u_chi`.
    pub fn support_p(&self, d: &InvariantDivisor, chi: &Character) -> Result<Vec<BranchIndex>> {
        self.check_divisor(d)?;
        let c = self.character_index(chi)?;
        Ok(d.beta
            .iter()
            .enumerate()
            .filter(|&(p, &b)| contributes(b, self.point_order(p), self.u(c, p)))
            .map(|(p, _)| self.points()[p].index)
            .collect())
    }

    pub(crate) fn act(&self, d: &InvariantDivisor, chi: usize) -> InvariantDivisor {
        let beta = d
            .beta
            .iter()
            .enumerate()
            .map(|(p, &b)| (b + self.u(chi, p)) % self.point_order(p))
            .collect();
        InvariantDivisor { cover: d.cover, beta, pole: d.pole }
    }

    /// `chi D = D + div(y_chi) - div(p_{D,chi})`.
    pub fn chi_action(&self, d: &InvariantDivisor, chi: &Character) -> Result<InvariantDivisor> {
        self.require_nonspecial(d)?;
        let c = self.character_index(chi)?;
        let out = self.act(d, c);
        if !self.is_nonspecial(&out)? {
            return Err(Error::Internal(format!("{chi} moved {:?} off the non-special set", d.beta)));
        }
        Ok(out)
    }

    /// `N D = div(dz) - D`, i.e. `beta -> o - 1 - beta` with `p = 1`.
    pub fn negation(&self, d: &InvariantDivisor) -> Result<InvariantDivisor> {
        self.require_nonspecial(d)?;
        let beta = d
            .beta
            .iter()
            .enumerate()
            .map(|(p, &b)| self.point_order(p) - 1 - b)
            .collect();
        let out = InvariantDivisor { cover: d.cover, beta, pole: 1 };
        if !self.is_nonspecial(&out)? {
            return Err(Error::Internal(format!("negation of {:?} is not non-special", d.beta)));
        }
        Ok(out)
    }

    /// The dual-group orbit of `d`, one divisor per character in dual-group order.
    pub fn orbit(&self, d: &InvariantDivisor) -> Result<Vec<InvariantDivisor>> {
        self.require_nonspecial(d)?;
        let orbit: Vec<_> = (0..self.characters().len()).map(|c| self.act(d, c)).collect();
        let distinct: HashSet<&InvariantDivisor> = orbit.iter().collect();
        if distinct.len() != orbit.len() {
            return Err(Error::Internal(format!("dual group does not act freely on {:?}", d.beta)));
        }
        Ok(orbit)
    }

    /// Smallest member of the orbit of `d`; a canonical orbit label.
    pub fn orbit_representative(&self, d: &InvariantDivisor) -> Result<InvariantDivisor> {
        Ok(self.orbit(d)?.into_iter().min().expect("orbit is never empty"))
    }

    pub fn half_form_exponents(&self, d: &InvariantDivisor) -> Result<HalfFormExponents> {
        self.check_divisor(d)?;
        let exps = d
            .beta
            .iter()
            .enumerate()
            .map(|(p, &b)| centred(b, self.point_order(p)))
            .collect();
        Ok(HalfFormExponents { exps })
    }

    /// All non-special divisors, sorted by `beta`.
    pub fn enumerate_nonspecial(&self, opts: &SearchOptions) -> Result<Vec<InvariantDivisor>> {
        let search = Search::new(self, opts.cap);
        let frontier = search.frontier()?;
        let workers = opts.workers.max(1).min(frontier.len().max(1));
        let slots: Vec<Mutex<Vec<Vec<u64>>>> = frontier.iter().map(|_| Mutex::new(Vec::new())).collect();
        let next = AtomicUsize::new(0);
        let failed = Mutex::new(None);

        std::thread::scope(|sc| {
            for _ in 0..workers {
                sc.spawn(|| loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    if k >= frontier.len() {
                        break;
                    }
                    let mut found = Vec::new();
                    if let Err(e) = search.descend(&frontier[k], &mut found) {
                        failed.lock().expect("poisoned").get_or_insert(e);
                        break;
                    }
                    *slots[k].lock().expect("poisoned") = found;
                });
            }
        });
        if let Some(e) = failed.into_inner().expect("poisoned") {
            return Err(e);
        }
        let mut out: Vec<InvariantDivisor> = slots
            .into_iter()
            .flat_map(|s| s.into_inner().expect("poisoned"))
            .map(|beta| InvariantDivisor { cover: self.fingerprint(), beta, pole: 1 })
            .collect();
        out.sort();
        for d in &out {
            if self.degree(d) != self.genus() as i64 - 1 {
                return Err(Error::Internal(format!("enumerated {:?} has the wrong degree", d.beta)));
            }
        }
        Ok(out)
    }
}

#[inline]
fn contributes(beta: u64, order: u64, u: u64) -> bool {
    u > 0 && beta >= order - u
}

/// Partial assignment of the first `beta.len()` points.
#[derive(Debug, Clone)]
struct Node {
    beta: Vec<u64>,
    counts: Vec<u64>,
}

struct Search<'a> {
    cover: &'a Cover,
    targets: Vec<u64>,
    // remaining[p][chi] = points q >= p that can still raise count[chi]
    remaining: Vec<Vec<u64>>,
    cap: u64,
    visited: AtomicU64,
    aborted: AtomicBool,
}

impl<'a> Search<'a> {
    fn new(cover: &'a Cover, cap: u64) -> Self {
        let nchar = cover.characters().len();
        let npts = cover.num_points();
        let mut remaining = vec![vec![0u64; nchar]; npts + 1];
        for p in (0..npts).rev() {
            for c in 0..nchar {
                remaining[p][c] = remaining[p + 1][c] + u64::from(cover.u(c, p) > 0);
            }
        }
        Search {
            cover,
            targets: cover.invariants().t.clone(),
            remaining,
            cap,
            visited: AtomicU64::new(0),
            aborted: AtomicBool::new(false),
        }
    }

    fn visit(&self) -> Result<()> {
        if self.aborted.load(Ordering::Relaxed) {
            return Err(Error::SearchCapExceeded { cap: self.cap });
        }
        if self.visited.fetch_add(1, Ordering::Relaxed) >= self.cap {
            self.aborted.store(true, Ordering::Relaxed);
            return Err(Error::SearchCapExceeded { cap: self.cap });
        }
        Ok(())
    }

    fn feasible(&self, depth: usize, counts: &[u64]) -> bool {
        counts
            .iter()
            .zip(&self.targets)
            .zip(&self.remaining[depth])
            .all(|((&c, &t), &r)| c <= t && c + r >= t)
    }

    /// Children of `node` that survive pruning, in increasing `beta` order.
    fn children(&self, node: &Node) -> Result<Vec<Node>> {
        let p = node.beta.len();
        let order = self.cover.point_order(p);
        let mut out = Vec::new();
        for b in 0..order {
            self.visit()?;
            let mut counts = node.counts.clone();
            for (c, count) in counts.iter_mut().enumerate() {
                if contributes(b, order, self.cover.u(c, p)) {
                    *count += 1;
                }
            }
            if self.feasible(p + 1, &counts) {
                let mut beta = node.beta.clone();
                beta.push(b);
                out.push(Node { beta, counts });
            }
        }
        Ok(out)
    }

    fn frontier(&self) -> Result<Vec<Node>> {
        let root = Node { beta: Vec::new(), counts: vec![0; self.targets.len()] };
        if !self.feasible(0, &root.counts) {
            return Ok(Vec::new());
        }
        let mut level = vec![root];
        while level.len() < SPLIT_TARGET && level.first().is_some_and(|n| n.beta.len() < self.cover.num_points()) {
            let mut next = Vec::new();
            for node in &level {
                next.extend(self.children(node)?);
            }
            level = next;
        }
        Ok(level)
    }

    fn descend(&self, node: &Node, found: &mut Vec<Vec<u64>>) -> Result<()> {
        if node.beta.len() == self.cover.num_points() {
            // feasibility at full depth means every count hit its target
            found.push(node.beta.clone());
            return Ok(());
        }
        for child in self.children(node)? {
            self.descend(&child, found)?;
        }
        Ok(())
    }
}

/// Groups sorted non-special divisors into dual-group orbits, returning for
/// each divisor the index of its orbit (orbits numbered by first appearance).
pub fn orbit_labels(cover: &Cover, divisors: &[InvariantDivisor]) -> Result<Vec<usize>> {
    let mut reps: Vec<InvariantDivisor> = Vec::new();
    let mut labels = Vec::with_capacity(divisors.len());
    for d in divisors {
        let rep = cover.orbit_representative(d)?;
        let label = match reps.iter().position(|r| *r == rep) {
            Some(k) => k,
            None => {
                reps.push(rep);
                reps.len() - 1
            }
        };
        labels.push(label);
    }
    Ok(labels)
}
