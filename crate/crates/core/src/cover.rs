//! Branching data of an `A`-cover of the sphere and its validation.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, Character, GroupElement};

/// Canonical label of a branch point: rank of its group element in
/// lexicographic order, then its occurrence among the points on that element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BranchIndex {
    pub element_rank: usize,
    pub occurrence: usize,
}

impl fmt::Display for BranchIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.element_rank, self.occurrence)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchPoint {
    pub element: GroupElement,
    pub lambda: BigRational,
}

/// Unvalidated branching data, in input order.
#[derive(Debug, Clone)]
pub struct CoverSpec {
    pub group: AbelianGroup,
    pub points: Vec<BranchPoint>,
}

/// Identifies the cover a divisor belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub u64);

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl Serialize for Fingerprint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverInvariants {
    pub n: u64,
    pub m: u64,
    pub genus: u64,
    /// `t_chi`, indexed like [`Cover::characters`].
    pub t: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct CanonicalPoint {
    pub index: BranchIndex,
    pub element: GroupElement,
    pub order: u64,
    pub lambda: BigRational,
}

/// A validated cover. Points are stored in canonical [`BranchIndex`] order,
/// and every per-point vector in the crate is aligned with that order.
#[derive(Debug, Clone)]
pub struct Cover {
    group: AbelianGroup,
    points: Vec<CanonicalPoint>,
    characters: Vec<Character>,
    conjugates: Vec<usize>,
    // u[chi][point]
    u: Vec<Vec<u64>>,
    invariants: CoverInvariants,
    fingerprint: Fingerprint,
}

impl CoverSpec {
    pub fn new(group: AbelianGroup, points: Vec<BranchPoint>) -> Self {
        CoverSpec { group, points }
    }

    /// `t_chi` for every character as an exact rational, with no validation.
    /// On a valid cover all of these are nonnegative integers.
    pub fn character_weights(&self) -> Result<Vec<BigRational>> {
        let g = &self.group;
        g.dual_group()
            .iter()
            .map(|chi| {
                let mut t = BigRational::zero();
                for p in &self.points {
                    let u = g.pairing_u(chi, &p.element)?;
                    let o = g.element_order(&p.element)?;
                    t += BigRational::new(BigInt::from(u), BigInt::from(o));
                }
                Ok(t)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<Cover> {
        let g = &self.group;
        if self.points.is_empty() {
            return Err(Error::NoBranchPoints);
        }
        for (i, p) in self.points.iter().enumerate() {
            g.element(p.element.residues().to_vec())?;
            if g.is_identity(&p.element) {
                return Err(Error::TrivialBranchElement { index: i });
            }
        }
        let mut seen = BTreeSet::new();
        for p in &self.points {
            if !seen.insert(p.lambda.clone()) {
                return Err(Error::DuplicateLambda(p.lambda.to_string()));
            }
        }
        let sum = self
            .points
            .iter()
            .fold(g.identity(), |acc, p| g.add(&acc, &p.element));
        if !g.is_identity(&sum) {
            return Err(Error::Monodromy { sum: sum.residues().to_vec() });
        }
        let generated = g.generated_subgroup(self.points.iter().map(|p| &p.element)).len() as u64;
        if generated != g.order() {
            return Err(Error::Disconnected { generated, order: g.order() });
        }

        let n = g.order();
        let m = g.exponent();

        let mut ranked = Vec::with_capacity(self.points.len());
        for p in &self.points {
            ranked.push((g.rank(&p.element)?, p));
        }
        // stable: occurrences keep their input order within an element
        ranked.sort_by_key(|(rank, _)| *rank);
        let mut points: Vec<CanonicalPoint> = Vec::with_capacity(ranked.len());
        for (rank, p) in ranked {
            let occurrence = points
                .last()
                .filter(|q| q.index.element_rank == rank)
                .map_or(0, |q| q.index.occurrence + 1);
            points.push(CanonicalPoint {
                index: BranchIndex { element_rank: rank, occurrence },
                element: p.element.clone(),
                order: g.element_order(&p.element)?,
                lambda: p.lambda.clone(),
            });
        }

        // 2g = 2 - 2n + sum_points n (o - 1) / o
        let twice_genus: i128 = 2 - 2 * n as i128
            + points
                .iter()
                .map(|p| (n / p.order * (p.order - 1)) as i128)
                .sum::<i128>();
        if twice_genus < 0 || twice_genus % 2 != 0 {
            return Err(Error::Internal(format!("genus 2g = {twice_genus} is not a nonnegative even integer")));
        }
        let genus = (twice_genus / 2) as u64;

        let characters = g.dual_group();
        let conjugates = characters
            .iter()
            .map(|chi| {
                let bar = g.conjugate(chi);
                characters.iter().position(|c| *c == bar).expect("dual group is closed under conjugation")
            })
            .collect();
        let mut u = Vec::with_capacity(characters.len());
        let mut t = Vec::with_capacity(characters.len());
        for chi in &characters {
            let row: Vec<u64> = points
                .iter()
                .map(|p| g.pairing_u(chi, &p.element))
                .collect::<Result<_>>()?;
            // t_chi = sum u / o, over the common denominator m
            let numer: u128 = row
                .iter()
                .zip(&points)
                .map(|(&uu, p)| uu as u128 * (m / p.order) as u128)
                .sum();
            if !numer.is_multiple_of(m as u128) {
                return Err(Error::Internal(format!("t for character {chi} is not integral")));
            }
            t.push((numer / m as u128) as u64);
            u.push(row);
        }

        let fingerprint = fingerprint_of(g, &points);
        Ok(Cover {
            group: g.clone(),
            points,
            characters,
            conjugates,
            u,
            invariants: CoverInvariants { n, m, genus, t },
            fingerprint,
        })
    }
}

fn fingerprint_of(g: &AbelianGroup, points: &[CanonicalPoint]) -> Fingerprint {
    let mut hasher = Sha256::new();
    hasher.update(format!("{:?};", g.factors()));
    for p in points {
        hasher.update(format!("{}:{}={};", p.index, p.element, p.lambda));
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    Fingerprint(u64::from_be_bytes(bytes))
}

impl Cover {
    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn points(&self) -> &[CanonicalPoint] {
        &self.points
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn invariants(&self) -> &CoverInvariants {
        &self.invariants
    }

    pub fn n(&self) -> u64 {
        self.invariants.n
    }

    pub fn m(&self) -> u64 {
        self.invariants.m
    }

    pub fn genus(&self) -> u64 {
        self.invariants.genus
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    /// The dual group in [`AbelianGroup::dual_group`] order.
    pub fn characters(&self) -> &[Character] {
        &self.characters
    }

    pub fn character_index(&self, chi: &Character) -> Result<usize> {
        self.characters
            .iter()
            .position(|c| c == chi)
            .ok_or_else(|| Error::Data(format!("character {chi} does not belong to this cover's group")))
    }

    pub fn conjugate_index(&self, chi: usize) -> usize {
        self.conjugates[chi]
    }

    pub fn t(&self, chi: usize) -> u64 {
        self.invariants.t[chi]
    }

    /// `u_{chi, sigma}` for the element carried by `point`.
    pub fn u(&self, chi: usize, point: usize) -> u64 {
        self.u[chi][point]
    }

    pub fn point_order(&self, point: usize) -> u64 {
        self.points[point].order
    }

    pub fn branch_indices(&self) -> impl Iterator<Item = BranchIndex> + '_ {
        self.points.iter().map(|p| p.index)
    }

    pub fn position(&self, index: BranchIndex) -> Result<usize> {
        self.points
            .binary_search_by(|p| p.index.cmp(&index))
            .map_err(|_| Error::Data(format!("branch index {index} is not part of this cover")))
    }

    /// `r_sigma`, the number of branch points attached to `s`.
    pub fn multiplicity(&self, s: &GroupElement) -> usize {
        self.points.iter().filter(|p| p.element == *s).count()
    }

    /// Pairs `(chi, k)` with `chi != 1` and `0 <= k <= t_{conj chi} - 2`,
    /// one per basis differential `z^k psi_chi`.
    pub fn differential_basis_descriptor(&self) -> Vec<(Character, u64)> {
        let mut out = Vec::new();
        for (i, chi) in self.characters.iter().enumerate() {
            if chi.is_trivial() {
                continue;
            }
            let tbar = self.t(self.conjugate_index(i));
            for k in 0..tbar.saturating_sub(1) {
                out.push((chi.clone(), k));
            }
        }
        out
    }

    /// `sum_{sigma, j} (o - 1) / (2 o)`, which equals `(g + n - 1) / n`.
    pub fn ramification_weight(&self) -> BigRational {
        self.points
            .iter()
            .map(|p| BigRational::new(BigInt::from(p.order - 1), BigInt::from(2 * p.order)))
            .sum()
    }

    pub fn lambda_f64(&self, point: usize) -> f64 {
        self.points[point].lambda.to_f64().unwrap_or(f64::NAN)
    }
}
