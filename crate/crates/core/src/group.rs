//! Finite abelian groups given as a product of cyclic factors, their dual
//! groups, and the pairing data consumed by the rest of the crate.
//!
//! Elements and characters are both residue vectors against the factor
//! orders `m_1, ..., m_q`. The pairing `chi(s)` is the root of unity
//! `exp(2 pi i * sum_l e_l d_l / m_l)`; everything here is kept in integer
//! arithmetic over the common denominator `m` (the group exponent).

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AbelianGroup {
    factors: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct GroupElement {
    residues: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Character {
    residues: Vec<u64>,
}

/// Size `d` of `<s> ∩ <r>` together with the unit `h` mod `d` defined by
/// `r^(o(r)/d) = (s^(o(s)/d))^h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct IntersectionData {
    pub d: u64,
    pub h: u64,
}

impl GroupElement {
    pub fn residues(&self) -> &[u64] {
        &self.residues
    }
}

impl Character {
    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn is_trivial(&self) -> bool {
        self.residues.iter().all(|&e| e == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_residues(f, &self.residues)
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_residues(f, &self.residues)
    }
}

fn write_residues(f: &mut fmt::Formatter<'_>, residues: &[u64]) -> fmt::Result {
    write!(f, "(")?;
    for (k, r) in residues.iter().enumerate() {
        if k > 0 {
            write!(f, ",")?;
        }
        write!(f, "{r}")?;
    }
    write!(f, ")")
}

impl AbelianGroup {
    /// Builds `Z_{m_1} x ... x Z_{m_q}` in the given factor order. An empty
    /// factor list is the trivial group.
    pub fn new(factors: Vec<u64>) -> Result<Self> {
        if let Some(&bad) = factors.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidFactor(bad));
        }
        Ok(AbelianGroup { factors })
    }

    pub fn cyclic(m: u64) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.factors.iter().fold(1, |acc, &m| acc.lcm(&m))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { residues: vec![0; self.factors.len()] }
    }

    pub fn trivial_character(&self) -> Character {
        Character { residues: vec![0; self.factors.len()] }
    }

    fn check_residues(&self, residues: &[u64]) -> Result<()> {
        let ok = residues.len() == self.factors.len()
            && residues.iter().zip(&self.factors).all(|(r, m)| r < m);
        if ok {
            Ok(())
        } else {
            Err(Error::MalformedElement {
                residues: residues.to_vec(),
                factors: self.factors.clone(),
            })
        }
    }

    pub fn element(&self, residues: Vec<u64>) -> Result<GroupElement> {
        self.check_residues(&residues)?;
        Ok(GroupElement { residues })
    }

    pub fn character(&self, residues: Vec<u64>) -> Result<Character> {
        self.check_residues(&residues)?;
        Ok(Character { residues })
    }

    /// All elements in lexicographic residue order (identity first).
    pub fn elements(&self) -> Vec<GroupElement> {
        self.residue_vectors()
            .into_iter()
            .map(|residues| GroupElement { residues })
            .collect()
    }

    /// Position of `s` in [`AbelianGroup::elements`].
    pub fn rank(&self, s: &GroupElement) -> Result<usize> {
        self.check_residues(&s.residues)?;
        Ok(s.residues
            .iter()
            .zip(&self.factors)
            .fold(0usize, |acc, (&r, &m)| acc * m as usize + r as usize))
    }

    fn residue_vectors(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::with_capacity(self.factors.len())];
        for &m in &self.factors {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..m).map(move |r| {
                        let mut v = prefix.clone();
                        v.push(r);
                        v
                    })
                })
                .collect();
        }
        out
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let residues = a
            .residues
            .iter()
            .zip(&b.residues)
            .zip(&self.factors)
            .map(|((x, y), m)| (x + y) % m)
            .collect();
        GroupElement { residues }
    }

    /// `k * s` in additive notation, i.e. `s^k`.
    pub fn scale(&self, s: &GroupElement, k: u64) -> GroupElement {
        let residues = s
            .residues
            .iter()
            .zip(&self.factors)
            .map(|(&x, &m)| ((x as u128 * k as u128) % m as u128) as u64)
            .collect();
        GroupElement { residues }
    }

    pub fn is_identity(&self, s: &GroupElement) -> bool {
        s.residues.iter().all(|&r| r == 0)
    }

    /// `o(s) = lcm_l m_l / gcd(m_l, d_l)`.
    pub fn element_order(&self, s: &GroupElement) -> Result<u64> {
        self.check_residues(&s.residues)?;
        Ok(s.residues
            .iter()
            .zip(&self.factors)
            .fold(1, |acc, (&d, &m)| acc.lcm(&(m / m.gcd(&d)))))
    }

    /// All `n` characters, trivial first, then lexicographic on residues.
    pub fn dual_group(&self) -> Vec<Character> {
        self.residue_vectors()
            .into_iter()
            .map(|residues| Character { residues })
            .collect()
    }

    pub fn conjugate(&self, chi: &Character) -> Character {
        let residues = chi
            .residues
            .iter()
            .zip(&self.factors)
            .map(|(&e, &m)| (m - e) % m)
            .collect();
        Character { residues }
    }

    /// The integer `0 <= u < o(s)` with `chi(s) = e(u / o(s))`.
    pub fn pairing_u(&self, chi: &Character, s: &GroupElement) -> Result<u64> {
        self.check_residues(&chi.residues)?;
        let order = self.element_order(s)?;
        let m = self.exponent();
        // sum_l e_l d_l / m_l  ==  numer / m  (mod 1)
        let numer = chi
            .residues
            .iter()
            .zip(&s.residues)
            .zip(&self.factors)
            .fold(0u128, |acc, ((&e, &d), &ml)| {
                (acc + e as u128 * d as u128 * (m / ml) as u128) % m as u128
            });
        let scaled = numer * order as u128;
        if !scaled.is_multiple_of(m as u128) {
            return Err(Error::Internal(format!(
                "pairing of {chi} with {s} is not an o(s)-th root of unity"
            )));
        }
        Ok((scaled / m as u128) as u64)
    }

    /// The cyclic subgroup generated by `s`, as a set.
    pub fn cyclic_subgroup(&self, s: &GroupElement) -> Result<BTreeSet<GroupElement>> {
        let order = self.element_order(s)?;
        Ok((0..order).map(|k| self.scale(s, k)).collect())
    }

    /// Subgroup generated by a family of elements (closure under addition).
    pub fn generated_subgroup<'a, I>(&self, gens: I) -> BTreeSet<GroupElement>
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        let gens: Vec<&GroupElement> = gens.into_iter().collect();
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.identity()];
        seen.insert(self.identity());
        while let Some(x) = stack.pop() {
            for g in &gens {
                let y = self.add(&x, g);
                if seen.insert(y.clone()) {
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Brute-force `d = |<s> ∩ <r>|` and the unit `h` with
    /// `r^(o(r)/d) = (s^(o(s)/d))^h`, reduced to `0 <= h < d`.
    pub fn intersection_data(&self, s: &GroupElement, r: &GroupElement) -> Result<IntersectionData> {
        if self.is_identity(s) || self.is_identity(r) {
            return Err(Error::Domain(
                "intersection data needs two nontrivial elements".into(),
            ));
        }
        let os = self.element_order(s)?;
        let or = self.element_order(r)?;
        let cs = self.cyclic_subgroup(s)?;
        let cr = self.cyclic_subgroup(r)?;
        let d = cs.intersection(&cr).count() as u64;
        if d == 1 {
            return Ok(IntersectionData { d: 1, h: 0 });
        }
        let a = self.scale(s, os / d);
        let b = self.scale(r, or / d);
        (1..d)
            .find(|&h| h.gcd(&d) == 1 && self.scale(&a, h) == b)
            .map(|h| IntersectionData { d, h })
            .ok_or_else(|| {
                Error::Internal(format!("no unit h relates {s} and {r} in their intersection"))
            })
    }
}
