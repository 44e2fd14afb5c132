//! Bundled worked examples, each checked against every identity the library
//! promises.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use thomae_core::catalog;
use thomae_core::dedekind::{phi_exact, PhiKey};
use thomae_core::divisors::orbit_labels;
use thomae_core::{Cover, CoverSpec, InvariantDivisor, SearchOptions};

pub struct Outcome {
    pub name: String,
    pub result: Result<(), String>,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(p: i64, r: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(r))
}

pub fn run(opts: &SearchOptions) -> Vec<Outcome> {
    let mut out = Vec::new();
    out.push(Outcome { name: "dedekind values".into(), result: dedekind_values() });
    let cases = [
        ("hyperelliptic genus 2", catalog::hyperelliptic(6), Some((20, 10))),
        ("Z3 genus 1", catalog::cyclic_full(3, 3), Some((6, 2))),
        ("Z2 x Z2 two points per involution", catalog::klein_two_each(), None::<(usize, usize)>),
    ];
    for (name, spec, counts) in cases {
        out.push(Outcome { name: name.to_string(), result: check_cover(&spec, counts, opts) });
    }
    out
}

fn dedekind_values() -> Result<(), String> {
    for (d, h, s, v) in [(2, 1, 0, q(1, 4)), (2, 1, 1, q(-1, 4)), (3, 2, 0, q(1, 3)), (1, 0, 0, q(0, 1))] {
        let key = PhiKey::new(d, h, s).map_err(|e| e.to_string())?;
        let got = phi_exact(key);
        ensure(got == v, || format!("phi({d},{h},{s}) = {got}, expected {v}"))?;
    }
    Ok(())
}

fn check_cover(spec: &CoverSpec, counts: Option<(usize, usize)>, opts: &SearchOptions) -> Result<(), String> {
    let c = spec.validate().map_err(|e| e.to_string())?;
    let all = c.enumerate_nonspecial(opts).map_err(|e| e.to_string())?;
    let labels = orbit_labels(&c, &all).map_err(|e| e.to_string())?;
    let orbits = labels.iter().max().map_or(0, |m| m + 1);
    if let Some((rows, orb)) = counts {
        ensure((all.len(), orbits) == (rows, orb), || {
            format!("{} divisors in {orbits} orbits, expected {rows} in {orb}", all.len())
        })?;
    }
    ensure(!all.is_empty(), || "no non-special divisors".into())?;
    closure(&c, &all)?;
    for d in &all {
        exponents(&c, d)?;
    }
    for chi in 1..c.characters().len() {
        let s = c.build_pchichi(chi).map_err(|e| e.to_string())?;
        let ratio = s.polys[1].lead() / s.polys[0].lead();
        ensure(ratio == q(c.t(chi) as i64, 1), || format!("lead(f1)/lead(f0) = {ratio} for character {chi}"))?;
    }
    Ok(())
}

fn closure(c: &Cover, all: &[InvariantDivisor]) -> Result<(), String> {
    let set: BTreeSet<&InvariantDivisor> = all.iter().collect();
    let g1 = c.genus() as i64 - 1;
    for d in all {
        ensure(c.degree(d) == g1, || format!("{:?} has degree {}", d.beta(), c.degree(d)))?;
        let n = c.negation(d).map_err(|e| e.to_string())?;
        ensure(set.contains(&n), || format!("negation of {:?} missing", d.beta()))?;
        for (k, chi) in c.characters().iter().enumerate() {
            let moved = c.chi_action(d, chi).map_err(|e| e.to_string())?;
            ensure(set.contains(&moved), || format!("{chi} applied to {:?} missing", d.beta()))?;
            let lhs = c.negation(&moved).map_err(|e| e.to_string())?;
            let bar = &c.characters()[c.conjugate_index(k)];
            let rhs = c.chi_action(&n, bar).map_err(|e| e.to_string())?;
            ensure(lhs == rhs, || format!("dihedral relation fails for {chi} on {:?}", d.beta()))?;
        }
    }
    Ok(())
}

fn exponents(c: &Cover, d: &InvariantDivisor) -> Result<(), String> {
    let table = c.exponent_table(d, 1).map_err(|e| e.to_string())?;
    ensure(table.total_degree() == c.homogeneity_degree(), || {
        format!("{:?}: total degree {} vs {}", d.beta(), table.total_degree(), c.homogeneity_degree())
    })?;
    for a in c.branch_indices() {
        let lhs = c.point_exponent_sum(d, a).map_err(|e| e.to_string())?;
        let rhs = c.point_weight(a).map_err(|e| e.to_string())?;
        ensure(lhs == rhs, || format!("{:?}: point {a} sums to {lhs}, expected {rhs}", d.beta()))?;
        for b in c.branch_indices() {
            let x = c.q_e(d, a, b).map_err(|e| e.to_string())?;
            let y = c.q_e_closed_form(d, a, b).map_err(|e| e.to_string())?;
            ensure(x == y, || format!("{:?}: q_e({a},{b}) = {x} but closed form gives {y}", d.beta()))?;
        }
    }
    Ok(())
}
