//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use thomae_core::catalog;
use thomae_core::dedekind::{
    classical_dedekind_sum, fractional_part, phi_by_reciprocity, phi_exact, phi_h_one, phi_numeric_oracle, PhiKey,
};
use thomae_core::divisors::orbit_labels;
use thomae_core::exponents::{gamma, gamma_closed_form};
use thomae_core::polykernel::{mat_inverse, pascal_m, solve_polexist};
use thomae_core::{AbelianGroup, Cover, Error, InvariantDivisor, PairKey, SearchOptions, UniPoly};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(p: i64, r: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(r))
}

fn err(e: Error) -> String {
    e.to_string()
}

fn key(d: u64, h: u64, s: u64) -> PhiKey {
    PhiKey::new(d, h as i64, s as i64).unwrap()
}

fn units(d: u64) -> impl Iterator<Item = u64> {
    (0..d).filter(move |h| h.gcd(&d) == 1)
}

fn battery() -> Vec<Cover> {
    catalog::battery().into_iter().map(|s| s.validate().unwrap()).collect()
}

fn opts(workers: usize) -> SearchOptions {
    SearchOptions { workers, ..Default::default() }
}

// 1 ---------------------------------------------------------------------

fn dedekind_suite() -> Check {
    for d in 1..=40u64 {
        for h in units(d) {
            let hinv = key(d, h, 0).h_inverse();
            let mut total = BigRational::zero();
            for s in 0..d {
                let k = key(d, h, s);
                let v = phi_exact(k);
                // phi(s + h) - phi(s) = s - (d-1)/2
                let next = phi_exact(key(d, h, (s + h) % d));
                ensure(&next - &v == q(2 * s as i64 - (d as i64 - 1), 2), || format!("shift law at {k:?}"))?;
                ensure(phi_by_reciprocity(k) == v, || format!("reciprocity at {k:?}"))?;
                // phi_h(s) = phi_{h^-1}(-h^-1 s)
                let sym = phi_exact(PhiKey::new(d, hinv as i64, -((hinv * s) as i64)).map_err(err)?);
                ensure(sym == v, || format!("inverse symmetry at {k:?}"))?;
                if h == 1 % d {
                    ensure(phi_h_one(d, s) == v, || format!("h = 1 closed form at {k:?}"))?;
                }
                total += v;
            }
            ensure(total.is_zero(), || format!("zero sum fails for d = {d}, h = {h}"))?;
            let bridge = classical_dedekind_sum(h as i64, d).map_err(err)? * BigRational::from_integer(d.into())
                + q(d as i64 - 1, 4);
            ensure(bridge == phi_exact(key(d, h, 0)), || format!("bridge to s(h, d) fails at d = {d}, h = {h}"))?;
        }
    }
    for d in 1..=60u64 {
        for h in units(d) {
            for s in 0..d {
                let mut class = BigRational::zero();
                if d % 2 == 0 {
                    class += q(1 + 2 * s as i64, 4);
                }
                if d % 3 == 0 {
                    class -= q(h as i64, 3);
                }
                let class = fractional_part(&class);
                let v = phi_exact(key(d, h, s));
                ensure(fractional_part(&v) == class, || format!("integrality class at ({d},{h},{s}): {v}"))?;
            }
        }
    }
    Ok(())
}

// 2 ---------------------------------------------------------------------

fn numeric_oracle() -> Check {
    let tol = 2f64.powi(-40);
    let mut worst = 0f64;
    for d in 1..=30u64 {
        for h in units(d) {
            for s in 0..d {
                let k = key(d, h, s);
                let exact = phi_exact(k).to_f64().unwrap();
                let z = phi_numeric_oracle(k);
                let e = (z.re - exact).abs().max(z.im.abs());
                worst = worst.max(e);
                ensure(e < tol, || format!("oracle error {e:e} at {k:?}"))?;
            }
        }
    }
    println!("    worst oracle error {worst:e}");
    Ok(())
}

// 3 ---------------------------------------------------------------------

#[derive(Serialize)]
struct PairValue {
    divisor: usize,
    a: String,
    b: String,
    q_e: String,
}

fn closed_forms(covers: &[Cover], workers: usize) -> Result<Vec<Vec<PairValue>>, String> {
    let mut out = Vec::new();
    for c in covers {
        let all = c.enumerate_nonspecial(&opts(workers)).map_err(err)?;
        let mut values = Vec::new();
        for (k, d) in all.iter().enumerate() {
            for a in c.branch_indices() {
                for b in c.branch_indices() {
                    let brute = c.q_e(d, a, b).map_err(err)?;
                    let closed = c.q_e_closed_form(d, a, b).map_err(err)?;
                    ensure(brute == closed, || format!("q_e mismatch on {:?} at {a}, {b}", d.beta()))?;
                    values.push(PairValue { divisor: k, a: a.to_string(), b: b.to_string(), q_e: closed.to_string() });
                }
            }
        }
        let g = c.group();
        let els: Vec<_> = g.elements().into_iter().filter(|s| !g.is_identity(s)).collect();
        for s in &els {
            for r in &els {
                ensure(gamma(g, s, r).map_err(err)? == gamma_closed_form(g, s, r).map_err(err)?, || {
                    format!("gamma mismatch at {s}, {r}")
                })?;
            }
        }
        out.push(values);
    }
    Ok(out)
}

fn factor_lists(limit: u64) -> Vec<Vec<u64>> {
    fn go(prefix: &mut Vec<u64>, product: u64, limit: u64, out: &mut Vec<Vec<u64>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        for f in 2..=limit / product {
            prefix.push(f);
            go(prefix, product * f, limit, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), 1, limit, &mut out);
    out
}

fn gamma_all_groups() -> Check {
    for f in factor_lists(24) {
        let g = AbelianGroup::new(f).map_err(err)?;
        let els: Vec<_> = g.elements().into_iter().filter(|s| !g.is_identity(s)).collect();
        for s in &els {
            for r in &els {
                let a = gamma(&g, s, r).map_err(err)?;
                ensure(a == gamma_closed_form(&g, s, r).map_err(err)?, || {
                    format!("gamma mismatch in {:?} at {s}, {r}", g.factors())
                })?;
            }
        }
    }
    Ok(())
}

// 4 ---------------------------------------------------------------------

#[derive(Serialize)]
struct Listing {
    betas: Vec<Vec<u64>>,
    orbits: Vec<usize>,
}

fn enumeration(covers: &[Cover], workers: usize) -> Result<Vec<Listing>, String> {
    let mut listings = Vec::new();
    for c in covers {
        let all = c.enumerate_nonspecial(&opts(workers)).map_err(err)?;
        let labels = orbit_labels(c, &all).map_err(err)?;
        let set: BTreeSet<&InvariantDivisor> = all.iter().collect();
        let g1 = c.genus() as i64 - 1;
        for d in &all {
            ensure(c.degree(d) == g1, || format!("{:?} has degree {}", d.beta(), c.degree(d)))?;
            let n = c.negation(d).map_err(err)?;
            ensure(set.contains(&n), || format!("N{:?} missing", d.beta()))?;
            for (k, chi) in c.characters().iter().enumerate() {
                let moved = c.chi_action(d, chi).map_err(err)?;
                ensure(set.contains(&moved), || format!("{chi}{:?} missing", d.beta()))?;
                let bar = &c.characters()[c.conjugate_index(k)];
                let lhs = c.negation(&moved).map_err(err)?;
                let rhs = c.chi_action(&n, bar).map_err(err)?;
                ensure(lhs == rhs, || format!("N chi D != chibar N D for {chi}, {:?}", d.beta()))?;
            }
        }
        listings.push(Listing { betas: all.iter().map(|d| d.beta().to_vec()).collect(), orbits: labels });
    }
    let count = |l: &Listing| (l.betas.len(), l.orbits.iter().max().map_or(0, |m| m + 1));
    ensure(count(&listings[0]) == (20, 10), || format!("hyperelliptic gives {:?}", count(&listings[0])))?;
    ensure(count(&listings[1]) == (6, 2), || format!("Z3 gives {:?}", count(&listings[1])))?;
    Ok(listings)
}

// 5 ---------------------------------------------------------------------

fn hyperelliptic_table() -> Check {
    let c = catalog::hyperelliptic(6).validate().map_err(err)?;
    let d = c.divisor(vec![1, 1, 1, 0, 0, 0], 1).map_err(err)?;
    let t = c.exponent_table(&d, 1).map_err(err)?;
    ensure(t.entries.len() == 15, || format!("{} pairs", t.entries.len()))?;
    for e in &t.entries {
        let same = (e.pair.first().occurrence < 3) == (e.pair.second().occurrence < 3);
        let want = if same { 4 } else { 0 };
        ensure(e.exponent == want, || format!("pair {:?} has exponent {}", e.pair, e.exponent))?;
    }
    ensure((t.theta_exponent, t.detc_exponent) == (16, 8), || "theta/detC exponents".into())?;
    let t_sum: u64 = c.invariants().t.iter().map(|&t| t * t.saturating_sub(1)).sum();
    ensure(t.total_degree() == 24 && (2 * c.m() * t_sum) as i64 == 24, || format!("total degree {}", t.total_degree()))
}

// 6 ---------------------------------------------------------------------

fn tables(covers: &[Cover], workers: usize) -> Result<Vec<Vec<thomae_core::ExponentTable>>, String> {
    let mut out = Vec::new();
    for c in covers {
        let all = c.enumerate_nonspecial(&opts(workers)).map_err(err)?;
        let mut ts = Vec::with_capacity(all.len());
        for d in &all {
            let t = c.exponent_table(d, workers).map_err(err)?;
            for e in &t.entries {
                ensure(e.exponent % 2 == 0, || format!("odd exponent {} at {:?}", e.exponent, e.pair))?;
            }
            ensure(t.total_degree() == c.homogeneity_degree(), || {
                format!("degree identity fails on {:?}: {} vs {}", d.beta(), t.total_degree(), c.homogeneity_degree())
            })?;
            for a in c.branch_indices() {
                let lhs = c.point_exponent_sum(d, a).map_err(err)?;
                let rhs = c.point_weight(a).map_err(err)?;
                ensure(lhs == rhs, || format!("per-point identity fails on {:?} at {a}: {lhs} vs {rhs}", d.beta()))?;
                // the combination behind each exponent, assembled independently
                for b in c.branch_indices().filter(|&b| b > a) {
                    let g = gamma(c.group(), &c.points()[c.position(a).unwrap()].element, &c.points()[c.position(b).unwrap()].element)
                        .map_err(err)?;
                    let via = (q(2, 1) * c.q_e(d, a, b).map_err(err)? + g * q(c.n() as i64, 1)) * q(4 * c.m() as i64, 1);
                    let got = t.get(PairKey::new(a, b).map_err(err)?).unwrap();
                    ensure(via == q(got, 1), || format!("exponent {got} at {a},{b} but 4m(2q_e+n gamma) = {via}"))?;
                }
            }
            ts.push(t);
        }
        let mut related = 0usize;
        for (i, d1) in all.iter().enumerate() {
            for (j, d2) in all.iter().enumerate() {
                if let Some(perm) = c.relabel_equivalent(d1, d2).map_err(err)? {
                    related += 1;
                    ensure(perm.matches_tables(c, &ts[i], &ts[j]).map_err(err)?, || {
                        format!("tables of {:?} and {:?} do not match under relabeling", d1.beta(), d2.beta())
                    })?;
                }
            }
        }
        ensure(related >= all.len(), || "relabeling check saw too few pairs".into())?;
        out.push(ts);
    }
    Ok(out)
}

// 7 ---------------------------------------------------------------------

fn polexist_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0711_03ae);
    for case in 0..200 {
        let d = rng.gen_range(1..=6usize);
        let e = rng.gen_range(1..=6usize);
        let mut roots: BTreeSet<i64> = BTreeSet::new();
        while roots.len() < d + e {
            roots.insert(rng.gen_range(-60..60));
        }
        let roots: Vec<BigRational> = roots.into_iter().map(|r| q(r, 5)).collect();
        let f0 = UniPoly::from_roots(&roots);
        let mut c: Vec<BigRational> = (0..d + e - 1).map(|_| q(rng.gen_range(-20..20), rng.gen_range(1..6))).collect();
        c.push(q(d as i64, 1) * f0.lead());
        let f1 = UniPoly::new(c.clone());
        let sol = solve_polexist(&f0, &f1, d, e).map_err(|x| format!("case {case} (d={d}, e={e}): {x}"))?;
        ensure(sol.w_degree() <= e as i64, || format!("case {case}: w-degree {}", sol.w_degree()))?;
        sol.verify().map_err(err)?;

        let mut delta = q(rng.gen_range(1..9), rng.gen_range(1..9));
        if rng.gen_bool(0.5) {
            delta = -delta;
        }
        let last = c.len() - 1;
        c[last] += delta;
        if c[last].is_zero() {
            continue;
        }
        let refused = matches!(solve_polexist(&f0, &UniPoly::new(c), d, e), Err(Error::NoSolution(_)));
        ensure(refused, || format!("case {case}: perturbed leading coefficient accepted"))?;
    }
    for d in 1..=12usize {
        let inv = mat_inverse(&pascal_m(d)).ok_or("M is singular")?;
        ensure(inv[0][0] == q(d as i64, 1), || format!("M^-1[0][0] = {} for d = {d}", inv[0][0]))?;
    }
    for c in battery() {
        for chi in 1..c.characters().len() {
            let s = c.build_pchichi(chi).map_err(err)?;
            let r = s.polys[1].lead() / s.polys[0].lead();
            ensure(r == q(c.t(chi) as i64, 1), || format!("lead ratio {r} for character {chi}"))?;
        }
    }
    Ok(())
}

// 8 ---------------------------------------------------------------------

#[derive(Serialize)]
struct Outputs {
    closed_forms: Vec<Vec<PairValue>>,
    listings: Vec<Listing>,
    tables: Vec<Vec<thomae_core::ExponentTable>>,
}

fn outputs(workers: usize) -> Result<String, String> {
    let covers = battery();
    let o = Outputs {
        closed_forms: closed_forms(&covers, workers)?,
        listings: enumeration(&covers, workers)?,
        tables: tables(&covers, workers)?,
    };
    serde_json::to_string(&o).map_err(|e| e.to_string())
}

// -----------------------------------------------------------------------

fn run(label: &str, limit: Option<Duration>, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let took = start.elapsed();
    let result = result.and_then(|()| match limit {
        Some(l) if took > l => Err(format!("took {took:.2?}, limit {l:?}")),
        _ => Ok(()),
    });
    match &result {
        Ok(()) => println!("PASS  {label} ({took:.2?})"),
        Err(m) => println!("FAIL  {label} ({took:.2?}): {m}"),
    }
    result.is_ok()
}

fn main() {
    let covers = battery();
    let secs = Duration::from_secs;
    let results = [
        run("1 dedekind identities (d <= 40) and integrality classes (d <= 60)", Some(secs(10)), dedekind_suite),
        run("2 numeric oracle agreement (d <= 30, error < 2^-40)", Some(secs(5)), numeric_oracle),
        run("3 q_e and gamma closed forms on the battery", Some(secs(60)), || {
            closed_forms(&covers, 1)?;
            gamma_all_groups()
        }),
        run("4 enumeration counts, degree, closure and dihedral relation", None, || enumeration(&covers, 1).map(drop)),
        run("5 hyperelliptic genus 2 exponent table", None, hyperelliptic_table),
        run("6 evenness, degree, per-point and relabeling identities on the battery", None, || {
            tables(&covers, 1).map(drop)
        }),
        run("7 polexist solver, necessity, M^-1 and p_chichi", None, polexist_suite),
        run("8 outputs of 3-6 identical with 1 and 8 workers", None, || {
            let one = outputs(1)?;
            let eight = outputs(8)?;
            ensure(one == eight, || "serialized outputs differ".into())
        }),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
