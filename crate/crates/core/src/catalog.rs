//! Small worked covers used by the self-test, the test suites and the docs.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cover::{BranchPoint, CoverSpec};
use crate::group::AbelianGroup;

fn lambda(k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

/// `Z_n` with `count` branch points, all attached to the generator `1`.
/// Closes only when `n` divides `count`.
pub fn cyclic_full(n: u64, count: usize) -> CoverSpec {
    let g = AbelianGroup::cyclic(n).expect("n >= 2");
    let gen = g.element(vec![1]).expect("1 < n");
    let points = (0..count)
        .map(|k| BranchPoint { element: gen.clone(), lambda: lambda(k) })
        .collect();
    CoverSpec::new(g, points)
}

/// Double cover of the sphere branched over `count` points.
pub fn hyperelliptic(count: usize) -> CoverSpec {
    cyclic_full(2, count)
}

/// `Z_2 x Z_2` with two branch points on each of the three involutions.
pub fn klein_two_each() -> CoverSpec {
    let g = AbelianGroup::new(vec![2, 2]).expect("valid factors");
    let mut points = Vec::new();
    for (k, r) in [[0, 1], [1, 0], [1, 1]].iter().enumerate() {
        let el = g.element(r.to_vec()).expect("valid residues");
        for j in 0..2 {
            points.push(BranchPoint {
                element: el.clone(),
                lambda: BigRational::new(BigInt::from(2 * k + j + 1), BigInt::from(2)),
            });
        }
    }
    CoverSpec::new(g, points)
}

/// `Z_2 x Z_2` with two branch points on each of `(1,0)` and `(0,1)`.
pub fn klein_two_generators() -> CoverSpec {
    let g = AbelianGroup::new(vec![2, 2]).expect("valid factors");
    let mut points = Vec::new();
    for (k, r) in [[1, 0], [0, 1]].iter().enumerate() {
        let el = g.element(r.to_vec()).expect("valid residues");
        for j in 0..2 {
            points.push(BranchPoint { element: el.clone(), lambda: lambda(2 * k + j) });
        }
    }
    CoverSpec::new(g, points)
}

/// The fixed battery the cross-checks run over: `Z_2` with 6 points,
/// `Z_3` with 3, `Z_4` with 4, `Z_2 x Z_2` with two points per involution,
/// and `Z_6` with 6 points on the generator.
pub fn battery() -> Vec<CoverSpec> {
    vec![
        hyperelliptic(6),
        cyclic_full(3, 3),
        cyclic_full(4, 4),
        klein_two_each(),
        cyclic_full(6, 6),
    ]
}

pub fn battery_names() -> [&'static str; 5] {
    ["z2-6pt", "z3-3pt", "z4-4pt", "z2xz2-2each", "z6-6pt"]
}
