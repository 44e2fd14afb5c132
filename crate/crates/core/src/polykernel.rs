//! Polynomials `f_0..f_d` with `sum_l f_l(w) (z - w)^l` of bounded degree in `w`.
//!
//! Write `f_l(w) = sum_k a_{l,k} (-w)^k`. Expanding, the coefficient of
//! `z^i (-w)^j` is `sum_l binom(l, i) a_{l, i+j-l}`, so the degree bound `e`
//! asks that, at every total degree `s = d + e - h`, the equations
//!
//! `sum_l binom(l, i) a_{l, s-l} = 0` for `i = 0 .. d-h-1`
//!
//! hold. At `h = 0` every coefficient `a_{l, d+e-l}` appears and the system
//! is `M x = b` with `M_{i,l} = binom(l, i-1)` (1-based), which factors as
//! the lower Jordan matrix `J` times the Pascal matrix `T_{i,l} = binom(l-1,
//! i-1)`. Its solution forces `a_{1,d+e-1} = -d a_{0,d+e}`, i.e. the leading
//! coefficient of `f_1` must be `d` times that of `f_0`. Below the top level
//! the `d - h` highest admissible `l` are solved for and the rest are zero.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::rational::integer;

/// Univariate polynomial with exact coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UniPoly {
    coeffs: Vec<BigRational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| integer(c)).collect())
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::new(vec![BigRational::one()])
    }

    /// `c z^k`
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a BigRational>) -> Self {
        roots.into_iter().fold(Self::one(), |p, r| p.mul_linear(r))
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero past the end.
    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Degree, `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn lead(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    /// `self * (z - r)`
    pub fn mul_linear(&self, r: &BigRational) -> Self {
        let mut out = vec![BigRational::zero(); self.coeffs.len() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k + 1] += c;
            out[k] -= c * r;
        }
        Self::new(out)
    }

    /// Quotient and remainder of division by `z - r`.
    pub fn div_linear(&self, r: &BigRational) -> (Self, BigRational) {
        if self.coeffs.is_empty() {
            return (Self::zero(), BigRational::zero());
        }
        let mut q = vec![BigRational::zero(); self.coeffs.len() - 1];
        let mut carry = BigRational::zero();
        for k in (0..self.coeffs.len()).rev() {
            let v = &self.coeffs[k] + &carry * r;
            if k == 0 {
                return (Self::new(q), v);
            }
            q[k - 1] = v.clone();
            carry = v;
        }
        unreachable!("loop returns at k = 0")
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn eval(&self, z: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * z + c)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ if a.is_one() => {}
                _ => write!(f, "{a}*")?,
            }
            match k {
                0 => {}
                1 => write!(f, "w")?,
                _ => write!(f, "w^{k}")?,
            }
        }
        Ok(())
    }
}

/// Dense bivariate polynomial, `coeffs[i][j]` the coefficient of `z^i w^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiPoly {
    pub coeffs: Vec<Vec<BigRational>>,
}

impl BiPoly {
    /// Largest `j` with a nonzero `z^i w^j` coefficient, `-1` if zero.
    pub fn w_degree(&self) -> i64 {
        self.coeffs
            .iter()
            .filter_map(|row| row.iter().rposition(|c| !c.is_zero()))
            .max()
            .map_or(-1, |j| j as i64)
    }

    pub fn eval(&self, z: &BigRational, w: &BigRational) -> BigRational {
        let mut total = BigRational::zero();
        let mut zp = BigRational::one();
        for row in &self.coeffs {
            let mut wp = BigRational::one();
            for c in row {
                total += c * &zp * &wp;
                wp *= w;
            }
            zp *= z;
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSolution {
    pub polys: Vec<UniPoly>,
    pub d: usize,
    pub e: usize,
}

impl KernelSolution {
    /// `sum_l f_l(w) (z - w)^l`, expanded into monomials.
    pub fn assembly(&self) -> BiPoly {
        let width = self
            .polys
            .iter()
            .enumerate()
            .map(|(l, f)| f.coeffs().len() + l)
            .max()
            .unwrap_or(0);
        let mut coeffs = vec![vec![BigRational::zero(); width]; self.polys.len()];
        for (l, f) in self.polys.iter().enumerate() {
            for i in 0..=l {
                // (z - w)^l = sum_i binom(l,i) z^i (-w)^(l-i)
                let mut b = BigRational::from_integer(binomial(l, i));
                if (l - i) % 2 == 1 {
                    b = -b;
                }
                for (k, c) in f.coeffs().iter().enumerate() {
                    coeffs[i][k + l - i] += &b * c;
                }
            }
        }
        BiPoly { coeffs }
    }

    pub fn w_degree(&self) -> i64 {
        self.assembly().w_degree()
    }

    /// Checks the degree bounds on each `f_l` and on the assembly.
    pub fn verify(&self) -> Result<()> {
        if self.polys.len() != self.d + 1 {
            return Err(Error::Internal(format!("expected {} polynomials, got {}", self.d + 1, self.polys.len())));
        }
        for (l, f) in self.polys.iter().enumerate() {
            if f.degree() > (self.d + self.e - l) as i64 {
                return Err(Error::Internal(format!("f_{l} has degree {} > {}", f.degree(), self.d + self.e - l)));
            }
        }
        let wd = self.w_degree();
        if wd > self.e as i64 {
            return Err(Error::Internal(format!("assembly has w-degree {wd} > {}", self.e)));
        }
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

fn binom_q(n: usize, k: usize) -> BigRational {
    BigRational::from_integer(binomial(n, k))
}

pub type Matrix = Vec<Vec<BigRational>>;

/// `M_{i,l} = binom(l, i-1)` for `1 <= i, l <= d`.
pub fn pascal_m(d: usize) -> Matrix {
    (1..=d).map(|i| (1..=d).map(|l| binom_q(l, i - 1)).collect()).collect()
}

/// `T_{i,l} = binom(l-1, i-1)`, upper triangular with unit diagonal.
pub fn pascal_t(d: usize) -> Matrix {
    (1..=d).map(|i| (1..=d).map(|l| binom_q(l - 1, i - 1)).collect()).collect()
}

/// Ones on the diagonal and the subdiagonal.
pub fn jordan_j(d: usize) -> Matrix {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|k| if k == i || k + 1 == i { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| row.iter().zip(b).map(|(x, brow)| x * &brow[c]).sum())
                .collect()
        })
        .collect()
}

/// Exact inverse by Gauss-Jordan elimination; `None` when singular.
pub fn mat_inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut cols: Vec<Vec<BigRational>> = (0..n)
        .map(|c| (0..n).map(|r| if r == c { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    let mut m = a.clone();
    let solved = gauss_solve(&mut m, &mut cols)?;
    // solved[c] is column c of the inverse
    Some((0..n).map(|r| (0..n).map(|c| solved[c][r].clone()).collect()).collect())
}

/// Solves `a x = b` for each right-hand side in `rhs`. Consumes `a`.
fn gauss_solve(a: &mut Matrix, rhs: &mut [Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        for b in rhs.iter_mut() {
            b.swap(col, pivot);
        }
        let inv = a[col][col].recip();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            for c in col..n {
                let v = &factor * &a[col][c];
                a[r][c] -= v;
            }
            for b in rhs.iter_mut() {
                let v = &factor * &b[col];
                b[r] -= v;
            }
        }
    }
    Some(
        rhs.iter()
            .map(|b| (0..n).map(|r| &b[r] / &a[r][r]).collect())
            .collect(),
    )
}

/// Solves `J T x = b` by forward then back substitution.
fn solve_top_level(b: &[BigRational]) -> Vec<BigRational> {
    let d = b.len();
    let mut y: Vec<BigRational> = Vec::with_capacity(d);
    for i in 0..d {
        let prev = if i == 0 { BigRational::zero() } else { y[i - 1].clone() };
        y.push(&b[i] - prev);
    }
    let mut x = vec![BigRational::zero(); d];
    for i in (0..d).rev() {
        let mut v = y[i].clone();
        for l in i + 1..d {
            v -= binom_q(l, i) * &x[l];
        }
        x[i] = v;
    }
    x
}

/// Completes `(f0, f1)` to a solution with all free coefficients zero.
pub fn solve_polexist(f0: &UniPoly, f1: &UniPoly, d: usize, e: usize) -> Result<KernelSolution> {
    if d == 0 || e == 0 {
        return Err(Error::Domain(format!("need d, e >= 1, got d = {d}, e = {e}")));
    }
    let top = d + e;
    if f0.degree() != top as i64 {
        return Err(Error::Domain(format!("deg f0 = {} but d + e = {top}", f0.degree())));
    }
    if f1.degree() != top as i64 - 1 {
        return Err(Error::Domain(format!("deg f1 = {} but d + e - 1 = {}", f1.degree(), top - 1)));
    }
    // a[l][k] is the coefficient of (-w)^k in f_l
    let signed = |p: &UniPoly| -> Vec<BigRational> {
        (0..=top)
            .map(|k| if k % 2 == 1 { -p.coeff(k) } else { p.coeff(k) })
            .collect()
    };
    let mut a = vec![vec![BigRational::zero(); top + 1]; d + 1];
    a[0] = signed(f0);
    a[1] = signed(f1);

    // total degree d + e: x_1..x_d with x_1 forced
    let mut b = vec![BigRational::zero(); d];
    b[0] = -a[0][top].clone();
    let x = solve_top_level(&b);
    if x[0] != a[1][top - 1] {
        return Err(Error::NoSolution(format!(
            "lead(f1) = {} but d * lead(f0) = {}",
            f1.lead(),
            integer(d as i64) * f0.lead()
        )));
    }
    for l in 2..=d {
        a[l][top - l] = x[l - 1].clone();
    }

    for h in 1..d {
        let s = top - h;
        let rows = d - h;
        let hi = d.min(s);
        let lo = hi + 1 - rows;
        let mut m: Matrix = (0..rows)
            .map(|i| (lo..=hi).map(|l| binom_q(l, i)).collect())
            .collect();
        let rhs: Vec<BigRational> = (0..rows)
            .map(|i| {
                -(0..lo)
                    .filter(|&l| l <= s)
                    .map(|l| binom_q(l, i) * &a[l][s - l])
                    .sum::<BigRational>()
            })
            .collect();
        let sol = gauss_solve(&mut m, &mut [rhs])
            .ok_or_else(|| Error::Internal(format!("singular system at level {s}")))?;
        for (l, v) in (lo..=hi).zip(&sol[0]) {
            a[l][s - l] = v.clone();
        }
    }

    let polys = a
        .into_iter()
        .map(|row| {
            UniPoly::new(
                row.into_iter()
                    .enumerate()
                    .map(|(k, c)| if k % 2 == 1 { -c } else { c })
                    .collect(),
            )
        })
        .collect();
    let sol = KernelSolution { polys, d, e };
    sol.verify()?;
    Ok(sol)
}

impl Cover {
    /// `f_0 = prod (z - lambda)` over points outside `ker chi`, `f_1 = f_0
    /// sum (u/o) / (z - lambda)`, completed with `d = t_chi`, `e = t_chibar`.
    pub fn build_pchichi(&self, chi: usize) -> Result<KernelSolution> {
        if chi >= self.characters().len() {
            return Err(Error::Domain(format!("no character with index {chi}")));
        }
        if chi == 0 {
            return Err(Error::Domain("build_pchichi needs a nontrivial character".into()));
        }
        let moving: Vec<usize> = (0..self.num_points()).filter(|&p| self.u(chi, p) > 0).collect();
        let f0 = UniPoly::from_roots(moving.iter().map(|&p| &self.points()[p].lambda));
        let mut f1 = UniPoly::zero();
        for &p in &moving {
            let (q, rem) = f0.div_linear(&self.points()[p].lambda);
            if !rem.is_zero() {
                return Err(Error::Internal(format!("division by z - lambda_{p} left remainder {rem}")));
            }
            let w = BigRational::new(BigInt::from(self.u(chi, p)), BigInt::from(self.point_order(p)));
            f1 = f1.add(&q.scale(&w));
        }
        let d = self.t(chi) as usize;
        let e = self.t(self.conjugate_index(chi)) as usize;
        if f1.lead() != integer(d as i64) * f0.lead() {
            return Err(Error::Internal(format!("lead(f1) = {} but t_chi = {d}", f1.lead())));
        }
        solve_polexist(&f0, &f1, d, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn q(n: i64) -> BigRational {
        integer(n)
    }

    #[test]
    fn unipoly_basics() {
        assert_eq!(UniPoly::zero().degree(), -1);
        assert_eq!(UniPoly::from_i64(&[1, 2, 0, 0]).degree(), 1);
        let p = UniPoly::from_roots(&[q(1), q(2)]);
        assert_eq!(p, UniPoly::from_i64(&[2, -3, 1]));
        let (quot, rem) = p.div_linear(&q(2));
        assert_eq!(quot, UniPoly::from_i64(&[-1, 1]));
        assert!(rem.is_zero());
        assert_eq!(p.div_linear(&q(0)).1, q(2));
        assert_eq!(p.eval(&q(3)), q(2));
        assert_eq!(p.to_string(), "w^2 - 3*w + 2");
    }

    #[test]
    fn small_examples() {
        let s = solve_polexist(&UniPoly::monomial(q(1), 2), &UniPoly::monomial(q(1), 1), 1, 1).unwrap();
        assert_eq!(s.polys.len(), 2);
        assert_eq!(s.w_degree(), 1);

        let s = solve_polexist(&UniPoly::monomial(q(1), 3), &UniPoly::monomial(q(2), 2), 2, 1).unwrap();
        assert_eq!(s.polys[2], UniPoly::monomial(q(1), 1));
        let asm = s.assembly();
        // z^2 w
        assert_eq!(asm.coeffs[2][1], q(1));
        assert_eq!(asm.w_degree(), 1);
        let total: usize = asm.coeffs.iter().flatten().filter(|c| !c.is_zero()).count();
        assert_eq!(total, 1);

        let err = solve_polexist(&UniPoly::monomial(q(1), 3), &UniPoly::monomial(q(1), 2), 2, 1);
        assert!(matches!(err, Err(Error::NoSolution(_))));
        let err = solve_polexist(&UniPoly::monomial(q(1), 2), &UniPoly::monomial(q(2), 2), 2, 1);
        assert!(matches!(err, Err(Error::Domain(_))));
        assert!(matches!(solve_polexist(&UniPoly::one(), &UniPoly::zero(), 0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn matrix_identities() {
        for d in 1..=12 {
            let m = pascal_m(d);
            assert_eq!(mat_mul(&jordan_j(d), &pascal_t(d)), m);
            let inv = mat_inverse(&m).unwrap();
            assert_eq!(inv[0][0], q(d as i64));
            let b: Vec<BigRational> = (0..d).map(|i| ratio(i as i64 + 1, 3)).collect();
            let x = solve_top_level(&b);
            let mb: Vec<BigRational> = m.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
            assert_eq!(mb, b);
        }
    }

    #[test]
    fn level_systems_are_unimodular() {
        // consecutive-column binomial blocks have determinant 1; check via
        // integrality of the inverse
        for lo in 0..8usize {
            for k in 1..7usize {
                let m: Matrix = (0..k).map(|i| (lo..lo + k).map(|l| binom_q(l, i)).collect()).collect();
                let inv = mat_inverse(&m).unwrap();
                assert!(inv.iter().flatten().all(|c| c.is_integer()));
            }
        }
    }

    #[test]
    fn pchichi_on_battery() {
        for spec in catalog::battery() {
            let c = spec.validate().unwrap();
            for chi in 1..c.characters().len() {
                let s = c.build_pchichi(chi).unwrap();
                assert_eq!(s.polys[1].lead() / s.polys[0].lead(), q(c.t(chi) as i64));
                assert!(s.w_degree() <= c.t(c.conjugate_index(chi)) as i64);
            }
            assert!(c.build_pchichi(0).is_err());
        }
        let h = catalog::hyperelliptic(6).validate().unwrap();
        let s = h.build_pchichi(1).unwrap();
        assert_eq!(s.polys[0].degree(), 6);
        assert_eq!(s.polys[1].lead(), q(3));
        let z3 = catalog::cyclic_full(3, 3).validate().unwrap();
        let chi = (1..3).find(|&c| z3.u(c, 0) == 1).unwrap();
        let s = z3.build_pchichi(chi).unwrap();
        assert_eq!((s.d, s.e, s.polys.len()), (1, 2, 2));
        assert!(s.w_degree() <= 2);
    }

    fn instance() -> impl Strategy<Value = (usize, usize, Vec<i64>, Vec<(i64, i64)>)> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(d, e)| {
            let n = d + e;
            (
                Just(d),
                Just(e),
                proptest::sample::subsequence((-40i64..40).collect::<Vec<_>>(), n).prop_shuffle(),
                proptest::collection::vec((-9i64..10, 1i64..5), n - 1),
            )
        })
    }

    fn build(d: usize, roots: &[i64], lower: &[(i64, i64)]) -> (UniPoly, UniPoly) {
        let roots: Vec<BigRational> = roots.iter().map(|&r| ratio(r, 7)).collect();
        let f0 = UniPoly::from_roots(&roots);
        let mut c: Vec<BigRational> = lower.iter().map(|&(p, q)| ratio(p, q)).collect();
        c.push(integer(d as i64) * f0.lead());
        (f0, UniPoly::new(c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn random_instances_solve((d, e, roots, lower) in instance()) {
            let (f0, f1) = build(d, &roots, &lower);
            let s = solve_polexist(&f0, &f1, d, e).unwrap();
            prop_assert!(s.w_degree() <= e as i64);
            prop_assert_eq!(&s.polys[0], &f0);
            prop_assert_eq!(&s.polys[1], &f1);
        }

        #[test]
        fn perturbed_lead_is_refused((d, e, roots, lower) in instance(), p in (-5i64..6).prop_filter("nonzero", |p| *p != 0), r in 1i64..4) {
            let (f0, f1) = build(d, &roots, &lower);
            let mut c = f1.coeffs().to_vec();
            let last = c.len() - 1;
            c[last] += ratio(p, r);
            let f1 = UniPoly::new(c);
            prop_assume!(f1.degree() == (d + e - 1) as i64);
            prop_assert!(matches!(solve_polexist(&f0, &f1, d, e), Err(Error::NoSolution(_))));
        }
    }
}
