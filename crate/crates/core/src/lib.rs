//! Exact combinatorics of abelian covers of the projective line: invariant
//! non-special divisors, generalized Dedekind sums and the integer exponents
//! of the Thomae formula, each paired with an independent brute-force route.

pub mod catalog;
pub mod cover;
pub mod dedekind;
pub mod divisors;
pub mod error;
pub mod exponents;
pub mod group;
pub mod polykernel;
pub mod rational;

pub use cover::{BranchIndex, BranchPoint, Cover, CoverInvariants, CoverSpec, Fingerprint};
pub use error::{Error, Result};
pub use group::{AbelianGroup, Character, GroupElement, IntersectionData};
pub use divisors::{HalfFormExponents, InvariantDivisor, SearchOptions};
pub use exponents::{ExponentEntry, ExponentTable, PairKey, Relabeling};
pub use polykernel::{KernelSolution, UniPoly};
