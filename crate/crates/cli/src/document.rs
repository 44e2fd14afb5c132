//! The cover document: one JSON object with the group's cyclic orders and
//! the branch points.
//!
//! ```json
//! {
//!   "group": [2],
//!   "branch_points": [
//!     {"element": [1], "lambda": "0"},
//!     {"element": [1], "lambda": "1/2"},
//!     {"element": [1], "lambda": "-3.25"}
//!   ]
//! }
//! ```
//!
//! `lambda` is a fraction `p/q` or a decimal; both are read exactly. Plain
//! JSON integers are accepted too.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;
use thiserror::Error;

use thomae_core::{AbelianGroup, BranchPoint, CoverSpec};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{field}: cannot read {text:?} as an exact number")]
    Lambda { field: String, text: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDocument {
    pub group: Vec<u64>,
    pub branch_points: Vec<PointRecord>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub element: Vec<u64>,
    pub lambda: LambdaText,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum LambdaText {
    Text(String),
    Int(i64),
}

/// Parses `text` into a document, reporting the JSON position on failure.
pub fn parse_document(text: &str) -> Result<CoverDocument, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_document(path: &str) -> Result<CoverDocument, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io { path: path.to_string(), source })?;
    parse_document(&text)
}

/// Reads `p/q`, `p`, or a decimal such as `-12.075` exactly.
pub fn parse_exact(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{whole}{frac}").parse().ok()?;
    let scale = (0..frac.len()).fold(BigInt::one(), |acc, _| acc * 10);
    let v = BigRational::new(digits, scale);
    Some(if negative { -v } else { v })
}

impl CoverDocument {
    /// Converts to unvalidated core data. Element residues and group orders
    /// are checked by the core; only the number syntax is checked here.
    pub fn to_spec(&self) -> Result<Result<CoverSpec, thomae_core::Error>, ParseError> {
        let mut lambdas = Vec::with_capacity(self.branch_points.len());
        for (k, p) in self.branch_points.iter().enumerate() {
            let v = match &p.lambda {
                LambdaText::Int(i) => Some(BigRational::from_integer(BigInt::from(*i))),
                LambdaText::Text(s) => parse_exact(s),
            };
            let field = format!("branch_points[{k}].lambda");
            let text = match &p.lambda {
                LambdaText::Int(i) => i.to_string(),
                LambdaText::Text(s) => s.clone(),
            };
            lambdas.push(v.ok_or(ParseError::Lambda { field, text })?);
        }
        Ok(self.build(lambdas))
    }

    fn build(&self, lambdas: Vec<BigRational>) -> Result<CoverSpec, thomae_core::Error> {
        let group = AbelianGroup::new(self.group.clone())?;
        let points = self
            .branch_points
            .iter()
            .zip(lambdas)
            .map(|(p, lambda)| Ok(BranchPoint { element: group.element(p.element.clone())?, lambda }))
            .collect::<Result<Vec<_>, thomae_core::Error>>()?;
        Ok(CoverSpec::new(group, points))
    }
}
