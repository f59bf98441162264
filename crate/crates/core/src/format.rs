//! Group files: JSON containers with generator entries written in a small
//! expression grammar.
//!
//! ```text
//! expr  := sign? term (('+'|'-') term)*
//! term  := coeff ('*' root)? | root
//! coeff := integer ('/' positive-integer)?
//! root  := 'z' positive-integer ('^' integer)?
//! ```
//!
//! `zN` is the primitive root `exp(2πi/N)`. Whitespace is ignored.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cyclo::CycNum;
use crate::matrep::{FiniteMatrixGroup, GroupError, UMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("parse error at position {position} in {input:?}: expected {expected}")]
    Parse {
        input: String,
        position: usize,
        expected: &'static str,
    },
    #[error("zero denominator at position {position} in {input:?}")]
    ZeroDenominator { input: String, position: usize },
    #[error("invalid group file: {0}")]
    Invalid(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Group(#[from] GroupError),
}

struct Parser<'a> {
    input: &'a str,
    bytes: Vec<u8>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Parser<'a> {
        Parser {
            input,
            bytes: input.bytes().collect(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn error(&self, expected: &'static str) -> FormatError {
        FormatError::Parse {
            input: self.input.to_string(),
            position: self.pos,
            expected,
        }
    }

    fn digits(&mut self, what: &'static str) -> Result<BigInt, FormatError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(what));
        }
        Ok(self.input[start..self.pos].parse().expect("ascii digits"))
    }

    fn small(&mut self, what: &'static str) -> Result<u32, FormatError> {
        let start = self.pos;
        let v = self.digits(what)?;
        u32::try_from(v).map_err(|_| FormatError::Parse {
            input: self.input.to_string(),
            position: start,
            expected: "a root order below 2^32",
        })
    }

    fn expr(&mut self) -> Result<CycNum, FormatError> {
        let mut sign = 1;
        if let Some(c @ (b'+' | b'-')) = self.peek() {
            sign = if c == b'-' { -1 } else { 1 };
            self.pos += 1;
        }
        let mut acc = self.term()?;
        if sign < 0 {
            acc = -acc;
        }
        loop {
            match self.peek() {
                None => return Ok(acc),
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                Some(_) => return Err(self.error("'+', '-' or end of input")),
            }
        }
    }

    fn term(&mut self) -> Result<CycNum, FormatError> {
        match self.peek() {
            Some(b'z') => self.root(),
            Some(c) if c.is_ascii_digit() => {
                let c = self.coeff()?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    if self.peek() != Some(b'z') {
                        return Err(self.error("a root 'zN'"));
                    }
                    let r = self.root()?;
                    Ok(&r * &CycNum::from_rational(c))
                } else {
                    Ok(CycNum::from_rational(c))
                }
            }
            _ => Err(self.error("an integer or a root 'zN'")),
        }
    }

    fn coeff(&mut self) -> Result<BigRational, FormatError> {
        let num = self.digits("an integer")?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let den = self.digits("a positive integer")?;
            if den.is_zero() {
                return Err(FormatError::ZeroDenominator {
                    input: self.input.to_string(),
                    position: at,
                });
            }
            Ok(BigRational::new(num, den))
        } else {
            Ok(BigRational::from_integer(num))
        }
    }

    fn root(&mut self) -> Result<CycNum, FormatError> {
        self.pos += 1;
        self.skip_ws();
        let at = self.pos;
        let n = self.small("a root order")?;
        if n == 0 {
            self.pos = at;
            return Err(self.error("a positive root order"));
        }
        let mut e: i64 = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = match self.peek() {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                _ => false,
            };
            let v = self.digits("an exponent")?;
            let v = (v % BigInt::from(n)).try_into().unwrap_or(0i64);
            e = if neg { -v } else { v };
        }
        Ok(CycNum::zeta(n, e))
    }
}

/// Parses one matrix entry.
pub fn parse_entry(s: &str) -> Result<CycNum, FormatError> {
    let mut p = Parser::new(s);
    if p.peek().is_none() {
        return Err(p.error("an expression"));
    }
    p.expr()
}

/// Canonical text for an entry; reparses to an equal value.
pub fn render_entry(x: &CycNum) -> String {
    x.to_string()
}

/// Expectations attached to a group file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar_order: Option<u64>,
    /// `t` → exact moment as a decimal string
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub moments: BTreeMap<usize, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_t: Option<usize>,
    /// `t` → moment lower bound (exclusive), for values only bounded in the source
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub moments_above: BTreeMap<usize, String>,
}

impl Expected {
    pub fn is_empty(&self) -> bool {
        *self == Expected::default()
    }
}

/// On-disk group description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupFile {
    pub name: String,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conductor: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u32>,
    pub generators: Vec<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// Expectations stored next to a curated group file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedFile {
    pub name: String,
    pub expected: Expected,
}

impl ExpectedFile {
    pub fn read(path: &Path) -> Result<ExpectedFile, FormatError> {
        let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| FormatError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

impl GroupFile {
    pub fn from_json(text: &str) -> Result<GroupFile, FormatError> {
        let f: GroupFile = serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
        f.check_shape()?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<GroupFile, FormatError> {
        let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        GroupFile::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        std::fs::write(path, self.to_json()).map_err(|e| FormatError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    fn check_shape(&self) -> Result<(), FormatError> {
        match (self.conductor, self.modulus) {
            (Some(0), _) => return Err(FormatError::Invalid("conductor must be positive".into())),
            (Some(_), Some(_)) => {
                return Err(FormatError::Invalid("give either conductor or modulus, not both".into()))
            }
            (None, None) => return Err(FormatError::Invalid("missing conductor or modulus".into())),
            _ => {}
        }
        if self.dimension == 0 {
            return Err(FormatError::Invalid("dimension must be positive".into()));
        }
        for (k, g) in self.generators.iter().enumerate() {
            if g.len() != self.dimension || g.iter().any(|r| r.len() != self.dimension) {
                return Err(FormatError::Invalid(format!(
                    "generator {k} is not {0}x{0}",
                    self.dimension
                )));
            }
        }
        Ok(())
    }

    pub fn is_symplectic(&self) -> bool {
        self.modulus.is_some()
    }

    /// Parsed generators over the declared conductor.
    pub fn matrices(&self) -> Result<Vec<UMatrix>, FormatError> {
        let n = self
            .conductor
            .ok_or_else(|| FormatError::Invalid("unitary group file needs a conductor".into()))?;
        self.generators
            .iter()
            .map(|g| {
                let entries = g
                    .iter()
                    .flatten()
                    .map(|s| parse_entry(s))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(UMatrix::from_entries(self.dimension, n, &entries)?)
            })
            .collect()
    }

    /// Unenumerated group described by the file.
    pub fn group(&self) -> Result<FiniteMatrixGroup, FormatError> {
        let n = self.conductor.unwrap_or(1);
        Ok(FiniteMatrixGroup::new(
            self.name.clone(),
            self.dimension,
            n,
            self.matrices()?,
        )?)
    }

    /// Integer generators modulo `p`, each entry checked to lie in `[0, p)`.
    pub fn modular_matrices(&self) -> Result<(u32, Vec<Vec<u32>>), FormatError> {
        let p = self
            .modulus
            .ok_or_else(|| FormatError::Invalid("symplectic group file needs a modulus".into()))?;
        let gens = self
            .generators
            .iter()
            .map(|g| {
                g.iter()
                    .flatten()
                    .map(|s| {
                        let v: u32 = s.trim().parse().map_err(|_| {
                            FormatError::Invalid(format!("entry {s:?} is not a nonnegative integer"))
                        })?;
                        if v >= p {
                            return Err(FormatError::Invalid(format!("entry {v} not below modulus {p}")));
                        }
                        Ok(v)
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Ok((p, gens))
    }

    /// Describes `group` with canonical entry strings.
    pub fn from_group(group: &FiniteMatrixGroup) -> GroupFile {
        let d = group.dim();
        GroupFile {
            name: group.name().to_string(),
            dimension: d,
            conductor: Some(group.conductor()),
            modulus: None,
            generators: group
                .generators()
                .iter()
                .map(|g| {
                    (0..d)
                        .map(|i| (0..d).map(|j| render_entry(&g.entry(i, j))).collect())
                        .collect()
                })
                .collect(),
            expected: None,
            provenance: None,
        }
    }
}
