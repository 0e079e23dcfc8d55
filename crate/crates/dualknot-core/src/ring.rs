//! Exact arithmetic for polynomials in two commuting variables `U`, `V` over
//! the field with two elements.
//!
//! A [`Mono`] is a single monomial `U^i V^j`; a [`BiPoly`] is a finite set of
//! monomials, each implicitly carrying coefficient `1` (mod 2).  Addition is
//! symmetric difference of term sets, so `p + p = 0` for every polynomial.
//! The formal partial derivatives [`BiPoly::d_du`] / [`BiPoly::d_dv`] reduce
//! coefficients mod 2 and are used to define the basepoint maps on chain
//! complexes, and [`BiPoly::swap_vars`] exchanges the two variables (the ring
//! automorphism intertwined by skew-equivariant maps).
//!
//! Negative exponents (Laurent monomials) are permitted only on values whose
//! `laurent_ok` flag is set; arithmetic propagates the flag and validation of
//! final artifacts rejects Laurent leftovers.
//!
//! Determinism: term sets are ordered (`BTreeSet`), so iteration order, text
//! rendering, and serialization are canonical.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors produced by ring arithmetic and parsing.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    /// A monomial with a negative exponent was constructed without the
    /// Laurent flag.
    #[error("negative exponent U^{u} V^{v} requires the Laurent flag")]
    NegativeExponent {
        /// Offending `U`-exponent.
        u: i64,
        /// Offending `V`-exponent.
        v: i64,
    },
    /// Exponent arithmetic overflowed a machine integer.
    #[error("exponent overflow while multiplying monomials")]
    Overflow,
    /// A monomial string could not be parsed.
    #[error("cannot parse monomial {0:?}")]
    Parse(String),
}

/// A monomial `U^i V^j` with coefficient `1` over the two-element field.
///
/// Equality, ordering, and hashing consider the exponents only; the
/// `laurent_ok` flag is bookkeeping that records whether negative exponents
/// are admissible in the context that produced the value.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Mono {
    /// Exponent of `U`.
    pub u_exp: i64,
    /// Exponent of `V`.
    pub v_exp: i64,
    /// Whether negative exponents are permitted for this value.
    pub laurent_ok: bool,
}

impl PartialEq for Mono {
    fn eq(&self, other: &Self) -> bool {
        self.u_exp == other.u_exp && self.v_exp == other.v_exp
    }
}

impl Eq for Mono {}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.u_exp, self.v_exp).cmp(&(other.u_exp, other.v_exp))
    }
}

impl std::hash::Hash for Mono {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.u_exp, self.v_exp).hash(state);
    }
}

impl Mono {
    /// The constant monomial `1`.
    #[must_use]
    pub fn one() -> Self {
        Mono { u_exp: 0, v_exp: 0, laurent_ok: false }
    }

    /// Builds `U^u V^v`, requiring nonnegative exponents.
    ///
    /// # Errors
    /// Returns [`RingError::NegativeExponent`] if either exponent is negative.
    pub fn new(u: i64, v: i64) -> Result<Self, RingError> {
        if u < 0 || v < 0 {
            return Err(RingError::NegativeExponent { u, v });
        }
        Ok(Mono { u_exp: u, v_exp: v, laurent_ok: false })
    }

    /// Builds `U^u V^v` with negative exponents permitted.
    #[must_use]
    pub fn laurent(u: i64, v: i64) -> Self {
        Mono { u_exp: u, v_exp: v, laurent_ok: true }
    }

    /// Whether both exponents are nonnegative.
    #[must_use]
    pub fn is_polynomial(&self) -> bool {
        self.u_exp >= 0 && self.v_exp >= 0
    }

    /// Monomial product; the Laurent flag is the disjunction of the factors'.
    ///
    /// # Errors
    /// Returns [`RingError::Overflow`] on exponent overflow and
    /// [`RingError::NegativeExponent`] if the product has a negative exponent
    /// but neither factor allows Laurent monomials.
    pub fn mul(&self, other: &Mono) -> Result<Mono, RingError> {
        let u = self.u_exp.checked_add(other.u_exp).ok_or(RingError::Overflow)?;
        let v = self.v_exp.checked_add(other.v_exp).ok_or(RingError::Overflow)?;
        let laurent_ok = self.laurent_ok || other.laurent_ok;
        if !laurent_ok && (u < 0 || v < 0) {
            return Err(RingError::NegativeExponent { u, v });
        }
        Ok(Mono { u_exp: u, v_exp: v, laurent_ok })
    }

    /// Exchanges the `U`- and `V`-exponents.
    #[must_use]
    pub fn swap_vars(&self) -> Mono {
        Mono { u_exp: self.v_exp, v_exp: self.u_exp, laurent_ok: self.laurent_ok }
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.u_exp, self.v_exp) {
            (0, 0) => write!(f, "1"),
            (u, 0) if u == 1 => write!(f, "U"),
            (u, 0) => write!(f, "U^{u}"),
            (0, v) if v == 1 => write!(f, "V"),
            (0, v) => write!(f, "V^{v}"),
            (u, v) => {
                match u {
                    1 => write!(f, "U")?,
                    _ => write!(f, "U^{u}")?,
                }
                match v {
                    1 => write!(f, " V"),
                    _ => write!(f, " V^{v}"),
                }
            }
        }
    }
}

/// A polynomial (or Laurent polynomial) in `U`, `V` over the two-element
/// field, stored as the set of its monomials.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct BiPoly {
    /// The monomials with coefficient `1`; absence means coefficient `0`.
    pub terms: BTreeSet<Mono>,
}

impl BiPoly {
    /// The zero polynomial.
    #[must_use]
    pub fn zero() -> Self {
        BiPoly::default()
    }

    /// The constant polynomial `1`.
    #[must_use]
    pub fn one() -> Self {
        BiPoly::from(Mono::one())
    }

    /// Whether this is the zero polynomial.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether this is exactly the constant polynomial `1`.
    #[must_use]
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.contains(&Mono::one())
    }

    /// Whether every term has nonnegative exponents.
    #[must_use]
    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(Mono::is_polynomial)
    }

    /// Characteristic-2 addition: symmetric difference of term sets.
    #[must_use]
    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let terms = self.terms.symmetric_difference(&other.terms).copied().collect();
        BiPoly { terms }
    }

    /// Adds `other` into `self` in place (symmetric difference).
    pub fn add_assign(&mut self, other: &BiPoly) {
        for t in &other.terms {
            if !self.terms.remove(t) {
                self.terms.insert(*t);
            }
        }
    }

    /// Distributed product with mod-2 collection of like terms.
    ///
    /// # Errors
    /// Propagates [`RingError`] from monomial multiplication.
    pub fn mul(&self, other: &BiPoly) -> Result<BiPoly, RingError> {
        let mut out = BiPoly::zero();
        for a in &self.terms {
            for b in &other.terms {
                let m = a.mul(b)?;
                if !out.terms.remove(&m) {
                    out.terms.insert(m);
                }
            }
        }
        Ok(out)
    }

    /// Formal partial derivative in `U`: `U^i V^j ↦ (i mod 2) U^{i-1} V^j`.
    ///
    /// Requires a genuine polynomial (no negative exponents).
    #[must_use]
    pub fn d_du(&self) -> BiPoly {
        debug_assert!(self.is_polynomial(), "d_du requires a polynomial");
        let mut out = BiPoly::zero();
        for t in &self.terms {
            if t.u_exp % 2 != 0 {
                let m = Mono { u_exp: t.u_exp - 1, v_exp: t.v_exp, laurent_ok: t.laurent_ok };
                if !out.terms.remove(&m) {
                    out.terms.insert(m);
                }
            }
        }
        out
    }

    /// Formal partial derivative in `V`: `U^i V^j ↦ (j mod 2) U^i V^{j-1}`.
    #[must_use]
    pub fn d_dv(&self) -> BiPoly {
        debug_assert!(self.is_polynomial(), "d_dv requires a polynomial");
        let mut out = BiPoly::zero();
        for t in &self.terms {
            if t.v_exp % 2 != 0 {
                let m = Mono { u_exp: t.u_exp, v_exp: t.v_exp - 1, laurent_ok: t.laurent_ok };
                if !out.terms.remove(&m) {
                    out.terms.insert(m);
                }
            }
        }
        out
    }

    /// Applies [`Mono::swap_vars`] to every term.
    #[must_use]
    pub fn swap_vars(&self) -> BiPoly {
        BiPoly { terms: self.terms.iter().map(Mono::swap_vars).collect() }
    }

    /// Parses a polynomial from text such as `"U^2 V + 1"`.
    ///
    /// Accepted variable spellings per term: `U`, `V`, and the aliases `U1`,
    /// `V1`, `U2`, `V2` (mapped onto `U` and `V` by numeric suffix removal;
    /// the caller chooses the variable pair by context).  Exponents follow a
    /// caret (`U^3`) or appear directly after the alias digit is consumed.
    ///
    /// # Errors
    /// Returns [`RingError::Parse`] on malformed input.
    pub fn parse(text: &str) -> Result<BiPoly, RingError> {
        let mut out = BiPoly::zero();
        for part in text.split('+') {
            let part = part.trim();
            if part.is_empty() {
                return Err(RingError::Parse(text.to_owned()));
            }
            if part == "0" {
                continue;
            }
            let m = parse_mono(part)?;
            if !out.terms.remove(&m) {
                out.terms.insert(m);
            }
        }
        Ok(out)
    }
}

impl From<Mono> for BiPoly {
    fn from(m: Mono) -> Self {
        let mut terms = BTreeSet::new();
        terms.insert(m);
        BiPoly { terms }
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self.terms.iter().map(ToString::to_string).collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

fn parse_mono(part: &str) -> Result<Mono, RingError> {
    if part == "1" {
        return Ok(Mono::one());
    }
    let mut u: i64 = 0;
    let mut v: i64 = 0;
    let bytes: Vec<char> = part.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() || c == '*' {
            i += 1;
            continue;
        }
        let target = match c {
            'U' | 'u' => &mut u,
            'V' | 'v' => &mut v,
            _ => return Err(RingError::Parse(part.to_owned())),
        };
        i += 1;
        // Consume an alias digit such as the "1" in "U1" or the "2" in "V2".
        if i < bytes.len() && (bytes[i] == '1' || bytes[i] == '2') {
            let next_is_exp = i + 1 < bytes.len() && bytes[i + 1] == '^';
            let next_is_var = i + 1 >= bytes.len()
                || matches!(bytes[i + 1], 'U' | 'u' | 'V' | 'v')
                || bytes[i + 1].is_whitespace()
                || bytes[i + 1] == '*';
            if next_is_exp || next_is_var {
                i += 1;
            }
        }
        let mut exp: i64 = 1;
        if i < bytes.len() && bytes[i] == '^' {
            i += 1;
            let mut digits = String::new();
            if i < bytes.len() && bytes[i] == '-' {
                digits.push('-');
                i += 1;
            }
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                digits.push(bytes[i]);
                i += 1;
            }
            exp = digits.parse().map_err(|_| RingError::Parse(part.to_owned()))?;
        }
        *target = target.checked_add(exp).ok_or(RingError::Overflow)?;
    }
    Ok(Mono { u_exp: u, v_exp: v, laurent_ok: u < 0 || v < 0 })
}
