//! Closed-form small model of the dual-knot surgery complex.
//!
//! From a certified involutive knot complex of L-space type with a single
//! tower, this module constructs the summands `A_s`, `B_s`, `Bt_s` of the
//! small surgery model together with all structure maps (`v`, `vt`, the flip
//! `F_n`, the involution pieces `iota`, `Phi`, `Psi`, `Omega`, `H_Omega`,
//! `Ht_Omega`, `H*`), truncates to a finite range, and assembles the mapping
//! cone `X^mu_n` with its involution `XI^mu_n`.
//!
//! Every structure map is given by an exact case-split formula on a canonical
//! generator basis.  Formula outputs are re-expressed on the canonical basis
//! (units of `U1 V1` trade for `U2 V2`, excess `U1` for `U2`, excess `V1` for
//! `V2`); an output that cannot be normalized onto the canonical basis is a
//! transcription bug and panics.
//!
//! Determinism: generator orders, truncation ranges, and the homotopy solver
//! are all canonical, so equal inputs give identical models.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::complex::{
    mat_insert_add, reduce, solve_homotopy, tower_structure, verify_iota_complex,
    EquivariantMap, Generator, GradedComplex, Grading, IotaComplex, Mat, Variance,
};
use crate::ring::Mono;

/// Errors of the small-model layer.
#[derive(Debug, Error)]
pub enum SmallError {
    /// The input failed the involutive-complex axioms.
    #[error("input is not a certified involutive complex: {0}")]
    NotCertified(String),
    /// The input complex is not of L-space type with a single tower.
    #[error("input is not of L-space type with a single tower (free rank {free_rank}, torsion {torsion:?})")]
    NotLSpace {
        /// Free rank of the localized homology.
        free_rank: usize,
        /// Torsion annihilators found.
        torsion: Vec<String>,
    },
    /// A generator has a non-integral Alexander grading.
    #[error("generator {0} has non-integral Alexander grading")]
    NonIntegralAlexander(String),
    /// Surgery coefficient zero is not supported.
    #[error("surgery coefficient must be nonzero")]
    ZeroSurgery,
    /// Truncation parameter below the validity threshold.
    #[error("truncation parameter b = {b} is below the minimum {min}")]
    TruncationTooSmall {
        /// Requested parameter.
        b: i64,
        /// Smallest valid parameter.
        min: i64,
    },
    /// A flip override failed validation.
    #[error("flip override rejected: {0}")]
    BadFlip(String),
    /// The homotopy `H*` does not exist on the truncated range.
    #[error("no homotopy H* exists on the truncated range (summand index {0})")]
    MissingHStar(i64),
    /// A truncated `H_Omega` homotopy does not exist.
    #[error("no truncated H_Omega homotopy exists (summand index {0})")]
    MissingHOmega(i64),
    /// The assembled complex failed a structural check.
    #[error("assembly failed: {0}")]
    Assembly(String),
}

/// A certified input complex with its derived Alexander data.
#[derive(Debug, Clone)]
pub struct CfkInput {
    /// The certified involutive complex.
    pub model: IotaComplex,
    /// Alexander grading per generator, `A(x) = (gr_w - gr_z) / 2`.
    pub alexander: Vec<i64>,
    /// Genus bound `g = max_x A(x)`.
    pub genus: i64,
    /// Non-fatal diagnostics (asymmetric generator counts).
    pub warnings: Vec<String>,
}

impl CfkInput {
    /// Certifies and wraps an involutive complex.
    pub fn new(model: IotaComplex) -> Result<CfkInput, SmallError> {
        let report = verify_iota_complex(&model);
        if !report.is_valid() {
            return Err(SmallError::NotCertified(report.violations.join("; ")));
        }
        let model = IotaComplex { certificate: report.certificate, ..model };
        let towers = tower_structure(&model.complex);
        if !(towers.l_space_type && towers.single_tower) {
            return Err(SmallError::NotLSpace {
                free_rank: towers.free_rank,
                torsion: towers.torsion,
            });
        }
        let mut alexander = Vec::with_capacity(model.complex.rank());
        for g in &model.complex.generators {
            let a = g.grading.alexander();
            if !a.is_integer() {
                return Err(SmallError::NonIntegralAlexander(g.label.clone()));
            }
            alexander.push(a.to_integer());
        }
        let genus = alexander.iter().copied().max().unwrap_or(0);
        let mut warnings = Vec::new();
        let mut counts: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
        for &a in &alexander {
            let slot = counts.entry(a.abs()).or_default();
            if a >= 0 {
                slot.0 += 1;
            }
            if a <= 0 {
                slot.1 += 1;
            }
        }
        for (a, (pos, neg)) in counts {
            if pos != neg {
                warnings.push(format!(
                    "asymmetric generator count in Alexander gradings +-{a}: {pos} vs {neg}"
                ));
            }
        }
        Ok(CfkInput { model, alexander, genus, warnings })
    }

    fn rank(&self) -> usize {
        self.model.complex.rank()
    }
}

/// Summand flavor of the small model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    /// The `A_s` summands.
    A,
    /// The `B_s` summands (canonical `V1`-representatives).
    B,
    /// The `Bt_s` summands (canonical `U1`-representatives).
    Btilde,
}

impl Kind {
    fn prefix_str(self) -> &'static str {
        match self {
            Kind::A => "A",
            Kind::B => "B",
            Kind::Btilde => "Bt",
        }
    }
}

/// Side of an `A`-kind generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    /// Class of `U1^i x` (requires `A(x) >= s + 1`).
    U,
    /// Class of `V1^m x` (requires `A(x) <= s`).
    V,
}

/// One canonical small-model generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmallGen {
    /// Summand flavor.
    pub kind: Kind,
    /// Index of the underlying knot-complex generator.
    pub x: usize,
    /// Summand index.
    pub s: i64,
    /// Side (`A`-kind only).
    pub side: Option<Side>,
    /// Representative exponent: `A/U`: `A(x)-s-1`; `A/V`: `s-A(x)`;
    /// `B`: `s-A(x)`; `Bt`: `A(x)-s-1`.
    pub offset: i64,
}

impl SmallGen {
    /// Whether the canonical representative is a `U1` power.
    #[must_use]
    pub fn u_based(&self) -> bool {
        matches!((self.kind, self.side), (Kind::A, Some(Side::U)) | (Kind::Btilde, None))
    }

    /// Representative exponents `(u1, v1)`.
    #[must_use]
    pub fn prefix(&self) -> (i64, i64) {
        if self.u_based() {
            (self.offset, 0)
        } else {
            (0, self.offset)
        }
    }
}

/// A fully built summand: canonical generators plus the induced differential.
#[derive(Debug, Clone)]
pub struct Summand {
    /// Summand flavor.
    pub kind: Kind,
    /// Summand index.
    pub s: i64,
    /// Surgery coefficient (enters the grading shift).
    pub n: i64,
    /// Canonical generators, in basis order.
    pub gens: Vec<SmallGen>,
    /// Position of the generator built on knot generator `x`.
    pub row_of_x: BTreeMap<usize, usize>,
    /// The summand as a graded complex.
    pub complex: Arc<GradedComplex>,
}

/// A single formula output before canonicalization: the coefficient
/// `U2^u2 V2^v2 (U1^u1 V1^v1 . y)`.
#[derive(Debug, Clone, Copy)]
struct Term {
    y: usize,
    u1: i64,
    v1: i64,
    u2: i64,
    v2: i64,
}

/// Grading shift of the summand `(kind, s)` at surgery coefficient `n`.
fn global_shift(kind: Kind, s: i64, n: i64) -> (Rational64, Rational64) {
    let eps = if n > 0 { -1 } else { 5 };
    let w = Rational64::new((n - 2 * s).pow(2) + eps * n, 4 * n);
    let z = Rational64::new((n + 2 * (s + 1)).pow(2) + eps * n, 4 * n);
    match kind {
        Kind::A => (w, z),
        Kind::B | Kind::Btilde => (w - Rational64::one(), z - Rational64::one()),
    }
}

/// `shift(A, s) - shift(A, s - 1)`, the per-step grading drift.
fn delta_shift(s: i64, n: i64) -> (Rational64, Rational64) {
    let hi = global_shift(Kind::A, s, n);
    let lo = global_shift(Kind::A, s - 1, n);
    (hi.0 - lo.0, hi.1 - lo.1)
}

/// Re-expresses a formula output on the canonical generator and returns the
/// `U2, V2` coefficient monomial.  Panics when the output escapes the
/// canonical basis (a formula transcription bug).
fn canonical_mono(dst: &SmallGen, t: &Term) -> Mono {
    let (u, v) = if dst.u_based() {
        (t.u2 + t.u1 - dst.offset, t.v2 + t.v1)
    } else {
        (t.u2 + t.u1, t.v2 + t.v1 - dst.offset)
    };
    Mono::new(u, v).expect("small-model formula output escaped the canonical basis")
}

/// Builds the summand `(kind, s)` with its canonical basis and differential.
#[must_use]
pub fn build_summand(c: &CfkInput, kind: Kind, s: i64, n: i64) -> Summand {
    let mut gens: Vec<SmallGen> = Vec::new();
    match kind {
        Kind::A => {
            for x in 0..c.rank() {
                if c.alexander[x] >= s + 1 {
                    gens.push(SmallGen {
                        kind,
                        x,
                        s,
                        side: Some(Side::U),
                        offset: c.alexander[x] - s - 1,
                    });
                }
            }
            for x in 0..c.rank() {
                if c.alexander[x] <= s {
                    gens.push(SmallGen {
                        kind,
                        x,
                        s,
                        side: Some(Side::V),
                        offset: s - c.alexander[x],
                    });
                }
            }
        }
        Kind::B => {
            for x in 0..c.rank() {
                gens.push(SmallGen { kind, x, s, side: None, offset: s - c.alexander[x] });
            }
        }
        Kind::Btilde => {
            for x in 0..c.rank() {
                gens.push(SmallGen { kind, x, s, side: None, offset: c.alexander[x] - s - 1 });
            }
        }
    }
    let row_of_x: BTreeMap<usize, usize> = gens.iter().enumerate().map(|(i, g)| (g.x, i)).collect();

    let shift = global_shift(kind, s, n);
    let generators = gens
        .iter()
        .map(|g| {
            let base = c.model.complex.generators[g.x].grading;
            let (pu, pv) = g.prefix();
            let (sw, sz) = if g.u_based() { (-2, 0) } else { (0, -2) };
            Generator {
                label: format!("{}[{}]:{}", kind.prefix_str(), s, c.model.complex.generators[g.x].label),
                grading: Grading::new(
                    base.gr_w + Rational64::from_integer(-2 * pu + sw) + shift.0,
                    base.gr_z + Rational64::from_integer(-2 * pv + sz) + shift.1,
                ),
            }
        })
        .collect();

    let mut summand = Summand {
        kind,
        s,
        n,
        gens,
        row_of_x,
        complex: Arc::new(GradedComplex::new(generators, Mat::new())),
    };
    let diff = rule_entries(c, &summand, &summand, &c.model.complex.diff, false, differential_rule);
    summand.complex = Arc::new(GradedComplex::new(summand.complex.generators.clone(), diff));
    summand
}

/// Applies a per-entry term rule along a base matrix (the knot differential
/// or involution) and collects the resulting canonical matrix.
fn rule_entries(
    _c: &CfkInput,
    src: &Summand,
    dst: &Summand,
    base: &Mat,
    swap_prefix: bool,
    rule: fn(&SmallGen, i64, i64, usize) -> Option<Term>,
) -> Mat {
    let mut entries = Mat::new();
    for (col, g) in src.gens.iter().enumerate() {
        let (pu, pv) = g.prefix();
        for ((y, x), poly) in base {
            if *x != g.x {
                continue;
            }
            for m in &poly.terms {
                let (a, b) = (m.u_exp, m.v_exp);
                let (tm, tn) = if swap_prefix { (a + pv, b + pu) } else { (a + pu, b + pv) };
                if let Some(t) = rule(g, tm, tn, *y) {
                    let row = dst.row_of_x[&t.y];
                    let mono = canonical_mono(&dst.gens[row], &t);
                    mat_insert_add(&mut entries, (row, col), &mono.into());
                }
            }
        }
    }
    entries
}

/// Per-generator diagonal rule (used by `v`, `vt`, `H_0`, `Ht_0`).
fn diagonal_entries(
    src: &Summand,
    dst: &Summand,
    rule: fn(&SmallGen) -> Option<Term>,
) -> Mat {
    let mut entries = Mat::new();
    for (col, g) in src.gens.iter().enumerate() {
        if let Some(t) = rule(g) {
            let row = dst.row_of_x[&t.y];
            let mono = canonical_mono(&dst.gens[row], &t);
            mat_insert_add(&mut entries, (row, col), &mono.into());
        }
    }
    entries
}

/// Case-split for the internal differential of a summand.
fn differential_rule(g: &SmallGen, m: i64, n: i64, y: usize) -> Option<Term> {
    Some(match (g.kind, g.side) {
        (Kind::A, Some(Side::U)) => {
            if n > m {
                Term { y, u1: 0, v1: n - m - 1, u2: m + 1, v2: m }
            } else {
                Term { y, u1: m - n, v1: 0, u2: n, v2: n }
            }
        }
        (Kind::A, Some(Side::V)) => {
            if m <= n {
                Term { y, u1: 0, v1: n - m, u2: m, v2: m }
            } else {
                Term { y, u1: m - n - 1, v1: 0, u2: n, v2: n + 1 }
            }
        }
        (Kind::B, _) => Term { y, u1: 0, v1: n - m, u2: m, v2: m },
        (Kind::Btilde, _) => Term { y, u1: m - n, v1: 0, u2: n, v2: n },
        (Kind::A, None) => unreachable!("A-kind generators carry a side"),
    })
}

/// Case-split for `Phi` (surgery-index raising map, coefficient mod 2).
fn phi_rule(g: &SmallGen, m: i64, n: i64, y: usize) -> Option<Term> {
    let coeff = match (g.kind, g.side) {
        (Kind::A, Some(Side::U)) | (Kind::Btilde, _) => m - g.offset,
        _ => m,
    };
    if coeff % 2 == 0 {
        return None;
    }
    Some(match (g.kind, g.side) {
        (Kind::A, Some(Side::U)) => {
            if n <= m - 1 {
                Term { y, u1: m - n - 1, v1: 0, u2: n, v2: n }
            } else {
                Term { y, u1: 0, v1: n - m, u2: m - 1, v2: m }
            }
        }
        (Kind::A, Some(Side::V)) => {
            if m - 1 <= n {
                Term { y, u1: 0, v1: n - m + 1, u2: m - 1, v2: m - 1 }
            } else {
                Term { y, u1: m - n - 2, v1: 0, u2: m, v2: m }
            }
        }
        (Kind::B, _) => Term { y, u1: 0, v1: n - m + 1, u2: m - 1, v2: m - 1 },
        (Kind::Btilde, _) => Term { y, u1: m - n - 1, v1: 0, u2: n, v2: n },
        (Kind::A, None) => unreachable!("A-kind generators carry a side"),
    })
}

/// Case-split for `Psi` (surgery-index lowering map, coefficient mod 2).
fn psi_rule(g: &SmallGen, m: i64, n: i64, y: usize) -> Option<Term> {
    let (coeff, term) = match (g.kind, g.side) {
        (Kind::A, Some(Side::U)) => {
            if n <= m + 1 {
                (n, Term { y, u1: m - n + 1, v1: 0, u2: n - 1, v2: n - 1 })
            } else {
                (m + 1, Term { y, u1: 0, v1: n - m - 2, u2: m + 1, v2: m })
            }
        }
        (Kind::A, Some(Side::V)) => {
            if n >= m + 1 {
                (m, Term { y, u1: 0, v1: n - m - 1, u2: m, v2: m })
            } else {
                (n, Term { y, u1: m - n, v1: 0, u2: n - 1, v2: n })
            }
        }
        (Kind::B, _) => (m, Term { y, u1: 0, v1: n - m - 1, u2: m, v2: m }),
        (Kind::Btilde, _) => (n, Term { y, u1: m - n + 1, v1: 0, u2: n - 1, v2: n - 1 }),
        (Kind::A, None) => unreachable!("A-kind generators carry a side"),
    };
    (coeff % 2 != 0).then_some(term)
}

/// Case-split for the summand-level involution (prefix exponents swapped by
/// the caller).
fn iota_rule(g: &SmallGen, m: i64, n: i64, y: usize) -> Option<Term> {
    Some(match (g.kind, g.side) {
        (Kind::A, Some(Side::U)) => {
            if m <= n {
                Term { y, u1: 0, v1: n - m, u2: m, v2: m }
            } else {
                Term { y, u1: m - n - 1, v1: 0, u2: n, v2: n + 1 }
            }
        }
        (Kind::A, Some(Side::V)) => {
            if m < n {
                Term { y, u1: 0, v1: n - m - 1, u2: m + 1, v2: m }
            } else {
                Term { y, u1: m - n, v1: 0, u2: n, v2: n }
            }
        }
        (Kind::B, _) => Term { y, u1: m - n, v1: 0, u2: n, v2: n },
        (Kind::Btilde, _) => Term { y, u1: 0, v1: n - m, u2: m, v2: m },
        (Kind::A, None) => unreachable!("A-kind generators carry a side"),
    })
}

fn map_between(
    src: &Summand,
    dst: &Summand,
    entries: Mat,
    bidegree: (Rational64, Rational64),
    variance: Variance,
) -> EquivariantMap {
    EquivariantMap {
        source: Arc::clone(&src.complex),
        target: Arc::clone(&dst.complex),
        entries,
        bidegree,
        variance,
    }
}

fn minus_one() -> (Rational64, Rational64) {
    (-Rational64::one(), -Rational64::one())
}

/// The cone edge `v: A_s -> B_s` (a differential component).
#[must_use]
pub fn v_mu_between(src: &Summand, dst: &Summand) -> EquivariantMap {
    assert!(src.kind == Kind::A && dst.kind == Kind::B && src.s == dst.s);
    let entries = diagonal_entries(src, dst, |g| {
        let i = g.offset;
        Some(match g.side.expect("A-kind") {
            Side::U => Term { y: g.x, u1: 0, v1: -i - 1, u2: i + 1, v2: i },
            Side::V => Term { y: g.x, u1: 0, v1: i, u2: 0, v2: 0 },
        })
    });
    map_between(src, dst, entries, minus_one(), Variance::Equivariant)
}

/// The cone edge `vt: A_s -> Bt_s` (a differential component, pre-flip).
#[must_use]
pub fn vtilde_mu_between(src: &Summand, dst: &Summand) -> EquivariantMap {
    assert!(src.kind == Kind::A && dst.kind == Kind::Btilde && src.s == dst.s);
    let entries = diagonal_entries(src, dst, |g| {
        let i = g.offset;
        Some(match g.side.expect("A-kind") {
            Side::U => Term { y: g.x, u1: i, v1: 0, u2: 0, v2: 0 },
            Side::V => Term { y: g.x, u1: -i - 1, v1: 0, u2: i, v2: i + 1 },
        })
    });
    map_between(src, dst, entries, minus_one(), Variance::Equivariant)
}

/// The map `Phi: (kind)_{s-1} -> (kind)_s` derived from the knot differential.
#[must_use]
pub fn phi_mu_between(c: &CfkInput, src: &Summand, dst: &Summand) -> EquivariantMap {
    assert!(src.kind == dst.kind && dst.s == src.s + 1);
    let entries = rule_entries(c, src, dst, &c.model.complex.diff, false, phi_rule);
    let (dw, dz) = delta_shift(dst.s, dst.n);
    map_between(
        src,
        dst,
        entries,
        (Rational64::one() + dw, -Rational64::one() + dz),
        Variance::Equivariant,
    )
}

/// The map `Psi: (kind)_s -> (kind)_{s-1}` derived from the knot differential.
#[must_use]
pub fn psi_mu_between(c: &CfkInput, src: &Summand, dst: &Summand) -> EquivariantMap {
    assert!(src.kind == dst.kind && dst.s == src.s - 1);
    let entries = rule_entries(c, src, dst, &c.model.complex.diff, false, psi_rule);
    let (dw, dz) = delta_shift(src.s, src.n);
    map_between(
        src,
        dst,
        entries,
        (-Rational64::one() - dw, Rational64::one() - dz),
        Variance::Equivariant,
    )
}

/// The summand-level involution `iota: (kind)_s -> (kind')_{-s-1}` (skew).
#[must_use]
pub fn iota_mu_between(c: &CfkInput, src: &Summand, dst: &Summand) -> EquivariantMap {
    let expected = match src.kind {
        Kind::A => Kind::A,
        Kind::B => Kind::Btilde,
        Kind::Btilde => Kind::B,
    };
    assert!(dst.kind == expected && dst.s == -src.s - 1);
    let entries = rule_entries(c, src, dst, &c.model.iota.entries, true, iota_rule);
    map_between(src, dst, entries, (Rational64::zero(), Rational64::zero()), Variance::Skew)
}

/// The diagonal homotopy `H_0: A_s -> B_{s-1}`.
#[must_use]
pub fn h0_between(src: &Summand, dst: &Summand) -> EquivariantMap {
    assert!(src.kind == Kind::A && dst.kind == Kind::B && dst.s == src.s - 1);
    let entries = diagonal_entries(src, dst, |g| {
        let i = g.offset;
        match g.side.expect("A-kind") {
            Side::U if (i + 1) % 2 != 0 => {
                Some(Term { y: g.x, u1: 0, v1: -i - 2, u2: i + 1, v2: i })
            }
            _ => None,
        }
    });
    let (dw, dz) = delta_shift(src.s, src.n);
    map_between(
        src,
        dst,
        entries,
        (-Rational64::one() - dw, Rational64::one() - dz),
        Variance::Equivariant,
    )
}

/// The diagonal homotopy `Ht_0: A_s -> Bt_{s-1}`.
#[must_use]
pub fn h0_tilde_between(src: &Summand, dst: &Summand) -> EquivariantMap {
    assert!(src.kind == Kind::A && dst.kind == Kind::Btilde && dst.s == src.s - 1);
    let entries = diagonal_entries(src, dst, |g| {
        let i = g.offset;
        match g.side.expect("A-kind") {
            Side::V if i % 2 != 0 => Some(Term { y: g.x, u1: -i, v1: 0, u2: i - 1, v2: i }),
            _ => None,
        }
    });
    let (dw, dz) = delta_shift(src.s, src.n);
    map_between(
        src,
        dst,
        entries,
        (-Rational64::one() - dw, Rational64::one() - dz),
        Variance::Equivariant,
    )
}

/// Which flip maps to use during assembly.
#[derive(Debug, Clone, Default)]
pub enum FlipSpec {
    /// Reduce both sides to rank one and conjugate the forced isomorphism.
    #[default]
    Default,
    /// Explicit flips per summand index; missing indices fall back to the
    /// default construction.
    Overrides(BTreeMap<i64, EquivariantMap>),
}

/// Builds (or validates) the flip `F_n: Bt_s -> B_{s+n}`.
pub fn flip_mu_between(
    src: &Summand,
    dst: &Summand,
    override_map: Option<&EquivariantMap>,
) -> Result<EquivariantMap, SmallError> {
    assert!(src.kind == Kind::Btilde && dst.kind == Kind::B && dst.s == src.s + src.n);
    let zero = (Rational64::zero(), Rational64::zero());
    let left = reduce(&src.complex, &[]);
    let right = reduce(&dst.complex, &[]);
    if left.reduced.rank() != 1 || right.reduced.rank() != 1 {
        return Err(SmallError::Assembly(format!(
            "flip endpoints did not reduce to rank one ({} and {})",
            left.reduced.rank(),
            right.reduced.rank()
        )));
    }
    if let Some(f) = override_map {
        if f.source != src.complex || f.target != dst.complex {
            return Err(SmallError::BadFlip("shape mismatch".into()));
        }
        if f.variance != Variance::Equivariant || f.bidegree != zero {
            return Err(SmallError::BadFlip("must be equivariant of bidegree (0, 0)".into()));
        }
        let report = f.validate(true);
        if !report.is_valid() {
            return Err(SmallError::BadFlip(report.violations.join("; ")));
        }
        if !f.is_chain_map() {
            return Err(SmallError::BadFlip("not a chain map".into()));
        }
        let induced = right.projection.compose(f).compose(&left.inclusion);
        let unit = induced
            .entries
            .get(&(0, 0))
            .is_some_and(|p| p.is_one())
            && induced.entries.len() == 1;
        if !unit {
            return Err(SmallError::BadFlip(
                "induced map on the rank-one models is not an isomorphism".into(),
            ));
        }
        return Ok(f.clone());
    }
    let gl = left.reduced.generators[0].grading;
    let gr = right.reduced.generators[0].grading;
    if gl != gr {
        return Err(SmallError::Assembly(format!(
            "rank-one flip models have incompatible gradings ({:?} vs {:?})",
            (gl.gr_w, gl.gr_z),
            (gr.gr_w, gr.gr_z)
        )));
    }
    let mut unit_entries = Mat::new();
    unit_entries.insert((0, 0), Mono::new(0, 0).expect("constant").into());
    let unit = EquivariantMap {
        source: Arc::clone(&left.reduced),
        target: Arc::clone(&right.reduced),
        entries: unit_entries,
        bidegree: zero,
        variance: Variance::Equivariant,
    };
    Ok(right.inclusion.compose(&unit).compose(&left.projection))
}

/// Truncation window: `A_s` for `a_lo <= s <= a_hi`, `B_s` for
/// `b_lo <= s <= b_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    /// Width parameter.
    pub b: i64,
    /// Lowest kept `A` index (`-b - 1`).
    pub a_lo: i64,
    /// Highest kept `A` index (`b`).
    pub a_hi: i64,
    /// Lowest kept `B` index (`n - b - 1`).
    pub b_lo: i64,
    /// Highest kept `B` index (`b`).
    pub b_hi: i64,
}

/// Smallest valid truncation parameter for genus `g` and coefficient `n`.
#[must_use]
pub fn minimal_b(genus: i64, n: i64) -> i64 {
    let mut b = (genus - 1).max(0);
    if n > 0 {
        b = b.max((n - 1) / 2);
    }
    b
}

/// Chooses the truncation window.  The window is symmetric under the
/// involution (`s -> -s-1` on `A`, `s -> n-s-1` on `B`), and every dropped
/// summand cancels along an isomorphic edge (`v` on indices `>= g`, `vt` on
/// indices `<= -g-1`).
pub fn truncate(c: &CfkInput, n: i64, b_override: Option<i64>) -> Result<Truncation, SmallError> {
    if n == 0 {
        return Err(SmallError::ZeroSurgery);
    }
    let min = minimal_b(c.genus, n);
    let b = b_override.unwrap_or(min);
    if b < min {
        return Err(SmallError::TruncationTooSmall { b, min });
    }
    Ok(Truncation { b, a_lo: -b - 1, a_hi: b, b_lo: n - b - 1, b_hi: b })
}

/// Layout entry of the assembled complex.
#[derive(Debug, Clone)]
pub struct Slot {
    /// Summand flavor (`A` or `B`).
    pub kind: Kind,
    /// Summand index.
    pub s: i64,
    /// First generator position inside the total complex.
    pub start: usize,
    /// The summand itself.
    pub summand: Arc<Summand>,
}

/// The assembled surgery complex with its involution and provenance maps.
#[derive(Debug, Clone)]
pub struct SurgeryComplex {
    /// Surgery coefficient.
    pub n: i64,
    /// Truncation window.
    pub truncation: Truncation,
    /// The mapping cone as a graded complex.
    pub complex: Arc<GradedComplex>,
    /// The involution of the cone (skew, bidegree `(0, 0)`).
    pub involution: EquivariantMap,
    /// Generator layout.
    pub slots: Vec<Slot>,
    /// Retained structure maps, keyed by symbol and summand index.
    pub provenance: Vec<(String, EquivariantMap)>,
}

impl SurgeryComplex {
    /// Views the cone as an involutive complex (certificate not yet solved).
    #[must_use]
    pub fn iota_complex(&self) -> IotaComplex {
        IotaComplex {
            complex: Arc::clone(&self.complex),
            iota: self.involution.clone(),
            certificate: None,
        }
    }
}

/// Cache of summands and flips used during assembly.
///
/// Every composite map (`Omega`, `H_Omega`, `Ht_Omega`, the right-hand side
/// of the `H*` equation) is the *truncated* composite: a factor whose
/// intermediate summand falls outside the kept window is zero, because the
/// truncated cone retains maps between kept summands only.
struct Builder<'a> {
    c: &'a CfkInput,
    n: i64,
    trunc: Truncation,
    flip_spec: &'a FlipSpec,
    summands: BTreeMap<(Kind, i64), Arc<Summand>>,
    flips: BTreeMap<i64, EquivariantMap>,
}

impl<'a> Builder<'a> {
    fn new(c: &'a CfkInput, n: i64, trunc: Truncation, flip_spec: &'a FlipSpec) -> Self {
        Builder { c, n, trunc, flip_spec, summands: BTreeMap::new(), flips: BTreeMap::new() }
    }

    /// Whether the summand `(kind, s)` survives the truncation.  A `Bt_s`
    /// summand is kept exactly when its flip partner `B_{s+n}` is.
    fn kept(&self, kind: Kind, s: i64) -> bool {
        match kind {
            Kind::A => (self.trunc.a_lo..=self.trunc.a_hi).contains(&s),
            Kind::B => (self.trunc.b_lo..=self.trunc.b_hi).contains(&s),
            Kind::Btilde => (self.trunc.b_lo..=self.trunc.b_hi).contains(&(s + self.n)),
        }
    }

    fn summand(&mut self, kind: Kind, s: i64) -> Arc<Summand> {
        if let Some(found) = self.summands.get(&(kind, s)) {
            return Arc::clone(found);
        }
        let built = Arc::new(build_summand(self.c, kind, s, self.n));
        self.summands.insert((kind, s), Arc::clone(&built));
        built
    }

    fn flip(&mut self, s: i64) -> Result<EquivariantMap, SmallError> {
        if let Some(found) = self.flips.get(&s) {
            return Ok(found.clone());
        }
        let src = self.summand(Kind::Btilde, s);
        let dst = self.summand(Kind::B, s + self.n);
        let override_map = match self.flip_spec {
            FlipSpec::Default => None,
            FlipSpec::Overrides(map) => map.get(&s),
        };
        let flip = flip_mu_between(&src, &dst, override_map)?;
        self.flips.insert(s, flip.clone());
        Ok(flip)
    }

    fn iota(&mut self, kind: Kind, s: i64) -> EquivariantMap {
        let dst_kind = match kind {
            Kind::A => Kind::A,
            Kind::B => Kind::Btilde,
            Kind::Btilde => Kind::B,
        };
        let src = self.summand(kind, s);
        let dst = self.summand(dst_kind, -s - 1);
        iota_mu_between(self.c, &src, &dst)
    }

    /// `Omega = Phi . Psi` on `(kind)_s`, zero when the intermediate
    /// `(kind)_{s-1}` is dropped by the truncation.
    fn omega(&mut self, kind: Kind, s: i64) -> EquivariantMap {
        let here = self.summand(kind, s);
        if !self.kept(kind, s - 1) {
            let zero = Rational64::zero();
            return EquivariantMap::zero(
                Arc::clone(&here.complex),
                Arc::clone(&here.complex),
                (zero, zero),
                Variance::Equivariant,
            );
        }
        let below = self.summand(kind, s - 1);
        let psi = psi_mu_between(self.c, &here, &below);
        let phi = phi_mu_between(self.c, &below, &here);
        phi.compose(&psi)
    }

    /// `H_Omega: A_s -> B_s`, null-homotoping `Omega_B v + v Omega_A` with
    /// the truncated omegas.  When both intermediates survive this is the
    /// closed form `Phi . H_0`; otherwise the homotopy is solved exactly.
    fn h_omega(&mut self, s: i64) -> Result<EquivariantMap, SmallError> {
        let a = self.summand(Kind::A, s);
        let b = self.summand(Kind::B, s);
        if self.kept(Kind::A, s - 1) && self.kept(Kind::B, s - 1) {
            let b_lo = self.summand(Kind::B, s - 1);
            return Ok(phi_mu_between(self.c, &b_lo, &b).compose(&h0_between(&a, &b_lo)));
        }
        let v = v_mu_between(&a, &b);
        let rhs = self.omega(Kind::B, s).compose(&v).add(&v.compose(&self.omega(Kind::A, s)));
        solve_homotopy(&rhs).ok_or(SmallError::MissingHOmega(s))
    }

    /// `Ht_Omega: A_s -> Bt_s`, null-homotoping `Omega_Bt vt + vt Omega_A`
    /// with the truncated omegas; closed form `Phi . Ht_0` when applicable.
    fn h_omega_tilde(&mut self, s: i64) -> Result<EquivariantMap, SmallError> {
        let a = self.summand(Kind::A, s);
        let bt = self.summand(Kind::Btilde, s);
        if self.kept(Kind::A, s - 1) && self.kept(Kind::Btilde, s - 1) {
            let bt_lo = self.summand(Kind::Btilde, s - 1);
            return Ok(phi_mu_between(self.c, &bt_lo, &bt).compose(&h0_tilde_between(&a, &bt_lo)));
        }
        let vt = vtilde_mu_between(&a, &bt);
        let rhs =
            self.omega(Kind::Btilde, s).compose(&vt).add(&vt.compose(&self.omega(Kind::A, s)));
        solve_homotopy(&rhs).ok_or(SmallError::MissingHOmega(s))
    }

    /// Right-hand side of the `H*` equation on `Bt_s -> B_{-s-1}`:
    /// `F iota F + iota + F Omega iota F + Omega iota`.
    fn h_star_rhs(&mut self, s: i64) -> Result<EquivariantMap, SmallError> {
        let iota_here = self.iota(Kind::Btilde, s);
        let omega_b = self.omega(Kind::B, -s - 1);
        let direct = omega_b.compose(&iota_here).add(&iota_here);

        let f_in = self.flip(s)?;
        let iota_mid = self.iota(Kind::B, s + self.n);
        let f_out = self.flip(-s - self.n - 1)?;
        let omega_bt = self.omega(Kind::Btilde, -s - self.n - 1);
        let through = f_out
            .compose(&iota_mid)
            .add(&f_out.compose(&omega_bt).compose(&iota_mid))
            .compose(&f_in);
        Ok(direct.add(&through))
    }

    /// Solves for `H*: Bt_s -> B_{-s-1}` (bidegree `(1, 1)`, skew).
    fn h_star(&mut self, s: i64) -> Result<EquivariantMap, SmallError> {
        let rhs = self.h_star_rhs(s)?;
        solve_homotopy(&rhs).ok_or(SmallError::MissingHStar(s))
    }
}

/// Solves the `H*` homotopies on the truncated range, keyed by summand index.
pub fn solve_h_star(
    c: &CfkInput,
    n: i64,
    trunc: Truncation,
    flip_spec: &FlipSpec,
) -> Result<Vec<(i64, EquivariantMap)>, SmallError> {
    let mut builder = Builder::new(c, n, trunc, flip_spec);
    let mut out = Vec::new();
    for s in trunc.a_lo..=trunc.a_hi {
        if (trunc.b_lo..=trunc.b_hi).contains(&(-s - 1)) {
            out.push((s, builder.h_star(s)?));
        }
    }
    Ok(out)
}

/// Assembles the truncated surgery complex and its involution.
pub fn assemble(
    c: &CfkInput,
    n: i64,
    trunc: Truncation,
    flip_spec: &FlipSpec,
) -> Result<SurgeryComplex, SmallError> {
    let mut builder = Builder::new(c, n, trunc, flip_spec);

    // Layout: A summands by ascending index, then B summands.
    let mut slots: Vec<Slot> = Vec::new();
    let mut start = 0usize;
    for s in trunc.a_lo..=trunc.a_hi {
        let summand = builder.summand(Kind::A, s);
        slots.push(Slot { kind: Kind::A, s, start, summand: Arc::clone(&summand) });
        start += summand.complex.rank();
    }
    for s in trunc.b_lo..=trunc.b_hi {
        let summand = builder.summand(Kind::B, s);
        slots.push(Slot { kind: Kind::B, s, start, summand: Arc::clone(&summand) });
        start += summand.complex.rank();
    }
    let total_rank = start;
    let slot_start = |kind: Kind, s: i64| -> Option<usize> {
        slots.iter().find(|slot| slot.kind == kind && slot.s == s).map(|slot| slot.start)
    };

    let mut generators = Vec::with_capacity(total_rank);
    for slot in &slots {
        generators.extend(slot.summand.complex.generators.iter().cloned());
    }

    let embed = |total: &mut Mat, map: &EquivariantMap, src_start: usize, dst_start: usize| {
        for ((t, s), p) in &map.entries {
            mat_insert_add(total, (dst_start + t, src_start + s), p);
        }
    };

    let mut provenance: Vec<(String, EquivariantMap)> = Vec::new();

    // Differential: internal parts plus the cone edges v and F vt.
    let mut diff = Mat::new();
    for slot in &slots {
        for ((t, s), p) in &slot.summand.complex.diff {
            mat_insert_add(&mut diff, (slot.start + t, slot.start + s), p);
        }
    }
    for s in trunc.a_lo..=trunc.a_hi {
        let a = builder.summand(Kind::A, s);
        let a_start = slot_start(Kind::A, s).expect("A slot");
        if let Some(b_start) = slot_start(Kind::B, s) {
            let b = builder.summand(Kind::B, s);
            let v = v_mu_between(&a, &b);
            embed(&mut diff, &v, a_start, b_start);
            provenance.push((format!("v[{s}]"), v));
        }
        if let Some(b_start) = slot_start(Kind::B, s + n) {
            let bt = builder.summand(Kind::Btilde, s);
            let vt = vtilde_mu_between(&a, &bt);
            let flip = builder.flip(s)?;
            embed(&mut diff, &flip.compose(&vt), a_start, b_start);
            provenance.push((format!("vt[{s}]"), vt));
            provenance.push((format!("F[{s}]"), flip));
        }
    }

    // Involution.
    let h_stars: BTreeMap<i64, EquivariantMap> = {
        let mut out = BTreeMap::new();
        for s in trunc.a_lo..=trunc.a_hi {
            if (trunc.b_lo..=trunc.b_hi).contains(&(-s - 1)) {
                out.insert(s, builder.h_star(s)?);
            }
        }
        out
    };
    let mut inv = Mat::new();
    for s in trunc.a_lo..=trunc.a_hi {
        let t = -s - 1;
        let a_start = slot_start(Kind::A, s).expect("A slot");
        let at_start = slot_start(Kind::A, t)
            .ok_or_else(|| SmallError::Assembly(format!("A window not involution-closed at {s}")))?;
        let iota_a = builder.iota(Kind::A, s);
        let omega_t = builder.omega(Kind::A, t);
        let a_part = iota_a.add(&omega_t.compose(&iota_a));
        embed(&mut inv, &a_part, a_start, at_start);
        provenance.push((format!("iota_A[{s}]"), iota_a.clone()));
        provenance.push((format!("Omega_A[{t}]"), omega_t));

        if let Some(b_start) = slot_start(Kind::B, t) {
            let h_omega = builder.h_omega(t)?;
            embed(&mut inv, &h_omega.compose(&iota_a), a_start, b_start);
            provenance.push((format!("HOmega[{t}]"), h_omega));

            let a_here = builder.summand(Kind::A, s);
            let bt_here = builder.summand(Kind::Btilde, s);
            let vt = vtilde_mu_between(&a_here, &bt_here);
            let h_star = h_stars.get(&s).expect("H* solved on kept range").clone();
            embed(&mut inv, &h_star.compose(&vt), a_start, b_start);
            provenance.push((format!("Hstar[{s}]"), h_star));
        }
        if let Some(b_start) = slot_start(Kind::B, n + t) {
            let ht_omega = builder.h_omega_tilde(t)?;
            let flip = builder.flip(t)?;
            embed(&mut inv, &flip.compose(&ht_omega).compose(&iota_a), a_start, b_start);
            provenance.push((format!("HtOmega[{t}]"), ht_omega));
        }
    }
    for s in trunc.b_lo..=trunc.b_hi {
        let b_start = slot_start(Kind::B, s).expect("B slot");
        let dst_start = slot_start(Kind::B, n - s - 1)
            .ok_or_else(|| SmallError::Assembly(format!("B window not involution-closed at {s}")))?;
        let iota_b = builder.iota(Kind::B, s);
        let omega_bt = builder.omega(Kind::Btilde, -s - 1);
        let flip = builder.flip(-s - 1)?;
        let b_part = flip.compose(&iota_b.add(&omega_bt.compose(&iota_b)));
        embed(&mut inv, &b_part, b_start, dst_start);
        provenance.push((format!("iota_B[{s}]"), iota_b));
    }

    let complex = Arc::new(GradedComplex::new(generators, diff));
    let report = complex.validate();
    if !report.is_valid() {
        return Err(SmallError::Assembly(report.violations.join("; ")));
    }
    let involution = EquivariantMap {
        source: Arc::clone(&complex),
        target: Arc::clone(&complex),
        entries: inv,
        bidegree: (Rational64::zero(), Rational64::zero()),
        variance: Variance::Skew,
    };
    let inv_report = involution.validate(true);
    if !inv_report.is_valid() {
        return Err(SmallError::Assembly(format!(
            "non-polynomial or inhomogeneous involution entry: {}",
            inv_report.violations.join("; ")
        )));
    }
    if !involution.is_chain_map() {
        return Err(SmallError::Assembly("failed hypercube relation".into()));
    }

    Ok(SurgeryComplex { n, truncation: trunc, complex, involution, slots, provenance })
}

/// Convenience: truncate with the minimal window and assemble.
pub fn surgery(
    c: &CfkInput,
    n: i64,
    b_override: Option<i64>,
    flip_spec: &FlipSpec,
) -> Result<SurgeryComplex, SmallError> {
    let trunc = truncate(c, n, b_override)?;
    assemble(c, n, trunc, flip_spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::ring::BiPoly;

    fn fig8() -> CfkInput {
        CfkInput::new(catalog::figure_eight()).expect("figure-eight is certified")
    }

    fn entry(summand_or: &Mat, complex: &GradedComplex, from: &str, to: &str) -> BiPoly {
        let s = complex.index_of(from).expect("source label");
        let t = complex.index_of(to).expect("target label");
        summand_or.get(&(t, s)).cloned().unwrap_or_else(BiPoly::zero)
    }

    fn map_entry(map: &EquivariantMap, from: &str, to: &str) -> BiPoly {
        let s = map.source.index_of(from).expect("source label");
        let t = map.target.index_of(to).expect("target label");
        map.entries.get(&(t, s)).cloned().unwrap_or_else(BiPoly::zero)
    }

    fn poly(text: &str) -> BiPoly {
        BiPoly::parse(text).expect("polynomial literal")
    }

    #[test]
    fn figure_eight_summands_match_golden_differentials() {
        let c = fig8();
        let a_m1 = build_summand(&c, Kind::A, -1, 1);
        let a_0 = build_summand(&c, Kind::A, 0, 1);
        let b_0 = build_summand(&c, Kind::B, 0, 1);
        let bt_m1 = build_summand(&c, Kind::Btilde, -1, 1);
        for s in [&a_m1, &a_0, &b_0, &bt_m1] {
            assert_eq!(s.complex.rank(), 5);
            assert!(s.complex.validate().is_valid(), "{:?}", s.complex.validate().violations);
        }

        // A[-1]: basis (U1 a, b, c, d; e).
        let d = &a_m1.complex.diff;
        assert_eq!(entry(d, &a_m1.complex, "A[-1]:a", "A[-1]:d"), poly("U V"));
        assert_eq!(entry(d, &a_m1.complex, "A[-1]:b", "A[-1]:a"), poly("1"));
        assert_eq!(entry(d, &a_m1.complex, "A[-1]:b", "A[-1]:e"), poly("U"));
        assert_eq!(entry(d, &a_m1.complex, "A[-1]:e", "A[-1]:d"), poly("V"));
        assert_eq!(d.len(), 4);

        // A[0]: basis (a; b, c, d, V1 e).
        let d = &a_0.complex.diff;
        assert_eq!(entry(d, &a_0.complex, "A[0]:a", "A[0]:d"), poly("U"));
        assert_eq!(entry(d, &a_0.complex, "A[0]:b", "A[0]:a"), poly("V"));
        assert_eq!(entry(d, &a_0.complex, "A[0]:b", "A[0]:e"), poly("1"));
        assert_eq!(entry(d, &a_0.complex, "A[0]:e", "A[0]:d"), poly("U V"));
        assert_eq!(d.len(), 4);

        // B[0]: basis (V1^-1 a, b, c, d, V1 e).
        let d = &b_0.complex.diff;
        assert_eq!(entry(d, &b_0.complex, "B[0]:a", "B[0]:d"), poly("1"));
        assert_eq!(entry(d, &b_0.complex, "B[0]:b", "B[0]:a"), poly("U V"));
        assert_eq!(entry(d, &b_0.complex, "B[0]:b", "B[0]:e"), poly("1"));
        assert_eq!(entry(d, &b_0.complex, "B[0]:e", "B[0]:d"), poly("U V"));
        assert_eq!(d.len(), 4);

        // Bt[-1]: basis (U1 a, b, c, d, U1^-1 e).
        let d = &bt_m1.complex.diff;
        assert_eq!(entry(d, &bt_m1.complex, "Bt[-1]:a", "Bt[-1]:d"), poly("U V"));
        assert_eq!(entry(d, &bt_m1.complex, "Bt[-1]:b", "Bt[-1]:a"), poly("1"));
        assert_eq!(entry(d, &bt_m1.complex, "Bt[-1]:b", "Bt[-1]:e"), poly("U V"));
        assert_eq!(entry(d, &bt_m1.complex, "Bt[-1]:e", "Bt[-1]:d"), poly("1"));
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn figure_eight_edges_match_golden_tables() {
        let c = fig8();
        let a_m1 = build_summand(&c, Kind::A, -1, 1);
        let a_0 = build_summand(&c, Kind::A, 0, 1);
        let b_0 = build_summand(&c, Kind::B, 0, 1);
        let bt_m1 = build_summand(&c, Kind::Btilde, -1, 1);

        let v = v_mu_between(&a_0, &b_0);
        assert!(v.validate(true).is_valid());
        assert_eq!(map_entry(&v, "A[0]:a", "B[0]:a"), poly("U"));
        for x in ["b", "c", "d", "e"] {
            assert_eq!(
                map_entry(&v, &format!("A[0]:{x}"), &format!("B[0]:{x}")),
                poly("1")
            );
        }

        let vt = vtilde_mu_between(&a_m1, &bt_m1);
        assert!(vt.validate(true).is_valid());
        assert_eq!(map_entry(&vt, "A[-1]:e", "Bt[-1]:e"), poly("V"));
        for x in ["a", "b", "c", "d"] {
            assert_eq!(
                map_entry(&vt, &format!("A[-1]:{x}"), &format!("Bt[-1]:{x}")),
                poly("1")
            );
        }

        // iota on A[-1] -> A[0] and back, per the golden involution table.
        let i_m1 = iota_mu_between(&c, &a_m1, &a_0);
        assert!(i_m1.validate(true).is_valid());
        let expect = [
            ("a", vec![("e", "1")]),
            ("b", vec![("b", "1"), ("c", "1")]),
            ("c", vec![("c", "1"), ("d", "1")]),
            ("d", vec![("d", "1")]),
            ("e", vec![("a", "1")]),
        ];
        for (from, images) in &expect {
            for (to, val) in images {
                assert_eq!(
                    map_entry(&i_m1, &format!("A[-1]:{from}"), &format!("A[0]:{to}")),
                    poly(val),
                    "iota(A[-1]:{from}) -> A[0]:{to}"
                );
            }
        }
        assert_eq!(i_m1.entries.len(), 7);

        let i_b0 = iota_mu_between(&c, &b_0, &bt_m1);
        assert!(i_b0.validate(true).is_valid());
        for (from, images) in &expect {
            for (to, val) in images {
                assert_eq!(
                    map_entry(&i_b0, &format!("B[0]:{from}"), &format!("Bt[-1]:{to}")),
                    poly(val),
                    "iota(B[0]:{from}) -> Bt[-1]:{to}"
                );
            }
        }

        // Phi: A[-1] -> A[0] sends b to a and e to d.
        let phi = phi_mu_between(&c, &a_m1, &a_0);
        assert!(phi.validate(true).is_valid());
        assert_eq!(map_entry(&phi, "A[-1]:b", "A[0]:a"), poly("1"));
        assert_eq!(map_entry(&phi, "A[-1]:e", "A[0]:d"), poly("1"));
        assert_eq!(phi.entries.len(), 2);

        // Psi: A[0] -> A[-1] sends a to d and V1 e to V2 d.
        let psi = psi_mu_between(&c, &a_0, &a_m1);
        assert!(psi.validate(true).is_valid());
        assert_eq!(map_entry(&psi, "A[0]:a", "A[-1]:d"), poly("1"));
        assert_eq!(map_entry(&psi, "A[0]:e", "A[-1]:d"), poly("V"));
        assert_eq!(psi.entries.len(), 2);

        // H_Omega and Ht_Omega vanish here, and H* = 0 solves its equation.
        let b_m1 = build_summand(&c, Kind::B, -1, 1);
        let h0 = h0_between(&a_0, &b_m1);
        let h_omega = phi_mu_between(&c, &b_m1, &b_0).compose(&h0);
        assert!(h_omega.is_zero());
        let bt_m2 = build_summand(&c, Kind::Btilde, -2, 1);
        let h0t = h0_tilde_between(&a_m1, &bt_m2);
        let ht_omega = phi_mu_between(&c, &bt_m2, &bt_m1).compose(&h0t);
        assert!(ht_omega.is_zero());
        let trunc = truncate(&c, 1, None).unwrap();
        let flips = fig8_flip_override(&c);
        let stars = solve_h_star(&c, 1, trunc, &flips).unwrap();
        assert!(!stars.is_empty());
        assert!(stars.iter().all(|(_, h)| h.is_zero()));
    }

    #[test]
    fn figure_eight_flip_override_is_accepted_and_matches_golden() {
        let c = fig8();
        let bt_m1 = build_summand(&c, Kind::Btilde, -1, 1);
        let b_0 = build_summand(&c, Kind::B, 0, 1);
        // Basis-to-basis flip: a -> e, b -> b, c -> c, d -> d, e -> a.
        let mut entries = Mat::new();
        for (from, to) in [("a", "e"), ("b", "b"), ("c", "c"), ("d", "d"), ("e", "a")] {
            let s = bt_m1.complex.index_of(&format!("Bt[-1]:{from}")).unwrap();
            let t = b_0.complex.index_of(&format!("B[0]:{to}")).unwrap();
            entries.insert((t, s), BiPoly::one());
        }
        let override_map = EquivariantMap {
            source: Arc::clone(&bt_m1.complex),
            target: Arc::clone(&b_0.complex),
            entries,
            bidegree: (Rational64::zero(), Rational64::zero()),
            variance: Variance::Equivariant,
        };
        let accepted = flip_mu_between(&bt_m1, &b_0, Some(&override_map)).unwrap();
        assert_eq!(accepted.entries, override_map.entries);

        // Composite F vt matches the golden table (e goes to V2 (V1^-1 a)).
        let a_m1 = build_summand(&c, Kind::A, -1, 1);
        let fvt = accepted.compose(&vtilde_mu_between(&a_m1, &bt_m1));
        assert_eq!(map_entry(&fvt, "A[-1]:a", "B[0]:e"), poly("1"));
        assert_eq!(map_entry(&fvt, "A[-1]:e", "B[0]:a"), poly("V"));
        for x in ["b", "c", "d"] {
            assert_eq!(
                map_entry(&fvt, &format!("A[-1]:{x}"), &format!("B[0]:{x}")),
                poly("1")
            );
        }

        // The default flip is also a valid equivalence.
        let default = flip_mu_between(&bt_m1, &b_0, None).unwrap();
        assert!(default.is_chain_map());
        assert!(default.validate(true).is_valid());
    }

    fn fig8_flip_override(c: &CfkInput) -> FlipSpec {
        let bt_m1 = build_summand(c, Kind::Btilde, -1, 1);
        let b_0 = build_summand(c, Kind::B, 0, 1);
        let mut entries = Mat::new();
        for (from, to) in [("a", "e"), ("b", "b"), ("c", "c"), ("d", "d"), ("e", "a")] {
            let s = bt_m1.complex.index_of(&format!("Bt[-1]:{from}")).unwrap();
            let t = b_0.complex.index_of(&format!("B[0]:{to}")).unwrap();
            entries.insert((t, s), BiPoly::one());
        }
        let map = EquivariantMap {
            source: Arc::clone(&bt_m1.complex),
            target: Arc::clone(&b_0.complex),
            entries,
            bidegree: (Rational64::zero(), Rational64::zero()),
            variance: Variance::Equivariant,
        };
        FlipSpec::Overrides([(-1, map)].into_iter().collect())
    }

    #[test]
    fn figure_eight_assembles_and_reduces_to_five_generators() {
        let c = fig8();
        let flips = fig8_flip_override(&c);
        let model = surgery(&c, 1, None, &flips).unwrap();
        assert_eq!(model.complex.rank(), 15);
        assert!(model.involution.is_chain_map());

        let reduced = reduce(&model.complex, &[model.involution.clone()]);
        assert_eq!(reduced.reduced.rank(), 5);
        let small_iota = &reduced.transported[0];
        assert!(small_iota.validate(true).is_valid());
        // The reduced involution squares to id + Phi Psi up to homotopy.
        let ic = IotaComplex {
            complex: Arc::clone(&reduced.reduced),
            iota: small_iota.clone(),
            certificate: None,
        };
        assert!(verify_iota_complex(&ic).is_valid());
        let towers = tower_structure(&reduced.reduced);
        assert!(towers.single_tower, "{towers:?}");
    }

    #[test]
    fn unknot_reduces_to_one_generator_with_identity_involution() {
        let c = CfkInput::new(catalog::unknot()).unwrap();
        let model = surgery(&c, 1, None, &FlipSpec::Default).unwrap();
        assert_eq!(model.complex.rank(), 3);
        let reduced = reduce(&model.complex, &[model.involution.clone()]);
        assert_eq!(reduced.reduced.rank(), 1);
        assert!(reduced.reduced.diff.is_empty());
        let iota = &reduced.transported[0];
        assert_eq!(iota.entries.len(), 1);
        assert!(iota.entries.get(&(0, 0)).unwrap().is_one());
    }

    #[test]
    fn mixed_edge_identities_vanish_on_the_catalog() {
        for name in catalog::names() {
            let c = CfkInput::new(catalog::by_name(name).unwrap()).unwrap();
            for s in -2..=2 {
                let a = build_summand(&c, Kind::A, s, 1);
                let a_op = build_summand(&c, Kind::A, -s - 1, 1);
                let b = build_summand(&c, Kind::B, s, 1);
                let bt = build_summand(&c, Kind::Btilde, s, 1);
                let b_op = build_summand(&c, Kind::B, -s - 1, 1);
                let bt_op = build_summand(&c, Kind::Btilde, -s - 1, 1);

                let iota_a = iota_mu_between(&c, &a, &a_op);
                let lhs = vtilde_mu_between(&a_op, &bt_op).compose(&iota_a);
                let rhs = iota_mu_between(&c, &b, &bt_op).compose(&v_mu_between(&a, &b));
                assert!(lhs.add(&rhs).is_zero(), "vt iota + iota v on {name} at s = {s}");

                let lhs = v_mu_between(&a_op, &b_op).compose(&iota_a);
                let rhs = iota_mu_between(&c, &bt, &b_op).compose(&vtilde_mu_between(&a, &bt));
                assert!(lhs.add(&rhs).is_zero(), "v iota + iota vt on {name} at s = {s}");
            }
        }
    }

    #[test]
    fn property_suite_over_catalog_and_coefficients() {
        for name in catalog::names() {
            let c = CfkInput::new(catalog::by_name(name).unwrap()).unwrap();
            for n in [-2, -1, 1, 2] {
                for extra in [0, 1, 2] {
                    let b = minimal_b(c.genus, n) + extra;
                    let model = surgery(&c, n, Some(b), &FlipSpec::Default)
                        .unwrap_or_else(|e| panic!("surgery({name}, {n}, b = {b}): {e}"));
                    assert!(model.complex.validate().is_valid());
                    assert!(
                        model.involution.is_chain_map(),
                        "iota chain map on {name}, n = {n}, b = {b}"
                    );
                    let report = verify_iota_complex(&model.iota_complex());
                    assert!(report.is_valid(), "{name}, n = {n}, b = {b}: {:?}", report.violations);
                }
            }
        }
    }
}
