//! Local-equivalence machinery: the three- and five-summand local models of
//! the `+1` and `-1` surgery cones, verification of local maps between
//! involutive complexes, and a bounded search for local trivializations.
//!
//! A *local map* between involutive complexes is a grading-preserving
//! equivariant chain map that commutes with the involutions up to a skew
//! homotopy and induces an isomorphism on the `U`-inverted homology after
//! setting `V = 1`.  The localized-homology clause is checked exactly: in
//! gradings below every generator, multiplication by `U` is an isomorphism of
//! chain groups, so the localized homology is computed by finite linear
//! algebra over the two-element field in one stable grading per parity class.
//!
//! The trivialization search enumerates the affine solution space of the
//! joint linear system for the map and its commutation homotopy (both have
//! one mod-2 unknown per grading-admissible matrix cell) and filters by the
//! localized-isomorphism clause.  Solution spaces larger than `2^16` are
//! reported as inconclusive, never as a negative answer.
//!
//! Determinism: cell orders, equation orders, and solution enumeration are
//! all canonical, so equal inputs give identical verdicts and witnesses.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

use crate::complex::{
    mat_insert_add, reduce, solve_homotopy, EquivariantMap, Generator, GradedComplex, Grading,
    IotaComplex, Mat, Variance,
};
use crate::gf2::{BitRow, LinearSystem};
use crate::ring::Mono;
use crate::smallmodel::{
    assemble, CfkInput, FlipSpec, SmallError, SurgeryComplex, Truncation,
};

/// Upper bound on enumerated affine solution spaces (`2^16`).
const MAX_SEARCH_DIM: usize = 16;

/// Errors of the local-equivalence layer.
#[derive(Debug, Error)]
pub enum LocalError {
    /// Local models exist only for the two unit surgery coefficients.
    #[error("local models are defined for surgery coefficients +1 and -1 (got {0})")]
    Coefficient(i64),
    /// The underlying small-model construction failed.
    #[error(transparent)]
    Small(#[from] SmallError),
    /// Two complexes could not be matched slot-by-slot.
    #[error("truncation comparison failed: {0}")]
    Shape(String),
}

/// The local model of the surgery cone for `n = +1` (two `A` summands over
/// one `B` summand) or `n = -1` (two `A` summands over three `B` summands),
/// with the restriction of the involution.  The generator count is `3 * rank`
/// resp. `5 * rank` of the input.
pub fn local_model(c: &CfkInput, n: i64) -> Result<SurgeryComplex, LocalError> {
    if n != 1 && n != -1 {
        return Err(LocalError::Coefficient(n));
    }
    let trunc = Truncation { b: 0, a_lo: -1, a_hi: 0, b_lo: n - 1, b_hi: 0 };
    Ok(assemble(c, n, trunc, &FlipSpec::Default)?)
}

/// The trivial involutive complex: one generator in grading `(0, 0)`, zero
/// differential, identity involution.
#[must_use]
pub fn trivial_model() -> IotaComplex {
    let complex = Arc::new(GradedComplex::new(
        vec![Generator { label: "x".to_owned(), grading: Grading::new_int(0, 0) }],
        Mat::new(),
    ));
    let mut entries = Mat::new();
    entries.insert((0, 0), Mono::one().into());
    let iota = EquivariantMap {
        source: Arc::clone(&complex),
        target: Arc::clone(&complex),
        entries,
        bidegree: (Rational64::zero(), Rational64::zero()),
        variance: Variance::Skew,
    };
    IotaComplex { complex, iota, certificate: None }
}

/// Row-echelon insertion; returns the rank of the span.
fn rank_of(rows: &[BitRow]) -> usize {
    let mut basis: Vec<BitRow> = Vec::new();
    for row in rows {
        let mut r = row.clone();
        loop {
            let Some(pivot) = r.first_set() else { break };
            match basis.iter().find(|b| b.first_set() == Some(pivot)) {
                Some(b) => r.xor_assign(&b.clone()),
                None => {
                    basis.push(r);
                    break;
                }
            }
        }
    }
    basis.len()
}

/// Basis of the `V = 1` chain group in `gr_w`-grading `d`: all `U^k g` with
/// `gr_w(g) - 2k = d` and `k >= 0`.
fn v1_basis(c: &GradedComplex, d: Rational64) -> Vec<(usize, i64)> {
    let two = Rational64::from_integer(2);
    let mut out = Vec::new();
    for (g, generator) in c.generators.iter().enumerate() {
        let q = (generator.grading.gr_w - d) / two;
        if q.is_integer() && q >= Rational64::zero() {
            out.push((g, q.to_integer()));
        }
    }
    out
}

/// Columns of a map at `V = 1` between graded pieces: one bit row over the
/// target basis per source basis cell.
fn v1_columns(
    entries: &Mat,
    src_basis: &[(usize, i64)],
    dst_basis: &[(usize, i64)],
) -> Vec<BitRow> {
    let dst_index: BTreeMap<(usize, i64), usize> =
        dst_basis.iter().enumerate().map(|(i, cell)| (*cell, i)).collect();
    let mut per_source: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
    for ((t, s), p) in entries {
        for m in &p.terms {
            per_source.entry(*s).or_default().push((*t, m.u_exp));
        }
    }
    src_basis
        .iter()
        .map(|&(g, k)| {
            let mut row = BitRow::zeros(dst_basis.len());
            for &(t, u) in per_source.get(&g).into_iter().flatten() {
                let idx = dst_index
                    .get(&(t, k + u))
                    .expect("graded image cell outside the target basis");
                row.flip(*idx);
            }
            row
        })
        .collect()
}

/// Kernel basis of a map given by columns (vectors over the target basis).
fn kernel_basis(columns: &[BitRow], target_len: usize) -> Vec<BitRow> {
    let mut system = LinearSystem::new(columns.len());
    for j in 0..target_len {
        let mut row = BitRow::zeros(columns.len());
        for (i, col) in columns.iter().enumerate() {
            if col.get(j) {
                row.set(i, true);
            }
        }
        system.push(row, false);
    }
    system.solve().expect("homogeneous system is always solvable").kernel_basis
}

/// Combines basis cells weighted by a coefficient vector.
fn combine(columns: &[BitRow], weights: &BitRow, len: usize) -> BitRow {
    let mut out = BitRow::zeros(len);
    for (i, col) in columns.iter().enumerate() {
        if weights.get(i) {
            out.xor_assign(col);
        }
    }
    out
}

/// Whether a grading-preserving equivariant chain map induces an isomorphism
/// on the `U`-inverted homology at `V = 1`.  Exact: computed in one stable
/// grading per parity class, below every generator, where multiplication by
/// `U` is an isomorphism of chain groups.
#[must_use]
pub fn localized_iso(f: &EquivariantMap) -> bool {
    if f.variance != Variance::Equivariant
        || f.bidegree != (Rational64::zero(), Rational64::zero())
    {
        return false;
    }
    let src = &f.source;
    let dst = &f.target;
    if src.rank() == 0 && dst.rank() == 0 {
        return true;
    }
    let two = Rational64::from_integer(2);
    let all_gr = || {
        src.generators
            .iter()
            .chain(dst.generators.iter())
            .map(|g| g.grading.gr_w)
    };
    let Some(min_gr) = all_gr().min() else { return false };
    let cosets: BTreeSet<Rational64> =
        all_gr().map(|r| r - two * (r / two).floor()).collect();

    let d_src = EquivariantMap::differential(src);
    let d_dst = EquivariantMap::differential(dst);
    for rep in cosets {
        // A stable grading in this parity class, strictly below min_gr.
        let d = rep + two * ((min_gr - rep) / two).floor() - two;
        let src_d = v1_basis(src, d);
        let src_d1 = v1_basis(src, d + Rational64::from_integer(1));
        let src_dm = v1_basis(src, d - Rational64::from_integer(1));
        let dst_d = v1_basis(dst, d);
        let dst_d1 = v1_basis(dst, d + Rational64::from_integer(1));
        let dst_dm = v1_basis(dst, d - Rational64::from_integer(1));

        let src_cycles = kernel_basis(&v1_columns(&d_src.entries, &src_d, &src_dm), src_dm.len());
        let src_bdry = v1_columns(&d_src.entries, &src_d1, &src_d);
        let dst_cycles = kernel_basis(&v1_columns(&d_dst.entries, &dst_d, &dst_dm), dst_dm.len());
        let dst_bdry = v1_columns(&d_dst.entries, &dst_d1, &dst_d);

        let h_src = src_cycles.len() - rank_of(&src_bdry);
        let h_dst = dst_cycles.len() - rank_of(&dst_bdry);
        if h_src != h_dst {
            return false;
        }
        if h_src == 0 {
            continue;
        }

        // Rank of the induced map: span of boundaries plus mapped cycles.
        let f_cols = v1_columns(&f.entries, &src_d, &dst_d);
        let mut span: Vec<BitRow> = dst_bdry.clone();
        for z in &src_cycles {
            let src_vec = combine(
                &(0..src_d.len())
                    .map(|i| {
                        let mut e = BitRow::zeros(src_d.len());
                        e.set(i, true);
                        e
                    })
                    .collect::<Vec<_>>(),
                z,
                src_d.len(),
            );
            span.push(combine(&f_cols, &src_vec, dst_d.len()));
        }
        let image_rank = rank_of(&span) - rank_of(&dst_bdry);
        if image_rank != h_src {
            return false;
        }
    }
    true
}

/// Outcome of verifying one local map.
#[derive(Debug, Clone)]
pub struct LocalMapReport {
    /// Failed clauses, empty when the map is local.
    pub violations: Vec<String>,
    /// Skew homotopy certifying the involution commutation, when found.
    pub certificate: Option<EquivariantMap>,
}

impl LocalMapReport {
    /// Whether every clause passed.
    #[must_use]
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies that `f` is a local map from `source` to `target`: a
/// grading-preserving equivariant chain map with a skew homotopy certifying
/// `f iota + iota' f = 0` (supplied or solved) and a localized-homology
/// isomorphism.
#[must_use]
pub fn verify_local_map(
    source: &IotaComplex,
    target: &IotaComplex,
    f: &EquivariantMap,
    homotopy: Option<&EquivariantMap>,
) -> LocalMapReport {
    let mut violations = Vec::new();
    let zero = (Rational64::zero(), Rational64::zero());
    if f.source != source.complex || f.target != target.complex {
        violations.push("map endpoints do not match the given complexes".to_owned());
        return LocalMapReport { violations, certificate: None };
    }
    if f.variance != Variance::Equivariant || f.bidegree != zero {
        violations.push("map is not equivariant of bidegree (0, 0)".to_owned());
    }
    let shape = f.validate(true);
    violations.extend(shape.violations);
    if !f.is_chain_map() {
        violations.push("map is not a chain map".to_owned());
    }
    if !violations.is_empty() {
        return LocalMapReport { violations, certificate: None };
    }

    let commutator = f.compose(&source.iota).add(&target.iota.compose(f));
    let certificate = match homotopy {
        Some(h) => {
            let one = Rational64::from_integer(1);
            if h.variance != Variance::Skew || h.bidegree != (one, one) {
                violations.push("supplied homotopy is not skew of bidegree (1, 1)".to_owned());
                None
            } else {
                let d_src = EquivariantMap::differential(&source.complex);
                let d_dst = EquivariantMap::differential(&target.complex);
                let boundary = d_dst.compose(h).add(&h.compose(&d_src));
                if boundary.entries == commutator.entries {
                    Some(h.clone())
                } else {
                    violations
                        .push("supplied homotopy does not certify iota-commutation".to_owned());
                    None
                }
            }
        }
        None => {
            let solved = solve_homotopy(&commutator);
            if solved.is_none() {
                violations.push("no skew homotopy certifies iota-commutation".to_owned());
            }
            solved
        }
    };

    if !localized_iso(f) {
        violations
            .push("map does not induce an isomorphism on the U-inverted homology".to_owned());
    }
    LocalMapReport { violations, certificate }
}

/// A pair of local maps witnessing a local equivalence.
#[derive(Debug, Clone)]
pub struct LocalMapWitness {
    /// The forward local map.
    pub forward: EquivariantMap,
    /// The backward local map.
    pub backward: EquivariantMap,
    /// Skew homotopy for the forward commutation, when stored.
    pub forward_homotopy: Option<EquivariantMap>,
    /// Skew homotopy for the backward commutation, when stored.
    pub backward_homotopy: Option<EquivariantMap>,
}

/// Verifies both directions of a local-equivalence witness.
#[must_use]
pub fn verify_local_equivalence(
    source: &IotaComplex,
    target: &IotaComplex,
    witness: &LocalMapWitness,
) -> LocalMapReport {
    let forward =
        verify_local_map(source, target, &witness.forward, witness.forward_homotopy.as_ref());
    let backward =
        verify_local_map(target, source, &witness.backward, witness.backward_homotopy.as_ref());
    let mut violations: Vec<String> =
        forward.violations.iter().map(|v| format!("forward: {v}")).collect();
    violations.extend(backward.violations.iter().map(|v| format!("backward: {v}")));
    LocalMapReport { violations, certificate: forward.certificate }
}

/// Grading-admissible cells of an unknown homogeneous map: one mod-2
/// coefficient per `(target, source)` pair whose forced monomial is
/// polynomial.
fn unknown_cells(
    source: &GradedComplex,
    target: &GradedComplex,
    bidegree: (Rational64, Rational64),
    variance: Variance,
) -> Vec<(usize, usize, Mono)> {
    let two = Rational64::from_integer(2);
    let mut out = Vec::new();
    for t in 0..target.rank() {
        for s in 0..source.rank() {
            let base = match variance {
                Variance::Equivariant => source.generators[s].grading,
                Variance::Skew => source.generators[s].grading.swap(),
            };
            let eu = (base.gr_w + bidegree.0 - target.generators[t].grading.gr_w) / two;
            let ev = (base.gr_z + bidegree.1 - target.generators[t].grading.gr_z) / two;
            if eu.is_integer()
                && ev.is_integer()
                && eu >= Rational64::zero()
                && ev >= Rational64::zero()
            {
                let mono = Mono::new(eu.to_integer(), ev.to_integer()).expect("nonnegative");
                out.push((t, s, mono));
            }
        }
    }
    out
}

/// Equation accumulator: rows keyed by (family, target, source, monomial).
struct Equations {
    unknowns: usize,
    rows: BTreeMap<(u8, usize, usize, Mono), BitRow>,
}

impl Equations {
    fn new(unknowns: usize) -> Self {
        Equations { unknowns, rows: BTreeMap::new() }
    }

    fn toggle(&mut self, family: u8, t: usize, s: usize, mono: Mono, unknown: usize) {
        self.rows
            .entry((family, t, s, mono))
            .or_insert_with(|| BitRow::zeros(self.unknowns))
            .flip(unknown);
    }
}

/// Laurent-tolerant monomial product (used only as an equation key).
fn key_mul(a: &Mono, b: &Mono) -> Mono {
    Mono::laurent(a.u_exp + b.u_exp, a.v_exp + b.v_exp)
}

/// Builds an equivariant map from chosen cells and a solution vector.
fn map_from_cells(
    source: &Arc<GradedComplex>,
    target: &Arc<GradedComplex>,
    cells: &[(usize, usize, Mono)],
    bits: impl Fn(usize) -> bool,
    offset: usize,
    bidegree: (Rational64, Rational64),
    variance: Variance,
) -> EquivariantMap {
    let mut entries = Mat::new();
    for (i, (t, s, mono)) in cells.iter().enumerate() {
        if bits(offset + i) {
            mat_insert_add(&mut entries, (*t, *s), &(*mono).into());
        }
    }
    EquivariantMap {
        source: Arc::clone(source),
        target: Arc::clone(target),
        entries,
        bidegree,
        variance,
    }
}

/// Searches for a local map `source -> target` by solving the joint linear
/// system for the map and its commutation homotopy, then filtering the
/// solution space by the localized-isomorphism clause.  `Ok(None)` means no
/// solution passed the filter; `Err` reports an oversized solution space.
pub fn find_local_map(
    source: &IotaComplex,
    target: &IotaComplex,
) -> Result<Option<(EquivariantMap, EquivariantMap)>, String> {
    let zero = (Rational64::zero(), Rational64::zero());
    let one = Rational64::from_integer(1);
    let cells_f = unknown_cells(&source.complex, &target.complex, zero, Variance::Equivariant);
    let cells_h = unknown_cells(&source.complex, &target.complex, (one, one), Variance::Skew);
    let unknowns = cells_f.len() + cells_h.len();
    let mut eqs = Equations::new(unknowns);

    let d_src = &source.complex.diff;
    let d_dst = &target.complex.diff;
    let i_src = &source.iota.entries;
    let i_dst = &target.iota.entries;

    for (i, (t, m, e)) in cells_f.iter().enumerate() {
        // Chain map: f d + d f = 0.
        for ((mt, s), p) in d_src {
            if mt == m {
                for mono in &p.terms {
                    eqs.toggle(0, *t, *s, key_mul(e, mono), i);
                }
            }
        }
        for ((t2, ts), p) in d_dst {
            if ts == t {
                for mono in &p.terms {
                    eqs.toggle(0, *t2, *m, key_mul(mono, e), i);
                }
            }
        }
        // Commutation: f iota contributes unswapped, iota' f swaps f.
        for ((mt, s), p) in i_src {
            if mt == m {
                for mono in &p.terms {
                    eqs.toggle(1, *t, *s, key_mul(e, mono), i);
                }
            }
        }
        for ((t2, ts), p) in i_dst {
            if ts == t {
                for mono in &p.terms {
                    eqs.toggle(1, *t2, *m, key_mul(mono, &e.swap_vars()), i);
                }
            }
        }
    }
    for (j, (t, m, e)) in cells_h.iter().enumerate() {
        let i = cells_f.len() + j;
        // Commutation: h d (h is skew, so d's monomials swap) + d h.
        for ((mt, s), p) in d_src {
            if mt == m {
                for mono in &p.terms {
                    eqs.toggle(1, *t, *s, key_mul(e, &mono.swap_vars()), i);
                }
            }
        }
        for ((t2, ts), p) in d_dst {
            if ts == t {
                for mono in &p.terms {
                    eqs.toggle(1, *t2, *m, key_mul(mono, e), i);
                }
            }
        }
    }

    let mut system = LinearSystem::new(unknowns);
    for row in eqs.rows.into_values() {
        system.push(row, false);
    }
    let solutions = system.solve().expect("homogeneous system is always solvable");
    if solutions.kernel_basis.len() > MAX_SEARCH_DIM {
        return Err(format!(
            "solution space has dimension {} (> {MAX_SEARCH_DIM}); search is inconclusive",
            solutions.kernel_basis.len()
        ));
    }
    for candidate in solutions.enumerate() {
        let f = map_from_cells(
            &source.complex,
            &target.complex,
            &cells_f,
            |i| candidate.get(i),
            0,
            zero,
            Variance::Equivariant,
        );
        if f.is_zero() || !localized_iso(&f) {
            continue;
        }
        let h = map_from_cells(
            &source.complex,
            &target.complex,
            &cells_h,
            |i| candidate.get(i),
            cells_f.len(),
            (one, one),
            Variance::Skew,
        );
        return Ok(Some((f, h)));
    }
    Ok(None)
}

/// Verdict of the local-triviality search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrivialVerdict {
    /// Witnesses to and from the trivial complex were found and re-verified.
    LocallyTrivial,
    /// No witness was found within the search bound; this is never a
    /// negative answer.
    Inconclusive,
}

/// Outcome of [`local_triviality_check`].
#[derive(Debug, Clone)]
pub struct TrivialityReport {
    /// The verdict.
    pub verdict: TrivialVerdict,
    /// Human-readable explanation.
    pub reason: String,
    /// The reduced local model the search ran on.
    pub reduced: IotaComplex,
    /// The witness pair, when found.
    pub witness: Option<LocalMapWitness>,
}

/// Builds the `n = +-1` local model, reduces it with its involution, and
/// searches for a local equivalence with the trivial complex.
pub fn local_triviality_check(c: &CfkInput, n: i64) -> Result<TrivialityReport, LocalError> {
    let model = local_model(c, n)?;
    let red = reduce(&model.complex, &[model.involution.clone()]);
    let reduced = IotaComplex {
        complex: Arc::clone(&red.reduced),
        iota: red.transported[0].clone(),
        certificate: None,
    };
    let trivial = trivial_model();

    let inconclusive = |reason: String, reduced: IotaComplex| TrivialityReport {
        verdict: TrivialVerdict::Inconclusive,
        reason,
        reduced,
        witness: None,
    };
    let forward = match find_local_map(&reduced, &trivial) {
        Ok(Some(found)) => found,
        Ok(None) => {
            return Ok(inconclusive("no forward witness found".to_owned(), reduced));
        }
        Err(reason) => return Ok(inconclusive(reason, reduced)),
    };
    let backward = match find_local_map(&trivial, &reduced) {
        Ok(Some(found)) => found,
        Ok(None) => {
            return Ok(inconclusive("no backward witness found".to_owned(), reduced));
        }
        Err(reason) => return Ok(inconclusive(reason, reduced)),
    };
    let witness = LocalMapWitness {
        forward: forward.0,
        backward: backward.0,
        forward_homotopy: Some(forward.1),
        backward_homotopy: Some(backward.1),
    };
    let recheck = verify_local_equivalence(&reduced, &trivial, &witness);
    if !recheck.is_valid() {
        return Ok(inconclusive(
            format!("found witness failed re-verification: {}", recheck.violations.join("; ")),
            reduced,
        ));
    }
    Ok(TrivialityReport {
        verdict: TrivialVerdict::LocallyTrivial,
        reason: "witnesses found and re-verified".to_owned(),
        reduced,
        witness: Some(witness),
    })
}

/// The canonical comparison map between the local model and a wider
/// truncation of the same cone: the slot-by-slot identity, oriented as a
/// projection (wide to narrow) for `n > 0` and as an inclusion (narrow to
/// wide) for `n < 0`, matching the direction in which the matched summands
/// form a quotient resp. subcomplex.
pub fn truncation_comparison(
    small: &SurgeryComplex,
    big: &SurgeryComplex,
) -> Result<EquivariantMap, LocalError> {
    if small.n != big.n {
        return Err(LocalError::Shape("surgery coefficients differ".to_owned()));
    }
    let mut blocks: Vec<(usize, usize, usize)> = Vec::new();
    for slot in &small.slots {
        let Some(partner) = big.slots.iter().find(|b| b.kind == slot.kind && b.s == slot.s)
        else {
            return Err(LocalError::Shape(format!(
                "summand {:?}[{}] missing from the wide truncation",
                slot.kind, slot.s
            )));
        };
        let rank = slot.summand.complex.rank();
        if partner.summand.complex.rank() != rank {
            return Err(LocalError::Shape("matched summands have different ranks".to_owned()));
        }
        blocks.push((slot.start, partner.start, rank));
    }
    let mut entries = Mat::new();
    for (small_start, big_start, rank) in blocks {
        for i in 0..rank {
            let key = if small.n > 0 {
                (small_start + i, big_start + i)
            } else {
                (big_start + i, small_start + i)
            };
            entries.insert(key, Mono::one().into());
        }
    }
    let (source, target) = if small.n > 0 {
        (Arc::clone(&big.complex), Arc::clone(&small.complex))
    } else {
        (Arc::clone(&small.complex), Arc::clone(&big.complex))
    };
    let map = EquivariantMap {
        source,
        target,
        entries,
        bidegree: (Rational64::zero(), Rational64::zero()),
        variance: Variance::Equivariant,
    };
    let report = map.validate(true);
    if !report.is_valid() {
        return Err(LocalError::Shape(report.violations.join("; ")));
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::smallmodel::{minimal_b, surgery};

    fn input(name: &str) -> CfkInput {
        CfkInput::new(catalog::by_name(name).expect("catalog name")).expect("certified")
    }

    #[test]
    fn local_model_generator_counts_match_the_rank_multiples() {
        for name in catalog::names() {
            let c = input(name);
            let rank = c.model.complex.rank();
            let plus = local_model(&c, 1).expect("plus-one model");
            assert_eq!(plus.complex.rank(), 3 * rank, "{name}: +1 count");
            let minus = local_model(&c, -1).expect("minus-one model");
            assert_eq!(minus.complex.rank(), 5 * rank, "{name}: -1 count");
        }
    }

    #[test]
    fn unknot_local_model_reduces_to_one_generator() {
        let c = input("unknot");
        let model = local_model(&c, 1).expect("model");
        assert_eq!(model.complex.rank(), 3);
        let red = reduce(&model.complex, &[]);
        assert_eq!(red.reduced.rank(), 1);
    }

    #[test]
    fn identity_is_a_local_map_on_every_catalog_entry() {
        for name in catalog::names() {
            let c = input(name);
            let ic = &c.model;
            let id = EquivariantMap::identity(&ic.complex);
            let report = verify_local_map(ic, ic, &id, None);
            assert!(report.is_valid(), "{name}: {:?}", report.violations);
            assert!(report.certificate.is_some());
        }
    }

    #[test]
    fn zero_map_fails_the_localized_isomorphism_clause() {
        let c = input("figure_eight");
        let ic = &c.model;
        let zero = EquivariantMap::zero(
            Arc::clone(&ic.complex),
            Arc::clone(&ic.complex),
            (Rational64::zero(), Rational64::zero()),
            Variance::Equivariant,
        );
        let report = verify_local_map(ic, ic, &zero, None);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("U-inverted homology")));
    }

    #[test]
    fn figure_eight_plus_one_is_locally_trivial() {
        let c = input("figure_eight");
        let report = local_triviality_check(&c, 1).expect("check runs");
        assert_eq!(report.verdict, TrivialVerdict::LocallyTrivial, "{}", report.reason);
        let witness = report.witness.expect("witness");
        let recheck = verify_local_equivalence(&report.reduced, &trivial_model(), &witness);
        assert!(recheck.is_valid(), "{:?}", recheck.violations);
    }

    #[test]
    fn unknot_is_locally_trivial_for_both_unit_coefficients() {
        let c = input("unknot");
        for n in [1, -1] {
            let report = local_triviality_check(&c, n).expect("check runs");
            assert_eq!(report.verdict, TrivialVerdict::LocallyTrivial, "n = {n}: {}", report.reason);
        }
    }

    #[test]
    fn local_model_compares_locally_with_a_wider_truncation() {
        for name in catalog::names() {
            let c = input(name);
            for n in [1i64, -1] {
                let small = local_model(&c, n).expect("local model");
                let wide_b = minimal_b(c.genus, n) + 1;
                let big = surgery(&c, n, Some(wide_b), &FlipSpec::Default).expect("wide cone");
                let map = truncation_comparison(&small, &big).expect("comparison map");
                let (src, dst) = if n > 0 {
                    (big.iota_complex(), small.iota_complex())
                } else {
                    (small.iota_complex(), big.iota_complex())
                };
                let report = verify_local_map(&src, &dst, &map, None);
                assert!(report.is_valid(), "{name}, n = {n}: {:?}", report.violations);
            }
        }
    }
}
