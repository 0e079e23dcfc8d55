//! Finitely generated free bigraded chain complexes over `F2[U, V]`, chain
//! maps carrying a variance flag, homotopy solving by exact linear algebra,
//! minimal-model reduction by cancellation, and tower diagnostics.
//!
//! Conventions.  A differential entry `U^i V^j` from generator `x` to
//! generator `y` contributes `U^i V^j · y` to `∂x`; `U` carries bidegree
//! `(-2, 0)` and `V` carries `(0, -2)`, and every differential entry is
//! homogeneous of bidegree `(-1, -1)`.  A *skew* map intertwines the ring
//! automorphism exchanging `U` and `V`, and its homogeneity is measured
//! against the swapped source grading.
//!
//! Determinism: generators are ordered lists, matrices are ordered maps, the
//! cancellation pivot is always the lowest `(source, target)` constant entry,
//! and the homotopy solver sets all free variables to zero.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::gf2::{BitRow, LinearSystem};
use crate::ring::{BiPoly, Mono};

/// An exact rational bigrading `(gr_w, gr_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Grading {
    /// The `w`-grading.
    pub gr_w: Rational64,
    /// The `z`-grading.
    pub gr_z: Rational64,
}

impl Grading {
    /// Builds a grading from integer values.
    #[must_use]
    pub fn new_int(gr_w: i64, gr_z: i64) -> Self {
        Grading { gr_w: Rational64::from_integer(gr_w), gr_z: Rational64::from_integer(gr_z) }
    }

    /// Builds a grading from rationals.
    #[must_use]
    pub fn new(gr_w: Rational64, gr_z: Rational64) -> Self {
        Grading { gr_w, gr_z }
    }

    /// Converts Maslov/Alexander data via `gr_w = M`, `gr_z = M - 2A`.
    #[must_use]
    pub fn from_maslov_alexander(m: Rational64, a: Rational64) -> Self {
        Grading { gr_w: m, gr_z: m - Rational64::from_integer(2) * a }
    }

    /// The Alexander grading `(gr_w - gr_z) / 2`.
    #[must_use]
    pub fn alexander(&self) -> Rational64 {
        (self.gr_w - self.gr_z) / Rational64::from_integer(2)
    }

    /// Exchanges the two grading components.
    #[must_use]
    pub fn swap(&self) -> Grading {
        Grading { gr_w: self.gr_z, gr_z: self.gr_w }
    }

    /// Componentwise shift.
    #[must_use]
    pub fn shift(&self, by: (Rational64, Rational64)) -> Grading {
        Grading { gr_w: self.gr_w + by.0, gr_z: self.gr_z + by.1 }
    }

    /// Grading of `U^i V^j · x` when `x` has grading `self`.
    #[must_use]
    pub fn monomial_shift(&self, m: &Mono) -> Grading {
        Grading {
            gr_w: self.gr_w - Rational64::from_integer(2 * m.u_exp),
            gr_z: self.gr_z - Rational64::from_integer(2 * m.v_exp),
        }
    }
}

/// A labelled generator with its bigrading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    /// Unique human-readable label.
    pub label: String,
    /// Bigrading of the generator.
    pub grading: Grading,
}

/// Sparse matrix over `BiPoly`, keyed by `(target, source)`.
pub type Mat = BTreeMap<(usize, usize), BiPoly>;

/// Inserts `p` into `m` at `key`, adding mod 2 and dropping zeros.
pub fn mat_insert_add(m: &mut Mat, key: (usize, usize), p: &BiPoly) {
    if p.is_zero() {
        return;
    }
    let entry = m.entry(key).or_insert_with(BiPoly::zero);
    entry.add_assign(p);
    if entry.is_zero() {
        m.remove(&key);
    }
}

/// Matrix sum mod 2.
#[must_use]
pub fn mat_add(a: &Mat, b: &Mat) -> Mat {
    let mut out = a.clone();
    for (key, p) in b {
        mat_insert_add(&mut out, *key, p);
    }
    out
}

/// Composite `g ∘ f`; when `swap_f` is set (i.e. `g` is skew), the entries of
/// `f` act through the variable swap before multiplication.
#[must_use]
pub fn mat_compose(g: &Mat, f: &Mat, swap_f: bool) -> Mat {
    let mut f_by_target: BTreeMap<usize, Vec<(usize, &BiPoly)>> = BTreeMap::new();
    for ((t, s), p) in f {
        f_by_target.entry(*t).or_default().push((*s, p));
    }
    let mut out = Mat::new();
    for ((k, j), gp) in g {
        let Some(cols) = f_by_target.get(j) else { continue };
        for (i, fp) in cols {
            let fp = if swap_f { fp.swap_vars() } else { (*fp).clone() };
            let prod = gp.mul(&fp).expect("entry product");
            mat_insert_add(&mut out, (*k, *i), &prod);
        }
    }
    out
}

/// A finitely generated free bigraded chain complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedComplex {
    /// Ordered generators.
    pub generators: Vec<Generator>,
    /// Differential, keyed `(target, source)`.
    pub diff: Mat,
}

/// Structured list of axiom violations; empty means valid.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Human-readable violations.
    pub violations: Vec<String>,
}

impl ValidationReport {
    /// Whether no violations were recorded.
    #[must_use]
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl GradedComplex {
    /// Builds a complex, dropping zero entries from the differential.
    #[must_use]
    pub fn new(generators: Vec<Generator>, diff: Mat) -> Self {
        let diff = diff.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        GradedComplex { generators, diff }
    }

    /// The zero-generator complex.
    #[must_use]
    pub fn empty() -> Self {
        GradedComplex { generators: Vec::new(), diff: Mat::new() }
    }

    /// Number of generators.
    #[must_use]
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Index of the generator with the given label.
    #[must_use]
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.label == label)
    }

    /// Checks `∂² = 0`, entry homogeneity of bidegree `(-1, -1)`, polynomial
    /// entries, index bounds, and label uniqueness.
    #[must_use]
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.rank();
        let mut seen = std::collections::BTreeSet::new();
        for g in &self.generators {
            if !seen.insert(&g.label) {
                report.violations.push(format!("duplicate generator label {:?}", g.label));
            }
        }
        for ((t, s), p) in &self.diff {
            if *t >= n || *s >= n {
                report.violations.push(format!("differential entry ({t}, {s}) out of bounds"));
                continue;
            }
            if !p.is_polynomial() {
                report.violations.push(format!(
                    "non-polynomial differential entry {} from {} to {}",
                    p, self.generators[*s].label, self.generators[*t].label
                ));
            }
            let want = self.generators[*s]
                .grading
                .shift((Rational64::from_integer(-1), Rational64::from_integer(-1)));
            for m in &p.terms {
                let got = self.generators[*t].grading.monomial_shift(m);
                if got != want {
                    report.violations.push(format!(
                        "entry {} from {} to {} is not (-1,-1)-homogeneous",
                        m, self.generators[*s].label, self.generators[*t].label
                    ));
                }
            }
        }
        let d2 = mat_compose(&self.diff, &self.diff, false);
        for ((t, s), p) in &d2 {
            if !p.is_zero() {
                report.violations.push(format!(
                    "∂² has entry {} from index {s} to index {t}",
                    p
                ));
            }
        }
        report
    }
}

/// Variance of an equivariant map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variance {
    /// Honest `F2[U, V]`-linearity.
    Equivariant,
    /// Intertwines the `U <-> V` swap: `f(U x) = V f(x)`.
    Skew,
}

impl Variance {
    /// Variance of a composite (exclusive or).
    #[must_use]
    pub fn compose(self, other: Variance) -> Variance {
        if self == other {
            Variance::Equivariant
        } else {
            Variance::Skew
        }
    }
}

/// A matrix map between graded complexes with a bidegree and variance flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivariantMap {
    /// Domain complex.
    pub source: Arc<GradedComplex>,
    /// Codomain complex.
    pub target: Arc<GradedComplex>,
    /// Entries keyed `(target, source)`.
    pub entries: Mat,
    /// Bidegree, measured against the (possibly swapped) source grading.
    pub bidegree: (Rational64, Rational64),
    /// Equivariant or skew.
    pub variance: Variance,
}

impl EquivariantMap {
    /// The zero map with the given shape.
    #[must_use]
    pub fn zero(
        source: Arc<GradedComplex>,
        target: Arc<GradedComplex>,
        bidegree: (Rational64, Rational64),
        variance: Variance,
    ) -> Self {
        EquivariantMap { source, target, entries: Mat::new(), bidegree, variance }
    }

    /// The identity endomorphism.
    #[must_use]
    pub fn identity(complex: &Arc<GradedComplex>) -> Self {
        let entries = (0..complex.rank()).map(|i| ((i, i), BiPoly::one())).collect();
        EquivariantMap {
            source: Arc::clone(complex),
            target: Arc::clone(complex),
            entries,
            bidegree: (Rational64::zero(), Rational64::zero()),
            variance: Variance::Equivariant,
        }
    }

    /// The differential of a complex, viewed as an endomorphism.
    #[must_use]
    pub fn differential(complex: &Arc<GradedComplex>) -> Self {
        EquivariantMap {
            source: Arc::clone(complex),
            target: Arc::clone(complex),
            entries: complex.diff.clone(),
            bidegree: (-Rational64::one(), -Rational64::one()),
            variance: Variance::Equivariant,
        }
    }

    /// Whether every entry is zero.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of two maps of identical shape, bidegree, and variance.
    #[must_use]
    pub fn add(&self, other: &EquivariantMap) -> EquivariantMap {
        assert_eq!(self.bidegree, other.bidegree, "bidegree mismatch in map sum");
        assert_eq!(self.variance, other.variance, "variance mismatch in map sum");
        assert_eq!(self.source, other.source, "source mismatch in map sum");
        assert_eq!(self.target, other.target, "target mismatch in map sum");
        EquivariantMap {
            source: Arc::clone(&self.source),
            target: Arc::clone(&self.target),
            entries: mat_add(&self.entries, &other.entries),
            bidegree: self.bidegree,
            variance: self.variance,
        }
    }

    /// Composite `self ∘ other`.
    #[must_use]
    pub fn compose(&self, other: &EquivariantMap) -> EquivariantMap {
        assert_eq!(self.source, other.target, "composition shape mismatch");
        let swap_inner = self.variance == Variance::Skew;
        let entries = mat_compose(&self.entries, &other.entries, swap_inner);
        let inner_deg = if swap_inner {
            (other.bidegree.1, other.bidegree.0)
        } else {
            other.bidegree
        };
        EquivariantMap {
            source: Arc::clone(&other.source),
            target: Arc::clone(&self.target),
            entries,
            bidegree: (self.bidegree.0 + inner_deg.0, self.bidegree.1 + inner_deg.1),
            variance: self.variance.compose(other.variance),
        }
    }

    /// The graded base point of the source: swapped grading for skew maps.
    fn base_grading(&self, source_index: usize) -> Grading {
        let g = self.source.generators[source_index].grading;
        match self.variance {
            Variance::Equivariant => g,
            Variance::Skew => g.swap(),
        }
    }

    /// Checks entry homogeneity against the declared bidegree; optionally
    /// requires polynomial entries.
    #[must_use]
    pub fn validate(&self, require_polynomial: bool) -> ValidationReport {
        let mut report = ValidationReport::default();
        for ((t, s), p) in &self.entries {
            if *t >= self.target.rank() || *s >= self.source.rank() {
                report.violations.push(format!("map entry ({t}, {s}) out of bounds"));
                continue;
            }
            if require_polynomial && !p.is_polynomial() {
                report.violations.push(format!(
                    "non-polynomial map entry {} from {} to {}",
                    p, self.source.generators[*s].label, self.target.generators[*t].label
                ));
            }
            let want = self.base_grading(*s).shift(self.bidegree);
            for m in &p.terms {
                let got = self.target.generators[*t].grading.monomial_shift(m);
                if got != want {
                    report.violations.push(format!(
                        "map entry {} from {} to {} is not homogeneous of the declared bidegree",
                        m, self.source.generators[*s].label, self.target.generators[*t].label
                    ));
                }
            }
        }
        report
    }

    /// The chain-map residual `∂_target ∘ f + f ∘ ∂_source`.
    #[must_use]
    pub fn chain_residual(&self) -> Mat {
        let left = mat_compose(&self.target.diff, &self.entries, false);
        let right =
            mat_compose(&self.entries, &self.source.diff, self.variance == Variance::Skew);
        mat_add(&left, &right)
    }

    /// Whether the map commutes with the differentials.
    #[must_use]
    pub fn is_chain_map(&self) -> bool {
        self.chain_residual().is_empty()
    }
}

/// The basepoint map `Φ`: entrywise `d/dU` of the differential, bidegree
/// `(1, -1)`, equivariant.
#[must_use]
pub fn basepoint_phi(complex: &Arc<GradedComplex>) -> EquivariantMap {
    let entries = complex
        .diff
        .iter()
        .map(|(key, p)| (*key, p.d_du()))
        .filter(|(_, p)| !p.is_zero())
        .collect();
    EquivariantMap {
        source: Arc::clone(complex),
        target: Arc::clone(complex),
        entries,
        bidegree: (Rational64::one(), -Rational64::one()),
        variance: Variance::Equivariant,
    }
}

/// The basepoint map `Ψ`: entrywise `d/dV` of the differential, bidegree
/// `(-1, 1)`, equivariant.
#[must_use]
pub fn basepoint_psi(complex: &Arc<GradedComplex>) -> EquivariantMap {
    let entries = complex
        .diff
        .iter()
        .map(|(key, p)| (*key, p.d_dv()))
        .filter(|(_, p)| !p.is_zero())
        .collect();
    EquivariantMap {
        source: Arc::clone(complex),
        target: Arc::clone(complex),
        entries,
        bidegree: (-Rational64::one(), Rational64::one()),
        variance: Variance::Equivariant,
    }
}

/// Solves `∂H + H∂ = F` for `H` of bidegree `F.bidegree + (1, 1)` and the
/// same variance, exploiting that each candidate entry of `H` is a single
/// monomial forced by homogeneity.  Free variables are set to zero, so the
/// answer is canonical (in particular `F = 0` yields `H = 0`).
///
/// Returns `None` when the linear system is inconsistent.
#[must_use]
pub fn solve_homotopy(f: &EquivariantMap) -> Option<EquivariantMap> {
    assert_eq!(f.bidegree.0, f.bidegree.1, "solve_homotopy expects diagonal bidegree");
    let e0 = f.bidegree.0 + Rational64::one();
    let e = (e0, e0);
    let two = Rational64::from_integer(2);

    // Enumerate unknowns: one mod-2 coefficient per (target, source) pair
    // whose forced monomial has nonnegative integer exponents.
    let mut unknowns: Vec<((usize, usize), Mono)> = Vec::new();
    for t in 0..f.target.rank() {
        for s in 0..f.source.rank() {
            let base = match f.variance {
                Variance::Equivariant => f.source.generators[s].grading,
                Variance::Skew => f.source.generators[s].grading.swap(),
            };
            let i = (f.target.generators[t].grading.gr_w - base.gr_w - e.0) / two;
            let j = (f.target.generators[t].grading.gr_z - base.gr_z - e.1) / two;
            if i.is_integer() && j.is_integer() {
                let (iu, jv) = (i.to_integer(), j.to_integer());
                if iu >= 0 && jv >= 0 {
                    unknowns.push(((t, s), Mono::new(iu, jv).expect("nonnegative")));
                }
            }
        }
    }

    // Build equations keyed by (target, source, monomial).
    type Key = (usize, usize, Mono);
    let mut coeffs: BTreeMap<Key, Vec<usize>> = BTreeMap::new();
    let swap_inner = f.variance == Variance::Skew;
    for (u_idx, ((t, s), m)) in unknowns.iter().enumerate() {
        // ∂_target ∘ H contributions.
        for ((z, y), p) in &f.target.diff {
            if y == t {
                for mu in &p.terms {
                    let prod = mu.mul(m).expect("monomial product");
                    coeffs.entry((*z, *s, prod)).or_default().push(u_idx);
                }
            }
        }
        // H ∘ ∂_source contributions (source differential entries are swapped
        // when H is skew).
        for ((x, w), q) in &f.source.diff {
            if x == s {
                for mu in &q.terms {
                    let mu = if swap_inner { mu.swap_vars() } else { *mu };
                    let prod = m.mul(&mu).expect("monomial product");
                    coeffs.entry((*t, *w, prod)).or_default().push(u_idx);
                }
            }
        }
    }
    let mut rhs_keys: BTreeMap<Key, bool> = BTreeMap::new();
    for ((t, s), p) in &f.entries {
        for mu in &p.terms {
            *rhs_keys.entry((*t, *s, *mu)).or_insert(false) ^= true;
        }
    }

    let mut all_keys: std::collections::BTreeSet<Key> = coeffs.keys().copied().collect();
    all_keys.extend(rhs_keys.keys().copied());

    let mut system = LinearSystem::new(unknowns.len());
    for key in &all_keys {
        let mut r = BitRow::zeros(unknowns.len());
        if let Some(list) = coeffs.get(key) {
            for &u in list {
                r.flip(u);
            }
        }
        let rhs = rhs_keys.get(key).copied().unwrap_or(false);
        system.push(r, rhs);
    }
    let sol = system.solve()?;

    let mut entries = Mat::new();
    for (u_idx, ((t, s), m)) in unknowns.iter().enumerate() {
        if sol.particular.get(u_idx) {
            mat_insert_add(&mut entries, (*t, *s), &BiPoly::from(*m));
        }
    }
    Some(EquivariantMap {
        source: Arc::clone(&f.source),
        target: Arc::clone(&f.target),
        entries,
        bidegree: e,
        variance: f.variance,
    })
}

/// Result of a minimal-model reduction: the reduced complex together with the
/// strong deformation retraction data and the transported maps.
#[derive(Debug, Clone)]
pub struct ReduceResult {
    /// The minimal model: no constant differential entries remain.
    pub reduced: Arc<GradedComplex>,
    /// Projection onto the reduced model.
    pub projection: EquivariantMap,
    /// Inclusion of the reduced model.
    pub inclusion: EquivariantMap,
    /// Homotopy with `inclusion ∘ projection = id + ∂H + H∂`.
    pub homotopy: EquivariantMap,
    /// Each input map `f` transported as `projection ∘ f ∘ inclusion`.
    pub transported: Vec<EquivariantMap>,
}

/// Repeatedly cancels differential entries equal to the constant monomial `1`
/// until none remain.  The pivot is the lowest `(source, target)` constant
/// entry, recomputed after each cancellation, so the output basis is
/// deterministic.
#[must_use]
pub fn reduce(complex: &Arc<GradedComplex>, transported: &[EquivariantMap]) -> ReduceResult {
    let original = Arc::clone(complex);
    let mut current = Arc::clone(complex);
    let mut projection = EquivariantMap::identity(&original);
    let mut inclusion = EquivariantMap::identity(&original);
    // Retarget the identity SDR onto `current` as it shrinks.
    projection.target = Arc::clone(&current);
    inclusion.source = Arc::clone(&current);
    let mut homotopy = EquivariantMap::zero(
        Arc::clone(&original),
        Arc::clone(&original),
        (Rational64::one(), Rational64::one()),
        Variance::Equivariant,
    );

    loop {
        // Deterministic pivot: lowest (source, target) entry equal to 1.
        let pivot = current
            .diff
            .iter()
            .map(|((t, s), p)| ((*s, *t), p))
            .filter(|(_, p)| p.is_one())
            .map(|(key, _)| key)
            .min();
        let Some((src, tgt)) = pivot else { break };

        let n = current.rank();
        let keep: Vec<usize> = (0..n).filter(|&i| i != src && i != tgt).collect();
        let new_index: BTreeMap<usize, usize> =
            keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let entry = |t: usize, s: usize| -> BiPoly {
            current.diff.get(&(t, s)).cloned().unwrap_or_else(BiPoly::zero)
        };

        // New differential: ∂'_{ba} = ∂_{ba} + ∂_{ya} ∂_{bx}.
        let mut new_diff = Mat::new();
        for &a in &keep {
            for &b in &keep {
                let mut p = entry(b, a);
                let correction =
                    entry(tgt, a).mul(&entry(b, src)).expect("cancellation product");
                p.add_assign(&correction);
                if !p.is_zero() {
                    new_diff.insert((new_index[&b], new_index[&a]), p);
                }
            }
        }
        let next = Arc::new(GradedComplex::new(
            keep.iter().map(|&i| current.generators[i].clone()).collect(),
            new_diff,
        ));

        // Step SDR maps for the single cancellation.
        let mut pi_entries = Mat::new();
        for &a in &keep {
            pi_entries.insert((new_index[&a], a), BiPoly::one());
        }
        for &b in &keep {
            let p = entry(b, src);
            mat_insert_add(&mut pi_entries, (new_index[&b], tgt), &p);
        }
        let mut inc_entries = Mat::new();
        for &a in &keep {
            inc_entries.insert((a, new_index[&a]), BiPoly::one());
            let p = entry(tgt, a);
            mat_insert_add(&mut inc_entries, (src, new_index[&a]), &p);
        }
        let mut h_entries = Mat::new();
        h_entries.insert((src, tgt), BiPoly::one());

        let zero_deg = (Rational64::zero(), Rational64::zero());
        let pi_step = EquivariantMap {
            source: Arc::clone(&current),
            target: Arc::clone(&next),
            entries: pi_entries,
            bidegree: zero_deg,
            variance: Variance::Equivariant,
        };
        let inc_step = EquivariantMap {
            source: Arc::clone(&next),
            target: Arc::clone(&current),
            entries: inc_entries,
            bidegree: zero_deg,
            variance: Variance::Equivariant,
        };
        let h_step = EquivariantMap {
            source: Arc::clone(&current),
            target: Arc::clone(&current),
            entries: h_entries,
            bidegree: (Rational64::one(), Rational64::one()),
            variance: Variance::Equivariant,
        };

        // Compose SDRs: H <- H + I h_step Π; Π <- π_step Π; I <- I i_step.
        let correction = inclusion.compose(&h_step).compose(&projection);
        homotopy = homotopy.add(&correction);
        projection = pi_step.compose(&projection);
        inclusion = inclusion.compose(&inc_step);
        current = next;
    }

    let transported = transported
        .iter()
        .map(|f| {
            assert_eq!(f.source, original, "transported map source mismatch");
            assert_eq!(f.target, original, "transported map target mismatch");
            projection.compose(f).compose(&inclusion)
        })
        .collect();

    ReduceResult { reduced: current, projection, inclusion, homotopy, transported }
}

/// Univariate polynomials over the two-element field, packed into bits.
mod poly1 {
    /// Coefficient bitmask: bit `64w + i` of word `w` is the `U^(64w+i)`
    /// coefficient.
    pub type P1 = Vec<u64>;

    pub fn norm(p: &mut P1) {
        while p.last() == Some(&0) {
            p.pop();
        }
    }

    #[must_use]
    pub fn deg(p: &P1) -> Option<usize> {
        let w = p.iter().rposition(|&x| x != 0)?;
        Some(w * 64 + 63 - p[w].leading_zeros() as usize)
    }

    #[must_use]
    pub fn is_zero(p: &P1) -> bool {
        deg(p).is_none()
    }

    #[must_use]
    pub fn monomial(d: usize) -> P1 {
        let mut p = vec![0u64; d / 64 + 1];
        p[d / 64] |= 1 << (d % 64);
        p
    }

    pub fn add_assign(a: &mut P1, b: &P1) {
        if a.len() < b.len() {
            a.resize(b.len(), 0);
        }
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= y;
        }
        norm(a);
    }

    #[must_use]
    pub fn shifted(p: &P1, by: usize) -> P1 {
        let Some(d) = deg(p) else { return Vec::new() };
        let mut out = vec![0u64; (d + by) / 64 + 1];
        for i in 0..=d {
            if p[i / 64] >> (i % 64) & 1 == 1 {
                out[(i + by) / 64] ^= 1 << ((i + by) % 64);
            }
        }
        out
    }

    #[must_use]
    pub fn mul(a: &P1, b: &P1) -> P1 {
        let Some(da) = deg(a) else { return Vec::new() };
        let mut out = Vec::new();
        for i in 0..=da {
            if a[i / 64] >> (i % 64) & 1 == 1 {
                add_assign(&mut out, &shifted(b, i));
            }
        }
        out
    }

    /// Returns `(quotient, remainder)` with `deg(remainder) < deg(divisor)`.
    #[must_use]
    pub fn divmod(num: &P1, den: &P1) -> (P1, P1) {
        let dd = deg(den).expect("division by zero polynomial");
        let mut rem = num.clone();
        let mut quot: P1 = Vec::new();
        while let Some(dr) = deg(&rem) {
            if dr < dd {
                break;
            }
            let shift = dr - dd;
            add_assign(&mut quot, &monomial(shift));
            add_assign(&mut rem, &shifted(den, shift));
        }
        (quot, rem)
    }

    #[must_use]
    pub fn render(p: &P1) -> String {
        let Some(d) = deg(p) else { return "0".to_owned() };
        let mut parts = Vec::new();
        for i in (0..=d).rev() {
            if p[i / 64] >> (i % 64) & 1 == 1 {
                parts.push(match i {
                    0 => "1".to_owned(),
                    1 => "U".to_owned(),
                    _ => format!("U^{i}"),
                });
            }
        }
        parts.join(" + ")
    }
}

/// Decomposition of the `V = 1` homology over `F2[U]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerStructure {
    /// Free rank `b` of the localized homology.
    pub free_rank: usize,
    /// Nonunit torsion annihilators, rendered as polynomials in `U`.
    pub torsion: Vec<String>,
    /// Whether the torsion part is empty.
    pub l_space_type: bool,
    /// Whether the free rank is exactly one.
    pub single_tower: bool,
}

/// Sets `V = 1` and decomposes the homology of the resulting complex over
/// the one-variable ring by exact diagonalization of the differential.
#[must_use]
pub fn tower_structure(complex: &GradedComplex) -> TowerStructure {
    use poly1::P1;
    let n = complex.rank();
    // Specialize V = 1.
    let mut matrix: Vec<Vec<P1>> = vec![vec![Vec::new(); n]; n];
    for ((t, s), p) in &complex.diff {
        for m in &p.terms {
            assert!(m.is_polynomial(), "tower_structure requires polynomial entries");
            let mono = poly1::monomial(usize::try_from(m.u_exp).expect("nonnegative"));
            poly1::add_assign(&mut matrix[*t][*s], &mono);
        }
    }

    // Diagonalize over F2[U] by repeated minimal-degree pivoting.
    let mut diagonal: Vec<P1> = Vec::new();
    for k in 0..n {
        loop {
            // Find the minimal-degree nonzero entry in the active block.
            let mut best: Option<(usize, usize, usize)> = None;
            for r in k..n {
                for c in k..n {
                    if let Some(d) = poly1::deg(&matrix[r][c]) {
                        if best.map_or(true, |(bd, _, _)| d < bd) {
                            best = Some((d, r, c));
                        }
                    }
                }
            }
            let Some((_, r, c)) = best else {
                // Remaining block is zero.
                let mut torsion = Vec::new();
                for p in &diagonal {
                    if poly1::deg(p) != Some(0) {
                        torsion.push(poly1::render(p));
                    }
                }
                let free_rank = n - 2 * diagonal.len();
                return TowerStructure {
                    free_rank,
                    l_space_type: torsion.is_empty(),
                    single_tower: free_rank == 1,
                    torsion,
                };
            };
            matrix.swap(k, r);
            for row in &mut matrix {
                row.swap(k, c);
            }
            let pivot = matrix[k][k].clone();
            // Clear the pivot column.
            for r in k + 1..n {
                if !poly1::is_zero(&matrix[r][k]) {
                    let (q, _) = poly1::divmod(&matrix[r][k], &pivot);
                    for c2 in k..n {
                        let delta = poly1::mul(&q, &matrix[k][c2]);
                        poly1::add_assign(&mut matrix[r][c2], &delta);
                    }
                }
            }
            // Clear the pivot row.
            for c2 in k + 1..n {
                if !poly1::is_zero(&matrix[k][c2]) {
                    let (q, _) = poly1::divmod(&matrix[k][c2], &pivot);
                    for r2 in k..n {
                        let delta = poly1::mul(&q, &matrix[r2][k]);
                        poly1::add_assign(&mut matrix[r2][c2], &delta);
                    }
                }
            }
            let row_clear = (k + 1..n).all(|c2| poly1::is_zero(&matrix[k][c2]));
            let col_clear = (k + 1..n).all(|r2| poly1::is_zero(&matrix[r2][k]));
            if row_clear && col_clear {
                diagonal.push(matrix[k][k].clone());
                break;
            }
        }
    }
    let mut torsion = Vec::new();
    for p in &diagonal {
        if poly1::deg(p) != Some(0) {
            torsion.push(poly1::render(p));
        }
    }
    let free_rank = n - 2 * diagonal.len();
    TowerStructure {
        free_rank,
        l_space_type: torsion.is_empty(),
        single_tower: free_rank == 1,
        torsion,
    }
}

/// A graded complex paired with an involution candidate and its certificate.
#[derive(Debug, Clone)]
pub struct IotaComplex {
    /// The underlying complex.
    pub complex: Arc<GradedComplex>,
    /// Skew, grading-swapping involution candidate of bidegree `(0, 0)`.
    pub iota: EquivariantMap,
    /// Homotopy with `ι² + id + ΦΨ = ∂H + H∂`, when certified.
    pub certificate: Option<EquivariantMap>,
}

/// Outcome of [`verify_iota_complex`].
#[derive(Debug, Clone)]
pub struct IotaReport {
    /// Axiom violations; empty means the input is a certified ι-complex.
    pub violations: Vec<String>,
    /// Certificate found by the homotopy solver, when all axioms pass.
    pub certificate: Option<EquivariantMap>,
}

impl IotaReport {
    /// Whether all axioms passed.
    #[must_use]
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the involution axioms: `ι` is a skew chain map of bidegree `(0, 0)`
/// with respect to the swapped grading, and `ι² + id + ΦΨ` is null-homotopic
/// (the certificate is produced by the exact homotopy solver).
#[must_use]
pub fn verify_iota_complex(ic: &IotaComplex) -> IotaReport {
    let mut violations = Vec::new();
    let complex_report = ic.complex.validate();
    violations.extend(complex_report.violations);

    if ic.iota.variance != Variance::Skew {
        violations.push("iota is not flagged skew".to_owned());
    }
    if ic.iota.bidegree != (Rational64::zero(), Rational64::zero()) {
        violations.push("iota bidegree is not (0, 0)".to_owned());
    }
    let map_report = ic.iota.validate(true);
    violations.extend(
        map_report.violations.into_iter().map(|v| format!("iota grading swap: {v}")),
    );
    if !ic.iota.is_chain_map() {
        violations.push("iota is not a chain map".to_owned());
    }

    let mut certificate = None;
    if violations.is_empty() {
        let phi = basepoint_phi(&ic.complex);
        let psi = basepoint_psi(&ic.complex);
        let defect = ic
            .iota
            .compose(&ic.iota)
            .add(&EquivariantMap::identity(&ic.complex))
            .add(&phi.compose(&psi));
        match solve_homotopy(&defect) {
            Some(h) => certificate = Some(h),
            None => violations
                .push("no homotopy certificate for iota² + id + ΦΨ ≃ 0".to_owned()),
        }
    }
    IotaReport { violations, certificate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn gen(label: &str, w: i64, z: i64) -> Generator {
        Generator { label: label.to_owned(), grading: Grading::new_int(w, z) }
    }

    fn mono(u: i64, v: i64) -> BiPoly {
        BiPoly::from(Mono::new(u, v).unwrap())
    }

    /// Three-step staircase: ∂b = U a + V c (a model trefoil complex).
    fn staircase() -> Arc<GradedComplex> {
        let generators = vec![gen("a", 0, -2), gen("b", -1, -1), gen("c", -2, 0)];
        let mut diff = Mat::new();
        diff.insert((0, 1), mono(1, 0));
        diff.insert((2, 1), mono(0, 1));
        Arc::new(GradedComplex::new(generators, diff))
    }

    #[test]
    fn validates_good_and_bad_complexes() {
        assert!(staircase().validate().is_valid());
        assert!(GradedComplex::empty().validate().is_valid());

        // Break homogeneity: replace the U entry with a V entry.
        let generators = vec![gen("a", 0, -2), gen("b", -1, -1), gen("c", -2, 0)];
        let mut diff = Mat::new();
        diff.insert((0, 1), mono(0, 1));
        diff.insert((2, 1), mono(0, 1));
        let bad = GradedComplex::new(generators, diff);
        assert!(!bad.validate().is_valid());
    }

    #[test]
    fn basepoint_maps_on_staircase() {
        let c = staircase();
        let phi = basepoint_phi(&c);
        let psi = basepoint_psi(&c);
        assert_eq!(phi.entries.get(&(0, 1)), Some(&BiPoly::one()));
        assert_eq!(psi.entries.get(&(2, 1)), Some(&BiPoly::one()));
        assert!(phi.is_chain_map());
        assert!(psi.is_chain_map());
        assert!(phi.validate(true).is_valid());
    }

    #[test]
    fn solve_homotopy_recovers_constructed_boundaries() {
        let c = staircase();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            // Random G of bidegree (1, 1): forced monomials per entry.
            let mut g = EquivariantMap::zero(
                Arc::clone(&c),
                Arc::clone(&c),
                (Rational64::one(), Rational64::one()),
                Variance::Equivariant,
            );
            for t in 0..3 {
                for s in 0..3 {
                    if rng.gen_bool(0.5) {
                        let src = c.generators[s].grading;
                        let tgt = c.generators[t].grading;
                        let i = (tgt.gr_w - src.gr_w - Rational64::one())
                            / Rational64::from_integer(2);
                        let j = (tgt.gr_z - src.gr_z - Rational64::one())
                            / Rational64::from_integer(2);
                        if i.is_integer() && j.is_integer() && i >= Rational64::zero() && j >= Rational64::zero() {
                            g.entries.insert(
                                (t, s),
                                mono(i.to_integer(), j.to_integer()),
                            );
                        }
                    }
                }
            }
            let d = EquivariantMap::differential(&c);
            let f = d.compose(&g).add(&g.compose(&d));
            let h = solve_homotopy(&f).expect("constructed boundary must be solvable");
            let check = d.compose(&h).add(&h.compose(&d));
            assert_eq!(check.entries, f.entries);
        }
    }

    #[test]
    fn solve_homotopy_zero_gives_zero() {
        let c = staircase();
        let f = EquivariantMap::zero(
            Arc::clone(&c),
            Arc::clone(&c),
            (Rational64::zero(), Rational64::zero()),
            Variance::Equivariant,
        );
        let h = solve_homotopy(&f).unwrap();
        assert!(h.is_zero());
    }

    #[test]
    fn reduce_cancels_acyclic_pair() {
        let generators = vec![gen("x", 0, 0), gen("y", -1, -1)];
        let mut diff = Mat::new();
        diff.insert((1, 0), BiPoly::one());
        let c = Arc::new(GradedComplex::new(generators, diff));
        let result = reduce(&c, &[]);
        assert_eq!(result.reduced.rank(), 0);
    }

    #[test]
    fn reduce_sdr_identities_hold() {
        // Complex with one cancellable pair and a surviving generator.
        let generators =
            vec![gen("x", 0, 0), gen("y", -1, -1), gen("z", 0, 0), gen("w", 1, 1)];
        let mut diff = Mat::new();
        diff.insert((1, 0), BiPoly::one());
        diff.insert((1, 2), mono(0, 0));
        diff.insert((3, 2), mono(1, 1));
        let c = Arc::new(GradedComplex::new(generators, diff));
        assert!(c.validate().is_valid());
        let result = reduce(&c, &[EquivariantMap::identity(&c)]);
        assert!(result.reduced.validate().is_valid());

        let pi = &result.projection;
        let inc = &result.inclusion;
        let h = &result.homotopy;
        assert!(pi.is_chain_map());
        assert!(inc.is_chain_map());

        // Π I = id.
        let pi_i = pi.compose(inc);
        assert_eq!(pi_i.entries, EquivariantMap::identity(&result.reduced).entries);

        // I Π = id + ∂H + H∂.
        let d = EquivariantMap::differential(&c);
        let rhs = EquivariantMap::identity(&c)
            .add(&d.compose(h))
            .add(&h.compose(&d));
        assert_eq!(inc.compose(pi).entries, rhs.entries);

        // Side conditions.
        assert!(h.compose(h).is_zero());
        assert!(h.compose(inc).is_zero());
        assert!(pi.compose(h).is_zero());
    }

    #[test]
    fn reduce_rank_is_order_independent_per_bigrading() {
        // Random small homogeneous complexes: compare the canonical pivot
        // order against a reversed-generator ordering.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let n = rng.gen_range(2..7);
            let generators: Vec<Generator> = (0..n)
                .map(|i| {
                    let w = rng.gen_range(-2..3);
                    gen(&format!("g{i}"), w, w)
                })
                .collect();
            // Build a random strictly upper-triangular candidate and keep the
            // homogeneous square-zero part by construction: only add an entry
            // t<s when forced exponents are nonneg integers; then discard the
            // complex unless ∂² = 0.
            let mut diff = Mat::new();
            for s in 0..n {
                for t in 0..s {
                    if rng.gen_bool(0.4) {
                        let src = generators[s].grading;
                        let tgt = generators[t].grading;
                        let i = (src.gr_w - Rational64::one() - tgt.gr_w)
                            / Rational64::from_integer(2);
                        if i.is_integer() && i >= Rational64::zero() {
                            diff.insert((t, s), mono(i.to_integer(), i.to_integer()));
                        }
                    }
                }
            }
            let c = GradedComplex::new(generators.clone(), diff.clone());
            if !c.validate().is_valid() {
                continue;
            }
            let c = Arc::new(c);
            let r1 = reduce(&c, &[]);

            let perm: Vec<usize> = (0..n).rev().collect();
            let inv: Vec<usize> = {
                let mut v = vec![0; n];
                for (new, &old) in perm.iter().enumerate() {
                    v[old] = new;
                }
                v
            };
            let generators2: Vec<Generator> =
                perm.iter().map(|&i| generators[i].clone()).collect();
            let diff2: Mat =
                diff.iter().map(|((t, s), p)| ((inv[*t], inv[*s]), p.clone())).collect();
            let c2 = Arc::new(GradedComplex::new(generators2, diff2));
            let r2 = reduce(&c2, &[]);
            assert_eq!(r1.reduced.rank(), r2.reduced.rank());
        }
    }

    #[test]
    fn tower_structure_examples() {
        // Staircase: b = 1, no torsion.
        let t = tower_structure(&staircase());
        assert_eq!(t.free_rank, 1);
        assert!(t.l_space_type);
        assert!(t.single_tower);

        // Two disjoint unknots: b = 2.
        let c = GradedComplex::new(vec![gen("x", 0, 0), gen("y", 0, 0)], Mat::new());
        let t = tower_structure(&c);
        assert_eq!(t.free_rank, 2);
        assert!(!t.single_tower);

        // Torsion: ∂x = U² y at V = 1 (use entry U²V⁰... adjust gradings).
        let generators = vec![gen("x", 0, 2), gen("y", 3, 3)];
        let mut diff = Mat::new();
        diff.insert((1, 0), mono(2, 0));
        let c = GradedComplex::new(generators, diff);
        let t = tower_structure(&c);
        assert_eq!(t.free_rank, 0);
        assert!(!t.l_space_type);
        assert_eq!(t.torsion, vec!["U^2".to_owned()]);
    }

    #[test]
    fn verify_iota_on_staircase() {
        let c = staircase();
        // ι: a -> c, b -> b, c -> a (skew).
        let mut entries = Mat::new();
        entries.insert((2, 0), BiPoly::one());
        entries.insert((1, 1), BiPoly::one());
        entries.insert((0, 2), BiPoly::one());
        let iota = EquivariantMap {
            source: Arc::clone(&c),
            target: Arc::clone(&c),
            entries,
            bidegree: (Rational64::zero(), Rational64::zero()),
            variance: Variance::Skew,
        };
        let ic = IotaComplex { complex: Arc::clone(&c), iota, certificate: None };
        let report = verify_iota_complex(&ic);
        assert!(report.is_valid(), "{:?}", report.violations);
        assert!(report.certificate.is_some());

        // Breaking the chain-map property must be detected.
        let mut bad_entries = Mat::new();
        bad_entries.insert((1, 1), BiPoly::one());
        let bad = IotaComplex {
            complex: Arc::clone(&c),
            iota: EquivariantMap {
                source: Arc::clone(&c),
                target: Arc::clone(&c),
                entries: bad_entries,
                bidegree: (Rational64::zero(), Rational64::zero()),
                variance: Variance::Skew,
            },
            certificate: None,
        };
        assert!(!verify_iota_complex(&bad).is_valid());
    }

    #[test]
    fn skew_composition_swaps_coefficients() {
        let c = staircase();
        let mut entries = Mat::new();
        entries.insert((0, 0), mono(2, 1));
        let f = EquivariantMap {
            source: Arc::clone(&c),
            target: Arc::clone(&c),
            entries,
            bidegree: (Rational64::from_integer(-6), Rational64::from_integer(-2)),
            variance: Variance::Equivariant,
        };
        let mut entries = Mat::new();
        entries.insert((2, 0), BiPoly::one());
        let g = EquivariantMap {
            source: Arc::clone(&c),
            target: Arc::clone(&c),
            entries,
            bidegree: (Rational64::zero(), Rational64::zero()),
            variance: Variance::Skew,
        };
        let gf = g.compose(&f);
        assert_eq!(gf.variance, Variance::Skew);
        assert_eq!(gf.entries.get(&(2, 0)), Some(&mono(1, 2)));
    }
}
