//! Homological perturbation machinery for hypercubes of chain complexes:
//! snake-lemma splittings, the hypercube perturbation lemma, and length-2
//! hyperbox stacking.
//!
//! A hypercube assigns a chain complex to every vertex of `{0,1}^n` and a map
//! `D_{ε,ε'}` to every strict subset pair, subject to the compatibility
//! relation `Σ_{ε ≤ ε' ≤ ε''} D_{ε',ε''} ∘ D_{ε,ε'} = 0` (where the
//! length-zero map is the internal differential).  Given a strong deformation
//! retraction at each vertex, the perturbation lemma transfers the whole
//! hypercube across the retractions via sums over strictly increasing vertex
//! chains with homotopies inserted at interior vertices.
//!
//! Determinism: vertex masks are ordered integers, chains are enumerated in a
//! fixed order, and every output is a plain sum of compositions.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Rational64;
use thiserror::Error;

use crate::complex::{
    mat_add, mat_compose, EquivariantMap, GradedComplex, Generator, Mat, ValidationReport,
    Variance,
};
use crate::ring::BiPoly;

/// Errors from hypercube operations.
#[derive(Debug, Error)]
pub enum HplError {
    /// The shared face of two stacked boxes does not match.
    #[error("shared face mismatch: {0}")]
    FaceMismatch(String),
    /// The short exact sequence could not be split by elimination.
    #[error("snake splitting failed: {0}")]
    NotSplit(String),
}

/// A hypercube of chain complexes over the vertex set `{0,1}^dim`,
/// represented by bitmasks.
#[derive(Debug, Clone)]
pub struct Hypercube {
    /// Cube dimension (number of mask bits).
    pub dim: usize,
    /// Vertex complexes, one per mask in `0..2^dim`.
    pub vertices: BTreeMap<u32, Arc<GradedComplex>>,
    /// Structure maps keyed `(from, to)` with `from` a strict submask of
    /// `to`; missing keys are zero maps.
    pub maps: BTreeMap<(u32, u32), EquivariantMap>,
}

/// All submasks of `d`, including `0` and `d`, in decreasing order.
fn submasks(d: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut s = d;
    loop {
        out.push(s);
        if s == 0 {
            break;
        }
        s = (s - 1) & d;
    }
    out
}

/// Strictly increasing chains from `a` to `c` (inclusive endpoints).
fn chains_between(a: u32, c: u32) -> Vec<Vec<u32>> {
    if a == c {
        return vec![vec![a]];
    }
    let mut out = Vec::new();
    for m in submasks(c & !a) {
        if m == 0 {
            continue;
        }
        let b = a | m;
        for mut tail in chains_between(b, c) {
            let mut chain = vec![a];
            chain.append(&mut tail);
            out.push(chain);
        }
    }
    out.sort();
    out
}

impl Hypercube {
    /// Checks vertex completeness, map shapes, per-vertex complex validity,
    /// and the summed compatibility relation for every vertex pair.
    #[must_use]
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        assert!(self.dim <= 8, "hypercube dimension too large");
        let full: u32 = (1u32 << self.dim) - 1;
        for mask in 0..=full {
            if !self.vertices.contains_key(&mask) {
                report.violations.push(format!("missing vertex complex at mask {mask:#b}"));
            }
        }
        if !report.is_valid() {
            return report;
        }
        for (mask, complex) in &self.vertices {
            let vr = complex.validate();
            report
                .violations
                .extend(vr.violations.into_iter().map(|v| format!("vertex {mask:#b}: {v}")));
        }
        for ((a, c), map) in &self.maps {
            if a & c != *a || a == c || *c > full {
                report.violations.push(format!("map key ({a:#b}, {c:#b}) is not a strict subset pair"));
                continue;
            }
            if map.source != self.vertices[a] || map.target != self.vertices[c] {
                report.violations.push(format!("map ({a:#b}, {c:#b}) shape mismatch"));
            }
        }
        if !report.is_valid() {
            return report;
        }

        // Compatibility: for each a < c, sum over intermediate b of
        // D_{b,c} ∘ D_{a,b}, with D_{x,x} the internal differential.
        for a in 0..=full {
            for m in submasks(full & !a) {
                if m == 0 {
                    continue;
                }
                let c = a | m;
                let mut residual = Mat::new();
                let mut variance: Option<Variance> = None;
                for bm in submasks(c & !a) {
                    let b = a | bm;
                    let (first_entries, first_var): (&Mat, Variance) = if b == a {
                        (&self.vertices[&a].diff, Variance::Equivariant)
                    } else {
                        match self.maps.get(&(a, b)) {
                            Some(f) => (&f.entries, f.variance),
                            None => continue,
                        }
                    };
                    let (second_entries, second_var): (&Mat, Variance) = if b == c {
                        (&self.vertices[&c].diff, Variance::Equivariant)
                    } else {
                        match self.maps.get(&(b, c)) {
                            Some(f) => (&f.entries, f.variance),
                            None => continue,
                        }
                    };
                    let term_var = second_var.compose(first_var);
                    match variance {
                        None => variance = Some(term_var),
                        Some(v) if v != term_var => {
                            report.violations.push(format!(
                                "inconsistent variance in compatibility sum for ({a:#b}, {c:#b})"
                            ));
                        }
                        _ => {}
                    }
                    let term = mat_compose(
                        second_entries,
                        first_entries,
                        second_var == Variance::Skew,
                    );
                    residual = mat_add(&residual, &term);
                }
                if !residual.is_empty() {
                    report.violations.push(format!(
                        "compatibility fails for vertex pair ({a:#b}, {c:#b})"
                    ));
                }
            }
        }
        report
    }
}

/// A strong deformation retraction from a big complex onto a small one.
#[derive(Debug, Clone)]
pub struct SdrData {
    /// `π`: big → small.
    pub projection: EquivariantMap,
    /// `i`: small → big.
    pub inclusion: EquivariantMap,
    /// `h`: endomorphism of the big complex.
    pub homotopy: EquivariantMap,
}

impl SdrData {
    /// The identity retraction (`h = 0`).
    #[must_use]
    pub fn identity(complex: &Arc<GradedComplex>) -> Self {
        SdrData {
            projection: EquivariantMap::identity(complex),
            inclusion: EquivariantMap::identity(complex),
            homotopy: EquivariantMap::zero(
                Arc::clone(complex),
                Arc::clone(complex),
                (Rational64::from_integer(1), Rational64::from_integer(1)),
                Variance::Equivariant,
            ),
        }
    }

    /// Checks the five retraction identities and that `π`, `i` are chain maps.
    #[must_use]
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let pi = &self.projection;
        let inc = &self.inclusion;
        let h = &self.homotopy;
        if !pi.is_chain_map() {
            report.violations.push("projection is not a chain map".to_owned());
        }
        if !inc.is_chain_map() {
            report.violations.push("inclusion is not a chain map".to_owned());
        }
        let small = &inc.source;
        let big = &inc.target;
        if pi.compose(inc).entries != EquivariantMap::identity(small).entries {
            report.violations.push("π ∘ i is not the identity".to_owned());
        }
        let d = EquivariantMap::differential(big);
        let rhs = EquivariantMap::identity(big).add(&d.compose(h)).add(&h.compose(&d));
        if inc.compose(pi).entries != rhs.entries {
            report.violations.push("i ∘ π differs from id + [∂, h]".to_owned());
        }
        if !pi.compose(h).is_zero() {
            report.violations.push("π ∘ h is nonzero".to_owned());
        }
        if !h.compose(inc).is_zero() {
            report.violations.push("h ∘ i is nonzero".to_owned());
        }
        if !h.compose(h).is_zero() {
            report.violations.push("h ∘ h is nonzero".to_owned());
        }
        report
    }
}

/// A morphism of hypercubes: components `F_{ε,ε'}` for `ε ≤ ε'`.
#[derive(Debug, Clone, Default)]
pub struct CubeMorphism {
    /// Components keyed `(from, to)`.
    pub components: BTreeMap<(u32, u32), EquivariantMap>,
}

impl CubeMorphism {
    /// The identity morphism of a hypercube.
    #[must_use]
    pub fn identity(cube: &Hypercube) -> Self {
        let components = cube
            .vertices
            .iter()
            .map(|(mask, c)| ((*mask, *mask), EquivariantMap::identity(c)))
            .collect();
        CubeMorphism { components }
    }

    /// Composite `self ∘ other`: `(g ∘ f)_{a,c} = Σ_{a ≤ b ≤ c} g_{b,c} f_{a,b}`.
    #[must_use]
    pub fn compose(&self, other: &CubeMorphism) -> CubeMorphism {
        let mut components: BTreeMap<(u32, u32), EquivariantMap> = BTreeMap::new();
        for ((b, c), g) in &self.components {
            for ((a, b2), f) in &other.components {
                if b2 != b {
                    continue;
                }
                let term = g.compose(f);
                match components.get_mut(&(*a, *c)) {
                    Some(acc) => *acc = acc.add(&term),
                    None => {
                        components.insert((*a, *c), term);
                    }
                }
            }
        }
        components.retain(|_, m| !m.is_zero());
        CubeMorphism { components }
    }

    /// Componentwise sum.
    #[must_use]
    pub fn add(&self, other: &CubeMorphism) -> CubeMorphism {
        let mut components = self.components.clone();
        for (key, m) in &other.components {
            match components.get_mut(key) {
                Some(acc) => *acc = acc.add(m),
                None => {
                    components.insert(*key, m.clone());
                }
            }
        }
        components.retain(|_, m| !m.is_zero());
        CubeMorphism { components }
    }

    /// Whether every component is zero.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.components.values().all(EquivariantMap::is_zero)
    }

    /// Componentwise entry equality (missing components count as zero).
    #[must_use]
    pub fn equals(&self, other: &CubeMorphism) -> bool {
        let keys: std::collections::BTreeSet<(u32, u32)> = self
            .components
            .keys()
            .chain(other.components.keys())
            .copied()
            .collect();
        keys.into_iter().all(|k| {
            let a = self.components.get(&k).map(|m| &m.entries);
            let b = other.components.get(&k).map(|m| &m.entries);
            match (a, b) {
                (Some(x), Some(y)) => x == y,
                (Some(x), None) => x.is_empty(),
                (None, Some(y)) => y.is_empty(),
                (None, None) => true,
            }
        })
    }

    /// Whether this is the identity morphism of `cube`.
    #[must_use]
    pub fn is_identity(&self, cube: &Hypercube) -> bool {
        self.equals(&CubeMorphism::identity(cube))
    }

    /// The morphism differential `∂_Mor(F) = D_target ∘ F + F ∘ D_source`,
    /// where the structure maps include the internal differentials.
    #[must_use]
    pub fn differential(&self, source: &Hypercube, target: &Hypercube) -> CubeMorphism {
        let mut components: BTreeMap<(u32, u32), EquivariantMap> = BTreeMap::new();
        let mut accumulate = |key: (u32, u32), term: EquivariantMap| {
            if term.is_zero() {
                return;
            }
            match components.get_mut(&key) {
                Some(acc) => *acc = acc.add(&term),
                None => {
                    components.insert(key, term);
                }
            }
        };
        for ((a, b), f) in &self.components {
            // Target structure maps out of b.
            accumulate((*a, *b), EquivariantMap::differential(&target.vertices[b]).compose(f));
            for ((b2, c), d) in &target.maps {
                if b2 == b {
                    accumulate((*a, *c), d.compose(f));
                }
            }
            // Source structure maps into a.
            accumulate((*a, *b), f.compose(&EquivariantMap::differential(&source.vertices[a])));
            for ((w, a2), d) in &source.maps {
                if a2 == a {
                    accumulate((*w, *b), f.compose(d));
                }
            }
        }
        components.retain(|_, m| !m.is_zero());
        CubeMorphism { components }
    }
}

/// Output of [`perturb_hypercube`]: the transferred hypercube plus the
/// hypercube-level retraction morphisms.
#[derive(Debug, Clone)]
pub struct PerturbResult {
    /// The hypercube over the small vertex complexes.
    pub small: Hypercube,
    /// `Π`: big cube → small cube.
    pub projection: CubeMorphism,
    /// `I`: small cube → big cube.
    pub inclusion: CubeMorphism,
    /// `H`: endomorphism of the big cube.
    pub homotopy: CubeMorphism,
}

/// Alternating composition along a strictly increasing chain: the rightmost
/// factor is `i` or `h` at the first vertex, every interior vertex
/// contributes an `h`, and the leftmost factor is `π` or `h` at the last
/// vertex.  Returns `None` when a needed structure map is absent (zero).
fn alternating_chain_map(
    cube: &Hypercube,
    data: &BTreeMap<u32, SdrData>,
    chain: &[u32],
    start_with_h: bool,
    end_with_pi: bool,
) -> Option<EquivariantMap> {
    debug_assert!(chain.len() >= 2);
    let first = &data[&chain[0]];
    let mut cur = if start_with_h {
        first.homotopy.clone()
    } else {
        first.inclusion.clone()
    };
    for k in 0..chain.len() - 1 {
        let f = cube.maps.get(&(chain[k], chain[k + 1]))?;
        cur = f.compose(&cur);
        if k + 1 < chain.len() - 1 {
            cur = data[&chain[k + 1]].homotopy.compose(&cur);
        }
    }
    let last = &data[chain.last().expect("nonempty chain")];
    cur = if end_with_pi {
        last.projection.compose(&cur)
    } else {
        last.homotopy.compose(&cur)
    };
    Some(cur)
}

fn opt_add(acc: &mut Option<EquivariantMap>, term: EquivariantMap) {
    match acc {
        Some(m) => *m = m.add(&term),
        None => *acc = Some(term),
    }
}

/// Transfers a hypercube across per-vertex strong deformation retractions.
///
/// The new structure maps are `g_{ε,ε'} = Σ_chains π f h f … h f i`, and the
/// retraction morphisms `Π`, `I`, `H` are given by the analogous chain sums
/// (with `h` replacing `i` and/or `π` at the chain ends).
#[must_use]
pub fn perturb_hypercube(cube: &Hypercube, data: &BTreeMap<u32, SdrData>) -> PerturbResult {
    let full: u32 = (1u32 << cube.dim) - 1;
    for mask in 0..=full {
        assert!(data.contains_key(&mask), "missing retraction data at vertex {mask:#b}");
        assert_eq!(
            data[&mask].projection.source, cube.vertices[&mask],
            "retraction shape mismatch at vertex {mask:#b}"
        );
    }

    let small_vertices: BTreeMap<u32, Arc<GradedComplex>> = cube
        .vertices
        .keys()
        .map(|mask| (*mask, Arc::clone(&data[mask].projection.target)))
        .collect();

    let mut small_maps = BTreeMap::new();
    let mut pi_components = BTreeMap::new();
    let mut inc_components = BTreeMap::new();
    let mut h_components = BTreeMap::new();
    for (mask, sdr) in data {
        pi_components.insert((*mask, *mask), sdr.projection.clone());
        inc_components.insert((*mask, *mask), sdr.inclusion.clone());
        h_components.insert((*mask, *mask), sdr.homotopy.clone());
    }

    for a in 0..=full {
        for m in submasks(full & !a) {
            if m == 0 {
                continue;
            }
            let c = a | m;
            let mut g: Option<EquivariantMap> = None;
            let mut pi: Option<EquivariantMap> = None;
            let mut inc: Option<EquivariantMap> = None;
            let mut h: Option<EquivariantMap> = None;
            for chain in chains_between(a, c) {
                if let Some(t) = alternating_chain_map(cube, data, &chain, false, true) {
                    opt_add(&mut g, t);
                }
                if let Some(t) = alternating_chain_map(cube, data, &chain, true, true) {
                    opt_add(&mut pi, t);
                }
                if let Some(t) = alternating_chain_map(cube, data, &chain, false, false) {
                    opt_add(&mut inc, t);
                }
                if let Some(t) = alternating_chain_map(cube, data, &chain, true, false) {
                    opt_add(&mut h, t);
                }
            }
            if let Some(map) = g {
                if !map.is_zero() {
                    small_maps.insert((a, c), map);
                }
            }
            if let Some(map) = pi {
                if !map.is_zero() {
                    pi_components.insert((a, c), map);
                }
            }
            if let Some(map) = inc {
                if !map.is_zero() {
                    inc_components.insert((a, c), map);
                }
            }
            if let Some(map) = h {
                if !map.is_zero() {
                    h_components.insert((a, c), map);
                }
            }
        }
    }

    PerturbResult {
        small: Hypercube { dim: cube.dim, vertices: small_vertices, maps: small_maps },
        projection: CubeMorphism { components: pi_components },
        inclusion: CubeMorphism { components: inc_components },
        homotopy: CubeMorphism { components: h_components },
    }
}

/// Output of [`snake_split`].
#[derive(Debug, Clone)]
pub struct SnakeSplit {
    /// The mapping cone of `i`, with the source part grading-shifted so the
    /// cone differential is homogeneous.
    pub cone: Arc<GradedComplex>,
    /// `σ: B → A`, the unique splitting of `i` with `σ ∘ s = 0` (generally
    /// not a chain map).
    pub sigma: EquivariantMap,
    /// The chain map `σ ∂ s: C → A`.
    pub sigma_ds: EquivariantMap,
    /// `Π: Cone(i) → C`, given by `p` on the `B` part.
    pub projection: EquivariantMap,
    /// `F: C → Cone(i)`, given by `(σ ∂ s, s)`.
    pub inclusion: EquivariantMap,
    /// `H: Cone(i) → Cone(i)`, given by `H(a, b) = (σ b, 0)`.
    pub homotopy: EquivariantMap,
}

/// Computes a left inverse of the matrix `m` (rows × cols) by Gaussian
/// elimination with single-monomial pivots; monomials are inverted as
/// Laurent monomials.
fn monomial_left_inverse(m: &Mat, rows: usize, cols: usize) -> Result<Mat, HplError> {
    // Augmented rows: (matrix part, identity part).
    let mut work: Vec<(BTreeMap<usize, BiPoly>, BTreeMap<usize, BiPoly>)> =
        vec![(BTreeMap::new(), BTreeMap::new()); rows];
    for ((r, c), p) in m {
        work[*r].0.insert(*c, p.clone());
    }
    for (r, row) in work.iter_mut().enumerate() {
        row.1.insert(r, BiPoly::one());
    }
    let mut pivot_row_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut used: Vec<bool> = vec![false; rows];
    for col in 0..cols {
        let Some(r) = (0..rows).find(|&r| {
            !used[r]
                && work[r]
                    .0
                    .get(&col)
                    .is_some_and(|p| p.terms.len() == 1)
        }) else {
            return Err(HplError::NotSplit(format!(
                "no monomial pivot available for column {col}"
            )));
        };
        // Normalize the pivot row by the inverse Laurent monomial.
        let pivot = *work[r].0[&col].terms.iter().next().expect("single term");
        let inv = BiPoly::from(crate::ring::Mono::laurent(-pivot.u_exp, -pivot.v_exp));
        let scale = |part: &BTreeMap<usize, BiPoly>| -> BTreeMap<usize, BiPoly> {
            part.iter().map(|(k, p)| (*k, p.mul(&inv).expect("laurent product"))).collect()
        };
        work[r] = (scale(&work[r].0), scale(&work[r].1));
        // Eliminate the column elsewhere.
        let pivot_main = work[r].0.clone();
        let pivot_aug = work[r].1.clone();
        for r2 in 0..rows {
            if r2 == r {
                continue;
            }
            let Some(e) = work[r2].0.get(&col).cloned() else { continue };
            if e.is_zero() {
                continue;
            }
            for (k, p) in &pivot_main {
                let delta = e.mul(p).expect("laurent product");
                let entry = work[r2].0.entry(*k).or_insert_with(BiPoly::zero);
                entry.add_assign(&delta);
                if entry.is_zero() {
                    work[r2].0.remove(k);
                }
            }
            for (k, p) in &pivot_aug {
                let delta = e.mul(p).expect("laurent product");
                let entry = work[r2].1.entry(*k).or_insert_with(BiPoly::zero);
                entry.add_assign(&delta);
                if entry.is_zero() {
                    work[r2].1.remove(k);
                }
            }
        }
        used[r] = true;
        pivot_row_of_col[col] = Some(r);
    }
    let mut left = Mat::new();
    for col in 0..cols {
        let r = pivot_row_of_col[col].expect("pivot assigned");
        for (k, p) in &work[r].1 {
            if !p.is_zero() {
                left.insert((col, *k), p.clone());
            }
        }
    }
    Ok(left)
}

/// Splits the short exact sequence `0 → A →^i B →^p C → 0` along the linear
/// (not necessarily chain) section `s` of `p`, producing the unique splitting
/// `σ` with `σs = 0` and `sp + iσ = id`, and the strong deformation
/// retraction between `Cone(i)` and `C`.
pub fn snake_split(
    i: &EquivariantMap,
    p: &EquivariantMap,
    s: &EquivariantMap,
) -> Result<SnakeSplit, HplError> {
    let a = &i.source;
    let b = &i.target;
    let c = &p.target;
    assert_eq!(p.source, *b, "p must have source B");
    assert_eq!(s.target, *b, "s must have target B");
    assert_eq!(s.source, *c, "s must have source C");

    // Exactness spot checks: p ∘ i = 0 and p ∘ s = id.
    if !mat_compose(&p.entries, &i.entries, false).is_empty() {
        return Err(HplError::NotSplit("p ∘ i is nonzero".to_owned()));
    }
    let ps = mat_compose(&p.entries, &s.entries, false);
    let id_c: Mat = (0..c.rank()).map(|k| ((k, k), BiPoly::one())).collect();
    if ps != id_c {
        return Err(HplError::NotSplit("p ∘ s is not the identity".to_owned()));
    }

    // σ = L ∘ (id + s p) for any left inverse L of i.
    let left = monomial_left_inverse(&i.entries, b.rank(), a.rank())?;
    let id_b: Mat = (0..b.rank()).map(|k| ((k, k), BiPoly::one())).collect();
    let id_plus_sp = mat_add(&id_b, &mat_compose(&s.entries, &p.entries, false));
    let sigma_entries = mat_compose(&left, &id_plus_sp, false);

    // Defensive verification of the splitting identities.
    if !mat_compose(&sigma_entries, &s.entries, false).is_empty() {
        return Err(HplError::NotSplit("σ ∘ s is nonzero".to_owned()));
    }
    let recombined = mat_add(
        &mat_compose(&i.entries, &sigma_entries, false),
        &mat_compose(&s.entries, &p.entries, false),
    );
    if recombined != id_b {
        return Err(HplError::NotSplit("sp + iσ is not the identity".to_owned()));
    }

    let sigma_ds_entries = mat_compose(
        &sigma_entries,
        &mat_compose(&b.diff, &s.entries, false),
        false,
    );

    // The mapping cone of i, with A-part gradings shifted by deg(i) + (1, 1).
    let na = a.rank();
    let shift = (
        i.bidegree.0 + Rational64::from_integer(1),
        i.bidegree.1 + Rational64::from_integer(1),
    );
    let mut generators: Vec<Generator> = a
        .generators
        .iter()
        .map(|g| Generator {
            label: format!("{}#a", g.label),
            grading: g.grading.shift(shift),
        })
        .collect();
    generators.extend(b.generators.iter().map(|g| Generator {
        label: format!("{}#b", g.label),
        grading: g.grading,
    }));
    let mut cone_diff = Mat::new();
    for ((t, sidx), poly) in &a.diff {
        cone_diff.insert((*t, *sidx), poly.clone());
    }
    for ((t, sidx), poly) in &b.diff {
        cone_diff.insert((na + t, na + sidx), poly.clone());
    }
    for ((t, sidx), poly) in &i.entries {
        cone_diff.insert((na + t, *sidx), poly.clone());
    }
    let cone = Arc::new(GradedComplex::new(generators, cone_diff));

    // Retraction data between Cone(i) and C.
    let mut pi_entries = Mat::new();
    for ((t, sidx), poly) in &p.entries {
        pi_entries.insert((*t, na + sidx), poly.clone());
    }
    let projection = EquivariantMap {
        source: Arc::clone(&cone),
        target: Arc::clone(c),
        entries: pi_entries,
        bidegree: p.bidegree,
        variance: Variance::Equivariant,
    };

    let mut f_entries = Mat::new();
    for ((t, sidx), poly) in &sigma_ds_entries {
        f_entries.insert((*t, *sidx), poly.clone());
    }
    for ((t, sidx), poly) in &s.entries {
        f_entries.insert((na + t, *sidx), poly.clone());
    }
    let inclusion = EquivariantMap {
        source: Arc::clone(c),
        target: Arc::clone(&cone),
        entries: f_entries,
        bidegree: (-p.bidegree.0, -p.bidegree.1),
        variance: Variance::Equivariant,
    };

    let mut h_entries = Mat::new();
    for ((t, sidx), poly) in &sigma_entries {
        h_entries.insert((*t, na + sidx), poly.clone());
    }
    let homotopy = EquivariantMap {
        source: Arc::clone(&cone),
        target: Arc::clone(&cone),
        entries: h_entries,
        bidegree: (Rational64::from_integer(1), Rational64::from_integer(1)),
        variance: Variance::Equivariant,
    };

    let sigma = EquivariantMap {
        source: Arc::clone(b),
        target: Arc::clone(a),
        entries: sigma_entries,
        bidegree: (-i.bidegree.0, -i.bidegree.1),
        variance: Variance::Equivariant,
    };
    let sigma_ds = EquivariantMap {
        source: Arc::clone(c),
        target: Arc::clone(a),
        entries: sigma_ds_entries,
        bidegree: (
            -i.bidegree.0 - p.bidegree.0 - Rational64::from_integer(1),
            -i.bidegree.1 - p.bidegree.1 - Rational64::from_integer(1),
        ),
        variance: Variance::Equivariant,
    };

    Ok(SnakeSplit { cone, sigma, sigma_ds, projection, inclusion, homotopy })
}

/// Stacks two squares (2-dimensional hypercubes) along `axis`, composing the
/// long edges and forming the compressed diagonal
/// `δ_right ∘ (axis edge of left) + (far axis edge of right) ∘ δ_left`.
///
/// The shared face (vertices and transverse edge) must agree: `left` at
/// axis-coordinate 1 equals `right` at axis-coordinate 0.
pub fn stack_boxes(
    left: &Hypercube,
    right: &Hypercube,
    axis: usize,
) -> Result<Hypercube, HplError> {
    assert_eq!(left.dim, 2, "stack_boxes expects squares");
    assert_eq!(right.dim, 2, "stack_boxes expects squares");
    assert!(axis < 2, "axis out of range");
    let bit: u32 = 1 << axis;
    let other: u32 = 3 ^ bit;

    if left.vertices[&bit] != right.vertices[&0] {
        return Err(HplError::FaceMismatch("axis-0 corner differs".to_owned()));
    }
    if left.vertices[&3] != right.vertices[&other] {
        return Err(HplError::FaceMismatch("axis-1 corner differs".to_owned()));
    }
    let left_face_edge = left.maps.get(&(bit, 3));
    let right_face_edge = right.maps.get(&(0, other));
    let face_edges_match = match (left_face_edge, right_face_edge) {
        (Some(a), Some(b)) => a.entries == b.entries,
        (Some(a), None) => a.is_zero(),
        (None, Some(b)) => b.is_zero(),
        (None, None) => true,
    };
    if !face_edges_match {
        return Err(HplError::FaceMismatch("shared transverse edge differs".to_owned()));
    }

    let compose_opt = |second: Option<&EquivariantMap>,
                       first: Option<&EquivariantMap>|
     -> Option<EquivariantMap> {
        Some(second?.compose(first?))
    };

    let mut vertices = BTreeMap::new();
    vertices.insert(0, Arc::clone(&left.vertices[&0]));
    vertices.insert(other, Arc::clone(&left.vertices[&other]));
    vertices.insert(bit, Arc::clone(&right.vertices[&bit]));
    vertices.insert(3, Arc::clone(&right.vertices[&3]));

    let mut maps = BTreeMap::new();
    // Long edges along the stacking axis.
    if let Some(m) = compose_opt(right.maps.get(&(0, bit)), left.maps.get(&(0, bit))) {
        maps.insert((0, bit), m);
    }
    if let Some(m) = compose_opt(right.maps.get(&(other, 3)), left.maps.get(&(other, 3))) {
        maps.insert((other, 3), m);
    }
    // Transverse edges.
    if let Some(m) = left.maps.get(&(0, other)) {
        maps.insert((0, other), m.clone());
    }
    if let Some(m) = right.maps.get(&(bit, 3)) {
        maps.insert((bit, 3), m.clone());
    }
    // Compressed diagonal.
    let mut diagonal: Option<EquivariantMap> = None;
    if let Some(m) = compose_opt(right.maps.get(&(0, 3)), left.maps.get(&(0, bit))) {
        opt_add(&mut diagonal, m);
    }
    if let Some(m) = compose_opt(right.maps.get(&(other, 3)), left.maps.get(&(0, 3))) {
        opt_add(&mut diagonal, m);
    }
    if let Some(m) = diagonal {
        if !m.is_zero() {
            maps.insert((0, 3), m);
        }
    }

    Ok(Hypercube { dim: 2, vertices, maps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{reduce, Grading};
    use crate::ring::Mono;
    use rand::{Rng, SeedableRng};

    fn gen(label: &str, w: i64, z: i64) -> Generator {
        Generator { label: label.to_owned(), grading: Grading::new_int(w, z) }
    }

    fn mono(u: i64, v: i64) -> BiPoly {
        BiPoly::from(Mono::new(u, v).unwrap())
    }

    /// Random valid homogeneous complex on `n` generators (diagonal gradings).
    fn random_complex(rng: &mut impl Rng, n: usize, tag: &str) -> Arc<GradedComplex> {
        loop {
            let generators: Vec<Generator> = (0..n)
                .map(|i| {
                    let w = rng.gen_range(-2..3);
                    gen(&format!("{tag}{i}"), w, w)
                })
                .collect();
            let mut diff = Mat::new();
            for s in 0..n {
                for t in 0..s {
                    if rng.gen_bool(0.4) {
                        let src = generators[s].grading;
                        let tgt = generators[t].grading;
                        let i = (src.gr_w - Rational64::from_integer(1) - tgt.gr_w)
                            / Rational64::from_integer(2);
                        if i.is_integer() && i >= Rational64::from_integer(0) {
                            diff.insert((t, s), mono(i.to_integer(), i.to_integer()));
                        }
                    }
                }
            }
            let c = GradedComplex::new(generators, diff);
            if c.validate().is_valid() {
                return Arc::new(c);
            }
        }
    }

    /// Random homogeneous map of bidegree `(d, d)` (forced monomials).
    fn random_diag_map(
        rng: &mut impl Rng,
        source: &Arc<GradedComplex>,
        target: &Arc<GradedComplex>,
        d: i64,
    ) -> EquivariantMap {
        let deg = (Rational64::from_integer(d), Rational64::from_integer(d));
        let mut m = EquivariantMap::zero(
            Arc::clone(source),
            Arc::clone(target),
            deg,
            Variance::Equivariant,
        );
        for t in 0..target.rank() {
            for s in 0..source.rank() {
                if rng.gen_bool(0.5) {
                    let i = (source.generators[s].grading.gr_w + deg.0
                        - target.generators[t].grading.gr_w)
                        / Rational64::from_integer(2);
                    if i.is_integer() && i >= Rational64::from_integer(0) {
                        m.entries.insert((t, s), mono(i.to_integer(), i.to_integer()));
                    }
                }
            }
        }
        m
    }

    /// Null-homotopic chain map `[∂, g]` from a random `g` of bidegree (1,1).
    fn random_chain_map(
        rng: &mut impl Rng,
        source: &Arc<GradedComplex>,
        target: &Arc<GradedComplex>,
    ) -> (EquivariantMap, EquivariantMap) {
        let g = random_diag_map(rng, source, target, 1);
        let ds = EquivariantMap::differential(source);
        let dt = EquivariantMap::differential(target);
        (dt.compose(&g).add(&g.compose(&ds)), g)
    }

    /// Random valid 2-dimensional hypercube with commuting-up-to-homotopy
    /// faces: edges are null-homotopic chain maps, and the diagonal is the
    /// induced homotopy `f13 g01 + f23 g02`.
    fn random_square(rng: &mut impl Rng) -> Hypercube {
        let n = rng.gen_range(2..6); let c0 = random_complex(rng, n, "p");
        let n = rng.gen_range(2..6); let c1 = random_complex(rng, n, "q");
        let n = rng.gen_range(2..6); let c2 = random_complex(rng, n, "r");
        let n = rng.gen_range(2..6); let c3 = random_complex(rng, n, "s");
        let (f01, g01) = random_chain_map(rng, &c0, &c1);
        let (f02, g02) = random_chain_map(rng, &c0, &c2);
        let (f13, _) = random_chain_map(rng, &c1, &c3);
        let (f23, _) = random_chain_map(rng, &c2, &c3);
        let f03 = f13.compose(&g01).add(&f23.compose(&g02));
        let mut vertices = BTreeMap::new();
        vertices.insert(0, c0);
        vertices.insert(1, c1);
        vertices.insert(2, c2);
        vertices.insert(3, c3);
        let mut maps = BTreeMap::new();
        maps.insert((0, 1), f01);
        maps.insert((0, 2), f02);
        maps.insert((1, 3), f13);
        maps.insert((2, 3), f23);
        if !f03.is_zero() {
            maps.insert((0, 3), f03);
        }
        Hypercube { dim: 2, vertices, maps }
    }

    #[test]
    fn chains_enumeration() {
        assert_eq!(chains_between(0, 0), vec![vec![0]]);
        assert_eq!(chains_between(0, 1), vec![vec![0, 1]]);
        assert_eq!(
            chains_between(0, 3),
            vec![vec![0, 1, 3], vec![0, 2, 3], vec![0, 3]]
        );
    }

    #[test]
    fn random_squares_are_compatible() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let square = random_square(&mut rng);
            let report = square.validate();
            assert!(report.is_valid(), "{:?}", report.violations);
        }
    }

    #[test]
    fn identity_perturbation_is_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let square = random_square(&mut rng);
        let data: BTreeMap<u32, SdrData> = square
            .vertices
            .iter()
            .map(|(mask, c)| (*mask, SdrData::identity(c)))
            .collect();
        let out = perturb_hypercube(&square, &data);
        for key in square.maps.keys() {
            match out.small.maps.get(key) {
                Some(m) => assert_eq!(m.entries, square.maps[key].entries),
                None => assert!(square.maps[key].is_zero()),
            }
        }
        assert!(out.projection.is_identity(&square));
        assert!(out.inclusion.is_identity(&square));
    }

    #[test]
    fn perturbed_squares_pass_validator_with_sdr_identities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let square = random_square(&mut rng);
            let data: BTreeMap<u32, SdrData> = square
                .vertices
                .iter()
                .map(|(mask, c)| {
                    let r = reduce(c, &[]);
                    let sdr = SdrData {
                        projection: r.projection,
                        inclusion: r.inclusion,
                        homotopy: r.homotopy,
                    };
                    assert!(sdr.validate().is_valid());
                    (*mask, sdr)
                })
                .collect();
            let out = perturb_hypercube(&square, &data);
            let report = out.small.validate();
            assert!(report.is_valid(), "{:?}", report.violations);

            // Π I = id on the small cube.
            let pi_i = out.projection.compose(&out.inclusion);
            assert!(pi_i.is_identity(&out.small), "Π I is not the identity");

            // Π and I are cycles; I Π = id + ∂_Mor(H).
            assert!(out.projection.differential(&square, &out.small).is_zero());
            assert!(out.inclusion.differential(&out.small, &square).is_zero());
            let i_pi = out.inclusion.compose(&out.projection);
            let rhs = CubeMorphism::identity(&square)
                .add(&out.homotopy.differential(&square, &square));
            assert!(i_pi.equals(&rhs), "I Π differs from id + ∂(H)");

            // Side conditions at the morphism level.
            assert!(out.projection.compose(&out.homotopy).is_zero());
            assert!(out.homotopy.compose(&out.inclusion).is_zero());
        }
    }

    #[test]
    fn square_with_identity_sides_has_zero_diagonal() {
        // Vertices: A at 00 and 10, B at 01 and 11; v on top and bottom,
        // identity on the sides, zero diagonal.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let a = random_complex(&mut rng, 5, "a");
        let b = random_complex(&mut rng, 4, "b");
        let (v, _) = random_chain_map(&mut rng, &a, &b);
        let mut vertices = BTreeMap::new();
        vertices.insert(0, Arc::clone(&a));
        vertices.insert(1, Arc::clone(&b));
        vertices.insert(2, Arc::clone(&a));
        vertices.insert(3, Arc::clone(&b));
        let mut maps = BTreeMap::new();
        maps.insert((0, 1), v.clone());
        maps.insert((2, 3), v.clone());
        maps.insert((0, 2), EquivariantMap::identity(&a));
        maps.insert((1, 3), EquivariantMap::identity(&b));
        let square = Hypercube { dim: 2, vertices, maps };
        assert!(square.validate().is_valid());

        // The same retraction at both A vertices and both B vertices.
        let ra = reduce(&a, &[]);
        let rb = reduce(&b, &[]);
        let sdr_a = SdrData {
            projection: ra.projection,
            inclusion: ra.inclusion,
            homotopy: ra.homotopy,
        };
        let sdr_b = SdrData {
            projection: rb.projection,
            inclusion: rb.inclusion,
            homotopy: rb.homotopy,
        };
        let mut data = BTreeMap::new();
        data.insert(0, sdr_a.clone());
        data.insert(2, sdr_a);
        data.insert(1, sdr_b.clone());
        data.insert(3, sdr_b);
        let out = perturb_hypercube(&square, &data);
        assert!(out.small.maps.get(&(0, 3)).is_none(), "expected zero diagonal");
        assert!(out.small.validate().is_valid());
    }

    #[test]
    fn snake_split_isomorphism_case() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        let a = random_complex(&mut rng, 4, "a");
        let empty = Arc::new(GradedComplex::empty());
        let i = EquivariantMap::identity(&a);
        let p = EquivariantMap::zero(
            Arc::clone(&a),
            Arc::clone(&empty),
            (Rational64::from_integer(0), Rational64::from_integer(0)),
            Variance::Equivariant,
        );
        let s = EquivariantMap::zero(
            Arc::clone(&empty),
            Arc::clone(&a),
            (Rational64::from_integer(0), Rational64::from_integer(0)),
            Variance::Equivariant,
        );
        let split = snake_split(&i, &p, &s).unwrap();
        assert_eq!(split.sigma.entries, EquivariantMap::identity(&a).entries);
        assert!(split.inclusion.is_zero());
    }

    #[test]
    fn snake_split_twisted_sum_identities() {
        // B = A ⊕ C with ∂_B = [[∂_A, t], [0, ∂_C]] and a mixing section
        // s(c) = c + r(c): exercises the generic σ computation, and all six
        // lemma conclusions are checked exactly.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let n = rng.gen_range(2..5); let a = random_complex(&mut rng, n, "a");
            let n = rng.gen_range(2..5); let c = random_complex(&mut rng, n, "c");
            let (t, _) = random_chain_map(&mut rng, &c, &a);
            let na = a.rank();
            let mut generators: Vec<Generator> = a
                .generators
                .iter()
                .map(|g| Generator { label: format!("{}+", g.label), grading: g.grading })
                .collect();
            generators.extend(c.generators.iter().map(|g| Generator {
                label: format!("{}-", g.label),
                grading: g.grading.shift((
                    -t.bidegree.0 - Rational64::from_integer(1),
                    -t.bidegree.1 - Rational64::from_integer(1),
                )),
            }));
            let mut diff = Mat::new();
            for ((tt, ss), poly) in &a.diff {
                diff.insert((*tt, *ss), poly.clone());
            }
            for ((tt, ss), poly) in &c.diff {
                diff.insert((na + tt, na + ss), poly.clone());
            }
            for ((tt, ss), poly) in &t.entries {
                diff.insert((*tt, na + ss), poly.clone());
            }
            // Twisted C-part gradings must make ∂_B homogeneous; rebuild C
            // with the shifted gradings so shapes line up.
            let c_shifted = Arc::new(GradedComplex::new(
                generators[na..]
                    .iter()
                    .map(|g| Generator {
                        label: g.label.trim_end_matches('-').to_owned(),
                        grading: g.grading,
                    })
                    .collect(),
                c.diff.clone(),
            ));
            let b = Arc::new(GradedComplex::new(generators, diff));
            if !b.validate().is_valid() {
                continue;
            }

            let mut i_entries = Mat::new();
            for k in 0..na {
                i_entries.insert((k, k), BiPoly::one());
            }
            let i = EquivariantMap {
                source: Arc::clone(&a),
                target: Arc::clone(&b),
                entries: i_entries,
                bidegree: (Rational64::from_integer(0), Rational64::from_integer(0)),
                variance: Variance::Equivariant,
            };
            let mut p_entries = Mat::new();
            for k in 0..c.rank() {
                p_entries.insert((k, na + k), BiPoly::one());
            }
            let p = EquivariantMap {
                source: Arc::clone(&b),
                target: Arc::clone(&c_shifted),
                entries: p_entries,
                bidegree: (Rational64::from_integer(0), Rational64::from_integer(0)),
                variance: Variance::Equivariant,
            };
            // Mixing section: s(c) = c + r(c) for a random linear r: C → A.
            let r = random_diag_map(&mut rng, &c_shifted, &a, 0);
            let mut s_entries = Mat::new();
            for k in 0..c.rank() {
                s_entries.insert((na + k, k), BiPoly::one());
            }
            for ((tt, ss), poly) in &r.entries {
                s_entries.insert((*tt, *ss), poly.clone());
            }
            let s = EquivariantMap {
                source: Arc::clone(&c_shifted),
                target: Arc::clone(&b),
                entries: s_entries,
                bidegree: (Rational64::from_integer(0), Rational64::from_integer(0)),
                variance: Variance::Equivariant,
            };

            let split = snake_split(&i, &p, &s).unwrap();
            // (1) σ s = 0 and (2) sp + iσ = id hold by construction checks
            // inside snake_split; (3) σ∂s is a chain map:
            assert!(split.sigma_ds.is_chain_map());
            // (4), (5) Π and F are chain maps on the cone.
            assert!(split.cone.validate().is_valid());
            assert!(split.projection.is_chain_map());
            assert!(split.inclusion.is_chain_map());
            // (6) SDR identities.
            let sdr = SdrData {
                projection: split.projection.clone(),
                inclusion: split.inclusion.clone(),
                homotopy: split.homotopy.clone(),
            };
            let report = sdr.validate();
            assert!(report.is_valid(), "{:?}", report.violations);
        }
    }

    #[test]
    fn one_dimensional_perturbation_matches_reduce_transport() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40);
        for _ in 0..10 {
            let c0 = random_complex(&mut rng, 6, "x");
            let c1 = random_complex(&mut rng, 4, "y");
            let (f, _) = random_chain_map(&mut rng, &c0, &c1);
            let mut vertices = BTreeMap::new();
            vertices.insert(0, Arc::clone(&c0));
            vertices.insert(1, Arc::clone(&c1));
            let mut maps = BTreeMap::new();
            maps.insert((0, 1), f.clone());
            let cube = Hypercube { dim: 1, vertices, maps };
            assert!(cube.validate().is_valid());

            let r0 = reduce(&c0, &[]);
            let mut data = BTreeMap::new();
            data.insert(
                0,
                SdrData {
                    projection: r0.projection,
                    inclusion: r0.inclusion.clone(),
                    homotopy: r0.homotopy,
                },
            );
            data.insert(1, SdrData::identity(&c1));
            let out = perturb_hypercube(&cube, &data);
            // With identity data at vertex 1, the perturbed edge is f ∘ I.
            let expected = f.compose(&r0.inclusion);
            match out.small.maps.get(&(0, 1)) {
                Some(g) => assert_eq!(g.entries, expected.entries),
                None => assert!(expected.is_zero()),
            }
            assert!(out.small.validate().is_valid());
        }
    }

    #[test]
    fn stacking_identity_square_is_neutral() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(50);
        let square = random_square(&mut rng);
        // Identity square sharing the axis-1 face of `square` (axis 0).
        let bit = 1u32;
        let other = 2u32;
        let mut vertices = BTreeMap::new();
        vertices.insert(0, Arc::clone(&square.vertices[&bit]));
        vertices.insert(other, Arc::clone(&square.vertices[&3]));
        vertices.insert(bit, Arc::clone(&square.vertices[&bit]));
        vertices.insert(3, Arc::clone(&square.vertices[&3]));
        let mut maps = BTreeMap::new();
        maps.insert((0, bit), EquivariantMap::identity(&square.vertices[&bit]));
        maps.insert((other, 3), EquivariantMap::identity(&square.vertices[&3]));
        if let Some(e) = square.maps.get(&(bit, 3)) {
            maps.insert((0, other), e.clone());
            maps.insert((bit, 3), e.clone());
        }
        let identity_square = Hypercube { dim: 2, vertices, maps };
        assert!(identity_square.validate().is_valid());

        let stacked = stack_boxes(&square, &identity_square, 0).unwrap();
        assert!(stacked.validate().is_valid());
        for key in [(0u32, 1u32), (2, 3), (0, 2), (1, 3), (0, 3)] {
            let a = square.maps.get(&key).map(|m| &m.entries);
            let b = stacked.maps.get(&key).map(|m| &m.entries);
            match (a, b) {
                (Some(x), Some(y)) => assert_eq!(x, y),
                (Some(x), None) => assert!(x.is_empty()),
                (None, Some(y)) => assert!(y.is_empty()),
                (None, None) => {}
            }
        }
    }

    #[test]
    fn stacking_random_squares_is_compatible() {
        // Build two compatible squares sharing a face (axis 0, bit 1): the
        // shared face carries a fixed chain map, all other edges are
        // null-homotopic chain maps with recorded homotopies, and each
        // diagonal is assembled from those homotopies.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(60);
        for _ in 0..10 {
            let n = rng.gen_range(2..5); let c0 = random_complex(&mut rng, n, "m");
            let n = rng.gen_range(2..5); let c2 = random_complex(&mut rng, n, "n");
            let (shared_f, _) = random_chain_map(&mut rng, &c0, &c2);

            // Left square: vertices (a0, c0, a2, c2), face-1 edge shared_f.
            let n = rng.gen_range(2..5); let a0 = random_complex(&mut rng, n, "p");
            let n = rng.gen_range(2..5); let a2 = random_complex(&mut rng, n, "q");
            let (l01, lg01) = random_chain_map(&mut rng, &a0, &c0);
            let (l02, lg02) = random_chain_map(&mut rng, &a0, &a2);
            let (l23, _) = random_chain_map(&mut rng, &a2, &c2);
            let l03 = shared_f.compose(&lg01).add(&l23.compose(&lg02));
            let mut vertices = BTreeMap::new();
            vertices.insert(0u32, Arc::clone(&a0));
            vertices.insert(1, Arc::clone(&c0));
            vertices.insert(2, Arc::clone(&a2));
            vertices.insert(3, Arc::clone(&c2));
            let mut maps = BTreeMap::new();
            maps.insert((0u32, 1u32), l01);
            maps.insert((0, 2), l02);
            if !shared_f.is_zero() {
                maps.insert((1, 3), shared_f.clone());
            }
            maps.insert((2, 3), l23);
            if !l03.is_zero() {
                maps.insert((0, 3), l03);
            }
            let left = Hypercube { dim: 2, vertices, maps };
            let report = left.validate();
            assert!(report.is_valid(), "{:?}", report.violations);

            // Right square: vertices (c0, b1, c2, b3), face-0 edge shared_f.
            let n = rng.gen_range(2..5); let b1 = random_complex(&mut rng, n, "t");
            let n = rng.gen_range(2..5); let b3 = random_complex(&mut rng, n, "u");
            let (r01, rg01) = random_chain_map(&mut rng, &c0, &b1);
            let (r13, _) = random_chain_map(&mut rng, &b1, &b3);
            let (r23, rg23) = random_chain_map(&mut rng, &c2, &b3);
            // [∂, r13 rg01] = r13 r01 and [∂, rg23 shared_f] = r23 shared_f.
            let r03 = r13.compose(&rg01).add(&rg23.compose(&shared_f));
            let mut vertices = BTreeMap::new();
            vertices.insert(0u32, Arc::clone(&c0));
            vertices.insert(1, Arc::clone(&b1));
            vertices.insert(2, Arc::clone(&c2));
            vertices.insert(3, Arc::clone(&b3));
            let mut maps = BTreeMap::new();
            maps.insert((0u32, 1u32), r01);
            if !shared_f.is_zero() {
                maps.insert((0, 2), shared_f.clone());
            }
            maps.insert((1, 3), r13);
            maps.insert((2, 3), r23);
            if !r03.is_zero() {
                maps.insert((0, 3), r03);
            }
            let right = Hypercube { dim: 2, vertices, maps };
            let report = right.validate();
            assert!(report.is_valid(), "{:?}", report.violations);

            let stacked = stack_boxes(&left, &right, 0).unwrap();
            let report = stacked.validate();
            assert!(report.is_valid(), "{:?}", report.violations);
        }
    }
}
