//! Built-in involutive knot complexes.
//!
//! Each entry returns the complex with its involution but without a
//! certificate; [`crate::complex::verify_iota_complex`] (called by
//! `CfkInput::new`) solves for the certificate deterministically.
//!
//! Determinism: entries are literal tables.

use std::sync::Arc;

use num_rational::Rational64;

use crate::complex::{
    mat_insert_add, EquivariantMap, Generator, GradedComplex, Grading, IotaComplex, Mat, Variance,
};
use crate::ring::{BiPoly, Mono};

/// Names of the built-in complexes.
#[must_use]
pub fn names() -> &'static [&'static str] {
    &["unknot", "trefoil_right", "trefoil_left", "figure_eight"]
}

/// Looks up a built-in complex by name.
#[must_use]
pub fn by_name(name: &str) -> Option<IotaComplex> {
    match name {
        "unknot" => Some(unknot()),
        "trefoil_right" => Some(trefoil_right()),
        "trefoil_left" => Some(trefoil_left()),
        "figure_eight" => Some(figure_eight()),
        _ => None,
    }
}

fn build(
    gens: &[(&str, i64, i64)],
    diff: &[(&str, &str, i64, i64)],
    iota: &[(&str, &str, i64, i64)],
) -> IotaComplex {
    let generators: Vec<Generator> = gens
        .iter()
        .map(|(label, w, z)| Generator {
            label: (*label).to_string(),
            grading: Grading::new(Rational64::from_integer(*w), Rational64::from_integer(*z)),
        })
        .collect();
    let index = |label: &str| generators.iter().position(|g| g.label == label).expect("label");
    let table = |rows: &[(&str, &str, i64, i64)]| -> Mat {
        let mut mat = Mat::new();
        for (from, to, u, v) in rows {
            let mono: BiPoly = Mono::new(*u, *v).expect("polynomial entry").into();
            mat_insert_add(&mut mat, (index(to), index(from)), &mono);
        }
        mat
    };
    let diff = table(diff);
    let iota_entries = table(iota);
    let complex = Arc::new(GradedComplex::new(generators, diff));
    let iota = EquivariantMap {
        source: Arc::clone(&complex),
        target: Arc::clone(&complex),
        entries: iota_entries,
        bidegree: (Rational64::default(), Rational64::default()),
        variance: Variance::Skew,
    };
    IotaComplex { complex, iota, certificate: None }
}

/// The unknot: one generator, zero differential, identity involution.
#[must_use]
pub fn unknot() -> IotaComplex {
    build(&[("x", 0, 0)], &[], &[("x", "x", 0, 0)])
}

/// The right-handed trefoil.
#[must_use]
pub fn trefoil_right() -> IotaComplex {
    build(
        &[("a", 0, -2), ("b", -1, -1), ("c", -2, 0)],
        &[("b", "a", 1, 0), ("b", "c", 0, 1)],
        &[("a", "c", 0, 0), ("b", "b", 0, 0), ("c", "a", 0, 0)],
    )
}

/// The left-handed trefoil.
#[must_use]
pub fn trefoil_left() -> IotaComplex {
    build(
        &[("a", 2, 0), ("b", 1, 1), ("c", 0, 2)],
        &[("a", "b", 0, 1), ("c", "b", 1, 0)],
        &[("a", "c", 0, 0), ("b", "b", 0, 0), ("c", "a", 0, 0)],
    )
}

/// The figure-eight knot.
#[must_use]
pub fn figure_eight() -> IotaComplex {
    build(
        &[("a", 1, -1), ("b", 0, 0), ("c", 0, 0), ("d", 0, 0), ("e", -1, 1)],
        &[("a", "d", 0, 1), ("b", "a", 1, 0), ("b", "e", 0, 1), ("e", "d", 1, 0)],
        &[
            ("a", "e", 0, 0),
            ("b", "b", 0, 0),
            ("b", "c", 0, 0),
            ("c", "c", 0, 0),
            ("c", "d", 0, 0),
            ("d", "d", 0, 0),
            ("e", "a", 0, 0),
        ],
    )
}
