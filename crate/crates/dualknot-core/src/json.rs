//! JSON interchange for complexes, involutions, and surgery output.
//!
//! The schema is shared by every command-line artifact:
//!
//! - generators as `{id, gr_w: [num, den], gr_z: [num, den]}`; as an input
//!   convenience a generator may instead carry `maslov`/`alexander`, which
//!   convert via `gr_w = M`, `gr_z = M - 2A`;
//! - differentials, involutions, and provenance maps as lists of
//!   `{from, to, u, v}` monomial entries, where repeated entries on the same
//!   cell add mod 2.
//!
//! Determinism: emission orders generators by position and entries by
//! `(from, to, u, v)`, so `parse(emit(x)) = x` bit-for-bit.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{
    mat_insert_add, EquivariantMap, Generator, GradedComplex, Grading, IotaComplex, Mat, Variance,
};
use crate::ring::{BiPoly, Mono};
use crate::smallmodel::SurgeryComplex;

/// Errors raised while converting documents to in-memory complexes.
#[derive(Debug, Error)]
pub enum JsonError {
    /// Two generators share an id.
    #[error("duplicate generator id {0:?}")]
    DuplicateId(String),
    /// An entry references an id that is not declared.
    #[error("unknown generator id {0:?}")]
    UnknownId(String),
    /// A generator declares neither `(gr_w, gr_z)` nor `(maslov, alexander)`.
    #[error("generator {0:?} is missing its grading")]
    MissingGrading(String),
    /// A grading pair has a zero denominator.
    #[error("generator {0:?} has a zero grading denominator")]
    ZeroDenominator(String),
}

/// A rational number as a `[numerator, denominator]` pair.
pub type RatPair = [i64; 2];

fn to_pair(r: Rational64) -> RatPair {
    [*r.numer(), *r.denom()]
}

fn from_pair(id: &str, pair: RatPair) -> Result<Rational64, JsonError> {
    if pair[1] == 0 {
        return Err(JsonError::ZeroDenominator(id.to_string()));
    }
    Ok(Rational64::new(pair[0], pair[1]))
}

/// A generator record.  Either both `gr_w` and `gr_z` are present, or both
/// `maslov` and `alexander` are.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDoc {
    /// Generator id (unique within the document).
    pub id: String,
    /// `gr_w` grading as `[num, den]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gr_w: Option<RatPair>,
    /// `gr_z` grading as `[num, den]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gr_z: Option<RatPair>,
    /// Maslov grading `M`; converts via `gr_w = M`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maslov: Option<RatPair>,
    /// Alexander grading `A`; converts via `gr_z = M - 2A`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alexander: Option<RatPair>,
}

/// One monomial entry of a matrix: the coefficient `U^u V^v` on the cell
/// `(to, from)`.  Repeated cells add mod 2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntryDoc {
    /// Source generator id.
    pub from: String,
    /// Target generator id.
    pub to: String,
    /// Exponent of `U` (negative exponents are accepted and marked Laurent).
    pub u: i64,
    /// Exponent of `V`.
    pub v: i64,
}

/// A complex with an optional involution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexDoc {
    /// Generators in canonical order.
    pub generators: Vec<GeneratorDoc>,
    /// Differential entries.
    pub differential: Vec<EntryDoc>,
    /// Involution entries, when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iota: Option<Vec<EntryDoc>>,
}

/// A named structure map retained from surgery assembly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceDoc {
    /// Symbolic name of the map (e.g. `v[0]`, `iota_A[-1]`).
    pub name: String,
    /// Source generator ids, in the map's own source order.
    pub source: Vec<String>,
    /// Target generator ids.
    pub target: Vec<String>,
    /// Bidegree as `[[num, den], [num, den]]`.
    pub bidegree: [RatPair; 2],
    /// `"equivariant"` or `"skew"`.
    pub variance: String,
    /// Matrix entries.
    pub entries: Vec<EntryDoc>,
}

/// Truncation window of a surgery document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationDoc {
    /// Truncation parameter.
    pub b: i64,
    /// Kept `A` indices, inclusive.
    pub a_range: [i64; 2],
    /// Kept `B` indices, inclusive.
    pub b_range: [i64; 2],
}

/// A surgery output document: the cone, its involution, and provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryDoc {
    /// Surgery coefficient.
    pub n: i64,
    /// Truncation window.
    pub truncation: TruncationDoc,
    /// The cone with its involution (when requested).
    pub complex: ComplexDoc,
    /// Retained structure maps.
    pub provenance: Vec<ProvenanceDoc>,
}

fn mat_entries(mat: &Mat, source: &GradedComplex, target: &GradedComplex) -> Vec<EntryDoc> {
    let mut out = Vec::new();
    for ((t, s), p) in mat {
        for m in &p.terms {
            out.push(EntryDoc {
                from: source.generators[*s].label.clone(),
                to: target.generators[*t].label.clone(),
                u: m.u_exp,
                v: m.v_exp,
            });
        }
    }
    out.sort();
    out
}

/// Emits a complex (and optionally its involution) as a document.
#[must_use]
pub fn emit_complex(complex: &GradedComplex, iota: Option<&EquivariantMap>) -> ComplexDoc {
    let generators = complex
        .generators
        .iter()
        .map(|g| GeneratorDoc {
            id: g.label.clone(),
            gr_w: Some(to_pair(g.grading.gr_w)),
            gr_z: Some(to_pair(g.grading.gr_z)),
            maslov: None,
            alexander: None,
        })
        .collect();
    ComplexDoc {
        generators,
        differential: mat_entries(&complex.diff, complex, complex),
        iota: iota.map(|map| mat_entries(&map.entries, complex, complex)),
    }
}

/// Emits an involutive complex.
#[must_use]
pub fn emit_iota_complex(ic: &IotaComplex) -> ComplexDoc {
    emit_complex(&ic.complex, Some(&ic.iota))
}

/// Emits a surgery output with provenance.
#[must_use]
pub fn emit_surgery(model: &SurgeryComplex) -> SurgeryDoc {
    let provenance = model
        .provenance
        .iter()
        .map(|(name, map)| ProvenanceDoc {
            name: name.clone(),
            source: map.source.generators.iter().map(|g| g.label.clone()).collect(),
            target: map.target.generators.iter().map(|g| g.label.clone()).collect(),
            bidegree: [to_pair(map.bidegree.0), to_pair(map.bidegree.1)],
            variance: match map.variance {
                Variance::Equivariant => "equivariant".to_string(),
                Variance::Skew => "skew".to_string(),
            },
            entries: mat_entries(&map.entries, &map.source, &map.target),
        })
        .collect();
    SurgeryDoc {
        n: model.n,
        truncation: TruncationDoc {
            b: model.truncation.b,
            a_range: [model.truncation.a_lo, model.truncation.a_hi],
            b_range: [model.truncation.b_lo, model.truncation.b_hi],
        },
        complex: emit_complex(&model.complex, Some(&model.involution)),
        provenance,
    }
}

fn doc_grading(doc: &GeneratorDoc) -> Result<Grading, JsonError> {
    if let (Some(w), Some(z)) = (doc.gr_w, doc.gr_z) {
        return Ok(Grading::new(from_pair(&doc.id, w)?, from_pair(&doc.id, z)?));
    }
    if let (Some(m), Some(a)) = (doc.maslov, doc.alexander) {
        let m = from_pair(&doc.id, m)?;
        let a = from_pair(&doc.id, a)?;
        return Ok(Grading::new(m, m - Rational64::from_integer(2) * a));
    }
    Err(JsonError::MissingGrading(doc.id.clone()))
}

fn doc_mat(
    entries: &[EntryDoc],
    index: &BTreeMap<String, usize>,
) -> Result<Mat, JsonError> {
    let mut mat = Mat::new();
    for e in entries {
        let s = *index.get(&e.from).ok_or_else(|| JsonError::UnknownId(e.from.clone()))?;
        let t = *index.get(&e.to).ok_or_else(|| JsonError::UnknownId(e.to.clone()))?;
        let mono: BiPoly = if e.u < 0 || e.v < 0 {
            Mono::laurent(e.u, e.v).into()
        } else {
            Mono::new(e.u, e.v).expect("nonnegative exponents").into()
        };
        mat_insert_add(&mut mat, (t, s), &mono);
    }
    Ok(mat)
}

/// Parses a complex document; the involution, when present, is returned as a
/// skew bidegree-`(0, 0)` endomorphism.
pub fn parse_complex(
    doc: &ComplexDoc,
) -> Result<(Arc<GradedComplex>, Option<EquivariantMap>), JsonError> {
    let mut index = BTreeMap::new();
    let mut generators = Vec::with_capacity(doc.generators.len());
    for (i, g) in doc.generators.iter().enumerate() {
        if index.insert(g.id.clone(), i).is_some() {
            return Err(JsonError::DuplicateId(g.id.clone()));
        }
        generators.push(Generator { label: g.id.clone(), grading: doc_grading(g)? });
    }
    let diff = doc_mat(&doc.differential, &index)?;
    let complex = Arc::new(GradedComplex::new(generators, diff));
    let iota = match &doc.iota {
        Some(entries) => Some(EquivariantMap {
            source: Arc::clone(&complex),
            target: Arc::clone(&complex),
            entries: doc_mat(entries, &index)?,
            bidegree: (Rational64::default(), Rational64::default()),
            variance: Variance::Skew,
        }),
        None => None,
    };
    Ok((complex, iota))
}

/// Parses a document that must carry an involution.
pub fn parse_iota_complex(doc: &ComplexDoc) -> Result<IotaComplex, JsonError> {
    let (complex, iota) = parse_complex(doc)?;
    let iota = iota.unwrap_or_else(|| {
        EquivariantMap::zero(
            Arc::clone(&complex),
            Arc::clone(&complex),
            (Rational64::default(), Rational64::default()),
            Variance::Skew,
        )
    });
    Ok(IotaComplex { complex, iota, certificate: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn round_trips_every_catalog_entry() {
        for name in catalog::names() {
            let ic = catalog::by_name(name).unwrap();
            let doc = emit_iota_complex(&ic);
            let text = serde_json::to_string_pretty(&doc).unwrap();
            let back: ComplexDoc = serde_json::from_str(&text).unwrap();
            assert_eq!(doc, back, "{name}: document round-trip");
            let parsed = parse_iota_complex(&back).unwrap();
            assert_eq!(emit_iota_complex(&parsed), doc, "{name}: semantic round-trip");
        }
    }

    #[test]
    fn maslov_alexander_input_converts_to_bigradings() {
        // M = 1, A = 1 converts to gr_w = 1, gr_z = -1.
        let doc = ComplexDoc {
            generators: vec![GeneratorDoc {
                id: "a".into(),
                gr_w: None,
                gr_z: None,
                maslov: Some([1, 1]),
                alexander: Some([1, 1]),
            }],
            differential: vec![],
            iota: None,
        };
        let (complex, _) = parse_complex(&doc).unwrap();
        let g = &complex.generators[0].grading;
        assert_eq!(*g.gr_w.numer(), 1);
        assert_eq!(*g.gr_z.numer(), -1);
    }

    #[test]
    fn duplicate_entries_add_mod_two() {
        let gen = |id: &str| GeneratorDoc {
            id: id.into(),
            gr_w: Some([0, 1]),
            gr_z: Some([0, 1]),
            maslov: None,
            alexander: None,
        };
        let entry = EntryDoc { from: "a".into(), to: "b".into(), u: 1, v: 0 };
        let doc = ComplexDoc {
            generators: vec![gen("a"), gen("b")],
            differential: vec![entry.clone(), entry],
            iota: None,
        };
        let (complex, _) = parse_complex(&doc).unwrap();
        assert!(complex.diff.values().all(BiPoly::is_zero));
    }

    #[test]
    fn unknown_ids_and_duplicates_are_rejected() {
        let gen = |id: &str| GeneratorDoc {
            id: id.into(),
            gr_w: Some([0, 1]),
            gr_z: Some([0, 1]),
            maslov: None,
            alexander: None,
        };
        let doc = ComplexDoc {
            generators: vec![gen("a"), gen("a")],
            differential: vec![],
            iota: None,
        };
        assert!(matches!(parse_complex(&doc), Err(JsonError::DuplicateId(_))));
        let doc = ComplexDoc {
            generators: vec![gen("a")],
            differential: vec![EntryDoc { from: "a".into(), to: "zz".into(), u: 0, v: 0 }],
            iota: None,
        };
        assert!(matches!(parse_complex(&doc), Err(JsonError::UnknownId(_))));
    }

    #[test]
    fn surgery_document_round_trips() {
        use crate::smallmodel::{surgery, CfkInput, FlipSpec};
        let c = CfkInput::new(catalog::figure_eight()).unwrap();
        let model = surgery(&c, 1, None, &FlipSpec::Default).unwrap();
        let doc = emit_surgery(&model);
        let text = serde_json::to_string(&doc).unwrap();
        let back: SurgeryDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(doc, back);
        // The embedded complex parses back to the same complex and involution.
        let parsed = parse_iota_complex(&back.complex).unwrap();
        assert_eq!(emit_complex(&parsed.complex, Some(&parsed.iota)), doc.complex);
    }
}
