//! `dualknot`: command-line front end for the surgery small-model library.
//!
//! Subcommands wrap the library operations one-to-one: `validate` checks a
//! complex document, `surgery` assembles the cone, `reduce` computes the
//! minimal model, `local-class` runs the local-triviality search,
//! `oracle-check` cross-checks every closed-form map against the expanded
//! model, and `catalog` prints a built-in complex.
//!
//! Wherever a command takes `--input`, a built-in catalog name (see
//! `dualknot catalog --list`) may be given instead of a file path.
//!
//! Exit codes: 0 on success, 1 on validation or check failure, 2 on usage
//! errors.  Determinism: output is canonical JSON; equal inputs and flags
//! give byte-identical output.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dualknot_core::catalog;
use dualknot_core::complex::{reduce, verify_iota_complex, EquivariantMap, IotaComplex, Variance};
use dualknot_core::json::{
    emit_complex, emit_iota_complex, emit_surgery, parse_complex, parse_iota_complex, ComplexDoc,
    EntryDoc, ProvenanceDoc, SurgeryDoc,
};
use dualknot_core::localclass::{local_triviality_check, LocalError, TrivialVerdict};
use dualknot_core::oracle;
use dualknot_core::ring::Mono;
use dualknot_core::smallmodel::{build_summand, surgery, CfkInput, FlipSpec, Kind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum LogLevel {
    /// No diagnostics.
    Quiet,
    /// Progress messages on stderr.
    Info,
    /// Verbose diagnostics on stderr.
    Debug,
}

#[derive(Debug, Clone, Copy)]
struct Log {
    level: LogLevel,
}

impl Log {
    fn info(&self, msg: impl AsRef<str>) {
        if self.level >= LogLevel::Info {
            eprintln!("[info] {}", msg.as_ref());
        }
    }

    fn debug(&self, msg: impl AsRef<str>) {
        if self.level >= LogLevel::Debug {
            eprintln!("[debug] {}", msg.as_ref());
        }
    }
}

#[derive(Parser)]
#[command(name = "dualknot", version, about = "Dual-knot surgery small-model toolkit")]
struct Cli {
    /// Diagnostic verbosity on stderr.
    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Info)]
    log: LogLevel,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a complex document: gradings, d^2 = 0, and the involution
    /// axioms when an involution is present.
    Validate {
        /// Input file path or catalog name.
        input: String,
    },
    /// Assemble the surgery cone with its involution and provenance maps.
    Surgery {
        /// Input file path or catalog name.
        #[arg(long)]
        input: String,
        /// Surgery coefficient (nonzero).
        #[arg(long)]
        n: i64,
        /// Truncation window: "minimal" or "b=K".
        #[arg(long, default_value = "minimal")]
        truncation: String,
        /// Flip maps: "default" or a JSON file of per-index overrides.
        #[arg(long, default_value = "default")]
        flip: String,
        /// Include the involution in the output complex.
        #[arg(long)]
        involutive: bool,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<String>,
    },
    /// Reduce a complex (or a surgery document) to its minimal model,
    /// transporting the involution when present.
    Reduce {
        /// Input file path or catalog name.
        #[arg(long)]
        input: String,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<String>,
    },
    /// Build the local model of a unit surgery and search for a local
    /// trivialization; prints a JSON verdict with witnesses.
    LocalClass {
        /// Input file path or catalog name.
        #[arg(long)]
        input: String,
        /// Surgery coefficient (+1 or -1).
        #[arg(long)]
        n: i64,
    },
    /// Cross-check every closed-form map against the expanded-model oracle;
    /// exits nonzero on any matrix mismatch.
    OracleCheck {
        /// Input file path or catalog name.
        #[arg(long)]
        input: String,
        /// Summand index range "LO..HI" (inclusive; defaults to the genus
        /// window).
        #[arg(long, allow_hyphen_values = true)]
        s_range: Option<String>,
    },
    /// Print a built-in complex as canonical JSON.
    Catalog {
        /// Catalog name; omit with --list to enumerate.
        name: Option<String>,
        /// List the available names.
        #[arg(long)]
        list: bool,
    },
}

/// Loads an involutive complex from a catalog name or a JSON file.
fn load_input(input: &str, log: Log) -> Result<IotaComplex> {
    if let Some(ic) = catalog::by_name(input) {
        log.debug(format!("loaded catalog entry {input:?}"));
        return Ok(ic);
    }
    let text = fs::read_to_string(input).with_context(|| format!("reading {input}"))?;
    let doc: ComplexDoc =
        serde_json::from_str(&text).with_context(|| format!("parsing {input}"))?;
    log.debug(format!("parsed {} generators from {input}", doc.generators.len()));
    Ok(parse_iota_complex(&doc)?)
}

fn write_output(out: Option<&str>, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {path}"))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Emits a named map in the provenance format.
fn map_doc(name: &str, map: &EquivariantMap) -> ProvenanceDoc {
    let mut entries: Vec<EntryDoc> = Vec::new();
    for ((t, s), p) in &map.entries {
        for m in &p.terms {
            entries.push(EntryDoc {
                from: map.source.generators[*s].label.clone(),
                to: map.target.generators[*t].label.clone(),
                u: m.u_exp,
                v: m.v_exp,
            });
        }
    }
    entries.sort();
    ProvenanceDoc {
        name: name.to_string(),
        source: map.source.generators.iter().map(|g| g.label.clone()).collect(),
        target: map.target.generators.iter().map(|g| g.label.clone()).collect(),
        bidegree: [
            [*map.bidegree.0.numer(), *map.bidegree.0.denom()],
            [*map.bidegree.1.numer(), *map.bidegree.1.denom()],
        ],
        variance: match map.variance {
            Variance::Equivariant => "equivariant".to_string(),
            Variance::Skew => "skew".to_string(),
        },
        entries,
    }
}

fn cmd_validate(input: &str, log: Log) -> Result<u8> {
    let ic = match load_input(input, log) {
        Ok(ic) => ic,
        Err(err) => {
            eprintln!("error: {err:#}");
            return Ok(1);
        }
    };
    let mut violations = ic.complex.validate().violations;
    violations.extend(verify_iota_complex(&ic).violations);
    if violations.is_empty() {
        log.info(format!("{input}: valid ({} generators)", ic.complex.rank()));
        println!("ok");
        Ok(0)
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Ok(1)
    }
}

/// Per-index flip overrides: entries between the tilde summand at `s` and
/// the plain summand at `s + n`, referencing their generator labels.
#[derive(serde::Deserialize)]
struct FlipFileDoc {
    overrides: Vec<FlipOverrideDoc>,
}

#[derive(serde::Deserialize)]
struct FlipOverrideDoc {
    s: i64,
    entries: Vec<EntryDoc>,
}

fn parse_flip(flip: &str, c: &CfkInput, n: i64) -> Result<FlipSpec> {
    if flip == "default" {
        return Ok(FlipSpec::Default);
    }
    let text = fs::read_to_string(flip).with_context(|| format!("reading {flip}"))?;
    let doc: FlipFileDoc =
        serde_json::from_str(&text).with_context(|| format!("parsing {flip}"))?;
    let mut overrides = BTreeMap::new();
    for over in doc.overrides {
        let src = build_summand(c, Kind::Btilde, over.s, n);
        let dst = build_summand(c, Kind::B, over.s + n, n);
        let index = |complex: &Arc<dualknot_core::complex::GradedComplex>, label: &str| {
            complex
                .generators
                .iter()
                .position(|g| g.label == label)
                .ok_or_else(|| anyhow!("flip override {}: unknown generator {label:?}", over.s))
        };
        let mut entries = dualknot_core::complex::Mat::new();
        for e in &over.entries {
            let s_idx = index(&src.complex, &e.from)?;
            let t_idx = index(&dst.complex, &e.to)?;
            let mono = Mono::new(e.u, e.v)
                .map_err(|err| anyhow!("flip override {}: {err}", over.s))?;
            dualknot_core::complex::mat_insert_add(&mut entries, (t_idx, s_idx), &mono.into());
        }
        let map = EquivariantMap {
            source: Arc::clone(&src.complex),
            target: Arc::clone(&dst.complex),
            entries,
            bidegree: (num_zero(), num_zero()),
            variance: Variance::Equivariant,
        };
        let report = map.validate(true);
        if !report.is_valid() {
            return Err(anyhow!(
                "flip override {} is not a homogeneous polynomial map: {}",
                over.s,
                report.violations.join("; ")
            ));
        }
        overrides.insert(over.s, map);
    }
    Ok(FlipSpec::Overrides(overrides))
}

fn num_zero() -> num_rational::Rational64 {
    num_rational::Rational64::default()
}

#[allow(clippy::too_many_arguments)]
fn cmd_surgery(
    input: &str,
    n: i64,
    truncation: &str,
    flip: &str,
    involutive: bool,
    out: Option<&str>,
    log: Log,
) -> Result<u8> {
    if n == 0 {
        eprintln!("error: the surgery coefficient must be nonzero");
        return Ok(2);
    }
    let b_override = match truncation {
        "minimal" => None,
        other => match other.strip_prefix("b=").and_then(|k| k.parse::<i64>().ok()) {
            Some(b) => Some(b),
            None => {
                eprintln!("error: --truncation must be \"minimal\" or \"b=K\" (got {other:?})");
                return Ok(2);
            }
        },
    };
    let ic = load_input(input, log)?;
    let c = match CfkInput::new(ic) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(1);
        }
    };
    for w in &c.warnings {
        log.info(format!("warning: {w}"));
    }
    let flip_spec = parse_flip(flip, &c, n)?;
    let model = match surgery(&c, n, b_override, &flip_spec) {
        Ok(model) => model,
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(1);
        }
    };
    log.info(format!(
        "assembled cone: {} generators, window A[{}, {}], B[{}, {}]",
        model.complex.rank(),
        model.truncation.a_lo,
        model.truncation.a_hi,
        model.truncation.b_lo,
        model.truncation.b_hi
    ));
    let mut doc = emit_surgery(&model);
    if !involutive {
        doc.complex.iota = None;
    }
    write_output(out, &doc)?;
    Ok(0)
}

fn cmd_reduce(input: &str, out: Option<&str>, log: Log) -> Result<u8> {
    // Accept a plain complex document, a surgery document, or a catalog name.
    let doc: ComplexDoc = if catalog::by_name(input).is_some() {
        emit_iota_complex(&catalog::by_name(input).expect("checked"))
    } else {
        let text = fs::read_to_string(input).with_context(|| format!("reading {input}"))?;
        match serde_json::from_str::<SurgeryDoc>(&text) {
            Ok(surgery_doc) => surgery_doc.complex,
            Err(_) => serde_json::from_str(&text).with_context(|| format!("parsing {input}"))?,
        }
    };
    let (complex, iota) = match parse_complex(&doc) {
        Ok(parsed) => parsed,
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(1);
        }
    };
    let transported: Vec<EquivariantMap> = iota.iter().cloned().collect();
    let red = reduce(&complex, &transported);
    log.info(format!("reduced {} generators to {}", complex.rank(), red.reduced.rank()));
    let out_doc = emit_complex(&red.reduced, red.transported.first());
    write_output(out, &out_doc)?;
    Ok(0)
}

#[derive(serde::Serialize)]
struct LocalClassDoc {
    n: i64,
    verdict: String,
    reason: String,
    reduced: ComplexDoc,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    witnesses: Vec<ProvenanceDoc>,
}

fn cmd_local_class(input: &str, n: i64, log: Log) -> Result<u8> {
    let ic = load_input(input, log)?;
    let c = match CfkInput::new(ic) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(1);
        }
    };
    let report = match local_triviality_check(&c, n) {
        Ok(report) => report,
        Err(LocalError::Coefficient(bad)) => {
            eprintln!("error: --n must be +1 or -1 (got {bad})");
            return Ok(2);
        }
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(1);
        }
    };
    log.info(format!("reduced local model has {} generators", report.reduced.complex.rank()));
    let mut witnesses = Vec::new();
    if let Some(w) = &report.witness {
        witnesses.push(map_doc("forward", &w.forward));
        witnesses.push(map_doc("backward", &w.backward));
        if let Some(h) = &w.forward_homotopy {
            witnesses.push(map_doc("forward_homotopy", h));
        }
        if let Some(h) = &w.backward_homotopy {
            witnesses.push(map_doc("backward_homotopy", h));
        }
    }
    let doc = LocalClassDoc {
        n,
        verdict: match report.verdict {
            TrivialVerdict::LocallyTrivial => "locally_trivial".to_string(),
            TrivialVerdict::Inconclusive => "inconclusive".to_string(),
        },
        reason: report.reason,
        reduced: emit_iota_complex(&report.reduced),
        witnesses,
    };
    write_output(None, &doc)?;
    Ok(0)
}

fn cmd_oracle_check(input: &str, s_range: Option<&str>, log: Log) -> Result<u8> {
    let ic = load_input(input, log)?;
    let c = match CfkInput::new(ic) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(1);
        }
    };
    let (lo, hi) = match s_range {
        None => oracle::default_range(&c),
        Some(text) => {
            let parsed = text
                .split_once("..")
                .and_then(|(a, b)| {
                    Some((a.trim().parse::<i64>().ok()?, b.trim().parse::<i64>().ok()?))
                });
            match parsed {
                Some(range) => range,
                None => {
                    eprintln!("error: --s-range must be \"LO..HI\" (got {text:?})");
                    return Ok(2);
                }
            }
        }
    };
    log.debug(format!("cross-checking summand indices {lo}..{hi}"));
    let report = oracle::cross_check(&c, lo, hi);
    for cmp in &report.comparisons {
        let status = if cmp.passed { "PASS" } else { "FAIL" };
        println!("{status} {}", cmp.name);
        if !cmp.passed {
            if let Some(detail) = &cmp.detail {
                println!("  {}", detail.replace('\n', "\n  "));
            }
        }
    }
    log.info(format!(
        "{} comparisons, {} failed",
        report.comparisons.len(),
        report.failures().len()
    ));
    Ok(u8::from(!report.all_passed()))
}

fn cmd_catalog(name: Option<&str>, list: bool) -> Result<u8> {
    if list {
        for name in catalog::names() {
            println!("{name}");
        }
        return Ok(0);
    }
    let Some(name) = name else {
        eprintln!("error: give a catalog name or --list");
        return Ok(2);
    };
    let Some(ic) = catalog::by_name(name) else {
        eprintln!("error: unknown catalog name {name:?} (try --list)");
        return Ok(2);
    };
    write_output(None, &emit_iota_complex(&ic))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log { level: cli.log };
    let result = match &cli.command {
        Command::Validate { input } => cmd_validate(input, log),
        Command::Surgery { input, n, truncation, flip, involutive, out } => {
            cmd_surgery(input, *n, truncation, flip, *involutive, out.as_deref(), log)
        }
        Command::Reduce { input, out } => cmd_reduce(input, out.as_deref(), log),
        Command::LocalClass { input, n } => cmd_local_class(input, *n, log),
        Command::OracleCheck { input, s_range } => {
            cmd_oracle_check(input, s_range.as_deref(), log)
        }
        Command::Catalog { name, list } => cmd_catalog(name.as_deref(), *list),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
