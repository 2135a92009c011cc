//! CSV/JSON artifact writers.
//!
//! All artifacts are byte-deterministic: fixed column orders, shortest
//! round-trip float formatting, no timestamps. CSV files follow RFC 4180
//! (CRLF record separators; the all-numeric payloads need no quoting).

use std::fmt::Write as _;
use std::path::Path;

use crate::characteristics::{CharacteristicPaths, ComposedPaths, GapReport};
use crate::error::Result;
use crate::processes::PathBundle;
use crate::stats::EnsembleDistribution;

const CRLF: &str = "\r\n";

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Path bundle as CSV: `index,innovation,value,partial_sum`. Pre-sample rows
/// (index <= 0) carry the burn-in innovations with empty value fields, so
/// the file reconstructs the bundle completely.
pub fn write_path_bundle_csv(path: &Path, bundle: &PathBundle) -> Result<()> {
    let mut out = String::new();
    let _ = write!(out, "index,innovation,value,partial_sum{CRLF}");
    let burn = bundle.burn_in as isize;
    for k in (1 - burn)..=(bundle.len() as isize) {
        let e = bundle.innovation(k);
        if k < 1 {
            let _ = write!(out, "{k},{e},,{CRLF}");
        } else {
            let _ = write!(
                out,
                "{k},{e},{},{}{CRLF}",
                bundle.values[k as usize - 1],
                bundle.partial_sums[k as usize]
            );
        }
    }
    write_atomic(path, out.as_bytes())
}

/// Ensemble as a single-column CSV plus a JSON manifest next to it.
pub fn write_ensemble(dir: &Path, name: &str, ens: &EnsembleDistribution) -> Result<()> {
    let mut out = String::new();
    let _ = write!(out, "value{CRLF}");
    for v in ens.samples() {
        let _ = write!(out, "{v}{CRLF}");
    }
    write_atomic(&dir.join(format!("{name}.csv")), out.as_bytes())?;
    let manifest = serde_json::json!({
        "manifest": &ens.manifest,
        "flagged": ens.flagged(),
        "count": ens.len(),
    });
    write_json(&dir.join(format!("{name}.manifest.json")), &manifest)
}

/// Characteristic paths in long format: `s,component,value`. Composed paths
/// are written at their grid values with a `_composed` suffix.
pub fn write_characteristics_csv(
    path: &Path,
    empirical: &CharacteristicPaths,
    composed: Option<&ComposedPaths>,
) -> Result<()> {
    let mut out = String::new();
    let _ = write!(out, "s,component,value{CRLF}");
    let n = empirical.n as f64;
    let mut dump_step = |name: &str, values: &[f64]| {
        for (k, v) in values.iter().enumerate() {
            let _ = write!(out, "{},{name},{v}{CRLF}", k as f64 / n);
        }
    };
    dump_step("B1", &empirical.b1.values);
    dump_step("B2", &empirical.b2.values);
    dump_step("C11", &empirical.c11.values);
    dump_step("C12", &empirical.c12.values);
    dump_step("C22", &empirical.c22.values);
    if let Some(comp) = composed {
        let mut dump_lin = |name: &str, values: &[f64]| {
            for (k, v) in values.iter().enumerate() {
                let _ = write!(out, "{},{name},{v}{CRLF}", k as f64 / n);
            }
        };
        dump_lin("B1_composed", &comp.b1.values);
        dump_lin("B2_composed", &comp.b2.values);
        dump_lin("C11_composed", &comp.c11.values);
        dump_lin("C12_composed", &comp.c12.values);
        dump_lin("C22_composed", &comp.c22.values);
    }
    write_atomic(path, out.as_bytes())
}

/// Per-replication gap reports in long format: `rep,component,value`.
pub fn write_gap_reports_csv(path: &Path, gaps: &[GapReport]) -> Result<()> {
    let mut out = String::new();
    let _ = write!(out, "rep,component,value{CRLF}");
    for (rep, g) in gaps.iter().enumerate() {
        let _ = write!(out, "{rep},sup_jump,{}{CRLF}", g.sup_jump);
        let _ = write!(out, "{rep},sup_b1_gap,{}{CRLF}", g.sup_b_gap[0]);
        let _ = write!(out, "{rep},sup_b2_gap,{}{CRLF}", g.sup_b_gap[1]);
        let _ = write!(out, "{rep},sup_c11_gap,{}{CRLF}", g.sup_c11_gap);
        let _ = write!(out, "{rep},sup_c12_gap,{}{CRLF}", g.sup_c12_gap);
        let _ = write!(out, "{rep},sup_c22_gap,{}{CRLF}", g.sup_c22_gap);
        for (b, mass) in &g.big_jump_mass {
            let _ = write!(out, "{rep},big_jump_mass_b{b},{mass}{CRLF}");
        }
    }
    write_atomic(path, out.as_bytes())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
