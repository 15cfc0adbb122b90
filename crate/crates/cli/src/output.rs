//! CSV and JSON artifact assembly. Floats are printed with 17 significant
//! digits so every value survives a parse round trip; CSV goes through the
//! `csv` writer for RFC-4180-style quoting.

use spectral_bounds::bounds::BoundResult;
use std::io::Write;
use std::path::Path;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows of a `bounds` run: header then one row per (k, inequality).
pub fn bounds_csv(results: &[BoundResult]) -> Result<Vec<u8>, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "id", "value", "terms", "note"])
        .map_err(|e| e.to_string())?;
    for r in results {
        let terms = r
            .terms
            .iter()
            .map(|t| format!("{}={}", t.name, fmt_f64(t.value)))
            .collect::<Vec<_>>()
            .join("|");
        w.write_record([
            r.k.to_string(),
            r.id.to_string(),
            fmt_f64(r.value),
            terms,
            r.note.clone(),
        ])
        .map_err(|e| e.to_string())?;
    }
    w.into_inner().map_err(|e| e.to_string())
}

pub fn bounds_json(
    config: serde_json::Value,
    results: &[BoundResult],
    diagnostics: serde_json::Value,
) -> Vec<u8> {
    let doc = serde_json::json!({
        "config": config,
        "rows": results,
        "diagnostics": diagnostics,
    });
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("serializable document");
    bytes.push(b'\n');
    bytes
}

pub fn write_artifact(output: Option<&Path>, bytes: &[u8]) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).map_err(|e| e.to_string())
        }
    }
}
