//! Result emission: structured JSON documents and sweep CSV.
//!
//! Machine-readable outputs are deterministic: keys are sorted, numbers
//! carry full round-trip precision in JSON and 13 significant digits in
//! CSV, and metadata contains only reproducible values (tool version,
//! scenario content hash, seed) and never timestamps, so re-running a
//! seeded command produces byte-identical artifacts.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use trimarket::{SeriesTrend, SweepResult, SweepSpec};

/// Reproducibility metadata embedded in every output document.
#[derive(Debug, Clone)]
pub struct RunMeta {
    pub scenario_sha256: String,
    pub label: Option<String>,
    pub seed: Option<u64>,
    pub rng: Option<&'static str>,
}

impl RunMeta {
    pub fn to_value(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("tool_version".into(), env!("CARGO_PKG_VERSION").into());
        m.insert(
            "scenario_sha256".into(),
            self.scenario_sha256.clone().into(),
        );
        if let Some(label) = &self.label {
            m.insert("scenario_label".into(), label.clone().into());
        }
        if let Some(seed) = self.seed {
            m.insert("seed".into(), seed.into());
        }
        if let Some(rng) = self.rng {
            m.insert("rng".into(), rng.into());
        }
        Value::Object(m)
    }
}

/// Assembles the fixed top-level document shape shared by all commands:
/// `command`, `metadata`, `params`, and the command's payload fields.
pub fn document(command: &str, meta: &RunMeta, params: Value, payload: Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), command.into());
    doc.insert("metadata".into(), meta.to_value());
    doc.insert("params".into(), params);
    if let Value::Object(fields) = payload {
        for (k, v) in fields {
            doc.insert(k, v);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).unwrap();
    text.push('\n');
    text
}

// ============================================================================
// Sweep CSV
// ============================================================================

/// Exact column schema of sweep CSV output.
pub const SWEEP_CSV_HEADER: &str =
    "param_value,p1,p2,p3,pi1,pi2,pi3,du,do,de,concavity_ok,feasible,error";

fn csv_num(x: f64) -> String {
    format!("{x:.12e}")
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(csv_num).unwrap_or_default()
}

/// Renders a sweep as CSV: `#` metadata lines, the fixed header, then one
/// row per evaluated point with 13-significant-digit numbers. Failed
/// points keep their row with empty value cells and the error code in the
/// last column.
pub fn sweep_csv(spec: &SweepSpec, result: &SweepResult, meta: &RunMeta) -> String {
    let mut out = String::new();
    out.push_str(&format!("# tool_version: {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# scenario_sha256: {}\n", meta.scenario_sha256));
    if let Some(label) = &meta.label {
        out.push_str(&format!("# scenario_label: {label}\n"));
    }
    out.push_str(&format!("# param: {}\n", result.param.name()));
    out.push_str(&format!(
        "# range: [{}, {}] points: {}\n",
        spec.lo,
        spec.hi,
        spec.point_count()
    ));
    if let Some(seed) = meta.seed {
        out.push_str(&format!("# seed: {seed}\n"));
    }
    for w in &result.warnings {
        out.push_str(&format!("# warning: {w}\n"));
    }
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in &result.rows {
        let p = row.prices;
        let pi = row.profits;
        let d = row.split;
        let cells = [
            csv_num(row.param_value),
            csv_opt(p.map(|p| p.p1)),
            csv_opt(p.map(|p| p.p2)),
            csv_opt(p.map(|p| p.p3)),
            csv_opt(pi.map(|v| v.pi1)),
            csv_opt(pi.map(|v| v.pi2)),
            csv_opt(pi.map(|v| v.pi3)),
            csv_opt(d.map(|v| v.d_u)),
            csv_opt(d.map(|v| v.d_o)),
            csv_opt(d.map(|v| v.d_e)),
            row.concavity_ok.to_string(),
            row.feasible.to_string(),
            row.error_code.clone().unwrap_or_default(),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Sweep as a structured document payload (rows plus optional trend
/// labels, which are omitted when too few rows evaluated).
pub fn sweep_payload(
    spec: &SweepSpec,
    result: &SweepResult,
    trends: Option<&[SeriesTrend]>,
) -> Value {
    let mut payload = serde_json::Map::new();
    payload.insert("param".into(), result.param.name().into());
    payload.insert(
        "range".into(),
        json!({"lo": spec.lo, "hi": spec.hi, "points": spec.point_count()}),
    );
    payload.insert(
        "warnings".into(),
        serde_json::to_value(&result.warnings).unwrap(),
    );
    payload.insert("rows".into(), serde_json::to_value(&result.rows).unwrap());
    if let Some(trends) = trends {
        payload.insert("trends".into(), serde_json::to_value(trends).unwrap());
    }
    Value::Object(payload)
}

// ============================================================================
// Writing
// ============================================================================

/// Writes the artifact to `out`, or to stdout when no path was given.
pub fn write_output(out: Option<&Path>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use trimarket::{ofat_sweep, MarketParams, SweepMode, SweepParam};

    fn base() -> MarketParams {
        MarketParams {
            alpha: 0.9,
            theta: 0.6,
            beta: 1.0,
            m: 1.0,
            t: 10.0,
            x: 0.86,
            mu1: 20.0,
            mu2: 20.0,
            c1: 175.0,
            c2: 140.0,
            c3: 140.0,
        }
    }

    fn meta() -> RunMeta {
        RunMeta {
            scenario_sha256: "ab".repeat(32),
            label: None,
            seed: None,
            rng: None,
        }
    }

    #[test]
    fn csv_header_is_exact_and_rows_match_point_count() {
        let spec = SweepSpec {
            base: base(),
            param: SweepParam::Beta,
            lo: 0.05,
            hi: 1.0,
            steps: 20,
            mode: SweepMode::Grid,
        };
        let result = ofat_sweep(&spec, true).unwrap();
        let csv = sweep_csv(&spec, &result, &meta());
        let lines: Vec<&str> = csv.lines().collect();
        let header_at = lines.iter().position(|l| !l.starts_with('#')).unwrap();
        assert_eq!(lines[header_at], SWEEP_CSV_HEADER);
        assert_eq!(lines.len() - header_at - 1, 20);
        // 13 significant digits in every numeric cell.
        let first_row: Vec<&str> = lines[header_at + 1].split(',').collect();
        assert_eq!(first_row.len(), 13);
        assert!(first_row[1].contains('e'));
        assert!(first_row[1].len() >= 14);
    }

    #[test]
    fn csv_error_rows_have_empty_value_cells() {
        let mut b = base();
        b.alpha = 0.85;
        let spec = SweepSpec {
            base: b,
            param: SweepParam::Theta,
            lo: 0.65,
            hi: 0.75,
            steps: 3,
            mode: SweepMode::Grid,
        };
        let result = ofat_sweep(&spec, true).unwrap();
        let csv = sweep_csv(&spec, &result, &meta());
        let row: Vec<&str> = csv
            .lines()
            .filter(|l| !l.starts_with('#'))
            .nth(2)
            .unwrap()
            .split(',')
            .collect();
        assert!(!row[0].is_empty());
        assert!(row[1].is_empty());
        assert!(row[9].is_empty());
        assert_eq!(row[11], "false");
        assert!(row[12].starts_with("degenerate_denominator"));
    }

    #[test]
    fn documents_are_deterministic() {
        let payload = json!({"zeta": 1.0, "alpha": [1, 2, 3]});
        let a = document("solve", &meta(), json!({"k": 0.5}), payload.clone());
        let b = document("solve", &meta(), json!({"k": 0.5}), payload);
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        assert!(a.contains("\"tool_version\""));
        assert!(a.contains("\"scenario_sha256\""));
    }
}
