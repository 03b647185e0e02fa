//! Comparison table rendering.

use evosplit_core::{FoldSpec, SplitReport};
use serde_json::{json, Map, Value};

pub struct Row {
    pub method: &'static str,
    pub report: Result<SplitReport, String>,
}

const MEASURES: [&str; 6] = ["ld", "ld_prime", "lpd", "ed", "fz", "flz"];
const HEADERS: [&str; 6] = ["LD", "LD'", "LPD", "ED", "FZ", "FLZ"];

fn value(r: &SplitReport, measure: &str) -> f64 {
    match measure {
        "ld" => r.ld,
        "ld_prime" => r.ld_prime,
        "lpd" => r.lpd,
        "ed" => r.ed,
        "fz" => r.fz as f64,
        "flz" => r.flz as f64,
        _ => unreachable!("known measure"),
    }
}

/// Index of the first successful row with the lowest value of each measure.
fn best_rows(rows: &[Row]) -> Vec<Option<usize>> {
    MEASURES
        .iter()
        .map(|&m| {
            rows.iter()
                .enumerate()
                .filter_map(|(i, r)| r.report.as_ref().ok().map(|rep| (i, value(rep, m))))
                .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
                    Some((_, bv)) if bv <= v => best,
                    _ => Some((i, v)),
                })
                .map(|(i, _)| i)
        })
        .collect()
}

/// Ties with the best value are marked too.
fn is_best(rows: &[Row], best: Option<usize>, row: usize, measure: &str) -> bool {
    match (best, &rows[row].report) {
        (Some(b), Ok(rep)) => {
            let target = value(rows[b].report.as_ref().expect("best row succeeded"), measure);
            value(rep, measure) == target
        }
        _ => false,
    }
}

/// Three significant digits in scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:.2e}")
}

pub fn render(rows: &[Row]) -> String {
    let best = best_rows(rows);
    let mut cells: Vec<Vec<String>> = vec![std::iter::once("method".to_string())
        .chain(HEADERS.iter().map(|h| h.to_string()))
        .collect()];
    for (i, row) in rows.iter().enumerate() {
        let mut line = vec![row.method.to_string()];
        match &row.report {
            Ok(rep) => {
                for (mi, &m) in MEASURES.iter().enumerate() {
                    let text = if m == "fz" || m == "flz" {
                        format!("{}", value(rep, m) as usize)
                    } else {
                        sci(value(rep, m))
                    };
                    let mark = if is_best(rows, best[mi], i, m) { "*" } else { "" };
                    line.push(format!("{text}{mark}"));
                }
            }
            Err(e) => line.push(format!("error: {e}")),
        }
        cells.push(line);
    }
    let widths: Vec<usize> = (0..=MEASURES.len())
        .map(|c| {
            cells
                .iter()
                .filter(|r| r.len() > MEASURES.len())
                .filter_map(|r| r.get(c))
                .map(String::len)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for line in &cells {
        let mut parts = Vec::new();
        for (c, cell) in line.iter().enumerate() {
            if line.len() <= MEASURES.len() && c == line.len() - 1 {
                parts.push(cell.clone());
            } else if c == 0 {
                parts.push(format!("{cell:<w$}", w = widths[c]));
            } else {
                parts.push(format!("{cell:>w$}", w = widths[c]));
            }
        }
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[Row], spec: &FoldSpec, seed: u64) -> Value {
    let best = best_rows(rows);
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|row| match &row.report {
            Ok(rep) => {
                let mut obj = match serde_json::to_value(rep).expect("report serializes") {
                    Value::Object(map) => map,
                    _ => unreachable!(),
                };
                obj.insert("method".into(), json!(row.method));
                obj.insert("status".into(), json!("ok"));
                Value::Object(obj)
            }
            Err(e) => json!({ "method": row.method, "status": "error", "error": e }),
        })
        .collect();
    let mut best_map = Map::new();
    for (mi, &m) in MEASURES.iter().enumerate() {
        best_map.insert(m.into(), json!(best[mi].map(|i| rows[i].method)));
    }
    json!({
        "seed": seed,
        "k": spec.k(),
        "proportions": spec.proportions(),
        "targets": spec.targets(),
        "rows": json_rows,
        "best": best_map,
    })
}
