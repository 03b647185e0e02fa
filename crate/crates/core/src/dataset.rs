//! Multi-label dataset representation and loaders.
//!
//! Only the label side of each example is stored. Each example holds a sparse,
//! index-sorted list of `(label, count)` pairs where `count` is the number of
//! times the label occurs in that example (1 for presence-only data).

use std::collections::HashMap;
use std::io::BufRead;
use std::str::FromStr;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::ParseError;

/// Supported on-disk dataset formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// One JSON object per line with a `labels` map of name to count.
    Jsonl,
    /// Whitespace-separated `index` or `index:count` tokens, one example per line.
    SparseText,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "sparse-text" => Ok(Format::SparseText),
            other => Err(format!("unknown format `{other}` (expected jsonl or sparse-text)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelDataset {
    label_names: Vec<String>,
    entries: Vec<Vec<(usize, u32)>>,
    example_ids: Option<Vec<String>>,
}

impl MultiLabelDataset {
    /// Builds a dataset from explicit rows.
    ///
    /// Duplicate labels within a row are merged by summing their counts. Rows
    /// must only reference labels below `label_names.len()` and carry positive
    /// counts.
    pub fn new(label_names: Vec<String>, rows: Vec<Vec<(usize, u32)>>) -> Result<Self, ParseError> {
        let q = label_names.len();
        if q == 0 {
            return Err(ParseError::NoLabels);
        }
        if rows.is_empty() {
            return Err(ParseError::Empty);
        }
        let mut entries = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            for &(label, count) in &row {
                if label >= q {
                    return Err(ParseError::LabelOutOfRange {
                        line: i + 1,
                        index: label,
                        q,
                    });
                }
                if count == 0 {
                    return Err(ParseError::NonPositiveCount {
                        line: i + 1,
                        value: "0".into(),
                    });
                }
            }
            entries.push(normalize_row(row));
        }
        Ok(Self {
            label_names,
            entries,
            example_ids: None,
        })
    }

    /// Presence-only dataset with labels named `"0"`, `"1"`, ...
    pub fn from_label_sets(q: usize, sets: &[Vec<usize>]) -> Result<Self, ParseError> {
        let names = (0..q).map(|i| i.to_string()).collect();
        let rows = sets.iter().map(|set| set.iter().map(|&l| (l, 1)).collect()).collect();
        Self::new(names, rows)
    }

    pub fn with_example_ids(mut self, ids: Vec<String>) -> Self {
        assert_eq!(ids.len(), self.entries.len(), "one id per example");
        self.example_ids = Some(ids);
        self
    }

    /// Number of examples (m).
    pub fn num_examples(&self) -> usize {
        self.entries.len()
    }

    /// Number of labels (q).
    pub fn num_labels(&self) -> usize {
        self.label_names.len()
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn example_ids(&self) -> Option<&[String]> {
        self.example_ids.as_deref()
    }

    /// Sparse `(label, count)` row of example `i`, sorted by label.
    pub fn labels_of(&self, i: usize) -> &[(usize, u32)] {
        &self.entries[i]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[(usize, u32)]> {
        self.entries.iter().map(Vec::as_slice)
    }

    /// Number of examples containing each label.
    pub fn label_presence(&self) -> Vec<usize> {
        let mut out = vec![0; self.num_labels()];
        for row in &self.entries {
            for &(l, _) in row {
                out[l] += 1;
            }
        }
        out
    }

    /// Multiplicity-weighted occurrence totals per label.
    pub fn label_occurrence(&self) -> Vec<u64> {
        let mut out = vec![0; self.num_labels()];
        for row in &self.entries {
            for &(l, c) in row {
                out[l] += u64::from(c);
            }
        }
        out
    }

    /// Reads a dataset from `reader` in the given format.
    pub fn load<R: BufRead>(reader: R, format: Format) -> Result<Self, ParseError> {
        match format {
            Format::SparseText => load_sparse_text(reader),
            Format::Jsonl => load_jsonl(reader),
        }
    }
}

fn normalize_row(mut row: Vec<(usize, u32)>) -> Vec<(usize, u32)> {
    row.sort_unstable_by_key(|&(l, _)| l);
    let mut out: Vec<(usize, u32)> = Vec::with_capacity(row.len());
    for (l, c) in row {
        match out.last_mut() {
            Some(last) if last.0 == l => last.1 += c,
            _ => out.push((l, c)),
        }
    }
    out
}

fn parse_count(raw: &str, line: usize) -> Result<u32, ParseError> {
    match raw.parse::<i64>() {
        Ok(v) if v >= 1 => u32::try_from(v).map_err(|_| ParseError::malformed(line, "count too large")),
        Ok(_) => Err(ParseError::NonPositiveCount {
            line,
            value: raw.to_string(),
        }),
        Err(_) => Err(ParseError::malformed(line, format!("invalid count `{raw}`"))),
    }
}

fn load_sparse_text<R: BufRead>(reader: R) -> Result<MultiLabelDataset, ParseError> {
    let mut declared_q: Option<usize> = None;
    let mut rows = Vec::new();
    let mut max_index: Option<usize> = None;

    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let trimmed = line.trim();
        if n == 0 {
            if let Some(rest) = trimmed.strip_prefix("#q") {
                let q = rest
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| ParseError::malformed(line_no, "header must be `#q <int>`"))?;
                declared_q = Some(q);
                continue;
            }
        }
        let mut row = Vec::new();
        for token in trimmed.split_whitespace() {
            let (idx, count) = match token.split_once(':') {
                Some((idx, count)) => (idx, parse_count(count, line_no)?),
                None => (token, 1),
            };
            let idx = idx
                .parse::<usize>()
                .map_err(|_| ParseError::malformed(line_no, format!("invalid label index `{idx}`")))?;
            if let Some(q) = declared_q {
                if idx >= q {
                    return Err(ParseError::LabelOutOfRange {
                        line: line_no,
                        index: idx,
                        q,
                    });
                }
            }
            max_index = Some(max_index.map_or(idx, |m| m.max(idx)));
            row.push((idx, count));
        }
        rows.push(row);
    }

    let q = match (declared_q, max_index) {
        (Some(q), _) => q,
        (None, Some(mx)) => mx + 1,
        (None, None) => 0,
    };
    let names = (0..q).map(|i| i.to_string()).collect();
    MultiLabelDataset::new(names, rows)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonHeader {
    label_names: Vec<String>,
}

fn load_jsonl<R: BufRead>(reader: R) -> Result<MultiLabelDataset, ParseError> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut fixed_names = false;
    let mut rows = Vec::new();
    let mut ids: Vec<Option<String>> = Vec::new();

    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(&line).map_err(|e| ParseError::malformed(line_no, format!("invalid JSON: {e}")))?;
        let Value::Object(obj) = value else {
            return Err(ParseError::malformed(line_no, "expected a JSON object"));
        };

        if rows.is_empty() && !fixed_names && obj.contains_key("label_names") {
            let header: JsonHeader = serde_json::from_value(Value::Object(obj))
                .map_err(|e| ParseError::malformed(line_no, format!("invalid header: {e}")))?;
            for name in header.label_names {
                if index.insert(name.clone(), names.len()).is_some() {
                    return Err(ParseError::malformed(line_no, format!("duplicate label `{name}`")));
                }
                names.push(name);
            }
            fixed_names = true;
            continue;
        }

        let (row, id) = parse_json_example(&obj, line_no, &mut names, &mut index, fixed_names)?;
        rows.push(row);
        ids.push(id);
    }

    let mut dataset = MultiLabelDataset::new(names, rows)?;
    if ids.iter().any(Option::is_some) {
        let ids = ids
            .into_iter()
            .enumerate()
            .map(|(i, id)| id.unwrap_or_else(|| i.to_string()))
            .collect();
        dataset = dataset.with_example_ids(ids);
    }
    Ok(dataset)
}

/// Label counts of one example plus its optional id.
type ParsedExample = (Vec<(usize, u32)>, Option<String>);

fn parse_json_example(
    obj: &Map<String, Value>,
    line_no: usize,
    names: &mut Vec<String>,
    index: &mut HashMap<String, usize>,
    fixed_names: bool,
) -> Result<ParsedExample, ParseError> {
    let labels = match obj.get("labels") {
        Some(Value::Object(labels)) => labels,
        Some(_) => return Err(ParseError::malformed(line_no, "`labels` must be an object")),
        None => return Err(ParseError::malformed(line_no, "missing `labels` field")),
    };
    let id = match obj.get("id") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(ParseError::malformed(line_no, "`id` must be a string")),
    };

    let mut row = Vec::with_capacity(labels.len());
    for (name, count) in labels {
        let count = match count {
            Value::Number(num) => match num.as_i64() {
                Some(v) if v >= 1 => u32::try_from(v).map_err(|_| ParseError::malformed(line_no, "count too large"))?,
                _ => {
                    return Err(ParseError::NonPositiveCount {
                        line: line_no,
                        value: num.to_string(),
                    })
                }
            },
            other => {
                return Err(ParseError::NonPositiveCount {
                    line: line_no,
                    value: other.to_string(),
                })
            }
        };
        let label = match index.get(name) {
            Some(&l) => l,
            None if fixed_names => {
                return Err(ParseError::malformed(
                    line_no,
                    format!("label `{name}` is not declared in the header"),
                ))
            }
            None => {
                let l = names.len();
                names.push(name.clone());
                index.insert(name.clone(), l);
                l
            }
        };
        row.push((label, count));
    }
    Ok((row, id))
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_text_tiny4() {
        let d = fixtures::tiny4();
        assert_eq!(d.num_examples(), 4);
        assert_eq!(d.num_labels(), 3);
        assert_eq!(d.labels_of(0), &[(0, 1)]);
        assert_eq!(d.labels_of(3), &[(0, 1), (1, 1), (2, 1)]);
        assert_eq!(d.label_names(), &["0", "1", "2"]);
    }

    #[test]
    fn sparse_text_header_and_counts() {
        let d = MultiLabelDataset::load("#q 5\n0:3 4\n\n2".as_bytes(), Format::SparseText).unwrap();
        assert_eq!(d.num_labels(), 5);
        assert_eq!(d.num_examples(), 3);
        assert_eq!(d.labels_of(0), &[(0, 3), (4, 1)]);
        assert!(d.labels_of(1).is_empty());
        assert_eq!(d.label_occurrence(), vec![3, 0, 1, 0, 1]);
    }

    #[test]
    fn sparse_text_errors_report_line() {
        let err = MultiLabelDataset::load("#q 2\n0\n1 2".as_bytes(), Format::SparseText).unwrap_err();
        assert!(matches!(
            err,
            ParseError::LabelOutOfRange {
                line: 3,
                index: 2,
                q: 2
            }
        ));

        let err = MultiLabelDataset::load("0\n1:0".as_bytes(), Format::SparseText).unwrap_err();
        assert!(matches!(err, ParseError::NonPositiveCount { line: 2, .. }));

        let err = MultiLabelDataset::load("0\nx".as_bytes(), Format::SparseText).unwrap_err();
        assert!(matches!(err, ParseError::Malformed { line: 2, .. }));
        assert!(err.to_string().starts_with("line 2"));
    }

    #[test]
    fn jsonl_multiplicity_and_first_seen_order() {
        let src = r#"{"labels": {"person": 3}, "id": "img1"}
{"labels": {"dog": 1, "person": 1}}
{"labels": {}}
"#;
        let d = MultiLabelDataset::load(src.as_bytes(), Format::Jsonl).unwrap();
        assert_eq!(d.num_examples(), 3);
        assert_eq!(d.label_names(), &["person", "dog"]);
        assert_eq!(d.labels_of(0), &[(0, 3)]);
        assert_eq!(d.labels_of(1), &[(0, 1), (1, 1)]);
        assert_eq!(d.example_ids().unwrap(), &["img1", "1", "2"]);
    }

    #[test]
    fn jsonl_header_fixes_label_order() {
        let src = "{\"label_names\": [\"b\", \"a\"]}\n{\"labels\": {\"a\": 1}}\n";
        let d = MultiLabelDataset::load(src.as_bytes(), Format::Jsonl).unwrap();
        assert_eq!(d.label_names(), &["b", "a"]);
        assert_eq!(d.labels_of(0), &[(1, 1)]);

        let bad = "{\"label_names\": [\"b\"]}\n{\"labels\": {\"a\": 1}}\n";
        assert!(MultiLabelDataset::load(bad.as_bytes(), Format::Jsonl).is_err());
    }

    #[test]
    fn jsonl_rejects_bad_counts_and_sparse_input() {
        let err = MultiLabelDataset::load("{\"labels\": {\"a\": 0}}".as_bytes(), Format::Jsonl).unwrap_err();
        assert!(matches!(err, ParseError::NonPositiveCount { line: 1, .. }));
        let err = MultiLabelDataset::load("0 1\n1".as_bytes(), Format::Jsonl).unwrap_err();
        assert!(matches!(err, ParseError::Malformed { line: 1, .. }));
    }
}
