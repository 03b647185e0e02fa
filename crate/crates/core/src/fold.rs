//! Fold specifications and fold assignments.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ParseError, SplitError};

/// Tolerance on the sum of user-supplied proportions.
pub const PROPORTION_TOLERANCE: f64 = 1e-9;

/// Number of folds with their desired proportions and exact example counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldSpec {
    proportions: Vec<f64>,
    targets: Vec<usize>,
}

impl FoldSpec {
    /// Derives exact targets from proportions by largest-remainder rounding.
    ///
    /// Remainder ties go to the lower fold index. Every fold must end up with
    /// at least one example.
    pub fn from_proportions(proportions: &[f64], m: usize) -> Result<Self, SplitError> {
        if proportions.is_empty() {
            return Err(SplitError::NoFolds);
        }
        if proportions.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(SplitError::InvalidProportion);
        }
        let sum: f64 = proportions.iter().sum();
        if (sum - 1.0).abs() > PROPORTION_TOLERANCE {
            return Err(SplitError::ProportionSum(sum));
        }
        let targets = largest_remainder(proportions, m);
        if let Some(fold) = targets.iter().position(|&c| c == 0) {
            return Err(SplitError::EmptyFold { fold });
        }
        Ok(Self {
            proportions: proportions.to_vec(),
            targets,
        })
    }

    /// `k` folds of (almost) equal size.
    pub fn equal(k: usize, m: usize) -> Result<Self, SplitError> {
        if k == 0 {
            return Err(SplitError::NoFolds);
        }
        Self::from_proportions(&vec![1.0 / k as f64; k], m)
    }

    /// Uses explicit targets; proportions become `c_j / m`.
    pub fn from_targets(targets: &[usize]) -> Result<Self, SplitError> {
        if targets.is_empty() {
            return Err(SplitError::NoFolds);
        }
        if let Some(fold) = targets.iter().position(|&c| c == 0) {
            return Err(SplitError::EmptyFold { fold });
        }
        let m: usize = targets.iter().sum();
        Ok(Self {
            proportions: targets.iter().map(|&c| c as f64 / m as f64).collect(),
            targets: targets.to_vec(),
        })
    }

    pub fn k(&self) -> usize {
        self.targets.len()
    }

    pub fn proportions(&self) -> &[f64] {
        &self.proportions
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Total number of examples the spec distributes.
    pub fn total(&self) -> usize {
        self.targets.iter().sum()
    }

    pub(crate) fn check_len(&self, m: usize) -> Result<(), SplitError> {
        if self.total() == m {
            Ok(())
        } else {
            Err(SplitError::TargetSum {
                expected: m,
                actual: self.total(),
            })
        }
    }
}

fn largest_remainder(proportions: &[f64], m: usize) -> Vec<usize> {
    let exact: Vec<f64> = proportions.iter().map(|r| r * m as f64).collect();
    let mut targets: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..proportions.len()).collect();
    // Stable sort keeps lower indices first among equal remainders.
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra)
    });
    let mut assigned: usize = targets.iter().sum();
    let mut cursor = 0;
    while assigned < m {
        targets[order[cursor % order.len()]] += 1;
        assigned += 1;
        cursor += 1;
    }
    // Floating error can overshoot by a unit; take it back from the smallest remainders.
    let mut cursor = order.len();
    while assigned > m {
        cursor = if cursor == 0 { order.len() - 1 } else { cursor - 1 };
        let fold = order[cursor];
        if targets[fold] > 0 {
            targets[fold] -= 1;
            assigned -= 1;
        }
    }
    targets
}

/// One fold index per example.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(fold_of: Vec<usize>) -> Self {
        Self(fold_of)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn fold_of(&self, example: usize) -> usize {
        self.0[example]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub(crate) fn genes_mut(&mut self) -> &mut [usize] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// Number of examples in each of `k` folds. Out-of-range folds are ignored.
    pub fn fold_sizes(&self, k: usize) -> Vec<usize> {
        let mut sizes = vec![0; k];
        for &f in &self.0 {
            if f < k {
                sizes[f] += 1;
            }
        }
        sizes
    }

    /// Checks length and fold range against a dataset of `m` examples.
    pub fn validate(&self, m: usize, k: usize) -> Result<(), SplitError> {
        if self.len() != m {
            return Err(SplitError::LengthMismatch {
                expected: m,
                actual: self.len(),
            });
        }
        if let Some((example, &fold)) = self.0.iter().enumerate().find(|(_, &f)| f >= k) {
            return Err(SplitError::FoldOutOfRange { example, fold, k });
        }
        Ok(())
    }

    /// True when every fold holds exactly its target count.
    pub fn is_size_feasible(&self, spec: &FoldSpec) -> bool {
        self.check_sizes(spec).is_ok()
    }

    pub(crate) fn check_sizes(&self, spec: &FoldSpec) -> Result<(), SplitError> {
        self.validate(spec.total(), spec.k())?;
        let sizes = self.fold_sizes(spec.k());
        for (fold, (&actual, &target)) in sizes.iter().zip(spec.targets()).enumerate() {
            if actual != target {
                return Err(SplitError::SizeInfeasible { fold, actual, target });
            }
        }
        Ok(())
    }

    /// Writes `example_index,fold` CSV with a header row and LF endings.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(["example_index", "fold"])?;
        for (i, f) in self.0.iter().enumerate() {
            w.write_record([i.to_string(), f.to_string()])?;
        }
        w.flush()
    }

    /// Reads the CSV written by [`Assignment::write_csv`].
    ///
    /// Rows may come in any order but every index in `0..n` must appear exactly once.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, ParseError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| ParseError::malformed(1, e.to_string()))?
            .clone();
        if headers.len() != 2 || &headers[0] != "example_index" || &headers[1] != "fold" {
            return Err(ParseError::malformed(1, "expected header `example_index,fold`"));
        }
        let mut pairs = Vec::new();
        for (n, record) in rdr.records().enumerate() {
            let line = n + 2;
            let record = record.map_err(|e| ParseError::malformed(line, e.to_string()))?;
            if record.len() != 2 {
                return Err(ParseError::malformed(line, "expected two columns"));
            }
            let idx: usize = record[0]
                .parse()
                .map_err(|_| ParseError::malformed(line, format!("invalid example index `{}`", &record[0])))?;
            let fold: usize = record[1]
                .parse()
                .map_err(|_| ParseError::malformed(line, format!("invalid fold `{}`", &record[1])))?;
            pairs.push((line, idx, fold));
        }
        let n = pairs.len();
        let mut fold_of = vec![usize::MAX; n];
        for (line, idx, fold) in pairs {
            if idx >= n {
                return Err(ParseError::malformed(
                    line,
                    format!("example index {idx} out of range for {n} rows"),
                ));
            }
            if fold_of[idx] != usize::MAX {
                return Err(ParseError::malformed(line, format!("example index {idx} listed twice")));
            }
            fold_of[idx] = fold;
        }
        Ok(Self(fold_of))
    }
}

impl From<Vec<usize>> for Assignment {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn largest_remainder_ties_go_to_lower_index() {
        let spec = FoldSpec::equal(3, 10).unwrap();
        assert_eq!(spec.targets(), &[4, 3, 3]);
        let spec = FoldSpec::from_proportions(&[0.5, 0.5], 5).unwrap();
        assert_eq!(spec.targets(), &[3, 2]);
        let spec = FoldSpec::from_proportions(&[0.1, 0.3, 0.6], 7).unwrap();
        // exact: 0.7, 2.1, 4.2
        assert_eq!(spec.targets(), &[1, 2, 4]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(
            FoldSpec::from_proportions(&[0.5, 0.4], 10),
            Err(SplitError::ProportionSum(0.9))
        );
        assert_eq!(
            FoldSpec::from_proportions(&[0.99, 0.01], 10),
            Err(SplitError::EmptyFold { fold: 1 })
        );
        assert_eq!(FoldSpec::from_targets(&[2, 0]), Err(SplitError::EmptyFold { fold: 1 }));
        assert_eq!(FoldSpec::from_targets(&[]), Err(SplitError::NoFolds));
    }

    #[test]
    fn targets_drive_proportions() {
        let spec = FoldSpec::from_targets(&[1, 3]).unwrap();
        assert_eq!(spec.proportions(), &[0.25, 0.75]);
        assert_eq!(spec.total(), 4);
    }

    #[test]
    fn csv_round_trip() {
        let a = Assignment::new(vec![0, 1, 0, 1]);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "example_index,fold\n0,0\n1,1\n2,0\n3,1\n"
        );
        assert_eq!(Assignment::read_csv(buf.as_slice()).unwrap(), a);
    }

    #[test]
    fn csv_rejects_duplicates_and_gaps() {
        assert!(Assignment::read_csv("example_index,fold\n0,0\n0,1\n".as_bytes()).is_err());
        assert!(Assignment::read_csv("example_index,fold\n0,0\n2,1\n".as_bytes()).is_err());
        assert!(Assignment::read_csv("idx,fold\n0,0\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn rounding_preserves_total(m in 1usize..500, weights in prop::collection::vec(1u32..50, 1..12)) {
            let total: u32 = weights.iter().sum();
            let props: Vec<f64> = weights.iter().map(|&w| w as f64 / total as f64).collect();
            let targets = largest_remainder(&props, m);
            prop_assert_eq!(targets.iter().sum::<usize>(), m);
            for (t, r) in targets.iter().zip(&props) {
                prop_assert!((*t as f64 - r * m as f64).abs() < 1.0 + 1e-9);
            }
        }
    }
}
