//! Whole-dataset imbalance measures for single labels and label pairs.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::dataset::MultiLabelDataset;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub m: usize,
    pub q: usize,
    /// Mean multiplicity-weighted label total per example.
    pub card: f64,
    pub dens: f64,
    /// Number of distinct label sets, ignoring multiplicities.
    pub div: usize,
    pub pdiv: f64,
    /// `m * q * div`.
    pub tcs_raw: f64,
    pub tcs_log: f64,
    pub avg_ir: f64,
    pub scumble: f64,
    /// Largest multiplicity-weighted label total of a single example.
    pub max_labels: u64,
    /// Largest per-label occurrence total divided by `m`.
    pub max_frequency: f64,
    pub per_label_presence: Vec<usize>,
    pub per_label_occurrence: Vec<u64>,
    /// Imbalance ratio per label; `NaN` for labels absent from the dataset.
    pub irlbl: Vec<f64>,
    /// Labels that occur in no example. They are left out of `avg_ir` and `scumble`.
    pub absent_labels: Vec<usize>,
}

/// An unordered label pair `(a, b)` with `a < b`.
pub type LabelPair = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStats {
    pub card2: f64,
    pub dens2: f64,
    pub div2: usize,
    pub pdiv2: f64,
    pub max_frequency2: f64,
    /// Every co-occurring pair with the number of examples containing it, sorted by pair.
    pub pair_index: Vec<(LabelPair, usize)>,
}

/// Computes the single-label measures.
pub fn dataset_stats(d: &MultiLabelDataset) -> DatasetStats {
    let m = d.num_examples();
    let q = d.num_labels();
    let presence = d.label_presence();
    let occurrence = d.label_occurrence();

    let mut total_labels: u64 = 0;
    let mut max_labels: u64 = 0;
    let mut distinct_sets: HashSet<Vec<usize>> = HashSet::new();
    for row in d.rows() {
        let size: u64 = row.iter().map(|&(_, c)| u64::from(c)).sum();
        total_labels += size;
        max_labels = max_labels.max(size);
        distinct_sets.insert(row.iter().map(|&(l, _)| l).collect());
    }

    let card = total_labels as f64 / m as f64;
    let div = distinct_sets.len();
    let tcs_raw = m as f64 * q as f64 * div as f64;

    let irlbl = imbalance_ratios(&presence);
    let absent_labels: Vec<usize> = (0..q).filter(|&l| presence[l] == 0).collect();
    let present: Vec<f64> = irlbl.iter().copied().filter(|v| v.is_finite()).collect();
    let avg_ir = if present.is_empty() {
        0.0
    } else {
        present.iter().sum::<f64>() / present.len() as f64
    };

    let scumble = d
        .rows()
        .map(|row| instance_scumble(row.iter().map(|&(l, _)| irlbl[l])))
        .sum::<f64>()
        / m as f64;

    let max_frequency = occurrence.iter().copied().max().unwrap_or(0) as f64 / m as f64;

    DatasetStats {
        m,
        q,
        card,
        dens: card / q as f64,
        div,
        pdiv: div as f64 / m as f64,
        tcs_raw,
        tcs_log: tcs_raw.log10(),
        avg_ir,
        scumble,
        max_labels,
        max_frequency,
        per_label_presence: presence,
        per_label_occurrence: occurrence,
        irlbl,
        absent_labels,
    }
}

/// `max presence / presence` per label, `NaN` where presence is zero.
pub fn imbalance_ratios(presence: &[usize]) -> Vec<f64> {
    let max = presence.iter().copied().max().unwrap_or(0) as f64;
    presence
        .iter()
        .map(|&p| if p == 0 { f64::NAN } else { max / p as f64 })
        .collect()
}

/// One minus the ratio of geometric to arithmetic mean of the instance's
/// imbalance ratios. Empty instances score 0.
fn instance_scumble(ratios: impl Iterator<Item = f64>) -> f64 {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut log_sum = 0.0;
    for r in ratios {
        n += 1;
        sum += r;
        log_sum += r.ln();
    }
    if n == 0 {
        return 0.0;
    }
    let arith = sum / n as f64;
    let geo = (log_sum / n as f64).exp();
    1.0 - geo / arith
}

/// Computes the label-pair measures. Multiplicities are ignored.
pub fn pair_stats(d: &MultiLabelDataset) -> PairStats {
    let m = d.num_examples();
    let q = d.num_labels();
    let mut counts: BTreeMap<LabelPair, usize> = BTreeMap::new();
    let mut total_pairs: usize = 0;
    for row in d.rows() {
        let n = row.len();
        total_pairs += n * n.saturating_sub(1) / 2;
        for (i, &(a, _)) in row.iter().enumerate() {
            for &(b, _) in &row[i + 1..] {
                *counts.entry((a, b)).or_default() += 1;
            }
        }
    }
    let card2 = total_pairs as f64 / m as f64;
    let div2 = counts.len();
    let max_pair = counts.values().copied().max().unwrap_or(0);
    PairStats {
        card2,
        dens2: card2 / q as f64,
        div2,
        pdiv2: div2 as f64 / m as f64,
        max_frequency2: max_pair as f64 / m as f64,
        pair_index: counts.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::tiny4;
    use crate::dataset::{Format, MultiLabelDataset};

    #[test]
    fn tiny4_single_label_measures() {
        let s = dataset_stats(&tiny4());
        assert_eq!(s.card, 2.0);
        assert!((s.dens - 0.6667).abs() < 1e-4);
        assert_eq!(s.div, 4);
        assert_eq!(s.pdiv, 1.0);
        assert_eq!(s.tcs_raw, 48.0);
        assert!((s.tcs_log - 1.6812).abs() < 1e-4);
        assert_eq!(s.irlbl, vec![1.0, 1.0, 1.5]);
        assert!((s.avg_ir - 1.1667).abs() < 1e-4);
        assert!((s.scumble - 0.00976).abs() < 1e-5);
        assert_eq!(s.max_labels, 3);
        assert_eq!(s.max_frequency, 0.75);
        assert!(s.absent_labels.is_empty());
    }

    #[test]
    fn tiny4_scumble_matches_straight_line_evaluation() {
        // e0, e1 have all-equal ratios; e2 = {1, 1.5}; e3 = {1, 1, 1.5}.
        let e2 = 1.0 - 1.5f64.sqrt() / 1.25;
        let e3 = 1.0 - 1.5f64.cbrt() / (3.5 / 3.0);
        let expected = (e2 + e3) / 4.0;
        let s = dataset_stats(&tiny4());
        assert!((s.scumble - expected).abs() < 1e-12);
    }

    #[test]
    fn single_uniform_label() {
        let d = MultiLabelDataset::from_label_sets(1, &vec![vec![0]; 5]).unwrap();
        let s = dataset_stats(&d);
        assert_eq!(s.card, 1.0);
        assert_eq!(s.dens, 1.0);
        assert_eq!(s.div, 1);
        assert_eq!(s.pdiv, 0.2);
        assert_eq!(s.avg_ir, 1.0);
        assert_eq!(s.scumble, 0.0);
    }

    #[test]
    fn multiplicities_weight_card_but_not_div() {
        let d = MultiLabelDataset::load("0:3 1\n0\n1".as_bytes(), Format::SparseText).unwrap();
        let s = dataset_stats(&d);
        assert!((s.card - 6.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.max_labels, 4);
        assert_eq!(s.div, 3);
        assert_eq!(s.per_label_occurrence, vec![4, 2]);
        assert_eq!(s.per_label_presence, vec![2, 2]);
        assert_eq!(s.irlbl, vec![1.0, 1.0]);
        assert!((s.max_frequency - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn absent_labels_are_flagged_and_excluded() {
        let d = MultiLabelDataset::load("#q 3\n0\n0 1\n".as_bytes(), Format::SparseText).unwrap();
        let s = dataset_stats(&d);
        assert_eq!(s.absent_labels, vec![2]);
        assert!(s.irlbl[2].is_nan());
        assert!((s.avg_ir - 1.5).abs() < 1e-12);
    }

    #[test]
    fn tiny4_pairs() {
        let p = pair_stats(&tiny4());
        assert_eq!(p.pair_index, vec![((0, 1), 2), ((0, 2), 1), ((1, 2), 2)]);
        assert_eq!(p.card2, 1.25);
        assert!((p.dens2 - 0.4167).abs() < 1e-4);
        assert_eq!(p.div2, 3);
        assert_eq!(p.pdiv2, 0.75);
        assert_eq!(p.max_frequency2, 0.5);
    }

    #[test]
    fn singletons_have_no_pairs() {
        let d = MultiLabelDataset::from_label_sets(3, &[vec![0], vec![1], vec![2]]).unwrap();
        let p = pair_stats(&d);
        assert_eq!(p.card2, 0.0);
        assert_eq!(p.div2, 0);
        assert!(p.pair_index.is_empty());
        let one = MultiLabelDataset::from_label_sets(1, &[vec![0]]).unwrap();
        assert_eq!(pair_stats(&one).div2, 0);
    }
}
