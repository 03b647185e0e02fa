//! Split-quality measures: LD, LD′, LPD, ED, FZ and FLZ.
//!
//! All positive-to-negative ratios clamp their denominator to at least 1, so
//! a fold that is entirely positive for a label still yields a finite value.
//! A label (or pair) with no negative examples in the whole dataset is
//! positive everywhere in every split; its term is defined as 0.

use std::collections::HashMap;
use std::str::FromStr;

use serde::Serialize;

use crate::dataset::MultiLabelDataset;
use crate::error::SplitError;
use crate::fold::{Assignment, FoldSpec};
use crate::stats::{pair_stats, LabelPair};

/// The measure a splitter optimizes or an oracle minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    /// Presence-based label distribution.
    Ld,
    /// Multiplicity-weighted label distribution.
    LdPrime,
    /// Label pair distribution.
    Lpd,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ld" => Ok(Metric::Ld),
            "ld_prime" | "ld-prime" | "ldprime" => Ok(Metric::LdPrime),
            "lpd" => Ok(Metric::Lpd),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// The two objectives minimized by the multi-objective search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectivePair {
    pub ld_prime: f64,
    pub lpd: f64,
}

impl ObjectivePair {
    pub fn new(ld_prime: f64, lpd: f64) -> Self {
        Self { ld_prime, lpd }
    }

    /// Euclidean distance to the origin.
    pub fn norm(&self) -> f64 {
        self.ld_prime.hypot(self.lpd)
    }

    /// `self` is no worse in both objectives and strictly better in one.
    pub fn dominates(&self, other: &Self) -> bool {
        self.ld_prime <= other.ld_prime
            && self.lpd <= other.lpd
            && (self.ld_prime < other.ld_prime || self.lpd < other.lpd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitReport {
    pub ld: f64,
    pub ld_prime: f64,
    pub lpd: f64,
    pub ed: f64,
    pub fz: usize,
    pub flz: usize,
    pub fold_sizes: Vec<usize>,
    /// Every label present in at least `k` examples appears in every fold.
    pub constrained_feasible: bool,
}

/// Dataset-level tallies precomputed once and reused for every assignment.
#[derive(Debug, Clone)]
pub struct SplitEvaluator<'a> {
    data: &'a MultiLabelDataset,
    presence: Vec<usize>,
    occurrence: Vec<u64>,
    total_occurrence: u64,
    pairs: Vec<LabelPair>,
    pair_presence: Vec<usize>,
    pairs_of: Vec<Vec<usize>>,
}

impl<'a> SplitEvaluator<'a> {
    pub fn new(data: &'a MultiLabelDataset) -> Self {
        let ps = pair_stats(data);
        let pairs: Vec<LabelPair> = ps.pair_index.iter().map(|&(p, _)| p).collect();
        let pair_presence = ps.pair_index.iter().map(|&(_, c)| c).collect();
        let index: HashMap<LabelPair, usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let pairs_of = data
            .rows()
            .map(|row| {
                let mut ids = Vec::with_capacity(row.len() * row.len().saturating_sub(1) / 2);
                for (i, &(a, _)) in row.iter().enumerate() {
                    for &(b, _) in &row[i + 1..] {
                        ids.push(index[&(a, b)]);
                    }
                }
                ids
            })
            .collect();
        let occurrence = data.label_occurrence();
        Self {
            data,
            presence: data.label_presence(),
            total_occurrence: occurrence.iter().sum(),
            occurrence,
            pairs,
            pair_presence,
            pairs_of,
        }
    }

    pub fn dataset(&self) -> &'a MultiLabelDataset {
        self.data
    }

    pub fn presence(&self) -> &[usize] {
        &self.presence
    }

    /// Co-occurring label pairs in index order.
    pub fn pairs(&self) -> &[LabelPair] {
        &self.pairs
    }

    /// Pair ids (indices into [`SplitEvaluator::pairs`]) carried by example `i`.
    pub fn pairs_of(&self, i: usize) -> &[usize] {
        &self.pairs_of[i]
    }

    pub fn pair_presence(&self) -> &[usize] {
        &self.pair_presence
    }

    /// Presence count of each label per fold, flattened as `fold * q + label`.
    pub fn fold_label_presence(&self, a: &Assignment, k: usize) -> Vec<usize> {
        let q = self.data.num_labels();
        let mut counts = vec![0usize; k * q];
        for (i, row) in self.data.rows().enumerate() {
            let base = a.fold_of(i) * q;
            for &(l, _) in row {
                counts[base + l] += 1;
            }
        }
        counts
    }

    /// LD over labels present in the dataset, using actual fold sizes.
    pub fn ld(&self, a: &Assignment, k: usize) -> f64 {
        let q = self.data.num_labels();
        let counts = self.fold_label_presence(a, k);
        let sizes = a.fold_sizes(k);
        let m = self.data.num_examples() as f64;
        mean_deviation(
            q,
            k,
            |l| self.presence[l] as f64,
            m,
            |j, l| (counts[j * q + l] as f64, sizes[j] as f64),
        )
    }

    /// LD′ over labels occurring in the dataset, weighting by multiplicities.
    pub fn ld_prime(&self, a: &Assignment, k: usize) -> f64 {
        let q = self.data.num_labels();
        let mut counts = vec![0u64; k * q];
        let mut totals = vec![0u64; k];
        for (i, row) in self.data.rows().enumerate() {
            let j = a.fold_of(i);
            for &(l, c) in row {
                counts[j * q + l] += u64::from(c);
                totals[j] += u64::from(c);
            }
        }
        mean_deviation(
            q,
            k,
            |l| self.occurrence[l] as f64,
            self.total_occurrence as f64,
            |j, l| (counts[j * q + l] as f64, totals[j] as f64),
        )
    }

    /// LPD over co-occurring pairs; 0 when there are none.
    pub fn lpd(&self, a: &Assignment, k: usize) -> f64 {
        let e = self.pairs.len();
        if e == 0 {
            return 0.0;
        }
        let mut counts = vec![0usize; k * e];
        for (i, ids) in self.pairs_of.iter().enumerate() {
            let base = a.fold_of(i) * e;
            for &p in ids {
                counts[base + p] += 1;
            }
        }
        let sizes = a.fold_sizes(k);
        let m = self.data.num_examples() as f64;
        mean_deviation(
            e,
            k,
            |p| self.pair_presence[p] as f64,
            m,
            |j, p| (counts[j * e + p] as f64, sizes[j] as f64),
        )
    }

    pub fn metric(&self, metric: Metric, a: &Assignment, k: usize) -> f64 {
        match metric {
            Metric::Ld => self.ld(a, k),
            Metric::LdPrime => self.ld_prime(a, k),
            Metric::Lpd => self.lpd(a, k),
        }
    }

    pub fn objectives(&self, a: &Assignment, k: usize) -> ObjectivePair {
        ObjectivePair::new(self.ld_prime(a, k), self.lpd(a, k))
    }

    /// `(fz, flz)` counting only labels present in the dataset.
    pub fn zero_counts(&self, a: &Assignment, k: usize) -> (usize, usize) {
        let q = self.data.num_labels();
        let counts = self.fold_label_presence(a, k);
        let mut fz = 0;
        let mut flz = 0;
        for j in 0..k {
            let missing = (0..q)
                .filter(|&l| self.presence[l] > 0 && counts[j * q + l] == 0)
                .count();
            flz += missing;
            if missing > 0 {
                fz += 1;
            }
        }
        (fz, flz)
    }

    /// True when every label with presence `>= k` appears in every fold.
    pub fn covers_constrained_labels(&self, a: &Assignment, k: usize) -> bool {
        let q = self.data.num_labels();
        let counts = self.fold_label_presence(a, k);
        (0..q)
            .filter(|&l| self.presence[l] >= k)
            .all(|l| (0..k).all(|j| counts[j * q + l] > 0))
    }

    /// Full report. Fold sizes are taken as they are; ED exposes any deviation.
    pub fn report(&self, a: &Assignment, spec: &FoldSpec) -> Result<SplitReport, SplitError> {
        a.validate(self.data.num_examples(), spec.k())?;
        let k = spec.k();
        let (fz, flz) = self.zero_counts(a, k);
        Ok(SplitReport {
            ld: self.ld(a, k),
            ld_prime: self.ld_prime(a, k),
            lpd: self.lpd(a, k),
            ed: examples_distribution(a, spec),
            fz,
            flz,
            fold_sizes: a.fold_sizes(k),
            constrained_feasible: self.covers_constrained_labels(a, k),
        })
    }
}

/// Mean over items present in the dataset of the mean absolute per-fold
/// ratio deviation. `fold(j, i)` returns `(positives, total)` for item `i` in fold `j`.
fn mean_deviation(
    items: usize,
    k: usize,
    dataset_pos: impl Fn(usize) -> f64,
    dataset_total: f64,
    fold: impl Fn(usize, usize) -> (f64, f64),
) -> f64 {
    let mut sum = 0.0;
    let mut counted = 0usize;
    for i in 0..items {
        let pos = dataset_pos(i);
        if pos == 0.0 {
            continue;
        }
        counted += 1;
        let neg = dataset_total - pos;
        if neg <= 0.0 {
            continue;
        }
        let target = pos / neg;
        let mut term = 0.0;
        for j in 0..k {
            let (fp, ft) = fold(j, i);
            term += (fp / (ft - fp).max(1.0) - target).abs();
        }
        sum += term / k as f64;
    }
    if counted == 0 {
        0.0
    } else {
        sum / counted as f64
    }
}

fn checked(d: &MultiLabelDataset, a: &Assignment, spec: &FoldSpec) -> Result<(), SplitError> {
    spec.check_len(d.num_examples())?;
    a.check_sizes(spec)
}

/// LD of a size-feasible assignment.
pub fn label_distribution(d: &MultiLabelDataset, a: &Assignment, spec: &FoldSpec) -> Result<f64, SplitError> {
    checked(d, a, spec)?;
    Ok(SplitEvaluator::new(d).ld(a, spec.k()))
}

/// LD′ of a size-feasible assignment.
pub fn modified_label_distribution(d: &MultiLabelDataset, a: &Assignment, spec: &FoldSpec) -> Result<f64, SplitError> {
    checked(d, a, spec)?;
    Ok(SplitEvaluator::new(d).ld_prime(a, spec.k()))
}

/// LPD of a size-feasible assignment.
pub fn label_pair_distribution(d: &MultiLabelDataset, a: &Assignment, spec: &FoldSpec) -> Result<f64, SplitError> {
    checked(d, a, spec)?;
    Ok(SplitEvaluator::new(d).lpd(a, spec.k()))
}

/// Mean absolute deviation of fold sizes from their targets.
pub fn examples_distribution(a: &Assignment, spec: &FoldSpec) -> f64 {
    let sizes = a.fold_sizes(spec.k());
    let dev: usize = sizes.iter().zip(spec.targets()).map(|(&s, &c)| s.abs_diff(c)).sum();
    dev as f64 / spec.k() as f64
}

/// `(fz, flz)` for an assignment.
pub fn zero_counts(d: &MultiLabelDataset, a: &Assignment, spec: &FoldSpec) -> (usize, usize) {
    SplitEvaluator::new(d).zero_counts(a, spec.k())
}

pub fn evaluate_split(d: &MultiLabelDataset, a: &Assignment, spec: &FoldSpec) -> Result<SplitReport, SplitError> {
    SplitEvaluator::new(d).report(a, spec)
}
