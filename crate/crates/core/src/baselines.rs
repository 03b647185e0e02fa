//! Reference splitters: seeded random, Iterative Stratification and its
//! second-order (label pair) variant.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::MultiLabelDataset;
use crate::fold::{Assignment, FoldSpec};
use crate::metrics::SplitEvaluator;
use crate::seeded_rng;

/// Shuffles the examples and fills folds to their exact targets in fold order.
pub fn random_split(m: usize, spec: &FoldSpec, seed: u64) -> Assignment {
    let mut rng = seeded_rng(seed);
    random_split_with(m, spec, &mut rng)
}

pub(crate) fn random_split_with(m: usize, spec: &FoldSpec, rng: &mut ChaCha8Rng) -> Assignment {
    debug_assert_eq!(spec.total(), m);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut fold_of = vec![0; m];
    let mut cursor = 0;
    for (j, &c) in spec.targets().iter().enumerate() {
        for &i in &order[cursor..cursor + c] {
            fold_of[i] = j;
        }
        cursor += c;
    }
    Assignment::new(fold_of)
}

/// Greedy label-by-label stratification, scarcest label first.
///
/// Fold sizes are soft: the resulting ED may be positive.
pub fn iterative_stratification(d: &MultiLabelDataset, spec: &FoldSpec, seed: u64) -> Assignment {
    let ev = SplitEvaluator::new(d);
    let mut s = Stratifier::new(&ev, spec, seed);
    s.label_phase(false);
    s.fill_remaining();
    s.finish()
}

/// Same greedy loop over co-occurring label pairs, followed by a single-label
/// pass for examples not reached through a pair, and a size-filling pass for
/// the rest. The single-label pass only uses folds with remaining capacity,
/// so examples without pairs never push a fold past its target.
pub fn second_order_iterative_stratification(d: &MultiLabelDataset, spec: &FoldSpec, seed: u64) -> Assignment {
    let ev = SplitEvaluator::new(d);
    let mut s = Stratifier::new(&ev, spec, seed);
    s.pair_phase();
    s.label_phase(true);
    s.fill_remaining();
    s.finish()
}

struct Stratifier<'e, 'd> {
    ev: &'e SplitEvaluator<'d>,
    k: usize,
    rng: ChaCha8Rng,
    fold_of: Vec<Option<usize>>,
    size_quota: Vec<f64>,
    /// `fold * q + label`
    label_quota: Vec<f64>,
    /// `fold * |E| + pair`
    pair_quota: Vec<f64>,
    label_remaining: Vec<usize>,
    pair_remaining: Vec<usize>,
}

impl<'e, 'd> Stratifier<'e, 'd> {
    fn new(ev: &'e SplitEvaluator<'d>, spec: &FoldSpec, seed: u64) -> Self {
        let k = spec.k();
        let r = spec.proportions();
        let presence = ev.presence();
        let pair_presence = ev.pair_presence();
        let mut label_quota = Vec::with_capacity(k * presence.len());
        let mut pair_quota = Vec::with_capacity(k * pair_presence.len());
        for &rj in r {
            label_quota.extend(presence.iter().map(|&p| rj * p as f64));
            pair_quota.extend(pair_presence.iter().map(|&p| rj * p as f64));
        }
        Self {
            ev,
            k,
            rng: seeded_rng(seed),
            fold_of: vec![None; ev.dataset().num_examples()],
            size_quota: spec.targets().iter().map(|&c| c as f64).collect(),
            label_quota,
            pair_quota,
            label_remaining: presence.to_vec(),
            pair_remaining: pair_presence.to_vec(),
        }
    }

    fn assign(&mut self, i: usize, j: usize) {
        let q = self.ev.dataset().num_labels();
        let e = self.ev.pairs().len();
        self.fold_of[i] = Some(j);
        self.size_quota[j] -= 1.0;
        for &(l, _) in self.ev.dataset().labels_of(i) {
            self.label_quota[j * q + l] -= 1.0;
            self.label_remaining[l] -= 1;
        }
        for &p in self.ev.pairs_of(i) {
            self.pair_quota[j * e + p] -= 1.0;
            self.pair_remaining[p] -= 1;
        }
    }

    /// Fold with the largest quota for the item; ties go to the larger size
    /// quota, then to a seeded uniform pick.
    fn choose(&mut self, item_quota: impl Fn(usize) -> f64) -> usize {
        let all: Vec<usize> = (0..self.k).collect();
        self.choose_among(&all, item_quota)
    }

    fn choose_among(&mut self, folds: &[usize], item_quota: impl Fn(usize) -> f64) -> usize {
        let best_item = folds.iter().map(|&j| item_quota(j)).fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = folds.iter().copied().filter(|&j| item_quota(j) == best_item).collect();
        let best_size = tied
            .iter()
            .map(|&j| self.size_quota[j])
            .fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = tied.into_iter().filter(|&j| self.size_quota[j] == best_size).collect();
        if tied.len() == 1 {
            tied[0]
        } else {
            tied[self.rng.gen_range(0..tied.len())]
        }
    }

    fn scarcest(remaining: &[usize]) -> Option<usize> {
        remaining
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0)
            .min_by_key(|&(i, &r)| (r, i))
            .map(|(i, _)| i)
    }

    fn label_phase(&mut self, within_capacity: bool) {
        let q = self.ev.dataset().num_labels();
        let mut with_label: Vec<Vec<usize>> = vec![Vec::new(); q];
        for (i, row) in self.ev.dataset().rows().enumerate() {
            for &(l, _) in row {
                with_label[l].push(i);
            }
        }
        while let Some(label) = Self::scarcest(&self.label_remaining) {
            for &i in &with_label[label] {
                if self.fold_of[i].is_some() {
                    continue;
                }
                let quota: Vec<f64> = (0..self.k).map(|j| self.label_quota[j * q + label]).collect();
                let open: Vec<usize> = if within_capacity {
                    (0..self.k).filter(|&j| self.size_quota[j] > 0.0).collect()
                } else {
                    Vec::new()
                };
                let j = if open.is_empty() {
                    self.choose(|j| quota[j])
                } else {
                    self.choose_among(&open, |j| quota[j])
                };
                self.assign(i, j);
            }
        }
    }

    fn pair_phase(&mut self) {
        let e = self.ev.pairs().len();
        let mut with_pair: Vec<Vec<usize>> = vec![Vec::new(); e];
        for i in 0..self.fold_of.len() {
            for &p in self.ev.pairs_of(i) {
                with_pair[p].push(i);
            }
        }
        while let Some(pair) = Self::scarcest(&self.pair_remaining) {
            for &i in &with_pair[pair] {
                if self.fold_of[i].is_some() {
                    continue;
                }
                let quota: Vec<f64> = (0..self.k).map(|j| self.pair_quota[j * e + pair]).collect();
                let j = self.choose(|j| quota[j]);
                self.assign(i, j);
            }
        }
    }

    fn fill_remaining(&mut self) {
        for i in 0..self.fold_of.len() {
            if self.fold_of[i].is_none() {
                let sizes = self.size_quota.clone();
                let j = self.choose(|j| sizes[j]);
                self.assign(i, j);
            }
        }
    }

    fn finish(self) -> Assignment {
        Assignment::new(
            self.fold_of
                .into_iter()
                .map(|f| f.expect("every example assigned"))
                .collect(),
        )
    }
}
