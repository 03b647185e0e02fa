//! Seeded synthetic datasets for tests, benchmarks and demos.

use rand::seq::index;
use rand::Rng;

use crate::dataset::MultiLabelDataset;
use crate::seeded_rng;

/// Shape of an imbalanced synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub examples: usize,
    pub labels: usize,
    /// How many of the labels are rare; these come last in label order.
    pub rare_labels: usize,
    /// Inclusive presence range of every rare label.
    pub rare_presence: (usize, usize),
    /// Prevalence of the most common label; later labels decay geometrically.
    pub head_prevalence: f64,
    pub decay: f64,
    /// Chance that label `l + 1` is added when label `l` is present.
    pub chain_prob: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// `m` examples, `q` labels, four of which occur in between `k` and `2k` examples.
    pub fn imbalanced(m: usize, q: usize, k: usize, seed: u64) -> Self {
        Self {
            examples: m,
            labels: q,
            rare_labels: 4.min(q),
            rare_presence: (k, 2 * k),
            head_prevalence: 0.4,
            decay: 0.78,
            chain_prob: 0.3,
            seed,
        }
    }
}

/// Generates a dataset with a long-tailed label distribution and chained
/// co-occurrence between neighbouring common labels.
pub fn generate(cfg: &SyntheticConfig) -> MultiLabelDataset {
    let mut rng = seeded_rng(cfg.seed);
    let m = cfg.examples;
    let common = cfg.labels - cfg.rare_labels;
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); m];

    for set in sets.iter_mut() {
        let mut prev_present = false;
        for l in 0..common {
            let p = cfg.head_prevalence * cfg.decay.powi(l as i32);
            let present = rng.gen_bool(p) || (prev_present && rng.gen_bool(cfg.chain_prob));
            if present {
                set.push(l);
            }
            prev_present = present;
        }
    }

    for r in 0..cfg.rare_labels {
        let label = common + r;
        let (lo, hi) = cfg.rare_presence;
        let presence = rng.gen_range(lo..=hi).min(m);
        for i in index::sample(&mut rng, m, presence) {
            sets[i].push(label);
        }
    }

    MultiLabelDataset::from_label_sets(cfg.labels, &sets).expect("labels in range")
}

/// Small random presence-only dataset where every example carries 1..=q labels.
pub fn random_tiny(m: usize, q: usize, seed: u64) -> MultiLabelDataset {
    let mut rng = seeded_rng(seed);
    let sets: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let n = rng.gen_range(1..=q);
            let mut set: Vec<usize> = index::sample(&mut rng, q, n).into_vec();
            set.sort_unstable();
            set
        })
        .collect();
    MultiLabelDataset::from_label_sets(q, &sets).expect("labels in range")
}
