//! Size-exact splitting of multi-label datasets into folds.
//!
//! The crate provides dataset loading and imbalance statistics, split-quality
//! measures, random and iterative-stratification baselines, a single-objective
//! evolutionary splitter, an NSGA-II splitter over two objectives, and an
//! exhaustive oracle for tiny instances.
//!
//! Population evaluation and oracle enumeration run on rayon when the
//! `parallel` feature is enabled (the default); see [`exec::Execution`].

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod evo;
pub mod exec;
pub mod fold;
pub mod metrics;
pub mod oracle;
pub mod stats;
pub mod synthetic;

pub use baselines::{iterative_stratification, random_split, second_order_iterative_stratification};
pub use dataset::{Format, MultiLabelDataset};
pub use error::{ParseError, SplitError};
pub use evo::multi::{
    crowding_distance, non_dominated_sort, nsga2_best_of, nsga2_evolve, select_knee, MoeaResult, ParetoFront,
};
pub use evo::single::{evolve, run_best_of, EaParams, EaResult};
pub use exec::Execution;
pub use fold::{Assignment, FoldSpec};
pub use metrics::{evaluate_split, Metric, ObjectivePair, SplitEvaluator, SplitReport};
pub use oracle::{exhaustive_optimal, OracleResult};
pub use stats::{dataset_stats, pair_stats, DatasetStats, PairStats};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate's single RNG: ChaCha8, portable across platforms.
pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
