//! Exhaustive search over every size-feasible assignment of a tiny instance.

use serde::Serialize;

use crate::dataset::MultiLabelDataset;
use crate::error::SplitError;
use crate::exec::Execution;
use crate::fold::{Assignment, FoldSpec};
use crate::metrics::{Metric, ObjectivePair, SplitEvaluator};

/// Largest number of feasible assignments the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub metric: Metric,
    pub optimum_value: f64,
    /// Every minimizing assignment, in lexicographic order.
    pub optimizers: Vec<Assignment>,
    pub enumerated: u64,
    /// Distinct (LD′, LPD) pairs over all feasible assignments, sorted.
    pub pareto_pairs: Vec<ObjectivePair>,
}

impl OracleResult {
    /// Members of `pareto_pairs` that no other pair dominates.
    pub fn pareto_optimal(&self) -> Vec<ObjectivePair> {
        self.pareto_pairs
            .iter()
            .copied()
            .filter(|p| self.pareto_pairs.iter().all(|o| !o.dominates(p)))
            .collect()
    }
}

/// `m! / prod(c_j!)`, saturating above `u128::MAX`.
pub fn multinomial(targets: &[usize]) -> u128 {
    let mut acc: u128 = 1;
    let mut placed: u128 = 0;
    for &c in targets {
        // Multiply by C(placed + c, c) one factor at a time; each partial
        // product is itself a binomial coefficient, so division is exact.
        for i in 1..=c as u128 {
            placed += 1;
            acc = match acc.checked_mul(placed) {
                Some(v) => v / i,
                None => return u128::MAX,
            };
        }
    }
    acc
}

struct Partial {
    best: f64,
    optimizers: Vec<Assignment>,
    pairs: Vec<(u64, u64)>,
    visited: u64,
}

impl Partial {
    fn empty() -> Self {
        Self {
            best: f64::INFINITY,
            optimizers: Vec::new(),
            pairs: Vec::new(),
            visited: 0,
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        if other.best < self.best {
            self.best = other.best;
            self.optimizers = other.optimizers;
        } else if other.best == self.best {
            self.optimizers.extend(other.optimizers);
        }
        self.pairs.extend(other.pairs);
        self.pairs.sort_unstable();
        self.pairs.dedup();
        self.visited += other.visited;
        self
    }
}

/// Globally optimal value of `metric` with all of its minimizers.
pub fn exhaustive_optimal(
    d: &MultiLabelDataset,
    spec: &FoldSpec,
    metric: Metric,
    exec: Execution,
) -> Result<OracleResult, SplitError> {
    let m = d.num_examples();
    spec.check_len(m)?;
    let count = multinomial(spec.targets());
    if count > ORACLE_LIMIT {
        let shown = if count == u128::MAX {
            "more than 2^128".to_string()
        } else {
            count.to_string()
        };
        return Err(SplitError::TooLarge(shown));
    }
    let ev = SplitEvaluator::new(d);
    let k = spec.k();

    // Split the search by a short prefix; each prefix is enumerated in lex
    // order and the partial results are merged in prefix order.
    let depth = m.min(4);
    let mut prefixes = Vec::new();
    let mut remaining = spec.targets().to_vec();
    collect_prefixes(&mut Vec::new(), &mut remaining, depth, &mut prefixes);

    let partials = exec.map(&prefixes, |prefix| {
        let mut rem = spec.targets().to_vec();
        for &f in prefix {
            rem[f] -= 1;
        }
        let mut genes = prefix.clone();
        genes.resize(m, 0);
        let mut out = Partial::empty();
        descend(&mut genes, prefix.len(), &mut rem, &mut |a| {
            let value = ev.metric(metric, a, k);
            let pair = ev.objectives(a, k);
            out.visited += 1;
            out.pairs.push((pair.ld_prime.to_bits(), pair.lpd.to_bits()));
            if value < out.best {
                out.best = value;
                out.optimizers.clear();
                out.optimizers.push(a.clone());
            } else if value == out.best {
                out.optimizers.push(a.clone());
            }
        });
        out.pairs.sort_unstable();
        out.pairs.dedup();
        out
    });
    let total = partials.into_iter().fold(Partial::empty(), Partial::merge);

    let mut pareto_pairs: Vec<ObjectivePair> = total
        .pairs
        .iter()
        .map(|&(a, b)| ObjectivePair::new(f64::from_bits(a), f64::from_bits(b)))
        .collect();
    pareto_pairs.sort_by(|a, b| a.ld_prime.total_cmp(&b.ld_prime).then(a.lpd.total_cmp(&b.lpd)));

    Ok(OracleResult {
        metric,
        optimum_value: total.best,
        optimizers: total.optimizers,
        enumerated: total.visited,
        pareto_pairs,
    })
}

fn collect_prefixes(prefix: &mut Vec<usize>, remaining: &mut [usize], depth: usize, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == depth {
        out.push(prefix.clone());
        return;
    }
    for f in 0..remaining.len() {
        if remaining[f] > 0 {
            remaining[f] -= 1;
            prefix.push(f);
            collect_prefixes(prefix, remaining, depth, out);
            prefix.pop();
            remaining[f] += 1;
        }
    }
}

fn descend(genes: &mut Vec<usize>, pos: usize, remaining: &mut [usize], visit: &mut impl FnMut(&Assignment)) {
    if pos == genes.len() {
        let a = Assignment::new(std::mem::take(genes));
        visit(&a);
        *genes = a.into_inner();
        return;
    }
    for f in 0..remaining.len() {
        if remaining[f] > 0 {
            remaining[f] -= 1;
            genes[pos] = f;
            descend(genes, pos + 1, remaining, visit);
            remaining[f] += 1;
        }
    }
}
