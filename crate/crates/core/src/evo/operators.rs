//! Variation and repair operators shared by both evolutionary searches.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::random_split;
use crate::error::SplitError;
use crate::fold::{Assignment, FoldSpec};
use crate::metrics::SplitEvaluator;

/// Linear ranking: the individual at rank `r` (0 = best) of `n` is drawn with
/// probability proportional to `n - r`, with replacement.
#[derive(Debug, Clone)]
pub struct RankSelector {
    dist: WeightedIndex<usize>,
}

impl RankSelector {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "cannot select from an empty population");
        Self {
            dist: WeightedIndex::new((0..n).map(|r| n - r)).expect("positive weights"),
        }
    }

    pub fn pick(&self, rng: &mut ChaCha8Rng) -> usize {
        self.dist.sample(rng)
    }
}

/// Genes before `cut` come from `p1`, the rest from `p2`. The child is not
/// size-repaired.
pub fn crossover_one_point(p1: &Assignment, p2: &Assignment, cut: usize) -> Result<Assignment, SplitError> {
    let m = p1.len();
    if p2.len() != m {
        return Err(SplitError::LengthMismatch {
            expected: m,
            actual: p2.len(),
        });
    }
    if cut == 0 || cut >= m {
        return Err(SplitError::CutOutOfRange { cut, len: m });
    }
    let mut child = p1.as_slice()[..cut].to_vec();
    child.extend_from_slice(&p2.as_slice()[cut..]);
    Ok(Assignment::new(child))
}

/// Number of genes a mutation touches: `max(1, round(rate * m))`, capped at `m`.
pub fn mutation_count(rate: f64, m: usize) -> usize {
    ((rate * m as f64).round() as usize).max(1).min(m)
}

/// Moves [`mutation_count`] distinct genes, each to a uniformly chosen
/// different fold.
pub fn mutate(a: &mut Assignment, rate: f64, k: usize, rng: &mut ChaCha8Rng) -> Result<(), SplitError> {
    if k < 2 {
        return Err(SplitError::TooFewFolds);
    }
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(SplitError::InvalidParams(format!(
            "mutation rate {rate} outside (0, 1]"
        )));
    }
    let m = a.len();
    if m == 0 {
        return Ok(());
    }
    let genes = a.genes_mut();
    for pos in index::sample(rng, m, mutation_count(rate, m)) {
        let current = genes[pos];
        let mut next = rng.gen_range(0..k - 1);
        if next >= current {
            next += 1;
        }
        genes[pos] = next;
    }
    Ok(())
}

/// Moves overflow genes out of over-full folds into seeded-uniform under-full
/// folds until every fold matches its target. Returns the number of moves.
pub fn repair_sizes(a: &mut Assignment, spec: &FoldSpec, rng: &mut ChaCha8Rng) -> usize {
    let k = spec.k();
    let targets = spec.targets();
    let genes = a.genes_mut();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut stray = Vec::new();
    for (i, &f) in genes.iter().enumerate() {
        if f < k {
            members[f].push(i);
        } else {
            stray.push(i);
        }
    }

    let mut movers = stray;
    for (j, list) in members.iter().enumerate() {
        if list.len() > targets[j] {
            let excess = list.len() - targets[j];
            let mut picked: Vec<usize> = index::sample(rng, list.len(), excess)
                .into_iter()
                .map(|p| list[p])
                .collect();
            picked.sort_unstable();
            movers.extend(picked);
        }
    }

    let mut deficit: Vec<usize> = members
        .iter()
        .zip(targets)
        .map(|(list, &c)| c.saturating_sub(list.len()))
        .collect();
    for &i in &movers {
        let open: Vec<usize> = (0..k).filter(|&j| deficit[j] > 0).collect();
        let j = open[rng.gen_range(0..open.len())];
        deficit[j] -= 1;
        genes[i] = j;
    }
    movers.len()
}

/// Swaps examples between folds until every label present in at least `k`
/// examples appears in every fold.
///
/// Swaps keep fold sizes unchanged. Gives up after `10 * q * k` swaps and
/// returns `false` in that case, `true` once coverage holds.
pub fn repair_constraint(a: &mut Assignment, ev: &SplitEvaluator<'_>, spec: &FoldSpec, rng: &mut ChaCha8Rng) -> bool {
    let k = spec.k();
    let d = ev.dataset();
    let q = d.num_labels();
    let constrained: Vec<bool> = ev.presence().iter().map(|&p| p >= k).collect();
    let mut counts = ev.fold_label_presence(a, k);
    let budget = 10 * q * k;
    let mut swaps = 0;

    loop {
        let deficiency = (0..q)
            .filter(|&l| constrained[l])
            .find_map(|l| (0..k).find(|&j| counts[j * q + l] == 0).map(|j| (l, j)));
        let Some((label, target)) = deficiency else {
            return true;
        };
        if swaps == budget {
            return false;
        }
        swaps += 1;

        let genes = a.as_slice();
        // Donors carry the label and sit in a fold that keeps it afterwards.
        let donors: Vec<usize> = (0..genes.len())
            .filter(|&i| {
                let f = genes[i];
                f != target && counts[f * q + label] >= 2 && has_label(d.labels_of(i), label)
            })
            .collect();
        if donors.is_empty() {
            return false;
        }
        let donor_safe = |i: usize| {
            let f = genes[i];
            d.labels_of(i)
                .iter()
                .all(|&(l, _)| !constrained[l] || counts[f * q + l] >= 2)
        };
        let donor = pick_preferred(&donors, donor_safe, rng);
        let from = genes[donor];

        let receivers: Vec<usize> = (0..genes.len()).filter(|&i| genes[i] == target).collect();
        if receivers.is_empty() {
            return false;
        }
        let receiver_safe = |i: usize| {
            d.labels_of(i)
                .iter()
                .all(|&(l, _)| !constrained[l] || counts[target * q + l] >= 2 || has_label(d.labels_of(donor), l))
        };
        let receiver = pick_preferred(&receivers, receiver_safe, rng);

        for &(l, _) in d.labels_of(donor) {
            counts[from * q + l] -= 1;
            counts[target * q + l] += 1;
        }
        for &(l, _) in d.labels_of(receiver) {
            counts[target * q + l] -= 1;
            counts[from * q + l] += 1;
        }
        let genes = a.genes_mut();
        genes[donor] = target;
        genes[receiver] = from;
    }
}

/// Uniform pick among candidates passing `prefer`, or among all candidates if none do.
fn pick_preferred(candidates: &[usize], prefer: impl Fn(usize) -> bool, rng: &mut ChaCha8Rng) -> usize {
    let preferred: Vec<usize> = candidates.iter().copied().filter(|&i| prefer(i)).collect();
    let pool = if preferred.is_empty() { candidates } else { &preferred };
    pool[rng.gen_range(0..pool.len())]
}

fn has_label(row: &[(usize, u32)], label: usize) -> bool {
    row.binary_search_by_key(&label, |&(l, _)| l).is_ok()
}

/// `n` random size-feasible individuals, each from its own derived seed.
/// When `constrained` is set each one also goes through [`repair_constraint`];
/// the second value counts individuals whose coverage repair gave up.
pub fn init_population(
    ev: &SplitEvaluator<'_>,
    spec: &FoldSpec,
    n: usize,
    constrained: bool,
    rng: &mut ChaCha8Rng,
) -> (Vec<Assignment>, usize) {
    let m = ev.dataset().num_examples();
    let mut unmet = 0;
    let pop = (0..n)
        .map(|_| {
            let mut a = random_split(m, spec, rng.gen());
            if constrained && !repair_constraint(&mut a, ev, spec, rng) {
                unmet += 1;
            }
            a
        })
        .collect();
    (pop, unmet)
}
