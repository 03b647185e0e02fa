//! Single-objective evolutionary splitter.

use rand::Rng;
use serde::Serialize;

use crate::dataset::MultiLabelDataset;
use crate::error::SplitError;
use crate::evo::operators::{
    crossover_one_point, init_population, mutate, repair_constraint, repair_sizes, RankSelector,
};
use crate::exec::Execution;
use crate::fold::{Assignment, FoldSpec};
use crate::metrics::{Metric, SplitEvaluator};
use crate::seeded_rng;

/// Hyperparameters shared by the single- and multi-objective searches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EaParams {
    pub pop_size: usize,
    pub crossover_offspring: usize,
    pub mutation_offspring: usize,
    /// Generations without improvement before stopping.
    pub stale_generations_max: usize,
    pub mutation_rate: f64,
    pub runs: usize,
    /// Minimized fitness. Ignored by the multi-objective search.
    pub fitness: Metric,
    /// Enforce that every fold covers every label present in at least `k` examples.
    pub constrained: bool,
    pub seed: u64,
    pub improvement_epsilon: f64,
    /// Hard cap on generations per run; `None` relies on the stale counter alone.
    pub max_generations: Option<usize>,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for EaParams {
    fn default() -> Self {
        Self {
            pop_size: 50,
            crossover_offspring: 10,
            mutation_offspring: 10,
            stale_generations_max: 25,
            mutation_rate: 0.01,
            runs: 5,
            fitness: Metric::LdPrime,
            constrained: false,
            seed: 0,
            improvement_epsilon: 1e-12,
            max_generations: None,
            execution: Execution::default(),
        }
    }
}

impl EaParams {
    pub fn validate(&self) -> Result<(), SplitError> {
        let bad = |msg: &str| Err(SplitError::InvalidParams(msg.to_string()));
        if self.pop_size == 0 {
            return bad("population size must be positive");
        }
        if self.crossover_offspring + self.mutation_offspring == 0 {
            return bad("at least one offspring per generation is required");
        }
        if !(self.mutation_rate > 0.0 && self.mutation_rate <= 1.0) {
            return bad("mutation rate must lie in (0, 1]");
        }
        if self.runs == 0 {
            return bad("at least one run is required");
        }
        if self.improvement_epsilon.is_nan() || self.improvement_epsilon < 0.0 {
            return bad("improvement epsilon must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EaResult {
    pub best_assignment: Assignment,
    pub best_fitness: f64,
    pub generations: usize,
    pub run_index: usize,
    /// Best fitness of the initial population followed by one entry per generation.
    pub history: Vec<f64>,
    /// Individuals for which coverage repair hit its swap budget.
    pub constraint_unmet: usize,
}

/// Produces one generation's offspring, all size-feasible. Every random draw
/// happens here, before any evaluation.
pub(crate) fn breed(
    ev: &SplitEvaluator<'_>,
    spec: &FoldSpec,
    params: &EaParams,
    ranked: &[&Assignment],
    rng: &mut rand_chacha::ChaCha8Rng,
    unmet: &mut usize,
) -> Vec<Assignment> {
    let m = ev.dataset().num_examples();
    let k = spec.k();
    let selector = RankSelector::new(ranked.len());
    let mut offspring = Vec::with_capacity(params.crossover_offspring + params.mutation_offspring);

    for _ in 0..params.crossover_offspring {
        let p1 = ranked[selector.pick(rng)];
        let p2 = ranked[selector.pick(rng)];
        let child = if m >= 2 {
            let cut = rng.gen_range(1..m);
            crossover_one_point(p1, p2, cut).expect("cut within range")
        } else {
            p1.clone()
        };
        offspring.push(child);
    }
    for _ in 0..params.mutation_offspring {
        let mut child = ranked[selector.pick(rng)].clone();
        if k >= 2 {
            mutate(&mut child, params.mutation_rate, k, rng).expect("validated rate");
        }
        offspring.push(child);
    }
    for child in &mut offspring {
        repair_sizes(child, spec, rng);
        if params.constrained && !repair_constraint(child, ev, spec, rng) {
            *unmet += 1;
        }
        debug_assert!(child.is_size_feasible(spec));
    }
    offspring
}

pub(crate) fn check_inputs(d: &MultiLabelDataset, spec: &FoldSpec, params: &EaParams) -> Result<(), SplitError> {
    params.validate()?;
    if spec.total() != d.num_examples() {
        return Err(SplitError::TargetSum {
            expected: d.num_examples(),
            actual: spec.total(),
        });
    }
    Ok(())
}

/// One evolutionary run seeded with `run_seed`.
pub fn evolve(
    d: &MultiLabelDataset,
    spec: &FoldSpec,
    params: &EaParams,
    run_seed: u64,
) -> Result<EaResult, SplitError> {
    check_inputs(d, spec, params)?;
    let ev = SplitEvaluator::new(d);
    Ok(evolve_run(&ev, spec, params, run_seed, 0))
}

fn evolve_run(
    ev: &SplitEvaluator<'_>,
    spec: &FoldSpec,
    params: &EaParams,
    run_seed: u64,
    run_index: usize,
) -> EaResult {
    let k = spec.k();
    let exec = params.execution;
    let fitness = |a: &Assignment| ev.metric(params.fitness, a, k);
    let mut rng = seeded_rng(run_seed);

    let (initial, mut unmet) = init_population(ev, spec, params.pop_size, params.constrained, &mut rng);
    let scores = exec.map(&initial, fitness);
    let mut population: Vec<(Assignment, f64)> = initial.into_iter().zip(scores).collect();
    population.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut reference = population[0].1;
    let mut history = vec![reference];
    let mut stale = 0;
    let mut generations = 0;

    while stale < params.stale_generations_max && params.max_generations.is_none_or(|cap| generations < cap) {
        generations += 1;
        let ranked: Vec<&Assignment> = population.iter().map(|(a, _)| a).collect();
        let offspring = breed(ev, spec, params, &ranked, &mut rng, &mut unmet);
        let scores = exec.map(&offspring, fitness);

        population.extend(offspring.into_iter().zip(scores));
        // Stable sort: parents stay ahead of equally fit offspring.
        population.sort_by(|a, b| a.1.total_cmp(&b.1));
        population.truncate(params.pop_size);

        let best = population[0].1;
        if best < reference - params.improvement_epsilon {
            reference = best;
            stale = 0;
        } else {
            stale += 1;
        }
        history.push(best);
    }

    let (best_assignment, best_fitness) = population.swap_remove(0);
    EaResult {
        best_assignment,
        best_fitness,
        generations,
        run_index,
        history,
        constraint_unmet: unmet,
    }
}

/// Runs `params.runs` independent searches seeded `seed + run_index` and keeps
/// the fittest; ties go to the lowest run index.
pub fn run_best_of(d: &MultiLabelDataset, spec: &FoldSpec, params: &EaParams) -> Result<EaResult, SplitError> {
    check_inputs(d, spec, params)?;
    let ev = SplitEvaluator::new(d);
    let results = params.execution.map_range(params.runs, |r| {
        evolve_run(&ev, spec, params, params.seed.wrapping_add(r as u64), r)
    });
    Ok(results
        .into_iter()
        .reduce(|best, next| {
            if next.best_fitness < best.best_fitness {
                next
            } else {
                best
            }
        })
        .expect("at least one run"))
}
