//! NSGA-II over the (LD′, LPD) objective pair, with knee selection.

use serde::Serialize;

use crate::dataset::MultiLabelDataset;
use crate::error::SplitError;
use crate::evo::operators::init_population;
use crate::evo::single::{breed, check_inputs, EaParams};
use crate::fold::{Assignment, FoldSpec};
use crate::metrics::{ObjectivePair, SplitEvaluator};
use crate::seeded_rng;

/// Fast non-dominated sorting. Front 0 is the non-dominated set; indices
/// within a front are ascending.
pub fn non_dominated_sort(points: &[ObjectivePair]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..n {
        for o in p + 1..n {
            if points[p].dominates(&points[o]) {
                dominates[p].push(o);
                dominated_by_count[o] += 1;
            } else if points[o].dominates(&points[p]) {
                dominates[o].push(p);
                dominated_by_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &o in &dominates[p] {
                dominated_by_count[o] -= 1;
                if dominated_by_count[o] == 0 {
                    next.push(o);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of a front. Boundary members get
/// `f64::INFINITY`; an objective with zero range contributes nothing.
pub fn crowding_distance(front: &[ObjectivePair]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let objectives: [fn(&ObjectivePair) -> f64; 2] = [|p| p.ld_prime, |p| p.lpd];
    for value in objectives {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| value(&front[a]).total_cmp(&value(&front[b])));
        let lo = value(&front[order[0]]);
        let hi = value(&front[order[n - 1]]);
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range > 0.0 {
            for w in 1..n - 1 {
                let i = order[w];
                dist[i] += (value(&front[order[w + 1]]) - value(&front[order[w - 1]])) / range;
            }
        }
    }
    dist
}

/// Index of the point closest to the origin; ties go to the lower `ld_prime`,
/// then to the earlier point.
pub fn knee_index(points: &[ObjectivePair]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let q = &points[b];
                let closer = p.norm() < q.norm() || (p.norm() == q.norm() && p.ld_prime < q.ld_prime);
                Some(if closer { i } else { b })
            }
        };
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoSolution {
    pub assignment: Assignment,
    pub objectives: ObjectivePair,
    /// `None` encodes an infinite (boundary) distance.
    #[serde(serialize_with = "serialize_crowding")]
    pub crowding: f64,
}

fn serialize_crowding<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoFront {
    pub solutions: Vec<ParetoSolution>,
}

impl ParetoFront {
    fn from_members(members: Vec<(Assignment, ObjectivePair)>) -> Self {
        let points: Vec<ObjectivePair> = members.iter().map(|m| m.1).collect();
        let crowding = crowding_distance(&points);
        Self {
            solutions: members
                .into_iter()
                .zip(crowding)
                .map(|((assignment, objectives), crowding)| ParetoSolution {
                    assignment,
                    objectives,
                    crowding,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectivePair> {
        self.solutions.iter().map(|s| s.objectives).collect()
    }

    /// No member dominates another.
    pub fn is_non_dominated(&self) -> bool {
        let pts = self.objectives();
        pts.iter().all(|a| pts.iter().all(|b| !b.dominates(a)))
    }

    /// Objective pairs only, as written by the front dump.
    pub fn to_json_pairs(&self) -> serde_json::Value {
        serde_json::to_value(self.objectives()).expect("objective pairs serialize")
    }
}

/// The front member closest to the origin in raw objective space.
pub fn select_knee(front: &ParetoFront) -> Result<&ParetoSolution, SplitError> {
    knee_index(&front.objectives())
        .map(|i| &front.solutions[i])
        .ok_or_else(|| SplitError::InvalidParams("empty Pareto front".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoeaResult {
    pub front: ParetoFront,
    pub generations: usize,
    pub run_index: usize,
    /// Knee objectives of the initial population and after every generation.
    pub knee_history: Vec<ObjectivePair>,
    pub constraint_unmet: usize,
}

impl MoeaResult {
    pub fn knee(&self) -> &ParetoSolution {
        select_knee(&self.front).expect("returned fronts are never empty")
    }
}

type Member = (Assignment, ObjectivePair);

/// Orders a population by front, then crowding descending, then position.
fn rank_population(members: Vec<Member>) -> Vec<Member> {
    let points: Vec<ObjectivePair> = members.iter().map(|m| m.1).collect();
    let mut order = Vec::with_capacity(members.len());
    for front in non_dominated_sort(&points) {
        let fp: Vec<ObjectivePair> = front.iter().map(|&i| points[i]).collect();
        let crowd = crowding_distance(&fp);
        let mut local: Vec<usize> = (0..front.len()).collect();
        local.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]).then(front[a].cmp(&front[b])));
        order.extend(local.into_iter().map(|l| front[l]));
    }
    let mut slots: Vec<Option<Member>> = members.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|i| slots[i].take().expect("each index once"))
        .collect()
}

/// Elitist truncation to `n`: whole fronts first, the last partial front by
/// crowding distance. The merged population's knee always survives.
fn survive(merged: Vec<Member>, n: usize) -> Vec<Member> {
    let points: Vec<ObjectivePair> = merged.iter().map(|m| m.1).collect();
    let knee = knee_index(&points);
    let mut keep: Vec<usize> = Vec::with_capacity(n);
    for front in non_dominated_sort(&points) {
        if keep.len() + front.len() <= n {
            keep.extend(&front);
            continue;
        }
        let fp: Vec<ObjectivePair> = front.iter().map(|&i| points[i]).collect();
        let crowd = crowding_distance(&fp);
        let mut local: Vec<usize> = (0..front.len()).collect();
        local.sort_by(|&a, &b| {
            let ka = Some(front[a]) == knee;
            let kb = Some(front[b]) == knee;
            kb.cmp(&ka)
                .then(crowd[b].total_cmp(&crowd[a]))
                .then(front[a].cmp(&front[b]))
        });
        let need = n - keep.len();
        keep.extend(local.into_iter().take(need).map(|l| front[l]));
        break;
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Member>> = merged.into_iter().map(Some).collect();
    keep.into_iter()
        .map(|i| slots[i].take().expect("each index once"))
        .collect()
}

fn knee_of(population: &[Member]) -> ObjectivePair {
    let points: Vec<ObjectivePair> = population.iter().map(|m| m.1).collect();
    points[knee_index(&points).expect("non-empty population")]
}

/// One NSGA-II run seeded with `run_seed`. Returns the final first front.
pub fn nsga2_evolve(
    d: &MultiLabelDataset,
    spec: &FoldSpec,
    params: &EaParams,
    run_seed: u64,
) -> Result<MoeaResult, SplitError> {
    check_inputs(d, spec, params)?;
    let ev = SplitEvaluator::new(d);
    Ok(nsga2_run(&ev, spec, params, run_seed, 0))
}

fn nsga2_run(
    ev: &SplitEvaluator<'_>,
    spec: &FoldSpec,
    params: &EaParams,
    run_seed: u64,
    run_index: usize,
) -> MoeaResult {
    let k = spec.k();
    let exec = params.execution;
    let objectives = |a: &Assignment| ev.objectives(a, k);
    let mut rng = seeded_rng(run_seed);

    let (initial, mut unmet) = init_population(ev, spec, params.pop_size, params.constrained, &mut rng);
    let scores = exec.map(&initial, objectives);
    let mut population = rank_population(initial.into_iter().zip(scores).collect());

    let mut reference = knee_of(&population);
    let mut knee_history = vec![reference];
    let mut stale = 0;
    let mut generations = 0;

    while stale < params.stale_generations_max && params.max_generations.is_none_or(|cap| generations < cap) {
        generations += 1;
        let ranked: Vec<&Assignment> = population.iter().map(|(a, _)| a).collect();
        let offspring = breed(ev, spec, params, &ranked, &mut rng, &mut unmet);
        let scores = exec.map(&offspring, objectives);

        let mut merged = population;
        merged.extend(offspring.into_iter().zip(scores));
        population = rank_population(survive(merged, params.pop_size));

        let knee = knee_of(&population);
        let eps = params.improvement_epsilon;
        if (knee.ld_prime - reference.ld_prime).abs() > eps || (knee.lpd - reference.lpd).abs() > eps {
            reference = knee;
            stale = 0;
        } else {
            stale += 1;
        }
        knee_history.push(knee);
    }

    let points: Vec<ObjectivePair> = population.iter().map(|m| m.1).collect();
    let first: Vec<usize> = non_dominated_sort(&points).swap_remove(0);
    let mut slots: Vec<Option<Member>> = population.into_iter().map(Some).collect();
    let mut seen = std::collections::HashSet::new();
    let members = first
        .into_iter()
        .map(|i| slots[i].take().expect("each index once"))
        .filter(|m| seen.insert(m.0.as_slice().to_vec()))
        .collect();

    MoeaResult {
        front: ParetoFront::from_members(members),
        generations,
        run_index,
        knee_history,
        constraint_unmet: unmet,
    }
}

/// Independent runs seeded `seed + run_index`; keeps the run whose knee is
/// closest to the origin, ties to the lowest run index.
pub fn nsga2_best_of(d: &MultiLabelDataset, spec: &FoldSpec, params: &EaParams) -> Result<MoeaResult, SplitError> {
    check_inputs(d, spec, params)?;
    let ev = SplitEvaluator::new(d);
    let results = params.execution.map_range(params.runs, |r| {
        nsga2_run(&ev, spec, params, params.seed.wrapping_add(r as u64), r)
    });
    let knees: Vec<ObjectivePair> = results.iter().map(|r| r.knee().objectives).collect();
    let best = knee_index(&knees).expect("at least one run");
    Ok(results.into_iter().nth(best).expect("index in range"))
}
