//! NSGA-II over the polygon features: maximize area, minimize circumference.
//!
//! Standard elitist (mu + lambda) loop with fast non-dominated sorting,
//! crowding-distance survival, binary tournaments, SBX blend crossover and
//! per-gene Gaussian mutation. Objectives are handled internally as
//! minimization of `(-area, circumference)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{evaluate_batch, OptimizerError, Solution};
use crate::geometry::BoundsCase;
use crate::sampling::initial_population;

/// SBX distribution index.
const SBX_ETA: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nsga2Config {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob_per_gene: f64,
    pub mutation_sigma_fraction: f64,
    pub bounds_case: BoundsCase,
    pub seed: u64,
}

impl Nsga2Config {
    /// Paper defaults for a given population size and budget.
    pub fn standard(population: usize, generations: usize, case: BoundsCase, seed: u64) -> Self {
        Self {
            population,
            generations,
            crossover_prob: 0.9,
            mutation_prob_per_gene: 1.0 / 16.0,
            mutation_sigma_fraction: 0.10,
            bounds_case: case,
            seed,
        }
    }

    fn validate(&self) -> Result<(), OptimizerError> {
        if self.population < 2 {
            return Err(OptimizerError::InvalidConfig(
                "population must be at least 2",
            ));
        }
        if self.generations == 0 {
            return Err(OptimizerError::InvalidConfig(
                "generations must be at least 1",
            ));
        }
        for p in [self.crossover_prob, self.mutation_prob_per_gene] {
            if !(0.0..=1.0).contains(&p) {
                return Err(OptimizerError::InvalidConfig(
                    "probabilities must lie in [0, 1]",
                ));
            }
        }
        if !(self.mutation_sigma_fraction > 0.0 && self.mutation_sigma_fraction <= 1.0) {
            return Err(OptimizerError::InvalidConfig(
                "mutation_sigma_fraction must lie in (0, 1]",
            ));
        }
        Ok(())
    }

    pub fn evaluation_budget(&self) -> u64 {
        self.population as u64 * (self.generations as u64 + 1)
    }
}

#[derive(Debug, Clone)]
pub struct Nsga2Outcome {
    pub population: Vec<Solution>,
    pub evaluations: u64,
}

/// Fast non-dominated sort of minimization objective vectors. Returns fronts
/// in rank order; every index appears in exactly one front.
pub fn nondominated_sort<V: AsRef<[f64]>>(objectives: &[V]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in (p + 1)..n {
            if dominates(objectives[p].as_ref(), objectives[q].as_ref()) {
                dominated[p].push(q);
                domination_count[q] += 1;
            } else if dominates(objectives[q].as_ref(), objectives[p].as_ref()) {
                dominated[q].push(p);
                domination_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        fronts.push(core::mem::replace(&mut current, next));
    }
    fronts
}

/// `a` dominates `b` under minimization: no worse everywhere, better
/// somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b.iter()) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Crowding distances for one front. Boundary points per objective get
/// infinity; interior points accumulate the normalized gap between their
/// neighbors. Objectives with zero range contribute nothing.
pub fn crowding_distance<V: AsRef<[f64]>>(front: &[V]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n == 0 {
        return distance;
    }
    let objectives = front[0].as_ref().len();
    let mut order: Vec<usize> = (0..n).collect();
    for m in 0..objectives {
        order.sort_by(|&a, &b| {
            front[a].as_ref()[m]
                .partial_cmp(&front[b].as_ref()[m])
                .unwrap()
        });
        let lo = front[order[0]].as_ref()[m];
        let hi = front[order[n - 1]].as_ref()[m];
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n.saturating_sub(1) {
            let prev = front[order[w - 1]].as_ref()[m];
            let next = front[order[w + 1]].as_ref()[m];
            if distance[order[w]].is_finite() {
                distance[order[w]] += (next - prev) / range;
            }
        }
    }
    distance
}

struct Ranked {
    solution: Solution,
    rank: usize,
    crowding: f64,
}

fn objectives_of(solution: &Solution) -> [f64; 2] {
    [-solution.features.area, solution.features.circumference]
}

// Sort combined population, fill by whole fronts, split the last front by
// crowding. Returns exactly `target` survivors with rank/crowding set.
fn survivor_selection(pool: Vec<Solution>, target: usize) -> Vec<Ranked> {
    let objectives: Vec<[f64; 2]> = pool.iter().map(objectives_of).collect();
    let fronts = nondominated_sort(&objectives);
    let mut survivors: Vec<Ranked> = Vec::with_capacity(target);
    let mut pool: Vec<Option<Solution>> = pool.into_iter().map(Some).collect();
    for (rank, front) in fronts.into_iter().enumerate() {
        if survivors.len() == target {
            break;
        }
        let front_objs: Vec<[f64; 2]> = front.iter().map(|&i| objectives[i]).collect();
        let crowding = crowding_distance(&front_objs);
        let mut members: Vec<(usize, f64)> = front
            .iter()
            .zip(crowding.iter())
            .map(|(&i, &c)| (i, c))
            .collect();
        if survivors.len() + members.len() > target {
            members.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            members.truncate(target - survivors.len());
        }
        for (index, crowding) in members {
            survivors.push(Ranked {
                solution: pool[index].take().expect("front members are unique"),
                rank,
                crowding,
            });
        }
    }
    survivors
}

fn tournament<'a, R: Rng>(ranked: &'a [Ranked], rng: &mut R) -> &'a Ranked {
    let a = &ranked[rng.random_range(0..ranked.len())];
    let b = &ranked[rng.random_range(0..ranked.len())];
    if b.rank < a.rank || (b.rank == a.rank && b.crowding > a.crowding) {
        b
    } else {
        a
    }
}

fn sbx_blend<R: Rng>(p1: f64, p2: f64, rng: &mut R) -> (f64, f64) {
    if libm::fabs(p1 - p2) < 1e-14 {
        return (p1, p2);
    }
    let u: f64 = rng.random();
    let beta = if u <= 0.5 {
        libm::pow(2.0 * u, 1.0 / (SBX_ETA + 1.0))
    } else {
        libm::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (SBX_ETA + 1.0))
    };
    (
        0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2),
        0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2),
    )
}

/// Run the full generational loop and return the final population.
pub fn nsga2_run(cfg: &Nsga2Config) -> Result<Nsga2Outcome, OptimizerError> {
    cfg.validate()?;
    let bounds = cfg.bounds_case.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluations = 0u64;

    let genomes = initial_population(cfg.population, &bounds);
    evaluations += genomes.len() as u64;
    let initial = evaluate_batch(&genomes, &bounds);
    let mut ranked = survivor_selection(initial, cfg.population);

    for _ in 0..cfg.generations {
        let mut offspring = Vec::with_capacity(cfg.population);
        while offspring.len() < cfg.population {
            let parent_a = tournament(&ranked, &mut rng).solution.genome;
            let parent_b = tournament(&ranked, &mut rng).solution.genome;
            let (mut child_a, mut child_b) = (parent_a, parent_b);
            if rng.random::<f64>() < cfg.crossover_prob {
                for i in 0..child_a.genes().len() {
                    if rng.random::<f64>() < 0.5 {
                        let (c1, c2) =
                            sbx_blend(parent_a.genes()[i], parent_b.genes()[i], &mut rng);
                        child_a.genes_mut()[i] = bounds.clamp_gene(i, c1);
                        child_b.genes_mut()[i] = bounds.clamp_gene(i, c2);
                    }
                }
            }
            for child in [&mut child_a, &mut child_b] {
                *child = gaussian_mutate_sparse(
                    child,
                    cfg.mutation_prob_per_gene,
                    cfg.mutation_sigma_fraction,
                    &bounds,
                    &mut rng,
                );
            }
            offspring.push(child_a);
            if offspring.len() < cfg.population {
                offspring.push(child_b);
            }
        }
        evaluations += offspring.len() as u64;
        let evaluated = evaluate_batch(&offspring, &bounds);
        let mut pool: Vec<Solution> = ranked.into_iter().map(|r| r.solution).collect();
        pool.extend(evaluated);
        ranked = survivor_selection(pool, cfg.population);
    }

    Ok(Nsga2Outcome {
        population: ranked.into_iter().map(|r| r.solution).collect(),
        evaluations,
    })
}

// Per-gene mutation gate in front of the shared Gaussian operator.
fn gaussian_mutate_sparse<R: Rng>(
    genome: &crate::geometry::Genome,
    prob: f64,
    sigma_fraction: f64,
    bounds: &crate::geometry::DomainBounds,
    rng: &mut R,
) -> crate::geometry::Genome {
    let mut out = *genome;
    for i in 0..out.genes().len() {
        if rng.random::<f64>() < prob {
            let sigma = sigma_fraction * bounds.gene_range(i);
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            out.genes_mut()[i] = bounds.clamp_gene(i, out.genes()[i] + sigma * z);
        }
    }
    out
}

/// Objective vector `(-area, circumference)` used by the driver; exposed for
/// dominance checks in reports and tests.
pub fn minimization_objectives(solution: &Solution) -> [f64; 2] {
    objectives_of(solution)
}

/// The ranked wrapper is internal; expose final-front membership for tests.
pub fn nondominated_indices(population: &[Solution]) -> Vec<usize> {
    let objectives: Vec<[f64; 2]> = population.iter().map(objectives_of).collect();
    nondominated_sort(&objectives)
        .into_iter()
        .next()
        .unwrap_or_default()
}
