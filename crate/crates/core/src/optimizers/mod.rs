//! The three paradigm drivers sharing one evaluation pipeline.
//!
//! * [`ve_run`] — Voronoi-Elites with genetic or feature descriptors.
//! * [`nsga2_run`] — NSGA-II on (area, circumference).
//! * [`rls_run`] — restarted quasi-Newton local search on the symmetry
//!   fitness.
//!
//! All drivers are seed-deterministic and report how many fitness
//! evaluations they consumed, so studies can hold the budget fixed across
//! paradigms.

mod local_search;
mod nsga2;

pub use local_search::{local_search, LocalSearchResult};
pub use nsga2::{
    crowding_distance, dominates, minimization_objectives, nondominated_indices,
    nondominated_sort, nsga2_run, Nsga2Config, Nsga2Outcome,
};

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::archive::{ArchiveError, Candidate, VeArchive};
use crate::geometry::{self, BoundsCase, DomainBounds, Features, Genome, GeometryError};
pub use crate::geometry::Solution;
use crate::sampling::{initial_population, scale_to_bounds, SamplingError, SobolGenerator};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizerError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Which coordinates the Voronoi-Elites archive niches in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorMode {
    /// The raw 16-gene vector: VE behaves like a multimodal optimizer.
    Genetic,
    /// Normalized (area, circumference): VE behaves like a quality-diversity
    /// optimizer.
    Feature,
    /// Autoencoder latent coordinates; only valid through
    /// [`crate::autoencoder::autove_run`].
    Latent { dim: usize },
}

impl DescriptorMode {
    pub fn dimension(&self) -> usize {
        match self {
            DescriptorMode::Genetic => geometry::GENOME_LEN,
            DescriptorMode::Feature => 2,
            DescriptorMode::Latent { dim } => *dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VeConfig {
    pub archive_capacity: usize,
    pub generations: usize,
    pub mutation_sigma_fraction: f64,
    pub descriptor_mode: DescriptorMode,
    pub bounds_case: BoundsCase,
    pub seed: u64,
}

impl VeConfig {
    pub fn standard(
        capacity: usize,
        generations: usize,
        mode: DescriptorMode,
        case: BoundsCase,
        seed: u64,
    ) -> Self {
        Self {
            archive_capacity: capacity,
            generations,
            mutation_sigma_fraction: 0.10,
            descriptor_mode: mode,
            bounds_case: case,
            seed,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), OptimizerError> {
        if self.archive_capacity == 0 {
            return Err(OptimizerError::InvalidConfig(
                "archive capacity must be positive",
            ));
        }
        if self.generations == 0 {
            return Err(OptimizerError::InvalidConfig("generations must be at least 1"));
        }
        if !(self.mutation_sigma_fraction > 0.0 && self.mutation_sigma_fraction <= 1.0) {
            return Err(OptimizerError::InvalidConfig(
                "mutation_sigma_fraction must lie in (0, 1]",
            ));
        }
        if let DescriptorMode::Latent { dim } = self.descriptor_mode {
            if dim == 0 {
                return Err(OptimizerError::InvalidConfig("latent dimension must be positive"));
            }
        }
        Ok(())
    }

    /// Initial population plus one batch per generation.
    pub fn evaluation_budget(&self) -> u64 {
        self.archive_capacity as u64 * (self.generations as u64 + 1)
    }
}

#[derive(Debug, Clone)]
pub struct VeOutcome {
    pub archive: VeArchive,
    pub evaluations: u64,
}

/// Perturb every gene with `N(0, (sigma_fraction * range)^2)` and clip back
/// into the bounds.
pub fn gaussian_mutate<R: Rng + ?Sized>(
    genome: &Genome,
    sigma_fraction: f64,
    bounds: &DomainBounds,
    rng: &mut R,
) -> Genome {
    let mut out = *genome;
    for i in 0..geometry::GENOME_LEN {
        let sigma = sigma_fraction * bounds.gene_range(i);
        if sigma > 0.0 {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            out.genes_mut()[i] = bounds.clamp_gene(i, out.genes()[i] + sigma * z);
        }
    }
    out
}

/// Evaluate a batch of in-bounds genomes. Degenerate zero-perimeter shapes
/// get the sentinel fitness 0 (real fitness is always positive), an empty
/// bitmap and zero features. With the `parallel` feature the batch is mapped
/// in parallel and collected in order, so results are identical to the
/// serial path.
pub fn evaluate_batch(genomes: &[Genome], bounds: &DomainBounds) -> Vec<Solution> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        genomes
            .par_iter()
            .map(|g| evaluate_lenient(g, bounds))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        genomes.iter().map(|g| evaluate_lenient(g, bounds)).collect()
    }
}

/// Evaluation that never fails on degenerate shapes.
pub fn evaluate_lenient(genome: &Genome, bounds: &DomainBounds) -> Solution {
    let polygon = geometry::express(genome, bounds).expect("genome stays in bounds");
    let bitmap = geometry::rasterize(&polygon);
    let features = geometry::features(&polygon, &bitmap);
    let fitness = geometry::symmetry_fitness(&polygon).unwrap_or(0.0);
    Solution {
        genome: *genome,
        bitmap,
        features,
        fitness,
    }
}

pub(crate) fn descriptor_of(
    mode: DescriptorMode,
    bounds: &DomainBounds,
    genome: &Genome,
    features: &Features,
) -> Vec<f64> {
    match mode {
        DescriptorMode::Genetic => genome.genes().to_vec(),
        DescriptorMode::Feature => alloc::vec![
            features.area,
            features.circumference / bounds.max_circumference(),
        ],
        DescriptorMode::Latent { .. } => {
            unreachable!("latent descriptors are computed by autove_run")
        }
    }
}

/// Add evaluated solutions with precomputed descriptors, skipping degenerate
/// sentinel-fitness entries.
pub(crate) fn ingest(
    archive: &mut VeArchive,
    solutions: Vec<Solution>,
    descriptors: Vec<Vec<f64>>,
) -> Result<(), ArchiveError> {
    let candidates: Vec<Candidate> = solutions
        .into_iter()
        .zip(descriptors)
        .filter(|(s, _)| s.fitness > 0.0)
        .map(|(s, descriptor)| Candidate {
            genome: s.genome,
            descriptor,
            fitness: s.fitness,
            bitmap: s.bitmap,
        })
        .collect();
    archive.insert(candidates)
}

/// The Voronoi-Elites generation loop: select `batch` parents at random,
/// mutate, evaluate, add everything, prune. `descriptors` maps a freshly
/// evaluated batch to its niche coordinates.
pub(crate) fn run_generations<F>(
    archive: &mut VeArchive,
    rng: &mut ChaCha8Rng,
    generations: usize,
    batch: usize,
    sigma_fraction: f64,
    bounds: &DomainBounds,
    evaluations: &mut u64,
    mut descriptors: F,
) -> Result<(), OptimizerError>
where
    F: FnMut(&[Solution]) -> Vec<Vec<f64>>,
{
    for _ in 0..generations {
        let offspring: Vec<Genome> = {
            let parents = archive.select_random(batch, rng)?;
            parents
                .iter()
                .map(|p| gaussian_mutate(&p.genome, sigma_fraction, bounds, rng))
                .collect()
        };
        *evaluations += offspring.len() as u64;
        let solutions = evaluate_batch(&offspring, bounds);
        let coords = descriptors(&solutions);
        ingest(archive, solutions, coords)?;
        archive.prune_to_capacity();
    }
    Ok(())
}

/// Voronoi-Elites: Sobol initialization, then per generation select
/// capacity-many parents at random, mutate, evaluate, add everything and
/// prune back to capacity.
pub fn ve_run(cfg: &VeConfig) -> Result<VeOutcome, OptimizerError> {
    cfg.validate()?;
    if matches!(cfg.descriptor_mode, DescriptorMode::Latent { .. }) {
        return Err(OptimizerError::InvalidConfig(
            "latent descriptor mode runs through autove_run",
        ));
    }
    let bounds = cfg.bounds_case.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut archive = VeArchive::new(cfg.archive_capacity, cfg.descriptor_mode.dimension());
    let mut evaluations = 0u64;
    let mode = cfg.descriptor_mode;
    let describe = |solutions: &[Solution]| {
        solutions
            .iter()
            .map(|s| descriptor_of(mode, &bounds, &s.genome, &s.features))
            .collect()
    };

    let init = initial_population(cfg.archive_capacity, &bounds);
    evaluations += init.len() as u64;
    let solutions = evaluate_batch(&init, &bounds);
    let coords = describe(&solutions);
    ingest(&mut archive, solutions, coords)?;
    archive.prune_to_capacity();

    run_generations(
        &mut archive,
        &mut rng,
        cfg.generations,
        cfg.archive_capacity,
        cfg.mutation_sigma_fraction,
        &bounds,
        &mut evaluations,
        describe,
    )?;

    Ok(VeOutcome {
        archive,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlsConfig {
    /// One restart per requested solution; studies set this to the VE
    /// archive capacity.
    pub restarts: usize,
    /// Initial line-search step in units of the parameter range.
    pub step_size: f64,
    /// Budget share of one restart; leftover from early convergence rolls
    /// over to later restarts so the total budget is actually consumed.
    pub max_evals_per_restart: u64,
    pub bounds_case: BoundsCase,
    pub seed: u64,
}

impl RlsConfig {
    pub fn standard(restarts: usize, generations: usize, case: BoundsCase, seed: u64) -> Self {
        Self {
            restarts,
            step_size: 0.065,
            max_evals_per_restart: generations as u64 + 1,
            bounds_case: case,
            seed,
        }
    }

    pub fn evaluation_budget(&self) -> u64 {
        self.restarts as u64 * self.max_evals_per_restart
    }
}

#[derive(Debug, Clone)]
pub struct RlsOutcome {
    pub solutions: Vec<Solution>,
    pub evaluations: u64,
}

/// Restarted local search. Restart 0 starts at the center of the parameter
/// range; later restarts start at successive points of a seed-scrambled
/// Sobol stream for space-filling coverage.
pub fn rls_run(cfg: &RlsConfig) -> Result<RlsOutcome, OptimizerError> {
    if cfg.restarts == 0 {
        return Err(OptimizerError::InvalidConfig("restarts must be at least 1"));
    }
    if !(cfg.step_size > 0.0) {
        return Err(OptimizerError::InvalidConfig("step size must be positive"));
    }
    let bounds = cfg.bounds_case.bounds();
    let budget = cfg.evaluation_budget();
    let mut sobol = SobolGenerator::scrambled(geometry::GENOME_LEN, cfg.seed)?;
    let mut consumed = 0u64;
    let mut solutions = Vec::with_capacity(cfg.restarts);

    for restart in 0..cfg.restarts {
        let remaining_restarts = (cfg.restarts - restart) as u64;
        let slice = (budget - consumed) / remaining_restarts;
        let start = if restart == 0 {
            bounds.center()
        } else {
            scale_to_bounds(&sobol.next_point(), &bounds)
        };
        let objective = |g: &Genome| {
            geometry::express(g, &bounds)
                .ok()
                .and_then(|p| geometry::symmetry_fitness(&p).ok())
                .unwrap_or(0.0)
        };
        let result = local_search(&start, objective, &bounds, cfg.step_size, slice);
        consumed += result.evaluations;
        solutions.push(evaluate_lenient(&result.genome, &bounds));
    }

    Ok(RlsOutcome {
        solutions,
        evaluations: consumed,
    })
}
