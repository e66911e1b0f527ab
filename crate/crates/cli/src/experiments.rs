//! Study orchestration: cell enumeration, execution and result rows.
//!
//! A study is a grid of cells (algorithm x configuration x seed). Every cell
//! runs one driver under the shared evaluation budget, measures genetic and
//! phenotypic diversity of the final solution set, the median fitness and the
//! median pixel distance to the ground-truth Pareto set, and becomes one CSV
//! row. Cells are independent and run in parallel; completed cells are
//! skipped on resumption via the store manifest.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use polyqd_core::autoencoder::{autove_run, AeError, TrainConfig};
use polyqd_core::geometry::{Bitmap, BoundsCase, Solution};
use polyqd_core::metrics::{genetic_diversity, phenotypic_diversity, MetricConfig, MetricsError};
use polyqd_core::optimizers::{
    nsga2_run, rls_run, ve_run, DescriptorMode, Nsga2Config, OptimizerError, RlsConfig, VeConfig,
};
use polyqd_core::pareto;

use crate::median;
use crate::store::ResultsStore;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Autoencoder(#[from] AeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} cells failed; see the store manifest")]
    CellsFailed { failed: usize, total: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Study {
    BinSweep,
    NeutralitySweep,
    ParetoDistance,
    AutoveCompare,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::BinSweep => "bin_sweep",
            Study::NeutralitySweep => "neutrality_sweep",
            Study::ParetoDistance => "pareto_distance",
            Study::AutoveCompare => "autove_compare",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bin_sweep" | "bins" => Ok(Study::BinSweep),
            "neutrality_sweep" | "neutrality" => Ok(Study::NeutralitySweep),
            "pareto_distance" | "pareto" => Ok(Study::ParetoDistance),
            "autove_compare" | "autove" => Ok(Study::AutoveCompare),
            other => Err(format!(
                "unknown study '{other}' (expected bin_sweep, neutrality_sweep, \
                 pareto_distance or autove_compare)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// CI scale: 100 solutions, 256 generations, shortened autoencoder
    /// schedule. Finishes in minutes.
    Desk,
    /// Paper scale: 400 solutions, 1024 generations, 350 training epochs.
    Full,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Preset::Desk),
            "full" => Ok(Preset::Full),
            other => Err(format!("unknown preset '{other}' (expected desk or full)")),
        }
    }
}

/// The bin-capacity grid of the sweep study.
pub const BIN_GRID: [usize; 5] = [25, 50, 100, 200, 400];
/// Local-search step size shared by every study.
pub const RLS_STEP_SIZE: f64 = 0.065;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub study: Study,
    pub bounds_case: BoundsCase,
    pub solutions: usize,
    pub generations: usize,
    pub seeds: Vec<u64>,
    pub latent_dims: Vec<usize>,
    pub train_epochs: usize,
    pub train_batch: usize,
    pub train_learning_rate: f64,
}

impl ExperimentConfig {
    pub fn new(study: Study, preset: Preset) -> Self {
        let (solutions, generations, train_epochs) = match preset {
            Preset::Desk => (100, 256, 100),
            Preset::Full => (400, 1024, 350),
        };
        Self {
            study,
            bounds_case: BoundsCase::B,
            solutions,
            generations,
            seeds: (1..=5).collect(),
            latent_dims: vec![2, 5, 10],
            train_epochs,
            train_batch: 32,
            train_learning_rate: 0.001,
        }
    }

    /// Shared fitness-evaluation budget of one cell.
    pub fn eval_budget(&self, bins: usize) -> u64 {
        bins as u64 * (self.generations as u64 + 1)
    }

    fn train_config(&self, seed: u64, corpus: usize) -> TrainConfig {
        let mut cfg = TrainConfig::standard(seed);
        cfg.epochs = self.train_epochs;
        cfg.batch_size = self.train_batch.min(corpus.max(1));
        cfg.learning_rate = self.train_learning_rate;
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    VeGenetic,
    VeFeature,
    Nsga2,
    Rls,
    AutoVe(usize),
}

impl Algorithm {
    pub fn tag(self) -> String {
        match self {
            Algorithm::VeGenetic => "ve_genetic".into(),
            Algorithm::VeFeature => "ve_feature".into(),
            Algorithm::Nsga2 => "nsga2".into(),
            Algorithm::Rls => "rls".into(),
            Algorithm::AutoVe(dim) => format!("autove{dim}"),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// One unit of work: algorithm x configuration x seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub study: Study,
    pub case: BoundsCase,
    pub algorithm: Algorithm,
    pub bins: usize,
    pub seed: u64,
}

impl Cell {
    pub fn id(&self) -> String {
        format!(
            "{}_{}_{}_b{}_s{}",
            self.study, self.case, self.algorithm, self.bins, self.seed
        )
    }
}

/// The full cell grid of a study, in canonical order.
pub fn cells_for(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    match cfg.study {
        Study::BinSweep => {
            for &bins in &BIN_GRID {
                for algorithm in [Algorithm::VeGenetic, Algorithm::VeFeature] {
                    for &seed in &cfg.seeds {
                        cells.push(Cell {
                            study: cfg.study,
                            case: cfg.bounds_case,
                            algorithm,
                            bins,
                            seed,
                        });
                    }
                }
            }
        }
        Study::NeutralitySweep => {
            for case in BoundsCase::all() {
                for algorithm in [Algorithm::VeFeature, Algorithm::Rls, Algorithm::Nsga2] {
                    for &seed in &cfg.seeds {
                        cells.push(Cell {
                            study: cfg.study,
                            case,
                            algorithm,
                            bins: cfg.solutions,
                            seed,
                        });
                    }
                }
            }
        }
        Study::ParetoDistance => {
            for case in [BoundsCase::B, BoundsCase::E] {
                for algorithm in [Algorithm::VeFeature, Algorithm::Rls, Algorithm::Nsga2] {
                    for &seed in &cfg.seeds {
                        cells.push(Cell {
                            study: cfg.study,
                            case,
                            algorithm,
                            bins: cfg.solutions,
                            seed,
                        });
                    }
                }
            }
        }
        Study::AutoveCompare => {
            let mut algorithms = vec![Algorithm::VeFeature];
            algorithms.extend(cfg.latent_dims.iter().map(|&d| Algorithm::AutoVe(d)));
            for algorithm in algorithms {
                for &seed in &cfg.seeds {
                    cells.push(Cell {
                        study: cfg.study,
                        case: cfg.bounds_case,
                        algorithm,
                        bins: cfg.solutions,
                        seed,
                    });
                }
            }
        }
    }
    cells
}

/// One results row; the CSV schema is stable for downstream tooling.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub study: String,
    pub case: String,
    pub algorithm: String,
    pub bins: usize,
    pub seed: u64,
    pub sdnn_gen: f64,
    pub spd_gen: f64,
    pub pd_gen: f64,
    pub sdnn_phen: f64,
    pub spd_phen: f64,
    pub pd_phen: f64,
    pub fitness_median: f64,
    pub pareto_px_min_median: f64,
    pub wall_ms: u64,
}

pub const RESULTS_HEADER: &str = "study,case,algorithm,bins,seed,sdnn_gen,spd_gen,pd_gen,\
sdnn_phen,spd_phen,pd_phen,fitness_median,pareto_px_min_median,wall_ms";

impl RunResult {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.study,
            self.case,
            self.algorithm,
            self.bins,
            self.seed,
            self.sdnn_gen,
            self.spd_gen,
            self.pd_gen,
            self.sdnn_phen,
            self.spd_phen,
            self.pd_phen,
            self.fitness_median,
            self.pareto_px_min_median,
            self.wall_ms
        )
    }

    pub fn from_csv_row(row: &str) -> Option<RunResult> {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 14 {
            return None;
        }
        Some(RunResult {
            study: fields[0].to_string(),
            case: fields[1].to_string(),
            algorithm: fields[2].to_string(),
            bins: fields[3].parse().ok()?,
            seed: fields[4].parse().ok()?,
            sdnn_gen: fields[5].parse().ok()?,
            spd_gen: fields[6].parse().ok()?,
            pd_gen: fields[7].parse().ok()?,
            sdnn_phen: fields[8].parse().ok()?,
            spd_phen: fields[9].parse().ok()?,
            pd_phen: fields[10].parse().ok()?,
            fitness_median: fields[11].parse().ok()?,
            pareto_px_min_median: fields[12].parse().ok()?,
            wall_ms: fields[13].parse().ok()?,
        })
    }

    /// Identity of the originating cell (first five columns).
    pub fn cell_key(&self) -> String {
        format!(
            "{}_{}_{}_b{}_s{}",
            self.study, self.case, self.algorithm, self.bins, self.seed
        )
    }
}

/// Everything a finished cell persists.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub result: RunResult,
    pub solutions_csv: String,
    pub cell_manifest: String,
    pub evaluations: u64,
}

fn solutions_to_csv(solutions: &[Solution]) -> String {
    let mut out = String::new();
    for g in 0..polyqd_core::geometry::GENOME_LEN {
        out.push_str(&format!("g{g},"));
    }
    out.push_str("fitness\n");
    for s in solutions {
        for gene in s.genome.genes() {
            out.push_str(&format!("{gene},"));
        }
        out.push_str(&format!("{}\n", s.fitness));
    }
    out
}

/// Diversity, fitness and Pareto-proximity summary of one solution set.
pub fn summarize_solutions(
    solutions: &[Solution],
    case: BoundsCase,
) -> Result<(RunResultMetrics, Vec<f64>), MetricsError> {
    let genomes: Vec<_> = solutions.iter().map(|s| s.genome).collect();
    let bitmaps: Vec<Bitmap> = solutions.iter().map(|s| s.bitmap).collect();
    let genetic = genetic_diversity(&genomes, &MetricConfig::genetic())?;
    let phenotypic = phenotypic_diversity(&bitmaps, &MetricConfig::phenotypic())?;
    let truth: Vec<Bitmap> = pareto::ground_truth(&case.bounds())
        .into_iter()
        .map(|(_, b)| b)
        .collect();
    let distances = pareto::pareto_distances(&bitmaps, &truth);
    let fitness: Vec<f64> = solutions.iter().map(|s| s.fitness).collect();
    Ok((
        RunResultMetrics {
            genetic,
            phenotypic,
            fitness_median: median(&fitness),
            pareto_px_min_median: median(&distances),
        },
        distances,
    ))
}

#[derive(Debug, Clone, Copy)]
pub struct RunResultMetrics {
    pub genetic: polyqd_core::metrics::DiversitySummary,
    pub phenotypic: polyqd_core::metrics::DiversitySummary,
    pub fitness_median: f64,
    pub pareto_px_min_median: f64,
}

/// Run one cell's driver and return its solution set, the consumed budget
/// and the artifact CSV (the full archive serialization for VE modes, plain
/// genome/fitness rows otherwise).
pub fn run_cell_solutions(
    cfg: &ExperimentConfig,
    cell: &Cell,
) -> Result<(Vec<Solution>, u64, String), ExperimentError> {
    match cell.algorithm {
        Algorithm::VeGenetic | Algorithm::VeFeature => {
            let mode = if cell.algorithm == Algorithm::VeGenetic {
                DescriptorMode::Genetic
            } else {
                DescriptorMode::Feature
            };
            let ve_cfg =
                VeConfig::standard(cell.bins, cfg.generations, mode, cell.case, cell.seed);
            let outcome = ve_run(&ve_cfg)?;
            let solutions = outcome
                .archive
                .elites()
                .iter()
                .map(|e| Solution {
                    genome: e.genome,
                    bitmap: e.bitmap,
                    features: polyqd_core::geometry::features(
                        &polyqd_core::geometry::express(&e.genome, &cell.case.bounds())
                            .expect("elites are in bounds"),
                        &e.bitmap,
                    ),
                    fitness: e.fitness,
                })
                .collect();
            let artifact = outcome.archive.to_csv();
            Ok((solutions, outcome.evaluations, artifact))
        }
        Algorithm::Nsga2 => {
            let nsga_cfg =
                Nsga2Config::standard(cell.bins, cfg.generations, cell.case, cell.seed);
            let outcome = nsga2_run(&nsga_cfg)?;
            let artifact = solutions_to_csv(&outcome.population);
            Ok((outcome.population, outcome.evaluations, artifact))
        }
        Algorithm::Rls => {
            let rls_cfg = RlsConfig {
                restarts: cell.bins,
                step_size: RLS_STEP_SIZE,
                max_evals_per_restart: cfg.generations as u64 + 1,
                bounds_case: cell.case,
                seed: cell.seed,
            };
            let outcome = rls_run(&rls_cfg)?;
            let artifact = solutions_to_csv(&outcome.solutions);
            Ok((outcome.solutions, outcome.evaluations, artifact))
        }
        Algorithm::AutoVe(dim) => {
            let ve_cfg = VeConfig::standard(
                cell.bins,
                cfg.generations,
                DescriptorMode::Latent { dim },
                cell.case,
                cell.seed,
            );
            let train_cfg = cfg.train_config(cell.seed, cell.bins);
            let outcome = autove_run(&ve_cfg, &train_cfg)?;
            let bounds = cell.case.bounds();
            let solutions = outcome
                .archive
                .elites()
                .iter()
                .map(|e| Solution {
                    genome: e.genome,
                    bitmap: e.bitmap,
                    features: polyqd_core::geometry::features(
                        &polyqd_core::geometry::express(&e.genome, &bounds)
                            .expect("elites are in bounds"),
                        &e.bitmap,
                    ),
                    fitness: e.fitness,
                })
                .collect();
            let artifact = outcome.archive.to_csv();
            Ok((solutions, outcome.evaluations, artifact))
        }
    }
}

/// Execute a cell end to end: driver, metrics, artifact strings.
pub fn execute_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<CellOutcome, ExperimentError> {
    let started = Instant::now();
    let (solutions, evaluations, artifact) = run_cell_solutions(cfg, cell)?;
    let (metrics, _) = summarize_solutions(&solutions, cell.case)?;
    let wall_ms = started.elapsed().as_millis() as u64;
    let result = RunResult {
        study: cell.study.name().to_string(),
        case: cell.case.to_string(),
        algorithm: cell.algorithm.tag(),
        bins: cell.bins,
        seed: cell.seed,
        sdnn_gen: metrics.genetic.sdnn,
        spd_gen: metrics.genetic.spd,
        pd_gen: metrics.genetic.pd,
        sdnn_phen: metrics.phenotypic.sdnn,
        spd_phen: metrics.phenotypic.spd,
        pd_phen: metrics.phenotypic.pd,
        fitness_median: metrics.fitness_median,
        pareto_px_min_median: metrics.pareto_px_min_median,
        wall_ms,
    };
    let cell_manifest = format!(
        "cell={}\nstudy={}\ncase={}\nalgorithm={}\nbins={}\nseed={}\ngenerations={}\n\
         eval_budget={}\nevaluations={}\nsolutions={}\n",
        cell.id(),
        cell.study,
        cell.case,
        cell.algorithm,
        cell.bins,
        cell.seed,
        cfg.generations,
        cfg.eval_budget(cell.bins),
        evaluations,
        solutions.len(),
    );
    Ok(CellOutcome {
        result,
        solutions_csv: artifact,
        cell_manifest,
        evaluations,
    })
}

/// Run every pending cell of the study, appending rows as cells finish and
/// canonicalizing the results file at the end. Failed cells are recorded and
/// do not stop the rest.
pub fn run_study(
    cfg: &ExperimentConfig,
    store: &ResultsStore,
) -> Result<Vec<RunResult>, ExperimentError> {
    use rayon::prelude::*;

    let cells = cells_for(cfg);
    let done = store.completed()?;
    let pending: Vec<Cell> = cells
        .iter()
        .copied()
        .filter(|c| !done.contains(&c.id()))
        .collect();

    let outcomes: Vec<(Cell, Result<CellOutcome, ExperimentError>)> = pending
        .par_iter()
        .map(|cell| {
            let outcome = execute_cell(cfg, cell);
            if let Ok(ok) = &outcome {
                // persist immediately so an interrupt loses at most the
                // in-flight cells
                let _ = store.append_cell(&cell.id(), ok);
            }
            (*cell, outcome)
        })
        .collect();

    let mut failed = 0;
    for (cell, outcome) in &outcomes {
        if let Err(err) = outcome {
            failed += 1;
            store.record_failure(&cell.id(), &err.to_string())?;
        }
    }
    let order: Vec<String> = cells.iter().map(|c| c.id()).collect();
    store.canonicalize(&order)?;
    if failed > 0 {
        return Err(ExperimentError::CellsFailed {
            failed,
            total: cells.len(),
        });
    }
    store.read_results()
}
