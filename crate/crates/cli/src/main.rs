use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use polyqd::config::{self, parse_case, parse_seeds};
use polyqd::experiments::{Preset, Study};
use polyqd::store::{read_results_file, ResultsStore};
use polyqd::{init_threads, median, svg};
use polyqd_core::autoencoder::{cae_init, train, TrainConfig};
use polyqd_core::geometry::{rasterize, BoundsCase, Solution};
use polyqd_core::metrics::{genetic_diversity, phenotypic_diversity, MetricConfig};
use polyqd_core::pareto;
use polyqd_core::sampling::initial_population;

/// Multi-solution optimization benchmark on deformable polygons: run
/// studies, compute diversity metrics, export plots and shape galleries.
#[derive(Parser)]
#[command(name = "polyqd", version, about)]
struct Cli {
    /// Worker threads (overrides POLYQD_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a study and append rows to the results store.
    Run {
        /// bin_sweep | neutrality_sweep | pareto_distance | autove_compare
        #[arg(long)]
        study: Option<String>,
        /// Config file (key = value with [sections]); flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// desk (CI scale) or full (paper scale).
        #[arg(long)]
        preset: Option<String>,
        /// Bounds case A..E for studies with a fixed case.
        #[arg(long)]
        case: Option<String>,
        /// Replicate seeds: `1..5` or `1,2,9`.
        #[arg(long)]
        seeds: Option<String>,
        /// Store directory for results.csv, manifest.txt and cell artifacts.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Diversity metrics of a stored archive CSV.
    Metrics {
        #[arg(long)]
        archive: PathBuf,
        /// Bounds case the archive was produced under.
        #[arg(long)]
        case: String,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the ground-truth Pareto set and, optionally, per-solution
    /// pixel distances of an archive.
    Pareto {
        #[arg(long)]
        case: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        archive: Option<PathBuf>,
        /// Also write the 100 ground-truth rasters as PBM files.
        #[arg(long)]
        pbm: bool,
    },
    /// Shape gallery of an archive, shaded by Pareto pixel error.
    Gallery {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        case: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// SVG charts (six diversity panels plus fitness) from a results CSV.
    Plot {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the convolutional autoencoder on a Sobol shape corpus and write
    /// the weight file plus sidecar manifest.
    TrainAe {
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 400)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        latent_dim: usize,
        #[arg(long, default_value_t = 350)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let kind = err.kind();
            let _ = err.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    init_threads(cli.threads);
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `polyqd --help` for usage");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn case_arg(s: &str) -> Result<BoundsCase, CliError> {
    parse_case(s).map_err(CliError::usage)
}

// Accepts both the full archive serialization (genes, descriptor columns,
// fitness) and the plain solution rows written for RLS/NSGA-II cells (genes,
// fitness). Bitmaps and features are re-derived from the genomes.
fn load_solutions(path: &PathBuf, case: BoundsCase) -> Result<Vec<Solution>, CliError> {
    use polyqd_core::geometry::GENOME_LEN;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read archive {}: {e}", path.display())))?;
    let bounds = case.bounds();
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Runtime("archive parse: empty file".into()))?;
    let columns = header.split(',').count();
    if columns < GENOME_LEN + 1 {
        return Err(CliError::Runtime(format!(
            "archive parse: expected at least {} columns, found {columns}",
            GENOME_LEN + 1
        )));
    }
    let mut solutions = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Runtime(format!("archive parse line {}: {e}", idx + 2)))?;
        if fields.len() != columns {
            return Err(CliError::Runtime(format!(
                "archive parse line {}: expected {columns} fields, found {}",
                idx + 2,
                fields.len()
            )));
        }
        let mut genes = [0.0; GENOME_LEN];
        genes.copy_from_slice(&fields[..GENOME_LEN]);
        let genome = polyqd_core::geometry::Genome::new(genes);
        let polygon = polyqd_core::geometry::express(&genome, &bounds)
            .map_err(|e| CliError::Runtime(format!("archive parse line {}: {e}", idx + 2)))?;
        let bitmap = rasterize(&polygon);
        solutions.push(Solution {
            genome,
            bitmap,
            features: polyqd_core::geometry::features(&polygon, &bitmap),
            fitness: fields[columns - 1],
        });
    }
    if solutions.is_empty() {
        return Err(CliError::Runtime("archive holds no solutions".into()));
    }
    Ok(solutions)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            study,
            config,
            preset,
            case,
            seeds,
            out,
        } => cmd_run(study, config, preset, case, seeds, out),
        Command::Metrics { archive, case, out } => cmd_metrics(archive, case, out),
        Command::Pareto {
            case,
            out,
            archive,
            pbm,
        } => cmd_pareto(case, out, archive, pbm),
        Command::Gallery { archive, case, out } => cmd_gallery(archive, case, out),
        Command::Plot { results, out } => cmd_plot(results, out),
        Command::TrainAe {
            case,
            count,
            latent_dim,
            epochs,
            batch_size,
            seed,
            out,
        } => cmd_train_ae(case, count, latent_dim, epochs, batch_size, seed, out),
    }
}

fn cmd_run(
    study: Option<String>,
    config_path: Option<PathBuf>,
    preset: Option<String>,
    case: Option<String>,
    seeds: Option<String>,
    out: PathBuf,
) -> Result<(), CliError> {
    let file_cfg = match &config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            config::parse(&text).map_err(|e| CliError::usage(e.to_string()))?
        }
        None => Default::default(),
    };
    let cli_study = study
        .map(|s| Study::from_str(&s).map_err(CliError::usage))
        .transpose()?;
    let cli_preset = preset
        .map(|s| Preset::from_str(&s).map_err(CliError::usage))
        .transpose()?;
    let cli_case = case.map(|s| case_arg(&s)).transpose()?;
    let cli_seeds = seeds
        .map(|s| parse_seeds(&s).map_err(CliError::usage))
        .transpose()?;
    let cfg = config::resolve(file_cfg, cli_study, cli_preset, cli_case, cli_seeds)
        .map_err(|e| CliError::usage(e.to_string()))?;

    let store = ResultsStore::create(&out)?;
    let results = polyqd::experiments::run_study(&cfg, &store)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    println!(
        "study {} complete: {} rows in {}",
        cfg.study,
        results.len(),
        store.results_path().display()
    );
    Ok(())
}

fn cmd_metrics(archive: PathBuf, case: String, out: Option<PathBuf>) -> Result<(), CliError> {
    let case = case_arg(&case)?;
    let solutions = load_solutions(&archive, case)?;
    let genomes: Vec<_> = solutions.iter().map(|s| s.genome).collect();
    let bitmaps: Vec<_> = solutions.iter().map(|s| s.bitmap).collect();
    let genetic = genetic_diversity(&genomes, &MetricConfig::genetic())
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let phenotypic = phenotypic_diversity(&bitmaps, &MetricConfig::phenotypic())
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let fitness: Vec<f64> = solutions.iter().map(|s| s.fitness).collect();
    let report = format!(
        "solutions={}\ncase={case}\nsdnn_gen={}\nspd_gen={}\npd_gen={}\n\
         sdnn_phen={}\nspd_phen={}\npd_phen={}\nfitness_median={}\n",
        solutions.len(),
        genetic.sdnn,
        genetic.spd,
        genetic.pd,
        phenotypic.sdnn,
        phenotypic.spd,
        phenotypic.pd,
        median(&fitness),
    );
    print!("{report}");
    if let Some(path) = out {
        std::fs::write(path, report)?;
    }
    Ok(())
}

fn cmd_pareto(
    case: String,
    out: PathBuf,
    archive: Option<PathBuf>,
    pbm: bool,
) -> Result<(), CliError> {
    let case = case_arg(&case)?;
    std::fs::create_dir_all(&out)?;
    let truth = pareto::ground_truth(&case.bounds());

    let mut csv = String::from("index,r,theta\n");
    for (i, (genome, _)) in truth.iter().enumerate() {
        csv.push_str(&format!("{i},{},{}\n", genome.radius(0), genome.angle(0)));
    }
    std::fs::write(out.join("ground_truth.csv"), csv)?;
    if pbm {
        for (i, (_, bitmap)) in truth.iter().enumerate() {
            std::fs::write(out.join(format!("gt_{i:03}.pbm")), bitmap.to_pbm())?;
        }
    }
    if let Some(path) = archive {
        let solutions = load_solutions(&path, case)?;
        let bitmaps: Vec<_> = solutions.iter().map(|s| s.bitmap).collect();
        let truth_bitmaps: Vec<_> = truth.iter().map(|(_, b)| *b).collect();
        let distances = pareto::pareto_distances(&bitmaps, &truth_bitmaps);
        let mut csv = String::from("index,min_pixel_error\n");
        for (i, d) in distances.iter().enumerate() {
            csv.push_str(&format!("{i},{d}\n"));
        }
        std::fs::write(out.join("pareto_distances.csv"), csv)?;
    }
    println!("wrote ground truth for case {case} to {}", out.display());
    Ok(())
}

fn cmd_gallery(archive: PathBuf, case: String, out: PathBuf) -> Result<(), CliError> {
    let case = case_arg(&case)?;
    let solutions = load_solutions(&archive, case)?;
    let genomes: Vec<_> = solutions.iter().map(|s| s.genome).collect();
    let svg = svg::gallery_svg(&genomes, case);
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&out, svg)?;
    println!("wrote gallery of {} shapes to {}", genomes.len(), out.display());
    Ok(())
}

fn cmd_plot(results: PathBuf, out: PathBuf) -> Result<(), CliError> {
    let rows = read_results_file(&results)
        .map_err(|e| CliError::usage(format!("cannot read results {}: {e}", results.display())))?;
    if rows.is_empty() {
        return Err(CliError::Runtime("results file has no rows".into()));
    }
    let study = Study::from_str(&rows[0].study)
        .map_err(|e| CliError::Runtime(format!("results file: {e}")))?;
    let written = svg::plot_study(&rows, study, &out)?;
    println!("wrote {} charts to {}", written.len(), out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train_ae(
    case: String,
    count: usize,
    latent_dim: usize,
    epochs: usize,
    batch_size: usize,
    seed: u64,
    out: PathBuf,
) -> Result<(), CliError> {
    let case = case_arg(&case)?;
    let bounds = case.bounds();
    let corpus: Vec<_> = initial_population(count, &bounds)
        .iter()
        .map(|g| {
            rasterize(&polyqd_core::geometry::express(g, &bounds).expect("sobol stays in bounds"))
        })
        .collect();
    let mut cfg = TrainConfig::standard(seed);
    cfg.epochs = epochs;
    cfg.batch_size = batch_size.min(corpus.len());
    let mut model = cae_init(latent_dim, seed);
    let history = train(&mut model, &corpus, &cfg)
        .map_err(|e| CliError::Runtime(format!("training failed: {e}")))?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&out, model.to_bytes())?;
    let manifest_path = out.with_extension("manifest.txt");
    std::fs::write(&manifest_path, model.manifest(seed))?;
    let mut loss_csv = String::from("epoch,loss\n");
    for (i, loss) in history.iter().enumerate() {
        loss_csv.push_str(&format!("{},{}\n", i + 1, loss));
    }
    std::fs::write(out.with_extension("loss.csv"), loss_csv)?;
    println!(
        "trained latent_dim={} on {} shapes: first epoch loss {:.6}, final {:.6}",
        latent_dim,
        corpus.len(),
        history.first().unwrap(),
        history.last().unwrap()
    );
    Ok(())
}
