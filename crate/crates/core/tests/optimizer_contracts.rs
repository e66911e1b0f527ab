//! Driver contracts: budgets, determinism, sorting oracles, operator
//! statistics.

use polyqd_core::geometry::{BoundsCase, Genome, GENOME_LEN};
use polyqd_core::optimizers::{
    dominates, gaussian_mutate, local_search, minimization_objectives, nondominated_sort,
    nsga2_run, rls_run, ve_run, DescriptorMode, Nsga2Config, RlsConfig, VeConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn nondominated_sort_matches_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..10 {
        let n = 30;
        let objs: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let fronts = nondominated_sort(&objs);

        // naive: peel fronts by checking every pair each round
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut expected: Vec<Vec<usize>> = Vec::new();
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&p| {
                    !remaining
                        .iter()
                        .any(|&q| q != p && dominates(&objs[q], &objs[p]))
                })
                .collect();
            remaining.retain(|i| !front.contains(i));
            expected.push(front);
        }
        // order within a front is not part of the contract
        let normalize = |fs: &[Vec<usize>]| -> Vec<Vec<usize>> {
            fs.iter()
                .map(|f| {
                    let mut f = f.clone();
                    f.sort_unstable();
                    f
                })
                .collect()
        };
        assert_eq!(normalize(&fronts), normalize(&expected), "trial {trial}");
        let total: usize = fronts.iter().map(|f| f.len()).sum();
        assert_eq!(total, n);
    }
}

#[test]
fn gaussian_mutation_sample_statistics() {
    // case A radial gene: sigma should be 0.1 * (1 - 0) within 2%
    let bounds = BoundsCase::A.bounds();
    let center = bounds.center();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 100_000;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let mutated = gaussian_mutate(&center, 0.10, &bounds, &mut rng);
        let delta = mutated.radius(0) - center.radius(0);
        sum += delta;
        sum_sq += delta * delta;
    }
    let mean = sum / n as f64;
    let sigma = (sum_sq / n as f64 - mean * mean).sqrt();
    assert!(
        (sigma - 0.1).abs() < 0.002,
        "empirical sigma {sigma} should be 0.1 within 2%"
    );
    assert!(mean.abs() < 0.002);
}

#[test]
fn mutation_clips_to_bounds_at_extremes() {
    let bounds = BoundsCase::A.bounds();
    let top = Genome::uniform(1.0, 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let mutated = gaussian_mutate(&top, 0.5, &bounds, &mut rng);
        assert!(bounds.validate(&mutated).is_ok());
    }
}

#[test]
fn ve_and_nsga2_budgets_are_exact() {
    let ve_cfg = VeConfig::standard(12, 7, DescriptorMode::Feature, BoundsCase::B, 1);
    let ve = ve_run(&ve_cfg).unwrap();
    assert_eq!(ve.evaluations, 12 * 8);

    let nsga_cfg = Nsga2Config::standard(12, 7, BoundsCase::B, 1);
    let nsga = nsga2_run(&nsga_cfg).unwrap();
    assert_eq!(nsga.evaluations, 12 * 8);
    assert_eq!(nsga.population.len(), 12);
}

#[test]
fn rls_budget_parity_within_one_batch() {
    // tight budget, hard case: restarts never converge early, so the whole
    // budget is spent up to the last partial gradient
    let cfg = RlsConfig {
        restarts: 12,
        step_size: 0.065,
        max_evals_per_restart: 8,
        bounds_case: BoundsCase::E,
        seed: 4,
    };
    let outcome = rls_run(&cfg).unwrap();
    assert_eq!(outcome.solutions.len(), 12);
    let budget = cfg.evaluation_budget();
    assert!(outcome.evaluations <= budget);
    // rollover concentrates leftovers on the last restart, which exits
    // holding less than one gradient's worth of evaluations
    assert!(
        budget - outcome.evaluations <= 2 * GENOME_LEN as u64 + 1,
        "consumed {} of {budget}",
        outcome.evaluations
    );
}

#[test]
fn rls_budget_spent_with_realistic_slice() {
    let cfg = RlsConfig::standard(8, 40, BoundsCase::C, 5);
    let outcome = rls_run(&cfg).unwrap();
    let budget = cfg.evaluation_budget();
    assert!(outcome.evaluations <= budget);
    // rollover keeps the shortfall below one batch (here: one per restart
    // tail, bounded by the gradient cost)
    assert!(budget - outcome.evaluations <= 8 * (2 * GENOME_LEN as u64 + 1));
}

#[test]
fn drivers_are_seed_deterministic() {
    let nsga_cfg = Nsga2Config::standard(10, 4, BoundsCase::C, 9);
    let a = nsga2_run(&nsga_cfg).unwrap();
    let b = nsga2_run(&nsga_cfg).unwrap();
    for (x, y) in a.population.iter().zip(b.population.iter()) {
        assert_eq!(x.genome, y.genome);
        assert_eq!(x.fitness.to_bits(), y.fitness.to_bits());
    }

    let rls_cfg = RlsConfig::standard(4, 20, BoundsCase::B, 9);
    let a = rls_run(&rls_cfg).unwrap();
    let b = rls_run(&rls_cfg).unwrap();
    for (x, y) in a.solutions.iter().zip(b.solutions.iter()) {
        assert_eq!(x.genome, y.genome);
    }
}

#[test]
fn nsga2_final_population_front_zero_is_nondominated() {
    let cfg = Nsga2Config::standard(16, 10, BoundsCase::B, 11);
    let outcome = nsga2_run(&cfg).unwrap();
    let objs: Vec<[f64; 2]> = outcome
        .population
        .iter()
        .map(minimization_objectives)
        .collect();
    let fronts = nondominated_sort(&objs);
    for &i in &fronts[0] {
        for (j, other) in objs.iter().enumerate() {
            if i != j {
                assert!(!dominates(other, &objs[i]));
            }
        }
    }
}

#[test]
fn nsga2_population_genomes_stay_in_bounds() {
    let cfg = Nsga2Config::standard(10, 6, BoundsCase::D, 13);
    let bounds = BoundsCase::D.bounds();
    let outcome = nsga2_run(&cfg).unwrap();
    for s in &outcome.population {
        assert!(bounds.validate(&s.genome).is_ok());
    }
}

#[test]
fn ve_archive_genomes_stay_in_bounds() {
    let cfg = VeConfig::standard(10, 6, DescriptorMode::Genetic, BoundsCase::E, 13);
    let bounds = BoundsCase::E.bounds();
    let outcome = ve_run(&cfg).unwrap();
    for e in outcome.archive.elites() {
        assert!(bounds.validate(&e.genome).is_ok());
    }
}

#[test]
fn local_search_respects_budget_and_monotonicity() {
    let bounds = BoundsCase::B.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..5 {
        let mut genes = [0.0; GENOME_LEN];
        for (i, g) in genes.iter_mut().enumerate() {
            *g = bounds.gene_min(i) + rng.random::<f64>() * bounds.gene_range(i);
        }
        let objective = |g: &Genome| {
            polyqd_core::geometry::express(g, &bounds)
                .ok()
                .and_then(|p| polyqd_core::geometry::symmetry_fitness(&p).ok())
                .unwrap_or(0.0)
        };
        let result = local_search(&Genome::new(genes), objective, &bounds, 0.065, 300);
        assert!(result.evaluations <= 300);
        assert!(bounds.validate(&result.genome).is_ok());
        for w in result.trajectory.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(result.fitness >= result.trajectory[0]);
    }
}

// The symmetric manifold is the basin optimum: a dense random hill climb
// from the same perturbed start cannot beat the quasi-Newton result by more
// than noise, and both land near fitness 1.
#[test]
fn perturbed_start_basin_optimum_is_symmetric() {
    let bounds = BoundsCase::A.bounds();
    let mut genes = [0.5; GENOME_LEN];
    genes[8..].fill(0.0);
    genes[0] = 0.55;
    let start = Genome::new(genes);
    let objective = |g: &Genome| {
        polyqd_core::geometry::express(g, &bounds)
            .ok()
            .and_then(|p| polyqd_core::geometry::symmetry_fitness(&p).ok())
            .unwrap_or(0.0)
    };
    let qn = local_search(&start, objective, &bounds, 0.065, 2000);
    assert!(qn.fitness >= 0.999, "quasi-Newton reached only {}", qn.fitness);

    // oracle: (1+1)-ES hill climb with the 1/5th success rule; it climbs
    // the same basin without any gradient machinery
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut best = start;
    let mut best_f = objective(&start);
    let mut sigma = 0.02;
    for _ in 0..12_000 {
        let mut probe = best;
        for i in 0..GENOME_LEN {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            probe.genes_mut()[i] =
                bounds.clamp_gene(i, probe.genes()[i] + sigma * z * bounds.gene_range(i));
        }
        let f = objective(&probe);
        if f > best_f {
            best = probe;
            best_f = f;
            sigma *= 1.5;
        } else {
            sigma = (sigma * 0.97).max(1e-7);
        }
    }
    // the climb heads for the same optimum: fitness keeps rising toward 1
    // and opposite control points coincide, i.e. the basin optimum is the
    // point-symmetric shape the quasi-Newton search found
    assert!(best_f >= 0.8, "hill climb reached only {best_f}");
    for i in 0..4 {
        assert!((best.radius(i) - best.radius(i + 4)).abs() < 0.02);
        assert!((best.angle(i) - best.angle(i + 4)).abs() < 0.02);
    }
    assert!(qn.fitness >= best_f - 1e-9);
}
