//! Independent oracles for the diversity indicators.

use polyqd_core::geometry::Genome;
use polyqd_core::metrics::{
    euclidean, l_fractional, pure_diversity, sdnn, solow_polasky, MetricConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vectors(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
        .collect()
}

/// Exact PD by evaluating the recursive definition over all subsets.
/// `pd[mask] = max over i in mask of pd[mask \ i] + min dist of i to mask \ i`
fn pd_exact(d: &[Vec<f64>]) -> f64 {
    let n = d.len();
    assert!(n <= 16, "exponential oracle");
    let mut pd = vec![0.0f64; 1 << n];
    for mask in 1usize..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            if mask & (1 << i) == 0 {
                continue;
            }
            let rest = mask & !(1 << i);
            let mut nearest = f64::INFINITY;
            for j in 0..n {
                if rest & (1 << j) != 0 {
                    nearest = nearest.min(d[i][j]);
                }
            }
            best = best.max(pd[rest] + nearest);
        }
        pd[mask] = best;
    }
    pd[(1 << n) - 1]
}

fn distance_matrix(items: &[Vec<f64>]) -> Vec<Vec<f64>> {
    items
        .iter()
        .map(|a| items.iter().map(|b| euclidean(a, b)).collect())
        .collect()
}

// The recursive definition maximizes over all accounting orders, so the
// greedy can never exceed it; the two agree on most random sets but exact
// equality everywhere is unattainable for a tractable algorithm (see the
// acceptance suite for the literal criterion).
#[test]
fn greedy_pd_never_exceeds_exact_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut matches = 0;
    for trial in 0..100 {
        let n = 2 + (trial % 7); // sizes 2..=8
        let items = random_vectors(n, 3, &mut rng);
        let exact = pd_exact(&distance_matrix(&items));
        let greedy = pure_diversity(&items, |a, b| euclidean(a, b)).unwrap();
        assert!(
            greedy <= exact + 1e-9 * exact.abs().max(1.0),
            "trial {trial}: greedy {greedy} above exact {exact}"
        );
        if (exact - greedy).abs() <= 1e-9 * exact.abs().max(1.0) {
            matches += 1;
        }
    }
    assert!(matches >= 70, "greedy matched exact on only {matches}/100 sets");
}

#[test]
fn greedy_pd_bounds_hold_with_fractional_norm_on_genomes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let genomes: Vec<Genome> = (0..8)
            .map(|_| {
                let mut genes = [0.0; 16];
                for g in genes.iter_mut() {
                    *g = rng.random::<f64>();
                }
                Genome::new(genes)
            })
            .collect();
        let d: Vec<Vec<f64>> = genomes
            .iter()
            .map(|a| {
                genomes
                    .iter()
                    .map(|b| l_fractional(a.genes(), b.genes(), 0.1).unwrap())
                    .collect()
            })
            .collect();
        let exact = pd_exact(&d);
        let greedy = pure_diversity(&genomes, |a, b| {
            l_fractional(a.genes(), b.genes(), 0.1).unwrap()
        })
        .unwrap();
        assert!(greedy > 0.0 && greedy <= exact + 1e-9 * exact.abs().max(1.0));
    }
}

#[test]
fn sdnn_matches_brute_force_on_twenty_genomes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let items = random_vectors(20, 16, &mut rng);
    let fast = sdnn(&items, |a, b| euclidean(a, b)).unwrap();
    // straight double loop, written independently
    let mut expected = 0.0;
    for i in 0..items.len() {
        let mut nearest = f64::MAX;
        for j in 0..items.len() {
            if i == j {
                continue;
            }
            let mut acc = 0.0;
            for k in 0..16 {
                acc += (items[i][k] - items[j][k]) * (items[i][k] - items[j][k]);
            }
            nearest = nearest.min(acc.sqrt());
        }
        expected += nearest;
    }
    assert!((fast - expected).abs() < 1e-12);
}

#[test]
fn sdnn_matches_brute_force_on_fifty_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let items = random_vectors(50, 5, &mut rng);
    let fast = sdnn(&items, |a, b| euclidean(a, b)).unwrap();
    let mut expected = 0.0;
    for i in 0..items.len() {
        let mut nearest = f64::MAX;
        for (j, other) in items.iter().enumerate() {
            if i != j {
                nearest = nearest.min(euclidean(&items[i], other));
            }
        }
        expected += nearest;
    }
    assert!((fast - expected).abs() < 1e-12);
}

#[test]
fn spd_two_point_closed_form_across_thetas() {
    for (theta, d) in [(1.0, 0.7), (1.0, 3.0), (100.0, 0.01), (100.0, 0.2)] {
        let items: Vec<Vec<f64>> = vec![vec![0.0], vec![d]];
        let spd = solow_polasky(&items, |a, b| (a[0] - b[0]).abs(), theta, 1e-9).unwrap();
        let expected = 2.0 / (1.0 + (-theta * d).exp());
        assert!(
            (spd - expected).abs() < 1e-9,
            "theta {theta} d {d}: {spd} vs {expected}"
        );
    }
}

#[test]
fn spd_saturates_at_large_scaled_distance() {
    // theta * d = 50 for every pair: one-hot points at distance d = 0.5
    let theta = 100.0;
    let n = 5;
    let scale = 0.5 / core::f64::consts::SQRT_2;
    let items: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { scale } else { 0.0 }).collect())
        .collect();
    let spd = solow_polasky(&items, |a, b| euclidean(a, b), theta, 1e-9).unwrap();
    assert!(spd > n as f64 - 1e-6, "spd {spd}");
    assert!(spd <= n as f64);
}

#[test]
fn spd_twinning_changes_little() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut items = random_vectors(12, 4, &mut rng);
    let before = solow_polasky(&items, |a, b| euclidean(a, b), 1.0, 1e-9).unwrap();
    items.push(items[3].clone());
    let after = solow_polasky(&items, |a, b| euclidean(a, b), 1.0, 1e-9).unwrap();
    assert!(
        (after - before).abs() < 1e-3,
        "twinning moved SPD from {before} to {after}"
    );
}

#[test]
fn spd_bounds_hold_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..20 {
        let n = 2 + rng.random_range(0..20);
        let items = random_vectors(n, 3, &mut rng);
        let spd = solow_polasky(&items, |a, b| euclidean(a, b), 1.0, 1e-9).unwrap();
        assert!((1.0..=n as f64).contains(&spd));
    }
}

#[test]
fn pd_permutation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let items = random_vectors(12, 4, &mut rng);
    let base = pure_diversity(&items, |a, b| euclidean(a, b)).unwrap();
    let mut shuffled = items.clone();
    for round in 0..5 {
        use rand::seq::SliceRandom;
        let mut perm_rng = ChaCha8Rng::seed_from_u64(round);
        shuffled.shuffle(&mut perm_rng);
        let permuted = pure_diversity(&shuffled, |a, b| euclidean(a, b)).unwrap();
        assert!((base - permuted).abs() < 1e-9);
    }
}

#[test]
fn pd_monotone_under_insertion() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..25 {
        let n = 2 + rng.random_range(0..6);
        let mut items = random_vectors(n, 3, &mut rng);
        let before = pure_diversity(&items, |a, b| euclidean(a, b)).unwrap();
        items.push((0..3).map(|_| rng.random::<f64>()).collect());
        let after = pure_diversity(&items, |a, b| euclidean(a, b)).unwrap();
        assert!(
            after >= before - 1e-12,
            "adding a point dropped PD from {before} to {after}"
        );
    }
}

#[test]
fn genetic_and_phenotypic_summaries_are_finite() {
    use polyqd_core::geometry::{rasterize, BoundsCase};
    let bounds = BoundsCase::B.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let genomes: Vec<Genome> = (0..15)
        .map(|_| {
            let mut genes = [0.0; 16];
            for (i, g) in genes.iter_mut().enumerate() {
                *g = bounds.gene_min(i) + rng.random::<f64>() * bounds.gene_range(i);
            }
            Genome::new(genes)
        })
        .collect();
    let bitmaps: Vec<_> = genomes
        .iter()
        .map(|g| rasterize(&polyqd_core::geometry::express(g, &bounds).unwrap()))
        .collect();
    let gen = polyqd_core::metrics::genetic_diversity(&genomes, &MetricConfig::genetic()).unwrap();
    let phen =
        polyqd_core::metrics::phenotypic_diversity(&bitmaps, &MetricConfig::phenotypic()).unwrap();
    for v in [gen.sdnn, gen.spd, gen.pd, phen.sdnn, phen.spd, phen.pd] {
        assert!(v.is_finite() && v >= 0.0);
    }
}
