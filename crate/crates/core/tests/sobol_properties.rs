//! Digital-net balance and discrepancy checks for the Sobol stream.

use polyqd_core::sampling::SobolGenerator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn dyadic_balance_in_two_dimensions() {
    // aligned 2^k blocks put exactly 2^(k-1) points in each half-interval
    // per dimension; the XOR scramble preserves this
    for seed in [None, Some(7u64), Some(8)] {
        let mut sobol = match seed {
            None => SobolGenerator::new(2).unwrap(),
            Some(s) => SobolGenerator::scrambled(2, s).unwrap(),
        };
        let points = sobol.next_points(1 << 8);
        for k in 1..=6usize {
            let block = 1usize << k;
            for m in 0..(points.len() / block) {
                for dim in 0..2 {
                    let low = points[m * block..(m + 1) * block]
                        .iter()
                        .filter(|p| p[dim] < 0.5)
                        .count();
                    assert_eq!(
                        low,
                        block / 2,
                        "seed {seed:?} k={k} block {m} dim {dim}"
                    );
                }
            }
        }
    }
}

#[test]
fn finer_elementary_intervals_balance_within_aligned_blocks() {
    let mut sobol = SobolGenerator::new(2).unwrap();
    let points = sobol.next_points(64);
    // a 64-point prefix puts exactly one point in each 1/8 x 1/8 cell count
    // of 64/64... use quarters: each quarter per dimension holds 16 of 64
    for dim in 0..2 {
        for q in 0..4 {
            let lo = q as f64 * 0.25;
            let hi = lo + 0.25;
            let count = points.iter().filter(|p| p[dim] >= lo && p[dim] < hi).count();
            assert_eq!(count, 16);
        }
    }
}

fn grid_discrepancy(points: &[Vec<f64>]) -> f64 {
    // max deviation between empirical and exact measure over a dyadic grid
    // of anchored boxes [0, i/64) x [0, j/64)
    let n = points.len() as f64;
    let mut worst: f64 = 0.0;
    for i in 1..=64usize {
        for j in 1..=64usize {
            let (x, y) = (i as f64 / 64.0, j as f64 / 64.0);
            let count = points.iter().filter(|p| p[0] < x && p[1] < y).count();
            worst = worst.max((count as f64 / n - x * y).abs());
        }
    }
    worst
}

#[test]
fn sobol_prefix_beats_uniform_random_discrepancy() {
    let mut sobol = SobolGenerator::new(2).unwrap();
    let sobol_points = sobol.next_points(256);
    let sobol_disc = grid_discrepancy(&sobol_points);

    let mut random_discs: Vec<f64> = (0..20)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let points: Vec<Vec<f64>> = (0..256)
                .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
                .collect();
            grid_discrepancy(&points)
        })
        .collect();
    random_discs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = random_discs[10];
    assert!(
        sobol_disc < median,
        "sobol {sobol_disc} not below random median {median}"
    );
}

#[test]
fn initial_population_skips_origin_and_stays_in_bounds() {
    use polyqd_core::geometry::BoundsCase;
    use polyqd_core::sampling::initial_population;
    for case in BoundsCase::all() {
        let bounds = case.bounds();
        let genomes = initial_population(64, &bounds);
        assert_eq!(genomes.len(), 64);
        for g in &genomes {
            assert!(bounds.validate(g).is_ok());
        }
        // the first point is sequence index 1, not the all-minima origin
        assert!(genomes[0]
            .genes()
            .iter()
            .enumerate()
            .any(|(i, &v)| (v - bounds.gene_min(i)).abs() > 1e-12));
    }
}
