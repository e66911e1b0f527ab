//! Randomized archive checks: capacity, closest-pair removal semantics,
//! determinism and selection uniformity.

use polyqd_core::archive::{Candidate, VeArchive};
use polyqd_core::geometry::{Bitmap, Genome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn candidate(descriptor: Vec<f64>, fitness: f64) -> Candidate {
    Candidate {
        genome: Genome::uniform(0.5, 0.0),
        descriptor,
        fitness,
        bitmap: Bitmap::empty(),
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn thousand_randomized_insert_prune_rounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut rounds = 0;
    while rounds < 1000 {
        let dim = *[2usize, 5, 10, 16].iter().nth(rng.random_range(0..4)).unwrap();
        let capacity = rng.random_range(1..12);
        let mut archive = VeArchive::new(capacity, dim);
        let mut next_birth = 0u64;
        // several insert/prune waves per archive
        for _ in 0..rng.random_range(1..5) {
            rounds += 1;
            let batch: Vec<Candidate> = (0..rng.random_range(1..20))
                .map(|_| {
                    // coarse grid descriptors force frequent distance ties
                    let descriptor: Vec<f64> =
                        (0..dim).map(|_| (rng.random_range(0..5) as f64) * 0.25).collect();
                    candidate(descriptor, (rng.random_range(0..10) as f64) / 10.0)
                })
                .collect();

            // shadow copy for the independent re-simulation
            let mut shadow: Vec<(Vec<f64>, f64, u64)> = archive
                .elites()
                .iter()
                .map(|e| (e.descriptor.clone(), e.fitness, e.birth_order))
                .collect();
            for c in batch.iter() {
                shadow.push((c.descriptor.clone(), c.fitness, next_birth));
                next_birth += 1;
            }

            archive.insert(batch).unwrap();
            let events = archive.prune_to_capacity();
            assert!(archive.len() <= capacity, "over capacity after prune");

            // replay every removal against a brute-force closest pair
            for event in &events {
                assert!(shadow.len() > capacity);
                let mut best: Option<(f64, u64, u64)> = None;
                for i in 0..shadow.len() {
                    for j in (i + 1)..shadow.len() {
                        let d = euclid(&shadow[i].0, &shadow[j].0);
                        let key = (d, shadow[i].2.min(shadow[j].2), shadow[i].2.max(shadow[j].2));
                        if best.is_none()
                            || (key.0, key.1, key.2)
                                < (best.unwrap().0, best.unwrap().1, best.unwrap().2)
                        {
                            best = Some(key);
                        }
                    }
                }
                let (_, b_lo, b_hi) = best.unwrap();
                assert_eq!(
                    (event.pair.0.min(event.pair.1), event.pair.0.max(event.pair.1)),
                    (b_lo, b_hi),
                    "pruned pair is not the then-closest pair: event={event:?} shadow={shadow:?}"
                );
                // the removed member must be the lower-fitness one (ties:
                // younger dies)
                let member = |birth: u64| shadow.iter().position(|s| s.2 == birth).unwrap();
                let (lo, hi) = (member(b_lo), member(b_hi));
                let expected_removed = if shadow[lo].1 < shadow[hi].1 {
                    b_lo
                } else if shadow[hi].1 < shadow[lo].1 {
                    b_hi
                } else {
                    b_hi // equal fitness: higher birth order dies
                };
                assert_eq!(event.removed, expected_removed);
                shadow.remove(member(expected_removed));
            }
            assert_eq!(shadow.len(), archive.len());
        }
    }
}

#[test]
fn closest_pair_matches_brute_force_on_fifty() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut archive = VeArchive::new(100, 5);
    archive
        .insert((0..50).map(|_| {
            candidate(
                (0..5).map(|_| rng.random::<f64>()).collect(),
                rng.random::<f64>(),
            )
        }))
        .unwrap();
    let (i, j) = archive.closest_pair().unwrap();
    let elites = archive.elites();
    let mut best = f64::INFINITY;
    let mut best_pair = (0, 0);
    for a in 0..elites.len() {
        for b in (a + 1)..elites.len() {
            let d = euclid(&elites[a].descriptor, &elites[b].descriptor);
            if d < best {
                best = d;
                best_pair = (a, b);
            }
        }
    }
    assert_eq!((i, j), best_pair);
}

#[test]
fn max_fitness_never_decreases_across_prunes() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..50 {
        let mut archive = VeArchive::new(6, 2);
        archive
            .insert((0..18).map(|_| {
                candidate(
                    vec![rng.random::<f64>(), rng.random::<f64>()],
                    rng.random::<f64>(),
                )
            }))
            .unwrap();
        let max_before = archive
            .elites()
            .iter()
            .map(|e| e.fitness)
            .fold(f64::MIN, f64::max);
        archive.prune_to_capacity();
        let max_after = archive
            .elites()
            .iter()
            .map(|e| e.fitness)
            .fold(f64::MIN, f64::max);
        assert!(max_after >= max_before - 1e-15);
    }
}

#[test]
fn prune_is_deterministic_for_identical_input() {
    let build = || {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let mut archive = VeArchive::new(5, 3);
        archive
            .insert((0..25).map(|_| {
                candidate(
                    (0..3).map(|_| rng.random::<f64>()).collect(),
                    rng.random::<f64>(),
                )
            }))
            .unwrap();
        archive.prune_to_capacity();
        archive.to_csv()
    };
    assert_eq!(build(), build());
}

#[test]
fn select_random_is_uniform_chi_square() {
    let mut archive = VeArchive::new(4, 1);
    archive
        .insert((0..4).map(|i| candidate(vec![i as f64], 0.5)))
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let draws = 100_000;
    let mut counts = [0u32; 4];
    for pick in archive.select_random(draws, &mut rng).unwrap() {
        counts[pick.descriptor[0] as usize] += 1;
    }
    let expected = draws as f64 / 4.0;
    let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        assert!(
            (c as f64 - expected).abs() < 3.0 * sigma,
            "bin {i} count {c} outside 3 sigma of {expected}"
        );
    }
}

#[test]
fn archive_works_across_descriptor_dimensions() {
    for dim in [2usize, 5, 10, 16] {
        let mut rng = ChaCha8Rng::seed_from_u64(dim as u64);
        let mut archive = VeArchive::new(8, dim);
        archive
            .insert((0..30).map(|_| {
                candidate(
                    (0..dim).map(|_| rng.random::<f64>()).collect(),
                    rng.random::<f64>(),
                )
            }))
            .unwrap();
        archive.prune_to_capacity();
        assert_eq!(archive.len(), 8);
        assert!(archive.elites().iter().all(|e| e.descriptor.len() == dim));
    }
}
