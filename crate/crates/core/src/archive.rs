//! Capacity-bounded Voronoi-Elites archive.
//!
//! The archive accepts every offspring unconditionally. Once it holds more
//! elites than its capacity, the pair with the smallest Euclidean descriptor
//! distance competes and the lower-fitness member is removed, repeatedly,
//! until the archive fits. Selection pressure therefore acts on the closest
//! solutions and tends to equalize descriptor spacing without fixed niche
//! boundaries.
//!
//! Descriptor distances never change once an elite is stored, so one pass
//! over the sorted pair list performs the whole removal loop exactly.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::{
    express, rasterize, Bitmap, DomainBounds, Genome, GeometryError, GENOME_LEN,
};
use crate::metrics::euclidean;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArchiveError {
    #[error("descriptor has {got} dimensions, archive expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation needs at least {needed} elites, archive holds {got}")]
    TooFewElites { needed: usize, got: usize },
    #[error("archive csv parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// An offspring ready for insertion: the archive stamps the birth order.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub genome: Genome,
    pub descriptor: Vec<f64>,
    pub fitness: f64,
    pub bitmap: Bitmap,
}

/// A stored solution with its niche coordinates and cached phenotype.
#[derive(Debug, Clone)]
pub struct Elite {
    pub genome: Genome,
    pub descriptor: Vec<f64>,
    pub fitness: f64,
    pub bitmap: Bitmap,
    pub birth_order: u64,
}

/// One removal performed by [`VeArchive::prune_to_capacity`], identified by
/// birth orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneEvent {
    pub pair: (u64, u64),
    pub distance: f64,
    pub removed: u64,
}

#[derive(Debug, Clone)]
pub struct VeArchive {
    elites: Vec<Elite>,
    capacity: usize,
    descriptor_dim: usize,
    next_birth: u64,
}

impl VeArchive {
    pub fn new(capacity: usize, descriptor_dim: usize) -> Self {
        assert!(capacity >= 1, "archive capacity must be at least 1");
        assert!(descriptor_dim >= 1, "descriptor dimension must be at least 1");
        Self {
            elites: Vec::with_capacity(2 * capacity),
            capacity,
            descriptor_dim,
            next_birth: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn descriptor_dim(&self) -> usize {
        self.descriptor_dim
    }

    pub fn len(&self) -> usize {
        self.elites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elites.is_empty()
    }

    /// Elites in birth order.
    pub fn elites(&self) -> &[Elite] {
        &self.elites
    }

    /// Append a batch unconditionally; the archive may exceed its capacity
    /// until the next prune.
    pub fn insert(
        &mut self,
        batch: impl IntoIterator<Item = Candidate>,
    ) -> Result<(), ArchiveError> {
        for candidate in batch {
            if candidate.descriptor.len() != self.descriptor_dim {
                return Err(ArchiveError::DimensionMismatch {
                    expected: self.descriptor_dim,
                    got: candidate.descriptor.len(),
                });
            }
            self.elites.push(Elite {
                genome: candidate.genome,
                descriptor: candidate.descriptor,
                fitness: candidate.fitness,
                bitmap: candidate.bitmap,
                birth_order: self.next_birth,
            });
            self.next_birth += 1;
        }
        Ok(())
    }

    /// Indices of the pair with the smallest descriptor distance. Ties break
    /// toward the lexicographically smallest (birth, birth) pair, which is
    /// index order because elites are stored by birth.
    pub fn closest_pair(&self) -> Result<(usize, usize), ArchiveError> {
        if self.elites.len() < 2 {
            return Err(ArchiveError::TooFewElites {
                needed: 2,
                got: self.elites.len(),
            });
        }
        let mut best = (0, 1);
        let mut best_d = f64::INFINITY;
        for i in 0..self.elites.len() {
            for j in (i + 1)..self.elites.len() {
                let d = euclidean(&self.elites[i].descriptor, &self.elites[j].descriptor);
                if d < best_d {
                    best_d = d;
                    best = (i, j);
                }
            }
        }
        Ok(best)
    }

    /// Repeatedly remove the lower-fitness member of the closest pair until
    /// the archive is within capacity. On a fitness tie the younger elite
    /// (higher birth order) is removed. Returns the removals performed.
    pub fn prune_to_capacity(&mut self) -> Vec<PruneEvent> {
        let n = self.elites.len();
        if n <= self.capacity {
            return Vec::new();
        }
        let mut pairs: Vec<(f64, u32, u32)> = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            let di = &self.elites[i].descriptor;
            for j in (i + 1)..n {
                pairs.push((euclidean(di, &self.elites[j].descriptor), i as u32, j as u32));
            }
        }
        pairs.sort_unstable_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut alive = alloc::vec![true; n];
        let mut live = n;
        let mut events = Vec::with_capacity(n - self.capacity);
        for &(distance, i, j) in &pairs {
            if live <= self.capacity {
                break;
            }
            let (i, j) = (i as usize, j as usize);
            if !alive[i] || !alive[j] {
                continue;
            }
            // lower fitness loses; tie removes the younger, which is j
            let removed = if self.elites[i].fitness < self.elites[j].fitness {
                i
            } else {
                j
            };
            alive[removed] = false;
            live -= 1;
            events.push(PruneEvent {
                pair: (self.elites[i].birth_order, self.elites[j].birth_order),
                distance,
                removed: self.elites[removed].birth_order,
            });
        }
        let mut keep = alive.iter();
        self.elites.retain(|_| *keep.next().unwrap());
        events
    }

    /// Replace every elite's descriptor, e.g. after retraining the model
    /// that produced the coordinates. Birth orders are preserved.
    pub fn remap_descriptors(
        &mut self,
        mut f: impl FnMut(&Elite) -> Vec<f64>,
    ) -> Result<(), ArchiveError> {
        let new: Vec<Vec<f64>> = self.elites.iter().map(&mut f).collect();
        for descriptor in &new {
            if descriptor.len() != self.descriptor_dim {
                return Err(ArchiveError::DimensionMismatch {
                    expected: self.descriptor_dim,
                    got: descriptor.len(),
                });
            }
        }
        for (elite, descriptor) in self.elites.iter_mut().zip(new) {
            elite.descriptor = descriptor;
        }
        Ok(())
    }

    /// `k` uniform draws with replacement.
    pub fn select_random<'a, R: Rng + ?Sized>(
        &'a self,
        k: usize,
        rng: &mut R,
    ) -> Result<Vec<&'a Elite>, ArchiveError> {
        if self.elites.is_empty() {
            return Err(ArchiveError::TooFewElites { needed: 1, got: 0 });
        }
        Ok((0..k)
            .map(|_| &self.elites[rng.random_range(0..self.elites.len())])
            .collect())
    }

    /// Line-oriented CSV: gene columns, descriptor columns, fitness.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for g in 0..GENOME_LEN {
            out.push_str(&alloc::format!("g{g},"));
        }
        for d in 0..self.descriptor_dim {
            out.push_str(&alloc::format!("d{d},"));
        }
        out.push_str("fitness\n");
        for elite in &self.elites {
            for gene in elite.genome.genes() {
                out.push_str(&alloc::format!("{gene},"));
            }
            for coord in &elite.descriptor {
                out.push_str(&alloc::format!("{coord},"));
            }
            out.push_str(&alloc::format!("{}\n", elite.fitness));
        }
        out
    }

    /// Rebuild an archive from [`VeArchive::to_csv`] output. Bitmaps are
    /// re-derived by expressing and rasterizing each genome; descriptors and
    /// fitness come from the file. Birth orders restart at line order.
    pub fn from_csv(
        text: &str,
        capacity: usize,
        bounds: &DomainBounds,
    ) -> Result<Self, ArchiveError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(ArchiveError::Parse {
            line: 1,
            reason: String::from("missing header"),
        })?;
        let columns = header.split(',').count();
        if columns < GENOME_LEN + 2 {
            return Err(ArchiveError::Parse {
                line: 1,
                reason: alloc::format!("expected at least {} columns", GENOME_LEN + 2),
            });
        }
        let descriptor_dim = columns - GENOME_LEN - 1;
        let mut archive = VeArchive::new(capacity, descriptor_dim);
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| ArchiveError::Parse {
                    line: idx + 1,
                    reason: alloc::format!("{e}"),
                })?;
            if fields.len() != columns {
                return Err(ArchiveError::Parse {
                    line: idx + 1,
                    reason: alloc::format!("expected {columns} fields, got {}", fields.len()),
                });
            }
            let mut genes = [0.0; GENOME_LEN];
            genes.copy_from_slice(&fields[..GENOME_LEN]);
            let genome = Genome::new(genes);
            let bitmap = rasterize(&express(&genome, bounds)?);
            archive.insert([Candidate {
                genome,
                descriptor: fields[GENOME_LEN..columns - 1].to_vec(),
                fitness: fields[columns - 1],
                bitmap,
            }])?;
        }
        Ok(archive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundsCase;

    fn candidate(descriptor: &[f64], fitness: f64) -> Candidate {
        Candidate {
            genome: Genome::uniform(0.5, 0.0),
            descriptor: descriptor.to_vec(),
            fitness,
            bitmap: Bitmap::empty(),
        }
    }

    #[test]
    fn insert_appends_unconditionally() {
        let mut archive = VeArchive::new(3, 1);
        archive
            .insert((0..5).map(|i| candidate(&[i as f64], 0.5)))
            .unwrap();
        assert_eq!(archive.len(), 5);
    }

    #[test]
    fn insert_rejects_dimension_mismatch() {
        let mut archive = VeArchive::new(3, 2);
        let err = archive.insert([candidate(&[1.0], 0.5)]).unwrap_err();
        assert!(matches!(
            err,
            ArchiveError::DimensionMismatch { expected: 2, got: 1 }
        ));
    }

    #[test]
    fn closest_pair_simple() {
        let mut archive = VeArchive::new(10, 1);
        archive
            .insert([
                candidate(&[0.0], 0.5),
                candidate(&[0.4], 0.5),
                candidate(&[0.5], 0.5),
            ])
            .unwrap();
        assert_eq!(archive.closest_pair().unwrap(), (1, 2));
    }

    #[test]
    fn closest_pair_needs_two() {
        let mut archive = VeArchive::new(10, 1);
        archive.insert([candidate(&[0.0], 0.5)]).unwrap();
        assert!(matches!(
            archive.closest_pair(),
            Err(ArchiveError::TooFewElites { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn prune_hand_case() {
        // capacity 2, descriptors {0, 0.1, 1}, fitness {0.5, 0.9, 0.7}:
        // the (0, 0.1) pair is closest and its 0.5-fitness member dies.
        let mut archive = VeArchive::new(2, 1);
        archive
            .insert([
                candidate(&[0.0], 0.5),
                candidate(&[0.1], 0.9),
                candidate(&[1.0], 0.7),
            ])
            .unwrap();
        let events = archive.prune_to_capacity();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].removed, 0);
        let survivors: Vec<f64> = archive.elites().iter().map(|e| e.descriptor[0]).collect();
        assert_eq!(survivors, alloc::vec![0.1, 1.0]);
    }

    #[test]
    fn prune_within_capacity_is_identity() {
        let mut archive = VeArchive::new(5, 1);
        archive
            .insert((0..5).map(|i| candidate(&[i as f64], 0.5)))
            .unwrap();
        assert!(archive.prune_to_capacity().is_empty());
        assert_eq!(archive.len(), 5);
    }

    #[test]
    fn fitness_tie_removes_younger() {
        let mut archive = VeArchive::new(1, 1);
        archive
            .insert([candidate(&[0.0], 0.5), candidate(&[0.1], 0.5)])
            .unwrap();
        let events = archive.prune_to_capacity();
        assert_eq!(events[0].removed, 1);
        assert_eq!(archive.elites()[0].birth_order, 0);
    }

    #[test]
    fn select_random_single_elite() {
        use rand::SeedableRng;
        let mut archive = VeArchive::new(3, 1);
        archive.insert([candidate(&[0.3], 0.8)]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let picks = archive.select_random(3, &mut rng).unwrap();
        assert_eq!(picks.len(), 3);
        assert!(picks.iter().all(|e| e.birth_order == 0));
    }

    #[test]
    fn csv_round_trip() {
        let bounds = BoundsCase::B.bounds();
        let mut archive = VeArchive::new(4, 2);
        let genome = Genome::uniform(0.5, 0.05);
        let bitmap = rasterize(&express(&genome, &bounds).unwrap());
        archive
            .insert([Candidate {
                genome,
                descriptor: alloc::vec![0.25, 0.75],
                fitness: 1.0,
                bitmap,
            }])
            .unwrap();
        let csv = archive.to_csv();
        let restored = VeArchive::from_csv(&csv, 4, &bounds).unwrap();
        assert_eq!(restored.len(), 1);
        assert_eq!(restored.elites()[0].genome, genome);
        assert_eq!(restored.elites()[0].descriptor, alloc::vec![0.25, 0.75]);
        assert_eq!(restored.elites()[0].bitmap, bitmap);
        assert_eq!(restored.to_csv(), csv);
    }
}
