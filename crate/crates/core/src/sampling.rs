//! Sobol low-discrepancy sequence for initial populations and restart points.
//!
//! Gray-code construction over 32-bit direction numbers, with the standard
//! published primitive-polynomial table embedded for up to 16 dimensions (the
//! genome length). An optional digital XOR scramble decorrelates streams
//! without touching the dyadic balance of the net.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{DomainBounds, Genome, GENOME_LEN};

const SOBOL_BITS: usize = 32;
/// Dimensions covered by the embedded direction-number table.
pub const MAX_DIMENSION: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SamplingError {
    #[error("dimension {requested} beyond the embedded table (max {max})")]
    DimensionUnsupported { requested: usize, max: usize },
}

// (s, a, m) rows of the standard new-joe-kuo-6 direction-number table for
// dimensions 2..=16; dimension 1 uses m_k = 1 for all k.
const JOE_KUO: [(u32, u32, &[u32]); 15] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
];

fn direction_numbers(dim_index: usize) -> [u32; SOBOL_BITS] {
    let mut v = [0u32; SOBOL_BITS];
    if dim_index == 0 {
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = 1 << (31 - k);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim_index - 1];
    let s = s as usize;
    for k in 0..s {
        v[k] = m[k] << (31 - k);
    }
    for k in s..SOBOL_BITS {
        let prev = v[k - s];
        v[k] = prev ^ (prev >> s);
        for bit in 0..s.saturating_sub(1) {
            if (a >> bit) & 1 == 1 {
                v[k] ^= v[k - s + 1 + bit];
            }
        }
    }
    v
}

/// Stateful Sobol stream over `[0,1)^d`. The unscrambled stream starts at the
/// origin point.
#[derive(Debug, Clone)]
pub struct SobolGenerator {
    v: Vec<[u32; SOBOL_BITS]>,
    state: Vec<u32>,
    scramble: Vec<u32>,
    index: u64,
}

impl SobolGenerator {
    /// Unscrambled sequence of dimension `d` (1..=16).
    pub fn new(dimension: usize) -> Result<Self, SamplingError> {
        Self::build(dimension, None)
    }

    /// Digitally scrambled sequence: every output is XORed with a fixed
    /// per-dimension mask derived from `seed`.
    pub fn scrambled(dimension: usize, seed: u64) -> Result<Self, SamplingError> {
        Self::build(dimension, Some(seed))
    }

    fn build(dimension: usize, seed: Option<u64>) -> Result<Self, SamplingError> {
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(SamplingError::DimensionUnsupported {
                requested: dimension,
                max: MAX_DIMENSION,
            });
        }
        let v = (0..dimension).map(direction_numbers).collect();
        let scramble = match seed {
            None => alloc::vec![0; dimension],
            Some(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..dimension).map(|_| rng.random::<u32>()).collect()
            }
        };
        Ok(Self {
            v,
            state: alloc::vec![0; dimension],
            scramble,
            index: 0,
        })
    }

    pub fn dimension(&self) -> usize {
        self.state.len()
    }

    /// Index of the next point to be emitted.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Jump so that the next emitted point is element `index` of the
    /// sequence.
    pub fn skip_to(&mut self, index: u64) {
        let gray = index ^ (index >> 1);
        for (dim, state) in self.state.iter_mut().enumerate() {
            let mut x = 0u32;
            for bit in 0..SOBOL_BITS {
                if (gray >> bit) & 1 == 1 {
                    x ^= self.v[dim][bit];
                }
            }
            *state = x;
        }
        self.index = index;
    }

    /// Next element of the sequence.
    pub fn next_point(&mut self) -> Vec<f64> {
        let point = self
            .state
            .iter()
            .zip(self.scramble.iter())
            .map(|(&x, &mask)| (x ^ mask) as f64 / (1u64 << 32) as f64)
            .collect();
        // advance with the Gray-code rule
        let bit = (self.index + 1).trailing_zeros() as usize;
        for (dim, state) in self.state.iter_mut().enumerate() {
            *state ^= self.v[dim][bit.min(SOBOL_BITS - 1)];
        }
        self.index += 1;
        point
    }

    /// `n` consecutive elements.
    pub fn next_points(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.next_point()).collect()
    }
}

/// Affine map from the unit cube onto the gene bounds: coordinates 0..8 to
/// the radial interval, 8..16 to the angular interval.
pub fn scale_to_bounds(point: &[f64], bounds: &DomainBounds) -> Genome {
    assert_eq!(point.len(), GENOME_LEN, "unit point must have 16 coordinates");
    let mut genes = [0.0; GENOME_LEN];
    for (index, (gene, &p)) in genes.iter_mut().zip(point.iter()).enumerate() {
        *gene = bounds.gene_min(index) + p * bounds.gene_range(index);
    }
    Genome::new(genes)
}

/// Inverse of [`scale_to_bounds`].
pub fn unit_from_genome(genome: &Genome, bounds: &DomainBounds) -> [f64; GENOME_LEN] {
    let mut point = [0.0; GENOME_LEN];
    for (index, (p, &gene)) in point.iter_mut().zip(genome.genes().iter()).enumerate() {
        *p = (gene - bounds.gene_min(index)) / bounds.gene_range(index);
    }
    point
}

/// Genomes for an initial population: consecutive Sobol points scaled to the
/// bounds, starting at sequence index 1. The origin point is skipped because
/// it expresses the all-minima genome, which is a zero-radius point shape in
/// the narrow bounds cases.
pub fn initial_population(count: usize, bounds: &DomainBounds) -> Vec<Genome> {
    let mut sobol = SobolGenerator::new(GENOME_LEN).expect("16 dims are in the table");
    sobol.skip_to(1);
    (0..count)
        .map(|_| scale_to_bounds(&sobol.next_point(), bounds))
        .collect()
}
