//! Genome-to-phenotype expression for the deformable-polygon domain.
//!
//! A solution is an eight-sided polygon encoded by 16 genes in polar
//! coordinates: genes 0..8 are the radii of the control points, genes 8..16
//! their angular deviations in units of pi radians. Control point `i` sits at
//! `(r_i cos(phi_i), r_i sin(phi_i))` with `phi_i = i*pi/4 + theta_i*pi`.
//! Negative radii reflect a control point through the origin, which is what
//! makes wide gene bounds increasingly neutral: many genomes express the same
//! shape.
//!
//! The phenotype is the 64x64 binary raster of the polygon under the even-odd
//! fill rule, sampled at pixel centers over `[-1,1]^2`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use libm::{cos, fabs, hypot, sin, sqrt};

/// Number of genes: eight radii followed by eight angular deviations.
pub const GENOME_LEN: usize = 16;
/// Number of polygon control points.
pub const CONTROL_POINTS: usize = 8;
/// Raster side length in pixels.
pub const BITMAP_DIM: usize = 64;
/// Total raster pixels.
pub const BITMAP_PIXELS: usize = BITMAP_DIM * BITMAP_DIM;
/// Number of equidistant samples taken on the polygon boundary for the
/// symmetry fitness.
pub const BOUNDARY_SAMPLE_COUNT: usize = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid bounds: min must be strictly below max")]
    InvalidBounds,
    #[error("gene {index} = {value} outside [{min}, {max}]")]
    GeneOutOfBounds {
        index: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("degenerate shape: polygon has zero perimeter")]
    DegenerateShape,
}

/// Per-gene-group bounds. Radial bounds apply to genes 0..8 (radius, where
/// negative values reflect the control point through the origin), angular
/// bounds to genes 8..16 (deviation in units of pi radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBounds {
    pub radial_min: f64,
    pub radial_max: f64,
    pub angular_min: f64,
    pub angular_max: f64,
}

impl DomainBounds {
    pub fn new(
        radial_min: f64,
        radial_max: f64,
        angular_min: f64,
        angular_max: f64,
    ) -> Result<Self, GeometryError> {
        if !(radial_min < radial_max) || !(angular_min < angular_max) {
            return Err(GeometryError::InvalidBounds);
        }
        Ok(Self {
            radial_min,
            radial_max,
            angular_min,
            angular_max,
        })
    }

    /// Lower bound of gene `index`.
    pub fn gene_min(&self, index: usize) -> f64 {
        if index < CONTROL_POINTS {
            self.radial_min
        } else {
            self.angular_min
        }
    }

    /// Upper bound of gene `index`.
    pub fn gene_max(&self, index: usize) -> f64 {
        if index < CONTROL_POINTS {
            self.radial_max
        } else {
            self.angular_max
        }
    }

    /// Width of the admissible interval of gene `index`.
    pub fn gene_range(&self, index: usize) -> f64 {
        self.gene_max(index) - self.gene_min(index)
    }

    pub fn clamp_gene(&self, index: usize, value: f64) -> f64 {
        let (lo, hi) = (self.gene_min(index), self.gene_max(index));
        if value < lo {
            lo
        } else if value > hi {
            hi
        } else {
            value
        }
    }

    pub fn validate(&self, genome: &Genome) -> Result<(), GeometryError> {
        for (index, &value) in genome.genes().iter().enumerate() {
            let (min, max) = (self.gene_min(index), self.gene_max(index));
            if !(value >= min && value <= max) {
                return Err(GeometryError::GeneOutOfBounds {
                    index,
                    value,
                    min,
                    max,
                });
            }
        }
        Ok(())
    }

    /// Genome at the center of every gene interval.
    pub fn center(&self) -> Genome {
        let mut genes = [0.0; GENOME_LEN];
        for (index, gene) in genes.iter_mut().enumerate() {
            *gene = 0.5 * (self.gene_min(index) + self.gene_max(index));
        }
        Genome::new(genes)
    }

    /// Circumference of the largest admissible octagon (all radii at the
    /// maximum magnitude, no angular deviation). Used to put the
    /// circumference feature on a [0, 1]-ish scale before Euclidean niching.
    pub fn max_circumference(&self) -> f64 {
        let r = fabs(self.radial_min).max(fabs(self.radial_max));
        2.0 * CONTROL_POINTS as f64 * r * sin(core::f64::consts::PI / CONTROL_POINTS as f64)
    }
}

/// The five neutrality cases, ordered by increasing width of the gene bounds
/// and therefore increasing genetic neutrality of the encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundsCase {
    A,
    B,
    C,
    D,
    E,
}

impl BoundsCase {
    pub const fn all() -> [BoundsCase; 5] {
        [
            BoundsCase::A,
            BoundsCase::B,
            BoundsCase::C,
            BoundsCase::D,
            BoundsCase::E,
        ]
    }

    pub fn bounds(self) -> DomainBounds {
        let (radial_min, radial_max, angular_min, angular_max) = match self {
            BoundsCase::A => (0.0, 1.0, -0.05, 0.05),
            BoundsCase::B => (0.0, 1.0, -0.125, 0.125),
            BoundsCase::C => (-0.25, 1.0, -0.25, 0.25),
            BoundsCase::D => (-0.5, 1.0, -0.5, 0.5),
            BoundsCase::E => (-1.0, 1.0, -1.0, 1.0),
        };
        DomainBounds {
            radial_min,
            radial_max,
            angular_min,
            angular_max,
        }
    }
}

impl fmt::Display for BoundsCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            BoundsCase::A => 'A',
            BoundsCase::B => 'B',
            BoundsCase::C => 'C',
            BoundsCase::D => 'D',
            BoundsCase::E => 'E',
        };
        write!(f, "{c}")
    }
}

/// The five parameter-bound settings in order of increasing neutrality.
pub fn neutrality_cases() -> [DomainBounds; 5] {
    BoundsCase::all().map(BoundsCase::bounds)
}

/// Sixteen bounded reals: radii first, angular deviations second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genome {
    genes: [f64; GENOME_LEN],
}

impl Genome {
    pub fn new(genes: [f64; GENOME_LEN]) -> Self {
        Self { genes }
    }

    pub fn genes(&self) -> &[f64; GENOME_LEN] {
        &self.genes
    }

    pub fn genes_mut(&mut self) -> &mut [f64; GENOME_LEN] {
        &mut self.genes
    }

    /// Radius of control point `i`.
    pub fn radius(&self, i: usize) -> f64 {
        self.genes[i]
    }

    /// Angular deviation of control point `i`, in units of pi radians.
    pub fn angle(&self, i: usize) -> f64 {
        self.genes[CONTROL_POINTS + i]
    }

    /// Uniform genome: every radius `r`, every angular deviation `theta`.
    pub fn uniform(r: f64, theta: f64) -> Self {
        let mut genes = [r; GENOME_LEN];
        genes[CONTROL_POINTS..].fill(theta);
        Self { genes }
    }
}

/// Expressed shape: eight Cartesian vertices centered on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polygon {
    vertices: [(f64, f64); CONTROL_POINTS],
}

impl Polygon {
    pub fn new(vertices: [(f64, f64); CONTROL_POINTS]) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[(f64, f64); CONTROL_POINTS] {
        &self.vertices
    }

    /// The eight directed edges, closing back to vertex 0.
    pub fn edges(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        (0..CONTROL_POINTS).map(move |i| {
            (
                self.vertices[i],
                self.vertices[(i + 1) % CONTROL_POINTS],
            )
        })
    }

    /// Sum of the eight edge lengths.
    pub fn perimeter(&self) -> f64 {
        self.edges()
            .map(|((x1, y1), (x2, y2))| hypot(x2 - x1, y2 - y1))
            .sum()
    }

    /// Vertex list as CSV, one `x,y` line per vertex.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in self.vertices.iter() {
            out.push_str(&alloc::format!("{x},{y}\n"));
        }
        out
    }
}

/// 64x64 binary raster, one u64 of column bits per row. Row 0 is the bottom
/// of the image; bit `x` of row `y` is the pixel with center
/// `(-1 + (x+0.5)*2/64, -1 + (y+0.5)*2/64)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bitmap {
    rows: [u64; BITMAP_DIM],
}

impl Bitmap {
    pub fn empty() -> Self {
        Self {
            rows: [0; BITMAP_DIM],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        debug_assert!(x < BITMAP_DIM && y < BITMAP_DIM);
        (self.rows[y] >> x) & 1 == 1
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        debug_assert!(x < BITMAP_DIM && y < BITMAP_DIM);
        if value {
            self.rows[y] |= 1 << x;
        } else {
            self.rows[y] &= !(1 << x);
        }
    }

    /// Number of set pixels.
    pub fn count(&self) -> u32 {
        self.rows.iter().map(|r| r.count_ones()).sum()
    }

    /// Number of pixels that differ between the two rasters.
    pub fn xor_count(&self, other: &Bitmap) -> u32 {
        self.rows
            .iter()
            .zip(other.rows.iter())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    pub fn complement(&self) -> Bitmap {
        let mut rows = [0u64; BITMAP_DIM];
        for (out, row) in rows.iter_mut().zip(self.rows.iter()) {
            *out = !row;
        }
        Bitmap { rows }
    }

    /// Plain-text PBM (P1) export, top row first, `1` = inside.
    pub fn to_pbm(&self) -> String {
        let mut out = String::with_capacity(BITMAP_PIXELS * 2 + 16);
        out.push_str("P1\n64 64\n");
        for y in (0..BITMAP_DIM).rev() {
            for x in 0..BITMAP_DIM {
                out.push(if self.get(x, y) { '1' } else { '0' });
                out.push(if x + 1 == BITMAP_DIM { '\n' } else { ' ' });
            }
        }
        out
    }
}

/// Area (set-pixel fraction of the raster) and circumference (sum of the
/// eight exact edge lengths).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Features {
    pub area: f64,
    pub circumference: f64,
}

/// A fully evaluated solution: genome, cached phenotype, features and
/// symmetry fitness.
#[derive(Debug, Clone)]
pub struct Solution {
    pub genome: Genome,
    pub bitmap: Bitmap,
    pub features: Features,
    pub fitness: f64,
}

/// Express a genome into its polygon. Control point `i` is placed at angle
/// `i*pi/4 + theta_i*pi` and radius `r_i` (negative radii flip through the
/// origin).
pub fn express(genome: &Genome, bounds: &DomainBounds) -> Result<Polygon, GeometryError> {
    bounds.validate(genome)?;
    let mut vertices = [(0.0, 0.0); CONTROL_POINTS];
    for (i, vertex) in vertices.iter_mut().enumerate() {
        let r = genome.radius(i);
        let phi = i as f64 * core::f64::consts::FRAC_PI_4
            + genome.angle(i) * core::f64::consts::PI;
        *vertex = (r * cos(phi), r * sin(phi));
    }
    Ok(Polygon::new(vertices))
}

// Half-open scanline crossing rule: an edge (x1,y1)-(x2,y2) crosses the
// horizontal line at `y` iff y1 <= y < y2 or y2 <= y < y1. Vertices sitting
// exactly on a scanline are then counted exactly once, which keeps the
// crossing count even for closed loops.
fn row_crossings(polygon: &Polygon, y: f64, xs: &mut Vec<f64>) {
    xs.clear();
    for ((x1, y1), (x2, y2)) in polygon.edges() {
        if (y1 <= y && y < y2) || (y2 <= y && y < y1) {
            let t = (y - y1) / (y2 - y1);
            xs.push(x1 + t * (x2 - x1));
        }
    }
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
}

/// Rasterize under the even-odd fill rule, sampling pixel centers. Works for
/// self-intersecting polygons; a degenerate zero-area polygon produces an
/// empty bitmap.
pub fn rasterize(polygon: &Polygon) -> Bitmap {
    let mut bitmap = Bitmap::empty();
    let step = 2.0 / BITMAP_DIM as f64;
    let mut xs: Vec<f64> = Vec::with_capacity(CONTROL_POINTS);
    for y in 0..BITMAP_DIM {
        let wy = -1.0 + (y as f64 + 0.5) * step;
        row_crossings(polygon, wy, &mut xs);
        let mut row = 0u64;
        for pair in xs.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            // pixel centers wx with a <= wx < b
            let first = ceil_index((a + 1.0) / step - 0.5);
            let last = ceil_index((b + 1.0) / step - 0.5) - 1;
            let (first, last) = (first.max(0), last.min(BITMAP_DIM as i64 - 1));
            for x in first..=last {
                row |= 1 << x;
            }
        }
        bitmap.rows[y] = row;
    }
    bitmap
}

fn ceil_index(v: f64) -> i64 {
    libm::ceil(v) as i64
}

/// `n` points spaced equally by arc length along the closed vertex loop,
/// starting at vertex 0.
pub fn boundary_samples(polygon: &Polygon, n: usize) -> Result<Vec<(f64, f64)>, GeometryError> {
    let lengths: Vec<f64> = polygon
        .edges()
        .map(|((x1, y1), (x2, y2))| hypot(x2 - x1, y2 - y1))
        .collect();
    let perimeter: f64 = lengths.iter().sum();
    if !(perimeter > 0.0) {
        return Err(GeometryError::DegenerateShape);
    }
    let vertices = polygon.vertices();
    let mut samples = Vec::with_capacity(n);
    let mut edge = 0;
    let mut edge_start = 0.0;
    for j in 0..n {
        let target = j as f64 * perimeter / n as f64;
        while edge + 1 < CONTROL_POINTS && edge_start + lengths[edge] <= target {
            edge_start += lengths[edge];
            edge += 1;
        }
        // Zero-length edges are skipped by the loop above; if the last edge
        // has zero length the clamp below keeps t finite.
        let t = if lengths[edge] > 0.0 {
            ((target - edge_start) / lengths[edge]).min(1.0)
        } else {
            0.0
        };
        let (x1, y1) = vertices[edge];
        let (x2, y2) = vertices[(edge + 1) % CONTROL_POINTS];
        samples.push((x1 + t * (x2 - x1), y1 + t * (y2 - y1)));
    }
    Ok(samples)
}

/// Area and circumference features. `bitmap` must be the raster of `polygon`.
pub fn features(polygon: &Polygon, bitmap: &Bitmap) -> Features {
    Features {
        area: bitmap.count() as f64 / BITMAP_PIXELS as f64,
        circumference: polygon.perimeter(),
    }
}

/// Point-symmetry fitness `1/(1+E_s)` where `E_s` sums, over the 500 opposing
/// boundary-sample pairs, the distance between a sample and the reflection of
/// its opposite through the origin. Point-symmetric shapes score exactly 1.
pub fn symmetry_fitness(polygon: &Polygon) -> Result<f64, GeometryError> {
    let samples = boundary_samples(polygon, BOUNDARY_SAMPLE_COUNT)?;
    Ok(fitness_from_samples(&samples))
}

fn fitness_from_samples(samples: &[(f64, f64)]) -> f64 {
    let half = samples.len() / 2;
    let mut error = 0.0;
    for j in 0..half {
        let (ax, ay) = samples[j];
        let (bx, by) = samples[j + half];
        // reflect (bx, by) through the origin and take the distance
        error += sqrt((ax + bx) * (ax + bx) + (ay + by) * (ay + by));
    }
    1.0 / (1.0 + error)
}

/// Normalized Hamming distance between two rasters: differing-pixel fraction
/// in [0, 1].
pub fn hamming(a: &Bitmap, b: &Bitmap) -> f64 {
    a.xor_count(b) as f64 / BITMAP_PIXELS as f64
}

/// Full evaluation pipeline: express, rasterize, features, symmetry fitness.
pub fn evaluate(genome: &Genome, bounds: &DomainBounds) -> Result<Solution, GeometryError> {
    let polygon = express(genome, bounds)?;
    let bitmap = rasterize(&polygon);
    let features = features(&polygon, &bitmap);
    let fitness = symmetry_fitness(&polygon)?;
    Ok(Solution {
        genome: *genome,
        bitmap,
        features,
        fitness,
    })
}
