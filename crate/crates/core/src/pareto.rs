//! Ground-truth Pareto set of the (maximize area, minimize circumference)
//! trade-off and the pixel-error distance to it.
//!
//! Shapes that maximize area per circumference are the regular octagons with
//! all radii equal and all angular deviations equal, so the ground truth is
//! the 10x10 grid over ten equidistant radii and ten equidistant angles
//! spanning the active bounds.

use alloc::vec::Vec;

use crate::geometry::{express, rasterize, Bitmap, DomainBounds, Genome};

/// Grid side of the ground-truth set (10 x 10 = 100 shapes).
pub const GRID_SIDE: usize = 10;

/// The 100 uniform genomes and their rasters for the given bounds.
pub fn ground_truth(bounds: &DomainBounds) -> Vec<(Genome, Bitmap)> {
    let mut shapes = Vec::with_capacity(GRID_SIDE * GRID_SIDE);
    for ri in 0..GRID_SIDE {
        let r = bounds.radial_min
            + ri as f64 * (bounds.radial_max - bounds.radial_min) / (GRID_SIDE - 1) as f64;
        for ti in 0..GRID_SIDE {
            let theta = bounds.angular_min
                + ti as f64 * (bounds.angular_max - bounds.angular_min) / (GRID_SIDE - 1) as f64;
            let genome = Genome::uniform(r, theta);
            let polygon = express(&genome, bounds).expect("grid genomes are in bounds");
            shapes.push((genome, rasterize(&polygon)));
        }
    }
    shapes
}

/// For every solution raster, the smallest pixel error (unnormalized Hamming
/// count) to any ground-truth raster.
pub fn pareto_distances(solutions: &[Bitmap], truth: &[Bitmap]) -> Vec<f64> {
    assert!(!truth.is_empty(), "ground-truth set must be non-empty");
    solutions
        .iter()
        .map(|s| {
            truth
                .iter()
                .map(|t| s.xor_count(t))
                .min()
                .expect("non-empty truth") as f64
        })
        .collect()
}
