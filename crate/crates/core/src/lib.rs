//! Core algorithms for multi-solution optimization on a deformable-polygon
//! domain.
//!
//! The crate is organized around three optimization paradigms that share one
//! evaluation pipeline:
//!
//! * [`optimizers::ve_run`] — Voronoi-Elites, a capacity-bounded archive that
//!   accepts every offspring and then removes the lower-fitness member of the
//!   closest descriptor pair until the archive fits. Niching can be genetic
//!   (raw genome), phenotypic (area/circumference features) or latent
//!   (autoencoder coordinates, see [`autoencoder::autove_run`]).
//! * [`optimizers::nsga2_run`] — NSGA-II treating the features as objectives
//!   (maximize area, minimize circumference).
//! * [`optimizers::rls_run`] — restarted local search with a bounded
//!   quasi-Newton ascent on the symmetry fitness.
//!
//! Solution sets are compared with the distance-based diversity indicators in
//! [`metrics`]: sum of distances to nearest neighbor, Solow-Polasky diversity
//! and pure diversity.
//!
//! Everything here is `no_std` + `alloc`; IO, file formats and the CLI live in
//! the companion `polyqd` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod archive;
pub mod autoencoder;
pub mod geometry;
pub mod metrics;
pub mod optimizers;
pub mod pareto;
pub mod sampling;

pub use archive::{ArchiveError, Candidate, Elite, VeArchive};
pub use geometry::{
    express, rasterize, Bitmap, BoundsCase, DomainBounds, Features, Genome, GeometryError,
    Polygon, Solution,
};
pub use metrics::{MetricConfig, MetricsError};
pub use optimizers::{DescriptorMode, Nsga2Config, OptimizerError, RlsConfig, VeConfig};
pub use sampling::{SamplingError, SobolGenerator};
