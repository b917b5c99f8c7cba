//! Coresets for kernel `(k, z)`-clustering (kernel k-means at `z = 2`),
//! with the applications built on top of them: a coreset-accelerated
//! kernelized `k-means++` solver, streaming construction by merge-and-
//! reduce, and spectral clustering via the weighted kernel k-means
//! reduction.
//!
//! A coreset here is a reweighted subset `S ⊆ X` whose clustering cost
//! tracks the full dataset within `(1 ± ε)` for every candidate center set
//! in feature space. Construction is sensitivity-based importance sampling
//! seeded by D^z-sampling and needs only `Õ(nk)` kernel evaluations; the
//! feature map is never materialized.
//!
//! All numeric code is generic over the scalar type via [`Scalar`]
//! (`f32`/`f64`); the aliases below pin the default `f64` instantiations.
//!
//! ```
//! use std::sync::Arc;
//! use kernel_coreset::{
//!     build_coreset, cost_z, BuildConfig, Center, KernelOracle, KernelSpec,
//!     WeightedDataset, WeightedSet,
//! };
//!
//! let points: Vec<Vec<f64>> = (0..500).map(|i| vec![(i % 37) as f64]).collect();
//! let dataset = Arc::new(WeightedDataset::from_vectors_unweighted(points).unwrap());
//! let oracle = KernelOracle::from_spec(dataset.clone(), KernelSpec::rbf(10.0)).unwrap();
//! let set = WeightedSet::full(&dataset);
//!
//! let cfg = BuildConfig::new(3, 2.0, 0.2).with_samples(25);
//! let coreset = build_coreset(&oracle, &set, &cfg, 0).unwrap();
//! assert!(coreset.len() <= 25);
//!
//! // The coreset's cost approximates the full cost for any center set.
//! let centers = vec![Center::DataPoint(0), Center::DataPoint(18)];
//! let full = cost_z(&oracle, &set, &centers, 2.0).unwrap().total;
//! let small = cost_z(&oracle, &coreset.as_set(), &centers, 2.0).unwrap().total;
//! assert!((full - small).abs() / full < 0.5);
//! ```

mod center;
mod coreset;
mod dataset;
mod error;
mod eval;
mod kernel;
mod matrix;
mod sampling;
mod scalar;
mod solver;
mod spectral;
mod stream;

pub mod io;

pub use center::{center_gram, center_sqdist, cost_z, Center, CostResult, PreparedCenter};
pub use coreset::{
    build_coreset, build_coreset_rng, dz_sampling, dz_sampling_rng, importance_sampling,
    importance_sampling_rng, sensitivities, uniform_coreset, uniform_coreset_rng, BuildConfig,
    BuildMode, Coreset, FirstSeed, SeedCenters, SensitivityProfile,
};
pub use dataset::{
    ingest_csv, DatasetHandle, IngestOptions, PointStore, WeightedDataset, WeightedSet,
};
pub use error::{Error, Result};
pub use eval::{
    empirical_error, empirical_error_of, speedup_report, CoresetBuilder, ErrorProtocol,
    ErrorReport, SpeedupConfig, SpeedupReport, SpeedupRow, VanillaBaseline,
};
pub use kernel::{KernelOracle, KernelSpec, PsdCheck, SQDIST_CLAMP_REL};
pub use matrix::DenseMatrix;
pub use sampling::{derive_seed, rng_from_seed, sample_distinct, Prng, WeightedCdf};
pub use scalar::Scalar;
pub use solver::{
    brute_force_exact, evaluate_on_full, kmeanspp_seed, kmeanspp_seed_rng, lloyd,
    ClusteringSolution, Evaluation, LloydConfig, BRUTE_FORCE_MAX_DISTINCT, BRUTE_FORCE_MAX_K,
};
pub use spectral::{
    degrees_exact, degrees_sampled, spectral_cluster, spectral_reduce, DegreeMode, DegreeVector,
    SimilarityMatrix, SpectralConfig, SpectralOutcome, SpectralTimings,
};
pub use stream::{
    merge_reduce_stream, AnalyticFactory, MergeReduce, OracleFactory, StreamConfig, StreamOutcome,
};

/// Default `f64` instantiations of the core types.
pub type WeightedDataset64 = WeightedDataset<f64>;
pub type WeightedSet64 = WeightedSet<f64>;
pub type KernelSpec64 = KernelSpec<f64>;
pub type KernelOracle64 = KernelOracle<f64>;
pub type Center64 = Center<f64>;
pub type Coreset64 = Coreset<f64>;
pub type SeedCenters64 = SeedCenters<f64>;
pub type ClusteringSolution64 = ClusteringSolution<f64>;
pub type SimilarityMatrix64 = SimilarityMatrix<f64>;
pub type BuildConfig64 = BuildConfig<f64>;
pub type StreamConfig64 = StreamConfig<f64>;
