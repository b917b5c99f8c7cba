//! Insertion-only streaming via merge-and-reduce: points are buffered into
//! buckets, each bucket is reduced to a coreset, and same-level coresets are
//! united and re-reduced up a binary tree. Peak memory is one bucket plus
//! one coreset per live level.

use std::sync::Arc;

use crate::coreset::{build_coreset_rng, BuildConfig, Coreset, FirstSeed};
use crate::dataset::{DatasetHandle, WeightedDataset, WeightedSet};
use crate::error::{Error, Result};
use crate::kernel::{KernelOracle, KernelSpec};
use crate::sampling::{rng_from_seed, Prng};
use crate::scalar::{num, Scalar};

/// Builds a kernel oracle for the working subsets the stream engine
/// materializes (buckets, merged coresets).
pub trait OracleFactory<F: Scalar>: Sync {
    /// `orig_ids[i]` is the stream position of `dataset` entry `i`.
    fn make(&self, orig_ids: &[usize], dataset: DatasetHandle<F>) -> Result<KernelOracle<F>>;
}

/// Factory for analytic kernels: the kernel is stateless over coordinates,
/// so any subset gets the same spec.
pub struct AnalyticFactory<F: Scalar> {
    pub spec: KernelSpec<F>,
}

impl<F: Scalar> OracleFactory<F> for AnalyticFactory<F> {
    fn make(&self, _orig_ids: &[usize], dataset: DatasetHandle<F>) -> Result<KernelOracle<F>> {
        KernelOracle::from_spec(dataset, self.spec.clone())
    }
}

#[derive(Debug, Clone)]
pub struct StreamConfig<F: Scalar> {
    pub k: usize,
    pub z: F,
    /// Coreset size every reduction targets.
    pub n_per_bucket: usize,
    /// Points buffered before a bucket is reduced; must be at least
    /// `n_per_bucket`.
    pub bucket_size: usize,
    pub first_seed: FirstSeed,
}

impl<F: Scalar> StreamConfig<F> {
    /// Defaults `bucket_size` to `4 · n_per_bucket`.
    pub fn new(k: usize, z: F, n_per_bucket: usize) -> Self {
        Self {
            k,
            z,
            n_per_bucket,
            bucket_size: 4 * n_per_bucket,
            first_seed: FirstSeed::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_per_bucket < 1 {
            return Err(Error::invalid("n_per_bucket must be >= 1"));
        }
        if self.bucket_size < self.n_per_bucket {
            return Err(Error::invalid(format!(
                "bucket_size {} must be >= n_per_bucket {}",
                self.bucket_size, self.n_per_bucket
            )));
        }
        Ok(())
    }
}

/// A reduced or raw piece of the stream: points with their stream positions
/// and current weights.
struct Piece<F: Scalar> {
    ids: Vec<usize>,
    points: Vec<Vec<F>>,
    weights: Vec<F>,
}

impl<F: Scalar> Piece<F> {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn merge(mut self, other: Piece<F>) -> Piece<F> {
        self.ids.extend(other.ids);
        self.points.extend(other.points);
        self.weights.extend(other.weights);
        self
    }
}

#[derive(Debug, Clone)]
pub struct StreamOutcome<F: Scalar> {
    /// Final coreset; indices are stream positions (input row numbers).
    pub coreset: Coreset<F>,
    /// Total points seen.
    pub stream_len: usize,
    /// Full buckets reduced.
    pub buckets: usize,
    /// Merge-tree levels that were ever occupied.
    pub levels_used: usize,
    /// Peak number of retained points (buffer plus live coresets).
    pub peak_retained: usize,
}

/// Incremental merge-and-reduce engine. Feed points with [`push`](Self::push)
/// and call [`finish`](Self::finish) for the final coreset. All reductions
/// consume one sequential PRNG stream, so a run is a pure function of
/// `(stream, config, seed)`.
pub struct MergeReduce<'a, F: Scalar, O: OracleFactory<F>> {
    factory: &'a O,
    cfg: StreamConfig<F>,
    rng: Prng,
    buffer: Piece<F>,
    levels: Vec<Option<Piece<F>>>,
    next_id: usize,
    buckets: usize,
    levels_used: usize,
    peak_retained: usize,
}

impl<'a, F: Scalar, O: OracleFactory<F>> MergeReduce<'a, F, O> {
    pub fn new(factory: &'a O, cfg: StreamConfig<F>, seed: u64) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            factory,
            cfg,
            rng: rng_from_seed(seed),
            buffer: Piece {
                ids: Vec::new(),
                points: Vec::new(),
                weights: Vec::new(),
            },
            levels: Vec::new(),
            next_id: 0,
            buckets: 0,
            levels_used: 0,
            peak_retained: 0,
        })
    }

    pub fn push(&mut self, point: Vec<F>) -> Result<()> {
        self.buffer.ids.push(self.next_id);
        self.buffer.points.push(point);
        self.buffer.weights.push(F::one());
        self.next_id += 1;
        self.note_retained();
        if self.buffer.len() == self.cfg.bucket_size {
            let bucket = std::mem::replace(
                &mut self.buffer,
                Piece {
                    ids: Vec::new(),
                    points: Vec::new(),
                    weights: Vec::new(),
                },
            );
            self.buckets += 1;
            let reduced = self.reduce(bucket)?;
            self.insert_at_level(0, reduced)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<StreamOutcome<F>> {
        if self.next_id == 0 {
            return Err(Error::EmptyInput("stream produced no points".into()));
        }
        // Union all surviving levels plus the partial buffer, then reduce
        // once more (a no-op when a single reduced piece survives).
        let mut union: Option<Piece<F>> = None;
        for level in self.levels.drain(..) {
            if let Some(piece) = level {
                union = Some(match union {
                    None => piece,
                    Some(acc) => acc.merge(piece),
                });
            }
        }
        let union = match (union, self.buffer.len()) {
            (None, _) => std::mem::replace(
                &mut self.buffer,
                Piece {
                    ids: Vec::new(),
                    points: Vec::new(),
                    weights: Vec::new(),
                },
            ),
            (Some(acc), 0) => acc,
            (Some(acc), _) => acc.merge(std::mem::replace(
                &mut self.buffer,
                Piece {
                    ids: Vec::new(),
                    points: Vec::new(),
                    weights: Vec::new(),
                },
            )),
        };
        let final_piece = reduce_piece(
            self.factory,
            &self.cfg,
            union,
            &mut self.rng,
        )?;
        let coreset = Coreset {
            indices: final_piece.ids.clone(),
            weights: final_piece.weights.clone(),
            source_distinct: self.next_id,
        };
        Ok(StreamOutcome {
            coreset,
            stream_len: self.next_id,
            buckets: self.buckets,
            levels_used: self.levels_used,
            peak_retained: self.peak_retained,
        })
    }

    fn reduce(&mut self, piece: Piece<F>) -> Result<Piece<F>> {
        reduce_piece(self.factory, &self.cfg, piece, &mut self.rng)
    }

    fn insert_at_level(&mut self, mut level: usize, mut piece: Piece<F>) -> Result<()> {
        loop {
            if self.levels.len() <= level {
                self.levels.resize_with(level + 1, || None);
            }
            self.levels_used = self.levels_used.max(level + 1);
            match self.levels[level].take() {
                None => {
                    self.levels[level] = Some(piece);
                    self.note_retained();
                    return Ok(());
                }
                Some(existing) => {
                    let merged = existing.merge(piece);
                    piece = self.reduce(merged)?;
                    level += 1;
                }
            }
        }
    }

    fn note_retained(&mut self) {
        let live: usize = self
            .levels
            .iter()
            .map(|l| l.as_ref().map_or(0, Piece::len))
            .sum::<usize>()
            + self.buffer.len();
        self.peak_retained = self.peak_retained.max(live);
    }
}

fn reduce_piece<F: Scalar, O: OracleFactory<F>>(
    factory: &O,
    cfg: &StreamConfig<F>,
    piece: Piece<F>,
    rng: &mut Prng,
) -> Result<Piece<F>> {
    let dataset = Arc::new(WeightedDataset::from_vectors(
        piece.points.clone(),
        piece.weights.clone(),
    )?);
    let oracle = factory.make(&piece.ids, dataset.clone())?;
    let set = WeightedSet::full(&dataset);
    let mut build = BuildConfig::new(cfg.k, cfg.z, num::<F>(0.5)).with_samples(cfg.n_per_bucket);
    build.first_seed = cfg.first_seed;
    let coreset = build_coreset_rng(&oracle, &set, &build, rng)?;
    let mut ids = Vec::with_capacity(coreset.len());
    let mut points = Vec::with_capacity(coreset.len());
    for &local in &coreset.indices {
        ids.push(piece.ids[local]);
        points.push(piece.points[local].clone());
    }
    Ok(Piece {
        ids,
        points,
        weights: coreset.weights,
    })
}

/// Runs the whole engine over an in-memory or replayed stream.
pub fn merge_reduce_stream<F, O, I>(
    factory: &O,
    stream: I,
    cfg: &StreamConfig<F>,
    seed: u64,
) -> Result<StreamOutcome<F>>
where
    F: Scalar,
    O: OracleFactory<F>,
    I: IntoIterator<Item = Vec<F>>,
{
    let mut engine = MergeReduce::new(factory, cfg.clone(), seed)?;
    for point in stream {
        engine.push(point)?;
    }
    engine.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coreset::{build_coreset, importance_sampling_rng};

    fn factory() -> AnalyticFactory<f64> {
        AnalyticFactory {
            spec: KernelSpec::Linear,
        }
    }

    fn line_points(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| vec![((i * 7919) % 1009) as f64 / 3.0]).collect()
    }

    #[test]
    fn empty_stream_is_an_error() {
        let cfg = StreamConfig::new(2, 2.0, 10);
        let out = merge_reduce_stream(&factory(), Vec::<Vec<f64>>::new(), &cfg, 0);
        assert!(matches!(out, Err(Error::EmptyInput(_))));
    }

    #[test]
    fn short_stream_equals_batch_build() {
        let points = line_points(50);
        let cfg = StreamConfig::new(3, 2.0, 20); // bucket_size 80 > 50
        let out = merge_reduce_stream(&factory(), points.clone(), &cfg, 99).unwrap();

        let dataset = Arc::new(WeightedDataset::from_vectors_unweighted(points).unwrap());
        let oracle = KernelOracle::from_spec(dataset.clone(), KernelSpec::Linear).unwrap();
        let set = WeightedSet::full(&dataset);
        let batch = build_coreset(
            &oracle,
            &set,
            &BuildConfig::new(3, 2.0, 0.5).with_samples(20),
            99,
        )
        .unwrap();
        assert_eq!(out.coreset.indices, batch.indices);
        assert_eq!(out.coreset.weights, batch.weights);
        assert_eq!(out.buckets, 0);
    }

    #[test]
    fn two_bucket_stream_is_reduction_of_union() {
        let points = line_points(80);
        let mut cfg = StreamConfig::new(2, 2.0, 10);
        cfg.bucket_size = 40;
        let out = merge_reduce_stream(&factory(), points.clone(), &cfg, 7).unwrap();
        assert_eq!(out.buckets, 2);
        assert_eq!(out.levels_used, 2);

        // Replay the tree by hand with the same PRNG stream: reduce each
        // bucket, then importance-sample the union of the two coresets.
        let mut rng = rng_from_seed(7);
        let reduce = |pts: &[Vec<f64>], ws: &[f64], rng: &mut Prng| {
            let ds = Arc::new(WeightedDataset::from_vectors(pts.to_vec(), ws.to_vec()).unwrap());
            let oracle = KernelOracle::from_spec(ds.clone(), KernelSpec::Linear).unwrap();
            let set = WeightedSet::full(&ds);
            let mut build = BuildConfig::new(2, 2.0, 0.5).with_samples(10);
            build.first_seed = FirstSeed::default();
            build_coreset_rng(&oracle, &set, &build, rng).unwrap()
        };
        let c1 = reduce(&points[..40], &vec![1.0; 40], &mut rng);
        let c2 = reduce(&points[40..], &vec![1.0; 40], &mut rng);
        let mut union_pts: Vec<Vec<f64>> = c1.indices.iter().map(|&i| points[i].clone()).collect();
        union_pts.extend(c2.indices.iter().map(|&i| points[40 + i].clone()));
        let mut union_ids: Vec<usize> = c1.indices.clone();
        union_ids.extend(c2.indices.iter().map(|&i| 40 + i));
        let mut union_ws = c1.weights.clone();
        union_ws.extend(c2.weights.clone());
        let ds = Arc::new(WeightedDataset::from_vectors(union_pts, union_ws.clone()).unwrap());
        let oracle = KernelOracle::from_spec(ds.clone(), KernelSpec::Linear).unwrap();
        let set = WeightedSet::full(&ds);
        let merged =
            importance_sampling_rng(&oracle, &set, 2, 2.0, 10, FirstSeed::default(), &mut rng)
                .unwrap();
        let expect_ids: Vec<usize> = merged.indices.iter().map(|&l| union_ids[l]).collect();
        assert_eq!(out.coreset.indices, expect_ids);
        assert_eq!(out.coreset.weights, merged.weights);
    }

    #[test]
    fn streaming_is_deterministic_per_seed() {
        let points = line_points(300);
        let cfg = StreamConfig::new(2, 2.0, 15);
        let a = merge_reduce_stream(&factory(), points.clone(), &cfg, 5).unwrap();
        let b = merge_reduce_stream(&factory(), points.clone(), &cfg, 5).unwrap();
        assert_eq!(a.coreset, b.coreset);
        let c = merge_reduce_stream(&factory(), points, &cfg, 6).unwrap();
        assert_ne!(a.coreset, c.coreset);
    }

    #[test]
    fn peak_retained_stays_logarithmic() {
        let n = 4096;
        let points = line_points(n);
        let cfg = StreamConfig::new(2, 2.0, 16); // bucket 64
        let out = merge_reduce_stream(&factory(), points, &cfg, 1).unwrap();
        assert_eq!(out.buckets, n / 64);
        let levels_bound = ((n / 64) as f64).log2().ceil() as usize + 1;
        assert!(out.levels_used <= levels_bound, "{}", out.levels_used);
        // Buffer plus one coreset per level (a transient union doubles one
        // level during a cascade).
        let bound = cfg.bucket_size + 2 * cfg.n_per_bucket * (levels_bound + 1);
        assert!(
            out.peak_retained <= bound,
            "peak {} exceeds bound {bound}",
            out.peak_retained
        );
        assert!(out.coreset.len() <= 16);
    }

    #[test]
    fn final_weights_track_stream_mass() {
        let n = 600;
        let points = line_points(n);
        let cfg = StreamConfig::new(3, 2.0, 40);
        let mut totals = Vec::new();
        for seed in 0..10 {
            let out = merge_reduce_stream(&factory(), points.clone(), &cfg, seed).unwrap();
            totals.push(out.coreset.total_weight());
        }
        let mean: f64 = totals.iter().sum::<f64>() / totals.len() as f64;
        assert!(
            (mean - n as f64).abs() / (n as f64) < 0.2,
            "mean total weight {mean} vs stream mass {n}"
        );
    }
}
