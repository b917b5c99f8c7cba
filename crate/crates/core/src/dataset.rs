//! Weighted datasets: the universe every oracle, coreset, and solver indexes
//! into. Entries are either real vectors or opaque ids (when the kernel is a
//! precomputed matrix). Value-identical entries are grouped at construction
//! so distinct counts (`‖X‖₀`) are cheap for any index subset.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sampling::{self, Prng};
use crate::scalar::Scalar;

/// Backing storage for dataset entries.
#[derive(Debug, Clone)]
pub enum PointStore<F: Scalar> {
    /// `n` rows of dimension `dim`, stored row-major.
    Vectors { data: Vec<F>, dim: usize },
    /// Opaque ids `0..n`; geometry lives entirely in the kernel.
    Opaque { n: usize },
}

/// A finite weighted set: points (or ids), strictly positive weights, and a
/// value-group table used for distinct counting.
#[derive(Debug, Clone)]
pub struct WeightedDataset<F: Scalar> {
    store: PointStore<F>,
    weights: Vec<F>,
    /// Group id per entry; entries with identical coordinates share a group.
    value_group: Vec<u32>,
    distinct_count: usize,
}

impl<F: Scalar> WeightedDataset<F> {
    /// Builds a dataset from row vectors and per-row weights.
    pub fn from_vectors(points: Vec<Vec<F>>, weights: Vec<F>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("dataset has no points".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::invalid("points have dimension 0"));
        }
        let mut data = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Parse {
                    path: "<memory>".into(),
                    message: format!("row {i} has {} fields, expected {dim}", p.len()),
                });
            }
            for &x in p {
                if !x.is_finite() {
                    return Err(Error::NonFinite {
                        context: format!("coordinate in row {i}"),
                    });
                }
                data.push(x);
            }
        }
        validate_weights(&weights)?;
        let (value_group, distinct_count) = group_by_value(&data, dim);
        Ok(Self {
            store: PointStore::Vectors { data, dim },
            weights,
            value_group,
            distinct_count,
        })
    }

    /// Same as [`from_vectors`](Self::from_vectors) with unit weights.
    pub fn from_vectors_unweighted(points: Vec<Vec<F>>) -> Result<Self> {
        let n = points.len();
        Self::from_vectors(points, vec![F::one(); n])
    }

    /// Builds a dataset of opaque ids `0..n` (precomputed-kernel universes).
    /// Every id counts as its own distinct value.
    pub fn opaque(n: usize, weights: Vec<F>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("dataset has no points".into()));
        }
        if weights.len() != n {
            return Err(Error::invalid(format!("{n} ids but {} weights", weights.len())));
        }
        validate_weights(&weights)?;
        Ok(Self {
            store: PointStore::Opaque { n },
            weights,
            value_group: (0..n as u32).collect(),
            distinct_count: n,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of distinct elements of the full dataset.
    pub fn distinct_count(&self) -> usize {
        self.distinct_count
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> F {
        self.weights[index]
    }

    pub fn store(&self) -> &PointStore<F> {
        &self.store
    }

    /// Coordinate dimension, or `None` for opaque stores.
    pub fn dim(&self) -> Option<usize> {
        match &self.store {
            PointStore::Vectors { dim, .. } => Some(*dim),
            PointStore::Opaque { .. } => None,
        }
    }

    /// Row accessor; panics on opaque stores.
    #[inline]
    pub fn point(&self, index: usize) -> &[F] {
        match &self.store {
            PointStore::Vectors { data, dim } => &data[index * dim..(index + 1) * dim],
            PointStore::Opaque { .. } => panic!("opaque dataset has no coordinates"),
        }
    }

    pub fn value_group(&self, index: usize) -> u32 {
        self.value_group[index]
    }

    /// Number of distinct values among `indices`.
    pub fn distinct_among(&self, indices: &[usize]) -> usize {
        if indices.len() == self.len() {
            return self.distinct_count;
        }
        let mut seen = std::collections::HashSet::with_capacity(indices.len());
        indices
            .iter()
            .filter(|&&i| seen.insert(self.value_group[i]))
            .count()
    }
}

fn validate_weights<F: Scalar>(weights: &[F]) -> Result<()> {
    for (i, &w) in weights.iter().enumerate() {
        if !(w > F::zero()) || !w.is_finite() {
            return Err(Error::invalid(format!(
                "weight {w} at entry {i} is not strictly positive and finite"
            )));
        }
    }
    Ok(())
}

fn group_by_value<F: Scalar>(data: &[F], dim: usize) -> (Vec<u32>, usize) {
    let n = data.len() / dim;
    let mut table: HashMap<Vec<u64>, u32> = HashMap::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for i in 0..n {
        let key: Vec<u64> = data[i * dim..(i + 1) * dim]
            .iter()
            .map(|&x| {
                // Normalize -0.0 so it shares a group with +0.0.
                let v = if x == F::zero() { 0.0 } else { crate::scalar::as_f64(x) };
                v.to_bits()
            })
            .collect();
        let next = table.len() as u32;
        let id = *table.entry(key).or_insert(next);
        groups.push(id);
    }
    let distinct = table.len();
    (groups, distinct)
}

/// A weighted view over universe indices: the thing samplers and solvers run
/// on. The full dataset and any coreset both convert into this.
#[derive(Debug, Clone)]
pub struct WeightedSet<F: Scalar> {
    pub indices: Vec<usize>,
    pub weights: Vec<F>,
}

impl<F: Scalar> WeightedSet<F> {
    pub fn new(indices: Vec<usize>, weights: Vec<F>) -> Result<Self> {
        if indices.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} indices but {} weights",
                indices.len(),
                weights.len()
            )));
        }
        if indices.is_empty() {
            return Err(Error::EmptyInput("weighted set is empty".into()));
        }
        validate_weights(&weights)?;
        Ok(Self { indices, weights })
    }

    /// View of the entire dataset with its own weights.
    pub fn full(dataset: &WeightedDataset<F>) -> Self {
        Self {
            indices: (0..dataset.len()).collect(),
            weights: dataset.weights().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn total_weight(&self) -> F {
        self.weights.iter().copied().sum()
    }

    pub fn distinct_count(&self, dataset: &WeightedDataset<F>) -> usize {
        dataset.distinct_among(&self.indices)
    }
}

/// Options for CSV ingestion.
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Treat the final column as a weight (strictly positive).
    pub weighted: bool,
    /// Uniform subsample without replacement down to this many rows,
    /// preserving original row order.
    pub subsample: Option<usize>,
    pub seed: u64,
}

/// Parses a headerless numeric CSV into a dataset.
///
/// One point per row; with `weighted` the last column is the weight,
/// otherwise every row gets weight 1.
pub fn ingest_csv<F: Scalar>(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<WeightedDataset<F>> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path_str.clone(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut points: Vec<Vec<F>> = Vec::new();
    let mut weights: Vec<F> = Vec::new();
    let mut width: Option<usize> = None;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path_str.clone(),
            message: e.to_string(),
        })?;
        let fields: Vec<f64> = record
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    path: path_str.clone(),
                    message: format!("non-numeric field {s:?} in row {row_idx}"),
                })
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    message: format!("ragged row {row_idx}: {} fields, expected {w}", fields.len()),
                })
            }
            _ => {}
        }
        let (coords, w) = if opts.weighted {
            if fields.len() < 2 {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    message: format!("row {row_idx} too short for a weight column"),
                });
            }
            let (c, w) = fields.split_at(fields.len() - 1);
            (c.to_vec(), w[0])
        } else {
            (fields, 1.0)
        };
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::invalid(format!(
                "nonpositive weight {w} in row {row_idx} of {path_str}"
            )));
        }
        points.push(coords.into_iter().map(crate::scalar::num).collect());
        weights.push(crate::scalar::num(w));
    }
    if points.is_empty() {
        return Err(Error::EmptyInput(format!("{path_str} has no rows")));
    }

    if let Some(target) = opts.subsample {
        if target == 0 {
            return Err(Error::invalid("subsample size must be >= 1"));
        }
        if target < points.len() {
            let mut rng: Prng = sampling::rng_from_seed(opts.seed);
            let mut keep = sampling::sample_distinct(points.len(), target, &mut rng)?;
            keep.sort_unstable();
            points = keep.iter().map(|&i| std::mem::take(&mut points[i])).collect();
            weights = keep.iter().map(|&i| weights[i]).collect();
        }
    }

    WeightedDataset::from_vectors(points, weights)
}

/// Shared handle used by oracles and pipelines.
pub type DatasetHandle<F> = Arc<WeightedDataset<F>>;

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn ingest_unweighted_rows() {
        let f = write_temp("1.0,2.0\n3.0,4.0\n5.0,6.0\n");
        let ds: WeightedDataset<f64> = ingest_csv(f.path(), &IngestOptions::default()).unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.weights().iter().all(|&w| w == 1.0));
        assert_eq!(ds.point(1), &[3.0, 4.0]);
        assert_eq!(ds.distinct_count(), 3);
    }

    #[test]
    fn ingest_weighted_rows() {
        let f = write_temp("1.0,2.0,3.5\n1.0,2.0,0.5\n");
        let opts = IngestOptions {
            weighted: true,
            ..Default::default()
        };
        let ds: WeightedDataset<f64> = ingest_csv(f.path(), &opts).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.weights(), &[3.5, 0.5]);
        // Same coordinates, one distinct value.
        assert_eq!(ds.distinct_count(), 1);
    }

    #[test]
    fn ingest_rejects_ragged_rows() {
        let f = write_temp("1.0,2.0\n3.0\n");
        let err = ingest_csv::<f64>(f.path(), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn ingest_rejects_non_numeric() {
        let f = write_temp("1.0,abc\n");
        let err = ingest_csv::<f64>(f.path(), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn ingest_rejects_nonpositive_weight() {
        let f = write_temp("1.0,0.0\n");
        let opts = IngestOptions {
            weighted: true,
            ..Default::default()
        };
        let err = ingest_csv::<f64>(f.path(), &opts).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)), "{err}");
    }

    #[test]
    fn subsample_equal_to_n_is_identity_in_order() {
        let f = write_temp("1,1\n2,2\n3,3\n4,4\n");
        let opts = IngestOptions {
            subsample: Some(4),
            seed: 11,
            ..Default::default()
        };
        let ds: WeightedDataset<f64> = ingest_csv(f.path(), &opts).unwrap();
        assert_eq!(ds.len(), 4);
        for i in 0..4 {
            assert_eq!(ds.point(i)[0], (i + 1) as f64);
        }
    }

    #[test]
    fn subsample_preserves_row_order() {
        let f = write_temp("1,0\n2,0\n3,0\n4,0\n5,0\n6,0\n7,0\n8,0\n");
        let opts = IngestOptions {
            subsample: Some(3),
            seed: 5,
            ..Default::default()
        };
        let ds: WeightedDataset<f64> = ingest_csv(f.path(), &opts).unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.point(0)[0] < ds.point(1)[0]);
        assert!(ds.point(1)[0] < ds.point(2)[0]);
    }

    #[test]
    fn distinct_counting_groups_identical_rows() {
        let ds = WeightedDataset::from_vectors_unweighted(vec![
            vec![0.0f64],
            vec![0.0],
            vec![0.0],
            vec![100.0],
        ])
        .unwrap();
        assert_eq!(ds.distinct_count(), 2);
        assert_eq!(ds.distinct_among(&[0, 1, 2]), 1);
        assert_eq!(ds.distinct_among(&[0, 3]), 2);
        assert_eq!(ds.value_group(0), ds.value_group(2));
        assert_ne!(ds.value_group(0), ds.value_group(3));
    }

    #[test]
    fn negative_zero_groups_with_zero() {
        let ds =
            WeightedDataset::from_vectors_unweighted(vec![vec![0.0f64], vec![-0.0f64]]).unwrap();
        assert_eq!(ds.distinct_count(), 1);
    }

    #[test]
    fn rejects_empty_and_bad_dims() {
        assert!(WeightedDataset::<f64>::from_vectors_unweighted(vec![]).is_err());
        assert!(
            WeightedDataset::from_vectors_unweighted(vec![vec![1.0f64], vec![1.0, 2.0]]).is_err()
        );
    }

    #[test]
    fn opaque_ids_are_distinct() {
        let ds = WeightedDataset::<f64>::opaque(5, vec![1.0; 5]).unwrap();
        assert_eq!(ds.distinct_count(), 5);
        assert!(ds.dim().is_none());
    }
}
