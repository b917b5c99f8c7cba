//! Coreset construction for kernel `(k, z)`-clustering.
//!
//! The pipeline: `dz_sampling` finds an `O(log k)`-approximate seed set,
//! `sensitivities` turns it into an importance distribution, and
//! `importance_sampling` draws a reweighted subset whose clustering cost
//! tracks the full set for every candidate center set. `build_coreset`
//! wraps one round (the experimental default) or the iterated reduction
//! that shrinks the distinct count round by round.

use rayon::prelude::*;

use crate::center::pow_z;
use crate::dataset::{WeightedDataset, WeightedSet};
use crate::error::{Error, Result};
use crate::kernel::KernelOracle;
use crate::sampling::{rng_from_seed, Prng, WeightedCdf};
use crate::scalar::{num, Scalar};

/// How the first D^z seed is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstSeed {
    /// Proportional to entry weight (a weighted point stands for that many
    /// copies). The default.
    #[default]
    WeightProportional,
    /// Uniform over entries regardless of weight.
    UniformEntry,
}

/// Output of D^z-sampling: seed indices plus the per-entry nearest-seed
/// assignment and squared distance, maintained incrementally.
#[derive(Debug, Clone)]
pub struct SeedCenters<F: Scalar> {
    /// Universe indices of the chosen seeds (distinct).
    pub indices: Vec<usize>,
    /// Per set entry: position into `indices` of its nearest seed.
    pub assignment: Vec<usize>,
    /// Per set entry: squared feature-space distance to its nearest seed.
    pub sqdist: Vec<F>,
}

impl<F: Scalar> SeedCenters<F> {
    /// Builds seed state from an explicit list of set positions (used by the
    /// solvers to enumerate initializations). Distances and assignments are
    /// recomputed from scratch, with the self-assignment convention: the
    /// entry a seed was taken from belongs to that seed's cluster.
    pub fn from_positions(
        oracle: &KernelOracle<F>,
        set: &WeightedSet<F>,
        positions: &[usize],
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyInput("no seed positions".into()));
        }
        for &p in positions {
            if p >= set.len() {
                return Err(Error::IndexOutOfRange {
                    index: p,
                    len: set.len(),
                });
            }
        }
        let indices: Vec<usize> = positions.iter().map(|&p| set.indices[p]).collect();
        let mut state = SeedState::init(oracle, set, indices[0], positions[0]);
        for (round, (&idx, &pos)) in indices.iter().zip(positions).enumerate().skip(1) {
            state.add_seed(oracle, set, idx, pos, round);
        }
        Ok(state.finish())
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }
}

/// Incrementally maintained nearest-seed state; one pass over the set per
/// added seed.
struct SeedState<F: Scalar> {
    indices: Vec<usize>,
    assignment: Vec<usize>,
    sqdist: Vec<F>,
}

impl<F: Scalar> SeedState<F> {
    fn init(oracle: &KernelOracle<F>, set: &WeightedSet<F>, seed_idx: usize, seed_pos: usize) -> Self {
        let sqdist: Vec<F> = set
            .indices
            .par_iter()
            .with_min_len(512)
            .map(|&i| oracle.sqdist(i, seed_idx))
            .collect();
        let mut state = Self {
            indices: vec![seed_idx],
            assignment: vec![0; set.len()],
            sqdist,
        };
        state.sqdist[seed_pos] = F::zero();
        state
    }

    fn add_seed(
        &mut self,
        oracle: &KernelOracle<F>,
        set: &WeightedSet<F>,
        seed_idx: usize,
        seed_pos: usize,
        round: usize,
    ) {
        self.indices.push(seed_idx);
        let fresh: Vec<F> = set
            .indices
            .par_iter()
            .with_min_len(512)
            .map(|&i| oracle.sqdist(i, seed_idx))
            .collect();
        for (i, d2) in fresh.into_iter().enumerate() {
            // Strict `<` keeps ties on the earliest seed.
            if d2 < self.sqdist[i] {
                self.sqdist[i] = d2;
                self.assignment[i] = round;
            }
        }
        // A seed always owns the entry it was drawn from, so no cluster in
        // the induced partition is empty even under exact distance ties.
        self.assignment[seed_pos] = round;
        self.sqdist[seed_pos] = F::zero();
    }

    fn finish(self) -> SeedCenters<F> {
        SeedCenters {
            indices: self.indices,
            assignment: self.assignment,
            sqdist: self.sqdist,
        }
    }
}

/// D^z-sampling (kernelized `k-means++` seeding for general `z`).
///
/// The first seed is drawn by weight (see [`FirstSeed`]); each later seed is
/// drawn with probability proportional to `w(x) · dist(ϕ(x), C)^z`. When the
/// remaining D^z mass is zero the rest are drawn uniformly from distinct
/// values not yet chosen, and when the set has fewer than `k` distinct
/// values all of them are returned.
pub fn dz_sampling<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    k: usize,
    z: F,
    seed: u64,
) -> Result<SeedCenters<F>> {
    let mut rng = rng_from_seed(seed);
    dz_sampling_rng(oracle, set, k, z, FirstSeed::default(), &mut rng)
}

pub fn dz_sampling_rng<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    k: usize,
    z: F,
    first_seed: FirstSeed,
    rng: &mut Prng,
) -> Result<SeedCenters<F>> {
    if k < 1 {
        return Err(Error::invalid("k must be >= 1"));
    }
    if !(z >= F::one()) {
        return Err(Error::invalid(format!("z must be >= 1, got {z}")));
    }
    let dataset = oracle.dataset();
    let distinct = set.distinct_count(dataset);

    if distinct < k {
        return Ok(all_distinct_seeds(oracle, set, dataset));
    }

    let first_pos = match first_seed {
        FirstSeed::WeightProportional => {
            let cdf = WeightedCdf::new(&set.weights)
                .expect("set weights are validated strictly positive");
            cdf.sample(rng)
        }
        FirstSeed::UniformEntry => {
            use rand::Rng;
            rng.random_range(0..set.len())
        }
    };
    let mut state = SeedState::init(oracle, set, set.indices[first_pos], first_pos);

    let mut round = 1;
    while round < k {
        let masses: Vec<F> = state
            .sqdist
            .iter()
            .zip(&set.weights)
            .map(|(&d2, &w)| w * pow_z(d2, z))
            .collect();
        match WeightedCdf::new(&masses) {
            Some(cdf) => {
                let pos = cdf.sample(rng);
                state.add_seed(oracle, set, set.indices[pos], pos, round);
                round += 1;
            }
            None => {
                // Zero total cost: every remaining seed comes uniformly from
                // value groups without a chosen representative.
                fill_degenerate_rounds(&mut state, set, dataset, k, rng);
                break;
            }
        }
    }
    Ok(state.finish())
}

fn all_distinct_seeds<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    dataset: &WeightedDataset<F>,
) -> SeedCenters<F> {
    let mut seen = std::collections::HashSet::new();
    let mut state: Option<SeedState<F>> = None;
    let mut round = 0;
    for (pos, &idx) in set.indices.iter().enumerate() {
        if !seen.insert(dataset.value_group(idx)) {
            continue;
        }
        match &mut state {
            None => state = Some(SeedState::init(oracle, set, idx, pos)),
            Some(s) => {
                s.add_seed(oracle, set, idx, pos, round);
            }
        }
        round += 1;
    }
    state.expect("weighted sets are nonempty").finish()
}

fn fill_degenerate_rounds<F: Scalar>(
    state: &mut SeedState<F>,
    set: &WeightedSet<F>,
    dataset: &WeightedDataset<F>,
    k: usize,
    rng: &mut Prng,
) {
    let chosen: std::collections::HashSet<u32> = state
        .indices
        .iter()
        .map(|&i| dataset.value_group(i))
        .collect();
    // First entry of each unchosen value group, in set order.
    let mut reps: Vec<usize> = Vec::new();
    let mut seen = chosen.clone();
    for (pos, &idx) in set.indices.iter().enumerate() {
        if seen.insert(dataset.value_group(idx)) {
            reps.push(pos);
        }
    }
    let mut round = state.indices.len();
    while round < k && !reps.is_empty() {
        use rand::Rng;
        let pick = rng.random_range(0..reps.len());
        let pos = reps.swap_remove(pick);
        state.indices.push(set.indices[pos]);
        state.assignment[pos] = round;
        state.sqdist[pos] = F::zero();
        round += 1;
    }
}

/// Per-entry sensitivity scores and the induced sampling distribution.
#[derive(Debug, Clone)]
pub struct SensitivityProfile<F: Scalar> {
    /// `σ_x = w(x)·dist(x, C*)^z / cost_z(X, C*) + w(x) / w(C*(x))`,
    /// with the first term defined as 0 when the seed cost is 0.
    pub sigma: Vec<F>,
    /// `p_x = σ_x / Σ σ_y`; sums to 1.
    pub p: Vec<F>,
}

/// Computes sensitivities from a seed solution.
pub fn sensitivities<F: Scalar>(
    set: &WeightedSet<F>,
    seeds: &SeedCenters<F>,
    z: F,
) -> Result<SensitivityProfile<F>> {
    if seeds.assignment.len() != set.len() {
        return Err(Error::invalid(
            "seed assignment does not cover the set",
        ));
    }
    let k = seeds.k();
    let mut cluster_weight = vec![F::zero(); k];
    let mut cost = F::zero();
    for ((&c, &d2), &w) in seeds.assignment.iter().zip(&seeds.sqdist).zip(&set.weights) {
        cluster_weight[c] = cluster_weight[c] + w;
        cost = cost + w * pow_z(d2, z);
    }
    assert!(
        cluster_weight.iter().all(|&cw| cw > F::zero()),
        "empty cluster in seed assignment"
    );
    let zero_cost = !(cost > F::zero());
    let mut sigma = Vec::with_capacity(set.len());
    let mut total = F::zero();
    for ((&c, &d2), &w) in seeds.assignment.iter().zip(&seeds.sqdist).zip(&set.weights) {
        let cost_term = if zero_cost {
            F::zero()
        } else {
            w * pow_z(d2, z) / cost
        };
        let s = cost_term + w / cluster_weight[c];
        sigma.push(s);
        total = total + s;
    }
    let p = sigma.iter().map(|&s| s / total).collect();
    Ok(SensitivityProfile { sigma, p })
}

/// A reweighted index subset standing in for its source set.
#[derive(Debug, Clone, PartialEq)]
pub struct Coreset<F: Scalar> {
    /// Distinct universe indices, ascending in source-set order.
    pub indices: Vec<usize>,
    pub weights: Vec<F>,
    /// Distinct count of the set this coreset was built from.
    pub source_distinct: usize,
}

impl<F: Scalar> Coreset<F> {
    /// The whole set as its own coreset.
    pub fn identity(set: &WeightedSet<F>, source_distinct: usize) -> Self {
        Self {
            indices: set.indices.clone(),
            weights: set.weights.clone(),
            source_distinct,
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

    pub fn as_set(&self) -> WeightedSet<F> {
        WeightedSet {
            indices: self.indices.clone(),
            weights: self.weights.clone(),
        }
    }
}

/// One round of sensitivity-based importance sampling: `n_samples` i.i.d.
/// draws from `p`, duplicates aggregated, entry drawn `m` times reweighted
/// to `m · w(x) / (p_x · N)`.
pub fn importance_sampling<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    k: usize,
    z: F,
    n_samples: usize,
    seed: u64,
) -> Result<Coreset<F>> {
    let mut rng = rng_from_seed(seed);
    importance_sampling_rng(oracle, set, k, z, n_samples, FirstSeed::default(), &mut rng)
}

pub fn importance_sampling_rng<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    k: usize,
    z: F,
    n_samples: usize,
    first_seed: FirstSeed,
    rng: &mut Prng,
) -> Result<Coreset<F>> {
    if n_samples < 1 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    let seeds = dz_sampling_rng(oracle, set, k, z, first_seed, rng)?;
    let profile = sensitivities(set, &seeds, z)?;
    let cdf = WeightedCdf::new(&profile.p).expect("sensitivities are strictly positive");
    draw_and_aggregate(set, n_samples, rng, &cdf, &profile.p, oracle.dataset())
}

/// Uniform-sampling baseline: `n_samples` i.i.d. draws uniform over entries
/// (`p_x = 1/n`), aggregated and reweighted exactly like importance
/// sampling. Needs no kernel access.
pub fn uniform_coreset<F: Scalar>(
    dataset: &WeightedDataset<F>,
    set: &WeightedSet<F>,
    n_samples: usize,
    seed: u64,
) -> Result<Coreset<F>> {
    if n_samples < 1 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    uniform_coreset_rng(dataset, set, n_samples, &mut rng)
}

pub fn uniform_coreset_rng<F: Scalar>(
    dataset: &WeightedDataset<F>,
    set: &WeightedSet<F>,
    n_samples: usize,
    rng: &mut Prng,
) -> Result<Coreset<F>> {
    let m = set.len();
    let p = vec![F::one() / num::<F>(m as f64); m];
    let cdf = WeightedCdf::new(&p).expect("uniform masses are positive");
    draw_and_aggregate(set, n_samples, rng, &cdf, &p, dataset)
}

fn draw_and_aggregate<F: Scalar>(
    set: &WeightedSet<F>,
    n_samples: usize,
    rng: &mut Prng,
    cdf: &WeightedCdf<F>,
    p: &[F],
    dataset: &WeightedDataset<F>,
) -> Result<Coreset<F>> {
    let mut counts = vec![0u32; set.len()];
    for _ in 0..n_samples {
        counts[cdf.sample(rng)] += 1;
    }
    let n = num::<F>(n_samples as f64);
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    for (pos, &m) in counts.iter().enumerate() {
        if m == 0 {
            continue;
        }
        indices.push(set.indices[pos]);
        weights.push(num::<F>(m as f64) / (p[pos] * n) * set.weights[pos]);
    }
    Ok(Coreset {
        indices,
        weights,
        source_distinct: set.distinct_count(dataset),
    })
}

/// Construction mode for [`build_coreset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuildMode {
    /// One importance-sampling round; the experimental default.
    #[default]
    Single,
    /// Iterate rounds until the distinct count stops decreasing, shrinking
    /// the per-round accuracy target as `ε_i = ε / (log^{(i)} ‖X‖₀)^{1/4}`.
    Iterated,
}

#[derive(Debug, Clone)]
pub struct BuildConfig<F: Scalar> {
    pub k: usize,
    pub z: F,
    pub epsilon: F,
    pub mode: BuildMode,
    /// Replaces the sample-count formula in single mode.
    pub n_override: Option<usize>,
    /// Leading constant of the sample-count formula; arbitrary, tune freely.
    pub sample_constant: f64,
    pub first_seed: FirstSeed,
}

impl<F: Scalar> BuildConfig<F> {
    pub fn new(k: usize, z: F, epsilon: F) -> Self {
        Self {
            k,
            z,
            epsilon,
            mode: BuildMode::Single,
            n_override: None,
            sample_constant: 0.05,
            first_seed: FirstSeed::default(),
        }
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_override = Some(n);
        self
    }

    pub fn with_mode(mut self, mode: BuildMode) -> Self {
        self.mode = mode;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::invalid("k must be >= 1"));
        }
        if !(self.z >= F::one()) {
            return Err(Error::invalid(format!("z must be >= 1, got {}", self.z)));
        }
        let eps = crate::scalar::as_f64(self.epsilon);
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("epsilon must be in (0, 1), got {eps}")));
        }
        if !(self.sample_constant > 0.0) {
            return Err(Error::invalid("sample constant must be positive"));
        }
        Ok(())
    }
}

/// Per-round accuracy target: `ε / (log^{(round)}₂ ‖X‖₀)^{1/4}`, with the
/// iterated log clamped at 1 so deep rounds never inflate past `ε`.
fn eps_for_round(epsilon: f64, round: usize, distinct0: usize) -> f64 {
    let mut v = (distinct0 as f64).max(2.0).log2();
    for _ in 1..round {
        if v <= 2.0 {
            v = 1.0;
            break;
        }
        v = v.log2();
    }
    epsilon / v.max(1.0).powf(0.25)
}

/// Sample-count formula `C₀ · ε⁻⁴ · 2^{2z} · z · k² · log₂²(k+1) · log₂ ‖X‖₀`.
fn sample_count(c0: f64, eps: f64, z: f64, k: usize, distinct: usize) -> usize {
    let kf = k as f64;
    let n = c0
        * eps.powi(-4)
        * 4f64.powf(z)
        * z
        * kf
        * kf
        * (kf + 1.0).log2().powi(2)
        * (distinct.max(2) as f64).log2();
    (n.ceil() as usize).max(1)
}

/// Builds a coreset for kernel `(k, z)`-clustering.
///
/// When the set already has at most the target number of distinct elements
/// it is returned unchanged as its own coreset.
pub fn build_coreset<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    cfg: &BuildConfig<F>,
    seed: u64,
) -> Result<Coreset<F>> {
    let mut rng = rng_from_seed(seed);
    build_coreset_rng(oracle, set, cfg, &mut rng)
}

pub fn build_coreset_rng<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    cfg: &BuildConfig<F>,
    rng: &mut Prng,
) -> Result<Coreset<F>> {
    cfg.validate()?;
    let dataset = oracle.dataset();
    let distinct0 = set.distinct_count(dataset);
    let eps = crate::scalar::as_f64(cfg.epsilon);
    let z = crate::scalar::as_f64(cfg.z);

    match cfg.mode {
        BuildMode::Single => {
            let n = cfg
                .n_override
                .unwrap_or_else(|| sample_count(cfg.sample_constant, eps_for_round(eps, 1, distinct0), z, cfg.k, distinct0));
            if distinct0 <= n {
                return Ok(Coreset::identity(set, distinct0));
            }
            importance_sampling_rng(oracle, set, cfg.k, cfg.z, n, cfg.first_seed, rng)
        }
        BuildMode::Iterated => {
            let mut current = Coreset::identity(set, distinct0);
            let mut current_distinct = distinct0;
            for round in 1..=64 {
                let eps_i = eps_for_round(eps, round, distinct0);
                let n_i = sample_count(cfg.sample_constant, eps_i, z, cfg.k, current_distinct);
                if current_distinct <= n_i {
                    return Ok(current);
                }
                let cur_set = current.as_set();
                let next =
                    importance_sampling_rng(oracle, &cur_set, cfg.k, cfg.z, n_i, cfg.first_seed, rng)?;
                let next_distinct = next.as_set().distinct_count(dataset);
                if next_distinct >= current_distinct {
                    return Ok(current);
                }
                current = next;
                current_distinct = next_distinct;
            }
            Ok(current)
        }
    }
}
