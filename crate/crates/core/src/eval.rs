//! Empirical-error protocol and timing harness: per repetition, build a
//! fresh coreset, draw random center sets from the data, and measure
//! `ε̂ = max_C |cost(S, C) - cost(X, C)| / cost(X, C)`; plus a speedup
//! report comparing the coreset-accelerated solver against the vanilla one.

use std::time::Instant;

use crate::center::{cost_total_prepared, Center, PreparedCenter};
use crate::coreset::{build_coreset, uniform_coreset, BuildConfig, Coreset};
use crate::dataset::WeightedSet;
use crate::error::{Error, Result};
use crate::kernel::KernelOracle;
use crate::sampling::{self, derive_seed, rng_from_seed, Prng};
use crate::scalar::{as_f64, num, Scalar};
use crate::solver::{evaluate_on_full, kmeanspp_seed_rng, lloyd, LloydConfig};

/// Which coreset procedure the harness evaluates.
#[derive(Debug, Clone)]
pub enum CoresetBuilder<F: Scalar> {
    /// Sensitivity-based importance sampling (single round).
    Importance { k: usize, z: F, n_samples: usize },
    /// Uniform-over-entries baseline.
    Uniform { n_samples: usize },
    /// The dataset itself; ε̂ is exactly 0.
    Identity,
}

impl<F: Scalar> CoresetBuilder<F> {
    pub fn build(
        &self,
        oracle: &KernelOracle<F>,
        set: &WeightedSet<F>,
        seed: u64,
    ) -> Result<Coreset<F>> {
        match self {
            CoresetBuilder::Importance { k, z, n_samples } => {
                let cfg = BuildConfig::new(*k, *z, num::<F>(0.5)).with_samples(*n_samples);
                build_coreset(oracle, set, &cfg, seed)
            }
            CoresetBuilder::Uniform { n_samples } => {
                uniform_coreset(oracle.dataset(), set, *n_samples, seed)
            }
            CoresetBuilder::Identity => Ok(Coreset::identity(
                set,
                set.distinct_count(oracle.dataset()),
            )),
        }
    }

    pub fn requested_samples(&self) -> Option<usize> {
        match self {
            CoresetBuilder::Importance { n_samples, .. }
            | CoresetBuilder::Uniform { n_samples } => Some(*n_samples),
            CoresetBuilder::Identity => None,
        }
    }
}

/// Parameters of the empirical-error measurement.
#[derive(Debug, Clone)]
pub struct ErrorProtocol {
    /// Points per random center set.
    pub k: usize,
    pub num_center_sets: usize,
    pub num_repetitions: usize,
    /// Reuse one batch of center sets across repetitions instead of
    /// redrawing per repetition.
    pub fixed_center_sets: bool,
}

impl Default for ErrorProtocol {
    fn default() -> Self {
        Self {
            k: 5,
            num_center_sets: 500,
            num_repetitions: 100,
            fixed_center_sets: false,
        }
    }
}

/// Aggregated empirical-error results.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// Requested coreset size, when the builder has one.
    pub requested_samples: Option<usize>,
    /// One ε̂ per repetition.
    pub epsilon_hats: Vec<f64>,
    /// Realized coreset entry counts per repetition.
    pub coreset_sizes: Vec<usize>,
    /// Derived per-repetition seeds.
    pub rep_seeds: Vec<u64>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
    pub num_center_sets: usize,
    pub num_repetitions: usize,
    pub master_seed: u64,
    /// Center sets skipped because the full-data cost was zero.
    pub skipped_center_sets: usize,
}

/// ε̂ of one given coreset against freshly drawn center sets.
///
/// Returns the max relative error and the number of zero-cost center sets
/// skipped. Centers are `k` distinct data points drawn uniformly from the
/// set's entries.
pub fn empirical_error_of<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    coreset: &Coreset<F>,
    k: usize,
    num_center_sets: usize,
    rng: &mut Prng,
) -> Result<(f64, usize)> {
    if k < 1 || num_center_sets < 1 {
        return Err(Error::invalid(
            "need k >= 1 and at least one center set",
        ));
    }
    if k > set.len() {
        return Err(Error::invalid(format!(
            "cannot draw {k} distinct centers from {} entries",
            set.len()
        )));
    }
    let coreset_set = coreset.as_set();
    let mut max_err = 0.0f64;
    let mut skipped = 0usize;
    for _ in 0..num_center_sets {
        let positions = sampling::sample_distinct(set.len(), k, rng)?;
        let prepared: Vec<PreparedCenter<F>> = positions
            .iter()
            .map(|&p| PreparedCenter::prepare(oracle, &Center::DataPoint(set.indices[p])))
            .collect::<Result<_>>()?;
        let full = cost_total_prepared(oracle, set, &prepared, num::<F>(2.0));
        if !(full > F::zero()) {
            skipped += 1;
            continue;
        }
        let on_coreset = cost_total_prepared(oracle, &coreset_set, &prepared, num::<F>(2.0));
        let err = as_f64((on_coreset - full).abs() / full);
        if err > max_err {
            max_err = err;
        }
    }
    Ok((max_err, skipped))
}

/// Runs the repetition loop: fresh coreset per repetition, ε̂ against
/// `num_center_sets` random center sets, aggregate statistics.
pub fn empirical_error<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    builder: &CoresetBuilder<F>,
    protocol: &ErrorProtocol,
    seed: u64,
) -> Result<ErrorReport> {
    if protocol.num_repetitions < 1 || protocol.num_center_sets < 1 {
        return Err(Error::invalid(
            "need at least one repetition and one center set",
        ));
    }
    let mut epsilon_hats = Vec::with_capacity(protocol.num_repetitions);
    let mut coreset_sizes = Vec::with_capacity(protocol.num_repetitions);
    let mut rep_seeds = Vec::with_capacity(protocol.num_repetitions);
    let mut skipped_total = 0usize;
    for rep in 0..protocol.num_repetitions {
        let rep_seed = derive_seed(seed, rep as u64);
        let coreset = builder.build(oracle, set, rep_seed)?;
        let centers_seed = if protocol.fixed_center_sets {
            derive_seed(seed, u64::MAX)
        } else {
            derive_seed(rep_seed, u64::MAX)
        };
        let mut rng = rng_from_seed(centers_seed);
        let (eps, skipped) =
            empirical_error_of(oracle, set, &coreset, protocol.k, protocol.num_center_sets, &mut rng)?;
        epsilon_hats.push(eps);
        coreset_sizes.push(coreset.len());
        rep_seeds.push(rep_seed);
        skipped_total += skipped;
    }
    let n = epsilon_hats.len() as f64;
    let mean = epsilon_hats.iter().sum::<f64>() / n;
    let min = epsilon_hats.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = epsilon_hats.iter().cloned().fold(0.0f64, f64::max);
    let var = if epsilon_hats.len() > 1 {
        epsilon_hats.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(ErrorReport {
        requested_samples: builder.requested_samples(),
        epsilon_hats,
        coreset_sizes,
        rep_seeds,
        mean,
        min,
        max,
        std: var.sqrt(),
        num_center_sets: protocol.num_center_sets,
        num_repetitions: protocol.num_repetitions,
        master_seed: seed,
        skipped_center_sets: skipped_total,
    })
}

/// Configuration of the solver speedup comparison.
#[derive(Debug, Clone)]
pub struct SpeedupConfig {
    pub k: usize,
    /// Coreset sizes to sweep.
    pub sizes: Vec<usize>,
    /// Runs per configuration; times are averaged, objectives take the min.
    pub runs: usize,
    /// Refine seeds with Lloyd (applies to both arms).
    pub refine: bool,
    pub lloyd: LloydConfig,
    /// The vanilla (no-coreset) solver only runs when the set is at most
    /// this large.
    pub vanilla_guard: usize,
}

impl Default for SpeedupConfig {
    fn default() -> Self {
        Self {
            k: 5,
            sizes: vec![100, 200, 500, 1000],
            runs: 10,
            refine: true,
            lloyd: LloydConfig::default(),
            vanilla_guard: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpeedupRow {
    pub n_samples: usize,
    pub build_s: f64,
    pub solve_s: f64,
    pub eval_s: f64,
    pub total_s: f64,
    pub min_objective: f64,
    /// `(min_objective - vanilla_min) / vanilla_min`, when vanilla ran.
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct VanillaBaseline {
    pub time_s: f64,
    pub min_objective: f64,
}

#[derive(Debug, Clone)]
pub struct SpeedupReport {
    pub rows: Vec<SpeedupRow>,
    pub vanilla: Option<VanillaBaseline>,
    pub runs: usize,
}

/// Times the coreset pipeline (build, seed, refine, evaluate on the full
/// set) across coreset sizes, against the vanilla kernelized `k-means++` on
/// the full set when it is small enough to be feasible.
pub fn speedup_report<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    cfg: &SpeedupConfig,
    seed: u64,
) -> Result<SpeedupReport> {
    if cfg.runs < 1 {
        return Err(Error::invalid("need at least one run"));
    }
    for &s in &cfg.sizes {
        if s < cfg.k {
            return Err(Error::invalid(format!(
                "coreset size {s} below k = {}",
                cfg.k
            )));
        }
    }

    // Both arms derive the same per-run seed stream and report objectives
    // through the same full-set evaluation route: with the identity coreset
    // (N = |X|) the pipelines run identically and the relative error is
    // exactly zero. The vanilla timer covers seeding and refinement only —
    // it already owns full-data assignments, while the coreset arm pays for
    // its evaluation pass in `eval_s`.
    let vanilla = if set.len() <= cfg.vanilla_guard {
        let mut time_acc = 0.0;
        let mut best = f64::INFINITY;
        for run in 0..cfg.runs {
            let mut rng = rng_from_seed(derive_seed(seed, run as u64));
            let t = Instant::now();
            let init = kmeanspp_seed_rng(oracle, set, cfg.k, &mut rng)?;
            let solution = solution_from(oracle, set, init, cfg.k, cfg.refine, &cfg.lloyd)?;
            time_acc += t.elapsed().as_secs_f64();
            let eval = evaluate_on_full(oracle, set, &solution)?;
            best = best.min(as_f64(eval.objective));
        }
        Some(VanillaBaseline {
            time_s: time_acc / cfg.runs as f64,
            min_objective: best,
        })
    } else {
        None
    };

    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for &n_samples in &cfg.sizes {
        let mut build_acc = 0.0;
        let mut solve_acc = 0.0;
        let mut eval_acc = 0.0;
        let mut best = f64::INFINITY;
        for run in 0..cfg.runs {
            let mut rng = rng_from_seed(derive_seed(seed, run as u64));

            let t0 = Instant::now();
            let build = BuildConfig::new(cfg.k, num::<F>(2.0), num::<F>(0.5))
                .with_samples(n_samples);
            let coreset = crate::coreset::build_coreset_rng(oracle, set, &build, &mut rng)?;
            build_acc += t0.elapsed().as_secs_f64();

            let t1 = Instant::now();
            let cset = coreset.as_set();
            let init = kmeanspp_seed_rng(oracle, &cset, cfg.k, &mut rng)?;
            let solution = solution_from(oracle, &cset, init, cfg.k, cfg.refine, &cfg.lloyd)?;
            solve_acc += t1.elapsed().as_secs_f64();

            let t2 = Instant::now();
            let eval = evaluate_on_full(oracle, set, &solution)?;
            eval_acc += t2.elapsed().as_secs_f64();
            best = best.min(as_f64(eval.objective));
        }
        let runs = cfg.runs as f64;
        rows.push(SpeedupRow {
            n_samples,
            build_s: build_acc / runs,
            solve_s: solve_acc / runs,
            eval_s: eval_acc / runs,
            total_s: (build_acc + solve_acc + eval_acc) / runs,
            min_objective: best,
            rel_error: vanilla
                .as_ref()
                .map(|v| (best - v.min_objective) / v.min_objective),
        });
    }
    Ok(SpeedupReport {
        rows,
        vanilla,
        runs: cfg.runs,
    })
}

fn solution_from<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    init: crate::coreset::SeedCenters<F>,
    k: usize,
    refine: bool,
    lloyd_cfg: &LloydConfig,
) -> Result<crate::solver::ClusteringSolution<F>> {
    if refine {
        lloyd(oracle, set, &init, k, lloyd_cfg)
    } else {
        Ok(crate::solver::ClusteringSolution {
            centers: init.indices.iter().map(|&i| Center::DataPoint(i)).collect(),
            assignment: init.assignment,
            objective: F::zero(),
            iterations: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::WeightedDataset;
    use crate::kernel::KernelSpec;
    use std::sync::Arc;

    fn grid_oracle(n: usize) -> KernelOracle<f64> {
        let points: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![((i * 31) % 97) as f64, ((i * 17) % 89) as f64])
            .collect();
        let ds = Arc::new(WeightedDataset::from_vectors_unweighted(points).unwrap());
        KernelOracle::from_spec(ds, KernelSpec::rbf(40.0)).unwrap()
    }

    #[test]
    fn identity_builder_has_zero_error() {
        let oracle = grid_oracle(200);
        let set = WeightedSet::full(oracle.dataset());
        let proto = ErrorProtocol {
            k: 3,
            num_center_sets: 20,
            num_repetitions: 5,
            fixed_center_sets: false,
        };
        let report =
            empirical_error(&oracle, &set, &CoresetBuilder::Identity, &proto, 7).unwrap();
        assert_eq!(report.mean, 0.0);
        assert_eq!(report.max, 0.0);
        assert_eq!(report.epsilon_hats.len(), 5);
        assert_eq!(report.skipped_center_sets, 0);
    }

    #[test]
    fn report_is_reproducible_per_seed() {
        let oracle = grid_oracle(150);
        let set = WeightedSet::full(oracle.dataset());
        let proto = ErrorProtocol {
            k: 3,
            num_center_sets: 10,
            num_repetitions: 4,
            fixed_center_sets: false,
        };
        let builder = CoresetBuilder::Importance {
            k: 3,
            z: 2.0,
            n_samples: 30,
        };
        let a = empirical_error(&oracle, &set, &builder, &proto, 11).unwrap();
        let b = empirical_error(&oracle, &set, &builder, &proto, 11).unwrap();
        assert_eq!(a.epsilon_hats, b.epsilon_hats);
        assert_eq!(a.mean, b.mean);
        let c = empirical_error(&oracle, &set, &builder, &proto, 12).unwrap();
        assert_ne!(a.epsilon_hats, c.epsilon_hats);
    }

    #[test]
    fn fixed_center_sets_share_draws_across_reps() {
        let oracle = grid_oracle(100);
        let set = WeightedSet::full(oracle.dataset());
        let proto = ErrorProtocol {
            k: 2,
            num_center_sets: 5,
            num_repetitions: 3,
            fixed_center_sets: true,
        };
        // With the identity builder every repetition sees the same coreset
        // (the set itself), so fixed center sets make all ε̂ identical.
        let report =
            empirical_error(&oracle, &set, &CoresetBuilder::Identity, &proto, 3).unwrap();
        assert!(report.epsilon_hats.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn error_report_stats_are_consistent() {
        let oracle = grid_oracle(300);
        let set = WeightedSet::full(oracle.dataset());
        let proto = ErrorProtocol {
            k: 3,
            num_center_sets: 15,
            num_repetitions: 6,
            fixed_center_sets: false,
        };
        let builder = CoresetBuilder::Uniform { n_samples: 40 };
        let r = empirical_error(&oracle, &set, &builder, &proto, 5).unwrap();
        assert!(r.min <= r.mean && r.mean <= r.max);
        assert!(r.epsilon_hats.iter().all(|&e| e >= 0.0));
        assert_eq!(r.requested_samples, Some(40));
    }

    #[test]
    fn speedup_report_small_instance_with_vanilla() {
        let oracle = grid_oracle(400);
        let set = WeightedSet::full(oracle.dataset());
        let cfg = SpeedupConfig {
            k: 3,
            sizes: vec![50, 100],
            runs: 2,
            refine: true,
            lloyd: LloydConfig::default(),
            vanilla_guard: 1000,
        };
        let report = speedup_report(&oracle, &set, &cfg, 1).unwrap();
        assert_eq!(report.rows.len(), 2);
        let vanilla = report.vanilla.as_ref().expect("vanilla within guard");
        assert!(vanilla.min_objective > 0.0);
        for row in &report.rows {
            assert!(row.min_objective.is_finite());
            assert!(row.rel_error.is_some());
            assert!(row.total_s > 0.0);
        }
    }

    #[test]
    fn speedup_identity_coreset_matches_vanilla_exactly() {
        // N = |X| yields the identity coreset, so both arms run the same
        // algorithm from the same per-run seeds.
        let oracle = grid_oracle(150);
        let set = WeightedSet::full(oracle.dataset());
        let cfg = SpeedupConfig {
            k: 3,
            sizes: vec![150],
            runs: 3,
            refine: true,
            lloyd: LloydConfig::default(),
            vanilla_guard: 1000,
        };
        let report = speedup_report(&oracle, &set, &cfg, 21).unwrap();
        let vanilla = report.vanilla.as_ref().unwrap();
        assert_eq!(report.rows[0].min_objective, vanilla.min_objective);
        assert_eq!(report.rows[0].rel_error, Some(0.0));
    }

    #[test]
    fn speedup_report_guard_disables_vanilla() {
        let oracle = grid_oracle(300);
        let set = WeightedSet::full(oracle.dataset());
        let cfg = SpeedupConfig {
            k: 3,
            sizes: vec![50],
            runs: 1,
            vanilla_guard: 100,
            ..Default::default()
        };
        let report = speedup_report(&oracle, &set, &cfg, 1).unwrap();
        assert!(report.vanilla.is_none());
        assert!(report.rows[0].rel_error.is_none());
    }

    #[test]
    fn speedup_report_rejects_sizes_below_k() {
        let oracle = grid_oracle(100);
        let set = WeightedSet::full(oracle.dataset());
        let cfg = SpeedupConfig {
            k: 5,
            sizes: vec![3],
            ..Default::default()
        };
        assert!(speedup_report(&oracle, &set, &cfg, 0).is_err());
    }
}
