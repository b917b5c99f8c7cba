//! Kernel k-means solving on weighted sets: `k-means++` seeding via D²
//! sampling, Lloyd refinement through the kernel trick, evaluation of a
//! coreset solution on the full dataset, and an exact enumeration oracle
//! for desk-scale instances.

use rayon::prelude::*;

use crate::center::{cost_z_prepared, pow_z, Center, PreparedCenter};
use crate::coreset::{dz_sampling_rng, FirstSeed, SeedCenters};
use crate::dataset::WeightedSet;
use crate::error::{Error, Result};
use crate::kernel::KernelOracle;
use crate::sampling::{rng_from_seed, Prng};
use crate::scalar::{num, Scalar};

/// Limits for [`brute_force_exact`]; enumeration is Stirling-number sized.
pub const BRUTE_FORCE_MAX_DISTINCT: usize = 12;
pub const BRUTE_FORCE_MAX_K: usize = 4;

#[derive(Debug, Clone)]
pub struct LloydConfig {
    /// Upper bound on assign/update rounds.
    pub max_iters: usize,
    /// Materialize the set's Gram matrix when it has at most this many
    /// entries; above it kernel values are recomputed on the fly, which
    /// keeps full-dataset solves feasible without O(n²) memory.
    pub gram_cache_limit: usize,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            gram_cache_limit: 4096,
        }
    }
}

/// A solved clustering: cluster-mean centers as linear combinations, the
/// assignment and objective on the solved set, and the rounds used.
#[derive(Debug, Clone)]
pub struct ClusteringSolution<F: Scalar> {
    pub centers: Vec<Center<F>>,
    pub assignment: Vec<usize>,
    pub objective: F,
    pub iterations: usize,
}

/// Kernelized `k-means++` seeding: exactly D^z-sampling with `z = 2`.
pub fn kmeanspp_seed<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    k: usize,
    seed: u64,
) -> Result<SeedCenters<F>> {
    let mut rng = rng_from_seed(seed);
    kmeanspp_seed_rng(oracle, set, k, &mut rng)
}

pub fn kmeanspp_seed_rng<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    k: usize,
    rng: &mut Prng,
) -> Result<SeedCenters<F>> {
    dz_sampling_rng(oracle, set, k, num::<F>(2.0), FirstSeed::default(), rng)
}

/// Gram access for Lloyd: either a materialized `m × m` matrix over set
/// positions or lazy kernel evaluations.
enum Gram<'a, F: Scalar> {
    Cached { data: Vec<F>, m: usize },
    Lazy { oracle: &'a KernelOracle<F>, indices: &'a [usize] },
}

impl<'a, F: Scalar> Gram<'a, F> {
    fn build(oracle: &'a KernelOracle<F>, set: &'a WeightedSet<F>, limit: usize) -> Self {
        let m = set.len();
        if m <= limit {
            let indices = &set.indices;
            let data: Vec<F> = (0..m)
                .into_par_iter()
                .flat_map_iter(|a| {
                    let ia = indices[a];
                    (0..m).map(move |b| (ia, indices[b]))
                })
                .map(|(ia, ib)| oracle.eval(ia, ib))
                .collect();
            Gram::Cached { data, m }
        } else {
            Gram::Lazy {
                oracle,
                indices: &set.indices,
            }
        }
    }

    #[inline]
    fn at(&self, a: usize, b: usize) -> F {
        match self {
            Gram::Cached { data, m } => data[a * m + b],
            Gram::Lazy { oracle, indices } => oracle.eval(indices[a], indices[b]),
        }
    }
}

/// Per-cluster state: member positions, normalized coefficients, self-Gram.
struct ClusterMean<F: Scalar> {
    members: Vec<usize>,
    alphas: Vec<F>,
    gram_cc: F,
}

fn compute_means<F: Scalar>(
    set: &WeightedSet<F>,
    gram: &Gram<'_, F>,
    assignment: &[usize],
    contribution: &[F],
    k: usize,
) -> Vec<ClusterMean<F>> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (pos, &c) in assignment.iter().enumerate() {
        members[c].push(pos);
    }
    // Re-seed empty clusters with the entries contributing the most cost.
    let empties: Vec<usize> = (0..k).filter(|&c| members[c].is_empty()).collect();
    if !empties.is_empty() {
        let mut contrib: Vec<F> = contribution.to_vec();
        for empty_c in empties {
            let mut best_pos = 0usize;
            let mut best = F::neg_infinity();
            for (pos, &v) in contrib.iter().enumerate() {
                if v > best && members[assignment[pos]].len() > 1 {
                    best = v;
                    best_pos = pos;
                }
            }
            let old = assignment[best_pos];
            members[old].retain(|&p| p != best_pos);
            members[empty_c].push(best_pos);
            contrib[best_pos] = F::neg_infinity();
        }
    }
    members
        .into_iter()
        .map(|mem| {
            let total: F = mem.iter().map(|&p| set.weights[p]).sum();
            let alphas: Vec<F> = mem.iter().map(|&p| set.weights[p] / total).collect();
            let mut gram_cc = F::zero();
            for (ai, &a) in mem.iter().enumerate() {
                for (bi, &b) in mem.iter().enumerate() {
                    gram_cc = gram_cc + alphas[ai] * alphas[bi] * gram.at(a, b);
                }
            }
            ClusterMean {
                members: mem,
                alphas,
                gram_cc,
            }
        })
        .collect()
}

/// Weighted Lloyd refinement in feature space from the given seeds.
///
/// Alternates nearest-mean assignment (ties to the lowest cluster index)
/// with weighted-mean updates until the assignment is stable or `max_iters`
/// is hit; the objective (`z = 2`) never increases across rounds. When the
/// set has fewer than `k` distinct values the degenerate solution with one
/// center per distinct value and objective 0 is returned.
pub fn lloyd<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    init: &SeedCenters<F>,
    k: usize,
    cfg: &LloydConfig,
) -> Result<ClusteringSolution<F>> {
    if k < 1 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let distinct = set.distinct_count(oracle.dataset());
    if distinct < k {
        return Ok(degenerate_all_points(oracle, set));
    }
    if init.k() != k {
        return Err(Error::invalid(format!(
            "init has {} seeds but k = {k}",
            init.k()
        )));
    }

    let m = set.len();
    let gram = Gram::build(oracle, set, cfg.gram_cache_limit);
    let diag: Vec<F> = set.indices.iter().map(|&i| oracle.diag(i)).collect();

    let mut assignment = init.assignment.clone();
    let mut d2: Vec<F> = init.sqdist.clone();
    let mut prev_obj: F = weighted_obj(set, &d2);
    let mut iterations = 0;
    let mut objective = prev_obj;

    for iter in 1..=cfg.max_iters {
        let contribution: Vec<F> = d2
            .iter()
            .zip(&set.weights)
            .map(|(&d, &w)| w * d)
            .collect();
        let means = compute_means(set, &gram, &assignment, &contribution, k);

        let step: Vec<(usize, F)> = (0..m)
            .into_par_iter()
            .with_min_len(64)
            .map(|pos| {
                let mut best = 0usize;
                let mut best_d2 = F::infinity();
                for (c, mean) in means.iter().enumerate() {
                    let mut cross = F::zero();
                    for (&mp, &a) in mean.members.iter().zip(&mean.alphas) {
                        cross = cross + a * gram.at(pos, mp);
                    }
                    let r = diag[pos] - num::<F>(2.0) * cross + mean.gram_cc;
                    let r = if r > F::zero() { r } else { F::zero() };
                    if r < best_d2 {
                        best_d2 = r;
                        best = c;
                    }
                }
                (best, best_d2)
            })
            .collect();

        let new_assignment: Vec<usize> = step.iter().map(|&(c, _)| c).collect();
        let new_d2: Vec<F> = step.iter().map(|&(_, d)| d).collect();
        objective = weighted_obj(set, &new_d2);
        iterations = iter;

        let slack = num::<F>(1e-9) * prev_obj.abs().max(F::one());
        assert!(
            objective <= prev_obj + slack,
            "Lloyd objective increased: {objective} > {prev_obj}"
        );

        let converged = new_assignment == assignment;
        assignment = new_assignment;
        d2 = new_d2;
        prev_obj = objective;
        if converged {
            break;
        }
    }

    // Final centers correspond to the converged assignment.
    let contribution: Vec<F> = d2.iter().zip(&set.weights).map(|(&d, &w)| w * d).collect();
    let means = compute_means(set, &gram, &assignment, &contribution, k);
    let centers = means
        .iter()
        .map(|mean| Center::Combination {
            support: mean.members.iter().map(|&p| set.indices[p]).collect(),
            coeffs: mean.alphas.clone(),
        })
        .collect();

    Ok(ClusteringSolution {
        centers,
        assignment,
        objective,
        iterations,
    })
}

fn weighted_obj<F: Scalar>(set: &WeightedSet<F>, d2: &[F]) -> F {
    d2.iter().zip(&set.weights).map(|(&d, &w)| w * d).sum()
}

fn degenerate_all_points<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
) -> ClusteringSolution<F> {
    let dataset = oracle.dataset();
    let mut group_to_cluster = std::collections::HashMap::new();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut assignment = Vec::with_capacity(set.len());
    for (pos, &idx) in set.indices.iter().enumerate() {
        let g = dataset.value_group(idx);
        let next = clusters.len();
        let c = *group_to_cluster.entry(g).or_insert(next);
        if c == clusters.len() {
            clusters.push(Vec::new());
        }
        clusters[c].push(pos);
        assignment.push(c);
    }
    let centers = clusters
        .iter()
        .map(|mem| {
            let ws: Vec<F> = mem.iter().map(|&p| set.weights[p]).collect();
            Center::weighted_mean(mem.iter().map(|&p| set.indices[p]).collect(), &ws)
                .expect("cluster is nonempty")
        })
        .collect();
    ClusteringSolution {
        centers,
        assignment,
        objective: F::zero(),
        iterations: 0,
    }
}

/// Evaluated cost of a solution against a (typically much larger) set.
#[derive(Debug, Clone)]
pub struct Evaluation<F: Scalar> {
    pub objective: F,
    pub assignment: Vec<usize>,
}

/// Computes `cost₂(X, centers)` with each center's Gram term precomputed
/// once: `O(k·s²)` setup then `O(n·k·s)` kernel evaluations.
pub fn evaluate_on_full<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    solution: &ClusteringSolution<F>,
) -> Result<Evaluation<F>> {
    let prepared: Vec<PreparedCenter<F>> = solution
        .centers
        .iter()
        .map(|c| PreparedCenter::prepare(oracle, c))
        .collect::<Result<_>>()?;
    if prepared.is_empty() {
        return Err(Error::EmptyCenters);
    }
    let r = cost_z_prepared(oracle, set, &prepared, num::<F>(2.0));
    Ok(Evaluation {
        objective: r.total,
        assignment: r.assignment,
    })
}

/// Exact kernel `(k, z)`-clustering on a tiny set by enumerating all
/// partitions into at most `k` parts, with each part's center restricted to
/// its weighted mean (exact for `z = 2`).
pub fn brute_force_exact<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    k: usize,
    z: F,
) -> Result<ClusteringSolution<F>> {
    if k < 1 {
        return Err(Error::invalid("k must be >= 1"));
    }
    if !(z >= F::one()) {
        return Err(Error::invalid(format!("z must be >= 1, got {z}")));
    }
    let dataset = oracle.dataset();
    let distinct = set.distinct_count(dataset);
    if distinct > BRUTE_FORCE_MAX_DISTINCT || k > BRUTE_FORCE_MAX_K {
        return Err(Error::SizeGuard(format!(
            "brute force limited to {BRUTE_FORCE_MAX_DISTINCT} distinct values and k <= {BRUTE_FORCE_MAX_K}, \
             got {distinct} and {k}"
        )));
    }

    // Collapse value-identical entries; splitting them never changes the cost.
    let mut group_order: Vec<u32> = Vec::new();
    let mut group_of_entry = Vec::with_capacity(set.len());
    let mut rep_index: Vec<usize> = Vec::new();
    let mut group_weight: Vec<F> = Vec::new();
    for (pos, &idx) in set.indices.iter().enumerate() {
        let gid = dataset.value_group(idx);
        let g = match group_order.iter().position(|&x| x == gid) {
            Some(g) => g,
            None => {
                group_order.push(gid);
                rep_index.push(idx);
                group_weight.push(F::zero());
                group_order.len() - 1
            }
        };
        group_weight[g] = group_weight[g] + set.weights[pos];
        group_of_entry.push((pos, g));
    }
    let g = group_order.len();
    let kk = k.min(g);

    let gram: Vec<F> = (0..g * g)
        .map(|idx| oracle.eval(rep_index[idx / g], rep_index[idx % g]))
        .collect();

    let mut best_cost = F::infinity();
    let mut best_labels: Vec<usize> = (0..g).map(|_| 0).collect();
    let mut labels = vec![0usize; g];
    enumerate_partitions(&mut labels, 1, 0, kk, &mut |labels| {
        let cost = partition_cost(labels, g, &gram, &group_weight, z);
        if cost < best_cost {
            best_cost = cost;
            best_labels.copy_from_slice(labels);
        }
    });

    let used = best_labels.iter().copied().max().unwrap_or(0) + 1;
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); used];
    for (gi, &l) in best_labels.iter().enumerate() {
        parts[l].push(gi);
    }
    let centers: Vec<Center<F>> = parts
        .iter()
        .map(|part| {
            let ws: Vec<F> = part.iter().map(|&gi| group_weight[gi]).collect();
            Center::weighted_mean(part.iter().map(|&gi| rep_index[gi]).collect(), &ws)
                .expect("parts are nonempty")
        })
        .collect();
    let mut assignment = vec![0usize; set.len()];
    for &(pos, gi) in &group_of_entry {
        assignment[pos] = best_labels[gi];
    }
    Ok(ClusteringSolution {
        centers,
        assignment,
        objective: best_cost,
        iterations: 0,
    })
}

/// Restricted-growth enumeration of partitions of `0..labels.len()` into at
/// most `k` blocks; `labels[0]` is fixed to block 0.
fn enumerate_partitions<Fun: FnMut(&[usize])>(
    labels: &mut Vec<usize>,
    next: usize,
    max_used: usize,
    k: usize,
    visit: &mut Fun,
) {
    if next == labels.len() {
        visit(labels);
        return;
    }
    let cap = (max_used + 1).min(k - 1);
    for l in 0..=cap {
        labels[next] = l;
        enumerate_partitions(labels, next + 1, max_used.max(l), k, visit);
    }
}

fn partition_cost<F: Scalar>(
    labels: &[usize],
    g: usize,
    gram: &[F],
    weight: &[F],
    z: F,
) -> F {
    let k = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut total = F::zero();
    for part in 0..k {
        let members: Vec<usize> = (0..g).filter(|&gi| labels[gi] == part).collect();
        if members.is_empty() {
            continue;
        }
        let w_part: F = members.iter().map(|&gi| weight[gi]).sum();
        let mut gram_cc = F::zero();
        for &a in &members {
            for &b in &members {
                gram_cc = gram_cc + weight[a] * weight[b] * gram[a * g + b] / (w_part * w_part);
            }
        }
        for &gi in &members {
            let mut cross = F::zero();
            for &b in &members {
                cross = cross + weight[b] / w_part * gram[gi * g + b];
            }
            let d2 = (gram[gi * g + gi] - num::<F>(2.0) * cross + gram_cc).max(F::zero());
            total = total + weight[gi] * pow_z(d2, z);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::cost_z;
    use crate::dataset::WeightedDataset;
    use crate::kernel::KernelSpec;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn line_oracle(xs: &[f64]) -> KernelOracle<f64> {
        let points = xs.iter().map(|&x| vec![x]).collect();
        let ds = Arc::new(WeightedDataset::from_vectors_unweighted(points).unwrap());
        KernelOracle::from_spec(ds, KernelSpec::Linear).unwrap()
    }

    #[test]
    fn lloyd_k_distinct_points_reaches_zero() {
        let oracle = line_oracle(&[0.0, 5.0, 11.0]);
        let set = WeightedSet::full(oracle.dataset());
        let init = SeedCenters::from_positions(&oracle, &set, &[0, 1, 2]).unwrap();
        let sol = lloyd(&oracle, &set, &init, 3, &LloydConfig::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.assignment, vec![0, 1, 2]);
    }

    #[test]
    fn lloyd_two_cluster_line_instance() {
        // {0,2,10,12} with k=2 has optimum {1, 11} and objective 4.
        let oracle = line_oracle(&[0.0, 2.0, 10.0, 12.0]);
        let set = WeightedSet::full(oracle.dataset());
        for init_pos in [[0usize, 2], [0, 3], [1, 2], [1, 3]] {
            let init = SeedCenters::from_positions(&oracle, &set, &init_pos).unwrap();
            let sol = lloyd(&oracle, &set, &init, 2, &LloydConfig::default()).unwrap();
            assert_relative_eq!(sol.objective, 4.0, max_relative = 1e-12);
            assert_eq!(sol.assignment[0], sol.assignment[1]);
            assert_eq!(sol.assignment[2], sol.assignment[3]);
            assert_ne!(sol.assignment[0], sol.assignment[2]);
        }
    }

    #[test]
    fn lloyd_objective_matches_recomputed_cost() {
        let xs: Vec<f64> = (0..40).map(|i| ((i * 17) % 23) as f64).collect();
        let oracle = line_oracle(&xs);
        let set = WeightedSet::full(oracle.dataset());
        let init = kmeanspp_seed(&oracle, &set, 3, 5).unwrap();
        let sol = lloyd(&oracle, &set, &init, 3, &LloydConfig::default()).unwrap();
        let recomputed = cost_z(&oracle, &set, &sol.centers, 2.0).unwrap();
        let scale = sol.objective.abs().max(1e-300);
        assert!(
            ((sol.objective - recomputed.total) / scale).abs() < 1e-9,
            "{} vs {}",
            sol.objective,
            recomputed.total
        );
        for c in &sol.centers {
            if let Center::Combination { coeffs, .. } = c {
                let s: f64 = coeffs.iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "coefficients sum to {s}");
            }
        }
    }

    #[test]
    fn lloyd_gram_cache_does_not_change_result() {
        let xs: Vec<f64> = (0..60).map(|i| ((i * 13) % 31) as f64).collect();
        let oracle = line_oracle(&xs);
        let set = WeightedSet::full(oracle.dataset());
        let init = kmeanspp_seed(&oracle, &set, 4, 2).unwrap();
        let cached = lloyd(&oracle, &set, &init, 4, &LloydConfig::default()).unwrap();
        let lazy = lloyd(
            &oracle,
            &set,
            &init,
            4,
            &LloydConfig {
                gram_cache_limit: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cached.assignment, lazy.assignment);
        assert_eq!(cached.objective, lazy.objective);
    }

    #[test]
    fn lloyd_degenerate_when_fewer_distinct_than_k() {
        let oracle = line_oracle(&[1.0, 1.0, 2.0]);
        let set = WeightedSet::full(oracle.dataset());
        let init = SeedCenters::from_positions(&oracle, &set, &[0]).unwrap();
        let sol = lloyd(&oracle, &set, &init, 3, &LloydConfig::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.centers.len(), 2);
        assert_eq!(sol.assignment[0], sol.assignment[1]);
        assert_ne!(sol.assignment[0], sol.assignment[2]);
    }

    #[test]
    fn evaluate_on_solved_set_matches_objective() {
        let xs: Vec<f64> = (0..30).map(|i| (i % 11) as f64 * 2.0).collect();
        let oracle = line_oracle(&xs);
        let set = WeightedSet::full(oracle.dataset());
        let init = kmeanspp_seed(&oracle, &set, 3, 1).unwrap();
        let sol = lloyd(&oracle, &set, &init, 3, &LloydConfig::default()).unwrap();
        let eval = evaluate_on_full(&oracle, &set, &sol).unwrap();
        let scale = sol.objective.abs().max(1e-300);
        assert!(((eval.objective - sol.objective) / scale).abs() < 1e-9);
    }

    #[test]
    fn evaluate_single_point_centers_matches_pairwise() {
        let oracle = line_oracle(&[0.0, 3.0, 7.0]);
        let set = WeightedSet::full(oracle.dataset());
        let sol = ClusteringSolution {
            centers: vec![Center::DataPoint(0), Center::DataPoint(2)],
            assignment: vec![],
            objective: 0.0,
            iterations: 0,
        };
        let eval = evaluate_on_full(&oracle, &set, &sol).unwrap();
        // 0 -> itself (0), 3 -> d²=9 to 0 vs 16 to 7, 7 -> itself (0).
        assert_relative_eq!(eval.objective, 9.0, max_relative = 1e-12);
        assert_eq!(eval.assignment, vec![0, 0, 1]);
    }

    #[test]
    fn evaluate_rejects_invalid_support() {
        let oracle = line_oracle(&[0.0, 1.0]);
        let set = WeightedSet::full(oracle.dataset());
        let sol = ClusteringSolution {
            centers: vec![Center::DataPoint(9)],
            assignment: vec![],
            objective: 0.0,
            iterations: 0,
        };
        assert!(matches!(
            evaluate_on_full(&oracle, &set, &sol),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn brute_force_line_instance() {
        let oracle = line_oracle(&[0.0, 2.0, 10.0, 12.0]);
        let set = WeightedSet::full(oracle.dataset());
        let sol = brute_force_exact(&oracle, &set, 2, 2.0).unwrap();
        assert_relative_eq!(sol.objective, 4.0, max_relative = 1e-12);
        assert_eq!(sol.assignment[0], sol.assignment[1]);
        assert_eq!(sol.assignment[2], sol.assignment[3]);
        assert_ne!(sol.assignment[0], sol.assignment[2]);
    }

    #[test]
    fn brute_force_k_equals_distinct_is_zero() {
        let oracle = line_oracle(&[1.0, 4.0, 9.0]);
        let set = WeightedSet::full(oracle.dataset());
        let sol = brute_force_exact(&oracle, &set, 3, 2.0).unwrap();
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn brute_force_k1_matches_closed_form() {
        // Weighted 1-mean cost: Σ wᵢ‖xᵢ - μ‖² with μ the weighted mean.
        let points = vec![vec![0.0f64], vec![2.0], vec![5.0]];
        let ws = vec![1.0, 2.0, 1.0];
        let ds = Arc::new(WeightedDataset::from_vectors(points, ws.clone()).unwrap());
        let oracle = KernelOracle::from_spec(ds, KernelSpec::Linear).unwrap();
        let set = WeightedSet::full(oracle.dataset());
        let sol = brute_force_exact(&oracle, &set, 1, 2.0).unwrap();
        let mu = (0.0 * 1.0 + 2.0 * 2.0 + 5.0) / 4.0;
        let expect: f64 = [0.0, 2.0, 5.0]
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| w * (x - mu) * (x - mu))
            .sum();
        assert_relative_eq!(sol.objective, expect, max_relative = 1e-12);
    }

    #[test]
    fn brute_force_guard_rejects_large_instances() {
        let xs: Vec<f64> = (0..13).map(|i| i as f64).collect();
        let oracle = line_oracle(&xs);
        let set = WeightedSet::full(oracle.dataset());
        assert!(matches!(
            brute_force_exact(&oracle, &set, 2, 2.0),
            Err(Error::SizeGuard(_))
        ));
        let small = line_oracle(&[0.0, 1.0]);
        let sset = WeightedSet::full(small.dataset());
        assert!(matches!(
            brute_force_exact(&small, &sset, 5, 2.0),
            Err(Error::SizeGuard(_))
        ));
    }

    #[test]
    fn lloyd_never_beats_brute_force() {
        use rand::Rng;
        let mut rng = crate::sampling::rng_from_seed(77);
        for _ in 0..10 {
            let xs: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 20.0).collect();
            let oracle = line_oracle(&xs);
            let set = WeightedSet::full(oracle.dataset());
            let exact = brute_force_exact(&oracle, &set, 2, 2.0).unwrap();
            for seed in 0..5 {
                let init = kmeanspp_seed(&oracle, &set, 2, seed).unwrap();
                let sol = lloyd(&oracle, &set, &init, 2, &LloydConfig::default()).unwrap();
                assert!(
                    sol.objective >= exact.objective - 1e-9 * exact.objective.max(1.0),
                    "lloyd {} below exact {}",
                    sol.objective,
                    exact.objective
                );
            }
        }
    }
}
