//! Seeded k-means (k-means++ initialization, Lloyd iterations, best of several
//! restarts) and column standardization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Tuning knobs for [`kmeans`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub max_iter: usize,
    /// Convergence threshold on the largest center displacement.
    pub tol: f64,
    pub restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            max_iter: 100,
            tol: 1e-8,
            restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    /// Cluster label per point, `1..=k`, numbered by first appearance.
    pub assignment: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One restart together with the sse recorded after every Lloyd iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub result: KMeansResult,
    pub sse_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Number of distinct rows.
pub fn distinct_count(points: &[Vec<f64>]) -> usize {
    let mut rows: Vec<&Vec<f64>> = points.iter().collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows.dedup();
    rows.len()
}

fn check_input(points: &[Vec<f64>], k: usize, cfg: &KMeansConfig) -> Result<()> {
    if points.is_empty() || k == 0 {
        return Err(Error::InvalidParameter("k-means needs k >= 1 and at least one point".into()));
    }
    let d = points[0].len();
    if d == 0 || points.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidParameter("k-means points must share a dimension d >= 1".into()));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("k-means input".into()));
    }
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 || cfg.restarts == 0 {
        return Err(Error::InvalidParameter("k-means needs tol > 0, max_iter >= 1, restarts >= 1".into()));
    }
    let distinct = distinct_count(points);
    if k > distinct {
        return Err(Error::TooManyClusters { k, distinct });
    }
    Ok(())
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let mut target = rng.random::<f64>() * total;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w > 0.0 {
                pick = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
        }
        // k <= distinct points guarantees some positive weight remains.
        let c = points[pick.expect("positive weight")].clone();
        for (p, w) in points.iter().zip(d2.iter_mut()) {
            *w = w.min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    centers
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Lloyd iterations from the given initial centers.
pub fn lloyd(points: &[Vec<f64>], init: Vec<Vec<f64>>, max_iter: usize, tol: f64) -> KMeansRun {
    let (n, k, d) = (points.len(), init.len(), points[0].len());
    let mut centers = init;
    let mut assign = vec![0usize; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut dist = vec![0.0; n];
        for (i, p) in points.iter().enumerate() {
            let (j, dd) = nearest(p, &centers);
            assign[i] = j;
            dist[i] = dd;
        }

        // Empty clusters take the point farthest from its center among clusters with spare members.
        let mut counts = vec![0usize; k];
        for &a in &assign {
            counts[a] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| counts[assign[i]] > 1)
                .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                .expect("k <= distinct points leaves a donor cluster");
            counts[assign[far]] -= 1;
            assign[far] = j;
            counts[j] = 1;
            dist[far] = 0.0;
        }

        let mut next = vec![vec![0.0; d]; k];
        for (p, &a) in points.iter().zip(&assign) {
            for (s, v) in next[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for (c, &m) in next.iter_mut().zip(&counts) {
            for s in c.iter_mut() {
                *s /= m as f64;
            }
        }
        let shift = centers
            .iter()
            .zip(&next)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centers = next;
        let sse: f64 = points.iter().zip(&assign).map(|(p, &a)| sq_dist(p, &centers[a])).sum();
        trace.push(sse);
        if shift < tol {
            converged = true;
            break;
        }
    }

    // Canonical labels: clusters numbered by first appearance in row order.
    let mut relabel = vec![usize::MAX; k];
    let mut next_label = 0;
    for &a in &assign {
        if relabel[a] == usize::MAX {
            relabel[a] = next_label;
            next_label += 1;
        }
    }
    let mut ordered = vec![Vec::new(); k];
    for (old, c) in centers.into_iter().enumerate() {
        ordered[relabel[old]] = c;
    }
    KMeansRun {
        result: KMeansResult {
            assignment: assign.iter().map(|&a| relabel[a] + 1).collect(),
            centers: ordered,
            sse: *trace.last().expect("at least one iteration"),
            iterations,
            converged,
        },
        sse_trace: trace,
    }
}

/// Every restart of a seeded k-means run, in restart order.
pub fn kmeans_runs(points: &[Vec<f64>], k: usize, seed: u64, cfg: &KMeansConfig) -> Result<Vec<KMeansRun>> {
    check_input(points, k, cfg)?;
    Ok((0..cfg.restarts)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, r as u64));
            let init = plus_plus_init(points, k, &mut rng);
            lloyd(points, init, cfg.max_iter, cfg.tol)
        })
        .collect())
}

/// Best-of-restarts k-means by total within-cluster sum of squares.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let runs = kmeans_runs(points, k, seed, cfg)?;
    let best = runs
        .into_iter()
        .reduce(|best, r| if r.result.sse < best.result.sse { r } else { best })
        .expect("restarts >= 1");
    Ok(best.result)
}

/// Output of [`standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub data: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

/// Centers each column and scales it by its sample (n - 1) standard deviation.
pub fn standardize(rows: &[Vec<f64>]) -> Result<Standardized> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::InvalidParameter("standardize needs at least two rows".into()));
    }
    let d = rows[0].len();
    let mut means = vec![0.0; d];
    let mut sds = vec![0.0; d];
    for j in 0..d {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if !(var > 0.0) || !var.is_finite() {
            return Err(Error::ConstantColumn(j.to_string()));
        }
        means[j] = mean;
        sds[j] = var.sqrt();
    }
    let data = rows
        .iter()
        .map(|r| (0..d).map(|j| (r[j] - means[j]) / sds[j]).collect())
        .collect();
    Ok(Standardized { data, means, sds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Vec<f64>> {
        v.iter().map(|&(x, y)| vec![x, y]).collect()
    }

    /// Minimum sse over all 2-partitions of the points, by enumeration.
    fn brute_force_two(points: &[Vec<f64>]) -> (f64, Vec<bool>) {
        let n = points.len();
        let mut best = (f64::INFINITY, vec![]);
        for mask in 1u32..(1 << (n - 1)) {
            let side: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let mut sse = 0.0;
            for s in [true, false] {
                let members: Vec<&Vec<f64>> = points.iter().zip(&side).filter(|(_, &b)| b == s).map(|(p, _)| p).collect();
                let m = members.len() as f64;
                let c: Vec<f64> = (0..2).map(|j| members.iter().map(|p| p[j]).sum::<f64>() / m).collect();
                sse += members.iter().map(|p| sq_dist(p, &c)).sum::<f64>();
            }
            if sse < best.0 {
                best = (sse, side);
            }
        }
        best
    }

    fn same_partition(a: &[usize], b: &[bool]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 5.0), (3.0, 3.0)]);
        let r = kmeans(&p, 4, 1, &KMeansConfig::default()).unwrap();
        assert_eq!(r.sse, 0.0);
        assert_eq!(r.assignment, vec![1, 2, 3, 4]);
    }

    #[test]
    fn two_triplets_match_brute_force() {
        let p = pts(&[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (10.0, 10.0), (10.0, 11.0), (11.0, 10.0)]);
        let (best_sse, side) = brute_force_two(&p);
        let r = kmeans(&p, 2, 7, &KMeansConfig::default()).unwrap();
        assert!(same_partition(&r.assignment, &side));
        assert!((r.sse - best_sse).abs() < 1e-12);
        assert_eq!(r.assignment, vec![1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn duplicated_points_double_sse() {
        let p = pts(&[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (10.0, 10.0), (10.0, 11.0), (11.0, 10.0)]);
        let mut doubled = p.clone();
        doubled.extend(p.iter().cloned());
        let a = kmeans(&p, 2, 3, &KMeansConfig::default()).unwrap();
        let b = kmeans(&doubled, 2, 3, &KMeansConfig::default()).unwrap();
        assert!((b.sse - 2.0 * a.sse).abs() < 1e-9);
        assert_eq!(&b.assignment[..6], &a.assignment[..]);
        assert_eq!(&b.assignment[6..], &a.assignment[..]);
    }

    #[test]
    fn too_many_clusters() {
        let p = pts(&[(0.0, 0.0), (0.0, 0.0), (1.0, 1.0)]);
        assert!(matches!(
            kmeans(&p, 3, 0, &KMeansConfig::default()),
            Err(Error::TooManyClusters { k: 3, distinct: 2 })
        ));
        assert!(kmeans(&pts(&[(f64::NAN, 0.0), (1.0, 1.0)]), 1, 0, &KMeansConfig::default()).is_err());
    }

    #[test]
    fn standardize_small_column() {
        let s = standardize(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(s.data, vec![vec![-1.0], vec![0.0], vec![1.0]]);
        assert_eq!(s.sds, vec![1.0]);
    }

    #[test]
    fn standardize_constant_column() {
        let err = standardize(&[vec![1.0, 5.0], vec![2.0, 5.0]]).unwrap_err();
        assert!(matches!(err, Error::ConstantColumn(ref c) if c == "1"));
    }

    proptest! {
        #[test]
        fn standardize_moments_and_idempotence(cols in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 5..40)) {
            prop_assume!(standardize(&cols).is_ok());
            let s = standardize(&cols).unwrap();
            let n = cols.len() as f64;
            for j in 0..3 {
                let mean = s.data.iter().map(|r| r[j]).sum::<f64>() / n;
                let sd = (s.data.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
                prop_assert!(mean.abs() < 1e-12);
                prop_assert!((sd - 1.0).abs() < 1e-12);
            }
            let again = standardize(&s.data).unwrap();
            for (a, b) in again.data.iter().flatten().zip(s.data.iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn lloyd_sse_never_increases(raw in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 8..60), k in 2usize..6, seed in 0u64..1000) {
            let p = pts(&raw);
            prop_assume!(distinct_count(&p) >= k);
            for run in kmeans_runs(&p, k, seed, &KMeansConfig::default()).unwrap() {
                for w in run.sse_trace.windows(2) {
                    prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
                }
                prop_assert!(run.result.assignment.iter().all(|&a| (1..=k).contains(&a)));
                for c in 1..=k {
                    prop_assert!(run.result.assignment.contains(&c));
                }
            }
        }

        #[test]
        fn permuting_rows_permutes_assignment(raw in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 6..30), seed in 0u64..100) {
            let p = pts(&raw);
            prop_assume!(distinct_count(&p) >= 3);
            let a = kmeans(&p, 3, seed, &KMeansConfig::default()).unwrap();
            let a2 = kmeans(&p, 3, seed, &KMeansConfig::default()).unwrap();
            prop_assert_eq!(&a, &a2);
            let mut rev = p.clone();
            rev.reverse();
            let b = kmeans(&rev, 3, seed, &KMeansConfig::default()).unwrap();
            // Different restarts may land in different local optima; only compare equal-sse solutions.
            if (a.sse - b.sse).abs() < 1e-9 * a.sse.max(1.0) {
                let n = p.len();
                let bb: Vec<usize> = (0..n).map(|i| b.assignment[n - 1 - i]).collect();
                let recomputed: f64 = p.iter().zip(&a.assignment).map(|(x, &c)| sq_dist(x, &a.centers[c - 1])).sum();
                prop_assert!((recomputed - a.sse).abs() < 1e-9 * a.sse.max(1.0));
                let same = (0..n).all(|i| (0..n).all(|j| (a.assignment[i] == a.assignment[j]) == (bb[i] == bb[j])));
                let tie_free = p.iter().all(|x| {
                    let mut d: Vec<f64> = a.centers.iter().map(|c| sq_dist(x, c)).collect();
                    d.sort_by(f64::total_cmp);
                    d[1] - d[0] > 1e-9
                });
                if tie_free {
                    prop_assert!(same);
                }
            }
        }
    }
}
