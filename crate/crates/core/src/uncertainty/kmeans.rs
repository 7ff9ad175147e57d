use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_x, Result, UncertaintyError};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            restarts: 10,
            max_iter: 300,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Centroid with the lowest mean coordinate.
    pub certain_centroid: usize,
    /// Within-cluster sum of squared distances.
    pub sse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeakLabel {
    Certain,
    Uncertain,
}

impl WeakLabel {
    pub fn as_u8(self) -> u8 {
        match self {
            WeakLabel::Certain => 0,
            WeakLabel::Uncertain => 1,
        }
    }

    pub fn from_u8(v: u8) -> Self {
        if v == 0 {
            WeakLabel::Certain
        } else {
            WeakLabel::Uncertain
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Index of the nearest centroid, ties to the lower index.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, &w) in d.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            rng.random_range(0..points.len())
        };
        centroids.push(points[next].clone());
        for (di, p) in d.iter_mut().zip(points) {
            *di = di.min(dist2(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, opts: &KMeansOptions) -> (Vec<Vec<f64>>, Vec<usize>) {
    let k = centroids.len();
    let dim = points[0].len();
    let mut assign = vec![0; points.len()];
    for _ in 0..opts.max_iter {
        for (a, p) in assign.iter_mut().zip(points) {
            *a = nearest(p, &centroids).0;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assign.iter().zip(points) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut next: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&counts)
            .map(|(s, &c)| s.into_iter().map(|v| v / c.max(1) as f64).collect())
            .collect();
        for j in 0..k {
            if counts[j] == 0 {
                // Reseed at the point farthest from its current centroid.
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        dist2(&points[a], &next[assign[a]])
                            .total_cmp(&dist2(&points[b], &next[assign[b]]))
                            .then(b.cmp(&a))
                    })
                    .unwrap();
                next[j] = points[far].clone();
                assign[far] = j;
            }
        }
        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| dist2(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        if shift < opts.tol {
            break;
        }
    }
    for (a, p) in assign.iter_mut().zip(points) {
        *a = nearest(p, &centroids).0;
    }
    (centroids, assign)
}

/// Hartigan single-point transfers: move a point whenever that strictly
/// lowers the SSE, accounting for both centroids shifting. Escapes Lloyd
/// fixed points that are not local optima under single moves.
fn hartigan(points: &[Vec<f64>], centroids: &mut [Vec<f64>], assign: &mut [usize]) -> bool {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for &a in assign.iter() {
        counts[a] += 1;
    }
    let mut moved_any = false;
    loop {
        let mut moved = false;
        for (i, p) in points.iter().enumerate() {
            let from = assign[i];
            let nf = counts[from] as f64;
            if counts[from] < 2 {
                continue;
            }
            let removal = nf / (nf - 1.0) * dist2(p, &centroids[from]);
            let mut best: Option<(usize, f64)> = None;
            for to in (0..k).filter(|&t| t != from) {
                let nt = counts[to] as f64;
                let cost = nt / (nt + 1.0) * dist2(p, &centroids[to]);
                if cost < removal * (1.0 - 1e-12) && best.map_or(true, |b| cost < b.1) {
                    best = Some((to, cost));
                }
            }
            if let Some((to, _)) = best {
                let (nf, nt) = (counts[from] as f64, counts[to] as f64);
                for d in 0..p.len() {
                    centroids[from][d] = (centroids[from][d] * nf - p[d]) / (nf - 1.0);
                    centroids[to][d] = (centroids[to][d] * nt + p[d]) / (nt + 1.0);
                }
                counts[from] -= 1;
                counts[to] += 1;
                assign[i] = to;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            return moved_any;
        }
    }
}

/// K-means with k-means++ seeding and seeded restarts, keeping the run with
/// the lowest SSE.
pub fn kmeans_pp(points: &[Vec<f64>], k: usize, seed: u64, opts: &KMeansOptions) -> Result<KMeansResult> {
    if points.is_empty() || k == 0 {
        return Err(UncertaintyError::EmptyInput);
    }
    check_x(points, None)?;
    let distinct = points
        .iter()
        .map(|p| p.iter().map(|v| v.to_bits()).collect::<Vec<_>>())
        .collect::<HashSet<_>>()
        .len();
    if distinct < k {
        return Err(UncertaintyError::DegenerateInput { k, distinct });
    }
    let mut best: Option<(Vec<Vec<f64>>, Vec<usize>, f64)> = None;
    for r in 0..opts.restarts.max(1) {
        let mut rng = seed::sub_rng(seed, r as u64);
        let init = seed_centroids(points, k, &mut rng);
        let (mut c, mut a) = lloyd(points, init, opts);
        while hartigan(points, &mut c, &mut a) {
            (c, a) = lloyd(points, c, opts);
        }
        let sse: f64 = points.iter().zip(&a).map(|(p, &j)| dist2(p, &c[j])).sum();
        if best.as_ref().map_or(true, |b| sse < b.2) {
            best = Some((c, a, sse));
        }
    }
    let (centroids, assignments, sse) = best.unwrap();
    let mean = |c: &Vec<f64>| c.iter().sum::<f64>() / c.len().max(1) as f64;
    let certain_centroid = (0..k)
        .min_by(|&a, &b| mean(&centroids[a]).total_cmp(&mean(&centroids[b])))
        .unwrap();
    Ok(KMeansResult {
        centroids,
        assignments,
        certain_centroid,
        sse,
    })
}

/// Certain for scenes in the lower-mean cluster, uncertain otherwise.
pub fn weak_labels(result: &KMeansResult, scene_ids: &[String]) -> Result<BTreeMap<String, WeakLabel>> {
    if scene_ids.len() != result.assignments.len() {
        return Err(UncertaintyError::ArityMismatch {
            what: "scene ids",
            expected: result.assignments.len(),
            found: scene_ids.len(),
        });
    }
    Ok(scene_ids
        .iter()
        .zip(&result.assignments)
        .map(|(id, &a)| {
            let label = if a == result.certain_centroid {
                WeakLabel::Certain
            } else {
                WeakLabel::Uncertain
            };
            (id.clone(), label)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    /// Lowest 2-cluster SSE over every bipartition.
    fn brute_force_sse(points: &[Vec<f64>]) -> f64 {
        let n = points.len();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let mut sse = 0.0;
            for side in [true, false] {
                let members: Vec<&Vec<f64>> = (0..n)
                    .filter(|&i| ((mask >> i) & 1 == 1) == side)
                    .map(|i| &points[i])
                    .collect();
                let dim = points[0].len();
                let c: Vec<f64> = (0..dim)
                    .map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64)
                    .collect();
                sse += members.iter().map(|p| dist2(p, &c)).sum::<f64>();
            }
            best = best.min(sse);
        }
        best
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn two_groups() {
        let pts = vec![vec![0.0, 0.0], vec![9.0, 9.0], vec![0.1, 0.0], vec![9.1, 9.0]];
        let r = kmeans_pp(&pts, 2, 3, &KMeansOptions::default()).unwrap();
        assert_eq!(r.assignments[0], r.assignments[2]);
        assert_eq!(r.assignments[1], r.assignments[3]);
        assert_ne!(r.assignments[0], r.assignments[1]);
        let c = &r.centroids[r.certain_centroid];
        assert!((c[0] - 0.05).abs() < 1e-12 && c[1].abs() < 1e-12);
        assert!((r.sse - brute_force_sse(&pts)).abs() < 1e-12);
        let labels = weak_labels(&r, &ids(4)).unwrap();
        assert_eq!(labels["s0"], WeakLabel::Certain);
        assert_eq!(labels["s1"], WeakLabel::Uncertain);
    }

    #[test]
    fn degenerate_and_single_cluster() {
        let same = vec![vec![1.0, 2.0]; 5];
        assert!(matches!(
            kmeans_pp(&same, 2, 0, &KMeansOptions::default()),
            Err(UncertaintyError::DegenerateInput { k: 2, distinct: 1 })
        ));
        let pts = vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 8.0]];
        let r = kmeans_pp(&pts, 1, 0, &KMeansOptions::default()).unwrap();
        assert_eq!(r.centroids, vec![vec![2.0, 4.0]]);
    }

    #[test]
    fn relabeling_centroids_keeps_labels() {
        let pts = vec![vec![0.0], vec![0.2], vec![5.0], vec![5.5], vec![0.1]];
        let r = kmeans_pp(&pts, 2, 1, &KMeansOptions::default()).unwrap();
        let swapped = KMeansResult {
            centroids: vec![r.centroids[1].clone(), r.centroids[0].clone()],
            assignments: r.assignments.iter().map(|&a| 1 - a).collect(),
            certain_centroid: 1 - r.certain_centroid,
            sse: r.sse,
        };
        assert_eq!(weak_labels(&r, &ids(5)).unwrap(), weak_labels(&swapped, &ids(5)).unwrap());
    }

    #[test]
    fn reaches_global_optimum_on_small_instances() {
        let mut rng = seed::rng(5);
        let mut hits = 0;
        for inst in 0..200 {
            let n = rng.random_range(3..=10);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..2).map(|_| rng.random_range(0.0..4.0)).collect())
                .collect();
            let r = kmeans_pp(&pts, 2, inst, &KMeansOptions::default()).unwrap();
            let opt = brute_force_sse(&pts);
            assert!(r.sse >= opt - 1e-9);
            if r.sse <= opt + 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 190, "{hits}/200");
    }

    proptest! {
        #[test]
        fn assignments_are_nearest(pts in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 3), 3..30), seed in any::<u64>()) {
            if let Ok(r) = kmeans_pp(&pts, 2, seed, &KMeansOptions::default()) {
                for (p, &a) in pts.iter().zip(&r.assignments) {
                    prop_assert_eq!(a, nearest(p, &r.centroids).0);
                }
                let again = kmeans_pp(&pts, 2, seed, &KMeansOptions::default()).unwrap();
                prop_assert_eq!(r, again);
            }
        }
    }
}
