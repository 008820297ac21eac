use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::corpus::Gender;
use crate::error::{Error, Result};
use crate::linalg::pca;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansParams {
    pub k: usize,
    pub max_iter: usize,
    pub restarts: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            k: 2,
            max_iter: 300,
            restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
    pub iterations: usize,
    /// Whether an empty cluster had to be refilled in the winning run.
    pub repaired: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(v: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(v, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus<R: Rng + ?Sized>(vectors: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(vectors[rng.random_range(0..n)].clone());
    let mut dist: Vec<f64> = vectors.iter().map(|v| sq_dist(v, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d) in dist.iter().enumerate() {
                if *d > 0.0 && target < *d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = vectors[pick].clone();
        for (d, v) in dist.iter_mut().zip(vectors) {
            *d = d.min(sq_dist(v, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(vectors: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iter: usize) -> KMeansResult {
    let k = centroids.len();
    let d = vectors[0].len();
    let mut assignments: Vec<usize> = vec![usize::MAX; vectors.len()];
    let mut repaired = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut next: Vec<usize> = vectors.iter().map(|v| nearest(v, &centroids).0).collect();
        let mut sizes = vec![0usize; k];
        for &a in &next {
            sizes[a] += 1;
        }
        for empty in 0..k {
            if sizes[empty] > 0 {
                continue;
            }
            // move the point farthest from its centroid into the empty cluster
            let far = (0..vectors.len())
                .filter(|&i| sizes[next[i]] > 1)
                .max_by(|&i, &j| {
                    sq_dist(&vectors[i], &centroids[next[i]])
                        .total_cmp(&sq_dist(&vectors[j], &centroids[next[j]]))
                        .then(j.cmp(&i))
                });
            if let Some(i) = far {
                sizes[next[i]] -= 1;
                next[i] = empty;
                sizes[empty] = 1;
                repaired = true;
            }
        }
        let changed = next != assignments;
        assignments = next;
        let mut sums = vec![vec![0.0; d]; k];
        for (v, &a) in vectors.iter().zip(&assignments) {
            for (s, x) in sums[a].iter_mut().zip(v) {
                *s += x;
            }
        }
        for (c, (sum, &size)) in sums.into_iter().zip(&sizes).enumerate() {
            if size > 0 {
                centroids[c] = sum.into_iter().map(|s| s / size as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }
    let wcss = vectors
        .iter()
        .zip(&assignments)
        .map(|(v, &a)| sq_dist(v, &centroids[a]))
        .sum();
    KMeansResult {
        assignments,
        centroids,
        wcss,
        iterations,
        repaired,
    }
}

/// Lloyd's algorithm with k-means++ seeding; the lowest-WCSS restart wins.
pub fn kmeans<R: Rng + ?Sized>(vectors: &[Vec<f64>], params: KMeansParams, rng: &mut R) -> Result<KMeansResult> {
    if params.k == 0 || params.restarts == 0 || params.max_iter == 0 {
        return Err(Error::InvalidParameter("k, restarts and max_iter must be positive".into()));
    }
    if vectors.len() <= params.k {
        return Err(Error::InsufficientData(alloc::format!(
            "k-means with k = {} needs more than {} points",
            params.k,
            params.k
        )));
    }
    let d = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.len(),
        });
    }
    let mut best: Option<KMeansResult> = None;
    for _ in 0..params.restarts {
        let seeds = plus_plus(vectors, params.k, rng);
        let run = lloyd(vectors, seeds, params.max_iter);
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Agreement between two clusters and two labels, maximized over both
/// cluster-to-label bijections.
pub fn cluster_accuracy(assignments: &[usize], labels: &[Gender]) -> Result<f64> {
    if assignments.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: assignments.len(),
        });
    }
    if assignments.is_empty() {
        return Err(Error::Empty);
    }
    let clusters: BTreeSet<usize> = assignments.iter().copied().collect();
    if clusters.len() > 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "{} distinct clusters, expected at most 2",
            clusters.len()
        )));
    }
    let first = *clusters.iter().next().expect("nonempty");
    let agree = assignments
        .iter()
        .zip(labels)
        .filter(|(&a, &l)| (a == first) == (l == Gender::Female))
        .count();
    let n = assignments.len();
    Ok(agree.max(n - agree) as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringOutcome {
    pub assignments: Vec<usize>,
    pub accuracy: f64,
    /// 2-D PCA coordinates of each input vector, for plotting.
    pub projection_2d: Vec<[f64; 2]>,
    pub wcss: f64,
}

/// Two-means clustering of labelled word vectors, scored against the labels.
pub fn cluster_words<R: Rng + ?Sized>(
    vectors: &[Vec<f64>],
    labels: &[Gender],
    params: KMeansParams,
    rng: &mut R,
) -> Result<ClusteringOutcome> {
    if vectors.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: vectors.len(),
        });
    }
    let km = kmeans(vectors, params, rng)?;
    let accuracy = cluster_accuracy(&km.assignments, labels)?;
    let dims = 2.min(vectors[0].len()).min(vectors.len());
    let projection_2d = match pca(vectors, dims) {
        Ok(p) => vectors
            .iter()
            .map(|v| {
                let c = p.project(v);
                [c[0], c.get(1).copied().unwrap_or(0.0)]
            })
            .collect(),
        Err(_) => vec![[0.0, 0.0]; vectors.len()],
    };
    Ok(ClusteringOutcome {
        assignments: km.assignments,
        accuracy,
        projection_2d,
        wcss: km.wcss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use Gender::{Female as F, Male as M};

    #[test]
    fn accuracy_examples() {
        assert_eq!(cluster_accuracy(&[0, 0, 1, 1], &[F, F, M, M]).unwrap(), 1.0);
        assert_eq!(cluster_accuracy(&[1, 1, 0, 0], &[F, F, M, M]).unwrap(), 1.0);
        // both bijections give 2/4
        assert_eq!(cluster_accuracy(&[0, 1, 0, 1], &[F, F, M, M]).unwrap(), 0.5);
        assert!(cluster_accuracy(&[0, 1, 2, 1], &[F, F, M, M]).is_err());
        assert!(cluster_accuracy(&[0, 1], &[F]).is_err());
    }

    #[test]
    fn separable_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut vectors = Vec::new();
        let mut labels = Vec::new();
        for i in 0..100 {
            let cx = if i < 50 { 10.0 } else { -10.0 };
            let r = 0.1 * rng.random::<f64>();
            let t = core::f64::consts::TAU * rng.random::<f64>();
            vectors.push(vec![cx + r * libm::cos(t), r * libm::sin(t)]);
            labels.push(if i < 50 { F } else { M });
        }
        let out = cluster_words(&vectors, &labels, KMeansParams::default(), &mut rng).unwrap();
        assert_eq!(out.accuracy, 1.0);
        assert_eq!(out.projection_2d.len(), 100);
    }

    #[test]
    fn identical_points_terminate_with_repair() {
        let vectors = vec![vec![1.0, 1.0]; 6];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = kmeans(&vectors, KMeansParams::default(), &mut rng).unwrap();
        assert!(r.repaired);
        assert_eq!(r.wcss, 0.0);
        assert!(r.iterations < 300);
        let used: BTreeSet<usize> = r.assignments.iter().copied().collect();
        assert_eq!(used.len(), 2);
    }

    #[test]
    fn wcss_beats_random_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vectors: Vec<Vec<f64>> = (0..30)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let r = kmeans(&vectors, KMeansParams::default(), &mut rng).unwrap();
        for _ in 0..1000 {
            let assign: Vec<usize> = (0..30).map(|_| rng.random_range(0..2)).collect();
            let mut wcss = 0.0;
            for c in 0..2 {
                let members: Vec<&Vec<f64>> =
                    vectors.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(v, _)| v).collect();
                if members.is_empty() {
                    continue;
                }
                let m = members.len() as f64;
                let cx = members.iter().map(|v| v[0]).sum::<f64>() / m;
                let cy = members.iter().map(|v| v[1]).sum::<f64>() / m;
                wcss += members.iter().map(|v| (v[0] - cx) * (v[0] - cx) + (v[1] - cy) * (v[1] - cy)).sum::<f64>();
            }
            assert!(r.wcss <= wcss + 1e-12);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vectors: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random(), rng.random(), rng.random()]).collect();
        let a = kmeans(&vectors, KMeansParams::default(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = kmeans(&vectors, KMeansParams::default(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(kmeans(&[vec![1.0], vec![2.0]], KMeansParams::default(), &mut rng).is_err());
    }
}
