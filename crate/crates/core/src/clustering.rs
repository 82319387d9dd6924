//! k-means grouping in search space (bid positions) and in objective space
//! (scalar objective values).

use crate::error::{check_dimension, Error, Result};
use crate::population::Bid;
use crate::rng::Draws;

/// Lloyd iteration limits and restart count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iters: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: f64,
    /// Independent seedings; the lowest within-cluster sum of squares wins.
    pub restarts: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-9,
            restarts: 1,
        }
    }
}

impl KMeansOptions {
    pub fn with_restarts(restarts: usize) -> Self {
        Self {
            restarts,
            ..Self::default()
        }
    }
}

/// A hard partition of points into `k` non-empty groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub k: usize,
    pub assignments: Vec<usize>,
    /// `centroids[c]` is the mean of the points assigned to `c`.
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
}

impl Partition {
    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments
            .iter()
            .enumerate()
            .filter(move |(_, c)| **c == cluster)
            .map(|(i, _)| i)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignments {
            sizes[c] += 1;
        }
        sizes
    }
}

/// A partition annotated with the mean objective value of each cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub partition: Partition,
    pub mean_values: Vec<f64>,
}

impl Clustering {
    pub fn new(partition: Partition, values: &[f64]) -> Result<Self> {
        check_dimension(partition.assignments.len(), values.len())?;
        let mut sums = vec![0.0; partition.k];
        let sizes = partition.sizes();
        for (&c, v) in partition.assignments.iter().zip(values) {
            sums[c] += v;
        }
        let mean_values = sums
            .iter()
            .zip(&sizes)
            .map(|(s, &n)| s / n as f64)
            .collect();
        Ok(Self {
            partition,
            mean_values,
        })
    }

    /// Cluster with the lowest mean value; lowest index on ties.
    pub fn best_cluster(&self) -> usize {
        let mut best = 0;
        for (c, v) in self.mean_values.iter().enumerate() {
            if *v < self.mean_values[best] {
                best = c;
            }
        }
        best
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn means(points: &[Vec<f64>], assignments: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignments) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, n) in sums.iter_mut().zip(&counts) {
        if *n > 0 {
            for x in s.iter_mut() {
                *x /= *n as f64;
            }
        }
    }
    sums
}

fn inertia(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &c)| squared_distance(p, &centroids[c]))
        .sum()
}

/// k-means++ seeding: first centre uniform, the rest D²-weighted. When every
/// remaining distance is zero the next centre is drawn uniformly.
fn seed_plus_plus<R: Draws + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.int_inclusive(0, n - 1)].clone());
    let mut dist: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, d) in dist.iter().enumerate() {
                acc += d;
                if *d > 0.0 && acc > target {
                    chosen = i;
                    break;
                }
            }
            // Float round-off can leave `chosen` on a zero-weight tail point.
            if dist[chosen] == 0.0 {
                chosen = dist.iter().rposition(|d| *d > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.int_inclusive(0, n - 1)
        };
        let centre = points[pick].clone();
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &centre));
        }
        centroids.push(centre);
    }
    centroids
}

/// Moves points into empty clusters until every cluster has a member: each
/// empty cluster takes the point farthest from its current centroid among
/// clusters that can spare one (lowest point index on ties).
fn repair_empty(points: &[Vec<f64>], assignments: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &c in assignments.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut donor: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            let c = assignments[i];
            if sizes[c] < 2 {
                continue;
            }
            let d = squared_distance(p, &centroids[c]);
            if donor.is_none_or(|(_, best)| d > best) {
                donor = Some((i, d));
            }
        }
        let (i, _) = donor.expect("k <= n guarantees a donor cluster");
        assignments[i] = empty;
        centroids[empty] = points[i].clone();
    }
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    points.iter().map(|p| nearest(p, centroids).0).collect()
}

fn validate(points: &[Vec<f64>], k: usize) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Parameter("k-means needs at least one point".into()));
    }
    if k == 0 || k > points.len() {
        return Err(Error::Parameter(format!(
            "k must lie in [1, {}], got {k}",
            points.len()
        )));
    }
    let dim = points[0].len();
    if dim == 0 {
        return Err(Error::Parameter(
            "points must have at least one coordinate".into(),
        ));
    }
    for p in points {
        check_dimension(dim, p.len())?;
    }
    Ok(())
}

fn lloyd<R: Draws + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    opts: &KMeansOptions,
    rng: &mut R,
    history: &mut Vec<f64>,
) -> Partition {
    let mut centroids = seed_plus_plus(points, k, rng);
    let mut assignments = assign(points, &centroids);
    repair_empty(points, &mut assignments, &mut centroids);
    centroids = means(points, &assignments, k);
    history.push(inertia(points, &assignments, &centroids));

    for _ in 0..opts.max_iters {
        let mut next = assign(points, &centroids);
        let mut seeds = centroids.clone();
        repair_empty(points, &mut next, &mut seeds);
        let next_centroids = means(points, &next, k);
        let shift = centroids
            .iter()
            .zip(&next_centroids)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        let stable = next == assignments;
        assignments = next;
        centroids = next_centroids;
        history.push(inertia(points, &assignments, &centroids));
        if stable || shift < opts.tol {
            break;
        }
    }

    Partition {
        k,
        inertia: inertia(points, &assignments, &centroids),
        assignments,
        centroids,
    }
}

/// Lloyd's k-means from k-means++ seeding, best of `opts.restarts`.
pub fn kmeans<R: Draws + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    opts: &KMeansOptions,
    rng: &mut R,
) -> Result<Partition> {
    kmeans_with_history(points, k, opts, rng).map(|(p, _)| p)
}

/// Like [`kmeans`], also returning the within-cluster sum of squares after
/// seeding and after every Lloyd iteration of the winning restart.
pub fn kmeans_with_history<R: Draws + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    opts: &KMeansOptions,
    rng: &mut R,
) -> Result<(Partition, Vec<f64>)> {
    validate(points, k)?;
    let mut best: Option<(Partition, Vec<f64>)> = None;
    for _ in 0..opts.restarts.max(1) {
        let mut history = Vec::new();
        let candidate = lloyd(points, k, opts, rng, &mut history);
        if best
            .as_ref()
            .is_none_or(|(b, _)| candidate.inertia < b.inertia)
        {
            best = Some((candidate, history));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// The winner of search-space grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct Winner {
    pub cluster: usize,
    /// Index of `bid` within the population.
    pub bid_index: usize,
    pub bid: Bid,
    pub clustering: Clustering,
}

fn require_evaluated(bids: &[Bid]) -> Result<()> {
    if bids.iter().all(|b| b.evaluated) {
        Ok(())
    } else {
        Err(Error::Parameter(
            "grouping requires a fully evaluated population".into(),
        ))
    }
}

/// Clusters bid positions, picks the cluster with the lowest mean value and
/// returns its best bid `W` (lowest bid index on ties).
pub fn winner_cluster_search_space<R: Draws + ?Sized>(
    bids: &[Bid],
    k: usize,
    opts: &KMeansOptions,
    rng: &mut R,
) -> Result<Winner> {
    require_evaluated(bids)?;
    let points: Vec<Vec<f64>> = bids.iter().map(|b| b.position.clone()).collect();
    let values: Vec<f64> = bids.iter().map(|b| b.value).collect();
    let clustering = Clustering::new(kmeans(&points, k, opts, rng)?, &values)?;
    let cluster = clustering.best_cluster();
    let bid_index = clustering
        .partition
        .members(cluster)
        .reduce(|a, b| if values[b] < values[a] { b } else { a })
        .expect("clusters are non-empty");
    Ok(Winner {
        cluster,
        bid_index,
        bid: bids[bid_index].clone(),
        clustering,
    })
}

/// Clusters the scalar objective values and returns the mean position of
/// the members of the lowest-mean cluster.
pub fn best_objective_centroid<R: Draws + ?Sized>(
    bids: &[Bid],
    k: usize,
    opts: &KMeansOptions,
    rng: &mut R,
) -> Result<Vec<f64>> {
    require_evaluated(bids)?;
    let values: Vec<f64> = bids.iter().map(|b| b.value).collect();
    let points: Vec<Vec<f64>> = values.iter().map(|v| vec![*v]).collect();
    let clustering = Clustering::new(kmeans(&points, k, opts, rng)?, &values)?;
    let cluster = clustering.best_cluster();
    let dim = bids[0].dimension();
    let mut centroid = vec![0.0; dim];
    let mut count = 0usize;
    for i in clustering.partition.members(cluster) {
        count += 1;
        for (c, x) in centroid.iter_mut().zip(&bids[i].position) {
            *c += x;
        }
    }
    for c in &mut centroid {
        *c /= count as f64;
    }
    Ok(centroid)
}
