//! X-means clustering of per-node mass vectors.
//!
//! Lloyd k-means with k-means++ seeding, wrapped in the bisecting X-means
//! search: every cluster is trial-split in two and the split is kept when the
//! Bayesian Information Criterion of the region improves. The BIC uses the
//! identical spherical Gaussian model with one shared maximum-likelihood
//! variance, so the free parameter count is `k·(d+1)`.
//!
//! Everything here is deterministic for a fixed seed: ties in nearest-center
//! assignment go to the lowest cluster index and all reductions run in point
//! order.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Floor for the shared variance in the BIC likelihood.
pub const EPS_VAR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("no points to cluster")]
    EmptyInput,
    #[error("cannot form {k} clusters from {n} points")]
    TooFewPoints { k: usize, n: usize },
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("invalid clustering configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("at least one center is required")]
    NoCenters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XMeansConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub max_iterations: usize,
    /// Lloyd stops once no center moves farther than this (L²).
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for XMeansConfig {
    fn default() -> Self {
        XMeansConfig { k_min: 1, k_max: 25, max_iterations: 100, tolerance: 1e-6, seed: 0 }
    }
}

impl XMeansConfig {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.k_min == 0 {
            return Err(ClusterError::InvalidConfig("k_min must be at least 1"));
        }
        if self.k_min > self.k_max {
            return Err(ClusterError::InvalidConfig("k_min exceeds k_max"));
        }
        if !(self.tolerance > 0.0) {
            return Err(ClusterError::InvalidConfig("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(ClusterError::InvalidConfig("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centers: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    /// Within-cluster sum of squared L² distances.
    pub wcss: f64,
    pub iterations: usize,
    /// WCSS after every assignment step, ending with the final value.
    pub wcss_trace: Vec<f64>,
}

/// Cluster centers with their proportions.
///
/// `assignment` maps each clustered point to its center; it is not part of the
/// exported model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub centers: Vec<Vec<f64>>,
    pub proportions: Vec<f64>,
    #[serde(skip)]
    pub assignment: Vec<usize>,
}

impl ClusterSet {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centers.first().map_or(0, Vec::len)
    }

    /// Single cluster at `center` holding everything.
    pub fn single(center: Vec<f64>) -> Self {
        ClusterSet { centers: vec![center], proportions: vec![1.0], assignment: Vec::new() }
    }

    pub fn is_valid(&self) -> bool {
        let d = self.dim();
        !self.centers.is_empty()
            && self.centers.len() == self.proportions.len()
            && self.proportions.iter().all(|&r| r > 0.0)
            && (self.proportions.iter().sum::<f64>() - 1.0).abs() <= 1e-9
            && self.centers.iter().all(|c| {
                c.len() == d && c.iter().all(|&m| m >= 0.0) && (c.iter().sum::<f64>() - 1.0).abs() <= 1e-9
            })
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign_all<P: AsRef<[f64]>>(points: &[P], centers: &[Vec<f64>], assignment: &mut [usize]) -> f64 {
    let mut wcss = 0.0;
    for (slot, p) in assignment.iter_mut().zip(points) {
        let (j, d) = nearest(p.as_ref(), centers);
        *slot = j;
        wcss += d;
    }
    wcss
}

fn check_dims<P: AsRef<[f64]>>(points: &[P]) -> Result<usize, ClusterError> {
    let d = points.first().ok_or(ClusterError::EmptyInput)?.as_ref().len();
    for (index, p) in points.iter().enumerate() {
        let found = p.as_ref().len();
        if found != d {
            return Err(ClusterError::DimensionMismatch { index, expected: d, found });
        }
    }
    Ok(d)
}

/// k-means++ seeding: first center uniform, then D²-weighted draws.
pub fn kmeans_plus_plus<P: AsRef<[f64]>, R: Rng>(points: &[P], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    if n == 0 || k == 0 {
        return Vec::new();
    }
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..n)].as_ref().to_vec());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p.as_ref(), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].as_ref().to_vec();
        for (slot, p) in d2.iter_mut().zip(points) {
            let d = sq_dist(p.as_ref(), &c);
            if d < *slot {
                *slot = d;
            }
        }
        centers.push(c);
    }
    centers
}

/// Lloyd refinement from the given seeds.
///
/// A cluster that goes empty is moved once to the point farthest from its
/// current center; if it is empty again it is dropped. The returned centers
/// all own at least one point.
pub fn kmeans<P: AsRef<[f64]>>(
    points: &[P],
    k: usize,
    seeds: &[Vec<f64>],
    config: &XMeansConfig,
) -> Result<KMeansResult, ClusterError> {
    let d = check_dims(points)?;
    if k == 0 || seeds.len() != k {
        return Err(ClusterError::NoCenters);
    }
    if k > points.len() {
        return Err(ClusterError::TooFewPoints { k, n: points.len() });
    }
    for s in seeds {
        if s.len() != d {
            return Err(ClusterError::DimensionMismatch { index: 0, expected: d, found: s.len() });
        }
    }
    Ok(lloyd(points, seeds.to_vec(), config.max_iterations, config.tolerance))
}

fn lloyd<P: AsRef<[f64]>>(points: &[P], mut centers: Vec<Vec<f64>>, max_iterations: usize, tolerance: f64) -> KMeansResult {
    let n = points.len();
    let d = centers[0].len();
    let mut assignment = vec![0usize; n];
    let mut reseeded = vec![false; centers.len()];
    let mut wcss = assign_all(points, &centers, &mut assignment);
    let mut trace = vec![wcss];
    let mut iterations = 0;

    while iterations < max_iterations {
        iterations += 1;
        let k = centers.len();
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &j) in points.iter().zip(&assignment) {
            counts[j] += 1;
            for (s, x) in sums[j].iter_mut().zip(p.as_ref()) {
                *s += x;
            }
        }

        let mut taken: Vec<usize> = Vec::new();
        let mut keep = vec![true; k];
        let mut movement: f64 = 0.0;
        for j in 0..k {
            let next = if counts[j] > 0 {
                let inv = 1.0 / counts[j] as f64;
                sums[j].iter().map(|s| s * inv).collect::<Vec<_>>()
            } else if !reseeded[j] {
                reseeded[j] = true;
                match farthest_point(points, &centers, &assignment, &taken) {
                    Some(i) => {
                        taken.push(i);
                        points[i].as_ref().to_vec()
                    }
                    None => {
                        keep[j] = false;
                        continue;
                    }
                }
            } else {
                keep[j] = false;
                continue;
            };
            movement = movement.max(libm::sqrt(sq_dist(&next, &centers[j])));
            centers[j] = next;
        }
        if keep.iter().any(|k| !k) {
            let mut j = 0;
            centers.retain(|_| {
                j += 1;
                keep[j - 1]
            });
            let mut j = 0;
            reseeded.retain(|_| {
                j += 1;
                keep[j - 1]
            });
        }

        wcss = assign_all(points, &centers, &mut assignment);
        trace.push(wcss);
        if movement < tolerance {
            break;
        }
    }

    // Drop clusters left empty by the last assignment.
    let mut counts = vec![0usize; centers.len()];
    for &j in &assignment {
        counts[j] += 1;
    }
    if counts.contains(&0) {
        let mut remap = vec![usize::MAX; centers.len()];
        let mut next = 0;
        for (j, &c) in counts.iter().enumerate() {
            if c > 0 {
                remap[j] = next;
                next += 1;
            }
        }
        let mut j = 0;
        centers.retain(|_| {
            j += 1;
            counts[j - 1] > 0
        });
        for a in assignment.iter_mut() {
            *a = remap[*a];
        }
    }

    KMeansResult { centers, assignment, wcss, iterations, wcss_trace: trace }
}

/// Point with the largest distance to its assigned center, excluding `taken`.
fn farthest_point<P: AsRef<[f64]>>(
    points: &[P],
    centers: &[Vec<f64>],
    assignment: &[usize],
    taken: &[usize],
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (p, &j)) in points.iter().zip(assignment).enumerate() {
        if taken.contains(&i) {
            continue;
        }
        let d = sq_dist(p.as_ref(), &centers[j]);
        if best.is_none_or(|(_, bd)| d > bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// BIC of a hard clustering under the identical spherical Gaussian model.
///
/// `ll = Σ_j n_j ln(n_j/n) − (n·d/2)·ln(2πσ²) − WCSS/(2σ²)` with
/// `σ² = max(WCSS/(n·d), EPS_VAR)`, penalized by `(k(d+1)/2)·ln n`.
/// Higher is better. Returns `-∞` when there are fewer points than centers.
pub fn bic_score<P: AsRef<[f64]>>(points: &[P], centers: &[Vec<f64>], assignment: &[usize]) -> f64 {
    let n = points.len();
    let k = centers.len();
    if n == 0 || k == 0 || n < k {
        return f64::NEG_INFINITY;
    }
    let d = centers[0].len().max(1);
    let mut counts = vec![0usize; k];
    let mut wcss = 0.0;
    for (p, &j) in points.iter().zip(assignment) {
        counts[j] += 1;
        wcss += sq_dist(p.as_ref(), &centers[j]);
    }
    let (nf, df) = (n as f64, d as f64);
    let variance = (wcss / (nf * df)).max(EPS_VAR);
    let mixing: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let c = c as f64;
            c * libm::log(c / nf)
        })
        .sum();
    let ll = mixing - 0.5 * nf * df * libm::log(2.0 * PI * variance) - wcss / (2.0 * variance);
    let params = (k * (d + 1)) as f64;
    ll - 0.5 * params * libm::log(nf)
}

/// Nearest-center assignment (lowest index on ties) and the empirical
/// fraction of points per center.
pub fn assign_proportions<P: AsRef<[f64]>>(points: &[P], centers: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    let mut assignment = vec![0usize; points.len()];
    let mut rho = vec![0.0; centers.len()];
    if centers.is_empty() {
        return (assignment, rho);
    }
    assign_all(points, centers, &mut assignment);
    let mut counts = vec![0usize; centers.len()];
    for &j in &assignment {
        counts[j] += 1;
    }
    if !points.is_empty() {
        for (r, c) in rho.iter_mut().zip(&counts) {
            *r = *c as f64 / points.len() as f64;
        }
    }
    (assignment, rho)
}

/// Clips negative masses and rescales to unit sum (uniform if nothing is left).
pub fn renormalize(center: &mut [f64]) {
    for m in center.iter_mut() {
        if !(*m > 0.0) {
            *m = 0.0;
        }
    }
    let total: f64 = center.iter().sum();
    if total > 0.0 {
        for m in center.iter_mut() {
            *m /= total;
        }
    } else if !center.is_empty() {
        let u = 1.0 / center.len() as f64;
        center.iter_mut().for_each(|m| *m = u);
    }
}

/// X-means: grow from `k_min` clusters by BIC-approved bisection up to `k_max`.
pub fn xmeans<P: AsRef<[f64]>>(points: &[P], config: &XMeansConfig) -> Result<ClusterSet, ClusterError> {
    config.validate()?;
    check_dims(points)?;
    let n = points.len();
    if n < config.k_min {
        return Err(ClusterError::TooFewPoints { k: config.k_min, n });
    }
    let pts: Vec<&[f64]> = points.iter().map(AsRef::as_ref).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let k_cap = config.k_max.min(n);

    let seeds = kmeans_plus_plus(&pts, config.k_min, &mut rng);
    let mut current = lloyd(&pts, seeds, config.max_iterations, config.tolerance);

    loop {
        let k = current.centers.len();
        if k >= k_cap {
            break;
        }
        let mut regions: Vec<Vec<&[f64]>> = vec![Vec::new(); k];
        for (p, &j) in pts.iter().zip(&current.assignment) {
            regions[j].push(p);
        }

        // (gain, cluster, children)
        let mut splits: Vec<(f64, usize, Vec<Vec<f64>>)> = Vec::new();
        for (j, region) in regions.iter().enumerate() {
            if region.len() < 2 {
                continue;
            }
            let parent = bic_score(region, &current.centers[j..=j], &vec![0; region.len()]);
            let seeds = kmeans_plus_plus(region, 2, &mut rng);
            let child = lloyd(region, seeds, config.max_iterations, config.tolerance);
            if child.centers.len() < 2 {
                continue;
            }
            let split = bic_score(region, &child.centers, &child.assignment);
            if split > parent {
                splits.push((split - parent, j, child.centers));
            }
        }
        if splits.is_empty() {
            break;
        }
        splits.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        splits.truncate(k_cap - k);

        let mut centers = Vec::with_capacity(k + splits.len());
        for (j, c) in current.centers.iter().enumerate() {
            match splits.iter_mut().find(|s| s.1 == j) {
                Some(s) => centers.append(&mut s.2),
                None => centers.push(c.clone()),
            }
        }
        let next = lloyd(&pts, centers, config.max_iterations, config.tolerance);
        let grew = next.centers.len() > k;
        current = next;
        if !grew {
            break;
        }
    }

    let mut centers = current.centers;
    for c in centers.iter_mut() {
        renormalize(c);
    }
    let (assignment, rho) = assign_proportions(&pts, &centers);
    Ok(compact(centers, assignment, rho))
}

/// Removes zero-proportion centers and remaps the assignment.
fn compact(centers: Vec<Vec<f64>>, assignment: Vec<usize>, rho: Vec<f64>) -> ClusterSet {
    let mut remap = vec![usize::MAX; centers.len()];
    let mut kept_centers = Vec::new();
    let mut kept_rho = Vec::new();
    for (j, (c, r)) in centers.into_iter().zip(rho).enumerate() {
        if r > 0.0 {
            remap[j] = kept_centers.len();
            kept_centers.push(c);
            kept_rho.push(r);
        }
    }
    let assignment = assignment.into_iter().map(|a| remap[a]).collect();
    ClusterSet { centers: kept_centers, proportions: kept_rho, assignment }
}
