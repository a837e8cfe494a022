//! Density-based clustering over mutual reachability distances.
//!
//! The full pipeline: core distances, mutual reachability, a minimum
//! spanning tree, the single-linkage hierarchy, the condensed tree pruned by
//! `min_cluster_size`, and cluster selection by excess-of-mass stability.
//! Points outside every selected cluster are labeled `-1`.
//!
//! Results are invariant to input order (up to label renumbering) whenever
//! pairwise mutual reachability distances are distinct; exactly tied
//! distances make the spanning tree non-unique, as in any single-linkage
//! method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Clustering parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HdbscanParams {
    /// Smallest subtree that counts as a cluster in the condensed tree.
    pub min_cluster_size: usize,
    /// Neighbor rank used for core distances.
    pub min_samples: usize,
}

impl HdbscanParams {
    /// Default `min_samples` is `min_cluster_size - 1`.
    pub fn new(min_cluster_size: usize) -> Self {
        HdbscanParams {
            min_cluster_size,
            min_samples: min_cluster_size.saturating_sub(1).max(1),
        }
    }

    pub fn with_min_samples(mut self, min_samples: usize) -> Self {
        self.min_samples = min_samples;
        self
    }
}

/// Per-document cluster assignments; `-1` marks noise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    labels: Vec<i64>,
    n_clusters: usize,
}

impl ClusterLabels {
    /// Builds labels from raw assignments, validating that non-noise labels
    /// are contiguous from zero with every value used.
    pub fn from_labels(labels: Vec<i64>) -> Result<Self> {
        let max = labels.iter().copied().max().unwrap_or(-1);
        let n_clusters = (max + 1).max(0) as usize;
        for expected in 0..n_clusters as i64 {
            if !labels.contains(&expected) {
                return Err(Error::Validation(format!(
                    "cluster label {expected} is unused; labels must be contiguous from 0"
                )));
            }
        }
        if labels.iter().any(|&l| l < -1) {
            return Err(Error::Validation("labels below -1 are not allowed".into()));
        }
        Ok(ClusterLabels { labels, n_clusters })
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    /// Document count of cluster `label`.
    pub fn cluster_size(&self, label: i64) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Labels renumbered by order of first appearance; noise stays `-1`.
    /// Two clusterings of the same points are the same partition iff their
    /// canonical forms are equal.
    pub fn canonicalized(&self) -> Vec<i64> {
        let mut mapping = std::collections::HashMap::new();
        let mut next = 0i64;
        self.labels
            .iter()
            .map(|&l| {
                if l < 0 {
                    -1
                } else {
                    *mapping.entry(l).or_insert_with(|| {
                        let id = next;
                        next += 1;
                        id
                    })
                }
            })
            .collect()
    }
}

/// Runs HDBSCAN over raw point coordinates.
///
/// Fewer than `min_cluster_size` points is not an error: everything is
/// labeled noise.
pub fn hdbscan(points: &[Vec<f64>], params: HdbscanParams) -> Result<ClusterLabels> {
    validate(points, params)?;
    let n = points.len();
    if n < params.min_cluster_size {
        return Ok(ClusterLabels {
            labels: vec![-1; n],
            n_clusters: 0,
        });
    }

    let core = core_distances(points, params.min_samples);
    let mst = prim_mst(points, &core);
    let merges = single_linkage(&mst, n);
    let clusters = condense(&merges, n, params.min_cluster_size);
    let selected = select_excess_of_mass(&clusters);
    Ok(label_points(&clusters, &selected, n))
}

fn validate(points: &[Vec<f64>], params: HdbscanParams) -> Result<()> {
    if params.min_cluster_size < 2 {
        return Err(Error::Parameter("min_cluster_size must be >= 2".into()));
    }
    if params.min_samples < 1 {
        return Err(Error::Parameter("min_samples must be >= 1".into()));
    }
    if points.is_empty() {
        return Err(Error::EmptyInput("no points to cluster".into()));
    }
    let dim = points[0].len();
    if dim == 0 {
        return Err(Error::Parameter("points must have at least 1 dimension".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::Validation(format!(
                "point {i} has dimension {} but point 0 has {dim}",
                p.len()
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("point {i} has non-finite coordinates")));
        }
    }
    Ok(())
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Distance from each point to its `min_samples`-th nearest other point
/// (capped at the farthest point when there are too few neighbors).
pub fn core_distances(points: &[Vec<f64>], min_samples: usize) -> Vec<f64> {
    let n = points.len();
    if n == 1 {
        return vec![0.0];
    }
    let rank = min_samples.min(n - 1);
    (0..n)
        .map(|i| {
            let mut dists: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| euclidean(&points[i], &points[j]))
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            dists[rank - 1]
        })
        .collect()
}

/// Mutual reachability: `max(core(a), core(b), d(a, b))`.
pub fn mutual_reachability(
    points: &[Vec<f64>],
    core: &[f64],
    a: usize,
    b: usize,
) -> f64 {
    core[a].max(core[b]).max(euclidean(&points[a], &points[b]))
}

#[derive(Debug, Clone, Copy)]
struct MstEdge {
    a: usize,
    b: usize,
    weight: f64,
}

/// Prim's minimum spanning tree over the implicit complete mutual
/// reachability graph.
fn prim_mst(points: &[Vec<f64>], core: &[f64]) -> Vec<MstEdge> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best_dist = vec![f64::INFINITY; n];
    let mut best_from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);

    let mut current = 0usize;
    for _ in 1..n {
        in_tree[current] = true;
        let mut next = usize::MAX;
        let mut next_dist = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let mrd = mutual_reachability(points, core, current, j);
            if mrd < best_dist[j] {
                best_dist[j] = mrd;
                best_from[j] = current;
            }
            if best_dist[j] < next_dist {
                next_dist = best_dist[j];
                next = j;
            }
        }
        edges.push(MstEdge {
            a: best_from[next],
            b: next,
            weight: next_dist,
        });
        current = next;
    }
    edges
}

/// One agglomeration in the single-linkage dendrogram. Leaves are node ids
/// `0..n`; merge `i` creates node id `n + i`.
#[derive(Debug, Clone, Copy)]
struct Merge {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

fn single_linkage(mst: &[MstEdge], n: usize) -> Vec<Merge> {
    let mut edges = mst.to_vec();
    edges.sort_by(|x, y| {
        x.weight
            .partial_cmp(&y.weight)
            .expect("finite weights")
            .then_with(|| (x.a, x.b).cmp(&(y.a, y.b)))
    });

    let mut parent: Vec<usize> = (0..n).collect();
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut size_of: Vec<usize> = vec![1; n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let mut merges = Vec::with_capacity(n - 1);
    for edge in edges {
        let ra = find(&mut parent, edge.a);
        let rb = find(&mut parent, edge.b);
        debug_assert_ne!(ra, rb, "MST edges never close a cycle");
        let new_node = n + merges.len();
        merges.push(Merge {
            left: node_of[ra],
            right: node_of[rb],
            distance: edge.weight,
            size: size_of[ra] + size_of[rb],
        });
        parent[rb] = ra;
        node_of[ra] = new_node;
        size_of[ra] += size_of[rb];
    }
    merges
}

/// A cluster in the condensed tree.
#[derive(Debug, Clone)]
struct CondensedCluster {
    birth_lambda: f64,
    children: Vec<usize>,
    /// `(point, lambda at which the point leaves this cluster)`.
    points: Vec<(usize, f64)>,
    stability: f64,
}

fn lambda_of(distance: f64) -> f64 {
    if distance > 0.0 {
        1.0 / distance
    } else {
        f64::INFINITY
    }
}

fn node_size(node: usize, merges: &[Merge], n: usize) -> usize {
    if node < n {
        1
    } else {
        merges[node - n].size
    }
}

fn leaf_points(node: usize, merges: &[Merge], n: usize, out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(id) = stack.pop() {
        if id < n {
            out.push(id);
        } else {
            let m = &merges[id - n];
            stack.push(m.left);
            stack.push(m.right);
        }
    }
}

/// Builds the condensed tree: subtrees smaller than `min_cluster_size` fall
/// out as points; a cluster only splits when both sides stay big enough.
fn condense(merges: &[Merge], n: usize, min_cluster_size: usize) -> Vec<CondensedCluster> {
    let root_node = n + merges.len() - 1;
    let mut clusters = vec![CondensedCluster {
        birth_lambda: 0.0,
        children: Vec::new(),
        points: Vec::new(),
        stability: 0.0,
    }];

    let mut stack = vec![(root_node, 0usize)];
    while let Some((node, cid)) = stack.pop() {
        let merge = &merges[node - n];
        let lambda = lambda_of(merge.distance);
        let left_size = node_size(merge.left, merges, n);
        let right_size = node_size(merge.right, merges, n);
        let birth = clusters[cid].birth_lambda;

        match (left_size >= min_cluster_size, right_size >= min_cluster_size) {
            (true, true) => {
                for (child_node, child_size) in
                    [(merge.left, left_size), (merge.right, right_size)]
                {
                    let child_id = clusters.len();
                    clusters.push(CondensedCluster {
                        birth_lambda: lambda,
                        children: Vec::new(),
                        points: Vec::new(),
                        stability: 0.0,
                    });
                    clusters[cid].children.push(child_id);
                    clusters[cid].stability += (lambda - birth) * child_size as f64;
                    stack.push((child_node, child_id));
                }
            }
            (true, false) => {
                drop_points(merge.right, lambda, cid, merges, n, &mut clusters);
                stack.push((merge.left, cid));
            }
            (false, true) => {
                drop_points(merge.left, lambda, cid, merges, n, &mut clusters);
                stack.push((merge.right, cid));
            }
            (false, false) => {
                drop_points(merge.left, lambda, cid, merges, n, &mut clusters);
                drop_points(merge.right, lambda, cid, merges, n, &mut clusters);
            }
        }
    }
    clusters
}

fn drop_points(
    node: usize,
    lambda: f64,
    cid: usize,
    merges: &[Merge],
    n: usize,
    clusters: &mut [CondensedCluster],
) {
    let mut pts = Vec::new();
    leaf_points(node, merges, n, &mut pts);
    let birth = clusters[cid].birth_lambda;
    for p in pts {
        clusters[cid].points.push((p, lambda));
        clusters[cid].stability += lambda - birth;
    }
}

/// Excess-of-mass selection: a cluster wins when its own stability beats the
/// combined stability of its best descendants. The root is never selectable.
fn select_excess_of_mass(clusters: &[CondensedCluster]) -> Vec<usize> {
    let m = clusters.len();
    let mut best_stability = vec![0.0f64; m];
    let mut selected = vec![false; m];

    for cid in (1..m).rev() {
        let child_sum: f64 = clusters[cid]
            .children
            .iter()
            .map(|&c| best_stability[c])
            .sum();
        if clusters[cid].stability > child_sum {
            selected[cid] = true;
            best_stability[cid] = clusters[cid].stability;
            // this cluster absorbs any previously selected descendants
            let mut stack: Vec<usize> = clusters[cid].children.clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(&clusters[d].children);
            }
        } else {
            best_stability[cid] = child_sum;
        }
    }

    (1..m).filter(|&c| selected[c]).collect()
}

fn label_points(
    clusters: &[CondensedCluster],
    selected: &[usize],
    n: usize,
) -> ClusterLabels {
    let mut labels = vec![-1i64; n];
    for (label, &cid) in selected.iter().enumerate() {
        let mut stack = vec![cid];
        while let Some(c) = stack.pop() {
            for &(p, _) in &clusters[c].points {
                labels[p] = label as i64;
            }
            stack.extend(&clusters[c].children);
        }
    }
    ClusterLabels {
        labels,
        n_clusters: selected.len(),
    }
}
