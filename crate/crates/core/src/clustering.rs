//! Semantic clustering of response embeddings.
//!
//! Two procedures are provided:
//!
//! * [`hac_average_linkage`]: bottom-up agglomeration with average linkage.
//!   Starting from singletons, the pair of clusters with the smallest mean
//!   pairwise distance is merged until that distance exceeds the threshold.
//! * [`greedy_cluster`]: one pass in response order; each response joins the
//!   first existing cluster whose mean distance to it is within the threshold,
//!   otherwise it starts a new cluster.
//!
//! Distances are `1 - cosine similarity`, so they range over `[0, 2]`.
//!
//! Clusters are identified by their smallest member index. Ties between
//! equally distant pairs go to the pair whose `(smaller id, larger id)` is
//! lexicographically smallest, which makes every partition reproducible.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::SimilarityMatrix;

/// Default distance threshold (cosine similarity 0.95).
pub const DEFAULT_DISTANCE_THRESHOLD: f64 = 0.05;

/// Cosine distance `1 - sim`.
#[inline]
pub fn distance(sim: f64) -> f64 {
    1.0 - sim
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    HacAverage,
    Greedy,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::HacAverage => "hac_average",
            Algorithm::Greedy => "greedy",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hac" | "hac_average" => Ok(Algorithm::HacAverage),
            "greedy" => Ok(Algorithm::Greedy),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm {other:?}"
            ))),
        }
    }
}

/// One merge event. `left` and `right` are the ids (smallest member index) of
/// the two clusters before the merge; the merged cluster keeps `left`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// `assignments[i]` is the cluster of response `i`. Ids are `0..k`,
    /// numbered by each cluster's smallest member.
    pub assignments: Vec<usize>,
    pub k: usize,
    pub merge_trace: Vec<Merge>,
    pub algorithm: Algorithm,
    /// Distance threshold used.
    pub threshold: f64,
}

impl Clustering {
    /// Build from a labelled partition, renumbering ids by first appearance.
    pub fn from_assignments(
        assignments: &[usize],
        algorithm: Algorithm,
        threshold: f64,
    ) -> Result<Self> {
        if assignments.is_empty() {
            return Err(Error::MalformedInput("empty assignment list".into()));
        }
        let mut remap = std::collections::HashMap::new();
        let relabelled: Vec<usize> = assignments
            .iter()
            .map(|&a| {
                let next = remap.len();
                *remap.entry(a).or_insert(next)
            })
            .collect();
        Ok(Clustering {
            assignments: relabelled,
            k: remap.len(),
            merge_trace: Vec::new(),
            algorithm,
            threshold,
        })
    }

    /// Number of clustered responses (P).
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// Member indices of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.k];
        for (i, &a) in self.assignments.iter().enumerate() {
            members[a].push(i);
        }
        members
    }
}

fn check_inputs(sm: &SimilarityMatrix, threshold: f64) -> Result<()> {
    if sm.size() == 0 {
        return Err(Error::MalformedInput("similarity matrix is empty".into()));
    }
    if !(0.0..=2.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "distance threshold {threshold} outside [0, 2]"
        )));
    }
    Ok(())
}

/// Turn per-response root ids into contiguous cluster ids.
fn finish(
    roots: &[usize],
    merge_trace: Vec<Merge>,
    algorithm: Algorithm,
    threshold: f64,
) -> Clustering {
    let mut ids = vec![usize::MAX; roots.len()];
    let mut k = 0;
    let assignments = roots
        .iter()
        .map(|&r| {
            if ids[r] == usize::MAX {
                ids[r] = k;
                k += 1;
            }
            ids[r]
        })
        .collect();
    Clustering {
        assignments,
        k,
        merge_trace,
        algorithm,
        threshold,
    }
}

pub fn cluster(sm: &SimilarityMatrix, threshold: f64, algorithm: Algorithm) -> Result<Clustering> {
    match algorithm {
        Algorithm::HacAverage => hac_average_linkage(sm, threshold),
        Algorithm::Greedy => greedy_cluster(sm, threshold),
    }
}

/// Average-linkage agglomerative clustering with a distance cut-off.
///
/// Inter-cluster linkage is tracked as the sum of member-pair distances, and
/// each row keeps its nearest higher-id neighbour so a merge usually costs
/// O(P) instead of a full rescan. Worst case remains O(P³).
pub fn hac_average_linkage(sm: &SimilarityMatrix, threshold: f64) -> Result<Clustering> {
    check_inputs(sm, threshold)?;
    let p = sm.size();

    let mut sums = vec![0.0f64; p * p];
    for i in 0..p {
        for j in 0..p {
            if i != j {
                sums[i * p + j] = distance(sm.get(i, j));
            }
        }
    }
    let mut sizes = vec![1usize; p];
    let mut active = vec![true; p];
    let mut parent: Vec<usize> = (0..p).collect();

    let linkage = |sums: &[f64], sizes: &[usize], a: usize, b: usize| {
        sums[a * p + b] / (sizes[a] * sizes[b]) as f64
    };

    // nearest[a] = closest active b > a, smallest b on ties.
    let mut nearest: Vec<Option<(f64, usize)>> = vec![None; p];
    let scan_row = |sums: &[f64], sizes: &[usize], active: &[bool], a: usize| {
        let mut best: Option<(f64, usize)> = None;
        for (b, _) in active.iter().enumerate().skip(a + 1).filter(|(_, on)| **on) {
            let d = linkage(sums, sizes, a, b);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, b));
            }
        }
        best
    };
    for (a, slot) in nearest.iter_mut().enumerate() {
        *slot = scan_row(&sums, &sizes, &active, a);
    }

    let mut merge_trace = Vec::new();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..p {
            if !active[a] {
                continue;
            }
            if let Some((d, b)) = nearest[a] {
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let Some((d, a, b)) = best else { break };
        if d > threshold {
            break;
        }

        merge_trace.push(Merge {
            left: a,
            right: b,
            distance: d,
        });
        for c in 0..p {
            if active[c] && c != a && c != b {
                let merged = sums[a * p + c] + sums[b * p + c];
                sums[a * p + c] = merged;
                sums[c * p + a] = merged;
            }
        }
        sizes[a] += sizes[b];
        active[b] = false;
        nearest[b] = None;
        parent[b] = a;

        nearest[a] = scan_row(&sums, &sizes, &active, a);
        for c in 0..b {
            if !active[c] || c == a {
                continue;
            }
            match nearest[c] {
                Some((_, n)) if n == a || n == b => {
                    nearest[c] = scan_row(&sums, &sizes, &active, c);
                }
                current if c < a => {
                    let dc = linkage(&sums, &sizes, c, a);
                    let better = match current {
                        None => true,
                        Some((bd, n)) => dc < bd || (dc == bd && a < n),
                    };
                    if better {
                        nearest[c] = Some((dc, a));
                    }
                }
                _ => {}
            }
        }
    }

    let roots: Vec<usize> = (0..p)
        .map(|mut i| {
            while parent[i] != i {
                i = parent[i];
            }
            i
        })
        .collect();
    Ok(finish(
        &roots,
        merge_trace,
        Algorithm::HacAverage,
        threshold,
    ))
}

/// Single-pass greedy clustering in response order.
///
/// Each response joins the first cluster (in creation order) whose average
/// distance to it is at most `threshold`; otherwise it founds a new cluster.
pub fn greedy_cluster(sm: &SimilarityMatrix, threshold: f64) -> Result<Clustering> {
    check_inputs(sm, threshold)?;
    let p = sm.size();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut roots = vec![0usize; p];
    let mut merge_trace = Vec::new();

    #[allow(clippy::needless_range_loop)]
    for i in 0..p {
        let mut joined = false;
        for members in clusters.iter_mut() {
            let total: f64 = members.iter().map(|&m| distance(sm.get(i, m))).sum();
            let avg = total / members.len() as f64;
            if avg <= threshold {
                merge_trace.push(Merge {
                    left: members[0],
                    right: i,
                    distance: avg,
                });
                members.push(i);
                roots[i] = members[0];
                joined = true;
                break;
            }
        }
        if !joined {
            clusters.push(vec![i]);
            roots[i] = i;
        }
    }
    Ok(finish(&roots, merge_trace, Algorithm::Greedy, threshold))
}

/// Fraction of responses in each cluster.
pub fn cluster_proportions(c: &Clustering) -> Vec<f64> {
    let p = c.len() as f64;
    c.sizes().into_iter().map(|s| s as f64 / p).collect()
}

/// Render a merge trace as `left right distance` lines.
pub fn format_merge_trace(trace: &[Merge]) -> String {
    let mut out = String::new();
    for m in trace {
        out.push_str(&format!("{} {} {}\n", m.left, m.right, m.distance));
    }
    out
}

/// Parse the output of [`format_merge_trace`]. Blank lines are skipped.
pub fn parse_merge_trace(text: &str) -> Result<Vec<Merge>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let bad = || Error::MalformedInput(format!("merge trace line {}: {line:?}", n + 1));
            let mut parts = line.split_whitespace();
            let left = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let right = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let distance = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if parts.next().is_some() {
                return Err(bad());
            }
            Ok(Merge {
                left,
                right,
                distance,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::pairwise_similarity;
    use crate::types::EmbeddingMatrix;

    /// Three planted groups in the shape of the planet example:
    /// Earth x3, Saturn x2, Mars x1, interleaved.
    pub(crate) fn planets() -> SimilarityMatrix {
        let earth = [1.0, 0.0, 0.0, 0.0];
        let saturn = [0.3, 0.95, 0.0, 0.0];
        let mars = [0.2, 0.2, 0.95, 0.0];
        let jitter = |v: [f64; 4], e: f64| [v[0], v[1], v[2], e];
        let rows = vec![
            jitter(earth, 0.02),
            jitter(saturn, 0.0),
            jitter(earth, -0.03),
            jitter(mars, 0.0),
            jitter(saturn, 0.05),
            jitter(earth, 0.0),
        ];
        pairwise_similarity(&EmbeddingMatrix::from_rows(&rows).unwrap())
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(1.0), 0.0);
        assert_eq!(distance(0.0), 1.0);
        assert!((distance(0.95) - 0.05).abs() < 1e-15);
        assert_eq!(distance(-1.0), 2.0);
    }

    #[test]
    fn planet_fixture_is_well_separated() {
        let sm = planets();
        let groups = [0, 1, 0, 2, 1, 0];
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    continue;
                }
                if groups[i] == groups[j] {
                    assert!(sm.get(i, j) >= 0.99, "({i},{j}) = {}", sm.get(i, j));
                } else {
                    assert!(sm.get(i, j) <= 0.5, "({i},{j}) = {}", sm.get(i, j));
                }
            }
        }
    }

    #[test]
    fn hac_planets_three_clusters() {
        let c = hac_average_linkage(&planets(), DEFAULT_DISTANCE_THRESHOLD).unwrap();
        assert_eq!(c.k, 3);
        assert_eq!(c.assignments, vec![0, 1, 0, 2, 1, 0]);
        let mut sizes = c.sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);
        assert_eq!(c.merge_trace.len(), 3);
        assert!(c.merge_trace.iter().all(|m| m.distance <= 0.05));
    }

    #[test]
    fn greedy_planets_matches_hac() {
        let sm = planets();
        let g = greedy_cluster(&sm, DEFAULT_DISTANCE_THRESHOLD).unwrap();
        let h = hac_average_linkage(&sm, DEFAULT_DISTANCE_THRESHOLD).unwrap();
        assert_eq!(g.k, 3);
        assert_eq!(g.assignments, h.assignments);
        assert_eq!(g.algorithm, Algorithm::Greedy);
        // response 2 joins Earth, 4 joins Saturn, 5 joins Earth
        let joins: Vec<_> = g.merge_trace.iter().map(|m| (m.left, m.right)).collect();
        assert_eq!(joins, vec![(0, 2), (1, 4), (0, 5)]);
    }

    #[test]
    fn identical_rows_collapse_for_any_threshold() {
        let em = EmbeddingMatrix::from_rows(&vec![vec![0.3, -0.1, 0.7]; 5]).unwrap();
        let sm = pairwise_similarity(&em);
        for t in [0.0, 0.05, 1.0, 2.0] {
            assert_eq!(hac_average_linkage(&sm, t).unwrap().k, 1);
            assert_eq!(greedy_cluster(&sm, t).unwrap().k, 1);
        }
    }

    #[test]
    fn orthogonal_rows_stay_apart() {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..5).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let sm = pairwise_similarity(&EmbeddingMatrix::from_rows(&rows).unwrap());
        let h = hac_average_linkage(&sm, 0.05).unwrap();
        assert_eq!(h.k, 5);
        assert!(h.merge_trace.is_empty());
        assert_eq!(greedy_cluster(&sm, 0.05).unwrap().k, 5);
        assert_eq!(
            greedy_cluster(&sm.truncated(2).unwrap(), 0.05).unwrap().k,
            2
        );
    }

    #[test]
    fn singleton_input() {
        let sm = SimilarityMatrix::from_dense(&[vec![1.0]]).unwrap();
        let h = hac_average_linkage(&sm, 0.05).unwrap();
        assert_eq!((h.k, h.assignments.clone()), (1, vec![0]));
        assert_eq!(greedy_cluster(&sm, 0.05).unwrap().k, 1);
        assert_eq!(cluster_proportions(&h), vec![1.0]);
    }

    #[test]
    fn threshold_out_of_range() {
        let sm = planets();
        assert!(matches!(
            hac_average_linkage(&sm, -0.1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(greedy_cluster(&sm, 2.5).is_err());
        assert!(hac_average_linkage(&sm, f64::NAN).is_err());
    }

    #[test]
    fn tie_break_prefers_smallest_pair() {
        // all off-diagonal distances equal: merges proceed (0,1), (0,2), (0,3)
        let sm = SimilarityMatrix::from_dense(&vec![vec![0.5; 4]; 4]).unwrap();
        let h = hac_average_linkage(&sm, 0.6).unwrap();
        let pairs: Vec<_> = h.merge_trace.iter().map(|m| (m.left, m.right)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3)]);
        assert_eq!(h.k, 1);
    }

    #[test]
    fn negative_similarity_gives_large_distance() {
        let sm = SimilarityMatrix::from_dense(&[vec![1.0, -0.5], vec![-0.5, 1.0]]).unwrap();
        assert_eq!(hac_average_linkage(&sm, 1.49).unwrap().k, 2);
        let merged = hac_average_linkage(&sm, 1.5).unwrap();
        assert_eq!(merged.k, 1);
        assert_eq!(merged.merge_trace[0].distance, 1.5);
    }

    #[test]
    fn proportions() {
        let c =
            Clustering::from_assignments(&[0, 1, 0, 2, 1, 0], Algorithm::HacAverage, 0.05).unwrap();
        let p = cluster_proportions(&c);
        assert_eq!(p, vec![0.5, 2.0 / 6.0, 1.0 / 6.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let singletons =
            Clustering::from_assignments(&[0, 1, 2, 3], Algorithm::HacAverage, 0.05).unwrap();
        assert_eq!(cluster_proportions(&singletons), vec![0.25; 4]);
    }

    #[test]
    fn from_assignments_renumbers() {
        let c = Clustering::from_assignments(&[7, 3, 7, 9], Algorithm::HacAverage, 0.05).unwrap();
        assert_eq!(c.assignments, vec![0, 1, 0, 2]);
        assert_eq!(c.k, 3);
    }

    #[test]
    fn merge_trace_text_round_trip() {
        let c = hac_average_linkage(&planets(), 0.05).unwrap();
        let text = format_merge_trace(&c.merge_trace);
        assert_eq!(text.lines().count(), c.merge_trace.len());
        assert_eq!(parse_merge_trace(&text).unwrap(), c.merge_trace);
        assert!(parse_merge_trace("0 1").is_err());
        assert!(parse_merge_trace("0 1 0.1 extra").is_err());
    }

    #[test]
    fn algorithm_names_parse() {
        assert_eq!("hac".parse::<Algorithm>().unwrap(), Algorithm::HacAverage);
        assert_eq!("greedy".parse::<Algorithm>().unwrap(), Algorithm::Greedy);
        assert_eq!(
            Algorithm::Greedy.name().parse::<Algorithm>().unwrap(),
            Algorithm::Greedy
        );
        assert!("dbscan".parse::<Algorithm>().is_err());
    }
}
