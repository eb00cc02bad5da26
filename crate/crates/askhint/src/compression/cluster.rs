//! Agglomerative hierarchical clustering over a class-similarity matrix.
//!
//! Distance is `1 - cosine similarity`. Cluster-to-cluster distances are
//! recomputed from the original pairwise distances at every step (mean, max
//! or min over cross pairs), which keeps the procedure equal to its
//! sequential specification regardless of merge order bookkeeping. Ties in
//! the minimum merge distance break on the lexicographically lowest pair of
//! cluster representative names, so the output is deterministic and
//! insensitive to input order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ClassSimilarityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Average,
    Complete,
    Single,
}

impl std::str::FromStr for Linkage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Linkage> {
        match s.to_lowercase().as_str() {
            "average" => Ok(Linkage::Average),
            "complete" => Ok(Linkage::Complete),
            "single" => Ok(Linkage::Single),
            other => Err(Error::Config(format!("unknown linkage {other:?}"))),
        }
    }
}

/// When to stop merging for the flat cluster assignment. The dendrogram is
/// always built to completion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    NumClusters(usize),
    DistanceThreshold(f64),
}

/// One merge: node ids follow the usual convention (leaves `0..n`, the step
/// `i` merge creates node `n + i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Stepwise dendrogram over named leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub merges: Vec<MergeStep>,
}

impl Dendrogram {
    /// Merge heights must be non-decreasing for the monotone linkages.
    pub fn validate_monotone(&self) -> Result<()> {
        for window in self.merges.windows(2) {
            if window[1].height < window[0].height - 1e-12 {
                return Err(Error::Config(format!(
                    "dendrogram heights decrease: {} then {}",
                    window[0].height, window[1].height
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dendrogram serializes")
    }

    /// Newick string with branch lengths `parent height - child height`.
    pub fn to_newick(&self) -> String {
        let n = self.leaves.len();
        if n == 1 {
            return format!("{};", newick_label(&self.leaves[0]));
        }
        // node id -> (subtree text, merge height)
        let mut nodes: Vec<Option<(String, f64)>> = vec![None; n + self.merges.len()];
        for (i, leaf) in self.leaves.iter().enumerate() {
            nodes[i] = Some((newick_label(leaf), 0.0));
        }
        for (step, merge) in self.merges.iter().enumerate() {
            let (lt, lh) = nodes[merge.left].clone().expect("left child exists");
            let (rt, rh) = nodes[merge.right].clone().expect("right child exists");
            let text = format!(
                "({}:{},{}:{})",
                lt,
                merge.height - lh,
                rt,
                merge.height - rh
            );
            nodes[n + step] = Some((text, merge.height));
        }
        let (root, _) = nodes.last().cloned().flatten().expect("root exists");
        format!("{root};")
    }

    /// Leaf membership of every internal node, for cutting and tests.
    fn node_members(&self) -> Vec<Vec<usize>> {
        let n = self.leaves.len();
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for merge in &self.merges {
            let mut m = members[merge.left].clone();
            m.extend(members[merge.right].iter().copied());
            m.sort_unstable();
            members.push(m);
        }
        members
    }
}

fn newick_label(name: &str) -> String {
    let needs_quoting = name.contains([' ', ',', '(', ')', ':', ';', '\'']);
    if needs_quoting {
        format!("'{}'", name.replace('\'', "''"))
    } else {
        name.to_string()
    }
}

/// Cophenetic distance matrix implied by a dendrogram: entry (i, j) is the
/// height of the first merge uniting leaves i and j.
pub fn cophenetic_matrix(dendrogram: &Dendrogram) -> Vec<Vec<f64>> {
    let n = dendrogram.leaves.len();
    let members = dendrogram.node_members();
    let mut out = vec![vec![0.0f64; n]; n];
    for (step, merge) in dendrogram.merges.iter().enumerate() {
        let _ = step;
        for &i in &members[merge.left] {
            for &j in &members[merge.right] {
                out[i][j] = merge.height;
                out[j][i] = merge.height;
            }
        }
    }
    out
}

struct ActiveCluster {
    node_id: usize,
    members: Vec<usize>,
    /// Lexicographically smallest member class name; the tie-break key.
    rep: String,
}

/// Clusters classes from a similarity matrix. Returns the flat assignment
/// (labels ordered by each cluster's smallest member name) and the full
/// dendrogram.
pub fn agglomerative_cluster(
    matrix: &ClassSimilarityMatrix,
    linkage: Linkage,
    stop: StopRule,
) -> Result<(Vec<usize>, Dendrogram)> {
    matrix.validate()?;
    let n = matrix.len();
    if let StopRule::NumClusters(k) = stop {
        if k < 1 || k > n {
            return Err(Error::InvalidStop(format!("k={k} with n={n}")));
        }
    }

    let dist = |i: usize, j: usize| 1.0 - matrix.values[i][j];

    let mut active: Vec<ActiveCluster> = (0..n)
        .map(|i| ActiveCluster {
            node_id: i,
            members: vec![i],
            rep: matrix.class_names[i].clone(),
        })
        .collect();

    let cluster_distance = |a: &ActiveCluster, b: &ActiveCluster| -> f64 {
        let mut acc = match linkage {
            Linkage::Average => 0.0,
            Linkage::Complete => f64::NEG_INFINITY,
            Linkage::Single => f64::INFINITY,
        };
        for &i in &a.members {
            for &j in &b.members {
                let d = dist(i, j);
                match linkage {
                    Linkage::Average => acc += d,
                    Linkage::Complete => acc = acc.max(d),
                    Linkage::Single => acc = acc.min(d),
                }
            }
        }
        if let Linkage::Average = linkage {
            acc /= (a.members.len() * b.members.len()) as f64;
        }
        acc
    };

    let mut merges: Vec<MergeStep> = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        // Find the closest pair; ties break on the lexicographically lowest
        // (rep_min, rep_max) name pair.
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..active.len() {
            for b in (a + 1)..active.len() {
                let d = cluster_distance(&active[a], &active[b]);
                let better = match best {
                    None => true,
                    Some((ba, bb, bd)) => {
                        if d < bd {
                            true
                        } else if d > bd {
                            false
                        } else {
                            pair_key(&active[a], &active[b])
                                < pair_key(&active[ba], &active[bb])
                        }
                    }
                };
                if better {
                    best = Some((a, b, d));
                }
            }
        }
        let (a, b, height) = best.expect("at least two active clusters");
        // Left child is the one holding the smaller representative name.
        let (first, second) = if active[a].rep <= active[b].rep { (a, b) } else { (b, a) };
        let second_cluster = active.swap_remove(second.max(first));
        let first_cluster = active.swap_remove(second.min(first));
        let (left, right) = if first_cluster.rep <= second_cluster.rep {
            (first_cluster, second_cluster)
        } else {
            (second_cluster, first_cluster)
        };
        let mut members = left.members.clone();
        members.extend(right.members.iter().copied());
        members.sort_unstable();
        merges.push(MergeStep {
            left: left.node_id,
            right: right.node_id,
            height,
            size: members.len(),
        });
        let rep = if left.rep <= right.rep { left.rep } else { right.rep };
        active.push(ActiveCluster {
            node_id: n + step,
            members,
            rep,
        });
    }

    let dendrogram = Dendrogram {
        leaves: matrix.class_names.clone(),
        merges,
    };

    let assignment = cut_assignment(&dendrogram, &matrix.class_names, stop);
    Ok((assignment, dendrogram))
}

fn pair_key(a: &ActiveCluster, b: &ActiveCluster) -> (String, String) {
    if a.rep <= b.rep {
        (a.rep.clone(), b.rep.clone())
    } else {
        (b.rep.clone(), a.rep.clone())
    }
}

/// Flat assignment from the stop rule: apply the first `n - k` merges (or
/// all merges with height <= threshold), then label surviving clusters in
/// order of their smallest member class name.
fn cut_assignment(dendrogram: &Dendrogram, names: &[String], stop: StopRule) -> Vec<usize> {
    let n = names.len();
    let applied = match stop {
        StopRule::NumClusters(k) => n - k,
        StopRule::DistanceThreshold(t) => {
            dendrogram.merges.iter().take_while(|m| m.height <= t).count()
        }
    };
    let members = dendrogram.node_members();
    let mut alive: Vec<usize> = (0..n).collect();
    for (step, merge) in dendrogram.merges.iter().take(applied).enumerate() {
        alive.retain(|&id| id != merge.left && id != merge.right);
        alive.push(n + step);
    }
    let mut clusters: Vec<&Vec<usize>> = alive.iter().map(|&id| &members[id]).collect();
    clusters.sort_by_key(|m| {
        m.iter()
            .map(|&i| names[i].as_str())
            .min()
            .expect("cluster non-empty")
            .to_string()
    });
    let mut assignment = vec![0usize; n];
    for (label, cluster) in clusters.iter().enumerate() {
        for &leaf in cluster.iter() {
            assignment[leaf] = label;
        }
    }
    assignment
}
