use std::fmt;

use thiserror::Error;

/// Route cost / distance unit. TSPLIB distances are non-negative integers.
pub type Cost = u64;
/// Cluster profit unit.
pub type Profit = u64;

/// Where the distance matrix came from, kept so instance files stay
/// self-contained without always writing an `n x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceSource {
    Euc2d(Vec<(f64, f64)>),
    Explicit,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("distance matrix has {got} entries, expected {n}x{n}")]
    MatrixShape { n: usize, got: usize },
    #[error("dist[{0}][{0}] must be 0")]
    NonZeroDiagonal(usize),
    #[error("cluster 1 must be exactly the depot node 1")]
    BadDepotCluster,
    #[error("depot cluster must have profit 0")]
    DepotProfit,
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("node {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("node {0} appears in more than one cluster")]
    DuplicateNode(usize),
    #[error("node {0} is not in any cluster")]
    UncoveredNode(usize),
    #[error("{profits} profits for {clusters} clusters")]
    ProfitCount { profits: usize, clusters: usize },
    #[error("traveler count must be at least 1")]
    NoTravelers,
}

/// A fully specified sDmSOP instance.
///
/// Node and cluster indices are zero-based; cluster `0` is always `[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdmsopInstance {
    name: String,
    provenance: String,
    n: usize,
    dist: Vec<Cost>,
    clusters: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
    profits: Vec<Profit>,
    budget: Cost,
    travelers: usize,
    source: DistanceSource,
}

impl SdmsopInstance {
    /// Builds an instance from a row-major `n x n` matrix. Cluster member
    /// lists are sorted; the DP breaks ties by the lowest vertex index.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        n: usize,
        dist: Vec<Cost>,
        mut clusters: Vec<Vec<usize>>,
        profits: Vec<Profit>,
        budget: Cost,
        travelers: usize,
        source: DistanceSource,
    ) -> Result<Self, InstanceError> {
        if dist.len() != n * n {
            return Err(InstanceError::MatrixShape { n, got: dist.len() });
        }
        if let Some(i) = (0..n).find(|&i| dist[i * n + i] != 0) {
            return Err(InstanceError::NonZeroDiagonal(i + 1));
        }
        if clusters.first().map(|c| c.as_slice()) != Some(&[0][..]) {
            return Err(InstanceError::BadDepotCluster);
        }
        if profits.len() != clusters.len() {
            return Err(InstanceError::ProfitCount {
                profits: profits.len(),
                clusters: clusters.len(),
            });
        }
        if profits[0] != 0 {
            return Err(InstanceError::DepotProfit);
        }
        if travelers == 0 {
            return Err(InstanceError::NoTravelers);
        }
        let mut cluster_of = vec![usize::MAX; n];
        for (q, members) in clusters.iter_mut().enumerate() {
            if members.is_empty() {
                return Err(InstanceError::EmptyCluster(q + 1));
            }
            members.sort_unstable();
            for &v in members.iter() {
                if v >= n {
                    return Err(InstanceError::NodeOutOfRange(v + 1));
                }
                if cluster_of[v] != usize::MAX {
                    return Err(InstanceError::DuplicateNode(v + 1));
                }
                cluster_of[v] = q;
            }
        }
        if let Some(v) = cluster_of.iter().position(|&q| q == usize::MAX) {
            return Err(InstanceError::UncoveredNode(v + 1));
        }
        Ok(Self {
            name: name.into(),
            provenance: String::new(),
            n,
            dist,
            clusters,
            cluster_of,
            profits,
            budget,
            travelers,
            source,
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Node count `n`.
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> Cost {
        self.dist[i * self.n + j]
    }

    pub fn distances(&self) -> &[Cost] {
        &self.dist
    }

    /// All clusters, depot first.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    #[inline]
    pub fn cluster(&self, q: usize) -> &[usize] {
        &self.clusters[q]
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.cluster_of[v]
    }

    /// Cluster count including the depot cluster.
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// Non-depot cluster count `p`.
    pub fn visitable_clusters(&self) -> usize {
        self.clusters.len() - 1
    }

    pub fn profits(&self) -> &[Profit] {
        &self.profits
    }

    #[inline]
    pub fn profit(&self, q: usize) -> Profit {
        self.profits[q]
    }

    pub fn budget(&self) -> Cost {
        self.budget
    }

    pub fn travelers(&self) -> usize {
        self.travelers
    }

    pub fn source(&self) -> &DistanceSource {
        &self.source
    }

    pub fn max_cluster_size(&self) -> usize {
        self.clusters.iter().map(Vec::len).max().unwrap_or(1)
    }

    /// Same graph and clusters with a different traveler count.
    pub fn with_travelers(&self, travelers: usize) -> Result<Self, InstanceError> {
        if travelers == 0 {
            return Err(InstanceError::NoTravelers);
        }
        Ok(Self {
            travelers,
            ..self.clone()
        })
    }

    /// Same graph and clusters with a different budget.
    pub fn with_budget(&self, budget: Cost) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }
}

impl fmt::Display for SdmsopInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (n={}, clusters={}, m={}, B={})",
            self.name,
            self.n,
            self.clusters.len(),
            self.travelers,
            self.budget
        )
    }
}
