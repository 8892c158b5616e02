//! Switching weighted digraphs, their row-stochastic Perron matrices, the
//! uniform-connectivity check, and the projected consensus update on the
//! reference states.

use nalgebra::{DMatrix, Matrix2, Vector2};
use thiserror::Error;

/// Directed edge `(node, neighbor, weight)`: `node` receives the state of
/// `neighbor` with weight `a_ij`. Zero-indexed internally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub node: usize,
    pub neighbor: usize,
    pub weight: f64,
}

/// One snapshot of the communication topology.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    node_count: usize,
    edges: Vec<Edge>,
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("edge ({node}, {neighbor}) out of range for {nodes} nodes")]
    EdgeOutOfRange {
        node: usize,
        neighbor: usize,
        nodes: usize,
    },
    #[error("self-loop ({0}, {0}) is implicit and may not be listed")]
    ExplicitSelfLoop(usize),
    #[error("edge weight {weight} at ({node}, {neighbor}) outside ({floor}, 1]")]
    WeightOutOfRange {
        node: usize,
        neighbor: usize,
        weight: f64,
        floor: f64,
    },
    #[error("node {node}: neighbor weights sum to {sum} > 1, diagonal would be negative")]
    NegativeDiagonal { node: usize, sum: f64 },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("schedule is empty")]
    EmptySchedule,
    #[error("graph node counts differ within one schedule")]
    MixedNodeCounts,
    #[error("agent {agent}: reference-rate interval is empty")]
    EmptyInterval { agent: usize },
    #[error("consensus has not converged: spread {spread:.3e} exceeds {tol:.3e}")]
    NotConverged { spread: f64, tol: f64 },
}

impl WeightedDigraph {
    /// Validate edges against the weight floor and the row-sum budget.
    pub fn new(node_count: usize, edges: Vec<Edge>, weight_floor: f64) -> Result<Self, NetworkError> {
        let mut row_sum = vec![0.0; node_count];
        for e in &edges {
            if e.node >= node_count || e.neighbor >= node_count {
                return Err(NetworkError::EdgeOutOfRange {
                    node: e.node,
                    neighbor: e.neighbor,
                    nodes: node_count,
                });
            }
            if e.node == e.neighbor {
                return Err(NetworkError::ExplicitSelfLoop(e.node));
            }
            if e.weight <= weight_floor || e.weight > 1.0 {
                return Err(NetworkError::WeightOutOfRange {
                    node: e.node,
                    neighbor: e.neighbor,
                    weight: e.weight,
                    floor: weight_floor,
                });
            }
            if edges
                .iter()
                .filter(|o| o.node == e.node && o.neighbor == e.neighbor)
                .count()
                > 1
            {
                return Err(NetworkError::DuplicateEdge(e.node, e.neighbor));
            }
            row_sum[e.node] += e.weight;
        }
        for (node, sum) in row_sum.iter().enumerate() {
            if *sum > 1.0 {
                return Err(NetworkError::NegativeDiagonal { node, sum: *sum });
            }
        }
        Ok(Self { node_count, edges })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Row-stochastic Perron matrix: off-diagonal weights for listed edges,
    /// diagonal absorbing the remainder.
    pub fn perron(&self) -> DMatrix<f64> {
        let n = self.node_count;
        let mut p = DMatrix::identity(n, n);
        for e in &self.edges {
            p[(e.node, e.neighbor)] = e.weight;
            p[(e.node, e.node)] -= e.weight;
        }
        p
    }
}

/// How the schedule walks through its graph list.
#[derive(Debug, Clone, PartialEq)]
pub enum Switching {
    /// `graphs[t mod len]`.
    Cyclic,
    /// Explicit indices into the graph list, repeated cyclically.
    Timeline(Vec<usize>),
}

/// Switching topology over time plus the connectivity-window length.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSchedule {
    graphs: Vec<WeightedDigraph>,
    switching: Switching,
    /// Window length `T`: union graphs are taken over `[t, t+T]`.
    pub window: usize,
    pub weight_floor: f64,
}

impl GraphSchedule {
    pub fn new(
        graphs: Vec<WeightedDigraph>,
        switching: Switching,
        window: usize,
        weight_floor: f64,
    ) -> Result<Self, NetworkError> {
        if graphs.is_empty() {
            return Err(NetworkError::EmptySchedule);
        }
        let n = graphs[0].node_count();
        if graphs.iter().any(|g| g.node_count() != n) {
            return Err(NetworkError::MixedNodeCounts);
        }
        if let Switching::Timeline(idx) = &switching {
            if idx.is_empty() {
                return Err(NetworkError::EmptySchedule);
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= graphs.len()) {
                return Err(NetworkError::EdgeOutOfRange {
                    node: bad,
                    neighbor: 0,
                    nodes: graphs.len(),
                });
            }
        }
        Ok(Self {
            graphs,
            switching,
            window,
            weight_floor,
        })
    }

    pub fn node_count(&self) -> usize {
        self.graphs[0].node_count()
    }

    /// Length after which the schedule repeats.
    pub fn period(&self) -> usize {
        match &self.switching {
            Switching::Cyclic => self.graphs.len(),
            Switching::Timeline(idx) => idx.len(),
        }
    }

    pub fn graph_at(&self, t: usize) -> &WeightedDigraph {
        match &self.switching {
            Switching::Cyclic => &self.graphs[t % self.graphs.len()],
            Switching::Timeline(idx) => &self.graphs[idx[t % idx.len()]],
        }
    }

    pub fn graphs(&self) -> &[WeightedDigraph] {
        &self.graphs
    }
}

/// Result of the uniform-connectivity check: the verdict plus, on failure,
/// the first window start whose union graph is not strongly connected.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityWitness {
    pub connected: bool,
    pub failing_window_start: Option<usize>,
    /// Union edge pairs (node, neighbor) of the first checked window.
    pub first_window_union: Vec<(usize, usize)>,
}

/// Strong connectivity of the union graph over every window `[t, t+T]` with
/// `t` ranging over one schedule period.
pub fn check_uniform_connectivity(schedule: &GraphSchedule) -> ConnectivityWitness {
    let n = schedule.node_count();
    let period = schedule.period();
    let mut first_union = Vec::new();
    for start in 0..period {
        let mut adj = vec![vec![]; n];
        let mut union_pairs = Vec::new();
        for t in start..=start + schedule.window {
            for e in schedule.graph_at(t).edges() {
                if !union_pairs.contains(&(e.node, e.neighbor)) {
                    union_pairs.push((e.node, e.neighbor));
                    adj[e.node].push(e.neighbor);
                }
            }
        }
        if start == 0 {
            first_union = union_pairs.clone();
        }
        if !strongly_connected(&adj) {
            return ConnectivityWitness {
                connected: false,
                failing_window_start: Some(start),
                first_window_union: first_union,
            };
        }
    }
    ConnectivityWitness {
        connected: true,
        failing_window_start: None,
        first_window_union: first_union,
    }
}

/// A digraph is strongly connected iff every node is reachable from node 0
/// in both the graph and its reverse.
fn strongly_connected(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    if n == 0 {
        return true;
    }
    let mut rev = vec![vec![]; n];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            rev[w].push(v);
        }
    }
    reaches_all(adj, 0) && reaches_all(&rev, 0)
}

fn reaches_all(adj: &[Vec<usize>], start: usize) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Reference states of all agents at one time step.
pub type OmegaCloud = Vec<Vector2<f64>>;

/// One synchronous exchange: diffusive mixing along the graph, advance by
/// `S`, then project each agent's rate coordinate into its own interval.
/// The projection is an exact Euclidean projection because each constraint
/// set is a horizontal slab in the plane.
pub fn consensus_step(
    cloud: &OmegaCloud,
    graph: &WeightedDigraph,
    s: &Matrix2<f64>,
    intervals: &[(f64, f64)],
) -> Result<OmegaCloud, NetworkError> {
    let n = cloud.len();
    let mut next = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = intervals[i];
        if lo > hi {
            return Err(NetworkError::EmptyInterval { agent: i });
        }
        let mut mixed = cloud[i];
        for e in graph.edges() {
            if e.node == i {
                mixed += (cloud[e.neighbor] - cloud[i]) * e.weight;
            }
        }
        let mut advanced = s * mixed;
        advanced.y = advanced.y.clamp(lo, hi);
        next.push(advanced);
    }
    Ok(next)
}

/// Common time-0-frame value once the cloud has collapsed: `z_i = S^-t w_i`
/// must agree pairwise within `tol`; the mean is returned.
pub fn consensus_value_estimate(
    cloud: &OmegaCloud,
    s_inv_t: &Matrix2<f64>,
    tol: f64,
) -> Result<(f64, f64), NetworkError> {
    let zs: Vec<Vector2<f64>> = cloud.iter().map(|w| s_inv_t * w).collect();
    let mut spread = 0.0_f64;
    for i in 0..zs.len() {
        for j in (i + 1)..zs.len() {
            spread = spread.max((zs[i] - zs[j]).norm());
        }
    }
    if spread >= tol {
        return Err(NetworkError::NotConverged { spread, tol });
    }
    let mean = zs.iter().sum::<Vector2<f64>>() / zs.len() as f64;
    Ok((mean.x, mean.y))
}
