use std::time::Instant;

use crate::error::{Error, Result};
use crate::netgraph::DeploymentGraph;
use crate::plan::{AlgorithmTag, Plan};

pub const DEFAULT_CANDIDATE_LIMIT: usize = 22;

/// Certificate that no smaller connected cover exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimumCertificate {
    pub optimum: usize,
    /// Starting cardinality of the search.
    pub lower_bound: usize,
    /// Subsets whose coverage and connectivity were fully tested.
    pub subsets_checked: u64,
}

/// Fixed-width bitset over ground nodes.
#[derive(Clone)]
struct NodeSet(Vec<u64>);

impl NodeSet {
    fn empty(n: usize) -> Self {
        NodeSet(vec![0; n.div_ceil(64)])
    }

    fn from_ids(n: usize, ids: &[usize]) -> Self {
        let mut s = Self::empty(n);
        for &i in ids {
            s.0[i / 64] |= 1 << (i % 64);
        }
        s
    }

    fn union_with(&mut self, other: &NodeSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn union(&self, other: &NodeSet) -> NodeSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    fn covers(&self, full: &NodeSet) -> bool {
        self.0.iter().zip(&full.0).all(|(a, f)| a & f == *f)
    }
}

struct Search<'a> {
    n: usize,
    access: Vec<NodeSet>,
    /// `suffix[i]` is the union of access sets of candidates `i..n`.
    suffix: Vec<NodeSet>,
    full: NodeSet,
    adjacency: Vec<u32>,
    graph: &'a DeploymentGraph,
    checked: u64,
}

impl Search<'_> {
    fn connected(&self, mask: u32) -> bool {
        if mask == 0 {
            return true;
        }
        let mut reached = mask & mask.wrapping_neg();
        loop {
            let mut grow = reached;
            let mut bits = reached;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                grow |= self.adjacency[j] & mask;
            }
            if grow == reached {
                return reached == mask;
            }
            reached = grow;
        }
    }

    /// Lexicographically smallest connected cover of exactly `size`
    /// candidates, if any.
    fn first_of_size(&mut self, size: usize, require_connected: bool) -> Option<u32> {
        let cover = NodeSet::empty(self.graph.n_nodes());
        self.extend(0, 0, size, &cover, require_connected)
    }

    fn extend(&mut self, start: usize, mask: u32, left: usize, cover: &NodeSet, conn: bool) -> Option<u32> {
        if left == 0 {
            if !cover.covers(&self.full) {
                return None;
            }
            self.checked += 1;
            return (!conn || self.connected(mask)).then_some(mask);
        }
        for k in start..=self.n - left {
            // Even taking every remaining candidate cannot finish the cover.
            if !cover.union(&self.suffix[k]).covers(&self.full) {
                break;
            }
            let next = cover.union(&self.access[k]);
            if let Some(found) = self.extend(k + 1, mask | (1 << k), left - 1, &next, conn) {
                return Some(found);
            }
        }
        None
    }
}

pub fn solve_exact(graph: &DeploymentGraph, limit: usize) -> Result<(Plan, OptimumCertificate)> {
    let start = Instant::now();
    let n = graph.n_candidates();
    if n > limit || n > 32 {
        return Err(Error::InstanceTooLarge { candidates: n, limit: limit.min(32) });
    }
    graph.check_coverage_feasible()?;
    graph.check_backhaul_feasible()?;

    let n_nodes = graph.n_nodes();
    let access: Vec<NodeSet> = (0..n).map(|k| NodeSet::from_ids(n_nodes, graph.covered(k))).collect();
    let mut suffix = vec![NodeSet::empty(n_nodes); n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1].union(&access[k]);
    }
    let all: Vec<usize> = (0..n_nodes).collect();
    let adjacency = (0..n)
        .map(|j| graph.neighbors(j).iter().fold(0u32, |m, &k| m | (1 << k)))
        .collect();
    let mut search = Search {
        n,
        access,
        suffix,
        full: NodeSet::from_ids(n_nodes, &all),
        adjacency,
        graph,
        checked: 0,
    };

    let lower_bound = if n_nodes == 0 {
        0
    } else {
        let widest = (0..n).map(|k| graph.covered(k).len()).max().unwrap_or(0);
        let counting = n_nodes.div_ceil(widest);
        // Set-cover optimum without the backhaul requirement.
        (counting..=n).find(|&m| search.first_of_size(m, false).is_some()).unwrap_or(n)
    };
    search.checked = 0;

    let found = (lower_bound..=n).find_map(|m| search.first_of_size(m, true));
    let mask = found.ok_or_else(|| Error::InfeasibleBackhaul {
        component_sizes: graph.components().iter().map(Vec::len).collect(),
    })?;
    let selected: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
    let certificate =
        OptimumCertificate { optimum: selected.len(), lower_bound, subsets_checked: search.checked };
    let mut plan = Plan::from_selection(graph, AlgorithmTag::Exact, selected, Vec::new());
    plan.runtime = start.elapsed().as_secs_f64();
    Ok((plan, certificate))
}
