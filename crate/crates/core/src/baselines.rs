//! Comparison algorithms: set-cover greedy without backhaul, greedy with
//! EMST-guided relay insertion, and random deployment.

use std::collections::VecDeque;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::DeploymentGraph;
use crate::plan::{AlgorithmTag, Plan};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyMode {
    /// Re-count uncovered users after every pick.
    #[default]
    Adaptive,
    /// Sort once by access-set size and sweep the list.
    StaticSorted,
}

impl GreedyMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            GreedyMode::Adaptive => "adaptive",
            GreedyMode::StaticSorted => "static_sorted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmstEdge {
    pub endpoints: (usize, usize),
    pub weight: f64,
}

fn greedy_selection(graph: &DeploymentGraph, mode: GreedyMode) -> Vec<usize> {
    let n = graph.n_candidates();
    let mut is_covered = vec![false; graph.n_nodes()];
    let mut remaining = graph.n_nodes();
    let mut selected = Vec::new();
    let mark = |k: usize, is_covered: &mut [bool]| {
        let mut gained = 0;
        for &i in graph.covered(k) {
            if !is_covered[i] {
                is_covered[i] = true;
                gained += 1;
            }
        }
        gained
    };
    match mode {
        GreedyMode::Adaptive => {
            let mut gain: Vec<usize> = (0..n).map(|k| graph.covered(k).len()).collect();
            while remaining > 0 {
                let best = (0..n).max_by_key(|&k| (gain[k], std::cmp::Reverse(k))).expect("feasible");
                debug_assert!(gain[best] > 0);
                for &i in graph.covered(best) {
                    if !is_covered[i] {
                        for &k in graph.covering(i) {
                            gain[k] -= 1;
                        }
                    }
                }
                remaining -= mark(best, &mut is_covered);
                selected.push(best);
            }
        }
        GreedyMode::StaticSorted => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&k| (std::cmp::Reverse(graph.covered(k).len()), k));
            for k in order {
                if remaining == 0 {
                    break;
                }
                if graph.covered(k).iter().any(|&i| !is_covered[i]) {
                    remaining -= mark(k, &mut is_covered);
                    selected.push(k);
                }
            }
        }
    }
    selected
}

/// Plain set-cover greedy. Backhaul connectivity is recorded, not enforced.
pub fn greedy_cover(graph: &DeploymentGraph, mode: GreedyMode) -> Result<Plan> {
    let start = Instant::now();
    graph.check_coverage_feasible()?;
    let selected = greedy_selection(graph, mode);
    let mut plan = Plan::from_selection(graph, AlgorithmTag::GreedyNoBackhaul, selected, Vec::new());
    plan.variant = Some(mode.as_str().to_string());
    plan.runtime = start.elapsed().as_secs_f64();
    Ok(plan)
}

/// Euclidean minimum spanning tree over `points` (Prim, dense form). Edges
/// come back in the order they join the tree.
pub fn euclidean_mst(graph: &DeploymentGraph, points: &[usize]) -> Vec<EmstEdge> {
    let m = points.len();
    if m < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; m];
    let mut best = vec![(f64::INFINITY, usize::MAX); m];
    in_tree[0] = true;
    for v in 1..m {
        best[v] = (graph.distance(points[0], points[v]), 0);
    }
    let mut edges = Vec::with_capacity(m - 1);
    for _ in 1..m {
        let v = (0..m)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0).then(points[a].cmp(&points[b])))
            .expect("vertices left");
        in_tree[v] = true;
        let (w, u) = best[v];
        let (a, b) = (points[u], points[v]);
        edges.push(EmstEdge { endpoints: (a.min(b), a.max(b)), weight: w });
        for t in 0..m {
            if !in_tree[t] {
                let d = graph.distance(points[v], points[t]);
                if d < best[t].0 {
                    best[t] = (d, v);
                }
            }
        }
    }
    edges
}

/// Fewest-hop path from `from` to `to` over the candidate backhaul graph,
/// lexicographically smallest among equal-length paths.
pub fn hop_shortest_path(graph: &DeploymentGraph, from: usize, to: usize) -> Option<Vec<usize>> {
    let n = graph.n_candidates();
    let mut dist = vec![usize::MAX; n];
    dist[to] = 0;
    let mut queue = VecDeque::from([to]);
    while let Some(j) = queue.pop_front() {
        if j == from {
            break;
        }
        for &k in graph.neighbors(j) {
            if dist[k] == usize::MAX {
                dist[k] = dist[j] + 1;
                queue.push_back(k);
            }
        }
    }
    if dist[from] == usize::MAX {
        return None;
    }
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        // Neighbours are sorted, so the first one a hop closer is the
        // lexicographic choice.
        cur = *graph
            .neighbors(cur)
            .iter()
            .find(|&&k| dist[k] != usize::MAX && dist[k] + 1 == dist[cur])
            .expect("BFS layering");
        path.push(cur);
    }
    Some(path)
}

/// Greedy coverage followed by relay insertion along hop-shortest paths for
/// each EMST edge, shortest edges first.
pub fn backhaul_greedy(graph: &DeploymentGraph) -> Result<Plan> {
    let start = Instant::now();
    graph.check_coverage_feasible()?;
    let base = greedy_selection(graph, GreedyMode::Adaptive);

    let mut emst = euclidean_mst(graph, &base);
    emst.sort_by(|a, b| a.weight.total_cmp(&b.weight).then(a.endpoints.cmp(&b.endpoints)));

    let mut chosen = vec![false; graph.n_candidates()];
    for &k in &base {
        chosen[k] = true;
    }
    let mut selected = base.clone();
    for edge in &emst {
        let (j, k) = edge.endpoints;
        let path = hop_shortest_path(graph, j, k).ok_or_else(|| Error::InfeasibleBackhaul {
            component_sizes: graph.components().iter().map(Vec::len).collect(),
        })?;
        for &relay in &path[1..path.len() - 1] {
            if !chosen[relay] {
                chosen[relay] = true;
                selected.push(relay);
            }
        }
    }
    let mut plan = Plan::from_selection(graph, AlgorithmTag::BackhaulGreedy, selected, Vec::new());
    plan.variant = Some(GreedyMode::Adaptive.as_str().to_string());
    plan.runtime = start.elapsed().as_secs_f64();
    Ok(plan)
}

/// Adds uniformly random distinct candidates until the selection both covers
/// every node and is backhaul-connected.
pub fn random_deploy(graph: &DeploymentGraph, seed: u64) -> Result<Plan> {
    let start = Instant::now();
    graph.check_coverage_feasible()?;
    if graph.n_nodes() > 0 {
        let comps = graph.components();
        if comps.len() > 1 {
            return Err(Error::InfeasibleBackhaul { component_sizes: comps.iter().map(Vec::len).collect() });
        }
    }
    let n = graph.n_candidates();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut added = vec![false; n];
    let mut components = 0usize;
    let mut is_covered = vec![false; graph.n_nodes()];
    let mut remaining = graph.n_nodes();
    let mut selected = Vec::new();

    for k in order {
        if remaining == 0 && components <= 1 {
            break;
        }
        added[k] = true;
        selected.push(k);
        components += 1;
        for &j in graph.neighbors(k) {
            if added[j] {
                let (a, b) = (find(&mut parent, j), find(&mut parent, k));
                if a != b {
                    parent[a] = b;
                    components -= 1;
                }
            }
        }
        for &i in graph.covered(k) {
            if !is_covered[i] {
                is_covered[i] = true;
                remaining -= 1;
            }
        }
    }
    let mut plan = Plan::from_selection(graph, AlgorithmTag::Random, selected, Vec::new());
    plan.runtime = start.elapsed().as_secs_f64();
    Ok(plan)
}
