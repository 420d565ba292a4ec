//! Reverse-greedy pruning: start from every candidate and discard the least
//! useful one at a time, fixing any whose removal would break coverage or
//! backhaul connectivity.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::netgraph::DeploymentGraph;
use crate::plan::{AlgorithmTag, Plan};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PruneStats {
    pub iterations: usize,
    pub removed: usize,
    pub fixed_for_coverage: usize,
    pub fixed_for_connectivity: usize,
}

pub fn prune(graph: &DeploymentGraph) -> Result<Plan> {
    prune_with_stats(graph).map(|(plan, _)| plan)
}

/// Runs the pruning loop. When the candidate graph is disconnected, any
/// connected cover lies inside one component, so the loop runs on each
/// component that covers every node and the smallest result wins (ties to
/// the lexicographically smaller selection). Candidates outside the chosen
/// component count as removed.
pub fn prune_with_stats(graph: &DeploymentGraph) -> Result<(Plan, PruneStats)> {
    let start = Instant::now();
    graph.check_coverage_feasible()?;
    let n = graph.n_candidates();

    if graph.n_nodes() == 0 {
        let mut plan = Plan::from_selection(graph, AlgorithmTag::Proposed, Vec::new(), Vec::new());
        plan.runtime = start.elapsed().as_secs_f64();
        let stats = PruneStats { iterations: n, removed: n, ..Default::default() };
        return Ok((plan, stats));
    }
    let components = graph.components();
    let mut best: Option<Pruned> = None;
    for component in components.iter().filter(|c| graph.coverage_complete(c)) {
        let mut in_d = vec![false; n];
        for &k in component {
            in_d[k] = true;
        }
        let run = prune_from(graph, in_d, component.len());
        let better = match &best {
            None => true,
            Some(b) => (run.selected.len(), &run.selected) < (b.selected.len(), &b.selected),
        };
        if better {
            best = Some(run);
        }
    }
    let Some(mut run) = best else {
        return Err(Error::InfeasibleBackhaul { component_sizes: components.iter().map(Vec::len).collect() });
    };
    let excluded = n - run.pool;
    run.stats.iterations += excluded;
    run.stats.removed += excluded;

    let assignment = run
        .claimed_by
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.expect("every node is claimed by the fixed candidate covering it first")))
        .collect();
    let mut plan = Plan::with_assignment(graph, AlgorithmTag::Proposed, run.selected, run.order_fixed, assignment);
    plan.runtime = start.elapsed().as_secs_f64();
    Ok((plan, run.stats))
}

struct Pruned {
    selected: Vec<usize>,
    order_fixed: Vec<usize>,
    claimed_by: Vec<Option<usize>>,
    stats: PruneStats,
    /// Size of the starting candidate pool.
    pool: usize,
}

fn prune_from(graph: &DeploymentGraph, mut in_d: Vec<bool>, pool: usize) -> Pruned {
    let n = graph.n_candidates();
    let n_nodes = graph.n_nodes();
    let mut fixed = vec![false; n];
    let mut d_size = pool;
    // Live |U_k|: users of k not yet claimed by a fixed candidate.
    let mut live: Vec<usize> = (0..n).map(|k| graph.covered(k).len()).collect();
    let mut degree: Vec<usize> =
        (0..n).map(|k| graph.neighbors(k).iter().filter(|&&j| in_d[j]).count()).collect();
    // Number of candidates in D covering each user (original access sets).
    let mut cover_count: Vec<usize> =
        (0..n_nodes).map(|i| graph.covering(i).iter().filter(|&&k| in_d[k]).count()).collect();
    let mut claimed_by: Vec<Option<usize>> = vec![None; n_nodes];
    let mut order_fixed = Vec::new();
    let mut stats = PruneStats::default();

    loop {
        let pick = (0..n)
            .filter(|&k| in_d[k] && !fixed[k])
            .min_by_key(|&k| (live[k], degree[k], k));
        let Some(u) = pick else { break };
        stats.iterations += 1;

        let breaks_coverage = graph.covered(u).iter().any(|&i| cover_count[i] == 1);
        let breaks_connectivity = !breaks_coverage && {
            in_d[u] = false;
            let rest = d_size - 1;
            let ok = match (0..n).find(|&k| in_d[k]) {
                None => true,
                Some(s) => graph.reach_count(&in_d, s) == rest,
            };
            in_d[u] = true;
            !ok
        };

        if breaks_coverage || breaks_connectivity {
            if breaks_coverage {
                stats.fixed_for_coverage += 1;
            } else {
                stats.fixed_for_connectivity += 1;
            }
            fixed[u] = true;
            order_fixed.push(u);
            for &i in graph.covered(u) {
                if claimed_by[i].is_some() {
                    continue;
                }
                claimed_by[i] = Some(u);
                for &k in graph.covering(i) {
                    if k != u && in_d[k] && !fixed[k] {
                        live[k] -= 1;
                    }
                }
            }
        } else {
            stats.removed += 1;
            in_d[u] = false;
            d_size -= 1;
            for &i in graph.covered(u) {
                cover_count[i] -= 1;
            }
            for &k in graph.neighbors(u) {
                degree[k] -= 1;
            }
        }
    }

    let selected = (0..n).filter(|&k| in_d[k]).collect();
    Pruned { selected, order_fixed, claimed_by, stats, pool }
}
