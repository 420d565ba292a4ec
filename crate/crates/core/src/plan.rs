//! Deployment plans, their on-disk form, and independent verification.

use std::collections::VecDeque;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::DeploymentGraph;

pub const PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmTag {
    Proposed,
    #[serde(alias = "greedy")]
    GreedyNoBackhaul,
    #[serde(alias = "bag")]
    BackhaulGreedy,
    Random,
    #[serde(alias = "optimal")]
    Exact,
}

impl AlgorithmTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmTag::Proposed => "proposed",
            AlgorithmTag::GreedyNoBackhaul => "greedy_no_backhaul",
            AlgorithmTag::BackhaulGreedy => "backhaul_greedy",
            AlgorithmTag::Random => "random",
            AlgorithmTag::Exact => "exact",
        }
    }

    /// Everything except plain greedy must return a connected backhaul.
    pub fn requires_backhaul(&self) -> bool {
        !matches!(self, AlgorithmTag::GreedyNoBackhaul)
    }
}

impl fmt::Display for AlgorithmTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "proposed" => AlgorithmTag::Proposed,
            "greedy" | "greedy_no_backhaul" => AlgorithmTag::GreedyNoBackhaul,
            "backhaul_greedy" | "bag" => AlgorithmTag::BackhaulGreedy,
            "random" => AlgorithmTag::Random,
            "exact" | "optimal" => AlgorithmTag::Exact,
            other => return Err(Error::InvalidParameter(format!("unknown algorithm '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub algorithm_tag: AlgorithmTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    /// Selected candidate ids, ascending.
    pub selected: Vec<usize>,
    /// Candidates the algorithm proved indispensable.
    pub fixed: Vec<usize>,
    /// `(ground node, serving candidate)`, one per node, ascending by node.
    pub assignment: Vec<(usize, usize)>,
    /// Backhaul links `(j, k)`, `j < k`, spanning the selected set.
    pub backhaul_topology: Vec<(usize, usize)>,
    pub connected: bool,
    /// Wall-clock seconds spent in the algorithm.
    pub runtime: f64,
}

#[derive(Serialize)]
struct PlanDocRef<'a> {
    schema_version: u32,
    #[serde(flatten)]
    plan: &'a Plan,
}

#[derive(Deserialize)]
struct PlanDoc {
    schema_version: u32,
    #[serde(flatten)]
    plan: Plan,
}

impl Plan {
    /// Builds a plan from a selection, filling in the canonical witnesses:
    /// each node served by its lowest-id selected coverer, and a BFS
    /// spanning forest of the induced backhaul graph.
    pub fn from_selection(
        graph: &DeploymentGraph,
        algorithm_tag: AlgorithmTag,
        mut selected: Vec<usize>,
        fixed: Vec<usize>,
    ) -> Self {
        selected.sort_unstable();
        selected.dedup();
        let mut in_sel = vec![false; graph.n_candidates()];
        for &k in &selected {
            in_sel[k] = true;
        }
        let assignment = (0..graph.n_nodes())
            .filter_map(|i| graph.covering(i).iter().find(|&&k| in_sel[k]).map(|&k| (i, k)))
            .collect();
        Self::with_assignment(graph, algorithm_tag, selected, fixed, assignment)
    }

    pub fn with_assignment(
        graph: &DeploymentGraph,
        algorithm_tag: AlgorithmTag,
        mut selected: Vec<usize>,
        mut fixed: Vec<usize>,
        mut assignment: Vec<(usize, usize)>,
    ) -> Self {
        selected.sort_unstable();
        selected.dedup();
        fixed.sort_unstable();
        assignment.sort_unstable();
        let backhaul_topology = spanning_forest(graph, &selected);
        let connected = graph.is_connected(&selected);
        Self {
            algorithm_tag,
            variant: None,
            selected,
            fixed,
            assignment,
            backhaul_topology,
            connected,
            runtime: 0.0,
        }
    }

    /// Equality on everything except the measured runtime.
    pub fn same_solution(&self, other: &Plan) -> bool {
        Plan { runtime: other.runtime, ..self.clone() } == *other
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PlanDocRef { schema_version: PLAN_SCHEMA_VERSION, plan: self })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PlanDoc = serde_json::from_str(text)?;
        if doc.schema_version != PLAN_SCHEMA_VERSION {
            return Err(Error::VersionMismatch { found: doc.schema_version, expected: PLAN_SCHEMA_VERSION });
        }
        Ok(doc.plan)
    }
}

pub fn save_plan(plan: &Plan, path: impl AsRef<Path>) -> Result<()> {
    let mut text = plan.to_json()?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_plan(path: impl AsRef<Path>) -> Result<Plan> {
    Plan::from_json(&fs::read_to_string(path)?)
}

fn spanning_forest(graph: &DeploymentGraph, selected: &[usize]) -> Vec<(usize, usize)> {
    let mut in_sel = vec![false; graph.n_candidates()];
    for &k in selected {
        in_sel[k] = true;
    }
    let mut seen = vec![false; graph.n_candidates()];
    let mut edges = Vec::new();
    for &root in selected {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(j) = queue.pop_front() {
            for &k in graph.neighbors(j) {
                if in_sel[k] && !seen[k] {
                    seen[k] = true;
                    edges.push((j.min(k), j.max(k)));
                    queue.push_back(k);
                }
            }
        }
    }
    edges.sort_unstable();
    edges
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Whether a failure invalidates the plan.
    pub required: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.required)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| c.required && !c.passed).collect()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = match (c.passed, c.required) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "note",
            };
            writeln!(f, "{status:>4}  {:<14} {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Recomputes every plan invariant from the graph alone.
pub fn verify_plan(graph: &DeploymentGraph, plan: &Plan) -> VerifyReport {
    let n = graph.n_candidates();
    let mut checks = Vec::new();

    let mut id_problems = Vec::new();
    let mut in_sel = vec![false; n];
    for &k in &plan.selected {
        if k >= n {
            id_problems.push(format!("candidate {k} out of range"));
        } else if in_sel[k] {
            id_problems.push(format!("candidate {k} selected twice"));
        } else {
            in_sel[k] = true;
        }
    }
    for &k in &plan.fixed {
        if k >= n || !in_sel[k] {
            id_problems.push(format!("fixed candidate {k} not selected"));
        }
    }
    let ids_ok = id_problems.is_empty();
    checks.push(CheckResult {
        name: "candidate_ids",
        passed: ids_ok,
        required: true,
        detail: if ids_ok { format!("{} selected", plan.selected.len()) } else { id_problems.join("; ") },
    });
    let selected: Vec<usize> = plan.selected.iter().copied().filter(|&k| k < n).collect();

    let uncovered = graph.uncovered(&selected);
    checks.push(CheckResult {
        name: "coverage",
        passed: uncovered.is_empty(),
        required: true,
        detail: if uncovered.is_empty() {
            format!("all {} ground nodes covered", graph.n_nodes())
        } else {
            format!("uncovered nodes {uncovered:?}")
        },
    });

    let connected = graph.is_connected(&selected);
    checks.push(CheckResult {
        name: "connectivity",
        passed: connected && connected == plan.connected,
        required: plan.algorithm_tag.requires_backhaul() || connected != plan.connected,
        detail: format!("induced backhaul connected: {connected}; recorded: {}", plan.connected),
    });

    let mut assign_problems = Vec::new();
    let mut assigned = vec![0usize; graph.n_nodes()];
    for &(i, k) in &plan.assignment {
        if i >= graph.n_nodes() {
            assign_problems.push(format!("unknown node {i}"));
            continue;
        }
        assigned[i] += 1;
        if k >= n || !in_sel[k] {
            assign_problems.push(format!("node {i} assigned to unselected candidate {k}"));
        } else if graph.covered(k).binary_search(&i).is_err() {
            assign_problems.push(format!("node {i} assigned to non-covering candidate {k}"));
        }
    }
    for (i, &c) in assigned.iter().enumerate() {
        if c != 1 {
            assign_problems.push(format!("node {i} assigned {c} times"));
        }
    }
    checks.push(CheckResult {
        name: "assignment",
        passed: assign_problems.is_empty(),
        required: true,
        detail: if assign_problems.is_empty() { "every node served once".into() } else { assign_problems.join("; ") },
    });

    let mut topo_problems = Vec::new();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(j, k) in &plan.backhaul_topology {
        if j >= n || k >= n || !in_sel[j] || !in_sel[k] {
            topo_problems.push(format!("link ({j}, {k}) leaves the selected set"));
        } else if !graph.has_backhaul(j, k) {
            topo_problems.push(format!("link ({j}, {k}) is not a backhaul edge"));
        } else {
            let (a, b) = (find(&mut parent, j), find(&mut parent, k));
            parent[a] = b;
        }
    }
    if plan.algorithm_tag.requires_backhaul() && topo_problems.is_empty() {
        let mut roots: Vec<usize> = selected.iter().map(|&k| find(&mut parent, k)).collect();
        roots.sort_unstable();
        roots.dedup();
        if roots.len() > 1 {
            topo_problems.push(format!("topology splits the selection into {} parts", roots.len()));
        }
    }
    checks.push(CheckResult {
        name: "topology",
        passed: topo_problems.is_empty(),
        required: true,
        detail: if topo_problems.is_empty() {
            format!("{} links", plan.backhaul_topology.len())
        } else {
            topo_problems.join("; ")
        },
    });

    VerifyReport { checks }
}
