//! Bipartite access graph plus the candidate backhaul graph, and the
//! coverage / connectivity predicates every solver relies on.

use std::collections::VecDeque;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Access sets `U_k`, backhaul adjacency among candidates, and candidate
/// positions. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentGraph {
    n_nodes: usize,
    positions: Vec<[f64; 3]>,
    covered: Vec<Vec<usize>>,
    covering: Vec<Vec<usize>>,
    backhaul: Vec<Vec<usize>>,
}

pub fn build_graph(scenario: &Scenario) -> DeploymentGraph {
    let r2 = scenario.geometry.ground_radius * scenario.geometry.ground_radius;
    let rb2 = scenario.geometry.backhaul_radius * scenario.geometry.backhaul_radius;
    let positions: Vec<[f64; 3]> = scenario.candidates.iter().map(|c| [c.x, c.y, c.h]).collect();
    let n_nodes = scenario.nodes.len();

    let mut covered = vec![Vec::new(); positions.len()];
    let mut nodes: Vec<_> = scenario.nodes.iter().collect();
    nodes.sort_by_key(|n| n.id);
    for node in nodes {
        for (k, p) in positions.iter().enumerate() {
            let (dx, dy) = (p[0] - node.x, p[1] - node.y);
            if dx * dx + dy * dy <= r2 {
                covered[k].push(node.id);
            }
        }
    }

    let mut backhaul = vec![Vec::new(); positions.len()];
    for j in 0..positions.len() {
        for k in j + 1..positions.len() {
            if dist2(&positions[j], &positions[k]) <= rb2 {
                backhaul[j].push(k);
                backhaul[k].push(j);
            }
        }
    }
    for adj in &mut backhaul {
        adj.sort_unstable();
    }
    DeploymentGraph::assemble(n_nodes, positions, covered, backhaul)
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl DeploymentGraph {
    fn assemble(
        n_nodes: usize,
        positions: Vec<[f64; 3]>,
        covered: Vec<Vec<usize>>,
        backhaul: Vec<Vec<usize>>,
    ) -> Self {
        let mut covering = vec![Vec::new(); n_nodes];
        for (k, set) in covered.iter().enumerate() {
            for &i in set {
                covering[i].push(k);
            }
        }
        Self { n_nodes, positions, covered, covering, backhaul }
    }

    /// Builds a graph from explicit access sets and backhaul pairs, for
    /// hand-made instances.
    pub fn from_parts(
        n_nodes: usize,
        positions: Vec<[f64; 3]>,
        covered: Vec<Vec<usize>>,
        backhaul_pairs: &[(usize, usize)],
    ) -> Result<Self> {
        let n = positions.len();
        if covered.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} access sets for {n} candidates",
                covered.len()
            )));
        }
        let mut covered = covered;
        for set in &mut covered {
            set.sort_unstable();
            set.dedup();
            if let Some(&bad) = set.iter().find(|&&i| i >= n_nodes) {
                return Err(Error::InvalidParameter(format!("ground node {bad} out of range")));
            }
        }
        let mut backhaul = vec![Vec::new(); n];
        for &(j, k) in backhaul_pairs {
            if j == k || j >= n || k >= n {
                return Err(Error::InvalidParameter(format!("bad backhaul pair ({j}, {k})")));
            }
            backhaul[j].push(k);
            backhaul[k].push(j);
        }
        for adj in &mut backhaul {
            adj.sort_unstable();
            adj.dedup();
        }
        Ok(Self::assemble(n_nodes, positions, covered, backhaul))
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_candidates(&self) -> usize {
        self.positions.len()
    }

    /// Ground nodes served from candidate `k` (sorted).
    pub fn covered(&self, k: usize) -> &[usize] {
        &self.covered[k]
    }

    /// Candidates able to serve ground node `i` (sorted).
    pub fn covering(&self, i: usize) -> &[usize] {
        &self.covering[i]
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.backhaul[k]
    }

    pub fn has_backhaul(&self, j: usize, k: usize) -> bool {
        self.backhaul[j].binary_search(&k).is_ok()
    }

    pub fn position(&self, k: usize) -> [f64; 3] {
        self.positions[k]
    }

    pub fn distance(&self, j: usize, k: usize) -> f64 {
        dist2(&self.positions[j], &self.positions[k]).sqrt()
    }

    /// Access edges as `(candidate, node)` pairs.
    pub fn access_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.covered.iter().enumerate().flat_map(|(k, set)| set.iter().map(move |&i| (k, i)))
    }

    /// Backhaul edges as `(j, k)` with `j < k`.
    pub fn backhaul_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.backhaul
            .iter()
            .enumerate()
            .flat_map(|(j, adj)| adj.iter().filter(move |&&k| k > j).map(move |&k| (j, k)))
    }

    fn mask(&self, subset: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.n_candidates()];
        for &k in subset {
            mask[k] = true;
        }
        mask
    }

    /// Whether the backhaul graph induced on `subset` is connected. Empty and
    /// single-element subsets count as connected.
    pub fn is_connected(&self, subset: &[usize]) -> bool {
        self.is_connected_mask(&self.mask(subset))
    }

    pub(crate) fn is_connected_mask(&self, mask: &[bool]) -> bool {
        let members = mask.iter().filter(|&&m| m).count();
        match mask.iter().position(|&m| m) {
            None => true,
            Some(start) => self.reach_count(mask, start) == members,
        }
    }

    /// Number of `mask` members reachable from `start` inside the mask.
    pub(crate) fn reach_count(&self, mask: &[bool], start: usize) -> usize {
        let mut seen = vec![false; mask.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 1;
        while let Some(j) = queue.pop_front() {
            for &k in &self.backhaul[j] {
                if mask[k] && !seen[k] {
                    seen[k] = true;
                    count += 1;
                    queue.push_back(k);
                }
            }
        }
        count
    }

    /// Ground nodes outside the union of `U_k` over `subset`.
    pub fn uncovered(&self, subset: &[usize]) -> Vec<usize> {
        let mut hit = vec![false; self.n_nodes];
        for &k in subset {
            for &i in &self.covered[k] {
                hit[i] = true;
            }
        }
        (0..self.n_nodes).filter(|&i| !hit[i]).collect()
    }

    pub fn coverage_complete(&self, subset: &[usize]) -> bool {
        self.uncovered(subset).is_empty()
    }

    /// Connected components of the full candidate backhaul graph, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n_candidates();
        let mut label = vec![usize::MAX; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut comp = vec![s];
            label[s] = id;
            let mut head = 0;
            while head < comp.len() {
                let j = comp[head];
                head += 1;
                for &k in &self.backhaul[j] {
                    if label[k] == usize::MAX {
                        label[k] = id;
                        comp.push(k);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Fails unless every ground node has at least one covering candidate.
    pub fn check_coverage_feasible(&self) -> Result<()> {
        let orphans: Vec<usize> = (0..self.n_nodes).filter(|&i| self.covering[i].is_empty()).collect();
        if orphans.is_empty() {
            Ok(())
        } else {
            Err(Error::InfeasibleCoverage { node_ids: orphans })
        }
    }

    /// Fails unless some connected covering subset exists, i.e. one
    /// backhaul component covers every ground node.
    pub fn check_backhaul_feasible(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Ok(());
        }
        let comps = self.components();
        if comps.iter().any(|c| self.coverage_complete(c)) {
            Ok(())
        } else {
            Err(Error::InfeasibleBackhaul { component_sizes: comps.iter().map(Vec::len).collect() })
        }
    }

    /// Edge list dump: `A k i` per access edge, `B j k` per backhaul edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, i) in self.access_edges() {
            writeln!(out, "A {k} {i}")?;
        }
        for (j, k) in self.backhaul_edges() {
            writeln!(out, "B {j} {k}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;
    use proptest::prelude::*;

    fn line_graph(n: usize, spacing: f64, radius: f64) -> DeploymentGraph {
        let positions: Vec<[f64; 3]> = (0..n).map(|i| [i as f64 * spacing, 0.0, 100.0]).collect();
        let mut pairs = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                if (k - j) as f64 * spacing <= radius {
                    pairs.push((j, k));
                }
            }
        }
        DeploymentGraph::from_parts(0, positions, vec![Vec::new(); n], &pairs).unwrap()
    }

    fn small_scenario(seed: u64) -> crate::scenario::Scenario {
        ScenarioConfig { area_width: 9000.0, area_height: 9000.0, n_users: 50, ..Default::default() }
            .generate(seed)
            .unwrap()
    }

    #[test]
    fn boundary_distance_counts_as_connected() {
        let mut s = small_scenario(3);
        s.candidates.truncate(2);
        s.candidates[0].x = 100.0;
        s.candidates[1].x = 100.0 + s.geometry.backhaul_radius;
        s.candidates[0].y = 0.0;
        s.candidates[1].y = 0.0;
        s.area_width = 1.0e6;
        let g = build_graph(&s);
        assert!(g.has_backhaul(0, 1));
    }

    #[test]
    fn far_user_is_uncovered() {
        let mut s = small_scenario(4);
        let r = s.geometry.ground_radius;
        s.candidates.truncate(1);
        s.candidates[0].x = 0.0;
        s.candidates[0].y = 0.0;
        s.nodes.truncate(1);
        s.nodes[0].x = r + 1.0;
        s.nodes[0].y = 0.0;
        let g = build_graph(&s);
        assert!(g.covered(0).is_empty());
        assert_eq!(g.uncovered(&[0]), vec![0]);
    }

    #[test]
    fn edges_match_all_pairs_oracle() {
        let s = small_scenario(11);
        let g = build_graph(&s);
        let (r, rb) = (s.geometry.ground_radius, s.geometry.backhaul_radius);
        for c in &s.candidates {
            for n in &s.nodes {
                let inside = ((c.x - n.x).powi(2) + (c.y - n.y).powi(2)).sqrt() <= r;
                assert_eq!(inside, g.covered(c.id).contains(&n.id));
                assert_eq!(inside, g.covering(n.id).contains(&c.id));
            }
            for d in &s.candidates {
                let near = c.id != d.id
                    && ((c.x - d.x).powi(2) + (c.y - d.y).powi(2) + (c.h - d.h).powi(2)).sqrt() <= rb;
                assert_eq!(near, g.has_backhaul(c.id, d.id));
            }
        }
    }

    #[test]
    fn access_matches_snr_threshold() {
        use crate::channel::{access_path_loss, snr};
        let s = ScenarioConfig {
            area_width: 30_000.0,
            area_height: 30_000.0,
            n_users: 80,
            geometry: crate::scenario::GeometrySource::FixedAltitude { altitude: 1500.0 },
            ..Default::default()
        }
        .generate(8)
        .unwrap();
        let g = build_graph(&s);
        let mut checked = 0;
        for c in &s.candidates {
            for n in &s.nodes {
                let horiz = (c.x - n.x).hypot(c.y - n.y);
                // Skip pairs inside the bisection resolution band.
                if (horiz - s.geometry.ground_radius).abs() < 0.2 {
                    continue;
                }
                let ok = snr(&s.channel, access_path_loss(&s.channel, horiz, c.h).unwrap()).unwrap()
                    >= s.thresholds.access_snr_min;
                assert_eq!(ok, g.covered(c.id).contains(&n.id));
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn graph_independent_of_node_order() {
        let s = small_scenario(21);
        let mut shuffled = s.clone();
        shuffled.nodes.reverse();
        assert_eq!(build_graph(&s), build_graph(&shuffled));
    }

    #[test]
    fn connectivity_conventions() {
        let g = line_graph(3, 10.0, 10.0);
        assert!(g.is_connected(&[]));
        assert!(g.is_connected(&[2]));
        assert!(g.is_connected(&[0, 1, 2]));
        assert!(!g.is_connected(&[0, 2]));
    }

    #[test]
    fn empty_subset_leaves_everyone_uncovered() {
        let s = small_scenario(5);
        let g = build_graph(&s);
        assert_eq!(g.uncovered(&[]).len(), s.nodes.len());
        assert!(!g.coverage_complete(&[]));
        let all: Vec<usize> = (0..g.n_candidates()).collect();
        assert!(g.coverage_complete(&all));
    }

    #[test]
    fn edge_list_dump() {
        let g = DeploymentGraph::from_parts(2, vec![[0.0; 3]; 2], vec![vec![0], vec![0, 1]], &[(0, 1)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "A 0 0\nA 1 0\nA 1 1\nB 0 1\n");
    }

    // Union-find oracle for induced connectivity.
    fn uf_connected(g: &DeploymentGraph, subset: &[usize]) -> bool {
        let mut parent: Vec<usize> = (0..g.n_candidates()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            r
        }
        for (j, k) in g.backhaul_edges() {
            if subset.contains(&j) && subset.contains(&k) {
                let (a, b) = (find(&mut parent, j), find(&mut parent, k));
                parent[a] = b;
            }
        }
        let mut roots: Vec<usize> = subset.iter().map(|&k| find(&mut parent, k)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len() <= 1
    }

    proptest! {
        #[test]
        fn predicates_match_oracles(seed in 0u64..500, picks in proptest::collection::vec(0usize..16, 0..10)) {
            let mut s = small_scenario(seed);
            s.thresholds.backhaul_snr_min = 24.0;
            s.geometry = s.geometry_source.resolve(&s.channel, &s.thresholds).unwrap();
            let g = build_graph(&s);
            let mut subset = picks.clone();
            subset.sort_unstable();
            subset.dedup();
            prop_assert_eq!(g.is_connected(&subset), uf_connected(&g, &subset));
            let naive: Vec<usize> = (0..g.n_nodes())
                .filter(|&i| !subset.iter().any(|&k| g.covered(k).contains(&i)))
                .collect();
            prop_assert_eq!(g.uncovered(&subset), naive);
        }

        #[test]
        fn coverage_is_monotone(seed in 0u64..200, picks in proptest::collection::vec(0usize..16, 0..16), extra in 0usize..16) {
            let g = build_graph(&small_scenario(seed));
            let mut subset = picks;
            subset.sort_unstable();
            subset.dedup();
            if g.coverage_complete(&subset) {
                subset.push(extra);
                prop_assert!(g.coverage_complete(&subset));
            }
        }
    }
}
