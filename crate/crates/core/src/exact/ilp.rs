//! Integer program for minimum connected coverage, written in CPLEX LP
//! format.
//!
//! Variables: `f_j` (UAV at candidate j), `b_i_j` (node i served by j, only
//! for pairs in range), `z_j_k` (backhaul link, only for pairs in range),
//! `u_j_k` (link used by the spanning topology). Links are undirected with
//! `j < k`. Connectivity is either written as explicit cycle elimination
//! over every candidate subset, or as a single-commodity flow from a root
//! chosen among the deployed UAVs (`r_j` root flag, `s_j` root supply,
//! `g_j_k` arc flow).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::DeploymentGraph;

/// Largest candidate count accepted by the subset-enumerating form.
pub const SUBTOUR_MAX_CANDIDATES: usize = 15;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectivityForm {
    #[default]
    Flow,
    Subtour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlpModel {
    pub form: ConnectivityForm,
    pub variables: Vec<(String, VarKind)>,
    pub objective: Vec<String>,
    pub constraints: Vec<Constraint>,
}

fn f(j: usize) -> String {
    format!("f_{j}")
}
fn b(i: usize, j: usize) -> String {
    format!("b_{i}_{j}")
}
fn z(j: usize, k: usize) -> String {
    format!("z_{}_{}", j.min(k), j.max(k))
}
fn u(j: usize, k: usize) -> String {
    format!("u_{}_{}", j.min(k), j.max(k))
}

struct Builder {
    model: IlpModel,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind) {
        self.model.variables.push((name, kind));
    }

    fn add(&mut self, name: String, terms: Vec<(f64, String)>, sense: Sense, rhs: f64) {
        self.model.constraints.push(Constraint { name, terms, sense, rhs });
    }
}

pub fn build_ilp(graph: &DeploymentGraph, form: ConnectivityForm) -> Result<IlpModel> {
    let n = graph.n_candidates();
    if form == ConnectivityForm::Subtour && n > SUBTOUR_MAX_CANDIDATES {
        return Err(Error::InstanceTooLarge { candidates: n, limit: SUBTOUR_MAX_CANDIDATES });
    }
    graph.check_coverage_feasible()?;
    let nf = n as f64;
    let links: Vec<(usize, usize)> = graph.backhaul_edges().collect();
    let mut bld = Builder {
        model: IlpModel { form, variables: Vec::new(), objective: (0..n).map(f).collect(), constraints: Vec::new() },
    };

    for j in 0..n {
        bld.var(f(j), VarKind::Binary);
    }
    for i in 0..graph.n_nodes() {
        for &j in graph.covering(i) {
            bld.var(b(i, j), VarKind::Binary);
        }
    }
    for &(j, k) in &links {
        bld.var(z(j, k), VarKind::Binary);
    }
    for &(j, k) in &links {
        bld.var(u(j, k), VarKind::Binary);
    }

    // Every node served; access SNR gating is the restriction of b to in-range pairs.
    for i in 0..graph.n_nodes() {
        let terms = graph.covering(i).iter().map(|&j| (1.0, b(i, j))).collect();
        bld.add(format!("cover_{i}"), terms, Sense::Ge, 1.0);
    }
    for i in 0..graph.n_nodes() {
        for &j in graph.covering(i) {
            bld.add(format!("serve_{i}_{j}"), vec![(1.0, b(i, j)), (-1.0, f(j))], Sense::Le, 0.0);
        }
    }
    // Links only between deployed UAVs; backhaul SNR gating is the
    // restriction of z to in-range pairs.
    for &(j, k) in &links {
        bld.add(format!("linka_{j}_{k}"), vec![(1.0, z(j, k)), (-1.0, f(j))], Sense::Le, 0.0);
        bld.add(format!("linkb_{j}_{k}"), vec![(1.0, z(j, k)), (-1.0, f(k))], Sense::Le, 0.0);
    }
    // A deployed UAV needs a link whenever any other UAV is deployed:
    // n * sum_k z_jk >= sum_{p != j} f_p - n * (1 - f_j).
    for j in 0..n {
        let mut terms: Vec<(f64, String)> = graph.neighbors(j).iter().map(|&k| (nf, z(j, k))).collect();
        terms.extend((0..n).filter(|&p| p != j).map(|p| (-1.0, f(p))));
        terms.push((-nf, f(j)));
        bld.add(format!("degree_{j}"), terms, Sense::Ge, -nf);
    }
    for &(j, k) in &links {
        bld.add(format!("topo_{j}_{k}"), vec![(1.0, u(j, k)), (-1.0, z(j, k))], Sense::Le, 0.0);
    }
    let mut terms: Vec<(f64, String)> = links.iter().map(|&(j, k)| (1.0, u(j, k))).collect();
    terms.extend((0..n).map(|p| (-1.0, f(p))));
    bld.add("treesize".to_string(), terms, Sense::Ge, -1.0);

    match form {
        ConnectivityForm::Subtour => {
            for mask in 1u32..(1u32 << n) {
                let size = mask.count_ones();
                if size < 2 {
                    continue;
                }
                let inside: Vec<(f64, String)> = links
                    .iter()
                    .filter(|&&(j, k)| mask & (1 << j) != 0 && mask & (1 << k) != 0)
                    .map(|&(j, k)| (1.0, u(j, k)))
                    .collect();
                if inside.is_empty() {
                    continue;
                }
                bld.add(format!("cycle_{mask:x}"), inside, Sense::Le, f64::from(size - 1));
            }
        }
        ConnectivityForm::Flow => {
            let cap = (n.saturating_sub(1)) as f64;
            for j in 0..n {
                bld.var(format!("r_{j}"), VarKind::Binary);
            }
            for j in 0..n {
                bld.var(format!("s_{j}"), VarKind::Continuous);
            }
            for &(j, k) in &links {
                bld.var(format!("g_{j}_{k}"), VarKind::Continuous);
                bld.var(format!("g_{k}_{j}"), VarKind::Continuous);
            }
            // Root supplies sum f - 1 units; every other deployed UAV absorbs one.
            for j in 0..n {
                let mut terms: Vec<(f64, String)> = Vec::new();
                for &k in graph.neighbors(j) {
                    terms.push((1.0, format!("g_{j}_{k}")));
                    terms.push((-1.0, format!("g_{k}_{j}")));
                }
                terms.push((-1.0, format!("s_{j}")));
                terms.push((1.0, f(j)));
                terms.push((-1.0, format!("r_{j}")));
                bld.add(format!("flow_{j}"), terms, Sense::Eq, 0.0);
            }
            for &(j, k) in &links {
                for (a, c) in [(j, k), (k, j)] {
                    bld.add(
                        format!("cap_{a}_{c}"),
                        vec![(1.0, format!("g_{a}_{c}")), (-cap, z(a, c))],
                        Sense::Le,
                        0.0,
                    );
                }
            }
            for j in 0..n {
                bld.add(format!("rootsel_{j}"), vec![(1.0, format!("r_{j}")), (-1.0, f(j))], Sense::Le, 0.0);
            }
            bld.add("rootmax".into(), (0..n).map(|j| (1.0, format!("r_{j}"))).collect(), Sense::Le, 1.0);
            for k in 0..n {
                let mut terms: Vec<(f64, String)> = (0..n).map(|j| (1.0, format!("r_{j}"))).collect();
                terms.push((-1.0, f(k)));
                bld.add(format!("rootany_{k}"), terms, Sense::Ge, 0.0);
            }
            for j in 0..n {
                bld.add(
                    format!("supply_{j}"),
                    vec![(1.0, format!("s_{j}")), (-cap, format!("r_{j}"))],
                    Sense::Le,
                    0.0,
                );
            }
        }
    }
    Ok(bld.model)
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn write_expr(out: &mut String, terms: &[(f64, String)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (idx, (coef, name)) in terms.iter().enumerate() {
        let sign = if *coef < 0.0 { "-" } else { "+" };
        let mag = coef.abs();
        if idx == 0 {
            if *coef < 0.0 {
                out.push_str(" -");
            }
        } else {
            let _ = write!(out, " {sign}");
        }
        if mag == 1.0 {
            let _ = write!(out, " {name}");
        } else {
            let _ = write!(out, " {} {name}", fmt_num(mag));
        }
    }
}

impl IlpModel {
    pub fn binaries(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().filter(|v| v.1 == VarKind::Binary).map(|v| v.0.as_str())
    }

    pub fn continuous(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().filter(|v| v.1 == VarKind::Continuous).map(|v| v.0.as_str())
    }

    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        let form = match self.form {
            ConnectivityForm::Flow => "flow",
            ConnectivityForm::Subtour => "subtour",
        };
        let _ = writeln!(out, "\\ minimum connected UAV coverage, {form} connectivity");
        out.push_str("Minimize\n obj:");
        let obj: Vec<(f64, String)> = self.objective.iter().map(|v| (1.0, v.clone())).collect();
        write_expr(&mut out, &obj);
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            write_expr(&mut out, &c.terms);
            let _ = writeln!(out, " {} {}", c.sense.symbol(), fmt_num(c.rhs));
        }
        let cont: Vec<&str> = self.continuous().collect();
        if !cont.is_empty() {
            out.push_str("Bounds\n");
            for v in cont {
                let _ = writeln!(out, " {v} >= 0");
            }
        }
        out.push_str("Binaries\n");
        for v in self.binaries() {
            let _ = writeln!(out, " {v}");
        }
        out.push_str("End\n");
        out
    }
}

pub fn export_ilp(graph: &DeploymentGraph, form: ConnectivityForm) -> Result<String> {
    Ok(build_ilp(graph, form)?.to_lp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> DeploymentGraph {
        DeploymentGraph::from_parts(2, vec![[0.0; 3]; 3], vec![vec![0], vec![0, 1], vec![1]], &[(0, 1), (0, 2), (1, 2)])
            .unwrap()
    }

    #[test]
    fn variable_and_constraint_counts() {
        let flow = build_ilp(&toy(), ConnectivityForm::Flow).unwrap();
        assert_eq!(flow.binaries().filter(|v| v.starts_with("f_")).count(), 3);
        assert_eq!(flow.binaries().filter(|v| v.starts_with("b_")).count(), 4);
        assert_eq!(flow.binaries().filter(|v| v.starts_with("z_") || v.starts_with("u_")).count(), 6);
        assert_eq!(flow.variables.len(), 25);
        assert_eq!(flow.constraints.len(), 38);

        let sub = build_ilp(&toy(), ConnectivityForm::Subtour).unwrap();
        assert_eq!(sub.variables.len(), 13);
        assert_eq!(sub.constraints.len(), 23);
    }

    #[test]
    fn no_out_of_range_service_variables() {
        let m = build_ilp(&toy(), ConnectivityForm::Flow).unwrap();
        let names: Vec<&str> = m.variables.iter().map(|v| v.0.as_str()).collect();
        assert!(!names.contains(&"b_0_2") && !names.contains(&"b_1_0"));
    }

    #[test]
    fn subtour_rejected_when_large() {
        let g = DeploymentGraph::from_parts(0, vec![[0.0; 3]; 16], vec![vec![]; 16], &[]).unwrap();
        assert!(matches!(
            build_ilp(&g, ConnectivityForm::Subtour),
            Err(Error::InstanceTooLarge { candidates: 16, limit: 15 })
        ));
        assert!(build_ilp(&g, ConnectivityForm::Flow).is_ok());
    }

    #[test]
    fn lp_text_shape() {
        let text = export_ilp(&toy(), ConnectivityForm::Flow).unwrap();
        assert!(text.starts_with("\\ minimum connected"));
        assert!(text.contains("Minimize\n obj: f_0 + f_1 + f_2\n"));
        assert!(text.contains(" cover_0: b_0_0 + b_0_1 >= 1\n"));
        assert!(text.contains(" degree_0: 3 z_0_1 + 3 z_0_2 - f_1 - f_2 - 3 f_0 >= -3\n"), "{text}");
        assert!(text.ends_with("End\n"));
    }
}
