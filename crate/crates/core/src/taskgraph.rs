//! Node/edge view of a task.
//!
//! Variables and constant occurrences are nodes, triplets (and decorations)
//! are edges. Depth is the undirected hop distance from the target. The
//! view exposes the expansion frontier (leaf constants) and two structural
//! pathologies:
//!
//! * redundancy: an edge joining two constants, which adds text without
//!   adding a reasoning step;
//! * reasoning shortcut: a constant hanging directly off the target while a
//!   chain of two or more variables also exists, so a solver can skip the
//!   chain.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{Constant, FormalTask, Term, Variable};
use crate::store::RelationId;

/// Identity of one constant occurrence: the triplet or decoration that
/// carries it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstantNodeId {
    Triplet(usize),
    Decoration(usize),
}

impl fmt::Display for ConstantNodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantNodeId::Triplet(i) => write!(f, "c{i}"),
            ConstantNodeId::Decoration(i) => write!(f, "d{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Target(Variable),
    Variable(Variable),
    Constant { id: ConstantNodeId, value: Constant },
}

impl Node {
    pub fn is_constant(&self) -> bool {
        matches!(self, Node::Constant { .. })
    }

    pub fn is_variable(&self) -> bool {
        !self.is_constant()
    }

    pub fn constant_id(&self) -> Option<ConstantNodeId> {
        match self {
            Node::Constant { id, .. } => Some(*id),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSource {
    Triplet(usize),
    Decoration(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub relation: RelationId,
    pub to: usize,
    pub source: EdgeSource,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskGraphError {
    #[error("triplets {orphans:?} are not connected to the target")]
    Disconnected { orphans: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    depth: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureMetrics {
    pub constant_constant_edges: usize,
    pub shortcut_count: usize,
    pub min_constant_depth: usize,
    pub max_constant_depth: usize,
    pub leaf_constants: Vec<ConstantNodeId>,
}

impl TaskGraph {
    pub fn build(task: &FormalTask) -> Result<Self, TaskGraphError> {
        let mut nodes = vec![Node::Target(task.target().clone())];
        let mut var_index: BTreeMap<&Variable, usize> = BTreeMap::new();
        var_index.insert(task.target(), 0);
        for v in task.variables() {
            var_index.entry(v).or_insert_with(|| {
                nodes.push(Node::Variable(v.clone()));
                nodes.len() - 1
            });
        }
        let mut edges = Vec::with_capacity(task.triplets().len() + task.decorations().len());
        let mut triplet_constant = BTreeMap::new();
        for (i, t) in task.triplets().iter().enumerate() {
            let from = var_index[&t.subject];
            let to = match &t.object {
                Term::Variable(v) => var_index[v],
                Term::Constant(c) => {
                    nodes.push(Node::Constant { id: ConstantNodeId::Triplet(i), value: c.clone() });
                    triplet_constant.insert(i, nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            edges.push(Edge { from, relation: t.relation.clone(), to, source: EdgeSource::Triplet(i) });
        }
        for (i, d) in task.decorations().iter().enumerate() {
            let from = triplet_constant[&d.anchor];
            nodes.push(Node::Constant { id: ConstantNodeId::Decoration(i), value: d.object.clone() });
            edges.push(Edge {
                from,
                relation: d.relation.clone(),
                to: nodes.len() - 1,
                source: EdgeSource::Decoration(i),
            });
        }
        let depth = bfs_depths(nodes.len(), &edges);
        let orphans: Vec<usize> = edges
            .iter()
            .filter(|e| depth[e.from] == usize::MAX)
            .filter_map(|e| match e.source {
                EdgeSource::Triplet(i) => Some(i),
                EdgeSource::Decoration(_) => None,
            })
            .collect();
        if !orphans.is_empty() {
            return Err(TaskGraphError::Disconnected { orphans });
        }
        Ok(Self { nodes, edges, depth })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    pub fn target(&self) -> usize {
        0
    }

    pub fn constant_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_constant()).count()
    }

    pub fn variable_count(&self) -> usize {
        self.nodes.len() - self.constant_count()
    }

    /// Node index of a constant occurrence.
    pub fn constant_node(&self, id: ConstantNodeId) -> Option<usize> {
        self.nodes.iter().position(|n| n.constant_id() == Some(id))
    }

    pub fn constant_depth(&self, id: ConstantNodeId) -> Option<usize> {
        self.constant_node(id).map(|i| self.depth[i])
    }

    /// Every constant node, deepest first, ties broken by id.
    pub fn leaf_constants(&self) -> Vec<ConstantNodeId> {
        let mut out: Vec<(usize, ConstantNodeId)> = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.constant_id().map(|id| (self.depth[i], id)))
            .collect();
        out.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        out.into_iter().map(|(_, id)| id).collect()
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |e| {
            if e.from == node {
                Some(e.to)
            } else if e.to == node {
                Some(e.from)
            } else {
                None
            }
        })
    }

    pub fn metrics(&self) -> StructureMetrics {
        let constant_constant_edges =
            self.edges.iter().filter(|e| self.nodes[e.from].is_constant() && self.nodes[e.to].is_constant()).count();
        let deep_chain = self.nodes.iter().enumerate().any(|(i, n)| n.is_variable() && self.depth[i] >= 2);
        let shortcut_count = if deep_chain {
            let mut adjacent: Vec<usize> = self.neighbors(0).filter(|&n| self.nodes[n].is_constant()).collect();
            adjacent.sort_unstable();
            adjacent.dedup();
            adjacent.len()
        } else {
            0
        };
        let constant_depths: Vec<usize> =
            self.nodes.iter().enumerate().filter(|(_, n)| n.is_constant()).map(|(i, _)| self.depth[i]).collect();
        StructureMetrics {
            constant_constant_edges,
            shortcut_count,
            min_constant_depth: constant_depths.iter().copied().min().unwrap_or(0),
            max_constant_depth: constant_depths.iter().copied().max().unwrap_or(0),
            leaf_constants: self.leaf_constants(),
        }
    }

    /// Graphviz rendering: boxes for constants, ellipses for variables and
    /// a double ellipse for the target.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph task {\n  rankdir=LR;\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let (label, shape) = match n {
                Node::Target(v) => (format!("V@{v}"), "doubleellipse"),
                Node::Variable(v) => (format!("V@{v}"), "ellipse"),
                Node::Constant { value, .. } => (
                    value.elements().iter().map(|e| e.as_str()).collect::<Vec<_>>().join(" | "),
                    "box",
                ),
            };
            let _ = writeln!(out, "  n{i} [label=\"{}\", shape={shape}];", dot_escape(&label));
        }
        for e in &self.edges {
            let style = if matches!(e.source, EdgeSource::Decoration(_)) { ", style=dashed" } else { "" };
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"{style}];", e.from, e.to, dot_escape(e.relation.as_str()));
        }
        out.push_str("}\n");
        out
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn bfs_depths(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.from].push(e.to);
        adj[e.to].push(e.from);
    }
    let mut depth = vec![usize::MAX; n];
    depth[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    depth
}

/// Builds the task graph; see [`TaskGraph::build`].
pub fn build_graph(task: &FormalTask) -> Result<TaskGraph, TaskGraphError> {
    TaskGraph::build(task)
}
