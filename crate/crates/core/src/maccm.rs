//! Message plans for arbitrary single-hop networks: the layered directed
//! graph of message sets indexed by transmitter subsets, plus the fixed
//! codeword graph of the BCCR superposition scheme.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::variable::VariableId;

/// A message label: sent by the transmitters in `delta`, destined for the
/// receivers in `nabla`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MessageLabel {
    pub delta: BTreeSet<u32>,
    pub nabla: BTreeSet<u32>,
}

impl MessageLabel {
    pub fn new(delta: &[u32], nabla: &[u32]) -> Self {
        MessageLabel {
            delta: delta.iter().copied().collect(),
            nabla: nabla.iter().copied().collect(),
        }
    }
}

/// A single-hop network: transmitter and receiver counts plus its message
/// set, at most one message per (delta, nabla) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub k1: u32,
    pub k2: u32,
    pub messages: Vec<MessageLabel>,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k1 == 0 || self.k2 == 0 {
            return Err(Error::InvalidArgument(
                "network needs at least one transmitter and one receiver".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for m in &self.messages {
            if m.delta.is_empty() || m.nabla.is_empty() {
                return Err(Error::InvalidArgument(
                    "message labels need nonempty transmitter and receiver sets".into(),
                ));
            }
            if m.delta.iter().any(|&i| i == 0 || i > self.k1)
                || m.nabla.iter().any(|&j| j == 0 || j > self.k2)
            {
                return Err(Error::InvalidArgument(format!(
                    "message label out of range for a {}x{} network: {m:?}",
                    self.k1, self.k2
                )));
            }
            if !seen.insert((m.delta.clone(), m.nabla.clone())) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate message label {m:?}"
                )));
            }
        }
        // Coverage: every message is sent by some transmitter and decoded by
        // some receiver. Nonempty labels make this hold by construction.
        debug_assert!(self
            .messages
            .iter()
            .all(|m| !m.delta.is_empty() && !m.nabla.is_empty()));
        Ok(())
    }
}

/// One node of the plan: the set of messages sharing a transmitter subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanNode {
    pub delta: BTreeSet<u32>,
    /// Column index |delta|, 1-based.
    pub column: usize,
    pub messages: Vec<MessageLabel>,
}

/// The layered plan graph: nodes are nonempty message sets per transmitter
/// subset; each edge drops exactly one column toward a contained subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanGraph {
    pub nodes: Vec<PlanNode>,
    /// Directed edges as (from, to) node indices.
    pub edges: Vec<(usize, usize)>,
}

/// Groups messages by transmitter subset and connects adjacent columns.
pub fn build_plan(spec: &NetworkSpec) -> Result<PlanGraph> {
    spec.validate()?;
    let mut deltas: Vec<BTreeSet<u32>> = Vec::new();
    for m in &spec.messages {
        if !deltas.contains(&m.delta) {
            deltas.push(m.delta.clone());
        }
    }
    // Deterministic ordering: by column, then lexicographically.
    deltas.sort_by_key(|d| (d.len(), d.iter().copied().collect::<Vec<_>>()));
    let nodes: Vec<PlanNode> = deltas
        .iter()
        .map(|d| {
            let mut messages: Vec<MessageLabel> = spec
                .messages
                .iter()
                .filter(|m| &m.delta == d)
                .cloned()
                .collect();
            messages.sort();
            PlanNode {
                delta: d.clone(),
                column: d.len(),
                messages,
            }
        })
        .collect();
    let mut edges = Vec::new();
    for (i, from) in nodes.iter().enumerate() {
        for (j, to) in nodes.iter().enumerate() {
            if from.column == to.column + 1 && to.delta.is_subset(&from.delta) {
                edges.push((i, j));
            }
        }
    }
    Ok(PlanGraph { nodes, edges })
}

impl PlanGraph {
    pub fn to_digraph(&self) -> Digraph {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let parts: Vec<String> = n.delta.iter().map(|i| i.to_string()).collect();
                format!("M{{{}}}", parts.join(","))
            })
            .collect();
        Digraph {
            nodes,
            edges: self.edges.clone(),
        }
    }
}

/// A plain labeled directed graph, the export format for both the plan and
/// the codeword graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digraph {
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize)>,
}

impl Digraph {
    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == label)
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm.
        let mut indeg = vec![0usize; self.nodes.len()];
        for &(_, to) in &self.edges {
            indeg[to] += 1;
        }
        let mut queue: Vec<usize> = (0..self.nodes.len()).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop() {
            seen += 1;
            for &(from, to) in &self.edges {
                if from == i {
                    indeg[to] -= 1;
                    if indeg[to] == 0 {
                        queue.push(to);
                    }
                }
            }
        }
        seen == self.nodes.len()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph plan {\n");
        for n in &self.nodes {
            out.push_str(&format!("  \"{n}\";\n"));
        }
        for &(from, to) in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\";\n",
                self.nodes[from], self.nodes[to]
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Superposition parents (cloud centers) of each codeword class in the
/// BCCR scheme, matching the proof's generation order.
pub fn superposition_parents(node: VariableId) -> &'static [VariableId] {
    use VariableId::*;
    match node {
        W1 | W2 => &[],
        U1 => &[W1],
        V2 => &[W2],
        WB => &[W1, W2],
        UB => &[W1, W2, WB, U1],
        VB => &[W1, W2, WB, V2],
        X1 => &[W1, U1],
        X2 => &[W2, V2],
        XB => &[X1, W1, U1, X2, W2, V2, WB, UB, VB],
        Q | Y1 | Y2 => &[],
    }
}

/// Codeword nodes of the BCCR scheme, in generation order.
pub const BCCR_NODES: [VariableId; 10] = {
    use VariableId::*;
    [W1, U1, X1, W2, V2, X2, WB, UB, VB, XB]
};

/// The fixed directed codeword graph of the BCCR scheme: an edge runs from
/// each cloud center to its satellite.
pub fn bccr_graph() -> Digraph {
    let nodes: Vec<String> = BCCR_NODES.iter().map(|v| v.name().to_string()).collect();
    let mut edges = Vec::new();
    for (to, &node) in BCCR_NODES.iter().enumerate() {
        for &parent in superposition_parents(node) {
            let from = BCCR_NODES.iter().position(|&n| n == parent).unwrap();
            edges.push((from, to));
        }
    }
    Digraph { nodes, edges }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_message_plan_has_one_node_no_edges() {
        let spec = NetworkSpec {
            k1: 1,
            k2: 1,
            messages: vec![MessageLabel::new(&[1], &[1])],
        };
        let plan = build_plan(&spec).unwrap();
        assert_eq!(plan.nodes.len(), 1);
        assert!(plan.edges.is_empty());
    }

    #[test]
    fn mac_with_common_message_plan() {
        let spec = NetworkSpec {
            k1: 2,
            k2: 1,
            messages: vec![
                MessageLabel::new(&[1], &[1]),
                MessageLabel::new(&[2], &[1]),
                MessageLabel::new(&[1, 2], &[1]),
            ],
        };
        let plan = build_plan(&spec).unwrap();
        assert_eq!(plan.nodes.len(), 3);
        assert_eq!(plan.edges.len(), 2);
        // One-receiver networks put at most one message in each node.
        assert!(plan.nodes.iter().all(|n| n.messages.len() <= 1));
        let g = plan.to_digraph();
        let common = g.node_index("M{1,2}").unwrap();
        assert!(g.edges.contains(&(common, g.node_index("M{1}").unwrap())));
        assert!(g.edges.contains(&(common, g.node_index("M{2}").unwrap())));
        assert!(g.is_acyclic());
    }

    #[test]
    fn singleton_deltas_make_isolated_column_one_nodes() {
        let spec = NetworkSpec {
            k1: 3,
            k2: 2,
            messages: vec![
                MessageLabel::new(&[1], &[1]),
                MessageLabel::new(&[2], &[2]),
                MessageLabel::new(&[3], &[1, 2]),
            ],
        };
        let plan = build_plan(&spec).unwrap();
        assert_eq!(plan.nodes.len(), 3);
        assert!(plan.edges.is_empty());
        assert!(plan.nodes.iter().all(|n| n.column == 1));
    }

    #[test]
    fn two_receiver_nodes_hold_at_most_three_messages() {
        let spec = NetworkSpec {
            k1: 2,
            k2: 2,
            messages: vec![
                MessageLabel::new(&[1, 2], &[1]),
                MessageLabel::new(&[1, 2], &[2]),
                MessageLabel::new(&[1, 2], &[1, 2]),
                MessageLabel::new(&[1], &[1]),
            ],
        };
        let plan = build_plan(&spec).unwrap();
        assert!(plan.nodes.iter().all(|n| n.messages.len() <= 3));
        // Edges drop exactly one column.
        for &(from, to) in &plan.edges {
            assert_eq!(plan.nodes[from].column, plan.nodes[to].column + 1);
        }
    }

    #[test]
    fn invalid_networks_are_rejected() {
        let spec = NetworkSpec {
            k1: 1,
            k2: 1,
            messages: vec![MessageLabel::new(&[2], &[1])],
        };
        assert!(build_plan(&spec).is_err());
        let spec = NetworkSpec {
            k1: 1,
            k2: 1,
            messages: vec![MessageLabel::new(&[1], &[1]), MessageLabel::new(&[1], &[1])],
        };
        assert!(build_plan(&spec).is_err());
    }

    #[test]
    fn bccr_graph_shape() {
        let g = bccr_graph();
        assert_eq!(g.nodes.len(), 10);
        assert_eq!(g.edges.len(), 25);
        assert!(g.is_acyclic());
        let ub = g.node_index("UB").unwrap();
        assert_eq!(g.edges.iter().filter(|&&(_, to)| to == ub).count(), 4);
    }

    #[test]
    fn graph_json_round_trip_and_dot() {
        let g = bccr_graph();
        let back = Digraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        let empty = Digraph {
            nodes: vec![],
            edges: vec![],
        };
        assert_eq!(empty.to_dot(), "digraph plan {\n}\n");
        let dot = g.to_dot();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("\"WB\" -> \"UB\""));
    }
}
