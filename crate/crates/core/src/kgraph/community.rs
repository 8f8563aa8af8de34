use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::KnowledgeGraph;

pub const MAX_PROPAGATION_ROUNDS: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Community {
    pub members: Vec<String>,
    pub summary: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityAssignment {
    pub membership: BTreeMap<String, String>,
    pub communities: BTreeMap<String, Community>,
}

impl CommunityAssignment {
    pub fn community_of(&self, node_id: &str) -> Option<&str> {
        self.membership.get(node_id).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    /// Members are disjoint, cover `graph`'s nodes, and agree with
    /// `membership`.
    pub fn is_partition_of(&self, graph: &KnowledgeGraph) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        for (cid, c) in &self.communities {
            for m in &c.members {
                if !seen.insert(m.as_str()) || self.membership.get(m) != Some(cid) {
                    return false;
                }
            }
        }
        seen.len() == self.membership.len()
            && graph.nodes().all(|n| seen.contains(n.node_id.as_str()))
            && seen.len() == graph.node_count()
    }
}

/// Synchronous label propagation.
///
/// Every node starts with its own id as label. Each round, all nodes
/// simultaneously adopt the most frequent label among their neighbours and
/// themselves, ties going to the lexicographically smallest label. Stops at
/// a fixpoint or after [`MAX_PROPAGATION_ROUNDS`]. Counting the node's own
/// label keeps two-node components from oscillating.
pub fn detect_communities(graph: &KnowledgeGraph) -> CommunityAssignment {
    let adj = graph.adjacency();
    let mut labels: BTreeMap<&str, &str> = adj.keys().map(|k| (*k, *k)).collect();

    for _ in 0..MAX_PROPAGATION_ROUNDS {
        let mut next = BTreeMap::new();
        for (node, neighbours) in &adj {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            *counts.entry(labels[node]).or_default() += 1;
            for n in neighbours {
                *counts.entry(labels[n]).or_default() += 1;
            }
            // BTreeMap iterates labels ascending, so the first maximum wins ties.
            let mut best = labels[node];
            let mut best_count = 0;
            for (label, count) in counts {
                if count > best_count {
                    best = label;
                    best_count = count;
                }
            }
            next.insert(*node, best);
        }
        if next == labels {
            break;
        }
        labels = next;
    }

    let mut groups: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (node, label) in &labels {
        groups.entry(label).or_default().push(node.to_string());
    }
    let mut assignment = CommunityAssignment::default();
    for members in groups.into_values() {
        // members are in ascending order; the first is the community id
        let cid = members[0].clone();
        for m in &members {
            assignment.membership.insert(m.clone(), cid.clone());
        }
        assignment.communities.insert(cid, Community { members, summary: None });
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgraph::{EdgeKind, NodeKind};

    fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for n in nodes {
            g.add_node(*n, NodeKind::Concept, *n).unwrap();
        }
        for (a, b) in edges {
            g.add_edge(a, b, EdgeKind::HasConcept, 1.0).unwrap();
        }
        g
    }

    #[test]
    fn two_triangles() {
        let g = graph(
            &["a", "b", "c", "x", "y", "z"],
            &[("a", "b"), ("b", "c"), ("a", "c"), ("x", "y"), ("y", "z"), ("x", "z")],
        );
        let c = detect_communities(&g);
        assert_eq!(c.communities.len(), 2);
        assert_eq!(c.communities["a"].members, ["a", "b", "c"]);
        assert_eq!(c.communities["x"].members, ["x", "y", "z"]);
        assert!(c.is_partition_of(&g));
    }

    #[test]
    fn complete_graph_is_one_community() {
        let ids = ["a", "b", "c", "d"];
        let mut edges = vec![];
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((ids[i], ids[j]));
            }
        }
        let c = detect_communities(&graph(&ids, &edges));
        assert_eq!(c.communities.len(), 1);
        assert_eq!(c.community_of("d"), Some("a"));
    }

    #[test]
    fn single_edge_does_not_oscillate() {
        let c = detect_communities(&graph(&["p", "q"], &[("p", "q")]));
        assert_eq!(c.communities.len(), 1);
    }

    #[test]
    fn empty_graph() {
        let c = detect_communities(&KnowledgeGraph::new());
        assert!(c.is_empty());
        assert!(c.communities.is_empty());
    }

    #[test]
    fn isolated_nodes_are_singletons() {
        let c = detect_communities(&graph(&["m", "n"], &[]));
        assert_eq!(c.communities.len(), 2);
    }
}
