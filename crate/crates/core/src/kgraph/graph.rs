use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::GraphError;
use crate::ingest::{ConceptLink, SourceRecord, FIELD_MODALITIES, FIELD_TOPIC_NAME};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Dataset,
    Concept,
    Topic,
    Modality,
}

impl NodeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeKind::Dataset => "dataset",
            NodeKind::Concept => "concept",
            NodeKind::Topic => "topic",
            NodeKind::Modality => "modality",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    HasConcept,
    HasTopic,
    HasModality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub node_id: String,
    pub kind: NodeKind,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub kind: EdgeKind,
    pub weight: f64,
}

/// Typed graph over datasets and the concepts, topics and modalities they
/// carry. Edges point from a dataset to a value node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeGraph {
    nodes: BTreeMap<String, Node>,
    edges: BTreeMap<(String, String, EdgeKind), f64>,
}

pub fn topic_node_id(label: &str) -> String {
    format!("topic:{label}")
}

pub fn modality_node_id(label: &str) -> String {
    format!("modality:{label}")
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, node_id: impl Into<String>, kind: NodeKind, label: impl Into<String>) -> Result<(), GraphError> {
        let node_id = node_id.into();
        match self.nodes.get(&node_id) {
            Some(existing) if existing.kind != kind => Err(GraphError::NodeIdCollision(node_id)),
            Some(_) => Ok(()),
            None => {
                let label = label.into();
                self.nodes.insert(node_id.clone(), Node { node_id, kind, label });
                Ok(())
            }
        }
    }

    /// Adds `weight` to the `(a, b, kind)` edge, creating it if needed.
    pub fn add_edge(&mut self, a: &str, b: &str, kind: EdgeKind, weight: f64) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a.to_string()));
        }
        for end in [a, b] {
            if !self.nodes.contains_key(end) {
                return Err(GraphError::UnknownNode(end.to_string()));
            }
        }
        *self.edges.entry((a.to_string(), b.to_string(), kind)).or_insert(0.0) += weight;
        Ok(())
    }

    pub fn node(&self, node_id: &str) -> Option<&Node> {
        self.nodes.get(node_id)
    }

    /// Nodes sorted by id.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|((a, b, kind), w)| Edge { a: a.clone(), b: b.clone(), kind: *kind, weight: *w })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Undirected neighbour sets, keyed and ordered by node id.
    pub fn adjacency(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut adj: BTreeMap<&str, BTreeSet<&str>> = self.nodes.keys().map(|k| (k.as_str(), BTreeSet::new())).collect();
        for (a, b, _) in self.edges.keys() {
            adj.get_mut(a.as_str()).unwrap().insert(b.as_str());
            adj.get_mut(b.as_str()).unwrap().insert(a.as_str());
        }
        adj
    }

    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let mut g = KnowledgeGraph::new();
        for n in nodes {
            if g.nodes.contains_key(&n.node_id) {
                return Err(GraphError::NodeIdCollision(n.node_id));
            }
            g.add_node(n.node_id, n.kind, n.label)?;
        }
        for e in edges {
            if e.weight.is_nan() || e.weight <= 0.0 {
                return Err(GraphError::Invalid(format!("edge {}-{} has weight {}", e.a, e.b, e.weight)));
            }
            if g.edges.contains_key(&(e.a.clone(), e.b.clone(), e.kind)) {
                return Err(GraphError::Invalid(format!("duplicate edge {}-{}", e.a, e.b)));
            }
            g.add_edge(&e.a, &e.b, e.kind, e.weight)?;
        }
        Ok(g)
    }
}

/// One dataset node per record, one node per distinct concept, topic and
/// modality value, and dataset→value edges weighted by occurrence count.
/// A concept node is labelled with the smallest raw value linked to it.
pub fn build_graph(records: &[SourceRecord], links: &[ConceptLink]) -> Result<KnowledgeGraph, GraphError> {
    let mut g = KnowledgeGraph::new();
    for r in records {
        g.add_node(r.persistent_id.clone(), NodeKind::Dataset, r.title.clone())?;
    }

    let mut sorted_links: Vec<&ConceptLink> = links.iter().collect();
    sorted_links.sort_by(|x, y| (&x.concept_uri, &x.raw_value).cmp(&(&y.concept_uri, &y.raw_value)));
    for link in &sorted_links {
        if g.node(&link.record_id).is_none_or(|n| n.kind != NodeKind::Dataset) {
            return Err(GraphError::DanglingLink(link.record_id.clone()));
        }
        g.add_node(link.concept_uri.clone(), NodeKind::Concept, link.raw_value.clone())?;
    }
    for link in &sorted_links {
        g.add_edge(&link.record_id, &link.concept_uri, EdgeKind::HasConcept, 1.0)?;
    }

    for r in records {
        for (field, kind, edge, make_id) in [
            (FIELD_TOPIC_NAME, NodeKind::Topic, EdgeKind::HasTopic, topic_node_id as fn(&str) -> String),
            (FIELD_MODALITIES, NodeKind::Modality, EdgeKind::HasModality, modality_node_id),
        ] {
            for value in r.field(field) {
                let id = make_id(value);
                g.add_node(id.clone(), kind, value.clone())?;
                g.add_edge(&r.persistent_id, &id, edge, 1.0)?;
            }
        }
    }
    Ok(g)
}

/// Ids of nodes whose whole label equals any term, ignoring case; sorted.
pub fn match_query_nodes(graph: &KnowledgeGraph, terms: &[String]) -> Vec<String> {
    let wanted: BTreeSet<String> = terms.iter().map(|t| t.trim().to_lowercase()).filter(|t| !t.is_empty()).collect();
    graph
        .nodes()
        .filter(|n| wanted.contains(&n.label.to_lowercase()))
        .map(|n| n.node_id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::MatchKind;

    fn record(id: &str, topics: &[&str], modalities: &[&str]) -> SourceRecord {
        let mut fields = BTreeMap::new();
        if !topics.is_empty() {
            fields.insert("topic_name".to_string(), topics.iter().map(|s| s.to_string()).collect());
        }
        if !modalities.is_empty() {
            fields.insert("modalities".to_string(), modalities.iter().map(|s| s.to_string()).collect());
        }
        SourceRecord {
            persistent_id: id.into(),
            title: format!("Title {id}"),
            description: String::new(),
            custom_fields: fields,
            file_manifest: vec![],
            collection_id: "c".into(),
        }
    }

    fn link(record: &str, value: &str, uri: &str) -> ConceptLink {
        ConceptLink {
            record_id: record.into(),
            field_name: "modalities".into(),
            raw_value: value.into(),
            concept_uri: uri.into(),
            match_kind: MatchKind::ExactPref,
            score: 1.0,
        }
    }

    #[test]
    fn shared_topic_connects_datasets() {
        let g = build_graph(&[record("a", &["Inclusion"], &[]), record("b", &["Inclusion"], &[])], &[]).unwrap();
        assert_eq!(g.nodes().filter(|n| n.kind == NodeKind::Topic).count(), 1);
        assert_eq!(g.edges().filter(|e| e.kind == EdgeKind::HasTopic).count(), 2);
        let adj = g.adjacency();
        let hub = topic_node_id("Inclusion");
        assert!(adj["a"].contains(hub.as_str()) && adj[hub.as_str()].contains("b"));
    }

    #[test]
    fn empty_input_empty_graph() {
        let g = build_graph(&[], &[]).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn concept_links_become_edges() {
        let links = [link("a", "haptic", "u:1"), link("a", "sound", "u:2"), link("a", "dance", "u:3")];
        let g = build_graph(&[record("a", &[], &[])], &links).unwrap();
        assert_eq!(g.edges().filter(|e| e.kind == EdgeKind::HasConcept).count(), 3);
    }

    #[test]
    fn repeated_values_add_weight() {
        let links = [link("a", "haptic", "u:1"), link("a", "haptics", "u:1")];
        let g = build_graph(&[record("a", &["X", "X"], &[])], &links).unwrap();
        let weights: Vec<f64> = g.edges().map(|e| e.weight).collect();
        assert_eq!(weights, [2.0, 2.0]);
        assert_eq!(g.node("u:1").unwrap().label, "haptic");
    }

    #[test]
    fn dangling_link_rejected() {
        let err = build_graph(&[record("a", &[], &[])], &[link("zzz", "x", "u:1")]).unwrap_err();
        assert!(matches!(err, GraphError::DanglingLink(id) if id == "zzz"));
    }

    #[test]
    fn whole_label_matching() {
        let g = build_graph(&[record("a", &["Inclusion", "Live music"], &["sound"])], &[]).unwrap();
        let terms = |ts: &[&str]| ts.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(match_query_nodes(&g, &terms(&["inclusion"])), ["topic:Inclusion"]);
        assert!(match_query_nodes(&g, &terms(&["live"])).is_empty());
        assert_eq!(
            match_query_nodes(&g, &terms(&["sound", "inclusion"])),
            ["modality:sound", "topic:Inclusion"]
        );
    }
}
