//! Knowledge graph over records, vocabulary concepts, topics and
//! modalities, with label-propagation communities and their summaries.

mod community;
mod graph;
mod summary;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use community::{detect_communities, Community, CommunityAssignment, MAX_PROPAGATION_ROUNDS};
pub use graph::{
    build_graph, match_query_nodes, modality_node_id, topic_node_id, Edge, EdgeKind, KnowledgeGraph, Node, NodeKind,
};
pub use summary::{member_lines, summarize_all, summarize_community};

use crate::modelgw::ModelError;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("concept link references unknown record {0}")]
    DanglingLink(String),
    #[error("node id {0} used for two different node kinds")]
    NodeIdCollision(String),
    #[error("self-loop on {0}")]
    SelfLoop(String),
    #[error("edge references unknown node {0}")]
    UnknownNode(String),
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("community summary generation failed: {0}")]
    GenerationFailed(#[source] ModelError),
    #[error("graph i/o: {0}")]
    Io(String),
}

/// Persisted form of a collection's graph and communities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub collection_id: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub membership: BTreeMap<String, String>,
    pub summaries: BTreeMap<String, String>,
}

/// A graph together with its community partition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphBundle {
    pub collection_id: String,
    pub graph: KnowledgeGraph,
    pub assignment: CommunityAssignment,
}

impl GraphBundle {
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            collection_id: self.collection_id.clone(),
            nodes: self.graph.nodes().cloned().collect(),
            edges: self.graph.edges().collect(),
            membership: self.assignment.membership.clone(),
            summaries: self
                .assignment
                .communities
                .iter()
                .filter_map(|(cid, c)| c.summary.clone().map(|s| (cid.clone(), s)))
                .collect(),
        }
    }

    pub fn from_document(doc: GraphDocument) -> Result<Self, GraphError> {
        let graph = KnowledgeGraph::from_parts(doc.nodes, doc.edges)?;
        let mut communities: BTreeMap<String, Community> = BTreeMap::new();
        for (node, cid) in &doc.membership {
            communities.entry(cid.clone()).or_default().members.push(node.clone());
        }
        for (cid, summary) in doc.summaries {
            communities
                .get_mut(&cid)
                .ok_or_else(|| GraphError::Invalid(format!("summary for unknown community {cid}")))?
                .summary = Some(summary);
        }
        let assignment = CommunityAssignment { membership: doc.membership, communities };
        if !assignment.is_partition_of(&graph) {
            return Err(GraphError::Invalid("membership does not partition the nodes".into()));
        }
        Ok(GraphBundle { collection_id: doc.collection_id, graph, assignment })
    }

    pub fn save(&self, path: &Path) -> Result<(), GraphError> {
        let bytes = serde_json::to_vec_pretty(&self.to_document()).expect("graph serializes");
        crate::store::write_atomic(path, &bytes).map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, GraphError> {
        let bytes = std::fs::read(path).map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))?;
        let doc: GraphDocument =
            serde_json::from_slice(&bytes).map_err(|e| GraphError::Invalid(format!("{}: {e}", path.display())))?;
        Self::from_document(doc)
    }

    /// Summary text of a community, or its member list when none was
    /// generated.
    pub fn community_text(&self, community_id: &str) -> Option<String> {
        let community = self.assignment.communities.get(community_id)?;
        Some(match &community.summary {
            Some(s) => s.clone(),
            None => member_lines(community, &self.graph).join("\n"),
        })
    }

    /// Dataset members of a community, in id order.
    pub fn dataset_members(&self, community_id: &str) -> Vec<String> {
        self.assignment
            .communities
            .get(community_id)
            .map(|c| {
                c.members
                    .iter()
                    .filter(|m| self.graph.node(m).is_some_and(|n| n.kind == NodeKind::Dataset))
                    .cloned()
                    .collect()
            })
            .unwrap_or_default()
    }
}
