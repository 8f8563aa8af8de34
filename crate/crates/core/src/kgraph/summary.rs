use serde_json::json;

use super::{Community, CommunityAssignment, GraphError, KnowledgeGraph};
use crate::modelgw::Gateway;
use crate::trace::{StepKind, Trace};

const HEADER: &str = "The entries below form one cluster in a catalogue of archived datasets, \
linked through shared topics, modalities and vocabulary concepts.\n\
Write a short paragraph describing what the cluster is about.\n\nMembers:\n";
const FOOTER: &str = "\nSummary:";

fn render(lines: &[String]) -> String {
    let mut prompt = String::from(HEADER);
    for line in lines {
        prompt.push_str(line);
        prompt.push('\n');
    }
    prompt.push_str(FOOTER);
    prompt
}

/// `- kind: label` lines for the community members, in member order.
pub fn member_lines(community: &Community, graph: &KnowledgeGraph) -> Vec<String> {
    community
        .members
        .iter()
        .filter_map(|id| graph.node(id))
        .map(|n| format!("- {}: {}", n.kind.as_str(), n.label))
        .collect()
}

/// Generates a summary for one community. Member lines are dropped from
/// the tail until the prompt fits the gateway budget; the number dropped is
/// recorded in the trace step.
pub fn summarize_community(
    community_id: &str,
    community: &Community,
    graph: &KnowledgeGraph,
    gateway: &Gateway,
    trace: &mut Trace,
) -> Result<String, GraphError> {
    let mut lines = member_lines(community, graph);
    let total = lines.len();
    let mut prompt = render(&lines);
    while prompt.chars().count() > gateway.context_budget && !lines.is_empty() {
        lines.pop();
        prompt = render(&lines);
    }
    let truncated = total - lines.len();
    let reply = gateway
        .complete(
            trace,
            StepKind::Generate,
            "community_summary",
            &prompt,
            json!({ "community_id": community_id, "members": total, "truncated_members": truncated }),
        )
        .map_err(GraphError::GenerationFailed)?;
    Ok(reply.trim().to_string())
}

/// Fills in every missing summary, in community id order.
pub fn summarize_all(
    assignment: &mut CommunityAssignment,
    graph: &KnowledgeGraph,
    gateway: &Gateway,
    trace: &mut Trace,
) -> Result<(), GraphError> {
    for (cid, community) in assignment.communities.iter_mut() {
        if community.summary.is_none() {
            community.summary = Some(summarize_community(cid, community, graph, gateway, trace)?);
        }
    }
    Ok(())
}
