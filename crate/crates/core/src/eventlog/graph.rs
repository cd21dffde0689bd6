use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EventLog, EventLogError};
use crate::mass::mass_prefix_len;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub activity: String,
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub frequency: u64,
}

/// Directly-follows graph with activity and transition frequencies.
/// Nodes are ordered by label; edges by `(from, to)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub filter_threshold: f64,
}

impl ProcessGraph {
    pub fn total_edge_frequency(&self) -> u64 {
        self.edges.iter().map(|e| e.frequency).sum()
    }
}

/// Counts directly-follows transitions and keeps the most frequent edges
/// until their cumulative share of all transitions reaches `threshold`.
pub fn build_process_graph(log: &EventLog, threshold: f64) -> Result<ProcessGraph, EventLogError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(EventLogError::InvalidThreshold(threshold));
    }
    let mut node_freq: BTreeMap<&str, u64> = BTreeMap::new();
    let mut edge_freq: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for trace in log.traces() {
        for e in &trace.events {
            *node_freq.entry(e.activity.as_str()).or_default() += 1;
        }
        for pair in trace.events.windows(2) {
            *edge_freq
                .entry((pair[0].activity.as_str(), pair[1].activity.as_str()))
                .or_default() += 1;
        }
    }

    // BTreeMap iteration gives lexicographic pair order; a stable sort on
    // frequency keeps it as the tie-breaker.
    let mut ranked: Vec<((&str, &str), u64)> = edge_freq.into_iter().collect();
    ranked.sort_by_key(|e| std::cmp::Reverse(e.1));
    let freqs: Vec<u64> = ranked.iter().map(|(_, f)| *f).collect();
    let keep = mass_prefix_len(&freqs, threshold);
    ranked.truncate(keep);

    let mut edges: Vec<GraphEdge> = ranked
        .into_iter()
        .map(|((from, to), frequency)| GraphEdge {
            from: from.to_string(),
            to: to.to_string(),
            frequency,
        })
        .collect();
    edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));

    let incident: BTreeSet<&str> = edges
        .iter()
        .flat_map(|e| [e.from.as_str(), e.to.as_str()])
        .collect();
    let nodes = node_freq
        .into_iter()
        .filter(|(a, _)| threshold == 0.0 || incident.contains(a))
        .map(|(a, frequency)| GraphNode {
            activity: a.to_string(),
            frequency,
        })
        .collect();

    Ok(ProcessGraph {
        nodes,
        edges,
        filter_threshold: threshold,
    })
}

fn quote(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders the graph in Graphviz DOT. Node labels carry frequencies and
/// edge widths scale with transition frequency.
pub fn export_graph(graph: &ProcessGraph) -> String {
    let max_edge = graph.edges.iter().map(|e| e.frequency).max().unwrap_or(1) as f64;
    let mut out = String::from("digraph process {\n  rankdir=LR;\n  node [shape=box];\n");
    for n in &graph.nodes {
        let label = format!("{} ({})", n.activity, n.frequency);
        let _ = writeln!(out, "  {} [label={}];", quote(&n.activity), quote(&label));
    }
    for e in &graph.edges {
        let width = 1.0 + 4.0 * e.frequency as f64 / max_edge;
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\", penwidth={:.2}];",
            quote(&e.from),
            quote(&e.to),
            e.frequency,
            width
        );
    }
    out.push_str("}\n");
    out
}
