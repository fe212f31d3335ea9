//! Data-sharing graph over a corpus of documents.
//!
//! Controllers and named recipients are resolved to a shared entity node by
//! normalized name plus country, so a recipient in one document merges with
//! the controller of another. Category-only recipients stay distinct.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::model::TiltDocument;
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NodeKind {
    Controller,
    Recipient,
    DataCategory,
    Purpose,
}

impl NodeKind {
    fn shape(self) -> &'static str {
        match self {
            NodeKind::Controller => "box",
            NodeKind::Recipient => "ellipse",
            NodeKind::DataCategory => "note",
            NodeKind::Purpose => "diamond",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeKind {
    DisclosesTo,
    Processes,
    ForPurpose,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::DisclosesTo => "disclosesTo",
            EdgeKind::Processes => "processes",
            EdgeKind::ForPurpose => "forPurpose",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub data_category: String,
    pub source_document_id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SharingGraph {
    pub nodes: BTreeMap<String, Node>,
    pub edges: BTreeSet<Edge>,
}

impl SharingGraph {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn controllers(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(|n| n.kind == NodeKind::Controller)
    }

    fn add_node(&mut self, node: Node) {
        match self.nodes.get_mut(&node.id) {
            None => {
                self.nodes.insert(node.id.clone(), node);
            }
            Some(existing) => {
                // Controller beats recipient; smallest label wins.
                existing.kind = existing.kind.min(node.kind);
                if node.label < existing.label {
                    existing.label = node.label;
                }
                if existing.country.is_none() {
                    existing.country = node.country;
                }
            }
        }
    }

    fn merge(&mut self, other: SharingGraph) {
        for node in other.nodes.into_values() {
            self.add_node(node);
        }
        self.edges.extend(other.edges);
    }
}

/// How names are normalized before entity matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub case_fold: bool,
    pub collapse_whitespace: bool,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { case_fold: true, collapse_whitespace: true }
    }
}

impl Resolution {
    pub fn normalize(&self, name: &str) -> String {
        let name = if self.collapse_whitespace {
            name.split_whitespace().collect::<Vec<_>>().join(" ")
        } else {
            name.to_string()
        };
        if self.case_fold {
            name.to_lowercase()
        } else {
            name
        }
    }

    pub fn entity_id(&self, name: &str, country: Option<&str>) -> String {
        format!("entity:{}|{}", self.normalize(name), country.unwrap_or("").trim())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraphOptions {
    pub resolution: Resolution,
    pub execution: Execution,
}

pub fn build_graph(corpus: &[TiltDocument]) -> SharingGraph {
    build_graph_with(corpus, GraphOptions::default())
}

pub fn build_graph_with(corpus: &[TiltDocument], options: GraphOptions) -> SharingGraph {
    let fragments = options.execution.map(corpus, |doc| fragment(doc, &options.resolution));
    let mut graph = SharingGraph::default();
    for f in fragments {
        graph.merge(f);
    }
    graph
}

fn fragment(doc: &TiltDocument, res: &Resolution) -> SharingGraph {
    let mut g = SharingGraph::default();
    let doc_id = &doc.meta.id;
    let controller = &doc.controller;
    let controller_id = res.entity_id(&controller.name, Some(&controller.country));
    g.add_node(Node {
        id: controller_id.clone(),
        kind: NodeKind::Controller,
        label: controller.name.clone(),
        country: Some(controller.country.clone()),
    });
    let edge = |from: &str, to: &str, kind, category: &str| Edge {
        from: from.to_string(),
        to: to.to_string(),
        kind,
        data_category: category.to_string(),
        source_document_id: doc_id.clone(),
    };
    for (i, entry) in doc.data_disclosed.iter().enumerate() {
        let category_id = format!("category:{}", res.normalize(&entry.category));
        g.add_node(Node { id: category_id.clone(), kind: NodeKind::DataCategory, label: entry.category.clone(), country: None });
        g.edges.insert(edge(&controller_id, &category_id, EdgeKind::Processes, &entry.category));
        for purpose in &entry.purposes {
            let purpose_id = format!("purpose:{}", res.normalize(&purpose.purpose));
            g.add_node(Node { id: purpose_id.clone(), kind: NodeKind::Purpose, label: purpose.purpose.clone(), country: None });
            g.edges.insert(edge(&category_id, &purpose_id, EdgeKind::ForPurpose, &entry.category));
        }
        for (j, recipient) in entry.recipients.iter().enumerate() {
            let node = match recipient.name.as_deref().filter(|n| !n.trim().is_empty()) {
                Some(name) => Node {
                    id: res.entity_id(name, recipient.country.as_deref()),
                    kind: NodeKind::Recipient,
                    label: name.to_string(),
                    country: recipient.country.clone(),
                },
                None => Node {
                    id: format!("recipient:{doc_id}/{i}/{j}"),
                    kind: NodeKind::Recipient,
                    label: recipient.category.clone(),
                    country: recipient.country.clone(),
                },
            };
            g.edges.insert(edge(&controller_id, &node.id, EdgeKind::DisclosesTo, &entry.category));
            g.add_node(node);
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Relationship {
    Isolated,
    Linked,
    Networked,
}

impl Relationship {
    pub fn as_str(self) -> &'static str {
        match self {
            Relationship::Isolated => "isolated",
            Relationship::Linked => "linked",
            Relationship::Networked => "networked",
        }
    }
}

pub type ControllerClassification = BTreeMap<String, Relationship>;

/// Classifies controllers by the number of controllers in their component,
/// where controllers are adjacent when one discloses to the other or both
/// disclose to a common recipient.
pub fn classify_controllers(graph: &SharingGraph) -> ControllerClassification {
    let index: BTreeMap<&str, usize> = graph.nodes.keys().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut components = UnionFind::<usize>::new(index.len());
    for e in graph.edges.iter().filter(|e| e.kind == EdgeKind::DisclosesTo) {
        if let (Some(&a), Some(&b)) = (index.get(e.from.as_str()), index.get(e.to.as_str())) {
            components.union(a, b);
        }
    }
    let mut size: BTreeMap<usize, usize> = BTreeMap::new();
    for c in graph.controllers() {
        *size.entry(components.find(index[c.id.as_str()])).or_default() += 1;
    }
    graph
        .controllers()
        .map(|c| {
            let class = match size[&components.find(index[c.id.as_str()])] {
                1 => Relationship::Isolated,
                2 => Relationship::Linked,
                _ => Relationship::Networked,
            };
            (c.id.clone(), class)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("document `{0}` is not in the corpus")]
    NotFound(String),
}

fn same_url(a: &str, b: &str) -> bool {
    match (url::Url::parse(a.trim()), url::Url::parse(b.trim())) {
        (Ok(a), Ok(b)) => a == b,
        _ => a.trim() == b.trim(),
    }
}

/// Follows `urlOfNewVersion` of each document's last change of purpose
/// through the corpus, starting at the document with id `start`.
pub fn follow_chain<'a>(corpus: &'a [TiltDocument], start: &str) -> Result<Vec<&'a TiltDocument>, ChainError> {
    let mut current = corpus
        .iter()
        .find(|d| d.meta.id == start)
        .ok_or_else(|| ChainError::NotFound(start.to_string()))?;
    let mut visited = BTreeSet::new();
    let mut chain = Vec::new();
    loop {
        if !visited.insert(current.meta.id.as_str()) {
            break;
        }
        chain.push(current);
        let Some(change) = current.changes_of_purpose.last() else { break };
        // Among several documents published at the same URL prefer the newest.
        let next = corpus
            .iter()
            .filter(|d| !d.meta.url.is_empty() && same_url(&d.meta.url, &change.url_of_new_version))
            .max_by(|a, b| a.meta.version.cmp(&b.meta.version).then_with(|| b.meta.id.cmp(&a.meta.id)));
        match next {
            Some(next) => current = next,
            None => break,
        }
    }
    Ok(chain)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            other => Err(format!("unknown export format `{other}` (expected dot or json)")),
        }
    }
}

pub fn export(graph: &SharingGraph, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Dot => to_dot(graph).into_bytes(),
        ExportFormat::Json => to_json(graph),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn to_dot(graph: &SharingGraph) -> String {
    let mut out = String::from("digraph tilt {\n");
    for node in graph.nodes.values() {
        let _ = writeln!(out, "  {} [label={}, shape={}];", quote(&node.id), quote(&node.label), node.kind.shape());
    }
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}, dataCategory={}, sourceDocumentId={}];",
            quote(&e.from),
            quote(&e.to),
            e.kind.as_str(),
            quote(&e.data_category),
            quote(&e.source_document_id)
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    nodes: Vec<&'a Node>,
    edges: Vec<&'a Edge>,
}

pub fn to_json(graph: &SharingGraph) -> Vec<u8> {
    let doc = JsonGraph { nodes: graph.nodes.values().collect(), edges: graph.edges.iter().collect() };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("graph serializes");
    bytes.push(b'\n');
    bytes
}
