use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use tree_sitter::Node;

use crate::extractor::{MethodRecord, ParsedMethod};

/// Bodies of types declared inside a method; their methods are records of their own.
const NESTED_TYPE_BODIES: &[&str] = &["class_body", "enum_body", "interface_body", "annotation_type_body"];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CallIssue {
    /// Several project methods share the name and argument count.
    Ambiguous { caller: String, name: String, arity: usize, candidates: Vec<String> },
    /// The caller's text could not be parsed on its own.
    Unparsable { caller: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CallDiagnostics {
    pub resolved: usize,
    /// Calls to methods outside the project (library calls, fields of other types).
    pub unresolved: usize,
    pub issues: Vec<CallIssue>,
}

/// Caller to callee edges between methods of one project.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
    pub diagnostics: CallDiagnostics,
}

impl CallGraph {
    pub fn from_edges<'a>(nodes: impl IntoIterator<Item = &'a str>, edges: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut graph = CallGraph { nodes: nodes.into_iter().map(str::to_string).collect(), ..CallGraph::default() };
        for (a, b) in edges {
            graph.nodes.insert(a.to_string());
            graph.nodes.insert(b.to_string());
            graph.edges.insert((a.to_string(), b.to_string()));
        }
        graph
    }

    pub fn callees<'a>(&'a self, caller: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .range((caller.to_string(), String::new())..)
            .take_while(move |(a, _)| a == caller)
            .map(|(_, b)| b.as_str())
    }

    pub fn callers<'a>(&'a self, callee: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges.iter().filter(move |(_, b)| b == callee).map(|(a, _)| a.as_str())
    }

    /// Number of distinct callers.
    pub fn in_degree(&self, callee: &str) -> usize {
        self.callers(callee).count()
    }

    pub(crate) fn in_degrees(&self) -> BTreeMap<&str, usize> {
        let mut degrees: BTreeMap<&str, usize> = self.nodes.iter().map(|n| (n.as_str(), 0)).collect();
        for (_, b) in &self.edges {
            *degrees.entry(b.as_str()).or_default() += 1;
        }
        degrees
    }
}

fn invocations(parsed: &ParsedMethod) -> Vec<(String, usize)> {
    let Some(method) = parsed.method() else { return Vec::new() };
    let mut out = Vec::new();
    let mut stack: Vec<Node<'_>> = vec![method];
    while let Some(node) = stack.pop() {
        if NESTED_TYPE_BODIES.contains(&node.kind()) {
            continue;
        }
        if node.kind() == "method_invocation" {
            if let (Some(name), Some(args)) = (node.child_by_field_name("name"), node.child_by_field_name("arguments")) {
                let mut cursor = args.walk();
                let arity = args.named_children(&mut cursor).filter(|c| !c.kind().ends_with("comment")).count();
                out.push((parsed.text_of(name).to_string(), arity));
            }
        }
        let mut cursor = node.walk();
        let children: Vec<_> = node.children(&mut cursor).collect();
        stack.extend(children.into_iter().rev());
    }
    out
}

/// Resolves every `name(args)` invocation against the project's methods by
/// name and argument count. Records of different projects never link.
pub fn build_call_graph(records: &[MethodRecord]) -> CallGraph {
    let mut index: BTreeMap<(&str, &str, usize), Vec<&str>> = BTreeMap::new();
    for r in records {
        index.entry((&r.project_id, &r.name, r.signature.arity())).or_default().push(&r.method_id);
    }
    let mut graph = CallGraph { nodes: records.iter().map(|r| r.method_id.clone()).collect(), ..CallGraph::default() };
    for r in records {
        let Ok(parsed) = ParsedMethod::parse(&r.body_text) else {
            graph.diagnostics.issues.push(CallIssue::Unparsable { caller: r.method_id.clone() });
            continue;
        };
        for (name, arity) in invocations(&parsed) {
            match index.get(&(r.project_id.as_str(), name.as_str(), arity)).map(Vec::as_slice) {
                Some([target]) => {
                    graph.diagnostics.resolved += 1;
                    graph.edges.insert((r.method_id.clone(), target.to_string()));
                }
                Some(candidates) => graph.diagnostics.issues.push(CallIssue::Ambiguous {
                    caller: r.method_id.clone(),
                    name: name.clone(),
                    arity,
                    candidates: candidates.iter().map(|c| c.to_string()).collect(),
                }),
                None => graph.diagnostics.unresolved += 1,
            }
        }
    }
    graph.diagnostics.issues.sort();
    graph
}
