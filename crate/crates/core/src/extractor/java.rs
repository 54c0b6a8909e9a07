//! Tree-sitter driven discovery of Java method declarations.

use tree_sitter::{Node, Parser, Tree};

use super::ExtractError;

pub(crate) const METHOD_KINDS: &[&str] = &[
    "method_declaration",
    "constructor_declaration",
    "compact_constructor_declaration",
    "static_initializer",
];

pub(crate) fn parse_java(source: &str) -> Tree {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("bundled Java grammar is ABI compatible");
    parser.parse(source, None).expect("parser has a language and no timeout")
}

/// Position (1-based line, 1-based column) of the first syntax error, if any.
pub(crate) fn first_error(tree: &Tree) -> Option<(usize, usize)> {
    let root = tree.root_node();
    if !root.has_error() {
        return None;
    }
    let mut stack = vec![root];
    let mut best: Option<Node<'_>> = None;
    while let Some(node) = stack.pop() {
        if node.is_error() || node.is_missing() {
            if best.is_none_or(|b| node.start_byte() < b.start_byte()) {
                best = Some(node);
            }
            continue;
        }
        if node.has_error() {
            let mut cursor = node.walk();
            stack.extend(node.children(&mut cursor));
        }
    }
    let node = best.unwrap_or(root);
    let pos = node.start_position();
    Some((pos.row + 1, pos.column + 1))
}

/// The raw facts about one declaration, before SLOC and identity are derived.
#[derive(Debug, Clone)]
pub(crate) struct Declaration {
    pub name: String,
    pub parameters: Vec<String>,
    pub return_type: Option<String>,
    pub start_byte: usize,
    pub end_byte: usize,
    pub start_line: usize,
    pub end_line: usize,
}

pub(crate) fn text<'s>(node: Node<'_>, source: &'s str) -> &'s str {
    &source[node.byte_range()]
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect()
}

fn body_of<'t>(node: Node<'t>) -> Option<Node<'t>> {
    match node.kind() {
        "static_initializer" => {
            let mut cursor = node.walk();
            let block = node.named_children(&mut cursor).find(|c| c.kind() == "block");
            block
        }
        _ => node.child_by_field_name("body"),
    }
}

fn parameter_types(params: Node<'_>, source: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cursor = params.walk();
    for p in params.named_children(&mut cursor) {
        match p.kind() {
            "formal_parameter" => {
                let mut ty = p.child_by_field_name("type").map(|t| squash(text(t, source))).unwrap_or_default();
                if let Some(dims) = p.child_by_field_name("dimensions") {
                    ty.push_str(&squash(text(dims, source)));
                }
                out.push(ty);
            }
            "spread_parameter" => {
                let mut c = p.walk();
                let ty = p
                    .named_children(&mut c)
                    .find(|n| n.kind() != "modifiers" && n.kind() != "variable_declarator")
                    .map(|t| squash(text(t, source)))
                    .unwrap_or_default();
                out.push(format!("{ty}..."));
            }
            _ => {}
        }
    }
    out
}

fn declaration(node: Node<'_>, source: &str) -> Declaration {
    let (name, parameters, return_type) = match node.kind() {
        "static_initializer" => ("<clinit>".to_string(), Vec::new(), None),
        kind => {
            let name = node.child_by_field_name("name").map(|n| text(n, source).to_string()).unwrap_or_default();
            let parameters = node
                .child_by_field_name("parameters")
                .map(|p| parameter_types(p, source))
                .unwrap_or_default();
            let return_type = if kind == "method_declaration" {
                node.child_by_field_name("type").map(|t| {
                    let mut ty = squash(text(t, source));
                    if let Some(dims) = node.child_by_field_name("dimensions") {
                        ty.push_str(&squash(text(dims, source)));
                    }
                    ty
                })
            } else {
                None
            };
            (name, parameters, return_type)
        }
    };
    Declaration {
        name,
        parameters,
        return_type,
        start_byte: node.start_byte(),
        end_byte: node.end_byte(),
        start_line: node.start_position().row + 1,
        end_line: node.end_position().row + 1,
    }
}

/// Every method-like declaration that has a body, in source (pre-order) order.
pub(crate) fn declarations(tree: &Tree, source: &str) -> Vec<Declaration> {
    let mut out = Vec::new();
    let mut stack = vec![tree.root_node()];
    while let Some(node) = stack.pop() {
        if METHOD_KINDS.contains(&node.kind()) && body_of(node).is_some() {
            out.push(declaration(node, source));
        }
        let mut cursor = node.walk();
        let children: Vec<_> = node.children(&mut cursor).collect();
        stack.extend(children.into_iter().rev());
    }
    out
}

/// A single method body parsed on its own, for metric computation and call
/// extraction.
pub struct ParsedMethod {
    source: String,
    tree: Tree,
    offset: usize,
}

const WRAP_OPEN: &str = "class __MaintlensWrapper {\n";

impl ParsedMethod {
    pub fn parse(body: &str) -> Result<Self, ExtractError> {
        let source = format!("{WRAP_OPEN}{body}\n}}\n");
        let tree = parse_java(&source);
        if let Some((line, column)) = first_error(&tree) {
            return Err(ExtractError::Parse { file_path: "<method body>".into(), line: line.saturating_sub(1).max(1), column });
        }
        let parsed = ParsedMethod { source, tree, offset: WRAP_OPEN.len() };
        if parsed.method().is_none() {
            return Err(ExtractError::NotAMethod);
        }
        Ok(parsed)
    }

    /// The declaration node for the method.
    pub fn method(&self) -> Option<Node<'_>> {
        let mut stack = vec![self.tree.root_node()];
        while let Some(node) = stack.pop() {
            if METHOD_KINDS.contains(&node.kind()) {
                return Some(node);
            }
            let mut cursor = node.walk();
            let children: Vec<_> = node.children(&mut cursor).collect();
            stack.extend(children.into_iter().rev());
        }
        None
    }

    pub fn text_of(&self, node: Node<'_>) -> &str {
        text(node, &self.source)
    }

    /// The original method text.
    pub fn body(&self) -> &str {
        let end = self.source.len() - "\n}\n".len();
        &self.source[self.offset..end]
    }
}
