//! Control-flow complexity: McCabe and McClure.

use std::collections::BTreeSet;

use tree_sitter::Node;

use crate::extractor::ParsedMethod;

const COMPARISONS: &[&str] = &["<", ">", "<=", ">=", "==", "!="];

fn walk<'t>(root: Node<'t>, mut visit: impl FnMut(Node<'t>) -> bool) {
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if !visit(node) {
            continue;
        }
        let mut cursor = node.walk();
        stack.extend(node.children(&mut cursor));
    }
}

fn operator<'a>(node: Node<'_>, method: &'a ParsedMethod) -> Option<&'a str> {
    node.child_by_field_name("operator").map(|op| method.text_of(op))
}

/// Cyclomatic complexity: 1 + predicate points. Predicate points are `if`,
/// `for`, enhanced `for`, `while`, `do`-`while`, non-default `case` labels,
/// `catch` clauses and ternaries; with `extended` every `&&` and `||` counts
/// as well.
pub fn mccabe(method: &ParsedMethod, extended: bool) -> u32 {
    let Some(root) = method.method() else { return 1 };
    let mut predicates = 0;
    walk(root, |node| {
        match node.kind() {
            "if_statement" | "for_statement" | "enhanced_for_statement" | "while_statement" | "do_statement"
            | "catch_clause" | "ternary_expression" => predicates += 1,
            "switch_label" if method.text_of(node).trim_start().starts_with("case") => predicates += 1,
            "binary_expression" if extended => {
                if matches!(operator(node, method), Some("&&" | "||")) {
                    predicates += 1;
                }
            }
            _ => {}
        }
        true
    });
    1 + predicates
}

fn predicate_expressions<'t>(root: Node<'t>) -> Vec<Node<'t>> {
    let mut out = Vec::new();
    walk(root, |node| {
        let condition = match node.kind() {
            "if_statement" | "while_statement" | "do_statement" | "for_statement" | "ternary_expression" => {
                node.child_by_field_name("condition")
            }
            _ => None,
        };
        out.extend(condition);
        true
    });
    out
}

/// Comparison operators inside predicate expressions plus the number of
/// distinct variables those predicates reference.
pub fn mcclure(method: &ParsedMethod) -> u32 {
    let Some(root) = method.method() else { return 0 };
    let predicates = predicate_expressions(root);
    // a predicate nested inside another one (a ternary in an `if` condition) is
    // already covered by the outer walk
    let outermost = predicates.iter().filter(|p| {
        !predicates.iter().any(|q| {
            q.id() != p.id() && q.start_byte() <= p.start_byte() && p.end_byte() <= q.end_byte()
        })
    });
    let mut comparisons = 0;
    let mut variables: BTreeSet<String> = BTreeSet::new();
    for predicate in outermost {
        collect_variables(*predicate, method, &mut variables, &mut comparisons);
    }
    comparisons + variables.len() as u32
}

fn collect_variables(root: Node<'_>, method: &ParsedMethod, variables: &mut BTreeSet<String>, comparisons: &mut u32) {
    walk(root, |node| match node.kind() {
        "binary_expression" => {
            if operator(node, method).is_some_and(|op| COMPARISONS.contains(&op)) {
                *comparisons += 1;
            }
            true
        }
        "field_access" => {
            variables.insert(method.text_of(node).split_whitespace().collect());
            false
        }
        "method_invocation" => {
            // the invoked name is not a variable; receiver and arguments may hold some
            let name = node.child_by_field_name("name").map(|n| n.id());
            let mut cursor = node.walk();
            let children: Vec<_> = node.children(&mut cursor).filter(|c| Some(c.id()) != name).collect();
            for child in children {
                collect_variables(child, method, variables, comparisons);
            }
            false
        }
        "identifier" => {
            variables.insert(method.text_of(node).to_string());
            false
        }
        "lambda_expression" | "method_reference" => false,
        _ => true,
    });
}
