//! Python source parsing and code-entity enumeration.
//!
//! A [`SourceUnit`] owns the text, its line index and the tree-sitter tree.
//! [`enumerate_entities`] walks the tree once and returns the entities every
//! smell metric is measured over, in document order.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tree_sitter::{Node, Parser, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    /// 1-based line of the first error.
    pub line: usize,
    /// 1-based column (bytes) of the first error.
    pub col: usize,
    pub message: String,
}

/// Byte offsets of the first byte of every physical line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineIndex {
    offsets: Vec<usize>,
    len: usize,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut offsets = Vec::new();
        if !text.is_empty() {
            offsets.push(0);
        }
        for (i, b) in text.bytes().enumerate() {
            if b == b'\n' && i + 1 < text.len() {
                offsets.push(i + 1);
            }
        }
        Self {
            offsets,
            len: text.len(),
        }
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn line_count(&self) -> usize {
        self.offsets.len()
    }

    /// Byte range of a 1-based line, including its terminator.
    pub fn line_range(&self, line: usize) -> Option<std::ops::Range<usize>> {
        if line == 0 || line > self.offsets.len() {
            return None;
        }
        let start = self.offsets[line - 1];
        let end = self.offsets.get(line).copied().unwrap_or(self.len);
        Some(start..end)
    }

    /// 1-based line containing `byte`.
    pub fn line_of(&self, byte: usize) -> usize {
        match self.offsets.binary_search(&byte) {
            Ok(i) => i + 1,
            Err(i) => i.max(1),
        }
    }
}

/// One parsed Python file.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: PathBuf,
    pub text: String,
    pub tree: Tree,
    pub line_index: LineIndex,
}

impl SourceUnit {
    pub fn line_count(&self) -> usize {
        self.line_index.line_count()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> &str {
        &self.text[range]
    }

    /// Text of lines `first..=last` (1-based), terminators included.
    pub fn lines_text(&self, first: usize, last: usize) -> Option<&str> {
        let start = self.line_index.line_range(first)?.start;
        let end = self.line_index.line_range(last)?.end;
        Some(&self.text[start..end])
    }

    /// Re-locate the tree node an entity was built from.
    pub(crate) fn node_for(&self, entity: &CodeEntity) -> Option<Node<'_>> {
        let (start, end) = entity.anchor;
        let mut node = self
            .tree
            .root_node()
            .descendant_for_byte_range(start, end)?;
        loop {
            if node.start_byte() == start
                && node.end_byte() == end
                && entity_kind_of(node) == Some(entity.kind)
            {
                return Some(node);
            }
            node = node.parent()?;
            if node.start_byte() < start || node.end_byte() > end {
                return None;
            }
        }
    }
}

pub fn parse_source(path: impl AsRef<Path>, text: impl Into<String>) -> Result<SourceUnit, ParseError> {
    let text = text.into();
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_python::LANGUAGE.into())
        .expect("python grammar is ABI compatible with the linked tree-sitter");
    let tree = parser.parse(&text, None).ok_or_else(|| ParseError {
        line: 1,
        col: 1,
        message: "parser produced no tree".into(),
    })?;
    if let Some(err) = first_error(tree.root_node()) {
        return Err(err);
    }
    let line_index = LineIndex::new(&text);
    Ok(SourceUnit {
        path: path.as_ref().to_path_buf(),
        text,
        tree,
        line_index,
    })
}

fn first_error(root: Node<'_>) -> Option<ParseError> {
    if !root.has_error() && !contains_python2(root) {
        return None;
    }
    let mut cursor = root.walk();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        let at = |message: String| ParseError {
            line: node.start_position().row + 1,
            col: node.start_position().column + 1,
            message,
        };
        if node.is_missing() {
            return Some(at(format!("expected `{}`", node.kind())));
        }
        if node.is_error() {
            return Some(at("invalid syntax".into()));
        }
        match node.kind() {
            "print_statement" => return Some(at("Python 2 print statement".into())),
            "exec_statement" => return Some(at("Python 2 exec statement".into())),
            _ => {}
        }
        let children: Vec<_> = node.children(&mut cursor).collect();
        stack.extend(children.into_iter().rev());
    }
    None
}

fn contains_python2(node: Node<'_>) -> bool {
    // print/exec statements only appear at statement level, so a shallow scan
    // of blocks is enough to avoid a full walk on clean files.
    let mut cursor = node.walk();
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        match n.kind() {
            "print_statement" | "exec_statement" => return true,
            "module" | "block" | "if_statement" | "elif_clause" | "else_clause" | "for_statement"
            | "while_statement" | "try_statement" | "except_clause" | "finally_clause"
            | "with_statement" | "function_definition" | "class_definition"
            | "decorated_definition" | "match_statement" | "case_clause" => {
                stack.extend(n.named_children(&mut cursor));
            }
            _ => {}
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityKind {
    Function,
    Lambda,
    Class,
    AttributeChainExpression,
    TernaryExpression,
    Comprehension,
    ContainerLiteral,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EntityKind::Function => "function",
            EntityKind::Lambda => "lambda",
            EntityKind::Class => "class",
            EntityKind::AttributeChainExpression => "attribute-chain-expression",
            EntityKind::TernaryExpression => "ternary-expression",
            EntityKind::Comprehension => "comprehension",
            EntityKind::ContainerLiteral => "container-literal",
        };
        f.write_str(s)
    }
}

/// Source extent: 1-based lines, 0-based byte columns, end exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl Span {
    pub fn contains(&self, other: &Span) -> bool {
        (self.start_line, self.start_col) <= (other.start_line, other.start_col)
            && (other.end_line, other.end_col) <= (self.end_line, self.end_col)
    }

    pub fn line_count(&self) -> usize {
        self.end_line - self.start_line + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeEntity {
    pub kind: EntityKind,
    pub span: Span,
    /// Byte range of `span` in the unit text.
    pub bytes: (usize, usize),
    pub name: Option<String>,
    /// Index of the nearest enclosing entity in the list returned by
    /// [`enumerate_entities`].
    pub nesting_parent: Option<usize>,
    /// Function defined directly inside a class body (ignoring intervening
    /// compound statements), or a class nested in one.
    pub in_class_body: bool,
    anchor: (usize, usize),
}

pub(crate) const CONTAINER_KINDS: &[&str] = &["list", "set", "tuple", "dictionary"];
pub(crate) const COMPREHENSION_KINDS: &[&str] = &[
    "list_comprehension",
    "set_comprehension",
    "dictionary_comprehension",
    "generator_expression",
];

fn entity_kind_of(node: Node<'_>) -> Option<EntityKind> {
    if !node.is_named() {
        return None;
    }
    let kind = node.kind();
    Some(match kind {
        "function_definition" => EntityKind::Function,
        "lambda" => EntityKind::Lambda,
        "class_definition" => EntityKind::Class,
        "conditional_expression" => EntityKind::TernaryExpression,
        k if COMPREHENSION_KINDS.contains(&k) => EntityKind::Comprehension,
        k if CONTAINER_KINDS.contains(&k) => EntityKind::ContainerLiteral,
        "attribute" | "call" | "subscript" if is_chain_root(node) && chain_length(node) >= 1 => {
            EntityKind::AttributeChainExpression
        }
        _ => return None,
    })
}

/// The node a chain link continues into, if `node` is a chain link.
fn chain_inner(node: Node<'_>) -> Option<Node<'_>> {
    let field = match node.kind() {
        "attribute" => "object",
        "call" => "function",
        "subscript" => "value",
        _ => return None,
    };
    node.child_by_field_name(field)
}

fn is_chain_root(node: Node<'_>) -> bool {
    match node.parent() {
        Some(parent) => chain_inner(parent).map(|n| n.id()) != Some(node.id()),
        None => true,
    }
}

/// Number of `.` accesses along the spine of a chain rooted at `node`.
pub(crate) fn chain_length(node: Node<'_>) -> u32 {
    let mut count = 0;
    let mut cur = node;
    while let Some(inner) = chain_inner(cur) {
        if cur.kind() == "attribute" {
            count += 1;
        }
        cur = inner;
    }
    count
}

/// End byte of the last non-comment token under `node`.
fn content_end(node: Node<'_>) -> usize {
    let mut cur = node;
    loop {
        let mut last = None;
        for i in (0..cur.child_count()).rev() {
            let child = cur.child(i).expect("index in range");
            if child.kind() == "comment" || child.start_byte() == child.end_byte() {
                continue;
            }
            last = Some(child);
            break;
        }
        match last {
            Some(child) => cur = child,
            None => return cur.end_byte(),
        }
    }
}

/// Every entity in `unit`, ordered by span start (outer before inner on ties).
pub fn enumerate_entities(unit: &SourceUnit) -> Vec<CodeEntity> {
    let mut walker = Walker {
        unit,
        out: Vec::new(),
    };
    walker.visit(unit.tree.root_node(), &mut Vec::new(), false);
    walker.out
}

struct Walker<'u> {
    unit: &'u SourceUnit,
    out: Vec<CodeEntity>,
}

#[derive(Clone, Copy)]
enum Scope {
    Entity(usize),
    ClassBody,
    FunctionBody,
}

impl Walker<'_> {
    fn span_of(&self, start: usize, end: usize) -> Span {
        let li = &self.unit.line_index;
        let start_line = li.line_of(start);
        let end_line = li.line_of(end.saturating_sub(1).max(start));
        Span {
            start_line,
            start_col: start - li.offsets()[start_line - 1],
            end_line,
            end_col: end - li.offsets()[end_line - 1],
        }
    }

    fn push(&mut self, node: Node<'_>, start: usize, scopes: &[Scope]) -> usize {
        let kind = entity_kind_of(node).expect("caller checked kind");
        let end = match kind {
            EntityKind::Function | EntityKind::Class => content_end(node),
            _ => node.end_byte(),
        };
        let nesting_parent = scopes.iter().rev().find_map(|s| match s {
            Scope::Entity(i) => Some(*i),
            _ => None,
        });
        let in_class_body = matches!(
            scopes
                .iter()
                .rev()
                .find(|s| matches!(s, Scope::ClassBody | Scope::FunctionBody)),
            Some(Scope::ClassBody)
        );
        let name = match kind {
            EntityKind::Function | EntityKind::Class => node
                .child_by_field_name("name")
                .map(|n| self.unit.text[n.byte_range()].to_string()),
            _ => None,
        };
        self.out.push(CodeEntity {
            kind,
            span: self.span_of(start, end),
            bytes: (start, end),
            name,
            nesting_parent,
            in_class_body: in_class_body && matches!(kind, EntityKind::Function | EntityKind::Class),
            anchor: (node.start_byte(), node.end_byte()),
        });
        self.out.len() - 1
    }

    fn visit(&mut self, node: Node<'_>, scopes: &mut Vec<Scope>, claimed: bool) {
        match node.kind() {
            "string" | "concatenated_string" | "comment" => return,
            "decorated_definition" => {
                if let Some(def) = node.child_by_field_name("definition") {
                    let idx = self.push(def, node.start_byte(), scopes);
                    scopes.push(Scope::Entity(idx));
                    let mut cursor = node.walk();
                    for child in node.children(&mut cursor) {
                        if child.id() == def.id() {
                            self.visit(child, scopes, true);
                        } else {
                            self.visit(child, scopes, false);
                        }
                    }
                    scopes.pop();
                    return;
                }
            }
            _ => {}
        }

        let mut pushed = 0;
        if !claimed && entity_kind_of(node).is_some() {
            let idx = self.push(node, node.start_byte(), scopes);
            scopes.push(Scope::Entity(idx));
            pushed += 1;
        }
        let body_scope = match node.kind() {
            "class_definition" => Some(Scope::ClassBody),
            "function_definition" => Some(Scope::FunctionBody),
            _ => None,
        };
        let mut cursor = node.walk();
        for child in node.children(&mut cursor) {
            let in_body = body_scope.is_some() && child.kind() == "block";
            if in_body {
                scopes.push(body_scope.expect("checked"));
            }
            self.visit(child, scopes, false);
            if in_body {
                scopes.pop();
            }
        }
        for _ in 0..pushed {
            scopes.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<EntityKind> {
        let unit = parse_source("t.py", src).unwrap();
        enumerate_entities(&unit).into_iter().map(|e| e.kind).collect()
    }

    #[test]
    fn minimal_program_has_one_line() {
        let unit = parse_source("a.py", "x = 1\n").unwrap();
        assert_eq!(unit.line_count(), 1);
        let root = unit.tree.root_node();
        assert_eq!(root.named_child_count(), 1);
        assert_eq!(root.named_child(0).unwrap().kind(), "expression_statement");
    }

    #[test]
    fn malformed_signature_is_a_parse_error_on_line_one() {
        let err = parse_source("b.py", "def f(:\n").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn python2_print_is_rejected() {
        let err = parse_source("p.py", "x = 1\nprint \"hi\"\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("print"));
        assert!(parse_source("p3.py", "print(\"hi\")\n").is_ok());
    }

    #[test]
    fn line_offsets_are_increasing_and_count_lines() {
        let text: String = (0..400).map(|i| format!("x{i} = {i}\n")).collect();
        let text = text.trim_end_matches('\n').to_string();
        let unit = parse_source("c.py", text.clone()).unwrap();
        let newline_bytes = text.bytes().filter(|b| *b == b'\n').count();
        assert_eq!(unit.line_index.offsets().len(), newline_bytes + 1);
        assert_eq!(unit.line_index.offsets().len(), 400);
        assert!(unit.line_index.offsets().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(LineIndex::new("").line_count(), 0);
    }

    #[test]
    fn empty_file_has_no_entities() {
        assert!(kinds("").is_empty());
    }

    #[test]
    fn single_function() {
        let unit = parse_source("t.py", "def f(a, b): return a").unwrap();
        let ents = enumerate_entities(&unit);
        assert_eq!(ents.len(), 1);
        assert_eq!(ents[0].kind, EntityKind::Function);
        assert_eq!(ents[0].name.as_deref(), Some("f"));
        assert_eq!(ents[0].nesting_parent, None);
    }

    #[test]
    fn class_with_two_methods_and_a_lambda() {
        let src = "class A:\n    def m(self):\n        return 1\n\n    def n(self):\n        key = lambda v: v\n        return key\n";
        let ents = enumerate_entities(&parse_source("t.py", src).unwrap());
        let k: Vec<_> = ents.iter().map(|e| e.kind).collect();
        assert_eq!(
            k,
            vec![EntityKind::Class, EntityKind::Function, EntityKind::Function, EntityKind::Lambda]
        );
        assert_eq!(ents[1].nesting_parent, Some(0));
        assert!(ents[1].in_class_body);
        assert_eq!(ents[3].nesting_parent, Some(2));
    }

    #[test]
    fn chains_are_maximal() {
        let ents = enumerate_entities(&parse_source("t.py", "x = a.b().c.d\n").unwrap());
        assert_eq!(ents.len(), 1);
        assert_eq!(ents[0].kind, EntityKind::AttributeChainExpression);
        assert_eq!(ents[0].span.start_col, 4);
    }

    #[test]
    fn decorators_are_inside_the_function_span() {
        let src = "@app.route('/')\ndef f():\n    return 1\n    # trailing\n";
        let ents = enumerate_entities(&parse_source("t.py", src).unwrap());
        assert_eq!(ents[0].kind, EntityKind::Function);
        assert_eq!(ents[0].span.start_line, 1);
        assert_eq!(ents[0].span.end_line, 3);
        assert_eq!(ents[1].kind, EntityKind::AttributeChainExpression);
        assert_eq!(ents[1].nesting_parent, Some(0));
    }

    #[test]
    fn patterns_and_bare_tuples_are_not_containers() {
        assert!(kinds("(a, b) = 1, 2\nfor (c, d) in e: pass\n").is_empty());
        assert_eq!(kinds("x = (1, 2)\n"), vec![EntityKind::ContainerLiteral]);
    }

    #[test]
    fn fstring_fields_are_opaque() {
        assert!(kinds("s = f\"{a.b.c} {[1, [2]]}\"\n").is_empty());
    }

    #[test]
    fn parents_strictly_contain_children() {
        let src = "def f():\n    def g():\n        return [x for x in [1, (2, 3)] if x]\n    return g\n";
        let ents = enumerate_entities(&parse_source("t.py", src).unwrap());
        for e in &ents {
            if let Some(p) = e.nesting_parent {
                let parent = &ents[p];
                assert!(parent.span.contains(&e.span));
                assert_ne!(parent.span, e.span);
            }
        }
        assert_eq!(ents[1].nesting_parent, Some(0));
    }
}
