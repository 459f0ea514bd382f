use std::fmt;

use serde::{Deserialize, Serialize};

/// Half-open byte range `[start, end)` into a source buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// True when the two ranges share at least one byte, or when one is an
    /// empty range strictly inside the other.
    pub fn overlaps(&self, other: Span) -> bool {
        if self.is_empty() || other.is_empty() {
            let (point, range) = if self.is_empty() { (self.start, other) } else { (other.start, *self) };
            return range.start < point && point < range.end;
        }
        self.start < other.end && other.start < self.end
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// The closed set of syntax node kinds. The declaration order is also the
/// slot order of characteristic vectors, so it must not change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    TranslationUnit,
    FunctionDef,
    StructDef,
    Typedef,
    ParamList,
    Param,
    CompoundStmt,
    DeclStmt,
    ExprStmt,
    IfStmt,
    ForStmt,
    WhileStmt,
    DoStmt,
    ReturnStmt,
    OpaqueStmt,
    CallExpr,
    ArgList,
    BinaryExpr,
    UnaryExpr,
    AssignExpr,
    IndexExpr,
    MemberExpr,
    Identifier,
    Literal,
}

impl NodeKind {
    pub const COUNT: usize = 24;

    pub const ALL: [NodeKind; NodeKind::COUNT] = [
        NodeKind::TranslationUnit,
        NodeKind::FunctionDef,
        NodeKind::StructDef,
        NodeKind::Typedef,
        NodeKind::ParamList,
        NodeKind::Param,
        NodeKind::CompoundStmt,
        NodeKind::DeclStmt,
        NodeKind::ExprStmt,
        NodeKind::IfStmt,
        NodeKind::ForStmt,
        NodeKind::WhileStmt,
        NodeKind::DoStmt,
        NodeKind::ReturnStmt,
        NodeKind::OpaqueStmt,
        NodeKind::CallExpr,
        NodeKind::ArgList,
        NodeKind::BinaryExpr,
        NodeKind::UnaryExpr,
        NodeKind::AssignExpr,
        NodeKind::IndexExpr,
        NodeKind::MemberExpr,
        NodeKind::Identifier,
        NodeKind::Literal,
    ];

    /// Slot of this kind in a characteristic vector.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::CompoundStmt
                | NodeKind::DeclStmt
                | NodeKind::ExprStmt
                | NodeKind::IfStmt
                | NodeKind::ForStmt
                | NodeKind::WhileStmt
                | NodeKind::DoStmt
                | NodeKind::ReturnStmt
                | NodeKind::OpaqueStmt
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub kind: NodeKind,
    pub span: Span,
    pub children: Vec<AstNode>,
    /// Identifier carried by functions, structs, params, identifiers, called
    /// symbols; operator spelling for expression nodes.
    pub name: Option<String>,
}

impl AstNode {
    pub fn new(kind: NodeKind, span: Span) -> Self {
        AstNode { kind, span, children: Vec::new(), name: None }
    }

    pub fn with_children(kind: NodeKind, span: Span, children: Vec<AstNode>) -> Self {
        AstNode { kind, span, children, name: None }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn text<'s>(&self, source: &'s str) -> &'s str {
        &source[self.span.start..self.span.end]
    }

    pub fn child(&self, kind: NodeKind) -> Option<&AstNode> {
        self.children.iter().find(|c| c.kind == kind)
    }

    /// Pre-order iterator over this node and all descendants.
    pub fn descendants(&self) -> Descendants<'_> {
        Descendants { stack: vec![self] }
    }

    /// Pre-order walk that also hands the visitor the chain of ancestors,
    /// outermost first.
    pub fn walk_with_ancestors<'a, F>(&'a self, visit: &mut F)
    where
        F: FnMut(&'a AstNode, &[&'a AstNode]),
    {
        let mut ancestors = Vec::new();
        walk_inner(self, &mut ancestors, visit);
    }

    /// Number of nodes in this subtree, self included.
    pub fn size(&self) -> usize {
        self.descendants().count()
    }
}

fn walk_inner<'a, F>(node: &'a AstNode, ancestors: &mut Vec<&'a AstNode>, visit: &mut F)
where
    F: FnMut(&'a AstNode, &[&'a AstNode]),
{
    visit(node, ancestors);
    ancestors.push(node);
    for child in &node.children {
        walk_inner(child, ancestors, visit);
    }
    ancestors.pop();
}

pub struct Descendants<'a> {
    stack: Vec<&'a AstNode>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a AstNode;

    fn next(&mut self) -> Option<&'a AstNode> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_slots_follow_declaration_order() {
        for (i, kind) in NodeKind::ALL.iter().enumerate() {
            assert_eq!(kind.index(), i);
        }
        assert_eq!(NodeKind::Literal.index(), NodeKind::COUNT - 1);
    }

    #[test]
    fn span_overlap_rules() {
        let a = Span::new(0, 10);
        assert!(a.overlaps(Span::new(9, 12)));
        assert!(!a.overlaps(Span::new(10, 12)));
        // insertion point at the boundary does not overlap
        assert!(!a.overlaps(Span::new(10, 10)));
        assert!(!a.overlaps(Span::new(0, 0)));
        assert!(a.overlaps(Span::new(5, 5)));
    }

    #[test]
    fn descendants_are_preorder() {
        let leaf = |s| AstNode::new(NodeKind::Identifier, Span::new(s, s + 1));
        let inner = AstNode::with_children(NodeKind::BinaryExpr, Span::new(0, 3), vec![leaf(0), leaf(2)]);
        let root = AstNode::with_children(NodeKind::ExprStmt, Span::new(0, 4), vec![inner]);
        let kinds: Vec<_> = root.descendants().map(|n| (n.kind, n.span.start)).collect();
        assert_eq!(
            kinds,
            vec![
                (NodeKind::ExprStmt, 0),
                (NodeKind::BinaryExpr, 0),
                (NodeKind::Identifier, 0),
                (NodeKind::Identifier, 2)
            ]
        );
    }
}
