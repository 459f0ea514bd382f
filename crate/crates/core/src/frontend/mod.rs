//! Span-preserving front end for C-like source.
//!
//! The tree covers the whole file: constructs outside the supported subset
//! (preprocessor lines, `switch`, `goto`, function-pointer declarations,
//! ...) become `OpaqueStmt` nodes, and comments/whitespace live in the gaps
//! between sibling spans. Parsing works on un-preprocessed text so that
//! rewrites land in the user's file.

pub mod ast;
mod lexer;
mod parser;
pub mod symbols;
pub mod typing;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use ast::{AstNode, NodeKind, Span};
pub use symbols::{CType, FunctionSig, SymbolTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: unbalanced delimiters: {message}")]
    UnbalancedDelimiters { line: usize, column: usize, message: String },
    #[error("{line}:{column}: unterminated {what}")]
    Unterminated { line: usize, column: usize, what: &'static str },
    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    InvalidUtf8 { offset: usize },
}

impl ParseError {
    pub(crate) fn unbalanced(src: &str, offset: usize, message: String) -> Self {
        let (line, column) = line_col(src, offset);
        ParseError::UnbalancedDelimiters { line, column, message }
    }

    pub(crate) fn unterminated(src: &str, offset: usize, what: &'static str) -> Self {
        let (line, column) = line_col(src, offset);
        ParseError::Unterminated { line, column, what }
    }

    pub(crate) fn position(src: &str, offset: usize) -> String {
        let (line, column) = line_col(src, offset);
        format!("{line}:{column}")
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.bytes().filter(|&b| b == b'\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = src[line_start..offset].chars().count() + 1;
    (line, column)
}

/// One parsed translation unit.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: PathBuf,
    pub text: String,
    pub root: AstNode,
    pub symbols: SymbolTable,
}

impl SourceUnit {
    pub fn bytes(&self) -> &[u8] {
        self.text.as_bytes()
    }

    pub fn slice(&self, span: Span) -> &str {
        &self.text[span.start..span.end]
    }

    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        line_col(&self.text, offset)
    }

    pub fn file_name(&self) -> String {
        self.path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
    }
}

/// Parses one translation unit. Deterministic; never drops input bytes.
pub fn parse(path: impl Into<PathBuf>, text: impl Into<String>) -> Result<SourceUnit, ParseError> {
    let text = text.into();
    let tokens = lexer::tokenize(&text)?;
    let parser = parser::Parser::new(&text, tokens)?;
    let (root, symbols) = parser.parse_translation_unit();
    Ok(SourceUnit { path: path.into(), text, root, symbols })
}

/// Like [`parse`], for raw bytes that still need UTF-8 validation.
pub fn parse_bytes(path: impl Into<PathBuf>, bytes: Vec<u8>) -> Result<SourceUnit, ParseError> {
    let text = String::from_utf8(bytes).map_err(|e| ParseError::InvalidUtf8 { offset: e.utf8_error().valid_up_to() })?;
    parse(path, text)
}

/// Reads and parses a file.
pub fn parse_file(path: &Path) -> Result<SourceUnit, FileError> {
    let bytes = std::fs::read(path).map_err(|source| FileError::Io { path: path.to_path_buf(), source })?;
    parse_bytes(path, bytes).map_err(|source| FileError::Parse { path: path.to_path_buf(), source })
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
}

/// Every call expression in document order; an enclosing call is listed
/// before the calls nested in its arguments.
pub fn list_calls(unit: &SourceUnit) -> Vec<(&str, &AstNode)> {
    unit.root
        .descendants()
        .filter(|n| n.kind == NodeKind::CallExpr)
        .map(|n| (n.name.as_deref().unwrap_or(""), n))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum DefinitionKind {
    FunctionDef,
    StructDef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Definition<'a> {
    pub kind: DefinitionKind,
    /// Empty for anonymous structs.
    pub name: &'a str,
    pub node: &'a AstNode,
}

impl<'a> Definition<'a> {
    /// The function body or struct member block.
    pub fn body(&self) -> &'a AstNode {
        match self.kind {
            DefinitionKind::FunctionDef => self.node.child(NodeKind::CompoundStmt).unwrap_or(self.node),
            DefinitionKind::StructDef => self.node,
        }
    }
}

/// Function and struct definitions (with bodies) in document order,
/// including structs nested in typedefs and declarations.
pub fn list_definitions(unit: &SourceUnit) -> Vec<Definition<'_>> {
    unit.root
        .descendants()
        .filter_map(|n| {
            let kind = match n.kind {
                NodeKind::FunctionDef => DefinitionKind::FunctionDef,
                NodeKind::StructDef => DefinitionKind::StructDef,
                _ => return None,
            };
            Some(Definition { kind, name: n.name.as_deref().unwrap_or(""), node: n })
        })
        .collect()
}
