//! Splices rendered replacement snippets into source text and writes
//! pattern variants to disk.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use regex::Regex;
use thiserror::Error;

use crate::detector::{OffloadCandidate, SiteKind};
use crate::frontend::{NodeKind, SourceUnit, Span};
use crate::interface::{ArgSource, InterfaceBinding};
use crate::pattern_db::{PatternDb, PatternRecord};
use crate::template::Placeholder;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("snippet references {{{{arg{0}}}}} but the binding has no value for it")]
    UnboundPlaceholder(usize),
    #[error("snippet uses {{{{ret}}}} but the site has no assignment target")]
    UnboundReturn,
    #[error("candidates {0} and {1} edit overlapping source ranges")]
    OverlapError(usize, usize),
    #[error("candidate {0} refers to unknown record `{1}`")]
    UnknownRecord(usize, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub span: Span,
    pub text: String,
    /// Candidate that owns the edit; `None` for include insertion.
    pub owner: Option<usize>,
}

/// Non-overlapping edits sorted by start offset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpliceSet {
    edits: Vec<Edit>,
}

impl SpliceSet {
    pub fn new(mut edits: Vec<Edit>) -> Result<SpliceSet, TransformError> {
        edits.sort_by_key(|e| (e.span.start, e.span.end));
        for (i, a) in edits.iter().enumerate() {
            for b in &edits[i + 1..] {
                if b.span.start >= a.span.end && !a.span.is_empty() {
                    break;
                }
                let clash = a.span.overlaps(b.span) || (a.span == b.span && !a.span.is_empty());
                if clash {
                    let (x, y) = (a.owner.unwrap_or(usize::MAX), b.owner.unwrap_or(usize::MAX));
                    return Err(TransformError::OverlapError(x.min(y), x.max(y)));
                }
            }
        }
        Ok(SpliceSet { edits })
    }

    pub fn edits(&self) -> &[Edit] {
        &self.edits
    }

    /// Applies edits from the highest offset down so earlier spans stay valid.
    pub fn apply(&self, text: &str) -> String {
        let mut out = text.to_string();
        for e in self.edits.iter().rev() {
            out.replace_range(e.span.start..e.span.end, &e.text);
        }
        out
    }
}

/// Context a snippet is rendered into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteArgs<'a> {
    pub args: &'a [String],
    pub ret_target: Option<&'a str>,
    pub as_statement: bool,
}

pub fn render_snippet(record: &PatternRecord, binding: &InterfaceBinding, site: &SiteArgs<'_>) -> Result<String, TransformError> {
    let text = record.template().render(|hole| match hole {
        Placeholder::Ret => site.ret_target.map(str::to_string).ok_or(TransformError::UnboundReturn),
        Placeholder::Arg(k) => {
            let entry = binding.for_param(k).ok_or(TransformError::UnboundPlaceholder(k))?;
            let raw = match &entry.source {
                ArgSource::Arg { index, .. } => site.args.get(*index).cloned(),
                ArgSource::DefaultedOptional { param } => record.interface.params.get(*param).and_then(|p| p.default.clone()),
                ArgSource::DroppedOptional { .. } | ArgSource::Missing { .. } => None,
            };
            let raw = raw.ok_or(TransformError::UnboundPlaceholder(k))?;
            Ok(match entry.cast.as_ref().and_then(|c| c.to.c_name()) {
                Some(ctype) => format!("({ctype})({raw})"),
                None => raw,
            })
        }
    })?;
    let trimmed = text.trim_end();
    Ok(if site.as_statement {
        if trimmed.ends_with(';') || trimmed.ends_with('}') {
            text
        } else {
            format!("{trimmed};")
        }
    } else {
        trimmed.strip_suffix(';').unwrap_or(trimmed).trim_end().to_string()
    })
}

/// Replacement text for a candidate's site.
pub fn render_candidate(record: &PatternRecord, cand: &OffloadCandidate) -> Result<String, TransformError> {
    let site = SiteArgs {
        args: &cand.args,
        ret_target: cand.ret_target.as_deref(),
        as_statement: !matches!(cand.site_kind, SiteKind::Expression),
    };
    let body = render_snippet(record, &cand.binding, &site)?;
    Ok(match &cand.site_kind {
        SiteKind::Body { ret_ctype: Some(ctype) } => {
            let slot = cand.ret_target.as_deref().unwrap_or(crate::detector::BODY_RET);
            format!("{{\n    {ctype} {slot};\n    {body}\n    return {slot};\n}}")
        }
        SiteKind::Body { ret_ctype: None } => format!("{{\n    {body}\n}}"),
        SiteKind::Statement | SiteKind::Expression => body,
    })
}

pub fn removal_marker(record_id: &str) -> String {
    format!("/* blockoff: removed {record_id} */")
}

/// Offset just past the last top-level `#include` line, or 0.
pub fn include_insertion_point(unit: &SourceUnit) -> usize {
    let last = unit
        .root
        .children
        .iter()
        .rev()
        .find(|n| n.kind == NodeKind::OpaqueStmt && is_include_line(unit.slice(n.span)))
        .map(|n| n.span.end);
    match last {
        Some(end) => match unit.text[end..].find('\n') {
            Some(nl) => end + nl + 1,
            None => unit.text.len(),
        },
        None => 0,
    }
}

fn is_include_line(text: &str) -> bool {
    text.trim_start().strip_prefix('#').is_some_and(|rest| rest.trim_start().starts_with("include"))
}

fn already_included(text: &str, header: &str) -> bool {
    let pattern = format!(r#"(?m)^[ \t]*#[ \t]*include[ \t]*[<"]{}[>"]"#, regex::escape(header));
    Regex::new(&pattern).is_ok_and(|re| re.is_match(text))
}

/// Edits realizing `on` (candidates of this unit switched ON).
pub fn splice_set(unit: &SourceUnit, on: &[&OffloadCandidate], db: &PatternDb) -> Result<SpliceSet, TransformError> {
    let mut edits = Vec::new();
    let mut headers: Vec<&str> = Vec::new();
    for cand in on {
        let record = db.get(&cand.record).ok_or_else(|| TransformError::UnknownRecord(cand.index, cand.record.clone()))?;
        edits.push(Edit { span: cand.site, text: render_candidate(record, cand)?, owner: Some(cand.index) });
        for r in &cand.removals {
            edits.push(Edit { span: *r, text: removal_marker(&record.id), owner: Some(cand.index) });
        }
        for h in &record.replacement.includes {
            if !headers.contains(&h.as_str()) {
                headers.push(h);
            }
        }
    }
    let missing: Vec<&str> = headers.into_iter().filter(|h| !already_included(&unit.text, h)).collect();
    if !missing.is_empty() {
        let at = include_insertion_point(unit);
        let mut text: String = missing.iter().map(|h| format!("#include \"{h}\"\n")).collect();
        if at > 0 && !unit.text[..at].ends_with('\n') {
            text.insert(0, '\n');
        }
        edits.push(Edit { span: Span::new(at, at), text, owner: None });
    }
    SpliceSet::new(edits)
}

/// The unit's text with `on` applied. An empty `on` returns the input.
pub fn apply(unit: &SourceUnit, on: &[&OffloadCandidate], db: &PatternDb) -> Result<String, TransformError> {
    Ok(splice_set(unit, on, db)?.apply(&unit.text))
}

#[derive(Debug, Error)]
pub enum VariantError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("two sources share the file name `{0}`")]
    NameClash(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

/// Writes every unit, edited where `on` touches it, to `dir`.
pub fn write_variant(dir: &Path, units: &[SourceUnit], on: &[&OffloadCandidate], db: &PatternDb) -> Result<(), VariantError> {
    let mut names = BTreeSet::new();
    for u in units {
        if !names.insert(u.file_name()) {
            return Err(VariantError::NameClash(u.file_name()));
        }
    }
    fs::create_dir_all(dir).map_err(|source| VariantError::Io { path: dir.to_path_buf(), source })?;
    for u in units {
        let mine: Vec<&OffloadCandidate> = on.iter().copied().filter(|c| c.file == u.path).collect();
        let text = apply(u, &mine, db)?;
        let path = dir.join(u.file_name());
        fs::write(&path, text).map_err(|source| VariantError::Io { path, source })?;
    }
    Ok(())
}
