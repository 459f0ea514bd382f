//! Replacement snippet templates: literal text with `{{argK}}` and
//! `{{ret}}` holes.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Placeholder {
    Arg(usize),
    Ret,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Text(String),
    Hole(Placeholder),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("unclosed `{{{{` at byte {0}")]
    Unclosed(usize),
    #[error("unknown placeholder `{{{{{0}}}}}`")]
    Unknown(String),
}

impl Template {
    pub fn parse(text: &str) -> Result<Template, TemplateError> {
        let mut segments = Vec::new();
        let mut rest = text;
        let mut offset = 0;
        while let Some(open) = rest.find("{{") {
            if open > 0 {
                segments.push(Segment::Text(rest[..open].to_string()));
            }
            let after = &rest[open + 2..];
            let close = after.find("}}").filter(|&c| !after[..c].contains("{{"));
            let close = close.ok_or(TemplateError::Unclosed(offset + open))?;
            let name = after[..close].trim();
            let hole = if name == "ret" {
                Placeholder::Ret
            } else {
                match name.strip_prefix("arg").map(str::parse::<usize>) {
                    Some(Ok(k)) => Placeholder::Arg(k),
                    _ => return Err(TemplateError::Unknown(name.to_string())),
                }
            };
            segments.push(Segment::Hole(hole));
            let consumed = open + 2 + close + 2;
            offset += consumed;
            rest = &rest[consumed..];
        }
        if !rest.is_empty() {
            segments.push(Segment::Text(rest.to_string()));
        }
        Ok(Template { segments })
    }

    /// Distinct placeholders, sorted.
    pub fn placeholders(&self) -> BTreeSet<Placeholder> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Hole(p) => Some(*p),
                Segment::Text(_) => None,
            })
            .collect()
    }

    pub fn uses_ret(&self) -> bool {
        self.placeholders().contains(&Placeholder::Ret)
    }

    /// Fills every hole through `fill`, stopping at the first error.
    pub fn render<E>(&self, mut fill: impl FnMut(Placeholder) -> Result<String, E>) -> Result<String, E> {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Hole(p) => out.push_str(&fill(*p)?),
            }
        }
        Ok(out)
    }
}
