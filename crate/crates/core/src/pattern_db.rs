//! Code-pattern database: one JSON record per file under `<root>/patterns/`.
//! Each record names a detectable source form (callee names and/or a
//! reference implementation) and the replacement that supersedes it.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::template::{Placeholder, Template};
use crate::types::{ReturnType, TypeTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    GpuLibrary,
    /// Validated and routed to a backend profile like any other record; no
    /// synthesis happens here.
    FpgaIpCore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceLibrary {
    #[serde(default)]
    pub callee_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplacementSpec {
    pub snippet: String,
    #[serde(default)]
    pub includes: Vec<String>,
    #[serde(default)]
    pub link_flags: Vec<String>,
    pub backend_profile: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeTag,
    #[serde(default)]
    pub optional: bool,
    /// Expression substituted when the caller omits this optional param.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceDescriptor {
    pub params: Vec<ParamSpec>,
    pub returns: ReturnType,
}

impl InterfaceDescriptor {
    pub fn required_count(&self) -> usize {
        self.params.iter().filter(|p| !p.optional).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternRecord {
    pub id: String,
    pub kind: RecordKind,
    pub source_library: SourceLibrary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison_code: Option<PathBuf>,
    pub replacement: ReplacementSpec,
    pub interface: InterfaceDescriptor,
}

impl PatternRecord {
    pub fn template(&self) -> Template {
        // validated at load time
        Template::parse(&self.replacement.snippet).expect("record snippet validated on load")
    }

    fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("`id` must be non-empty".into());
        }
        if self.source_library.callee_names.is_empty() && self.comparison_code.is_none() {
            return Err("record needs `source_library.callee_names` or `comparison_code`".into());
        }
        if let Some(pos) = self.interface.params.iter().position(|p| p.optional) {
            if let Some(bad) = self.interface.params[pos..].iter().find(|p| !p.optional) {
                return Err(format!("required param `{}` follows an optional one", bad.name));
            }
        }
        let template = Template::parse(&self.replacement.snippet).map_err(|e| format!("replacement.snippet: {e}"))?;
        for ph in template.placeholders() {
            match ph {
                Placeholder::Arg(k) if k >= self.interface.params.len() => {
                    return Err(format!(
                        "replacement.snippet references {{{{arg{k}}}}} but interface has {} params",
                        self.interface.params.len()
                    ));
                }
                Placeholder::Ret if self.interface.returns.is_void() => {
                    return Err("replacement.snippet uses {{ret}} but interface returns void".into());
                }
                _ => {}
            }
        }
        if self.replacement.backend_profile.trim().is_empty() {
            return Err("replacement.backend_profile must be non-empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DbError {
    #[error("{}: cannot read: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: schema error: {message}", file.display())]
    SchemaError { file: PathBuf, message: String },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("record `{id}`: comparison_code {} not found", path.display())]
    DanglingPath { id: String, path: PathBuf },
}

/// Loaded, validated records in id order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternDb {
    pub root: PathBuf,
    pub records: Vec<PatternRecord>,
}

impl PatternDb {
    /// Reads every `*.json` under `<root>/patterns`. A root without a
    /// `patterns` directory is an empty database.
    pub fn load(root: impl AsRef<Path>) -> Result<PatternDb, DbError> {
        let root = root.as_ref();
        let dir = root.join("patterns");
        if !root.is_dir() {
            return Err(DbError::Io {
                path: root.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "database root is not a directory"),
            });
        }
        if !dir.is_dir() {
            return Ok(PatternDb { root: root.to_path_buf(), records: Vec::new() });
        }
        let entries = fs::read_dir(&dir).map_err(|source| DbError::Io { path: dir.clone(), source })?;
        let mut files = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|source| DbError::Io { path: dir.clone(), source })?;
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "json") && path.is_file() {
                files.push(path);
            }
        }
        files.sort();

        let mut records = Vec::with_capacity(files.len());
        for file in files {
            let text = fs::read_to_string(&file).map_err(|source| DbError::Io { path: file.clone(), source })?;
            records.push(parse_record(&file, &text)?);
        }
        records.sort_by(|a, b| a.id.cmp(&b.id));

        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(DbError::DuplicateId(r.id.clone()));
            }
            if let Some(rel) = &r.comparison_code {
                let full = root.join(rel);
                if !full.is_file() {
                    return Err(DbError::DanglingPath { id: r.id.clone(), path: full });
                }
            }
        }
        Ok(PatternDb { root: root.to_path_buf(), records })
    }

    /// Records whose callee list contains `name` exactly, in id order.
    pub fn lookup_by_callee(&self, name: &str) -> Vec<&PatternRecord> {
        self.records.iter().filter(|r| r.source_library.callee_names.iter().any(|c| c == name)).collect()
    }

    pub fn get(&self, id: &str) -> Option<&PatternRecord> {
        self.records.binary_search_by(|r| r.id.as_str().cmp(id)).ok().map(|i| &self.records[i])
    }

    pub fn comparison_path(&self, record: &PatternRecord) -> Option<PathBuf> {
        record.comparison_code.as_ref().map(|p| self.root.join(p))
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }
}

/// Parses and validates one record document.
pub fn parse_record(file: &Path, text: &str) -> Result<PatternRecord, DbError> {
    let schema = |message: String| DbError::SchemaError { file: file.to_path_buf(), message };
    let record: PatternRecord = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    record.validate().map_err(schema)?;
    Ok(record)
}
