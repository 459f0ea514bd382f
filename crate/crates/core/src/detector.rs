//! Finds offload candidates in one translation unit, either by callee name
//! or by structural similarity of a function definition to a record's
//! reference implementation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::frontend::typing::expr_tag;
use crate::frontend::{list_definitions, parse_file, AstNode, DefinitionKind, NodeKind, SourceUnit, Span};
use crate::interface::{bind, BindStatus, CallInfo, InterfaceBinding, ReturnUse};
use crate::pattern_db::{PatternDb, PatternRecord};
use crate::similarity::{similarity, vectorize, CharacteristicVector, MIN_TOKEN_MASS};
use crate::types::TypeTag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    NameMatch,
    SimilarityMatch { score: f64 },
}

impl Origin {
    pub fn score(&self) -> Option<f64> {
        match self {
            Origin::NameMatch => None,
            Origin::SimilarityMatch { score } => Some(*score),
        }
    }
}

/// How the replaced bytes sit in the surrounding code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteKind {
    /// A whole statement, trailing `;` included.
    Statement,
    /// A call nested in a larger expression.
    Expression,
    /// A function body `{ ... }`; `ret_ctype` names the slot type when the
    /// snippet produces a value.
    Body { ret_ctype: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloadCandidate {
    pub index: usize,
    pub file: PathBuf,
    pub site: Span,
    /// 1-based line of `site.start`.
    pub line: usize,
    pub record: String,
    pub origin: Origin,
    pub binding: InterfaceBinding,
    pub site_kind: SiteKind,
    /// Source text of each argument, in call order.
    pub args: Vec<String>,
    /// Assignment target substituted for `{{ret}}`.
    pub ret_target: Option<String>,
    /// Superseded definitions deleted together with the site edit.
    pub removals: Vec<Span>,
    /// Other candidates (by index) whose edits collide with this one.
    pub overlaps: Vec<usize>,
    /// Set once the user approves a binding that needs confirmation.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub approved: bool,
}

impl OffloadCandidate {
    pub fn edit_spans(&self) -> impl Iterator<Item = Span> + '_ {
        std::iter::once(self.site).chain(self.removals.iter().copied())
    }

    pub fn conflicts_with(&self, other: &OffloadCandidate) -> bool {
        self.file == other.file && self.edit_spans().any(|a| other.edit_spans().any(|b| a.overlaps(b) || a == b))
    }

    /// Eligible for a pattern: automatically bound, or approved.
    pub fn is_executable(&self) -> bool {
        match self.binding.status {
            BindStatus::AutoBind | BindStatus::AutoBindWithCasts => true,
            BindStatus::ConfirmationRequired => self.approved,
            BindStatus::Incompatible => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectWarning {
    pub record: String,
    pub message: String,
}

impl std::fmt::Display for DetectWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "record `{}`: {}", self.record, self.message)
    }
}

struct CallSite<'a> {
    call: &'a AstNode,
    /// Nearest ancestors, innermost first (up to two).
    parent: Option<&'a AstNode>,
    grandparent: Option<&'a AstNode>,
}

fn call_sites(root: &AstNode) -> Vec<CallSite<'_>> {
    let mut out = Vec::new();
    root.walk_with_ancestors(&mut |node, ancestors| {
        if node.kind == NodeKind::CallExpr {
            let mut up = ancestors.iter().rev();
            let parent = up.next().copied();
            let grandparent = up.next().copied();
            out.push(CallSite { call: node, parent, grandparent });
        }
    });
    out
}

fn call_args(call: &AstNode) -> &[AstNode] {
    call.child(NodeKind::ArgList).map(|a| a.children.as_slice()).unwrap_or(&[])
}

/// Chooses the replaced span for a call and describes how its value is used.
fn locate(unit: &SourceUnit, site: &CallSite<'_>, wants_ret: bool) -> (Span, SiteKind, ReturnUse, Option<String>) {
    let call = site.call;
    if let Some(p) = site.parent {
        if p.kind == NodeKind::ExprStmt && p.children.len() == 1 {
            return (p.span, SiteKind::Statement, ReturnUse::Discarded, None);
        }
        let is_rhs = p.kind == NodeKind::AssignExpr && p.children.get(1).is_some_and(|c| std::ptr::eq(c, call));
        if is_rhs && p.name.as_deref() == Some("=") {
            let lhs = &p.children[0];
            let use_ = ReturnUse::Assigned(expr_tag(unit, lhs));
            let target = Some(unit.slice(lhs.span).to_string());
            if wants_ret {
                if let Some(g) = site.grandparent.filter(|g| g.kind == NodeKind::ExprStmt && g.children.len() == 1) {
                    return (g.span, SiteKind::Statement, use_, target);
                }
            }
            return (call.span, SiteKind::Expression, use_, target);
        }
    }
    (call.span, SiteKind::Expression, ReturnUse::Expression(TypeTag::Unknown), None)
}

fn call_info(unit: &SourceUnit, call: &AstNode, callee: &str, return_use: ReturnUse) -> CallInfo {
    let args = call_args(call);
    CallInfo {
        arg_tags: args.iter().map(|a| expr_tag(unit, a)).collect(),
        arg_spans: args.iter().map(|a| a.span).collect(),
        return_use,
        source_required: unit.symbols.function(callee).map(|f| f.required_arity()),
    }
}

/// Binds and downgrades bindings the snippet cannot be rendered for.
fn bind_for(record: &PatternRecord, info: &CallInfo, ret_target: &Option<String>) -> InterfaceBinding {
    let mut binding = bind(info, &record.interface);
    if record.template().uses_ret() && ret_target.is_none() && binding.status != BindStatus::Incompatible {
        binding.status = BindStatus::Incompatible;
        binding.notes.push("the replacement assigns its result but the call site has no assignment target".into());
    }
    binding
}

fn candidate_from_call(unit: &SourceUnit, site: &CallSite<'_>, record: &PatternRecord, origin: Origin) -> OffloadCandidate {
    let callee = site.call.name.as_deref().unwrap_or("");
    let (span, site_kind, return_use, ret_target) = locate(unit, site, record.template().uses_ret());
    let info = call_info(unit, site.call, callee, return_use);
    let binding = bind_for(record, &info, &ret_target);
    OffloadCandidate {
        index: 0,
        file: unit.path.clone(),
        site: span,
        line: unit.line_col(span.start).0,
        record: record.id.clone(),
        origin,
        binding,
        site_kind,
        args: call_args(site.call).iter().map(|a| unit.slice(a.span).to_string()).collect(),
        ret_target,
        removals: Vec::new(),
        overlaps: Vec::new(),
        approved: false,
    }
}

/// One candidate per (call, record) pair whose callee the record lists.
pub fn detect_by_name(unit: &SourceUnit, db: &PatternDb) -> Vec<OffloadCandidate> {
    let mut out = Vec::new();
    for site in call_sites(&unit.root) {
        let Some(name) = site.call.name.as_deref() else { continue };
        for record in db.lookup_by_callee(name) {
            out.push(candidate_from_call(unit, &site, record, Origin::NameMatch));
        }
    }
    finish(out)
}

/// Precomputed reference vectors for every record that has comparison code.
#[derive(Debug, Clone, Default)]
pub struct SimilarityIndex {
    pub references: Vec<(String, CharacteristicVector)>,
    pub warnings: Vec<DetectWarning>,
}

impl SimilarityIndex {
    pub fn build(db: &PatternDb) -> SimilarityIndex {
        let mut index = SimilarityIndex::default();
        for record in &db.records {
            let Some(path) = db.comparison_path(record) else { continue };
            match reference_vector(&path, record) {
                Ok(v) => index.references.push((record.id.clone(), v)),
                Err(message) => index.warnings.push(DetectWarning { record: record.id.clone(), message }),
            }
        }
        index
    }
}

fn reference_vector(path: &Path, record: &PatternRecord) -> Result<CharacteristicVector, String> {
    let unit = parse_file(path).map_err(|e| format!("reference does not parse: {e}"))?;
    let defs = list_definitions(&unit);
    let functions: Vec<_> = defs.iter().filter(|d| d.kind == DefinitionKind::FunctionDef).collect();
    let chosen = functions
        .iter()
        .find(|d| record.source_library.callee_names.iter().any(|c| c == d.name))
        .or_else(|| functions.first())
        .ok_or_else(|| format!("reference {} defines no function", path.display()))?;
    Ok(vectorize(chosen.body()))
}

/// Candidates for unit functions whose body is at least `threshold`-similar
/// to a record's reference body.
pub fn detect_by_similarity(
    unit: &SourceUnit,
    db: &PatternDb,
    index: &SimilarityIndex,
    threshold: f64,
) -> Vec<OffloadCandidate> {
    let sites = call_sites(&unit.root);
    let mut out = Vec::new();
    for def in list_definitions(unit) {
        if def.kind != DefinitionKind::FunctionDef {
            continue;
        }
        let body = def.body();
        let v = vectorize(body);
        if v.token_mass < MIN_TOKEN_MASS {
            continue;
        }
        for (id, reference) in &index.references {
            let score = similarity(&v, reference);
            if score < threshold {
                continue;
            }
            let Some(record) = db.get(id) else { continue };
            let origin = Origin::SimilarityMatch { score };
            let calls: Vec<&CallSite<'_>> = sites.iter().filter(|s| s.call.name.as_deref() == Some(def.name)).collect();
            let external = calls.iter().filter(|s| !def.node.span.contains(s.call.span)).count();
            if calls.len() == 1 && external == 1 {
                let mut c = candidate_from_call(unit, calls[0], record, origin);
                c.removals.push(def.node.span);
                out.push(c);
            } else {
                out.push(candidate_for_body(unit, def.node, body, record, origin));
            }
        }
    }
    finish(out)
}

fn candidate_for_body(
    unit: &SourceUnit,
    def: &AstNode,
    body: &AstNode,
    record: &PatternRecord,
    origin: Origin,
) -> OffloadCandidate {
    let sig = unit.symbols.functions.iter().find(|f| f.has_body && f.span == def.span);
    let (args, tags, ret_tag) = match sig {
        Some(f) => (
            f.params.iter().map(|p| p.name.clone().unwrap_or_default()).collect::<Vec<_>>(),
            f.params.iter().map(|p| p.ty.tag(&unit.symbols.typedefs)).collect::<Vec<_>>(),
            f.ret.tag(&unit.symbols.typedefs),
        ),
        None => (Vec::new(), Vec::new(), TypeTag::Unknown),
    };
    let returns_void = sig.is_some_and(|f| f.ret.indirection == 0 && f.ret.base == crate::frontend::symbols::BaseType::Void);
    let (return_use, ret_target, ret_ctype) = if returns_void {
        (ReturnUse::Discarded, None, None)
    } else {
        (ReturnUse::Assigned(ret_tag.clone()), Some(BODY_RET.to_string()), ret_tag.c_name())
    };
    let info = CallInfo { arg_tags: tags, arg_spans: Vec::new(), return_use, source_required: None };
    let mut binding = bind_for(record, &info, &ret_target);
    if !returns_void && ret_ctype.is_none() && binding.status != BindStatus::Incompatible {
        binding.status = BindStatus::Incompatible;
        binding.notes.push(format!("cannot declare a result slot of type {ret_tag}"));
    }
    if args.iter().any(String::is_empty) && binding.status != BindStatus::Incompatible {
        binding.status = BindStatus::Incompatible;
        binding.notes.push("function has unnamed parameters".into());
    }
    OffloadCandidate {
        index: 0,
        file: unit.path.clone(),
        site: body.span,
        line: unit.line_col(body.span.start).0,
        record: record.id.clone(),
        origin,
        binding,
        site_kind: SiteKind::Body { ret_ctype },
        args,
        ret_target,
        removals: Vec::new(),
        overlaps: Vec::new(),
        approved: false,
    }
}

/// Name of the local that receives the snippet's result in a rewritten body.
pub const BODY_RET: &str = "blockoff_ret";

/// Both detectors, merged, deduplicated and indexed.
pub fn detect(unit: &SourceUnit, db: &PatternDb, index: &SimilarityIndex, threshold: f64) -> Vec<OffloadCandidate> {
    let mut all = detect_by_name(unit, db);
    for c in detect_by_similarity(unit, db, index, threshold) {
        if !all.iter().any(|n| n.site == c.site && n.record == c.record) {
            all.push(c);
        }
    }
    finish(all)
}

/// Sorts by site, assigns indices, and records pairwise conflicts.
pub fn finish(mut cands: Vec<OffloadCandidate>) -> Vec<OffloadCandidate> {
    cands.sort_by(|a, b| (&a.file, a.site.start, a.site.end, &a.record).cmp(&(&b.file, b.site.start, b.site.end, &b.record)));
    reindex(cands)
}

/// Assigns indices in the current order and records pairwise conflicts.
pub fn reindex(mut cands: Vec<OffloadCandidate>) -> Vec<OffloadCandidate> {
    for (i, c) in cands.iter_mut().enumerate() {
        c.index = i;
        c.overlaps.clear();
    }
    for i in 0..cands.len() {
        for j in i + 1..cands.len() {
            if cands[i].conflicts_with(&cands[j]) {
                cands[i].overlaps.push(j);
                cands[j].overlaps.push(i);
            }
        }
    }
    for c in &mut cands {
        c.overlaps.sort_unstable();
    }
    cands
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::pattern_db::parse_record;
    use std::fs;

    const RECORD: &str = r#"{
      "id": "fft2d", "kind": "gpu_library",
      "source_library": { "callee_names": ["four1"] },
      "replacement": { "snippet": "fastlib_fft({{arg0}}, {{arg1}}, {{arg2}});", "includes": ["fastlib.h"],
                       "link_flags": [], "backend_profile": "accel" },
      "interface": { "params": [ {"name": "data", "type": "f64_array"}, {"name": "nn", "type": "u64"},
                                 {"name": "isign", "type": "i32", "optional": true} ], "returns": "void" }
    }"#;

    fn db_with(records: &[&str]) -> PatternDb {
        let records = records.iter().map(|r| parse_record(Path::new("r.json"), r).unwrap()).collect();
        PatternDb { root: PathBuf::from("."), records }
    }

    #[test]
    fn standalone_call_site_is_the_statement() {
        let src = "void four1(double *d, unsigned long n, int s);\nint main(void) { double *data = 0; unsigned long nn = 8; int isign = 1;\n  four1(data, nn, isign);\n  return 0; }\n";
        let unit = parse("a.c", src).unwrap();
        let cands = detect_by_name(&unit, &db_with(&[RECORD]));
        assert_eq!(cands.len(), 1);
        let c = &cands[0];
        assert_eq!(unit.slice(c.site), "four1(data, nn, isign);");
        assert_eq!(c.site_kind, SiteKind::Statement);
        assert_eq!(c.line, 3);
        assert_eq!(c.binding.status, BindStatus::AutoBind);
        assert_eq!(c.args, vec!["data", "nn", "isign"]);
    }

    #[test]
    fn nested_call_site_is_the_expression() {
        let src = "int main(void) { double *d; unsigned long n; int s; s = g(four1(d, n, s)); four1(d, n, 1); return 0; }";
        let unit = parse("a.c", src).unwrap();
        let cands = detect_by_name(&unit, &db_with(&[RECORD]));
        assert_eq!(cands.len(), 2);
        assert_eq!(unit.slice(cands[0].site), "four1(d, n, s)");
        assert_eq!(cands[0].site_kind, SiteKind::Expression);
        assert_eq!(cands[0].binding.status, BindStatus::ConfirmationRequired);
        assert_eq!(cands.iter().map(|c| c.index).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn empty_db_finds_nothing() {
        let unit = parse("a.c", "int main(void) { four1(0, 1, 1); return 0; }").unwrap();
        assert!(detect_by_name(&unit, &PatternDb::default()).is_empty());
    }

    #[test]
    fn ret_snippet_takes_the_assignment_statement() {
        let rec = RECORD
            .replace("fastlib_fft({{arg0}}", "{{ret}} = fastlib_fft({{arg0}}")
            .replace("\"returns\": \"void\"", "\"returns\": \"i32\"");
        let src = "int main(void) { double *d; unsigned long n; int s, r; r = four1(d, n, s); four1(d, n, s); return r; }";
        let unit = parse("a.c", src).unwrap();
        let cands = detect_by_name(&unit, &db_with(&[&rec]));
        assert_eq!(unit.slice(cands[0].site), "r = four1(d, n, s);");
        assert_eq!(cands[0].ret_target.as_deref(), Some("r"));
        assert_eq!(cands[0].binding.status, BindStatus::AutoBind);
        assert_eq!(cands[1].binding.status, BindStatus::Incompatible);
    }

    fn similarity_fixture(reference: &str, app: &str) -> (tempfile::TempDir, PatternDb, SourceUnit) {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("patterns")).unwrap();
        fs::create_dir_all(dir.path().join("refs")).unwrap();
        fs::write(dir.path().join("refs/ref.c"), reference).unwrap();
        let rec = RECORD.replace("\"source_library\"", "\"comparison_code\": \"refs/ref.c\", \"source_library\"");
        fs::write(dir.path().join("patterns/fft2d.json"), rec).unwrap();
        let db = PatternDb::load(dir.path()).unwrap();
        (dir, db, parse("app.c", app).unwrap())
    }

    const REF: &str = "void four1(double *data, unsigned long nn, int isign) {\n  unsigned long i, j;\n  for (i = 0; i < nn; i++) {\n    for (j = 0; j < nn; j++) {\n      data[i] = data[i] * isign + data[j] / 2.0;\n    }\n  }\n}\n";

    #[test]
    fn single_call_clone_rewrites_call_and_removes_definition() {
        let app = "static void mix(double *v, unsigned long m, int s) {\n  unsigned long a, b;\n  for (a = 0; a < m; a++) {\n    for (b = 0; b < m; b++) {\n      v[a] = v[a] * s + v[b] / 2.0; /* hi */\n    }\n  }\n}\nint main(void) { double v[4] = {0}; mix(v, 4, 1); return 0; }\n";
        let (_d, db, unit) = similarity_fixture(REF, app);
        let index = SimilarityIndex::build(&db);
        assert!(index.warnings.is_empty());
        let cands = detect_by_similarity(&unit, &db, &index, 0.9);
        assert_eq!(cands.len(), 1);
        let c = &cands[0];
        assert_eq!(c.origin, Origin::SimilarityMatch { score: 1.0 });
        assert_eq!(unit.slice(c.site), "mix(v, 4, 1);");
        assert_eq!(c.removals.len(), 1);
        assert!(unit.slice(c.removals[0]).starts_with("static void mix"));
        assert!(c.overlaps.is_empty());
    }

    #[test]
    fn multi_call_clone_rewrites_body() {
        let app = "void mix(double *v, unsigned long m, int s) {\n  unsigned long a, b;\n  for (a = 0; a < m; a++) {\n    for (b = 0; b < m; b++) {\n      v[a] = v[a] * s + v[b] / 2.0;\n    }\n  }\n}\nint main(void) { double v[4] = {0}; mix(v, 4, 1); mix(v, 4, -1); return 0; }\n";
        let (_d, db, unit) = similarity_fixture(REF, app);
        let cands = detect_by_similarity(&unit, &db, &SimilarityIndex::build(&db), 0.9);
        assert_eq!(cands.len(), 1);
        assert!(matches!(cands[0].site_kind, SiteKind::Body { ret_ctype: None }));
        assert!(unit.slice(cands[0].site).starts_with('{'));
        assert_eq!(cands[0].args, vec!["v", "m", "s"]);
        assert_eq!(cands[0].binding.status, BindStatus::AutoBind);
    }

    #[test]
    fn threshold_and_size_gate() {
        let edited = "void mix(double *v, unsigned long m, int s) {\n  unsigned long a, b;\n  for (a = 0; a < m; a++) {\n    for (b = 0; b < m; b++) {\n      v[a] = v[a] * s + v[b] / 2.0 + 1.0;\n    }\n  }\n}\nvoid tiny(int x) { x = 1; }\n";
        let (_d, db, unit) = similarity_fixture(REF, edited);
        let index = SimilarityIndex::build(&db);
        assert!(detect_by_similarity(&unit, &db, &index, 1.0).is_empty());
        let loose = detect_by_similarity(&unit, &db, &index, 0.0);
        assert_eq!(loose.len(), 1, "tiny() is below the size gate");
        assert!(loose[0].origin.score().unwrap() < 1.0);
    }

    #[test]
    fn unparseable_reference_is_a_warning() {
        let (_d, db, _unit) = similarity_fixture("void f( {", "int main(void) { return 0; }");
        let index = SimilarityIndex::build(&db);
        assert!(index.references.is_empty());
        assert_eq!(index.warnings.len(), 1);
        assert_eq!(index.warnings[0].record, "fft2d");
    }

    #[test]
    fn name_and_similarity_hits_on_the_same_site_dedupe() {
        let app = "static void four1(double *v, unsigned long m, int s) {\n  unsigned long a, b;\n  for (a = 0; a < m; a++) {\n    for (b = 0; b < m; b++) {\n      v[a] = v[a] * s + v[b] / 2.0;\n    }\n  }\n}\nint main(void) { double v[4] = {0}; four1(v, 4, 1); return 0; }\n";
        let (_d, db, unit) = similarity_fixture(REF, app);
        let cands = detect(&unit, &db, &SimilarityIndex::build(&db), 0.9);
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].origin, Origin::NameMatch);
    }
}
