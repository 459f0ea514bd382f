//! Recursive-descent parser for the supported C subset.
//!
//! Anything outside the subset is captured as an `OpaqueStmt` covering the
//! tokens up to the next top-level `;` or balanced `{}` block, so no input
//! byte is ever dropped from the tree. Delimiter balance is checked up
//! front; after that the parser can jump over any bracketed group in O(1).

use std::collections::HashSet;

use super::ast::{AstNode, NodeKind, Span};
use super::lexer::{TokKind, Token};
use super::symbols::{BaseType, CType, FunctionSig, ParamSig, Symbol, SymbolTable, WELL_KNOWN_TYPE_NAMES};
use super::ParseError;

/// Marker for "this production does not apply here"; the caller rewinds.
#[derive(Debug)]
pub(crate) struct Backtrack;

type PResult<T> = Result<T, Backtrack>;

const TYPE_KEYWORDS: &[&str] = &[
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool", "_Complex", "struct",
    "union", "enum",
];

const DECL_KEYWORDS: &[&str] = &[
    "typedef",
    "extern",
    "static",
    "auto",
    "register",
    "inline",
    "__inline",
    "__inline__",
    "_Noreturn",
    "__extension__",
    "const",
    "volatile",
    "restrict",
    "__restrict",
    "__restrict__",
    "_Thread_local",
    "__thread",
    "__attribute__",
    "__declspec",
    "_Alignas",
];

const QUALIFIERS: &[&str] = &["const", "volatile", "restrict", "__restrict", "__restrict__", "_Atomic"];

const RESERVED: &[&str] = &[
    "if", "else", "for", "while", "do", "return", "switch", "case", "default", "break", "continue", "goto", "sizeof",
    "typedef", "struct", "union", "enum", "void", "char", "short", "int", "long", "float", "double", "signed",
    "unsigned", "static", "extern", "const", "volatile", "register", "auto", "inline", "_Bool",
];

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "*" | "/" | "%" => 10,
        "+" | "-" => 9,
        "<<" | ">>" => 8,
        "<" | ">" | "<=" | ">=" => 7,
        "==" | "!=" => 6,
        "&" => 5,
        "^" => 4,
        "|" => 3,
        "&&" => 2,
        "||" => 1,
        _ => return None,
    })
}

fn is_assign_op(op: &str) -> bool {
    matches!(op, "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" | ">>=")
}

#[derive(Debug, Default)]
struct Specifiers {
    is_typedef: bool,
    base: Option<BaseType>,
    struct_def: Option<AstNode>,
}

#[derive(Debug, Default)]
struct Declarator {
    name: Option<(String, Span)>,
    indirection: u8,
    function: Option<(AstNode, Vec<ParamSig>, bool)>,
    fn_pointer: bool,
}

struct Checkpoint {
    pos: usize,
    symbols: usize,
    functions: usize,
}

pub(crate) struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    /// For each opening delimiter token, the index of its closer.
    matching: Vec<usize>,
    pos: usize,
    typedef_names: HashSet<String>,
    table: SymbolTable,
    current_fn: Option<usize>,
    struct_depth: usize,
}

impl<'s> Parser<'s> {
    pub(crate) fn new(src: &'s str, toks: Vec<Token>) -> Result<Self, ParseError> {
        let matching = match_delimiters(src, &toks)?;
        Ok(Parser {
            src,
            toks,
            matching,
            pos: 0,
            typedef_names: WELL_KNOWN_TYPE_NAMES.iter().map(|s| s.to_string()).collect(),
            table: SymbolTable::default(),
            current_fn: None,
            struct_depth: 0,
        })
    }

    pub(crate) fn parse_translation_unit(mut self) -> (AstNode, SymbolTable) {
        let mut children = Vec::new();
        while !self.at_end() {
            let cp = self.checkpoint();
            match self.parse_external() {
                Ok(node) => children.push(node),
                Err(Backtrack) => {
                    self.restore(cp);
                    children.push(self.opaque_recover());
                }
            }
        }
        let root = AstNode::with_children(NodeKind::TranslationUnit, Span::new(0, self.src.len()), children);
        (root, self.table)
    }

    // ---- token helpers ----

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek_tok(&self, ahead: usize) -> Option<Token> {
        self.toks.get(self.pos + ahead).copied()
    }

    fn tok_text(&self, tok: Token) -> &'s str {
        &self.src[tok.span.start..tok.span.end]
    }

    fn peek_text(&self, ahead: usize) -> Option<&'s str> {
        self.peek_tok(ahead).map(|t| self.tok_text(t))
    }

    fn is(&self, text: &str) -> bool {
        self.peek_tok(0).is_some_and(|t| t.kind != TokKind::Str && t.kind != TokKind::Char && self.tok_text(t) == text)
    }

    fn is_at(&self, ahead: usize, text: &str) -> bool {
        self.peek_tok(ahead)
            .is_some_and(|t| t.kind != TokKind::Str && t.kind != TokKind::Char && self.tok_text(t) == text)
    }

    fn is_ident_at(&self, ahead: usize) -> bool {
        self.peek_tok(ahead).is_some_and(|t| t.kind == TokKind::Ident)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos];
        self.pos += 1;
        t
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.is(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, text: &str) -> PResult<Span> {
        if self.is(text) {
            Ok(self.bump().span)
        } else {
            Err(Backtrack)
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, Span)> {
        match self.peek_tok(0) {
            Some(t) if t.kind == TokKind::Ident && !RESERVED.contains(&self.tok_text(t)) => {
                self.pos += 1;
                Ok((self.tok_text(t).to_string(), t.span))
            }
            _ => Err(Backtrack),
        }
    }

    fn prev_end(&self) -> usize {
        self.toks[self.pos - 1].span.end
    }

    fn cur_start(&self) -> PResult<usize> {
        self.peek_tok(0).map(|t| t.span.start).ok_or(Backtrack)
    }

    /// Jumps past a bracketed group starting at the current token.
    fn skip_group(&mut self) {
        let close = self.matching[self.pos];
        debug_assert!(close > self.pos);
        self.pos = close + 1;
    }

    fn is_opener(&self) -> bool {
        self.peek_tok(0).is_some_and(|t| t.kind == TokKind::Punct && matches!(self.tok_text(t), "(" | "[" | "{"))
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint { pos: self.pos, symbols: self.table.symbols.len(), functions: self.table.functions.len() }
    }

    fn restore(&mut self, cp: Checkpoint) {
        self.pos = cp.pos;
        self.table.symbols.truncate(cp.symbols);
        self.table.functions.truncate(cp.functions);
    }

    /// Consumes at least one token: up to and including the next `;` at this
    /// nesting level, or through a balanced `{}` block (plus a directly
    /// following `;`). Never consumes a closing `}` of an enclosing block.
    fn opaque_recover(&mut self) -> AstNode {
        let start = self.toks[self.pos].span.start;
        if self.toks[self.pos].kind == TokKind::Directive {
            let t = self.bump();
            return AstNode::new(NodeKind::OpaqueStmt, t.span);
        }
        let mut consumed = false;
        while !self.at_end() {
            let t = self.toks[self.pos];
            if t.kind == TokKind::Directive && consumed {
                break;
            }
            if t.kind == TokKind::Punct {
                match self.tok_text(t) {
                    ";" => {
                        self.pos += 1;
                        break;
                    }
                    "}" | ")" | "]" if consumed => break,
                    "}" | ")" | "]" => {
                        // stray closer; cannot happen with balanced input, but
                        // guarantee progress anyway
                        self.pos += 1;
                        break;
                    }
                    "{" => {
                        self.skip_group();
                        self.eat(";");
                        break;
                    }
                    "(" | "[" => {
                        self.skip_group();
                        consumed = true;
                        continue;
                    }
                    _ => {}
                }
            }
            self.pos += 1;
            consumed = true;
        }
        AstNode::new(NodeKind::OpaqueStmt, Span::new(start, self.prev_end()))
    }

    fn opaque_node(&self, start: usize) -> AstNode {
        AstNode::new(NodeKind::OpaqueStmt, Span::new(start, self.prev_end()))
    }

    // ---- declarations ----

    fn parse_external(&mut self) -> PResult<AstNode> {
        let tok = self.peek_tok(0).ok_or(Backtrack)?;
        if tok.kind == TokKind::Directive {
            self.pos += 1;
            return Ok(AstNode::new(NodeKind::OpaqueStmt, tok.span));
        }
        if self.is(";") {
            self.pos += 1;
            return Ok(AstNode::new(NodeKind::OpaqueStmt, tok.span));
        }
        self.parse_declaration(true)
    }

    fn is_type_name_start(&self, ahead: usize) -> bool {
        let Some(text) = self.peek_text(ahead) else { return false };
        if !self.is_ident_at(ahead) {
            return false;
        }
        TYPE_KEYWORDS.contains(&text) || QUALIFIERS.contains(&text) || self.typedef_names.contains(text)
    }

    /// Statement-level check: does a declaration start here?
    fn looks_like_declaration(&self) -> bool {
        let Some(text) = self.peek_text(0) else { return false };
        if !self.is_ident_at(0) {
            return false;
        }
        if TYPE_KEYWORDS.contains(&text) || DECL_KEYWORDS.contains(&text) {
            return true;
        }
        if RESERVED.contains(&text) {
            return false;
        }
        let next_is_ident = self.is_ident_at(1) && !RESERVED.contains(&self.peek_text(1).unwrap_or(""));
        if self.typedef_names.contains(text) {
            return next_is_ident || self.is_at(1, "*");
        }
        // unknown name followed by a name: a type from a header we never saw
        next_is_ident
    }

    fn parse_specifiers(&mut self) -> PResult<Specifiers> {
        let mut specs = Specifiers::default();
        let mut seen_any = false;
        let mut type_seen = false;
        let (mut unsigned, mut signed, mut short, mut long) = (false, false, 0u8, 0u8);
        let mut keyword: Option<&str> = None;
        let mut named: Option<BaseType> = None;

        while let Some(tok) = self.peek_tok(0) {
            if tok.kind != TokKind::Ident {
                break;
            }
            let word = self.tok_text(tok);
            match word {
                "typedef" => {
                    specs.is_typedef = true;
                    self.pos += 1;
                }
                "extern" | "static" | "auto" | "register" | "inline" | "__inline" | "__inline__" | "_Noreturn"
                | "__extension__" | "_Thread_local" | "__thread" => self.pos += 1,
                _ if QUALIFIERS.contains(&word) => self.pos += 1,
                "__attribute__" | "__declspec" | "_Alignas" => {
                    self.pos += 1;
                    if self.is("(") {
                        self.skip_group();
                    }
                }
                "unsigned" => {
                    unsigned = true;
                    type_seen = true;
                    self.pos += 1;
                }
                "signed" => {
                    signed = true;
                    type_seen = true;
                    self.pos += 1;
                }
                "short" => {
                    short += 1;
                    type_seen = true;
                    self.pos += 1;
                }
                "long" => {
                    long += 1;
                    type_seen = true;
                    self.pos += 1;
                }
                "void" | "char" | "int" | "float" | "double" | "_Bool" | "_Complex" => {
                    keyword = Some(word);
                    type_seen = true;
                    self.pos += 1;
                }
                "struct" | "union" => {
                    if type_seen {
                        break;
                    }
                    let (base, def) = self.parse_struct_specifier()?;
                    named = Some(base);
                    specs.struct_def = def;
                    type_seen = true;
                }
                "enum" => {
                    if type_seen {
                        break;
                    }
                    self.pos += 1;
                    if self.is_ident_at(0) {
                        self.pos += 1;
                    }
                    if self.is("{") {
                        self.skip_group();
                    }
                    keyword = Some("int");
                    type_seen = true;
                }
                _ => {
                    if type_seen || RESERVED.contains(&word) {
                        break;
                    }
                    let known = self.typedef_names.contains(word);
                    let unknown_type = self.is_ident_at(1) && !RESERVED.contains(&self.peek_text(1).unwrap_or(""))
                        || (self.is_at(1, "*") && self.is_ident_at(2));
                    if !(known || unknown_type) {
                        break;
                    }
                    named = Some(BaseType::Named(word.to_string()));
                    type_seen = true;
                    self.pos += 1;
                }
            }
            seen_any = true;
        }
        if !seen_any {
            return Err(Backtrack);
        }
        let base = if let Some(n) = named {
            n
        } else {
            match keyword {
                Some("void") => BaseType::Void,
                Some("_Bool") => BaseType::Bool,
                Some("float") => BaseType::Float,
                Some("double") if long > 0 => BaseType::LongDouble,
                Some("double") => BaseType::Double,
                Some("_Complex") => BaseType::Named("complex".into()),
                Some("char") if unsigned => BaseType::UChar,
                Some("char") if signed => BaseType::SChar,
                Some("char") => BaseType::Char,
                _ if short > 0 && unsigned => BaseType::UShort,
                _ if short > 0 => BaseType::Short,
                _ if long >= 2 && unsigned => BaseType::ULongLong,
                _ if long >= 2 => BaseType::LongLong,
                _ if long == 1 && unsigned => BaseType::ULong,
                _ if long == 1 => BaseType::Long,
                _ if unsigned => BaseType::UInt,
                _ => BaseType::Int,
            }
        };
        specs.base = Some(base);
        Ok(specs)
    }

    fn parse_struct_specifier(&mut self) -> PResult<(BaseType, Option<AstNode>)> {
        let kw = self.bump();
        while self.is("__attribute__") {
            self.pos += 1;
            if self.is("(") {
                self.skip_group();
            }
        }
        let tag = if self.is_ident_at(0) && !self.is("{") { Some(self.expect_ident()?.0) } else { None };
        let base = BaseType::Named(match &tag {
            Some(t) => format!("struct {t}"),
            None => "struct".to_string(),
        });
        if !self.is("{") {
            if tag.is_none() {
                return Err(Backtrack);
            }
            return Ok((base, None));
        }
        self.pos += 1;
        self.struct_depth += 1;
        let mut members = Vec::new();
        while !self.is("}") {
            if self.at_end() {
                self.struct_depth -= 1;
                return Err(Backtrack);
            }
            let cp = self.checkpoint();
            let tok = self.toks[self.pos];
            let member = if tok.kind == TokKind::Directive {
                self.pos += 1;
                Ok(AstNode::new(NodeKind::OpaqueStmt, tok.span))
            } else {
                self.parse_declaration(false)
            };
            match member {
                Ok(m) => members.push(m),
                Err(Backtrack) => {
                    self.restore(cp);
                    members.push(self.opaque_recover());
                }
            }
        }
        self.pos += 1;
        self.struct_depth -= 1;
        let node = AstNode::with_children(NodeKind::StructDef, Span::new(kw.span.start, self.prev_end()), members)
            .named(tag.unwrap_or_default());
        Ok((base, Some(node)))
    }

    fn parse_declarator(&mut self) -> PResult<Declarator> {
        let mut d = Declarator::default();
        loop {
            if self.eat("*") {
                d.indirection = d.indirection.saturating_add(1);
            } else if self.peek_text(0).is_some_and(|t| QUALIFIERS.contains(&t)) && self.is_ident_at(0) {
                self.pos += 1;
            } else if self.is("__attribute__") {
                self.pos += 1;
                if self.is("(") {
                    self.skip_group();
                }
            } else {
                break;
            }
        }
        if self.is("(") && (self.is_at(1, "*") || self.is_at(1, "^")) {
            self.pos += 1;
            let inner = self.parse_declarator()?;
            self.expect(")")?;
            d.name = inner.name;
            d.indirection = d.indirection.saturating_add(inner.indirection);
            d.fn_pointer = true;
        } else if self.is("(") && self.is_ident_at(1) && self.is_at(2, ")") && !self.is_type_name_start(1) {
            self.pos += 1;
            d.name = Some(self.expect_ident()?);
            self.pos += 1;
        } else if self.is_ident_at(0) && !RESERVED.contains(&self.peek_text(0).unwrap_or("")) {
            d.name = Some(self.expect_ident()?);
        }
        loop {
            if self.is("[") {
                self.skip_group();
                d.indirection = d.indirection.saturating_add(1);
            } else if self.is("(") {
                if d.function.is_none() && !d.fn_pointer {
                    d.function = Some(self.parse_param_list()?);
                } else {
                    self.skip_group();
                }
            } else if self.is("__attribute__") || self.is("__asm__") || self.is("asm") || self.is("__asm") {
                self.pos += 1;
                if self.is("(") {
                    self.skip_group();
                }
            } else if self.struct_depth > 0 && self.is(":") {
                self.pos += 1;
                self.parse_conditional()?;
            } else {
                break;
            }
        }
        Ok(d)
    }

    fn parse_param_list(&mut self) -> PResult<(AstNode, Vec<ParamSig>, bool)> {
        let open = self.expect("(")?;
        let mut nodes = Vec::new();
        let mut sigs = Vec::new();
        let mut variadic = false;
        if self.is("void") && self.is_at(1, ")") {
            self.pos += 1;
        } else if !self.is(")") {
            loop {
                if self.is("...") {
                    let t = self.bump();
                    nodes.push(AstNode::new(NodeKind::Param, t.span));
                    variadic = true;
                } else {
                    let start = self.cur_start()?;
                    let specs = self.parse_specifiers()?;
                    let decl = self.parse_declarator()?;
                    let mut children = Vec::new();
                    let has_default = self.eat("=");
                    if has_default {
                        children.push(self.parse_assign()?);
                    }
                    let name = decl.name.as_ref().map(|(n, _)| n.clone());
                    let ty = CType::new(specs.base.unwrap_or(BaseType::Int), decl.indirection);
                    let mut node = AstNode::with_children(NodeKind::Param, Span::new(start, self.prev_end()), children);
                    node.name = name.clone();
                    nodes.push(node);
                    sigs.push(ParamSig { name, ty, has_default });
                }
                if !self.eat(",") {
                    break;
                }
            }
        }
        let close = self.expect(")")?;
        Ok((AstNode::with_children(NodeKind::ParamList, open.to(close), nodes), sigs, variadic))
    }

    fn parse_declaration(&mut self, top_level: bool) -> PResult<AstNode> {
        let start = self.cur_start()?;
        let specs = self.parse_specifiers()?;
        let base = specs.base.clone().unwrap_or(BaseType::Int);

        if specs.is_typedef {
            return self.parse_typedef_rest(start, specs);
        }
        if self.eat(";") {
            let span = Span::new(start, self.prev_end());
            return Ok(match specs.struct_def {
                Some(mut def) => {
                    def.span = span;
                    def
                }
                None => AstNode::new(NodeKind::DeclStmt, span),
            });
        }

        let first = self.parse_declarator()?;
        if top_level && first.function.is_some() && !first.fn_pointer && self.is("{") {
            return self.parse_function_rest(start, specs, base, first);
        }

        let mut children: Vec<AstNode> = specs.struct_def.into_iter().collect();
        let mut opaque = false;
        let mut decl = first;
        loop {
            opaque |= decl.fn_pointer;
            if let Some((name, span)) = &decl.name {
                children.push(AstNode::new(NodeKind::Identifier, *span).named(name.clone()));
            }
            let ty = CType::new(base.clone(), decl.indirection);
            let mut symbol_index = None;
            match (&decl.function, &decl.name) {
                (Some((_, params, variadic)), Some((name, _))) if !decl.fn_pointer => {
                    self.table.functions.push(FunctionSig {
                        name: name.clone(),
                        ret: ty,
                        params: params.clone(),
                        variadic: *variadic,
                        span: Span::new(start, self.prev_end()),
                        has_body: false,
                    });
                }
                (_, Some((name, _))) if self.struct_depth == 0 => {
                    symbol_index = Some(self.table.symbols.len());
                    self.table.symbols.push(Symbol {
                        name: name.clone(),
                        ty,
                        scope: self.current_fn,
                        declared_at: self.prev_end(),
                        init: None,
                    });
                }
                _ => {}
            }
            if self.eat("=") {
                let init = self.parse_initializer()?;
                if let Some(i) = symbol_index {
                    self.table.symbols[i].init = Some(init.span);
                }
                children.push(init);
            }
            if self.eat(",") {
                decl = self.parse_declarator()?;
                continue;
            }
            self.expect(";")?;
            break;
        }
        let span = Span::new(start, self.prev_end());
        if opaque {
            return Ok(AstNode::new(NodeKind::OpaqueStmt, span));
        }
        Ok(AstNode::with_children(NodeKind::DeclStmt, span, children))
    }

    fn parse_typedef_rest(&mut self, start: usize, specs: Specifiers) -> PResult<AstNode> {
        let base = specs.base.unwrap_or(BaseType::Int);
        let mut first_name = None;
        let mut opaque = false;
        loop {
            let decl = self.parse_declarator()?;
            opaque |= decl.fn_pointer || decl.function.is_some();
            if let Some((name, _)) = decl.name {
                self.typedef_names.insert(name.clone());
                self.table.typedefs.insert(name.clone(), CType::new(base.clone(), decl.indirection));
                first_name.get_or_insert(name);
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(";")?;
        let span = Span::new(start, self.prev_end());
        if opaque {
            return Ok(AstNode::new(NodeKind::OpaqueStmt, span));
        }
        let mut node = AstNode::with_children(NodeKind::Typedef, span, specs.struct_def.into_iter().collect());
        node.name = first_name;
        Ok(node)
    }

    fn parse_function_rest(
        &mut self,
        start: usize,
        specs: Specifiers,
        base: BaseType,
        decl: Declarator,
    ) -> PResult<AstNode> {
        let (param_list, params, variadic) = decl.function.ok_or(Backtrack)?;
        let (name, _) = decl.name.ok_or(Backtrack)?;
        let fn_index = self.table.functions.len();
        self.table.functions.push(FunctionSig {
            name: name.clone(),
            ret: CType::new(base, decl.indirection),
            params: params.clone(),
            variadic,
            span: Span::new(start, start),
            has_body: true,
        });
        for p in &params {
            if let Some(pname) = &p.name {
                self.table.symbols.push(Symbol {
                    name: pname.clone(),
                    ty: p.ty.clone(),
                    scope: Some(fn_index),
                    declared_at: param_list.span.end,
                    init: None,
                });
            }
        }
        let outer = self.current_fn.replace(fn_index);
        let body = self.parse_compound();
        self.current_fn = outer;
        let body = body?;
        let span = Span::new(start, body.span.end);
        self.table.functions[fn_index].span = span;
        let mut children: Vec<AstNode> = specs.struct_def.into_iter().collect();
        children.push(param_list);
        children.push(body);
        Ok(AstNode::with_children(NodeKind::FunctionDef, span, children).named(name))
    }

    fn parse_initializer(&mut self) -> PResult<AstNode> {
        if !self.is("{") {
            return self.parse_assign();
        }
        let open = self.bump().span;
        let mut elems = Vec::new();
        while !self.is("}") {
            loop {
                if self.eat(".") {
                    self.expect_ident()?;
                } else if self.is("[") {
                    self.skip_group();
                } else {
                    break;
                }
            }
            self.eat("=");
            elems.push(self.parse_initializer()?);
            if !self.eat(",") {
                break;
            }
        }
        let close = self.expect("}")?;
        Ok(AstNode::with_children(NodeKind::OpaqueStmt, open.to(close), elems).named("initializer"))
    }

    // ---- statements ----

    fn parse_compound(&mut self) -> PResult<AstNode> {
        let open = self.expect("{")?;
        let mut children = Vec::new();
        while !self.is("}") {
            if self.at_end() {
                return Err(Backtrack);
            }
            children.push(self.parse_statement_recover());
        }
        let close = self.bump().span;
        Ok(AstNode::with_children(NodeKind::CompoundStmt, open.to(close), children))
    }

    fn parse_statement_recover(&mut self) -> AstNode {
        let cp = self.checkpoint();
        match self.parse_statement() {
            Ok(node) => node,
            Err(Backtrack) => {
                self.restore(cp);
                self.opaque_recover()
            }
        }
    }

    fn parse_statement(&mut self) -> PResult<AstNode> {
        let tok = self.peek_tok(0).ok_or(Backtrack)?;
        let start = tok.span.start;
        if tok.kind == TokKind::Directive {
            self.pos += 1;
            return Ok(AstNode::new(NodeKind::OpaqueStmt, tok.span));
        }
        if tok.kind == TokKind::Ident {
            match self.tok_text(tok) {
                "if" => return self.parse_if(),
                "for" => return self.parse_for(),
                "while" => {
                    self.pos += 1;
                    self.expect("(")?;
                    let cond = self.parse_expr()?;
                    self.expect(")")?;
                    let body = self.parse_statement_recover();
                    let span = Span::new(start, body.span.end);
                    return Ok(AstNode::with_children(NodeKind::WhileStmt, span, vec![cond, body]));
                }
                "do" => {
                    self.pos += 1;
                    let body = self.parse_statement_recover();
                    self.expect("while")?;
                    self.expect("(")?;
                    let cond = self.parse_expr()?;
                    self.expect(")")?;
                    self.expect(";")?;
                    let span = Span::new(start, self.prev_end());
                    return Ok(AstNode::with_children(NodeKind::DoStmt, span, vec![body, cond]));
                }
                "return" => {
                    self.pos += 1;
                    let mut children = Vec::new();
                    if !self.is(";") {
                        children.push(self.parse_expr()?);
                    }
                    self.expect(";")?;
                    let span = Span::new(start, self.prev_end());
                    return Ok(AstNode::with_children(NodeKind::ReturnStmt, span, children));
                }
                "switch" => {
                    self.pos += 1;
                    self.expect("(")?;
                    let cond = self.parse_expr()?;
                    self.expect(")")?;
                    let body = self.parse_statement_recover();
                    let span = Span::new(start, body.span.end);
                    return Ok(AstNode::with_children(NodeKind::OpaqueStmt, span, vec![cond, body]).named("switch"));
                }
                "case" => {
                    self.pos += 1;
                    while !self.is(":") {
                        if self.at_end() || self.is(";") || self.is("}") {
                            return Err(Backtrack);
                        }
                        if self.is_opener() {
                            self.skip_group();
                        } else {
                            self.pos += 1;
                        }
                    }
                    self.pos += 1;
                    return Ok(self.opaque_node(start).named("case"));
                }
                "default" if self.is_at(1, ":") => {
                    self.pos += 2;
                    return Ok(self.opaque_node(start).named("default"));
                }
                "break" | "continue" => {
                    let word = self.tok_text(tok);
                    self.pos += 1;
                    self.expect(";")?;
                    return Ok(self.opaque_node(start).named(word));
                }
                "goto" => {
                    self.pos += 1;
                    self.expect_ident()?;
                    self.expect(";")?;
                    return Ok(self.opaque_node(start).named("goto"));
                }
                word if self.is_at(1, ":") && !RESERVED.contains(&word) => {
                    self.pos += 2;
                    return Ok(self.opaque_node(start).named("label"));
                }
                _ => {}
            }
            if self.looks_like_declaration() {
                return self.parse_declaration(false);
            }
        }
        if self.is("{") {
            return self.parse_compound();
        }
        if self.is(";") {
            let t = self.bump();
            return Ok(AstNode::new(NodeKind::ExprStmt, t.span));
        }
        let expr = self.parse_expr()?;
        self.expect(";")?;
        Ok(AstNode::with_children(NodeKind::ExprStmt, Span::new(start, self.prev_end()), vec![expr]))
    }

    fn parse_if(&mut self) -> PResult<AstNode> {
        let start = self.bump().span.start;
        self.expect("(")?;
        let cond = self.parse_expr()?;
        self.expect(")")?;
        let then = self.parse_statement_recover();
        let mut children = vec![cond, then];
        if self.eat("else") {
            children.push(self.parse_statement_recover());
        }
        let span = Span::new(start, self.prev_end());
        Ok(AstNode::with_children(NodeKind::IfStmt, span, children))
    }

    fn parse_for(&mut self) -> PResult<AstNode> {
        let start = self.bump().span.start;
        self.expect("(")?;
        let mut children = Vec::new();
        if !self.eat(";") {
            if self.looks_like_declaration() {
                children.push(self.parse_declaration(false)?);
            } else {
                children.push(self.parse_expr()?);
                self.expect(";")?;
            }
        }
        if !self.is(";") {
            children.push(self.parse_expr()?);
        }
        self.expect(";")?;
        if !self.is(")") {
            children.push(self.parse_expr()?);
        }
        self.expect(")")?;
        children.push(self.parse_statement_recover());
        let span = Span::new(start, self.prev_end());
        Ok(AstNode::with_children(NodeKind::ForStmt, span, children))
    }

    // ---- expressions ----

    fn parse_expr(&mut self) -> PResult<AstNode> {
        let mut lhs = self.parse_assign()?;
        while self.eat(",") {
            let rhs = self.parse_assign()?;
            let span = lhs.span.to(rhs.span);
            lhs = AstNode::with_children(NodeKind::BinaryExpr, span, vec![lhs, rhs]).named(",");
        }
        Ok(lhs)
    }

    fn parse_assign(&mut self) -> PResult<AstNode> {
        let lhs = self.parse_conditional()?;
        if let Some(op) = self.peek_text(0).filter(|op| is_assign_op(op)) {
            if self.peek_tok(0).is_some_and(|t| t.kind == TokKind::Punct) {
                self.pos += 1;
                let rhs = self.parse_assign()?;
                let span = lhs.span.to(rhs.span);
                return Ok(AstNode::with_children(NodeKind::AssignExpr, span, vec![lhs, rhs]).named(op));
            }
        }
        Ok(lhs)
    }

    fn parse_conditional(&mut self) -> PResult<AstNode> {
        let cond = self.parse_binary(1)?;
        if !self.eat("?") {
            return Ok(cond);
        }
        let then = self.parse_expr()?;
        self.expect(":")?;
        let other = self.parse_conditional()?;
        let span = cond.span.to(other.span);
        Ok(AstNode::with_children(NodeKind::BinaryExpr, span, vec![cond, then, other]).named("?:"))
    }

    fn parse_binary(&mut self, min_prec: u8) -> PResult<AstNode> {
        let mut lhs = self.parse_unary()?;
        while let Some(tok) = self.peek_tok(0) {
            if tok.kind != TokKind::Punct {
                break;
            }
            let op = self.tok_text(tok);
            let Some(prec) = binary_precedence(op) else { break };
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let rhs = self.parse_binary(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = AstNode::with_children(NodeKind::BinaryExpr, span, vec![lhs, rhs]).named(op);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<AstNode> {
        let tok = self.peek_tok(0).ok_or(Backtrack)?;
        let text = self.tok_text(tok);
        let start = tok.span.start;
        if tok.kind == TokKind::Punct && matches!(text, "++" | "--" | "+" | "-" | "!" | "~" | "*" | "&") {
            self.pos += 1;
            let operand = self.parse_unary()?;
            let span = Span::new(start, operand.span.end);
            return Ok(AstNode::with_children(NodeKind::UnaryExpr, span, vec![operand]).named(text));
        }
        if tok.kind == TokKind::Ident && matches!(text, "sizeof" | "_Alignof" | "__alignof__") {
            self.pos += 1;
            if self.is("(") && self.is_type_name_start(1) {
                self.skip_group();
                return Ok(self.opaque_free_node(NodeKind::UnaryExpr, start).named(text));
            }
            let operand = self.parse_unary()?;
            let span = Span::new(start, operand.span.end);
            return Ok(AstNode::with_children(NodeKind::UnaryExpr, span, vec![operand]).named(text));
        }
        if self.is("(") && self.is_type_name_start(1) {
            self.pos += 1;
            let specs = self.parse_specifiers()?;
            let decl = self.parse_declarator()?;
            if decl.name.is_some() {
                return Err(Backtrack);
            }
            self.expect(")")?;
            let ty = CType::new(specs.base.unwrap_or(BaseType::Int), decl.indirection);
            if self.is("{") {
                let init = self.parse_initializer()?;
                let span = Span::new(start, init.span.end);
                let lit = AstNode::with_children(NodeKind::UnaryExpr, span, vec![init]).named("compound-literal");
                self.table.casts.insert(span, ty);
                return self.parse_postfix_ops(lit);
            }
            let operand = self.parse_unary()?;
            let span = Span::new(start, operand.span.end);
            self.table.casts.insert(span, ty);
            return Ok(AstNode::with_children(NodeKind::UnaryExpr, span, vec![operand]).named("cast"));
        }
        self.parse_postfix()
    }

    fn opaque_free_node(&self, kind: NodeKind, start: usize) -> AstNode {
        AstNode::new(kind, Span::new(start, self.prev_end()))
    }

    fn parse_postfix(&mut self) -> PResult<AstNode> {
        let primary = self.parse_primary()?;
        self.parse_postfix_ops(primary)
    }

    fn parse_postfix_ops(&mut self, mut expr: AstNode) -> PResult<AstNode> {
        loop {
            if self.is("(") {
                let open = self.bump().span;
                let mut args = Vec::new();
                if !self.is(")") {
                    loop {
                        args.push(self.parse_assign()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                }
                let close = self.expect(")")?;
                let arg_list = AstNode::with_children(NodeKind::ArgList, open.to(close), args);
                let span = Span::new(expr.span.start, close.end);
                expr = if expr.kind == NodeKind::Identifier && expr.span.len() == expr.name.as_ref().map_or(0, String::len)
                {
                    let name = expr.name.take().unwrap_or_default();
                    AstNode::with_children(NodeKind::CallExpr, span, vec![arg_list]).named(name)
                } else {
                    let callee_text = self.src[expr.span.start..expr.span.end].to_string();
                    AstNode::with_children(NodeKind::CallExpr, span, vec![expr, arg_list]).named(callee_text)
                };
            } else if self.is("[") {
                self.pos += 1;
                let index = self.parse_expr()?;
                let close = self.expect("]")?;
                let span = Span::new(expr.span.start, close.end);
                expr = AstNode::with_children(NodeKind::IndexExpr, span, vec![expr, index]);
            } else if self.is(".") || self.is("->") {
                let op = self.bump();
                let (field, field_span) = self.expect_ident()?;
                let span = Span::new(expr.span.start, field_span.end);
                let op = self.tok_text(op);
                expr = AstNode::with_children(NodeKind::MemberExpr, span, vec![expr]).named(format!("{op}{field}"));
            } else if self.is("++") || self.is("--") {
                let op = self.bump();
                let span = Span::new(expr.span.start, op.span.end);
                let name = format!("post{}", self.tok_text(op));
                expr = AstNode::with_children(NodeKind::UnaryExpr, span, vec![expr]).named(name);
            } else {
                return Ok(expr);
            }
        }
    }

    fn parse_primary(&mut self) -> PResult<AstNode> {
        let tok = self.peek_tok(0).ok_or(Backtrack)?;
        match tok.kind {
            TokKind::Ident => {
                let (name, span) = self.expect_ident()?;
                Ok(AstNode::new(NodeKind::Identifier, span).named(name))
            }
            TokKind::Number | TokKind::Char => {
                self.pos += 1;
                Ok(AstNode::new(NodeKind::Literal, tok.span))
            }
            TokKind::Str => {
                let mut end = tok.span.end;
                while self.peek_tok(0).is_some_and(|t| t.kind == TokKind::Str) {
                    end = self.bump().span.end;
                }
                Ok(AstNode::new(NodeKind::Literal, Span::new(tok.span.start, end)))
            }
            TokKind::Punct if self.is("(") => {
                if self.is_at(1, "{") {
                    // statement expression (GNU); outside the subset
                    return Err(Backtrack);
                }
                let open = self.bump().span;
                let mut inner = self.parse_expr()?;
                let close = self.expect(")")?;
                inner.span = open.to(close);
                Ok(inner)
            }
            _ => Err(Backtrack),
        }
    }
}

/// Pairs every opening delimiter with its closer, or reports the first
/// mismatch with its line and column.
fn match_delimiters(src: &str, toks: &[Token]) -> Result<Vec<usize>, ParseError> {
    let mut matching = vec![usize::MAX; toks.len()];
    let mut stack: Vec<(usize, char)> = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if t.kind != TokKind::Punct {
            continue;
        }
        let c = match &src[t.span.start..t.span.end] {
            "(" => '(',
            "[" => '[',
            "{" => '{',
            ")" => ')',
            "]" => ']',
            "}" => '}',
            _ => continue,
        };
        match c {
            '(' | '[' | '{' => stack.push((i, c)),
            _ => {
                let want = match c {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                match stack.pop() {
                    Some((open, oc)) if oc == want => matching[open] = i,
                    Some((open, oc)) => {
                        return Err(ParseError::unbalanced(
                            src,
                            t.span.start,
                            format!(
                                "`{c}` does not close `{oc}` opened at {}",
                                ParseError::position(src, toks[open].span.start)
                            ),
                        ))
                    }
                    None => return Err(ParseError::unbalanced(src, t.span.start, format!("unmatched `{c}`"))),
                }
            }
        }
    }
    if let Some((open, oc)) = stack.pop() {
        return Err(ParseError::unbalanced(src, toks[open].span.start, format!("unclosed `{oc}`")));
    }
    Ok(matching)
}
