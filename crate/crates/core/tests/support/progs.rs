//! Random programs in the parser's supported subset, rendered with a
//! pluggable identifier spelling so that renamed copies can be compared.

#![allow(dead_code)]

use proptest::prelude::*;

#[derive(Debug, Clone)]
pub enum Expr {
    Var(usize),
    Int(u32),
    Float(u32),
    Bin(&'static str, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Index(usize, Box<Expr>),
    Call(usize, Vec<Expr>),
    Paren(Box<Expr>),
}

#[derive(Debug, Clone)]
pub enum Stmt {
    Decl(&'static str, usize, Option<Expr>),
    Assign(usize, &'static str, Expr),
    Store(usize, Expr, Expr),
    Call(usize, Vec<Expr>),
    If(Expr, Vec<Stmt>, Option<Vec<Stmt>>),
    For(usize, Expr, Vec<Stmt>),
    While(Expr, Vec<Stmt>),
    Do(Vec<Stmt>, Expr),
    Return(Option<Expr>),
}

#[derive(Debug, Clone)]
pub struct Function {
    pub ret: &'static str,
    pub name: usize,
    pub params: Vec<(&'static str, usize)>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub struct Program {
    pub functions: Vec<Function>,
}

const TYPES: [&str; 5] = ["int", "double", "unsigned long", "float", "long"];
const OPS: [&str; 8] = ["+", "-", "*", "/", "<", "==", "&&", "%"];
const ASSIGN_OPS: [&str; 3] = ["=", "+=", "*="];
/// Identifier slots drawn from; the spelling comes from the renderer.
pub const NAMES: usize = 12;

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..NAMES).prop_map(Expr::Var),
        any::<u16>().prop_map(|v| Expr::Int(v as u32)),
        any::<u16>().prop_map(|v| Expr::Float(v as u32)),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (prop::sample::select(&OPS[..]), inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Bin(o, Box::new(a), Box::new(b))),
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (0..NAMES, inner.clone()).prop_map(|(v, e)| Expr::Index(v, Box::new(e))),
            (0..NAMES, prop::collection::vec(inner.clone(), 0..3)).prop_map(|(f, a)| Expr::Call(f, a)),
            inner.prop_map(|e| Expr::Paren(Box::new(e))),
        ]
    })
}

fn stmt() -> impl Strategy<Value = Stmt> {
    let simple = prop_oneof![
        (prop::sample::select(&TYPES[..]), 0..NAMES, prop::option::of(expr())).prop_map(|(t, v, e)| Stmt::Decl(t, v, e)),
        (0..NAMES, prop::sample::select(&ASSIGN_OPS[..]), expr()).prop_map(|(v, o, e)| Stmt::Assign(v, o, e)),
        (0..NAMES, expr(), expr()).prop_map(|(v, i, e)| Stmt::Store(v, i, e)),
        (0..NAMES, prop::collection::vec(expr(), 0..4)).prop_map(|(f, a)| Stmt::Call(f, a)),
        prop::option::of(expr()).prop_map(Stmt::Return),
    ];
    simple.prop_recursive(3, 24, 4, |inner| {
        let block = prop::collection::vec(inner, 0..4);
        prop_oneof![
            (expr(), block.clone(), prop::option::of(block.clone())).prop_map(|(c, t, e)| Stmt::If(c, t, e)),
            (0..NAMES, expr(), block.clone()).prop_map(|(v, n, b)| Stmt::For(v, n, b)),
            (expr(), block.clone()).prop_map(|(c, b)| Stmt::While(c, b)),
            (block, expr()).prop_map(|(b, c)| Stmt::Do(b, c)),
        ]
    })
}

fn function() -> impl Strategy<Value = Function> {
    (
        prop::sample::select(&["void", "int", "double"][..]),
        0..NAMES,
        prop::collection::vec((prop::sample::select(&["int", "double *", "unsigned long", "float"][..]), 0..NAMES), 0..4),
        prop::collection::vec(stmt(), 1..8),
    )
        .prop_map(|(ret, name, params, body)| Function { ret, name, params, body })
}

pub fn program() -> impl Strategy<Value = Program> {
    prop::collection::vec(function(), 1..4).prop_map(|functions| Program { functions })
}

/// Spelling of identifier slots plus optional comment noise.
pub struct Style<'a> {
    pub name: &'a dyn Fn(usize) -> String,
    pub comments: bool,
}

pub fn plain(i: usize) -> String {
    format!("v{i}")
}

pub fn renamed(i: usize) -> String {
    format!("renamed_{}_q", (i * 7 + 3) % 97)
}

struct Out<'a> {
    s: String,
    style: &'a Style<'a>,
    n: usize,
}

impl Out<'_> {
    fn gap(&mut self) {
        self.n += 1;
        if self.style.comments && self.n.is_multiple_of(3) {
            self.s.push_str(" /* c */ ");
        } else {
            self.s.push(' ');
        }
    }

    fn name(&mut self, i: usize) {
        let n = (self.style.name)(i);
        self.s.push_str(&n);
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Var(v) => self.name(*v),
            Expr::Int(v) => self.s.push_str(&v.to_string()),
            Expr::Float(v) => self.s.push_str(&format!("{v}.5")),
            Expr::Bin(op, a, b) => {
                self.s.push('(');
                self.expr(a);
                self.gap();
                self.s.push_str(op);
                self.gap();
                self.expr(b);
                self.s.push(')');
            }
            Expr::Neg(a) => {
                self.s.push_str("-(");
                self.expr(a);
                self.s.push(')');
            }
            Expr::Index(v, i) => {
                self.name(*v);
                self.s.push('[');
                self.expr(i);
                self.s.push(']');
            }
            Expr::Call(f, args) => {
                self.name(*f);
                self.s.push('(');
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        self.s.push(',');
                        self.gap();
                    }
                    self.expr(a);
                }
                self.s.push(')');
            }
            Expr::Paren(a) => {
                self.s.push('(');
                self.expr(a);
                self.s.push(')');
            }
        }
    }

    fn block(&mut self, stmts: &[Stmt], depth: usize) {
        self.s.push_str("{\n");
        for st in stmts {
            self.stmt(st, depth + 1);
        }
        self.s.push_str(&"    ".repeat(depth));
        self.s.push('}');
    }

    fn stmt(&mut self, st: &Stmt, depth: usize) {
        self.s.push_str(&"    ".repeat(depth));
        match st {
            Stmt::Decl(t, v, init) => {
                self.s.push_str(t);
                self.s.push(' ');
                self.name(*v);
                if let Some(e) = init {
                    self.s.push_str(" =");
                    self.gap();
                    self.expr(e);
                }
                self.s.push(';');
            }
            Stmt::Assign(v, op, e) => {
                self.name(*v);
                self.gap();
                self.s.push_str(op);
                self.gap();
                self.expr(e);
                self.s.push(';');
            }
            Stmt::Store(v, i, e) => {
                self.expr(&Expr::Index(*v, Box::new(i.clone())));
                self.s.push_str(" = ");
                self.expr(e);
                self.s.push(';');
            }
            Stmt::Call(f, args) => {
                self.expr(&Expr::Call(*f, args.clone()));
                self.s.push(';');
            }
            Stmt::If(c, t, e) => {
                self.s.push_str("if (");
                self.expr(c);
                self.s.push_str(") ");
                self.block(t, depth);
                if let Some(e) = e {
                    self.s.push_str(" else ");
                    self.block(e, depth);
                }
            }
            Stmt::For(v, n, b) => {
                self.s.push_str("for (");
                self.name(*v);
                self.s.push_str(" = 0; ");
                self.name(*v);
                self.s.push_str(" < ");
                self.expr(n);
                self.s.push_str("; ");
                self.name(*v);
                self.s.push_str("++) ");
                self.block(b, depth);
            }
            Stmt::While(c, b) => {
                self.s.push_str("while (");
                self.expr(c);
                self.s.push_str(") ");
                self.block(b, depth);
            }
            Stmt::Do(b, c) => {
                self.s.push_str("do ");
                self.block(b, depth);
                self.s.push_str(" while (");
                self.expr(c);
                self.s.push_str(");");
            }
            Stmt::Return(e) => {
                self.s.push_str("return");
                if let Some(e) = e {
                    self.s.push(' ');
                    self.expr(e);
                }
                self.s.push(';');
            }
        }
        self.s.push('\n');
    }
}

pub fn render(p: &Program, style: &Style<'_>) -> String {
    let mut out = Out { s: String::from("#include <stdio.h>\n\n"), style, n: 0 };
    for f in &p.functions {
        out.s.push_str(f.ret);
        out.s.push(' ');
        out.name(f.name);
        out.s.push('(');
        if f.params.is_empty() {
            out.s.push_str("void");
        }
        for (k, (t, v)) in f.params.iter().enumerate() {
            if k > 0 {
                out.s.push_str(", ");
            }
            out.s.push_str(t);
            out.s.push(' ');
            out.name(*v);
        }
        out.s.push_str(")\n");
        out.block(&f.body, 0);
        out.s.push_str("\n\n");
    }
    out.s
}
