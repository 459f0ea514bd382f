//! Declared names and their C types, collected while parsing. This is just
//! enough typing to tag call arguments; there is no scoping beyond
//! "inside function N" versus file scope.

use std::collections::BTreeMap;

use super::ast::Span;
use crate::types::{Scalar, TypeTag};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BaseType {
    Void,
    Bool,
    Char,
    SChar,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Long,
    ULong,
    LongLong,
    ULongLong,
    Float,
    Double,
    LongDouble,
    /// Typedef name, `struct tag`, `enum`, or anything else spelled by name.
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CType {
    pub base: BaseType,
    /// Pointer plus array levels.
    pub indirection: u8,
}

impl CType {
    pub fn new(base: BaseType, indirection: u8) -> Self {
        CType { base, indirection }
    }

    pub fn scalar(s: Scalar) -> Self {
        let base = match s {
            Scalar::I8 => BaseType::SChar,
            Scalar::I16 => BaseType::Short,
            Scalar::I32 => BaseType::Int,
            Scalar::I64 => BaseType::Long,
            Scalar::U8 => BaseType::UChar,
            Scalar::U16 => BaseType::UShort,
            Scalar::U32 => BaseType::UInt,
            Scalar::U64 => BaseType::ULong,
            Scalar::F32 => BaseType::Float,
            Scalar::F64 => BaseType::Double,
        };
        CType::new(base, 0)
    }

    pub fn pointer_to(&self) -> CType {
        CType::new(self.base.clone(), self.indirection.saturating_add(1))
    }

    pub fn pointee(&self) -> Option<CType> {
        (self.indirection > 0).then(|| CType::new(self.base.clone(), self.indirection - 1))
    }

    /// Resolves typedef chains so `base` is a builtin where possible.
    pub fn resolve(&self, typedefs: &BTreeMap<String, CType>) -> CType {
        let mut ty = self.clone();
        for _ in 0..16 {
            let BaseType::Named(name) = &ty.base else { break };
            if let Some(s) = well_known_typedef(name) {
                ty = CType::new(CType::scalar(s).base, ty.indirection);
                break;
            }
            match typedefs.get(name) {
                Some(target) => {
                    ty = CType::new(target.base.clone(), ty.indirection.saturating_add(target.indirection));
                }
                None => break,
            }
        }
        ty
    }

    /// Scalar element type, ignoring indirection.
    pub fn scalar_base(&self, typedefs: &BTreeMap<String, CType>) -> Option<Scalar> {
        base_scalar(&self.resolve(typedefs).base)
    }

    pub fn tag(&self, typedefs: &BTreeMap<String, CType>) -> TypeTag {
        let ty = self.resolve(typedefs);
        let scalar = base_scalar(&ty.base);
        match (scalar, ty.indirection) {
            (Some(s), 0) => TypeTag::Scalar(s),
            (Some(s), 1) => TypeTag::Array(s),
            (Some(s), n) => TypeTag::Other(format!("{}{}", s, "_array".repeat(n as usize))),
            (None, n) => {
                let name = match &ty.base {
                    BaseType::Void => "void".to_string(),
                    BaseType::Bool => "bool".to_string(),
                    BaseType::LongDouble => "long_double".to_string(),
                    BaseType::Named(name) => name.replace(' ', "_"),
                    _ => unreachable!("scalar bases handled above"),
                };
                if n == 0 && name == "void" {
                    TypeTag::Unknown
                } else {
                    TypeTag::Other(format!("{}{}", name, "_ptr".repeat(n as usize)))
                }
            }
        }
    }
}

fn base_scalar(base: &BaseType) -> Option<Scalar> {
    Some(match base {
        BaseType::Char | BaseType::SChar => Scalar::I8,
        BaseType::UChar => Scalar::U8,
        BaseType::Short => Scalar::I16,
        BaseType::UShort => Scalar::U16,
        BaseType::Int => Scalar::I32,
        BaseType::UInt => Scalar::U32,
        BaseType::Long | BaseType::LongLong => Scalar::I64,
        BaseType::ULong | BaseType::ULongLong => Scalar::U64,
        BaseType::Float => Scalar::F32,
        BaseType::Double => Scalar::F64,
        BaseType::Void | BaseType::Bool | BaseType::LongDouble | BaseType::Named(_) => return None,
    })
}

/// Standard-header typedefs that every translation unit may use.
pub fn well_known_typedef(name: &str) -> Option<Scalar> {
    Some(match name {
        "size_t" | "uintptr_t" | "uint64_t" | "uintmax_t" => Scalar::U64,
        "ssize_t" | "ptrdiff_t" | "intptr_t" | "int64_t" | "intmax_t" | "off_t" => Scalar::I64,
        "int32_t" => Scalar::I32,
        "uint32_t" => Scalar::U32,
        "int16_t" => Scalar::I16,
        "uint16_t" => Scalar::U16,
        "int8_t" => Scalar::I8,
        "uint8_t" => Scalar::U8,
        _ => return None,
    })
}

pub const WELL_KNOWN_TYPE_NAMES: &[&str] = &[
    "size_t",
    "ssize_t",
    "ptrdiff_t",
    "intptr_t",
    "uintptr_t",
    "int8_t",
    "int16_t",
    "int32_t",
    "int64_t",
    "uint8_t",
    "uint16_t",
    "uint32_t",
    "uint64_t",
    "intmax_t",
    "uintmax_t",
    "off_t",
    "FILE",
    "bool",
    "va_list",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub ty: CType,
    /// Index into [`SymbolTable::functions`] of the enclosing function, or
    /// `None` for file scope.
    pub scope: Option<usize>,
    /// Offset after which the declaration is visible.
    pub declared_at: usize,
    pub init: Option<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSig {
    pub name: Option<String>,
    pub ty: CType,
    pub has_default: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSig {
    pub name: String,
    pub ret: CType,
    pub params: Vec<ParamSig>,
    pub variadic: bool,
    pub span: Span,
    pub has_body: bool,
}

impl FunctionSig {
    /// Number of parameters without a default value.
    pub fn required_arity(&self) -> usize {
        self.params.iter().take_while(|p| !p.has_default).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    pub symbols: Vec<Symbol>,
    pub functions: Vec<FunctionSig>,
    pub typedefs: BTreeMap<String, CType>,
    /// Target type of each cast expression, keyed by the cast's span.
    pub casts: BTreeMap<Span, CType>,
}

impl SymbolTable {
    /// Finds the declaration of `name` visible at `offset`: the latest one
    /// in the enclosing function, else the latest at file scope.
    pub fn lookup_var(&self, name: &str, offset: usize) -> Option<&Symbol> {
        let enclosing = self.function_at(offset);
        let visible = |s: &&Symbol| s.name == name && s.declared_at <= offset;
        let local = enclosing.and_then(|f| {
            self.symbols.iter().filter(visible).filter(|s| s.scope == Some(f)).max_by_key(|s| s.declared_at)
        });
        local.or_else(|| self.symbols.iter().filter(visible).filter(|s| s.scope.is_none()).max_by_key(|s| s.declared_at))
    }

    /// Index of the function definition whose span contains `offset`.
    pub fn function_at(&self, offset: usize) -> Option<usize> {
        self.functions.iter().position(|f| f.has_body && f.span.start <= offset && offset < f.span.end)
    }

    /// Prefers a definition over a prototype.
    pub fn function(&self, name: &str) -> Option<&FunctionSig> {
        let mut matches = self.functions.iter().filter(|f| f.name == name);
        let first = matches.next()?;
        if first.has_body {
            return Some(first);
        }
        Some(self.functions.iter().find(|f| f.name == name && f.has_body).unwrap_or(first))
    }
}
