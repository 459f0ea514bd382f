//! Best-effort expression typing for call arguments: declared types of
//! identifiers, literal suffixes, and the usual arithmetic conversions.
//! Anything not covered comes back as `TypeTag::Unknown`.

use super::ast::{AstNode, NodeKind};
use super::symbols::{BaseType, CType};
use super::SourceUnit;
use crate::types::{Scalar, TypeTag};

pub fn expr_tag(unit: &SourceUnit, expr: &AstNode) -> TypeTag {
    match expr_type(unit, expr) {
        Some(ty) => ty.tag(&unit.symbols.typedefs),
        None => TypeTag::Unknown,
    }
}

pub fn expr_type(unit: &SourceUnit, expr: &AstNode) -> Option<CType> {
    let table = &unit.symbols;
    match expr.kind {
        NodeKind::Identifier => {
            let name = expr.name.as_deref()?;
            table.lookup_var(name, expr.span.start).map(|s| s.ty.clone())
        }
        NodeKind::Literal => literal_type(unit.slice(expr.span)),
        NodeKind::UnaryExpr => {
            let op = expr.name.as_deref().unwrap_or("");
            let operand = expr.children.first();
            match op {
                "&" => expr_type(unit, operand?).map(|t| t.pointer_to()),
                "*" => expr_type(unit, operand?)?.pointee(),
                "-" | "+" | "~" => expr_type(unit, operand?).map(|t| promote(unit, t)),
                "!" => Some(CType::new(BaseType::Int, 0)),
                "cast" | "compound-literal" => table.casts.get(&expr.span).cloned(),
                "sizeof" | "_Alignof" | "__alignof__" => Some(CType::new(BaseType::ULong, 0)),
                _ => expr_type(unit, operand?),
            }
        }
        NodeKind::IndexExpr => expr_type(unit, expr.children.first()?)?.pointee(),
        NodeKind::AssignExpr => expr_type(unit, expr.children.first()?),
        NodeKind::BinaryExpr => {
            let op = expr.name.as_deref().unwrap_or("");
            match op {
                "," => expr_type(unit, expr.children.last()?),
                "==" | "!=" | "<" | ">" | "<=" | ">=" | "&&" | "||" => Some(CType::new(BaseType::Int, 0)),
                "?:" => {
                    let a = expr_type(unit, expr.children.get(1)?)?;
                    let b = expr_type(unit, expr.children.get(2)?)?;
                    if a == b {
                        Some(a)
                    } else {
                        arithmetic(unit, a, b)
                    }
                }
                "<<" | ">>" => expr_type(unit, expr.children.first()?).map(|t| promote(unit, t)),
                _ => {
                    let a = expr_type(unit, expr.children.first()?)?;
                    let b = expr_type(unit, expr.children.get(1)?)?;
                    match (a.indirection > 0, b.indirection > 0) {
                        (true, true) if op == "-" => Some(CType::new(BaseType::Long, 0)),
                        (true, false) => Some(a),
                        (false, true) => Some(b),
                        (true, true) => None,
                        (false, false) => arithmetic(unit, a, b),
                    }
                }
            }
        }
        NodeKind::CallExpr => {
            let name = expr.name.as_deref()?;
            table.function(name).map(|f| f.ret.clone())
        }
        _ => None,
    }
}

fn literal_type(text: &str) -> Option<CType> {
    let first = text.chars().next()?;
    if text.ends_with('"') {
        return Some(CType::new(BaseType::Char, 1));
    }
    if text.ends_with('\'') {
        return Some(CType::new(BaseType::Int, 0));
    }
    if !(first.is_ascii_digit() || first == '.') {
        return None;
    }
    let lower = text.to_ascii_lowercase();
    let is_hex = lower.starts_with("0x");
    let is_float = lower.contains('.') || (!is_hex && lower.contains('e')) || (is_hex && lower.contains('p'));
    if is_float {
        return Some(CType::new(
            if lower.ends_with('f') {
                BaseType::Float
            } else if lower.ends_with('l') {
                BaseType::LongDouble
            } else {
                BaseType::Double
            },
            0,
        ));
    }
    let suffix: String = lower.chars().rev().take_while(|c| matches!(c, 'u' | 'l')).collect();
    let unsigned = suffix.contains('u');
    let longs = suffix.matches('l').count();
    let digits = &lower[..lower.len() - suffix.len()];
    let value = if is_hex {
        u128::from_str_radix(&digits[2..], 16).ok()
    } else if digits.len() > 1 && digits.starts_with('0') {
        u128::from_str_radix(&digits[1..], 8).ok()
    } else {
        digits.parse::<u128>().ok()
    };
    let fits_int = value.is_none_or(|v| v <= i32::MAX as u128);
    let base = match (unsigned, longs) {
        (false, 0) if fits_int => BaseType::Int,
        (false, 0) | (false, 1) => BaseType::Long,
        (false, _) => BaseType::LongLong,
        (true, 0) if value.is_none_or(|v| v <= u32::MAX as u128) => BaseType::UInt,
        (true, 0) | (true, 1) => BaseType::ULong,
        (true, _) => BaseType::ULongLong,
    };
    Some(CType::new(base, 0))
}

fn promote(unit: &SourceUnit, ty: CType) -> CType {
    if ty.indirection > 0 {
        return ty;
    }
    match ty.scalar_base(&unit.symbols.typedefs) {
        Some(s) if s.bytes() < 4 && !s.is_float() => CType::new(BaseType::Int, 0),
        _ => ty,
    }
}

fn arithmetic(unit: &SourceUnit, a: CType, b: CType) -> Option<CType> {
    let td = &unit.symbols.typedefs;
    let sa = promote_scalar(a.scalar_base(td)?);
    let sb = promote_scalar(b.scalar_base(td)?);
    let result = if sa.is_float() || sb.is_float() {
        if sa == Scalar::F64 || sb == Scalar::F64 {
            Scalar::F64
        } else {
            Scalar::F32
        }
    } else if sa.bytes() != sb.bytes() {
        if sa.bytes() > sb.bytes() {
            sa
        } else {
            sb
        }
    } else if sa.is_unsigned() {
        sa
    } else {
        sb
    };
    Some(CType::scalar(result))
}

fn promote_scalar(s: Scalar) -> Scalar {
    if !s.is_float() && s.bytes() < 4 {
        Scalar::I32
    } else {
        s
    }
}
