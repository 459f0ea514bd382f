//! Type tags shared by the pattern database, the frontend's lightweight
//! typing, and interface binding. Tags serialize as short strings such as
//! `f64`, `u64`, `f64_array`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    I8,
    I16,
    I32,
    I64,
    U8,
    U16,
    U32,
    U64,
    F32,
    F64,
}

impl Scalar {
    pub const ALL: [Scalar; 10] = [
        Scalar::I8,
        Scalar::I16,
        Scalar::I32,
        Scalar::I64,
        Scalar::U8,
        Scalar::U16,
        Scalar::U32,
        Scalar::U64,
        Scalar::F32,
        Scalar::F64,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scalar::I8 => "i8",
            Scalar::I16 => "i16",
            Scalar::I32 => "i32",
            Scalar::I64 => "i64",
            Scalar::U8 => "u8",
            Scalar::U16 => "u16",
            Scalar::U32 => "u32",
            Scalar::U64 => "u64",
            Scalar::F32 => "f32",
            Scalar::F64 => "f64",
        }
    }

    /// C spelling used when rendering casts (LP64 data model).
    pub fn c_name(self) -> &'static str {
        match self {
            Scalar::I8 => "signed char",
            Scalar::I16 => "short",
            Scalar::I32 => "int",
            Scalar::I64 => "long",
            Scalar::U8 => "unsigned char",
            Scalar::U16 => "unsigned short",
            Scalar::U32 => "unsigned int",
            Scalar::U64 => "unsigned long",
            Scalar::F32 => "float",
            Scalar::F64 => "double",
        }
    }

    pub fn is_float(self) -> bool {
        matches!(self, Scalar::F32 | Scalar::F64)
    }

    pub fn is_unsigned(self) -> bool {
        matches!(self, Scalar::U8 | Scalar::U16 | Scalar::U32 | Scalar::U64)
    }

    pub fn bytes(self) -> u8 {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::I64 | Scalar::U64 | Scalar::F64 => 8,
        }
    }

    fn parse(s: &str) -> Option<Scalar> {
        Scalar::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Type of a value crossing the host/replacement boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeTag {
    Scalar(Scalar),
    /// Pointer to, or array of, a scalar element type.
    Array(Scalar),
    /// Any other named type (structs, nested pointers, `void*`, ...).
    /// Compared by exact spelling only.
    Other(String),
    /// Could not be inferred from the source.
    Unknown,
}

impl TypeTag {
    pub fn is_numeric_scalar(&self) -> bool {
        matches!(self, TypeTag::Scalar(_))
    }

    /// C spelling for a cast to this type, when one exists.
    pub fn c_name(&self) -> Option<String> {
        match self {
            TypeTag::Scalar(s) => Some(s.c_name().to_string()),
            TypeTag::Array(s) => Some(format!("{} *", s.c_name())),
            TypeTag::Other(_) | TypeTag::Unknown => None,
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTag::Scalar(s) => write!(f, "{s}"),
            TypeTag::Array(s) => write!(f, "{s}_array"),
            TypeTag::Other(name) => f.write_str(name),
            TypeTag::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid type tag `{0}`")]
pub struct TypeTagError(pub String);

impl FromStr for TypeTag {
    type Err = TypeTagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "unknown" {
            return Ok(TypeTag::Unknown);
        }
        if s.is_empty() || s == "void" || !s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(TypeTagError(s.to_string()));
        }
        if let Some(scalar) = Scalar::parse(s) {
            return Ok(TypeTag::Scalar(scalar));
        }
        if let Some(scalar) = s.strip_suffix("_array").and_then(Scalar::parse) {
            return Ok(TypeTag::Array(scalar));
        }
        Ok(TypeTag::Other(s.to_string()))
    }
}

impl Serialize for TypeTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TypeTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Return type of a replacement: `"void"` or a type tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum ReturnType {
    #[default]
    Void,
    Value(TypeTag),
}

impl ReturnType {
    pub fn is_void(&self) -> bool {
        matches!(self, ReturnType::Void)
    }
}

impl fmt::Display for ReturnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReturnType::Void => f.write_str("void"),
            ReturnType::Value(tag) => tag.fmt(f),
        }
    }
}

impl Serialize for ReturnType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReturnType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s == "void" {
            return Ok(ReturnType::Void);
        }
        s.parse().map(ReturnType::Value).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip_through_strings() {
        for s in ["f64", "u64", "i32", "f64_array", "u8_array", "struct_point", "unknown"] {
            let tag: TypeTag = s.parse().unwrap();
            assert_eq!(tag.to_string(), s);
        }
        assert_eq!("f64_array".parse::<TypeTag>().unwrap(), TypeTag::Array(Scalar::F64));
        assert!("void".parse::<TypeTag>().is_err());
        assert!("has space".parse::<TypeTag>().is_err());
    }

    #[test]
    fn return_type_serde() {
        let v: ReturnType = serde_json::from_str("\"void\"").unwrap();
        assert!(v.is_void());
        let r: ReturnType = serde_json::from_str("\"i32\"").unwrap();
        assert_eq!(r, ReturnType::Value(TypeTag::Scalar(Scalar::I32)));
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"i32\"");
    }
}
