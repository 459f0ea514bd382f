//! Reconciles a call site's arguments and return use with a replacement's
//! declared interface.

use serde::{Deserialize, Serialize};

use crate::frontend::Span;
use crate::pattern_db::InterfaceDescriptor;
use crate::types::{ReturnType, Scalar, TypeTag};

/// Ordered from best to worst; a binding's status is the worst status any
/// single argument or the return value calls for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BindStatus {
    AutoBind,
    AutoBindWithCasts,
    ConfirmationRequired,
    Incompatible,
}

impl BindStatus {
    /// Usable without asking anyone.
    pub fn is_automatic(self) -> bool {
        matches!(self, BindStatus::AutoBind | BindStatus::AutoBindWithCasts)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cast {
    pub from: TypeTag,
    pub to: TypeTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArgSource {
    /// The caller's argument at `index`.
    Arg { index: usize, span: Option<Span> },
    /// Caller argument `index` has no counterpart in the replacement.
    DroppedOptional { index: usize },
    /// Optional replacement param the caller does not supply.
    DefaultedOptional { param: usize },
    /// Required replacement param the caller does not supply.
    Missing { param: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArgBinding {
    pub source: ArgSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cast: Option<Cast>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceBinding {
    pub status: BindStatus,
    pub arg_map: Vec<ArgBinding>,
    pub notes: Vec<String>,
}

impl InterfaceBinding {
    /// Binding entry that feeds replacement param `k`, if any.
    pub fn for_param(&self, k: usize) -> Option<&ArgBinding> {
        self.arg_map.get(k).filter(|b| !matches!(b.source, ArgSource::DroppedOptional { .. }))
    }

    pub fn casts(&self) -> impl Iterator<Item = &Cast> {
        self.arg_map.iter().filter_map(|b| b.cast.as_ref())
    }

    pub fn drops(&self) -> usize {
        self.arg_map.iter().filter(|b| matches!(b.source, ArgSource::DroppedOptional { .. })).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "type", rename_all = "snake_case")]
pub enum ReturnUse {
    /// The call is a statement of its own.
    Discarded,
    /// `target = call(...)`, with the target's type.
    Assigned(TypeTag),
    /// Part of a larger expression.
    Expression(TypeTag),
}

/// What the frontend knows about one call site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallInfo {
    pub arg_tags: Vec<TypeTag>,
    /// Spans of the argument expressions, parallel to `arg_tags` when known.
    pub arg_spans: Vec<Span>,
    pub return_use: ReturnUse,
    /// Number of required params of the callee as the source declares it,
    /// when a prototype with default arguments says so.
    pub source_required: Option<usize>,
}

impl CallInfo {
    pub fn new(arg_tags: Vec<TypeTag>) -> Self {
        CallInfo { arg_tags, arg_spans: Vec::new(), return_use: ReturnUse::Discarded, source_required: None }
    }
}

/// Implicit conversions that never lose information.
pub fn is_widening(from: Scalar, to: Scalar) -> bool {
    use Scalar::*;
    matches!(
        (from, to),
        (F32, F64)
            | (I32, I64)
            | (U32, U64)
            | (I32, F64)
            | (U8, U16)
            | (U8, U32)
            | (U8, U64)
            | (U16, U32)
            | (U16, U64)
    )
}

struct Acc {
    status: BindStatus,
    notes: Vec<String>,
}

impl Acc {
    fn raise(&mut self, status: BindStatus, note: String) {
        self.status = self.status.max(status);
        self.notes.push(note);
    }
}

pub fn bind(site: &CallInfo, iface: &InterfaceDescriptor) -> InterfaceBinding {
    let n_args = site.arg_tags.len();
    let n_params = iface.params.len();
    let mut acc = Acc { status: BindStatus::AutoBind, notes: Vec::new() };
    let mut arg_map = Vec::with_capacity(n_args.max(n_params));

    for (i, param) in iface.params.iter().enumerate() {
        let Some(actual) = site.arg_tags.get(i) else {
            if param.optional {
                acc.notes.push(format!("param {i} `{}` omitted by caller; replacement default used", param.name));
                arg_map.push(ArgBinding { source: ArgSource::DefaultedOptional { param: i }, cast: None });
            } else {
                acc.raise(
                    BindStatus::ConfirmationRequired,
                    format!(
                        "replacement requires param {i} `{}` ({}) but the call passes only {n_args} argument(s)",
                        param.name, param.ty
                    ),
                );
                arg_map.push(ArgBinding { source: ArgSource::Missing { param: i }, cast: None });
            }
            continue;
        };
        let source = ArgSource::Arg { index: i, span: site.arg_spans.get(i).copied() };
        let expected = &param.ty;
        let mut cast = None;
        if actual != expected {
            match (actual, expected) {
                (TypeTag::Unknown, _) | (_, TypeTag::Unknown) => acc.raise(
                    BindStatus::ConfirmationRequired,
                    format!("argument {i} (`{}`): type could not be inferred, replacement expects {expected}", param.name),
                ),
                (TypeTag::Scalar(from), TypeTag::Scalar(to)) => {
                    let c = Cast { from: actual.clone(), to: expected.clone() };
                    if is_widening(*from, *to) {
                        acc.raise(BindStatus::AutoBindWithCasts, format!("argument {i} (`{}`): cast {from} -> {to}", param.name));
                    } else {
                        acc.raise(
                            BindStatus::ConfirmationRequired,
                            format!("argument {i} (`{}`): narrowing or sign-changing cast {from} -> {to}", param.name),
                        );
                    }
                    cast = Some(c);
                }
                _ => acc.raise(
                    BindStatus::Incompatible,
                    format!("argument {i} (`{}`): {actual} cannot be passed as {expected}", param.name),
                ),
            }
        }
        arg_map.push(ArgBinding { source, cast });
    }

    for j in n_params..n_args {
        arg_map.push(ArgBinding { source: ArgSource::DroppedOptional { index: j }, cast: None });
        match site.source_required {
            Some(r) if j >= r => {
                acc.notes.push(format!("argument {j} is optional in the original call form and is dropped"));
            }
            _ => acc.raise(
                BindStatus::ConfirmationRequired,
                format!("argument {j} has no counterpart in the replacement ({n_params} params) and would be removed"),
            ),
        }
    }

    match (&iface.returns, &site.return_use) {
        (ReturnType::Void, ReturnUse::Discarded) => {}
        (ReturnType::Void, ReturnUse::Assigned(_) | ReturnUse::Expression(_)) => acc.raise(
            BindStatus::ConfirmationRequired,
            "the call's result is used but the replacement returns void".into(),
        ),
        (ReturnType::Value(t), ReturnUse::Discarded) => acc.raise(
            BindStatus::ConfirmationRequired,
            format!("the replacement returns {t} which the original call ignores"),
        ),
        (ReturnType::Value(t), ReturnUse::Assigned(u) | ReturnUse::Expression(u)) => {
            if t != u {
                match (t, u) {
                    (TypeTag::Scalar(from), TypeTag::Scalar(to)) if is_widening(*from, *to) => {
                        acc.raise(BindStatus::AutoBindWithCasts, format!("return value converts {from} -> {to}"))
                    }
                    _ => acc.raise(
                        BindStatus::ConfirmationRequired,
                        format!("the replacement returns {t} where the call site expects {u}"),
                    ),
                }
            }
        }
    }

    InterfaceBinding { status: acc.status, arg_map, notes: acc.notes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern_db::ParamSpec;

    fn t(s: &str) -> TypeTag {
        s.parse().unwrap()
    }

    fn iface(params: &[(&str, bool)]) -> InterfaceDescriptor {
        InterfaceDescriptor {
            params: params
                .iter()
                .enumerate()
                .map(|(i, (ty, optional))| ParamSpec { name: format!("p{i}"), ty: t(ty), optional: *optional, default: None })
                .collect(),
            returns: ReturnType::Void,
        }
    }

    fn site(tags: &[&str]) -> CallInfo {
        CallInfo::new(tags.iter().map(|s| t(s)).collect())
    }

    #[test]
    fn exact_match() {
        let b = bind(&site(&["f64_array", "u64", "i32"]), &iface(&[("f64_array", false), ("u64", false), ("i32", false)]));
        assert_eq!(b.status, BindStatus::AutoBind);
        assert_eq!(b.casts().count(), 0);
        assert_eq!(b.drops(), 0);
        assert!(b.notes.is_empty());
    }

    #[test]
    fn float_to_double_cast() {
        let b = bind(&site(&["f32", "u64"]), &iface(&[("f64", false), ("u64", false)]));
        assert_eq!(b.status, BindStatus::AutoBindWithCasts);
        assert_eq!(b.casts().collect::<Vec<_>>(), vec![&Cast { from: t("f32"), to: t("f64") }]);
        assert!(!b.notes.is_empty());
    }

    #[test]
    fn optional_drop_is_still_automatic() {
        let mut s = site(&["f64_array", "u64", "i32"]);
        s.source_required = Some(2);
        let b = bind(&s, &iface(&[("f64_array", false), ("u64", false)]));
        assert_eq!(b.status, BindStatus::AutoBind);
        assert_eq!(b.drops(), 1);
        assert_eq!(b.arg_map[2].source, ArgSource::DroppedOptional { index: 2 });
    }

    #[test]
    fn surplus_without_source_optionality_needs_confirmation() {
        let b = bind(&site(&["f64_array", "u64", "i32"]), &iface(&[("f64_array", false), ("u64", false)]));
        assert_eq!(b.status, BindStatus::ConfirmationRequired);
    }

    #[test]
    fn missing_required_arg() {
        let b = bind(&site(&["f64_array"]), &iface(&[("f64_array", false), ("u64", false)]));
        assert_eq!(b.status, BindStatus::ConfirmationRequired);
        assert_eq!(b.arg_map[1].source, ArgSource::Missing { param: 1 });
        assert!(!b.notes.is_empty());
    }

    #[test]
    fn omitted_optional_is_defaulted() {
        let b = bind(&site(&["f64_array", "u64"]), &iface(&[("f64_array", false), ("u64", false), ("i32", true)]));
        assert_eq!(b.status, BindStatus::AutoBind);
        assert_eq!(b.arg_map[2].source, ArgSource::DefaultedOptional { param: 2 });
    }

    #[test]
    fn narrowing_unknown_and_conflicts() {
        let i = iface(&[("f32", false)]);
        assert_eq!(bind(&site(&["f64"]), &i).status, BindStatus::ConfirmationRequired);
        assert_eq!(bind(&site(&["unknown"]), &i).status, BindStatus::ConfirmationRequired);
        assert_eq!(bind(&site(&["f32_array"]), &i).status, BindStatus::Incompatible);
        let arr = iface(&[("f64_array", false)]);
        assert_eq!(bind(&site(&["f32_array"]), &arr).status, BindStatus::Incompatible);
        assert_eq!(bind(&site(&["struct_point"]), &arr).status, BindStatus::Incompatible);
    }

    #[test]
    fn return_use_rules() {
        let mut i = iface(&[("i32", false)]);
        let mut s = site(&["i32"]);
        s.return_use = ReturnUse::Assigned(t("i32"));
        assert_eq!(bind(&s, &i).status, BindStatus::ConfirmationRequired);
        i.returns = ReturnType::Value(t("i32"));
        assert_eq!(bind(&s, &i).status, BindStatus::AutoBind);
        s.return_use = ReturnUse::Discarded;
        assert_eq!(bind(&s, &i).status, BindStatus::ConfirmationRequired);
        s.return_use = ReturnUse::Assigned(t("i64"));
        assert_eq!(bind(&s, &i).status, BindStatus::AutoBindWithCasts);
    }
}
