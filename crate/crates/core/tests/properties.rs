mod support;

use std::path::Path;

use proptest::prelude::*;

use blockoff::detector::detect_by_name;
use blockoff::frontend::{list_definitions, parse, AstNode, NodeKind, SourceUnit};
use blockoff::harness::{median, MeasurementResult, Status};
use blockoff::interface::{bind, BindStatus, CallInfo};
use blockoff::pattern_db::{InterfaceDescriptor, ParamSpec, PatternDb};
use blockoff::pipeline::detect_all;
use blockoff::search::{search, OffloadPattern, SearchCandidate};
use blockoff::similarity::{similarity, vectorize, CharacteristicVector};
use blockoff::transform::apply;
use blockoff::types::{ReturnType, Scalar, TypeTag};

use support::progs::{plain, program, render, renamed, Program, Style};

fn unit_of(p: &Program, name: &dyn Fn(usize) -> String, comments: bool) -> SourceUnit {
    let text = render(p, &Style { name, comments });
    parse("gen.c", text.clone()).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

fn shape(n: &AstNode) -> String {
    let mut s = format!("{:?}(", n.kind);
    for c in &n.children {
        s.push_str(&shape(c));
    }
    s.push(')');
    s
}

fn vectors(u: &SourceUnit) -> Vec<CharacteristicVector> {
    list_definitions(u).iter().map(|d| vectorize(d.body())).collect()
}

fn counts() -> impl Strategy<Value = CharacteristicVector> {
    prop::array::uniform24(0u32..40).prop_map(CharacteristicVector::from_counts)
}

fn check_spans(n: &AstNode, len: usize) -> Result<(), TestCaseError> {
    prop_assert!(n.span.start <= n.span.end && n.span.end <= len);
    let mut prev_end = n.span.start;
    for c in &n.children {
        prop_assert!(n.span.contains(c.span), "{:?} escapes {:?}", c.kind, n.kind);
        prop_assert!(c.span.start >= prev_end, "siblings overlap under {:?}", n.kind);
        prev_end = c.span.end;
        check_spans(c, len)?;
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn similarity_symmetric_and_bounded(u in counts(), v in counts()) {
        let a = similarity(&u, &v);
        prop_assert_eq!(a, similarity(&v, &u));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(similarity(&u, &u), 1.0);
    }

    #[test]
    fn extra_statements_lower_similarity(u in counts(), kind in 0usize..24, k in 1u32..10) {
        prop_assume!(u.token_mass > 0);
        let mut raw = [0u32; 24];
        for (i, slot) in raw.iter_mut().enumerate() {
            *slot = u.get(NodeKind::ALL[i]);
        }
        raw[kind] += k;
        let v = CharacteristicVector::from_counts(raw);
        prop_assert!(similarity(&u, &v) < 1.0);
        raw[kind] += 1;
        let w = CharacteristicVector::from_counts(raw);
        prop_assert!(similarity(&u, &w) < similarity(&u, &v));
    }

    #[test]
    fn vectors_survive_renaming(p in program()) {
        let a = unit_of(&p, &plain, false);
        let b = unit_of(&p, &renamed, false);
        prop_assert_eq!(vectors(&a), vectors(&b));
        prop_assert_eq!(shape(&a.root), shape(&b.root));
    }

    #[test]
    fn comments_do_not_change_structure(p in program()) {
        let a = unit_of(&p, &plain, false);
        let b = unit_of(&p, &plain, true);
        prop_assert_eq!(shape(&a.root), shape(&b.root));
        prop_assert_eq!(vectors(&a), vectors(&b));
    }

    #[test]
    fn spans_nest_and_do_not_overlap(p in program(), comments in any::<bool>()) {
        let u = unit_of(&p, &plain, comments);
        prop_assert_eq!(u.root.span.start, 0);
        check_spans(&u.root, u.text.len())?;
    }

    #[test]
    fn empty_apply_is_identity(p in program(), comments in any::<bool>()) {
        let u = unit_of(&p, &plain, comments);
        prop_assert_eq!(apply(&u, &[], &PatternDb::default()).unwrap(), u.text);
    }

    #[test]
    fn median_is_lower_middle(mut xs in prop::collection::vec(0u32..1000, 1..12)) {
        let m = median(&xs.iter().map(|&x| x as f64).collect::<Vec<_>>()).unwrap();
        xs.sort();
        prop_assert_eq!(m, xs[(xs.len() - 1) / 2] as f64);
    }
}

// Interface binding.

fn tag() -> impl Strategy<Value = TypeTag> {
    let scalar = prop::sample::select(Scalar::ALL.to_vec());
    prop_oneof![
        scalar.clone().prop_map(TypeTag::Scalar),
        scalar.prop_map(TypeTag::Array),
        Just(TypeTag::Other("struct cplx".into())),
        Just(TypeTag::Unknown),
    ]
}

fn iface() -> impl Strategy<Value = InterfaceDescriptor> {
    (prop::collection::vec(tag(), 0..5), 0usize..5, prop::option::of(tag())).prop_map(|(tys, req, ret)| {
        let req = req.min(tys.len());
        InterfaceDescriptor {
            params: tys
                .into_iter()
                .enumerate()
                .map(|(i, ty)| ParamSpec { name: format!("p{i}"), ty, optional: i >= req, default: None })
                .collect(),
            returns: ret.map_or(ReturnType::Void, ReturnType::Value),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn bind_is_deterministic_and_explains_itself(i in iface(), args in prop::collection::vec(tag(), 0..6)) {
        let site = CallInfo::new(args);
        let a = bind(&site, &i);
        prop_assert_eq!(&a, &bind(&site, &i));
        if a.status >= BindStatus::ConfirmationRequired {
            prop_assert!(!a.notes.is_empty());
        }
    }

    #[test]
    fn a_mismatch_never_improves_status(i in iface(), seed in prop::collection::vec(tag(), 0..6), pick in any::<prop::sample::Index>(), other in tag()) {
        // Start from a site whose leading args match the params exactly.
        let mut args: Vec<TypeTag> = i.params.iter().map(|p| p.ty.clone()).collect();
        args.extend(seed.iter().skip(i.params.len()).cloned());
        args.truncate(seed.len().max(i.required_count()));
        prop_assume!(!args.is_empty());
        let k = pick.index(args.len());
        prop_assume!(args[k] != other);
        let before = bind(&CallInfo::new(args.clone()), &i).status;
        args[k] = other;
        let after = bind(&CallInfo::new(args), &i).status;
        prop_assert!(after >= before, "{before:?} -> {after:?}");
    }

    #[test]
    fn a_surplus_arg_never_improves_status(i in iface(), extra in tag()) {
        let mut args: Vec<TypeTag> = i.params.iter().map(|p| p.ty.clone()).collect();
        let before = bind(&CallInfo::new(args.clone()), &i).status;
        args.push(extra);
        let after = bind(&CallInfo::new(args), &i).status;
        prop_assert!(after >= before);
        prop_assert!(after >= BindStatus::ConfirmationRequired);
    }
}

// Search.

#[derive(Debug, Clone)]
enum Cell {
    Fail,
    Time(u8),
}

fn cell() -> impl Strategy<Value = Cell> {
    prop_oneof![1 => Just(Cell::Fail), 6 => (1u8..12).prop_map(Cell::Time)]
}

fn result_of(pattern: &str, c: &Cell) -> MeasurementResult {
    match c {
        Cell::Fail => MeasurementResult::failed(pattern, Status::RunError, "scripted"),
        Cell::Time(t) => MeasurementResult::ok(pattern, vec![*t as f64 / 2.0]),
    }
}

fn time(c: &Cell) -> Option<f64> {
    match c {
        Cell::Fail => None,
        Cell::Time(t) => Some(*t as f64 / 2.0),
    }
}

/// Brute-force argmin over baseline, executable singles and the all-winners
/// combination, ties to fewer ON bits then smaller bitstring.
fn oracle(base: f64, singles: &[Option<Cell>], combo: &Cell) -> (String, f64) {
    let n = singles.len();
    let bits = |on: &[usize]| (0..n).map(|i| if on.contains(&i) { '1' } else { '0' }).collect::<String>();
    let mut pool = vec![(bits(&[]), base, 0)];
    let mut winners = Vec::new();
    for (i, s) in singles.iter().enumerate() {
        if let Some(t) = s.as_ref().and_then(time) {
            pool.push((bits(&[i]), t, 1));
            if t < base {
                winners.push(i);
            }
        }
    }
    if winners.len() >= 2 {
        if let Some(t) = time(combo) {
            pool.push((bits(&winners), t, winners.len()));
        }
    }
    pool.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)).then(a.0.cmp(&b.0)));
    (pool[0].0.clone(), pool[0].1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn search_matches_brute_force(
        base in 1u8..12,
        singles in prop::collection::vec(prop::option::of(cell()), 0..7),
        combo in cell(),
    ) {
        let n = singles.len();
        let base = base as f64 / 2.0;
        let cands: Vec<SearchCandidate> =
            singles.iter().map(|s| SearchCandidate { executable: s.is_some(), conflicts: vec![] }).collect();
        let mut seen = Vec::new();
        let report = search(&cands, MeasurementResult::ok("", vec![base]), |p: &OffloadPattern| {
            seen.push(p.bitstring());
            match p.count_on() {
                1 => result_of(&p.bitstring(), singles[p.on()[0]].as_ref().expect("only executable singles")),
                _ => result_of(&p.bitstring(), &combo),
            }
        }).unwrap();

        let (want, t) = oracle(base, &singles, &combo);
        prop_assert_eq!(report.selected.bitstring(), want);
        prop_assert_eq!(report.selected_median_s, t);
        prop_assert!(report.speedup >= 1.0);
        prop_assert!(report.measurements <= n + 2);
        prop_assert_eq!(report.measurements, seen.len() + 1);
        let mut uniq = seen.clone();
        uniq.sort();
        uniq.dedup();
        prop_assert_eq!(uniq.len(), seen.len());
    }
}

// Candidate numbering across files.

fn fixture_db() -> PatternDb {
    PatternDb::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/db")).unwrap()
}

fn with_callees(i: usize) -> String {
    match i {
        0 => "four1".into(),
        1 => "ludcmp".into(),
        _ => plain(i),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn candidate_indices_follow_source_order(ps in prop::collection::vec(program(), 1..4)) {
        let db = fixture_db();
        let units: Vec<SourceUnit> = ps
            .iter()
            .enumerate()
            .map(|(k, p)| parse(format!("f{k}.c"), render(p, &Style { name: &with_callees, comments: false })).unwrap())
            .collect();
        let found = detect_all(&units, &db, 0.9).candidates;
        let expected: usize = units.iter().map(|u| detect_by_name(u, &db).len()).sum();
        prop_assert!(found.len() >= expected);
        for (i, c) in found.iter().enumerate() {
            prop_assert_eq!(c.index, i);
        }
        for w in found.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let fa = units.iter().position(|u| u.path == a.file).unwrap();
            let fb = units.iter().position(|u| u.path == b.file).unwrap();
            prop_assert!(fa < fb || (fa == fb && a.site.start <= b.site.start));
        }
    }
}
