//! Whole-program orchestration: parse every source, detect candidates,
//! measure the baseline, then run the search over generated variants.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::detector::{detect, reindex, DetectWarning, OffloadCandidate, SimilarityIndex};
use crate::frontend::{parse_file, FileError, SourceUnit};
use crate::harness::{measure, measure_baseline, Executor, MeasureRequest, MeasurementResult, ProfileError, Profiles, Status, Validator};
use crate::par;
use crate::pattern_db::PatternDb;
use crate::search::{search, OffloadPattern, SearchCandidate, SearchReport};
use crate::transform::{write_variant, VariantError};

/// Profile used for the all-CPU baseline.
pub const BASELINE_PROFILE: &str = "cpu_baseline";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Source(#[from] FileError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Variant(#[from] VariantError),
    #[error("baseline failed ({:?}):\n{}", .0.status, .0.log)]
    Baseline(Box<MeasurementResult>),
}

/// Parses all sources (in parallel when enabled), keeping input order.
pub fn parse_sources(paths: &[PathBuf]) -> Result<Vec<SourceUnit>, FileError> {
    par::map(paths, |p| parse_file(p)).into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct Detection {
    pub candidates: Vec<OffloadCandidate>,
    pub warnings: Vec<DetectWarning>,
}

/// Detects candidates in every unit. Indices run across all units in
/// input order, then by site offset.
pub fn detect_all(units: &[SourceUnit], db: &PatternDb, threshold: f64) -> Detection {
    let index = SimilarityIndex::build(db);
    let per_unit = par::map(units, |u| detect(u, db, &index, threshold));
    Detection { candidates: reindex(per_unit.into_iter().flatten().collect()), warnings: index.warnings }
}

pub struct SearchSetup<'a> {
    pub db: &'a PatternDb,
    pub profiles: &'a Profiles,
    pub out_dir: &'a Path,
    pub reps: usize,
    pub validator: Validator,
}

/// Runs baseline plus search. Only candidates with `is_executable()` are
/// tried. `progress` receives one line per step.
pub fn run_search(
    units: &[SourceUnit],
    candidates: &[OffloadCandidate],
    setup: &SearchSetup<'_>,
    exec: &dyn Executor,
    progress: &mut dyn FnMut(&str),
) -> Result<SearchReport, PipelineError> {
    let n = candidates.len();
    let db = setup.db;
    let cpu = setup.profiles.get(BASELINE_PROFILE)?;

    let base_pattern = OffloadPattern::none(n);
    let base_dir = setup.out_dir.join(base_pattern.dir_name());
    write_variant(&base_dir, units, &[], db)?;
    progress(&format!("measuring baseline ({})", base_pattern.dir_name()));
    let req = MeasureRequest {
        pattern: &base_pattern.bitstring(),
        variant_dir: &base_dir,
        profile: cpu,
        profile_dir: &setup.profiles.dir,
        link_flags: &[],
    };
    let (baseline, stdout) = measure_baseline(&req, &setup.validator, setup.reps, exec);
    if !baseline.is_ok() {
        return Err(PipelineError::Baseline(Box::new(baseline)));
    }
    let mut validator = setup.validator.clone();
    if validator.expected.is_none() {
        validator.expected = stdout;
    }

    // Single-candidate variants are independent; render them up front.
    let singles: Vec<OffloadPattern> =
        (0..n).filter(|&i| candidates[i].is_executable()).map(|i| OffloadPattern::single(n, i)).collect();
    let written: BTreeMap<String, Result<(), String>> = par::map(&singles, |p| {
        let on: Vec<&OffloadCandidate> = p.on().iter().map(|&i| &candidates[i]).collect();
        (p.bitstring(), write_variant(&setup.out_dir.join(p.dir_name()), units, &on, db).map_err(|e| e.to_string()))
    })
    .into_iter()
    .collect();

    let mut extra_notes = Vec::new();
    let measure_fn = |p: &OffloadPattern| -> MeasurementResult {
        let on: Vec<&OffloadCandidate> = p.on().iter().map(|&i| &candidates[i]).collect();
        let dir = setup.out_dir.join(p.dir_name());
        let prepared = match written.get(&p.bitstring()) {
            Some(r) => r.clone(),
            None => write_variant(&dir, units, &on, db).map_err(|e| e.to_string()),
        };
        if let Err(why) = prepared {
            return MeasurementResult::failed(p.bitstring(), Status::CompileError, why);
        }
        let mut profile_names: Vec<&str> = Vec::new();
        let mut flags: Vec<String> = Vec::new();
        for c in &on {
            if let Some(r) = db.get(&c.record) {
                if !profile_names.contains(&r.replacement.backend_profile.as_str()) {
                    profile_names.push(&r.replacement.backend_profile);
                }
                flags.extend(r.replacement.link_flags.iter().cloned());
            }
        }
        let Some(&profile_name) = profile_names.first() else {
            return MeasurementResult::failed(p.bitstring(), Status::CompileError, "pattern has no backend profile");
        };
        if profile_names.len() > 1 {
            extra_notes.push(format!("pattern {p} mixes backend profiles {profile_names:?}; using `{profile_name}`"));
        }
        let profile = match setup.profiles.get(profile_name) {
            Ok(pr) => pr,
            Err(e) => return MeasurementResult::failed(p.bitstring(), Status::CompileError, e.to_string()),
        };
        progress(&format!("measuring pattern {p} under `{profile_name}`"));
        let req = MeasureRequest {
            pattern: &p.bitstring(),
            variant_dir: &dir,
            profile,
            profile_dir: &setup.profiles.dir,
            link_flags: &flags,
        };
        measure(&req, &validator, setup.reps, exec)
    };

    let search_cands: Vec<SearchCandidate> = candidates.iter().map(SearchCandidate::from).collect();
    let mut report = search(&search_cands, baseline, measure_fn).expect("baseline checked above");
    report.notes.extend(extra_notes);
    Ok(report)
}
