//! Single-then-combine pattern search: measure each candidate alone, then
//! all individual winners together, and keep the fastest valid pattern
//! (the all-CPU baseline included).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::detector::OffloadCandidate;
use crate::harness::{MeasurementResult, Status};

/// Which candidates are offloaded. Bit `i` is candidate `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(from = "String")]
pub struct OffloadPattern {
    bits: Vec<bool>,
}

impl OffloadPattern {
    pub fn none(n: usize) -> OffloadPattern {
        OffloadPattern { bits: vec![false; n] }
    }

    pub fn from_indices(n: usize, on: &[usize]) -> OffloadPattern {
        let mut p = OffloadPattern::none(n);
        for &i in on {
            p.bits[i] = true;
        }
        p
    }

    pub fn single(n: usize, i: usize) -> OffloadPattern {
        OffloadPattern::from_indices(n, &[i])
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_on(&self, i: usize) -> bool {
        self.bits.get(i).copied().unwrap_or(false)
    }

    pub fn on(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&i| self.bits[i]).collect()
    }

    pub fn count_on(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_baseline(&self) -> bool {
        self.count_on() == 0
    }

    /// `"01010"` style, leftmost character is candidate 0.
    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Directory name for the variant; `none` when there are no candidates.
    pub fn dir_name(&self) -> String {
        if self.bits.is_empty() {
            "none".to_string()
        } else {
            self.bitstring()
        }
    }
}

impl From<String> for OffloadPattern {
    fn from(s: String) -> Self {
        OffloadPattern { bits: s.chars().map(|c| c == '1').collect() }
    }
}

impl fmt::Display for OffloadPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dir_name())
    }
}

impl Serialize for OffloadPattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.bitstring())
    }
}

/// What the search needs to know about one candidate.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SearchCandidate {
    pub executable: bool,
    /// Indices of candidates whose edits overlap this one.
    pub conflicts: Vec<usize>,
}

impl From<&OffloadCandidate> for SearchCandidate {
    fn from(c: &OffloadCandidate) -> Self {
        SearchCandidate { executable: c.is_executable(), conflicts: c.overlaps.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub baseline: MeasurementResult,
    pub singles: Vec<MeasurementResult>,
    pub combined: Option<MeasurementResult>,
    pub selected: OffloadPattern,
    pub selected_median_s: f64,
    pub speedup: f64,
    /// Candidates whose single pattern beat the baseline.
    pub winners: Vec<usize>,
    /// Winners left out of the combination because they conflict with an
    /// earlier winner.
    pub dropped_from_combination: Vec<usize>,
    /// Baseline, singles and combination measurements performed.
    pub measurements: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("baseline measurement is not usable (status {0:?})")]
    NoValidBaseline(Status),
}

fn better(a: (&OffloadPattern, f64), b: (&OffloadPattern, f64)) -> bool {
    let ord = a
        .1
        .total_cmp(&b.1)
        .then_with(|| a.0.count_on().cmp(&b.0.count_on()))
        .then_with(|| a.0.bitstring().cmp(&b.0.bitstring()));
    ord == Ordering::Less
}

/// Runs the search. `measure` is called once per pattern tried.
pub fn search(
    candidates: &[SearchCandidate],
    baseline: MeasurementResult,
    mut measure: impl FnMut(&OffloadPattern) -> MeasurementResult,
) -> Result<SearchReport, SearchError> {
    let n = candidates.len();
    let base_median = match (baseline.status, baseline.median_s) {
        (Status::Ok, Some(m)) => m,
        (status, _) => return Err(SearchError::NoValidBaseline(status)),
    };
    let mut notes = Vec::new();
    let mut measurements = 1;
    let mut measure_one = |p: &OffloadPattern| {
        measurements += 1;
        let mut r = measure(p);
        r.pattern = p.bitstring();
        r
    };

    let mut best = (OffloadPattern::none(n), base_median);
    let mut singles = Vec::new();
    let mut winners = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        if !c.executable {
            continue;
        }
        let pattern = OffloadPattern::single(n, i);
        let r = measure_one(&pattern);
        if let (Status::Ok, Some(m)) = (r.status, r.median_s) {
            if m < base_median {
                winners.push(i);
            }
            if better((&pattern, m), (&best.0, best.1)) {
                best = (pattern, m);
            }
        }
        singles.push(r);
    }

    let mut combined = None;
    let mut dropped = Vec::new();
    if winners.len() >= 2 {
        if winners.len() > 2 {
            notes.push(format!(
                "{} candidates beat the baseline individually; they are combined into one pattern without trying subsets",
                winners.len()
            ));
        }
        let mut kept: Vec<usize> = Vec::new();
        for &w in &winners {
            let clash = kept.iter().any(|&k| candidates[w].conflicts.contains(&k) || candidates[k].conflicts.contains(&w));
            if clash {
                dropped.push(w);
            } else {
                kept.push(w);
            }
        }
        if !dropped.is_empty() {
            notes.push(format!("winners {dropped:?} overlap an earlier winner and were left out of the combination"));
        }
        if kept.len() >= 2 {
            let pattern = OffloadPattern::from_indices(n, &kept);
            let r = measure_one(&pattern);
            if let (Status::Ok, Some(m)) = (r.status, r.median_s) {
                if better((&pattern, m), (&best.0, best.1)) {
                    best = (pattern, m);
                }
            }
            combined = Some(r);
        }
    }

    let (selected, selected_median_s) = best;
    let speedup = if selected_median_s > 0.0 { base_median / selected_median_s } else { 1.0 };
    Ok(SearchReport {
        baseline,
        singles,
        combined,
        selected,
        selected_median_s,
        speedup,
        winners,
        dropped_from_combination: dropped,
        measurements,
        notes,
    })
}
