//! Dwell-time tables, the dwell-time-change performance score, and
//! per-emotion region distributions.
//!
//! Dwell is fixation-based: the dwell fraction of an AOI in a step is the
//! summed duration of fixations assigned to it divided by the step duration.
//! Time not covered by fixations accrues to `none`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::aoi::{Emotion, MainAoi, TrialManifest};
use crate::events::FixationEvent;
use crate::recording::InterestPeriod;

/// One analyzed trial, the unit the aggregation functions consume.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub participant_id: String,
    pub manifest: TrialManifest,
    pub periods: [InterestPeriod; 3],
    pub fixations: Vec<FixationEvent>,
}

/// Dwell fractions of one trial at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DwellTable {
    pub step: u8,
    pub target_face_index: usize,
    pub face_fractions: [f64; 4],
    pub word_fraction: f64,
    pub none_fraction: f64,
}

impl DwellTable {
    pub fn target_fraction(&self) -> f64 {
        self.face_fractions[self.target_face_index]
    }

    /// Mean dwell fraction of the three non-target faces.
    pub fn nontarget_mean(&self) -> f64 {
        let sum: f64 = self
            .face_fractions
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.target_face_index)
            .map(|(_, f)| f)
            .sum();
        sum / 3.0
    }

    pub fn total(&self) -> f64 {
        self.face_fractions.iter().sum::<f64>() + self.word_fraction + self.none_fraction
    }
}

/// Dwell fractions for one step of a trial. Fixations outside the step are
/// ignored; uncovered time goes to `none`.
pub fn dwell_table(record: &TrialRecord, step: u8) -> DwellTable {
    let period = &record.periods[(step - 1) as usize];
    let duration = period.duration_ms() as f64;
    let mut faces = [0.0f64; 4];
    let mut word = 0.0;
    let mut covered = 0.0;
    for f in &record.fixations {
        if f.step_index != step {
            continue;
        }
        let d = f.duration_ms as f64;
        covered += d;
        match f.assignment.main {
            MainAoi::Face(i) => faces[i] += d,
            MainAoi::Word => word += d,
            MainAoi::None => {}
        }
    }
    let none = (duration - covered).max(0.0)
        + record
            .fixations
            .iter()
            .filter(|f| f.step_index == step && f.assignment.main == MainAoi::None)
            .map(|f| f.duration_ms as f64)
            .sum::<f64>();
    DwellTable {
        step,
        target_face_index: record.manifest.target_face_index,
        face_fractions: faces.map(|v| v / duration),
        word_fraction: word / duration,
        none_fraction: none / duration,
    }
}

/// The dwell-time-change score in percentage points:
/// `100 * (target dwell fraction in step 3 - target dwell fraction in step 1)`.
pub fn dwell_time_change(step1: &DwellTable, step3: &DwellTable) -> f64 {
    100.0 * (step3.target_fraction() - step1.target_fraction())
}

/// DTC of one trial.
pub fn trial_dtc(record: &TrialRecord) -> f64 {
    let s1 = dwell_table(record, 1);
    let s3 = dwell_table(record, 3);
    dwell_time_change(&s1, &s3)
}

/// One row of the dwell summary table (per target emotion, plus the average
/// row), laid out as: step 1 target dwell, step 2 and 3 split into
/// non-target / target / word, and the mean DTC.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DwellSummaryRow {
    /// `None` for the average row.
    pub emotion: Option<Emotion>,
    pub trial_count: usize,
    pub step1_target: f64,
    pub step2_nontarget: f64,
    pub step2_target: f64,
    pub step2_word: f64,
    pub step3_nontarget: f64,
    pub step3_target: f64,
    pub step3_word: f64,
    pub dtc: f64,
}

/// Aggregate per-emotion dwell rows plus the average row over all trials.
pub fn dwell_summary(records: &[TrialRecord]) -> Vec<DwellSummaryRow> {
    let mut rows = Vec::new();
    let mut groups: BTreeMap<Emotion, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.manifest.target_emotion).or_default().push(r);
    }
    let summarize = |rs: &[&TrialRecord], emotion: Option<Emotion>| {
        let n = rs.len();
        let mut acc = DwellSummaryRow {
            emotion,
            trial_count: n,
            step1_target: 0.0,
            step2_nontarget: 0.0,
            step2_target: 0.0,
            step2_word: 0.0,
            step3_nontarget: 0.0,
            step3_target: 0.0,
            step3_word: 0.0,
            dtc: 0.0,
        };
        for r in rs {
            let t1 = dwell_table(r, 1);
            let t2 = dwell_table(r, 2);
            let t3 = dwell_table(r, 3);
            acc.step1_target += t1.target_fraction();
            acc.step2_nontarget += t2.nontarget_mean();
            acc.step2_target += t2.target_fraction();
            acc.step2_word += t2.word_fraction;
            acc.step3_nontarget += t3.nontarget_mean();
            acc.step3_target += t3.target_fraction();
            acc.step3_word += t3.word_fraction;
            acc.dtc += dwell_time_change(&t1, &t3);
        }
        let n = n as f64;
        acc.step1_target /= n;
        acc.step2_nontarget /= n;
        acc.step2_target /= n;
        acc.step2_word /= n;
        acc.step3_nontarget /= n;
        acc.step3_target /= n;
        acc.step3_word /= n;
        acc.dtc /= n;
        acc
    };
    for (emotion, rs) in &groups {
        rows.push(summarize(rs, Some(*emotion)));
    }
    let all: Vec<&TrialRecord> = records.iter().collect();
    if !all.is_empty() {
        rows.push(summarize(&all, None));
    }
    rows
}

/// Which faces a region distribution covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceSplit {
    All,
    Target,
    NonTarget,
}

/// Per-emotion dwell proportions over the eye/nose/mouth groups within one
/// step, normalized per emotion to the total face-region dwell. Emotions
/// with no face-region dwell are absent.
pub fn region_distribution(
    records: &[TrialRecord],
    step: u8,
    split: FaceSplit,
) -> BTreeMap<Emotion, [f64; 3]> {
    let mut totals: BTreeMap<Emotion, [f64; 3]> = BTreeMap::new();
    for r in records {
        for f in &r.fixations {
            if f.step_index != step {
                continue;
            }
            let MainAoi::Face(face_index) = f.assignment.main else {
                continue;
            };
            let keep = match split {
                FaceSplit::All => true,
                FaceSplit::Target => f.assignment.is_target,
                FaceSplit::NonTarget => !f.assignment.is_target,
            };
            if !keep {
                continue;
            }
            let Some(group) = f.assignment.group else { continue };
            let emotion = r.manifest.faces[face_index].emotion;
            totals.entry(emotion).or_insert([0.0; 3])[group.index()] += f.duration_ms as f64;
        }
    }
    totals
        .into_iter()
        .filter_map(|(e, sums)| {
            let total: f64 = sums.iter().sum();
            (total > 0.0).then(|| (e, sums.map(|s| s / total)))
        })
        .collect()
}

/// All group proportions sum to 1 within tolerance; convenience for tests
/// and report validation.
pub fn region_rows_normalized(map: &BTreeMap<Emotion, [f64; 3]>) -> bool {
    map.values()
        .all(|row| (row.iter().sum::<f64>() - 1.0).abs() < 1e-9)
}

/// A participant's emotion-perception performance: per-trial DTC scores and
/// their means.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerformanceScore {
    pub participant_id: String,
    pub trial_count: usize,
    /// (trial_id, target emotion, DTC) per scored trial.
    pub per_trial: Vec<(u32, Emotion, f64)>,
    pub mean_dtc: f64,
    pub per_emotion_mean: BTreeMap<Emotion, f64>,
}

/// Per-participant DTC summary over all their trials.
pub fn participant_performance(records: &[TrialRecord]) -> Vec<PerformanceScore> {
    let mut by_participant: BTreeMap<&str, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_participant
            .entry(r.participant_id.as_str())
            .or_default()
            .push(r);
    }
    by_participant
        .into_iter()
        .map(|(pid, rs)| {
            let per_trial: Vec<(u32, Emotion, f64)> = rs
                .iter()
                .map(|r| (r.manifest.trial_id, r.manifest.target_emotion, trial_dtc(r)))
                .collect();
            let mean_dtc =
                per_trial.iter().map(|(_, _, d)| d).sum::<f64>() / per_trial.len() as f64;
            let mut per_emotion: BTreeMap<Emotion, (f64, usize)> = BTreeMap::new();
            for (_, e, d) in &per_trial {
                let entry = per_emotion.entry(*e).or_insert((0.0, 0));
                entry.0 += d;
                entry.1 += 1;
            }
            PerformanceScore {
                participant_id: pid.into(),
                trial_count: per_trial.len(),
                per_trial,
                mean_dtc,
                per_emotion_mean: per_emotion
                    .into_iter()
                    .map(|(e, (sum, n))| (e, sum / n as f64))
                    .collect(),
            }
        })
        .collect()
}
