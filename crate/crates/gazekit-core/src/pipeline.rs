//! End-to-end per-session analysis: kinematics, fixations, microsaccades,
//! AOI assignment, and feature rows.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::aoi::{build_aoi_map, default_word_rect, AoiMap, LandmarkSet, MainAoi};
use crate::events::{
    detect_fixations, detect_microsaccades, Eye, FeatureRow, FixationEvent, FixationParams,
    FixationSpan, Microsaccade, MicrosaccadeParams,
};
use crate::geometry::Rect;
use crate::kinematics::compute_trial_kinematics;
use crate::metrics::TrialRecord;
use crate::recording::{period_sample_range, GazeSample, InterestPeriod, SessionRecording};

/// Extraction settings for a whole session.
#[derive(Debug, Clone, PartialEq)]
pub struct EventParams {
    pub microsaccade: MicrosaccadeParams,
    pub fixation: FixationParams,
    /// Word AOI override; defaults to a 300x60 rect at screen center.
    pub word_rect: Option<Rect>,
    /// Assignment distance cap (disabled by default: every fixation maps to
    /// the nearest AOI no matter how far).
    pub max_assign_distance_px: Option<f64>,
    /// Externally supplied fixation intervals (trial_id, start_ms, end_ms).
    /// When present they replace the dispersion-based detector.
    pub imported_fixations: Option<Vec<(u32, u64, u64)>>,
}

impl Default for EventParams {
    fn default() -> Self {
        EventParams {
            microsaccade: MicrosaccadeParams::default(),
            fixation: FixationParams::default(),
            word_rect: None,
            max_assign_distance_px: None,
            imported_fixations: None,
        }
    }
}

/// Everything extracted from one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialAnalysis {
    pub record: TrialRecord,
    /// (step_index, event), ordered by step then onset, all three eye
    /// classes.
    pub microsaccades: Vec<(u8, Microsaccade)>,
}

/// Everything extracted from one session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionAnalysis {
    pub trials: Vec<TrialAnalysis>,
    pub rows: Vec<FeatureRow>,
    pub warnings: Vec<String>,
}

impl SessionAnalysis {
    pub fn records(&self) -> Vec<TrialRecord> {
        self.trials.iter().map(|t| t.record.clone()).collect()
    }
}

fn span_from_interval(
    samples: &[GazeSample],
    period: &InterestPeriod,
    start_ms: u64,
    end_ms: u64,
    dt_ms: u64,
) -> Option<FixationSpan> {
    let clipped = InterestPeriod {
        step_index: period.step_index,
        start_ms: start_ms.max(period.start_ms),
        end_ms: end_ms.min(period.end_ms),
    };
    if clipped.start_ms >= clipped.end_ms {
        return None;
    }
    let (a, b) = period_sample_range(samples, &clipped);
    if a >= b {
        return None;
    }
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut pupil = 0.0;
    let mut count = 0.0;
    for s in &samples[a..b] {
        let Some((x, y)) = s.mean_position() else { continue };
        cx += x;
        cy += y;
        pupil += s.mean_pupil().unwrap_or(0.0);
        count += 1.0;
    }
    if count == 0.0 {
        return None;
    }
    Some(FixationSpan {
        start_ms: samples[a].t_ms,
        end_ms: samples[b - 1].t_ms + dt_ms,
        duration_ms: (b - a) as u64 * dt_ms,
        centroid_px: crate::geometry::Point::new(cx / count, cy / count),
        avg_pupil_au: pupil / count,
        step_index: period.step_index,
    })
}

/// Run the full extraction over a session.
pub fn analyze_session(
    recording: &SessionRecording,
    landmarks: &LandmarkSet,
    params: &EventParams,
) -> Result<SessionAnalysis, String> {
    params.microsaccade.validate()?;
    let geometry = &recording.geometry;
    geometry.validate().map_err(|e| format!("{e}"))?;
    let deg = geometry.deg_per_px();
    let dt_ms = geometry.sample_interval_ms();
    let dt_s = dt_ms as f64 / 1000.0;
    let word_rect = params.word_rect.unwrap_or_else(|| default_word_rect(geometry));

    let mut warnings = Vec::new();
    let mut trials = Vec::new();
    let mut rows = Vec::new();

    for trial in &recording.trials {
        let manifest = &trial.manifest;
        let kin = compute_trial_kinematics(&trial.samples, deg, dt_s);

        // AOI maps per step (step 2 = step-1 layout plus the word).
        let maps: Vec<AoiMap> = (1..=3u8)
            .map(|step| build_aoi_map(manifest, landmarks, step, word_rect))
            .collect::<Result<_, _>>()?;

        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut binocular = Vec::new();
        let mut tagged = Vec::new();
        let mut spans: Vec<FixationSpan> = Vec::new();
        for period in &trial.periods {
            if (period.duration_ms() as f64) < params.microsaccade.min_duration_ms {
                warnings.push(format!(
                    "trial {}: STEP {} shorter than the minimum microsaccade duration",
                    manifest.trial_id, period.step_index
                ));
            }
            for (eye, bucket) in [
                (Eye::Left, &mut left),
                (Eye::Right, &mut right),
                (Eye::Binocular, &mut binocular),
            ] {
                let events = detect_microsaccades(
                    &trial.samples,
                    &kin,
                    period,
                    deg,
                    dt_ms,
                    &params.microsaccade,
                    eye,
                );
                tagged.extend(events.iter().map(|e| (period.step_index, *e)));
                bucket.extend(events);
            }
            match &params.imported_fixations {
                Some(imported) => {
                    for (trial_id, start, end) in imported {
                        if *trial_id != manifest.trial_id {
                            continue;
                        }
                        if let Some(span) =
                            span_from_interval(&trial.samples, period, *start, *end, dt_ms)
                        {
                            spans.push(span);
                        }
                    }
                }
                None => {
                    spans.extend(detect_fixations(
                        &trial.samples,
                        period,
                        deg,
                        dt_ms,
                        &params.fixation,
                    ));
                }
            }
        }
        spans.sort_by_key(|s| s.start_ms);
        if spans.is_empty() {
            warnings.push(format!("trial {}: no fixations detected", manifest.trial_id));
        }

        let fixations: Vec<FixationEvent> = spans
            .iter()
            .enumerate()
            .map(|(i, span)| {
                let map = &maps[(span.step_index - 1) as usize];
                let assignment = crate::aoi::assign_fixation(
                    span.centroid_px,
                    map,
                    manifest.target_face_index,
                    params.max_assign_distance_px,
                );
                FixationEvent {
                    start_ms: span.start_ms,
                    end_ms: span.end_ms,
                    duration_ms: span.duration_ms,
                    centroid_px: span.centroid_px,
                    fixation_index_in_trial: i + 1,
                    avg_pupil_au: span.avg_pupil_au,
                    step_index: span.step_index,
                    assignment,
                }
            })
            .collect();

        for fixation in &fixations {
            let fixated_emotion = match fixation.assignment.main {
                MainAoi::Face(i) => Some(manifest.faces[i].emotion),
                _ => None,
            };
            rows.push(FeatureRow::from_fixation(
                fixation,
                fixated_emotion,
                manifest.target_emotion,
                &recording.participant.participant_id,
                manifest.trial_id,
                &left,
                &right,
                &binocular,
            ));
        }

        tagged.sort_by_key(|(step, e)| (*step, e.start_ms, e.eye));
        trials.push(TrialAnalysis {
            record: TrialRecord {
                participant_id: recording.participant.participant_id.clone(),
                manifest: manifest.clone(),
                periods: trial.periods,
                fixations,
            },
            microsaccades: tagged,
        });
    }

    Ok(SessionAnalysis {
        trials,
        rows,
        warnings,
    })
}

/// Flatten the analyzed trials of several sessions into metric records,
/// optionally dropping each session's first `warmup` trials (warmup trials
/// are excluded from aggregate statistics).
pub fn collect_records(sessions: &[SessionAnalysis], warmup: usize) -> Vec<TrialRecord> {
    sessions
        .iter()
        .flat_map(|s| s.trials.iter().skip(warmup).map(|t| t.record.clone()))
        .collect()
}

/// Feature rows of several sessions with the same warmup rule applied.
pub fn collect_rows(sessions: &[SessionAnalysis], warmup: usize) -> Vec<FeatureRow> {
    sessions
        .iter()
        .flat_map(|s| {
            let kept: alloc::collections::BTreeSet<u32> = s
                .trials
                .iter()
                .skip(warmup)
                .map(|t| t.record.manifest.trial_id)
                .collect();
            s.rows.iter().filter(move |r| kept.contains(&r.trial_id)).cloned()
        })
        .collect()
}
