//! Event extraction: microsaccades by velocity/acceleration thresholding and
//! fixations by dispersion, plus the per-fixation feature rows consumed by
//! the statistical battery.
//!
//! Microsaccade detection scans each interest period sample by sample. A
//! sample qualifies when the smoothed speed exceeds `velocity_threshold` and
//! the smoothed acceleration magnitude exceeds `acc_threshold` (both eyes for
//! binocular events, one eye for monocular ones). A maximal run of
//! qualifying samples becomes an event if its duration lies within
//! [min_duration, max_duration] and its start-to-end displacement falls in
//! the configured amplitude range. Detection then pauses for `refractory`
//! samples; the same counter also skips the first `refractory` samples of
//! every period, mirroring the detector's startup behavior.

use alloc::string::String;
use alloc::vec::Vec;

use crate::aoi::{AoiAssignment, Emotion, Region, RegionGroup};
use crate::geometry::{DegPerPx, Point};
use crate::kinematics::{TrialKinematics, LEFT, RIGHT};
use crate::recording::{GazeSample, InterestPeriod};

/// Which eye(s) an event was detected in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Eye {
    Left,
    Right,
    Binocular,
}

impl Eye {
    pub fn as_str(&self) -> &'static str {
        match self {
            Eye::Left => "left",
            Eye::Right => "right",
            Eye::Binocular => "binocular",
        }
    }
}

/// Detector thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MicrosaccadeParams {
    pub velocity_threshold_deg_s: f64,
    pub acc_threshold_deg_s2: f64,
    pub min_duration_ms: f64,
    pub max_duration_ms: f64,
    /// Inclusive amplitude window in degrees.
    pub amplitude_range_deg: (f64, f64),
    /// Post-acceptance suppression, in samples; also the startup skip at the
    /// head of every period.
    pub refractory_samples: usize,
}

impl Default for MicrosaccadeParams {
    fn default() -> Self {
        MicrosaccadeParams {
            velocity_threshold_deg_s: 15.0,
            acc_threshold_deg_s2: 5000.0,
            min_duration_ms: 10.0,
            max_duration_ms: 100.0,
            amplitude_range_deg: (0.01, 1.0),
            refractory_samples: 100,
        }
    }
}

impl MicrosaccadeParams {
    /// The narrow amplitude preset (events under 0.1 deg only). The default
    /// window tops out at 1.0 deg, the conventional microsaccade ceiling.
    pub fn narrow_amplitude(mut self) -> Self {
        self.amplitude_range_deg = (0.01, 0.1);
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        use alloc::string::ToString;
        if !(self.min_duration_ms > 0.0 && self.min_duration_ms <= self.max_duration_ms) {
            return Err("duration bounds must satisfy 0 < min <= max".to_string());
        }
        if !(self.amplitude_range_deg.0 < self.amplitude_range_deg.1) {
            return Err("amplitude range must satisfy min < max".to_string());
        }
        if !(self.velocity_threshold_deg_s > 0.0 && self.acc_threshold_deg_s2 > 0.0) {
            return Err("thresholds must be positive".to_string());
        }
        Ok(())
    }
}

/// A detected microsaccade.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Microsaccade {
    pub eye: Eye,
    pub start_ms: u64,
    /// Exclusive end: `end_ms - start_ms == duration_ms`.
    pub end_ms: u64,
    pub duration_ms: u64,
    /// Start-to-end displacement in degrees (averaged across eyes for
    /// binocular events).
    pub amplitude_deg: f64,
    pub peak_velocity_deg_s: f64,
}

fn qualifies(kin: &TrialKinematics, n: usize, eye: Eye, params: &MicrosaccadeParams) -> bool {
    let check = |e: usize| {
        kin.valid[e][n]
            && kin.speed(e, n) > params.velocity_threshold_deg_s
            && kin.accel_mag(e, n) > params.acc_threshold_deg_s2
    };
    match eye {
        Eye::Left => check(LEFT),
        Eye::Right => check(RIGHT),
        Eye::Binocular => check(LEFT) && check(RIGHT),
    }
}

fn eye_position_deg(sample: &GazeSample, e: usize, deg: DegPerPx) -> Option<(f64, f64)> {
    let s = if e == LEFT { sample.left } else { sample.right };
    s.map(|s| (s.x_px * deg.x, s.y_px * deg.y))
}

/// Detect microsaccades of one eye class within one interest period.
///
/// `samples` and `kin` cover the whole trial; the scan is restricted to the
/// period's sample range. Returns time-ordered, non-overlapping events.
pub fn detect_microsaccades(
    samples: &[GazeSample],
    kin: &TrialKinematics,
    period: &InterestPeriod,
    deg: DegPerPx,
    dt_ms: u64,
    params: &MicrosaccadeParams,
    eye: Eye,
) -> Vec<Microsaccade> {
    let mut events = Vec::new();
    if (period.duration_ms() as f64) < params.min_duration_ms {
        return events;
    }
    let (i0, i1) = crate::recording::period_sample_range(samples, period);
    let mut skip = params.refractory_samples;
    let mut run_start: Option<usize> = None;

    let mut close_run = |run_start: &mut Option<usize>, end: usize, skip: &mut usize| {
        let Some(s) = run_start.take() else { return };
        let n = end - s + 1;
        let duration = n as u64 * dt_ms;
        if (duration as f64) < params.min_duration_ms
            || (duration as f64) > params.max_duration_ms
        {
            return;
        }
        let eyes: &[usize] = match eye {
            Eye::Left => &[LEFT],
            Eye::Right => &[RIGHT],
            Eye::Binocular => &[LEFT, RIGHT],
        };
        let mut amp_sum = 0.0;
        for &e in eyes {
            // Qualifying samples imply valid kinematics, which implies valid
            // raw positions at the run boundaries.
            let (x0, y0) = eye_position_deg(&samples[s], e, deg).expect("valid run start");
            let (x1, y1) = eye_position_deg(&samples[end], e, deg).expect("valid run end");
            amp_sum += libm::hypot(x1 - x0, y1 - y0);
        }
        let amplitude = amp_sum / eyes.len() as f64;
        if amplitude < params.amplitude_range_deg.0 || amplitude > params.amplitude_range_deg.1 {
            return;
        }
        let mut peak = 0.0f64;
        for m in s..=end {
            let speed = eyes.iter().map(|&e| kin.speed(e, m)).sum::<f64>() / eyes.len() as f64;
            peak = peak.max(speed);
        }
        events.push(Microsaccade {
            eye,
            start_ms: samples[s].t_ms,
            end_ms: samples[s].t_ms + duration,
            duration_ms: duration,
            amplitude_deg: amplitude,
            peak_velocity_deg_s: peak,
        });
        *skip = params.refractory_samples;
    };

    for n in i0..i1 {
        if skip > 0 {
            skip -= 1;
            run_start = None;
            continue;
        }
        if qualifies(kin, n, eye, params) {
            if run_start.is_none() {
                run_start = Some(n);
            }
        } else {
            close_run(&mut run_start, n.saturating_sub(1), &mut skip);
        }
    }
    if run_start.is_some() {
        close_run(&mut run_start, i1 - 1, &mut skip);
    }
    events
}

/// Detect all three eye classes for one period, merged in time order
/// (ties ordered left, right, binocular).
pub fn detect_all_microsaccades(
    samples: &[GazeSample],
    kin: &TrialKinematics,
    period: &InterestPeriod,
    deg: DegPerPx,
    dt_ms: u64,
    params: &MicrosaccadeParams,
) -> Vec<Microsaccade> {
    let mut all = Vec::new();
    for eye in [Eye::Left, Eye::Right, Eye::Binocular] {
        all.extend(detect_microsaccades(samples, kin, period, deg, dt_ms, params, eye));
    }
    all.sort_by_key(|m| (m.start_ms, m.eye));
    all
}

/// Dispersion-threshold (I-DT) fixation detector settings: 1 deg maximum
/// dispersion, 60 ms minimum duration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixationParams {
    pub max_dispersion_deg: f64,
    pub min_duration_ms: u64,
}

impl Default for FixationParams {
    fn default() -> Self {
        FixationParams {
            max_dispersion_deg: 1.0,
            min_duration_ms: 60,
        }
    }
}

/// A detected fixation span, before AOI assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixationSpan {
    pub start_ms: u64,
    pub end_ms: u64,
    pub duration_ms: u64,
    pub centroid_px: Point,
    pub avg_pupil_au: f64,
    pub step_index: u8,
}

/// I-DT over the mean-eye position stream of one period. Invalid samples
/// (neither eye tracked) split fixations; dispersion is the sum of the x and
/// y extents of the window.
pub fn detect_fixations(
    samples: &[GazeSample],
    period: &InterestPeriod,
    deg: DegPerPx,
    dt_ms: u64,
    params: &FixationParams,
) -> Vec<FixationSpan> {
    let (i0, i1) = crate::recording::period_sample_range(samples, period);
    let pos: Vec<Option<(f64, f64)>> = samples[i0..i1]
        .iter()
        .map(|s| s.mean_position())
        .collect();
    let n = pos.len();
    let threshold_px = params.max_dispersion_deg / deg.mean();
    let min_samples = (params.min_duration_ms / dt_ms).max(1) as usize;

    let mut spans = Vec::new();
    let mut i = 0usize;
    'outer: while i + min_samples <= n {
        // The seed window must be fully valid.
        for k in i..i + min_samples {
            if pos[k].is_none() {
                i = k + 1;
                continue 'outer;
            }
        }
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        let extend = |p: (f64, f64), min_x: &mut f64, max_x: &mut f64, min_y: &mut f64, max_y: &mut f64| {
            *min_x = min_x.min(p.0);
            *max_x = max_x.max(p.0);
            *min_y = min_y.min(p.1);
            *max_y = max_y.max(p.1);
        };
        for k in i..i + min_samples {
            extend(pos[k].unwrap(), &mut min_x, &mut max_x, &mut min_y, &mut max_y);
        }
        if (max_x - min_x) + (max_y - min_y) > threshold_px {
            i += 1;
            continue;
        }
        let mut j = i + min_samples;
        while j < n {
            let Some(p) = pos[j] else { break };
            let nx0 = min_x.min(p.0);
            let nx1 = max_x.max(p.0);
            let ny0 = min_y.min(p.1);
            let ny1 = max_y.max(p.1);
            if (nx1 - nx0) + (ny1 - ny0) > threshold_px {
                break;
            }
            min_x = nx0;
            max_x = nx1;
            min_y = ny0;
            max_y = ny1;
            j += 1;
        }
        let count = (j - i) as f64;
        let (mut cx, mut cy, mut pupil) = (0.0, 0.0, 0.0);
        for k in i..j {
            let p = pos[k].unwrap();
            cx += p.0;
            cy += p.1;
            pupil += samples[i0 + k].mean_pupil().unwrap_or(0.0);
        }
        spans.push(FixationSpan {
            start_ms: samples[i0 + i].t_ms,
            end_ms: samples[i0 + j - 1].t_ms + dt_ms,
            duration_ms: (j - i) as u64 * dt_ms,
            centroid_px: Point::new(cx / count, cy / count),
            avg_pupil_au: pupil / count,
            step_index: period.step_index,
        });
        i = j;
    }
    spans
}

/// A fixation enriched with its trial index and AOI assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationEvent {
    pub start_ms: u64,
    pub end_ms: u64,
    pub duration_ms: u64,
    pub centroid_px: Point,
    /// 1-based position of this fixation within its trial, across all three
    /// periods in time order.
    pub fixation_index_in_trial: usize,
    pub avg_pupil_au: f64,
    pub step_index: u8,
    pub assignment: AoiAssignment,
}

/// Per-fixation microsaccade rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateSummary {
    pub binocular_rate_hz: f64,
    pub avg_monocular_rate_hz: f64,
    pub binocular_avg_duration_ms: f64,
}

fn count_within(events: &[Microsaccade], start_ms: u64, end_ms: u64) -> usize {
    // An event counts toward the fixation containing its onset.
    events
        .iter()
        .filter(|m| m.start_ms >= start_ms && m.start_ms < end_ms)
        .count()
}

/// Rates of microsaccades whose onsets fall inside the fixation, normalized
/// by the fixation duration.
pub fn microsaccade_rates(
    fixation_start_ms: u64,
    fixation_end_ms: u64,
    left: &[Microsaccade],
    right: &[Microsaccade],
    binocular: &[Microsaccade],
) -> RateSummary {
    let duration_s = (fixation_end_ms - fixation_start_ms) as f64 / 1000.0;
    debug_assert!(duration_s > 0.0);
    let l = count_within(left, fixation_start_ms, fixation_end_ms);
    let r = count_within(right, fixation_start_ms, fixation_end_ms);
    let inside: Vec<&Microsaccade> = binocular
        .iter()
        .filter(|m| m.start_ms >= fixation_start_ms && m.start_ms < fixation_end_ms)
        .collect();
    let b = inside.len();
    let avg_duration = if b == 0 {
        0.0
    } else {
        inside.iter().map(|m| m.duration_ms as f64).sum::<f64>() / b as f64
    };
    RateSummary {
        binocular_rate_hz: b as f64 / duration_s,
        avg_monocular_rate_hz: ((l + r) as f64 / 2.0) / duration_s,
        binocular_avg_duration_ms: avg_duration,
    }
}

/// One row of the analysis table: the six numeric variables and six
/// categorical labels behind the ANOVA/chi-square battery. Face-specific
/// fields are `None` for word/off-screen fixations and excluded from
/// face-region tests downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub fixation_index_in_trial: usize,
    pub avg_pupil_au: f64,
    pub avg_monocular_ms_rate_hz: f64,
    pub binocular_ms_rate_hz: f64,
    pub binocular_ms_avg_duration_ms: f64,
    pub fixation_duration_ms: f64,
    pub emotion_of_fixated_face: Option<Emotion>,
    pub roi_label: Option<Region>,
    pub target_emotion: Emotion,
    pub face_region: Option<RegionGroup>,
    pub participant_id: String,
    pub interest_period_index: u8,
    pub trial_id: u32,
}

impl FeatureRow {
    /// Build the row for one fixation given the trial's detected events.
    pub fn from_fixation(
        fixation: &FixationEvent,
        fixated_emotion: Option<Emotion>,
        target_emotion: Emotion,
        participant_id: &str,
        trial_id: u32,
        left: &[Microsaccade],
        right: &[Microsaccade],
        binocular: &[Microsaccade],
    ) -> FeatureRow {
        let rates = microsaccade_rates(fixation.start_ms, fixation.end_ms, left, right, binocular);
        FeatureRow {
            fixation_index_in_trial: fixation.fixation_index_in_trial,
            avg_pupil_au: fixation.avg_pupil_au,
            avg_monocular_ms_rate_hz: rates.avg_monocular_rate_hz,
            binocular_ms_rate_hz: rates.binocular_rate_hz,
            binocular_ms_avg_duration_ms: rates.binocular_avg_duration_ms,
            fixation_duration_ms: fixation.duration_ms as f64,
            emotion_of_fixated_face: fixated_emotion,
            roi_label: fixation.assignment.region,
            target_emotion,
            face_region: fixation.assignment.group,
            participant_id: participant_id.into(),
            interest_period_index: fixation.step_index,
            trial_id,
        }
    }
}
