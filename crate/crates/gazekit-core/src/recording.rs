//! Session recordings: the canonical line format, trial/period segmentation,
//! and participant metadata.
//!
//! A session file is UTF-8 lines. Sample lines carry
//! `<t_ms> <lx> <ly> <lpupil> <rx> <ry> <rpupil>` with `.` for missing eye
//! data; marker lines are `MSG <t_ms> TRIALID <n>` and `MSG <t_ms> STEP <k>`.
//! Blank lines and lines starting with `#` are ignored.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::aoi::TrialManifest;
use crate::geometry::ScreenGeometry;

/// One eye's data at one sample: position in screen pixels and pupil size in
/// arbitrary units.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EyeSample {
    pub x_px: f64,
    pub y_px: f64,
    pub pupil_au: f64,
}

/// One binocular sample. A missing (`None`) eye is invalid at this sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GazeSample {
    pub t_ms: u64,
    pub left: Option<EyeSample>,
    pub right: Option<EyeSample>,
}

impl GazeSample {
    /// Mean position of the valid eyes, if any.
    pub fn mean_position(&self) -> Option<(f64, f64)> {
        match (self.left, self.right) {
            (Some(l), Some(r)) => Some(((l.x_px + r.x_px) / 2.0, (l.y_px + r.y_px) / 2.0)),
            (Some(l), None) => Some((l.x_px, l.y_px)),
            (None, Some(r)) => Some((r.x_px, r.y_px)),
            (None, None) => None,
        }
    }

    /// Mean pupil size of the valid eyes, if any.
    pub fn mean_pupil(&self) -> Option<f64> {
        match (self.left, self.right) {
            (Some(l), Some(r)) => Some((l.pupil_au + r.pupil_au) / 2.0),
            (Some(l), None) => Some(l.pupil_au),
            (None, Some(r)) => Some(r.pupil_au),
            (None, None) => None,
        }
    }
}

/// One of the three protocol phases of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InterestPeriod {
    /// 1 = free viewing, 2 = word presentation, 3 = grounded FER.
    pub step_index: u8,
    pub start_ms: u64,
    pub end_ms: u64,
}

impl InterestPeriod {
    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }

    pub fn contains(&self, t_ms: u64) -> bool {
        t_ms >= self.start_ms && t_ms < self.end_ms
    }
}

/// Nominal step durations in ms: 10 s free viewing, 2 s word, 3 s grounded.
pub const NOMINAL_STEP_MS: [u64; 3] = [10_000, 2_000, 3_000];

/// Participant metadata carried alongside a recording.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParticipantMeta {
    pub participant_id: String,
    pub age: u32,
    pub drift_error_deg: f64,
    pub education: String,
    /// Reading-the-Mind-in-the-Eyes score, when the participant took the test.
    pub eyes_test_score: Option<f64>,
}

impl ParticipantMeta {
    pub fn validate(&self) -> Result<(), String> {
        if self.drift_error_deg < 0.0 {
            return Err(format!(
                "participant {}: drift error must be >= 0",
                self.participant_id
            ));
        }
        Ok(())
    }
}

/// Samples and interest periods of one trial, before manifests are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrial {
    pub trial_id: u32,
    pub periods: [InterestPeriod; 3],
    /// All samples from the TRIALID marker to the next trial (or EOF), in
    /// time order. Samples before STEP 1 (the fixation cross) belong to no
    /// interest period.
    pub samples: Vec<GazeSample>,
}

impl RawTrial {
    /// Index range (into `samples`) covered by the given period.
    pub fn period_sample_range(&self, period: &InterestPeriod) -> (usize, usize) {
        period_sample_range(&self.samples, period)
    }
}

/// Index range of the samples (sorted by time) falling inside a period.
pub fn period_sample_range(samples: &[GazeSample], period: &InterestPeriod) -> (usize, usize) {
    let start = samples.partition_point(|s| s.t_ms < period.start_ms);
    let end = samples.partition_point(|s| s.t_ms < period.end_ms);
    (start, end)
}

/// A parsed session stream: trials plus any samples recorded before the first
/// trial marker. Nothing from the input is dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawSession {
    pub preamble: Vec<GazeSample>,
    pub trials: Vec<RawTrial>,
}

/// A trial paired with its stimulus manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub manifest: TrialManifest,
    pub periods: [InterestPeriod; 3],
    pub samples: Vec<GazeSample>,
}

/// A full session: who was recorded, on what apparatus, and the per-trial
/// sample streams. Immutable once assembled; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecording {
    pub participant: ParticipantMeta,
    pub geometry: ScreenGeometry,
    pub preamble: Vec<GazeSample>,
    pub trials: Vec<Trial>,
}

impl SessionRecording {
    /// Pair a parsed stream with manifests by trial id.
    pub fn assemble(
        raw: RawSession,
        manifests: &[TrialManifest],
        participant: ParticipantMeta,
        geometry: ScreenGeometry,
    ) -> Result<Self, String> {
        participant.validate()?;
        geometry.validate().map_err(|e| format!("{e}"))?;
        let mut trials = Vec::with_capacity(raw.trials.len());
        for rt in raw.trials {
            let manifest = manifests
                .iter()
                .find(|m| m.trial_id == rt.trial_id)
                .ok_or_else(|| format!("no manifest for trial {}", rt.trial_id))?
                .clone();
            manifest.validate()?;
            trials.push(Trial {
                manifest,
                periods: rt.periods,
                samples: rt.samples,
            });
        }
        Ok(SessionRecording {
            participant,
            geometry,
            preamble: raw.preamble,
            trials,
        })
    }
}

/// Parse failure, carrying the 1-based line number where applicable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    /// A field failed to parse as a number.
    BadField { line: usize, field: &'static str },
    /// Wrong number of whitespace-separated fields on a sample line.
    FieldCount { line: usize, got: usize },
    /// Unrecognized marker or malformed MSG line.
    BadMarker { line: usize, detail: String },
    /// Timestamps must strictly increase.
    NonMonotoneTime { line: usize },
    /// Samples within a trial must be one nominal interval apart.
    IrregularInterval { line: usize, expected_ms: u64 },
    /// Negative pupil on a valid eye.
    NegativePupil { line: usize },
    /// A trial is missing one of its STEP markers.
    MissingStep { trial_id: u32, step: u8 },
    /// STEP markers must appear in order 1, 2, 3, each once.
    UnexpectedStep { line: usize, trial_id: u32, step: u8 },
    /// A period's duration is outside tolerance of its nominal value.
    BadPeriodDuration {
        trial_id: u32,
        step: u8,
        got_ms: u64,
        nominal_ms: u64,
    },
    /// A STEP marker appeared before any TRIALID.
    StepOutsideTrial { line: usize },
    /// A trial ended with no samples in one of its periods.
    EmptyPeriod { trial_id: u32, step: u8 },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::BadField { line, field } => {
                write!(f, "line {line}: field {field} not numeric")
            }
            ParseError::FieldCount { line, got } => {
                write!(f, "line {line}: expected 7 fields, got {got}")
            }
            ParseError::BadMarker { line, detail } => write!(f, "line {line}: {detail}"),
            ParseError::NonMonotoneTime { line } => {
                write!(f, "line {line}: non-monotone timestamp")
            }
            ParseError::IrregularInterval { line, expected_ms } => {
                write!(f, "line {line}: sample interval is not {expected_ms} ms")
            }
            ParseError::NegativePupil { line } => write!(f, "line {line}: negative pupil size"),
            ParseError::MissingStep { trial_id, step } => {
                write!(f, "trial {trial_id}: missing STEP {step} marker")
            }
            ParseError::UnexpectedStep { line, trial_id, step } => {
                write!(f, "line {line}: trial {trial_id}: unexpected STEP {step}")
            }
            ParseError::BadPeriodDuration {
                trial_id,
                step,
                got_ms,
                nominal_ms,
            } => write!(
                f,
                "trial {trial_id}: STEP {step} lasted {got_ms} ms, outside tolerance of nominal {nominal_ms} ms"
            ),
            ParseError::StepOutsideTrial { line } => {
                write!(f, "line {line}: STEP marker outside any trial")
            }
            ParseError::EmptyPeriod { trial_id, step } => {
                write!(f, "trial {trial_id}: STEP {step} contains no samples")
            }
        }
    }
}

/// Parsing knobs. Defaults: nominal 10000/2000/3000 ms steps, 5% duration
/// tolerance.
#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub nominal_step_ms: [u64; 3],
    pub duration_tolerance: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            nominal_step_ms: NOMINAL_STEP_MS,
            duration_tolerance: 0.05,
        }
    }
}

/// Parse a session stream with default options.
pub fn parse_session<'a, I>(lines: I, geometry: &ScreenGeometry) -> Result<RawSession, ParseError>
where
    I: IntoIterator<Item = &'a str>,
{
    parse_session_with(lines, geometry, &ParseOptions::default())
}

struct TrialBuilder {
    trial_id: u32,
    samples: Vec<GazeSample>,
    /// (step, start_ms) of markers seen so far.
    step_starts: Vec<(u8, u64)>,
}

impl TrialBuilder {
    fn finish(
        self,
        interval_ms: u64,
        opts: &ParseOptions,
    ) -> Result<RawTrial, ParseError> {
        for step in 1..=3u8 {
            if !self.step_starts.iter().any(|&(s, _)| s == step) {
                return Err(ParseError::MissingStep {
                    trial_id: self.trial_id,
                    step,
                });
            }
        }
        let end_of_trial = self
            .samples
            .last()
            .map(|s| s.t_ms + interval_ms)
            .unwrap_or_else(|| self.step_starts.last().map(|&(_, t)| t).unwrap_or(0));
        let mut periods = [InterestPeriod {
            step_index: 0,
            start_ms: 0,
            end_ms: 0,
        }; 3];
        for i in 0..3 {
            let (step, start) = self.step_starts[i];
            let end = if i + 1 < 3 {
                self.step_starts[i + 1].1
            } else {
                end_of_trial
            };
            let period = InterestPeriod {
                step_index: step,
                start_ms: start,
                end_ms: end,
            };
            let nominal = opts.nominal_step_ms[i];
            let tol = opts.duration_tolerance * nominal as f64;
            let dur = period.duration_ms() as f64;
            if (dur - nominal as f64).abs() > tol {
                return Err(ParseError::BadPeriodDuration {
                    trial_id: self.trial_id,
                    step,
                    got_ms: period.duration_ms(),
                    nominal_ms: nominal,
                });
            }
            periods[i] = period;
        }
        let trial = RawTrial {
            trial_id: self.trial_id,
            periods,
            samples: self.samples,
        };
        for period in &trial.periods {
            let (a, b) = trial.period_sample_range(period);
            if a == b {
                return Err(ParseError::EmptyPeriod {
                    trial_id: trial.trial_id,
                    step: period.step_index,
                });
            }
        }
        Ok(trial)
    }
}

/// Single-pass streaming parse of the canonical session format.
pub fn parse_session_with<'a, I>(
    lines: I,
    geometry: &ScreenGeometry,
    opts: &ParseOptions,
) -> Result<RawSession, ParseError>
where
    I: IntoIterator<Item = &'a str>,
{
    let interval_ms = geometry.sample_interval_ms();
    let mut session = RawSession::default();
    let mut current: Option<TrialBuilder> = None;
    let mut last_t: Option<u64> = None;
    let mut last_sample_t: Option<u64> = None;

    for (idx, raw_line) in lines.into_iter().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "MSG" {
            let (t, kind) = parse_marker(&fields, line_no)?;
            if let Some(prev) = last_t {
                // Markers may share a timestamp with the following sample but
                // must not go backwards.
                if t < prev {
                    return Err(ParseError::NonMonotoneTime { line: line_no });
                }
            }
            last_t = Some(t);
            match kind {
                Marker::TrialId(id) => {
                    if let Some(builder) = current.take() {
                        session.trials.push(builder.finish(interval_ms, opts)?);
                    }
                    current = Some(TrialBuilder {
                        trial_id: id,
                        samples: Vec::new(),
                        step_starts: Vec::new(),
                    });
                    last_sample_t = None;
                }
                Marker::Step(step) => {
                    let builder = current
                        .as_mut()
                        .ok_or(ParseError::StepOutsideTrial { line: line_no })?;
                    let expected = builder.step_starts.len() as u8 + 1;
                    if step != expected || step > 3 {
                        return Err(ParseError::UnexpectedStep {
                            line: line_no,
                            trial_id: builder.trial_id,
                            step,
                        });
                    }
                    builder.step_starts.push((step, t));
                }
            }
        } else {
            let sample = parse_sample(&fields, line_no)?;
            if let Some(prev) = last_t {
                if sample.t_ms <= prev && last_sample_t == Some(prev) {
                    return Err(ParseError::NonMonotoneTime { line: line_no });
                }
                if sample.t_ms < prev {
                    return Err(ParseError::NonMonotoneTime { line: line_no });
                }
            }
            // Within a trial the stream is contiguous at the nominal rate.
            if current.is_some() {
                if let Some(prev_sample) = last_sample_t {
                    if sample.t_ms - prev_sample != interval_ms {
                        return Err(ParseError::IrregularInterval {
                            line: line_no,
                            expected_ms: interval_ms,
                        });
                    }
                }
            }
            last_t = Some(sample.t_ms);
            last_sample_t = Some(sample.t_ms);
            match current.as_mut() {
                Some(builder) => builder.samples.push(sample),
                None => session.preamble.push(sample),
            }
        }
    }
    if let Some(builder) = current.take() {
        session.trials.push(builder.finish(interval_ms, opts)?);
    }
    Ok(session)
}

enum Marker {
    TrialId(u32),
    Step(u8),
}

fn parse_marker(fields: &[&str], line: usize) -> Result<(u64, Marker), ParseError> {
    if fields.len() != 4 {
        return Err(ParseError::BadMarker {
            line,
            detail: format!("malformed MSG line ({} fields)", fields.len()),
        });
    }
    let t: u64 = fields[1].parse().map_err(|_| ParseError::BadField {
        line,
        field: "t_ms",
    })?;
    match fields[2] {
        "TRIALID" => {
            let id: u32 = fields[3].parse().map_err(|_| ParseError::BadField {
                line,
                field: "trial_id",
            })?;
            Ok((t, Marker::TrialId(id)))
        }
        "STEP" => {
            let step: u8 = fields[3].parse().map_err(|_| ParseError::BadField {
                line,
                field: "step",
            })?;
            Ok((t, Marker::Step(step)))
        }
        other => Err(ParseError::BadMarker {
            line,
            detail: format!("unknown marker {other}"),
        }),
    }
}

fn parse_sample(fields: &[&str], line: usize) -> Result<GazeSample, ParseError> {
    if fields.len() != 7 {
        return Err(ParseError::FieldCount {
            line,
            got: fields.len(),
        });
    }
    let t: u64 = fields[0].parse().map_err(|_| ParseError::BadField {
        line,
        field: "t_ms",
    })?;
    let left = parse_eye(&fields[1..4], line, ["lx", "ly", "lpupil"])?;
    let right = parse_eye(&fields[4..7], line, ["rx", "ry", "rpupil"])?;
    Ok(GazeSample { t_ms: t, left, right })
}

fn parse_eye(
    fields: &[&str],
    line: usize,
    names: [&'static str; 3],
) -> Result<Option<EyeSample>, ParseError> {
    // Any missing field invalidates the whole eye; the canonical writer emits
    // all three as `.`.
    if fields.iter().any(|f| *f == ".") {
        return Ok(None);
    }
    let mut vals = [0.0f64; 3];
    for (i, (field, name)) in fields.iter().zip(names.iter()).enumerate() {
        vals[i] = field.parse().map_err(|_| ParseError::BadField {
            line,
            field: name,
        })?;
    }
    if vals[2] < 0.0 {
        return Err(ParseError::NegativePupil { line });
    }
    Ok(Some(EyeSample {
        x_px: vals[0],
        y_px: vals[1],
        pupil_au: vals[2],
    }))
}

/// Serialize a session back to the canonical line format. Numbers are written
/// with Rust's shortest round-trip float formatting, so
/// `parse(serialize(parse(x)))` reproduces the samples bit-exactly.
pub fn serialize_session(session: &RawSession) -> String {
    let mut out = String::new();
    for s in &session.preamble {
        write_sample(&mut out, s);
    }
    for trial in &session.trials {
        let trial_start = trial
            .samples
            .first()
            .map(|s| s.t_ms)
            .unwrap_or(trial.periods[0].start_ms);
        let _ = writeln!(out, "MSG {} TRIALID {}", trial_start, trial.trial_id);
        let mut next_marker = 0usize;
        for s in &trial.samples {
            while next_marker < 3 && trial.periods[next_marker].start_ms <= s.t_ms {
                let p = &trial.periods[next_marker];
                let _ = writeln!(out, "MSG {} STEP {}", p.start_ms, p.step_index);
                next_marker += 1;
            }
            write_sample(&mut out, s);
        }
        while next_marker < 3 {
            let p = &trial.periods[next_marker];
            let _ = writeln!(out, "MSG {} STEP {}", p.start_ms, p.step_index);
            next_marker += 1;
        }
    }
    out
}

fn write_sample(out: &mut String, s: &GazeSample) {
    let _ = write!(out, "{}", s.t_ms);
    for eye in [&s.left, &s.right] {
        match eye {
            Some(e) => {
                let _ = write!(out, " {} {} {}", e.x_px, e.y_px, e.pupil_au);
            }
            None => out.push_str(" . . ."),
        }
    }
    out.push('\n');
}
