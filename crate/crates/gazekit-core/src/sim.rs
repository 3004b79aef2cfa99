//! Synthetic session generation with exact ground truth.
//!
//! Scanpaths are piecewise-constant fixations joined by instantaneous
//! transitions. Dwell targets are realized in expectation by drawing each
//! fixation's AOI from the configured fractions; the `none` share is
//! realized as short tracking-loss gaps between fixations. Microsaccades are
//! injected as circular-arc pulses: gaze moves along a circle of radius
//! v^2/a around the fixation point at angular rate a/v, so the
//! central-difference speed and acceleration magnitudes are constant inside
//! the pulse (|v| and |a| up to the stencil gain) and the thresholded run is
//! exactly the configured number of samples. Pulse onsets respect the
//! detector's startup skip and refractory window, so every injected event is
//! recoverable one-for-one.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::aoi::{
    synthetic_region_anchors, Emotion, FaceSpec, LandmarkSet, Landmarks68, Region, TrialManifest,
};
use crate::events::MicrosaccadeParams;
use crate::geometry::{Point, Rect, ScreenGeometry};
use crate::model::EmbeddingSet;
use crate::recording::{
    EyeSample, GazeSample, InterestPeriod, ParticipantMeta, RawSession, RawTrial,
    NOMINAL_STEP_MS,
};
use crate::rng::{derive_seed, Rng};

/// Dwell fractions of one step: target face, each non-target face, word.
/// The remainder (1 minus their sum) becomes `none` time.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepDwell {
    pub target: f64,
    pub nontarget_each: f64,
    pub word: f64,
}

impl StepDwell {
    pub fn total(&self) -> f64 {
        self.target + 3.0 * self.nontarget_each + self.word
    }

    pub fn none_share(&self) -> f64 {
        (1.0 - self.total()).max(0.0)
    }
}

/// Microsaccade pulse shape: kinematic magnitudes and the allowed durations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseSpec {
    pub velocity_deg_s: f64,
    pub acceleration_deg_s2: f64,
    /// Durations (ms) drawn uniformly per pulse. Each choice must yield an
    /// amplitude inside the detector's window; multi-turn arcs make some
    /// durations infeasible, which `validate` rejects.
    pub duration_choices_ms: Vec<u64>,
}

impl Default for PulseSpec {
    fn default() -> Self {
        PulseSpec {
            velocity_deg_s: 30.0,
            acceleration_deg_s2: 8000.0,
            duration_choices_ms: alloc::vec![10, 12, 15, 18, 20, 28, 30, 35, 40, 60, 80],
        }
    }
}

impl PulseSpec {
    pub fn omega_rad_s(&self) -> f64 {
        self.acceleration_deg_s2 / self.velocity_deg_s
    }

    pub fn radius_deg(&self) -> f64 {
        self.velocity_deg_s * self.velocity_deg_s / self.acceleration_deg_s2
    }

    /// Analytic start-to-end displacement of a pulse detected over
    /// `duration_ms` samples at 1 kHz: the chord spanned by (D-1) angular
    /// steps.
    pub fn amplitude_deg(&self, duration_ms: u64, dt_s: f64) -> f64 {
        let u = self.omega_rad_s() * dt_s;
        2.0 * self.radius_deg() * libm::fabs(libm::sin((duration_ms as f64 - 1.0) * u / 2.0))
    }
}

/// Simulation profile. Defaults reproduce the reference protocol: 60 trials
/// of 10 s / 2 s / 3 s steps behind a 200 ms fixation cross, the average
/// dwell allocation, ~1 Hz microsaccade pulses, and step-dependent pupil
/// baselines.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimProfile {
    pub geometry: ScreenGeometry,
    /// Dwell targets per step when no per-emotion override applies.
    pub step_dwell: [StepDwell; 3],
    /// Per-target-emotion dwell overrides (e.g. the published per-emotion
    /// rows).
    pub per_emotion_dwell: BTreeMap<Emotion, [StepDwell; 3]>,
    /// Eye/nose/mouth attention weights per viewed-face emotion.
    pub region_group_weights: BTreeMap<Emotion, [f64; 3]>,
    pub fixation_median_ms: f64,
    pub fixation_log_sigma: f64,
    pub pulse: PulseSpec,
    /// Binocular pulse rate when fixating each facial region, Hz.
    pub region_rate_hz: BTreeMap<Region, f64>,
    /// Binocular pulse rate when fixating the word, Hz.
    pub word_rate_hz: f64,
    /// Pupil baseline per step and per-sample noise SD.
    pub pupil_baseline: [f64; 3],
    pub pupil_noise_sd: f64,
    /// SD of the per-participant shift applied to step-3 target dwell
    /// (0 disables participant variation). The shift is mirrored into the
    /// pupil baseline so step-1 features carry a performance signal.
    pub participant_dwell_sd: f64,
    pub trials_per_session: usize,
    /// Leading trials flagged as acclimation; analysis skips them.
    pub warmup_trials: usize,
    pub cross_ms: u64,
    pub word_rect: Rect,
    /// Detector settings the pulses are tuned against.
    pub detector: MicrosaccadeParams,
    pub seed: u64,
}

impl Default for SimProfile {
    fn default() -> Self {
        let geometry = ScreenGeometry::default();
        let word_rect = crate::aoi::default_word_rect(&geometry);
        let mut region_rate_hz = BTreeMap::new();
        for r in Region::ALL {
            region_rate_hz.insert(r, 1.2);
        }
        let mut region_group_weights = BTreeMap::new();
        for e in Emotion::ALL {
            // Overall eye/nose/mouth attention split.
            region_group_weights.insert(e, [0.40, 0.31, 0.29]);
        }
        SimProfile {
            geometry,
            step_dwell: [
                StepDwell { target: 0.235, nontarget_each: 0.235, word: 0.0 },
                StepDwell { target: 0.102, nontarget_each: 0.071, word: 0.684 },
                StepDwell { target: 0.409, nontarget_each: 0.157, word: 0.115 },
            ],
            per_emotion_dwell: BTreeMap::new(),
            region_group_weights,
            fixation_median_ms: 250.0,
            fixation_log_sigma: 0.4,
            pulse: PulseSpec::default(),
            region_rate_hz,
            word_rate_hz: 1.2,
            pupil_baseline: [900.0, 940.0, 960.0],
            pupil_noise_sd: 10.0,
            participant_dwell_sd: 0.0,
            trials_per_session: 60,
            warmup_trials: 6,
            cross_ms: 200,
            word_rect,
            detector: MicrosaccadeParams::default(),
            seed: 0,
        }
    }
}

/// Per-emotion dwell rows of the published summary table. Rows whose
/// fractions sum above 1 (a few step-2/3 rows do, since the published values
/// are marginal means) are rescaled to sum to 1.
pub fn per_emotion_dwell_preset() -> BTreeMap<Emotion, [StepDwell; 3]> {
    let raw: [(Emotion, [f64; 7]); 6] = [
        (Emotion::Angry, [0.238, 0.073, 0.109, 0.686, 0.158, 0.422, 0.119]),
        (Emotion::Disgust, [0.235, 0.077, 0.111, 0.698, 0.149, 0.453, 0.114]),
        (Emotion::Fear, [0.253, 0.075, 0.086, 0.690, 0.178, 0.349, 0.108]),
        (Emotion::Happy, [0.214, 0.067, 0.110, 0.682, 0.144, 0.438, 0.121]),
        (Emotion::Sad, [0.230, 0.062, 0.114, 0.658, 0.148, 0.385, 0.113]),
        (Emotion::Surprise, [0.239, 0.073, 0.084, 0.689, 0.168, 0.409, 0.115]),
    ];
    let normalize = |d: StepDwell| {
        let total = d.total();
        if total > 1.0 {
            StepDwell {
                target: d.target / total,
                nontarget_each: d.nontarget_each / total,
                word: d.word / total,
            }
        } else {
            d
        }
    };
    raw.into_iter()
        .map(|(e, v)| {
            (
                e,
                [
                    normalize(StepDwell { target: v[0], nontarget_each: v[0], word: 0.0 }),
                    normalize(StepDwell { target: v[2], nontarget_each: v[1], word: v[3] }),
                    normalize(StepDwell { target: v[5], nontarget_each: v[4], word: v[6] }),
                ],
            )
        })
        .collect()
}

/// A ground-truth injected microsaccade.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InjectedEvent {
    pub trial_id: u32,
    pub step_index: u8,
    pub start_ms: u64,
    pub duration_ms: u64,
    pub amplitude_deg: f64,
    /// Region of the fixation the pulse was injected into (`None` for word
    /// fixations).
    pub region: Option<Region>,
}

/// One simulated participant's recording plus its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSession {
    pub participant: ParticipantMeta,
    pub raw: RawSession,
    pub injected: Vec<InjectedEvent>,
}

/// A full simulated study: shared stimuli plus per-participant sessions.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyData {
    pub manifests: Vec<TrialManifest>,
    pub landmarks: LandmarkSet,
    pub sessions: Vec<SimulatedSession>,
    pub warmup_trials: usize,
}

impl SimProfile {
    pub fn dwell_for(&self, emotion: Emotion, step: u8) -> StepDwell {
        self.per_emotion_dwell
            .get(&emotion)
            .map(|rows| rows[(step - 1) as usize])
            .unwrap_or(self.step_dwell[(step - 1) as usize])
    }

    /// Check feasibility and that every pulse duration is detected as
    /// configured: a probe pulse is synthesized in isolation and must come
    /// back as exactly one event of the right length and amplitude.
    pub fn validate(&self) -> Result<(), String> {
        self.geometry.validate().map_err(|e| format!("{e}"))?;
        self.detector.validate()?;
        if self.geometry.sample_interval_ms() != 1 {
            return Err("the simulator requires a 1000 Hz geometry".to_string());
        }
        let mut specs: Vec<(String, StepDwell)> = Vec::new();
        for step in 1..=3u8 {
            specs.push((format!("step {step}"), self.step_dwell[(step - 1) as usize]));
            for (e, rows) in &self.per_emotion_dwell {
                specs.push((
                    format!("{} step {step}", e.as_str()),
                    rows[(step - 1) as usize],
                ));
            }
        }
        for (label, d) in specs {
            if d.target < 0.0 || d.nontarget_each < 0.0 || d.word < 0.0 {
                return Err(format!("{label}: negative dwell fraction"));
            }
            if d.total() > 1.0 + 1e-9 {
                return Err(format!(
                    "{label}: dwell fractions sum to {:.4} (> 1)",
                    d.total()
                ));
            }
        }
        for (e, w) in &self.region_group_weights {
            if w.iter().any(|v| *v < 0.0) || w.iter().sum::<f64>() <= 0.0 {
                return Err(format!("{}: bad region weights", e.as_str()));
            }
        }
        if self.region_rate_hz.values().chain([&self.word_rate_hz]).any(|r| *r < 0.0) {
            return Err("negative microsaccade rate".to_string());
        }
        if !(self.fixation_median_ms > 0.0 && self.fixation_log_sigma >= 0.0) {
            return Err("bad fixation duration distribution".to_string());
        }
        if self.pulse.duration_choices_ms.is_empty() {
            return Err("no pulse durations configured".to_string());
        }
        for &d in &self.pulse.duration_choices_ms {
            self.probe_pulse(d)?;
        }
        Ok(())
    }

    /// Synthesize one isolated pulse and require the detector to recover it
    /// exactly.
    fn probe_pulse(&self, duration_ms: u64, ) -> Result<(), String> {
        let deg = self.geometry.deg_per_px();
        let dt_s = 1e-3;
        let amp = self.pulse.amplitude_deg(duration_ms, dt_s);
        let (lo, hi) = self.detector.amplitude_range_deg;
        if amp < lo * 1.2 || amp > hi * 0.9 {
            return Err(format!(
                "pulse duration {duration_ms} ms yields amplitude {amp:.4} deg, too close to the detector window [{lo}, {hi}]"
            ));
        }
        let start = self.detector.refractory_samples + 50;
        let total = start + duration_ms as usize + 200;
        let center = self.geometry.screen_center();
        // Rest positions sit on the pulse circle, exactly as the session
        // generator produces them.
        let theta0 = 0.3;
        let r = self.pulse.radius_deg();
        let rest = |theta: f64| EyeSample {
            x_px: center.x + r * libm::cos(theta) / deg.x,
            y_px: center.y + r * libm::sin(theta) / deg.y,
            pupil_au: 900.0,
        };
        let before = rest(theta0);
        let mut samples: Vec<GazeSample> = (0..total as u64)
            .map(|t| GazeSample { t_ms: t, left: Some(before), right: Some(before) })
            .collect();
        let theta_end = write_pulse(
            &mut samples,
            start,
            duration_ms as usize,
            center,
            theta0,
            &self.pulse,
            deg,
            dt_s,
            0.0,
        );
        let after = rest(theta_end);
        for s in samples.iter_mut().skip(start + duration_ms as usize + 1) {
            s.left = Some(after);
            s.right = Some(after);
        }
        let kin = crate::kinematics::compute_trial_kinematics(&samples, deg, dt_s);
        let period = InterestPeriod { step_index: 1, start_ms: 0, end_ms: total as u64 };
        let events = crate::events::detect_microsaccades(
            &samples,
            &kin,
            &period,
            deg,
            1,
            &self.detector,
            crate::events::Eye::Binocular,
        );
        if events.len() != 1
            || events[0].start_ms != start as u64
            || events[0].duration_ms != duration_ms
        {
            return Err(format!(
                "pulse duration {duration_ms} ms is not recovered as configured (got {events:?})"
            ));
        }
        Ok(())
    }
}

/// Write an arc pulse into `samples[start..start + dur]` around `center`
/// (screen px), starting at angle `theta0`. Returns the angle after the
/// pulse. `disparity_px` shifts the two eyes horizontally by +-
/// that amount.
#[allow(clippy::too_many_arguments)]
fn write_pulse(
    samples: &mut [GazeSample],
    start: usize,
    dur: usize,
    center: Point,
    theta0: f64,
    pulse: &PulseSpec,
    deg: crate::geometry::DegPerPx,
    dt_s: f64,
    disparity_px: f64,
) -> f64 {
    let u = pulse.omega_rad_s() * dt_s;
    let r = pulse.radius_deg();
    // D + 1 angular steps produce a supra-threshold run of exactly D
    // samples (the half-gain edge samples fall below threshold).
    let steps = dur + 1;
    for k in 0..steps {
        let idx = start + k;
        if idx >= samples.len() {
            break;
        }
        let angle = theta0 + (k + 1) as f64 * u;
        let x = center.x + r * libm::cos(angle) / deg.x;
        let y = center.y + r * libm::sin(angle) / deg.y;
        let pupils = (
            samples[idx].left.map(|e| e.pupil_au).unwrap_or(900.0),
            samples[idx].right.map(|e| e.pupil_au).unwrap_or(900.0),
        );
        samples[idx].left = Some(EyeSample { x_px: x - disparity_px, y_px: y, pupil_au: pupils.0 });
        samples[idx].right = Some(EyeSample { x_px: x + disparity_px, y_px: y, pupil_au: pupils.1 });
    }
    theta0 + steps as f64 * u
}

/// Stimulus slots: 200 px faces inset 80 px from each screen corner.
pub fn corner_slots(geometry: &ScreenGeometry) -> [Rect; 4] {
    let w = geometry.resolution_px.0 as f64;
    let h = geometry.resolution_px.1 as f64;
    let s = crate::aoi::FACE_SIZE_PX;
    [
        Rect::new(80.0, 80.0, s, s),
        Rect::new(w - 80.0 - s, 80.0, s, s),
        Rect::new(80.0, h - 80.0 - s, s, s),
        Rect::new(w - 80.0 - s, h - 80.0 - s, s, s),
    ]
}

/// Generate the shared trial manifests: balanced target emotions, shuffled
/// face order, and independently shuffled corner slots for steps 1 and 3.
pub fn generate_manifests(profile: &SimProfile, n_trials: usize, seed: u64) -> Vec<TrialManifest> {
    let slots = corner_slots(&profile.geometry);
    let mut rng = Rng::new(derive_seed(seed, 0xbeef));
    (0..n_trials)
        .map(|t| {
            let target = Emotion::ALL[t % 6];
            let identity = (t / 6) % 2;
            let mut emotions = alloc::vec![
                target,
                Emotion::ALL[(t + 1) % 6],
                Emotion::ALL[(t + 2) % 6],
                Emotion::ALL[(t + 4) % 6],
            ];
            rng.shuffle(&mut emotions);
            let target_face_index = emotions.iter().position(|e| *e == target).unwrap();
            let mut order1 = [0usize, 1, 2, 3];
            let mut order3 = [0usize, 1, 2, 3];
            rng.shuffle(&mut order1);
            rng.shuffle(&mut order3);
            TrialManifest {
                trial_id: t as u32 + 1,
                round: if t < n_trials / 2 { 1 } else { 2 },
                target_emotion: target,
                target_face_index,
                faces: (0..4)
                    .map(|i| FaceSpec {
                        face_id: format!("{}{:02}", emotions[i].as_str(), identity),
                        emotion: emotions[i],
                        identity: format!("id{identity:02}"),
                        rect_step1: slots[order1[i]],
                        rect_step3: slots[order3[i]],
                    })
                    .collect(),
            }
        })
        .collect()
}

/// Synthetic landmarks for every face id used by the manifests.
pub fn landmarks_for_manifests(manifests: &[TrialManifest]) -> LandmarkSet {
    let mut set = LandmarkSet::new();
    for m in manifests {
        for f in &m.faces {
            set.entry(f.face_id.clone())
                .or_insert_with(Landmarks68::synthetic);
        }
    }
    set
}

/// Synthetic embeddings for every face id: the emotion one-hot plus seeded
/// noise, padded to `dim`.
pub fn synthetic_embeddings(manifests: &[TrialManifest], dim: usize, seed: u64) -> EmbeddingSet {
    let mut pairs: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for m in manifests {
        for f in &m.faces {
            if pairs.contains_key(&f.face_id) {
                continue;
            }
            let mut id_seed = derive_seed(seed, f.face_id.bytes().map(|b| b as u64).sum());
            let mut rng = Rng::new(crate::rng::splitmix64(&mut id_seed));
            let mut v = alloc::vec![0.0; dim.max(6)];
            v[f.emotion.index()] = 1.0;
            for slot in v.iter_mut().skip(6) {
                *slot = rng.range_f64(-0.5, 0.5);
            }
            pairs.insert(f.face_id.clone(), v);
        }
    }
    EmbeddingSet::new(pairs.into_iter().collect()).expect("uniform dims by construction")
}

struct TrialPlan {
    aoi_weights: [Vec<(SimAoi, f64)>; 3],
    none_ratio: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SimAoi {
    Face(usize),
    Word,
}

/// Simulate one participant's full session over the shared manifests.
/// Returns the raw recording and the injected ground truth.
pub fn simulate_session(
    profile: &SimProfile,
    manifests: &[TrialManifest],
    participant: &ParticipantMeta,
    session_seed: u64,
) -> (RawSession, Vec<InjectedEvent>) {
    let deg = profile.geometry.deg_per_px();
    let dt_s = 1e-3;
    let mut session_rng = Rng::new(derive_seed(session_seed, 0x5e55));
    // Participant-level bias: shifts step-3 target dwell and, in the
    // opposite direction, the pupil baseline (so step-1 pupil features
    // carry a performance signal).
    let bias = if profile.participant_dwell_sd > 0.0 {
        session_rng.normal() * profile.participant_dwell_sd
    } else {
        0.0
    };
    let pupil_offset = -bias * 400.0;

    let mut trials = Vec::with_capacity(manifests.len());
    let mut injected = Vec::new();
    let mut clock: u64 = 0;

    for (trial_index, manifest) in manifests.iter().enumerate() {
        let mut rng = Rng::new(derive_seed(session_seed, 1000 + trial_index as u64));
        let plan = trial_plan(profile, manifest, bias);

        let cross = profile.cross_ms;
        let total_ms: u64 = cross + NOMINAL_STEP_MS.iter().sum::<u64>();
        let n = total_ms as usize;
        let center = profile.geometry.screen_center();
        let mut samples: Vec<GazeSample> = (0..n as u64)
            .map(|k| {
                let e = EyeSample { x_px: center.x, y_px: center.y, pupil_au: 0.0 };
                GazeSample { t_ms: clock + k, left: Some(e), right: Some(e) }
            })
            .collect();

        let mut periods = [InterestPeriod { step_index: 0, start_ms: 0, end_ms: 0 }; 3];
        let mut offset = cross;
        for step in 1..=3u8 {
            let dur = NOMINAL_STEP_MS[(step - 1) as usize];
            periods[(step - 1) as usize] = InterestPeriod {
                step_index: step,
                start_ms: clock + offset,
                end_ms: clock + offset + dur,
            };
            offset += dur;
        }

        // Pupil per sample: step baseline plus noise, identical in both
        // eyes (the cross uses the step-1 baseline).
        for (k, s) in samples.iter_mut().enumerate() {
            let t = clock + k as u64;
            let step = periods
                .iter()
                .find(|p| p.contains(t))
                .map(|p| p.step_index)
                .unwrap_or(1);
            let pupil = (profile.pupil_baseline[(step - 1) as usize]
                + pupil_offset
                + profile.pupil_noise_sd * rng.normal())
            .max(1.0);
            if let Some(e) = &mut s.left {
                e.pupil_au = pupil;
            }
            if let Some(e) = &mut s.right {
                e.pupil_au = pupil;
            }
        }

        for period in &periods {
            fill_period(
                profile,
                manifest,
                &plan,
                period,
                clock,
                &mut samples,
                &mut rng,
                deg,
                dt_s,
                &mut injected,
            );
        }

        trials.push(RawTrial {
            trial_id: manifest.trial_id,
            periods,
            samples,
        });
        clock += total_ms;
    }

    let _ = participant;
    (
        RawSession { preamble: Vec::new(), trials },
        injected,
    )
}

fn trial_plan(profile: &SimProfile, manifest: &TrialManifest, bias: f64) -> TrialPlan {
    let mut aoi_weights: [Vec<(SimAoi, f64)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut none_ratio = [0.0f64; 3];
    for step in 1..=3u8 {
        let mut d = profile.dwell_for(manifest.target_emotion, step);
        if step == 3 && bias != 0.0 {
            // Shift target dwell, compensating across the non-targets so the
            // step total stays fixed.
            let shifted = (d.target + bias).clamp(0.05, 0.85);
            let delta = shifted - d.target;
            d.target = shifted;
            d.nontarget_each = (d.nontarget_each - delta / 3.0).max(0.01);
        }
        let mut weights = Vec::new();
        for i in 0..4 {
            let w = if i == manifest.target_face_index { d.target } else { d.nontarget_each };
            weights.push((SimAoi::Face(i), w));
        }
        if step >= 2 && d.word > 0.0 {
            weights.push((SimAoi::Word, d.word));
        }
        let covered: f64 = weights.iter().map(|(_, w)| w).sum();
        let none = (1.0 - covered).max(0.0);
        none_ratio[(step - 1) as usize] = if covered > 0.0 { none / covered } else { 0.0 };
        aoi_weights[(step - 1) as usize] = weights;
    }
    TrialPlan { aoi_weights, none_ratio }
}

#[allow(clippy::too_many_arguments)]
fn fill_period(
    profile: &SimProfile,
    manifest: &TrialManifest,
    plan: &TrialPlan,
    period: &InterestPeriod,
    trial_start_ms: u64,
    samples: &mut [GazeSample],
    rng: &mut Rng,
    deg: crate::geometry::DegPerPx,
    dt_s: f64,
    injected: &mut Vec<InjectedEvent>,
) {
    let step = period.step_index;
    let weights = &plan.aoi_weights[(step - 1) as usize];
    let total_weight: f64 = weights.iter().map(|(_, w)| w).sum();
    let none_ratio = plan.none_ratio[(step - 1) as usize];
    let anchors = synthetic_region_anchors();
    let refractory = profile.detector.refractory_samples as u64;

    // Pulse scheduling state, shared across the whole period: the next
    // sample (period-relative) at which an onset is allowed.
    let period_len = period.duration_ms();
    let mut next_allowed: u64 = refractory + 8;

    let mut t = period.start_ms;
    while t < period.end_ms {
        let mut dur = libm::round(
            rng.lognormal(profile.fixation_median_ms, profile.fixation_log_sigma),
        ) as u64;
        dur = dur.clamp(80, 2000).min(period.end_ms - t);
        if dur == 0 {
            break;
        }
        // Pick the fixation's AOI.
        let mut pick = rng.next_f64() * total_weight;
        let mut chosen = weights[0].0;
        for (aoi, w) in weights {
            if pick < *w {
                chosen = *aoi;
                break;
            }
            pick -= w;
        }
        // Fixation point and pulse rate.
        let (point, region, rate) = match chosen {
            SimAoi::Word => (
                profile.word_rect.center(),
                None,
                profile.word_rate_hz,
            ),
            SimAoi::Face(i) => {
                let emotion = manifest.faces[i].emotion;
                let group_w = profile.region_group_weights[&emotion];
                // Group pick, then the fixed within-group split.
                let region = pick_region(rng, group_w);
                let rect = manifest.face_rect(i, step);
                let anchor = anchors
                    .iter()
                    .find(|(r, _)| *r == region)
                    .map(|(_, p)| *p)
                    .unwrap();
                let point = Point::new(
                    rect.x + anchor.x * rect.w / 500.0,
                    rect.y + anchor.y * rect.h / 500.0,
                );
                (point, Some(region), profile.region_rate_hz[&region])
            }
        };

        // Rest position sits on the pulse circle around the fixation point.
        let r = profile.pulse.radius_deg();
        let mut theta = rng.range_f64(0.0, core::f64::consts::TAU);
        let rest = |theta: f64| {
            Point::new(
                point.x + r * libm::cos(theta) / deg.x,
                point.y + r * libm::sin(theta) / deg.y,
            )
        };

        let fix_start_idx = (t - trial_start_ms) as usize;
        let fix_len = dur as usize;
        let p0 = rest(theta);
        for k in 0..fix_len {
            let idx = fix_start_idx + k;
            let pupils = (
                samples[idx].left.map(|e| e.pupil_au).unwrap_or(900.0),
                samples[idx].right.map(|e| e.pupil_au).unwrap_or(900.0),
            );
            samples[idx].left = Some(EyeSample { x_px: p0.x - 1.0, y_px: p0.y, pupil_au: pupils.0 });
            samples[idx].right = Some(EyeSample { x_px: p0.x + 1.0, y_px: p0.y, pupil_au: pupils.1 });
        }

        // Schedule pulses within this fixation.
        if rate > 0.0 {
            let expectation = rate * dur as f64 / 1000.0;
            let mut k = libm::floor(expectation) as u64;
            if rng.bernoulli(expectation - k as f64) {
                k += 1;
            }
            let max_pulse = *profile.pulse.duration_choices_ms.iter().max().unwrap();
            // Onset window inside the fixation and inside the period's
            // detectable region.
            let fix_rel_start = t - period.start_ms;
            let lead = next_allowed.max(fix_rel_start + 20);
            let tail = fix_rel_start + dur;
            let spacing = refractory + max_pulse + 16;
            let mut onset = lead;
            let mut placed = 0;
            while placed < k {
                let pulse_dur =
                    profile.pulse.duration_choices_ms[rng.below(profile.pulse.duration_choices_ms.len())];
                if onset + pulse_dur + 20 > tail || onset + pulse_dur + 8 > period_len {
                    break;
                }
                let start_idx = fix_start_idx + (onset - fix_rel_start) as usize;
                theta = write_pulse(
                    samples,
                    start_idx,
                    pulse_dur as usize,
                    point,
                    theta,
                    &profile.pulse,
                    deg,
                    dt_s,
                    1.0,
                );
                // Rest position moved to the pulse's end angle.
                let p = rest(theta);
                for kk in (onset - fix_rel_start + pulse_dur + 1)..dur {
                    let idx = fix_start_idx + kk as usize;
                    let pupils = (
                        samples[idx].left.map(|e| e.pupil_au).unwrap_or(900.0),
                        samples[idx].right.map(|e| e.pupil_au).unwrap_or(900.0),
                    );
                    samples[idx].left =
                        Some(EyeSample { x_px: p.x - 1.0, y_px: p.y, pupil_au: pupils.0 });
                    samples[idx].right =
                        Some(EyeSample { x_px: p.x + 1.0, y_px: p.y, pupil_au: pupils.1 });
                }
                injected.push(InjectedEvent {
                    trial_id: manifest.trial_id,
                    step_index: step,
                    start_ms: period.start_ms + onset,
                    duration_ms: pulse_dur,
                    amplitude_deg: profile.pulse.amplitude_deg(pulse_dur, dt_s),
                    region,
                });
                next_allowed = onset + pulse_dur + spacing;
                onset = next_allowed;
                placed += 1;
            }
        }

        t += dur;
        // Tracking-loss gap realizing the none share.
        let gap = libm::round(dur as f64 * none_ratio) as u64;
        let gap = gap.min(period.end_ms.saturating_sub(t));
        for k in 0..gap {
            let idx = (t - trial_start_ms + k) as usize;
            samples[idx].left = None;
            samples[idx].right = None;
        }
        t += gap;
    }
}

fn pick_region(rng: &mut Rng, group_weights: [f64; 3]) -> Region {
    let total: f64 = group_weights.iter().sum();
    let mut pick = rng.next_f64() * total;
    let group = if pick < group_weights[0] {
        0
    } else {
        pick -= group_weights[0];
        if pick < group_weights[1] {
            1
        } else {
            2
        }
    };
    match group {
        // Eye group: the two eyes carry most fixations, brows the rest.
        0 => {
            let r = rng.next_f64();
            if r < 0.35 {
                Region::RightEye
            } else if r < 0.70 {
                Region::LeftEye
            } else if r < 0.85 {
                Region::RightEyebrow
            } else {
                Region::LeftEyebrow
            }
        }
        1 => Region::Nose,
        // Mouth group: mostly the mouth itself, occasionally the jaw.
        _ => {
            if rng.next_f64() < 0.8 {
                Region::Mouth
            } else {
                Region::Jaw
            }
        }
    }
}

/// Simulate a full study: shared manifests and landmarks, one session per
/// participant.
pub fn simulate_study(profile: &SimProfile, n_participants: usize) -> Result<StudyData, String> {
    profile.validate()?;
    let manifests = generate_manifests(profile, profile.trials_per_session, profile.seed);
    for m in &manifests {
        m.validate()?;
    }
    let landmarks = landmarks_for_manifests(&manifests);
    let mut meta_rng = Rng::new(derive_seed(profile.seed, 0x3e7a));
    let mut sessions = Vec::with_capacity(n_participants);
    for p in 0..n_participants {
        let participant = ParticipantMeta {
            participant_id: format!("p{:02}", p + 1),
            age: 23 + meta_rng.below(22) as u32,
            drift_error_deg: meta_rng.range_f64(0.01, 1.21),
            education: ["highschool", "bsc", "msc", "phd"][meta_rng.below(4)].to_string(),
            eyes_test_score: None,
        };
        let session_seed = derive_seed(profile.seed, 0x9000 + p as u64);
        let (raw, injected) = simulate_session(profile, &manifests, &participant, session_seed);
        sessions.push(SimulatedSession { participant, raw, injected });
    }
    Ok(StudyData {
        manifests,
        landmarks,
        sessions,
        warmup_trials: profile.warmup_trials,
    })
}
