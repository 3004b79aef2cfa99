//! Shared fixtures for unit tests.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::aoi::{Emotion, FaceSpec, LandmarkSet, Landmarks68, TrialManifest};
use crate::geometry::{Rect, ScreenGeometry};
use crate::recording::{
    EyeSample, GazeSample, InterestPeriod, ParticipantMeta, SessionRecording, Trial,
};

/// The four default corner slots: 80 px inset from each screen corner.
pub fn corner_rects() -> [Rect; 4] {
    [
        Rect::new(80.0, 80.0, 200.0, 200.0),
        Rect::new(744.0, 80.0, 200.0, 200.0),
        Rect::new(80.0, 488.0, 200.0, 200.0),
        Rect::new(744.0, 488.0, 200.0, 200.0),
    ]
}

/// A valid single-trial manifest: target emotion fear on face 1, step 3
/// swaps 0<->1 and 2<->3.
pub fn manifest() -> TrialManifest {
    let rects = corner_rects();
    let emotions = [Emotion::Angry, Emotion::Fear, Emotion::Happy, Emotion::Sad];
    let step3 = [rects[1], rects[0], rects[3], rects[2]];
    TrialManifest {
        trial_id: 1,
        round: 1,
        target_emotion: Emotion::Fear,
        target_face_index: 1,
        faces: (0..4)
            .map(|i| FaceSpec {
                face_id: format!("F{i:02}"),
                emotion: emotions[i],
                identity: format!("id{i:02}"),
                rect_step1: rects[i],
                rect_step3: step3[i],
            })
            .collect(),
    }
}

pub fn landmark_set() -> LandmarkSet {
    let mut set = LandmarkSet::new();
    for i in 0..4 {
        set.insert(format!("F{i:02}"), Landmarks68::synthetic());
    }
    set
}

pub fn participant() -> ParticipantMeta {
    ParticipantMeta {
        participant_id: "p01".to_string(),
        age: 29,
        drift_error_deg: 0.4,
        education: "msc".to_string(),
        eyes_test_score: None,
    }
}

pub fn center_sample(t: u64) -> GazeSample {
    let e = EyeSample {
        x_px: 512.0,
        y_px: 384.0,
        pupil_au: 900.0,
    };
    GazeSample {
        t_ms: t,
        left: Some(e),
        right: Some(e),
    }
}

/// A degenerate session whose three periods each hold `period_samples`
/// constant samples. Period durations ignore the nominal tolerances; this
/// is for exercising window underflow, not the parser.
pub fn tiny_session(period_samples: u64) -> SessionRecording {
    let samples: Vec<GazeSample> = (0..3 * period_samples).map(center_sample).collect();
    let periods = [
        InterestPeriod {
            step_index: 1,
            start_ms: 0,
            end_ms: period_samples,
        },
        InterestPeriod {
            step_index: 2,
            start_ms: period_samples,
            end_ms: 2 * period_samples,
        },
        InterestPeriod {
            step_index: 3,
            start_ms: 2 * period_samples,
            end_ms: 3 * period_samples,
        },
    ];
    SessionRecording {
        participant: participant(),
        geometry: ScreenGeometry::default(),
        preamble: Vec::new(),
        trials: alloc::vec![Trial {
            manifest: manifest(),
            periods,
            samples,
        }],
    }
}
