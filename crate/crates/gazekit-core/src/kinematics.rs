//! Per-eye velocity and acceleration series derived from gaze positions.
//!
//! Both derivatives use the 5-sample central-difference stencil standard in
//! the microsaccade literature,
//! `v[n] = (p[n+1] + p[n+2] - p[n-1] - p[n-2]) / (6 dt)`,
//! which doubles as the smoothing window the detector's threshold test runs
//! on. Raw two-point differencing would pass sample noise straight through.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::DegPerPx;
use crate::recording::{GazeSample, SessionRecording};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Kinematics of one trial's sample stream, aligned index-for-index with the
/// trial's samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialKinematics {
    /// Per eye, per sample: velocity (deg/s, x/y components).
    pub velocity: [Vec<(f64, f64)>; 2],
    /// Per eye, per sample: acceleration (deg/s^2, x/y components).
    pub acceleration: [Vec<(f64, f64)>; 2],
    /// Per eye, per sample: whether both derivatives are estimable here
    /// (full stencil support of valid samples, away from stream edges).
    pub valid: [Vec<bool>; 2],
}

impl TrialKinematics {
    pub fn speed(&self, eye: usize, n: usize) -> f64 {
        let (vx, vy) = self.velocity[eye][n];
        libm::hypot(vx, vy)
    }

    pub fn accel_mag(&self, eye: usize, n: usize) -> f64 {
        let (ax, ay) = self.acceleration[eye][n];
        libm::hypot(ax, ay)
    }
}

/// Kinematics for a whole recording: one entry per trial, plus any warnings
/// (periods too short to support the stencil).
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicSeries {
    pub trials: Vec<TrialKinematics>,
    pub warnings: Vec<String>,
}

/// Half-width of the derivative stencil.
const HALF_WINDOW: usize = 2;

/// Compute per-eye kinematics for every trial of a recording.
pub fn compute_kinematics(recording: &SessionRecording) -> KinematicSeries {
    let deg = recording.geometry.deg_per_px();
    let dt_s = 1.0 / recording.geometry.sampling_rate_hz;
    let mut trials = Vec::with_capacity(recording.trials.len());
    let mut warnings = Vec::new();
    for trial in &recording.trials {
        let mut k = compute_trial_kinematics(&trial.samples, deg, dt_s);
        for period in &trial.periods {
            let (a, b) = crate::recording::period_sample_range(&trial.samples, period);
            if b - a < 2 * HALF_WINDOW + 1 {
                // A period shorter than the derivative window carries no
                // usable kinematics even if neighboring periods exist.
                for eye in 0..2 {
                    for v in &mut k.valid[eye][a..b] {
                        *v = false;
                    }
                }
                warnings.push(format!(
                    "trial {}: STEP {} too short for the derivative window; all samples invalid",
                    trial.manifest.trial_id, period.step_index
                ));
            }
        }
        trials.push(k);
    }
    KinematicSeries { trials, warnings }
}

/// Kinematics of one contiguous sample stream.
pub fn compute_trial_kinematics(
    samples: &[GazeSample],
    deg: DegPerPx,
    dt_s: f64,
) -> TrialKinematics {
    let n = samples.len();
    let mut velocity = [vec![(0.0, 0.0); n], vec![(0.0, 0.0); n]];
    let mut v_valid = [vec![false; n], vec![false; n]];

    for eye in [LEFT, RIGHT] {
        let pos: Vec<Option<(f64, f64)>> = samples
            .iter()
            .map(|s| {
                let e = if eye == LEFT { s.left } else { s.right };
                e.map(|e| (e.x_px * deg.x, e.y_px * deg.y))
            })
            .collect();
        stencil(&pos, dt_s, &mut velocity[eye], &mut v_valid[eye]);
    }

    // Acceleration: same stencil applied to the velocity series. Velocity
    // samples that are invalid poison their stencil neighborhood.
    let mut acceleration = [vec![(0.0, 0.0); n], vec![(0.0, 0.0); n]];
    let mut a_valid = [vec![false; n], vec![false; n]];
    for eye in [LEFT, RIGHT] {
        let vel_opt: Vec<Option<(f64, f64)>> = velocity[eye]
            .iter()
            .zip(v_valid[eye].iter())
            .map(|(v, ok)| ok.then_some(*v))
            .collect();
        stencil(&vel_opt, dt_s, &mut acceleration[eye], &mut a_valid[eye]);
    }

    TrialKinematics {
        velocity,
        acceleration,
        valid: a_valid,
    }
}

fn stencil(
    series: &[Option<(f64, f64)>],
    dt_s: f64,
    out: &mut [(f64, f64)],
    out_valid: &mut [bool],
) {
    let n = series.len();
    for i in HALF_WINDOW..n.saturating_sub(HALF_WINDOW) {
        let window = [
            series[i - 2],
            series[i - 1],
            series[i],
            series[i + 1],
            series[i + 2],
        ];
        if window.iter().any(|w| w.is_none()) {
            continue;
        }
        let w: Vec<(f64, f64)> = window.into_iter().map(|x| x.unwrap()).collect();
        let dx = (w[3].0 + w[4].0 - w[1].0 - w[0].0) / (6.0 * dt_s);
        let dy = (w[3].1 + w[4].1 - w[1].1 - w[0].1) / (6.0 * dt_s);
        out[i] = (dx, dy);
        out_valid[i] = true;
    }
}
