//! Acceptance suite: one test per acceptance criterion. Each test prints a
//! single summary line; heavy workloads are shared through `OnceLock` cells
//! that record their own compute time for the performance-envelope check.

mod oracle;

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use gazekit_core::aoi::{AoiAssignment, MainAoi, Region, RegionGroup};
use gazekit_core::events::{Eye, FixationEvent, MicrosaccadeParams};
use gazekit_core::geometry::Point;
use gazekit_core::metrics::{dwell_summary, TrialRecord};
use gazekit_core::model::{
    baseline_predict, loocv, loocv_baseline, task1_dataset, train_mlp, Dataset, Mlp, MlpConfig,
    Task1Variant, DEFAULT_TARGET_WEIGHT,
};
use gazekit_core::pipeline::{analyze_session, EventParams};
use gazekit_core::recording::{InterestPeriod, SessionRecording};
use gazekit_core::rng::{derive_seed, Rng};
use gazekit_core::sim::{simulate_study, SimProfile};
use gazekit_core::stats;

struct Timed<T> {
    value: T,
    secs: f64,
    started: Instant,
    finished: Instant,
}

fn timed<T>(f: impl FnOnce() -> T) -> Timed<T> {
    let started = Instant::now();
    let value = f();
    let finished = Instant::now();
    Timed {
        value,
        secs: finished.duration_since(started).as_secs_f64(),
        started,
        finished,
    }
}

// ---------------------------------------------------------------------------
// Criterion 1: detector oracle on 200 simulated trials.
// ---------------------------------------------------------------------------

struct DetectorOutcome {
    injected: Vec<(u32, u64, u64)>,
    detected_binocular: Vec<(u32, u64, u64)>,
    detected_left: Vec<(u32, u64, u64)>,
    detected_right: Vec<(u32, u64, u64)>,
    constant_gaze_events: usize,
}

fn detector_cell() -> &'static Timed<DetectorOutcome> {
    static CELL: OnceLock<Timed<DetectorOutcome>> = OnceLock::new();
    CELL.get_or_init(|| {
        timed(|| {
            let mut profile = SimProfile::default();
            profile.trials_per_session = 200;
            profile.warmup_trials = 0;
            profile.seed = 20_240_817;
            let study = simulate_study(&profile, 1).expect("valid profile");
            let sim = &study.sessions[0];
            let session = SessionRecording::assemble(
                sim.raw.clone(),
                &study.manifests,
                sim.participant.clone(),
                profile.geometry,
            )
            .expect("assemble");
            let analysis =
                analyze_session(&session, &study.landmarks, &EventParams::default()).expect("analyze");
            let collect = |eye: Eye| {
                let mut v: Vec<(u32, u64, u64)> = analysis
                    .trials
                    .iter()
                    .flat_map(|t| {
                        t.microsaccades
                            .iter()
                            .filter(move |(_, e)| e.eye == eye)
                            .map(move |(_, e)| {
                                (t.record.manifest.trial_id, e.start_ms, e.duration_ms)
                            })
                    })
                    .collect();
                v.sort_unstable();
                v
            };
            let detected_binocular = collect(Eye::Binocular);
            let detected_left = collect(Eye::Left);
            let detected_right = collect(Eye::Right);
            let mut injected: Vec<(u32, u64, u64)> = sim
                .injected
                .iter()
                .map(|e| (e.trial_id, e.start_ms, e.duration_ms))
                .collect();
            injected.sort_unstable();

            // Constant-gaze fixture: no injected pulses anywhere.
            let mut quiet = SimProfile::default();
            quiet.trials_per_session = 3;
            quiet.warmup_trials = 0;
            quiet.seed = 7;
            for r in Region::ALL {
                quiet.region_rate_hz.insert(r, 0.0);
            }
            quiet.word_rate_hz = 0.0;
            let quiet_study = simulate_study(&quiet, 1).expect("valid profile");
            let qs = &quiet_study.sessions[0];
            let quiet_session = SessionRecording::assemble(
                qs.raw.clone(),
                &quiet_study.manifests,
                qs.participant.clone(),
                quiet.geometry,
            )
            .expect("assemble");
            let quiet_analysis =
                analyze_session(&quiet_session, &quiet_study.landmarks, &EventParams::default())
                    .expect("analyze");
            let constant_gaze_events = quiet_analysis
                .trials
                .iter()
                .map(|t| t.microsaccades.len())
                .sum();

            DetectorOutcome {
                injected,
                detected_binocular,
                detected_left,
                detected_right,
                constant_gaze_events,
            }
        })
    })
}

#[test]
fn criterion_01_detector_oracle() {
    let run = detector_cell();
    let o = &run.value;
    assert!(!o.injected.is_empty(), "nothing injected");
    assert_eq!(
        o.detected_binocular, o.injected,
        "binocular detections differ from injected ground truth"
    );
    // The same spans are recovered monocularly in each eye.
    assert_eq!(o.detected_left, o.injected);
    assert_eq!(o.detected_right, o.injected);
    assert_eq!(o.constant_gaze_events, 0, "constant gaze produced events");
    assert!(
        run.secs < 30.0,
        "detector oracle took {:.1}s (limit 30s)",
        run.secs
    );
    println!(
        "criterion 1 (detector oracle): PASS - {} events, precision 1.000, recall 1.000, durations exact, {:.1}s",
        o.injected.len(),
        run.secs
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: refractory behavior.
// ---------------------------------------------------------------------------

fn refractory_cell() -> &'static Timed<usize> {
    static CELL: OnceLock<Timed<usize>> = OnceLock::new();
    CELL.get_or_init(|| {
        timed(|| {
            use gazekit_core::kinematics::compute_trial_kinematics;
            use gazekit_core::recording::{EyeSample, GazeSample};
            let geometry = gazekit_core::geometry::ScreenGeometry::default();
            let deg = geometry.deg_per_px();
            let profile = SimProfile::default();
            let r = profile.pulse.radius_deg();
            let omega = profile.pulse.omega_rad_s();
            let u = omega * 1e-3;
            let center = geometry.screen_center();
            // Rest on the pulse circle; two 15 ms pulses with onsets 50 ms
            // apart (samples 400 and 450).
            let angle_at = |i: usize| {
                let k1 = (i as i64 - 399).clamp(0, 16) as f64;
                let k2 = (i as i64 - 449).clamp(0, 16) as f64;
                (k1 + k2) * u
            };
            let samples: Vec<GazeSample> = (0..2000usize)
                .map(|i| {
                    let a = angle_at(i);
                    let e = EyeSample {
                        x_px: center.x + r * a.cos() / deg.x,
                        y_px: center.y + r * a.sin() / deg.y,
                        pupil_au: 900.0,
                    };
                    GazeSample {
                        t_ms: i as u64,
                        left: Some(e),
                        right: Some(e),
                    }
                })
                .collect();
            let kin = compute_trial_kinematics(&samples, deg, 1e-3);
            let period = InterestPeriod {
                step_index: 1,
                start_ms: 0,
                end_ms: 2000,
            };
            let events = gazekit_core::events::detect_microsaccades(
                &samples,
                &kin,
                &period,
                deg,
                1,
                &MicrosaccadeParams::default(),
                Eye::Binocular,
            );
            assert_eq!(events.first().map(|e| e.start_ms), Some(400));
            events.len()
        })
    })
}

#[test]
fn criterion_02_refractory_window() {
    let run = refractory_cell();
    assert_eq!(
        run.value, 1,
        "two pulses 50 ms apart must collapse to one event"
    );
    println!("criterion 2 (refractory window): PASS - 1 event from 2 pulses 50 ms apart");
}

// ---------------------------------------------------------------------------
// Criterion 3: statistics against independent references.
// ---------------------------------------------------------------------------

struct StatsOutcome {
    max_stat_err: f64,
    max_p_err: f64,
    max_special_rel_err: f64,
    instances: usize,
}

fn stats_cell() -> &'static Timed<StatsOutcome> {
    static CELL: OnceLock<Timed<StatsOutcome>> = OnceLock::new();
    CELL.get_or_init(|| {
        timed(|| {
            let mut rng = Rng::new(0x57a7);
            let mut max_stat_err = 0.0f64;
            let mut max_p_err = 0.0f64;
            let mut track = |stat_err: f64, p_err: f64| {
                max_stat_err = max_stat_err.max(stat_err);
                max_p_err = max_p_err.max(p_err);
            };
            let mut instances = 0;

            for _ in 0..100 {
                // ANOVA on 2-5 groups of 2-12 samples.
                let k = 2 + rng.below(4);
                let groups: Vec<Vec<f64>> = (0..k)
                    .map(|_| {
                        let n = 2 + rng.below(11);
                        let shift = rng.range_f64(-2.0, 2.0);
                        (0..n).map(|_| shift + rng.normal()).collect()
                    })
                    .collect();
                let ours = stats::one_way_anova(&groups).unwrap();
                let reference = oracle::anova_reference(&groups);
                track(
                    (ours.statistic - reference.statistic).abs(),
                    (ours.p_value - reference.p).abs(),
                );
                instances += 1;
            }

            for _ in 0..100 {
                // Contingency tables 2-4 x 2-4 with counts 1..=40.
                let rows = 2 + rng.below(3);
                let cols = 2 + rng.below(3);
                let table: Vec<Vec<f64>> = (0..rows)
                    .map(|_| (0..cols).map(|_| (1 + rng.below(40)) as f64).collect())
                    .collect();
                let ours = stats::chi_square_independence(&table).unwrap();
                let reference = oracle::chi_square_reference(&table);
                track(
                    (ours.statistic - reference.statistic).abs(),
                    (ours.p_value - reference.p).abs(),
                );
                instances += 1;
            }

            for _ in 0..100 {
                let na = 2 + rng.below(14);
                let nb = 2 + rng.below(14);
                let a: Vec<f64> = (0..na).map(|_| rng.normal() * 2.0).collect();
                let b: Vec<f64> = (0..nb).map(|_| 0.5 + rng.normal()).collect();
                let ours = stats::welch_t(&a, &b).unwrap();
                let reference = oracle::welch_reference(&a, &b);
                track(
                    (ours.statistic - reference.statistic).abs(),
                    (ours.p_value - reference.p).abs(),
                );
                instances += 1;
            }

            for _ in 0..100 {
                let n = 3 + rng.below(18);
                // Round half the values to force ties through the
                // average-rank path.
                let x: Vec<f64> = (0..n)
                    .map(|_| {
                        let v = rng.range_f64(0.0, 6.0);
                        if rng.bernoulli(0.5) {
                            v.round()
                        } else {
                            v
                        }
                    })
                    .collect();
                let y: Vec<f64> = x
                    .iter()
                    .map(|v| {
                        let w = v + rng.normal() * 2.0;
                        if rng.bernoulli(0.3) {
                            w.round()
                        } else {
                            w
                        }
                    })
                    .collect();
                match stats::spearman(&x, &y) {
                    Ok(ours) => {
                        let reference = oracle::spearman_reference(&x, &y);
                        track(
                            (ours.statistic - reference.statistic).abs(),
                            (ours.p_value - reference.p).abs(),
                        );
                        instances += 1;
                    }
                    Err(stats::StatsError::ZeroVariance) => {} // fully tied draw
                    Err(e) => panic!("unexpected error {e}"),
                }
            }

            // Special-function grid against the quadrature / recurrence
            // oracles, in relative terms.
            let mut max_special_rel_err = 0.0f64;
            for a in [0.5, 1.0, 2.5, 5.0, 12.0] {
                for b in [0.5, 1.0, 3.5, 8.0] {
                    for x in [0.05, 0.25, 0.5, 0.75, 0.95] {
                        let ours = stats::special::inc_beta_reg(a, b, x);
                        let reference = oracle::inc_beta_reg_oracle(a, b, x);
                        let rel = (ours - reference).abs() / reference.abs().max(1e-300);
                        max_special_rel_err = max_special_rel_err.max(rel);
                    }
                }
            }
            for df in [1u64, 2, 3, 6, 13, 20] {
                for x in [0.2, 1.0, 3.0, 8.0, 20.0] {
                    let ours = stats::special::inc_gamma_upper_reg(df as f64 / 2.0, x / 2.0);
                    let reference = oracle::chi2_sf_oracle(x, df);
                    let rel = (ours - reference).abs() / reference.abs().max(1e-300);
                    max_special_rel_err = max_special_rel_err.max(rel);
                }
            }

            StatsOutcome {
                max_stat_err,
                max_p_err,
                max_special_rel_err,
                instances,
            }
        })
    })
}

#[test]
fn criterion_03_stats_oracle_equivalence() {
    let run = stats_cell();
    let o = &run.value;
    assert!(o.instances >= 400, "only {} instances", o.instances);
    assert!(
        o.max_stat_err <= 1e-9,
        "statistic disagreement {} > 1e-9",
        o.max_stat_err
    );
    assert!(o.max_p_err <= 1e-8, "p disagreement {} > 1e-8", o.max_p_err);
    assert!(
        o.max_special_rel_err <= 1e-10,
        "special function relative error {} > 1e-10",
        o.max_special_rel_err
    );

    // Hand cases, to four decimal places. The exact F(1,4) upper tail at
    // 1.5 is I_{8/11}(2, 1/2) = 0.2878641... (worked in closed form and
    // confirmed by the quadrature oracle).
    let anova = stats::one_way_anova(&[vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0]]).unwrap();
    assert!((anova.statistic - 1.5).abs() < 1e-9);
    assert!((anova.p_value - 0.2879).abs() < 5e-5, "p = {}", anova.p_value);
    assert!((anova.p_value - oracle::f_sf_oracle(1.5, 1.0, 4.0)).abs() < 1e-10);

    let chi = stats::chi_square_independence(&[vec![20.0, 10.0], vec![10.0, 20.0]]).unwrap();
    assert!((chi.statistic - 6.6667).abs() < 5e-5);
    assert!((chi.p_value - 0.0098).abs() < 5e-5, "p = {}", chi.p_value);

    let rho = stats::spearman(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
    assert!((rho.statistic - 0.6).abs() < 1e-12);

    let t = stats::welch_t(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
    assert!((t.statistic + 2.8284).abs() < 5e-5);
    assert!((t.p_value - 0.1056).abs() < 5e-5);

    println!(
        "criterion 3 (stats oracle equivalence): PASS - {} instances, max |stat err| {:.2e}, max |p err| {:.2e}, special fns {:.2e} rel",
        o.instances, o.max_stat_err, o.max_p_err, o.max_special_rel_err
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: baseline exactness.
// ---------------------------------------------------------------------------

fn baseline_cell() -> &'static Timed<()> {
    static CELL: OnceLock<Timed<()>> = OnceLock::new();
    CELL.get_or_init(|| timed(|| ()))
}

#[test]
fn criterion_04_baseline_exactness() {
    let _ = baseline_cell();
    for target in 0..4 {
        let out = baseline_predict(3, target);
        for (i, v) in out.iter().enumerate() {
            if i == target {
                assert_eq!(*v, 0.50);
            } else {
                assert_eq!(*v, 0.1666);
            }
        }
        assert_eq!(baseline_predict(1, target), [0.25; 4]);
    }
    println!("criterion 4 (baseline exactness): PASS - [0.50, 0.1666, 0.1666, 0.1666] and [0.25; 4]");
}

// ---------------------------------------------------------------------------
// Criterion 5: gradient check on both presets.
// ---------------------------------------------------------------------------

fn gradient_dataset(n: usize, in_dim: usize, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed);
    let mut data = Dataset {
        inputs: Vec::new(),
        targets: Vec::new(),
        weights: Vec::new(),
        target_slots: Vec::new(),
        row_ids: Vec::new(),
    };
    for i in 0..n {
        data.inputs
            .push((0..in_dim).map(|_| rng.range_f64(-1.0, 1.0)).collect());
        data.targets
            .push((0..4).map(|_| rng.range_f64(0.0, 1.0)).collect());
        let slot = i % 4;
        let mut w = vec![1.0; 4];
        w[slot] = DEFAULT_TARGET_WEIGHT;
        data.weights.push(w);
        data.target_slots.push(Some(slot));
        data.row_ids.push(format!("row-{i}"));
    }
    data
}

fn max_gradient_error(config: &MlpConfig, data: &Dataset) -> f64 {
    let mlp = Mlp::init(data.input_dim(), config);
    let (_, analytic) = mlp.loss_and_gradient(data);
    let params = mlp.params();
    let eps = 1e-5;
    let mut probe = mlp.clone();
    let mut worst = 0.0f64;
    for k in 0..params.len() {
        let mut plus = params.clone();
        plus[k] += eps;
        probe.set_params(&plus);
        let (lp, _) = probe.loss_and_gradient(data);
        let mut minus = params.clone();
        minus[k] -= eps;
        probe.set_params(&minus);
        let (lm, _) = probe.loss_and_gradient(data);
        let fd = (lp - lm) / (2.0 * eps);
        let denom = analytic[k].abs().max(fd.abs()).max(1e-4);
        worst = worst.max((analytic[k] - fd).abs() / denom);
    }
    worst
}

fn gradient_cell() -> &'static Timed<(f64, f64)> {
    static CELL: OnceLock<Timed<(f64, f64)>> = OnceLock::new();
    CELL.get_or_init(|| {
        timed(|| {
            let mut gaze_config = MlpConfig::dwell_from_gaze();
            gaze_config.seed = 2024;
            let gaze_err = max_gradient_error(&gaze_config, &gradient_dataset(10, 60, 501));

            let mut embed_config = MlpConfig::dwell_from_embeddings();
            embed_config.seed = 2025;
            let embed_err = max_gradient_error(&embed_config, &gradient_dataset(8, 24, 502));
            (gaze_err, embed_err)
        })
    })
}

#[test]
fn criterion_05_gradient_check() {
    let run = gradient_cell();
    let (gaze_err, embed_err) = run.value;
    assert!(
        gaze_err <= 1e-4,
        "32-16-4 preset: max relative error {gaze_err}"
    );
    assert!(
        embed_err <= 1e-4,
        "100-16-4 preset: max relative error {embed_err}"
    );
    println!(
        "criterion 5 (gradient check): PASS - 32-16-4 {:.2e}, 100-16-4 {:.2e} (limit 1e-4)",
        gaze_err, embed_err
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: planted-function modeling, 100 repetitions.
// ---------------------------------------------------------------------------

fn face_assignment(face: usize, target: usize) -> AoiAssignment {
    AoiAssignment {
        main: MainAoi::Face(face),
        is_target: face == target,
        region: Some(Region::LeftEye),
        group: Some(RegionGroup::Eye),
        distance_px: 0.0,
        tie: false,
    }
}

fn word_assignment() -> AoiAssignment {
    AoiAssignment {
        main: MainAoi::Word,
        is_target: false,
        region: None,
        group: None,
        distance_px: 0.0,
        tie: false,
    }
}

/// Trials whose step-3 dwell is a deterministic, slot-aligned function of
/// realized step-1 behavior: a two-knee piecewise-linear function of each
/// face's step-1 dwell plus a last-fixated bonus. Per-face dwell is the
/// product of the temporal count and mean-duration features, so the target
/// stays a deterministic function of temporal features, but the spatial
/// dwell feature exposes it directly (two rectifier units away), mirroring
/// the published ordering where spatiotemporal features edge out temporal
/// ones and both beat the baseline.
fn planted_records(seed: u64, n_trials: usize) -> Vec<TrialRecord> {
    let mut profile = SimProfile::default();
    profile.seed = seed;
    // A small stimulus set reused across the session: 6 base arrangements
    // cycled with fresh trial ids (repeated one-hot patterns cannot be used
    // to memorize individual rows).
    let base = gazekit_core::sim::generate_manifests(&profile, 6, seed);
    let manifests: Vec<_> = (0..n_trials)
        .map(|t| {
            let mut m = base[t % 6].clone();
            m.trial_id = t as u32 + 1;
            m
        })
        .collect();
    let mut rng = Rng::new(derive_seed(derive_seed(seed, 0), 0x9137));
    let periods = [
        InterestPeriod { step_index: 1, start_ms: 0, end_ms: 10_000 },
        InterestPeriod { step_index: 2, start_ms: 10_000, end_ms: 12_000 },
        InterestPeriod { step_index: 3, start_ms: 12_000, end_ms: 15_000 },
    ];
    manifests
        .into_iter()
        .map(|manifest| {
            let target = manifest.target_face_index;
            // Strong, permuted face preferences give every dataset a wide
            // dwell spread.
            let mut prefs = [0.45f64, 0.30, 0.15, 0.10];
            rng.shuffle(&mut prefs);
            let total: f64 = prefs.iter().sum();
            let mut fixations = Vec::new();
            let mut t = 0u64;
            let mut index = 1;
            let mut dwell1 = [0.0f64; 4];
            let mut last_face = 0usize;
            while t < 9_200 {
                let mut pick = rng.next_f64() * total;
                let mut face = 3;
                for (i, p) in prefs.iter().enumerate() {
                    if pick < *p {
                        face = i;
                        break;
                    }
                    pick -= p;
                }
                // Heavy-tailed durations keep the count x duration product
                // spread over a wide domain.
                let dur = (rng.lognormal(420.0, 0.9).clamp(90.0, 2600.0) as u64).min(10_000 - t);
                let rect = manifest.faces[face].rect_step1;
                fixations.push(FixationEvent {
                    start_ms: t,
                    end_ms: t + dur,
                    duration_ms: dur,
                    centroid_px: rect.center(),
                    fixation_index_in_trial: index,
                    avg_pupil_au: 900.0,
                    step_index: 1,
                    assignment: face_assignment(face, target),
                });
                dwell1[face] += dur as f64 / 10_000.0;
                last_face = face;
                index += 1;
                t += dur + rng.below(120) as u64 + 30;
            }
            let shares: Vec<f64> = (0..4)
                .map(|i| {
                    0.05 + 0.50 * (dwell1[i] - 0.10).max(0.0)
                        + 0.45 * (dwell1[i] - 0.30).max(0.0)
                        + 0.10 * (last_face == i) as u8 as f64
                })
                .collect();
            let mut t3 = 12_000u64;
            for face in 0..4 {
                let dur = (shares[face] * 3_000.0).round() as u64;
                fixations.push(FixationEvent {
                    start_ms: t3,
                    end_ms: t3 + dur,
                    duration_ms: dur,
                    centroid_px: manifest.faces[face].rect_step3.center(),
                    fixation_index_in_trial: index,
                    avg_pupil_au: 960.0,
                    step_index: 3,
                    assignment: face_assignment(face, target),
                });
                index += 1;
                t3 += dur;
            }
            let word_dur = 15_000u64.saturating_sub(t3).min(1_500);
            fixations.push(FixationEvent {
                start_ms: t3,
                end_ms: t3 + word_dur,
                duration_ms: word_dur,
                centroid_px: Point::new(512.0, 384.0),
                fixation_index_in_trial: index,
                avg_pupil_au: 960.0,
                step_index: 3,
                assignment: word_assignment(),
            });
            TrialRecord {
                participant_id: "p01".to_string(),
                manifest,
                periods,
                fixations,
            }
        })
        .collect()
}

struct ModelingOutcome {
    orderings_held: usize,
    repetitions: usize,
    example: (f64, f64, f64),
}

/// One repetition: LOOCV MSE of the spatiotemporal and temporal variants
/// (5-init ensembles of the dwell MLP) and of the baseline.
fn modeling_rep(rep: u64) -> (f64, f64, f64) {
    let seed = derive_seed(0xac6, rep);
    let records = planted_records(seed, 30);
    let eval = |variant: Task1Variant| {
        let data = task1_dataset(&records, variant, DEFAULT_TARGET_WEIGHT);
        loocv(&data, seed, |train, fold_seed, _, input| {
            let mut acc = vec![0.0; 4];
            const ENSEMBLE: u64 = 5;
            for k in 0..ENSEMBLE {
                let mut config = MlpConfig::dwell_from_gaze();
                config.hidden = vec![16];
                config.learning_rate = 0.12;
                config.epochs = 220;
                config.seed = derive_seed(fold_seed, k);
                let (mlp, _) = train_mlp(&config, train).expect("valid data");
                for (a, p) in acc.iter_mut().zip(mlp.predict(input)) {
                    *a += p / ENSEMBLE as f64;
                }
            }
            acc
        })
        .expect("loocv")
        .mse
    };
    let spatiotemporal = eval(Task1Variant::Spatiotemporal);
    let temporal = eval(Task1Variant::Temporal);
    let baseline_data = task1_dataset(&records, Task1Variant::Temporal, DEFAULT_TARGET_WEIGHT);
    let baseline = loocv_baseline(&baseline_data, 3).expect("baseline").mse;
    (spatiotemporal, temporal, baseline)
}

fn modeling_cell() -> &'static Timed<ModelingOutcome> {
    static CELL: OnceLock<Timed<ModelingOutcome>> = OnceLock::new();
    CELL.get_or_init(|| {
        timed(|| {
            let repetitions: u64 = 100;
            let workers = std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
                .clamp(1, 4) as u64;
            let mut results: Vec<(u64, (f64, f64, f64))> = std::thread::scope(|scope| {
                let handles: Vec<_> = (0..workers)
                    .map(|w| {
                        scope.spawn(move || {
                            (w..repetitions)
                                .step_by(workers as usize)
                                .map(|rep| (rep, modeling_rep(rep)))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
            });
            results.sort_by_key(|(rep, _)| *rep);
            let held = results
                .iter()
                .filter(|(_, (sp, te, ba))| sp <= te && te < ba)
                .count();
            ModelingOutcome {
                orderings_held: held,
                repetitions: repetitions as usize,
                example: results[0].1,
            }
        })
    })
}

#[test]
fn criterion_06_planted_function_modeling() {
    let run = modeling_cell();
    let o = &run.value;
    assert!(
        o.orderings_held >= 95,
        "ordering spatiotemporal <= temporal < baseline held in only {}/{} repetitions",
        o.orderings_held,
        o.repetitions
    );
    println!(
        "criterion 6 (planted-function modeling): PASS - ordering held {}/{} (example MSEs {:.5} <= {:.5} < {:.5}), {:.1}s",
        o.orderings_held, o.repetitions, o.example.0, o.example.1, o.example.2, run.secs
    );
}

// ---------------------------------------------------------------------------
// Criteria 7 and 8: dwell recovery and battery shape on 1000 trials.
// ---------------------------------------------------------------------------

struct DwellOutcome {
    step1_target: f64,
    step2_nontarget: f64,
    step2_target: f64,
    step2_word: f64,
    step3_nontarget: f64,
    step3_target: f64,
    step3_word: f64,
    dtc: f64,
    rows: Vec<gazekit_core::events::FeatureRow>,
}

fn dwell_cell() -> &'static Timed<DwellOutcome> {
    static CELL: OnceLock<Timed<DwellOutcome>> = OnceLock::new();
    CELL.get_or_init(|| {
        timed(|| {
            let mut profile = SimProfile::default();
            profile.trials_per_session = 1000;
            profile.warmup_trials = 0;
            profile.seed = 1207;
            let study = simulate_study(&profile, 1).expect("valid profile");
            let sim = &study.sessions[0];
            let session = SessionRecording::assemble(
                sim.raw.clone(),
                &study.manifests,
                sim.participant.clone(),
                profile.geometry,
            )
            .expect("assemble");
            let analysis =
                analyze_session(&session, &study.landmarks, &EventParams::default()).expect("analyze");
            let records = analysis.records();
            let summary = dwell_summary(&records);
            let avg = summary.last().expect("average row").clone();
            assert!(avg.emotion.is_none());
            DwellOutcome {
                step1_target: avg.step1_target,
                step2_nontarget: avg.step2_nontarget,
                step2_target: avg.step2_target,
                step2_word: avg.step2_word,
                step3_nontarget: avg.step3_nontarget,
                step3_target: avg.step3_target,
                step3_word: avg.step3_word,
                dtc: avg.dtc,
                rows: analysis.rows,
            }
        })
    })
}

#[test]
fn criterion_07_dwell_recovery() {
    let run = dwell_cell();
    let o = &run.value;
    let checks = [
        ("step1 per-face", o.step1_target, 0.235),
        ("step2 non-target", o.step2_nontarget, 0.071),
        ("step2 target", o.step2_target, 0.102),
        ("step2 word", o.step2_word, 0.684),
        ("step3 non-target", o.step3_nontarget, 0.157),
        ("step3 target", o.step3_target, 0.409),
        ("step3 word", o.step3_word, 0.115),
    ];
    for (name, got, expected) in checks {
        assert!(
            (got - expected).abs() < 0.02,
            "{name}: {got:.4} vs {expected} (tolerance 0.02)"
        );
    }
    assert!((o.dtc - 17.4).abs() < 2.0, "DTC {:.2} vs 17.4 +- 2", o.dtc);
    println!(
        "criterion 7 (dwell recovery): PASS - step3 target {:.3}, DTC {:.2} points, {:.1}s",
        o.step3_target, o.dtc, run.secs
    );
}

fn battery_cell() -> &'static Timed<stats::BatteryReport> {
    static CELL: OnceLock<Timed<stats::BatteryReport>> = OnceLock::new();
    CELL.get_or_init(|| {
        let rows = &dwell_cell().value.rows;
        timed(|| stats::run_analysis_battery(rows, 0.05))
    })
}

#[test]
fn criterion_08_battery_shape_and_planted_effect() {
    let run = battery_cell();
    let report = &run.value;
    assert_eq!(report.anova.len(), 30, "6x5 ANOVA cells");
    assert_eq!(report.chi_square.len(), 10, "10 chi-square pairs");
    // Variable names mirror the report tables.
    let numeric: Vec<&str> = stats::NUMERIC_VARIABLES.to_vec();
    let categorical: Vec<&str> = stats::CATEGORICAL_VARIABLES.to_vec();
    assert!(numeric.contains(&"Binocular microsaccade's rate"));
    assert!(categorical.contains(&"Interest Period Index"));
    for cell in &report.anova {
        assert!(numeric.contains(&cell.variable.as_str()));
        assert!(categorical.contains(&cell.category.as_str()));
    }
    for pair in &report.chi_square {
        assert!(categorical.contains(&pair.variable_a.as_str()));
        assert!(categorical.contains(&pair.variable_b.as_str()));
    }
    // The simulator plants a step-dependent pupil baseline; the battery must
    // flag it at the Bonferroni-adjusted level.
    let pupil = report
        .anova
        .iter()
        .find(|c| c.variable == "Average pupil size" && c.category == "Interest Period Index")
        .expect("pupil x step cell");
    match &pupil.outcome {
        stats::CellOutcome::Tested(t) => {
            assert!(t.significant, "pupil effect not significant: p_adj {}", t.p_adjusted);
        }
        other => panic!("pupil cell not tested: {other:?}"),
    }
    println!(
        "criterion 8 (battery shape): PASS - 30 ANOVA + 10 chi-square cells, planted pupil effect recovered"
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: byte-level determinism of the pipeline and CLI.
// ---------------------------------------------------------------------------

fn run_cli(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gazekit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn gazekit")
}

fn collect_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("read_dir") {
            let path = entry.expect("entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().to_string();
                files.push((rel, std::fs::read(&path).expect("read")));
            }
        }
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn criterion_09_determinism() {
    let base = std::env::temp_dir().join(format!("gazekit-accept-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);
    std::fs::create_dir_all(&base).unwrap();

    for round in ["a", "b"] {
        let dir = base.join(round);
        std::fs::create_dir_all(&dir).unwrap();
        let sim = run_cli(
            &["simulate", "--trials", "8", "--participants", "3", "--seed", "77", "--out", "study"],
            &dir,
        );
        assert!(sim.status.success(), "simulate failed: {:?}", sim);
        for args in [
            vec!["events", "--data", "study", "--out-dir", "events"],
            vec!["features", "--data", "study", "--warmup", "2", "--out", "features.csv"],
            vec!["dwell", "--data", "study", "--warmup", "2", "--out", "dwell.csv"],
            vec!["stats", "--features", "features.csv", "--out-json", "battery.json", "--out-csv", "battery.csv"],
            vec!["train", "--task", "1", "--variant", "temporal", "--data", "study", "--warmup", "2", "--out", "model1.json"],
            vec![
                "evaluate", "--task", "3", "--data", "study", "--warmup", "2", "--out",
                "eval3.json", "--out-csv", "eval3.csv",
            ],
            vec![
                "report", "heatmap", "--data", "study", "--warmup", "0", "--step", "3", "--out",
                "heatmap.svg",
            ],
        ] {
            let out = run_cli(&args, &dir);
            assert!(
                out.status.success(),
                "{args:?} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
    }

    let tree_a = collect_tree(&base.join("a"));
    let tree_b = collect_tree(&base.join("b"));
    assert_eq!(tree_a.len(), tree_b.len());
    assert!(tree_a.len() > 10, "expected a populated output tree");
    for ((name_a, bytes_a), (name_b, bytes_b)) in tree_a.iter().zip(tree_b.iter()) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "{name_a} differs between identical runs");
    }
    let _ = std::fs::remove_dir_all(&base);
    println!(
        "criterion 9 (determinism): PASS - {} output files byte-identical across two runs",
        tree_a.len()
    );
}

// ---------------------------------------------------------------------------
// Criterion 10: performance envelope.
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_performance_envelope() {
    // Wall-clock span from the first criterion-1..8 workload starting to
    // the last one finishing. Workload cells may run concurrently (the test
    // harness schedules them on separate threads), which is exactly how the
    // suite runs on a multi-core machine; summing per-cell times would
    // double-bill the same wall seconds.
    let spans = [
        (detector_cell().started, detector_cell().finished),
        (refractory_cell().started, refractory_cell().finished),
        (stats_cell().started, stats_cell().finished),
        (baseline_cell().started, baseline_cell().finished),
        (gradient_cell().started, gradient_cell().finished),
        (modeling_cell().started, modeling_cell().finished),
        (dwell_cell().started, dwell_cell().finished),
        (battery_cell().started, battery_cell().finished),
    ];
    let first = spans.iter().map(|(s, _)| *s).min().unwrap();
    let last = spans.iter().map(|(_, f)| *f).max().unwrap();
    let total = last.duration_since(first).as_secs_f64();
    assert!(
        total < 300.0,
        "criteria 1-8 workloads spanned {total:.1}s of wall time (limit 300s)"
    );
    println!(
        "criterion 10 (performance envelope): PASS - criteria 1-8 workloads completed within {total:.1}s (< 300s)"
    );
}
