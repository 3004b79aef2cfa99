//! The `gazekit` command-line surface.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use gazekit_core::aoi::Emotion;
use gazekit_core::metrics::{dwell_summary, participant_performance};
use gazekit_core::model::{
    loocv, loocv_baseline, task1_dataset, task2_dataset, task3_dataset, train_gbt, train_mlp,
    Dataset, GbtParams, MlpConfig, Task1Variant, DEFAULT_TARGET_WEIGHT, TASK3_LAYOUT,
};
use gazekit_core::pipeline::{analyze_session, collect_records, collect_rows, EventParams, SessionAnalysis};
use gazekit_core::sim::{per_emotion_dwell_preset, simulate_study, SimProfile};
use gazekit_core::stats::run_analysis_battery;

use crate::error::{CliError, Result};
use crate::formats;
use crate::heatmap;
use crate::study::{write_study, InputArgs, LoadedStudy};

#[derive(Parser)]
#[command(
    name = "gazekit",
    about = "Analyze binocular eye-tracking recordings from the three-step face emotion recognition protocol",
    version
)]
pub struct Cli {
    /// Print the schema of a file format and exit (use `--schema list` to
    /// enumerate).
    #[arg(long, value_name = "FORMAT", global = true)]
    pub schema: Option<String>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Parse and validate sessions; print a per-session summary.
    Parse(ParseArgs),
    /// Extract fixations and microsaccades to CSV.
    Events(EventsArgs),
    /// Emit the per-fixation feature table.
    Features(FeaturesArgs),
    /// Emit dwell-time tables and the dwell-time-change score.
    Dwell(DwellArgs),
    /// Run the ANOVA / chi-square battery over a feature table.
    Stats(StatsArgs),
    /// Train a dwell or performance predictor.
    Train(TrainArgs),
    /// Evaluate predictors with leave-one-out cross-validation.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic study with ground truth.
    Simulate(SimulateArgs),
    /// Emit figures.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Args)]
pub struct ParseArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Args)]
pub struct EventsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Detector parameter overrides, JSON.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Output directory for <participant>_events.csv and
    /// <participant>_fixations.csv.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct DwellArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Emit a single step's detail table instead of the full summary.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub step: Option<u8>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct StatsArgs {
    /// Feature table produced by `features`.
    #[arg(long, value_name = "FILE")]
    pub features: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_name = "FILE")]
    pub out_json: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out_csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub task: u8,
    /// Feature variant for task 1: spatial | temporal | spatiotemporal.
    #[arg(long)]
    pub variant: Option<String>,
    /// Which step's dwell to predict in task 2 (1 or 3).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub step: Option<u8>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub task: u8,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub step: Option<u8>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out_csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Simulation profile JSON; defaults to the reference protocol.
    #[arg(long, value_name = "FILE")]
    pub profile: Option<PathBuf>,
    /// Trials per session (overrides the profile).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub participants: usize,
    /// Seed (overrides the profile).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the per-emotion dwell rows instead of the average row.
    #[arg(long)]
    pub per_emotion: bool,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Subcommand)]
pub enum ReportCommand {
    /// Gaussian-KDE fixation heatmap over the screen, SVG.
    Heatmap(HeatmapArgs),
    /// Per-emotion eye/nose/mouth attention proportions, CSV.
    Regions(RegionsArgs),
}

#[derive(Args)]
pub struct RegionsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub step: u8,
    /// Which faces to include: all, target, or nontarget.
    #[arg(long, default_value = "all")]
    pub split: String,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub step: u8,
    /// Restrict to trials with this target emotion.
    #[arg(long)]
    pub emotion: Option<String>,
    /// Kernel bandwidth in pixels.
    #[arg(long, default_value_t = 25.0)]
    pub sigma: f64,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

/// Entry point: returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(name) = cli.schema {
        return print_schema(&name);
    }
    match cli.command {
        None => Err(CliError::usage("no subcommand; try --help")),
        Some(Command::Parse(args)) => cmd_parse(args),
        Some(Command::Events(args)) => cmd_events(args),
        Some(Command::Features(args)) => cmd_features(args),
        Some(Command::Dwell(args)) => cmd_dwell(args),
        Some(Command::Stats(args)) => cmd_stats(args),
        Some(Command::Train(args)) => cmd_train(args),
        Some(Command::Evaluate(args)) => cmd_evaluate(args),
        Some(Command::Simulate(args)) => cmd_simulate(args),
        Some(Command::Report(ReportCommand::Heatmap(args))) => cmd_heatmap(args),
        Some(Command::Report(ReportCommand::Regions(args))) => cmd_regions(args),
    }
}

fn event_params(study: &LoadedStudy, params_path: Option<&PathBuf>) -> Result<EventParams> {
    let mut params = EventParams::default();
    params.word_rect = Some(study.word_rect);
    if let Some(path) = params_path {
        params.microsaccade = formats::parse_detector_json(&formats::read_to_string(path)?)?;
    }
    Ok(params)
}

fn analyze_all(study: &LoadedStudy, params: &EventParams) -> Result<Vec<SessionAnalysis>> {
    let landmarks = InputArgs::require_landmarks(study)?;
    study
        .sessions
        .iter()
        .map(|s| analyze_session(s, landmarks, params).map_err(CliError::Numeric))
        .collect()
}

fn cmd_parse(args: ParseArgs) -> Result<()> {
    let study = args.input.load()?;
    for session in &study.sessions {
        let samples: usize = session.trials.iter().map(|t| t.samples.len()).sum();
        let periods: usize = session.trials.len() * 3;
        println!(
            "session {}: {} trials, {} interest periods, {} samples, {} preamble samples",
            session.participant.participant_id,
            session.trials.len(),
            periods,
            samples,
            session.preamble.len()
        );
    }
    println!("ok: {} session(s) validated", study.sessions.len());
    Ok(())
}

fn cmd_events(args: EventsArgs) -> Result<()> {
    let study = args.input.load()?;
    let params = event_params(&study, args.params.as_ref())?;
    let analyses = analyze_all(&study, &params)?;
    std::fs::create_dir_all(&args.out_dir)?;
    for (session, analysis) in study.sessions.iter().zip(&analyses) {
        let id = &session.participant.participant_id;
        let events: Vec<(u32, u8, gazekit_core::events::Microsaccade)> = analysis
            .trials
            .iter()
            .flat_map(|t| {
                t.microsaccades
                    .iter()
                    .map(move |(step, e)| (t.record.manifest.trial_id, *step, *e))
            })
            .collect();
        let fixations: Vec<(u32, &gazekit_core::events::FixationEvent)> = analysis
            .trials
            .iter()
            .flat_map(|t| {
                t.record
                    .fixations
                    .iter()
                    .map(move |f| (t.record.manifest.trial_id, f))
            })
            .collect();
        std::fs::write(
            args.out_dir.join(format!("{id}_events.csv")),
            formats::events_to_csv(&events),
        )?;
        std::fs::write(
            args.out_dir.join(format!("{id}_fixations.csv")),
            formats::fixations_to_csv(&fixations),
        )?;
        for w in &analysis.warnings {
            eprintln!("warning: {id}: {w}");
        }
    }
    println!("wrote event tables for {} session(s) to {}", analyses.len(), args.out_dir.display());
    Ok(())
}

fn cmd_features(args: FeaturesArgs) -> Result<()> {
    let study = args.input.load()?;
    let params = event_params(&study, args.params.as_ref())?;
    let analyses = analyze_all(&study, &params)?;
    let rows = collect_rows(&analyses, study.warmup);
    std::fs::write(&args.out, formats::features_to_csv(&rows))?;
    println!("wrote {} feature rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_dwell(args: DwellArgs) -> Result<()> {
    let study = args.input.load()?;
    let params = event_params(&study, None)?;
    let analyses = analyze_all(&study, &params)?;
    let records = collect_records(&analyses, study.warmup);
    if records.is_empty() {
        return Err(CliError::numeric("no trials left after the warmup exclusion"));
    }
    let summary = dwell_summary(&records);
    let csv = match args.step {
        Some(step) => formats::dwell_step_to_csv(&summary, step),
        None => formats::dwell_summary_to_csv(&summary),
    };
    std::fs::write(&args.out, csv)?;
    println!("wrote dwell table ({} trials) to {}", records.len(), args.out.display());
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let rows = formats::parse_features_csv(&formats::read_to_string(&args.features)?)?;
    if rows.is_empty() {
        return Err(CliError::numeric("feature table is empty"));
    }
    let report = run_analysis_battery(&rows, args.alpha);
    std::fs::write(
        &args.out_json,
        serde_json::to_string_pretty(&report).expect("battery json"),
    )?;
    if let Some(path) = &args.out_csv {
        std::fs::write(path, formats::battery_to_csv(&report))?;
    }
    let significant = report
        .anova
        .iter()
        .map(|c| &c.outcome)
        .chain(report.chi_square.iter().map(|c| &c.outcome))
        .filter(|o| matches!(o, gazekit_core::stats::CellOutcome::Tested(t) if t.significant))
        .count();
    println!(
        "battery: {} tests performed, {} significant at Bonferroni-adjusted alpha {}",
        report.tests_performed, significant, report.alpha
    );
    Ok(())
}

fn task1_variant(s: Option<&String>) -> Result<Task1Variant> {
    match s {
        None => Ok(Task1Variant::Spatiotemporal),
        Some(v) => Task1Variant::from_str(v)
            .ok_or_else(|| CliError::usage(format!("unknown variant {v:?}"))),
    }
}

/// Build the dataset for the requested task.
fn build_dataset(study: &LoadedStudy, task: u8, variant: Option<&String>, step: Option<u8>) -> Result<(Dataset, String)> {
    let params = event_params(study, None)?;
    let analyses = analyze_all(study, &params)?;
    match task {
        1 => {
            let records = collect_records(&analyses, study.warmup);
            let variant = task1_variant(variant)?;
            let data = task1_dataset(&records, variant, DEFAULT_TARGET_WEIGHT);
            Ok((data, variant.as_str().to_string()))
        }
        2 => {
            let records = collect_records(&analyses, study.warmup);
            let embeddings = study
                .embeddings
                .as_ref()
                .ok_or_else(|| CliError::usage("task 2 needs --embeddings (or embeddings.csv in --data)"))?;
            let step = step.unwrap_or(3);
            if step == 2 {
                return Err(CliError::usage("task 2 predicts step 1 or step 3 dwell"));
            }
            let data = task2_dataset(&records, embeddings, step, DEFAULT_TARGET_WEIGHT)
                .map_err(|e| CliError::schema(e.to_string()))?;
            Ok((data, format!("embeddings-step{step}")))
        }
        3 => {
            let rows = collect_rows(&analyses, study.warmup);
            let records = collect_records(&analyses, study.warmup);
            let scores = participant_performance(&records);
            let data = task3_dataset(&rows, &scores);
            Ok((data, "events".to_string()))
        }
        _ => Err(CliError::usage("task must be 1, 2, or 3")),
    }
}

fn mlp_config_for(task: u8, seed: u64) -> MlpConfig {
    let mut config = if task == 2 {
        MlpConfig::dwell_from_embeddings()
    } else {
        MlpConfig::dwell_from_gaze()
    };
    config.seed = seed;
    config
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let study = args.input.load()?;
    let (data, variant) = build_dataset(&study, args.task, args.variant.as_ref(), args.step)?;
    if data.is_empty() {
        return Err(CliError::numeric("empty training dataset"));
    }
    let model = match args.task {
        1 | 2 => {
            let config = mlp_config_for(args.task, args.seed);
            let (mlp, trace) = train_mlp(&config, &data)
                .map_err(|e| CliError::numeric(e.to_string()))?;
            println!(
                "trained mlp on {} rows: loss {:.6} -> {:.6}",
                data.len(),
                trace.first().unwrap(),
                trace.last().unwrap()
            );
            formats::ModelFile {
                format_version: 1,
                task: args.task,
                variant: Some(variant),
                step: args.step,
                input_dim: data.input_dim(),
                feature_layout: None,
                mlp: Some(mlp),
                gbt: None,
            }
        }
        _ => {
            let targets: Vec<f64> = data.targets.iter().map(|t| t[0]).collect();
            let gbt = train_gbt(&data.inputs, &targets, &GbtParams::default())
                .map_err(|e| CliError::numeric(e.to_string()))?;
            println!(
                "trained boosted trees on {} rows: {} trees",
                data.len(),
                gbt.trees.len()
            );
            formats::ModelFile {
                format_version: 1,
                task: 3,
                variant: Some(variant),
                step: None,
                input_dim: data.input_dim(),
                feature_layout: Some(TASK3_LAYOUT.to_string()),
                mlp: None,
                gbt: Some(gbt),
            }
        }
    };
    std::fs::write(&args.out, formats::model_to_json(&model))?;
    println!("wrote model to {}", args.out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let study = args.input.load()?;
    let (data, variant) = build_dataset(&study, args.task, args.variant.as_ref(), args.step)?;
    let numeric = |e: gazekit_core::model::ModelError| CliError::numeric(e.to_string());
    let (name, report, baseline) = match args.task {
        1 | 2 => {
            let task = args.task;
            let seed = args.seed;
            let report = loocv(&data, seed, |train, fold_seed, _, input| {
                let mut config = mlp_config_for(task, 0);
                config.seed = fold_seed;
                let (mlp, _) = train_mlp(&config, train).expect("validated dataset");
                mlp.predict(input)
            })
            .map_err(numeric)?;
            let step = if task == 2 { args.step.unwrap_or(3) } else { 3 };
            let baseline = loocv_baseline(&data, step).map_err(numeric)?;
            (format!("mlp-{variant}"), report, Some(baseline))
        }
        _ => {
            let report = loocv(&data, args.seed, |train, _, _, input| {
                let targets: Vec<f64> = train.targets.iter().map(|t| t[0]).collect();
                let gbt = train_gbt(&train.inputs, &targets, &GbtParams::default())
                    .expect("validated dataset");
                vec![gbt.predict(input)]
            })
            .map_err(numeric)?;
            ("boosted-trees".to_string(), report, None)
        }
    };

    #[derive(serde::Serialize)]
    struct EvalDoc<'a> {
        task: u8,
        variant: &'a str,
        folds: usize,
        model: &'a gazekit_core::model::EvalReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        baseline: Option<&'a gazekit_core::model::EvalReport>,
    }
    let doc = EvalDoc {
        task: args.task,
        variant: &variant,
        folds: report.folds,
        model: &report,
        baseline: baseline.as_ref(),
    };
    std::fs::write(&args.out, serde_json::to_string_pretty(&doc).expect("eval json"))?;
    if let Some(path) = &args.out_csv {
        let mut entries = vec![(name.clone(), &report)];
        if let Some(b) = &baseline {
            entries.push(("baseline".to_string(), b));
        }
        std::fs::write(path, formats::eval_to_csv(&entries))?;
    }
    match (report.spearman_rho, report.spearman_p) {
        (Some(rho), Some(p)) => println!(
            "{}: loocv mse {:.6} over {} folds, spearman rho {:.4} (p {:.4})",
            name, report.mse, report.folds, rho, p
        ),
        _ => println!(
            "{}: loocv mse {:.6} over {} folds{}",
            name,
            report.mse,
            report.folds,
            baseline
                .as_ref()
                .map(|b| format!(" (baseline {:.6})", b.mse))
                .unwrap_or_default()
        ),
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let mut profile = match &args.profile {
        Some(path) => serde_json::from_str::<SimProfile>(&formats::read_to_string(path)?)
            .map_err(|e| CliError::schema(format!("profile: {e}")))?,
        None => SimProfile::default(),
    };
    if let Some(trials) = args.trials {
        profile.trials_per_session = trials;
    }
    if let Some(seed) = args.seed {
        profile.seed = seed;
    }
    if args.per_emotion {
        profile.per_emotion_dwell = per_emotion_dwell_preset();
    }
    let study = simulate_study(&profile, args.participants).map_err(CliError::Numeric)?;
    write_study(&args.out, &study, &profile)?;
    let events: usize = study.sessions.iter().map(|s| s.injected.len()).sum();
    println!(
        "simulated {} participant(s) x {} trials ({} injected microsaccades) into {}",
        args.participants,
        profile.trials_per_session,
        events,
        args.out.display()
    );
    Ok(())
}

fn cmd_heatmap(args: HeatmapArgs) -> Result<()> {
    let study = args.input.load()?;
    let params = event_params(&study, None)?;
    let analyses = analyze_all(&study, &params)?;
    let emotion = args
        .emotion
        .as_deref()
        .map(|s| {
            Emotion::from_str(s).ok_or_else(|| CliError::usage(format!("unknown emotion {s:?}")))
        })
        .transpose()?;
    let records = collect_records(&analyses, study.warmup);
    let fixations: Vec<&gazekit_core::events::FixationEvent> = records
        .iter()
        .filter(|r| emotion.is_none() || Some(r.manifest.target_emotion) == emotion)
        .flat_map(|r| r.fixations.iter().filter(|f| f.step_index == args.step))
        .collect();
    if fixations.is_empty() {
        return Err(CliError::numeric("no fixations match the filter"));
    }
    // Face outlines: the slot rects of the requested step (the corner slots
    // are shared across trials).
    let mut slots: BTreeSet<(u64, u64)> = BTreeSet::new();
    let mut rects = Vec::new();
    for m in &study.manifests {
        for i in 0..4 {
            let r = m.face_rect(i, args.step);
            if slots.insert((r.x.to_bits(), r.y.to_bits())) {
                rects.push(r);
            }
        }
    }
    let word = (args.step >= 2).then_some(study.word_rect);
    let mut title = format!("fixation heatmap, step {}", args.step);
    if let Some(e) = emotion {
        let _ = write!(title, ", target {}", e.as_str());
    }
    let svg = heatmap::heatmap_svg(&fixations, &study.geometry, args.sigma, &rects, word, &title);
    std::fs::write(&args.out, svg)?;
    println!(
        "wrote heatmap ({} fixations) to {}",
        fixations.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_regions(args: RegionsArgs) -> Result<()> {
    use gazekit_core::metrics::{region_distribution, FaceSplit};
    let study = args.input.load()?;
    let params = event_params(&study, None)?;
    let analyses = analyze_all(&study, &params)?;
    let records = collect_records(&analyses, study.warmup);
    let split = match args.split.as_str() {
        "all" => FaceSplit::All,
        "target" => FaceSplit::Target,
        "nontarget" => FaceSplit::NonTarget,
        other => return Err(CliError::usage(format!("unknown split {other:?}"))),
    };
    let map = region_distribution(&records, args.step, split);
    if map.is_empty() {
        return Err(CliError::numeric("no face-region dwell matches the filter"));
    }
    std::fs::write(&args.out, formats::region_distribution_to_csv(&map))?;
    println!(
        "wrote region distribution ({} emotions) to {}",
        map.len(),
        args.out.display()
    );
    Ok(())
}

fn print_schema(name: &str) -> Result<()> {
    let entries: &[(&str, &str)] = &[
        (
            "session",
            "UTF-8 lines. Sample: `<t_ms> <lx> <ly> <lpupil> <rx> <ry> <rpupil>` with `.` for\n\
             missing eye data (all three fields of an eye). Markers: `MSG <t_ms> TRIALID <n>`\n\
             and `MSG <t_ms> STEP <1|2|3>`. Timestamps are integer ms, strictly increasing;\n\
             samples within a trial are one nominal interval apart. Blank lines and lines\n\
             starting with `#` are ignored.",
        ),
        (
            "manifest",
            "JSON: {\"participant\"?: {...}, \"word_rect\"?: [x,y,w,h], \"warmup_trials\"?: n,\n\
             \"trials\": [{trial_id, round, target_emotion, target_face_index,\n\
             faces: [{face_id, emotion, identity, rect_step1: [x,y,w,h],\n\
             rect_step3: [x,y,w,h]} x4]}]}. A bare JSON array of trials is also accepted.",
        ),
        (
            "landmarks",
            "JSON: {face_id: [[x, y] x 68]} in the standard 68-point convention\n\
             (jaw 0-16, right brow 17-21, left brow 22-26, nose 27-35, right eye 36-41,\n\
             left eye 42-47, mouth 48-67). Coordinates live in a source frame given by\n\
             --landmarks-size (default 500 500).",
        ),
        (
            "embeddings",
            "CSV: header `face_id,v0,...,vN`; one row per face; all rows share one dimension.",
        ),
        (
            "geometry",
            "JSON: {\"resolution_px\": [w, h], \"physical_size_cm\": [w, h],\n\
             \"viewing_distance_cm\": d, \"sampling_rate_hz\": r}.",
        ),
        (
            "params",
            "JSON detector settings: {\"velocity_threshold_deg_s\", \"acc_threshold_deg_s2\",\n\
             \"min_duration_ms\", \"max_duration_ms\", \"amplitude_range_deg\": [lo, hi],\n\
             \"refractory_samples\"}.",
        ),
        (
            "profile",
            "JSON simulation profile; see `SimProfile` in the library docs. All fields have\n\
             defaults; serialize a default profile to start from.",
        ),
        ("events", formats::EVENTS_CSV_HEADER),
        ("fixations", formats::FIXATIONS_CSV_HEADER),
        ("features", formats::FEATURES_CSV_HEADER),
        ("dwell", formats::DWELL_CSV_HEADER),
        ("regions", formats::REGIONS_CSV_HEADER),
        ("battery", formats::BATTERY_CSV_HEADER),
        ("truth", formats::TRUTH_CSV_HEADER),
        (
            "model",
            "JSON: {format_version, task, variant?, step?, input_dim, feature_layout?,\n\
             mlp?: {layers: [{w, b, inputs, outputs}]}, gbt?: {base, learning_rate, trees}}.",
        ),
        (
            "eval",
            "JSON: {task, variant, folds, model: EvalReport, baseline?: EvalReport} where\n\
             EvalReport = {folds, mse, mse_target?, spearman_rho?, spearman_p?, per_fold}.\n\
             CSV: model,folds,mse,mse_target,spearman_rho,spearman_p.",
        ),
        (
            "study",
            "Directory written by `simulate`: geometry.json, manifest.json, landmarks.json,\n\
             embeddings.csv, study.json, sessions/<id>.txt, truth/<id>_events.csv.",
        ),
    ];
    if name == "list" {
        for (n, _) in entries {
            println!("{n}");
        }
        return Ok(());
    }
    match entries.iter().find(|(n, _)| *n == name) {
        Some((n, text)) => {
            println!("{n}:\n{text}");
            Ok(())
        }
        None => Err(CliError::usage(format!(
            "unknown schema {name:?}; use --schema list"
        ))),
    }
}
