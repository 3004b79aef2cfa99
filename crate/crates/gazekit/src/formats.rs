//! On-disk formats: manifest/landmark/geometry/profile JSON, embedding and
//! report CSVs, and model files.
//!
//! CSV emitters write a header row and plain comma-separated values (none of
//! the fields contain commas); floats use Rust's shortest round-trip
//! formatting so identical data always serializes identically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use gazekit_core::aoi::{Emotion, FaceSpec, LandmarkSet, Landmarks68, Region, TrialManifest};
use gazekit_core::events::{FeatureRow, FixationEvent, Microsaccade, MicrosaccadeParams};
use gazekit_core::geometry::{Point, Rect, ScreenGeometry};
use gazekit_core::metrics::DwellSummaryRow;
use gazekit_core::model::{EmbeddingSet, EvalReport, Gbt, Mlp};
use gazekit_core::recording::ParticipantMeta;
use gazekit_core::sim::InjectedEvent;
use gazekit_core::stats::{BatteryReport, CellOutcome, Df};

use crate::error::{CliError, Result};

// ---------------------------------------------------------------------------
// Manifest JSON
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct FaceDoc {
    face_id: String,
    emotion: String,
    identity: String,
    rect_step1: [f64; 4],
    rect_step3: [f64; 4],
}

#[derive(Debug, Serialize, Deserialize)]
struct TrialDoc {
    trial_id: u32,
    round: u8,
    target_emotion: String,
    target_face_index: usize,
    faces: Vec<FaceDoc>,
}

/// A session manifest: the trial list plus optional participant metadata and
/// a word-rect override. A bare JSON array of trials is also accepted.
#[derive(Debug, Serialize, Deserialize)]
struct ManifestDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    participant: Option<ParticipantMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    word_rect: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    warmup_trials: Option<usize>,
    trials: Vec<TrialDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ManifestWire {
    Doc(ManifestDoc),
    Bare(Vec<TrialDoc>),
}

/// Everything a manifest file can carry.
#[derive(Debug, Clone)]
pub struct ManifestFile {
    pub trials: Vec<TrialManifest>,
    pub participant: Option<ParticipantMeta>,
    pub word_rect: Option<Rect>,
    pub warmup_trials: Option<usize>,
}

fn emotion_from_str(s: &str, context: &str) -> Result<Emotion> {
    Emotion::from_str(s)
        .ok_or_else(|| CliError::schema(format!("{context}: unknown emotion {s:?}")))
}

fn trial_from_doc(doc: TrialDoc) -> Result<TrialManifest> {
    let context = format!("trial {}", doc.trial_id);
    let manifest = TrialManifest {
        trial_id: doc.trial_id,
        round: doc.round,
        target_emotion: emotion_from_str(&doc.target_emotion, &context)?,
        target_face_index: doc.target_face_index,
        faces: doc
            .faces
            .into_iter()
            .map(|f| {
                Ok(FaceSpec {
                    emotion: emotion_from_str(&f.emotion, &f.face_id)?,
                    face_id: f.face_id,
                    identity: f.identity,
                    rect_step1: Rect::new(f.rect_step1[0], f.rect_step1[1], f.rect_step1[2], f.rect_step1[3]),
                    rect_step3: Rect::new(f.rect_step3[0], f.rect_step3[1], f.rect_step3[2], f.rect_step3[3]),
                })
            })
            .collect::<Result<_>>()?,
    };
    manifest.validate().map_err(CliError::Schema)?;
    Ok(manifest)
}

fn trial_to_doc(m: &TrialManifest) -> TrialDoc {
    TrialDoc {
        trial_id: m.trial_id,
        round: m.round,
        target_emotion: m.target_emotion.as_str().to_string(),
        target_face_index: m.target_face_index,
        faces: m
            .faces
            .iter()
            .map(|f| FaceDoc {
                face_id: f.face_id.clone(),
                emotion: f.emotion.as_str().to_string(),
                identity: f.identity.clone(),
                rect_step1: [f.rect_step1.x, f.rect_step1.y, f.rect_step1.w, f.rect_step1.h],
                rect_step3: [f.rect_step3.x, f.rect_step3.y, f.rect_step3.w, f.rect_step3.h],
            })
            .collect(),
    }
}

pub fn parse_manifest_json(text: &str) -> Result<ManifestFile> {
    let wire: ManifestWire = serde_json::from_str(text)
        .map_err(|e| CliError::schema(format!("manifest: {e}")))?;
    let (docs, participant, word_rect, warmup) = match wire {
        ManifestWire::Doc(d) => (d.trials, d.participant, d.word_rect, d.warmup_trials),
        ManifestWire::Bare(t) => (t, None, None, None),
    };
    Ok(ManifestFile {
        trials: docs.into_iter().map(trial_from_doc).collect::<Result<_>>()?,
        participant,
        word_rect: word_rect.map(|r| Rect::new(r[0], r[1], r[2], r[3])),
        warmup_trials: warmup,
    })
}

pub fn manifest_to_json(
    trials: &[TrialManifest],
    participant: Option<&ParticipantMeta>,
    word_rect: Option<Rect>,
    warmup_trials: Option<usize>,
) -> String {
    let doc = ManifestDoc {
        participant: participant.cloned(),
        word_rect: word_rect.map(|r| [r.x, r.y, r.w, r.h]),
        warmup_trials,
        trials: trials.iter().map(trial_to_doc).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("manifest serialization")
}

// ---------------------------------------------------------------------------
// Landmarks JSON
// ---------------------------------------------------------------------------

/// Parse `{face_id: [[x, y] * 68]}`. Landmark coordinates live in a source
/// frame whose size is not part of the wire format; pass it explicitly
/// (default 500x500).
pub fn parse_landmarks_json(text: &str, source_size: (f64, f64)) -> Result<LandmarkSet> {
    let wire: BTreeMap<String, Vec<[f64; 2]>> =
        serde_json::from_str(text).map_err(|e| CliError::schema(format!("landmarks: {e}")))?;
    let mut set = LandmarkSet::new();
    for (face_id, points) in wire {
        let lm = Landmarks68::new(
            &face_id,
            source_size,
            points.into_iter().map(|p| Point::new(p[0], p[1])).collect(),
        )
        .map_err(CliError::Schema)?;
        set.insert(face_id, lm);
    }
    Ok(set)
}

pub fn landmarks_to_json(set: &LandmarkSet) -> String {
    let wire: BTreeMap<&String, Vec<[f64; 2]>> = set
        .iter()
        .map(|(id, lm)| (id, lm.points.iter().map(|p| [p.x, p.y]).collect()))
        .collect();
    serde_json::to_string_pretty(&wire).expect("landmark serialization")
}

// ---------------------------------------------------------------------------
// Embeddings CSV
// ---------------------------------------------------------------------------

/// Parse `face_id,v0,...,vN` rows under a header. Every row must share one
/// dimension.
pub fn parse_embeddings_csv(text: &str) -> Result<EmbeddingSet> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue; // header
        }
        let mut fields = line.split(',');
        let face_id = fields
            .next()
            .ok_or_else(|| CliError::schema(format!("embeddings line {}: empty", i + 1)))?
            .trim()
            .to_string();
        let values: std::result::Result<Vec<f64>, _> =
            fields.map(|f| f.trim().parse::<f64>()).collect();
        let values = values.map_err(|_| {
            CliError::schema(format!("embeddings line {}: non-numeric value", i + 1))
        })?;
        pairs.push((face_id, values));
    }
    EmbeddingSet::new(pairs).map_err(|e| CliError::schema(format!("embeddings: {e}")))
}

pub fn embeddings_to_csv(set: &EmbeddingSet) -> String {
    let mut out = String::from("face_id");
    for i in 0..set.dim {
        let _ = write!(out, ",v{i}");
    }
    out.push('\n');
    for (face_id, values) in &set.by_face {
        out.push_str(face_id);
        for v in values {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Geometry and detector-parameter JSON
// ---------------------------------------------------------------------------

pub fn parse_geometry_json(text: &str) -> Result<ScreenGeometry> {
    let g: ScreenGeometry =
        serde_json::from_str(text).map_err(|e| CliError::schema(format!("geometry: {e}")))?;
    g.validate()
        .map_err(|e| CliError::schema(format!("geometry: {e}")))?;
    Ok(g)
}

pub fn parse_detector_json(text: &str) -> Result<MicrosaccadeParams> {
    let p: MicrosaccadeParams =
        serde_json::from_str(text).map_err(|e| CliError::schema(format!("params: {e}")))?;
    p.validate()
        .map_err(|e| CliError::schema(format!("params: {e}")))?;
    Ok(p)
}

// ---------------------------------------------------------------------------
// Event, fixation, and feature CSVs
// ---------------------------------------------------------------------------

pub const EVENTS_CSV_HEADER: &str =
    "trial,step,eye,start_ms,end_ms,duration_ms,amplitude_deg,peak_velocity";

pub fn events_to_csv(events: &[(u32, u8, Microsaccade)]) -> String {
    let mut out = String::from(EVENTS_CSV_HEADER);
    out.push('\n');
    for (trial, step, e) in events {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            trial,
            step,
            e.eye.as_str(),
            e.start_ms,
            e.end_ms,
            e.duration_ms,
            e.amplitude_deg,
            e.peak_velocity_deg_s
        );
    }
    out
}

pub const FIXATIONS_CSV_HEADER: &str = "trial,step,index,start_ms,end_ms,duration_ms,centroid_x,centroid_y,avg_pupil,main_aoi,is_target,region,group,distance_px,tie";

pub fn fixations_to_csv(fixations: &[(u32, &FixationEvent)]) -> String {
    use gazekit_core::aoi::MainAoi;
    let mut out = String::from(FIXATIONS_CSV_HEADER);
    out.push('\n');
    for (trial, f) in fixations {
        let main = match f.assignment.main {
            MainAoi::Face(i) => format!("face{i}"),
            MainAoi::Word => "word".to_string(),
            MainAoi::None => "none".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            trial,
            f.step_index,
            f.fixation_index_in_trial,
            f.start_ms,
            f.end_ms,
            f.duration_ms,
            f.centroid_px.x,
            f.centroid_px.y,
            f.avg_pupil_au,
            main,
            f.assignment.is_target,
            f.assignment.region.map(|r| r.as_str()).unwrap_or("none"),
            f.assignment.group.map(|g| g.as_str()).unwrap_or("none"),
            f.assignment.distance_px,
            f.assignment.tie
        );
    }
    out
}

/// Feature CSV header: the analysis-table variable names, verbatim.
pub const FEATURES_CSV_HEADER: &str = "Fixation index in trial,Average pupil size,Average of both eyes microsaccade's rate,Binocular microsaccade's rate,Binocular microsaccade average duration,Fixation duration,Emotions,RoI Label,Target Emotion,Face region,Participant ID,Interest Period Index";

pub fn features_to_csv(rows: &[FeatureRow]) -> String {
    let mut out = String::from(FEATURES_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.fixation_index_in_trial,
            r.avg_pupil_au,
            r.avg_monocular_ms_rate_hz,
            r.binocular_ms_rate_hz,
            r.binocular_ms_avg_duration_ms,
            r.fixation_duration_ms,
            r.emotion_of_fixated_face.map(|e| e.as_str()).unwrap_or("none"),
            r.roi_label.map(|x| x.as_str()).unwrap_or("none"),
            r.target_emotion.as_str(),
            r.face_region.map(|g| g.as_str()).unwrap_or("none"),
            r.participant_id,
            r.interest_period_index
        );
    }
    out
}

pub fn parse_features_csv(text: &str) -> Result<Vec<FeatureRow>> {
    use gazekit_core::aoi::RegionGroup;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::schema("features: empty file"))?;
    if header.trim() != FEATURES_CSV_HEADER {
        return Err(CliError::schema("features: unexpected header row"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(CliError::schema(format!(
                "features line {}: expected 12 fields, got {}",
                i + 2,
                f.len()
            )));
        }
        let num = |k: usize, name: &str| -> Result<f64> {
            f[k].trim()
                .parse()
                .map_err(|_| CliError::schema(format!("features line {}: bad {name}", i + 2)))
        };
        let opt = |s: &str| if s == "none" { None } else { Some(s.to_string()) };
        rows.push(FeatureRow {
            fixation_index_in_trial: num(0, "fixation index")? as usize,
            avg_pupil_au: num(1, "pupil")?,
            avg_monocular_ms_rate_hz: num(2, "monocular rate")?,
            binocular_ms_rate_hz: num(3, "binocular rate")?,
            binocular_ms_avg_duration_ms: num(4, "binocular duration")?,
            fixation_duration_ms: num(5, "fixation duration")?,
            emotion_of_fixated_face: opt(f[6])
                .map(|s| emotion_from_str(&s, "features"))
                .transpose()?,
            roi_label: opt(f[7])
                .map(|s| {
                    Region::from_str(&s)
                        .ok_or_else(|| CliError::schema(format!("features: bad region {s:?}")))
                })
                .transpose()?,
            target_emotion: emotion_from_str(f[8], "features")?,
            face_region: opt(f[9])
                .map(|s| {
                    RegionGroup::from_str(&s)
                        .ok_or_else(|| CliError::schema(format!("features: bad group {s:?}")))
                })
                .transpose()?,
            participant_id: f[10].to_string(),
            interest_period_index: f[11]
                .trim()
                .parse()
                .map_err(|_| CliError::schema(format!("features line {}: bad step", i + 2)))?,
            trial_id: 0,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Dwell summary CSV
// ---------------------------------------------------------------------------

pub const DWELL_CSV_HEADER: &str = "emotion,trials,step1_target,step2_nontarget,step2_target,step2_word,step3_nontarget,step3_target,step3_word,dtc";

pub fn dwell_summary_to_csv(rows: &[DwellSummaryRow]) -> String {
    let mut out = String::from(DWELL_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.emotion.map(|e| e.as_str()).unwrap_or("all"),
            r.trial_count,
            r.step1_target,
            r.step2_nontarget,
            r.step2_target,
            r.step2_word,
            r.step3_nontarget,
            r.step3_target,
            r.step3_word,
            r.dtc
        );
    }
    out
}

/// Single-step dwell detail: per-emotion target/nontarget/word/none columns.
pub fn dwell_step_to_csv(rows: &[DwellSummaryRow], step: u8) -> String {
    let mut out = String::from("emotion,trials,target,nontarget,word,none\n");
    for r in rows {
        let (target, nontarget, word) = match step {
            1 => (r.step1_target, r.step1_target, 0.0),
            2 => (r.step2_target, r.step2_nontarget, r.step2_word),
            _ => (r.step3_target, r.step3_nontarget, r.step3_word),
        };
        let none = (1.0 - target - 3.0 * nontarget - word).max(0.0);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.emotion.map(|e| e.as_str()).unwrap_or("all"),
            r.trial_count,
            target,
            nontarget,
            word,
            none
        );
    }
    out
}

/// Per-emotion region-group proportions (the face-region attention table).
pub const REGIONS_CSV_HEADER: &str = "emotion,eye,nose,mouth";

pub fn region_distribution_to_csv(
    map: &std::collections::BTreeMap<Emotion, [f64; 3]>,
) -> String {
    let mut out = String::from(REGIONS_CSV_HEADER);
    out.push('\n');
    for (emotion, row) in map {
        let _ = writeln!(out, "{},{},{},{}", emotion.as_str(), row[0], row[1], row[2]);
    }
    out
}

// ---------------------------------------------------------------------------
// Battery report CSV (the JSON side is plain serde)
// ---------------------------------------------------------------------------

pub const BATTERY_CSV_HEADER: &str =
    "section,variable,category,statistic,df1,df2,p_value,p_adjusted,significant,status";

pub fn battery_to_csv(report: &BatteryReport) -> String {
    let mut out = String::from(BATTERY_CSV_HEADER);
    out.push('\n');
    let write_cell =
        |out: &mut String, section: &str, a: &str, b: &str, outcome: &CellOutcome| {
            match outcome {
                CellOutcome::Tested(t) => {
                    let (df1, df2) = match t.df {
                        Df::One(d) => (d, f64::NAN),
                        Df::Pair(x, y) => (x, y),
                    };
                    let df2 = if df2.is_nan() { String::new() } else { format!("{df2}") };
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},tested",
                        section, a, b, t.statistic, df1, df2, t.p_value, t.p_adjusted,
                        t.significant
                    );
                }
                CellOutcome::InsufficientLevels => {
                    let _ = writeln!(out, "{section},{a},{b},,,,,,,insufficient levels");
                }
            }
        };
    for cell in &report.anova {
        write_cell(&mut out, "anova", &cell.variable, &cell.category, &cell.outcome);
    }
    for cell in &report.chi_square {
        write_cell(&mut out, "chi_square", &cell.variable_a, &cell.variable_b, &cell.outcome);
    }
    out
}

// ---------------------------------------------------------------------------
// Ground-truth event CSV (simulator output)
// ---------------------------------------------------------------------------

pub const TRUTH_CSV_HEADER: &str =
    "participant,trial,step,start_ms,duration_ms,amplitude_deg,region";

pub fn truth_to_csv(participant_id: &str, events: &[InjectedEvent]) -> String {
    let mut out = String::from(TRUTH_CSV_HEADER);
    out.push('\n');
    for e in events {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            participant_id,
            e.trial_id,
            e.step_index,
            e.start_ms,
            e.duration_ms,
            e.amplitude_deg,
            e.region.map(|r| r.as_str()).unwrap_or("word")
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Model files and evaluation reports
// ---------------------------------------------------------------------------

/// Versioned model container.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub task: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<u8>,
    pub input_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_layout: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mlp: Option<Mlp>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gbt: Option<Gbt>,
}

pub fn model_to_json(model: &ModelFile) -> String {
    serde_json::to_string_pretty(model).expect("model serialization")
}

pub fn parse_model_json(text: &str) -> Result<ModelFile> {
    serde_json::from_str(text).map_err(|e| CliError::schema(format!("model: {e}")))
}

/// Evaluation report rows in the layout of the performance tables: one row
/// per model with MSE and the Spearman columns.
pub fn eval_to_csv(entries: &[(String, &EvalReport)]) -> String {
    let mut out = String::from("model,folds,mse,mse_target,spearman_rho,spearman_p\n");
    for (name, r) in entries {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            name,
            r.folds,
            r.mse,
            opt(r.mse_target),
            opt(r.spearman_rho),
            opt(r.spearman_p)
        );
    }
    out
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::schema(format!("{}: {e}", path.display())))
}
