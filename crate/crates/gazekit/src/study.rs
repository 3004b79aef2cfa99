//! Study directories: the on-disk layout written by `simulate` and consumed
//! by the analysis subcommands.
//!
//! ```text
//! <dir>/
//!   geometry.json      screen geometry
//!   manifest.json      trial manifests, word rect, warmup count
//!   landmarks.json     68-point landmarks per face id
//!   embeddings.csv     face embeddings (synthetic for simulated studies)
//!   study.json         participant roster and session file map
//!   sessions/<id>.txt  canonical session files
//!   truth/<id>_events.csv   injected microsaccade ground truth
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gazekit_core::aoi::{default_word_rect, LandmarkSet, TrialManifest};
use gazekit_core::geometry::{Rect, ScreenGeometry};
use gazekit_core::model::EmbeddingSet;
use gazekit_core::recording::{parse_session, ParticipantMeta, SessionRecording};
use gazekit_core::sim::{synthetic_embeddings, SimProfile, StudyData};

use crate::error::{CliError, Result};
use crate::formats;

#[derive(Debug, Serialize, Deserialize)]
struct SessionEntry {
    participant: ParticipantMeta,
    file: String,
    truth: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct StudyDoc {
    seed: u64,
    warmup_trials: usize,
    sessions: Vec<SessionEntry>,
}

/// Write a simulated study to disk. Deterministic: identical studies produce
/// identical trees.
pub fn write_study(dir: &Path, study: &StudyData, profile: &SimProfile) -> Result<()> {
    fs::create_dir_all(dir.join("sessions"))?;
    fs::create_dir_all(dir.join("truth"))?;
    fs::write(
        dir.join("geometry.json"),
        serde_json::to_string_pretty(&profile.geometry).expect("geometry json"),
    )?;
    fs::write(
        dir.join("manifest.json"),
        formats::manifest_to_json(
            &study.manifests,
            None,
            Some(profile.word_rect),
            Some(study.warmup_trials),
        ),
    )?;
    fs::write(
        dir.join("landmarks.json"),
        formats::landmarks_to_json(&study.landmarks),
    )?;
    let embeddings = synthetic_embeddings(&study.manifests, 16, profile.seed);
    fs::write(dir.join("embeddings.csv"), formats::embeddings_to_csv(&embeddings))?;

    let mut entries = Vec::new();
    for session in &study.sessions {
        let id = &session.participant.participant_id;
        let file = format!("sessions/{id}.txt");
        let truth = format!("truth/{id}_events.csv");
        fs::write(
            dir.join(&file),
            gazekit_core::recording::serialize_session(&session.raw),
        )?;
        fs::write(dir.join(&truth), formats::truth_to_csv(id, &session.injected))?;
        entries.push(SessionEntry {
            participant: session.participant.clone(),
            file,
            truth,
        });
    }
    let doc = StudyDoc {
        seed: profile.seed,
        warmup_trials: study.warmup_trials,
        sessions: entries,
    };
    fs::write(
        dir.join("study.json"),
        serde_json::to_string_pretty(&doc).expect("study json"),
    )?;
    Ok(())
}

/// Sessions plus shared stimulus data, ready for analysis.
#[derive(Debug)]
pub struct LoadedStudy {
    pub geometry: ScreenGeometry,
    pub manifests: Vec<TrialManifest>,
    pub word_rect: Rect,
    pub landmarks: Option<LandmarkSet>,
    pub embeddings: Option<EmbeddingSet>,
    pub warmup: usize,
    pub sessions: Vec<SessionRecording>,
}

/// Load a study directory written by `write_study`.
pub fn load_study_dir(dir: &Path) -> Result<LoadedStudy> {
    let doc: StudyDoc = serde_json::from_str(&formats::read_to_string(&dir.join("study.json"))?)
        .map_err(|e| CliError::schema(format!("study.json: {e}")))?;
    let geometry = formats::parse_geometry_json(&formats::read_to_string(&dir.join("geometry.json"))?)?;
    let manifest = formats::parse_manifest_json(&formats::read_to_string(&dir.join("manifest.json"))?)?;
    let landmarks = {
        let path = dir.join("landmarks.json");
        if path.exists() {
            Some(formats::parse_landmarks_json(
                &formats::read_to_string(&path)?,
                (500.0, 500.0),
            )?)
        } else {
            None
        }
    };
    let embeddings = {
        let path = dir.join("embeddings.csv");
        if path.exists() {
            Some(formats::parse_embeddings_csv(&formats::read_to_string(&path)?)?)
        } else {
            None
        }
    };
    let mut sessions = Vec::new();
    for entry in doc.sessions {
        let text = formats::read_to_string(&dir.join(&entry.file))?;
        let raw = parse_session(text.lines(), &geometry)
            .map_err(|e| CliError::schema(format!("{}: {e}", entry.file)))?;
        let session = SessionRecording::assemble(raw, &manifest.trials, entry.participant, geometry)
            .map_err(CliError::Schema)?;
        sessions.push(session);
    }
    Ok(LoadedStudy {
        geometry,
        word_rect: manifest
            .word_rect
            .unwrap_or_else(|| default_word_rect(&geometry)),
        manifests: manifest.trials,
        landmarks,
        embeddings,
        warmup: manifest.warmup_trials.unwrap_or(doc.warmup_trials),
        sessions,
    })
}

/// Inputs common to the analysis subcommands: either a study directory or
/// explicit session files plus a manifest.
#[derive(Debug, Clone, clap::Args)]
pub struct InputArgs {
    /// Study directory (as written by `simulate`).
    #[arg(long, value_name = "DIR", conflicts_with = "input")]
    pub data: Option<PathBuf>,

    /// Session file(s) in the canonical line format; repeatable.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Vec<PathBuf>,

    /// Manifest JSON (required with --in).
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    /// Screen geometry JSON; defaults to the reference apparatus.
    #[arg(long, value_name = "FILE")]
    pub geometry: Option<PathBuf>,

    /// Landmarks JSON ({face_id: [[x,y] * 68]}).
    #[arg(long, value_name = "FILE")]
    pub landmarks: Option<PathBuf>,

    /// Source frame of the landmark coordinates.
    #[arg(long, value_name = "W H", num_args = 2, default_values = ["500", "500"])]
    pub landmarks_size: Vec<f64>,

    /// Embeddings CSV (face_id,v0,...,vN).
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,

    /// Override the number of leading warmup trials excluded from
    /// aggregation.
    #[arg(long)]
    pub warmup: Option<usize>,
}

impl InputArgs {
    pub fn load(&self) -> Result<LoadedStudy> {
        let mut study = if let Some(dir) = &self.data {
            load_study_dir(dir)?
        } else {
            if self.input.is_empty() {
                return Err(CliError::usage("provide --data <dir> or --in <session>"));
            }
            let manifest_path = self
                .manifest
                .as_ref()
                .ok_or_else(|| CliError::usage("--in requires --manifest"))?;
            let manifest = formats::parse_manifest_json(&formats::read_to_string(manifest_path)?)?;
            let geometry = match &self.geometry {
                Some(p) => formats::parse_geometry_json(&formats::read_to_string(p)?)?,
                None => ScreenGeometry::default(),
            };
            let mut sessions = Vec::new();
            for (i, path) in self.input.iter().enumerate() {
                let text = formats::read_to_string(path)?;
                let raw = parse_session(text.lines(), &geometry)
                    .map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
                let participant = manifest.participant.clone().unwrap_or(ParticipantMeta {
                    participant_id: format!("p{:02}", i + 1),
                    age: 0,
                    drift_error_deg: 0.0,
                    education: String::new(),
                    eyes_test_score: None,
                });
                let session =
                    SessionRecording::assemble(raw, &manifest.trials, participant, geometry)
                        .map_err(CliError::Schema)?;
                sessions.push(session);
            }
            LoadedStudy {
                geometry,
                word_rect: manifest
                    .word_rect
                    .unwrap_or_else(|| default_word_rect(&geometry)),
                manifests: manifest.trials,
                landmarks: None,
                embeddings: None,
                warmup: manifest.warmup_trials.unwrap_or(0),
                sessions,
            }
        };
        if let Some(path) = &self.landmarks {
            let size = (self.landmarks_size[0], self.landmarks_size[1]);
            study.landmarks = Some(formats::parse_landmarks_json(
                &formats::read_to_string(path)?,
                size,
            )?);
        }
        if let Some(path) = &self.embeddings {
            study.embeddings = Some(formats::parse_embeddings_csv(&formats::read_to_string(
                path,
            )?)?);
        }
        if let Some(w) = self.warmup {
            study.warmup = w;
        }
        Ok(study)
    }

    /// Landmarks are required for AOI work; synthesize an error otherwise.
    pub fn require_landmarks(study: &LoadedStudy) -> Result<&LandmarkSet> {
        study
            .landmarks
            .as_ref()
            .ok_or_else(|| CliError::usage("this command needs --landmarks (or a --data dir with landmarks.json)"))
    }
}
