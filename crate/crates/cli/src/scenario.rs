//! Scenario files: a declarative description of one run. Unknown fields are
//! rejected; defaults are tolerance 1e-9 and rank threshold 1e-10; a scale
//! guard caps the largest graded piece (default 20000).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dalab_core::fock::graded_dim;
use dalab_core::linalg::Thresholds;
use dalab_core::serialize::{ideal_from_json, map_from_json, variety_from_json, MapJson, VarietyJson};
use dalab_core::similarity::LinearMapSpec;
use dalab_core::variety::VarietySpec;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-10;
pub const DEFAULT_DIM_CAP: usize = 20000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Dims,
    Hilbert,
    Angles,
    Essnorm,
    Closedness,
    Similarity,
    FullReport,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Task::Dims => "dims",
            Task::Hilbert => "hilbert",
            Task::Angles => "angles",
            Task::Essnorm => "essnorm",
            Task::Closedness => "closedness",
            Task::Similarity => "similarity",
            Task::FullReport => "full-report",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub d: usize,
    pub max_degree: u32,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub rank_threshold: Option<f64>,
    #[serde(default)]
    pub dim_cap: Option<usize>,
    pub subject: VarietyJson,
    #[serde(default)]
    pub companion: Option<VarietyJson>,
    #[serde(default)]
    pub map: Option<MapJson>,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub p_list: Option<Vec<f64>>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub parallelism: Option<usize>,
}

/// A fully validated scenario with defaults applied.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub d: usize,
    pub max_degree: u32,
    pub tolerance: f64,
    pub thresholds: Thresholds,
    pub subject: VarietySpec,
    pub subject_json: VarietyJson,
    pub companion: Option<VarietySpec>,
    pub map: Option<LinearMapSpec>,
    pub tasks: Vec<Task>,
    pub p_list: Vec<f64>,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub parallelism: usize,
}

#[derive(Debug)]
pub enum ScenarioError {
    Io(std::io::Error),
    /// Schema violation with serde's field-path diagnostics.
    Schema(String),
    Invalid(String),
    ScaleGuard { dim: u128, cap: usize },
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioError::Io(e) => write!(f, "cannot read scenario: {e}"),
            ScenarioError::Schema(e) => write!(f, "scenario schema violation: {e}"),
            ScenarioError::Invalid(e) => write!(f, "invalid scenario: {e}"),
            ScenarioError::ScaleGuard { dim, cap } => write!(
                f,
                "scale guard: the largest requested graded piece has dimension {dim}, \
                 above the cap {cap}"
            ),
        }
    }
}

impl std::error::Error for ScenarioError {}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(ScenarioError::Io)?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile =
        serde_json::from_str(text).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    if file.version != SCHEMA_VERSION {
        return Err(ScenarioError::Invalid(format!(
            "unsupported scenario version {} (expected {SCHEMA_VERSION})",
            file.version
        )));
    }
    if file.d < 1 {
        return Err(ScenarioError::Invalid("field `d` must be at least 1".into()));
    }
    if file.max_degree < 2 {
        return Err(ScenarioError::Invalid("field `maxDegree` must be at least 2".into()));
    }
    if file.tasks.is_empty() {
        return Err(ScenarioError::Invalid("field `tasks` must be nonempty".into()));
    }
    let p_list = file.p_list.clone().unwrap_or_else(|| vec![1.5]);
    if p_list.iter().any(|&p| p < 1.0) {
        return Err(ScenarioError::Invalid("field `pList` values must be >= 1".into()));
    }
    let cap = file.dim_cap.unwrap_or(DEFAULT_DIM_CAP);
    let top_dim = graded_dim(file.d, file.max_degree as usize);
    if top_dim > cap as u128 {
        return Err(ScenarioError::ScaleGuard { dim: top_dim, cap });
    }

    let subject = variety_from_json(&file.subject)
        .map_err(|e| ScenarioError::Invalid(format!("field `subject`: {e}")))?;
    if subject.d() != file.d {
        return Err(ScenarioError::Invalid(format!(
            "field `subject`: ambient dimension {} does not match `d` = {}",
            subject.d(),
            file.d
        )));
    }
    let companion = match &file.companion {
        Some(json) => {
            let v = variety_from_json(json)
                .map_err(|e| ScenarioError::Invalid(format!("field `companion`: {e}")))?;
            if v.d() != file.d {
                return Err(ScenarioError::Invalid(
                    "field `companion`: ambient dimension mismatch".into(),
                ));
            }
            Some(v)
        }
        None => None,
    };
    let map = match &file.map {
        Some(json) => Some(
            map_from_json(json).map_err(|e| ScenarioError::Invalid(format!("field `map`: {e}")))?,
        ),
        None => None,
    };
    if file.tasks.contains(&Task::Similarity) && map.is_none() {
        return Err(ScenarioError::Invalid(
            "task `similarity` requires field `map`".into(),
        ));
    }

    let thresholds = Thresholds {
        rank_rel: file.rank_threshold.unwrap_or(DEFAULT_RANK_THRESHOLD),
        ..Thresholds::default()
    };
    Ok(Scenario {
        d: file.d,
        max_degree: file.max_degree,
        tolerance: file.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        thresholds,
        subject,
        subject_json: file.subject,
        companion,
        map,
        tasks: file.tasks,
        p_list,
        out_dir: file.out_dir,
        cache_dir: file.cache_dir,
        parallelism: file.parallelism.unwrap_or(1).max(1),
    })
}

/// Canonical JSON used in cache keys for the subject spec.
pub fn canonical_subject(scenario: &Scenario) -> String {
    serde_json::to_string(&CanonicalSubject {
        d: scenario.d,
        subject: &scenario.subject_json,
        rank_threshold: scenario.thresholds.rank_rel,
    })
    .expect("serializable")
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CanonicalSubject<'a> {
    d: usize,
    subject: &'a VarietyJson,
    rank_threshold: f64,
}

/// Convenience for ideal subjects.
pub fn subject_ideal(scenario: &Scenario) -> Option<dalab_core::variety::IdealSpec> {
    match &scenario.subject_json {
        VarietyJson::Ideal(json) => ideal_from_json(json).ok(),
        VarietyJson::Components(_) => None,
    }
}
