//! Request and result documents exchanged with the evaluation shim.
//!
//! The JSON Schemas for both documents live in `schemas/` at the
//! repository root and carry the same `schema_version`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{ExecRequest, Phase, Profiling, RawExecResult, TimingConfig};
use crate::backend::{Backend, BaselineKind};
use crate::verify::{Comparison, CorrectnessConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShimRequest {
    pub schema_version: u32,
    pub problem_id: String,
    pub problem_source_path: PathBuf,
    pub candidate_source_path: PathBuf,
    pub backend: Backend,
    pub baseline_kind: BaselineKind,
    pub timing: TimingConfig,
    pub correctness: CorrectnessConfig,
    pub profiling: bool,
    pub device: String,
    pub timeout_s: f64,
    pub measure_baseline: bool,
    /// Where profiler output and other artifacts should be written.
    pub artifact_dir: PathBuf,
}

impl ShimRequest {
    pub fn from_exec(
        req: &ExecRequest,
        problem_source_path: PathBuf,
        candidate_source_path: PathBuf,
        artifact_dir: PathBuf,
    ) -> Self {
        ShimRequest {
            schema_version: SCHEMA_VERSION,
            problem_id: req.problem.id.clone(),
            problem_source_path,
            candidate_source_path,
            backend: req.backend,
            baseline_kind: req.baseline_kind,
            timing: req.timing,
            correctness: req.correctness,
            profiling: req.profiling == Profiling::Capture,
            device: req.device.0.clone(),
            timeout_s: req.timeout.as_secs_f64(),
            measure_baseline: req.measure_baseline,
            artifact_dir,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShimShapes {
    #[serde(default)]
    pub candidate: Vec<Vec<usize>>,
    #[serde(default)]
    pub reference: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimResult {
    pub schema_version: u32,
    pub phase_reached: Phase,
    #[serde(default)]
    pub compile_transcript: String,
    #[serde(default)]
    pub run_transcript: String,
    #[serde(default)]
    pub shapes: ShimShapes,
    #[serde(default)]
    pub shape_ok: Option<bool>,
    #[serde(default)]
    pub max_abs_dev: Option<f64>,
    #[serde(default)]
    pub max_rel_dev: Option<f64>,
    #[serde(default)]
    pub candidate_samples_ns: Vec<f64>,
    #[serde(default)]
    pub baseline_samples_ns: Vec<f64>,
    #[serde(default)]
    pub profile_artifact_paths: Vec<PathBuf>,
    #[serde(default)]
    pub profiling_unavailable: bool,
    #[serde(default)]
    pub wall_time_ms: f64,
    #[serde(default)]
    pub device_class: Option<String>,
    #[serde(default)]
    pub signal: Option<i32>,
    /// Order in which the baseline and candidate timing blocks ran.
    #[serde(default)]
    pub block_order: Vec<String>,
}

impl ShimResult {
    /// Checks the result against the request it answers and converts it.
    /// Any inconsistency is a protocol violation.
    pub fn into_raw(self, req: &ShimRequest) -> Result<RawExecResult, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "shim result schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let runs = req.timing.timed_runs as usize;
        if self.phase_reached == Phase::Timed {
            if self.candidate_samples_ns.len() != runs {
                return Err(format!(
                    "phase timed with {} candidate samples (expected {runs})",
                    self.candidate_samples_ns.len()
                ));
            }
            if req.measure_baseline && self.baseline_samples_ns.len() != runs {
                return Err(format!(
                    "phase timed with {} baseline samples (expected {runs})",
                    self.baseline_samples_ns.len()
                ));
            }
        }
        let comparison = if self.phase_reached >= Phase::Compare {
            let shape_ok = self
                .shape_ok
                .unwrap_or(self.shapes.candidate == self.shapes.reference);
            Some(Comparison {
                pass: self.phase_reached == Phase::Timed,
                shape_ok,
                max_abs_dev: self.max_abs_dev.unwrap_or(0.0),
                max_rel_dev: self.max_rel_dev.unwrap_or(0.0),
            })
        } else {
            None
        };
        Ok(RawExecResult {
            phase_reached: self.phase_reached,
            compile_transcript: self.compile_transcript,
            run_transcript: self.run_transcript,
            signal: self.signal,
            timed_out: false,
            candidate_shapes: self.shapes.candidate,
            reference_shapes: self.shapes.reference,
            comparison,
            candidate_samples_ns: self.candidate_samples_ns,
            baseline_samples_ns: self.baseline_samples_ns,
            profile_artifacts: self.profile_artifact_paths,
            profiling_unavailable: self.profiling_unavailable,
            device_class: self.device_class,
            wall_time_ms: self.wall_time_ms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;
    use std::collections::BTreeSet;

    fn schema(name: &str) -> Value {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schemas/");
        serde_json::from_str(&std::fs::read_to_string(format!("{path}{name}")).unwrap()).unwrap()
    }

    fn keys(v: &Value) -> BTreeSet<String> {
        v.as_object().unwrap().keys().cloned().collect()
    }

    fn request() -> ShimRequest {
        ShimRequest {
            schema_version: SCHEMA_VERSION,
            problem_id: "level1/a".into(),
            problem_source_path: "p.py".into(),
            candidate_source_path: "c.py".into(),
            backend: Backend::Cuda,
            baseline_kind: BaselineKind::Eager,
            timing: TimingConfig::default(),
            correctness: CorrectnessConfig::default(),
            profiling: false,
            device: "0".into(),
            timeout_s: 600.0,
            measure_baseline: true,
            artifact_dir: "art".into(),
        }
    }

    #[test]
    fn request_matches_published_schema() {
        let schema = schema("shim_request.v1.schema.json");
        let doc = serde_json::to_value(request()).unwrap();
        let required: BTreeSet<String> = schema["required"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        assert_eq!(keys(&doc), required);
        assert_eq!(keys(&schema["properties"]), required);
        assert_eq!(schema["properties"]["schema_version"]["const"], SCHEMA_VERSION);
        for nested in ["timing", "correctness"] {
            assert_eq!(keys(&doc[nested]), keys(&schema["properties"][nested]["properties"]));
        }
    }

    #[test]
    fn result_fields_are_published() {
        let schema = schema("shim_result.v1.schema.json");
        let doc = serde_json::to_value(ShimResult {
            schema_version: 1,
            phase_reached: Phase::Timed,
            compile_transcript: String::new(),
            run_transcript: String::new(),
            shapes: ShimShapes::default(),
            shape_ok: Some(true),
            max_abs_dev: Some(0.0),
            max_rel_dev: Some(0.0),
            candidate_samples_ns: vec![],
            baseline_samples_ns: vec![],
            profile_artifact_paths: vec![],
            profiling_unavailable: false,
            wall_time_ms: 0.0,
            device_class: None,
            signal: None,
            block_order: vec![],
        })
        .unwrap();
        assert_eq!(keys(&doc), keys(&schema["properties"]));
        let phases: Vec<&str> = schema["properties"]["phase_reached"]["enum"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        assert_eq!(phases, ["compile", "run", "compare", "timed"]);
    }

    #[test]
    fn timed_result_needs_full_sample_arrays() {
        let req = request();
        let mut res: ShimResult = serde_json::from_value(serde_json::json!({
            "schema_version": 1,
            "phase_reached": "timed",
            "candidate_samples_ns": vec![1.0; 100],
            "baseline_samples_ns": vec![2.0; 99],
        }))
        .unwrap();
        assert!(res.clone().into_raw(&req).unwrap_err().contains("baseline"));
        res.baseline_samples_ns.push(2.0);
        let raw = res.into_raw(&req).unwrap();
        assert!(raw.comparison.unwrap().passed());
    }

    #[test]
    fn compare_phase_maps_to_failed_comparison() {
        let res: ShimResult = serde_json::from_value(serde_json::json!({
            "schema_version": 1,
            "phase_reached": "compare",
            "shapes": {"candidate": [[3, 2]], "reference": [[2, 3]]},
        }))
        .unwrap();
        let c = res.into_raw(&request()).unwrap().comparison.unwrap();
        assert!(!c.shape_ok && !c.pass);
    }

    #[test]
    fn wrong_schema_version_rejected() {
        let res: ShimResult =
            serde_json::from_value(serde_json::json!({"schema_version": 2, "phase_reached": "compile"})).unwrap();
        assert!(res.into_raw(&request()).is_err());
    }
}
