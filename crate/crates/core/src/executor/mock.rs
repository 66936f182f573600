use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ExecError, ExecRequest, Executor, Phase, Profiling, RawExecResult};
use crate::digest;
use crate::verify::{compare_outputs, trial_seed, Comparison, Tensor};

/// Which requests a script entry applies to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockMatch {
    /// Candidate source equals this text (after trimming).
    Source(String),
    /// Candidate source contains this text.
    Contains(String),
    /// SHA-256 of the candidate source.
    Digest(String),
    /// 1-based call count. Makes the executor stateful.
    Ordinal(u64),
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockOutcome {
    CompileError(String),
    RuntimeError {
        message: String,
        #[serde(default)]
        signal: Option<i32>,
    },
    Mismatch {
        #[serde(default = "yes")]
        shape_ok: bool,
        #[serde(default)]
        max_abs_dev: f64,
        #[serde(default)]
        max_rel_dev: f64,
    },
    Correct {
        /// Baseline mean over candidate mean. Ignored when
        /// `candidate_mean_ms` is given.
        #[serde(default)]
        speedup: Option<f64>,
        #[serde(default)]
        candidate_mean_ms: Option<f64>,
        #[serde(default)]
        baseline_mean_ms: Option<f64>,
        /// Returned when the request asks for profile capture.
        #[serde(default)]
        profile_artifacts: Vec<PathBuf>,
    },
    /// Sleeps, then reports a correct run at speedup 1.
    Hang { ms: u64 },
    InfrastructureError(String),
}

fn yes() -> bool {
    true
}

impl MockOutcome {
    pub fn correct(speedup: f64) -> Self {
        MockOutcome::Correct {
            speedup: Some(speedup),
            candidate_mean_ms: None,
            baseline_mean_ms: None,
            profile_artifacts: Vec::new(),
        }
    }

    pub fn mismatch() -> Self {
        MockOutcome::Mismatch {
            shape_ok: true,
            max_abs_dev: 0.5,
            max_rel_dev: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockScriptEntry {
    #[serde(rename = "match")]
    pub matcher: MockMatch,
    pub outcome: MockOutcome,
}

/// Ordered rules; the first matching entry decides the outcome.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub entries: Vec<MockScriptEntry>,
    #[serde(default)]
    pub default: Option<MockOutcome>,
}

impl MockScript {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn push(&mut self, matcher: MockMatch, outcome: MockOutcome) -> &mut Self {
        self.entries.push(MockScriptEntry { matcher, outcome });
        self
    }
}

/// Scripted executor. Apart from `ordinal` matches it is a pure function
/// of the script and the request.
#[derive(Debug, Default)]
pub struct MockExecutor {
    script: MockScript,
    calls: AtomicU64,
}

impl MockExecutor {
    pub fn new(script: MockScript) -> Self {
        MockExecutor {
            script,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    fn lookup(&self, req: &ExecRequest, ordinal: u64) -> Option<&MockOutcome> {
        let source = req.candidate_source.as_str();
        self.script
            .entries
            .iter()
            .find(|e| match &e.matcher {
                MockMatch::Source(s) => source.trim() == s.trim(),
                MockMatch::Contains(s) => source.contains(s.as_str()),
                MockMatch::Digest(d) => digest::sha256_hex(source) == *d,
                MockMatch::Ordinal(n) => *n == ordinal,
                MockMatch::Any => true,
            })
            .map(|e| &e.outcome)
            .or(self.script.default.as_ref())
    }
}

const DEFAULT_BASELINE_MS: f64 = 1.0;

fn timed(req: &ExecRequest, candidate_ms: f64, baseline_ms: f64) -> RawExecResult {
    let runs = req.timing.timed_runs as usize;
    let mut r = RawExecResult::at_phase(Phase::Timed);
    r.comparison = Some(Comparison {
        pass: true,
        shape_ok: true,
        max_abs_dev: 0.0,
        max_rel_dev: 0.0,
    });
    r.candidate_samples_ns = vec![candidate_ms * 1e6; runs];
    if req.measure_baseline {
        r.baseline_samples_ns = vec![baseline_ms * 1e6; runs];
    }
    r.device_class = Some("mock".into());
    r
}

/// Candidate identical to the reference: both sides produce the same
/// tensors, so the comparison runs for real and reports zero deviation.
fn self_comparison(req: &ExecRequest) -> RawExecResult {
    let mut worst: Option<Comparison> = None;
    for trial in 0..req.correctness.trials {
        let seed = trial_seed(req.correctness.seed, &req.problem.id, trial);
        let data: Vec<f64> = (0..16u64)
            .map(|i| ((seed.rotate_left(i as u32) % 2001) as f64 - 1000.0) / 1000.0)
            .collect();
        let out = vec![Tensor::new(vec![4, 4], data)];
        let c = compare_outputs(&out, &out, &req.correctness);
        if worst.as_ref().is_none_or(|w| c.max_abs_dev >= w.max_abs_dev) {
            worst = Some(c);
        }
    }
    let mut r = timed(req, DEFAULT_BASELINE_MS, DEFAULT_BASELINE_MS);
    r.comparison = worst;
    r.candidate_shapes = vec![vec![4, 4]];
    r.reference_shapes = vec![vec![4, 4]];
    r
}

impl Executor for MockExecutor {
    fn execute(&self, req: &ExecRequest) -> Result<RawExecResult, ExecError> {
        let ordinal = self.calls.fetch_add(1, Ordering::SeqCst) + 1;
        let Some(outcome) = self.lookup(req, ordinal) else {
            if req.candidate_source.trim() == req.problem.reference_source.trim() {
                return Ok(self_comparison(req));
            }
            return Err(ExecError::Infrastructure(format!(
                "mock script has no entry for call {ordinal} (candidate {})",
                digest::short(&digest::sha256_hex(&req.candidate_source), 12)
            )));
        };
        let result = match outcome {
            MockOutcome::CompileError(msg) => {
                let mut r = RawExecResult::at_phase(Phase::Compile);
                r.compile_transcript = msg.clone();
                r
            }
            MockOutcome::RuntimeError { message, signal } => {
                let mut r = RawExecResult::at_phase(Phase::Run);
                r.run_transcript = message.clone();
                r.signal = *signal;
                r
            }
            MockOutcome::Mismatch {
                shape_ok,
                max_abs_dev,
                max_rel_dev,
            } => {
                let mut r = RawExecResult::at_phase(Phase::Compare);
                r.comparison = Some(Comparison {
                    pass: false,
                    shape_ok: *shape_ok,
                    max_abs_dev: *max_abs_dev,
                    max_rel_dev: *max_rel_dev,
                });
                r.run_transcript = format!(
                    "output mismatch: shape_ok={shape_ok} max_abs_dev={max_abs_dev} max_rel_dev={max_rel_dev}"
                );
                r
            }
            MockOutcome::Correct {
                speedup,
                candidate_mean_ms,
                baseline_mean_ms,
                profile_artifacts,
            } => {
                let base = baseline_mean_ms.unwrap_or(DEFAULT_BASELINE_MS);
                let cand = candidate_mean_ms.unwrap_or_else(|| base / speedup.unwrap_or(1.0));
                let mut r = timed(req, cand, base);
                if req.profiling == Profiling::Capture {
                    r.profile_artifacts = profile_artifacts.clone();
                    r.profiling_unavailable = profile_artifacts.is_empty();
                }
                r
            }
            MockOutcome::Hang { ms } => {
                thread::sleep(Duration::from_millis(*ms));
                timed(req, DEFAULT_BASELINE_MS, DEFAULT_BASELINE_MS)
            }
            MockOutcome::InfrastructureError(msg) => return Err(ExecError::Infrastructure(msg.clone())),
        };
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{Backend, DeviceId};
    use crate::executor::TimeoutExecutor;
    use crate::problem::{Level, Problem};
    use crate::verify::{classify, ExecState};
    use std::sync::Arc;

    fn req(source: &str) -> ExecRequest {
        let problem = Arc::new(Problem {
            id: "level1/vector_add".into(),
            level: Level::One,
            name: "vector add".into(),
            reference_source: "REFERENCE".into(),
            source_path: None,
            backend_support: Backend::ALL.into_iter().collect(),
            tags: vec![],
        });
        ExecRequest::new(problem, source, Backend::Cuda, DeviceId::new("0"))
    }

    #[test]
    fn scripted_compile_error() {
        let mut script = MockScript::default();
        script.push(MockMatch::Any, MockOutcome::CompileError("unknown type 'flaot'".into()));
        let r = MockExecutor::new(script).execute(&req("x")).unwrap();
        assert_eq!(r.phase_reached, Phase::Compile);
        assert!(r.compile_transcript.contains("unknown type 'flaot'"));
    }

    #[test]
    fn scripted_correct_timings() {
        let mut script = MockScript::default();
        script.push(
            MockMatch::Contains("K1".into()),
            MockOutcome::Correct {
                speedup: None,
                candidate_mean_ms: Some(0.5),
                baseline_mean_ms: Some(1.0),
                profile_artifacts: vec![],
            },
        );
        let r = MockExecutor::new(script).execute(&req("... K1 ...")).unwrap();
        assert_eq!(r.phase_reached, Phase::Timed);
        assert_eq!(r.candidate_samples_ns.len(), 100);
        assert!(r.candidate_samples_ns.iter().all(|&s| s == 500_000.0));
        assert!(r.baseline_samples_ns.iter().all(|&s| s == 1_000_000.0));
    }

    #[test]
    fn self_comparison_has_zero_deviation() {
        let r = MockExecutor::default().execute(&req("REFERENCE")).unwrap();
        let c = r.comparison.unwrap();
        assert!(c.passed());
        assert_eq!(c.max_abs_dev, 0.0);
    }

    #[test]
    fn unmatched_candidate_is_infrastructure_fault() {
        assert!(matches!(
            MockExecutor::default().execute(&req("other")),
            Err(ExecError::Infrastructure(_))
        ));
    }

    #[test]
    fn ordinal_entries_follow_call_order() {
        let mut script = MockScript::default();
        script
            .push(MockMatch::Ordinal(1), MockOutcome::CompileError("e".into()))
            .push(MockMatch::Ordinal(2), MockOutcome::correct(2.0));
        let exec = MockExecutor::new(script);
        assert_eq!(exec.execute(&req("a")).unwrap().phase_reached, Phase::Compile);
        assert_eq!(exec.execute(&req("a")).unwrap().phase_reached, Phase::Timed);
        assert!(exec.execute(&req("a")).is_err());
    }

    #[test]
    fn hang_is_cut_by_timeout_and_classified() {
        let mut script = MockScript::default();
        script.push(MockMatch::Any, MockOutcome::Hang { ms: 2_000 });
        let exec = TimeoutExecutor::new(Arc::new(MockExecutor::new(script)));
        let mut r = req("k");
        r.timeout = Duration::from_millis(50);
        let start = std::time::Instant::now();
        let raw = exec.execute(&r).unwrap();
        assert!(start.elapsed() < Duration::from_millis(1_500));
        assert!(raw.timed_out);
        assert_eq!(classify(&raw, true), ExecState::RuntimeError);
    }

    #[test]
    fn script_json_shape() {
        let text = r#"{
            "entries": [
                {"match": {"contains": "K1"}, "outcome": {"compile_error": "boom"}},
                {"match": {"ordinal": 2}, "outcome": {"correct": {"speedup": 1.3}}},
                {"match": "any", "outcome": {"runtime_error": {"message": "segfault", "signal": 11}}}
            ],
            "default": {"mismatch": {"max_abs_dev": 0.2}}
        }"#;
        let script: MockScript = serde_json::from_str(text).unwrap();
        assert_eq!(script.entries.len(), 3);
        assert_eq!(script.entries[1].outcome, MockOutcome::correct(1.3));
    }
}
