//! Candidate and baseline execution.
//!
//! [`Executor`] has two implementations: [`MockExecutor`], a scripted and
//! deterministic stand-in used by tests and dry runs, and
//! [`SubprocessExecutor`], which drives the evaluation shim through its
//! request/result documents. [`DevicePool`] hands out exclusive leases so
//! that at most one evaluation runs per computational unit.

mod mock;
mod pool;
mod subprocess;
pub mod wire;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use mock::{MockExecutor, MockMatch, MockOutcome, MockScript, MockScriptEntry};
pub use pool::{DevicePool, HolderId, Lease, PoolError};
pub use subprocess::SubprocessExecutor;

use crate::backend::{Backend, BaselineKind, DeviceId};
use crate::digest;
use crate::problem::Problem;
use crate::verify::{Comparison, CorrectnessConfig};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

/// Bytes of transcript kept when a timeout cuts an evaluation short.
const TRANSCRIPT_TAIL: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingConfig {
    pub timed_runs: u32,
    pub warmup_runs: u32,
    pub reset_compile_context: bool,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            timed_runs: 100,
            warmup_runs: 10,
            reset_compile_context: true,
        }
    }
}

impl TimingConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.timed_runs == 0 {
            return Err("timing.timed_runs must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profiling {
    #[default]
    Off,
    Capture,
}

#[derive(Debug, Clone)]
pub struct ExecRequest {
    pub problem: Arc<Problem>,
    pub candidate_source: String,
    pub backend: Backend,
    pub baseline_kind: BaselineKind,
    pub timing: TimingConfig,
    pub correctness: CorrectnessConfig,
    pub profiling: Profiling,
    pub device: DeviceId,
    /// False when the baseline timings will be filled from a cache.
    pub measure_baseline: bool,
    pub timeout: Duration,
}

impl ExecRequest {
    pub fn new(problem: Arc<Problem>, candidate_source: impl Into<String>, backend: Backend, device: DeviceId) -> Self {
        ExecRequest {
            problem,
            candidate_source: candidate_source.into(),
            backend,
            baseline_kind: BaselineKind::Eager,
            timing: TimingConfig::default(),
            correctness: CorrectnessConfig::default(),
            profiling: Profiling::Off,
            device,
            measure_baseline: true,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn validate(&self) -> Result<(), ExecError> {
        if self.baseline_kind == BaselineKind::GraphCompiled && !self.backend.supports_graph_compiled() {
            return Err(ExecError::InvalidRequest(format!(
                "graph-compiled baseline is not available on {}",
                self.backend
            )));
        }
        self.timing.validate().map_err(ExecError::InvalidRequest)?;
        self.correctness.validate().map_err(ExecError::InvalidRequest)?;
        Ok(())
    }

    /// Digest of everything that determines the evaluation outcome. The
    /// device is deliberately left out.
    pub fn fingerprint(&self) -> String {
        let knobs = serde_json::json!({
            "backend": self.backend,
            "baseline": self.baseline_kind,
            "timing": self.timing,
            "correctness": self.correctness,
            "profiling": self.profiling,
        });
        digest::sha256_parts([
            self.problem.id.as_str(),
            self.problem.reference_source.as_str(),
            self.candidate_source.as_str(),
            knobs.to_string().as_str(),
        ])
    }
}

/// Last phase an evaluation entered. `Timed` means every earlier phase
/// succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Compile,
    Run,
    Compare,
    Timed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawExecResult {
    pub phase_reached: Phase,
    #[serde(default)]
    pub compile_transcript: String,
    #[serde(default)]
    pub run_transcript: String,
    /// Signal that terminated the candidate process, if any.
    #[serde(default)]
    pub signal: Option<i32>,
    #[serde(default)]
    pub timed_out: bool,
    #[serde(default)]
    pub candidate_shapes: Vec<Vec<usize>>,
    #[serde(default)]
    pub reference_shapes: Vec<Vec<usize>>,
    #[serde(default)]
    pub comparison: Option<Comparison>,
    #[serde(default)]
    pub candidate_samples_ns: Vec<f64>,
    #[serde(default)]
    pub baseline_samples_ns: Vec<f64>,
    #[serde(default)]
    pub profile_artifacts: Vec<PathBuf>,
    #[serde(default)]
    pub profiling_unavailable: bool,
    #[serde(default)]
    pub device_class: Option<String>,
    #[serde(default)]
    pub wall_time_ms: f64,
}

impl RawExecResult {
    pub fn at_phase(phase: Phase) -> Self {
        RawExecResult {
            phase_reached: phase,
            compile_transcript: String::new(),
            run_transcript: String::new(),
            signal: None,
            timed_out: false,
            candidate_shapes: Vec::new(),
            reference_shapes: Vec::new(),
            comparison: None,
            candidate_samples_ns: Vec::new(),
            baseline_samples_ns: Vec::new(),
            profile_artifacts: Vec::new(),
            profiling_unavailable: false,
            device_class: None,
            wall_time_ms: 0.0,
        }
    }

    /// Result recorded when an evaluation exceeds its wall-clock budget.
    pub fn timed_out(limit: Duration, transcript: &str) -> Self {
        let mut r = RawExecResult::at_phase(Phase::Run);
        r.timed_out = true;
        r.run_transcript = format!(
            "evaluation exceeded the {:.0} s wall-clock limit\n{}",
            limit.as_secs_f64(),
            tail(transcript, TRANSCRIPT_TAIL)
        );
        r.wall_time_ms = limit.as_secs_f64() * 1e3;
        r
    }

    /// The transcript of the phase that failed, for feedback prompts.
    pub fn failure_transcript(&self) -> &str {
        match self.phase_reached {
            Phase::Compile => &self.compile_transcript,
            _ => &self.run_transcript,
        }
    }
}

/// Last `max` bytes of `s`, cut on a char boundary.
pub(crate) fn tail(s: &str, max: usize) -> &str {
    if s.len() <= max {
        return s;
    }
    let mut start = s.len() - max;
    while !s.is_char_boundary(start) {
        start += 1;
    }
    &s[start..]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    /// The harness itself failed; the candidate was never judged.
    #[error("infrastructure fault: {0}")]
    Infrastructure(String),
    #[error("invalid execution request: {0}")]
    InvalidRequest(String),
}

pub trait Executor: Send + Sync {
    /// Runs one evaluation. Candidate failures are data in the returned
    /// record; `Err` is reserved for faults of the harness itself.
    fn execute(&self, req: &ExecRequest) -> Result<RawExecResult, ExecError>;
}

impl<E: Executor + ?Sized> Executor for Arc<E> {
    fn execute(&self, req: &ExecRequest) -> Result<RawExecResult, ExecError> {
        (**self).execute(req)
    }
}

impl<E: Executor + ?Sized> Executor for Box<E> {
    fn execute(&self, req: &ExecRequest) -> Result<RawExecResult, ExecError> {
        (**self).execute(req)
    }
}

/// Runs `req`, retrying once on an infrastructure fault.
pub fn execute_with_retry(exec: &dyn Executor, req: &ExecRequest) -> Result<RawExecResult, ExecError> {
    req.validate()?;
    match exec.execute(req) {
        Err(ExecError::Infrastructure(first)) => {
            log::warn!("problem={} event=infra_retry reason={first}", req.problem.id);
            exec.execute(req)
        }
        other => other,
    }
}

/// Enforces `req.timeout` on executors that cannot interrupt themselves.
/// The worker thread is abandoned on timeout.
pub struct TimeoutExecutor<E> {
    inner: Arc<E>,
}

impl<E> TimeoutExecutor<E> {
    pub fn new(inner: Arc<E>) -> Self {
        TimeoutExecutor { inner }
    }
}

impl<E: Executor + 'static> Executor for TimeoutExecutor<E> {
    fn execute(&self, req: &ExecRequest) -> Result<RawExecResult, ExecError> {
        let (tx, rx) = mpsc::channel();
        let inner = Arc::clone(&self.inner);
        let owned = req.clone();
        thread::Builder::new()
            .name(format!("exec-{}", req.problem.slug()))
            .spawn(move || {
                let _ = tx.send(inner.execute(&owned));
            })
            .map_err(|e| ExecError::Infrastructure(format!("cannot spawn evaluation thread: {e}")))?;
        match rx.recv_timeout(req.timeout) {
            Ok(result) => result,
            Err(mpsc::RecvTimeoutError::Timeout) => Ok(RawExecResult::timed_out(req.timeout, "")),
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                Err(ExecError::Infrastructure("evaluation thread panicked".into()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct BaselineKey {
    problem_id: String,
    backend: Backend,
    baseline_kind: BaselineKind,
    timing: TimingConfig,
}

/// Reuses baseline timings across iterations of the same problem.
///
/// Keyed by (problem, backend, baseline kind, timing config). With
/// `bypass` set every evaluation re-measures its baseline.
pub struct BaselineCache<E> {
    inner: E,
    bypass: bool,
    cache: Mutex<HashMap<BaselineKey, Vec<f64>>>,
}

impl<E: Executor> BaselineCache<E> {
    pub fn new(inner: E, bypass: bool) -> Self {
        BaselineCache {
            inner,
            bypass,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.lock().expect("baseline cache poisoned").len()
    }
}

impl<E: Executor> Executor for BaselineCache<E> {
    fn execute(&self, req: &ExecRequest) -> Result<RawExecResult, ExecError> {
        if self.bypass {
            return self.inner.execute(req);
        }
        let key = BaselineKey {
            problem_id: req.problem.id.clone(),
            backend: req.backend,
            baseline_kind: req.baseline_kind,
            timing: req.timing,
        };
        let cached = self.cache.lock().expect("baseline cache poisoned").get(&key).cloned();
        match cached {
            Some(samples) => {
                let mut req = req.clone();
                req.measure_baseline = false;
                let mut result = self.inner.execute(&req)?;
                if result.phase_reached == Phase::Timed {
                    result.baseline_samples_ns = samples;
                }
                Ok(result)
            }
            None => {
                let result = self.inner.execute(req)?;
                if result.phase_reached == Phase::Timed && !result.baseline_samples_ns.is_empty() {
                    self.cache
                        .lock()
                        .expect("baseline cache poisoned")
                        .insert(key, result.baseline_samples_ns.clone());
                }
                Ok(result)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Level;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn problem() -> Arc<Problem> {
        Arc::new(Problem {
            id: "level1/p".into(),
            level: Level::One,
            name: "p".into(),
            reference_source: "ref".into(),
            source_path: None,
            backend_support: Backend::ALL.into_iter().collect(),
            tags: vec![],
        })
    }

    struct Counting {
        calls: AtomicUsize,
        fail_first: bool,
    }

    impl Executor for Counting {
        fn execute(&self, req: &ExecRequest) -> Result<RawExecResult, ExecError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if self.fail_first && n == 0 {
                return Err(ExecError::Infrastructure("shim wrote no result".into()));
            }
            let mut r = RawExecResult::at_phase(Phase::Timed);
            r.candidate_samples_ns = vec![1.0; req.timing.timed_runs as usize];
            if req.measure_baseline {
                r.baseline_samples_ns = vec![2.0 + n as f64; req.timing.timed_runs as usize];
            }
            Ok(r)
        }
    }

    #[test]
    fn infrastructure_fault_retried_once() {
        let exec = Counting {
            calls: AtomicUsize::new(0),
            fail_first: true,
        };
        let req = ExecRequest::new(problem(), "k", Backend::Cuda, DeviceId::new("0"));
        assert!(execute_with_retry(&exec, &req).is_ok());
        assert_eq!(exec.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn graph_compiled_rejected_on_metal() {
        let mut req = ExecRequest::new(problem(), "k", Backend::Metal, DeviceId::new("0"));
        req.baseline_kind = BaselineKind::GraphCompiled;
        assert!(matches!(req.validate(), Err(ExecError::InvalidRequest(_))));
        req.backend = Backend::Cuda;
        assert!(req.validate().is_ok());
    }

    #[test]
    fn baseline_cache_reuses_first_measurement() {
        let cache = BaselineCache::new(
            Counting {
                calls: AtomicUsize::new(0),
                fail_first: false,
            },
            false,
        );
        let req = ExecRequest::new(problem(), "k", Backend::Cuda, DeviceId::new("0"));
        let a = cache.execute(&req).unwrap();
        let b = cache.execute(&req).unwrap();
        assert_eq!(a.baseline_samples_ns, b.baseline_samples_ns);
        assert_eq!(cache.cached_entries(), 1);

        let bypass = BaselineCache::new(
            Counting {
                calls: AtomicUsize::new(0),
                fail_first: false,
            },
            true,
        );
        let a = bypass.execute(&req).unwrap();
        let b = bypass.execute(&req).unwrap();
        assert_ne!(a.baseline_samples_ns, b.baseline_samples_ns);
    }

    #[test]
    fn fingerprint_ignores_device() {
        let a = ExecRequest::new(problem(), "k", Backend::Cuda, DeviceId::new("0"));
        let mut b = a.clone();
        b.device = DeviceId::new("3");
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.candidate_source.push(' ');
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn tail_respects_char_boundaries() {
        assert_eq!(tail("héllo", 4), "llo");
        assert_eq!(tail("abc", 10), "abc");
    }
}
