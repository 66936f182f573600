//! The refinement loop.
//!
//! Each problem runs a functional pass (generate, evaluate, feed the failure
//! back) until a candidate is correct, then an optimization pass that feeds
//! timings and, optionally, a profiler-derived recommendation back to the
//! generation agent. Every generation produces exactly one [`RunRecord`].

mod suite;

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::agents::{extract_code, Agent, AgentError, Candidate, Recommendation};
use crate::backend::{Backend, BaselineKind};
use crate::executor::DevicePool;
use crate::executor::{execute_with_retry, ExecRequest, Executor, Profiling, RawExecResult, TimingConfig};
use crate::problem::{Problem, ReferenceCorpus, ReferenceImpl};
use crate::profiling::{build_bundle, BundleBudget, EvidenceInputs, ProfileBundle};
use crate::prompt::{
    OneShotExample, PriorAttempt, PromptMode, PromptSpec, TemplateSet, TimingSummary, DEFAULT_FEEDBACK_BUDGET,
    DEFAULT_TASK_INSTRUCTIONS,
};
use crate::verify::{classify, reduce_timing, CorrectnessConfig, ExecState, TimingStats};
use crate::{agents::ProviderProfile, metrics};

pub use suite::{
    read_problem_index, run_id, run_suite, AbortedProblem, OutcomeFile, ProblemIndex, ProblemIndexEntry, RunLayout,
    SuiteError, SuiteOptions, SuiteSummary, CONFIG_FILE, OUTCOME_FILE, PROBLEMS_FILE, RECORDS_FILE, SUMMARY_FILE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopMode {
    SingleShot,
    #[default]
    Iterative,
}

impl LoopMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LoopMode::SingleShot => "single_shot",
            LoopMode::Iterative => "iterative",
        }
    }
}

impl fmt::Display for LoopMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LoopMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "single_shot" => Ok(LoopMode::SingleShot),
            "iterative" => Ok(LoopMode::Iterative),
            _ => Err(format!("unknown mode '{s}' (expected single-shot or iterative)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyFlags {
    /// Show a correct solution from another backend.
    pub use_reference: bool,
    /// Capture profiles and ask the analysis agent for a recommendation.
    pub use_profiling: bool,
    /// Keep the first captured profile instead of re-profiling every
    /// correct iteration.
    pub reuse_profile: bool,
}

/// Everything that determines a run's outcome. Its serialized form is part
/// of the run id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoopConfig {
    pub backend: Backend,
    pub num_iterations: u32,
    pub mode: LoopMode,
    pub strategy: StrategyFlags,
    /// Independent chains per problem.
    pub num_samples: u32,
    pub generation_profile: ProviderProfile,
    /// Defaults to the generation profile.
    pub analysis_profile: Option<ProviderProfile>,
    pub seed: u64,
    pub baseline_kind: BaselineKind,
    pub timing: TimingConfig,
    pub correctness: CorrectnessConfig,
    pub timeout_s: f64,
    pub bundle_budget: BundleBudget,
    /// Estimated-token budget for error transcripts in feedback prompts.
    pub feedback_budget: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            backend: Backend::Cuda,
            num_iterations: 5,
            mode: LoopMode::Iterative,
            strategy: StrategyFlags::default(),
            num_samples: 1,
            generation_profile: ProviderProfile::replication(crate::agents::Provider::Mock),
            analysis_profile: None,
            seed: 0,
            baseline_kind: BaselineKind::Eager,
            timing: TimingConfig::default(),
            correctness: CorrectnessConfig::default(),
            timeout_s: crate::executor::DEFAULT_TIMEOUT.as_secs_f64(),
            bundle_budget: BundleBudget::default(),
            feedback_budget: DEFAULT_FEEDBACK_BUDGET,
        }
    }
}

impl LoopConfig {
    pub fn single_shot() -> Self {
        LoopConfig {
            mode: LoopMode::SingleShot,
            num_iterations: 1,
            ..LoopConfig::default()
        }
    }

    pub fn analysis_profile(&self) -> &ProviderProfile {
        self.analysis_profile.as_ref().unwrap_or(&self.generation_profile)
    }

    /// Every problem with the configuration, one message per problem.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if self.num_iterations == 0 {
            errs.push("num_iterations must be at least 1".to_string());
        }
        if self.mode == LoopMode::SingleShot && self.num_iterations != 1 {
            errs.push(format!(
                "single-shot mode runs exactly one iteration (num_iterations = {})",
                self.num_iterations
            ));
        }
        if self.num_samples == 0 {
            errs.push("num_samples must be at least 1".to_string());
        }
        if self.baseline_kind == BaselineKind::GraphCompiled && !self.backend.supports_graph_compiled() {
            errs.push(format!("graph-compiled baseline is not available on {}", self.backend));
        }
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            errs.push(format!("timeout_s must be positive (got {})", self.timeout_s));
        }
        if self.feedback_budget == 0 {
            errs.push("feedback_budget must be at least 1".to_string());
        }
        if let Err(e) = self.timing.validate() {
            errs.push(e);
        }
        if let Err(e) = self.correctness.validate() {
            errs.push(e);
        }
        if let Err(e) = self.generation_profile.validate() {
            errs.push(format!("generation profile: {e}"));
        }
        if let Some(p) = &self.analysis_profile {
            if let Err(e) = p.validate() {
                errs.push(format!("analysis profile: {e}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopPhase {
    Functional,
    Optimization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordTiming {
    pub candidate: TimingStats,
    pub baseline: TimingStats,
    pub speedup: f64,
}

/// One generation and its verdict. Records are append-only; `timing` is
/// present exactly when `exec_state` is correct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem_id: String,
    #[serde(default)]
    pub sample: u32,
    /// 1-based.
    pub iteration: u32,
    pub phase: LoopPhase,
    pub prompt_fingerprint: String,
    pub model_name: String,
    pub exec_state: ExecState,
    #[serde(default)]
    pub candidate_digest: Option<String>,
    #[serde(default)]
    pub timing: Option<RecordTiming>,
    #[serde(default)]
    pub recommendation_digest: Option<String>,
    #[serde(default)]
    pub recommendation: Option<String>,
    /// Tail of the failure transcript fed back to the next iteration.
    #[serde(default)]
    pub feedback: Option<String>,
    #[serde(default)]
    pub artifacts: Vec<PathBuf>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunRecord {
    pub fn speedup(&self) -> Option<f64> {
        self.timing.as_ref().map(|t| t.speedup)
    }
}

/// Timestamp fields, which differ between otherwise identical runs.
pub const TIMESTAMP_FIELDS: [&str; 2] = ["started_at", "finished_at"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestCandidate {
    pub problem_id: String,
    #[serde(default)]
    pub sample: u32,
    pub candidate_digest: String,
    pub speedup: f64,
    pub iteration: u32,
}

/// Fastest correct record; ties go to the earliest.
pub fn best_candidate<'a>(records: impl IntoIterator<Item = &'a RunRecord>) -> Option<BestCandidate> {
    let mut best: Option<BestCandidate> = None;
    for r in records {
        let (Some(speedup), Some(digest)) = (r.speedup(), &r.candidate_digest) else { continue };
        if r.exec_state != ExecState::Correct {
            continue;
        }
        if best.as_ref().is_none_or(|b| speedup > b.speedup) {
            best = Some(BestCandidate {
                problem_id: r.problem_id.clone(),
                sample: r.sample,
                candidate_digest: digest.clone(),
                speedup,
                iteration: r.iteration,
            });
        }
    }
    best
}

/// Result of running one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemOutcome {
    pub problem_id: String,
    pub records: Vec<RunRecord>,
    pub best: Option<BestCandidate>,
    /// Generation calls made, per chain.
    pub generations: Vec<u32>,
    /// Set when an infrastructure fault stopped the problem.
    pub aborted: Option<String>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Source of record timestamps.
pub trait Clock: Send + Sync {
    fn now(&self) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> String {
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
    }
}

/// Always reports the same instant; for tests and replays.
#[derive(Debug, Clone)]
pub struct FixedClock(pub String);

impl Default for FixedClock {
    fn default() -> Self {
        FixedClock("1970-01-01T00:00:00.000Z".into())
    }
}

impl Clock for FixedClock {
    fn now(&self) -> String {
        self.0.clone()
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot store run record: {0}")]
pub struct SinkError(pub String);

/// Where records (and the candidates they refer to) are persisted. The
/// returned record is what was stored, e.g. with artifact paths rewritten.
pub trait RecordSink {
    fn record(&mut self, record: RunRecord, candidate: Option<&Candidate>) -> Result<RunRecord, SinkError>;
}

impl RecordSink for Vec<RunRecord> {
    fn record(&mut self, record: RunRecord, _: Option<&Candidate>) -> Result<RunRecord, SinkError> {
        self.push(record.clone());
        Ok(record)
    }
}

/// Discards records; the outcome still carries them.
#[derive(Debug, Default)]
pub struct NullSink;

impl RecordSink for NullSink {
    fn record(&mut self, record: RunRecord, _: Option<&Candidate>) -> Result<RunRecord, SinkError> {
        Ok(record)
    }
}

/// Collaborators of the loop.
#[derive(Clone, Copy)]
pub struct LoopDeps<'a> {
    pub generator: &'a Agent,
    pub analyzer: &'a Agent,
    pub executor: &'a dyn Executor,
    pub templates: &'a TemplateSet,
    pub example: &'a OneShotExample,
    pub references: Option<&'a ReferenceCorpus>,
    pub pool: &'a DevicePool,
    pub clock: &'a dyn Clock,
    /// Run id for log lines.
    pub run_id: &'a str,
}

struct Evaluated {
    state: ExecState,
    transcript: String,
    timing: Option<RecordTiming>,
    raw: Option<RawExecResult>,
}

fn evaluate(problem: &Arc<Problem>, source: &str, profiling: Profiling, cfg: &LoopConfig, deps: &LoopDeps<'_>) -> Result<Evaluated, String> {
    let lease = deps.pool.lease();
    let mut req = ExecRequest::new(Arc::clone(problem), source, cfg.backend, lease.device().clone());
    req.baseline_kind = cfg.baseline_kind;
    req.timing = cfg.timing;
    req.correctness = cfg.correctness;
    req.profiling = profiling;
    req.timeout = Duration::from_secs_f64(cfg.timeout_s);
    let raw = execute_with_retry(deps.executor, &req).map_err(|e| e.to_string())?;
    drop(lease);

    let mut state = classify(&raw, true);
    let mut transcript = raw.failure_transcript().to_string();
    let mut timing = None;
    if state == ExecState::OutputMismatch && transcript.trim().is_empty() {
        if let Some(c) = &raw.comparison {
            transcript = format!(
                "output mismatch: shapes match = {}, max abs deviation = {:e}, max rel deviation = {:e} (atol {}, rtol {})\ncandidate shapes {:?}, reference shapes {:?}",
                c.shape_ok, c.max_abs_dev, c.max_rel_dev, cfg.correctness.atol, cfg.correctness.rtol,
                raw.candidate_shapes, raw.reference_shapes
            );
        }
    }
    if state == ExecState::Correct {
        let measured = reduce_timing(&raw.candidate_samples_ns)
            .map_err(|e| format!("candidate timing: {e}"))
            .and_then(|c| {
                reduce_timing(&raw.baseline_samples_ns)
                    .map_err(|e| format!("baseline timing: {e}"))
                    .map(|b| (c, b))
            })
            .and_then(|(c, b)| {
                metrics::speedup(&b, &c)
                    .map(|s| RecordTiming {
                        candidate: c,
                        baseline: b,
                        speedup: s,
                    })
                    .map_err(|e| e.to_string())
            });
        match measured {
            Ok(t) => {
                transcript.clear();
                timing = Some(t);
            }
            Err(e) => {
                log::warn!("problem={} event=measurement_error reason={e}", problem.id);
                state = ExecState::RuntimeError;
                transcript = format!("timing measurement invalid: {e}");
            }
        }
    }
    Ok(Evaluated {
        state,
        transcript,
        timing,
        raw: Some(raw),
    })
}

struct Analysis {
    recommendation: Option<Recommendation>,
    notes: Vec<String>,
}

fn analyze(
    candidate: &Candidate,
    raw: &RawExecResult,
    cached: &mut Option<ProfileBundle>,
    cfg: &LoopConfig,
    deps: &LoopDeps<'_>,
) -> Analysis {
    let mut notes = Vec::new();
    let bundle = match cached.clone() {
        Some(b) if cfg.strategy.reuse_profile => b,
        _ => {
            if raw.profiling_unavailable {
                notes.push("profiling unavailable on this host".to_string());
            }
            let inputs = match EvidenceInputs::collect(&raw.profile_artifacts) {
                Ok(i) => i,
                Err(e) => {
                    notes.push(format!("cannot read profile artifacts: {e}"));
                    return Analysis {
                        recommendation: None,
                        notes,
                    };
                }
            };
            match build_bundle(&inputs, cfg.bundle_budget, cfg.backend) {
                Ok(b) => {
                    *cached = Some(b.clone());
                    b
                }
                Err(e) => {
                    notes.push(e.to_string());
                    return Analysis {
                        recommendation: None,
                        notes,
                    };
                }
            }
        }
    };
    let fingerprint = candidate.fingerprint();
    let attempt = |b: &ProfileBundle| -> Result<Recommendation, AgentError> {
        let prompt = deps
            .templates
            .render_analysis(cfg.backend, candidate, b)
            .map_err(|e| AgentError::Profile(e.to_string()))?;
        deps.analyzer.analyze_performance(&prompt, &fingerprint)
    };
    let recommendation = match attempt(&bundle) {
        Ok(r) => Some(r),
        Err(AgentError::Capability { .. }) => {
            let text_only = bundle.text_only();
            if text_only.items.is_empty() {
                notes.push("analysis model is text-only and the evidence is screenshots only".to_string());
                None
            } else {
                notes.push("analysis model is text-only; screenshots dropped".to_string());
                attempt(&text_only).map_err(|e| notes.push(format!("analysis failed: {e}"))).ok()
            }
        }
        Err(e) => {
            notes.push(format!("analysis failed: {e}"));
            None
        }
    };
    Analysis { recommendation, notes }
}

struct Chain<'a, 'd> {
    problem: &'a Arc<Problem>,
    sample: u32,
    reference: Option<&'a ReferenceImpl>,
    cfg: &'a LoopConfig,
    deps: &'a LoopDeps<'d>,
}

impl Chain<'_, '_> {
    /// Runs one chain; `Err` carries the abort reason of an infrastructure
    /// fault. `generations` counts model calls made.
    fn run(&self, sink: &mut dyn RecordSink, records: &mut Vec<RunRecord>, generations: &mut u32) -> Result<(), String> {
        let cfg = self.cfg;
        let deps = self.deps;
        let iterations = match cfg.mode {
            LoopMode::SingleShot => 1,
            LoopMode::Iterative => cfg.num_iterations,
        };
        let mut prior: Option<PriorAttempt> = None;
        let mut last_correct: Option<(Candidate, RawExecResult)> = None;
        let mut reached_correct = false;
        let mut cached_bundle: Option<ProfileBundle> = None;

        for iteration in 1..=iterations {
            let started_at = deps.clock.now();
            let phase = if reached_correct {
                LoopPhase::Optimization
            } else {
                LoopPhase::Functional
            };
            let mut notes = Vec::new();
            let recommendation = match &last_correct {
                Some((cand, raw)) if cfg.strategy.use_profiling => {
                    let a = analyze(cand, raw, &mut cached_bundle, cfg, deps);
                    notes.extend(a.notes);
                    a.recommendation
                }
                _ => None,
            };

            let spec = PromptSpec {
                mode: if prior.is_some() {
                    PromptMode::Refinement
                } else {
                    PromptMode::SingleShot
                },
                backend: cfg.backend,
                problem: self.problem,
                example: deps.example,
                reference: self.reference,
                prior: prior.as_ref(),
                recommendation: recommendation.as_ref(),
                task_instructions: DEFAULT_TASK_INSTRUCTIONS,
                feedback_budget: cfg.feedback_budget,
            };
            let prompt = deps
                .templates
                .render_generation(&spec)
                .map_err(|e| format!("prompt rendering failed: {e}"))?;

            *generations += 1;
            let (candidate, generation_error) = match deps.generator.generate(&prompt) {
                Ok(resp) => (
                    extract_code(&resp.raw_text).map(|e| Candidate::new(e, iteration, prompt.fingerprint.clone())),
                    None,
                ),
                Err(e) => (None, Some(e.to_string())),
            };
            let profiling = if cfg.strategy.use_profiling && !(cfg.strategy.reuse_profile && cached_bundle.is_some()) {
                Profiling::Capture
            } else {
                Profiling::Off
            };
            let evaluated = match &candidate {
                Some(c) => evaluate(self.problem, &c.source, profiling, cfg, deps)?,
                None => Evaluated {
                    state: ExecState::GenerationFailure,
                    transcript: generation_error.unwrap_or_default(),
                    timing: None,
                    raw: None,
                },
            };
            log::info!(
                "run={} problem={} sample={} iter={iteration} event=evaluated phase={:?} state={}{}",
                deps.run_id,
                self.problem.id,
                self.sample,
                phase,
                evaluated.state,
                evaluated
                    .timing
                    .as_ref()
                    .map(|t| format!(" speedup={:.3}", t.speedup))
                    .unwrap_or_default()
            );
            let artifacts = evaluated.raw.as_ref().map(|r| r.profile_artifacts.clone()).unwrap_or_default();
            let record = RunRecord {
                problem_id: self.problem.id.clone(),
                sample: self.sample,
                iteration,
                phase,
                prompt_fingerprint: prompt.fingerprint.clone(),
                model_name: deps.generator.profile.model_name.clone(),
                exec_state: evaluated.state,
                candidate_digest: candidate.as_ref().map(Candidate::fingerprint),
                timing: evaluated.timing.clone(),
                recommendation_digest: recommendation.as_ref().map(|r| crate::digest::sha256_hex(&r.text)),
                recommendation: recommendation.as_ref().map(|r| r.text.clone()),
                feedback: (!evaluated.transcript.is_empty())
                    .then(|| crate::prompt::truncate_feedback(&evaluated.transcript, 500)),
                artifacts,
                notes,
                started_at,
                finished_at: deps.clock.now(),
            };
            let stored = sink.record(record, candidate.as_ref()).map_err(|e| e.to_string())?;
            records.push(stored);

            prior = Some(PriorAttempt {
                source: candidate.as_ref().map(|c| c.source.clone()),
                state: evaluated.state,
                transcript: evaluated.transcript,
                timing: evaluated.timing.as_ref().map(|t| TimingSummary {
                    candidate_mean_ns: t.candidate.mean_ns,
                    baseline_mean_ns: t.baseline.mean_ns,
                    speedup: t.speedup,
                }),
            });
            last_correct = match (evaluated.state, candidate, evaluated.raw) {
                (ExecState::Correct, Some(c), Some(raw)) => {
                    reached_correct = true;
                    Some((c, raw))
                }
                _ => None,
            };
        }
        Ok(())
    }
}

/// Runs every chain for `problem`. Infrastructure faults stop the problem
/// and are reported in [`ProblemOutcome::aborted`]; they never panic.
pub fn run_problem(problem: &Problem, cfg: &LoopConfig, deps: &LoopDeps<'_>, sink: &mut dyn RecordSink) -> ProblemOutcome {
    let problem = Arc::new(problem.clone());
    let mut outcome = ProblemOutcome {
        problem_id: problem.id.clone(),
        records: Vec::new(),
        best: None,
        generations: Vec::new(),
        aborted: None,
        notes: Vec::new(),
    };
    let reference = if cfg.strategy.use_reference {
        let r = deps.references.and_then(|c| c.get(&problem.id));
        if r.is_none() {
            log::warn!("problem={} event=no_reference", problem.id);
            outcome
                .notes
                .push(format!("no reference available for {}; using the baseline prompt", problem.id));
        }
        r
    } else {
        None
    };
    for sample in 0..cfg.num_samples.max(1) {
        let chain = Chain {
            problem: &problem,
            sample,
            reference,
            cfg,
            deps,
        };
        let mut generations = 0;
        let result = chain.run(sink, &mut outcome.records, &mut generations);
        outcome.generations.push(generations);
        if let Err(reason) = result {
            log::error!(
                "run={} problem={} sample={sample} event=aborted reason={reason}",
                deps.run_id,
                problem.id
            );
            outcome.aborted = Some(reason);
            break;
        }
    }
    outcome.best = best_candidate(&outcome.records);
    outcome
}

#[cfg(test)]
mod tests;
