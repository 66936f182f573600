//! Running a whole problem set into a run directory.
//!
//! ```text
//! runs/<run-id>/config.json
//! runs/<run-id>/problems.json
//! runs/<run-id>/<problem>/records.jsonl
//! runs/<run-id>/<problem>/candidates/iter<i>.src
//! runs/<run-id>/<problem>/artifacts/iter<i>/...
//! runs/<run-id>/<problem>/outcome.json
//! runs/<run-id>/summary.json
//! ```
//!
//! A problem is complete once its `outcome.json` exists. Resuming skips
//! complete problems and restarts the others from scratch.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{run_problem, BestCandidate, LoopConfig, LoopDeps, RecordSink, RunRecord, SinkError};
use crate::agents::Candidate;
use crate::backend::Backend;
use crate::digest;
use crate::jsonl;
use crate::problem::{slugify, Level, ProblemSet};
use crate::verify::ExecState;

pub const CONFIG_FILE: &str = "config.json";
pub const PROBLEMS_FILE: &str = "problems.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const OUTCOME_FILE: &str = "outcome.json";

/// Paths inside one run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunLayout { root: root.into() }
    }

    pub fn config(&self) -> PathBuf {
        self.root.join(CONFIG_FILE)
    }

    pub fn problems(&self) -> PathBuf {
        self.root.join(PROBLEMS_FILE)
    }

    pub fn summary(&self) -> PathBuf {
        self.root.join(SUMMARY_FILE)
    }

    pub fn problem_dir(&self, problem_id: &str) -> PathBuf {
        self.root.join(slugify(problem_id))
    }

    pub fn records(&self, problem_id: &str) -> PathBuf {
        self.problem_dir(problem_id).join(RECORDS_FILE)
    }

    pub fn outcome(&self, problem_id: &str) -> PathBuf {
        self.problem_dir(problem_id).join(OUTCOME_FILE)
    }
}

/// Problems a run covers, so reports know each level's denominator even
/// for problems that never produced a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemIndex {
    pub run_id: String,
    pub backend: Backend,
    pub problem_set_digest: String,
    pub problems: Vec<ProblemIndexEntry>,
    /// Unsupported on this backend; not part of any denominator.
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemIndexEntry {
    pub id: String,
    pub level: Level,
}

pub fn read_problem_index(run_dir: &Path) -> Result<ProblemIndex, String> {
    let path = run_dir.join(PROBLEMS_FILE);
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StoredConfig {
    run_id: String,
    problem_set_digest: String,
    #[serde(rename = "loop")]
    loop_cfg: LoopConfig,
    /// The effective settings as given by the caller, echoed verbatim.
    #[serde(default)]
    settings: serde_json::Value,
}

/// Written when a problem finishes without an infrastructure fault.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFile {
    pub problem_id: String,
    pub records: usize,
    pub generations: Vec<u32>,
    pub best: Option<BestCandidate>,
    pub final_state: Option<ExecState>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbortedProblem {
    pub problem_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub run_id: String,
    pub backend: Backend,
    pub problems: usize,
    pub completed: usize,
    /// Completed in an earlier invocation and skipped this time.
    pub resumed: usize,
    pub aborted: Vec<AbortedProblem>,
    pub correct_by_level: BTreeMap<Level, usize>,
    pub counts_by_level: BTreeMap<Level, usize>,
    pub best: Vec<BestCandidate>,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error("parallelism {requested} exceeds the device pool size {pool}")]
    Parallelism { requested: usize, pool: usize },
    #[error("refusing to resume: {0}")]
    ResumeMismatch(String),
    #[error("run directory {0} already exists; pass its run id to resume it")]
    Exists(PathBuf),
    #[error("{0}")]
    Io(String),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> SuiteError + '_ {
    move |e| SuiteError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub runs_root: PathBuf,
    pub resume: Option<String>,
    pub parallelism: usize,
    /// Echoed into `config.json`; not part of the run identity.
    pub settings: serde_json::Value,
}

impl SuiteOptions {
    pub fn new(runs_root: impl Into<PathBuf>) -> Self {
        SuiteOptions {
            runs_root: runs_root.into(),
            resume: None,
            parallelism: 1,
            settings: serde_json::Value::Null,
        }
    }
}

/// Run identity: digest of the loop configuration, the problem set and the
/// seed.
pub fn run_id(cfg: &LoopConfig, problems: &ProblemSet) -> String {
    let cfg_json = serde_json::to_string(cfg).expect("config serializes");
    let full = digest::sha256_parts([cfg_json.as_str(), problems.digest.as_str(), &cfg.seed.to_string()]);
    digest::short(&full, 16).to_string()
}

/// Persists records, candidates and artifacts under one problem directory.
struct DirSink {
    dir: PathBuf,
}

fn copy_tree(src: &Path, dst: &Path) -> std::io::Result<()> {
    if src.is_dir() {
        fs::create_dir_all(dst)?;
        let mut entries: Vec<_> = fs::read_dir(src)?.filter_map(Result::ok).collect();
        entries.sort_by_key(|e| e.file_name());
        for e in entries {
            copy_tree(&e.path(), &dst.join(e.file_name()))?;
        }
        Ok(())
    } else {
        fs::copy(src, dst).map(|_| ())
    }
}

impl RecordSink for DirSink {
    fn record(&mut self, mut record: RunRecord, candidate: Option<&Candidate>) -> Result<RunRecord, SinkError> {
        let tag = if record.sample == 0 {
            format!("iter{}", record.iteration)
        } else {
            format!("s{}-iter{}", record.sample, record.iteration)
        };
        let err = |e: std::io::Error| SinkError(e.to_string());
        if let Some(c) = candidate {
            let dir = self.dir.join("candidates");
            fs::create_dir_all(&dir).map_err(err)?;
            fs::write(dir.join(format!("{tag}.src")), &c.source).map_err(err)?;
        }
        let mut stored = Vec::new();
        for src in &record.artifacts {
            let name = src.file_name().map(|n| n.to_os_string()).unwrap_or_default();
            let rel = Path::new("artifacts").join(&tag).join(&name);
            let dst = self.dir.join(&rel);
            if let Some(parent) = dst.parent() {
                fs::create_dir_all(parent).map_err(err)?;
            }
            match copy_tree(src, &dst) {
                Ok(()) => stored.push(rel),
                Err(e) => {
                    record.notes.push(format!("artifact {} not copied: {e}", src.display()));
                    stored.push(src.clone());
                }
            }
        }
        record.artifacts = stored;
        jsonl::append(&self.dir.join(RECORDS_FILE), &record).map_err(|e| SinkError(e.to_string()))?;
        Ok(record)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SuiteError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| SuiteError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(io(path))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, SuiteError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(|e| SuiteError::Io(format!("{}: {e}", path.display())))
}

enum Status {
    Done(OutcomeFile),
    Resumed(OutcomeFile),
    Aborted(String),
}

/// Runs every problem, at most `parallelism` at a time, and writes the
/// suite summary. Returns the run directory and summary.
pub fn run_suite(
    problems: &ProblemSet,
    cfg: &LoopConfig,
    deps: &LoopDeps<'_>,
    opts: &SuiteOptions,
) -> Result<(PathBuf, SuiteSummary), SuiteError> {
    cfg.validate().map_err(SuiteError::Config)?;
    if problems.backend != cfg.backend {
        return Err(SuiteError::Config(vec![format!(
            "problem set was loaded for {} but the run targets {}",
            problems.backend, cfg.backend
        )]));
    }
    if opts.parallelism == 0 || opts.parallelism > deps.pool.size() {
        return Err(SuiteError::Parallelism {
            requested: opts.parallelism,
            pool: deps.pool.size(),
        });
    }
    let id = run_id(cfg, problems);
    if let Some(r) = &opts.resume {
        if *r != id {
            return Err(SuiteError::ResumeMismatch(format!(
                "run {r} was started with a different configuration or problem set (this configuration is run {id})"
            )));
        }
    }
    let layout = RunLayout::new(opts.runs_root.join(&id));
    let stored = StoredConfig {
        run_id: id.clone(),
        problem_set_digest: problems.digest.clone(),
        loop_cfg: cfg.clone(),
        settings: opts.settings.clone(),
    };
    if layout.root.exists() {
        if opts.resume.is_none() {
            return Err(SuiteError::Exists(layout.root.clone()));
        }
        let previous: StoredConfig = read_json(&layout.config())?;
        if previous.loop_cfg != stored.loop_cfg || previous.problem_set_digest != stored.problem_set_digest {
            return Err(SuiteError::ResumeMismatch(format!(
                "{} does not match the current configuration",
                layout.config().display()
            )));
        }
    } else {
        if let Some(r) = &opts.resume {
            return Err(SuiteError::ResumeMismatch(format!(
                "no run directory for {r} under {}",
                opts.runs_root.display()
            )));
        }
        fs::create_dir_all(&layout.root).map_err(io(&layout.root))?;
        write_json(&layout.config(), &stored)?;
        write_json(
            &layout.problems(),
            &ProblemIndex {
                run_id: id.clone(),
                backend: problems.backend,
                problem_set_digest: problems.digest.clone(),
                problems: problems
                    .problems
                    .iter()
                    .map(|p| ProblemIndexEntry {
                        id: p.id.clone(),
                        level: p.level,
                    })
                    .collect(),
                excluded: problems.excluded.clone(),
            },
        )?;
    }
    log::info!(
        "run={id} event=suite_start problems={} parallelism={}",
        problems.len(),
        opts.parallelism
    );

    let deps = LoopDeps { run_id: &id, ..*deps };
    let next = AtomicUsize::new(0);
    let statuses: Mutex<Vec<Option<Status>>> = Mutex::new((0..problems.len()).map(|_| None).collect());
    let fatal: Mutex<Option<SuiteError>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..opts.parallelism.min(problems.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(problem) = problems.problems.get(i) else { break };
                match run_one(problem, cfg, &deps, &layout) {
                    Ok(st) => statuses.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(st),
                    Err(e) => {
                        fatal.lock().unwrap_or_else(|e| e.into_inner()).get_or_insert(e);
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = fatal.into_inner().unwrap_or_else(|e| e.into_inner()) {
        return Err(e);
    }

    let mut summary = SuiteSummary {
        run_id: id.clone(),
        backend: problems.backend,
        problems: problems.len(),
        completed: 0,
        resumed: 0,
        aborted: Vec::new(),
        correct_by_level: Level::ALL.iter().map(|l| (*l, 0)).collect(),
        counts_by_level: problems.counts_by_level.clone(),
        best: Vec::new(),
    };
    let statuses = statuses.into_inner().unwrap_or_else(|e| e.into_inner());
    for (problem, status) in problems.problems.iter().zip(statuses) {
        let outcome = match status {
            Some(Status::Done(o)) => o,
            Some(Status::Resumed(o)) => {
                summary.resumed += 1;
                o
            }
            Some(Status::Aborted(reason)) => {
                summary.aborted.push(AbortedProblem {
                    problem_id: problem.id.clone(),
                    reason,
                });
                continue;
            }
            None => continue,
        };
        summary.completed += 1;
        if let Some(b) = outcome.best {
            *summary.correct_by_level.entry(problem.level).or_default() += 1;
            summary.best.push(b);
        }
    }
    write_json(&layout.summary(), &summary)?;
    log::info!(
        "run={id} event=suite_done completed={} aborted={}",
        summary.completed,
        summary.aborted.len()
    );
    Ok((layout.root, summary))
}

fn run_one(
    problem: &crate::problem::Problem,
    cfg: &LoopConfig,
    deps: &LoopDeps<'_>,
    layout: &RunLayout,
) -> Result<Status, SuiteError> {
    let outcome_path = layout.outcome(&problem.id);
    if outcome_path.exists() {
        log::info!("run={} problem={} event=skipped_complete", deps.run_id, problem.id);
        return read_json(&outcome_path).map(Status::Resumed);
    }
    let dir = layout.problem_dir(&problem.id);
    if dir.exists() {
        log::info!("run={} problem={} event=restart_incomplete", deps.run_id, problem.id);
        fs::remove_dir_all(&dir).map_err(io(&dir))?;
    }
    fs::create_dir_all(&dir).map_err(io(&dir))?;
    let mut sink = DirSink { dir };
    let outcome = run_problem(problem, cfg, deps, &mut sink);
    if let Some(reason) = outcome.aborted {
        return Ok(Status::Aborted(reason));
    }
    let file = OutcomeFile {
        problem_id: problem.id.clone(),
        records: outcome.records.len(),
        generations: outcome.generations,
        best: outcome.best,
        final_state: outcome.records.last().map(|r| r.exec_state),
        notes: outcome.notes,
    };
    write_json(&outcome_path, &file)?;
    Ok(Status::Done(file))
}
