use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use kforge::agents::{self, Agent, HttpClient, MockProvider, ModelClient, Provider, ProviderLimits, ProviderProfile};
use kforge::config::{ExecutorKind, RunConfigFile};
use kforge::executor::{
    self, BaselineCache, DevicePool, ExecError, ExecRequest, Executor, MockExecutor, MockOutcome, SubprocessExecutor,
};
use kforge::metrics;
use kforge::orchestrator::{run_suite, LoopDeps, SuiteError, SuiteOptions, SystemClock};
use kforge::problem::{load_problem_set, Manifest, ReferenceCorpus};
use kforge::prompt::{OneShotExample, PromptSpec, TemplateSet};
use kforge::sim;
use kforge::verify::{classify, reduce_timing};
use kforge::{Backend, DeviceId, ExecState};

use crate::{
    FixturesAction, FixturesArgs, ListFormat, ProblemsArgs, ReportArgs, ReportFormat, RunArgs, TemplatesAction,
    TemplatesArgs,
};

/// Command failure, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, configuration or inputs (exit 2).
    Usage(String),
    /// The harness failed while running (exit 1).
    Infrastructure(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Infrastructure(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Infrastructure(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn infra(e: impl fmt::Display) -> Failure {
    Failure::Infrastructure(e.to_string())
}

fn parse_model(spec: &str) -> Result<ProviderProfile, Failure> {
    let (provider, model) = match spec.split_once(':') {
        Some((p, m)) => (p, Some(m)),
        None => (spec, None),
    };
    let mut profile = ProviderProfile::replication(provider.parse::<Provider>().map_err(usage)?);
    if let Some(m) = model.filter(|m| !m.is_empty()) {
        profile.model_name = m.to_string();
    }
    Ok(profile)
}

/// The configuration file (or defaults) with command-line overrides.
pub fn effective_config(a: &RunArgs) -> Result<RunConfigFile, Failure> {
    let mut c = match &a.config {
        Some(path) => RunConfigFile::load(path).map_err(usage)?,
        None => RunConfigFile::default(),
    };
    if let Some(b) = &a.backend {
        c.run.backend = b.parse::<Backend>().map_err(usage)?;
    }
    if let Some(p) = &a.problems {
        c.problems = p.clone();
    }
    if !a.problem_ids.is_empty() {
        c.problem_ids = a.problem_ids.clone();
    }
    if let Some(m) = &a.mode {
        c.run.mode = m.parse().map_err(usage)?;
        if c.run.mode == kforge::orchestrator::LoopMode::SingleShot && a.iterations.is_none() {
            c.run.num_iterations = 1;
        }
    }
    if let Some(n) = a.iterations {
        c.run.num_iterations = n;
    }
    c.run.strategy.use_reference |= a.use_reference;
    c.run.strategy.use_profiling |= a.use_profiling;
    if let Some(r) = &a.references {
        c.references = Some(r.clone());
    }
    if let Some(m) = &a.model {
        c.run.generation_profile = parse_model(m)?;
    }
    if let Some(m) = &a.analysis_model {
        c.run.analysis_profile = Some(parse_model(m)?);
    }
    if let Some(d) = &a.devices {
        c.devices = d.iter().map(|s| s.trim().to_string()).collect();
    }
    if let Some(p) = a.parallelism {
        c.parallelism = Some(p);
    }
    if let Some(s) = a.seed {
        c.run.seed = s;
    }
    if let Some(r) = &a.runs_dir {
        c.runs_dir = r.clone();
    }
    if let Some(e) = &a.executor {
        c.executor.kind = match e.as_str() {
            "mock" => ExecutorKind::Mock,
            "shim" => ExecutorKind::Shim,
            other => return Err(usage(format!("unknown executor '{other}' (expected mock or shim)"))),
        };
    }
    if let Some(s) = &a.shim {
        c.executor.shim_program = Some(s.clone());
    }
    if !a.shim_args.is_empty() {
        c.executor.shim_args = a.shim_args.clone();
    }
    if let Some(s) = &a.mock_executor_script {
        c.executor.mock_script = Some(s.clone());
    }
    if let Some(s) = &a.mock_generation_script {
        c.providers.generation_script = Some(s.clone());
    }
    if let Some(s) = &a.mock_analysis_script {
        c.providers.analysis_script = Some(s.clone());
    }
    c.validate()
        .map_err(|errs| Failure::Usage(format!("invalid configuration:\n  - {}", errs.join("\n  - "))))?;
    Ok(c)
}

fn client_for(profile: &ProviderProfile, script: Option<&Path>, fallback: &str) -> Result<Arc<dyn ModelClient>, Failure> {
    Ok(match profile.provider {
        Provider::Mock => {
            let script = match script {
                Some(p) => agents::MockScript::load(p).map_err(usage)?,
                None => agents::MockScript::always(fallback),
            };
            Arc::new(MockProvider::new(script))
        }
        _ => Arc::new(HttpClient::new(Duration::from_secs(600))),
    })
}

fn build_executor(c: &RunConfigFile, run_root: &Path) -> Result<Box<dyn Executor>, Failure> {
    let bypass = c.executor.bypass_baseline_cache;
    Ok(match c.executor.kind {
        ExecutorKind::Mock => {
            let script = match &c.executor.mock_script {
                Some(p) => executor::MockScript::load(p).map_err(usage)?,
                None => executor::MockScript {
                    entries: Vec::new(),
                    default: Some(MockOutcome::correct(1.0)),
                },
            };
            Box::new(BaselineCache::new(MockExecutor::new(script), bypass))
        }
        ExecutorKind::Shim => {
            let program = c.executor.shim_program.clone().expect("validated");
            let work = c.executor.work_dir.clone().unwrap_or_else(|| run_root.join("work"));
            Box::new(BaselineCache::new(
                SubprocessExecutor::new(program, c.executor.shim_args.clone(), work),
                bypass,
            ))
        }
    })
}

pub fn run(a: RunArgs) -> Result<(), Failure> {
    let c = effective_config(&a)?;
    if a.print_config {
        print!("{}", c.to_toml().map_err(infra)?);
        return Ok(());
    }
    let backend = c.run.backend;
    let mut set = load_problem_set(&c.problems, backend).map_err(usage)?;
    if !c.problem_ids.is_empty() {
        let unknown: Vec<&String> = c.problem_ids.iter().filter(|id| set.get(id).is_none()).collect();
        if !unknown.is_empty() {
            return Err(usage(format!(
                "unknown or excluded problem ids for {backend}: {}",
                unknown.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            )));
        }
        set.retain_ids(&c.problem_ids);
    }
    let references = match (c.run.strategy.use_reference, &c.references) {
        (true, Some(dir)) => Some(ReferenceCorpus::load(dir).map_err(usage)?),
        (true, None) => return Err(usage("--use-reference needs --references DIR")),
        (false, _) => None,
    };
    let templates = match &c.templates {
        Some(dir) => TemplateSet::load_dir(dir).map_err(usage)?,
        None => TemplateSet::bundled(),
    };
    let example = OneShotExample::vector_add(backend);
    let limits = ProviderLimits::new(c.providers.concurrency);
    let fallback = kforge::agents::fence(&example.solution_source, "python");
    let generator = Agent::new(
        c.run.generation_profile.clone(),
        client_for(&c.run.generation_profile, c.providers.generation_script.as_deref(), &fallback)?,
        &limits,
    );
    let analysis_profile = c.run.analysis_profile().clone();
    let analyzer = Agent::new(
        analysis_profile.clone(),
        client_for(
            &analysis_profile,
            c.providers.analysis_script.as_deref(),
            "Coalesce the global memory accesses of the hottest kernel.",
        )?,
        &limits,
    );
    let executor = build_executor(&c, &c.runs_dir)?;
    let pool = DevicePool::new(c.devices.iter().map(|d| DeviceId::new(d.clone()))).map_err(usage)?;
    let clock = SystemClock;
    let deps = LoopDeps {
        generator: &generator,
        analyzer: &analyzer,
        executor: executor.as_ref(),
        templates: &templates,
        example: &example,
        references: references.as_ref(),
        pool: &pool,
        clock: &clock,
        run_id: "",
    };
    let mut opts = SuiteOptions::new(&c.runs_dir);
    opts.resume = a.resume.clone();
    opts.parallelism = c.parallelism();
    opts.settings = serde_json::json!({
        "devices": c.devices,
        "parallelism": c.parallelism(),
        "executor": c.executor,
        "providers": c.providers,
        "problem_ids": c.problem_ids,
    });
    let (dir, summary) = run_suite(&set, &c.run, &deps, &opts).map_err(|e| match e {
        SuiteError::Io(m) => Failure::Infrastructure(m),
        other => usage(other),
    })?;
    std::fs::write(dir.join("kforge.toml"), c.to_toml().map_err(infra)?).map_err(infra)?;

    println!("run {} -> {}", summary.run_id, dir.display());
    println!(
        "problems {}, completed {} (resumed {}), aborted {}",
        summary.problems,
        summary.completed,
        summary.resumed,
        summary.aborted.len()
    );
    for (level, n) in summary.counts_by_level.iter().filter(|(_, n)| **n > 0) {
        println!("  level {level}: {} of {n} correct", summary.correct_by_level.get(level).copied().unwrap_or(0));
    }
    if !summary.aborted.is_empty() {
        for a in &summary.aborted {
            println!("  aborted {}: {}", a.problem_id, a.reason);
        }
        return Err(Failure::Infrastructure(format!(
            "{} problem(s) aborted on infrastructure errors; rerun with --resume {} to retry them",
            summary.aborted.len(),
            summary.run_id
        )));
    }
    Ok(())
}

pub fn report(a: ReportArgs) -> Result<(), Failure> {
    let thresholds = metrics::parse_thresholds(&a.thresholds).map_err(usage)?;
    if !a.run.join(kforge::orchestrator::PROBLEMS_FILE).is_file() {
        return Err(usage(format!("{} is not a run directory", a.run.display())));
    }
    let report = metrics::aggregate(&a.run, &thresholds).map_err(infra)?;
    let text = if a.distribution {
        report.speedup_distribution_csv()
    } else {
        match a.format {
            ReportFormat::Table => report.to_table(),
            ReportFormat::Json => report.to_json(),
            ReportFormat::Csv => report.to_csv(),
        }
    };
    print!("{text}");
    Ok(())
}

pub fn problems(a: ProblemsArgs) -> Result<(), Failure> {
    let backend: Backend = a.backend.parse().map_err(usage)?;
    let manifest = Manifest::load(&a.problems).map_err(usage)?;
    let set = manifest.for_backend(backend);
    match a.format {
        ListFormat::Json => {
            let v = serde_json::json!({
                "backend": backend,
                "counts_by_level": set.counts_by_level,
                "problems": set.problems.iter().map(|p| serde_json::json!({"id": p.id, "level": p.level})).collect::<Vec<_>>(),
                "excluded": set.excluded,
            });
            println!("{}", serde_json::to_string_pretty(&v).map_err(infra)?);
        }
        ListFormat::Table => {
            println!("{backend}: {} problems", set.len());
            for (level, n) in &set.counts_by_level {
                println!("  level {level}: {n}");
            }
            if !set.excluded.is_empty() {
                println!("excluded ({}):", set.excluded.len());
                for id in &set.excluded {
                    println!("  {id}");
                }
            }
        }
    }
    Ok(())
}

pub fn templates(a: TemplatesArgs) -> Result<(), Failure> {
    match a.action {
        TemplatesAction::Export { dir } => {
            TemplateSet::export_bundled(&dir).map_err(infra)?;
            println!("wrote templates to {}", dir.display());
        }
        TemplatesAction::Check { dir } => {
            TemplateSet::load_dir(&dir).map_err(usage)?;
            println!("{}: ok", dir.display());
        }
        TemplatesAction::Render {
            problem_id,
            problems,
            backend,
            templates,
        } => {
            let backend: Backend = backend.parse().map_err(usage)?;
            let set = load_problem_set(&problems, backend).map_err(usage)?;
            let problem = set
                .get(&problem_id)
                .ok_or_else(|| usage(format!("no problem '{problem_id}' for {backend}")))?;
            let t = match templates {
                Some(dir) => TemplateSet::load_dir(&dir).map_err(usage)?,
                None => TemplateSet::bundled(),
            };
            let example = OneShotExample::vector_add(backend);
            let prompt = t
                .render_generation(&PromptSpec::single_shot(backend, problem, &example))
                .map_err(usage)?;
            print!("{}", prompt.text);
        }
    }
    Ok(())
}

fn write_json(path: &Path, value: Result<serde_json::Value, serde_json::Error>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(&value.map_err(infra)?).map_err(infra)?;
    std::fs::write(path, text + "\n").map_err(|e| infra(format!("cannot write {}: {e}", path.display())))
}

pub fn fixtures(a: FixturesArgs) -> Result<(), Failure> {
    match a.action {
        FixturesAction::MockScripts { steps, out } => {
            let steps = sim::parse_steps(&steps).map_err(usage)?;
            if steps.is_empty() {
                return Err(usage("--steps lists no steps"));
            }
            std::fs::create_dir_all(&out).map_err(|e| infra(format!("cannot create {}: {e}", out.display())))?;
            let generation = out.join("generation.json");
            let analysis = out.join("analysis.json");
            let executor = out.join("executor.json");
            write_json(&generation, serde_json::to_value(sim::generation_script(&steps)))?;
            write_json(&analysis, serde_json::to_value(agents::MockScript::always(sim::ANALYSIS_ANSWER)))?;
            write_json(&executor, serde_json::to_value(sim::executor_script(&steps)))?;
            println!("wrote {} step(s) to {}; run them with:", steps.len(), out.display());
            println!(
                "  kforge run --iterations {} --mock-generation-script {} --mock-analysis-script {} --mock-executor-script {}",
                steps.len(),
                generation.display(),
                analysis.display(),
                executor.display()
            );
        }
        FixturesAction::ShimCheck {
            shim,
            shim_args,
            backend,
            device,
            timed_runs,
            timeout,
            work_dir,
        } => {
            let backend: Backend = backend.parse().map_err(usage)?;
            if timed_runs == 0 {
                return Err(usage("--timed-runs must be at least 1"));
            }
            if !(timeout.is_finite() && timeout > 0.0) {
                return Err(usage("--timeout must be a positive number of seconds"));
            }
            let example = OneShotExample::vector_add(backend);
            let mut req = ExecRequest::new(
                Arc::new(sim::demo_problem(backend)),
                example.solution_source.clone(),
                backend,
                DeviceId::new(device),
            );
            req.timing.timed_runs = timed_runs;
            req.timing.warmup_runs = 1;
            req.timeout = Duration::from_secs_f64(timeout);
            let work = work_dir.unwrap_or_else(|| std::env::temp_dir().join("kforge-shim-check"));
            let exec = SubprocessExecutor::new(shim, shim_args, &work);
            let raw = exec.execute(&req).map_err(|e| match e {
                ExecError::Infrastructure(m) => Failure::Infrastructure(format!("shim failed: {m}")),
                other => infra(format!("shim failed: {other}")),
            })?;
            let state = classify(&raw, true);
            println!("state: {}", state.as_str());
            println!("phase reached: {:?}", raw.phase_reached);
            if let Some(class) = &raw.device_class {
                println!("device class: {class}");
            }
            if let (Ok(c), Ok(b)) = (reduce_timing(&raw.candidate_samples_ns), reduce_timing(&raw.baseline_samples_ns)) {
                let s = metrics::speedup(&b, &c).map_err(infra)?;
                println!("speedup: {s:.3} (baseline {:.4} ms, candidate {:.4} ms)", b.mean_ns / 1e6, c.mean_ns / 1e6);
            }
            println!("work dir: {}", work.display());
            if state != ExecState::Correct {
                let transcript = [raw.compile_transcript.trim(), raw.run_transcript.trim()]
                    .into_iter()
                    .filter(|t| !t.is_empty())
                    .collect::<Vec<_>>()
                    .join("\n");
                if !transcript.is_empty() {
                    println!("{transcript}");
                }
                return Err(Failure::Infrastructure(format!(
                    "the example kernel should evaluate as correct, got {}",
                    state.as_str()
                )));
            }
        }
    }
    Ok(())
}
