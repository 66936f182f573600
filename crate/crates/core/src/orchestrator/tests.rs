use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use super::*;
use crate::agents::{self, MockProvider, Provider, ProviderLimits};
use crate::executor::{MockExecutor, MockMatch, MockOutcome, MockScript};
use crate::problem::{Level, ProblemSet};
use crate::sim::{self, Step};
use proptest::prelude::*;

fn states(o: &ProblemOutcome) -> Vec<ExecState> {
    o.records.iter().map(|r| r.exec_state).collect()
}

fn phases(o: &ProblemOutcome) -> Vec<LoopPhase> {
    o.records.iter().map(|r| r.phase).collect()
}

#[test]
fn fail_fail_correct_mismatch_correct() {
    use ExecState::*;
    use LoopPhase::*;
    let steps = [
        Step::CompileError,
        Step::CompileError,
        Step::Correct { speedup: 1.3 },
        Step::Mismatch,
        Step::Correct { speedup: 1.6 },
    ];
    let cfg = sim::mock_config(Backend::Cuda, 5);
    let o = sim::replay(&sim::demo_problem(Backend::Cuda), &steps, &cfg);
    assert_eq!(o.aborted, None);
    assert_eq!(
        states(&o),
        [CompilationFailure, CompilationFailure, Correct, OutputMismatch, Correct]
    );
    assert_eq!(phases(&o), [Functional, Functional, Functional, Optimization, Optimization]);
    let best = o.best.unwrap();
    assert_eq!(best.iteration, 5);
    assert!((best.speedup - 1.6).abs() < 1e-9, "{}", best.speedup);
    assert_eq!(o.generations, [5]);
    for r in &o.records {
        assert_eq!(r.timing.is_some(), r.exec_state == Correct);
        assert_eq!(r.feedback.is_some(), r.exec_state != Correct);
    }
}

#[test]
fn single_shot_makes_one_call() {
    let mut cfg = sim::mock_config(Backend::Metal, 5);
    cfg.mode = LoopMode::SingleShot;
    let steps = [Step::CompileError, Step::Correct { speedup: 3.0 }];
    let o = sim::replay(&sim::demo_problem(Backend::Metal), &steps, &cfg);
    assert_eq!(o.records.len(), 1);
    assert_eq!(o.generations, [1]);
    assert_eq!(o.best, None);
}

#[test]
fn regression_keeps_earlier_best() {
    let steps = [
        Step::Correct { speedup: 1.2 },
        Step::Mismatch,
        Step::Correct { speedup: 1.1 },
    ];
    let o = sim::replay(&sim::demo_problem(Backend::Cuda), &steps, &sim::mock_config(Backend::Cuda, 3));
    let best = o.best.unwrap();
    assert_eq!(best.iteration, 1);
    assert!((best.speedup - 1.2).abs() < 1e-9);
    assert_eq!(best.candidate_digest, o.records[0].candidate_digest.clone().unwrap());
}

#[test]
fn ties_go_to_the_earliest_iteration() {
    let steps = [Step::Correct { speedup: 1.5 }, Step::Correct { speedup: 1.5 }];
    let o = sim::replay(&sim::demo_problem(Backend::Cuda), &steps, &sim::mock_config(Backend::Cuda, 2));
    assert_eq!(o.best.unwrap().iteration, 1);
}

#[test]
fn prose_answer_is_a_generation_failure_and_the_loop_continues() {
    let steps = [Step::NoCode, Step::Correct { speedup: 2.0 }];
    let o = sim::replay(&sim::demo_problem(Backend::Cuda), &steps, &sim::mock_config(Backend::Cuda, 2));
    assert_eq!(states(&o), [ExecState::GenerationFailure, ExecState::Correct]);
    assert_eq!(o.records[0].candidate_digest, None);
}

#[test]
fn infrastructure_fault_aborts_without_panicking() {
    let steps = [Step::CompileError, Step::Infrastructure, Step::Correct { speedup: 2.0 }];
    let o = sim::replay(&sim::demo_problem(Backend::Cuda), &steps, &sim::mock_config(Backend::Cuda, 3));
    assert_eq!(o.records.len(), 1);
    assert!(o.aborted.unwrap().contains("device lost"));
}

#[test]
fn missing_reference_is_noted_and_the_loop_runs() {
    let mut cfg = sim::mock_config(Backend::Cuda, 1);
    cfg.strategy.use_reference = true;
    let o = sim::replay(&sim::demo_problem(Backend::Cuda), &[Step::Mismatch], &cfg);
    assert_eq!(o.records.len(), 1);
    assert!(o.notes.iter().any(|n| n.contains("no reference")), "{:?}", o.notes);
}

#[test]
fn timestamps_come_from_the_clock() {
    let o = sim::replay(
        &sim::demo_problem(Backend::Cuda),
        &[Step::Mismatch],
        &sim::mock_config(Backend::Cuda, 1),
    );
    assert_eq!(o.records[0].started_at, FixedClock::default().now());
    assert_eq!(o.records[0].finished_at, FixedClock::default().now());
}

fn step_strategy() -> impl Strategy<Value = Step> {
    prop_oneof![
        Just(Step::NoCode),
        Just(Step::CompileError),
        Just(Step::RuntimeError),
        Just(Step::Mismatch),
        (0.1f64..4.0).prop_map(|speedup| Step::Correct { speedup }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn never_exceeds_the_budget(
        steps in prop::collection::vec(step_strategy(), 0..12),
        budget in 1u32..8,
        single in any::<bool>(),
    ) {
        let mut cfg = sim::mock_config(Backend::Cuda, budget);
        if single {
            cfg.mode = LoopMode::SingleShot;
        }
        // Unscripted calls fail as generation failures, so padding is not needed.
        let o = sim::replay(&sim::demo_problem(Backend::Cuda), &steps, &cfg);
        let limit = if single { 1 } else { budget };
        prop_assert_eq!(o.generations.iter().sum::<u32>(), limit);
        prop_assert_eq!(o.records.len() as u32, limit);
        for (i, r) in o.records.iter().enumerate() {
            prop_assert_eq!(r.iteration, i as u32 + 1);
        }
    }
}

// --- profiling -------------------------------------------------------------

const KERNEL_CSV: &str = "\
Time (%),Total Time (ns),Instances,Avg (ns),Med (ns),Min (ns),Max (ns),StdDev (ns),Name
70.0,7000,10,700.0,700.0,650,750,10.0,add_kernel
30.0,3000,10,300.0,300.0,290,310,5.0,copy_kernel
";

struct Rig {
    generator: Agent,
    analyzer: Agent,
    analysis_provider: Arc<MockProvider>,
    executor: MockExecutor,
    templates: TemplateSet,
    example: OneShotExample,
    pool: DevicePool,
    clock: FixedClock,
}

impl Rig {
    fn new(cfg: &LoopConfig, generation: agents::MockScript, executor: MockScript, devices: usize) -> Rig {
        let limits = ProviderLimits::default();
        let analysis_provider = Arc::new(MockProvider::new(agents::MockScript::always(sim::ANALYSIS_ANSWER)));
        Rig {
            generator: Agent::new(cfg.generation_profile.clone(), Arc::new(MockProvider::new(generation)), &limits),
            analyzer: Agent::new(cfg.analysis_profile().clone(), analysis_provider.clone(), &limits),
            analysis_provider,
            executor: MockExecutor::new(executor),
            templates: TemplateSet::bundled(),
            example: OneShotExample::vector_add(cfg.backend),
            pool: DevicePool::with_count(devices).unwrap(),
            clock: FixedClock::default(),
        }
    }

    fn deps(&self) -> LoopDeps<'_> {
        LoopDeps {
            generator: &self.generator,
            analyzer: &self.analyzer,
            executor: &self.executor,
            templates: &self.templates,
            example: &self.example,
            references: None,
            pool: &self.pool,
            clock: &self.clock,
            run_id: "test",
        }
    }
}

fn profiled_steps(dir: &Path) -> (Vec<Step>, MockScript) {
    let report = dir.join("report_cuda_gpu_kern_sum.csv");
    fs::write(&report, KERNEL_CSV).unwrap();
    let steps = vec![
        Step::Correct { speedup: 1.1 },
        Step::Correct { speedup: 1.4 },
        Step::Mismatch,
    ];
    let mut exec = MockScript::default();
    for (i, speedup) in [(1, 1.1), (2, 1.4)] {
        exec.push(
            MockMatch::Contains(format!("# candidate {i}\n")),
            MockOutcome::Correct {
                speedup: Some(speedup),
                candidate_mean_ms: None,
                baseline_mean_ms: None,
                profile_artifacts: vec![report.clone()],
            },
        );
    }
    exec.push(MockMatch::Contains("# candidate 3\n".into()), MockOutcome::mismatch());
    (steps, exec)
}

#[test]
fn recommendation_follows_each_correct_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let (steps, exec) = profiled_steps(dir.path());
    let mut cfg = sim::mock_config(Backend::Cuda, 3);
    cfg.strategy.use_profiling = true;
    let rig = Rig::new(&cfg, sim::generation_script(&steps), exec, 1);
    let o = run_problem(&sim::demo_problem(Backend::Cuda), &cfg, &rig.deps(), &mut NullSink);

    assert_eq!(o.records[0].recommendation, None);
    for r in &o.records[1..] {
        assert_eq!(r.recommendation.as_deref(), Some(sim::ANALYSIS_ANSWER));
        assert_eq!(r.recommendation_digest, Some(crate::digest::sha256_hex(sim::ANALYSIS_ANSWER)));
    }
    assert_eq!(rig.analysis_provider.calls().len(), 2);
    assert!(o.records.iter().all(|r| r.notes.is_empty()), "{:?}", o.records);
}

#[test]
fn reused_profile_is_captured_once() {
    let dir = tempfile::tempdir().unwrap();
    let (steps, exec) = profiled_steps(dir.path());
    let mut cfg = sim::mock_config(Backend::Cuda, 3);
    cfg.strategy.use_profiling = true;
    cfg.strategy.reuse_profile = true;
    let rig = Rig::new(&cfg, sim::generation_script(&steps), exec, 1);
    let o = run_problem(&sim::demo_problem(Backend::Cuda), &cfg, &rig.deps(), &mut NullSink);
    // Only the first evaluation captured; the rest ran with profiling off.
    assert_eq!(o.records[0].artifacts.len(), 1);
    assert!(o.records[1..].iter().all(|r| r.artifacts.is_empty()));
    assert_eq!(o.records[2].recommendation.as_deref(), Some(sim::ANALYSIS_ANSWER));
}

#[test]
fn missing_profile_evidence_skips_analysis_with_a_note() {
    let steps = [Step::Correct { speedup: 1.2 }, Step::Mismatch];
    let mut cfg = sim::mock_config(Backend::Metal, 2);
    cfg.strategy.use_profiling = true;
    let o = sim::replay(&sim::demo_problem(Backend::Metal), &steps, &cfg);
    assert_eq!(o.records[1].recommendation, None);
    assert!(
        o.records[1].notes.iter().any(|n| n.contains("profiling unavailable")),
        "{:?}",
        o.records[1].notes
    );
}

#[test]
fn text_only_analysis_model_gets_screenshot_free_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let (steps, mut exec) = profiled_steps(dir.path());
    let png = dir.path().join("summary.png");
    fs::write(&png, b"\x89PNG\r\n\x1a\nfake").unwrap();
    if let MockOutcome::Correct { profile_artifacts, .. } = &mut exec.entries[0].outcome {
        profile_artifacts.push(png);
    }
    let mut cfg = sim::mock_config(Backend::Cuda, 2);
    cfg.strategy.use_profiling = true;
    cfg.analysis_profile = Some(ProviderProfile::replication(Provider::ProviderC));
    let rig = Rig::new(&cfg, sim::generation_script(&steps), exec, 1);
    let o = run_problem(&sim::demo_problem(Backend::Cuda), &cfg, &rig.deps(), &mut NullSink);
    assert_eq!(o.records[1].recommendation.as_deref(), Some(sim::ANALYSIS_ANSWER));
    assert!(o.records[1].notes.iter().any(|n| n.contains("screenshots dropped")));
}

// --- suites ----------------------------------------------------------------

fn problem(id: &str, level: Level) -> Problem {
    Problem {
        id: id.into(),
        level,
        name: id.rsplit('/').next().unwrap().into(),
        reference_source: format!("# problem {id}\nimport torch\n"),
        source_path: None,
        backend_support: BTreeSet::from(Backend::ALL),
        tags: Vec::new(),
    }
}

fn problem_set(ids: &[(&str, Level)]) -> ProblemSet {
    let mut set = ProblemSet::empty(Backend::Cuda);
    for (id, level) in ids {
        set.problems.push(problem(id, *level));
        *set.counts_by_level.entry(*level).or_default() += 1;
    }
    set.digest = crate::digest::sha256_parts(ids.iter().map(|(id, _)| id.to_string()));
    set
}

/// Each problem's prompt yields a program naming that problem; `verdict`
/// decides what the executor says about it.
fn suite_scripts(set: &ProblemSet, verdict: impl Fn(&str) -> MockOutcome) -> (agents::MockScript, MockScript) {
    let mut generation = agents::MockScript::default();
    let mut exec = MockScript::default();
    for p in &set.problems {
        let marker = format!("# problem {}\n", p.id);
        let program = format!("# kernel for {}\nimport torch\n", p.id);
        generation.push(agents::MockMatch::Contains(marker), &format!("```python\n{program}```"));
        exec.push(MockMatch::Contains(format!("# kernel for {}\n", p.id)), verdict(&p.id));
    }
    (generation, exec)
}

fn suite_cfg() -> LoopConfig {
    sim::mock_config(Backend::Cuda, 2)
}

#[test]
fn suite_writes_the_run_layout() {
    let set = problem_set(&[("level1/a", Level::One), ("level2/b", Level::Two)]);
    let cfg = suite_cfg();
    let (g, e) = suite_scripts(&set, |id| {
        if id.ends_with('a') {
            MockOutcome::correct(2.0)
        } else {
            MockOutcome::mismatch()
        }
    });
    let rig = Rig::new(&cfg, g, e, 2);
    let root = tempfile::tempdir().unwrap();
    let mut opts = SuiteOptions::new(root.path());
    opts.parallelism = 2;
    let (dir, summary) = run_suite(&set, &cfg, &rig.deps(), &opts).unwrap();

    assert_eq!(summary.completed, 2);
    assert_eq!(summary.correct_by_level[&Level::One], 1);
    assert_eq!(summary.correct_by_level[&Level::Two], 0);
    let layout = RunLayout::new(&dir);
    for f in [layout.config(), layout.problems(), layout.summary()] {
        assert!(f.is_file(), "{}", f.display());
    }
    let lines = crate::jsonl::read_tolerant::<RunRecord>(&layout.records("level1/a")).unwrap();
    assert_eq!(lines.records.len(), 2);
    assert!(layout.problem_dir("level1/a").join("candidates/iter2.src").is_file());
    let index = read_problem_index(&dir).unwrap();
    assert_eq!(index.problems.len(), 2);
}

#[test]
fn resume_skips_finished_problems() {
    let set = problem_set(&[("level1/a", Level::One), ("level1/b", Level::One)]);
    let cfg = suite_cfg();
    let root = tempfile::tempdir().unwrap();

    // First attempt: problem b hits a broken device.
    let (g, e) = suite_scripts(&set, |id| {
        if id.ends_with('b') {
            MockOutcome::InfrastructureError("device lost".into())
        } else {
            MockOutcome::correct(1.5)
        }
    });
    let rig = Rig::new(&cfg, g, e, 1);
    let (dir, first) = run_suite(&set, &cfg, &rig.deps(), &SuiteOptions::new(root.path())).unwrap();
    assert_eq!(first.completed, 1);
    assert_eq!(first.aborted.len(), 1);
    let a_records = fs::read(RunLayout::new(&dir).records("level1/a")).unwrap();

    // Second attempt with a healthy device resumes only b.
    let (g, e) = suite_scripts(&set, |_| MockOutcome::correct(1.5));
    let rig = Rig::new(&cfg, g, e, 1);
    let mut opts = SuiteOptions::new(root.path());
    opts.resume = Some(first.run_id.clone());
    let (_, second) = run_suite(&set, &cfg, &rig.deps(), &opts).unwrap();
    assert_eq!(second.resumed, 1);
    assert_eq!(second.completed, 2);
    assert!(second.aborted.is_empty());
    assert_eq!(fs::read(RunLayout::new(&dir).records("level1/a")).unwrap(), a_records);
}

#[test]
fn resume_refuses_a_changed_configuration() {
    let set = problem_set(&[("level1/a", Level::One)]);
    let cfg = suite_cfg();
    let (g, e) = suite_scripts(&set, |_| MockOutcome::correct(1.5));
    let rig = Rig::new(&cfg, g, e, 1);
    let root = tempfile::tempdir().unwrap();
    let (_, first) = run_suite(&set, &cfg, &rig.deps(), &SuiteOptions::new(root.path())).unwrap();

    let mut changed = cfg.clone();
    changed.num_iterations = 3;
    let mut opts = SuiteOptions::new(root.path());
    opts.resume = Some(first.run_id.clone());
    let err = run_suite(&set, &changed, &rig.deps(), &opts).unwrap_err();
    assert!(matches!(err, SuiteError::ResumeMismatch(_)), "{err}");

    let err = run_suite(&set, &cfg, &rig.deps(), &SuiteOptions::new(root.path())).unwrap_err();
    assert!(matches!(err, SuiteError::Exists(_)), "{err}");
}

#[test]
fn empty_problem_set_produces_an_empty_summary() {
    let set = problem_set(&[]);
    let cfg = suite_cfg();
    let rig = Rig::new(&cfg, agents::MockScript::default(), MockScript::default(), 1);
    let root = tempfile::tempdir().unwrap();
    let (dir, summary) = run_suite(&set, &cfg, &rig.deps(), &SuiteOptions::new(root.path())).unwrap();
    assert_eq!(summary.problems, 0);
    assert_eq!(summary.completed, 0);
    assert!(RunLayout::new(&dir).summary().is_file());
}

#[test]
fn single_device_serializes_evaluations() {
    let ids: Vec<(String, Level)> = (0..6).map(|i| (format!("level1/p{i}"), Level::One)).collect();
    let refs: Vec<(&str, Level)> = ids.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    let set = problem_set(&refs);
    let cfg = suite_cfg();
    let (g, e) = suite_scripts(&set, |_| MockOutcome::Hang { ms: 2 });
    let rig = Rig::new(&cfg, g, e, 1);
    let root = tempfile::tempdir().unwrap();
    let mut opts = SuiteOptions::new(root.path());
    opts.parallelism = 2;
    let err = run_suite(&set, &cfg, &rig.deps(), &opts).unwrap_err();
    assert!(matches!(err, SuiteError::Parallelism { requested: 2, pool: 1 }));

    opts.parallelism = 1;
    let (_, summary) = run_suite(&set, &cfg, &rig.deps(), &opts).unwrap();
    assert_eq!(summary.completed, 6);
    assert_eq!(rig.pool.peak_outstanding(), 1);
}

#[test]
fn config_validation_reports_every_problem() {
    let mut cfg = LoopConfig {
        num_iterations: 0,
        ..LoopConfig::default()
    };
    cfg.timing.timed_runs = 0;
    cfg.timeout_s = -1.0;
    let errs = cfg.validate().unwrap_err();
    assert!(errs.len() >= 3, "{errs:?}");
}
