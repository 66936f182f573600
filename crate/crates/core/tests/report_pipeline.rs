//! A mock run end to end: suite, run directory, report.

use std::fs::OpenOptions;
use std::io::Write;
use std::sync::Arc;

use kforge::agents::{self, Agent, MockProvider, ProviderLimits};
use kforge::executor::{DevicePool, MockExecutor};
use kforge::metrics::{aggregate, DEFAULT_THRESHOLDS};
use kforge::orchestrator::{run_suite, FixedClock, LoopDeps, RunLayout, SuiteOptions};
use kforge::problem::{Level, ProblemSet};
use kforge::prompt::{OneShotExample, TemplateSet};
use kforge::sim::{self, Step};
use kforge::Backend;

fn two_problem_set() -> ProblemSet {
    let mut set = ProblemSet::empty(Backend::Cuda);
    for (id, level) in [("level1/1_add", Level::One), ("level2/1_fused", Level::Two)] {
        let mut p = sim::demo_problem(Backend::Cuda);
        p.id = id.into();
        p.level = level;
        set.problems.push(p);
        *set.counts_by_level.get_mut(&level).unwrap() += 1;
    }
    set.digest = "fixture".into();
    set
}

/// Calls 1-3 belong to the first problem, 4-6 to the second.
fn run(root: &std::path::Path) -> std::path::PathBuf {
    let steps = [
        Step::CompileError,
        Step::Correct { speedup: 1.25 },
        Step::Correct { speedup: 2.5 },
        Step::Mismatch,
        Step::Mismatch,
        Step::Correct { speedup: 0.8 },
    ];
    let cfg = sim::mock_config(Backend::Cuda, 3);
    let limits = ProviderLimits::default();
    let generator = Agent::new(
        cfg.generation_profile.clone(),
        Arc::new(MockProvider::new(sim::generation_script(&steps))),
        &limits,
    );
    let analyzer = Agent::new(
        cfg.analysis_profile().clone(),
        Arc::new(MockProvider::new(agents::MockScript::always(sim::ANALYSIS_ANSWER))),
        &limits,
    );
    let executor = MockExecutor::new(sim::executor_script(&steps));
    let templates = TemplateSet::bundled();
    let example = OneShotExample::vector_add(Backend::Cuda);
    let pool = DevicePool::with_count(1).unwrap();
    let clock = FixedClock::default();
    let deps = LoopDeps {
        generator: &generator,
        analyzer: &analyzer,
        executor: &executor,
        templates: &templates,
        example: &example,
        references: None,
        pool: &pool,
        clock: &clock,
        run_id: "",
    };
    run_suite(&two_problem_set(), &cfg, &deps, &SuiteOptions::new(root)).unwrap().0
}

#[test]
fn report_reflects_the_best_iteration_per_problem() {
    let root = tempfile::tempdir().unwrap();
    let dir = run(root.path());
    let report = aggregate(&dir, &DEFAULT_THRESHOLDS).unwrap();

    let first = &report.problems[0];
    assert!(first.correct);
    assert_eq!(first.best_iteration, Some(3));
    assert!((first.best_speedup.unwrap() - 2.5).abs() < 1e-9);
    let second = &report.problems[1];
    assert!(second.correct);
    assert!((second.best_speedup.unwrap() - 0.8).abs() < 1e-9);

    let l1 = &report.curves[0];
    assert_eq!(l1.values, vec![Some(1.0), Some(1.0), Some(1.0), Some(1.0), Some(1.0)]);
    let l2 = &report.curves[1];
    assert_eq!(l2.values, vec![Some(1.0), Some(1.0), Some(0.0), Some(0.0), Some(0.0)]);
    let l3 = &report.curves[2];
    assert_eq!(l3.n, 0);
    assert!(l3.values.iter().all(Option::is_none));

    let csv = report.to_csv();
    assert!(csv.starts_with("level,n,p,fast_p\n"));
    assert!(csv.contains("\n2,1,1,0\n"), "{csv}");
    assert!(report.to_table().contains("fast_1.5"));
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["curves"][2]["values"][0], serde_json::Value::Null);
}

#[test]
fn a_torn_last_line_is_skipped_and_counted() {
    let root = tempfile::tempdir().unwrap();
    let dir = run(root.path());
    let records = RunLayout::new(&dir).records("level1/1_add");
    let mut f = OpenOptions::new().append(true).open(&records).unwrap();
    f.write_all(b"{\"problem_id\": \"level1/1_ad").unwrap();
    let report = aggregate(&dir, &DEFAULT_THRESHOLDS).unwrap();
    assert_eq!(report.problems[0].corrupt_lines, 1);
    assert!((report.problems[0].best_speedup.unwrap() - 2.5).abs() < 1e-9);
}
