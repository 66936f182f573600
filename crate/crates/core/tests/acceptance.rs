//! Acceptance checks for the synthesis loop, run with the mock provider and
//! mock executor only. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use kforge::agents::{self, Agent, MockProvider, ProviderLimits};
use kforge::executor::{
    execute_with_retry, DevicePool, ExecError, ExecRequest, Executor, MockExecutor, MockMatch, MockOutcome,
    MockScript, Phase, RawExecResult,
};
use kforge::metrics::{self, OutcomeRow, DEFAULT_THRESHOLDS};
use kforge::orchestrator::{
    run_suite, LoopConfig, LoopDeps, LoopPhase, RunLayout, SuiteOptions, SystemClock, TIMESTAMP_FIELDS,
};
use kforge::problem::{load_problem_set, Level, ProblemSet};
use kforge::profiling::{self, BundleBudget, EvidenceInputs, EvidencePayload, ReportKind};
use kforge::prompt::{OneShotExample, TemplateSet};
use kforge::sim::{self, Step};
use kforge::verify::{classify, reduce_timing, Comparison};
use kforge::{Backend, ExecState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn bundled_problems() -> PathBuf {
    manifest_dir().join("../../problems/kernelbench")
}

// --- fast_p ----------------------------------------------------------------

fn random_rows(rng: &mut ChaCha8Rng) -> (Vec<OutcomeRow>, usize) {
    let n = rng.gen_range(1..=300);
    let present = rng.gen_range(0..=n);
    let rows = (0..present)
        .map(|i| {
            let correct = rng.gen_bool(0.6);
            let speedup = correct.then(|| {
                // Hit the thresholds exactly now and then: the comparison is strict.
                if rng.gen_bool(0.1) {
                    DEFAULT_THRESHOLDS[rng.gen_range(0..DEFAULT_THRESHOLDS.len())]
                } else {
                    rng.gen_range(0.01..3.5)
                }
            });
            OutcomeRow {
                problem_id: format!("level1/{i}"),
                level: Level::One,
                correct,
                speedup,
            }
        })
        .collect();
    (rows, n)
}

fn brute_force_fast_p(rows: &[OutcomeRow], p: f64, n: usize) -> f64 {
    let mut hits = 0usize;
    for r in rows {
        if r.correct {
            if let Some(s) = r.speedup {
                if s > p {
                    hits += 1;
                }
            }
        }
    }
    hits as f64 / n as f64
}

fn fast_p_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for fixture in 0..1000 {
        let (rows, n) = random_rows(&mut rng);
        let mut previous = f64::INFINITY;
        for &p in &DEFAULT_THRESHOLDS {
            let got = metrics::fast_p(&rows, p, n).ok_or("fast_p returned None for n > 0")?;
            let want = brute_force_fast_p(&rows, p, n);
            ensure(got == want, || format!("fixture {fixture}, p={p}: {got} != {want}"))?;
            ensure(got <= previous, || format!("fixture {fixture}: not monotone at p={p}"))?;
            previous = got;
        }
    }
    ensure(metrics::fast_p(&[], 1.0, 0).is_none(), || "n = 0 must be undefined".into())?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 fixtures x 5 thresholds in {elapsed:.2?}"))
}

// --- published numbers -------------------------------------------------------

fn paper_numbers() -> Outcome {
    let mut rows = Vec::new();
    for i in 0..91 {
        let (correct, speedup) = match i {
            0..=10 => (true, Some(1.05 + 0.1 * i as f64)),
            11 => (true, Some(1.0)),
            12..=30 => (true, Some(0.2 + 0.04 * (i - 12) as f64)),
            _ => (false, None),
        };
        rows.push(OutcomeRow {
            problem_id: format!("level1/{i}"),
            level: Level::One,
            correct,
            speedup,
        });
    }
    let f = metrics::fast_p(&rows, 1.0, 91).unwrap();
    ensure((f - 0.121).abs() <= 0.0005, || format!("fast_1.0 = {f}"))?;

    let ms = |v: f64| reduce_timing(&vec![v * 1e6; 100]).unwrap();
    let squeeze = metrics::speedup(&ms(1.04), &ms(0.474)).map_err(|e| e.to_string())?;
    let mobile = metrics::speedup(&ms(2.78), &ms(1.8)).map_err(|e| e.to_string())?;
    ensure((squeeze - 2.19).abs() <= 0.01, || format!("fire module speedup {squeeze}"))?;
    ensure((mobile - 1.54).abs() <= 0.01, || format!("mobilenet speedup {mobile}"))?;
    Ok(format!("fast_1.0 = {f:.4}, speedups {squeeze:.3} and {mobile:.3}"))
}

// --- loop state machine ------------------------------------------------------

/// What a scripted run must produce, derived from the script alone.
struct Expected {
    states: Vec<ExecState>,
    phases: Vec<LoopPhase>,
    best: Option<(u32, f64)>,
    generations: u32,
}

fn replay_oracle(steps: &[Step], budget: u32) -> Expected {
    let mut e = Expected {
        states: Vec::new(),
        phases: Vec::new(),
        best: None,
        generations: 0,
    };
    let mut seen_correct = false;
    for i in 0..budget as usize {
        e.generations += 1;
        let step = steps.get(i).copied().unwrap_or(Step::NoCode);
        if step == Step::Infrastructure {
            break;
        }
        e.phases.push(if seen_correct {
            LoopPhase::Optimization
        } else {
            LoopPhase::Functional
        });
        let state = match step {
            Step::NoCode => ExecState::GenerationFailure,
            Step::CompileError => ExecState::CompilationFailure,
            Step::RuntimeError => ExecState::RuntimeError,
            Step::Mismatch => ExecState::OutputMismatch,
            Step::Correct { speedup } => {
                seen_correct = true;
                if e.best.is_none_or(|(_, b)| speedup > b) {
                    e.best = Some((i as u32 + 1, speedup));
                }
                ExecState::Correct
            }
            Step::Infrastructure => unreachable!(),
        };
        e.states.push(state);
    }
    e
}

fn check_replay(steps: &[Step], budget: u32) -> Result<(), String> {
    let cfg = sim::mock_config(Backend::Cuda, budget);
    let got = sim::replay(&sim::demo_problem(Backend::Cuda), steps, &cfg);
    let want = replay_oracle(steps, budget);
    let states: Vec<ExecState> = got.records.iter().map(|r| r.exec_state).collect();
    let phases: Vec<LoopPhase> = got.records.iter().map(|r| r.phase).collect();
    ensure(states == want.states, || format!("{steps:?}: states {states:?} != {:?}", want.states))?;
    ensure(phases == want.phases, || format!("{steps:?}: phases {phases:?} != {:?}", want.phases))?;
    let best = got.best.as_ref().map(|b| (b.iteration, b.speedup));
    let same_best = match (best, want.best) {
        (None, None) => true,
        (Some((i, s)), Some((j, t))) => i == j && (s - t).abs() < 1e-9,
        _ => false,
    };
    ensure(same_best, || format!("{steps:?}: best {best:?} != {:?}", want.best))?;
    let generations: u32 = got.generations.iter().sum();
    ensure(generations == want.generations, || {
        format!("{steps:?}: {generations} generations != {}", want.generations)
    })?;
    ensure(generations <= budget, || format!("{steps:?}: {generations} generations over budget {budget}"))?;
    Ok(())
}

fn state_machine() -> Outcome {
    let steps = [
        Step::CompileError,
        Step::CompileError,
        Step::Correct { speedup: 1.3 },
        Step::Mismatch,
        Step::Correct { speedup: 1.6 },
    ];
    check_replay(&steps, 5)?;
    let o = sim::replay(&sim::demo_problem(Backend::Cuda), &steps, &sim::mock_config(Backend::Cuda, 5));
    let codes: String = o
        .records
        .iter()
        .map(|r| match r.phase {
            LoopPhase::Functional => 'F',
            LoopPhase::Optimization => 'O',
        })
        .collect();
    ensure(o.records.len() == 5 && codes == "FFFOO", || format!("{} records, phases {codes}", o.records.len()))?;
    let best = o.best.ok_or("no best candidate")?.speedup;
    ensure((best - 1.6).abs() < 1e-9, || format!("best {best}"))?;
    Ok(format!("5 records, phases {codes}, best {best}"))
}

fn random_step(rng: &mut ChaCha8Rng) -> Step {
    match rng.gen_range(0..20) {
        0..=2 => Step::NoCode,
        3..=6 => Step::CompileError,
        7..=8 => Step::RuntimeError,
        9..=11 => Step::Mismatch,
        12 => Step::Infrastructure,
        _ => Step::Correct {
            speedup: (rng.gen_range(0.1..4.0f64) * 100.0).round() / 100.0,
        },
    }
}

fn budget_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let len = rng.gen_range(0..10);
        let steps: Vec<Step> = (0..len).map(|_| random_step(&mut rng)).collect();
        let budget = rng.gen_range(1..=7);
        check_replay(&steps, budget)?;
    }
    Ok("10000 fuzzed scripts within budget and matching the replay oracle".into())
}

// --- device pool -------------------------------------------------------------

/// Counts evaluations in flight, overall and per device.
struct Instrumented {
    inner: MockExecutor,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
    per_device: Mutex<BTreeMap<String, usize>>,
    double_booked: AtomicUsize,
}

impl Executor for Instrumented {
    fn execute(&self, req: &ExecRequest) -> Result<RawExecResult, ExecError> {
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        {
            let mut m = self.per_device.lock().unwrap();
            let c = m.entry(req.device.to_string()).or_default();
            *c += 1;
            if *c > 1 {
                self.double_booked.fetch_add(1, Ordering::SeqCst);
            }
        }
        let r = self.inner.execute(req);
        *self.per_device.lock().unwrap().get_mut(&req.device.to_string()).unwrap() -= 1;
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        r
    }
}

fn device_pool() -> Outcome {
    let mut script = MockScript::default();
    script.push(MockMatch::Any, MockOutcome::Hang { ms: 5 });
    let exec = Instrumented {
        inner: MockExecutor::new(script),
        in_flight: AtomicUsize::new(0),
        peak: AtomicUsize::new(0),
        per_device: Mutex::new(BTreeMap::new()),
        double_booked: AtomicUsize::new(0),
    };
    let pool = DevicePool::with_count(4).unwrap();
    let problem = Arc::new(sim::demo_problem(Backend::Cuda));
    std::thread::scope(|s| {
        for i in 0..64 {
            let (exec, pool, problem) = (&exec, &pool, &problem);
            s.spawn(move || {
                let lease = pool.lease();
                let req = ExecRequest::new(
                    Arc::clone(problem),
                    sim::candidate_source(i),
                    Backend::Cuda,
                    lease.device().clone(),
                );
                execute_with_retry(exec, &req).unwrap();
            });
        }
    });
    let peak = exec.peak.load(Ordering::SeqCst);
    ensure(peak <= 4, || format!("{peak} evaluations in flight"))?;
    ensure(pool.peak_outstanding() <= 4, || format!("pool peak {}", pool.peak_outstanding()))?;
    ensure(exec.double_booked.load(Ordering::SeqCst) == 0, || "a device was leased twice".into())?;
    ensure(pool.leases_granted() == 64, || format!("{} leases", pool.leases_granted()))?;
    Ok(format!("64 evaluations, peak {peak} in flight, no device shared"))
}

// --- classification ----------------------------------------------------------

fn classification_oracle(raw: &RawExecResult, had_code: bool) -> Vec<ExecState> {
    let halted = raw.timed_out || raw.signal.is_some();
    let compared_ok = raw.comparison.as_ref().is_none_or(|c| c.pass && c.shape_ok);
    let conditions = [
        (ExecState::GenerationFailure, !had_code),
        (ExecState::CompilationFailure, had_code && raw.phase_reached == Phase::Compile),
        (
            ExecState::RuntimeError,
            had_code && raw.phase_reached != Phase::Compile && (raw.phase_reached == Phase::Run || halted),
        ),
        (
            ExecState::OutputMismatch,
            had_code
                && matches!(raw.phase_reached, Phase::Compare | Phase::Timed)
                && !halted
                && (raw.phase_reached == Phase::Compare || !compared_ok),
        ),
        (
            ExecState::Correct,
            had_code && raw.phase_reached == Phase::Timed && !halted && compared_ok,
        ),
    ];
    conditions.iter().filter(|(_, c)| *c).map(|(s, _)| *s).collect()
}

fn classification_totality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = BTreeMap::new();
    for case in 0..20_000 {
        let phase = [Phase::Compile, Phase::Run, Phase::Compare, Phase::Timed][rng.gen_range(0..4)];
        let mut raw = RawExecResult::at_phase(phase);
        raw.timed_out = rng.gen_bool(0.2);
        raw.signal = rng.gen_bool(0.2).then(|| rng.gen_range(1..32));
        raw.comparison = rng.gen_bool(0.7).then(|| Comparison {
            pass: rng.gen_bool(0.6),
            shape_ok: rng.gen_bool(0.8),
            max_abs_dev: rng.gen_range(0.0..1.0),
            max_rel_dev: rng.gen_range(0.0..1.0),
        });
        if rng.gen_bool(0.5) {
            raw.compile_transcript = "error: expected ';'".into();
        }
        let had_code = rng.gen_bool(0.9);
        let got = classify(&raw, had_code);
        let want = classification_oracle(&raw, had_code);
        ensure(want.len() == 1, || format!("case {case}: oracle matched {want:?}"))?;
        ensure(got == want[0], || format!("case {case}: {got} != {} for {raw:?}", want[0]))?;
        *seen.entry(got.as_str()).or_insert(0usize) += 1;
    }
    ensure(seen.len() == 5, || format!("only reached {:?}", seen.keys()))?;
    Ok("20000 fuzzed results, all five states reached".into())
}

// --- profiler evidence -------------------------------------------------------

fn profiler_fixtures() -> Outcome {
    let dir = manifest_dir().join("tests/fixtures/nsys");
    let parsed = profiling::parse_stats_reports(&dir).map_err(|e| e.to_string())?;
    let expected = [
        (ReportKind::ApiSummary, 11),
        (ReportKind::GpuKernelSummary, 26),
        (ReportKind::MemoryTransferSummary, 4),
    ];
    for (kind, n) in expected {
        let rows = parsed.rows(kind);
        ensure(rows.len() == n, || format!("{kind:?}: {} rows, expected {n}", rows.len()))?;
        for r in rows {
            let drift = (r.total_time_ns - r.avg_ns * r.calls as f64).abs();
            ensure(drift <= 1000.0 && r.is_consistent(), || {
                format!("{kind:?} row {} drifts by {drift} ns", r.name)
            })?;
        }
    }
    ensure(parsed.skipped_rows == 0, || format!("{} rows skipped", parsed.skipped_rows))?;

    let inputs = EvidenceInputs::collect(&[dir]).map_err(|e| e.to_string())?;
    let budget = BundleBudget::default();
    let bundle = profiling::build_bundle(&inputs, budget, Backend::Cuda).map_err(|e| e.to_string())?;
    let kernel_item = bundle
        .items
        .iter()
        .find(|i| i.title.starts_with(ReportKind::GpuKernelSummary.title()))
        .ok_or("kernel summary missing from the bundle")?;
    let EvidencePayload::Text(text) = &kernel_item.payload else {
        return Err("kernel summary is not text".into());
    };
    let kept = profiling::parse_stats_csv("cuda_gpu_kern_sum.csv", text);
    let kept = kept.rows(ReportKind::GpuKernelSummary);
    ensure(kept.len() == budget.max_rows, || format!("{} rows kept", kept.len()))?;
    let mut by_total: Vec<_> = parsed.rows(ReportKind::GpuKernelSummary).to_vec();
    by_total.sort_by(|a, b| b.total_time_ns.total_cmp(&a.total_time_ns));
    let want: Vec<&str> = by_total[..budget.max_rows].iter().map(|r| r.name.as_str()).collect();
    let got: Vec<&str> = kept.iter().map(|r| r.name.as_str()).collect();
    ensure(got == want, || "kept rows are not the top 20 by total time".into())?;
    Ok(format!("3 reports, 41 consistent rows, kernel table cut to {} of 26", kept.len()))
}

// --- determinism -------------------------------------------------------------

fn strip_timestamps(records: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(records).map_err(|e| format!("{}: {e}", records.display()))?;
    text.lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).map_err(|e| e.to_string())?;
            for f in TIMESTAMP_FIELDS {
                v.as_object_mut().ok_or("record is not an object")?.remove(f);
            }
            Ok(v.to_string())
        })
        .collect()
}

fn run_once(set: &ProblemSet, cfg: &LoopConfig, root: &Path) -> Result<PathBuf, String> {
    let limits = ProviderLimits::default();
    let mut generation = agents::MockScript::default();
    let steps = [
        Step::CompileError,
        Step::Correct { speedup: 1.2 },
        Step::Mismatch,
        Step::Correct { speedup: 1.7 },
        Step::RuntimeError,
    ];
    let total = set.len() * cfg.num_iterations as usize;
    let cycle: Vec<Step> = steps.iter().copied().cycle().take(total).collect();
    for (i, _) in cycle.iter().enumerate() {
        generation.push(
            agents::MockMatch::Ordinal(i as u64 + 1),
            &format!("```python\n{}```", sim::candidate_source(i + 1)),
        );
    }
    let generator = Agent::new(cfg.generation_profile.clone(), Arc::new(MockProvider::new(generation)), &limits);
    let analyzer = Agent::new(
        cfg.analysis_profile().clone(),
        Arc::new(MockProvider::new(agents::MockScript::always(sim::ANALYSIS_ANSWER))),
        &limits,
    );
    let executor = MockExecutor::new(sim::executor_script(&cycle));
    let templates = TemplateSet::bundled();
    let example = OneShotExample::vector_add(cfg.backend);
    let pool = DevicePool::with_count(1).unwrap();
    let clock = SystemClock;
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
    let (dir, _) = run_suite(set, cfg, &deps, &SuiteOptions::new(root)).map_err(|e| e.to_string())?;
    Ok(dir)
}

fn determinism() -> Outcome {
    let mut set = load_problem_set(&bundled_problems(), Backend::Cuda).map_err(|e| e.to_string())?;
    let ids: Vec<String> = set.problems.iter().step_by(50).map(|p| p.id.clone()).collect();
    set.retain_ids(&ids);
    let mut cfg = sim::mock_config(Backend::Cuda, 5);
    cfg.seed = 1234;
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let da = run_once(&set, &cfg, a.path())?;
    let db = run_once(&set, &cfg, b.path())?;
    ensure(da.file_name() == db.file_name(), || "run ids differ".into())?;
    let mut lines = 0;
    for p in &set.problems {
        let ra = strip_timestamps(&RunLayout::new(&da).records(&p.id))?;
        let rb = strip_timestamps(&RunLayout::new(&db).records(&p.id))?;
        ensure(ra == rb, || format!("{}: records differ", p.id))?;
        lines += ra.len();
    }
    ensure(lines == set.len() * 5, || format!("{lines} records"))?;
    Ok(format!("{} problems, {lines} records identical modulo timestamps", set.len()))
}

// --- problem set -------------------------------------------------------------

fn problem_set_counts() -> Outcome {
    let mut out = Vec::new();
    for (backend, want) in [(Backend::Cuda, [100, 100, 50]), (Backend::Metal, [91, 79, 50])] {
        let set = load_problem_set(&bundled_problems(), backend).map_err(|e| e.to_string())?;
        let got = Level::ALL.map(|l| set.count(l));
        ensure(got == want, || format!("{backend}: {got:?} != {want:?}"))?;
        out.push(format!("{backend} {got:?}"));
    }
    Ok(out.join(", "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("fast_p oracle equivalence", fast_p_oracle),
        ("published-number fixtures", paper_numbers),
        ("state-machine scenario", state_machine),
        ("budget bound", budget_bound),
        ("device-pool exclusion", device_pool),
        ("classification totality", classification_totality),
        ("profiler CSV fixtures", profiler_fixtures),
        ("determinism", determinism),
        ("problem-set counts", problem_set_counts),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL  {name}: panicked");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
