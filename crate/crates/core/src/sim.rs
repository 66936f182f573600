//! Scripted refinement loops: no model, no accelerator.
//!
//! A script is one [`Step`] per generation. The mock generation agent
//! answers call `i` with a distinct program (or with prose for
//! [`Step::NoCode`]); the mock executor recognizes that program and returns
//! the scripted verdict. Used by tests, fuzzing and the browser demo.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agents::{self, Agent, MockProvider, ProviderLimits, ProviderProfile};
use crate::backend::Backend;
use crate::executor::{MockExecutor, MockMatch, MockOutcome, MockScript};
use crate::executor::DevicePool;
use crate::orchestrator::{run_problem, FixedClock, LoopConfig, LoopDeps, NullSink, ProblemOutcome};
use crate::problem::{Level, Problem};
use crate::prompt::{OneShotExample, TemplateSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    /// The model answers without a program.
    NoCode,
    CompileError,
    RuntimeError,
    Mismatch,
    Correct { speedup: f64 },
    /// The harness fails; the problem aborts.
    Infrastructure,
}

impl Step {
    fn outcome(self) -> Option<MockOutcome> {
        Some(match self {
            Step::NoCode => return None,
            Step::CompileError => MockOutcome::CompileError("error: identifier \"flaot\" is undefined".into()),
            Step::RuntimeError => MockOutcome::RuntimeError {
                message: "RuntimeError: CUDA error: an illegal memory access was encountered".into(),
                signal: None,
            },
            Step::Mismatch => MockOutcome::Mismatch {
                shape_ok: true,
                max_abs_dev: 0.5,
                max_rel_dev: 0.2,
            },
            Step::Correct { speedup } => MockOutcome::correct(speedup),
            Step::Infrastructure => MockOutcome::InfrastructureError("device lost".into()),
        })
    }
}

/// Parses a script with one step per comma-, semicolon- or newline-separated
/// entry: `none`, `compile`, `runtime`, `mismatch`, `infra`, or `correct S`
/// (a bare number means `correct`).
pub fn parse_steps(text: &str) -> Result<Vec<Step>, String> {
    text.split([',', '\n', ';'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|entry| {
            let mut words = entry.split_whitespace();
            let head = words.next().unwrap_or_default().to_ascii_lowercase();
            let step = match head.as_str() {
                "none" | "no-code" | "prose" => Step::NoCode,
                "compile" | "compile-error" => Step::CompileError,
                "runtime" | "runtime-error" | "crash" => Step::RuntimeError,
                "mismatch" | "wrong" => Step::Mismatch,
                "infra" | "infrastructure" => Step::Infrastructure,
                "correct" | "ok" => Step::Correct {
                    speedup: parse_speedup(words.next().ok_or_else(|| format!("'{entry}' needs a speedup"))?)?,
                },
                number => Step::Correct {
                    speedup: parse_speedup(number).map_err(|_| format!("unknown step '{entry}'"))?,
                },
            };
            if words.next().is_some() {
                return Err(format!("unexpected text in step '{entry}'"));
            }
            Ok(step)
        })
        .collect()
}

fn parse_speedup(token: &str) -> Result<f64, String> {
    token
        .parse::<f64>()
        .ok()
        .filter(|s| s.is_finite() && *s > 0.0)
        .ok_or_else(|| format!("'{token}' is not a positive speedup"))
}

/// Source the mock model writes on call `i` (1-based).
pub fn candidate_source(i: usize) -> String {
    format!(
        "# candidate {i}\nimport torch\nimport torch.nn as nn\n\n\nclass NewModel(nn.Module):\n    def forward(self, a, b):\n        return a + b\n"
    )
}

pub const ANALYSIS_ANSWER: &str = "Fuse the elementwise epilogue into the main kernel to avoid a second pass over global memory.";

/// Mock model script answering call `i` per `steps[i - 1]`.
pub fn generation_script(steps: &[Step]) -> agents::MockScript {
    let mut script = agents::MockScript::default();
    for (i, step) in steps.iter().enumerate() {
        let text = match step {
            Step::NoCode => "I am not able to improve this program further.".to_string(),
            _ => format!("Here is the program.\n\n```python\n{}```\n", candidate_source(i + 1)),
        };
        script.push(agents::MockMatch::Ordinal(i as u64 + 1), &text);
    }
    script
}

/// Mock executor script recognizing each scripted program.
pub fn executor_script(steps: &[Step]) -> MockScript {
    let mut script = MockScript::default();
    for (i, step) in steps.iter().enumerate() {
        if let Some(outcome) = step.outcome() {
            script.push(MockMatch::Contains(format!("# candidate {}\n", i + 1)), outcome);
        }
    }
    script
}

/// A small level-1 problem.
pub fn demo_problem(backend: Backend) -> Problem {
    let example = OneShotExample::vector_add(backend);
    Problem {
        id: "level1/vector_add".into(),
        level: Level::One,
        name: "vector_add".into(),
        reference_source: example.problem_source,
        source_path: None,
        backend_support: BTreeSet::from(Backend::ALL),
        tags: Vec::new(),
    }
}

/// Runs `steps` through the real loop with mock collaborators.
pub fn replay(problem: &Problem, steps: &[Step], cfg: &LoopConfig) -> ProblemOutcome {
    let limits = ProviderLimits::default();
    let generator = Agent::new(
        cfg.generation_profile.clone(),
        Arc::new(MockProvider::new(generation_script(steps))),
        &limits,
    );
    let analyzer = Agent::new(
        cfg.analysis_profile().clone(),
        Arc::new(MockProvider::new(agents::MockScript::always(ANALYSIS_ANSWER))),
        &limits,
    );
    let executor = MockExecutor::new(executor_script(steps));
    let templates = TemplateSet::bundled();
    let example = OneShotExample::vector_add(cfg.backend);
    let pool = DevicePool::with_count(1).expect("one device");
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
        run_id: "replay",
    };
    run_problem(problem, cfg, &deps, &mut NullSink)
}

/// A loop configuration that only uses mock providers.
pub fn mock_config(backend: Backend, iterations: u32) -> LoopConfig {
    let mut cfg = LoopConfig {
        backend,
        num_iterations: iterations,
        generation_profile: ProviderProfile::replication(agents::Provider::Mock),
        ..LoopConfig::default()
    };
    cfg.timing.timed_runs = 10;
    cfg.timing.warmup_runs = 1;
    cfg
}
