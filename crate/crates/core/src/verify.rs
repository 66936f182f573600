//! Execution-state classification, output comparison and timing reduction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::digest;
use crate::executor::{Phase, RawExecResult};

/// Outcome of one generate-and-evaluate iteration. Variants are listed in
/// precedence order: the earliest failing phase wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecState {
    GenerationFailure,
    CompilationFailure,
    RuntimeError,
    OutputMismatch,
    Correct,
}

impl ExecState {
    pub const ALL: [ExecState; 5] = [
        ExecState::GenerationFailure,
        ExecState::CompilationFailure,
        ExecState::RuntimeError,
        ExecState::OutputMismatch,
        ExecState::Correct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExecState::GenerationFailure => "generation_failure",
            ExecState::CompilationFailure => "compilation_failure",
            ExecState::RuntimeError => "runtime_error",
            ExecState::OutputMismatch => "output_mismatch",
            ExecState::Correct => "correct",
        }
    }

    pub fn is_correct(self) -> bool {
        self == ExecState::Correct
    }
}

impl fmt::Display for ExecState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectnessConfig {
    pub trials: u32,
    pub atol: f64,
    pub rtol: f64,
    pub seed: u64,
}

impl Default for CorrectnessConfig {
    fn default() -> Self {
        CorrectnessConfig {
            trials: 5,
            atol: 1e-2,
            rtol: 1e-2,
            seed: 42,
        }
    }
}

impl CorrectnessConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.trials == 0 {
            return Err("correctness.trials must be at least 1".into());
        }
        if [self.atol, self.rtol].iter().any(|t| t.is_nan() || *t < 0.0) {
            return Err("correctness.atol and correctness.rtol must be non-negative".into());
        }
        Ok(())
    }
}

/// Seed for one randomized input trial, stable across runs and hosts.
pub fn trial_seed(run_seed: u64, problem_id: &str, trial: u32) -> u64 {
    let d = digest::sha256_parts([
        run_seed.to_le_bytes().as_slice(),
        problem_id.as_bytes(),
        trial.to_le_bytes().as_slice(),
    ]);
    u64::from_str_radix(&d[..16], 16).expect("hex digest")
}

/// Maps a raw execution record onto exactly one state.
pub fn classify(raw: &RawExecResult, had_code: bool) -> ExecState {
    if !had_code {
        return ExecState::GenerationFailure;
    }
    if raw.phase_reached == Phase::Compile {
        return ExecState::CompilationFailure;
    }
    if raw.phase_reached == Phase::Run || raw.timed_out || raw.signal.is_some() {
        return ExecState::RuntimeError;
    }
    let compared_ok = raw.comparison.as_ref().is_none_or(|c| c.passed());
    if raw.phase_reached == Phase::Compare || !compared_ok {
        return ExecState::OutputMismatch;
    }
    ExecState::Correct
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Self {
        Tensor { shape, data }
    }

    fn well_formed(&self) -> bool {
        self.shape.iter().product::<usize>() == self.data.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub pass: bool,
    pub shape_ok: bool,
    pub max_abs_dev: f64,
    pub max_rel_dev: f64,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.pass && self.shape_ok
    }

    fn failed_shapes() -> Self {
        Comparison {
            pass: false,
            shape_ok: false,
            max_abs_dev: 0.0,
            max_rel_dev: 0.0,
        }
    }
}

/// Compares candidate outputs against reference outputs.
///
/// An element passes when `|a - b| <= atol + rtol * |b|`, with `b` taken
/// from `reference`; with `rtol > 0` the check is therefore asymmetric.
/// Relative deviation is reported over elements with `b != 0`. A NaN on
/// either side fails and pins the deviations at `f64::MAX`.
pub fn compare_outputs(candidate: &[Tensor], reference: &[Tensor], cfg: &CorrectnessConfig) -> Comparison {
    if candidate.len() != reference.len() {
        return Comparison::failed_shapes();
    }
    let shape_ok = candidate
        .iter()
        .zip(reference)
        .all(|(a, b)| a.shape == b.shape && a.well_formed() && b.well_formed());
    if !shape_ok {
        return Comparison::failed_shapes();
    }
    let mut pass = true;
    let mut max_abs = 0.0_f64;
    let mut max_rel = 0.0_f64;
    for (a, b) in candidate.iter().zip(reference) {
        for (&x, &y) in a.data.iter().zip(&b.data) {
            let diff = (x - y).abs();
            if diff.is_nan() {
                pass = false;
                max_abs = f64::MAX;
                max_rel = f64::MAX;
                continue;
            }
            // Negated so that a NaN tolerance (0 · inf) fails the element.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(diff <= cfg.atol + cfg.rtol * y.abs()) {
                pass = false;
            }
            max_abs = max_abs.max(diff);
            if y != 0.0 {
                max_rel = max_rel.max(diff / y.abs());
            }
        }
    }
    Comparison {
        pass,
        shape_ok,
        max_abs_dev: max_abs,
        max_rel_dev: max_rel,
    }
}

/// Folds per-trial comparisons: every trial must pass; deviations are the
/// maxima across trials.
pub fn compare_trials(
    candidate: &[Vec<Tensor>],
    reference: &[Vec<Tensor>],
    cfg: &CorrectnessConfig,
) -> Comparison {
    if candidate.len() != reference.len() || candidate.is_empty() {
        return Comparison::failed_shapes();
    }
    candidate
        .iter()
        .zip(reference)
        .map(|(c, r)| compare_outputs(c, r, cfg))
        .reduce(|acc, c| Comparison {
            pass: acc.pass && c.pass,
            shape_ok: acc.shape_ok && c.shape_ok,
            max_abs_dev: acc.max_abs_dev.max(c.max_abs_dev),
            max_rel_dev: acc.max_rel_dev.max(c.max_rel_dev),
        })
        .expect("non-empty")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub samples_ns: Vec<f64>,
    pub mean_ns: f64,
    pub median_ns: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for one sample.
    pub std_ns: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TimingError {
    #[error("timing reduction needs at least one sample")]
    Empty,
    #[error("timing sample {index} is not a finite non-negative duration ({value})")]
    InvalidSample { index: usize, value: f64 },
}

/// Mean, median and sample standard deviation of `samples_ns`.
///
/// Sums run over the sorted samples, so the result is bit-identical for
/// every permutation of the input.
pub fn reduce_timing(samples_ns: &[f64]) -> Result<TimingStats, TimingError> {
    if samples_ns.is_empty() {
        return Err(TimingError::Empty);
    }
    if let Some((index, &value)) = samples_ns.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(TimingError::InvalidSample { index, value });
    }
    let mut sorted = samples_ns.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let std = if n > 1 {
        (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(TimingStats {
        samples_ns: samples_ns.to_vec(),
        mean_ns: mean,
        median_ns: median,
        std_ns: std,
    })
}
