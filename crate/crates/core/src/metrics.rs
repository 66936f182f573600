//! Speedup and the `fast_p` metric family.
//!
//! `fast_p` is the fraction of a level's problems whose best candidate is
//! correct and strictly faster than `p` times the baseline. The denominator
//! is the level's problem count, so problems that failed or never ran count
//! as misses.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::jsonl;
use crate::orchestrator::{best_candidate, read_problem_index, RunLayout, RunRecord};
use crate::problem::Level;
use crate::verify::{ExecState, TimingStats};

pub const DEFAULT_THRESHOLDS: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SpeedupError {
    #[error("candidate mean time {0} ns is not positive; speedup undefined")]
    Candidate(f64),
    #[error("baseline mean time {0} ns is not positive")]
    Baseline(f64),
}

/// Baseline mean over candidate mean.
pub fn speedup(baseline: &TimingStats, candidate: &TimingStats) -> Result<f64, SpeedupError> {
    speedup_of_means(baseline.mean_ns, candidate.mean_ns)
}

pub fn speedup_of_means(baseline_mean: f64, candidate_mean: f64) -> Result<f64, SpeedupError> {
    if !(candidate_mean.is_finite() && candidate_mean > 0.0) {
        return Err(SpeedupError::Candidate(candidate_mean));
    }
    if !(baseline_mean.is_finite() && baseline_mean > 0.0) {
        return Err(SpeedupError::Baseline(baseline_mean));
    }
    Ok(baseline_mean / candidate_mean)
}

/// Final result for one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub problem_id: String,
    pub level: Level,
    pub correct: bool,
    pub speedup: Option<f64>,
}

impl OutcomeRow {
    pub fn validate(&self) -> Result<(), String> {
        match self.speedup {
            Some(_) if !self.correct => Err(format!("{}: speedup recorded for an incorrect result", self.problem_id)),
            Some(s) if !(s.is_finite() && s > 0.0) => Err(format!("{}: speedup {s} is not positive", self.problem_id)),
            _ => Ok(()),
        }
    }
}

/// `(1/n) · #{rows : correct ∧ speedup > p}`; `None` when `n` is 0.
pub fn fast_p(rows: &[OutcomeRow], p: f64, n: usize) -> Option<f64> {
    if n == 0 {
        return None;
    }
    debug_assert!(rows.len() <= n, "more rows than the denominator");
    let hits = rows
        .iter()
        .filter(|r| r.correct && r.speedup.is_some_and(|s| s > p))
        .count();
    Some(hits as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastPCurve {
    pub level: Level,
    pub thresholds: Vec<f64>,
    /// One value per threshold; `null` when the level has no problems.
    pub values: Vec<Option<f64>>,
    pub n: usize,
}

pub fn fast_p_curve(level: Level, rows: &[OutcomeRow], thresholds: &[f64], n: usize) -> FastPCurve {
    FastPCurve {
        level,
        thresholds: thresholds.to_vec(),
        values: thresholds.iter().map(|p| fast_p(rows, *p, n)).collect(),
        n,
    }
}

/// Sorted, deduplicated thresholds; each must be finite and ≥ 0.
pub fn normalize_thresholds(thresholds: &[f64]) -> Result<Vec<f64>, String> {
    if thresholds.is_empty() {
        return Err("at least one threshold is required".into());
    }
    if let Some(bad) = thresholds.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(format!("threshold {bad} must be a finite number ≥ 0"));
    }
    let mut t = thresholds.to_vec();
    t.sort_by(f64::total_cmp);
    t.dedup();
    Ok(t)
}

pub fn parse_thresholds(text: &str) -> Result<Vec<f64>, String> {
    let parsed: Result<Vec<f64>, String> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", s.trim())))
        .collect();
    normalize_thresholds(&parsed?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRow {
    pub problem_id: String,
    pub level: Level,
    /// State of the last readable record.
    pub final_state: Option<ExecState>,
    pub correct: bool,
    pub best_speedup: Option<f64>,
    pub best_iteration: Option<u32>,
    pub iterations_used: u32,
    /// The problem has no completion marker (aborted or never reached).
    pub incomplete: bool,
    pub corrupt_lines: usize,
}

impl ProblemRow {
    pub fn outcome(&self) -> OutcomeRow {
        OutcomeRow {
            problem_id: self.problem_id.clone(),
            level: self.level,
            correct: self.correct,
            speedup: self.best_speedup,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub run_id: String,
    pub backend: Backend,
    pub thresholds: Vec<f64>,
    pub curves: Vec<FastPCurve>,
    pub problems: Vec<ProblemRow>,
    pub excluded: Vec<String>,
    /// Contents of the run's `config.json`.
    pub config: serde_json::Value,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{0}")]
    Thresholds(String),
    #[error("cannot read run directory: {0}")]
    Run(String),
}

/// Builds the report for a run directory. Reads only; the same directory
/// always yields the same report.
pub fn aggregate(run_dir: &Path, thresholds: &[f64]) -> Result<Report, ReportError> {
    let thresholds = normalize_thresholds(thresholds).map_err(ReportError::Thresholds)?;
    let index = read_problem_index(run_dir).map_err(ReportError::Run)?;
    let layout = RunLayout::new(run_dir);
    let config: serde_json::Value = std::fs::read_to_string(layout.config())
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or(serde_json::Value::Null);

    let mut problems = Vec::with_capacity(index.problems.len());
    for entry in &index.problems {
        let lines = jsonl::read_tolerant::<RunRecord>(&layout.records(&entry.id))
            .map_err(|e| ReportError::Run(e.to_string()))?;
        if !lines.corrupt_lines.is_empty() {
            log::warn!(
                "problem={} event=corrupt_records lines={:?}",
                entry.id,
                lines.corrupt_lines
            );
        }
        let records: Vec<&RunRecord> = lines.records.iter().filter(|r| r.problem_id == entry.id).collect();
        let best = best_candidate(records.iter().copied());
        problems.push(ProblemRow {
            problem_id: entry.id.clone(),
            level: entry.level,
            final_state: records.last().map(|r| r.exec_state),
            correct: best.is_some(),
            best_speedup: best.as_ref().map(|b| b.speedup),
            best_iteration: best.as_ref().map(|b| b.iteration),
            iterations_used: records.len() as u32,
            incomplete: !layout.outcome(&entry.id).exists(),
            corrupt_lines: lines.corrupt_lines.len(),
        });
    }

    let curves = Level::ALL
        .iter()
        .map(|&level| {
            let rows: Vec<OutcomeRow> = problems.iter().filter(|p| p.level == level).map(ProblemRow::outcome).collect();
            fast_p_curve(level, &rows, &thresholds, rows.len())
        })
        .collect();
    Ok(Report {
        run_id: index.run_id,
        backend: index.backend,
        thresholds,
        curves,
        problems,
        excluded: index.excluded,
        config,
    })
}

fn fmt_p(p: f64) -> String {
    format!("{p}")
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Curves in long form: one line per (level, threshold).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,n,p,fast_p\n");
        for c in &self.curves {
            for (p, v) in c.thresholds.iter().zip(&c.values) {
                let v = v.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(s, "{},{},{},{v}", c.level, c.n, fmt_p(*p));
            }
        }
        s
    }

    /// Per-problem speedups of correct problems, for distribution plots.
    pub fn speedup_distribution_csv(&self) -> String {
        let mut rows: Vec<&ProblemRow> = self.problems.iter().filter(|p| p.best_speedup.is_some()).collect();
        rows.sort_by(|a, b| {
            a.level
                .cmp(&b.level)
                .then(b.best_speedup.unwrap_or(0.0).total_cmp(&a.best_speedup.unwrap_or(0.0)))
                .then(a.problem_id.cmp(&b.problem_id))
        });
        let mut s = String::from("level,problem_id,speedup\n");
        for r in rows {
            let _ = writeln!(s, "{},{},{}", r.level, r.problem_id, r.best_speedup.unwrap_or_default());
        }
        s
    }

    /// Plain-text tables for people.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "run {} ({})", self.run_id, self.backend);
        let _ = writeln!(s);
        let mut header = format!("{:<6} {:>5}", "level", "n");
        for p in &self.thresholds {
            let _ = write!(header, " {:>8}", format!("fast_{}", fmt_p(*p)));
        }
        let _ = writeln!(s, "{header}");
        for c in &self.curves {
            let mut line = format!("{:<6} {:>5}", c.level.to_string(), c.n);
            for v in &c.values {
                let _ = write!(line, " {:>8}", fmt_value(*v));
            }
            let _ = writeln!(s, "{line}");
        }
        let _ = writeln!(s);
        let width = self.problems.iter().map(|p| p.problem_id.len()).max().unwrap_or(7).max(7);
        let _ = writeln!(
            s,
            "{:<width$} {:>5} {:<20} {:>8} {:>5}",
            "problem", "level", "final state", "speedup", "iters"
        );
        for p in &self.problems {
            let state = p.final_state.map_or("not run", |st| st.as_str());
            let state = if p.incomplete {
                format!("{state} (incomplete)")
            } else {
                state.to_string()
            };
            let speed = p.best_speedup.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
            let _ = writeln!(
                s,
                "{:<width$} {:>5} {:<20} {:>8} {:>5}",
                p.problem_id, p.level.to_string(), state, speed, p.iterations_used
            );
        }
        if !self.excluded.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "excluded on {}: {}", self.backend, self.excluded.len());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stats(mean_ns: f64) -> TimingStats {
        crate::verify::reduce_timing(&[mean_ns]).unwrap()
    }

    fn row(i: usize, correct: bool, speedup: Option<f64>) -> OutcomeRow {
        OutcomeRow {
            problem_id: format!("level1/p{i}"),
            level: Level::One,
            correct,
            speedup,
        }
    }

    #[test]
    fn speedup_is_baseline_over_candidate() {
        assert_eq!(speedup(&stats(5.0), &stats(5.0)).unwrap(), 1.0);
        assert!((speedup(&stats(1.04e6), &stats(0.474e6)).unwrap() - 2.194).abs() < 1e-3);
        assert!((speedup(&stats(2.78e6), &stats(1.8e6)).unwrap() - 1.544).abs() < 1e-3);
        assert_eq!(speedup(&stats(1.0), &stats(0.0)), Err(SpeedupError::Candidate(0.0)));
    }

    #[test]
    fn fast_p_edges() {
        let all_fast: Vec<_> = (0..4).map(|i| row(i, true, Some(2.0))).collect();
        assert_eq!(fast_p(&all_fast, 1.0, 4), Some(1.0));
        assert_eq!(fast_p(&all_fast, 2.0, 4), Some(0.0), "strictly greater than p");
        let none: Vec<_> = (0..4).map(|i| row(i, false, None)).collect();
        assert_eq!(fast_p(&none, 0.0, 4), Some(0.0));
        assert_eq!(fast_p(&[], 1.0, 0), None);
    }

    #[test]
    fn denominator_counts_missing_problems() {
        let rows: Vec<_> = (0..91)
            .map(|i| match i {
                0..=10 => row(i, true, Some(1.2)),
                11..=30 => row(i, true, Some(0.8)),
                _ => row(i, false, None),
            })
            .collect();
        let v = fast_p(&rows, 1.0, 91).unwrap();
        assert!((v - 0.121).abs() < 5e-4);
        assert_eq!(fast_p(&rows, 0.0, 91), Some(31.0 / 91.0));
    }

    #[test]
    fn thresholds_parse_and_sort() {
        assert_eq!(parse_thresholds("1.5, 0,1").unwrap(), [0.0, 1.0, 1.5]);
        assert!(parse_thresholds("a").is_err());
        assert!(parse_thresholds("-1").is_err());
    }

    fn rows_strategy() -> impl Strategy<Value = Vec<OutcomeRow>> {
        prop::collection::vec((any::<bool>(), 0.01f64..4.0), 0..60).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (c, s))| row(i, c, c.then_some(s)))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn fast_p_monotone_and_bounded(rows in rows_strategy(), extra in 0usize..10) {
            let n = rows.len() + extra;
            let curve = fast_p_curve(Level::One, &rows, &DEFAULT_THRESHOLDS, n);
            if n == 0 {
                prop_assert!(curve.values.iter().all(Option::is_none));
            } else {
                let vals: Vec<f64> = curve.values.iter().map(|v| v.unwrap()).collect();
                prop_assert!(vals.windows(2).all(|w| w[0] >= w[1]));
                prop_assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
                let correct = rows.iter().filter(|r| r.correct).count();
                prop_assert_eq!(vals[0], correct as f64 / n as f64);
            }
        }

        #[test]
        fn speedup_reciprocal(a in 1e-3f64..1e9, b in 1e-3f64..1e9) {
            let x = speedup_of_means(a, b).unwrap() * speedup_of_means(b, a).unwrap();
            prop_assert!((x - 1.0).abs() <= 1e-12);
        }
    }
}
