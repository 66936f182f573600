//! Browser bindings for three kforge calculations: a fast_p curve over
//! typed-in results, the speedup of two timings, and a refinement loop
//! replayed against scripted verdicts.
//!
//! Each export is a thin wrapper around a plain function that returns
//! `Result<_, String>`, so everything is testable without a browser.

use kforge::metrics::{self, OutcomeRow};
use kforge::orchestrator::LoopPhase;
use kforge::problem::Level;
use kforge::sim;
use kforge::Backend;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Replays are capped so a typo in the page cannot hang the tab.
pub const MAX_ITERATIONS: u32 = 50;

/// Parses one result per comma/whitespace-separated token: a speedup
/// (`1.3`) for a correct kernel, or `x` for an incorrect one.
pub fn parse_results(text: &str) -> Result<Vec<OutcomeRow>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .enumerate()
        .map(|(i, token)| {
            let speedup = match token {
                "x" | "X" => None,
                _ => Some(
                    token
                        .parse::<f64>()
                        .ok()
                        .filter(|s| s.is_finite() && *s > 0.0)
                        .ok_or_else(|| format!("'{token}' is neither a positive speedup nor x"))?,
                ),
            };
            Ok(OutcomeRow {
                problem_id: format!("problem_{}", i + 1),
                level: Level::One,
                correct: speedup.is_some(),
                speedup,
            })
        })
        .collect()
}

/// fast_p at each threshold. `n` is the number of problems attempted; it
/// defaults to the number of results and may not be smaller.
pub fn fast_p_curve_json(results: &str, n: Option<usize>, thresholds: &str) -> Result<Value, String> {
    let rows = parse_results(results)?;
    let n = n.unwrap_or(rows.len());
    if n < rows.len() {
        return Err(format!("{} results but only {n} problems", rows.len()));
    }
    let thresholds = metrics::parse_thresholds(thresholds)?;
    let points: Vec<Value> = thresholds
        .iter()
        .map(|&p| {
            let hits = rows.iter().filter(|r| r.correct && r.speedup.is_some_and(|s| s > p)).count();
            json!({ "p": p, "fast_p": metrics::fast_p(&rows, p, n), "hits": hits })
        })
        .collect();
    Ok(json!({ "n": n, "correct": rows.iter().filter(|r| r.correct).count(), "points": points }))
}

/// Baseline time over candidate time.
pub fn speedup_of(baseline_ms: f64, candidate_ms: f64) -> Result<f64, String> {
    metrics::speedup_of_means(baseline_ms, candidate_ms).map_err(|e| e.to_string().replace(" ns", " ms"))
}

/// Runs the real loop over the scripted verdicts and summarizes each
/// iteration.
pub fn replay_json(script: &str, iterations: u32, backend: &str, use_profiling: bool) -> Result<Value, String> {
    if !(1..=MAX_ITERATIONS).contains(&iterations) {
        return Err(format!("iterations must be between 1 and {MAX_ITERATIONS}"));
    }
    let backend: Backend = backend.parse().map_err(|e| format!("{e}"))?;
    let steps = sim::parse_steps(script)?;
    let mut cfg = sim::mock_config(backend, iterations);
    cfg.strategy.use_profiling = use_profiling;
    let outcome = sim::replay(&sim::demo_problem(backend), &steps, &cfg);
    let records: Vec<Value> = outcome
        .records
        .iter()
        .map(|r| {
            json!({
                "iteration": r.iteration,
                "phase": match r.phase {
                    LoopPhase::Functional => "functional",
                    LoopPhase::Optimization => "optimization",
                },
                "state": r.exec_state.as_str(),
                "speedup": r.speedup(),
                "recommendation": r.recommendation,
                "feedback": r.feedback,
                "notes": r.notes,
            })
        })
        .collect();
    Ok(json!({
        "records": records,
        "best": outcome.best.map(|b| json!({ "iteration": b.iteration, "speedup": b.speedup })),
        "generations": outcome.generations.first().copied().unwrap_or(0),
        "aborted": outcome.aborted,
        "notes": outcome.notes,
    }))
}

fn js(result: Result<Value, String>) -> Result<String, JsError> {
    result.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// JSON `{n, correct, points: [{p, fast_p, hits}]}`. Pass `n = 0` to use
/// the number of results.
#[wasm_bindgen]
pub fn fast_p_curve(results: &str, n: usize, thresholds: &str) -> Result<String, JsError> {
    js(fast_p_curve_json(results, (n > 0).then_some(n), thresholds))
}

#[wasm_bindgen]
pub fn speedup(baseline_ms: f64, candidate_ms: f64) -> Result<f64, JsError> {
    speedup_of(baseline_ms, candidate_ms).map_err(|e| JsError::new(&e))
}

/// JSON `{records: [...], best, generations, aborted, notes}`.
#[wasm_bindgen]
pub fn replay_loop(script: &str, iterations: u32, backend: &str, use_profiling: bool) -> Result<String, JsError> {
    js(replay_json(script, iterations, backend, use_profiling))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_counts_strictly_faster_results() {
        let v = fast_p_curve_json("1.0, 2.5, x, 0.8", Some(5), "0,1,2").unwrap();
        let values: Vec<f64> = v["points"].as_array().unwrap().iter().map(|p| p["fast_p"].as_f64().unwrap()).collect();
        assert_eq!(values, vec![0.6, 0.2, 0.2]);
        assert_eq!(v["correct"], 3);
        assert_eq!(v["points"][1]["hits"], 1);
    }

    #[test]
    fn curve_defaults_n_and_rejects_too_few_problems() {
        assert_eq!(fast_p_curve_json("1.5 x", None, "1").unwrap()["points"][0]["fast_p"], 0.5);
        assert!(fast_p_curve_json("1.5 x 2", Some(2), "1").unwrap_err().contains("only 2 problems"));
        assert!(fast_p_curve_json("fast", None, "1").is_err());
        assert!(fast_p_curve_json("-1", None, "1").is_err());
    }

    #[test]
    fn empty_results_have_no_curve_values() {
        let v = fast_p_curve_json("", None, "0").unwrap();
        assert_eq!(v["points"][0]["fast_p"], Value::Null);
    }

    #[test]
    fn speedup_is_baseline_over_candidate() {
        assert_eq!(speedup_of(3.0, 1.5).unwrap(), 2.0);
        assert!(speedup_of(1.0, 0.0).unwrap_err().contains("ms"));
    }

    #[test]
    fn replay_keeps_the_fastest_correct_iteration() {
        let v = replay_json("compile, 1.2, 1.6, mismatch, 1.1", 5, "cuda", false).unwrap();
        let states: Vec<&str> = v["records"].as_array().unwrap().iter().map(|r| r["state"].as_str().unwrap()).collect();
        assert_eq!(
            states,
            ["compilation_failure", "correct", "correct", "output_mismatch", "correct"]
        );
        assert_eq!(v["records"][0]["phase"], "functional");
        assert_eq!(v["records"][2]["phase"], "optimization");
        assert_eq!(v["best"]["iteration"], 3);
        assert_eq!(v["best"]["speedup"], 1.6);
    }

    #[test]
    fn replay_with_profiling_notes_missing_evidence() {
        let v = replay_json("1.2, 1.3", 2, "metal", true).unwrap();
        assert_eq!(v["records"][1]["recommendation"], Value::Null);
        assert!(!v["records"][1]["notes"].as_array().unwrap().is_empty());
    }

    #[test]
    fn replay_reports_aborts_and_bad_input() {
        let v = replay_json("infra", 3, "cuda", false).unwrap();
        assert!(v["aborted"].is_string());
        assert!(replay_json("1.0", 0, "cuda", false).is_err());
        assert!(replay_json("1.0", 2, "tpu", false).is_err());
    }
}
