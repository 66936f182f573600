use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const MATMUL: &str = "level1/1_Square_matrix_multiplication";

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn problems_dir() -> String {
    repo().join("problems/kernelbench").display().to_string()
}

fn kforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kforge"))
        .args(args)
        .env("KFORGE_LOG", "warn")
        .output()
        .expect("spawn kforge")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// The only run directory under `runs`.
fn run_dir(runs: &Path) -> PathBuf {
    let dirs: Vec<PathBuf> = std::fs::read_dir(runs).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

fn long_flags(text: &str) -> BTreeSet<String> {
    let mut flags = BTreeSet::new();
    let mut rest = text;
    while let Some(i) = rest.find("--") {
        rest = &rest[i + 2..];
        let name: String = rest.chars().take_while(|c| c.is_ascii_lowercase() || *c == '-').collect();
        if !name.is_empty() {
            flags.insert(format!("--{name}"));
        }
    }
    flags
}

#[test]
fn readme_documents_every_run_flag() {
    let readme = std::fs::read_to_string(repo().join("README.md")).unwrap();
    let section = readme
        .split("### `kforge run`")
        .nth(1)
        .and_then(|s| s.split("\n### ").next())
        .expect("README has a run section");
    let table: String = section.lines().filter(|l| l.starts_with("| `--")).map(|l| l.split('|').nth(1).unwrap()).collect();
    let documented = long_flags(&table);

    let help = kforge(&["run", "--help"]);
    assert_eq!(code(&help), 0);
    let options: String = stdout(&help).lines().filter(|l| l.trim_start().starts_with('-')).collect();
    let mut actual = long_flags(&options);
    actual.remove("--help");
    assert_eq!(documented, actual);
}

#[test]
fn scripted_run_then_report() {
    let runs = tempfile::tempdir().unwrap();
    let config = fixture("mock_run.toml");
    let args = [
        "run",
        "--config",
        config.to_str().unwrap(),
        "--runs-dir",
        runs.path().to_str().unwrap(),
    ];
    let out = kforge(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("level 1: 1 of 1 correct"), "{}", stdout(&out));

    let dir = run_dir(runs.path());
    for f in ["config.json", "problems.json", "summary.json", "kforge.toml"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let records = std::fs::read_to_string(dir.join("level1_1_Square_matrix_multiplication/records.jsonl")).unwrap();
    let states: Vec<String> = records
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["exec_state"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(states, ["compilation_failure", "correct", "correct"]);

    let report = kforge(&["report", "--run", dir.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&report), 0, "{}", stderr(&report));
    let v: Value = serde_json::from_str(&stdout(&report)).unwrap();
    let level1 = &v["curves"][0];
    assert_eq!(level1["n"], 1);
    let values: Vec<f64> = level1["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(values, [1.0, 1.0, 1.0, 1.0, 0.0]);
    let best = v["problems"][0]["best_speedup"].as_f64().unwrap();
    assert!((best - 1.6).abs() < 1e-9, "{best}");

    let csv = kforge(&["report", "--run", dir.to_str().unwrap(), "--format", "csv", "--thresholds", "1.5,1.7"]);
    assert!(stdout(&csv).starts_with("level,n,p,fast_p\n1,1,1.5,1\n1,1,1.7,0\n"), "{}", stdout(&csv));

    // Resuming a finished run does no new work.
    let again = kforge(&[&args[..], &["--resume", dir.file_name().unwrap().to_str().unwrap()]].concat());
    assert_eq!(code(&again), 0, "{}", stderr(&again));
    assert!(stdout(&again).contains("(resumed 1)"), "{}", stdout(&again));
    assert_eq!(
        std::fs::read_to_string(dir.join("level1_1_Square_matrix_multiplication/records.jsonl")).unwrap(),
        records
    );
}

#[test]
fn unscripted_mock_run_succeeds() {
    let runs = tempfile::tempdir().unwrap();
    let problems = problems_dir();
    let out = kforge(&[
        "run",
        "--problems",
        &problems,
        "--problem",
        MATMUL,
        "--iterations",
        "2",
        "--backend",
        "metal",
        "--runs-dir",
        runs.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let dir = run_dir(runs.path());
    let toml = std::fs::read_to_string(dir.join("kforge.toml")).unwrap();
    assert!(toml.contains("backend = \"metal\""), "{toml}");
    assert!(toml.contains("num_iterations = 2"), "{toml}");
}

#[test]
fn aborted_problems_exit_one() {
    let runs = tempfile::tempdir().unwrap();
    let problems = problems_dir();
    let broken = fixture("broken_executor.json");
    let out = kforge(&[
        "run",
        "--problems",
        &problems,
        "--problem",
        MATMUL,
        "--mock-executor-script",
        broken.to_str().unwrap(),
        "--runs-dir",
        runs.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("--resume"), "{}", stderr(&out));
    assert!(stdout(&out).contains("device 0 lost"), "{}", stdout(&out));
    assert!(!run_dir(runs.path()).join("level1_1_Square_matrix_multiplication/outcome.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    let runs = tempfile::tempdir().unwrap();
    let runs = runs.path().to_str().unwrap();
    let problems = problems_dir();
    let bad_config = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(bad_config.path(), "problemz = 1\n").unwrap();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["run", "--backend", "tpu"], "unknown backend"),
        (vec!["run", "--problems", &problems, "--problem", "level9/nope", "--runs-dir", runs], "level9/nope"),
        (vec!["run", "--problems", &problems, "--use-reference", "--runs-dir", runs], "--references"),
        (vec!["run", "--devices", "0", "--parallelism", "2"], "parallelism 2"),
        (vec!["run", "--model", "provider_z"], "provider_z"),
        (vec!["run", "--config", bad_config.path().to_str().unwrap()], "problemz"),
        (vec!["run", "--executor", "shim"], "shim_program"),
        (vec!["report", "--run", runs], "not a run directory"),
        (vec!["report", "--run", runs, "--thresholds", "1,-2"], "-2"),
        (vec!["problems", "--problems", runs], "manifest.toml"),
        (vec!["run", "--no-such-flag"], "--no-such-flag"),
    ];
    for (args, needle) in cases {
        let out = kforge(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn problem_counts_per_backend() {
    let problems = problems_dir();
    let cuda = kforge(&["problems", "--problems", &problems]);
    assert_eq!(code(&cuda), 0);
    assert!(stdout(&cuda).starts_with("cuda: 250 problems\n  level 1: 100\n  level 2: 100\n  level 3: 50\n"));

    let metal = kforge(&["problems", "--problems", &problems, "--backend", "metal", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&metal)).unwrap();
    assert_eq!(v["counts_by_level"], serde_json::json!({"1": 91, "2": 79, "3": 50}));
    assert_eq!(v["excluded"].as_array().unwrap().len(), 30);
}

#[test]
fn printed_config_round_trips() {
    let first = kforge(&["run", "--model", "provider_c:deepseek-chat", "--devices", "0,1", "--seed", "9", "--print-config"]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let text = stdout(&first);
    assert!(text.contains("model_name = \"deepseek-chat\""), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kforge.toml");
    std::fs::write(&path, &text).unwrap();
    let second = kforge(&["run", "--config", path.to_str().unwrap(), "--print-config"]);
    assert_eq!(code(&second), 0, "{}", stderr(&second));
    // Relative paths now resolve against the file's directory.
    let expected = text
        .replace("\"problems/kernelbench\"", &format!("{:?}", dir.path().join("problems/kernelbench").display().to_string()))
        .replace("\"runs\"", &format!("{:?}", dir.path().join("runs").display().to_string()));
    assert_eq!(stdout(&second), expected);
}

#[test]
fn templates_export_check_render() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("t");
    let out_str = out_dir.to_str().unwrap();
    assert_eq!(code(&kforge(&["templates", "export", out_str])), 0);
    assert_eq!(code(&kforge(&["templates", "check", out_str])), 0);

    let gen = out_dir.join("generation.tmpl");
    let text = std::fs::read_to_string(&gen).unwrap();
    std::fs::write(&gen, text.replacen("{% endsection %}", "", 1)).unwrap();
    let broken = kforge(&["templates", "check", out_str]);
    assert_eq!(code(&broken), 2, "{}", stderr(&broken));

    let problems = problems_dir();
    let rendered = kforge(&["templates", "render", "--problem", MATMUL, "--problems", &problems, "--backend", "metal"]);
    assert_eq!(code(&rendered), 0, "{}", stderr(&rendered));
    let prompt = stdout(&rendered);
    assert!(prompt.contains("Metal"), "{prompt}");
    assert!(prompt.contains("return A @ B"), "{prompt}");
}

#[test]
fn empty_problem_set_counts_zero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("manifest.toml"), "# no problems yet\n").unwrap();
    let out = kforge(&["problems", "--problems", dir.path().to_str().unwrap(), "--backend", "metal"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "metal: 0 problems\n  level 1: 0\n  level 2: 0\n  level 3: 0\n");
}

#[test]
fn generated_mock_scripts_drive_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let scripts = dir.path().join("scripts");
    let out = kforge(&["fixtures", "mock-scripts", "--steps", "none, runtime, 1.3, mismatch", "--out", scripts.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let problems = problems_dir();
    let runs = dir.path().join("runs");
    let script = |name: &str| scripts.join(name).display().to_string();
    let (generation, analysis, executor) = (script("generation.json"), script("analysis.json"), script("executor.json"));
    let run = kforge(&[
        "run",
        "--problems",
        &problems,
        "--problem",
        MATMUL,
        "--iterations",
        "4",
        "--use-profiling",
        "--mock-generation-script",
        &generation,
        "--mock-analysis-script",
        &analysis,
        "--mock-executor-script",
        &executor,
        "--runs-dir",
        runs.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let records = std::fs::read_to_string(run_dir(&runs).join("level1_1_Square_matrix_multiplication/records.jsonl")).unwrap();
    let states: Vec<String> = records
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["exec_state"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(states, ["generation_failure", "runtime_error", "correct", "output_mismatch"]);

    let bad = kforge(&["fixtures", "mock-scripts", "--steps", "compile, sometimes", "--out", scripts.to_str().unwrap()]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("sometimes"), "{}", stderr(&bad));
}

#[cfg(unix)]
fn fake_shim(dir: &Path, body: &str) -> PathBuf {
    use std::os::unix::fs::PermissionsExt;
    let path = dir.join("shim.sh");
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

/// The shim sees `--request FILE --out FILE` as `$1..$4`.
#[cfg(unix)]
#[test]
fn shim_check_reports_the_example_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let work = dir.path().join("work");
    let work = work.to_str().unwrap();
    let samples = |ns: u32| format!("[{}]", vec![ns.to_string(); 3].join(","));
    let good = fake_shim(
        dir.path(),
        &format!(
            r#"grep -q '"backend": "metal"' "$2" || exit 9
printf '{{"schema_version":1,"phase_reached":"timed","shape_ok":true,"max_abs_dev":0,"max_rel_dev":0,"candidate_samples_ns":{},"baseline_samples_ns":{},"device_class":"fake"}}' > "$4""#,
            samples(500_000),
            samples(1_000_000)
        ),
    );
    let out = kforge(&[
        "fixtures", "shim-check", "--shim", good.to_str().unwrap(), "--backend", "metal", "--timed-runs", "3", "--work-dir", work,
    ]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("state: correct"), "{text}");
    assert!(text.contains("speedup: 2.000"), "{text}");
    assert!(text.contains("device class: fake"), "{text}");

    let failing = fake_shim(
        dir.path(),
        r#"printf '{"schema_version":1,"phase_reached":"compile","compile_transcript":"nvcc: not found"}' > "$4""#,
    );
    let out = kforge(&["fixtures", "shim-check", "--shim", failing.to_str().unwrap(), "--work-dir", work]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("nvcc: not found"), "{}", stdout(&out));

    let crashing = fake_shim(dir.path(), "echo 'no accelerator' >&2; exit 3");
    let out = kforge(&["fixtures", "shim-check", "--shim", crashing.to_str().unwrap(), "--work-dir", work]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("shim failed"), "{}", stderr(&out));

    let out = kforge(&["fixtures", "shim-check", "--shim", "/no/such/shim", "--work-dir", work]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}
