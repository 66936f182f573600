use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use super::wire::{ShimRequest, ShimResult};
use super::{tail, ExecError, ExecRequest, Executor, Phase, Profiling, RawExecResult, TRANSCRIPT_TAIL};
use crate::backend::Backend;
use crate::digest;

/// Drives the evaluation shim: `<program> [args..] --request <file> --out <file>`.
///
/// Exit status 0 means the result document describes the candidate,
/// whatever happened to it. A nonzero exit, a missing result or a result
/// that contradicts the request is an infrastructure fault.
#[derive(Debug)]
pub struct SubprocessExecutor {
    program: PathBuf,
    args: Vec<String>,
    work_root: PathBuf,
    counter: AtomicU64,
}

const POLL: Duration = Duration::from_millis(10);

impl SubprocessExecutor {
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>, work_root: impl Into<PathBuf>) -> Self {
        SubprocessExecutor {
            program: program.into(),
            args,
            work_root: work_root.into(),
            counter: AtomicU64::new(0),
        }
    }

    fn prepare(&self, req: &ExecRequest) -> Result<(PathBuf, ShimRequest), ExecError> {
        let n = self.counter.fetch_add(1, Ordering::SeqCst);
        let dir = self.work_root.join(req.problem.slug()).join(format!(
            "{}-{n:04}",
            digest::short(&req.fingerprint(), 12)
        ));
        let artifacts = dir.join("artifacts");
        fs::create_dir_all(&artifacts).map_err(infra("create work dir"))?;
        let problem_path = dir.join("problem.py");
        let candidate_path = dir.join("candidate.py");
        fs::write(&problem_path, &req.problem.reference_source).map_err(infra("write problem source"))?;
        fs::write(&candidate_path, &req.candidate_source).map_err(infra("write candidate source"))?;
        let shim_req = ShimRequest::from_exec(req, problem_path, candidate_path, artifacts);
        let body = serde_json::to_vec_pretty(&shim_req).map_err(|e| ExecError::Infrastructure(e.to_string()))?;
        fs::write(dir.join("request.json"), body).map_err(infra("write request"))?;
        Ok((dir, shim_req))
    }
}

fn infra(what: &'static str) -> impl FnOnce(std::io::Error) -> ExecError {
    move |e| ExecError::Infrastructure(format!("{what}: {e}"))
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

enum Waited {
    Exited(std::process::ExitStatus),
    TimedOut,
}

fn wait_with_timeout(child: &mut Child, limit: Duration) -> std::io::Result<Waited> {
    let start = Instant::now();
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok(Waited::Exited(status));
        }
        if start.elapsed() >= limit {
            kill_tree(child);
            let _ = child.wait();
            return Ok(Waited::TimedOut);
        }
        thread::sleep(POLL);
    }
}

/// Kills the shim and everything it spawned. The shim runs as the leader
/// of its own process group on unix.
fn kill_tree(child: &mut Child) {
    #[cfg(unix)]
    {
        // SAFETY: plain syscall on a pid we spawned.
        unsafe {
            libc::kill(-(child.id() as i32), libc::SIGKILL);
        }
    }
    let _ = child.kill();
}

fn parse_result(out_path: &Path, stdout: &str) -> Result<ShimResult, String> {
    match fs::read_to_string(out_path) {
        Ok(text) => serde_json::from_str(&text).map_err(|e| format!("result document is not valid: {e}")),
        Err(_) => stdout
            .lines()
            .rev()
            .find(|l| l.trim_start().starts_with('{'))
            .ok_or_else(|| "shim wrote no result document".to_string())
            .and_then(|l| serde_json::from_str(l).map_err(|e| format!("stdout result is not valid: {e}"))),
    }
}

impl Executor for SubprocessExecutor {
    fn execute(&self, req: &ExecRequest) -> Result<RawExecResult, ExecError> {
        let (dir, shim_req) = self.prepare(req)?;
        let out_path = dir.join("result.json");
        let mut cmd = Command::new(&self.program);
        cmd.args(&self.args)
            .arg("--request")
            .arg(dir.join("request.json"))
            .arg("--out")
            .arg(&out_path)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        #[cfg(unix)]
        {
            use std::os::unix::process::CommandExt;
            cmd.process_group(0);
        }
        if req.backend == Backend::Metal && req.profiling == Profiling::Capture {
            cmd.env("MTL_CAPTURE_ENABLED", "1");
        }
        let started = Instant::now();
        let mut child = cmd
            .spawn()
            .map_err(|e| ExecError::Infrastructure(format!("cannot start shim {}: {e}", self.program.display())))?;
        let out = drain(child.stdout.take());
        let err = drain(child.stderr.take());
        let waited = wait_with_timeout(&mut child, req.timeout).map_err(infra("wait for shim"))?;
        let stdout = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();
        let captured = format!("{stderr}{stdout}");

        let status = match waited {
            Waited::TimedOut => return Ok(RawExecResult::timed_out(req.timeout, &captured)),
            Waited::Exited(s) => s,
        };
        if !status.success() {
            return Err(ExecError::Infrastructure(format!(
                "shim exited with {status}: {}",
                tail(&stderr, 1024).trim()
            )));
        }
        let result = parse_result(&out_path, &stdout)
            .and_then(|r| r.into_raw(&shim_req))
            .map_err(|e| ExecError::Infrastructure(format!("shim protocol violation: {e}")))?;
        let mut raw = result;
        if raw.wall_time_ms == 0.0 {
            raw.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
        }
        let transcript = match raw.phase_reached {
            Phase::Compile => &mut raw.compile_transcript,
            _ => &mut raw.run_transcript,
        };
        if transcript.is_empty() && !captured.trim().is_empty() {
            *transcript = tail(&captured, TRANSCRIPT_TAIL).to_string();
        }
        Ok(raw)
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use crate::backend::DeviceId;
    use crate::problem::{Level, Problem};
    use std::os::unix::fs::PermissionsExt;
    use std::sync::Arc;

    fn script(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("shim.sh");
        fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();
        path
    }

    fn req(backend: Backend) -> ExecRequest {
        let problem = Arc::new(Problem {
            id: "level1/p".into(),
            level: Level::One,
            name: "p".into(),
            reference_source: "ref".into(),
            source_path: None,
            backend_support: Backend::ALL.into_iter().collect(),
            tags: vec![],
        });
        let mut r = ExecRequest::new(problem, "cand", backend, DeviceId::new("0"));
        r.timing.timed_runs = 3;
        r
    }

    // $2 is the request path, $4 the output path.
    #[test]
    fn compile_failure_is_data() {
        let dir = tempfile::tempdir().unwrap();
        let shim = script(
            dir.path(),
            r#"echo "error: unknown type 'flaot'" >&2
printf '{"schema_version":1,"phase_reached":"compile"}' > "$4""#,
        );
        let exec = SubprocessExecutor::new(shim, vec![], dir.path().join("work"));
        let raw = exec.execute(&req(Backend::Cuda)).unwrap();
        assert_eq!(raw.phase_reached, Phase::Compile);
        assert!(raw.compile_transcript.contains("flaot"));
    }

    #[test]
    fn request_document_reaches_shim() {
        let dir = tempfile::tempdir().unwrap();
        let shim = script(
            dir.path(),
            r#"grep -q '"problem_id": "level1/p"' "$2" || exit 3
printf '{"schema_version":1,"phase_reached":"timed","candidate_samples_ns":[1,1,1],"baseline_samples_ns":[2,2,2],"device_class":"cpu_fallback"}' > "$4""#,
        );
        let exec = SubprocessExecutor::new(shim, vec![], dir.path().join("work"));
        let raw = exec.execute(&req(Backend::Cuda)).unwrap();
        assert_eq!(raw.phase_reached, Phase::Timed);
        assert_eq!(raw.device_class.as_deref(), Some("cpu_fallback"));
    }

    #[test]
    fn nonzero_exit_is_infrastructure() {
        let dir = tempfile::tempdir().unwrap();
        let shim = script(dir.path(), "echo 'no device' >&2; exit 1");
        let exec = SubprocessExecutor::new(shim, vec![], dir.path().join("work"));
        let err = exec.execute(&req(Backend::Cuda)).unwrap_err();
        assert!(matches!(err, ExecError::Infrastructure(m) if m.contains("no device")));
    }

    #[test]
    fn missing_result_is_protocol_violation() {
        let dir = tempfile::tempdir().unwrap();
        let shim = script(dir.path(), "echo hello");
        let exec = SubprocessExecutor::new(shim, vec![], dir.path().join("work"));
        let err = exec.execute(&req(Backend::Cuda)).unwrap_err();
        assert!(matches!(err, ExecError::Infrastructure(m) if m.contains("protocol")));
    }

    #[test]
    fn stdout_document_accepted_without_out_file() {
        let dir = tempfile::tempdir().unwrap();
        let shim = script(
            dir.path(),
            r#"echo 'compiling...'
echo '{"schema_version":1,"phase_reached":"run","run_transcript":"Traceback: boom"}'"#,
        );
        let exec = SubprocessExecutor::new(shim, vec![], dir.path().join("work"));
        let raw = exec.execute(&req(Backend::Cuda)).unwrap();
        assert_eq!(raw.phase_reached, Phase::Run);
        assert!(raw.run_transcript.contains("boom"));
    }

    #[test]
    fn timeout_kills_shim() {
        let dir = tempfile::tempdir().unwrap();
        let shim = script(dir.path(), "echo started; sleep 5");
        let exec = SubprocessExecutor::new(shim, vec![], dir.path().join("work"));
        let mut r = req(Backend::Cuda);
        r.timeout = Duration::from_millis(200);
        let start = Instant::now();
        let raw = exec.execute(&r).unwrap();
        assert!(start.elapsed() < Duration::from_secs(4));
        assert!(raw.timed_out);
        assert_eq!(raw.phase_reached, Phase::Run);
    }

    #[test]
    fn metal_capture_sets_env() {
        let dir = tempfile::tempdir().unwrap();
        let shim = script(
            dir.path(),
            r#"test "$MTL_CAPTURE_ENABLED" = "1" || exit 4
printf '{"schema_version":1,"phase_reached":"compile"}' > "$4""#,
        );
        let exec = SubprocessExecutor::new(shim, vec![], dir.path().join("work"));
        let mut r = req(Backend::Metal);
        r.profiling = Profiling::Capture;
        assert!(exec.execute(&r).is_ok());
        r.profiling = Profiling::Off;
        assert!(exec.execute(&r).is_err());
    }
}
