//! The run configuration file.
//!
//! Every command-line flag of `kforge run` has a field here; flags override
//! the file, and the effective configuration is echoed into the run
//! directory. Relative paths in a file are relative to that file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::DEFAULT_CONCURRENCY;
use crate::orchestrator::LoopConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutorKind {
    /// Scripted executor; no accelerator needed.
    #[default]
    Mock,
    /// The evaluation shim, one subprocess per evaluation.
    Shim,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutorSettings {
    pub kind: ExecutorKind,
    /// Mock executor script (JSON).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mock_script: Option<PathBuf>,
    /// Shim program, e.g. `python3`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shim_program: Option<PathBuf>,
    /// Arguments placed before `--request`, e.g. the shim script path.
    pub shim_args: Vec<String>,
    /// Scratch directory for shim requests; defaults to `<run dir>/work`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub work_dir: Option<PathBuf>,
    /// Re-measure the baseline on every evaluation.
    pub bypass_baseline_cache: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderSettings {
    /// Mock provider script for the generation agent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generation_script: Option<PathBuf>,
    /// Mock provider script for the analysis agent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis_script: Option<PathBuf>,
    /// Concurrent requests per provider.
    pub concurrency: usize,
}

impl Default for ProviderSettings {
    fn default() -> Self {
        ProviderSettings {
            generation_script: None,
            analysis_script: None,
            concurrency: DEFAULT_CONCURRENCY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    /// Problem set root (holds `manifest.toml`).
    pub problems: PathBuf,
    /// Only run these problem ids; empty means all.
    pub problem_ids: Vec<String>,
    pub runs_dir: PathBuf,
    /// Reference corpus directory (holds `index.json`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub references: Option<PathBuf>,
    /// Directory with replacement prompt templates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
    pub devices: Vec<String>,
    /// Problems in flight at once; defaults to the number of devices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    pub executor: ExecutorSettings,
    pub providers: ProviderSettings,
    pub run: LoopConfig,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        RunConfigFile {
            problems: PathBuf::from("problems/kernelbench"),
            problem_ids: Vec::new(),
            runs_dir: PathBuf::from("runs"),
            references: None,
            templates: None,
            devices: vec!["0".into()],
            parallelism: None,
            executor: ExecutorSettings::default(),
            providers: ProviderSettings::default(),
            run: LoopConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut c = Self::from_toml(&text).map_err(|message| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        })?;
        c.resolve_relative(path.parent().unwrap_or(Path::new("")));
        Ok(c)
    }

    /// Joins relative paths onto `base`. A shim program without a
    /// directory part is left alone so it is looked up on `PATH`;
    /// `shim_args` are passed through untouched.
    pub fn resolve_relative(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.problems);
        join(&mut self.runs_dir);
        for p in [
            &mut self.references,
            &mut self.templates,
            &mut self.executor.mock_script,
            &mut self.executor.work_dir,
            &mut self.providers.generation_script,
            &mut self.providers.analysis_script,
        ]
        .into_iter()
        .flatten()
        {
            join(p);
        }
        if let Some(program) = &mut self.executor.shim_program {
            if program.components().count() > 1 {
                join(program);
            }
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> Result<String, String> {
        toml::to_string_pretty(self).map_err(|e| e.to_string())
    }

    pub fn parallelism(&self) -> usize {
        self.parallelism.unwrap_or(self.devices.len().max(1))
    }

    /// All configuration errors, one message each.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = self.run.validate().err().unwrap_or_default();
        if self.devices.is_empty() {
            errs.push("at least one device is required".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for d in &self.devices {
            if d.trim().is_empty() {
                errs.push("device ids must be non-empty".into());
            } else if !seen.insert(d) {
                errs.push(format!("device '{d}' listed twice"));
            }
        }
        let par = self.parallelism();
        if par == 0 || par > self.devices.len().max(1) {
            errs.push(format!(
                "parallelism {par} must be between 1 and the number of devices ({})",
                self.devices.len()
            ));
        }
        if i64::try_from(self.run.seed).is_err() {
            errs.push(format!("seed {} does not fit in a signed 64-bit integer", self.run.seed));
        }
        if self.executor.kind == ExecutorKind::Shim && self.executor.shim_program.is_none() {
            errs.push("executor.kind = \"shim\" needs executor.shim_program".into());
        }
        if self.providers.concurrency == 0 {
            errs.push("providers.concurrency must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{Provider, ProviderProfile};
    use crate::orchestrator::LoopMode;
    use proptest::prelude::*;

    #[test]
    fn defaults_match_replication_settings() {
        let c = RunConfigFile::default();
        assert_eq!(c.run.num_iterations, 5);
        assert_eq!(c.run.timing.timed_runs, 100);
        assert_eq!(c.run.timing.warmup_runs, 10);
        assert_eq!(c.providers.concurrency, 4);
        c.validate().unwrap();
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = RunConfigFile::from_toml(
            r#"
            problems = "kb"
            devices = ["0", "1"]
            [run]
            backend = "metal"
            mode = "single_shot"
            num_iterations = 1
            [run.strategy]
            use_reference = true
            "#,
        )
        .unwrap();
        assert_eq!(c.run.backend, crate::Backend::Metal);
        assert_eq!(c.run.mode, LoopMode::SingleShot);
        assert!(c.run.strategy.use_reference);
        assert_eq!(c.parallelism(), 2);
        c.validate().unwrap();
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "problems = \"kb\"\nreferences = \"/abs/refs\"\n[executor]\nkind = \"shim\"\nshim_program = \"python3\"\nshim_args = [\"shim.py\"]\nmock_script = \"s/exec.json\"\n",
        )
        .unwrap();
        let c = RunConfigFile::load(&path).unwrap();
        assert_eq!(c.problems, dir.path().join("kb"));
        assert_eq!(c.runs_dir, dir.path().join("runs"));
        assert_eq!(c.references, Some(PathBuf::from("/abs/refs")));
        assert_eq!(c.executor.mock_script, Some(dir.path().join("s/exec.json")));
        assert_eq!(c.executor.shim_program, Some(PathBuf::from("python3")));
        assert_eq!(c.executor.shim_args, ["shim.py"]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfigFile::from_toml("problemz = \"x\"").is_err());
    }

    #[test]
    fn validation_itemizes() {
        let mut c = RunConfigFile::default();
        c.run.mode = LoopMode::SingleShot;
        c.devices = vec!["0".into(), "0".into()];
        c.executor.kind = ExecutorKind::Shim;
        let errs = c.validate().unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
    }

    proptest! {
        #[test]
        fn toml_round_trip(
            iterations in 1u32..20,
            seed in 0u64..=i64::MAX as u64,
            provider in 0usize..4,
            refs in any::<bool>(),
            prof in any::<bool>(),
            ndev in 1usize..5,
            atol in 0.0f64..1.0,
        ) {
            let mut c = RunConfigFile::default();
            c.run.num_iterations = iterations;
            c.run.seed = seed;
            c.run.generation_profile = ProviderProfile::replication(Provider::ALL[provider]);
            c.run.analysis_profile = prof.then(|| ProviderProfile::replication(Provider::ProviderB));
            c.run.strategy.use_reference = refs;
            c.run.strategy.use_profiling = prof;
            c.run.correctness.atol = atol;
            c.devices = (0..ndev).map(|d| d.to_string()).collect();
            c.references = refs.then(|| PathBuf::from("refs/cuda"));
            let text = c.to_toml().unwrap();
            let back = RunConfigFile::from_toml(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.to_toml().unwrap(), text);
        }
    }
}
