//! Benchmark problem sets and the cross-backend reference corpus.
//!
//! A problem set is a directory holding `manifest.toml` plus one reference
//! source file per problem:
//!
//! ```toml
//! [unsupported_operations]
//! metal = ["ConvTranspose3d"]
//!
//! [[problem]]
//! id = "level1/problem_001"
//! level = 1
//! name = "Square matmul"
//! source = "level1/problem_001.py"
//! unsupported_backends = []
//! tags = ["matmul"]
//! ```
//!
//! A problem is excluded for a backend when the backend is listed in its
//! `unsupported_backends`, or when one of its `tags` names an operation
//! listed for that backend under `[unsupported_operations]`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::digest;

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const REFERENCE_INDEX_FILE: &str = "index.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Level {
    One,
    Two,
    Three,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::One, Level::Two, Level::Three];

    pub fn number(self) -> u8 {
        match self {
            Level::One => 1,
            Level::Two => 2,
            Level::Three => 3,
        }
    }
}

impl TryFrom<u8> for Level {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Level::One),
            2 => Ok(Level::Two),
            3 => Ok(Level::Three),
            other => Err(format!("level must be 1, 2 or 3 (got {other})")),
        }
    }
}

impl From<Level> for u8 {
    fn from(l: Level) -> u8 {
        l.number()
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub level: Level,
    pub name: String,
    /// Framework module defining the baseline forward pass.
    pub reference_source: String,
    /// Path of the reference source file, when loaded from disk.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_path: Option<PathBuf>,
    pub backend_support: BTreeSet<Backend>,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl Problem {
    pub fn supports(&self, backend: Backend) -> bool {
        self.backend_support.contains(&backend)
    }

    /// Filesystem-safe form of the id, used for run directories.
    pub fn slug(&self) -> String {
        slugify(&self.id)
    }
}

pub fn slugify(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSet {
    pub backend: Backend,
    pub problems: Vec<Problem>,
    pub counts_by_level: BTreeMap<Level, usize>,
    /// Ids present in the manifest but unsupported on `backend`.
    pub excluded: Vec<String>,
    /// Digest over the manifest and every loaded source.
    pub digest: String,
}

impl ProblemSet {
    pub fn empty(backend: Backend) -> Self {
        ProblemSet {
            backend,
            problems: Vec::new(),
            counts_by_level: Level::ALL.iter().map(|l| (*l, 0)).collect(),
            excluded: Vec::new(),
            digest: digest::sha256_hex(""),
        }
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Problem> {
        self.problems.iter().find(|p| p.id == id)
    }

    pub fn count(&self, level: Level) -> usize {
        self.counts_by_level.get(&level).copied().unwrap_or(0)
    }

    /// Keeps only the listed ids, preserving manifest order. Level counts
    /// are recomputed.
    pub fn retain_ids(&mut self, ids: &[String]) {
        let keep: HashSet<&str> = ids.iter().map(String::as_str).collect();
        self.problems.retain(|p| keep.contains(p.id.as_str()));
        self.counts_by_level = count_levels(&self.problems);
        self.digest = digest::sha256_parts(
            std::iter::once(self.digest.clone()).chain(self.problems.iter().map(|p| p.id.clone())),
        );
    }
}

fn count_levels(problems: &[Problem]) -> BTreeMap<Level, usize> {
    let mut counts: BTreeMap<Level, usize> = Level::ALL.iter().map(|l| (*l, 0)).collect();
    for p in problems {
        *counts.entry(p.level).or_default() += 1;
    }
    counts
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("no {MANIFEST_FILE} in {0}")]
    MissingManifest(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest is not valid TOML: {0}")]
    Syntax(String),
    #[error("malformed problem entries:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Entries(Vec<EntryError>),
}

/// One bad manifest entry. `problem` is the entry's id when it had one,
/// otherwise its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryError {
    pub problem: String,
    pub message: String,
}

impl fmt::Display for EntryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.problem, self.message)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct ManifestEntry {
    id: String,
    level: u8,
    name: String,
    source: PathBuf,
    #[serde(default)]
    unsupported_backends: Vec<String>,
    #[serde(default)]
    tags: Vec<String>,
}

/// Parsed manifest before backend filtering.
#[derive(Debug, Clone)]
pub struct Manifest {
    root: PathBuf,
    pub problems: Vec<Problem>,
    /// backend → operation names that backend cannot run.
    pub unsupported_operations: BTreeMap<Backend, BTreeSet<String>>,
    pub digest: String,
}

impl Manifest {
    pub fn load(root: &Path) -> Result<Self, LoadError> {
        let path = root.join(MANIFEST_FILE);
        if !path.is_file() {
            return Err(LoadError::MissingManifest(root.to_path_buf()));
        }
        let text = fs::read_to_string(&path).map_err(|source| LoadError::Io {
            path: path.clone(),
            source,
        })?;
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| LoadError::Syntax(e.to_string()))?;

        let mut errors = Vec::new();
        let mut unsupported_operations: BTreeMap<Backend, BTreeSet<String>> = BTreeMap::new();
        if let Some(section) = doc.get("unsupported_operations") {
            match section.as_table() {
                Some(table) => {
                    for (key, ops) in table {
                        let backend = match key.parse::<Backend>() {
                            Ok(b) => b,
                            Err(e) => {
                                errors.push(EntryError {
                                    problem: "[unsupported_operations]".into(),
                                    message: e.to_string(),
                                });
                                continue;
                            }
                        };
                        let names: Option<BTreeSet<String>> = ops
                            .as_array()
                            .map(|a| a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect());
                        match names {
                            Some(n) => {
                                unsupported_operations.insert(backend, n);
                            }
                            None => errors.push(EntryError {
                                problem: "[unsupported_operations]".into(),
                                message: format!("'{key}' must be a list of operation names"),
                            }),
                        }
                    }
                }
                None => errors.push(EntryError {
                    problem: "[unsupported_operations]".into(),
                    message: "must be a table".into(),
                }),
            }
        }

        let entries = match doc.get("problem") {
            None => Vec::new(),
            Some(toml::Value::Array(a)) => a.clone(),
            Some(_) => {
                return Err(LoadError::Entries(vec![EntryError {
                    problem: "[[problem]]".into(),
                    message: "'problem' must be an array of tables".into(),
                }]))
            }
        };

        let mut hash_parts = vec![text.clone()];
        let mut problems = Vec::with_capacity(entries.len());
        let mut seen = HashSet::new();
        for (idx, raw) in entries.into_iter().enumerate() {
            let label = raw
                .get("id")
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .unwrap_or_else(|| format!("entry #{}", idx + 1));
            let entry: ManifestEntry = match raw.try_into() {
                Ok(e) => e,
                Err(e) => {
                    errors.push(EntryError {
                        problem: label,
                        message: e.to_string().trim().to_string(),
                    });
                    continue;
                }
            };
            match build_problem(root, entry, &unsupported_operations, &mut seen) {
                Ok((problem, source_text)) => {
                    hash_parts.push(source_text);
                    problems.push(problem);
                }
                Err(message) => errors.push(EntryError { problem: label, message }),
            }
        }
        if !errors.is_empty() {
            return Err(LoadError::Entries(errors));
        }
        Ok(Manifest {
            root: root.to_path_buf(),
            problems,
            unsupported_operations,
            digest: digest::sha256_parts(hash_parts),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Ids unsupported on `backend`, in manifest order.
    pub fn exclusions(&self, backend: Backend) -> Vec<String> {
        self.problems
            .iter()
            .filter(|p| !p.supports(backend))
            .map(|p| p.id.clone())
            .collect()
    }

    pub fn for_backend(&self, backend: Backend) -> ProblemSet {
        let problems: Vec<Problem> = self.problems.iter().filter(|p| p.supports(backend)).cloned().collect();
        ProblemSet {
            backend,
            counts_by_level: count_levels(&problems),
            excluded: self.exclusions(backend),
            digest: digest::sha256_parts([self.digest.as_str(), backend.as_str()]),
            problems,
        }
    }
}

fn build_problem(
    root: &Path,
    entry: ManifestEntry,
    unsupported_ops: &BTreeMap<Backend, BTreeSet<String>>,
    seen: &mut HashSet<String>,
) -> Result<(Problem, String), String> {
    if entry.id.trim().is_empty() {
        return Err("id must not be empty".into());
    }
    if !seen.insert(entry.id.clone()) {
        return Err("duplicate id".into());
    }
    let level = Level::try_from(entry.level)?;
    let mut unsupported = BTreeSet::new();
    for b in &entry.unsupported_backends {
        unsupported.insert(b.parse::<Backend>().map_err(|e| e.to_string())?);
    }
    for (backend, ops) in unsupported_ops {
        if entry.tags.iter().any(|t| ops.contains(t)) {
            unsupported.insert(*backend);
        }
    }
    let path = root.join(&entry.source);
    let source = fs::read_to_string(&path).map_err(|e| format!("cannot read source {}: {e}", path.display()))?;
    if source.trim().is_empty() {
        return Err(format!("reference source {} is empty", entry.source.display()));
    }
    let backend_support = Backend::ALL.iter().copied().filter(|b| !unsupported.contains(b)).collect();
    Ok((
        Problem {
            id: entry.id,
            level,
            name: entry.name,
            reference_source: source.clone(),
            source_path: Some(path),
            backend_support,
            tags: entry.tags,
        },
        source,
    ))
}

/// Loads the problems of `root` runnable on `backend`, in manifest order.
pub fn load_problem_set(root: &Path, backend: Backend) -> Result<ProblemSet, LoadError> {
    Ok(Manifest::load(root)?.for_backend(backend))
}

/// Ids of `root`'s problems that `backend` cannot run.
pub fn exclusions(root: &Path, backend: Backend) -> Result<Vec<String>, LoadError> {
    Ok(Manifest::load(root)?.exclusions(backend))
}

/// A known-correct solution for a problem on some other backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceImpl {
    pub problem_id: String,
    pub source: String,
    pub origin_backend: Backend,
    /// Sample id the source was taken from.
    pub provenance: String,
}

/// One sampled solution with its recorded correctness flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub source: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no reference available for {0}")]
pub struct NoReference(pub String);

/// Picks the first correct sample. Flags are trusted as recorded.
pub fn select_reference(
    problem_id: &str,
    samples: &[Sample],
    origin_backend: Backend,
) -> Result<ReferenceImpl, NoReference> {
    samples
        .iter()
        .find(|s| s.correct && !s.source.trim().is_empty())
        .map(|s| ReferenceImpl {
            problem_id: problem_id.to_string(),
            source: s.source.clone(),
            origin_backend,
            provenance: s.id.clone(),
        })
        .ok_or_else(|| NoReference(problem_id.to_string()))
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct IndexEntry {
    path: PathBuf,
    correct: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct CorpusIndex {
    origin_backend: Backend,
    problems: BTreeMap<String, Vec<IndexEntry>>,
}

/// Reference corpus: `index.json` mapping problem id to ordered sample
/// files with correctness flags, plus the sample files themselves.
#[derive(Debug, Clone, Default)]
pub struct ReferenceCorpus {
    selected: HashMap<String, ReferenceImpl>,
    missing: Vec<String>,
}

impl ReferenceCorpus {
    pub fn load(dir: &Path) -> Result<Self, LoadError> {
        let index_path = dir.join(REFERENCE_INDEX_FILE);
        let text = fs::read_to_string(&index_path).map_err(|source| LoadError::Io {
            path: index_path.clone(),
            source,
        })?;
        let index: CorpusIndex = serde_json::from_str(&text).map_err(|e| LoadError::Syntax(e.to_string()))?;
        let mut corpus = ReferenceCorpus::default();
        let mut errors = Vec::new();
        for (problem_id, entries) in &index.problems {
            let mut samples = Vec::with_capacity(entries.len());
            for entry in entries {
                let path = dir.join(&entry.path);
                match fs::read_to_string(&path) {
                    Ok(source) => samples.push(Sample {
                        id: entry.path.display().to_string(),
                        source,
                        correct: entry.correct,
                    }),
                    Err(e) => errors.push(EntryError {
                        problem: problem_id.clone(),
                        message: format!("cannot read sample {}: {e}", path.display()),
                    }),
                }
            }
            match select_reference(problem_id, &samples, index.origin_backend) {
                Ok(r) => {
                    corpus.selected.insert(problem_id.clone(), r);
                }
                Err(_) => corpus.missing.push(problem_id.clone()),
            }
        }
        if !errors.is_empty() {
            return Err(LoadError::Entries(errors));
        }
        Ok(corpus)
    }

    pub fn from_references(refs: impl IntoIterator<Item = ReferenceImpl>) -> Self {
        ReferenceCorpus {
            selected: refs.into_iter().map(|r| (r.problem_id.clone(), r)).collect(),
            missing: Vec::new(),
        }
    }

    /// The selected reference, or `None` when no correct sample exists.
    pub fn get(&self, problem_id: &str) -> Option<&ReferenceImpl> {
        self.selected.get(problem_id)
    }

    /// Problems listed in the index without any correct sample.
    pub fn missing(&self) -> &[String] {
        &self.missing
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: &str, correct: bool) -> Sample {
        Sample {
            id: id.into(),
            source: format!("source of {id}"),
            correct,
        }
    }

    fn write_set(dir: &Path, manifest: &str, files: &[(&str, &str)]) {
        fs::write(dir.join(MANIFEST_FILE), manifest).unwrap();
        for (rel, body) in files {
            let p = dir.join(rel);
            fs::create_dir_all(p.parent().unwrap()).unwrap();
            fs::write(p, body).unwrap();
        }
    }

    #[test]
    fn first_correct_sample_wins() {
        let s = [sample("s0", false), sample("s1", true), sample("s2", true)];
        let r = select_reference("p", &s, Backend::Cuda).unwrap();
        assert_eq!(r.source, "source of s1");
        assert_eq!(r.provenance, "s1");
    }

    #[test]
    fn singleton_and_none() {
        let r = select_reference("p", &[sample("s0", true)], Backend::Cuda).unwrap();
        assert_eq!(r.source, "source of s0");
        let err = select_reference("p", &[sample("s0", false)], Backend::Cuda).unwrap_err();
        assert_eq!(err.to_string(), "no reference available for p");
    }

    #[test]
    fn missing_manifest() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_problem_set(dir.path(), Backend::Cuda),
            Err(LoadError::MissingManifest(_))
        ));
    }

    #[test]
    fn empty_manifest_loads_empty_set() {
        let dir = tempfile::tempdir().unwrap();
        write_set(dir.path(), "", &[]);
        let set = load_problem_set(dir.path(), Backend::Metal).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.counts_by_level.values().sum::<usize>(), 0);
        assert!(exclusions(dir.path(), Backend::Metal).unwrap().is_empty());
    }

    #[test]
    fn malformed_entry_names_problem() {
        let dir = tempfile::tempdir().unwrap();
        write_set(
            dir.path(),
            r#"
[[problem]]
id = "level1/a"
level = 1
name = "a"
source = "a.py"

[[problem]]
id = "level9/b"
level = 9
name = "b"
source = "a.py"

[[problem]]
id = "level1/c"
name = "c"
source = "a.py"
"#,
            &[("a.py", "class Model: pass\n")],
        );
        let err = load_problem_set(dir.path(), Backend::Cuda).unwrap_err();
        let LoadError::Entries(entries) = err else { panic!("expected entry errors") };
        let named: Vec<&str> = entries.iter().map(|e| e.problem.as_str()).collect();
        assert_eq!(named, vec!["level9/b", "level1/c"]);
        assert!(entries[1].message.contains("level"));
    }

    #[test]
    fn exclusion_by_backend_and_by_operation() {
        let dir = tempfile::tempdir().unwrap();
        write_set(
            dir.path(),
            r#"
[unsupported_operations]
metal = ["ConvTranspose3d"]

[[problem]]
id = "p1"
level = 1
name = "plain"
source = "p.py"

[[problem]]
id = "p2"
level = 2
name = "declared"
source = "p.py"
unsupported_backends = ["metal"]

[[problem]]
id = "p3"
level = 2
name = "by op"
source = "p.py"
tags = ["ConvTranspose3d", "GroupNorm"]
"#,
            &[("p.py", "class Model: pass\n")],
        );
        assert!(exclusions(dir.path(), Backend::Cuda).unwrap().is_empty());
        assert_eq!(exclusions(dir.path(), Backend::Metal).unwrap(), vec!["p2", "p3"]);
        let metal = load_problem_set(dir.path(), Backend::Metal).unwrap();
        assert_eq!(metal.len(), 1);
        assert_eq!(metal.count(Level::One), 1);
        assert_eq!(metal.count(Level::Two), 0);
    }

    #[test]
    fn empty_reference_source_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_set(
            dir.path(),
            "[[problem]]\nid = \"x\"\nlevel = 1\nname = \"x\"\nsource = \"x.py\"\n",
            &[("x.py", "  \n")],
        );
        assert!(matches!(load_problem_set(dir.path(), Backend::Cuda), Err(LoadError::Entries(_))));
    }

    #[test]
    fn corpus_tolerates_uncovered_problems() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("s")).unwrap();
        fs::write(dir.path().join("s/a0.cu"), "bad").unwrap();
        fs::write(dir.path().join("s/a1.cu"), "good").unwrap();
        fs::write(dir.path().join("s/b0.cu"), "bad").unwrap();
        fs::write(
            dir.path().join(REFERENCE_INDEX_FILE),
            r#"{"origin_backend":"cuda","problems":{
                "a":[{"path":"s/a0.cu","correct":false},{"path":"s/a1.cu","correct":true}],
                "b":[{"path":"s/b0.cu","correct":false}]}}"#,
        )
        .unwrap();
        let corpus = ReferenceCorpus::load(dir.path()).unwrap();
        assert_eq!(corpus.get("a").unwrap().source, "good");
        assert_eq!(corpus.get("a").unwrap().provenance, "s/a1.cu");
        assert!(corpus.get("b").is_none());
        assert_eq!(corpus.missing(), ["b".to_string()]);
    }
}
