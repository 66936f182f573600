//! Prompt rendering for the generation and performance-analysis agents.
//!
//! Templates are plain-text files split into named sections:
//!
//! ```text
//! {# comment #}
//! {% section problem %}
//! Optimize {{ problem_id }}:
//! {{ problem_source }}
//! {% endsection %}
//! ```
//!
//! The renderer decides which sections appear and in what order; the
//! template only supplies their wording. Every rendered section starts
//! with a `<!-- section: NAME -->` marker line.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{Candidate, Recommendation};
use crate::backend::Backend;
use crate::digest;
use crate::problem::{Problem, ReferenceImpl};
use crate::profiling::{EvidenceKind, EvidencePayload, ProfileBundle};
use crate::verify::ExecState;

pub const GENERATION_TEMPLATE: &str = "generation.tmpl";
pub const ANALYSIS_TEMPLATE: &str = "analysis.tmpl";

/// Default feedback budget in estimated tokens.
pub const DEFAULT_FEEDBACK_BUDGET: usize = 4_000;

const BUNDLED_GENERATION: &str = include_str!("../assets/templates/generation.tmpl");
const BUNDLED_ANALYSIS: &str = include_str!("../assets/templates/analysis.tmpl");

const EXAMPLE_PROBLEM: &str = include_str!("../assets/examples/vector_add_problem.py");
const EXAMPLE_CUDA: &str = include_str!("../assets/examples/vector_add_cuda.py");
const EXAMPLE_METAL: &str = include_str!("../assets/examples/vector_add_metal.py");

pub const DEFAULT_TASK_INSTRUCTIONS: &str = "Return the complete new program as one ```python fenced code block. \
Name the optimized module NewModel and keep the same forward signature. \
Do not include test code or usage examples.";

const GENERATION_SECTIONS: [&str; 9] = [
    "task",
    "example",
    "reference",
    "problem",
    "prior_candidate",
    "feedback_error",
    "feedback_timing",
    "recommendation",
    "instructions",
];
const ANALYSIS_SECTIONS: [&str; 4] = ["task", "candidate", "evidence", "instructions"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("{template}:{line}: {message}")]
    Syntax {
        template: String,
        line: usize,
        message: String,
    },
    #[error("template {template} has no section '{section}'")]
    MissingSection { template: String, section: String },
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("unresolved template variable '{variable}' in section '{section}'")]
    UnresolvedVariable { section: String, variable: String },
    #[error("unterminated '{{{{' in section '{section}'")]
    Unterminated { section: String },
    #[error("refinement prompt needs the previous attempt")]
    MissingPrior,
    #[error("analysis prompt needs at least one evidence item")]
    EmptyEvidence,
}

/// A parsed template: named section bodies.
#[derive(Debug, Clone)]
pub struct Template {
    name: String,
    sections: HashMap<String, String>,
}

impl Template {
    pub fn parse(name: &str, text: &str) -> Result<Self, TemplateError> {
        let syntax = |line: usize, message: String| TemplateError::Syntax {
            template: name.to_string(),
            line,
            message,
        };
        let mut sections = HashMap::new();
        let mut current: Option<(String, Vec<&str>)> = None;
        let mut in_comment = false;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let trimmed = line.trim();
            if current.is_none() {
                if in_comment {
                    in_comment = !trimmed.ends_with("#}");
                    continue;
                }
                if trimmed.starts_with("{#") {
                    in_comment = !trimmed.ends_with("#}");
                    continue;
                }
            }
            if let Some(rest) = trimmed.strip_prefix("{%").and_then(|r| r.strip_suffix("%}")) {
                let words: Vec<&str> = rest.split_whitespace().collect();
                match (words.as_slice(), current.take()) {
                    (["section", section], None) => current = Some((section.to_string(), Vec::new())),
                    (["endsection"], Some((section, body))) => {
                        if sections.insert(section.clone(), body.join("\n")).is_some() {
                            return Err(syntax(lineno, format!("section '{section}' defined twice")));
                        }
                    }
                    (["section", _], Some((open, _))) => {
                        return Err(syntax(lineno, format!("section '{open}' is still open")))
                    }
                    _ => return Err(syntax(lineno, format!("unknown tag '{trimmed}'"))),
                }
                continue;
            }
            match current.as_mut() {
                Some((_, body)) => body.push(line),
                None if trimmed.is_empty() => {}
                None => return Err(syntax(lineno, "text outside of a section".into())),
            }
        }
        if let Some((open, _)) = current {
            return Err(syntax(text.lines().count(), format!("section '{open}' is never closed")));
        }
        Ok(Template {
            name: name.to_string(),
            sections,
        })
    }

    fn require(&self, names: &[&str]) -> Result<(), TemplateError> {
        for s in names {
            if !self.sections.contains_key(*s) {
                return Err(TemplateError::MissingSection {
                    template: self.name.clone(),
                    section: s.to_string(),
                });
            }
        }
        Ok(())
    }

    fn render_section(&self, section: &str, vars: &HashMap<&str, String>) -> Result<String, RenderError> {
        let body = &self.sections[section];
        let mut out = String::with_capacity(body.len());
        let mut rest = body.as_str();
        while let Some(start) = rest.find("{{") {
            out.push_str(&rest[..start]);
            let after = &rest[start + 2..];
            let end = after.find("}}").ok_or_else(|| RenderError::Unterminated {
                section: section.to_string(),
            })?;
            let name = after[..end].trim();
            let value = vars.get(name).ok_or_else(|| RenderError::UnresolvedVariable {
                section: section.to_string(),
                variable: name.to_string(),
            })?;
            out.push_str(value);
            rest = &after[end + 2..];
        }
        out.push_str(rest);
        Ok(out.trim_matches('\n').to_string())
    }
}

/// The generation and analysis templates.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    generation: Template,
    analysis: Template,
}

impl TemplateSet {
    pub fn bundled() -> Self {
        Self::from_texts(BUNDLED_GENERATION, BUNDLED_ANALYSIS).expect("bundled templates are valid")
    }

    pub fn from_texts(generation: &str, analysis: &str) -> Result<Self, TemplateError> {
        let generation = Template::parse(GENERATION_TEMPLATE, generation)?;
        generation.require(&GENERATION_SECTIONS)?;
        let analysis = Template::parse(ANALYSIS_TEMPLATE, analysis)?;
        analysis.require(&ANALYSIS_SECTIONS)?;
        Ok(TemplateSet { generation, analysis })
    }

    /// Loads `generation.tmpl` and `analysis.tmpl` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, TemplateError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|e| TemplateError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        };
        Self::from_texts(&read(GENERATION_TEMPLATE)?, &read(ANALYSIS_TEMPLATE)?)
    }

    /// Writes the bundled templates into `dir` as a starting point for
    /// customization.
    pub fn export_bundled(dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(GENERATION_TEMPLATE), BUNDLED_GENERATION)?;
        fs::write(dir.join(ANALYSIS_TEMPLATE), BUNDLED_ANALYSIS)
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Source problem and its solution on the target backend, shown to the
/// model as a worked example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneShotExample {
    pub problem_source: String,
    pub solution_source: String,
}

impl OneShotExample {
    /// The bundled vector-add pair for `backend`.
    pub fn vector_add(backend: Backend) -> Self {
        OneShotExample {
            problem_source: EXAMPLE_PROBLEM.to_string(),
            solution_source: match backend {
                Backend::Cuda => EXAMPLE_CUDA,
                Backend::Metal => EXAMPLE_METAL,
            }
            .to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    SingleShot,
    Refinement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub candidate_mean_ns: f64,
    pub baseline_mean_ns: f64,
    pub speedup: f64,
}

impl TimingSummary {
    fn render(&self) -> String {
        format!(
            "- candidate mean: {:.4} ms\n- baseline mean: {:.4} ms\n- speedup: {:.3}x",
            self.candidate_mean_ns / 1e6,
            self.baseline_mean_ns / 1e6,
            self.speedup
        )
    }
}

/// What the previous iteration produced and how it fared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorAttempt {
    /// `None` when the previous response contained no program.
    pub source: Option<String>,
    pub state: ExecState,
    /// Failure transcript for non-correct states.
    pub transcript: String,
    /// Present for correct states.
    pub timing: Option<TimingSummary>,
}

#[derive(Debug, Clone)]
pub struct PromptSpec<'a> {
    pub mode: PromptMode,
    pub backend: Backend,
    pub problem: &'a Problem,
    pub example: &'a OneShotExample,
    pub reference: Option<&'a ReferenceImpl>,
    pub prior: Option<&'a PriorAttempt>,
    pub recommendation: Option<&'a Recommendation>,
    pub task_instructions: &'a str,
    /// Estimated-token budget for the error transcript.
    pub feedback_budget: usize,
}

impl<'a> PromptSpec<'a> {
    pub fn single_shot(backend: Backend, problem: &'a Problem, example: &'a OneShotExample) -> Self {
        PromptSpec {
            mode: PromptMode::SingleShot,
            backend,
            problem,
            example,
            reference: None,
            prior: None,
            recommendation: None,
            task_instructions: DEFAULT_TASK_INSTRUCTIONS,
            feedback_budget: DEFAULT_FEEDBACK_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttachmentPayload {
    Text(String),
    ImagePath(std::path::PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attachment {
    pub kind: EvidenceKind,
    pub title: String,
    pub digest: String,
    pub payload: AttachmentPayload,
}

impl Attachment {
    pub fn is_image(&self) -> bool {
        self.kind == EvidenceKind::Image
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub fingerprint: String,
    pub attachments: Vec<Attachment>,
}

impl RenderedPrompt {
    pub fn new(text: String, attachments: Vec<Attachment>) -> Self {
        let fingerprint = digest::sha256_parts(
            std::iter::once(text.as_str()).chain(attachments.iter().map(|a| a.digest.as_str())),
        );
        RenderedPrompt {
            text,
            fingerprint,
            attachments,
        }
    }

    pub fn has_images(&self) -> bool {
        self.attachments.iter().any(Attachment::is_image)
    }

    /// Body of the section `name`, without its marker line.
    pub fn section(&self, name: &str) -> Option<&str> {
        let marker = section_marker(name);
        let start = self.text.find(&marker)? + marker.len();
        let rest = &self.text[start..];
        let end = rest.find("\n<!-- section: ").unwrap_or(rest.len());
        Some(rest[..end].trim_matches('\n'))
    }

    /// Section names in order of appearance.
    pub fn section_names(&self) -> Vec<&str> {
        self.text
            .lines()
            .filter_map(|l| l.strip_prefix("<!-- section: ")?.strip_suffix(" -->"))
            .collect()
    }
}

fn section_marker(name: &str) -> String {
    format!("<!-- section: {name} -->")
}

fn display_name(backend: Backend) -> &'static str {
    match backend {
        Backend::Cuda => "CUDA",
        Backend::Metal => "Metal",
    }
}

fn assemble(template: &Template, order: &[&str], vars: &HashMap<&str, String>) -> Result<String, RenderError> {
    let mut parts = Vec::with_capacity(order.len());
    for section in order {
        let body = template.render_section(section, vars)?;
        parts.push(format!("{}\n{}", section_marker(section), body));
    }
    let mut text = parts.join("\n\n");
    text.push('\n');
    Ok(text)
}

impl TemplateSet {
    /// Renders the generation prompt for `spec`.
    pub fn render_generation(&self, spec: &PromptSpec<'_>) -> Result<RenderedPrompt, RenderError> {
        if spec.mode == PromptMode::Refinement && spec.prior.is_none() {
            return Err(RenderError::MissingPrior);
        }
        let mut vars: HashMap<&str, String> = HashMap::new();
        vars.insert("backend", spec.backend.as_str().to_string());
        vars.insert("backend_display", display_name(spec.backend).to_string());
        vars.insert("example_problem", spec.example.problem_source.trim_end().to_string());
        vars.insert("example_solution", spec.example.solution_source.trim_end().to_string());
        vars.insert("problem_id", spec.problem.id.clone());
        vars.insert("problem_name", spec.problem.name.clone());
        vars.insert("problem_source", spec.problem.reference_source.trim_end().to_string());
        vars.insert("task_instructions", spec.task_instructions.to_string());

        let mut order = vec!["task", "example"];
        if let Some(r) = spec.reference {
            vars.insert("reference_source", r.source.trim_end().to_string());
            vars.insert("reference_backend", r.origin_backend.as_str().to_string());
            vars.insert("reference_backend_display", display_name(r.origin_backend).to_string());
            order.push("reference");
        }
        order.push("problem");
        if spec.mode == PromptMode::Refinement {
            let prior = spec.prior.expect("checked above");
            vars.insert("prior_state", prior.state.as_str().to_string());
            if let Some(src) = &prior.source {
                vars.insert("prior_source", src.trim_end().to_string());
                order.push("prior_candidate");
            }
            match (&prior.timing, prior.state) {
                (Some(timing), ExecState::Correct) => {
                    vars.insert("timing_summary", timing.render());
                    order.push("feedback_timing");
                    if let Some(r) = spec.recommendation {
                        vars.insert("recommendation", r.text.clone());
                        order.push("recommendation");
                    }
                }
                _ => {
                    let transcript = if prior.transcript.trim().is_empty() && prior.source.is_none() {
                        "The previous response did not contain a program.".to_string()
                    } else {
                        truncate_feedback(&prior.transcript, spec.feedback_budget.max(1))
                    };
                    vars.insert("error_transcript", transcript);
                    order.push("feedback_error");
                }
            }
        }
        order.push("instructions");
        Ok(RenderedPrompt::new(assemble(&self.generation, &order, &vars)?, Vec::new()))
    }

    /// Renders the performance-analysis prompt. Evidence items become
    /// attachments in bundle order.
    pub fn render_analysis(
        &self,
        backend: Backend,
        candidate: &Candidate,
        bundle: &ProfileBundle,
    ) -> Result<RenderedPrompt, RenderError> {
        if bundle.items.is_empty() {
            return Err(RenderError::EmptyEvidence);
        }
        let attachments: Vec<Attachment> = bundle
            .items
            .iter()
            .map(|item| Attachment {
                kind: item.kind,
                title: item.title.clone(),
                digest: item.digest.clone(),
                payload: match &item.payload {
                    EvidencePayload::Text(t) => AttachmentPayload::Text(t.clone()),
                    EvidencePayload::Image(p) => AttachmentPayload::ImagePath(p.clone()),
                },
            })
            .collect();
        let evidence_list = attachments
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let kind = match a.kind {
                    EvidenceKind::TextTable => "table",
                    EvidenceKind::Image => "screenshot",
                };
                format!("{}. {} ({kind})", i + 1, a.title)
            })
            .collect::<Vec<_>>()
            .join("\n");
        let mut vars: HashMap<&str, String> = HashMap::new();
        vars.insert("backend", backend.as_str().to_string());
        vars.insert("backend_display", display_name(backend).to_string());
        vars.insert("candidate_source", candidate.source.trim_end().to_string());
        vars.insert("evidence_list", evidence_list);
        let text = assemble(&self.analysis, &ANALYSIS_SECTIONS, &vars)?;
        Ok(RenderedPrompt::new(text, attachments))
    }
}

/// Rough token count: one token per four characters, rounded up.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

/// Shortens `transcript` to at most `budget` estimated tokens, keeping its
/// head and tail around an elision marker. Text that already fits is
/// returned unchanged.
pub fn truncate_feedback(transcript: &str, budget: usize) -> String {
    if estimate_tokens(transcript) <= budget {
        return transcript.to_string();
    }
    let max_chars = budget * 4;
    let chars: Vec<char> = transcript.chars().collect();
    let total = chars.len();
    // Upper bound on the marker length: the elided count has at most as many
    // digits as the total.
    let marker_len = marker(total).chars().count();
    if max_chars <= marker_len + 2 {
        return chars[..max_chars].iter().collect();
    }
    let keep = max_chars - marker_len;
    let head = keep.div_ceil(2);
    let tail = keep - head;
    let mut out: String = chars[..head].iter().collect();
    out.push_str(&marker(total - head - tail));
    out.extend(&chars[total - tail..]);
    out
}

fn marker(elided: usize) -> String {
    format!("\n[... {elided} characters elided ...]\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Level;
    use proptest::prelude::*;

    fn problem() -> Problem {
        Problem {
            id: "level1/problem_019".into(),
            level: Level::One,
            name: "ReLU".into(),
            reference_source: "class Model(nn.Module):\n    def forward(self, x):\n        return torch.relu(x)\n".into(),
            source_path: None,
            backend_support: Backend::ALL.into_iter().collect(),
            tags: vec![],
        }
    }

    fn count(hay: &str, needle: &str) -> usize {
        hay.matches(needle).count()
    }

    #[test]
    fn single_shot_structure() {
        let t = TemplateSet::bundled();
        let p = problem();
        let ex = OneShotExample::vector_add(Backend::Cuda);
        let out = t.render_generation(&PromptSpec::single_shot(Backend::Cuda, &p, &ex)).unwrap();
        assert_eq!(out.section_names(), ["task", "example", "problem", "instructions"]);
        assert_eq!(count(&out.text, "class NewModel"), 2, "task text + one example solution");
        assert_eq!(count(&out.text, "vector_add_kernel"), 2, "kernel defined and launched once");
        assert!(out.section("feedback_error").is_none());
        assert!(out.section("feedback_timing").is_none());
        assert!(out.attachments.is_empty());
    }

    #[test]
    fn compile_failure_feedback_is_verbatim() {
        let t = TemplateSet::bundled();
        let p = problem();
        let ex = OneShotExample::vector_add(Backend::Cuda);
        let prior = PriorAttempt {
            source: Some("KERNEL V1".into()),
            state: ExecState::CompilationFailure,
            transcript: "kernel.cu(12): error: identifier \"flaot\" is undefined".into(),
            timing: None,
        };
        let spec = PromptSpec {
            mode: PromptMode::Refinement,
            prior: Some(&prior),
            ..PromptSpec::single_shot(Backend::Cuda, &p, &ex)
        };
        let out = t.render_generation(&spec).unwrap();
        let fb = out.section("feedback_error").unwrap();
        assert!(fb.contains("kernel.cu(12): error: identifier \"flaot\" is undefined"));
        assert!(fb.contains("Fix the error"));
        assert!(out.section("prior_candidate").unwrap().contains("KERNEL V1"));
        assert_eq!(
            out.section_names(),
            ["task", "example", "problem", "prior_candidate", "feedback_error", "instructions"]
        );
    }

    #[test]
    fn correct_prior_carries_timing_and_recommendation() {
        let t = TemplateSet::bundled();
        let p = problem();
        let ex = OneShotExample::vector_add(Backend::Metal);
        let prior = PriorAttempt {
            source: Some("KERNEL V2".into()),
            state: ExecState::Correct,
            transcript: String::new(),
            timing: Some(TimingSummary {
                candidate_mean_ns: 500_000.0,
                baseline_mean_ns: 1_000_000.0,
                speedup: 2.0,
            }),
        };
        let rec = Recommendation::new("Use threadgroup memory to stage the input tile.", vec![], "fp".into()).unwrap();
        let spec = PromptSpec {
            mode: PromptMode::Refinement,
            prior: Some(&prior),
            recommendation: Some(&rec),
            ..PromptSpec::single_shot(Backend::Metal, &p, &ex)
        };
        let out = t.render_generation(&spec).unwrap();
        assert!(out.section("recommendation").unwrap().contains("threadgroup memory"));
        let timing = out.section("feedback_timing").unwrap();
        assert!(timing.contains("0.5000 ms") && timing.contains("2.000x"));
        assert!(out.section("feedback_error").is_none());
        assert!(out.text.contains("Metal"));
    }

    #[test]
    fn generation_failure_prior_without_source() {
        let t = TemplateSet::bundled();
        let p = problem();
        let ex = OneShotExample::vector_add(Backend::Cuda);
        let prior = PriorAttempt {
            source: None,
            state: ExecState::GenerationFailure,
            transcript: String::new(),
            timing: None,
        };
        let spec = PromptSpec {
            mode: PromptMode::Refinement,
            prior: Some(&prior),
            ..PromptSpec::single_shot(Backend::Cuda, &p, &ex)
        };
        let out = t.render_generation(&spec).unwrap();
        assert!(out.section("prior_candidate").is_none());
        assert!(out.section("feedback_error").unwrap().contains("did not contain a program"));
    }

    #[test]
    fn reference_changes_only_its_section() {
        let t = TemplateSet::bundled();
        let p = problem();
        let ex = OneShotExample::vector_add(Backend::Metal);
        let r = ReferenceImpl {
            problem_id: p.id.clone(),
            source: "__global__ void relu(...) {}".into(),
            origin_backend: Backend::Cuda,
            provenance: "sample_0".into(),
        };
        let base = t.render_generation(&PromptSpec::single_shot(Backend::Metal, &p, &ex)).unwrap();
        let with_ref = t
            .render_generation(&PromptSpec {
                reference: Some(&r),
                ..PromptSpec::single_shot(Backend::Metal, &p, &ex)
            })
            .unwrap();
        assert_eq!(with_ref.section_names(), ["task", "example", "reference", "problem", "instructions"]);
        for name in base.section_names() {
            assert_eq!(base.section(name), with_ref.section(name), "section {name} changed");
        }
        assert!(with_ref.section("reference").unwrap().contains("__global__ void relu"));
        assert_ne!(base.fingerprint, with_ref.fingerprint);
    }

    #[test]
    fn refinement_without_prior_is_rejected() {
        let t = TemplateSet::bundled();
        let p = problem();
        let ex = OneShotExample::vector_add(Backend::Cuda);
        let spec = PromptSpec {
            mode: PromptMode::Refinement,
            ..PromptSpec::single_shot(Backend::Cuda, &p, &ex)
        };
        assert_eq!(t.render_generation(&spec).unwrap_err(), RenderError::MissingPrior);
    }

    #[test]
    fn unresolved_variable_is_named() {
        let gen = BUNDLED_GENERATION.replace("{{ problem_name }}", "{{ problem_title }}");
        let t = TemplateSet::from_texts(&gen, BUNDLED_ANALYSIS).unwrap();
        let p = problem();
        let ex = OneShotExample::vector_add(Backend::Cuda);
        let err = t.render_generation(&PromptSpec::single_shot(Backend::Cuda, &p, &ex)).unwrap_err();
        assert_eq!(
            err,
            RenderError::UnresolvedVariable {
                section: "problem".into(),
                variable: "problem_title".into()
            }
        );
    }

    #[test]
    fn template_syntax_errors() {
        assert!(matches!(
            Template::parse("t", "{% section a %}\nx\n"),
            Err(TemplateError::Syntax { .. })
        ));
        assert!(matches!(Template::parse("t", "stray\n"), Err(TemplateError::Syntax { line: 1, .. })));
        let missing = TemplateSet::from_texts("{% section task %}\n{% endsection %}\n", BUNDLED_ANALYSIS);
        assert!(matches!(missing, Err(TemplateError::MissingSection { .. })));
    }

    #[test]
    fn load_dir_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        TemplateSet::export_bundled(dir.path()).unwrap();
        let loaded = TemplateSet::load_dir(dir.path()).unwrap();
        let p = problem();
        let ex = OneShotExample::vector_add(Backend::Cuda);
        let spec = PromptSpec::single_shot(Backend::Cuda, &p, &ex);
        assert_eq!(
            loaded.render_generation(&spec).unwrap(),
            TemplateSet::bundled().render_generation(&spec).unwrap()
        );
    }

    #[test]
    fn truncation_cases() {
        let short = "x".repeat(200); // 50 tokens
        assert_eq!(truncate_feedback(&short, 100), short);
        assert_eq!(truncate_feedback("", 10), "");

        let long: String = (0..40_000).map(|i| char::from(b'a' + (i % 26) as u8)).collect(); // 10k tokens
        let out = truncate_feedback(&long, 1_000);
        assert!(estimate_tokens(&out) <= 1_000);
        assert!(out.contains("characters elided"));
        assert!(long.starts_with(&out[..1_000]));
        assert!(long.ends_with(&out[out.len() - 1_000..]));
    }

    proptest! {
        #[test]
        fn truncation_respects_budget_and_is_idempotent(s in "\\PC{0,3000}", budget in 1usize..600) {
            let once = truncate_feedback(&s, budget);
            prop_assert!(estimate_tokens(&once) <= budget);
            prop_assert_eq!(truncate_feedback(&once, budget), once.clone());
            if estimate_tokens(&s) <= budget {
                prop_assert_eq!(once, s);
            }
        }
    }
}
