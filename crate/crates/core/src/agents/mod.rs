//! The two model-backed agents: generation (problem → program) and
//! performance analysis (program + profiler evidence → one recommendation).
//!
//! Both agents sit on a [`ModelClient`], which is either an HTTP client for
//! one of the hosted providers or the scripted [`MockProvider`]. Transport
//! retries and the per-provider concurrency cap live here, not in the
//! clients.

mod extract;
#[cfg(feature = "http")]
mod http;
mod mock;
mod payload;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::digest;
use crate::prompt::RenderedPrompt;

pub use extract::{extract_code, fence, Extraction, ExtractionMethod};
#[cfg(feature = "http")]
pub use http::HttpClient;
pub use mock::{MockFailure, MockMatch, MockProvider, MockScript, MockScriptEntry};
pub use payload::{build_payload, endpoint, parse_response, API_KEY_VARS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provider {
    /// Chat-completions API with a `reasoning_effort` knob.
    ProviderA,
    /// Messages API with extended thinking (`budget_tokens`).
    ProviderB,
    /// Chat-completions API, text only.
    ProviderC,
    Mock,
}

impl Provider {
    pub const ALL: [Provider; 4] = [Provider::ProviderA, Provider::ProviderB, Provider::ProviderC, Provider::Mock];

    pub fn as_str(self) -> &'static str {
        match self {
            Provider::ProviderA => "provider_a",
            Provider::ProviderB => "provider_b",
            Provider::ProviderC => "provider_c",
            Provider::Mock => "mock",
        }
    }
}

impl fmt::Display for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Provider {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Provider::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown provider '{s}' (expected provider_a, provider_b, provider_c or mock)"))
    }
}

/// Model and sampling settings for one provider. When deserializing, only
/// `provider` is required; omitted fields take that provider's
/// [`ProviderProfile::replication`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "PartialProfile")]
pub struct ProviderProfile {
    pub provider: Provider,
    pub model_name: String,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_effort: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_output_tokens: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_tokens: Option<u32>,
    pub supports_images: bool,
    /// Overrides the provider's public endpoint, e.g. for a proxy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialProfile {
    provider: Provider,
    model_name: Option<String>,
    temperature: Option<f64>,
    reasoning_effort: Option<String>,
    max_output_tokens: Option<u32>,
    max_tokens: Option<u32>,
    budget_tokens: Option<u32>,
    supports_images: Option<bool>,
    endpoint: Option<String>,
}

impl From<PartialProfile> for ProviderProfile {
    fn from(p: PartialProfile) -> Self {
        let d = ProviderProfile::replication(p.provider);
        ProviderProfile {
            provider: p.provider,
            model_name: p.model_name.unwrap_or(d.model_name),
            temperature: p.temperature.unwrap_or(d.temperature),
            reasoning_effort: p.reasoning_effort.or(d.reasoning_effort),
            max_output_tokens: p.max_output_tokens.or(d.max_output_tokens),
            max_tokens: p.max_tokens.or(d.max_tokens),
            budget_tokens: p.budget_tokens.or(d.budget_tokens),
            supports_images: p.supports_images.unwrap_or(d.supports_images),
            endpoint: p.endpoint.or(d.endpoint),
        }
    }
}

impl ProviderProfile {
    /// The published replication settings for each provider.
    pub fn replication(provider: Provider) -> Self {
        let base = ProviderProfile {
            provider,
            model_name: String::new(),
            temperature: 0.0,
            reasoning_effort: None,
            max_output_tokens: None,
            max_tokens: None,
            budget_tokens: None,
            supports_images: true,
            endpoint: None,
        };
        match provider {
            Provider::ProviderA => ProviderProfile {
                model_name: "gpt-5-2025-08-07".into(),
                reasoning_effort: Some("high".into()),
                ..base
            },
            Provider::ProviderB => ProviderProfile {
                model_name: "claude-opus-4-20250514".into(),
                max_tokens: Some(16_384),
                budget_tokens: Some(8_192),
                ..base
            },
            Provider::ProviderC => ProviderProfile {
                model_name: "deepseek-reasoner".into(),
                max_tokens: Some(20_000),
                supports_images: false,
                ..base
            },
            Provider::Mock => ProviderProfile {
                model_name: "mock".into(),
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.temperature.is_finite() || !(0.0..=2.0).contains(&self.temperature) {
            return Err(format!("temperature {} outside [0, 2]", self.temperature));
        }
        if self.model_name.trim().is_empty() {
            return Err("model_name is empty".into());
        }
        if let Some(budget) = self.budget_tokens {
            match self.max_tokens {
                Some(max) if budget <= max => {}
                Some(max) => return Err(format!("budget_tokens {budget} exceeds max_tokens {max}")),
                None => return Err("budget_tokens requires max_tokens".into()),
            }
        }
        if self.provider == Provider::ProviderB && self.max_tokens.is_none() {
            return Err("provider_b requires max_tokens".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

/// Raw model output. An empty `raw_text` is a valid response; the loop
/// records it as a generation failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub raw_text: String,
    #[serde(default)]
    pub usage: Option<Usage>,
    #[serde(with = "duration_ms", default)]
    pub latency: Duration,
    #[serde(default)]
    pub provider_request_id: Option<String>,
}

impl ModelResponse {
    pub fn text(raw_text: impl Into<String>) -> Self {
        ModelResponse {
            raw_text: raw_text.into(),
            usage: None,
            latency: Duration::ZERO,
            provider_request_id: None,
        }
    }
}

mod duration_ms {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64() * 1e3)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let ms = f64::deserialize(d)?;
        Ok(Duration::from_secs_f64(ms.max(0.0) / 1e3))
    }
}

/// One synthesized program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub source: String,
    pub iteration: u32,
    pub prompt_fingerprint: String,
    pub extraction: ExtractionMethod,
}

impl Candidate {
    pub fn new(extraction: Extraction, iteration: u32, prompt_fingerprint: impl Into<String>) -> Self {
        Candidate {
            source: extraction.source,
            iteration,
            prompt_fingerprint: prompt_fingerprint.into(),
            extraction: extraction.method,
        }
    }

    pub fn fingerprint(&self) -> String {
        digest::sha256_hex(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecommendationError {
    #[error("recommendation text is empty")]
    Empty,
}

/// A single optimization suggestion from the analysis agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub text: String,
    pub evidence_digests: Vec<String>,
    pub candidate_fingerprint: String,
}

impl Recommendation {
    /// Trims the text and, when the model answered with a list despite
    /// being asked for one suggestion, keeps only the first item.
    pub fn new(
        text: &str,
        evidence_digests: Vec<String>,
        candidate_fingerprint: String,
    ) -> Result<Self, RecommendationError> {
        let text = single_item(text.trim());
        if text.is_empty() {
            return Err(RecommendationError::Empty);
        }
        Ok(Recommendation {
            text,
            evidence_digests,
            candidate_fingerprint,
        })
    }
}

fn list_marker_len(line: &str) -> Option<usize> {
    let t = line.trim_start();
    let indent = line.len() - t.len();
    if let Some(rest) = t.strip_prefix("- ").or_else(|| t.strip_prefix("* ")) {
        return Some(line.len() - rest.len());
    }
    let digits = t.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 && digits <= 2 {
        let after = &t[digits..];
        if after.starts_with(". ") || after.starts_with(") ") {
            return Some(indent + digits + 2);
        }
    }
    None
}

fn single_item(text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let items: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| list_marker_len(l).is_some() && !l.starts_with(char::is_whitespace))
        .map(|(i, _)| i)
        .collect();
    if items.len() < 2 {
        return text.to_string();
    }
    log::warn!("analysis agent returned {} suggestions; keeping the first", items.len());
    let first = items[0];
    let end = items[1];
    let mut out: Vec<String> = Vec::new();
    let head = lines[first];
    out.push(head[list_marker_len(head).unwrap_or(0)..].trim().to_string());
    for l in &lines[first + 1..end] {
        if !l.trim().is_empty() {
            out.push(l.trim().to_string());
        }
    }
    out.join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    /// Worth retrying: network faults, rate limits, server errors.
    #[error("transient transport failure: {0}")]
    Transient(String),
    /// Retrying cannot help: bad credentials, malformed request.
    #[error("transport failure: {0}")]
    Fatal(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error("model {model} does not accept image attachments")]
    Capability { model: String },
    #[error("model call failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("invalid provider profile: {0}")]
    Profile(String),
    #[error(transparent)]
    Recommendation(#[from] RecommendationError),
}

/// Anything that can turn a rendered prompt into model text.
pub trait ModelClient: Send + Sync {
    fn complete(&self, profile: &ProviderProfile, prompt: &RenderedPrompt) -> Result<ModelResponse, TransportError>;
}

impl<T: ModelClient + ?Sized> ModelClient for Arc<T> {
    fn complete(&self, profile: &ProviderProfile, prompt: &RenderedPrompt) -> Result<ModelResponse, TransportError> {
        (**self).complete(profile, prompt)
    }
}

pub type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

/// Bounded exponential backoff for transient transport failures.
#[derive(Clone)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
    pub sleeper: Sleeper,
}

impl RetryPolicy {
    pub fn with_sleeper(sleeper: Sleeper) -> Self {
        RetryPolicy {
            sleeper,
            ..RetryPolicy::default()
        }
    }

    /// Delay before attempt `n` (1-based, n ≥ 2).
    pub fn backoff(&self, n: u32) -> Duration {
        self.initial_backoff * 2u32.saturating_pow(n.saturating_sub(2))
    }
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
            sleeper: Arc::new(std::thread::sleep),
        }
    }
}

impl fmt::Debug for RetryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RetryPolicy")
            .field("attempts", &self.attempts)
            .field("initial_backoff", &self.initial_backoff)
            .finish_non_exhaustive()
    }
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
pub struct ConcurrencyCap {
    limit: usize,
    state: Mutex<(usize, usize)>,
    cv: Condvar,
}

pub struct Permit<'a> {
    cap: &'a ConcurrencyCap,
}

impl ConcurrencyCap {
    pub fn new(limit: usize) -> Self {
        ConcurrencyCap {
            limit: limit.max(1),
            state: Mutex::new((0, 0)),
            cv: Condvar::new(),
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut s = self.state.lock().unwrap_or_else(|e| e.into_inner());
        while s.0 >= self.limit {
            s = self.cv.wait(s).unwrap_or_else(|e| e.into_inner());
        }
        s.0 += 1;
        s.1 = s.1.max(s.0);
        Permit { cap: self }
    }

    /// Highest number of permits ever held at once.
    pub fn peak(&self) -> usize {
        self.state.lock().unwrap_or_else(|e| e.into_inner()).1
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut s = self.cap.state.lock().unwrap_or_else(|e| e.into_inner());
        s.0 -= 1;
        self.cap.cv.notify_one();
    }
}

pub const DEFAULT_CONCURRENCY: usize = 4;

/// One shared cap per provider, so both agents on the same provider draw
/// from the same budget.
#[derive(Debug)]
pub struct ProviderLimits {
    per_provider: usize,
    caps: Mutex<BTreeMap<Provider, Arc<ConcurrencyCap>>>,
}

impl ProviderLimits {
    pub fn new(per_provider: usize) -> Self {
        ProviderLimits {
            per_provider,
            caps: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn cap(&self, provider: Provider) -> Arc<ConcurrencyCap> {
        let mut caps = self.caps.lock().unwrap_or_else(|e| e.into_inner());
        caps.entry(provider)
            .or_insert_with(|| Arc::new(ConcurrencyCap::new(self.per_provider)))
            .clone()
    }
}

impl Default for ProviderLimits {
    fn default() -> Self {
        ProviderLimits::new(DEFAULT_CONCURRENCY)
    }
}

/// A profile bound to a client, with retries and a concurrency cap.
#[derive(Clone)]
pub struct Agent {
    pub profile: ProviderProfile,
    client: Arc<dyn ModelClient>,
    retry: RetryPolicy,
    cap: Arc<ConcurrencyCap>,
}

impl fmt::Debug for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Agent")
            .field("profile", &self.profile)
            .field("retry", &self.retry)
            .finish_non_exhaustive()
    }
}

impl Agent {
    pub fn new(profile: ProviderProfile, client: Arc<dyn ModelClient>, limits: &ProviderLimits) -> Self {
        let cap = limits.cap(profile.provider);
        Agent {
            profile,
            client,
            retry: RetryPolicy::default(),
            cap,
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// Sends the prompt and returns the model's text. Transient transport
    /// failures are retried with backoff; an empty answer is not.
    pub fn generate(&self, prompt: &RenderedPrompt) -> Result<ModelResponse, AgentError> {
        self.profile.validate().map_err(AgentError::Profile)?;
        if prompt.has_images() && !self.profile.supports_images {
            return Err(AgentError::Capability {
                model: self.profile.model_name.clone(),
            });
        }
        let attempts = self.retry.attempts.max(1);
        let mut last = String::new();
        for n in 1..=attempts {
            if n > 1 {
                (self.retry.sleeper)(self.retry.backoff(n));
            }
            let outcome = {
                let _permit = self.cap.acquire();
                self.client.complete(&self.profile, prompt)
            };
            match outcome {
                Ok(resp) => return Ok(resp),
                Err(TransportError::Fatal(m)) => return Err(AgentError::Transport { attempts: n, message: m }),
                Err(TransportError::Transient(m)) => {
                    log::warn!("{} attempt {n}/{attempts} failed: {m}", self.profile.provider);
                    last = m;
                }
            }
        }
        Err(AgentError::Transport {
            attempts,
            message: last,
        })
    }

    /// Runs the analysis prompt and wraps the answer with the digests of the
    /// evidence it was shown.
    pub fn analyze_performance(
        &self,
        prompt: &RenderedPrompt,
        candidate_fingerprint: &str,
    ) -> Result<Recommendation, AgentError> {
        let resp = self.generate(prompt)?;
        let digests = prompt.attachments.iter().map(|a| a.digest.clone()).collect();
        Ok(Recommendation::new(&resp.raw_text, digests, candidate_fingerprint.to_string())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiling::EvidenceKind;
    use crate::prompt::{Attachment, AttachmentPayload};
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn partial_profile_fills_provider_defaults() {
        let p: ProviderProfile = toml::from_str("provider = \"provider_c\"\nmodel_name = \"deepseek-chat\"").unwrap();
        assert_eq!(
            p,
            ProviderProfile {
                model_name: "deepseek-chat".into(),
                ..ProviderProfile::replication(Provider::ProviderC)
            }
        );
        assert!(toml::from_str::<ProviderProfile>("model_name = \"x\"").is_err());
        assert!(toml::from_str::<ProviderProfile>("provider = \"mock\"\ntemprature = 1.0").is_err());
        for provider in Provider::ALL {
            let full = ProviderProfile::replication(provider);
            assert_eq!(toml::from_str::<ProviderProfile>(&toml::to_string(&full).unwrap()).unwrap(), full);
        }
    }

    fn prompt(images: bool) -> RenderedPrompt {
        let mut att = vec![Attachment {
            kind: EvidenceKind::TextTable,
            title: "GPU kernel summary".into(),
            digest: "d1".into(),
            payload: AttachmentPayload::Text("Time (%),Name\n100,k\n".into()),
        }];
        if images {
            att.push(Attachment {
                kind: EvidenceKind::Image,
                title: "summary.png".into(),
                digest: "d2".into(),
                payload: AttachmentPayload::ImagePath("summary.png".into()),
            });
        }
        RenderedPrompt::new("analyze".into(), att)
    }

    fn mock_agent(profile: ProviderProfile, text: &str) -> Agent {
        let script = MockScript::always(text);
        Agent::new(profile, Arc::new(MockProvider::new(script)), &ProviderLimits::default())
    }

    #[test]
    fn replication_profiles() {
        let a = ProviderProfile::replication(Provider::ProviderA);
        assert_eq!(a.reasoning_effort.as_deref(), Some("high"));
        assert_eq!(a.max_output_tokens, None);
        let b = ProviderProfile::replication(Provider::ProviderB);
        assert_eq!((b.max_tokens, b.budget_tokens), (Some(16_384), Some(8_192)));
        let c = ProviderProfile::replication(Provider::ProviderC);
        assert_eq!(c.max_tokens, Some(20_000));
        assert!(!c.supports_images);
        for p in Provider::ALL {
            let prof = ProviderProfile::replication(p);
            assert_eq!(prof.temperature, 0.0);
            prof.validate().unwrap();
        }
    }

    #[test]
    fn budget_must_fit_max_tokens() {
        let mut b = ProviderProfile::replication(Provider::ProviderB);
        b.budget_tokens = Some(20_000);
        assert!(b.validate().unwrap_err().contains("exceeds"));
    }

    #[test]
    fn scripted_generation() {
        let agent = mock_agent(ProviderProfile::replication(Provider::Mock), "K1");
        assert_eq!(agent.generate(&prompt(false)).unwrap().raw_text, "K1");
    }

    #[test]
    fn scripted_recommendation_carries_evidence() {
        let agent = mock_agent(ProviderProfile::replication(Provider::Mock), "Use fused epilogue");
        let rec = agent.analyze_performance(&prompt(true), "cfp").unwrap();
        assert_eq!(rec.text, "Use fused epilogue");
        assert_eq!(rec.evidence_digests, ["d1", "d2"]);
        assert_eq!(rec.candidate_fingerprint, "cfp");
    }

    #[test]
    fn text_only_model_rejects_images() {
        let mut profile = ProviderProfile::replication(Provider::ProviderC);
        profile.provider = Provider::Mock;
        let agent = mock_agent(profile, "Tile the loop");
        assert!(agent.analyze_performance(&prompt(false), "c").is_ok());
        assert!(matches!(
            agent.analyze_performance(&prompt(true), "c"),
            Err(AgentError::Capability { .. })
        ));
    }

    struct Flaky {
        fail_first: usize,
        fatal: bool,
        calls: AtomicUsize,
    }

    impl ModelClient for Flaky {
        fn complete(&self, _: &ProviderProfile, _: &RenderedPrompt) -> Result<ModelResponse, TransportError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if n < self.fail_first {
                if self.fatal {
                    Err(TransportError::Fatal("401".into()))
                } else {
                    Err(TransportError::Transient("503".into()))
                }
            } else {
                Ok(ModelResponse::text(""))
            }
        }
    }

    fn recording_sleeper() -> (Sleeper, Arc<Mutex<Vec<Duration>>>) {
        let log = Arc::new(Mutex::new(Vec::new()));
        let l = log.clone();
        (Arc::new(move |d| l.lock().unwrap().push(d)), log)
    }

    fn flaky_agent(fail_first: usize, fatal: bool) -> (Agent, Arc<Flaky>, Arc<Mutex<Vec<Duration>>>) {
        let client = Arc::new(Flaky {
            fail_first,
            fatal,
            calls: AtomicUsize::new(0),
        });
        let (sleeper, log) = recording_sleeper();
        let agent = Agent::new(
            ProviderProfile::replication(Provider::Mock),
            client.clone(),
            &ProviderLimits::default(),
        )
        .with_retry(RetryPolicy::with_sleeper(sleeper));
        (agent, client, log)
    }

    #[test]
    fn transient_failures_retry_with_backoff() {
        let (agent, client, sleeps) = flaky_agent(2, false);
        let resp = agent.generate(&prompt(false)).unwrap();
        assert_eq!(resp.raw_text, "");
        assert_eq!(client.calls.load(Ordering::SeqCst), 3);
        assert_eq!(*sleeps.lock().unwrap(), [Duration::from_secs(1), Duration::from_secs(2)]);
    }

    #[test]
    fn retries_are_bounded() {
        let (agent, client, _) = flaky_agent(10, false);
        let err = agent.generate(&prompt(false)).unwrap_err();
        assert_eq!(
            err,
            AgentError::Transport {
                attempts: 3,
                message: "503".into()
            }
        );
        assert_eq!(client.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn fatal_failures_do_not_retry() {
        let (agent, client, sleeps) = flaky_agent(10, true);
        assert!(agent.generate(&prompt(false)).is_err());
        assert_eq!(client.calls.load(Ordering::SeqCst), 1);
        assert!(sleeps.lock().unwrap().is_empty());
    }

    #[test]
    fn empty_answer_is_not_retried() {
        let (agent, client, _) = flaky_agent(0, false);
        assert_eq!(agent.generate(&prompt(false)).unwrap().raw_text, "");
        assert_eq!(client.calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn empty_recommendation_rejected() {
        let agent = mock_agent(ProviderProfile::replication(Provider::Mock), "  \n ");
        assert!(matches!(
            agent.analyze_performance(&prompt(false), "c"),
            Err(AgentError::Recommendation(RecommendationError::Empty))
        ));
    }

    #[test]
    fn enumerated_recommendation_collapses_to_first() {
        let rec = Recommendation::new(
            "1. Fuse the bias add into the GEMM epilogue.\n   This removes a kernel launch.\n2. Use half precision.\n3. Tile.",
            vec![],
            "c".into(),
        )
        .unwrap();
        assert_eq!(rec.text, "Fuse the bias add into the GEMM epilogue.\nThis removes a kernel launch.");
        let plain = Recommendation::new("Vectorize loads with float4.\n- keeps alignment", vec![], "c".into()).unwrap();
        assert_eq!(plain.text, "Vectorize loads with float4.\n- keeps alignment");
    }

    struct Slow {
        active: AtomicUsize,
        peak: AtomicUsize,
    }

    impl ModelClient for Slow {
        fn complete(&self, _: &ProviderProfile, _: &RenderedPrompt) -> Result<ModelResponse, TransportError> {
            let now = self.active.fetch_add(1, Ordering::SeqCst) + 1;
            self.peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(20));
            self.active.fetch_sub(1, Ordering::SeqCst);
            Ok(ModelResponse::text("ok"))
        }
    }

    #[test]
    fn concurrency_cap_shared_per_provider() {
        let limits = ProviderLimits::new(2);
        let client = Arc::new(Slow {
            active: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        });
        let f = Agent::new(ProviderProfile::replication(Provider::Mock), client.clone(), &limits);
        let g = Agent::new(ProviderProfile::replication(Provider::Mock), client.clone(), &limits);
        std::thread::scope(|s| {
            for i in 0..8 {
                let agent = if i % 2 == 0 { &f } else { &g };
                s.spawn(move || agent.generate(&prompt(false)).unwrap());
            }
        });
        assert!(client.peak.load(Ordering::SeqCst) <= 2);
        assert_eq!(limits.cap(Provider::Mock).peak(), 2);
    }
}
