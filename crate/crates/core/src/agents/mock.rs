use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ModelClient, ModelResponse, ProviderProfile, TransportError};
use crate::prompt::RenderedPrompt;

/// How a script entry selects a call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockMatch {
    /// Prompt fingerprint; a prefix of at least eight characters suffices.
    Fingerprint(String),
    /// 1-based call number on this provider.
    Ordinal(u64),
    /// Substring of the rendered prompt text.
    Contains(String),
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockFailure {
    Transient,
    Fatal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockScriptEntry {
    #[serde(rename = "match")]
    pub matcher: MockMatch,
    #[serde(default)]
    pub response_text: String,
    /// Fail the call instead of answering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail: Option<MockFailure>,
}

/// Ordered script; the first matching entry answers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MockScript {
    pub entries: Vec<MockScriptEntry>,
}

impl MockScript {
    pub fn always(text: &str) -> Self {
        let mut s = MockScript::default();
        s.push(MockMatch::Any, text);
        s
    }

    pub fn push(&mut self, matcher: MockMatch, response_text: &str) -> &mut Self {
        self.entries.push(MockScriptEntry {
            matcher,
            response_text: response_text.to_string(),
            fail: None,
        });
        self
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Deterministic provider answering from a script.
#[derive(Debug)]
pub struct MockProvider {
    script: MockScript,
    calls: Mutex<Vec<String>>,
}

impl MockProvider {
    pub fn new(script: MockScript) -> Self {
        MockProvider {
            script,
            calls: Mutex::new(Vec::new()),
        }
    }

    /// Fingerprints of every prompt received, in call order.
    pub fn calls(&self) -> Vec<String> {
        self.calls.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

fn matches(m: &MockMatch, ordinal: u64, prompt: &RenderedPrompt) -> bool {
    match m {
        MockMatch::Fingerprint(fp) => fp.len() >= 8 && prompt.fingerprint.starts_with(fp.as_str()),
        MockMatch::Ordinal(n) => *n == ordinal,
        MockMatch::Contains(s) => prompt.text.contains(s.as_str()),
        MockMatch::Any => true,
    }
}

impl ModelClient for MockProvider {
    fn complete(&self, _: &ProviderProfile, prompt: &RenderedPrompt) -> Result<ModelResponse, TransportError> {
        let ordinal = {
            let mut calls = self.calls.lock().unwrap_or_else(|e| e.into_inner());
            calls.push(prompt.fingerprint.clone());
            calls.len() as u64
        };
        let entry = self
            .script
            .entries
            .iter()
            .find(|e| matches(&e.matcher, ordinal, prompt))
            .ok_or_else(|| TransportError::Fatal(format!("mock script has no answer for call {ordinal}")))?;
        match entry.fail {
            Some(MockFailure::Transient) => Err(TransportError::Transient(format!("scripted failure on call {ordinal}"))),
            Some(MockFailure::Fatal) => Err(TransportError::Fatal(format!("scripted failure on call {ordinal}"))),
            None => Ok(ModelResponse::text(entry.response_text.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::Provider;

    fn ask(p: &MockProvider, text: &str) -> Result<String, TransportError> {
        let profile = ProviderProfile::replication(Provider::Mock);
        p.complete(&profile, &RenderedPrompt::new(text.into(), vec![]))
            .map(|r| r.raw_text)
    }

    #[test]
    fn script_file_round_trip() {
        let json = r#"[
            {"match": {"ordinal": 2}, "response_text": "second"},
            {"match": {"contains": "level2"}, "response_text": "L2"},
            {"match": {"ordinal": 3}, "fail": "transient"},
            {"match": "any", "response_text": "fallback"}
        ]"#;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("script.json");
        std::fs::write(&path, json).unwrap();
        let script = MockScript::load(&path).unwrap();
        assert_eq!(script.entries.len(), 4);
        let back: MockScript = serde_json::from_str(&serde_json::to_string(&script).unwrap()).unwrap();
        assert_eq!(back, script);

        let p = MockProvider::new(script);
        assert_eq!(ask(&p, "level1 task").unwrap(), "fallback");
        assert_eq!(ask(&p, "level2 task").unwrap(), "second");
        assert!(matches!(ask(&p, "x"), Err(TransportError::Transient(_))));
        assert_eq!(ask(&p, "level2 task").unwrap(), "L2");
        assert_eq!(p.calls().len(), 4);
    }

    #[test]
    fn fingerprint_match() {
        let prompt = RenderedPrompt::new("exact".into(), vec![]);
        let mut script = MockScript::default();
        script.push(MockMatch::Fingerprint(prompt.fingerprint[..12].to_string()), "hit");
        let p = MockProvider::new(script);
        assert_eq!(ask(&p, "exact").unwrap(), "hit");
        assert!(matches!(ask(&p, "other"), Err(TransportError::Fatal(_))));
    }

    #[test]
    fn deterministic_replay() {
        let mut script = MockScript::default();
        script.push(MockMatch::Ordinal(1), "a").push(MockMatch::Any, "b");
        let run = || {
            let p = MockProvider::new(script.clone());
            (0..3).map(|i| ask(&p, &format!("p{i}")).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), ["a", "b", "b"]);
        assert_eq!(run(), run());
    }
}
