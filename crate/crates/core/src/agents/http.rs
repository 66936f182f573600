use std::time::{Duration, Instant};

use super::payload::{build_payload, endpoint, parse_response, API_KEY_VARS};
use super::{ModelClient, ModelResponse, Provider, ProviderProfile, TransportError};
use crate::prompt::RenderedPrompt;

/// Blocking client for the providers' public HTTP APIs.
#[derive(Debug, Clone)]
pub struct HttpClient {
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpClient { agent }
    }
}

impl Default for HttpClient {
    fn default() -> Self {
        HttpClient::new(Duration::from_secs(900))
    }
}

fn api_key(provider: Provider) -> Result<String, TransportError> {
    let var = API_KEY_VARS
        .iter()
        .find(|(p, _)| *p == provider)
        .map(|(_, v)| *v)
        .ok_or_else(|| TransportError::Fatal(format!("{provider} has no HTTP API")))?;
    std::env::var(var)
        .ok()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| TransportError::Fatal(format!("missing API key: set {var}")))
}

impl ModelClient for HttpClient {
    fn complete(&self, profile: &ProviderProfile, prompt: &RenderedPrompt) -> Result<ModelResponse, TransportError> {
        let url = endpoint(profile).ok_or_else(|| TransportError::Fatal("mock profile has no endpoint".into()))?;
        let key = api_key(profile.provider)?;
        let body = build_payload(profile, prompt)?;
        let mut req = self.agent.post(&url).header("content-type", "application/json");
        req = match profile.provider {
            Provider::ProviderB => req.header("x-api-key", &key).header("anthropic-version", "2023-06-01"),
            _ => req.header("authorization", &format!("Bearer {key}")),
        };
        let started = Instant::now();
        let mut resp = req
            .send_json(&body)
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        if status == 429 || status >= 500 {
            return Err(TransportError::Transient(format!("HTTP {status}")));
        }
        if status >= 400 {
            let snippet: String = text.chars().take(300).collect();
            return Err(TransportError::Fatal(format!("HTTP {status}: {snippet}")));
        }
        let json: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| TransportError::Fatal(format!("response is not JSON: {e}")))?;
        let mut out = parse_response(profile.provider, &json)?;
        out.latency = started.elapsed();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    /// Serves one canned HTTP response and returns the request body it saw.
    fn serve_once(status: u16, body: &'static str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line.trim().is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            String::from_utf8(buf).unwrap()
        });
        (url, handle)
    }

    fn profile(url: String) -> ProviderProfile {
        let mut p = ProviderProfile::replication(Provider::ProviderC);
        p.endpoint = Some(url);
        p
    }

    // One test touches the key variable so parallel tests cannot race on it.
    #[test]
    fn round_trip_and_status_mapping() {
        std::env::set_var("KFORGE_PROVIDER_C_KEY", "test-key");
        let client = HttpClient::new(Duration::from_secs(10));
        let prompt = RenderedPrompt::new("hi".into(), vec![]);

        let (url, h) = serve_once(200, r#"{"id":"x","choices":[{"message":{"content":"K1"}}]}"#);
        let resp = client.complete(&profile(url), &prompt).unwrap();
        assert_eq!(resp.raw_text, "K1");
        let sent: serde_json::Value = serde_json::from_str(&h.join().unwrap()).unwrap();
        assert_eq!(sent["max_tokens"], 20_000);

        let (url, h) = serve_once(503, "{}");
        assert!(matches!(client.complete(&profile(url), &prompt), Err(TransportError::Transient(_))));
        h.join().unwrap();

        let (url, h) = serve_once(400, r#"{"error":"bad"}"#);
        assert!(matches!(client.complete(&profile(url), &prompt), Err(TransportError::Fatal(m)) if m.contains("400")));
        h.join().unwrap();

        std::env::remove_var("KFORGE_PROVIDER_C_KEY");
        let err = client.complete(&profile("http://127.0.0.1:9".into()), &prompt).unwrap_err();
        assert_eq!(err, TransportError::Fatal("missing API key: set KFORGE_PROVIDER_C_KEY".into()));
    }
}
