//! Request bodies and response parsing for the hosted providers.
//!
//! Each profile field is written to exactly one payload key; fields a
//! provider does not use are left out rather than sent as null.

use base64::Engine;
use serde_json::{json, Map, Value};

use super::{ModelResponse, Provider, ProviderProfile, TransportError, Usage};
use crate::prompt::{AttachmentPayload, RenderedPrompt};

/// Environment variables holding each provider's API key.
pub const API_KEY_VARS: [(Provider, &str); 3] = [
    (Provider::ProviderA, "KFORGE_PROVIDER_A_KEY"),
    (Provider::ProviderB, "KFORGE_PROVIDER_B_KEY"),
    (Provider::ProviderC, "KFORGE_PROVIDER_C_KEY"),
];

pub fn endpoint(profile: &ProviderProfile) -> Option<String> {
    if let Some(e) = &profile.endpoint {
        return Some(e.clone());
    }
    match profile.provider {
        Provider::ProviderA => Some("https://api.openai.com/v1/chat/completions".into()),
        Provider::ProviderB => Some("https://api.anthropic.com/v1/messages".into()),
        Provider::ProviderC => Some("https://api.deepseek.com/chat/completions".into()),
        Provider::Mock => None,
    }
}

fn text_attachment(title: &str, text: &str) -> String {
    format!("### {title}\n```csv\n{}\n```", text.trim_end())
}

fn image_base64(path: &std::path::Path) -> Result<String, TransportError> {
    let bytes = std::fs::read(path).map_err(|e| TransportError::Fatal(format!("read {}: {e}", path.display())))?;
    Ok(base64::engine::general_purpose::STANDARD.encode(bytes))
}

fn chat_content(prompt: &RenderedPrompt, images: bool) -> Result<Value, TransportError> {
    if prompt.attachments.is_empty() {
        return Ok(Value::String(prompt.text.clone()));
    }
    if !images {
        let mut text = prompt.text.clone();
        for a in &prompt.attachments {
            match &a.payload {
                AttachmentPayload::Text(t) => {
                    text.push_str("\n\n");
                    text.push_str(&text_attachment(&a.title, t));
                }
                AttachmentPayload::ImagePath(_) => {
                    return Err(TransportError::Fatal("image attachment for a text-only provider".into()))
                }
            }
        }
        return Ok(Value::String(text));
    }
    let mut parts = vec![json!({"type": "text", "text": prompt.text})];
    for a in &prompt.attachments {
        parts.push(match &a.payload {
            AttachmentPayload::Text(t) => json!({"type": "text", "text": text_attachment(&a.title, t)}),
            AttachmentPayload::ImagePath(p) => json!({
                "type": "image_url",
                "image_url": {"url": format!("data:image/png;base64,{}", image_base64(p)?)}
            }),
        });
    }
    Ok(Value::Array(parts))
}

fn messages_content(prompt: &RenderedPrompt) -> Result<Value, TransportError> {
    let mut parts = vec![json!({"type": "text", "text": prompt.text})];
    for a in &prompt.attachments {
        parts.push(match &a.payload {
            AttachmentPayload::Text(t) => json!({"type": "text", "text": text_attachment(&a.title, t)}),
            AttachmentPayload::ImagePath(p) => json!({
                "type": "image",
                "source": {"type": "base64", "media_type": "image/png", "data": image_base64(p)?}
            }),
        });
    }
    Ok(Value::Array(parts))
}

fn put<T: Into<Value>>(body: &mut Map<String, Value>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        body.insert(key.to_string(), v.into());
    }
}

/// Builds the JSON request body for `profile`'s provider.
pub fn build_payload(profile: &ProviderProfile, prompt: &RenderedPrompt) -> Result<Value, TransportError> {
    let mut body = Map::new();
    body.insert("model".into(), profile.model_name.clone().into());
    body.insert("temperature".into(), profile.temperature.into());
    match profile.provider {
        Provider::ProviderA | Provider::ProviderC | Provider::Mock => {
            let content = chat_content(prompt, profile.supports_images)?;
            body.insert("messages".into(), json!([{"role": "user", "content": content}]));
            put(&mut body, "reasoning_effort", profile.reasoning_effort.clone());
            put(&mut body, "max_output_tokens", profile.max_output_tokens);
            put(&mut body, "max_tokens", profile.max_tokens);
        }
        Provider::ProviderB => {
            body.insert("messages".into(), json!([{"role": "user", "content": messages_content(prompt)?}]));
            put(&mut body, "max_tokens", profile.max_tokens);
            if let Some(budget) = profile.budget_tokens {
                body.insert("thinking".into(), json!({"type": "enabled", "budget_tokens": budget}));
            }
        }
    }
    Ok(Value::Object(body))
}

/// Reads the answer text, usage and request id from a provider response.
pub fn parse_response(provider: Provider, body: &Value) -> Result<ModelResponse, TransportError> {
    let bad = |what: &str| TransportError::Fatal(format!("unexpected {provider} response: {what}"));
    let (text, usage) = match provider {
        Provider::ProviderB => {
            let blocks = body["content"].as_array().ok_or_else(|| bad("no content array"))?;
            let text: String = blocks
                .iter()
                .filter(|b| b["type"] == "text")
                .filter_map(|b| b["text"].as_str())
                .collect::<Vec<_>>()
                .join("\n");
            let usage = body["usage"].as_object().map(|u| Usage {
                input_tokens: u.get("input_tokens").and_then(Value::as_u64).unwrap_or(0),
                output_tokens: u.get("output_tokens").and_then(Value::as_u64).unwrap_or(0),
            });
            (text, usage)
        }
        _ => {
            let msg = &body["choices"][0]["message"];
            if msg.is_null() {
                return Err(bad("no choices"));
            }
            let usage = body["usage"].as_object().map(|u| Usage {
                input_tokens: u.get("prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
                output_tokens: u.get("completion_tokens").and_then(Value::as_u64).unwrap_or(0),
            });
            (msg["content"].as_str().unwrap_or_default().to_string(), usage)
        }
    };
    Ok(ModelResponse {
        raw_text: text,
        usage,
        latency: Default::default(),
        provider_request_id: body["id"].as_str().map(str::to_string),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiling::EvidenceKind;
    use crate::prompt::Attachment;

    fn count_key(v: &Value, key: &str) -> usize {
        match v {
            Value::Object(m) => m.iter().map(|(k, v)| usize::from(k == key) + count_key(v, key)).sum(),
            Value::Array(a) => a.iter().map(|v| count_key(v, key)).sum(),
            _ => 0,
        }
    }

    fn plain() -> RenderedPrompt {
        RenderedPrompt::new("write a kernel".into(), vec![])
    }

    #[test]
    fn provider_a_shape() {
        let p = build_payload(&ProviderProfile::replication(Provider::ProviderA), &plain()).unwrap();
        assert_eq!(p["reasoning_effort"], "high");
        assert_eq!(p["temperature"], 0.0);
        assert_eq!(count_key(&p, "reasoning_effort"), 1);
        assert_eq!(count_key(&p, "temperature"), 1);
        assert_eq!(count_key(&p, "max_output_tokens"), 0);
        assert_eq!(count_key(&p, "max_tokens"), 0);
        assert_eq!(p["messages"][0]["content"], "write a kernel");
    }

    #[test]
    fn provider_b_shape() {
        let p = build_payload(&ProviderProfile::replication(Provider::ProviderB), &plain()).unwrap();
        assert_eq!(p["max_tokens"], 16_384);
        assert_eq!(p["thinking"]["budget_tokens"], 8_192);
        assert_eq!(count_key(&p, "max_tokens"), 1);
        assert_eq!(count_key(&p, "budget_tokens"), 1);
        assert_eq!(count_key(&p, "temperature"), 1);
        assert_eq!(count_key(&p, "reasoning_effort"), 0);
    }

    #[test]
    fn provider_c_shape() {
        let p = build_payload(&ProviderProfile::replication(Provider::ProviderC), &plain()).unwrap();
        assert_eq!(p["max_tokens"], 20_000);
        assert_eq!(count_key(&p, "max_tokens"), 1);
        assert_eq!(count_key(&p, "budget_tokens"), 0);
        assert_eq!(count_key(&p, "reasoning_effort"), 0);
    }

    #[test]
    fn explicit_output_limit_is_sent_once() {
        let mut a = ProviderProfile::replication(Provider::ProviderA);
        a.max_output_tokens = Some(32_000);
        let p = build_payload(&a, &plain()).unwrap();
        assert_eq!(p["max_output_tokens"], 32_000);
        assert_eq!(count_key(&p, "max_output_tokens"), 1);
    }

    #[test]
    fn attachments_by_provider() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("summary.png");
        std::fs::write(&img, [0x89, b'P', b'N', b'G']).unwrap();
        let prompt = RenderedPrompt::new(
            "analyze".into(),
            vec![
                Attachment {
                    kind: EvidenceKind::TextTable,
                    title: "kernels".into(),
                    digest: "a".into(),
                    payload: AttachmentPayload::Text("Name\nk\n".into()),
                },
                Attachment {
                    kind: EvidenceKind::Image,
                    title: "summary.png".into(),
                    digest: "b".into(),
                    payload: AttachmentPayload::ImagePath(img),
                },
            ],
        );
        let a = build_payload(&ProviderProfile::replication(Provider::ProviderA), &prompt).unwrap();
        let parts = a["messages"][0]["content"].as_array().unwrap();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[2]["image_url"]["url"], "data:image/png;base64,iVBORw==");
        let b = build_payload(&ProviderProfile::replication(Provider::ProviderB), &prompt).unwrap();
        assert_eq!(b["messages"][0]["content"][2]["source"]["data"], "iVBORw==");
        assert!(build_payload(&ProviderProfile::replication(Provider::ProviderC), &prompt).is_err());

        let text_only = RenderedPrompt::new("analyze".into(), prompt.attachments[..1].to_vec());
        let c = build_payload(&ProviderProfile::replication(Provider::ProviderC), &text_only).unwrap();
        assert!(c["messages"][0]["content"].as_str().unwrap().contains("### kernels"));
    }

    #[test]
    fn responses_parse() {
        let chat = json!({"id": "r1", "choices": [{"message": {"content": "K"}}],
                          "usage": {"prompt_tokens": 10, "completion_tokens": 3}});
        let r = parse_response(Provider::ProviderA, &chat).unwrap();
        assert_eq!((r.raw_text.as_str(), r.provider_request_id.as_deref()), ("K", Some("r1")));
        assert_eq!(r.usage.unwrap().output_tokens, 3);

        let msgs = json!({"id": "m1", "content": [{"type": "thinking", "thinking": "hmm"},
                                                 {"type": "text", "text": "K2"}],
                          "usage": {"input_tokens": 5, "output_tokens": 7}});
        let r = parse_response(Provider::ProviderB, &msgs).unwrap();
        assert_eq!(r.raw_text, "K2");
        assert_eq!(r.usage.unwrap().input_tokens, 5);

        let empty = json!({"choices": [{"message": {"content": null}}]});
        assert_eq!(parse_response(Provider::ProviderC, &empty).unwrap().raw_text, "");
        assert!(parse_response(Provider::ProviderC, &json!({})).is_err());
    }
}
