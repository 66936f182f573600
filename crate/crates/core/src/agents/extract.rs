//! Pulling the candidate program out of free-form model output.
//!
//! Fenced blocks win; among several, the last one is taken because models
//! tend to explain a draft first and then print the revised version. Blocks
//! tagged as shell or output transcripts are passed over when a source
//! block exists. Without fences the whole body is accepted only when it
//! reads as a single program from its first line.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ExtractionMethod {
    Fenced {
        /// 0-based index of the chosen block among all fenced blocks.
        block: usize,
        blocks: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        language: Option<String>,
        /// The final fence was never closed (output cut short).
        #[serde(default)]
        unterminated: bool,
    },
    WholeBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub source: String,
    pub method: ExtractionMethod,
}

struct Block {
    language: Option<String>,
    body: String,
    terminated: bool,
}

const NON_SOURCE_LANGS: [&str; 9] = ["bash", "sh", "shell", "console", "text", "txt", "output", "json", "diff"];

const CODE_MARKERS: [&str; 8] = [
    "import torch",
    "class NewModel",
    "def forward",
    "load_inline",
    "__global__",
    "kernel void",
    "#include",
    "compile_shader",
];

const CODE_STARTS: [&str; 9] = [
    "import ", "from ", "class ", "def ", "#include", "@", "\"\"\"", "'''", "# ",
];

fn opening_fence(line: &str) -> Option<(char, usize, &str)> {
    let indent = line.len() - line.trim_start_matches(' ').len();
    if indent > 3 {
        return None;
    }
    let t = &line[indent..];
    let ch = t.chars().next().filter(|c| *c == '`' || *c == '~')?;
    let len = t.chars().take_while(|c| *c == ch).count();
    if len < 3 {
        return None;
    }
    let info = t[len..].trim();
    if ch == '`' && info.contains('`') {
        return None;
    }
    Some((ch, len, info))
}

fn closes(line: &str, ch: char, len: usize) -> bool {
    let t = line.trim();
    let run = t.chars().take_while(|c| *c == ch).count();
    run >= len && run == t.chars().count() && line.len() - line.trim_start_matches(' ').len() <= 3
}

fn blocks(text: &str) -> Vec<Block> {
    let mut out = Vec::new();
    let mut lines = text.lines();
    while let Some(line) = lines.next() {
        let Some((ch, len, info)) = opening_fence(line) else { continue };
        let language = info
            .split_whitespace()
            .next()
            .map(|l| l.trim_start_matches('{').trim_end_matches('}').to_ascii_lowercase())
            .filter(|l| !l.is_empty());
        let mut body = Vec::new();
        let mut terminated = false;
        for inner in lines.by_ref() {
            if closes(inner, ch, len) {
                terminated = true;
                break;
            }
            body.push(inner);
        }
        out.push(Block {
            language,
            body: body.join("\n"),
            terminated,
        });
    }
    out
}

fn normalize(source: &str) -> String {
    let lines: Vec<&str> = source.lines().map(str::trim_end).collect();
    let start = lines.iter().position(|l| !l.is_empty()).unwrap_or(lines.len());
    let end = lines.iter().rposition(|l| !l.is_empty()).map_or(start, |e| e + 1);
    let mut s = lines[start..end].join("\n");
    if !s.is_empty() {
        s.push('\n');
    }
    s
}

fn looks_like_program(text: &str) -> bool {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    CODE_STARTS.iter().any(|s| first.starts_with(s)) && CODE_MARKERS.iter().any(|m| text.contains(m))
}

/// Extracts the candidate program from a model answer, or `None` when the
/// answer contains no program.
pub fn extract_code(raw_text: &str) -> Option<Extraction> {
    let all = blocks(raw_text);
    let usable: Vec<usize> = (0..all.len()).filter(|&i| !all[i].body.trim().is_empty()).collect();
    let is_source = |i: &usize| {
        all[*i]
            .language
            .as_deref()
            .is_none_or(|l| !NON_SOURCE_LANGS.contains(&l))
    };
    let chosen = usable
        .iter()
        .rev()
        .find(|i| is_source(i))
        .or_else(|| usable.last())
        .copied();
    if let Some(i) = chosen {
        let b = &all[i];
        return Some(Extraction {
            source: normalize(&b.body),
            method: ExtractionMethod::Fenced {
                block: i,
                blocks: all.len(),
                language: b.language.clone(),
                unterminated: !b.terminated,
            },
        });
    }
    if !all.is_empty() {
        return None;
    }
    looks_like_program(raw_text).then(|| Extraction {
        source: normalize(raw_text),
        method: ExtractionMethod::WholeBody,
    })
}

/// Wraps `source` in a fence long enough that nothing inside can close it.
pub fn fence(source: &str, language: &str) -> String {
    let longest = source
        .lines()
        .map(|l| l.trim_start().chars().take_while(|c| *c == '`').count())
        .max()
        .unwrap_or(0);
    let ticks = "`".repeat(longest.max(2) + 1);
    let body = source.strip_suffix('\n').unwrap_or(source);
    format!("{ticks}{language}\n{body}\n{ticks}\n")
}
