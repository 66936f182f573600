use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Accelerator programming target a candidate is written for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Cuda,
    Metal,
}

impl Backend {
    pub const ALL: [Backend; 2] = [Backend::Cuda, Backend::Metal];

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Cuda => "cuda",
            Backend::Metal => "metal",
        }
    }

    /// Whether a graph-compiled framework baseline is available.
    pub fn supports_graph_compiled(self) -> bool {
        matches!(self, Backend::Cuda)
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown backend '{0}' (expected cuda or metal)")]
pub struct UnknownBackend(pub String);

impl FromStr for Backend {
    type Err = UnknownBackend;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cuda" => Ok(Backend::Cuda),
            "metal" | "mps" => Ok(Backend::Metal),
            _ => Err(UnknownBackend(s.to_string())),
        }
    }
}

/// Which framework execution mode the candidate is timed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    #[default]
    Eager,
    GraphCompiled,
}

impl BaselineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::Eager => "eager",
            BaselineKind::GraphCompiled => "graph_compiled",
        }
    }
}

impl FromStr for BaselineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eager" => Ok(BaselineKind::Eager),
            "graph_compiled" | "graph-compiled" | "compile" => Ok(BaselineKind::GraphCompiled),
            other => Err(format!("unknown baseline kind '{other}'")),
        }
    }
}

/// One computational unit: a GPU ordinal or a whole host.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(pub String);

impl DeviceId {
    pub fn new(id: impl Into<String>) -> Self {
        DeviceId(id.into())
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_backend_names() {
        assert_eq!("cuda".parse::<Backend>().unwrap(), Backend::Cuda);
        assert_eq!("Metal".parse::<Backend>().unwrap(), Backend::Metal);
        assert_eq!("mps".parse::<Backend>().unwrap(), Backend::Metal);
        assert!("rocm".parse::<Backend>().is_err());
    }

    #[test]
    fn graph_compiled_only_on_cuda() {
        assert!(Backend::Cuda.supports_graph_compiled());
        assert!(!Backend::Metal.supports_graph_compiled());
    }
}
