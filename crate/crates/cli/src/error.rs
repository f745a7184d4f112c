use gphl_core::Error as CoreError;
use serde_json::json;

/// Failure of a `run` invocation, mapped onto the documented exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for schema and parameter-domain violations, 3 for memory or size refusals,
    /// 4 for numerical failures, 1 for file-system trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::Core(CoreError::Domain(_)) => 2,
            CliError::Core(CoreError::MemoryBudget { .. } | CoreError::SizeRefusal { .. }) => 3,
            CliError::Core(CoreError::Io(_)) | CliError::Io(_) => 1,
            CliError::Core(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
                CoreError::Domain(_) => "domain",
                CoreError::RmaxTooSmall { .. } => "rmax_too_small",
                CoreError::SingularDressing { .. } => "singular_dressing",
                CoreError::MemoryBudget { .. } => "memory_budget",
                CoreError::SizeRefusal { .. } => "size_refusal",
                CoreError::Divergent(_) => "divergent",
                CoreError::InsufficientData(_) => "insufficient_data",
                CoreError::Numerical(_) => "numerical",
                CoreError::Format(_) => "format",
                CoreError::Io(_) => "io",
            },
        }
    }

    /// Machine-readable form written to stderr and `error.json`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Core(CoreError::MemoryBudget { required, budget }) = self {
            body["required_bytes"] = json!(required);
            body["budget_bytes"] = json!(budget);
        }
        json!({ "error": body })
    }
}
