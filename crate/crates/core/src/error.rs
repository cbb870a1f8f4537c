use thiserror::Error;

/// Failure modes shared by every lab operation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    /// A caller supplied an out-of-range or inconsistent parameter.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Vector/matrix shapes do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    /// A configured resource cap (memory, enumeration size, grid size) would be exceeded.
    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    ResourceCap {
        what: &'static str,
        needed: String,
        cap: String,
    },
    /// The requested case is outside what is proved or implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A series needed by the numerology diverges.
    #[error("divergent series: ratio {ratio} >= 1")]
    Divergent { ratio: String },
}

impl LabError {
    pub fn param(msg: impl Into<String>) -> Self {
        LabError::Parameter(msg.into())
    }

    /// True for errors caused by resource caps rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, LabError::ResourceCap { .. })
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
