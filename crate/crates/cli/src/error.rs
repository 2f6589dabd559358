use std::fmt;

use varifold_motion::dataset::DatasetError;
use varifold_motion::kernel::KernelError;
use varifold_motion::retrieval::RetrievalError;
use varifold_motion::signature::SignatureError;
use varifold_motion::MeshError;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

/// A diagnostic plus the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: msg.into() }
    }

    /// Prefixes the message, keeping the code.
    pub fn context(self, what: impl fmt::Display) -> Self {
        Self {
            code: self.code,
            message: format!("{what}: {}", self.message),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn kernel_code(e: &KernelError) -> u8 {
    match e {
        KernelError::InvalidConfig(_) => EXIT_CONFIG,
        KernelError::NonPositiveSelfProduct(_) => EXIT_NUMERICAL,
    }
}

fn signature_code(e: &SignatureError) -> u8 {
    match e {
        SignatureError::Frame { source, .. } | SignatureError::Kernel(source) => kernel_code(source),
        SignatureError::InvalidOrder { .. } => EXIT_CONFIG,
        SignatureError::TooFewFrames(_) | SignatureError::Format(_) | SignatureError::Io(_) => EXIT_DATA,
        _ => EXIT_NUMERICAL,
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        Self { code: kernel_code(&e), message: e.to_string() }
    }
}

impl From<SignatureError> for CliError {
    fn from(e: SignatureError) -> Self {
        Self { code: signature_code(&e), message: e.to_string() }
    }
}

impl From<RetrievalError> for CliError {
    fn from(e: RetrievalError) -> Self {
        let code = match &e {
            RetrievalError::Signature(s) => signature_code(s),
            RetrievalError::UnknownMetric(_) => EXIT_CONFIG,
            RetrievalError::SingletonClass(_) | RetrievalError::Shape { .. } => EXIT_DATA,
            _ => EXIT_NUMERICAL,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        let code = match &e {
            DatasetError::InvalidSpec(_) => EXIT_CONFIG,
            _ => EXIT_DATA,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data(e.to_string())
    }
}
