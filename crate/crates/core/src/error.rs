use thiserror::Error;

/// Errors raised by the engine. Verification *failures* are never errors;
/// they are reported through the various report types.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands that do not belong together (different algebras, wrong
    /// dimensions, unknown generators).
    #[error("structural error: {0}")]
    Structural(String),
    /// A hypothesis of a construction does not hold.
    #[error("validation error: {message}")]
    Validation { message: String, witness: Option<String> },
    /// The supplied inverse of a pairing matrix is not an inverse.
    #[error("pairing witness: eta * eta_inv has entry ({row},{column}) = {value}")]
    PairingWitness { row: usize, column: usize, value: String },
    /// A jet computation needed a derivative beyond the declared order.
    #[error("jet order overflow: {0}")]
    OrderOverflow(String),
    /// A textual element or model file could not be read.
    #[error("{class} at {line}:{column}: {message}")]
    Parse { class: ParseClass, line: usize, column: usize, message: String },
}

/// Diagnostic classes for parse errors, kept distinct so callers can match
/// on the kind of problem without inspecting message text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseClass {
    Syntax,
    Schema,
    UnresolvedReference,
    PairingWitness,
}

impl std::fmt::Display for ParseClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ParseClass::Syntax => "syntax error",
            ParseClass::Schema => "schema violation",
            ParseClass::UnresolvedReference => "unresolved reference",
            ParseClass::PairingWitness => "pairing witness",
        };
        f.write_str(s)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>, witness: Option<String>) -> Error {
    Error::Validation { message: msg.into(), witness }
}
