use engel_core::EngelError;
use serde_json::{json, Value};

/// Failure of a CLI run. Usage errors exit with 1, domain errors with 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(EngelError),
}

impl From<EngelError> for CliError {
    fn from(e: EngelError) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain(_) => 2,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `{"code", "message", ...}` with the variant's fields attached.
pub fn error_object(e: &EngelError) -> Value {
    let mut obj = json!({ "code": e.code(), "message": e.to_string() });
    let extra = match e {
        EngelError::NotAntisymmetric { i, j, k } => json!({ "index": [i, j, k] }),
        EngelError::NotLieAlgebra { residual } => json!({ "residual": residual }),
        EngelError::NotEngel { growth } => json!({ "growth": growth }),
        EngelError::KernelNotInD { transverse } => json!({ "transverse": transverse }),
        EngelError::JacobiViolated { residuals } => json!({ "residuals": residuals }),
        EngelError::Unclassifiable { t } => json!({ "t": t }),
        EngelError::StepRejected { t, step } => json!({ "t": t, "step": step }),
        EngelError::OutOfDomain { t, start, end } => json!({ "t": t, "start": start, "end": end }),
        _ => json!({}),
    };
    if let (Some(o), Value::Object(extra)) = (obj.as_object_mut(), extra) {
        o.extend(extra);
    }
    obj
}
