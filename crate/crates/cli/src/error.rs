use std::fmt;
use std::process::ExitCode;

use degenpop::hum::HumError;
use degenpop::model::ModelError;
use degenpop::pde::PdeError;
use degenpop::verify::VerifyError;
use degenpop::weights::WeightError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Acceptance(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Acceptance(_) => 4,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Acceptance(m) => write!(f, "acceptance failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        match e {
            PdeError::Numerical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<HumError> for CliError {
    fn from(e: HumError) -> Self {
        match e {
            HumError::Config(_) | HumError::Data(_) => CliError::Config(e.to_string()),
            HumError::Numerical(_) => CliError::Numerical(e.to_string()),
            HumError::Pde(p) => p.into(),
        }
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Model(m) => m.into(),
            VerifyError::Pde(p) => p.into(),
            VerifyError::Hum(h) => h.into(),
            VerifyError::Weight(w) => w.into(),
            VerifyError::Config(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(CliError::Config(String::new()).code(), 2);
        assert_eq!(CliError::from(PdeError::Numerical("nan".into())).code(), 3);
        assert_eq!(CliError::from(HumError::Pde(PdeError::Config("x".into()))).code(), 2);
        assert_eq!(CliError::Acceptance(String::new()).code(), 4);
    }
}
