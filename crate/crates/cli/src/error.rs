use serde_json::json;

use udk_core::catalog::CatalogError;
use udk_core::designs::DesignError;
use udk_core::format::FormatError;
use udk_core::matrep::GroupError;
use udk_core::symplectic::SymplecticError;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Violation = 1,
    Input = 2,
    Cap = 3,
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub exit: Exit,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> CliError {
        CliError {
            exit: Exit::Input,
            kind: "input",
            message: message.into(),
        }
    }

    pub fn violation(message: impl Into<String>) -> CliError {
        CliError {
            exit: Exit::Violation,
            kind: "violation",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind, "message": self.message, "exit_code": self.exit as i32 } })
    }
}

fn group_kind(e: &GroupError) -> (Exit, &'static str) {
    match e {
        GroupError::CapExceeded(_) => (Exit::Cap, "cap_exceeded"),
        GroupError::Overflow => (Exit::Cap, "overflow"),
        _ => (Exit::Input, "input"),
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> CliError {
        let (exit, kind) = group_kind(&e);
        CliError {
            exit,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> CliError {
        match e {
            FormatError::Group(g) => g.into(),
            e => CliError::input(e.to_string()),
        }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> CliError {
        match e {
            DesignError::Group(g) => g.into(),
            DesignError::ZeroT => CliError::input(e.to_string()),
            e => CliError::violation(e.to_string()),
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> CliError {
        match e {
            CatalogError::Group(g) => g.into(),
            CatalogError::Format(f) => f.into(),
            CatalogError::Design(d) => d.into(),
            CatalogError::VerificationFailed { .. } => CliError::violation(e.to_string()),
            e => CliError::input(e.to_string()),
        }
    }
}

impl From<SymplecticError> for CliError {
    fn from(e: SymplecticError) -> CliError {
        match e {
            SymplecticError::CapExceeded(_) => CliError {
                exit: Exit::Cap,
                kind: "cap_exceeded",
                message: e.to_string(),
            },
            SymplecticError::Format(f) => f.into(),
            e => CliError::input(e.to_string()),
        }
    }
}
