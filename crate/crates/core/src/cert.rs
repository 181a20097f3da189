//! Derivation certificates: a self-contained JSON document embedding the
//! full structure at every step, so checking needs no recomputation
//! context.
//!
//! ```json
//! {
//!   "conclusion": "[a;~a]",
//!   "steps": [ { "rule": "ai_down", "premise": "1" } ]
//! }
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parse::{parse_structure, ParseError};
use crate::rules::{Derivation, RuleInstance, RuleName};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertStep {
    pub rule: String,
    pub premise: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub conclusion: String,
    pub steps: Vec<CertStep>,
}

/// Sidecar record emitted next to simulation certificates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationSidecar {
    pub term: String,
    pub reduct: String,
    pub output: String,
}

#[derive(Debug, Clone, Error)]
pub enum CertError {
    #[error("bad structure in certificate: {0}")]
    Structure(#[from] ParseError),
    #[error("unknown rule name `{0}`")]
    UnknownRule(String),
    #[error("malformed certificate: {0}")]
    Json(String),
}

impl Certificate {
    pub fn from_derivation(d: &Derivation) -> Certificate {
        Certificate {
            conclusion: d.conclusion.to_string(),
            steps: d
                .steps
                .iter()
                .map(|s| CertStep { rule: s.rule.as_str().to_string(), premise: s.premise.to_string() })
                .collect(),
        }
    }

    pub fn to_derivation(&self) -> Result<Derivation, CertError> {
        let mut below = parse_structure(&self.conclusion)?;
        let conclusion = below.clone();
        let mut steps = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            let rule = RuleName::parse(&s.rule).ok_or_else(|| CertError::UnknownRule(s.rule.clone()))?;
            let premise = parse_structure(&s.premise)?;
            steps.push(RuleInstance::new(rule, below, premise.clone()));
            below = premise;
        }
        Ok(Derivation { conclusion, steps })
    }

    /// UTF-8 with LF line endings and a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Certificate, CertError> {
        serde_json::from_str(s).map_err(|e| CertError::Json(e.to_string()))
    }
}
