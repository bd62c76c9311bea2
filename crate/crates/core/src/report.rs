//! Machine-readable verification reports.

use num_traits::Zero;
use serde::Serialize;

use crate::poly::{fmt_rational, Rational};

/// Result of checking an identity over a set of instances.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub instances: usize,
    /// Exact rational as `"a/b"` or a decimal float.
    pub max_abs_deviation: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<serde_json::Value>,
}

impl IdentityReport {
    /// Passes iff the exact deviation is zero.
    pub fn exact(
        identity: &str,
        instances: usize,
        max_dev: Rational,
        witness: Option<serde_json::Value>,
    ) -> Self {
        let pass = max_dev.is_zero();
        Self {
            identity: identity.to_string(),
            instances,
            max_abs_deviation: fmt_rational(&max_dev),
            pass,
            witness: if pass { None } else { witness },
            notes: None,
        }
    }

    pub fn float(identity: &str, instances: usize, max_dev: f64, tolerance: f64) -> Self {
        Self {
            identity: identity.to_string(),
            instances,
            max_abs_deviation: format!("{max_dev:e}"),
            pass: max_dev <= tolerance,
            witness: None,
            notes: Some(serde_json::json!({ "tolerance": tolerance })),
        }
    }

    /// Folds several reports on the same identity into one.
    pub fn merge(identity: &str, reports: &[IdentityReport]) -> Self {
        let instances = reports.iter().map(|r| r.instances).sum();
        let pass = reports.iter().all(|r| r.pass);
        let failing = reports.iter().find(|r| !r.pass);
        let max_abs_deviation = failing
            .map(|r| r.max_abs_deviation.clone())
            .unwrap_or_else(|| "0".to_string());
        Self {
            identity: identity.to_string(),
            instances,
            max_abs_deviation,
            pass,
            witness: failing.and_then(|r| r.witness.clone()),
            notes: None,
        }
    }
}
