use sha2::{Digest, Sha256};

use crate::output::{json_f64, json_string};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Per-run summary. Contains nothing time-dependent, so reruns with the same
/// scene and seed serialize identically.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// Named scalar results that are not pass/fail.
    pub values: Vec<(String, f64)>,
    pub error: Option<String>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(command: &str, canonical_config: &str, seed: u64) -> Self {
        RunReport {
            command: command.to_string(),
            config_sha256: hex::encode(Sha256::digest(canonical_config.as_bytes())),
            seed,
            checks: Vec::new(),
            values: Vec::new(),
            error: None,
            pass: true,
        }
    }

    /// Records `value ≤ threshold`; NaN fails.
    pub fn check(&mut self, name: impl Into<String>, value: f64, threshold: f64) -> bool {
        let pass = value <= threshold;
        self.checks.push(Check {
            name: name.into(),
            value,
            threshold,
            pass,
        });
        pass
    }

    pub fn value(&mut self, name: impl Into<String>, v: f64) {
        self.values.push((name.into(), v));
    }

    pub(crate) fn finish(&mut self, failure: Option<&CliError>) {
        self.error = failure.map(|e| e.to_string());
        self.pass = failure.is_none() && self.checks.iter().all(|c| c.pass);
    }

    pub fn to_json(&self) -> String {
        let checks: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{{\"name\":{},\"value\":{},\"threshold\":{},\"pass\":{}}}",
                    json_string(&c.name),
                    json_f64(c.value),
                    json_f64(c.threshold),
                    c.pass
                )
            })
            .collect();
        let values: Vec<String> = self
            .values
            .iter()
            .map(|(k, v)| format!("{}:{}", json_string(k), json_f64(*v)))
            .collect();
        format!(
            "{{\"command\":{},\"config_sha256\":{},\"seed\":{},\"checks\":[{}],\"values\":{{{}}},\"error\":{},\"pass\":{}}}\n",
            json_string(&self.command),
            json_string(&self.config_sha256),
            self.seed,
            checks.join(","),
            values.join(","),
            self.error.as_deref().map_or("null".to_string(), json_string),
            self.pass
        )
    }
}
