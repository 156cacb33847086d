use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Informational checks are reported but do not affect the exit code.
    pub required: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub deterministic: bool,
    /// Omitted under `--deterministic`.
    pub wall_time_s: Option<f64>,
    /// Paths relative to the manifest's directory, in write order.
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub exit_code: u8,
    pub error: Option<String>,
}

/// Checks accumulated while a command runs.
#[derive(Default)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    pub fn require(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.push(name, passed, true, detail.into());
    }

    pub fn inform(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.push(name, passed, false, detail.into());
    }

    fn push(&mut self, name: &str, passed: bool, required: bool, detail: String) {
        self.0.push(Check {
            name: name.into(),
            passed,
            required,
            detail,
        });
    }

    pub fn all_required_pass(&self) -> bool {
        self.0.iter().all(|c| c.passed || !c.required)
    }
}
