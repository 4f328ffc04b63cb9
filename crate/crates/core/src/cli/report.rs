use serde::Serialize;
use serde_json::Value;

use super::config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Undetermined,
}

/// One check. `measured` and `threshold` are always present.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub witness: Value,
}

impl Record {
    pub fn new(name: &str, status: Status, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            status,
            measured,
            threshold,
            witness: Value::Null,
        }
    }

    /// Passes when `measured < threshold`; NaN fails.
    pub fn below(name: &str, measured: f64, threshold: f64) -> Self {
        let ok = measured < threshold;
        Self::new(
            name,
            if ok { Status::Pass } else { Status::Fail },
            measured,
            threshold,
        )
    }

    /// Passes when `measured >= threshold`; NaN fails.
    pub fn at_least(name: &str, measured: f64, threshold: f64) -> Self {
        let ok = measured >= threshold;
        Self::new(
            name,
            if ok { Status::Pass } else { Status::Fail },
            measured,
            threshold,
        )
    }

    pub fn with_witness(mut self, witness: impl Serialize) -> Self {
        self.witness = serde_json::to_value(witness).unwrap_or(Value::Null);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Config,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    /// 0 when no record failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
