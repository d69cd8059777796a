use serde::{Deserialize, Serialize};
use serde_json::Value;

use qshift_core::coefficients::format_rational;
use qshift_core::diffops::Operator;

pub const SCHEMA_VERSION: &str = "1";

/// The shipped JSON schema for [`Report`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub status: Status,
    pub payload: Value,
    pub residual_terms: Vec<(String, String)>,
    pub timing_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

impl Report {
    pub fn new(command: &str, status: Status, payload: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            status,
            payload,
            residual_terms: Vec::new(),
            timing_ms: 0,
            reason: None,
        }
    }

    pub fn error(command: &str, reason: impl Into<String>) -> Self {
        Report { reason: Some(reason.into()), ..Report::new(command, Status::Error, Value::Object(Default::default())) }
    }

    pub fn fail(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Fail;
        self.reason = Some(reason.into());
        self
    }

    pub fn with_residual(mut self, op: &Operator, names: &[String]) -> Self {
        self.residual_terms = operator_terms(op, names);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }
}

/// One `(monomial, coefficient)` pair per power of `h` in each term.
pub fn operator_terms(op: &Operator, names: &[String]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (mono, series) in op.terms() {
        let body = mono.fmt_with(names, false);
        for (e, c) in series.iter() {
            let monomial = match e {
                0 => body.clone(),
                1 => format!("h*{body}"),
                _ => format!("h^{e}*{body}"),
            };
            out.push((monomial, format_rational(c)));
        }
    }
    out
}
