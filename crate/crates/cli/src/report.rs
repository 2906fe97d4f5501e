//! The JSON report written by every command.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use twophoton_core::Units;

use crate::config::RunConfig;
use crate::format::JsonFormatter;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub inputs: Map<String, Value>,
    pub results: Map<String, Value>,
    pub provenance: Map<String, Value>,
}

impl ReportDocument {
    pub fn new(
        config: &RunConfig,
        inputs: Map<String, Value>,
        results: Map<String, Value>,
    ) -> Self {
        let mut echo = Map::new();
        echo.insert("command".into(), config.command.name().into());
        echo.insert("natural_units".into(), config.natural_units.into());
        echo.extend(inputs);
        ReportDocument {
            inputs: echo,
            results,
            provenance: provenance(config),
        }
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, JsonFormatter::new());
        self.serialize(&mut ser).expect("in-memory JSON");
        buf.push(b'\n');
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// The echoed inputs as config-file text that reproduces this run.
    pub fn inputs_as_config(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.inputs {
            if k == "command" {
                continue;
            }
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) => match n.as_f64() {
                    Some(x) if n.is_f64() => crate::format::float(x),
                    _ => n.to_string(),
                },
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {text}\n"));
        }
        out
    }
}

/// A JSON number, or a string for values JSON cannot hold.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(crate::format::float(x)))
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Current UTC time, or `SOURCE_DATE_EPOCH` when set so that reports can be
/// reproduced byte for byte.
pub fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now);
    now.to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn provenance(config: &RunConfig) -> Map<String, Value> {
    let mut p = Map::new();
    p.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    let seed = config.count("seed").ok();
    p.insert("seed".into(), seed.map(Value::from).unwrap_or(Value::Null));
    p.insert("timestamp".into(), timestamp().into());
    let units = units_of(config);
    let mut constants = Map::new();
    constants.insert(
        "system".into(),
        if config.natural_units {
            "natural"
        } else {
            "SI"
        }
        .into(),
    );
    constants.insert("hbar".into(), num(units.hbar));
    constants.insert("k_b".into(), num(units.k_b));
    constants.insert("c".into(), num(units.c));
    p.insert("constants".into(), Value::Object(constants));
    p
}

pub fn units_of(config: &RunConfig) -> Units {
    if config.natural_units {
        Units::NATURAL
    } else {
        Units::SI
    }
}
