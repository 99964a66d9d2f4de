//! Deterministic JSON reports for the CLI.
//!
//! Field order is fixed by declaration order; all maps inside are ordered.
//! `timing_ms` is the only field excluded from the byte-identity contract.

use std::collections::BTreeMap;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    /// Label -> FNV-1a digest of the input bytes.
    pub inputs: BTreeMap<String, String>,
    /// Echo of every bound the run used.
    pub bounds: serde_json::Value,
    pub verdict: serde_json::Value,
    /// Everything needed to replay the verdict.
    pub witnesses: serde_json::Value,
    pub timing_ms: u128,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            inputs: BTreeMap::new(),
            bounds: serde_json::Value::Null,
            verdict: serde_json::Value::Null,
            witnesses: serde_json::Value::Null,
            timing_ms: 0,
        }
    }

    pub fn record_input(&mut self, label: &str, bytes: &[u8]) {
        self.inputs
            .insert(label.to_string(), format!("{:016x}", fnv1a64(bytes)));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// FNV-1a, 64 bit: a stable content digest with no dependencies.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn field_order_is_fixed() {
        let mut report = Report::new("validate");
        report.record_input("variety", b"sort 1\n");
        let json = report.to_json();
        let schema_at = json.find("\"schema\"").unwrap();
        let command_at = json.find("\"command\"").unwrap();
        let timing_at = json.find("\"timing_ms\"").unwrap();
        assert!(schema_at < command_at && command_at < timing_at);
    }
}
