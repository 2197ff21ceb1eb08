//! Versioned JSON reports shared by the library and the command-line tool.

use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// `{"schema_version": 1, "kind": kind, "data": payload}`.
pub fn envelope<T: Serialize>(kind: &str, payload: &T) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "data": serde_json::to_value(payload).expect("report payloads serialize"),
    })
}

/// Pretty-printed [`envelope`] with a trailing newline.
pub fn to_string<T: Serialize>(kind: &str, payload: &T) -> String {
    let mut s = serde_json::to_string_pretty(&envelope(kind, payload)).expect("values serialize");
    s.push('\n');
    s
}
