use carnot_core::Error;
use serde_json::{json, Value};

use crate::commands::Format;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Exit code for an error: 2 for malformed input, 1 for a mathematical refusal.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CharacteristicPoint
        | Error::NotOnSurface(_)
        | Error::Numerical(_)
        | Error::NotHomomorphism(_)
        | Error::NotGraded => EXIT_FAILURE,
        _ => EXIT_USAGE,
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::IndexOutOfRange { .. } => "index_out_of_range",
        Error::InvalidAlgebra(_) => "invalid_algebra",
        Error::NotGraded => "not_graded",
        Error::NotHomomorphism(_) => "not_homomorphism",
        Error::CharacteristicPoint => "characteristic_point",
        Error::NotOnSurface(_) => "not_on_surface",
        Error::Unsupported(_) => "unsupported",
        Error::UnknownAlgebra(_) => "unknown_algebra",
        Error::Parse(_) => "parse",
        Error::Numerical(_) => "numerical",
        Error::Invalid(_) => "invalid",
        Error::Json(_) => "json",
        Error::Io(_) => "io",
    }
}

pub fn error_report(e: &Error) -> Value {
    json!({ "error": { "kind": error_kind(e), "message": e.to_string() } })
}

pub fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(v).expect("values always serialize"),
        Format::Table => {
            let mut out = String::new();
            table(v, "", &mut out);
            out
        }
    }
}

// Flattened `path = value` lines; arrays of scalars stay inline.
fn table(v: &Value, path: &str, out: &mut String) {
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                table(x, &p, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                table(x, &format!("{path}[{i}]"), out);
            }
        }
        _ => {
            let s = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{path:<40} {s}\n"));
        }
    }
}
