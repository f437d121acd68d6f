use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Failure;

/// Merges command-line flags over an optional flat JSON config file and
/// fills the rest from `R::default()`.
///
/// Flags that were not given serialize as null, false or an empty list and
/// are dropped before the merge, so they never mask a config value.
pub fn resolve<F: Serialize, R: DeserializeOwned>(
    flags: &F,
    config: Option<&Path>,
) -> Result<R, Failure> {
    let mut merged = match config {
        Some(path) => {
            let text = crate::read(path)?;
            match serde_json::from_str(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => {
                    return Err(Failure::Input(format!(
                        "{}: config must be a JSON object",
                        path.display()
                    )))
                }
                Err(e) => return Err(Failure::Input(format!("{}: {e}", path.display()))),
            }
        }
        None => Map::new(),
    };
    let Value::Object(given) = serde_json::to_value(flags).expect("flags serialize") else {
        unreachable!("flag structs serialize as objects")
    };
    for (k, v) in given {
        let unset = match &v {
            Value::Null => true,
            Value::Bool(b) => !b,
            Value::Array(a) => a.is_empty(),
            _ => false,
        };
        if !unset {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| Failure::Input(format!("configuration: {e}")))
}
