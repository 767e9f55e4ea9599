//! Configuration files: a JSON object whose scalar top-level keys apply to
//! every command that has a parameter of that name, and whose object-valued
//! keys are per-command sections. Config values override flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Failure;

pub fn load(path: Option<&Path>) -> Result<Option<Value>, Failure> {
    let Some(path) = path else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?;
    if !value.is_object() {
        return Err(Failure::Usage("config must be a JSON object".into()));
    }
    Ok(Some(value))
}

/// Overlays the config onto parsed flags. Unknown keys inside the command's
/// section are rejected; unknown top-level keys are ignored because they may
/// belong to another command.
pub fn apply<T: Serialize + DeserializeOwned>(args: T, config: Option<&Value>, section: &str) -> Result<T, Failure> {
    let Some(Value::Object(config)) = config else {
        return Ok(args);
    };
    let mut fields = match serde_json::to_value(&args)? {
        Value::Object(m) => m,
        _ => unreachable!("argument structs serialize to objects"),
    };
    for (key, value) in config {
        if !value.is_object() && fields.contains_key(key) {
            fields.insert(key.clone(), value.clone());
        }
    }
    if let Some(sec) = config.get(section) {
        let Value::Object(sec) = sec else {
            return Err(Failure::Usage(format!("config section {section:?} must be an object")));
        };
        overlay(&mut fields, sec, section)?;
    }
    serde_json::from_value(Value::Object(fields))
        .map_err(|e| Failure::Usage(format!("invalid config value: {e}")))
}

fn overlay(fields: &mut Map<String, Value>, section: &Map<String, Value>, name: &str) -> Result<(), Failure> {
    for (key, value) in section {
        if !fields.contains_key(key) {
            return Err(Failure::Usage(format!("unknown key {key:?} in config section {name:?}")));
        }
        fields.insert(key.clone(), value.clone());
    }
    Ok(())
}
