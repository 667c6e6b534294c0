//! External black-box evaluator: one child process per point.

use std::io::Write;
use std::process::{Command, Stdio};

use mixgp::design_space::{DesignSpace, MixedPoint, Slot};
use serde_json::{Map, Value};

/// Point as a JSON object keyed by variable name; categoricals use their labels.
pub fn point_json(space: &DesignSpace, w: &MixedPoint) -> Value {
    let mut obj = Map::new();
    for (var, slot) in space.variables().iter().zip(space.slots()) {
        let v = match *slot {
            Slot::Continuous(i) => Value::from(w.x[i]),
            Slot::Integer(i) => Value::from(w.z[i]),
            Slot::Categorical(i) => Value::from(space.level_label(i, w.c[i]).unwrap_or_default()),
        };
        obj.insert(var.name.clone(), v);
    }
    Value::Object(obj)
}

/// Runs `command` through `sh -c`. A nonzero exit, unreadable output or a
/// missing `y` is a failed evaluation.
pub fn evaluate(command: &str, space: &DesignSpace, w: &MixedPoint) -> Result<f64, String> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| format!("cannot start evaluator: {e}"))?;
    let input = point_json(space, w).to_string();
    if let Some(mut stdin) = child.stdin.take() {
        // The child may exit without reading its input.
        let _ = stdin.write_all(input.as_bytes());
    }
    let out = child
        .wait_with_output()
        .map_err(|e| format!("evaluator did not finish: {e}"))?;
    if !out.status.success() {
        let stderr = String::from_utf8_lossy(&out.stderr);
        return Err(format!("evaluator exited with {}: {}", out.status, stderr.trim()));
    }
    let reply: Value = serde_json::from_slice(&out.stdout)
        .map_err(|e| format!("evaluator output is not JSON: {e}"))?;
    reply
        .get("y")
        .and_then(Value::as_f64)
        .ok_or_else(|| "evaluator output has no numeric \"y\"".to_string())
}
