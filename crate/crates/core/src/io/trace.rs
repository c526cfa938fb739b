//! Drift traces as JSON lines, one pose event per line.

use std::path::Path;

use crate::drift::PoseEvent;
use crate::error::{Error, Result};

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<PoseEvent>> {
    parse_trace(&std::fs::read_to_string(path)?)
}

pub fn parse_trace(text: &str) -> Result<Vec<PoseEvent>> {
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let event: PoseEvent =
            serde_json::from_str(line).map_err(|e| Error::parse(i + 1, e.column(), e.to_string()))?;
        events.push(event);
    }
    Ok(events)
}

pub fn trace_to_string(events: &[PoseEvent]) -> String {
    events
        .iter()
        .map(|e| serde_json::to_string(e).expect("serializable") + "\n")
        .collect()
}

pub fn write_trace_file(events: &[PoseEvent], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, trace_to_string(events))?;
    Ok(())
}
