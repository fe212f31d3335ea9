use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use tilt_core::diff::diff_values;
use tilt_core::ChangeSet;

/// Emitted once per stored version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChangeEvent {
    pub document_id: String,
    pub from_version: Option<u64>,
    pub to_version: u64,
    pub changes: ChangeSet,
    pub emitted_at: String,
}

impl ChangeEvent {
    pub fn is_initial(&self) -> bool {
        self.from_version.is_none()
    }
}

/// Drops the fields the hub assigns itself.
fn without_server_fields(mut value: Value) -> Value {
    if let Some(meta) = value.get_mut("meta").and_then(Value::as_object_mut) {
        meta.remove("version");
        meta.remove("hash");
    }
    value
}

/// Differences between two stored bodies, ignoring `meta.version` and
/// `meta.hash`. With no previous body every top-level member is added.
pub fn changes_between(previous: Option<&Value>, current: &Value) -> ChangeSet {
    let empty = Value::Object(Map::new());
    let before = without_server_fields(previous.cloned().unwrap_or(empty));
    diff_values(&before, &without_server_fields(current.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn server_fields_are_ignored() {
        let a = json!({"meta": {"version": 1, "hash": "a", "name": "x"}});
        let b = json!({"meta": {"version": 2, "hash": "b", "name": "x"}});
        assert!(changes_between(Some(&a), &b).is_empty());
        let c = json!({"meta": {"version": 3, "hash": "c", "name": "y"}});
        assert_eq!(changes_between(Some(&a), &c).changed.len(), 1);
    }

    #[test]
    fn initial_event_adds_everything() {
        let doc = json!({"meta": {"version": 1}, "controller": {}});
        let cs = changes_between(None, &doc);
        assert_eq!(cs.added.len(), 2);
    }
}
