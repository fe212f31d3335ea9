//! Structural diff between documents and its inverse, [`apply`].
//!
//! Objects are compared key by key. Arrays are compared by position, except
//! the top-level lists in [`ID_MATCHED_LISTS`]: when every element carries a
//! unique string `id` and the common elements keep their relative order (new
//! elements appended), elements are matched by id and addressed as
//! `list[id="…"]`. Otherwise positional matching is used, which always
//! round-trips.
//!
//! The order of entries inside a [`ChangeSet`] is significant for [`apply`]:
//! removals are undone last-to-first, additions are replayed in order.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::to_value;
use crate::document::{from_value, ParseError};
use crate::model::TiltDocument;
use crate::path::{element_id, Path, Segment};

pub const ID_MATCHED_LISTS: [&str; 4] = ["dataDisclosed", "thirdCountryTransfers", "sources", "changesOfPurpose"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Added {
    pub path: Path,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removed {
    pub path: Path,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Changed {
    pub path: Path,
    pub old_value: Value,
    pub new_value: Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChangeSet {
    pub added: Vec<Added>,
    pub removed: Vec<Removed>,
    pub changed: Vec<Changed>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.changed.is_empty()
    }

    pub fn len(&self) -> usize {
        self.added.len() + self.removed.len() + self.changed.len()
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.added
            .iter()
            .map(|a| &a.path)
            .chain(self.removed.iter().map(|r| &r.path))
            .chain(self.changed.iter().map(|c| &c.path))
    }

    /// True when some entry lies at or below `prefix`.
    pub fn touches(&self, prefix: &Path) -> bool {
        self.paths().any(|p| p.starts_with(prefix))
    }

    /// The entries at or below `prefix`, order preserved.
    pub fn restricted_to(&self, prefix: &Path) -> ChangeSet {
        ChangeSet {
            added: self.added.iter().filter(|a| a.path.starts_with(prefix)).cloned().collect(),
            removed: self.removed.iter().filter(|r| r.path.starts_with(prefix)).cloned().collect(),
            changed: self.changed.iter().filter(|c| c.path.starts_with(prefix)).cloned().collect(),
        }
    }
}

/// Differences turning `a` into `b`; empty exactly when both are canonically
/// equal.
pub fn diff(a: &TiltDocument, b: &TiltDocument) -> ChangeSet {
    diff_values(&to_value(a), &to_value(b))
}

/// [`diff`] over JSON trees already in normalized form.
pub fn diff_values(a: &Value, b: &Value) -> ChangeSet {
    let mut out = ChangeSet::default();
    walk(a, b, &Path::root(), &mut out);
    out
}

fn is_id_matched(at: &Path) -> bool {
    matches!(at.segments(), [Segment::Key(k)] if ID_MATCHED_LISTS.contains(&k.as_str()))
}

fn walk(a: &Value, b: &Value, at: &Path, out: &mut ChangeSet) {
    if a == b {
        return;
    }
    match (a, b) {
        (Value::Object(ma), Value::Object(mb)) => {
            for (k, va) in ma {
                match mb.get(k) {
                    Some(vb) => walk(va, vb, &at.key(k.clone()), out),
                    None => out.removed.push(Removed { path: at.key(k.clone()), value: va.clone() }),
                }
            }
            for (k, vb) in mb {
                if !ma.contains_key(k) {
                    out.added.push(Added { path: at.key(k.clone()), value: vb.clone() });
                }
            }
        }
        (Value::Array(xa), Value::Array(xb)) => {
            if is_id_matched(at) && walk_by_id(xa, xb, at, out) {
                return;
            }
            for (i, (va, vb)) in xa.iter().zip(xb).enumerate() {
                walk(va, vb, &at.index(i), out);
            }
            for (i, va) in xa.iter().enumerate().skip(xb.len()) {
                out.removed.push(Removed { path: at.index(i), value: va.clone() });
            }
            for (i, vb) in xb.iter().enumerate().skip(xa.len()) {
                out.added.push(Added { path: at.index(i), value: vb.clone() });
            }
        }
        _ => out.changed.push(Changed { path: at.clone(), old_value: a.clone(), new_value: b.clone() }),
    }
}

fn unique_ids(items: &[Value]) -> Option<Vec<&String>> {
    let ids: Option<Vec<&String>> = items.iter().map(element_id).collect();
    let ids = ids?;
    let mut sorted = ids.clone();
    sorted.sort();
    sorted.dedup();
    (sorted.len() == ids.len()).then_some(ids)
}

/// Id-based matching; returns false (emitting nothing) when its
/// preconditions do not hold.
fn walk_by_id(xa: &[Value], xb: &[Value], at: &Path, out: &mut ChangeSet) -> bool {
    let (Some(ids_a), Some(ids_b)) = (unique_ids(xa), unique_ids(xb)) else {
        return false;
    };
    let common_in_a: Vec<&String> = ids_a.iter().copied().filter(|id| ids_b.contains(id)).collect();
    let common_in_b: Vec<&String> = ids_b.iter().copied().filter(|id| ids_a.contains(id)).collect();
    if common_in_a != common_in_b || ids_b[..common_in_b.len()] != common_in_b[..] {
        return false;
    }
    for (va, id) in xa.iter().zip(&ids_a) {
        match ids_b.iter().position(|other| other == id) {
            Some(j) => walk(va, &xb[j], &at.id((*id).clone()), out),
            None => out.removed.push(Removed { path: at.id((*id).clone()), value: va.clone() }),
        }
    }
    for (vb, id) in xb.iter().zip(&ids_b).skip(common_in_b.len()) {
        out.added.push(Added { path: at.id((*id).clone()), value: vb.clone() });
    }
    true
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ApplyError {
    #[error("path {0} does not exist")]
    MissingPath(Path),
    #[error("value at {0} differs from the recorded old value")]
    Conflict(Path),
    #[error("cannot apply change at {0}")]
    InvalidTarget(Path),
    #[error(transparent)]
    Document(#[from] ParseError),
}

fn lookup_mut<'a>(root: &'a mut Value, path: &Path) -> Option<&'a mut Value> {
    let mut current = root;
    for segment in path.segments() {
        current = match (segment, current) {
            (Segment::Key(k), Value::Object(map)) => map.get_mut(k)?,
            (Segment::Index(i), Value::Array(items)) => items.get_mut(*i)?,
            (Segment::Id(id), Value::Array(items)) => items.iter_mut().find(|item| element_id(item) == Some(id))?,
            _ => return None,
        };
    }
    Some(current)
}

/// Applies `changes` to a JSON tree.
pub fn apply_value(base: &Value, changes: &ChangeSet) -> Result<Value, ApplyError> {
    let mut root = base.clone();
    for removal in changes.removed.iter().rev() {
        let path = &removal.path;
        let parent_path = path.parent().ok_or_else(|| ApplyError::InvalidTarget(path.clone()))?;
        let parent = lookup_mut(&mut root, &parent_path).ok_or_else(|| ApplyError::MissingPath(parent_path.clone()))?;
        let removed = match (path.last(), parent) {
            (Some(Segment::Key(k)), Value::Object(map)) => map.remove(k),
            (Some(Segment::Index(i)), Value::Array(items)) if *i < items.len() => Some(items.remove(*i)),
            (Some(Segment::Id(id)), Value::Array(items)) => {
                items.iter().position(|item| element_id(item) == Some(id)).map(|pos| items.remove(pos))
            }
            _ => None,
        };
        match removed {
            Some(v) if v == removal.value => {}
            Some(_) => return Err(ApplyError::Conflict(path.clone())),
            None => return Err(ApplyError::MissingPath(path.clone())),
        }
    }
    for change in &changes.changed {
        let target = lookup_mut(&mut root, &change.path).ok_or_else(|| ApplyError::MissingPath(change.path.clone()))?;
        if *target != change.old_value {
            return Err(ApplyError::Conflict(change.path.clone()));
        }
        *target = change.new_value.clone();
    }
    for addition in &changes.added {
        let path = &addition.path;
        let parent_path = path.parent().ok_or_else(|| ApplyError::InvalidTarget(path.clone()))?;
        let parent = lookup_mut(&mut root, &parent_path).ok_or_else(|| ApplyError::MissingPath(parent_path.clone()))?;
        match (path.last(), parent) {
            (Some(Segment::Key(k)), Value::Object(map)) if !map.contains_key(k) => {
                map.insert(k.clone(), addition.value.clone());
            }
            (Some(Segment::Index(i)), Value::Array(items)) if *i == items.len() => items.push(addition.value.clone()),
            (Some(Segment::Id(id)), Value::Array(items))
                if element_id(&addition.value) == Some(id) && !items.iter().any(|item| element_id(item) == Some(id)) =>
            {
                items.push(addition.value.clone())
            }
            _ => return Err(ApplyError::InvalidTarget(path.clone())),
        }
    }
    Ok(root)
}

/// Applies `changes` to a document, producing a new document.
pub fn apply(doc: &TiltDocument, changes: &ChangeSet) -> Result<TiltDocument, ApplyError> {
    Ok(from_value(apply_value(&to_value(doc), changes)?)?)
}
