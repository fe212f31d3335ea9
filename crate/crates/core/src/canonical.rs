//! Canonical serialization and the content hash.
//!
//! Canonical form: object keys sorted by code point, no insignificant
//! whitespace, numbers in shortest round-trip decimal form, every string (keys
//! included) in Unicode NFC. The hash is SHA-256 over the canonical bytes of the
//! document with `meta.hash` set to the empty string.

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use unicode_normalization::{is_nfc, UnicodeNormalization};

use crate::model::{is_reserved_block, TiltDocument};

fn nfc(s: &str) -> String {
    if is_nfc(s) {
        s.to_string()
    } else {
        s.nfc().collect()
    }
}

/// Recursively NFC-normalizes every string and object key.
pub fn normalize_value(value: Value) -> Value {
    match value {
        Value::String(s) => Value::String(nfc(&s)),
        Value::Array(items) => Value::Array(items.into_iter().map(normalize_value).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (nfc(&k), normalize_value(v))).collect::<Map<_, _>>())
        }
        other => other,
    }
}

/// The document as a normalized JSON tree, extensions merged in.
pub fn to_value(doc: &TiltDocument) -> Value {
    let mut value = serde_json::to_value(doc).expect("document serialization is infallible");
    if let Value::Object(map) = &mut value {
        for (k, v) in &doc.extensions {
            if !is_reserved_block(k) {
                map.insert(k.clone(), v.clone());
            }
        }
    }
    normalize_value(value)
}

/// Writes `value` in canonical form.
pub fn write_canonical(value: &Value, out: &mut Vec<u8>) {
    match value {
        Value::Null => out.extend_from_slice(b"null"),
        Value::Bool(true) => out.extend_from_slice(b"true"),
        Value::Bool(false) => out.extend_from_slice(b"false"),
        Value::Number(n) => out.extend_from_slice(n.to_string().as_bytes()),
        Value::String(s) => write_string(&nfc(s), out),
        Value::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_canonical(item, out);
            }
            out.push(b']');
        }
        Value::Object(map) => {
            let mut entries: Vec<(String, &Value)> = map.iter().map(|(k, v)| (nfc(k), v)).collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            out.push(b'{');
            for (i, (k, v)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_string(k, out);
                out.push(b':');
                write_canonical(v, out);
            }
            out.push(b'}');
        }
    }
}

fn write_string(s: &str, out: &mut Vec<u8>) {
    let quoted = serde_json::to_string(s).expect("string serialization is infallible");
    out.extend_from_slice(quoted.as_bytes());
}

/// Canonical bytes of an arbitrary JSON value.
pub fn canonical_bytes(value: &Value) -> Vec<u8> {
    let mut out = Vec::new();
    write_canonical(value, &mut out);
    out
}

/// Canonical UTF-8 bytes of a document.
pub fn serialize(doc: &TiltDocument) -> Vec<u8> {
    canonical_bytes(&to_value(doc))
}

/// The bytes the content hash is computed over.
pub fn hash_input(doc: &TiltDocument) -> Vec<u8> {
    let mut value = to_value(doc);
    if let Some(meta) = value.get_mut("meta").and_then(Value::as_object_mut) {
        meta.insert("hash".to_string(), Value::String(String::new()));
    }
    canonical_bytes(&value)
}

/// Lowercase hex SHA-256 of the document content, independent of the stored
/// `meta.hash`.
pub fn compute_hash(doc: &TiltDocument) -> String {
    hex::encode(Sha256::digest(hash_input(doc)))
}

/// Returns a copy of `doc` whose `meta.hash` is the computed content hash.
pub fn with_hash(mut doc: TiltDocument) -> TiltDocument {
    doc.meta.hash = compute_hash(&doc);
    doc
}
