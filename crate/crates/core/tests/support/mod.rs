#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};
use tilt_core::model::*;
use tilt_core::TiltDocument;

pub const GOLDEN: &str = include_str!("../fixtures/golden.json");

pub fn golden_value() -> Value {
    serde_json::from_str(GOLDEN).unwrap()
}

pub fn golden() -> TiltDocument {
    tilt_core::parse(GOLDEN.as_bytes()).unwrap()
}

/// Mutable handle on a nested JSON member, addressed by a dotted path with
/// numeric segments for array indices.
pub fn at<'a>(value: &'a mut Value, path: &str) -> &'a mut Value {
    path.split('.').fold(value, |v, seg| match seg.parse::<usize>() {
        Ok(i) => &mut v[i],
        Err(_) => &mut v[seg],
    })
}

pub fn remove(value: &mut Value, path: &str) {
    let (parent, key) = path.rsplit_once('.').unwrap();
    at(value, parent).as_object_mut().unwrap().remove(key);
}

/// Serializes `value` with object members in a random order.
pub fn shuffled_text(value: &Value, rng: &mut impl Rng) -> String {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<_> = map.iter().collect();
            entries.shuffle(rng);
            let body: Vec<String> = entries
                .into_iter()
                .map(|(k, v)| format!("{}: {}", Value::String(k.clone()), shuffled_text(v, rng)))
                .collect();
            format!("{{ {} }}", body.join(", "))
        }
        Value::Array(items) => {
            let body: Vec<String> = items.iter().map(|v| shuffled_text(v, rng)).collect();
            format!("[{}]", body.join(", "))
        }
        scalar => scalar.to_string(),
    }
}

pub const NAMES: [&str; 8] = ["Org A", "Org B", "Org C", "Org D", "Org E", "Org F", "Org G", "Org H"];
pub const COUNTRIES: [&str; 2] = ["DE", "FR"];

/// Spelling variant of `name` that entity resolution must merge.
pub fn respell(name: &str, rng: &mut impl Rng) -> String {
    match rng.gen_range(0..3) {
        0 => name.to_string(),
        1 => name.to_uppercase(),
        _ => format!("  {}", name.replace(' ', "   ")),
    }
}

/// Small synthetic document: controller and named recipients drawn from a
/// shared pool so that documents link up.
pub fn synthetic(index: usize, rng: &mut impl Rng) -> TiltDocument {
    let mut doc = golden();
    doc.meta.id = format!("doc-{index}");
    doc.meta.url = format!("https://example.org/policy/{index}");
    doc.changes_of_purpose.clear();
    doc.third_country_transfers.clear();
    doc.controller.name = respell(NAMES.choose(rng).unwrap(), rng);
    doc.controller.country = COUNTRIES.choose(rng).unwrap().to_string();
    let template = doc.data_disclosed[0].clone();
    doc.data_disclosed = (0..rng.gen_range(0..3))
        .map(|e| {
            let mut entry = template.clone();
            entry.id = format!("dd-{e}");
            entry.category = ["E-mail address", "Postal address", "IP address"].choose(rng).unwrap().to_string();
            entry.recipients = (0..rng.gen_range(0..3))
                .map(|_| {
                    if rng.gen_bool(0.25) {
                        Recipient {
                            name: None,
                            division: None,
                            address: None,
                            country: None,
                            category: "Payment providers".into(),
                        }
                    } else {
                        Recipient {
                            name: Some(respell(NAMES.choose(rng).unwrap(), rng)),
                            division: None,
                            address: None,
                            country: Some(COUNTRIES.choose(rng).unwrap().to_string()),
                            category: "Affiliates".into(),
                        }
                    }
                })
                .collect();
            entry
        })
        .collect();
    doc
}

pub fn change_to(url: &str) -> ChangeOfPurpose {
    ChangeOfPurpose {
        affected_categories: vec![],
        changed_at: "2020-06-04T15:04:13+00:00".into(),
        url_of_new_version: url.into(),
    }
}

pub fn third_country(country: &str) -> Value {
    json!({
        "country": country,
        "adequacyDecision": {"value": false},
        "appropriateGuarantees": {"value": false},
        "presentableRights": {"value": false},
        "standardDataProtectionClause": {"value": false}
    })
}
