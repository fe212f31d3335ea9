#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

pub const GOLDEN: &str = include_str!("../../../core/tests/fixtures/golden.json");

pub fn golden() -> Value {
    serde_json::from_str(GOLDEN).unwrap()
}

pub fn tilt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tilt")).args(args).env_remove("TILT_HUB_ADDR").env_remove("TILT_HUB_DATA").output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Input files shared by the command tests.
pub struct Fixtures {
    pub dir: tempfile::TempDir,
}

impl Fixtures {
    pub fn new() -> Fixtures {
        let dir = tempfile::tempdir().unwrap();
        let f = Fixtures { dir };
        f.write("golden.json", &golden());

        let mut ccpa = golden();
        ccpa["dataDisclosed"][0]["legalBases"][0]["reference"] = json!("CCPA 1798");
        f.write("ccpa.json", &ccpa);

        let mut changed = golden();
        changed["thirdCountryTransfers"].as_array_mut().unwrap().push(json!({
            "country": "IN",
            "adequacyDecision": {"value": false},
            "appropriateGuarantees": {"value": true},
            "presentableRights": {"value": true},
            "standardDataProtectionClause": {"value": true}
        }));
        f.write("changed.json", &changed);

        let mut missing = golden();
        missing.as_object_mut().unwrap().remove("controller");
        f.write("missing.json", &missing);
        std::fs::write(f.path("broken.json"), "{\"meta\": ").unwrap();

        f.write("vocab.json", &json!({"name": "purposes", "allowed": ["Marketing"], "prohibited": ["Marketing/Gambling"]}));

        std::fs::create_dir(f.path("corpus")).unwrap();
        f.write("corpus/a.json", &golden());
        let mut partner = golden();
        partner["meta"]["id"] = json!("9b1c0c1e-7f55-4f4e-8f0a-2d3b4c5d6e7f");
        partner["controller"]["name"] = json!("GreenComp");
        partner["controller"]["country"] = json!("US");
        partner["dataDisclosed"][0]["recipients"] = json!([{"category": "Hosting providers"}]);
        f.write("corpus/b.json", &partner);
        std::fs::create_dir(f.path("bad-corpus")).unwrap();
        f.write("bad-corpus/a.json", &golden());
        std::fs::write(f.path("bad-corpus/b.json"), "[]").unwrap();
        f
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    pub fn write(&self, name: &str, v: &Value) {
        std::fs::write(self.path(name), serde_json::to_vec_pretty(v).unwrap()).unwrap();
    }
}

/// Writes a log the hub refuses to load: version 2 without version 1.
pub fn corrupt_data_dir(root: &Path) {
    let docs = root.join("documents");
    std::fs::create_dir_all(&docs).unwrap();
    let record = json!({"documentId": "x", "version": 2, "storedAt": "2020-01-01T00:00:00Z", "hash": "00", "body": {}});
    std::fs::write(docs.join("x.jsonl"), format!("{record}\n")).unwrap();
}
