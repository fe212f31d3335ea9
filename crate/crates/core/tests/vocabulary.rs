mod support;

use proptest::prelude::*;
use support::*;
use tilt_core::validate::{default_rules, Ruleset};
use tilt_core::vocab::*;
use tilt_core::{validate, PathPattern};

fn purposes_binding(allowed: &[&str], prohibited: &[&str]) -> VocabularyBinding {
    VocabularyBinding::new(
        "dataDisclosed[*].purposes[*].purpose".parse::<PathPattern>().unwrap(),
        Vocabulary::new("purposes", '/', allowed, prohibited).unwrap(),
    )
}

#[test]
fn golden_passes_strict_marketing_vocabulary() {
    let rules = attach_vocabulary(default_rules(), &purposes_binding(&["Marketing"], &[]), VocabMode::Strict);
    assert!(validate(&golden(), &rules).unwrap().valid);
}

#[test]
fn unknown_purpose_depends_on_mode() {
    let mut doc = golden();
    doc.data_disclosed[0].purposes[0].purpose = "Gambling".into();
    let binding = purposes_binding(&["Marketing"], &[]);
    let strict = validate(&doc, &attach_vocabulary(vec![], &binding, VocabMode::Strict)).unwrap();
    assert_eq!(strict.codes(), ["VOCAB_UNKNOWN"]);
    assert_eq!(strict.violations[0].path.to_string(), "dataDisclosed[0].purposes[0].purpose");
    let permissive = validate(&doc, &attach_vocabulary(vec![], &binding, VocabMode::Permissive)).unwrap();
    assert!(permissive.valid);
}

#[test]
fn prohibited_purpose_fails_both_modes() {
    let mut doc = golden();
    doc.data_disclosed[0].purposes[0].purpose = "Marketing/Profiling".into();
    let binding = purposes_binding(&["Marketing"], &["Marketing/Profiling"]);
    for mode in [VocabMode::Strict, VocabMode::Permissive] {
        let report = validate(&doc, &attach_vocabulary(vec![], &binding, mode)).unwrap();
        assert_eq!(report.codes(), ["VOCAB_PROHIBITED"]);
    }
}

#[test]
fn isolated_vocabulary_rules_report_only_vocabulary_codes() {
    let mut doc = golden();
    doc.meta.language = "DE".into();
    doc.data_disclosed[0].purposes[0].purpose = "Gambling".into();
    let report = validate(&doc, &attach_vocabulary(vec![], &purposes_binding(&[], &[]), VocabMode::Strict)).unwrap();
    assert!(report.codes().iter().all(|c| c.starts_with("VOCAB_")));
}

#[test]
fn non_string_field() {
    let binding = VocabularyBinding::new("meta.version".parse().unwrap(), Vocabulary::new("v", '/', ["1"], [""; 0]).unwrap());
    let report = validate(&golden(), &attach_vocabulary(vec![], &binding, VocabMode::Strict)).unwrap();
    assert_eq!(report.codes(), ["VOCAB_NOT_STRING"]);
}

#[test]
fn two_bindings_coexist() {
    let a = purposes_binding(&["Marketing"], &[]);
    let b = VocabularyBinding::new(
        "dataDisclosed[*].category".parse().unwrap(),
        Vocabulary::new("categories", '/', ["Contact data"], [""; 0]).unwrap(),
    );
    let rules = attach_vocabulary(attach_vocabulary(default_rules(), &a, VocabMode::Strict), &b, VocabMode::Strict);
    assert!(Ruleset::compile(rules.clone()).is_ok());
    assert_eq!(validate(&golden(), &rules).unwrap().codes(), ["VOCAB_UNKNOWN"]);
}

fn term() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 1..4).prop_map(|l| l.join("/"))
}

proptest! {
    #[test]
    fn allow_augmentation_is_monotone(
        allowed in prop::collection::btree_set(term(), 0..10),
        prohibited in prop::collection::btree_set(term(), 0..10),
        extra in term(),
        probe in term(),
    ) {
        let allowed: Vec<_> = allowed.difference(&prohibited).cloned().collect();
        let prohibited: Vec<_> = prohibited.into_iter().collect();
        let v = Vocabulary::new("p", '/', &allowed, &prohibited).unwrap();
        prop_assume!(!prohibited.contains(&extra));
        let mut more = allowed.clone();
        more.push(extra);
        let w = Vocabulary::new("p", '/', &more, &prohibited).unwrap();
        let (before, after) = (v.check_term(&probe), w.check_term(&probe));
        if before == TermStatus::Prohibited {
            prop_assert_eq!(after, TermStatus::Prohibited);
        }
        if before == TermStatus::Allowed {
            prop_assert_eq!(after, TermStatus::Allowed);
        }
    }

    #[test]
    fn entries_cover_themselves(allowed in prop::collection::btree_set(term(), 1..10)) {
        let allowed: Vec<_> = allowed.into_iter().collect();
        let v = Vocabulary::new("p", '/', &allowed, [""; 0]).unwrap();
        for t in &allowed {
            prop_assert_eq!(v.check_term(t), TermStatus::Allowed);
        }
    }
}
