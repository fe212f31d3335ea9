//! The default TILT ruleset.

use std::sync::LazyLock;

use serde_json::json;

use super::formats::*;
use super::{Check, Composite, Condition, Rule, Ruleset};
use crate::model::{AggregationFunction, Status, StorageKind};

/// Stable violation codes.
pub mod codes {
    pub const REQUIRED_FIELD: &str = "REQUIRED_FIELD";
    pub const LEGAL_BASIS_FORMAT: &str = "LEGAL_BASIS_FORMAT";
    pub const COUNTRY_FORMAT: &str = "COUNTRY_FORMAT";
    pub const LANGUAGE_FORMAT: &str = "LANGUAGE_FORMAT";
    pub const CURRENCY_FORMAT: &str = "CURRENCY_FORMAT";
    pub const EMAIL_FORMAT: &str = "EMAIL_FORMAT";
    pub const PHONE_FORMAT: &str = "PHONE_FORMAT";
    pub const URL_FORMAT: &str = "URL_FORMAT";
    pub const TIMESTAMP_FORMAT: &str = "TIMESTAMP_FORMAT";
    pub const DURATION_FORMAT: &str = "DURATION_FORMAT";
    pub const META_HASH: &str = "META_HASH";
    pub const META_STATUS: &str = "META_STATUS";
    pub const META_VERSION: &str = "META_VERSION";
    pub const META_TIMESTAMP_ORDER: &str = "META_TIMESTAMP_ORDER";
    pub const STORAGE_KIND: &str = "STORAGE_KIND";
    pub const STORAGE_AGGREGATION: &str = "STORAGE_AGGREGATION";
    pub const STORAGE_KIND_MISMATCH: &str = "STORAGE_KIND_MISMATCH";
    pub const STORAGE_ANY_OF: &str = "STORAGE_ANY_OF";
    pub const FEE_AMOUNT: &str = "FEE_AMOUNT";
    pub const DATA_DISCLOSED_ID_UNIQUE: &str = "DATA_DISCLOSED_ID_UNIQUE";
    pub const RECIPIENT_COUNTRY_REQUIRED: &str = "RECIPIENT_COUNTRY_REQUIRED";
    pub const LEGITIMATE_INTEREST_REASONING: &str = "LEGITIMATE_INTEREST_REASONING";
    pub const ADM_LOGIC_REQUIRED: &str = "ADM_LOGIC_REQUIRED";
    pub const ADM_SCOPE_REQUIRED: &str = "ADM_SCOPE_REQUIRED";
    pub const COMPLAINT_AUTHORITY_REQUIRED: &str = "COMPLAINT_AUTHORITY_REQUIRED";
    pub const EXTENSION_RESERVED: &str = "EXTENSION_RESERVED";
    /// Only produced by [`super::integrity_rules`].
    pub const META_HASH_MISMATCH: &str = "META_HASH_MISMATCH";
    pub const VOCAB_PROHIBITED: &str = "VOCAB_PROHIBITED";
    pub const VOCAB_UNKNOWN: &str = "VOCAB_UNKNOWN";
    pub const VOCAB_NOT_STRING: &str = "VOCAB_NOT_STRING";
    /// Reported for documents the parser rejects.
    pub const SYNTAX_ERROR: &str = "SYNTAX_ERROR";
    pub const TYPE_ERROR: &str = "TYPE_ERROR";
    pub const MISSING_BLOCK: &str = "MISSING_BLOCK";
}

use codes::*;

const RIGHTS: [&str; 5] = [
    "rightToInformation",
    "rightToRectificationOrDeletion",
    "rightToDataPortability",
    "rightToWithdrawConsent",
    "rightToComplain",
];

fn pattern(regex: &str, allow_empty: bool) -> Check {
    Check::Pattern { regex: regex.to_string(), allow_empty }
}

fn one_of(values: &[&str]) -> Check {
    Check::Enum { values: values.iter().map(|v| v.to_string()).collect() }
}

fn composite(check: Composite) -> Check {
    Check::Composite { check }
}

fn when_true(when: &str, then: &str) -> Check {
    Check::Conditional { when: when.into(), condition: Condition::Equals(json!(true)), then: then.into() }
}

fn owned(paths: impl IntoIterator<Item = String>) -> Vec<String> {
    paths.into_iter().collect()
}

/// Automated decision making, storage choice and legitimate-interest rules.
pub fn conditional_rules() -> Vec<Rule> {
    vec![
        Rule::new(ADM_LOGIC_REQUIRED, &["automatedDecisionMaking"], when_true("inUse", "logicInvolved")),
        Rule::new(ADM_SCOPE_REQUIRED, &["automatedDecisionMaking"], when_true("inUse", "scopeAndIntendedEffects")),
        Rule::new(STORAGE_KIND_MISMATCH, &["dataDisclosed[*].storage[*]"], composite(Composite::StorageKindAgreement)),
        Rule::new(STORAGE_ANY_OF, &["dataDisclosed[*].storage"], composite(Composite::StorageAnyOf)),
        Rule::new(
            LEGITIMATE_INTEREST_REASONING,
            &["dataDisclosed[*].legitimateInterests[*]"],
            when_true("exists", "reasoning"),
        ),
    ]
}

/// The full constraint set. Format rules skip empty strings; emptiness is
/// governed by `REQUIRED_FIELD` (legal-basis references excepted, which must
/// never be empty).
pub fn default_rules() -> Vec<Rule> {
    let mut rules = vec![
        Rule::new(
            REQUIRED_FIELD,
            &[
                "meta.id",
                "meta.name",
                "meta.created",
                "meta.modified",
                "meta.language",
                "meta.hash",
                "controller.name",
                "controller.country",
                "dataDisclosed[*].id",
                "dataDisclosed[*].category",
                "dataDisclosed[*].purposes",
                "dataDisclosed[*].purposes[*].purpose",
                "dataDisclosed[*].purposes[*].description",
                "dataDisclosed[*].legalBases",
                "dataDisclosed[*].recipients[*].category",
                "dataDisclosed[*].nonDisclosure.consequences",
                "thirdCountryTransfers[*].country",
                "sources[*].category",
                "sources[*].sources[*].description",
                "changesOfPurpose[*].changedAt",
                "changesOfPurpose[*].urlOfNewVersion",
            ],
            Check::Required,
        ),
        Rule::new(
            LEGAL_BASIS_FORMAT,
            &["dataDisclosed[*].legalBases[*].reference", "dataDisclosed[*].storage[*].legalBasisCondition"],
            pattern(LEGAL_BASIS_PATTERN, false),
        ),
        Rule::new(
            COUNTRY_FORMAT,
            &[
                "controller.country",
                "dataProtectionOfficer.country",
                "dataDisclosed[*].recipients[*].country",
                "thirdCountryTransfers[*].country",
                "rightToComplain.supervisoryAuthority.country",
            ],
            pattern(COUNTRY_PATTERN, true),
        ),
        Rule::new(LANGUAGE_FORMAT, &["meta.language"], pattern(LANGUAGE_PATTERN, true)),
        Rule::new(CURRENCY_FORMAT, &["accessAndDataPortability.administrativeFee.currency"], pattern(CURRENCY_PATTERN, true)),
        Rule {
            code: EMAIL_FORMAT.into(),
            paths: owned(
                ["controller.representative", "dataProtectionOfficer", "accessAndDataPortability", "rightToComplain.supervisoryAuthority"]
                    .into_iter()
                    .chain(RIGHTS)
                    .map(|p| format!("{p}.email")),
            ),
            check: pattern(EMAIL_PATTERN, true),
        },
        Rule::new(
            PHONE_FORMAT,
            &["controller.representative.phone", "dataProtectionOfficer.phone", "rightToComplain.supervisoryAuthority.phone"],
            composite(Composite::Phone),
        ),
        Rule {
            code: URL_FORMAT.into(),
            paths: owned(
                ["meta", "accessAndDataPortability"]
                    .into_iter()
                    .chain(RIGHTS)
                    .map(|p| format!("{p}.url"))
                    .chain(["sources[*].sources[*].url".to_string(), "changesOfPurpose[*].urlOfNewVersion".to_string()]),
            ),
            check: composite(Composite::HttpUrl),
        },
        Rule::new(
            TIMESTAMP_FORMAT,
            &["meta.created", "meta.modified", "changesOfPurpose[*].changedAt", "dataDisclosed[*].storage[*].start"],
            composite(Composite::Timestamp),
        ),
        Rule::new(DURATION_FORMAT, &["dataDisclosed[*].storage[*].ttl"], composite(Composite::Duration)),
        Rule::new(META_HASH, &["meta.hash"], pattern(HASH_PATTERN, true)),
        Rule::new(META_STATUS, &["meta.status"], one_of(Status::VALUES)),
        Rule::new(META_VERSION, &["meta.version"], composite(Composite::PositiveInteger)),
        Rule::new(
            META_TIMESTAMP_ORDER,
            &["meta"],
            composite(Composite::TimestampOrder { earlier: "created".into(), later: "modified".into() }),
        ),
        Rule::new(STORAGE_KIND, &["dataDisclosed[*].storage[*].kind"], one_of(StorageKind::VALUES)),
        Rule::new(
            STORAGE_AGGREGATION,
            &["dataDisclosed[*].storage[*].aggregationFunction"],
            one_of(AggregationFunction::VALUES),
        ),
        Rule::new(FEE_AMOUNT, &["accessAndDataPortability.administrativeFee.amount"], composite(Composite::NonNegativeNumber)),
        Rule::new(DATA_DISCLOSED_ID_UNIQUE, &["dataDisclosed"], composite(Composite::UniqueIds)),
        Rule::new(
            RECIPIENT_COUNTRY_REQUIRED,
            &["dataDisclosed[*].recipients[*]"],
            Check::Conditional { when: "name".into(), condition: Condition::Present, then: "country".into() },
        ),
        Rule::new(COMPLAINT_AUTHORITY_REQUIRED, &["rightToComplain"], when_true("available", "supervisoryAuthority.name")),
        Rule::new(EXTENSION_RESERVED, &[""], composite(Composite::ReservedExtensions)),
    ];
    rules.extend(conditional_rules());
    rules
}

/// Opt-in check that `meta.hash` matches the content.
pub fn integrity_rules() -> Vec<Rule> {
    vec![Rule::new(META_HASH_MISMATCH, &[""], composite(Composite::HashIntegrity))]
}

static DEFAULT: LazyLock<Ruleset> =
    LazyLock::new(|| Ruleset::compile(default_rules()).expect("default rules compile"));

pub fn default_ruleset() -> &'static Ruleset {
    &DEFAULT
}
