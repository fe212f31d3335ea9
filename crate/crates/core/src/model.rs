//! Typed TILT document model.
//!
//! Field names on the wire are exactly the lowerCamelCase names used here.
//! Format-bearing strings (timestamps, e-mail addresses, URLs, country and
//! language codes) are kept as strings so the validator can report every
//! malformed value instead of the parser stopping at the first one.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

/// Top-level building blocks. Every one is required; other top-level keys are
/// extensions.
pub const BLOCK_NAMES: [&str; 14] = [
    "meta",
    "controller",
    "dataProtectionOfficer",
    "dataDisclosed",
    "thirdCountryTransfers",
    "accessAndDataPortability",
    "sources",
    "rightToInformation",
    "rightToRectificationOrDeletion",
    "rightToDataPortability",
    "rightToWithdrawConsent",
    "rightToComplain",
    "automatedDecisionMaking",
    "changesOfPurpose",
];

pub fn is_reserved_block(name: &str) -> bool {
    BLOCK_NAMES.contains(&name)
}

/// Declares a string-backed enumeration that keeps unrecognised values so the
/// validator can report them.
macro_rules! string_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant,)+
            /// A value outside the enumeration, preserved verbatim.
            Other(String),
        }

        impl $name {
            pub const VALUES: &'static [&'static str] = &[$($text),+];

            pub fn as_str(&self) -> &str {
                match self {
                    $(Self::$variant => $text,)+
                    Self::Other(s) => s,
                }
            }

            pub fn is_known(&self) -> bool {
                !matches!(self, Self::Other(_))
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                match s {
                    $($text => Self::$variant,)+
                    other => Self::Other(other.to_string()),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                Ok(Self::from(s.as_str()))
            }
        }
    };
}

string_enum!(
    /// Lifecycle status of a document.
    Status { Active => "active", Inactive => "inactive" }
);

string_enum!(
    /// Which storage-period modality a [`StorageSpec`] expresses.
    StorageKind {
        Temporal => "temporal",
        PurposeConditional => "purposeConditional",
        LegalBasisConditional => "legalBasisConditional",
    }
);

string_enum!(
    /// How several storage periods combine.
    AggregationFunction { Min => "min", Max => "max", Sum => "sum", Avg => "avg" }
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Meta {
    pub id: String,
    pub name: String,
    pub created: String,
    pub modified: String,
    pub version: u64,
    pub language: String,
    pub status: Status,
    pub url: String,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Controller {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub division: Option<String>,
    pub address: String,
    pub country: String,
    pub representative: Representative,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Representative {
    pub name: String,
    pub email: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phone: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DataProtectionOfficer {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub address: String,
    pub country: String,
    pub email: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phone: Option<String>,
}

/// One category of personal data and everything disclosed about it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DataDisclosedEntry {
    pub id: String,
    pub category: String,
    #[serde(default)]
    pub purposes: Vec<Purpose>,
    #[serde(default)]
    pub legal_bases: Vec<LegalBasis>,
    #[serde(default)]
    pub legitimate_interests: Vec<LegitimateInterest>,
    #[serde(default)]
    pub recipients: Vec<Recipient>,
    #[serde(default)]
    pub storage: Vec<StorageSpec>,
    pub non_disclosure: NonDisclosure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Purpose {
    pub purpose: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LegalBasis {
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LegitimateInterest {
    pub exists: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
}

/// A recipient is described like a controller where possible, otherwise by
/// category only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Recipient {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub division: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
    pub category: String,
}

/// Storage period or criterion. Exactly the field belonging to `kind` should
/// be populated; `start` optionally anchors a temporal period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StorageSpec {
    pub kind: StorageKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ttl: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose_condition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub legal_basis_condition: Option<String>,
    pub aggregation_function: AggregationFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NonDisclosure {
    pub legal_requirement: bool,
    pub contractual_regulation: bool,
    pub obligation_to_provide: bool,
    pub consequences: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ThirdCountryTransfer {
    pub country: String,
    pub adequacy_decision: FlaggedStatement,
    pub appropriate_guarantees: FlaggedStatement,
    pub presentable_rights: FlaggedStatement,
    pub standard_data_protection_clause: FlaggedStatement,
}

/// A yes/no decision with optional free-text explanation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FlaggedStatement {
    pub value: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AccessAndDataPortability {
    pub available: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    #[serde(default)]
    pub identification_evidences: Vec<String>,
    pub administrative_fee: Fee,
    #[serde(default)]
    pub data_formats: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Fee {
    pub amount: f64,
    pub currency: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SourceEntry {
    pub category: String,
    #[serde(default)]
    pub sources: Vec<Source>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Source {
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    pub publicly_available: bool,
}

/// Shared shape of the data-subject rights blocks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RightBlock {
    pub available: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    #[serde(default)]
    pub identification_evidences: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RightToComplain {
    pub available: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    #[serde(default)]
    pub identification_evidences: Vec<String>,
    pub supervisory_authority: SupervisoryAuthority,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SupervisoryAuthority {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phone: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AutomatedDecisionMaking {
    pub in_use: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logic_involved: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope_and_intended_effects: Option<String>,
}

/// Notification that the document was superseded; `url_of_new_version` links
/// documents into a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ChangeOfPurpose {
    #[serde(default)]
    pub affected_categories: Vec<String>,
    pub changed_at: String,
    pub url_of_new_version: String,
}

/// One controller's complete transparency information.
///
/// `extensions` holds additional top-level properties. It is not part of the
/// derived serde representation; [`crate::parse`] and
/// [`crate::canonical::to_value`] merge it in, and keys naming a building
/// block are never emitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TiltDocument {
    pub meta: Meta,
    pub controller: Controller,
    pub data_protection_officer: DataProtectionOfficer,
    pub data_disclosed: Vec<DataDisclosedEntry>,
    pub third_country_transfers: Vec<ThirdCountryTransfer>,
    pub access_and_data_portability: AccessAndDataPortability,
    pub sources: Vec<SourceEntry>,
    pub right_to_information: RightBlock,
    pub right_to_rectification_or_deletion: RightBlock,
    pub right_to_data_portability: RightBlock,
    pub right_to_withdraw_consent: RightBlock,
    pub right_to_complain: RightToComplain,
    pub automated_decision_making: AutomatedDecisionMaking,
    pub changes_of_purpose: Vec<ChangeOfPurpose>,
    #[serde(skip)]
    pub extensions: BTreeMap<String, Value>,
}
