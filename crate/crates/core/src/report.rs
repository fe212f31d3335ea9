//! Short, human-oriented summary of a document.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::model::TiltDocument;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Contact {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub email: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phone: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub controller: String,
    pub country: String,
    pub data_categories: Vec<String>,
    pub recipients: Vec<String>,
    pub third_country_transfers: usize,
    pub third_countries: Vec<String>,
    pub automated_decision_making: bool,
    pub data_protection_officer: Contact,
}

/// Distinct data categories and recipients (by name, else category) are
/// counted; every third-country transfer entry is counted.
pub fn summarize(doc: &TiltDocument) -> Summary {
    let categories: BTreeSet<String> = doc.data_disclosed.iter().map(|e| e.category.clone()).collect();
    let recipients: BTreeSet<String> = doc
        .data_disclosed
        .iter()
        .flat_map(|e| &e.recipients)
        .map(|r| r.name.clone().filter(|n| !n.trim().is_empty()).unwrap_or_else(|| r.category.clone()))
        .collect();
    let countries: BTreeSet<String> = doc.third_country_transfers.iter().map(|t| t.country.clone()).collect();
    let dpo = &doc.data_protection_officer;
    Summary {
        controller: doc.controller.name.clone(),
        country: doc.controller.country.clone(),
        data_categories: categories.into_iter().collect(),
        recipients: recipients.into_iter().collect(),
        third_country_transfers: doc.third_country_transfers.len(),
        third_countries: countries.into_iter().collect(),
        automated_decision_making: doc.automated_decision_making.in_use,
        data_protection_officer: Contact { name: dpo.name.clone(), email: dpo.email.clone(), phone: dpo.phone.clone() },
    }
}

fn counted(f: &mut fmt::Formatter<'_>, label: &str, count: usize, items: &[String]) -> fmt::Result {
    if items.is_empty() {
        writeln!(f, "{label}: {count}")
    } else {
        writeln!(f, "{label}: {count} ({})", items.join(", "))
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "controller: {} ({})", self.controller, self.country)?;
        counted(f, "data categories", self.data_categories.len(), &self.data_categories)?;
        counted(f, "recipients", self.recipients.len(), &self.recipients)?;
        counted(f, "third country transfers", self.third_country_transfers, &self.third_countries)?;
        writeln!(f, "automated decision making: {}", if self.automated_decision_making { "yes" } else { "no" })?;
        let dpo = &self.data_protection_officer;
        write!(f, "data protection officer: ")?;
        if let Some(name) = &dpo.name {
            write!(f, "{name} ")?;
        }
        write!(f, "<{}>", dpo.email)?;
        if let Some(phone) = &dpo.phone {
            write!(f, ", {phone}")?;
        }
        writeln!(f)
    }
}
