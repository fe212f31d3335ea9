//! Field-format predicates shared by the default ruleset and the CLI.

use std::sync::LazyLock;

use chrono::{DateTime, FixedOffset};
use regex::Regex;

/// Legal-basis reference grammar: uppercase law abbreviation followed by
/// hyphenated numbers and lowercase letters (`GDPR-6-1-a`).
pub const LEGAL_BASIS_PATTERN: &str = r"^[A-Z]*([-]?[0-9]*|[a-z]*)*$";
pub const COUNTRY_PATTERN: &str = r"^[A-Z]{2}$";
pub const LANGUAGE_PATTERN: &str = r"^[a-z]{2}$";
pub const CURRENCY_PATTERN: &str = r"^[A-Z]{3}$";
pub const HASH_PATTERN: &str = r"^[0-9a-f]{64}$";
/// One `@`, non-empty local part, dotted domain.
pub const EMAIL_PATTERN: &str = r"^[^@\s]+@[^@\s.]+(\.[^@\s.]+)+$";

static LEGAL_BASIS: LazyLock<Regex> = LazyLock::new(|| Regex::new(LEGAL_BASIS_PATTERN).unwrap());
static EMAIL: LazyLock<Regex> = LazyLock::new(|| Regex::new(EMAIL_PATTERN).unwrap());
static TIMESTAMP: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:?\d{2})$").unwrap()
});
static DURATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^P(\d+Y)?(\d+M)?(\d+W)?(\d+D)?(T(\d+H)?(\d+M)?(\d+([.,]\d+)?S)?)?$").unwrap()
});

/// True iff `value` is a non-empty legal-basis reference.
pub fn check_reference(value: &str) -> bool {
    !value.is_empty() && LEGAL_BASIS.is_match(value)
}

pub fn is_email(value: &str) -> bool {
    EMAIL.is_match(value)
}

/// Digits, spaces, `+`, `-` and parentheses with at least six digits.
pub fn is_phone(value: &str) -> bool {
    value.chars().all(|c| c.is_ascii_digit() || matches!(c, ' ' | '+' | '-' | '(' | ')'))
        && value.chars().filter(char::is_ascii_digit).count() >= 6
}

/// Absolute `http` or `https` URL with a host.
pub fn is_http_url(value: &str) -> bool {
    match url::Url::parse(value) {
        Ok(u) => matches!(u.scheme(), "http" | "https") && u.host_str().is_some_and(|h| !h.is_empty()),
        Err(_) => false,
    }
}

/// Parses an ISO 8601 timestamp that carries an explicit UTC offset
/// (`Z`, `+hh:mm` or `+hhmm`).
pub fn parse_timestamp(value: &str) -> Option<DateTime<FixedOffset>> {
    let caps = TIMESTAMP.captures(value)?;
    let offset = caps.get(2)?;
    let mut normalized = value[..offset.start()].to_string();
    match offset.as_str() {
        "Z" => normalized.push_str("+00:00"),
        o if o.len() == 5 => {
            normalized.push_str(&o[..3]);
            normalized.push(':');
            normalized.push_str(&o[3..]);
        }
        o => normalized.push_str(o),
    }
    DateTime::parse_from_rfc3339(&normalized).ok()
}

pub fn is_timestamp(value: &str) -> bool {
    parse_timestamp(value).is_some()
}

/// ISO 8601 duration such as `P3Y6M4DT12H30M17S`.
pub fn is_duration(value: &str) -> bool {
    DURATION.is_match(value) && value != "P" && !value.ends_with('T')
}
