//! Regex-based replacement of URLs, e-mail addresses, user mentions and
//! phone numbers by placeholder tags.
//!
//! Patterns are intentionally simple and documented so divergence from other
//! scrubbers is auditable. Replacement runs in a fixed order: URL, e-mail,
//! user mention, phone.

use std::sync::LazyLock;

use regex::Regex;

pub const URL_TAG: &str = "[URL]";
pub const EMAIL_TAG: &str = "[EMAIL]";
pub const USER_TAG: &str = "[USER]";
pub const PHONE_TAG: &str = "[PHONE]";

/// `scheme://...` or `www....`, up to whitespace. Trailing punctuation is left
/// in place.
pub const URL_PATTERN: &str = r#"(?i)\b(?:[a-z][a-z0-9+.\-]*://|www\.)[^\s<>"]*[^\s<>".,;:!?)\]'}]"#;

/// `local@domain.tld` with a TLD of at least two letters.
pub const EMAIL_PATTERN: &str = r"(?i)\b[a-z0-9._%+\-]+@[a-z0-9\-]+(?:\.[a-z0-9\-]+)*\.[a-z]{2,}\b";

/// `@name` where `@` starts a token. Group 1 holds the preceding boundary
/// character, which is kept. A closing bracket does not count as a boundary,
/// so text following an inserted tag is never re-matched.
pub const USER_PATTERN: &str = r"(^|[^\w@./\]])@\w+";

/// Optional `+`, then 7 to 15 digits separated by at most two of
/// space, dash, dot or parentheses. Group 1 holds the preceding boundary.
pub const PHONE_PATTERN: &str = r"(^|[^\w+\]])(\+?\(?\d(?:[ .\-()]{0,2}\d){6,14})\b";

static URL_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(URL_PATTERN).unwrap());
static EMAIL_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(EMAIL_PATTERN).unwrap());
static USER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(USER_PATTERN).unwrap());
static PHONE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(PHONE_PATTERN).unwrap());

pub fn anonymize(text: &str) -> String {
    let out = URL_RE.replace_all(text, URL_TAG);
    let out = EMAIL_RE.replace_all(&out, EMAIL_TAG);
    let out = USER_RE.replace_all(&out, format!("${{1}}{USER_TAG}").as_str());
    let out = PHONE_RE.replace_all(&out, format!("${{1}}{PHONE_TAG}").as_str());
    out.into_owned()
}
