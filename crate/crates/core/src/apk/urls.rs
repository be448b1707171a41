//! Hard-coded URL extraction.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

/// Entry extensions scanned as text.
pub const TEXT_EXTENSIONS: &[&str] = &["xml", "json", "txt", "properties", "html", "js"];

/// XML namespace identifiers declared by every Android resource file; they
/// name schemas rather than endpoints the app talks to.
const NAMESPACE_PREFIX: &str = "http://schemas.android.com/";

const TRAILING: &[char] = &['.', ',', ';', '"', '\'', '<', '>', ')'];

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"https?://[^\s"'<>`\x00-\x1f\x7f]+"#).unwrap())
}

pub fn is_text_entry(path: &str) -> bool {
    path.rsplit_once('.')
        .is_some_and(|(_, ext)| TEXT_EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()))
}

/// Collects URL-shaped substrings of `text` into `out`.
///
/// A URL is `http://` or `https://` followed by at least one character that
/// is not whitespace, a quote, an angle bracket, a backtick or a control
/// character. Trailing `.,;"'<>)` are stripped; a match left with nothing
/// after the scheme is dropped, as are Android XML namespace identifiers.
pub fn collect_urls(text: &str, out: &mut BTreeSet<String>) {
    for m in url_regex().find_iter(text) {
        let url = m.as_str().trim_end_matches(TRAILING);
        let scheme_end = url.find("://").map(|i| i + 3).unwrap_or(url.len());
        if url.len() > scheme_end && !url.starts_with(NAMESPACE_PREFIX) {
            out.insert(url.to_owned());
        }
    }
}
