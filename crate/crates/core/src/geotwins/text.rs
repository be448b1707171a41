//! Package-name distances and country tokens.

use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

use crate::data;

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(ca != cb);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance divided by the longer length; 0.0 for two empty strings.
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        0.0
    } else {
        levenshtein(a, b) as f64 / longest as f64
    }
}

struct CountryTable {
    tokens: HashSet<String>,
    edge_only: HashSet<String>,
}

fn table() -> &'static CountryTable {
    static TABLE: OnceLock<CountryTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let first_column = |text: &'static str| {
            data::content_lines(text).map(|l| l.split('\t').next().unwrap_or(l).trim().to_owned())
        };
        let mut tokens: HashSet<String> = HashSet::new();
        for line in data::content_lines(data::COUNTRIES) {
            if let Some((code, name)) = line.split_once('\t') {
                tokens.insert(code.trim().to_owned());
                tokens.insert(name.trim().to_owned());
            }
        }
        tokens.extend(first_column(data::COUNTRY_ALIASES));
        CountryTable { tokens, edge_only: first_column(data::COUNTRY_STOP_SEGMENTS).collect() }
    })
}

/// Segments of a package name that denote a country or region.
///
/// Codes that double as common words (`in`, `it`, `co`, …) only count as
/// the first or last segment.
pub fn country_tokens(package_name: &str) -> BTreeSet<String> {
    let t = table();
    let segments: Vec<String> = package_name.split('.').map(str::to_lowercase).collect();
    let last = segments.len().saturating_sub(1);
    segments
        .into_iter()
        .enumerate()
        .filter(|(i, seg)| t.tokens.contains(seg) && (*i == 0 || *i == last || !t.edge_only.contains(seg)))
        .map(|(_, seg)| seg)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(name: &str) -> Vec<String> {
        country_tokens(name).into_iter().collect()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(normalized_levenshtein("abc", "abc"), 0.0);
        assert_eq!(normalized_levenshtein("", ""), 0.0);
        assert_eq!(normalized_levenshtein("", "ab"), 1.0);
        assert_eq!(normalized_levenshtein("jp.co.atm.unison", "en.co.atm.unison"), 0.125);
        assert_eq!(
            normalized_levenshtein("sk.martinus.knihovratok", "cz.martinus.knihovratek"),
            3.0 / 23.0
        );
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("żółw", "zolw"), 3);
    }

    #[test]
    fn token_examples() {
        assert_eq!(tokens("jp.co.atm.unison"), ["jp"]);
        assert_eq!(tokens("en.co.atm.unison"), ["en"]);
        assert_eq!(tokens("com.cisana.guidatv.at"), ["at"]);
        assert!(tokens("com.example.calculator").is_empty());
        assert!(tokens("com.it.works").is_empty());
        assert_eq!(tokens("com.americanexpress.android.acctsvcs.japan"), ["japan"]);
        assert_eq!(tokens("SK.martinus.Knihovratok"), ["sk"]);
        assert_eq!(tokens("com.app.de.fr"), ["fr"]);
    }
}
