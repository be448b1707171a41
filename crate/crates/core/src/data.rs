//! Data files bundled into the binary.
//!
//! Each file starts with a `# version: <tag>` line so results can be tied to
//! the exact table revision that produced them.

pub const LIBRARY_PREFIXES: &str = include_str!("../data/library_prefixes.txt");
pub const DANGEROUS_PERMISSIONS: &str = include_str!("../data/dangerous_permissions.txt");
pub const COUNTRIES: &str = include_str!("../data/countries.tsv");
pub const COUNTRY_ALIASES: &str = include_str!("../data/country_aliases.txt");
pub const COUNTRY_STOP_SEGMENTS: &str = include_str!("../data/country_stop_segments.txt");
pub const INSTALL_MARKERS: &str = include_str!("../data/install_markers.txt");

/// Reads the `# version:` tag from the first lines of a data file.
pub fn version_of(text: &str) -> &str {
    text.lines()
        .take_while(|l| l.starts_with('#') || l.trim().is_empty())
        .find_map(|l| l.strip_prefix('#').map(str::trim).and_then(|l| l.strip_prefix("version:")))
        .map(str::trim)
        .unwrap_or("unversioned")
}

/// Non-comment, non-blank lines, trimmed.
pub fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// One line per bundled table, for `--version`.
pub fn versions_summary() -> String {
    [
        ("library-catalog", LIBRARY_PREFIXES),
        ("dangerous-permissions", DANGEROUS_PERMISSIONS),
        ("country-table", COUNTRIES),
        ("country-aliases", COUNTRY_ALIASES),
        ("country-stop-segments", COUNTRY_STOP_SEGMENTS),
        ("install-markers", INSTALL_MARKERS),
    ]
    .iter()
    .map(|(name, text)| format!("{name} {}", version_of(text)))
    .collect::<Vec<_>>()
    .join("\n")
}

/// The bundled dangerous-permission list.
pub fn dangerous_permissions() -> std::collections::BTreeSet<String> {
    content_lines(DANGEROUS_PERMISSIONS).map(str::to_owned).collect()
}
