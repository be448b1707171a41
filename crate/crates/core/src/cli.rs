//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::apk::open_apk;
use crate::availability::{self, FixtureFetcher, HttpFetcher, InstallMarkers, ProbeConfig, ProbePolicy, Prober};
use crate::features::{extract_features, FeatureSet, LibraryPrefixCatalog};
use crate::geotwins::{self, Thresholds};
use crate::json::to_canonical_string;
use crate::similarity::{compare, SimilarityReport};
use crate::{data, stats};

/// Environment variable that pins `probed_at` timestamps.
pub const FROZEN_TIME_ENV: &str = "GEODIFF_FROZEN_TIME";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "geodiff", about = "Static comparison of regional Android app variants", disable_version_flag = true)]
pub struct Cli {
    /// Print tool and bundled data versions
    #[arg(long)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump the parsed contents of one APK
    Inspect {
        apk: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Emit the comparable feature set instead of the parsed archive
        #[arg(long)]
        features: bool,
        /// Library catalog for --features
        #[arg(long, requires = "features")]
        catalog: Option<PathBuf>,
    },
    /// Compare two APKs, or every pair listed in a file
    Compare(CompareArgs),
    /// Find GeoTwin pairs and families in an app catalog
    Mine(MineArgs),
    /// Check store availability per region
    Probe(ProbeArgs),
    /// Corpus statistics
    #[command(subcommand)]
    Stats(StatsCommand),
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// APK or feature-set JSON files
    inputs: Vec<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// File with one `left right` pair per line
    #[arg(long, conflicts_with = "inputs")]
    pairs: Option<PathBuf>,
    /// Worker threads for pair lists
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct MineArgs {
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = geotwins::DEFAULT_HAMMING_MAX)]
    hamming_max: u32,
    #[arg(long, default_value_t = geotwins::DEFAULT_NLD_MAX)]
    nld_max: f64,
    #[arg(long)]
    families: Option<PathBuf>,
    /// Draw one pair from each of this many families
    #[arg(long, requires = "sample_out")]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sample_out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    /// One package name per line
    #[arg(long)]
    packages: PathBuf,
    #[arg(long)]
    regions: PathBuf,
    /// Serve pages from `<dir>/<region>/<package>.html` instead of the network
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long)]
    markers: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum StatsCommand {
    /// Exclusivity histogram of availability records
    Availability {
        records: PathBuf,
        /// Region list; defaults to every region seen in the records
        #[arg(long)]
        regions: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-region exclusive-app counts
        #[arg(long)]
        exclusive: Option<PathBuf>,
    },
    /// Sample size for a finite population
    SampleSize {
        #[arg(long)]
        population: u64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
        #[arg(long, default_value_t = 0.5)]
        proportion: f64,
    },
    /// Per-region deviation from the global average
    Deviation {
        /// Directory with one subdirectory of APKs or feature-set JSON per region
        #[arg(long)]
        features_dir: PathBuf,
        #[arg(long)]
        dangerous_list: Option<PathBuf>,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score distribution of similarity reports
    Histogram {
        #[arg(long)]
        reports: PathBuf,
        #[arg(long, default_value = "0,0.2,0.4,0.6,0.8,0.99,1.0")]
        edges: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A well-formed command line asking for something impossible.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

/// Runs the tool and returns its exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_INPUT
            }
        }
    }
}

pub fn version_text() -> String {
    format!("geodiff {}\n{}\n", env!("CARGO_PKG_VERSION"), data::versions_summary())
}

fn run(cli: Cli) -> Result<()> {
    if cli.version {
        return emit(None, &version_text());
    }
    let Some(command) = cli.command else {
        use clap::CommandFactory;
        Cli::command().print_help()?;
        return Err(UsageError("a subcommand is required".into()).into());
    };
    match command {
        Command::Inspect { apk, json, features, catalog } => {
            let text = if features {
                line(&load_features(&apk, &load_catalog(catalog.as_deref())?)?)?
            } else {
                line(&open_apk(&apk).with_context(|| format!("{}", apk.display()))?)?
            };
            emit(json.as_deref(), &text)
        }
        Command::Compare(args) => run_compare(args),
        Command::Mine(args) => with_jobs(args.jobs, || run_mine(args)),
        Command::Probe(args) => run_probe(args),
        Command::Stats(cmd) => run_stats(cmd),
    }
}

fn line<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(to_canonical_string(value)? + "\n")
}

/// Writes to `path`, or to standard output when absent.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match jobs {
        Some(0) => Err(UsageError("--jobs must be at least 1".into()).into()),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f),
        None => f(),
    }
}

fn load_catalog(path: Option<&Path>) -> Result<LibraryPrefixCatalog> {
    match path {
        Some(p) => LibraryPrefixCatalog::load(p).with_context(|| format!("library catalog {}", p.display())),
        None => Ok(LibraryPrefixCatalog::bundled()),
    }
}

/// Reads an APK, or a feature set previously written as JSON.
pub fn load_features(path: &Path, catalog: &LibraryPrefixCatalog) -> Result<FeatureSet> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return serde_json::from_str(&text).with_context(|| format!("{}: not a feature set", path.display()));
    }
    let archive = open_apk(path).with_context(|| format!("{}", path.display()))?;
    Ok(extract_features(&archive, catalog))
}

fn read_pairs(path: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut pairs = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        let [left, right] = fields.as_slice() else {
            bail!("{} line {}: expected two paths", path.display(), i + 1);
        };
        pairs.push((base.join(left), base.join(right)));
    }
    Ok(pairs)
}

fn run_compare(args: CompareArgs) -> Result<()> {
    let catalog = load_catalog(args.catalog.as_deref())?;
    if let Some(pairs_file) = &args.pairs {
        let pairs = read_pairs(pairs_file)?;
        let reports: Vec<SimilarityReport> = with_jobs(args.jobs, || {
            pairs
                .par_iter()
                .map(|(l, r)| Ok(compare(&load_features(l, &catalog)?, &load_features(r, &catalog)?)))
                .collect::<Result<Vec<_>>>()
        })?;
        let mut text = String::new();
        for r in &reports {
            text.push_str(&line(r)?);
        }
        return emit(args.json.as_deref(), &text);
    }
    let [left, right] = args.inputs.as_slice() else {
        return Err(UsageError("compare needs exactly two inputs, or --pairs".into()).into());
    };
    let report = compare(&load_features(left, &catalog)?, &load_features(right, &catalog)?);
    emit(args.json.as_deref(), &line(&report)?)
}

fn run_mine(args: MineArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.nld_max) {
        return Err(UsageError("--nld-max must lie in [0, 1]".into()).into());
    }
    let catalog = geotwins::load_catalog(&args.catalog)?;
    let limits = Thresholds { hamming_max: args.hamming_max, nld_max: args.nld_max };
    let pairs = geotwins::find_candidates(&catalog, limits);
    log::info!("{} entries, {} pairs", catalog.len(), pairs.len());
    let jsonl = |items: &[geotwins::GeoTwinPair]| -> Result<String> {
        items.iter().map(line).collect()
    };
    emit(args.out.as_deref(), &jsonl(&pairs)?)?;
    let families = geotwins::cluster_families(&pairs);
    if let Some(path) = &args.families {
        emit(Some(path), &line(&families)?)?;
    }
    if let (Some(k), Some(path)) = (args.sample, &args.sample_out) {
        let sample = geotwins::sample_families(&families, &pairs, k, args.seed)?;
        emit(Some(path), &jsonl(&sample)?)?;
    }
    Ok(())
}

fn read_packages(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(data::content_lines(&text).map(str::to_owned).collect())
}

fn read_probe_config(path: &Path) -> Result<ProbeConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ProbeConfig::parse(&text).with_context(|| format!("{}", path.display()))
}

fn run_probe(args: ProbeArgs) -> Result<()> {
    let packages = read_packages(&args.packages)?;
    let config = read_probe_config(&args.regions)?;
    let markers = match &args.markers {
        Some(p) => InstallMarkers::parse(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => InstallMarkers::bundled(),
    };
    let frozen_time = std::env::var(FROZEN_TIME_ENV).ok();
    let mut policy = ProbePolicy::from_config(&config);
    let records = match &args.fixtures {
        Some(dir) => {
            // local files need no pacing
            policy.delay = std::time::Duration::ZERO;
            let fetcher = FixtureFetcher::new(dir);
            Prober { regions: &config.regions, fetcher: &fetcher, markers: &markers, policy, frozen_time }
                .probe_all(&packages)
        }
        None => {
            let fetcher = HttpFetcher::new(std::time::Duration::from_secs(config.timeout_secs));
            Prober { regions: &config.regions, fetcher: &fetcher, markers: &markers, policy, frozen_time }
                .probe_all(&packages)
        }
    };
    let text: String = records.iter().map(line).collect::<Result<_>>()?;
    emit(args.out.as_deref(), &text)
}

fn read_reports(path: &Path) -> Result<Vec<SimilarityReport>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{} line {}", path.display(), i + 1)))
        .collect()
}

fn region_features(dir: &Path, catalog: &LibraryPrefixCatalog) -> Result<std::collections::BTreeMap<String, Vec<FeatureSet>>> {
    let mut out = std::collections::BTreeMap::new();
    let sorted = |d: &Path| -> Result<Vec<PathBuf>> {
        let mut v: Vec<PathBuf> = fs::read_dir(d)
            .with_context(|| format!("reading {}", d.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        v.sort();
        Ok(v)
    };
    for region_dir in sorted(dir)?.into_iter().filter(|p| p.is_dir()) {
        let region = region_dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let files: Vec<PathBuf> = sorted(&region_dir)?
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "apk" || e == "json"))
            .collect();
        let sets = files.par_iter().map(|f| load_features(f, catalog)).collect::<Result<Vec<_>>>()?;
        out.insert(region, sets);
    }
    Ok(out)
}

fn run_stats(cmd: StatsCommand) -> Result<()> {
    match cmd {
        StatsCommand::Availability { records, regions, out, exclusive } => {
            let records = availability::load_records(&records).with_context(|| format!("{}", records.display()))?;
            let region_ids = match &regions {
                Some(p) => read_probe_config(p)?.region_ids(),
                None => {
                    let ids: std::collections::BTreeSet<&String> =
                        records.iter().flat_map(|r| r.per_region.keys()).collect();
                    ids.into_iter().cloned().collect()
                }
            };
            let s = availability::exclusivity_stats(&records, &region_ids);
            if let Some(p) = &exclusive {
                emit(Some(p), &s.exclusive_csv())?;
            }
            emit(out.as_deref(), &s.to_csv())
        }
        StatsCommand::SampleSize { population, confidence, margin, proportion } => {
            let n = stats::sample_size(population, confidence, margin, proportion)
                .map_err(|e| UsageError(e.to_string()))?;
            emit(None, &format!("{n}\n"))
        }
        StatsCommand::Deviation { features_dir, dangerous_list, catalog, out } => {
            let catalog = load_catalog(catalog.as_deref())?;
            let dangerous = match &dangerous_list {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    data::content_lines(&text).map(str::to_owned).collect()
                }
                None => data::dangerous_permissions(),
            };
            let by_region = region_features(&features_dir, &catalog)?;
            emit(out.as_deref(), &stats::deviation_csv(&stats::regional_deviation(&by_region, &dangerous)))
        }
        StatsCommand::Histogram { reports, edges, out } => {
            let edges = stats::parse_edges(&edges).map_err(|e| UsageError(e.to_string()))?;
            let reports = read_reports(&reports)?;
            let h = stats::score_histogram(&reports, &edges).map_err(|e| UsageError(e.to_string()))?;
            emit(out.as_deref(), &stats::histogram_csv(&h))
        }
    }
}
