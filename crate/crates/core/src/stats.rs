//! Corpus-level aggregates: sample sizes, regional deviations, score histograms.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::features::FeatureSet;
use crate::similarity::{Feature, SimilarityReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid bucket edges: {0}")]
    InvalidBuckets(String),
}

/// Two-sided standard normal quantile for `confidence`, to 6 decimals
/// (1.959964 at 95%).
pub fn z_score(confidence: f64) -> f64 {
    let normal = Normal::standard();
    let z = normal.inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    (z * 1e6).round() / 1e6
}

/// Cochran's sample size with finite-population correction, rounded up.
pub fn sample_size(population: u64, confidence: f64, margin: f64, proportion: f64) -> Result<u64, StatsError> {
    let open_unit = |x: f64| x > 0.0 && x < 1.0;
    if population == 0 {
        return Err(StatsError::InvalidParameter("population must be at least 1".into()));
    }
    for (name, value) in [("confidence", confidence), ("margin", margin), ("proportion", proportion)] {
        if !open_unit(value) {
            return Err(StatsError::InvalidParameter(format!("{name} must lie strictly between 0 and 1, got {value}")));
        }
    }
    let z = z_score(confidence);
    let n0 = z * z * proportion * (1.0 - proportion) / (margin * margin);
    let n = n0 / (1.0 + (n0 - 1.0) / population as f64);
    Ok(n.ceil() as u64)
}

/// [`sample_size`] at 95% confidence, 5% margin and p = 0.5.
pub fn default_sample_size(population: u64) -> Result<u64, StatsError> {
    sample_size(population, 0.95, 0.05, 0.5)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TotalPermissions,
    DangerousPermissions,
    LibraryFrequency(String),
}

impl Metric {
    pub fn label(&self) -> String {
        match self {
            Metric::TotalPermissions => "total_permissions".into(),
            Metric::DangerousPermissions => "dangerous_permissions".into(),
            Metric::LibraryFrequency(lib) => format!("library_frequency:{lib}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionalDeviation {
    pub region: String,
    pub metric: Metric,
    /// Regional mean minus the mean over every app of every region.
    pub deviation: f64,
}

fn mean<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Per-region deviation of permission counts and library usage from the
/// pooled global mean.
///
/// Library frequency is the fraction of a region's apps bundling the
/// library; every library seen in any app is reported. Regions with no apps
/// are skipped.
pub fn regional_deviation(
    features_by_region: &BTreeMap<String, Vec<FeatureSet>>,
    dangerous: &BTreeSet<String>,
) -> Vec<RegionalDeviation> {
    let total = |f: &FeatureSet| f.permissions.len() as f64;
    let risky = |f: &FeatureSet| f.permissions.intersection(dangerous).count() as f64;
    let libraries: BTreeSet<&String> = features_by_region
        .values()
        .flatten()
        .flat_map(|f| &f.third_party_libs)
        .collect();

    type Extract<'a> = Box<dyn Fn(&FeatureSet) -> f64 + 'a>;
    let mut metrics: Vec<(Metric, Extract<'_>)> = vec![
        (Metric::TotalPermissions, Box::new(total)),
        (Metric::DangerousPermissions, Box::new(risky)),
    ];
    for lib in libraries {
        metrics.push((
            Metric::LibraryFrequency(lib.clone()),
            Box::new(move |f: &FeatureSet| f64::from(u8::from(f.third_party_libs.contains(lib)))),
        ));
    }

    let mut out = Vec::new();
    for (metric, value) in &metrics {
        let global = mean(features_by_region.values().flatten().map(value));
        for (region, apps) in features_by_region {
            if apps.is_empty() {
                log::warn!("region {region} has no apps; skipped");
                continue;
            }
            out.push(RegionalDeviation {
                region: region.clone(),
                metric: metric.clone(),
                deviation: mean(apps.iter().map(value)) - global,
            });
        }
    }
    out
}

pub fn deviation_csv(rows: &[RegionalDeviation]) -> String {
    let mut out = String::from("region,metric,deviation\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.region, r.metric.label(), r.deviation));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub lo: f64,
    /// Exclusive upper bound; equal to `lo` for the terminal `{1.0}` bucket.
    pub hi: f64,
    pub count: usize,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreHistogram {
    /// A feature name, or `overall`.
    pub feature: String,
    pub buckets: Vec<HistogramBucket>,
}

fn check_edges(edges: &[f64]) -> Result<(), StatsError> {
    if edges.len() < 2 {
        return Err(StatsError::InvalidBuckets("need at least two edges".into()));
    }
    if edges[0] != 0.0 || edges[edges.len() - 1] != 1.0 {
        return Err(StatsError::InvalidBuckets("edges must start at 0 and end at 1".into()));
    }
    // written negated so NaN edges are rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(StatsError::InvalidBuckets("edges must be strictly increasing".into()));
    }
    Ok(())
}

fn histogram(feature: String, scores: &[f64], edges: &[f64]) -> ScoreHistogram {
    let mut counts = vec![0usize; edges.len()];
    for &s in scores {
        let slot = if s >= 1.0 {
            edges.len() - 1
        } else {
            // last edge not above the score; scores below 0 land in the first bucket
            edges[1..].partition_point(|&e| e <= s)
        };
        counts[slot] += 1;
    }
    let pct = |c: usize| if scores.is_empty() { 0.0 } else { 100.0 * c as f64 / scores.len() as f64 };
    let mut buckets: Vec<HistogramBucket> = edges
        .windows(2)
        .zip(&counts)
        .map(|(w, &count)| HistogramBucket { lo: w[0], hi: w[1], count, percentage: pct(count) })
        .collect();
    let terminal = counts[edges.len() - 1];
    buckets.push(HistogramBucket { lo: 1.0, hi: 1.0, count: terminal, percentage: pct(terminal) });
    ScoreHistogram { feature, buckets }
}

/// One histogram per feature plus `overall`, with buckets `[e_i, e_i+1)`
/// and a final bucket holding exact 1.0 scores.
pub fn score_histogram(reports: &[SimilarityReport], edges: &[f64]) -> Result<Vec<ScoreHistogram>, StatsError> {
    check_edges(edges)?;
    let mut out: Vec<ScoreHistogram> = Feature::ALL
        .iter()
        .map(|&f| {
            let scores: Vec<f64> = reports.iter().filter_map(|r| r.score(f)).collect();
            histogram(f.name().to_owned(), &scores, edges)
        })
        .collect();
    let overall: Vec<f64> = reports.iter().map(|r| r.overall).collect();
    out.push(histogram("overall".to_owned(), &overall, edges));
    Ok(out)
}

pub fn histogram_csv(histograms: &[ScoreHistogram]) -> String {
    let mut out = String::from("feature,lo,hi,count,percentage\n");
    for h in histograms {
        for b in &h.buckets {
            out.push_str(&format!("{},{},{},{},{:.2}\n", h.feature, b.lo, b.hi, b.count, b.percentage));
        }
    }
    out
}

/// Parses a comma-separated edge list such as `0,0.5,1`.
pub fn parse_edges(text: &str) -> Result<Vec<f64>, StatsError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| StatsError::InvalidBuckets(format!("`{t}` is not a number")))
        })
        .collect()
}
