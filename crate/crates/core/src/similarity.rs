//! Per-feature and overall similarity between two feature sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::apk::CertificateSummary;
use crate::features::FeatureSet;
use crate::json::serialize_round4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Permissions,
    Components,
    Certificates,
    ThirdPartyLibs,
    NativeLibs,
    Urls,
    Files,
    SmaliFiles,
}

impl Feature {
    pub const ALL: [Feature; 8] = [
        Feature::Permissions,
        Feature::Components,
        Feature::Certificates,
        Feature::ThirdPartyLibs,
        Feature::NativeLibs,
        Feature::Urls,
        Feature::Files,
        Feature::SmaliFiles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Permissions => "permissions",
            Feature::Components => "components",
            Feature::Certificates => "certificates",
            Feature::ThirdPartyLibs => "third_party_libs",
            Feature::NativeLibs => "native_libs",
            Feature::Urls => "urls",
            Feature::Files => "files",
            Feature::SmaliFiles => "smali_files",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Counts from which a feature score can be recomputed exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoreDetail {
    Certificate {
        matching: usize,
        total: usize,
        left_present: bool,
        right_present: bool,
    },
    Files {
        identical: usize,
        similar: usize,
        union: usize,
    },
    Set {
        intersection: usize,
        union: usize,
    },
}

impl ScoreDetail {
    /// The score implied by the counts.
    pub fn score(&self) -> f64 {
        match *self {
            ScoreDetail::Set { intersection, union } => ratio(intersection as f64, union),
            ScoreDetail::Files { identical, similar, union } => {
                ratio(identical as f64 + 0.5 * similar as f64, union)
            }
            ScoreDetail::Certificate { matching, total, left_present, right_present } => {
                match (left_present, right_present) {
                    (false, false) => 1.0,
                    (true, true) => ratio(matching as f64, total),
                    _ => 0.0,
                }
            }
        }
    }
}

fn ratio(num: f64, union: usize) -> f64 {
    if union == 0 {
        1.0
    } else {
        num / union as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: Feature,
    #[serde(serialize_with = "serialize_round4")]
    pub score: f64,
    pub detail: ScoreDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub left_id: String,
    pub right_id: String,
    pub features: Vec<FeatureScore>,
    #[serde(serialize_with = "serialize_round4")]
    pub overall: f64,
}

impl SimilarityReport {
    pub fn score(&self, feature: Feature) -> Option<f64> {
        self.features.iter().find(|s| s.feature == feature).map(|s| s.score)
    }
}

fn set_detail<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> ScoreDetail {
    let intersection = a.intersection(b).count();
    ScoreDetail::Set { intersection, union: a.len() + b.len() - intersection }
}

/// `|a ∩ b| / |a ∪ b|`, with two empty sets scoring 1.0.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    set_detail(a, b).score()
}

/// Result of comparing two path → hash maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FileMatch {
    pub score: f64,
    pub identical: usize,
    pub similar: usize,
    pub union_size: usize,
}

/// Identical paths weigh 1.0, same path with different content weighs 0.5.
pub fn modified_jaccard(left: &BTreeMap<String, String>, right: &BTreeMap<String, String>) -> FileMatch {
    let mut identical = 0;
    let mut similar = 0;
    for (path, hash) in left {
        match right.get(path) {
            Some(h) if h == hash => identical += 1,
            Some(_) => similar += 1,
            None => {}
        }
    }
    let union_size = left.len() + right.len() - identical - similar;
    let score = ScoreDetail::Files { identical, similar, union: union_size }.score();
    FileMatch { score, identical, similar, union_size }
}

fn certificate_detail(left: Option<&CertificateSummary>, right: Option<&CertificateSummary>) -> ScoreDetail {
    let (matching, total) = match (left, right) {
        (Some(l), Some(r)) => {
            let (l, r) = (&l.flattened, &r.flattened);
            let matching = l.iter().filter(|(k, v)| r.get(*k) == Some(*v)).count();
            let shared = l.keys().filter(|k| r.contains_key(*k)).count();
            (matching, l.len() + r.len() - shared)
        }
        _ => (0, 0),
    };
    ScoreDetail::Certificate {
        matching,
        total,
        left_present: left.is_some(),
        right_present: right.is_some(),
    }
}

/// Fraction of flattened certificate keys whose values agree.
pub fn certificate_similarity(left: Option<&CertificateSummary>, right: Option<&CertificateSummary>) -> f64 {
    certificate_detail(left, right).score()
}

pub fn compare(left: &FeatureSet, right: &FeatureSet) -> SimilarityReport {
    let features: Vec<FeatureScore> = Feature::ALL
        .iter()
        .map(|&feature| {
            let detail = match feature {
                Feature::Permissions => set_detail(&left.permissions, &right.permissions),
                Feature::Components => set_detail(&left.components, &right.components),
                Feature::Certificates => certificate_detail(left.certificate.as_ref(), right.certificate.as_ref()),
                Feature::ThirdPartyLibs => set_detail(&left.third_party_libs, &right.third_party_libs),
                Feature::NativeLibs => set_detail(&left.native_libs, &right.native_libs),
                Feature::Urls => set_detail(&left.urls, &right.urls),
                Feature::Files => files_detail(&left.files, &right.files),
                Feature::SmaliFiles => files_detail(&left.smali_files, &right.smali_files),
            };
            FeatureScore { feature, score: detail.score(), detail }
        })
        .collect();
    let overall = features.iter().map(|s| s.score).sum::<f64>() / features.len() as f64;
    SimilarityReport {
        left_id: left.app_id.clone(),
        right_id: right.app_id.clone(),
        features,
        overall,
    }
}

fn files_detail(left: &BTreeMap<String, String>, right: &BTreeMap<String, String>) -> ScoreDetail {
    let m = modified_jaccard(left, right);
    ScoreDetail::Files { identical: m.identical, similar: m.similar, union: m.union_size }
}
