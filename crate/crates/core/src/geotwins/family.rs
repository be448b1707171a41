//! GeoFamilies: connected groups of GeoTwin pairs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GeoError, GeoTwinPair};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoFamily {
    pub members: BTreeSet<String>,
    /// Unordered member pairs, `n(n-1)/2`.
    pub pair_count: u64,
}

impl GeoFamily {
    pub fn new(members: BTreeSet<String>) -> Self {
        let n = members.len() as u64;
        GeoFamily { pair_count: n * n.saturating_sub(1) / 2, members }
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
    }
}

/// Connected components of the pair graph, sorted by smallest member.
pub fn cluster_families(pairs: &[GeoTwinPair]) -> Vec<GeoFamily> {
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    for p in pairs {
        for name in [&p.a, &p.b] {
            let next = ids.len();
            ids.entry(name.as_str()).or_insert(next);
        }
    }
    let mut uf = UnionFind::new(ids.len());
    for p in pairs {
        uf.union(ids[p.a.as_str()], ids[p.b.as_str()]);
    }
    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (name, id) in &ids {
        groups.entry(uf.find(*id)).or_default().insert((*name).to_owned());
    }
    let mut families: Vec<GeoFamily> = groups.into_values().map(GeoFamily::new).collect();
    families.sort_by(|x, y| x.members.first().cmp(&y.members.first()));
    families
}

/// Picks `k` distinct families and one of each family's admitted pairs.
///
/// The choice depends only on `seed` and the (sorted) inputs. Output keeps
/// family order.
pub fn sample_families(
    families: &[GeoFamily],
    pairs: &[GeoTwinPair],
    k: usize,
    seed: u64,
) -> Result<Vec<GeoTwinPair>, GeoError> {
    if k > families.len() {
        return Err(GeoError::InsufficientFamilies { requested: k, available: families.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = index::sample(&mut rng, families.len(), k).into_vec();
    chosen.sort_unstable();

    let family_of: BTreeMap<&str, usize> = families
        .iter()
        .enumerate()
        .flat_map(|(i, f)| f.members.iter().map(move |m| (m.as_str(), i)))
        .collect();
    let mut by_family: BTreeMap<usize, Vec<&GeoTwinPair>> = BTreeMap::new();
    for p in pairs {
        if let Some(&f) = family_of.get(p.a.as_str()) {
            by_family.entry(f).or_default().push(p);
        }
    }

    let mut out = Vec::with_capacity(k);
    for f in chosen {
        let candidates = by_family.get(&f).map(Vec::as_slice).unwrap_or_default();
        if candidates.is_empty() {
            // a family built from some other pair list; nothing admitted to draw from
            log::warn!("family {:?} has no admitted pair", families[f].members.first());
            continue;
        }
        out.push(candidates[rng.random_range(0..candidates.len())].clone());
    }
    Ok(out)
}
