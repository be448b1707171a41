//! BK-tree over 64-bit hashes under Hamming distance.

pub fn hamming(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

struct Node {
    hash: u64,
    /// Indices of every inserted item carrying this hash.
    items: Vec<usize>,
    /// Child per distance 1..=64 from this node.
    children: Vec<(u32, usize)>,
}

/// Built once, then queried read-only (and so shareable across threads).
#[derive(Default)]
pub struct HammingIndex {
    nodes: Vec<Node>,
}

impl HammingIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn build<I: IntoIterator<Item = u64>>(hashes: I) -> Self {
        let mut index = Self::new();
        for (i, h) in hashes.into_iter().enumerate() {
            index.insert(h, i);
        }
        index
    }

    pub fn insert(&mut self, hash: u64, item: usize) {
        if self.nodes.is_empty() {
            self.nodes.push(Node { hash, items: vec![item], children: Vec::new() });
            return;
        }
        let mut at = 0;
        loop {
            let d = hamming(self.nodes[at].hash, hash);
            if d == 0 {
                self.nodes[at].items.push(item);
                return;
            }
            match self.nodes[at].children.iter().find(|(cd, _)| *cd == d) {
                Some(&(_, child)) => at = child,
                None => {
                    let id = self.nodes.len();
                    self.nodes.push(Node { hash, items: vec![item], children: Vec::new() });
                    self.nodes[at].children.push((d, id));
                    return;
                }
            }
        }
    }

    /// Every `(item, distance)` within `radius` of `hash`, in no fixed order.
    pub fn within(&self, hash: u64, radius: u32) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = vec![0];
        while let Some(at) = stack.pop() {
            let node = &self.nodes[at];
            let d = hamming(node.hash, hash);
            if d <= radius {
                out.extend(node.items.iter().map(|&i| (i, d)));
            }
            // triangle inequality: only children at distance within d ± radius can hold matches
            let lo = d.saturating_sub(radius);
            let hi = d + radius;
            stack.extend(node.children.iter().filter(|(cd, _)| (lo..=hi).contains(cd)).map(|&(_, c)| c));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().map(|n| n.items.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(7, 7), 0);
        assert_eq!(hamming(0, 0xFF), 8);
        assert_eq!(hamming(0, u64::MAX), 64);
    }

    #[test]
    fn duplicates_share_a_node() {
        let index = HammingIndex::build([5, 5, 5, 6]);
        assert_eq!(index.len(), 4);
        let mut hits = index.within(5, 0);
        hits.sort();
        assert_eq!(hits, [(0, 0), (1, 0), (2, 0)]);
    }

    proptest! {
        #[test]
        fn prop_index_matches_scan(hashes in prop::collection::vec(any::<u64>().prop_map(|h| h & 0xFFFF), 0..200),
                                   query in any::<u64>().prop_map(|h| h & 0xFFFF), radius in 0u32..12) {
            let index = HammingIndex::build(hashes.iter().copied());
            let mut got = index.within(query, radius);
            got.sort();
            let expected: Vec<(usize, u32)> = hashes
                .iter()
                .enumerate()
                .map(|(i, &h)| (i, hamming(h, query)))
                .filter(|&(_, d)| d <= radius)
                .collect();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn prop_hamming_triangle(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            prop_assert!(hamming(a, c) <= hamming(a, b) + hamming(b, c));
            prop_assert_eq!(hamming(a, b), hamming(b, a));
        }
    }
}
