// SPDX-License-Identifier: Apache-2.0

//! Union-find over article keys.
//!
//! Every component in the index belongs to exactly one live cluster. Nodes
//! live in a slab so that an evicted cluster's slots can be reused.

use std::collections::HashMap;

use super::{ArticleKey, ClusterId, LangLinkSet};

/// Outcome of placing a key and its siblings into the index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub id: ClusterId,
    /// Previously separate clusters folded into `id`, ascending.
    pub absorbed: Vec<ClusterId>,
    /// Keys that were not in the index before this call.
    pub new_keys: Vec<ArticleKey>,
}

#[derive(Debug, Default)]
pub struct ClusterIndex {
    slot_of: HashMap<ArticleKey, u32>,
    parent: Vec<u32>,
    rank: Vec<u8>,
    key_at: Vec<Option<ArticleKey>>,
    free: Vec<u32>,
    cluster_at_root: HashMap<u32, ClusterId>,
    next_id: u64,
}

impl ClusterIndex {
    pub fn new() -> Self {
        Self::default()
    }

    fn find(&mut self, mut node: u32) -> u32 {
        let mut root = node;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[node as usize] != root {
            let next = self.parent[node as usize];
            self.parent[node as usize] = root;
            node = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.rank[a as usize] < self.rank[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        if self.rank[a as usize] == self.rank[b as usize] {
            self.rank[a as usize] += 1;
        }
        a
    }

    fn alloc(&mut self, key: ArticleKey) -> u32 {
        let slot = match self.free.pop() {
            Some(slot) => {
                self.parent[slot as usize] = slot;
                self.rank[slot as usize] = 0;
                self.key_at[slot as usize] = Some(key.clone());
                slot
            }
            None => {
                let slot = self.parent.len() as u32;
                self.parent.push(slot);
                self.rank.push(0);
                self.key_at.push(Some(key.clone()));
                slot
            }
        };
        self.slot_of.insert(key, slot);
        slot
    }

    /// Unions `key` with every sibling in `links` (links are treated as
    /// undirected) and returns the cluster they now share. When previously
    /// separate clusters are joined, the oldest id survives.
    pub fn cluster_of(&mut self, key: &ArticleKey, links: &LangLinkSet) -> Resolution {
        let mut nodes = Vec::with_capacity(links.siblings.len() + 1);
        let mut existing = Vec::new();
        let mut new_keys = Vec::new();

        for k in std::iter::once(key).chain(links.siblings.iter()) {
            match self.slot_of.get(k) {
                Some(&slot) => {
                    let root = self.find(slot);
                    if let Some(&id) = self.cluster_at_root.get(&root) {
                        existing.push(id);
                    }
                    nodes.push(slot);
                }
                None => {
                    nodes.push(self.alloc(k.clone()));
                    new_keys.push(k.clone());
                }
            }
        }
        existing.sort_unstable();
        existing.dedup();

        for &slot in &nodes {
            let root = self.find(slot);
            self.cluster_at_root.remove(&root);
        }
        let mut root = nodes[0];
        for &slot in &nodes[1..] {
            root = self.union(root, slot);
        }
        let root = self.find(root);

        let id = match existing.first() {
            Some(&oldest) => oldest,
            None => {
                self.next_id += 1;
                ClusterId(self.next_id)
            }
        };
        self.cluster_at_root.insert(root, id);

        Resolution {
            id,
            absorbed: existing.into_iter().filter(|&c| c != id).collect(),
            new_keys,
        }
    }

    /// Current cluster of `key`, if it is indexed.
    pub fn lookup(&mut self, key: &ArticleKey) -> Option<ClusterId> {
        let slot = *self.slot_of.get(key)?;
        let root = self.find(slot);
        self.cluster_at_root.get(&root).copied()
    }

    /// Drops every key of an evicted cluster. `keys` must be the cluster's
    /// complete member set.
    pub fn release<'a>(&mut self, keys: impl IntoIterator<Item = &'a ArticleKey>) {
        let slots: Vec<u32> = keys.into_iter().filter_map(|k| self.slot_of.get(k).copied()).collect();
        if let Some(&first) = slots.first() {
            let root = self.find(first);
            self.cluster_at_root.remove(&root);
        }
        for slot in slots {
            if let Some(key) = self.key_at[slot as usize].take() {
                self.slot_of.remove(&key);
            }
            self.free.push(slot);
        }
    }

    /// Number of indexed keys.
    pub fn len(&self) -> usize {
        self.slot_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot_of.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_at_root.len()
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

    use proptest::prelude::*;

    use super::*;
    use crate::time::Timestamp;

    fn key(l: &str, t: &str) -> ArticleKey {
        ArticleKey::new(l, t).unwrap()
    }

    fn links(src: &ArticleKey, sibs: &[&ArticleKey]) -> LangLinkSet {
        LangLinkSet::new(src.clone(), sibs.iter().map(|k| (*k).clone()), Timestamp::EPOCH)
    }

    #[test]
    fn meteor_pair_joins_in_either_order() {
        let en = key("en", "2013 Russian meteor event");
        let ru = key("ru", "Падение метеорита на Урале в 2013 году");

        let mut idx = ClusterIndex::new();
        let a = idx.cluster_of(&en, &links(&en, &[&ru]));
        let b = idx.cluster_of(&ru, &links(&ru, &[]));
        assert_eq!(a.id, b.id);
        assert_eq!(a.new_keys.len(), 2);
        assert!(b.new_keys.is_empty());

        let mut idx = ClusterIndex::new();
        let b = idx.cluster_of(&ru, &links(&ru, &[]));
        let a = idx.cluster_of(&en, &links(&en, &[&ru]));
        assert_eq!(a.id, b.id);
    }

    #[test]
    fn singleton_and_late_merge() {
        let mut idx = ClusterIndex::new();
        let en = key("en", "Pope Benedict XVI");
        let fr = key("fr", "Benoît XVI");
        let a = idx.cluster_of(&en, &links(&en, &[]));
        let b = idx.cluster_of(&fr, &links(&fr, &[]));
        assert_ne!(a.id, b.id);
        assert_eq!(idx.cluster_count(), 2);

        let merged = idx.cluster_of(&fr, &links(&fr, &[&en]));
        assert_eq!(merged.id, a.id);
        assert_eq!(merged.absorbed, vec![b.id]);
        assert_eq!(idx.cluster_count(), 1);
        assert_eq!(idx.lookup(&fr), Some(a.id));
    }

    #[test]
    fn release_frees_slots_for_reuse() {
        let mut idx = ClusterIndex::new();
        let a = key("en", "A");
        let b = key("de", "B");
        let r = idx.cluster_of(&a, &links(&a, &[&b]));
        idx.release([&a, &b]);
        assert!(idx.is_empty());
        assert_eq!(idx.cluster_count(), 0);
        assert_eq!(idx.lookup(&a), None);

        let r2 = idx.cluster_of(&a, &links(&a, &[]));
        assert_ne!(r.id, r2.id);
        assert_eq!(idx.parent.len(), 2, "slot reused");
    }

    /// Connected components by BFS over the undirected link graph.
    fn components(sightings: &[(usize, Vec<usize>)]) -> BTreeSet<BTreeSet<usize>> {
        let mut adj: HashMap<usize, HashSet<usize>> = HashMap::new();
        for (k, sibs) in sightings {
            adj.entry(*k).or_default();
            for s in sibs {
                adj.entry(*k).or_default().insert(*s);
                adj.entry(*s).or_default().insert(*k);
            }
        }
        let mut seen = HashSet::new();
        let mut out = BTreeSet::new();
        let mut nodes: Vec<_> = adj.keys().copied().collect();
        nodes.sort();
        for start in nodes {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            while let Some(n) = queue.pop_front() {
                comp.insert(n);
                for &m in &adj[&n] {
                    if seen.insert(m) {
                        queue.push_back(m);
                    }
                }
            }
            out.insert(comp);
        }
        out
    }

    fn partition(sightings: &[(usize, Vec<usize>)]) -> BTreeSet<BTreeSet<usize>> {
        let keys: Vec<ArticleKey> = (0..64).map(|i| key(&format!("l{}", i % 7), &format!("T{i}"))).collect();
        let mut idx = ClusterIndex::new();
        for (k, sibs) in sightings {
            let sib_keys: Vec<&ArticleKey> = sibs.iter().map(|s| &keys[*s]).collect();
            // Bypass the one-per-language rule: the index itself must not care.
            let mut set = links(&keys[*k], &[]);
            set.siblings = sib_keys.into_iter().filter(|s| **s != keys[*k]).cloned().collect();
            idx.cluster_of(&keys[*k], &set);
        }
        let mut groups: HashMap<ClusterId, BTreeSet<usize>> = HashMap::new();
        let all: BTreeSet<usize> = sightings.iter().flat_map(|(k, s)| std::iter::once(*k).chain(s.iter().copied())).collect();
        for i in all {
            let id = idx.lookup(&keys[i]).expect("indexed");
            groups.entry(id).or_default().insert(i);
        }
        assert_eq!(groups.len(), idx.cluster_count());
        groups.into_values().collect()
    }

    fn sightings() -> impl Strategy<Value = Vec<(usize, Vec<usize>)>> {
        prop::collection::vec((0usize..50, prop::collection::vec(0usize..50, 0..4)), 1..60)
    }

    proptest! {
        #[test]
        fn partition_equals_connected_components(s in sightings()) {
            prop_assert_eq!(partition(&s), components(&s));
        }

        #[test]
        fn partition_is_order_independent(s in sightings(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = s.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(partition(&s), partition(&shuffled));
        }
    }
}
