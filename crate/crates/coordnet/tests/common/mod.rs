//! Shared test oracles, deliberately independent of the pipeline's
//! windowing and grouping machinery.
#![allow(dead_code)] // each test target uses a different subset

use std::collections::BTreeSet;

use coordnet::{
    coaction_stream, extract_actions, partition, ActionType, CoActionPair, ExtractOptions, Post,
    WindowConfig,
};

/// Canonical identity of a detected account pair.
pub type PairKey = (String, String, ActionType, String);

pub fn pair_key(pair: &CoActionPair) -> PairKey {
    (
        pair.account_a.clone(),
        pair.account_b.clone(),
        pair.action_type,
        pair.reason.clone(),
    )
}

/// O(n^2) brute force over all post pairs: same type, same reason,
/// distinct accounts, timestamps closer than gamma. No windows involved.
pub fn brute_force_pairs(
    posts: &[Post],
    gamma: u64,
    types: &BTreeSet<ActionType>,
) -> BTreeSet<PairKey> {
    let actions: Vec<_> = posts
        .iter()
        .flat_map(|post| extract_actions(post))
        .filter(|act| types.contains(&act.action_type))
        .collect();
    let mut found = BTreeSet::new();
    for i in 0..actions.len() {
        for j in (i + 1)..actions.len() {
            let (x, y) = (&actions[i], &actions[j]);
            if x.action_type == y.action_type
                && x.reason == y.reason
                && x.account_id != y.account_id
                && (x.timestamp - y.timestamp).unsigned_abs() < gamma
            {
                let (a, b) = if x.account_id <= y.account_id {
                    (&x.account_id, &y.account_id)
                } else {
                    (&y.account_id, &x.account_id)
                };
                found.insert((a.clone(), b.clone(), x.action_type, x.reason.clone()));
            }
        }
    }
    found
}

/// Run the real detection path and reduce it to pair keys.
pub fn detect_keys(
    posts: &[Post],
    gamma: u64,
    stride: u64,
    types: &BTreeSet<ActionType>,
) -> BTreeSet<PairKey> {
    detect_pairs(posts, gamma, stride, types)
        .iter()
        .map(pair_key)
        .collect()
}

pub fn detect_pairs(
    posts: &[Post],
    gamma: u64,
    stride: u64,
    types: &BTreeSet<ActionType>,
) -> Vec<CoActionPair> {
    let anchor = WindowConfig::auto_anchor(gamma, posts);
    let cfg = WindowConfig::new(gamma, stride, anchor).unwrap();
    let windows = partition(posts, &cfg);
    coaction_stream(&windows, types, ExtractOptions::default())
}

pub fn all_types() -> BTreeSet<ActionType> {
    ActionType::ALL.iter().copied().collect()
}

/// Minimal union-find, used as the independent connected-components oracle.
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(size: usize) -> Self {
        Self {
            parent: (0..size).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}
