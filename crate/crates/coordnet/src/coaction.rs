//! Co-action pairing: finding every pair of accounts linked by the same
//! (action type, reason) inside a time window.
//!
//! Grouping is a hash join by (type, reason) per window, so the quadratic
//! pair blowup stays confined to each reason group.

use std::collections::{BTreeMap, BTreeSet};

use crate::post::{extract_actions_with, ActionType, ExtractOptions};
use crate::window::Window;

/// The evidence unit: two accounts tied by matching actions inside one
/// window.
///
/// Canonical form: `account_a` is the lexicographically smaller account and
/// `t_a` is *its* action time, so swapping the input roles never changes
/// the pair. Both actions fall inside the identified window, hence
/// `|t_a - t_b| < gamma`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoActionPair {
    pub account_a: String,
    pub account_b: String,
    pub action_type: ActionType,
    pub reason: String,
    pub t_a: i64,
    pub t_b: i64,
    pub window_index: u64,
}

impl CoActionPair {
    /// The action timestamp of `account`, if it participates in this pair.
    pub fn timestamp_of(&self, account: &str) -> Option<i64> {
        if account == self.account_a {
            Some(self.t_a)
        } else if account == self.account_b {
            Some(self.t_b)
        } else {
            None
        }
    }

    /// The other participant and its timestamp, given one participant.
    pub fn counterpart(&self, account: &str) -> Option<(&str, i64)> {
        if account == self.account_a {
            Some((&self.account_b, self.t_b))
        } else if account == self.account_b {
            Some((&self.account_a, self.t_a))
        } else {
            None
        }
    }

    /// Identity of the underlying two actions, ignoring the window that
    /// happened to capture them.
    fn action_key(&self) -> (String, String, ActionType, String, i64, i64) {
        (
            self.account_a.clone(),
            self.account_b.clone(),
            self.action_type,
            self.reason.clone(),
            self.t_a,
            self.t_b,
        )
    }
}

/// Find every co-action pair inside one window.
///
/// For each (action type, reason) group present in the window, one pair is
/// emitted per unordered pair of distinct accounts, pairing each account's
/// earliest matching action in the window. Pairs are deduplicated per
/// (accounts, type, reason, window) and returned in canonical sort order.
pub fn find_coactions(
    window: &Window,
    types: &BTreeSet<ActionType>,
    opts: ExtractOptions,
) -> Vec<CoActionPair> {
    // (type, reason) -> account -> earliest (timestamp, post id).
    let mut groups: BTreeMap<(ActionType, String), BTreeMap<String, (i64, String)>> =
        BTreeMap::new();
    for post in &window.posts {
        for act in extract_actions_with(post, opts) {
            if !types.contains(&act.action_type) {
                continue;
            }
            let members = groups.entry((act.action_type, act.reason)).or_default();
            match members.entry(act.account_id) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert((act.timestamp, act.post_id));
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    let current = slot.get();
                    if (act.timestamp, &act.post_id) < (current.0, &current.1) {
                        slot.insert((act.timestamp, act.post_id));
                    }
                }
            }
        }
    }

    let mut pairs = Vec::new();
    for ((action_type, reason), members) in &groups {
        if members.len() < 2 {
            continue;
        }
        let members: Vec<(&String, &(i64, String))> = members.iter().collect();
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                let (acct_a, (t_a, _)) = members[i];
                let (acct_b, (t_b, _)) = members[j];
                pairs.push(CoActionPair {
                    account_a: acct_a.clone(),
                    account_b: acct_b.clone(),
                    action_type: *action_type,
                    reason: reason.clone(),
                    t_a: *t_a,
                    t_b: *t_b,
                    window_index: window.index,
                });
            }
        }
    }
    pairs.sort();
    pairs
}

/// Concatenate per-window co-actions across a windowed stream.
///
/// In overlapping mode the same two underlying actions can surface in
/// several shared windows; such duplicates are collapsed to the earliest
/// window's occurrence, keyed by (accounts, type, reason, t_a, t_b). The
/// result is in canonical sort order.
pub fn coaction_stream(
    windows: &[Window],
    types: &BTreeSet<ActionType>,
    opts: ExtractOptions,
) -> Vec<CoActionPair> {
    let mut seen = BTreeSet::new();
    let mut stream = Vec::new();
    for window in windows {
        for pair in find_coactions(window, types, opts) {
            if seen.insert(pair.action_key()) {
                stream.push(pair);
            }
        }
    }
    stream.sort();
    stream
}
