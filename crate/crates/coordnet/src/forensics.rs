//! Temporal forensics over extracted communities: who posts first, who
//! merely follows, and what the participating accounts look like.
//!
//! An account that co-acts strictly after the same partner over and over is
//! a cheerleader: it amplifies the partner, possibly without the partner's
//! knowledge. The first-poster grid makes that pattern visible, the
//! cheerleader scores flag it, and the profiles carry the follower/friend
//! reputation heuristic that high-rate automated accounts tend to maintain.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::Deserialize;

use crate::coaction::CoActionPair;
use crate::hcc::Hcc;
use crate::post::Post;
use crate::{Error, Result};

const SECONDS_PER_DAY: f64 = 86_400.0;

/// Ordered-pair co-action timing counts for the members of one community.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FirstPosterGrid {
    /// Sorted community members.
    pub accounts: Vec<String>,
    /// (row, column) -> counts. Only pairs with at least one co-action are
    /// materialized; the diagonal never appears.
    pub cells: BTreeMap<(String, String), CellStats>,
}

/// One grid cell: how often the pair co-acted and how often the row
/// account acted strictly first. Equal timestamps count as ties, credited
/// to neither side.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CellStats {
    pub total: u64,
    pub row_first: u64,
}

impl FirstPosterGrid {
    pub fn cell(&self, row: &str, column: &str) -> CellStats {
        self.cells
            .get(&(row.to_string(), column.to_string()))
            .copied()
            .unwrap_or_default()
    }

    /// Co-actions where neither account was first.
    pub fn ties(&self, a: &str, b: &str) -> u64 {
        let forward = self.cell(a, b);
        let backward = self.cell(b, a);
        forward.total - forward.row_first - backward.row_first
    }
}

/// Tally relative co-action timings for every ordered pair of community
/// members. Pairs not involving two members are ignored.
pub fn timing_grid(hcc: &Hcc, pairs: &[CoActionPair]) -> FirstPosterGrid {
    let mut cells: BTreeMap<(String, String), CellStats> = BTreeMap::new();
    for pair in pairs {
        if !hcc.accounts.contains(&pair.account_a) || !hcc.accounts.contains(&pair.account_b) {
            continue;
        }
        let forward = cells
            .entry((pair.account_a.clone(), pair.account_b.clone()))
            .or_default();
        forward.total += 1;
        if pair.t_a < pair.t_b {
            forward.row_first += 1;
        }
        let backward = cells
            .entry((pair.account_b.clone(), pair.account_a.clone()))
            .or_default();
        backward.total += 1;
        if pair.t_b < pair.t_a {
            backward.row_first += 1;
        }
    }
    FirstPosterGrid {
        accounts: hcc.accounts.iter().cloned().collect(),
        cells,
    }
}

/// One account's follower behaviour towards one partner.
#[derive(Debug, Clone, PartialEq)]
pub struct CheerleaderReport {
    pub account: String,
    pub partner: String,
    /// Co-actions between the two.
    pub total: u64,
    /// Share of co-actions where `account` acted strictly second.
    pub follower_fraction: f64,
    pub flagged: bool,
}

/// Score every ordered pair with at least `min_pairs` co-actions. An
/// account is flagged as a cheerleader of its partner when its follower
/// fraction reaches `threshold` (sensible thresholds sit in `(0.5, 1]`).
pub fn cheerleader_scores(
    grid: &FirstPosterGrid,
    min_pairs: u64,
    threshold: f64,
) -> Vec<CheerleaderReport> {
    let mut reports = Vec::new();
    for ((account, partner), stats) in &grid.cells {
        if stats.total < min_pairs {
            continue;
        }
        let ties = grid.ties(account, partner);
        let followed = stats.total - stats.row_first - ties;
        let follower_fraction = followed as f64 / stats.total as f64;
        reports.push(CheerleaderReport {
            account: account.clone(),
            partner: partner.clone(),
            total: stats.total,
            follower_fraction,
            flagged: follower_fraction >= threshold,
        });
    }
    reports
}

/// The follower/friend reputation heuristic: `followers / (friends +
/// followers)`, and 0 when the account has neither.
pub fn reputation(friends: u64, followers: u64) -> f64 {
    if friends + followers == 0 {
        0.0
    } else {
        followers as f64 / (friends + followers) as f64
    }
}

/// Sidecar metadata for one account, as collected by the platform.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct AccountMeta {
    pub user_id: String,
    pub statuses_count: u64,
    /// Account creation time, epoch seconds. Optional: profiles without it
    /// simply lack age and rate.
    #[serde(default)]
    pub created_at: Option<i64>,
    pub friends_count: u64,
    pub followers_count: u64,
    /// External bot rating, passed through verbatim and never computed.
    #[serde(default)]
    pub bot_rating: Option<f64>,
}

/// Result of parsing a metadata sidecar.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetadataOutcome {
    pub accounts: BTreeMap<String, AccountMeta>,
    pub skipped: u64,
}

/// Parse newline-delimited account metadata. Records with missing required
/// keys are skipped and tallied; later duplicates of a `user_id` are
/// skipped too.
pub fn parse_metadata<I, S>(lines: I) -> MetadataOutcome
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut accounts = BTreeMap::new();
    let mut skipped = 0u64;
    for line in lines {
        let line = line.as_ref();
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<AccountMeta>(line) {
            Ok(meta) if !meta.user_id.is_empty() => {
                if accounts.contains_key(&meta.user_id) {
                    skipped += 1;
                } else {
                    accounts.insert(meta.user_id.clone(), meta);
                }
            }
            _ => skipped += 1,
        }
    }
    MetadataOutcome { accounts, skipped }
}

/// [`parse_metadata`] over a buffered reader.
pub fn parse_metadata_reader<R: BufRead>(reader: R) -> Result<MetadataOutcome> {
    let mut collected = Vec::new();
    let mut skipped_encoding = 0u64;
    for line in reader.lines() {
        match line {
            Ok(l) => collected.push(l),
            Err(e) if e.kind() == std::io::ErrorKind::InvalidData => skipped_encoding += 1,
            Err(e) => return Err(Error::Io(e)),
        }
    }
    let mut outcome = parse_metadata(collected.iter());
    outcome.skipped += skipped_encoding;
    Ok(outcome)
}

/// Derived account profile.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountProfile {
    pub account: String,
    pub tweets: u64,
    /// Days from account creation to the dataset end; absent without a
    /// creation time.
    pub age_days: Option<f64>,
    pub tweets_per_day: Option<f64>,
    pub friends: u64,
    pub followers: u64,
    pub reputation: f64,
    pub bot_rating: Option<f64>,
}

/// Derive a profile from sidecar metadata. `dataset_end` is the epoch
/// second the collection stops at (normally the last post's timestamp).
pub fn profile_account(meta: &AccountMeta, dataset_end: i64) -> AccountProfile {
    let age_days = meta
        .created_at
        .map(|created| (dataset_end - created) as f64 / SECONDS_PER_DAY);
    let tweets_per_day = match age_days {
        Some(age) if age > 0.0 => Some(meta.statuses_count as f64 / age),
        _ => None,
    };
    AccountProfile {
        account: meta.user_id.clone(),
        tweets: meta.statuses_count,
        age_days,
        tweets_per_day,
        friends: meta.friends_count,
        followers: meta.followers_count,
        reputation: reputation(meta.friends_count, meta.followers_count),
        bot_rating: meta.bot_rating,
    }
}

/// An account's posting counts over aligned time buckets.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityTimeline {
    pub account: String,
    pub bucket_seconds: u64,
    /// (bucket start, post count), one entry per bucket across the whole
    /// dataset range, zero counts included for plot continuity.
    pub counts: Vec<(i64, u64)>,
}

/// Bucket an account's posting activity over the full range of `posts`
/// (normally the whole dataset, so member timelines share an axis).
pub fn activity_timeline(account: &str, posts: &[Post], bucket_seconds: u64) -> ActivityTimeline {
    assert!(bucket_seconds >= 1, "bucket_seconds must be at least 1");
    let bucket = bucket_seconds as i64;
    let floor = |t: i64| t.div_euclid(bucket) * bucket;
    let mut counts = Vec::new();
    if let (Some(first), Some(last)) = (
        posts.iter().map(|p| p.timestamp).min(),
        posts.iter().map(|p| p.timestamp).max(),
    ) {
        let mut tallies: BTreeMap<i64, u64> = BTreeMap::new();
        let mut start = floor(first);
        while start <= floor(last) {
            tallies.insert(start, 0);
            start += bucket;
        }
        for post in posts {
            if post.account_id == account {
                *tallies.entry(floor(post.timestamp)).or_insert(0) += 1;
            }
        }
        counts = tallies.into_iter().collect();
    }
    ActivityTimeline {
        account: account.to_string(),
        bucket_seconds,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::post::ActionType;
    use proptest::prelude::*;

    fn member_hcc(accounts: &[&str]) -> Hcc {
        Hcc {
            id: 0,
            accounts: accounts.iter().map(|s| s.to_string()).collect(),
            edges: BTreeMap::new(),
            total_weight: 0.0,
            star_hub: None,
            star_coefficient: 0.0,
        }
    }

    fn pair_at(a: &str, b: &str, t_a: i64, t_b: i64, n: u64) -> CoActionPair {
        let (account_a, account_b, t_a, t_b) = if a <= b {
            (a, b, t_a, t_b)
        } else {
            (b, a, t_b, t_a)
        };
        CoActionPair {
            account_a: account_a.to_string(),
            account_b: account_b.to_string(),
            action_type: ActionType::CoRetweet,
            reason: format!("T{n}"),
            t_a,
            t_b,
            window_index: n,
        }
    }

    #[test]
    fn grid_counts_always_first() {
        let hcc = member_hcc(&["A", "B"]);
        let pairs: Vec<CoActionPair> = (0..74)
            .map(|n| pair_at("A", "B", n as i64 * 100, n as i64 * 100 + 3, n))
            .collect();
        let grid = timing_grid(&hcc, &pairs);
        assert_eq!(grid.cell("A", "B"), CellStats { total: 74, row_first: 74 });
        assert_eq!(grid.cell("B", "A"), CellStats { total: 74, row_first: 0 });
        assert_eq!(grid.ties("A", "B"), 0);
    }

    #[test]
    fn grid_counts_alternating_leaders() {
        let hcc = member_hcc(&["A", "B"]);
        let mut pairs = Vec::new();
        for n in 0..64u64 {
            let (t_a, t_b) = if n % 2 == 0 { (0, 5) } else { (5, 0) };
            pairs.push(pair_at(
                "A",
                "B",
                n as i64 * 100 + t_a,
                n as i64 * 100 + t_b,
                n,
            ));
        }
        let grid = timing_grid(&hcc, &pairs);
        assert_eq!(grid.cell("A", "B"), CellStats { total: 64, row_first: 32 });
        assert_eq!(grid.cell("B", "A"), CellStats { total: 64, row_first: 32 });
    }

    #[test]
    fn equal_timestamps_are_ties() {
        let hcc = member_hcc(&["A", "B"]);
        let pairs = vec![pair_at("A", "B", 10, 10, 0), pair_at("A", "B", 20, 20, 1)];
        let grid = timing_grid(&hcc, &pairs);
        assert_eq!(grid.cell("A", "B"), CellStats { total: 2, row_first: 0 });
        assert_eq!(grid.cell("B", "A"), CellStats { total: 2, row_first: 0 });
        assert_eq!(grid.ties("A", "B"), 2);
    }

    #[test]
    fn grid_ignores_non_members() {
        let hcc = member_hcc(&["A", "B"]);
        let pairs = vec![pair_at("A", "X", 0, 1, 0), pair_at("A", "B", 0, 1, 1)];
        let grid = timing_grid(&hcc, &pairs);
        assert_eq!(grid.cell("A", "B").total, 1);
        assert_eq!(grid.cell("A", "X").total, 0);
    }

    #[test]
    fn cheerleader_flagging() {
        let hcc = member_hcc(&["A", "B"]);
        let pairs: Vec<CoActionPair> = (0..74)
            .map(|n| pair_at("A", "B", n as i64 * 100, n as i64 * 100 + 3, n))
            .collect();
        let grid = timing_grid(&hcc, &pairs);
        let reports = cheerleader_scores(&grid, 10, 0.95);
        let b_report = reports.iter().find(|r| r.account == "B").unwrap();
        assert_eq!(b_report.follower_fraction, 1.0);
        assert!(b_report.flagged);
        let a_report = reports.iter().find(|r| r.account == "A").unwrap();
        assert_eq!(a_report.follower_fraction, 0.0);
        assert!(!a_report.flagged);
    }

    #[test]
    fn balanced_pair_is_not_flagged() {
        let hcc = member_hcc(&["A", "B"]);
        let mut pairs = Vec::new();
        for n in 0..64u64 {
            let (t_a, t_b) = if n % 2 == 0 { (0, 5) } else { (5, 0) };
            pairs.push(pair_at("A", "B", n as i64 * 100 + t_a, n as i64 * 100 + t_b, n));
        }
        let grid = timing_grid(&hcc, &pairs);
        for report in cheerleader_scores(&grid, 10, 0.9) {
            assert_eq!(report.follower_fraction, 0.5);
            assert!(!report.flagged);
        }
    }

    #[test]
    fn support_floor_applies() {
        let hcc = member_hcc(&["A", "B"]);
        let pairs: Vec<CoActionPair> = (0..3)
            .map(|n| pair_at("A", "B", n as i64 * 100, n as i64 * 100 + 1, n))
            .collect();
        let grid = timing_grid(&hcc, &pairs);
        assert!(cheerleader_scores(&grid, 10, 0.9).is_empty());
    }

    #[test]
    fn reputation_reproduces_observed_accounts() {
        assert!((reputation(1_800, 3_600) - 0.67).abs() <= 0.005);
        assert!((reputation(24, 118) - 0.83).abs() <= 0.005);
        assert_eq!(reputation(0, 0), 0.0);
    }

    #[test]
    fn profile_rates_match_observed_accounts() {
        // 103,300 tweets over 8.8 years -> about 32.1 tweets/day.
        let end = 1_600_000_000i64;
        let meta = AccountMeta {
            user_id: "9".into(),
            statuses_count: 103_300,
            created_at: Some(end - (8.8 * 365.25 * SECONDS_PER_DAY) as i64),
            friends_count: 2_400,
            followers_count: 1_700,
            bot_rating: Some(0.80),
        };
        let profile = profile_account(&meta, end);
        assert!((profile.tweets_per_day.unwrap() - 32.1).abs() <= 0.5);
        assert_eq!(profile.bot_rating, Some(0.80));

        // 213,400 tweets over 6.4 years -> about 92.1 tweets/day.
        let meta = AccountMeta {
            user_id: "2".into(),
            statuses_count: 213_400,
            created_at: Some(end - (6.4 * 365.25 * SECONDS_PER_DAY) as i64),
            friends_count: 1_800,
            followers_count: 3_600,
            bot_rating: None,
        };
        let profile = profile_account(&meta, end);
        assert!((profile.tweets_per_day.unwrap() - 92.1).abs() <= 1.5);
    }

    #[test]
    fn profile_handles_degenerate_inputs() {
        let meta = AccountMeta {
            user_id: "x".into(),
            statuses_count: 0,
            created_at: Some(0),
            friends_count: 0,
            followers_count: 0,
            bot_rating: None,
        };
        let profile = profile_account(&meta, 86_400);
        assert_eq!(profile.tweets_per_day, Some(0.0));
        assert_eq!(profile.reputation, 0.0);

        let missing_created = AccountMeta {
            created_at: None,
            ..meta
        };
        let profile = profile_account(&missing_created, 86_400);
        assert_eq!(profile.age_days, None);
        assert_eq!(profile.tweets_per_day, None);
    }

    #[test]
    fn metadata_parses_and_skips() {
        let lines = [
            r#"{"user_id":"u1","statuses_count":10,"created_at":100,"friends_count":5,"followers_count":7,"bot_rating":0.9}"#,
            r#"{"user_id":"u2","statuses_count":3,"friends_count":1,"followers_count":1}"#,
            r#"{"user_id":"u3","statuses_count":3}"#,
            r#"{"user_id":"u1","statuses_count":99,"friends_count":0,"followers_count":0}"#,
        ];
        let out = parse_metadata(lines);
        assert_eq!(out.accounts.len(), 2);
        assert_eq!(out.skipped, 2);
        assert_eq!(out.accounts["u1"].statuses_count, 10);
        assert_eq!(out.accounts["u2"].created_at, None);
    }

    fn post_by(account: &str, t: i64, n: usize) -> Post {
        Post {
            post_id: format!("p{n:03}"),
            account_id: account.to_string(),
            timestamp: t,
            retweet_of: None,
            hashtags: Vec::new(),
            urls: Vec::new(),
            mentions: Vec::new(),
            conversation_id: None,
        }
    }

    #[test]
    fn timeline_single_bucket() {
        let posts = vec![
            post_by("A", 100, 0),
            post_by("A", 200, 1),
            post_by("A", 300, 2),
        ];
        let weekly = activity_timeline("A", &posts, 604_800);
        assert_eq!(weekly.counts, vec![(0, 3)]);
    }

    #[test]
    fn timeline_splits_on_bucket_boundary() {
        let posts = vec![post_by("A", 99, 0), post_by("A", 100, 1)];
        let timeline = activity_timeline("A", &posts, 100);
        assert_eq!(timeline.counts, vec![(0, 1), (100, 1)]);
    }

    #[test]
    fn timeline_includes_zero_buckets_for_inactive_span() {
        let posts = vec![
            post_by("A", 0, 0),
            post_by("A", 950, 1),
            post_by("B", 500, 2),
        ];
        let timeline = activity_timeline("A", &posts, 100);
        assert_eq!(timeline.counts.len(), 10, "whole dataset range is covered");
        let zero_run = timeline.counts[1..9].iter().all(|&(_, c)| c == 0);
        assert!(zero_run, "inactive middle must show as zero buckets");
        let total: u64 = timeline.counts.iter().map(|&(_, c)| c).sum();
        assert_eq!(total, 2, "counts conserve the account's post total");
    }

    proptest! {
        #[test]
        fn grid_antisymmetry_invariant(
            timings in proptest::collection::vec((0i64..50, 0i64..50), 1..60)
        ) {
            let hcc = member_hcc(&["A", "B"]);
            let pairs: Vec<CoActionPair> = timings
                .iter()
                .enumerate()
                .map(|(n, &(t_a, t_b))| pair_at("A", "B", t_a, t_b, n as u64))
                .collect();
            let grid = timing_grid(&hcc, &pairs);
            let ab = grid.cell("A", "B");
            let ba = grid.cell("B", "A");
            prop_assert_eq!(ab.total, ba.total);
            prop_assert_eq!(ab.total, timings.len() as u64);
            prop_assert_eq!(ab.row_first + ba.row_first + grid.ties("A", "B"), ab.total);
        }

        #[test]
        fn reputation_bounds_and_monotonicity(friends in 0u64..10_000, followers in 0u64..10_000) {
            let r = reputation(friends, followers);
            prop_assert!((0.0..=1.0).contains(&r));
            if friends > 0 {
                prop_assert!(reputation(friends - 1, followers) >= r);
            }
            prop_assert!(reputation(friends, followers + 1) >= r);
            if friends > 0 {
                let balanced = reputation(friends, friends);
                prop_assert!((balanced - 0.5).abs() < 1e-12);
            }
        }

        #[test]
        fn cheerleader_flag_invariant_under_relabeling(
            timings in proptest::collection::vec((0i64..20, 0i64..20), 10..40)
        ) {
            // The same role keeps its flag when an account is renamed so
            // that its sort order flips ("A" < "B" but "Z" > "B").
            let build = |first: &str, second: &str| {
                let hcc = member_hcc(&[first, second]);
                let pairs: Vec<CoActionPair> = timings
                    .iter()
                    .enumerate()
                    .map(|(n, &(t_x, t_y))| pair_at(first, second, t_x, t_y, n as u64))
                    .collect();
                cheerleader_scores(&timing_grid(&hcc, &pairs), 5, 0.9)
            };
            let forward = build("A", "B");
            let renamed = build("Z", "B");
            let flag_of = |reports: &[CheerleaderReport], account: &str| {
                reports.iter().find(|r| r.account == account).map(|r| r.flagged)
            };
            prop_assert_eq!(flag_of(&forward, "A"), flag_of(&renamed, "Z"));
            prop_assert_eq!(flag_of(&forward, "B"), flag_of(&renamed, "B"));
        }
    }
}
