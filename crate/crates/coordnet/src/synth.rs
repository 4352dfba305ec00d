//! Seeded synthetic post streams with planted ground truth.
//!
//! Background posts use globally unique reasons, so they can never co-act
//! with anything: every detected edge on a default-mode stream traces back
//! to a planted group or cheerleader pair. The optional realistic mode
//! draws background reasons from a Zipf pool instead, which deliberately
//! produces incidental coordination for false-positive measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::post::{ActionType, Post};
use crate::{Error, Result};

/// Identifier of the generator's random stream, recorded in the truth
/// output so reimplementations can compare via the truth file instead of
/// byte identity.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64";

fn default_pool_size() -> u32 {
    1_000
}

/// Generator configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_background_accounts: u32,
    pub n_background_posts: u32,
    /// Length of the simulated collection in seconds; all timestamps fall
    /// in `[0, duration_seconds)`.
    pub duration_seconds: u32,
    #[serde(default)]
    pub groups: Vec<PlantedGroup>,
    #[serde(default)]
    pub cheerleaders: Vec<CheerleaderPair>,
    /// Reuse background reasons from a Zipf pool instead of keeping them
    /// unique, to measure incidental coordination.
    #[serde(default)]
    pub realistic: bool,
    /// Pool size for realistic mode.
    #[serde(default = "default_pool_size")]
    pub realistic_pool_size: u32,
}

/// A group of accounts that repeatedly performs the same fresh action
/// within a tight time spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedGroup {
    pub accounts: Vec<String>,
    pub action_type: ActionType,
    pub n_coordination_events: u32,
    /// Maximum intra-event timestamp jitter; keep it under the gamma the
    /// stream will be analysed with, so events stay detectable.
    pub spread_seconds: u32,
}

/// A leader/follower pair: the follower reacts strictly after the leader,
/// within `reaction_delay_max` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheerleaderPair {
    pub leader: String,
    pub follower: String,
    pub reaction_delay_max: u32,
    pub n_events: u32,
}

/// What the generator planted, for oracle-style verification.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub rng_algorithm: String,
    pub seed: u64,
    pub edges: Vec<TruthEdge>,
    pub cheerleaders: Vec<TruthCheerleader>,
}

/// One planted edge: the accounts and the co-action pair count the
/// pipeline should attribute to them when every event is captured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthEdge {
    pub account_a: String,
    pub account_b: String,
    pub expected_pair_count: u32,
}

/// One planted cheerleader relationship.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthCheerleader {
    pub leader: String,
    pub follower: String,
    pub n_events: u32,
}

impl GroundTruth {
    /// Serialize as newline-delimited self-describing records.
    pub fn to_jsonl(&self) -> String {
        let mut lines = Vec::new();
        let meta = serde_json::json!({
            "kind": "meta",
            "rng_algorithm": self.rng_algorithm,
            "seed": self.seed,
        });
        lines.push(meta.to_string());
        for edge in &self.edges {
            let rec = serde_json::json!({
                "kind": "edge",
                "account_a": edge.account_a,
                "account_b": edge.account_b,
                "expected_pair_count": edge.expected_pair_count,
            });
            lines.push(rec.to_string());
        }
        for cl in &self.cheerleaders {
            let rec = serde_json::json!({
                "kind": "cheerleader",
                "leader": cl.leader,
                "follower": cl.follower,
                "n_events": cl.n_events,
            });
            lines.push(rec.to_string());
        }
        lines.join("\n") + "\n"
    }

    pub fn from_jsonl(text: &str) -> Result<GroundTruth> {
        let mut truth = GroundTruth::default();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value = serde_json::from_str(line)
                .map_err(|e| Error::Parse(format!("truth line {}: {e}", lineno + 1)))?;
            let kind = value["kind"].as_str().unwrap_or_default().to_string();
            match kind.as_str() {
                "meta" => {
                    truth.rng_algorithm =
                        value["rng_algorithm"].as_str().unwrap_or_default().to_string();
                    truth.seed = value["seed"].as_u64().unwrap_or_default();
                }
                "edge" => truth.edges.push(
                    serde_json::from_value(value)
                        .map_err(|e| Error::Parse(format!("truth line {}: {e}", lineno + 1)))?,
                ),
                "cheerleader" => truth.cheerleaders.push(
                    serde_json::from_value(value)
                        .map_err(|e| Error::Parse(format!("truth line {}: {e}", lineno + 1)))?,
                ),
                other => {
                    return Err(Error::Parse(format!(
                        "truth line {}: unknown record kind {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(truth)
    }
}

fn background_account_name(index: u32) -> String {
    format!("bg{index:06}")
}

fn validate(cfg: &SynthConfig) -> Result<()> {
    if cfg.duration_seconds == 0 {
        return Err(Error::Config("duration_seconds must be positive".into()));
    }
    if cfg.n_background_posts > 0 && cfg.n_background_accounts == 0 {
        return Err(Error::Config(
            "background posts need at least one background account".into(),
        ));
    }
    let background: std::collections::BTreeSet<String> = (0..cfg.n_background_accounts)
        .map(background_account_name)
        .collect();
    let check_account = |account: &str| -> Result<()> {
        if background.contains(account) {
            return Err(Error::Config(format!(
                "planted account {account:?} collides with the background account space"
            )));
        }
        Ok(())
    };
    for (i, group) in cfg.groups.iter().enumerate() {
        if group.accounts.len() < 2 {
            return Err(Error::Config(format!(
                "planted group {i} needs at least 2 accounts"
            )));
        }
        let distinct: std::collections::BTreeSet<&String> = group.accounts.iter().collect();
        if distinct.len() != group.accounts.len() {
            return Err(Error::Config(format!(
                "planted group {i} repeats an account"
            )));
        }
        if group.n_coordination_events == 0 {
            return Err(Error::Config(format!(
                "planted group {i} needs at least 1 event"
            )));
        }
        if group.spread_seconds >= cfg.duration_seconds {
            return Err(Error::Config(format!(
                "planted group {i} spread exceeds the stream duration"
            )));
        }
        for account in &group.accounts {
            check_account(account)?;
        }
    }
    for (i, cl) in cfg.cheerleaders.iter().enumerate() {
        if cl.leader == cl.follower {
            return Err(Error::Config(format!(
                "cheerleader pair {i} uses one account for both roles"
            )));
        }
        if cl.reaction_delay_max == 0 {
            return Err(Error::Config(format!(
                "cheerleader pair {i} needs reaction_delay_max >= 1"
            )));
        }
        if cl.n_events == 0 {
            return Err(Error::Config(format!(
                "cheerleader pair {i} needs at least 1 event"
            )));
        }
        if cl.reaction_delay_max >= cfg.duration_seconds {
            return Err(Error::Config(format!(
                "cheerleader pair {i} delay exceeds the stream duration"
            )));
        }
        check_account(&cl.leader)?;
        check_account(&cl.follower)?;
    }
    Ok(())
}

/// Inverse-CDF sampler over `1/k` rank weights (Zipf with exponent 1).
struct ZipfPool {
    cumulative: Vec<f64>,
}

impl ZipfPool {
    fn new(size: u32) -> Self {
        let mut cumulative = Vec::with_capacity(size as usize);
        let mut acc = 0.0;
        for rank in 1..=size.max(1) {
            acc += 1.0 / rank as f64;
            cumulative.push(acc);
        }
        Self { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("pool is never empty");
        let needle = rng.random_range(0.0..total);
        self.cumulative.partition_point(|&c| c <= needle)
    }
}

/// Generate a post stream plus its ground truth. Deterministic for a fixed
/// config: the same seed always yields byte-identical output.
pub fn generate(cfg: &SynthConfig) -> Result<(Vec<Post>, GroundTruth)> {
    validate(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut posts = Vec::new();
    let mut next_post = 0u64;
    let duration = cfg.duration_seconds as i64;

    let make_post = |account: &str, t: i64, ty: ActionType, reason: String, n: &mut u64| {
        let post_id = format!("p{:08}", *n);
        *n += 1;
        let mut post = Post {
            post_id: post_id.clone(),
            account_id: account.to_string(),
            timestamp: t,
            retweet_of: None,
            hashtags: Vec::new(),
            urls: Vec::new(),
            mentions: Vec::new(),
            conversation_id: None,
        };
        match ty {
            ActionType::CoRetweet => post.retweet_of = Some(reason),
            ActionType::CoHashtag => post.hashtags = vec![reason],
            ActionType::CoUrl => post.urls = vec![format!("https://synth.example/{reason}")],
            ActionType::CoMention => post.mentions = vec![reason],
            ActionType::CoConversation => post.conversation_id = Some(reason),
        }
        post
    };

    let pool = ZipfPool::new(cfg.realistic_pool_size);
    for k in 0..cfg.n_background_posts {
        let account = background_account_name(rng.random_range(0..cfg.n_background_accounts));
        let t = rng.random_range(0..duration);
        let reason = if cfg.realistic {
            format!("pop-rt-{:05}", pool.sample(&mut rng))
        } else {
            format!("bg-rt-{k:08}")
        };
        posts.push(make_post(
            &account,
            t,
            ActionType::CoRetweet,
            reason,
            &mut next_post,
        ));
    }

    let mut truth = GroundTruth {
        rng_algorithm: RNG_ALGORITHM.to_string(),
        seed: cfg.seed,
        ..GroundTruth::default()
    };

    for (gi, group) in cfg.groups.iter().enumerate() {
        let spread = group.spread_seconds as i64;
        for event in 0..group.n_coordination_events {
            let reason = format!("g{gi}-e{event}");
            let base = rng.random_range(0..duration - spread);
            for account in &group.accounts {
                let t = base + rng.random_range(0..=spread);
                posts.push(make_post(
                    account,
                    t,
                    group.action_type,
                    reason.clone(),
                    &mut next_post,
                ));
            }
        }
        for i in 0..group.accounts.len() {
            for j in (i + 1)..group.accounts.len() {
                let (mut a, mut b) = (group.accounts[i].clone(), group.accounts[j].clone());
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                truth.edges.push(TruthEdge {
                    account_a: a,
                    account_b: b,
                    expected_pair_count: group.n_coordination_events,
                });
            }
        }
    }

    for (ci, cl) in cfg.cheerleaders.iter().enumerate() {
        let delay_max = cl.reaction_delay_max as i64;
        for event in 0..cl.n_events {
            let reason = format!("cl{ci}-e{event}");
            let lead_t = rng.random_range(0..duration - delay_max);
            let follow_t = lead_t + rng.random_range(1..=delay_max);
            posts.push(make_post(
                &cl.leader,
                lead_t,
                ActionType::CoRetweet,
                reason.clone(),
                &mut next_post,
            ));
            posts.push(make_post(
                &cl.follower,
                follow_t,
                ActionType::CoRetweet,
                reason,
                &mut next_post,
            ));
        }
        let (mut a, mut b) = (cl.leader.clone(), cl.follower.clone());
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        truth.edges.push(TruthEdge {
            account_a: a,
            account_b: b,
            expected_pair_count: cl.n_events,
        });
        truth.cheerleaders.push(TruthCheerleader {
            leader: cl.leader.clone(),
            follower: cl.follower.clone(),
            n_events: cl.n_events,
        });
    }

    posts.sort_by(|a, b| (a.timestamp, &a.post_id).cmp(&(b.timestamp, &b.post_id)));
    Ok((posts, truth))
}
