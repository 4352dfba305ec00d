//! Coordination networks: per-window construction, cross-window
//! aggregation, and transitive strengthening.
//!
//! Aggregation alone treats a pair of co-actions from last week exactly
//! like one from the same second, which manufactures spurious transitive
//! associations: A-B coordinating in one window and B-C much later still
//! leaves A and C in the same component. Strengthening makes the temporal
//! relation explicit instead. Every pair of co-action pairs sharing a
//! bridging account falls into one of six scenarios, ordered by how strong
//! the implied A-C tie is, and contributes a scenario weight to the A-C
//! edge; separated-in-time scenarios decay exponentially with the gap and
//! can be disabled outright by setting their weight to zero.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::coaction::CoActionPair;
use crate::post::ActionType;
use crate::window::WindowConfig;
use crate::{Error, Result};

/// Evidence accumulated on one undirected edge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeEvidence {
    /// Total edge weight: direct pair evidence plus inferred contributions.
    pub weight: f64,
    /// Raw co-action pairs behind the edge.
    pub pair_count: u64,
    /// Multiset of the (action type, reason) values that linked the pair.
    pub reasons: BTreeMap<(ActionType, String), u64>,
    /// True while the edge exists only through scenario inference.
    pub inferred: bool,
}

/// Undirected weighted account graph with per-edge evidence.
///
/// Edges are keyed by the canonical (smaller, larger) account pair;
/// self-loops are rejected and all stored weights are positive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoordinationNetwork {
    pub nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), EdgeEvidence>,
}

fn canonical_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl CoordinationNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Evidence on the undirected edge between `a` and `b`, if present.
    pub fn edge(&self, a: &str, b: &str) -> Option<&EdgeEvidence> {
        self.edges.get(&canonical_key(a, b))
    }

    /// Iterate edges in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (&(String, String), &EdgeEvidence)> {
        self.edges.iter()
    }

    /// Record one co-action pair as direct evidence.
    pub fn record_pair(&mut self, pair: &CoActionPair) {
        debug_assert!(pair.account_a != pair.account_b, "no self-coordination");
        self.nodes.insert(pair.account_a.clone());
        self.nodes.insert(pair.account_b.clone());
        let evidence = self
            .edges
            .entry(canonical_key(&pair.account_a, &pair.account_b))
            .or_default();
        evidence.weight += 1.0;
        evidence.pair_count += 1;
        *evidence
            .reasons
            .entry((pair.action_type, pair.reason.clone()))
            .or_insert(0) += 1;
    }

    /// Add an inferred contribution to the edge between `a` and `b`,
    /// creating it as inferred when absent. Contributions must be positive;
    /// zero-weight edges never enter the network.
    pub fn add_inferred(&mut self, a: &str, b: &str, contribution: f64) {
        debug_assert!(a != b, "inference may not create self-loops");
        debug_assert!(contribution > 0.0);
        self.nodes.insert(a.to_string());
        self.nodes.insert(b.to_string());
        let evidence = self
            .edges
            .entry(canonical_key(a, b))
            .or_insert_with(|| EdgeEvidence {
                inferred: true,
                ..EdgeEvidence::default()
            });
        evidence.weight += contribution;
    }

    /// Restore an edge wholesale (used by file readers).
    pub fn insert_edge(&mut self, a: &str, b: &str, evidence: EdgeEvidence) -> Result<()> {
        if a == b {
            return Err(Error::Parse(format!("self-loop on account {a:?}")));
        }
        if !(evidence.weight > 0.0) {
            return Err(Error::Parse(format!(
                "edge {a:?}-{b:?} has non-positive weight {}",
                evidence.weight
            )));
        }
        self.nodes.insert(a.to_string());
        self.nodes.insert(b.to_string());
        self.edges.insert(canonical_key(a, b), evidence);
        Ok(())
    }

    /// Merge another network into this one: node union, weight and
    /// pair-count sums, reason multiset unions.
    pub fn merge(&mut self, other: &CoordinationNetwork) {
        for node in &other.nodes {
            self.nodes.insert(node.clone());
        }
        for (key, incoming) in &other.edges {
            match self.edges.entry(key.clone()) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(incoming.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    let existing = slot.get_mut();
                    existing.weight += incoming.weight;
                    existing.pair_count += incoming.pair_count;
                    for (reason, count) in &incoming.reasons {
                        *existing.reasons.entry(reason.clone()).or_insert(0) += count;
                    }
                    existing.inferred = existing.inferred && incoming.inferred;
                }
            }
        }
    }

    /// Check the structural invariants: canonical keys, no self-loops,
    /// positive weights, endpoints registered as nodes.
    pub fn validate(&self) -> Result<()> {
        for ((a, b), evidence) in &self.edges {
            if a == b {
                return Err(Error::Contract(format!("self-loop on {a:?}")));
            }
            if a > b {
                return Err(Error::Contract(format!("non-canonical edge {a:?}-{b:?}")));
            }
            if !(evidence.weight > 0.0) || !evidence.weight.is_finite() {
                return Err(Error::Contract(format!(
                    "edge {a:?}-{b:?} has invalid weight {}",
                    evidence.weight
                )));
            }
            if !self.nodes.contains(a) || !self.nodes.contains(b) {
                return Err(Error::Contract(format!(
                    "edge {a:?}-{b:?} references unregistered nodes"
                )));
            }
            if !evidence.inferred && evidence.pair_count == 0 {
                return Err(Error::Contract(format!(
                    "direct edge {a:?}-{b:?} lacks pair evidence"
                )));
            }
        }
        Ok(())
    }
}

/// Build the coordination network of a single window.
///
/// One edge per account pair; the weight is the number of distinct
/// (type, reason) values linking them in this window, which is exactly the
/// number of deduplicated co-action pairs.
pub fn build_window_cn(pairs: &[CoActionPair]) -> CoordinationNetwork {
    debug_assert!(
        pairs.windows(2).all(|w| w[0].window_index == w[1].window_index),
        "pairs passed to build_window_cn must share a window"
    );
    let mut cn = CoordinationNetwork::new();
    for pair in pairs {
        cn.record_pair(pair);
    }
    cn
}

/// Combine per-window networks into one. The merge is commutative and
/// associative, so any fold order gives the same result.
pub fn aggregate<'a, I>(networks: I) -> CoordinationNetwork
where
    I: IntoIterator<Item = &'a CoordinationNetwork>,
{
    let mut combined = CoordinationNetwork::new();
    for network in networks {
        combined.merge(network);
    }
    combined
}

/// Group a deduplicated pair stream by window and aggregate the per-window
/// networks.
pub fn aggregate_pairs(pairs: &[CoActionPair]) -> CoordinationNetwork {
    let mut by_window: BTreeMap<u64, Vec<CoActionPair>> = BTreeMap::new();
    for pair in pairs {
        by_window.entry(pair.window_index).or_default().push(pair.clone());
    }
    let windows: Vec<CoordinationNetwork> = by_window
        .values()
        .map(|pairs| build_window_cn(pairs))
        .collect();
    aggregate(&windows)
}

/// Scenario weights for transitive strengthening, plus the decay rate and
/// look-back horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    /// Unitless decay rate; separated scenarios decay as
    /// `exp(-decay_lambda * dt / gamma)`.
    pub decay_lambda: f64,
    /// Look-back horizon in multiples of gamma: pair-of-pairs spanning
    /// `k_horizon * gamma` seconds or more never interact.
    pub k_horizon: u64,
}

impl Default for ScenarioWeights {
    fn default() -> Self {
        Self {
            w1: 0.8,
            w2: 0.6,
            w3: 0.5,
            w4: 0.4,
            w5: 0.0,
            decay_lambda: 1.0,
            k_horizon: 6,
        }
    }
}

impl ScenarioWeights {
    /// Reject any configuration violating `1 >= w1 >= w2 >= w3 >= w4 >= w5 >= 0`.
    pub fn validate(&self) -> Result<()> {
        let ws = [self.w1, self.w2, self.w3, self.w4, self.w5];
        if ws.iter().any(|w| !w.is_finite()) {
            return Err(Error::Config("scenario weights must be finite".into()));
        }
        let ordered = 1.0 >= self.w1
            && self.w1 >= self.w2
            && self.w2 >= self.w3
            && self.w3 >= self.w4
            && self.w4 >= self.w5
            && self.w5 >= 0.0;
        if !ordered {
            return Err(Error::Config(format!(
                "scenario weights must satisfy 1 >= w1 >= w2 >= w3 >= w4 >= w5 >= 0, got \
                 w1={} w2={} w3={} w4={} w5={}",
                self.w1, self.w2, self.w3, self.w4, self.w5
            )));
        }
        if !(self.decay_lambda >= 0.0) || !self.decay_lambda.is_finite() {
            return Err(Error::Config(format!(
                "decay_lambda must be a finite non-negative number, got {}",
                self.decay_lambda
            )));
        }
        if self.k_horizon == 0 {
            return Err(Error::Config("k_horizon must be at least 1".into()));
        }
        Ok(())
    }

    /// Parse a flat `key = value` configuration. Keys: `w1`..`w5`,
    /// `decay_lambda`, `k_horizon`. Lines starting with `#` are comments.
    /// Unset keys keep their defaults; the result is validated.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut weights = ScenarioWeights::default();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("weights line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_f64 = || -> Result<f64> {
                value.parse::<f64>().map_err(|_| {
                    Error::Config(format!("weights line {}: bad number {value:?}", lineno + 1))
                })
            };
            match key {
                "w1" => weights.w1 = parse_f64()?,
                "w2" => weights.w2 = parse_f64()?,
                "w3" => weights.w3 = parse_f64()?,
                "w4" => weights.w4 = parse_f64()?,
                "w5" => weights.w5 = parse_f64()?,
                "decay_lambda" => weights.decay_lambda = parse_f64()?,
                "k_horizon" => {
                    weights.k_horizon = value.parse::<u64>().map_err(|_| {
                        Error::Config(format!(
                            "weights line {}: k_horizon must be a positive integer, got {value:?}",
                            lineno + 1
                        ))
                    })?
                }
                other => {
                    return Err(Error::Config(format!(
                        "weights line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        weights.validate()?;
        Ok(weights)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_config_str(&text)
    }
}

/// The six ways a bridging account B can tie A to C, strongest first.
///
/// Two axes decide the scenario: whether the two pairs share their
/// (type, reason), and how the four action timestamps relate. "Shared
/// span" means all four actions fit inside one gamma interval. "Bridged"
/// means they do not, but B's own two actions are less than gamma apart,
/// chaining the events across a window boundary. "Separated" means B's
/// actions are gamma or more apart: two genuinely distinct events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    /// (a) Same reason, one shared span: A and C coordinate directly, so
    /// the tie has full weight 1.
    SameReasonSharedSpan,
    /// (b) Same reason, events chained by B across a boundary: weight w1.
    SameReasonBridged,
    /// (c) Different reasons, one shared span: weight w2.
    CrossReasonSharedSpan,
    /// (d) Different reasons, chained by B: weight w3.
    CrossReasonBridged,
    /// (e) Same reason, separated events: weight w4, decayed by distance.
    SameReasonSeparated,
    /// (f) Different reasons, separated events: weight w5, decayed.
    CrossReasonSeparated,
}

impl Scenario {
    /// All scenarios, strongest tie first.
    pub const ALL: [Scenario; 6] = [
        Scenario::SameReasonSharedSpan,
        Scenario::SameReasonBridged,
        Scenario::CrossReasonSharedSpan,
        Scenario::CrossReasonBridged,
        Scenario::SameReasonSeparated,
        Scenario::CrossReasonSeparated,
    ];
}

/// Classify how two co-action pairs sharing exactly one account relate.
///
/// Errors when the pairs share zero or both accounts (no single bridge).
pub fn classify_scenario(
    p1: &CoActionPair,
    p2: &CoActionPair,
    cfg: &WindowConfig,
) -> Result<Scenario> {
    let shared = shared_account(p1, p2)?;
    let t_bridge_1 = p1.timestamp_of(shared).expect("shared account is in p1");
    let t_bridge_2 = p2.timestamp_of(shared).expect("shared account is in p2");
    let (_, t_outer_1) = p1.counterpart(shared).expect("p1 has an outer account");
    let (_, t_outer_2) = p2.counterpart(shared).expect("p2 has an outer account");

    let gamma = cfg.gamma as i64;
    let times = [t_outer_1, t_bridge_1, t_bridge_2, t_outer_2];
    let span = times.iter().max().unwrap() - times.iter().min().unwrap();
    let shared_span = span < gamma;
    let bridged = (t_bridge_1 - t_bridge_2).abs() < gamma;
    let same_reason = p1.action_type == p2.action_type && p1.reason == p2.reason;

    Ok(match (same_reason, shared_span, bridged) {
        (true, true, _) => Scenario::SameReasonSharedSpan,
        (true, false, true) => Scenario::SameReasonBridged,
        (true, false, false) => Scenario::SameReasonSeparated,
        (false, true, _) => Scenario::CrossReasonSharedSpan,
        (false, false, true) => Scenario::CrossReasonBridged,
        (false, false, false) => Scenario::CrossReasonSeparated,
    })
}

fn shared_account<'a>(p1: &'a CoActionPair, p2: &CoActionPair) -> Result<&'a str> {
    let a_shared = p1.account_a == p2.account_a || p1.account_a == p2.account_b;
    let b_shared = p1.account_b == p2.account_a || p1.account_b == p2.account_b;
    match (a_shared, b_shared) {
        (true, false) => Ok(&p1.account_a),
        (false, true) => Ok(&p1.account_b),
        (true, true) => Err(Error::Contract(
            "pairs share both accounts; no single bridging account".into(),
        )),
        (false, false) => Err(Error::Contract(
            "pairs share no account; nothing bridges them".into(),
        )),
    }
}

/// The weight an inferred A-C tie earns from one scenario instance.
///
/// `delta_t` is the gap in seconds between A's and C's co-actions. The
/// separated scenarios decay as `exp(-lambda * delta_t / gamma)`; the rest
/// ignore the distance. The result is clamped to `[0, 1]`.
pub fn transitive_weight(
    scenario: Scenario,
    delta_t: u64,
    weights: &ScenarioWeights,
    gamma: u64,
) -> f64 {
    let decayed = |w: f64| w * (-(weights.decay_lambda * delta_t as f64 / gamma as f64)).exp();
    let weight = match scenario {
        Scenario::SameReasonSharedSpan => 1.0,
        Scenario::SameReasonBridged => weights.w1,
        Scenario::CrossReasonSharedSpan => weights.w2,
        Scenario::CrossReasonBridged => weights.w3,
        Scenario::SameReasonSeparated => decayed(weights.w4),
        Scenario::CrossReasonSeparated => decayed(weights.w5),
    };
    weight.clamp(0.0, 1.0)
}

/// Strengthen an aggregated network with transitive scenario evidence.
///
/// For every pair of co-action pairs sharing exactly one account whose four
/// actions fall inside the `k_horizon * gamma` look-back span, the scenario
/// weight is added to the outer accounts' edge, creating it as inferred
/// when absent. Existing direct weights never decrease, and contributions
/// onto the same edge sum. Same-tweet co-retweet pairs recurring across
/// windows are kept but logged, since retweet timelines usually make that
/// pattern rare.
pub fn strengthen(
    cn: &CoordinationNetwork,
    pairs: &[CoActionPair],
    weights: &ScenarioWeights,
    cfg: &WindowConfig,
) -> Result<CoordinationNetwork> {
    weights.validate()?;
    let mut result = cn.clone();
    let horizon = (weights.k_horizon.saturating_mul(cfg.gamma)) as i64;

    let mut by_account: BTreeMap<&str, Vec<&CoActionPair>> = BTreeMap::new();
    for pair in pairs {
        by_account.entry(&pair.account_a).or_default().push(pair);
        by_account.entry(&pair.account_b).or_default().push(pair);
    }

    let mut recurring_coretweets = 0u64;
    for (bridge, group) in &by_account {
        for i in 0..group.len() {
            for j in (i + 1)..group.len() {
                let (p1, p2) = (group[i], group[j]);
                let (outer_1, t_outer_1) = p1.counterpart(bridge).expect("bridge is in p1");
                let (outer_2, t_outer_2) = p2.counterpart(bridge).expect("bridge is in p2");
                if outer_1 == outer_2 {
                    // Same account pair twice, or an A == C self-loop.
                    continue;
                }
                let t_bridge_1 = p1.timestamp_of(bridge).expect("bridge is in p1");
                let t_bridge_2 = p2.timestamp_of(bridge).expect("bridge is in p2");
                let times = [t_outer_1, t_bridge_1, t_bridge_2, t_outer_2];
                let span = times.iter().max().unwrap() - times.iter().min().unwrap();
                if span >= horizon {
                    continue;
                }
                let scenario = classify_scenario(p1, p2, cfg)?;
                if p1.action_type == ActionType::CoRetweet
                    && scenario == Scenario::SameReasonSeparated
                {
                    recurring_coretweets += 1;
                    log::debug!(
                        "tweet {:?} co-retweeted again in a distant window (bridge {bridge})",
                        p1.reason
                    );
                }
                let delta_t = (t_outer_1 - t_outer_2).unsigned_abs();
                let contribution = transitive_weight(scenario, delta_t, weights, cfg.gamma);
                if contribution > 0.0 {
                    result.add_inferred(outer_1, outer_2, contribution);
                }
            }
        }
    }
    if recurring_coretweets > 0 {
        log::info!(
            "{recurring_coretweets} same-tweet co-retweet pair combinations recurred across \
             distant windows"
        );
    }
    Ok(result)
}
