//! Detection of temporally coordinated behaviour in social-media post streams.
//!
//! The pipeline works in stages, each usable on its own:
//!
//! 1. [`post`] — parse, validate and time-order the raw post stream, and
//!    extract the actions (retweets, hashtags, URLs, mentions, replies)
//!    that can link accounts.
//! 2. [`window`] — slice the stream into fixed-duration time windows,
//!    adjacent or overlapping.
//! 3. [`coaction`] — inside each window, pair up accounts that performed
//!    the same action for the same reason.
//! 4. [`network`] — build per-window coordination networks, aggregate them,
//!    and strengthen ties across window boundaries with the six-scenario
//!    transitive weighting scheme.
//! 5. [`hcc`] — extract highly coordinating communities by edge-weight
//!    filtering and connected components.
//! 6. [`forensics`] — first-poster grids, cheerleader scoring, account
//!    profiles and activity timelines over the extracted communities.
//!
//! [`synth`] generates seeded synthetic streams with planted ground truth,
//! and [`export`] reads and writes the flat-file formats shared with the
//! `coordnet` CLI.

pub mod coaction;
pub mod export;
pub mod forensics;
pub mod hcc;
pub mod network;
pub mod post;
pub mod synth;
pub mod window;

pub use coaction::{coaction_stream, find_coactions, CoActionPair};
pub use forensics::{
    activity_timeline, cheerleader_scores, parse_metadata, profile_account, reputation,
    timing_grid, AccountMeta, AccountProfile, ActivityTimeline, CheerleaderReport,
    FirstPosterGrid,
};
pub use hcc::{connected_components, extract_hccs, filter_edges, Hcc};
pub use network::{
    aggregate, build_window_cn, classify_scenario, strengthen, transitive_weight,
    CoordinationNetwork, EdgeEvidence, Scenario, ScenarioWeights,
};
pub use post::{
    extract_actions, extract_actions_with, normalize_reason, parse_posts, parse_posts_reader,
    ActionInstance, ActionType, ExtractOptions, ParseOutcome, Post,
};
pub use synth::{generate, GroundTruth, PlantedGroup, SynthConfig};
pub use window::{partition, window_indices, Window, WindowConfig};

use thiserror::Error;

/// Errors shared across the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    /// Rejected configuration (weight ordering, window geometry, synth setup).
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Unreadable or structurally invalid input data.
    #[error("malformed input: {0}")]
    Parse(String),
    /// A caller broke an operation's contract.
    #[error("contract violation: {0}")]
    Contract(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
