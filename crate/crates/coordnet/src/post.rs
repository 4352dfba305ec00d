//! Post-stream ingestion: parsing, validation, normalization and action
//! extraction.
//!
//! Input records are newline-delimited JSON documents, one post per line,
//! with the keys `id`, `user_id`, `created_at` (integer epoch seconds) and
//! the optional `retweeted_status_id`, `hashtags`, `urls`, `mentions` and
//! `conversation_id`. Unknown keys are ignored; malformed records are
//! counted and skipped rather than aborting the parse.

use std::collections::BTreeSet;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The kinds of interaction that can link two accounts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionType {
    /// Retweeting the same tweet.
    #[serde(rename = "retweet")]
    CoRetweet,
    /// Using the same hashtag.
    #[serde(rename = "hashtag")]
    CoHashtag,
    /// Posting the same URL.
    #[serde(rename = "url")]
    CoUrl,
    /// Mentioning the same account.
    #[serde(rename = "mention")]
    CoMention,
    /// Replying into the same conversation.
    #[serde(rename = "conversation")]
    CoConversation,
}

impl ActionType {
    /// Every supported action type, in canonical order.
    pub const ALL: [ActionType; 5] = [
        ActionType::CoRetweet,
        ActionType::CoHashtag,
        ActionType::CoUrl,
        ActionType::CoMention,
        ActionType::CoConversation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ActionType::CoRetweet => "retweet",
            ActionType::CoHashtag => "hashtag",
            ActionType::CoUrl => "url",
            ActionType::CoMention => "mention",
            ActionType::CoConversation => "conversation",
        }
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "retweet" => Ok(ActionType::CoRetweet),
            "hashtag" => Ok(ActionType::CoHashtag),
            "url" => Ok(ActionType::CoUrl),
            "mention" => Ok(ActionType::CoMention),
            "conversation" => Ok(ActionType::CoConversation),
            other => Err(Error::Config(format!(
                "unknown action type {other:?} (expected retweet, hashtag, url, mention or conversation)"
            ))),
        }
    }
}

/// One social-media record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub post_id: String,
    pub account_id: String,
    /// Seconds since the epoch; sub-second input is truncated.
    pub timestamp: i64,
    pub retweet_of: Option<String>,
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
    pub mentions: Vec<String>,
    pub conversation_id: Option<String>,
}

/// One extracted action: something a post did that could coordinate with
/// another account's matching action.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ActionInstance {
    pub action_type: ActionType,
    /// Normalized value linking matching actions (tweet id, hashtag, ...).
    pub reason: String,
    pub account_id: String,
    pub timestamp: i64,
    pub post_id: String,
}

/// Options controlling action extraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractOptions {
    /// When set, a retweet contributes only its retweet action: hashtags,
    /// URLs and mentions carried over from the retweeted text are skipped.
    pub own_actions_only: bool,
}

/// Result of parsing a stream: time-ordered posts plus a tally of records
/// skipped as malformed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOutcome {
    pub posts: Vec<Post>,
    pub skipped: u64,
}

// Wire-format helpers. Twitter-style ids arrive both as strings and as
// numbers, so the id-bearing fields accept either.

#[derive(Deserialize)]
#[serde(untagged)]
enum IdValue {
    Text(String),
    Unsigned(u64),
    Signed(i64),
}

impl IdValue {
    fn into_string(self) -> String {
        match self {
            IdValue::Text(s) => s,
            IdValue::Unsigned(n) => n.to_string(),
            IdValue::Signed(n) => n.to_string(),
        }
    }
}

fn de_id<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    Ok(IdValue::deserialize(d)?.into_string())
}

fn de_opt_id<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    Ok(Option::<IdValue>::deserialize(d)?.map(IdValue::into_string))
}

fn de_id_list<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    Ok(Vec::<IdValue>::deserialize(d)?
        .into_iter()
        .map(IdValue::into_string)
        .collect())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TimestampValue {
    Signed(i64),
    Float(f64),
    Text(String),
}

impl TimestampValue {
    fn into_seconds(self) -> Option<i64> {
        match self {
            TimestampValue::Signed(n) => Some(n),
            TimestampValue::Float(f) if f.is_finite() => Some(f.trunc() as i64),
            TimestampValue::Float(_) => None,
            TimestampValue::Text(s) => s.trim().parse::<i64>().ok(),
        }
    }
}

fn de_timestamp<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<i64, D::Error> {
    TimestampValue::deserialize(d)?
        .into_seconds()
        .ok_or_else(|| de::Error::custom("unparseable timestamp"))
}

#[derive(Deserialize)]
struct WireRecord {
    #[serde(deserialize_with = "de_id")]
    id: String,
    #[serde(deserialize_with = "de_id")]
    user_id: String,
    #[serde(deserialize_with = "de_timestamp")]
    created_at: i64,
    #[serde(default, deserialize_with = "de_opt_id")]
    retweeted_status_id: Option<String>,
    #[serde(default)]
    hashtags: Vec<String>,
    #[serde(default)]
    urls: Vec<String>,
    #[serde(default, deserialize_with = "de_id_list")]
    mentions: Vec<String>,
    #[serde(default, deserialize_with = "de_opt_id")]
    conversation_id: Option<String>,
}

#[derive(Serialize)]
struct WireRecordOut<'a> {
    id: &'a str,
    user_id: &'a str,
    created_at: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    retweeted_status_id: Option<&'a str>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    hashtags: &'a [String],
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    urls: &'a [String],
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    mentions: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    conversation_id: Option<&'a str>,
}

impl Post {
    /// Serialize to one wire-format JSON line (no trailing newline).
    pub fn to_json_line(&self) -> String {
        let out = WireRecordOut {
            id: &self.post_id,
            user_id: &self.account_id,
            created_at: self.timestamp,
            retweeted_status_id: self.retweet_of.as_deref(),
            hashtags: &self.hashtags,
            urls: &self.urls,
            mentions: &self.mentions,
            conversation_id: self.conversation_id.as_deref(),
        };
        serde_json::to_string(&out).expect("post serialization cannot fail")
    }
}

fn parse_record(line: &str) -> Option<Post> {
    let rec: WireRecord = serde_json::from_str(line).ok()?;
    if rec.id.is_empty() || rec.user_id.is_empty() || rec.created_at < 0 {
        return None;
    }
    Some(Post {
        post_id: rec.id,
        account_id: rec.user_id,
        timestamp: rec.created_at,
        retweet_of: rec.retweeted_status_id,
        hashtags: rec.hashtags,
        urls: rec.urls,
        mentions: rec.mentions,
        conversation_id: rec.conversation_id,
    })
}

/// Parse a sequence of wire-format lines into time-ordered posts.
///
/// Output is sorted ascending by `(timestamp, post_id)`. Malformed records
/// (bad JSON, missing id/account, negative or unparseable timestamp) and
/// duplicate post ids are skipped and tallied, never fatal. Blank lines are
/// ignored.
pub fn parse_posts<I, S>(lines: I) -> ParseOutcome
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut posts = Vec::new();
    let mut skipped = 0u64;
    let mut seen_ids = BTreeSet::new();
    for line in lines {
        let line = line.as_ref();
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(line) {
            Some(post) if seen_ids.insert(post.post_id.clone()) => posts.push(post),
            _ => skipped += 1,
        }
    }
    posts.sort_by(|a, b| (a.timestamp, &a.post_id).cmp(&(b.timestamp, &b.post_id)));
    ParseOutcome { posts, skipped }
}

/// [`parse_posts`] over a buffered reader. Lines that are not valid UTF-8
/// count as skipped records; other I/O errors abort.
pub fn parse_posts_reader<R: BufRead>(reader: R) -> Result<ParseOutcome> {
    let mut collected = Vec::new();
    let mut skipped_encoding = 0u64;
    for line in reader.lines() {
        match line {
            Ok(l) => collected.push(l),
            Err(e) if e.kind() == std::io::ErrorKind::InvalidData => skipped_encoding += 1,
            Err(e) => return Err(Error::Io(e)),
        }
    }
    let mut outcome = parse_posts(collected.iter());
    outcome.skipped += skipped_encoding;
    Ok(outcome)
}

/// Normalize a raw reason value for identity comparison.
///
/// Hashtags lose their leading `#` and are case-folded. URLs get a
/// lowercased scheme and host, fragment removal and trailing-slash
/// stripping (no network resolution). Tweet, account and conversation ids
/// pass through verbatim. Returns `None` when nothing is left.
pub fn normalize_reason(action_type: ActionType, raw: &str) -> Option<String> {
    let normalized = match action_type {
        ActionType::CoHashtag => raw.trim_start_matches('#').to_lowercase(),
        ActionType::CoUrl => normalize_url(raw),
        ActionType::CoRetweet | ActionType::CoMention | ActionType::CoConversation => {
            raw.to_string()
        }
    };
    if normalized.is_empty() {
        None
    } else {
        Some(normalized)
    }
}

fn normalize_url(raw: &str) -> String {
    match url::Url::parse(raw) {
        Ok(mut parsed) => {
            parsed.set_fragment(None);
            let mut s = parsed.to_string();
            // Only strip path-final slashes; a slash ending a query string
            // belongs to the query.
            if parsed.query().is_none() {
                while s.ends_with('/') {
                    s.pop();
                }
            }
            s
        }
        Err(_) => {
            // Not parseable as an absolute URL: apply the string-level rules
            // and keep the rest untouched.
            let defragmented = raw.split('#').next().unwrap_or("");
            let mut s = defragmented.trim().to_string();
            if !s.contains('?') {
                while s.ends_with('/') {
                    s.pop();
                }
            }
            s
        }
    }
}

/// Extract every co-actionable instance from a post, with default options.
pub fn extract_actions(post: &Post) -> Vec<ActionInstance> {
    extract_actions_with(post, ExtractOptions::default())
}

/// Extract every co-actionable instance from a post.
///
/// One retweet instance per `retweet_of`, one hashtag/URL/mention instance
/// per distinct normalized value, and one conversation instance when the
/// post is a reply (its `conversation_id` is present and differs from its
/// own id). Duplicates within the post are removed after normalization.
pub fn extract_actions_with(post: &Post, opts: ExtractOptions) -> Vec<ActionInstance> {
    let mut out = Vec::new();
    let mut seen: BTreeSet<(ActionType, String)> = BTreeSet::new();

    let mut add = |action_type: ActionType, raw: &str, out: &mut Vec<ActionInstance>| {
        if let Some(reason) = normalize_reason(action_type, raw) {
            if seen.insert((action_type, reason.clone())) {
                out.push(ActionInstance {
                    action_type,
                    reason,
                    account_id: post.account_id.clone(),
                    timestamp: post.timestamp,
                    post_id: post.post_id.clone(),
                });
            }
        }
    };

    if let Some(target) = &post.retweet_of {
        add(ActionType::CoRetweet, target, &mut out);
    }
    let suppress_embedded = opts.own_actions_only && post.retweet_of.is_some();
    if !suppress_embedded {
        for tag in &post.hashtags {
            add(ActionType::CoHashtag, tag, &mut out);
        }
        for u in &post.urls {
            add(ActionType::CoUrl, u, &mut out);
        }
        for m in &post.mentions {
            add(ActionType::CoMention, m, &mut out);
        }
        if let Some(conv) = &post.conversation_id {
            // Only replies participate: the conversation head links nobody.
            if conv != &post.post_id {
                add(ActionType::CoConversation, conv, &mut out);
            }
        }
    }
    out
}
