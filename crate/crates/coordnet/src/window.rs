//! Fixed-duration time windows over an ordered post stream.
//!
//! Windows are half-open intervals `[start, start + gamma)` laid out every
//! `stride` seconds from an anchor. `stride == gamma` gives adjacent
//! windows that partition the stream; `stride < gamma` gives overlapping
//! windows, down to `stride == 1` for the finest representable slide.

use serde::{Deserialize, Serialize};

use crate::post::Post;
use crate::{Error, Result};

/// Window layout: duration, slide and alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Window duration in seconds (>= 1).
    pub gamma: u64,
    /// Slide between consecutive window starts, in `1..=gamma`.
    pub stride: u64,
    /// Epoch second at which window 0 starts.
    pub anchor: i64,
}

impl WindowConfig {
    pub fn new(gamma: u64, stride: u64, anchor: i64) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::Config("gamma must be at least 1 second".into()));
        }
        if stride == 0 || stride > gamma {
            return Err(Error::Config(format!(
                "stride must be between 1 and gamma ({gamma}), got {stride}"
            )));
        }
        Ok(Self {
            gamma,
            stride,
            anchor,
        })
    }

    /// Adjacent-mode layout: `stride == gamma`.
    pub fn adjacent(gamma: u64, anchor: i64) -> Result<Self> {
        Self::new(gamma, gamma, anchor)
    }

    pub fn is_adjacent(&self) -> bool {
        self.stride == self.gamma
    }

    /// Default anchor for a stream: the first post's timestamp floored to a
    /// multiple of gamma, so runs are deterministic given the data. Zero
    /// for an empty stream.
    pub fn auto_anchor(gamma: u64, posts: &[Post]) -> i64 {
        match posts.first() {
            Some(first) => first.timestamp.div_euclid(gamma as i64) * gamma as i64,
            None => 0,
        }
    }

    /// Start and exclusive end of the window at `index`.
    pub fn span(&self, index: u64) -> (i64, i64) {
        let start = self.anchor + (index * self.stride) as i64;
        (start, start + self.gamma as i64)
    }
}

/// One populated window of the stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub index: u64,
    pub start: i64,
    /// Exclusive end; `end - start == gamma`.
    pub end: i64,
    pub posts: Vec<Post>,
}

/// All window indices whose span contains `t`: every `i` with
/// `i*stride + anchor <= t < i*stride + anchor + gamma`.
///
/// Adjacent mode yields exactly one index. A timestamp before the anchor
/// belongs to no window and yields an empty list (with a warning, since it
/// usually means a misconfigured anchor).
pub fn window_indices(t: i64, cfg: &WindowConfig) -> Vec<u64> {
    if t < cfg.anchor {
        log::warn!("timestamp {t} precedes window anchor {}", cfg.anchor);
        return Vec::new();
    }
    let offset = (t - cfg.anchor) as u64;
    let hi = offset / cfg.stride;
    let lo = if offset < cfg.gamma {
        0
    } else {
        (offset - cfg.gamma) / cfg.stride + 1
    };
    (lo..=hi).collect()
}

/// Assign time-ordered posts to windows. Empty windows are omitted and the
/// result is ordered by window index. In adjacent mode the windows form a
/// partition of the posts; in overlapping mode each post appears once per
/// containing window.
pub fn partition(posts: &[Post], cfg: &WindowConfig) -> Vec<Window> {
    let mut buckets: std::collections::BTreeMap<u64, Vec<Post>> = std::collections::BTreeMap::new();
    for post in posts {
        for index in window_indices(post.timestamp, cfg) {
            buckets.entry(index).or_default().push(post.clone());
        }
    }
    buckets
        .into_iter()
        .map(|(index, posts)| {
            let (start, end) = cfg.span(index);
            Window {
                index,
                start,
                end,
                posts,
            }
        })
        .collect()
}
