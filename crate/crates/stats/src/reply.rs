//! Mean reply health of comment threads.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadStats {
    pub top_comment_id: String,
    pub mean_reply_health: f64,
    pub n_replies: usize,
}

/// Arithmetic mean of the binary health of a top-level comment's direct
/// replies. Threads without replies yield `None` and are left out of
/// reply-health regressions.
pub fn mean_reply_health(top_comment_id: &str, replies: &[bool]) -> Option<ThreadStats> {
    if replies.is_empty() {
        return None;
    }
    let healthy = replies.iter().filter(|&&h| h).count();
    Some(ThreadStats {
        top_comment_id: top_comment_id.to_string(),
        mean_reply_health: healthy as f64 / replies.len() as f64,
        n_replies: replies.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_healthy() {
        let t = mean_reply_health("c1", &[true, true, true]).unwrap();
        assert_eq!(t.mean_reply_health, 1.0);
        assert_eq!(t.n_replies, 3);
    }

    #[test]
    fn two_of_three() {
        let t = mean_reply_health("c1", &[true, false, true]).unwrap();
        assert_eq!(t.mean_reply_health, 2.0 / 3.0);
    }

    #[test]
    fn no_replies_is_excluded() {
        assert!(mean_reply_health("c1", &[]).is_none());
    }
}
