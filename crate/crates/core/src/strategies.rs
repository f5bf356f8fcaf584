//! Deterministic adaptive conflict-resolution strategies.
//!
//! A strategy is a pure function from the transcript so far to the next
//! query. Strategies keep no state between rounds; anything they need is
//! recomputed from the transcript, which makes it trivial to replay them
//! along every branch of a decision tree.

use crate::channel::{Feedback, StationId, StationSet, Transcript};

/// What a strategy wants to do next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Query(StationSet),
    Done,
}

pub trait Strategy: Send + Sync {
    fn name(&self) -> &str;

    /// The next query given everything heard on the channel so far.
    fn next_action(&self, transcript: &Transcript) -> Action;
}

impl<S: Strategy + ?Sized> Strategy for &S {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn next_action(&self, transcript: &Transcript) -> Action {
        (**self).next_action(transcript)
    }
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn next_action(&self, transcript: &Transcript) -> Action {
        (**self).next_action(transcript)
    }
}

fn singles(transcript: &Transcript) -> usize {
    transcript.transmitted().len()
}

/// Queries `{1}`, `{2}`, ... in order.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearScan;

impl Strategy for LinearScan {
    fn name(&self) -> &str {
        "linear"
    }

    fn next_action(&self, transcript: &Transcript) -> Action {
        let config = transcript.config;
        let asked = transcript.len() as u32;
        if singles(transcript) >= config.d as usize || asked >= config.n {
            return Action::Done;
        }
        Action::Query(StationSet::singleton(asked + 1))
    }
}

/// The binary tree algorithm.
///
/// Keeps a stack of id intervals, starting from `[1, n]`. The top interval is
/// probed; on a collision it is split at `mid = ceil((lo + hi) / 2)` into
/// `[lo, mid - 1]` and `[mid, hi]`, pushed so that the left half is probed
/// first. Silence or a single transmission discharges the interval.
#[derive(Debug, Clone, Copy, Default)]
pub struct TreeSplit;

impl TreeSplit {
    /// Interval stack after replaying `transcript`, top of stack last.
    fn pending(transcript: &Transcript) -> Vec<(StationId, StationId)> {
        let mut stack = vec![(1, transcript.config.n)];
        for round in &transcript.rounds {
            let Some((lo, hi)) = stack.pop() else {
                break;
            };
            if round.feedback == Feedback::Collision && lo < hi {
                let mid = (lo + hi).div_ceil(2);
                stack.push((mid, hi));
                stack.push((lo, mid - 1));
            }
        }
        stack
    }
}

impl Strategy for TreeSplit {
    fn name(&self) -> &str {
        "tree"
    }

    fn next_action(&self, transcript: &Transcript) -> Action {
        if singles(transcript) >= transcript.config.d as usize {
            return Action::Done;
        }
        match Self::pending(transcript).pop() {
            Some((lo, hi)) => Action::Query(StationSet::range(lo, hi)),
            None => Action::Done,
        }
    }
}

/// Names accepted by [`by_name`].
pub const STRATEGY_NAMES: &[&str] = &["linear", "tree"];

pub fn by_name(name: &str) -> Option<Box<dyn Strategy>> {
    match name {
        "linear" => Some(Box::new(LinearScan)),
        "tree" => Some(Box::new(TreeSplit)),
        _ => None,
    }
}

/// A concrete envelope `d * (ceil(lg(max(n/d, 2))) + 2)` for the tree
/// algorithm's `O(d + d lg(n/d))` worst case. Used for sanity checks only.
pub fn worst_case_formula_estimate(n: u32, d: u32) -> u64 {
    assert!(d >= 1 && d <= n, "need 1 <= d <= n");
    // ceil(lg(max(n/d, 2))) is the least k >= 1 with d * 2^k >= n.
    let (n, d) = (u64::from(n), u64::from(d));
    let mut k = 1u32;
    while d << k < n {
        k += 1;
    }
    d * (u64::from(k) + 2)
}
