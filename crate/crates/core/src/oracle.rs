//! Exhaustive minimax over all deterministic adaptive strategies.
//!
//! The value of a knowledge state is
//!
//! ```text
//! f(state) = 0                                        if d stations transmitted
//!          = min_Q  max_{feedback}  1 + f(refine(state, Q, feedback))
//! ```
//!
//! with `Q` ranging over every nonempty subset of the stations, including
//! stations that already transmitted. Values are memoised on a canonical form
//! of the state that is invariant under relabelling of the stations that have
//! not transmitted yet.
//!
//! Two pruning rules keep the search small without affecting exactness:
//! a query whose answer is forced and reveals nothing new is skipped (it only
//! wastes a round), and `d - |transmitted|` is a lower bound on any state's
//! value, which both cuts the query loop and lets a query be abandoned once
//! one of its branches is already as bad as the best query found.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;

use crate::channel::{Feedback, GameConfig, StationSet};
use crate::engine::default_round_cap;
use crate::error::{Error, Result};
use crate::qtree::{QNode, QTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_n: u32,
    pub max_d: u32,
    /// Memo entries allowed before giving up.
    pub max_states: usize,
    /// Memoise on canonical forms. Turning this off is only useful for
    /// cross-checking the canonicalisation.
    pub canonicalize: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_n: 6,
            max_d: 3,
            max_states: 4_000_000,
            canonicalize: true,
        }
    }
}

/// Hard ceiling on `n` regardless of limits; masks are a single word and
/// canonicalisation enumerates permutations.
const ABSOLUTE_MAX_N: u32 = 10;

/// A minimax position: live sets still possible and stations already heard.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OracleState {
    pub n: u32,
    /// Sorted.
    pub candidates: Vec<StationSet>,
    pub transmitted: StationSet,
}

/// Canonical representative of `state` under relabelling of the stations
/// outside `transmitted`.
///
/// Tries every such relabelling and keeps the lexicographically least sorted
/// candidate list, so the cost grows factorially in the number of
/// untransmitted stations.
pub fn canonicalize(state: &OracleState) -> OracleState {
    let transmitted = mask_of(&state.transmitted);
    let masks: Vec<u64> = state.candidates.iter().map(mask_of).collect();
    let perms = fixing_permutations(state.n, transmitted);
    let best = canonical_masks(&masks, &perms);
    OracleState {
        n: state.n,
        candidates: best.into_iter().map(StationSet::from_mask).collect(),
        transmitted: state.transmitted.clone(),
    }
}

fn mask_of(set: &StationSet) -> u64 {
    set.to_mask().expect("oracle states live on at most 64 stations")
}

/// Every permutation of `0..n` (as bit positions) fixing the bits of `fixed`.
fn fixing_permutations(n: u32, fixed: u64) -> Vec<Vec<u8>> {
    let free: Vec<u8> = (0..n as u8).filter(|&b| fixed >> b & 1 == 0).collect();
    free.iter()
        .copied()
        .permutations(free.len())
        .map(|image| {
            let mut perm: Vec<u8> = (0..n as u8).collect();
            for (&from, to) in free.iter().zip(image) {
                perm[from as usize] = to;
            }
            perm
        })
        .collect()
}

fn permute(mask: u64, perm: &[u8]) -> u64 {
    let mut out = 0;
    let mut m = mask;
    while m != 0 {
        let b = m.trailing_zeros() as usize;
        out |= 1 << perm[b];
        m &= m - 1;
    }
    out
}

fn canonical_masks(masks: &[u64], perms: &[Vec<u8>]) -> Vec<u64> {
    let mut best: Option<Vec<u64>> = None;
    let mut scratch = Vec::with_capacity(masks.len());
    for perm in perms {
        scratch.clear();
        scratch.extend(masks.iter().map(|&m| permute(m, perm)));
        scratch.sort_unstable();
        if best.as_ref().is_none_or(|b| scratch < *b) {
            best = Some(scratch.clone());
        }
    }
    best.unwrap_or_else(|| masks.to_vec())
}

type Key = (u64, Vec<u64>);

/// Memoising minimax solver for one `(n, d)`.
pub struct Oracle {
    config: GameConfig,
    limits: OracleLimits,
    full: u64,
    depth_cap: usize,
    raw: HashMap<Key, u32>,
    canonical: HashMap<Key, u32>,
    perms: HashMap<u64, Vec<Vec<u8>>>,
}

impl Oracle {
    pub fn new(config: GameConfig, limits: OracleLimits) -> Result<Self> {
        if config.n > limits.max_n.min(ABSOLUTE_MAX_N) || config.d > limits.max_d {
            return Err(Error::BudgetExceeded {
                what: "exact minimax",
                needed: format!("n={}, d={}", config.n, config.d),
                limit: format!("n<={}, d<={}", limits.max_n.min(ABSOLUTE_MAX_N), limits.max_d),
            });
        }
        Ok(Self {
            config,
            limits,
            full: (1u64 << config.n) - 1,
            depth_cap: default_round_cap(&config),
            raw: HashMap::new(),
            canonical: HashMap::new(),
            perms: HashMap::new(),
        })
    }

    pub fn config(&self) -> GameConfig {
        self.config
    }

    /// Number of distinct positions solved so far.
    pub fn states_solved(&self) -> usize {
        if self.limits.canonicalize {
            self.canonical.len()
        } else {
            self.raw.len()
        }
    }

    /// `f(n, d)`: optimal worst-case number of rounds.
    pub fn optimal_rounds(&mut self) -> Result<u32> {
        let (t, cands) = self.initial();
        self.solve(t, &cands, 0)
    }

    /// Optimal number of rounds still needed from the given position.
    pub fn solve_state(&mut self, candidates: &[StationSet], transmitted: &StationSet) -> Result<u32> {
        let mut masks: Vec<u64> = candidates.iter().map(mask_of).collect();
        masks.sort_unstable();
        self.solve(mask_of(transmitted), &masks, 0)
    }

    /// A decision tree attaining `f(n, d)`.
    ///
    /// At each node the first query (in mask order) that avoids stations
    /// already heard and attains the node's value is used, so no station
    /// transmits alone twice on any path.
    pub fn optimal_tree(&mut self) -> Result<QTree> {
        let (t, cands) = self.initial();
        let root = self.extract(t, cands, 0)?;
        Ok(QTree {
            config: self.config,
            root,
        })
    }

    fn initial(&self) -> (u64, Vec<u64>) {
        let cands = (0..self.config.n as u8)
            .combinations(self.config.d as usize)
            .map(|bits| bits.into_iter().fold(0u64, |m, b| m | 1 << b))
            .sorted_unstable()
            .collect();
        (0, cands)
    }

    fn remaining(&self, t: u64) -> u32 {
        self.config.d - t.count_ones()
    }

    /// Splits `cands` by feedback to `q`. Index 0 is silence, 1 collision,
    /// `2 + b` a single transmission from bit `b`.
    fn split(&self, q: u64, cands: &[u64]) -> Vec<(usize, Vec<u64>)> {
        let mut groups: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for &c in cands {
            let hit = q & c;
            let slot = match hit.count_ones() {
                0 => 0,
                1 => 2 + hit.trailing_zeros() as usize,
                _ => 1,
            };
            groups.entry(slot).or_default().push(c);
        }
        groups.into_iter().collect()
    }

    fn child_transmitted(t: u64, slot: usize) -> u64 {
        if slot >= 2 {
            t | 1 << (slot - 2)
        } else {
            t
        }
    }

    /// False when `q` has one possible answer that teaches nothing.
    fn makes_progress(t: u64, groups: &[(usize, Vec<u64>)]) -> bool {
        groups.len() > 1 || Self::child_transmitted(t, groups[0].0) != t
    }

    fn solve(&mut self, t: u64, cands: &[u64], depth: usize) -> Result<u32> {
        let remaining = self.remaining(t);
        if remaining == 0 {
            return Ok(0);
        }
        if cands.len() == 1 {
            // The live set is known; each remaining station needs its own round.
            return Ok(remaining);
        }
        if depth > self.depth_cap {
            return Err(Error::CapExceeded {
                round_cap: self.depth_cap,
            });
        }
        let raw_key = (t, cands.to_vec());
        if let Some(&v) = self.raw.get(&raw_key) {
            return Ok(v);
        }
        let canonical_key = if self.limits.canonicalize {
            let perms = self
                .perms
                .entry(t)
                .or_insert_with(|| fixing_permutations(self.config.n, t));
            let key = (t, canonical_masks(cands, perms));
            if let Some(&v) = self.canonical.get(&key) {
                self.raw.insert(raw_key, v);
                return Ok(v);
            }
            Some(key)
        } else {
            None
        };
        if self.states_solved() >= self.limits.max_states {
            return Err(Error::BudgetExceeded {
                what: "minimax state table",
                needed: format!("more than {} states", self.limits.max_states),
                limit: self.limits.max_states.to_string(),
            });
        }

        let mut best = u32::MAX;
        for q in 1..=self.full {
            let groups = self.split(q, cands);
            if !Self::makes_progress(t, &groups) {
                continue;
            }
            let optimistic = 1 + groups
                .iter()
                .map(|(slot, _)| self.remaining(Self::child_transmitted(t, *slot)))
                .max()
                .unwrap();
            if optimistic >= best {
                continue;
            }
            let mut worst = 0;
            for (slot, group) in &groups {
                let v = 1 + self.solve(Self::child_transmitted(t, *slot), group, depth + 1)?;
                worst = worst.max(v);
                if worst >= best {
                    break;
                }
            }
            best = best.min(worst);
            if best == remaining {
                break;
            }
        }

        if let Some(key) = canonical_key {
            self.canonical.insert(key, best);
        }
        self.raw.insert(raw_key, best);
        Ok(best)
    }

    fn extract(&mut self, t: u64, cands: Vec<u64>, depth: usize) -> Result<QNode> {
        if self.remaining(t) == 0 {
            return Ok(QNode::Leaf {
                live: StationSet::from_mask(cands[0]),
            });
        }
        let value = self.solve(t, &cands, depth)?;
        for q in (1..=self.full).filter(|q| q & t == 0) {
            let groups = self.split(q, &cands);
            if !Self::makes_progress(t, &groups) {
                continue;
            }
            let mut worst = 0;
            for (slot, group) in &groups {
                worst = worst.max(1 + self.solve(Self::child_transmitted(t, *slot), group, depth + 1)?);
            }
            if worst != value {
                continue;
            }
            let mut children = BTreeMap::new();
            for (slot, group) in groups {
                let feedback = match slot {
                    0 => Feedback::Silence,
                    1 => Feedback::Collision,
                    s => Feedback::Single(s as u32 - 1),
                };
                let child = self.extract(Self::child_transmitted(t, slot), group, depth + 1)?;
                children.insert(feedback, child);
            }
            return Ok(QNode::Internal {
                query: StationSet::from_mask(q),
                children,
            });
        }
        Err(Error::domain(
            "optimal_strategy_tree",
            "no optimal query avoids the stations already heard",
        ))
    }
}

/// `f(n, d)` for `config`.
pub fn exact_optimal_rounds(config: GameConfig, limits: OracleLimits) -> Result<u32> {
    Oracle::new(config, limits)?.optimal_rounds()
}

/// A decision tree whose depth is `f(n, d)`.
pub fn optimal_strategy_tree(config: GameConfig, limits: OracleLimits) -> Result<QTree> {
    Oracle::new(config, limits)?.optimal_tree()
}
