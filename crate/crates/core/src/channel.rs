//! Station sets, the channel feedback function and transcripts.
//!
//! Stations are labelled `1..=n`. In any round the scheduled set of stations
//! (the *query*) transmits; only live stations actually put a packet on the
//! channel, and the channel reports one of three outcomes depending on how
//! many did:
//!
//! * nobody transmitted: [`Feedback::Silence`]
//! * exactly one station `s` transmitted: [`Feedback::Single`]`(s)`, and every
//!   station learns `s`
//! * two or more transmitted: [`Feedback::Collision`]

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// 1-based station label.
pub type StationId = u32;

/// Default upper bound on `n`; sets up to this size fit in one machine word.
pub const DEFAULT_MAX_STATIONS: u32 = 64;

/// A set of station ids.
///
/// Backed by a bit vector whose first word lives inline, so sets over at most
/// 64 stations never allocate. Larger ids spill into extra words.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct StationSet {
    // Bit `i` of the concatenated words is station `i + 1`. Trailing zero
    // words are always trimmed so that equal sets have equal words.
    words: SmallVec<[u64; 1]>,
}

impl StationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// All stations `1..=n`.
    pub fn full(n: u32) -> Self {
        Self::range(1, n)
    }

    /// The interval `lo..=hi`; empty when `lo > hi`.
    pub fn range(lo: StationId, hi: StationId) -> Self {
        let mut set = Self::new();
        for id in lo.max(1)..=hi {
            set.insert(id);
        }
        set
    }

    pub fn singleton(id: StationId) -> Self {
        let mut set = Self::new();
        set.insert(id);
        set
    }

    /// Builds a set from the low 64 bits of `mask` (bit `i` is station `i + 1`).
    pub fn from_mask(mask: u64) -> Self {
        let mut set = Self::new();
        if mask != 0 {
            set.words.push(mask);
        }
        set
    }

    /// The set as a single word, if every member is at most 64.
    pub fn to_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Inserts `id`, returning whether it was newly added.
    ///
    /// # Panics
    ///
    /// Panics if `id` is 0; station ids are 1-based.
    pub fn insert(&mut self, id: StationId) -> bool {
        assert!(id >= 1, "station ids are 1-based");
        let (word, bit) = Self::locate(id);
        if self.words.len() <= word {
            self.words.resize(word + 1, 0);
        }
        let fresh = self.words[word] & bit == 0;
        self.words[word] |= bit;
        fresh
    }

    pub fn remove(&mut self, id: StationId) -> bool {
        if id == 0 {
            return false;
        }
        let (word, bit) = Self::locate(id);
        let present = self.words.get(word).is_some_and(|w| w & bit != 0);
        if present {
            self.words[word] &= !bit;
            self.trim();
        }
        present
    }

    pub fn contains(&self, id: StationId) -> bool {
        if id == 0 {
            return false;
        }
        let (word, bit) = Self::locate(id);
        self.words.get(word).is_some_and(|w| w & bit != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Largest member, if any.
    pub fn max_id(&self) -> Option<StationId> {
        let last = self.words.len().checked_sub(1)?;
        let w = self.words[last];
        Some(last as u32 * 64 + (64 - w.leading_zeros()))
    }

    /// The only member, when the set has exactly one.
    pub fn single(&self) -> Option<StationId> {
        if self.len() == 1 {
            self.iter().next()
        } else {
            None
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut words: SmallVec<[u64; 1]> = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| a & b)
            .collect();
        Self::trim_words(&mut words);
        Self { words }
    }

    pub fn union(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(short.words.iter()) {
            *w |= s;
        }
        Self { words }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut words = self.words.clone();
        for (w, o) in words.iter_mut().zip(other.words.iter()) {
            *w &= !o;
        }
        Self::trim_words(&mut words);
        Self { words }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & b == 0)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = StationId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let base = i as u32 * 64;
            BitIter(w).map(move |b| base + b + 1)
        })
    }

    /// Every member lies in `1..=n`.
    pub fn within(&self, n: u32) -> bool {
        self.max_id().is_none_or(|m| m <= n)
    }

    /// Applies a relabelling of stations. `perm[i - 1]` is the new label of
    /// station `i`; stations beyond `perm` keep their label.
    pub fn relabel(&self, perm: &[StationId]) -> Self {
        self.iter()
            .map(|id| perm.get(id as usize - 1).copied().unwrap_or(id))
            .collect()
    }

    fn locate(id: StationId) -> (usize, u64) {
        let idx = id - 1;
        ((idx / 64) as usize, 1u64 << (idx % 64))
    }

    fn trim(&mut self) {
        Self::trim_words(&mut self.words);
    }

    fn trim_words(words: &mut SmallVec<[u64; 1]>) {
        while words.last() == Some(&0) {
            words.pop();
        }
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(b)
    }
}

impl FromIterator<StationId> for StationSet {
    fn from_iter<I: IntoIterator<Item = StationId>>(iter: I) -> Self {
        let mut set = Self::new();
        for id in iter {
            set.insert(id);
        }
        set
    }
}

impl<const N: usize> From<[StationId; N]> for StationSet {
    fn from(ids: [StationId; N]) -> Self {
        ids.into_iter().collect()
    }
}

/// Sets order lexicographically by their ascending member lists, so
/// `{1,2} < {1,3} < {2,3}` and `{} < {1}`.
impl Ord for StationSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for StationSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for StationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.iter().join(","))
    }
}

impl fmt::Debug for StationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for StationSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for StationSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<StationId>::deserialize(deserializer)?;
        if ids.contains(&0) {
            return Err(serde::de::Error::custom("station ids are 1-based"));
        }
        if !ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(serde::de::Error::custom("station ids must be strictly ascending"));
        }
        Ok(ids.into_iter().collect())
    }
}

/// Every size-`k` subset of `1..=n`, in lexicographic order.
pub fn subsets_of_size(n: u32, k: u32) -> impl Iterator<Item = StationSet> {
    (1..=n)
        .combinations(k as usize)
        .map(|ids| ids.into_iter().collect())
}

/// The channel's answer to one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feedback {
    Silence,
    Collision,
    Single(StationId),
}

impl Feedback {
    pub fn is_single(&self) -> bool {
        matches!(self, Feedback::Single(_))
    }

    pub fn station(&self) -> Option<StationId> {
        match *self {
            Feedback::Single(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feedback::Silence => f.write_str("silence"),
            Feedback::Collision => f.write_str("collision"),
            Feedback::Single(s) => write!(f, "single:{s}"),
        }
    }
}

/// Number of stations and number of live ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameConfig {
    pub n: u32,
    pub d: u32,
}

impl GameConfig {
    pub fn new(n: u32, d: u32) -> Result<Self> {
        Self::with_station_cap(n, d, DEFAULT_MAX_STATIONS)
    }

    /// Like [`GameConfig::new`] with a different upper bound on `n`.
    pub fn with_station_cap(n: u32, d: u32, max_n: u32) -> Result<Self> {
        let reason = if n == 0 {
            "need at least one station".to_string()
        } else if d == 0 || d > n {
            "live count must satisfy 1 <= d <= n".to_string()
        } else if n > max_n {
            format!("station count exceeds the cap of {max_n}")
        } else {
            return Ok(Self { n, d });
        };
        Err(Error::InvalidConfig { n, d, reason })
    }

    pub fn stations(&self) -> StationSet {
        StationSet::full(self.n)
    }

    /// Checks that `live` is a valid hidden live set for this game.
    pub fn check_live(&self, live: &StationSet) -> Result<()> {
        if live.len() == self.d as usize && live.within(self.n) {
            Ok(())
        } else {
            Err(Error::InvalidLiveSet {
                live: live.clone(),
                n: self.n,
                d: self.d,
            })
        }
    }
}

/// The channel feedback when `query` is scheduled and `live` are the live
/// stations.
pub fn evaluate_query(query: &StationSet, live: &StationSet) -> Feedback {
    let transmitting = query.intersection(live);
    match transmitting.len() {
        0 => Feedback::Silence,
        1 => Feedback::Single(transmitting.iter().next().unwrap()),
        _ => Feedback::Collision,
    }
}

/// Whether `candidate` as live set would have produced `feedback` for `query`.
pub fn feedback_consistent(query: &StationSet, feedback: Feedback, candidate: &StationSet) -> bool {
    evaluate_query(query, candidate) == feedback
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Round {
    pub query: StationSet,
    pub feedback: Feedback,
}

/// The public history of a game: every query with the channel's answer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transcript {
    pub config: GameConfig,
    pub rounds: Vec<Round>,
}

impl Transcript {
    pub fn new(config: GameConfig) -> Self {
        Self {
            config,
            rounds: Vec::new(),
        }
    }

    pub fn push(&mut self, query: StationSet, feedback: Feedback) {
        self.rounds.push(Round { query, feedback });
    }

    /// A copy extended by one round.
    pub fn extended(&self, query: StationSet, feedback: Feedback) -> Self {
        let mut next = self.clone();
        next.push(query, feedback);
        next
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// The first `len` rounds.
    pub fn prefix(&self, len: usize) -> Self {
        Self {
            config: self.config,
            rounds: self.rounds[..len].to_vec(),
        }
    }

    pub fn transmitted(&self) -> StationSet {
        transmitted_set(self)
    }

    /// Serializable form, together with the live set the game was played on.
    pub fn to_document(&self, live: &StationSet) -> TranscriptDocument {
        TranscriptDocument {
            n: self.config.n,
            d: self.config.d,
            live: live.clone(),
            rounds: self.rounds.clone(),
        }
    }
}

/// Stations that have transmitted alone at least once.
pub fn transmitted_set(transcript: &Transcript) -> StationSet {
    transcript
        .rounds
        .iter()
        .filter_map(|r| r.feedback.station())
        .collect()
}

/// On-disk transcript format:
/// `{"n":..,"d":..,"live":[..],"rounds":[{"query":[..],"feedback":..}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptDocument {
    pub n: u32,
    pub d: u32,
    pub live: StationSet,
    pub rounds: Vec<Round>,
}

impl TranscriptDocument {
    /// Validates the document and splits it into transcript and live set.
    ///
    /// The recorded feedbacks must be the ones the channel would have given
    /// for `live`.
    pub fn into_transcript(self, max_n: u32) -> Result<(Transcript, StationSet)> {
        let config = GameConfig::with_station_cap(self.n, self.d, max_n)?;
        config.check_live(&self.live)?;
        for round in &self.rounds {
            if !round.query.within(config.n) {
                return Err(Error::domain(
                    "transcript",
                    format!("query {} leaves 1..{}", round.query, config.n),
                ));
            }
            if !feedback_consistent(&round.query, round.feedback, &self.live) {
                return Err(Error::Inconsistent {
                    query: round.query.clone(),
                    feedback: round.feedback.to_string(),
                });
            }
        }
        let transcript = Transcript {
            config,
            rounds: self.rounds,
        };
        Ok((transcript, self.live))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(ids: &[u32]) -> StationSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn feedback_follows_multiplicity() {
        assert_eq!(evaluate_query(&set(&[3]), &set(&[3, 5])), Feedback::Single(3));
        assert_eq!(evaluate_query(&set(&[]), &set(&[1, 2])), Feedback::Silence);
        assert_eq!(evaluate_query(&set(&[1, 2]), &set(&[1, 2, 4])), Feedback::Collision);
    }

    #[test]
    fn consistency_examples() {
        assert!(feedback_consistent(&set(&[1]), Feedback::Silence, &set(&[2, 3])));
        assert!(!feedback_consistent(&set(&[1]), Feedback::Single(1), &set(&[2, 3])));
        assert!(feedback_consistent(&set(&[1, 2]), Feedback::Collision, &set(&[1, 2])));
    }

    #[test]
    fn transmitted_set_collects_singles() {
        let config = GameConfig::new(4, 2).unwrap();
        let mut t = Transcript::new(config);
        assert!(transmitted_set(&t).is_empty());
        t.push(set(&[1]), Feedback::Single(1));
        t.push(set(&[2, 3]), Feedback::Collision);
        assert_eq!(transmitted_set(&t), set(&[1]));
        t.push(set(&[2]), Feedback::Single(2));
        assert_eq!(transmitted_set(&t), set(&[1, 2]));
    }

    #[test]
    fn exhaustive_multiplicity_rule() {
        for n in 1..=5u64 {
            for q in 0..(1u64 << n) {
                for live in 1..(1u64 << n) {
                    let fb = evaluate_query(&StationSet::from_mask(q), &StationSet::from_mask(live));
                    let both = q & live;
                    let expected = match both.count_ones() {
                        0 => Feedback::Silence,
                        1 => Feedback::Single(both.trailing_zeros() + 1),
                        _ => Feedback::Collision,
                    };
                    assert_eq!(fb, expected);
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(GameConfig::new(4, 2).is_ok());
        assert!(GameConfig::new(0, 0).is_err());
        assert!(GameConfig::new(3, 0).is_err());
        assert!(GameConfig::new(3, 4).is_err());
        assert!(GameConfig::new(65, 1).is_err());
        assert!(GameConfig::with_station_cap(65, 1, 128).is_ok());
    }

    #[test]
    fn big_sets_spill_past_one_word() {
        let mut s = StationSet::new();
        s.insert(3);
        s.insert(70);
        s.insert(130);
        assert_eq!(s.len(), 3);
        assert_eq!(s.max_id(), Some(130));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![3, 70, 130]);
        assert!(s.to_mask().is_none());
        s.remove(130);
        s.remove(70);
        assert_eq!(s, StationSet::singleton(3));
        assert_eq!(s.to_mask(), Some(0b100));
        let q = StationSet::range(60, 75);
        assert_eq!(evaluate_query(&q, &[3, 70].into()), Feedback::Single(70));
    }

    #[test]
    fn set_ordering_is_lexicographic() {
        let mut v = vec![set(&[2, 3]), set(&[1, 3]), set(&[1, 2]), set(&[])];
        v.sort();
        assert_eq!(v, vec![set(&[]), set(&[1, 2]), set(&[1, 3]), set(&[2, 3])]);
    }

    #[test]
    fn subsets_enumerate_in_order() {
        let all: Vec<_> = subsets_of_size(3, 2).collect();
        assert_eq!(all, vec![set(&[1, 2]), set(&[1, 3]), set(&[2, 3])]);
        assert_eq!(subsets_of_size(6, 3).count(), 20);
    }

    #[test]
    fn document_json_shape() {
        let config = GameConfig::new(4, 2).unwrap();
        let mut t = Transcript::new(config);
        t.push(set(&[1, 2, 3, 4]), Feedback::Collision);
        t.push(set(&[1, 2]), Feedback::Single(1));
        t.push(set(&[]), Feedback::Silence);
        let json = serde_json::to_string(&t.to_document(&set(&[1, 3]))).unwrap();
        assert_eq!(
            json,
            r#"{"n":4,"d":2,"live":[1,3],"rounds":[{"query":[1,2,3,4],"feedback":"collision"},{"query":[1,2],"feedback":{"single":1}},{"query":[],"feedback":"silence"}]}"#
        );
    }

    #[test]
    fn document_rejects_bad_input() {
        let bad_order = r#"{"n":3,"d":1,"live":[2],"rounds":[{"query":[2,1],"feedback":"collision"}]}"#;
        assert!(serde_json::from_str::<TranscriptDocument>(bad_order).is_err());
        let wrong_feedback = r#"{"n":3,"d":1,"live":[2],"rounds":[{"query":[1],"feedback":{"single":1}}]}"#;
        let doc: TranscriptDocument = serde_json::from_str(wrong_feedback).unwrap();
        assert_eq!(
            doc.into_transcript(DEFAULT_MAX_STATIONS).unwrap_err().name(),
            "Inconsistent"
        );
    }

    fn arb_set(n: u32) -> impl Strategy<Value = StationSet> {
        proptest::collection::btree_set(1..=n, 0..=n as usize)
            .prop_map(|ids| ids.into_iter().collect())
    }

    proptest! {
        #[test]
        fn evaluate_is_consistent_with_itself(q in arb_set(12), live in arb_set(12)) {
            prop_assume!(!live.is_empty());
            prop_assert!(feedback_consistent(&q, evaluate_query(&q, &live), &live));
        }

        #[test]
        fn evaluate_is_permutation_equivariant(
            q in arb_set(8),
            live in arb_set(8),
            perm in Just((1..=8u32).collect::<Vec<_>>()).prop_shuffle(),
        ) {
            prop_assume!(!live.is_empty());
            let before = evaluate_query(&q, &live);
            let after = evaluate_query(&q.relabel(&perm), &live.relabel(&perm));
            let mapped = match before {
                Feedback::Single(s) => Feedback::Single(perm[s as usize - 1]),
                other => other,
            };
            prop_assert_eq!(after, mapped);
        }

        #[test]
        fn document_round_trips(
            live in arb_set(70),
            queries in proptest::collection::vec(arb_set(70), 0..6),
        ) {
            prop_assume!(!live.is_empty());
            let config = GameConfig::with_station_cap(70, live.len() as u32, 70).unwrap();
            let mut t = Transcript::new(config);
            for q in queries {
                let fb = evaluate_query(&q, &live);
                t.push(q, fb);
            }
            let json = serde_json::to_string(&t.to_document(&live)).unwrap();
            let doc: TranscriptDocument = serde_json::from_str(&json).unwrap();
            let (back, back_live) = doc.into_transcript(70).unwrap();
            prop_assert_eq!(back, t);
            prop_assert_eq!(back_live, live);
        }
    }
}
