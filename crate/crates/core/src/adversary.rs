//! Online adversaries.
//!
//! An adversary does not commit to a live set up front. It tracks every
//! size-`d` live set still consistent with the transcript and answers each
//! query with any feedback that keeps that family nonempty.

use std::cell::RefCell;
use std::collections::BTreeMap;

use crate::channel::{
    evaluate_query, feedback_consistent, subsets_of_size, Feedback, GameConfig, StationSet,
    Transcript,
};
use crate::engine::{self, continue_fixed, default_round_cap};
use crate::error::{Error, Result};
use crate::oracle::{Oracle, OracleLimits};
use crate::strategies::Strategy;

/// What is known about the live set: the consistent candidates and the
/// stations already heard alone.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KnowledgeState {
    /// Sorted, each of size `d`.
    pub candidates: Vec<StationSet>,
    pub transmitted: StationSet,
}

impl KnowledgeState {
    /// Splits the candidates by the feedback each would produce for `query`.
    pub fn partition(&self, query: &StationSet) -> BTreeMap<Feedback, Vec<StationSet>> {
        let mut groups: BTreeMap<Feedback, Vec<StationSet>> = BTreeMap::new();
        for c in &self.candidates {
            groups.entry(evaluate_query(query, c)).or_default().push(c.clone());
        }
        groups
    }
}

pub fn initial_state(config: GameConfig, budget: u64) -> Result<KnowledgeState> {
    engine::check_budget(&config, budget)?;
    Ok(KnowledgeState {
        candidates: subsets_of_size(config.n, config.d).collect(),
        transmitted: StationSet::new(),
    })
}

pub fn refine(state: &KnowledgeState, query: &StationSet, feedback: Feedback) -> Result<KnowledgeState> {
    let candidates: Vec<StationSet> = state
        .candidates
        .iter()
        .filter(|c| feedback_consistent(query, feedback, c))
        .cloned()
        .collect();
    if candidates.is_empty() {
        return Err(Error::Inconsistent {
            query: query.clone(),
            feedback: feedback.to_string(),
        });
    }
    let mut transmitted = state.transmitted.clone();
    if let Feedback::Single(s) = feedback {
        transmitted.insert(s);
    }
    Ok(KnowledgeState {
        candidates,
        transmitted,
    })
}

/// Preference among equally good answers: collision, then silence, then the
/// single transmission with the smallest id.
fn tie_rank(feedback: &Feedback) -> (u8, u32) {
    match *feedback {
        Feedback::Collision => (0, 0),
        Feedback::Silence => (1, 0),
        Feedback::Single(s) => (2, s),
    }
}

/// Picks the feedback with the highest score, breaking ties by [`tie_rank`].
fn best_by<K: Ord>(scored: impl IntoIterator<Item = (Feedback, K)>) -> Feedback {
    scored
        .into_iter()
        .max_by(|(fa, ka), (fb, kb)| ka.cmp(kb).then_with(|| tie_rank(fb).cmp(&tie_rank(fa))))
        .map(|(f, _)| f)
        .expect("a nonempty candidate family always admits some feedback")
}

/// Count-greedy answer: keep as many candidates alive as possible.
///
/// This is only a heuristic. With `n = 3, d = 2` and query `{1}` it answers
/// `Single(1)` (two survivors) although `Silence` (one survivor) forces a
/// longer game.
pub fn greedy_answer(state: &KnowledgeState, query: &StationSet) -> Feedback {
    best_by(
        state
            .partition(query)
            .into_iter()
            .map(|(fb, group)| (fb, group.len())),
    )
}

/// How the game is assumed to continue after the adversary's answer.
pub enum Continuation<'a> {
    /// The searcher plays optimally from here on; answers are scored by the
    /// exact minimax value of the refined state.
    Optimal(&'a mut Oracle),
    /// The searcher is the given strategy; answers are scored by the longest
    /// remaining run of that strategy over the surviving candidates.
    Strategy(&'a dyn Strategy),
}

/// The answer that maximises the remaining game length under `continuation`.
///
/// Scores are total rounds from the start of the game.
pub fn exact_answer(
    transcript: &Transcript,
    state: &KnowledgeState,
    query: &StationSet,
    continuation: Continuation<'_>,
) -> Result<Feedback> {
    let groups = state.partition(query);
    let mut scored = Vec::with_capacity(groups.len());
    match continuation {
        Continuation::Optimal(oracle) => {
            for (fb, group) in groups {
                let mut transmitted = state.transmitted.clone();
                if let Feedback::Single(s) = fb {
                    transmitted.insert(s);
                }
                let rest = oracle.solve_state(&group, &transmitted)?;
                scored.push((fb, transcript.len() + 1 + rest as usize));
            }
        }
        Continuation::Strategy(strategy) => {
            let cap = default_round_cap(&transcript.config);
            for (fb, group) in groups {
                let next = transcript.extended(query.clone(), fb);
                let mut longest = 0;
                for live in &group {
                    let run = continue_fixed(strategy, next.clone(), live, cap)?;
                    longest = longest.max(run.rounds_used);
                }
                scored.push((fb, longest));
            }
        }
    }
    Ok(best_by(scored))
}

pub trait Adversary {
    fn name(&self) -> &str;

    fn answer(&self, transcript: &Transcript, state: &KnowledgeState, query: &StationSet) -> Result<Feedback>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyAdversary;

impl Adversary for GreedyAdversary {
    fn name(&self) -> &str {
        "greedy"
    }

    fn answer(&self, _: &Transcript, state: &KnowledgeState, query: &StationSet) -> Result<Feedback> {
        Ok(greedy_answer(state, query))
    }
}

enum Foil<'a> {
    Optimal(RefCell<Option<Box<Oracle>>>, OracleLimits),
    Strategy(&'a dyn Strategy),
}

/// Adversary that answers with [`exact_answer`].
pub struct ExactAdversary<'a> {
    foil: Foil<'a>,
}

impl<'a> ExactAdversary<'a> {
    /// Maximises the run length of `strategy` specifically. Played against
    /// that same strategy it realises the strategy's worst case.
    pub fn against(strategy: &'a dyn Strategy) -> Self {
        Self {
            foil: Foil::Strategy(strategy),
        }
    }

    /// Assumes optimal play from the searcher after each answer.
    pub fn optimal(limits: OracleLimits) -> Self {
        Self {
            foil: Foil::Optimal(RefCell::new(None), limits),
        }
    }
}

impl Adversary for ExactAdversary<'_> {
    fn name(&self) -> &str {
        "exact"
    }

    fn answer(&self, transcript: &Transcript, state: &KnowledgeState, query: &StationSet) -> Result<Feedback> {
        match &self.foil {
            Foil::Strategy(s) => exact_answer(transcript, state, query, Continuation::Strategy(*s)),
            Foil::Optimal(cell, limits) => {
                let mut slot = cell.borrow_mut();
                if slot.as_ref().is_none_or(|o| o.config() != transcript.config) {
                    *slot = Some(Box::new(Oracle::new(transcript.config, *limits)?));
                }
                let oracle = slot.as_mut().unwrap();
                exact_answer(transcript, state, query, Continuation::Optimal(oracle))
            }
        }
    }
}

/// Names accepted by [`by_name`].
pub const ADVERSARY_NAMES: &[&str] = &["greedy", "exact"];

/// `exact` is built against `strategy`.
pub fn by_name<'a>(name: &str, strategy: &'a dyn Strategy) -> Option<Box<dyn Adversary + 'a>> {
    match name {
        "greedy" => Some(Box::new(GreedyAdversary)),
        "exact" => Some(Box::new(ExactAdversary::against(strategy))),
        _ => None,
    }
}
