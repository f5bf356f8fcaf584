//! Game runner: plays a strategy against a fixed live set or an online
//! adversary, and measures worst cases by enumerating live sets.
//!
//! A game stops as soon as `d` distinct stations have transmitted alone,
//! whether or not the strategy would continue, or when the strategy says it
//! is done. Hitting the round cap first is an error.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{self, Adversary};
use crate::bounds;
use crate::channel::{evaluate_query, GameConfig, Round, StationSet, Transcript};
use crate::error::{Error, Result};
use crate::strategies::{Action, Strategy};

/// Default limit on the number of live sets enumerated in one call.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

/// `4n + 16`; no shipped strategy comes close.
pub fn default_round_cap(config: &GameConfig) -> usize {
    4 * config.n as usize + 16
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameResult {
    pub transcript: Transcript,
    pub rounds_used: usize,
    /// Every station of `witness_live` transmitted alone.
    pub completed: bool,
    /// The fixed live set, or the adversary's surviving candidate.
    pub witness_live: StationSet,
}

impl GameResult {
    pub fn to_document(&self) -> GameResultDocument {
        GameResultDocument {
            n: self.transcript.config.n,
            d: self.transcript.config.d,
            live: self.witness_live.clone(),
            rounds: self.transcript.rounds.clone(),
            rounds_used: self.rounds_used,
            completed: self.completed,
            witness_live: self.witness_live.clone(),
        }
    }
}

/// The transcript document extended with the outcome of the game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameResultDocument {
    pub n: u32,
    pub d: u32,
    pub live: StationSet,
    pub rounds: Vec<Round>,
    pub rounds_used: usize,
    pub completed: bool,
    pub witness_live: StationSet,
}

fn finished(transcript: &Transcript) -> bool {
    transcript.transmitted().len() >= transcript.config.d as usize
}

/// Asks `strategy` for its next query, validating it. `None` means done.
pub(crate) fn next_query(
    strategy: &dyn Strategy,
    transcript: &Transcript,
    round_cap: usize,
) -> Result<Option<StationSet>> {
    if finished(transcript) {
        return Ok(None);
    }
    let query = match strategy.next_action(transcript) {
        Action::Done => return Ok(None),
        Action::Query(q) => q,
    };
    if transcript.len() >= round_cap {
        return Err(Error::CapExceeded { round_cap });
    }
    if !query.within(transcript.config.n) {
        return Err(Error::InvalidQuery {
            strategy: strategy.name().to_string(),
            query,
            n: transcript.config.n,
        });
    }
    Ok(Some(query))
}

pub fn run_fixed(
    strategy: &dyn Strategy,
    config: GameConfig,
    live: &StationSet,
    round_cap: usize,
) -> Result<GameResult> {
    continue_fixed(strategy, Transcript::new(config), live, round_cap)
}

/// Continues a game from `transcript` with `live` as the hidden live set.
///
/// The prefix is trusted; `rounds_used` counts the whole transcript.
pub fn continue_fixed(
    strategy: &dyn Strategy,
    mut transcript: Transcript,
    live: &StationSet,
    round_cap: usize,
) -> Result<GameResult> {
    transcript.config.check_live(live)?;
    while let Some(query) = next_query(strategy, &transcript, round_cap)? {
        let feedback = evaluate_query(&query, live);
        transcript.push(query, feedback);
    }
    let completed = transcript.transmitted() == *live;
    Ok(GameResult {
        rounds_used: transcript.len(),
        completed,
        witness_live: live.clone(),
        transcript,
    })
}

pub(crate) fn check_budget(config: &GameConfig, budget: u64) -> Result<()> {
    let count = bounds::binomial(u64::from(config.n), u64::from(config.d))?;
    if count > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            what: "live-set enumeration",
            needed: count.to_string(),
            limit: budget.to_string(),
        });
    }
    Ok(())
}

/// Longest game over every live set of size `d`, with the first live set (in
/// lexicographic order) attaining it.
pub fn worst_case_rounds(
    strategy: &dyn Strategy,
    config: GameConfig,
    round_cap: usize,
    budget: u64,
) -> Result<(usize, StationSet)> {
    check_budget(&config, budget)?;
    let lives: Vec<StationSet> = crate::channel::subsets_of_size(config.n, config.d).collect();
    let rounds: Vec<usize> = lives
        .par_iter()
        .map(|live| run_fixed(strategy, config, live, round_cap).map(|r| r.rounds_used))
        .collect::<Result<_>>()?;
    let (idx, max) = rounds
        .iter()
        .enumerate()
        .fold((0, 0), |best, (i, &r)| if r > best.1 { (i, r) } else { best });
    Ok((max, lives[idx].clone()))
}

/// Plays `strategy` against an adversary that picks each answer online.
///
/// The adversary's answers are checked against the family of live sets still
/// consistent with the transcript; the witness is the smallest survivor.
pub fn run_adversarial(
    strategy: &dyn Strategy,
    adversary: &dyn Adversary,
    config: GameConfig,
    round_cap: usize,
    budget: u64,
) -> Result<GameResult> {
    let mut state = adversary::initial_state(config, budget)?;
    let mut transcript = Transcript::new(config);
    while let Some(query) = next_query(strategy, &transcript, round_cap)? {
        let feedback = adversary.answer(&transcript, &state, &query)?;
        state = adversary::refine(&state, &query, feedback).map_err(|_| {
            Error::AdversaryInconsistent {
                adversary: adversary.name().to_string(),
                query: query.clone(),
                feedback: feedback.to_string(),
            }
        })?;
        transcript.push(query, feedback);
    }
    let witness_live = state.candidates[0].clone();
    let completed = transcript.transmitted() == witness_live;
    Ok(GameResult {
        rounds_used: transcript.len(),
        completed,
        witness_live,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{ExactAdversary, GreedyAdversary};
    use crate::channel::Feedback;
    use crate::strategies::{LinearScan, TreeSplit};

    fn cfg(n: u32, d: u32) -> GameConfig {
        GameConfig::new(n, d).unwrap()
    }

    #[test]
    fn fixed_runs() {
        let r = run_fixed(&LinearScan, cfg(2, 1), &[2].into(), 24).unwrap();
        assert_eq!((r.rounds_used, r.completed), (2, true));
        let r = run_fixed(&TreeSplit, cfg(4, 1), &[3].into(), 32).unwrap();
        assert_eq!((r.rounds_used, r.completed), (1, true));
        let r = run_fixed(&LinearScan, cfg(1, 1), &[1].into(), 20).unwrap();
        assert_eq!((r.rounds_used, r.completed), (1, true));
    }

    #[test]
    fn tree_split_two_of_four() {
        let r = run_fixed(&TreeSplit, cfg(4, 2), &[1, 3].into(), 32).unwrap();
        let queries: Vec<_> = r.transcript.rounds.iter().map(|r| (r.query.clone(), r.feedback)).collect();
        assert_eq!(
            queries,
            vec![
                ([1, 2, 3, 4].into(), Feedback::Collision),
                ([1, 2].into(), Feedback::Single(1)),
                ([3, 4].into(), Feedback::Single(3)),
            ]
        );
        assert_eq!(r.rounds_used, 3);
        assert!(r.completed);
    }

    #[test]
    fn worst_cases() {
        assert_eq!(
            worst_case_rounds(&LinearScan, cfg(4, 1), 32, 1000).unwrap(),
            (4, [4].into())
        );
        assert_eq!(worst_case_rounds(&TreeSplit, cfg(4, 1), 32, 1000).unwrap().0, 1);
        assert_eq!(
            worst_case_rounds(&LinearScan, cfg(2, 2), 24, 1000).unwrap(),
            (2, [1, 2].into())
        );
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let err = worst_case_rounds(&TreeSplit, cfg(30, 15), 200, 1_000_000).unwrap_err();
        assert_eq!(err.name(), "BudgetExceeded");
    }

    #[test]
    fn cap_exceeded_is_reported() {
        let err = run_fixed(&LinearScan, cfg(8, 1), &[8].into(), 3).unwrap_err();
        assert_eq!(err, Error::CapExceeded { round_cap: 3 });
    }

    struct OutOfRange;
    impl Strategy for OutOfRange {
        fn name(&self) -> &str {
            "out-of-range"
        }
        fn next_action(&self, _: &Transcript) -> Action {
            Action::Query([1, 9].into())
        }
    }

    #[test]
    fn invalid_query_is_reported() {
        let err = run_fixed(&OutOfRange, cfg(4, 1), &[1].into(), 10).unwrap_err();
        assert_eq!(err.name(), "InvalidQuery");
    }

    #[test]
    fn invalid_live_set_is_rejected() {
        let err = run_fixed(&LinearScan, cfg(4, 2), &[1].into(), 10).unwrap_err();
        assert_eq!(err.name(), "InvalidLiveSet");
    }

    #[test]
    fn stopping_early_is_not_completion() {
        struct Quitter;
        impl Strategy for Quitter {
            fn name(&self) -> &str {
                "quitter"
            }
            fn next_action(&self, _: &Transcript) -> Action {
                Action::Done
            }
        }
        let r = run_fixed(&Quitter, cfg(3, 1), &[2].into(), 10).unwrap();
        assert_eq!((r.rounds_used, r.completed), (0, false));
    }

    #[test]
    fn greedy_adversary_runs() {
        let r = run_adversarial(&LinearScan, &GreedyAdversary, cfg(3, 1), 28, 1000).unwrap();
        assert_eq!(r.rounds_used, 3);
        assert!(r.completed);
        assert_eq!(r.witness_live, [3].into());
        let r = run_adversarial(&TreeSplit, &GreedyAdversary, cfg(2, 2), 24, 1000).unwrap();
        assert!(r.rounds_used >= 2);
    }

    #[test]
    fn exact_adversary_against_tree_split() {
        let adv = ExactAdversary::against(&TreeSplit);
        let r = run_adversarial(&TreeSplit, &adv, cfg(3, 2), 28, 1000).unwrap();
        assert!(r.rounds_used >= 3);
        assert_eq!(
            r.rounds_used,
            worst_case_rounds(&TreeSplit, cfg(3, 2), 28, 1000).unwrap().0
        );
    }

    #[test]
    fn result_document_extends_transcript() {
        let r = run_fixed(&LinearScan, cfg(2, 1), &[2].into(), 24).unwrap();
        let json = serde_json::to_string(&r.to_document()).unwrap();
        assert_eq!(
            json,
            r#"{"n":2,"d":1,"live":[2],"rounds":[{"query":[1],"feedback":"silence"},{"query":[2],"feedback":{"single":2}}],"rounds_used":2,"completed":true,"witness_live":[2]}"#
        );
    }
}
