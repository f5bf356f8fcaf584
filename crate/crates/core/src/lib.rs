//! Deterministic conflict resolution on a multiple access channel.
//!
//! `n` stations share a channel and an unknown set of `d` of them are live.
//! Each round a strategy picks a set of stations to transmit; the channel
//! answers silence, a collision, or the id of the single live station that
//! got through. The game ends once every live station has transmitted alone.
//!
//! The crate provides
//!
//! * the channel model and transcripts ([`channel`]),
//! * a game engine with fixed live sets and online adversaries ([`engine`],
//!   [`adversary`]),
//! * classic strategies ([`strategies`]),
//! * decision trees, their normalisation and normal-form checks ([`qtree`]),
//! * exact counting bounds ([`bounds`]),
//! * an exhaustive minimax solver for the optimal worst case ([`oracle`]),
//! * a report putting all of the above side by side ([`report`]).

pub mod adversary;
pub mod bounds;
pub mod channel;
pub mod engine;
mod error;
pub mod oracle;
pub mod qtree;
pub mod report;
pub mod strategies;

pub use adversary::{Adversary, ExactAdversary, GreedyAdversary, KnowledgeState};
pub use channel::{
    evaluate_query, feedback_consistent, transmitted_set, Feedback, GameConfig, StationId,
    StationSet, Transcript, TranscriptDocument,
};
pub use engine::{run_adversarial, run_fixed, worst_case_rounds, GameResult};
pub use error::{Error, Result};
pub use oracle::{exact_optimal_rounds, optimal_strategy_tree, Oracle, OracleLimits};
pub use qtree::{build_tree, check_normal_form, normalize, NormalFormReport, QNode, QTree};
pub use report::{generate_report, ReportLimits, ReportRow};
pub use strategies::{Action, LinearScan, Strategy, TreeSplit};
