//! Decision trees of strategies, normalisation and the normal-form check.
//!
//! The tree of a strategy has one internal node per reachable transcript
//! prefix (labelled with the query asked there), one edge per feedback that
//! some live set can produce, and one leaf per live set. Edges whose feedback
//! is a single transmission are black; silence and collision edges are red.
//!
//! [`normalize`] builds the tree of a derived strategy that never schedules
//! a station already heard alone and stops right after the `d`-th single
//! transmission. In normal form every root-to-leaf path has exactly `d` black
//! edges with distinct stations and there are exactly `C(n, d)` leaves.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::bounds;
use crate::channel::{evaluate_query, subsets_of_size, Feedback, GameConfig, StationSet, Transcript};
use crate::engine::{self, default_round_cap};
use crate::error::{Error, Result};
use crate::strategies::{Action, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeColor {
    Red,
    Black,
}

pub fn edge_color(feedback: Feedback) -> EdgeColor {
    if feedback.is_single() {
        EdgeColor::Black
    } else {
        EdgeColor::Red
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QNode {
    Internal {
        query: StationSet,
        children: BTreeMap<Feedback, QNode>,
    },
    Leaf {
        live: StationSet,
    },
}

impl QNode {
    fn depth(&self) -> usize {
        match self {
            QNode::Leaf { .. } => 0,
            QNode::Internal { children, .. } => {
                1 + children.values().map(QNode::depth).max().unwrap_or(0)
            }
        }
    }

    fn leaves(&self) -> usize {
        match self {
            QNode::Leaf { .. } => 1,
            QNode::Internal { children, .. } => children.values().map(QNode::leaves).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QTree {
    pub config: GameConfig,
    pub root: QNode,
}

/// One root-to-leaf path: the feedbacks along it and the leaf's live set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePath {
    pub feedbacks: Vec<Feedback>,
    pub live: StationSet,
}

impl QTree {
    /// Longest root-to-leaf edge count.
    pub fn max_depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaves()
    }

    /// All root-to-leaf paths, in feedback order.
    pub fn paths(&self) -> Vec<TreePath> {
        fn walk(node: &QNode, prefix: &mut Vec<Feedback>, out: &mut Vec<TreePath>) {
            match node {
                QNode::Leaf { live } => out.push(TreePath {
                    feedbacks: prefix.clone(),
                    live: live.clone(),
                }),
                QNode::Internal { children, .. } => {
                    for (fb, child) in children {
                        prefix.push(*fb);
                        walk(child, prefix, out);
                        prefix.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }

    /// Plain-text graph description.
    ///
    /// Node ids are assigned in preorder (children in feedback order). All
    /// `node`/`leaf` lines come first, then the `edge` lines in the same order.
    pub fn export_graph(&self) -> String {
        fn walk(node: &QNode, next: &mut usize, nodes: &mut String, edges: &mut String) {
            let id = *next;
            *next += 1;
            match node {
                QNode::Leaf { live } => {
                    let _ = writeln!(nodes, "leaf {id} live={live}");
                }
                QNode::Internal { query, children } => {
                    let _ = writeln!(nodes, "node {id} query={query}");
                    for (fb, child) in children {
                        let color = match edge_color(*fb) {
                            EdgeColor::Red => "red",
                            EdgeColor::Black => "black",
                        };
                        let _ = writeln!(edges, "edge {id} {} label={fb} color={color}", *next);
                        walk(child, next, nodes, edges);
                    }
                }
            }
        }
        let (mut nodes, mut edges) = (String::new(), String::new());
        walk(&self.root, &mut 0, &mut nodes, &mut edges);
        nodes.push_str(&edges);
        nodes
    }
}

fn grow(
    strategy: &dyn Strategy,
    transcript: Transcript,
    candidates: Vec<StationSet>,
    round_cap: usize,
) -> Result<QNode> {
    let Some(query) = engine::next_query(strategy, &transcript, round_cap)? else {
        if candidates.len() > 1 {
            return Err(Error::AmbiguousLeaf {
                first: candidates[0].clone(),
                second: candidates[1].clone(),
            });
        }
        let live = candidates.into_iter().next().expect("nonempty branch");
        return Ok(QNode::Leaf { live });
    };
    let mut groups: BTreeMap<Feedback, Vec<StationSet>> = BTreeMap::new();
    for c in candidates {
        groups.entry(evaluate_query(&query, &c)).or_default().push(c);
    }
    let mut children = BTreeMap::new();
    for (fb, group) in groups {
        let child = grow(strategy, transcript.extended(query.clone(), fb), group, round_cap)?;
        children.insert(fb, child);
    }
    Ok(QNode::Internal { query, children })
}

/// The decision tree of `strategy` over every size-`d` live set.
pub fn build_tree(strategy: &dyn Strategy, config: GameConfig, budget: u64) -> Result<QTree> {
    engine::check_budget(&config, budget)?;
    let candidates = subsets_of_size(config.n, config.d).collect();
    let root = grow(strategy, Transcript::new(config), candidates, default_round_cap(&config))?;
    Ok(QTree { config, root })
}

/// Wraps a strategy so that it never schedules a station already heard.
///
/// The wrapped strategy is replayed on the transcript it *would* have seen:
/// when the reduced query `Q - R` got feedback `f` and `k = |Q ∩ R|` heard
/// stations were dropped, the original query would have seen `f` if `k = 0`,
/// a single transmission from the dropped station if `k = 1` and `f` is
/// silence, and a collision otherwise. An emptied query is still asked and
/// answered with silence.
#[derive(Debug, Clone, Copy)]
pub struct Normalized<S>(pub S);

impl<S: Strategy> Normalized<S> {
    fn original_feedback(query: &StationSet, heard: &StationSet, reduced: Feedback) -> Feedback {
        let dropped = query.intersection(heard);
        match (dropped.len(), reduced) {
            (0, fb) => fb,
            (1, Feedback::Silence) => Feedback::Single(dropped.single().unwrap()),
            _ => Feedback::Collision,
        }
    }
}

impl<S: Strategy> Strategy for Normalized<S> {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn next_action(&self, transcript: &Transcript) -> Action {
        let mut original = Transcript::new(transcript.config);
        let mut heard = StationSet::new();
        for round in &transcript.rounds {
            let Action::Query(query) = self.0.next_action(&original) else {
                return Action::Done;
            };
            let fb = Self::original_feedback(&query, &heard, round.feedback);
            if let Feedback::Single(s) = round.feedback {
                heard.insert(s);
            }
            original.push(query, fb);
        }
        match self.0.next_action(&original) {
            Action::Query(query) => Action::Query(query.difference(&heard)),
            Action::Done => Action::Done,
        }
    }
}

/// The tree of the normalised form of `strategy`.
pub fn normalize(strategy: &dyn Strategy, config: GameConfig, budget: u64) -> Result<QTree> {
    build_tree(&Normalized(strategy), config, budget)
}

/// Plays a fixed decision tree. Stops if the transcript leaves the tree.
#[derive(Debug, Clone)]
pub struct TreeStrategy {
    pub tree: QTree,
    pub name: String,
}

impl TreeStrategy {
    pub fn new(tree: QTree, name: impl Into<String>) -> Self {
        Self {
            tree,
            name: name.into(),
        }
    }
}

impl Strategy for TreeStrategy {
    fn name(&self) -> &str {
        &self.name
    }

    fn next_action(&self, transcript: &Transcript) -> Action {
        let mut node = &self.tree.root;
        for round in &transcript.rounds {
            match node {
                QNode::Internal { query, children } if *query == round.query => {
                    match children.get(&round.feedback) {
                        Some(child) => node = child,
                        None => return Action::Done,
                    }
                }
                _ => return Action::Done,
            }
        }
        match node {
            QNode::Internal { query, .. } => Action::Query(query.clone()),
            QNode::Leaf { .. } => Action::Done,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalFormReport {
    pub max_depth: usize,
    pub leaf_count: usize,
    /// Black edges per root-to-leaf path, sorted ascending.
    pub black_per_path: Vec<usize>,
    /// Paths on which some station is heard alone more than once.
    pub repeated_transmitter_paths: usize,
    /// Leaves whose live set differs from the stations heard on their path.
    pub misresolved_leaves: usize,
    pub property_holds: bool,
}

pub fn check_normal_form(tree: &QTree) -> NormalFormReport {
    let d = tree.config.d as usize;
    let paths = tree.paths();
    let mut black_per_path = Vec::with_capacity(paths.len());
    let mut repeated = 0;
    let mut misresolved = 0;
    for path in &paths {
        let heard: Vec<u32> = path.feedbacks.iter().filter_map(Feedback::station).collect();
        let distinct: StationSet = heard.iter().copied().collect();
        black_per_path.push(heard.len());
        if distinct.len() != heard.len() {
            repeated += 1;
        }
        if distinct != path.live {
            misresolved += 1;
        }
    }
    black_per_path.sort_unstable();
    let expected_leaves = bounds::binomial(u64::from(tree.config.n), u64::from(tree.config.d))
        .ok()
        .and_then(|c| c.to_usize());
    let property_holds = black_per_path.iter().all(|&b| b == d)
        && repeated == 0
        && misresolved == 0
        && expected_leaves == Some(paths.len());
    NormalFormReport {
        max_depth: tree.max_depth(),
        leaf_count: paths.len(),
        black_per_path,
        repeated_transmitter_paths: repeated,
        misresolved_leaves: misresolved,
        property_holds,
    }
}
