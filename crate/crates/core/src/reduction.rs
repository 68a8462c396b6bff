//! Redheffer reduction on the interaction graph.
//!
//! Two fixpoint procedures share one engine: the full rule set (a), (b),
//! (c), which deduces restrictions on the attractor, and the single rule
//! (R), which deduces restrictions on the equilibria set. Both only ever
//! upgrade marks along `Circ → Cross → Bullet`, so at most `2n` rule
//! applications happen before a fixpoint.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{render_dot, ColoredGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mark {
    Circ,
    Cross,
    Bullet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttractorClass {
    /// Only bullets: nonsingular, unique globally attracting equilibrium.
    GlobalPointAttractor,
    /// Bullets and crosses: one globally attracting equilibrium per leaf.
    FoliatedPointAttractors,
    /// Some circle survives: the graph admits systems with periodic orbits.
    PossiblyPeriodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    A,
    B,
    C,
    R,
}

/// A single enabled rule application: `rule` fired at `source` upgrades
/// `target` to `mark`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Move {
    pub rule: Rule,
    pub source: usize,
    pub target: usize,
    pub mark: Mark,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedGraph {
    base: ColoredGraph,
    marks: Vec<Mark>,
    applications: usize,
}

impl MarkedGraph {
    /// Bullets on black vertices, circles on white ones.
    pub fn initial(g: &ColoredGraph) -> Self {
        let marks = (0..g.n())
            .map(|v| if g.is_black(v) { Mark::Bullet } else { Mark::Circ })
            .collect();
        MarkedGraph {
            base: g.clone(),
            marks,
            applications: 0,
        }
    }

    pub fn base(&self) -> &ColoredGraph {
        &self.base
    }

    pub fn marks(&self) -> &[Mark] {
        &self.marks
    }

    pub fn mark(&self, v: usize) -> Mark {
        self.marks[v]
    }

    /// Number of rule applications that produced this state.
    pub fn applications(&self) -> usize {
        self.applications
    }

    pub fn with_mark(&self, mark: Mark) -> Vec<usize> {
        (0..self.marks.len()).filter(|&v| self.marks[v] == mark).collect()
    }

    pub fn all_bullet(&self) -> bool {
        self.marks.iter().all(|&m| m == Mark::Bullet)
    }

    fn apply(&mut self, mv: Move) {
        debug_assert!(mv.mark > self.marks[mv.target]);
        self.marks[mv.target] = mv.mark;
        self.applications += 1;
    }

    /// Enabled moves of rules (a), (b), (c), listed by source vertex
    /// ascending and, per vertex, in rule order.
    pub fn full_moves(&self) -> Vec<Move> {
        let g = &self.base;
        let mut moves = Vec::new();
        for j in 0..g.n() {
            let mj = self.marks[j];
            if mj != Mark::Circ {
                let mut not_bullet = g.neighbours(j).filter(|&v| self.marks[v] != Mark::Bullet);
                if let (Some(l), None) = (not_bullet.next(), not_bullet.next()) {
                    moves.push(Move {
                        rule: Rule::A,
                        source: j,
                        target: l,
                        mark: Mark::Bullet,
                    });
                }
                let mut open = g.neighbours(j).filter(|&v| self.marks[v] == Mark::Circ);
                if let (Some(l), None) = (open.next(), open.next()) {
                    moves.push(Move {
                        rule: Rule::B,
                        source: j,
                        target: l,
                        mark: Mark::Cross,
                    });
                }
            } else if g.neighbours(j).all(|v| self.marks[v] != Mark::Circ) {
                moves.push(Move {
                    rule: Rule::C,
                    source: j,
                    target: j,
                    mark: Mark::Cross,
                });
            }
        }
        moves
    }

    /// Enabled moves of rule (R): every vertex, whatever its own mark, with
    /// exactly one non-bullet neighbour forces that neighbour.
    pub fn simplified_moves(&self) -> Vec<Move> {
        let g = &self.base;
        let mut moves = Vec::new();
        for j in 0..g.n() {
            let mut not_bullet = g.neighbours(j).filter(|&v| self.marks[v] != Mark::Bullet);
            if let (Some(k), None) = (not_bullet.next(), not_bullet.next()) {
                moves.push(Move {
                    rule: Rule::R,
                    source: j,
                    target: k,
                    mark: Mark::Bullet,
                });
            }
        }
        moves
    }

    pub fn classify(&self) -> AttractorClass {
        if self.all_bullet() {
            AttractorClass::GlobalPointAttractor
        } else if self.marks.iter().all(|&m| m != Mark::Circ) {
            AttractorClass::FoliatedPointAttractors
        } else {
            AttractorClass::PossiblyPeriodic
        }
    }

    pub fn to_json(&self) -> MarkedJson {
        let one_based = |m| self.with_mark(m).iter().map(|v| v + 1).collect();
        MarkedJson {
            n: self.marks.len(),
            bullet: one_based(Mark::Bullet),
            cross: one_based(Mark::Cross),
            circ: one_based(Mark::Circ),
        }
    }

    /// DOT rendering; crosses get a double circle and a `+` label.
    pub fn to_dot(&self) -> String {
        render_dot(&self.base, Some(&self.marks))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedJson {
    pub n: usize,
    pub bullet: Vec<usize>,
    pub cross: Vec<usize>,
    pub circ: Vec<usize>,
}

fn run(mut state: MarkedGraph, moves: fn(&MarkedGraph) -> Vec<Move>, mut pick: impl FnMut(&[Move]) -> usize) -> MarkedGraph {
    loop {
        let enabled = moves(&state);
        if enabled.is_empty() {
            return state;
        }
        let mv = enabled[pick(&enabled)];
        state.apply(mv);
    }
}

/// Fixpoint of rules (a), (b), (c): the reduced graph.
///
/// Scans vertices ascending with rules in order (a), (b), (c) and restarts
/// after every change.
pub fn reduce_full(g: &ColoredGraph) -> MarkedGraph {
    run(MarkedGraph::initial(g), MarkedGraph::full_moves, |_| 0)
}

/// Same fixpoint, firing a uniformly random enabled move at each step.
pub fn reduce_full_random<R: Rng>(g: &ColoredGraph, rng: &mut R) -> MarkedGraph {
    run(MarkedGraph::initial(g), MarkedGraph::full_moves, |m| {
        rng.gen_range(0..m.len())
    })
}

/// Fixpoint of rule (R) alone.
pub fn reduce_simplified(g: &ColoredGraph) -> MarkedGraph {
    run(MarkedGraph::initial(g), MarkedGraph::simplified_moves, |_| 0)
}

pub fn reduce_simplified_random<R: Rng>(g: &ColoredGraph, rng: &mut R) -> MarkedGraph {
    run(MarkedGraph::initial(g), MarkedGraph::simplified_moves, |m| {
        rng.gen_range(0..m.len())
    })
}

pub fn classify(reduced: &MarkedGraph) -> AttractorClass {
    reduced.classify()
}

/// Vertices `i` with `x_i = q_i` on the whole equilibria set, for every
/// dissipative matrix with this graph: the bullets of the rule-(R) fixpoint.
pub fn equilibria_restrictions(g: &ColoredGraph) -> Vec<usize> {
    reduce_simplified(g).with_mark(Mark::Bullet)
}
