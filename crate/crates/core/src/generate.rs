//! Step-by-step generation of feature structures from the root type.
//!
//! A [`Generation`] holds a partial structure and exposes the next open
//! decision as a [`Choice`]. Samplers, the exhaustive enumerator and the
//! re-entrancy analysis all drive the same state machine.
//!
//! Pending nodes are processed depth-first in feature-name order, so
//! nodes become maximal in pre-order. A node is refined one direct
//! subtype at a time until maximal. In re-entrant mode it is then
//! compared pairwise with every earlier node of the same maximal type;
//! it is expanded (given children for all appropriate features) only if
//! it starts a new class.

use crate::fstruct::{FeatureStructure, RawStructure};
use crate::signature::{Signature, TypeId};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Every maximal node starts its own class.
    Plain,
    /// Maximal nodes are compared pairwise against earlier same-type nodes.
    Reentrant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    Refine {
        node: usize,
        from: TypeId,
    },
    Pair {
        node: usize,
        other: usize,
        ty: TypeId,
        /// True when no pair of this round has been decided yet.
        first: bool,
    },
    Complete,
}

/// Where a node lands once all its pairwise decisions are known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    New,
    Join(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairOutcome {
    /// More pairs remain in this round.
    Pending,
    Placed(Placement),
    /// The decided pairs are not transitive.
    Illegal,
}

#[derive(Clone, Debug)]
struct GenNode {
    ty: TypeId,
    children: Vec<(String, usize)>,
    class: Option<usize>,
}

#[derive(Clone, Debug)]
struct Round {
    node: usize,
    ty: TypeId,
    earlier: Vec<usize>,
    decided: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct Generation<'a> {
    sig: &'a Signature,
    mode: Mode,
    nodes: Vec<GenNode>,
    stack: Vec<usize>,
    classes: Vec<Vec<usize>>,
    /// Placed maximal nodes per type, in placement order.
    placed: Vec<Vec<usize>>,
    round: Option<Round>,
    weight: Weight,
    refinements: usize,
}

impl<'a> Generation<'a> {
    pub fn new(sig: &'a Signature, mode: Mode) -> Self {
        Generation {
            sig,
            mode,
            nodes: vec![GenNode {
                ty: sig.root(),
                children: Vec::new(),
                class: None,
            }],
            stack: vec![0],
            classes: Vec::new(),
            placed: vec![Vec::new(); sig.len()],
            round: None,
            weight: Weight::default(),
            refinements: 0,
        }
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Refinement steps taken so far.
    pub fn refinements(&self) -> usize {
        self.refinements
    }

    pub fn node_type(&self, node: usize) -> TypeId {
        self.nodes[node].ty
    }

    /// Members of each class of type `ty`, by class index.
    pub fn classes_of(&self, ty: TypeId) -> Vec<(usize, &[usize])> {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, m)| self.nodes[m[0]].ty == ty)
            .map(|(i, m)| (i, m.as_slice()))
            .collect()
    }

    /// Earlier same-type nodes the current round compares against.
    pub fn round_earlier(&self) -> &[usize] {
        self.round.as_ref().map_or(&[], |r| r.earlier.as_slice())
    }

    /// Advance through forced steps and report the next open decision.
    pub fn next_choice(&mut self) -> Choice {
        loop {
            if let Some(r) = &self.round {
                return Choice::Pair {
                    node: r.node,
                    other: r.earlier[r.decided.len()],
                    ty: r.ty,
                    first: r.decided.is_empty(),
                };
            }
            let Some(&node) = self.stack.last() else {
                return Choice::Complete;
            };
            let ty = self.nodes[node].ty;
            if !self.sig.is_maximal(ty) {
                return Choice::Refine { node, from: ty };
            }
            self.stack.pop();
            let earlier = &self.placed[ty.0];
            if self.mode == Mode::Plain || earlier.is_empty() {
                self.start_class(node);
            } else {
                self.round = Some(Round {
                    node,
                    ty,
                    earlier: earlier.clone(),
                    decided: Vec::new(),
                });
            }
        }
    }

    /// Refine the node awaiting refinement to the direct subtype `to`.
    pub fn refine(&mut self, to: TypeId) {
        let node = *self.stack.last().expect("no node awaiting refinement");
        let from = self.nodes[node].ty;
        debug_assert_eq!(self.sig.parent(to), Some(from));
        self.weight.add_transition(from, to);
        self.nodes[node].ty = to;
        self.refinements += 1;
    }

    /// Decide the next pair of the current round.
    pub fn decide_pair(&mut self, equal: bool) -> PairOutcome {
        let r = self.round.as_mut().expect("no pairwise decision pending");
        r.decided.push(equal);
        self.weight.add_pair(r.ty, equal);
        if r.decided.len() < r.earlier.len() {
            return PairOutcome::Pending;
        }
        let r = self.round.take().unwrap();
        let joined: Vec<usize> = r
            .earlier
            .iter()
            .zip(&r.decided)
            .filter(|(_, &e)| e)
            .map(|(&n, _)| n)
            .collect();
        if joined.is_empty() {
            self.start_class(r.node);
            return PairOutcome::Placed(Placement::New);
        }
        let class = self.nodes[joined[0]].class.unwrap();
        let members = &self.classes[class];
        let same = joined.len() == members.len()
            && joined.iter().all(|n| self.nodes[*n].class == Some(class));
        if !same {
            return PairOutcome::Illegal;
        }
        self.nodes[r.node].class = Some(class);
        self.classes[class].push(r.node);
        self.placed[r.ty.0].push(r.node);
        PairOutcome::Placed(Placement::Join(class))
    }

    /// Decide every remaining pair of a fresh round so that the node lands
    /// in `placement`.
    pub fn place(&mut self, placement: Placement) {
        let r = self.round.as_ref().expect("no pairwise decision pending");
        assert!(r.decided.is_empty(), "round already under way");
        let decisions: Vec<bool> = r
            .earlier
            .iter()
            .map(|&n| matches!(placement, Placement::Join(c) if self.nodes[n].class == Some(c)))
            .collect();
        let mut last = PairOutcome::Pending;
        for d in decisions {
            last = self.decide_pair(d);
        }
        debug_assert_eq!(last, PairOutcome::Placed(placement));
    }

    fn start_class(&mut self, node: usize) {
        let ty = self.nodes[node].ty;
        self.nodes[node].class = Some(self.classes.len());
        self.classes.push(vec![node]);
        self.placed[ty.0].push(node);
        let features = self.sig.appropriate(ty);
        let first_child = self.nodes.len();
        for f in features {
            let id = self.nodes.len();
            self.nodes.push(GenNode {
                ty: f.value,
                children: Vec::new(),
                class: None,
            });
            self.nodes[node].children.push((f.name.clone(), id));
        }
        self.stack.extend((first_child..self.nodes.len()).rev());
    }

    /// The finished structure. Only meaningful once `next_choice` has
    /// returned [`Choice::Complete`].
    pub fn to_structure(&self) -> FeatureStructure {
        let mut raw = RawStructure::new();
        for n in &self.nodes {
            raw.add_node(self.sig.name(n.ty));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for (f, c) in &n.children {
                raw.add_child(i, f.clone(), *c);
            }
        }
        for members in &self.classes {
            for &m in &members[1..] {
                raw.equate(members[0], m);
            }
        }
        raw.finish(0).expect("generated structures are well formed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_run_on_three_leaves() {
        let sig =
            Signature::parse("bot sub [s,t]. s sub [] intro [a:t,b:t,c:t]. t sub [].").unwrap();
        let s = sig.lookup("s").unwrap();
        let mut g = Generation::new(&sig, Mode::Plain);
        assert_eq!(
            g.next_choice(),
            Choice::Refine {
                node: 0,
                from: sig.root()
            }
        );
        g.refine(s);
        assert_eq!(g.next_choice(), Choice::Complete);
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.to_structure().to_text(), "(s (a t) (b t) (c t))");
    }

    #[test]
    fn reentrant_rounds() {
        let sig =
            Signature::parse("bot sub [s,t]. s sub [] intro [a:t,b:t,c:t]. t sub [].").unwrap();
        let s = sig.lookup("s").unwrap();
        let t = sig.lookup("t").unwrap();
        let mut g = Generation::new(&sig, Mode::Reentrant);
        g.next_choice();
        g.refine(s);
        // node 1 (a) is the first t: no round
        assert_eq!(
            g.next_choice(),
            Choice::Pair {
                node: 2,
                other: 1,
                ty: t,
                first: true
            }
        );
        assert_eq!(g.decide_pair(true), PairOutcome::Placed(Placement::Join(1)));
        // c against a, then against b
        assert!(matches!(
            g.next_choice(),
            Choice::Pair {
                node: 3,
                other: 1,
                ..
            }
        ));
        assert_eq!(g.decide_pair(true), PairOutcome::Pending);
        assert!(matches!(
            g.next_choice(),
            Choice::Pair {
                node: 3,
                other: 2,
                first: false,
                ..
            }
        ));
        assert_eq!(g.decide_pair(false), PairOutcome::Illegal);

        let mut g = Generation::new(&sig, Mode::Reentrant);
        g.next_choice();
        g.refine(s);
        g.next_choice();
        g.place(Placement::New);
        g.next_choice();
        g.place(Placement::Join(2));
        assert_eq!(g.next_choice(), Choice::Complete);
        assert_eq!(g.to_structure().to_text(), "(s (a t) (b #1=(t)) (c #1))");
        assert_eq!(g.weight().equated[&t], 1);
        assert_eq!(g.weight().inequated[&t], 2);
    }
}
