//! Probabilistic type hierarchies without re-entrancy.
//!
//! A structure's probability is the product, over every node, of the
//! transition probabilities on the refinement chain from the type the
//! node entered at (the root type, or the value type of the feature that
//! introduced it) down to its final maximal type.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fstruct::{strip_comment, FeatureStructure};
use crate::generate::{Choice, Generation, Mode};
use crate::signature::{Signature, TypeId};
use crate::weight::Weight;

/// Tolerance for row sums when loading parameter files.
pub const FILE_SUM_TOLERANCE: f64 = 1e-6;

/// Transition and equate probabilities for one signature.
///
/// Every type has exactly one parent, so the transition into a type is
/// stored at the child's index.
#[derive(Clone, Debug, PartialEq)]
pub struct PthParams {
    into: Vec<f64>,
    equate: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("line {line}: unknown type `{name}`")]
    UnknownType { line: usize, name: String },
    #[error("transitions from `{ty}` sum to {sum}, not 1")]
    RowSum { ty: String, sum: f64 },
    #[error("probability {value} for `{what}` is outside [0, 1]")]
    OutOfRange { what: String, value: f64 },
}

impl ParamError {
    /// True for violations of the model's probability invariants, as
    /// opposed to malformed input.
    pub fn is_invariant(&self) -> bool {
        matches!(
            self,
            ParamError::RowSum { .. } | ParamError::OutOfRange { .. }
        )
    }
}

impl PthParams {
    /// Equal probability for every direct subtype; equate parameters 0.
    pub fn uniform(sig: &Signature) -> PthParams {
        let mut into = vec![0.0; sig.len()];
        for t in sig.type_ids() {
            let subs = sig.subtypes(t);
            for &s in subs {
                into[s.0] = 1.0 / subs.len() as f64;
            }
        }
        PthParams {
            into,
            equate: vec![0.0; sig.len()],
        }
    }

    /// Parse `trans FROM TO P` and `eq TYPE Q` lines. Transitions not
    /// listed are 0, so every row must be given in full.
    pub fn parse(text: &str, sig: &Signature) -> Result<PthParams, ParamError> {
        let mut into = vec![0.0; sig.len()];
        let mut equate = vec![0.0; sig.len()];
        let mut seen_into = vec![false; sig.len()];
        let mut seen_eq = vec![false; sig.len()];
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let words: Vec<&str> = strip_comment(line).split_whitespace().collect();
            if words.is_empty() {
                continue;
            }
            let format = |msg: String| ParamError::Format { line: line_no, msg };
            let ty = |name: &str| {
                sig.lookup(name).ok_or_else(|| ParamError::UnknownType {
                    line: line_no,
                    name: name.to_string(),
                })
            };
            let prob = |s: &str| -> Result<f64, ParamError> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| format(format!("`{s}` is not a number")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(ParamError::OutOfRange {
                        what: words[1..words.len() - 1].join(" "),
                        value: v,
                    });
                }
                Ok(v)
            };
            match words.as_slice() {
                ["trans", from, to, p] => {
                    let (from, to) = (ty(from)?, ty(to)?);
                    if sig.parent(to) != Some(from) {
                        return Err(format(format!(
                            "`{}` is not a direct subtype of `{}`",
                            sig.name(to),
                            sig.name(from)
                        )));
                    }
                    if std::mem::replace(&mut seen_into[to.0], true) {
                        return Err(format(format!(
                            "transition {} {} given twice",
                            sig.name(from),
                            sig.name(to)
                        )));
                    }
                    into[to.0] = prob(p)?;
                }
                ["eq", t, q] => {
                    let t = ty(t)?;
                    if !sig.is_maximal(t) {
                        return Err(format(format!(
                            "equate parameter for non-maximal type `{}`",
                            sig.name(t)
                        )));
                    }
                    if std::mem::replace(&mut seen_eq[t.0], true) {
                        return Err(format(format!("eq {} given twice", sig.name(t))));
                    }
                    equate[t.0] = prob(q)?;
                }
                _ => return Err(format(format!("cannot parse `{}`", line.trim()))),
            }
        }
        let params = PthParams { into, equate };
        params.validate(sig, FILE_SUM_TOLERANCE)?;
        Ok(params)
    }

    pub fn validate(&self, sig: &Signature, tol: f64) -> Result<(), ParamError> {
        for t in sig.type_ids() {
            let subs = sig.subtypes(t);
            for &s in subs {
                let v = self.into[s.0];
                if !(0.0..=1.0).contains(&v) {
                    return Err(ParamError::OutOfRange {
                        what: format!("{} {}", sig.name(t), sig.name(s)),
                        value: v,
                    });
                }
            }
            if !subs.is_empty() {
                let sum: f64 = subs.iter().map(|s| self.into[s.0]).sum();
                if (sum - 1.0).abs() > tol {
                    return Err(ParamError::RowSum {
                        ty: sig.name(t).to_string(),
                        sum,
                    });
                }
            }
        }
        for t in sig.type_ids() {
            let q = self.equate[t.0];
            if !(0.0..=1.0).contains(&q) {
                return Err(ParamError::OutOfRange {
                    what: sig.name(t).to_string(),
                    value: q,
                });
            }
        }
        Ok(())
    }

    /// P(from ⇒ to). `to` must be a direct subtype of `from`.
    pub fn transition(&self, _from: TypeId, to: TypeId) -> f64 {
        self.into[to.0]
    }

    /// Probability of refining into `ty` from its parent.
    pub fn transition_into(&self, ty: TypeId) -> f64 {
        self.into[ty.0]
    }

    pub fn set_transition(&mut self, to: TypeId, p: f64) {
        self.into[to.0] = p;
    }

    pub fn equate(&self, ty: TypeId) -> f64 {
        self.equate[ty.0]
    }

    pub fn set_equate(&mut self, ty: TypeId, q: f64) {
        self.equate[ty.0] = q;
    }

    /// Parameter file text: every transition row in declaration order,
    /// then one `eq` line per maximal type.
    pub fn to_file_text(&self, sig: &Signature) -> String {
        let mut out = String::new();
        for t in sig.non_maximal_types() {
            for &s in sig.subtypes(t) {
                out.push_str(&format!(
                    "trans {} {} {}\n",
                    sig.name(t),
                    sig.name(s),
                    self.into[s.0]
                ));
            }
        }
        for t in sig.maximal_types() {
            out.push_str(&format!("eq {} {}\n", sig.name(t), self.equate[t.0]));
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("node {path} has non-maximal type {ty}; structure is not maximally specified")]
    NotMaximal { path: String, ty: String },
    #[error("structure contains re-entrant nodes; score it with the re-entrant model")]
    Reentrant,
    #[error("ill-typed structure: {0}")]
    IllTyped(String),
}

/// Factor counts for a maximally specified structure. Every node pays
/// for its own refinement chain; pairs of same-type nodes are counted as
/// equated or inequated according to the partition.
pub fn structure_weight(sig: &Signature, fs: &FeatureStructure) -> Result<Weight, ScoreError> {
    let diags = fs.well_typed(sig);
    if let Some(d) = diags.first() {
        return Err(ScoreError::IllTyped(d.to_string()));
    }
    let incoming = fs.incoming();
    let mut weight = Weight::default();
    let mut per_type: std::collections::BTreeMap<TypeId, Vec<usize>> = Default::default();
    for (i, node) in fs.nodes().iter().enumerate() {
        let ty = sig.lookup(&node.ty).expect("checked by well_typed");
        if !sig.is_maximal(ty) {
            return Err(ScoreError::NotMaximal {
                path: format!("#{i}"),
                ty: node.ty.clone(),
            });
        }
        let entry = match incoming[i] {
            None => sig.root(),
            Some((parent, feat)) => {
                let pty = sig.lookup(&fs.node(parent).ty).unwrap();
                sig.feature_value(pty, feat).unwrap()
            }
        };
        for (from, to) in sig.chain(entry, ty).expect("checked by well_typed") {
            weight.add_transition(from, to);
        }
        per_type.entry(ty).or_default().push(i);
    }
    for (ty, members) in per_type {
        for (k, &a) in members.iter().enumerate() {
            for &b in &members[k + 1..] {
                weight.add_pair(ty, fs.node(a).rep == fs.node(b).rep);
            }
        }
    }
    Ok(weight)
}

/// Log probability of a maximally specified, re-entrancy-free structure.
pub fn structure_log_probability(
    params: &PthParams,
    sig: &Signature,
    fs: &FeatureStructure,
) -> Result<f64, ScoreError> {
    if !fs.is_all_singleton() {
        return Err(ScoreError::Reentrant);
    }
    Ok(structure_weight(sig, fs)?.transition_log_prob(params))
}

pub fn structure_probability(
    params: &PthParams,
    sig: &Signature,
    fs: &FeatureStructure,
) -> Result<f64, ScoreError> {
    structure_log_probability(params, sig, fs).map(f64::exp)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enumerated {
    pub structure: FeatureStructure,
    pub text: String,
    pub log_prob: f64,
    pub prob: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Enumeration {
    pub items: Vec<Enumerated>,
    /// Mass of generation runs cut off by the node bound.
    pub residual_mass: f64,
    /// Mass of runs whose pairwise decisions were not transitive. Always
    /// 0 for the plain model.
    pub leaked_mass: f64,
}

impl Enumeration {
    pub fn total_mass(&self) -> f64 {
        self.items.iter().map(|i| i.prob).sum()
    }
}

/// Every maximally specified structure of at most `max_nodes` nodes,
/// ordered by node count and then by serialization.
pub fn enumerate_structures(params: &PthParams, sig: &Signature, max_nodes: usize) -> Enumeration {
    enumerate_with(params, sig, max_nodes, Mode::Plain)
}

pub(crate) fn enumerate_with(
    params: &PthParams,
    sig: &Signature,
    max_nodes: usize,
    mode: Mode,
) -> Enumeration {
    let mut out = Enumeration::default();
    let mut stack = vec![Generation::new(sig, mode)];
    while let Some(mut g) = stack.pop() {
        if g.node_count() > max_nodes {
            out.residual_mass += g.weight().prob(params);
            continue;
        }
        match g.next_choice() {
            Choice::Complete => {
                let structure = g.to_structure();
                let log_prob = g.weight().log_prob(params);
                out.items.push(Enumerated {
                    text: structure.to_text(),
                    structure,
                    log_prob,
                    prob: log_prob.exp(),
                });
            }
            Choice::Refine { from, .. } => {
                for &to in sig.subtypes(from).iter().rev() {
                    let mut next = g.clone();
                    next.refine(to);
                    stack.push(next);
                }
            }
            Choice::Pair { ty, .. } => {
                let q = params.equate(ty);
                let k = g.round_earlier().len() as i32;
                let mut legal = if q < 1.0 { (1.0 - q).powi(k) } else { 0.0 };
                let mut branches = Vec::new();
                if q > 0.0 {
                    for (class, members) in g.classes_of(ty) {
                        let s = members.len() as i32;
                        legal += q.powi(s) * (1.0 - q).powi(k - s);
                        if q == 1.0 && s != k {
                            continue;
                        }
                        branches.push(crate::generate::Placement::Join(class));
                    }
                }
                if q < 1.0 {
                    branches.push(crate::generate::Placement::New);
                }
                let leak = 1.0 - legal;
                if leak > 0.0 {
                    out.leaked_mass += g.weight().prob(params) * leak;
                }
                for placement in branches.into_iter().rev() {
                    let mut next = g.clone();
                    next.place(placement);
                    stack.push(next);
                }
            }
        }
    }
    out.items.sort_by(|a, b| {
        a.structure
            .node_count()
            .cmp(&b.structure.node_count())
            .then_with(|| a.text.cmp(&b.text))
    });
    out
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("budget exceeded after {refinements} refinements and {rejections} rejected runs")]
pub struct BudgetExceeded {
    pub refinements: usize,
    pub rejections: usize,
}

/// Generator used by every sampler: ChaCha with 8 rounds, seeded through
/// `SeedableRng::seed_from_u64`. Uniform draws are `Rng::gen::<f64>()`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn draw_subtype<R: Rng>(
    rng: &mut R,
    params: &PthParams,
    sig: &Signature,
    from: TypeId,
) -> TypeId {
    let subs = sig.subtypes(from);
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for &s in subs {
        cum += params.transition(from, s);
        if u < cum {
            return s;
        }
    }
    // rounding left u above the final cumulative sum
    *subs
        .iter()
        .rev()
        .find(|&&s| params.transition(from, s) > 0.0)
        .unwrap_or(&subs[subs.len() - 1])
}

/// Draw one structure, refining nodes in pre-order.
pub fn sample_structure(
    params: &PthParams,
    sig: &Signature,
    seed: u64,
    max_steps: usize,
) -> Result<FeatureStructure, BudgetExceeded> {
    let mut rng = seeded_rng(seed);
    let mut g = Generation::new(sig, Mode::Plain);
    loop {
        match g.next_choice() {
            Choice::Complete => return Ok(g.to_structure()),
            Choice::Refine { from, .. } => {
                if g.refinements() >= max_steps {
                    return Err(BudgetExceeded {
                        refinements: g.refinements(),
                        rejections: 0,
                    });
                }
                let to = draw_subtype(&mut rng, params, sig, from);
                g.refine(to);
            }
            Choice::Pair { .. } => unreachable!("plain generation has no pairwise decisions"),
        }
    }
}
