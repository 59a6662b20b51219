//! Re-entrant structures scored by pairwise equate parameters.
//!
//! Once a node reaches a maximal type `t` it is compared with every
//! earlier node of type `t`; each comparison contributes `q_t` if the two
//! are equated and `1 - q_t` otherwise. The pairwise decisions are
//! independent, so some decision vectors are not transitive and describe
//! no legal structure. That mass is reported as leaked rather than
//! renormalized away.

use rand::Rng;
use thiserror::Error;

use crate::fstruct::{Corpus, FeatureStructure};
use crate::generate::{Choice, Generation, Mode, PairOutcome};
use crate::pth::{
    draw_subtype, enumerate_with, seeded_rng, structure_weight, BudgetExceeded, Enumeration,
    PthParams, ScoreError,
};
use crate::signature::{Signature, TypeId};

pub fn score_reentrant_log(
    params: &PthParams,
    sig: &Signature,
    fs: &FeatureStructure,
) -> Result<f64, ScoreError> {
    Ok(structure_weight(sig, fs)?.log_prob(params))
}

/// Refinement factors for every node (class members joining an existing
/// class are not expanded, so their subtrees are never paid for) times
/// one pairwise factor per unordered pair of same-type nodes.
pub fn score_reentrant(
    params: &PthParams,
    sig: &Signature,
    fs: &FeatureStructure,
) -> Result<f64, ScoreError> {
    score_reentrant_log(params, sig, fs).map(f64::exp)
}

/// Legal structures within the bound, plus leaked and residual mass.
pub fn enumerate_reentrant(params: &PthParams, sig: &Signature, max_nodes: usize) -> Enumeration {
    enumerate_with(params, sig, max_nodes, Mode::Reentrant)
}

/// Mass of generation runs (within `max_nodes`) whose pairwise decisions
/// are not transitive.
pub fn leaked_mass(params: &PthParams, sig: &Signature, max_nodes: usize) -> f64 {
    enumerate_reentrant(params, sig, max_nodes).leaked_mass
}

/// Interleaved expansion and pairwise equation, retried from scratch on
/// the same random stream whenever a decision vector is not transitive.
/// `max_steps` bounds refinements per run; the call gives up once
/// `max_retries` runs have been rejected.
pub fn sample_reentrant(
    params: &PthParams,
    sig: &Signature,
    seed: u64,
    max_steps: usize,
    max_retries: usize,
) -> Result<FeatureStructure, BudgetExceeded> {
    let mut rng = seeded_rng(seed);
    let mut rejections = 0;
    'run: loop {
        let mut g = Generation::new(sig, Mode::Reentrant);
        loop {
            match g.next_choice() {
                Choice::Complete => return Ok(g.to_structure()),
                Choice::Refine { from, .. } => {
                    if g.refinements() >= max_steps {
                        return Err(BudgetExceeded {
                            refinements: g.refinements(),
                            rejections,
                        });
                    }
                    let to = draw_subtype(&mut rng, params, sig, from);
                    g.refine(to);
                }
                Choice::Pair { ty, .. } => {
                    let q = params.equate(ty);
                    let equal = if q <= 0.0 {
                        false
                    } else if q >= 1.0 {
                        true
                    } else {
                        rng.gen::<f64>() < q
                    };
                    if g.decide_pair(equal) == PairOutcome::Illegal {
                        rejections += 1;
                        if rejections >= max_retries {
                            return Err(BudgetExceeded {
                                refinements: g.refinements(),
                                rejections,
                            });
                        }
                        continue 'run;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquateError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus entry {index}: {source}")]
    Entry { index: usize, source: ScoreError },
}

/// Equated same-type pairs over all same-type pairs, per maximal type,
/// weighted by multiplicity. Types with no pairs keep `init`.
pub fn estimate_equate(
    corpus: &Corpus,
    sig: &Signature,
    init: &PthParams,
) -> Result<PthParams, EquateError> {
    if corpus.is_empty() {
        return Err(EquateError::EmptyCorpus);
    }
    let mut equated = vec![0u64; sig.len()];
    let mut total = vec![0u64; sig.len()];
    for (index, (fs, w)) in corpus.entries.iter().enumerate() {
        let weight =
            structure_weight(sig, fs).map_err(|source| EquateError::Entry { index, source })?;
        for (t, n) in &weight.equated {
            equated[t.0] += n * w;
            total[t.0] += n * w;
        }
        for (t, n) in &weight.inequated {
            total[t.0] += n * w;
        }
    }
    let mut out = init.clone();
    for t in sig.maximal_types() {
        if total[t.0] > 0 {
            out.set_equate(t, equated[t.0] as f64 / total[t.0] as f64);
        }
    }
    Ok(out)
}

/// Types that have at least one same-type pair somewhere in the corpus.
pub fn types_with_pairs(corpus: &Corpus, sig: &Signature) -> Vec<TypeId> {
    let mut seen = vec![false; sig.len()];
    for (fs, _) in &corpus.entries {
        if let Ok(w) = structure_weight(sig, fs) {
            for t in w.equated.keys().chain(w.inequated.keys()) {
                seen[t.0] = true;
            }
        }
    }
    sig.type_ids().filter(|t| seen[t.0]).collect()
}
