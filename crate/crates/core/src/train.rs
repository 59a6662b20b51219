//! Parameter estimation for type hierarchies from fully observed corpora.

pub mod conditional;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fstruct::{Corpus, FeatureStructure};
use crate::pth::{structure_weight, PthParams, ScoreError};
use crate::signature::{Signature, TypeId};

pub use conditional::FitOptions;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus entry {index}: {source}")]
    Entry { index: usize, source: ScoreError },
    #[error("support entry {index}: {source}")]
    SupportEntry { index: usize, source: ScoreError },
    #[error("support is empty")]
    EmptySupport,
    #[error("corpus entry {index} ({text}) is not in the support")]
    OutsideSupport { index: usize, text: String },
}

/// Refinement counts keyed by `(from, to)`, one entry per introduction
/// relationship (zero counts included).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransitionCounts(pub BTreeMap<(TypeId, TypeId), u64>);

impl TransitionCounts {
    pub fn get(&self, from: TypeId, to: TypeId) -> u64 {
        self.0.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn row_total(&self, sig: &Signature, from: TypeId) -> u64 {
        sig.subtypes(from).iter().map(|&s| self.get(from, s)).sum()
    }

    /// `count FROM TO N` lines in declaration order.
    pub fn to_text(&self, sig: &Signature) -> String {
        let mut out = String::new();
        for rel in sig.introduction_relations() {
            out.push_str(&format!(
                "count {} {} {}\n",
                sig.name(rel.from),
                sig.name(rel.to),
                self.get(rel.from, rel.to)
            ));
        }
        out
    }
}

/// Count every refinement edge on every node's chain from its entry type
/// to its final type, weighted by multiplicity. Nodes that enter directly
/// at a maximal type add nothing.
pub fn count_transitions(corpus: &Corpus, sig: &Signature) -> Result<TransitionCounts, TrainError> {
    let mut counts: BTreeMap<(TypeId, TypeId), u64> = sig
        .introduction_relations()
        .into_iter()
        .map(|r| ((r.from, r.to), 0))
        .collect();
    for (index, (fs, w)) in corpus.entries.iter().enumerate() {
        let weight =
            structure_weight(sig, fs).map_err(|source| TrainError::Entry { index, source })?;
        for (edge, n) in weight.transitions {
            *counts.entry(edge).or_default() += n * w;
        }
    }
    Ok(TransitionCounts(counts))
}

/// Relative frequencies per row; rows never observed keep `init`.
pub fn estimate(counts: &TransitionCounts, sig: &Signature, init: &PthParams) -> PthParams {
    let mut out = init.clone();
    for t in sig.non_maximal_types() {
        let total = counts.row_total(sig, t);
        if total == 0 {
            continue;
        }
        for &s in sig.subtypes(t) {
            out.set_transition(s, counts.get(t, s) as f64 / total as f64);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalResult {
    pub params: PthParams,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Maximize the likelihood of the corpus with each structure's
/// probability renormalized over `support`. Starts from the
/// relative-frequency estimate; rows no support structure touches are
/// copied from `init`.
pub fn conditional_mle(
    corpus: &Corpus,
    support: &[FeatureStructure],
    sig: &Signature,
    init: &PthParams,
    opts: FitOptions,
) -> Result<ConditionalResult, TrainError> {
    if corpus.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    if support.is_empty() {
        return Err(TrainError::EmptySupport);
    }
    for (index, (fs, _)) in corpus.entries.iter().enumerate() {
        if !support.contains(fs) {
            return Err(TrainError::OutsideSupport {
                index,
                text: fs.to_text(),
            });
        }
    }

    // parameter index = child type id
    let rows: Vec<Vec<usize>> = sig
        .non_maximal_types()
        .into_iter()
        .map(|t| sig.subtypes(t).iter().map(|s| s.0).collect())
        .collect();
    let to_counts = |w: crate::weight::Weight| -> conditional::Counts {
        w.transitions
            .into_iter()
            .map(|((_, to), n)| (to.0, n))
            .collect()
    };
    let mut observed = Vec::new();
    for (index, (fs, w)) in corpus.entries.iter().enumerate() {
        let weight =
            structure_weight(sig, fs).map_err(|source| TrainError::Entry { index, source })?;
        observed.push((to_counts(weight), *w as f64));
    }
    let mut support_counts = Vec::new();
    for (index, fs) in support.iter().enumerate() {
        let weight = structure_weight(sig, fs)
            .map_err(|source| TrainError::SupportEntry { index, source })?;
        support_counts.push(to_counts(weight));
    }

    let start = estimate(&count_transitions(corpus, sig)?, sig, init);
    let touched = conditional::touched_rows(&rows, &support_counts);
    let mut theta0: Vec<f64> = sig.type_ids().map(|t| start.transition_into(t)).collect();
    for (row, &hit) in rows.iter().zip(&touched) {
        if !hit {
            for &e in row {
                theta0[e] = init.transition_into(TypeId(e));
            }
        }
    }
    let fit = conditional::fit(&rows, &theta0, &observed, &support_counts, opts);
    let mut params = start;
    for t in sig.type_ids() {
        if sig.parent(t).is_some() {
            params.set_transition(t, fit.theta[t.0]);
        }
    }
    Ok(ConditionalResult {
        params,
        iterations: fit.iterations,
        converged: fit.converged,
        trace: fit.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::*;

    fn corpus5(sig: &Signature) -> Corpus {
        Corpus::parse(include_str!("../fixtures/corpus5.fs"), sig).unwrap()
    }

    #[test]
    fn toy_counts() {
        let sig = toy_sig();
        let c = count_transitions(&corpus5(&sig), &sig).unwrap();
        let get = |a: &str, b: &str| c.get(id(&sig, a), id(&sig, b));
        assert_eq!(get("bot", "sign"), 5);
        assert_eq!(get("sign", "sentence"), 5);
        assert_eq!(get("num", "sing"), 4);
        assert_eq!(get("num", "pl"), 6);
        assert_eq!(get("phrase", "np"), 0);
        assert_eq!(get("phrase", "vp"), 0);
        assert_eq!(get("bot", "num"), 0);
        assert_eq!(get("sign", "phrase"), 0);
        assert!(c
            .to_text(&sig)
            .starts_with("count bot sign 5\ncount bot num 0\n"));
    }

    #[test]
    fn bare_root_and_tagged_entries() {
        let sig = toy_sig();
        let bare = Corpus {
            entries: vec![(fs(&sig, "(sing)"), 1)],
        };
        let c = count_transitions(&bare, &sig).unwrap();
        assert_eq!(c.get(id(&sig, "bot"), id(&sig, "num")), 1);
        assert_eq!(c.get(id(&sig, "num"), id(&sig, "sing")), 1);
        assert_eq!(c.0.values().sum::<u64>(), 2);

        // The second sing node is refined but never expanded; sing has no
        // features, so the counts match the untagged structure.
        let tagged = Corpus {
            entries: vec![(fs(&sig, TAGGED), 1)],
        };
        let untagged = Corpus {
            entries: vec![(fs(&sig, SING), 1)],
        };
        assert_eq!(
            count_transitions(&tagged, &sig).unwrap(),
            count_transitions(&untagged, &sig).unwrap()
        );
    }

    #[test]
    fn unexpanded_member_pays_no_subtree() {
        let sig = Signature::parse(
            "bot sub [r,t,u]. r sub [] intro [a:t,b:t]. t sub [] intro [g:bot]. u sub [].",
        )
        .unwrap();
        let corpus = Corpus {
            entries: vec![(fs(&sig, "(r (a #1=(t (g u))) (b #1))"), 1)],
        };
        let c = count_transitions(&corpus, &sig).unwrap();
        // root bot=>r and g's bot=>u; a and b enter at t directly
        assert_eq!(c.get(id(&sig, "bot"), id(&sig, "r")), 1);
        assert_eq!(c.get(id(&sig, "bot"), id(&sig, "u")), 1);
        assert_eq!(c.0.values().sum::<u64>(), 2);
    }

    #[test]
    fn toy_estimate() {
        let sig = toy_sig();
        let init = PthParams::uniform(&sig);
        let p = estimate(
            &count_transitions(&corpus5(&sig), &sig).unwrap(),
            &sig,
            &init,
        );
        let t = |a: &str, b: &str| p.transition(id(&sig, a), id(&sig, b));
        assert_eq!(t("num", "sing"), 0.4);
        assert_eq!(t("num", "pl"), 0.6);
        assert_eq!(t("bot", "sign"), 1.0);
        assert_eq!(t("bot", "num"), 0.0);
        assert_eq!(t("sign", "sentence"), 1.0);
        assert_eq!(t("sign", "phrase"), 0.0);
        assert_eq!(t("phrase", "np"), 0.5);
        assert_eq!(estimate(&TransitionCounts::default(), &sig, &init), init);

        let mut one_row = TransitionCounts::default();
        one_row.0.insert((id(&sig, "num"), id(&sig, "sing")), 7);
        let p = estimate(&one_row, &sig, &init);
        assert_eq!(p.transition(id(&sig, "num"), id(&sig, "sing")), 1.0);
    }

    #[test]
    fn conditional_on_agreeing_support() {
        let sig = toy_sig();
        let support: Vec<FeatureStructure> = vec![fs(&sig, SING), fs(&sig, PLURAL)];
        let r = conditional_mle(
            &corpus5(&sig),
            &support,
            &sig,
            &PthParams::uniform(&sig),
            FitOptions::default(),
        )
        .unwrap();
        assert!(r.converged);
        let p = r.params.transition(id(&sig, "num"), id(&sig, "sing"));
        let want = 2f64.sqrt() / (2f64.sqrt() + 3f64.sqrt());
        assert!((p - want).abs() < 1e-8);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
        r.params.validate(&sig, 1e-9).unwrap();
    }

    #[test]
    fn conditional_errors() {
        let sig = toy_sig();
        let init = PthParams::uniform(&sig);
        let corpus = corpus5(&sig);
        assert_eq!(
            conditional_mle(&corpus, &[], &sig, &init, FitOptions::default()),
            Err(TrainError::EmptySupport)
        );
        assert!(matches!(
            conditional_mle(
                &corpus,
                &[fs(&sig, SING)],
                &sig,
                &init,
                FitOptions::default()
            ),
            Err(TrainError::OutsideSupport { index: 1, .. })
        ));
        assert_eq!(
            conditional_mle(
                &Corpus::default(),
                &[fs(&sig, SING)],
                &sig,
                &init,
                FitOptions::default()
            ),
            Err(TrainError::EmptyCorpus)
        );
    }
}
