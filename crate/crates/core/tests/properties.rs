use std::collections::BTreeMap;

use proptest::prelude::*;

use probtfs::fstruct::{Corpus, FeatureStructure};
use probtfs::pcfg::{self, Pcfg};
use probtfs::pth::{self, PthParams};
use probtfs::reentrancy;
use probtfs::signature::{Signature, TypeId};
use probtfs::train::{self, FitOptions, TransitionCounts};

const TOY: &str = include_str!("../fixtures/sign_num.ale");

const BRANCHING: &str = "\
bot sub [pair,item,stop].
  pair sub [] intro [l:bot,r:item].
  item sub [a,b].
    a sub [].
    b sub [].
  stop sub [].";

/// Parent index (< own index) and an optional feature value index per
/// type; type 0 is the root.
fn signature_source(shape: &[(usize, Option<usize>)]) -> String {
    let n = shape.len() + 1;
    let name = |i: usize| {
        if i == 0 {
            "bot".to_string()
        } else {
            format!("t{i}")
        }
    };
    let mut out = String::new();
    for i in 0..n {
        let subs: Vec<String> = (1..n).filter(|&j| shape[j - 1].0 == i).map(name).collect();
        out.push_str(&format!("{} sub [{}]", name(i), subs.join(",")));
        if i > 0 {
            if let Some(v) = shape[i - 1].1 {
                out.push_str(&format!(" intro [f{i}:{}]", name(v % n)));
            }
        }
        out.push_str(".\n");
    }
    out
}

fn shape() -> impl Strategy<Value = Vec<(usize, Option<usize>)>> {
    (1usize..9).prop_flat_map(|n| {
        (0..n)
            .map(|i| (0..=i, proptest::option::of(0usize..16)))
            .collect::<Vec<_>>()
    })
}

/// Row values from raw positive weights.
fn params_from(sig: &Signature, raw: &[f64], q: &[f64]) -> PthParams {
    let mut p = PthParams::uniform(sig);
    let mut k = 0;
    for t in sig.non_maximal_types() {
        let subs = sig.subtypes(t);
        let w: Vec<f64> = subs
            .iter()
            .map(|_| {
                k += 1;
                raw[(k - 1) % raw.len()]
            })
            .collect();
        let total: f64 = w.iter().sum();
        for (&s, x) in subs.iter().zip(&w) {
            p.set_transition(s, x / total);
        }
    }
    for (i, t) in sig.maximal_types().into_iter().enumerate() {
        p.set_equate(t, q[i % q.len()]);
    }
    p
}

/// Branching parameters with the recursive `pair` branch kept below one
/// half so generation terminates quickly.
fn branching_params(sig: &Signature, pair: f64, a: f64, q: f64) -> PthParams {
    let mut p = PthParams::uniform(sig);
    let id = |n: &str| sig.lookup(n).unwrap();
    p.set_transition(id("pair"), pair);
    p.set_transition(id("item"), (1.0 - pair) / 2.0);
    p.set_transition(id("stop"), 1.0 - pair - (1.0 - pair) / 2.0);
    p.set_transition(id("a"), a);
    p.set_transition(id("b"), 1.0 - a);
    for t in sig.maximal_types() {
        p.set_equate(t, q);
    }
    p
}

/// Independent walk: refinement edges per source type, from each node's
/// entry type down to its final type.
fn refinement_events(fs: &FeatureStructure, sig: &Signature) -> BTreeMap<TypeId, u64> {
    let mut out = BTreeMap::new();
    let incoming = fs.incoming();
    for (i, node) in fs.nodes().iter().enumerate() {
        let entry = match incoming[i] {
            None => sig.root(),
            Some((parent, feat)) => {
                let pt = sig.lookup(&fs.node(parent).ty).unwrap();
                sig.feature_value(pt, feat).unwrap()
            }
        };
        let mut t = sig.lookup(&node.ty).unwrap();
        while t != entry {
            let parent = sig.parent(t).unwrap();
            *out.entry(parent).or_default() += 1;
            t = parent;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn signature_round_trip(shape in shape()) {
        let src = signature_source(&shape);
        let sig = Signature::parse(&src).unwrap();
        let again = Signature::parse(&sig.to_source()).unwrap();
        prop_assert_eq!(sig.to_source(), again.to_source());
        prop_assert_eq!(sig.len(), shape.len() + 1);
        let rels: Vec<String> = sig.introduction_relations().iter().map(|r| sig.relation_to_string(r)).collect();
        let rels2: Vec<String> = again.introduction_relations().iter().map(|r| again.relation_to_string(r)).collect();
        prop_assert_eq!(rels, rels2);
    }

    #[test]
    fn structure_round_trip(seed in any::<u64>(), pair in 0.05f64..0.45, a in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        let sig = Signature::parse(BRANCHING).unwrap();
        let p = branching_params(&sig, pair, a, q);
        for fs in [
            pth::sample_structure(&p, &sig, seed, 500).ok(),
            reentrancy::sample_reentrant(&p, &sig, seed, 500, 100).ok(),
        ].into_iter().flatten() {
            let text = fs.to_text();
            let back = FeatureStructure::parse(&text, &sig).unwrap();
            prop_assert_eq!(&back, &fs);
            prop_assert_eq!(back.to_text(), text);
            prop_assert!(fs.well_typed(&sig).is_empty());
            prop_assert!(fs.is_maximally_specified(&sig));
        }
    }

    #[test]
    fn count_consistency(seeds in proptest::collection::vec((any::<u64>(), 1u64..4), 1..12), pair in 0.05f64..0.45) {
        let sig = Signature::parse(BRANCHING).unwrap();
        let p = branching_params(&sig, pair, 0.5, 0.0);
        let entries: Vec<(FeatureStructure, u64)> = seeds
            .iter()
            .filter_map(|&(s, w)| pth::sample_structure(&p, &sig, s, 500).ok().map(|f| (f, w)))
            .collect();
        let corpus = Corpus { entries };
        let counts = train::count_transitions(&corpus, &sig).unwrap();
        let mut want: BTreeMap<TypeId, u64> = BTreeMap::new();
        for (fs, w) in &corpus.entries {
            for (t, n) in refinement_events(fs, &sig) {
                *want.entry(t).or_default() += n * w;
            }
        }
        for t in sig.non_maximal_types() {
            prop_assert_eq!(counts.row_total(&sig, t), want.get(&t).copied().unwrap_or(0));
        }
    }

    #[test]
    fn estimate_rows_sum_to_one(raw in proptest::collection::vec(0u64..50, 8)) {
        let sig = Signature::parse(TOY).unwrap();
        let mut counts = TransitionCounts::default();
        for (rel, n) in sig.introduction_relations().into_iter().zip(raw) {
            counts.0.insert((rel.from, rel.to), n);
        }
        let est = train::estimate(&counts, &sig, &PthParams::uniform(&sig));
        prop_assert!(est.validate(&sig, 1e-9).is_ok());
    }

    #[test]
    fn full_support_conditional_equals_counts(weights in proptest::collection::vec(0u64..5, 10)) {
        let sig = Signature::parse(TOY).unwrap();
        let language = pth::enumerate_structures(&PthParams::uniform(&sig), &sig, 16);
        let support: Vec<FeatureStructure> = language.items.iter().map(|i| i.structure.clone()).collect();
        let entries: Vec<(FeatureStructure, u64)> = support
            .iter()
            .cloned()
            .zip(weights)
            .filter(|(_, w)| *w > 0)
            .collect();
        prop_assume!(!entries.is_empty());
        let corpus = Corpus { entries };
        let init = PthParams::uniform(&sig);
        let counted = train::estimate(&train::count_transitions(&corpus, &sig).unwrap(), &sig, &init);
        let fit = train::conditional_mle(&corpus, &support, &sig, &init, FitOptions::default()).unwrap();
        prop_assert!(fit.trace.windows(2).all(|w| w[1] >= w[0]));
        for t in sig.type_ids() {
            if let Some(parent) = sig.parent(t) {
                let (a, b) = (fit.params.transition(parent, t), counted.transition(parent, t));
                prop_assert!((a - b).abs() < 1e-6, "{}: {} vs {}", sig.name(t), a, b);
            }
        }
    }

    #[test]
    fn accounting_identity(pair in 0.05f64..0.45, a in 0.0f64..=1.0, q in 0.0f64..=1.0, bound in 1usize..8) {
        let sig = Signature::parse(BRANCHING).unwrap();
        let p = branching_params(&sig, pair, a, q);
        let e = reentrancy::enumerate_reentrant(&p, &sig, bound);
        prop_assert!((e.total_mass() + e.leaked_mass + e.residual_mass - 1.0).abs() < 1e-9);
        for item in &e.items {
            let s = reentrancy::score_reentrant(&p, &sig, &item.structure).unwrap();
            prop_assert!((s - item.prob).abs() < 1e-12);
        }
        let plain = pth::enumerate_structures(&p, &sig, bound);
        prop_assert!((plain.total_mass() + plain.residual_mass - 1.0).abs() < 1e-9);
        for item in &plain.items {
            let s = pth::structure_probability(&p, &sig, &item.structure).unwrap();
            prop_assert!((s - item.prob).abs() < 1e-12);
        }
    }

    #[test]
    fn toy_language_is_normalized(raw in proptest::collection::vec(0.01f64..1.0, 8), q in proptest::collection::vec(0.0f64..=1.0, 5)) {
        let sig = Signature::parse(TOY).unwrap();
        let p = params_from(&sig, &raw, &q);
        let e = pth::enumerate_structures(&p, &sig, 16);
        prop_assert_eq!(e.residual_mass, 0.0);
        prop_assert!((e.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pcfg_count_training_is_normalized(weights in proptest::collection::vec(1usize..4, 5)) {
        let g = Pcfg::parse(include_str!("../fixtures/grammar.pcfg")).unwrap();
        let base = pcfg::parse_treebank(include_str!("../fixtures/corpus5.trees")).unwrap();
        let bank: Vec<_> = base
            .iter()
            .zip(&weights)
            .flat_map(|(t, &w)| std::iter::repeat_n(t.clone(), w))
            .collect();
        let fit = pcfg::train_pcfg(&g, &bank, pcfg::Estimator::Count).unwrap();
        prop_assert!(fit.grammar.validate(1e-9).is_ok());
    }
}
