use std::collections::{BTreeMap, BTreeSet};
use ttdef_core::analysis::*;
use ttdef_core::corpus;
use ttdef_core::trees::{trees_up_to_depth, trees_up_to_depth_unsorted, Tree};

fn brute_sets(name: &str, depth: usize) -> BTreeMap<PairSet, Tree> {
    let a = corpus::att(name);
    let mut out = BTreeMap::new();
    for s in trees_up_to_depth(&a.input, depth) {
        if let Some(m) = simulate_visiting_pairs(&a, &s) {
            for (_, p) in m {
                out.entry(p).or_insert_with(|| s.clone());
            }
        }
    }
    out
}

#[test]
fn visiting_sets_match_simulation() {
    for name in ["a1", "a2"] {
        let a = corpus::att(name);
        let an = Analyzer::new(&a).unwrap();
        let sets = an.visiting_pair_sets();
        let symbolic: BTreeSet<PairSet> = sets.iter().map(|v| v.pairs.clone()).collect();
        let brute: BTreeSet<PairSet> = brute_sets(name, 4).into_keys().collect();
        assert_eq!(symbolic, brute, "{name}");
        for v in &sets {
            let m = simulate_visiting_pairs(&a, &v.witness_input).expect("witness in domain");
            assert_eq!(m[&v.witness_node], v.pairs, "{name} {}", v.witness_input);
        }
    }
}

#[test]
fn isd_agrees_with_tail_maps() {
    for name in ["a1", "a2"] {
        let a = corpus::att(name);
        let mut seen = BTreeSet::new();
        for s in trees_up_to_depth(&a.input, 4) {
            let isd = compute_isd(&a, &s);
            assert_eq!(isd, isd_from_tail_map(&tail_map(&a, &s)), "{s}");
            seen.insert(isd);
        }
        assert_eq!(seen, all_isds(&a));
    }
}

/// κ_ψ equals the largest nf height over Ω_ψ, checked on all trees of depth ≤ 5.
#[test]
fn kappa_matches_exhaustive_heights() {
    let a = corpus::att("a2");
    let an = Analyzer::new(&a).unwrap();
    let c = ttdef_core::semantics::CompiledAtt::new(&a);
    let trees = trees_up_to_depth_unsorted(&a.input, 5);
    let maps: Vec<TailMap> = trees.iter().map(|s| tail_map_compiled(&c, s)).collect();
    for v in an.visiting_pair_sets() {
        let verdict = an.variation(&v.pairs).unwrap();
        if !verdict.bounded || v.pairs.is_empty() {
            continue;
        }
        let mut best = 0;
        for tm in &maps {
            let member = v.pairs.iter().all(|(b, x)| matches!(&tm[x], TailEntry::Inh { b: b2, .. } if b2 == b));
            if member {
                for (_, x) in &v.pairs {
                    if let TailEntry::Inh { out, .. } = &tm[x] {
                        best = best.max(out.len() + 1);
                    }
                }
            }
        }
        assert_eq!(Some(best), verdict.kappa, "{}", render_pairs(&v.pairs));
    }
}

#[test]
fn pump_witnesses_replay() {
    for name in ["a1", "a2"] {
        let a = corpus::att(name);
        let an = Analyzer::new(&a).unwrap();
        let c = ttdef_core::semantics::CompiledAtt::new(&a);
        for v in an.visiting_pair_sets() {
            let verdict = an.variation(&v.pairs).unwrap();
            if let Some(w) = verdict.pump {
                let ls = w.lengths_for(&c, 4);
                assert_eq!(ls.len(), 4);
                assert!(ls.windows(2).all(|p| p[0] < p[1]), "{ls:?}");
                for n in 0..4 {
                    let tm = tail_map(&a, &w.pumped(n));
                    assert!(v.pairs.iter().all(|(b, x)| matches!(&tm[x], TailEntry::Inh { b: b2, .. } if b2 == b)));
                }
            }
        }
    }
}

#[test]
fn single_path_witness_replays() {
    let a = corpus::att("a1");
    let an = Analyzer::new(&a).unwrap();
    let SinglePath::No { input, v1, v2 } = an.single_path() else { panic!("A1 has no single path") };
    assert_eq!(v1.parent().unwrap().0, v2.parent().unwrap().0);
    let m = simulate_visiting_pairs(&a, &input).unwrap();
    for v in [&v1, &v2] {
        assert!(!an.variation(&m[v]).unwrap().bounded);
    }
    // the larger hand-picked input is a witness as well
    let s = Tree::parse_unchecked("f(f(e,e),f(e,e))").unwrap();
    let m = simulate_visiting_pairs(&a, &s).unwrap();
    for v in m.values() {
        assert!(!an.variation(v).unwrap().bounded);
    }
}

#[test]
fn preconditions() {
    assert!(matches!(Analyzer::new(&corpus::att("c0")), Err(AnalysisError::NotApplicable(r)) if r == "circular"));
    assert!(matches!(Analyzer::new(&corpus::att("n1")), Err(AnalysisError::NotApplicable(r)) if r == "nondeterministic"));
}
