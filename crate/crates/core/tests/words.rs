use proptest::prelude::*;
use ttdef_core::constructions::associate;
use ttdef_core::corpus;
use ttdef_core::model::{Lhs, Rhs};
use ttdef_core::semantics::relabel;
use ttdef_core::trees::{NodeAddr, RankedAlphabet, Symbol, Tree};
use ttdef_core::words::*;

fn s(x: &str) -> Symbol {
    Symbol::new(x)
}

fn leaf_state(h: &ttdef_core::constructions::AssociatedAttR, leaf: &str) -> Symbol {
    h.b.rule(&s(leaf), &[])[0].state.clone()
}

#[test]
fn two_way_for_a2_has_expected_rules() {
    let h = associate(&corpus::att("a2")).unwrap();
    let tw = build_two_way(&h).unwrap();
    let re = leaf_state(&h, "e");
    let want = Rhs::Inh(s(&format!("chk<{re}>")));
    assert!(tw.att.rhs(&s("e"), &Lhs::Syn(s("walk"))).contains(&want));
    assert!(tw.att.is_deterministic());
    assert_eq!(tw.att.input.max_rank(), 1);
}

#[test]
fn correspondence_examples() {
    let h = associate(&corpus::att("a2")).unwrap();
    let tw = build_two_way(&h).unwrap();
    let corr = tw.corr.as_ref().unwrap();
    let (re, rd) = (leaf_state(&h, "e"), leaf_state(&h, "d"));
    let f = s(&format!("f_<{re},{rd}>"));
    let yes = word_to_tree(&[enc_symbol(&f, 2), s("d")]);
    let no = word_to_tree(&[enc_symbol(&f, 1), s("d")]);
    assert!(corresponds(&yes, corr));
    assert!(!corresponds(&no, corr));
}

#[test]
fn two_way_agrees_with_associate_up_to_8() {
    let h = associate(&corpus::att("a2")).unwrap();
    let tw = build_two_way(&h).unwrap();
    let n = check_two_way_against(&h, &tw, 8).unwrap_or_else(|(s, w, g)| panic!("{s}: two-way {w:?}, att {g:?}"));
    // at least every leftmost path: 2 leaves times 4 annotations per inner node
    assert!(n >= (0..8).map(|k| 2 * 4usize.pow(k)).sum::<usize>());
}

#[test]
fn non_corresponding_words_have_no_output() {
    let h = associate(&corpus::att("a2")).unwrap();
    let tw = build_two_way(&h).unwrap();
    let corr = tw.corr.as_ref().unwrap();
    let e = WordEngine::new(&tw.att).unwrap();
    let mut words: Vec<Vec<Symbol>> = e.leaves().into_iter().map(|l| vec![l]).collect();
    let mut checked = 0;
    for _ in 0..3 {
        for w in &words {
            if !corresponds(&word_to_tree(w), corr) {
                assert_eq!(e.eval(w), None, "{w:?}");
                checked += 1;
            }
        }
        words = words
            .iter()
            .flat_map(|w| {
                e.unary().into_iter().map(move |u| {
                    let mut v = vec![u];
                    v.extend(w.iter().cloned());
                    v
                })
            })
            .collect();
    }
    assert!(checked > 1000);
}

#[test]
fn engine_matches_tree_semantics() {
    let rev = corpus::att("rev");
    let e = WordEngine::new(&rev).unwrap();
    let word: Vec<Symbol> = ["a", "a", "b", "a", "e"].iter().map(|x| s(x)).collect();
    let out = e.eval(&word).unwrap();
    let names: Vec<&str> = out.iter().map(|x| x.as_str()).collect();
    assert_eq!(names, ["a", "b", "a", "a", "e"]);
    let t = word_to_tree(&word);
    let via_tree = ttdef_core::semantics::evaluate_att(&rev, &t, &Default::default()).into_option();
    assert_eq!(via_tree, Some(word_to_tree(&out)));
}

#[test]
fn a2_two_way_is_one_way_definable() {
    let h = associate(&corpus::att("a2")).unwrap();
    let tw = build_two_way(&h).unwrap();
    let r = one_way_definability(&tw, &DefinabilityBudget::default()).unwrap();
    let DefinabilityResult::Definable { transducer, verified_length, .. } = r else {
        panic!("{r:?}")
    };
    assert!(verified_length >= 8);
    let e = WordEngine::new(&tw.att).unwrap();
    // independent spot check on the leftmost path of a concrete tree
    let s0 = relabel(&h.b, &Tree::parse_unchecked("f(f(e,d),f(d,e))").unwrap()).unwrap();
    let w = tree_to_word(&encode_prefix(&s0, &NodeAddr(vec![1, 1])).unwrap());
    assert_eq!(transducer.eval(&w), e.eval(&w));
    assert!(e.eval(&w).is_some());
}

#[test]
fn reversal_is_not_one_way_definable() {
    let tw = TwoWayWord::new(corpus::att("rev")).unwrap();
    let r = one_way_definability(&tw, &DefinabilityBudget::default()).unwrap();
    let DefinabilityResult::NotDefinable { certificate } = r else { panic!("{r:?}") };
    replay_certificate(&tw, &certificate).unwrap();
    let json = serde_json::to_string(&certificate).unwrap();
    let back: Certificate = serde_json::from_str(&json).unwrap();
    assert_eq!(back, certificate);
    let mut forged = certificate.clone();
    let (Certificate::TwoLoops { outputs, .. } | Certificate::Loop { outputs, .. }) = &mut forged;
    outputs[0].reverse();
    assert!(replay_certificate(&tw, &forged).is_err());
}

#[test]
fn zero_budget_is_unknown() {
    let tw = TwoWayWord::new(corpus::att("rev")).unwrap();
    let b = DefinabilityBudget { budget_words: 0, ..Default::default() };
    assert!(matches!(one_way_definability(&tw, &b).unwrap(), DefinabilityResult::Unknown { .. }));
}

#[test]
fn back_convert_restores_ranks() {
    let h = associate(&corpus::att("a2")).unwrap();
    let tw = build_two_way(&h).unwrap();
    let DefinabilityResult::Definable { transducer, .. } = one_way_definability(&tw, &DefinabilityBudget::default()).unwrap() else {
        panic!()
    };
    let t = transducer.to_tdtt("O", &tw.att.input, &tw.att.output);
    let back = back_convert(&t, &h.b.output).unwrap();
    for ((_, c), rs) in &back.rules {
        let k = h.b.output.rank(c).unwrap();
        for r in rs {
            assert!(r.calls().iter().all(|(_, i)| *i >= 1 && *i <= k));
        }
    }
    let rt = OneWay::from_tdtt(&t).unwrap();
    let e = WordEngine::new(&tw.att).unwrap();
    assert!(matches!(verify_one_way(&e, &rt, 6, 1_000_000), Verification::Agree { .. }));
}

fn arb_tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![Just(Tree::leaf("e")), Just(Tree::leaf("d"))];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::node("f", vec![a, b])),
            inner.prop_map(|a| Tree::node("g", vec![a])),
        ]
    })
}

proptest! {
    #[test]
    fn encode_decode_roundtrip(t in arb_tree(), pick in 0usize..64) {
        let sigma = RankedAlphabet::from_pairs([("f", 2), ("g", 1), ("e", 0), ("d", 0)]);
        let leaves: Vec<NodeAddr> = t.nodes().into_iter().filter(|v| t.subtree_at(v).unwrap().rank() == 0).collect();
        let v = &leaves[pick % leaves.len()];
        let w = encode_prefix(&t, v).unwrap();
        prop_assert_eq!(w.size(), v.len() + 1);
        let p = decode_prefix(&w, &sigma).unwrap();
        prop_assert!(p.is_prefix_of(&t));
        prop_assert_eq!(encode_prefix(&fill_from(&p, &t), v).unwrap(), w);
    }

    #[test]
    fn one_loop_shape_detects_affine(p in "[ab]{0,3}", x in "[ab]{0,3}", sfx in "[ab]{0,3}") {
        let w = |z: &str| z.chars().map(|c| Symbol::new(&c.to_string())).collect::<Vec<_>>();
        let outs: Vec<_> = (1..=4).map(|n| w(&format!("{p}{}{sfx}", x.repeat(n)))).collect();
        prop_assert!(fits_one_loop(&outs));
    }
}

fn fill_from(p: &ttdef_core::trees::Prefix, t: &Tree) -> Tree {
    // holes take the subtrees of t at the same address
    fn go(p: &ttdef_core::trees::Prefix, t: &Tree) -> Tree {
        match p {
            ttdef_core::trees::Prefix::Hole => t.clone(),
            ttdef_core::trees::Prefix::Node(s, ch) => {
                Tree::new(s.clone(), ch.iter().zip(t.children()).map(|(c, u)| go(c, u)).collect())
            }
        }
    }
    go(p, t)
}
