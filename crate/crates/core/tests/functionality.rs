use proptest::prelude::*;
use std::collections::BTreeSet;
use ttdef_core::analysis::is_circular;
use ttdef_core::corpus;
use ttdef_core::functionality::*;
use ttdef_core::model::{parse_spec, AttSpec, Decl, Lhs};
use ttdef_core::semantics::{enumerate_outputs, evaluate_att, Form, StepBudget};
use ttdef_core::trees::{trees_up_to_depth, NodeAddr, RankedAlphabet, Symbol, Tree};

fn att(text: &str) -> AttSpec {
    match parse_spec(text).unwrap() {
        Decl::Att(a) => a,
        _ => panic!(),
    }
}

const ROOT_CHOICE: &str = "
att R
input f:2 e:0
output g:1 e:0
syn a c
inh b
init a
rule f: a(pi) -> g(a(pi 1))
rule f: b(pi 1) -> b(pi)
rule f: b(pi 2) -> b(pi)
rule f: c(pi) -> g(c(pi 2))
rule e: a(pi) -> b(pi)
rule e: c(pi) -> e
rule #: b(pi 1) -> e
rule #: b(pi 1) -> g(c(pi 1))
";

fn outputs(d: &Decl, s: &Tree) -> BTreeSet<Tree> {
    let (o, complete) = enumerate_outputs(d, s, &StepBudget::default());
    assert!(complete);
    o
}

#[test]
fn root_rules_become_deterministic() {
    let a = att(ROOT_CHOICE);
    let n = normalize_root_rules(&a);
    let root = Symbol::root();
    assert!(n.rules[&root].values().all(|v| v.len() == 1));
    let fresh = Symbol::new("root<b>");
    assert!(n.syn.contains(&fresh));
    assert_eq!(n.rhs(&root, &Lhs::Inh(Symbol::new("b"), 1)).len(), 1);
    for s in trees_up_to_depth(&a.input, 3) {
        assert_eq!(outputs(&Decl::Att(a.clone()), &s), outputs(&Decl::Att(n.clone()), &s), "{s}");
    }
    assert!(!is_circular(&a).0);
    assert!(!is_circular(&n).0);
    let a1 = corpus::att("a1");
    assert_eq!(normalize_root_rules(&a1), a1);
}

#[test]
fn productive_cycle_in_p0() {
    let p0 = corpus::att("p0");
    let pc = detect_productive_cycle(&p0, 3).expect("cycle");
    assert!(replay_cycle(&p0, &pc));
    assert!(!pc.completes);
    let shown: Vec<String> = pc.trace.iter().map(|f| f.to_string()).collect();
    assert_eq!(shown, ["a(1)", "g(b(1))", "g(a(1))"]);
    assert!(is_circular(&p0).0);
    // tampering breaks the replay
    let mut bad = pc.clone();
    bad.trace[2] = Form::occ("a", NodeAddr(vec![1]));
    assert!(!replay_cycle(&p0, &bad));
}

#[test]
fn no_productive_cycle_in_c0_or_a1() {
    assert!(detect_productive_cycle(&corpus::att("c0"), 4).is_none());
    assert!(is_circular(&corpus::att("c0")).0);
    assert!(detect_productive_cycle(&corpus::att("a1"), 4).is_none());
    assert!(detect_productive_cycle(&corpus::att("a2"), 3).is_none());
}

#[test]
fn annotated_alphabet_counts() {
    for name in ["a1", "a2", "n1"] {
        let p = build_annotated_pair(&corpus::att(name));
        let brute: u128 = p
            .base
            .input
            .iter()
            .map(|(s, _)| (p.valid_subsets(s).len() as u128).pow(2))
            .sum();
        assert_eq!(p.symbol_count(), brute, "{name}");
    }
    assert_eq!(build_annotated_pair(&corpus::att("a1")).symbol_count(), 64 + 4);
    assert_eq!(build_annotated_pair(&corpus::att("n1")).symbol_count(), 64 + 9);
    // a symbol without rules has the single annotation with empty sets
    let mut a = corpus::att("a1");
    a.input.insert(Symbol::new("z"), 0).unwrap();
    let p = build_annotated_pair(&a);
    assert_eq!(p.valid_subsets(&Symbol::new("z")), vec![BTreeSet::new()]);
    assert!(p.symbol(&Symbol::new("z"), &BTreeSet::new(), &BTreeSet::new()).is_some());
    assert!(p.symbol(&Symbol::new("z"), &BTreeSet::from([0]), &BTreeSet::new()).is_none());
}

#[test]
fn annotated_sides_follow_the_source() {
    let a1 = corpus::att("a1");
    let p = build_annotated_pair(&a1);
    let mut hat = RankedAlphabet::new();
    for (s, k) in a1.input.iter() {
        for r1 in p.valid_subsets(s) {
            for r2 in p.valid_subsets(s) {
                hat.insert(p.symbol(s, &r1, &r2).unwrap(), k).unwrap();
            }
        }
    }
    assert_eq!(hat.len(), 68);
    let mut defined = 0;
    for sh in trees_up_to_depth(&hat, 2) {
        let h = p.project(&sh).unwrap();
        let want = evaluate_att(&a1, &h, &StepBudget::default()).into_option();
        let (l, r) = p.eval(&sh, &StepBudget::default());
        if let (Some(l), Some(r)) = (l, r) {
            assert_eq!(Some(&l), want.as_ref());
            assert_eq!(l, r);
            defined += 1;
        }
    }
    assert!(defined > 0);
}

#[test]
fn deterministic_inputs_are_functional() {
    for name in ["a1", "a2"] {
        let v = is_functional(&Decl::Att(corpus::att(name)), &FunctionalityBudget::default()).unwrap();
        assert!(matches!(v, FunctionalityVerdict::FunctionalUpTo { depth: 4, .. }), "{name}: {v:?}");
    }
}

#[test]
fn n1_is_not_functional() {
    let d = Decl::Att(corpus::att("n1"));
    let v = is_functional(&d, &FunctionalityBudget::default()).unwrap();
    let FunctionalityVerdict::NotFunctional { input, outputs, annotated, cycle } = &v else { panic!("{v:?}") };
    assert!(cycle.is_none());
    assert_ne!(outputs.0, outputs.1);
    assert!(annotated.is_some());
    assert!(input.size() <= 3);
    assert!(replay_not_functional(&d, &v));
}

#[test]
fn productive_cycles_and_functionality() {
    let d = Decl::Att(corpus::att("p0c"));
    let v = is_functional(&d, &FunctionalityBudget::default()).unwrap();
    let FunctionalityVerdict::NotFunctional { cycle: Some(c), .. } = &v else { panic!("{v:?}") };
    assert!(c.completes);
    assert!(replay_not_functional(&d, &v));
    // P0 never produces output, so it is functional on its (empty) domain
    for name in ["p0", "c0"] {
        let v = is_functional(&Decl::Att(corpus::att(name)), &FunctionalityBudget::default()).unwrap();
        assert!(matches!(v, FunctionalityVerdict::FunctionalUpTo { .. }), "{name}: {v:?}");
    }
}

#[test]
fn nonmonadic_is_rejected() {
    let mut a = corpus::att("a1");
    a.output.insert(Symbol::new("h"), 2).unwrap();
    assert!(is_functional(&Decl::Att(a), &FunctionalityBudget::default()).is_err());
}

#[test]
fn bounded_equivalence_examples() {
    let a1 = Decl::Att(corpus::att("a1"));
    let a2 = Decl::Att(corpus::att("a2"));
    assert!(bounded_equivalence(&a1, &a1, 4).is_equal());
    let w = bounded_equivalence_over(&a1, &a2, a1.input(), 3, &StepBudget::default());
    let Equivalence::Witness { input, left, right } = w else { panic!("{w:?}") };
    assert_eq!(input.to_string(), "e");
    assert_ne!(left, right);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn n1_outputs_match_leaf_oracle(depth in 1usize..4, pick in 0usize..1000) {
        let n1 = corpus::att("n1");
        let trees = trees_up_to_depth(&n1.input, depth);
        let s = &trees[pick % trees.len()];
        let outs = outputs(&Decl::Att(n1), s);
        let want: BTreeSet<Tree> = (0..=s.leaf_count())
            .map(|k| (0..k).fold(Tree::leaf("e"), |t, _| Tree::node("g", vec![t])))
            .collect();
        prop_assert_eq!(outs, want);
    }
}
