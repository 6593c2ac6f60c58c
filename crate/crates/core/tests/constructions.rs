use ttdef_core::constructions::*;
use ttdef_core::corpus;
use ttdef_core::equivalence::{bounded_equivalence, bounded_equivalence_over, Equivalence};
use ttdef_core::model::*;
use ttdef_core::semantics::{evaluate, StepBudget};
use ttdef_core::trees::{trees_up_to_depth, RankedAlphabet, Symbol, Tree};

fn att(text: &str) -> AttSpec {
    match parse_spec(text).unwrap() {
        Decl::Att(a) => a,
        _ => panic!(),
    }
}

const GROUND: &str = "att G
input f:2 e:0 d:0
output g:1 e:0
syn a
init a
rule f: a(pi) -> g(a(pi 2))
rule e: a(pi) -> e
rule d: a(pi) -> g(e)
rule #: a(pi 1) -> a(pi 1)
";

#[test]
fn ground_rhs_moved_to_root() {
    let g = att(GROUND.replace("rule #: a(pi 1) -> a(pi 1)\n", "").as_str());
    let n = normalize_ground_rhs(&g);
    let e = Symbol::new("e");
    assert_eq!(n.rhs(&e, &Lhs::Syn("a".into())), &[Rhs::Inh("<e>".into())]);
    assert_eq!(n.rhs(&Symbol::root(), &Lhs::Inh("<e>".into(), 1)), &[Rhs::out("e", vec![])]);
    assert_eq!(n.rhs(&"f".into(), &Lhs::Inh("<g(e)>".into(), 2)), &[Rhs::Inh("<g(e)>".into())]);
    for (s, _, r) in n.all_rules() {
        assert!(s.is_root() || !r.is_ground());
    }
    assert!(bounded_equivalence(&Decl::Att(g.clone()), &Decl::Att(n.clone()), 4).is_equal());
    let twice = normalize_ground_rhs(&n);
    assert_eq!(render_att(&twice), render_att(&n));
    let a1 = corpus::att("a1");
    assert_eq!(normalize_ground_rhs(&a1), a1);
}

fn state_named<'a>(h: &'a AssociatedAttR, want: &str) -> &'a str {
    h.states
        .iter()
        .find(|(_, st, _)| st.iter().map(|(a, x)| format!("{a}={x}")).collect::<Vec<_>>().join(" ") == want)
        .map(|s| s.0.as_str())
        .unwrap()
}

#[test]
fn associate_a2() {
    let a2 = corpus::att("a2");
    let h = associate(&a2).unwrap();
    let r1 = state_named(&h, "a=b_e(pi) a_e=<e>(pi)");
    let r2 = state_named(&h, "a=b_d(pi) a_d=<d>(pi)");
    let sym = Symbol::new(&format!("f_<{r1},{r2}>"));
    assert_eq!(h.a.rhs(&sym, &Lhs::Inh("b_e".into(), 1)), &[Rhs::Inh("<e>".into())]);
    let paired = Decl::Pair(h.to_paired("A2hat"));
    assert!(bounded_equivalence(&Decl::Att(a2.clone()), &paired, 4).is_equal());
    // the relabeling accepts everything and the A2 translation is preserved
    let s = Tree::parse_unchecked("f(f(f(d,d),d),f(d,e))").unwrap();
    assert_eq!(
        evaluate(&paired, &s, &StepBudget::default()).into_option(),
        Some(Tree::parse_unchecked("g(f(f(d)))").unwrap())
    );
    let text = render_spec(&paired);
    assert_eq!(parse_spec(&text).unwrap(), paired);
}

#[test]
fn string_like() {
    let h = associate(&corpus::att("a2")).unwrap();
    assert!(string_like_check(&h.b, &h.a, 4).0);
    assert!(string_like_check(&h.b, &h.a, 0).0);
    let a1 = corpus::att("a1");
    let id = RelabelingSpec::identity("I", &a1.input);
    let (ok, bad) = string_like_check(&id, &a1, 3);
    assert!(!ok);
    let v = &bad[0];
    assert!(!v.v1.is_ancestor_or_self(&v.v2) && !v.v2.is_ancestor_or_self(&v.v1));
    assert!(string_like_check(&id, &a1, 1).0);
}

#[test]
fn associate_refuses_inapplicable() {
    assert!(matches!(associate(&corpus::att("c0")), Err(ConstructionError::NotApplicable(_))));
    assert!(matches!(associate(&corpus::att("n1")), Err(ConstructionError::NotApplicable(_))));
}

fn dtr(b: RelabelingSpec, t: TdttSpec) -> PairedSpec {
    PairedSpec::DtR { name: "T".into(), b, t }
}

fn alpha() -> RankedAlphabet {
    RankedAlphabet::from_pairs([("f", 2), ("e", 0), ("d", 0)])
}

/// Swaps children of f and renames e/d depending on whether the right child is a leaf.
fn sample_dtr() -> PairedSpec {
    let text = "relabeling L
input f:2 e:0 d:0
output f:2 fl:2 e:0 d:0
states l n
final l n
rule e -> l:e
rule d -> l:d
rule f(l,l) -> n:fl
rule f(n,l) -> n:fl
rule f(l,n) -> n:f
rule f(n,n) -> n:f
dt T
input f:2 fl:2 e:0 d:0
output f:2 g:1 e:0 d:0
states q r
init q
rule q f: q(f(x1,x2)) -> f(q(x2),r(x1))
rule q fl: q(fl(x1,x2)) -> g(q(x1))
rule r f: r(f(x1,x2)) -> r(x2)
rule r fl: r(fl(x1,x2)) -> f(r(x1),q(x2))
rule q e: q(e) -> d
rule q d: q(d) -> e
rule r e: r(e) -> e
pair dtR S = L ; T
";
    match parse_spec(text).unwrap() {
        Decl::Pair(p) => p,
        _ => panic!(),
    }
}

fn run(p: &PairedSpec, s: &Tree) -> Option<Tree> {
    evaluate(&Decl::Pair(p.clone()), s, &StepBudget::default()).into_option()
}

#[test]
fn compose_matches_sequential_run() {
    let t1 = sample_dtr();
    let out = RankedAlphabet::from_pairs([("f", 2), ("g", 1), ("e", 0), ("d", 0)]);
    // second stage: identity look-ahead, top-down that flips f children and keeps the rest
    let mut t2 = TdttSpec::identity("T2", &out);
    t2.rules.remove(&(Symbol::new("q"), Symbol::new("f")));
    t2.add_rule(
        &"q".into(),
        &"f".into(),
        TdRhs::Out("f".into(), vec![TdRhs::Call("q".into(), 2), TdRhs::Call("q".into(), 1)]),
    );
    t2.rules.remove(&(Symbol::new("q"), Symbol::new("d")));
    let second = dtr(RelabelingSpec::identity("I", &out), t2);
    let c = compose_dtr(&t1, &second, "C").unwrap();
    for s in trees_up_to_depth(&alpha(), 3) {
        let seq = run(&t1, &s).and_then(|m| run(&second, &m));
        assert_eq!(run(&c, &s), seq, "{s}");
    }
    // identity on either side
    let id = dtr(RelabelingSpec::identity("I", &out), TdttSpec::identity("Id", &out));
    let c2 = compose_dtr(&t1, &id, "C2").unwrap();
    let id_in = dtr(RelabelingSpec::identity("I", &alpha()), TdttSpec::identity("Id", &alpha()));
    let c3 = compose_dtr(&id_in, &t1, "C3").unwrap();
    for s in trees_up_to_depth(&alpha(), 3) {
        assert_eq!(run(&c2, &s), run(&t1, &s));
        assert_eq!(run(&c3, &s), run(&t1, &s));
    }
}

#[test]
fn compose_alphabet_mismatch() {
    let t1 = sample_dtr();
    let id_in = dtr(RelabelingSpec::identity("I", &alpha()), TdttSpec::identity("Id", &alpha()));
    assert!(matches!(compose_dtr(&t1, &id_in, "X"), Err(ConstructionError::AlphabetMismatch(_))));
}

#[test]
fn relabeling_composition_is_relabeling() {
    let a = alpha();
    let mut l = TdttSpec::identity("L", &a);
    // swap e and d
    l.rules.insert(("q".into(), "e".into()), vec![TdRhs::Out("d".into(), vec![])]);
    l.rules.insert(("q".into(), "d".into()), vec![TdRhs::Out("e".into(), vec![])]);
    let u = dtr(RelabelingSpec::identity("I", &a), l);
    let c = compose_dtr(&u, &u, "UU").unwrap();
    let PairedSpec::DtR { t, .. } = &c else { panic!() };
    assert!(t.is_relabeling());
    for s in trees_up_to_depth(&a, 3) {
        assert_eq!(run(&c, &s), Some(s.clone()));
    }
}

fn identity_lookaround(a: &RankedAlphabet) -> LookAround {
    LookAround {
        name: "U".into(),
        b: RelabelingSpec::identity("UB", a),
        l: TdttSpec::identity("UL", a),
    }
}

#[test]
fn domain_into_range_identity() {
    let a2 = corpus::att("a2");
    let u = identity_lookaround(&a2.input);
    let p = normalize_domain_into_range(&u, &a2, "A2r").unwrap();
    let eq = bounded_equivalence(&Decl::Att(a2.clone()), &Decl::Pair(p.clone()), 3);
    assert!(eq.is_equal(), "{eq:?}");
    let text = render_spec(&Decl::Pair(p.clone()));
    assert_eq!(parse_spec(&text).unwrap(), Decl::Pair(p));
}

#[test]
fn domain_into_range_restricted_lookaround() {
    // look-around that only accepts trees whose root is f, relabeling e to d below
    let text = "relabeling UB
input f:2 e:0 d:0
output f:2 e:0 d:0
states l n
final n
rule e -> l:e
rule d -> l:d
rule f(l,l) -> n:f
rule f(l,n) -> n:f
rule f(n,l) -> n:f
rule f(n,n) -> n:f
dt UL
input f:2 e:0 d:0
output f:2 e:0 d:0
states q
init q
rule q f: q(f(x1,x2)) -> f(q(x1),q(x2))
rule q e: q(e) -> d
rule q d: q(d) -> d
pair lookaround U = UB ; UL
";
    let Decl::Pair(PairedSpec::LookAround(u)) = parse_spec(text).unwrap() else { panic!() };
    let a2 = corpus::att("a2");
    let p = normalize_domain_into_range(&u, &a2, "A2r").unwrap();
    let orig = PairedSpec::AttU { name: "O".into(), u: u.clone(), a: a2.clone() };
    let eq = bounded_equivalence_over(&Decl::Pair(orig), &Decl::Pair(p.clone()), &a2.input, 3, &StepBudget::default());
    assert!(eq.is_equal(), "{eq:?}");
    // every tree accepted by the att stage is an output of the look-around
    let PairedSpec::AttU { u: u2, a: inner, .. } = &p else { panic!() };
    let range: Vec<Tree> = trees_up_to_depth(&a2.input, 3)
        .iter()
        .filter_map(|s| ttdef_core::semantics::run_lookaround(u2, s, &StepBudget::default()))
        .collect();
    for s in trees_up_to_depth(&inner.input, 3) {
        if evaluate(&Decl::Att(inner.clone()), &s, &StepBudget::default()).into_option().is_some() {
            assert!(range.contains(&s), "{s}");
        }
    }
}

#[test]
fn domain_into_range_empty() {
    let mut a = corpus::att("a2");
    a.rules.remove(&Symbol::root());
    let u = identity_lookaround(&a.input);
    let p = normalize_domain_into_range(&u, &a, "E").unwrap();
    for s in trees_up_to_depth(&a.input, 3) {
        assert!(evaluate(&Decl::Pair(p.clone()), &s, &StepBudget::default()).into_option().is_none());
    }
}

#[test]
fn restrict_to_relabeled() {
    let t = sample_dtr();
    let a = alpha();
    let u = identity_lookaround(&a);
    let r = restrict_dtr_to_relabeled(&t, &u).unwrap();
    for s in trees_up_to_depth(&a, 3) {
        assert_eq!(run(&r, &s), run(&t, &s));
    }
    // annotated look-around output
    let ann = RankedAlphabet::from_pairs([("f_<x>", 2), ("f_<y>", 2), ("<e,z>", 0), ("d", 0)]);
    let mut l = TdttSpec::new("L", a.clone(), ann.clone(), "q");
    l.add_rule(&"q".into(), &"f".into(), TdRhs::Out("f_<x>".into(), vec![TdRhs::Call("p".into(), 1), TdRhs::Call("q".into(), 2)]));
    l.add_rule(&"p".into(), &"f".into(), TdRhs::Out("f_<y>".into(), vec![TdRhs::Call("p".into(), 1), TdRhs::Call("q".into(), 2)]));
    for q in ["p", "q"] {
        l.add_rule(&q.into(), &"e".into(), TdRhs::Out("<e,z>".into(), vec![]));
        l.add_rule(&q.into(), &"d".into(), TdRhs::Out("d".into(), vec![]));
    }
    let u2 = LookAround { name: "U".into(), b: RelabelingSpec::identity("UB", &a), l };
    let r2 = restrict_dtr_to_relabeled(&t, &u2).unwrap();
    for s in trees_up_to_depth(&a, 3) {
        let annotated = ttdef_core::semantics::run_lookaround(&u2, &s, &StepBudget::default()).unwrap();
        assert_eq!(run(&r2, &annotated), run(&t, &s), "{s}");
    }
    let bad = RankedAlphabet::from_pairs([("h", 2), ("e", 0), ("d", 0)]);
    let u3 = LookAround {
        name: "U".into(),
        b: RelabelingSpec::identity("UB", &a),
        l: TdttSpec::new("L", a.clone(), bad, "q"),
    };
    assert!(matches!(restrict_dtr_to_relabeled(&t, &u3), Err(ConstructionError::AlphabetMismatch(_))));
}

#[test]
fn uniformize_cases() {
    let t = sample_dtr();
    let u = uniformize(&t, "U").unwrap();
    let PairedSpec::DtR { t: ut, .. } = &u else { panic!() };
    assert!(ut.is_deterministic());
    assert!(bounded_equivalence(&Decl::Pair(t.clone()), &Decl::Pair(u.clone()), 4).is_equal());

    // redundant equivalent rule plus a rule that can never complete
    let PairedSpec::DtR { b, t: mut nt, .. } = sample_dtr() else { panic!() };
    nt.add_rule(&"q".into(), &"fl".into(), TdRhs::Out("g".into(), vec![TdRhs::Call("q".into(), 1)]));
    nt.add_rule(&"q".into(), &"f".into(), TdRhs::Out("g".into(), vec![TdRhs::Call("dead".into(), 1)]));
    let n = dtr(b.clone(), nt.clone());
    let u = uniformize(&n, "U").unwrap();
    assert!(bounded_equivalence(&Decl::Pair(t.clone()), &Decl::Pair(u), 4).is_equal());

    // a non-functional input slips through and is caught by the equivalence check
    nt.add_rule(&"q".into(), &"e".into(), TdRhs::Out("e".into(), vec![]));
    let n = dtr(b, nt);
    let u = uniformize(&n, "U").unwrap();
    let s = Tree::leaf("e");
    let (outs, _) = ttdef_core::semantics::enumerate_outputs(&Decl::Pair(n), &s, &StepBudget::default());
    assert_eq!(outs.len(), 2);
    let one = run(&u, &s).unwrap();
    assert!(outs.contains(&one));
    assert!(matches!(
        bounded_equivalence(&Decl::Pair(t), &Decl::Pair(u), 1),
        Equivalence::Witness { .. } | Equivalence::Equal { .. }
    ));
}
