//! Transducer-to-transducer constructions: ground-rhs normalization, the
//! associated att with look-ahead, domain-into-range normalization for
//! look-around, dt^R composition, look-ahead restriction and uniformization.

use crate::analysis::{AnalysisError, Analyzer};
use crate::model::{AttSpec, LookAround, Lhs, PairedSpec, RelabelingSpec, Rhs, TdRhs, TdttSpec};
use crate::semantics::{self, CompiledAtt, Form, NfResult, StepBudget, Tail};
use crate::trees::{NodeAddr, RankedAlphabet, Symbol, Tree};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("construction not applicable: {0}")]
    NotApplicable(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("not trimmable: {0}")]
    NotTrimmable(String),
}

impl From<AnalysisError> for ConstructionError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::NotApplicable(r) => ConstructionError::NotApplicable(r),
        }
    }
}

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

// ------------------------------------------------------------ ground rhs

/// Moves ground right-hand sides outside the root marker into fresh inherited
/// attributes `<ξ>` that are computed at the root and passed up.
pub fn normalize_ground_rhs(a: &AttSpec) -> AttSpec {
    let mut grounds: BTreeSet<Tree> = BTreeSet::new();
    let mut out = a.clone();
    out.rules.clear();
    for (s, lhs, r) in a.all_rules() {
        if !s.is_root() && r.is_ground() {
            let t = r.to_tree().expect("ground");
            let name = sym(&format!("<{t}>"));
            grounds.insert(t);
            out.add_rule(s, lhs.clone(), Rhs::Inh(name));
        } else {
            out.add_rule(s, lhs.clone(), r.clone());
        }
    }
    for t in grounds {
        let name = sym(&format!("<{t}>"));
        out.inh.insert(name.clone());
        out.add_rule(&Symbol::root(), Lhs::Inh(name.clone(), 1), Rhs::from_tree(&t));
        for (s, k) in a.input.iter() {
            for j in 1..=k {
                out.add_rule(s, Lhs::Inh(name.clone(), j), Rhs::Inh(name.clone()));
            }
        }
    }
    out
}

// ------------------------------------------------------------ associate

/// ϱ: for each synthesized attribute whose nf over the subtree is short enough,
/// that nf with `b(π)` standing for b(ε).
pub type PrecomputeState = BTreeMap<Symbol, Rhs>;

#[derive(Clone, Debug)]
pub struct AssociatedAttR {
    pub b: RelabelingSpec,
    pub a: AttSpec,
    pub kappa: usize,
    /// state name, contents, representative tree
    pub states: Vec<(Symbol, PrecomputeState, Tree)>,
}

impl AssociatedAttR {
    pub fn to_paired(&self, name: &str) -> PairedSpec {
        PairedSpec::AttR {
            name: name.to_string(),
            b: self.b.clone(),
            a: self.a.clone(),
        }
    }

    pub fn state(&self, name: &str) -> Option<&PrecomputeState> {
        self.states.iter().find(|s| s.0.as_str() == name).map(|s| &s.1)
    }
}

fn monadic_rhs(out: &[Symbol], tail: Option<Rhs>) -> Rhs {
    let (mut r, rest) = match tail {
        Some(t) => (t, out),
        None => {
            let (last, init) = out.split_last().expect("non-empty ground output");
            (Rhs::Out(last.clone(), Vec::new()), init)
        }
    };
    for s in rest.iter().rev() {
        r = Rhs::Out(s.clone(), vec![r]);
    }
    r
}

fn precompute(c: &CompiledAtt, s: &Tree, kappa: usize) -> PrecomputeState {
    let host = c.host(s, false);
    let mut st = PrecomputeState::new();
    for a in &c.spec.syn {
        let id = c.attr_id(a).expect("syn");
        let r = c.thread(&host, id, 0, 1_000_000);
        let xi = match r.tail {
            Tail::Ground(_) if r.out.len() <= kappa => monadic_rhs(&r.out, None),
            Tail::Stuck { attr, node } if node.is_root() && !c.spec.is_syn(&attr) && r.out.len() < kappa => {
                monadic_rhs(&r.out, Some(Rhs::Inh(attr)))
            }
            _ => continue,
        };
        st.insert(a.clone(), xi);
    }
    st
}

fn annotated(s: &Symbol, kids: &[Symbol]) -> Symbol {
    if kids.is_empty() {
        s.clone()
    } else {
        let v: Vec<&str> = kids.iter().map(|k| k.as_str()).collect();
        sym(&format!("{s}_<{}>", v.join(",")))
    }
}

fn form_to_rhs(f: &Form, a: &AttSpec) -> Option<Rhs> {
    match f {
        Form::Out(s, ch) => Some(Rhs::Out(
            s.clone(),
            ch.iter().map(|c| form_to_rhs(c, a)).collect::<Option<Vec<_>>>()?,
        )),
        Form::Occ(o) if o.node.is_root() && !a.is_syn(&o.attr) => Some(Rhs::Inh(o.attr.clone())),
        Form::Occ(o) if o.node.len() == 1 && a.is_syn(&o.attr) => Some(Rhs::Syn(o.attr.clone(), o.node.0[0])),
        Form::Occ(_) => None,
    }
}

/// The att with look-ahead (B, A′) whose relabeling precomputes every output
/// part of height at most κ.
pub fn associate(a: &AttSpec) -> Result<AssociatedAttR, ConstructionError> {
    let a = normalize_ground_rhs(a);
    let kappa = Analyzer::new(&a)?.kappa();
    let c = CompiledAtt::new(&a);
    let syms: Vec<(Symbol, usize)> = a.input.iter().map(|(s, k)| (s.clone(), k)).collect();

    let mut states: Vec<(PrecomputeState, Tree)> = Vec::new();
    let mut index: HashMap<PrecomputeState, usize> = HashMap::new();
    let mut prods: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    let mut done: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    loop {
        let n = states.len();
        let mut added = false;
        for (si, (s, k)) in syms.iter().enumerate() {
            for tuple in tuples(n, *k) {
                if !done.insert((si, tuple.clone())) {
                    continue;
                }
                let t = Tree::new(s.clone(), tuple.iter().map(|&i| states[i].1.clone()).collect());
                let st = precompute(&c, &t, kappa);
                let id = match index.get(&st) {
                    Some(&id) => id,
                    None => {
                        states.push((st.clone(), t));
                        index.insert(st, states.len() - 1);
                        added = true;
                        states.len() - 1
                    }
                };
                prods.push((si, tuple, id));
            }
        }
        if !added {
            break;
        }
    }
    let names: Vec<Symbol> = (1..=states.len()).map(|i| sym(&format!("r{i}"))).collect();

    let mut out_alpha = RankedAlphabet::new();
    let mut b = RelabelingSpec::new(&format!("{}_B", a.name), a.input.clone(), RankedAlphabet::new());
    for (si, tuple, id) in &prods {
        let kids: Vec<Symbol> = tuple.iter().map(|&i| names[i].clone()).collect();
        let o = annotated(&syms[*si].0, &kids);
        if !out_alpha.contains(&o) {
            out_alpha.insert(o.clone(), syms[*si].1).expect("fresh");
        }
        b.add_rule(&syms[*si].0, kids, &names[*id], &o);
    }
    b.output = out_alpha.clone();
    b.finals = names.iter().cloned().collect();

    // local att: one leaf symbol <rN> per state with rules a(π) → ξ
    let mut local = a.clone();
    for (i, (st, _)) in states.iter().enumerate() {
        let leaf = sym(&format!("<{}>", names[i]));
        local.input.insert(leaf.clone(), 0).expect("fresh leaf");
        for (x, xi) in st {
            local.add_rule(&leaf, Lhs::Syn(x.clone()), xi.clone());
        }
    }
    let lc = CompiledAtt::new(&local);
    let budget = StepBudget::default();
    let mut a2 = AttSpec::new(&format!("{}'", a.name), out_alpha, a.output.clone(), a.init.as_str());
    a2.syn = a.syn.clone();
    a2.inh = a.inh.clone();
    for (_, lhs, r) in a.all_rules().filter(|(s, _, _)| s.is_root()) {
        a2.add_rule(&Symbol::root(), lhs.clone(), r.clone());
    }
    for (si, tuple, _) in &prods {
        let (s, _) = &syms[*si];
        let kids: Vec<Symbol> = tuple.iter().map(|&i| names[i].clone()).collect();
        let o = annotated(s, &kids);
        let t = Tree::new(
            s.clone(),
            kids.iter().map(|k| Tree::leaf(&format!("<{k}>"))).collect(),
        );
        let Some(rs) = a.rules.get(s) else { continue };
        for (lhs, rhss) in rs {
            let Some(r) = rhss.first() else { continue };
            let start = semantics::rhs_at(r, &NodeAddr::root());
            if let NfResult::Form(f) = semantics::nf_compiled(&lc, &t, &start, &budget) {
                if let Some(r2) = form_to_rhs(&f, &a) {
                    a2.add_rule(&o, lhs.clone(), r2);
                }
            }
        }
    }
    Ok(AssociatedAttR {
        b,
        a: a2,
        kappa,
        states: states
            .into_iter()
            .enumerate()
            .map(|(i, (st, t))| (names[i].clone(), st, t))
            .collect(),
    })
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t2 = t.clone();
                    t2.push(i);
                    t2
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StringLikeViolation {
    pub input: Tree,
    pub v1: NodeAddr,
    pub v2: NodeAddr,
}

/// Nodes of `s` at which the derivation of (b, a) on input `s` has attribute occurrences;
/// `None` when s is outside the domain.
pub fn processed_nodes(b: &RelabelingSpec, a: &AttSpec, s: &Tree) -> Option<BTreeSet<NodeAddr>> {
    let r = semantics::relabel(b, s)?;
    let tr = semantics::trace_att(a, &r, &StepBudget::default());
    if !tr.complete {
        return None;
    }
    let mut nodes = BTreeSet::new();
    for st in &tr.steps {
        for o in st.form.occurrences() {
            if !o.node.is_root() {
                nodes.insert(NodeAddr(o.node.0[1..].to_vec()));
            }
        }
    }
    Some(nodes)
}

/// Checks on all inputs up to `depth` that the attributes of A′ only process nodes
/// of a single root-to-leaf path.
pub fn string_like_check(b: &RelabelingSpec, a: &AttSpec, depth: usize) -> (bool, Vec<StringLikeViolation>) {
    let mut bad = Vec::new();
    for s in crate::trees::trees_up_to_depth(&b.input, depth) {
        let Some(nodes) = processed_nodes(b, a, &s) else { continue };
        let v: Vec<&NodeAddr> = nodes.iter().collect();
        'outer: for i in 0..v.len() {
            for j in i + 1..v.len() {
                if !v[i].is_ancestor_or_self(v[j]) && !v[j].is_ancestor_or_self(v[i]) {
                    bad.push(StringLikeViolation {
                        input: s.clone(),
                        v1: v[i].clone(),
                        v2: v[j].clone(),
                    });
                    break 'outer;
                }
            }
        }
    }
    (bad.is_empty(), bad)
}

// ------------------------------------------------------------ composition

fn first_rule<'a>(b: &'a RelabelingSpec, s: &Symbol, kids: &[Symbol]) -> Option<&'a crate::model::RelabelRule> {
    b.rule(s, kids).first()
}

/// B-state of a top-down right-hand side whose call leaves q(xi) have states g_i(q).
fn rhs_state(b: &RelabelingSpec, r: &TdRhs, leaf: &dyn Fn(&Symbol, usize) -> Option<Symbol>) -> Option<Symbol> {
    match r {
        TdRhs::Call(q, i) => leaf(q, *i),
        TdRhs::Out(s, ch) => {
            let st = ch
                .iter()
                .map(|c| rhs_state(b, c, leaf))
                .collect::<Option<Vec<_>>>()?;
            Some(first_rule(b, s, &st)?.state.clone())
        }
    }
}

/// The rhs relabeled by `b`; call leaves are kept.
fn relabel_rhs(b: &RelabelingSpec, r: &TdRhs, leaf: &dyn Fn(&Symbol, usize) -> Option<Symbol>) -> Option<(Symbol, TdRhs)> {
    match r {
        TdRhs::Call(q, i) => Some((leaf(q, *i)?, r.clone())),
        TdRhs::Out(s, ch) => {
            let mut st = Vec::new();
            let mut kids = Vec::new();
            for c in ch {
                let (p, t) = relabel_rhs(b, c, leaf)?;
                st.push(p);
                kids.push(t);
            }
            let rule = first_rule(b, s, &st)?;
            Some((rule.state.clone(), TdRhs::Out(rule.out.clone(), kids)))
        }
    }
}

/// Runs t2 from `q2` on a relabeled rhs of t1; call leaves q1(xi) become <q2',q1>(xi).
fn run_on_rhs(t2: &TdttSpec, q2: &Symbol, r: &TdRhs, new: &mut Vec<(Symbol, Symbol)>) -> Option<TdRhs> {
    match r {
        TdRhs::Call(q1, i) => {
            new.push((q2.clone(), q1.clone()));
            Some(TdRhs::Call(pair_state(q2, q1), *i))
        }
        TdRhs::Out(s, ch) => {
            let rule = t2.rhs(q2, s).first()?;
            inst(t2, rule, ch, new)
        }
    }
}

fn inst(t2: &TdttSpec, rule: &TdRhs, ch: &[TdRhs], new: &mut Vec<(Symbol, Symbol)>) -> Option<TdRhs> {
    match rule {
        TdRhs::Call(q, j) => run_on_rhs(t2, q, &ch[j - 1], new),
        TdRhs::Out(s, kids) => Some(TdRhs::Out(
            s.clone(),
            kids.iter().map(|k| inst(t2, k, ch, new)).collect::<Option<Vec<_>>>()?,
        )),
    }
}

fn pair_state(q2: &Symbol, q1: &Symbol) -> Symbol {
    sym(&format!("<{q2},{q1}>"))
}

fn split_dtr(p: &PairedSpec) -> Result<(&RelabelingSpec, &TdttSpec), ConstructionError> {
    match p {
        PairedSpec::DtR { b, t, .. } => Ok((b, t)),
        PairedSpec::LookAround(u) => Ok((&u.b, &u.l)),
        other => Err(ConstructionError::NotApplicable(format!("expected a dtR, got {}", other.kind()))),
    }
}

/// dt^R for τ2 ∘ τ1. Look-ahead states pair t1's look-ahead state with the map
/// q1 ↦ (t2's look-ahead state on t1's output from q1).
pub fn compose_dtr(first: &PairedSpec, second: &PairedSpec, name: &str) -> Result<PairedSpec, ConstructionError> {
    let (b1, t1) = split_dtr(first)?;
    let (b2, t2) = split_dtr(second)?;
    for (s, k) in t1.output.iter() {
        if b2.input.rank(s) != Some(k) {
            return Err(ConstructionError::AlphabetMismatch(format!("`{s}` produced by the first stage is not read by the second")));
        }
    }
    if !b1.is_deterministic() || !t1.is_deterministic() || !b2.is_deterministic() || !t2.is_deterministic() {
        return Err(ConstructionError::NotApplicable("composition needs deterministic stages".into()));
    }
    type CState = (Symbol, BTreeMap<Symbol, Symbol>);
    let syms: Vec<(Symbol, usize)> = b1.input.iter().map(|(s, k)| (s.clone(), k)).collect();
    let mut states: Vec<CState> = Vec::new();
    let mut index: HashMap<CState, usize> = HashMap::new();
    // (input symbol, child states) -> (state, t1 symbol)
    let mut prods: Vec<(Symbol, Vec<usize>, usize, Symbol)> = Vec::new();
    let mut done: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    loop {
        let n = states.len();
        let mut added = false;
        for (si, (s, k)) in syms.iter().enumerate() {
            for tuple in tuples(n, *k) {
                if !done.insert((si, tuple.clone())) {
                    continue;
                }
                let p1s: Vec<Symbol> = tuple.iter().map(|&i| states[i].0.clone()).collect();
                let Some(r1) = first_rule(b1, s, &p1s) else { continue };
                let mut g = BTreeMap::new();
                for q1 in &t1.states {
                    let Some(rhs) = t1.rhs(q1, &r1.out).first() else { continue };
                    let leaf = |q: &Symbol, i: usize| states[tuple[i - 1]].1.get(q).cloned();
                    if let Some(p2) = rhs_state(b2, rhs, &leaf) {
                        g.insert(q1.clone(), p2);
                    }
                }
                let st = (r1.state.clone(), g);
                let id = match index.get(&st) {
                    Some(&id) => id,
                    None => {
                        states.push(st.clone());
                        index.insert(st, states.len() - 1);
                        added = true;
                        states.len() - 1
                    }
                };
                prods.push((s.clone(), tuple, id, r1.out.clone()));
            }
        }
        if !added {
            break;
        }
    }
    let names: Vec<Symbol> = (1..=states.len()).map(|i| sym(&format!("c{i}"))).collect();
    let mut b = RelabelingSpec::new(&format!("{name}_B"), b1.input.clone(), RankedAlphabet::new());
    let mut alpha = RankedAlphabet::new();
    // annotated symbol -> (t1 symbol, child composite states)
    let mut ann: BTreeMap<Symbol, (Symbol, Vec<usize>)> = BTreeMap::new();
    for (s, tuple, id, o1) in &prods {
        let kids: Vec<Symbol> = tuple.iter().map(|&i| names[i].clone()).collect();
        let o = annotated(o1, &kids);
        if !alpha.contains(&o) {
            alpha.insert(o.clone(), tuple.len()).expect("fresh");
            ann.insert(o.clone(), (o1.clone(), tuple.clone()));
        }
        b.add_rule(s, kids, &names[*id], &o);
    }
    b.output = alpha.clone();
    b.states.extend(names.iter().cloned());
    for (i, (p1, g)) in states.iter().enumerate() {
        if b1.finals.contains(p1) && g.get(&t1.init).is_some_and(|p2| b2.finals.contains(p2)) {
            b.finals.insert(names[i].clone());
        }
    }

    let init = pair_state(&t2.init, &t1.init);
    let mut t = TdttSpec::new(&format!("{name}_T"), alpha, t2.output.clone(), init.as_str());
    let mut queue = VecDeque::from([(t2.init.clone(), t1.init.clone())]);
    let mut seen = BTreeSet::from([(t2.init.clone(), t1.init.clone())]);
    while let Some((q2, q1)) = queue.pop_front() {
        let me = pair_state(&q2, &q1);
        t.states.insert(me.clone());
        for (o, (o1, kids)) in &ann {
            let Some(rhs1) = t1.rhs(&q1, o1).first() else { continue };
            let leaf = |q: &Symbol, i: usize| states[kids[i - 1]].1.get(q).cloned();
            let Some((_, rel)) = relabel_rhs(b2, rhs1, &leaf) else { continue };
            let mut new = Vec::new();
            let Some(r) = run_on_rhs(t2, &q2, &rel, &mut new) else { continue };
            t.add_rule(&me, o, r);
            for n in new {
                if seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
    }
    Ok(PairedSpec::DtR {
        name: name.to_string(),
        b,
        t,
    })
}

// ------------------------------------------------------------ uniformization

/// Deterministic dt^R with the translation of a functional t^R: unproductive
/// (state, look-ahead state) calls are trimmed, then the first surviving rule
/// in text order is kept for each annotated symbol.
pub fn uniformize(n: &PairedSpec, name: &str) -> Result<PairedSpec, ConstructionError> {
    let (b, t) = split_dtr(n)?;
    if !b.is_deterministic() {
        return Err(ConstructionError::NotTrimmable("look-ahead relabeling is nondeterministic".into()));
    }
    // productive (q, p): q yields output on some tree with look-ahead state p
    let mut prod: BTreeSet<(Symbol, Symbol)> = BTreeSet::new();
    loop {
        let mut changed = false;
        for ((s, kids), rs) in &b.rules {
            let _ = s;
            let r = &rs[0];
            for q in &t.states {
                if prod.contains(&(q.clone(), r.state.clone())) {
                    continue;
                }
                let ok = t
                    .rhs(q, &r.out)
                    .iter()
                    .any(|rhs| rhs.calls().iter().all(|(q2, i)| prod.contains(&((*q2).clone(), kids[i - 1].clone()))));
                if ok {
                    prod.insert((q.clone(), r.state.clone()));
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut b2 = RelabelingSpec::new(&format!("{name}_B"), b.input.clone(), RankedAlphabet::new());
    let mut alpha = RankedAlphabet::new();
    let mut ann: BTreeMap<Symbol, (Symbol, Vec<Symbol>)> = BTreeMap::new();
    for ((s, kids), rs) in &b.rules {
        let r = &rs[0];
        let o = annotated(&r.out, kids);
        if !alpha.contains(&o) {
            alpha.insert(o.clone(), kids.len()).expect("fresh");
            ann.insert(o.clone(), (r.out.clone(), kids.clone()));
        }
        b2.add_rule(s, kids.clone(), &r.state, &o);
    }
    b2.output = alpha.clone();
    b2.states.extend(b.states.iter().cloned());
    b2.finals = b.finals.clone();
    let mut t2 = TdttSpec::new(&format!("{name}_T"), alpha, t.output.clone(), t.init.as_str());
    t2.states = t.states.clone();
    for q in &t.states {
        for (o, (o1, kids)) in &ann {
            let mut cands: Vec<&TdRhs> = t
                .rhs(q, o1)
                .iter()
                .filter(|rhs| rhs.calls().iter().all(|(q2, i)| prod.contains(&((*q2).clone(), kids[i - 1].clone()))))
                .collect();
            cands.sort_by_key(|r| r.to_string());
            if let Some(r) = cands.first() {
                t2.add_rule(q, o, (*r).clone());
            }
        }
    }
    Ok(PairedSpec::DtR {
        name: name.to_string(),
        b: b2,
        t: t2,
    })
}

// ------------------------------------------------------------ look-around normalizations

/// Deterministic bottom-up automaton for the range of a look-around, by subset
/// construction over the pairs (look-ahead state, top-down state).
/// Returns the automaton as a relabeling onto `<σ,ρ>` symbols where ρ names the rule used.
pub struct RangeAutomaton {
    /// subset names and whether they are final
    pub states: Vec<(Symbol, bool)>,
    /// (σ, child subset indices, target subset index, rule name)
    pub rules: Vec<(Symbol, Vec<usize>, usize, Symbol)>,
}

pub fn range_automaton(u: &LookAround) -> Result<RangeAutomaton, ConstructionError> {
    if !u.l.is_relabeling() {
        return Err(ConstructionError::NotApplicable("look-around top-down stage must be a relabeling".into()));
    }
    // nondeterministic rules over L's output: σ'' with child pairs -> pair
    type P = (Symbol, Symbol);
    let mut nrules: Vec<(Symbol, Vec<P>, P)> = Vec::new();
    for ((s, kids), rs) in &u.b.rules {
        let _ = s;
        for r in rs {
            for q in &u.l.states {
                for rhs in u.l.rhs(q, &r.out) {
                    let TdRhs::Out(o, ch) = rhs else { continue };
                    let qs: Vec<Symbol> = ch
                        .iter()
                        .map(|c| match c {
                            TdRhs::Call(q2, _) => q2.clone(),
                            TdRhs::Out(..) => unreachable!("relabeling shape"),
                        })
                        .collect();
                    let child: Vec<P> = kids.iter().cloned().zip(qs).collect();
                    nrules.push((o.clone(), child, (r.state.clone(), q.clone())));
                }
            }
        }
    }
    let outs: Vec<(Symbol, usize)> = u.l.output.iter().map(|(s, k)| (s.clone(), k)).collect();
    let mut subsets: Vec<BTreeSet<P>> = Vec::new();
    let mut index: HashMap<BTreeSet<P>, usize> = HashMap::new();
    let mut rules = Vec::new();
    let mut done: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    loop {
        let n = subsets.len();
        let mut added = false;
        for (si, (s, k)) in outs.iter().enumerate() {
            for tuple in tuples(n, *k) {
                if !done.insert((si, tuple.clone())) {
                    continue;
                }
                let target: BTreeSet<P> = nrules
                    .iter()
                    .filter(|(o, ch, _)| o == s && ch.len() == *k && ch.iter().zip(&tuple).all(|(p, &i)| subsets[i].contains(p)))
                    .map(|(_, _, t)| t.clone())
                    .collect();
                if target.is_empty() {
                    continue;
                }
                let id = match index.get(&target) {
                    Some(&id) => id,
                    None => {
                        subsets.push(target.clone());
                        index.insert(target, subsets.len() - 1);
                        added = true;
                        subsets.len() - 1
                    }
                };
                rules.push((s.clone(), tuple, id, sym(&format!("r{}", rules.len() + 1))));
            }
        }
        if !added {
            break;
        }
    }
    let states = subsets
        .iter()
        .enumerate()
        .map(|(i, set)| {
            let fin = set.iter().any(|(p, q)| u.b.finals.contains(p) && *q == u.l.init);
            (sym(&format!("s{}", i + 1)), fin)
        })
        .collect();
    Ok(RangeAutomaton { states, rules })
}

/// An equivalent att^U (U₂, A₂) with dom(A₂) ⊆ range(U₂): A₂ first checks in a
/// pre-order traversal that its input is a run of the range automaton, then
/// starts A.
pub fn normalize_domain_into_range(u: &LookAround, a: &AttSpec, name: &str) -> Result<PairedSpec, ConstructionError> {
    if crate::analysis::is_circular(a).0 {
        return Err(ConstructionError::NotApplicable("circular".into()));
    }
    let ra = range_automaton(u)?;
    let label = |s: &Symbol, r: &Symbol| sym(&format!("<{s},{r}>"));
    let ta0 = sym("<ta0>");
    let ta = sym("<ta>");
    let tb = sym("<tb>");
    let tb2 = sym("<tb'>");
    let chk = |r: &Symbol, j: usize| sym(&format!("<chk:{r}:{j}>"));

    let mut sigma2 = RankedAlphabet::new();
    for (s, kids, _, r) in &ra.rules {
        sigma2.insert(label(s, r), kids.len()).expect("fresh");
    }
    let mut a2 = AttSpec::new(&format!("{name}_A"), sigma2.clone(), a.output.clone(), ta0.as_str());
    a2.syn = a.syn.clone();
    a2.syn.extend([ta0.clone(), ta.clone()]);
    a2.inh = a.inh.clone();
    a2.inh.extend([tb.clone(), tb2.clone()]);
    for (_, kids, _, r) in &ra.rules {
        for j in 1..=kids.len() {
            a2.syn.insert(chk(r, j));
        }
    }
    for (_, lhs, r) in a.all_rules().filter(|(s, _, _)| s.is_root()) {
        a2.add_rule(&Symbol::root(), lhs.clone(), r.clone());
    }
    a2.add_rule(&Symbol::root(), Lhs::Inh(tb.clone(), 1), Rhs::Syn(a.init.clone(), 1));
    for (s, kids, target, r) in &ra.rules {
        let x = label(s, r);
        let k = kids.len();
        let fin = ra.states[*target].1;
        if let Some(rs) = a.rules.get(s) {
            for (lhs, rhss) in rs {
                for rhs in rhss {
                    a2.add_rule(&x, lhs.clone(), rhs.clone());
                }
            }
        }
        if k > 0 {
            a2.add_rule(&x, Lhs::Syn(ta.clone()), Rhs::Syn(chk(r, 1), 1));
            if fin {
                a2.add_rule(&x, Lhs::Syn(ta0.clone()), Rhs::Syn(chk(r, 1), 1));
            }
            for i in 1..k {
                a2.add_rule(&x, Lhs::Inh(tb2.clone(), i), Rhs::Syn(chk(r, i + 1), i + 1));
                a2.add_rule(&x, Lhs::Inh(tb.clone(), i), Rhs::Syn(ta.clone(), i + 1));
            }
            a2.add_rule(&x, Lhs::Inh(tb2.clone(), k), Rhs::Syn(ta.clone(), 1));
            a2.add_rule(&x, Lhs::Inh(tb.clone(), k), Rhs::Inh(tb.clone()));
        } else {
            a2.add_rule(&x, Lhs::Syn(ta.clone()), Rhs::Inh(tb.clone()));
            if fin {
                a2.add_rule(&x, Lhs::Syn(ta0.clone()), Rhs::Inh(tb.clone()));
            }
        }
        // this node may serve as the j-th child of any rule ρ' expecting our target
        for (_, kids2, _, r2) in &ra.rules {
            for (j, &p) in kids2.iter().enumerate() {
                if p == *target {
                    a2.add_rule(&x, Lhs::Syn(chk(r2, j + 1)), Rhs::Inh(tb2.clone()));
                }
            }
        }
    }

    // B': the range automaton as a relabeling onto Σ₂ (acceptance is A₂'s job)
    let mut bp = RelabelingSpec::new(&format!("{name}_R"), u.l.output.clone(), sigma2.clone());
    for (s, kids, target, r) in &ra.rules {
        let ks: Vec<Symbol> = kids.iter().map(|&i| ra.states[i].0.clone()).collect();
        bp.add_rule(s, ks, &ra.states[*target].0, &label(s, r));
    }
    bp.finals = ra.states.iter().map(|s| s.0.clone()).collect();
    bp.states.extend(bp.finals.iter().cloned());
    let second = PairedSpec::DtR {
        name: "id".into(),
        b: bp,
        t: TdttSpec::identity("id", &sigma2),
    };
    let first = PairedSpec::LookAround(u.clone());
    let PairedSpec::DtR { b, t, .. } = compose_dtr(&first, &second, &format!("{name}_L"))? else {
        unreachable!()
    };
    Ok(PairedSpec::AttU {
        name: name.to_string(),
        u: LookAround {
            name: format!("{name}_U"),
            b,
            l: t,
        },
        a: a2,
    })
}

/// Base symbol of an annotated symbol `σ_<..>` or `<σ,..>`.
pub fn strip_annotation(s: &Symbol) -> Option<Symbol> {
    let n = s.as_str();
    if let Some(i) = n.find("_<") {
        if n.ends_with('>') {
            return Some(sym(&n[..i]));
        }
    }
    if n.starts_with('<') && n.ends_with('>') {
        let inner = &n[1..n.len() - 1];
        let mut depth = 0;
        for (i, c) in inner.char_indices() {
            match c {
                '<' => depth += 1,
                '>' => depth -= 1,
                ',' if depth == 0 => return Some(sym(&inner[..i])),
                _ => {}
            }
        }
    }
    None
}

/// A dt^R over u's output alphabet that reads σ_ζ as σ.
pub fn restrict_dtr_to_relabeled(t: &PairedSpec, u: &LookAround) -> Result<PairedSpec, ConstructionError> {
    let (b, td) = split_dtr(t)?;
    let mut b2 = RelabelingSpec::new(&b.name, u.l.output.clone(), b.output.clone());
    b2.states = b.states.clone();
    b2.finals = b.finals.clone();
    for (s, k) in u.l.output.iter() {
        let base = if b.input.rank(s) == Some(k) {
            s.clone()
        } else {
            match strip_annotation(s) {
                Some(x) if b.input.rank(&x) == Some(k) => x,
                _ => return Err(ConstructionError::AlphabetMismatch(format!("no base symbol for `{s}`"))),
            }
        };
        for ((bs, kids), rs) in b.rules.range((base.clone(), Vec::new())..) {
            if *bs != base {
                break;
            }
            for r in rs {
                b2.add_rule(s, kids.clone(), &r.state, &r.out);
            }
        }
    }
    Ok(PairedSpec::DtR {
        name: t.name().to_string(),
        b: b2,
        t: td.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn a2_states() {
        let h = associate(&corpus::att("a2")).unwrap();
        assert_eq!(h.kappa, 1);
        let sets: BTreeSet<String> = h
            .states
            .iter()
            .map(|(_, st, _)| st.iter().map(|(a, x)| format!("{a}={x}")).collect::<Vec<_>>().join(" "))
            .collect();
        let want: BTreeSet<String> = [
            "a=b_e(pi) a_e=<e>(pi)",
            "a=b_d(pi) a_d=<d>(pi)",
            "a=b_d(pi)",
            "a=b_e(pi)",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        assert_eq!(sets, want);
    }

    #[test]
    fn strip() {
        assert_eq!(strip_annotation(&sym("f_<r1,r2>")), Some(sym("f")));
        assert_eq!(strip_annotation(&sym("<f,r3>")), Some(sym("f")));
        assert_eq!(strip_annotation(&sym("f")), None);
    }
}
