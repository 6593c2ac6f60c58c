//! Functionality of nondeterministic att with monadic output.

use crate::model::{AttSpec, Decl, Lhs, PairedSpec, Rhs};
use crate::semantics::{derive_step, enumerate_outputs, relabel, rhs_at, run_lookaround, Form, Occ, StepBudget};
use crate::trees::{trees_up_to_depth, NodeAddr, Symbol, Tree};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

pub use crate::equivalence::{bounded_equivalence, bounded_equivalence_over, Equivalence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctionalityError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

fn fresh(a: &AttSpec, base: &str) -> Symbol {
    let mut n = base.to_string();
    while a.syn.contains(&Symbol::new(&n)) || a.inh.contains(&Symbol::new(&n)) {
        n.push('\'');
    }
    Symbol::new(&n)
}

/// Makes the root rules deterministic: every b with several root right-hand
/// sides gets a fresh synthesized attribute that makes the choice at the root
/// node of the input instead.
pub fn normalize_root_rules(a: &AttSpec) -> AttSpec {
    let root = Symbol::root();
    let Some(rr) = a.rules.get(&root) else { return a.clone() };
    let split: Vec<(Symbol, Vec<Rhs>)> = rr
        .iter()
        .filter(|(_, v)| v.len() > 1)
        .map(|(l, v)| (l.attr().clone(), v.clone()))
        .collect();
    if split.is_empty() {
        return a.clone();
    }
    let mut out = a.clone();
    for (b, xis) in split {
        let ab = fresh(&out, &format!("root<{b}>"));
        out.syn.insert(ab.clone());
        let lhs = Lhs::Inh(b.clone(), 1);
        out.rules.get_mut(&root).expect("root rules").insert(lhs, vec![Rhs::Syn(ab.clone(), 1)]);
        for (sigma, _) in a.input.iter() {
            for xi in &xis {
                if xi.is_ground() {
                    out.add_rule(sigma, Lhs::Syn(ab.clone()), xi.clone());
                    continue;
                }
                // a(π1) in ξ is replaced by each ψ ∈ RHS(σ, a(π))
                let occ = xi.occurrences().into_iter().find_map(|o| match o {
                    Rhs::Syn(x, 1) => Some(x.clone()),
                    _ => None,
                });
                let Some(x) = occ else { continue };
                for psi in a.rhs(sigma, &Lhs::Syn(x.clone())) {
                    let zeta = xi.map_leaves(&mut |l| match l {
                        Rhs::Syn(y, 1) if *y == x => psi.clone(),
                        other => other.clone(),
                    });
                    out.add_rule(sigma, Lhs::Syn(ab.clone()), zeta);
                }
            }
        }
    }
    out
}

// ------------------------------------------------------------ occurrence graph

/// Label of a node of s^#; the empty address is the root marker.
fn label(s: &Tree, v: &NodeAddr) -> Option<Symbol> {
    match v.0.split_first() {
        None => Some(Symbol::root()),
        Some((1, rest)) => s.label_at(&NodeAddr(rest.to_vec())).ok().cloned(),
        Some(_) => None,
    }
}

#[derive(Clone, Debug)]
struct Step {
    /// node where the rule is applied, and its index among the rules of that label
    at: NodeAddr,
    rule: usize,
    form: Form,
    next: Option<Occ>,
    emits: usize,
}

struct Rules {
    by_label: BTreeMap<Symbol, Vec<(Lhs, Rhs)>>,
}

impl Rules {
    fn new(a: &AttSpec) -> Self {
        let mut by_label: BTreeMap<Symbol, Vec<(Lhs, Rhs)>> = BTreeMap::new();
        for (s, l, r) in a.all_rules() {
            by_label.entry(s.clone()).or_default().push((l.clone(), r.clone()));
        }
        Rules { by_label }
    }

    fn steps(&self, a: &AttSpec, s: &Tree, o: &Occ) -> Vec<Step> {
        let (base, lhs) = if a.is_syn(&o.attr) {
            (o.node.clone(), Lhs::Syn(o.attr.clone()))
        } else {
            let Some((p, i)) = o.node.parent() else { return Vec::new() };
            (p, Lhs::Inh(o.attr.clone(), i))
        };
        let Some(sym) = label(s, &base) else { return Vec::new() };
        let Some(rs) = self.by_label.get(&sym) else { return Vec::new() };
        rs.iter()
            .enumerate()
            .filter(|(_, (l, _))| *l == lhs)
            .map(|(k, (_, r))| {
                let form = rhs_at(r, &base);
                let next = form.occurrences().first().map(|x| (*x).clone());
                let emits = form.size() - usize::from(next.is_some());
                Step {
                    at: base.clone(),
                    rule: k,
                    form,
                    next,
                    emits,
                }
            })
            .collect()
    }
}

fn start_occ(a: &AttSpec) -> Occ {
    Occ {
        attr: a.init.clone(),
        node: NodeAddr(vec![1]),
    }
}

fn plug(f: &Form, by: &Form) -> Form {
    f.substitute(&mut |_| by.clone())
}

// ------------------------------------------------------------ productive cycles

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductiveCycle {
    pub input: Tree,
    /// a0(1) ⇒ … ⇒ trace[first] ⇒ … ⇒ trace[second]
    pub trace: Vec<Form>,
    pub revisit: Occ,
    pub first: usize,
    pub second: usize,
    /// a ground output is reachable from the revisited occurrence
    pub completes: bool,
}

/// Checks the trace step by step against the rules of `a`.
pub fn replay_cycle(a: &AttSpec, pc: &ProductiveCycle) -> bool {
    if pc.trace.first() != Some(&Form::Occ(start_occ(a))) || pc.first >= pc.second || pc.second >= pc.trace.len() {
        return false;
    }
    for w in pc.trace.windows(2) {
        if !derive_step(a, &pc.input, &w[0]).contains(&w[1]) {
            return false;
        }
    }
    let has = |f: &Form| f.occurrences().contains(&&pc.revisit);
    has(&pc.trace[pc.first]) && has(&pc.trace[pc.second]) && pc.trace[pc.first] != pc.trace[pc.second]
}

struct Graph {
    edges: BTreeMap<Occ, Vec<Step>>,
}

impl Graph {
    fn build(a: &AttSpec, rules: &Rules, s: &Tree) -> Graph {
        let mut edges: BTreeMap<Occ, Vec<Step>> = BTreeMap::new();
        let mut queue = VecDeque::from([start_occ(a)]);
        while let Some(o) = queue.pop_front() {
            if edges.contains_key(&o) {
                continue;
            }
            let st = rules.steps(a, s, &o);
            for x in &st {
                if let Some(n) = &x.next {
                    if !edges.contains_key(n) {
                        queue.push_back(n.clone());
                    }
                }
            }
            edges.insert(o, st);
        }
        Graph { edges }
    }

    /// Shortest step path from `from` to `to` (empty when equal).
    fn path(&self, from: &Occ, to: &Occ) -> Option<Vec<Step>> {
        if from == to {
            return Some(Vec::new());
        }
        let mut prev: BTreeMap<Occ, (Occ, Step)> = BTreeMap::new();
        let mut queue = VecDeque::from([from.clone()]);
        while let Some(o) = queue.pop_front() {
            for st in self.edges.get(&o).into_iter().flatten() {
                let Some(n) = &st.next else { continue };
                if n == from || prev.contains_key(n) {
                    continue;
                }
                prev.insert(n.clone(), (o.clone(), st.clone()));
                if n == to {
                    let mut out = Vec::new();
                    let mut cur = n.clone();
                    while cur != *from {
                        let (p, st) = prev[&cur].clone();
                        out.push(st);
                        cur = p;
                    }
                    out.reverse();
                    return Some(out);
                }
                queue.push_back(n.clone());
            }
        }
        None
    }

    /// Shortest path from `from` ending in a ground step.
    fn completion(&self, from: &Occ) -> Option<Vec<Step>> {
        let mut best: Option<Vec<Step>> = None;
        for (o, st) in &self.edges {
            for x in st {
                if x.next.is_none() {
                    if let Some(mut p) = self.path(from, o) {
                        p.push(x.clone());
                        if best.as_ref().is_none_or(|b| p.len() < b.len()) {
                            best = Some(p);
                        }
                    }
                }
            }
        }
        best
    }
}

fn run(start: Form, steps: &[Step]) -> Vec<Form> {
    let mut out = vec![start];
    for st in steps {
        let f = plug(out.last().expect("non-empty"), &st.form);
        out.push(f);
    }
    out
}

fn cycle_in(a: &AttSpec, rules: &Rules, s: &Tree, require_completion: bool) -> Option<ProductiveCycle> {
    let g = Graph::build(a, rules, s);
    let start = start_occ(a);
    for x in g.edges.keys().filter(|o| a.is_syn(&o.attr)) {
        for (u, st) in &g.edges {
            for e in st.iter().filter(|e| e.emits > 0) {
                let Some(w) = &e.next else { continue };
                let (Some(p1), Some(p2), Some(p3)) = (g.path(&start, x), g.path(x, u), g.path(w, x)) else {
                    continue;
                };
                let completes = g.completion(x).is_some();
                if require_completion && !completes {
                    continue;
                }
                let mut steps = p1.clone();
                steps.extend(p2);
                steps.push(e.clone());
                steps.extend(p3);
                let trace = run(Form::Occ(start.clone()), &steps);
                return Some(ProductiveCycle {
                    input: s.clone(),
                    first: p1.len(),
                    second: trace.len() - 1,
                    trace,
                    revisit: x.clone(),
                    completes,
                });
            }
        }
    }
    None
}

/// First input (canonical order, depth ≤ `depth`) with a reachable cycle through a
/// synthesized occurrence that emits output.
pub fn detect_productive_cycle(a: &AttSpec, depth: usize) -> Option<ProductiveCycle> {
    let rules = Rules::new(a);
    trees_up_to_depth(&a.input, depth)
        .into_iter()
        .find_map(|s| cycle_in(a, &rules, &s, false))
}

/// Two distinct outputs from a completing productive cycle.
fn outputs_from_cycle(a: &AttSpec, pc: &ProductiveCycle) -> Option<(Tree, Tree)> {
    let g = Graph::build(a, &Rules::new(a), &pc.input);
    let tail = g.completion(&pc.revisit)?;
    let finish = |f: &Form| run(f.clone(), &tail).last()?.to_tree();
    Some((finish(&pc.trace[pc.first])?, finish(&pc.trace[pc.second])?))
}

// ------------------------------------------------------------ annotated pair

/// Lazily generated annotated alphabet: ⟨σ,R¹,R²⟩ is named `<σ|i,j|k>` with
/// 1-based rule indices of σ in canonical order.
#[derive(Clone, Debug)]
pub struct AnnotatedPair {
    pub base: AttSpec,
    rules: BTreeMap<Symbol, Vec<(Lhs, Rhs)>>,
}

fn fmt_set(r: &BTreeSet<usize>) -> String {
    r.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn parse_set(s: &str) -> Option<BTreeSet<usize>> {
    if s.is_empty() {
        return Some(BTreeSet::new());
    }
    s.split(',').map(|x| x.parse::<usize>().ok().filter(|&i| i > 0).map(|i| i - 1)).collect()
}

/// Root rules must be deterministic first; `a` is normalized here.
pub fn build_annotated_pair(a: &AttSpec) -> AnnotatedPair {
    let base = normalize_root_rules(a);
    let rules = Rules::new(&base).by_label;
    AnnotatedPair { base, rules }
}

impl AnnotatedPair {
    pub fn rules_of(&self, sigma: &Symbol) -> &[(Lhs, Rhs)] {
        self.rules.get(sigma).map(|v| v.as_slice()).unwrap_or(&[])
    }

    fn valid(&self, sigma: &Symbol, r: &BTreeSet<usize>) -> bool {
        let rs = self.rules_of(sigma);
        let mut lhs = BTreeSet::new();
        r.iter().all(|&i| i < rs.len() && lhs.insert(&rs[i].0))
    }

    pub fn symbol(&self, sigma: &Symbol, r1: &BTreeSet<usize>, r2: &BTreeSet<usize>) -> Option<Symbol> {
        (self.valid(sigma, r1) && self.valid(sigma, r2))
            .then(|| Symbol::new(&format!("<{sigma}|{}|{}>", fmt_set(r1), fmt_set(r2))))
    }

    pub fn parse_symbol(&self, s: &Symbol) -> Option<(Symbol, BTreeSet<usize>, BTreeSet<usize>)> {
        let inner = s.as_str().strip_prefix('<')?.strip_suffix('>')?;
        let mut parts = inner.rsplitn(3, '|');
        let r2 = parse_set(parts.next()?)?;
        let r1 = parse_set(parts.next()?)?;
        let sigma = Symbol::new(parts.next()?);
        self.base.input.rank(&sigma)?;
        (self.valid(&sigma, &r1) && self.valid(&sigma, &r2)).then_some((sigma, r1, r2))
    }

    /// h: forgets the annotation.
    pub fn project(&self, s: &Tree) -> Option<Tree> {
        let (sigma, _, _) = self.parse_symbol(s.label())?;
        Some(Tree::new(
            sigma,
            s.children().iter().map(|c| self.project(c)).collect::<Option<Vec<_>>>()?,
        ))
    }

    /// Number of valid R choices for σ: one option per right-hand side or none, per left-hand side.
    pub fn choices(&self, sigma: &Symbol) -> u128 {
        let mut per: BTreeMap<&Lhs, u128> = BTreeMap::new();
        for (l, _) in self.rules_of(sigma) {
            *per.entry(l).or_insert(1) += 1;
        }
        per.values().product()
    }

    pub fn symbol_count(&self) -> u128 {
        self.base.input.iter().map(|(s, _)| self.choices(s).pow(2)).sum()
    }

    /// Every valid subset for σ, by brute force over all subsets (small σ only).
    pub fn valid_subsets(&self, sigma: &Symbol) -> Vec<BTreeSet<usize>> {
        let n = self.rules_of(sigma).len();
        (0u64..1 << n)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect::<BTreeSet<usize>>())
            .filter(|r| self.valid(sigma, r))
            .collect()
    }

    /// A_i′ restricted to the annotated symbols occurring in `s`.
    pub fn side(&self, i: usize, s: &Tree) -> AttSpec {
        let mut syms = BTreeSet::new();
        fn collect(t: &Tree, out: &mut BTreeSet<Symbol>) {
            out.insert(t.label().clone());
            t.children().iter().for_each(|c| collect(c, out));
        }
        collect(s, &mut syms);
        let mut input = crate::trees::RankedAlphabet::new();
        let mut a = AttSpec::new(&format!("{}_{i}", self.base.name), input.clone(), self.base.output.clone(), self.base.init.as_str());
        a.syn = self.base.syn.clone();
        a.inh = self.base.inh.clone();
        for sym in syms {
            let Some((sigma, r1, r2)) = self.parse_symbol(&sym) else { continue };
            let k = self.base.input.rank(&sigma).expect("checked");
            input.insert(sym.clone(), k).expect("fresh");
            let rs = self.rules_of(&sigma);
            for &j in if i == 1 { &r1 } else { &r2 } {
                a.add_rule(&sym, rs[j].0.clone(), rs[j].1.clone());
            }
        }
        for (l, r) in self.rules_of(&Symbol::root()) {
            a.add_rule(&Symbol::root(), l.clone(), r.clone());
        }
        a.input = input;
        a
    }

    /// Outputs of A₁ and A₂ on `s`; both are undefined unless both sides are.
    pub fn eval(&self, s: &Tree, budget: &StepBudget) -> (Option<Tree>, Option<Tree>) {
        let l = crate::semantics::evaluate_att(&self.side(1, s), s, budget).into_option();
        let r = crate::semantics::evaluate_att(&self.side(2, s), s, budget).into_option();
        match (l, r) {
            (Some(l), Some(r)) => (Some(l), Some(r)),
            _ => (None, None),
        }
    }

    /// ŝ labelling each node v with ⟨σ, τ₁[v], τ₂[v]⟩.
    pub fn annotate(&self, s: &Tree, t1: &BTreeMap<NodeAddr, BTreeSet<usize>>, t2: &BTreeMap<NodeAddr, BTreeSet<usize>>) -> Option<Tree> {
        fn go(p: &AnnotatedPair, s: &Tree, v: NodeAddr, t1: &BTreeMap<NodeAddr, BTreeSet<usize>>, t2: &BTreeMap<NodeAddr, BTreeSet<usize>>) -> Option<Tree> {
            let empty = BTreeSet::new();
            let sym = p.symbol(s.label(), t1.get(&v).unwrap_or(&empty), t2.get(&v).unwrap_or(&empty))?;
            let ch = s
                .children()
                .iter()
                .enumerate()
                .map(|(i, c)| go(p, c, v.child(i + 1), t1, t2))
                .collect::<Option<Vec<_>>>()?;
            Some(Tree::new(sym, ch))
        }
        go(self, s, NodeAddr(vec![1]), t1, t2)
    }
}

// ------------------------------------------------------------ cycle-free derivations

type Used = BTreeMap<NodeAddr, BTreeSet<usize>>;

/// Distinct outputs of cycle-free derivations (up to two), with the rules applied
/// per input node; false when the search was cut by `limit`.
fn cycle_free_outputs(a: &AttSpec, rules: &Rules, s: &Tree, limit: usize) -> (Vec<(Tree, Used)>, bool) {
    struct Dfs<'a> {
        a: &'a AttSpec,
        rules: &'a Rules,
        s: &'a Tree,
        found: Vec<(Tree, Used)>,
        steps: usize,
        limit: usize,
        cut: bool,
    }
    impl Dfs<'_> {
        fn go(&mut self, form: Form, o: Occ, visited: &mut Vec<Occ>, used: &mut Vec<(NodeAddr, usize)>) {
            if self.found.len() >= 2 || self.cut {
                return;
            }
            self.steps += 1;
            if self.steps > self.limit {
                self.cut = true;
                return;
            }
            for st in self.rules.steps(self.a, self.s, &o) {
                let f = plug(&form, &st.form);
                used.push((st.at.clone(), st.rule));
                match &st.next {
                    None => {
                        let t = f.to_tree().expect("ground");
                        if !self.found.iter().any(|(x, _)| *x == t) {
                            let mut m: Used = BTreeMap::new();
                            for (v, r) in used.iter() {
                                m.entry(v.clone()).or_default().insert(*r);
                            }
                            self.found.push((t, m));
                        }
                    }
                    Some(n) if !visited.contains(n) => {
                        visited.push(n.clone());
                        self.go(f, n.clone(), visited, used);
                        visited.pop();
                    }
                    Some(_) => {}
                }
                used.pop();
                if self.found.len() >= 2 || self.cut {
                    return;
                }
            }
        }
    }
    let start = start_occ(a);
    let mut d = Dfs {
        a,
        rules,
        s,
        found: Vec::new(),
        steps: 0,
        limit,
        cut: false,
    };
    d.go(Form::Occ(start.clone()), start.clone(), &mut vec![start], &mut Vec::new());
    (d.found, !d.cut)
}

// ------------------------------------------------------------ verdict

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct FunctionalityBudget {
    pub depth: usize,
    /// derivation steps explored per input tree
    pub max_paths: usize,
}

impl Default for FunctionalityBudget {
    fn default() -> Self {
        FunctionalityBudget {
            depth: 4,
            max_paths: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum FunctionalityVerdict {
    NotFunctional {
        input: Tree,
        outputs: (Tree, Tree),
        /// separating input of the annotated pair
        annotated: Option<Tree>,
        cycle: Option<ProductiveCycle>,
    },
    /// a completing productive cycle whose two outputs could not be confirmed
    ProductiveCycle { cycle: ProductiveCycle },
    FunctionalUpTo { depth: usize, checked: usize },
    /// the derivation search on this input hit its budget
    Inconclusive { input: Tree },
}

/// Checks: productive cycles with a completion, then the annotated pair on every
/// input up to the depth bound, else FunctionalUpTo.
pub fn is_functional(d: &Decl, budget: &FunctionalityBudget) -> Result<FunctionalityVerdict, FunctionalityError> {
    let (a, pre): (&AttSpec, Box<dyn Fn(&Tree) -> Option<Tree> + '_>) = match d {
        Decl::Att(a) => (a, Box::new(|s: &Tree| Some(s.clone()))),
        Decl::Pair(PairedSpec::AttR { b, a, .. }) => (a, Box::new(move |s: &Tree| relabel(b, s))),
        Decl::Pair(PairedSpec::AttU { u, a, .. }) => (a, Box::new(move |s: &Tree| run_lookaround(u, s, &StepBudget::default()))),
        _ => return Err(FunctionalityError::NotApplicable("expected att, attR or attU".into())),
    };
    if !a.output.is_monadic() {
        return Err(FunctionalityError::NotApplicable("nonmonadic".into()));
    }
    let a = normalize_root_rules(a);
    let rules = Rules::new(&a);
    let inputs: Vec<(Tree, Tree)> = trees_up_to_depth(d.input(), budget.depth)
        .into_iter()
        .filter_map(|s| pre(&s).map(|m| (s, m)))
        .collect();
    let replays = |s: &Tree, t1: &Tree, t2: &Tree| {
        let (outs, _) = enumerate_outputs(d, s, &StepBudget::default());
        outs.contains(t1) && outs.contains(t2)
    };
    for (s, m) in &inputs {
        if let Some(pc) = cycle_in(&a, &rules, m, true) {
            return Ok(match outputs_from_cycle(&a, &pc) {
                Some((t1, t2)) if t1 != t2 && replays(s, &t1, &t2) => FunctionalityVerdict::NotFunctional {
                    input: s.clone(),
                    outputs: (t1, t2),
                    annotated: None,
                    cycle: Some(pc),
                },
                _ => FunctionalityVerdict::ProductiveCycle { cycle: pc },
            });
        }
    }
    let pair = AnnotatedPair {
        rules: rules.by_label.clone(),
        base: a.clone(),
    };
    for (s, m) in &inputs {
        let (found, complete) = cycle_free_outputs(&a, &rules, m, budget.max_paths);
        if found.len() >= 2 {
            let (t1, u1) = &found[0];
            let (t2, u2) = &found[1];
            let annotated = pair.annotate(m, u1, u2);
            return Ok(FunctionalityVerdict::NotFunctional {
                input: s.clone(),
                outputs: (t1.clone(), t2.clone()),
                annotated,
                cycle: None,
            });
        }
        if !complete {
            return Ok(FunctionalityVerdict::Inconclusive { input: s.clone() });
        }
    }
    Ok(FunctionalityVerdict::FunctionalUpTo {
        depth: budget.depth,
        checked: inputs.len(),
    })
}

/// Replays a NotFunctional verdict: both outputs are produced on the input, and
/// the annotated input (if any) separates the pair and projects back.
pub fn replay_not_functional(d: &Decl, v: &FunctionalityVerdict) -> bool {
    let FunctionalityVerdict::NotFunctional { input, outputs, annotated, cycle } = v else {
        return false;
    };
    let (outs, _) = enumerate_outputs(d, input, &StepBudget::default());
    if outputs.0 == outputs.1 || !outs.contains(&outputs.0) || !outs.contains(&outputs.1) {
        return false;
    }
    let base = match d {
        Decl::Att(a) => a,
        Decl::Pair(PairedSpec::AttR { a, .. }) | Decl::Pair(PairedSpec::AttU { a, .. }) => a,
        _ => return false,
    };
    let pair = build_annotated_pair(base);
    if let Some(sh) = annotated {
        let (l, r) = pair.eval(sh, &StepBudget::default());
        if l.as_ref() != Some(&outputs.0) || r.as_ref() != Some(&outputs.1) {
            return false;
        }
    }
    cycle.as_ref().is_none_or(|c| replay_cycle(&pair.base, c))
}
