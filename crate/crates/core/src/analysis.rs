//! Static analyses for deterministic att with monadic output.
//!
//! Everything is driven by finite summaries of subtrees (where each synthesized
//! attribute's thread ends, plus whether it emits anything) and of contexts
//! (what the surrounding tree does with each inherited attribute at the hole).

use crate::model::{AttSpec, Lhs, Rhs};
use crate::semantics::{CompiledAtt, Tail, ThreadResult};
use crate::trees::{NodeAddr, Prefix, Symbol, Tree};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("analysis not applicable: {0}")]
    NotApplicable(String),
}

/// Pairs (b, a) in I×S.
pub type PairSet = BTreeSet<(Symbol, Symbol)>;

fn pairs_json(p: &PairSet) -> Vec<[String; 2]> {
    p.iter().map(|(b, a)| [b.to_string(), a.to_string()]).collect()
}

pub fn render_pairs(p: &PairSet) -> String {
    let v: Vec<String> = p.iter().map(|(b, a)| format!("({b},{a})")).collect();
    format!("{{{}}}", v.join(","))
}

// ------------------------------------------------------------ is-dependencies

/// Local occurrence inside one rule set: a(π), b(π), a(πi), b(πi).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum LocalOcc {
    Syn(usize, usize),
    Inh(usize, usize),
}

struct AttrIx {
    syn: Vec<Symbol>,
    inh: Vec<Symbol>,
    syn_ix: HashMap<Symbol, usize>,
    inh_ix: HashMap<Symbol, usize>,
}

impl AttrIx {
    fn new(a: &AttSpec) -> Self {
        let syn: Vec<Symbol> = a.syn.iter().cloned().collect();
        let inh: Vec<Symbol> = a.inh.iter().cloned().collect();
        let syn_ix = syn.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let inh_ix = inh.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        AttrIx { syn, inh, syn_ix, inh_ix }
    }
}

/// Dependency edges of the rules of one symbol: lhs occurrence -> rhs occurrences.
fn local_edges(a: &AttSpec, ix: &AttrIx, sym: &Symbol) -> Vec<(LocalOcc, LocalOcc)> {
    let mut out = Vec::new();
    if let Some(rs) = a.rules.get(sym) {
        for (lhs, rhss) in rs {
            let from = match lhs {
                Lhs::Syn(x) => LocalOcc::Syn(ix.syn_ix[x], 0),
                Lhs::Inh(x, i) => LocalOcc::Inh(ix.inh_ix[x], *i),
            };
            for r in rhss {
                for o in r.occurrences() {
                    let to = match o {
                        Rhs::Syn(x, i) => LocalOcc::Syn(ix.syn_ix[x], *i),
                        Rhs::Inh(x) => LocalOcc::Inh(ix.inh_ix[x], 0),
                        Rhs::Out(..) => unreachable!(),
                    };
                    out.push((from, to));
                }
            }
        }
    }
    out
}

/// ISD of σ(s1..sk) from the ISDs of the children (pairs as (inh idx, syn idx)).
fn combine_isd(
    edges: &[(LocalOcc, LocalOcc)],
    kids: &[&BTreeSet<(usize, usize)>],
    nsyn: usize,
) -> BTreeSet<(usize, usize)> {
    let mut adj: HashMap<LocalOcc, Vec<LocalOcc>> = HashMap::new();
    for (f, t) in edges {
        adj.entry(*f).or_default().push(*t);
    }
    for (j, isd) in kids.iter().enumerate() {
        for &(b, a) in isd.iter() {
            adj.entry(LocalOcc::Syn(a, j + 1)).or_default().push(LocalOcc::Inh(b, j + 1));
        }
    }
    let mut out = BTreeSet::new();
    for a in 0..nsyn {
        let start = LocalOcc::Syn(a, 0);
        let mut seen = HashSet::from([start]);
        let mut stack = vec![start];
        while let Some(o) = stack.pop() {
            if let LocalOcc::Inh(b, 0) = o {
                out.insert((b, a));
            }
            for n in adj.get(&o).into_iter().flatten() {
                if seen.insert(*n) {
                    stack.push(*n);
                }
            }
        }
    }
    out
}

fn to_pairs(ix: &AttrIx, s: &BTreeSet<(usize, usize)>) -> PairSet {
    s.iter().map(|&(b, a)| (ix.inh[b].clone(), ix.syn[a].clone())).collect()
}

/// ISD_A(s): pairs (b,a) such that b(ε) is reachable from a(ε) over s.
pub fn compute_isd(a: &AttSpec, s: &Tree) -> PairSet {
    let ix = AttrIx::new(a);
    fn go(a: &AttSpec, ix: &AttrIx, s: &Tree) -> BTreeSet<(usize, usize)> {
        let kids: Vec<BTreeSet<(usize, usize)>> = s.children().iter().map(|c| go(a, ix, c)).collect();
        let refs: Vec<&BTreeSet<(usize, usize)>> = kids.iter().collect();
        combine_isd(&local_edges(a, ix, s.label()), &refs, ix.syn.len())
    }
    to_pairs(&ix, &go(a, &ix, s))
}

/// Every realizable ISD with a smallest tree realizing it.
pub fn all_isds_with_reps(a: &AttSpec) -> Vec<(PairSet, Tree)> {
    let ix = AttrIx::new(a);
    let syms: Vec<(Symbol, usize)> = a.input.iter().map(|(s, k)| (s.clone(), k)).collect();
    let edges: HashMap<Symbol, Vec<(LocalOcc, LocalOcc)>> =
        syms.iter().map(|(s, _)| (s.clone(), local_edges(a, &ix, s))).collect();
    let mut found: Vec<BTreeSet<(usize, usize)>> = Vec::new();
    let mut index: HashMap<BTreeSet<(usize, usize)>, usize> = HashMap::new();
    let mut prods: Vec<(Symbol, Vec<usize>, usize)> = Vec::new();
    let mut done: HashSet<(Symbol, Vec<usize>)> = HashSet::new();
    loop {
        let n = found.len();
        let mut added = false;
        for (sym, k) in &syms {
            for tuple in tuples(n, *k) {
                if !done.insert((sym.clone(), tuple.clone())) {
                    continue;
                }
                let refs: Vec<&BTreeSet<(usize, usize)>> = tuple.iter().map(|&i| &found[i]).collect();
                let isd = combine_isd(&edges[sym], &refs, ix.syn.len());
                let id = *index.entry(isd.clone()).or_insert_with(|| {
                    found.push(isd);
                    added = true;
                    found.len() - 1
                });
                prods.push((sym.clone(), tuple, id));
            }
        }
        if !added {
            break;
        }
    }
    let reps = relax_reps(found.len(), &prods);
    found
        .iter()
        .enumerate()
        .map(|(i, s)| (to_pairs(&ix, s), reps[i].clone().expect("realized")))
        .collect()
}

pub fn all_isds(a: &AttSpec) -> BTreeSet<PairSet> {
    all_isds_with_reps(a).into_iter().map(|x| x.0).collect()
}

/// All k-tuples over 0..n in lexicographic order.
fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for i in 0..n {
                let mut t2 = t.clone();
                t2.push(i);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

fn tree_key(t: &Tree) -> (usize, String) {
    (t.size(), t.to_string())
}

/// Smallest (size, text) tree per summary id, given productions (symbol, kids, result).
fn relax_reps(n: usize, prods: &[(Symbol, Vec<usize>, usize)]) -> Vec<Option<Tree>> {
    let mut reps: Vec<Option<(usize, String, Tree)>> = vec![None; n];
    loop {
        let mut changed = false;
        for (sym, kids, res) in prods {
            let Some(ch) = kids
                .iter()
                .map(|&k| reps[k].as_ref().map(|x| x.2.clone()))
                .collect::<Option<Vec<_>>>()
            else {
                continue;
            };
            let t = Tree::new(sym.clone(), ch);
            let (sz, txt) = tree_key(&t);
            let better = match &reps[*res] {
                None => true,
                Some((s2, t2, _)) => (sz, &txt) < (*s2, t2),
            };
            if better {
                reps[*res] = Some((sz, txt, t));
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    reps.into_iter().map(|r| r.map(|x| x.2)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CircularityWitness {
    pub symbol: Symbol,
    pub isds: Vec<String>,
    pub cycle: Vec<String>,
}

/// Circularity test over all realizable ISD tuples, including the root marker.
pub fn is_circular(a: &AttSpec) -> (bool, Option<CircularityWitness>) {
    let ix = AttrIx::new(a);
    let isds = all_isds(a);
    let isd_idx: Vec<BTreeSet<(usize, usize)>> = isds
        .iter()
        .map(|p| p.iter().map(|(b, x)| (ix.inh_ix[b], ix.syn_ix[x])).collect())
        .collect();
    let mut syms: Vec<(Symbol, usize)> = a.input.iter().map(|(s, k)| (s.clone(), k)).collect();
    syms.push((Symbol::root(), 1));
    for (sym, k) in &syms {
        let edges = local_edges(a, &ix, sym);
        for tuple in tuples(isd_idx.len(), *k) {
            // dependency graph: edge x -> y means y depends on x
            let mut adj: BTreeMap<LocalOcc, Vec<LocalOcc>> = BTreeMap::new();
            for (lhs, occ) in &edges {
                adj.entry(*occ).or_default().push(*lhs);
            }
            for (j, &t) in tuple.iter().enumerate() {
                for &(b, x) in &isd_idx[t] {
                    adj.entry(LocalOcc::Inh(b, j + 1)).or_default().push(LocalOcc::Syn(x, j + 1));
                }
            }
            if let Some(cycle) = find_cycle(&adj) {
                let name = |o: &LocalOcc| match o {
                    LocalOcc::Syn(x, i) => format!("{}({i})", ix.syn[*x]),
                    LocalOcc::Inh(x, i) => format!("{}({i})", ix.inh[*x]),
                };
                return (
                    true,
                    Some(CircularityWitness {
                        symbol: sym.clone(),
                        isds: tuple
                            .iter()
                            .map(|&t| render_pairs(&to_pairs(&ix, &isd_idx[t])))
                            .collect(),
                        cycle: cycle.iter().map(name).collect(),
                    }),
                );
            }
        }
    }
    (false, None)
}

fn find_cycle<N: Copy + Ord>(adj: &BTreeMap<N, Vec<N>>) -> Option<Vec<N>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<N, u8> = BTreeMap::new();
    for &start in adj.keys() {
        if state.get(&start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack: Vec<(N, usize)> = vec![(start, 0)];
        let mut path: Vec<N> = vec![start];
        state.insert(start, 1);
        while let Some((n, i)) = stack.pop() {
            let succ = adj.get(&n).map(|v| v.as_slice()).unwrap_or(&[]);
            if i < succ.len() {
                stack.push((n, i + 1));
                let m = succ[i];
                match state.get(&m).copied().unwrap_or(0) {
                    0 => {
                        state.insert(m, 1);
                        stack.push((m, 0));
                        path.push(m);
                    }
                    1 => {
                        let pos = path.iter().position(|x| *x == m).expect("on path");
                        let mut c = path[pos..].to_vec();
                        c.push(m);
                        return Some(c);
                    }
                    _ => {}
                }
            } else {
                state.insert(n, 2);
                path.pop();
            }
        }
    }
    None
}

// ------------------------------------------------------------ tail maps

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TailEntry {
    /// nf is w·b(ε)
    Inh { b: Symbol, out: Vec<Symbol> },
    /// nf is ground
    Ground { out: Vec<Symbol> },
    Undefined,
}

pub type TailMap = BTreeMap<Symbol, TailEntry>;

fn entry_of(r: ThreadResult) -> TailEntry {
    match r.tail {
        Tail::Ground(_) => TailEntry::Ground { out: r.out },
        Tail::Stuck { attr, node } if node.is_root() => TailEntry::Inh { b: attr, out: r.out },
        _ => TailEntry::Undefined,
    }
}

/// Tail-map of `s` by direct evaluation of nf(⇒_{A,s}, a(ε)) for every a ∈ S.
pub fn tail_map(a: &AttSpec, s: &Tree) -> TailMap {
    let c = CompiledAtt::new(a);
    tail_map_compiled(&c, s)
}

pub fn tail_map_compiled(c: &CompiledAtt, s: &Tree) -> TailMap {
    let host = c.host(s, false);
    c.spec
        .syn
        .iter()
        .map(|x| {
            let id = c.attr_id(x).expect("syn attr");
            let r = c.thread(&host, id, 0, 1_000_000);
            let e = match r.tail {
                Tail::Stuck { ref attr, .. } if c.spec.is_syn(attr) => TailEntry::Undefined,
                _ => entry_of(r),
            };
            (x.clone(), e)
        })
        .collect()
}

pub fn isd_from_tail_map(tm: &TailMap) -> PairSet {
    tm.iter()
        .filter_map(|(a, e)| match e {
            TailEntry::Inh { b, .. } => Some((b.clone(), a.clone())),
            _ => None,
        })
        .collect()
}

// ------------------------------------------------------------ summary engine

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum T {
    Inh(u16),
    Ground,
    Undef,
}

#[derive(Clone, Debug)]
enum Leaf {
    Ground,
    Syn(usize, usize),
    Inh(usize),
}

#[derive(Clone, Debug)]
struct MRule {
    out: usize,
    leaf: Leaf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum C {
    Call(u16),
    Ok,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Ctx {
    chi: Vec<C>,
    entry: C,
}

enum Exit {
    Inh(usize),
    Hole(usize),
    Ground,
    Fail,
}

struct Walk {
    visits: Vec<(usize, usize)>,
    local: usize,
    exit: Exit,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Refined {
    tail: Vec<T>,
    pos: Vec<bool>,
}

#[derive(Clone, Debug)]
struct Prod {
    sym: usize,
    kids: Vec<usize>,
    res: usize,
}

#[derive(Clone, Debug)]
struct Edge {
    from: (usize, usize),
    to: (usize, usize),
    weight: usize,
    prod: usize,
    hole: usize,
}

/// Precomputed summaries for a deterministic att with monadic output.
pub struct Analyzer {
    pub att: AttSpec,
    ix: AttrIx,
    syms: Vec<(Symbol, usize)>,
    /// syn_rules[sym][a], inh_rules[sym][(b, i)]; the root marker is index syms.len()
    syn_rules: Vec<Vec<Option<MRule>>>,
    inh_rules: Vec<HashMap<(usize, usize), MRule>>,
    sums: Vec<Refined>,
    prods: Vec<Prod>,
    reps: Vec<Tree>,
    plain: Vec<Vec<T>>,
    plain_of: Vec<usize>,
    plain_reps: Vec<Tree>,
    ctxs: Vec<Ctx>,
    ctx_reps: Vec<Prefix>,
    /// (prod, a) -> walk data for successful threads
    walks: HashMap<(usize, usize), (usize, Vec<(usize, usize)>)>,
    edges: Vec<Edge>,
    compiled: CompiledAtt,
}

fn rule_of(r: &Rhs, ix: &AttrIx) -> Option<MRule> {
    let mut out = 0;
    let mut cur = r;
    loop {
        match cur {
            Rhs::Out(_, ch) if ch.is_empty() => {
                return Some(MRule {
                    out: out + 1,
                    leaf: Leaf::Ground,
                })
            }
            Rhs::Out(_, ch) if ch.len() == 1 => {
                out += 1;
                cur = &ch[0];
            }
            Rhs::Out(..) => return None,
            Rhs::Syn(x, i) => {
                return Some(MRule {
                    out,
                    leaf: Leaf::Syn(ix.syn_ix[x], *i),
                })
            }
            Rhs::Inh(x) => {
                return Some(MRule {
                    out,
                    leaf: Leaf::Inh(ix.inh_ix[x]),
                })
            }
        }
    }
}

impl Analyzer {
    /// Fails unless the att is deterministic, has monadic output and is noncircular.
    pub fn new(a: &AttSpec) -> Result<Self, AnalysisError> {
        if !a.is_deterministic() {
            return Err(AnalysisError::NotApplicable("nondeterministic".into()));
        }
        if !a.output.is_monadic() {
            return Err(AnalysisError::NotApplicable("nonmonadic".into()));
        }
        if is_circular(a).0 {
            return Err(AnalysisError::NotApplicable("circular".into()));
        }
        let ix = AttrIx::new(a);
        let syms: Vec<(Symbol, usize)> = a.input.iter().map(|(s, k)| (s.clone(), k)).collect();
        let mut syn_rules = Vec::new();
        let mut inh_rules = Vec::new();
        for sym in syms.iter().map(|x| &x.0).chain(std::iter::once(&Symbol::root())) {
            let mut sr = vec![None; ix.syn.len()];
            let mut ir = HashMap::new();
            if let Some(rs) = a.rules.get(sym) {
                for (lhs, rhss) in rs {
                    let Some(r) = rhss.first().and_then(|r| rule_of(r, &ix)) else { continue };
                    match lhs {
                        Lhs::Syn(x) => sr[ix.syn_ix[x]] = Some(r),
                        Lhs::Inh(x, i) => {
                            ir.insert((ix.inh_ix[x], *i), r);
                        }
                    }
                }
            }
            syn_rules.push(sr);
            inh_rules.push(ir);
        }
        let mut an = Analyzer {
            att: a.clone(),
            ix,
            syms,
            syn_rules,
            inh_rules,
            sums: Vec::new(),
            prods: Vec::new(),
            reps: Vec::new(),
            plain: Vec::new(),
            plain_of: Vec::new(),
            plain_reps: Vec::new(),
            ctxs: Vec::new(),
            ctx_reps: Vec::new(),
            walks: HashMap::new(),
            edges: Vec::new(),
            compiled: CompiledAtt::new(a),
        };
        an.build_summaries();
        an.build_contexts();
        an.build_edges();
        Ok(an)
    }

    fn root_ix(&self) -> usize {
        self.syms.len()
    }

    /// Follows the thread inside one rule set. `kids[j]` are child tails (ignored for the hole).
    fn walk(&self, sym: usize, kids: &[&[T]], hole: Option<usize>, parent: Option<&Ctx>, start: LocalOcc) -> Walk {
        let mut w = Walk {
            visits: Vec::new(),
            local: 0,
            exit: Exit::Fail,
        };
        let mut cur = start;
        let mut seen: Vec<LocalOcc> = Vec::new();
        loop {
            if seen.contains(&cur) {
                w.exit = Exit::Fail;
                return w;
            }
            seen.push(cur);
            let rule = match cur {
                LocalOcc::Syn(a, _) => self.syn_rules[sym][a].as_ref(),
                LocalOcc::Inh(b, i) => self.inh_rules[sym].get(&(b, i)),
            };
            let Some(r) = rule else {
                w.exit = Exit::Fail;
                return w;
            };
            w.local += r.out;
            match r.leaf {
                Leaf::Ground => {
                    w.exit = Exit::Ground;
                    return w;
                }
                Leaf::Syn(a2, j) => {
                    if Some(j) == hole {
                        w.exit = Exit::Hole(a2);
                        return w;
                    }
                    w.visits.push((j, a2));
                    match kids[j - 1][a2] {
                        T::Inh(b2) => cur = LocalOcc::Inh(b2 as usize, j),
                        T::Ground => {
                            w.exit = Exit::Ground;
                            return w;
                        }
                        T::Undef => {
                            w.exit = Exit::Fail;
                            return w;
                        }
                    }
                }
                Leaf::Inh(b2) => match parent {
                    Some(ctx) => match ctx.chi[b2] {
                        C::Call(a3) => cur = LocalOcc::Syn(a3 as usize, 0),
                        C::Ok => {
                            w.exit = Exit::Ground;
                            return w;
                        }
                        C::Fail => {
                            w.exit = Exit::Fail;
                            return w;
                        }
                    },
                    None if sym == self.root_ix() => {
                        w.exit = Exit::Fail;
                        return w;
                    }
                    None => {
                        w.exit = Exit::Inh(b2);
                        return w;
                    }
                },
            }
        }
    }

    fn summarize(&self, sym: usize, kids: &[usize]) -> Refined {
        let tails: Vec<&[T]> = kids.iter().map(|&k| self.sums[k].tail.as_slice()).collect();
        let mut r = Refined {
            tail: Vec::new(),
            pos: Vec::new(),
        };
        for a in 0..self.ix.syn.len() {
            let w = self.walk(sym, &tails, None, None, LocalOcc::Syn(a, 0));
            let t = match w.exit {
                Exit::Inh(b) => T::Inh(b as u16),
                Exit::Ground => T::Ground,
                _ => T::Undef,
            };
            let pos = w.local > 0 || w.visits.iter().any(|&(j, a2)| self.sums[kids[j - 1]].pos[a2]);
            r.tail.push(t);
            r.pos.push(pos);
        }
        r
    }

    fn build_summaries(&mut self) {
        let mut index: HashMap<Refined, usize> = HashMap::new();
        let mut done: HashSet<(usize, Vec<usize>)> = HashSet::new();
        loop {
            let n = self.sums.len();
            let mut added = false;
            for si in 0..self.syms.len() {
                let k = self.syms[si].1;
                for tuple in tuples(n, k) {
                    if !done.insert((si, tuple.clone())) {
                        continue;
                    }
                    let r = self.summarize(si, &tuple);
                    let id = match index.get(&r) {
                        Some(&id) => id,
                        None => {
                            self.sums.push(r.clone());
                            index.insert(r, self.sums.len() - 1);
                            added = true;
                            self.sums.len() - 1
                        }
                    };
                    self.prods.push(Prod {
                        sym: si,
                        kids: tuple,
                        res: id,
                    });
                }
            }
            if !added {
                break;
            }
        }
        let named: Vec<(Symbol, Vec<usize>, usize)> = self
            .prods
            .iter()
            .map(|p| (self.syms[p.sym].0.clone(), p.kids.clone(), p.res))
            .collect();
        self.reps = relax_reps(self.sums.len(), &named)
            .into_iter()
            .map(|r| r.expect("realized"))
            .collect();
        let mut pindex: HashMap<Vec<T>, usize> = HashMap::new();
        for (i, s) in self.sums.iter().enumerate() {
            let id = *pindex.entry(s.tail.clone()).or_insert_with(|| {
                self.plain.push(s.tail.clone());
                self.plain_reps.push(self.reps[i].clone());
                self.plain.len() - 1
            });
            if tree_key(&self.reps[i]) < tree_key(&self.plain_reps[id]) {
                self.plain_reps[id] = self.reps[i].clone();
            }
            self.plain_of.push(id);
        }
    }

    fn exit_to_c(e: Exit) -> C {
        match e {
            Exit::Hole(a) => C::Call(a as u16),
            Exit::Ground => C::Ok,
            _ => C::Fail,
        }
    }

    fn child_ctx(&self, parent: &Ctx, sym: usize, hole: usize, tails: &[&[T]]) -> Ctx {
        let chi = (0..self.ix.inh.len())
            .map(|b| Self::exit_to_c(self.walk(sym, tails, Some(hole), Some(parent), LocalOcc::Inh(b, hole)).exit))
            .collect();
        let entry = match parent.entry {
            C::Call(a) => Self::exit_to_c(self.walk(sym, tails, Some(hole), Some(parent), LocalOcc::Syn(a as usize, 0)).exit),
            other => other,
        };
        Ctx { chi, entry }
    }

    fn build_contexts(&mut self) {
        let root = self.root_ix();
        let empty: &[T] = &[];
        let chi = (0..self.ix.inh.len())
            .map(|b| Self::exit_to_c(self.walk(root, &[empty], Some(1), None, LocalOcc::Inh(b, 1)).exit))
            .collect();
        let a0 = self.ix.syn_ix[&self.att.init];
        let root_ctx = Ctx {
            chi,
            entry: C::Call(a0 as u16),
        };
        let mut index: HashMap<Ctx, usize> = HashMap::new();
        index.insert(root_ctx.clone(), 0);
        self.ctxs.push(root_ctx);
        self.ctx_reps.push(Prefix::Hole);
        let mut queue = VecDeque::from([0usize]);
        let np = self.plain.len();
        while let Some(ci) = queue.pop_front() {
            for si in 0..self.syms.len() {
                let k = self.syms[si].1;
                for hole in 1..=k {
                    for tuple in tuples(np, k - 1) {
                        let mut tails: Vec<&[T]> = Vec::with_capacity(k);
                        let mut it = tuple.iter();
                        for j in 1..=k {
                            if j == hole {
                                tails.push(empty);
                            } else {
                                tails.push(&self.plain[*it.next().unwrap()]);
                            }
                        }
                        let x = self.child_ctx(&self.ctxs[ci].clone(), si, hole, &tails);
                        if index.contains_key(&x) {
                            continue;
                        }
                        let mut it = tuple.iter();
                        let kids: Vec<Prefix> = (1..=k)
                            .map(|j| {
                                if j == hole {
                                    Prefix::Hole
                                } else {
                                    Prefix::from_tree(&self.plain_reps[*it.next().unwrap()])
                                }
                            })
                            .collect();
                        let rep = plug_prefix(&self.ctx_reps[ci], &Prefix::Node(self.syms[si].0.clone(), kids));
                        index.insert(x.clone(), self.ctxs.len());
                        self.ctxs.push(x);
                        self.ctx_reps.push(rep);
                        queue.push_back(self.ctxs.len() - 1);
                    }
                }
            }
        }
    }

    fn build_edges(&mut self) {
        for (pi, p) in self.prods.iter().enumerate() {
            let tails: Vec<&[T]> = p.kids.iter().map(|&k| self.sums[k].tail.as_slice()).collect();
            for a in 0..self.ix.syn.len() {
                if self.sums[p.res].tail[a] == T::Undef {
                    continue;
                }
                let w = self.walk(p.sym, &tails, None, None, LocalOcc::Syn(a, 0));
                let pos: Vec<bool> = w.visits.iter().map(|&(j, a2)| self.sums[p.kids[j - 1]].pos[a2]).collect();
                let total_pos = pos.iter().filter(|x| **x).count();
                for (m, &(j, a2)) in w.visits.iter().enumerate() {
                    let weight = w.local + total_pos - pos[m] as usize;
                    self.edges.push(Edge {
                        from: (p.res, a),
                        to: (p.kids[j - 1], a2),
                        weight,
                        prod: pi,
                        hole: j,
                    });
                }
                self.walks.insert((pi, a), (w.local, w.visits));
            }
        }
    }

    /// ψ for a context and a plain subtree summary; `None` when the input is outside dom(A).
    fn psi(&self, ctx: &Ctx, tail: &[T]) -> Option<BTreeSet<(usize, usize)>> {
        let mut called: Vec<usize> = Vec::new();
        let mut cur = ctx.entry;
        loop {
            match cur {
                C::Ok => break,
                C::Fail => return None,
                C::Call(a) => {
                    let a = a as usize;
                    if called.contains(&a) {
                        return None;
                    }
                    called.push(a);
                    match tail[a] {
                        T::Inh(b) => cur = ctx.chi[b as usize],
                        T::Ground => break,
                        T::Undef => return None,
                    }
                }
            }
        }
        Some(
            called
                .into_iter()
                .filter_map(|a| match tail[a] {
                    T::Inh(b) => Some((b as usize, a)),
                    _ => None,
                })
                .collect(),
        )
    }

    fn named(&self, p: &BTreeSet<(usize, usize)>) -> PairSet {
        to_pairs(&self.ix, p)
    }

    fn indexed(&self, p: &PairSet) -> Option<BTreeSet<(usize, usize)>> {
        p.iter()
            .map(|(b, a)| Some((*self.ix.inh_ix.get(b)?, *self.ix.syn_ix.get(a)?)))
            .collect()
    }

    /// Every visiting pair set realized at some (s, v) with s ∈ dom(A).
    pub fn visiting_pair_sets(&self) -> Vec<VisitingPairSet> {
        let mut out: BTreeMap<PairSet, VisitingPairSet> = BTreeMap::new();
        for (ci, ctx) in self.ctxs.iter().enumerate() {
            for (pi, tail) in self.plain.iter().enumerate() {
                let Some(p) = self.psi(ctx, tail) else { continue };
                let pairs = self.named(&p);
                let s = plug(&self.ctx_reps[ci], &self.plain_reps[pi]);
                let v = hole_addr(&self.ctx_reps[ci]);
                let e = out.entry(pairs.clone()).or_insert_with(|| VisitingPairSet {
                    pairs,
                    witness_input: s.clone(),
                    witness_node: v.clone(),
                    realizations: 0,
                });
                e.realizations += 1;
                if tree_key(&s) < tree_key(&e.witness_input) {
                    e.witness_input = s;
                    e.witness_node = v;
                }
            }
        }
        out.into_values().collect()
    }

    fn targets(&self, p: &BTreeSet<(usize, usize)>) -> Vec<(usize, usize)> {
        let mut t = Vec::new();
        for (r, s) in self.sums.iter().enumerate() {
            if p.iter().all(|&(b, a)| s.tail[a] == T::Inh(b as u16)) {
                for &(_, a) in p {
                    t.push((r, a));
                }
            }
        }
        t
    }

    /// Boundedness of the variation of Ω_ψ, with κ_ψ or a validated pump witness.
    pub fn variation(&self, psi: &PairSet) -> Result<VariationVerdict, AnalysisError> {
        let p = self
            .indexed(psi)
            .ok_or_else(|| AnalysisError::NotApplicable("unknown attribute in pair set".into()))?;
        if p.is_empty() {
            return Ok(VariationVerdict {
                psi: psi.clone(),
                bounded: true,
                kappa: Some(0),
                pump: None,
            });
        }
        let targets = self.targets(&p);
        let mut adj: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (ei, e) in self.edges.iter().enumerate() {
            adj.entry(e.from).or_default().push(ei);
        }
        // reachable nodes, with the edge that discovered each
        let mut parent: HashMap<(usize, usize), Option<usize>> = HashMap::new();
        let mut queue = VecDeque::new();
        for t in &targets {
            if parent.insert(*t, None).is_none() {
                queue.push_back(*t);
            }
        }
        while let Some(n) = queue.pop_front() {
            for &ei in adj.get(&n).into_iter().flatten() {
                let m = self.edges[ei].to;
                if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(m) {
                    v.insert(Some(ei));
                    queue.push_back(m);
                }
            }
        }
        let nodes: Vec<(usize, usize)> = {
            let mut v: Vec<_> = parent.keys().copied().collect();
            v.sort();
            v
        };
        let comp = scc(&nodes, |n| {
            adj.get(n)
                .into_iter()
                .flatten()
                .map(|&ei| self.edges[ei].to)
                .collect::<Vec<_>>()
        });
        let positive = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.weight > 0 && parent.contains_key(&e.from) && comp.get(&e.from) == comp.get(&e.to))
            .map(|(i, _)| i)
            .next();
        if let Some(ei) = positive {
            let pump = self.pump_witness(ei, &parent, &adj, &comp);
            return Ok(VariationVerdict {
                psi: psi.clone(),
                bounded: false,
                kappa: None,
                pump: Some(pump),
            });
        }
        // longest outputs over the reachable (acyclic up to zero-weight cycles) system
        let reach: HashSet<(usize, usize)> = nodes.iter().copied().collect();
        let mut len: HashMap<(usize, usize), usize> = HashMap::new();
        for _round in 0..100_000 {
            let mut changed = false;
            for (pi, p) in self.prods.iter().enumerate() {
                for a in 0..self.ix.syn.len() {
                    if !reach.contains(&(p.res, a)) {
                        continue;
                    }
                    let Some((local, visits)) = self.walks.get(&(pi, a)) else { continue };
                    let mut total = *local;
                    let mut ok = true;
                    for &(j, a2) in visits {
                        match len.get(&(p.kids[j - 1], a2)) {
                            Some(l) => total += l,
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok && len.get(&(p.res, a)).is_none_or(|l| *l < total) {
                        len.insert((p.res, a), total);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let kappa = targets.iter().filter_map(|t| len.get(t)).max().map(|m| m + 1).unwrap_or(0);
        Ok(VariationVerdict {
            psi: psi.clone(),
            bounded: true,
            kappa: Some(kappa),
            pump: None,
        })
    }

    fn edge_ctx(&self, ei: usize) -> Prefix {
        let e = &self.edges[ei];
        let p = &self.prods[e.prod];
        Prefix::Node(
            self.syms[p.sym].0.clone(),
            p.kids
                .iter()
                .enumerate()
                .map(|(j, &k)| {
                    if j + 1 == e.hole {
                        Prefix::Hole
                    } else {
                        Prefix::from_tree(&self.reps[k])
                    }
                })
                .collect(),
        )
    }

    fn pump_witness(
        &self,
        ei: usize,
        parent: &HashMap<(usize, usize), Option<usize>>,
        adj: &HashMap<(usize, usize), Vec<usize>>,
        comp: &HashMap<(usize, usize), usize>,
    ) -> PumpWitness {
        let e = &self.edges[ei];
        let u = e.from;
        // path from a target down to u
        let mut path = Vec::new();
        let mut cur = u;
        while let Some(Some(pe)) = parent.get(&cur) {
            path.push(*pe);
            cur = self.edges[*pe].from;
        }
        path.reverse();
        let target = cur;
        // cycle: u -> e.to ~> u within the component
        let c = comp[&u];
        let mut back: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue = VecDeque::from([e.to]);
        let mut seen = HashSet::from([e.to]);
        while let Some(n) = queue.pop_front() {
            if n == u {
                break;
            }
            for &x in adj.get(&n).into_iter().flatten() {
                let m = self.edges[x].to;
                if comp.get(&m) == Some(&c) && seen.insert(m) {
                    back.insert(m, x);
                    queue.push_back(m);
                }
            }
        }
        let mut cyc = Vec::new();
        let mut cur = u;
        while cur != e.to {
            let x = back[&cur];
            cyc.push(x);
            cur = self.edges[x].from;
        }
        cyc.push(ei);
        cyc.reverse();
        let outer = path.iter().fold(Prefix::Hole, |acc, &x| plug_prefix(&acc, &self.edge_ctx(x)));
        let pump = cyc.iter().fold(Prefix::Hole, |acc, &x| plug_prefix(&acc, &self.edge_ctx(x)));
        let mut base = self.reps[u.0].clone();
        let attr = self.ix.syn[target.1].clone();
        let mut w = PumpWitness {
            attr,
            outer,
            pump,
            base: base.clone(),
            lengths: Vec::new(),
            validated: false,
        };
        for _ in 0..4 {
            w.base = base.clone();
            let ls = w.lengths_for(&self.compiled, 3);
            let ok = ls.len() == 3 && ls.windows(2).all(|p| p[0] < p[1]);
            w.lengths = ls;
            if ok {
                w.validated = true;
                break;
            }
            base = plug(&w.pump, &base);
        }
        w
    }

    pub fn kappa(&self) -> usize {
        self.visiting_pair_sets()
            .iter()
            .filter_map(|v| self.variation(&v.pairs).ok())
            .filter(|v| v.bounded)
            .filter_map(|v| v.kappa)
            .max()
            .unwrap_or(0)
    }

    /// Single path property; a No carries a concrete input and two sibling nodes.
    pub fn single_path(&self) -> SinglePath {
        let mut verdicts: HashMap<BTreeSet<(usize, usize)>, bool> = HashMap::new();
        let mut unbounded = |an: &Analyzer, p: &BTreeSet<(usize, usize)>| -> bool {
            *verdicts
                .entry(p.clone())
                .or_insert_with(|| an.variation(&an.named(p)).map(|v| !v.bounded).unwrap_or(false))
        };
        let np = self.plain.len();
        let empty: &[T] = &[];
        for (ci, ctx) in self.ctxs.iter().enumerate() {
            for si in 0..self.syms.len() {
                let k = self.syms[si].1;
                if k < 2 {
                    continue;
                }
                for tuple in tuples(np, k) {
                    let mut hits = Vec::new();
                    for hole in 1..=k {
                        let tails: Vec<&[T]> = (1..=k)
                            .map(|j| if j == hole { empty } else { self.plain[tuple[j - 1]].as_slice() })
                            .collect();
                        let x = self.child_ctx(ctx, si, hole, &tails);
                        let Some(p) = self.psi(&x, &self.plain[tuple[hole - 1]]) else {
                            hits.clear();
                            break;
                        };
                        if unbounded(self, &p) {
                            hits.push(hole);
                        }
                    }
                    if hits.len() >= 2 {
                        let inner = Tree::new(
                            self.syms[si].0.clone(),
                            tuple.iter().map(|&t| self.plain_reps[t].clone()).collect(),
                        );
                        let s = plug(&self.ctx_reps[ci], &inner);
                        let u = hole_addr(&self.ctx_reps[ci]);
                        return SinglePath::No {
                            input: s,
                            v1: u.child(hits[0]),
                            v2: u.child(hits[1]),
                        };
                    }
                }
            }
        }
        SinglePath::Yes
    }

    pub fn report(&self) -> AnalysisReport {
        let vps = self.visiting_pair_sets();
        let variations: Vec<VariationVerdict> = vps.iter().filter_map(|v| self.variation(&v.pairs).ok()).collect();
        let kappa = variations.iter().filter(|v| v.bounded).filter_map(|v| v.kappa).max().unwrap_or(0);
        AnalysisReport {
            isds: all_isds(&self.att).iter().map(pairs_json).collect(),
            circular: false,
            visiting_sets: vps.iter().map(|v| pairs_json(&v.pairs)).collect(),
            variations,
            kappa,
            single_path: self.single_path(),
        }
    }
}

/// Replaces the single hole of `outer` by `inner`.
pub fn plug_prefix(outer: &Prefix, inner: &Prefix) -> Prefix {
    match outer {
        Prefix::Hole => inner.clone(),
        Prefix::Node(s, ch) => Prefix::Node(s.clone(), ch.iter().map(|c| plug_prefix(c, inner)).collect()),
    }
}

pub fn plug(ctx: &Prefix, t: &Tree) -> Tree {
    ctx.fill(&mut std::iter::repeat(t.clone())).expect("context has a hole")
}

/// Address of the (first) hole.
pub fn hole_addr(p: &Prefix) -> NodeAddr {
    fn go(p: &Prefix, path: &mut Vec<usize>) -> bool {
        match p {
            Prefix::Hole => true,
            Prefix::Node(_, ch) => {
                for (i, c) in ch.iter().enumerate() {
                    path.push(i + 1);
                    if go(c, path) {
                        return true;
                    }
                    path.pop();
                }
                false
            }
        }
    }
    let mut v = Vec::new();
    go(p, &mut v);
    NodeAddr(v)
}

fn scc<N: Copy + Eq + std::hash::Hash>(nodes: &[N], succ: impl Fn(&N) -> Vec<N>) -> HashMap<N, usize> {
    // iterative Tarjan
    let mut index: HashMap<N, usize> = HashMap::new();
    let mut low: HashMap<N, usize> = HashMap::new();
    let mut on: HashSet<N> = HashSet::new();
    let mut stack: Vec<N> = Vec::new();
    let mut comp: HashMap<N, usize> = HashMap::new();
    let mut next = 0;
    let mut ncomp = 0;
    for &root in nodes {
        if index.contains_key(&root) {
            continue;
        }
        let mut call: Vec<(N, Vec<N>, usize)> = Vec::new();
        index.insert(root, next);
        low.insert(root, next);
        next += 1;
        stack.push(root);
        on.insert(root);
        call.push((root, succ(&root), 0));
        while let Some((v, ss, i)) = call.last_mut() {
            if *i < ss.len() {
                let w = ss[*i];
                *i += 1;
                if !index.contains_key(&w) {
                    index.insert(w, next);
                    low.insert(w, next);
                    next += 1;
                    stack.push(w);
                    on.insert(w);
                    let sw = succ(&w);
                    call.push((w, sw, 0));
                } else if on.contains(&w) {
                    let lw = index[&w];
                    let lv = low[v];
                    low.insert(*v, lv.min(lw));
                }
            } else {
                let v = *v;
                call.pop();
                if let Some((p, _, _)) = call.last() {
                    let lp = low[p];
                    let lv = low[&v];
                    low.insert(*p, lp.min(lv));
                }
                if low[&v] == index[&v] {
                    loop {
                        let w = stack.pop().expect("scc stack");
                        on.remove(&w);
                        comp.insert(w, ncomp);
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VisitingPairSet {
    #[serde(serialize_with = "ser_pairs")]
    pub pairs: PairSet,
    pub witness_input: Tree,
    pub witness_node: NodeAddr,
    /// number of (context summary, subtree summary) combinations realizing it
    pub realizations: usize,
}

fn ser_pairs<S: serde::Serializer>(p: &PairSet, s: S) -> Result<S::Ok, S::Error> {
    pairs_json(p).serialize(s)
}

/// Pumping evidence: outer[pump^n[base]] is in Ω_ψ for every n and nf of `attr` grows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PumpWitness {
    pub attr: Symbol,
    pub outer: Prefix,
    pub pump: Prefix,
    pub base: Tree,
    pub lengths: Vec<usize>,
    pub validated: bool,
}

impl Serialize for Prefix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl PumpWitness {
    pub fn pumped(&self, n: usize) -> Tree {
        let mut t = self.base.clone();
        for _ in 0..n {
            t = plug(&self.pump, &t);
        }
        plug(&self.outer, &t)
    }

    /// Heights of nf(attr) on the first `count` pumped inputs (stops at the first undefined one).
    pub fn lengths_for(&self, c: &CompiledAtt, count: usize) -> Vec<usize> {
        let id = c.attr_id(&self.attr).expect("attr");
        let mut out = Vec::new();
        for n in 0..count {
            let s = self.pumped(n);
            let r = c.thread(&c.host(&s, false), id, 0, 1_000_000);
            match entry_of(r) {
                TailEntry::Inh { out: w, .. } => out.push(w.len() + 1),
                _ => break,
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VariationVerdict {
    #[serde(serialize_with = "ser_pairs")]
    pub psi: PairSet,
    pub bounded: bool,
    pub kappa: Option<usize>,
    pub pump: Option<PumpWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum SinglePath {
    Yes,
    No { input: Tree, v1: NodeAddr, v2: NodeAddr },
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub isds: Vec<Vec<[String; 2]>>,
    pub circular: bool,
    pub visiting_sets: Vec<Vec<[String; 2]>>,
    pub variations: Vec<VariationVerdict>,
    pub kappa: usize,
    pub single_path: SinglePath,
}

pub fn visiting_pair_sets(a: &AttSpec) -> Result<Vec<VisitingPairSet>, AnalysisError> {
    Ok(Analyzer::new(a)?.visiting_pair_sets())
}

pub fn variation(a: &AttSpec, psi: &PairSet) -> Result<VariationVerdict, AnalysisError> {
    Analyzer::new(a)?.variation(psi)
}

pub fn kappa(a: &AttSpec) -> Result<usize, AnalysisError> {
    Ok(Analyzer::new(a)?.kappa())
}

pub fn single_path(a: &AttSpec) -> Result<SinglePath, AnalysisError> {
    Ok(Analyzer::new(a)?.single_path())
}

/// Visiting pair sets by direct simulation of the derivation on `s^#`; `None` if s ∉ dom(A).
pub fn simulate_visiting_pairs(a: &AttSpec, s: &Tree) -> Option<BTreeMap<NodeAddr, PairSet>> {
    let c = CompiledAtt::new(a);
    // record every synthesized occurrence of the thread
    let mut processed: BTreeMap<NodeAddr, BTreeSet<Symbol>> = BTreeMap::new();
    let tr = crate::semantics::trace_att(a, s, &crate::semantics::StepBudget::default());
    if !tr.complete {
        return None;
    }
    for st in &tr.steps {
        for o in st.form.occurrences() {
            if a.is_syn(&o.attr) && !o.node.is_root() {
                processed
                    .entry(NodeAddr(o.node.0[1..].to_vec()))
                    .or_default()
                    .insert(o.attr.clone());
            }
        }
    }
    let mut out = BTreeMap::new();
    for v in s.nodes() {
        let sub = s.subtree_at(&v).expect("node");
        let tm = tail_map_compiled(&c, sub);
        let mut p = PairSet::new();
        for x in processed.get(&v).into_iter().flatten() {
            if let Some(TailEntry::Inh { b, .. }) = tm.get(x) {
                p.insert((b.clone(), x.clone()));
            }
        }
        out.insert(v, p);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_spec, Decl};

    fn att(text: &str) -> AttSpec {
        match parse_spec(text).unwrap() {
            Decl::Att(a) => a,
            _ => panic!(),
        }
    }

    const A1: &str = "att A1
input f:2 e:0
output g:1 e:0
syn a
inh b
init a
rule f: a(pi) -> a(pi 1)
rule f: b(pi 1) -> a(pi 2)
rule f: b(pi 2) -> b(pi)
rule #: b(pi 1) -> e
rule e: a(pi) -> g(b(pi))
";

    const C0: &str = "att C0
input e:0
output e:0
syn a
inh b
init a
rule e: a(pi) -> b(pi)
rule #: b(pi 1) -> a(pi 1)
";

    fn p(pairs: &[(&str, &str)]) -> PairSet {
        pairs.iter().map(|(b, a)| (Symbol::new(b), Symbol::new(a))).collect()
    }

    #[test]
    fn isd_examples() {
        let a1 = att(A1);
        assert_eq!(compute_isd(&a1, &Tree::leaf("e")), p(&[("b", "a")]));
        assert_eq!(all_isds(&a1), BTreeSet::from([p(&[("b", "a")])]));
        assert!(!is_circular(&a1).0);
        let (circ, w) = is_circular(&att(C0));
        assert!(circ);
        assert_eq!(w.unwrap().symbol, Symbol::root());
    }

    #[test]
    fn a1_unbounded_and_not_single_path() {
        let an = Analyzer::new(&att(A1)).unwrap();
        let v = an.visiting_pair_sets();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].pairs, p(&[("b", "a")]));
        let var = an.variation(&v[0].pairs).unwrap();
        assert!(!var.bounded);
        assert!(var.pump.unwrap().validated);
        assert!(matches!(an.single_path(), SinglePath::No { .. }));
        assert_eq!(an.kappa(), 0);
    }

    #[test]
    fn cycle_finder() {
        let mut adj = BTreeMap::new();
        adj.insert(1, vec![2]);
        adj.insert(2, vec![3]);
        adj.insert(3, vec![1]);
        assert_eq!(find_cycle(&adj), Some(vec![1, 2, 3, 1]));
        adj.insert(3, vec![]);
        assert_eq!(find_cycle(&adj), None);
    }
}

#[cfg(test)]
mod corpus_tests {
    use super::*;
    use crate::corpus;

    fn p(pairs: &[(&str, &str)]) -> PairSet {
        pairs.iter().map(|(b, a)| (Symbol::new(b), Symbol::new(a))).collect()
    }

    #[test]
    fn a2_sets_and_kappa() {
        let an = Analyzer::new(&corpus::att("a2")).unwrap();
        let sets: Vec<PairSet> = an.visiting_pair_sets().into_iter().map(|v| v.pairs).collect();
        assert!(sets.contains(&PairSet::new()));
        for psi in [p(&[("b_e", "a")]), p(&[("b_d", "a")])] {
            assert!(sets.contains(&psi));
            let v = an.variation(&psi).unwrap();
            assert!(v.bounded);
            assert_eq!(v.kappa, Some(1));
        }
        // nodes on the leftmost path see unbounded sets
        let unb: Vec<&PairSet> = sets.iter().filter(|s| !an.variation(s).unwrap().bounded).collect();
        assert!(!unb.is_empty());
        for s in unb {
            let w = an.variation(s).unwrap().pump.unwrap();
            assert!(w.validated, "{}", render_pairs(s));
        }
        assert_eq!(an.kappa(), 1);
        assert_eq!(an.single_path(), SinglePath::Yes);
    }

    #[test]
    fn all_corpus_parse() {
        for (n, _) in corpus::ALL {
            corpus::att(n);
        }
    }
}
