//! Two-way and one-way word transducers over the monadic encoding of paths,
//! the correspondence automaton, the one-way definability oracle and the
//! conversion of one-way transducers back to top-down tree transducers.
//!
//! A two-way word transducer is an att whose input symbols have rank ≤ 1. Its
//! behaviour on a word splits into a context summary of a prefix and a suffix
//! summary; both carry exact output strings, so equal summaries mean equal
//! behaviour under every extension.

use crate::constructions::AssociatedAttR;
use crate::model::{AttSpec, Lhs, RelabelingSpec, Rhs, TdRhs, TdttSpec};
use crate::trees::{NodeAddr, Prefix, RankedAlphabet, Symbol, Tree};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("no such node: {0}")]
    NoSuchNode(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("input is not functional: {0}")]
    NotFunctionalInput(String),
}

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

/// `σ@i`: the next node is the i-th child of a σ-labelled node.
pub fn enc_symbol(s: &Symbol, i: usize) -> Symbol {
    sym(&format!("{s}@{i}"))
}

/// Splits `σ@i`; the index is taken after the last `@`.
pub fn dec_symbol(s: &Symbol) -> Option<(Symbol, usize)> {
    let n = s.as_str();
    let at = n.rfind('@')?;
    let i = n[at + 1..].parse().ok()?;
    Some((sym(&n[..at]), i))
}

pub fn encoding_alphabet(sigma: &RankedAlphabet) -> RankedAlphabet {
    let mut out = RankedAlphabet::new();
    for (s, k) in sigma.iter() {
        if k == 0 {
            out.insert(s.clone(), 0).expect("fresh");
        }
        for i in 1..=k {
            out.insert(enc_symbol(s, i), 1).expect("fresh");
        }
    }
    out
}

/// Encoding of the prefix of `s` that keeps the path to the leaf at `path`.
pub fn encode_prefix(s: &Tree, path: &NodeAddr) -> Result<Tree, WordError> {
    let mut labels = Vec::new();
    let mut cur = s;
    for &i in &path.0 {
        if i == 0 || i > cur.rank() {
            return Err(WordError::NoSuchNode(path.to_string()));
        }
        labels.push(enc_symbol(cur.label(), i));
        cur = &cur.children()[i - 1];
    }
    if cur.rank() != 0 {
        return Err(WordError::NoSuchNode(format!("{path} is not a leaf")));
    }
    labels.push(cur.label().clone());
    Ok(word_to_tree(&labels))
}

pub fn word_to_tree(labels: &[Symbol]) -> Tree {
    let (last, init) = labels.split_last().expect("non-empty word");
    let mut t = Tree::new(last.clone(), Vec::new());
    for s in init.iter().rev() {
        t = Tree::new(s.clone(), vec![t]);
    }
    t
}

pub fn tree_to_word(t: &Tree) -> Vec<Symbol> {
    t.spine()
}

/// The prefix over the original alphabet encoded by a word; off-path children are holes.
pub fn decode_prefix(word: &Tree, sigma: &RankedAlphabet) -> Option<Prefix> {
    let labels = tree_to_word(word);
    let (last, init) = labels.split_last()?;
    let mut p = Prefix::Node(last.clone(), Vec::new());
    for s in init.iter().rev() {
        let (base, i) = dec_symbol(s)?;
        let k = sigma.rank(&base)?;
        if i == 0 || i > k {
            return None;
        }
        let mut ch = vec![Prefix::Hole; k];
        ch[i - 1] = p;
        p = Prefix::Node(base, ch);
    }
    Some(p)
}

// ------------------------------------------------------------ correspondence automaton

/// Bottom-up automaton for the range of a relabeling, restricted to inhabited states.
pub fn range_automaton(b: &RelabelingSpec) -> RelabelingSpec {
    let mut inhabited: BTreeSet<Symbol> = BTreeSet::new();
    loop {
        let mut changed = false;
        for ((_, kids), rs) in &b.rules {
            if kids.iter().all(|k| inhabited.contains(k)) {
                for r in rs {
                    changed |= inhabited.insert(r.state.clone());
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = RelabelingSpec::new(&format!("{}_range", b.name), b.output.clone(), b.output.clone());
    for ((_, kids), rs) in &b.rules {
        if !kids.iter().all(|k| inhabited.contains(k)) {
            continue;
        }
        for r in rs {
            out.add_rule(&r.out, kids.clone(), &r.state, &r.out);
        }
    }
    out.finals = b.finals.intersection(&inhabited).cloned().collect();
    out
}

/// Lifts σ(l1..lk) → l to ⟨σ,i⟩(l_i) → l over the encoding alphabet.
pub fn build_correspondence_automaton(range: &RelabelingSpec) -> RelabelingSpec {
    let enc = encoding_alphabet(&range.input);
    let mut out = RelabelingSpec::new(&format!("{}_paths", range.name), enc.clone(), enc);
    for ((s, kids), rs) in &range.rules {
        for r in rs {
            if kids.is_empty() {
                out.add_rule(s, Vec::new(), &r.state, s);
            }
            for (i, l) in kids.iter().enumerate() {
                let e = enc_symbol(s, i + 1);
                out.add_rule(&e, vec![l.clone()], &r.state, &e);
            }
        }
    }
    out.finals = range.finals.clone();
    out
}

pub fn corresponds(word: &Tree, corr: &RelabelingSpec) -> bool {
    crate::semantics::accepts(corr, word)
}

// ------------------------------------------------------------ two-way transducers

#[derive(Clone, Debug)]
pub struct TwoWayWord {
    pub att: AttSpec,
    /// correspondence automaton restricting the domain, when built from an att with look-ahead
    pub corr: Option<RelabelingSpec>,
}

impl TwoWayWord {
    pub fn new(att: AttSpec) -> Result<Self, WordError> {
        if att.input.max_rank() > 1 || !att.output.is_monadic() {
            return Err(WordError::NotApplicable("two-way transducers need monadic input and output".into()));
        }
        Ok(TwoWayWord { att, corr: None })
    }
}

fn walk_attr() -> Symbol {
    sym("walk")
}
fn chk_attr(l: &Symbol) -> Symbol {
    sym(&format!("chk<{l}>"))
}
fn sim_attr(a: &Symbol) -> Symbol {
    sym(&format!("sim<{a}>"))
}

fn rename_rhs(r: &Rhs, from: usize, to: usize) -> Rhs {
    match r {
        Rhs::Out(s, ch) => Rhs::Out(s.clone(), ch.iter().map(|c| rename_rhs(c, from, to)).collect()),
        Rhs::Syn(a, i) => Rhs::Syn(sim_attr(a), if *i == from { to } else { *i }),
        Rhs::Inh(b) => Rhs::Inh(sim_attr(b)),
    }
}

fn syn_children(r: &Rhs) -> BTreeSet<usize> {
    r.occurrences()
        .into_iter()
        .filter_map(|o| match o {
            Rhs::Syn(_, i) => Some(*i),
            _ => None,
        })
        .collect()
}

/// T_W: walk to the leaf, check correspondence bottom-up with the states of the
/// correspondence automaton as inherited attributes, then simulate A′ on the path.
pub fn build_two_way(h: &AssociatedAttR) -> Result<TwoWayWord, WordError> {
    let a = &h.a;
    if !a.output.is_monadic() {
        return Err(WordError::NotApplicable("nonmonadic output".into()));
    }
    for (s, _, r) in a.all_rules() {
        if !s.is_root() && r.is_ground() {
            return Err(WordError::NotApplicable("ground right-hand side outside the root".into()));
        }
    }
    let corr = build_correspondence_automaton(&range_automaton(&h.b));
    let enc = corr.input.clone();
    let mut tw = AttSpec::new(&format!("{}_W", a.name), enc.clone(), a.output.clone(), "walk");
    tw.syn = [walk_attr()].into_iter().chain(a.syn.iter().map(sim_attr)).collect();
    tw.inh = corr.states.iter().map(chk_attr).chain(a.inh.iter().map(sim_attr)).collect();
    let walk = walk_attr();
    for (s, k) in enc.iter() {
        if k == 1 {
            tw.add_rule(s, Lhs::Syn(walk.clone()), Rhs::Syn(walk.clone(), 1));
        }
    }
    for ((s, kids), rs) in &corr.rules {
        for r in rs {
            match kids.as_slice() {
                [] => tw.add_rule(s, Lhs::Syn(walk.clone()), Rhs::Inh(chk_attr(&r.state))),
                [l] => tw.add_rule(s, Lhs::Inh(chk_attr(l), 1), Rhs::Inh(chk_attr(&r.state))),
                _ => unreachable!("encoding symbols have rank ≤ 1"),
            }
        }
    }
    for l in &corr.finals {
        tw.add_rule(&Symbol::root(), Lhs::Inh(chk_attr(l), 1), Rhs::Syn(sim_attr(&a.init), 1));
    }
    for (s, lhs, r) in a.all_rules() {
        let k = if s.is_root() { 1 } else { a.input.rank(s).unwrap_or(0) };
        if s.is_root() || k == 0 {
            let lhs2 = match lhs {
                Lhs::Syn(x) => Lhs::Syn(sim_attr(x)),
                Lhs::Inh(x, i) => Lhs::Inh(sim_attr(x), *i),
            };
            tw.add_rule(s, lhs2, rename_rhs(r, 0, 0));
            continue;
        }
        let kids = syn_children(r);
        match lhs {
            Lhs::Syn(x) => {
                let targets: Vec<usize> = match kids.len() {
                    0 => (1..=k).collect(),
                    1 => kids.iter().copied().collect(),
                    _ => Vec::new(),
                };
                for i in targets {
                    tw.add_rule(&enc_symbol(s, i), Lhs::Syn(sim_attr(x)), rename_rhs(r, i, 1));
                }
            }
            Lhs::Inh(x, i) => {
                if kids.iter().all(|j| j == i) {
                    tw.add_rule(&enc_symbol(s, *i), Lhs::Inh(sim_attr(x), 1), rename_rhs(r, *i, 1));
                }
            }
        }
    }
    Ok(TwoWayWord { att: tw, corr: Some(corr) })
}

// ------------------------------------------------------------ summaries

#[derive(Clone, Debug)]
enum WLeaf {
    Ground,
    Syn(usize),
    Inh(usize),
}

#[derive(Clone, Debug)]
struct WRule {
    out: Vec<Symbol>,
    leaf: WLeaf,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Exit {
    Inh(usize),
    Ground,
}

/// Per synthesized attribute: where its thread leaves the suffix and what it emits.
pub type Suffix = Vec<Option<(ExitTag, Vec<Symbol>)>>;

/// Exit of a thread from a suffix: an inherited attribute at the top, or ground.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExitTag(Option<usize>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum CRes {
    Call(usize, Vec<Symbol>),
    Ok(Vec<Symbol>),
    Fail,
}

/// Behaviour of a prefix: what happens to each inherited attribute asked at the
/// hole, and how the initial attribute first reaches the hole.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Context {
    chi: Vec<CRes>,
    entry: CRes,
}

enum Cur {
    Syn(usize),
    Inh(usize),
}

/// Deterministic monadic att over words, compiled for incremental evaluation.
pub struct WordEngine {
    syms: Vec<(Symbol, usize)>,
    sym_ix: HashMap<Symbol, usize>,
    nsyn: usize,
    syn_rules: Vec<Vec<Option<WRule>>>,
    inh_rules: Vec<Vec<Option<WRule>>>,
    root_inh: Vec<Option<WRule>>,
    init: usize,
}

fn wrule(r: &Rhs, syn: &HashMap<Symbol, usize>, inh: &HashMap<Symbol, usize>) -> Option<WRule> {
    let mut out = Vec::new();
    let mut cur = r;
    loop {
        match cur {
            Rhs::Out(s, ch) if ch.is_empty() => {
                out.push(s.clone());
                return Some(WRule { out, leaf: WLeaf::Ground });
            }
            Rhs::Out(s, ch) if ch.len() == 1 => {
                out.push(s.clone());
                cur = &ch[0];
            }
            Rhs::Out(..) => return None,
            Rhs::Syn(a, _) => return Some(WRule { out, leaf: WLeaf::Syn(syn[a]) }),
            Rhs::Inh(b) => return Some(WRule { out, leaf: WLeaf::Inh(inh[b]) }),
        }
    }
}

impl WordEngine {
    pub fn new(a: &AttSpec) -> Result<Self, WordError> {
        if a.input.max_rank() > 1 || !a.output.is_monadic() {
            return Err(WordError::NotApplicable("monadic input and output required".into()));
        }
        if !a.is_deterministic() {
            return Err(WordError::NotFunctionalInput("nondeterministic two-way transducer".into()));
        }
        let syn: HashMap<Symbol, usize> = a.syn.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let inh: HashMap<Symbol, usize> = a.inh.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let syms: Vec<(Symbol, usize)> = a.input.iter().map(|(s, k)| (s.clone(), k)).collect();
        let sym_ix = syms.iter().enumerate().map(|(i, (s, _))| (s.clone(), i)).collect();
        let mut syn_rules = Vec::new();
        let mut inh_rules = Vec::new();
        for (s, _) in &syms {
            let mut sr = vec![None; syn.len()];
            let mut ir = vec![None; inh.len()];
            if let Some(rs) = a.rules.get(s) {
                for (lhs, rhss) in rs {
                    let r = rhss.first().and_then(|r| wrule(r, &syn, &inh));
                    match lhs {
                        Lhs::Syn(x) => sr[syn[x]] = r,
                        Lhs::Inh(x, _) => ir[inh[x]] = r,
                    }
                }
            }
            syn_rules.push(sr);
            inh_rules.push(ir);
        }
        let mut root_inh = vec![None; inh.len()];
        if let Some(rs) = a.rules.get(&Symbol::root()) {
            for (lhs, rhss) in rs {
                if let Lhs::Inh(x, _) = lhs {
                    root_inh[inh[x]] = rhss.first().and_then(|r| wrule(r, &syn, &inh));
                }
            }
        }
        Ok(WordEngine {
            syms,
            sym_ix,
            nsyn: syn.len(),
            syn_rules,
            inh_rules,
            root_inh,
            init: *syn.get(&a.init).ok_or_else(|| WordError::NotApplicable("init".into()))?,
        })
    }

    pub fn unary(&self) -> Vec<Symbol> {
        self.syms.iter().filter(|x| x.1 == 1).map(|x| x.0.clone()).collect()
    }

    pub fn leaves(&self) -> Vec<Symbol> {
        self.syms.iter().filter(|x| x.1 == 0).map(|x| x.0.clone()).collect()
    }

    /// Thread inside one node with the child's summary.
    fn walk(&self, si: usize, child: Option<&Suffix>, start: Cur) -> Option<(Exit, Vec<Symbol>)> {
        let mut out = Vec::new();
        let mut cur = start;
        let mut steps = 0;
        loop {
            steps += 1;
            if steps > 2 * (self.nsyn + self.inh_rules[si].len()) + 2 {
                return None;
            }
            let r = match cur {
                Cur::Syn(a) => self.syn_rules[si][a].as_ref(),
                Cur::Inh(b) => self.inh_rules[si][b].as_ref(),
            }?;
            out.extend(r.out.iter().cloned());
            match r.leaf {
                WLeaf::Ground => return Some((Exit::Ground, out)),
                WLeaf::Inh(b) => return Some((Exit::Inh(b), out)),
                WLeaf::Syn(a) => {
                    let (ExitTag(t), w) = child?.get(a)?.as_ref()?;
                    out.extend(w.iter().cloned());
                    match t {
                        None => return Some((Exit::Ground, out)),
                        Some(b) => cur = Cur::Inh(*b),
                    }
                }
            }
        }
    }

    fn tag(e: (Exit, Vec<Symbol>)) -> (ExitTag, Vec<Symbol>) {
        match e {
            (Exit::Ground, w) => (ExitTag(None), w),
            (Exit::Inh(b), w) => (ExitTag(Some(b)), w),
        }
    }

    pub fn suffix_leaf(&self, leaf: &Symbol) -> Option<Suffix> {
        let si = *self.sym_ix.get(leaf)?;
        Some((0..self.nsyn).map(|a| self.walk(si, None, Cur::Syn(a)).map(Self::tag)).collect())
    }

    pub fn suffix_ext(&self, s: &Symbol, child: &Suffix) -> Option<Suffix> {
        let si = *self.sym_ix.get(s)?;
        Some((0..self.nsyn).map(|a| self.walk(si, Some(child), Cur::Syn(a)).map(Self::tag)).collect())
    }

    pub fn suffix_of(&self, word: &[Symbol]) -> Option<Suffix> {
        let (last, init) = word.split_last()?;
        let mut s = self.suffix_leaf(last)?;
        for c in init.iter().rev() {
            s = self.suffix_ext(c, &s)?;
        }
        Some(s)
    }

    pub fn root_context(&self) -> Context {
        let chi = self
            .root_inh
            .iter()
            .map(|r| match r {
                None => CRes::Fail,
                Some(r) => match r.leaf {
                    WLeaf::Syn(a) => CRes::Call(a, r.out.clone()),
                    WLeaf::Ground => CRes::Ok(r.out.clone()),
                    WLeaf::Inh(_) => CRes::Fail,
                },
            })
            .collect();
        Context {
            chi,
            entry: CRes::Call(self.init, Vec::new()),
        }
    }

    fn resolve(&self, si: usize, parent: &Context, start: Cur, mut out: Vec<Symbol>) -> CRes {
        let mut cur = start;
        let mut steps = 0;
        loop {
            steps += 1;
            if steps > 2 * (self.nsyn + parent.chi.len()) + 2 {
                return CRes::Fail;
            }
            let r = match cur {
                Cur::Syn(a) => self.syn_rules[si][a].as_ref(),
                Cur::Inh(b) => self.inh_rules[si][b].as_ref(),
            };
            let Some(r) = r else { return CRes::Fail };
            out.extend(r.out.iter().cloned());
            match r.leaf {
                WLeaf::Ground => return CRes::Ok(out),
                WLeaf::Syn(a) => return CRes::Call(a, out),
                WLeaf::Inh(b) => match &parent.chi[b] {
                    CRes::Call(a, w) => {
                        out.extend(w.iter().cloned());
                        cur = Cur::Syn(*a);
                    }
                    CRes::Ok(w) => {
                        out.extend(w.iter().cloned());
                        return CRes::Ok(out);
                    }
                    CRes::Fail => return CRes::Fail,
                },
            }
        }
    }

    pub fn context_ext(&self, ctx: &Context, s: &Symbol) -> Option<Context> {
        let si = *self.sym_ix.get(s)?;
        let chi = (0..ctx.chi.len())
            .map(|b| self.resolve(si, ctx, Cur::Inh(b), Vec::new()))
            .collect();
        let entry = match &ctx.entry {
            CRes::Call(a, w) => self.resolve(si, ctx, Cur::Syn(*a), w.clone()),
            other => other.clone(),
        };
        Some(Context { chi, entry })
    }

    /// Output of the whole word prefix·suffix.
    pub fn combine(&self, ctx: &Context, suf: &Suffix) -> Option<Vec<Symbol>> {
        let (mut a, mut out) = match &ctx.entry {
            CRes::Call(a, w) => (*a, w.clone()),
            CRes::Ok(w) => return Some(w.clone()),
            CRes::Fail => return None,
        };
        for _ in 0..=self.nsyn {
            let (ExitTag(t), w) = suf.get(a)?.as_ref()?;
            out.extend(w.iter().cloned());
            let Some(b) = t else { return Some(out) };
            match &ctx.chi[*b] {
                CRes::Call(a2, w) => {
                    out.extend(w.iter().cloned());
                    a = *a2;
                }
                CRes::Ok(w) => {
                    out.extend(w.iter().cloned());
                    return Some(out);
                }
                CRes::Fail => return None,
            }
        }
        None
    }

    pub fn eval(&self, word: &[Symbol]) -> Option<Vec<Symbol>> {
        let suf = self.suffix_of(word)?;
        self.combine(&self.root_context(), &suf)
    }

    pub fn context_of(&self, prefix: &[Symbol]) -> Option<Context> {
        let mut c = self.root_context();
        for s in prefix {
            c = self.context_ext(&c, s)?;
        }
        Some(c)
    }
}

// ------------------------------------------------------------ one-way transducers

/// Deterministic one-way transducer on words: q·c ↦ (emitted, q'), q·leaf ↦ output.
#[derive(Clone, Debug, Default)]
pub struct OneWay {
    pub states: Vec<Symbol>,
    pub init: usize,
    pub step: HashMap<(usize, Symbol), (Vec<Symbol>, usize)>,
    pub last: HashMap<(usize, Symbol), Vec<Symbol>>,
}

impl OneWay {
    pub fn eval(&self, word: &[Symbol]) -> Option<Vec<Symbol>> {
        let (leaf, init) = word.split_last()?;
        let mut q = self.init;
        let mut out = Vec::new();
        for c in init {
            let (w, q2) = self.step.get(&(q, c.clone()))?;
            out.extend(w.iter().cloned());
            q = *q2;
        }
        out.extend(self.last.get(&(q, leaf.clone()))?.iter().cloned());
        Some(out)
    }

    /// Outputs from every state on a suffix, given those on its tail.
    fn ext(&self, c: &Symbol, tail: &[Option<Vec<Symbol>>]) -> Vec<Option<Vec<Symbol>>> {
        (0..self.states.len())
            .map(|q| {
                let (w, q2) = self.step.get(&(q, c.clone()))?;
                let rest = tail[*q2].as_ref()?;
                let mut o = w.clone();
                o.extend(rest.iter().cloned());
                Some(o)
            })
            .collect()
    }

    fn at_leaf(&self, leaf: &Symbol) -> Vec<Option<Vec<Symbol>>> {
        (0..self.states.len())
            .map(|q| self.last.get(&(q, leaf.clone())).cloned())
            .collect()
    }

    pub fn to_tdtt(&self, name: &str, input: &RankedAlphabet, output: &RankedAlphabet) -> TdttSpec {
        let mut t = TdttSpec::new(name, input.clone(), output.clone(), self.states[self.init].as_str());
        t.states = self.states.iter().cloned().collect();
        let mono = |w: &[Symbol], tail: TdRhs| w.iter().rev().fold(tail, |acc, s| TdRhs::Out(s.clone(), vec![acc]));
        let mut steps: Vec<_> = self.step.iter().collect();
        steps.sort_by(|a, b| a.0.cmp(b.0));
        for ((q, c), (w, q2)) in steps {
            t.add_rule(&self.states[*q], c, mono(w, TdRhs::Call(self.states[*q2].clone(), 1)));
        }
        let mut lasts: Vec<_> = self.last.iter().collect();
        lasts.sort_by(|a, b| a.0.cmp(b.0));
        for ((q, c), w) in lasts {
            let (l, init) = w.split_last().expect("ground output");
            t.add_rule(&self.states[*q], c, mono(init, TdRhs::Out(l.clone(), Vec::new())));
        }
        t
    }

    /// Reads a deterministic top-down transducer with monadic input and output.
    pub fn from_tdtt(t: &TdttSpec) -> Result<OneWay, WordError> {
        let states: Vec<Symbol> = t.states.iter().cloned().collect();
        let ix: HashMap<&Symbol, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut ow = OneWay {
            init: *ix.get(&t.init).ok_or_else(|| WordError::NotApplicable("init state".into()))?,
            states: states.clone(),
            ..Default::default()
        };
        for ((q, c), rs) in &t.rules {
            let Some(r) = rs.first() else { continue };
            let mut w = Vec::new();
            let mut cur = r;
            loop {
                match cur {
                    TdRhs::Out(s, ch) if ch.is_empty() => {
                        w.push(s.clone());
                        ow.last.insert((ix[q], c.clone()), w);
                        break;
                    }
                    TdRhs::Out(s, ch) if ch.len() == 1 => {
                        w.push(s.clone());
                        cur = &ch[0];
                    }
                    TdRhs::Call(q2, 1) => {
                        ow.step.insert((ix[q], c.clone()), (w, ix[q2]));
                        break;
                    }
                    _ => return Err(WordError::NotApplicable("not a one-way word transducer".into())),
                }
            }
        }
        Ok(ow)
    }
}

// ------------------------------------------------------------ exact verification

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verification {
    /// number of words compared, all of length ≤ the bound
    Agree { words: u128 },
    Differ { word: Vec<Symbol>, two_way: Option<Vec<Symbol>>, one_way: Option<Vec<Symbol>> },
    Budget,
}

/// Compares a two-way and a one-way transducer on every word of length ≤ `max_len`.
/// Words are grouped by (suffix summary, one-way outputs per state), which is exact.
pub fn verify_one_way(e: &WordEngine, ow: &OneWay, max_len: usize, max_classes: usize) -> Verification {
    let root = e.root_context();
    type Key = (Suffix, Vec<Option<Vec<Symbol>>>);
    let mut level: HashMap<Key, (Vec<Symbol>, u128)> = HashMap::new();
    for l in e.leaves() {
        let Some(s) = e.suffix_leaf(&l) else { continue };
        let c = ow.at_leaf(&l);
        let ent = level.entry((s, c)).or_insert((vec![l.clone()], 0));
        ent.1 += 1;
    }
    let unary = e.unary();
    let mut total: u128 = 0;
    for len in 1..=max_len {
        let mut keys: Vec<&Key> = level.keys().collect();
        keys.sort_by_key(|k| &level[*k].0);
        for k in keys {
            let (word, n) = &level[k];
            let tw = e.combine(&root, &k.0);
            let one = k.1[ow.init].clone();
            if tw != one {
                return Verification::Differ {
                    word: word.clone(),
                    two_way: tw,
                    one_way: one,
                };
            }
            total += n;
        }
        if len == max_len {
            break;
        }
        let mut next: HashMap<Key, (Vec<Symbol>, u128)> = HashMap::new();
        for ((s, c), (word, n)) in &level {
            for u in &unary {
                let Some(s2) = e.suffix_ext(u, s) else { continue };
                let c2 = ow.ext(u, c);
                let mut w2 = Vec::with_capacity(word.len() + 1);
                w2.push(u.clone());
                w2.extend(word.iter().cloned());
                let ent = next.entry((s2, c2)).or_insert((w2.clone(), 0));
                if w2 < ent.0 {
                    ent.0 = w2;
                }
                ent.1 += n;
            }
        }
        if next.len() > max_classes {
            return Verification::Budget;
        }
        level = next;
    }
    Verification::Agree { words: total }
}

// ------------------------------------------------------------ definability oracle

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinabilityBudget {
    /// longest word used for synthesis
    pub sample_length: usize,
    pub state_bound: usize,
    pub verify_length: usize,
    /// cap on summary classes and certificate candidates; 0 gives Unknown at once
    pub budget_words: usize,
}

impl Default for DefinabilityBudget {
    fn default() -> Self {
        DefinabilityBudget {
            sample_length: 8,
            state_bound: 16,
            verify_length: 10,
            budget_words: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Certificate {
    /// outputs on prefix·loop^n·suffix, n = 1..=4, admit no split p·x^n·s
    Loop {
        prefix: Vec<Symbol>,
        pump: Vec<Symbol>,
        suffix: Vec<Symbol>,
        outputs: Vec<Vec<Symbol>>,
    },
    /// outputs on prefix·α^n·middle·β^m·suffix, n, m = 1..=3, admit no split p·x^n·q·y^m·s
    TwoLoops {
        prefix: Vec<Symbol>,
        alpha: Vec<Symbol>,
        middle: Vec<Symbol>,
        beta: Vec<Symbol>,
        suffix: Vec<Symbol>,
        outputs: Vec<Vec<Symbol>>,
    },
}

impl Certificate {
    fn words(&self) -> Vec<Vec<Symbol>> {
        let rep = |w: &[Symbol], n: usize| -> Vec<Symbol> { (0..n).flat_map(|_| w.iter().cloned()).collect() };
        match self {
            Certificate::Loop { prefix, pump, suffix, .. } => (1..=4)
                .map(|n| [prefix.clone(), rep(pump, n), suffix.clone()].concat())
                .collect(),
            Certificate::TwoLoops { prefix, alpha, middle, beta, suffix, .. } => {
                let mut v = Vec::new();
                for n in 1..=3 {
                    for m in 1..=3 {
                        v.push([prefix.clone(), rep(alpha, n), middle.clone(), rep(beta, m), suffix.clone()].concat());
                    }
                }
                v
            }
        }
    }

    fn outputs(&self) -> &[Vec<Symbol>] {
        match self {
            Certificate::Loop { outputs, .. } | Certificate::TwoLoops { outputs, .. } => outputs,
        }
    }

    fn fits(&self) -> bool {
        match self {
            Certificate::Loop { outputs, .. } => fits_one_loop(outputs),
            Certificate::TwoLoops { outputs, .. } => fits_two_loops(outputs),
        }
    }
}

/// Is there p, x, s with outputs[n-1] = p·x^n·s for n = 1..?
pub fn fits_one_loop(o: &[Vec<Symbol>]) -> bool {
    if o.len() < 2 {
        return true;
    }
    let d = o[1].len() as isize - o[0].len() as isize;
    if d < 0 || o.windows(2).any(|w| w[1].len() as isize - w[0].len() as isize != d) {
        return false;
    }
    let d = d as usize;
    (0..=o[0].len() - d).any(|pl| {
        let p = &o[0][..pl];
        let x = &o[0][pl..pl + d];
        let s = &o[0][pl + d..];
        o.iter().enumerate().all(|(i, out)| {
            let n = i + 1;
            out.len() == pl + n * d + s.len()
                && &out[..pl] == p
                && (0..n).all(|j| &out[pl + j * d..pl + (j + 1) * d] == x)
                && &out[pl + n * d..] == s
        })
    })
}

/// Is there p, x, q, y, s with outputs[3(n-1)+(m-1)] = p·x^n·q·y^m·s for n, m = 1..=3?
pub fn fits_two_loops(o: &[Vec<Symbol>]) -> bool {
    let at = |n: usize, m: usize| &o[3 * (n - 1) + (m - 1)];
    let l = |n: usize, m: usize| at(n, m).len() as isize;
    let dx = l(2, 1) - l(1, 1);
    let dy = l(1, 2) - l(1, 1);
    if dx < 0 || dy < 0 {
        return false;
    }
    for n in 1..=3 {
        for m in 1..=3 {
            if l(n, m) != l(1, 1) + (n as isize - 1) * dx + (m as isize - 1) * dy {
                return false;
            }
        }
    }
    let (dx, dy) = (dx as usize, dy as usize);
    let base = at(1, 1);
    let rest = base.len() - dx - dy;
    for pl in 0..=rest {
        for ql in 0..=rest - pl {
            let p = &base[..pl];
            let x = &base[pl..pl + dx];
            let q = &base[pl + dx..pl + dx + ql];
            let y = &base[pl + dx + ql..pl + dx + ql + dy];
            let s = &base[pl + dx + ql + dy..];
            let ok = (1..=3).all(|n| {
                (1..=3).all(|m| {
                    let mut w: Vec<Symbol> = p.to_vec();
                    (0..n).for_each(|_| w.extend_from_slice(x));
                    w.extend_from_slice(q);
                    (0..m).for_each(|_| w.extend_from_slice(y));
                    w.extend_from_slice(s);
                    &w == at(n, m)
                })
            });
            if ok {
                return true;
            }
        }
    }
    false
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict")]
pub enum DefinabilityResult {
    Definable {
        #[serde(skip)]
        transducer: OneWay,
        spec: String,
        verified_length: usize,
        verified_words: u128,
    },
    NotDefinable {
        certificate: Certificate,
    },
    Unknown {
        reason: String,
    },
}

/// Checks a certificate against the transducer: recorded outputs must be
/// reproduced and must not fit the one-way shape.
pub fn replay_certificate(tw: &TwoWayWord, cert: &Certificate) -> Result<(), String> {
    let e = WordEngine::new(&tw.att).map_err(|x| x.to_string())?;
    for (w, o) in cert.words().iter().zip(cert.outputs()) {
        match e.eval(w) {
            Some(got) if &got == o => {}
            got => return Err(format!("output on {w:?} is {got:?}, certificate says {o:?}")),
        }
    }
    if cert.fits() {
        return Err("outputs fit a one-way shape".into());
    }
    Ok(())
}

fn lcp(ws: &[&Vec<Symbol>]) -> Vec<Symbol> {
    let Some(first) = ws.first() else { return Vec::new() };
    let mut n = first.len();
    for w in &ws[1..] {
        n = n.min(w.iter().zip(first.iter()).take_while(|(a, b)| a == b).count());
    }
    first[..n].to_vec()
}

/// Candidate by k-tail merging of prefix contexts; `None` if no consistent
/// candidate within the state bound.
fn synthesize(e: &WordEngine, budget: &DefinabilityBudget, k: usize) -> Option<OneWay> {
    let unary = e.unary();
    let leaves = e.leaves();
    // suffix classes up to length k
    let mut suffixes: Vec<Suffix> = Vec::new();
    let mut seen: HashMap<Suffix, ()> = HashMap::new();
    let mut frontier: Vec<Suffix> = leaves.iter().filter_map(|l| e.suffix_leaf(l)).collect();
    for len in 1..=k {
        let mut next = Vec::new();
        for s in frontier {
            if seen.insert(s.clone(), ()).is_none() {
                suffixes.push(s.clone());
                if len < k {
                    next.push(s);
                }
            }
        }
        frontier = next
            .iter()
            .flat_map(|s| unary.iter().filter_map(move |u| e.suffix_ext(u, s)))
            .collect();
        if suffixes.len() > budget.budget_words {
            return None;
        }
    }
    type Sig = Vec<(usize, Vec<Symbol>)>;
    let sig_of = |c: &Context| -> (Vec<Symbol>, Sig) {
        let outs: Vec<(usize, Vec<Symbol>)> = suffixes
            .iter()
            .enumerate()
            .filter_map(|(i, s)| e.combine(c, s).map(|o| (i, o)))
            .collect();
        // the final leaf symbol is never emitted before the leaf is read
        let unary_parts: Vec<Vec<Symbol>> = outs.iter().map(|x| x.1[..x.1.len() - 1].to_vec()).collect();
        let refs: Vec<&Vec<Symbol>> = unary_parts.iter().collect();
        let l = lcp(&refs);
        let sig = outs.iter().map(|(i, o)| (*i, o[l.len()..].to_vec())).collect();
        (l, sig)
    };
    // prefix contexts up to depth sample_length - k
    let max_depth = budget.sample_length.saturating_sub(k);
    let root = e.root_context();
    let mut nodes: Vec<Context> = vec![root.clone()];
    let mut index: HashMap<Context, usize> = HashMap::from([(root, 0)]);
    let mut depth = vec![0usize];
    let mut i = 0;
    while i < nodes.len() {
        if depth[i] < max_depth {
            for u in &unary {
                let Some(c) = e.context_ext(&nodes[i], u) else { continue };
                if !index.contains_key(&c) {
                    index.insert(c.clone(), nodes.len());
                    nodes.push(c);
                    depth.push(depth[i] + 1);
                }
            }
        }
        i += 1;
        if nodes.len() > budget.budget_words {
            return None;
        }
    }
    let sigs: Vec<(Vec<Symbol>, Sig)> = nodes.iter().map(&sig_of).collect();
    // classes in discovery order; nodes with no completion are dropped
    let mut class_of_sig: HashMap<Sig, usize> = HashMap::new();
    let mut class_rep: Vec<usize> = Vec::new();
    let mut node_class: Vec<Option<usize>> = Vec::new();
    for (n, (_, sg)) in sigs.iter().enumerate() {
        if sg.is_empty() {
            node_class.push(None);
            continue;
        }
        let c = *class_of_sig.entry(sg.clone()).or_insert_with(|| {
            class_rep.push(n);
            class_rep.len() - 1
        });
        node_class.push(Some(c));
    }
    if class_rep.len() > budget.state_bound {
        return None;
    }
    let root_lcp = sigs[0].0.clone();
    let separate_init = !root_lcp.is_empty();
    let offset = usize::from(separate_init);
    let ncls = class_rep.len();
    let mut ow = OneWay {
        states: (0..ncls + offset).map(|i| sym(&format!("q{i}"))).collect(),
        init: 0,
        ..Default::default()
    };
    let root_class = node_class[0]?;
    if !separate_init {
        ow.init = root_class;
    }
    let mut trans: HashMap<(usize, Symbol), (Vec<Symbol>, usize)> = HashMap::new();
    for (n, ctx) in nodes.iter().enumerate() {
        let Some(cls) = node_class[n] else { continue };
        let base = &sigs[n].0;
        for u in &unary {
            let Some(c2) = e.context_ext(ctx, u) else { continue };
            let (l2, sg2) = match index.get(&c2) {
                Some(&j) => sigs[j].clone(),
                None => sig_of(&c2),
            };
            if sg2.is_empty() {
                continue;
            }
            let target = *class_of_sig.get(&sg2)?;
            if !l2.starts_with(base) {
                return None;
            }
            let emit = l2[base.len()..].to_vec();
            let key = (cls, u.clone());
            match trans.get(&key) {
                Some(prev) if *prev != (emit.clone(), target) => return None,
                Some(_) => {}
                None => {
                    trans.insert(key, (emit, target));
                }
            }
            if n == 0 && separate_init {
                ow.step.insert((0, u.clone()), (l2.clone(), target + offset));
            }
        }
        for l in &leaves {
            let Some(s) = e.suffix_leaf(l) else { continue };
            if let Some(o) = e.combine(ctx, &s) {
                ow.last.insert((cls + offset, l.clone()), o[base.len()..].to_vec());
                if n == 0 && separate_init {
                    ow.last.insert((0, l.clone()), o);
                }
            }
        }
    }
    for ((c, u), (w, t)) in trans {
        ow.step.insert((c + offset, u), (w, t + offset));
    }
    if !separate_init {
        ow.init = root_class + offset;
    }
    Some(ow)
}

fn search_certificate(e: &WordEngine, budget: &DefinabilityBudget) -> Option<Certificate> {
    let unary = e.unary();
    let leaves = e.leaves();
    let words_upto = |n: usize| -> Vec<Vec<Symbol>> {
        let mut out = vec![Vec::new()];
        let mut cur = vec![Vec::new()];
        for _ in 0..n {
            cur = cur
                .iter()
                .flat_map(|w: &Vec<Symbol>| {
                    unary.iter().map(move |u| {
                        let mut w2 = w.clone();
                        w2.push(u.clone());
                        w2
                    })
                })
                .collect();
            out.extend(cur.iter().cloned());
        }
        out
    };
    let short = words_upto(1);
    let loops: Vec<Vec<Symbol>> = words_upto(2).into_iter().filter(|w| !w.is_empty()).collect();
    let mut suffixes: Vec<Vec<Symbol>> = Vec::new();
    for p in &short {
        for l in &leaves {
            let mut w = p.clone();
            w.push(l.clone());
            suffixes.push(w);
        }
    }
    let mut tried = 0usize;
    let eval_all = |ws: &[Vec<Symbol>]| -> Option<Vec<Vec<Symbol>>> { ws.iter().map(|w| e.eval(w)).collect() };
    for prefix in &short {
        for pump in &loops {
            for suffix in &suffixes {
                tried += 1;
                if tried > budget.budget_words {
                    return None;
                }
                let c = Certificate::Loop {
                    prefix: prefix.clone(),
                    pump: pump.clone(),
                    suffix: suffix.clone(),
                    outputs: Vec::new(),
                };
                let Some(outs) = eval_all(&c.words()) else { continue };
                if !fits_one_loop(&outs) {
                    let Certificate::Loop { prefix, pump, suffix, .. } = c else { unreachable!() };
                    return Some(Certificate::Loop { prefix, pump, suffix, outputs: outs });
                }
            }
        }
    }
    for prefix in &short {
        for alpha in &loops {
            for middle in &short {
                for beta in &loops {
                    if alpha == beta {
                        continue;
                    }
                    for suffix in &suffixes {
                        tried += 1;
                        if tried > budget.budget_words {
                            return None;
                        }
                        let c = Certificate::TwoLoops {
                            prefix: prefix.clone(),
                            alpha: alpha.clone(),
                            middle: middle.clone(),
                            beta: beta.clone(),
                            suffix: suffix.clone(),
                            outputs: Vec::new(),
                        };
                        let Some(outs) = eval_all(&c.words()) else { continue };
                        if !fits_two_loops(&outs) {
                            return Some(Certificate::TwoLoops {
                                prefix: prefix.clone(),
                                alpha: alpha.clone(),
                                middle: middle.clone(),
                                beta: beta.clone(),
                                suffix: suffix.clone(),
                                outputs: outs,
                            });
                        }
                    }
                }
            }
        }
    }
    None
}

/// Definable with an exactly verified one-way transducer, NotDefinable with a
/// replayable certificate, or Unknown.
pub fn one_way_definability(tw: &TwoWayWord, budget: &DefinabilityBudget) -> Result<DefinabilityResult, WordError> {
    let e = WordEngine::new(&tw.att)?;
    if budget.budget_words == 0 {
        return Ok(DefinabilityResult::Unknown { reason: "zero budget".into() });
    }
    let mut last_fail = String::from("no consistent candidate within the state bound");
    for k in 1..=budget.sample_length.max(1) {
        let Some(ow) = synthesize(&e, budget, k) else { continue };
        match verify_one_way(&e, &ow, budget.verify_length, budget.budget_words) {
            Verification::Agree { words } => {
                let out = ow.to_tdtt(&format!("{}_O", tw.att.name), &tw.att.input, &tw.att.output);
                return Ok(DefinabilityResult::Definable {
                    spec: crate::model::render_tdtt(&out),
                    transducer: ow,
                    verified_length: budget.verify_length,
                    verified_words: words,
                });
            }
            Verification::Differ { word, .. } => {
                last_fail = format!("candidate with tail length {k} differs on {word:?}");
            }
            Verification::Budget => {
                return Ok(DefinabilityResult::Unknown { reason: "verification budget exhausted".into() });
            }
        }
    }
    if let Some(c) = search_certificate(&e, budget) {
        return Ok(DefinabilityResult::NotDefinable { certificate: c });
    }
    Ok(DefinabilityResult::Unknown { reason: last_fail })
}

/// q(⟨σ,i⟩(x1)) → t becomes q(σ(x1..xk)) → t[x1 ← xi]; leaf rules are copied.
pub fn back_convert(t: &TdttSpec, sigma: &RankedAlphabet) -> Result<TdttSpec, WordError> {
    fn shift(r: &TdRhs, i: usize) -> TdRhs {
        match r {
            TdRhs::Call(q, _) => TdRhs::Call(q.clone(), i),
            TdRhs::Out(s, ch) => TdRhs::Out(s.clone(), ch.iter().map(|c| shift(c, i)).collect()),
        }
    }
    let mut out = TdttSpec::new(&format!("{}_T", t.name), sigma.clone(), t.output.clone(), t.init.as_str());
    out.states = t.states.clone();
    for ((q, c), rs) in &t.rules {
        let (base, i) = if sigma.rank(c) == Some(0) {
            (c.clone(), 0)
        } else {
            dec_symbol(c).ok_or_else(|| WordError::NotApplicable(format!("`{c}` is not an encoding symbol")))?
        };
        if sigma.rank(&base).is_none() {
            return Err(WordError::NotApplicable(format!("`{base}` not in the alphabet")));
        }
        for r in rs {
            out.add_rule(q, &base, if i == 0 { r.clone() } else { shift(r, i) });
        }
    }
    Ok(out)
}

/// Joint check of T_W against A′: every word of length ≤ `max_len` accepted by the
/// correspondence automaton is expanded to a tree in range(B) (holes filled with
/// representatives of the required states) and whenever T_W produces output, A′
/// must produce the same. Returns the number of words with output.
pub fn check_two_way_against(h: &AssociatedAttR, tw: &TwoWayWord, max_len: usize) -> Result<usize, (Tree, Option<Tree>, Option<Tree>)> {
    let e = WordEngine::new(&tw.att).expect("two-way transducer");
    let corr = tw.corr.as_ref().expect("correspondence automaton");
    // relabeled representatives per look-ahead state
    let reps: BTreeMap<Symbol, Tree> = h
        .states
        .iter()
        .filter_map(|(n, _, t)| crate::semantics::relabel(&h.b, t).map(|r| (n.clone(), r)))
        .collect();
    let sigma_b = h.b.output.clone();
    // child states for each annotated symbol of B's output
    let mut kid_states: BTreeMap<Symbol, Vec<Symbol>> = BTreeMap::new();
    for ((_, kids), rs) in &h.b.rules {
        for r in rs {
            kid_states.insert(r.out.clone(), kids.clone());
        }
    }
    let compiled = crate::semantics::CompiledAtt::new(&h.a);
    let steps = Default::default();
    let unary = e.unary();
    // bottom-up states of the correspondence automaton per symbol
    let step = |s: &Symbol, below: &BTreeSet<Symbol>| -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for l in below {
            for r in corr.rule(s, std::slice::from_ref(l)) {
                out.insert(r.state.clone());
            }
        }
        out
    };
    let mut count = 0;
    let mut stack: Vec<(Vec<Symbol>, Suffix, BTreeSet<Symbol>)> = Vec::new();
    for l in e.leaves() {
        let st: BTreeSet<Symbol> = corr.rule(&l, &[]).iter().map(|r| r.state.clone()).collect();
        if let (Some(s), false) = (e.suffix_leaf(&l), st.is_empty()) {
            stack.push((vec![l], s, st));
        }
    }
    let root = e.root_context();
    while let Some((word, suf, st)) = stack.pop() {
        if st.iter().any(|l| corr.finals.contains(l)) {
            if let Some(out) = e.combine(&root, &suf) {
                count += 1;
                let t = word_to_tree(&word);
                let p = decode_prefix(&t, &sigma_b).expect("decodable");
                let filled = fill_with_reps(&p, &kid_states, &reps);
                let want = Some(word_to_tree(&out));
                let got = compiled.eval(&filled, &steps).into_option();
                if got != want {
                    return Err((filled, want, got));
                }
            }
        }
        if word.len() < max_len {
            for u in &unary {
                let st2 = step(u, &st);
                if st2.is_empty() {
                    continue;
                }
                let Some(s2) = e.suffix_ext(u, &suf) else { continue };
                let mut w2 = vec![u.clone()];
                w2.extend(word.iter().cloned());
                stack.push((w2, s2, st2));
            }
        }
    }
    Ok(count)
}

fn fill_with_reps(p: &Prefix, kid_states: &BTreeMap<Symbol, Vec<Symbol>>, reps: &BTreeMap<Symbol, Tree>) -> Tree {
    match p {
        Prefix::Hole => unreachable!("holes are filled by the parent"),
        Prefix::Node(s, ch) => Tree::new(
            s.clone(),
            ch.iter()
                .enumerate()
                .map(|(i, c)| match c {
                    Prefix::Hole => reps[&kid_states[s][i]].clone(),
                    _ => fill_with_reps(c, kid_states, reps),
                })
                .collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_examples() {
        let sigma = RankedAlphabet::from_pairs([("f", 2), ("g", 1), ("e", 0)]);
        let w = word_to_tree(&[sym("f@2"), sym("f@1"), sym("f@1"), sym("e")]);
        assert_eq!(decode_prefix(&w, &sigma).unwrap().to_string(), "f(?,f(f(e,?),?))");
        let w = word_to_tree(&[sym("f@1"), sym("g@1"), sym("e")]);
        assert_eq!(decode_prefix(&w, &sigma).unwrap().to_string(), "f(g(e),?)");
        let leaf = Tree::leaf("e");
        assert_eq!(encode_prefix(&leaf, &NodeAddr::root()).unwrap(), leaf);
        let s = Tree::parse_unchecked("f(e,f(f(e,e),e))").unwrap();
        let enc = encode_prefix(&s, &NodeAddr(vec![2, 1, 1])).unwrap();
        assert_eq!(tree_to_word(&enc), vec![sym("f@2"), sym("f@1"), sym("f@1"), sym("e")]);
        assert!(encode_prefix(&s, &NodeAddr(vec![3])).is_err());
        assert!(encode_prefix(&s, &NodeAddr(vec![2])).is_err());
    }

    #[test]
    fn affine_shapes() {
        let w = |s: &str| s.chars().map(|c| sym(&c.to_string())).collect::<Vec<_>>();
        assert!(fits_one_loop(&[w("pxs"), w("pxxs"), w("pxxxs"), w("pxxxxs")]));
        assert!(!fits_one_loop(&[w("ab"), w("ba"), w("abab"), w("baba")]));
        // reversal of a^n b^m is b^m a^n: one loop each fits, two loops do not
        let mut outs = Vec::new();
        for n in 1..=3 {
            for m in 1..=3 {
                outs.push([w(&"b".repeat(m)), w(&"a".repeat(n)), w("e")].concat());
            }
        }
        assert!(!fits_two_loops(&outs));
        let mut outs = Vec::new();
        for n in 1..=3 {
            for m in 1..=3 {
                outs.push([w(&"a".repeat(n)), w(&"b".repeat(m)), w("e")].concat());
            }
        }
        assert!(fits_two_loops(&outs));
    }
}
