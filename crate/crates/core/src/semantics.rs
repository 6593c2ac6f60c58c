//! Derivations, normal forms and evaluation of every transducer kind.

use crate::model::{AttSpec, Decl, Lhs, PairedSpec, RelabelingSpec, Rhs, TdRhs, TdttSpec};
use crate::trees::{NodeAddr, Symbol, Tree};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepBudget {
    pub max_steps: usize,
    pub max_enumeration: usize,
}

impl Default for StepBudget {
    fn default() -> Self {
        StepBudget {
            max_steps: 1_000_000,
            max_enumeration: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Output(Tree),
    NoOutput,
    BudgetExhausted,
}

impl Outcome {
    pub fn output(&self) -> Option<&Tree> {
        match self {
            Outcome::Output(t) => Some(t),
            _ => None,
        }
    }
    pub fn into_option(self) -> Option<Tree> {
        match self {
            Outcome::Output(t) => Some(t),
            _ => None,
        }
    }
}

/// Attribute occurrence α(v).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occ {
    pub attr: Symbol,
    pub node: NodeAddr,
}

impl fmt::Display for Occ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.attr, self.node)
    }
}

/// Sentential form: output tree whose leaves may be attribute occurrences.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Form {
    Out(Symbol, Vec<Form>),
    Occ(Occ),
}

impl Form {
    pub fn occ(attr: &str, node: NodeAddr) -> Form {
        Form::Occ(Occ {
            attr: Symbol::new(attr),
            node,
        })
    }
    pub fn from_tree(t: &Tree) -> Form {
        Form::Out(t.label().clone(), t.children().iter().map(Form::from_tree).collect())
    }
    pub fn to_tree(&self) -> Option<Tree> {
        match self {
            Form::Out(s, ch) => Some(Tree::new(
                s.clone(),
                ch.iter().map(Form::to_tree).collect::<Option<Vec<_>>>()?,
            )),
            Form::Occ(_) => None,
        }
    }
    pub fn is_ground(&self) -> bool {
        match self {
            Form::Out(_, ch) => ch.iter().all(Form::is_ground),
            Form::Occ(_) => false,
        }
    }
    pub fn occurrences(&self) -> Vec<&Occ> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Form, out: &mut Vec<&'a Occ>) {
            match f {
                Form::Out(_, ch) => ch.iter().for_each(|c| go(c, out)),
                Form::Occ(o) => out.push(o),
            }
        }
        go(self, &mut out);
        out
    }
    pub fn size(&self) -> usize {
        match self {
            Form::Out(_, ch) => 1 + ch.iter().map(Form::size).sum::<usize>(),
            Form::Occ(_) => 1,
        }
    }
    pub fn height(&self) -> usize {
        match self {
            Form::Out(_, ch) => 1 + ch.iter().map(Form::height).max().unwrap_or(0),
            Form::Occ(_) => 1,
        }
    }
    /// Replaces the first occurrence equal to `o` (pre-order) by `by`.
    fn replace_first(&self, o: &Occ, by: &Form, done: &mut bool) -> Form {
        if *done {
            return self.clone();
        }
        match self {
            Form::Occ(x) if x == o => {
                *done = true;
                by.clone()
            }
            Form::Occ(_) => self.clone(),
            Form::Out(s, ch) => Form::Out(s.clone(), ch.iter().map(|c| c.replace_first(o, by, done)).collect()),
        }
    }
    /// Substitutes every occurrence via `f`.
    pub fn substitute(&self, f: &mut dyn FnMut(&Occ) -> Form) -> Form {
        match self {
            Form::Occ(o) => f(o),
            Form::Out(s, ch) => Form::Out(s.clone(), ch.iter().map(|c| c.substitute(f)).collect()),
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Form::Occ(o) => write!(f, "{o}"),
            Form::Out(s, ch) => {
                write!(f, "{s}")?;
                if !ch.is_empty() {
                    f.write_str("(")?;
                    for (i, c) in ch.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{c}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for Occ {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Serialize for Form {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

// ------------------------------------------------------------ linear size increase

static LSI_CHECKED: AtomicUsize = AtomicUsize::new(0);
static LSI_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// (checked evaluations, violations) of the linear size bound so far in this process.
pub fn lsi_stats() -> (usize, usize) {
    (LSI_CHECKED.load(Ordering::Relaxed), LSI_VIOLATIONS.load(Ordering::Relaxed))
}

fn record_lsi(a: &AttSpec, input: &Tree, output: &Tree) {
    if !a.output.is_monadic() {
        return;
    }
    let bound = a.max_rhs_size() * a.attr_count().max(1) * input.size();
    LSI_CHECKED.fetch_add(1, Ordering::Relaxed);
    if output.size() > bound {
        LSI_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
        debug_assert!(false, "linear size bound violated: {} > {bound}", output.size());
    }
}

// ------------------------------------------------------------ compiled att

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
enum CRhs {
    Out(Symbol, Vec<CRhs>),
    Syn(u32, u32),
    Inh(u32),
}

/// Integer-indexed rule table for fast evaluation.
#[derive(Clone, Debug)]
pub struct CompiledAtt {
    pub spec: AttSpec,
    sym_ix: HashMap<Symbol, u32>,
    attrs: Vec<Symbol>,
    attr_ix: HashMap<Symbol, u32>,
    is_syn: Vec<bool>,
    width: usize,
    table: Vec<Vec<CRhs>>,
    root_sym: u32,
    monadic_rhs: bool,
}

/// Flattened input tree (optionally under the root marker).
#[derive(Clone, Debug)]
pub struct Host {
    sym: Vec<u32>,
    parent: Vec<u32>,
    cidx: Vec<u32>,
    first_kid: Vec<u32>,
    marked: bool,
}

impl Host {
    pub fn len(&self) -> usize {
        self.sym.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sym.is_empty()
    }
    fn kid(&self, n: u32, j: u32) -> u32 {
        self.first_kid[n as usize] + j - 1
    }
    pub fn addr(&self, n: u32) -> NodeAddr {
        let mut v = Vec::new();
        let mut cur = n;
        while self.parent[cur as usize] != NONE {
            v.push(self.cidx[cur as usize] as usize);
            cur = self.parent[cur as usize];
        }
        v.reverse();
        NodeAddr(v)
    }
    pub fn index_of(&self, addr: &NodeAddr) -> Option<u32> {
        let mut cur = 0u32;
        for &i in &addr.0 {
            let k = self.rank(cur);
            if i == 0 || i > k {
                return None;
            }
            cur = self.kid(cur, i as u32);
        }
        Some(cur)
    }
    fn rank(&self, n: u32) -> usize {
        // children are consecutive starting at first_kid; count via parent links
        let start = self.first_kid[n as usize];
        if start == NONE {
            return 0;
        }
        let mut k = 0;
        while (start as usize + k) < self.parent.len() && self.parent[start as usize + k] == n {
            k += 1;
        }
        k
    }
    pub fn is_marked(&self) -> bool {
        self.marked
    }
}

/// Result of following the single active occurrence of a monadic derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tail {
    Ground(Symbol),
    Stuck { attr: Symbol, node: NodeAddr },
    Diverges,
    Budget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreadResult {
    pub out: Vec<Symbol>,
    pub tail: Tail,
    pub steps: usize,
}

impl CompiledAtt {
    pub fn new(a: &AttSpec) -> Self {
        let mut sym_ix = HashMap::new();
        for (i, (s, _)) in a.input.iter().enumerate() {
            sym_ix.insert(s.clone(), i as u32);
        }
        let root_sym = sym_ix.len() as u32;
        sym_ix.insert(Symbol::root(), root_sym);
        let mut attrs = Vec::new();
        let mut is_syn = Vec::new();
        let mut attr_ix = HashMap::new();
        for s in &a.syn {
            attr_ix.insert(s.clone(), attrs.len() as u32);
            attrs.push(s.clone());
            is_syn.push(true);
        }
        for s in &a.inh {
            attr_ix.insert(s.clone(), attrs.len() as u32);
            attrs.push(s.clone());
            is_syn.push(false);
        }
        let width = a.input.max_rank().max(1) + 1;
        let nsyms = sym_ix.len();
        let mut table = vec![Vec::new(); nsyms * attrs.len().max(1) * width];
        let mut monadic_rhs = true;
        fn conv(r: &Rhs, ix: &HashMap<Symbol, u32>, mono: &mut bool) -> CRhs {
            match r {
                Rhs::Out(s, ch) => {
                    if ch.len() > 1 {
                        *mono = false;
                    }
                    CRhs::Out(s.clone(), ch.iter().map(|c| conv(c, ix, mono)).collect())
                }
                Rhs::Syn(a, i) => CRhs::Syn(ix[a], *i as u32),
                Rhs::Inh(b) => CRhs::Inh(ix[b]),
            }
        }
        for (sym, lhs, rhs) in a.all_rules() {
            let Some(&si) = sym_ix.get(sym) else { continue };
            let (ai, ci) = match lhs {
                Lhs::Syn(x) => (attr_ix[x], 0),
                Lhs::Inh(x, i) => (attr_ix[x], *i),
            };
            let slot = (si as usize * attrs.len() + ai as usize) * width + ci;
            table[slot].push(conv(rhs, &attr_ix, &mut monadic_rhs));
        }
        CompiledAtt {
            spec: a.clone(),
            sym_ix,
            attrs,
            attr_ix,
            is_syn,
            width,
            table,
            root_sym,
            monadic_rhs,
        }
    }

    pub fn attr_id(&self, a: &Symbol) -> Option<u32> {
        self.attr_ix.get(a).copied()
    }

    pub fn host(&self, s: &Tree, marked: bool) -> Host {
        let mut h = Host {
            sym: Vec::new(),
            parent: Vec::new(),
            cidx: Vec::new(),
            first_kid: Vec::new(),
            marked,
        };
        let mut queue: VecDeque<&Tree> = VecDeque::new();
        if marked {
            h.sym.push(self.root_sym);
            h.parent.push(NONE);
            h.cidx.push(0);
            h.first_kid.push(1);
            h.sym.push(self.sym_ix.get(s.label()).copied().unwrap_or(NONE));
            h.parent.push(0);
            h.cidx.push(1);
            h.first_kid.push(NONE);
        } else {
            h.sym.push(self.sym_ix.get(s.label()).copied().unwrap_or(NONE));
            h.parent.push(NONE);
            h.cidx.push(0);
            h.first_kid.push(NONE);
        }
        queue.push_back(s);
        let mut idx = if marked { 1u32 } else { 0u32 };
        // BFS assigns consecutive indices to siblings
        let mut order: VecDeque<u32> = VecDeque::new();
        order.push_back(idx);
        while let Some(t) = queue.pop_front() {
            let me = order.pop_front().unwrap();
            if !t.children().is_empty() {
                h.first_kid[me as usize] = h.sym.len() as u32;
            }
            for (j, c) in t.children().iter().enumerate() {
                h.sym.push(self.sym_ix.get(c.label()).copied().unwrap_or(NONE));
                h.parent.push(me);
                h.cidx.push(j as u32 + 1);
                h.first_kid.push(NONE);
                idx = h.sym.len() as u32 - 1;
                order.push_back(idx);
                queue.push_back(c);
            }
        }
        h
    }

    /// Host for the monadic word `labels` (root first), under `#` when `marked`.
    pub fn word_host(&self, labels: &[Symbol], marked: bool) -> Host {
        let n = labels.len() + marked as usize;
        let mut h = Host {
            sym: Vec::with_capacity(n),
            parent: Vec::with_capacity(n),
            cidx: Vec::with_capacity(n),
            first_kid: Vec::with_capacity(n),
            marked,
        };
        if marked {
            h.sym.push(self.root_sym);
            h.parent.push(NONE);
            h.cidx.push(0);
            h.first_kid.push(1);
        }
        for (i, l) in labels.iter().enumerate() {
            let me = h.sym.len() as u32;
            h.sym.push(self.sym_ix.get(l).copied().unwrap_or(NONE));
            h.parent.push(if me == 0 { NONE } else { me - 1 });
            h.cidx.push(if me == 0 { 0 } else { 1 });
            h.first_kid.push(if i + 1 < labels.len() { me + 1 } else { NONE });
        }
        h
    }

    fn rules_for(&self, host: &Host, attr: u32, node: u32) -> (Option<&[CRhs]>, u32) {
        let nattrs = self.attrs.len();
        if self.is_syn[attr as usize] {
            let s = host.sym[node as usize];
            if s == NONE {
                return (None, node);
            }
            let slot = (s as usize * nattrs + attr as usize) * self.width;
            (Some(&self.table[slot]), node)
        } else {
            let p = host.parent[node as usize];
            if p == NONE {
                return (None, node);
            }
            let s = host.sym[p as usize];
            let ci = host.cidx[node as usize] as usize;
            if s == NONE || ci >= self.width {
                return (None, p);
            }
            let slot = (s as usize * nattrs + attr as usize) * self.width + ci;
            (Some(&self.table[slot]), p)
        }
    }

    /// Follows a monadic deterministic derivation from α(node).
    pub fn thread(&self, host: &Host, attr: u32, node: u32, max_steps: usize) -> ThreadResult {
        let mut out = Vec::new();
        let mut seen: HashSet<(u32, u32)> = HashSet::new();
        let (mut a, mut n) = (attr, node);
        let mut steps = 0;
        loop {
            if !seen.insert((a, n)) {
                return ThreadResult { out, tail: Tail::Diverges, steps };
            }
            let (rules, base) = self.rules_for(host, a, n);
            let Some(r) = rules.and_then(|r| r.first()) else {
                return ThreadResult {
                    out,
                    tail: Tail::Stuck {
                        attr: self.attrs[a as usize].clone(),
                        node: host.addr(n),
                    },
                    steps,
                };
            };
            if steps >= max_steps {
                return ThreadResult { out, tail: Tail::Budget, steps };
            }
            steps += 1;
            let mut cur = r;
            loop {
                match cur {
                    CRhs::Out(s, ch) => {
                        if ch.is_empty() {
                            out.push(s.clone());
                            return ThreadResult {
                                out,
                                tail: Tail::Ground(s.clone()),
                                steps,
                            };
                        }
                        out.push(s.clone());
                        cur = &ch[0];
                    }
                    CRhs::Syn(x, j) => {
                        a = *x;
                        n = host.kid(base, *j);
                        break;
                    }
                    CRhs::Inh(x) => {
                        a = *x;
                        n = base;
                        break;
                    }
                }
            }
        }
    }

    /// Deterministic normal form of α(node) for arbitrary output ranks.
    fn value(
        &self,
        host: &Host,
        attr: u32,
        node: u32,
        memo: &mut HashMap<(u32, u32), Form>,
        active: &mut HashSet<(u32, u32)>,
        steps: &mut usize,
        max_steps: usize,
    ) -> Result<Form, Tail> {
        if let Some(f) = memo.get(&(attr, node)) {
            return Ok(f.clone());
        }
        if !active.insert((attr, node)) {
            return Err(Tail::Diverges);
        }
        let (rules, base) = self.rules_for(host, attr, node);
        let res = match rules.and_then(|r| r.first()) {
            None => Ok(Form::Occ(Occ {
                attr: self.attrs[attr as usize].clone(),
                node: host.addr(node),
            })),
            Some(r) => {
                if *steps >= max_steps {
                    return Err(Tail::Budget);
                }
                *steps += 1;
                self.instantiate(host, r, base, memo, active, steps, max_steps)
            }
        };
        active.remove(&(attr, node));
        if let Ok(f) = &res {
            memo.insert((attr, node), f.clone());
        }
        res
    }

    #[allow(clippy::too_many_arguments)]
    fn instantiate(
        &self,
        host: &Host,
        r: &CRhs,
        base: u32,
        memo: &mut HashMap<(u32, u32), Form>,
        active: &mut HashSet<(u32, u32)>,
        steps: &mut usize,
        max_steps: usize,
    ) -> Result<Form, Tail> {
        match r {
            CRhs::Out(s, ch) => {
                let mut v = Vec::with_capacity(ch.len());
                for c in ch {
                    v.push(self.instantiate(host, c, base, memo, active, steps, max_steps)?);
                }
                Ok(Form::Out(s.clone(), v))
            }
            CRhs::Syn(x, j) => self.value(host, *x, host.kid(base, *j), memo, active, steps, max_steps),
            CRhs::Inh(x) => self.value(host, *x, base, memo, active, steps, max_steps),
        }
    }

    /// Normal form of α(node); `Err` on divergence or budget.
    pub fn nf_occ(&self, host: &Host, attr: u32, node: u32, max_steps: usize) -> Result<Form, Tail> {
        if self.monadic_rhs {
            let r = self.thread(host, attr, node, max_steps);
            let tail = match r.tail {
                Tail::Ground(_) => None,
                Tail::Stuck { attr, node } => Some(Form::Occ(Occ { attr, node })),
                other => return Err(other),
            };
            return Ok(build_monadic(&r.out, tail));
        }
        let mut memo = HashMap::new();
        let mut active = HashSet::new();
        let mut steps = 0;
        self.value(host, attr, node, &mut memo, &mut active, &mut steps, max_steps)
    }

    /// Evaluates the translation on `s` (under the root marker).
    pub fn eval(&self, s: &Tree, budget: &StepBudget) -> Outcome {
        let host = self.host(s, true);
        let Some(init) = self.attr_id(&self.spec.init) else {
            return Outcome::NoOutput;
        };
        let res = match self.nf_occ(&host, init, 1, budget.max_steps) {
            Ok(f) => match f.to_tree() {
                Some(t) => Outcome::Output(t),
                None => Outcome::NoOutput,
            },
            Err(Tail::Budget) => Outcome::BudgetExhausted,
            Err(_) => Outcome::NoOutput,
        };
        if let Outcome::Output(t) = &res {
            record_lsi(&self.spec, s, t);
        }
        res
    }

    /// Evaluates on a monadic word; fast path for word transducers.
    pub fn eval_word(&self, labels: &[Symbol], max_steps: usize) -> Option<Vec<Symbol>> {
        let host = self.word_host(labels, true);
        let init = self.attr_id(&self.spec.init)?;
        let r = self.thread(&host, init, 1, max_steps);
        match r.tail {
            Tail::Ground(_) => Some(r.out),
            _ => None,
        }
    }
}

fn build_monadic(out: &[Symbol], tail: Option<Form>) -> Form {
    let mut f = match tail {
        Some(t) => t,
        None => {
            let (last, init) = out.split_last().expect("ground output is non-empty");
            let mut f = Form::Out(last.clone(), Vec::new());
            for s in init.iter().rev() {
                f = Form::Out(s.clone(), vec![f]);
            }
            return f;
        }
    };
    for s in out.iter().rev() {
        f = Form::Out(s.clone(), vec![f]);
    }
    f
}

// ------------------------------------------------------------ att operations

/// Label of node `v` in `s^#` (the empty address is the root marker).
fn marked_label<'a>(s: &'a Tree, v: &NodeAddr) -> Option<&'a Symbol> {
    static ROOT: std::sync::OnceLock<Symbol> = std::sync::OnceLock::new();
    if v.is_root() {
        return Some(ROOT.get_or_init(Symbol::root));
    }
    if v.0[0] != 1 {
        return None;
    }
    s.label_at(&NodeAddr(v.0[1..].to_vec())).ok()
}

fn label_in(s: &Tree, v: &NodeAddr, marked: bool) -> Option<Symbol> {
    if marked {
        marked_label(s, v).cloned()
    } else {
        s.label_at(v).ok().cloned()
    }
}

/// Rule applications available to occurrence `o`: (description, replacement).
fn expansions(a: &AttSpec, s: &Tree, o: &Occ, marked: bool) -> Vec<(String, Form)> {
    let (sym, lhs, base) = if a.is_syn(&o.attr) {
        match label_in(s, &o.node, marked) {
            Some(l) => (l, Lhs::Syn(o.attr.clone()), o.node.clone()),
            None => return Vec::new(),
        }
    } else {
        let Some((p, i)) = o.node.parent() else { return Vec::new() };
        match label_in(s, &p, marked) {
            Some(l) => (l, Lhs::Inh(o.attr.clone(), i), p),
            None => return Vec::new(),
        }
    };
    a.rhs(&sym, &lhs)
        .iter()
        .map(|r| {
            let f = rhs_at(r, &base);
            (format!("{sym}: {lhs} -> {r}"), f)
        })
        .collect()
}

/// ξ[π ← v].
pub fn rhs_at(r: &Rhs, v: &NodeAddr) -> Form {
    match r {
        Rhs::Out(s, ch) => Form::Out(s.clone(), ch.iter().map(|c| rhs_at(c, v)).collect()),
        Rhs::Syn(a, i) => Form::Occ(Occ {
            attr: a.clone(),
            node: v.child(*i),
        }),
        Rhs::Inh(b) => Form::Occ(Occ {
            attr: b.clone(),
            node: v.clone(),
        }),
    }
}

/// One ⇒_{A,s^#} step from `form`, over every occurrence and every rule.
pub fn derive_step(a: &AttSpec, s: &Tree, form: &Form) -> Vec<Form> {
    derive_step_in(a, s, form, true)
}

/// As `derive_step`, over `s` itself when `marked` is false.
pub fn derive_step_in(a: &AttSpec, s: &Tree, form: &Form, marked: bool) -> Vec<Form> {
    let mut out = Vec::new();
    let occs: Vec<Occ> = form.occurrences().into_iter().cloned().collect();
    for (k, o) in occs.iter().enumerate() {
        for (_, rep) in expansions(a, s, o, marked) {
            // replace the k-th occurrence only
            let mut idx = 0;
            let f = form.substitute(&mut |x| {
                let r = if idx == k { rep.clone() } else { Form::Occ(x.clone()) };
                idx += 1;
                r
            });
            if !out.contains(&f) {
                out.push(f);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NfResult {
    Form(Form),
    Diverges,
    BudgetExhausted,
}

/// nf(⇒_{A,s}, start) over `s` without the root marker (deterministic att).
pub fn nf(a: &AttSpec, s: &Tree, start: &Form, budget: &StepBudget) -> NfResult {
    let c = CompiledAtt::new(a);
    nf_compiled(&c, s, start, budget)
}

pub fn nf_compiled(c: &CompiledAtt, s: &Tree, start: &Form, budget: &StepBudget) -> NfResult {
    let host = c.host(s, false);
    let mut failure = None;
    let f = start.substitute(&mut |o| {
        let node = host.index_of(&o.node);
        match (c.attr_id(&o.attr), node) {
            (Some(ai), Some(n)) => match c.nf_occ(&host, ai, n, budget.max_steps) {
                Ok(f) => f,
                Err(t) => {
                    failure.get_or_insert(t);
                    Form::Occ(o.clone())
                }
            },
            _ => Form::Occ(o.clone()),
        }
    });
    match failure {
        Some(Tail::Budget) => NfResult::BudgetExhausted,
        Some(_) => NfResult::Diverges,
        None => NfResult::Form(f),
    }
}

pub fn evaluate_att(a: &AttSpec, s: &Tree, budget: &StepBudget) -> Outcome {
    CompiledAtt::new(a).eval(s, budget)
}

/// All ground outputs reachable within budget; flag is true iff the search closed.
pub fn enumerate_att(a: &AttSpec, s: &Tree, budget: &StepBudget) -> (BTreeSet<Tree>, bool) {
    let start = Form::Occ(Occ {
        attr: a.init.clone(),
        node: NodeAddr(vec![1]),
    });
    let mut seen: HashSet<Form> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut outs = BTreeSet::new();
    seen.insert(start.clone());
    queue.push_back(start);
    let mut exhaustive = true;
    while let Some(f) = queue.pop_front() {
        let occs = f.occurrences();
        let Some(first) = occs.first() else {
            outs.insert(f.to_tree().expect("ground"));
            continue;
        };
        let first = (*first).clone();
        for (_, rep) in expansions(a, s, &first, true) {
            let mut done = false;
            let g = f.replace_first(&first, &rep, &mut done);
            if seen.contains(&g) {
                continue;
            }
            if seen.len() >= budget.max_enumeration {
                exhaustive = false;
                continue;
            }
            seen.insert(g.clone());
            queue.push_back(g);
        }
    }
    (outs, exhaustive)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub node: Option<NodeAddr>,
    pub rule: Option<String>,
    pub form: Form,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivationTrace {
    pub steps: Vec<TraceStep>,
    pub complete: bool,
}

impl DerivationTrace {
    pub fn to_json_lines(&self) -> String {
        self.steps
            .iter()
            .map(|s| serde_json::to_string(s).expect("serializable"))
            .collect::<Vec<_>>()
            .join("\n")
    }
    pub fn last(&self) -> &Form {
        &self.steps.last().expect("non-empty").form
    }
}

/// Leftmost-occurrence derivation using the first applicable rule.
pub fn trace_att(a: &AttSpec, s: &Tree, budget: &StepBudget) -> DerivationTrace {
    let mut form = Form::Occ(Occ {
        attr: a.init.clone(),
        node: NodeAddr(vec![1]),
    });
    let mut steps = vec![TraceStep {
        step: 0,
        node: None,
        rule: None,
        form: form.clone(),
    }];
    let mut seen = HashSet::new();
    loop {
        let Some(o) = form.occurrences().first().map(|o| (*o).clone()) else {
            return DerivationTrace { steps, complete: true };
        };
        if !seen.insert(o.clone()) || steps.len() > budget.max_steps {
            return DerivationTrace { steps, complete: false };
        }
        let Some((rule, rep)) = expansions(a, s, &o, true).into_iter().next() else {
            return DerivationTrace { steps, complete: false };
        };
        let mut done = false;
        form = form.replace_first(&o, &rep, &mut done);
        steps.push(TraceStep {
            step: steps.len(),
            node: Some(o.node.clone()),
            rule: Some(rule),
            form: form.clone(),
        });
    }
}

// ------------------------------------------------------------ relabelings

/// Deterministic bottom-up run: root state and relabeled tree, or `None` on reject.
pub fn run_relabeling(b: &RelabelingSpec, s: &Tree) -> Option<(Symbol, Tree)> {
    let mut kids = Vec::with_capacity(s.rank());
    let mut states = Vec::with_capacity(s.rank());
    for c in s.children() {
        let (p, t) = run_relabeling(b, c)?;
        states.push(p);
        kids.push(t);
    }
    let r = b.rule(s.label(), &states).first()?;
    Some((r.state.clone(), Tree::new(r.out.clone(), kids)))
}

/// Translation of a relabeling: defined iff the root state is final.
pub fn relabel(b: &RelabelingSpec, s: &Tree) -> Option<Tree> {
    run_relabeling(b, s).filter(|(p, _)| b.finals.contains(p)).map(|x| x.1)
}

/// States reachable at the root by a (possibly nondeterministic) run.
pub fn automaton_states(b: &RelabelingSpec, s: &Tree) -> BTreeSet<Symbol> {
    let child_sets: Vec<BTreeSet<Symbol>> = s.children().iter().map(|c| automaton_states(b, c)).collect();
    let mut out = BTreeSet::new();
    for ((sym, ch), rs) in b.rules.range((s.label().clone(), Vec::new())..) {
        if sym != s.label() {
            break;
        }
        if ch.len() == child_sets.len() && ch.iter().zip(&child_sets).all(|(p, set)| set.contains(p)) {
            out.extend(rs.iter().map(|r| r.state.clone()));
        }
    }
    out
}

pub fn accepts(b: &RelabelingSpec, s: &Tree) -> bool {
    automaton_states(b, s).iter().any(|p| b.finals.contains(p))
}

// ------------------------------------------------------------ top-down

fn td_eval(t: &TdttSpec, q: &Symbol, s: &Tree, steps: &mut usize, max: usize) -> Result<Option<Tree>, ()> {
    let Some(r) = t.rhs(q, s.label()).first() else { return Ok(None) };
    if *steps >= max {
        return Err(());
    }
    *steps += 1;
    td_inst(t, r, s, steps, max)
}

fn td_inst(t: &TdttSpec, r: &TdRhs, s: &Tree, steps: &mut usize, max: usize) -> Result<Option<Tree>, ()> {
    match r {
        TdRhs::Call(q, i) => td_eval(t, q, &s.children()[i - 1], steps, max),
        TdRhs::Out(sym, ch) => {
            let mut v = Vec::with_capacity(ch.len());
            for c in ch {
                match td_inst(t, c, s, steps, max)? {
                    Some(x) => v.push(x),
                    None => return Ok(None),
                }
            }
            Ok(Some(Tree::new(sym.clone(), v)))
        }
    }
}

/// Deterministic top-down run from the initial state.
pub fn run_tdtt(t: &TdttSpec, s: &Tree, budget: &StepBudget) -> Outcome {
    run_tdtt_from(t, &t.init, s, budget)
}

pub fn run_tdtt_from(t: &TdttSpec, q: &Symbol, s: &Tree, budget: &StepBudget) -> Outcome {
    let mut steps = 0;
    match td_eval(t, q, s, &mut steps, budget.max_steps) {
        Ok(Some(x)) => Outcome::Output(x),
        Ok(None) => Outcome::NoOutput,
        Err(()) => Outcome::BudgetExhausted,
    }
}

fn td_all(t: &TdttSpec, q: &Symbol, s: &Tree, cap: usize, hit: &mut bool) -> BTreeSet<Tree> {
    let mut out = BTreeSet::new();
    for r in t.rhs(q, s.label()) {
        for x in td_all_inst(t, r, s, cap, hit) {
            if out.len() >= cap {
                *hit = true;
                break;
            }
            out.insert(x);
        }
    }
    out
}

fn td_all_inst(t: &TdttSpec, r: &TdRhs, s: &Tree, cap: usize, hit: &mut bool) -> Vec<Tree> {
    match r {
        TdRhs::Call(q, i) => td_all(t, q, &s.children()[i - 1], cap, hit).into_iter().collect(),
        TdRhs::Out(sym, ch) => {
            let mut acc: Vec<Vec<Tree>> = vec![Vec::new()];
            for c in ch {
                let opts = td_all_inst(t, c, s, cap, hit);
                let mut next = Vec::new();
                for prefix in &acc {
                    for o in &opts {
                        if next.len() >= cap {
                            *hit = true;
                            break;
                        }
                        let mut p = prefix.clone();
                        p.push(o.clone());
                        next.push(p);
                    }
                }
                acc = next;
            }
            acc.into_iter().map(|v| Tree::new(sym.clone(), v)).collect()
        }
    }
}

pub fn tdtt_outputs(t: &TdttSpec, s: &Tree, budget: &StepBudget) -> (BTreeSet<Tree>, bool) {
    let mut hit = false;
    let out = td_all(t, &t.init, s, budget.max_enumeration, &mut hit);
    (out, !hit)
}

// ------------------------------------------------------------ dispatch

/// Output of a look-around on `s`.
pub fn run_lookaround(u: &crate::model::LookAround, s: &Tree, budget: &StepBudget) -> Option<Tree> {
    let r = relabel(&u.b, s)?;
    run_tdtt(&u.l, &r, budget).into_option()
}

pub fn evaluate(d: &Decl, s: &Tree, budget: &StepBudget) -> Outcome {
    match d {
        Decl::Att(a) => evaluate_att(a, s, budget),
        Decl::Tdtt(t) => run_tdtt(t, s, budget),
        Decl::Relabeling(b) => relabel(b, s).map(Outcome::Output).unwrap_or(Outcome::NoOutput),
        Decl::Pair(p) => evaluate_pair(p, s, budget),
    }
}

pub fn evaluate_pair(p: &PairedSpec, s: &Tree, budget: &StepBudget) -> Outcome {
    match p {
        PairedSpec::AttR { b, a, .. } => match relabel(b, s) {
            Some(r) => evaluate_att(a, &r, budget),
            None => Outcome::NoOutput,
        },
        PairedSpec::DtR { b, t, .. } => match relabel(b, s) {
            Some(r) => run_tdtt(t, &r, budget),
            None => Outcome::NoOutput,
        },
        PairedSpec::LookAround(u) => run_lookaround(u, s, budget).map(Outcome::Output).unwrap_or(Outcome::NoOutput),
        PairedSpec::AttU { u, a, .. } => match run_lookaround(u, s, budget) {
            Some(r) => evaluate_att(a, &r, budget),
            None => Outcome::NoOutput,
        },
    }
}

pub fn enumerate_outputs(d: &Decl, s: &Tree, budget: &StepBudget) -> (BTreeSet<Tree>, bool) {
    let single = |o: Outcome| match o {
        Outcome::Output(t) => ([t].into_iter().collect(), true),
        Outcome::NoOutput => (BTreeSet::new(), true),
        Outcome::BudgetExhausted => (BTreeSet::new(), false),
    };
    match d {
        Decl::Att(a) => enumerate_att(a, s, budget),
        Decl::Tdtt(t) => tdtt_outputs(t, s, budget),
        Decl::Relabeling(_) => single(evaluate(d, s, budget)),
        Decl::Pair(PairedSpec::AttR { b, a, .. }) => match relabel(b, s) {
            Some(r) => enumerate_att(a, &r, budget),
            None => (BTreeSet::new(), true),
        },
        Decl::Pair(PairedSpec::DtR { b, t, .. }) => match relabel(b, s) {
            Some(r) => tdtt_outputs(t, &r, budget),
            None => (BTreeSet::new(), true),
        },
        Decl::Pair(PairedSpec::AttU { u, a, .. }) => match run_lookaround(u, s, budget) {
            Some(r) => enumerate_att(a, &r, budget),
            None => (BTreeSet::new(), true),
        },
        Decl::Pair(p @ PairedSpec::LookAround(_)) => single(evaluate_pair(p, s, budget)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_spec;

    fn a1() -> AttSpec {
        let Decl::Att(a) = parse_spec(
            "att A1
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
",
        )
        .unwrap() else {
            panic!()
        };
        a
    }

    #[test]
    fn a1_full_tree() {
        let s = Tree::parse_unchecked("f(f(e,e),f(e,e))").unwrap();
        let out = evaluate_att(&a1(), &s, &StepBudget::default());
        assert_eq!(out.output().unwrap().to_string(), "g(g(g(g(e))))");
        let start = Form::occ("a", NodeAddr(vec![1]));
        assert_eq!(derive_step(&a1(), &s, &start), vec![Form::occ("a", NodeAddr(vec![1, 1]))]);
        let tr = trace_att(&a1(), &s, &StepBudget::default());
        assert!(tr.complete);
        assert_eq!(tr.last().to_string(), "g(g(g(g(e))))");
    }

    #[test]
    fn nf_without_marker() {
        let s = Tree::leaf("e");
        let r = nf(&a1(), &s, &Form::occ("a", NodeAddr::root()), &StepBudget::default());
        assert_eq!(r, NfResult::Form(Form::Out("g".into(), vec![Form::occ("b", NodeAddr::root())])));
    }

    #[test]
    fn general_engine_agrees_with_thread() {
        let a = a1();
        let c = CompiledAtt::new(&a);
        let s = Tree::parse_unchecked("f(f(e,f(e,e)),e)").unwrap();
        let host = c.host(&s, true);
        let mut memo = HashMap::new();
        let mut active = HashSet::new();
        let mut steps = 0;
        let g = c.value(&host, 0, 1, &mut memo, &mut active, &mut steps, 1000).unwrap();
        assert_eq!(g.to_tree().unwrap(), evaluate_att(&a, &s, &StepBudget::default()).into_option().unwrap());
    }
}
