//! Transducer declarations, the line-oriented spec format and static validation.

use crate::trees::{lex, RankedAlphabet, Symbol, Tok, TokStream, TreeError};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

/// Left-hand side of an att rule: `a(pi)` or `b(pi i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lhs {
    Syn(Symbol),
    Inh(Symbol, usize),
}

impl Lhs {
    pub fn attr(&self) -> &Symbol {
        match self {
            Lhs::Syn(a) | Lhs::Inh(a, _) => a,
        }
    }
}

impl fmt::Display for Lhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lhs::Syn(a) => write!(f, "{a}(pi)"),
            Lhs::Inh(b, i) => write!(f, "{b}(pi {i})"),
        }
    }
}

/// Right-hand side term; leaves may be `a(pi i)` or `b(pi)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rhs {
    Out(Symbol, Vec<Rhs>),
    Syn(Symbol, usize),
    Inh(Symbol),
}

impl Rhs {
    pub fn out(sym: &str, ch: Vec<Rhs>) -> Rhs {
        Rhs::Out(Symbol::new(sym), ch)
    }
    pub fn size(&self) -> usize {
        match self {
            Rhs::Out(_, ch) => 1 + ch.iter().map(Rhs::size).sum::<usize>(),
            _ => 1,
        }
    }
    pub fn is_ground(&self) -> bool {
        match self {
            Rhs::Out(_, ch) => ch.iter().all(Rhs::is_ground),
            _ => false,
        }
    }
    /// Occurrence leaves, left to right.
    pub fn occurrences(&self) -> Vec<&Rhs> {
        let mut out = Vec::new();
        fn go<'a>(r: &'a Rhs, out: &mut Vec<&'a Rhs>) {
            match r {
                Rhs::Out(_, ch) => ch.iter().for_each(|c| go(c, out)),
                occ => out.push(occ),
            }
        }
        go(self, &mut out);
        out
    }
    /// Number of output symbols (leaves excluded).
    pub fn output_count(&self) -> usize {
        match self {
            Rhs::Out(_, ch) => 1 + ch.iter().map(Rhs::output_count).sum::<usize>(),
            _ => 0,
        }
    }
    pub fn map_leaves(&self, f: &mut dyn FnMut(&Rhs) -> Rhs) -> Rhs {
        match self {
            Rhs::Out(s, ch) => Rhs::Out(s.clone(), ch.iter().map(|c| c.map_leaves(f)).collect()),
            leaf => f(leaf),
        }
    }
    pub fn to_tree(&self) -> Option<crate::trees::Tree> {
        match self {
            Rhs::Out(s, ch) => Some(crate::trees::Tree::new(
                s.clone(),
                ch.iter().map(Rhs::to_tree).collect::<Option<Vec<_>>>()?,
            )),
            _ => None,
        }
    }
    pub fn from_tree(t: &crate::trees::Tree) -> Rhs {
        Rhs::Out(t.label().clone(), t.children().iter().map(Rhs::from_tree).collect())
    }
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Syn(a, i) => write!(f, "{a}(pi {i})"),
            Rhs::Inh(b) => write!(f, "{b}(pi)"),
            Rhs::Out(s, ch) => {
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

pub type RuleSet = BTreeMap<Lhs, Vec<Rhs>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttSpec {
    pub name: String,
    pub input: RankedAlphabet,
    pub output: RankedAlphabet,
    pub syn: BTreeSet<Symbol>,
    pub inh: BTreeSet<Symbol>,
    pub init: Symbol,
    /// Keyed by input symbol or `#`.
    pub rules: BTreeMap<Symbol, RuleSet>,
}

impl AttSpec {
    pub fn new(name: &str, input: RankedAlphabet, output: RankedAlphabet, init: &str) -> Self {
        let mut syn = BTreeSet::new();
        syn.insert(Symbol::new(init));
        AttSpec {
            name: name.to_string(),
            input,
            output,
            syn,
            inh: BTreeSet::new(),
            init: Symbol::new(init),
            rules: BTreeMap::new(),
        }
    }

    pub fn add_rule(&mut self, sym: &Symbol, lhs: Lhs, rhs: Rhs) {
        let v = self.rules.entry(sym.clone()).or_default().entry(lhs).or_default();
        if !v.contains(&rhs) {
            v.push(rhs);
        }
    }

    pub fn rhs(&self, sym: &Symbol, lhs: &Lhs) -> &[Rhs] {
        self.rules
            .get(sym)
            .and_then(|rs| rs.get(lhs))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn rank_of(&self, sym: &Symbol) -> Option<usize> {
        if sym.is_root() {
            Some(1)
        } else {
            self.input.rank(sym)
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.rules.values().all(|rs| rs.values().all(|v| v.len() <= 1))
    }

    pub fn is_monadic(&self) -> bool {
        self.output.is_monadic()
    }

    pub fn max_rhs_size(&self) -> usize {
        self.rules
            .values()
            .flat_map(|rs| rs.values().flatten())
            .map(Rhs::size)
            .max()
            .unwrap_or(1)
    }

    pub fn attr_count(&self) -> usize {
        self.syn.len() + self.inh.len()
    }

    pub fn is_syn(&self, a: &Symbol) -> bool {
        self.syn.contains(a)
    }

    /// All rules as (symbol, lhs, rhs) triples in canonical order.
    pub fn all_rules(&self) -> impl Iterator<Item = (&Symbol, &Lhs, &Rhs)> {
        self.rules
            .iter()
            .flat_map(|(s, rs)| rs.iter().flat_map(move |(l, v)| v.iter().map(move |r| (s, l, r))))
    }

    pub fn rule_count(&self) -> usize {
        self.all_rules().count()
    }

    /// Symbols that may label nodes: the input alphabet plus `#`.
    pub fn symbols_with_root(&self) -> Vec<(Symbol, usize)> {
        let mut v: Vec<(Symbol, usize)> = self.input.iter().map(|(s, k)| (s.clone(), k)).collect();
        v.push((Symbol::root(), 1));
        v
    }
}

/// Right-hand side of a top-down rule; leaves `q(xi)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TdRhs {
    Out(Symbol, Vec<TdRhs>),
    Call(Symbol, usize),
}

impl TdRhs {
    pub fn calls(&self) -> Vec<(&Symbol, usize)> {
        let mut out = Vec::new();
        fn go<'a>(r: &'a TdRhs, out: &mut Vec<(&'a Symbol, usize)>) {
            match r {
                TdRhs::Out(_, ch) => ch.iter().for_each(|c| go(c, out)),
                TdRhs::Call(q, i) => out.push((q, *i)),
            }
        }
        go(self, &mut out);
        out
    }
    pub fn size(&self) -> usize {
        match self {
            TdRhs::Out(_, ch) => 1 + ch.iter().map(TdRhs::size).sum::<usize>(),
            TdRhs::Call(..) => 1,
        }
    }
}

impl fmt::Display for TdRhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdRhs::Call(q, i) => write!(f, "{q}(x{i})"),
            TdRhs::Out(s, ch) => {
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

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TdttSpec {
    pub name: String,
    pub input: RankedAlphabet,
    pub output: RankedAlphabet,
    pub states: BTreeSet<Symbol>,
    pub init: Symbol,
    /// Keyed by (state, input symbol).
    pub rules: BTreeMap<(Symbol, Symbol), Vec<TdRhs>>,
}

impl TdttSpec {
    pub fn new(name: &str, input: RankedAlphabet, output: RankedAlphabet, init: &str) -> Self {
        let mut states = BTreeSet::new();
        states.insert(Symbol::new(init));
        TdttSpec {
            name: name.to_string(),
            input,
            output,
            states,
            init: Symbol::new(init),
            rules: BTreeMap::new(),
        }
    }

    pub fn add_rule(&mut self, q: &Symbol, sym: &Symbol, rhs: TdRhs) {
        self.states.insert(q.clone());
        let v = self.rules.entry((q.clone(), sym.clone())).or_default();
        if !v.contains(&rhs) {
            v.push(rhs);
        }
    }

    pub fn rhs(&self, q: &Symbol, sym: &Symbol) -> &[TdRhs] {
        self.rules
            .get(&(q.clone(), sym.clone()))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn is_deterministic(&self) -> bool {
        self.rules.values().all(|v| v.len() <= 1)
    }

    /// Every rule has shape `σ'(q1(x1),..,qk(xk))` with σ' of the same rank.
    pub fn is_relabeling(&self) -> bool {
        self.rules.iter().all(|((_, sym), v)| {
            let k = self.input.rank(sym).unwrap_or(usize::MAX);
            v.iter().all(|r| match r {
                TdRhs::Out(_, ch) => {
                    ch.len() == k
                        && ch
                            .iter()
                            .enumerate()
                            .all(|(i, c)| matches!(c, TdRhs::Call(_, j) if *j == i + 1))
                }
                TdRhs::Call(..) => false,
            })
        })
    }

    pub fn identity(name: &str, alphabet: &RankedAlphabet) -> Self {
        let mut t = TdttSpec::new(name, alphabet.clone(), alphabet.clone(), "q");
        let q = Symbol::new("q");
        for (s, k) in alphabet.iter() {
            t.add_rule(
                &q,
                s,
                TdRhs::Out(s.clone(), (1..=k).map(|i| TdRhs::Call(q.clone(), i)).collect()),
            );
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelabelRule {
    pub state: Symbol,
    pub out: Symbol,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelabelingSpec {
    pub name: String,
    pub input: RankedAlphabet,
    pub output: RankedAlphabet,
    pub states: BTreeSet<Symbol>,
    pub finals: BTreeSet<Symbol>,
    /// Keyed by (symbol, child states).
    pub rules: BTreeMap<(Symbol, Vec<Symbol>), Vec<RelabelRule>>,
}

impl RelabelingSpec {
    pub fn new(name: &str, input: RankedAlphabet, output: RankedAlphabet) -> Self {
        RelabelingSpec {
            name: name.to_string(),
            input,
            output,
            states: BTreeSet::new(),
            finals: BTreeSet::new(),
            rules: BTreeMap::new(),
        }
    }

    pub fn add_rule(&mut self, sym: &Symbol, children: Vec<Symbol>, state: &Symbol, out: &Symbol) {
        for c in &children {
            self.states.insert(c.clone());
        }
        self.states.insert(state.clone());
        let v = self.rules.entry((sym.clone(), children)).or_default();
        let r = RelabelRule {
            state: state.clone(),
            out: out.clone(),
        };
        if !v.contains(&r) {
            v.push(r);
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.rules.values().all(|v| v.len() <= 1)
    }

    pub fn is_automaton(&self) -> bool {
        self.rules
            .iter()
            .all(|((s, _), v)| v.iter().all(|r| &r.out == s))
    }

    pub fn rule(&self, sym: &Symbol, children: &[Symbol]) -> &[RelabelRule] {
        self.rules
            .get(&(sym.clone(), children.to_vec()))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// Single-state identity relabeling accepting everything.
    pub fn identity(name: &str, alphabet: &RankedAlphabet) -> Self {
        let mut b = RelabelingSpec::new(name, alphabet.clone(), alphabet.clone());
        let p = Symbol::new("p");
        for (s, k) in alphabet.iter() {
            b.add_rule(s, vec![p.clone(); k], &p, s);
        }
        b.states.insert(p.clone());
        b.finals.insert(p);
        b
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookAround {
    pub name: String,
    pub b: RelabelingSpec,
    pub l: TdttSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairedSpec {
    AttR { name: String, b: RelabelingSpec, a: AttSpec },
    AttU { name: String, u: LookAround, a: AttSpec },
    DtR { name: String, b: RelabelingSpec, t: TdttSpec },
    LookAround(LookAround),
}

impl PairedSpec {
    pub fn name(&self) -> &str {
        match self {
            PairedSpec::AttR { name, .. }
            | PairedSpec::AttU { name, .. }
            | PairedSpec::DtR { name, .. } => name,
            PairedSpec::LookAround(u) => &u.name,
        }
    }
    pub fn kind(&self) -> &'static str {
        match self {
            PairedSpec::AttR { .. } => "attR",
            PairedSpec::AttU { .. } => "attU",
            PairedSpec::DtR { .. } => "dtR",
            PairedSpec::LookAround(_) => "lookaround",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Att(AttSpec),
    Tdtt(TdttSpec),
    Relabeling(RelabelingSpec),
    Pair(PairedSpec),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Att(a) => &a.name,
            Decl::Tdtt(t) => &t.name,
            Decl::Relabeling(b) => &b.name,
            Decl::Pair(p) => p.name(),
        }
    }
    pub fn input(&self) -> &RankedAlphabet {
        match self {
            Decl::Att(a) => &a.input,
            Decl::Tdtt(t) => &t.input,
            Decl::Relabeling(b) => &b.input,
            Decl::Pair(PairedSpec::AttR { b, .. }) | Decl::Pair(PairedSpec::DtR { b, .. }) => &b.input,
            Decl::Pair(PairedSpec::AttU { u, .. }) | Decl::Pair(PairedSpec::LookAround(u)) => &u.b.input,
        }
    }
}

/// Monadicity verdict for an att.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonadicityCertificate {
    pub att: String,
    pub verdict: bool,
    pub offending: Vec<String>,
}

pub fn check_monadic(a: &AttSpec) -> MonadicityCertificate {
    let offending: Vec<String> = a
        .output
        .iter()
        .filter(|(_, k)| *k > 1)
        .map(|(s, k)| format!("{s}:{k}"))
        .collect();
    MonadicityCertificate {
        att: a.name.clone(),
        verdict: offending.is_empty(),
        offending,
    }
}

// ---------------------------------------------------------------- diagnostics

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiagKind {
    SyntaxError,
    UnknownAttribute,
    UnknownSymbol,
    ArityMismatch,
    RootMarkerSynRule,
    DuplicateLhsInDeterministic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub kind: DiagKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {:?}: {}", self.line, self.kind, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{} diagnostic(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
pub struct SpecErrors(pub Vec<Diagnostic>);

/// All declarations of a spec file; the last one is the main declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecFile {
    pub decls: Vec<Decl>,
}

impl SpecFile {
    pub fn main(&self) -> &Decl {
        self.decls.last().expect("non-empty spec file")
    }
    pub fn get(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().rev().find(|d| d.name() == name)
    }
}

// ---------------------------------------------------------------- parsing

#[derive(Clone, Copy, PartialEq, Eq)]
enum Header {
    Att,
    Dt,
    T,
    Relabeling,
    Automaton,
}

struct Block {
    header: Header,
    name: String,
    line: usize,
    body: Vec<(usize, Vec<(Tok, usize)>)>,
}

fn diag(line: usize, kind: DiagKind, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        line,
        kind,
        message: message.into(),
    }
}

fn tree_err(line: usize, e: TreeError) -> Diagnostic {
    diag(line, DiagKind::SyntaxError, e.to_string())
}

fn reserved(name: &str) -> bool {
    name == "pi" || (name.len() > 1 && name.starts_with('x') && name[1..].chars().all(|c| c.is_ascii_digit()))
}

pub fn parse_spec(text: &str) -> Result<Decl, SpecErrors> {
    parse_spec_file(text).map(|f| f.main().clone())
}

pub fn parse_spec_file(text: &str) -> Result<SpecFile, SpecErrors> {
    let mut diags = Vec::new();
    let mut decls: Vec<Decl> = Vec::new();
    let mut block: Option<Block> = None;

    let finish = |b: Block, decls: &mut Vec<Decl>, diags: &mut Vec<Diagnostic>| {
        let before = diags.len();
        let d = match b.header {
            Header::Att => parse_att(&b, diags).map(Decl::Att),
            Header::Dt | Header::T => parse_tdtt(&b, diags).map(Decl::Tdtt),
            Header::Relabeling | Header::Automaton => parse_relabeling(&b, diags).map(Decl::Relabeling),
        };
        if let Some(d) = d {
            if diags.len() == before {
                push_decl(d, b.line, decls, diags);
            }
        }
    };

    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let line = raw.split('%').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let toks = match lex(line) {
            Ok(t) => t,
            Err(e) => {
                diags.push(tree_err(ln, e));
                continue;
            }
        };
        let head = match toks.first() {
            Some((Tok::Name(n), _)) => n.clone(),
            _ => {
                diags.push(diag(ln, DiagKind::SyntaxError, "line must start with a keyword"));
                continue;
            }
        };
        let header = match head.as_str() {
            "att" => Some(Header::Att),
            "dt" => Some(Header::Dt),
            "t" => Some(Header::T),
            "relabeling" => Some(Header::Relabeling),
            "automaton" => Some(Header::Automaton),
            _ => None,
        };
        if let Some(h) = header {
            if let Some(b) = block.take() {
                finish(b, &mut decls, &mut diags);
            }
            match toks.get(1) {
                Some((Tok::Name(n), _)) if toks.len() == 2 => {
                    block = Some(Block {
                        header: h,
                        name: n.clone(),
                        line: ln,
                        body: Vec::new(),
                    })
                }
                _ => diags.push(diag(ln, DiagKind::SyntaxError, format!("expected `{head} NAME`"))),
            }
            continue;
        }
        if head == "pair" {
            if let Some(b) = block.take() {
                finish(b, &mut decls, &mut diags);
            }
            match parse_pair(ln, &toks, &decls) {
                Ok(p) => push_decl(Decl::Pair(p), ln, &mut decls, &mut diags),
                Err(d) => diags.push(d),
            }
            continue;
        }
        match block.as_mut() {
            Some(b) => b.body.push((ln, toks)),
            None => diags.push(diag(ln, DiagKind::SyntaxError, "statement outside a declaration")),
        }
    }
    if let Some(b) = block.take() {
        finish(b, &mut decls, &mut diags);
    }
    if decls.is_empty() && diags.is_empty() {
        diags.push(diag(1, DiagKind::SyntaxError, "empty spec"));
    }
    if diags.is_empty() {
        Ok(SpecFile { decls })
    } else {
        Err(SpecErrors(diags))
    }
}

fn push_decl(d: Decl, line: usize, decls: &mut Vec<Decl>, diags: &mut Vec<Diagnostic>) {
    if decls.iter().any(|x| x.name() == d.name()) {
        diags.push(diag(line, DiagKind::SyntaxError, format!("duplicate declaration `{}`", d.name())));
    } else {
        decls.push(d);
    }
}

fn names_after(toks: &[(Tok, usize)]) -> Result<Vec<Symbol>, String> {
    toks[1..]
        .iter()
        .map(|(t, _)| match t {
            Tok::Name(n) => Ok(Symbol::new(n)),
            other => Err(format!("unexpected token {other:?}")),
        })
        .collect()
}

fn parse_ranks(toks: &[(Tok, usize)]) -> Result<RankedAlphabet, String> {
    let mut a = RankedAlphabet::new();
    let mut i = 1;
    while i < toks.len() {
        match (&toks[i].0, toks.get(i + 1).map(|t| &t.0), toks.get(i + 2).map(|t| &t.0)) {
            (Tok::Name(n), Some(Tok::Colon), Some(Tok::Num(k))) => {
                if reserved(n) {
                    return Err(format!("`{n}` is reserved"));
                }
                a.insert(Symbol::new(n), *k).map_err(|e| e.to_string())?;
                i += 3;
            }
            _ => return Err("expected `name:rank` entries".into()),
        }
    }
    Ok(a)
}

struct Decls {
    input: Option<RankedAlphabet>,
    output: Option<RankedAlphabet>,
    syn: Vec<Symbol>,
    inh: Vec<Symbol>,
    states: Vec<Symbol>,
    init: Option<Symbol>,
    finals: Vec<Symbol>,
    rules: Vec<(usize, Vec<(Tok, usize)>)>,
}

fn collect_decls(b: &Block, diags: &mut Vec<Diagnostic>) -> Decls {
    let mut d = Decls {
        input: None,
        output: None,
        syn: Vec::new(),
        inh: Vec::new(),
        states: Vec::new(),
        init: None,
        finals: Vec::new(),
        rules: Vec::new(),
    };
    for (ln, toks) in &b.body {
        let kw = match &toks[0].0 {
            Tok::Name(n) => n.as_str(),
            _ => unreachable!(),
        };
        let res: Result<(), String> = match kw {
            "input" => parse_ranks(toks).map(|a| d.input = Some(a)),
            "output" => parse_ranks(toks).map(|a| d.output = Some(a)),
            "syn" => names_after(toks).map(|v| d.syn.extend(v)),
            "inh" => names_after(toks).map(|v| d.inh.extend(v)),
            "states" => names_after(toks).map(|v| d.states.extend(v)),
            "final" => names_after(toks).map(|v| d.finals.extend(v)),
            "init" => names_after(toks).and_then(|v| match v.as_slice() {
                [x] => {
                    d.init = Some(x.clone());
                    Ok(())
                }
                _ => Err("`init` takes exactly one name".into()),
            }),
            "rule" => {
                d.rules.push((*ln, toks[1..].to_vec()));
                Ok(())
            }
            other => Err(format!("unknown keyword `{other}`")),
        };
        if let Err(m) = res {
            diags.push(diag(*ln, DiagKind::SyntaxError, m));
        }
    }
    if d.input.is_none() {
        diags.push(diag(b.line, DiagKind::SyntaxError, "missing `input` line"));
    }
    d
}

fn parse_att(b: &Block, diags: &mut Vec<Diagnostic>) -> Option<AttSpec> {
    let d = collect_decls(b, diags);
    let input = d.input.clone()?;
    let output = d.output.clone().unwrap_or_default();
    let init = match d.init.clone() {
        Some(i) => i,
        None => {
            diags.push(diag(b.line, DiagKind::SyntaxError, "missing `init` line"));
            return None;
        }
    };
    let syn: BTreeSet<Symbol> = d.syn.iter().cloned().collect();
    let inh: BTreeSet<Symbol> = d.inh.iter().cloned().collect();
    for x in syn.intersection(&inh) {
        diags.push(diag(b.line, DiagKind::SyntaxError, format!("`{x}` is both synthesized and inherited")));
    }
    if !syn.contains(&init) {
        diags.push(diag(b.line, DiagKind::UnknownAttribute, format!("initial attribute `{init}` is not synthesized")));
    }
    let mut a = AttSpec {
        name: b.name.clone(),
        input,
        output,
        syn,
        inh,
        init,
        rules: BTreeMap::new(),
    };
    for (ln, toks) in &d.rules {
        match parse_att_rule(&a, *ln, toks) {
            Ok((sym, lhs, rhs)) => a.add_rule(&sym, lhs, rhs),
            Err(e) => diags.push(e),
        }
    }
    Some(a)
}

fn parse_att_rule(a: &AttSpec, ln: usize, toks: &[(Tok, usize)]) -> Result<(Symbol, Lhs, Rhs), Diagnostic> {
    let mut ts = TokStream::new(toks, 0);
    let (sym, _) = ts.name().map_err(|e| tree_err(ln, e))?;
    let sym = Symbol::new(&sym);
    ts.expect(Tok::Colon, "`:`").map_err(|e| tree_err(ln, e))?;
    let k = a
        .rank_of(&sym)
        .ok_or_else(|| diag(ln, DiagKind::UnknownSymbol, format!("`{sym}` is not an input symbol")))?;
    let (attr, _) = ts.name().map_err(|e| tree_err(ln, e))?;
    let attr = Symbol::new(&attr);
    ts.expect(Tok::LParen, "`(`").map_err(|e| tree_err(ln, e))?;
    match ts.next() {
        Some(Tok::Name(p)) if p == "pi" => {}
        _ => return Err(diag(ln, DiagKind::SyntaxError, "expected `pi` in left-hand side")),
    }
    let idx = if let Some(Tok::Num(i)) = ts.peek() {
        let i = *i;
        ts.next();
        Some(i)
    } else {
        None
    };
    ts.expect(Tok::RParen, "`)`").map_err(|e| tree_err(ln, e))?;
    let lhs = match idx {
        None => {
            if a.inh.contains(&attr) {
                return Err(diag(ln, DiagKind::SyntaxError, format!("inherited `{attr}` needs a child index")));
            }
            if !a.syn.contains(&attr) {
                return Err(diag(ln, DiagKind::UnknownAttribute, format!("`{attr}` is not declared")));
            }
            if sym.is_root() {
                return Err(diag(ln, DiagKind::RootMarkerSynRule, format!("synthesized `{attr}` has a rule at `#`")));
            }
            Lhs::Syn(attr)
        }
        Some(i) => {
            if a.syn.contains(&attr) {
                if sym.is_root() {
                    return Err(diag(ln, DiagKind::RootMarkerSynRule, format!("synthesized `{attr}` has a rule at `#`")));
                }
                return Err(diag(ln, DiagKind::SyntaxError, format!("synthesized `{attr}` takes no child index")));
            }
            if !a.inh.contains(&attr) {
                return Err(diag(ln, DiagKind::UnknownAttribute, format!("`{attr}` is not declared")));
            }
            if i == 0 || i > k {
                return Err(diag(ln, DiagKind::ArityMismatch, format!("child index {i} out of range for `{sym}`")));
            }
            Lhs::Inh(attr, i)
        }
    };
    ts.expect(Tok::Arrow, "`->`").map_err(|e| tree_err(ln, e))?;
    let rhs = parse_att_rhs(a, k, ln, &mut ts)?;
    if !ts.done() {
        return Err(tree_err(ln, ts.err("trailing input")));
    }
    Ok((sym, lhs, rhs))
}

fn parse_att_rhs(a: &AttSpec, k: usize, ln: usize, ts: &mut TokStream) -> Result<Rhs, Diagnostic> {
    let (name, _) = ts.name().map_err(|e| tree_err(ln, e))?;
    let sym = Symbol::new(&name);
    let is_attr = a.syn.contains(&sym) || a.inh.contains(&sym);
    if ts.peek() == Some(&Tok::LParen) && matches!(ts.peek2(), Some(Tok::Name(p)) if p == "pi") {
        ts.next();
        ts.next();
        let idx = if let Some(Tok::Num(i)) = ts.peek() {
            let i = *i;
            ts.next();
            Some(i)
        } else {
            None
        };
        ts.expect(Tok::RParen, "`)`").map_err(|e| tree_err(ln, e))?;
        if !is_attr {
            return Err(diag(ln, DiagKind::UnknownAttribute, format!("`{name}` is not declared")));
        }
        return match (a.syn.contains(&sym), idx) {
            (true, Some(i)) if i >= 1 && i <= k => Ok(Rhs::Syn(sym, i)),
            (true, Some(i)) => Err(diag(ln, DiagKind::ArityMismatch, format!("child index {i} out of range"))),
            (true, None) => Err(diag(ln, DiagKind::SyntaxError, format!("synthesized `{name}` needs a child index"))),
            (false, None) => Ok(Rhs::Inh(sym)),
            (false, Some(_)) => Err(diag(ln, DiagKind::SyntaxError, format!("inherited `{name}` takes no child index"))),
        };
    }
    let rank = a
        .output
        .rank(&sym)
        .ok_or_else(|| diag(ln, DiagKind::UnknownSymbol, format!("`{name}` is not an output symbol")))?;
    let mut ch = Vec::new();
    if ts.peek() == Some(&Tok::LParen) {
        ts.next();
        loop {
            ch.push(parse_att_rhs(a, k, ln, ts)?);
            match ts.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                _ => return Err(diag(ln, DiagKind::SyntaxError, "expected `,` or `)`")),
            }
        }
    }
    if ch.len() != rank {
        return Err(diag(ln, DiagKind::ArityMismatch, format!("`{name}` has rank {rank}, given {}", ch.len())));
    }
    Ok(Rhs::Out(sym, ch))
}

fn parse_tdtt(b: &Block, diags: &mut Vec<Diagnostic>) -> Option<TdttSpec> {
    let d = collect_decls(b, diags);
    let input = d.input.clone()?;
    let output = d.output.clone().unwrap_or_default();
    let init = match d.init.clone() {
        Some(i) => i,
        None => {
            diags.push(diag(b.line, DiagKind::SyntaxError, "missing `init` line"));
            return None;
        }
    };
    let mut t = TdttSpec {
        name: b.name.clone(),
        input,
        output,
        states: d.states.iter().cloned().collect(),
        init: init.clone(),
        rules: BTreeMap::new(),
    };
    t.states.insert(init);
    for (ln, toks) in &d.rules {
        match parse_td_rule(&t, *ln, toks) {
            Ok((q, sym, rhs)) => {
                if b.header == Header::Dt && !t.rhs(&q, &sym).is_empty() && !t.rhs(&q, &sym).contains(&rhs) {
                    diags.push(diag(
                        *ln,
                        DiagKind::DuplicateLhsInDeterministic,
                        format!("second rule for ({q}, {sym}) in a deterministic transducer"),
                    ));
                }
                t.add_rule(&q, &sym, rhs)
            }
            Err(e) => diags.push(e),
        }
    }
    Some(t)
}

fn parse_td_rule(t: &TdttSpec, ln: usize, toks: &[(Tok, usize)]) -> Result<(Symbol, Symbol, TdRhs), Diagnostic> {
    let mut ts = TokStream::new(toks, 0);
    let e = |e: TreeError| tree_err(ln, e);
    let (q, _) = ts.name().map_err(e)?;
    let (sym, _) = ts.name().map_err(e)?;
    ts.expect(Tok::Colon, "`:`").map_err(e)?;
    let (q2, _) = ts.name().map_err(e)?;
    ts.expect(Tok::LParen, "`(`").map_err(e)?;
    let (sym2, _) = ts.name().map_err(e)?;
    if q != q2 || sym != sym2 {
        return Err(diag(ln, DiagKind::SyntaxError, "rule head does not match its left-hand side"));
    }
    let q = Symbol::new(&q);
    let sym = Symbol::new(&sym);
    if !t.states.contains(&q) {
        return Err(diag(ln, DiagKind::UnknownAttribute, format!("`{q}` is not a declared state")));
    }
    let k = t
        .input
        .rank(&sym)
        .ok_or_else(|| diag(ln, DiagKind::UnknownSymbol, format!("`{sym}` is not an input symbol")))?;
    let mut vars = 0;
    if ts.peek() == Some(&Tok::LParen) {
        ts.next();
        loop {
            let (x, _) = ts.name().map_err(e)?;
            vars += 1;
            if x != format!("x{vars}") {
                return Err(diag(ln, DiagKind::SyntaxError, format!("expected `x{vars}`")));
            }
            match ts.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                _ => return Err(diag(ln, DiagKind::SyntaxError, "expected `,` or `)`")),
            }
        }
    }
    if vars != k {
        return Err(diag(ln, DiagKind::ArityMismatch, format!("`{sym}` has rank {k}, given {vars} variables")));
    }
    ts.expect(Tok::RParen, "`)`").map_err(e)?;
    ts.expect(Tok::Arrow, "`->`").map_err(e)?;
    let rhs = parse_td_rhs(t, k, ln, &mut ts)?;
    if !ts.done() {
        return Err(tree_err(ln, ts.err("trailing input")));
    }
    Ok((q, sym, rhs))
}

fn parse_td_rhs(t: &TdttSpec, k: usize, ln: usize, ts: &mut TokStream) -> Result<TdRhs, Diagnostic> {
    let (name, _) = ts.name().map_err(|e| tree_err(ln, e))?;
    let sym = Symbol::new(&name);
    if ts.peek() == Some(&Tok::LParen) {
        if let Some(Tok::Name(x)) = ts.peek2() {
            if reserved(x) && x != "pi" {
                let i: usize = x[1..].parse().unwrap_or(0);
                ts.next();
                ts.next();
                ts.expect(Tok::RParen, "`)`").map_err(|e| tree_err(ln, e))?;
                if !t.states.contains(&sym) {
                    return Err(diag(ln, DiagKind::UnknownAttribute, format!("`{name}` is not a declared state")));
                }
                if i == 0 || i > k {
                    return Err(diag(ln, DiagKind::ArityMismatch, format!("variable x{i} out of range")));
                }
                return Ok(TdRhs::Call(sym, i));
            }
        }
    }
    let rank = t
        .output
        .rank(&sym)
        .ok_or_else(|| diag(ln, DiagKind::UnknownSymbol, format!("`{name}` is not an output symbol")))?;
    let mut ch = Vec::new();
    if ts.peek() == Some(&Tok::LParen) {
        ts.next();
        loop {
            ch.push(parse_td_rhs(t, k, ln, ts)?);
            match ts.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                _ => return Err(diag(ln, DiagKind::SyntaxError, "expected `,` or `)`")),
            }
        }
    }
    if ch.len() != rank {
        return Err(diag(ln, DiagKind::ArityMismatch, format!("`{name}` has rank {rank}, given {}", ch.len())));
    }
    Ok(TdRhs::Out(sym, ch))
}

fn parse_relabeling(b: &Block, diags: &mut Vec<Diagnostic>) -> Option<RelabelingSpec> {
    let d = collect_decls(b, diags);
    let input = d.input.clone()?;
    let output = match (&d.output, b.header) {
        (Some(o), _) => o.clone(),
        (None, Header::Automaton) => input.clone(),
        (None, _) => {
            diags.push(diag(b.line, DiagKind::SyntaxError, "missing `output` line"));
            return None;
        }
    };
    let mut r = RelabelingSpec::new(&b.name, input, output);
    r.states = d.states.iter().cloned().collect();
    for f in &d.finals {
        if !r.states.contains(f) {
            diags.push(diag(b.line, DiagKind::UnknownAttribute, format!("final state `{f}` is not declared")));
        }
        r.finals.insert(f.clone());
    }
    for (ln, toks) in &d.rules {
        match parse_relabel_rule(&r, *ln, toks) {
            Ok((sym, ch, p, out)) => {
                if b.header == Header::Relabeling {
                    let existing = r.rule(&sym, &ch);
                    if !existing.is_empty() && existing.iter().any(|x| x.state != p || x.out != out) {
                        diags.push(diag(
                            *ln,
                            DiagKind::DuplicateLhsInDeterministic,
                            format!("second rule for `{sym}` with the same child states"),
                        ));
                    }
                } else if out != sym {
                    diags.push(diag(*ln, DiagKind::SyntaxError, "an automaton rule must keep its symbol"));
                }
                r.add_rule(&sym, ch, &p, &out)
            }
            Err(e) => diags.push(e),
        }
    }
    Some(r)
}

fn parse_relabel_rule(
    r: &RelabelingSpec,
    ln: usize,
    toks: &[(Tok, usize)],
) -> Result<(Symbol, Vec<Symbol>, Symbol, Symbol), Diagnostic> {
    let mut ts = TokStream::new(toks, 0);
    let e = |e: TreeError| tree_err(ln, e);
    let (sym, _) = ts.name().map_err(e)?;
    let sym = Symbol::new(&sym);
    let k = r
        .input
        .rank(&sym)
        .ok_or_else(|| diag(ln, DiagKind::UnknownSymbol, format!("`{sym}` is not an input symbol")))?;
    let mut ch = Vec::new();
    if ts.peek() == Some(&Tok::LParen) {
        ts.next();
        loop {
            let (p, _) = ts.name().map_err(e)?;
            ch.push(Symbol::new(&p));
            match ts.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                _ => return Err(diag(ln, DiagKind::SyntaxError, "expected `,` or `)`")),
            }
        }
    }
    if ch.len() != k {
        return Err(diag(ln, DiagKind::ArityMismatch, format!("`{sym}` has rank {k}, given {} states", ch.len())));
    }
    ts.expect(Tok::Arrow, "`->`").map_err(e)?;
    let (p, _) = ts.name().map_err(e)?;
    ts.expect(Tok::Colon, "`:`").map_err(e)?;
    let (out, _) = ts.name().map_err(e)?;
    if !ts.done() {
        return Err(tree_err(ln, ts.err("trailing input")));
    }
    let p = Symbol::new(&p);
    let out = Symbol::new(&out);
    for s in ch.iter().chain(std::iter::once(&p)) {
        if !r.states.contains(s) {
            return Err(diag(ln, DiagKind::UnknownAttribute, format!("`{s}` is not a declared state")));
        }
    }
    if r.output.rank(&out) != Some(k) {
        return Err(diag(ln, DiagKind::ArityMismatch, format!("`{out}` is not an output symbol of rank {k}")));
    }
    Ok((sym, ch, p, out))
}

fn parse_pair(ln: usize, toks: &[(Tok, usize)], decls: &[Decl]) -> Result<PairedSpec, Diagnostic> {
    let names: Vec<Option<&str>> = toks
        .iter()
        .map(|(t, _)| match t {
            Tok::Name(n) => Some(n.as_str()),
            _ => None,
        })
        .collect();
    let shape_ok = toks.len() == 7
        && matches!(toks[3].0, Tok::Eq)
        && matches!(toks[5].0, Tok::Semi)
        && names[1].is_some()
        && names[2].is_some()
        && names[4].is_some()
        && names[6].is_some();
    if !shape_ok {
        return Err(diag(ln, DiagKind::SyntaxError, "expected `pair KIND NAME = STAGE1 ; STAGE2`"));
    }
    let (kind, name, s1, s2) = (names[1].unwrap(), names[2].unwrap(), names[4].unwrap(), names[6].unwrap());
    let find = |n: &str| {
        decls
            .iter()
            .rev()
            .find(|d| d.name() == n)
            .ok_or_else(|| diag(ln, DiagKind::SyntaxError, format!("unknown stage `{n}`")))
    };
    let (d1, d2) = (find(s1)?, find(s2)?);
    let mismatch = |o: &RankedAlphabet, i: &RankedAlphabet| {
        if o != i {
            Err(diag(ln, DiagKind::ArityMismatch, "stage alphabets do not connect"))
        } else {
            Ok(())
        }
    };
    let name = name.to_string();
    match (kind, d1, d2) {
        ("attR", Decl::Relabeling(b), Decl::Att(a)) => {
            mismatch(&b.output, &a.input)?;
            Ok(PairedSpec::AttR { name, b: b.clone(), a: a.clone() })
        }
        ("dtR", Decl::Relabeling(b), Decl::Tdtt(t)) => {
            mismatch(&b.output, &t.input)?;
            Ok(PairedSpec::DtR { name, b: b.clone(), t: t.clone() })
        }
        ("lookaround", Decl::Relabeling(b), Decl::Tdtt(l)) => {
            mismatch(&b.output, &l.input)?;
            if !l.is_relabeling() || !l.is_deterministic() {
                return Err(diag(ln, DiagKind::SyntaxError, "second stage of a look-around must be a deterministic top-down relabeling"));
            }
            Ok(PairedSpec::LookAround(LookAround { name, b: b.clone(), l: l.clone() }))
        }
        ("attU", Decl::Pair(PairedSpec::LookAround(u)), Decl::Att(a)) => {
            mismatch(&u.l.output, &a.input)?;
            Ok(PairedSpec::AttU { name, u: u.clone(), a: a.clone() })
        }
        _ => Err(diag(ln, DiagKind::SyntaxError, format!("stages do not fit pair kind `{kind}`"))),
    }
}

// ---------------------------------------------------------------- rendering

pub fn render_att(a: &AttSpec) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "att {}", a.name);
    let _ = writeln!(s, "input {}", a.input.render());
    let _ = writeln!(s, "output {}", a.output.render());
    let _ = writeln!(s, "syn {}", a.syn.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    if !a.inh.is_empty() {
        let _ = writeln!(s, "inh {}", a.inh.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    }
    let _ = writeln!(s, "init {}", a.init);
    for (sym, lhs, rhs) in a.all_rules() {
        let _ = writeln!(s, "rule {sym}: {lhs} -> {rhs}");
    }
    s
}

pub fn render_tdtt(t: &TdttSpec) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", if t.is_deterministic() { "dt" } else { "t" }, t.name);
    let _ = writeln!(s, "input {}", t.input.render());
    let _ = writeln!(s, "output {}", t.output.render());
    let _ = writeln!(s, "states {}", t.states.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    let _ = writeln!(s, "init {}", t.init);
    for ((q, sym), rhss) in &t.rules {
        let k = t.input.rank(sym).unwrap_or(0);
        let vars = if k == 0 {
            String::new()
        } else {
            format!("({})", (1..=k).map(|i| format!("x{i}")).collect::<Vec<_>>().join(","))
        };
        for r in rhss {
            let _ = writeln!(s, "rule {q} {sym}: {q}({sym}{vars}) -> {r}");
        }
    }
    s
}

pub fn render_relabeling(b: &RelabelingSpec) -> String {
    let mut s = String::new();
    let header = if b.is_deterministic() { "relabeling" } else { "automaton" };
    let _ = writeln!(s, "{header} {}", b.name);
    let _ = writeln!(s, "input {}", b.input.render());
    let _ = writeln!(s, "output {}", b.output.render());
    let _ = writeln!(s, "states {}", b.states.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    if !b.finals.is_empty() {
        let _ = writeln!(s, "final {}", b.finals.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    }
    for ((sym, ch), rs) in &b.rules {
        let args = if ch.is_empty() {
            String::new()
        } else {
            format!("({})", ch.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        };
        for r in rs {
            let _ = writeln!(s, "rule {sym}{args} -> {}:{}", r.state, r.out);
        }
    }
    s
}

fn render_pair(p: &PairedSpec, out: &mut String) {
    let (s1, s2) = match p {
        PairedSpec::AttR { b, a, .. } => {
            out.push_str(&render_relabeling(b));
            out.push_str(&render_att(a));
            (b.name.clone(), a.name.clone())
        }
        PairedSpec::DtR { b, t, .. } => {
            out.push_str(&render_relabeling(b));
            out.push_str(&render_tdtt(t));
            (b.name.clone(), t.name.clone())
        }
        PairedSpec::LookAround(u) => {
            out.push_str(&render_relabeling(&u.b));
            out.push_str(&render_tdtt(&u.l));
            (u.b.name.clone(), u.l.name.clone())
        }
        PairedSpec::AttU { u, a, .. } => {
            render_pair(&PairedSpec::LookAround(u.clone()), out);
            out.push_str(&render_att(a));
            (u.name.clone(), a.name.clone())
        }
    };
    let _ = writeln!(out, "pair {} {} = {} ; {}", p.kind(), p.name(), s1, s2);
}

/// Renders a declaration (with its stages) as re-parseable text.
pub fn render_spec(d: &Decl) -> String {
    match d {
        Decl::Att(a) => render_att(a),
        Decl::Tdtt(t) => render_tdtt(t),
        Decl::Relabeling(b) => render_relabeling(b),
        Decl::Pair(p) => {
            let mut s = String::new();
            render_pair(p, &mut s);
            s
        }
    }
}
