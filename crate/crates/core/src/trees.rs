//! Ranked alphabets, trees with Dewey addressing, prefix trees and the text format.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Name of the implicit root marker.
pub const ROOT: &str = "#";

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
    pub fn root() -> Self {
        Symbol::new(ROOT)
    }
    pub fn is_root(&self) -> bool {
        &*self.0 == ROOT
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Symbol::new(&s))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankedAlphabet {
    ranks: BTreeMap<Symbol, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlphabetError {
    #[error("symbol `{0}` declared twice")]
    Duplicate(Symbol),
    #[error("the root marker cannot be declared")]
    RootMarker,
}

impl RankedAlphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, usize)>>(pairs: I) -> Self {
        let mut a = Self::new();
        for (n, r) in pairs {
            a.insert(Symbol::new(n), r).expect("valid alphabet");
        }
        a
    }

    pub fn insert(&mut self, sym: Symbol, rank: usize) -> Result<(), AlphabetError> {
        if sym.is_root() {
            return Err(AlphabetError::RootMarker);
        }
        if self.ranks.contains_key(&sym) {
            return Err(AlphabetError::Duplicate(sym));
        }
        self.ranks.insert(sym, rank);
        Ok(())
    }

    pub fn rank(&self, sym: &Symbol) -> Option<usize> {
        self.ranks.get(sym).copied()
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        self.ranks.contains_key(sym)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, usize)> {
        self.ranks.iter().map(|(s, r)| (s, *r))
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.values().copied().max().unwrap_or(0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Symbol> {
        self.ranks.iter().filter(|(_, r)| **r == 0).map(|(s, _)| s)
    }

    pub fn is_monadic(&self) -> bool {
        self.ranks.values().all(|r| *r <= 1)
    }

    /// `f:2 e:0` style rendering.
    pub fn render(&self) -> String {
        self.ranks
            .iter()
            .map(|(s, r)| format!("{s}:{r}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Node {
    label: Symbol,
    children: Vec<Tree>,
}

/// Immutable tree; clones share structure.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree(Arc<Node>);

/// Dewey address; the empty sequence is the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeAddr(pub Vec<usize>);

impl NodeAddr {
    pub fn root() -> Self {
        NodeAddr(Vec::new())
    }
    pub fn child(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        NodeAddr(v)
    }
    pub fn parent(&self) -> Option<(NodeAddr, usize)> {
        let mut v = self.0.clone();
        let i = v.pop()?;
        Some((NodeAddr(v), i))
    }
    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn is_ancestor_or_self(&self, other: &NodeAddr) -> bool {
        other.0.starts_with(&self.0)
    }
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "eps" || s.is_empty() {
            return Some(Self::root());
        }
        s.split('.')
            .map(|p| p.parse::<usize>().ok().filter(|i| *i > 0))
            .collect::<Option<Vec<_>>>()
            .map(NodeAddr)
    }
}

impl fmt::Display for NodeAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

impl Serialize for NodeAddr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NodeAddr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        NodeAddr::parse(&s).ok_or_else(|| serde::de::Error::custom("bad node address"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("no node at {0}")]
    NoSuchNode(NodeAddr),
    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },
    #[error("`{name}` expects {expected} children, found {found} (byte {offset})")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("syntax error at byte {offset}: {msg}")]
    SyntaxError { offset: usize, msg: String },
}

impl Tree {
    pub fn new(label: Symbol, children: Vec<Tree>) -> Self {
        Tree(Arc::new(Node { label, children }))
    }

    pub fn leaf(label: &str) -> Self {
        Tree::new(Symbol::new(label), Vec::new())
    }

    pub fn node(label: &str, children: Vec<Tree>) -> Self {
        Tree::new(Symbol::new(label), children)
    }

    pub fn label(&self) -> &Symbol {
        &self.0.label
    }

    pub fn children(&self) -> &[Tree] {
        &self.0.children
    }

    pub fn rank(&self) -> usize {
        self.0.children.len()
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Tree::size).sum::<usize>()
    }

    /// A single node has height 1.
    pub fn height(&self) -> usize {
        1 + self.children().iter().map(Tree::height).max().unwrap_or(0)
    }

    pub fn leaf_count(&self) -> usize {
        if self.children().is_empty() {
            1
        } else {
            self.children().iter().map(Tree::leaf_count).sum()
        }
    }

    pub fn subtree_at(&self, v: &NodeAddr) -> Result<&Tree, TreeError> {
        let mut t = self;
        for &i in &v.0 {
            t = t
                .children()
                .get(i.wrapping_sub(1))
                .ok_or_else(|| TreeError::NoSuchNode(v.clone()))?;
        }
        Ok(t)
    }

    pub fn label_at(&self, v: &NodeAddr) -> Result<&Symbol, TreeError> {
        self.subtree_at(v).map(Tree::label)
    }

    pub fn replace_at(&self, v: &NodeAddr, t2: Tree) -> Result<Tree, TreeError> {
        fn go(t: &Tree, path: &[usize], t2: Tree, full: &NodeAddr) -> Result<Tree, TreeError> {
            match path.split_first() {
                None => Ok(t2),
                Some((&i, rest)) => {
                    if i == 0 || i > t.rank() {
                        return Err(TreeError::NoSuchNode(full.clone()));
                    }
                    let mut ch = t.children().to_vec();
                    ch[i - 1] = go(&t.children()[i - 1], rest, t2, full)?;
                    Ok(Tree::new(t.label().clone(), ch))
                }
            }
        }
        go(self, &v.0, t2, v)
    }

    /// All node addresses in pre-order.
    pub fn nodes(&self) -> Vec<NodeAddr> {
        let mut out = Vec::new();
        fn go(t: &Tree, cur: &mut Vec<usize>, out: &mut Vec<NodeAddr>) {
            out.push(NodeAddr(cur.clone()));
            for (i, c) in t.children().iter().enumerate() {
                cur.push(i + 1);
                go(c, cur, out);
                cur.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn conforms_to(&self, alphabet: &RankedAlphabet) -> bool {
        alphabet.rank(self.label()) == Some(self.rank())
            && self.children().iter().all(|c| c.conforms_to(alphabet))
    }

    /// Parse against an alphabet (ranks checked).
    pub fn parse(text: &str, alphabet: &RankedAlphabet) -> Result<Tree, TreeError> {
        let t = parse_raw(text)?;
        check_ranks(&t.0, alphabet)?;
        Ok(t.1)
    }

    /// Parse without an alphabet; ranks are taken from the text.
    pub fn parse_unchecked(text: &str) -> Result<Tree, TreeError> {
        parse_raw(text).map(|t| t.1)
    }

    /// Output strings of a monadic tree: the labels from the root down.
    pub fn spine(&self) -> Vec<Symbol> {
        let mut out = vec![self.label().clone()];
        let mut t = self;
        while let Some(c) = t.children().first() {
            out.push(c.label().clone());
            t = c;
        }
        out
    }

    /// Inverse of `spine`: builds a monadic tree.
    pub fn from_spine(labels: &[Symbol]) -> Option<Tree> {
        let (last, init) = labels.split_last()?;
        let mut t = Tree::new(last.clone(), Vec::new());
        for l in init.iter().rev() {
            t = Tree::new(l.clone(), vec![t]);
        }
        Some(t)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())?;
        if !self.children().is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children().iter().enumerate() {
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

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Tree {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Tree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Tree::parse_unchecked(&s).map_err(serde::de::Error::custom)
    }
}

// ---- lexing shared with the spec parser ----

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Name(String),
    Num(usize),
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    Eq,
    Arrow,
}

fn name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '<' || c == '#'
}

fn name_cont(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '@' || c == '\'' || c == '<'
}

/// Tokenizes `text`; every token carries its byte offset.
///
/// Inside angle brackets any non-whitespace character belongs to the name,
/// so generated names such as `f_<r1,r2>` or `<g(e)>` stay single tokens.
pub fn lex(text: &str) -> Result<Vec<(Tok, usize)>, TreeError> {
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let (off, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '(' => out.push((Tok::LParen, off)),
            ')' => out.push((Tok::RParen, off)),
            ',' => out.push((Tok::Comma, off)),
            ':' => out.push((Tok::Colon, off)),
            ';' => out.push((Tok::Semi, off)),
            '=' => out.push((Tok::Eq, off)),
            '-' if bytes.get(i + 1).map(|x| x.1) == Some('>') => {
                out.push((Tok::Arrow, off));
                i += 2;
                continue;
            }
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && bytes[j].1.is_ascii_digit() {
                    j += 1;
                }
                let end = bytes.get(j).map(|b| b.0).unwrap_or(text.len());
                let n = text[off..end].parse().map_err(|_| TreeError::SyntaxError {
                    offset: off,
                    msg: "number too large".into(),
                })?;
                out.push((Tok::Num(n), off));
                i = j;
                continue;
            }
            c if name_start(c) => {
                let mut j = i;
                let mut depth = 0usize;
                while j < bytes.len() {
                    let ch = bytes[j].1;
                    if depth > 0 {
                        if ch.is_whitespace() {
                            break;
                        }
                        if ch == '<' {
                            depth += 1;
                        } else if ch == '>' {
                            depth -= 1;
                        }
                        j += 1;
                    } else if ch == '<' {
                        depth += 1;
                        j += 1;
                    } else if j == i && ch == '#' {
                        j += 1;
                        break;
                    } else if name_cont(ch) {
                        j += 1;
                    } else {
                        break;
                    }
                }
                if depth > 0 {
                    return Err(TreeError::SyntaxError {
                        offset: off,
                        msg: "unbalanced `<` in name".into(),
                    });
                }
                let end = bytes.get(j).map(|b| b.0).unwrap_or(text.len());
                out.push((Tok::Name(text[off..end].to_string()), off));
                i = j;
                continue;
            }
            _ => {
                return Err(TreeError::SyntaxError {
                    offset: off,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Shape of a parsed term: name, offset, children.
pub(crate) struct RawTerm {
    pub name: String,
    pub offset: usize,
    pub children: Vec<RawTerm>,
}

pub(crate) struct TokStream<'a> {
    pub toks: &'a [(Tok, usize)],
    pub pos: usize,
    pub end: usize,
}

impl<'a> TokStream<'a> {
    pub fn new(toks: &'a [(Tok, usize)], end: usize) -> Self {
        TokStream { toks, pos: 0, end }
    }
    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }
    pub fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.0)
    }
    pub fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }
    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }
    pub fn err(&self, msg: &str) -> TreeError {
        TreeError::SyntaxError {
            offset: self.offset(),
            msg: msg.to_string(),
        }
    }
    pub fn expect(&mut self, t: Tok, what: &str) -> Result<(), TreeError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }
    pub fn name(&mut self) -> Result<(String, usize), TreeError> {
        let off = self.offset();
        match self.next() {
            Some(Tok::Name(n)) => Ok((n, off)),
            _ => {
                self.pos -= 1;
                Err(self.err("expected a name"))
            }
        }
    }
    pub fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn term(&mut self) -> Result<RawTerm, TreeError> {
        let (name, offset) = self.name()?;
        let mut children = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                children.push(self.term()?);
                match self.next() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("expected `,` or `)`"));
                    }
                }
            }
        }
        Ok(RawTerm {
            name,
            offset,
            children,
        })
    }
}

fn raw_to_tree(r: &RawTerm) -> Tree {
    Tree::new(
        Symbol::new(&r.name),
        r.children.iter().map(raw_to_tree).collect(),
    )
}

fn parse_raw(text: &str) -> Result<(RawTerm, Tree), TreeError> {
    let toks = lex(text)?;
    let mut ts = TokStream::new(&toks, text.len());
    let r = ts.term()?;
    if !ts.done() {
        return Err(ts.err("trailing input"));
    }
    let t = raw_to_tree(&r);
    Ok((r, t))
}

fn check_ranks(r: &RawTerm, alphabet: &RankedAlphabet) -> Result<(), TreeError> {
    match alphabet.rank(&Symbol::new(&r.name)) {
        None => Err(TreeError::UnknownSymbol {
            name: r.name.clone(),
            offset: r.offset,
        }),
        Some(k) if k != r.children.len() => Err(TreeError::ArityMismatch {
            name: r.name.clone(),
            expected: k,
            found: r.children.len(),
            offset: r.offset,
        }),
        Some(_) => r.children.iter().try_for_each(|c| check_ranks(c, alphabet)),
    }
}

/// Tree over Σ plus the hole ⊤, written `?` in text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prefix {
    Hole,
    Node(Symbol, Vec<Prefix>),
}

impl Prefix {
    pub fn from_tree(t: &Tree) -> Self {
        Prefix::Node(
            t.label().clone(),
            t.children().iter().map(Prefix::from_tree).collect(),
        )
    }

    pub fn is_prefix_of(&self, t: &Tree) -> bool {
        match self {
            Prefix::Hole => true,
            Prefix::Node(l, ch) => {
                l == t.label()
                    && ch.len() == t.rank()
                    && ch.iter().zip(t.children()).all(|(p, c)| p.is_prefix_of(c))
            }
        }
    }

    pub fn holes(&self) -> usize {
        match self {
            Prefix::Hole => 1,
            Prefix::Node(_, ch) => ch.iter().map(Prefix::holes).sum(),
        }
    }

    /// Replaces holes left to right by the given trees.
    pub fn fill(&self, fillers: &mut dyn Iterator<Item = Tree>) -> Option<Tree> {
        match self {
            Prefix::Hole => fillers.next(),
            Prefix::Node(l, ch) => {
                let mut out = Vec::with_capacity(ch.len());
                for c in ch {
                    out.push(c.fill(fillers)?);
                }
                Some(Tree::new(l.clone(), out))
            }
        }
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prefix::Hole => f.write_str("?"),
            Prefix::Node(l, ch) => {
                write!(f, "{l}")?;
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

/// All trees over `alphabet` of height at most `depth`, sorted by size then text.
pub fn trees_up_to_depth(alphabet: &RankedAlphabet, depth: usize) -> Vec<Tree> {
    let mut keyed: Vec<(usize, String, Tree)> = trees_up_to_depth_unsorted(alphabet, depth)
        .into_iter()
        .map(|t| (t.size(), t.to_string(), t))
        .collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    keyed.into_iter().map(|x| x.2).collect()
}

/// Same set as [`trees_up_to_depth`] in generation order; cheap for large depths.
pub fn trees_up_to_depth_unsorted(alphabet: &RankedAlphabet, depth: usize) -> Vec<Tree> {
    let mut levels: Vec<Tree> = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::new();
        for (sym, k) in alphabet.iter() {
            if k == 0 {
                next.push(Tree::new(sym.clone(), Vec::new()));
                continue;
            }
            let mut idx = vec![0usize; k];
            if levels.is_empty() {
                continue;
            }
            loop {
                next.push(Tree::new(
                    sym.clone(),
                    idx.iter().map(|&i| levels[i].clone()).collect(),
                ));
                let mut p = 0;
                while p < k {
                    idx[p] += 1;
                    if idx[p] < levels.len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
                if p == k {
                    break;
                }
            }
        }
        levels = next;
    }
    levels
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fab() -> RankedAlphabet {
        RankedAlphabet::from_pairs([("f", 2), ("a", 0), ("b", 0)])
    }

    #[test]
    fn parse_and_address() {
        let t = Tree::parse("f(a,f(a,b))", &fab()).unwrap();
        assert_eq!(t.size(), 5);
        assert_eq!(t.label_at(&NodeAddr(vec![1])).unwrap().as_str(), "a");
        assert_eq!(t.subtree_at(&NodeAddr(vec![2])).unwrap().to_string(), "f(a,b)");
        assert_eq!(
            t.replace_at(&NodeAddr(vec![1]), Tree::leaf("b")).unwrap().to_string(),
            "f(b,f(a,b))"
        );
        assert!(matches!(
            Tree::leaf("e").subtree_at(&NodeAddr(vec![1])),
            Err(TreeError::NoSuchNode(_))
        ));
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let a = RankedAlphabet::from_pairs([("f", 2), ("e", 0)]);
        assert_eq!(
            Tree::parse("f(e)", &a),
            Err(TreeError::ArityMismatch {
                name: "f".into(),
                expected: 2,
                found: 1,
                offset: 0
            })
        );
        assert_eq!(
            Tree::parse("f(e, x)", &a),
            Err(TreeError::UnknownSymbol {
                name: "x".into(),
                offset: 5
            })
        );
        assert!(matches!(
            Tree::parse("f(e,e", &a),
            Err(TreeError::SyntaxError { offset: 5, .. })
        ));
    }

    #[test]
    fn generated_names_lex_as_one_token() {
        let t = Tree::parse_unchecked("f_<r1,r2>(e, <g(e)>)").unwrap();
        assert_eq!(t.label().as_str(), "f_<r1,r2>");
        assert_eq!(t.children()[1].label().as_str(), "<g(e)>");
    }

    #[test]
    fn addresses_render() {
        assert_eq!(NodeAddr::root().to_string(), "eps");
        assert_eq!(NodeAddr(vec![2, 1]).to_string(), "2.1");
        assert_eq!(NodeAddr::parse("2.1"), Some(NodeAddr(vec![2, 1])));
    }

    #[test]
    fn prefix_match() {
        let p = Prefix::Node(
            "f".into(),
            vec![
                Prefix::Hole,
                Prefix::Node(
                    "f".into(),
                    vec![
                        Prefix::Node("f".into(), vec![Prefix::Node("e".into(), vec![]), Prefix::Hole]),
                        Prefix::Hole,
                    ],
                ),
            ],
        );
        let t = Tree::parse_unchecked("f(e,f(f(e,e),e))").unwrap();
        assert!(p.is_prefix_of(&t));
        assert!(Prefix::Hole.is_prefix_of(&t));
    }

    #[test]
    fn depth_four_count() {
        let a = RankedAlphabet::from_pairs([("f", 2), ("e", 0), ("d", 0)]);
        assert_eq!(trees_up_to_depth(&a, 4).len(), 1446);
        assert_eq!(trees_up_to_depth(&a, 1).len(), 2);
    }
}
