//! Alphabets, words, free reduction and right-angled Artin group normal forms.
//!
//! Every group in the crate is presented over a signed generator alphabet.
//! A [`Letter`] is a generator index together with an exponent of ±1 and is
//! stored as a single signed integer (`+(i+1)` or `-(i+1)`). Words are flat
//! letter sequences with no exponent compression.
//!
//! Letters are totally ordered by `(index, inverse)`, so `x0 < x0⁻¹ < x1`.
//! Words are ordered shortlex with respect to that letter order; this order
//! is what "shortlex-least" means everywhere else in the crate.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator index with a ±1 exponent.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(i32);

impl Letter {
    pub fn new(index: usize, inverse: bool) -> Self {
        let v = index as i32 + 1;
        Letter(if inverse { -v } else { v })
    }

    /// The positive letter of generator `index`.
    pub fn gen(index: usize) -> Self {
        Letter::new(index, false)
    }

    pub fn from_raw(raw: i32) -> Option<Self> {
        (raw != 0).then_some(Letter(raw))
    }

    pub fn raw(self) -> i32 {
        self.0
    }

    pub fn index(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// All `2·rank` letters in ascending letter order.
    pub fn all(rank: usize) -> impl Iterator<Item = Letter> {
        (0..rank).flat_map(|i| [Letter::new(i, false), Letter::new(i, true)])
    }

    /// Shift the generator index by `offset`, keeping the sign.
    pub fn shifted(self, offset: usize) -> Self {
        Letter::new(self.index() + offset, self.is_inverse())
    }

    fn sort_key(self) -> (usize, bool) {
        (self.index(), self.is_inverse())
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "g{}^-1", self.index())
        } else {
            write!(f, "g{}", self.index())
        }
    }
}

/// A finite, possibly unreduced, sequence of letters.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letter(letter: Letter) -> Self {
        Word(vec![letter])
    }

    /// Build from signed integers `±(index+1)`.
    pub fn from_raw(raw: &[i32]) -> Result<Self> {
        raw.iter()
            .map(|&r| Letter::from_raw(r).ok_or_else(|| Error::MalformedWord("zero letter".into())))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Concatenation, without reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `w^n` for integer `n` (negative powers use the inverse), unreduced.
    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Vec::with_capacity(base.len() * n.unsigned_abs() as usize);
        for _ in 0..n.unsigned_abs() {
            out.extend_from_slice(&base.0);
        }
        Word(out)
    }

    /// Check every letter against an alphabet of `rank` generators.
    pub fn check(&self, rank: usize) -> Result<()> {
        match self.0.iter().find(|l| l.index() >= rank) {
            Some(l) => Err(Error::MalformedWord(format!(
                "generator index {} outside alphabet of size {rank}",
                l.index()
            ))),
            None => Ok(()),
        }
    }

    /// Exponent sum per generator.
    pub fn exponent_sums(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for l in &self.0 {
            v[l.index()] += if l.is_inverse() { -1 } else { 1 };
        }
        v
    }

    pub fn shifted(&self, offset: usize) -> Word {
        Word(self.0.iter().map(|l| l.shifted(offset)).collect())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// Generator names for parsing and printing words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() || !n.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(Error::Config(format!("invalid generator name {n:?}")));
            }
            if n.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                return Err(Error::Config(format!("generator name {n:?} starts with a digit")));
            }
            if !seen.insert(n.clone()) {
                return Err(Error::Config(format!("duplicate generator name {n:?}")));
            }
        }
        Ok(Alphabet { names })
    }

    /// `x0, x1, …, x{rank-1}`.
    pub fn indexed(prefix: &str, rank: usize) -> Self {
        Alphabet { names: (0..rank).map(|i| format!("{prefix}{i}")).collect() }
    }

    pub fn from_strs(names: &[&str]) -> Result<Self> {
        Alphabet::new(names.iter().map(|s| s.to_string()).collect())
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Parse a word such as `"x y^-1 x^3"`, `"a b a⁻¹"` or `"x0x1"`.
    ///
    /// Generator names are matched greedily (longest first); whitespace,
    /// `*` and `·` separate tokens. `1` or the empty string is the identity.
    pub fn parse(&self, text: &str) -> Result<Word> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || c == '*' || c == '·' || c == '.' {
                i += 1;
                continue;
            }
            let rest: String = chars[i..].iter().collect();
            let best = self
                .names
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.chars().count());
            let (index, name_len) = match best {
                Some((idx, n)) => (idx, n.chars().count()),
                None if c == '1' => {
                    i += 1;
                    continue;
                }
                None => {
                    return Err(Error::MalformedWord(format!(
                        "unknown generator at {:?} in {text:?}",
                        rest
                    )))
                }
            };
            i += name_len;
            let (exp, used) = parse_exponent(&chars[i..])
                .ok_or_else(|| Error::MalformedWord(format!("bad exponent in {text:?}")))?;
            i += used;
            let letter = Letter::new(index, exp < 0);
            for _ in 0..exp.unsigned_abs() {
                out.push(letter);
            }
        }
        Ok(Word(out))
    }

    /// Print a word with run-length exponents, e.g. `x^2 y^-1`. The identity
    /// prints as `1`.
    pub fn format(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        let letters = w.letters();
        let mut i = 0;
        while i < letters.len() {
            let l = letters[i];
            let mut j = i;
            while j < letters.len() && letters[j] == l {
                j += 1;
            }
            let n = (j - i) as i64;
            let name = self.names.get(l.index()).cloned().unwrap_or_else(|| format!("g{}", l.index()));
            let e = if l.is_inverse() { -n } else { n };
            parts.push(if e == 1 { name } else { format!("{name}^{e}") });
            i = j;
        }
        parts.join(" ")
    }
}

fn superscript_digit(c: char) -> Option<u32> {
    "⁰¹²³⁴⁵⁶⁷⁸⁹".chars().position(|d| d == c).map(|p| p as u32)
}

/// Returns (exponent, chars consumed). No exponent means 1.
fn parse_exponent(chars: &[char]) -> Option<(i64, usize)> {
    match chars.first() {
        Some('^') => {
            let mut i = 1;
            let neg = chars.get(1) == Some(&'-');
            if neg {
                i += 1;
            }
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i == start {
                return None;
            }
            let s: String = chars[start..i].iter().collect();
            let v: i64 = s.parse().ok()?;
            Some((if neg { -v } else { v }, i))
        }
        Some(&c) if c == '⁻' || superscript_digit(c).is_some() => {
            let mut i = 0;
            let neg = chars[0] == '⁻';
            if neg {
                i += 1;
            }
            let start = i;
            let mut v: i64 = 0;
            while let Some(d) = chars.get(i).and_then(|&c| superscript_digit(c)) {
                v = v * 10 + d as i64;
                i += 1;
            }
            if i == start {
                return None;
            }
            Some((if neg { -v } else { v }, i))
        }
        _ => Some((1, 0)),
    }
}

/// Which normal-form discipline produced a [`NormalForm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Discipline {
    /// Free reduction in a free group.
    FreeReduced,
    /// Shortlex-least representative in a right-angled Artin group.
    RaagShortlex,
    /// Shortlex-least geodesic found by ordered breadth-first search.
    ShortlexGeodesic,
}

/// A canonical word for a group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalForm {
    pub word: Word,
    pub discipline: Discipline,
}

impl NormalForm {
    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn into_word(self) -> Word {
        self.word
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }
}

/// Free reduction with an alphabet check.
pub fn free_reduce(w: &Word, rank: usize) -> Result<NormalForm> {
    w.check(rank)?;
    Ok(NormalForm { word: reduce(w), discipline: Discipline::FreeReduced })
}

/// Free reduction without an alphabet check.
pub fn reduce(w: &Word) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in w.letters() {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

/// Freely reduce `u·v`.
pub fn reduced_product(u: &Word, v: &Word) -> Word {
    reduce(&u.concat(v))
}

/// The defining graph of a right-angled Artin group.
///
/// Vertices are generator indices; the relation is symmetric and irreflexive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefiningGraph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl DefiningGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Config(format!("edge ({u},{v}) outside {n} vertices")));
            }
            if u == v {
                return Err(Error::Config(format!("self-loop at vertex {u}")));
            }
            adj[u][v] = true;
            adj[v][u] = true;
        }
        Ok(DefiningGraph { n, adj })
    }

    /// The graph with no edges: its RAAG is free.
    pub fn discrete(n: usize) -> Self {
        DefiningGraph { n, adj: vec![vec![false; n]; n] }
    }

    /// The complete graph: its RAAG is free abelian.
    pub fn complete(n: usize) -> Self {
        let adj = (0..n).map(|i| (0..n).map(|j| i != j).collect()).collect();
        DefiningGraph { n, adj }
    }

    /// The cycle `0–1–…–(n-1)–0`.
    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        DefiningGraph::new(n, &edges).expect("cycle edges are valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u][v]
    }

    /// True when generators `u` and `v` commute (equal or adjacent).
    pub fn commute(&self, u: usize, v: usize) -> bool {
        u == v || self.adj[u][v]
    }

    pub fn link(&self, v: usize) -> BTreeSet<usize> {
        (0..self.n).filter(|&u| self.adj[v][u]).collect()
    }

    pub fn star(&self, v: usize) -> BTreeSet<usize> {
        let mut s = self.link(v);
        s.insert(v);
        s
    }

    pub fn valence(&self, v: usize) -> usize {
        self.adj[v].iter().filter(|&&b| b).count()
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u][v] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_triangle_free(&self) -> bool {
        self.edges()
            .iter()
            .all(|&(u, v)| (0..self.n).all(|w| !(self.adj[u][w] && self.adj[v][w])))
    }

    pub fn min_valence(&self) -> usize {
        (0..self.n).map(|v| self.valence(v)).min().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..self.n {
                if self.adj[u][v] && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// True when every pair in `set` is adjacent.
    pub fn is_clique(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().all(|&u| set.iter().all(|&v| u == v || self.adj[u][v]))
    }
}

#[derive(Clone, Copy)]
struct PileEntry {
    id: usize,
    /// +1 or -1 for a letter, 0 for a blocking marker.
    sign: i8,
}

/// Shortlex-least normal form in the RAAG on `graph`, by piling.
pub fn nf_raag(graph: &DefiningGraph, w: &Word) -> Result<NormalForm> {
    w.check(graph.vertex_count())?;
    Ok(NormalForm { word: raag_normalize(graph, w), discipline: Discipline::RaagShortlex })
}

/// [`nf_raag`] without the alphabet check.
pub fn raag_normalize(graph: &DefiningGraph, w: &Word) -> Word {
    let n = graph.vertex_count();
    let mut piles: Vec<Vec<PileEntry>> = vec![Vec::new(); n];
    let mut alive: Vec<bool> = Vec::with_capacity(w.len());
    let mut gen_of: Vec<usize> = Vec::with_capacity(w.len());

    for &l in w.letters() {
        let v = l.index();
        let sign: i8 = if l.is_inverse() { -1 } else { 1 };
        let pile = &mut piles[v];
        while pile.last().is_some_and(|e| !alive[e.id]) {
            pile.pop();
        }
        match pile.last() {
            Some(top) if top.sign == -sign => {
                alive[top.id] = false;
                pile.pop();
            }
            _ => {
                let id = alive.len();
                alive.push(true);
                gen_of.push(v);
                piles[v].push(PileEntry { id, sign });
                for (u, p) in piles.iter_mut().enumerate() {
                    if u != v && !graph.adjacent(u, v) {
                        p.push(PileEntry { id, sign: 0 });
                    }
                }
            }
        }
    }

    // Extract the lexicographically least linearisation: repeatedly emit the
    // least generator whose first live pile entry is one of its own letters.
    let mut cursor = vec![0usize; n];
    let mut out = Vec::new();
    loop {
        let mut chosen = None;
        for v in 0..n {
            let pile = &piles[v];
            let mut c = cursor[v];
            while c < pile.len() && !alive[pile[c].id] {
                c += 1;
            }
            cursor[v] = c;
            if c < pile.len() && pile[c].sign != 0 {
                chosen = Some(v);
                break;
            }
        }
        let Some(v) = chosen else { break };
        let entry = piles[v][cursor[v]];
        debug_assert_eq!(gen_of[entry.id], v);
        alive[entry.id] = false;
        out.push(Letter::new(v, entry.sign < 0));
    }
    Word(out)
}

/// Generator indices occurring in a normal form.
pub fn support(nf: &NormalForm) -> BTreeSet<usize> {
    nf.word.letters().iter().map(|l| l.index()).collect()
}

/// Whether `g` lies in the standard parabolic subgroup `⟨S⟩`.
pub fn is_in_parabolic(graph: &DefiningGraph, g: &Word, s: &BTreeSet<usize>) -> bool {
    raag_normalize(graph, g).letters().iter().all(|l| s.contains(&l.index()))
}

/// Split `g = head·tail` with `tail ∈ ⟨S⟩` and `head` the shortlex-least
/// minimal-length element of the coset `g⟨S⟩`.
///
/// Letters of `S` that can be shuffled to the end of the word are peeled off
/// until none remain.
pub fn strip_parabolic_tail(
    graph: &DefiningGraph,
    g: &Word,
    s: &BTreeSet<usize>,
) -> (NormalForm, NormalForm) {
    let mut head: Vec<Letter> = raag_normalize(graph, g).into_letters();
    let mut tail: Vec<Letter> = Vec::new();
    loop {
        let found = (0..head.len()).rev().find(|&i| {
            let v = head[i].index();
            s.contains(&v) && head[i + 1..].iter().all(|l| graph.commute(l.index(), v))
        });
        match found {
            Some(i) => {
                let l = head.remove(i);
                tail.insert(0, l);
            }
            None => break,
        }
    }
    let head = raag_normalize(graph, &Word(head));
    let tail = raag_normalize(graph, &Word(tail));
    (
        NormalForm { word: head, discipline: Discipline::RaagShortlex },
        NormalForm { word: tail, discipline: Discipline::RaagShortlex },
    )
}

/// Split `g = head·rest` with `head ∈ ⟨S⟩` and `rest` minimal in `⟨S⟩g`.
pub fn strip_parabolic_head(
    graph: &DefiningGraph,
    g: &Word,
    s: &BTreeSet<usize>,
) -> (NormalForm, NormalForm) {
    let (h, t) = strip_parabolic_tail(graph, &g.inverse(), s);
    let head = raag_normalize(graph, &t.word.inverse());
    let rest = raag_normalize(graph, &h.word.inverse());
    (
        NormalForm { word: head, discipline: Discipline::RaagShortlex },
        NormalForm { word: rest, discipline: Discipline::RaagShortlex },
    )
}

/// Decomposition `g = left·core·right` with `left ∈ ⟨S⟩`, `right ∈ ⟨T⟩` and
/// `core` of minimal length in the double coset `⟨S⟩g⟨T⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCosetSplit {
    pub left: Word,
    pub core: Word,
    pub right: Word,
}

pub fn double_coset_split(
    graph: &DefiningGraph,
    g: &Word,
    s: &BTreeSet<usize>,
    t: &BTreeSet<usize>,
) -> DoubleCosetSplit {
    let mut left = Word::empty();
    let mut right = Word::empty();
    let mut core = raag_normalize(graph, g);
    loop {
        let (h, tail) = strip_parabolic_tail(graph, &core, t);
        let (head, rest) = strip_parabolic_head(graph, &h.word, s);
        right = raag_normalize(graph, &tail.word.concat(&right));
        left = raag_normalize(graph, &left.concat(&head.word));
        let done = rest.word == core;
        core = rest.word;
        if done {
            break;
        }
    }
    DoubleCosetSplit { left, core, right }
}

/// Whether `g` and `h` commute in the RAAG.
pub fn commutes(graph: &DefiningGraph, g: &Word, h: &Word) -> bool {
    let c = g.concat(h).concat(&g.inverse()).concat(&h.inverse());
    raag_normalize(graph, &c).is_empty()
}

/// A group presented over a signed alphabet, walkable letter by letter.
pub trait Group {
    type Element: Clone + Eq + Hash;

    fn generator_count(&self) -> usize;
    fn identity(&self) -> Self::Element;
    fn mul_letter(&self, element: &Self::Element, letter: Letter) -> Self::Element;

    fn discipline(&self) -> Discipline {
        Discipline::ShortlexGeodesic
    }

    fn element_of(&self, w: &Word) -> Self::Element {
        w.letters().iter().fold(self.identity(), |e, &l| self.mul_letter(&e, l))
    }
}

/// The free group of a given rank; elements are reduced words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeGroup {
    pub rank: usize,
}

impl Group for FreeGroup {
    type Element = Word;

    fn generator_count(&self) -> usize {
        self.rank
    }

    fn identity(&self) -> Word {
        Word::empty()
    }

    fn mul_letter(&self, e: &Word, l: Letter) -> Word {
        let mut v = e.0.clone();
        if v.last() == Some(&l.inverse()) {
            v.pop();
        } else {
            v.push(l);
        }
        Word(v)
    }

    fn discipline(&self) -> Discipline {
        Discipline::FreeReduced
    }
}

/// A right-angled Artin group; elements are shortlex normal forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RaagGroup {
    pub graph: DefiningGraph,
}

impl Group for RaagGroup {
    type Element = Word;

    fn generator_count(&self) -> usize {
        self.graph.vertex_count()
    }

    fn identity(&self) -> Word {
        Word::empty()
    }

    fn mul_letter(&self, e: &Word, l: Letter) -> Word {
        let mut w = e.clone();
        w.push(l);
        raag_normalize(&self.graph, &w)
    }

    fn discipline(&self) -> Discipline {
        Discipline::RaagShortlex
    }

    fn element_of(&self, w: &Word) -> Word {
        raag_normalize(&self.graph, w)
    }
}

/// All elements of word length at most `radius`, each paired with its
/// shortlex-least geodesic, in shortlex order of those words.
///
/// Breadth-first search expanding letters in ascending order discovers each
/// element first along its shortlex-least geodesic.
pub fn ball<G: Group>(group: &G, radius: usize, cap: usize) -> Result<Vec<(G::Element, Word)>> {
    let letters: Vec<Letter> = Letter::all(group.generator_count()).collect();
    let mut seen: HashSet<G::Element> = HashSet::new();
    let id = group.identity();
    seen.insert(id.clone());
    let mut out = vec![(id, Word::empty())];
    let mut frontier_start = 0;
    for _ in 0..radius {
        let frontier_end = out.len();
        for i in frontier_start..frontier_end {
            for &l in &letters {
                let next = group.mul_letter(&out[i].0, l);
                if seen.insert(next.clone()) {
                    if out.len() >= cap {
                        return Err(Error::Resource { what: "ball elements", cap });
                    }
                    let mut w = out[i].1.clone();
                    w.push(l);
                    out.push((next, w));
                }
            }
        }
        frontier_start = frontier_end;
    }
    Ok(out)
}

/// Breadth-first search in shortlex order for the first element of length
/// at most `radius` satisfying `pred`.
pub fn ball_find<G: Group>(
    group: &G,
    radius: usize,
    cap: usize,
    mut pred: impl FnMut(&G::Element) -> bool,
) -> Result<Option<(G::Element, Word)>> {
    let letters: Vec<Letter> = Letter::all(group.generator_count()).collect();
    let id = group.identity();
    if pred(&id) {
        return Ok(Some((id, Word::empty())));
    }
    let mut seen: HashSet<G::Element> = HashSet::from([id.clone()]);
    let mut frontier = vec![(id, Word::empty())];
    for _ in 0..radius {
        let mut next = Vec::new();
        for (e, w) in &frontier {
            for &l in &letters {
                let n = group.mul_letter(e, l);
                if seen.insert(n.clone()) {
                    if seen.len() > cap {
                        return Err(Error::Resource { what: "ball elements", cap });
                    }
                    let mut w2 = w.clone();
                    w2.push(l);
                    if pred(&n) {
                        return Ok(Some((n, w2)));
                    }
                    next.push((n, w2));
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}

/// Distinct elements of length at most `radius` as normal forms.
pub fn ball_enumerate<G: Group>(group: &G, radius: usize, cap: usize) -> Result<Vec<NormalForm>> {
    let d = group.discipline();
    Ok(ball(group, radius, cap)?
        .into_iter()
        .map(|(_, word)| NormalForm { word, discipline: d })
        .collect())
}
