//! Rational subsets of free groups.
//!
//! A rational subset is given by a finite automaton over signed letters; it
//! denotes the set of free reductions of the accepted words. Normalization
//! saturates the automaton with ε-moves across cancelling pairs, removes ε,
//! and keeps only reduced runs, so a normalized [`Rational`] accepts exactly
//! the reduced words of its elements.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::stallings::CoreGraph;
use crate::words::{reduce, Letter, Word};

/// An automaton with ε-moves; the raw input to normalization.
#[derive(Clone, Debug, Default)]
pub struct Nfa {
    pub rank: usize,
    pub start: usize,
    pub accept: Vec<bool>,
    pub trans: Vec<Vec<(Letter, usize)>>,
    pub eps: Vec<Vec<usize>>,
}

impl Nfa {
    pub fn new(rank: usize) -> Self {
        let mut n = Nfa { rank, ..Default::default() };
        n.start = n.add_state();
        n
    }

    pub fn add_state(&mut self) -> usize {
        self.accept.push(false);
        self.trans.push(Vec::new());
        self.eps.push(Vec::new());
        self.accept.len() - 1
    }

    pub fn state_count(&self) -> usize {
        self.accept.len()
    }

    /// Add a path reading `w` from `from` to `to`.
    pub fn add_path(&mut self, from: usize, w: &Word, to: usize) {
        if w.is_empty() {
            self.eps[from].push(to);
            return;
        }
        let mut cur = from;
        for (i, &l) in w.letters().iter().enumerate() {
            let next = if i + 1 == w.len() { to } else { self.add_state() };
            self.trans[cur].push((l, next));
            cur = next;
        }
    }

    /// Copy `other` in; returns the offset of its states.
    pub fn embed(&mut self, other: &Nfa) -> usize {
        let off = self.state_count();
        for s in 0..other.state_count() {
            self.accept.push(false);
            self.trans.push(other.trans[s].iter().map(|&(l, t)| (l, t + off)).collect());
            self.eps.push(other.eps[s].iter().map(|&t| t + off).collect());
        }
        off
    }

    /// Normalize into a [`Rational`].
    pub fn normalize(&self) -> Rational {
        let n = self.state_count();
        let mut eps: Vec<HashSet<usize>> = self.eps.iter().map(|e| e.iter().copied().collect()).collect();
        let closure = |eps: &[HashSet<usize>]| -> Vec<Vec<usize>> {
            (0..n)
                .map(|s| {
                    let mut seen = vec![false; n];
                    seen[s] = true;
                    let mut stack = vec![s];
                    let mut out = vec![s];
                    while let Some(v) = stack.pop() {
                        for &u in &eps[v] {
                            if !seen[u] {
                                seen[u] = true;
                                out.push(u);
                                stack.push(u);
                            }
                        }
                    }
                    out
                })
                .collect()
        };
        let mut clo = closure(&eps);
        loop {
            let mut added = false;
            for p in 0..n {
                for &(a, q) in &self.trans[p] {
                    for &q2 in &clo[q] {
                        for &(b, s) in &self.trans[q2] {
                            if b == a.inverse() && !clo[p].contains(&s) && eps[p].insert(s) {
                                added = true;
                            }
                        }
                    }
                }
            }
            if !added {
                break;
            }
            clo = closure(&eps);
        }
        let trans: Vec<Vec<(Letter, usize)>> = (0..n)
            .map(|p| {
                let mut t: Vec<(Letter, usize)> =
                    clo[p].iter().flat_map(|&q| self.trans[q].iter().copied()).collect();
                t.sort();
                t.dedup();
                t
            })
            .collect();
        let accept: Vec<bool> = (0..n).map(|p| clo[p].iter().any(|&q| self.accept[q])).collect();

        // Product with the last letter read, forbidding cancellation.
        let mut index: HashMap<(usize, Option<Letter>), usize> = HashMap::new();
        let mut states = vec![(self.start, None)];
        index.insert((self.start, None), 0);
        let mut out_trans: Vec<Vec<(Letter, usize)>> = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let (p, last) = states[i];
            let mut row = Vec::new();
            for &(a, q) in &trans[p] {
                if Some(a.inverse()) == last {
                    continue;
                }
                let key = (q, Some(a));
                let j = *index.entry(key).or_insert_with(|| {
                    states.push(key);
                    states.len() - 1
                });
                row.push((a, j));
            }
            out_trans.push(row);
            i += 1;
        }
        let out_accept = states.iter().map(|&(p, _)| accept[p]).collect();
        Rational::trimmed(self.rank, out_accept, out_trans)
    }
}

/// A normalized rational subset: accepts exactly the reduced words of its
/// elements. State 0 is the start state; the automaton is trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rational {
    rank: usize,
    accept: Vec<bool>,
    trans: Vec<Vec<(Letter, usize)>>,
}

impl Rational {
    fn trimmed(rank: usize, accept: Vec<bool>, trans: Vec<Vec<(Letter, usize)>>) -> Rational {
        let n = accept.len();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (p, row) in trans.iter().enumerate() {
            for &(_, q) in row {
                rev[q].push(p);
            }
        }
        let mut useful = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&p| accept[p]).collect();
        for &p in &stack {
            useful[p] = true;
        }
        while let Some(v) = stack.pop() {
            for &u in &rev[v] {
                if !useful[u] {
                    useful[u] = true;
                    stack.push(u);
                }
            }
        }
        if n == 0 || !useful[0] {
            return Rational::empty(rank);
        }
        // Breadth-first renumbering from the start over useful states.
        let mut map = vec![usize::MAX; n];
        map[0] = 0;
        let mut order = vec![0];
        let mut i = 0;
        while i < order.len() {
            let p = order[i];
            for &(_, q) in &trans[p] {
                if useful[q] && map[q] == usize::MAX {
                    map[q] = order.len();
                    order.push(q);
                }
            }
            i += 1;
        }
        let accept = order.iter().map(|&p| accept[p]).collect();
        let trans = order
            .iter()
            .map(|&p| {
                let mut row: Vec<(Letter, usize)> =
                    trans[p].iter().filter(|&&(_, q)| useful[q]).map(|&(l, q)| (l, map[q])).collect();
                row.sort();
                row.dedup();
                row
            })
            .collect();
        Rational { rank, accept, trans }
    }

    pub fn empty(rank: usize) -> Rational {
        Rational { rank, accept: vec![false], trans: vec![Vec::new()] }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn state_count(&self) -> usize {
        self.accept.len()
    }

    /// The singleton `{w}`.
    pub fn word(rank: usize, w: &Word) -> Rational {
        let mut n = Nfa::new(rank);
        let end = n.add_state();
        n.accept[end] = true;
        n.add_path(n.start, w, end);
        n.normalize()
    }

    /// The ball of radius `r` about the identity.
    pub fn ball(rank: usize, r: usize) -> Rational {
        Rational::word(rank, &Word::empty()).neighborhood(r)
    }

    /// The left coset `gP`.
    pub fn coset(core: &CoreGraph, g: &Word) -> Rational {
        let rank = core.ambient_rank();
        let mut n = Nfa::new(rank);
        let off = n.embed(&core_nfa(core));
        n.accept[off + core.base()] = true;
        n.add_path(n.start, g, off + core.base());
        n.normalize()
    }

    /// The double coset `P·g·Q`.
    pub fn double_coset(p: &CoreGraph, g: &Word, q: &CoreGraph) -> Rational {
        let rank = p.ambient_rank();
        let mut n = Nfa::new(rank);
        let op = n.embed(&core_nfa(p));
        let oq = n.embed(&core_nfa(q));
        n.eps[n.start].push(op + p.base());
        n.add_path(op + p.base(), g, oq + q.base());
        n.accept[oq + q.base()] = true;
        n.normalize()
    }

    fn to_nfa(&self) -> Nfa {
        Nfa {
            rank: self.rank,
            start: 0,
            accept: self.accept.clone(),
            trans: self.trans.clone(),
            eps: vec![Vec::new(); self.state_count()],
        }
    }

    /// Product set `self·other`.
    pub fn concat(&self, other: &Rational) -> Rational {
        let mut n = self.to_nfa();
        n.accept = vec![false; n.state_count()];
        let off = n.embed(&other.to_nfa());
        for (p, &a) in self.accept.iter().enumerate() {
            if a {
                n.eps[p].push(off);
            }
        }
        for (p, &a) in other.accept.iter().enumerate() {
            n.accept[off + p] = a;
        }
        n.normalize()
    }

    /// The closed r-neighborhood `S·B(r)` in the word metric.
    pub fn neighborhood(&self, r: usize) -> Rational {
        let mut n = self.to_nfa();
        let chain: Vec<usize> = (0..=r).map(|_| n.add_state()).collect();
        for (p, &a) in self.accept.iter().enumerate() {
            if a {
                n.eps[p].push(chain[0]);
            }
        }
        for i in 0..=r {
            n.accept[chain[i]] = true;
            if i < r {
                for l in Letter::all(self.rank) {
                    n.trans[chain[i]].push((l, chain[i + 1]));
                }
            }
        }
        n.normalize()
    }

    /// Intersection of two normalized sets.
    pub fn intersect(&self, other: &Rational) -> Rational {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut states = vec![(0, 0)];
        index.insert((0, 0), 0);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let (a, b) = states[i];
            let mut row = Vec::new();
            for &(l, a2) in &self.trans[a] {
                for &(m, b2) in &other.trans[b] {
                    if l == m {
                        let j = *index.entry((a2, b2)).or_insert_with(|| {
                            states.push((a2, b2));
                            states.len() - 1
                        });
                        row.push((l, j));
                    }
                }
            }
            trans.push(row);
            i += 1;
        }
        let accept = states.iter().map(|&(a, b)| self.accept[a] && other.accept[b]).collect();
        Rational::trimmed(self.rank, accept, trans)
    }

    pub fn is_empty(&self) -> bool {
        !self.accept.iter().any(|&a| a)
    }

    /// Whether the set is infinite: the trimmed automaton has a cycle.
    pub fn is_infinite(&self) -> bool {
        let n = self.state_count();
        // 0 unvisited, 1 on stack, 2 done.
        let mut color = vec![0u8; n];
        for s in 0..n {
            if color[s] != 0 {
                continue;
            }
            let mut stack = vec![(s, 0usize)];
            color[s] = 1;
            while let Some(&mut (v, ref mut i)) = stack.last_mut() {
                if *i < self.trans[v].len() {
                    let u = self.trans[v][*i].1;
                    *i += 1;
                    match color[u] {
                        0 => {
                            color[u] = 1;
                            stack.push((u, 0));
                        }
                        1 => return true,
                        _ => {}
                    }
                } else {
                    color[v] = 2;
                    stack.pop();
                }
            }
        }
        false
    }

    /// Whether the element `w` lies in the set.
    pub fn contains(&self, w: &Word) -> bool {
        let w = reduce(w);
        let mut cur: HashSet<usize> = HashSet::from([0]);
        for &l in w.letters() {
            cur = cur
                .iter()
                .flat_map(|&p| self.trans[p].iter().filter(move |&&(m, _)| m == l).map(|&(_, q)| q))
                .collect();
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|&p| self.accept[p])
    }

    /// The shortlex-least element, if the set is nonempty.
    pub fn shortlex_least(&self) -> Option<Word> {
        let start = vec![0usize];
        let mut prev: HashMap<Vec<usize>, Option<(Vec<usize>, Letter)>> = HashMap::new();
        prev.insert(start.clone(), None);
        let mut queue = VecDeque::from([start]);
        while let Some(set) = queue.pop_front() {
            if set.iter().any(|&p| self.accept[p]) {
                let mut letters = Vec::new();
                let mut cur = set;
                while let Some(Some((p, l))) = prev.get(&cur).cloned() {
                    letters.push(l);
                    cur = p;
                }
                letters.reverse();
                return Some(Word::new(letters));
            }
            for l in Letter::all(self.rank) {
                let mut next: Vec<usize> = set
                    .iter()
                    .flat_map(|&p| self.trans[p].iter().filter(|&&(m, _)| m == l).map(|&(_, q)| q))
                    .collect();
                next.sort_unstable();
                next.dedup();
                if !next.is_empty() && !prev.contains_key(&next) {
                    prev.insert(next.clone(), Some((set.clone(), l)));
                    queue.push_back(next);
                }
            }
        }
        None
    }

    /// Length of the shortest element, if nonempty.
    pub fn min_length(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.state_count()];
        dist[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            if self.accept[v] {
                return Some(dist[v]);
            }
            for &(_, u) in &self.trans[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        None
    }

    /// All elements of length at most `n`, sorted shortlex.
    pub fn elements_up_to(&self, n: usize) -> Vec<Word> {
        let mut out = HashSet::new();
        let mut stack = vec![(0usize, Word::empty())];
        while let Some((p, w)) = stack.pop() {
            if self.accept[p] {
                out.insert(w.clone());
            }
            if w.len() < n {
                for &(l, q) in &self.trans[p] {
                    let mut w2 = w.clone();
                    w2.push(l);
                    stack.push((q, w2));
                }
            }
        }
        let mut v: Vec<Word> = out.into_iter().collect();
        v.sort();
        v
    }

    /// Whether every element of `self` lies in `other`.
    ///
    /// Explores pairs (state, subset of `other`'s states) with antichain
    /// pruning: a pair is skipped when a pair with the same state and a
    /// smaller subset has been seen.
    pub fn is_subset(&self, other: &Rational) -> bool {
        let mut seen: HashMap<usize, Vec<Vec<usize>>> = HashMap::new();
        let mut queue = VecDeque::from([(0usize, vec![0usize])]);
        seen.entry(0).or_default().push(vec![0]);
        while let Some((p, set)) = queue.pop_front() {
            if self.accept[p] && !set.iter().any(|&q| other.accept[q]) {
                return false;
            }
            for &(l, p2) in &self.trans[p] {
                let mut next: Vec<usize> = set
                    .iter()
                    .flat_map(|&q| other.trans[q].iter().filter(|&&(m, _)| m == l).map(|&(_, r)| r))
                    .collect();
                next.sort_unstable();
                next.dedup();
                let chains = seen.entry(p2).or_default();
                if chains.iter().any(|s| is_sorted_subset(s, &next)) {
                    continue;
                }
                chains.retain(|s| !is_sorted_subset(&next, s));
                chains.push(next.clone());
                queue.push_back((p2, next));
            }
        }
        true
    }
}

fn is_sorted_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
    }
    true
}

/// The core graph as an automaton with both edge directions, start and
/// accepting states left unset.
fn core_nfa(core: &CoreGraph) -> Nfa {
    let n = core.vertex_count();
    let mut nfa = Nfa {
        rank: core.ambient_rank(),
        start: 0,
        accept: vec![false; n],
        trans: vec![Vec::new(); n],
        eps: vec![Vec::new(); n],
    };
    for (u, g, v) in core.graph().edges() {
        nfa.trans[u].push((Letter::gen(g), v));
        nfa.trans[v].push((Letter::new(g, true), u));
    }
    nfa
}

/// Distance between the cosets `g1P1` and `g2P2`: the length of the shortest
/// element of `P1·g1⁻¹g2·P2`.
pub fn coset_distance(p1: &CoreGraph, g1: &Word, p2: &CoreGraph, g2: &Word) -> usize {
    let g = reduce(&g1.inverse().concat(g2));
    Rational::double_coset(p1, &g, p2).min_length().expect("double coset is nonempty")
}

/// Whether the τ-neighborhoods of the cosets have infinite common
/// intersection; returns the shortlex-least common element when so.
pub fn ktau_simplex(cosets: &[(&CoreGraph, Word)], tau: usize) -> Option<Word> {
    let (first, rest) = cosets.split_first()?;
    let mut acc = Rational::coset(first.0, &first.1).neighborhood(tau);
    for (c, g) in rest {
        acc = acc.intersect(&Rational::coset(c, g).neighborhood(tau));
        if acc.is_empty() {
            return None;
        }
    }
    if acc.is_infinite() {
        acc.shortlex_least()
    } else {
        None
    }
}

/// Whether `A ⊆ N_r(B)` and `B ⊆ N_r(A)`.
pub fn hausdorff_within(a: &Rational, b: &Rational, r: usize) -> bool {
    a.is_subset(&b.neighborhood(r)) && b.is_subset(&a.neighborhood(r))
}
