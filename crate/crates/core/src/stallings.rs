//! Stallings core graphs of finitely generated subgroups of free groups.
//!
//! A [`CoreGraph`] is a folded graph with a basepoint whose reduced closed
//! paths at the basepoint read exactly the subgroup. Edges are labelled by
//! positive generators; reading an inverse letter walks an edge backwards.
//!
//! Products of core graphs (label-matching fiber products) compute
//! intersections of conjugates. The k-fold product machinery used for height
//! keeps per-coordinate distinctness: two coordinates living in the same
//! core graph name the same coset exactly when their vertices coincide, and
//! that property is constant on product components.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::words::{reduce, reduced_product, Letter, Word};

/// Default cap on product states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// A deterministic labelled graph: at most one outgoing and one incoming
/// edge per (vertex, generator).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    rank: usize,
    out: Vec<Vec<Option<u32>>>,
    inc: Vec<Vec<Option<u32>>>,
}

impl LabeledGraph {
    fn with_vertices(rank: usize, n: usize) -> Self {
        LabeledGraph { rank, out: vec![vec![None; rank]; n], inc: vec![vec![None; rank]; n] }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(|o| o.iter().filter(|e| e.is_some()).count()).sum()
    }

    /// Follow one letter from `v`.
    pub fn step(&self, v: usize, l: Letter) -> Option<usize> {
        let t = if l.is_inverse() { self.inc[v][l.index()] } else { self.out[v][l.index()] };
        t.map(|t| t as usize)
    }

    /// Follow a word from `v`; `None` when some letter is not readable.
    pub fn read(&self, v: usize, w: &Word) -> Option<usize> {
        w.letters().iter().try_fold(v, |v, &l| self.step(v, l))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.out[v].iter().filter(|e| e.is_some()).count()
            + self.inc[v].iter().filter(|e| e.is_some()).count()
    }

    /// Edges `(source, generator, target)` sorted.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut e = Vec::new();
        for (u, outs) in self.out.iter().enumerate() {
            for (g, t) in outs.iter().enumerate() {
                if let Some(t) = t {
                    e.push((u, g, *t as usize));
                }
            }
        }
        e
    }

    fn add_edge(&mut self, u: usize, g: usize, v: usize) {
        self.out[u][g] = Some(v as u32);
        self.inc[v][g] = Some(u as u32);
    }

    /// Vertices surviving repeated deletion of degree ≤ 1 vertices, except
    /// those listed in `keep`.
    fn pruned_mask(&self, keep: &[usize]) -> Vec<bool> {
        let n = self.vertex_count();
        let mut alive = vec![true; n];
        let mut deg: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut queue: VecDeque<usize> =
            (0..n).filter(|&v| deg[v] <= 1 && !keep.contains(&v)).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for l in Letter::all(self.rank) {
                if let Some(u) = self.step(v, l) {
                    if alive[u] && u != v {
                        deg[u] -= 1;
                        if deg[u] <= 1 && !keep.contains(&u) {
                            queue.push_back(u);
                        }
                    }
                }
            }
        }
        alive
    }

    /// Induced subgraph on `mask`; returns the graph and old→new index map.
    fn induced(&self, mask: &[bool]) -> (LabeledGraph, Vec<Option<usize>>) {
        let mut map = vec![None; self.vertex_count()];
        let mut next = 0;
        for (v, &m) in mask.iter().enumerate() {
            if m {
                map[v] = Some(next);
                next += 1;
            }
        }
        let mut g = LabeledGraph::with_vertices(self.rank, next);
        for (u, gen, v) in self.edges() {
            if let (Some(a), Some(b)) = (map[u], map[v]) {
                g.add_edge(a, gen, b);
            }
        }
        (g, map)
    }

    /// Relabel vertices in breadth-first order from `root` (letters in
    /// ascending order), dropping vertices not connected to `root`.
    fn canonical_from(&self, root: usize) -> (LabeledGraph, Vec<Option<usize>>) {
        let mut map = vec![None; self.vertex_count()];
        let mut order = vec![root];
        map[root] = Some(0);
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            for l in Letter::all(self.rank) {
                if let Some(u) = self.step(v, l) {
                    if map[u].is_none() {
                        map[u] = Some(order.len());
                        order.push(u);
                    }
                }
            }
            i += 1;
        }
        let mut g = LabeledGraph::with_vertices(self.rank, order.len());
        for (u, gen, v) in self.edges() {
            if let (Some(a), Some(b)) = (map[u], map[v]) {
                g.add_edge(a, gen, b);
            }
        }
        (g, map)
    }

    /// Undirected connected components, as a component id per vertex.
    fn components(&self) -> (Vec<usize>, usize) {
        let n = self.vertex_count();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for l in Letter::all(self.rank) {
                    if let Some(u) = self.step(v, l) {
                        if comp[u] == usize::MAX {
                            comp[u] = count;
                            stack.push(u);
                        }
                    }
                }
            }
            count += 1;
        }
        (comp, count)
    }

    /// Shortlex-least word labelling a path from `from` to `to`.
    fn path_word(&self, from: usize, to: usize) -> Option<Word> {
        let mut prev: Vec<Option<(usize, Letter)>> = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for l in Letter::all(self.rank) {
                if let Some(u) = self.step(v, l) {
                    if !seen[u] {
                        seen[u] = true;
                        prev[u] = Some((v, l));
                        queue.push_back(u);
                    }
                }
            }
        }
        if !seen[to] {
            return None;
        }
        let mut letters = Vec::new();
        let mut v = to;
        while v != from {
            let (p, l) = prev[v].expect("path recorded");
            letters.push(l);
            v = p;
        }
        letters.reverse();
        Some(Word::new(letters))
    }

    /// Shortlex-least nonempty reduced closed path at `v`, if any.
    fn shortest_loop(&self, v: usize) -> Option<Word> {
        // States are (vertex, last letter); the graph is deterministic, so
        // breadth-first discovery order is shortlex order of access words.
        let letters: Vec<Letter> = Letter::all(self.rank).collect();
        let key = |u: usize, l: Letter| u * letters.len() + letters.iter().position(|&x| x == l).unwrap();
        let mut prev: HashMap<usize, (Option<usize>, Letter)> = HashMap::new();
        let mut queue = VecDeque::new();
        for &l in &letters {
            if let Some(u) = self.step(v, l) {
                let k = key(u, l);
                if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(k) {
                    e.insert((None, l));
                    queue.push_back((u, l, k));
                }
            }
        }
        while let Some((u, last, k)) = queue.pop_front() {
            if u == v {
                let mut letters_out = Vec::new();
                let mut cur = Some(k);
                while let Some(c) = cur {
                    let (p, l) = prev[&c];
                    letters_out.push(l);
                    cur = p;
                }
                letters_out.reverse();
                return Some(Word::new(letters_out));
            }
            for &l in &letters {
                if l == last.inverse() {
                    continue;
                }
                if let Some(t) = self.step(u, l) {
                    let kk = key(t, l);
                    if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(kk) {
                        e.insert((Some(k), l));
                        queue.push_back((t, l, kk));
                    }
                }
            }
        }
        None
    }
}

/// Fold a graph given by edge triples; returns the folded graph and the map
/// from original vertices to folded vertices.
fn fold(rank: usize, n: usize, edges: &[(usize, usize, usize)]) -> (LabeledGraph, Vec<usize>) {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    loop {
        let mut changed = false;
        let mut outm: HashMap<(usize, usize), usize> = HashMap::new();
        let mut inm: HashMap<(usize, usize), usize> = HashMap::new();
        for &(u, g, v) in edges {
            let ru = find(&mut parent, u);
            let rv = find(&mut parent, v);
            match outm.get(&(ru, g)).copied() {
                Some(w) => {
                    let rw = find(&mut parent, w);
                    if rw != rv {
                        parent[rw] = rv;
                        changed = true;
                    }
                }
                None => {
                    outm.insert((ru, g), rv);
                }
            }
            let ru = find(&mut parent, u);
            let rv = find(&mut parent, v);
            match inm.get(&(rv, g)).copied() {
                Some(w) => {
                    let rw = find(&mut parent, w);
                    if rw != ru {
                        parent[rw] = ru;
                        changed = true;
                    }
                }
                None => {
                    inm.insert((rv, g), ru);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut idx = HashMap::new();
    let mut map = vec![0; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        let next = idx.len();
        map[v] = *idx.entry(r).or_insert(next);
    }
    let mut g = LabeledGraph::with_vertices(rank, idx.len());
    for &(u, gen, v) in edges {
        g.add_edge(map[u], gen, map[v]);
    }
    (g, map)
}

/// Builds graphs from paths read from a root, prior to folding.
struct PathBuilder {
    n: usize,
    edges: Vec<(usize, usize, usize)>,
}

impl PathBuilder {
    fn new(n: usize) -> Self {
        PathBuilder { n, edges: Vec::new() }
    }

    fn from_graph(g: &LabeledGraph) -> Self {
        PathBuilder { n: g.vertex_count(), edges: g.edges() }
    }

    fn fresh(&mut self) -> usize {
        self.n += 1;
        self.n - 1
    }

    /// Add a path reading `w` from `start`; ends at `end` when given, else at
    /// a fresh vertex. Returns the end vertex.
    fn path(&mut self, start: usize, w: &Word, end: Option<usize>) -> usize {
        let mut cur = start;
        let k = w.len();
        for (i, &l) in w.letters().iter().enumerate() {
            let next = if i + 1 == k { end.unwrap_or_else(|| self.fresh()) } else { self.fresh() };
            if l.is_inverse() {
                self.edges.push((next, l.index(), cur));
            } else {
                self.edges.push((cur, l.index(), next));
            }
            cur = next;
        }
        cur
    }
}

/// The Stallings graph of a finitely generated subgroup of a free group.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoreGraph {
    graph: LabeledGraph,
    base: usize,
}

impl CoreGraph {
    /// Fold the petal graph of the given generators and prune to the core.
    ///
    /// An empty generator list (or generators that are all trivial) yields
    /// the single-vertex graph of the trivial subgroup; see
    /// [`CoreGraph::is_trivial`].
    pub fn from_generators(rank: usize, generators: &[Word]) -> Result<Self> {
        let mut pb = PathBuilder::new(1);
        for g in generators {
            g.check(rank)?;
            let r = reduce(g);
            if !r.is_empty() {
                pb.path(0, &r, Some(0));
            }
        }
        Ok(CoreGraph::finish(rank, pb, 0))
    }

    fn finish(rank: usize, pb: PathBuilder, root: usize) -> Self {
        let (folded, map) = fold(rank, pb.n, &pb.edges);
        let base = map[root];
        let mask = folded.pruned_mask(&[base]);
        let (pruned, pmap) = folded.induced(&mask);
        let base = pmap[base].expect("basepoint is kept");
        let (canon, cmap) = pruned.canonical_from(base);
        CoreGraph { graph: canon, base: cmap[base].expect("root maps") }
    }

    pub fn ambient_rank(&self) -> usize {
        self.graph.rank
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Rank of the subgroup: `E − V + 1`.
    pub fn subgroup_rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    pub fn is_trivial(&self) -> bool {
        self.edge_count() == 0
    }

    /// The basis read off a spanning tree: one generator per non-tree edge.
    pub fn basis(&self) -> Vec<Word> {
        let n = self.vertex_count();
        let mut tree_word: Vec<Option<Word>> = vec![None; n];
        let mut tree_edges = std::collections::HashSet::new();
        tree_word[self.base] = Some(Word::empty());
        let mut queue = VecDeque::from([self.base]);
        while let Some(v) = queue.pop_front() {
            for l in Letter::all(self.graph.rank) {
                if let Some(u) = self.graph.step(v, l) {
                    if tree_word[u].is_none() {
                        let mut w = tree_word[v].clone().unwrap();
                        w.push(l);
                        tree_word[u] = Some(w);
                        let e = if l.is_inverse() { (u, l.index(), v) } else { (v, l.index(), u) };
                        tree_edges.insert(e);
                        queue.push_back(u);
                    }
                }
            }
        }
        self.graph
            .edges()
            .into_iter()
            .filter(|e| !tree_edges.contains(e))
            .map(|(u, g, v)| {
                let w = tree_word[u]
                    .as_ref()
                    .unwrap()
                    .concat(&Word::from_letter(Letter::gen(g)))
                    .concat(&tree_word[v].as_ref().unwrap().inverse());
                reduce(&w)
            })
            .collect()
    }

    /// Whether `g` lies in the subgroup.
    pub fn contains(&self, g: &Word) -> bool {
        self.graph.read(self.base, &reduce(g)) == Some(self.base)
    }

    /// The graph of `gPg⁻¹`.
    pub fn conjugate(&self, g: &Word) -> CoreGraph {
        let g = reduce(g);
        if g.is_empty() {
            return self.clone();
        }
        let mut pb = PathBuilder::from_graph(&self.graph);
        let root = pb.fresh();
        pb.path(root, &g, Some(self.base));
        CoreGraph::finish(self.graph.rank, pb, root)
    }

    /// Shortlex-least reduced word in the left coset `gP`.
    pub fn coset_min_rep(&self, g: &Word) -> Word {
        let g = reduce(g);
        // Attach a path reading g⁻¹ from the basepoint and fold. Reduced
        // words of gP label exactly the paths from its end back to the base.
        let mut pb = PathBuilder::from_graph(&self.graph);
        let end = pb.path(self.base, &g.inverse(), None);
        let (folded, map) = fold(self.graph.rank, pb.n, &pb.edges);
        let base = map[self.base];
        let start = map[end];
        shortlex_geodesic(&folded, start, base).expect("coset path exists")
    }

    /// Core graph of the intersection of the two subgroups (same basepoint).
    pub fn intersect(&self, other: &CoreGraph) -> CoreGraph {
        assert_eq!(self.graph.rank, other.graph.rank, "ambient ranks differ");
        let rank = self.graph.rank;
        let nb = other.vertex_count();
        let id = |a: usize, b: usize| a * nb + b;
        let root = id(self.base, other.base);
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut order = vec![(self.base, other.base)];
        seen.insert(root, 0);
        let mut edges = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let (a, b) = order[i];
            for l in Letter::all(rank) {
                if let (Some(a2), Some(b2)) = (self.graph.step(a, l), other.graph.step(b, l)) {
                    let k = id(a2, b2);
                    let j = *seen.entry(k).or_insert_with(|| {
                        order.push((a2, b2));
                        order.len() - 1
                    });
                    if !l.is_inverse() {
                        edges.push((i, l.index(), j));
                    }
                }
            }
            i += 1;
        }
        let mut g = LabeledGraph::with_vertices(rank, order.len());
        for (u, gen, v) in edges {
            g.add_edge(u, gen, v);
        }
        let pb = PathBuilder { n: g.vertex_count(), edges: g.edges() };
        CoreGraph::finish(rank, pb, 0)
    }

    /// Shortlex-least nontrivial element of the subgroup, if any.
    pub fn shortest_element(&self) -> Option<Word> {
        self.graph.shortest_loop(self.base)
    }

    /// Vertices of the 2-core: vertices on some cyclically reduced loop.
    fn two_core_mask(&self) -> Vec<bool> {
        self.graph.pruned_mask(&[])
    }

    /// Shortest word from the basepoint to the 2-core.
    fn spur(&self) -> Option<Word> {
        let mask = self.two_core_mask();
        let target = (0..self.vertex_count())
            .filter(|&v| mask[v])
            .min_by_key(|&v| self.graph.path_word(self.base, v))?;
        self.graph.path_word(self.base, target)
    }
}

/// Shortlex-least path word from `from` to `to` in a folded graph. Geodesics
/// in a folded graph never backtrack, so the word is reduced.
fn shortlex_geodesic(g: &LabeledGraph, from: usize, to: usize) -> Option<Word> {
    let n = g.vertex_count();
    let mut dist = vec![usize::MAX; n];
    dist[to] = 0;
    let mut queue = VecDeque::from([to]);
    while let Some(v) = queue.pop_front() {
        for l in Letter::all(g.rank) {
            if let Some(u) = g.step(v, l) {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
    }
    if dist[from] == usize::MAX {
        return None;
    }
    let mut out = Vec::new();
    let mut v = from;
    while v != to {
        let (l, u) = Letter::all(g.rank)
            .filter_map(|l| g.step(v, l).map(|u| (l, u)))
            .find(|&(_, u)| dist[u] + 1 == dist[v])
            .expect("geodesic continues");
        out.push(l);
        v = u;
    }
    Some(Word::new(out))
}

/// One connected component of a label-matching product of core graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberComponent {
    /// Vertex tuples; coordinate `i` is the projection to factor `i`.
    pub vertices: Vec<Vec<usize>>,
    pub edge_count: usize,
    /// Whether the component carries a cycle (`edges ≥ vertices`).
    pub has_cycle: bool,
    /// Whether the tuple of basepoints lies in this component.
    pub contains_base: bool,
    /// Pairs `(i, j)` of factors with identical graphs whose coordinates
    /// coincide on this component.
    pub diagonal: Vec<(usize, usize)>,
    /// Shortlex-least nontrivial loop at the base tuple, when
    /// `contains_base` and `has_cycle`.
    pub base_loop: Option<Word>,
}

/// Components of the product of the conjugated core graphs `gᵢPᵢgᵢ⁻¹`.
///
/// Components without edges are omitted unless they contain the base tuple.
pub fn fiber_product(factors: &[(&CoreGraph, Word)], cap: usize) -> Result<Vec<FiberComponent>> {
    if factors.is_empty() {
        return Err(Error::Precondition("fiber product of no factors".into()));
    }
    let rank = factors[0].0.ambient_rank();
    let conj: Vec<CoreGraph> = factors.iter().map(|(c, g)| c.conjugate(g)).collect();
    let sizes: Vec<usize> = conj.iter().map(|c| c.vertex_count()).collect();
    let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
    let total = match total {
        Some(t) if t <= cap => t,
        _ => return Err(Error::Resource { what: "fiber product states", cap }),
    };
    let decode = |mut x: usize| -> Vec<usize> {
        let mut t = vec![0; sizes.len()];
        for i in (0..sizes.len()).rev() {
            t[i] = x % sizes[i];
            x /= sizes[i];
        }
        t
    };
    let encode = |t: &[usize]| t.iter().zip(&sizes).fold(0, |acc, (&v, &s)| acc * s + v);
    let mut g = LabeledGraph::with_vertices(rank, total);
    for x in 0..total {
        let t = decode(x);
        for gen in 0..rank {
            let l = Letter::gen(gen);
            let next: Option<Vec<usize>> =
                t.iter().zip(&conj).map(|(&v, c)| c.graph.step(v, l)).collect();
            if let Some(n) = next {
                g.add_edge(x, gen, encode(&n));
            }
        }
    }
    let base_tuple: Vec<usize> = conj.iter().map(|c| c.base).collect();
    let base_id = encode(&base_tuple);
    let (comp, count) = g.components();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (x, &c) in comp.iter().enumerate() {
        members[c].push(x);
    }
    let mut out = Vec::new();
    for verts in members {
        let edge_count: usize = verts.iter().map(|&v| g.out[v].iter().flatten().count()).sum();
        let contains_base = verts.contains(&base_id);
        if edge_count == 0 && !contains_base {
            continue;
        }
        let tuples: Vec<Vec<usize>> = verts.iter().map(|&x| decode(x)).collect();
        let mut diagonal = Vec::new();
        for i in 0..conj.len() {
            for j in i + 1..conj.len() {
                if conj[i] == conj[j] && tuples[0][i] == tuples[0][j] {
                    diagonal.push((i, j));
                }
            }
        }
        let has_cycle = edge_count >= verts.len();
        let base_loop = if contains_base && has_cycle { g.shortest_loop(base_id) } else { None };
        out.push(FiberComponent {
            vertices: tuples,
            edge_count,
            has_cycle,
            contains_base,
            diagonal,
            base_loop,
        });
    }
    Ok(out)
}

/// Whether `⋂ gᵢPᵢgᵢ⁻¹` is infinite; returns a nontrivial element when so.
///
/// Nontrivial subgroups of free groups are infinite, so this is the same as
/// asking for a nontrivial common element.
pub fn infinite_intersection_free(cosets: &[(&CoreGraph, Word)]) -> Option<Word> {
    let (first, rest) = cosets.split_first()?;
    let mut h = first.0.conjugate(&first.1);
    for (c, g) in rest {
        if h.is_trivial() {
            return None;
        }
        h = h.intersect(&c.conjugate(g));
    }
    h.shortest_element()
}

/// Outcome of a malnormality check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MalnormalVerdict {
    Malnormal,
    /// `Pᵢ ∩ gPⱼg⁻¹` is infinite with `gPⱼ ≠ Pᵢ`; `g` is the canonical
    /// representative of its coset `gPⱼ`.
    Violation { i: usize, j: usize, g: Word },
}

/// Product of two 2-cores restricted to tuples accepted by `keep`, then
/// pruned to its 2-core. Returns surviving tuples.
struct TupleGraph {
    graph: LabeledGraph,
    tuples: Vec<Vec<u32>>,
}

impl TupleGraph {
    fn from_core(c: &CoreGraph) -> TupleGraph {
        let mask = c.two_core_mask();
        let (g, map) = c.graph.induced(&mask);
        let mut tuples = vec![Vec::new(); g.vertex_count()];
        for (old, m) in map.iter().enumerate() {
            if let Some(m) = m {
                tuples[*m] = vec![old as u32];
            }
        }
        TupleGraph { graph: g, tuples }
    }

    fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    fn product(
        &self,
        other: &TupleGraph,
        keep: impl Fn(&[u32], u32) -> bool,
        cap: usize,
    ) -> Result<TupleGraph> {
        let nb = other.graph.vertex_count();
        if self.graph.vertex_count().saturating_mul(nb) > cap {
            return Err(Error::Resource { what: "fiber product states", cap });
        }
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut tuples = Vec::new();
        for a in 0..self.graph.vertex_count() {
            for b in 0..nb {
                let ob = other.tuples[b][0];
                if keep(&self.tuples[a], ob) {
                    index.insert((a, b), tuples.len());
                    let mut t = self.tuples[a].clone();
                    t.push(ob);
                    tuples.push(t);
                }
            }
        }
        let rank = self.graph.rank;
        let mut g = LabeledGraph::with_vertices(rank, tuples.len());
        for (&(a, b), &i) in &index {
            for gen in 0..rank {
                let l = Letter::gen(gen);
                if let (Some(a2), Some(b2)) = (self.graph.step(a, l), other.graph.step(b, l)) {
                    if let Some(&j) = index.get(&(a2, b2)) {
                        g.add_edge(i, gen, j);
                    }
                }
            }
        }
        let mask = g.pruned_mask(&[]);
        let (g, map) = g.induced(&mask);
        let mut kept = vec![Vec::new(); g.vertex_count()];
        for (old, m) in map.iter().enumerate() {
            if let Some(m) = m {
                kept[*m] = std::mem::take(&mut tuples[old]);
            }
        }
        Ok(TupleGraph { graph: g, tuples: kept })
    }
}

/// Almost-malnormality of a collection of subgroups: for all `i, j` and `g`,
/// `Pᵢ ∩ gPⱼg⁻¹` infinite forces `i = j` and `g ∈ Pᵢ`.
///
/// Checks that every off-diagonal component of every pairwise product is
/// cycle-free. On violation returns the least witness by (length, word).
pub fn malnormality_certificate(collection: &[CoreGraph], cap: usize) -> Result<MalnormalVerdict> {
    let cores: Vec<TupleGraph> = collection.iter().map(TupleGraph::from_core).collect();
    let mut best: Option<(Word, usize, usize)> = None;
    for i in 0..collection.len() {
        for j in i..collection.len() {
            let same = i == j;
            let prod = cores[i].product(&cores[j], |t, b| !same || t[0] != b, cap)?;
            for t in &prod.tuples {
                let (v1, v2) = (t[0] as usize, t[1] as usize);
                let u1 = collection[i].graph.path_word(collection[i].base, v1).expect("connected");
                let u2 = collection[j].graph.path_word(collection[j].base, v2).expect("connected");
                let g = collection[j].coset_min_rep(&reduced_product(&u1, &u2.inverse()));
                let better = match &best {
                    None => true,
                    Some((bg, bi, bj)) => (&g, i, j) < (bg, *bi, *bj),
                };
                if better {
                    best = Some((g, i, j));
                }
            }
        }
    }
    Ok(match best {
        None => MalnormalVerdict::Malnormal,
        Some((g, i, j)) => MalnormalVerdict::Violation { i, j, g },
    })
}

/// Height of a collection, or a marker when it exceeds the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Height {
    Exact(usize),
    /// At least `cap + 1` distinct cosets share an infinite intersection.
    ExceedsCap(usize),
}

/// The largest number of distinct cosets `g₁Pᵢ₁, …, gₘPᵢₘ` whose conjugates
/// have infinite common intersection.
///
/// Level `m` holds the 2-cores of m-fold products over non-decreasing index
/// sequences, restricted to tuples whose coordinates in a shared factor are
/// distinct. A level is nonempty exactly when height ≥ m.
pub fn height_exact_free(collection: &[CoreGraph], cap: usize, state_cap: usize) -> Result<Height> {
    let singles: Vec<TupleGraph> = collection.iter().map(TupleGraph::from_core).collect();
    let mut level: Vec<(Vec<usize>, TupleGraph)> = singles
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.is_empty())
        .map(|(i, _)| (vec![i], TupleGraph::from_core(&collection[i])))
        .collect();
    if level.is_empty() {
        return Ok(Height::Exact(0));
    }
    let mut m = 1;
    loop {
        if m > cap {
            return Ok(Height::ExceedsCap(cap));
        }
        let mut next = Vec::new();
        let mut states = 0usize;
        for (indices, g) in &level {
            let last = *indices.last().unwrap();
            for (j, single) in singles.iter().enumerate().skip(last) {
                if single.is_empty() {
                    continue;
                }
                let same: Vec<usize> =
                    indices.iter().enumerate().filter(|(_, &i)| i == j).map(|(p, _)| p).collect();
                let prod = g.product(single, |t, b| same.iter().all(|&p| t[p] != b), state_cap)?;
                if !prod.is_empty() {
                    states += prod.tuples.len();
                    if states > state_cap {
                        return Err(Error::Resource { what: "height product states", cap: state_cap });
                    }
                    let mut idx = indices.clone();
                    idx.push(j);
                    next.push((idx, prod));
                }
            }
        }
        if next.is_empty() {
            return Ok(Height::Exact(m));
        }
        level = next;
        m += 1;
    }
}

/// The map of vertices of `sub` into `sup` induced by reading labels from
/// the basepoints, or `None` when `sub`'s subgroup is not contained in `sup`'s.
fn immersion(sub: &CoreGraph, sup: &CoreGraph) -> Option<Vec<usize>> {
    let mut map = vec![usize::MAX; sub.vertex_count()];
    map[sub.base] = sup.base;
    let mut queue = VecDeque::from([sub.base]);
    while let Some(v) = queue.pop_front() {
        for l in Letter::all(sub.graph.rank) {
            if let Some(u) = sub.graph.step(v, l) {
                let target = sup.graph.step(map[v], l)?;
                if map[u] == usize::MAX {
                    map[u] = target;
                    queue.push_back(u);
                } else if map[u] != target {
                    return None;
                }
            }
        }
    }
    Some(map)
}

/// Index of `sub` in `sup`, or `None` when infinite. Requires `sub ≤ sup`.
pub fn subgroup_index(sub: &CoreGraph, sup: &CoreGraph) -> Result<Option<usize>> {
    if immersion(sub, sup).is_none() {
        return Err(Error::Precondition("subgroup is not contained in the supergroup".into()));
    }
    if sup.is_trivial() {
        return Ok(Some(1));
    }
    // Move both basepoints onto the 2-core of sup, so its graph has no
    // hanging spur; then finite index means the immersion is a covering.
    let d = sup.spur().unwrap_or_default();
    let sub2 = sub.conjugate(&d.inverse());
    let sup2 = sup.conjugate(&d.inverse());
    let map = immersion(&sub2, &sup2).expect("containment survives conjugation");
    for v in 0..sub2.vertex_count() {
        for l in Letter::all(sub2.graph.rank) {
            if sup2.graph.step(map[v], l).is_some() && sub2.graph.step(v, l).is_none() {
                return Ok(None);
            }
        }
    }
    Ok(Some(sub2.vertex_count() / sup2.vertex_count()))
}

/// Whether `sub` has finite index in `sup`. Requires `sub ≤ sup`.
pub fn finite_index_test(sub: &CoreGraph, sup: &CoreGraph) -> Result<bool> {
    Ok(subgroup_index(sub, sup)?.is_some())
}

/// Whether `P ∩ gPg⁻¹` has finite index in both `P` and `gPg⁻¹`.
pub fn is_commensurating(p: &CoreGraph, g: &Word) -> bool {
    let q = p.conjugate(g);
    let i = p.intersect(&q);
    finite_index_test(&i, p).expect("intersection lies in P")
        && finite_index_test(&i, &q).expect("intersection lies in gPg⁻¹")
}

/// The free group's own core graph: one vertex with a loop per generator.
pub fn whole_group(rank: usize) -> CoreGraph {
    let gens: Vec<Word> = (0..rank).map(|i| Word::from_letter(Letter::gen(i))).collect();
    CoreGraph::from_generators(rank, &gens).expect("generators in range")
}

/// Canonical fingerprint of a core graph: edge list in canonical numbering.
pub fn canonical_hash(c: &CoreGraph) -> BTreeMap<(usize, usize), usize> {
    c.graph.edges().into_iter().map(|(u, g, v)| ((u, g), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;

    fn xy() -> Alphabet {
        Alphabet::from_strs(&["x", "y"]).unwrap()
    }

    fn core(a: &Alphabet, gens: &[&str]) -> CoreGraph {
        let ws: Vec<Word> = gens.iter().map(|g| a.parse(g).unwrap()).collect();
        CoreGraph::from_generators(a.rank(), &ws).unwrap()
    }

    #[test]
    fn core_sizes() {
        let ab = Alphabet::from_strs(&["a", "b"]).unwrap();
        let c = core(&ab, &["a", "b a b^-1"]);
        assert_eq!((c.vertex_count(), c.edge_count(), c.subgroup_rank()), (2, 3, 2));
        let a = xy();
        let c = core(&a, &["x"]);
        assert_eq!((c.vertex_count(), c.edge_count(), c.subgroup_rank()), (1, 1, 1));
        let c = core(&a, &["x^2"]);
        assert_eq!((c.vertex_count(), c.edge_count(), c.subgroup_rank()), (2, 2, 1));
        let t = CoreGraph::from_generators(2, &[]).unwrap();
        assert!(t.is_trivial());
        assert_eq!(t.vertex_count(), 1);
    }

    #[test]
    fn membership_examples() {
        let ab = Alphabet::from_strs(&["a", "b"]).unwrap();
        let c = core(&ab, &["a", "b a b^-1"]);
        assert!(c.contains(&ab.parse("b a b^-1").unwrap()));
        assert!(!c.contains(&ab.parse("b").unwrap()));
        assert!(c.contains(&Word::empty()));
    }

    #[test]
    fn coset_reps() {
        let a = xy();
        let px = core(&a, &["x"]);
        assert_eq!(a.format(&px.coset_min_rep(&a.parse("x^3 y").unwrap())), "x^3 y");
        assert!(px.coset_min_rep(&a.parse("x^3").unwrap()).is_empty());
        let px2 = core(&a, &["x^2"]);
        assert_eq!(a.format(&px2.coset_min_rep(&a.parse("x^3").unwrap())), "x");
    }

    #[test]
    fn intersections() {
        let a = xy();
        let px = core(&a, &["x"]);
        assert!(infinite_intersection_free(&[(&px, Word::empty()), (&px, a.parse("y").unwrap())]).is_none());
        let px2 = core(&a, &["x^2"]);
        let w = infinite_intersection_free(&[(&px2, Word::empty()), (&px2, a.parse("x").unwrap())]);
        assert_eq!(w.map(|w| a.format(&w)), Some("x^2".to_string()));

        let x3 = Alphabet::indexed("x", 3);
        let p0 = core(&x3, &["x0", "x1"]);
        let p1 = core(&x3, &["x1", "x2"]);
        let p2 = core(&x3, &["x2", "x0"]);
        let w = infinite_intersection_free(&[(&p0, Word::empty()), (&p1, Word::empty())]);
        assert_eq!(w.map(|w| x3.format(&w)), Some("x1".to_string()));
        assert!(infinite_intersection_free(&[
            (&p0, Word::empty()),
            (&p1, Word::empty()),
            (&p2, Word::empty())
        ])
        .is_none());
    }

    #[test]
    fn fiber_product_components() {
        let x3 = Alphabet::indexed("x", 3);
        let p0 = core(&x3, &["x0", "x1"]);
        let p1 = core(&x3, &["x1", "x2"]);
        let comps = fiber_product(&[(&p0, Word::empty()), (&p1, Word::empty())], 1000).unwrap();
        let base = comps.iter().find(|c| c.contains_base).unwrap();
        assert!(base.has_cycle);
        assert_eq!(base.base_loop.as_ref().map(|w| x3.format(w)), Some("x1".into()));

        let a = xy();
        let px = core(&a, &["x"]);
        let comps = fiber_product(&[(&px, Word::empty()), (&px, a.parse("y").unwrap())], 1000).unwrap();
        let base = comps.iter().find(|c| c.contains_base).unwrap();
        assert!(!base.has_cycle);
    }

    #[test]
    fn malnormality_examples() {
        let a = xy();
        assert_eq!(malnormality_certificate(&[core(&a, &["x"])], 1000).unwrap(), MalnormalVerdict::Malnormal);
        assert_eq!(
            malnormality_certificate(&[core(&a, &["x^2"])], 1000).unwrap(),
            MalnormalVerdict::Violation { i: 0, j: 0, g: a.parse("x").unwrap() }
        );
        assert_eq!(malnormality_certificate(&[core(&a, &["x y"])], 1000).unwrap(), MalnormalVerdict::Malnormal);
    }

    #[test]
    fn height_examples() {
        let a = xy();
        assert_eq!(height_exact_free(&[core(&a, &["x^2"])], 8, 100_000).unwrap(), Height::Exact(2));
        assert_eq!(height_exact_free(&[core(&a, &["x"])], 8, 100_000).unwrap(), Height::Exact(1));
        let x3 = Alphabet::indexed("x", 3);
        let coll = [core(&x3, &["x0", "x1"]), core(&x3, &["x1", "x2"]), core(&x3, &["x2", "x0"])];
        assert_eq!(height_exact_free(&coll, 8, 100_000).unwrap(), Height::Exact(2));
        // ⟨x^6⟩: six cosets xⁱ⟨x^6⟩ all contain x^6 in their conjugates.
        assert_eq!(height_exact_free(&[core(&a, &["x^6"])], 4, 100_000).unwrap(), Height::ExceedsCap(4));
    }

    #[test]
    fn finite_index_examples() {
        let a = xy();
        assert!(finite_index_test(&core(&a, &["x^2"]), &core(&a, &["x"])).unwrap());
        assert!(!finite_index_test(&core(&a, &["x"]), &whole_group(2)).unwrap());
        let sub = core(&a, &["x^2", "y", "x y x^-1"]);
        assert_eq!(subgroup_index(&sub, &whole_group(2)).unwrap(), Some(2));
        // Supergroup with a spur at the basepoint.
        assert_eq!(subgroup_index(&core(&a, &["y x^2 y^-1"]), &core(&a, &["y x y^-1"])).unwrap(), Some(2));
        assert!(matches!(
            finite_index_test(&core(&a, &["y"]), &core(&a, &["x"])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn commensurating_examples() {
        let a = xy();
        let p = core(&a, &["x^2"]);
        assert!(is_commensurating(&p, &a.parse("x").unwrap()));
        assert!(!is_commensurating(&p, &a.parse("y").unwrap()));
        assert!(is_commensurating(&p, &a.parse("x^4").unwrap()));
    }
}
