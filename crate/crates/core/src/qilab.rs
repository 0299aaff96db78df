//! Constructions and checks for RAAG pairs and generic reports: the star
//! core, maximal-simplex slices, the chain of graphs
//! `K(G,𝒫) → K(G,𝒬) → Γ̂(G,𝒬) → E(Γ)`, distortion fitting, four-point δ,
//! and cross-checked malnormality and packing estimates.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::complex::{build_ball, build_coned_off, build_extension_graph, BallParams, Caps, ComplexBall, ConjugateVertex};
use crate::error::{Error, Result};
use crate::oracles::raag::{parabolic_intersection, raag_simplex_test};
use crate::oracles::{CosetId, GroupSpec, Oracle, PairSpec, PeripheralSpec};
use crate::rational::Rational as RationalSet;
use crate::stallings::{malnormality_certificate, MalnormalVerdict, DEFAULT_STATE_CAP};
use crate::words::{
    ball, double_coset_split, is_in_parabolic, raag_normalize, strip_parabolic_tail, DefiningGraph, Group, Letter,
    Word,
};

/// A coset `g⟨Star(v)⟩`, identified with the extension-graph vertex `v^g`.
pub type StarCoset = ConjugateVertex;

/// A machine-readable check result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub pair: Value,
    pub params: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub verdict: String,
    pub evidence: Vec<Value>,
}

impl Report {
    pub fn new(check: &str, pair: Value) -> Self {
        Report {
            check: check.into(),
            pair,
            params: BTreeMap::new(),
            seed: None,
            verdict: String::new(),
            evidence: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.into(), json!(value));
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Hypotheses shared by the RAAG constructions: connected, triangle-free,
/// every vertex of valence at least two.
pub fn check_raag_hypotheses(graph: &DefiningGraph) -> Result<()> {
    let mut bad = Vec::new();
    if !graph.is_connected() {
        bad.push("defining graph is disconnected");
    }
    if !graph.is_triangle_free() {
        bad.push("defining graph has a triangle");
    }
    if graph.min_valence() < 2 {
        bad.push("defining graph has a vertex of valence < 2");
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Capability(bad.join("; ")))
    }
}

/// A random word of length at most `max_len` over `rank` generators.
pub fn sample_word(rng: &mut impl Rng, rank: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| Letter::new(rng.gen_range(0..rank), rng.gen_bool(0.5))).collect()
}

fn sample_word_over(rng: &mut impl Rng, gens: &[usize], max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| Letter::new(gens[rng.gen_range(0..gens.len())], rng.gen_bool(0.5))).collect()
}

/// A vertex `g⟨a,c⟩` of the complex of maximal standard abelians.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeCoset {
    pub rep: Word,
    pub pair: [usize; 2],
}

impl EdgeCoset {
    pub fn new(graph: &DefiningGraph, g: &Word, a: usize, b: usize) -> Self {
        let pair = [a.min(b), a.max(b)];
        let (head, _) = strip_parabolic_tail(graph, g, &pair.into_iter().collect());
        EdgeCoset { rep: head.into_word(), pair }
    }

    pub fn translate(&self, graph: &DefiningGraph, h: &Word) -> Self {
        EdgeCoset::new(graph, &h.concat(&self.rep), self.pair[0], self.pair[1])
    }
}

/// Whether `x⟨pair⟩` belongs to the maximal simplex `{gw⟨a,c⟩}`.
pub fn in_maximal_simplex(graph: &DefiningGraph, g: &Word, a: usize, v: &EdgeCoset) -> bool {
    let c = match v.pair {
        [p, q] if p == a => q,
        [p, q] if q == a => p,
        _ => return false,
    };
    graph.adjacent(a, c) && is_in_parabolic(graph, &g.inverse().concat(&v.rep), &graph.star(a))
}

/// The subgroup `⟨S⟩` of a RAAG as a group on its own letters.
struct Sub<'a> {
    graph: &'a DefiningGraph,
    gens: Vec<usize>,
}

impl Group for Sub<'_> {
    type Element = Word;

    fn generator_count(&self) -> usize {
        self.gens.len()
    }

    fn identity(&self) -> Word {
        Word::empty()
    }

    fn mul_letter(&self, e: &Word, l: Letter) -> Word {
        let mut w = e.clone();
        w.push(Letter::new(self.gens[l.index()], l.is_inverse()));
        raag_normalize(self.graph, &w)
    }
}

/// Cosets `gw⟨a,c⟩` for `w` in the R-ball of `⟨Star(a)⟩` and `c ∈ Link(a)`,
/// canonical and sorted.
pub fn maximal_simplex_slice(graph: &DefiningGraph, g: &Word, a: usize, radius: usize, cap: usize) -> Result<Vec<EdgeCoset>> {
    check_raag_hypotheses(graph)?;
    if a >= graph.vertex_count() {
        return Err(Error::Precondition(format!("vertex {a} out of range")));
    }
    let sub = Sub { graph, gens: graph.star(a).into_iter().collect() };
    let mut out = BTreeSet::new();
    for (w, _) in ball(&sub, radius, cap)? {
        let gw = g.concat(&w);
        for c in graph.link(a) {
            out.insert(EdgeCoset::new(graph, &gw, a, c));
        }
    }
    Ok(out.into_iter().collect())
}

/// Every pair in the slice passes the simplex test, and `g·a·g⁻¹` is a
/// common witness.
pub fn check_slice(graph: &DefiningGraph, g: &Word, a: usize, slice: &[EdgeCoset]) -> Result<bool> {
    let x = raag_normalize(graph, &g.concat(&Word::from_letter(Letter::gen(a))).concat(&g.inverse()));
    for (i, u) in slice.iter().enumerate() {
        if !crate::oracles::raag::in_conjugate(graph, &x, &u.rep, &u.pair.into_iter().collect()) {
            return Ok(false);
        }
        for v in &slice[i + 1..] {
            if raag_simplex_test(graph, &[(u.rep.clone(), u.pair), (v.rep.clone(), v.pair)])?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreRecord {
    pub g: Word,
    pub generator: usize,
    pub slice_size: usize,
    pub members_tested: usize,
    pub members_stabilize: usize,
    pub nonmembers_tested: usize,
    pub nonmembers_move: usize,
}

impl CoreRecord {
    pub fn ok(&self) -> bool {
        self.members_stabilize == self.members_tested && self.nonmembers_move == self.nonmembers_tested
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreReport {
    /// Generator sets `Star(v)`, one per vertex.
    pub subgroups: Vec<Vec<usize>>,
    pub records: Vec<CoreRecord>,
}

/// The star subgroups, with sampled checks that `g⟨Star(a)⟩g⁻¹` maps the
/// maximal simplex through `g` and `a` into itself while other conjugates
/// move it.
pub fn star_core(graph: &DefiningGraph, samples: usize, seed: u64) -> Result<CoreReport> {
    check_raag_hypotheses(graph)?;
    let n = graph.vertex_count();
    let subgroups: Vec<Vec<usize>> = (0..n).map(|v| graph.star(v).into_iter().collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(samples);
    for _ in 0..samples {
        let g = raag_normalize(graph, &sample_word(&mut rng, n, 3));
        let a = rng.gen_range(0..n);
        let slice = maximal_simplex_slice(graph, &g, a, 1, 100_000)?;
        let star = &subgroups[a];
        let mut rec = CoreRecord {
            g: g.clone(),
            generator: a,
            slice_size: slice.len(),
            members_tested: 0,
            members_stabilize: 0,
            nonmembers_tested: 0,
            nonmembers_move: 0,
        };
        for _ in 0..4 {
            let w = sample_word_over(&mut rng, star, 3);
            let h = g.concat(&w).concat(&g.inverse());
            rec.members_tested += 1;
            if slice.iter().all(|v| in_maximal_simplex(graph, &g, a, &v.translate(graph, &h))) {
                rec.members_stabilize += 1;
            }
        }
        let mut tries = 0;
        while rec.nonmembers_tested < 4 && tries < 100 {
            tries += 1;
            let u = sample_word(&mut rng, n, 4);
            if is_in_parabolic(graph, &u, &graph.star(a)) {
                continue;
            }
            let h = g.concat(&u).concat(&g.inverse());
            rec.nonmembers_tested += 1;
            if slice.iter().any(|v| !in_maximal_simplex(graph, &g, a, &v.translate(graph, &h))) {
                rec.nonmembers_move += 1;
            }
        }
        records.push(rec);
    }
    Ok(CoreReport { subgroups, records })
}

/// Images of ball vertices and edges under the map to star cosets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarMap {
    /// For `g⟨a,b⟩`, the cosets `g⟨Star(a)⟩` and `g⟨Star(b)⟩`.
    pub vertex_images: Vec<Vec<StarCoset>>,
    /// Each edge's axis `g₁⟨Star(v)⟩` through its witness generator `v`.
    pub edge_axes: Vec<((usize, usize), StarCoset)>,
}

fn edge_coset_of(oracle: &Oracle, c: &CosetId) -> Result<EdgeCoset> {
    let (_, gens) = oracle
        .raag_parts()
        .ok_or_else(|| Error::Capability("needs a RAAG pair".into()))?;
    let s: Vec<usize> = gens[c.peripheral].iter().copied().collect();
    match s.as_slice() {
        [a, b] => Ok(EdgeCoset { rep: c.rep.clone(), pair: [*a, *b] }),
        _ => Err(Error::Capability("peripherals must be edge subgroups".into())),
    }
}

/// Map a ball of the complex of maximal standard abelians to star cosets.
pub fn map_p_to_q(oracle: &Oracle, ball: &ComplexBall) -> Result<StarMap> {
    let (graph, _) = oracle
        .raag_parts()
        .ok_or_else(|| Error::Capability("needs a RAAG pair".into()))?;
    let cosets: Vec<EdgeCoset> = ball.vertices.iter().map(|c| edge_coset_of(oracle, c)).collect::<Result<_>>()?;
    let vertex_images = cosets
        .iter()
        .map(|c| c.pair.iter().map(|&v| StarCoset::new(graph, v, &c.rep)).collect())
        .collect();
    let mut edge_axes = Vec::new();
    for e in ball.edges() {
        let (u, v) = (&cosets[e.vertices[0]], &cosets[e.vertices[1]]);
        let w = raag_simplex_test(graph, &[(u.rep.clone(), u.pair), (v.rep.clone(), v.pair)])?
            .ok_or_else(|| Error::Witness("ball edge fails the simplex test".into()))?;
        let axis = StarCoset::new(graph, w.generator, &u.rep);
        if axis != StarCoset::new(graph, w.generator, &v.rep) {
            return Err(Error::Witness("edge endpoints lie in different star cosets".into()));
        }
        edge_axes.push(((e.vertices[0], e.vertices[1]), axis));
    }
    Ok(StarMap { vertex_images, edge_axes })
}

/// Count ball simplices whose image star cosets fail to span a simplex of
/// the star complex.
pub fn simplicial_violations(q_oracle: &Oracle, ball: &ComplexBall, map: &StarMap) -> Result<usize> {
    let sets = ball.all_simplices();
    let bad: Vec<bool> = sets
        .par_iter()
        .map(|s| {
            let image: BTreeSet<&StarCoset> = s.iter().flat_map(|&v| map.vertex_images[v].iter()).collect();
            let cosets: Vec<CosetId> =
                image.into_iter().map(|q| q_oracle.canonical_coset(q.generator, &q.rep)).collect::<Result<_>>()?;
            Ok(q_oracle.infinite_intersection(&cosets)?.is_none())
        })
        .collect::<Result<_>>()?;
    Ok(bad.into_iter().filter(|&b| b).count())
}

/// A node on a path in the coned-off graph of star cosets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathNode {
    Coset(StarCoset),
    Element(Word),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConedOffPath {
    pub nodes: Vec<PathNode>,
}

impl ConedOffPath {
    pub fn len(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every hop joins a group element to a star coset containing it.
    pub fn verify(&self, graph: &DefiningGraph) -> bool {
        self.nodes.windows(2).all(|w| match (&w[0], &w[1]) {
            (PathNode::Coset(q), PathNode::Element(x)) | (PathNode::Element(x), PathNode::Coset(q)) => {
                is_in_parabolic(graph, &q.rep.inverse().concat(x), &graph.star(q.generator))
            }
            _ => false,
        })
    }
}

fn meet(graph: &DefiningGraph, q1: &StarCoset, q2: &StarCoset) -> Option<Word> {
    let split = double_coset_split(
        graph,
        &q1.rep.inverse().concat(&q2.rep),
        &graph.star(q1.generator),
        &graph.star(q2.generator),
    );
    split.core.is_empty().then(|| raag_normalize(graph, &q1.rep.concat(&split.left)))
}

/// A path of length at most four from `q1` to `q2` in the coned-off graph
/// of star cosets, through an intermediate star coset on the common axis.
pub fn conedoff_path4(graph: &DefiningGraph, q1: &StarCoset, q2: &StarCoset) -> Result<ConedOffPath> {
    if q1 == q2 {
        return Ok(ConedOffPath { nodes: vec![PathNode::Coset(q1.clone())] });
    }
    if let Some(x) = meet(graph, q1, q2) {
        let path = ConedOffPath {
            nodes: vec![PathNode::Coset(q1.clone()), PathNode::Element(x), PathNode::Coset(q2.clone())],
        };
        return if path.verify(graph) { Ok(path) } else { Err(Error::Witness("two-hop path fails".into())) };
    }
    let (p, r) = parabolic_intersection(
        graph,
        &[(q1.rep.clone(), graph.star(q1.generator)), (q2.rep.clone(), graph.star(q2.generator))],
    )
    .expect("two cosets given");
    if r.is_empty() {
        return Err(Error::Precondition("star cosets have finite conjugate intersection".into()));
    }
    for v in r {
        let mid = StarCoset::new(graph, v, &p);
        let (Some(x1), Some(x2)) = (meet(graph, q1, &mid), meet(graph, &mid, q2)) else {
            continue;
        };
        let path = ConedOffPath {
            nodes: vec![
                PathNode::Coset(q1.clone()),
                PathNode::Element(x1),
                PathNode::Coset(mid),
                PathNode::Element(x2),
                PathNode::Coset(q2.clone()),
            ],
        };
        if path.verify(graph) {
            return Ok(path);
        }
    }
    Err(Error::Witness("no verified path of length four".into()))
}

/// A sampled pair of vertices with its distances before and after a map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledPair<F> {
    pub a: usize,
    pub b: usize,
    pub source: F,
    pub target: F,
}

/// Empirical quasi-isometry constants: for each `L` on the grid, the least
/// `C` with `d/L − C ≤ d' ≤ L·d + C` on every sampled pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport<F: Float> {
    pub pairs: Vec<SampledPair<F>>,
    pub frontier: Vec<(F, F)>,
    pub l: F,
    pub c: F,
    /// Largest distance from an image vertex to its designated coset.
    pub m: F,
}

pub type Distortion = DistortionReport<f64>;

impl<F: Float> DistortionReport<F> {
    pub fn grid() -> Vec<F> {
        [1.0, 1.5, 2.0, 3.0, 4.0].iter().map(|&x| F::from(x).unwrap()).collect()
    }

    pub fn min_c(pairs: &[SampledPair<F>], l: F) -> F {
        pairs.iter().fold(F::zero(), |c, p| {
            let lo = p.source / l - p.target;
            let hi = p.target - l * p.source;
            c.max(lo).max(hi)
        })
    }

    pub fn fit(pairs: Vec<SampledPair<F>>, m: F) -> Self {
        let frontier: Vec<(F, F)> = Self::grid().into_iter().map(|l| (l, Self::min_c(&pairs, l))).collect();
        let (l, c) = frontier.iter().copied().fold(frontier[0], |best, x| if x.1 < best.1 { x } else { best });
        DistortionReport { pairs, frontier, l, c, m }
    }

    /// Both inequalities hold on every sampled pair.
    pub fn holds(&self) -> bool {
        let eps = F::from(1e-9).unwrap();
        self.pairs
            .iter()
            .all(|p| p.source / self.l - self.c <= p.target + eps && p.target <= self.l * p.source + self.c + eps)
    }
}

/// Constants of `g∘f` from those of `f` and `g` (`L ≥ 1`).
pub fn compose_constants<F: Float>(first: (F, F), second: (F, F)) -> (F, F) {
    (first.0 * second.0, second.0 * first.1 + second.1)
}

fn bfs(adj: &[BTreeSet<usize>], s: usize) -> Vec<Option<usize>> {
    let mut d = vec![None; adj.len()];
    d[s] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        let du = d[u].unwrap();
        for &v in &adj[u] {
            if d[v].is_none() {
                d[v] = Some(du + 1);
                q.push_back(v);
            }
        }
    }
    d
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QiChainReport {
    pub radius: usize,
    pub vertex_counts: [usize; 4],
    pub stages: Vec<(String, Distortion)>,
    pub composite: Distortion,
    /// Composed per-stage constants.
    pub composite_bound: (f64, f64),
    /// The composite's least `C` at the composed `L` is within the bound.
    pub consistent: bool,
    /// Pairs dropped because some ball in the chain separates them.
    pub skipped: usize,
}

/// Sample the chain of maps from the complex of maximal standard abelians
/// to the star complex, the coned-off graph of stars, and the extension
/// graph, all restricted to balls of radius `R`.
pub fn qi_chain(graph: &DefiningGraph, radius: usize, samples: usize, seed: u64, caps: &Caps) -> Result<QiChainReport> {
    check_raag_hypotheses(graph)?;
    let spec = |p| PairSpec { group: GroupSpec::Raag { graph: graph.clone() }, names: None, peripherals: vec![p] };
    let p_oracle = Oracle::new(&spec(PeripheralSpec::MaximalStandardAbelians))?;
    let q_oracle = Oracle::new(&spec(PeripheralSpec::Stars))?;
    let params = BallParams { radius, max_dim: 1, tau: None, caps: *caps };
    let kp = build_ball(&p_oracle, &params)?;
    let kq = build_ball(&q_oracle, &params)?;
    let coned = build_coned_off(&q_oracle, radius, &[], false, caps)?;
    let ext = build_extension_graph(graph, radius, caps)?;

    let q_index: HashMap<&CosetId, usize> = kq.vertices.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let coned_index: HashMap<&str, usize> =
        coned.vertices.iter().filter(|v| v.kind == "coset").map(|v| (v.label.as_str(), v.id)).collect();
    let ext_index: HashMap<&StarCoset, usize> = ext.vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();

    let sources: Vec<EdgeCoset> = kp.vertices.iter().map(|c| edge_coset_of(&p_oracle, c)).collect::<Result<_>>()?;
    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    let mut f3 = Vec::new();
    let mut m1 = 0usize;
    let adj_q = kq.adjacency();
    for s in &sources {
        let star = StarCoset::new(graph, s.pair[0], &s.rep);
        let other = StarCoset::new(graph, s.pair[1], &s.rep);
        let c = q_oracle.canonical_coset(star.generator, &star.rep)?;
        let c_other = q_oracle.canonical_coset(other.generator, &other.rep)?;
        let qi = *q_index.get(&c).ok_or_else(|| Error::Witness("star image outside the ball".into()))?;
        if let Some(&qo) = q_index.get(&c_other) {
            m1 = m1.max(bfs(&adj_q, qi)[qo].unwrap_or(0));
        }
        let label = q_oracle.format_coset(&c);
        f1.push(qi);
        f2.push(*coned_index.get(label.as_str()).ok_or_else(|| Error::Witness("coset outside the coned-off ball".into()))?);
        f3.push(*ext_index.get(&star).ok_or_else(|| Error::Witness("conjugate outside the extension ball".into()))?);
    }

    let n = sources.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let pairs: Vec<(usize, usize)> = if all.len() <= samples {
        all
    } else {
        let mut p: Vec<(usize, usize)> = all.choose_multiple(&mut rng, samples).copied().collect();
        p.sort_unstable();
        p
    };

    let adj_p = kp.adjacency();
    let adj_c = coned.adjacency();
    let adj_e = ext.adjacency();
    let starts: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
    let dist_rows: HashMap<usize, [Vec<Option<usize>>; 4]> = starts
        .par_iter()
        .map(|&a| (a, [bfs(&adj_p, a), bfs(&adj_q, f1[a]), bfs(&adj_c, f2[a]), bfs(&adj_e, f3[a])]))
        .collect();
    let mut stage_pairs: [Vec<SampledPair<f64>>; 4] = Default::default();
    let mut skipped = 0;
    for &(a, b) in &pairs {
        let rows = &dist_rows[&a];
        let ds = [rows[0][b], rows[1][f1[b]], rows[2][f2[b]], rows[3][f3[b]]];
        let Some(ds) = ds.iter().copied().collect::<Option<Vec<usize>>>() else {
            skipped += 1;
            continue;
        };
        let d: Vec<f64> = ds.iter().map(|&x| x as f64).collect();
        for k in 0..3 {
            stage_pairs[k].push(SampledPair { a, b, source: d[k], target: d[k + 1] });
        }
        stage_pairs[3].push(SampledPair { a, b, source: d[0], target: d[3] });
    }
    let [s1, s2, s3, comp] = stage_pairs;
    let stages = vec![
        ("complex-to-star-complex".to_string(), Distortion::fit(s1, m1 as f64)),
        ("star-complex-to-coned-off".to_string(), Distortion::fit(s2, 0.0)),
        ("coned-off-to-extension-graph".to_string(), Distortion::fit(s3, 0.0)),
    ];
    let composite = Distortion::fit(comp, m1 as f64);
    let bound = stages
        .iter()
        .map(|(_, d)| (d.l, d.c))
        .reduce(compose_constants)
        .expect("three stages");
    let consistent = Distortion::min_c(&composite.pairs, bound.0) <= bound.1 + 1e-9;
    Ok(QiChainReport {
        radius,
        vertex_counts: [kp.vertices.len(), kq.vertices.len(), coned.vertices.len(), ext.vertices.len()],
        stages,
        composite,
        composite_bound: bound,
        consistent,
        skipped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub delta: f64,
    pub vertex_count: usize,
    pub diameter: usize,
    pub exhaustive: bool,
    pub quadruples: u64,
}

/// Quadruples are enumerated exhaustively below this many vertices.
pub const EXHAUSTIVE_DELTA_LIMIT: usize = 200;
pub const DELTA_SAMPLES: usize = 100_000;

fn four_point(d: &[Vec<u32>], x: usize, y: usize, z: usize, w: usize) -> u32 {
    let mut s = [d[x][y] + d[z][w], d[x][z] + d[y][w], d[x][w] + d[y][z]];
    s.sort_unstable();
    s[2] - s[1]
}

/// Gromov four-point δ of a connected graph, by exact BFS distances.
pub fn four_point_delta(adj: &[BTreeSet<usize>], seed: u64) -> Result<DeltaReport> {
    let n = adj.len();
    if n == 0 {
        return Err(Error::Precondition("empty graph".into()));
    }
    let d: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|s| bfs(adj, s).into_iter().map(|x| x.map(|x| x as u32)).collect::<Option<Vec<u32>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Precondition("graph is disconnected".into()))?;
    let diameter = d.iter().flatten().copied().max().unwrap_or(0) as usize;
    let (twice, exhaustive, quadruples) = if n < EXHAUSTIVE_DELTA_LIMIT {
        let twice = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut best = 0;
                for y in x + 1..n {
                    for z in y + 1..n {
                        for w in z + 1..n {
                            best = best.max(four_point(&d, x, y, z, w));
                        }
                    }
                }
                best
            })
            .max()
            .unwrap_or(0);
        let n64 = n as u64;
        let count = if n < 4 { 0 } else { n64 * (n64 - 1) * (n64 - 2) * (n64 - 3) / 24 };
        (twice, true, count)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = 0;
        for _ in 0..DELTA_SAMPLES {
            let q: [usize; 4] = std::array::from_fn(|_| rng.gen_range(0..n));
            best = best.max(four_point(&d, q[0], q[1], q[2], q[3]));
        }
        (best, false, DELTA_SAMPLES as u64)
    };
    Ok(DeltaReport { delta: twice as f64 / 2.0, vertex_count: n, diameter, exhaustive, quadruples })
}

/// The component of `v`, as an induced adjacency list with the map back to
/// the original indices.
pub fn component_of(adj: &[BTreeSet<usize>], v: usize) -> (Vec<BTreeSet<usize>>, Vec<usize>) {
    let keep: Vec<usize> = bfs(adj, v).iter().enumerate().filter(|(_, d)| d.is_some()).map(|(i, _)| i).collect();
    let index: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let sub = keep.iter().map(|&u| adj[u].iter().filter_map(|w| index.get(w).copied()).collect()).collect();
    (sub, keep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalnormalCrosscheck {
    pub certificate_malnormal: bool,
    /// `(i, j, g)` with `Pᵢ ∩ gPⱼg⁻¹` infinite.
    pub witness: Option<(usize, usize, Word)>,
    pub radius: usize,
    pub ball_edges: usize,
    pub agree: bool,
}

/// Compare the Stallings malnormality certificate with edge-freeness of
/// the ball of radius `R`.
pub fn malnormal_crosscheck(oracle: &Oracle, radius: usize, caps: &Caps) -> Result<MalnormalCrosscheck> {
    let cores = oracle
        .free_cores()
        .ok_or_else(|| Error::Capability("malnormality certificates need a free-group pair".into()))?;
    let verdict = malnormality_certificate(cores, DEFAULT_STATE_CAP)?;
    let ball = build_ball(oracle, &BallParams { radius, max_dim: 1, tau: None, caps: *caps })?;
    let (certificate_malnormal, witness) = match verdict {
        MalnormalVerdict::Malnormal => (true, None),
        MalnormalVerdict::Violation { i, j, g } => (false, Some((i, j, g))),
    };
    let ball_edges = ball.edges().len();
    Ok(MalnormalCrosscheck {
        certificate_malnormal,
        witness,
        radius,
        ball_edges,
        agree: certificate_malnormal == (ball_edges == 0),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingReport {
    /// Max over ball simplices of the least `r` with `⋂𝒩_r(gᵢPᵢ)` nonempty
    /// (an upper bound when not exact).
    pub estimate: usize,
    pub exact: bool,
    pub simplices: usize,
    pub worst: Option<Vec<usize>>,
}

/// Distance from a point to a coset, by scanning the ball around the point.
pub fn point_coset_distance(oracle: &Oracle, x: &Word, c: &CosetId) -> Result<usize> {
    let bound = oracle.normal_word(&x.inverse().concat(&c.rep)).len();
    if let Some(cores) = oracle.free_cores() {
        return Ok(cores[c.peripheral].coset_min_rep(&x.inverse().concat(&c.rep)).len());
    }
    for (_, y) in ball(oracle, bound, usize::MAX)? {
        if oracle.canonical_coset(c.peripheral, &x.concat(&y))? == *c {
            return Ok(y.len());
        }
    }
    Ok(bound)
}

fn free_packing(oracle: &Oracle, cosets: &[&CosetId]) -> Result<usize> {
    let cores = oracle.free_cores().expect("free pair");
    let mut upper = 0;
    for c in cosets {
        upper = upper.max(point_coset_distance(oracle, &cosets[0].rep, c)?);
    }
    for r in 0..upper {
        let mut acc: Option<RationalSet> = None;
        for c in cosets {
            let n = RationalSet::coset(&cores[c.peripheral], &c.rep).neighborhood(r);
            acc = Some(match acc {
                None => n,
                Some(a) => a.intersect(&n),
            });
        }
        if !acc.expect("nonempty simplex").is_empty() {
            return Ok(r);
        }
    }
    Ok(upper)
}

fn witness_packing(oracle: &Oracle, cosets: &[&CosetId]) -> Result<usize> {
    let mut best = usize::MAX;
    for x in cosets {
        let mut worst = 0;
        for c in cosets {
            worst = worst.max(point_coset_distance(oracle, &x.rep, c)?);
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
    }
    Ok(best)
}

/// Packing radius estimate over the simplices of a ball.
pub fn packing_radius(oracle: &Oracle, ball: &ComplexBall) -> Result<PackingReport> {
    let exact = oracle.free_cores().is_some();
    let sets: Vec<Vec<usize>> = ball.all_simplices().into_iter().filter(|s| s.len() > 1).collect();
    let values: Vec<usize> = sets
        .par_iter()
        .map(|s| {
            let cs: Vec<&CosetId> = s.iter().map(|&v| &ball.vertices[v]).collect();
            if exact {
                free_packing(oracle, &cs)
            } else {
                witness_packing(oracle, &cs)
            }
        })
        .collect::<Result<_>>()?;
    let mut estimate = 0;
    let mut worst = None;
    for (s, v) in sets.iter().zip(values) {
        if worst.is_none() || v > estimate {
            estimate = v;
            worst = Some(s.clone());
        }
    }
    Ok(PackingReport { estimate, exact, simplices: sets.len(), worst })
}
