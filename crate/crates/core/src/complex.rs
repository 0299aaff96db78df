//! Finite balls of the coset intersection complex and related graphs.
//!
//! A ball holds every coset with a representative of length at most `R`,
//! every edge among them, and simplices up to a dimension cap, each with a
//! witness that is re-checked by membership in the conjugates. The same
//! module builds τ-filtered balls (free pairs), coned-off Cayley graph balls
//! and extension-graph balls, and exports any of them as DOT or JSON.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::oracles::{CosetId, Oracle};
use crate::words::{ball, commutes, raag_normalize, strip_parabolic_tail, Alphabet, DefiningGraph, Group, Letter, RaagGroup, Word};

/// Version of the JSON export schema.
pub const EXPORT_VERSION: u32 = 1;

/// Guard rails for ball construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_radius: usize,
    pub max_dim: usize,
    pub max_vertices: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_radius: 8, max_dim: 6, max_vertices: 100_000 }
    }
}

/// Parameters of a complex ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallParams {
    pub radius: usize,
    pub max_dim: usize,
    /// Build the τ-filtered complex instead of the full one.
    pub tau: Option<usize>,
    pub caps: Caps,
}

impl BallParams {
    pub fn new(radius: usize, max_dim: usize) -> Self {
        BallParams { radius, max_dim, tau: None, caps: Caps::default() }
    }

    pub fn with_tau(mut self, tau: usize) -> Self {
        self.tau = Some(tau);
        self
    }

    fn check(&self) -> Result<()> {
        if self.radius > self.caps.max_radius {
            return Err(Error::Resource { what: "radius", cap: self.caps.max_radius });
        }
        if self.max_dim > self.caps.max_dim {
            return Err(Error::Resource { what: "simplex dimension", cap: self.caps.max_dim });
        }
        Ok(())
    }
}

/// A simplex (vertex indices, ascending) with its witness: a nontrivial
/// element of the conjugate intersection, or for τ-filtered balls a point
/// within τ of every coset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub witness: Word,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexBall {
    pub params: BallParams,
    pub vertices: Vec<CosetId>,
    /// Simplices of dimension ≥ 1, grouped by dimension: `simplices[0]` are
    /// the edges, `simplices[1]` the triangles, and so on.
    pub simplices: Vec<Vec<Simplex>>,
    /// Some top-dimensional simplex extends to a larger one.
    pub dimension_capped: bool,
}

impl ComplexBall {
    pub fn edges(&self) -> &[Simplex] {
        self.simplices.first().map_or(&[], |v| v.as_slice())
    }

    /// The 1-skeleton as adjacency sets.
    pub fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.vertices.len()];
        for e in self.edges() {
            adj[e.vertices[0]].insert(e.vertices[1]);
            adj[e.vertices[1]].insert(e.vertices[0]);
        }
        adj
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = (u.min(v), u.max(v));
        self.edges().iter().any(|e| e.vertices == [a, b])
    }

    pub fn index_of(&self, c: &CosetId) -> Option<usize> {
        self.vertices.binary_search(c).ok()
    }

    /// All simplices including vertices, as sorted vertex sets.
    pub fn all_simplices(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.vertices.len()).map(|v| vec![v]).collect();
        for level in &self.simplices {
            out.extend(level.iter().map(|s| s.vertices.clone()));
        }
        out
    }
}

fn test_simplex(oracle: &Oracle, cosets: &[CosetId], tau: Option<usize>) -> Result<Option<Word>> {
    match tau {
        None => oracle.infinite_intersection(cosets),
        Some(t) => oracle.ktau_simplex(cosets, t),
    }
}

/// Build the ball of radius `R` in the coset intersection complex (or, with
/// `tau`, in the τ-filtered complex).
pub fn build_ball(oracle: &Oracle, params: &BallParams) -> Result<ComplexBall> {
    params.check()?;
    let caps = oracle.capabilities();
    if !caps.exact_intersection {
        return Err(Error::Capability("oracle lacks exact intersection".into()));
    }
    if params.tau.is_some() && !caps.ktau_supported {
        return Err(Error::Capability("K_tau is only supported for free-group pairs".into()));
    }
    let vertices = oracle.enumerate_cosets(params.radius, params.caps.max_vertices)?;
    let n = vertices.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let edges: Vec<Simplex> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let w = test_simplex(oracle, &[vertices[i].clone(), vertices[j].clone()], params.tau)?;
            Ok(w.map(|witness| Simplex { vertices: vec![i, j], witness }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut adj = vec![BTreeSet::new(); n];
    for e in &edges {
        adj[e.vertices[0]].insert(e.vertices[1]);
        adj[e.vertices[1]].insert(e.vertices[0]);
    }
    let mut simplices = vec![edges];
    let mut dimension_capped = false;
    if params.max_dim == 0 {
        dimension_capped = !simplices[0].is_empty();
        simplices.clear();
    }
    let mut dim = 1;
    while dim >= 1 && dim < params.max_dim + 1 && !simplices.is_empty() {
        let prev = simplices.last().unwrap();
        if prev.is_empty() {
            break;
        }
        let last_level = dim == params.max_dim;
        let candidates: Vec<Vec<usize>> = prev
            .iter()
            .flat_map(|s| {
                let top = *s.vertices.last().unwrap();
                let adj = &adj;
                adj[top]
                    .range(top + 1..)
                    .filter(move |&&w| s.vertices.iter().all(|u| adj[*u].contains(&w)))
                    .map(move |&w| {
                        let mut v = s.vertices.clone();
                        v.push(w);
                        v
                    })
            })
            .collect();
        if last_level {
            // Only ask whether some extension exists.
            let found = candidates
                .par_iter()
                .map(|vs| {
                    let cs: Vec<CosetId> = vs.iter().map(|&i| vertices[i].clone()).collect();
                    test_simplex(oracle, &cs, params.tau).map(|w| w.is_some())
                })
                .find_any(|r| !matches!(r, Ok(false)));
            dimension_capped = match found {
                Some(r) => r?,
                None => false,
            };
            break;
        }
        let next: Vec<Simplex> = candidates
            .par_iter()
            .map(|vs| {
                let cs: Vec<CosetId> = vs.iter().map(|&i| vertices[i].clone()).collect();
                Ok(test_simplex(oracle, &cs, params.tau)?.map(|witness| Simplex { vertices: vs.clone(), witness }))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        if next.is_empty() {
            break;
        }
        simplices.push(next);
        dim += 1;
    }
    Ok(ComplexBall { params: *params, vertices, simplices, dimension_capped })
}

/// Re-check every stored witness independently. For full balls the witness
/// must be a nontrivial element of every conjugate; for τ-filtered balls it
/// must lie within τ of every coset.
pub fn verify_witnesses(oracle: &Oracle, ball: &ComplexBall) -> Result<()> {
    for level in &ball.simplices {
        for s in level {
            for &v in &s.vertices {
                let c = &ball.vertices[v];
                let ok = match ball.params.tau {
                    None => !oracle.normal_word(&s.witness).is_empty() && oracle.in_conjugate(&s.witness, c),
                    Some(t) => point_distance(oracle, &s.witness, c)? <= t,
                };
                if !ok {
                    return Err(Error::Witness(format!(
                        "witness {} fails for {}",
                        oracle.alphabet().format(&s.witness),
                        oracle.format_coset(c)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Distance from a point to a coset in a free group: the length of the
/// canonical representative of `x⁻¹gP`.
pub fn point_distance(oracle: &Oracle, x: &Word, c: &CosetId) -> Result<usize> {
    let cores = oracle
        .free_cores()
        .ok_or_else(|| Error::Capability("point distances need a free-group pair".into()))?;
    Ok(cores[c.peripheral].coset_min_rep(&x.inverse().concat(&c.rep)).len())
}

/// Dimension and clique statistics of a ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallStats {
    pub vertex_count: usize,
    pub edge_count: usize,
    /// Simplex counts by dimension, starting at dimension 0.
    pub simplex_counts: Vec<usize>,
    pub max_simplex_cardinality: usize,
    pub max_simplex: Vec<usize>,
    pub max_clique_cardinality: usize,
    pub max_clique: Vec<usize>,
    pub dimension_capped: bool,
}

/// Maximum clique by Bron–Kerbosch with pivoting; ties broken by the
/// lexicographically least vertex list.
pub fn max_clique(adj: &[BTreeSet<usize>]) -> Vec<usize> {
    fn bk(
        adj: &[BTreeSet<usize>],
        r: &mut Vec<usize>,
        p: BTreeSet<usize>,
        mut x: BTreeSet<usize>,
        best: &mut Vec<usize>,
    ) {
        if p.is_empty() && x.is_empty() {
            let mut c = r.clone();
            c.sort_unstable();
            if c.len() > best.len() || (c.len() == best.len() && c < *best) {
                *best = c;
            }
            return;
        }
        if r.len() + p.len() < best.len() {
            return;
        }
        let pivot = *p.union(&x).max_by_key(|&&u| adj[u].intersection(&p).count()).unwrap();
        let mut p = p;
        let cands: Vec<usize> = p.iter().copied().filter(|v| !adj[pivot].contains(v)).collect();
        for v in cands {
            r.push(v);
            let np = p.intersection(&adj[v]).copied().collect();
            let nx = x.intersection(&adj[v]).copied().collect();
            bk(adj, r, np, nx, best);
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
    }
    let mut best = Vec::new();
    let p: BTreeSet<usize> = (0..adj.len()).collect();
    bk(adj, &mut Vec::new(), p, BTreeSet::new(), &mut best);
    best
}

pub fn clique_and_dimension_stats(ball: &ComplexBall) -> BallStats {
    let mut counts = vec![ball.vertices.len()];
    counts.extend(ball.simplices.iter().map(|l| l.len()));
    while counts.len() > 1 && *counts.last().unwrap() == 0 {
        counts.pop();
    }
    let max_simplex = ball
        .simplices
        .iter()
        .rev()
        .find(|l| !l.is_empty())
        .map(|l| l[0].vertices.clone())
        .unwrap_or_else(|| if ball.vertices.is_empty() { vec![] } else { vec![0] });
    let clique = max_clique(&ball.adjacency());
    BallStats {
        vertex_count: ball.vertices.len(),
        edge_count: ball.edges().len(),
        simplex_counts: counts,
        max_simplex_cardinality: max_simplex.len(),
        max_simplex,
        max_clique_cardinality: clique.len(),
        max_clique: clique,
        dimension_capped: ball.dimension_capped,
    }
}

/// Connected components of the 1-skeleton of the ball.
///
/// A single component proves the slice is connected; several components
/// only mean "not connected at this radius".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCensus {
    pub component_count: usize,
    /// Component sizes, descending.
    pub sizes: Vec<usize>,
    pub isolated: usize,
    /// Component index per vertex, numbered by least member.
    pub labels: Vec<usize>,
}

pub fn connectivity(ball: &ComplexBall) -> ComponentCensus {
    components(ball.vertices.len(), ball.edges().iter().map(|e| (e.vertices[0], e.vertices[1])))
}

fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> ComponentCensus {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut labels = vec![0; n];
    let mut sizes: Vec<usize> = Vec::new();
    for (v, label) in labels.iter_mut().enumerate() {
        let r = find(&mut parent, v);
        let next = ids.len();
        let id = *ids.entry(r).or_insert(next);
        if id == sizes.len() {
            sizes.push(0);
        }
        sizes[id] += 1;
        *label = id;
    }
    let isolated = sizes.iter().filter(|&&s| s == 1).count();
    let mut sorted = sizes.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    ComponentCensus { component_count: sizes.len(), sizes: sorted, isolated, labels }
}

/// One G-orbit of edges seen in the ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeOrbit {
    pub peripherals: (usize, usize),
    /// Canonical minimal element of the double coset `Pᵢ·g₁⁻¹g₂·Pⱼ`.
    pub double_coset_rep: Word,
    pub distance: usize,
    pub edge_count: usize,
    pub example: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeOrbitCensus {
    pub orbits: Vec<EdgeOrbit>,
    /// Maximum coset distance over ball edges.
    pub fence: usize,
    pub exact: bool,
}

/// Group edges by the canonical form of the translated pair
/// `(Pᵢ, g₁⁻¹g₂Pⱼ)` up to `Pᵢ` on the left and the swap of the two cosets.
pub fn edge_orbit_census(oracle: &Oracle, ball: &ComplexBall) -> Result<EdgeOrbitCensus> {
    let keys: Vec<((usize, usize, Word), (usize, usize))> = ball
        .edges()
        .par_iter()
        .map(|e| {
            let (c1, c2) = (&ball.vertices[e.vertices[0]], &ball.vertices[e.vertices[1]]);
            let k1 = (c1.peripheral, c2.peripheral, oracle.double_coset_rep(c1, c2)?);
            let k2 = (c2.peripheral, c1.peripheral, oracle.double_coset_rep(c2, c1)?);
            let key = if (&k1.2, k1.0, k1.1) <= (&k2.2, k2.0, k2.1) { k1 } else { k2 };
            Ok((key, (e.vertices[0], e.vertices[1])))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut orbits: BTreeMap<(Word, usize, usize), EdgeOrbit> = BTreeMap::new();
    for ((i, j, rep), example) in keys {
        orbits
            .entry((rep.clone(), i, j))
            .and_modify(|o| o.edge_count += 1)
            .or_insert(EdgeOrbit { peripherals: (i, j), distance: rep.len(), double_coset_rep: rep, edge_count: 1, example });
    }
    let orbits: Vec<EdgeOrbit> = orbits.into_values().collect();
    let fence = orbits.iter().map(|o| o.distance).max().unwrap_or(0);
    Ok(EdgeOrbitCensus { orbits, fence, exact: oracle.capabilities().exact_coset_distance })
}

/// A vertex of an exported graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub label: String,
    pub kind: String,
}

/// An edge of an exported graph; the witness is a printed word when known.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

/// A graph or complex slice ready for export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub version: u32,
    pub graph: String,
    pub pair: Value,
    pub radius: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    pub simplices: Vec<Vec<usize>>,
    pub stats: BTreeMap<String, Value>,
}

impl GraphExport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("export serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<GraphExport> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad graph JSON: {e}")))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("graph \"{}\" {{\n", escape(&self.graph)));
        out.push_str(&format!("  // radius {}", self.radius));
        if let Some(t) = self.tau {
            out.push_str(&format!(", tau {t}"));
        }
        out.push('\n');
        for v in &self.vertices {
            let shape = if v.kind == "element" { "point" } else { "ellipse" };
            out.push_str(&format!("  n{} [label=\"{}\", shape={}];\n", v.id, escape(&v.label), shape));
        }
        for e in &self.edges {
            match &e.kind {
                Some(k) if k != "complex" => {
                    out.push_str(&format!("  n{} -- n{} [class=\"{}\"];\n", e.u, e.v, escape(k)))
                }
                _ => out.push_str(&format!("  n{} -- n{};\n", e.u, e.v)),
            }
        }
        out.push_str("}\n");
        out
    }

    /// Vertex count, edge list and adjacency for analysis.
    pub fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.vertices.len()];
        for e in &self.edges {
            if e.u != e.v {
                adj[e.u].insert(e.v);
                adj[e.v].insert(e.u);
            }
        }
        adj
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Export a complex ball with its statistics.
pub fn export_ball(oracle: &Oracle, ball: &ComplexBall) -> GraphExport {
    let vertices = ball
        .vertices
        .iter()
        .enumerate()
        .map(|(id, c)| VertexRecord { id, label: oracle.format_coset(c), kind: "coset".into() })
        .collect();
    let edges = ball
        .edges()
        .iter()
        .map(|e| EdgeRecord {
            u: e.vertices[0],
            v: e.vertices[1],
            witness: Some(oracle.alphabet().format(&e.witness)),
            kind: None,
        })
        .collect();
    let simplices = ball.simplices.iter().skip(1).flat_map(|l| l.iter().map(|s| s.vertices.clone())).collect();
    let stats = clique_and_dimension_stats(ball);
    let census = connectivity(ball);
    let mut m = BTreeMap::new();
    m.insert("vertex_count".into(), json!(stats.vertex_count));
    m.insert("edge_count".into(), json!(stats.edge_count));
    m.insert("simplex_counts".into(), json!(stats.simplex_counts));
    m.insert("max_simplex_cardinality".into(), json!(stats.max_simplex_cardinality));
    m.insert("max_clique_cardinality".into(), json!(stats.max_clique_cardinality));
    m.insert("dimension_capped".into(), json!(stats.dimension_capped));
    m.insert("components".into(), json!(census.component_count));
    m.insert("max_dim".into(), json!(ball.params.max_dim));
    GraphExport {
        version: EXPORT_VERSION,
        graph: if ball.params.tau.is_some() { "ktau".into() } else { "complex".into() },
        pair: serde_json::to_value(oracle.spec()).expect("spec serializes"),
        radius: ball.params.radius,
        tau: ball.params.tau,
        vertices,
        edges,
        simplices,
        stats: m,
    }
}

/// Ball of the (extended) coned-off Cayley graph: group elements of length
/// at most `R`, the cosets they lie in, edges `{g, gs}` for `s ∈ S`, edges
/// `{g, gP}`, and with `extended` the edges of the complex among the cosets.
pub fn build_coned_off(oracle: &Oracle, radius: usize, s: &[Word], extended: bool, caps: &Caps) -> Result<GraphExport> {
    if radius > caps.max_radius {
        return Err(Error::Resource { what: "radius", cap: caps.max_radius });
    }
    if !oracle.generates_with(s)? {
        return Err(Error::Config(
            "the relative generating set together with the peripherals does not generate the group".into(),
        ));
    }
    let elems = ball(oracle, radius, caps.max_vertices)?;
    let index: HashMap<_, usize> = elems.iter().enumerate().map(|(i, (e, _))| (e.clone(), i)).collect();
    let mut vertices: Vec<VertexRecord> = elems
        .iter()
        .enumerate()
        .map(|(id, (_, w))| VertexRecord { id, label: oracle.alphabet().format(w), kind: "element".into() })
        .collect();
    let mut edges = Vec::new();
    for (i, (e, _)) in elems.iter().enumerate() {
        for gen in s {
            let t = gen.letters().iter().fold(e.clone(), |acc, &l| oracle.mul_letter(&acc, l));
            if let Some(&j) = index.get(&t) {
                if i != j {
                    edges.push(EdgeRecord { u: i.min(j), v: i.max(j), witness: None, kind: Some("generator".into()) });
                }
            }
        }
    }
    let cosets: Vec<Vec<CosetId>> = elems
        .par_iter()
        .map(|(_, w)| (0..oracle.peripheral_count()).map(|p| oracle.canonical_coset(p, w)).collect())
        .collect::<Result<Vec<_>>>()?;
    let mut coset_index: BTreeMap<CosetId, usize> = BTreeMap::new();
    for cs in &cosets {
        for c in cs {
            coset_index.entry(c.clone()).or_insert(0);
        }
    }
    let base = vertices.len();
    for (k, (c, slot)) in coset_index.iter_mut().enumerate() {
        *slot = base + k;
        vertices.push(VertexRecord { id: base + k, label: oracle.format_coset(c), kind: "coset".into() });
    }
    if vertices.len() > caps.max_vertices {
        return Err(Error::Resource { what: "coned-off vertices", cap: caps.max_vertices });
    }
    for (i, cs) in cosets.iter().enumerate() {
        for c in cs {
            edges.push(EdgeRecord { u: i, v: coset_index[c], witness: None, kind: Some("cone".into()) });
        }
    }
    if extended {
        let list: Vec<(&CosetId, usize)> = coset_index.iter().map(|(c, &i)| (c, i)).collect();
        let pairs: Vec<(usize, usize)> =
            (0..list.len()).flat_map(|a| (a + 1..list.len()).map(move |b| (a, b))).collect();
        let k_edges: Vec<Option<EdgeRecord>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let w = oracle.infinite_intersection(&[list[a].0.clone(), list[b].0.clone()])?;
                Ok(w.map(|w| EdgeRecord {
                    u: list[a].1,
                    v: list[b].1,
                    witness: Some(oracle.alphabet().format(&w)),
                    kind: Some("complex".into()),
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        edges.extend(k_edges.into_iter().flatten());
    }
    edges.sort_by_key(|e| (e.u, e.v));
    edges.dedup_by_key(|e| (e.u, e.v));
    let census = components(vertices.len(), edges.iter().map(|e| (e.u, e.v)));
    let mut stats = BTreeMap::new();
    stats.insert("element_vertices".into(), json!(elems.len()));
    stats.insert("coset_vertices".into(), json!(coset_index.len()));
    stats.insert("edge_count".into(), json!(edges.len()));
    stats.insert("components".into(), json!(census.component_count));
    stats.insert("relative_generators".into(), json!(s.iter().map(|w| oracle.alphabet().format(w)).collect::<Vec<_>>()));
    Ok(GraphExport {
        version: EXPORT_VERSION,
        graph: if extended { "extended-coned-off".into() } else { "coned-off".into() },
        pair: serde_json::to_value(oracle.spec()).expect("spec serializes"),
        radius,
        tau: None,
        vertices,
        edges,
        simplices: Vec::new(),
        stats,
    })
}

/// A vertex `v^g = gvg⁻¹` of the extension graph, keyed by `v` and the
/// canonical representative of `g⟨Star(v)⟩`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConjugateVertex {
    pub generator: usize,
    pub rep: Word,
}

impl ConjugateVertex {
    pub fn new(graph: &DefiningGraph, generator: usize, g: &Word) -> Self {
        let (head, _) = strip_parabolic_tail(graph, g, &graph.star(generator));
        ConjugateVertex { generator, rep: head.into_word() }
    }

    /// The conjugate `gvg⁻¹` in normal form.
    pub fn element(&self, graph: &DefiningGraph) -> Word {
        raag_normalize(
            graph,
            &self.rep.concat(&Word::from_letter(Letter::gen(self.generator))).concat(&self.rep.inverse()),
        )
    }

    pub fn label(&self, alphabet: &Alphabet) -> String {
        if self.rep.is_empty() {
            alphabet.name(self.generator).to_string()
        } else {
            format!("{}^({})", alphabet.name(self.generator), alphabet.format(&self.rep))
        }
    }
}

/// The extension graph restricted to conjugates by elements of the R-ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionBall {
    pub radius: usize,
    pub vertices: Vec<ConjugateVertex>,
    pub edges: Vec<(usize, usize)>,
}

impl ExtensionBall {
    pub fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.vertices.len()];
        for &(u, v) in &self.edges {
            adj[u].insert(v);
            adj[v].insert(u);
        }
        adj
    }
}

pub fn build_extension_graph(graph: &DefiningGraph, radius: usize, caps: &Caps) -> Result<ExtensionBall> {
    if radius > caps.max_radius {
        return Err(Error::Resource { what: "radius", cap: caps.max_radius });
    }
    let group = RaagGroup { graph: graph.clone() };
    let elems = ball(&group, radius, caps.max_vertices)?;
    let mut set: BTreeSet<ConjugateVertex> = BTreeSet::new();
    for (_, w) in &elems {
        for v in 0..graph.vertex_count() {
            set.insert(ConjugateVertex::new(graph, v, w));
        }
        if set.len() > caps.max_vertices {
            return Err(Error::Resource { what: "extension graph vertices", cap: caps.max_vertices });
        }
    }
    let vertices: Vec<ConjugateVertex> = set.into_iter().collect();
    let elements: Vec<Word> = vertices.iter().map(|v| v.element(graph)).collect();
    let n = vertices.len();
    let edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let elements = &elements;
            (i + 1..n).filter(move |&j| commutes(graph, &elements[i], &elements[j])).map(move |j| (i, j))
        })
        .collect();
    Ok(ExtensionBall { radius, vertices, edges })
}

pub fn export_extension(
    graph: &DefiningGraph,
    alphabet: &Alphabet,
    pair: Value,
    ext: &ExtensionBall,
) -> GraphExport {
    let vertices = ext
        .vertices
        .iter()
        .enumerate()
        .map(|(id, v)| VertexRecord { id, label: v.label(alphabet), kind: "conjugate".into() })
        .collect();
    let edges = ext.edges.iter().map(|&(u, v)| EdgeRecord { u, v, witness: None, kind: None }).collect();
    let census = components(ext.vertices.len(), ext.edges.iter().copied());
    let mut stats = BTreeMap::new();
    stats.insert("vertex_count".into(), json!(ext.vertices.len()));
    stats.insert("edge_count".into(), json!(ext.edges.len()));
    stats.insert("components".into(), json!(census.component_count));
    stats.insert("defining_graph_edges".into(), json!(graph.edges()));
    GraphExport {
        version: EXPORT_VERSION,
        graph: "extension-graph".into(),
        pair,
        radius: ext.radius,
        tau: None,
        vertices,
        edges,
        simplices: Vec::new(),
        stats,
    }
}
