//! Group pairs with decidable conjugate-intersection problems.
//!
//! An [`Oracle`] answers coset questions for one group pair `(G, 𝒫)`:
//! canonical coset identifiers, enumeration of cosets in a ball, infinite
//! intersection of conjugates (with a verified witness), coset distances and,
//! for free groups, τ-neighborhood intersections. Backends: free groups,
//! right-angled Artin groups with standard parabolic peripherals, free
//! abelian lattices, BS(1,k) with cyclic peripherals, and direct products.

pub mod affine;
pub mod linalg;
pub mod raag;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub use affine::AffineMap;

use crate::error::{Error, Result};
use crate::rational::{coset_distance as free_coset_distance, ktau_simplex as free_ktau, Rational as FreeDoubleCoset};
use crate::stallings::{infinite_intersection_free, subgroup_index, whole_group, CoreGraph};
use crate::words::{
    ball, ball_find, double_coset_split, raag_normalize, reduce, Alphabet, DefiningGraph,
    Group, Letter, RaagGroup, Word,
};

/// Exact rationals.
pub type Rational = BigRational;
/// Elements of BS(1,k) as exact affine maps.
pub type BsMap = AffineMap<Rational>;

/// Default cap on ball sizes used internally by canonicalization searches.
pub const DEFAULT_BALL_CAP: usize = 2_000_000;

/// The ambient group of a pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GroupSpec {
    Free { rank: usize },
    Raag { graph: DefiningGraph },
    Lattice { rank: usize },
    /// BS(1,k) = ⟨a, t | t a t⁻¹ = aᵏ⟩ with `a` generator 0 and `t` generator 1.
    Bs { k: i64 },
    Product { left: Box<PairSpec>, right: Box<PairSpec> },
}

/// One factor of a product peripheral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Part {
    Whole,
    Peripheral(usize),
}

/// A peripheral subgroup, or a keyword expanding to several.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeripheralSpec {
    Generators(Vec<Word>),
    /// All maximal standard abelian subgroups of a triangle-free RAAG.
    MaximalStandardAbelians,
    /// The star subgroups `⟨Star(v)⟩` of a RAAG.
    Stars,
    /// `A × B` in a product, each side a factor peripheral or the whole factor.
    Product(Part, Part),
}

/// A group pair description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub group: GroupSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    pub peripherals: Vec<PeripheralSpec>,
}

/// What an oracle can answer exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub exact_intersection: bool,
    pub exact_coset_distance: bool,
    pub ktau_supported: bool,
    pub simplex_witnesses: bool,
}

/// Backend-specific coset invariant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Payload {
    None,
    /// Canonical residue of the coset in `Zⁿ / L`.
    Residue(Vec<i64>),
    /// BS(1,k), peripheral with a fixed point: image of the fixed point and
    /// slope exponent modulo the peripheral's exponent.
    FixedPoint { point: String, phase: i64 },
    /// BS(1,k), translation peripheral: slope exponent and offset phase.
    Level { exponent: i64, phase: String },
    Pair(Box<Payload>, Box<Payload>),
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::None => write!(f, "-"),
            Payload::Residue(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            Payload::FixedPoint { point, phase } => write!(f, "fix {point} phase {phase}"),
            Payload::Level { exponent, phase } => write!(f, "level {exponent} phase {phase}"),
            Payload::Pair(a, b) => write!(f, "[{a}; {b}]"),
        }
    }
}

/// A left coset `gP`, identified by its peripheral and canonical
/// representative (minimal length, shortlex-least among minima).
///
/// Equality and hashing use `(peripheral, rep)` only; the payload is derived
/// data. Ordering is shortlex on the representative, then peripheral index.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CosetId {
    pub peripheral: usize,
    pub rep: Word,
    pub payload: Payload,
}

impl PartialEq for CosetId {
    fn eq(&self, other: &Self) -> bool {
        self.peripheral == other.peripheral && self.rep == other.rep
    }
}

impl Eq for CosetId {}

impl Hash for CosetId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.peripheral.hash(state);
        self.rep.hash(state);
    }
}

impl Ord for CosetId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.rep, self.peripheral).cmp(&(&other.rep, other.peripheral))
    }
}

impl PartialOrd for CosetId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Group elements across backends.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Element {
    Word(Word),
    Vector(Vec<i64>),
    Affine(BsMap),
    Pair(Box<Element>, Box<Element>),
}

/// `Zⁿ` with the standard basis.
#[derive(Clone, Copy, Debug)]
pub struct LatticeGroup {
    pub rank: usize,
}

impl Group for LatticeGroup {
    type Element = Vec<i64>;

    fn generator_count(&self) -> usize {
        self.rank
    }

    fn identity(&self) -> Vec<i64> {
        vec![0; self.rank]
    }

    fn mul_letter(&self, e: &Vec<i64>, l: Letter) -> Vec<i64> {
        let mut v = e.clone();
        v[l.index()] += if l.is_inverse() { -1 } else { 1 };
        v
    }
}

/// The shortlex-least geodesic word of a lattice vector.
pub fn vector_word(v: &[i64]) -> Word {
    let mut w = Word::empty();
    for (i, &x) in v.iter().enumerate() {
        for _ in 0..x.unsigned_abs() {
            w.push(Letter::new(i, x < 0));
        }
    }
    w
}

/// BS(1,k) acting on `Q` by `a: x ↦ x+1`, `t: x ↦ kx`; a word acts by
/// composing its letters' maps, the leftmost outermost.
#[derive(Clone, Debug)]
pub struct BsGroup {
    pub k: i64,
}

impl BsGroup {
    pub fn letter_map(&self, l: Letter) -> BsMap {
        let k = Rational::from_integer(self.k.into());
        match (l.index(), l.is_inverse()) {
            (0, false) => AffineMap::translation(Rational::one()),
            (0, true) => AffineMap::translation(-Rational::one()),
            (_, false) => AffineMap::scaling(k),
            (_, true) => AffineMap::scaling(k.recip()),
        }
    }

    pub fn map_of(&self, w: &Word) -> BsMap {
        self.element_of(w)
    }

    /// `m` with `slope = kᵐ`.
    pub fn slope_exponent(&self, slope: &Rational) -> i64 {
        log_k(self.k, slope).expect("slope is a power of k")
    }
}

impl Group for BsGroup {
    type Element = BsMap;

    fn generator_count(&self) -> usize {
        2
    }

    fn identity(&self) -> BsMap {
        AffineMap::identity()
    }

    fn mul_letter(&self, e: &BsMap, l: Letter) -> BsMap {
        e.compose(&self.letter_map(l))
    }
}

/// `j` with `r = kʲ`, if any.
fn log_k(k: i64, r: &Rational) -> Option<i64> {
    if !r.is_positive() {
        return None;
    }
    let kb = BigInt::from(k);
    let (mut n, mut d) = (r.numer().clone(), r.denom().clone());
    let mut j = 0i64;
    while n > BigInt::one() {
        let (q, rem) = n.div_rem(&kb);
        if !rem.is_zero() {
            return None;
        }
        n = q;
        j += 1;
    }
    while d > BigInt::one() {
        let (q, rem) = d.div_rem(&kb);
        if !rem.is_zero() {
            return None;
        }
        d = q;
        j -= 1;
    }
    (n.is_one() && d.is_one()).then_some(j)
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn fract(r: &Rational) -> Rational {
    r - r.floor()
}

fn rational_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Generator of `αZ + βZ` for nonzero rationals.
fn rational_gcd(a: &Rational, b: &Rational) -> Rational {
    let d = a.denom().lcm(b.denom());
    let an = a.numer() * (&d / a.denom());
    let bn = b.numer() * (&d / b.denom());
    Rational::new(an.gcd(&bn), d)
}

/// Least positive common multiple of two nonzero rationals.
fn rational_lcm(a: &Rational, b: &Rational) -> Rational {
    let d = a.denom().lcm(b.denom());
    let an = a.numer() * (&d / a.denom());
    let bn = b.numer() * (&d / b.denom());
    Rational::new(an.lcm(&bn), d)
}

#[derive(Clone, Debug)]
enum BsKind {
    Fixed { point: Rational, exp: i64 },
    Translation { step: Rational },
}

#[derive(Clone, Debug)]
struct BsPeripheral {
    word: Word,
    kind: BsKind,
}

#[derive(Clone, Debug)]
enum Backend {
    Free { rank: usize, cores: Vec<CoreGraph> },
    Raag { graph: DefiningGraph, gens: Vec<BTreeSet<usize>>, edge_mode: bool },
    Lattice { rank: usize, gens: Vec<Vec<Vec<i64>>>, hnf: Vec<Vec<Vec<i64>>> },
    Bs { group: BsGroup, perips: Vec<BsPeripheral> },
    Product { left: Box<Oracle>, right: Box<Oracle>, parts: Vec<(Part, Part)> },
}

/// A group pair with exact coset machinery.
#[derive(Clone, Debug)]
pub struct Oracle {
    spec: PairSpec,
    alphabet: Alphabet,
    backend: Backend,
    ball_cap: usize,
}

fn word_is_letter(w: &Word) -> Option<usize> {
    match w.letters() {
        [l] if !l.is_inverse() => Some(l.index()),
        _ => None,
    }
}

impl Oracle {
    /// Build and validate an oracle. Peripheral subgroups must be infinite.
    pub fn new(spec: &PairSpec) -> Result<Oracle> {
        let default_names = |n: usize, prefix: &str| Alphabet::indexed(prefix, n);
        let named = |n: usize, fallback: Alphabet| -> Result<Alphabet> {
            match &spec.names {
                Some(names) => {
                    if names.len() != n {
                        return Err(Error::Config(format!("expected {n} generator names, got {}", names.len())));
                    }
                    Alphabet::new(names.clone())
                }
                None => Ok(fallback),
            }
        };
        let (alphabet, backend) = match &spec.group {
            GroupSpec::Free { rank } => {
                let alphabet = named(*rank, default_names(*rank, "x"))?;
                let mut cores = Vec::new();
                for (i, p) in spec.peripherals.iter().enumerate() {
                    let PeripheralSpec::Generators(gens) = p else {
                        return Err(Error::Config(format!("peripheral {i}: keyword not available for free groups")));
                    };
                    let c = CoreGraph::from_generators(*rank, gens)?;
                    if c.is_trivial() {
                        return Err(Error::Config(format!("peripheral {i} is trivial, hence finite")));
                    }
                    cores.push(c);
                }
                (alphabet, Backend::Free { rank: *rank, cores })
            }
            GroupSpec::Raag { graph } => {
                let n = graph.vertex_count();
                let alphabet = named(n, default_names(n, "v"))?;
                let mut gens = Vec::new();
                for (i, p) in spec.peripherals.iter().enumerate() {
                    match p {
                        PeripheralSpec::Generators(ws) => {
                            let mut s = BTreeSet::new();
                            for w in ws {
                                w.check(n)?;
                                let v = word_is_letter(w).ok_or_else(|| {
                                    Error::Config(format!(
                                        "peripheral {i}: RAAG peripherals must be generated by standard generators"
                                    ))
                                })?;
                                s.insert(v);
                            }
                            if s.is_empty() {
                                return Err(Error::Config(format!("peripheral {i} is trivial, hence finite")));
                            }
                            gens.push(s);
                        }
                        PeripheralSpec::MaximalStandardAbelians => {
                            if !graph.is_triangle_free() {
                                return Err(Error::Config(
                                    "maximal standard abelians need a triangle-free defining graph".into(),
                                ));
                            }
                            for (a, b) in graph.edges() {
                                gens.push([a, b].into_iter().collect());
                            }
                            for v in 0..n {
                                if graph.valence(v) == 0 {
                                    gens.push([v].into_iter().collect());
                                }
                            }
                        }
                        PeripheralSpec::Stars => {
                            for v in 0..n {
                                gens.push(graph.star(v));
                            }
                        }
                        PeripheralSpec::Product(..) => {
                            return Err(Error::Config(format!("peripheral {i}: product peripheral outside a product")))
                        }
                    }
                }
                let edge_mode = graph.is_triangle_free()
                    && graph.min_valence() >= 2
                    && gens.iter().all(|s| s.len() == 2 && {
                        let v: Vec<usize> = s.iter().copied().collect();
                        graph.adjacent(v[0], v[1])
                    });
                (alphabet, Backend::Raag { graph: graph.clone(), gens, edge_mode })
            }
            GroupSpec::Lattice { rank } => {
                let alphabet = named(*rank, default_names(*rank, "x"))?;
                let mut gens = Vec::new();
                let mut hnf = Vec::new();
                for (i, p) in spec.peripherals.iter().enumerate() {
                    let PeripheralSpec::Generators(ws) = p else {
                        return Err(Error::Config(format!("peripheral {i}: keyword not available for lattices")));
                    };
                    let mut vs = Vec::new();
                    for w in ws {
                        w.check(*rank)?;
                        vs.push(w.exponent_sums(*rank));
                    }
                    let h = linalg::hermite(&vs, *rank);
                    if h.is_empty() {
                        return Err(Error::Config(format!("peripheral {i} is trivial, hence finite")));
                    }
                    gens.push(vs);
                    hnf.push(h);
                }
                (alphabet, Backend::Lattice { rank: *rank, gens, hnf })
            }
            GroupSpec::Bs { k } => {
                if *k < 2 {
                    return Err(Error::Config(format!("BS(1,k) needs k ≥ 2, got {k}")));
                }
                let alphabet = named(2, Alphabet::from_strs(&["a", "t"])?)?;
                let group = BsGroup { k: *k };
                let mut perips = Vec::new();
                for (i, p) in spec.peripherals.iter().enumerate() {
                    let PeripheralSpec::Generators(ws) = p else {
                        return Err(Error::Config(format!("peripheral {i}: keyword not available for BS(1,k)")));
                    };
                    if ws.len() != 1 {
                        return Err(Error::Config(format!("peripheral {i}: BS(1,k) peripherals must be cyclic")));
                    }
                    ws[0].check(2)?;
                    let map = group.map_of(&ws[0]);
                    let kind = match map.fixed_point() {
                        Some(point) => BsKind::Fixed { point, exp: group.slope_exponent(&map.slope) },
                        None if map.offset.is_zero() => {
                            return Err(Error::Config(format!("peripheral {i} is trivial, hence finite")))
                        }
                        None => BsKind::Translation { step: map.offset.clone() },
                    };
                    perips.push(BsPeripheral { word: ws[0].clone(), kind });
                }
                (alphabet, Backend::Bs { group, perips })
            }
            GroupSpec::Product { left, right } => {
                let l = Oracle::new(left)?;
                let r = Oracle::new(right)?;
                let mut names: Vec<String> = l.alphabet.names().to_vec();
                let mut rnames: Vec<String> = r.alphabet.names().to_vec();
                if rnames.iter().any(|n| names.contains(n)) {
                    names.iter_mut().for_each(|n| n.push_str("_1"));
                    rnames.iter_mut().for_each(|n| n.push_str("_2"));
                }
                names.extend(rnames);
                let alphabet = named(names.len(), Alphabet::new(names)?)?;
                let mut parts = Vec::new();
                for (i, p) in spec.peripherals.iter().enumerate() {
                    let PeripheralSpec::Product(a, b) = p else {
                        return Err(Error::Config(format!("peripheral {i}: products take (part, part) peripherals")));
                    };
                    for (part, o) in [(a, &l), (b, &r)] {
                        if let Part::Peripheral(j) = part {
                            if *j >= o.peripheral_count() {
                                return Err(Error::Config(format!("peripheral {i}: factor peripheral {j} out of range")));
                            }
                        }
                    }
                    parts.push((*a, *b));
                }
                (alphabet, Backend::Product { left: Box::new(l), right: Box::new(r), parts })
            }
        };
        Ok(Oracle { spec: spec.clone(), alphabet, backend, ball_cap: DEFAULT_BALL_CAP })
    }

    /// Replace the cap on internal ball searches.
    pub fn with_ball_cap(mut self, cap: usize) -> Self {
        self.ball_cap = cap;
        if let Backend::Product { left, right, .. } = &mut self.backend {
            left.ball_cap = cap;
            right.ball_cap = cap;
        }
        self
    }

    pub fn spec(&self) -> &PairSpec {
        &self.spec
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rank(&self) -> usize {
        self.alphabet.rank()
    }

    pub fn peripheral_count(&self) -> usize {
        match &self.backend {
            Backend::Free { cores, .. } => cores.len(),
            Backend::Raag { gens, .. } => gens.len(),
            Backend::Lattice { gens, .. } => gens.len(),
            Backend::Bs { perips, .. } => perips.len(),
            Backend::Product { parts, .. } => parts.len(),
        }
    }

    pub fn capabilities(&self) -> Capabilities {
        match &self.backend {
            Backend::Free { .. } => Capabilities {
                exact_intersection: true,
                exact_coset_distance: true,
                ktau_supported: true,
                simplex_witnesses: true,
            },
            Backend::Raag { .. } | Backend::Lattice { .. } => Capabilities {
                exact_intersection: true,
                exact_coset_distance: true,
                ktau_supported: false,
                simplex_witnesses: true,
            },
            Backend::Bs { .. } => Capabilities {
                exact_intersection: true,
                exact_coset_distance: false,
                ktau_supported: false,
                simplex_witnesses: true,
            },
            Backend::Product { left, right, .. } => {
                let (a, b) = (left.capabilities(), right.capabilities());
                Capabilities {
                    exact_intersection: a.exact_intersection && b.exact_intersection,
                    exact_coset_distance: a.exact_coset_distance && b.exact_coset_distance,
                    ktau_supported: false,
                    simplex_witnesses: a.simplex_witnesses && b.simplex_witnesses,
                }
            }
        }
    }

    /// The free-group core graphs, when this is a free pair.
    pub fn free_cores(&self) -> Option<&[CoreGraph]> {
        match &self.backend {
            Backend::Free { cores, .. } => Some(cores),
            _ => None,
        }
    }

    /// The defining graph and standard generator sets, for RAAG pairs.
    pub fn raag_parts(&self) -> Option<(&DefiningGraph, &[BTreeSet<usize>])> {
        match &self.backend {
            Backend::Raag { graph, gens, .. } => Some((graph, gens)),
            _ => None,
        }
    }

    fn split_word(&self, w: &Word) -> (Word, Word) {
        let Backend::Product { left, .. } = &self.backend else { unreachable!() };
        let n = left.rank();
        let l: Word = w.letters().iter().copied().filter(|l| l.index() < n).collect();
        let r: Word = w.letters().iter().filter(|l| l.index() >= n).map(|l| Letter::new(l.index() - n, l.is_inverse())).collect();
        (l, r)
    }

    fn join_words(&self, l: &Word, r: &Word) -> Word {
        let Backend::Product { left, .. } = &self.backend else { unreachable!() };
        l.concat(&r.shifted(left.rank()))
    }

    /// Whether two words represent the same element.
    pub fn equal(&self, u: &Word, v: &Word) -> bool {
        self.element_of(u) == self.element_of(v)
    }

    /// A word for the element, in normal form where the backend has one.
    pub fn normal_word(&self, w: &Word) -> Word {
        match &self.backend {
            Backend::Free { .. } => reduce(w),
            Backend::Raag { graph, .. } => raag_normalize(graph, w),
            Backend::Lattice { rank, .. } => vector_word(&w.exponent_sums(*rank)),
            Backend::Bs { .. } => reduce(w),
            Backend::Product { left, right, .. } => {
                let (l, r) = self.split_word(w);
                self.join_words(&left.normal_word(&l), &right.normal_word(&r))
            }
        }
    }

    fn check_peripheral(&self, p: usize) -> Result<()> {
        if p >= self.peripheral_count() {
            return Err(Error::Precondition(format!("peripheral index {p} out of range")));
        }
        Ok(())
    }

    /// The canonical identifier of `gP`.
    pub fn canonical_coset(&self, p: usize, g: &Word) -> Result<CosetId> {
        self.check_peripheral(p)?;
        g.check(self.rank())?;
        match &self.backend {
            Backend::Free { cores, .. } => {
                Ok(CosetId { peripheral: p, rep: cores[p].coset_min_rep(g), payload: Payload::None })
            }
            Backend::Raag { graph, gens, .. } => {
                let (head, _) = crate::words::strip_parabolic_tail(graph, g, &gens[p]);
                Ok(CosetId { peripheral: p, rep: head.into_word(), payload: Payload::None })
            }
            Backend::Lattice { rank, hnf, .. } => {
                let v = g.exponent_sums(*rank);
                let key = linalg::residue(&hnf[p], &v);
                let radius = v.iter().map(|x| x.unsigned_abs() as usize).sum();
                let group = LatticeGroup { rank: *rank };
                let (_, rep) = ball_find(&group, radius, self.ball_cap, |e| linalg::residue(&hnf[p], e) == key)?
                    .expect("the coset meets the ball of radius |g|");
                Ok(CosetId { peripheral: p, rep, payload: Payload::Residue(key) })
            }
            Backend::Bs { group, perips } => {
                let g = reduce(g);
                let key = bs_key(group, &perips[p], &group.map_of(&g));
                let (_, rep) = ball_find(group, g.len(), self.ball_cap, |e| bs_key(group, &perips[p], e) == key)?
                    .expect("the coset meets the ball of radius |g|");
                Ok(CosetId { peripheral: p, rep, payload: key })
            }
            Backend::Product { left, right, parts } => {
                let (l, r) = self.split_word(g);
                let (a, b) = parts[p];
                let lc = match a {
                    Part::Whole => None,
                    Part::Peripheral(i) => Some(left.canonical_coset(i, &l)?),
                };
                let rc = match b {
                    Part::Whole => None,
                    Part::Peripheral(i) => Some(right.canonical_coset(i, &r)?),
                };
                Ok(self.product_coset(p, lc, rc))
            }
        }
    }

    fn product_coset(&self, p: usize, lc: Option<CosetId>, rc: Option<CosetId>) -> CosetId {
        let lrep = lc.as_ref().map(|c| c.rep.clone()).unwrap_or_default();
        let rrep = rc.as_ref().map(|c| c.rep.clone()).unwrap_or_default();
        let lp = lc.map(|c| c.payload).unwrap_or(Payload::None);
        let rp = rc.map(|c| c.payload).unwrap_or(Payload::None);
        CosetId { peripheral: p, rep: self.join_words(&lrep, &rrep), payload: Payload::Pair(Box::new(lp), Box::new(rp)) }
    }

    /// Every coset with a representative of length at most `radius`, sorted.
    pub fn enumerate_cosets(&self, radius: usize, cap: usize) -> Result<Vec<CosetId>> {
        let np = self.peripheral_count();
        let mut out: BTreeSet<CosetId> = BTreeSet::new();
        let push = |out: &mut BTreeSet<CosetId>, c: CosetId| -> Result<()> {
            out.insert(c);
            if out.len() > cap {
                return Err(Error::Resource { what: "cosets", cap });
            }
            Ok(())
        };
        match &self.backend {
            Backend::Free { rank, cores } => {
                for (_, w) in ball(&crate::words::FreeGroup { rank: *rank }, radius, self.ball_cap)? {
                    for (p, c) in cores.iter().enumerate() {
                        push(&mut out, CosetId { peripheral: p, rep: c.coset_min_rep(&w), payload: Payload::None })?;
                    }
                }
            }
            Backend::Raag { graph, .. } => {
                for (_, w) in ball(&RaagGroup { graph: graph.clone() }, radius, self.ball_cap)? {
                    for p in 0..np {
                        push(&mut out, self.canonical_coset(p, &w)?)?;
                    }
                }
            }
            Backend::Lattice { rank, hnf, .. } => {
                let mut seen: BTreeMap<(usize, Vec<i64>), ()> = BTreeMap::new();
                for (v, w) in ball(&LatticeGroup { rank: *rank }, radius, self.ball_cap)? {
                    for (p, h) in hnf.iter().enumerate() {
                        let key = linalg::residue(h, &v);
                        if seen.insert((p, key.clone()), ()).is_none() {
                            push(&mut out, CosetId { peripheral: p, rep: w.clone(), payload: Payload::Residue(key) })?;
                        }
                    }
                }
            }
            Backend::Bs { group, perips } => {
                let mut seen: BTreeSet<(usize, Payload)> = BTreeSet::new();
                for (m, w) in ball(group, radius, self.ball_cap)? {
                    for (p, per) in perips.iter().enumerate() {
                        let key = bs_key(group, per, &m);
                        if seen.insert((p, key.clone())) {
                            push(&mut out, CosetId { peripheral: p, rep: w.clone(), payload: key })?;
                        }
                    }
                }
            }
            Backend::Product { left, right, parts } => {
                let lall = left.enumerate_cosets(radius, cap)?;
                let rall = right.enumerate_cosets(radius, cap)?;
                for (p, (a, b)) in parts.iter().enumerate() {
                    let side = |part: &Part, all: &[CosetId]| -> Vec<Option<CosetId>> {
                        match part {
                            Part::Whole => vec![None],
                            Part::Peripheral(i) => all.iter().filter(|c| c.peripheral == *i).cloned().map(Some).collect(),
                        }
                    };
                    let ls = side(a, &lall);
                    let rs = side(b, &rall);
                    let len = |c: &Option<CosetId>| c.as_ref().map_or(0, |c| c.rep.len());
                    for lc in &ls {
                        for rc in &rs {
                            if len(lc) + len(rc) <= radius {
                                push(&mut out, self.product_coset(p, lc.clone(), rc.clone()))?;
                            }
                        }
                    }
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Whether `x ∈ gPg⁻¹` for the coset `c = gP`.
    pub fn in_conjugate(&self, x: &Word, c: &CosetId) -> bool {
        let g = &c.rep;
        match &self.backend {
            Backend::Free { cores, .. } => cores[c.peripheral].contains(&g.inverse().concat(x).concat(g)),
            Backend::Raag { graph, gens, .. } => raag::in_conjugate(graph, x, g, &gens[c.peripheral]),
            Backend::Lattice { rank, hnf, .. } => {
                linalg::residue(&hnf[c.peripheral], &x.exponent_sums(*rank)).iter().all(|&v| v == 0)
            }
            Backend::Bs { group, perips } => {
                let m = group.map_of(&g.inverse().concat(x).concat(g));
                bs_in_peripheral(group, &perips[c.peripheral], &m)
            }
            Backend::Product { left, right, parts } => {
                let (xl, xr) = self.split_word(x);
                let (gl, gr) = self.split_word(g);
                let (a, b) = parts[c.peripheral];
                let ok = |o: &Oracle, part: Part, xw: &Word, gw: &Word| match part {
                    Part::Whole => true,
                    Part::Peripheral(i) => {
                        o.in_conjugate(xw, &CosetId { peripheral: i, rep: gw.clone(), payload: Payload::None })
                    }
                };
                ok(left, a, &xl, &gl) && ok(right, b, &xr, &gr)
            }
        }
    }

    /// Whether `⋂ gᵢPᵢgᵢ⁻¹` is infinite. On true, returns a nontrivial
    /// element of the intersection that has been re-verified in every
    /// conjugate.
    pub fn infinite_intersection(&self, cosets: &[CosetId]) -> Result<Option<Word>> {
        for c in cosets {
            self.check_peripheral(c.peripheral)?;
        }
        if cosets.is_empty() {
            return Err(Error::Precondition("intersection of no cosets".into()));
        }
        let witness = self.intersection_witness(cosets)?;
        if let Some(w) = &witness {
            if self.normal_word(w).is_empty() && !matches!(self.backend, Backend::Bs { .. }) {
                return Err(Error::Witness("trivial intersection witness".into()));
            }
            for c in cosets {
                if !self.in_conjugate(w, c) {
                    return Err(Error::Witness(format!(
                        "{} is not in the conjugate of {}",
                        self.alphabet.format(w),
                        self.format_coset(c)
                    )));
                }
            }
        }
        Ok(witness)
    }

    fn intersection_witness(&self, cosets: &[CosetId]) -> Result<Option<Word>> {
        match &self.backend {
            Backend::Free { cores, .. } => {
                let list: Vec<(&CoreGraph, Word)> = cosets.iter().map(|c| (&cores[c.peripheral], c.rep.clone())).collect();
                Ok(infinite_intersection_free(&list))
            }
            Backend::Raag { graph, gens, edge_mode } => {
                if *edge_mode {
                    let list: Vec<(Word, [usize; 2])> = cosets
                        .iter()
                        .map(|c| {
                            let v: Vec<usize> = gens[c.peripheral].iter().copied().collect();
                            (c.rep.clone(), [v[0], v[1]])
                        })
                        .collect();
                    Ok(raag::raag_simplex_test(graph, &list)?.map(|w| w.element))
                } else {
                    let list: Vec<(Word, BTreeSet<usize>)> =
                        cosets.iter().map(|c| (c.rep.clone(), gens[c.peripheral].clone())).collect();
                    let (p, r) = raag::parabolic_intersection(graph, &list).expect("nonempty list");
                    Ok(r.first().map(|&v| {
                        raag_normalize(graph, &p.concat(&Word::from_letter(Letter::gen(v))).concat(&p.inverse()))
                    }))
                }
            }
            Backend::Lattice { rank, gens, .. } => {
                let mut distinct: Vec<usize> = cosets.iter().map(|c| c.peripheral).collect();
                distinct.sort_unstable();
                distinct.dedup();
                let spans: Vec<Vec<Vec<Rational>>> = distinct
                    .iter()
                    .map(|&p| gens[p].iter().map(|v| v.iter().map(|&x| rat(x)).collect()).collect())
                    .collect();
                let basis = linalg::span_intersection(&spans, *rank);
                let Some(dir) = basis.first() else {
                    return Ok(None);
                };
                let den = dir.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                let ints: Vec<i64> = dir
                    .iter()
                    .map(|x| i64::try_from(x.numer() * (&den / x.denom())).expect("small lattice entries"))
                    .collect();
                let mut v = linalg::primitive(&ints);
                let mut mult = BigInt::one();
                for spans_p in &spans {
                    let target: Vec<Rational> = v.iter().map(|&x| rat(x)).collect();
                    let c = linalg::solve(spans_p, &target).expect("vector lies in every span");
                    let d = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                    mult = mult.lcm(&d);
                }
                let m = i64::try_from(mult).expect("small lattice entries");
                v.iter_mut().for_each(|x| *x *= m);
                Ok(Some(vector_word(&v)))
            }
            Backend::Bs { group, perips } => Ok(bs_intersection(group, perips, cosets)),
            Backend::Product { left, right, parts } => {
                let mut lcs = Vec::new();
                let mut rcs = Vec::new();
                for c in cosets {
                    let (gl, gr) = self.split_word(&c.rep);
                    let (a, b) = parts[c.peripheral];
                    if let Part::Peripheral(i) = a {
                        lcs.push(CosetId { peripheral: i, rep: gl, payload: Payload::None });
                    }
                    if let Part::Peripheral(i) = b {
                        rcs.push(CosetId { peripheral: i, rep: gr, payload: Payload::None });
                    }
                }
                let side = |o: &Oracle, cs: &[CosetId]| -> Result<Option<Word>> {
                    if cs.is_empty() {
                        Ok(o.infinite_element())
                    } else {
                        o.infinite_intersection(cs)
                    }
                };
                if let Some(w) = side(left, &lcs)? {
                    return Ok(Some(self.join_words(&w, &Word::empty())));
                }
                if let Some(w) = side(right, &rcs)? {
                    return Ok(Some(self.join_words(&Word::empty(), &w)));
                }
                Ok(None)
            }
        }
    }

    /// A nontrivial element of infinite order, if the group has generators.
    fn infinite_element(&self) -> Option<Word> {
        match &self.backend {
            Backend::Bs { .. } => Some(Word::from_letter(Letter::gen(1))),
            _ => (self.rank() > 0).then(|| Word::from_letter(Letter::gen(0))),
        }
    }

    /// `dist(g₁P₁, g₂P₂)` in the word metric.
    pub fn coset_distance(&self, c1: &CosetId, c2: &CosetId) -> Result<usize> {
        match &self.backend {
            Backend::Free { cores, .. } => {
                Ok(free_coset_distance(&cores[c1.peripheral], &c1.rep, &cores[c2.peripheral], &c2.rep))
            }
            _ => Ok(self.double_coset_rep(c1, c2)?.len()),
        }
    }

    /// The shortlex-least minimal-length element of `P₁·g₁⁻¹g₂·P₂`; its
    /// length is the coset distance.
    pub fn double_coset_rep(&self, c1: &CosetId, c2: &CosetId) -> Result<Word> {
        match &self.backend {
            Backend::Free { cores, .. } => {
                let h = reduce(&c1.rep.inverse().concat(&c2.rep));
                Ok(FreeDoubleCoset::double_coset(&cores[c1.peripheral], &h, &cores[c2.peripheral])
                    .shortlex_least()
                    .expect("double coset is nonempty"))
            }
            Backend::Raag { graph, gens, .. } => {
                let h = c1.rep.inverse().concat(&c2.rep);
                Ok(double_coset_split(graph, &h, &gens[c1.peripheral], &gens[c2.peripheral]).core)
            }
            Backend::Lattice { rank, gens, .. } => {
                let mut all: Vec<Vec<i64>> = gens[c1.peripheral].clone();
                all.extend(gens[c2.peripheral].iter().cloned());
                let h = linalg::hermite(&all, *rank);
                let d: Vec<i64> = c2
                    .rep
                    .exponent_sums(*rank)
                    .iter()
                    .zip(c1.rep.exponent_sums(*rank))
                    .map(|(a, b)| a - b)
                    .collect();
                let key = linalg::residue(&h, &d);
                let radius = d.iter().map(|x| x.unsigned_abs() as usize).sum();
                let (_, w) = ball_find(&LatticeGroup { rank: *rank }, radius, self.ball_cap, |e| {
                    linalg::residue(&h, e) == key
                })?
                .expect("difference vector lies in the ball");
                Ok(w)
            }
            Backend::Bs { group, perips } => {
                let h = reduce(&c1.rep.inverse().concat(&c2.rep));
                let hm = group.map_of(&h);
                let (p1, p2) = (&perips[c1.peripheral], &perips[c2.peripheral]);
                let (_, w) = ball_find(group, h.len(), self.ball_cap, |x| bs_double_coset_contains(group, p1, &hm, p2, x))?
                    .expect("h lies in its own double coset");
                Ok(w)
            }
            Backend::Product { left, right, parts } => {
                let (l1, r1) = self.split_word(&c1.rep);
                let (l2, r2) = self.split_word(&c2.rep);
                let (a1, b1) = parts[c1.peripheral];
                let (a2, b2) = parts[c2.peripheral];
                let side = |o: &Oracle, p: Part, q: Part, u: Word, v: Word| -> Result<Word> {
                    match (p, q) {
                        (Part::Peripheral(i), Part::Peripheral(j)) => o.double_coset_rep(
                            &CosetId { peripheral: i, rep: u, payload: Payload::None },
                            &CosetId { peripheral: j, rep: v, payload: Payload::None },
                        ),
                        _ => Ok(Word::empty()),
                    }
                };
                Ok(self.join_words(&side(left, a1, a2, l1, l2)?, &side(right, b1, b2, r1, r2)?))
            }
        }
    }

    /// Whether the τ-neighborhoods of the cosets intersect in an infinite set
    /// (free pairs only); returns the shortlex-least common point when so.
    pub fn ktau_simplex(&self, cosets: &[CosetId], tau: usize) -> Result<Option<Word>> {
        match &self.backend {
            Backend::Free { cores, .. } => {
                let list: Vec<(&CoreGraph, Word)> = cosets.iter().map(|c| (&cores[c.peripheral], c.rep.clone())).collect();
                Ok(free_ktau(&list, tau))
            }
            _ => Err(Error::Capability("K_tau is only supported for free-group pairs".into())),
        }
    }

    /// Whether the peripheral subgroups together with `extra` generate `G`.
    pub fn generates_with(&self, extra: &[Word]) -> Result<bool> {
        for w in extra {
            w.check(self.rank())?;
        }
        match &self.backend {
            Backend::Free { rank, cores } => {
                let mut gens: Vec<Word> = cores.iter().flat_map(|c| c.basis()).collect();
                gens.extend(extra.iter().cloned());
                let join = CoreGraph::from_generators(*rank, &gens)?;
                Ok(subgroup_index(&join, &whole_group(*rank))? == Some(1))
            }
            Backend::Lattice { rank, gens, .. } => {
                let mut all: Vec<Vec<i64>> = gens.iter().flatten().cloned().collect();
                all.extend(extra.iter().map(|w| w.exponent_sums(*rank)));
                let h = linalg::hermite(&all, *rank);
                Ok(h.len() == *rank && h.iter().enumerate().all(|(i, r)| r[i] == 1))
            }
            _ => {
                let mut covered: BTreeSet<usize> = BTreeSet::new();
                match &self.backend {
                    Backend::Raag { gens, .. } => covered.extend(gens.iter().flatten().copied()),
                    Backend::Bs { perips, .. } => {
                        covered.extend(perips.iter().filter_map(|p| word_is_letter(&p.word)))
                    }
                    Backend::Product { left, right, parts } => {
                        let n = left.rank();
                        if parts.iter().any(|(a, _)| *a == Part::Whole) {
                            covered.extend(0..n);
                        }
                        if parts.iter().any(|(_, b)| *b == Part::Whole) {
                            covered.extend(n..n + right.rank());
                        }
                        let _ = right;
                    }
                    _ => unreachable!(),
                }
                let mut undecided = false;
                for w in extra {
                    let r = reduce(w);
                    match r.letters() {
                        [l] => {
                            covered.insert(l.index());
                        }
                        [] => {}
                        _ => undecided = true,
                    }
                }
                if covered.len() == self.rank() {
                    Ok(true)
                } else if undecided {
                    Err(Error::Capability("generation check needs single-letter extra generators here".into()))
                } else {
                    Ok(false)
                }
            }
        }
    }

    /// Human-readable coset label such as `y·P0`.
    pub fn format_coset(&self, c: &CosetId) -> String {
        if c.rep.is_empty() {
            format!("P{}", c.peripheral)
        } else {
            format!("{}·P{}", self.alphabet.format(&c.rep), c.peripheral)
        }
    }
}

impl Group for Oracle {
    type Element = Element;

    fn generator_count(&self) -> usize {
        self.rank()
    }

    fn identity(&self) -> Element {
        match &self.backend {
            Backend::Free { .. } | Backend::Raag { .. } => Element::Word(Word::empty()),
            Backend::Lattice { rank, .. } => Element::Vector(vec![0; *rank]),
            Backend::Bs { .. } => Element::Affine(AffineMap::identity()),
            Backend::Product { left, right, .. } => {
                Element::Pair(Box::new(left.identity()), Box::new(right.identity()))
            }
        }
    }

    fn mul_letter(&self, e: &Element, l: Letter) -> Element {
        match (&self.backend, e) {
            (Backend::Free { rank, .. }, Element::Word(w)) => {
                Element::Word(crate::words::FreeGroup { rank: *rank }.mul_letter(w, l))
            }
            (Backend::Raag { graph, .. }, Element::Word(w)) => {
                let mut w = w.clone();
                w.push(l);
                Element::Word(raag_normalize(graph, &w))
            }
            (Backend::Lattice { rank, .. }, Element::Vector(v)) => Element::Vector(LatticeGroup { rank: *rank }.mul_letter(v, l)),
            (Backend::Bs { group, .. }, Element::Affine(m)) => Element::Affine(group.mul_letter(m, l)),
            (Backend::Product { left, right, .. }, Element::Pair(a, b)) => {
                let n = left.rank();
                if l.index() < n {
                    Element::Pair(Box::new(left.mul_letter(a, l)), b.clone())
                } else {
                    Element::Pair(a.clone(), Box::new(right.mul_letter(b, Letter::new(l.index() - n, l.is_inverse()))))
                }
            }
            _ => panic!("element does not belong to this oracle's group"),
        }
    }
}

fn bs_key(group: &BsGroup, per: &BsPeripheral, g: &BsMap) -> Payload {
    let m = group.slope_exponent(&g.slope);
    match &per.kind {
        BsKind::Fixed { point, exp } => Payload::FixedPoint {
            point: rational_string(&g.apply(point)),
            phase: m.rem_euclid(exp.abs()),
        },
        BsKind::Translation { step } => Payload::Level {
            exponent: m,
            phase: rational_string(&fract(&(&g.offset / (&g.slope * step)))),
        },
    }
}

fn bs_in_peripheral(group: &BsGroup, per: &BsPeripheral, m: &BsMap) -> bool {
    match &per.kind {
        BsKind::Fixed { point, exp } => {
            m.apply(point) == *point && group.slope_exponent(&m.slope).rem_euclid(exp.abs()) == 0
        }
        BsKind::Translation { step } => m.slope.is_one() && (&m.offset / step).is_integer(),
    }
}

fn bs_intersection(group: &BsGroup, perips: &[BsPeripheral], cosets: &[CosetId]) -> Option<Word> {
    let first = &cosets[0];
    let p0 = &perips[first.peripheral];
    let g0 = group.map_of(&first.rep);
    match &p0.kind {
        BsKind::Fixed { point, .. } => {
            let q = g0.apply(point);
            let mut l: i64 = 1;
            for c in cosets {
                let BsKind::Fixed { point, exp } = &perips[c.peripheral].kind else {
                    return None;
                };
                if group.map_of(&c.rep).apply(point) != q {
                    return None;
                }
                l = l.lcm(exp);
            }
            let BsKind::Fixed { exp, .. } = &p0.kind else { unreachable!() };
            Some(first.rep.concat(&p0.word.pow(l / exp)).concat(&first.rep.inverse()))
        }
        BsKind::Translation { .. } => {
            let mut common: Option<Rational> = None;
            for c in cosets {
                let BsKind::Translation { step } = &perips[c.peripheral].kind else {
                    return None;
                };
                let alpha = (&group.map_of(&c.rep).slope * step).abs();
                common = Some(match common {
                    None => alpha,
                    Some(t) => rational_lcm(&t, &alpha),
                });
            }
            let BsKind::Translation { step } = &p0.kind else { unreachable!() };
            let alpha0 = &g0.slope * step;
            let n = common.expect("nonempty") / alpha0;
            let n = i64::try_from(n.to_integer()).expect("small exponent");
            Some(first.rep.concat(&p0.word.pow(n)).concat(&first.rep.inverse()))
        }
    }
}

/// Whether `x ∈ P₁·h·P₂` for cyclic peripherals of BS(1,k).
fn bs_double_coset_contains(group: &BsGroup, p1: &BsPeripheral, h: &BsMap, p2: &BsPeripheral, x: &BsMap) -> bool {
    let mx = group.slope_exponent(&x.slope);
    let mh = group.slope_exponent(&h.slope);
    match (&p1.kind, &p2.kind) {
        (BsKind::Fixed { point: q1, exp: e1 }, BsKind::Fixed { point: q2, exp: e2 }) => {
            let xs = x.apply(q2) - q1;
            let hs = h.apply(q2) - q1;
            if xs.is_zero() || hs.is_zero() {
                return xs.is_zero() && hs.is_zero() && (mx - mh).rem_euclid(e1.gcd(e2)) == 0;
            }
            let Some(j) = log_k(group.k, &(hs / xs)) else {
                return false;
            };
            if j.rem_euclid(*e1) != 0 {
                return false;
            }
            let a = -j / e1;
            (mx - a * e1 - mh).rem_euclid(e2.abs()) == 0
        }
        (BsKind::Translation { step: c1 }, BsKind::Fixed { point: q2, exp: e2 }) => {
            ((x.apply(q2) - h.apply(q2)) / c1).is_integer() && (mx - mh).rem_euclid(e2.abs()) == 0
        }
        (BsKind::Fixed { exp: e1, .. }, BsKind::Translation { .. }) => {
            if (mx - mh).rem_euclid(*e1) != 0 {
                return false;
            }
            let a = (mx - mh) / e1;
            let y = p1.map_power(group, -a).compose(x);
            bs_key(group, p2, &y) == bs_key(group, p2, h)
        }
        (BsKind::Translation { step: c1 }, BsKind::Translation { step: c2 }) => {
            if mx != mh {
                return false;
            }
            let g = rational_gcd(c1, &(&x.slope * c2));
            ((&x.offset - &h.offset) / g).is_integer()
        }
    }
}

impl BsPeripheral {
    fn map_power(&self, group: &BsGroup, n: i64) -> BsMap {
        group.map_of(&self.word.pow(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_spec(rank: usize, perips: &[&[&str]]) -> (PairSpec, Alphabet) {
        let a = Alphabet::indexed("x", rank);
        let al = if rank == 2 { Alphabet::from_strs(&["x", "y"]).unwrap() } else { a };
        let peripherals = perips
            .iter()
            .map(|gs| PeripheralSpec::Generators(gs.iter().map(|g| al.parse(g).unwrap()).collect()))
            .collect();
        (
            PairSpec { group: GroupSpec::Free { rank }, names: Some(al.names().to_vec()), peripherals },
            al,
        )
    }

    fn z2() -> Oracle {
        let a = Alphabet::indexed("x", 2);
        Oracle::new(&PairSpec {
            group: GroupSpec::Lattice { rank: 2 },
            names: None,
            peripherals: vec![PeripheralSpec::Generators(vec![a.parse("x0").unwrap()])],
        })
        .unwrap()
    }

    fn bs2() -> Oracle {
        Oracle::new(&PairSpec {
            group: GroupSpec::Bs { k: 2 },
            names: None,
            peripherals: vec![PeripheralSpec::Generators(vec![Word::from_letter(Letter::gen(1))])],
        })
        .unwrap()
    }

    fn c4() -> Oracle {
        Oracle::new(&PairSpec {
            group: GroupSpec::Raag { graph: DefiningGraph::cycle(4) },
            names: Some(vec!["a".into(), "b".into(), "c".into(), "d".into()]),
            peripherals: vec![PeripheralSpec::MaximalStandardAbelians],
        })
        .unwrap()
    }

    #[test]
    fn canonical_examples() {
        let z = z2();
        let c = z.canonical_coset(0, &z.alphabet().parse("x0^3 x1^5").unwrap()).unwrap();
        assert_eq!(c.payload, Payload::Residue(vec![0, 5]));
        assert_eq!(z.alphabet().format(&c.rep), "x1^5");

        let b = bs2();
        let c = b.canonical_coset(0, &b.alphabet().parse("a t a").unwrap()).unwrap();
        assert_eq!(c.payload, Payload::FixedPoint { point: "3".into(), phase: 0 });
        assert_eq!(b.alphabet().format(&c.rep), "a^3");

        let r = c4();
        let ab = r.raag_parts().unwrap().1.iter().position(|s| *s == [0, 1].into_iter().collect()).unwrap();
        let c = r.canonical_coset(ab, &r.alphabet().parse("c a b").unwrap()).unwrap();
        assert_eq!(r.alphabet().format(&c.rep), "c");
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(z2().enumerate_cosets(2, 1000).unwrap().len(), 5);
        let (spec, a) = free_spec(2, &[&["x"]]);
        let o = Oracle::new(&spec).unwrap();
        let cs = o.enumerate_cosets(1, 1000).unwrap();
        let reps: Vec<String> = cs.iter().map(|c| a.format(&c.rep)).collect();
        assert_eq!(reps, vec!["1", "y", "y^-1"]);
        assert_eq!(c4().enumerate_cosets(0, 1000).unwrap().len(), 4);
    }

    #[test]
    fn intersection_examples() {
        let z = z2();
        let cs = z.enumerate_cosets(2, 100).unwrap();
        assert!(z.infinite_intersection(&cs[..2]).unwrap().is_some());

        let b = bs2();
        let cs = b.enumerate_cosets(2, 100).unwrap();
        assert!(cs.len() > 2);
        assert!(b.infinite_intersection(&cs[..2]).unwrap().is_none());
        assert!(b.infinite_intersection(&cs[..1]).unwrap().is_some());

        let r = c4();
        let gens = r.raag_parts().unwrap().1.to_vec();
        let idx = |s: &[usize]| gens.iter().position(|g| *g == s.iter().copied().collect()).unwrap();
        let base = |i| CosetId { peripheral: i, rep: Word::empty(), payload: Payload::None };
        assert!(r.infinite_intersection(&[base(idx(&[0, 1])), base(idx(&[1, 2]))]).unwrap().is_some());
        assert!(r.infinite_intersection(&[base(idx(&[0, 1])), base(idx(&[2, 3]))]).unwrap().is_none());
    }

    #[test]
    fn distances() {
        let z = z2();
        let a = z.canonical_coset(0, &Word::empty()).unwrap();
        let b = z.canonical_coset(0, &z.alphabet().parse("x1^3").unwrap()).unwrap();
        assert_eq!(z.coset_distance(&a, &b).unwrap(), 3);
        let bs = bs2();
        let cs = bs.enumerate_cosets(2, 100).unwrap();
        for c in &cs {
            assert!(bs.coset_distance(&cs[0], c).unwrap() <= c.rep.len());
        }
        let p = bs.canonical_coset(0, &Word::empty()).unwrap();
        let q = bs.canonical_coset(0, &bs.alphabet().parse("a").unwrap()).unwrap();
        assert_eq!(bs.coset_distance(&p, &q).unwrap(), 1);
    }

    #[test]
    fn bs_translation_peripheral() {
        let o = Oracle::new(&PairSpec {
            group: GroupSpec::Bs { k: 2 },
            names: None,
            peripherals: vec![PeripheralSpec::Generators(vec![Word::from_letter(Letter::gen(0))])],
        })
        .unwrap();
        let cs = o.enumerate_cosets(2, 100).unwrap();
        assert!(o.infinite_intersection(&cs).unwrap().is_some());
        let t = o.canonical_coset(0, &o.alphabet().parse("t").unwrap()).unwrap();
        let ta = o.canonical_coset(0, &o.alphabet().parse("t a").unwrap()).unwrap();
        assert_eq!(t, ta);
        let at = o.canonical_coset(0, &o.alphabet().parse("a t").unwrap()).unwrap();
        assert_ne!(t, at);
    }

    #[test]
    fn product_pair() {
        let (left, _) = free_spec(2, &[&["x"]]);
        let right = PairSpec {
            group: GroupSpec::Lattice { rank: 1 },
            names: Some(vec!["z".into()]),
            peripherals: vec![PeripheralSpec::Generators(vec![Word::from_letter(Letter::gen(0))])],
        };
        let o = Oracle::new(&PairSpec {
            group: GroupSpec::Product { left: Box::new(left), right: Box::new(right) },
            names: None,
            peripherals: vec![PeripheralSpec::Product(Part::Peripheral(0), Part::Whole)],
        })
        .unwrap();
        let cs = o.enumerate_cosets(2, 1000).unwrap();
        // Whole second factor: the conjugates always share it.
        assert!(o.infinite_intersection(&cs).unwrap().is_some());
        let y = o.canonical_coset(0, &o.alphabet().parse("y z").unwrap()).unwrap();
        assert_eq!(o.alphabet().format(&y.rep), "y");
    }

    #[test]
    fn rejects_finite_peripherals() {
        let (mut spec, _) = free_spec(2, &[&["x x^-1"]]);
        assert!(Oracle::new(&spec).is_err());
        spec.peripherals = vec![PeripheralSpec::Stars];
        assert!(Oracle::new(&spec).is_err());
        let tri = PairSpec {
            group: GroupSpec::Raag { graph: DefiningGraph::complete(3) },
            names: None,
            peripherals: vec![PeripheralSpec::MaximalStandardAbelians],
        };
        assert!(Oracle::new(&tri).is_err());
    }

    #[test]
    fn generation() {
        let (spec, a) = free_spec(2, &[&["x"]]);
        let o = Oracle::new(&spec).unwrap();
        assert!(!o.generates_with(&[]).unwrap());
        assert!(o.generates_with(&[a.parse("y").unwrap()]).unwrap());
        assert!(!z2().generates_with(&[]).unwrap());
        assert!(z2().generates_with(&[Word::from_letter(Letter::gen(1))]).unwrap());
        let stars = Oracle::new(&PairSpec {
            group: GroupSpec::Raag { graph: DefiningGraph::cycle(4) },
            names: None,
            peripherals: vec![PeripheralSpec::Stars],
        })
        .unwrap();
        assert!(stars.generates_with(&[]).unwrap());
    }
}
