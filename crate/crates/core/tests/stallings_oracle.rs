use std::collections::{BTreeMap, VecDeque};

use cosetc_core::stallings::*;
use cosetc_core::words::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn xy() -> Alphabet {
    Alphabet::from_strs(&["x", "y"]).unwrap()
}

fn core(gens: &[&str]) -> CoreGraph {
    let al = xy();
    CoreGraph::from_generators(2, &gens.iter().map(|g| al.parse(g).unwrap()).collect::<Vec<_>>()).unwrap()
}

/// A permutation action of F(x,y) on `n` points, with the stabilizer of 0
/// given by Schreier generators.
struct Action {
    perms: Vec<Vec<usize>>,
    inv: Vec<Vec<usize>>,
}

impl Action {
    fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perms: Vec<Vec<usize>> = (0..2)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let inv = perms
            .iter()
            .map(|p| {
                let mut q = vec![0; n];
                for (i, &j) in p.iter().enumerate() {
                    q[j] = i;
                }
                q
            })
            .collect();
        Action { perms, inv }
    }

    fn act(&self, p: usize, w: &Word) -> usize {
        w.letters().iter().fold(p, |p, l| if l.is_inverse() { self.inv[l.index()][p] } else { self.perms[l.index()][p] })
    }

    /// Transversal words for the orbit of 0.
    fn transversal(&self) -> BTreeMap<usize, Word> {
        let mut t = BTreeMap::from([(0, Word::empty())]);
        let mut q = VecDeque::from([0]);
        while let Some(p) = q.pop_front() {
            for l in Letter::all(2) {
                let r = self.act(p, &Word::from_letter(l));
                if !t.contains_key(&r) {
                    let mut w = t[&p].clone();
                    w.push(l);
                    t.insert(r, w);
                    q.push_back(r);
                }
            }
        }
        t
    }

    fn stabilizer_generators(&self) -> Vec<Word> {
        let t = self.transversal();
        let mut gens = Vec::new();
        for (&p, tp) in &t {
            for i in 0..2 {
                let l = Letter::gen(i);
                let q = self.act(p, &Word::from_letter(l));
                let g = reduce(&tp.concat(&Word::from_letter(l)).concat(&t[&q].inverse()));
                if !g.is_empty() {
                    gens.push(g);
                }
            }
        }
        gens
    }
}

fn free_ball(r: usize) -> Vec<Word> {
    ball(&FreeGroup { rank: 2 }, r, 1_000_000).unwrap().into_iter().map(|(e, _)| e).collect()
}

#[test]
fn spec_examples() {
    let al = xy();
    let c = core(&["x", "y x y^-1"]);
    assert_eq!((c.vertex_count(), c.edge_count(), c.subgroup_rank()), (2, 3, 2));
    assert!(c.contains(&al.parse("y x y^-1").unwrap()));
    assert!(!c.contains(&al.parse("y").unwrap()));
    assert!(c.contains(&Word::empty()));
    let c = core(&["x"]);
    assert_eq!((c.vertex_count(), c.edge_count(), c.subgroup_rank()), (1, 1, 1));
    let c = core(&["x^2"]);
    assert_eq!((c.vertex_count(), c.edge_count(), c.subgroup_rank()), (2, 2, 1));
    assert!(core(&[]).is_trivial());

    assert_eq!(al.format(&core(&["x"]).coset_min_rep(&al.parse("x^3 y").unwrap())), "x^3 y");
    assert!(core(&["x"]).coset_min_rep(&al.parse("x^3").unwrap()).is_empty());
    assert_eq!(al.format(&core(&["x^2"]).coset_min_rep(&al.parse("x^3").unwrap())), "x");

    assert!(finite_index_test(&core(&["x^2"]), &core(&["x"])).unwrap());
    assert!(!finite_index_test(&core(&["x"]), &whole_group(2)).unwrap());
    assert_eq!(subgroup_index(&core(&["x^2", "y", "x y x^-1"]), &whole_group(2)).unwrap(), Some(2));
    assert!(finite_index_test(&core(&["y"]), &core(&["x"])).is_err());

    let p = core(&["x^2"]);
    assert!(is_commensurating(&p, &al.parse("x").unwrap()));
    assert!(!is_commensurating(&p, &al.parse("y").unwrap()));
    assert!(is_commensurating(&p, &al.parse("x^4").unwrap()));

    assert_eq!(malnormality_certificate(&[core(&["x"])], DEFAULT_STATE_CAP).unwrap(), MalnormalVerdict::Malnormal);
    assert_eq!(malnormality_certificate(&[core(&["x y"])], DEFAULT_STATE_CAP).unwrap(), MalnormalVerdict::Malnormal);
    assert_eq!(
        malnormality_certificate(&[core(&["x^2"])], DEFAULT_STATE_CAP).unwrap(),
        MalnormalVerdict::Violation { i: 0, j: 0, g: al.parse("x").unwrap() }
    );

    assert_eq!(height_exact_free(&[core(&["x^2"])], 6, DEFAULT_STATE_CAP).unwrap(), Height::Exact(2));
    assert_eq!(height_exact_free(&[core(&["x"])], 6, DEFAULT_STATE_CAP).unwrap(), Height::Exact(1));
    let tri: Vec<CoreGraph> = [[0, 1], [1, 2], [2, 0]]
        .iter()
        .map(|&[a, b]| CoreGraph::from_generators(3, &[Word::from_letter(Letter::gen(a)), Word::from_letter(Letter::gen(b))]).unwrap())
        .collect();
    assert_eq!(height_exact_free(&tri, 6, DEFAULT_STATE_CAP).unwrap(), Height::Exact(2));
    let w = infinite_intersection_free(&[(&tri[0], Word::empty()), (&tri[1], Word::empty())]).unwrap();
    assert_eq!(w, Word::from_letter(Letter::gen(1)));
    assert!(infinite_intersection_free(&[(&tri[0], Word::empty()), (&tri[1], Word::empty()), (&tri[2], Word::empty())]).is_none());
    assert!(infinite_intersection_free(&[(&core(&["x"]), Word::empty()), (&core(&["x"]), al.parse("y").unwrap())]).is_none());
    let w = infinite_intersection_free(&[(&core(&["x^2"]), Word::empty()), (&core(&["x^2"]), al.parse("x").unwrap())]).unwrap();
    assert_eq!(al.format(&w), "x^2");
}

#[test]
fn triple_has_no_short_common_element() {
    let gens = |a: usize, b: usize| {
        CoreGraph::from_generators(3, &[Word::from_letter(Letter::gen(a)), Word::from_letter(Letter::gen(b))]).unwrap()
    };
    let cs = [gens(0, 1), gens(1, 2), gens(2, 0)];
    for (e, _) in ball(&FreeGroup { rank: 3 }, 6, 1_000_000).unwrap() {
        if !e.is_empty() {
            assert!(!cs.iter().all(|c| c.contains(&e)));
        }
    }
}

#[test]
fn finite_index_actions() {
    for seed in 0..24u64 {
        let n = 2 + (seed as usize % 5);
        let a = Action::random(n, seed);
        let gens = a.stabilizer_generators();
        let h = CoreGraph::from_generators(2, &gens).unwrap();
        let index = a.transversal().len();
        assert_eq!(subgroup_index(&h, &whole_group(2)).unwrap(), Some(index), "seed {seed}");
        assert_eq!(h.subgroup_rank(), 1 + index);
        assert_eq!(h.subgroup_rank(), h.edge_count() + 1 - h.vertex_count());
        let ball = free_ball(4);
        for w in &ball {
            assert_eq!(h.contains(w), a.act(0, w) == 0, "seed {seed}, {w:?}");
        }
        // Left cosets gH correspond to the points 0·g⁻¹.
        for g in ball.iter().take(60) {
            let rep = h.coset_min_rep(g);
            let target = a.act(0, &g.inverse());
            let best = ball.iter().filter(|x| a.act(0, &x.inverse()) == target).min().unwrap();
            assert_eq!(&rep, best);
        }
        let g = Word::from_raw(&[2, 1]).unwrap();
        let conj = h.conjugate(&g);
        for w in ball.iter().take(200) {
            assert_eq!(conj.contains(w), a.act(0, &g.inverse().concat(w).concat(&g)) == 0);
        }
        let b = Action::random(3, seed + 100);
        let k = CoreGraph::from_generators(2, &b.stabilizer_generators()).unwrap();
        let both = h.intersect(&k);
        for w in ball.iter().take(300) {
            assert_eq!(both.contains(w), h.contains(w) && k.contains(w));
        }
    }
}

#[test]
fn cyclic_malnormality_matches_roots() {
    let al = xy();
    let ball = free_ball(4);
    for w in free_ball(4) {
        if w.is_empty() {
            continue;
        }
        let proper_power = ball.iter().any(|u| (2..=w.len()).any(|k| reduce(&u.pow(k as i64)) == w));
        let verdict = malnormality_certificate(&[CoreGraph::from_generators(2, &[w.clone()]).unwrap()], DEFAULT_STATE_CAP).unwrap();
        assert_eq!(verdict == MalnormalVerdict::Malnormal, !proper_power, "{}", al.format(&w));
    }
}

fn gen_words() -> impl Strategy<Value = Vec<Vec<(usize, bool)>>> {
    prop::collection::vec(prop::collection::vec((0usize..2, any::<bool>()), 1..=3), 1..=2)
}

fn to_words(raw: &[Vec<(usize, bool)>]) -> Vec<Word> {
    raw.iter().map(|w| w.iter().map(|&(i, inv)| Letter::new(i, inv)).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn folding_is_confluent(raw in gen_words(), seed in any::<u64>()) {
        let gens = to_words(&raw);
        let base = CoreGraph::from_generators(2, &gens).unwrap();
        let mut shuffled = gens.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        shuffled.push(gens[0].concat(gens.last().unwrap()));
        shuffled.push(gens[0].inverse());
        let other = CoreGraph::from_generators(2, &shuffled).unwrap();
        prop_assert_eq!(canonical_hash(&base), canonical_hash(&other));
        prop_assert_eq!(base.subgroup_rank(), base.edge_count() + 1 - base.vertex_count());
        for b in base.basis() {
            prop_assert!(base.contains(&b));
        }
        for g in &gens {
            prop_assert!(base.contains(g));
        }
    }

    #[test]
    fn intersections_match_brute_force(a in gen_words(), b in gen_words(), c1 in prop::collection::vec((0usize..2, any::<bool>()), 0..=2)) {
        let p = CoreGraph::from_generators(2, &to_words(&a)).unwrap();
        let q = CoreGraph::from_generators(2, &to_words(&b)).unwrap();
        let g: Word = c1.iter().map(|&(i, inv)| Letter::new(i, inv)).collect();
        let result = infinite_intersection_free(&[(&p, Word::empty()), (&q, g.clone())]);
        if let Some(w) = &result {
            prop_assert!(!w.is_empty());
            prop_assert!(p.contains(w));
            prop_assert!(q.contains(&g.inverse().concat(w).concat(&g)));
        }
        let found = free_ball(8)
            .into_iter()
            .find(|x| !x.is_empty() && p.contains(x) && q.contains(&g.inverse().concat(x).concat(&g)));
        prop_assert_eq!(found.is_some(), result.as_ref().is_some_and(|w| w.len() <= 8));
        if let (Some(f), Some(w)) = (&found, &result) {
            prop_assert_eq!(f.len(), w.len());
        }
    }

    #[test]
    fn height_is_monotone(a in gen_words(), b in gen_words()) {
        let p = CoreGraph::from_generators(2, &to_words(&a)).unwrap();
        let q = CoreGraph::from_generators(2, &to_words(&b)).unwrap();
        let hp = height_exact_free(&[p.clone()], 5, DEFAULT_STATE_CAP).unwrap();
        let hpq = height_exact_free(&[p, q], 5, DEFAULT_STATE_CAP).unwrap();
        let value = |h: Height| match h { Height::Exact(n) => n, Height::ExceedsCap(n) => n + 1 };
        prop_assert!(value(hp) <= value(hpq));
    }

    #[test]
    fn coset_reps_are_canonical(a in gen_words(), g in prop::collection::vec((0usize..2, any::<bool>()), 0..=5)) {
        let p = CoreGraph::from_generators(2, &to_words(&a)).unwrap();
        let g: Word = g.iter().map(|&(i, inv)| Letter::new(i, inv)).collect();
        let rep = p.coset_min_rep(&g);
        prop_assert!(p.contains(&rep.inverse().concat(&g)));
        for h in p.basis() {
            prop_assert_eq!(&p.coset_min_rep(&g.concat(&h)), &rep);
        }
        let best = free_ball(g.len()).into_iter().filter(|x| p.contains(&x.inverse().concat(&g))).min().unwrap();
        prop_assert_eq!(rep, best);
    }
}

#[test]
fn conjugate_core_membership() {
    let al = xy();
    let p = core(&["x^2", "y x y"]);
    for g in ["y", "x y^-1", "x^3"] {
        let g = al.parse(g).unwrap();
        let c = p.conjugate(&g);
        for w in free_ball(5) {
            assert_eq!(c.contains(&w), p.contains(&g.inverse().concat(&w).concat(&g)));
        }
    }
}
