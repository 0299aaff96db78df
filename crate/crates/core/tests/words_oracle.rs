use std::collections::{BTreeSet, HashSet, VecDeque};

use cosetc_core::oracles::raag::parabolic_intersection;
use cosetc_core::words::*;
use proptest::prelude::*;

fn graphs() -> Vec<DefiningGraph> {
    vec![
        DefiningGraph::cycle(4),
        DefiningGraph::cycle(5),
        DefiningGraph::new(4, &[(0, 1), (1, 2), (2, 3)]).unwrap(),
        DefiningGraph::discrete(3),
        DefiningGraph::complete(3),
    ]
}

fn word(raw: &[(usize, bool)], rank: usize) -> Word {
    raw.iter().map(|&(i, inv)| Letter::new(i % rank, inv)).collect()
}

fn raw_word(max: usize) -> impl Strategy<Value = Vec<(usize, bool)>> {
    prop::collection::vec((0usize..5, any::<bool>()), 0..=max)
}

fn subset(mask: u8, n: usize) -> BTreeSet<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

/// Repeatedly delete the first adjacent cancelling pair.
fn naive_reduce(w: &Word) -> Word {
    let mut v = w.letters().to_vec();
    loop {
        let Some(i) = (0..v.len().saturating_sub(1)).find(|&i| v[i] == v[i + 1].inverse()) else {
            return Word::new(v);
        };
        v.drain(i..i + 2);
    }
}

/// Least word, in shortlex order, among all words reachable by swapping
/// adjacent commuting letters and deleting adjacent cancelling pairs.
fn brute_nf(graph: &DefiningGraph, w: &Word) -> Word {
    let mut seen: HashSet<Vec<Letter>> = HashSet::new();
    let mut q = VecDeque::from([w.letters().to_vec()]);
    seen.insert(w.letters().to_vec());
    let mut best = w.clone();
    while let Some(v) = q.pop_front() {
        let cand = Word::new(v.clone());
        if cand < best {
            best = cand;
        }
        for i in 0..v.len().saturating_sub(1) {
            let (a, b) = (v[i], v[i + 1]);
            let next = if a == b.inverse() {
                let mut n = v.clone();
                n.drain(i..i + 2);
                n
            } else if a.index() != b.index() && graph.commute(a.index(), b.index()) {
                let mut n = v.clone();
                n.swap(i, i + 1);
                n
            } else {
                continue;
            };
            if seen.insert(next.clone()) {
                q.push_back(next);
            }
        }
    }
    best
}

fn in_sub(graph: &DefiningGraph, w: &Word, s: &BTreeSet<usize>) -> bool {
    raag_normalize(graph, w).letters().iter().all(|l| s.contains(&l.index()))
}

/// Elements of `⟨S⟩` of length at most `r`, as normal forms.
fn sub_ball(graph: &DefiningGraph, s: &BTreeSet<usize>, r: usize) -> Vec<Word> {
    let mut seen: BTreeSet<Word> = BTreeSet::from([Word::empty()]);
    let mut frontier = vec![Word::empty()];
    for _ in 0..r {
        let mut next = Vec::new();
        for w in &frontier {
            for &v in s {
                for inv in [false, true] {
                    let mut x = w.clone();
                    x.push(Letter::new(v, inv));
                    let x = raag_normalize(graph, &x);
                    if seen.insert(x.clone()) {
                        next.push(x);
                    }
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().collect()
}

#[test]
fn fixed_normal_forms() {
    let al = Alphabet::from_strs(&["a", "b", "c", "d"]).unwrap();
    let g = DefiningGraph::cycle(4);
    let nf = |s: &str| al.format(&raag_normalize(&g, &al.parse(s).unwrap()));
    assert_eq!(nf("b a"), "a b");
    assert_eq!(nf("c a"), "c a");
    assert_eq!(nf("a b a^-1"), "b");
    assert_eq!(nf("d b d^-1 b^-1"), "d b d^-1 b^-1");
    let free = FreeGroup { rank: 2 };
    assert_eq!(free_reduce(&Word::from_raw(&[1, 2, -2, -1, 1]).unwrap(), free.rank).unwrap().word, Word::from_raw(&[1]).unwrap());
}

#[test]
fn strip_examples() {
    let al = Alphabet::from_strs(&["a", "b", "c", "d"]).unwrap();
    let g = DefiningGraph::cycle(4);
    let s: BTreeSet<usize> = [0, 1].into_iter().collect();
    let (head, tail) = strip_parabolic_tail(&g, &al.parse("c a b").unwrap(), &s);
    assert_eq!(al.format(head.word()), "c");
    assert_eq!(al.format(tail.word()), "a b");
    let (head, tail) = strip_parabolic_tail(&g, &al.parse("a c").unwrap(), &s);
    assert_eq!((al.format(head.word()), tail.word().len()), ("a c".to_string(), 0));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn free_reduction_matches_naive(raw in raw_word(12)) {
        let w = word(&raw, 3);
        prop_assert_eq!(reduce(&w), naive_reduce(&w));
        prop_assert_eq!(raag_normalize(&DefiningGraph::discrete(3), &w), naive_reduce(&w));
    }

    #[test]
    fn normal_form_matches_rewriting(gi in 0usize..5, raw in raw_word(6)) {
        let g = &graphs()[gi];
        let w = word(&raw, g.vertex_count());
        prop_assert_eq!(raag_normalize(g, &w), brute_nf(g, &w));
    }

    #[test]
    fn normal_form_laws(gi in 0usize..5, a in raw_word(10), b in raw_word(10)) {
        let g = &graphs()[gi];
        let n = g.vertex_count();
        let (u, v) = (word(&a, n), word(&b, n));
        let nu = raag_normalize(g, &u);
        prop_assert_eq!(raag_normalize(g, &nu), nu.clone());
        let nv = raag_normalize(g, &v);
        prop_assert_eq!(raag_normalize(g, &u.concat(&v)), raag_normalize(g, &nu.concat(&nv)));
        prop_assert!(raag_normalize(g, &u.concat(&u.inverse())).is_empty());
        let nf = nf_raag(g, &u).unwrap();
        let letters: BTreeSet<usize> = u.letters().iter().map(|l| l.index()).collect();
        prop_assert!(support(&nf).is_subset(&letters));
        prop_assert!(nu.len() <= u.len());
    }

    #[test]
    fn abelian_normal_forms(a in raw_word(10), b in raw_word(10)) {
        let g = DefiningGraph::complete(3);
        let (u, v) = (word(&a, 3), word(&b, 3));
        prop_assert_eq!(raag_normalize(&g, &u) == raag_normalize(&g, &v), u.exponent_sums(3) == v.exponent_sums(3));
    }

    #[test]
    fn strip_is_minimal(gi in 0usize..3, raw in raw_word(5), mask in 1u8..16) {
        let g = &graphs()[gi];
        let n = g.vertex_count();
        let s = subset(mask, n);
        let w = raag_normalize(g, &word(&raw, n));
        let (head, tail) = strip_parabolic_tail(g, &w, &s);
        prop_assert_eq!(raag_normalize(g, &head.word().concat(tail.word())), w.clone());
        prop_assert!(in_sub(g, tail.word(), &s));
        let best = ball(&RaagGroup { graph: g.clone() }, w.len(), 1_000_000)
            .unwrap()
            .into_iter()
            .map(|(x, _)| x)
            .filter(|x| in_sub(g, &x.inverse().concat(&w), &s))
            .min()
            .unwrap();
        prop_assert_eq!(head.word(), &best);

        let (left, rest) = strip_parabolic_head(g, &w, &s);
        prop_assert!(in_sub(g, left.word(), &s));
        prop_assert_eq!(raag_normalize(g, &left.word().concat(rest.word())), w.clone());
    }

    #[test]
    fn double_coset_core_is_unique_minimum(gi in 0usize..3, raw in raw_word(4), m1 in 1u8..16, m2 in 1u8..16) {
        let g = &graphs()[gi];
        let n = g.vertex_count();
        let (s, t) = (subset(m1, n), subset(m2, n));
        let w = raag_normalize(g, &word(&raw, n));
        let split = double_coset_split(g, &w, &s, &t);
        prop_assert!(in_sub(g, &split.left, &s) && in_sub(g, &split.right, &t));
        prop_assert_eq!(raag_normalize(g, &split.left.concat(&split.core).concat(&split.right)), w.clone());
        let ps = sub_ball(g, &s, w.len());
        let qs = sub_ball(g, &t, w.len());
        let mut minimal: BTreeSet<Word> = BTreeSet::new();
        let mut best = usize::MAX;
        for p in &ps {
            for q in &qs {
                let x = raag_normalize(g, &p.concat(&w).concat(q));
                if x.len() < best {
                    best = x.len();
                    minimal.clear();
                }
                if x.len() == best {
                    minimal.insert(x);
                }
            }
        }
        prop_assert_eq!(minimal.into_iter().collect::<Vec<_>>(), vec![split.core.clone()]);
    }

    #[test]
    fn parabolic_intersection_matches_ball(
        gi in 0usize..3,
        r1 in raw_word(3),
        r2 in raw_word(3),
        m1 in 1u8..16,
        m2 in 1u8..16,
    ) {
        let g = &graphs()[gi];
        let n = g.vertex_count();
        let (s1, s2) = (subset(m1, n), subset(m2, n));
        let (g1, g2) = (word(&r1, n), word(&r2, n));
        let (p, r) = parabolic_intersection(g, &[(g1.clone(), s1.clone()), (g2.clone(), s2.clone())]).unwrap();
        let inside = |x: &Word, c: &Word, s: &BTreeSet<usize>| in_sub(g, &c.inverse().concat(x).concat(c), s);
        for (x, _) in ball(&RaagGroup { graph: g.clone() }, 4, 1_000_000).unwrap() {
            prop_assert_eq!(inside(&x, &g1, &s1) && inside(&x, &g2, &s2), inside(&x, &p, &r), "x = {:?}", x);
        }
    }

    #[test]
    fn alphabet_round_trip(raw in raw_word(10)) {
        let al = Alphabet::from_strs(&["a", "b", "c"]).unwrap();
        let w = word(&raw, 3);
        prop_assert_eq!(al.parse(&al.format(&w)).unwrap(), w);
    }

    #[test]
    fn ball_is_shortlex_geodesic(gi in 0usize..5) {
        let g = &graphs()[gi];
        let b = ball(&RaagGroup { graph: g.clone() }, 3, 1_000_000).unwrap();
        let elems: HashSet<Word> = b.iter().map(|(e, _)| e.clone()).collect();
        prop_assert_eq!(elems.len(), b.len());
        for (e, w) in &b {
            prop_assert_eq!(&raag_normalize(g, w), e);
            prop_assert_eq!(w.len(), e.len());
        }
    }
}
