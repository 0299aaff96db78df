use std::collections::BTreeSet;

use cosetc_core::oracles::raag::{in_conjugate, raag_edge_criterion};
use cosetc_core::oracles::{CosetId, GroupSpec, Oracle, PairSpec, Part, PeripheralSpec};
use cosetc_core::qilab::sample_word;
use cosetc_core::words::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gens(ws: &[&[i32]]) -> PeripheralSpec {
    PeripheralSpec::Generators(ws.iter().map(|w| Word::from_raw(w).unwrap()).collect())
}

fn pair(group: GroupSpec, peripherals: Vec<PeripheralSpec>) -> Oracle {
    Oracle::new(&PairSpec { group, names: None, peripherals }).unwrap()
}

/// Backends with the generators of each peripheral, as words in `G`.
fn cases() -> Vec<(&'static str, Oracle, Vec<Vec<Word>>)> {
    let w = |r: &[i32]| Word::from_raw(r).unwrap();
    let free = pair(GroupSpec::Free { rank: 2 }, vec![gens(&[&[1, 1]]), gens(&[&[2, 1, -2], &[1, 2]])]);
    let c4 = pair(GroupSpec::Raag { graph: DefiningGraph::cycle(4) }, vec![PeripheralSpec::MaximalStandardAbelians]);
    let c4_gens = c4.raag_parts().unwrap().1.iter().map(|s| s.iter().map(|&v| w(&[v as i32 + 1])).collect()).collect();
    let z2 = pair(GroupSpec::Lattice { rank: 2 }, vec![gens(&[&[1]]), gens(&[&[1, 2, 2]])]);
    let bs = pair(GroupSpec::Bs { k: 2 }, vec![gens(&[&[2]]), gens(&[&[1]])]);
    let bs_t = pair(GroupSpec::Bs { k: 2 }, vec![gens(&[&[2, 1, 1]])]);
    let product = pair(
        GroupSpec::Product {
            left: Box::new(PairSpec { group: GroupSpec::Free { rank: 2 }, names: None, peripherals: vec![gens(&[&[1]])] }),
            right: Box::new(PairSpec { group: GroupSpec::Lattice { rank: 1 }, names: None, peripherals: vec![gens(&[&[1, 1]])] }),
        },
        vec![PeripheralSpec::Product(Part::Peripheral(0), Part::Peripheral(0)), PeripheralSpec::Product(Part::Whole, Part::Peripheral(0))],
    );
    vec![
        ("free", free, vec![vec![w(&[1, 1])], vec![w(&[2, 1, -2]), w(&[1, 2])]]),
        ("c4", c4, c4_gens),
        ("z2", z2, vec![vec![w(&[1])], vec![w(&[1, 2, 2])]]),
        ("bs", bs, vec![vec![w(&[2])], vec![w(&[1])]]),
        ("bs-translation", bs_t, vec![vec![w(&[2, 1, 1])]]),
        ("product", product, vec![vec![w(&[1]), w(&[3, 3])], vec![w(&[1]), w(&[2]), w(&[3, 3])]]),
    ]
}

fn random_element_of(rng: &mut impl Rng, gens: &[Word], steps: usize) -> Word {
    let mut out = Word::empty();
    for _ in 0..rng.gen_range(0..=steps) {
        let g = &gens[rng.gen_range(0..gens.len())];
        out = out.concat(&if rng.gen_bool(0.5) { g.clone() } else { g.inverse() });
    }
    out
}

fn translate(o: &Oracle, h: &Word, c: &CosetId) -> CosetId {
    o.canonical_coset(c.peripheral, &h.concat(&c.rep)).unwrap()
}

#[test]
fn canonical_coset_is_a_class_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, o, perips) in cases() {
        for _ in 0..200 {
            let p = rng.gen_range(0..perips.len());
            let g = sample_word(&mut rng, o.rank(), 4);
            let x = random_element_of(&mut rng, &perips[p], 3);
            let c = o.canonical_coset(p, &g).unwrap();
            assert_eq!(c, o.canonical_coset(p, &g.concat(&x)).unwrap(), "{name}: g = {g:?}, x = {x:?}");
            assert_eq!(c, o.canonical_coset(p, &c.rep).unwrap(), "{name}");
            assert!(c.rep.len() <= o.normal_word(&g).len().max(g.len()), "{name}");
            assert!(o.in_conjugate(&g.concat(&x).concat(&g.inverse()), &c), "{name}");
        }
    }
}

#[test]
fn enumeration_matches_ball() {
    for (name, o, perips) in cases() {
        for r in 0..=3 {
            let listed: BTreeSet<CosetId> = o.enumerate_cosets(r, 1_000_000).unwrap().into_iter().collect();
            let mut brute = BTreeSet::new();
            for (_, w) in ball(&o, r, 1_000_000).unwrap() {
                for p in 0..perips.len() {
                    brute.insert(o.canonical_coset(p, &w).unwrap());
                }
            }
            assert_eq!(listed, brute, "{name}, R = {r}");
            assert!(listed.iter().all(|c| c.rep.len() <= r), "{name}");
        }
    }
}

#[test]
fn intersections_are_translation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (name, o, perips) in cases() {
        if !o.capabilities().exact_intersection {
            continue;
        }
        for _ in 0..100 {
            let k = rng.gen_range(1..=3);
            let cosets: Vec<CosetId> = (0..k)
                .map(|_| o.canonical_coset(rng.gen_range(0..perips.len()), &sample_word(&mut rng, o.rank(), 3)).unwrap())
                .collect();
            let h = sample_word(&mut rng, o.rank(), 3);
            let moved: Vec<CosetId> = cosets.iter().map(|c| translate(&o, &h, c)).collect();
            let a = o.infinite_intersection(&cosets).unwrap();
            let b = o.infinite_intersection(&moved).unwrap();
            assert_eq!(a.is_some(), b.is_some(), "{name}: {cosets:?} by {h:?}");
            if let Some(x) = a {
                assert!(cosets.iter().all(|c| o.in_conjugate(&x, c)), "{name}");
            }
        }
    }
}

#[test]
fn double_coset_reps_are_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (name, o, perips) in cases() {
        for _ in 0..100 {
            let mut pick = || o.canonical_coset(rng.gen_range(0..perips.len()), &sample_word(&mut rng, o.rank(), 3)).unwrap();
            let (c1, c2) = (pick(), pick());
            let h = sample_word(&mut rng, o.rank(), 3);
            let rep = o.double_coset_rep(&c1, &c2).unwrap();
            assert_eq!(rep, o.double_coset_rep(&translate(&o, &h, &c1), &translate(&o, &h, &c2)).unwrap(), "{name}");
            assert_eq!(rep.len(), o.double_coset_rep(&c2, &c1).unwrap().len(), "{name}");
            assert_eq!(o.coset_distance(&c1, &c2).unwrap(), rep.len(), "{name}");
            if c1 == c2 {
                assert!(rep.is_empty(), "{name}");
            }
        }
    }
}

/// `min |y|` over `x ∈ c₁` with `|x| ≤ r` and `xy ∈ c₂`, `|y| ≤ r`.
fn brute_distance(o: &Oracle, c1: &CosetId, c2: &CosetId, r: usize) -> Option<usize> {
    let b = ball(o, r, 1_000_000).unwrap();
    let starts: Vec<&Word> =
        b.iter().map(|(_, w)| w).filter(|w| o.canonical_coset(c1.peripheral, w).unwrap() == *c1).collect();
    b.iter()
        .map(|(_, y)| y)
        .filter(|y| starts.iter().any(|x| o.canonical_coset(c2.peripheral, &x.concat(y)).unwrap() == *c2))
        .map(|y| y.len())
        .min()
}

#[test]
fn coset_distance_matches_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for (name, o, perips) in cases() {
        if !o.capabilities().exact_coset_distance {
            continue;
        }
        for _ in 0..12 {
            let mut pick = || o.canonical_coset(rng.gen_range(0..perips.len()), &sample_word(&mut rng, o.rank(), 2)).unwrap();
            let (c1, c2) = (pick(), pick());
            let d = o.coset_distance(&c1, &c2).unwrap();
            let brute = brute_distance(&o, &c1, &c2, 4).expect("window reaches c2");
            assert_eq!(d, brute, "{name}: {c1:?} {c2:?}");
        }
    }
}

fn edge_subgroup_elements(a: usize, b: usize, r: i64) -> Vec<Word> {
    let (x, y) = (Word::from_letter(Letter::gen(a)), Word::from_letter(Letter::gen(b)));
    let mut out = Vec::new();
    for m in -r..=r {
        for n in -(r - m.abs())..=(r - m.abs()) {
            if (m, n) != (0, 0) {
                out.push(x.pow(m).concat(&y.pow(n)));
            }
        }
    }
    out
}

#[test]
fn raag_edge_criterion_matches_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for graph in [DefiningGraph::cycle(4), DefiningGraph::cycle(5)] {
        let n = graph.vertex_count();
        let edges = graph.edges();
        let mut positives = 0;
        for _ in 0..250 {
            let (a1, b1) = edges[rng.gen_range(0..edges.len())];
            let (a2, b2) = edges[rng.gen_range(0..edges.len())];
            let g1 = raag_normalize(&graph, &sample_word(&mut rng, n, 4));
            let g2 = raag_normalize(&graph, &sample_word(&mut rng, n, 4));
            let s1: BTreeSet<usize> = [a1, b1].into_iter().collect();
            let s2: BTreeSet<usize> = [a2, b2].into_iter().collect();
            if s1 == s2 && is_in_parabolic(&graph, &g1.inverse().concat(&g2), &s1) {
                continue;
            }
            match raag_edge_criterion(&graph, (&g1, [a1, b1]), (&g2, [a2, b2])).unwrap() {
                Some(w) => {
                    positives += 1;
                    let expected = raag_normalize(&graph, &g1.concat(&Word::from_letter(Letter::gen(w.generator))).concat(&g1.inverse()));
                    assert_eq!(w.element, expected);
                    assert!(in_conjugate(&graph, &w.element, &g1, &s1) && in_conjugate(&graph, &w.element, &g2, &s2));
                }
                None => {
                    for p in edge_subgroup_elements(a1, b1, 8) {
                        let x = g1.concat(&p).concat(&g1.inverse());
                        assert!(!in_conjugate(&graph, &x, &g2, &s2), "common element {x:?}");
                    }
                }
            }
        }
        assert!(positives > 0);
    }
}
