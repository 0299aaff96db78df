//! Intersections of conjugates of standard parabolic subgroups of RAAGs.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::words::{double_coset_split, is_in_parabolic, raag_normalize, DefiningGraph, Letter, Word};

/// A common generator `v` and the element `g₁vg₁⁻¹` lying in every conjugate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RaagWitness {
    pub generator: usize,
    pub element: Word,
}

/// Whether `x ∈ g⟨S⟩g⁻¹`, by normal forms.
pub fn in_conjugate(graph: &DefiningGraph, x: &Word, g: &Word, s: &BTreeSet<usize>) -> bool {
    is_in_parabolic(graph, &g.inverse().concat(x).concat(g), s)
}

/// `⋂ gᵢ⟨Sᵢ⟩gᵢ⁻¹` as `p⟨R⟩p⁻¹`.
///
/// Pairwise step: for `h = p·d·q` with `d` minimal in `⟨S⟩h⟨T⟩`,
/// `⟨S⟩ ∩ h⟨T⟩h⁻¹ = p⟨R⟩p⁻¹` where `R` is the set of `v ∈ S ∩ T` whose star
/// contains the support of `d`.
pub fn parabolic_intersection(
    graph: &DefiningGraph,
    cosets: &[(Word, BTreeSet<usize>)],
) -> Option<(Word, BTreeSet<usize>)> {
    let (first, rest) = cosets.split_first()?;
    let mut conj = raag_normalize(graph, &first.0);
    let mut gens = first.1.clone();
    for (g, t) in rest {
        if gens.is_empty() {
            break;
        }
        let h = raag_normalize(graph, &conj.inverse().concat(g));
        let split = double_coset_split(graph, &h, &gens, t);
        let support: BTreeSet<usize> = split.core.letters().iter().map(|l| l.index()).collect();
        gens = gens
            .intersection(t)
            .copied()
            .filter(|&v| support.iter().all(|&u| graph.commute(u, v)))
            .collect();
        conj = raag_normalize(graph, &conj.concat(&split.left));
    }
    Some((conj, gens))
}

fn check_hypotheses(graph: &DefiningGraph) -> Result<()> {
    if !graph.is_triangle_free() {
        return Err(Error::Capability("defining graph has a triangle".into()));
    }
    if graph.min_valence() < 2 {
        return Err(Error::Capability("defining graph has a vertex of valence < 2".into()));
    }
    Ok(())
}

/// Common-generator test for cosets of edge subgroups `gᵢ⟨aᵢ,bᵢ⟩`.
///
/// True iff some `v` lies in every generating pair and every `g₁⁻¹gᵢ` is
/// supported in `Star(v)`; the witness `g₁vg₁⁻¹` is re-verified in every
/// conjugate before it is returned.
pub fn raag_simplex_test(
    graph: &DefiningGraph,
    cosets: &[(Word, [usize; 2])],
) -> Result<Option<RaagWitness>> {
    check_hypotheses(graph)?;
    for (_, [a, b]) in cosets {
        if !graph.adjacent(*a, *b) {
            return Err(Error::Precondition("coset of a non-edge subgroup".into()));
        }
    }
    let Some((g1, _)) = cosets.first() else {
        return Ok(None);
    };
    let mut common: BTreeSet<usize> = cosets[0].1.iter().copied().collect();
    for (_, pair) in &cosets[1..] {
        common.retain(|v| pair.contains(v));
    }
    for &v in &common {
        let star = graph.star(v);
        let ok = cosets[1..].iter().all(|(g, _)| is_in_parabolic(graph, &g1.inverse().concat(g), &star));
        if ok {
            let element = raag_normalize(
                graph,
                &g1.concat(&Word::from_letter(Letter::gen(v))).concat(&g1.inverse()),
            );
            for (g, pair) in cosets {
                let s: BTreeSet<usize> = pair.iter().copied().collect();
                if !in_conjugate(graph, &element, g, &s) {
                    return Err(Error::Witness(format!("generator {v} conjugate fails membership")));
                }
            }
            return Ok(Some(RaagWitness { generator: v, element }));
        }
    }
    Ok(None)
}

/// The two-coset case of [`raag_simplex_test`]; the cosets must differ.
pub fn raag_edge_criterion(
    graph: &DefiningGraph,
    c1: (&Word, [usize; 2]),
    c2: (&Word, [usize; 2]),
) -> Result<Option<RaagWitness>> {
    let s1: BTreeSet<usize> = c1.1.iter().copied().collect();
    let s2: BTreeSet<usize> = c2.1.iter().copied().collect();
    if s1 == s2 && is_in_parabolic(graph, &c1.0.inverse().concat(c2.0), &s1) {
        return Err(Error::Precondition("edge criterion needs distinct cosets".into()));
    }
    raag_simplex_test(graph, &[(c1.0.clone(), c1.1), (c2.0.clone(), c2.1)])
}
