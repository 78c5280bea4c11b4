use motifwalk::isomorph::are_isomorphic;
use motifwalk::molgraph::{
    canonical_form, morgan_fingerprint, parse_smiles, validate_valence, write_smiles, Atom, BondOrder, Element,
    MolecularGraph,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

/// Connected graph: a random tree plus a few extra edges, with C/N/O/S atoms.
fn arb_connected(max_atoms: usize) -> impl Strategy<Value = MolecularGraph> {
    (2..=max_atoms)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(0usize..4, n),
                proptest::collection::vec(any::<usize>(), n - 1),
                proptest::collection::vec((0..n, 0..n, 0u8..3), 0..3),
            )
        })
        .prop_map(|(labels, parents, extra)| {
            let elems = [Element::C, Element::C, Element::N, Element::O];
            let mut g = MolecularGraph::new();
            for l in &labels {
                g.add_atom(Atom::new(elems[*l]));
            }
            for (k, p) in parents.iter().enumerate() {
                let child = k + 1;
                let _ = g.add_bond(p % child, child, BondOrder::Single);
            }
            for (a, b, o) in extra {
                let order = [BondOrder::Single, BondOrder::Double, BondOrder::Single][o as usize];
                let _ = g.add_bond(a, b, order);
            }
            g
        })
}

fn shuffled(g: &MolecularGraph, seed: u64) -> MolecularGraph {
    let mut perm: Vec<usize> = (0..g.num_atoms()).collect();
    perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    g.permuted(&perm)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fingerprint_is_relabeling_invariant(g in arb_connected(12), seed in any::<u64>()) {
        prop_assert_eq!(morgan_fingerprint(&g, 2), morgan_fingerprint(&shuffled(&g, seed), 2));
    }

    #[test]
    fn canonical_form_is_relabeling_invariant(g in arb_connected(12), seed in any::<u64>()) {
        prop_assert_eq!(canonical_form(&g), canonical_form(&shuffled(&g, seed)));
    }

    #[test]
    fn induced_subgraph_bond_count(g in arb_connected(12), mask in any::<u16>()) {
        let keep: Vec<usize> = (0..g.num_atoms()).filter(|i| mask >> i & 1 == 1).collect();
        let expected = g.bonds().iter().filter(|b| keep.contains(&b.a) && keep.contains(&b.b)).count();
        let sub = g.induced_subgraph(&keep).unwrap();
        prop_assert_eq!(sub.graph.num_bonds(), expected);
        prop_assert_eq!(sub.mapping, keep);
    }

    #[test]
    fn smiles_round_trip(g in arb_connected(12)) {
        prop_assume!(validate_valence(&g).is_empty());
        let text = write_smiles(&g).unwrap();
        let back = parse_smiles(&text).unwrap();
        prop_assert!(are_isomorphic(&g, &back), "{}", text);
        prop_assert_eq!(canonical_form(&g), canonical_form(&back));
    }
}

#[test]
fn corpus_round_trips_and_validates() {
    for s in motifwalk::fixtures::corpus_smiles() {
        let g = parse_smiles(&s).unwrap();
        assert!(validate_valence(&g).is_empty(), "{s}");
        let back = parse_smiles(&write_smiles(&g).unwrap()).unwrap();
        assert!(are_isomorphic(&g, &back), "{s}");
    }
}
