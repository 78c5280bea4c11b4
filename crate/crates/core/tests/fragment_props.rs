use motifwalk::fixtures::{block_corpus, chain_corpus, toy_annotations};
use motifwalk::fragment::heuristic_fragment;
use motifwalk::molgraph::{Atom, BondOrder, Element, MolecularGraph};
use motifwalk::pipeline::build;
use motifwalk::walks::{parse_walk, parse_walk_syntax, print_walk};
use proptest::prelude::*;

mod common;
use common::brute_force_cuts;

#[test]
fn heuristic_cuts_match_brute_force_on_random_molecules() {
    let mols: Vec<MolecularGraph> = block_corpus(150, 7, 21).into_iter().chain(chain_corpus(50, 22)).collect();
    assert_eq!(mols.len(), 200);
    let mut total = 0;
    for (k, m) in mols.iter().enumerate() {
        let expected = brute_force_cuts(m);
        total += expected.len();
        assert_eq!(heuristic_fragment(m), expected, "molecule {k}");
    }
    assert!(total > 200, "corpus exercises the cut rules: {total}");
}

/// Random graphs with rings, chains and mixed bond orders.
fn arb_graph() -> impl Strategy<Value = MolecularGraph> {
    (3usize..16)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<usize>(), n - 1),
                proptest::collection::vec((0..n, 0..n, 0u8..4), 0..5),
                proptest::collection::vec(0u8..3, n - 1),
            )
        })
        .prop_map(|(parents, extra, orders)| {
            let mut g = MolecularGraph::new();
            g.add_atom(Atom::new(Element::C));
            let order =
                |o: u8| [BondOrder::Single, BondOrder::Single, BondOrder::Double, BondOrder::Triple][o as usize];
            for (k, p) in parents.iter().enumerate() {
                let child = g.add_atom(Atom::new(Element::C));
                let _ = g.add_bond(p % (k + 1), child, order(orders[k]));
            }
            for (a, b, o) in extra {
                let _ = g.add_bond(a, b, order(o));
            }
            g
        })
}

proptest! {
    #[test]
    fn heuristic_cuts_match_brute_force_on_arbitrary_graphs(m in arb_graph()) {
        prop_assert_eq!(heuristic_fragment(&m), brute_force_cuts(&m));
    }

    #[test]
    fn walk_syntax_never_panics(s in "[A-Za-z0-9:\\[\\]\\->_ ]{0,40}") {
        let _ = parse_walk_syntax(&s);
    }

    #[test]
    fn walk_parsing_never_panics_and_round_trips(s in "(G[0-9]{1,2}(:[0-9])?(->|\\[->|\\]){0,2}){0,6}") {
        let segs: Vec<_> = toy_annotations().iter().map(|a| a.resolve().unwrap()).collect();
        let g = build(&segs).graph;
        if let Ok(dag) = parse_walk(&g, &s) {
            let printed = print_walk(&g, &dag);
            let again = parse_walk(&g, &printed).unwrap();
            prop_assert_eq!(print_walk(&g, &again), printed);
        }
    }
}
