mod common;

use gbs_deform::abelian::abelianization;
use gbs_deform::canon::{canonical_form, equivalent};
use gbs_deform::deformation::{random_deformation, GeneratorBounds};
use gbs_deform::document::{parse_graph, serialize_graph};
use gbs_deform::enumerate::{enumerate_moves, Bounds};
use gbs_deform::explorer::{find_path, reduced_orbit, PathOutcome};
use gbs_deform::graph::{End, LabeledGraph};
use gbs_deform::moves::{self, Move, Slide};
use gbs_deform::whitehead::{deformation_to_moves, factor_whitehead, WhiteheadType};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_from_seed(seed: u64) -> LabeledGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6);
    let extra = rng.gen_range(0..=(8 - (n - 1)).min(3));
    common::random_graph(&mut rng, n, extra, 12)
}

fn reduced_from_seed(seed: u64) -> LabeledGraph {
    common::random_reduced(&mut ChaCha8Rng::seed_from_u64(seed), &GeneratorBounds::default())
}

/// Renames every id, swaps edge ends at random and applies random sign changes
/// at vertices and on edges.
fn scramble(g: &LabeledGraph, rng: &mut ChaCha8Rng) -> LabeledGraph {
    let vs: Vec<_> = g.vertices().cloned().collect();
    let mut names: Vec<usize> = (0..vs.len()).collect();
    names.shuffle(rng);
    let flip_vertex: Vec<bool> = vs.iter().map(|_| rng.gen_bool(0.5)).collect();
    let rename = |v: &gbs_deform::graph::VertexId, vs: &[gbs_deform::graph::VertexId]| {
        let i = vs.iter().position(|x| x == v).unwrap();
        (format!("w{}", names[i]), flip_vertex[i])
    };
    let mut out = LabeledGraph::new();
    for v in &vs {
        out.add_vertex(rename(v, &vs).0.as_str());
    }
    let mut edges: Vec<_> = g.edges().map(|(_, ends)| ends.clone()).collect();
    edges.shuffle(rng);
    for (k, [a, b]) in edges.into_iter().enumerate() {
        let s = if rng.gen_bool(0.5) { -1 } else { 1 };
        let end = |x: &End| {
            let (name, flip) = rename(&x.vertex, &vs);
            End::new(name.as_str(), if flip { -x.label * s } else { x.label * s })
        };
        let (a, b) = if rng.gen_bool(0.5) { (end(&b), end(&a)) } else { (end(&a), end(&b)) };
        out.insert_edge(format!("f{k}").as_str().into(), a, b);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn canonical_form_is_constant_on_orbits(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        let key = canonical_form(&g).unwrap();
        prop_assert_eq!(canonical_form(&key.representative()).unwrap(), key.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..8 {
            let h = scramble(&g, &mut rng);
            prop_assert_eq!(canonical_form(&h).unwrap(), key.clone());
            prop_assert_eq!(abelianization(&h).unwrap(), abelianization(&g).unwrap());
            prop_assert_eq!(h.betti().unwrap(), g.betti().unwrap());
        }
    }

    #[test]
    fn abelianization_matches_the_oracle(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        let (rank, torsion) = common::abelian_oracle(&g);
        let lib = abelianization(&g).unwrap();
        prop_assert_eq!((lib.rank, lib.torsion), (rank, torsion));
    }

    #[test]
    fn every_move_preserves_invariants_and_has_an_exact_inverse(seed in any::<u64>()) {
        let g = reduced_from_seed(seed);
        let inv = common::abelian_oracle(&g);
        let bounds = Bounds { max_label: 200, ..Bounds::default() };
        for c in enumerate_moves(&g, &bounds).unwrap().moves {
            prop_assert!(c.graph.is_valid(), "{:?}", c.mv);
            prop_assert_eq!(c.graph.betti().unwrap(), g.betti().unwrap());
            prop_assert_eq!(common::abelian_oracle(&c.graph), inv.clone());
            let back = moves::inverse(&g, &c.mv).unwrap();
            prop_assert_eq!(moves::apply(&c.graph, &back).unwrap().graph, g.clone(), "{:?}", c.mv);
        }
    }

    #[test]
    fn collapses_preserve_invariants_and_have_exact_inverses(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        let inv = common::abelian_oracle(&g);
        for end in g.collapsible_edges() {
            let mv = Move::Collapse { end };
            let h = moves::apply(&g, &mv).unwrap().graph;
            prop_assert!(h.is_valid());
            prop_assert_eq!(common::abelian_oracle(&h), inv.clone());
            let back = moves::inverse(&g, &mv).unwrap();
            prop_assert_eq!(moves::apply(&h, &back).unwrap().graph, g.clone());
        }
    }

    #[test]
    fn reduced_graphs_have_proper_non_loop_edges(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        let proper = g.edges().all(|(_, [a, b])| a.vertex == b.vertex || (a.label.abs() >= 2 && b.label.abs() >= 2));
        prop_assert_eq!(g.is_reduced(), proper);
    }

    #[test]
    fn a_moves_keep_graphs_reduced(seed in any::<u64>()) {
        let g = reduced_from_seed(seed);
        for c in enumerate_moves(&g, &Bounds::unbounded()).unwrap().moves {
            if matches!(c.mv, Move::AMove(_) | Move::AInverse(_)) {
                prop_assert!(c.graph.is_reduced(), "{:?} on {:?}", c.mv, g);
                let back = moves::inverse(&g, &c.mv).unwrap();
                prop_assert!(equivalent(&moves::apply(&c.graph, &back).unwrap().graph, &g).unwrap());
            }
        }
    }

    #[test]
    fn collective_slides_equal_single_slides_in_any_order(seed in any::<u64>()) {
        let g = reduced_from_seed(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in enumerate_moves(&g, &Bounds::unbounded()).unwrap().moves {
            let Move::Slide(s) = &c.mv else { continue };
            if s.slid.len() < 2 {
                continue;
            }
            for _ in 0..3 {
                let mut order = s.slid.clone();
                order.shuffle(&mut rng);
                let mut cur = g.clone();
                for end in order {
                    let single = Move::Slide(Slide { slid: vec![end], over: s.over.clone() });
                    cur = moves::apply(&cur, &single).unwrap().graph;
                }
                prop_assert_eq!(&cur, &c.graph);
            }
        }
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        let text = serialize_graph(&g);
        let parsed = parse_graph(&text).unwrap();
        prop_assert_eq!(&parsed, &g);
        prop_assert_eq!(serialize_graph(&parsed), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn pipelines_emit_reduced_scripts_reaching_the_endpoint(seed in any::<u64>()) {
        let bounds = GeneratorBounds::default();
        let start = reduced_from_seed(seed);
        let d = random_deformation(seed, &bounds, &start, None).unwrap();
        let p = deformation_to_moves(&d).unwrap();
        prop_assert!(p.moves.iter().all(|m| !m.is_elementary()));
        let graphs = moves::replay(d.start(), &p.moves).unwrap();
        prop_assert!(graphs.iter().all(LabeledGraph::is_reduced));
        prop_assert_eq!(canonical_form(graphs.last().unwrap()).unwrap(), canonical_form(d.end()).unwrap());
        if d.graphs().iter().all(|g| g.strict_ascending_loops().is_empty()) {
            prop_assert!(p.moves.iter().all(|m| matches!(m, Move::Slide(_))));
        }
        for wm in &p.whitehead {
            if wm.kind() != WhiteheadType::I {
                continue;
            }
            let allowed = [&wm.single.edge, &wm.set[0].edge];
            for m in factor_whitehead(wm).unwrap().moves {
                if let Move::Slide(s) = m {
                    prop_assert!(s.over.iter().all(|o| allowed.contains(&&o.edge)), "slide over {:?}", s.over);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn orbits_agree_across_jobs_and_share_invariants(seed in any::<u64>()) {
        let g = reduced_from_seed(seed);
        let bounds = Bounds { max_depth: 2, max_label: 24, max_vertices: 4, max_edges: 5, max_frontier: 2000 };
        let one = reduced_orbit(&g, &bounds, 1).unwrap();
        let four = reduced_orbit(&g, &bounds, 4).unwrap();
        prop_assert_eq!(&one.keys, &four.keys);
        let inv = common::abelian_oracle(&g);
        for k in &one.keys {
            prop_assert_eq!(common::abelian_oracle(&k.representative()), inv.clone());
        }
    }

    #[test]
    fn paths_there_and_back_return_to_the_start(seed in any::<u64>()) {
        let g1 = reduced_from_seed(seed);
        let bounds = Bounds { max_depth: 2, max_label: 24, max_vertices: 4, max_edges: 5, max_frontier: 2000 };
        let steps: Vec<_> = enumerate_moves(&g1, &bounds).unwrap().moves.into_iter().filter(|c| c.graph.is_reduced() && !c.trivial).collect();
        prop_assume!(!steps.is_empty());
        let g2 = steps[(seed % steps.len() as u64) as usize].graph.clone();
        let (PathOutcome::Found { moves: there, .. }, PathOutcome::Found { moves: back, .. }) =
            (find_path(&g1, &g2, &bounds, 1).unwrap(), find_path(&g2, &g1, &bounds, 1).unwrap())
        else {
            return Err(TestCaseError::fail("no path between neighbours"));
        };
        let mid = moves::replay(&g1, &there).unwrap().pop().unwrap();
        prop_assert!(equivalent(&mid, &g2).unwrap());
        // `back` is valid from g2; carry it over to the graph actually reached
        let (_, graphs) = gbs_deform::deformation::transport_chain(&mid, &g2, &back).unwrap();
        prop_assert!(equivalent(graphs.last().unwrap(), &g1).unwrap());
    }
}

#[test]
fn loop_abelianization_closed_form() {
    for p in -10i64..=10 {
        for q in -10i64..=10 {
            if p == 0 || q == 0 {
                continue;
            }
            let a = abelianization(&LabeledGraph::single_loop(p, q)).unwrap();
            let d = (p - q).unsigned_abs();
            let expected = if d >= 2 { (1, vec![d]) } else if d == 1 { (1, vec![]) } else { (2, vec![]) };
            assert_eq!((a.rank, a.torsion.clone()), expected, "loop ({p},{q})");
            assert_eq!(common::abelian_oracle(&LabeledGraph::single_loop(p, q)), expected);
        }
    }
}

#[test]
fn collective_slides_occur_in_the_sampled_graphs() {
    let multi = (0..300u64)
        .flat_map(|seed| enumerate_moves(&reduced_from_seed(seed), &Bounds::unbounded()).unwrap().moves)
        .filter(|c| matches!(&c.mv, Move::Slide(s) if s.slid.len() >= 2))
        .count();
    assert!(multi > 0, "no multi-end slides sampled");
}
