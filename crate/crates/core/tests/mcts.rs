mod common;

use proptest::prelude::*;
use qct_core::arch::{builtin_q20, ArchGraph};
use qct_core::circuit::{Circuit, Gate};
use qct_core::mcts::{
    impact_factor, inserted_swaps, sample_swap, scale, swap_distribution, transform, MctsError,
    MctsParams, Objective, SearchTree,
};
use qct_core::state::{Action, QubitMapping, RoutingContext};
use qct_core::verify::{check_connectivity, check_equivalence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn example_circuit() -> Circuit {
    Circuit::from_gates(
        5,
        [
            Gate::cnot(0, 2),
            Gate::cnot(3, 4),
            Gate::cnot(0, 1),
            Gate::cnot(1, 2),
            Gate::cnot(2, 3),
        ],
    )
    .unwrap()
}

fn q20_context(c: &Circuit) -> RoutingContext {
    RoutingContext::new(
        c,
        builtin_q20(),
        QubitMapping::naive(c.qubit_count(), 20).unwrap(),
    )
    .unwrap()
}

fn distant_cnot() -> RoutingContext {
    let c = Circuit::from_gates(3, [Gate::cnot(0, 2)]).unwrap();
    RoutingContext::new(
        &c,
        common::path_graph(3),
        QubitMapping::naive(3, 3).unwrap(),
    )
    .unwrap()
}

/// Path 0-1-2 with an extra vertex 3 adjacent to both 0 and 1.
fn kite() -> RoutingContext {
    let g = ArchGraph::from_edge_list(4, &[(0, 1), (1, 2), (0, 3), (1, 3)]).unwrap();
    let c = Circuit::from_gates(3, [Gate::cnot(0, 2)]).unwrap();
    RoutingContext::new(&c, g, QubitMapping::naive(3, 4).unwrap()).unwrap()
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(7)
}

#[test]
fn scaling_function() {
    assert_eq!(scale(-2), 0.0);
    assert_eq!(scale(0), 0.001);
    assert_eq!(scale(3), 3.0);
}

#[test]
fn impact_factors() {
    let ctx = kite();
    let (s, _) = ctx.initial_state();
    assert_eq!(impact_factor(&ctx, &s, (0, 1), 30), 1.0);
    assert_eq!(impact_factor(&ctx, &s, (0, 3), 30), 0.001);
    let line = RoutingContext::new(
        &Circuit::from_gates(3, [Gate::cnot(0, 2)]).unwrap(),
        common::path_graph(4),
        QubitMapping::naive(3, 4).unwrap(),
    )
    .unwrap();
    let (s, _) = line.initial_state();
    assert_eq!(impact_factor(&line, &s, (2, 3), 30), 0.0);
}

#[test]
fn sampling_frequencies() {
    let ctx = kite();
    let (s, _) = ctx.initial_state();
    let dist = swap_distribution(&ctx, &s, 30);
    let edges: Vec<(u32, u32)> = dist.iter().map(|d| d.0).collect();
    assert_eq!(edges, vec![(0, 1), (0, 3), (1, 2)]);
    assert!((dist[1].1 - 0.001 / 2.001).abs() < 1e-12);

    let mut rng = rng();
    let draws = 100_000;
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        let e = sample_swap(&ctx, &s, 30, &mut rng).unwrap();
        counts[edges.iter().position(|&x| x == e).unwrap()] += 1;
    }
    for (count, (_, p)) in counts.iter().zip(&dist) {
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((*count as f64 - draws as f64 * p).abs() <= 3.0 * sigma + 1.0);
    }

    let single = RoutingContext::new(
        &Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap(),
        common::path_graph(3),
        QubitMapping::new(vec![0, 2], 3).unwrap(),
    )
    .unwrap();
    let (s, _) = single.initial_state();
    let dist = swap_distribution(&single, &s, 30);
    assert_eq!(
        dist.iter().map(|d| d.0).collect::<Vec<_>>(),
        vec![(0, 1), (1, 2)]
    );
    assert!(dist.iter().all(|d| (d.1 - 0.5).abs() < 1e-12));
}

#[test]
fn select_on_a_leaf_root() {
    let ctx = distant_cnot();
    let (s, _) = ctx.initial_state();
    let mut tree = SearchTree::new(&ctx, s, MctsParams::default());
    assert_eq!(tree.select(), (SearchTree::ROOT, 0));
    assert_eq!(tree.node(SearchTree::ROOT).visit, 1);
}

#[test]
fn select_prefers_less_visited_child_on_equal_value() {
    let ctx = distant_cnot();
    let (s, _) = ctx.initial_state();
    let mut tree = SearchTree::new(&ctx, s, MctsParams::default());
    tree.expand(SearchTree::ROOT);
    let kids = tree.node(SearchTree::ROOT).children().to_vec();
    assert_eq!(kids.len(), 2);
    tree.node_mut(SearchTree::ROOT).visit = 6;
    for (&k, visits) in kids.iter().zip([5, 1]) {
        tree.node_mut(k).val = 3.0;
        tree.node_mut(k).visit = visits;
    }
    assert_eq!(tree.select(), (kids[1], 1));
    assert_eq!(tree.node(kids[1]).visit, 2);
    assert_eq!(tree.node(SearchTree::ROOT).visit, 7);
}

#[test]
fn unvisited_children_come_first_in_index_order() {
    let ctx = q20_context(&example_circuit());
    let (s, _) = ctx.initial_state();
    let mut tree = SearchTree::new(&ctx, s, MctsParams::default());
    tree.expand(SearchTree::ROOT);
    let kids = tree.node(SearchTree::ROOT).children().to_vec();
    tree.node_mut(kids[0]).visit = 1;
    tree.node_mut(kids[0]).val = 1000.0;
    tree.node_mut(SearchTree::ROOT).visit = 1;
    assert_eq!(tree.select().0, kids[1]);
}

#[test]
fn expansion_of_the_example_state() {
    let ctx = q20_context(&example_circuit());
    let (s, _) = ctx.initial_state();
    let params = MctsParams {
        d_remote: 2,
        ..MctsParams::default()
    };
    let mut tree = SearchTree::new(&ctx, s.clone(), params);
    tree.expand(SearchTree::ROOT);
    let kids = tree.node(SearchTree::ROOT).children().to_vec();
    assert_eq!(
        kids.len(),
        ctx.pertinent_swaps(&s).len() + ctx.bridge_candidates(&s, 2).len()
    );
    let swap01 = kids
        .iter()
        .find(|&&k| tree.node(k).step().action == Some(Action::swap(0, 1)))
        .unwrap();
    assert_eq!(tree.node(*swap01).rew(), 2.0);
    for &k in &kids {
        assert_eq!(tree.node(k).visit, 0);
        assert_eq!(tree.node(k).val, 0.0);
    }
}

#[test]
fn simulation_values() {
    let params = MctsParams::default();
    let goal = RoutingContext::new(
        &Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap(),
        common::path_graph(2),
        QubitMapping::naive(2, 2).unwrap(),
    )
    .unwrap();
    let (s, _) = goal.initial_state();
    let mut tree = SearchTree::new(&goal, s, params.clone());
    tree.simulate(SearchTree::ROOT, &mut rng());
    assert_eq!(tree.node(SearchTree::ROOT).val, 30.0);

    let ctx = distant_cnot();
    let (s, _) = ctx.initial_state();
    let mut tree = SearchTree::new(&ctx, s, params);
    tree.simulate(SearchTree::ROOT, &mut rng());
    assert!((tree.node(SearchTree::ROOT).val - 0.7f64.sqrt() * 30.0).abs() < 1e-12);
}

#[test]
fn backpropagation_discounts() {
    let ctx = q20_context(&example_circuit());
    let (s, _) = ctx.initial_state();
    let mut tree = SearchTree::new(&ctx, s.clone(), MctsParams::default());
    tree.backpropagate(SearchTree::ROOT);
    assert_eq!(tree.node(SearchTree::ROOT).val, 0.0);
    tree.expand(SearchTree::ROOT);
    let a = *tree
        .node(SearchTree::ROOT)
        .children()
        .iter()
        .find(|&&k| tree.node(k).rew() == 2.0)
        .unwrap();
    tree.node_mut(a).val = 10.0;
    tree.backpropagate(a);
    assert!((tree.node(SearchTree::ROOT).val - 8.4).abs() < 1e-12);

    let depth = MctsParams {
        objective: Objective::Depth,
        ..MctsParams::default()
    };
    // A deep prefix on q3, q4 leaves idle slots on the other wires.
    let mut gates = vec![Gate::cnot(3, 4); 6];
    gates.extend(example_circuit().gates().iter().cloned());
    let deep = q20_context(&Circuit::from_gates(5, gates).unwrap());
    let (s, _) = deep.initial_state();
    let mut tree = SearchTree::new(&deep, s, depth);
    tree.expand(SearchTree::ROOT);
    let free = *tree
        .node(SearchTree::ROOT)
        .children()
        .iter()
        .find(|&&k| tree.node(k).step().depth_overhead == 0)
        .expect("some swap fits in idle slots");
    tree.node_mut(free).val = 5.0;
    tree.backpropagate(free);
    assert_eq!(tree.node(SearchTree::ROOT).val, tree.node(free).rew() + 5.0);
}

#[test]
fn decide_rules() {
    let ctx = distant_cnot();
    let (s, _) = ctx.initial_state();
    let mut tree = SearchTree::new(&ctx, s.clone(), MctsParams::default());
    tree.expand(SearchTree::ROOT);
    let kids = tree.node(SearchTree::ROOT).children().to_vec();
    tree.node_mut(kids[0]).val = 4.0;
    tree.node_mut(kids[1]).val = 3.9;
    assert_eq!(tree.best_child(), Some(kids[0]));
    tree.node_mut(kids[1]).val = 4.0;
    assert_eq!(tree.best_child(), Some(kids[0]));
    tree.node_mut(kids[1]).visit = 3;
    assert_eq!(tree.best_child(), Some(kids[1]));

    let (state, step) = tree.decide().unwrap();
    assert_eq!(step.action, Some(Action::swap(1, 2)));
    assert!(state.is_goal());
    assert_eq!(tree.len(), 1);
    assert_eq!(tree.node(SearchTree::ROOT).parent(), None);
    assert_eq!(tree.node(SearchTree::ROOT).visit, 3);

    let single = RoutingContext::new(
        &Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap(),
        common::path_graph(3),
        QubitMapping::new(vec![0, 2], 3).unwrap(),
    )
    .unwrap();
    let mut tree = SearchTree::new(&single, single.initial_state().0, MctsParams::default());
    assert!(tree.decide().is_none());
}

#[test]
fn decide_keeps_the_chosen_subtree() {
    let ctx = q20_context(&example_circuit());
    let (s, _) = ctx.initial_state();
    let mut tree = SearchTree::new(&ctx, s, MctsParams::default());
    let mut r = rng();
    for _ in 0..40 {
        tree.playout(&mut r);
    }
    let chosen = tree.best_child().unwrap();
    let expect_val = tree.node(chosen).val;
    let expect_visit = tree.node(chosen).visit;
    let grandchildren = tree.node(chosen).children().len();
    tree.decide();
    let root = tree.node(SearchTree::ROOT);
    assert_eq!((root.val, root.visit), (expect_val, expect_visit));
    assert_eq!(root.children().len(), grandchildren);
    for &c in root.children() {
        assert_eq!(tree.node(c).parent(), Some(SearchTree::ROOT));
    }
}

fn quick_params(seed: u64) -> MctsParams {
    MctsParams {
        n_sim: 40,
        seed,
        ..MctsParams::default()
    }
}

/// Replays the selection rule from the node data.
fn expected_path(tree: &SearchTree) -> Vec<usize> {
    let c = tree.params().c;
    let mut id = SearchTree::ROOT;
    let mut path = vec![id];
    while !tree.node(id).is_leaf() {
        let parent_visits = tree.node(id).visit as f64 + 1.0;
        let mut best = None;
        let mut best_score = f64::NEG_INFINITY;
        for &k in tree.node(id).children() {
            let n = tree.node(k);
            let score = if n.visit == 0 {
                f64::INFINITY
            } else {
                n.rew() + n.val + c * (parent_visits.ln() / n.visit as f64).sqrt()
            };
            if best.is_none() || score > best_score {
                best = Some(k);
                best_score = score;
            }
        }
        id = best.unwrap();
        path.push(id);
    }
    path
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sampling_distribution_is_normalised(
        g in common::connected_graph(10),
        seed in any::<u64>(),
        c in common::cnot_circuit(6, 20),
    ) {
        prop_assume!(g.vertex_count() >= 6);
        let ctx = RoutingContext::new(&c, g.clone(), QubitMapping::naive(6, g.vertex_count()).unwrap()).unwrap();
        let (s, _) = ctx.initial_state();
        let dist = swap_distribution(&ctx, &s, 1 + (seed % 30) as usize);
        if s.is_goal() {
            prop_assert!(dist.is_empty());
        } else {
            prop_assert!(!dist.is_empty());
            prop_assert!(dist.iter().all(|d| d.1 >= 0.0));
            let total: f64 = dist.iter().map(|d| d.1).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn values_never_decrease_during_a_round(
        c in common::cnot_circuit(5, 14),
        seed in any::<u64>(),
        depth in any::<bool>(),
    ) {
        let ctx = RoutingContext::new(&c, common::path_graph(5), QubitMapping::naive(5, 5).unwrap()).unwrap();
        let (s, _) = ctx.initial_state();
        let params = MctsParams {
            n_sim: 4,
            g_sim: 8,
            objective: if depth { Objective::Depth } else { Objective::Size },
            ..MctsParams::default()
        };
        let mut tree = SearchTree::new(&ctx, s, params);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..6 {
            let before: Vec<f64> = (0..tree.len()).map(|i| tree.node(i).val).collect();
            let path = expected_path(&tree);
            let (leaf, d) = tree.select();
            prop_assert_eq!(leaf, *path.last().unwrap());
            prop_assert_eq!(d + 1, path.len());
            if !tree.node(leaf).state().is_goal() {
                tree.expand(leaf);
            }
            tree.simulate(leaf, &mut r);
            tree.backpropagate(leaf);
            for (i, v) in before.iter().enumerate() {
                prop_assert!(tree.node(i).val >= *v);
            }
        }
    }
}

#[test]
fn transform_examples() {
    let ag = builtin_q20();
    let easy = Circuit::from_gates(3, [Gate::cnot(0, 1), Gate::cnot(1, 2)]).unwrap();
    let naive3 = QubitMapping::naive(3, 20).unwrap();
    let r = transform(&easy, &ag, &naive3, &MctsParams::default()).unwrap();
    assert_eq!((r.added_cnots, r.decisions), (0, 0));
    assert!(r.selection_depths.is_empty());

    let c = example_circuit();
    let naive5 = QubitMapping::naive(5, 20).unwrap();
    let best = (0..5)
        .map(|t| {
            transform(
                &c,
                &ag,
                &naive5,
                &MctsParams {
                    seed: t,
                    ..MctsParams::default()
                },
            )
            .unwrap()
        })
        .map(|r| r.added_cnots)
        .min()
        .unwrap();
    assert!(best <= 9, "best of five added {best} CNOTs");

    let ctx = distant_cnot();
    let r = transform(
        ctx.logical(),
        ctx.arch(),
        ctx.initial_mapping(),
        &MctsParams::default(),
    )
    .unwrap();
    assert_eq!(inserted_swaps(&r.physical), 1);
    assert_eq!(r.added_cnots, 3);
    assert!(check_equivalence(ctx.logical(), &r, ctx.initial_mapping(), ctx.arch()).unwrap());
}

#[test]
fn transform_is_reproducible() {
    let ag = builtin_q20();
    let c = Circuit::from_gates(
        8,
        (0..40u32)
            .map(|i| Gate::cnot(i * 3 % 8, (i * 5 + 1) % 8))
            .filter(|g| {
                let q: Vec<u32> = g.qubits().collect();
                q[0] != q[1]
            }),
    )
    .unwrap();
    let m = QubitMapping::naive(8, 20).unwrap();
    let mut a = transform(&c, &ag, &m, &quick_params(3)).unwrap();
    let mut b = transform(&c, &ag, &m, &quick_params(3)).unwrap();
    a.wall_time = 0.0;
    b.wall_time = 0.0;
    assert_eq!(a, b);
    for s in &a.selection_depths {
        assert!(s.min as f64 <= s.mean && s.mean <= s.max as f64);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let c = example_circuit();
    let m = QubitMapping::naive(5, 20).unwrap();
    for bad in [
        MctsParams {
            n_bp: 0,
            ..MctsParams::default()
        },
        MctsParams {
            gamma: 1.0,
            ..MctsParams::default()
        },
        MctsParams {
            c: -1.0,
            ..MctsParams::default()
        },
        MctsParams {
            d_remote: 3,
            ..MctsParams::default()
        },
    ] {
        assert!(matches!(
            transform(&c, &builtin_q20(), &m, &bad),
            Err(MctsError::InvalidParams(_))
        ));
    }
    let short = QubitMapping::naive(4, 20).unwrap();
    assert!(matches!(
        transform(&c, &builtin_q20(), &short, &MctsParams::default()),
        Err(MctsError::State(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn routed_circuits_verify(
        g in common::connected_graph(8),
        c in common::mixed_circuit(5, 30),
        seed in any::<u64>(),
        depth in any::<bool>(),
        bridges in any::<bool>(),
    ) {
        prop_assume!(g.vertex_count() >= 5);
        let m = QubitMapping::naive(5, g.vertex_count()).unwrap();
        let params = MctsParams {
            n_bp: 4,
            n_sim: 10,
            seed,
            objective: if depth { Objective::Depth } else { Objective::Size },
            d_remote: if bridges { 2 } else { 0 },
            ..MctsParams::default()
        };
        let r = transform(&c, &g, &m, &params).unwrap();
        prop_assert!(check_connectivity(&r.physical, &g));
        prop_assert!(check_equivalence(&c, &r, &m, &g).unwrap());
        if !depth {
            prop_assert_eq!(r.added_cnots % 3, 0);
        }
    }
}
