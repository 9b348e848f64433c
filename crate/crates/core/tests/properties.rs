mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hybrid_bc::backward::{backward_phase, BackwardOptions, Strategy as Dir};
use hybrid_bc::border_matrix::{check_invariants, compute_border_matrices};
use hybrid_bc::engine::Prepared;
use hybrid_bc::forward::{forward_phase, gather};
use hybrid_bc::oracle::brandes_source;
use hybrid_bc::{
    generators, greedy_bipartition, identify_borders, run_bc, Graph, Mode, Partition, RunConfig,
    SourceSelection, INF,
};

use common::{all_close, split, Split};

#[derive(Debug, Clone)]
struct Case {
    graph: Graph,
    partition: Partition,
    source: usize,
}

fn case() -> impl Strategy<Value = Case> {
    (any::<u64>(), 2usize..60, 0usize..3, any::<bool>(), 0usize..3).prop_map(
        |(seed, n, density, weighted, kind)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let extra = n * density / 2;
            let graph = generators::random_connected(&mut rng, n, extra, if weighted { 10 } else { 1 });
            let kind = [Split::Balanced, Split::SeventyThirty, Split::RandomBalanced][kind];
            let partition = split(&graph, kind, &mut rng);
            let source = (seed % n as u64) as usize;
            Case {
                graph,
                partition,
                source,
            }
        },
    )
}

fn prepared(c: &Case) -> Prepared {
    let cfg = RunConfig {
        sources: SourceSelection::Listed(vec![c.source]),
        partition: Some(c.partition.clone()),
        ..Default::default()
    };
    Prepared::new(&c.graph, &cfg, &[c.source]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn edge_list_round_trip(c in case()) {
        let mut buf = Vec::new();
        c.graph.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = Graph::parse_edge_list(&text, true).unwrap();
        prop_assert_eq!(&back, &c.graph);
    }

    #[test]
    fn arcs_are_symmetric(c in case()) {
        let g = &c.graph;
        for a in 0..g.num_arcs() {
            let (u, v, w) = (g.arc_src()[a], g.arc_dst()[a], g.arc_weight()[a]);
            prop_assert_ne!(u, v);
            prop_assert_eq!(g.edge_weight(v, u), Some(w));
        }
        prop_assert_eq!(g.offsets()[g.num_vertices()], 2 * g.num_edges());
    }

    #[test]
    fn borders_match_cut_edges(c in case()) {
        let bs = identify_borders(&c.graph, &c.partition);
        let mut endpoints: Vec<usize> = Vec::new();
        for e in bs.cut_edges() {
            prop_assert_ne!(c.partition.side(e.from), c.partition.side(e.to));
            endpoints.push(e.from);
            endpoints.push(e.to);
        }
        endpoints.sort_unstable();
        endpoints.dedup();
        let mut borders: Vec<usize> = bs.borders(0).iter().chain(bs.borders(1)).copied().collect();
        borders.sort_unstable();
        prop_assert_eq!(endpoints, borders);
        for side in 0..2 {
            prop_assert!(bs.borders(side).windows(2).all(|w| w[0] < w[1]));
            prop_assert!(bs.borders(side).iter().all(|&b| c.partition.side(b) == side));
        }
    }

    #[test]
    fn greedy_hits_ratio(c in case(), ratio in 0.1f64..0.9) {
        let p = greedy_bipartition(&c.graph, ratio).unwrap();
        let n = c.graph.num_vertices();
        let target = ((ratio * n as f64).round() as usize).clamp(1, n - 1);
        prop_assert_eq!(p.sizes()[0], target);
    }

    #[test]
    fn border_matrices_match_induced_oracle(c in case()) {
        let bs = identify_borders(&c.graph, &c.partition);
        let bm = compute_border_matrices(&c.graph, &c.partition, &bs);
        prop_assert!(check_invariants(&bm).is_ok(), "{:?}", check_invariants(&bm));
        for side in 0..2 {
            let (sub, ids) = c.graph.induced_subgraph(|v| c.partition.side(v) == side);
            let local = |v: usize| ids.iter().position(|&x| x == v).unwrap();
            let borders = bs.borders(side);
            for (i, &bi) in borders.iter().enumerate() {
                let o = brandes_source(&sub, local(bi));
                for (j, &bj) in borders.iter().enumerate() {
                    prop_assert_eq!(bm.dist[side].get(i, j), o.dist[local(bj)]);
                    prop_assert_eq!(bm.sigma[side].get(i, j), o.sigma[local(bj)]);
                }
            }
        }
    }

    #[test]
    fn forward_state_invariants(c in case()) {
        let prep = prepared(&c);
        let w = &prep.workers;
        let out = forward_phase(w, prep.matrices.as_ref().unwrap(), c.source).unwrap();
        let st = &out.states;
        let o = brandes_source(&c.graph, c.source);
        prop_assert_eq!(gather(w, [&st[0].dist, &st[1].dist], INF), o.dist);
        prop_assert_eq!(gather(w, [&st[0].sigma, &st[1].sigma], 0), o.sigma);

        let max_b = w[0].num_borders().max(w[1].num_borders());
        prop_assert!(out.report.iterations <= max_b);
        prop_assert_eq!(out.report.comm_events, if out.report.iterations == 0 { 0 } else { 2 * out.report.iterations + 1 });
        for pair in out.history.windows(2) {
            prop_assert!(pair[1].iter().zip(&pair[0]).all(|(a, b)| a <= b));
        }

        for side in 0..2 {
            let (wg, s) = (&w[side], &st[side]);
            let mut incoming = vec![0u128; wg.num_vertices()];
            for u in 0..wg.num_vertices() as u32 {
                for a in wg.arc_range(u) {
                    let v = wg.target(a) as usize;
                    if s.edge_sigma[a] != 0 {
                        prop_assert_eq!(s.dist[v], s.dist[u as usize] + wg.weight(a));
                        incoming[v] += s.edge_sigma[a];
                    }
                }
            }
            for (ci, cut) in wg.cuts().iter().enumerate() {
                incoming[cut.local as usize] += s.cut_sigma[ci];
            }
            for v in 0..wg.num_vertices() {
                if s.dist[v] != INF && wg.global(v as u32) != c.source {
                    prop_assert_eq!(incoming[v], s.sigma[v]);
                }
            }
        }
    }

    #[test]
    fn backward_matches_oracle(c in case(), pull0 in any::<bool>(), pull1 in any::<bool>()) {
        let prep = prepared(&c);
        let w = &prep.workers;
        let mut out = forward_phase(w, prep.matrices.as_ref().unwrap(), c.source).unwrap();
        let pick = |pull| if pull { Dir::VertexPull } else { Dir::EdgePush };
        let opts = BackwardOptions { strategies: [pick(pull0), pick(pull1)], ..Default::default() };
        let b = backward_phase(w, &mut out.states, &out.frontier, c.source, &opts).unwrap();
        let o = brandes_source(&c.graph, c.source);
        prop_assert!(b.delta.iter().all(|&d| d >= 0.0));
        prop_assert!(all_close(&b.delta, &o.delta, 1e-9));
        let dag_cut: usize = out.states.iter().map(|s| s.cut_sigma.iter().filter(|&&x| x != 0).count()).sum();
        prop_assert!(b.report.sync_events <= dag_cut);
        prop_assert_eq!(b.report.comm_bytes % hybrid_bc::backward::HANDOFF_ENTRY_BYTES, 0);
    }

    #[test]
    fn modes_agree_and_runs_are_deterministic(c in case()) {
        let cfg = |mode| RunConfig {
            sources: SourceSelection::Random { count: 4, seed: 11 },
            partition: Some(c.partition.clone()),
            mode,
            threads_per_worker: Some(1),
            ..Default::default()
        };
        let h1 = run_bc(&c.graph, &cfg(Mode::Hybir)).unwrap();
        let h2 = run_bc(&c.graph, &cfg(Mode::Hybir)).unwrap();
        let b = run_bc(&c.graph, &cfg(Mode::Bsp)).unwrap();
        prop_assert_eq!(&h1.ledger, &h2.ledger);
        prop_assert_eq!(&h1.bc, &h2.bc);
        prop_assert!(all_close(&h1.bc, &b.bc, 1e-9));
        prop_assert!(h1.bc.iter().all(|&x| x >= 0.0));
    }
}
