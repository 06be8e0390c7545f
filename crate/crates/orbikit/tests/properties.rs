//! Cross-module invariants: randomized properties over small shapes plus the
//! exhaustive structural checks that stay cheap enough for every build.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use orbikit::digraph::{self, Arc, Digraph, Node};
use orbikit::formulations::{
    compact_system, extended_system, extended_vector, from_compact, to_compact, ExtendedPoint,
};
use orbikit::lifting::{lift, project, saturation_holds, Flow};
use orbikit::linsys::{Direction, LinearSystem};
use orbikit::lp_oracle::{enumerate_vertices, paths_between};
use orbikit::sci::{enumerate_scis, sci_system};
use orbikit::{
    index_set, optimize_packing, optimize_partitioning, rat, ratio, Cell, Kind, OrbiMatrix, Params,
    Rational,
};
use proptest::prelude::*;

fn pairs(max_p: u32) -> Vec<Params> {
    let mut out = Vec::new();
    for p in 1..=max_p {
        for q in 1..=p {
            out.push(Params::new(p, q).unwrap());
        }
    }
    out
}

fn params_strategy(max_p: u32) -> impl Strategy<Value = Params> {
    (1..=max_p)
        .prop_flat_map(|p| (Just(p), 1..=p))
        .prop_map(|(p, q)| Params::new(p, q).unwrap())
}

/// Integer objectives in `[-9,9]^cells`, dense values mapped row-major.
fn objective_strategy() -> impl Strategy<Value = OrbiMatrix> {
    params_strategy(5).prop_flat_map(|params| {
        proptest::collection::vec(-9i64..=9, params.cell_count()).prop_map(move |vals| {
            let entries = index_set(params)
                .into_iter()
                .zip(vals)
                .filter(|(_, v)| *v != 0)
                .map(|(c, v)| ((c.i(), c.j()), rat(v)));
            OrbiMatrix::from_entries(params, entries).unwrap()
        })
    })
}

/// Convex combinations of up to four packing vertices.
fn combo_strategy() -> impl Strategy<Value = OrbiMatrix> {
    params_strategy(5).prop_flat_map(|params| {
        let verts = enumerate_vertices(params, Kind::Packing);
        let n = verts.len();
        proptest::collection::vec((0..n, 1i64..=9), 1..=4).prop_map(move |picks| {
            let den: i64 = picks.iter().map(|(_, w)| *w).sum();
            let mut acc: BTreeMap<Cell, Rational> = BTreeMap::new();
            for (vi, w) in picks {
                for (c, val) in verts[vi].entries() {
                    *acc.entry(c).or_insert_with(Rational::zero) += ratio(w, den) * val;
                }
            }
            let entries = acc.into_iter().map(|(c, v)| ((c.i(), c.j()), v));
            OrbiMatrix::from_entries(params, entries).unwrap()
        })
    })
}

/// Nonnegative points with row sums at or below one and no column discipline.
fn subunit_strategy() -> impl Strategy<Value = OrbiMatrix> {
    params_strategy(5).prop_flat_map(|params| {
        let cells = params.cell_count();
        let rows = params.p() as usize;
        (
            proptest::collection::vec(0i64..=6, cells),
            proptest::collection::vec(0i64..=3, rows),
        )
            .prop_map(move |(vals, slack)| {
                let mut entries = Vec::new();
                let mut idx = 0usize;
                for i in 1..=params.p() {
                    let lim = params.col_limit(i) as usize;
                    let row = &vals[idx..idx + lim];
                    idx += lim;
                    let den: i64 = row.iter().sum::<i64>() + slack[i as usize - 1];
                    if den == 0 {
                        continue;
                    }
                    for (k, &v) in row.iter().enumerate() {
                        if v != 0 {
                            entries.push(((i, k as u32 + 1), ratio(v, den)));
                        }
                    }
                }
                OrbiMatrix::from_entries(params, entries).unwrap()
            })
    })
}

proptest! {
    /// The optimizer's certificate hangs together: the value is the inner
    /// product, `x` is a vertex, and `(x, y)` satisfies the flow system.
    #[test]
    fn optimizer_certificates_are_consistent(d in objective_strategy()) {
        let pack = optimize_packing(&d);
        prop_assert_eq!(&pack.value, &d.dot(&pack.x));
        prop_assert!(pack.x.is_vertex(Kind::Packing));
        prop_assert!(pack.path.is_s_t());
        let pt = ExtendedPoint::new(pack.x, pack.y).unwrap();
        prop_assert!(pt.is_feasible(Kind::Packing));

        let part = optimize_partitioning(&d);
        prop_assert_eq!(&part.value, &d.dot(&part.x));
        prop_assert!(part.x.is_vertex(Kind::Partitioning));
        for i in 1..=d.params().p() {
            prop_assert!(part.x.row_sum(i).is_one());
        }
        // Every partitioning vertex packs, so relaxing the row equalities
        // can only help.
        prop_assert!(pack.value >= part.value);
    }

    /// The integer fast path is the same optimizer.
    #[test]
    fn integer_fast_path_agrees_with_the_exact_sweep(d in objective_strategy()) {
        let params = d.params();
        let ints: Vec<i64> = index_set(params)
            .into_iter()
            .map(|c| {
                let v = d.get(c.i(), c.j());
                v.numer().try_into().unwrap()
            })
            .collect();
        let fast = orbikit::optimizer::optimize_packing_ints(params, &ints).unwrap();
        let slow = optimize_packing(&d);
        prop_assert_eq!(fast.value, slow.value);
        prop_assert_eq!(fast.x, slow.x);
    }

    /// Lifting a convex combination produces the canonical feasible witness,
    /// projects back to the start, and survives the compact round trip.
    #[test]
    fn lifted_combinations_round_trip(x in combo_strategy()) {
        let y = lift(&x).unwrap();
        prop_assert!(y.is_unit());
        prop_assert!(saturation_holds(&x, &y));
        let pt = ExtendedPoint::new(x.clone(), y).unwrap();
        prop_assert!(pt.is_feasible(Kind::Packing));
        prop_assert_eq!(project(&pt), x);
        let back = from_compact(&to_compact(&pt));
        prop_assert_eq!(back, pt);
    }

    /// Separation answers are certificates either way: a returned cut is
    /// strictly violated, and "none" means the lifted flow is feasible.
    #[test]
    fn separation_answers_are_certificates(x in subunit_strategy()) {
        match orbikit::sci::separate(&x).unwrap() {
            Some(sci) => {
                prop_assert!(sci.violation_at(&x) > Rational::zero());
                prop_assert!(!sci.holds(&x));
            }
            None => {
                let y = lift(&x).unwrap();
                let pt = ExtendedPoint::new(x, y).unwrap();
                prop_assert!(pt.is_feasible(Kind::Packing));
            }
        }
    }

    /// JSON encodings round-trip losslessly.
    #[test]
    fn json_round_trips(x in subunit_strategy()) {
        let text = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<OrbiMatrix>(&text).unwrap(), x.clone());

        let y = lift(&x).unwrap();
        let params = x.params();
        prop_assert_eq!(Flow::from_json(params, &y.to_json()).unwrap(), y);
    }
}

/// Ranks grow by exactly one along every arc, so the digraph is acyclic;
/// degrees stay positive away from the endpoints.
#[test]
fn digraph_is_acyclic_with_positive_degrees() {
    for params in pairs(12) {
        let g = Digraph::build(params);
        let rank = |n: Node| match n {
            Node::Source => 0,
            Node::Grid { i, .. } => i as i64 + 1,
            Node::Sink => params.p() as i64 + 2,
        };
        for &arc in g.arcs() {
            assert_eq!(rank(arc.head()), rank(arc.tail(params)) + 1);
        }
        for &node in g.nodes() {
            if node != Node::Sink {
                assert!(!g.out_arcs(node).is_empty(), "dead end at {node}");
            }
            if node != Node::Source {
                assert!(!g.in_arcs(node).is_empty(), "unreachable {node}");
            }
        }
    }
}

/// The entry side of a path is fully described by `S`: diagonals entering the
/// path enter exactly its non-diagonally-entered nodes.  On the exit side `T`
/// captures every vertical escape except a final vertical arc, which stays
/// inside the path's node set only by virtue of the end node being dropped.
#[test]
fn path_node_sets_track_entry_and_exit_arcs() {
    for params in pairs(5) {
        let g = Digraph::build(params);
        let mut starts: Vec<Node> = vec![Node::Source];
        starts.extend(
            g.nodes()
                .iter()
                .copied()
                .filter(|n| matches!(n, Node::Grid { .. })),
        );
        for &start in &starts {
            for cell in index_set(params) {
                for path in paths_between(params, start, Node::cell(cell)) {
                    let (s, t) = digraph::path_node_sets(params, &path);
                    let nodes: BTreeSet<Node> = path.nodes().iter().copied().collect();
                    let mut all_but_end = nodes.clone();
                    all_but_end.remove(&Node::cell(cell));

                    assert_eq!(
                        g.cut_sets(&nodes).diagonal_incoming,
                        g.cut_sets(&s).diagonal_incoming
                    );

                    let from_nodes = g.cut_sets(&all_but_end).vertical_outgoing;
                    let from_t = g.cut_sets(&t).vertical_outgoing;
                    let arcs = path.arcs(params);
                    match arcs.last() {
                        Some(last @ Arc::Vertical { .. }) => {
                            let mut expect = from_t.clone();
                            expect.insert(*last);
                            assert_eq!(from_nodes, expect, "final vertical arc discrepancy");
                        }
                        _ => assert_eq!(from_nodes, from_t),
                    }
                }
            }
        }
    }
}

/// Every vertex is 0/1, self-identifies, and satisfies both polyhedral
/// descriptions (the flow system via its lift, the cut system directly).
#[test]
fn vertices_satisfy_both_descriptions() {
    let mut shapes = pairs(4);
    shapes.push(Params::new(6, 6).unwrap());
    for params in shapes {
        for kind in [Kind::Packing, Kind::Partitioning] {
            let verts = enumerate_vertices(params, kind);
            let distinct: BTreeSet<Vec<Cell>> = verts.iter().map(|v| v.support()).collect();
            assert_eq!(distinct.len(), verts.len(), "duplicate vertices");

            let sys = sci_system(params, kind, None).unwrap();
            for v in &verts {
                assert!(v.is_zero_one());
                assert!(v.is_vertex(kind));
                let coords: Vec<Rational> = index_set(params)
                    .into_iter()
                    .map(|c| v.get(c.i(), c.j()))
                    .collect();
                assert!(sys.is_feasible(&coords), "cut system rejects a vertex");

                let y = lift(v).unwrap();
                let pt = ExtendedPoint::new(v.clone(), y).unwrap();
                assert!(pt.is_feasible(kind), "flow system rejects a vertex");
            }
        }
    }
}

/// All cut inequalities are valid for every vertex, at every shape `p <= 5`.
#[test]
fn shifted_column_inequalities_are_valid_on_vertices() {
    for params in pairs(5) {
        let scis = enumerate_scis(params, None).unwrap();
        let verts = enumerate_vertices(params, Kind::Packing);
        for sci in &scis {
            for v in &verts {
                assert!(
                    sci.holds(v),
                    "cut with bar at {} cuts off a vertex",
                    sci.bar
                );
            }
        }
    }
}

/// Both solver formats emit deterministically, and the LP reader inverts the
/// LP writer on every system the crate produces.
#[test]
fn lp_text_round_trips_every_system() {
    for params in [
        Params::new(1, 1).unwrap(),
        Params::new(3, 2).unwrap(),
        Params::new(4, 4).unwrap(),
    ] {
        for kind in [Kind::Packing, Kind::Partitioning] {
            let systems = vec![
                extended_system(params, kind),
                compact_system(params, kind),
                sci_system(params, kind, None).unwrap(),
            ];
            for mut sys in systems {
                // A system without an objective reads back as an empty
                // minimization, so pin one before demanding exact equality.
                sys.set_objective(
                    Direction::Maximize,
                    (0..sys.vars().len().min(3))
                        .map(|k| (k, rat(k as i64 + 1)))
                        .collect(),
                );
                let text = sys.to_lp_string();
                assert_eq!(sys.to_lp_string(), text, "LP emission is not stable");
                let back = LinearSystem::from_lp_str(&text).unwrap();
                assert_eq!(back, sys, "LP round trip changed the system");
                assert_eq!(sys.to_mps_string(), sys.to_mps_string());
            }
        }
    }
}

/// A lifted optimum scores the same through every representation:
/// `<d,x> = <transformed d, z>` and the extended vector satisfies the system.
#[test]
fn objective_transform_scores_match() {
    let shapes = pairs(4);
    for (k, params) in shapes.iter().enumerate() {
        let verts = enumerate_vertices(*params, Kind::Packing);
        let entries: Vec<_> = index_set(*params)
            .into_iter()
            .enumerate()
            .map(|(n, c)| ((c.i(), c.j()), rat((n as i64 % 7) - 3 + k as i64)))
            .collect();
        let d = OrbiMatrix::from_entries(*params, entries).unwrap();
        let esys = extended_system(*params, Kind::Packing);
        for v in verts.iter().take(40) {
            let y = lift(v).unwrap();
            let pt = ExtendedPoint::new(v.clone(), y).unwrap();
            assert!(esys.is_feasible(&extended_vector(&esys, &pt)));
            let c = to_compact(&pt);
            let score: Rational = orbikit::formulations::compact_objective(&d)
                .into_iter()
                .map(|(cell, coeff)| coeff * c.z(cell.i(), cell.j()))
                .sum();
            assert_eq!(score, d.dot(v), "transformed objective drifted");
        }
    }
}
