//! The layered acyclic digraph `D(p,q)` whose s-t flows drive everything
//! else in the crate.
//!
//! Nodes are the cells of `I(p,q)`, one column-0 node `(i,0)` per level
//! `i = 0..p`, plus a source `s` and a sink `t`.  Arcs either stay in their
//! column (*vertical*, `(i,j) -> (i+1,j)`) or move one column right
//! (*diagonal*, `(i,j) -> (i+1,j+1)`); `s` feeds `(0,0)` and every bottom
//! node `(p,j)` drains into `t`.  Every s-t path therefore visits exactly one
//! node per level, and enters each column at most once.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::Error;
use crate::matrix::{Cell, Params};

/// A node of `D(p,q)`.  `Grid { i, j }` covers both cells (`j >= 1`) and the
/// column-0 chain (`j = 0`); the derived order is `s`, grid row-major, `t`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Node {
    Source,
    Grid { i: u32, j: u32 },
    Sink,
}

impl Node {
    pub fn grid(i: u32, j: u32) -> Self {
        Node::Grid { i, j }
    }

    pub fn cell(c: Cell) -> Self {
        Node::Grid { i: c.i(), j: c.j() }
    }

    /// The cell this node stands for, if `j >= 1`.
    pub fn as_cell(&self) -> Option<Cell> {
        match *self {
            Node::Grid { i, j } if j >= 1 => Some(Cell::new(i, j)),
            _ => None,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Source => f.write_str("s"),
            Node::Grid { i, j } => write!(f, "{i},{j}"),
            Node::Sink => f.write_str("t"),
        }
    }
}

/// An arc of `D(p,q)`.  The derived order — source, verticals row-major,
/// diagonals row-major, sink arcs by column — is the canonical arc order used
/// everywhere (flows, LP columns, serialization).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Arc {
    /// `s -> (0,0)`.
    Source,
    /// `(i,j) -> (i+1,j)` for `0 <= i < p`, `0 <= j <= q(i)`.
    Vertical { i: u32, j: u32 },
    /// `(i,j) -> (i+1,j+1)` for `0 <= i < p`, `0 <= j <= q(i+1)-1`.
    Diagonal { i: u32, j: u32 },
    /// `(p,j) -> t` for `0 <= j <= q`.
    Sink { j: u32 },
}

impl Arc {
    pub fn tail(&self, params: Params) -> Node {
        match *self {
            Arc::Source => Node::Source,
            Arc::Vertical { i, j } | Arc::Diagonal { i, j } => Node::grid(i, j),
            Arc::Sink { j } => Node::grid(params.p(), j),
        }
    }

    pub fn head(&self) -> Node {
        match *self {
            Arc::Source => Node::grid(0, 0),
            Arc::Vertical { i, j } => Node::grid(i + 1, j),
            Arc::Diagonal { i, j } => Node::grid(i + 1, j + 1),
            Arc::Sink { .. } => Node::Sink,
        }
    }

    pub fn is_vertical(&self) -> bool {
        matches!(self, Arc::Vertical { .. })
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Arc::Diagonal { .. })
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arc::Source => f.write_str("s"),
            Arc::Vertical { i, j } => write!(f, "v({i},{j})"),
            Arc::Diagonal { i, j } => write!(f, "d({i},{j})"),
            Arc::Sink { j } => write!(f, "t({j})"),
        }
    }
}

pub fn node_exists(params: Params, node: Node) -> bool {
    match node {
        Node::Source | Node::Sink => true,
        Node::Grid { i, j } => i <= params.p() && j <= params.col_limit(i),
    }
}

pub fn arc_exists(params: Params, arc: Arc) -> bool {
    match arc {
        Arc::Source => true,
        Arc::Vertical { i, j } => i < params.p() && j <= params.col_limit(i),
        Arc::Diagonal { i, j } => i < params.p() && j < params.col_limit(i + 1),
        Arc::Sink { j } => j <= params.q(),
    }
}

/// Arcs leaving `node`, in canonical order.
pub fn out_arcs(params: Params, node: Node) -> Vec<Arc> {
    let mut arcs = Vec::new();
    match node {
        Node::Source => arcs.push(Arc::Source),
        Node::Grid { i, j } if i == params.p() => arcs.push(Arc::Sink { j }),
        Node::Grid { i, j } => {
            arcs.push(Arc::Vertical { i, j });
            if arc_exists(params, Arc::Diagonal { i, j }) {
                arcs.push(Arc::Diagonal { i, j });
            }
        }
        Node::Sink => {}
    }
    debug_assert!(arcs.iter().all(|a| arc_exists(params, *a)));
    arcs
}

/// Arcs entering `node`, in canonical order.
pub fn in_arcs(params: Params, node: Node) -> Vec<Arc> {
    let mut arcs = Vec::new();
    match node {
        Node::Source => {}
        Node::Sink => {
            for j in 0..=params.q() {
                arcs.push(Arc::Sink { j });
            }
        }
        Node::Grid { i: 0, .. } => arcs.push(Arc::Source),
        Node::Grid { i, j } => {
            let v = Arc::Vertical { i: i - 1, j };
            if arc_exists(params, v) {
                arcs.push(v);
            }
            if j >= 1 {
                let d = Arc::Diagonal { i: i - 1, j: j - 1 };
                if arc_exists(params, d) {
                    arcs.push(d);
                }
            }
        }
    }
    arcs
}

/// The arc from `u` to `v`, if `D(p,q)` has one.
pub fn arc_between(params: Params, u: Node, v: Node) -> Option<Arc> {
    let arc = match (u, v) {
        (Node::Source, Node::Grid { i: 0, j: 0 }) => Arc::Source,
        (Node::Grid { i, j }, Node::Sink) if i == params.p() => Arc::Sink { j },
        (Node::Grid { i, j }, Node::Grid { i: i2, j: j2 }) if i2 == i + 1 && j2 == j => {
            Arc::Vertical { i, j }
        }
        (Node::Grid { i, j }, Node::Grid { i: i2, j: j2 }) if i2 == i + 1 && j2 == j + 1 => {
            Arc::Diagonal { i, j }
        }
        _ => return None,
    };
    (node_exists(params, u) && node_exists(params, v) && arc_exists(params, arc)).then_some(arc)
}

/// The bar of `(i,j)`: the row segment `{(i,l) : j <= l <= q(i)}`.
pub fn bar(params: Params, cell: Cell) -> Vec<Cell> {
    assert!(params.contains(cell), "cell {cell} outside index set");
    (cell.j()..=params.col_limit(cell.i()))
        .map(|l| Cell::new(cell.i(), l))
        .collect()
}

/// The column segment of `(i,j)`: `{(k,j) : j <= k <= i}`.
pub fn column_segment(params: Params, cell: Cell) -> Vec<Cell> {
    assert!(params.contains(cell), "cell {cell} outside index set");
    (cell.j()..=cell.i())
        .map(|k| Cell::new(k, cell.j()))
        .collect()
}

/// Materialized node and arc lists of `D(p,q)`, for desk-scale enumeration.
/// (The optimizer never builds one; it sweeps levels arithmetically.)
#[derive(Clone, Debug)]
pub struct Digraph {
    params: Params,
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
}

impl Digraph {
    pub fn build(params: Params) -> Self {
        let mut nodes = vec![Node::Source];
        for i in 0..=params.p() {
            for j in 0..=params.col_limit(i) {
                nodes.push(Node::grid(i, j));
            }
        }
        nodes.push(Node::Sink);

        let mut arcs = vec![Arc::Source];
        for i in 0..params.p() {
            for j in 0..=params.col_limit(i) {
                arcs.push(Arc::Vertical { i, j });
            }
        }
        for i in 0..params.p() {
            for j in 0..params.col_limit(i + 1) {
                arcs.push(Arc::Diagonal { i, j });
            }
        }
        for j in 0..=params.q() {
            arcs.push(Arc::Sink { j });
        }

        debug_assert!(arcs.iter().all(|a| arc_exists(params, *a)));
        Digraph {
            params,
            nodes,
            arcs,
        }
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// All arcs in canonical order.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn out_arcs(&self, node: Node) -> Vec<Arc> {
        out_arcs(self.params, node)
    }

    pub fn in_arcs(&self, node: Node) -> Vec<Arc> {
        in_arcs(self.params, node)
    }

    /// The five cut sets of a node set `w`.
    pub fn cut_sets(&self, w: &BTreeSet<Node>) -> CutSets {
        let mut cuts = CutSets::default();
        for &arc in &self.arcs {
            let tail_in = w.contains(&arc.tail(self.params));
            let head_in = w.contains(&arc.head());
            if tail_in && !head_in {
                cuts.outgoing.insert(arc);
                if arc.is_vertical() {
                    cuts.vertical_outgoing.insert(arc);
                }
            }
            if head_in && !tail_in {
                cuts.incoming.insert(arc);
                if arc.is_vertical() {
                    cuts.vertical_incoming.insert(arc);
                }
                if arc.is_diagonal() {
                    cuts.diagonal_incoming.insert(arc);
                }
            }
        }
        cuts
    }

    /// GraphViz rendering with node labels `s`, `t`, `i,j`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph D {\n  rankdir=TB;\n");
        for arc in &self.arcs {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\";\n",
                arc.tail(self.params),
                arc.head()
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// The cuts `out`, `vert-out`, `in`, `vert-in` and `diag-in` of a node set.
/// Vertical variants never contain source or sink arcs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CutSets {
    pub outgoing: BTreeSet<Arc>,
    pub vertical_outgoing: BTreeSet<Arc>,
    pub incoming: BTreeSet<Arc>,
    pub vertical_incoming: BTreeSet<Arc>,
    pub diagonal_incoming: BTreeSet<Arc>,
}

/// A directed path: consecutive nodes joined by arcs of `D(p,q)`.
/// A single node is allowed (the trivial path).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct DirectedPath {
    nodes: Vec<Node>,
}

impl DirectedPath {
    pub fn new(params: Params, nodes: Vec<Node>) -> Result<Self, Error> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("empty path".into()));
        }
        for n in &nodes {
            if !node_exists(params, *n) {
                return Err(Error::InvalidInput(format!("unknown node {n}")));
            }
        }
        for w in nodes.windows(2) {
            if arc_between(params, w[0], w[1]).is_none() {
                return Err(Error::InvalidInput(format!(
                    "no arc from {} to {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(DirectedPath { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn start(&self) -> Node {
        self.nodes[0]
    }

    pub fn end(&self) -> Node {
        *self.nodes.last().unwrap()
    }

    pub fn arcs(&self, params: Params) -> Vec<Arc> {
        self.nodes
            .windows(2)
            .map(|w| arc_between(params, w[0], w[1]).expect("validated on construction"))
            .collect()
    }

    pub fn is_s_t(&self) -> bool {
        self.start() == Node::Source && self.end() == Node::Sink
    }
}

impl fmt::Display for DirectedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for n in &self.nodes {
            if !first {
                f.write_str(" -> ")?;
            }
            write!(f, "{n}")?;
            first = false;
        }
        Ok(())
    }
}

/// Splits the nodes of a path into `S` — the start node plus every node the
/// path enters by a non-diagonal arc — and `T` — every node the path leaves
/// by a diagonal arc.  `S` always contains the start node and `T` never
/// contains the end node.
pub fn path_node_sets(params: Params, path: &DirectedPath) -> (BTreeSet<Node>, BTreeSet<Node>) {
    let mut s: BTreeSet<Node> = BTreeSet::new();
    let mut t: BTreeSet<Node> = BTreeSet::new();
    s.insert(path.start());
    for arc in path.arcs(params) {
        if arc.is_diagonal() {
            t.insert(arc.tail(params));
        } else {
            s.insert(arc.head());
        }
    }
    (s, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: u32, q: u32) -> Params {
        Params::new(p, q).unwrap()
    }

    #[test]
    fn counts_for_8_6() {
        let d = Digraph::build(params(8, 6));
        assert_eq!(d.nodes().len(), 44); // 33 cells + 9 column-0 nodes + s + t
        assert_eq!(d.arcs().len(), 76);
        let vertical = d.arcs().iter().filter(|a| a.is_vertical()).count();
        let diagonal = d.arcs().iter().filter(|a| a.is_diagonal()).count();
        let sink = d
            .arcs()
            .iter()
            .filter(|a| matches!(a, Arc::Sink { .. }))
            .count();
        assert_eq!((vertical, diagonal, sink), (35, 33, 7));
        // One diagonal arc per cell.
        assert_eq!(diagonal, params(8, 6).cell_count());
    }

    #[test]
    fn structure_of_1_1() {
        let d = Digraph::build(params(1, 1));
        assert_eq!(
            d.nodes(),
            [
                Node::Source,
                Node::grid(0, 0),
                Node::grid(1, 0),
                Node::grid(1, 1),
                Node::Sink
            ]
        );
        assert_eq!(
            d.arcs(),
            [
                Arc::Source,
                Arc::Vertical { i: 0, j: 0 },
                Arc::Diagonal { i: 0, j: 0 },
                Arc::Sink { j: 0 },
                Arc::Sink { j: 1 },
            ]
        );
    }

    #[test]
    fn arcs_are_in_canonical_order() {
        for (p, q) in [(1, 1), (3, 2), (8, 6), (5, 5)] {
            let d = Digraph::build(params(p, q));
            assert!(d.arcs().windows(2).all(|w| w[0] < w[1]), "p={p} q={q}");
            assert_eq!(d.arcs()[0], Arc::Source);
        }
    }

    #[test]
    fn degrees_and_acyclicity() {
        for p in 1..=12u32 {
            for q in 1..=p {
                let d = Digraph::build(params(p, q));
                for &n in d.nodes() {
                    if n != Node::Sink {
                        assert!(!d.out_arcs(n).is_empty(), "no way out of {n}");
                    }
                    if n != Node::Source {
                        assert!(!d.in_arcs(n).is_empty(), "no way into {n}");
                    }
                    // in/out arc lists agree with the global arc list.
                    for a in d.out_arcs(n) {
                        assert_eq!(a.tail(d.params()), n);
                        assert!(d.arcs().contains(&a));
                    }
                    for a in d.in_arcs(n) {
                        assert_eq!(a.head(), n);
                        assert!(d.arcs().contains(&a));
                    }
                }
                // Kahn's algorithm consumes every node: the digraph is acyclic.
                let mut indeg: std::collections::BTreeMap<Node, usize> =
                    d.nodes().iter().map(|&n| (n, d.in_arcs(n).len())).collect();
                let mut queue: Vec<Node> = d
                    .nodes()
                    .iter()
                    .copied()
                    .filter(|n| indeg[n] == 0)
                    .collect();
                let mut seen = 0;
                while let Some(n) = queue.pop() {
                    seen += 1;
                    for a in d.out_arcs(n) {
                        let e = indeg.get_mut(&a.head()).unwrap();
                        *e -= 1;
                        if *e == 0 {
                            queue.push(a.head());
                        }
                    }
                }
                assert_eq!(seen, d.nodes().len(), "cycle in D({p},{q})");
            }
        }
    }

    #[test]
    fn bar_examples() {
        let pq = params(8, 6);
        let cells =
            |v: &[(u32, u32)]| -> Vec<Cell> { v.iter().map(|&(i, j)| Cell::new(i, j)).collect() };
        assert_eq!(bar(pq, Cell::new(8, 5)), cells(&[(8, 5), (8, 6)]));
        assert_eq!(bar(pq, Cell::new(3, 3)), cells(&[(3, 3)]));
        assert_eq!(
            bar(params(7, 6), Cell::new(7, 4)),
            cells(&[(7, 4), (7, 5), (7, 6)])
        );
        assert_eq!(
            column_segment(pq, Cell::new(8, 5)),
            cells(&[(5, 5), (6, 5), (7, 5), (8, 5)])
        );
        assert_eq!(column_segment(pq, Cell::new(4, 4)), cells(&[(4, 4)]));
    }

    #[test]
    fn cut_sets_of_column_segment() {
        let pq = params(8, 6);
        let d = Digraph::build(pq);
        // W = nodes of the column segment of (6,3).
        let w: BTreeSet<Node> = column_segment(pq, Cell::new(6, 3))
            .into_iter()
            .map(Node::cell)
            .collect();
        let cuts = d.cut_sets(&w);
        let expect: BTreeSet<Arc> = (3..=6).map(|k| Arc::Diagonal { i: k - 1, j: 2 }).collect();
        assert_eq!(cuts.diagonal_incoming, expect);
        // The only other way in is the vertical arc from above... which does
        // not exist for the top cell (3,3); entering (4..6,3) vertically means
        // coming from inside W, so vert-in is empty.
        assert_eq!(cuts.vertical_incoming, BTreeSet::new());
        assert_eq!(cuts.incoming, expect);

        // Singleton at a diagonal cell.
        let w: BTreeSet<Node> = [Node::grid(3, 3)].into();
        let cuts = d.cut_sets(&w);
        assert_eq!(
            cuts.diagonal_incoming,
            BTreeSet::from([Arc::Diagonal { i: 2, j: 2 }])
        );
        assert_eq!(cuts.incoming.len(), 1);
        assert_eq!(cuts.outgoing.len(), 2); // v(3,3) and d(3,3)

        // The full node set has no boundary at all.
        let all: BTreeSet<Node> = d.nodes().iter().copied().collect();
        assert_eq!(d.cut_sets(&all), CutSets::default());
    }

    #[test]
    fn paths_validate_and_classify() {
        let pq = params(2, 2);
        let path = DirectedPath::new(
            pq,
            vec![
                Node::Source,
                Node::grid(0, 0),
                Node::grid(1, 1),
                Node::grid(2, 1),
                Node::Sink,
            ],
        )
        .unwrap();
        assert!(path.is_s_t());
        assert_eq!(
            path.arcs(pq),
            [
                Arc::Source,
                Arc::Diagonal { i: 0, j: 0 },
                Arc::Vertical { i: 1, j: 1 },
                Arc::Sink { j: 1 },
            ]
        );
        assert_eq!(path.to_string(), "s -> 0,0 -> 1,1 -> 2,1 -> t");

        // No horizontal or skipping moves.
        assert!(DirectedPath::new(pq, vec![Node::grid(1, 0), Node::grid(1, 1)]).is_err());
        assert!(DirectedPath::new(pq, vec![Node::grid(0, 0), Node::grid(2, 0)]).is_err());
        // v(1,2) does not exist ((2,2) is only reachable diagonally).
        assert!(DirectedPath::new(pq, vec![Node::grid(1, 2), Node::grid(2, 2)]).is_err());
        // Trivial path is fine.
        assert!(DirectedPath::new(pq, vec![Node::grid(1, 1)]).is_ok());
    }

    #[test]
    fn path_node_sets_example() {
        let pq = params(3, 2);
        // (1,1) -d-> (2,2) -v-> (3,2)
        let path = DirectedPath::new(
            pq,
            vec![Node::grid(1, 1), Node::grid(2, 2), Node::grid(3, 2)],
        )
        .unwrap();
        let (s, t) = path_node_sets(pq, &path);
        assert_eq!(s, BTreeSet::from([Node::grid(1, 1), Node::grid(3, 2)]));
        assert_eq!(t, BTreeSet::from([Node::grid(1, 1)]));
    }

    #[test]
    fn dot_export_mentions_every_arc() {
        let d = Digraph::build(params(1, 1));
        let dot = d.to_dot();
        assert!(dot.starts_with("digraph D {"));
        for line in [
            "\"s\" -> \"0,0\";",
            "\"0,0\" -> \"1,0\";",
            "\"0,0\" -> \"1,1\";",
            "\"1,0\" -> \"t\";",
            "\"1,1\" -> \"t\";",
        ] {
            assert!(dot.contains(line), "missing {line}");
        }
    }
}
