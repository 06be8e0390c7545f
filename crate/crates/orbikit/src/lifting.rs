//! Rational s-t flows on `D(p,q)` and the lifting that turns a matrix with
//! nonnegative entries and row sums at most one into such a flow.
//!
//! The lifted flow treats the matrix entry `x_ij` as the capacity of the
//! diagonal arc `d(i-1,j-1)` (all other arcs are uncapacitated).  Starting
//! from one unit on the column-0 chain, a single ordered pass over the cells
//! (columns left to right, rows top to bottom) reroutes as much flow as the
//! capacity allows onto each diagonal arc and down the target column.  The
//! result is a unit flow that respects the capacities and is *left-saturated*:
//! whenever flow still runs on the vertical sibling `v(i-1,j-1)`, the diagonal
//! arc `d(i-1,j-1)` is filled to its capacity `x_ij`.  That saturation
//! property is what the separation routine in [`crate::sci`] exploits.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::digraph::{arc_exists, in_arcs, out_arcs, Arc, DirectedPath, Node};
use crate::error::Error;
use crate::formulations::ExtendedPoint;
use crate::matrix::{Cell, Kind, OrbiMatrix, Params};
use crate::rat::{parse_rational, Rational};

/// A rational arc map on `D(p,q)`; absent arcs carry zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Flow {
    params: Params,
    values: BTreeMap<Arc, Rational>,
}

impl Flow {
    pub fn zero(params: Params) -> Self {
        Flow {
            params,
            values: BTreeMap::new(),
        }
    }

    /// Builds a flow from `(arc, value)` pairs; arcs must exist in `D(p,q)`.
    pub fn from_values<V>(params: Params, values: V) -> Result<Self, Error>
    where
        V: IntoIterator<Item = (Arc, Rational)>,
    {
        let mut f = Flow::zero(params);
        for (arc, v) in values {
            f.set(arc, v)?;
        }
        Ok(f)
    }

    /// The incidence vector of an s-t path: one unit on each of its arcs.
    pub fn unit_path(params: Params, path: &DirectedPath) -> Self {
        assert!(path.is_s_t(), "unit_path needs an s-t path");
        let mut f = Flow::zero(params);
        for arc in path.arcs(params) {
            f.values.insert(arc, Rational::one());
        }
        f
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn get(&self, arc: Arc) -> Rational {
        self.values
            .get(&arc)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, arc: Arc, value: Rational) -> Result<(), Error> {
        if !arc_exists(self.params, arc) {
            return Err(Error::InvalidInput(format!("no arc {arc} in D(p,q)")));
        }
        if value.is_zero() {
            self.values.remove(&arc);
        } else {
            self.values.insert(arc, value);
        }
        Ok(())
    }

    /// Nonzero arc values in canonical arc order.
    pub fn iter(&self) -> impl Iterator<Item = (Arc, &Rational)> {
        self.values.iter().map(|(a, v)| (*a, v))
    }

    fn add(&mut self, arc: Arc, delta: &Rational) {
        debug_assert!(arc_exists(self.params, arc));
        let v = self.get(arc) + delta;
        if v.is_zero() {
            self.values.remove(&arc);
        } else {
            self.values.insert(arc, v);
        }
    }

    pub fn value_in(&self, node: Node) -> Rational {
        in_arcs(self.params, node)
            .into_iter()
            .map(|a| self.get(a))
            .sum()
    }

    pub fn value_out(&self, node: Node) -> Rational {
        out_arcs(self.params, node)
            .into_iter()
            .map(|a| self.get(a))
            .sum()
    }

    /// Total flow over an arbitrary arc set.
    pub fn over<'a, A>(&self, arcs: A) -> Rational
    where
        A: IntoIterator<Item = &'a Arc>,
    {
        arcs.into_iter().map(|a| self.get(*a)).sum()
    }

    /// Flow through the nodes of a cell set (sum of inflows).
    pub fn through(&self, cells: &[Cell]) -> Rational {
        cells.iter().map(|c| self.value_in(Node::cell(*c))).sum()
    }

    /// Nonnegative, conserves flow at every grid node, and pushes exactly one
    /// unit out of `s`.
    pub fn is_unit(&self) -> bool {
        if self.values.values().any(|v| v.is_negative()) {
            return false;
        }
        if !self.value_out(Node::Source).is_one() {
            return false;
        }
        for i in 0..=self.params.p() {
            for j in 0..=self.params.col_limit(i) {
                let n = Node::grid(i, j);
                if self.value_in(n) != self.value_out(n) {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> String {
        let repr = FlowRepr {
            arcs: self
                .values
                .iter()
                .map(|(a, v)| ArcValueRepr::new(*a, v.to_string()))
                .collect(),
        };
        serde_json::to_string_pretty(&repr).expect("flow serialization cannot fail")
    }

    pub fn from_json(params: Params, json: &str) -> Result<Self, Error> {
        let repr: FlowRepr = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
        let mut values = Vec::new();
        for av in repr.arcs {
            values.push((av.to_arc()?, parse_rational(&av.flow)?));
        }
        Flow::from_values(params, values)
    }
}

#[derive(Serialize, Deserialize)]
struct FlowRepr {
    arcs: Vec<ArcValueRepr>,
}

/// One arc-value pair: `kind` is `"s"`, `"v"`, `"d"` or `"t"`; `i`/`j` are
/// present where the kind needs them.
#[derive(Serialize, Deserialize)]
struct ArcValueRepr {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    i: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    j: Option<u32>,
    flow: String,
}

impl ArcValueRepr {
    fn new(arc: Arc, flow: String) -> Self {
        let (kind, i, j) = match arc {
            Arc::Source => ("s", None, None),
            Arc::Vertical { i, j } => ("v", Some(i), Some(j)),
            Arc::Diagonal { i, j } => ("d", Some(i), Some(j)),
            Arc::Sink { j } => ("t", None, Some(j)),
        };
        ArcValueRepr {
            kind: kind.into(),
            i,
            j,
            flow,
        }
    }

    fn to_arc(&self) -> Result<Arc, Error> {
        let need = |v: Option<u32>| {
            v.ok_or_else(|| Error::Parse(format!("arc kind {:?} needs indices", self.kind)))
        };
        Ok(match self.kind.as_str() {
            "s" => Arc::Source,
            "v" => Arc::Vertical {
                i: need(self.i)?,
                j: need(self.j)?,
            },
            "d" => Arc::Diagonal {
                i: need(self.i)?,
                j: need(self.j)?,
            },
            "t" => Arc::Sink { j: need(self.j)? },
            k => return Err(Error::Parse(format!("unknown arc kind {k:?}"))),
        })
    }
}

/// `D(p,q)` with capacity `x_ij` on each diagonal arc `d(i-1,j-1)` and no
/// capacity anywhere else.
#[derive(Clone, Debug)]
pub struct CapacitatedNetwork {
    x: OrbiMatrix,
}

impl CapacitatedNetwork {
    pub fn new(x: OrbiMatrix) -> Self {
        CapacitatedNetwork { x }
    }

    pub fn params(&self) -> Params {
        self.x.params()
    }

    /// `Some(capacity)` for diagonal arcs, `None` (unbounded) otherwise.
    pub fn capacity(&self, arc: Arc) -> Option<Rational> {
        match arc {
            Arc::Diagonal { i, j } => Some(self.x.get(i + 1, j + 1)),
            _ => None,
        }
    }

    /// Whether `arc` still has residual capacity under `y`.
    pub fn has_residual(&self, y: &Flow, arc: Arc) -> bool {
        match self.capacity(arc) {
            None => true,
            Some(cap) => y.get(arc) < cap,
        }
    }
}

fn check_lift_input(x: &OrbiMatrix) -> Result<(), Error> {
    if !x.is_nonneg() {
        return Err(Error::InvalidInput("negative entry".into()));
    }
    for i in 1..=x.params().p() {
        if x.row_sum(i) > Rational::one() {
            return Err(Error::InvalidInput(format!("row {i} sums above one")));
        }
    }
    Ok(())
}

/// Lifts `x` (nonnegative, row sums at most one) to a unit flow `y` that
/// respects the diagonal capacities (`y_{d(i-1,j-1)} <= x_ij`) and saturates
/// them wherever the vertical sibling still carries flow:
/// `y_{v(i-1,j-1)} > 0` implies `y_{d(i-1,j-1)} = x_ij`.
pub fn lift(x: &OrbiMatrix) -> Result<Flow, Error> {
    check_lift_input(x)?;
    let params = x.params();
    let p = params.p();

    // One unit down the column-0 chain.
    let mut y = Flow::zero(params);
    y.values.insert(Arc::Source, Rational::one());
    for i in 0..p {
        y.values.insert(Arc::Vertical { i, j: 0 }, Rational::one());
    }
    y.values.insert(Arc::Sink { j: 0 }, Rational::one());

    // Cells in column-major order; each step only touches arcs of later
    // cells, so one pass settles everything.
    for j in 1..=params.q() {
        for i in j..=p {
            let vert = Arc::Vertical { i: i - 1, j: j - 1 };
            let diag = Arc::Diagonal { i: i - 1, j: j - 1 };
            let available = y.get(vert);
            let headroom = x.get(i, j) - y.get(diag);
            let theta = available.min(headroom);
            if !theta.is_positive() {
                continue;
            }
            // Divert theta units: they now take the diagonal into column j
            // and run straight down to t instead of straight down column j-1.
            y.add(vert, &(-&theta));
            y.add(diag, &theta);
            for k in i..p {
                y.add(Arc::Vertical { i: k, j: j - 1 }, &(-&theta));
                y.add(Arc::Vertical { i: k, j }, &theta);
            }
            y.add(Arc::Sink { j: j - 1 }, &(-&theta));
            y.add(Arc::Sink { j }, &theta);
        }
    }

    debug_assert!(y.is_unit());
    debug_assert!(saturation_holds(x, &y));
    Ok(y)
}

/// The saturation property produced by [`lift`]: on every cell either the
/// vertical sibling is empty or the diagonal arc is at capacity — and the
/// capacity is never exceeded.
pub fn saturation_holds(x: &OrbiMatrix, y: &Flow) -> bool {
    let params = x.params();
    for i in 1..=params.p() {
        for j in 1..=params.col_limit(i) {
            let d = y.get(Arc::Diagonal { i: i - 1, j: j - 1 });
            if d > x.get(i, j) {
                return false;
            }
            let v = y.get(Arc::Vertical { i: i - 1, j: j - 1 });
            if v.is_positive() && d != x.get(i, j) {
                return false;
            }
        }
    }
    true
}

/// The unique unit path flow `y` with `(x,y)` feasible for the extended
/// system, for a packing-orbitope vertex `x`: the path takes the diagonal
/// into column `j` exactly at the row whose 1 opens column `j`, and otherwise
/// continues vertically at the widest column opened so far.
pub fn lift_vertex(x: &OrbiMatrix) -> Result<Flow, Error> {
    let params = x.params();
    if !x.is_vertex(Kind::Packing) {
        return Err(Error::InvalidInput("not a packing-orbitope vertex".into()));
    }
    let mut nodes = vec![Node::Source, Node::grid(0, 0)];
    let mut widest = 0u32;
    for i in 1..=params.p() {
        let row_one = (1..=params.col_limit(i)).find(|&j| x.get(i, j).is_one());
        if row_one == Some(widest + 1) {
            widest += 1;
        }
        nodes.push(Node::grid(i, widest));
    }
    nodes.push(Node::Sink);
    let path = DirectedPath::new(params, nodes).expect("vertex walk is always a path");
    Ok(Flow::unit_path(params, &path))
}

/// The x-part of a point of the extended polytope.
pub fn project(pt: &ExtendedPoint) -> OrbiMatrix {
    pt.x.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn params(p: u32, q: u32) -> Params {
        Params::new(p, q).unwrap()
    }

    fn matrix(p: u32, q: u32, entries: &[(u32, u32, Rational)]) -> OrbiMatrix {
        OrbiMatrix::from_entries(
            params(p, q),
            entries.iter().map(|(i, j, v)| ((*i, *j), v.clone())),
        )
        .unwrap()
    }

    fn column0_flow(p: u32, q: u32) -> Flow {
        let mut vals = vec![(Arc::Source, rat(1)), (Arc::Sink { j: 0 }, rat(1))];
        for i in 0..p {
            vals.push((Arc::Vertical { i, j: 0 }, rat(1)));
        }
        Flow::from_values(params(p, q), vals).unwrap()
    }

    #[test]
    fn lift_of_zero_is_column0_chain() {
        let x = OrbiMatrix::zero(params(3, 2));
        assert_eq!(lift(&x).unwrap(), column0_flow(3, 2));
    }

    #[test]
    fn lift_of_diagonal_vertex() {
        let x = matrix(2, 2, &[(1, 1, rat(1)), (2, 2, rat(1))]);
        let y = lift(&x).unwrap();
        let expect = Flow::from_values(
            params(2, 2),
            [
                (Arc::Source, rat(1)),
                (Arc::Diagonal { i: 0, j: 0 }, rat(1)),
                (Arc::Diagonal { i: 1, j: 1 }, rat(1)),
                (Arc::Sink { j: 2 }, rat(1)),
            ],
        )
        .unwrap();
        assert_eq!(y, expect);
    }

    #[test]
    fn lift_of_fractional_point() {
        // x_11 = 1/2, x_22 = 1/2: half the unit goes diagonally at (1,1) and
        // again at (2,2); the other half stays on column 0.
        let x = matrix(2, 2, &[(1, 1, ratio(1, 2)), (2, 2, ratio(1, 2))]);
        let y = lift(&x).unwrap();
        let expect = Flow::from_values(
            params(2, 2),
            [
                (Arc::Source, rat(1)),
                (Arc::Vertical { i: 0, j: 0 }, ratio(1, 2)),
                (Arc::Vertical { i: 1, j: 0 }, ratio(1, 2)),
                (Arc::Diagonal { i: 0, j: 0 }, ratio(1, 2)),
                (Arc::Diagonal { i: 1, j: 1 }, ratio(1, 2)),
                (Arc::Sink { j: 0 }, ratio(1, 2)),
                (Arc::Sink { j: 2 }, ratio(1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(y, expect);
        assert!(y.is_unit());
        assert!(saturation_holds(&x, &y));
    }

    #[test]
    fn lift_handles_repeated_columns() {
        // Both rows use column 1: the second 1 cannot ride a diagonal (its
        // diagonal arc starts on column 0 below the path) and must not break
        // conservation.
        let x = matrix(2, 2, &[(1, 1, rat(1)), (2, 1, rat(1))]);
        let y = lift(&x).unwrap();
        let expect = Flow::from_values(
            params(2, 2),
            [
                (Arc::Source, rat(1)),
                (Arc::Diagonal { i: 0, j: 0 }, rat(1)),
                (Arc::Vertical { i: 1, j: 1 }, rat(1)),
                (Arc::Sink { j: 1 }, rat(1)),
            ],
        )
        .unwrap();
        assert_eq!(y, expect);
    }

    #[test]
    fn lift_rejects_bad_input() {
        let neg = matrix(2, 2, &[(1, 1, rat(-1))]);
        assert!(matches!(lift(&neg), Err(Error::InvalidInput(_))));
        let heavy = matrix(2, 2, &[(2, 1, ratio(3, 4)), (2, 2, ratio(1, 2))]);
        assert!(matches!(lift(&heavy), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn lift_vertex_matches_lift_on_vertices() {
        let vertices: &[&[(u32, u32)]] = &[
            &[],
            &[(1, 1)],
            &[(2, 1)],
            &[(1, 1), (2, 1)],
            &[(1, 1), (2, 2)],
        ];
        for ones in vertices {
            let x = matrix(
                2,
                2,
                &ones
                    .iter()
                    .map(|&(i, j)| (i, j, rat(1)))
                    .collect::<Vec<_>>(),
            );
            assert_eq!(lift_vertex(&x).unwrap(), lift(&x).unwrap(), "{ones:?}");
        }
    }

    #[test]
    fn lift_vertex_walks_new_columns_only() {
        // Rows 1 and 3 open columns 1 and 2; row 2 is empty.
        let x = matrix(3, 2, &[(1, 1, rat(1)), (3, 2, rat(1))]);
        let y = lift_vertex(&x).unwrap();
        let path = DirectedPath::new(
            params(3, 2),
            vec![
                Node::Source,
                Node::grid(0, 0),
                Node::grid(1, 1),
                Node::grid(2, 1),
                Node::grid(3, 2),
                Node::Sink,
            ],
        )
        .unwrap();
        assert_eq!(y, Flow::unit_path(params(3, 2), &path));

        let non_vertex = matrix(2, 2, &[(2, 2, rat(1))]);
        assert!(lift_vertex(&non_vertex).is_err());
    }

    #[test]
    fn unit_flow_checks() {
        assert!(column0_flow(4, 3).is_unit());
        let mut f = column0_flow(4, 3);
        f.set(Arc::Vertical { i: 2, j: 0 }, ratio(1, 2)).unwrap();
        assert!(!f.is_unit()); // conservation broken at (2,0)/(3,0)
        let nothing = Flow::zero(params(2, 1));
        assert!(!nothing.is_unit()); // no unit out of s
    }

    #[test]
    fn flow_json_round_trip() {
        let x = matrix(2, 2, &[(1, 1, ratio(1, 2)), (2, 2, ratio(1, 2))]);
        let y = lift(&x).unwrap();
        let js = y.to_json();
        assert!(js.contains("\"kind\": \"d\""));
        assert!(js.contains("\"1/2\""));
        let back = Flow::from_json(params(2, 2), &js).unwrap();
        assert_eq!(back, y);

        assert!(
            Flow::from_json(params(2, 2), "{\"arcs\":[{\"kind\":\"x\",\"flow\":\"1\"}]}").is_err()
        );
        // v(5,5) is not an arc of D(2,2).
        let bad = "{\"arcs\":[{\"kind\":\"v\",\"i\":5,\"j\":5,\"flow\":\"1\"}]}";
        assert!(Flow::from_json(params(2, 2), bad).is_err());
    }

    #[test]
    fn capacities_and_residuals() {
        let x = matrix(2, 2, &[(1, 1, ratio(1, 2))]);
        let net = CapacitatedNetwork::new(x.clone());
        assert_eq!(
            net.capacity(Arc::Diagonal { i: 0, j: 0 }),
            Some(ratio(1, 2))
        );
        assert_eq!(net.capacity(Arc::Diagonal { i: 1, j: 1 }), Some(rat(0)));
        assert_eq!(net.capacity(Arc::Vertical { i: 0, j: 0 }), None);
        let y = lift(&x).unwrap();
        // d(0,0) carries 1/2 = its capacity: saturated; verticals never are.
        assert!(!net.has_residual(&y, Arc::Diagonal { i: 0, j: 0 }));
        assert!(net.has_residual(&y, Arc::Vertical { i: 0, j: 0 }));
        assert!(!net.has_residual(&y, Arc::Diagonal { i: 1, j: 1 })); // cap 0
    }
}
