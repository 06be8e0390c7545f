//! Exact linear optimization over packing and partitioning orbitopes.
//!
//! Maximizing `<d,x>` over the packing orbitope reduces to a longest s-t path
//! problem in the layered digraph `D(p,q)` under a two-part cost structure:
//! the diagonal arc `d(i-1,j-1)` carries the cell value `d_ij`, and the
//! vertical arc `v(i-1,j)` with `j >= 1` carries `max{0, d_{i,1}, ..., d_{i,j}}`
//! — the best row `i` can contribute without widening the column span.  A
//! single sweep over the levels solves this in `O(pq)` time with `O(q)`
//! working values plus one predecessor bit per node, and an optimal vertex is
//! read back off the path.  Partitioning reduces to packing by shifting every
//! row to be strictly positive, which forces an optimal solution to place one
//! unit in each row.
//!
//! All arithmetic is exact.  [`optimize_packing`] works on rational
//! objectives; [`optimize_packing_ints`] is an integer fast path over the
//! same sweep (one `i128` per cell instead of a big rational) that the
//! rational path provably agrees with.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::digraph::{arc_exists, Arc, DirectedPath, Node};
use crate::error::Error;
use crate::lifting::Flow;
use crate::matrix::{OrbiMatrix, Params};
use crate::rat::Rational;

/// A rational cost for every arc of `D(p,q)`; absent arcs cost zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ArcCosts {
    params: Params,
    costs: BTreeMap<Arc, Rational>,
}

impl ArcCosts {
    pub fn new<C>(params: Params, costs: C) -> Result<Self, Error>
    where
        C: IntoIterator<Item = (Arc, Rational)>,
    {
        let mut map = BTreeMap::new();
        for (arc, c) in costs {
            if !arc_exists(params, arc) {
                return Err(Error::InvalidInput(format!("no arc {arc} in D(p,q)")));
            }
            map.insert(arc, c);
        }
        Ok(ArcCosts { params, costs: map })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn get(&self, arc: Arc) -> Rational {
        self.costs
            .get(&arc)
            .cloned()
            .unwrap_or_else(num_traits::Zero::zero)
    }

    /// Stored arc costs in canonical arc order.
    pub fn iter(&self) -> impl Iterator<Item = (Arc, &Rational)> {
        self.costs.iter().map(|(a, c)| (*a, c))
    }
}

/// The packing cost structure for objective `d`, materialized on every arc:
/// zero on source, sinks and column-0 verticals; `d_{i+1,j+1}` on the
/// diagonal `d(i,j)`; `max{0, d_{i+1,1}, ..., d_{i+1,j}}` on the vertical
/// `v(i,j)` with `j >= 1`.
pub fn arc_costs(d: &OrbiMatrix) -> ArcCosts {
    let params = d.params();
    let zero: Rational = num_traits::Zero::zero();
    let mut costs = BTreeMap::new();
    costs.insert(Arc::Source, zero.clone());
    for j in 0..=params.q() {
        costs.insert(Arc::Sink { j }, zero.clone());
    }
    for i in 0..params.p() {
        costs.insert(Arc::Vertical { i, j: 0 }, zero.clone());
        let row = i + 1;
        let mut prefix = zero.clone();
        for c in 1..=params.col_limit(row) {
            let dc = d.get(row, c);
            if dc > prefix {
                prefix = dc.clone();
            }
            if c <= params.col_limit(i) {
                costs.insert(Arc::Vertical { i, j: c }, prefix.clone());
            }
            costs.insert(Arc::Diagonal { i, j: c - 1 }, dc);
        }
    }
    ArcCosts { params, costs }
}

/// Exact weights the level sweep can accumulate.  The two implementations —
/// big rationals and `i128` — run the identical algorithm, so their optima
/// agree exactly on integer data.
trait Weight: Clone + Ord {
    fn zero() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn into_rational(self) -> Rational;
}

impl Weight for Rational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }

    fn plus(&self, other: &Self) -> Self {
        self + other
    }

    fn into_rational(self) -> Rational {
        self
    }
}

impl Weight for i128 {
    fn zero() -> Self {
        0
    }

    // Never overflows for `i64` cell values: a path adds at most `p + 2`
    // terms, so |sum| < 2^32 * 2^63 << 2^127.
    fn plus(&self, other: &Self) -> Self {
        self + other
    }

    fn into_rational(self) -> Rational {
        Rational::from_integer(BigInt::from(self))
    }
}

/// Row-major dense objective; rows are zero-padded so prefix scans are O(1)
/// per step.
struct DenseObjective<W> {
    params: Params,
    offsets: Vec<usize>,
    vals: Vec<W>,
}

fn row_offsets(params: Params) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(params.p() as usize);
    let mut acc = 0usize;
    for i in 1..=params.p() {
        offsets.push(acc);
        acc += params.col_limit(i) as usize;
    }
    (offsets, acc)
}

impl DenseObjective<Rational> {
    fn from_matrix(d: &OrbiMatrix) -> Self {
        let params = d.params();
        let (offsets, total) = row_offsets(params);
        let mut vals = vec![<Rational as Weight>::zero(); total];
        for (cell, v) in d.entries() {
            vals[offsets[(cell.i() - 1) as usize] + (cell.j() - 1) as usize] = v.clone();
        }
        DenseObjective {
            params,
            offsets,
            vals,
        }
    }
}

impl DenseObjective<i128> {
    fn from_ints(params: Params, d: &[i64]) -> Result<Self, Error> {
        let (offsets, total) = row_offsets(params);
        if d.len() != total {
            return Err(Error::InvalidInput(format!(
                "objective has {} entries, expected {total}",
                d.len()
            )));
        }
        Ok(DenseObjective {
            params,
            offsets,
            vals: d.iter().map(|&v| v as i128).collect(),
        })
    }
}

impl<W: Weight> DenseObjective<W> {
    fn get(&self, i: u32, j: u32) -> &W {
        &self.vals[self.offsets[(i - 1) as usize] + (j - 1) as usize]
    }

    fn row_mut(&mut self, i: u32) -> &mut [W] {
        let start = self.offsets[(i - 1) as usize];
        let len = self.params.col_limit(i) as usize;
        &mut self.vals[start..start + len]
    }
}

fn node_offsets(params: Params) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(params.p() as usize + 1);
    let mut acc = 0usize;
    for i in 0..=params.p() {
        offsets.push(acc);
        acc += params.col_limit(i) as usize + 1;
    }
    (offsets, acc)
}

/// Vertical beats diagonal on ties; the bool records a diagonal entry.
fn pick<W: Ord>(vert: Option<W>, diag: Option<W>) -> (W, bool) {
    match (vert, diag) {
        (Some(v), Some(d)) => {
            if d > v {
                (d, true)
            } else {
                (v, false)
            }
        }
        (Some(v), None) => (v, false),
        (None, Some(d)) => (d, true),
        (None, None) => unreachable!("every grid node below level 0 has an entering arc"),
    }
}

fn walk_back(params: Params, noff: &[usize], pred: &[u8], sink_col: usize) -> DirectedPath {
    let p = params.p() as usize;
    let mut cols = vec![0u32; p + 1];
    let mut b = sink_col;
    for lvl in (1..=p).rev() {
        cols[lvl] = b as u32;
        if pred[noff[lvl] + b] == 1 {
            b -= 1;
        }
    }
    debug_assert_eq!(b, 0, "every path starts at (0,0)");
    let mut nodes = Vec::with_capacity(p + 3);
    nodes.push(Node::Source);
    nodes.extend(
        cols.iter()
            .enumerate()
            .map(|(lvl, &c)| Node::grid(lvl as u32, c)),
    );
    nodes.push(Node::Sink);
    DirectedPath::new(params, nodes).expect("the sweep follows arcs")
}

/// Level sweep under the packing cost structure implied by `obj`.
fn sweep_dense<W: Weight>(obj: &DenseObjective<W>) -> (W, DirectedPath) {
    let params = obj.params;
    let zero = W::zero();
    let (noff, total) = node_offsets(params);
    let mut pred = vec![0u8; total];
    let mut dp_prev: Vec<W> = Vec::with_capacity(params.q() as usize + 1);
    let mut dp_cur: Vec<W> = Vec::with_capacity(params.q() as usize + 1);
    dp_prev.push(W::zero());
    for lvl in 1..=params.p() {
        let qc = params.col_limit(lvl);
        let qp = params.col_limit(lvl - 1);
        dp_cur.clear();
        let mut prefix = W::zero(); // max{0, d_{lvl,1..b}}
        for b in 0..=qc {
            let diag = if b >= 1 {
                let db = obj.get(lvl, b);
                if *db > prefix {
                    prefix = db.clone();
                }
                Some(dp_prev[(b - 1) as usize].plus(db))
            } else {
                None
            };
            let vert =
                (b <= qp).then(|| dp_prev[b as usize].plus(if b == 0 { &zero } else { &prefix }));
            let (val, took_diag) = pick(vert, diag);
            pred[noff[lvl as usize] + b as usize] = took_diag as u8;
            dp_cur.push(val);
        }
        std::mem::swap(&mut dp_prev, &mut dp_cur);
    }
    // Sinks cost nothing; strict improvement keeps the smallest column on
    // ties, so an all-zero objective yields the column-0 path.
    let mut best = 0usize;
    for b in 1..dp_prev.len() {
        if dp_prev[b] > dp_prev[best] {
            best = b;
        }
    }
    let value = dp_prev[best].clone();
    (value, walk_back(params, &noff, &pred, best))
}

/// Longest s-t path under arbitrary arc costs.  Ties prefer the vertical
/// entering arc and, at the sink, the smallest column.
pub fn longest_path(costs: &ArcCosts) -> (Rational, DirectedPath) {
    let params = costs.params;
    let (noff, total) = node_offsets(params);
    let mut pred = vec![0u8; total];
    let mut dp_prev = vec![costs.get(Arc::Source)];
    for lvl in 1..=params.p() {
        let qc = params.col_limit(lvl);
        let qp = params.col_limit(lvl - 1);
        let mut dp = Vec::with_capacity(qc as usize + 1);
        for b in 0..=qc {
            let vert = (b <= qp)
                .then(|| &dp_prev[b as usize] + costs.get(Arc::Vertical { i: lvl - 1, j: b }));
            let diag = (b >= 1).then(|| {
                &dp_prev[(b - 1) as usize]
                    + costs.get(Arc::Diagonal {
                        i: lvl - 1,
                        j: b - 1,
                    })
            });
            let (val, took_diag) = pick(vert, diag);
            pred[noff[lvl as usize] + b as usize] = took_diag as u8;
            dp.push(val);
        }
        dp_prev = dp;
    }
    let mut best = 0usize;
    let mut best_val = &dp_prev[0] + costs.get(Arc::Sink { j: 0 });
    for (b, dv) in dp_prev.iter().enumerate().skip(1) {
        let v = dv + costs.get(Arc::Sink { j: b as u32 });
        if v > best_val {
            best = b;
            best_val = v;
        }
    }
    (best_val, walk_back(params, &noff, &pred, best))
}

/// Reads the optimal vertex off a path: a diagonal arc `d(i,j)` places a 1 at
/// `(i+1, j+1)`; a vertical arc `v(i,j)` with `j >= 1` places a 1 in row
/// `i+1` at the smallest column maximizing `d_{i+1,1..j}`, provided that
/// maximum is nonnegative.
pub fn reconstruct(d: &OrbiMatrix, path: &DirectedPath) -> OrbiMatrix {
    assert!(path.is_s_t(), "reconstruct needs an s-t path");
    reconstruct_dense(&DenseObjective::from_matrix(d), path)
}

fn reconstruct_dense<W: Weight>(obj: &DenseObjective<W>, path: &DirectedPath) -> OrbiMatrix {
    let params = obj.params;
    let zero = W::zero();
    let one: Rational = num_traits::One::one();
    let mut ones = Vec::new();
    for arc in path.arcs(params) {
        match arc {
            Arc::Diagonal { i, j } => ones.push(((i + 1, j + 1), one.clone())),
            Arc::Vertical { i, j } if j >= 1 => {
                let row = i + 1;
                let mut best = obj.get(row, 1);
                let mut best_col = 1;
                for l in 2..=j {
                    let v = obj.get(row, l);
                    if v > best {
                        best = v;
                        best_col = l;
                    }
                }
                if *best >= zero {
                    ones.push(((row, best_col), one.clone()));
                }
            }
            _ => {}
        }
    }
    OrbiMatrix::from_entries(params, ones).expect("path arcs map to cells in range")
}

/// An exact optimum: the value, an optimal orbitope vertex `x`, the optimal
/// path and its unit flow `y` (together `(x, y)` satisfy the extended
/// system).
#[derive(Clone, Debug)]
pub struct OptResult {
    pub value: Rational,
    pub x: OrbiMatrix,
    pub y: Flow,
    pub path: DirectedPath,
}

impl OptResult {
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Repr<'a> {
            value: String,
            x: &'a OrbiMatrix,
            path: Vec<String>,
        }
        serde_json::to_string_pretty(&Repr {
            value: self.value.to_string(),
            x: &self.x,
            path: self.path.nodes().iter().map(|n| n.to_string()).collect(),
        })
        .expect("optimum serialization cannot fail")
    }
}

/// Maximizes `<d,x>` over the packing orbitope `O_pack(p,q)` in `O(pq)`.
pub fn optimize_packing(d: &OrbiMatrix) -> OptResult {
    let obj = DenseObjective::from_matrix(d);
    let (value, path) = sweep_dense(&obj);
    let x = reconstruct_dense(&obj, &path);
    let value = value.into_rational();
    debug_assert_eq!(value, d.dot(&x));
    let y = Flow::unit_path(d.params(), &path);
    OptResult { value, x, y, path }
}

/// Integer fast path of [`optimize_packing`]: `d` holds one `i64` per cell in
/// row-major order.  Runs the same sweep over `i128` sums and returns exactly
/// the same optimum.
pub fn optimize_packing_ints(params: Params, d: &[i64]) -> Result<OptResult, Error> {
    let obj = DenseObjective::from_ints(params, d)?;
    let (value, path) = sweep_dense(&obj);
    let x = reconstruct_dense(&obj, &path);
    debug_assert_eq!(
        value,
        x.entries()
            .map(|(c, _)| *obj.get(c.i(), c.j()))
            .sum::<i128>()
    );
    let y = Flow::unit_path(params, &path);
    Ok(OptResult {
        value: value.into_rational(),
        x,
        y,
        path,
    })
}

/// Maximizes `<d,x>` over the partitioning orbitope `O_part(p,q)` in `O(pq)`
/// by shifting each row of `d` to be strictly positive: an optimum of the
/// shifted packing problem then places exactly one unit per row, and the
/// shift contributes the same constant to every such solution.
pub fn optimize_partitioning(d: &OrbiMatrix) -> OptResult {
    let params = d.params();
    let one: Rational = num_traits::One::one();
    let mut obj = DenseObjective::from_matrix(d);
    let mut total_shift: Rational = num_traits::Zero::zero();
    for i in 1..=params.p() {
        let row = obj.row_mut(i);
        let shift = &one - row.iter().min().expect("rows are nonempty");
        for v in row.iter_mut() {
            *v += &shift;
        }
        total_shift += shift;
    }
    let (value, path) = sweep_dense(&obj);
    let x = reconstruct_dense(&obj, &path);
    let value = value.into_rational() - total_shift;
    debug_assert_eq!(value, d.dot(&x));
    debug_assert!(
        (1..=params.p()).all(|i| num_traits::One::is_one(&x.row_sum(i))),
        "strictly positive shifted objective must fill every row"
    );
    let y = Flow::unit_path(params, &path);
    OptResult { value, x, y, path }
}
