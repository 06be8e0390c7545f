//! The two polyhedral descriptions this crate emits: the *extended* system
//! (orbitope variables `x` coupled to a unit s-t flow `y` on `D(p,q)`) and
//! the *very compact* system over aggregated variables
//!
//! ```text
//!   z_ij = x_i(j..q(i))             (row tail sums)
//!   w_ij = y(diagonals into column j at rows j..i)
//! ```
//!
//! Both systems have integral vertices and project onto the packing (or
//! partitioning) orbitope in the `x` variables; the maps between them are
//! affine bijections implemented by [`to_compact`] and [`from_compact`].
//! The compact system has `2|I(p,q)| < 2pq` variables and fewer than `4pq`
//! rows beyond single-variable bounds.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::digraph::{in_arcs, out_arcs, Arc, Digraph, Node};
use crate::error::Error;
use crate::lifting::Flow;
use crate::linsys::{LinearSystem, Sense};
use crate::matrix::{index_set, Cell, Kind, OrbiMatrix, Params};
use crate::rat::Rational;

/// A point `(x, y)` of the extended space: orbitope variables plus an arc
/// map on `D(p,q)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExtendedPoint {
    pub x: OrbiMatrix,
    pub y: Flow,
}

impl ExtendedPoint {
    pub fn new(x: OrbiMatrix, y: Flow) -> Result<Self, Error> {
        if x.params() != y.params() {
            return Err(Error::InvalidInput(
                "matrix and flow have different shapes".into(),
            ));
        }
        Ok(ExtendedPoint { x, y })
    }

    pub fn params(&self) -> Params {
        self.x.params()
    }

    /// Exact feasibility for the extended system: `y` is a nonnegative unit
    /// flow, every diagonal arc respects its capacity `x_ij`, and every row
    /// tail is covered by the flow entering its column segment
    /// (`z_ij <= w_ij`).  Partitioning additionally pins each row sum to 1.
    pub fn is_feasible(&self, kind: Kind) -> bool {
        let params = self.params();
        if !self.y.is_unit() {
            return false;
        }
        let c = to_compact(self);
        for cell in index_set(params) {
            let (i, j) = (cell.i(), cell.j());
            if self.y.get(Arc::Diagonal { i: i - 1, j: j - 1 }) > self.x.get(i, j) {
                return false;
            }
            if c.z(i, j) > c.w(i, j) {
                return false;
            }
        }
        match kind {
            Kind::Packing => true,
            Kind::Partitioning => (1..=params.p()).all(|i| self.x.row_sum(i).is_one()),
        }
    }
}

/// A point of the very compact space, stored densely over `I(p,q)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompactPoint {
    params: Params,
    z: Vec<Rational>,
    w: Vec<Rational>,
}

fn cell_offset(params: Params, i: u32, j: u32) -> Option<usize> {
    if i < 1 || i > params.p() || j < 1 || j > params.col_limit(i) {
        return None;
    }
    // Cells of rows 1..i-1, then column offset within row i.
    let (i64i, q) = (i as u64 - 1, params.q() as u64);
    let full = i64i.min(q);
    let before = full * (full + 1) / 2 + i64i.saturating_sub(q) * q;
    Some(before as usize + (j - 1) as usize)
}

impl CompactPoint {
    /// Builds a point from dense row-major `z` and `w` values over `I(p,q)`.
    pub fn from_parts(params: Params, z: Vec<Rational>, w: Vec<Rational>) -> Result<Self, Error> {
        if z.len() != params.cell_count() || w.len() != params.cell_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} values per part",
                params.cell_count()
            )));
        }
        Ok(CompactPoint { params, z, w })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    /// `z_ij`, zero outside `I(p,q)` (in particular `z_{i,q(i)+1} = 0`).
    pub fn z(&self, i: u32, j: u32) -> Rational {
        match cell_offset(self.params, i, j) {
            Some(idx) => self.z[idx].clone(),
            None => Rational::zero(),
        }
    }

    /// `w_ij`, zero outside `I(p,q)`.
    pub fn w(&self, i: u32, j: u32) -> Rational {
        match cell_offset(self.params, i, j) {
            Some(idx) => self.w[idx].clone(),
            None => Rational::zero(),
        }
    }
}

/// Aggregates an extended point: row tail sums and per-column diagonal
/// inflows.
pub fn to_compact(pt: &ExtendedPoint) -> CompactPoint {
    let params = pt.params();
    let n = params.cell_count();
    let mut z = vec![Rational::zero(); n];
    let mut w = vec![Rational::zero(); n];
    for i in 1..=params.p() {
        let mut tail = Rational::zero();
        for j in (1..=params.col_limit(i)).rev() {
            tail += pt.x.get(i, j);
            z[cell_offset(params, i, j).unwrap()] = tail.clone();
        }
        for j in 1..=params.col_limit(i) {
            let above = match cell_offset(params, i - 1, j) {
                Some(idx) => w[idx].clone(),
                None => Rational::zero(),
            };
            w[cell_offset(params, i, j).unwrap()] =
                above + pt.y.get(Arc::Diagonal { i: i - 1, j: j - 1 });
        }
    }
    CompactPoint { params, z, w }
}

/// Inverts [`to_compact`]: recovers `x` from consecutive `z` differences and
/// the unique unit flow whose diagonal inflows are the `w` differences.
pub fn from_compact(c: &CompactPoint) -> ExtendedPoint {
    let params = c.params();
    let one = Rational::one();
    let mut x = OrbiMatrix::zero(params);
    for cell in index_set(params) {
        let (i, j) = (cell.i(), cell.j());
        let v = c.z(i, j) - c.z(i, j + 1);
        if !v.is_zero() {
            x.set(cell, v).unwrap();
        }
    }
    let mut values = vec![(Arc::Source, one.clone())];
    let p = params.p();
    for i in 0..p {
        values.push((Arc::Vertical { i, j: 0 }, &one - c.w(i + 1, 1)));
        for j in 1..=params.col_limit(i) {
            values.push((Arc::Vertical { i, j }, c.w(i, j) - c.w(i + 1, j + 1)));
        }
        for j in 0..params.col_limit(i + 1) {
            values.push((Arc::Diagonal { i, j }, c.w(i + 1, j + 1) - c.w(i, j + 1)));
        }
    }
    values.push((Arc::Sink { j: 0 }, &one - c.w(p, 1)));
    for j in 1..=params.q() {
        values.push((Arc::Sink { j }, c.w(p, j) - c.w(p, j + 1)));
    }
    let y = Flow::from_values(params, values).expect("all constructed arcs exist");
    ExtendedPoint { x, y }
}

fn arc_var_name(arc: Arc) -> String {
    match arc {
        Arc::Source => "y_s".into(),
        Arc::Vertical { i, j } => format!("y_v_{i}_{j}"),
        Arc::Diagonal { i, j } => format!("y_d_{i}_{j}"),
        Arc::Sink { j } => format!("y_t_{j}"),
    }
}

/// The extended formulation: variables `x` (row-major) then `y` (canonical
/// arc order); one unit out of the source, flow conservation at every grid
/// node, diagonal capacities `y_{d(i-1,j-1)} <= x_ij`, tail-coverage rows
/// `x(bar(i,j)) <= y(diag_in(segment))`, arc nonnegativity, and for
/// partitioning one `x(row i) = 1` equation per row.
pub fn extended_system(params: Params, kind: Kind) -> LinearSystem {
    let dg = Digraph::build(params);
    let one = Rational::one();
    let mut sys = LinearSystem::new(format!("{kind}_extended_{}x{}", params.p(), params.q()));
    let mut x = BTreeMap::new();
    for cell in index_set(params) {
        x.insert(cell, sys.add_var(format!("x_{}_{}", cell.i(), cell.j())));
    }
    let mut y = BTreeMap::new();
    for &arc in dg.arcs() {
        y.insert(arc, sys.add_var(arc_var_name(arc)));
    }

    sys.add_constraint(
        "source",
        vec![(y[&Arc::Source], one.clone())],
        Sense::Eq,
        one.clone(),
    );
    for i in 0..=params.p() {
        for j in 0..=params.col_limit(i) {
            let node = Node::grid(i, j);
            let mut coeffs = Vec::new();
            for arc in out_arcs(params, node) {
                coeffs.push((y[&arc], one.clone()));
            }
            for arc in in_arcs(params, node) {
                coeffs.push((y[&arc], -one.clone()));
            }
            sys.add_constraint(format!("flow_{i}_{j}"), coeffs, Sense::Eq, Rational::zero());
        }
    }
    for cell in index_set(params) {
        let (i, j) = (cell.i(), cell.j());
        sys.add_constraint(
            format!("cap_{i}_{j}"),
            vec![
                (y[&Arc::Diagonal { i: i - 1, j: j - 1 }], one.clone()),
                (x[&cell], -one.clone()),
            ],
            Sense::Le,
            Rational::zero(),
        );
    }
    for cell in index_set(params) {
        let (i, j) = (cell.i(), cell.j());
        let mut coeffs = Vec::new();
        for l in j..=params.col_limit(i) {
            coeffs.push((x[&Cell::new(i, l)], one.clone()));
        }
        for k in j..=i {
            coeffs.push((y[&Arc::Diagonal { i: k - 1, j: j - 1 }], -one.clone()));
        }
        sys.add_constraint(format!("bar_{i}_{j}"), coeffs, Sense::Le, Rational::zero());
    }
    if kind == Kind::Partitioning {
        for i in 1..=params.p() {
            let coeffs = (1..=params.col_limit(i))
                .map(|j| (x[&Cell::new(i, j)], one.clone()))
                .collect();
            sys.add_constraint(format!("row_{i}"), coeffs, Sense::Eq, one.clone());
        }
    }
    for &arc in dg.arcs() {
        sys.add_constraint(
            format!("nn_{}", arc_var_name(arc)),
            vec![(y[&arc], one.clone())],
            Sense::Ge,
            Rational::zero(),
        );
    }
    sys
}

/// The very compact formulation over `z` then `w` (row-major each).  Rows,
/// in order: diagonal-arc nonnegativity `w_{i+1,j+1} - w_{i,j+1} >= 0`,
/// vertical-arc nonnegativity `w_ij - w_{i+1,j+1} >= 0`, the unit bound
/// `w_p1 <= 1`, capacity rows `w_ij - w_{i-1,j} - z_ij + z_{i,j+1} <= 0`,
/// tail-coverage rows `z_ij - w_ij <= 0`, and `w_{i,q(i)} >= 0`; terms whose
/// index leaves `I(p,q)` are dropped.
///
/// Partitioning adds the face equation `w_11 = 1`.  Every partitioning
/// point satisfies it, but the face also keeps packing points whose rows go
/// empty below their first 1 — the compact variables carry no image of the
/// row-sum equations.  Use [`extended_system`] when exact partitioning
/// feasibility is needed.
pub fn compact_system(params: Params, kind: Kind) -> LinearSystem {
    let one = Rational::one();
    let mut sys = LinearSystem::new(format!("{kind}_compact_{}x{}", params.p(), params.q()));
    let mut z = BTreeMap::new();
    for cell in index_set(params) {
        z.insert(cell, sys.add_var(format!("z_{}_{}", cell.i(), cell.j())));
    }
    let mut w = BTreeMap::new();
    for cell in index_set(params) {
        w.insert(cell, sys.add_var(format!("w_{}_{}", cell.i(), cell.j())));
    }
    let wvar =
        |i: u32, j: u32| -> Option<usize> { Cell::try_new(i, j).and_then(|c| w.get(&c)).copied() };

    for i in 0..params.p() {
        for j in 0..params.col_limit(i + 1) {
            // y_{d(i,j)} >= 0
            let mut coeffs = vec![(wvar(i + 1, j + 1).unwrap(), one.clone())];
            if let Some(idx) = wvar(i, j + 1) {
                coeffs.push((idx, -one.clone()));
            }
            sys.add_constraint(format!("dnn_{i}_{j}"), coeffs, Sense::Ge, Rational::zero());
        }
    }
    for cell in index_set(params) {
        let (i, j) = (cell.i(), cell.j());
        if i == params.p() {
            continue;
        }
        // y_{v(i,j)} >= 0 for j >= 1
        let mut coeffs = vec![(wvar(i, j).unwrap(), one.clone())];
        if let Some(idx) = wvar(i + 1, j + 1) {
            coeffs.push((idx, -one.clone()));
        }
        sys.add_constraint(format!("vnn_{i}_{j}"), coeffs, Sense::Ge, Rational::zero());
    }
    sys.add_constraint(
        "unit",
        vec![(wvar(params.p(), 1).unwrap(), one.clone())],
        Sense::Le,
        one.clone(),
    );
    for cell in index_set(params) {
        let (i, j) = (cell.i(), cell.j());
        // y_{d(i-1,j-1)} <= x_ij
        let mut coeffs = vec![(wvar(i, j).unwrap(), one.clone()), (z[&cell], -one.clone())];
        if let Some(idx) = wvar(i - 1, j) {
            coeffs.push((idx, -one.clone()));
        }
        if let Some(zc) = Cell::try_new(i, j + 1).filter(|c| params.contains(*c)) {
            coeffs.push((z[&zc], one.clone()));
        }
        sys.add_constraint(format!("cap_{i}_{j}"), coeffs, Sense::Le, Rational::zero());
    }
    for cell in index_set(params) {
        let (i, j) = (cell.i(), cell.j());
        sys.add_constraint(
            format!("bar_{i}_{j}"),
            vec![(z[&cell], one.clone()), (w[&cell], -one.clone())],
            Sense::Le,
            Rational::zero(),
        );
    }
    for i in 1..=params.p() {
        sys.add_constraint(
            format!("tail_{i}"),
            vec![(wvar(i, params.col_limit(i)).unwrap(), one.clone())],
            Sense::Ge,
            Rational::zero(),
        );
    }
    if kind == Kind::Partitioning {
        sys.add_constraint(
            "full",
            vec![(wvar(1, 1).unwrap(), one.clone())],
            Sense::Eq,
            one,
        );
    }
    sys
}

/// Values of an extended point in the variable order of `sys` (which must
/// come from [`extended_system`] for the same shape).
pub fn extended_vector(sys: &LinearSystem, pt: &ExtendedPoint) -> Vec<Rational> {
    let params = pt.params();
    let mut map = BTreeMap::new();
    for cell in index_set(params) {
        map.insert(
            format!("x_{}_{}", cell.i(), cell.j()),
            pt.x.get(cell.i(), cell.j()),
        );
    }
    for &arc in Digraph::build(params).arcs() {
        map.insert(arc_var_name(arc), pt.y.get(arc));
    }
    sys.vars()
        .iter()
        .map(|v| {
            map.get(v)
                .cloned()
                .unwrap_or_else(|| panic!("variable {v} is not an extended variable"))
        })
        .collect()
}

/// Values of a compact point in the variable order of `sys` (from
/// [`compact_system`] for the same shape).
pub fn compact_vector(sys: &LinearSystem, pt: &CompactPoint) -> Vec<Rational> {
    sys.vars()
        .iter()
        .map(|v| {
            let mut it = v.splitn(3, '_');
            let (kind, i, j) = (it.next(), it.next(), it.next());
            let parse = |t: Option<&str>| t.and_then(|t| t.parse::<u32>().ok());
            match (kind, parse(i), parse(j)) {
                (Some("z"), Some(i), Some(j)) => pt.z(i, j),
                (Some("w"), Some(i), Some(j)) => pt.w(i, j),
                _ => panic!("variable {v} is not a compact variable"),
            }
        })
        .collect()
}

/// The objective on `z` equivalent to `<d, x>` on the orbitope: since
/// `x_ij = z_ij - z_{i,j+1}`, the coefficient of `z_ij` telescopes to
/// `d_ij - d_{i,j-1}` (with `d_{i,0} = 0`).
pub fn compact_objective(d: &OrbiMatrix) -> Vec<(Cell, Rational)> {
    index_set(d.params())
        .into_iter()
        .map(|cell| {
            let (i, j) = (cell.i(), cell.j());
            (cell, d.get(i, j) - d.get(i, j - 1))
        })
        .collect()
}

/// `<d, x>` as objective coefficients on the `x` variables of an extended
/// system.
pub fn objective_on_x(sys: &LinearSystem, d: &OrbiMatrix) -> Vec<(usize, Rational)> {
    d.entries()
        .map(|(cell, v)| {
            let name = format!("x_{}_{}", cell.i(), cell.j());
            let idx = sys
                .var_index(&name)
                .unwrap_or_else(|| panic!("system lacks variable {name}"));
            (idx, v.clone())
        })
        .collect()
}

/// `<d, x>` transformed onto the `z` variables of a compact system.
pub fn objective_on_z(sys: &LinearSystem, d: &OrbiMatrix) -> Vec<(usize, Rational)> {
    compact_objective(d)
        .into_iter()
        .map(|(cell, c)| {
            let name = format!("z_{}_{}", cell.i(), cell.j());
            let idx = sys
                .var_index(&name)
                .unwrap_or_else(|| panic!("system lacks variable {name}"));
            (idx, c)
        })
        .collect()
}
