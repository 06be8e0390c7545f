//! Independent oracles used to validate the fast algorithms: brute-force
//! enumeration of orbitope vertices, of s-t paths, of integral extended
//! points, and an exact rational simplex solver for the emitted systems.
//!
//! Everything here favors obvious correctness over speed and is meant for
//! desk-scale shapes; the production paths live in [`crate::optimizer`],
//! [`crate::lifting`] and [`crate::sci`].

use num_traits::{One, Signed, Zero};

use crate::digraph::{out_arcs, DirectedPath, Node};
use crate::error::Error;
use crate::formulations::{extended_system, extended_vector, ExtendedPoint};
use crate::lifting::Flow;
use crate::linsys::{LinearSystem, Sense};
use crate::matrix::{Cell, Kind, OrbiMatrix, Params};
use crate::rat::Rational;

/// All vertices of the orbitope, in restricted-growth order: row by row,
/// each row either stays empty (packing only) or places its 1 in some
/// column up to one past the widest column used so far.
pub fn enumerate_vertices(params: Params, kind: Kind) -> Vec<OrbiMatrix> {
    fn rec(
        params: Params,
        kind: Kind,
        row: u32,
        widest: u32,
        picks: &mut Vec<(Cell, Rational)>,
        out: &mut Vec<OrbiMatrix>,
    ) {
        if row > params.p() {
            out.push(
                OrbiMatrix::from_entries(
                    params,
                    picks.iter().map(|(c, v)| ((c.i(), c.j()), v.clone())),
                )
                .unwrap(),
            );
            return;
        }
        if kind == Kind::Packing {
            rec(params, kind, row + 1, widest, picks, out);
        }
        let top = (widest + 1).min(params.col_limit(row));
        for j in 1..=top {
            picks.push((Cell::new(row, j), Rational::one()));
            rec(params, kind, row + 1, widest.max(j), picks, out);
            picks.pop();
        }
    }
    let mut out = Vec::new();
    rec(params, kind, 1, 0, &mut Vec::new(), &mut out);
    out
}

/// All directed paths from `from` to `to`, depth-first with vertical arcs
/// explored before diagonal ones.
pub fn paths_between(params: Params, from: Node, to: Node) -> Vec<DirectedPath> {
    fn rec(
        params: Params,
        node: Node,
        to: Node,
        trail: &mut Vec<Node>,
        out: &mut Vec<DirectedPath>,
    ) {
        if node == to {
            out.push(DirectedPath::new(params, trail.clone()).unwrap());
            return;
        }
        for arc in out_arcs(params, node) {
            let next = arc.head();
            trail.push(next);
            rec(params, next, to, trail, out);
            trail.pop();
        }
    }
    let mut out = Vec::new();
    rec(params, from, to, &mut vec![from], &mut out);
    out
}

/// All s-t paths of `D(p,q)`; there are `sum_{j=0}^{q} C(p,j)` of them.
pub fn enumerate_paths(params: Params) -> Vec<DirectedPath> {
    paths_between(params, Node::Source, Node::Sink)
}

/// All integral points of the extended formulation: every s-t path carries
/// the unit flow, and each vertically-traversed row may place a 1 anywhere
/// up to the path's current column.  Candidates are re-checked against
/// [`extended_system`] before being returned.
pub fn enumerate_integral_extended_points(params: Params, kind: Kind) -> Vec<ExtendedPoint> {
    let sys = extended_system(params, kind);
    let mut out = Vec::new();
    for path in enumerate_paths(params) {
        let y = Flow::unit_path(params, &path);
        // Column occupied at each level 1..=p.
        let cols: Vec<u32> = path.nodes()[2..=params.p() as usize + 1]
            .iter()
            .map(|n| match n {
                Node::Grid { j, .. } => *j,
                _ => unreachable!("interior path nodes are grid nodes"),
            })
            .collect();
        let mut stack: Vec<Vec<(Cell, Rational)>> = vec![Vec::new()];
        for i in 1..=params.p() {
            let (prev, here) = (
                if i == 1 { 0 } else { cols[i as usize - 2] },
                cols[i as usize - 1],
            );
            let mut next = Vec::new();
            for partial in &stack {
                if here == prev + 1 {
                    // Diagonal step: the new column's 1 sits in this row.
                    let mut ones = partial.clone();
                    ones.push((Cell::new(i, here), Rational::one()));
                    next.push(ones);
                } else {
                    if kind == Kind::Packing {
                        next.push(partial.clone());
                    }
                    for j in 1..=here {
                        let mut ones = partial.clone();
                        ones.push((Cell::new(i, j), Rational::one()));
                        next.push(ones);
                    }
                }
            }
            stack = next;
        }
        for ones in stack {
            let x = OrbiMatrix::from_entries(
                params,
                ones.iter().map(|(c, v)| ((c.i(), c.j()), v.clone())),
            )
            .unwrap();
            let pt = ExtendedPoint::new(x, y.clone()).unwrap();
            if sys.is_feasible(&extended_vector(&sys, &pt)) {
                out.push(pt);
            }
        }
    }
    out
}

/// Outcome of [`simplex_max`]: the optimal value, the optimal point in the
/// system's variable order, and the labels of the final basic columns
/// (variable names, `<name>_neg` halves of free variables, or
/// `slack_<row>`).
#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub value: Rational,
    pub point: Vec<Rational>,
    pub basis: Vec<String>,
}

#[derive(Clone, Debug)]
enum Col {
    Var { idx: usize, neg: bool },
    Slack { row: usize },
    Artificial { row: usize },
}

/// Exact two-phase primal simplex with Bland's rule on a dense rational
/// tableau.
///
/// Single-variable rows of the form `c*v >= 0` (or `c*v <= 0` with `c < 0`)
/// become variable nonnegativity; every other variable is split into a
/// difference of nonnegative halves.  The stated objective direction is
/// respected; a missing objective solves pure feasibility and reports
/// value 0.  Returns [`Error::Infeasible`] or [`Error::Unbounded`] when the
/// system is.
pub fn simplex_max(sys: &LinearSystem) -> Result<SimplexResult, Error> {
    let nvars = sys.vars().len();
    let mut nonneg = vec![false; nvars];
    let mut kept = Vec::new();
    for c in sys.constraints() {
        if c.coeffs.len() == 1 && c.rhs.is_zero() && c.sense != Sense::Eq {
            let (v, ref coef) = c.coeffs[0];
            let is_lower = (coef.is_positive() && c.sense == Sense::Ge)
                || (coef.is_negative() && c.sense == Sense::Le);
            if is_lower {
                nonneg[v] = true;
                continue;
            }
        }
        kept.push(c);
    }

    let mut cols = Vec::new();
    let mut var_cols: Vec<Vec<usize>> = vec![Vec::new(); nvars];
    for v in 0..nvars {
        var_cols[v].push(cols.len());
        cols.push(Col::Var { idx: v, neg: false });
        if !nonneg[v] {
            var_cols[v].push(cols.len());
            cols.push(Col::Var { idx: v, neg: true });
        }
    }
    let nstruct = cols.len();

    // Rows normalized to nonnegative right-hand sides.
    let m = kept.len();
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    let mut senses: Vec<Sense> = Vec::with_capacity(m);
    for c in &kept {
        let mut row = vec![Rational::zero(); nstruct];
        for (v, coef) in &c.coeffs {
            for &col in &var_cols[*v] {
                let neg = matches!(cols[col], Col::Var { neg: true, .. });
                if neg {
                    row[col] -= coef;
                } else {
                    row[col] += coef;
                }
            }
        }
        let mut b = c.rhs.clone();
        let mut sense = c.sense;
        if b.is_negative() {
            for x in &mut row {
                *x = -x.clone();
            }
            b = -b;
            sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        rows.push(row);
        rhs.push(b);
        senses.push(sense);
    }

    // Slack / surplus columns, then artificial columns last so phase 2 can
    // simply truncate them away.
    let mut basis = vec![usize::MAX; m];
    for (r, sense) in senses.iter().enumerate() {
        match sense {
            Sense::Le | Sense::Ge => {
                let col = cols.len();
                cols.push(Col::Slack { row: r });
                let coef = if *sense == Sense::Le {
                    Rational::one()
                } else {
                    -Rational::one()
                };
                for (rr, row) in rows.iter_mut().enumerate() {
                    row.push(if rr == r {
                        coef.clone()
                    } else {
                        Rational::zero()
                    });
                }
                if *sense == Sense::Le {
                    basis[r] = col;
                }
            }
            Sense::Eq => {}
        }
    }
    let art_start = cols.len();
    for (r, b) in basis.iter_mut().enumerate() {
        if *b == usize::MAX {
            let col = cols.len();
            cols.push(Col::Artificial { row: r });
            for (rr, row) in rows.iter_mut().enumerate() {
                row.push(if rr == r {
                    Rational::one()
                } else {
                    Rational::zero()
                });
            }
            *b = col;
        }
    }
    let ncols = cols.len();

    fn pivot(
        rows: &mut [Vec<Rational>],
        rhs: &mut [Rational],
        basis: &mut [usize],
        r: usize,
        c: usize,
    ) {
        let piv = rows[r][c].clone();
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x /= &piv;
            }
        }
        rhs[r] /= &piv;
        let prow = rows[r].clone();
        let pb = rhs[r].clone();
        for rr in 0..rows.len() {
            if rr == r || rows[rr][c].is_zero() {
                continue;
            }
            let f = rows[rr][c].clone();
            for (j, pv) in prow.iter().enumerate() {
                if !pv.is_zero() {
                    let t = pv * &f;
                    rows[rr][j] -= t;
                }
            }
            let t = &pb * &f;
            rhs[rr] -= t;
        }
        basis[r] = c;
    }

    // Maximizes `cost` over the current tableau with Bland's rule; returns
    // the objective value.
    let run = |rows: &mut Vec<Vec<Rational>>,
               rhs: &mut Vec<Rational>,
               basis: &mut Vec<usize>,
               cost: &[Rational],
               width: usize|
     -> Result<Rational, Error> {
        loop {
            let mut entering = None;
            for j in 0..width {
                let mut zj = Rational::zero();
                for (r, &bc) in basis.iter().enumerate() {
                    let cb = &cost[bc];
                    if !cb.is_zero() && !rows[r][j].is_zero() {
                        zj += cb * &rows[r][j];
                    }
                }
                if zj - &cost[j] < Rational::zero() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(jc) = entering else {
                let mut val = Rational::zero();
                for (r, &bc) in basis.iter().enumerate() {
                    if !cost[bc].is_zero() {
                        val += &cost[bc] * &rhs[r];
                    }
                }
                return Ok(val);
            };
            let mut leave: Option<(Rational, usize, usize)> = None;
            for r in 0..rows.len() {
                if rows[r][jc].is_positive() {
                    let t = &rhs[r] / &rows[r][jc];
                    let better = match &leave {
                        None => true,
                        Some((bt, bvar, _)) => t < *bt || (t == *bt && basis[r] < *bvar),
                    };
                    if better {
                        leave = Some((t, basis[r], r));
                    }
                }
            }
            let Some((_, _, rl)) = leave else {
                return Err(Error::Unbounded);
            };
            pivot(rows, rhs, basis, rl, jc);
        }
    };

    // Phase 1: drive the artificials to zero.
    if art_start < ncols {
        let mut cost = vec![Rational::zero(); ncols];
        for c in cost.iter_mut().skip(art_start) {
            *c = -Rational::one();
        }
        let v = run(&mut rows, &mut rhs, &mut basis, &cost, ncols)?;
        if v.is_negative() {
            return Err(Error::Infeasible);
        }
        // Pivot leftover artificials out of the basis; rows that cannot be
        // pivoted are redundant and dropped.
        let mut drop_rows = Vec::new();
        for r in 0..rows.len() {
            if basis[r] >= art_start {
                match (0..art_start).find(|&j| !rows[r][j].is_zero()) {
                    Some(j) => pivot(&mut rows, &mut rhs, &mut basis, r, j),
                    None => drop_rows.push(r),
                }
            }
        }
        for &r in drop_rows.iter().rev() {
            rows.remove(r);
            rhs.remove(r);
            basis.remove(r);
        }
        for row in &mut rows {
            row.truncate(art_start);
        }
    }

    // Phase 2: the real objective (zero if none was set).
    let minimize = sys
        .objective()
        .is_some_and(|o| o.direction == crate::linsys::Direction::Minimize);
    let mut cost = vec![Rational::zero(); art_start];
    if let Some(obj) = sys.objective() {
        for (v, coef) in &obj.coeffs {
            let signed = if minimize {
                -coef.clone()
            } else {
                coef.clone()
            };
            for &col in &var_cols[*v] {
                let neg = matches!(cols[col], Col::Var { neg: true, .. });
                cost[col] = if neg { -signed.clone() } else { signed.clone() };
            }
        }
    }
    let value = run(&mut rows, &mut rhs, &mut basis, &cost, art_start)?;

    let mut point = vec![Rational::zero(); nvars];
    for (r, &bc) in basis.iter().enumerate() {
        if let Col::Var { idx, neg } = cols[bc] {
            if neg {
                point[idx] -= &rhs[r];
            } else {
                point[idx] += &rhs[r];
            }
        }
    }
    let label = |c: &Col| -> String {
        match c {
            Col::Var { idx, neg: false } => sys.vars()[*idx].clone(),
            Col::Var { idx, neg: true } => format!("{}_neg", sys.vars()[*idx]),
            Col::Slack { row } => format!("slack_{}", kept[*row].name),
            Col::Artificial { row } => format!("artificial_{}", kept[*row].name),
        }
    };
    Ok(SimplexResult {
        value: if minimize { -value } else { value },
        point,
        basis: basis.iter().map(|&b| label(&cols[b])).collect(),
    })
}
