//! Shifted-column inequalities: the complete linear description of the
//! packing/partitioning orbitope in the original variables, and an exact
//! separation routine driven by the rerouted flow from [`crate::lifting`].
//!
//! An inequality is `x(bar(i,j)) <= x(S)` where `bar(i,j)` is the tail of
//! row `i` from column `j` and `S` is the vertically-entered node set of a
//! lattice path from some diagonal cell `(l,l)` down to `(i-1,j-1)`.  There
//! are exactly `sum_{k=1}^{q-1} C(p,k) - (q-1)` of them, so enumeration is
//! guarded by a size cap while separation runs in `O(p*q)`.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::digraph::bar;
use crate::error::Error;
use crate::lifting::{lift, Flow};
use crate::linsys::{LinearSystem, Sense};
use crate::matrix::{index_set, Cell, Kind, OrbiMatrix, Params};
use crate::rat::Rational;

/// One shifted-column inequality `x(bar) <= x(S)`.
///
/// `bar` is the anchor cell `(i,j)` (always `i, j >= 2`); the inequality
/// sums row `i` from column `j` on the left.  `s` holds the path's start
/// plus every vertically-entered node, sorted row-major with one cell per
/// row from the start row through `i-1`.  `violation` is filled by
/// [`separate`] with `x(bar) - x(S) > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SCInequality {
    pub bar: Cell,
    #[serde(rename = "S")]
    pub s: Vec<Cell>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::rat::serde_opt_string"
    )]
    pub violation: Option<Rational>,
}

impl SCInequality {
    /// `x(bar) - x(S)`; positive iff the inequality is violated at `x`.
    pub fn violation_at(&self, x: &OrbiMatrix) -> Rational {
        let lhs: Rational = bar(x.params(), self.bar)
            .into_iter()
            .map(|c| x.get(c.i(), c.j()))
            .sum();
        let rhs: Rational = self.s.iter().map(|c| x.get(c.i(), c.j())).sum();
        lhs - rhs
    }

    pub fn holds(&self, x: &OrbiMatrix) -> bool {
        !self.violation_at(x).is_positive()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("inequality serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for t in 0..k {
        acc = acc * BigUint::from(n - t) / BigUint::from(t + 1);
    }
    acc
}

/// Exact number of shifted-column inequalities for the shape.
///
/// Per anchor `(i,j)` the paths into `(i-1,j-1)` number `C(i-1, j-2)`;
/// summing over anchors telescopes to `sum_{k=1}^{q-1} C(p,k) - (q-1)`.
pub fn count_scis(params: Params) -> BigUint {
    let mut total = BigUint::zero();
    for k in 1..params.q() as u64 {
        total += binomial(params.p() as u64, k);
    }
    total - BigUint::from(params.q() as u64 - 1)
}

fn dfs_paths(a: u32, b: u32, ti: u32, tj: u32, s: &mut Vec<Cell>, emit: &mut dyn FnMut(&[Cell])) {
    if (a, b) == (ti, tj) {
        emit(s);
        return;
    }
    // Rows strictly increase; columns may not overtake the target.
    if tj - b < ti - a {
        s.push(Cell::new(a + 1, b));
        dfs_paths(a + 1, b, ti, tj, s, emit);
        s.pop();
    }
    if b < tj {
        dfs_paths(a + 1, b + 1, ti, tj, s, emit);
    }
}

/// All shifted-column inequalities, anchors row-major, start rows ascending,
/// vertical steps explored before diagonal ones.  Fails with
/// [`Error::SizeCap`] when the closed-form count exceeds `cap`.
pub fn enumerate_scis(params: Params, cap: Option<usize>) -> Result<Vec<SCInequality>, Error> {
    if let Some(cap) = cap {
        let n = count_scis(params);
        if n > BigUint::from(cap) {
            return Err(Error::SizeCap(format!(
                "{n} shifted-column inequalities exceed cap {cap}"
            )));
        }
    }
    let mut out = Vec::new();
    let mut seen: BTreeSet<(Cell, Vec<Cell>)> = BTreeSet::new();
    for anchor in index_set(params) {
        let (i, j) = (anchor.i(), anchor.j());
        if j < 2 {
            continue;
        }
        for l in 1..j {
            let mut s = vec![Cell::new(l, l)];
            dfs_paths(l, l, i - 1, j - 1, &mut s, &mut |cells| {
                if seen.insert((anchor, cells.to_vec())) {
                    out.push(SCInequality {
                        bar: anchor,
                        s: cells.to_vec(),
                        violation: None,
                    });
                }
            });
        }
    }
    Ok(out)
}

/// The original-variable system: nonnegativity, row sums (`<= 1` for
/// packing, `= 1` for partitioning), and every shifted-column inequality.
pub fn sci_system(params: Params, kind: Kind, cap: Option<usize>) -> Result<LinearSystem, Error> {
    let scis = enumerate_scis(params, cap)?;
    let one = Rational::one();
    let mut sys = LinearSystem::new(format!("{kind}_sci_{}x{}", params.p(), params.q()));
    let mut x = std::collections::BTreeMap::new();
    for cell in index_set(params) {
        x.insert(cell, sys.add_var(format!("x_{}_{}", cell.i(), cell.j())));
    }
    for i in 1..=params.p() {
        let coeffs = (1..=params.col_limit(i))
            .map(|j| (x[&Cell::new(i, j)], one.clone()))
            .collect();
        let sense = match kind {
            Kind::Packing => Sense::Le,
            Kind::Partitioning => Sense::Eq,
        };
        sys.add_constraint(format!("row_{i}"), coeffs, sense, one.clone());
    }
    let mut counter = std::collections::BTreeMap::new();
    for sci in &scis {
        let k = counter.entry(sci.bar).or_insert(0usize);
        let mut coeffs: Vec<(usize, Rational)> = bar(params, sci.bar)
            .into_iter()
            .map(|c| (x[&c], one.clone()))
            .collect();
        // S lives strictly above row i, so the two supports are disjoint.
        coeffs.extend(sci.s.iter().map(|c| (x[c], -one.clone())));
        sys.add_constraint(
            format!("sci_{}_{}_{}", sci.bar.i(), sci.bar.j(), k),
            coeffs,
            Sense::Le,
            Rational::zero(),
        );
        *k += 1;
    }
    for cell in index_set(params) {
        sys.add_constraint(
            format!("nn_{}_{}", cell.i(), cell.j()),
            vec![(x[&cell], one.clone())],
            Sense::Ge,
            Rational::zero(),
        );
    }
    Ok(sys)
}

fn first_uncovered_tail(x: &OrbiMatrix, y: &Flow) -> Option<Cell> {
    let params = x.params();
    // w_ij accumulates down each column; z_ij is the row tail sum.
    let mut w_above = vec![Rational::zero(); params.q() as usize + 1];
    for i in 1..=params.p() {
        for j in 1..=params.col_limit(i) {
            w_above[j as usize] += y.get(crate::digraph::Arc::Diagonal { i: i - 1, j: j - 1 });
        }
        let mut tail = Rational::zero();
        let mut hit: Option<Cell> = None;
        for j in (1..=params.col_limit(i)).rev() {
            tail += x.get(i, j);
            if tail > w_above[j as usize] {
                hit = Some(Cell::new(i, j));
            }
        }
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// Exact separation over all shifted-column inequalities.
///
/// Lifts `x` to its rerouted flow, finds the first row-major tail row
/// `x(bar(i,j)) <= y(diag_in)` that fails, and walks the flow backwards from
/// `(i,j)`: an unsaturated entering diagonal is always taken, otherwise the
/// vertical; the walk stops at a diagonal cell whose entering diagonal is
/// saturated.  The walk's vertically-entered nodes (plus its start) form `S`
/// of a violated inequality; whether the violated anchor is `(i,j)` or
/// `(i,j+1)` depends on the arc entering `(i,j)`.
///
/// Returns `Ok(None)` exactly when `x` lies in the packing orbitope.
/// Requires `x >= 0` with row sums at most 1, like [`lift`].
pub fn separate(x: &OrbiMatrix) -> Result<Option<SCInequality>, Error> {
    let y = lift(x)?;
    let params = x.params();
    let Some(cell) = first_uncovered_tail(x, &y) else {
        return Ok(None);
    };
    let (vi, vj) = (cell.i(), cell.j());
    let (mut a, mut b) = (vi, vj);
    let mut rev_arcs = Vec::new();
    let start = loop {
        let diag = crate::digraph::Arc::Diagonal { i: a - 1, j: b - 1 };
        let unsaturated = y.get(diag) < x.get(a, b);
        if unsaturated {
            rev_arcs.push(diag);
            a -= 1;
            b -= 1;
            // Row sums <= 1 force saturation along column 1 and at (1,1),
            // so a genuinely uncovered tail never walks into column 0.
            assert!(b >= 1, "residual walk escaped into column 0");
        } else if a > b {
            rev_arcs.push(crate::digraph::Arc::Vertical { i: a - 1, j: b });
            a -= 1;
        } else {
            break Cell::new(a, b);
        }
    };
    let mut s: BTreeSet<Cell> = BTreeSet::new();
    s.insert(start);
    for arc in &rev_arcs {
        if let crate::digraph::Arc::Vertical { i, j } = arc {
            s.insert(Cell::new(i + 1, *j));
        }
    }
    let anchor = match rev_arcs.first().expect("walk has at least one arc") {
        crate::digraph::Arc::Diagonal { .. } => cell,
        crate::digraph::Arc::Vertical { .. } => {
            s.remove(&cell);
            // z_{i,j+1} > w_{i-1,j} >= 0 in this branch, so the tail is
            // nonempty and the anchor stays inside the index set.
            assert!(vj < params.col_limit(vi));
            Cell::new(vi, vj + 1)
        }
        _ => unreachable!("walk uses grid arcs only"),
    };
    let mut sci = SCInequality {
        bar: anchor,
        s: s.into_iter().collect(),
        violation: None,
    };
    let amount = sci.violation_at(x);
    assert!(
        amount.is_positive(),
        "constructed inequality must cut x off"
    );
    sci.violation = Some(amount);
    Ok(Some(sci))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::lift;
    use crate::rat::{rat, ratio};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

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

    fn cells(list: &[(u32, u32)]) -> Vec<Cell> {
        list.iter().map(|&(i, j)| Cell::new(i, j)).collect()
    }

    #[test]
    fn smallest_shapes_by_hand() {
        // (2,2): the single inequality x_22 <= x_11.
        let scis = enumerate_scis(params(2, 2), None).unwrap();
        assert_eq!(scis.len(), 1);
        assert_eq!(scis[0].bar, Cell::new(2, 2));
        assert_eq!(scis[0].s, cells(&[(1, 1)]));

        // (3,2): additionally x_32 <= x_11 + x_21.
        let scis = enumerate_scis(params(3, 2), None).unwrap();
        let got: Vec<(Cell, Vec<Cell>)> = scis.iter().map(|s| (s.bar, s.s.clone())).collect();
        assert_eq!(
            got,
            vec![
                (Cell::new(2, 2), cells(&[(1, 1)])),
                (Cell::new(3, 2), cells(&[(1, 1), (2, 1)])),
            ]
        );
    }

    #[test]
    fn counts_match_the_closed_form() {
        assert_eq!(count_scis(params(5, 5)), BigUint::from(26u32));
        for &(p, q) in &[(2u32, 2u32), (3, 2), (4, 4), (5, 3), (5, 5), (6, 4), (8, 6)] {
            let scis = enumerate_scis(params(p, q), None).unwrap();
            assert_eq!(
                BigUint::from(scis.len()),
                count_scis(params(p, q)),
                "({p},{q})"
            );
            // The bijection with (S, endpoint) pairs means no duplicates.
            let distinct: BTreeSet<_> = scis.iter().map(|s| (s.bar, s.s.clone())).collect();
            assert_eq!(distinct.len(), scis.len());
        }
    }

    #[test]
    fn anchor_path_counts_are_binomial() {
        // Anchor (8,5) of the 8x6 shape collects C(7,3) = 35 inequalities.
        let scis = enumerate_scis(params(8, 6), None).unwrap();
        let at = scis.iter().filter(|s| s.bar == Cell::new(8, 5)).count();
        assert_eq!(at, 35);
        for sci in scis.iter().filter(|s| s.bar == Cell::new(8, 5)) {
            // S = path start + vertically-entered cells: one cell per
            // column the path rests in, i.e. j - 1 cells in total.
            assert_eq!(sci.s.len(), 4);
            assert_eq!(sci.s[0].i(), sci.s[0].j());
            for pair in sci.s.windows(2) {
                assert!(pair[0].i() < pair[1].i());
                assert!(pair[0].j() <= pair[1].j());
            }
            let last = sci.s.last().unwrap();
            assert!(last.i() <= 7 && last.j() <= 4);
        }
    }

    #[test]
    fn size_cap_guards_enumeration() {
        let pr = params(10, 10);
        assert!(matches!(
            enumerate_scis(pr, Some(5)),
            Err(Error::SizeCap(_))
        ));
        assert!(matches!(
            sci_system(pr, Kind::Packing, Some(5)),
            Err(Error::SizeCap(_))
        ));
        // Large enough caps pass.
        let n: usize = count_scis(pr).try_into().unwrap();
        assert_eq!(enumerate_scis(pr, Some(n)).unwrap().len(), n);
    }

    #[test]
    fn every_inequality_holds_on_every_vertex() {
        for &(p, q) in &[(3u32, 3u32), (4, 3), (4, 4)] {
            let pr = params(p, q);
            let scis = enumerate_scis(pr, None).unwrap();
            for x in crate::lp_oracle::enumerate_vertices(pr, Kind::Packing) {
                for sci in &scis {
                    assert!(
                        sci.holds(&x),
                        "({p},{q}) {} at {:?}",
                        sci.to_json(),
                        x.support()
                    );
                }
            }
        }
    }

    #[test]
    fn sci_system_shape_and_membership() {
        let sys = sci_system(params(2, 2), Kind::Packing, None).unwrap();
        assert_eq!(sys.vars(), &["x_1_1", "x_2_1", "x_2_2"]);
        let names: Vec<&str> = sys.constraints().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            vec!["row_1", "row_2", "sci_2_2_0", "nn_1_1", "nn_2_1", "nn_2_2"]
        );

        let vecs = |x: &OrbiMatrix| -> Vec<Rational> {
            index_set(params(2, 2))
                .into_iter()
                .map(|c| x.get(c.i(), c.j()))
                .collect()
        };
        for support in [vec![], vec![(1, 1)], vec![(1, 1), (2, 2)], vec![(2, 1)]] {
            let x = matrix(
                2,
                2,
                &support
                    .iter()
                    .map(|&(i, j)| (i, j, rat(1)))
                    .collect::<Vec<_>>(),
            );
            assert!(sys.is_feasible(&vecs(&x)), "{support:?}");
        }
        let bad = matrix(2, 2, &[(2, 2, rat(1))]);
        let hit = sys.violated(&vecs(&bad)).unwrap();
        assert_eq!(sys.constraints()[hit].name, "sci_2_2_0");
    }

    #[test]
    fn separation_of_an_integral_outsider() {
        let x = matrix(2, 2, &[(2, 2, rat(1))]);
        let sci = separate(&x).unwrap().expect("x_22 alone is cut off");
        assert_eq!(sci.bar, Cell::new(2, 2));
        assert_eq!(sci.s, cells(&[(1, 1)]));
        assert_eq!(sci.violation, Some(rat(1)));
    }

    #[test]
    fn separation_of_a_fractional_outsider() {
        // Row 2 split across both columns: covered tails force x_22 <= x_11.
        let x = matrix(2, 2, &[(2, 1, ratio(1, 2)), (2, 2, ratio(1, 2))]);
        let sci = separate(&x).unwrap().unwrap();
        assert_eq!(sci.bar, Cell::new(2, 2));
        assert_eq!(sci.s, cells(&[(1, 1)]));
        assert_eq!(sci.violation, Some(ratio(1, 2)));
    }

    #[test]
    fn members_are_never_separated() {
        let zero = OrbiMatrix::zero(params(3, 2));
        assert_eq!(separate(&zero).unwrap(), None);
        let vertex = matrix(3, 2, &[(1, 1, rat(1)), (2, 2, rat(1)), (3, 1, rat(1))]);
        assert_eq!(separate(&vertex).unwrap(), None);
        // Convex combination of vertices stays inside.
        let mix = matrix(
            3,
            2,
            &[
                (1, 1, ratio(1, 2)),
                (2, 2, ratio(1, 4)),
                (2, 1, ratio(1, 4)),
                (3, 1, ratio(1, 2)),
            ],
        );
        assert_eq!(separate(&mix).unwrap(), None);
    }

    #[test]
    fn separation_rejects_bad_input() {
        let heavy = matrix(2, 2, &[(2, 1, rat(1)), (2, 2, rat(1))]);
        assert!(matches!(separate(&heavy), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn separation_agrees_with_enumeration() {
        // separate() returns None exactly when every inequality holds, and
        // any returned inequality is one of the enumerated ones.
        let mut rng = ChaCha8Rng::seed_from_u64(4115);
        for &(p, q) in &[(3u32, 2u32), (4, 3), (4, 4)] {
            let pr = params(p, q);
            let scis = enumerate_scis(pr, None).unwrap();
            for _ in 0..40 {
                let mut x = OrbiMatrix::zero(pr);
                for i in 1..=p {
                    let mut row: Vec<Rational> = (1..=pr.col_limit(i))
                        .map(|_| ratio(rng.gen_range(0..=3), 6))
                        .collect();
                    let total: Rational = row.iter().cloned().sum();
                    if total > rat(1) {
                        for v in &mut row {
                            *v /= &total;
                        }
                    }
                    for (j, v) in row.into_iter().enumerate() {
                        x.set(Cell::new(i, j as u32 + 1), v).unwrap();
                    }
                }
                match separate(&x).unwrap() {
                    None => {
                        for sci in &scis {
                            assert!(sci.holds(&x));
                        }
                        // Lifting certifies membership in this case.
                        let y = lift(&x).unwrap();
                        assert!(crate::formulations::ExtendedPoint::new(x.clone(), y)
                            .unwrap()
                            .is_feasible(Kind::Packing));
                    }
                    Some(found) => {
                        assert!(found.violation_at(&x).is_positive());
                        let key = (found.bar, found.s.clone());
                        assert!(
                            scis.iter().any(|s| (s.bar, s.s.clone()) == key),
                            "separated inequality must be a listed one"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let sci = SCInequality {
            bar: Cell::new(3, 2),
            s: cells(&[(1, 1), (2, 1)]),
            violation: Some(ratio(1, 2)),
        };
        let json = sci.to_json();
        assert!(json.contains("\"S\""));
        assert!(json.contains("\"1/2\""));
        assert_eq!(SCInequality::from_json(&json).unwrap(), sci);

        let bare = SCInequality {
            violation: None,
            ..sci
        };
        let json = bare.to_json();
        assert!(!json.contains("violation"));
        assert_eq!(SCInequality::from_json(&json).unwrap(), bare);
    }
}
