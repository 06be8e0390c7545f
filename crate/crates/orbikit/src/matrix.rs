//! Core domain types: problem parameters, cells of the triangular index set,
//! and sparse rational matrices over it.
//!
//! A matrix `x` lives on the index set `I(p,q) = {(i,j) : 1 <= j <= i or
//! j <= q, j <= min(i,q)}`, i.e. all positions `(i,j)` with `1 <= i <= p`,
//! `1 <= j <= min(i,q)`.  Positions above the main diagonal are identically
//! zero for every matrix with lexicographically sorted columns and are never
//! stored.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rat::{parse_rational, Rational};

/// Shape of the orbitope: `p` rows, `q` columns, `p >= q >= 1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct Params {
    p: u32,
    q: u32,
}

impl Params {
    pub fn new(p: u32, q: u32) -> Result<Self, Error> {
        if q == 0 || p < q {
            return Err(Error::InvalidParams(format!(
                "need p >= q >= 1, got p = {p}, q = {q}"
            )));
        }
        Ok(Params { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of admissible columns in row `i`: `q(i) = min(i, q)`.
    pub fn col_limit(&self, i: u32) -> u32 {
        i.min(self.q)
    }

    /// `|I(p,q)| = p*q - q*(q-1)/2`.
    pub fn cell_count(&self) -> usize {
        let (p, q) = (self.p as usize, self.q as usize);
        p * q - q * (q - 1) / 2
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.i <= self.p && cell.j <= self.col_limit(cell.i)
    }
}

/// Which polytope: at most one 1 per row, or exactly one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Kind {
    Packing,
    Partitioning,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Packing => "packing",
            Kind::Partitioning => "partitioning",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "packing" => Ok(Kind::Packing),
            "partitioning" => Ok(Kind::Partitioning),
            _ => Err(Error::Parse(format!("unknown kind: {s:?}"))),
        }
    }
}

/// A position `(i,j)` with `1 <= j <= i`; 1-based, row-major `Ord`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "CellRepr", into = "CellRepr")]
pub struct Cell {
    i: u32,
    j: u32,
}

impl Cell {
    /// Panics unless `1 <= j <= i`; use [`Cell::try_new`] for untrusted input.
    pub fn new(i: u32, j: u32) -> Self {
        Cell::try_new(i, j).unwrap_or_else(|| panic!("invalid cell ({i},{j})"))
    }

    pub fn try_new(i: u32, j: u32) -> Option<Self> {
        (1 <= j && j <= i).then_some(Cell { i, j })
    }

    pub fn i(&self) -> u32 {
        self.i
    }

    pub fn j(&self) -> u32 {
        self.j
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

#[derive(Serialize, Deserialize)]
struct CellRepr {
    i: u32,
    j: u32,
}

impl From<Cell> for CellRepr {
    fn from(c: Cell) -> Self {
        CellRepr { i: c.i, j: c.j }
    }
}

impl TryFrom<CellRepr> for Cell {
    type Error = Error;

    fn try_from(r: CellRepr) -> Result<Self, Error> {
        Cell::try_new(r.i, r.j)
            .ok_or_else(|| Error::InvalidInput(format!("invalid cell ({},{})", r.i, r.j)))
    }
}

/// All cells of `I(p,q)` in row-major order.
pub fn index_set(params: Params) -> Vec<Cell> {
    let mut cells = Vec::with_capacity(params.cell_count());
    for i in 1..=params.p() {
        for j in 1..=params.col_limit(i) {
            cells.push(Cell::new(i, j));
        }
    }
    cells
}

/// Sparse rational matrix over `I(p,q)`; absent entries are zero.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct OrbiMatrix {
    params: Params,
    entries: BTreeMap<Cell, Rational>,
}

impl OrbiMatrix {
    pub fn zero(params: Params) -> Self {
        OrbiMatrix {
            params,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a matrix from `((i,j), value)` pairs.  Rejects positions outside
    /// `I(p,q)` and duplicate positions; zero values are dropped.
    pub fn from_entries<E>(params: Params, entries: E) -> Result<Self, Error>
    where
        E: IntoIterator<Item = ((u32, u32), Rational)>,
    {
        let mut m = OrbiMatrix::zero(params);
        for ((i, j), v) in entries {
            let cell = Cell::try_new(i, j)
                .filter(|c| params.contains(*c))
                .ok_or_else(|| {
                    Error::InvalidInput(format!("({i},{j}) is outside the index set"))
                })?;
            if m.entries.contains_key(&cell) {
                return Err(Error::InvalidInput(format!("duplicate entry for {cell}")));
            }
            if !v.is_zero() {
                m.entries.insert(cell, v);
            }
        }
        Ok(m)
    }

    pub fn params(&self) -> Params {
        self.params
    }

    /// Entry at `(i,j)`; zero for any position not stored (including positions
    /// outside the index set, which are identically zero).
    pub fn get(&self, i: u32, j: u32) -> Rational {
        Cell::try_new(i, j)
            .and_then(|c| self.entries.get(&c).cloned())
            .unwrap_or_else(Rational::zero)
    }

    /// Sets the entry at a cell of `I(p,q)`; setting zero removes it.
    pub fn set(&mut self, cell: Cell, value: Rational) -> Result<(), Error> {
        if !self.params.contains(cell) {
            return Err(Error::InvalidInput(format!(
                "{cell} is outside the index set"
            )));
        }
        if value.is_zero() {
            self.entries.remove(&cell);
        } else {
            self.entries.insert(cell, value);
        }
        Ok(())
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (Cell, &Rational)> {
        self.entries.iter().map(|(c, v)| (*c, v))
    }

    /// Cells with a nonzero entry, row-major.
    pub fn support(&self) -> Vec<Cell> {
        self.entries.keys().copied().collect()
    }

    pub fn row_sum(&self, i: u32) -> Rational {
        let hi = self.params.col_limit(i);
        if i == 0 || hi == 0 {
            return Rational::zero();
        }
        self.entries
            .range(Cell::new(i, 1)..=Cell::new(i, hi))
            .map(|(_, v)| v)
            .sum()
    }

    /// `sum over cells of self * other` (exact).
    pub fn dot(&self, other: &OrbiMatrix) -> Rational {
        self.entries
            .iter()
            .map(|(c, v)| v * other.get(c.i, c.j))
            .sum()
    }

    pub fn is_nonneg(&self) -> bool {
        self.entries.values().all(|v| !v.is_negative())
    }

    pub fn is_zero_one(&self) -> bool {
        self.entries.values().all(|v| v.is_one())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether this matrix is a vertex of the chosen orbitope: all entries
    /// 0/1, row sums at most one (exactly one for partitioning), and columns —
    /// padded with zeros above the diagonal — lexicographically non-increasing.
    pub fn is_vertex(&self, kind: Kind) -> bool {
        if !self.is_zero_one() {
            return false;
        }
        for i in 1..=self.params.p() {
            let s = self.row_sum(i);
            let ok = match kind {
                Kind::Packing => s <= Rational::one(),
                Kind::Partitioning => s.is_one(),
            };
            if !ok {
                return false;
            }
        }
        for j in 1..self.params.q() {
            if !self.column_ge(j, j + 1) {
                return false;
            }
        }
        true
    }

    /// Lexicographic comparison of columns `a` and `b` as length-`p` vectors.
    fn column_ge(&self, a: u32, b: u32) -> bool {
        for i in 1..=self.params.p() {
            let va = self.get(i, a);
            let vb = self.get(i, b);
            if va != vb {
                return va > vb;
            }
        }
        true
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    p: u32,
    q: u32,
    entries: Vec<EntryRepr>,
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    i: u32,
    j: u32,
    v: String,
}

impl From<OrbiMatrix> for MatrixRepr {
    fn from(m: OrbiMatrix) -> Self {
        MatrixRepr {
            p: m.params.p(),
            q: m.params.q(),
            entries: m
                .entries
                .iter()
                .map(|(c, v)| EntryRepr {
                    i: c.i,
                    j: c.j,
                    v: v.to_string(),
                })
                .collect(),
        }
    }
}

impl TryFrom<MatrixRepr> for OrbiMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self, Error> {
        let params = Params::new(r.p, r.q)?;
        OrbiMatrix::from_entries(
            params,
            r.entries
                .into_iter()
                .map(|e| Ok(((e.i, e.j), parse_rational(&e.v)?)))
                .collect::<Result<Vec<_>, Error>>()?,
        )
    }
}
