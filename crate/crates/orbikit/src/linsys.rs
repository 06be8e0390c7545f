//! Sparse linear systems with exact rational data, plus deterministic LP and
//! MPS emitters and a small LP reader for round-trips.
//!
//! Variables are free by default; every bound the formulations need is an
//! explicit inequality row, so the emitters declare all variables `free`
//! (LP `Bounds` section, MPS `FR` entries).  Numbers are written exactly:
//! integers stay integers, rationals whose denominators factor over {2, 5}
//! become finite decimals, and any other row is scaled by the least common
//! multiple of its denominators (noted in a comment) so nothing is rounded.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::rat::Rational;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Maximize,
    Minimize,
}

/// One row: named, sparse, exact.  Coefficients are kept sorted by variable
/// index with zeros dropped.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

impl Constraint {
    pub fn lhs_value(&self, point: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(idx, c)| c * &point[*idx]).sum()
    }

    pub fn holds(&self, point: &[Rational]) -> bool {
        let lhs = self.lhs_value(point);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Eq => lhs == self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Objective {
    pub direction: Direction,
    pub coeffs: Vec<(usize, Rational)>,
}

/// A named system of linear constraints over free rational variables, with
/// an optional linear objective.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearSystem {
    name: String,
    vars: Vec<String>,
    index: BTreeMap<String, usize>,
    constraints: Vec<Constraint>,
    objective: Option<Objective>,
}

fn normalize(mut coeffs: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    coeffs.sort_by_key(|(idx, _)| *idx);
    let mut out: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
    for (idx, c) in coeffs {
        match out.last_mut() {
            Some((last, acc)) if *last == idx => *acc += c,
            _ => out.push((idx, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

impl LinearSystem {
    pub fn new(name: impl Into<String>) -> Self {
        LinearSystem {
            name: name.into(),
            vars: Vec::new(),
            index: BTreeMap::new(),
            constraints: Vec::new(),
            objective: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Declares a variable; order of declaration is the column order.
    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        assert!(!self.index.contains_key(&name), "duplicate variable {name}");
        let idx = self.vars.len();
        self.index.insert(name.clone(), idx);
        self.vars.push(name);
        idx
    }

    fn var_or_insert(&mut self, name: &str) -> usize {
        match self.index.get(name) {
            Some(idx) => *idx,
            None => self.add_var(name),
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, Rational)>,
        sense: Sense,
        rhs: Rational,
    ) {
        let coeffs = normalize(coeffs);
        for (idx, _) in &coeffs {
            assert!(*idx < self.vars.len(), "coefficient on undeclared variable");
        }
        assert!(!coeffs.is_empty(), "empty constraint row");
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
    }

    pub fn set_objective(&mut self, direction: Direction, coeffs: Vec<(usize, Rational)>) {
        let coeffs = normalize(coeffs);
        for (idx, _) in &coeffs {
            assert!(*idx < self.vars.len(), "objective on undeclared variable");
        }
        self.objective = Some(Objective { direction, coeffs });
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    /// Index of the first violated constraint, or `None` if `point` is
    /// feasible.  `point` is indexed like [`Self::vars`].
    pub fn violated(&self, point: &[Rational]) -> Option<usize> {
        assert_eq!(point.len(), self.vars.len(), "point has wrong dimension");
        self.constraints.iter().position(|c| !c.holds(point))
    }

    pub fn is_feasible(&self, point: &[Rational]) -> bool {
        self.violated(point).is_none()
    }

    pub fn objective_value(&self, point: &[Rational]) -> Option<Rational> {
        self.objective
            .as_ref()
            .map(|o| o.coeffs.iter().map(|(idx, c)| c * &point[*idx]).sum())
    }

    pub fn stats(&self) -> SystemStats {
        let mut s = SystemStats {
            vars: self.vars.len(),
            ..SystemStats::default()
        };
        for c in &self.constraints {
            s.rows += 1;
            s.nonzeros += c.coeffs.len();
            match c.sense {
                Sense::Le => s.rows_le += 1,
                Sense::Eq => s.rows_eq += 1,
                Sense::Ge => s.rows_ge += 1,
            }
            // A bound row fixes one variable against a constant; equations
            // count as real rows no matter how sparse.
            if c.sense != Sense::Eq && c.coeffs.len() == 1 {
                s.simple_bounds += 1;
            } else {
                s.rows_main += 1;
                s.nonzeros_main += c.coeffs.len();
            }
        }
        s
    }
}

/// Row/column/nonzero counts, with and without single-variable bound rows.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, serde::Serialize, serde::Deserialize)]
pub struct SystemStats {
    pub vars: usize,
    pub rows: usize,
    pub nonzeros: usize,
    pub rows_le: usize,
    pub rows_eq: usize,
    pub rows_ge: usize,
    /// Inequality rows with a single nonzero coefficient.
    pub simple_bounds: usize,
    /// Rows that are not simple bounds.
    pub rows_main: usize,
    pub nonzeros_main: usize,
}

impl fmt::Display for SystemStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} vars, {} rows ({} le / {} eq / {} ge), {} nonzeros; \
             excluding {} simple bounds: {} rows, {} nonzeros",
            self.vars,
            self.rows,
            self.rows_le,
            self.rows_eq,
            self.rows_ge,
            self.nonzeros,
            self.simple_bounds,
            self.rows_main,
            self.nonzeros_main
        )
    }
}

// ---------------------------------------------------------------------------
// Exact numeric rendering shared by the LP and MPS writers.

/// Whether `1/d` has a finite decimal expansion (`d` factors over {2, 5}).
fn decimal_exact(d: &BigInt) -> bool {
    let mut d = d.abs();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    for f in [two, five] {
        loop {
            let (quo, rem) = d.div_rem(&f);
            if rem.is_zero() {
                d = quo;
            } else {
                break;
            }
        }
    }
    d.is_one()
}

/// Finite decimal string of an exactly representable rational (no rounding,
/// no trailing zeros).
fn decimal_string(r: &Rational) -> String {
    let denom = r.denom();
    if denom.is_one() {
        return r.numer().to_string();
    }
    let mut k = 0u32;
    let mut scale = BigInt::one();
    let ten = BigInt::from(10);
    while !(&scale % denom).is_zero() {
        scale *= &ten;
        k += 1;
    }
    debug_assert!(k > 0);
    let m = r.numer() * (&scale / denom);
    let neg = m.is_negative();
    let digits = m.abs().to_string();
    let digits = if digits.len() <= k as usize {
        format!("{}{}", "0".repeat(k as usize + 1 - digits.len()), digits)
    } else {
        digits
    };
    let split = digits.len() - k as usize;
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&digits[..split]);
    out.push('.');
    out.push_str(&digits[split..]);
    out
}

struct RenderedRow {
    name: String,
    /// `(var index, coefficient string)`; the string carries its own sign.
    terms: Vec<(usize, String)>,
    sense: Sense,
    rhs: String,
    scaled_by: Option<BigInt>,
}

type Renderer = Box<dyn Fn(&Rational) -> String>;

/// Renders one row exactly: integers as-is, decimal-exact data as decimals,
/// anything else scaled row-wise to integers.
fn render_row(
    name: &str,
    coeffs: &[(usize, Rational)],
    sense: Sense,
    rhs: &Rational,
) -> RenderedRow {
    let mut lcm = rhs.denom().clone();
    for (_, c) in coeffs {
        lcm = lcm.lcm(c.denom());
    }
    let (scaled_by, render): (Option<BigInt>, Renderer) = if lcm.is_one() {
        (None, Box::new(|r: &Rational| r.numer().to_string()))
    } else if decimal_exact(&lcm) {
        (None, Box::new(decimal_string))
    } else {
        let l = lcm.clone();
        (
            Some(lcm.clone()),
            Box::new(move |r: &Rational| (r.numer() * (&l / r.denom())).to_string()),
        )
    };
    RenderedRow {
        name: name.to_string(),
        terms: coeffs.iter().map(|(i, c)| (*i, render(c))).collect(),
        sense,
        rhs: render(rhs),
        scaled_by,
    }
}

fn rendered_rows(sys: &LinearSystem) -> Vec<RenderedRow> {
    sys.constraints
        .iter()
        .map(|c| render_row(&c.name, &c.coeffs, c.sense, &c.rhs))
        .collect()
}

/// LP-style sum of terms: `x - 2 y + 0.5 z`.
fn lp_terms(sys: &LinearSystem, terms: &[(usize, String)]) -> String {
    let mut out = String::new();
    for (n, (idx, coeff)) in terms.iter().enumerate() {
        let (neg, mag) = match coeff.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, coeff.as_str()),
        };
        if n == 0 {
            if neg {
                out.push_str("- ");
            }
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if mag != "1" {
            out.push_str(mag);
            out.push(' ');
        }
        out.push_str(&sys.vars[*idx]);
    }
    out
}

impl LinearSystem {
    /// Deterministic LP-format text.  All variables are declared free; the
    /// output is parseable by [`LinearSystem::from_lp_str`].
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("\\ {}\n", self.name));
        let (dir, obj_terms, obj_scale) = match &self.objective {
            Some(o) => {
                let row = render_row("obj", &o.coeffs, Sense::Eq, &Rational::zero());
                (
                    match o.direction {
                        Direction::Maximize => "Maximize",
                        Direction::Minimize => "Minimize",
                    },
                    lp_terms(self, &row.terms),
                    row.scaled_by,
                )
            }
            None => ("Minimize", String::new(), None),
        };
        if let Some(scale) = obj_scale {
            out.push_str(&format!("\\ objective scaled by {scale}\n"));
        }
        out.push_str(dir);
        out.push('\n');
        if obj_terms.is_empty() {
            out.push_str(" obj:\n");
        } else {
            out.push_str(&format!(" obj: {obj_terms}\n"));
        }
        out.push_str("Subject To\n");
        for row in rendered_rows(self) {
            if let Some(scale) = &row.scaled_by {
                out.push_str(&format!(" \\ scaled by {scale}\n"));
            }
            out.push_str(&format!(
                " {}: {} {} {}\n",
                row.name,
                lp_terms(self, &row.terms),
                row.sense,
                row.rhs
            ));
        }
        out.push_str("Bounds\n");
        for v in &self.vars {
            out.push_str(&format!(" {v} free\n"));
        }
        out.push_str("End\n");
        out
    }

    /// Deterministic free-form MPS text (all variables `FR`).
    pub fn to_mps_string(&self) -> String {
        let rows = rendered_rows(self);
        let obj_row = self
            .objective
            .as_ref()
            .map(|o| render_row("obj", &o.coeffs, Sense::Eq, &Rational::zero()));

        let mut out = String::new();
        out.push_str(&format!("NAME {}\n", self.name));
        if let Some(o) = &self.objective {
            out.push_str("OBJSENSE\n");
            out.push_str(match o.direction {
                Direction::Maximize => "    MAX\n",
                Direction::Minimize => "    MIN\n",
            });
        }
        out.push_str("ROWS\n N obj\n");
        for row in &rows {
            let tag = match row.sense {
                Sense::Le => 'L',
                Sense::Eq => 'E',
                Sense::Ge => 'G',
            };
            out.push_str(&format!(" {tag} {}\n", row.name));
        }
        // Column-major: every (row, coefficient) entry of each variable.
        let mut columns: Vec<Vec<(&str, &str)>> = vec![Vec::new(); self.vars.len()];
        if let Some(o) = &obj_row {
            for (idx, coeff) in &o.terms {
                columns[*idx].push(("obj", coeff));
            }
        }
        for row in &rows {
            for (idx, coeff) in &row.terms {
                columns[*idx].push((&row.name, coeff));
            }
        }
        out.push_str("COLUMNS\n");
        for (idx, entries) in columns.iter().enumerate() {
            for (row_name, coeff) in entries {
                out.push_str(&format!("    {} {row_name} {coeff}\n", self.vars[idx]));
            }
        }
        out.push_str("RHS\n");
        for row in &rows {
            if row.rhs != "0" {
                out.push_str(&format!("    rhs {} {}\n", row.name, row.rhs));
            }
        }
        out.push_str("BOUNDS\n");
        for v in &self.vars {
            out.push_str(&format!(" FR bnd {v}\n"));
        }
        out.push_str("ENDATA\n");
        out
    }

    /// Parses the LP subset emitted by [`LinearSystem::to_lp_string`]:
    /// objective, constraints with `<=`/`=`/`>=`, and a Bounds section of
    /// `free` declarations (which fixes the variable order).
    pub fn from_lp_str(text: &str) -> Result<Self, Error> {
        parse_lp(text)
    }
}

// ---------------------------------------------------------------------------
// LP reader (subset).

#[derive(Clone, Copy, PartialEq)]
enum LpSection {
    Preamble,
    Objective(Direction),
    Constraints,
    Bounds,
    Done,
}

struct ParsedRow {
    name: String,
    terms: Vec<(String, Rational)>,
    sense: Sense,
    rhs: Rational,
}

fn parse_lp(text: &str) -> Result<LinearSystem, Error> {
    let mut name = String::from("lp");
    let mut section = LpSection::Preamble;
    let mut objective: Option<(Direction, Vec<(String, Rational)>)> = None;
    let mut rows: Vec<ParsedRow> = Vec::new();
    let mut free_vars: Vec<String> = Vec::new();
    let mut obj_text = String::new();
    let mut saw_name_comment = false;

    for raw in text.lines() {
        let line = match raw.find('\\') {
            Some(pos) => {
                // The very first comment is the system name.
                if !saw_name_comment && matches!(section, LpSection::Preamble) {
                    let candidate = raw[pos + 1..].trim();
                    if !candidate.is_empty() {
                        name = candidate.to_string();
                    }
                    saw_name_comment = true;
                }
                &raw[..pos]
            }
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        match lower.as_str() {
            "maximize" | "max" => {
                section = LpSection::Objective(Direction::Maximize);
                continue;
            }
            "minimize" | "min" => {
                section = LpSection::Objective(Direction::Minimize);
                continue;
            }
            "subject to" | "st" | "s.t." | "such that" => {
                if let LpSection::Objective(dir) = section {
                    objective = Some((dir, parse_terms(strip_label(&obj_text))?));
                }
                section = LpSection::Constraints;
                continue;
            }
            "bounds" => {
                section = LpSection::Bounds;
                continue;
            }
            "end" => {
                section = LpSection::Done;
                continue;
            }
            _ => {}
        }
        match section {
            LpSection::Preamble | LpSection::Done => {
                return Err(Error::Parse(format!("unexpected LP line {line:?}")));
            }
            LpSection::Objective(_) => {
                obj_text.push(' ');
                obj_text.push_str(line);
            }
            LpSection::Constraints => rows.push(parse_constraint(line)?),
            LpSection::Bounds => {
                let mut it = line.split_whitespace();
                match (it.next(), it.next(), it.next()) {
                    (Some(v), Some(kind), None) if kind.eq_ignore_ascii_case("free") => {
                        free_vars.push(v.to_string());
                    }
                    _ => {
                        return Err(Error::Parse(format!(
                            "unsupported bound {line:?} (only `var free`)"
                        )));
                    }
                }
            }
        }
    }
    if let LpSection::Objective(dir) = section {
        objective = Some((dir, parse_terms(strip_label(&obj_text))?));
    }

    let mut sys = LinearSystem::new(name);
    for v in free_vars {
        sys.var_or_insert(&v);
    }
    let resolve = |sys: &mut LinearSystem, terms: Vec<(String, Rational)>| {
        terms
            .into_iter()
            .map(|(v, c)| (sys.var_or_insert(&v), c))
            .collect::<Vec<_>>()
    };
    for row in rows {
        let coeffs = resolve(&mut sys, row.terms);
        sys.add_constraint(row.name, coeffs, row.sense, row.rhs);
    }
    if let Some((dir, terms)) = objective {
        let coeffs = resolve(&mut sys, terms);
        sys.set_objective(dir, coeffs);
    }
    Ok(sys)
}

fn strip_label(text: &str) -> &str {
    match text.find(':') {
        Some(pos) => &text[pos + 1..],
        None => text,
    }
}

fn parse_constraint(line: &str) -> Result<ParsedRow, Error> {
    let (name, rest) = match line.find(':') {
        Some(pos) => (line[..pos].trim().to_string(), &line[pos + 1..]),
        None => return Err(Error::Parse(format!("constraint without name: {line:?}"))),
    };
    let (sense, op) = if let Some(pos) = rest.find("<=") {
        (Sense::Le, pos)
    } else if let Some(pos) = rest.find(">=") {
        (Sense::Ge, pos)
    } else if let Some(pos) = rest.find('=') {
        (Sense::Eq, pos)
    } else {
        return Err(Error::Parse(format!("constraint without sense: {line:?}")));
    };
    let lhs = &rest[..op];
    let rhs_text = rest[op..].trim_start_matches(['<', '>', '=']).trim();
    Ok(ParsedRow {
        name,
        terms: parse_terms(lhs)?,
        sense,
        rhs: parse_lp_number(rhs_text)?,
    })
}

/// `- 2 x + y - 0.5 z` -> [(x, -2), (y, 1), (z, -1/2)].
fn parse_terms(text: &str) -> Result<Vec<(String, Rational)>, Error> {
    let mut terms = Vec::new();
    let mut sign = Rational::one();
    let mut coeff: Option<Rational> = None;
    for tok in text
        .replace('+', " + ")
        .replace('-', " - ")
        .split_whitespace()
    {
        match tok {
            "+" => {}
            "-" => sign = -sign,
            _ if tok.starts_with(|c: char| c.is_ascii_digit() || c == '.') => {
                if coeff.is_some() {
                    return Err(Error::Parse(format!(
                        "two coefficients before a variable near {tok:?}"
                    )));
                }
                coeff = Some(parse_lp_number(tok)?);
            }
            _ => {
                let c = coeff.take().unwrap_or_else(Rational::one);
                terms.push((tok.to_string(), &sign * c));
                sign = Rational::one();
            }
        }
    }
    if coeff.is_some() {
        return Err(Error::Parse("dangling coefficient".into()));
    }
    Ok(terms)
}

/// Integer or finite decimal, with optional sign; exact.
fn parse_lp_number(text: &str) -> Result<Rational, Error> {
    let t = text.trim();
    let bad = || Error::Parse(format!("bad number {t:?}"));
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || (int_part.is_empty() && frac_part.is_empty())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = BigInt::from(10).pow(frac_part.len() as u32);
    let r = Rational::new(numer, denom);
    Ok(if neg { -r } else { r })
}
